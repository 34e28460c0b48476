//! Floating-point image plane with the separable Gaussian filtering the
//! scale space is built from.

use alloc::vec;
use alloc::vec::Vec;

use crate::image::Image;
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub(crate) width: usize,
    pub(crate) height: usize,
    pub(crate) data: Vec<f64>,
}

impl Plane {
    /// Intensities normalized to [0, 1].
    pub(crate) fn from_image(img: &Image) -> Self {
        Self {
            width: img.width() as usize,
            height: img.height() as usize,
            data: img.pixels().iter().map(|&p| p as f64 / 255.0).collect(),
        }
    }

    #[inline]
    pub(crate) fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Separable Gaussian blur with edge replication at the borders.
    pub(crate) fn gaussian_blur(&self, sigma: f64) -> Plane {
        if sigma <= 0.0 {
            return self.clone();
        }
        let radius = (math::ceil(4.0 * sigma) as usize).max(1);
        let mut kernel = vec![0.0f64; radius + 1];
        let mut sum = 0.0;
        for (i, k) in kernel.iter_mut().enumerate() {
            *k = math::exp(-((i * i) as f64) / (2.0 * sigma * sigma));
            sum += if i == 0 { *k } else { 2.0 * *k };
        }
        for k in &mut kernel {
            *k /= sum;
        }

        let (w, h) = (self.width, self.height);
        let clamp = |v: isize, hi: usize| v.clamp(0, hi as isize - 1) as usize;

        let mut horizontal = vec![0.0f64; w * h];
        for y in 0..h {
            let row = &self.data[y * w..(y + 1) * w];
            for x in 0..w {
                let mut acc = kernel[0] * row[x];
                for i in 1..=radius {
                    let left = row[clamp(x as isize - i as isize, w)];
                    let right = row[clamp(x as isize + i as isize, w)];
                    acc += kernel[i] * (left + right);
                }
                horizontal[y * w + x] = acc;
            }
        }

        let mut out = vec![0.0f64; w * h];
        for y in 0..h {
            for x in 0..w {
                let mut acc = kernel[0] * horizontal[y * w + x];
                for i in 1..=radius {
                    let up = horizontal[clamp(y as isize - i as isize, h) * w + x];
                    let down = horizontal[clamp(y as isize + i as isize, h) * w + x];
                    acc += kernel[i] * (up + down);
                }
                out[y * w + x] = acc;
            }
        }
        Plane {
            width: w,
            height: h,
            data: out,
        }
    }

    /// Every second sample in both directions.
    pub(crate) fn downsample_half(&self) -> Plane {
        let w = (self.width / 2).max(1);
        let h = (self.height / 2).max(1);
        let mut data = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                data.push(self.at(x * 2, y * 2));
            }
        }
        Plane {
            width: w,
            height: h,
            data,
        }
    }

    /// `other - self`, the difference-of-Gaussians layer when `other` is the
    /// next blur level up.
    pub(crate) fn difference_to(&self, other: &Plane) -> Plane {
        debug_assert_eq!(self.width, other.width);
        debug_assert_eq!(self.height, other.height);
        Plane {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| b - a)
                .collect(),
        }
    }
}
