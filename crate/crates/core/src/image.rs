//! Grayscale image container and bit-level pixel access.
//!
//! Every stage of the scheme works on 8-bit single-channel images in
//! row-major order. Color inputs are reduced to luma at decode time (in the
//! companion crate); the core never sees more than one channel.

use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImageError {
    #[error("pixel buffer of {pixels} bytes does not match {width}x{height}")]
    InvalidDimensions {
        width: u32,
        height: u32,
        pixels: usize,
    },
    #[error("bit position {0} outside 1..=8")]
    PositionOutOfRange(u8),
}

/// 8-bit grayscale image, pixels in raster order (row by row, top to bottom).
///
/// Immutable by convention: the pipeline never mutates a shared image, it
/// clones and rewrites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, ImageError> {
        if pixels.len() != width as usize * height as usize {
            return Err(ImageError::InvalidDimensions {
                width,
                height,
                pixels: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, value: u8) -> Self {
        Self {
            width,
            height,
            pixels: vec![value; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        self.pixels[y as usize * self.width as usize + x as usize] = value;
    }

    /// Maps every pixel through `f`, yielding a new image.
    pub fn map(&self, mut f: impl FnMut(u8) -> u8) -> Self {
        Self {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| f(p)).collect(),
        }
    }
}

/// Bit `position` of a pixel, numbered 1 (most significant) through 8
/// (least significant).
pub fn get_bit(pixel: u8, position: u8) -> Result<u8, ImageError> {
    if !(1..=8).contains(&position) {
        return Err(ImageError::PositionOutOfRange(position));
    }
    Ok((pixel >> (8 - position)) & 1)
}

/// Converts an sRGB triple to 8-bit luma (0.299 R + 0.587 G + 0.114 B,
/// rounded to nearest).
pub fn luma_from_rgb(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
    crate::math::round(y) as u8
}

/// Walks the low-bit payload slots of an image, one slot per embeddable bit.
///
/// A pixel with budget `k` exposes `k` slots, ordered from the highest
/// cleared bit (position `k-1`) down to bit 0. Pixels with `k = 0` are
/// skipped entirely. The cursor only hands out positions; reading and
/// writing stays with the caller.
#[derive(Debug, Clone)]
pub struct BitCursor {
    pixel: usize,
    used: u8,
}

impl BitCursor {
    pub fn new(start_pixel: usize) -> Self {
        Self {
            pixel: start_pixel,
            used: 0,
        }
    }

    /// Next `(pixel_index, bit_position)` slot, where `bit_position` counts
    /// from 0 at the least significant bit. `budget(pixel)` gives each
    /// pixel's `k`; `None` once `pixel_count` is exhausted.
    pub fn next_slot(
        &mut self,
        pixel_count: usize,
        mut budget: impl FnMut(usize) -> u8,
    ) -> Option<(usize, u8)> {
        while self.pixel < pixel_count {
            let k = budget(self.pixel).min(8);
            if self.used < k {
                // Highest cleared bit first: k-1, k-2, ..., 0.
                let bit = k - 1 - self.used;
                self.used += 1;
                return Some((self.pixel, bit));
            }
            self.pixel += 1;
            self.used = 0;
        }
        None
    }
}
