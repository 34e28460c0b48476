//! Gaussian pyramid construction.

use alloc::vec::Vec;

use super::plane::Plane;
use super::{SiftError, SiftParams};
use crate::image::Image;
use crate::math;

/// One octave: `levels + 1` Gaussian images and their `levels` differences.
#[derive(Debug, Clone)]
pub struct OctaveStack {
    pub(crate) gaussians: Vec<Plane>,
    pub(crate) dogs: Vec<Plane>,
    /// Input-image pixels per octave pixel (2^octave).
    pub scale: f64,
}

impl OctaveStack {
    pub fn width(&self) -> usize {
        self.gaussians[0].width
    }

    pub fn height(&self) -> usize {
        self.gaussians[0].height
    }

    /// DoG value at integer coordinates, used by oracle-style tests.
    pub fn dog_value(&self, level: usize, x: usize, y: usize) -> f64 {
        self.dogs[level].at(x, y)
    }

    /// Gaussian value at integer coordinates.
    pub fn gaussian_value(&self, level: usize, x: usize, y: usize) -> f64 {
        self.gaussians[level].at(x, y)
    }
}

/// The whole pyramid plus the geometry constants shared by every stage.
#[derive(Debug, Clone)]
pub struct ScaleSpace {
    pub octaves: Vec<OctaveStack>,
    /// Scale multiplier between adjacent levels: 2^(1/(levels-2)).
    pub k: f64,
    pub base_sigma: f64,
    /// DoG levels per octave.
    pub levels: usize,
}

impl ScaleSpace {
    /// Blur of Gaussian level `level` within `octave`, in input-image units.
    pub fn sigma_at(&self, octave: usize, level: f64) -> f64 {
        self.base_sigma * math::powf(self.k, level) * self.octaves[octave].scale
    }
}

/// Builds the pyramid.
///
/// Octave zero starts at the input resolution, pre-blurred from
/// `input_sigma` up to `base_sigma`. Each next octave starts from a 2x
/// downsample of the level whose blur is exactly twice the octave base, so
/// effective sigma doubles octave to octave. Octaves whose shorter side
/// would drop below 8 pixels are silently skipped.
pub fn build_scale_space(img: &Image, params: &SiftParams) -> Result<ScaleSpace, SiftError> {
    if img.width() < 16 || img.height() < 16 {
        return Err(SiftError::ImageTooSmall {
            width: img.width(),
            height: img.height(),
        });
    }
    let levels = (params.levels_per_octave.max(3)) as usize;
    let gauss_levels = levels + 1;
    let k = math::powf(2.0, 1.0 / (levels as f64 - 2.0));

    let mut base = Plane::from_image(img);
    if params.base_sigma > params.input_sigma {
        let boot = math::sqrt(
            params.base_sigma * params.base_sigma - params.input_sigma * params.input_sigma,
        );
        base = base.gaussian_blur(boot);
    }

    let mut octaves = Vec::new();
    let mut carry = base;
    for o in 0..params.num_octaves {
        if carry.width < 8 || carry.height < 8 {
            break;
        }
        let mut gaussians = Vec::with_capacity(gauss_levels);
        gaussians.push(carry);
        for s in 1..gauss_levels {
            let prev_sigma = params.base_sigma * math::powf(k, s as f64 - 1.0);
            let increment = prev_sigma * math::sqrt(k * k - 1.0);
            let next = gaussians[s - 1].gaussian_blur(increment);
            gaussians.push(next);
        }
        let dogs = (0..levels)
            .map(|s| gaussians[s].difference_to(&gaussians[s + 1]))
            .collect();
        // Level `levels - 2` carries blur 2 * base_sigma by construction.
        carry = gaussians[levels - 2].downsample_half();
        octaves.push(OctaveStack {
            gaussians,
            dogs,
            scale: math::powi(2.0, o as i32),
        });
    }
    Ok(ScaleSpace {
        octaves,
        k,
        base_sigma: params.base_sigma,
        levels,
    })
}
