//! Scale-invariant keypoint detection and description.
//!
//! The detector follows the classical recipe: a Gaussian scale-space
//! pyramid, difference-of-Gaussians extrema, sub-pixel refinement with
//! contrast and edge rejection, gradient-histogram orientation assignment,
//! and a 4x4x8 descriptor with tri-linear binning, 0.2 clamping, and unit
//! normalization.
//!
//! Everything is deterministic: fixed iteration order, no randomness, and
//! all transcendentals routed through one math backend, so identical input
//! bytes give identical keypoints and descriptors on every platform.

mod descriptor;
mod detect;
mod plane;
mod scale_space;

use alloc::vec::Vec;
use thiserror::Error;

use crate::image::Image;

pub use descriptor::{assign_orientation, compute_descriptor};
pub use detect::{dog_extrema, refine_and_filter, Candidate};
pub use scale_space::{build_scale_space, OctaveStack, ScaleSpace};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SiftError {
    #[error("image {width}x{height} is below the 16x16 minimum")]
    ImageTooSmall { width: u32, height: u32 },
    #[error("descriptor window leaves the image")]
    WindowOutOfBounds,
    #[error("descriptor window has no gradient energy")]
    FlatWindow,
}

/// Detector and descriptor tuning knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiftParams {
    /// Maximum number of octaves; fewer are built if the image runs out of
    /// resolution.
    pub num_octaves: u32,
    /// Difference-of-Gaussians levels per octave. The Gaussian stack holds
    /// one more image, and extrema are searched on the interior levels.
    pub levels_per_octave: u32,
    /// Blur of the first level of the first octave.
    pub base_sigma: f64,
    /// Blur assumed already present in the input image.
    pub input_sigma: f64,
    /// Minimum |D| at the interpolated extremum, on intensities in [0, 1].
    pub contrast_threshold: f64,
    /// Principal-curvature ratio bound for edge rejection.
    pub edge_ratio: f64,
    /// Keypoints below this scale (input-image units) are discarded.
    pub min_scale: f64,
}

impl Default for SiftParams {
    fn default() -> Self {
        Self {
            num_octaves: 4,
            levels_per_octave: 5,
            base_sigma: 1.6,
            input_sigma: 0.5,
            contrast_threshold: 0.03,
            edge_ratio: 10.0,
            min_scale: 1.5,
        }
    }
}

/// A refined, scale-assigned keypoint.
///
/// `x`, `y`, and `sigma` are in input-image units; the `*_oct` fields keep
/// the octave-local placement the descriptor samples from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub sigma: f64,
    /// Gradient magnitude at the keypoint's lattice position.
    pub magnitude: f64,
    /// Orientation in [0, 2*pi); zero until assigned.
    pub theta: f64,
    /// |D| at the interpolated extremum.
    pub response: f64,
    pub octave: usize,
    /// Gaussian level the orientation and descriptor sample from.
    pub level: usize,
    pub x_oct: f64,
    pub y_oct: f64,
    pub sigma_oct: f64,
}

/// 128-element feature vector with its owning keypoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    pub values: [f64; 128],
    pub keypoint: Keypoint,
}

/// Full pipeline: scale space, extrema, refinement, orientations,
/// descriptors. Keypoints whose descriptor window leaves the image are
/// dropped silently, as are flat windows.
pub fn detect_and_describe(img: &Image, params: &SiftParams) -> Result<Vec<Descriptor>, SiftError> {
    let space = build_scale_space(img, params)?;
    let candidates = dog_extrema(&space);
    let keypoints = refine_and_filter(&space, &candidates, params);
    let mut descriptors = Vec::new();
    for kp in keypoints {
        for oriented in assign_orientation(&kp, &space, params) {
            match compute_descriptor(&oriented, &space) {
                Ok(d) => descriptors.push(d),
                Err(SiftError::WindowOutOfBounds | SiftError::FlatWindow) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(descriptors)
}
