//! Core algorithms for the ChaosVeil image cryptology scheme.
//!
//! The pipeline hides a message image inside a cover image in four stages:
//!
//! 1. [`sift`] detects keypoints on the (stabilized) cover and computes
//!    128-element descriptors.
//! 2. [`keyforge`] reduces the strongest descriptor to a 128-bit raw key and
//!    derives the control parameters of a chaotic cellular non-linear
//!    network from it.
//! 3. [`chaoscrypt`] integrates the 3-cell CNN with a fixed-step RK4 solver,
//!    maps the trajectory to a keystream, and XORs it with the message.
//! 4. [`stego`] embeds the cipher into the cover's least significant bits,
//!    with a per-pixel bit budget `k` driven by the same CNN.
//!
//! Both parties derive the key independently from the cover, so no key
//! material is ever exchanged: the receiver recovers it from the stego image
//! because embedding never touches the bits the key depends on.
//!
//! [`analysis`] provides the evaluation metrics (entropy, PSNR, SSIM,
//! correlation, LOWESS trends, occlusion attacks) and [`pipeline`] wires the
//! stages together.
//!
//! This crate is `no_std` (with `alloc`); all file formats and CLI plumbing
//! live in the companion `chaosveil` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod chaoscrypt;
pub mod image;
pub mod keyforge;
mod math;
pub mod pipeline;
pub mod sift;
pub mod stego;
pub mod test_utils;

pub use image::Image;
