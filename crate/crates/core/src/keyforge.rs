//! Key formation: descriptor selection, 128-bit raw key packing, and
//! derivation of the CNN control parameters.
//!
//! Both parties run the same deterministic rule over the cover image, so the
//! key itself never travels. Embedding only ever rewrites the four least
//! significant bits of a pixel, and [`key_stable`] zeroes exactly those four
//! bits before any keypoint work; the sender's cover and the receiver's
//! stego image therefore hand the detector identical bytes, and the derived
//! keys match bit for bit.

use alloc::vec::Vec;
use thiserror::Error;

use crate::image::Image;
use crate::sift::Descriptor;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KeyforgeError {
    #[error("no keypoints found in cover image")]
    NoKeypointsFound,
}

/// 128-bit raw key, stored as the sixteen bytes T1..T16.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawKey {
    t: [u8; 16],
}

impl RawKey {
    pub fn new(t: [u8; 16]) -> Self {
        Self { t }
    }

    pub fn bytes(&self) -> &[u8; 16] {
        &self.t
    }

    /// Key with bit `index` (0 = MSB of T1, 127 = LSB of T16) inverted.
    pub fn with_flipped_bit(&self, index: u8) -> Self {
        let mut t = self.t;
        t[index as usize / 8] ^= 0x80 >> (index % 8);
        Self { t }
    }
}

/// Control parameters of the keystream generator, all derived from the raw
/// key and the two message digests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyParams {
    /// XOR fold of all message pixels.
    pub h1: u8,
    /// Sum of all message pixels mod 256.
    pub h2: u8,
    /// Sum of the key bytes mod 256.
    pub key_sum: u8,
    /// XOR fold of the key bytes.
    pub key_xor: u8,
    /// Additive offset of the trajectory samples.
    pub lambda: u8,
    /// Scale of the trajectory samples.
    pub h: f64,
    /// Initial CNN state, each component in [0, 1).
    pub x0: [f64; 3],
    /// Number of transient RK4 steps discarded before emitting bytes.
    pub n0: u8,
}

/// Zeroes the four least significant bits of every pixel.
///
/// This is the canonical pre-image for keypoint detection: it is invariant
/// under anything the embedder is allowed to do.
pub fn key_stable(img: &Image) -> Image {
    img.map(|p| p & 0xF0)
}

/// Picks the descriptor whose keypoint has the strongest contrast response.
///
/// Ties break towards the smallest (y, x, sigma, theta) so the choice stays
/// reproducible across runs and implementations.
pub fn select_descriptor(descriptors: &[Descriptor]) -> Result<&Descriptor, KeyforgeError> {
    descriptors
        .iter()
        .reduce(|best, d| {
            let a = &d.keypoint;
            let b = &best.keypoint;
            let ord = a
                .response
                .total_cmp(&b.response)
                .reverse()
                .then(a.y.total_cmp(&b.y))
                .then(a.x.total_cmp(&b.x))
                .then(a.sigma.total_cmp(&b.sigma))
                .then(a.theta.total_cmp(&b.theta));
            if ord == core::cmp::Ordering::Less {
                d
            } else {
                best
            }
        })
        .ok_or(KeyforgeError::NoKeypointsFound)
}

/// Quantizes each descriptor element to `min(255, floor(512 d))` and packs
/// the per-element parities MSB-first into T1..T16.
pub fn descriptor_to_rawkey(descriptor: &Descriptor) -> RawKey {
    let mut t = [0u8; 16];
    for (i, &d) in descriptor.values.iter().enumerate() {
        let q = crate::math::floor(512.0 * d).clamp(0.0, 255.0) as u32;
        let bit = (q & 1) as u8;
        t[i / 8] |= bit << (7 - i % 8);
    }
    RawKey::new(t)
}

/// XOR fold of all pixels (the message digest H1).
pub fn xor_digest(img: &Image) -> u8 {
    img.pixels().iter().fold(0u8, |acc, &p| acc ^ p)
}

/// Pixel sum mod 256 (the message digest H2).
pub fn sum_digest(img: &Image) -> u8 {
    img.pixels()
        .iter()
        .fold(0u64, |acc, &p| acc.wrapping_add(p as u64)) as u8
}

/// Full parameter derivation from key plus message.
pub fn derive_params(key: &RawKey, msg: &Image) -> KeyParams {
    derive_params_from_hashes(key, xor_digest(msg), sum_digest(msg))
}

/// Parameter derivation when only the message digests are known, as on the
/// receiving side where H1 and H2 arrive inside the stego header.
pub fn derive_params_from_hashes(key: &RawKey, h1: u8, h2: u8) -> KeyParams {
    let t = key.bytes();
    let key_sum = t.iter().fold(0u32, |acc, &b| acc + b as u32) as u8;
    let key_xor = t.iter().fold(0u8, |acc, &b| acc ^ b);
    let hh = h1 as u32 * h2 as u32;
    let lambda = ((t[9] as u32 + t[10] as u32 + t[11] as u32 + hh) % 256) as u8;
    let h = (t[12] as u32 + t[13] as u32 + t[14] as u32 + t[15] as u32 + hh) as f64 / 256.0;
    let denom = 256.0f64 * 256.0 * 256.0 * 256.0 * 256.0;
    let x_component = |a: u8, b: u8, c: u8| {
        (a as u64 * b as u64 * c as u64 * key_sum as u64 * key_xor as u64) as f64 / denom
    };
    let x0 = [
        x_component(t[0], t[3], t[6]),
        x_component(t[1], t[4], t[7]),
        x_component(t[2], t[5], t[8]),
    ];
    let n0 = ((key_sum as u32 * key_sum as u32 + key_xor as u32 * key_xor as u32) % 256) as u8;
    KeyParams {
        h1,
        h2,
        key_sum,
        key_xor,
        lambda,
        h,
        x0,
        n0,
    }
}

/// Raw keys of two images derived through the full stable pipeline are
/// compared so often in tests that the composition earns a name.
pub fn rawkey_bits(key: &RawKey) -> Vec<u8> {
    key.bytes()
        .iter()
        .flat_map(|&b| (0..8).map(move |i| (b >> (7 - i)) & 1))
        .collect()
}
