//! Dynamic k-LSB steganography.
//!
//! Every cover pixel gets a bit budget `k` in 0..=4, derived by seeding the
//! CNN with three of the pixel's high-nibble bits and folding the settled
//! trajectory back into a bit mask. Only the low nibble is ever rewritten,
//! so the receiver can reconstruct the exact same budgets from the stego
//! image alone — the plan lives in bits the embedding cannot touch.
//!
//! The mask comes from the low nibble of `gamma = |ceil(x1 + x2 + x3)| mod
//! 255`: bounded trajectories keep the cell sum within single digits, so
//! gamma's high nibble is almost always zero and only its low bits carry
//! the pixel-dependent variation.
//!
//! The wire layout is a 64-bit header carried one bit per pixel in the first
//! 64 pixels (fixed k = 1), followed by the cipher bytes packed MSB-first
//! into the budgeted low bits of the remaining pixels.

use alloc::vec::Vec;
use thiserror::Error;

use crate::chaoscrypt::{rk4_step, ChaosError, CnnState, CnnTemplate, DEFAULT_DT};
use crate::image::{BitCursor, Image};
use crate::math;

/// First header byte of every stego image.
pub const MAGIC: u8 = 0xC7;
/// Payload layout version.
pub const VERSION: u8 = 0x01;
/// Pixels reserved for the header, one bit each.
pub const HEADER_PIXELS: usize = 64;
/// Default number of RK4 settling steps per pixel budget. Short runs leave
/// the trajectory too close to its binary seed for gamma to spread; by 1024
/// steps the orbit has mixed and the budget table is at its richest.
pub const DEFAULT_K_STEPS: u32 = 1024;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StegoError {
    #[error("cover of {pixels} pixels cannot hold the {HEADER_PIXELS}-bit header")]
    CoverTooSmall { pixels: usize },
    #[error("payload needs {required_bits} bits but cover offers {available_bits}")]
    InsufficientCapacity {
        required_bits: u64,
        available_bits: u64,
    },
    #[error("header magic 0x{found:02X} is not 0x{MAGIC:02X}")]
    BadMagic { found: u8 },
    #[error("payload declares {declared_bits} bits but only {available_bits} are readable")]
    TruncatedPayload {
        declared_bits: u64,
        available_bits: u64,
    },
    #[error(transparent)]
    Cnn(#[from] ChaosError),
}

/// Fixed part of the serialized payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PayloadHeader {
    pub msg_width: u16,
    pub msg_height: u16,
    pub h1: u8,
    pub h2: u8,
}

impl PayloadHeader {
    pub fn cipher_len(&self) -> usize {
        self.msg_width as usize * self.msg_height as usize
    }

    pub fn to_bytes(self) -> [u8; 8] {
        [
            MAGIC,
            VERSION,
            (self.msg_width >> 8) as u8,
            self.msg_width as u8,
            (self.msg_height >> 8) as u8,
            self.msg_height as u8,
            self.h1,
            self.h2,
        ]
    }

    pub fn from_bytes(bytes: [u8; 8]) -> Result<Self, StegoError> {
        if bytes[0] != MAGIC || bytes[1] != VERSION {
            return Err(StegoError::BadMagic { found: bytes[0] });
        }
        Ok(Self {
            msg_width: (bytes[2] as u16) << 8 | bytes[3] as u16,
            msg_height: (bytes[4] as u16) << 8 | bytes[5] as u16,
            h1: bytes[6],
            h2: bytes[7],
        })
    }
}

/// Header plus cipher bytes; the cipher length always matches the declared
/// message dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StegoPayload {
    pub header: PayloadHeader,
    pub cipher: Vec<u8>,
}

impl StegoPayload {
    pub fn new(header: PayloadHeader, cipher: Vec<u8>) -> Self {
        assert_eq!(
            cipher.len(),
            header.cipher_len(),
            "cipher length must match declared dimensions"
        );
        Self { header, cipher }
    }
}

/// Per-pixel bit budgets in raster order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KPlan {
    k: Vec<u8>,
}

impl KPlan {
    /// Budgets for a whole image. Only sixteen distinct high nibbles exist,
    /// so the CNN runs once per nibble and the rest is a table lookup.
    pub fn for_image(img: &Image, tpl: &CnnTemplate, n_steps: u32) -> Result<Self, StegoError> {
        let table = nibble_table(tpl, n_steps)?;
        Ok(Self {
            k: img
                .pixels()
                .iter()
                .map(|&p| table[(p >> 4) as usize])
                .collect(),
        })
    }

    pub fn k(&self) -> &[u8] {
        &self.k
    }

    /// Payload capacity in bits: one per header pixel plus the dynamic
    /// budget of everything after.
    pub fn capacity_bits(&self) -> u64 {
        HEADER_PIXELS as u64
            + self.k[HEADER_PIXELS.min(self.k.len())..]
                .iter()
                .map(|&k| k as u64)
                .sum::<u64>()
    }
}

/// Bit budget of one pixel.
///
/// The budget is a pure function of the high nibble: bits b2..b4 seed the
/// CNN, the settled state folds to the mask nibble, and the budget is the
/// overlap popcount of b1..b4 with the mask.
pub fn k_for_pixel(pixel: u8, tpl: &CnnTemplate, n_steps: u32) -> Result<u8, StegoError> {
    k_for_nibble(pixel >> 4, tpl, n_steps)
}

fn k_for_nibble(nibble: u8, tpl: &CnnTemplate, n_steps: u32) -> Result<u8, StegoError> {
    // nibble bit 3 is b1 (pixel MSB); seeds are b2, b3, b4.
    let b2 = (nibble >> 2) & 1;
    let b3 = (nibble >> 1) & 1;
    let b4 = nibble & 1;
    let mut state = CnnState::new(b2 as f64, b3 as f64, b4 as f64);
    for _ in 0..n_steps {
        state = rk4_step(&state, tpl, DEFAULT_DT)?;
    }
    let gamma = {
        let c = math::ceil(state.x[0] + state.x[1] + state.x[2]) as i64;
        (c.unsigned_abs() % 255) as u8
    };
    let mask = gamma & 0x0F;
    Ok((nibble & mask).count_ones() as u8)
}

fn nibble_table(tpl: &CnnTemplate, n_steps: u32) -> Result<[u8; 16], StegoError> {
    let mut table = [0u8; 16];
    for (nibble, slot) in table.iter_mut().enumerate() {
        *slot = k_for_nibble(nibble as u8, tpl, n_steps)?;
    }
    Ok(table)
}

/// Total embeddable bits of a cover.
pub fn capacity(cover: &Image, tpl: &CnnTemplate, n_steps: u32) -> Result<u64, StegoError> {
    if cover.pixel_count() < HEADER_PIXELS {
        return Err(StegoError::CoverTooSmall {
            pixels: cover.pixel_count(),
        });
    }
    Ok(KPlan::for_image(cover, tpl, n_steps)?.capacity_bits())
}

fn payload_bits(payload: &StegoPayload) -> u64 {
    HEADER_PIXELS as u64 + 8 * payload.cipher.len() as u64
}

/// Embeds the payload, returning the stego image.
///
/// High nibbles are never modified; header bits go to the LSB of the first
/// 64 pixels; cipher bits fill each later pixel's budgeted field from its
/// highest cleared bit downwards.
pub fn embed(
    cover: &Image,
    payload: &StegoPayload,
    tpl: &CnnTemplate,
    n_steps: u32,
) -> Result<Image, StegoError> {
    if cover.pixel_count() < HEADER_PIXELS {
        return Err(StegoError::CoverTooSmall {
            pixels: cover.pixel_count(),
        });
    }
    let plan = KPlan::for_image(cover, tpl, n_steps)?;
    let available = plan.capacity_bits();
    let required = payload_bits(payload);
    if required > available {
        return Err(StegoError::InsufficientCapacity {
            required_bits: required,
            available_bits: available,
        });
    }

    let mut stego = cover.clone();
    let pixels = stego.pixels_mut();

    let header = payload.header.to_bytes();
    for (i, px) in pixels.iter_mut().enumerate().take(HEADER_PIXELS) {
        let bit = (header[i / 8] >> (7 - i % 8)) & 1;
        *px = (*px & !1) | bit;
    }

    let mut cursor = BitCursor::new(HEADER_PIXELS);
    let total_bits = payload.cipher.len() * 8;
    for bit_index in 0..total_bits {
        let bit = (payload.cipher[bit_index / 8] >> (7 - bit_index % 8)) & 1;
        let (px, pos) = cursor
            .next_slot(pixels.len(), |i| plan.k()[i])
            .expect("capacity checked above");
        pixels[px] = (pixels[px] & !(1 << pos)) | (bit << pos);
    }
    Ok(stego)
}

/// Blind extraction: the budgets and the header are both recovered from the
/// stego image itself.
pub fn extract(stego: &Image, tpl: &CnnTemplate, n_steps: u32) -> Result<StegoPayload, StegoError> {
    if stego.pixel_count() < HEADER_PIXELS {
        return Err(StegoError::CoverTooSmall {
            pixels: stego.pixel_count(),
        });
    }
    let mut header = [0u8; 8];
    for i in 0..HEADER_PIXELS {
        let bit = stego.pixels()[i] & 1;
        header[i / 8] |= bit << (7 - i % 8);
    }
    let header = PayloadHeader::from_bytes(header)?;
    let plan = KPlan::for_image(stego, tpl, n_steps)?;
    extract_with(stego, &plan, &header)
}

/// Extraction with an externally supplied plan and header.
///
/// This is the oracle-driven path used by the occlusion-attack harness: the
/// embedded header may be destroyed by the attack, but the sender-side plan
/// keeps every surviving payload bit at its original position, so damage
/// stays confined to the attacked pixels.
pub fn extract_with(
    stego: &Image,
    plan: &KPlan,
    header: &PayloadHeader,
) -> Result<StegoPayload, StegoError> {
    let declared_bits = 8 * header.cipher_len() as u64;
    let mut cipher = alloc::vec![0u8; header.cipher_len()];
    let mut cursor = BitCursor::new(HEADER_PIXELS);
    let pixels = stego.pixels();
    for bit_index in 0..declared_bits as usize {
        let Some((px, pos)) = cursor.next_slot(pixels.len(), |i| plan.k()[i]) else {
            return Err(StegoError::TruncatedPayload {
                declared_bits,
                available_bits: bit_index as u64,
            });
        };
        let bit = (pixels[px] >> pos) & 1;
        cipher[bit_index / 8] |= bit << (7 - bit_index % 8);
    }
    Ok(StegoPayload::new(*header, cipher))
}
