//! End-to-end conceal / reveal orchestration and the occlusion-attack
//! harness.

use alloc::vec::Vec;
use thiserror::Error;

use crate::analysis::{self, AnalysisError};
use crate::chaoscrypt::{self, ChaosError, CnnTemplate};
use crate::image::{Image, ImageError};
use crate::keyforge::{self, KeyforgeError, RawKey};
use crate::sift::{self, SiftError, SiftParams};
use crate::stego::{self, PayloadHeader, StegoError, StegoPayload};

#[derive(Debug, Error, PartialEq)]
pub enum SchemeError {
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Sift(#[from] SiftError),
    #[error(transparent)]
    Key(#[from] KeyforgeError),
    #[error(transparent)]
    Chaos(#[from] ChaosError),
    #[error(transparent)]
    Stego(#[from] StegoError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// Every tunable of the scheme in one place. The defaults reproduce the
/// reference configuration; sender and receiver must agree on all of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub sift: SiftParams,
    pub template: CnnTemplate,
    /// RK4 step of the keystream generator.
    pub dt: f64,
    /// Settling steps of the per-pixel budget CNN.
    pub stego_steps: u32,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            sift: SiftParams::default(),
            template: CnnTemplate::default(),
            dt: chaoscrypt::DEFAULT_DT,
            stego_steps: stego::DEFAULT_K_STEPS,
        }
    }
}

/// Raw key from an image, via the stabilized view.
///
/// Works identically on the cover and on any stego image embedded by this
/// scheme, which is what makes blind decryption possible.
pub fn derive_raw_key(img: &Image, cfg: &SchemeConfig) -> Result<RawKey, SchemeError> {
    let stable = keyforge::key_stable(img);
    let descriptors = sift::detect_and_describe(&stable, &cfg.sift)?;
    let chosen = keyforge::select_descriptor(&descriptors)?;
    Ok(keyforge::descriptor_to_rawkey(chosen))
}

#[derive(Debug, Clone)]
pub struct ConcealOutcome {
    pub stego: Image,
    pub capacity_bits: u64,
    pub payload_bits: u64,
}

/// Encrypts `message` with a cover-derived keystream and embeds the cipher.
///
/// Capacity is checked before any keypoint work so an undersized cover
/// fails fast with the precise bit counts.
pub fn conceal(
    cover: &Image,
    message: &Image,
    cfg: &SchemeConfig,
) -> Result<ConcealOutcome, SchemeError> {
    let capacity_bits = stego::capacity(cover, &cfg.template, cfg.stego_steps)?;
    let payload_bits = stego::HEADER_PIXELS as u64 + 8 * message.pixel_count() as u64;
    if payload_bits > capacity_bits {
        return Err(StegoError::InsufficientCapacity {
            required_bits: payload_bits,
            available_bits: capacity_bits,
        }
        .into());
    }
    let key = derive_raw_key(cover, cfg)?;
    let params = keyforge::derive_params(&key, message);
    let ks = chaoscrypt::generate_keystream(&params, &cfg.template, message.pixel_count(), cfg.dt)?;
    let cipher = chaoscrypt::xor_transform(message.pixels(), &ks)?;
    let payload = StegoPayload::new(
        PayloadHeader {
            msg_width: message.width() as u16,
            msg_height: message.height() as u16,
            h1: params.h1,
            h2: params.h2,
        },
        cipher,
    );
    let stego = stego::embed(cover, &payload, &cfg.template, cfg.stego_steps)?;
    Ok(ConcealOutcome {
        stego,
        capacity_bits,
        payload_bits,
    })
}

/// Blind recovery: key from the stego image itself, header from the
/// embedded bits, then decrypt.
pub fn reveal(stego_img: &Image, cfg: &SchemeConfig) -> Result<Image, SchemeError> {
    Ok(reveal_with_header(stego_img, cfg)?.0)
}

/// [`reveal`], also returning the recovered payload header.
pub fn reveal_with_header(
    stego_img: &Image,
    cfg: &SchemeConfig,
) -> Result<(Image, PayloadHeader), SchemeError> {
    let payload = stego::extract(stego_img, &cfg.template, cfg.stego_steps)?;
    let plain = decrypt_payload(stego_img, &payload, cfg)?;
    Ok((plain, payload.header))
}

/// Decrypts an already-extracted payload against a key derived from `carrier`.
pub fn decrypt_payload(
    carrier: &Image,
    payload: &StegoPayload,
    cfg: &SchemeConfig,
) -> Result<Image, SchemeError> {
    let key = derive_raw_key(carrier, cfg)?;
    let params = keyforge::derive_params_from_hashes(&key, payload.header.h1, payload.header.h2);
    let ks = chaoscrypt::generate_keystream(&params, &cfg.template, payload.cipher.len(), cfg.dt)?;
    let plain = chaoscrypt::xor_transform(&payload.cipher, &ks)?;
    Ok(Image::new(
        payload.header.msg_width as u32,
        payload.header.msg_height as u32,
        plain,
    )?)
}

/// One occlusion measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OcclusionPoint {
    pub fraction: f64,
    /// PSNR of the decrypted message against the original, dB.
    pub psnr_db: f64,
}

/// Occlusion-attack simulation.
///
/// The exchange is assumed to have completed once undisturbed: the key, the
/// bit-budget plan, and the header come from the pristine stego image, and
/// only the attacked image feeds the extractor. Damage to the decrypted
/// message is then confined to payload bits stored inside the occluded
/// block, so PSNR degrades monotonically as the block grows.
pub fn occlusion_attack(
    cover: &Image,
    message: &Image,
    fractions: &[f64],
    cfg: &SchemeConfig,
) -> Result<Vec<OcclusionPoint>, SchemeError> {
    let outcome = conceal(cover, message, cfg)?;
    let key = derive_raw_key(&outcome.stego, cfg)?;
    let params = keyforge::derive_params(&key, message);
    let ks = chaoscrypt::generate_keystream(&params, &cfg.template, message.pixel_count(), cfg.dt)?;
    let plan = stego::KPlan::for_image(&outcome.stego, &cfg.template, cfg.stego_steps)?;
    let header = PayloadHeader {
        msg_width: message.width() as u16,
        msg_height: message.height() as u16,
        h1: params.h1,
        h2: params.h2,
    };

    let mut points = Vec::with_capacity(fractions.len());
    for &fraction in fractions {
        let attacked = analysis::occlude(&outcome.stego, fraction);
        let payload = stego::extract_with(&attacked, &plan, &header)?;
        let plain = chaoscrypt::xor_transform(&payload.cipher, &ks)?;
        let decrypted = Image::new(message.width(), message.height(), plain)?;
        points.push(OcclusionPoint {
            fraction,
            psnr_db: analysis::psnr(&decrypted, message)?,
        });
    }
    Ok(points)
}
