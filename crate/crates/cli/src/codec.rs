//! Lossless image IO: binary PGM (P5, maxval 255) and 8-bit PNG.
//!
//! PGM is the canonical interchange format; PNG is accepted for
//! convenience, with RGB inputs reduced to luma. Inputs are sniffed by
//! magic bytes, outputs are picked by file extension. Lossy formats are
//! refused outright: a stego image run through JPEG loses its payload.

use std::fs;
use std::io;
use std::path::Path;

use chaosveil_core::image::{luma_from_rgb, Image};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt file: {0}")]
    CorruptFile(String),
    #[error("image has zero pixels")]
    InvalidDimensions,
    #[error("refusing lossy output format for {0}; use .pgm or .png")]
    LossyFormatRefused(String),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

/// Loads an 8-bit grayscale image, converting RGB PNG via luma weights.
pub fn load_image(path: &Path) -> Result<Image, CodecError> {
    let bytes = fs::read(path).map_err(|e| {
        if e.kind() == io::ErrorKind::NotFound {
            CodecError::FileNotFound(path.display().to_string())
        } else {
            CodecError::Io(e)
        }
    })?;
    if bytes.starts_with(b"P5") {
        decode_pgm(&bytes)
    } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        decode_png(&bytes)
    } else {
        Err(CodecError::UnsupportedFormat(format!(
            "{}: neither binary PGM nor PNG",
            path.display()
        )))
    }
}

/// Saves losslessly; the format follows the file extension.
pub fn save_image(img: &Image, path: &Path) -> Result<(), CodecError> {
    if img.pixel_count() == 0 {
        return Err(CodecError::InvalidDimensions);
    }
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let bytes = match ext.as_str() {
        "pgm" => encode_pgm(img),
        "png" => encode_png(img)?,
        "jpg" | "jpeg" | "jfif" => {
            return Err(CodecError::LossyFormatRefused(path.display().to_string()))
        }
        other => {
            return Err(CodecError::UnsupportedFormat(format!(
                "unknown output extension {other:?}; use .pgm or .png"
            )))
        }
    };
    fs::write(path, bytes)?;
    Ok(())
}

/// Binary PGM encoding: `P5\n<w> <h>\n255\n` followed by raster bytes.
pub fn encode_pgm(img: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

/// Binary PGM decoding with `#` comments allowed in the header.
pub fn decode_pgm(bytes: &[u8]) -> Result<Image, CodecError> {
    let mut pos = 2usize; // past "P5"

    let next_token = |pos: &mut usize| -> Result<u32, CodecError> {
        // Skip whitespace and comment lines.
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            } else {
                break;
            }
        }
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if start == *pos {
            return Err(CodecError::CorruptFile("missing header field".into()));
        }
        std::str::from_utf8(&bytes[start..*pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| CodecError::CorruptFile("bad header number".into()))
    };

    let width = next_token(&mut pos)?;
    let height = next_token(&mut pos)?;
    let maxval = next_token(&mut pos)?;
    if maxval != 255 {
        return Err(CodecError::UnsupportedFormat(format!(
            "PGM maxval {maxval}, only 8-bit (255) supported"
        )));
    }
    if width == 0 || height == 0 {
        return Err(CodecError::CorruptFile("zero image dimension".into()));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(CodecError::CorruptFile("missing raster separator".into()));
    }
    pos += 1;
    let need = width as usize * height as usize;
    let raster = &bytes[pos..];
    if raster.len() < need {
        return Err(CodecError::CorruptFile(format!(
            "raster holds {} of {} bytes",
            raster.len(),
            need
        )));
    }
    Image::new(width, height, raster[..need].to_vec())
        .map_err(|e| CodecError::CorruptFile(e.to_string()))
}

fn decode_png(bytes: &[u8]) -> Result<Image, CodecError> {
    let decoder = png::Decoder::new(io::Cursor::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| CodecError::CorruptFile(e.to_string()))?;
    let info = reader.info();
    if info.bit_depth != png::BitDepth::Eight {
        return Err(CodecError::UnsupportedFormat(format!(
            "PNG bit depth {:?}, only 8-bit supported",
            info.bit_depth
        )));
    }
    let color = info.color_type;
    let (width, height) = (info.width, info.height);
    let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(0)];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| CodecError::CorruptFile(e.to_string()))?;
    let data = &buf[..frame.buffer_size()];
    let pixels = match color {
        png::ColorType::Grayscale => data.to_vec(),
        png::ColorType::Rgb => data
            .chunks_exact(3)
            .map(|c| luma_from_rgb(c[0], c[1], c[2]))
            .collect(),
        other => {
            return Err(CodecError::UnsupportedFormat(format!(
                "PNG color type {other:?}, only grayscale and RGB supported"
            )))
        }
    };
    Image::new(width, height, pixels).map_err(|e| CodecError::CorruptFile(e.to_string()))
}

fn encode_png(img: &Image) -> Result<Vec<u8>, CodecError> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, img.width(), img.height());
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder
            .write_header()
            .map_err(|e| CodecError::CorruptFile(e.to_string()))?;
        writer
            .write_image_data(img.pixels())
            .map_err(|e| CodecError::CorruptFile(e.to_string()))?;
    }
    Ok(out)
}
