//! Security, visual-quality, and complexity metrics.
//!
//! Everything in here is a pure function over images or point sets; report
//! formatting and file output live in the companion crate.

use alloc::vec::Vec;
use thiserror::Error;

use crate::image::Image;
use crate::math;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("images are {a_width}x{a_height} vs {b_width}x{b_height}")]
    DimensionMismatch {
        a_width: u32,
        a_height: u32,
        b_width: u32,
        b_height: u32,
    },
    #[error("constant image has zero variance")]
    ZeroVariance,
    #[error("input is degenerate (too few points or no spread)")]
    DegenerateInput,
    #[error("image side shorter than the {0}-pixel analysis window")]
    ImageTooSmall(u32),
}

fn check_dims(a: &Image, b: &Image) -> Result<(), AnalysisError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(AnalysisError::DimensionMismatch {
            a_width: a.width(),
            a_height: a.height(),
            b_width: b.width(),
            b_height: b.height(),
        });
    }
    Ok(())
}

/// Shannon entropy in bits over the 256-bin intensity histogram.
pub fn shannon_entropy(img: &Image) -> f64 {
    let mut counts = [0u64; 256];
    for &p in img.pixels() {
        counts[p as usize] += 1;
    }
    let n = img.pixel_count() as f64;
    if n == 0.0 {
        return 0.0;
    }
    let mut h = 0.0;
    for &c in &counts {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * math::log2(p);
        }
    }
    h
}

/// Mean squared error between two same-sized images.
pub fn mse(a: &Image, b: &Image) -> Result<f64, AnalysisError> {
    check_dims(a, b)?;
    let mut acc = 0.0f64;
    for (&x, &y) in a.pixels().iter().zip(b.pixels()) {
        let d = x as f64 - y as f64;
        acc += d * d;
    }
    Ok(acc / a.pixel_count() as f64)
}

/// Peak signal-to-noise ratio in dB; identical images report infinity.
pub fn psnr(a: &Image, b: &Image) -> Result<f64, AnalysisError> {
    let err = mse(a, b)?;
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * math::log10(255.0 * 255.0 / err))
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, AnalysisError> {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(AnalysisError::ZeroVariance);
    }
    Ok(cov / (math::sqrt(var_x) * math::sqrt(var_y)))
}

/// Pearson correlation of two images taken as flat pixel sequences.
pub fn correlation(a: &Image, b: &Image) -> Result<f64, AnalysisError> {
    check_dims(a, b)?;
    let xs: Vec<f64> = a.pixels().iter().map(|&p| p as f64).collect();
    let ys: Vec<f64> = b.pixels().iter().map(|&p| p as f64).collect();
    pearson(&xs, &ys)
}

/// Pairing direction for adjacent-pixel correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Horizontal,
}

/// Correlation of each pixel with its neighbour one step in `direction`.
pub fn adjacent_correlation(img: &Image, direction: Direction) -> Result<f64, AnalysisError> {
    let Direction::Horizontal = direction;
    if img.width() < 2 {
        return Err(AnalysisError::ImageTooSmall(2));
    }
    let mut xs = Vec::with_capacity(((img.width() - 1) * img.height()) as usize);
    let mut ys = Vec::with_capacity(xs.capacity());
    for y in 0..img.height() {
        for x in 0..img.width() - 1 {
            xs.push(img.get(x, y) as f64);
            ys.push(img.get(x + 1, y) as f64);
        }
    }
    pearson(&xs, &ys)
}

/// Structural similarity: 8x8 sliding windows, C1 = (0.01*255)^2,
/// C2 = (0.03*255)^2, averaged over all window positions.
pub fn ssim(a: &Image, b: &Image) -> Result<f64, AnalysisError> {
    const WINDOW: u32 = 8;
    check_dims(a, b)?;
    if a.width() < WINDOW || a.height() < WINDOW {
        return Err(AnalysisError::ImageTooSmall(WINDOW));
    }
    let c1 = (0.01f64 * 255.0) * (0.01 * 255.0);
    let c2 = (0.03f64 * 255.0) * (0.03 * 255.0);
    let inv_n = 1.0 / (WINDOW * WINDOW) as f64;

    let mut total = 0.0f64;
    let mut windows = 0u64;
    for wy in 0..=a.height() - WINDOW {
        for wx in 0..=a.width() - WINDOW {
            let mut sum_x = 0.0;
            let mut sum_y = 0.0;
            let mut sum_xx = 0.0;
            let mut sum_yy = 0.0;
            let mut sum_xy = 0.0;
            for dy in 0..WINDOW {
                for dx in 0..WINDOW {
                    let x = a.get(wx + dx, wy + dy) as f64;
                    let y = b.get(wx + dx, wy + dy) as f64;
                    sum_x += x;
                    sum_y += y;
                    sum_xx += x * x;
                    sum_yy += y * y;
                    sum_xy += x * y;
                }
            }
            let mu_x = sum_x * inv_n;
            let mu_y = sum_y * inv_n;
            let var_x = sum_xx * inv_n - mu_x * mu_x;
            let var_y = sum_yy * inv_n - mu_y * mu_y;
            let cov = sum_xy * inv_n - mu_x * mu_y;
            let score = ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2))
                / ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2));
            total += score;
            windows += 1;
        }
    }
    Ok(total / windows as f64)
}

/// Embedding ratio as a percentage of the combined carrier and message
/// volume.
pub fn embedding_ratio(cover: &Image, message: &Image, bits_embedded: u64) -> f64 {
    let denom = 8.0 * (cover.pixel_count() as f64 + message.pixel_count() as f64);
    100.0 * bits_embedded as f64 / denom
}

/// Correlation between a processed image and its reference, tracked across
/// a corpus; numerically the same quantity as [`correlation`].
pub fn temporal_complexity(target: &Image, reference: &Image) -> Result<f64, AnalysisError> {
    correlation(target, reference)
}

/// Locally weighted linear regression with tricube weights.
///
/// Each point is fitted over its `ceil(smoothing * n)` nearest neighbours
/// by x-distance; single pass, no robustness iterations. Returns the fitted
/// values in input order.
pub fn lowess(points: &[(f64, f64)], smoothing: f64) -> Result<Vec<f64>, AnalysisError> {
    let n = points.len();
    if n < 3 || !(0.0..=1.0).contains(&smoothing) || smoothing == 0.0 {
        return Err(AnalysisError::DegenerateInput);
    }
    let window = math::ceil(smoothing * n as f64) as usize;
    let window = window.clamp(2, n);

    let mut fitted = Vec::with_capacity(n);
    let mut order: Vec<usize> = (0..n).collect();
    for i in 0..n {
        let xi = points[i].0;
        order.sort_unstable_by(|&a, &b| {
            let da = math::abs(points[a].0 - xi);
            let db = math::abs(points[b].0 - xi);
            da.total_cmp(&db).then(a.cmp(&b))
        });
        let neighbours = &order[..window];
        let dmax = math::abs(points[neighbours[window - 1]].0 - xi);

        // Weighted least squares for y = b0 + b1 x over the window.
        let mut sw = 0.0;
        let mut swx = 0.0;
        let mut swy = 0.0;
        let mut swxx = 0.0;
        let mut swxy = 0.0;
        for &j in neighbours {
            let (x, y) = points[j];
            let w = if dmax <= 0.0 {
                1.0
            } else {
                let u = math::abs(x - xi) / dmax;
                let t = 1.0 - u * u * u;
                t * t * t
            };
            sw += w;
            swx += w * x;
            swy += w * y;
            swxx += w * x * x;
            swxy += w * x * y;
        }
        let denom = sw * swxx - swx * swx;
        let value = if math::abs(denom) < 1e-12 {
            if sw == 0.0 {
                return Err(AnalysisError::DegenerateInput);
            }
            swy / sw
        } else {
            let b1 = (sw * swxy - swx * swy) / denom;
            let b0 = (swy - b1 * swx) / sw;
            b0 + b1 * xi
        };
        fitted.push(value);
    }
    Ok(fitted)
}

/// Zeroes a top-left block of `fraction` of the image area, aspect matched
/// to the image, each side floored.
pub fn occlude(img: &Image, fraction: f64) -> Image {
    assert!(
        (0.0..1.0).contains(&fraction),
        "occlusion fraction must be in [0, 1)"
    );
    let side = math::sqrt(fraction);
    let bw = math::floor(img.width() as f64 * side) as u32;
    let bh = math::floor(img.height() as f64 * side) as u32;
    let mut out = img.clone();
    for y in 0..bh.min(img.height()) {
        for x in 0..bw.min(img.width()) {
            out.set(x, y, 0);
        }
    }
    out
}
