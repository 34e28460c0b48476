//! Orientation assignment and the 4x4x8 gradient descriptor.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use super::scale_space::ScaleSpace;
use super::{Descriptor, Keypoint, SiftError, SiftParams};
use crate::math;

const ORI_BINS: usize = 36;
const PEAK_RATIO: f64 = 0.8;
const CELLS: usize = 4;
const CELL_ORI_BINS: usize = 8;
/// Cell width in units of the keypoint scale.
const CELL_SCALE: f64 = 3.0;
/// Descriptor elements are clamped here before the final renormalization.
const CLAMP: f64 = 0.2;

/// Gradient at integer coordinates via central differences; `None` on the
/// one-pixel border.
fn gradient(plane: &super::plane::Plane, x: isize, y: isize) -> Option<(f64, f64)> {
    if x < 1 || y < 1 || x as usize >= plane.width - 1 || y as usize >= plane.height - 1 {
        return None;
    }
    let (x, y) = (x as usize, y as usize);
    let gx = plane.at(x + 1, y) - plane.at(x - 1, y);
    let gy = plane.at(x, y + 1) - plane.at(x, y - 1);
    Some((gx, gy))
}

fn angle_of(gx: f64, gy: f64) -> f64 {
    let a = math::atan2(gy, gx);
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

/// Builds the 36-bin orientation histogram around a keypoint and emits one
/// oriented copy per strict local peak within 80% of the maximum, each peak
/// refined by a parabola over its three nearest bins. Flat neighborhoods
/// emit nothing.
pub fn assign_orientation(
    kp: &Keypoint,
    space: &ScaleSpace,
    _params: &SiftParams,
) -> Vec<Keypoint> {
    let stack = &space.octaves[kp.octave];
    let plane = &stack.gaussians[kp.level];
    let sigma_w = 1.5 * kp.sigma_oct;
    let radius = (math::round(3.0 * sigma_w) as isize).max(1);
    let cx = math::round(kp.x_oct) as isize;
    let cy = math::round(kp.y_oct) as isize;
    let denom = 2.0 * sigma_w * sigma_w;

    let mut hist = [0.0f64; ORI_BINS];
    for dy in -radius..=radius {
        for dx in -radius..=radius {
            let Some((gx, gy)) = gradient(plane, cx + dx, cy + dy) else {
                continue;
            };
            let mag = math::sqrt(gx * gx + gy * gy);
            let weight = math::exp(-((dx * dx + dy * dy) as f64) / denom);
            let bin = math::round(angle_of(gx, gy) / TAU * ORI_BINS as f64) as usize % ORI_BINS;
            hist[bin] += weight * mag;
        }
    }

    let max = hist.iter().fold(0.0f64, |a, &b| a.max(b));
    if max <= 0.0 {
        return Vec::new();
    }

    let mut out = Vec::new();
    for b in 0..ORI_BINS {
        let left = hist[(b + ORI_BINS - 1) % ORI_BINS];
        let center = hist[b];
        let right = hist[(b + 1) % ORI_BINS];
        if center > left && center > right && center >= PEAK_RATIO * max {
            let curve = left - 2.0 * center + right;
            let offset = if math::abs(curve) < 1e-12 {
                0.0
            } else {
                (0.5 * (left - right) / curve).clamp(-0.5, 0.5)
            };
            let mut pos = b as f64 + offset;
            if pos < 0.0 {
                pos += ORI_BINS as f64;
            } else if pos >= ORI_BINS as f64 {
                pos -= ORI_BINS as f64;
            }
            out.push(Keypoint {
                theta: pos / ORI_BINS as f64 * TAU,
                ..*kp
            });
        }
    }
    out
}

/// 4x4 spatial cells of 8-bin orientation histograms over a window rotated
/// to the keypoint orientation. Gaussian weighting with sigma equal to half
/// the window width, tri-linear `1 - d` binning, unit normalization, 0.2
/// clamp, renormalization.
pub fn compute_descriptor(kp: &Keypoint, space: &ScaleSpace) -> Result<Descriptor, SiftError> {
    let stack = &space.octaves[kp.octave];
    let plane = &stack.gaussians[kp.level];
    let cell_width = CELL_SCALE * kp.sigma_oct;
    let radius =
        math::round(cell_width * core::f64::consts::SQRT_2 * (CELLS as f64 + 1.0) * 0.5) as isize;
    let cx = math::round(kp.x_oct) as isize;
    let cy = math::round(kp.y_oct) as isize;
    let (w, h) = (plane.width as isize, plane.height as isize);
    if cx - radius < 1 || cx + radius >= w - 1 || cy - radius < 1 || cy + radius >= h - 1 {
        return Err(SiftError::WindowOutOfBounds);
    }

    let cos_t = math::cos(kp.theta);
    let sin_t = math::sin(kp.theta);
    // Gaussian sigma of half the window width, in cell units: CELLS / 2.
    let exp_scale = -1.0 / (0.5 * (CELLS * CELLS) as f64);
    let ori_per_rad = CELL_ORI_BINS as f64 / TAU;

    let mut values = [0.0f64; CELLS * CELLS * CELL_ORI_BINS];
    for dy in -radius..=radius {
        for dx in -radius..=radius {
            let xf = dx as f64;
            let yf = dy as f64;
            // Rotate into the descriptor frame, in cell units.
            let x_rot = (xf * cos_t + yf * sin_t) / cell_width;
            let y_rot = (-xf * sin_t + yf * cos_t) / cell_width;
            let rbin = y_rot + CELLS as f64 / 2.0 - 0.5;
            let cbin = x_rot + CELLS as f64 / 2.0 - 0.5;
            if rbin <= -1.0 || rbin >= CELLS as f64 || cbin <= -1.0 || cbin >= CELLS as f64 {
                continue;
            }
            let Some((gx, gy)) = gradient(plane, cx + dx, cy + dy) else {
                continue;
            };
            let mag = math::sqrt(gx * gx + gy * gy);
            let weight = math::exp(exp_scale * (x_rot * x_rot + y_rot * y_rot));

            let mut angle = angle_of(gx, gy) - kp.theta;
            while angle < 0.0 {
                angle += TAU;
            }
            while angle >= TAU {
                angle -= TAU;
            }
            let mut obin = angle * ori_per_rad;
            if obin >= CELL_ORI_BINS as f64 {
                obin -= CELL_ORI_BINS as f64;
            }

            let r0 = math::floor(rbin);
            let c0 = math::floor(cbin);
            let o0 = math::floor(obin);
            let dr = rbin - r0;
            let dc = cbin - c0;
            let dor = obin - o0;
            let contribution = mag * weight;
            for (ri, rw) in [(r0 as isize, 1.0 - dr), (r0 as isize + 1, dr)] {
                if ri < 0 || ri >= CELLS as isize {
                    continue;
                }
                for (ci, cw) in [(c0 as isize, 1.0 - dc), (c0 as isize + 1, dc)] {
                    if ci < 0 || ci >= CELLS as isize {
                        continue;
                    }
                    for (oi, ow) in [(o0 as usize, 1.0 - dor), (o0 as usize + 1, dor)] {
                        let oi = oi % CELL_ORI_BINS;
                        let idx = (ri as usize * CELLS + ci as usize) * CELL_ORI_BINS + oi;
                        values[idx] += contribution * rw * cw * ow;
                    }
                }
            }
        }
    }

    let norm = math::sqrt(values.iter().map(|v| v * v).sum::<f64>());
    if norm <= 0.0 {
        return Err(SiftError::FlatWindow);
    }
    for v in &mut values {
        *v = (*v / norm).min(CLAMP);
    }
    let norm2 = math::sqrt(values.iter().map(|v| v * v).sum::<f64>());
    for v in &mut values {
        *v /= norm2;
    }

    Ok(Descriptor {
        values,
        keypoint: *kp,
    })
}
