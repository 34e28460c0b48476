//! Extremum scan and sub-pixel keypoint refinement.

use alloc::vec::Vec;

use super::scale_space::ScaleSpace;
use super::{Keypoint, SiftParams};
use crate::math;

/// Raw extremum position on the DoG lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub octave: usize,
    /// Interior DoG level, 1 ..= levels-2.
    pub level: usize,
    pub x: usize,
    pub y: usize,
}

/// Strict extrema over the full 26-neighborhood (8 same-scale plus 9 in
/// each adjacent scale). Plateaus are not extrema.
pub fn dog_extrema(space: &ScaleSpace) -> Vec<Candidate> {
    let mut out = Vec::new();
    for (o, stack) in space.octaves.iter().enumerate() {
        let (w, h) = (stack.width(), stack.height());
        for level in 1..space.levels.saturating_sub(1) {
            for y in 1..h - 1 {
                for x in 1..w - 1 {
                    let v = stack.dogs[level].at(x, y);
                    let mut is_max = true;
                    let mut is_min = true;
                    'scan: for ds in -1i32..=1 {
                        let plane = &stack.dogs[(level as i32 + ds) as usize];
                        for dy in -1i32..=1 {
                            for dx in -1i32..=1 {
                                if ds == 0 && dy == 0 && dx == 0 {
                                    continue;
                                }
                                let n =
                                    plane.at((x as i32 + dx) as usize, (y as i32 + dy) as usize);
                                if v <= n {
                                    is_max = false;
                                }
                                if v >= n {
                                    is_min = false;
                                }
                                if !is_max && !is_min {
                                    break 'scan;
                                }
                            }
                        }
                    }
                    if is_max || is_min {
                        out.push(Candidate {
                            octave: o,
                            level,
                            x,
                            y,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Solves `m * u = rhs` for a symmetric 3x3 system; `None` when singular.
fn solve3(m: [[f64; 3]; 3], rhs: [f64; 3]) -> Option<[f64; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if math::abs(det) < 1e-12 {
        return None;
    }
    let inv_det = 1.0 / det;
    let cof =
        |r1: usize, c1: usize, r2: usize, c2: usize| m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1];
    // Inverse via adjugate.
    let inv = [
        [
            cof(1, 1, 2, 2) * inv_det,
            (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv_det,
            (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv_det,
        ],
        [
            (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv_det,
            cof(0, 0, 2, 2) * inv_det,
            (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv_det,
        ],
        [
            cof(1, 0, 2, 1) * inv_det,
            (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv_det,
            cof(0, 0, 1, 1) * inv_det,
        ],
    ];
    Some([
        inv[0][0] * rhs[0] + inv[0][1] * rhs[1] + inv[0][2] * rhs[2],
        inv[1][0] * rhs[0] + inv[1][1] * rhs[1] + inv[1][2] * rhs[2],
        inv[2][0] * rhs[0] + inv[2][1] * rhs[1] + inv[2][2] * rhs[2],
    ])
}

fn refine_one(space: &ScaleSpace, cand: &Candidate, params: &SiftParams) -> Option<Keypoint> {
    let stack = &space.octaves[cand.octave];
    let (w, h) = (stack.width() as isize, stack.height() as isize);
    let max_level = space.levels as isize - 2;
    let (mut x, mut y, mut s) = (cand.x as isize, cand.y as isize, cand.level as isize);

    let mut solution: Option<([f64; 3], [f64; 3], f64)> = None;
    // Initial fit plus up to 5 re-localization hops.
    for _attempt in 0..6 {
        let d = |ds: isize, dy: isize, dx: isize| {
            stack.dogs[(s + ds) as usize].at((x + dx) as usize, (y + dy) as usize)
        };
        let v = d(0, 0, 0);
        let g = [
            (d(0, 0, 1) - d(0, 0, -1)) / 2.0,
            (d(0, 1, 0) - d(0, -1, 0)) / 2.0,
            (d(1, 0, 0) - d(-1, 0, 0)) / 2.0,
        ];
        let dxx = d(0, 0, 1) + d(0, 0, -1) - 2.0 * v;
        let dyy = d(0, 1, 0) + d(0, -1, 0) - 2.0 * v;
        let dss = d(1, 0, 0) + d(-1, 0, 0) - 2.0 * v;
        let dxy = (d(0, 1, 1) - d(0, 1, -1) - d(0, -1, 1) + d(0, -1, -1)) / 4.0;
        let dxs = (d(1, 0, 1) - d(1, 0, -1) - d(-1, 0, 1) + d(-1, 0, -1)) / 4.0;
        let dys = (d(1, 1, 0) - d(1, -1, 0) - d(-1, 1, 0) + d(-1, -1, 0)) / 4.0;
        let hess = [[dxx, dxy, dxs], [dxy, dyy, dys], [dxs, dys, dss]];
        let u = solve3(hess, [-g[0], -g[1], -g[2]])?;

        if math::abs(u[0]) <= 0.5 && math::abs(u[1]) <= 0.5 && math::abs(u[2]) <= 0.5 {
            solution = Some((u, g, v));
            break;
        }
        x += (math::round(u[0]) as isize).clamp(-1, 1);
        y += (math::round(u[1]) as isize).clamp(-1, 1);
        s += (math::round(u[2]) as isize).clamp(-1, 1);
        if x < 1 || x > w - 2 || y < 1 || y > h - 2 || s < 1 || s > max_level {
            return None;
        }
    }
    let (u, g, v) = solution?;

    let response = math::abs(v + 0.5 * (g[0] * u[0] + g[1] * u[1] + g[2] * u[2]));
    if response < params.contrast_threshold {
        return None;
    }

    // Edge rejection on the spatial Hessian of the settled DoG level.
    {
        let d =
            |dy: isize, dx: isize| stack.dogs[s as usize].at((x + dx) as usize, (y + dy) as usize);
        let v0 = d(0, 0);
        let dxx = d(0, 1) + d(0, -1) - 2.0 * v0;
        let dyy = d(1, 0) + d(-1, 0) - 2.0 * v0;
        let dxy = (d(1, 1) - d(1, -1) - d(-1, 1) + d(-1, -1)) / 4.0;
        let trace = dxx + dyy;
        let det = dxx * dyy - dxy * dxy;
        let r = params.edge_ratio;
        if det <= 0.0 || trace * trace / det >= (r + 1.0) * (r + 1.0) / r {
            return None;
        }
    }

    let sigma_oct = space.base_sigma * math::powf(space.k, s as f64 + u[2]);
    let sigma = sigma_oct * stack.scale;
    if sigma < params.min_scale {
        return None;
    }

    // Gradient level for orientation/descriptor sampling: nearest Gaussian.
    let level = (math::round(s as f64 + u[2]) as isize).clamp(0, space.levels as isize) as usize;
    let magnitude = {
        let gplane = &stack.gaussians[level];
        let lx = gplane.at((x + 1) as usize, y as usize) - gplane.at((x - 1) as usize, y as usize);
        let ly = gplane.at(x as usize, (y + 1) as usize) - gplane.at(x as usize, (y - 1) as usize);
        math::sqrt(lx * lx + ly * ly)
    };

    Some(Keypoint {
        x: (x as f64 + u[0]) * stack.scale,
        y: (y as f64 + u[1]) * stack.scale,
        sigma,
        magnitude,
        theta: 0.0,
        response,
        octave: cand.octave,
        level,
        x_oct: x as f64 + u[0],
        y_oct: y as f64 + u[1],
        sigma_oct,
    })
}

/// Sub-pixel refinement, contrast filtering, and edge rejection.
pub fn refine_and_filter(
    space: &ScaleSpace,
    candidates: &[Candidate],
    params: &SiftParams,
) -> Vec<Keypoint> {
    candidates
        .iter()
        .filter_map(|c| refine_one(space, c, params))
        .collect()
}
