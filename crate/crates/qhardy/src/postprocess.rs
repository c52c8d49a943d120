//! Gradient-map post-processing: orientation-aware non-maximum suppression
//! with sub-pixel bilinear sampling, then two-threshold hysteresis linking.

use crate::detectors::GradientMap;
use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Ties within this distance count as plateaus and are suppressed.
pub const NMS_TIE_TOLERANCE: f64 = 1e-12;

/// Binary edge image; 1 = edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    pub height: usize,
    pub width: usize,
    pub data: Vec<u8>,
}

impl EdgeMap {
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.width + col]
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }
}

/// Bilinear sample of `f` at fractional coordinates, clamped to the grid.
fn sample(f: &ScalarField, row: f64, col: f64) -> f64 {
    let row = row.clamp(0.0, (f.height - 1) as f64);
    let col = col.clamp(0.0, (f.width - 1) as f64);
    let r0 = row.floor() as usize;
    let c0 = col.floor() as usize;
    let r1 = (r0 + 1).min(f.height - 1);
    let c1 = (c0 + 1).min(f.width - 1);
    let fr = row - r0 as f64;
    let fc = col - c0 as f64;
    (1.0 - fr) * ((1.0 - fc) * f.at(r0, c0) + fc * f.at(r0, c1))
        + fr * ((1.0 - fc) * f.at(r1, c0) + fc * f.at(r1, c1))
}

/// Non-maximum suppression on explicit magnitude/orientation fields: each
/// pixel must strictly exceed (beyond the tie tolerance) the interpolated
/// magnitudes at `+-radius` along its gradient direction to survive.
pub fn nms_fields(magnitude: &ScalarField, orientation: &ScalarField, radius: f64) -> ScalarField {
    let (h, w) = (magnitude.height, magnitude.width);
    let mut out = ScalarField::zeros(h, w, magnitude.spacing);
    crate::parallel::for_each_row(&mut out.data, w, |r, row| {
        for (c, slot) in row.iter_mut().enumerate() {
            let m = magnitude.at(r, c);
            if m == 0.0 {
                continue;
            }
            let ang = orientation.at(r, c);
            let (dr, dc) = (radius * ang.sin(), radius * ang.cos());
            let fwd = sample(magnitude, r as f64 + dr, c as f64 + dc);
            let bwd = sample(magnitude, r as f64 - dr, c as f64 - dc);
            if m - fwd > NMS_TIE_TOLERANCE && m - bwd > NMS_TIE_TOLERANCE {
                *slot = m;
            }
        }
    });
    out
}

pub fn non_max_suppress(gm: &GradientMap, radius: f64) -> ScalarField {
    nms_fields(&gm.magnitude, &gm.orientation, radius)
}

/// Two-threshold hysteresis: pixels `>= high` seed 8-connected growth over
/// pixels `>= low`.
pub fn hysteresis(nms: &ScalarField, low: f64, high: f64) -> Result<EdgeMap> {
    if !(0.0 <= low && low <= high) {
        return Err(Error::BadThresholds { low, high });
    }
    let (h, w) = (nms.height, nms.width);
    let mut data = vec![0u8; h * w];
    let mut stack = Vec::new();
    for r in 0..h {
        for c in 0..w {
            if nms.at(r, c) >= high && data[r * w + c] == 0 {
                data[r * w + c] = 1;
                stack.push((r, c));
                while let Some((rr, cc)) = stack.pop() {
                    for dr in -1i64..=1 {
                        for dc in -1i64..=1 {
                            let (nr, nc) = (rr as i64 + dr, cc as i64 + dc);
                            if nr < 0 || nc < 0 || nr >= h as i64 || nc >= w as i64 {
                                continue;
                            }
                            let (nr, nc) = (nr as usize, nc as usize);
                            if data[nr * w + nc] == 0 && nms.at(nr, nc) >= low {
                                data[nr * w + nc] = 1;
                                stack.push((nr, nc));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(EdgeMap {
        height: h,
        width: w,
        data,
    })
}

/// Rescale a magnitude field so its peak maps to 100 (no-op on all-zero
/// input); lets the absolute hysteresis thresholds be applied to inputs of
/// arbitrary dynamic range.
pub fn normalize_magnitude(mag: &ScalarField) -> ScalarField {
    let peak = mag.max_abs();
    if peak == 0.0 {
        mag.clone()
    } else {
        mag.map(|v| v / peak * 100.0)
    }
}
