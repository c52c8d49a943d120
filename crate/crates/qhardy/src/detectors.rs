//! Edge detectors on quaternion Hardy frames — QDLA, MQDLA, SDLA, MSDLA —
//! plus Sobel and Canny-gradient baselines.
//!
//! Each detector produces a two-component [`GradientMap`]; magnitude is the
//! Euclidean norm of the pair and orientation its `atan2(g2, g1)` angle,
//! which feeds non-maximum suppression downstream.

use crate::error::Result;
use crate::features::{
    attenuation_scale_deriv, braced_scale, braced_spatial, default_eps, CrAxis, LocalGeometry,
};
use crate::field::ScalarField;
use crate::scale_space::{hardy_lift_cfg, hardy_lift_derivs_cfg, HardyFrame, LiftConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorKind {
    Qdla,
    Mqdla,
    Sdla,
    Msdla,
    Sobel,
    Canny,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 6] = [
        DetectorKind::Qdla,
        DetectorKind::Mqdla,
        DetectorKind::Sdla,
        DetectorKind::Msdla,
        DetectorKind::Sobel,
        DetectorKind::Canny,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Qdla => "qdla",
            DetectorKind::Mqdla => "mqdla",
            DetectorKind::Sdla => "sdla",
            DetectorKind::Msdla => "msdla",
            DetectorKind::Sobel => "sobel",
            DetectorKind::Canny => "canny",
        }
    }

    /// Whether the detector consumes a Hardy frame (as opposed to the raw
    /// image).
    pub fn uses_lift(self) -> bool {
        !matches!(self, DetectorKind::Sobel | DetectorKind::Canny)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DetectorConfig {
    pub detector: DetectorKind,
    pub y1: f64,
    pub y2: f64,
    /// Gaussian smoothing used by the Canny baseline.
    pub canny_sigma: f64,
}

impl DetectorConfig {
    pub fn new(detector: DetectorKind) -> Self {
        DetectorConfig {
            detector,
            y1: 0.3,
            y2: 0.3,
            canny_sigma: 1.0,
        }
    }
}

/// Two-component detector response with derived magnitude and orientation.
#[derive(Debug, Clone)]
pub struct GradientMap {
    pub g1: ScalarField,
    pub g2: ScalarField,
    pub magnitude: ScalarField,
    pub orientation: ScalarField,
}

impl GradientMap {
    pub fn from_components(g1: ScalarField, g2: ScalarField) -> GradientMap {
        let magnitude = g1.zip_map(&g2, |a, b| (a * a + b * b).sqrt());
        let orientation = g2.zip_map(&g1, |b, a| b.atan2(a));
        GradientMap {
            g1,
            g2,
            magnitude,
            orientation,
        }
    }
}

/// Attenuation field of a frame with the degeneracy guard applied.
fn attenuation(frame: &HardyFrame, eps: f64) -> ScalarField {
    let mut out = frame.r.clone();
    for i in 0..out.data.len() {
        let r = frame.r.data[i];
        let n2 = frame.m1.data[i] * frame.m1.data[i]
            + frame.m2.data[i] * frame.m2.data[i]
            + frame.m3.data[i] * frame.m3.data[i];
        out.data[i] = (r * r + n2).sqrt().max(eps).ln();
    }
    out
}

/// QDLA: spatial gradient of the local attenuation,
/// `(da/dt1, da/dt2)` by central differences.
pub fn qdla(frame: &HardyFrame, eps: f64) -> GradientMap {
    let a = attenuation(frame, eps);
    GradientMap::from_components(a.diff_t1(), a.diff_t2())
}

/// MQDLA: the scale-derivative braced terms of the Cauchy-Riemann
/// relations, `p1` from the `y1`-derivative frame and `p2` from `y2`.
pub fn mqdla(frame: &HardyFrame, dy1: &HardyFrame, dy2: &HardyFrame, eps: f64) -> GradientMap {
    let geo = LocalGeometry::new(frame, eps);
    GradientMap::from_components(
        braced_scale(frame, dy1, &geo, CrAxis::T1),
        braced_scale(frame, dy2, &geo, CrAxis::T2),
    )
}

/// SDLA: scale gradient of the local attenuation,
/// `(da/dy1, da/dy2)` from the analytic kernel derivatives.
pub fn sdla(frame: &HardyFrame, dy1: &HardyFrame, dy2: &HardyFrame, eps: f64) -> GradientMap {
    let geo = LocalGeometry::new(frame, eps);
    GradientMap::from_components(
        attenuation_scale_deriv(frame, dy1, &geo),
        attenuation_scale_deriv(frame, dy2, &geo),
    )
}

/// MSDLA: the negated spatial braced terms, `M1` along `t1` and `M2`
/// along `t2`.
pub fn msdla(frame: &HardyFrame, eps: f64) -> GradientMap {
    let geo = LocalGeometry::new(frame, eps);
    let m1 = braced_spatial(frame, &geo, CrAxis::T1).map(|v| -v);
    let m2 = braced_spatial(frame, &geo, CrAxis::T2).map(|v| -v);
    GradientMap::from_components(m1, m2)
}

/// 3x3 convolution with replicate padding.
fn conv3x3(img: &ScalarField, k: &[[f64; 3]; 3]) -> ScalarField {
    let (h, w) = (img.height, img.width);
    ScalarField::from_fn(h, w, img.spacing, |r, c| {
        let mut acc = 0.0;
        for (dr, row) in k.iter().enumerate() {
            for (dc, &kv) in row.iter().enumerate() {
                let rr = (r + dr).saturating_sub(1).min(h - 1);
                let cc = (c + dc).saturating_sub(1).min(w - 1);
                acc += kv * img.at(rr, cc);
            }
        }
        acc
    })
}

/// Standard unnormalized 3x3 Sobel kernels; `g1` responds to variation
/// along `t1` (columns), `g2` along `t2` (rows).
pub fn sobel(img: &ScalarField) -> GradientMap {
    let gx = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
    let gy = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];
    GradientMap::from_components(conv3x3(img, &gx), conv3x3(img, &gy))
}

fn gaussian_taps(sigma: f64) -> Vec<f64> {
    let n = (4.0 * sigma).ceil() as i64;
    let mut taps: Vec<f64> = (-n..=n)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = taps.iter().sum();
    for t in taps.iter_mut() {
        *t /= s;
    }
    taps
}

/// Canny-style gradient: Gaussian smoothing followed by central
/// differences. NMS and hysteresis reuse the postprocess module.
pub fn canny_gradient(img: &ScalarField, sigma: f64) -> Result<GradientMap> {
    let taps = gaussian_taps(sigma);
    let smooth = crate::scale_space::separable_filter(img, &taps, &taps)?;
    Ok(GradientMap::from_components(
        smooth.diff_t1(),
        smooth.diff_t2(),
    ))
}

/// Run any detector on a raw image with the configured scales.
pub fn run_detector(img: &ScalarField, cfg: &DetectorConfig) -> Result<GradientMap> {
    match cfg.detector {
        DetectorKind::Sobel => Ok(sobel(img)),
        DetectorKind::Canny => canny_gradient(img, cfg.canny_sigma),
        frame_based => {
            let lift = LiftConfig::new(cfg.y1, cfg.y2);
            let frame = hardy_lift_cfg(img, &lift)?;
            let eps = default_eps(&frame);
            Ok(match frame_based {
                DetectorKind::Qdla => qdla(&frame, eps),
                DetectorKind::Msdla => msdla(&frame, eps),
                DetectorKind::Mqdla => {
                    let (dy1, dy2) = hardy_lift_derivs_cfg(img, &lift)?;
                    mqdla(&frame, &dy1, &dy2, eps)
                }
                DetectorKind::Sdla => {
                    let (dy1, dy2) = hardy_lift_derivs_cfg(img, &lift)?;
                    sdla(&frame, &dy1, &dy2, eps)
                }
                _ => unreachable!(),
            })
        }
    }
}
