//! Poisson / conjugate-Poisson scale space.
//!
//! A real image is lifted to the boundary sample of a quaternion Hardy
//! function at scales `(y1, y2)` by four separable convolutions:
//!
//! ```text
//!   r  = P_{y1} (x) P_{y2}      m1 = Q_{y1} (x) P_{y2}
//!   m2 = P_{y1} (x) Q_{y2}      m3 = Q_{y1} (x) Q_{y2}
//! ```
//!
//! with `P_y(t) = (1/pi) y/(y^2+t^2)` and `Q_y(t) = (1/pi) t/(y^2+t^2)`;
//! the first factor acts along `t1` (columns), the second along `t2` (rows).
//! The `1/pi` factors are folded into the kernels so that `P` integrates
//! to one on its own.
//!
//! Kernels are truncated at a configurable radius (default `8y`), sampled
//! at the grid spacing, and the even kernel `P` is rescaled to unit tap sum.
//! Closed-form scale derivatives of both kernels feed the SDLA/MQDLA
//! detectors without any finite-difference step size.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::parallel::for_each_row;
use std::f64::consts::PI;

/// Minimum scale, relative to the grid spacing. Below this the kernel is
/// sub-grid and the sampled lift is meaningless.
pub const MIN_SCALE_FACTOR: f64 = 0.01;

/// Default truncation radius as a multiple of the scale.
pub const DEFAULT_RADIUS_FACTOR: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Poisson,
    ConjPoisson,
}

/// Sampling description for one 1-D kernel.
#[derive(Debug, Clone, Copy)]
pub struct KernelSpec {
    /// Scale `y > 0`, in the same units as the grid spacing.
    pub scale: f64,
    /// Truncation radius `R` in units of `t`; taps with `|t| > R` are zero.
    pub truncation_radius: f64,
    /// Rescale the sampled Poisson taps to sum to exactly one. Has no
    /// effect on the odd conjugate kernel, whose integral is zero.
    pub normalize: bool,
}

impl KernelSpec {
    pub fn with_scale(scale: f64) -> Self {
        KernelSpec {
            scale,
            truncation_radius: DEFAULT_RADIUS_FACTOR * scale,
            normalize: true,
        }
    }

    pub fn validate(&self, spacing: f64) -> Result<()> {
        if !(self.scale > 0.0) || self.scale < MIN_SCALE_FACTOR * spacing {
            return Err(Error::InvalidScale(self.scale));
        }
        if !(self.truncation_radius >= 4.0 * self.scale) {
            return Err(Error::InvalidScale(self.scale));
        }
        Ok(())
    }
}

/// `P_y(t) = (1/pi) y/(y^2+t^2)`, zero outside the truncation radius.
pub fn poisson_kernel(spec: &KernelSpec, t: f64) -> f64 {
    if t.abs() > spec.truncation_radius {
        return 0.0;
    }
    let y = spec.scale;
    y / (PI * (y * y + t * t))
}

/// `Q_y(t) = (1/pi) t/(y^2+t^2)`, odd, zero outside the truncation radius.
pub fn conj_poisson_kernel(spec: &KernelSpec, t: f64) -> f64 {
    if t.abs() > spec.truncation_radius {
        return 0.0;
    }
    let y = spec.scale;
    t / (PI * (y * y + t * t))
}

/// Closed-form `d/dy` of the kernels:
/// `dP/dy = (1/pi)(t^2 - y^2)/(y^2+t^2)^2`,
/// `dQ/dy = -(1/pi) 2yt/(y^2+t^2)^2`.
pub fn kernel_dscale(spec: &KernelSpec, kind: KernelKind, t: f64) -> f64 {
    if t.abs() > spec.truncation_radius {
        return 0.0;
    }
    let y = spec.scale;
    let d = y * y + t * t;
    match kind {
        KernelKind::Poisson => (t * t - y * y) / (PI * d * d),
        KernelKind::ConjPoisson => -2.0 * y * t / (PI * d * d),
    }
}

fn raw_taps<F: Fn(f64) -> f64>(spec: &KernelSpec, spacing: f64, f: F) -> Vec<f64> {
    let n = (spec.truncation_radius / spacing).floor() as i64;
    (-n..=n).map(|k| f(k as f64 * spacing) * spacing).collect()
}

/// Sampled taps at the grid spacing. Poisson taps include the `normalize`
/// rescale; conjugate-Poisson taps are the plain Riemann weights.
pub fn sample_taps(spec: &KernelSpec, kind: KernelKind, spacing: f64) -> Result<Vec<f64>> {
    spec.validate(spacing)?;
    match kind {
        KernelKind::Poisson => {
            let mut taps = raw_taps(spec, spacing, |t| poisson_kernel(spec, t));
            if spec.normalize {
                let s: f64 = taps.iter().sum();
                for v in &mut taps {
                    *v /= s;
                }
                // absorb the division round-off into the last tap so the
                // in-order tap sum lands on exactly one
                let last = taps.len() - 1;
                let partial: f64 = taps[..last].iter().sum();
                taps[last] = 1.0 - partial;
            }
            Ok(taps)
        }
        KernelKind::ConjPoisson => Ok(raw_taps(spec, spacing, |t| conj_poisson_kernel(spec, t))),
    }
}

/// Scale derivative of the *sampled* taps, consistent with `sample_taps`.
///
/// For a normalized Poisson kernel this is the derivative of the rescaled
/// taps, `(p' S - p S')/S^2`, so finite differences of `sample_taps` in the
/// scale match it. The support is held at the tap count of the base scale.
pub fn sample_dscale_taps(spec: &KernelSpec, kind: KernelKind, spacing: f64) -> Result<Vec<f64>> {
    spec.validate(spacing)?;
    match kind {
        KernelKind::Poisson => {
            let p = raw_taps(spec, spacing, |t| poisson_kernel(spec, t));
            let dp = raw_taps(spec, spacing, |t| kernel_dscale(spec, KernelKind::Poisson, t));
            if spec.normalize {
                let s: f64 = p.iter().sum();
                let ds: f64 = dp.iter().sum();
                Ok(p.iter()
                    .zip(dp.iter())
                    .map(|(&pi, &dpi)| (dpi * s - pi * ds) / (s * s))
                    .collect())
            } else {
                Ok(dp)
            }
        }
        KernelKind::ConjPoisson => Ok(raw_taps(spec, spacing, |t| {
            kernel_dscale(spec, KernelKind::ConjPoisson, t)
        })),
    }
}

fn check_taps(taps: &[f64], dim: usize) -> Result<()> {
    assert!(taps.len() % 2 == 1, "taps count must be odd");
    if taps.len() > 2 * dim {
        return Err(Error::KernelTooLong {
            taps: taps.len(),
            dim,
        });
    }
    Ok(())
}

/// 1-D convolution along t1 (within each row), replicate padding.
pub fn convolve_t1(img: &ScalarField, taps: &[f64]) -> Result<ScalarField> {
    check_taps(taps, img.width)?;
    let n = (taps.len() / 2) as i64;
    let w = img.width as i64;
    let mut out = img.clone();
    let src = &img.data;
    for_each_row(&mut out.data, img.width, |r, row| {
        let base = r * img.width as usize;
        let src_row = &src[base..base + w as usize];
        // Interior columns need no clamping and vectorize cleanly.
        let lo = n.min(w) as usize;
        let hi = (w - n).max(n) as usize;
        for c in lo..hi {
            let mut acc = 0.0;
            let start = c - lo;
            for (idx, &k) in taps.iter().enumerate() {
                acc += k * src_row[start + taps.len() - 1 - idx];
            }
            row[c] = acc;
        }
        for c in (0..lo).chain(hi..w as usize) {
            let mut acc = 0.0;
            for (idx, &k) in taps.iter().enumerate() {
                let m = idx as i64 - n;
                let s = (c as i64 - m).clamp(0, w - 1) as usize;
                acc += k * src_row[s];
            }
            row[c] = acc;
        }
    });
    Ok(out)
}

/// 1-D convolution along t2 (down each column), replicate padding.
pub fn convolve_t2(img: &ScalarField, taps: &[f64]) -> Result<ScalarField> {
    check_taps(taps, img.height)?;
    let n = (taps.len() / 2) as i64;
    let h = img.height as i64;
    let w = img.width;
    let mut out = img.clone();
    let src = &img.data;
    for_each_row(&mut out.data, w, |r, row| {
        let r = r as i64;
        // Accumulate whole source rows so memory access stays sequential.
        row.fill(0.0);
        for (idx, &k) in taps.iter().enumerate() {
            let m = idx as i64 - n;
            let s = (r - m).clamp(0, h - 1) as usize;
            let src_row = &src[s * w..(s + 1) * w];
            for c in 0..w {
                row[c] += k * src_row[c];
            }
        }
    });
    Ok(out)
}

/// Two-pass separable filter: `k_t1` along the rows first, then `k_t2`
/// down the columns. Output dimensions equal input.
pub fn separable_filter(img: &ScalarField, k_t1: &[f64], k_t2: &[f64]) -> Result<ScalarField> {
    convolve_t2(&convolve_t1(img, k_t1)?, k_t2)
}

/// Discrete sample of a quaternion Hardy function at scales `(y1, y2)`.
#[derive(Debug, Clone)]
pub struct HardyFrame {
    pub r: ScalarField,
    pub m1: ScalarField,
    pub m2: ScalarField,
    pub m3: ScalarField,
    pub y1: f64,
    pub y2: f64,
}

impl HardyFrame {
    /// Squared vector-part modulus `m1^2 + m2^2 + m3^2`, pointwise.
    pub fn vector_norm_sqr(&self) -> ScalarField {
        let mut out = self.m1.map(|v| v * v);
        for i in 0..out.data.len() {
            out.data[i] += self.m2.data[i] * self.m2.data[i] + self.m3.data[i] * self.m3.data[i];
        }
        out
    }

    /// Truncation radius used by the lift, in pixels.
    pub fn radius_px(&self, radius_factor: f64) -> usize {
        (radius_factor * self.y1.max(self.y2) / self.r.spacing).ceil() as usize
    }
}

/// Lift configuration; `radius_factor` scales the truncation radius
/// (`R = radius_factor * y`).
#[derive(Debug, Clone, Copy)]
pub struct LiftConfig {
    pub y1: f64,
    pub y2: f64,
    pub radius_factor: f64,
    pub normalize: bool,
}

impl LiftConfig {
    pub fn new(y1: f64, y2: f64) -> Self {
        LiftConfig {
            y1,
            y2,
            radius_factor: DEFAULT_RADIUS_FACTOR,
            normalize: true,
        }
    }

    fn spec(&self, y: f64) -> KernelSpec {
        KernelSpec {
            scale: y,
            truncation_radius: self.radius_factor * y,
            normalize: self.normalize,
        }
    }
}

/// Poisson filtering of a real image into the four Hardy fields.
pub fn hardy_lift(img: &ScalarField, y1: f64, y2: f64) -> Result<HardyFrame> {
    hardy_lift_cfg(img, &LiftConfig::new(y1, y2))
}

pub fn hardy_lift_cfg(img: &ScalarField, cfg: &LiftConfig) -> Result<HardyFrame> {
    hardy_lift_specs(img, &cfg.spec(cfg.y1), &cfg.spec(cfg.y2))
}

/// Lift with explicit per-axis kernel sampling.
pub fn hardy_lift_specs(img: &ScalarField, s1: &KernelSpec, s2: &KernelSpec) -> Result<HardyFrame> {
    let h = img.spacing;
    let p1 = sample_taps(&s1, KernelKind::Poisson, h)?;
    let q1 = sample_taps(&s1, KernelKind::ConjPoisson, h)?;
    let p2 = sample_taps(&s2, KernelKind::Poisson, h)?;
    let q2 = sample_taps(&s2, KernelKind::ConjPoisson, h)?;
    Ok(HardyFrame {
        r: separable_filter(img, &p1, &p2)?,
        m1: separable_filter(img, &q1, &p2)?,
        m2: separable_filter(img, &p1, &q2)?,
        m3: separable_filter(img, &q1, &q2)?,
        y1: s1.scale,
        y2: s2.scale,
    })
}

/// Analytic scale derivatives of the lift: `(d/dy1, d/dy2)` of all four
/// fields, obtained by swapping in the closed-form kernel derivative along
/// the differentiated axis.
pub fn hardy_lift_derivs(img: &ScalarField, y1: f64, y2: f64) -> Result<(HardyFrame, HardyFrame)> {
    hardy_lift_derivs_cfg(img, &LiftConfig::new(y1, y2))
}

pub fn hardy_lift_derivs_cfg(
    img: &ScalarField,
    cfg: &LiftConfig,
) -> Result<(HardyFrame, HardyFrame)> {
    hardy_lift_derivs_specs(img, &cfg.spec(cfg.y1), &cfg.spec(cfg.y2))
}

/// Scale derivatives with explicit per-axis kernel sampling.
pub fn hardy_lift_derivs_specs(
    img: &ScalarField,
    s1: &KernelSpec,
    s2: &KernelSpec,
) -> Result<(HardyFrame, HardyFrame)> {
    let h = img.spacing;
    let p1 = sample_taps(&s1, KernelKind::Poisson, h)?;
    let q1 = sample_taps(&s1, KernelKind::ConjPoisson, h)?;
    let p2 = sample_taps(&s2, KernelKind::Poisson, h)?;
    let q2 = sample_taps(&s2, KernelKind::ConjPoisson, h)?;
    let dp1 = sample_dscale_taps(&s1, KernelKind::Poisson, h)?;
    let dq1 = sample_dscale_taps(&s1, KernelKind::ConjPoisson, h)?;
    let dp2 = sample_dscale_taps(&s2, KernelKind::Poisson, h)?;
    let dq2 = sample_dscale_taps(&s2, KernelKind::ConjPoisson, h)?;
    let dy1 = HardyFrame {
        r: separable_filter(img, &dp1, &p2)?,
        m1: separable_filter(img, &dq1, &p2)?,
        m2: separable_filter(img, &dp1, &q2)?,
        m3: separable_filter(img, &dq1, &q2)?,
        y1: s1.scale,
        y2: s2.scale,
    };
    let dy2 = HardyFrame {
        r: separable_filter(img, &p1, &dp2)?,
        m1: separable_filter(img, &q1, &dp2)?,
        m2: separable_filter(img, &p1, &dq2)?,
        m3: separable_filter(img, &q1, &dq2)?,
        y1: s1.scale,
        y2: s2.scale,
    };
    Ok((dy1, dy2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(h: usize, w: usize, seed: u64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ScalarField::from_fn(h, w, 1.0, |_, _| rng.gen_range(0.0..255.0))
    }

    #[test]
    fn poisson_kernel_values() {
        let spec = KernelSpec::with_scale(1.0);
        assert!((poisson_kernel(&spec, 0.0) - 1.0 / PI).abs() < 1e-15);
        assert!((poisson_kernel(&spec, 1.0) - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert_eq!(poisson_kernel(&spec, 9.0), 0.0);
    }

    #[test]
    fn conj_poisson_kernel_values() {
        let spec = KernelSpec::with_scale(1.0);
        assert_eq!(conj_poisson_kernel(&spec, 0.0), 0.0);
        assert!((conj_poisson_kernel(&spec, 1.0) - 1.0 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn sampled_poisson_normalizes_to_one() {
        let spec = KernelSpec {
            scale: 4.0,
            truncation_radius: 40.0 * 4.0,
            normalize: true,
        };
        let taps = sample_taps(&spec, KernelKind::Poisson, 0.1).unwrap();
        let s: f64 = taps.iter().sum();
        assert_eq!(s, 1.0); // exact by construction
    }

    #[test]
    fn sampled_conj_poisson_sums_to_zero() {
        let spec = KernelSpec::with_scale(2.0);
        let taps = sample_taps(&spec, KernelKind::ConjPoisson, 1.0).unwrap();
        let s: f64 = taps.iter().sum();
        assert!(s.abs() < 1e-14);
    }

    #[test]
    fn dscale_formula_values() {
        let spec = KernelSpec::with_scale(1.0);
        assert!((kernel_dscale(&spec, KernelKind::Poisson, 0.0) + 1.0 / PI).abs() < 1e-15);
        assert_eq!(kernel_dscale(&spec, KernelKind::ConjPoisson, 0.0), 0.0);
    }

    #[test]
    fn dscale_matches_finite_difference() {
        // (P_{y+d} - P_{y-d}) / 2d, d = 1e-5, at 50 sample points
        let y = 1.3;
        let delta = 1e-5;
        for i in 0..50 {
            let t = -5.0 + 0.2 * i as f64;
            for kind in [KernelKind::Poisson, KernelKind::ConjPoisson] {
                let sp = |scale: f64| KernelSpec {
                    scale,
                    truncation_radius: 100.0,
                    normalize: false,
                };
                let k = |s: f64, t: f64| match kind {
                    KernelKind::Poisson => poisson_kernel(&sp(s), t),
                    KernelKind::ConjPoisson => conj_poisson_kernel(&sp(s), t),
                };
                let fd = (k(y + delta, t) - k(y - delta, t)) / (2.0 * delta);
                let an = kernel_dscale(&sp(y), kind, t);
                assert!((fd - an).abs() < 1e-6, "kind {kind:?} t {t}");
            }
        }
    }

    #[test]
    fn rejects_degenerate_scale() {
        assert!(hardy_lift(&random_field(8, 8, 1), 0.005, 1.0).is_err());
        assert!(hardy_lift(&random_field(8, 8, 1), -1.0, 1.0).is_err());
    }

    #[test]
    fn rejects_overlong_kernel() {
        let img = random_field(4, 4, 2);
        let taps = vec![0.1; 11];
        assert!(convolve_t1(&img, &taps).is_err());
    }

    #[test]
    fn constant_image_is_fixed_point() {
        let img = ScalarField::constant(32, 32, 1.0, 42.0);
        let frame = hardy_lift(&img, 2.0, 2.0).unwrap();
        for i in 0..img.data.len() {
            assert!((frame.r.data[i] - 42.0).abs() < 1e-10);
            assert!(frame.m1.data[i].abs() < 1e-12);
            assert!(frame.m2.data[i].abs() < 1e-12);
            assert!(frame.m3.data[i].abs() < 1e-12);
        }
    }

    #[test]
    fn separable_matches_brute_force_double_sum() {
        // 16x16 random image vs direct 2-D double sum with replicate padding
        let img = random_field(16, 16, 3);
        let s = KernelSpec::with_scale(1.5);
        let k1 = sample_taps(&s, KernelKind::ConjPoisson, 1.0).unwrap();
        let k2 = sample_taps(&s, KernelKind::Poisson, 1.0).unwrap();
        let got = separable_filter(&img, &k1, &k2).unwrap();

        let n1 = (k1.len() / 2) as i64;
        let n2 = (k2.len() / 2) as i64;
        let (h, w) = (16i64, 16i64);
        let mut max_diff = 0.0f64;
        for r in 0..h {
            for c in 0..w {
                let mut acc = 0.0;
                for (i2, &b) in k2.iter().enumerate() {
                    let dr = i2 as i64 - n2;
                    let rr = (r - dr).clamp(0, h - 1) as usize;
                    for (i1, &a) in k1.iter().enumerate() {
                        let dc = i1 as i64 - n1;
                        let cc = (c - dc).clamp(0, w - 1) as usize;
                        acc += a * b * img.at(rr, cc);
                    }
                }
                max_diff = max_diff.max((acc - got.at(r as usize, c as usize)).abs());
            }
        }
        assert!(max_diff < 1e-10, "max diff {max_diff}");
    }

    #[test]
    fn odd_kernel_annihilates_constants() {
        let img = ScalarField::constant(16, 16, 1.0, 7.0);
        let s = KernelSpec::with_scale(1.5);
        let q = sample_taps(&s, KernelKind::ConjPoisson, 1.0).unwrap();
        let out = convolve_t1(&img, &q).unwrap();
        assert!(out.max_abs() < 1e-12);
    }

    #[test]
    fn cosine_attenuation_matches_analytic() {
        // Poisson damps a pure cosine by e^{-w y}; the conjugate kernel
        // rotates it into the matching sine. Fine grid, wide truncation.
        let (hgt, wid, h) = (48, 768, 0.1);
        let omega = 0.5;
        let y1 = 0.3;
        let img = ScalarField::from_fn(hgt, wid, h, |_, c| (omega * c as f64 * h).cos());
        let cfg = LiftConfig {
            y1,
            y2: 0.01,
            radius_factor: 60.0 / y1, // R = 60 length units
            normalize: true,
        };
        let frame = hardy_lift_cfg(&img, &cfg).unwrap();
        let damp = (-omega * y1).exp();
        let border = (60.0 / h) as usize + 2;
        let mut max_r = 0.0f64;
        let mut max_m1 = 0.0f64;
        for c in border..wid - border {
            let t = c as f64 * h;
            max_r = max_r.max((frame.r.at(4, c) - damp * (omega * t).cos()).abs());
            max_m1 = max_m1.max((frame.m1.at(4, c) - damp * (omega * t).sin()).abs());
        }
        assert!(max_r < 0.02 * damp, "r err {max_r}");
        assert!(max_m1 < 0.02 * damp, "m1 err {max_m1}");
    }

    #[test]
    fn m3_separates_on_separable_images() {
        // m3 of u(t1) v(t2) is the outer product (Q*u)(Q*v)
        let (n, h) = (32usize, 1.0);
        let u: Vec<f64> = (0..n).map(|c| (0.3 * c as f64).sin() + 2.0).collect();
        let v: Vec<f64> = (0..n).map(|r| (0.2 * r as f64).cos() + 1.5).collect();
        let img = ScalarField::from_fn(n, n, h, |r, c| u[c] * v[r]);
        let frame = hardy_lift(&img, 1.5, 1.5).unwrap();

        let s = KernelSpec::with_scale(1.5);
        let q = sample_taps(&s, KernelKind::ConjPoisson, h).unwrap();
        let urow = ScalarField::new(1, n, h, u.clone());
        let vrow = ScalarField::new(1, n, h, v.clone());
        let qu = convolve_t1(&urow, &q).unwrap();
        let qv = convolve_t1(&vrow, &q).unwrap();
        let mut max_diff = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                max_diff = max_diff.max((frame.m3.at(r, c) - qu.at(0, c) * qv.at(0, r)).abs());
            }
        }
        assert!(max_diff < 1e-10, "max diff {max_diff}");
    }

    fn smooth_image(n: usize, spacing: f64) -> ScalarField {
        ScalarField::from_fn(n, n, spacing, |r, c| {
            let x = c as f64 * spacing;
            let y = r as f64 * spacing;
            100.0 + 30.0 * (0.21 * x).sin() * (0.17 * y).cos() + 10.0 * (0.09 * (x + y)).sin()
        })
    }

    #[test]
    fn derivs_of_constant_vanish() {
        let img = ScalarField::constant(16, 16, 1.0, 13.0);
        let (dy1, dy2) = hardy_lift_derivs(&img, 1.5, 1.5).unwrap();
        assert!(dy1.r.max_abs() < 1e-10);
        assert!(dy2.r.max_abs() < 1e-10);
    }

    #[test]
    fn derivs_match_finite_difference() {
        let img = smooth_image(32, 1.0);
        let (y1, y2) = (1.3, 1.1);
        let delta = 1e-4;
        let (dy1, dy2) = hardy_lift_derivs(&img, y1, y2).unwrap();
        let fp = hardy_lift(&img, y1 + delta, y2).unwrap();
        let fm = hardy_lift(&img, y1 - delta, y2).unwrap();
        for (field, fp_f, fm_f) in [
            (&dy1.r, &fp.r, &fm.r),
            (&dy1.m1, &fp.m1, &fm.m1),
            (&dy1.m2, &fp.m2, &fm.m2),
            (&dy1.m3, &fp.m3, &fm.m3),
        ] {
            let fd = fp_f.zip_map(fm_f, |a, b| (a - b) / (2.0 * delta));
            let diff = field.zip_map(&fd, |a, b| a - b);
            assert!(diff.max_abs() < 1e-5, "dy1 err {}", diff.max_abs());
        }
        let gp = hardy_lift(&img, y1, y2 + delta).unwrap();
        let gm = hardy_lift(&img, y1, y2 - delta).unwrap();
        let fd = gp.m3.zip_map(&gm.m3, |a, b| (a - b) / (2.0 * delta));
        let diff = dy2.m3.zip_map(&fd, |a, b| a - b);
        assert!(diff.max_abs() < 1e-5, "dy2 err {}", diff.max_abs());
    }

    #[test]
    fn deriv_m3_separates() {
        // d m3/d y2 of u(t1)v(t2) is (Q*u) (dQ/dy * v)
        let (n, h) = (32usize, 1.0);
        let u: Vec<f64> = (0..n).map(|c| (0.3 * c as f64).sin() + 2.0).collect();
        let v: Vec<f64> = (0..n).map(|r| (0.2 * r as f64).cos() + 1.5).collect();
        let img = ScalarField::from_fn(n, n, h, |r, c| u[c] * v[r]);
        let (_, dy2) = hardy_lift_derivs(&img, 1.5, 1.5).unwrap();

        let s = KernelSpec::with_scale(1.5);
        let q = sample_taps(&s, KernelKind::ConjPoisson, h).unwrap();
        let dq = sample_dscale_taps(&s, KernelKind::ConjPoisson, h).unwrap();
        let urow = ScalarField::new(1, n, h, u.clone());
        let vrow = ScalarField::new(1, n, h, v.clone());
        let qu = convolve_t1(&urow, &q).unwrap();
        let dqv = convolve_t1(&vrow, &dq).unwrap();
        let mut max_diff = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                max_diff = max_diff.max((dy2.m3.at(r, c) - qu.at(0, c) * dqv.at(0, r)).abs());
            }
        }
        assert!(max_diff < 1e-10, "max diff {max_diff}");
    }

    #[test]
    fn lift_is_linear() {
        let f = random_field(24, 24, 10);
        let g = random_field(24, 24, 11);
        let (alpha, beta) = (1.7, -0.4);
        let combo = f.zip_map(&g, |a, b| alpha * a + beta * b);
        let lf = hardy_lift(&f, 1.2, 0.9).unwrap();
        let lg = hardy_lift(&g, 1.2, 0.9).unwrap();
        let lc = hardy_lift(&combo, 1.2, 0.9).unwrap();
        for (c, a, b) in [
            (&lc.r, &lf.r, &lg.r),
            (&lc.m1, &lf.m1, &lg.m1),
            (&lc.m2, &lf.m2, &lg.m2),
            (&lc.m3, &lf.m3, &lg.m3),
        ] {
            let mut max = 0.0f64;
            for i in 0..c.data.len() {
                max = max.max((c.data[i] - (alpha * a.data[i] + beta * b.data[i])).abs());
            }
            assert!(max < 1e-10);
        }
    }
}
