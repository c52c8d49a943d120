//! Polar-form local features of a Hardy frame — amplitude, attenuation,
//! phase, phase vector — and numerical verification of the generalized
//! Cauchy-Riemann relations between them.
//!
//! The phase is computed with the two-argument arctangent of `(|m|, r)` so
//! it lands in `[0, pi]` and stays defined at `r = 0`. The unit
//! phase-direction field `m/|m|` is zeroed where `|m|` falls below the
//! degeneracy guard, and all of its derivatives are taken on the guarded
//! field; degenerate pixels are excluded from residual statistics.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::quat::Quaternion;
use crate::scale_space::{hardy_lift_cfg, hardy_lift_derivs_cfg, HardyFrame, LiftConfig};

/// Relative degeneracy guard: this factor times the peak amplitude.
pub const DEFAULT_EPS_FACTOR: f64 = 1e-9;

/// Pointwise polar decomposition of a Hardy frame:
/// `A = sqrt(r^2 + |m|^2)`, `a = ln A`, `theta = atan2(|m|, r)`,
/// `p = (m/|m|) theta`.
#[derive(Debug, Clone)]
pub struct FeatureField {
    pub amplitude: ScalarField,
    pub attenuation: ScalarField,
    pub theta: ScalarField,
    pub p1: ScalarField,
    pub p2: ScalarField,
    pub p3: ScalarField,
    pub y1: f64,
    pub y2: f64,
}

/// Default guard for a frame: `1e-9` times its peak amplitude.
pub fn default_eps(frame: &HardyFrame) -> f64 {
    let mut max_sq = 0.0f64;
    for i in 0..frame.r.data.len() {
        let r = frame.r.data[i];
        let sq = r * r
            + frame.m1.data[i] * frame.m1.data[i]
            + frame.m2.data[i] * frame.m2.data[i]
            + frame.m3.data[i] * frame.m3.data[i];
        max_sq = max_sq.max(sq);
    }
    DEFAULT_EPS_FACTOR * max_sq.sqrt()
}

pub fn local_features(frame: &HardyFrame, eps: f64) -> FeatureField {
    let n = frame.r.data.len();
    let mut amplitude = frame.r.clone();
    let mut attenuation = frame.r.clone();
    let mut theta = frame.r.clone();
    let mut p1 = frame.r.clone();
    let mut p2 = frame.r.clone();
    let mut p3 = frame.r.clone();
    for i in 0..n {
        let r = frame.r.data[i];
        let (m1, m2, m3) = (frame.m1.data[i], frame.m2.data[i], frame.m3.data[i]);
        let mm = (m1 * m1 + m2 * m2 + m3 * m3).sqrt();
        let a_val = (r * r + mm * mm).sqrt();
        amplitude.data[i] = a_val;
        attenuation.data[i] = a_val.max(eps).ln();
        let th = mm.atan2(r);
        theta.data[i] = th;
        if mm < eps {
            p1.data[i] = 0.0;
            p2.data[i] = 0.0;
            p3.data[i] = 0.0;
        } else {
            p1.data[i] = m1 / mm * th;
            p2.data[i] = m2 / mm * th;
            p3.data[i] = m3 / mm * th;
        }
    }
    FeatureField {
        amplitude,
        attenuation,
        theta,
        p1,
        p2,
        p3,
        y1: frame.y1,
        y2: frame.y2,
    }
}

/// Inverse of [`local_features`]: `r = A cos(theta)`,
/// `m = A sin(theta) p/|p|` (with `|p| = theta` on non-degenerate pixels).
pub fn reconstruct(ff: &FeatureField) -> HardyFrame {
    let n = ff.amplitude.data.len();
    let mut r = ff.amplitude.clone();
    let mut m1 = ff.amplitude.clone();
    let mut m2 = ff.amplitude.clone();
    let mut m3 = ff.amplitude.clone();
    for i in 0..n {
        let a_val = ff.amplitude.data[i];
        let th = ff.theta.data[i];
        let (p1, p2, p3) = (ff.p1.data[i], ff.p2.data[i], ff.p3.data[i]);
        let pn = (p1 * p1 + p2 * p2 + p3 * p3).sqrt();
        r.data[i] = a_val * th.cos();
        if pn > 0.0 {
            let s = a_val * th.sin() / pn;
            m1.data[i] = s * p1;
            m2.data[i] = s * p2;
            m3.data[i] = s * p3;
        } else {
            m1.data[i] = 0.0;
            m2.data[i] = 0.0;
            m3.data[i] = 0.0;
        }
    }
    HardyFrame {
        r,
        m1,
        m2,
        m3,
        y1: ff.y1,
        y2: ff.y2,
    }
}

/// Shared pointwise geometry of a frame: `d = r^2 + |m|^2`,
/// `sin2 = sin^2(theta) = |m|^2/d`, `mm = |m|`, and the guarded unit
/// direction `u = m/|m|` (zero where `mm < eps`).
pub(crate) struct LocalGeometry {
    pub d: ScalarField,
    pub sin2: ScalarField,
    pub mm: ScalarField,
    pub u1: ScalarField,
    pub u2: ScalarField,
    pub u3: ScalarField,
    pub eps: f64,
}

impl LocalGeometry {
    pub(crate) fn new(frame: &HardyFrame, eps: f64) -> LocalGeometry {
        let n = frame.r.data.len();
        let mut d = frame.r.clone();
        let mut sin2 = frame.r.clone();
        let mut mm = frame.r.clone();
        let mut u1 = frame.r.clone();
        let mut u2 = frame.r.clone();
        let mut u3 = frame.r.clone();
        for i in 0..n {
            let r = frame.r.data[i];
            let (m1, m2, m3) = (frame.m1.data[i], frame.m2.data[i], frame.m3.data[i]);
            let n2 = m1 * m1 + m2 * m2 + m3 * m3;
            let dv = r * r + n2;
            d.data[i] = dv;
            sin2.data[i] = if dv > 0.0 { n2 / dv } else { 0.0 };
            let nv = n2.sqrt();
            mm.data[i] = nv;
            if nv < eps {
                u1.data[i] = 0.0;
                u2.data[i] = 0.0;
                u3.data[i] = 0.0;
            } else {
                u1.data[i] = m1 / nv;
                u2.data[i] = m2 / nv;
                u3.data[i] = m3 / nv;
            }
        }
        LocalGeometry {
            d,
            sin2,
            mm,
            u1,
            u2,
            u3,
            eps,
        }
    }
}

/// Component selection for the two scalar Cauchy-Riemann relations: axis 1
/// pairs `m1` with the `(u2, u3)` cross terms, axis 2 pairs `m2` with
/// `(u1, u3)`.
#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum CrAxis {
    T1,
    T2,
}

/// Braced term of the spatial-derivative relations, built from central
/// differences along the axis:
/// `(r dm_a - m_a dr)/d - sin2 (du_b u_c - du_c u_b)`.
pub(crate) fn braced_spatial(frame: &HardyFrame, geo: &LocalGeometry, axis: CrAxis) -> ScalarField {
    let (dm, dr, du_b, du_c, u_b, u_c, m_a) = match axis {
        CrAxis::T1 => (
            frame.m1.diff_t1(),
            frame.r.diff_t1(),
            geo.u2.diff_t1(),
            geo.u3.diff_t1(),
            &geo.u2,
            &geo.u3,
            &frame.m1,
        ),
        CrAxis::T2 => (
            frame.m2.diff_t2(),
            frame.r.diff_t2(),
            geo.u1.diff_t2(),
            geo.u3.diff_t2(),
            &geo.u1,
            &geo.u3,
            &frame.m2,
        ),
    };
    let mut out = frame.r.clone();
    for i in 0..out.data.len() {
        let quot = (frame.r.data[i] * dm.data[i] - m_a.data[i] * dr.data[i]) / geo.d.data[i];
        let cross = du_b.data[i] * u_c.data[i] - du_c.data[i] * u_b.data[i];
        out.data[i] = quot - geo.sin2.data[i] * cross;
    }
    out
}

/// Scale derivative of the guarded unit direction via the chain rule:
/// `du_k = dm_k/|m| - m_k (m . dm)/|m|^3`; zero on degenerate pixels.
fn unit_scale_derivs(
    frame: &HardyFrame,
    dframe: &HardyFrame,
    geo: &LocalGeometry,
) -> (ScalarField, ScalarField, ScalarField) {
    let mut du1 = frame.r.clone();
    let mut du2 = frame.r.clone();
    let mut du3 = frame.r.clone();
    for i in 0..du1.data.len() {
        let nv = geo.mm.data[i];
        if nv < geo.eps {
            du1.data[i] = 0.0;
            du2.data[i] = 0.0;
            du3.data[i] = 0.0;
            continue;
        }
        let (m1, m2, m3) = (frame.m1.data[i], frame.m2.data[i], frame.m3.data[i]);
        let (d1, d2, d3) = (dframe.m1.data[i], dframe.m2.data[i], dframe.m3.data[i]);
        let dot = m1 * d1 + m2 * d2 + m3 * d3;
        let n3 = nv * nv * nv;
        du1.data[i] = d1 / nv - m1 * dot / n3;
        du2.data[i] = d2 / nv - m2 * dot / n3;
        du3.data[i] = d3 / nv - m3 * dot / n3;
    }
    (du1, du2, du3)
}

/// Braced term of the scale-derivative relations, with the `y`-derivatives
/// of the lifted fields supplied analytically by `dframe`.
pub(crate) fn braced_scale(
    frame: &HardyFrame,
    dframe: &HardyFrame,
    geo: &LocalGeometry,
    axis: CrAxis,
) -> ScalarField {
    let (du1, du2, du3) = unit_scale_derivs(frame, dframe, geo);
    let (dm, dr) = match axis {
        CrAxis::T1 => (&dframe.m1, &dframe.r),
        CrAxis::T2 => (&dframe.m2, &dframe.r),
    };
    let (du_b, du_c, u_b, u_c, m_a) = match axis {
        CrAxis::T1 => (&du2, &du3, &geo.u2, &geo.u3, &frame.m1),
        CrAxis::T2 => (&du1, &du3, &geo.u1, &geo.u3, &frame.m2),
    };
    let mut out = frame.r.clone();
    for i in 0..out.data.len() {
        let quot = (frame.r.data[i] * dm.data[i] - m_a.data[i] * dr.data[i]) / geo.d.data[i];
        let cross = du_b.data[i] * u_c.data[i] - du_c.data[i] * u_b.data[i];
        out.data[i] = quot - geo.sin2.data[i] * cross;
    }
    out
}

/// Scale derivative of the attenuation: `da/dy = (r dr + m . dm)/d`.
pub(crate) fn attenuation_scale_deriv(
    frame: &HardyFrame,
    dframe: &HardyFrame,
    geo: &LocalGeometry,
) -> ScalarField {
    let mut out = frame.r.clone();
    for i in 0..out.data.len() {
        out.data[i] = (frame.r.data[i] * dframe.r.data[i]
            + frame.m1.data[i] * dframe.m1.data[i]
            + frame.m2.data[i] * dframe.m2.data[i]
            + frame.m3.data[i] * dframe.m3.data[i])
            / geo.d.data[i];
    }
    out
}

/// Residuals of the four scalar generalized Cauchy-Riemann relations
/// between the local attenuation and the lifted fields. Each relation
/// holds exactly in the continuum for a zero-free Hardy function; the
/// discrete residuals measure the discretization error.
#[derive(Debug, Clone)]
pub struct CRResidualReport {
    pub res_t1: ScalarField,
    pub res_y1: ScalarField,
    pub res_t2: ScalarField,
    pub res_y2: ScalarField,
    pub max_t1: f64,
    pub max_y1: f64,
    pub max_t2: f64,
    pub max_y2: f64,
    /// Border band (pixels) excluded from the maxima: twice the kernel
    /// truncation radius.
    pub border: usize,
    /// Interior pixels with `|m|` below the degeneracy guard, excluded
    /// from the maxima.
    pub flagged: usize,
}

pub fn cr_residuals(img: &ScalarField, y1: f64, y2: f64) -> Result<CRResidualReport> {
    cr_residuals_cfg(img, &LiftConfig::new(y1, y2))
}

pub fn cr_residuals_cfg(img: &ScalarField, cfg: &LiftConfig) -> Result<CRResidualReport> {
    let frame = hardy_lift_cfg(img, cfg)?;
    let (dy1, dy2) = hardy_lift_derivs_cfg(img, cfg)?;
    let eps = default_eps(&frame);
    let geo = LocalGeometry::new(&frame, eps);
    let att = frame.r.zip_map(&geo.d, |_, d| 0.5 * d.max(eps * eps).ln());

    let res_t1 = att
        .diff_t1()
        .zip_map(&braced_scale(&frame, &dy1, &geo, CrAxis::T1), |a, b| a - b);
    let res_y1 = attenuation_scale_deriv(&frame, &dy1, &geo)
        .zip_map(&braced_spatial(&frame, &geo, CrAxis::T1), |a, b| a + b);
    let res_t2 = att
        .diff_t2()
        .zip_map(&braced_scale(&frame, &dy2, &geo, CrAxis::T2), |a, b| a - b);
    let res_y2 = attenuation_scale_deriv(&frame, &dy2, &geo)
        .zip_map(&braced_spatial(&frame, &geo, CrAxis::T2), |a, b| a + b);

    let border = 2 * frame.radius_px(cfg.radius_factor);
    let mut flagged = 0usize;
    let mut maxima = [0.0f64; 4];
    let fields = [&res_t1, &res_y1, &res_t2, &res_y2];
    if 2 * border < frame.r.height && 2 * border < frame.r.width {
        for r in border..frame.r.height - border {
            for c in border..frame.r.width - border {
                if geo.mm.at(r, c) < eps {
                    flagged += 1;
                    continue;
                }
                for (k, f) in fields.iter().enumerate() {
                    maxima[k] = maxima[k].max(f.at(r, c).abs());
                }
            }
        }
    }
    Ok(CRResidualReport {
        res_t1,
        res_y1,
        res_t2,
        res_y2,
        max_t1: maxima[0],
        max_y1: maxima[1],
        max_t2: maxima[2],
        max_y2: maxima[3],
        border,
        flagged,
    })
}

/// The quaternion Cauchy kernel `E(s1, s2) = s1* s2* / (|s1|^2 |s2|^2)`
/// with `s1 = t1 + i y1`, `s2 = t2 + j y2`.
pub fn cauchy_kernel_eval(s1: (f64, f64), s2: (f64, f64)) -> Result<Quaternion> {
    let (t1, y1) = s1;
    let (t2, y2) = s2;
    let n1 = t1 * t1 + y1 * y1;
    let n2 = t2 * t2 + y2 * y2;
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::ZeroArgument);
    }
    // (t1 - i y1)(t2 - j y2) = t1 t2 - i y1 t2 - j t1 y2 + k y1 y2
    let s = 1.0 / (n1 * n2);
    Ok(Quaternion::new(
        t1 * t2 * s,
        -y1 * t2 * s,
        -t1 * y2 * s,
        y1 * y2 * s,
    ))
}

/// Closed-form `a + p` of the Cauchy kernel:
/// `a = -ln|s1| - ln|s2|`, `p = (v/|v|) atan2(|v|, t1 t2)` with
/// `v = (-y1 t2, -t1 y2, y1 y2)`.
pub fn cauchy_log_features(s1: (f64, f64), s2: (f64, f64)) -> Result<Quaternion> {
    let (t1, y1) = s1;
    let (t2, y2) = s2;
    let n1 = t1 * t1 + y1 * y1;
    let n2 = t2 * t2 + y2 * y2;
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::ZeroArgument);
    }
    let a = -0.5 * n1.ln() - 0.5 * n2.ln();
    let v = [-y1 * t2, -t1 * y2, y1 * y2];
    let vn = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let th = vn.atan2(t1 * t2);
    if vn == 0.0 {
        Ok(Quaternion::new(a, 0.0, 0.0, 0.0))
    } else {
        Ok(Quaternion::new(
            a,
            v[0] / vn * th,
            v[1] / vn * th,
            v[2] / vn * th,
        ))
    }
}
