//! Discrete two-sided quaternion Fourier transform and quaternion Hilbert
//! transforms.
//!
//! The forward transform applies the i-exponential on the left and the
//! j-exponential on the right:
//!
//! ```text
//!   F[g](w1, w2) = sum e^{-i w1 t1} g(t1, t2) e^{-j w2 t2}
//! ```
//!
//! `t1` runs along columns, `t2` down rows. Computation goes through the
//! i-complex split `g = g_a + g_b j` with `g_a = g0 + i g1`,
//! `g_b = g2 + i g3`; each half reduces to standard complex 2-D DFTs with
//! a mirrored-frequency recombination for the right-hand j-exponential.
//! The forward transform is an unnormalized sum; the inverse carries the
//! `1/(HW)` factor.
//!
//! Hilbert transforms are realized as frequency-domain sign multipliers
//! with `sgn(0) = 0` and Nyquist bins (even sizes) zeroed.

use crate::error::Result;
use crate::field::{QuaternionField, ScalarField};
use crate::quat::Quaternion;
use rustfft::{num_complex::Complex, FftDirection, FftPlanner};

/// Quaternion spectrum with DC shifted to the center bin
/// `(H/2, W/2)`; bin `(r, c)` holds signed frequencies
/// `(w1, w2) = (c - W/2, r - H/2)` in cycles per grid.
#[derive(Debug, Clone)]
pub struct QSpectrum {
    pub height: usize,
    pub width: usize,
    pub frequency_step: f64,
    pub data: Vec<Quaternion>,
}

impl QSpectrum {
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> Quaternion {
        self.data[row * self.width + col]
    }

    /// Signed integer frequencies `(w1, w2)` of a bin.
    pub fn signed_freq(&self, row: usize, col: usize) -> (i64, i64) {
        (
            col as i64 - (self.width / 2) as i64,
            row as i64 - (self.height / 2) as i64,
        )
    }
}

/// In-place 2-D complex DFT, rows then columns.
fn fft2(data: &mut [Complex<f64>], height: usize, width: usize, dir: FftDirection) {
    let mut planner = FftPlanner::new();
    let row_fft = planner.plan_fft(width, dir);
    for r in 0..height {
        row_fft.process(&mut data[r * width..(r + 1) * width]);
    }
    let col_fft = planner.plan_fft(height, dir);
    let mut col = vec![Complex::new(0.0, 0.0); height];
    for c in 0..width {
        for r in 0..height {
            col[r] = data[r * width + c];
        }
        col_fft.process(&mut col);
        for r in 0..height {
            data[r * width + c] = col[r];
        }
    }
}

fn split(f: &QuaternionField) -> (Vec<Complex<f64>>, Vec<Complex<f64>>) {
    let a = f.data.iter().map(|q| Complex::new(q.q0, q.q1)).collect();
    let b = f.data.iter().map(|q| Complex::new(q.q2, q.q3)).collect();
    (a, b)
}

fn join(
    a: &[Complex<f64>],
    b: &[Complex<f64>],
    height: usize,
    width: usize,
    spacing: f64,
) -> QuaternionField {
    let data = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| Quaternion::new(x.re, x.im, y.re, y.im))
        .collect();
    QuaternionField::new(height, width, spacing, data)
}

/// Signed value of a natural-order DFT index; Nyquist maps to 0 sign.
fn sgn_of_index(k: usize, n: usize) -> f64 {
    if k == 0 {
        0.0
    } else if n % 2 == 0 && k == n / 2 {
        0.0
    } else if k < n.div_ceil(2) {
        1.0
    } else {
        -1.0
    }
}

fn fftshift(data: &[Quaternion], height: usize, width: usize) -> Vec<Quaternion> {
    let mut out = vec![Quaternion::ZERO; data.len()];
    for r in 0..height {
        for c in 0..width {
            let rr = (r + height / 2) % height;
            let cc = (c + width / 2) % width;
            out[rr * width + cc] = data[r * width + c];
        }
    }
    out
}

fn ifftshift(data: &[Quaternion], height: usize, width: usize) -> Vec<Quaternion> {
    let mut out = vec![Quaternion::ZERO; data.len()];
    for r in 0..height {
        for c in 0..width {
            let rr = (r + height / 2) % height;
            let cc = (c + width / 2) % width;
            out[r * width + c] = data[rr * width + cc];
        }
    }
    out
}

/// Forward two-sided QFT.
pub fn qft2(f: &QuaternionField) -> QSpectrum {
    let (h, w) = (f.height, f.width);
    let (mut a, mut b) = split(f);
    fft2(&mut a, h, w, FftDirection::Forward);
    fft2(&mut b, h, w, FftDirection::Forward);

    // Recombine: with A the plain i-DFT of g_a,
    //   QFT[g_a]       = C_a - S_a j,  C_a = (A + A~)/2, S_a = (i/2)(A - A~),
    //   QFT[g_b j]     = S_b + C_b j,
    // where ~ mirrors the row (t2 / w2) frequency. Hence
    //   QFT[g] = (C_a + S_b) + (C_b - S_a) j.
    let mut out = vec![Quaternion::ZERO; h * w];
    let half_i = Complex::new(0.0, 0.5);
    for r in 0..h {
        let rm = (h - r) % h;
        for c in 0..w {
            let av = a[r * w + c];
            let am = a[rm * w + c];
            let bv = b[r * w + c];
            let bm = b[rm * w + c];
            let ca = (av + am) * 0.5;
            let sa = (av - am) * half_i;
            let cb = (bv + bm) * 0.5;
            let sb = (bv - bm) * half_i;
            let x = ca + sb;
            let y = cb - sa;
            out[r * w + c] = Quaternion::new(x.re, x.im, y.re, y.im);
        }
    }
    QSpectrum {
        height: h,
        width: w,
        frequency_step: 1.0 / (w as f64 * f.spacing),
        data: fftshift(&out, h, w),
    }
}

/// Inverse of [`qft2`], exact up to round-off.
pub fn iqft2(s: &QSpectrum) -> QuaternionField {
    let (h, w) = (s.height, s.width);
    let natural = ifftshift(&s.data, h, w);
    let mut a = vec![Complex::new(0.0, 0.0); h * w];
    let mut b = vec![Complex::new(0.0, 0.0); h * w];
    for r in 0..h {
        let rm = (h - r) % h;
        for c in 0..w {
            let qv = natural[r * w + c];
            let qm = natural[rm * w + c];
            let x = Complex::new(qv.q0, qv.q1);
            let xm = Complex::new(qm.q0, qm.q1);
            let y = Complex::new(qv.q2, qv.q3);
            let ym = Complex::new(qm.q2, qm.q3);
            let ca = (x + xm) * 0.5;
            let sb = (x - xm) * 0.5;
            let cb = (y + ym) * 0.5;
            let sa = (ym - y) * 0.5;
            // A = C_a - i S_a, B = C_b - i S_b
            a[r * w + c] = ca - Complex::new(0.0, 1.0) * sa;
            b[r * w + c] = cb - Complex::new(0.0, 1.0) * sb;
        }
    }
    fft2(&mut a, h, w, FftDirection::Inverse);
    fft2(&mut b, h, w, FftDirection::Inverse);
    let norm = 1.0 / (h * w) as f64;
    for v in a.iter_mut().chain(b.iter_mut()) {
        *v *= norm;
    }
    join(&a, &b, h, w, 1.0 / (s.frequency_step * w as f64))
}

fn multiplier_transform<F: Fn(usize, usize) -> Complex<f64>>(
    f: &QuaternionField,
    mult: F,
) -> QuaternionField {
    let (h, w) = (f.height, f.width);
    let (mut a, mut b) = split(f);
    fft2(&mut a, h, w, FftDirection::Forward);
    fft2(&mut b, h, w, FftDirection::Forward);
    for r in 0..h {
        for c in 0..w {
            let m = mult(r, c);
            a[r * w + c] *= m;
            b[r * w + c] *= m;
        }
    }
    fft2(&mut a, h, w, FftDirection::Inverse);
    fft2(&mut b, h, w, FftDirection::Inverse);
    let norm = 1.0 / (h * w) as f64;
    for v in a.iter_mut().chain(b.iter_mut()) {
        *v *= norm;
    }
    join(&a, &b, h, w, f.spacing)
}

/// Quaternion partial Hilbert transform along `t1` (columns).
pub fn hilbert_partial_1(f: &QuaternionField) -> QuaternionField {
    let w = f.width;
    multiplier_transform(f, |_, c| Complex::new(0.0, -sgn_of_index(c, w)))
}

/// Quaternion partial Hilbert transform along `t2` (rows).
pub fn hilbert_partial_2(f: &QuaternionField) -> QuaternionField {
    let h = f.height;
    multiplier_transform(f, |r, _| Complex::new(0.0, -sgn_of_index(r, h)))
}

/// Quaternion total Hilbert transform (composition of the two partials).
pub fn hilbert_total(f: &QuaternionField) -> QuaternionField {
    let (h, w) = (f.height, f.width);
    multiplier_transform(f, |r, c| {
        Complex::new(-sgn_of_index(c, w) * sgn_of_index(r, h), 0.0)
    })
}

/// Quaternion analytic signal
/// `g + i H1[g] + H1^{(t2)}[g] j + i H2[g] j`.
pub fn analytic_signal(f: &QuaternionField) -> QuaternionField {
    let h1 = hilbert_partial_1(f);
    let h2 = hilbert_partial_2(f);
    let ht = hilbert_total(f);
    let mut data = Vec::with_capacity(f.data.len());
    for idx in 0..f.data.len() {
        let g = f.data[idx];
        let t1 = Quaternion::I * h1.data[idx];
        let t2 = h2.data[idx] * Quaternion::J;
        let t3 = Quaternion::I * ht.data[idx] * Quaternion::J;
        data.push(g + t1 + t2 + t3);
    }
    QuaternionField::new(f.height, f.width, f.spacing, data)
}

/// Result of the one-sided-spectrum verification.
#[derive(Debug, Clone, Copy)]
pub struct OneSidedReport {
    /// Largest modulus of the analytic-signal spectrum over bins with a
    /// negative frequency in either axis (Nyquist lines excluded).
    pub max_leak: f64,
    /// Largest deviation from
    /// `F[g_q] = (1+sgn w1)(1+sgn w2) F[g]` over bins away from the DC and
    /// Nyquist lines.
    pub factor_error: f64,
}

/// Checks the spectral characterization of the analytic signal on a real
/// image.
pub fn spectrum_onesided_check(f: &ScalarField) -> Result<OneSidedReport> {
    let g = QuaternionField::from_real(f);
    let gq = analytic_signal(&g);
    let sg = qft2(&g);
    let sq = qft2(&gq);
    let (h, w) = (f.height, f.width);
    let mut max_leak = 0.0f64;
    let mut factor_error = 0.0f64;
    for r in 0..h {
        for c in 0..w {
            let (w1, w2) = sq.signed_freq(r, c);
            let ny1 = w % 2 == 0 && w1 == -((w / 2) as i64);
            let ny2 = h % 2 == 0 && w2 == -((h / 2) as i64);
            if ny1 || ny2 {
                continue;
            }
            if w1 < 0 || w2 < 0 {
                max_leak = max_leak.max(sq.at(r, c).modulus());
            }
            if w1 != 0 && w2 != 0 {
                let factor = (1.0 + w1.signum() as f64) * (1.0 + w2.signum() as f64);
                let diff = sq.at(r, c).sub(&sg.at(r, c).scale(factor));
                factor_error = factor_error.max(diff.modulus());
            }
        }
    }
    Ok(OneSidedReport {
        max_leak,
        factor_error,
    })
}
