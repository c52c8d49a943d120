//! Real- and quaternion-valued grids, row-major.
//!
//! Axis convention: `t1` runs along a row (column index, width), `t2` runs
//! down the columns (row index, height). A "vertical" edge therefore varies
//! along `t1`.

use crate::error::{Error, Result};
use crate::quat::Quaternion;

/// A real-valued H x W grid with a uniform grid step (pixels).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub height: usize,
    pub width: usize,
    pub spacing: f64,
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn new(height: usize, width: usize, spacing: f64, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), height * width, "data length must be H*W");
        assert!(spacing > 0.0, "spacing must be positive");
        ScalarField {
            height,
            width,
            spacing,
            data,
        }
    }

    pub fn zeros(height: usize, width: usize, spacing: f64) -> Self {
        Self::new(height, width, spacing, vec![0.0; height * width])
    }

    pub fn constant(height: usize, width: usize, spacing: f64, c: f64) -> Self {
        Self::new(height, width, spacing, vec![c; height * width])
    }

    /// Build from a function of pixel indices `(row, col)`.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(
        height: usize,
        width: usize,
        spacing: f64,
        mut f: F,
    ) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self::new(height, width, spacing, data)
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.data[row * self.width + col] = v;
    }

    pub fn same_shape(&self, other: &ScalarField) -> Result<()> {
        if self.height != other.height || self.width != other.width {
            return Err(Error::DimensionMismatch(
                self.height,
                self.width,
                other.height,
                other.width,
            ));
        }
        Ok(())
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> ScalarField {
        ScalarField {
            height: self.height,
            width: self.width,
            spacing: self.spacing,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &ScalarField, f: F) -> ScalarField {
        debug_assert_eq!(self.data.len(), other.data.len());
        ScalarField {
            height: self.height,
            width: self.width,
            spacing: self.spacing,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// Max abs over pixels at least `border` pixels away from every edge.
    pub fn interior_max_abs(&self, border: usize) -> f64 {
        let mut m = 0.0f64;
        if 2 * border >= self.height || 2 * border >= self.width {
            return 0.0;
        }
        for r in border..self.height - border {
            for c in border..self.width - border {
                m = m.max(self.at(r, c).abs());
            }
        }
        m
    }

    /// Central difference along t1 (columns), one-sided at the borders.
    pub fn diff_t1(&self) -> ScalarField {
        let h = self.spacing;
        let mut out = ScalarField::zeros(self.height, self.width, self.spacing);
        for r in 0..self.height {
            for c in 0..self.width {
                let v = if self.width == 1 {
                    0.0
                } else if c == 0 {
                    (self.at(r, 1) - self.at(r, 0)) / h
                } else if c == self.width - 1 {
                    (self.at(r, c) - self.at(r, c - 1)) / h
                } else {
                    (self.at(r, c + 1) - self.at(r, c - 1)) / (2.0 * h)
                };
                out.set(r, c, v);
            }
        }
        out
    }

    /// Central difference along t2 (rows), one-sided at the borders.
    pub fn diff_t2(&self) -> ScalarField {
        let h = self.spacing;
        let mut out = ScalarField::zeros(self.height, self.width, self.spacing);
        for r in 0..self.height {
            for c in 0..self.width {
                let v = if self.height == 1 {
                    0.0
                } else if r == 0 {
                    (self.at(1, c) - self.at(0, c)) / h
                } else if r == self.height - 1 {
                    (self.at(r, c) - self.at(r - 1, c)) / h
                } else {
                    (self.at(r + 1, c) - self.at(r - 1, c)) / (2.0 * h)
                };
                out.set(r, c, v);
            }
        }
        out
    }
}

/// A quaternion-valued H x W grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuaternionField {
    pub height: usize,
    pub width: usize,
    pub spacing: f64,
    pub data: Vec<Quaternion>,
}

impl QuaternionField {
    pub fn new(height: usize, width: usize, spacing: f64, data: Vec<Quaternion>) -> Self {
        assert_eq!(data.len(), height * width);
        QuaternionField {
            height,
            width,
            spacing,
            data,
        }
    }

    pub fn zeros(height: usize, width: usize, spacing: f64) -> Self {
        Self::new(height, width, spacing, vec![Quaternion::ZERO; height * width])
    }

    pub fn from_real(f: &ScalarField) -> Self {
        Self::new(
            f.height,
            f.width,
            f.spacing,
            f.data.iter().map(|&v| Quaternion::real(v)).collect(),
        )
    }

    pub fn from_components(
        q0: &ScalarField,
        q1: &ScalarField,
        q2: &ScalarField,
        q3: &ScalarField,
    ) -> Self {
        let data = (0..q0.data.len())
            .map(|i| Quaternion::new(q0.data[i], q1.data[i], q2.data[i], q3.data[i]))
            .collect();
        Self::new(q0.height, q0.width, q0.spacing, data)
    }

    pub fn component(&self, k: usize) -> ScalarField {
        ScalarField::new(
            self.height,
            self.width,
            self.spacing,
            self.data
                .iter()
                .map(|q| match k {
                    0 => q.q0,
                    1 => q.q1,
                    2 => q.q2,
                    _ => q.q3,
                })
                .collect(),
        )
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> Quaternion {
        self.data[row * self.width + col]
    }

    pub fn map<F: Fn(&Quaternion) -> Quaternion>(&self, f: F) -> QuaternionField {
        QuaternionField {
            height: self.height,
            width: self.width,
            spacing: self.spacing,
            data: self.data.iter().map(|q| f(q)).collect(),
        }
    }

    pub fn zip_map<F: Fn(&Quaternion, &Quaternion) -> Quaternion>(
        &self,
        other: &QuaternionField,
        f: F,
    ) -> QuaternionField {
        debug_assert_eq!(self.data.len(), other.data.len());
        QuaternionField {
            height: self.height,
            width: self.width,
            spacing: self.spacing,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn max_modulus(&self) -> f64 {
        self.data.iter().fold(0.0, |m, q| m.max(q.modulus()))
    }
}
