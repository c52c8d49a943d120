//! Hamilton quaternion arithmetic.
//!
//! Components are stored as `f64`; the edge detectors downstream depend on
//! small differences of smooth fields, so everything stays in double
//! precision.

/// One Hamilton number `q0 + i q1 + j q2 + k q3`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(q0: f64, q1: f64, q2: f64, q3: f64) -> Self {
        Quaternion { q0, q1, q2, q3 }
    }

    pub const fn real(q0: f64) -> Self {
        Quaternion::new(q0, 0.0, 0.0, 0.0)
    }

    /// Scalar part `Sc[q]`.
    pub fn scalar(&self) -> f64 {
        self.q0
    }

    /// `(Sc, Vec(i), Vec(j), Vec(k))`.
    pub fn parts(&self) -> (f64, f64, f64, f64) {
        (self.q0, self.q1, self.q2, self.q3)
    }

    /// Vector part as a quaternion with zero scalar part.
    pub fn vector(&self) -> Quaternion {
        Quaternion::new(0.0, self.q1, self.q2, self.q3)
    }

    pub fn conjugate(&self) -> Quaternion {
        Quaternion::new(self.q0, -self.q1, -self.q2, -self.q3)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.q0 * self.q0 + self.q1 * self.q1 + self.q2 * self.q2 + self.q3 * self.q3
    }

    pub fn modulus(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Multiplicative inverse `q* / |q|^2`.
    ///
    /// Returns `None` for the zero quaternion.
    pub fn inverse(&self) -> Option<Quaternion> {
        let n = self.norm_sqr();
        if n == 0.0 {
            return None;
        }
        Some(self.conjugate().scale(1.0 / n))
    }

    pub fn scale(&self, s: f64) -> Quaternion {
        Quaternion::new(self.q0 * s, self.q1 * s, self.q2 * s, self.q3 * s)
    }

    pub fn add(&self, o: &Quaternion) -> Quaternion {
        Quaternion::new(
            self.q0 + o.q0,
            self.q1 + o.q1,
            self.q2 + o.q2,
            self.q3 + o.q3,
        )
    }

    pub fn sub(&self, o: &Quaternion) -> Quaternion {
        Quaternion::new(
            self.q0 - o.q0,
            self.q1 - o.q1,
            self.q2 - o.q2,
            self.q3 - o.q3,
        )
    }

    /// Hamilton product. Non-commutative: `i j = k`, `j i = -k`.
    pub fn mul(&self, o: &Quaternion) -> Quaternion {
        let (a0, a1, a2, a3) = (self.q0, self.q1, self.q2, self.q3);
        let (b0, b1, b2, b3) = (o.q0, o.q1, o.q2, o.q3);
        Quaternion::new(
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        )
    }

    /// Exponential of a pure quaternion `v` (zero scalar part):
    /// `cos|v| + (v/|v|) sin|v|`, unit modulus always.
    ///
    /// Near the origin the first-order series `1 + v` is used so the
    /// direction `v/|v|` never divides by zero.
    pub fn exp_pure(v: &Quaternion) -> Quaternion {
        let theta = (v.q1 * v.q1 + v.q2 * v.q2 + v.q3 * v.q3).sqrt();
        if theta < 1e-12 {
            return Quaternion::new(1.0, v.q1, v.q2, v.q3);
        }
        let c = theta.cos();
        let s = theta.sin() / theta;
        Quaternion::new(c, v.q1 * s, v.q2 * s, v.q3 * s)
    }
}

impl std::ops::Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::add(&self, &o)
    }
}

impl std::ops::Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::sub(&self, &o)
    }
}

impl std::ops::Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        Quaternion::mul(&self, &o)
    }
}

impl std::ops::Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        self.scale(s)
    }
}

impl std::ops::Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        self.scale(-1.0)
    }
}
