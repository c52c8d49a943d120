//! Quaternion Hardy scale-space image analysis.
//!
//! Lifts a grayscale image into the boundary sample of a quaternion Hardy
//! function via Poisson / conjugate-Poisson filtering, extracts local
//! amplitude / attenuation / phase features, and runs four feature-based
//! edge detectors (QDLA, MQDLA, SDLA, MSDLA) with non-maximum suppression
//! and hysteresis linking. A discrete two-sided quaternion Fourier
//! transform and quaternion Hilbert transforms serve as the spectral
//! verification path.

pub mod cli;
pub mod detectors;
pub mod error;
pub mod eval;
pub mod features;
pub mod field;
pub mod imgio;
pub mod quat;
pub(crate) mod parallel;
pub mod postprocess;
pub mod qft;
pub mod scale_space;

pub use error::{Error, Result};
pub use field::{QuaternionField, ScalarField};
pub use quat::Quaternion;
