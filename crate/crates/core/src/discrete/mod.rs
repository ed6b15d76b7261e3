//! Discrete Laplacian, eigenvalues, curvature and integral norms.

pub mod curvature;
pub mod eigen;
pub mod gauss;
pub mod laplacian;
pub mod norms;
pub mod sparse;

pub use curvature::{curvature, CurvatureData};
pub use eigen::{smallest_mean_zero, EigenOptions, EigenPair};
pub use gauss::{gauss_curvature, model_corner_angles};
pub use laplacian::{build_laplacian, SpectralPair};
pub use norms::{lq_norm, mean};
pub use sparse::CsrMatrix;

use crate::error::Result;

/// Shift used for the Laplacian solve, a small fraction of the round-sphere
/// value `8 pi / V` of `lambda_1`.
pub fn laplacian_shift(spectral: &SpectralPair) -> f64 {
    let area: f64 = spectral.mass.iter().sum();
    0.01 * 8.0 * std::f64::consts::PI / area
}

/// First nonzero eigenvalue of the Laplacian with an eigenfunction.
pub fn lambda1(spectral: &SpectralPair) -> Result<EigenPair> {
    smallest_mean_zero(
        &spectral.stiffness,
        &spectral.mass,
        laplacian_shift(spectral),
        &EigenOptions::default(),
    )
}
