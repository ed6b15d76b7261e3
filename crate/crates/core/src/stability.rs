//! Second variation of area under volume-preserving variations, constant
//! mean curvature residual, and almost-umbilicity measures.

use serde::Serialize;

use crate::discrete::{
    gauss_curvature, lambda1, laplacian_shift, lq_norm, mean, smallest_mean_zero, CurvatureData,
    EigenOptions, SpectralPair,
};
use crate::error::{domain, Error, Result};
use crate::mesh::{ImmersedMesh, ScalarField};

/// Surface dimension.
const N: f64 = 2.0;

/// `jacobi_index >= -STABLE_TOL * lambda_1` counts as stable.
pub const STABLE_TOL: f64 = 0.01;
/// CMC residual above which the stability verdict is not meaningful.
pub const CMC_TOL: f64 = 0.05;

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    /// Smallest eigenvalue of the Jacobi form on mean-zero functions.
    pub jacobi_index: f64,
    pub lambda1: f64,
    pub stable: bool,
    /// `Ric(nu, nu) + |B|^2 = n delta + |B|^2` per vertex.
    #[serde(skip)]
    pub potential: ScalarField,
}

/// Jacobi potential `n delta + |B|^2`.
pub fn jacobi_potential(mesh: &ImmersedMesh, curv: &CurvatureData) -> Result<ScalarField> {
    let delta = mesh.space().delta();
    ScalarField::new(mesh, curv.b_norm.iter().map(|b| N * delta + b * b).collect())
}

/// Smallest eigenvalue of `Q = K - M diag(potential)` against `M` on
/// `M`-mean-zero functions.
pub fn jacobi_index_for_potential(spectral: &SpectralPair, potential: &[f64]) -> Result<f64> {
    if potential.len() != spectral.mass.len() {
        return Err(Error::FieldMismatch {
            expected: spectral.mass.len(),
            found: potential.len(),
        });
    }
    let q = spectral.stiffness.plus_diagonal(
        &spectral
            .mass
            .iter()
            .zip(potential)
            .map(|(m, v)| -m * v)
            .collect::<Vec<_>>(),
    );
    let top = potential.iter().fold(0.0f64, |a, &v| a.max(v));
    let shift = laplacian_shift(spectral) + 1.05 * top;
    Ok(smallest_mean_zero(&q, &spectral.mass, shift, &EigenOptions::default())?.value)
}

/// Stability index with a freshly computed `lambda_1`.
pub fn jacobi_index(mesh: &ImmersedMesh, spectral: &SpectralPair, curv: &CurvatureData) -> Result<StabilityReport> {
    let l1 = lambda1(spectral)?.value;
    jacobi_index_with(mesh, spectral, curv, l1)
}

pub fn jacobi_index_with(
    mesh: &ImmersedMesh,
    spectral: &SpectralPair,
    curv: &CurvatureData,
    lambda1: f64,
) -> Result<StabilityReport> {
    let potential = jacobi_potential(mesh, curv)?;
    let index = jacobi_index_for_potential(spectral, &potential)?;
    Ok(StabilityReport {
        jacobi_index: index,
        lambda1,
        stable: index >= -STABLE_TOL * lambda1,
        potential,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CmcResidual {
    pub mean_h: f64,
    /// `|H - mean H|_inf / |mean H|`; `None` when the mean vanishes.
    pub residual: Option<f64>,
    /// Mean curvature averages to zero (minimal-surface regime).
    pub minimal_regime: bool,
    /// Residual above [`CMC_TOL`]: not CMC, stability verdict not meaningful.
    pub not_cmc: bool,
}

pub fn cmc_residual(mesh: &ImmersedMesh, curv: &CurvatureData) -> Result<CmcResidual> {
    let hbar = mean(&curv.h, mesh)?;
    let scale = lq_norm(&curv.h, f64::INFINITY, mesh)?;
    if !(hbar.abs() > 1e-9 * scale) {
        return Ok(CmcResidual {
            mean_h: hbar,
            residual: None,
            minimal_regime: true,
            not_cmc: true,
        });
    }
    let dev = curv.h.iter().fold(0.0f64, |m, h| m.max((h - hbar).abs()));
    let residual = dev / hbar.abs();
    Ok(CmcResidual {
        mean_h: hbar,
        residual: Some(residual),
        minimal_regime: false,
        not_cmc: residual > CMC_TOL,
    })
}

/// `rho_r = (1/(k V^{2/r})) (int (Ric - (n-1)k)_-^{r/2})^{2/r}`; at `n = 2` the
/// lowest Ricci eigenvalue is `K`, so the integrand is `max(k - K, 0)^{r/2}`.
pub fn aubry_rho(mesh: &ImmersedMesh, gauss_k: &[f64], k: f64, r: f64) -> Result<f64> {
    if !(r > N) {
        return Err(domain(format!("exponent r = {r} must exceed n = 2")));
    }
    if !(k > 0.0) || !k.is_finite() {
        return Err(domain(format!("k = {k} must be positive")));
    }
    if gauss_k.len() != mesh.num_vertices() {
        return Err(Error::FieldMismatch {
            expected: mesh.num_vertices(),
            found: gauss_k.len(),
        });
    }
    let a = mesh.vertex_areas();
    let integral = crate::mesh::kahan_sum(
        gauss_k
            .iter()
            .zip(a)
            .map(|(kk, w)| w * ((N - 1.0) * k - kk).max(0.0).powf(r / 2.0)),
    );
    Ok((integral / mesh.area()).powf(2.0 / r) / k)
}

#[derive(Debug, Clone, Serialize)]
pub struct UmbilicityReport {
    pub r: f64,
    /// `None` stands for `s = inf`.
    pub s: Option<f64>,
    /// `|tau|_r / |H|_r`.
    pub eps_tau: f64,
    /// `|H^2 - |H|_s^2|_{r/2} / |H|_r^2`.
    pub eps_h2: f64,
    /// `|H|_s^2 + delta`.
    pub k: f64,
    pub rho_r: f64,
    /// `|Ric - (n-1)(H^2 + delta) g|_{r/2}`, with `Ric = K g` at `n = 2`.
    pub gauss_chain_lhs: f64,
    /// `|tau|_r^2`.
    pub gauss_chain_rhs: f64,
    /// `|K - (delta + H^2 - |tau|^2/2)|_2`, angle-defect `K` against the
    /// Gauss equation evaluated from the fitted second fundamental form.
    pub gauss_equation_residual: f64,
    /// `|K|_2`.
    pub gauss_norm: f64,
}

pub fn umbilicity_conditions(mesh: &ImmersedMesh, curv: &CurvatureData, r: f64, s: f64) -> Result<UmbilicityReport> {
    if !(r > N) {
        return Err(domain(format!("exponent r = {r} must exceed n = 2")));
    }
    if !(s >= r) {
        return Err(domain(format!("exponent s = {s} must be >= r = {r} or infinite")));
    }
    let delta = mesh.space().delta();
    let h_r = lq_norm(&curv.h, r, mesh)?;
    if !(h_r > 0.0) {
        return Err(domain("mean curvature vanishes identically"));
    }
    let tau_r = lq_norm(&curv.tau_norm, r, mesh)?;
    let h_s = lq_norm(&curv.h, s, mesh)?;
    let h2_dev: Vec<f64> = curv.h.iter().map(|h| h * h - h_s * h_s).collect();
    let eps_h2 = lq_norm(&h2_dev, r / 2.0, mesh)? / (h_r * h_r);
    let k = h_s * h_s + delta;
    let gk = gauss_curvature(mesh);
    let rho_r = if k > 0.0 { aubry_rho(mesh, &gk, k, r)? } else { f64::NAN };
    let chain: Vec<f64> = gk
        .iter()
        .zip(curv.h.iter())
        .map(|(kk, h)| kk - (N - 1.0) * (h * h + delta))
        .collect();
    let gauss_eq: Vec<f64> = (0..mesh.num_vertices())
        .map(|i| {
            let (h, t) = (curv.h[i], curv.tau_norm[i]);
            gk[i] - (delta + h * h - 0.5 * t * t)
        })
        .collect();
    Ok(UmbilicityReport {
        r,
        gauss_equation_residual: lq_norm(&gauss_eq, 2.0, mesh)?,
        gauss_norm: lq_norm(&gk, 2.0, mesh)?,
        s: s.is_finite().then_some(s),
        eps_tau: tau_r / h_r,
        eps_h2,
        k,
        rho_r,
        gauss_chain_lhs: lq_norm(&chain, r / 2.0, mesh)?,
        gauss_chain_rhs: tau_r * tau_r,
    })
}
