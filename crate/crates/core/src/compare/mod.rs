//! Comparison of a surface with the geodesic sphere `S(p, rho_star)`: radial
//! projection, Hausdorff distance, distortion, degree.

pub mod bvh;
pub mod degree;
pub mod distortion;
pub mod hausdorff;
pub mod project;

pub use degree::{coverage_check, degree_and_orientation, solid_angle, CoverageReport, DegreeReport};
pub use distortion::{sandwich_check, qi_distortion, Distortion, SandwichReport, SANDWICH_TOL};
pub use hausdorff::{fibonacci_directions, hausdorff_to_sphere, HausdorffEstimate};
pub use project::{project_f, NormalChart};

use serde::Serialize;

use crate::error::Result;
use crate::mesh::ImmersedMesh;
use crate::spaceform::AmbientPoint;

pub const DEFAULT_SAMPLES: usize = 10_000;
pub const COVERAGE_PROBES: usize = 10_000;

#[derive(Debug, Clone, Serialize)]
pub struct SphereComparison {
    pub p: AmbientPoint,
    pub rho_star: f64,
    pub hausdorff: HausdorffEstimate,
    pub distortion: Distortion,
    pub degree: DegreeReport,
    pub coverage: CoverageReport,
    /// Degree +-1, no flipped faces and every probe direction covered once.
    /// A numerical verdict, not a proof of embeddedness.
    pub diffeo_verdict: bool,
    pub sandwich: SandwichReport,
    /// The ball hypothesis `phi(M) in B(p, s_delta^{-1}(sqrt(eps / (delta - mu))))`
    /// has no content when `mu = delta`.
    pub ball_hypothesis: String,
}

/// Full comparison of `mesh` with `S(p, rho_star)` through the radial projection.
pub fn compare_to_sphere(
    mesh: &ImmersedMesh,
    p: &AmbientPoint,
    rho_star: f64,
    mu: f64,
    samples: usize,
) -> Result<SphereComparison> {
    let image = project_f(mesh, p, rho_star)?;
    let hausdorff = hausdorff_to_sphere(mesh, p, rho_star, samples)?;
    let distortion = qi_distortion(mesh, &image)?;
    let degree = degree_and_orientation(&image, p)?;
    let coverage = coverage_check(&image, p, COVERAGE_PROBES)?;
    let sandwich = sandwich_check(mesh, &image, p, rho_star, mu)?;
    let diffeo_verdict = degree.degree.abs() == 1 && degree.flipped_faces == 0 && coverage.injective();
    let ball_hypothesis = if mu == mesh.space().delta() {
        "vacuously satisfied (mu=delta)".to_string()
    } else {
        "not checked (mu<delta has no model realization)".to_string()
    };
    Ok(SphereComparison {
        p: *p,
        rho_star,
        hausdorff,
        distortion,
        degree,
        coverage,
        diffeo_verdict,
        sandwich,
        ball_hypothesis,
    })
}
