use serde::Serialize;

use super::center::{extrinsic_radius, ExtrinsicRadius};
use super::fields::{x_field, XField};
use crate::discrete::{lq_norm, mean, CurvatureData};
use crate::error::{domain, Result};
use crate::mesh::ImmersedMesh;
use crate::spaceform::{s_raw, AmbientPoint};

/// Dimension of the immersed hypersurface.
pub const N: f64 = 2.0;

/// Extrinsic invariants about a base point and the three pinching gaps.
#[derive(Debug, Clone)]
pub struct PinchingInvariants {
    pub p: AmbientPoint,
    pub fields: XField,
    pub j_p: f64,
    pub extrinsic: ExtrinsicRadius,
    pub lambda1: f64,
    /// `max |H|`.
    pub h_sup: f64,
    /// Area-weighted mean of `H`.
    pub h_mean: f64,
    /// `sqrt(h_sup^2 + delta)`.
    pub h: f64,
    pub eps_lambda: f64,
    pub eps_i: f64,
    pub eps_r: f64,
    pub rho_star: f64,
}

/// Scalar summary of [`PinchingInvariants`] for reports.
#[derive(Debug, Clone, Serialize)]
pub struct GapSummary {
    pub lambda1: f64,
    pub h_sup: f64,
    pub h_mean: f64,
    pub h: f64,
    pub j_p: f64,
    pub extrinsic_radius: f64,
    pub extrinsic_radius_lower_bound: f64,
    pub extrinsic_radius_certified: bool,
    pub eps_lambda: f64,
    pub eps_i: f64,
    pub eps_r: f64,
    pub rho_star: f64,
}

impl PinchingInvariants {
    pub fn summary(&self) -> GapSummary {
        GapSummary {
            lambda1: self.lambda1,
            h_sup: self.h_sup,
            h_mean: self.h_mean,
            h: self.h,
            j_p: self.j_p,
            extrinsic_radius: self.extrinsic.radius,
            extrinsic_radius_lower_bound: self.extrinsic.lower_bound,
            extrinsic_radius_certified: self.extrinsic.certified,
            eps_lambda: self.eps_lambda,
            eps_i: self.eps_i,
            eps_r: self.eps_r,
            rho_star: self.rho_star,
        }
    }
}

pub fn pinching_gaps(
    mesh: &ImmersedMesh,
    p: &AmbientPoint,
    lambda1: f64,
    curvature: &CurvatureData,
) -> Result<PinchingInvariants> {
    let space = mesh.space();
    let delta = space.delta();
    let h_sup = curvature.h.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let h_sq = h_sup * h_sup + delta;
    if !(h_sq > 0.0) {
        return Err(domain(format!(
            "|H|_inf^2 + delta = {h_sq:.6e} <= 0: the pinching quantities need |H|_inf > sqrt(-delta)"
        )));
    }
    if !(lambda1 > 0.0) {
        return Err(domain(format!("lambda1 = {lambda1} must be positive")));
    }
    let h = h_sq.sqrt();
    let fields = x_field(mesh, p)?;
    let j_p = lq_norm(&fields.x.norms(space), 2.0, mesh)?;
    let extrinsic = extrinsic_radius(mesh)?;
    let s_r = s_raw(delta, extrinsic.radius);
    Ok(PinchingInvariants {
        p: *p,
        j_p,
        lambda1,
        h_sup,
        h_mean: mean(&curvature.h, mesh)?,
        h,
        eps_lambda: N * h_sq / lambda1 - 1.0,
        eps_i: h_sq * j_p * j_p - 1.0,
        eps_r: h_sq * s_r * s_r - 1.0,
        rho_star: space.s_inverse(1.0 / h)?,
        extrinsic,
        fields,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::{build_laplacian, curvature, lambda1};
    use crate::mesh::gen_geodesic_sphere;
    use crate::spaceform::SpaceForm;

    #[test]
    fn geodesic_spheres_are_nearly_pinched() {
        for (delta, rho) in [(-1.0, 0.5), (0.0, 1.0), (1.0, 0.5)] {
            let s = SpaceForm::new(delta).unwrap();
            let m = gen_geodesic_sphere(&s, &s.origin(), rho, 3).unwrap();
            let l = lambda1(&build_laplacian(&m).unwrap()).unwrap().value;
            let c = curvature(&m).unwrap();
            let g = pinching_gaps(&m, &s.origin(), l, &c).unwrap();
            for eps in [g.eps_lambda, g.eps_i, g.eps_r] {
                assert!(eps.abs() < 0.03, "delta {delta}: {eps}");
            }
            assert!(g.eps_i <= g.eps_r + 1e-12);
            assert!((g.rho_star - rho).abs() < 0.01 * rho);
        }
    }

    #[test]
    fn hyperbolic_horosphere_like_curvature_is_rejected() {
        let s = SpaceForm::new(-1.0).unwrap();
        let m = gen_geodesic_sphere(&s, &s.origin(), 0.5, 1).unwrap();
        let mut c = curvature(&m).unwrap();
        c.h = crate::mesh::ScalarField::new(&m, vec![0.5; m.num_vertices()]).unwrap();
        assert!(pinching_gaps(&m, &s.origin(), 1.0, &c).is_err());
    }
}
