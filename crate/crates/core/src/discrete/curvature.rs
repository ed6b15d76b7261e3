//! Second fundamental form by per-vertex quadric fits in normal coordinates.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};

use crate::error::{degenerate, Result};
use crate::mesh::{ImmersedMesh, ScalarField};
use crate::spaceform::{SpaceForm, Vec4};

/// Per-vertex extrinsic curvature. `b[i]` is the second fundamental form in
/// an orthonormal basis of the tangent plane at vertex `i`, signed so that
/// geodesic spheres with outward normal have positive mean curvature.
#[derive(Debug, Clone)]
pub struct CurvatureData {
    pub h: ScalarField,
    pub b: Vec<Matrix2<f64>>,
    pub b_norm: ScalarField,
    /// Trace-free part `B - H g`.
    pub tau: Vec<Matrix2<f64>>,
    pub tau_norm: ScalarField,
    /// Principal curvatures, ascending.
    pub principal: Vec<[f64; 2]>,
}

impl CurvatureData {
    fn from_forms(b: Vec<Matrix2<f64>>) -> Self {
        let h: Vec<f64> = b.iter().map(|m| 0.5 * m.trace()).collect();
        let tau: Vec<Matrix2<f64>> = b
            .iter()
            .zip(&h)
            .map(|(m, &hi)| m - Matrix2::identity() * hi)
            .collect();
        let principal = b
            .iter()
            .map(|m| {
                let e = SymmetricEigen::new(*m).eigenvalues;
                [e[0].min(e[1]), e[0].max(e[1])]
            })
            .collect();
        Self {
            b_norm: ScalarField::from_vec(b.iter().map(|m| m.norm()).collect()),
            tau_norm: ScalarField::from_vec(tau.iter().map(|m| m.norm()).collect()),
            h: ScalarField::from_vec(h),
            b,
            tau,
            principal,
        }
    }

    /// Copy with `H` replaced by one mass-weighted averaging pass over each
    /// one-ring (and `B` shifted by the same change in `H`).
    pub fn smoothed(&self, mesh: &ImmersedMesh) -> Self {
        let a = mesh.vertex_areas();
        let b = (0..mesh.num_vertices())
            .map(|i| {
                let (mut num, mut den) = (a[i] * self.h[i], a[i]);
                for &j in mesh.neighbors(i) {
                    num += a[j] * self.h[j];
                    den += a[j];
                }
                self.b[i] + Matrix2::identity() * (num / den - self.h[i])
            })
            .collect();
        Self::from_forms(b)
    }
}

/// Orthonormal tangent basis `(e1, e2)` of the surface at `x` with
/// `(e1, e2, nu)` positively oriented.
pub(crate) fn surface_frame(space: &SpaceForm, x: &Vec4, frame: &[Vec4; 3], nu: &Vec4) -> [Vec4; 2] {
    let pick = frame
        .iter()
        .min_by(|a, b| space.inner(a, nu).abs().total_cmp(&space.inner(b, nu).abs()))
        .expect("three frame vectors");
    let e1 = pick - nu * space.inner(pick, nu);
    let e1 = e1 / space.norm(&e1);
    let e2 = space.cross_in_tangent(x, nu, &e1);
    [e1, e2]
}

/// Fits `w = A u^2 + B uv + C v^2 + D u + E v + G w^2` to points given in
/// surface-frame coordinates and returns the second fundamental form at the
/// origin in an orthonormal basis. The `w^2` column makes round spheres exact.
pub fn fit_second_fundamental_form(points: &[[f64; 3]]) -> Result<Matrix2<f64>> {
    if points.len() < 6 {
        return Err(degenerate(format!(
            "quadric fit needs at least 6 stencil points, got {}",
            points.len()
        )));
    }
    let scale = points
        .iter()
        .map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt())
        .fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Err(degenerate("stencil points coincide with the vertex"));
    }
    let scaled: Vec<[f64; 3]> = points.iter().map(|p| p.map(|x| x / scale)).collect();
    let w_sq_norm = scaled.iter().map(|p| p[2].powi(4)).sum::<f64>().sqrt();
    let cols = if w_sq_norm > 1e-8 { 6 } else { 5 };
    let design = DMatrix::from_fn(scaled.len(), cols, |r, k| {
        let [u, v, w] = scaled[r];
        [u * u, u * v, v * v, u, v, w * w][k]
    });
    let rhs = DVector::from_iterator(scaled.len(), scaled.iter().map(|p| p[2]));
    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-10 * smax) {
        return Err(degenerate(format!(
            "rank-deficient curvature stencil (condition {:.3e})",
            smax / smin
        )));
    }
    let c = svd
        .solve(&rhs, 0.0)
        .map_err(|e| degenerate(format!("least squares failed: {e}")))?;
    let g_coef = if cols == 6 { c[5] } else { 0.0 };
    // undo the coordinate scaling: quadratic coefficients carry 1/scale
    let (a, b, cc, d, e, g) = (c[0] / scale, c[1] / scale, c[2] / scale, c[3], c[4], g_coef / scale);
    let a = a + g * d * d;
    let b = b + 2.0 * g * d * e;
    let cc = cc + g * e * e;
    let first = Matrix2::new(1.0 + d * d, d * e, d * e, 1.0 + e * e);
    let second = Matrix2::new(2.0 * a, b, b, 2.0 * cc) / (1.0 + d * d + e * e).sqrt();
    // outward normal: a sphere bends away from nu, so flip the sign
    let form = -second;
    let eig = SymmetricEigen::new(first);
    let inv_sqrt = eig.eigenvectors
        * Matrix2::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()))
        * eig.eigenvectors.transpose();
    let on = inv_sqrt * form * inv_sqrt;
    Ok(0.5 * (on + on.transpose()))
}

/// Quadric-fit curvature at every vertex using its two-ring.
pub fn curvature(mesh: &ImmersedMesh) -> Result<CurvatureData> {
    let space = mesh.space();
    let mut forms = Vec::with_capacity(mesh.num_vertices());
    for i in 0..mesh.num_vertices() {
        if mesh.neighbors(i).len() < 3 {
            return Err(degenerate(format!(
                "vertex {i} has valence {} < 3",
                mesh.neighbors(i).len()
            )));
        }
        let x = mesh.vertex(i);
        let nu = mesh.normals()[i];
        let frame = space.frame_at(&mesh.vertices()[i]);
        let [e1, e2] = surface_frame(space, x, &frame, &nu);
        let mut pts = Vec::new();
        for j in mesh.two_ring(i) {
            let (y, _) = space
                .log_unchecked(x, mesh.vertex(j))
                .ok_or_else(|| degenerate(format!("vertices {i} and {j} are antipodal")))?;
            pts.push([space.inner(&y, &e1), space.inner(&y, &e2), space.inner(&y, &nu)]);
        }
        let form = fit_second_fundamental_form(&pts)
            .map_err(|e| degenerate(format!("vertex {i}: {e}")))?;
        forms.push(form);
    }
    Ok(CurvatureData::from_forms(forms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{gen_geodesic_sphere, gen_torus};

    #[test]
    fn unit_sphere_mean_curvature() {
        let e = SpaceForm::euclidean();
        let m = gen_geodesic_sphere(&e, &e.origin(), 1.0, 4).unwrap();
        let c = curvature(&m).unwrap();
        for i in 0..m.num_vertices() {
            assert!((c.h[i] - 1.0).abs() < 1e-2, "H[{i}] = {}", c.h[i]);
            assert!((c.b[i].trace() - 2.0 * c.h[i]).abs() < 1e-10);
            assert!(c.tau[i].trace().abs() < 1e-10);
            let lhs = c.b_norm[i].powi(2);
            let rhs = c.tau_norm[i].powi(2) + 2.0 * c.h[i] * c.h[i];
            assert!((lhs - rhs).abs() < 1e-10 * lhs);
        }
    }

    #[test]
    fn spherical_model_geodesic_sphere() {
        let s = SpaceForm::new(1.0).unwrap();
        let m = gen_geodesic_sphere(&s, &s.origin(), 0.5, 4).unwrap();
        let c = curvature(&m).unwrap();
        let expect = 1.0 / 0.5f64.tan();
        for i in 0..m.num_vertices() {
            assert!((c.h[i] - expect).abs() < 1e-2 * expect);
            assert!(c.tau_norm[i] <= 0.02 * c.h[i]);
        }
    }

    #[test]
    fn torus_outer_equator() {
        let e = SpaceForm::euclidean();
        let t = gen_torus(&e, 2.0, 0.5, 24).unwrap();
        let c = curvature(&t).unwrap();
        // vertex (i=0, j=0) sits on the outer equator
        let [k_small, k_big] = c.principal[0];
        assert!((k_big - 2.0).abs() < 0.02 * 2.0, "{k_big}");
        assert!((k_small - 1.0 / 2.5).abs() < 0.02, "{k_small}");
    }

    #[test]
    fn too_few_points_is_degenerate() {
        assert!(fit_second_fundamental_form(&[[1.0, 0.0, 0.0]; 5]).is_err());
        let collinear: Vec<[f64; 3]> = (1..10).map(|k| [k as f64, 0.0, 0.0]).collect();
        assert!(fit_second_fundamental_form(&collinear).is_err());
    }
}
