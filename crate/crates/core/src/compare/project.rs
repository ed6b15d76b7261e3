use nalgebra::Vector3;

use crate::error::{domain, Result};
use crate::mesh::ImmersedMesh;
use crate::spaceform::{AmbientPoint, SpaceForm, Vec4};

/// Normal coordinates about a base point: `log_p` in a fixed orthonormal
/// frame of `T_p N`.
#[derive(Debug, Clone)]
pub struct NormalChart {
    space: SpaceForm,
    p: AmbientPoint,
    frame: [Vec4; 3],
}

impl NormalChart {
    pub fn new(space: &SpaceForm, p: &AmbientPoint) -> Self {
        Self {
            space: *space,
            p: *p,
            frame: space.frame_at(p),
        }
    }

    pub fn base(&self) -> &AmbientPoint {
        &self.p
    }

    /// `log_p(x)` in frame coordinates; `None` at the antipode.
    pub fn coords(&self, x: &Vec4) -> Option<Vector3<f64>> {
        let (v, _) = self.space.log_unchecked(self.p.coords(), x)?;
        Some(self.space.to_frame(&self.frame, &v))
    }

    pub fn point(&self, c: &Vector3<f64>) -> Result<AmbientPoint> {
        let v = SpaceForm::from_frame(&self.frame, c);
        self.space.point(self.space.exp_unchecked(self.p.coords(), &v))
    }

    /// Unit direction of `log_p(x)` with the distance `d(p, x)`.
    pub fn direction(&self, x: &Vec4) -> Option<(Vector3<f64>, f64)> {
        let c = self.coords(x)?;
        let d = c.norm();
        if d == 0.0 {
            return None;
        }
        Some((c / d, d))
    }
}

/// Radial projection `x -> exp_p(rho_star log_p(x) / |log_p(x)|)` onto the
/// geodesic sphere `S(p, rho_star)`, vertex by vertex.
pub fn project_f(mesh: &ImmersedMesh, p: &AmbientPoint, rho_star: f64) -> Result<ImmersedMesh> {
    let space = mesh.space();
    if !(rho_star > 0.0) || rho_star >= space.injectivity_radius() {
        return Err(domain(format!("rho_star = {rho_star} is not a valid sphere radius")));
    }
    let diam = 2.0 * mesh.max_distance_from(p);
    let mut out = Vec::with_capacity(mesh.num_vertices());
    for (i, v) in mesh.vertices().iter().enumerate() {
        let (log, d) = space
            .log_unchecked(p.coords(), v.coords())
            .ok_or_else(|| domain(format!("vertex {i} is antipodal to the base point")))?;
        if !(d > 1e-10 * diam) {
            return Err(domain(format!("vertex {i} coincides with the base point")));
        }
        if d >= space.injectivity_radius() * (1.0 - 1e-9) {
            return Err(domain(format!("vertex {i} is within rounding of the antipode of p")));
        }
        out.push(space.point(space.exp_unchecked(p.coords(), &(log * (rho_star / d))))?);
    }
    mesh.with_vertices(out)
}
