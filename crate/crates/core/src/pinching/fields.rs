use crate::discrete::lq_norm;
use crate::error::{degenerate, domain, Result};
use crate::mesh::{ImmersedMesh, ScalarField, VectorField};
use crate::spaceform::{s_raw, AmbientPoint, Vec4};

/// The radial field `X = s_delta(r) grad r` about a base point, with its
/// tangential part.
#[derive(Debug, Clone)]
pub struct XField {
    /// Geodesic distance to the base point.
    pub r: ScalarField,
    pub x: VectorField,
    /// `X - <X, nu> nu`.
    pub x_t: VectorField,
}

pub fn x_field(mesh: &ImmersedMesh, p: &AmbientPoint) -> Result<XField> {
    let space = mesh.space();
    let n = mesh.num_vertices();
    let mut r = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n);
    let mut x_t = Vec::with_capacity(n);
    let mut logs = Vec::with_capacity(n);
    for i in 0..n {
        let (v, d) = space.log_unchecked(mesh.vertex(i), p.coords()).ok_or_else(|| {
            domain(format!("vertex {i} is antipodal to the base point"))
        })?;
        if d >= space.injectivity_radius() * (1.0 - 1e-9) {
            return Err(domain(format!(
                "vertex {i} at distance {d} reaches the injectivity radius"
            )));
        }
        logs.push(v);
        r.push(d);
    }
    let diam = 2.0 * r.iter().fold(0.0f64, |m, &d| m.max(d));
    for (i, (v, &d)) in logs.iter().zip(&r).enumerate() {
        if !(d > 1e-10 * diam) {
            return Err(degenerate(format!("vertex {i} coincides with the base point")));
        }
        let xi: Vec4 = -v * (s_raw(space.delta(), d) / d);
        let nu = &mesh.normals()[i];
        x_t.push(xi - nu * space.inner(&xi, nu));
        x.push(xi);
    }
    Ok(XField {
        r: ScalarField::new(mesh, r)?,
        x: VectorField::new(mesh, x)?,
        x_t: VectorField::new(mesh, x_t)?,
    })
}

/// `J_p(M) = |X|_2`.
pub fn moment_of_inertia(mesh: &ImmersedMesh, p: &AmbientPoint) -> Result<f64> {
    let f = x_field(mesh, p)?;
    lq_norm(&f.x.norms(mesh.space()), 2.0, mesh)
}
