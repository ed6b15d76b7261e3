use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::mesh::ImmersedMesh;
use crate::spaceform::s_raw;

#[derive(Debug, Clone, Serialize)]
pub struct Distortion {
    /// `max |(l_F / l)^2 - 1|` over edges.
    pub distortion: f64,
    /// `(l_F / l)^2` per edge, in the order of `mesh.edges()`.
    #[serde(skip)]
    pub edge_ratio_sq: Vec<f64>,
    /// `max |sigma_i^2 - 1|` of the per-face affine differential.
    pub face_distortion: f64,
}

fn check_same_connectivity(mesh: &ImmersedMesh, image: &ImmersedMesh) -> Result<()> {
    if mesh.num_vertices() != image.num_vertices() || mesh.faces() != image.faces() {
        return Err(Error::InvalidMesh(
            "source and image meshes have different connectivity".into(),
        ));
    }
    Ok(())
}

/// Triangle with the given opposite-corner lengths laid out in the plane;
/// columns are corners 1 and 2 relative to corner 0.
fn layout(l: &[f64; 3]) -> Matrix2<f64> {
    let x = (l[1] * l[1] + l[2] * l[2] - l[0] * l[0]) / (2.0 * l[2]);
    let y = (l[1] * l[1] - x * x).max(0.0).sqrt();
    Matrix2::from_columns(&[Vector2::new(l[2], 0.0), Vector2::new(x, y)])
}

/// Edge-based quasi-isometry distortion of the vertex map `mesh -> image`,
/// with the per-face singular-value version as a cross-check.
pub fn qi_distortion(mesh: &ImmersedMesh, image: &ImmersedMesh) -> Result<Distortion> {
    check_same_connectivity(mesh, image)?;
    let edge_ratio_sq: Vec<f64> = mesh
        .edge_lengths()
        .iter()
        .zip(image.edge_lengths())
        .map(|(l, lf)| (lf / l).powi(2))
        .collect();
    let distortion = edge_ratio_sq.iter().fold(0.0f64, |m, r| m.max((r - 1.0).abs()));

    let mut face_distortion = 0.0f64;
    for (ls, li) in mesh.face_lengths().iter().zip(image.face_lengths()) {
        let src = layout(ls);
        let inv = src
            .try_inverse()
            .ok_or_else(|| domain("degenerate source face"))?;
        let a = layout(li) * inv;
        for s in a.singular_values().iter() {
            face_distortion = face_distortion.max((s * s - 1.0).abs());
        }
    }
    Ok(Distortion {
        distortion,
        edge_ratio_sq,
        face_distortion,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub mu: f64,
    /// `min (|dF u|^2 / lower - 1)` over face edges.
    pub lower_slack: f64,
    /// `min (1 - |dF u|^2 / upper)` over face edges.
    pub upper_slack: f64,
    #[serde(skip)]
    pub face_slack: Vec<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

pub const SANDWICH_TOL: f64 = 0.05;

/// Checks `|v|^2 / (h s_mu(r))^2 <= |dF u|^2 <= s_mu(rho*)^2 |v|^2 / s_delta(r)^2`
/// along the three edges of every face, with `h = 1 / s_delta(rho*)`.
///
/// `|dF u|^2` is the squared edge-length ratio; `<u, grad r>` is the edge
/// derivative of the piecewise-linear distance, so `|v|^2 = 1 - <u, grad r>^2`,
/// and `r` is the mean of the endpoint distances.
pub fn sandwich_check(
    mesh: &ImmersedMesh,
    image: &ImmersedMesh,
    p: &crate::spaceform::AmbientPoint,
    rho_star: f64,
    mu: f64,
) -> Result<SandwichReport> {
    check_same_connectivity(mesh, image)?;
    let space = mesh.space();
    let delta = space.delta();
    if !(mu <= delta) {
        return Err(domain(format!("lower curvature bound mu = {mu} exceeds delta = {delta}")));
    }
    let h = 1.0 / s_raw(delta, rho_star);
    let s_mu_star = s_raw(mu, rho_star);
    let r: Vec<f64> = mesh.vertices().iter().map(|v| space.dist(p, v)).collect();

    let mut face_slack = Vec::with_capacity(mesh.faces().len());
    let (mut lower_slack, mut upper_slack) = (f64::INFINITY, f64::INFINITY);
    for (f, ls) in mesh.faces().iter().zip(mesh.face_lengths()) {
        let li = &image.face_lengths()[face_slack.len()];
        let mut worst = f64::INFINITY;
        for k in 0..3 {
            let (i, j) = (f[(k + 1) % 3], f[(k + 2) % 3]);
            let du = (r[j] - r[i]) / ls[k];
            let v_sq = (1.0 - du * du).max(0.0);
            let rm = 0.5 * (r[i] + r[j]);
            let measured = (li[k] / ls[k]).powi(2);
            let lower = v_sq / (h * s_raw(mu, rm)).powi(2);
            let upper = s_mu_star * s_mu_star * v_sq / s_raw(delta, rm).powi(2);
            let lo = measured / lower - 1.0;
            let up = 1.0 - measured / upper;
            lower_slack = lower_slack.min(lo);
            upper_slack = upper_slack.min(up);
            worst = worst.min(lo.min(up));
        }
        face_slack.push(worst);
    }
    Ok(SandwichReport {
        mu,
        lower_slack,
        upper_slack,
        face_slack,
        tolerance: SANDWICH_TOL,
        pass: lower_slack >= -SANDWICH_TOL && upper_slack >= -SANDWICH_TOL,
    })
}
