use nalgebra::Vector3;
use serde::Serialize;

use super::bvh::{closest_point_on_triangle, TriangleTree};
use super::project::NormalChart;
use crate::error::{domain, Result};
use crate::mesh::ImmersedMesh;
use crate::spaceform::{AmbientPoint, SpaceForm, Vec4};

/// `n` nearly uniform unit vectors on a Fibonacci spiral.
pub fn fibonacci_directions(n: usize) -> Vec<Vector3<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            Vector3::new(rho * phi.cos(), rho * phi.sin(), z)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct HausdorffEstimate {
    pub d_h: f64,
    /// `max |r - rho_star|` over vertices, edge midpoints and face centroids.
    pub mesh_to_sphere: f64,
    /// `max` over sphere samples of the distance to the mesh.
    pub sphere_to_mesh: f64,
    pub resolution_bound: f64,
    pub samples: usize,
}

/// Point on the model along the ray of an ambient combination of vertices.
pub(crate) fn onto_model(space: &SpaceForm, c: Vec4) -> Result<AmbientPoint> {
    if space.delta() < 0.0 {
        let q = -space.inner(&c, &c);
        if !(q > 0.0) {
            return Err(domain("chordal point is not timelike"));
        }
        return space.point(c / ((-space.delta()) * q).sqrt());
    }
    space.point(c)
}

/// Two-sided Hausdorff distance between the mesh and `S(p, rho_star)`.
pub fn hausdorff_to_sphere(
    mesh: &ImmersedMesh,
    p: &AmbientPoint,
    rho_star: f64,
    samples: usize,
) -> Result<HausdorffEstimate> {
    if samples < 1000 {
        return Err(domain(format!("need at least 1000 sphere samples, got {samples}")));
    }
    let space = mesh.space();
    let chart = NormalChart::new(space, p);
    let r_of = |x: &Vec4| space.dist_unchecked(p.coords(), x);

    // side 1: the distance to a metric sphere is |r - rho_star| exactly
    let mut side1 = 0.0f64;
    for v in mesh.vertices() {
        side1 = side1.max((space.dist(p, v) - rho_star).abs());
    }
    for e in mesh.edges() {
        let mid = onto_model(space, (mesh.vertex(e[0]) + mesh.vertex(e[1])) * 0.5)?;
        side1 = side1.max((r_of(mid.coords()) - rho_star).abs());
    }
    for f in mesh.faces() {
        let c = onto_model(space, (mesh.vertex(f[0]) + mesh.vertex(f[1]) + mesh.vertex(f[2])) / 3.0)?;
        side1 = side1.max((r_of(c.coords()) - rho_star).abs());
    }

    // side 2: nearest face in normal coordinates, then the distance
    // re-measured in normal coordinates about the sample itself
    let chart_pts: Vec<Vector3<f64>> = mesh
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            chart
                .coords(v.coords())
                .ok_or_else(|| domain(format!("vertex {i} is antipodal to the base point")))
        })
        .collect::<Result<_>>()?;
    let tree = TriangleTree::new(
        mesh.faces()
            .iter()
            .map(|f| [chart_pts[f[0]], chart_pts[f[1]], chart_pts[f[2]]])
            .collect(),
    );
    let dirs = fibonacci_directions(samples);
    let mut side2 = 0.0f64;
    for u in &dirs {
        let y = chart.point(&(u * rho_star))?;
        let (f, _) = tree.nearest(&(u * rho_star)).expect("mesh has faces");
        let mut best = f64::INFINITY;
        let frame = space.frame_at(&y);
        let mut candidates: Vec<usize> = mesh.faces()[f]
            .iter()
            .flat_map(|&v| mesh.vertex_faces(v).iter().copied())
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        for g in candidates {
            let tri = mesh.faces()[g].map(|v| {
                let (l, _) = space
                    .log_unchecked(y.coords(), mesh.vertex(v))
                    .expect("mesh vertex antipodal to a sample");
                space.to_frame(&frame, &l)
            });
            best = best.min(closest_point_on_triangle(&Vector3::zeros(), &tri).norm());
        }
        side2 = side2.max(best);
    }

    // largest nearest-neighbor spacing of the samples, measured on the sphere
    let spacing = max_nearest_spacing(space, &dirs, rho_star);
    let resolution_bound = spacing + mesh.max_edge_length();
    Ok(HausdorffEstimate {
        d_h: side1.max(side2),
        mesh_to_sphere: side1,
        sphere_to_mesh: side2,
        resolution_bound,
        samples,
    })
}

fn max_nearest_spacing(space: &SpaceForm, dirs: &[Vector3<f64>], rho_star: f64) -> f64 {
    // points are sorted by z; neighbors lie within a few hundred indices
    let n = dirs.len();
    let window = ((n as f64).sqrt() as usize * 4).max(16);
    let radius = crate::spaceform::s_raw(space.delta(), rho_star);
    let mut worst = 0.0f64;
    for i in 0..n {
        let lo = i.saturating_sub(window);
        let hi = (i + window).min(n - 1);
        let mut best = f64::INFINITY;
        for j in lo..=hi {
            if j != i {
                best = best.min(dirs[i].angle(&dirs[j]));
            }
        }
        worst = worst.max(best);
    }
    // angle on the unit sphere times the intrinsic radius of the sphere
    worst * radius
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::gen_geodesic_sphere;

    #[test]
    fn fibonacci_points_are_unit_and_spread() {
        let d = fibonacci_directions(2000);
        assert!(d.iter().all(|u| (u.norm() - 1.0).abs() < 1e-14));
        let mean: Vector3<f64> = d.iter().sum::<Vector3<f64>>() / 2000.0;
        assert!(mean.norm() < 1e-3);
    }

    #[test]
    fn exact_spheres_are_close() {
        for delta in [-1.0, 0.0, 1.0] {
            let s = SpaceForm::new(delta).unwrap();
            let m = gen_geodesic_sphere(&s, &s.origin(), 0.8, 5).unwrap();
            let h = hausdorff_to_sphere(&m, &s.origin(), 0.8, 10_000).unwrap();
            assert!(h.d_h <= 1e-3 * 0.8, "delta {delta}: {h:?}");
            assert!(h.d_h <= h.resolution_bound);
        }
    }

    #[test]
    fn concentric_spheres_differ_by_the_gap() {
        let s = SpaceForm::euclidean();
        let m = gen_geodesic_sphere(&s, &s.origin(), 1.1, 4).unwrap();
        let h = hausdorff_to_sphere(&m, &s.origin(), 1.0, 2000).unwrap();
        assert!((h.d_h - 0.1).abs() <= h.resolution_bound);
        assert!((h.mesh_to_sphere - 0.1).abs() < 1e-12);
    }

    #[test]
    fn too_few_samples_is_an_error() {
        let s = SpaceForm::euclidean();
        let m = gen_geodesic_sphere(&s, &s.origin(), 1.0, 1).unwrap();
        assert!(hausdorff_to_sphere(&m, &s.origin(), 1.0, 999).is_err());
    }
}
