use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::Serialize;

use super::bvh::TriangleTree;
use super::hausdorff::fibonacci_directions;
use super::project::NormalChart;
use crate::error::{domain, Result};
use crate::mesh::ImmersedMesh;
use crate::spaceform::AmbientPoint;

type V3 = Vector3<f64>;

#[derive(Debug, Clone, Serialize)]
pub struct DegreeReport {
    pub degree: i64,
    /// Signed covered area divided by the area of the sphere, unrounded.
    pub covering: f64,
    pub flipped_faces: usize,
}

/// Signed solid angle of the spherical triangle `(a, b, c)` of unit vectors
/// (Van Oosterom and Strackee).
pub fn solid_angle(a: &V3, b: &V3, c: &V3) -> f64 {
    let num = a.dot(&b.cross(c));
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den)
}

fn unit_directions(image: &ImmersedMesh, p: &AmbientPoint) -> Result<Vec<V3>> {
    let chart = NormalChart::new(image.space(), p);
    image
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            chart
                .direction(v.coords())
                .map(|(u, _)| u)
                .ok_or_else(|| domain(format!("image vertex {i} sits at the base point or its antipode")))
        })
        .collect()
}

/// Degree of the image about `p` from signed solid angles, and the number of
/// faces whose orientation disagrees with the majority.
pub fn degree_and_orientation(image: &ImmersedMesh, p: &AmbientPoint) -> Result<DegreeReport> {
    let dirs = unit_directions(image, p)?;
    let angles: Vec<f64> = image
        .faces()
        .iter()
        .map(|f| solid_angle(&dirs[f[0]], &dirs[f[1]], &dirs[f[2]]))
        .collect();
    let covering = crate::mesh::kahan_sum(angles.iter().copied()) / (4.0 * PI);
    let positive = angles.iter().filter(|&&w| w > 0.0).count();
    let negative = angles.iter().filter(|&&w| w < 0.0).count();
    let flipped_faces = if covering >= 0.0 { negative } else { positive };
    Ok(DegreeReport {
        degree: covering.round() as i64,
        covering,
        flipped_faces,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverageReport {
    pub probes: usize,
    /// Probes not covered by any image face.
    pub uncovered: usize,
    /// Probes covered by more than one image face.
    pub multiply_covered: usize,
}

impl CoverageReport {
    pub fn injective(&self) -> bool {
        self.uncovered == 0 && self.multiply_covered == 0
    }
}

/// Counts, for `probes` Fibonacci directions, how many image faces contain
/// each one. An embedded image covers every direction exactly once.
pub fn coverage_check(image: &ImmersedMesh, p: &AmbientPoint, probes: usize) -> Result<CoverageReport> {
    let dirs = unit_directions(image, p)?;
    let tris: Vec<[V3; 3]> = image
        .faces()
        .iter()
        .map(|f| [dirs[f[0]], dirs[f[1]], dirs[f[2]]])
        .collect();
    let margin = tris
        .iter()
        .flat_map(|t| [(t[0] - t[1]).norm(), (t[1] - t[2]).norm(), (t[2] - t[0]).norm()])
        .fold(0.0f64, f64::max);
    let tree = TriangleTree::new(tris);
    let (mut uncovered, mut multiply_covered) = (0, 0);
    for d in fibonacci_directions(probes) {
        let cand = tree.candidates(&d, margin);
        let loose = cand.iter().filter(|&&t| contains(tree.triangle(t), &d, -EDGE_TOL)).count();
        let strict = cand.iter().filter(|&&t| contains(tree.triangle(t), &d, EDGE_TOL)).count();
        if loose == 0 {
            uncovered += 1;
        } else if strict > 1 {
            multiply_covered += 1;
        }
    }
    Ok(CoverageReport {
        probes,
        uncovered,
        multiply_covered,
    })
}

/// Probes this close to an edge count as inside for coverage and outside
/// for multiplicity.
const EDGE_TOL: f64 = 1e-12;

/// Whether `d` lies in the cone over the spherical triangle `t`, for either
/// orientation of `t`, with every edge moved inward by `inset`.
fn contains(t: &[V3; 3], d: &V3, inset: f64) -> bool {
    if d.dot(&(t[0] + t[1] + t[2])) <= 0.0 {
        return false;
    }
    let s = [
        t[0].cross(&t[1]).dot(d),
        t[1].cross(&t[2]).dot(d),
        t[2].cross(&t[0]).dot(d),
    ];
    s.iter().all(|&x| x > inset) || s.iter().all(|&x| x < -inset)
}
