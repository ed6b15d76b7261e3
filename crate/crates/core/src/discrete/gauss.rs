use std::f64::consts::{FRAC_PI_2, PI};

use crate::mesh::{ImmersedMesh, ScalarField};

/// Corner angles of a triangle with side lengths `l[k]` opposite corner `k`.
pub fn corner_angles(l: &[f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|k| {
        let (a, b, c) = (l[k], l[(k + 1) % 3], l[(k + 2) % 3]);
        ((b * b + c * c - a * a) / (2.0 * b * c)).clamp(-1.0, 1.0).acos()
    })
}

/// Mixed Voronoi vertex areas: circumcentric cells on non-obtuse faces,
/// half/quarter splits on obtuse ones. They partition the total area.
pub fn mixed_vertex_areas(mesh: &ImmersedMesh) -> Vec<f64> {
    let mut out = vec![0.0; mesh.num_vertices()];
    for ((face, l), &area) in mesh.faces().iter().zip(mesh.face_lengths()).zip(mesh.face_areas()) {
        let angles = corner_angles(l);
        let obtuse = angles.iter().position(|&a| a > FRAC_PI_2);
        for k in 0..3 {
            out[face[k]] += match obtuse {
                Some(o) if o == k => 0.5 * area,
                Some(_) => 0.25 * area,
                None => {
                    let (j, m) = ((k + 1) % 3, (k + 2) % 3);
                    // edges k-j and k-m are opposite corners m and j
                    (l[m] * l[m] / angles[m].tan() + l[j] * l[j] / angles[j].tan()) / 8.0
                }
            };
        }
    }
    out
}

/// Corner angles of the geodesic triangle with side lengths `l[k]` in the
/// model of curvature `delta` (spherical or hyperbolic law of cosines).
pub fn model_corner_angles(delta: f64, l: &[f64; 3]) -> [f64; 3] {
    if delta == 0.0 {
        return corner_angles(l);
    }
    let k = delta.abs().sqrt();
    let (c, s): (Vec<f64>, Vec<f64>) = if delta > 0.0 {
        l.iter().map(|x| ((k * x).cos(), (k * x).sin())).unzip()
    } else {
        l.iter().map(|x| ((k * x).cosh(), (k * x).sinh())).unzip()
    };
    [0, 1, 2].map(|a| {
        let (b, cc) = ((a + 1) % 3, (a + 2) % 3);
        let cos = if delta > 0.0 {
            (c[a] - c[b] * c[cc]) / (s[b] * s[cc])
        } else {
            (c[b] * c[cc] - c[a]) / (s[b] * s[cc])
        };
        cos.clamp(-1.0, 1.0).acos()
    })
}

/// Intrinsic Gauss curvature per vertex of the surface made of geodesic
/// triangles: `delta` plus the angle defect over the mixed Voronoi area. In
/// the flat case, integrated against `mixed_vertex_areas` it gives
/// `2 pi chi` up to rounding.
pub fn gauss_curvature(mesh: &ImmersedMesh) -> ScalarField {
    let delta = mesh.space().delta();
    let mut defect = vec![2.0 * PI; mesh.num_vertices()];
    for (face, l) in mesh.faces().iter().zip(mesh.face_lengths()) {
        let angles = model_corner_angles(delta, l);
        for k in 0..3 {
            defect[face[k]] -= angles[k];
        }
    }
    ScalarField::from_vec(
        defect
            .iter()
            .zip(mixed_vertex_areas(mesh))
            .map(|(d, a)| delta + d / a)
            .collect(),
    )
}
