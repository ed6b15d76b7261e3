use super::sparse::CsrMatrix;
use crate::error::{degenerate, Result};
use crate::mesh::ImmersedMesh;

/// Cotangent stiffness matrix and lumped mass of a mesh.
#[derive(Debug, Clone)]
pub struct SpectralPair {
    /// Positive semidefinite; constants span its kernel.
    pub stiffness: CsrMatrix,
    /// Diagonal of the lumped mass matrix (the vertex areas).
    pub mass: Vec<f64>,
}

/// Cotangents of the three corner angles of a triangle with side lengths
/// `l[k]` opposite corner `k` and the given area.
pub fn corner_cotangents(l: &[f64; 3], area: f64) -> [f64; 3] {
    let sq = l.map(|x| x * x);
    [0, 1, 2].map(|k| (sq[(k + 1) % 3] + sq[(k + 2) % 3] - sq[k]) / (4.0 * area))
}

/// Intrinsic cotangent Laplacian built from geodesic edge lengths only.
pub fn build_laplacian(mesh: &ImmersedMesh) -> Result<SpectralPair> {
    let stiffness = assemble_cotan(
        mesh.num_vertices(),
        mesh.faces(),
        mesh.face_lengths(),
        mesh.face_areas(),
    )?;
    Ok(SpectralPair {
        stiffness,
        mass: mesh.vertex_areas().to_vec(),
    })
}

/// Cotangent stiffness of a triangle soup given per-face opposite-corner
/// lengths and areas. Works on open patches as well.
pub fn assemble_cotan(
    n: usize,
    faces: &[[usize; 3]],
    face_lengths: &[[f64; 3]],
    face_areas: &[f64],
) -> Result<CsrMatrix> {
    let mut entries = Vec::with_capacity(faces.len() * 12);
    for (f, face) in faces.iter().enumerate() {
        let area = face_areas[f];
        if !(area > 0.0) {
            return Err(degenerate(format!("face {f} has zero area; cotangents undefined")));
        }
        let cot = corner_cotangents(&face_lengths[f], area);
        for k in 0..3 {
            let (i, j) = (face[(k + 1) % 3], face[(k + 2) % 3]);
            let w = 0.5 * cot[k];
            entries.push((i, j, -w));
            entries.push((j, i, -w));
            entries.push((i, i, w));
            entries.push((j, j, w));
        }
    }
    Ok(CsrMatrix::from_triplets(n, entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::gen_geodesic_sphere;
    use crate::spaceform::SpaceForm;

    #[test]
    fn constants_are_in_the_kernel() {
        for delta in [-1.0, 0.0, 1.0] {
            let s = SpaceForm::new(delta).unwrap();
            let m = gen_geodesic_sphere(&s, &s.origin(), 0.8, 3).unwrap();
            let sp = build_laplacian(&m).unwrap();
            assert!(sp.stiffness.row_sums().iter().all(|r| r.abs() < 1e-10));
            assert!(sp.stiffness.asymmetry() < 1e-12);
            assert!(sp.stiffness.quad_form(&vec![1.0; m.num_vertices()]).abs() < 1e-10);
            assert_eq!(sp.mass, m.vertex_areas());
        }
    }

    #[test]
    fn flat_star_gives_the_five_point_stencil() {
        // center 0 with neighbors at (1,0), (0,1), (-1,0), (0,-1)
        let faces = [[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 1]];
        let lengths = [[2f64.sqrt(), 1.0, 1.0]; 4];
        let l = assemble_cotan(5, &faces, &lengths, &[0.5; 4]).unwrap();
        assert!((l.get(0, 0) - 4.0).abs() < 1e-14);
        for j in 1..5 {
            assert!((l.get(0, j) + 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn right_isosceles_cotangents() {
        let c = corner_cotangents(&[2f64.sqrt(), 1.0, 1.0], 0.5);
        assert!(c[0].abs() < 1e-15);
        assert!((c[1] - 1.0).abs() < 1e-15 && (c[2] - 1.0).abs() < 1e-15);
    }
}
