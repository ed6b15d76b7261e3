use crate::error::{domain, Error, Result};
use crate::mesh::{kahan_sum, ImmersedMesh};

/// Volume-normalized `L^q` norm `((1/V) sum_i a_i |f_i|^q)^{1/q}`; `q = inf`
/// gives the maximum over vertices.
pub fn lq_norm(field: &[f64], q: f64, mesh: &ImmersedMesh) -> Result<f64> {
    if field.len() != mesh.num_vertices() {
        return Err(Error::FieldMismatch {
            expected: mesh.num_vertices(),
            found: field.len(),
        });
    }
    if q == f64::INFINITY {
        return Ok(field.iter().fold(0.0, |m, x| m.max(x.abs())));
    }
    if !(q >= 1.0) {
        return Err(domain(format!("norm exponent must be >= 1 or infinite, got {q}")));
    }
    let a = mesh.vertex_areas();
    let total = kahan_sum(field.iter().zip(a).map(|(f, w)| w * f.abs().powf(q)));
    Ok((total / mesh.area()).powf(1.0 / q))
}

/// Area-weighted mean `(1/V) sum_i a_i f_i`.
pub fn mean(field: &[f64], mesh: &ImmersedMesh) -> Result<f64> {
    if field.len() != mesh.num_vertices() {
        return Err(Error::FieldMismatch {
            expected: mesh.num_vertices(),
            found: field.len(),
        });
    }
    let a = mesh.vertex_areas();
    Ok(kahan_sum(field.iter().zip(a).map(|(f, w)| w * f)) / mesh.area())
}
