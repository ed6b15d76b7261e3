//! Bottom of the spectrum of `K f = lambda M f` restricted to `M`-mean-zero
//! functions, by shift-invert block subspace iteration.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sparse::CsrMatrix;
use crate::error::{degenerate, Error, Result};

#[derive(Debug, Clone)]
pub struct EigenOptions {
    pub block: usize,
    /// Relative residual `|K f - lambda M f - eta M 1|_{M^-1} / (|lambda| + shift)`.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            block: 8,
            tol: 1e-10,
            max_iter: 500,
            seed: 0x5eed_1a4b,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    /// Rayleigh quotient of `vector`.
    pub value: f64,
    /// `M`-unit, `M`-orthogonal to constants.
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

fn m_dot(mass: &[f64], a: &[f64], b: &[f64]) -> f64 {
    mass.iter().zip(a).zip(b).map(|((m, x), y)| m * x * y).sum()
}

fn remove_mean(mass: &[f64], total: f64, v: &mut [f64]) {
    let c = mass.iter().zip(v.iter()).map(|(m, x)| m * x).sum::<f64>() / total;
    v.iter_mut().for_each(|x| *x -= c);
}

/// `M`-orthonormalizes the columns in place (two passes of modified
/// Gram-Schmidt). Columns that collapse are replaced by fresh random ones.
fn m_orthonormalize(cols: &mut [Vec<f64>], mass: &[f64], total: f64, rng: &mut ChaCha8Rng) {
    for j in 0..cols.len() {
        for attempt in 0..4 {
            let before = m_dot(mass, &cols[j], &cols[j]).sqrt();
            for _ in 0..2 {
                for i in 0..j {
                    let (done, rest) = cols.split_at_mut(j);
                    let c = m_dot(mass, &done[i], &rest[0]);
                    rest[0].iter_mut().zip(&done[i]).for_each(|(x, y)| *x -= c * y);
                }
            }
            let norm = m_dot(mass, &cols[j], &cols[j]).sqrt();
            if norm > 1e-10 * before && norm > 0.0 {
                cols[j].iter_mut().for_each(|x| *x /= norm);
                break;
            }
            assert!(attempt < 3, "could not extend the search block");
            cols[j] = random_column(mass.len(), mass, total, rng);
        }
    }
}

fn random_column(n: usize, mass: &[f64], total: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    remove_mean(mass, total, &mut v);
    v
}

/// Smallest eigenvalue of `(K, M)` on `{f : sum_i M_i f_i = 0}`.
///
/// `shift` must make `K + shift M` positive definite. The iteration applies
/// the exact inverse of the shifted operator restricted to mean-zero
/// functions and extracts Ritz pairs from a block of `opts.block` vectors.
pub fn smallest_mean_zero(
    k: &CsrMatrix,
    mass: &[f64],
    shift: f64,
    opts: &EigenOptions,
) -> Result<EigenPair> {
    let n = k.dim();
    if mass.len() != n {
        return Err(Error::FieldMismatch {
            expected: n,
            found: mass.len(),
        });
    }
    if n < 2 {
        return Err(degenerate("eigenproblem needs at least two unknowns"));
    }
    let total: f64 = mass.iter().sum();
    let shifted: Vec<f64> = mass.iter().map(|m| shift * m).collect();
    let llt = k
        .plus_diagonal(&shifted)
        .to_faer()
        .sp_cholesky(Side::Lower)
        .map_err(|e| degenerate(format!("shifted operator is not positive definite: {e:?}")))?;

    let solve_block = |cols: &[Vec<f64>]| -> Vec<Vec<f64>> {
        let mut rhs = Mat::<f64>::zeros(n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..n {
                rhs[(i, j)] = c[i];
            }
        }
        llt.solve_in_place(rhs.as_mut());
        (0..cols.len())
            .map(|j| (0..n).map(|i| rhs[(i, j)]).collect())
            .collect()
    };

    // g = A^{-1} M 1 carries the Lagrange multiplier of the mean constraint
    let g = solve_block(&[mass.to_vec()]).pop().expect("one column");
    let g_mass: f64 = mass.iter().zip(&g).map(|(m, x)| m * x).sum();

    let b = opts.block.clamp(1, n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut z: Vec<Vec<f64>> = (0..b).map(|_| random_column(n, mass, total, &mut rng)).collect();
    m_orthonormalize(&mut z, mass, total, &mut rng);

    let mut residual = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        let rhs: Vec<Vec<f64>> = z
            .iter()
            .map(|c| c.iter().zip(mass).map(|(x, m)| x * m).collect())
            .collect();
        let mut w = solve_block(&rhs);
        for col in &mut w {
            let mu = mass.iter().zip(col.iter()).map(|(m, x)| m * x).sum::<f64>() / g_mass;
            col.iter_mut().zip(&g).for_each(|(x, gi)| *x -= mu * gi);
            remove_mean(mass, total, col);
        }
        m_orthonormalize(&mut w, mass, total, &mut rng);

        let kw: Vec<Vec<f64>> = w.iter().map(|c| k.mul_vec(c)).collect();
        let proj = DMatrix::from_fn(b, b, |i, j| {
            0.5 * (w[i].iter().zip(&kw[j]).map(|(a, c)| a * c).sum::<f64>()
                + w[j].iter().zip(&kw[i]).map(|(a, c)| a * c).sum::<f64>())
        });
        let eig = SymmetricEigen::new(proj);
        let mut order: Vec<usize> = (0..b).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

        let combine = |basis: &[Vec<f64>], col: usize| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for (i, bcol) in basis.iter().enumerate() {
                let c = eig.eigenvectors[(i, col)];
                out.iter_mut().zip(bcol).for_each(|(o, x)| *o += c * x);
            }
            out
        };
        z = order.iter().map(|&c| combine(&w, c)).collect();
        let kf = combine(&kw, order[0]);

        let f = &z[0];
        let lambda = eig.eigenvalues[order[0]];
        let mut r: Vec<f64> = kf.iter().zip(f).zip(mass).map(|((a, x), m)| a - lambda * m * x).collect();
        let eta = r.iter().sum::<f64>() / total;
        r.iter_mut().zip(mass).for_each(|(x, m)| *x -= eta * m);
        let r_norm = r.iter().zip(mass).map(|(x, m)| x * x / m).sum::<f64>().sqrt();
        residual = r_norm / (lambda.abs() + shift.abs()).max(f64::MIN_POSITIVE);

        if residual < opts.tol {
            let norm = m_dot(mass, f, f).sqrt();
            let vector: Vec<f64> = f.iter().map(|x| x / norm).collect();
            let value = k.quad_form(&vector);
            return Ok(EigenPair {
                value,
                vector,
                residual,
                iterations: iter,
            });
        }
    }
    Err(Error::NonConvergence {
        solver: "shift-invert subspace iteration",
        iterations: opts.max_iter,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::laplacian::build_laplacian;
    use crate::mesh::gen_perturbed_sphere;
    use crate::spaceform::SpaceForm;

    /// Dense oracle: smallest eigenvalue of `(K, M)` on mean-zero functions,
    /// by whitening and pushing the constant direction to the top.
    fn dense_smallest(k: &DMatrix<f64>, mass: &[f64]) -> f64 {
        let n = mass.len();
        let s: Vec<f64> = mass.iter().map(|m| m.sqrt()).collect();
        let norm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        let big = 1e6;
        let w = DMatrix::from_fn(n, n, |i, j| {
            k[(i, j)] / (s[i] * s[j]) + big * s[i] * s[j] / (norm * norm)
        });
        SymmetricEigen::new(w).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn matches_the_dense_oracle() {
        for delta in [-1.0, 0.0, 1.0] {
            let s = SpaceForm::new(delta).unwrap();
            let m = gen_perturbed_sphere(&s, &s.origin(), 0.7, 0.05, (3, 1), 2).unwrap();
            let sp = build_laplacian(&m).unwrap();
            let pair = smallest_mean_zero(&sp.stiffness, &sp.mass, 0.1, &EigenOptions::default()).unwrap();
            let dense = dense_smallest(&sp.stiffness.to_dense(), &sp.mass);
            assert!((pair.value - dense).abs() < 1e-9 * dense, "{} vs {dense}", pair.value);
            let mean: f64 = pair.vector.iter().zip(&sp.mass).map(|(x, m)| x * m).sum();
            assert!(mean.abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_operator_with_enough_shift() {
        let e = SpaceForm::euclidean();
        let m = gen_perturbed_sphere(&e, &e.origin(), 1.0, 0.1, (2, 0), 2).unwrap();
        let sp = build_laplacian(&m).unwrap();
        let potential = 5.0;
        let q = sp.stiffness.plus_diagonal(&sp.mass.iter().map(|a| -potential * a).collect::<Vec<_>>());
        let pair = smallest_mean_zero(&q, &sp.mass, potential + 1.0, &EigenOptions::default()).unwrap();
        let dense = dense_smallest(&q.to_dense(), &sp.mass);
        assert!(pair.value < 0.0);
        assert!((pair.value - dense).abs() < 1e-9 * dense.abs());
    }

    #[test]
    fn insufficient_shift_is_reported() {
        let e = SpaceForm::euclidean();
        let m = gen_perturbed_sphere(&e, &e.origin(), 1.0, 0.0, (2, 0), 1).unwrap();
        let sp = build_laplacian(&m).unwrap();
        let err = smallest_mean_zero(&sp.stiffness, &sp.mass, -1.0, &EigenOptions::default());
        assert!(err.is_err());
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let e = SpaceForm::euclidean();
        let m = gen_perturbed_sphere(&e, &e.origin(), 1.0, 0.1, (3, 1), 2).unwrap();
        let sp = build_laplacian(&m).unwrap();
        let opts = EigenOptions {
            max_iter: 1,
            tol: 1e-15,
            ..EigenOptions::default()
        };
        match smallest_mean_zero(&sp.stiffness, &sp.mass, 0.1, &opts) {
            Err(Error::NonConvergence { residual, .. }) => assert!(residual.is_finite()),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
