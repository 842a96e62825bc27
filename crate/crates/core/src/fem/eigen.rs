//! Smallest eigenpairs of the pencil `K v = Λ M v` with `K` positive
//! semidefinite and `M` positive definite.
//!
//! Small problems are reduced densely: `M = LLᵀ`, then the symmetric matrix
//! `L⁻¹KL⁻ᵀ` is tridiagonalized and diagonalized by implicit QR. Larger problems
//! use block subspace iteration on `(K + M)⁻¹M` with a sparse Cholesky factor,
//! followed by a Rayleigh–Ritz projection at every step.

use faer::linalg::solvers::Solve;
use faer::MatMut;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FemError, SparseSymMatrix};

const START_SEED: u64 = 0x4e65_756d_616e_6e;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSolverOptions {
    /// Relative change of every wanted Ritz value between sweeps at convergence.
    pub tol: f64,
    pub max_iterations: usize,
    /// Problems with at most this many unknowns use the dense reduction.
    pub dense_threshold: usize,
    /// Extra block vectors beyond the requested count.
    pub guard_vectors: usize,
}

impl Default for EigenSolverOptions {
    fn default() -> Self {
        EigenSolverOptions {
            tol: 1e-12,
            max_iterations: 400,
            dense_threshold: 400,
            guard_vectors: 8,
        }
    }
}

/// Ascending eigenvalues with mass-orthonormal eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    /// Subspace sweeps used (zero on the dense path).
    pub iterations: usize,
}

pub fn solve_eigs(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    count: usize,
    opts: &EigenSolverOptions,
) -> Result<EigenPairs, FemError> {
    let n = k.dim();
    if m.dim() != n {
        return Err(FemError::DimensionMismatch { left: n, right: m.dim() });
    }
    if count == 0 || count >= n {
        return Err(FemError::InvalidCount { count, dim: n });
    }
    if !(opts.tol > 0.0) {
        return Err(FemError::InvalidTolerance(opts.tol));
    }
    if n <= opts.dense_threshold {
        let (values, vectors) = dense_generalized(&k.to_dense(), &m.to_dense())?;
        return Ok(EigenPairs {
            values: values[..count].to_vec(),
            vectors: vectors.columns(0, count).into_owned(),
            iterations: 0,
        });
    }
    subspace_iteration(k, m, count, opts)
}

/// All eigenpairs of the dense pencil `(A, B)`, `B` symmetric positive definite,
/// ascending, with `B`-orthonormal vectors.
pub fn dense_generalized(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<(Vec<f64>, DMatrix<f64>), FemError> {
    let chol = b.clone().cholesky().ok_or(FemError::NotPositiveDefinite)?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(a)
        .ok_or(FemError::NotPositiveDefinite)?;
    let c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or(FemError::NotPositiveDefinite)?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let w = DMatrix::from_fn(a.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    let vectors = l
        .transpose()
        .solve_upper_triangular(&w)
        .ok_or(FemError::NotPositiveDefinite)?;
    Ok((values, vectors))
}

fn subspace_iteration(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    count: usize,
    opts: &EigenSolverOptions,
) -> Result<EigenPairs, FemError> {
    let n = k.dim();
    let block = (count + opts.guard_vectors).max(2 * count).min(n);
    let shifted = k.combine(1.0, m, 1.0).to_faer_lower();
    let factor = shifted
        .sp_cholesky(faer::Side::Lower)
        .map_err(|_| FemError::NotPositiveDefinite)?;

    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut x = DMatrix::from_fn(n, block, |_, _| rng.random_range(-1.0..1.0));
    let mut previous: Option<Vec<f64>> = None;
    let mut last_change = f64::INFINITY;
    for sweep in 1..=opts.max_iterations {
        let mut y = m.mul_dense(&x);
        factor.solve_in_place(MatMut::from_column_major_slice_mut(y.as_mut_slice(), n, block));

        let ky = k.mul_dense(&y);
        let my = m.mul_dense(&y);
        let kr = symmetrize(y.transpose() * &ky);
        let mr = symmetrize(y.transpose() * &my);
        let (ritz, w) = dense_generalized(&kr, &mr)?;
        x = &y * &w;

        if let Some(prev) = &previous {
            last_change = (0..count)
                .map(|i| (ritz[i] - prev[i]).abs() / (ritz[i].abs() + 1.0))
                .fold(0.0, f64::max);
            if last_change <= opts.tol {
                return Ok(EigenPairs {
                    values: ritz[..count].to_vec(),
                    vectors: x.columns(0, count).into_owned(),
                    iterations: sweep,
                });
            }
        }
        previous = Some(ritz);
    }
    Err(FemError::SolverNoConvergence {
        iterations: opts.max_iterations,
        last_change,
    })
}

fn symmetrize(a: DMatrix<f64>) -> DMatrix<f64> {
    (&a + a.transpose()) * 0.5
}
