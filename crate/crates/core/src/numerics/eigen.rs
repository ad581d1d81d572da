//! Smallest eigenpairs of the generalized symmetric problem `K x = lambda G x`
//! by shift-invert block Lanczos with full G-reorthogonalization.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::solve::{DenseCholesky, SymmetricIndefinite};
use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

const MAX_RESTARTS: usize = 200;

/// Ascending eigenvalues with G-orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    /// `||K x - lambda G x|| / ||x||` per pair.
    pub residuals: Vec<f64>,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, i: usize) -> DVector<f64> {
        self.vectors.column(i).into_owned()
    }
}

enum ShiftedFactor {
    Cholesky(DenseCholesky),
    Indefinite(SymmetricIndefinite),
}

impl ShiftedFactor {
    fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        match self {
            ShiftedFactor::Cholesky(c) => c.solve(b),
            ShiftedFactor::Indefinite(f) => f.solve(b),
        }
    }
}

/// Computes the `count` smallest eigenpairs of `K x = lambda G x`.
pub fn smallest_eigenpairs(k: &SparseMatrix, g: &SparseMatrix, count: usize) -> Result<EigenPairs> {
    let n = k.nrows();
    if k.ncols() != n || g.nrows() != n || g.ncols() != n {
        return Err(Error::Dimension(format!(
            "eigenproblem with K {}x{} and G {}x{}",
            k.nrows(),
            k.ncols(),
            g.nrows(),
            g.ncols()
        )));
    }
    if count > n {
        return Err(Error::InvalidArgument(format!("{count} eigenpairs requested from a dimension-{n} problem")));
    }
    if count == 0 {
        return Ok(EigenPairs {
            values: Vec::new(),
            vectors: DMatrix::zeros(n, 0),
            residuals: Vec::new(),
        });
    }

    let kd = k.to_dense();
    let gd = g.to_dense();
    let tr_k: f64 = (0..n).map(|i| kd[(i, i)].abs()).sum();
    let tr_g: f64 = (0..n).map(|i| gd[(i, i)]).sum();
    if tr_g <= 0.0 {
        return Err(Error::NotPositiveDefinite("Gram matrix has nonpositive trace".into()));
    }
    let sigma = -1e-3 * (tr_k / tr_g).max(1e-12);
    let shifted = &kd - &gd * sigma;
    let factor = match DenseCholesky::new(shifted.clone()) {
        Ok(c) => ShiftedFactor::Cholesky(c),
        Err(_) => ShiftedFactor::Indefinite(SymmetricIndefinite::new(shifted)?),
    };
    let k_scale = kd.iter().fold(0.0f64, |m, v| m.max(v.abs())) * n as f64;
    let g_scale = gd.iter().fold(0.0f64, |m, v| m.max(v.abs())) * n as f64;

    let block = (count + 2).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a2c);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut g_basis: Vec<DVector<f64>> = Vec::new();
    let mut k_basis: Vec<DVector<f64>> = Vec::new();
    let mut pending: Vec<DVector<f64>> = (0..block).map(|_| random_vector(n, &mut rng)).collect();
    let mut worst = f64::INFINITY;

    for _restart in 0..MAX_RESTARTS {
        let mut added = Vec::new();
        for mut v in pending.drain(..) {
            let mut accepted = false;
            for _attempt in 0..3 {
                let norm0 = g_norm(&gd, &v);
                for _pass in 0..2 {
                    for (q, gq) in basis.iter().zip(&g_basis) {
                        let c = gq.dot(&v);
                        v.axpy(-c, q, 1.0);
                    }
                }
                let norm = g_norm(&gd, &v);
                if norm > 1e-10 * norm0 && norm > 0.0 {
                    v /= norm;
                    g_basis.push(&gd * &v);
                    k_basis.push(&kd * &v);
                    basis.push(v.clone());
                    added.push(v);
                    accepted = true;
                    break;
                }
                if basis.len() >= n {
                    break;
                }
                // invariant subspace reached; inject a fresh direction
                v = random_vector(n, &mut rng);
            }
            if !accepted && basis.len() >= n {
                break;
            }
        }

        let m = basis.len();
        if m >= count {
            let mut h = DMatrix::zeros(m, m);
            for i in 0..m {
                for j in 0..=i {
                    let val = basis[i].dot(&k_basis[j]);
                    h[(i, j)] = val;
                    h[(j, i)] = val;
                }
            }
            let eig = SymmetricEigen::new(h);
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let mut values = Vec::with_capacity(count);
            let mut vectors = DMatrix::zeros(n, count);
            let mut residuals = Vec::with_capacity(count);
            let mut converged = true;
            worst = 0.0;
            for (c, &idx) in order.iter().take(count).enumerate() {
                let lambda = eig.eigenvalues[idx];
                let y = eig.eigenvectors.column(idx);
                let mut x = DVector::zeros(n);
                let mut kx = DVector::zeros(n);
                let mut gx = DVector::zeros(n);
                for j in 0..m {
                    x.axpy(y[j], &basis[j], 1.0);
                    kx.axpy(y[j], &k_basis[j], 1.0);
                    gx.axpy(y[j], &g_basis[j], 1.0);
                }
                let res = (&kx - &gx * lambda).norm() / x.norm();
                let tol = 1e-9 * (k_scale + lambda.abs() * g_scale).max(f64::MIN_POSITIVE);
                if res > tol {
                    converged = false;
                }
                worst = worst.max(res / (k_scale + lambda.abs() * g_scale).max(f64::MIN_POSITIVE));
                canonical_sign(&mut x);
                vectors.set_column(c, &x);
                values.push(lambda);
                residuals.push(res);
            }
            if converged || m >= n {
                return Ok(EigenPairs {
                    values,
                    vectors,
                    residuals,
                });
            }
        }

        if m >= n {
            break;
        }
        // expand the Krylov space with the shift-invert operator applied to the newest block
        pending = added
            .iter()
            .map(|v| factor.solve(&(&gd * v)))
            .collect();
        if pending.is_empty() {
            pending = (0..block).map(|_| random_vector(n, &mut rng)).collect();
        }
    }
    Err(Error::EigenFailure {
        restarts: MAX_RESTARTS,
        residual: worst,
    })
}

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

fn g_norm(g: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    v.dot(&(g * v)).max(0.0).sqrt()
}

/// Fixes the sign so the entry of largest magnitude is positive.
fn canonical_sign(x: &mut DVector<f64>) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for v in x.iter() {
        if v.abs() > best * (1.0 + 1e-12) {
            best = v.abs();
            sign = v.signum();
        }
    }
    if sign < 0.0 {
        x.neg_mut();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g_orthonormality_error(pairs: &EigenPairs, g: &SparseMatrix) -> f64 {
        let x = &pairs.vectors;
        let gram = x.transpose() * g.mul_dense(x);
        (gram - DMatrix::identity(x.ncols(), x.ncols())).amax()
    }

    #[test]
    fn identity_pencil() {
        let i = SparseMatrix::identity(6);
        let pairs = smallest_eigenpairs(&i, &i, 2).unwrap();
        assert!((pairs.values[0] - 1.0).abs() < 1e-12);
        assert!((pairs.values[1] - 1.0).abs() < 1e-12);
        assert!(g_orthonormality_error(&pairs, &i) < 1e-10);
    }

    #[test]
    fn tridiagonal_matches_dense_eigensolver() {
        let n = 5;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + i as f64 * 0.1));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let k = SparseMatrix::from_triplets(n, n, t);
        let g = SparseMatrix::identity(n);
        let pairs = smallest_eigenpairs(&k, &g, 3).unwrap();
        let dense = SymmetricEigen::new(k.to_dense());
        let mut oracle: Vec<f64> = dense.eigenvalues.iter().copied().collect();
        oracle.sort_by(f64::total_cmp);
        for i in 0..3 {
            assert!((pairs.values[i] - oracle[i]).abs() < 1e-10, "{} vs {}", pairs.values[i], oracle[i]);
        }
    }

    #[test]
    fn generalized_pencil_with_repeated_eigenvalues() {
        // K = diag(1,1,2,3,...) with G = diag(2,...): repeated smallest eigenvalue
        let n = 30;
        let kd: Vec<f64> = (0..n).map(|i| if i < 2 { 1.0 } else { i as f64 }).collect();
        let gd = vec![2.0; n];
        let k = SparseMatrix::from_diagonal(&kd);
        let g = SparseMatrix::from_diagonal(&gd);
        let pairs = smallest_eigenpairs(&k, &g, 4).unwrap();
        assert!((pairs.values[0] - 0.5).abs() < 1e-10);
        assert!((pairs.values[1] - 0.5).abs() < 1e-10);
        assert!((pairs.values[2] - 1.0).abs() < 1e-10);
        assert!((pairs.values[3] - 1.5).abs() < 1e-10);
        assert!(g_orthonormality_error(&pairs, &g) < 1e-8);
    }

    #[test]
    fn deterministic_output() {
        let n = 20;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let k = SparseMatrix::from_triplets(n, n, t);
        let g = SparseMatrix::identity(n);
        let a = smallest_eigenpairs(&k, &g, 3).unwrap();
        let b = smallest_eigenpairs(&k, &g, 3).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors, b.vectors);
    }
}
