//! Linear solvers: preconditioned conjugate gradients for sparse SPD systems,
//! dense Cholesky for cached Gram factorizations, and a pivoted dense
//! factorization for symmetric indefinite (saddle-point) systems.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};

use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

/// Solves `A x = b` for sparse SPD `A` by Jacobi-preconditioned conjugate
/// gradients, stopping once `||A x - b|| <= tol * ||b||`. The iteration cap
/// is `10 n`.
pub fn solve_spd(a: &SparseMatrix, b: &DVector<f64>, tol: f64) -> Result<DVector<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::Dimension(format!(
            "solve_spd: matrix {}x{}, rhs {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return Ok(DVector::zeros(n));
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let precondition = |r: &DVector<f64>| DVector::from_iterator(n, r.iter().zip(&inv_diag).map(|(r, d)| r * d));

    let mut x = DVector::zeros(n);
    let mut r = b.clone();
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let cap = 10 * n.max(1);
    for _ in 0..cap {
        let ap = a.mul_vec(&p);
        let pap = p.dot(&ap);
        if pap <= 0.0 {
            return Err(Error::NotPositiveDefinite(format!(
                "conjugate gradients met p^T A p = {pap:.3e}"
            )));
        }
        let alpha = rz / pap;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        if r.norm() <= tol * b_norm {
            // recompute the true residual; the recurrence drifts on hard problems
            let true_res = (a.mul_vec(&x) - b).norm();
            if true_res <= tol * b_norm {
                return Ok(x);
            }
            r = b - a.mul_vec(&x);
        }
        z = precondition(&r);
        let rz_new = r.dot(&z);
        p = &z + &p * (rz_new / rz);
        rz = rz_new;
    }
    let residual = (a.mul_vec(&x) - b).norm() / b_norm;
    Err(Error::SolverFailure {
        iterations: cap,
        residual,
    })
}

/// Dense Cholesky factorization `A = L L^T`, reused across many solves.
#[derive(Debug, Clone)]
pub struct DenseCholesky {
    chol: Cholesky<f64, Dyn>,
}

impl DenseCholesky {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Dimension(format!(
                "cholesky of {}x{} matrix",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        Cholesky::new(a)
            .map(|chol| Self { chol })
            .ok_or_else(|| Error::NotPositiveDefinite(format!("dense Cholesky failed (n = {n})")))
    }

    pub fn from_sparse(a: &SparseMatrix) -> Result<Self> {
        Self::new(a.to_dense())
    }

    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        if b.is_empty() {
            return b.clone();
        }
        self.chol.solve(b)
    }

    pub fn solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        if b.is_empty() {
            return b.clone();
        }
        self.chol.solve(b)
    }

    /// `L^{-1} B`.
    pub fn solve_lower(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        if b.is_empty() {
            return b.clone();
        }
        let l = self.chol.l();
        l.solve_lower_triangular(b).expect("cholesky factor has nonzero diagonal")
    }

    /// `L^{-T} b`.
    pub fn solve_upper_tr(&self, b: &DVector<f64>) -> DVector<f64> {
        if b.is_empty() {
            return b.clone();
        }
        let l = self.chol.l();
        l.tr_solve_lower_triangular(b).expect("cholesky factor has nonzero diagonal")
    }

    pub fn l(&self) -> DMatrix<f64> {
        self.chol.l()
    }
}

/// Pivoted dense factorization of a symmetric (possibly indefinite) matrix.
#[derive(Debug, Clone)]
pub struct SymmetricIndefinite {
    lu: LU<f64, Dyn, Dyn>,
    matrix: DMatrix<f64>,
}

impl SymmetricIndefinite {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension(format!("{}x{} matrix is not square", n, a.ncols())));
        }
        let lu = a.clone().lu();
        let u = lu.u();
        let mut max_pivot = 0.0f64;
        let mut min_pivot = (0usize, f64::INFINITY);
        for i in 0..n {
            let p = u[(i, i)].abs();
            max_pivot = max_pivot.max(p);
            if p < min_pivot.1 {
                min_pivot = (i, p);
            }
        }
        if n > 0 && (min_pivot.1 <= (n as f64) * f64::EPSILON * max_pivot || max_pivot == 0.0) {
            return Err(Error::Singular {
                pivot_index: min_pivot.0,
                pivot: min_pivot.1,
                max_pivot,
            });
        }
        Ok(Self { lu, matrix: a })
    }

    /// Solves with one step of iterative refinement.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        if b.is_empty() {
            return b.clone();
        }
        let mut x = self.lu.solve(b).expect("factorization checked nonsingular");
        let r = b - &self.matrix * &x;
        if let Some(dx) = self.lu.solve(&r) {
            x += dx;
        }
        x
    }
}

/// Solves the symmetric nonsingular system `A x = b` through a pivoted dense
/// factorization; fails with pivot diagnostics when `A` is singular to working
/// precision.
pub fn solve_symmetric_indefinite(a: &SparseMatrix, b: &DVector<f64>) -> Result<DVector<f64>> {
    if a.nrows() != a.ncols() || b.len() != a.nrows() {
        return Err(Error::Dimension(format!(
            "solve_symmetric_indefinite: matrix {}x{}, rhs {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let f = SymmetricIndefinite::new(a.to_dense())?;
    Ok(f.solve(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dense(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn identity_and_two_by_two() {
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let x = solve_spd(&SparseMatrix::identity(3), &b, 1e-14).unwrap();
        assert_eq!(x, b);

        let a = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 2.0)]);
        let x = solve_spd(&a, &DVector::from_vec(vec![3.0, 3.0]), 1e-14).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-13 && (x[1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn random_spd_matches_dense_factorization() {
        let n = 50;
        let m = random_dense(n, 7);
        let spd = &m * m.transpose() + DMatrix::identity(n, n) * 0.5;
        let a = SparseMatrix::from_dense(&spd, 0.0);
        let b = DVector::from_fn(n, |i, _| (i as f64).sin());
        let x = solve_spd(&a, &b, 1e-12).unwrap();
        assert!((a.mul_vec(&x) - &b).norm() <= 1e-10 * b.norm());
        let oracle = spd.clone().cholesky().unwrap().solve(&b);
        assert!((&x - &oracle).norm() <= 1e-8 * oracle.norm());
    }

    #[test]
    fn cg_reports_failure_on_indefinite_input() {
        let a = SparseMatrix::from_diagonal(&[1.0, -1.0]);
        let err = solve_spd(&a, &DVector::from_vec(vec![1.0, 1.0]), 1e-12).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite(_)));
    }

    #[test]
    fn indefinite_toys() {
        let a = SparseMatrix::from_diagonal(&[1.0, -1.0]);
        let x = solve_symmetric_indefinite(&a, &DVector::from_vec(vec![2.0, 3.0])).unwrap();
        assert_eq!(x, DVector::from_vec(vec![2.0, -3.0]));

        let a = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0)]);
        let x = solve_symmetric_indefinite(&a, &DVector::from_vec(vec![2.0, 1.0])).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_indefinite_matches_dense_oracle() {
        let n = 40;
        let m = random_dense(n, 11);
        let sym = &m + m.transpose();
        let a = SparseMatrix::from_dense(&sym, 0.0);
        let b = DVector::from_fn(n, |i, _| 1.0 + i as f64);
        let x = solve_symmetric_indefinite(&a, &b).unwrap();
        assert!((a.mul_vec(&x) - &b).norm() <= 1e-10 * b.norm());
        let oracle = sym.clone().full_piv_lu().solve(&b).unwrap();
        assert!((&x - &oracle).norm() <= 1e-9 * oracle.norm());
    }

    #[test]
    fn singular_matrix_reports_pivot() {
        let a = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        match solve_symmetric_indefinite(&a, &DVector::from_vec(vec![1.0, 1.0])) {
            Err(Error::Singular { pivot_index, .. }) => assert_eq!(pivot_index, 1),
            other => panic!("expected singular error, got {other:?}"),
        }
    }
}
