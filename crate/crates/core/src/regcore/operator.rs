//! The discrete operator `A = (B, C): V -> H = M x O` and its Gram-weighted
//! adjoint, with lazily cached factorizations.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::numerics::{DenseCholesky, SparseMatrix, SymmetricIndefinite};

/// An element of `H = M x O`.
#[derive(Debug, Clone, PartialEq)]
pub struct HVector {
    pub m: DVector<f64>,
    pub o: DVector<f64>,
}

impl HVector {
    pub fn new(m: DVector<f64>, o: DVector<f64>) -> Self {
        HVector { m, o }
    }

    pub fn zeros(n_m: usize, n_o: usize) -> Self {
        HVector { m: DVector::zeros(n_m), o: DVector::zeros(n_o) }
    }

    pub fn scale(&self, a: f64) -> HVector {
        HVector { m: &self.m * a, o: &self.o * a }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &HVector) -> HVector {
        HVector { m: &self.m + &other.m * a, o: &self.o + &other.o * a }
    }

    pub fn sub(&self, other: &HVector) -> HVector {
        self.axpy(-1.0, other)
    }

    pub fn add(&self, other: &HVector) -> HVector {
        self.axpy(1.0, other)
    }
}

/// Dense Gram factorizations shared by every application of `A` and `A^*`.
#[derive(Debug)]
pub struct Factors {
    pub chol_v: DenseCholesky,
    pub chol_m: DenseCholesky,
    pub chol_o: DenseCholesky,
    pub gram_v: DMatrix<f64>,
}

/// Whitened operator blocks and the normal matrix, needed by the Tikhonov
/// solves and the range basis only.
#[derive(Debug)]
pub struct NormalFactors {
    /// `L_M^{-1} B_f`, so that `B_f^T G_M^{-1} B_f = W_M^T W_M`.
    pub w_m: DMatrix<f64>,
    /// `L_O^{-1} C_f`.
    pub w_o: DMatrix<f64>,
    /// `A^* A` in coordinates: `B_f^T G_M^{-1} B_f + C_f^T G_O^{-1} C_f`.
    pub normal0: DMatrix<f64>,
}

/// Generalized eigendecomposition `normal0 Z = G_V Z diag(lambda)`,
/// `Z^T G_V Z = I`, giving Tikhonov solves in `O(n^2)` for any epsilon.
#[derive(Debug)]
pub struct Spectral {
    pub z: DMatrix<f64>,
    pub lambda: DVector<f64>,
}

/// How the Tikhonov system is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MixedRoute {
    /// Symmetric indefinite block system in `(u, lambda)`.
    #[default]
    Block,
    /// Cholesky of the normal matrix `eps G_V + A^* A`.
    Normal,
    /// Cached generalized eigendecomposition of `(A^* A, G_V)`.
    Spectral,
}

/// Discrete `A = (B, C)` with the Gram matrices of `V`, `M`, `O`.
///
/// `b_form` (rows M dofs, cols V dofs) realizes `b(u, mu) = mu^T b_form u`,
/// so `Bu = G_M^{-1} b_form u`; likewise `Cu = G_O^{-1} c_form u`.
#[derive(Debug)]
pub struct AssimilationOperator {
    pub gram_v: SparseMatrix,
    pub gram_m: SparseMatrix,
    pub gram_o: SparseMatrix,
    pub b_form: SparseMatrix,
    pub c_form: SparseMatrix,
    factors: OnceLock<Factors>,
    normal: OnceLock<NormalFactors>,
    spectral: OnceLock<Spectral>,
    range_basis: OnceLock<DMatrix<f64>>,
}

impl AssimilationOperator {
    pub fn new(
        gram_v: SparseMatrix,
        gram_m: SparseMatrix,
        gram_o: SparseMatrix,
        b_form: SparseMatrix,
        c_form: SparseMatrix,
    ) -> Result<Self> {
        let n_v = gram_v.nrows();
        let n_m = gram_m.nrows();
        let n_o = gram_o.nrows();
        let square = |m: &SparseMatrix, name: &str| {
            if m.nrows() != m.ncols() {
                Err(Error::Dimension(format!("{name} is {}x{}", m.nrows(), m.ncols())))
            } else {
                Ok(())
            }
        };
        square(&gram_v, "gram_V")?;
        square(&gram_m, "gram_M")?;
        square(&gram_o, "gram_O")?;
        if b_form.nrows() != n_m || b_form.ncols() != n_v {
            return Err(Error::Dimension(format!(
                "b_form is {}x{}, expected {n_m}x{n_v}",
                b_form.nrows(),
                b_form.ncols()
            )));
        }
        if c_form.nrows() != n_o || c_form.ncols() != n_v {
            return Err(Error::Dimension(format!(
                "c_form is {}x{}, expected {n_o}x{n_v}",
                c_form.nrows(),
                c_form.ncols()
            )));
        }
        for (m, name) in [(&gram_v, "gram_V"), (&gram_m, "gram_M"), (&gram_o, "gram_O")] {
            let asym = m.asymmetry();
            if asym > 1e-12 * m.max_abs().max(f64::MIN_POSITIVE) {
                return Err(Error::OperatorInvalid(format!("{name} is not symmetric (asymmetry {asym:.3e})")));
            }
        }
        Ok(AssimilationOperator {
            gram_v,
            gram_m,
            gram_o,
            b_form,
            c_form,
            factors: OnceLock::new(),
            normal: OnceLock::new(),
            spectral: OnceLock::new(),
            range_basis: OnceLock::new(),
        })
    }

    /// Operator from dense `A_b`, `A_c` (coordinates of `Bu`, `Cu`) and Gram matrices.
    pub fn from_dense(
        gram_v: &DMatrix<f64>,
        gram_m: &DMatrix<f64>,
        gram_o: &DMatrix<f64>,
        a_b: &DMatrix<f64>,
        a_c: &DMatrix<f64>,
    ) -> Result<Self> {
        Self::new(
            SparseMatrix::from_dense(gram_v, 0.0),
            SparseMatrix::from_dense(gram_m, 0.0),
            SparseMatrix::from_dense(gram_o, 0.0),
            SparseMatrix::from_dense(&(gram_m * a_b), 0.0),
            SparseMatrix::from_dense(&(gram_o * a_c), 0.0),
        )
    }

    pub fn n_v(&self) -> usize {
        self.gram_v.nrows()
    }

    pub fn n_m(&self) -> usize {
        self.gram_m.nrows()
    }

    pub fn n_o(&self) -> usize {
        self.gram_o.nrows()
    }

    pub fn factors(&self) -> Result<&Factors> {
        if let Some(f) = self.factors.get() {
            return Ok(f);
        }
        let invalid = |what: &str, e: Error| Error::OperatorInvalid(format!("{what}: {e}"));
        let gram_v = self.gram_v.to_dense();
        let chol_v = DenseCholesky::new(gram_v.clone()).map_err(|e| invalid("gram_V", e))?;
        let chol_m = DenseCholesky::from_sparse(&self.gram_m).map_err(|e| invalid("gram_M", e))?;
        let chol_o = DenseCholesky::from_sparse(&self.gram_o).map_err(|e| invalid("gram_O", e))?;
        let _ = self.factors.set(Factors { chol_v, chol_m, chol_o, gram_v });
        Ok(self.factors.get().expect("just set"))
    }

    pub fn normal(&self) -> Result<&NormalFactors> {
        if let Some(n) = self.normal.get() {
            return Ok(n);
        }
        let f = self.factors()?;
        let w_m = f.chol_m.solve_lower(&self.b_form.to_dense());
        let w_o = f.chol_o.solve_lower(&self.c_form.to_dense());
        let mut normal0 = w_m.tr_mul(&w_m);
        normal0 += w_o.tr_mul(&w_o);
        let normal0 = (&normal0 + normal0.transpose()) * 0.5;
        let _ = self.normal.set(NormalFactors { w_m, w_o, normal0 });
        Ok(self.normal.get().expect("just set"))
    }

    pub fn spectral(&self) -> Result<&Spectral> {
        if let Some(s) = self.spectral.get() {
            return Ok(s);
        }
        let f = self.factors()?;
        // S = L_V^{-1} N0 L_V^{-T}
        let x = f.chol_v.solve_lower(&self.normal()?.normal0);
        let s = f.chol_v.solve_lower(&x.transpose());
        let s = (&s + s.transpose()) * 0.5;
        let eig = SymmetricEigen::new(s);
        let l = f.chol_v.l();
        let z = l
            .tr_solve_lower_triangular(&eig.eigenvectors)
            .ok_or_else(|| Error::OperatorInvalid("gram_V factor is singular".into()))?;
        let _ = self.spectral.set(Spectral { z, lambda: eig.eigenvalues });
        Ok(self.spectral.get().expect("just set"))
    }

    /// `Au = (G_M^{-1} b_form u, G_O^{-1} c_form u)`.
    pub fn apply(&self, u: &DVector<f64>) -> Result<HVector> {
        let f = self.factors()?;
        Ok(HVector {
            m: f.chol_m.solve(&self.b_form.mul_vec(u)),
            o: f.chol_o.solve(&self.c_form.mul_vec(u)),
        })
    }

    /// `A^* q = G_V^{-1} (b_form^T q_m + c_form^T q_o)`.
    pub fn adjoint(&self, q: &HVector) -> Result<DVector<f64>> {
        let f = self.factors()?;
        Ok(f.chol_v.solve(&self.adjoint_load(q)))
    }

    /// `b_form^T q_m + c_form^T q_o`, the right-hand side of Tikhonov solves.
    pub fn adjoint_load(&self, q: &HVector) -> DVector<f64> {
        self.b_form.tr_mul_vec(&q.m) + self.c_form.tr_mul_vec(&q.o)
    }

    pub fn h_inner(&self, a: &HVector, b: &HVector) -> f64 {
        self.gram_m.bilinear(&a.m, &b.m) + self.gram_o.bilinear(&a.o, &b.o)
    }

    pub fn h_norm(&self, a: &HVector) -> f64 {
        self.h_inner(a, a).max(0.0).sqrt()
    }

    pub fn m_norm(&self, x: &DVector<f64>) -> f64 {
        self.gram_m.bilinear(x, x).max(0.0).sqrt()
    }

    pub fn o_norm(&self, x: &DVector<f64>) -> f64 {
        self.gram_o.bilinear(x, x).max(0.0).sqrt()
    }

    pub fn v_norm(&self, x: &DVector<f64>) -> f64 {
        self.gram_v.bilinear(x, x).max(0.0).sqrt()
    }

    /// `||Au||_H^2` computed from the cached normal matrix.
    pub fn a_norm_squared(&self, u: &DVector<f64>) -> Result<f64> {
        let f = self.normal()?;
        let wm = &f.w_m * u;
        let wo = &f.w_o * u;
        Ok(wm.norm_squared() + wo.norm_squared())
    }

    /// Solves `(eps G_V + A^* A) u = load` by the requested route.
    pub fn solve_normal(&self, eps: f64, load: &DVector<f64>, route: MixedRoute) -> Result<DVector<f64>> {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {eps}")));
        }
        match route {
            MixedRoute::Spectral => {
                let s = self.spectral()?;
                let mut c = s.z.tr_mul(load);
                for (ci, li) in c.iter_mut().zip(s.lambda.iter()) {
                    *ci /= eps + li;
                }
                Ok(&s.z * c)
            }
            MixedRoute::Normal | MixedRoute::Block => {
                let n = &self.normal()?.normal0 + &self.factors()?.gram_v * eps;
                let chol = DenseCholesky::new(n)
                    .map_err(|e| Error::OperatorInvalid(format!("regularized normal matrix at eps = {eps:.3e}: {e}")))?;
                Ok(chol.solve(load))
            }
        }
    }

    /// Solves the block system
    /// `[[eps G_V + c^T G_O^{-1} c, b^T], [b, -G_M]] (u, lambda) = (c^T f, G_M ell)`.
    pub fn solve_block(&self, eps: f64, data: &HVector) -> Result<(DVector<f64>, DVector<f64>)> {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {eps}")));
        }
        let f = self.factors()?;
        let w_o = &self.normal()?.w_o;
        let (nv, nm) = (self.n_v(), self.n_m());
        let mut k = DMatrix::zeros(nv + nm, nv + nm);
        let top = &f.gram_v * eps + w_o.tr_mul(w_o);
        k.view_mut((0, 0), (nv, nv)).copy_from(&top);
        let b = self.b_form.to_dense();
        k.view_mut((nv, 0), (nm, nv)).copy_from(&b);
        k.view_mut((0, nv), (nv, nm)).copy_from(&b.transpose());
        k.view_mut((nv, nv), (nm, nm)).copy_from(&(-self.gram_m.to_dense()));
        let mut rhs = DVector::zeros(nv + nm);
        rhs.rows_mut(0, nv).copy_from(&self.c_form.tr_mul_vec(&data.o));
        rhs.rows_mut(nv, nm).copy_from(&self.gram_m.mul_vec(&data.m));
        let fac = SymmetricIndefinite::new(k).map_err(|e| Error::OperatorInvalid(format!("mixed block system: {e}")))?;
        let x = fac.solve(&rhs);
        Ok((x.rows(0, nv).into_owned(), x.rows(nv, nm).into_owned()))
    }

    /// Orthonormal (Euclidean) basis of the range of the weighted operator
    /// `J = [L_M^{-1} b_form; L_O^{-1} c_form]`, the coordinate image of Range A.
    pub fn range_basis(&self) -> Result<&DMatrix<f64>> {
        if let Some(q) = self.range_basis.get() {
            return Ok(q);
        }
        let f = self.normal()?;
        let (nm, no, nv) = (self.n_m(), self.n_o(), self.n_v());
        let mut j = DMatrix::zeros(nm + no, nv);
        j.view_mut((0, 0), (nm, nv)).copy_from(&f.w_m);
        j.view_mut((nm, 0), (no, nv)).copy_from(&f.w_o);
        let qr = j.col_piv_qr();
        let r = qr.r();
        let kmax = r.nrows().min(r.ncols());
        let r00 = if kmax > 0 { r[(0, 0)].abs() } else { 0.0 };
        let tol = r00 * f64::EPSILON * (nm + no).max(nv) as f64;
        let rank = (0..kmax).take_while(|&k| r[(k, k)].abs() > tol).count();
        let q = qr.q().columns(0, rank).into_owned();
        let _ = self.range_basis.set(q);
        Ok(self.range_basis.get().expect("just set"))
    }

    /// Exact discrete H-orthogonal projection of `g` onto `(Range A)^perp`.
    pub fn project_range_perp(&self, g: &HVector) -> Result<HVector> {
        let f = self.factors()?;
        let q = self.range_basis()?;
        let (nm, no) = (self.n_m(), self.n_o());
        let lm = f.chol_m.l();
        let lo = f.chol_o.l();
        let mut y = DVector::zeros(nm + no);
        y.rows_mut(0, nm).copy_from(&lm.tr_mul(&g.m));
        y.rows_mut(nm, no).copy_from(&lo.tr_mul(&g.o));
        let z = &y - q * q.tr_mul(&y);
        Ok(HVector {
            m: f.chol_m.solve_upper_tr(&z.rows(0, nm).into_owned()),
            o: f.chol_o.solve_upper_tr(&z.rows(nm, no).into_owned()),
        })
    }
}
