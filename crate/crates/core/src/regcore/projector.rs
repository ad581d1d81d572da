//! Finite-rank H-orthogonal projectors `P = (P_M, P_O)`.

use nalgebra::{DMatrix, DVector};

use super::operator::{AssimilationOperator, HVector};
use crate::error::{Error, Result};
use crate::numerics::SparseMatrix;

/// Whether `Range P` lies in the closure of `Range A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeCompatibility {
    Claimed,
    Verified,
    Violated,
}

/// Orthogonal projection onto the span of Gram-orthonormal columns `u`:
/// `P x = u (G u)^T x`.
#[derive(Debug, Clone)]
pub struct ProjectorPart {
    pub u: DMatrix<f64>,
    gu: DMatrix<f64>,
}

impl ProjectorPart {
    pub fn zero(n: usize) -> Self {
        ProjectorPart { u: DMatrix::zeros(n, 0), gu: DMatrix::zeros(n, 0) }
    }

    /// Gram-orthonormalizes `vectors` (twice-iterated Gram-Schmidt); nearly
    /// dependent vectors are dropped.
    pub fn from_vectors(vectors: &[DVector<f64>], gram: &SparseMatrix) -> Result<Self> {
        let n = gram.nrows();
        let mut basis: Vec<DVector<f64>> = Vec::new();
        let mut gbasis: Vec<DVector<f64>> = Vec::new();
        for v in vectors {
            if v.len() != n {
                return Err(Error::Dimension(format!("projector vector of length {} in dimension {n}", v.len())));
            }
            let mut w = v.clone();
            let norm0 = gram.bilinear(&w, &w).max(0.0).sqrt();
            if norm0 == 0.0 {
                continue;
            }
            for _ in 0..2 {
                for (b, gb) in basis.iter().zip(&gbasis) {
                    let c = gb.dot(&w);
                    w.axpy(-c, b, 1.0);
                }
            }
            let norm = gram.bilinear(&w, &w).max(0.0).sqrt();
            if norm <= 1e-10 * norm0 {
                continue;
            }
            w /= norm;
            gbasis.push(gram.mul_vec(&w));
            basis.push(w);
        }
        let u = if basis.is_empty() { DMatrix::zeros(n, 0) } else { DMatrix::from_columns(&basis) };
        let gu = if gbasis.is_empty() { DMatrix::zeros(n, 0) } else { DMatrix::from_columns(&gbasis) };
        Ok(ProjectorPart { u, gu })
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        if self.rank() == 0 {
            return DVector::zeros(x.len());
        }
        &self.u * self.gu.tr_mul(x)
    }

    /// Coordinates `(G u)^T x` of the projection in the orthonormal basis.
    pub fn coefficients(&self, x: &DVector<f64>) -> DVector<f64> {
        self.gu.tr_mul(x)
    }
}

/// `P = (P_M, P_O)` acting componentwise on `H = M x O`.
#[derive(Debug, Clone)]
pub struct Projector {
    pub m: ProjectorPart,
    pub o: ProjectorPart,
    pub compatibility: RangeCompatibility,
}

impl Projector {
    pub fn zero(op: &AssimilationOperator) -> Self {
        Projector {
            m: ProjectorPart::zero(op.n_m()),
            o: ProjectorPart::zero(op.n_o()),
            compatibility: RangeCompatibility::Verified,
        }
    }

    pub fn product(m: ProjectorPart, o: ProjectorPart, compatibility: RangeCompatibility) -> Self {
        Projector { m, o, compatibility }
    }

    pub fn rank(&self) -> usize {
        self.m.rank() + self.o.rank()
    }

    pub fn is_zero(&self) -> bool {
        self.rank() == 0
    }

    pub fn apply(&self, q: &HVector) -> HVector {
        HVector::new(self.m.apply(&q.m), self.o.apply(&q.o))
    }

    /// `(I - P) q`.
    pub fn complement(&self, q: &HVector) -> HVector {
        q.sub(&self.apply(q))
    }

    /// H-orthonormal basis of `Range P` as elements of H.
    pub fn basis(&self) -> Vec<HVector> {
        let (nm, no) = (self.m.dim(), self.o.dim());
        let mut out = Vec::with_capacity(self.rank());
        for k in 0..self.m.rank() {
            out.push(HVector::new(self.m.u.column(k).into_owned(), DVector::zeros(no)));
        }
        for k in 0..self.o.rank() {
            out.push(HVector::new(DVector::zeros(nm), self.o.u.column(k).into_owned()));
        }
        out
    }

    /// `max_k ||u_k - Pi u_k|| ` over the basis, with `Pi` the projection onto
    /// the discrete range of `A`; sets the compatibility flag from it.
    pub fn verify_compatibility(&mut self, op: &AssimilationOperator, tol: f64) -> Result<f64> {
        let mut worst = 0.0f64;
        for b in self.basis() {
            let perp = op.project_range_perp(&b)?;
            worst = worst.max(op.h_norm(&perp));
        }
        self.compatibility = if worst <= tol { RangeCompatibility::Verified } else { RangeCompatibility::Violated };
        Ok(worst)
    }
}
