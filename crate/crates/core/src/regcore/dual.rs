//! The dual functional
//! `G_P(q) = 1/2 ||A^* q||_V^2 + delta ||(I - P) q||_H - (g, q)_H`
//! and its minimization.

use log::debug;
use nalgebra::{DMatrix, DVector};

use super::data::NoisyData;
use super::operator::{AssimilationOperator, HVector};
use super::projector::Projector;
use crate::error::{Admissibility, Error, Result};
use crate::numerics::{brent, DenseCholesky, RootOptions, SymmetricIndefinite};

/// Below this `||(I - P) q||_H` the functional is treated as nondifferentiable.
pub const NONSMOOTH_THRESHOLD: f64 = 1e-14;

/// A dual point `q = (lambda*, f*)` with its objective value and gradient
/// (the minimal-norm subgradient at the nonsmooth set `(I - P) q = 0`).
#[derive(Debug, Clone)]
pub struct DualIterate {
    pub lambda_star: DVector<f64>,
    pub f_star: DVector<f64>,
    pub objective: f64,
    pub grad_lambda: DVector<f64>,
    pub grad_f: DVector<f64>,
}

impl DualIterate {
    pub fn evaluate(op: &AssimilationOperator, data: &NoisyData, p: &Projector, q: HVector) -> Result<Self> {
        let parts = Parts::new(op, data, p, &q)?;
        let objective = parts.objective(data.delta);
        let grad = parts.min_norm_subgradient(op, p, data.delta);
        Ok(DualIterate {
            lambda_star: q.m,
            f_star: q.o,
            objective,
            grad_lambda: grad.m,
            grad_f: grad.o,
        })
    }

    pub fn q(&self) -> HVector {
        HVector::new(self.lambda_star.clone(), self.f_star.clone())
    }

    pub fn gradient(&self) -> HVector {
        HVector::new(self.grad_lambda.clone(), self.grad_f.clone())
    }
}

/// Pieces shared by the objective and its gradient.
struct Parts {
    /// `u* = A^* q`
    u_star: DVector<f64>,
    /// `A A^* q - g`
    r0: HVector,
    /// `(I - P) q`
    comp: HVector,
    comp_norm: f64,
    a_star_sq: f64,
    g_dot_q: f64,
}

impl Parts {
    fn new(op: &AssimilationOperator, data: &NoisyData, p: &Projector, q: &HVector) -> Result<Self> {
        data.check_dims(op)?;
        if q.m.len() != op.n_m() || q.o.len() != op.n_o() {
            return Err(Error::Dimension(format!(
                "dual point is ({}, {}), H is ({}, {})",
                q.m.len(),
                q.o.len(),
                op.n_m(),
                op.n_o()
            )));
        }
        let u_star = op.adjoint(q)?;
        let g = data.g();
        let r0 = op.apply(&u_star)?.sub(&g);
        let comp = p.complement(q);
        let comp_norm = op.h_norm(&comp);
        let a_star_sq = op.gram_v.bilinear(&u_star, &u_star);
        let g_dot_q = op.h_inner(&g, q);
        Ok(Parts { u_star, r0, comp, comp_norm, a_star_sq, g_dot_q })
    }

    fn objective(&self, delta: f64) -> f64 {
        0.5 * self.a_star_sq + delta * self.comp_norm - self.g_dot_q
    }

    fn gradient(&self, delta: f64) -> HVector {
        self.r0.axpy(delta / self.comp_norm, &self.comp)
    }

    /// Minimal-norm element of `r0 + delta (I - P) B_1` when `(I - P) q = 0`;
    /// the gradient otherwise.
    fn min_norm_subgradient(&self, op: &AssimilationOperator, p: &Projector, delta: f64) -> HVector {
        if self.comp_norm >= NONSMOOTH_THRESHOLD {
            return self.gradient(delta);
        }
        let along = p.apply(&self.r0);
        let across = self.r0.sub(&along);
        let n = op.h_norm(&across);
        let shrink = if n > delta { 1.0 - delta / n } else { 0.0 };
        along.axpy(shrink, &across)
    }
}

pub fn dual_objective(op: &AssimilationOperator, data: &NoisyData, p: &Projector, q: &HVector) -> Result<f64> {
    Ok(Parts::new(op, data, p, q)?.objective(data.delta))
}

/// H-Riesz representative `A A^* q + delta (I - P) q / ||(I - P) q|| - g` of the
/// Frechet derivative.
pub fn dual_gradient(op: &AssimilationOperator, data: &NoisyData, p: &Projector, q: &HVector) -> Result<HVector> {
    let parts = Parts::new(op, data, p, q)?;
    if parts.comp_norm < NONSMOOTH_THRESHOLD {
        return Err(Error::Nonsmooth(parts.comp_norm));
    }
    Ok(parts.gradient(data.delta))
}

/// `eps(delta) = delta / ||p||_H`.
pub fn morozov_from_dual(op: &AssimilationOperator, p: &HVector, delta: f64) -> Result<f64> {
    let n = op.h_norm(p);
    if n < 1e-14 {
        return Err(Error::InvalidArgument(format!("dual minimizer has norm {n:.3e}; expected a nonzero minimizer")));
    }
    Ok(delta / n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DualMethod {
    /// One-dimensional root search on the optimality system
    /// `(A A^* + eps (I - P)) p = g`, `eps ||(I - P) p|| = delta`.
    #[default]
    Secular,
    /// Barzilai-Borwein gradient descent with non-monotone line search.
    BarzilaiBorwein,
}

#[derive(Debug, Clone, Copy)]
pub struct DualOptions {
    pub method: DualMethod,
    /// Gradient norm target relative to `||g||_H`.
    pub tol: f64,
    pub max_iter: usize,
    /// Line-search memory of the non-monotone rule.
    pub memory: usize,
    pub gamma: f64,
}

impl Default for DualOptions {
    fn default() -> Self {
        DualOptions { method: DualMethod::Secular, tol: 1e-8, max_iter: 50_000, memory: 10, gamma: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualBranch {
    /// `(I - P) p != 0`: the discrepancy equals `delta`.
    Smooth,
    /// `(I - P) p = 0`: the discrepancy is at most `delta`.
    Nonsmooth,
}

#[derive(Debug, Clone)]
pub struct DualResult {
    pub p: DualIterate,
    /// `u = A^* p`.
    pub u: DVector<f64>,
    /// `delta / ||(I - P) p||_H` on the smooth branch.
    pub epsilon: Option<f64>,
    /// `||Au - g||_H`.
    pub discrepancy: f64,
    pub gradient_norm: f64,
    /// `| ||u||_V^2 + 2 G_P(p) |`, relative to `||u||_V^2`.
    pub identity_residual: f64,
    /// `||P(Au - g)||_H`.
    pub constraint_residual: f64,
    pub branch: DualBranch,
    pub iterations: usize,
}

/// Minimizes the dual functional. Refuses non-coercive data
/// (`||g_perp|| >= delta`).
pub fn minimize_dual(
    op: &AssimilationOperator,
    data: &NoisyData,
    p: &Projector,
    opts: DualOptions,
) -> Result<DualResult> {
    if p.m.dim() != op.n_m() || p.o.dim() != op.n_o() {
        return Err(Error::Dimension("projector does not act on H".into()));
    }
    if p.is_zero() {
        data.require_admissible(op)?;
    } else {
        data.check_dims(op)?;
        let perp_norm = data.perp_norm_or_exact(op)?;
        if perp_norm >= data.delta {
            return Err(Error::Inadmissible(Admissibility::PerpTooLarge { perp_norm, delta: data.delta }));
        }
    }
    let (q, branch, iterations) = match nonsmooth_candidate(op, data, p)? {
        Some(q) => (q, DualBranch::Nonsmooth, 0),
        None => match opts.method {
            DualMethod::Secular => secular(op, data, p)?,
            DualMethod::BarzilaiBorwein => barzilai_borwein(op, data, p, &opts)?,
        },
    };
    finish(op, data, p, q, branch, iterations, &opts)
}

fn finish(
    op: &AssimilationOperator,
    data: &NoisyData,
    p: &Projector,
    q: HVector,
    branch: DualBranch,
    iterations: usize,
    opts: &DualOptions,
) -> Result<DualResult> {
    let parts = Parts::new(op, data, p, &q)?;
    let objective = parts.objective(data.delta);
    let grad = parts.min_norm_subgradient(op, p, data.delta);
    let gradient_norm = op.h_norm(&grad);
    let g_norm = data.g_norm(op);
    if gradient_norm > opts.tol * g_norm {
        return Err(Error::IterationCap { iterations, gradient_norm });
    }
    let u = parts.u_star;
    let residual = op.apply(&u)?.sub(&data.g());
    let discrepancy = op.h_norm(&residual);
    let constraint_residual = op.h_norm(&p.apply(&residual));
    let u_sq = op.gram_v.bilinear(&u, &u);
    let identity_residual = (u_sq + 2.0 * objective).abs() / u_sq.max(f64::MIN_POSITIVE);
    let epsilon = match branch {
        DualBranch::Smooth => Some(data.delta / parts.comp_norm),
        DualBranch::Nonsmooth => None,
    };
    debug!(
        "dual minimizer: branch {branch:?}, {iterations} iterations, gradient {gradient_norm:.3e}, identity {identity_residual:.3e}"
    );
    Ok(DualResult {
        p: DualIterate {
            lambda_star: q.m,
            f_star: q.o,
            objective,
            grad_lambda: grad.m,
            grad_f: grad.o,
        },
        u,
        epsilon,
        discrepancy,
        gradient_norm,
        identity_residual,
        constraint_residual,
        branch,
        iterations,
    })
}

/// Minimizer of `1/2 ||A^* q||^2 - (g, q)` over `Range P`, returned when it
/// satisfies `||A A^* q - g|| <= delta` (then `0` lies in the subdifferential).
fn nonsmooth_candidate(op: &AssimilationOperator, data: &NoisyData, p: &Projector) -> Result<Option<HVector>> {
    let basis = p.basis();
    if basis.is_empty() {
        return Ok(None);
    }
    let g = data.g();
    let a_star: Vec<DVector<f64>> = basis.iter().map(|b| op.adjoint(b)).collect::<Result<_>>()?;
    let r = basis.len();
    let q_mat = DMatrix::from_fn(r, r, |i, j| op.gram_v.bilinear(&a_star[i], &a_star[j]));
    let rhs = DVector::from_iterator(r, basis.iter().map(|b| op.h_inner(b, &g)));
    let c = solve_small(q_mat, &rhs)?;
    let mut q = HVector::zeros(op.n_m(), op.n_o());
    let mut u = DVector::zeros(op.n_v());
    for k in 0..r {
        q = q.axpy(c[k], &basis[k]);
        u.axpy(c[k], &a_star[k], 1.0);
    }
    let disc = op.h_norm(&op.apply(&u)?.sub(&g));
    debug!("nonsmooth candidate discrepancy {disc:.6e} vs delta {:.6e}", data.delta);
    Ok(if disc <= data.delta { Some(q) } else { None })
}

fn solve_small(m: DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    match DenseCholesky::new(m.clone()) {
        Ok(ch) => Ok(ch.solve(rhs)),
        Err(_) => Ok(SymmetricIndefinite::new(m)?.solve(rhs)),
    }
}

/// For fixed `eps`, the solution of `(A A^* + eps (I - P)) p = g` is
/// `p = (g - Au + U c) / eps` with `u = u_g + u_U c`, where `u_h` is the
/// Tikhonov solution for data `h` and `c` enforces `P(Au - g) = 0`. All
/// Tikhonov solves share the cached spectral factorization.
struct SecularSystem<'a> {
    op: &'a AssimilationOperator,
    g: HVector,
    basis: Vec<HVector>,
    coef_g: DVector<f64>,
    coef_u: DMatrix<f64>,
    ug: DVector<f64>,
}

struct SecularPoint {
    residual: HVector,
    c: DVector<f64>,
    discrepancy: f64,
}

impl<'a> SecularSystem<'a> {
    fn new(op: &'a AssimilationOperator, data: &NoisyData, p: &Projector) -> Result<Self> {
        let s = op.spectral()?;
        let g = data.g();
        let basis = p.basis();
        let coef_g = s.z.tr_mul(&op.adjoint_load(&g));
        let n = s.lambda.len();
        let mut coef_u = DMatrix::zeros(n, basis.len());
        for (k, b) in basis.iter().enumerate() {
            coef_u.set_column(k, &s.z.tr_mul(&op.adjoint_load(b)));
        }
        let ug = DVector::from_iterator(basis.len(), basis.iter().map(|b| op.h_inner(b, &g)));
        Ok(SecularSystem { op, g, basis, coef_g, coef_u, ug })
    }

    fn at(&self, eps: f64) -> Result<SecularPoint> {
        let s = self.op.spectral()?;
        let w = s.lambda.map(|l| 1.0 / (eps + l));
        let r = self.basis.len();
        let mut coef = self.coef_g.component_mul(&w);
        let mut c = DVector::zeros(r);
        if r > 0 {
            let wu = DMatrix::from_fn(self.coef_u.nrows(), r, |i, j| self.coef_u[(i, j)] * w[i]);
            let m = self.coef_u.tr_mul(&wu);
            let m = (&m + m.transpose()) * 0.5;
            let b = &self.ug - self.coef_u.tr_mul(&coef);
            c = solve_small(m, &b)?;
            coef += wu * &c;
        }
        let u = &s.z * coef;
        let residual = self.op.apply(&u)?.sub(&self.g);
        let discrepancy = self.op.h_norm(&residual);
        Ok(SecularPoint { residual, c, discrepancy })
    }

    fn dual_point(&self, eps: f64, pt: &SecularPoint) -> HVector {
        let mut q = pt.residual.scale(-1.0);
        for (k, b) in self.basis.iter().enumerate() {
            q = q.axpy(pt.c[k], b);
        }
        q.scale(1.0 / eps)
    }
}

fn secular(op: &AssimilationOperator, data: &NoisyData, p: &Projector) -> Result<(HVector, DualBranch, usize)> {
    let sys = SecularSystem::new(op, data, p)?;
    let delta = data.delta;
    let f = |t: f64| -> Result<f64> { Ok((sys.at(t.exp())?.discrepancy / delta).ln()) };
    let (mut lo, mut hi) = (1e-12f64.ln(), 1e6f64.ln());
    let mut f_lo = f(lo)?;
    while f_lo >= 0.0 {
        if lo < 1e-40f64.ln() {
            return Err(Error::Bracket { lo: lo.exp(), hi: hi.exp(), e_lo: delta * f_lo.exp(), e_hi: f64::NAN, target: delta });
        }
        lo -= 10.0f64.ln() * 4.0;
        f_lo = f(lo)?;
    }
    let mut f_hi = f(hi)?;
    while f_hi <= 0.0 {
        if hi > 1e40f64.ln() {
            return Err(Error::Bracket {
                lo: lo.exp(),
                hi: hi.exp(),
                e_lo: delta * f_lo.exp(),
                e_hi: delta * f_hi.exp(),
                target: delta,
            });
        }
        hi += 10.0f64.ln() * 4.0;
        f_hi = f(hi)?;
    }
    let root = brent(f, lo, hi, f_lo, f_hi, RootOptions { xtol: 1e-14, ftol: 4.0 * f64::EPSILON, max_iter: 300 })?;
    let eps = root.x.exp();
    let pt = sys.at(eps)?;
    debug!("secular root eps = {eps:.12e} after {} iterations, discrepancy {:.3e}", root.iterations, pt.discrepancy);
    Ok((sys.dual_point(eps, &pt), DualBranch::Smooth, root.iterations))
}

fn barzilai_borwein(
    op: &AssimilationOperator,
    data: &NoisyData,
    p: &Projector,
    opts: &DualOptions,
) -> Result<(HVector, DualBranch, usize)> {
    let g = data.g();
    let g_norm = data.g_norm(op);
    let delta = data.delta;
    let target = opts.tol * g_norm;
    // best multiple of the data as a start
    let agn = op.gram_v.bilinear(&op.adjoint(&g)?, &op.adjoint(&g)?);
    let alpha0 = if agn > 0.0 { ((g_norm * g_norm - delta * g_norm) / agn).max(1e-12) } else { 1.0 };
    let mut q = g.scale(alpha0);
    let mut parts = Parts::new(op, data, p, &q)?;
    let mut history = vec![parts.objective(delta)];
    let mut step = 1.0;
    let mut prev: Option<(HVector, HVector)> = None;
    for it in 1..=opts.max_iter {
        if parts.comp_norm < 1e-10 {
            // near the nonsmooth set: either it holds the minimizer (handled
            // before the descent) or the iterate is pushed off it
            q = q.axpy(1e-6 * g_norm.max(1.0), &p.complement(&g).scale(1.0 / g_norm));
            parts = Parts::new(op, data, p, &q)?;
            prev = None;
            continue;
        }
        let grad = parts.gradient(delta);
        let gn2 = op.h_inner(&grad, &grad);
        if gn2.sqrt() <= target {
            debug!("barzilai-borwein converged after {it} iterations");
            return Ok((q, DualBranch::Smooth, it));
        }
        if let Some((q_old, grad_old)) = &prev {
            let s = q.sub(q_old);
            let y = grad.sub(grad_old);
            let sy = op.h_inner(&s, &y);
            step = if sy > 0.0 { (op.h_inner(&s, &s) / sy).clamp(1e-30, 1e30) } else { step * 2.0 };
        } else if it == 1 {
            step = 1.0 / gn2.sqrt().max(1.0);
        }
        let reference = history.iter().rev().take(opts.memory).cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut t = step;
        let mut accepted = None;
        for _ in 0..80 {
            let trial = q.axpy(-t, &grad);
            let tp = Parts::new(op, data, p, &trial)?;
            let val = tp.objective(delta);
            if val <= reference - opts.gamma * t * gn2 {
                accepted = Some((trial, tp, val));
                break;
            }
            t *= 0.5;
        }
        let Some((trial, tp, val)) = accepted else {
            return Err(Error::IterationCap { iterations: it, gradient_norm: gn2.sqrt() });
        };
        prev = Some((q, grad));
        q = trial;
        parts = tp;
        history.push(val);
    }
    let grad = parts.gradient(delta);
    Err(Error::IterationCap { iterations: opts.max_iter, gradient_norm: op.h_norm(&grad) })
}
