//! Mixed Tikhonov solve in `(u, lambda)` and the discrepancy function.

use nalgebra::DVector;

use super::data::NoisyData;
use super::operator::{AssimilationOperator, HVector, MixedRoute};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct MixedSolution {
    pub u: DVector<f64>,
    /// `lambda = Bu - ell`.
    pub lambda: DVector<f64>,
    pub epsilon: f64,
    /// `||Au - g||_H`.
    pub discrepancy: f64,
}

/// Solves the regularized mixed problem at `eps` by the default block route.
pub fn solve_mixed(op: &AssimilationOperator, data: &NoisyData, eps: f64) -> Result<MixedSolution> {
    solve_mixed_with(op, data, eps, MixedRoute::Block)
}

pub fn solve_mixed_with(
    op: &AssimilationOperator,
    data: &NoisyData,
    eps: f64,
    route: MixedRoute,
) -> Result<MixedSolution> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!("epsilon must be positive and finite, got {eps}")));
    }
    data.check_dims(op)?;
    let g = data.g();
    let (u, lambda) = match route {
        MixedRoute::Block => op.solve_block(eps, &g)?,
        _ => {
            let u = op.solve_normal(eps, &op.adjoint_load(&g), route)?;
            let lambda = op.apply(&u)?.m - &data.ell;
            (u, lambda)
        }
    };
    let discrepancy = residual_norm(op, &u, &g)?;
    Ok(MixedSolution { u, lambda, epsilon: eps, discrepancy })
}

/// `||Au - g||_H`.
pub fn residual_norm(op: &AssimilationOperator, u: &DVector<f64>, g: &HVector) -> Result<f64> {
    Ok(op.h_norm(&op.apply(u)?.sub(g)))
}

/// `dE/d eps = 2 eps (||Av||^2 + eps ||v||_V^2)` with `(A^*A + eps) v = -u`.
pub fn discrepancy_derivative(
    op: &AssimilationOperator,
    data: &NoisyData,
    sol: &MixedSolution,
) -> Result<f64> {
    discrepancy_derivative_with(op, data, sol, MixedRoute::Normal)
}

pub fn discrepancy_derivative_with(
    op: &AssimilationOperator,
    data: &NoisyData,
    sol: &MixedSolution,
    route: MixedRoute,
) -> Result<f64> {
    data.check_dims(op)?;
    let eps = sol.epsilon;
    let rhs = -op.gram_v.mul_vec(&sol.u);
    let route = if route == MixedRoute::Block { MixedRoute::Normal } else { route };
    let v = op.solve_normal(eps, &rhs, route)?;
    let av2 = op.a_norm_squared(&v)?;
    let vv = op.gram_v.bilinear(&v, &v);
    Ok(2.0 * eps * (av2 + eps * vv))
}

/// `(eps, E(eps)^{1/2})` over the given parameters.
pub fn discrepancy_curve(
    op: &AssimilationOperator,
    data: &NoisyData,
    eps: &[f64],
    route: MixedRoute,
) -> Result<Vec<(f64, f64)>> {
    eps.iter()
        .map(|&e| solve_mixed_with(op, data, e, route).map(|s| (e, s.discrepancy)))
        .collect()
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn toy() -> AssimilationOperator {
        // 4x2 toy: V = R^2, M = R^2, O = R^2, Euclidean Grams
        let i2 = DMatrix::identity(2, 2);
        let ab = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        let ac = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        AssimilationOperator::from_dense(&i2, &i2, &i2, &ab, &ac).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let op = toy();
        let data = NoisyData::new(DVector::zeros(2), DVector::zeros(2), 0.0).unwrap();
        for route in [MixedRoute::Block, MixedRoute::Normal, MixedRoute::Spectral] {
            let s = solve_mixed_with(&op, &data, 0.3, route).unwrap();
            assert_eq!(s.u.norm(), 0.0);
            assert_eq!(s.lambda.norm(), 0.0);
            assert_eq!(discrepancy_derivative(&op, &data, &s).unwrap(), 0.0);
        }
    }

    #[test]
    fn matches_dense_normal_equations() {
        let op = toy();
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0]);
        let g = DVector::from_vec(vec![0.5, -1.0, 2.0, 0.25]);
        let data = NoisyData::new(g.rows(0, 2).into_owned(), g.rows(2, 2).into_owned(), 0.1).unwrap();
        for eps in [1e-3, 0.5, 10.0] {
            let oracle = (a.transpose() * &a + DMatrix::identity(2, 2) * eps)
                .try_inverse()
                .unwrap()
                * a.transpose()
                * &g;
            let s = solve_mixed(&op, &data, eps).unwrap();
            assert!((&s.u - &oracle).norm() <= 1e-10 * oracle.norm());
            let res = (&a * &oracle - &g).norm();
            assert!((s.discrepancy - res).abs() <= 1e-10 * res);
        }
    }

    #[test]
    fn negative_epsilon_is_rejected() {
        let op = toy();
        let data = NoisyData::new(DVector::zeros(2), DVector::from_vec(vec![1.0, 0.0]), 0.1).unwrap();
        assert!(matches!(solve_mixed(&op, &data, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(solve_mixed(&op, &data, -1.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-10, 1e4, 50);
        assert_eq!(g.len(), 50);
        assert!((g[0] - 1e-10).abs() < 1e-24 && (g[49] - 1e4).abs() < 1e-8);
    }
}
