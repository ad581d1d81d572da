//! Fixed-point iteration on quadratic dual problems:
//! `q_n = argmin 1/2 ||A^* q||^2 + eps_n/2 ||q||^2 - (g, q)`,
//! `eps_{n+1} = delta / ||q_n||`.

use log::debug;
use nalgebra::DVector;

use super::data::NoisyData;
use super::mixed::solve_mixed_with;
use super::operator::{AssimilationOperator, HVector, MixedRoute};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct DemeestereOptions {
    /// Relative change of `eps_n` at which to stop.
    pub tol: f64,
    pub max_iter: usize,
    /// Iterates leaving `[lo, hi]` are reported as divergence.
    pub lo: f64,
    pub hi: f64,
    pub route: MixedRoute,
}

impl Default for DemeestereOptions {
    fn default() -> Self {
        DemeestereOptions { tol: 1e-8, max_iter: 10_000, lo: 1e-14, hi: 1e8, route: MixedRoute::Spectral }
    }
}

#[derive(Debug, Clone)]
pub struct DemeestereResult {
    pub p: HVector,
    pub u: DVector<f64>,
    pub epsilon: f64,
    pub discrepancy: f64,
    pub eps_trace: Vec<f64>,
}

pub fn demeestere_iterate(
    op: &AssimilationOperator,
    data: &NoisyData,
    opts: DemeestereOptions,
) -> Result<DemeestereResult> {
    data.require_admissible(op)?;
    let delta = data.delta;
    let g = data.g();
    // q_0 = (0, f / ||f||_O) (or g / ||g||_H when f = 0) has unit norm
    let mut eps = delta;
    let mut trace = vec![eps];
    for it in 1..=opts.max_iter {
        if !(eps >= opts.lo && eps <= opts.hi) {
            return Err(Error::Divergence(format!(
                "eps_{it} = {eps:.3e} left [{:.1e}, {:.1e}]",
                opts.lo, opts.hi
            )));
        }
        let s = solve_mixed_with(op, data, eps, opts.route)?;
        // q_n = (g - A u_n) / eps_n
        let q = g.sub(&op.apply(&s.u)?).scale(1.0 / eps);
        let next = delta / op.h_norm(&q);
        trace.push(next);
        if (next - eps).abs() <= opts.tol * next {
            debug!("demeestere converged after {it} iterations, eps = {next:.10e}");
            let s = solve_mixed_with(op, data, next, opts.route)?;
            let p = g.sub(&op.apply(&s.u)?).scale(1.0 / next);
            return Ok(DemeestereResult { p, u: s.u, epsilon: next, discrepancy: s.discrepancy, eps_trace: trace });
        }
        eps = next;
    }
    let last = trace[trace.len() - 1];
    let prev = trace[trace.len() - 2];
    Err(Error::IterationCap { iterations: opts.max_iter, gradient_norm: (last - prev).abs() / last })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Admissibility;
    use crate::regcore::morozov::{morozov_find_epsilon_with, MorozovOptions};
    use nalgebra::DMatrix;

    fn toy() -> AssimilationOperator {
        let i2 = DMatrix::identity(2, 2);
        let ab = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        let ac = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        AssimilationOperator::from_dense(&i2, &i2, &i2, &ab, &ac).unwrap()
    }

    #[test]
    fn converges_to_morozov_parameter() {
        let op = toy();
        let data = NoisyData::new(DVector::from_vec(vec![0.3, -0.2]), DVector::from_vec(vec![1.0, 0.4]), 0.3).unwrap();
        let r = demeestere_iterate(&op, &data, DemeestereOptions::default()).unwrap();
        let m = morozov_find_epsilon_with(&op, &data, MorozovOptions { tol: 1e-12, ..Default::default() }).unwrap();
        assert!((r.epsilon - m.epsilon).abs() <= 1e-6 * m.epsilon);
        // the trace moves monotonically
        let up = r.eps_trace[1] > r.eps_trace[0];
        assert!(r.eps_trace.windows(2).all(|w| (w[1] >= w[0]) == up || (w[1] - w[0]).abs() < 1e-15));
    }

    #[test]
    fn zero_data_is_rejected() {
        let op = toy();
        let data = NoisyData::new(DVector::zeros(2), DVector::zeros(2), 0.1).unwrap();
        let err = demeestere_iterate(&op, &data, DemeestereOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Inadmissible(Admissibility::BelowNoiseLevel { .. })));
    }
}
