//! Discrepancy-principle parameter choice: the unique `eps` with
//! `||A u_eps - g||_H = delta`, by safeguarded Newton in `log eps`.

use log::debug;

use super::data::NoisyData;
use super::mixed::{discrepancy_derivative_with, solve_mixed_with, MixedSolution};
use super::operator::{AssimilationOperator, MixedRoute};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct MorozovOptions {
    pub tol: f64,
    pub lo: f64,
    pub hi: f64,
    pub max_iter: usize,
    pub route: MixedRoute,
}

impl Default for MorozovOptions {
    fn default() -> Self {
        MorozovOptions {
            tol: 1e-6,
            lo: 1e-12,
            hi: 1e6,
            max_iter: 200,
            route: MixedRoute::Spectral,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MorozovResult {
    pub epsilon: f64,
    pub solution: MixedSolution,
    pub iterations: usize,
}

pub fn morozov_find_epsilon(op: &AssimilationOperator, data: &NoisyData, tol: f64) -> Result<MorozovResult> {
    morozov_find_epsilon_with(op, data, MorozovOptions { tol, ..Default::default() })
}

pub fn morozov_find_epsilon_with(
    op: &AssimilationOperator,
    data: &NoisyData,
    opts: MorozovOptions,
) -> Result<MorozovResult> {
    data.require_admissible(op)?;
    let delta = data.delta;
    let target = 2.0 * delta.ln();
    let eval = |t: f64| -> Result<(MixedSolution, f64)> {
        let s = solve_mixed_with(op, data, t.exp(), opts.route)?;
        let f = 2.0 * s.discrepancy.max(f64::MIN_POSITIVE).ln() - target;
        Ok((s, f))
    };
    let (mut lo, mut hi) = (opts.lo.ln(), opts.hi.ln());
    let (s_lo, f_lo) = eval(lo)?;
    let (s_hi, f_hi) = eval(hi)?;
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(Error::Bracket {
            lo: opts.lo,
            hi: opts.hi,
            e_lo: s_lo.discrepancy,
            e_hi: s_hi.discrepancy,
            target: delta,
        });
    }
    let converged = |s: &MixedSolution| (s.discrepancy - delta).abs() <= opts.tol * delta;
    if converged(&s_lo) {
        return Ok(MorozovResult { epsilon: s_lo.epsilon, solution: s_lo, iterations: 0 });
    }
    if converged(&s_hi) {
        return Ok(MorozovResult { epsilon: s_hi.epsilon, solution: s_hi, iterations: 0 });
    }

    let g_norm = data.g_norm(op);
    let mut t = (delta * delta / (g_norm * g_norm)).ln().clamp(lo, hi);
    for it in 1..=opts.max_iter {
        let (s, f) = eval(t)?;
        if converged(&s) {
            debug!("morozov converged after {it} iterations at eps = {:.6e}", s.epsilon);
            return Ok(MorozovResult { epsilon: s.epsilon, solution: s, iterations: it });
        }
        if f < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        // d/dt ln E(e^t) = eps E'(eps) / E
        let de = discrepancy_derivative_with(op, data, &s, opts.route)?;
        let e = s.discrepancy * s.discrepancy;
        let slope = s.epsilon * de / e;
        let newton = t - f / slope;
        t = if slope > 0.0 && newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-15 * (1.0 + t.abs()) {
            let (s, _) = eval(t)?;
            return Ok(MorozovResult { epsilon: s.epsilon, solution: s, iterations: it });
        }
    }
    let (s, _) = eval(t)?;
    Err(Error::IterationCap {
        iterations: opts.max_iter,
        gradient_norm: (s.discrepancy - delta).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Admissibility;
    use nalgebra::{DMatrix, DVector};

    fn toy() -> AssimilationOperator {
        let i2 = DMatrix::identity(2, 2);
        let ab = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        let ac = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        AssimilationOperator::from_dense(&i2, &i2, &i2, &ab, &ac).unwrap()
    }

    #[test]
    fn data_below_noise_level_is_rejected() {
        let op = toy();
        let data = NoisyData::new(DVector::zeros(2), DVector::from_vec(vec![0.05, 0.0]), 0.1).unwrap();
        let err = morozov_find_epsilon(&op, &data, 1e-8).unwrap_err();
        assert!(matches!(err, Error::Inadmissible(Admissibility::BelowNoiseLevel { .. })));
        assert!(err.to_string().contains("data below noise level"));
    }

    #[test]
    fn root_satisfies_discrepancy() {
        let op = toy();
        let data = NoisyData::new(DVector::from_vec(vec![0.3, -0.2]), DVector::from_vec(vec![1.0, 0.4]), 0.3).unwrap();
        for route in [MixedRoute::Spectral, MixedRoute::Normal, MixedRoute::Block] {
            let opts = MorozovOptions { tol: 1e-10, route, ..Default::default() };
            let r = morozov_find_epsilon_with(&op, &data, opts).unwrap();
            assert!((r.solution.discrepancy - 0.3).abs() <= 1e-10 * 0.3);
        }
    }
}
