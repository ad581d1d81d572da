//! Synthetic noisy data.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::exact::ExactSolution;
use super::Application;
use crate::error::{Error, Result};
use crate::regcore::{HVector, NoisyData, RangePerpBackend};

/// Adds a uniform(-1, 1) perturbation per O dof, rescaled so that
/// `||f^delta - f||_O = delta_r ||f||_O`; `ell^delta = 0` and
/// `delta = delta_r ||f||_O`.
pub fn synth_noise_pointwise(app: &Application, exact: &ExactSolution, delta_r: f64, seed: u64) -> Result<NoisyData> {
    if !(delta_r > 0.0) {
        return Err(Error::InvalidArgument(format!("relative noise level must be positive, got {delta_r}")));
    }
    let f = app.observe(|x, y| exact.value(x, y));
    let f_norm = app.op.o_norm(&f);
    if f_norm == 0.0 {
        return Err(Error::InvalidArgument("exact observation is zero".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = DVector::from_fn(f.len(), |_, _| rng.random_range(-1.0..1.0));
    let n_norm = app.op.o_norm(&noise);
    let delta = delta_r * f_norm;
    let f_delta = f + noise * (delta / n_norm);
    NoisyData::observation(&app.op, f_delta, delta)
}

/// Data `g + alpha g_par + beta g_perp` with `g_par` in the range and
/// `g_perp` in its complement, tuned so that the perturbed data is at distance
/// `delta` from `g` and its complement has norm `delta / 2`.
#[derive(Debug, Clone)]
pub struct StructuredNoise {
    pub data: NoisyData,
    pub alpha: f64,
    pub beta: f64,
    pub g_par: HVector,
    pub g_perp: HVector,
    /// `||(g^delta)_perp||_H` as produced by the backend.
    pub perp_norm: f64,
}

pub fn synth_noise_structured(
    app: &Application,
    exact: &ExactSolution,
    delta: f64,
    backend: &dyn RangePerpBackend,
) -> Result<StructuredNoise> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("noise level must be positive, got {delta}")));
    }
    let op = &app.op;
    let g = HVector::new(DVector::zeros(op.n_m()), app.observe(|x, y| exact.value(x, y)));
    let w = app.interpolate(|x, y| (x * x + y * y) / 4.0);
    let g_par = op.apply(&w)?;
    let indicator = app.observe(|x, y| if x * x + y * y > 1.0 { 1.0 } else { 0.0 });
    let g_perp = backend.project(op, &HVector::new(DVector::zeros(op.n_m()), indicator))?.perp;
    let a = backend.project(op, &g)?.perp;
    let bb = op.h_inner(&g_perp, &g_perp);
    if bb == 0.0 {
        return Err(Error::InvalidArgument("the indicator has no component outside the range".into()));
    }
    let beta = positive_root(bb, op.h_inner(&a, &g_perp), op.h_inner(&a, &a) - 0.25 * delta * delta)
        .ok_or_else(|| Error::InvalidArgument(format!("no beta > 0 gives a complement of norm {}", delta / 2.0)))?;
    let pp = op.h_inner(&g_par, &g_par);
    let alpha = positive_root(pp, beta * op.h_inner(&g_par, &g_perp), beta * beta * bb - delta * delta)
        .ok_or_else(|| Error::InvalidArgument("no alpha > 0 reaches the noise level".into()))?;
    let gd = g.axpy(alpha, &g_par).axpy(beta, &g_perp);
    let perp_norm = op.h_norm(&a.axpy(beta, &g_perp));
    let data = NoisyData::new(gd.m, gd.o, delta)?;
    Ok(StructuredNoise { data, alpha, beta, g_par, g_perp, perp_norm })
}

/// Largest root of `a x^2 + 2 b x + c`, if positive.
fn positive_root(a: f64, b: f64, c: f64) -> Option<f64> {
    let disc = b * b - a * c;
    if disc < 0.0 {
        return None;
    }
    let x = (-b + disc.sqrt()) / a;
    (x > 0.0).then_some(x)
}
