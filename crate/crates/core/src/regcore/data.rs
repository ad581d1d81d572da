//! Noisy data `g = (ell, f)` with its noise level and the admissibility check.

use nalgebra::DVector;

use super::operator::{AssimilationOperator, HVector};
use super::perp::RangePerpBackend;
use crate::error::{Admissibility, Error, Result};

/// Noisy data `g = (ell, f)` and noise amplitude `delta`.
#[derive(Debug, Clone)]
pub struct NoisyData {
    pub ell: DVector<f64>,
    pub f: DVector<f64>,
    pub delta: f64,
    /// `||g_perp||_H`, once computed.
    pub perp_norm: Option<f64>,
}

impl NoisyData {
    pub fn new(ell: DVector<f64>, f: DVector<f64>, delta: f64) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::InvalidArgument(format!("noise level must be finite and nonnegative, got {delta}")));
        }
        Ok(NoisyData { ell, f, delta, perp_norm: None })
    }

    /// Data with `ell = 0`.
    pub fn observation(op: &AssimilationOperator, f: DVector<f64>, delta: f64) -> Result<Self> {
        if f.len() != op.n_o() {
            return Err(Error::Dimension(format!("observation has {} entries, O has {}", f.len(), op.n_o())));
        }
        Self::new(DVector::zeros(op.n_m()), f, delta)
    }

    pub fn g(&self) -> HVector {
        HVector::new(self.ell.clone(), self.f.clone())
    }

    /// `||g||_H^2 = ||ell||_M^2 + ||f||_O^2`.
    pub fn g_norm(&self, op: &AssimilationOperator) -> f64 {
        (op.gram_m.bilinear(&self.ell, &self.ell) + op.gram_o.bilinear(&self.f, &self.f))
            .max(0.0)
            .sqrt()
    }

    pub fn check_dims(&self, op: &AssimilationOperator) -> Result<()> {
        if self.ell.len() != op.n_m() || self.f.len() != op.n_o() {
            return Err(Error::Dimension(format!(
                "data is ({}, {}), operator expects ({}, {})",
                self.ell.len(),
                self.f.len(),
                op.n_m(),
                op.n_o()
            )));
        }
        Ok(())
    }

    /// The cached perp norm, or the exact discrete one computed now.
    pub fn perp_norm_or_exact(&self, op: &AssimilationOperator) -> Result<f64> {
        match self.perp_norm {
            Some(p) => Ok(p),
            None => Ok(op.h_norm(&op.project_range_perp(&self.g())?)),
        }
    }

    /// Checks `||g_perp|| < delta < ||g||`.
    pub fn require_admissible(&self, op: &AssimilationOperator) -> Result<()> {
        self.check_dims(op)?;
        let g_norm = self.g_norm(op);
        if g_norm <= self.delta {
            return Err(Error::Inadmissible(Admissibility::BelowNoiseLevel { g_norm, delta: self.delta }));
        }
        let perp_norm = self.perp_norm_or_exact(op)?;
        if perp_norm >= self.delta {
            return Err(Error::Inadmissible(Admissibility::PerpTooLarge { perp_norm, delta: self.delta }));
        }
        Ok(())
    }
}

/// Margins of `||g_perp|| < delta < ||g||`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub g_norm: f64,
    pub perp_norm: f64,
    pub delta: f64,
    /// `delta - ||g_perp||`.
    pub lower_margin: f64,
    /// `||g|| - delta`.
    pub upper_margin: f64,
    pub perp: HVector,
    /// `(||lambda_perp||^2 + ||f_perp||^2, (ell, lambda_perp)_M + (f, f_perp)_O)`,
    /// measured in the backend's own norms.
    pub identity: Option<(f64, f64)>,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.lower_margin > 0.0 && self.upper_margin > 0.0
    }

    /// The failing inequality, if any (the upper one is reported first).
    pub fn violation(&self) -> Option<Admissibility> {
        if self.upper_margin <= 0.0 {
            Some(Admissibility::BelowNoiseLevel { g_norm: self.g_norm, delta: self.delta })
        } else if self.lower_margin <= 0.0 {
            Some(Admissibility::PerpTooLarge { perp_norm: self.perp_norm, delta: self.delta })
        } else {
            None
        }
    }

    pub fn identity_relative_error(&self) -> Option<f64> {
        self.identity.map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE))
    }
}

/// Computes `g_perp` through `backend` and both margins of the admissibility
/// inequality. Stores the perp norm in `data`.
pub fn check_admissible(
    op: &AssimilationOperator,
    data: &mut NoisyData,
    backend: &dyn RangePerpBackend,
) -> Result<AdmissibilityReport> {
    data.check_dims(op)?;
    let comp = backend.project(op, &data.g())?;
    // a backend with its own norms reports the perp norm in those norms
    let perp_norm = match comp.native_identity {
        Some((sq, _)) => sq.max(0.0).sqrt(),
        None => op.h_norm(&comp.perp),
    };
    data.perp_norm = Some(perp_norm);
    let g_norm = data.g_norm(op);
    let identity = comp.native_identity.or_else(|| {
        let lhs = op.h_inner(&comp.perp, &comp.perp);
        let rhs = op.h_inner(&data.g(), &comp.perp);
        Some((lhs, rhs))
    });
    Ok(AdmissibilityReport {
        g_norm,
        perp_norm,
        delta: data.delta,
        lower_margin: data.delta - perp_norm,
        upper_margin: g_norm - data.delta,
        perp: comp.perp,
        identity,
    })
}
