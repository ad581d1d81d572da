//! Projection onto `(Range A)^perp` behind a backend trait, so applications
//! can supply their own fourth-order characterization.

use super::operator::{AssimilationOperator, HVector};
use crate::error::Result;

/// Output of a range-complement projection.
#[derive(Debug, Clone)]
pub struct PerpComponent {
    pub perp: HVector,
    /// Identity `||g_perp||^2 = (g, g_perp)` evaluated in the backend's native
    /// norms, when those differ from the H norm of the returned coordinates.
    pub native_identity: Option<(f64, f64)>,
}

pub trait RangePerpBackend: Send + Sync {
    fn name(&self) -> &str;
    fn project(&self, op: &AssimilationOperator, g: &HVector) -> Result<PerpComponent>;
}

/// Exact discrete projection: residual of the H-weighted least-squares fit of
/// `g` by `Au`, from an orthonormal basis of the weighted range.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactRangePerp;

impl RangePerpBackend for ExactRangePerp {
    fn name(&self) -> &str {
        "exact"
    }

    fn project(&self, op: &AssimilationOperator, g: &HVector) -> Result<PerpComponent> {
        Ok(PerpComponent { perp: op.project_range_perp(g)?, native_identity: None })
    }
}
