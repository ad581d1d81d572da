//! Mixed Tikhonov regularization, the discrepancy principle and its dual.

pub mod data;
pub mod demeestere;
pub mod dual;
pub mod mixed;
pub mod morozov;
pub mod operator;
pub mod perp;
pub mod projector;

pub use data::{check_admissible, AdmissibilityReport, NoisyData};
pub use demeestere::{demeestere_iterate, DemeestereOptions, DemeestereResult};
pub use dual::{
    dual_gradient, dual_objective, minimize_dual, morozov_from_dual, DualBranch, DualIterate, DualMethod,
    DualOptions, DualResult,
};
pub use mixed::{
    discrepancy_curve, discrepancy_derivative, discrepancy_derivative_with, log_grid, residual_norm, solve_mixed,
    solve_mixed_with, MixedSolution,
};
pub use morozov::{morozov_find_epsilon, morozov_find_epsilon_with, MorozovOptions, MorozovResult};
pub use operator::{AssimilationOperator, HVector, MixedRoute};
pub use perp::{ExactRangePerp, PerpComponent, RangePerpBackend};
pub use projector::{Projector, ProjectorPart, RangeCompatibility};
