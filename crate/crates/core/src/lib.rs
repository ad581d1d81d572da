//! Mixed Tikhonov regularization for ill-posed data assimilation problems,
//! with a discrepancy-principle parameter choice that works for operators
//! whose range is not dense, and a dual (convex) route to the same solution.

pub mod apps;
pub mod error;
pub mod fem2d;
pub mod numerics;
pub mod regcore;

pub use error::{Admissibility, Error, Result};
