//! Sparse storage, linear solvers, root finding and the generalized eigensolver.

pub mod eigen;
pub mod roots;
pub mod solve;
pub mod sparse;

pub use eigen::{smallest_eigenpairs, EigenPairs};
pub use roots::{brent, Root, RootOptions};
pub use solve::{solve_spd, solve_symmetric_indefinite, DenseCholesky, SymmetricIndefinite};
pub use sparse::{SparseMatrix, TripletBuilder};
