//! Triangulations of the unit square and the finite-element matrices used by
//! the applications: P1 stiffness and mass, observation couplings, boundary
//! mass and the Morley fourth-order element.

pub mod assemble;
pub mod dofs;
pub mod io;
pub mod mesh;
pub mod morley;
pub mod quadrature;

pub use assemble::{
    assemble_boundary_mass, assemble_p1, assemble_p1_bilinear, assemble_subdomain_mass, BilinearTerms, P1Matrices,
    SubdomainMass,
};
pub use dofs::{DofMap, SpaceTag};
pub use mesh::{crossed_rectangle, generate_mesh, BoundaryEdge, Circle, EdgeMarker, OmegaSpec, TriMesh};
pub use morley::{assemble_morley, MorleyMatrices};
