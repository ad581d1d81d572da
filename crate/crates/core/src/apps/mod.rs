//! The three assimilation problems on finite-element spaces, their
//! range-complement projections, constraint projectors and data synthesis.

pub mod cauchy;
pub mod exact;
pub mod heat;
pub mod laplace;
pub mod metrics;
pub mod noise;
pub mod projectors;

use nalgebra::DVector;

use crate::fem2d::assemble::{p0_means, p1_integral};
use crate::fem2d::{DofMap, SpaceTag, TriMesh};
use crate::regcore::AssimilationOperator;

pub use cauchy::build_cauchy;
pub use exact::{ExactSolution, SolutionId};
pub use heat::{build_heat_da, HeatConfig, HeatPerp};
pub use laplace::{build_laplace_da, MorleyPerp};
pub use metrics::{ErrorNorms, SolutionErrors};
pub use noise::{synth_noise_pointwise, synth_noise_structured, StructuredNoise};
pub use projectors::{make_projector_pm0, make_projector_pm_nonadmissible, make_projector_po, ProjectorSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AppKind {
    /// Interior data for the Laplace equation.
    LaplaceDa,
    /// Cauchy data on part of the boundary for the Laplace equation.
    Cauchy,
    /// Interior data for the one-dimensional heat equation, in space-time.
    Heat,
}

impl AppKind {
    pub fn name(&self) -> &'static str {
        match self {
            AppKind::LaplaceDa => "laplace",
            AppKind::Cauchy => "cauchy",
            AppKind::Heat => "heat",
        }
    }
}

/// An assembled application: mesh, dof maps of `V`, `M`, `O` and the operator.
#[derive(Debug)]
pub struct Application {
    pub kind: AppKind,
    pub mesh: TriMesh,
    pub map_v: DofMap,
    pub map_m: DofMap,
    pub map_o: DofMap,
    pub op: AssimilationOperator,
}

impl Application {
    /// O-coordinates of the observation of `u`: triangle means on omega, or
    /// vertex values on Gamma.
    pub fn observe(&self, u: impl Fn(f64, f64) -> f64) -> DVector<f64> {
        match self.map_o.space {
            SpaceTag::P0Omega => DVector::from_vec(p0_means(&self.mesh, &self.map_o, u)),
            _ => DVector::from_iterator(
                self.map_o.n_free,
                self.map_o.entity.iter().map(|&v| {
                    let [x, y] = self.mesh.vertices[v];
                    u(x, y)
                }),
            ),
        }
    }

    /// Nodal interpolant in V.
    pub fn interpolate(&self, u: impl Fn(f64, f64) -> f64) -> DVector<f64> {
        DVector::from_iterator(
            self.map_v.n_free,
            self.map_v.entity.iter().map(|&v| {
                let [x, y] = self.mesh.vertices[v];
                u(x, y)
            }),
        )
    }

    /// Vertex values of a V-vector.
    pub fn v_vertices(&self, u: &DVector<f64>) -> Vec<f64> {
        self.map_v.expand(u.as_slice())
    }

    /// Vertex values of an M-vector (zero on constrained vertices).
    pub fn m_vertices(&self, lambda: &DVector<f64>) -> Vec<f64> {
        self.map_m.expand(lambda.as_slice())
    }

    /// `int f` over the observation set.
    pub fn o_integral(&self, f: &DVector<f64>) -> f64 {
        self.op.gram_o.mul_vec(f).sum()
    }

    /// `int_omega u` of a V-vector.
    pub fn v_integral_omega(&self, u: &DVector<f64>) -> f64 {
        p1_integral(&self.mesh, &self.v_vertices(u), true)
    }
}
