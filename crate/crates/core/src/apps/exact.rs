//! Closed-form reference solutions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fem2d::TriMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionId {
    /// `1 - x^3 + 3 x y^2`
    Poly,
    /// `sin(4 (1 - y)) e^{4x}`
    ExpSin,
    /// `cosh(pi y) cos(pi x)`, with zero normal derivative on `y = 0`.
    CoshCos,
    /// `e^{-pi^2 t} sin(pi x)` in space-time coordinates `(x, t)`.
    Caloric,
}

impl SolutionId {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "poly" => Ok(SolutionId::Poly),
            "exp-sin" => Ok(SolutionId::ExpSin),
            "cosh-cos" => Ok(SolutionId::CoshCos),
            "caloric" => Ok(SolutionId::Caloric),
            other => Err(Error::InvalidArgument(format!("unknown exact solution '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SolutionId::Poly => "poly",
            SolutionId::ExpSin => "exp-sin",
            SolutionId::CoshCos => "cosh-cos",
            SolutionId::Caloric => "caloric",
        }
    }

    fn raw(&self, x: f64, y: f64) -> f64 {
        match self {
            SolutionId::Poly => 1.0 - x.powi(3) + 3.0 * x * y * y,
            SolutionId::ExpSin => (4.0 * (1.0 - y)).sin() * (4.0 * x).exp(),
            SolutionId::CoshCos => (PI * y).cosh() * (PI * x).cos(),
            SolutionId::Caloric => (-PI * PI * y).exp() * (PI * x).sin(),
        }
    }

    fn raw_grad(&self, x: f64, y: f64) -> [f64; 2] {
        match self {
            SolutionId::Poly => [-3.0 * x * x + 3.0 * y * y, 6.0 * x * y],
            SolutionId::ExpSin => {
                let e = (4.0 * x).exp();
                let s = 4.0 * (1.0 - y);
                [4.0 * s.sin() * e, -4.0 * s.cos() * e]
            }
            SolutionId::CoshCos => [-PI * (PI * y).cosh() * (PI * x).sin(), PI * (PI * y).sinh() * (PI * x).cos()],
            SolutionId::Caloric => {
                let d = (-PI * PI * y).exp();
                [PI * d * (PI * x).cos(), -PI * PI * d * (PI * x).sin()]
            }
        }
    }
}

/// `alpha * u_id`, with `alpha` chosen so that the largest absolute vertex
/// value on the mesh is 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSolution {
    pub id: SolutionId,
    pub alpha: f64,
}

impl ExactSolution {
    pub fn new(id: SolutionId, mesh: &TriMesh) -> Result<Self> {
        let max = mesh.vertices.iter().map(|&[x, y]| id.raw(x, y).abs()).fold(0.0, f64::max);
        if max == 0.0 {
            return Err(Error::InvalidArgument(format!("{} vanishes on every vertex", id.name())));
        }
        Ok(ExactSolution { id, alpha: 1.0 / max })
    }

    pub fn with_alpha(id: SolutionId, alpha: f64) -> Self {
        ExactSolution { id, alpha }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.alpha * self.id.raw(x, y)
    }

    pub fn grad(&self, x: f64, y: f64) -> [f64; 2] {
        let g = self.id.raw_grad(x, y);
        [self.alpha * g[0], self.alpha * g[1]]
    }
}
