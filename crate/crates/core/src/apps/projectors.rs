//! Constraint projectors for the Laplace interior problem.

use nalgebra::DVector;

use super::{AppKind, Application};
use crate::error::{Error, Result};
use crate::fem2d::{assemble_p1, DofMap, SpaceTag};
use crate::numerics::smallest_eigenpairs;
use crate::regcore::{Projector, ProjectorPart, RangeCompatibility};

/// `P_O f = (1/|omega|) (int_omega f) 1_omega`.
pub fn make_projector_po(app: &Application) -> Result<ProjectorPart> {
    let one = DVector::from_element(app.op.n_o(), 1.0);
    ProjectorPart::from_vectors(&[one], &app.op.gram_o)
}

/// M-orthogonal projector onto the first `n + 1` Dirichlet eigenfunctions of
/// `-Laplace` on `Omega \ closure(omega)`, extended by zero into omega.
pub fn make_projector_pm0(app: &Application, n: usize) -> Result<ProjectorPart> {
    require_laplace(app)?;
    eigen_part(app, SpaceTag::P1ZeroOutsideComplement, n)
}

/// Same construction with eigenfunctions on the whole of `Omega`; the result
/// is not contained in the closure of the range.
pub fn make_projector_pm_nonadmissible(app: &Application, n: usize) -> Result<ProjectorPart> {
    require_laplace(app)?;
    eigen_part(app, SpaceTag::P1ZeroBoundary, n)
}

fn require_laplace(app: &Application) -> Result<()> {
    if app.kind != AppKind::LaplaceDa {
        return Err(Error::InvalidArgument(format!(
            "eigenfunction projectors are defined for the Laplace problem, not {}",
            app.kind.name()
        )));
    }
    Ok(())
}

fn eigen_part(app: &Application, space: SpaceTag, n: usize) -> Result<ProjectorPart> {
    let map = DofMap::new(&app.mesh, space)?;
    if map.n_free <= n {
        return Err(Error::Mesh(format!("{n} + 1 eigenfunctions requested from a {}-dof space", map.n_free)));
    }
    let mats = assemble_p1(&app.mesh, &map)?;
    let pairs = smallest_eigenpairs(&mats.stiffness, &mats.mass, n + 1)?;
    let vectors: Vec<DVector<f64>> = (0..pairs.len())
        .map(|k| {
            let vertex = map.expand(pairs.vector(k).as_slice());
            DVector::from_vec(app.map_m.restrict(&vertex))
        })
        .collect();
    let part = ProjectorPart::from_vectors(&vectors, &app.op.gram_m)?;
    if part.rank() != n + 1 {
        return Err(Error::SolverFailure { iterations: 0, residual: (n + 1 - part.rank()) as f64 });
    }
    Ok(part)
}

/// Which constraint projector to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectorSpec {
    None,
    /// `(0, P_O)`.
    PO,
    /// `(P_M^0, P_O)` with `n + 1` eigenfunctions.
    P0 { n: usize },
    /// `(P_M, P_O)` with eigenfunctions on the whole domain.
    P { n: usize },
}

impl ProjectorSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let n = || -> Result<usize> {
            arg.unwrap_or("4").parse().map_err(|_| Error::Parse(format!("bad projector size in '{s}'")))
        };
        match head {
            "none" => Ok(ProjectorSpec::None),
            "po" => Ok(ProjectorSpec::PO),
            "p0" => Ok(ProjectorSpec::P0 { n: n()? }),
            "p" => Ok(ProjectorSpec::P { n: n()? }),
            _ => Err(Error::Parse(format!("unknown projector '{s}' (none, po, p0[:N], p[:N])"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            ProjectorSpec::None => "none".into(),
            ProjectorSpec::PO => "po".into(),
            ProjectorSpec::P0 { n } => format!("p0:{n}"),
            ProjectorSpec::P { n } => format!("p:{n}"),
        }
    }

    pub fn build(&self, app: &Application) -> Result<Projector> {
        let zero_m = || ProjectorPart::zero(app.op.n_m());
        Ok(match *self {
            ProjectorSpec::None => Projector::zero(&app.op),
            ProjectorSpec::PO => Projector::product(zero_m(), make_projector_po(app)?, RangeCompatibility::Verified),
            ProjectorSpec::P0 { n } => Projector::product(
                make_projector_pm0(app, n)?,
                make_projector_po(app)?,
                RangeCompatibility::Verified,
            ),
            ProjectorSpec::P { n } => Projector::product(
                make_projector_pm_nonadmissible(app, n)?,
                make_projector_po(app)?,
                RangeCompatibility::Violated,
            ),
        })
    }
}
