//! Interior data assimilation for the Laplace equation:
//! `V = H^1(Omega)`, `M = H^1_0(Omega)` with the gradient inner product,
//! `O = L^2(omega)` discretized by piecewise constants.

use log::warn;
use nalgebra::DVector;

use super::{AppKind, Application};
use crate::error::{Error, Result};
use crate::fem2d::morley::{assemble_morley_p1_grad, MorleyMatrices};
use crate::fem2d::{
    assemble_morley, assemble_p1, assemble_p1_bilinear, assemble_subdomain_mass, BilinearTerms, DofMap, SpaceTag,
    TriMesh,
};
use crate::numerics::{DenseCholesky, SparseMatrix};
use crate::regcore::{AssimilationOperator, HVector, PerpComponent, RangePerpBackend};

pub fn build_laplace_da(mesh: TriMesh) -> Result<Application> {
    mesh.validate()?;
    if !mesh.in_omega.iter().any(|&f| f) {
        return Err(Error::EmptyRegion("mesh has no omega triangles".into()));
    }
    let map_v = DofMap::new(&mesh, SpaceTag::P1)?;
    let map_m = DofMap::new(&mesh, SpaceTag::P1ZeroBoundary)?;
    let map_o = DofMap::new(&mesh, SpaceTag::P0Omega)?;
    let v = assemble_p1(&mesh, &map_v)?;
    let gram_v = v.stiffness.add(1.0, &v.mass, 1.0);
    let gram_m = assemble_p1(&mesh, &map_m)?.stiffness;
    let b_form = assemble_p1_bilinear(&mesh, &map_m, &map_v, BilinearTerms::STIFFNESS, false);
    let obs = assemble_subdomain_mass(&mesh, &map_v, &map_o)?;
    let op = AssimilationOperator::new(gram_v, gram_m, obs.gram, b_form, obs.coupling)?;
    Ok(Application { kind: AppKind::LaplaceDa, mesh, map_v, map_m, map_o, op })
}

/// Range-complement projection through the clamped fourth-order problem
/// `(D lambda, D mu) + (grad lambda, grad mu) = (f, D mu) + (grad ell, grad mu)`
/// on omega (Morley element, `D` the element-wise Laplacian), with
/// `f_perp = D lambda_perp`. The left-hand Laplacian form is assembled as the
/// broken Hessian form, which agrees with it on `H^2_0` and is coercive on the
/// Morley space; the native identity uses the Hessian energy.
pub struct MorleyPerp {
    n_m: usize,
    n_o: usize,
    /// Factor of `biharmonic + grad`; `None` when the space has no dofs.
    system: Option<DenseCholesky>,
    biharmonic: SparseMatrix,
    grad: SparseMatrix,
    load: SparseMatrix,
    /// Morley rows against P1 `M` columns.
    grad_m: SparseMatrix,
    /// `(morley dof, M dof)` for free Morley vertex dofs.
    vertex_to_m: Vec<(usize, usize)>,
    /// `(O dof, [(morley dof, Laplacian of that basis function)])`.
    laplacians: Vec<(usize, Vec<(usize, f64)>)>,
}

impl MorleyPerp {
    pub fn new(app: &Application) -> Result<Self> {
        if app.kind != AppKind::LaplaceDa {
            return Err(Error::InvalidArgument("the Morley projection applies to the Laplace problem".into()));
        }
        let mesh = &app.mesh;
        let map = DofMap::new(mesh, SpaceTag::MorleyClamped)?;
        let (n_m, n_o) = (app.map_m.n_free, app.map_o.n_free);
        let mm: MorleyMatrices = match assemble_morley(mesh, &map, &app.map_o) {
            Ok(mm) => mm,
            Err(Error::Mesh(msg)) => {
                warn!("Morley space is empty ({msg}); the projection returns zero");
                return Ok(MorleyPerp {
                    n_m,
                    n_o,
                    system: None,
                    biharmonic: SparseMatrix::zeros(0, 0),
                    grad: SparseMatrix::zeros(0, 0),
                    load: SparseMatrix::zeros(0, n_o),
                    grad_m: SparseMatrix::zeros(0, n_m),
                    vertex_to_m: Vec::new(),
                    laplacians: Vec::new(),
                });
            }
            Err(e) => return Err(e),
        };
        let grad_m = assemble_morley_p1_grad(mesh, &map, &app.map_m, &mm);
        let system = DenseCholesky::from_sparse(&mm.biharmonic.add(1.0, &mm.grad, 1.0))?;
        let nv = mesh.n_vertices();
        let vertex_to_m = map
            .entity
            .iter()
            .enumerate()
            .filter(|(_, &e)| e < nv)
            .filter_map(|(k, &e)| app.map_m.dof(e).map(|m| (k, m)))
            .collect();
        let laplacians = mm
            .elements
            .iter()
            .filter_map(|(t, el)| {
                let o = app.map_o.dof(*t)?;
                let terms = (0..6).filter_map(|i| map.dof(el.entities[i]).map(|d| (d, el.laplacian(i)))).collect();
                Some((o, terms))
            })
            .collect();
        Ok(MorleyPerp {
            n_m,
            n_o,
            system: Some(system),
            biharmonic: mm.biharmonic,
            grad: mm.grad,
            load: mm.laplace_load,
            grad_m,
            vertex_to_m,
            laplacians,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.system.as_ref().map_or(0, |s| s.dim())
    }
}

impl RangePerpBackend for MorleyPerp {
    fn name(&self) -> &str {
        "morley"
    }

    fn project(&self, _op: &AssimilationOperator, g: &HVector) -> Result<PerpComponent> {
        if g.m.len() != self.n_m || g.o.len() != self.n_o {
            return Err(Error::Dimension("data does not match the Morley backend".into()));
        }
        let Some(system) = &self.system else {
            return Ok(PerpComponent { perp: HVector::zeros(self.n_m, self.n_o), native_identity: Some((0.0, 0.0)) });
        };
        let rhs = self.load.mul_vec(&g.o) + self.grad_m.mul_vec(&g.m);
        let lam = system.solve(&rhs);
        let mut m = DVector::zeros(self.n_m);
        for &(k, d) in &self.vertex_to_m {
            m[d] = lam[k];
        }
        let mut o = DVector::zeros(self.n_o);
        for (d, terms) in &self.laplacians {
            o[*d] = terms.iter().map(|&(k, c)| lam[k] * c).sum();
        }
        let lhs = self.grad.bilinear(&lam, &lam) + self.biharmonic.bilinear(&lam, &lam);
        let rhs_val = lam.dot(&rhs);
        Ok(PerpComponent { perp: HVector::new(m, o), native_identity: Some((lhs, rhs_val)) })
    }
}
