//! Cauchy problem for the Laplace equation: `u` and `d_nu u = 0` known on
//! Gamma. `V = H^1(Omega)`, `M = {lambda in H^1, lambda = 0 on Gamma~}` with
//! the gradient inner product, `O = L^2(Gamma)`.

use super::{AppKind, Application};
use crate::error::Result;
use crate::fem2d::{
    assemble_boundary_mass, assemble_p1, assemble_p1_bilinear, generate_mesh, BilinearTerms, DofMap, EdgeMarker,
    OmegaSpec, SpaceTag,
};
use crate::regcore::AssimilationOperator;

/// Gamma is the union of the first `4 * gamma_fraction` sides, counted
/// counterclockwise from the bottom side.
pub fn build_cauchy(n: usize, gamma_fraction: f64) -> Result<Application> {
    let mesh = generate_mesh(n, &OmegaSpec::BoundaryPartition { gamma_fraction })?;
    let map_v = DofMap::new(&mesh, SpaceTag::P1)?;
    let map_m = DofMap::new(&mesh, SpaceTag::P1ZeroGammaTilde)?;
    let map_o = DofMap::new(&mesh, SpaceTag::P1Gamma)?;
    let v = assemble_p1(&mesh, &map_v)?;
    let gram_v = v.stiffness.add(1.0, &v.mass, 1.0);
    let gram_m = assemble_p1(&mesh, &map_m)?.stiffness;
    let b_form = assemble_p1_bilinear(&mesh, &map_m, &map_v, BilinearTerms::STIFFNESS, false);
    let bm = assemble_boundary_mass(&mesh, EdgeMarker::Gamma)?;
    let gram_o = bm.select(&map_o.entity, &map_o.entity);
    let c_form = bm.select(&map_o.entity, &map_v.entity);
    let op = AssimilationOperator::new(gram_v, gram_m, gram_o, b_form, c_form)?;
    Ok(Application { kind: AppKind::Cauchy, mesh, map_v, map_m, map_o, op })
}
