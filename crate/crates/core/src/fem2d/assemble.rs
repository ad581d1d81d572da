//! P1 and P0 assembly: stiffness, mass, observation couplings, boundary
//! mass, loads and error integrals.

use super::dofs::{DofMap, SpaceTag};
use super::mesh::{EdgeMarker, TriMesh};
use super::quadrature::{gauss3, gauss7, map_point};
use crate::error::{Error, Result};
use crate::numerics::{SparseMatrix, TripletBuilder};

/// Gradients of the three barycentric basis functions and the area.
pub fn p1_gradients(mesh: &TriMesh, t: usize) -> ([[f64; 2]; 3], f64) {
    let [a, b, c] = mesh.triangles[t].map(|i| mesh.vertices[i]);
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let area = 0.5 * det;
    let g = [
        [(b[1] - c[1]) / det, (c[0] - b[0]) / det],
        [(c[1] - a[1]) / det, (a[0] - c[0]) / det],
        [(a[1] - b[1]) / det, (b[0] - a[0]) / det],
    ];
    (g, area)
}

fn corners(mesh: &TriMesh, t: usize) -> [[f64; 2]; 3] {
    mesh.triangles[t].map(|i| mesh.vertices[i])
}

/// Coefficients of the P1 bilinear form
/// `mass * (u, v) + dx * (u_x, v_x) + dy * (u_y, v_y) + u_test_dy * (u, v_y)`,
/// with `u` the trial and `v` the test function.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BilinearTerms {
    pub mass: f64,
    pub dx: f64,
    pub dy: f64,
    pub trial_test_dy: f64,
}

impl BilinearTerms {
    pub const H1: BilinearTerms = BilinearTerms { mass: 1.0, dx: 1.0, dy: 1.0, trial_test_dy: 0.0 };
    pub const STIFFNESS: BilinearTerms = BilinearTerms { mass: 0.0, dx: 1.0, dy: 1.0, trial_test_dy: 0.0 };
    pub const MASS: BilinearTerms = BilinearTerms { mass: 1.0, dx: 0.0, dy: 0.0, trial_test_dy: 0.0 };
}

/// Assembles a P1 bilinear form with rows indexed by `test` dofs and
/// columns by `trial` dofs, integrating over triangles covered by `test`
/// (and restricted to omega if `omega_only`).
pub fn assemble_p1_bilinear(
    mesh: &TriMesh,
    test: &DofMap,
    trial: &DofMap,
    terms: BilinearTerms,
    omega_only: bool,
) -> SparseMatrix {
    let mut tb = TripletBuilder::with_capacity(test.n_free, trial.n_free, 9 * mesh.n_triangles());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if (omega_only && !mesh.in_omega[t]) || !test.covers(mesh, t) || !trial.covers(mesh, t) {
            continue;
        }
        let (g, area) = p1_gradients(mesh, t);
        for i in 0..3 {
            let Some(r) = test.dof(tri[i]) else { continue };
            for j in 0..3 {
                let Some(c) = trial.dof(tri[j]) else { continue };
                let m = if i == j { area / 6.0 } else { area / 12.0 };
                let v = terms.mass * m
                    + terms.dx * g[i][0] * g[j][0] * area
                    + terms.dy * g[i][1] * g[j][1] * area
                    + terms.trial_test_dy * g[i][1] * area / 3.0;
                tb.push(r, c, v);
            }
        }
    }
    let same = std::ptr::eq(test, trial) && terms.trial_test_dy == 0.0;
    if same {
        tb.build_symmetric()
    } else {
        tb.build()
    }
}

/// P1 stiffness and mass matrices on the free dofs of `map`.
#[derive(Debug, Clone)]
pub struct P1Matrices {
    pub stiffness: SparseMatrix,
    pub mass: SparseMatrix,
}

pub fn assemble_p1(mesh: &TriMesh, map: &DofMap) -> Result<P1Matrices> {
    if !map.is_p1() {
        return Err(Error::InvalidArgument(format!("{:?} is not a P1 space", map.space)));
    }
    Ok(P1Matrices {
        stiffness: assemble_p1_bilinear(mesh, map, map, BilinearTerms::STIFFNESS, false),
        mass: assemble_p1_bilinear(mesh, map, map, BilinearTerms::MASS, false),
    })
}

/// The observation coupling `(Cu, g)_O = g^T coupling u` and the O Gram matrix.
#[derive(Debug, Clone)]
pub struct SubdomainMass {
    pub coupling: SparseMatrix,
    pub gram: SparseMatrix,
}

pub fn assemble_subdomain_mass(mesh: &TriMesh, map_v: &DofMap, map_o: &DofMap) -> Result<SubdomainMass> {
    if mesh.omega_area() <= 0.0 {
        return Err(Error::EmptyRegion("no omega triangles".into()));
    }
    match map_o.space {
        SpaceTag::P0Omega => {
            let mut tc = TripletBuilder::new(map_o.n_free, map_v.n_free);
            let mut diag = vec![0.0; map_o.n_free];
            for (t, tri) in mesh.triangles.iter().enumerate() {
                let Some(o) = map_o.dof(t) else { continue };
                let area = mesh.area(t);
                diag[o] = area;
                for &v in tri {
                    if let Some(c) = map_v.dof(v) {
                        tc.push(o, c, area / 3.0);
                    }
                }
            }
            Ok(SubdomainMass {
                coupling: tc.build(),
                gram: SparseMatrix::from_diagonal(&diag),
            })
        }
        SpaceTag::P1Omega => Ok(SubdomainMass {
            coupling: assemble_p1_bilinear(mesh, map_o, map_v, BilinearTerms::MASS, true),
            gram: assemble_p1_bilinear(mesh, map_o, map_o, BilinearTerms::MASS, true),
        }),
        other => Err(Error::InvalidArgument(format!("{other:?} is not an observation space on omega"))),
    }
}

/// Vertex-indexed boundary mass `int_Gamma u v ds` over edges with `marker`.
pub fn assemble_boundary_mass(mesh: &TriMesh, marker: EdgeMarker) -> Result<SparseMatrix> {
    let nv = mesh.n_vertices();
    let mut tb = TripletBuilder::new(nv, nv);
    let mut any = false;
    for e in mesh.boundary_edges.iter().filter(|e| e.marker == marker) {
        any = true;
        let [a, b] = e.v;
        let (p, q) = (mesh.vertices[a], mesh.vertices[b]);
        let len = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        tb.push(a, a, len / 3.0);
        tb.push(b, b, len / 3.0);
        tb.push(a, b, len / 6.0);
        tb.push(b, a, len / 6.0);
    }
    if !any {
        return Err(Error::Mesh(format!("no boundary edges marked {marker:?}")));
    }
    Ok(tb.build_symmetric())
}

/// `int f phi_i` for the free P1 dofs of `map`, by three-point quadrature.
pub fn p1_load(mesh: &TriMesh, map: &DofMap, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; map.n_free];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if !map.covers(mesh, t) {
            continue;
        }
        let p = corners(mesh, t);
        let area = mesh.area(t);
        for (l, w) in gauss3() {
            let [x, y] = map_point(&p, &l);
            let fx = f(x, y) * w * area;
            for k in 0..3 {
                if let Some(d) = map.dof(tri[k]) {
                    out[d] += fx * l[k];
                }
            }
        }
    }
    out
}

/// Triangle means of `f` over the P0 dofs, by three-point quadrature.
pub fn p0_means(mesh: &TriMesh, map: &DofMap, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; map.n_free];
    for (k, &t) in map.entity.iter().enumerate() {
        let p = corners(mesh, t);
        out[k] = gauss3()
            .iter()
            .map(|(l, w)| {
                let [x, y] = map_point(&p, l);
                w * f(x, y)
            })
            .sum();
    }
    out
}

/// Nodal interpolation of `f` on the free P1 dofs.
pub fn interpolate_p1(mesh: &TriMesh, map: &DofMap, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    map.entity
        .iter()
        .map(|&v| {
            let [x, y] = mesh.vertices[v];
            f(x, y)
        })
        .collect()
}

/// Squared L2 and H1-seminorm errors of a vertex-valued P1 function against
/// an exact function and its gradient (seven-point quadrature), over omega
/// only if requested.
pub fn p1_error_squared(
    mesh: &TriMesh,
    vertex_values: &[f64],
    u: impl Fn(f64, f64) -> f64,
    grad: impl Fn(f64, f64) -> [f64; 2],
    omega_only: bool,
) -> (f64, f64) {
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if omega_only && !mesh.in_omega[t] {
            continue;
        }
        let p = corners(mesh, t);
        let (g, area) = p1_gradients(mesh, t);
        let vals = tri.map(|i| vertex_values[i]);
        let gh = [
            vals[0] * g[0][0] + vals[1] * g[1][0] + vals[2] * g[2][0],
            vals[0] * g[0][1] + vals[1] * g[1][1] + vals[2] * g[2][1],
        ];
        for (l, w) in gauss7() {
            let [x, y] = map_point(&p, &l);
            let uh = l[0] * vals[0] + l[1] * vals[1] + l[2] * vals[2];
            let ge = grad(x, y);
            l2 += w * area * (u(x, y) - uh).powi(2);
            h1 += w * area * ((ge[0] - gh[0]).powi(2) + (ge[1] - gh[1]).powi(2));
        }
    }
    (l2, h1)
}

/// `int u` of a vertex-valued P1 function, over omega only if requested.
pub fn p1_integral(mesh: &TriMesh, vertex_values: &[f64], omega_only: bool) -> f64 {
    mesh.triangles
        .iter()
        .enumerate()
        .filter(|(t, _)| !omega_only || mesh.in_omega[*t])
        .map(|(t, tri)| mesh.area(t) * tri.iter().map(|&v| vertex_values[v]).sum::<f64>() / 3.0)
        .sum()
}
