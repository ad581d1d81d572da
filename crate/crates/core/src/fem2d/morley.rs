//! Morley nonconforming element for the clamped fourth-order problem on
//! omega: quadratics with vertex values and edge-midpoint normal derivatives
//! as degrees of freedom.

use nalgebra::{Matrix6, Vector6};

use super::assemble::p1_gradients;
use super::dofs::{DofMap, SpaceTag};
use super::mesh::TriMesh;
use crate::error::{Error, Result};
use crate::numerics::{SparseMatrix, TripletBuilder};

/// Local Morley basis of one triangle, as monomial coefficients in the scaled
/// coordinates `xi = (x - xc) / s`, `eta = (y - yc) / s`.
#[derive(Debug, Clone)]
pub struct MorleyElement {
    /// Column `i` holds the coefficients of basis function `i` in
    /// `[1, xi, eta, xi^2, xi*eta, eta^2]`; 0..3 vertex dofs, 3..6 edge dofs.
    pub coeffs: Matrix6<f64>,
    pub center: [f64; 2],
    pub scale: f64,
    pub area: f64,
    /// Global dof entity of each local basis function.
    pub entities: [usize; 6],
}

/// Unit normal of edge `[a, b]` (sorted endpoints), oriented consistently
/// for every triangle sharing the edge.
pub fn edge_normal(mesh: &TriMesh, e: usize) -> [f64; 2] {
    let [a, b] = mesh.edges[e];
    let (p, q) = (mesh.vertices[a], mesh.vertices[b]);
    let (tx, ty) = (q[0] - p[0], q[1] - p[1]);
    let len = (tx * tx + ty * ty).sqrt();
    [ty / len, -tx / len]
}

impl MorleyElement {
    pub fn new(mesh: &TriMesh, t: usize) -> Result<Self> {
        let tri = mesh.triangles[t];
        let p = tri.map(|i| mesh.vertices[i]);
        let area = mesh.area(t);
        let center = mesh.barycenter(t);
        let scale = area.sqrt();
        let local = |x: f64, y: f64| ((x - center[0]) / scale, (y - center[1]) / scale);
        let mut d = Matrix6::zeros();
        for k in 0..3 {
            let (xi, eta) = local(p[k][0], p[k][1]);
            d.set_row(k, &Vector6::new(1.0, xi, eta, xi * xi, xi * eta, eta * eta).transpose());
        }
        let nv = mesh.n_vertices();
        let mut entities = [0usize; 6];
        for k in 0..3 {
            entities[k] = tri[k];
            let e = mesh.triangle_edges[t][k];
            entities[3 + k] = nv + e;
            let [a, b] = mesh.edges[e];
            let m = [
                0.5 * (mesh.vertices[a][0] + mesh.vertices[b][0]),
                0.5 * (mesh.vertices[a][1] + mesh.vertices[b][1]),
            ];
            let (xi, eta) = local(m[0], m[1]);
            let n = edge_normal(mesh, e);
            let row = Vector6::new(
                0.0,
                n[0],
                n[1],
                2.0 * xi * n[0],
                eta * n[0] + xi * n[1],
                2.0 * eta * n[1],
            ) / scale;
            d.set_row(3 + k, &row.transpose());
        }
        let coeffs = d
            .try_inverse()
            .ok_or_else(|| Error::Mesh(format!("degenerate Morley element on triangle {t}")))?;
        Ok(MorleyElement {
            coeffs,
            center,
            scale,
            area,
            entities,
        })
    }

    /// Constant Laplacian of local basis function `i`.
    pub fn laplacian(&self, i: usize) -> f64 {
        let c = self.coeffs.column(i);
        2.0 * (c[3] + c[5]) / (self.scale * self.scale)
    }

    /// Constant Hessian `(xx, xy, yy)` of local basis function `i`.
    pub fn hessian(&self, i: usize) -> [f64; 3] {
        let c = self.coeffs.column(i);
        let s2 = self.scale * self.scale;
        [2.0 * c[3] / s2, c[4] / s2, 2.0 * c[5] / s2]
    }

    /// Gradient of local basis function `i` at `(x, y)`.
    pub fn gradient(&self, i: usize, x: f64, y: f64) -> [f64; 2] {
        let c = self.coeffs.column(i);
        let xi = (x - self.center[0]) / self.scale;
        let eta = (y - self.center[1]) / self.scale;
        [
            (c[1] + 2.0 * c[3] * xi + c[4] * eta) / self.scale,
            (c[2] + c[4] * xi + 2.0 * c[5] * eta) / self.scale,
        ]
    }

    /// Value of local basis function `i` at `(x, y)`.
    pub fn value(&self, i: usize, x: f64, y: f64) -> f64 {
        let c = self.coeffs.column(i);
        let xi = (x - self.center[0]) / self.scale;
        let eta = (y - self.center[1]) / self.scale;
        c[0] + c[1] * xi + c[2] * eta + c[3] * xi * xi + c[4] * xi * eta + c[5] * eta * eta
    }
}

/// Matrices of the Morley discretization on omega.
#[derive(Debug, Clone)]
pub struct MorleyMatrices {
    /// `(D^2 lambda, D^2 mu)` with element-wise Hessians. On clamped conforming
    /// functions this equals `(Delta lambda, Delta mu)`; the Laplacian form
    /// itself has a large kernel on the Morley space.
    pub biharmonic: SparseMatrix,
    /// `(grad lambda, grad mu)` with broken gradients.
    pub grad: SparseMatrix,
    /// `mu -> int_omega f Delta mu` for `f` in the observation space (rows Morley, cols O).
    pub laplace_load: SparseMatrix,
    /// Per-omega-triangle element data, keyed by triangle index.
    pub elements: Vec<(usize, MorleyElement)>,
}

/// Assembles the Morley matrices over omega triangles for the Morley dof map
/// `map` and an observation space `map_o` (P0 or P1 on omega).
pub fn assemble_morley(mesh: &TriMesh, map: &DofMap, map_o: &DofMap) -> Result<MorleyMatrices> {
    if map.space != SpaceTag::MorleyClamped {
        return Err(Error::InvalidArgument(format!("{:?} is not a Morley space", map.space)));
    }
    if !mesh.in_omega.iter().any(|&f| f) {
        return Err(Error::EmptyRegion("no omega triangles for the Morley space".into()));
    }
    let interior = map.entity.iter().filter(|&&e| e < mesh.n_vertices()).count();
    if interior < 2 {
        return Err(Error::Mesh(format!(
            "omega has {interior} interior vertices; the clamped Morley space needs at least 2"
        )));
    }
    let n = map.n_free;
    let mut bih = TripletBuilder::new(n, n);
    let mut grd = TripletBuilder::new(n, n);
    let mut load = TripletBuilder::new(n, map_o.n_free);
    let mut elements = Vec::new();
    let quad = super::quadrature::gauss3();
    for t in 0..mesh.n_triangles() {
        if !mesh.in_omega[t] {
            continue;
        }
        let el = MorleyElement::new(mesh, t)?;
        let p = mesh.triangles[t].map(|i| mesh.vertices[i]);
        let lap: Vec<f64> = (0..6).map(|i| el.laplacian(i)).collect();
        let hess: Vec<[f64; 3]> = (0..6).map(|i| el.hessian(i)).collect();
        let mut grads = [[[0.0; 2]; 6]; 3];
        for (q, (l, _)) in quad.iter().enumerate() {
            let [x, y] = super::quadrature::map_point(&p, l);
            for i in 0..6 {
                grads[q][i] = el.gradient(i, x, y);
            }
        }
        for i in 0..6 {
            let Some(r) = map.dof(el.entities[i]) else { continue };
            for j in 0..6 {
                let Some(c) = map.dof(el.entities[j]) else { continue };
                let (hi, hj) = (hess[i], hess[j]);
                bih.push(r, c, el.area * (hi[0] * hj[0] + 2.0 * hi[1] * hj[1] + hi[2] * hj[2]));
                let g: f64 = (0..3)
                    .map(|q| quad[q].1 * (grads[q][i][0] * grads[q][j][0] + grads[q][i][1] * grads[q][j][1]))
                    .sum();
                grd.push(r, c, el.area * g);
            }
            match map_o.space {
                SpaceTag::P0Omega => {
                    if let Some(o) = map_o.dof(t) {
                        load.push(r, o, el.area * lap[i]);
                    }
                }
                SpaceTag::P1Omega => {
                    for &v in &mesh.triangles[t] {
                        if let Some(o) = map_o.dof(v) {
                            load.push(r, o, el.area / 3.0 * lap[i]);
                        }
                    }
                }
                other => return Err(Error::InvalidArgument(format!("{other:?} is not an observation space"))),
            }
        }
        elements.push((t, el));
    }
    Ok(MorleyMatrices {
        biharmonic: bih.build_symmetric(),
        grad: grd.build_symmetric(),
        laplace_load: load.build(),
        elements,
    })
}

/// `int_omega grad lambda . grad mu` for P1 `lambda` (columns, dofs of
/// `p1_map`) and Morley `mu` (rows).
pub fn assemble_morley_p1_grad(mesh: &TriMesh, map: &DofMap, p1_map: &DofMap, mm: &MorleyMatrices) -> SparseMatrix {
    let mut tb = TripletBuilder::new(map.n_free, p1_map.n_free);
    for (t, el) in &mm.elements {
        let (g, area) = p1_gradients(mesh, *t);
        let c = mesh.barycenter(*t);
        for i in 0..6 {
            let Some(r) = map.dof(el.entities[i]) else { continue };
            // the Morley gradient is affine, so its mean is the centroid value
            let gm = el.gradient(i, c[0], c[1]);
            for k in 0..3 {
                if let Some(col) = p1_map.dof(mesh.triangles[*t][k]) {
                    tb.push(r, col, area * (gm[0] * g[k][0] + gm[1] * g[k][1]));
                }
            }
        }
    }
    tb.build()
}

/// Per-triangle Laplacian of a Morley function given by its free dofs,
/// in the order of `mm.elements`.
pub fn elementwise_laplacian(map: &DofMap, mm: &MorleyMatrices, x: &[f64]) -> Vec<(usize, f64)> {
    mm.elements
        .iter()
        .map(|(t, el)| {
            let lap = (0..6)
                .filter_map(|i| map.dof(el.entities[i]).map(|d| x[d] * el.laplacian(i)))
                .sum();
            (*t, lap)
        })
        .collect()
}
