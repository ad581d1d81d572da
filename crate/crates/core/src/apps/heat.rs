//! Interior data assimilation for the heat equation in one space dimension,
//! posed on the space-time rectangle `Q = (0, 1) x (0, T)` (coordinates
//! `(x, t)` stored as `(x, y)`), with data on `q = omega x (0, T)`.
//!
//! `V = L^2(0, T; H^1)`, `M = H^1_0(Q)`, `O = L^2(q)` (piecewise constants),
//! `b(u, lambda) = int_Q (-u lambda_t + u_x lambda_x)`.

use nalgebra::{DMatrix, DVector};

use super::{AppKind, Application};
use crate::error::{Error, Result};
use crate::fem2d::{
    assemble_p1, assemble_p1_bilinear, assemble_subdomain_mass, crossed_rectangle, BilinearTerms, DofMap, SpaceTag,
};
use crate::numerics::DenseCholesky;
use crate::regcore::{AssimilationOperator, HVector, PerpComponent, RangePerpBackend};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatConfig {
    pub spatial_dim: usize,
    pub n_x: usize,
    pub n_t: usize,
    pub t_final: f64,
    /// Observed spatial interval `(a, b)`.
    pub omega: [f64; 2],
}

impl Default for HeatConfig {
    fn default() -> Self {
        HeatConfig { spatial_dim: 1, n_x: 20, n_t: 20, t_final: 0.3, omega: [0.3, 0.7] }
    }
}

pub fn build_heat_da(cfg: &HeatConfig) -> Result<Application> {
    if cfg.spatial_dim != 1 {
        return Err(Error::Unsupported(format!(
            "heat problem in {} space dimensions (only 1 is implemented)",
            cfg.spatial_dim
        )));
    }
    if cfg.n_x < 4 || cfg.n_t < 4 || !(cfg.t_final > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need n_x, n_t >= 4 and T > 0, got {} x {}, T = {}",
            cfg.n_x, cfg.n_t, cfg.t_final
        )));
    }
    let [a, b] = cfg.omega;
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(Error::InvalidArgument(format!("omega interval ({a}, {b}) is not inside (0, 1)")));
    }
    let mut mesh = crossed_rectangle(cfg.n_x, cfg.n_t, [0.0, 1.0, 0.0, cfg.t_final]);
    for t in 0..mesh.n_triangles() {
        let [x, _] = mesh.barycenter(t);
        mesh.in_omega[t] = x > a && x < b;
    }
    if !mesh.in_omega.iter().any(|&f| f) {
        return Err(Error::EmptyRegion(format!("interval ({a}, {b}) contains no cell at n_x = {}", cfg.n_x)));
    }
    let map_v = DofMap::new(&mesh, SpaceTag::P1)?;
    let map_m = DofMap::new(&mesh, SpaceTag::P1ZeroBoundary)?;
    let map_o = DofMap::new(&mesh, SpaceTag::P0Omega)?;
    let v_terms = BilinearTerms { mass: 1.0, dx: 1.0, dy: 0.0, trial_test_dy: 0.0 };
    let gram_v = assemble_p1_bilinear(&mesh, &map_v, &map_v, v_terms, false);
    let gram_m = assemble_p1(&mesh, &map_m)?.stiffness;
    let b_terms = BilinearTerms { mass: 0.0, dx: 1.0, dy: 0.0, trial_test_dy: -1.0 };
    let b_form = assemble_p1_bilinear(&mesh, &map_m, &map_v, b_terms, false);
    let obs = assemble_subdomain_mass(&mesh, &map_v, &map_o)?;
    let op = AssimilationOperator::new(gram_v, gram_m, obs.gram, b_form, obs.coupling)?;
    Ok(Application { kind: AppKind::Heat, mesh, map_v, map_m, map_o, op })
}

/// Finite-difference range-complement projection on the grid of mesh corners
/// inside `q`: minimizes over grid functions `lambda` vanishing on the boundary
/// of `q`, with zero x-derivative on its lateral sides,
/// `(L lambda, L mu) + (D lambda, D mu) = (f, L mu)`, `L = d_t + d_xx`,
/// and returns `f_perp = L lambda_perp`.
pub struct HeatPerp {
    n_m: usize,
    n_o: usize,
    /// Grid nodes `(nx + 1) x (nt + 1)`, row-major in `x`.
    nx: usize,
    nt: usize,
    /// Trapezoid weight of each node.
    weights: Vec<f64>,
    /// Node-value operator `L` (all nodes x unknowns).
    l: DMatrix<f64>,
    /// Staggered differences and their weights.
    d: DMatrix<f64>,
    d_weights: Vec<f64>,
    system: DenseCholesky,
    /// Interior unknown of each node, if any.
    unknown: Vec<Option<usize>>,
    /// For each O dof, the triangle's corner nodes and the cell's four corners.
    tri_nodes: Vec<(usize, [usize; 2], [usize; 4])>,
    /// For each node, the O dofs of the q triangles touching it.
    node_tris: Vec<Vec<usize>>,
    /// `(M dof, nodes to average)`.
    m_dofs: Vec<(usize, Vec<usize>)>,
}

impl HeatPerp {
    pub fn new(app: &Application) -> Result<Self> {
        if app.kind != AppKind::Heat {
            return Err(Error::InvalidArgument("the finite-difference projection applies to the heat problem".into()));
        }
        let mesh = &app.mesh;
        let [x0, x1, t0, t1] = mesh.bounds;
        // recover the structured grid: corners are the first (Nx+1)(Nt+1) vertices
        let n_cols = mesh.vertices.iter().take_while(|v| v[1] == t0).count() - 1;
        let n_rows = (mesh.n_vertices() - n_cols - 1) / (2 * n_cols + 1);
        let corner = |i: usize, j: usize| j * (n_cols + 1) + i;
        let hx = (x1 - x0) / n_cols as f64;
        let ht = (t1 - t0) / n_rows as f64;
        let center_base = (n_cols + 1) * (n_rows + 1);
        // columns covered by omega
        let cols: Vec<usize> = (0..n_cols).filter(|&i| mesh.in_omega[4 * i]).collect();
        let (i0, i1) = (cols[0], cols[cols.len() - 1] + 1);
        if cols.len() != i1 - i0 {
            return Err(Error::InvalidArgument("omega is not a single interval of cells".into()));
        }
        let (nx, nt) = (i1 - i0, n_rows);
        if nx < 5 || nt < 5 {
            return Err(Error::Mesh(format!(
                "grid on q has {} x {} interior points; at least 4 in each direction are needed",
                nx.saturating_sub(1),
                nt.saturating_sub(1)
            )));
        }
        let node = |i: usize, j: usize| j * (nx + 1) + i;
        let n_nodes = (nx + 1) * (nt + 1);
        let mut unknown = vec![None; n_nodes];
        let mut n_u = 0;
        for j in 1..nt {
            for i in 1..nx {
                unknown[node(i, j)] = Some(n_u);
                n_u += 1;
            }
        }
        let mut weights = vec![0.0; n_nodes];
        let mut node_vertex = vec![0; n_nodes];
        for j in 0..=nt {
            for i in 0..=nx {
                let wx = if i == 0 || i == nx { 0.5 } else { 1.0 };
                let wt = if j == 0 || j == nt { 0.5 } else { 1.0 };
                weights[node(i, j)] = wx * wt * hx * ht;
                node_vertex[node(i, j)] = corner(i0 + i, j);
            }
        }
        let val = |i: isize, j: usize| -> Option<usize> {
            // lateral ghost nodes mirror the first interior column
            let i = if i < 0 { 1 } else if i as usize > nx { nx - 1 } else { i as usize };
            unknown[node(i, j)]
        };
        let mut l = DMatrix::zeros(n_nodes, n_u);
        for j in 0..=nt {
            for i in 0..=nx {
                let r = node(i, j);
                let ii = i as isize;
                for (di, c) in [(-1isize, 1.0), (0, -2.0), (1, 1.0)] {
                    if let Some(k) = val(ii + di, j) {
                        l[(r, k)] += c / (hx * hx);
                    }
                }
                let (jm, jp, s) = if j == 0 {
                    (0, 1, ht)
                } else if j == nt {
                    (nt - 1, nt, ht)
                } else {
                    (j - 1, j + 1, 2.0 * ht)
                };
                if let Some(k) = unknown[node(i, jp)] {
                    l[(r, k)] += 1.0 / s;
                }
                if let Some(k) = unknown[node(i, jm)] {
                    l[(r, k)] -= 1.0 / s;
                }
            }
        }
        let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
        for j in 0..=nt {
            for i in 0..nx {
                let mut row = Vec::new();
                if let Some(k) = unknown[node(i + 1, j)] {
                    row.push((k, 1.0 / hx));
                }
                if let Some(k) = unknown[node(i, j)] {
                    row.push((k, -1.0 / hx));
                }
                let wt = if j == 0 || j == nt { 0.5 } else { 1.0 };
                rows.push((row, wt * hx * ht));
            }
        }
        for j in 0..nt {
            for i in 0..=nx {
                let mut row = Vec::new();
                if let Some(k) = unknown[node(i, j + 1)] {
                    row.push((k, 1.0 / ht));
                }
                if let Some(k) = unknown[node(i, j)] {
                    row.push((k, -1.0 / ht));
                }
                let wx = if i == 0 || i == nx { 0.5 } else { 1.0 };
                rows.push((row, wx * hx * ht));
            }
        }
        let mut d = DMatrix::zeros(rows.len(), n_u);
        let mut d_weights = Vec::with_capacity(rows.len());
        for (r, (row, w)) in rows.into_iter().enumerate() {
            for (k, c) in row {
                d[(r, k)] = c;
            }
            d_weights.push(w);
        }
        let wl = DMatrix::from_fn(n_nodes, n_u, |r, c| weights[r] * l[(r, c)]);
        let wd = DMatrix::from_fn(d.nrows(), n_u, |r, c| d_weights[r] * d[(r, c)]);
        let system = DenseCholesky::new(l.tr_mul(&wl) + d.tr_mul(&wd))?;

        // transfers between the grid and the finite-element spaces
        let mut tri_nodes = Vec::new();
        let mut node_tris = vec![Vec::new(); n_nodes];
        let vertex_node: std::collections::HashMap<usize, usize> =
            node_vertex.iter().enumerate().map(|(n, &v)| (v, n)).collect();
        for (o, &t) in app.map_o.entity.iter().enumerate() {
            let cell = t / 4;
            let (ci, cj) = (cell % n_cols, cell / n_cols);
            let (li, lj) = (ci - i0, cj);
            let four = [node(li, lj), node(li + 1, lj), node(li + 1, lj + 1), node(li, lj + 1)];
            let tri = mesh.triangles[t];
            let two = [vertex_node[&tri[0]], vertex_node[&tri[1]]];
            tri_nodes.push((o, two, four));
            for n in two {
                node_tris[n].push(o);
            }
        }
        let mut m_dofs = Vec::new();
        for (n, &v) in node_vertex.iter().enumerate() {
            if let (Some(m), Some(_)) = (app.map_m.dof(v), unknown[n]) {
                m_dofs.push((m, vec![n]));
            }
        }
        for lj in 0..nt {
            for li in 0..nx {
                let c = center_base + lj * n_cols + (i0 + li);
                if let Some(m) = app.map_m.dof(c) {
                    m_dofs.push((m, vec![node(li, lj), node(li + 1, lj), node(li + 1, lj + 1), node(li, lj + 1)]));
                }
            }
        }
        Ok(HeatPerp {
            n_m: app.map_m.n_free,
            n_o: app.map_o.n_free,
            nx,
            nt,
            weights,
            l,
            d,
            d_weights,
            system,
            unknown,
            tri_nodes,
            node_tris,
            m_dofs,
        })
    }

    pub fn grid(&self) -> (usize, usize) {
        (self.nx, self.nt)
    }

    /// Grid values of a P0 function on q: average over the touching triangles.
    fn to_nodes(&self, f: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.node_tris.len(),
            self.node_tris.iter().map(|ts| {
                if ts.is_empty() {
                    0.0
                } else {
                    ts.iter().map(|&o| f[o]).sum::<f64>() / ts.len() as f64
                }
            }),
        )
    }

    fn lambda_nodes(&self, lam: &DVector<f64>) -> Vec<f64> {
        self.unknown.iter().map(|u| u.map_or(0.0, |k| lam[k])).collect()
    }
}

impl RangePerpBackend for HeatPerp {
    fn name(&self) -> &str {
        "heat-fd"
    }

    fn project(&self, _op: &AssimilationOperator, g: &HVector) -> Result<PerpComponent> {
        if g.m.len() != self.n_m || g.o.len() != self.n_o {
            return Err(Error::Dimension("data does not match the heat backend".into()));
        }
        let fn_ = self.to_nodes(&g.o);
        let wf = DVector::from_iterator(fn_.len(), fn_.iter().zip(&self.weights).map(|(a, w)| a * w));
        let rhs = self.l.tr_mul(&wf);
        let lam = self.system.solve(&rhs);
        let lf = &self.l * &lam;
        let dl = &self.d * &lam;
        let lf_sq: f64 = lf.iter().zip(&self.weights).map(|(a, w)| w * a * a).sum();
        let dl_sq: f64 = dl.iter().zip(&self.d_weights).map(|(a, w)| w * a * a).sum();
        let cross: f64 = lf.iter().zip(&self.weights).zip(fn_.iter()).map(|((a, w), b)| w * a * b).sum();
        let ln = self.lambda_nodes(&lam);
        let mut m = DVector::zeros(self.n_m);
        for (d, nodes) in &self.m_dofs {
            m[*d] = nodes.iter().map(|&n| ln[n]).sum::<f64>() / nodes.len() as f64;
        }
        let mut o = DVector::zeros(self.n_o);
        for (d, two, four) in &self.tri_nodes {
            let center = four.iter().map(|&n| lf[n]).sum::<f64>() / 4.0;
            o[*d] = (lf[two[0]] + lf[two[1]] + center) / 3.0;
        }
        Ok(PerpComponent { perp: HVector::new(m, o), native_identity: Some((lf_sq + dl_sq, cross)) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apps::exact::{ExactSolution, SolutionId};
    use crate::regcore::{solve_mixed, NoisyData};

    #[test]
    fn two_space_dimensions_are_unsupported() {
        let cfg = HeatConfig { spatial_dim: 2, ..Default::default() };
        assert!(matches!(build_heat_da(&cfg), Err(Error::Unsupported(_))));
    }

    #[test]
    fn zero_data_gives_zero() {
        let app = build_heat_da(&HeatConfig { n_x: 10, n_t: 10, ..Default::default() }).unwrap();
        let data = NoisyData::observation(&app.op, DVector::zeros(app.op.n_o()), 0.0).unwrap();
        let s = solve_mixed(&app.op, &data, 1e-3).unwrap();
        assert_eq!(s.u.amax(), 0.0);
    }

    fn caloric_error(n: usize, eps: f64) -> f64 {
        let app = build_heat_da(&HeatConfig { n_x: n, n_t: n, ..Default::default() }).unwrap();
        let u = ExactSolution::new(SolutionId::Caloric, &app.mesh).unwrap();
        let data = NoisyData::observation(&app.op, app.observe(|x, t| u.value(x, t)), 0.0).unwrap();
        let ui = app.interpolate(|x, t| u.value(x, t));
        let s = solve_mixed(&app.op, &data, eps).unwrap();
        app.op.v_norm(&(&s.u - &ui)) / app.op.v_norm(&ui)
    }

    #[test]
    fn caloric_solution_is_recovered() {
        let (coarse, fine) = (caloric_error(10, 1e-7), caloric_error(20, 1e-7));
        assert!(caloric_error(20, 1e-3) > fine);
        assert!(fine < coarse && fine < 0.3, "{coarse} {fine}");
    }

    #[test]
    fn fd_identity_holds() {
        let app = build_heat_da(&HeatConfig::default()).unwrap();
        let backend = HeatPerp::new(&app).unwrap();
        let f = DVector::from_fn(app.op.n_o(), |i, _| ((i * 37) % 11) as f64 / 11.0 - 0.5);
        let c = backend.project(&app.op, &HVector::new(DVector::zeros(app.op.n_m()), f)).unwrap();
        let (a, b) = c.native_identity.unwrap();
        assert!((a - b).abs() <= 1e-10 * a.abs());
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let app = build_heat_da(&HeatConfig { n_x: 8, n_t: 8, omega: [0.25, 0.5], ..Default::default() }).unwrap();
        assert!(matches!(HeatPerp::new(&app), Err(Error::Mesh(_))));
    }
}
