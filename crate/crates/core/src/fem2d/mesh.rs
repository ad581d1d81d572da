//! Structured crossed-triangle meshes of the unit square (or of a rectangle)
//! with observation-region flags and boundary-edge markers.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A disk `(x - cx)^2 + (y - cy)^2 < r^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

impl Circle {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        (x - self.cx).powi(2) + (y - self.cy).powi(2) < self.r * self.r
    }
}

/// Description of the observation region (or of the observed boundary part).
#[derive(Debug, Clone, PartialEq)]
pub enum OmegaSpec {
    /// Disk centered at (0.5, 0.5) with the given area.
    Disk { area: f64 },
    /// Unit square minus a quarter disk centered at the origin.
    ExteriorOfDisk { area: f64 },
    /// Five equal disks (center plus the four quarter points), total area given.
    FiveDisks { area: f64 },
    /// Union of arbitrary disks.
    Disks(Vec<Circle>),
    /// Axis-aligned rectangle `(x0, x1) x (y0, y1)`.
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    /// Cauchy setting: Gamma covers the first `4 * fraction` sides of the
    /// boundary, counted counterclockwise from the bottom side.
    BoundaryPartition { gamma_fraction: f64 },
}

/// Target area fraction used by the three reference domains.
pub const REFERENCE_AREA: f64 = 0.4;

impl OmegaSpec {
    pub fn disk() -> Self {
        OmegaSpec::Disk { area: REFERENCE_AREA }
    }

    pub fn exterior_of_disk() -> Self {
        OmegaSpec::ExteriorOfDisk { area: REFERENCE_AREA }
    }

    pub fn five_disks() -> Self {
        OmegaSpec::FiveDisks { area: REFERENCE_AREA }
    }

    /// Parses `disk`, `exterior-of-disk` or `five-disks` (domains 1, 2, 3).
    pub fn from_name(name: &str, area: f64) -> Result<Self> {
        match name {
            "disk" | "domain1" | "1" => Ok(OmegaSpec::Disk { area }),
            "exterior-of-disk" | "domain2" | "2" => Ok(OmegaSpec::ExteriorOfDisk { area }),
            "five-disks" | "domain3" | "3" => Ok(OmegaSpec::FiveDisks { area }),
            other => Err(Error::InvalidArgument(format!("unknown omega spec '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OmegaSpec::Disk { .. } => "disk",
            OmegaSpec::ExteriorOfDisk { .. } => "exterior-of-disk",
            OmegaSpec::FiveDisks { .. } => "five-disks",
            OmegaSpec::Disks(_) => "disks",
            OmegaSpec::Rectangle { .. } => "rectangle",
            OmegaSpec::BoundaryPartition { .. } => "boundary-partition",
        }
    }

    /// Disks realizing the region, for the disk-based variants.
    pub fn circles(&self) -> Result<Vec<Circle>> {
        let check = |area: f64| {
            if !(area > 0.0 && area < 1.0) {
                Err(Error::InvalidArgument(format!("area fraction {area} outside (0, 1)")))
            } else {
                Ok(())
            }
        };
        match self {
            OmegaSpec::Disk { area } => {
                check(*area)?;
                let r = (area / PI).sqrt();
                if r >= 0.5 {
                    return Err(Error::InvalidArgument(format!("disk of area {area} does not fit in the square")));
                }
                Ok(vec![Circle { cx: 0.5, cy: 0.5, r }])
            }
            OmegaSpec::ExteriorOfDisk { area } => {
                check(*area)?;
                let r = (4.0 * (1.0 - area) / PI).sqrt();
                if r >= 1.0 {
                    return Err(Error::InvalidArgument(format!(
                        "exterior region of area {area} needs a quarter disk of radius {r:.4} >= 1"
                    )));
                }
                Ok(vec![Circle { cx: 0.0, cy: 0.0, r }])
            }
            OmegaSpec::FiveDisks { area } => {
                check(*area)?;
                let r = (area / (5.0 * PI)).sqrt();
                // neighbouring centers are sqrt(2)/4 apart and the outer ones sit 1/4 from the sides
                if 2.0 * r >= 2f64.sqrt() / 4.0 || r >= 0.25 {
                    return Err(Error::InvalidArgument(format!("five disks of total area {area} overlap")));
                }
                let centers = [(0.5, 0.5), (0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)];
                Ok(centers.iter().map(|&(cx, cy)| Circle { cx, cy, r }).collect())
            }
            OmegaSpec::Disks(c) => Ok(c.clone()),
            _ => Ok(Vec::new()),
        }
    }

    /// Point membership used for the barycenter classification.
    pub fn contains(&self, x: f64, y: f64) -> Result<bool> {
        Ok(match self {
            OmegaSpec::ExteriorOfDisk { .. } => !self.circles()?[0].contains(x, y),
            OmegaSpec::Rectangle { x0, x1, y0, y1 } => x > *x0 && x < *x1 && y > *y0 && y < *y1,
            OmegaSpec::BoundaryPartition { .. } => false,
            _ => self.circles()?.iter().any(|c| c.contains(x, y)),
        })
    }
}

/// Marker of a boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeMarker {
    None,
    Gamma,
    GammaTilde,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub v: [usize; 2],
    pub marker: EdgeMarker,
}

/// Triangulation with omega flags, boundary markers and a unique edge list.
#[derive(Debug, Clone)]
pub struct TriMesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub in_omega: Vec<bool>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Unique edges with sorted endpoints.
    pub edges: Vec<[usize; 2]>,
    /// Edge index of triangle side `k`, the side opposite local vertex `k`.
    pub triangle_edges: Vec<[usize; 3]>,
    /// Bounding box `[x0, x1, y0, y1]` of the meshed rectangle.
    pub bounds: [f64; 4],
}

/// Crossed mesh of the unit square, `n` cells per side, flagged by `omega`.
pub fn generate_mesh(n: usize, omega: &OmegaSpec) -> Result<TriMesh> {
    if n < 4 {
        return Err(Error::Mesh(format!("need at least 4 subdivisions per side, got {n}")));
    }
    let mut mesh = crossed_rectangle(n, n, [0.0, 1.0, 0.0, 1.0]);
    match omega {
        OmegaSpec::BoundaryPartition { gamma_fraction } => {
            let sides = gamma_sides(*gamma_fraction)?;
            mark_sides(&mut mesh, &sides);
        }
        spec => {
            for (t, tri) in mesh.triangles.iter().enumerate() {
                let [x, y] = barycenter(&mesh.vertices, tri);
                mesh.in_omega[t] = spec.contains(x, y)?;
            }
            if !mesh.in_omega.iter().any(|&f| f) {
                return Err(Error::EmptyRegion(format!("{} spec flags no triangle at n = {n}", spec.name())));
            }
        }
    }
    Ok(mesh)
}

/// Crossed mesh of a rectangle with `nx x ny` cells; no flags or markers set.
pub fn crossed_rectangle(nx: usize, ny: usize, bounds: [f64; 4]) -> TriMesh {
    let [x0, x1, y0, y1] = bounds;
    let hx = (x1 - x0) / nx as f64;
    let hy = (y1 - y0) / ny as f64;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) + nx * ny);
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([x0 + i as f64 * hx, y0 + j as f64 * hy]);
        }
    }
    let corner = |i: usize, j: usize| j * (nx + 1) + i;
    let base = (nx + 1) * (ny + 1);
    for j in 0..ny {
        for i in 0..nx {
            vertices.push([x0 + (i as f64 + 0.5) * hx, y0 + (j as f64 + 0.5) * hy]);
        }
    }
    let mut triangles = Vec::with_capacity(4 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let c = base + j * nx + i;
            let (v00, v10, v11, v01) = (corner(i, j), corner(i + 1, j), corner(i + 1, j + 1), corner(i, j + 1));
            triangles.push([v00, v10, c]);
            triangles.push([v10, v11, c]);
            triangles.push([v11, v01, c]);
            triangles.push([v01, v00, c]);
        }
    }
    let mut boundary_edges = Vec::with_capacity(2 * (nx + ny));
    for i in 0..nx {
        boundary_edges.push(BoundaryEdge { v: [corner(i, 0), corner(i + 1, 0)], marker: EdgeMarker::None });
    }
    for j in 0..ny {
        boundary_edges.push(BoundaryEdge { v: [corner(nx, j), corner(nx, j + 1)], marker: EdgeMarker::None });
    }
    for i in (0..nx).rev() {
        boundary_edges.push(BoundaryEdge { v: [corner(i + 1, ny), corner(i, ny)], marker: EdgeMarker::None });
    }
    for j in (0..ny).rev() {
        boundary_edges.push(BoundaryEdge { v: [corner(0, j + 1), corner(0, j)], marker: EdgeMarker::None });
    }
    let n_tri = triangles.len();
    TriMesh::from_parts(vertices, triangles, vec![false; n_tri], boundary_edges, bounds)
}

fn barycenter(vertices: &[[f64; 2]], tri: &[usize; 3]) -> [f64; 2] {
    let [a, b, c] = tri.map(|i| vertices[i]);
    [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
}

/// Sides (0 bottom, 1 right, 2 top, 3 left) covered by Gamma.
fn gamma_sides(fraction: f64) -> Result<Vec<usize>> {
    let k = (fraction * 4.0).round();
    if (fraction * 4.0 - k).abs() > 1e-12 || k < 1.0 || k > 3.0 {
        return Err(Error::InvalidArgument(format!(
            "gamma fraction {fraction} must be 0.25, 0.5 or 0.75 (whole sides, both parts nonempty)"
        )));
    }
    Ok((0..k as usize).collect())
}

fn mark_sides(mesh: &mut TriMesh, gamma: &[usize]) {
    let [x0, x1, y0, y1] = mesh.bounds;
    let tol = 1e-12 * (x1 - x0).max(y1 - y0);
    for e in mesh.boundary_edges.iter_mut() {
        let a = mesh.vertices[e.v[0]];
        let b = mesh.vertices[e.v[1]];
        let side = if (a[1] - y0).abs() < tol && (b[1] - y0).abs() < tol {
            0
        } else if (a[0] - x1).abs() < tol && (b[0] - x1).abs() < tol {
            1
        } else if (a[1] - y1).abs() < tol && (b[1] - y1).abs() < tol {
            2
        } else {
            3
        };
        e.marker = if gamma.contains(&side) { EdgeMarker::Gamma } else { EdgeMarker::GammaTilde };
    }
}

impl TriMesh {
    /// Builds the edge tables and checks orientation.
    pub fn from_parts(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        in_omega: Vec<bool>,
        boundary_edges: Vec<BoundaryEdge>,
        bounds: [f64; 4],
    ) -> Self {
        let mut lookup: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for tri in &triangles {
            let mut te = [0usize; 3];
            for k in 0..3 {
                let a = tri[(k + 1) % 3];
                let b = tri[(k + 2) % 3];
                let key = if a < b { [a, b] } else { [b, a] };
                let idx = *lookup.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edges.len() - 1
                });
                te[k] = idx;
            }
            triangle_edges.push(te);
        }
        TriMesh {
            vertices,
            triangles,
            in_omega,
            boundary_edges,
            edges,
            triangle_edges,
            bounds,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Signed area of triangle `t`.
    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn barycenter(&self, t: usize) -> [f64; 2] {
        barycenter(&self.vertices, &self.triangles[t])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.area(t)).sum()
    }

    pub fn omega_area(&self) -> f64 {
        (0..self.n_triangles()).filter(|&t| self.in_omega[t]).map(|t| self.area(t)).sum()
    }

    /// Measured `|omega| / |Omega|`.
    pub fn omega_fraction(&self) -> f64 {
        self.omega_area() / self.total_area()
    }

    /// Largest edge length.
    pub fn h(&self) -> f64 {
        self.edges
            .iter()
            .map(|&[a, b]| {
                let (p, q) = (self.vertices[a], self.vertices[b]);
                ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Vertices lying on the outer boundary.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut flag = vec![false; self.n_vertices()];
        for e in &self.boundary_edges {
            flag[e.v[0]] = true;
            flag[e.v[1]] = true;
        }
        flag
    }

    /// Vertices touching at least one omega triangle.
    pub fn omega_vertices(&self) -> Vec<bool> {
        let mut flag = vec![false; self.n_vertices()];
        for (t, tri) in self.triangles.iter().enumerate() {
            if self.in_omega[t] {
                for &v in tri {
                    flag[v] = true;
                }
            }
        }
        flag
    }

    /// For each edge, the triangles sharing it (one or two).
    pub fn edge_triangles(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.edges.len()];
        for (t, te) in self.triangle_edges.iter().enumerate() {
            for &e in te {
                out[e].push(t);
            }
        }
        out
    }

    /// Edges on the boundary of the omega sub-triangulation: edges with exactly
    /// one adjacent omega triangle.
    pub fn omega_boundary_edges(&self) -> Vec<bool> {
        let adj = self.edge_triangles();
        adj.iter()
            .map(|ts| ts.iter().filter(|&&t| self.in_omega[t]).count() == 1)
            .collect()
    }

    /// Vertices on the boundary of the omega sub-triangulation.
    pub fn omega_boundary_vertices(&self) -> Vec<bool> {
        let mut flag = vec![false; self.n_vertices()];
        for (e, &on) in self.omega_boundary_edges().iter().enumerate() {
            if on {
                flag[self.edges[e][0]] = true;
                flag[self.edges[e][1]] = true;
            }
        }
        flag
    }

    /// Vertices of boundary edges carrying `marker` (endpoints included).
    pub fn marked_vertices(&self, marker: EdgeMarker) -> Vec<bool> {
        let mut flag = vec![false; self.n_vertices()];
        for e in self.boundary_edges.iter().filter(|e| e.marker == marker) {
            flag[e.v[0]] = true;
            flag[e.v[1]] = true;
        }
        flag
    }

    /// Checks positive orientation of every triangle.
    pub fn validate(&self) -> Result<()> {
        for t in 0..self.n_triangles() {
            let a = self.area(t);
            if a <= 0.0 {
                return Err(Error::Mesh(format!("triangle {t} has nonpositive signed area {a:.3e}")));
            }
        }
        if self.in_omega.len() != self.n_triangles() {
            return Err(Error::Mesh("omega flag count differs from triangle count".into()));
        }
        Ok(())
    }
}
