//! Degree-of-freedom maps for the discrete spaces.

use super::mesh::{EdgeMarker, TriMesh};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceTag {
    /// Continuous P1 on the whole mesh.
    P1,
    /// P1 vanishing on the outer boundary.
    P1ZeroBoundary,
    /// P1 vanishing on the Gamma-tilde boundary part.
    P1ZeroGammaTilde,
    /// P1 vanishing on the outer boundary and on the closure of omega.
    P1ZeroOutsideComplement,
    /// P1 on the omega sub-triangulation.
    P1Omega,
    /// Traces of P1 functions on the Gamma boundary part (vertex values).
    P1Gamma,
    /// Piecewise constants on omega triangles.
    P0Omega,
    /// Morley element on omega, clamped on the omega boundary.
    MorleyClamped,
}

/// Entity to dof index map; constrained entities map to `None`.
///
/// P1 spaces index vertices, P0 indexes triangles, Morley indexes vertices
/// followed by edges (entity `n_vertices + e` for edge `e`).
#[derive(Debug, Clone)]
pub struct DofMap {
    pub space: SpaceTag,
    pub index: Vec<Option<usize>>,
    pub n_free: usize,
    /// Entity of each free dof.
    pub entity: Vec<usize>,
}

impl DofMap {
    fn from_mask(space: SpaceTag, free: &[bool]) -> Self {
        let mut index = vec![None; free.len()];
        let mut entity = Vec::new();
        for (i, &f) in free.iter().enumerate() {
            if f {
                index[i] = Some(entity.len());
                entity.push(i);
            }
        }
        DofMap {
            space,
            n_free: entity.len(),
            index,
            entity,
        }
    }

    pub fn new(mesh: &TriMesh, space: SpaceTag) -> Result<Self> {
        let nv = mesh.n_vertices();
        let map = match space {
            SpaceTag::P1 => Self::from_mask(space, &vec![true; nv]),
            SpaceTag::P1ZeroBoundary => {
                let b = mesh.boundary_vertices();
                Self::from_mask(space, &b.iter().map(|&x| !x).collect::<Vec<_>>())
            }
            SpaceTag::P1ZeroGammaTilde => {
                let gt = mesh.marked_vertices(EdgeMarker::GammaTilde);
                if !gt.iter().any(|&x| x) {
                    return Err(Error::Mesh("no Gamma-tilde edges are marked".into()));
                }
                Self::from_mask(space, &gt.iter().map(|&x| !x).collect::<Vec<_>>())
            }
            SpaceTag::P1ZeroOutsideComplement => {
                let b = mesh.boundary_vertices();
                let o = mesh.omega_vertices();
                let free: Vec<bool> = (0..nv).map(|v| !b[v] && !o[v]).collect();
                Self::from_mask(space, &free)
            }
            SpaceTag::P1Omega => Self::from_mask(space, &mesh.omega_vertices()),
            SpaceTag::P1Gamma => {
                let g = mesh.marked_vertices(EdgeMarker::Gamma);
                if !g.iter().any(|&x| x) {
                    return Err(Error::Mesh("no Gamma edges are marked".into()));
                }
                Self::from_mask(space, &g)
            }
            SpaceTag::P0Omega => Self::from_mask(space, &mesh.in_omega),
            SpaceTag::MorleyClamped => {
                let ov = mesh.omega_vertices();
                let bv = mesh.omega_boundary_vertices();
                let be = mesh.omega_boundary_edges();
                let adj = mesh.edge_triangles();
                let mut free = Vec::with_capacity(nv + mesh.edges.len());
                for v in 0..nv {
                    free.push(ov[v] && !bv[v]);
                }
                for e in 0..mesh.edges.len() {
                    let touches = adj[e].iter().any(|&t| mesh.in_omega[t]);
                    free.push(touches && !be[e]);
                }
                Self::from_mask(space, &free)
            }
        };
        if map.n_free == 0 && matches!(space, SpaceTag::P0Omega | SpaceTag::P1Omega) {
            return Err(Error::EmptyRegion("observation space has no dofs".into()));
        }
        Ok(map)
    }

    /// Morley space on omega with no boundary constraint (for consistency checks).
    pub fn morley_unclamped(mesh: &TriMesh) -> Self {
        let ov = mesh.omega_vertices();
        let adj = mesh.edge_triangles();
        let mut free = ov.clone();
        for ts in &adj {
            free.push(ts.iter().any(|&t| mesh.in_omega[t]));
        }
        Self::from_mask(SpaceTag::MorleyClamped, &free)
    }

    /// Dof of entity `i`, if free.
    pub fn dof(&self, i: usize) -> Option<usize> {
        self.index[i]
    }

    /// Expands a dof vector to entity values (constrained entities get 0).
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.index.len()];
        for (k, &e) in self.entity.iter().enumerate() {
            out[e] = x[k];
        }
        out
    }

    /// Restricts entity values to the free dofs.
    pub fn restrict(&self, values: &[f64]) -> Vec<f64> {
        self.entity.iter().map(|&e| values[e]).collect()
    }

    pub fn is_p1(&self) -> bool {
        matches!(
            self.space,
            SpaceTag::P1
                | SpaceTag::P1ZeroBoundary
                | SpaceTag::P1ZeroGammaTilde
                | SpaceTag::P1ZeroOutsideComplement
                | SpaceTag::P1Omega
        )
    }

    /// Whether triangle `t` belongs to the integration domain of the space.
    pub fn covers(&self, mesh: &TriMesh, t: usize) -> bool {
        match self.space {
            SpaceTag::P1Omega | SpaceTag::P0Omega | SpaceTag::MorleyClamped => mesh.in_omega[t],
            _ => true,
        }
    }
}
