//! ASCII mesh dump: a header `nv nt ne`, then `x y` per vertex,
//! `i j k flag` per triangle and `i j marker` per boundary edge.

use std::io::{BufRead, Write};

use super::mesh::{BoundaryEdge, EdgeMarker, TriMesh};
use crate::error::{Error, Result};

fn marker_code(m: EdgeMarker) -> u8 {
    match m {
        EdgeMarker::None => 0,
        EdgeMarker::Gamma => 1,
        EdgeMarker::GammaTilde => 2,
    }
}

pub fn write_mesh<W: Write>(mesh: &TriMesh, mut out: W) -> Result<()> {
    writeln!(out, "{} {} {}", mesh.n_vertices(), mesh.n_triangles(), mesh.boundary_edges.len())?;
    for v in &mesh.vertices {
        writeln!(out, "{:.17e} {:.17e}", v[0], v[1])?;
    }
    for (t, tri) in mesh.triangles.iter().enumerate() {
        writeln!(out, "{} {} {} {}", tri[0], tri[1], tri[2], u8::from(mesh.in_omega[t]))?;
    }
    for e in &mesh.boundary_edges {
        writeln!(out, "{} {} {}", e.v[0], e.v[1], marker_code(e.marker))?;
    }
    Ok(())
}

pub fn mesh_to_string(mesh: &TriMesh) -> String {
    let mut buf = Vec::new();
    write_mesh(mesh, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn read_mesh<R: BufRead>(input: R) -> Result<TriMesh> {
    let mut lines = input.lines();
    let mut next = |what: &str| -> Result<Vec<String>> {
        loop {
            match lines.next() {
                Some(line) => {
                    let line = line?;
                    let trimmed = line.trim();
                    if trimmed.is_empty() {
                        continue;
                    }
                    return Ok(trimmed.split_whitespace().map(str::to_owned).collect());
                }
                None => return Err(Error::Parse(format!("unexpected end of mesh file reading {what}"))),
            }
        }
    };
    fn parse<T: std::str::FromStr>(s: &str) -> Result<T> {
        s.parse().map_err(|_| Error::Parse(format!("bad token '{s}'")))
    }
    let header = next("header")?;
    if header.len() != 3 {
        return Err(Error::Parse("header must be 'nv nt ne'".into()));
    }
    let (nv, nt, ne): (usize, usize, usize) = (parse(&header[0])?, parse(&header[1])?, parse(&header[2])?);
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let f = next("vertex")?;
        if f.len() != 2 {
            return Err(Error::Parse("vertex line must be 'x y'".into()));
        }
        vertices.push([parse(&f[0])?, parse(&f[1])?]);
    }
    let mut triangles = Vec::with_capacity(nt);
    let mut in_omega = Vec::with_capacity(nt);
    for _ in 0..nt {
        let f = next("triangle")?;
        if f.len() != 4 {
            return Err(Error::Parse("triangle line must be 'i j k flag'".into()));
        }
        let tri: [usize; 3] = [parse(&f[0])?, parse(&f[1])?, parse(&f[2])?];
        if tri.iter().any(|&i| i >= nv) {
            return Err(Error::Parse(format!("triangle references vertex beyond {nv}")));
        }
        triangles.push(tri);
        in_omega.push(parse::<u8>(&f[3])? != 0);
    }
    let mut boundary_edges = Vec::with_capacity(ne);
    for _ in 0..ne {
        let f = next("boundary edge")?;
        if f.len() != 3 {
            return Err(Error::Parse("boundary edge line must be 'i j marker'".into()));
        }
        let marker = match parse::<u8>(&f[2])? {
            0 => EdgeMarker::None,
            1 => EdgeMarker::Gamma,
            2 => EdgeMarker::GammaTilde,
            m => return Err(Error::Parse(format!("unknown boundary marker {m}"))),
        };
        boundary_edges.push(BoundaryEdge { v: [parse(&f[0])?, parse(&f[1])?], marker });
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for v in &vertices {
        x0 = x0.min(v[0]);
        x1 = x1.max(v[0]);
        y0 = y0.min(v[1]);
        y1 = y1.max(v[1]);
    }
    let mesh = TriMesh::from_parts(vertices, triangles, in_omega, boundary_edges, [x0, x1, y0, y1]);
    mesh.validate()?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem2d::mesh::{generate_mesh, OmegaSpec};

    #[test]
    fn dump_round_trips() {
        for spec in [OmegaSpec::five_disks(), OmegaSpec::BoundaryPartition { gamma_fraction: 0.5 }] {
            let mesh = generate_mesh(6, &spec).unwrap();
            let text = mesh_to_string(&mesh);
            let back = read_mesh(text.as_bytes()).unwrap();
            assert_eq!(back.vertices, mesh.vertices);
            assert_eq!(back.triangles, mesh.triangles);
            assert_eq!(back.in_omega, mesh.in_omega);
            assert_eq!(back.boundary_edges, mesh.boundary_edges);
            assert_eq!(back.edges, mesh.edges);
            assert_eq!(mesh_to_string(&back), text);
        }
    }

    #[test]
    fn truncated_file_is_an_error() {
        let mesh = generate_mesh(4, &OmegaSpec::disk()).unwrap();
        let text = mesh_to_string(&mesh);
        let cut: String = text.lines().take(10).collect::<Vec<_>>().join("\n");
        assert!(matches!(read_mesh(cut.as_bytes()), Err(Error::Parse(_))));
    }
}
