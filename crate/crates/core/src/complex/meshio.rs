//! Reader/writer for the `mwce-mesh v1` ASCII format.
//!
//! Layout (whitespace-separated decimal text, 0-based indices):
//!
//! ```text
//! mwce-mesh 1 <n>
//! cells <k> <count>      one row of k+1 vertex indices per cell
//! ...                    one block per degree 0..=n
//! edgelen <count>        one length per line, in cells-1 order
//! boundary <name> <count>  one (n-1)-cell index per line
//! collar <layers> <thickness>
//! ```
//!
//! Top-cell rows encode orientation through their permutation parity.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::cylinder::orient_consistently;
use super::{CellComplex, CollarInfo, ComplexData};
use crate::error::{Error, Result};

pub fn write_mesh<W: Write>(m: &CellComplex, out: &mut W) -> Result<()> {
    let n = m.dim();
    writeln!(out, "mwce-mesh 1 {n}")?;
    for k in 0..=n {
        writeln!(out, "cells {k} {}", m.cell_count(k))?;
        for (ci, cell) in m.cells(k).iter().enumerate() {
            let mut row = cell.clone();
            if k == n && m.top_orientation()[ci] < 0 {
                row.swap(n - 1, n);
            }
            let text: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", text.join(" "))?;
        }
    }
    writeln!(out, "edgelen {}", m.cell_count(1))?;
    for l in m.edge_lengths() {
        writeln!(out, "{l}")?;
    }
    if let Some(b) = m.boundary_structure() {
        for (ci, comp) in b.components.iter().enumerate() {
            let cells: Vec<usize> = (0..b.complex.cell_count(n - 1))
                .filter(|&c| b.top_component[c] == ci)
                .map(|c| b.inject[n - 1][c])
                .collect();
            writeln!(out, "boundary {} {}", comp.name, cells.len())?;
            for c in cells {
                writeln!(out, "{c}")?;
            }
        }
    }
    if let Some(collar) = m.collar() {
        writeln!(out, "collar {} {}", collar.layers, collar.thickness)?;
    }
    Ok(())
}

pub fn write_mesh_file(m: &CellComplex, path: &std::path::Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_mesh(m, &mut f)
}

struct Tokens {
    items: Vec<String>,
    pos: usize,
}

impl Tokens {
    fn next(&mut self) -> Result<&str> {
        let t = self
            .items
            .get(self.pos)
            .ok_or_else(|| Error::MeshFormat("unexpected end of file".into()))?;
        self.pos += 1;
        Ok(t)
    }
    fn next_usize(&mut self) -> Result<usize> {
        let t = self.next()?;
        t.parse().map_err(|_| Error::MeshFormat(format!("expected integer, found `{t}`")))
    }
    fn next_f64(&mut self) -> Result<f64> {
        let t = self.next()?;
        t.parse().map_err(|_| Error::MeshFormat(format!("expected number, found `{t}`")))
    }
    fn done(&self) -> bool {
        self.pos >= self.items.len()
    }
}

pub fn read_mesh<R: BufRead>(input: R) -> Result<CellComplex> {
    let mut items = Vec::new();
    for line in input.lines() {
        let line = line?;
        for tok in line.split_whitespace() {
            items.push(tok.to_string());
        }
    }
    let mut t = Tokens { items, pos: 0 };
    if t.next()? != "mwce-mesh" {
        return Err(Error::MeshFormat("missing `mwce-mesh` header".into()));
    }
    if t.next_usize()? != 1 {
        return Err(Error::MeshFormat("unsupported format version".into()));
    }
    let n = t.next_usize()?;
    if n == 0 || n > 3 {
        return Err(Error::MeshFormat(format!("unsupported dimension {n}")));
    }

    let mut file_cells: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n + 1];
    for k in 0..=n {
        if t.next()? != "cells" {
            return Err(Error::MeshFormat(format!("expected `cells` block for degree {k}")));
        }
        let kk = t.next_usize()?;
        if kk != k {
            return Err(Error::MeshFormat(format!("cells block out of order: {kk} vs {k}")));
        }
        let count = t.next_usize()?;
        for _ in 0..count {
            let mut row = Vec::with_capacity(k + 1);
            for _ in 0..=k {
                row.push(t.next_usize()?);
            }
            file_cells[k].push(row);
        }
    }
    let vertex_count = file_cells[0].len();
    if t.next()? != "edgelen" {
        return Err(Error::MeshFormat("expected `edgelen` block".into()));
    }
    let ecount = t.next_usize()?;
    if ecount != file_cells[1].len() {
        return Err(Error::MeshFormat("edgelen count differs from edge count".into()));
    }
    let mut edge_lengths = HashMap::new();
    for e in 0..ecount {
        let l = t.next_f64()?;
        let mut pair = file_cells[1][e].clone();
        pair.sort_unstable();
        edge_lengths.insert((pair[0], pair[1]), l);
    }

    let mut boundary_blocks: Vec<(String, Vec<usize>)> = Vec::new();
    let mut collar = None;
    while !t.done() {
        match t.next()? {
            "boundary" => {
                let name = t.next()?.to_string();
                let count = t.next_usize()?;
                let mut cells = Vec::with_capacity(count);
                for _ in 0..count {
                    cells.push(t.next_usize()?);
                }
                boundary_blocks.push((name, cells));
            }
            "collar" => {
                let layers = t.next_usize()?;
                let thickness = t.next_f64()?;
                collar = Some(CollarInfo { layers, thickness });
            }
            other => {
                return Err(Error::MeshFormat(format!("unknown block `{other}`")));
            }
        }
    }

    // orientation: honor row parity, then make it globally consistent
    let fixed = vec![false; file_cells[n].len()];
    let oriented = orient_consistently(n, &file_cells[n], &fixed)?;

    // boundary rings: vertex sets of the referenced (n-1)-cells, ordered by
    // walking (circles) or ascending id (surfaces)
    let mut components = Vec::new();
    for (name, cell_ids) in &boundary_blocks {
        let mut cells = Vec::new();
        for &ci in cell_ids {
            let cell = file_cells[n - 1]
                .get(ci)
                .ok_or_else(|| Error::MeshFormat(format!("boundary cell {ci} out of range")))?;
            let mut c = cell.clone();
            c.sort_unstable();
            cells.push(c);
        }
        let ring0 = if n == 2 { walk_circle(&cells)? } else { vertex_set(&cells) };
        components.push((name.clone(), vec![ring0]));
    }

    let mut complex = CellComplex::new(ComplexData {
        dim: n,
        vertex_count,
        top_cells: oriented,
        edge_lengths,
        vertex_coords: None,
        components,
        collar: None,
    })?;

    // closure must reproduce the file's cell sets
    for k in 1..n {
        if complex.cell_count(k) != file_cells[k].len() {
            return Err(Error::MeshFormat(format!(
                "degree-{k} cells do not match the closure of the top cells"
            )));
        }
        for cell in &file_cells[k] {
            let mut c = cell.clone();
            c.sort_unstable();
            if complex.cell_index(k, &c).is_none() {
                return Err(Error::MeshFormat(format!("cell {:?} not in closure", cell)));
            }
        }
    }

    if let Some(info) = collar {
        complex = reconstruct_collar(complex, info)?;
    }
    Ok(complex)
}

pub fn read_mesh_file(path: &std::path::Path) -> Result<CellComplex> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    read_mesh(f)
}

fn vertex_set(cells: &[Vec<usize>]) -> Vec<usize> {
    let mut vs: Vec<usize> = cells.iter().flatten().copied().collect();
    vs.sort_unstable();
    vs.dedup();
    vs
}

/// Order the vertices of a 1-manifold (cycle) by walking its edges.
fn walk_circle(edges: &[Vec<usize>]) -> Result<Vec<usize>> {
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for e in edges {
        adj.entry(e[0]).or_default().push(e[1]);
        adj.entry(e[1]).or_default().push(e[0]);
    }
    for (v, nb) in &adj {
        if nb.len() != 2 {
            return Err(Error::MeshFormat(format!(
                "boundary component is not a circle at vertex {v}"
            )));
        }
    }
    let start = *adj.keys().min().unwrap();
    let mut ring = vec![start];
    let mut prev = start;
    let mut cur = *adj[&start].iter().min().unwrap();
    while cur != start {
        ring.push(cur);
        let nb = &adj[&cur];
        let next = if nb[0] == prev { nb[1] } else { nb[0] };
        prev = cur;
        cur = next;
    }
    if ring.len() != adj.len() {
        return Err(Error::MeshFormat("boundary component is not a single circle".into()));
    }
    Ok(ring)
}

/// Rebuild product-collar ring metadata from the mesh: ring j+1 pairs each
/// ring-j vertex with its shortest-edge neighbor strictly inside.
fn reconstruct_collar(m: CellComplex, info: CollarInfo) -> Result<CellComplex> {
    let n = m.dim();
    let mut neighbor: HashMap<usize, Vec<(usize, f64)>> = HashMap::new();
    for (ei, e) in m.cells(1).iter().enumerate() {
        let l = m.edge_lengths()[ei];
        neighbor.entry(e[0]).or_default().push((e[1], l));
        neighbor.entry(e[1]).or_default().push((e[0], l));
    }
    let b = m
        .boundary_structure()
        .ok_or_else(|| Error::MeshFormat("collar block on a closed mesh".into()))?;
    let mut components = Vec::new();
    for comp in &b.components {
        let mut rings: Vec<Vec<usize>> = vec![comp.rings[0].clone()];
        let mut used: std::collections::HashSet<usize> = comp.rings[0].iter().copied().collect();
        for _layer in 0..info.layers {
            let prev = rings.last().unwrap().clone();
            let mut ring = Vec::with_capacity(prev.len());
            for &v in &prev {
                let cand = neighbor[&v]
                    .iter()
                    .filter(|(u, _)| !used.contains(u) && !prev.contains(u))
                    .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
                match cand {
                    Some(&(u, _)) => ring.push(u),
                    None => {
                        return Err(Error::MeshFormat(
                            "collar reconstruction failed: no axial neighbor".into(),
                        ))
                    }
                }
            }
            let mut uniq = ring.clone();
            uniq.sort_unstable();
            uniq.dedup();
            if uniq.len() != ring.len() {
                return Err(Error::MeshFormat(
                    "collar reconstruction failed: rings collide".into(),
                ));
            }
            used.extend(ring.iter().copied());
            rings.push(ring);
        }
        components.push((comp.name.clone(), rings));
    }
    // rebuild with ring metadata and the collar record
    let mut edge_lengths = HashMap::new();
    for (ei, e) in m.cells(1).iter().enumerate() {
        edge_lengths.insert((e[0], e[1]), m.edge_lengths()[ei]);
    }
    let top_cells: Vec<Vec<usize>> = (0..m.cell_count(n))
        .map(|t| {
            let mut row = m.cells(n)[t].clone();
            if m.top_orientation()[t] < 0 {
                row.swap(n - 1, n);
            }
            row
        })
        .collect();
    CellComplex::new(ComplexData {
        dim: n,
        vertex_count: m.cell_count(0),
        top_cells,
        edge_lengths,
        vertex_coords: None,
        components,
        collar: Some(info),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::generators::{generate_model, ModelSpec};

    #[test]
    fn roundtrip_flat_cylinder() {
        let (m, _) = generate_model(
            &ModelSpec::FlatCylinder { length: 1.0, circumference: 1.0 },
            8,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_mesh(&m, &mut buf).unwrap();
        let m2 = read_mesh(std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(m2.dim(), 2);
        assert_eq!(m2.cell_count(0), m.cell_count(0));
        assert_eq!(m2.cell_count(1), m.cell_count(1));
        assert_eq!(m2.cell_count(2), m.cell_count(2));
        assert!((m2.volume() - m.volume()).abs() < 1e-14);
        assert!((m2.boundary_volume() - m.boundary_volume()).abs() < 1e-14);
        assert_eq!(m2.collar().unwrap().layers, m.collar().unwrap().layers);
        // collar rings reconstructed with the right shape
        let b = m2.boundary_structure().unwrap();
        assert_eq!(b.components[0].rings.len(), 3);
        assert_eq!(b.components[0].rings[1].len(), 8);
        // writing again is bit-identical
        let mut buf2 = Vec::new();
        write_mesh(&m2, &mut buf2).unwrap();
        let m3 = read_mesh(std::io::Cursor::new(&buf2)).unwrap();
        let mut buf3 = Vec::new();
        write_mesh(&m3, &mut buf3).unwrap();
        assert_eq!(buf2, buf3);
    }

    #[test]
    fn corrupted_header_rejected() {
        let r = read_mesh(std::io::Cursor::new(b"mwce-mash 1 2\n"));
        assert!(r.is_err());
    }
}
