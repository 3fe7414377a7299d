//! Product-layer attachment: grow cylinders `[0,a] × Y` over boundary
//! components, prism by prism, with the staircase simplex split.

use std::collections::HashMap;

use super::{CellComplex, CollarInfo, ComplexData, CylinderSpec};
use crate::error::{Error, Result};

/// Re-express a top cell as an ordered tuple encoding orientation `sign`
/// relative to its sorted order.
fn oriented_tuple(sorted: &[usize], sign: i8) -> Vec<usize> {
    let mut t = sorted.to_vec();
    if sign < 0 {
        let l = t.len();
        t.swap(l - 2, l - 1);
    }
    t
}

/// Orient top cells consistently by propagating across shared faces. Cells
/// with `fixed` set keep their handed orientation; the sweep fails if the
/// fixed cells are mutually inconsistent. Components without a fixed cell
/// take +1 on their lowest-index cell.
pub fn orient_consistently(
    dim: usize,
    top_cells: &[Vec<usize>],
    fixed: &[bool],
) -> Result<Vec<Vec<usize>>> {
    debug_assert!(top_cells.iter().all(|c| c.len() == dim + 1));
    // face key -> (cell, induced coefficient under handed orientation)
    let mut face_map: HashMap<Vec<usize>, Vec<(usize, i8)>> = HashMap::new();
    let mut handed_sign = vec![1i8; top_cells.len()];
    for (ci, cell) in top_cells.iter().enumerate() {
        let (sorted, parity) = super::sort_with_parity(cell);
        handed_sign[ci] = parity;
        for drop in 0..sorted.len() {
            let face: Vec<usize> = sorted
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != drop)
                .map(|(_, &v)| v)
                .collect();
            let coeff = parity * if drop % 2 == 0 { 1 } else { -1 };
            face_map.entry(face).or_default().push((ci, coeff));
        }
    }
    for (face, cofaces) in &face_map {
        if cofaces.len() > 2 {
            return Err(Error::Structure(format!(
                "face {:?} has {} cofaces",
                face,
                cofaces.len()
            )));
        }
    }
    // flip[c]: multiply handed orientation by ±1; seed from fixed cells first
    let mut flip: Vec<i8> = vec![0; top_cells.len()];
    let mut queue = std::collections::VecDeque::new();
    let seeds: Vec<usize> = (0..top_cells.len())
        .filter(|&c| fixed[c])
        .chain((0..top_cells.len()).filter(|&c| !fixed[c]))
        .collect();
    for start in seeds {
        if flip[start] != 0 {
            continue;
        }
        flip[start] = 1;
        queue.push_back(start);
        while let Some(c) = queue.pop_front() {
            let cell = &top_cells[c];
            let (sorted, _) = super::sort_with_parity(cell);
            for drop in 0..sorted.len() {
                let face: Vec<usize> = sorted
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != drop)
                    .map(|(_, &v)| v)
                    .collect();
                let pair = &face_map[&face];
                for &(other, other_handed) in pair {
                    if other == c {
                        continue;
                    }
                    let my_coeff = pair.iter().find(|&&(cc, _)| cc == c).unwrap().1 * flip[c];
                    // total induced coefficients must cancel
                    let needed = if my_coeff * other_handed == 1 { -1 } else { 1 };
                    if flip[other] == 0 {
                        flip[other] = needed;
                        queue.push_back(other);
                    } else if flip[other] != needed {
                        return Err(Error::Structure(
                            "complex is not consistently orientable".into(),
                        ));
                    }
                }
            }
        }
    }
    // fixed cells must not have flipped
    for c in 0..top_cells.len() {
        if fixed[c] && flip[c] == -1 {
            return Err(Error::Structure(
                "orientation sweep conflicts with prescribed orientation".into(),
            ));
        }
    }
    let mut out = Vec::with_capacity(top_cells.len());
    for (ci, cell) in top_cells.iter().enumerate() {
        let (sorted, _) = super::sort_with_parity(cell);
        out.push(oriented_tuple(&sorted, handed_sign[ci] * flip[ci]));
    }
    Ok(out)
}

/// Internal attachment engine shared by `attach_cylinder` and the model
/// generators (which call it with `require_collar = false` to grow collars).
pub(crate) fn attach_layers(
    m: &CellComplex,
    spec: &CylinderSpec,
    require_collar: bool,
) -> Result<CellComplex> {
    if spec.length < 0.0 {
        return Err(Error::Parameter("cylinder length must be nonnegative".into()));
    }
    if spec.layers == 0 {
        return Err(Error::Parameter("layer count must be at least 1".into()));
    }
    let b = m
        .boundary_structure()
        .ok_or_else(|| Error::Structure("cannot attach a cylinder: no boundary".into()))?;
    let targets: Vec<usize> = if spec.components.is_empty() {
        (0..b.components.len()).collect()
    } else {
        spec.components
            .iter()
            .map(|name| {
                b.components
                    .iter()
                    .position(|c| &c.name == name)
                    .ok_or_else(|| Error::Structure(format!("no boundary component `{name}`")))
            })
            .collect::<Result<_>>()?
    };
    if spec.length == 0.0 {
        return rebuild(m);
    }
    if require_collar {
        if m.collar().is_none() {
            return Err(Error::Structure(
                "attach_cylinder requires a product collar on the target components".into(),
            ));
        }
        for &t in &targets {
            if b.components[t].rings.len() < 2 {
                return Err(Error::Structure(format!(
                    "component {} lacks collar rings",
                    b.components[t].name
                )));
            }
        }
    }
    let delta = spec.length / spec.layers as f64;
    // aspect guard against needle cells
    let min_cross = b.complex.edge_lengths().iter().copied().fold(f64::INFINITY, f64::min);
    if delta / min_cross > spec.max_aspect {
        return Err(Error::Parameter(format!(
            "layer thickness {delta:.3e} exceeds aspect limit over cross edge {min_cross:.3e}"
        )));
    }

    // assemble new complex data
    let n = m.dim();
    let mut vertex_count = m.cell_count(0);
    let mut edge_lengths: HashMap<(usize, usize), f64> = HashMap::new();
    for (ei, e) in m.cells(1).iter().enumerate() {
        edge_lengths.insert((e[0], e[1]), m.edge_lengths()[ei]);
    }
    let mut top_cells: Vec<Vec<usize>> = (0..m.cell_count(n))
        .map(|t| oriented_tuple(&m.cells(n)[t], m.top_orientation()[t]))
        .collect();
    let fixed_count = top_cells.len();

    let mut components: Vec<(String, Vec<Vec<usize>>)> = Vec::new();
    let y = &b.complex;
    for (t, comp) in b.components.iter().enumerate() {
        if !targets.contains(&t) {
            components.push((comp.name.clone(), comp.rings.clone()));
            continue;
        }
        // ring stack: layer 0 = old boundary, layer `layers` = new boundary
        let ring_size = comp.y_vertices.len();
        let mut stack: Vec<Vec<usize>> = vec![comp.rings[0].clone()];
        for _ in 0..spec.layers {
            let ring: Vec<usize> = (0..ring_size)
                .map(|_| {
                    let v = vertex_count;
                    vertex_count += 1;
                    v
                })
                .collect();
            stack.push(ring);
        }
        // vertex position within the component of each Y vertex
        let mut pos_of_y = HashMap::new();
        for (i, &yv) in comp.y_vertices.iter().enumerate() {
            pos_of_y.insert(yv, i);
        }
        // vertical edges
        for j in 0..spec.layers {
            for i in 0..ring_size {
                let (a, c) = (stack[j][i], stack[j + 1][i]);
                edge_lengths.insert((a.min(c), a.max(c)), delta);
            }
        }
        // horizontal + diagonal edges and prisms over Y top cells
        for (yc, ycell) in y.cells(n - 1).iter().enumerate() {
            if b.top_component[yc] != t {
                continue;
            }
            // local positions sorted by Y-vertex id (globally consistent)
            let locs: Vec<usize> = ycell.iter().map(|yv| pos_of_y[yv]).collect();
            let cross_len = |a: usize, bb: usize| -> f64 {
                let (pa, pb) = (comp.rings[0][a], comp.rings[0][bb]);
                m.edge_length(pa, pb).expect("cross edge exists in parent")
            };
            for j in 0..spec.layers {
                let bot = &stack[j];
                let top = &stack[j + 1];
                // horizontal copies on the new ring
                for ai in 0..locs.len() {
                    for bi in (ai + 1)..locs.len() {
                        let l = cross_len(locs[ai], locs[bi]);
                        let (u, v) = (top[locs[ai]], top[locs[bi]]);
                        edge_lengths.insert((u.min(v), u.max(v)), l);
                        // diagonals of the prism wall
                        let (du, dv) = (bot[locs[ai]], top[locs[bi]]);
                        edge_lengths
                            .insert((du.min(dv), du.max(dv)), (l * l + delta * delta).sqrt());
                        let (du, dv) = (bot[locs[bi]], top[locs[ai]]);
                        edge_lengths
                            .insert((du.min(dv), du.max(dv)), (l * l + delta * delta).sqrt());
                    }
                }
                // staircase split of the prism over this cell
                let order = locs.clone(); // ycell is sorted, so this is Y-id order
                for k in 0..n {
                    let mut cell = Vec::with_capacity(n + 1);
                    for x in order.iter().take(k + 1) {
                        cell.push(bot[*x]);
                    }
                    for x in order.iter().skip(k).take(n - k) {
                        cell.push(top[*x]);
                    }
                    top_cells.push(cell);
                }
            }
        }
        // new rings: outermost first, then inward through old rings
        let mut rings: Vec<Vec<usize>> = Vec::new();
        for j in (0..=spec.layers).rev() {
            rings.push(stack[j].clone());
        }
        for r in comp.rings.iter().skip(1) {
            rings.push(r.clone());
        }
        components.push((comp.name.clone(), rings));
    }

    let mut fixed = vec![false; top_cells.len()];
    fixed[..fixed_count].iter_mut().for_each(|f| *f = true);
    let oriented = orient_consistently(n, &top_cells, &fixed)?;

    let collar_layers = components
        .iter()
        .map(|(_, rings)| rings.len().saturating_sub(1))
        .min()
        .unwrap_or(0);
    CellComplex::new(ComplexData {
        dim: n,
        vertex_count,
        top_cells: oriented,
        edge_lengths,
        vertex_coords: None,
        components,
        collar: Some(CollarInfo { layers: collar_layers.min(spec.layers), thickness: delta }),
    })
}

/// Structural copy with a fresh id (used for the a = 0 identity case).
pub(crate) fn rebuild(m: &CellComplex) -> Result<CellComplex> {
    let n = m.dim();
    let mut edge_lengths = HashMap::new();
    for (ei, e) in m.cells(1).iter().enumerate() {
        edge_lengths.insert((e[0], e[1]), m.edge_lengths()[ei]);
    }
    let top_cells: Vec<Vec<usize>> = (0..m.cell_count(n))
        .map(|t| oriented_tuple(&m.cells(n)[t], m.top_orientation()[t]))
        .collect();
    let components = m
        .boundary_structure()
        .map(|b| {
            b.components
                .iter()
                .map(|c| (c.name.clone(), c.rings.clone()))
                .collect::<Vec<_>>()
        })
        .unwrap_or_default();
    CellComplex::new(ComplexData {
        dim: n,
        vertex_count: m.cell_count(0),
        top_cells,
        edge_lengths,
        vertex_coords: m.vertex_coords().cloned(),
        components,
        collar: m.collar(),
    })
}

/// Attach the cylinder [0, a] × Y over the targeted boundary components
/// (all of Y by default). Volumes add exactly: Vol(M_a) = Vol(M) + a·Vol(Y).
pub fn attach_cylinder(m: &CellComplex, spec: &CylinderSpec) -> Result<CellComplex> {
    attach_layers(m, spec, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::generators::{generate_model, ModelSpec};

    #[test]
    fn cylinder_volume_additivity() {
        let (m, _) = generate_model(
            &ModelSpec::FlatCylinder { length: 2.0, circumference: 1.0 },
            16,
        )
        .unwrap();
        let vol = m.volume();
        assert!((vol - 2.0).abs() < 1e-12, "vol = {vol}");
        let ma = attach_cylinder(&m, &CylinderSpec::new(1.0, 8)).unwrap();
        assert!((ma.volume() - (vol + 1.0 * m.boundary_volume())).abs() < 1e-11);
        // boundary volume is preserved
        assert!((ma.boundary_volume() - m.boundary_volume()).abs() < 1e-12);
    }

    #[test]
    fn zero_length_is_identity() {
        let (m, _) = generate_model(
            &ModelSpec::FlatCylinder { length: 1.0, circumference: 1.0 },
            8,
        )
        .unwrap();
        let m0 = attach_cylinder(&m, &CylinderSpec::new(0.0, 1)).unwrap();
        assert_eq!(m0.cell_count(0), m.cell_count(0));
        assert_eq!(m0.cell_count(2), m.cell_count(2));
        assert!((m0.volume() - m.volume()).abs() < 1e-14);
    }

    #[test]
    fn attach_associativity_in_a() {
        let (m, _) = generate_model(
            &ModelSpec::FlatCylinder { length: 1.0, circumference: 1.0 },
            8,
        )
        .unwrap();
        let once = attach_cylinder(&m, &CylinderSpec::new(1.0, 8)).unwrap();
        let twice = attach_cylinder(&once, &CylinderSpec::new(0.5, 4)).unwrap();
        let direct = attach_cylinder(&m, &CylinderSpec::new(1.5, 12)).unwrap();
        assert_eq!(twice.cell_count(0), direct.cell_count(0));
        assert_eq!(twice.cell_count(1), direct.cell_count(1));
        assert_eq!(twice.cell_count(2), direct.cell_count(2));
        assert!((twice.volume() - direct.volume()).abs() < 1e-11);
    }
}
