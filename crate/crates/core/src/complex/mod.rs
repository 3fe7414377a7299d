//! Oriented simplicial complexes with metric edge-length data, labeled
//! boundary components and product collars.

pub mod cylinder;
pub mod generators;
pub mod meshio;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::geometry::{subsets, SimplexMetric};
use crate::sparse::IntCsr;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// A real-valued p-cochain on a [`CellComplex`].
#[derive(Debug, Clone)]
pub struct Cochain {
    pub complex_id: u64,
    pub degree: usize,
    pub values: Vec<f64>,
}

impl Cochain {
    pub fn zeros(complex: &CellComplex, degree: usize) -> Self {
        Cochain {
            complex_id: complex.id(),
            degree,
            values: vec![0.0; complex.cell_count(degree)],
        }
    }
}

/// Cylinder attachment request: length `a` spread over `layers` prism layers
/// on the targeted boundary components (all components when empty).
#[derive(Debug, Clone)]
pub struct CylinderSpec {
    pub length: f64,
    pub layers: usize,
    pub components: Vec<String>,
    /// Upper bound on layer thickness / cross-edge length.
    pub max_aspect: f64,
}

impl CylinderSpec {
    pub fn new(length: f64, layers: usize) -> Self {
        CylinderSpec { length, layers, components: Vec::new(), max_aspect: 20.0 }
    }
}

/// Product collar bookkeeping for one boundary component: `rings[j][i]` is
/// the M-vertex sitting `j` layers inside the boundary over boundary vertex
/// `rings[0][i]`. Ring index 0 is the boundary itself.
#[derive(Debug, Clone)]
pub struct BoundaryComponent {
    pub name: String,
    /// Y-local vertex ids of this component, in ring order.
    pub y_vertices: Vec<usize>,
    /// Collar rings as M-vertex ids; `rings[0]` matches `y_vertices`.
    pub rings: Vec<Vec<usize>>,
}

/// Global collar record: every boundary component carries `layers` product
/// layers of constant `thickness`.
#[derive(Debug, Clone, Copy)]
pub struct CollarInfo {
    pub layers: usize,
    pub thickness: f64,
}

/// The boundary Y of the complex, realized as its own closed oriented
/// complex of dimension n-1 plus injection maps into the parent.
#[derive(Debug)]
pub struct BoundaryStructure {
    pub complex: Box<CellComplex>,
    /// `inject[k][y_cell]` = parent cell index, for k = 0..n-1.
    pub inject: Vec<Vec<usize>>,
    pub components: Vec<BoundaryComponent>,
    /// Component id of each Y vertex.
    pub vertex_component: Vec<usize>,
    /// Component id of each Y top cell.
    pub top_component: Vec<usize>,
}

/// Raw construction data handed to [`CellComplex::new`]. Top cells are given
/// as ordered vertex tuples; their permutation parity relative to sorted
/// order encodes the orientation.
pub struct ComplexData {
    pub dim: usize,
    pub vertex_count: usize,
    pub top_cells: Vec<Vec<usize>>,
    /// Edge lengths keyed by (min, max) vertex pair. Must cover every edge.
    pub edge_lengths: HashMap<(usize, usize), f64>,
    pub vertex_coords: Option<Vec<Vec<f64>>>,
    /// Boundary components: name and ordered boundary vertex rings
    /// (`rings[0]` = boundary vertices; further rings are collar layers).
    pub components: Vec<(String, Vec<Vec<usize>>)>,
    pub collar: Option<CollarInfo>,
}

/// Oriented simplicial complex with metric edge lengths.
#[derive(Debug)]
pub struct CellComplex {
    id: u64,
    dim: usize,
    /// cells[k]: sorted vertex tuples; cells[0][v] = [v].
    cells: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
    edge_lengths: Vec<f64>,
    /// Orientation of each top cell relative to its sorted vertex order.
    top_orientation: Vec<i8>,
    vertex_coords: Option<Vec<Vec<f64>>>,
    boundary: Option<BoundaryStructure>,
    collar: Option<CollarInfo>,
    /// interior[k][c] = cell not contained in the boundary.
    interior: Vec<Vec<bool>>,
}

fn sort_with_parity(cell: &[usize]) -> (Vec<usize>, i8) {
    let mut v = cell.to_vec();
    let mut sign = 1i8;
    // insertion sort, counting swaps
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    (v, sign)
}

impl CellComplex {
    pub fn new(data: ComplexData) -> Result<Self> {
        let n = data.dim;
        if n == 0 {
            return Err(Error::Parameter("dimension must be positive".into()));
        }
        for c in &data.top_cells {
            if c.len() != n + 1 {
                return Err(Error::Structure(format!(
                    "top cell {:?} has {} vertices, expected {}",
                    c,
                    c.len(),
                    n + 1
                )));
            }
            for &v in c {
                if v >= data.vertex_count {
                    return Err(Error::Structure(format!("vertex {v} out of range")));
                }
            }
        }

        // canonical top cells with orientation signs
        let mut cells: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n + 1];
        let mut index: Vec<HashMap<Vec<usize>, usize>> = vec![HashMap::new(); n + 1];
        for v in 0..data.vertex_count {
            index[0].insert(vec![v], v);
            cells[0].push(vec![v]);
        }
        let mut top_orientation = Vec::with_capacity(data.top_cells.len());
        for c in &data.top_cells {
            let (sorted, sign) = sort_with_parity(c);
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Structure(format!("degenerate cell {:?}", c)));
            }
            if index[n].contains_key(&sorted) {
                return Err(Error::Structure(format!("duplicate top cell {:?}", c)));
            }
            index[n].insert(sorted.clone(), cells[n].len());
            cells[n].push(sorted);
            top_orientation.push(sign);
        }
        // close under faces, degree by degree
        for k in (1..n).rev() {
            let upper: Vec<Vec<usize>> = cells[k + 1].clone();
            for cell in &upper {
                for drop in 0..cell.len() {
                    let face: Vec<usize> = cell
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != drop)
                        .map(|(_, &v)| v)
                        .collect();
                    if !index[k].contains_key(&face) {
                        index[k].insert(face.clone(), cells[k].len());
                        cells[k].push(face);
                    }
                }
            }
        }

        // edge lengths
        let mut edge_lengths = vec![0.0; cells[1].len()];
        for (i, e) in cells[1].iter().enumerate() {
            let key = (e[0], e[1]);
            let l = *data
                .edge_lengths
                .get(&key)
                .ok_or_else(|| Error::Structure(format!("missing length for edge {:?}", e)))?;
            if !(l > 0.0) {
                return Err(Error::Structure(format!("non-positive edge length on {:?}", e)));
            }
            edge_lengths[i] = l;
        }

        let mut complex = CellComplex {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            dim: n,
            cells,
            index,
            edge_lengths,
            top_orientation,
            vertex_coords: data.vertex_coords,
            boundary: None,
            collar: data.collar,
            interior: Vec::new(),
        };

        // all top cells must have positive metric volume
        for t in 0..complex.cells[n].len() {
            complex.simplex_metric(n, t)?;
        }

        complex.check_orientation()?;
        complex.build_boundary(&data.components)?;
        complex.build_interior_masks();
        Ok(complex)
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cell_count(&self, k: usize) -> usize {
        if k <= self.dim {
            self.cells[k].len()
        } else {
            0
        }
    }

    pub fn cells(&self, k: usize) -> &[Vec<usize>] {
        &self.cells[k]
    }

    pub fn cell_index(&self, k: usize, sorted_cell: &[usize]) -> Option<usize> {
        self.index[k].get(sorted_cell).copied()
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_lengths
    }

    pub fn edge_length(&self, a: usize, b: usize) -> Option<f64> {
        let key = if a < b { vec![a, b] } else { vec![b, a] };
        self.cell_index(1, &key).map(|i| self.edge_lengths[i])
    }

    pub fn top_orientation(&self) -> &[i8] {
        &self.top_orientation
    }

    pub fn vertex_coords(&self) -> Option<&Vec<Vec<f64>>> {
        self.vertex_coords.as_ref()
    }

    pub fn collar(&self) -> Option<CollarInfo> {
        self.collar
    }

    pub fn boundary_structure(&self) -> Option<&BoundaryStructure> {
        self.boundary.as_ref()
    }

    pub fn has_boundary(&self) -> bool {
        self.boundary.is_some()
    }

    /// `interior[k][c]`: true when cell c of degree k is not a boundary cell.
    pub fn interior_mask(&self, k: usize) -> &[bool] {
        &self.interior[k]
    }

    pub fn euler_characteristic(&self) -> i64 {
        let mut chi = 0i64;
        for k in 0..=self.dim {
            let c = self.cells[k].len() as i64;
            chi += if k % 2 == 0 { c } else { -c };
        }
        chi
    }

    /// Metric of one k-cell (from edge lengths).
    pub fn simplex_metric(&self, k: usize, cell: usize) -> Result<SimplexMetric> {
        let verts = &self.cells[k][cell];
        SimplexMetric::from_edge_lengths(k, |i, j| {
            let l = self
                .edge_length(verts[i], verts[j])
                .unwrap_or_else(|| panic!("missing edge ({},{})", verts[i], verts[j]));
            l * l
        })
    }

    pub fn cell_volume(&self, k: usize, cell: usize) -> Result<f64> {
        Ok(self.simplex_metric(k, cell)?.volume)
    }

    /// Total volume: sum of top-cell volumes.
    pub fn volume(&self) -> f64 {
        (0..self.cells[self.dim].len())
            .map(|t| self.cell_volume(self.dim, t).expect("validated at build"))
            .sum()
    }

    /// Volume of one boundary component.
    pub fn boundary_component_volume(&self, component: usize) -> f64 {
        let b = self.boundary.as_ref().expect("no boundary");
        let y = &b.complex;
        (0..y.cell_count(y.dim))
            .filter(|&c| b.top_component[c] == component)
            .map(|c| y.cell_volume(y.dim, c).expect("validated"))
            .sum()
    }

    pub fn boundary_volume(&self) -> f64 {
        let b = self.boundary.as_ref().expect("no boundary");
        (0..b.components.len()).map(|c| self.boundary_component_volume(c)).sum()
    }

    /// Signed incidence matrix ∂_p from p-chains to (p-1)-chains.
    pub fn boundary_matrix(&self, p: usize) -> Result<IntCsr> {
        if p == 0 || p > self.dim {
            return Err(Error::Degree { op: "boundary_matrix", degree: p, dim: self.dim });
        }
        let mut triplets = Vec::new();
        for (ci, cell) in self.cells[p].iter().enumerate() {
            for drop in 0..cell.len() {
                let face: Vec<usize> = cell
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != drop)
                    .map(|(_, &v)| v)
                    .collect();
                let fi = self.index[p - 1][&face];
                let sign = if drop % 2 == 0 { 1 } else { -1 };
                triplets.push((fi, ci, sign));
            }
        }
        Ok(IntCsr::from_triplets(self.cells[p - 1].len(), self.cells[p].len(), &triplets))
    }

    /// Integer coboundary d_p: C^p -> C^{p+1} (transpose of ∂_{p+1}).
    pub fn coboundary(&self, p: usize) -> Result<IntCsr> {
        if p >= self.dim {
            return Err(Error::Degree { op: "coboundary", degree: p, dim: self.dim });
        }
        let bd = self.boundary_matrix(p + 1)?;
        let mut triplets = Vec::with_capacity(bd.nnz());
        for r in 0..bd.nrows {
            for k in bd.indptr[r]..bd.indptr[r + 1] {
                triplets.push((bd.indices[k], r, bd.data[k]));
            }
        }
        Ok(IntCsr::from_triplets(self.cells[p + 1].len(), self.cells[p].len(), &triplets))
    }

    /// Pullback of a p-cochain to the boundary complex (the map i*).
    pub fn restrict_to_boundary(&self, omega: &Cochain) -> Result<Cochain> {
        if omega.complex_id != self.id {
            return Err(Error::Input("cochain belongs to a different complex".into()));
        }
        let p = omega.degree;
        if p >= self.dim {
            return Err(Error::Degree { op: "restrict_to_boundary", degree: p, dim: self.dim });
        }
        let b = self
            .boundary
            .as_ref()
            .ok_or_else(|| Error::Structure("complex has no boundary".into()))?;
        let mut out = Cochain::zeros(&b.complex, p);
        for (yc, &mc) in b.inject[p].iter().enumerate() {
            out.values[yc] = omega.values[mc];
        }
        Ok(out)
    }

    /// Coefficients of ∂(fundamental class) on (n-1)-cells, plus coface counts.
    fn face_incidence(&self) -> (Vec<i64>, Vec<u8>) {
        let n = self.dim;
        let mut acc: Vec<i64> = vec![0; self.cells[n - 1].len()];
        let mut seen: Vec<u8> = vec![0; self.cells[n - 1].len()];
        for (ti, cell) in self.cells[n].iter().enumerate() {
            let or = self.top_orientation[ti] as i64;
            for drop in 0..cell.len() {
                let face: Vec<usize> = cell
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != drop)
                    .map(|(_, &v)| v)
                    .collect();
                let fi = self.index[n - 1][&face];
                let sign = if drop % 2 == 0 { 1 } else { -1 };
                acc[fi] += or * sign;
                seen[fi] += 1;
            }
        }
        (acc, seen)
    }

    /// Verify the two cofaces of every interior (n-1)-cell induce opposite
    /// orientations; boundary cells have exactly one coface.
    fn check_orientation(&self) -> Result<()> {
        let n = self.dim;
        let (acc, seen) = self.face_incidence();
        for fi in 0..acc.len() {
            match seen[fi] {
                1 => {
                    if acc[fi].abs() != 1 {
                        return Err(Error::Structure("inconsistent boundary orientation".into()));
                    }
                }
                2 => {
                    if acc[fi] != 0 {
                        return Err(Error::Structure(
                            "orientation is not globally consistent".into(),
                        ));
                    }
                }
                _ => {
                    return Err(Error::Structure(format!(
                        "cell {:?} has {} cofaces; not a manifold complex",
                        self.cells[n - 1][fi],
                        seen[fi]
                    )))
                }
            }
        }
        Ok(())
    }

    fn build_boundary(&mut self, declared: &[(String, Vec<Vec<usize>>)]) -> Result<()> {
        let n = self.dim;
        let (induced, _) = self.face_incidence();
        let boundary_cells: Vec<usize> =
            (0..self.cells[n - 1].len()).filter(|&c| induced[c] != 0).collect();
        if boundary_cells.is_empty() {
            if !declared.is_empty() {
                return Err(Error::Structure(
                    "boundary components declared on a closed complex".into(),
                ));
            }
            return Ok(());
        }
        if declared.is_empty() {
            return Err(Error::Structure(
                "complex has boundary but no components were declared".into(),
            ));
        }

        // vertex -> component from the declared rings
        let mut vertex_comp: HashMap<usize, usize> = HashMap::new();
        for (ci, (_, rings)) in declared.iter().enumerate() {
            let ring0 = rings
                .first()
                .ok_or_else(|| Error::Structure("boundary component without vertices".into()))?;
            for &v in ring0 {
                if vertex_comp.insert(v, ci).is_some() {
                    return Err(Error::Structure(format!(
                        "vertex {v} in two boundary components"
                    )));
                }
            }
        }

        // assign each boundary top cell to a component
        let mut top_assign: Vec<(usize, usize)> = Vec::new(); // (parent cell, component)
        for &c in &boundary_cells {
            let comps: Vec<Option<&usize>> =
                self.cells[n - 1][c].iter().map(|v| vertex_comp.get(v)).collect();
            let first = comps[0]
                .ok_or_else(|| Error::Structure("boundary cell outside declared components".into()))?;
            if comps.iter().any(|c| c != &Some(first)) {
                return Err(Error::Structure("boundary cell spans two components".into()));
            }
            top_assign.push((c, *first));
        }

        // Y vertex order: component-major, ring order within component
        let mut y_vertex_of_parent: HashMap<usize, usize> = HashMap::new();
        let mut parent_of_y_vertex: Vec<usize> = Vec::new();
        let mut components_meta = Vec::new();
        let mut vertex_component = Vec::new();
        for (ci, (name, rings)) in declared.iter().enumerate() {
            let mut y_vertices = Vec::new();
            for &v in &rings[0] {
                let y = parent_of_y_vertex.len();
                y_vertex_of_parent.insert(v, y);
                parent_of_y_vertex.push(v);
                vertex_component.push(ci);
                y_vertices.push(y);
            }
            components_meta.push(BoundaryComponent {
                name: name.clone(),
                y_vertices,
                rings: rings.clone(),
            });
        }

        // Y top cells in parent-cell order, relabeled to Y vertices
        let mut y_top_cells = Vec::new();
        let mut y_top_component = Vec::new();
        for &(c, comp) in &top_assign {
            let cell = &self.cells[n - 1][c];
            let mut y_cell: Vec<usize> = cell
                .iter()
                .map(|v| {
                    y_vertex_of_parent.get(v).copied().ok_or_else(|| {
                        Error::Structure("boundary cell vertex not in component rings".into())
                    })
                })
                .collect::<Result<_>>()?;
            // orientation: parent sorted cell carries induced sign; encode it
            // in the tuple order handed to the Y complex
            if induced[c] < 0 {
                let len = y_cell.len();
                y_cell.swap(len - 2, len - 1);
            }
            y_top_cells.push(y_cell);
            y_top_component.push(comp);
        }

        // edge lengths of Y from parent lengths
        let mut y_edges: HashMap<(usize, usize), f64> = HashMap::new();
        for cell in &y_top_cells {
            for pair in subsets(cell.len(), 2) {
                let (a, b) = (cell[pair[0]], cell[pair[1]]);
                let (a, b) = (a.min(b), a.max(b));
                let (pa, pb) = (parent_of_y_vertex[a], parent_of_y_vertex[b]);
                let l = self.edge_length(pa, pb).ok_or_else(|| {
                    Error::Structure("boundary cell edge missing in parent".into())
                })?;
                y_edges.insert((a, b), l);
            }
        }

        let y_complex = CellComplex::new(ComplexData {
            dim: n - 1,
            vertex_count: parent_of_y_vertex.len(),
            top_cells: y_top_cells,
            edge_lengths: y_edges,
            vertex_coords: None,
            components: Vec::new(),
            collar: None,
        })?;

        // injection maps per degree
        let mut inject = Vec::new();
        for k in 0..n {
            let mut map = vec![0usize; y_complex.cell_count(k)];
            for (yc, ycell) in y_complex.cells(k).iter().enumerate() {
                let parent_cell: Vec<usize> = {
                    let mut c: Vec<usize> =
                        ycell.iter().map(|&v| parent_of_y_vertex[v]).collect();
                    c.sort_unstable();
                    c
                };
                map[yc] = self.index[k].get(&parent_cell).copied().ok_or_else(|| {
                    Error::Structure("boundary subcomplex cell missing in parent".into())
                })?;
            }
            inject.push(map);
        }

        // Y top cells keep their insertion order in the Y complex
        let top_component = y_top_component;

        // collar consistency
        if let Some(collar) = self.collar {
            for comp in &components_meta {
                if comp.rings.len() < collar.layers + 1 {
                    return Err(Error::Structure(format!(
                        "component {} has {} rings, collar declares {} layers",
                        comp.name,
                        comp.rings.len(),
                        collar.layers
                    )));
                }
                for ring in &comp.rings {
                    if ring.len() != comp.rings[0].len() {
                        return Err(Error::Structure("collar rings of unequal size".into()));
                    }
                }
            }
        }

        self.boundary = Some(BoundaryStructure {
            complex: Box::new(y_complex),
            inject,
            components: components_meta,
            vertex_component,
            top_component,
        });
        Ok(())
    }

    fn build_interior_masks(&mut self) {
        let n = self.dim;
        let mut masks = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut mask = vec![true; self.cells[k].len()];
            if k < n {
                if let Some(b) = &self.boundary {
                    for &mc in &b.inject[k] {
                        mask[mc] = false;
                    }
                }
            }
            masks.push(mask);
        }
        self.interior = masks;
    }

    /// Map a Y-cochain coefficient vector to the parent complex (zero off Y).
    pub fn extend_by_zero(&self, phi: &Cochain) -> Result<Cochain> {
        let b = self
            .boundary
            .as_ref()
            .ok_or_else(|| Error::Structure("complex has no boundary".into()))?;
        if phi.complex_id != b.complex.id() {
            return Err(Error::Input("cochain does not live on the boundary complex".into()));
        }
        let mut out = Cochain::zeros(self, phi.degree);
        for (yc, &mc) in b.inject[phi.degree].iter().enumerate() {
            out.values[mc] = phi.values[yc];
        }
        Ok(out)
    }
}
