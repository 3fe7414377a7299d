//! Geometric bound machinery: comass constants, effective volume, boundary
//! distances, stable norms (exact codimension-one min-cuts, upper-bound
//! shortest homologous cycles) and the scattering-length sandwich checks.

use std::collections::BinaryHeap;

use serde::Serialize;

use crate::complex::CellComplex;
use crate::dec::BoundarySpectrum;
use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::scatlen::ScatteringReport;

/// Optimal constant in ‖ω‖² ≤ C(n,p) ‖ω‖²_∞ on p-covectors of ℝⁿ; exact for
/// p ∈ {0, 1, 2, n−2, n−1, n}, binomial upper bound otherwise.
pub fn comass_constant(n: usize, p: usize) -> Result<(f64, bool)> {
    if p > n {
        return Err(Error::Parameter(format!("comass constant needs p ≤ n, got ({n}, {p})")));
    }
    let q = p.min(n - p); // C(n, n−p) = C(n, p)
    match q {
        0 | 1 => Ok((1.0, true)),
        2 => Ok(((n / 2) as f64, true)),
        _ => {
            let mut c = 1.0f64;
            for i in 0..q {
                c = c * (n - i) as f64 / (i + 1) as f64;
            }
            Ok((c, false))
        }
    }
}

/// Vol_*(M) = Vol(M) + Vol(Y)/μ₁, the volume corrected by the boundary
/// spectral gap, with the gap's discretization error propagated when known.
pub fn effective_volume(m: &CellComplex, spectrum: &BoundarySpectrum) -> Result<f64> {
    if !(spectrum.nu1 > 0.0) {
        return Err(Error::SpectralGap("ν₁ is not positive".into()));
    }
    Ok(m.volume() + m.boundary_volume() / spectrum.mu1)
}

/// Shortest edge-path distance between two boundary components (an upper
/// bound of the geodesic distance; +∞ when disconnected).
pub fn boundary_distance(m: &CellComplex, comp_a: usize, comp_b: usize) -> Result<f64> {
    let b = m
        .boundary_structure()
        .ok_or_else(|| Error::Structure("complex has no boundary".into()))?;
    if comp_a >= b.components.len() || comp_b >= b.components.len() {
        return Err(Error::Parameter("no such boundary component".into()));
    }
    let nv = m.cell_count(0);
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nv];
    for (ei, e) in m.cells(1).iter().enumerate() {
        let l = m.edge_lengths()[ei];
        adj[e[0]].push((e[1], l));
        adj[e[1]].push((e[0], l));
    }
    let mut dist = vec![f64::INFINITY; nv];
    let mut heap: BinaryHeap<(ordered::Rev, usize)> = BinaryHeap::new();
    for &v in &b.components[comp_a].rings[0] {
        dist[v] = 0.0;
        heap.push((ordered::Rev(0.0), v));
    }
    let target: std::collections::HashSet<usize> =
        b.components[comp_b].rings[0].iter().copied().collect();
    while let Some((ordered::Rev(d), u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        if target.contains(&u) {
            return Ok(d);
        }
        for &(v, l) in &adj[u] {
            let nd = d + l;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push((ordered::Rev(nd), v));
            }
        }
    }
    Ok(f64::INFINITY)
}

mod ordered {
    /// Min-heap adapter for f64 keys.
    #[derive(PartialEq)]
    pub struct Rev(pub f64);
    impl Eq for Rev {}
    impl PartialOrd for Rev {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Rev {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            other.0.partial_cmp(&self.0).unwrap()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StableNormMethod {
    Codim1MinCut,
    Dim1ShortestCycle,
}

#[derive(Debug, Clone, Serialize)]
pub struct StableNormEstimate {
    pub value: f64,
    /// true: exact discrete stable norm; false: upper bound.
    pub exact: bool,
    pub method: StableNormMethod,
}

/// The boundary-parallel class ι_*[∪_{i∈comps} Y_i] as an integer
/// (n−1)-cycle with induced orientation signs.
pub fn boundary_class_cycle(m: &CellComplex, comps: &[usize]) -> Result<Vec<i64>> {
    let b = m
        .boundary_structure()
        .ok_or_else(|| Error::Structure("complex has no boundary".into()))?;
    let n = m.dim();
    let mut z = vec![0i64; m.cell_count(n - 1)];
    // recover induced signs from the Y complex orientation
    for (yc, &mc) in b.inject[n - 1].iter().enumerate() {
        if comps.contains(&b.top_component[yc]) {
            z[mc] = b.complex.top_orientation()[yc] as i64;
        }
    }
    Ok(z)
}

/// Check that z is an integer cycle in degree n−1.
fn check_cycle(m: &CellComplex, z: &[i64]) -> Result<()> {
    let n = m.dim();
    if z.len() != m.cell_count(n - 1) {
        return Err(Error::Input("cycle coefficient vector has the wrong length".into()));
    }
    let bd = m.boundary_matrix(n - 1)?;
    let mut out = vec![0i64; bd.nrows];
    for r in 0..bd.nrows {
        for k in bd.indptr[r]..bd.indptr[r + 1] {
            out[r] += bd.data[k] * z[bd.indices[k]];
        }
    }
    if out.iter().any(|&v| v != 0) {
        return Err(Error::Input("coefficients do not form a cycle (∂z ≠ 0)".into()));
    }
    Ok(())
}

/// Exact stable norm of a codimension-one class: the minimal-mass
/// representative is a minimum-weight cut of the dual graph, certified by
/// max-flow = min-cut over exact rationals.
pub fn stable_norm_mincut(m: &CellComplex, z: &[i64]) -> Result<(StableNormEstimate, bool)> {
    check_cycle(m, z)?;
    let n = m.dim();
    let b = m
        .boundary_structure()
        .ok_or_else(|| Error::Structure("min-cut stable norm needs a boundary".into()))?;
    let ncells = m.cell_count(n);
    let ncomp = b.components.len();
    // dual nodes: one per top cell, one terminal per boundary component
    let terminal = |comp: usize| ncells + comp;
    // face -> (coface, induced sign) incidences under the reference
    // orientation of each top cell
    let nfaces = m.cell_count(n - 1);
    let mut cofaces: Vec<Vec<(usize, i64)>> = vec![Vec::new(); nfaces];
    for (t, cell) in m.cells(n).iter().enumerate() {
        let or = m.top_orientation()[t] as i64;
        for drop in 0..cell.len() {
            let face: Vec<usize> = cell
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != drop)
                .map(|(_, &v)| v)
                .collect();
            let fi = m.cell_index(n - 1, &face).unwrap();
            let sign = or * if drop % 2 == 0 { 1 } else { -1 };
            cofaces[fi].push((t, sign));
        }
    }
    let comp_of_face: std::collections::HashMap<usize, usize> = b.inject[n - 1]
        .iter()
        .enumerate()
        .map(|(yc, &mc)| (mc, b.top_component[yc]))
        .collect();
    // integrate the crossing potential over the dual graph
    let nn = ncells + ncomp;
    let mut pot = vec![i64::MIN; nn];
    let mut queue = std::collections::VecDeque::new();
    for start in 0..nn {
        if pot[start] != i64::MIN {
            continue;
        }
        pot[start] = 0;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            // edges of u: enumerate all faces and pick those incident
            for f in 0..nfaces {
                let (a_node, b_node, sign_a) = match (cofaces[f].len(), comp_of_face.get(&f)) {
                    (2, None) => {
                        let (ta, sa) = cofaces[f][0];
                        let (tb, _) = cofaces[f][1];
                        (ta, tb, sa)
                    }
                    (1, Some(&comp)) => {
                        let (ta, sa) = cofaces[f][0];
                        // oriented from the cell toward the outside terminal
                        (ta, terminal(comp), sa)
                    }
                    _ => continue,
                };
                let (from, to) = (a_node, b_node);
                if from != u && to != u {
                    continue;
                }
                // potential jump across the face equals the cycle weight,
                // signed by the crossing direction
                let jump = sign_a * z[f];
                let (x, y, delta) = if from == u { (u, to, jump) } else { (u, from, -jump) };
                if pot[y] == i64::MIN {
                    pot[y] = pot[x] - delta;
                    queue.push_back(y);
                } else if pot[y] != pot[x] - delta {
                    return Err(Error::Input(
                        "class is not a cut class: crossing potential is inconsistent".into(),
                    ));
                }
            }
        }
    }
    // representatives relabel the cells freely; only the terminal
    // potentials are pinned by the class
    let term_pots: Vec<i64> = (0..ncomp).map(|c| pot[terminal(c)]).collect();
    let lo = *term_pots.iter().min().unwrap();
    let hi = *term_pots.iter().max().unwrap();
    if lo == hi {
        // boundary-trivial crossing data: the class bounds an n-chain
        return Ok((
            StableNormEstimate { value: 0.0, exact: true, method: StableNormMethod::Codim1MinCut },
            true,
        ));
    }
    if hi - lo != 1 {
        return Err(Error::Input(format!(
            "crossing potential has terminal range {} (> 1 level cut); not supported",
            hi - lo
        )));
    }
    // min cut between the two potential levels
    let mut net = FlowNetwork::new(nn + 2);
    let (source, sink) = (nn, nn + 1);
    let mut tags = Vec::new();
    for f in 0..nfaces {
        let vol = m.cell_volume(n - 1, f)?;
        match (cofaces[f].len(), comp_of_face.get(&f)) {
            (2, None) => {
                let (ta, _) = cofaces[f][0];
                let (tb, _) = cofaces[f][1];
                tags.push(net.add_undirected_edge(ta, tb, vol, f)?);
            }
            (1, Some(&comp)) => {
                let (ta, _) = cofaces[f][0];
                tags.push(net.add_undirected_edge(ta, terminal(comp), vol, f)?);
            }
            _ => {
                return Err(Error::Structure("face with unexpected coface count".into()));
            }
        }
    }
    for c in 0..ncomp {
        if pot[terminal(c)] == hi {
            net.add_undirected_edge(source, terminal(c), 1e300, usize::MAX)?;
        } else if pot[terminal(c)] == lo {
            net.add_undirected_edge(terminal(c), sink, 1e300, usize::MAX)?;
        }
    }
    let cut = net.max_flow_min_cut(source, sink, &tags)?;
    Ok((
        StableNormEstimate {
            value: cut.cut,
            exact: true,
            method: StableNormMethod::Codim1MinCut,
        },
        cut.flow_exact_equals_cut,
    ))
}

/// Exact stable norm of a RELATIVE codimension-one class (∂z supported on
/// the boundary): the class's dual edges are redirected through a
/// source/sink pair and the minimum cut over interior faces is taken.
/// Coefficients must be ±1 (single sheet).
pub fn stable_norm_mincut_relative(
    m: &CellComplex,
    z: &[i64],
) -> Result<(StableNormEstimate, bool)> {
    let n = m.dim();
    if z.len() != m.cell_count(n - 1) {
        return Err(Error::Input("cycle coefficient vector has the wrong length".into()));
    }
    if z.iter().any(|&v| v.abs() > 1) {
        return Err(Error::Input("relative min-cut supports coefficients in {−1, 0, 1}".into()));
    }
    // ∂z must vanish on interior (n−2)-cells
    let bd = m.boundary_matrix(n - 1)?;
    for r in 0..bd.nrows {
        if !m.interior_mask(n - 2)[r] {
            continue;
        }
        let mut acc = 0i64;
        for k in bd.indptr[r]..bd.indptr[r + 1] {
            acc += bd.data[k] * z[bd.indices[k]];
        }
        if acc != 0 {
            return Err(Error::Input(
                "coefficients are not a relative cycle (∂z ≠ 0 in the interior)".into(),
            ));
        }
    }
    if z.iter().zip(m.interior_mask(n - 1)).all(|(&v, &int)| v == 0 || !int) {
        return Ok((
            StableNormEstimate { value: 0.0, exact: true, method: StableNormMethod::Codim1MinCut },
            true,
        ));
    }
    let ncells = m.cell_count(n);
    let nfaces = m.cell_count(n - 1);
    let mut cofaces: Vec<Vec<(usize, i64)>> = vec![Vec::new(); nfaces];
    for (t, cell) in m.cells(n).iter().enumerate() {
        let or = m.top_orientation()[t] as i64;
        for drop in 0..cell.len() {
            let face: Vec<usize> = cell
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != drop)
                .map(|(_, &v)| v)
                .collect();
            let sign = or * if drop % 2 == 0 { 1 } else { -1 };
            cofaces[m.cell_index(n - 1, &face).unwrap()].push((t, sign));
        }
    }
    let mut net = FlowNetwork::new(ncells + 2);
    let (source, sink) = (ncells, ncells + 1);
    let mut tags = Vec::new();
    for f in 0..nfaces {
        if !m.interior_mask(n - 1)[f] {
            continue; // boundary faces cost nothing for a relative class
        }
        let vol = m.cell_volume(n - 1, f)?;
        let (u, su) = cofaces[f][0];
        let (v, _) = cofaces[f][1];
        if z[f] == 0 {
            tags.push(net.add_undirected_edge(u, v, vol, f)?);
        } else {
            // redirect the seed face through the terminals, oriented by the
            // crossing sign; re-cutting it costs its own volume
            let (high, low) = if su * z[f] > 0 { (u, v) } else { (v, u) };
            tags.push(net.add_undirected_edge(high, sink, vol, f)?);
            tags.push(net.add_undirected_edge(source, low, vol, f)?);
        }
    }
    let cut = net.max_flow_min_cut(source, sink, &tags)?;
    Ok((
        StableNormEstimate { value: cut.cut, exact: true, method: StableNormMethod::Codim1MinCut },
        cut.flow_exact_equals_cut,
    ))
}

/// Crossing cocycle of a dual path between two boundary components: an
/// integer 1-cocycle pairing to ±1 with cycles separating the components.
/// Only meaningful on surfaces (n = 2).
pub fn separating_cocycle(m: &CellComplex, comp_a: usize, comp_b: usize) -> Result<Vec<i64>> {
    let n = m.dim();
    if n != 2 {
        return Err(Error::Parameter("separating cocycles are built on surfaces only".into()));
    }
    let b = m
        .boundary_structure()
        .ok_or_else(|| Error::Structure("complex has no boundary".into()))?;
    let nfaces = m.cell_count(1);
    let mut cofaces: Vec<Vec<(usize, i64)>> = vec![Vec::new(); nfaces];
    for (t, cell) in m.cells(2).iter().enumerate() {
        let or = m.top_orientation()[t] as i64;
        for drop in 0..3 {
            let face: Vec<usize> = cell
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != drop)
                .map(|(_, &v)| v)
                .collect();
            let fi = m.cell_index(1, &face).unwrap();
            let sign = or * if drop % 2 == 0 { 1 } else { -1 };
            cofaces[fi].push((t, sign));
        }
    }
    let comp_of_face: std::collections::HashMap<usize, usize> = b.inject[1]
        .iter()
        .enumerate()
        .map(|(yc, &mc)| (mc, b.top_component[yc]))
        .collect();
    // BFS in the dual graph from any comp_a boundary edge to comp_b
    let ncells = m.cell_count(2);
    let ncomp = b.components.len();
    let terminal = |c: usize| ncells + c;
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; ncells + ncomp]; // (node, face)
    let mut seen = vec![false; ncells + ncomp];
    let mut queue = std::collections::VecDeque::new();
    seen[terminal(comp_a)] = true;
    queue.push_back(terminal(comp_a));
    while let Some(u) = queue.pop_front() {
        if u == terminal(comp_b) {
            break;
        }
        for f in 0..nfaces {
            let nodes: Vec<usize> = match (cofaces[f].len(), comp_of_face.get(&f)) {
                (2, None) => cofaces[f].iter().map(|&(t, _)| t).collect(),
                (1, Some(&c)) => vec![cofaces[f][0].0, terminal(c)],
                _ => continue,
            };
            if !nodes.contains(&u) {
                continue;
            }
            for &v in &nodes {
                if v != u && !seen[v] {
                    seen[v] = true;
                    prev[v] = Some((u, f));
                    queue.push_back(v);
                }
            }
        }
    }
    if !seen[terminal(comp_b)] {
        return Err(Error::Structure("boundary components are not connected".into()));
    }
    // walk the dual path back, recording crossed primal edges with the
    // orientation-consistent crossing sign
    let mut cocycle = vec![0i64; nfaces];
    let mut cur = terminal(comp_b);
    while let Some((p, f)) = prev[cur] {
        // sign: crossing from p into cur through face f; use the induced
        // sign of the coface on the p side (or the cur side, negated)
        let sign = cofaces[f]
            .iter()
            .find(|&&(t, _)| t == p)
            .map(|&(_, s)| s)
            .or_else(|| cofaces[f].iter().find(|&&(t, _)| t == cur).map(|&(_, s)| -s))
            .unwrap_or(1);
        cocycle[f] = sign;
        cur = p;
    }
    Ok(cocycle)
}

/// Shortest single closed edge-path with the prescribed pairings against
/// the tracking cocycles (an upper bound for the stable norm of the class).
pub fn stable_norm_shortest_cycle(
    m: &CellComplex,
    target: &[i64],
    tracking: &[Vec<i64>],
) -> Result<StableNormEstimate> {
    if tracking.len() != target.len() || tracking.is_empty() {
        return Err(Error::Input("need one tracking cocycle per class coordinate".into()));
    }
    if target.iter().all(|&t| t == 0) {
        return Ok(StableNormEstimate {
            value: 0.0,
            exact: true,
            method: StableNormMethod::Dim1ShortestCycle,
        });
    }
    let k = tracking.len();
    let window: i64 = target.iter().map(|t| t.abs()).max().unwrap() + 1;
    let span = (2 * window + 1) as usize;
    let states_per_vertex = span.pow(k as u32);
    let nv = m.cell_count(0);
    // adjacency with per-edge winding increments
    let mut adj: Vec<Vec<(usize, f64, Vec<i64>)>> = vec![Vec::new(); nv];
    for (ei, e) in m.cells(1).iter().enumerate() {
        let l = m.edge_lengths()[ei];
        let inc: Vec<i64> = tracking.iter().map(|c| c[ei]).collect();
        let dec: Vec<i64> = inc.iter().map(|v| -v).collect();
        adj[e[0]].push((e[1], l, inc));
        adj[e[1]].push((e[0], l, dec));
    }
    let encode = |w: &[i64]| -> Option<usize> {
        let mut idx = 0usize;
        for &x in w {
            if x.abs() > window {
                return None;
            }
            idx = idx * span + (x + window) as usize;
        }
        Some(idx)
    };
    let target_idx = encode(target).unwrap();
    let mut best = f64::INFINITY;
    for start in 0..nv {
        // Dijkstra on (vertex, winding) states
        let mut dist = vec![f64::INFINITY; nv * states_per_vertex];
        let zero_idx = encode(&vec![0; k]).unwrap();
        let sid = start * states_per_vertex + zero_idx;
        dist[sid] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push((ordered::Rev(0.0), start, zero_idx));
        while let Some((ordered::Rev(d), u, widx)) = heap.pop() {
            if d > best || d > dist[u * states_per_vertex + widx] {
                continue;
            }
            if u == start && widx == target_idx && d > 0.0 {
                best = best.min(d);
                continue;
            }
            // decode winding
            let mut w = vec![0i64; k];
            let mut rem = widx;
            for i in (0..k).rev() {
                w[i] = (rem % span) as i64 - window;
                rem /= span;
            }
            for (v, l, inc) in &adj[u] {
                let mut nw = w.clone();
                for i in 0..k {
                    nw[i] += inc[i];
                }
                let Some(nidx) = encode(&nw) else { continue };
                let nd = d + l;
                let id = *v * states_per_vertex + nidx;
                if nd < dist[id] {
                    dist[id] = nd;
                    heap.push((ordered::Rev(nd), *v, nidx));
                }
            }
        }
    }
    if !best.is_finite() {
        return Err(Error::Numerical("no cycle found in the winding window".into()));
    }
    Ok(StableNormEstimate {
        value: best,
        exact: false,
        method: StableNormMethod::Dim1ShortestCycle,
    })
}

/// Dispatch by method per the public contract.
pub fn stable_norm(
    m: &CellComplex,
    degree: usize,
    coeffs: &[i64],
    method: StableNormMethod,
    tracking: Option<&[Vec<i64>]>,
) -> Result<StableNormEstimate> {
    match method {
        StableNormMethod::Codim1MinCut => {
            if degree != m.dim() - 1 {
                return Err(Error::Parameter(format!(
                    "min-cut stable norms are for codimension one (degree {}), got {degree}",
                    m.dim() - 1
                )));
            }
            Ok(stable_norm_mincut(m, coeffs)?.0)
        }
        StableNormMethod::Dim1ShortestCycle => {
            if degree != 1 {
                return Err(Error::Parameter("shortest-cycle stable norms are for H₁".into()));
            }
            let tracking = tracking.ok_or_else(|| {
                Error::Input("shortest-cycle search needs tracking cocycles".into())
            })?;
            // target pairings of the input cycle against the cocycles
            let target: Vec<i64> = tracking
                .iter()
                .map(|c| c.iter().zip(coeffs).map(|(&a, &b)| a * b).sum())
                .collect();
            stable_norm_shortest_cycle(m, &target, tracking)
        }
    }
}

/// Verdict of one bound check.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// Violated, but a bound-flagged (inexact) input is involved.
    Warning,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichCheck {
    pub name: String,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    pub lower_exact: bool,
    pub upper_exact: bool,
    pub margin_lower: f64,
    pub margin_upper: f64,
    pub verdict: Verdict,
}

/// The full geometric-bound report for one geometry and one degree.
#[derive(Debug, Serialize)]
pub struct BoundReport {
    pub degree: usize,
    pub vol_m: f64,
    pub vol_y: Vec<f64>,
    pub vol_star: f64,
    pub nu1: f64,
    pub comass_constants: Vec<(usize, f64, bool)>,
    pub dist_y1_y2: Option<f64>,
    pub stable_norms: Vec<(String, StableNormEstimate)>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub checks: Vec<SandwichCheck>,
}

fn make_check(
    name: &str,
    lower: f64,
    value: f64,
    upper: f64,
    lower_exact: bool,
    upper_exact: bool,
    slack: f64,
) -> SandwichCheck {
    let margin_lower = value - lower;
    let margin_upper = upper - value;
    let verdict = if margin_lower >= -slack && margin_upper >= -slack {
        Verdict::Pass
    } else {
        let lower_bad = margin_lower < -slack;
        let upper_bad = margin_upper < -slack;
        let exact_violation = (lower_bad && lower_exact) || (upper_bad && upper_exact);
        if exact_violation {
            Verdict::Fail
        } else {
            Verdict::Warning
        }
    };
    SandwichCheck {
        name: name.into(),
        lower,
        value,
        upper,
        lower_exact,
        upper_exact,
        margin_lower,
        margin_upper,
        verdict,
    }
}

/// Evaluate the geometric sandwich bounds against the computed scattering
/// lengths: the two-component C₁/C₂ form when Y has two components, the
/// single-boundary identity otherwise, plus the quadratic-form version of
/// the main estimate. A failed check built from exact inputs is an error.
pub fn sandwich_audit(
    m: &CellComplex,
    report: &ScatteringReport,
    spectrum: &BoundarySpectrum,
    dist_exact: bool,
) -> Result<BoundReport> {
    let n = m.dim();
    let p = report.degree;
    let b = m
        .boundary_structure()
        .ok_or_else(|| Error::Structure("sandwich audit needs a boundary".into()))?;
    let ncomp = b.components.len();
    let vol_m = m.volume();
    let vol_y: Vec<f64> = (0..ncomp).map(|c| m.boundary_component_volume(c)).collect();
    let vol_star = effective_volume(m, spectrum)?;
    let comass: Vec<(usize, f64, bool)> = (0..=n)
        .map(|k| {
            let (v, e) = comass_constant(n, k).unwrap();
            (k, v, e)
        })
        .collect();

    let mut checks = Vec::new();
    let mut stable_norms = Vec::new();
    let mut dist = None;
    let (mut c1, mut c2) = (None, None);

    if ncomp == 2 && p == 0 {
        let (v1, v2) = (vol_y[0], vol_y[1]);
        let voly = v1 + v2;
        let d = boundary_distance(m, 0, 1)?;
        dist = Some(d);
        let class = boundary_class_cycle(m, &[0])?;
        let (st, duality_ok) = stable_norm_mincut(m, &class)?;
        if !duality_ok {
            return Err(Error::Audit("max-flow and min-cut disagree".into()));
        }
        stable_norms.push(("iota_*[Y1]".to_string(), st.clone()));
        let c1v = 2.0 * vol_star * v1 * v2 / (st.value * st.value * voly);
        let c2v = 2.0 / vol_m * d * d * v1 * v2 / voly;
        c1 = Some(c1v);
        c2 = Some(c2v);
        // t2 = the sole (−1)-eigenvalue of T(0)
        if report.t0_minus.nrows() != 1 {
            return Err(Error::Audit("two-component p = 0 case expects a 1-dim (−1)-space".into()));
        }
        let t2 = report.t0_minus[(0, 0)];
        // C₂ uses the distance (upper bound → C₂ possibly too large unless
        // the distance is exact); C₁ uses the min-cut (exact)
        checks.push(make_check(
            "C2 <= t2 <= C1",
            c2v,
            t2,
            c1v,
            dist_exact,
            true,
            1e-9 * t2.abs().max(1.0),
        ));
        // quadratic-form version of the main estimate on φ in the
        // (−1)-eigenspace: 1/t2 sandwiched by the comass machinery
        let (cnp1, cnp1_exact) = comass_constant(n, p + 1)?;
        let chi_norm2 = v1 * v2 * voly;
        let cap_norm = voly * st.value / chi_norm2.sqrt();
        let lower_q = 0.5 / cnp1 / vol_star * cap_norm * cap_norm;
        let comass_bd = voly / d / chi_norm2.sqrt();
        let upper_q = 0.5 * cnp1 * vol_m * comass_bd * comass_bd;
        checks.push(make_check(
            "main quadratic form <phi, T0^-1 phi>",
            lower_q,
            1.0 / t2,
            upper_q,
            cnp1_exact,
            cnp1_exact && dist_exact,
            1e-9 / t2.abs().max(1e-12),
        ));
    } else if ncomp == 1 {
        // degenerate sandwich: only the closed-form identity remains
        let t = 2.0 * vol_m / vol_y[0];
        let value = report
            .eigenvalues
            .first()
            .copied()
            .ok_or_else(|| Error::Audit("no scattering length to check".into()))?;
        checks.push(make_check(
            "t = 2 Vol(M)/Vol(Y)",
            t - 1e-6 * t,
            value,
            t + 1e-6 * t,
            true,
            true,
            0.0,
        ));
    }

    let bound_report = BoundReport {
        degree: p,
        vol_m,
        vol_y,
        vol_star,
        nu1: spectrum.nu1,
        comass_constants: comass,
        dist_y1_y2: dist,
        stable_norms,
        c1,
        c2,
        checks,
    };
    if bound_report.checks.iter().any(|c| c.verdict == Verdict::Fail) {
        return Err(Error::Audit(format!(
            "sandwich bound violated with exact inputs: {}",
            serde_json::to_string(&bound_report.checks).unwrap_or_default()
        )));
    }
    Ok(bound_report)
}

/// Full-torus sandwich 2(ℓ₁/ℓ₂)‖α‖²_st/Vol ≤ t ≤ 2(ℓ₁/ℓ₂)Vol_*/‖β‖²_st,
/// as pure arithmetic over measured stable-norm estimates.
pub fn torus_sandwich(
    l1: f64,
    l2: f64,
    vol: f64,
    vol_star: f64,
    alpha_st: f64,
    beta_st: f64,
) -> (f64, f64) {
    let ratio = l1 / l2;
    (2.0 * ratio * alpha_st * alpha_st / vol, 2.0 * ratio * vol_star / (beta_st * beta_st))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::generators::{generate_model, ModelSpec};

    #[test]
    fn comass_values() {
        assert_eq!(comass_constant(4, 0).unwrap(), (1.0, true));
        assert_eq!(comass_constant(4, 1).unwrap(), (1.0, true));
        assert_eq!(comass_constant(4, 2).unwrap(), (2.0, true));
        assert_eq!(comass_constant(5, 3).unwrap(), (2.0, true)); // = C(5,2)
        assert_eq!(comass_constant(6, 5).unwrap(), (1.0, true)); // = C(6,1)
        let (v, exact) = comass_constant(8, 4).unwrap();
        assert_eq!(v, 70.0); // binomial bound
        assert!(!exact);
    }

    #[test]
    fn cylinder_distance_and_mincut() {
        let (m, _) = generate_model(
            &ModelSpec::FlatCylinder { length: 2.0, circumference: 1.0 },
            16,
        )
        .unwrap();
        let d = boundary_distance(&m, 0, 1).unwrap();
        assert!((d - 2.0).abs() < 1e-12, "distance {d}");
        let class = boundary_class_cycle(&m, &[0]).unwrap();
        let (st, dual_ok) = stable_norm_mincut(&m, &class).unwrap();
        assert!(dual_ok, "max-flow must equal min-cut exactly");
        assert!((st.value - 1.0).abs() < 1e-12, "min-cut {}", st.value);
        assert!(st.exact);
    }

    #[test]
    fn null_class_has_zero_norm() {
        let (m, _) = generate_model(
            &ModelSpec::FlatCylinder { length: 1.0, circumference: 1.0 },
            8,
        )
        .unwrap();
        let z = vec![0i64; m.cell_count(1)];
        let (st, _) = stable_norm_mincut(&m, &z).unwrap();
        assert_eq!(st.value, 0.0);
    }

    #[test]
    fn distance_monotone_under_refinement() {
        let mut last = f64::INFINITY;
        for res in [8usize, 16, 32] {
            let (m, _) = generate_model(
                &ModelSpec::FlatCylinder { length: 2.0, circumference: 1.0 },
                res,
            )
            .unwrap();
            let d = boundary_distance(&m, 0, 1).unwrap();
            assert!(d <= last + 1e-12);
            last = d;
        }
    }

    #[test]
    fn disk_effective_volume_arithmetic() {
        use crate::dec::{boundary_spectrum, component_complex, Tolerances};
        let (m, _) = generate_model(&ModelSpec::Disk { radius: 1.0 }, 64).unwrap();
        let comp = component_complex(&m, 0).unwrap();
        let spec = boundary_spectrum(&comp, 0, 3, &Tolerances::default()).unwrap();
        let vol_star = effective_volume(&m, &spec).unwrap();
        // unit disk: Vol_* = π + 2π/√ν₁ with ν₁ = 1 on the length-2π circle
        let expect = std::f64::consts::PI * 3.0;
        assert!(
            (vol_star - expect).abs() < 0.05 * expect,
            "Vol_* = {vol_star}, expected ≈ {expect}"
        );
    }

    #[test]
    fn torus_sandwich_arithmetic() {
        // pure arithmetic of the full-torus bound endpoints
        let (lo, hi) = torus_sandwich(1.5, 0.5, 4.0, 5.0, 1.2, 0.9);
        assert!((lo - 2.0 * 3.0 * 1.44 / 4.0).abs() < 1e-12);
        assert!((hi - 2.0 * 3.0 * 5.0 / 0.81).abs() < 1e-12);
        assert!(lo < hi);
    }

    #[test]
    fn non_cycle_input_rejected() {
        let (m, _) = generate_model(
            &ModelSpec::FlatCylinder { length: 1.0, circumference: 1.0 },
            8,
        )
        .unwrap();
        let mut z = vec![0i64; m.cell_count(1)];
        z[0] = 1; // a single edge is not a cycle
        assert!(stable_norm_mincut(&m, &z).is_err());
    }

    #[test]
    fn shortest_cycle_on_annulus_is_inner_circle() {
        let (m, _) = generate_model(&ModelSpec::Annulus { r_inner: 1.0, r_outer: 2.0 }, 12)
            .unwrap();
        let cocycle = separating_cocycle(&m, 0, 1).unwrap();
        // the inner boundary circle class: winding 1 across the cut
        let est = stable_norm_shortest_cycle(&m, &[1], &[cocycle]).unwrap();
        // shortest homologous cycle = the inner collar circle (12-gon at the
        // inner radius)
        let inner = m.boundary_component_volume(0);
        assert!(
            (est.value - inner).abs() < 1e-10,
            "shortest cycle {} vs inner circumference {inner}",
            est.value
        );
        assert!(!est.exact);
    }
}
