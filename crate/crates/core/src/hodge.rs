//! Discrete harmonic spaces and representatives: kernels of the Hodge
//! Laplacians under absolute/relative conditions, the coclosed extension
//! minimizing ‖dω‖², and the connecting homomorphism on representatives.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::{CellComplex, Cochain};
use crate::dec::{Bc, MetricOps, Tolerances};
use crate::error::{Error, Result};
use crate::homology::{self, Flavor};
use crate::sparse::{axpy, cg, norm, Csr, FnOp};

/// Orthonormal basis of a discrete harmonic space.
pub struct HarmonicBasis {
    pub degree: usize,
    pub bc: Bc,
    pub vectors: Vec<Cochain>,
    /// ‖dh‖ + ‖δh‖ per basis vector, in mass norms.
    pub residuals: Vec<f64>,
    pub betti: usize,
}

impl HarmonicBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn coeff_vectors(&self) -> Vec<&[f64]> {
        self.vectors.iter().map(|c| c.values.as_slice()).collect()
    }
}

fn masked_seed(rng: &mut ChaCha8Rng, mask: &[bool]) -> Vec<f64> {
    mask.iter()
        .map(|&keep| if keep { rng.gen_range(-1.0..1.0) } else { 0.0 })
        .collect()
}

fn apply_masked(csr: &Csr, rows: &[bool], cols: &[bool], x: &[f64]) -> Vec<f64> {
    // x is full-length over cols; output full-length over rows, zero outside
    debug_assert_eq!(x.len(), csr.ncols);
    let mut y = vec![0.0; csr.nrows];
    for r in 0..csr.nrows {
        if !rows[r] {
            continue;
        }
        let mut acc = 0.0;
        for k in csr.indptr[r]..csr.indptr[r + 1] {
            let c = csr.indices[k];
            if cols[c] {
                acc += csr.data[k] * x[c];
            }
        }
        y[r] = acc;
    }
    y
}

fn apply_transpose_masked(csr: &Csr, rows: &[bool], cols: &[bool], x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(x.len(), csr.nrows);
    let mut y = vec![0.0; csr.ncols];
    for r in 0..csr.nrows {
        if !rows[r] {
            continue;
        }
        let xr = x[r];
        if xr == 0.0 {
            continue;
        }
        for k in csr.indptr[r]..csr.indptr[r + 1] {
            let c = csr.indices[k];
            if cols[c] {
                y[c] += csr.data[k] * xr;
            }
        }
    }
    y
}

struct DegreeMasks<'a> {
    cur: &'a [bool],
    up: Option<&'a [bool]>,
    down: Option<&'a [bool]>,
}

fn masks<'a>(ops: &'a MetricOps, p: usize, bc: Bc, all: &'a [Vec<bool>]) -> DegreeMasks<'a> {
    // `all` carries per-degree all-true masks for the absolute flavor
    let n = ops.dim();
    let cur: &[bool] = match bc {
        Bc::Absolute => &all[p],
        Bc::Relative => ops.interior(p),
    };
    let up: Option<&[bool]> = if p < n {
        Some(match bc {
            Bc::Absolute => &all[p + 1],
            Bc::Relative => ops.interior(p + 1),
        })
    } else {
        None
    };
    let down: Option<&[bool]> = if p > 0 {
        Some(match bc {
            Bc::Absolute => &all[p - 1],
            Bc::Relative => ops.interior(p - 1),
        })
    } else {
        None
    };
    DegreeMasks { cur, up, down }
}

/// Project a masked cochain onto the closed subspace (kernel of the masked
/// coboundary), in the Euclidean metric: z ← z − D̃ᵀ (D̃ D̃ᵀ)⁺ D̃ z.
fn project_closed(
    ops: &MetricOps,
    p: usize,
    mk: &DegreeMasks,
    z: &mut Vec<f64>,
    tol: &Tolerances,
) -> Result<()> {
    let Some(up) = mk.up else { return Ok(()) };
    let d = ops.diff(p);
    let rhs = apply_masked(d, up, mk.cur, z);
    if norm(&rhs) == 0.0 {
        return Ok(());
    }
    let op = FnOp {
        n: d.nrows,
        f: |x: &[f64], y: &mut [f64]| {
            let t = apply_transpose_masked(d, up, mk.cur, x);
            let r = apply_masked(d, up, mk.cur, &t);
            y.copy_from_slice(&r);
        },
    };
    let beta = cg(&op, &rhs, &[], &tol.cg)?;
    let corr = apply_transpose_masked(d, up, mk.cur, &beta);
    axpy(-1.0, &corr, z);
    Ok(())
}

/// Remove the exact part in the mass inner product:
/// z ← z − D̃ α, (D̃ᵀ M̃ D̃) α = D̃ᵀ M̃ z.
fn remove_exact(
    ops: &MetricOps,
    p: usize,
    mk: &DegreeMasks,
    z: &mut Vec<f64>,
    tol: &Tolerances,
) -> Result<()> {
    let Some(down) = mk.down else { return Ok(()) };
    let d = ops.diff(p - 1);
    let mass = ops.mass(p);
    let mz = apply_masked(mass, mk.cur, mk.cur, z);
    let rhs = apply_transpose_masked(d, mk.cur, down, &mz);
    if norm(&rhs) == 0.0 {
        return Ok(());
    }
    let op = FnOp {
        n: d.ncols,
        f: |x: &[f64], y: &mut [f64]| {
            let dx = apply_masked(d, mk.cur, down, x);
            let mdx = apply_masked(mass, mk.cur, mk.cur, &dx);
            let r = apply_transpose_masked(d, mk.cur, down, &mdx);
            y.copy_from_slice(&r);
        },
    };
    let alpha = cg(&op, &rhs, &[], &tol.cg)?;
    let corr = apply_masked(d, mk.cur, down, &alpha);
    axpy(-1.0, &corr, z);
    Ok(())
}

fn apply_masked_identity(mask: &[bool], x: &[f64]) -> Vec<f64> {
    x.iter().zip(mask).map(|(&v, &keep)| if keep { v } else { 0.0 }).collect()
}

/// Orthonormal basis of the degree-p harmonic space under the given
/// boundary condition. The dimension is pinned by integer homology;
/// disagreement is a rank error.
pub fn harmonic_basis(
    m: &CellComplex,
    ops: &MetricOps,
    p: usize,
    bc: Bc,
    seed: u64,
    tol: &Tolerances,
) -> Result<HarmonicBasis> {
    if ops.complex_id() != m.id() {
        return Err(Error::Input("operators belong to a different complex".into()));
    }
    let n = m.dim();
    if p > n {
        return Err(Error::Degree { op: "harmonic_basis", degree: p, dim: n });
    }
    let flavor = match bc {
        Bc::Absolute => Flavor::Absolute,
        Bc::Relative => Flavor::Relative,
    };
    let betti = homology::betti_numbers(m, flavor)?[p];
    let all: Vec<Vec<bool>> = (0..=n).map(|k| vec![true; m.cell_count(k)]).collect();
    let mk = masks(ops, p, bc, &all);
    if betti == 0 {
        return Ok(HarmonicBasis { degree: p, bc, vectors: Vec::new(), residuals: Vec::new(), betti });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((p as u64) << 8) ^ matches!(bc, Bc::Relative) as u64);
    for _attempt in 0..4 {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(betti);
        for _ in 0..betti {
            let mut z = masked_seed(&mut rng, mk.cur);
            project_closed(ops, p, &mk, &mut z, tol)?;
            remove_exact(ops, p, &mk, &mut z, tol)?;
            basis.push(z);
        }
        if let Some(ortho) = gram_schmidt(ops, p, &basis) {
            let mut vectors = Vec::with_capacity(betti);
            let mut residuals = Vec::with_capacity(betti);
            for h in ortho {
                residuals.push(harmonic_residual(ops, p, &mk, &h)?);
                vectors.push(Cochain { complex_id: m.id(), degree: p, values: h });
            }
            return Ok(HarmonicBasis { degree: p, bc, vectors, residuals, betti });
        }
    }
    Err(Error::Rank(format!(
        "harmonic space of degree {p} did not reach the Betti number {betti}"
    )))
}

/// Modified Gram–Schmidt with one re-orthogonalization pass in the mass
/// inner product; None when the set is numerically dependent.
fn gram_schmidt(ops: &MetricOps, p: usize, basis: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(basis.len());
    for v in basis {
        let mut w = v.clone();
        let original = ops.norm(p, &w);
        for _ in 0..2 {
            for u in &out {
                let c = ops.inner(p, &w, u);
                axpy(-c, u, &mut w);
            }
        }
        let nw = ops.norm(p, &w);
        if !(nw > 1e-8 * original.max(1e-300)) {
            return None;
        }
        w.iter_mut().for_each(|x| *x /= nw);
        out.push(w);
    }
    Some(out)
}

fn harmonic_residual(ops: &MetricOps, p: usize, mk: &DegreeMasks, h: &[f64]) -> Result<f64> {
    let mut r = 0.0;
    if let Some(up) = mk.up {
        let dh = apply_masked(ops.diff(p), up, mk.cur, h);
        r += ops.norm(p + 1, &dh);
    }
    if let Some(down) = mk.down {
        let mh = apply_masked(ops.mass(p), mk.cur, mk.cur, h);
        let dual = apply_transpose_masked(ops.diff(p - 1), mk.cur, down, &mh);
        // dual-norm the coclosed defect through the mass of degree p-1
        let delta = ops.mass_solve(p - 1, &dual)?;
        r += ops.norm(p - 1, &apply_masked_identity(down, &delta));
    }
    Ok(r)
}

/// Smoothstep cutoff used for collar extensions: 1 at the boundary ring,
/// 0 past the last collar ring.
fn profile(depth: usize, layers: usize) -> f64 {
    if layers == 0 {
        return if depth == 0 { 1.0 } else { 0.0 };
    }
    let t = 1.0 - (depth as f64 / layers as f64).min(1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Extend a boundary p-cochain into the complex by collar pullback times a
/// cubic cutoff profile (any extension with exact trace works downstream;
/// without collar rings this degenerates to extension by zero).
pub fn collar_extension(m: &CellComplex, phi: &Cochain) -> Result<Cochain> {
    let b = m
        .boundary_structure()
        .ok_or_else(|| Error::Structure("complex has no boundary".into()))?;
    if phi.complex_id != b.complex.id() {
        return Err(Error::Input("cochain does not live on the boundary complex".into()));
    }
    let p = phi.degree;
    let mut out = m.extend_by_zero(phi)?;
    if p > 1 {
        // TODO: extend ring copies to p >= 2 cell types once a 3-D model
        // needs them; zero extension is a valid (if abrupt) profile
        return Ok(out);
    }
    for comp in &b.components {
        let layers = comp.rings.len() - 1;
        // position of each Y vertex inside the component rings
        let mut pos = std::collections::HashMap::new();
        for (i, &yv) in comp.y_vertices.iter().enumerate() {
            pos.insert(yv, i);
        }
        match p {
            0 => {
                for (j, ring) in comp.rings.iter().enumerate().skip(1) {
                    let s = profile(j, layers);
                    for (i, &mv) in ring.iter().enumerate() {
                        out.values[mv] = s * phi.values[comp.y_vertices[i]];
                    }
                }
            }
            1 => {
                // ring copies and wall diagonals of each Y edge; the value on
                // an M edge running from (a copy of) y0 to y1 is ±s·φ_e, the
                // sign tracking whether the sorted M edge starts over y0
                for (ye, yedge) in b.complex.cells(1).iter().enumerate() {
                    let (Some(&pa), Some(&pb)) = (pos.get(&yedge[0]), pos.get(&yedge[1])) else {
                        continue;
                    };
                    let val = phi.values[ye]; // on the sorted edge (y0, y1)
                    let mut put = |from: usize, to: usize, scaled: f64| {
                        if let Some(idx) = m.cell_index(1, &[from.min(to), from.max(to)]) {
                            out.values[idx] = if from < to { scaled } else { -scaled };
                        }
                    };
                    for j in 1..=layers {
                        let s = profile(j, layers);
                        put(comp.rings[j][pa], comp.rings[j][pb], s * val);
                    }
                    for j in 0..layers {
                        let s = 0.5 * (profile(j, layers) + profile(j + 1, layers));
                        put(comp.rings[j][pa], comp.rings[j + 1][pb], s * val);
                        put(comp.rings[j + 1][pa], comp.rings[j][pb], s * val);
                    }
                }
            }
            _ => unreachable!(),
        }
    }
    Ok(out)
}

/// The unique-up-to-kernel minimizer ω₀ of ‖dω‖² under trace ω = φ, made
/// discretely coclosed and orthogonal to the relative harmonic space.
pub fn coclosed_extension(
    m: &CellComplex,
    ops: &MetricOps,
    phi: &Cochain,
    rel_harmonics: &HarmonicBasis,
    tol: &Tolerances,
) -> Result<Cochain> {
    let n = m.dim();
    let p = phi.degree;
    if p >= n {
        return Err(Error::Degree { op: "coclosed_extension", degree: p, dim: n });
    }
    if rel_harmonics.degree != p || rel_harmonics.bc != Bc::Relative {
        return Err(Error::Input("need the relative harmonic basis of the same degree".into()));
    }
    let mut omega = collar_extension(m, phi)?;
    // minimize ‖d(ext + x)‖² over interior x: (D̃ᵀ M D̃) x = −D̃ᵀ M D ext
    let d = ops.diff(p);
    let mass_up = ops.mass(p + 1);
    let int_p = ops.interior(p);
    let d_ext = d.apply(&omega.values);
    let rhs_full = d.apply_transpose(&mass_up.apply(&d_ext));
    let rhs: Vec<f64> = rhs_full
        .iter()
        .zip(int_p)
        .map(|(&v, &keep)| if keep { -v } else { 0.0 })
        .collect();
    let all_up = vec![true; mass_up.nrows];
    let op = FnOp {
        n: d.ncols,
        f: |x: &[f64], y: &mut [f64]| {
            let dx = apply_masked(d, &all_up, int_p, x);
            let mdx = mass_up.apply(&dx);
            let full = d.apply_transpose(&mdx);
            for (i, out) in y.iter_mut().enumerate() {
                *out = if int_p[i] { full[i] } else { 0.0 };
            }
        },
    };
    let x = cg(&op, &rhs, &[], &tol.cg)?;
    for (i, &keep) in int_p.iter().enumerate() {
        if keep {
            omega.values[i] += x[i];
        }
    }
    // orthogonality normalizations (do not change dω or the trace)
    for h in &rel_harmonics.vectors {
        let c = ops.inner(p, &omega.values, &h.values);
        axpy(-c, &h.values, &mut omega.values);
    }
    let all: Vec<Vec<bool>> = (0..=n).map(|k| vec![true; ops.mass(k).nrows]).collect();
    let mk_rel = masks(ops, p, Bc::Relative, &all);
    if p > 0 {
        remove_exact(ops, p, &mk_rel, &mut omega.values, tol)?;
    }
    Ok(omega)
}

/// Relative-harmonic representative of the connecting homomorphism image
/// `∂[φ]`: the M-orthogonal projection of d(extension of φ) onto the relative
/// harmonic space of degree p+1. Returns the representative and its
/// coefficients in `rel_harmonics`.
pub fn connecting_rep(
    m: &CellComplex,
    ops: &MetricOps,
    rel_harmonics: &HarmonicBasis,
    phi: &Cochain,
    tol: &Tolerances,
) -> Result<(Cochain, Vec<f64>)> {
    let b = m
        .boundary_structure()
        .ok_or_else(|| Error::Structure("complex has no boundary".into()))?;
    let p = phi.degree;
    if rel_harmonics.degree != p + 1 || rel_harmonics.bc != Bc::Relative {
        return Err(Error::Input(
            "connecting_rep needs the relative harmonic basis of degree p+1".into(),
        ));
    }
    // φ must be closed on Y
    if p < b.complex.dim() {
        let dphi = b.complex.coboundary(p)?.to_f64().apply(&phi.values);
        let scale = norm(&phi.values).max(1e-300);
        let defect = norm(&dphi);
        if defect > tol.rank * scale {
            return Err(Error::Input(format!(
                "connecting_rep needs a closed cochain; ‖d'φ‖ = {defect:.3e}"
            )));
        }
    }
    let ext = collar_extension(m, phi)?;
    let w = ops.diff(p).apply(&ext.values);
    let mut rep = Cochain::zeros(m, p + 1);
    let mut coeffs = Vec::with_capacity(rel_harmonics.dim());
    for h in &rel_harmonics.vectors {
        let c = ops.inner(p + 1, &w, &h.values);
        coeffs.push(c);
        axpy(c, &h.values, &mut rep.values);
    }
    Ok((rep, coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::generators::{generate_model, ModelSpec};

    fn fixture(spec: &ModelSpec, res: usize) -> (CellComplex, MetricOps) {
        let (m, _) = generate_model(spec, res).unwrap();
        let ops = MetricOps::assemble(&m).unwrap();
        (m, ops)
    }

    #[test]
    fn harmonic_dimensions_match_topology() {
        let tol = Tolerances::default();
        let (m, ops) = fixture(&ModelSpec::Disk { radius: 1.0 }, 12);
        let h0 = harmonic_basis(&m, &ops, 0, Bc::Absolute, 1, &tol).unwrap();
        assert_eq!(h0.dim(), 1);
        let h1rel = harmonic_basis(&m, &ops, 1, Bc::Relative, 1, &tol).unwrap();
        assert_eq!(h1rel.dim(), 0);
        let (m, ops) = fixture(&ModelSpec::Annulus { r_inner: 1.0, r_outer: 2.0 }, 12);
        let h1rel = harmonic_basis(&m, &ops, 1, Bc::Relative, 1, &tol).unwrap();
        assert_eq!(h1rel.dim(), 1);
        assert!(h1rel.residuals[0] < 1e-9, "residual {}", h1rel.residuals[0]);
        let gram = ops.inner(1, &h1rel.vectors[0].values, &h1rel.vectors[0].values);
        assert!((gram - 1.0).abs() < 1e-10);
    }

    #[test]
    fn capacity_of_flat_cylinder_is_exact() {
        // φ = 1 on one circle, 0 on the other: ‖dω₀‖² = c / L
        let tol = Tolerances::default();
        let (len, circ) = (2.0f64, 1.0f64);
        let (m, ops) = fixture(
            &ModelSpec::FlatCylinder { length: len, circumference: circ },
            16,
        );
        let b = m.boundary_structure().unwrap();
        let mut phi = Cochain::zeros(&b.complex, 0);
        for (v, &comp) in b.vertex_component.iter().enumerate() {
            phi.values[v] = if comp == 0 { 1.0 } else { 0.0 };
        }
        let rel = harmonic_basis(&m, &ops, 0, Bc::Relative, 3, &tol).unwrap();
        let omega = coclosed_extension(&m, &ops, &phi, &rel, &tol).unwrap();
        let d_omega = ops.d_apply(0, &omega.values);
        let energy = ops.inner(1, &d_omega, &d_omega);
        assert!(
            (energy - circ / len).abs() < 1e-11,
            "capacity {energy}, expected {}",
            circ / len
        );
        // Pythagoras: ‖d(ω₀+ψ)‖² = ‖dω₀‖² + ‖dψ‖² for zero-trace ψ
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let psi: Vec<f64> = (0..m.cell_count(0))
                .map(|i| if ops.interior(0)[i] { rng.gen_range(-1.0..1.0) } else { 0.0 })
                .collect();
            let mut sum = omega.values.clone();
            axpy(1.0, &psi, &mut sum);
            let lhs = {
                let d = ops.d_apply(0, &sum);
                ops.inner(1, &d, &d)
            };
            let dpsi = ops.d_apply(0, &psi);
            let rhs = energy + ops.inner(1, &dpsi, &dpsi);
            assert!((lhs - rhs).abs() < 1e-10 * rhs.max(1.0), "pythagoras {lhs} vs {rhs}");
        }
    }

    #[test]
    fn coclosed_extension_of_global_trace_is_closed() {
        // φ = trace of the global constant: dω₀ = 0
        let tol = Tolerances::default();
        let (m, ops) = fixture(&ModelSpec::Disk { radius: 1.0 }, 12);
        let b = m.boundary_structure().unwrap();
        let phi = Cochain {
            complex_id: b.complex.id(),
            degree: 0,
            values: vec![1.0; b.complex.cell_count(0)],
        };
        let rel = harmonic_basis(&m, &ops, 0, Bc::Relative, 5, &tol).unwrap();
        let omega = coclosed_extension(&m, &ops, &phi, &rel, &tol).unwrap();
        let d = ops.d_apply(0, &omega.values);
        assert!(ops.norm(1, &d) < 1e-11);
    }

    #[test]
    fn connecting_rep_kills_exact_classes() {
        let tol = Tolerances::default();
        let (m, ops) = fixture(&ModelSpec::Annulus { r_inner: 1.0, r_outer: 2.0 }, 12);
        let b = m.boundary_structure().unwrap();
        let rel2 = harmonic_basis(&m, &ops, 2, Bc::Relative, 5, &tol).unwrap();
        // φ = d'(random function) is exact: ∂[φ] = 0 in H²(M, Y)
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f: Vec<f64> = (0..b.complex.cell_count(0)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dphi = b.complex.coboundary(0).unwrap().to_f64().apply(&f);
        let phi = Cochain { complex_id: b.complex.id(), degree: 1, values: dphi };
        let (rep, _) = connecting_rep(&m, &ops, &rel2, &phi, &tol).unwrap();
        assert!(ops.norm(2, &rep.values) < 1e-9);
    }

    #[test]
    fn connecting_rep_two_volume_class_pairs_to_total_boundary_volume() {
        // φ = χ with values ±Vol(Y_i): the pairing of ∂[φ] with a relative
        // 1-cycle from Y1 to Y2 equals Vol(Y1) + Vol(Y2), up to sign
        let tol = Tolerances::default();
        let (m, ops) = fixture(&ModelSpec::Annulus { r_inner: 1.0, r_outer: 2.0 }, 12);
        let b = m.boundary_structure().unwrap();
        let (v1, v2) = (m.boundary_component_volume(0), m.boundary_component_volume(1));
        let mut chi = Cochain::zeros(&b.complex, 0);
        for (v, &comp) in b.vertex_component.iter().enumerate() {
            chi.values[v] = if comp == 0 { v2 } else { -v1 };
        }
        let rel1 = harmonic_basis(&m, &ops, 1, Bc::Relative, 5, &tol).unwrap();
        let (rep, _) = connecting_rep(&m, &ops, &rel1, &chi, &tol).unwrap();
        // relative 1-cycle: shortest vertex path from Y1 to Y2
        let path = vertex_path(&m, b.components[0].rings[0][0], &b.components[1].rings[0]);
        let mut pairing = 0.0;
        for w in path.windows(2) {
            let (a, bb) = (w[0], w[1]);
            let idx = m.cell_index(1, &[a.min(bb), a.max(bb)]).unwrap();
            pairing += if a < bb { rep.values[idx] } else { -rep.values[idx] };
        }
        assert!(
            (pairing.abs() - (v1 + v2)).abs() < 1e-8 * (v1 + v2),
            "∂χ([c]) = {pairing}, Vol(Y) = {}",
            v1 + v2
        );
    }

    fn vertex_path(m: &CellComplex, start: usize, targets: &[usize]) -> Vec<usize> {
        // BFS in the edge graph, returning one vertex path to any target
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m.cell_count(0)];
        for e in m.cells(1) {
            adj[e[0]].push(e[1]);
            adj[e[1]].push(e[0]);
        }
        let mut prev = vec![usize::MAX; m.cell_count(0)];
        let mut queue = std::collections::VecDeque::new();
        prev[start] = start;
        queue.push_back(start);
        let target_set: std::collections::HashSet<usize> = targets.iter().copied().collect();
        while let Some(u) = queue.pop_front() {
            if target_set.contains(&u) {
                let mut path = vec![u];
                let mut cur = u;
                while prev[cur] != cur {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return path;
            }
            for &v in &adj[u] {
                if prev[v] == usize::MAX {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        panic!("no path to the target component");
    }

    #[test]
    fn connecting_rep_disk_boundary_volume_form() {
        // φ = boundary arc form: ∫_M rep = ±Vol(Y) by Stokes
        let tol = Tolerances::default();
        let (m, ops) = fixture(&ModelSpec::Disk { radius: 1.0 }, 16);
        let b = m.boundary_structure().unwrap();
        let y = &b.complex;
        let mut phi = Cochain::zeros(y, 1);
        for (e, l) in y.edge_lengths().iter().enumerate() {
            phi.values[e] = *l * y.top_orientation()[e] as f64;
        }
        let rel2 = harmonic_basis(&m, &ops, 2, Bc::Relative, 5, &tol).unwrap();
        assert_eq!(rel2.dim(), 1);
        let (rep, _) = connecting_rep(&m, &ops, &rel2, &phi, &tol).unwrap();
        // ∫_M rep = Σ_T or(T) rep_T (Whitney top forms integrate to 1)
        let total: f64 = rep
            .values
            .iter()
            .zip(m.top_orientation())
            .map(|(&v, &or)| v * or as f64)
            .sum();
        let vol_y = m.boundary_volume();
        assert!(
            (total.abs() - vol_y).abs() < 1e-9 * vol_y,
            "Stokes: ∫rep = {total}, Vol(Y) = {vol_y}"
        );
    }
}
