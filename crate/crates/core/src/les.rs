//! The long exact sequence at the harmonic level, the image of the
//! restriction map, and the zero-energy scattering matrix S(0) as a
//! cohomological involution on boundary harmonic forms.

use nalgebra::DMatrix;

use crate::complex::{CellComplex, Cochain};
use crate::dec::{hodge_pairing, Bc, MetricOps, Tolerances};
use crate::error::{Error, Result};
use crate::hodge::{connecting_rep, harmonic_basis, HarmonicBasis};
use crate::homology::{self, Flavor};

/// Ranks of the maps in ... → H^k(M,Y) → H^k(M) → H^k(Y) → H^{k+1}(M,Y) → ...
/// forced by exactness and the Betti numbers.
#[derive(Debug, Clone)]
pub struct PredictedRanks {
    pub betti_rel: Vec<usize>,
    pub betti_abs: Vec<usize>,
    pub betti_y: Vec<usize>,
    /// rank of e_k: H^k(M,Y) → H^k(M), k = 0..=n
    pub rank_e: Vec<usize>,
    /// rank of r_k: H^k(M) → H^k(Y), k = 0..n
    pub rank_r: Vec<usize>,
    /// rank of ∂_k: H^k(Y) → H^{k+1}(M,Y), k = 0..n
    pub rank_bd: Vec<usize>,
}

pub fn predicted_ranks(m: &CellComplex) -> Result<PredictedRanks> {
    let n = m.dim();
    let betti_rel = homology::betti_numbers(m, Flavor::Relative)?;
    let betti_abs = homology::betti_numbers(m, Flavor::Absolute)?;
    let betti_y = homology::boundary_betti_numbers(m)?;
    let mut rank_e = vec![0usize; n + 1];
    let mut rank_r = vec![0usize; n];
    let mut rank_bd = vec![0usize; n];
    let mut prev_bd = 0usize;
    for k in 0..=n {
        rank_e[k] = betti_rel[k]
            .checked_sub(prev_bd)
            .ok_or_else(|| Error::Rank(format!("exactness recursion broke at H^{k}(M,Y)")))?;
        if k < n {
            rank_r[k] = betti_abs[k]
                .checked_sub(rank_e[k])
                .ok_or_else(|| Error::Rank(format!("exactness recursion broke at H^{k}(M)")))?;
            rank_bd[k] = betti_y[k]
                .checked_sub(rank_r[k])
                .ok_or_else(|| Error::Rank(format!("exactness recursion broke at H^{k}(Y)")))?;
            prev_bd = rank_bd[k];
        } else if betti_abs[n] != rank_e[n] {
            return Err(Error::Rank("exactness recursion broke at the top degree".into()));
        }
    }
    Ok(PredictedRanks { betti_rel, betti_abs, betti_y, rank_e, rank_r, rank_bd })
}

/// Trace of a harmonic field on M projected onto the harmonic basis of Y:
/// column j holds the 𝓗^p(Y)-coefficients of tr(h_j).
pub fn trace_coefficients(
    m: &CellComplex,
    ops: &MetricOps,
    abs_basis: &HarmonicBasis,
    y_basis: &HarmonicBasis,
) -> Result<DMatrix<f64>> {
    let yops = ops
        .boundary_ops
        .as_ref()
        .ok_or_else(|| Error::Structure("complex has no boundary".into()))?;
    let p = abs_basis.degree;
    let mut c = DMatrix::zeros(y_basis.dim(), abs_basis.dim());
    for (j, h) in abs_basis.vectors.iter().enumerate() {
        let tr = m.restrict_to_boundary(h)?;
        for (i, hy) in y_basis.vectors.iter().enumerate() {
            c[(i, j)] = yops.inner(p, &tr.values, &hy.values);
        }
    }
    Ok(c)
}

/// Orthonormal frame (columns) of the span of the columns of `c`, with the
/// rank pinned to `expected`; singular values near the threshold or a rank
/// mismatch are rank errors.
pub fn image_frame(c: &DMatrix<f64>, expected: usize, tol: &Tolerances) -> Result<DMatrix<f64>> {
    let rows = c.nrows();
    if c.ncols() == 0 || rows == 0 {
        if expected != 0 {
            return Err(Error::Rank(format!("empty map cannot have rank {expected}")));
        }
        return Ok(DMatrix::zeros(rows, 0));
    }
    let svd = c.clone().svd(true, false);
    // maps between orthonormal harmonic bases have natural scale 1; floor
    // the threshold there so a numerically-zero map gets rank 0
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max).max(1.0);
    let cut = tol.rank * smax;
    let mut rank = 0;
    for &s in svd.singular_values.iter() {
        if s > cut {
            rank += 1;
        }
        if s > 0.01 * cut && s < 100.0 * cut {
            return Err(Error::Rank(format!(
                "singular value {s:.3e} straddles the rank threshold ({cut:.3e})"
            )));
        }
    }
    if rank != expected {
        return Err(Error::Rank(format!(
            "numerical rank {rank} disagrees with integer homology rank {expected}"
        )));
    }
    let u = svd.u.ok_or_else(|| Error::Numerical("SVD did not return U".into()))?;
    Ok(u.columns(0, rank).into_owned())
}

/// Deterministic orthonormal completion of an orthonormal frame.
pub fn orthocomplement(u: &DMatrix<f64>) -> DMatrix<f64> {
    let nr = u.nrows();
    let want = nr - u.ncols();
    let mut cols: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(want);
    for seed in 0..nr {
        if cols.len() == want {
            break;
        }
        let mut v = nalgebra::DVector::zeros(nr);
        v[seed] = 1.0;
        for _ in 0..2 {
            for j in 0..u.ncols() {
                let col = u.column(j);
                let c = col.dot(&v);
                v -= c * nalgebra::DVector::from_column_slice(col.as_slice());
            }
            for w in &cols {
                let c = w.dot(&v);
                v -= c * w.clone();
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            cols.push(v / n);
        }
    }
    let mut out = DMatrix::zeros(nr, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// Image of r: H^p(M) → H^p(Y) as an orthonormal frame in the coordinates
/// of the given 𝓗^p(Y) basis.
pub fn image_of_restriction(
    m: &CellComplex,
    ops: &MetricOps,
    abs_basis: &HarmonicBasis,
    y_basis: &HarmonicBasis,
    tol: &Tolerances,
) -> Result<DMatrix<f64>> {
    let ranks = predicted_ranks(m)?;
    let c = trace_coefficients(m, ops, abs_basis, y_basis)?;
    image_frame(&c, ranks.rank_r[abs_basis.degree], tol)
}

/// The zero-energy scattering data of degree p together with its Hodge-dual
/// degree q = n−1−p.
pub struct ZeroEnergyScattering {
    pub degree: usize,
    pub dual_degree: usize,
    pub y_basis_p: HarmonicBasis,
    pub y_basis_q: HarmonicBasis,
    /// S_p(0) and S_q(0) in the orthonormal Y-harmonic bases.
    pub s0_p: DMatrix<f64>,
    pub s0_q: DMatrix<f64>,
    pub frame_plus_p: DMatrix<f64>,
    pub frame_minus_p: DMatrix<f64>,
    pub frame_plus_q: DMatrix<f64>,
    pub frame_minus_q: DMatrix<f64>,
    /// Hodge star 𝓗^p(Y) → 𝓗^q(Y): wedge-pairing matrix, then its polar
    /// orthogonal factor.
    pub star_raw: DMatrix<f64>,
    pub star: DMatrix<f64>,
    pub polar_defect: f64,
    /// ‖S_q(0) ★ + ★ S_p(0)‖₂ (mesh-dependent, → 0 under refinement).
    pub eps_star: f64,
}

fn involution_from_frame(frame: &DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    let mut s = DMatrix::identity(dim, dim) * -1.0;
    if frame.ncols() > 0 {
        s += 2.0 * frame * frame.transpose();
    }
    s
}

fn operator_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.iter().cloned().fold(0.0, f64::max)
}

/// Build S_p(0), S_q(0) and the boundary Hodge star in harmonic bases.
pub fn s_zero(
    m: &CellComplex,
    ops: &MetricOps,
    p: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<ZeroEnergyScattering> {
    let n = m.dim();
    if p > n - 1 {
        return Err(Error::Degree { op: "s_zero", degree: p, dim: n });
    }
    let q = n - 1 - p;
    let b = m
        .boundary_structure()
        .ok_or_else(|| Error::Structure("complex has no boundary".into()))?;
    let yops = ops
        .boundary_ops
        .as_ref()
        .ok_or_else(|| Error::Structure("boundary operators missing".into()))?;
    let y_basis_p = harmonic_basis(&b.complex, yops, p, Bc::Absolute, seed, tol)?;
    let y_basis_q = harmonic_basis(&b.complex, yops, q, Bc::Absolute, seed, tol)?;
    let abs_p = harmonic_basis(m, ops, p, Bc::Absolute, seed, tol)?;
    let abs_q = harmonic_basis(m, ops, q, Bc::Absolute, seed, tol)?;
    let frame_plus_p = image_of_restriction(m, ops, &abs_p, &y_basis_p, tol)?;
    let frame_plus_q = image_of_restriction(m, ops, &abs_q, &y_basis_q, tol)?;
    let frame_minus_p = orthocomplement(&frame_plus_p);
    let frame_minus_q = orthocomplement(&frame_plus_q);
    let s0_p = involution_from_frame(&frame_plus_p, y_basis_p.dim());
    let s0_q = involution_from_frame(&frame_plus_q, y_basis_q.dim());

    // wedge-pairing star in the two orthonormal bases
    let mut star_raw = DMatrix::zeros(y_basis_q.dim(), y_basis_p.dim());
    for (i, hp) in y_basis_p.vectors.iter().enumerate() {
        for (j, hq) in y_basis_q.vectors.iter().enumerate() {
            star_raw[(j, i)] = hodge_pairing(&b.complex, hp, hq)?;
        }
    }
    let (star, polar_defect) = polar_orthogonal(&star_raw)?;
    let eps_star = if star.nrows() == y_basis_q.dim() && star.ncols() == y_basis_p.dim() {
        operator_norm(&(&s0_q * &star + &star * &s0_p))
    } else {
        f64::NAN
    };
    Ok(ZeroEnergyScattering {
        degree: p,
        dual_degree: q,
        y_basis_p,
        y_basis_q,
        s0_p,
        s0_q,
        frame_plus_p,
        frame_minus_p,
        frame_plus_q,
        frame_minus_q,
        star_raw,
        star,
        polar_defect,
        eps_star,
    })
}

/// Polar decomposition: nearest matrix with orthonormal columns/rows.
fn polar_orthogonal(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok((m.clone(), 0.0));
    }
    if m.nrows() != m.ncols() {
        return Err(Error::Rank(format!(
            "star pairing is not square: {}×{} (dual Betti numbers differ)",
            m.nrows(),
            m.ncols()
        )));
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().unwrap();
    let vt = svd.v_t.as_ref().unwrap();
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smin > 1e-8) {
        return Err(Error::Rank(format!(
            "star pairing nearly singular (σ_min = {smin:.3e}); duality is not resolved"
        )));
    }
    let orth = u * vt;
    let defect = operator_norm(&(&orth - m));
    Ok((orth, defect))
}

impl ZeroEnergyScattering {
    /// Columns of the (−1)-eigenspace frame as boundary cochains
    /// (the orthonormal basis of (ker ∂)^⊥ used by the q(a) study).
    pub fn minus_eigenspace_cochains(&self, y: &CellComplex) -> Vec<Cochain> {
        frame_to_cochains(y, &self.y_basis_p, &self.frame_minus_p)
    }

    pub fn minus_eigenspace_cochains_dual(&self, y: &CellComplex) -> Vec<Cochain> {
        frame_to_cochains(y, &self.y_basis_q, &self.frame_minus_q)
    }
}

fn frame_to_cochains(y: &CellComplex, basis: &HarmonicBasis, frame: &DMatrix<f64>) -> Vec<Cochain> {
    let mut out = Vec::with_capacity(frame.ncols());
    for j in 0..frame.ncols() {
        let mut c = Cochain::zeros(y, basis.degree);
        for (i, h) in basis.vectors.iter().enumerate() {
            let w = frame[(i, j)];
            for (v, hv) in c.values.iter_mut().zip(&h.values) {
                *v += w * hv;
            }
        }
        out.push(c);
    }
    out
}

/// Characteristic (per-component indicator) functions of the boundary in
/// 𝓗⁰(Y) coordinates: column i is χ_i expanded in the harmonic basis.
pub fn component_characteristic_coords(
    m: &CellComplex,
    ops: &MetricOps,
    y_basis0: &HarmonicBasis,
) -> Result<DMatrix<f64>> {
    let b = m
        .boundary_structure()
        .ok_or_else(|| Error::Structure("complex has no boundary".into()))?;
    let yops = ops.boundary_ops.as_ref().unwrap();
    let ncomp = b.components.len();
    let mut a = DMatrix::zeros(y_basis0.dim(), ncomp);
    for comp in 0..ncomp {
        let chi: Vec<f64> = b
            .vertex_component
            .iter()
            .map(|&c| if c == comp { 1.0 } else { 0.0 })
            .collect();
        for (i, h) in y_basis0.vectors.iter().enumerate() {
            a[(i, comp)] = yops.inner(0, &chi, &h.values);
        }
    }
    Ok(a)
}

/// One node of the exactness audit table.
#[derive(Debug, Clone)]
pub struct NodeReport {
    pub name: String,
    pub dim: usize,
    pub rank_in: usize,
    pub dim_ker_out: usize,
    pub defect: f64,
}

#[derive(Debug)]
pub struct ExactnessReport {
    pub nodes: Vec<NodeReport>,
    pub exact: bool,
}

impl ExactnessReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("node,dim,rank_in,dim_ker_out,defect\n");
        for n in &self.nodes {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                n.name, n.dim, n.rank_in, n.dim_ker_out, n.defect
            ));
        }
        s
    }
}

fn numerical_rank(c: &DMatrix<f64>, tol: &Tolerances) -> (usize, f64) {
    if c.nrows() == 0 || c.ncols() == 0 {
        return (0, 0.0);
    }
    let svd = c.clone().svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max).max(1.0);
    let rank = svd.singular_values.iter().filter(|&&s| s > tol.rank * smax).count();
    (rank, smax)
}

/// Verify exactness of the harmonic-level long exact sequence: at every
/// node, rank(incoming) = dim ker(outgoing), with ranks matching the
/// integer-homology prediction; defect = ‖outgoing ∘ incoming‖.
pub fn exactness_audit(
    m: &CellComplex,
    ops: &MetricOps,
    seed: u64,
    tol: &Tolerances,
) -> Result<ExactnessReport> {
    let n = m.dim();
    let b = m
        .boundary_structure()
        .ok_or_else(|| Error::Structure("complex has no boundary".into()))?;
    let yops = ops.boundary_ops.as_ref().unwrap();
    let predicted = predicted_ranks(m)?;

    let mut rel = Vec::new();
    let mut abs = Vec::new();
    let mut ybas = Vec::new();
    for k in 0..=n {
        rel.push(harmonic_basis(m, ops, k, Bc::Relative, seed, tol)?);
        abs.push(harmonic_basis(m, ops, k, Bc::Absolute, seed, tol)?);
        if k < n {
            ybas.push(harmonic_basis(&b.complex, yops, k, Bc::Absolute, seed, tol)?);
        }
    }

    // matrices of e_k, r_k, ∂_k in the harmonic bases
    let mut e_mat = Vec::new();
    let mut r_mat = Vec::new();
    let mut bd_mat = Vec::new();
    for k in 0..=n {
        let mut e = DMatrix::zeros(abs[k].dim(), rel[k].dim());
        for (j, h) in rel[k].vectors.iter().enumerate() {
            for (i, g) in abs[k].vectors.iter().enumerate() {
                e[(i, j)] = ops.inner(k, &g.values, &h.values);
            }
        }
        e_mat.push(e);
        if k < n {
            r_mat.push(trace_coefficients(m, ops, &abs[k], &ybas[k])?);
            let mut bd = DMatrix::zeros(rel[k + 1].dim(), ybas[k].dim());
            for (j, hy) in ybas[k].vectors.iter().enumerate() {
                let (_, coeffs) = connecting_rep(m, ops, &rel[k + 1], hy, tol)?;
                for (i, &c) in coeffs.iter().enumerate() {
                    bd[(i, j)] = c;
                }
            }
            bd_mat.push(bd);
        }
    }

    let mut nodes = Vec::new();
    let mut exact = true;
    let mut push_node = |name: String,
                         dim: usize,
                         incoming: Option<&DMatrix<f64>>,
                         outgoing: Option<&DMatrix<f64>>,
                         predicted_in: usize,
                         predicted_out: usize| {
        let (rank_in, _) = incoming.map(|c| numerical_rank(c, tol)).unwrap_or((0, 0.0));
        let (rank_out, _) = outgoing.map(|c| numerical_rank(c, tol)).unwrap_or((0, 0.0));
        let dim_ker_out = dim - rank_out;
        let defect = match (incoming, outgoing) {
            (Some(a), Some(bm)) if a.ncols() > 0 && bm.nrows() > 0 => operator_norm(&(bm * a)),
            _ => 0.0,
        };
        let node_exact =
            rank_in + rank_out == dim && rank_in == predicted_in && rank_out == predicted_out;
        if !node_exact {
            exact = false;
        }
        nodes.push(NodeReport { name, dim, rank_in, dim_ker_out, defect });
    };

    for k in 0..=n {
        let incoming = if k == 0 { None } else { Some(&bd_mat[k - 1]) };
        push_node(
            format!("H{k}(M,Y)"),
            rel[k].dim(),
            incoming,
            Some(&e_mat[k]),
            if k == 0 { 0 } else { predicted.rank_bd[k - 1] },
            predicted.rank_e[k],
        );
        let outgoing_r = if k < n { Some(&r_mat[k]) } else { None };
        push_node(
            format!("H{k}(M)"),
            abs[k].dim(),
            Some(&e_mat[k]),
            outgoing_r,
            predicted.rank_e[k],
            if k < n { predicted.rank_r[k] } else { 0 },
        );
        if k < n {
            push_node(
                format!("H{k}(Y)"),
                ybas[k].dim(),
                Some(&r_mat[k]),
                Some(&bd_mat[k]),
                predicted.rank_r[k],
                predicted.rank_bd[k],
            );
        }
    }
    // defects must also be small for exactness (compositions vanish)
    let max_defect = nodes.iter().map(|n| n.defect).fold(0.0f64, f64::max);
    if max_defect > 1e-7 {
        exact = false;
    }
    let report = ExactnessReport { nodes, exact };
    if !report.exact {
        return Err(Error::Audit(format!(
            "long exact sequence audit failed:\n{}",
            report.to_csv()
        )));
    }
    Ok(report)
}
