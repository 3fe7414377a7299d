//! Metric operators on cochains: Whitney-form mass matrices, coboundaries,
//! codifferentials via mass solves, Hodge Laplacians under absolute and
//! relative boundary conditions, and boundary spectra.

use nalgebra::DMatrix;

use crate::complex::{CellComplex, Cochain};
use crate::error::{Error, Result};
use crate::geometry::subsets;
use crate::homology;
use crate::sparse::{cg, dot, CgConfig, Csr};

/// Boundary-condition flavor for Laplacians and harmonic spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bc {
    /// Natural (Neumann-type) condition: plain Galerkin operator.
    Absolute,
    /// Dirichlet-type condition: cochains vanishing on boundary cells.
    Relative,
}

/// Numerical thresholds shared across the pipeline.
#[derive(Debug, Clone)]
pub struct Tolerances {
    /// Kernel grouping: eigenvalue < tol_kernel · (first nonzero).
    pub kernel: f64,
    /// Relative singular-value threshold for rank decisions.
    pub rank: f64,
    /// Admissible negative part of PSD spectra, relative to the norm.
    pub psd: f64,
    /// Slope defect admitted by the affine q(a)^{-1} fit.
    pub slope: f64,
    pub cg: CgConfig,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { kernel: 1e-6, rank: 1e-8, psd: 1e-10, slope: 1e-3, cg: CgConfig::default() }
    }
}

/// Assembled metric operators of one complex (and, when it has a boundary,
/// of its boundary complex). Immutable after assembly and safe to share
/// across threads; solves allocate their own workspace per call.
pub struct MetricOps {
    complex_id: u64,
    dim: usize,
    /// Mass matrix per degree 0..=n.
    mass: Vec<Csr>,
    mass_diag: Vec<Vec<f64>>,
    /// Coboundary D_p: C^p -> C^{p+1}, p = 0..n (f64 copy of the integer one).
    diff: Vec<Csr>,
    interior: Vec<Vec<bool>>,
    /// Operators of the boundary complex Y, when present.
    pub boundary_ops: Option<Box<MetricOps>>,
    cg: CgConfig,
}

impl MetricOps {
    /// Galerkin assembly of all degrees. Absolute operators are the plain
    /// assembled matrices; relative ones restrict to interior cochains.
    pub fn assemble(m: &CellComplex) -> Result<Self> {
        let n = m.dim();
        let mut mass = Vec::with_capacity(n + 1);
        for p in 0..=n {
            let nc = m.cell_count(p);
            let mut triplets = Vec::new();
            let faces = subsets(n + 1, p + 1);
            for t in 0..m.cell_count(n) {
                let metric = m.simplex_metric(n, t)?;
                let local = metric.whitney_mass(p);
                let verts = &m.cells(n)[t];
                // global index of each local face
                let gidx: Vec<usize> = faces
                    .iter()
                    .map(|f| {
                        let cell: Vec<usize> = f.iter().map(|&i| verts[i]).collect();
                        m.cell_index(p, &cell).expect("closure contains all faces")
                    })
                    .collect();
                for (fi, &gi) in gidx.iter().enumerate() {
                    for (fj, &gj) in gidx.iter().enumerate() {
                        triplets.push((gi, gj, local[(fi, fj)]));
                    }
                }
            }
            let csr = Csr::from_triplets(nc, nc, &triplets);
            for (i, &d) in csr.diagonal().iter().enumerate() {
                if !(d > 0.0) {
                    return Err(Error::Assembly(format!(
                        "mass matrix of degree {p} is singular at cell {i}"
                    )));
                }
            }
            mass.push(csr);
        }
        let mut diff = Vec::with_capacity(n);
        for p in 0..n {
            diff.push(m.coboundary(p)?.to_f64());
        }
        let mass_diag = mass.iter().map(|m| m.diagonal()).collect();
        let interior = (0..=n).map(|k| m.interior_mask(k).to_vec()).collect();
        let boundary_ops = match m.boundary_structure() {
            Some(b) => Some(Box::new(MetricOps::assemble(&b.complex)?)),
            None => None,
        };
        Ok(MetricOps {
            complex_id: m.id(),
            dim: n,
            mass,
            mass_diag,
            diff,
            interior,
            boundary_ops,
            cg: CgConfig::default(),
        })
    }

    pub fn complex_id(&self) -> u64 {
        self.complex_id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mass(&self, p: usize) -> &Csr {
        &self.mass[p]
    }

    /// Coboundary D_p as an f64 matrix.
    pub fn diff(&self, p: usize) -> &Csr {
        &self.diff[p]
    }

    pub fn interior(&self, p: usize) -> &[bool] {
        &self.interior[p]
    }

    /// ⟨x, y⟩ in the degree-p mass inner product.
    pub fn inner(&self, p: usize, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.mass[p].apply(y))
    }

    pub fn norm(&self, p: usize, x: &[f64]) -> f64 {
        self.inner(p, x, x).max(0.0).sqrt()
    }

    /// Solve M_p x = rhs.
    pub fn mass_solve(&self, p: usize, rhs: &[f64]) -> Result<Vec<f64>> {
        cg(&self.mass[p], rhs, &self.mass_diag[p], &self.cg)
    }

    /// Apply d on a cochain.
    pub fn d_apply(&self, p: usize, x: &[f64]) -> Vec<f64> {
        self.diff[p].apply(x)
    }

    /// Apply the codifferential δ_p = M_{p-1}^{-1} D_{p-1}^T M_p.
    pub fn codiff_apply(&self, p: usize, x: &[f64]) -> Result<Vec<f64>> {
        if p == 0 {
            return Ok(Vec::new());
        }
        let mx = self.mass[p].apply(x);
        let dtm = self.diff[p - 1].apply_transpose(&mx);
        self.mass_solve(p - 1, &dtm)
    }

    /// Apply the Hodge Laplacian L_p(bc). Under relative conditions the
    /// input must vanish on boundary cells (entries there are ignored and
    /// the output vanishes there).
    pub fn laplacian_apply(&self, p: usize, bc: Bc, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim;
        let mask = |v: &mut Vec<f64>, k: usize| {
            if bc == Bc::Relative {
                for (i, keep) in self.interior[k].iter().enumerate() {
                    if !keep {
                        v[i] = 0.0;
                    }
                }
            }
        };
        let mut xin = x.to_vec();
        mask(&mut xin, p);
        let mut out = vec![0.0; x.len()];
        if p < n {
            // δ_{p+1} d_p
            let dx = self.diff[p].apply(&xin);
            let mut mdx = self.mass[p + 1].apply(&dx);
            mask(&mut mdx, p + 1);
            // the relative restriction acts on the test space: project, solve
            let dtm = self.diff[p].apply_transpose(&mdx);
            let mut up = self.solve_mass_masked(p, &dtm, bc)?;
            mask(&mut up, p);
            for i in 0..out.len() {
                out[i] += up[i];
            }
        }
        if p > 0 {
            // d_{p-1} δ_p
            let mx = self.mass[p].apply(&xin);
            let mut dtm = self.diff[p - 1].apply_transpose(&mx);
            mask(&mut dtm, p - 1);
            let mut delta = self.solve_mass_masked(p - 1, &dtm, bc)?;
            mask(&mut delta, p - 1);
            let mut down = self.diff[p - 1].apply(&delta);
            mask(&mut down, p);
            for i in 0..out.len() {
                out[i] += down[i];
            }
        }
        mask(&mut out, p);
        Ok(out)
    }

    fn solve_mass_masked(&self, p: usize, rhs: &[f64], bc: Bc) -> Result<Vec<f64>> {
        match bc {
            Bc::Absolute => self.mass_solve(p, rhs),
            Bc::Relative => {
                let mask = &self.interior[p];
                let sub = self.mass[p].restrict(mask, mask);
                let rhs_sub: Vec<f64> = rhs
                    .iter()
                    .zip(mask)
                    .filter(|&(_, &k)| k)
                    .map(|(&v, _)| v)
                    .collect();
                let x_sub = cg(&sub, &rhs_sub, &sub.diagonal(), &self.cg)?;
                let mut out = vec![0.0; rhs.len()];
                let mut it = x_sub.iter();
                for (i, &keep) in mask.iter().enumerate() {
                    if keep {
                        out[i] = *it.next().unwrap();
                    }
                }
                Ok(out)
            }
        }
    }

    /// Dense Laplacian of degree p (small meshes / tests / dumps only).
    pub fn dense_laplacian(&self, p: usize, bc: Bc) -> Result<DMatrix<f64>> {
        let nc = self.mass[p].nrows;
        let mut out = DMatrix::zeros(nc, nc);
        let mut e = vec![0.0; nc];
        for j in 0..nc {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.laplacian_apply(p, bc, &e)?;
            for i in 0..nc {
                out[(i, j)] = col[i];
            }
        }
        Ok(out)
    }

    /// ⟨dα, β⟩ − ⟨α, δβ⟩ for one pair (adjointness residual).
    pub fn adjointness_defect(&self, p: usize, alpha: &[f64], beta: &[f64]) -> Result<f64> {
        let da = self.diff[p].apply(alpha);
        let left = self.inner(p + 1, &da, beta);
        let db = self.codiff_apply(p + 1, beta)?;
        let right = self.inner(p, alpha, &db);
        Ok(left - right)
    }
}

/// Eigenvalues of the boundary Laplacian Δ'_p ⊕ Δ'_{p-1} on Y.
#[derive(Debug, Clone)]
pub struct BoundarySpectrum {
    pub degree: usize,
    /// Merged ascending eigenvalues of the direct sum.
    pub eigenvalues: Vec<f64>,
    pub zero_count: usize,
    pub expected_zero_count: usize,
    /// Smallest strictly positive eigenvalue of the direct sum.
    pub nu1: f64,
    /// First threshold μ₁ = √ν₁.
    pub mu1: f64,
}

/// Dense symmetric generalized eigenvalues of the degree-q Laplacian of a
/// closed complex, ascending.
fn laplacian_spectrum_dense(ops: &MetricOps, q: usize) -> Result<Vec<f64>> {
    let nq = ops.mass(q).nrows;
    let n = ops.dim();
    let mass = ops.mass(q).to_dense();
    let mut k = DMatrix::zeros(nq, nq);
    if q < n {
        let d = ops.diff(q).to_dense();
        let mq1 = ops.mass(q + 1).to_dense();
        k += d.transpose() * mq1 * d;
    }
    if q > 0 {
        let d = ops.diff(q - 1).to_dense();
        let mqm = ops.mass(q - 1).to_dense();
        let mq = ops.mass(q).to_dense();
        let inv = mqm
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("boundary mass not invertible".into()))?;
        k += mq.clone() * &d * inv * d.transpose() * mq;
    }
    // symmetrize roundoff and solve the pencil K x = ν M x
    let k = (&k + k.transpose()) * 0.5;
    let chol = nalgebra::Cholesky::new(mass)
        .ok_or_else(|| Error::Numerical("boundary mass not positive definite".into()))?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let a = &l_inv * k * l_inv.transpose();
    let a = (&a + a.transpose()) * 0.5;
    let eig = a.symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(vals)
}

/// Spectrum of Δ'_p ⊕ Δ'_{p-1} on a closed complex (the boundary Y), with
/// the kernel dimension cross-checked against Betti numbers.
pub fn boundary_spectrum(
    y: &CellComplex,
    p: usize,
    count: usize,
    tol: &Tolerances,
) -> Result<BoundarySpectrum> {
    if y.has_boundary() {
        return Err(Error::Structure("boundary spectrum needs a closed complex".into()));
    }
    let ops = MetricOps::assemble(y)?;
    let betti = homology::betti_numbers(y, homology::Flavor::Absolute)?;
    let ny = y.dim();
    let mut merged = Vec::new();
    let mut expected_zero = 0usize;
    for q in [p.checked_sub(1), Some(p)].into_iter().flatten() {
        if q > ny {
            continue;
        }
        merged.extend(laplacian_spectrum_dense(&ops, q)?);
        expected_zero += betti[q];
    }
    merged.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if count < expected_zero + 1 {
        return Err(Error::Parameter(format!(
            "need at least {} eigenvalues to see past the kernel",
            expected_zero + 1
        )));
    }
    if merged.len() <= expected_zero {
        return Err(Error::SpectralGap("spectrum smaller than expected kernel".into()));
    }
    let first_nonzero = merged[expected_zero];
    if !(first_nonzero > 0.0) {
        return Err(Error::SpectralGap("no positive eigenvalue beyond the kernel".into()));
    }
    let zero_count = merged.iter().take_while(|&&v| v < tol.kernel * first_nonzero).count();
    if zero_count != expected_zero {
        return Err(Error::Rank(format!(
            "kernel of the boundary Laplacian has dimension {zero_count}, Betti predicts {expected_zero}"
        )));
    }
    let nu1 = first_nonzero;
    merged.truncate(count.min(merged.len()));
    Ok(BoundarySpectrum {
        degree: p,
        eigenvalues: merged,
        zero_count,
        expected_zero_count: expected_zero,
        nu1,
        mu1: nu1.sqrt(),
    })
}

/// Richardson extrapolation of the boundary gap from two resolutions
/// (assuming second-order convergence): extrapolated ν₁ and the
/// discretization-error estimate of the fine value.
pub fn richardson_nu1(coarse: &BoundarySpectrum, fine: &BoundarySpectrum) -> (f64, f64) {
    let extrap = fine.nu1 + (fine.nu1 - coarse.nu1) / 3.0;
    (extrap, (fine.nu1 - extrap).abs())
}

/// Discrepancy between the spectra of L_p(relative) and L_{n−p}(absolute):
/// a discretization metric, reported rather than asserted (the discrete
/// star is only approximately an isometry). Dense; small meshes only.
#[derive(Debug, Clone)]
pub struct DualityGapReport {
    pub degree: usize,
    pub relative: Vec<f64>,
    pub absolute_dual: Vec<f64>,
    /// Worst relative gap over the compared window.
    pub max_relative_gap: f64,
}

pub fn spectral_duality_gap(
    ops: &MetricOps,
    p: usize,
    count: usize,
) -> Result<DualityGapReport> {
    let n = ops.dim();
    if p > n {
        return Err(Error::Degree { op: "spectral_duality_gap", degree: p, dim: n });
    }
    // the Laplacian is self-adjoint in the mass inner product: its bilinear
    // form is M·L, the right symmetric matrix for the pencil (M·L, M)
    let rel_form = ops.mass(p).to_dense() * ops.dense_laplacian(p, Bc::Relative)?;
    let mask = ops.interior(p);
    let idx: Vec<usize> = mask.iter().enumerate().filter(|&(_, &k)| k).map(|(i, _)| i).collect();
    let mut rel_sub = DMatrix::zeros(idx.len(), idx.len());
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            rel_sub[(a, b)] = rel_form[(i, j)];
        }
    }
    let mass = ops.mass(p).restrict(mask, mask).to_dense();
    let rel = generalized_spectrum(&rel_sub, &mass)?;
    let abs_form = ops.mass(n - p).to_dense() * ops.dense_laplacian(n - p, Bc::Absolute)?;
    let abs = generalized_spectrum(&abs_form, &ops.mass(n - p).to_dense())?;
    let k = count.min(rel.len()).min(abs.len());
    let mut max_gap = 0.0f64;
    for i in 0..k {
        let denom = rel[i].abs().max(abs[i].abs()).max(1e-14);
        max_gap = max_gap.max((rel[i] - abs[i]).abs() / denom);
    }
    Ok(DualityGapReport {
        degree: p,
        relative: rel.into_iter().take(count).collect(),
        absolute_dual: abs.into_iter().take(count).collect(),
        max_relative_gap: max_gap,
    })
}

/// Eigenvalues of the symmetric pencil (K, M): K x = ν M x, M SPD.
pub fn generalized_spectrum(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = nalgebra::Cholesky::new(m.clone())
        .ok_or_else(|| Error::Numerical("mass not positive definite".into()))?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let a = &l_inv * k * l_inv.transpose();
    Ok(symmetric_eigenvalues(&a))
}

/// ∫_Y α ∧ β of two piecewise-linear forms of complementary degree on a
/// closed oriented complex; exact quadrature.
pub fn hodge_pairing(y: &CellComplex, alpha: &Cochain, beta: &Cochain) -> Result<f64> {
    if y.has_boundary() {
        return Err(Error::Structure("wedge pairing needs a closed complex".into()));
    }
    if alpha.complex_id != y.id() || beta.complex_id != y.id() {
        return Err(Error::Input("cochains belong to a different complex".into()));
    }
    let k = y.dim();
    let (p, q) = (alpha.degree, beta.degree);
    if p + q != k {
        return Err(Error::Degree { op: "hodge_pairing", degree: p, dim: k });
    }
    let pfaces = subsets(k + 1, p + 1);
    let qfaces = subsets(k + 1, q + 1);
    let mut acc = 0.0;
    for t in 0..y.cell_count(k) {
        let metric = y.simplex_metric(k, t)?;
        let local = metric.whitney_wedge(p);
        let verts = &y.cells(k)[t];
        let or = y.top_orientation()[t] as f64;
        for (fi, fa) in pfaces.iter().enumerate() {
            let ca: Vec<usize> = fa.iter().map(|&i| verts[i]).collect();
            let ia = y.cell_index(p, &ca).expect("face in closure");
            for (fj, fb) in qfaces.iter().enumerate() {
                let cb: Vec<usize> = fb.iter().map(|&i| verts[i]).collect();
                let ib = y.cell_index(q, &cb).expect("face in closure");
                acc += or * alpha.values[ia] * local[(fi, fj)] * beta.values[ib];
            }
        }
    }
    Ok(acc)
}

/// Extract one boundary component of `m` as a standalone closed complex.
/// Cell indices follow the component's share of the Y complex.
pub fn component_complex(m: &CellComplex, component: usize) -> Result<CellComplex> {
    let b = m
        .boundary_structure()
        .ok_or_else(|| Error::Structure("complex has no boundary".into()))?;
    let y = &b.complex;
    let ny = y.dim();
    let mut vmap = std::collections::HashMap::new();
    let mut count = 0usize;
    for (v, &comp) in b.vertex_component.iter().enumerate() {
        if comp == component {
            vmap.insert(v, count);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Structure(format!("no such boundary component {component}")));
    }
    let mut top_cells = Vec::new();
    for (c, cell) in y.cells(ny).iter().enumerate() {
        if b.top_component[c] != component {
            continue;
        }
        let mut t: Vec<usize> = cell.iter().map(|v| vmap[v]).collect();
        if y.top_orientation()[c] < 0 {
            let l = t.len();
            t.swap(l - 2, l - 1);
        }
        top_cells.push(t);
    }
    let mut edge_lengths = std::collections::HashMap::new();
    for (ei, e) in y.cells(1).iter().enumerate() {
        if let (Some(&a), Some(&bv)) = (vmap.get(&e[0]), vmap.get(&e[1])) {
            edge_lengths.insert((a.min(bv), a.max(bv)), y.edge_lengths()[ei]);
        }
    }
    CellComplex::new(crate::complex::ComplexData {
        dim: ny,
        vertex_count: count,
        top_cells,
        edge_lengths,
        vertex_coords: None,
        components: Vec::new(),
        collar: None,
    })
}

/// Write a sparse matrix in coordinate text format: `row col value` lines.
pub fn dump_matrix<W: std::io::Write>(m: &Csr, out: &mut W) -> Result<()> {
    for r in 0..m.nrows {
        for k in m.indptr[r]..m.indptr[r + 1] {
            writeln!(out, "{} {} {}", r, m.indices[k], m.data[k])?;
        }
    }
    Ok(())
}

/// Dense symmetric eigenvalues helper used by audits on small matrices.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    match m.nrows() {
        0 => return Vec::new(),
        1 => return vec![m[(0, 0)]],
        _ => {}
    }
    let sym = (m + m.transpose()) * 0.5;
    let mut v: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::generators::{generate_model, ModelSpec};
    use rand::{Rng, SeedableRng};

    #[test]
    fn adjointness_on_flat_cylinder() {
        let (m, _) = generate_model(
            &ModelSpec::FlatCylinder { length: 1.0, circumference: 1.0 },
            12,
        )
        .unwrap();
        let ops = MetricOps::assemble(&m).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a: Vec<f64> = (0..m.cell_count(0)).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..m.cell_count(1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let defect = ops.adjointness_defect(0, &a, &b).unwrap();
            let scale = ops.norm(0, &a) * ops.norm(1, &b);
            assert!(defect.abs() <= 1e-12 * scale.max(1.0), "defect {defect:.3e}");
        }
    }

    #[test]
    fn constants_are_harmonic_absolute() {
        let (m, _) = generate_model(&ModelSpec::Disk { radius: 1.0 }, 12).unwrap();
        let ops = MetricOps::assemble(&m).unwrap();
        let ones = vec![1.0; m.cell_count(0)];
        let l = ops.laplacian_apply(0, Bc::Absolute, &ones).unwrap();
        let defect = crate::sparse::norm(&l);
        assert!(defect < 1e-11, "L0·1 = {defect:.3e}");
    }

    #[test]
    fn circle_spectrum_matches_analytic() {
        let (m, _) = generate_model(
            &ModelSpec::FlatCylinder { length: 1.0, circumference: 1.0 },
            64,
        )
        .unwrap();
        let comp = component_complex(&m, 0).unwrap();
        let spec = boundary_spectrum(&comp, 0, 4, &Tolerances::default()).unwrap();
        let nu_expected = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
        assert_eq!(spec.zero_count, 1);
        assert!(
            (spec.nu1 - nu_expected).abs() < 0.01 * nu_expected,
            "nu1 = {}, expected {nu_expected}",
            spec.nu1
        );
        // duality on S¹: the p = 1 direct sum repeats the p = 0 value
        let spec1 = boundary_spectrum(&comp, 1, 4, &Tolerances::default()).unwrap();
        assert!((spec1.nu1 - spec.nu1).abs() < 1e-9 * spec.nu1);
    }

    #[test]
    fn two_circles_have_two_zero_modes() {
        let (m, _) = generate_model(
            &ModelSpec::FlatCylinder { length: 1.0, circumference: 1.0 },
            16,
        )
        .unwrap();
        let y = &m.boundary_structure().unwrap().complex;
        let spec = boundary_spectrum(y, 0, 4, &Tolerances::default()).unwrap();
        assert_eq!(spec.zero_count, 2);
    }

    #[test]
    fn laplacian_spectra_nonnegative_and_duality_gap_reported() {
        let (m, _) = generate_model(
            &ModelSpec::FlatCylinder { length: 1.0, circumference: 1.0 },
            8,
        )
        .unwrap();
        let ops = MetricOps::assemble(&m).unwrap();
        for p in 0..=2 {
            for bc in [Bc::Absolute, Bc::Relative] {
                // eigenvalues of the pencil (M·L, M): the mass inner product
                // is where the Laplacian is self-adjoint PSD
                let form = ops.mass(p).to_dense() * ops.dense_laplacian(p, bc).unwrap();
                let mass = match bc {
                    Bc::Absolute => ops.mass(p).to_dense(),
                    Bc::Relative => {
                        let mask = ops.interior(p);
                        ops.mass(p).restrict(mask, mask).to_dense()
                    }
                };
                let form = match bc {
                    Bc::Absolute => form,
                    Bc::Relative => {
                        let mask = ops.interior(p);
                        let idx: Vec<usize> = mask
                            .iter()
                            .enumerate()
                            .filter(|&(_, &k)| k)
                            .map(|(i, _)| i)
                            .collect();
                        let mut sub = nalgebra::DMatrix::zeros(idx.len(), idx.len());
                        for (a, &i) in idx.iter().enumerate() {
                            for (b, &j) in idx.iter().enumerate() {
                                sub[(a, b)] = form[(i, j)];
                            }
                        }
                        sub
                    }
                };
                if form.nrows() == 0 {
                    continue;
                }
                let eigs = generalized_spectrum(&form, &mass).unwrap();
                let top = eigs.last().copied().unwrap_or(0.0);
                assert!(
                    eigs.iter().all(|&e| e >= -1e-10 * top.max(1.0)),
                    "degree {p}: negative eigenvalue {:?}",
                    eigs.first()
                );
            }
        }
        // middle-degree duality gap is a reported discretization metric
        let gap = spectral_duality_gap(&ops, 1, 6).unwrap();
        assert_eq!(gap.relative.len(), 6);
        assert!(gap.max_relative_gap.is_finite());
    }

    #[test]
    fn richardson_error_estimate() {
        let tol = Tolerances::default();
        let spectra: Vec<BoundarySpectrum> = [16usize, 32]
            .iter()
            .map(|&res| {
                let (m, _) = generate_model(
                    &ModelSpec::FlatCylinder { length: 1.0, circumference: 1.0 },
                    res,
                )
                .unwrap();
                let comp = component_complex(&m, 0).unwrap();
                boundary_spectrum(&comp, 0, 3, &tol).unwrap()
            })
            .collect();
        let (extrap, err) = richardson_nu1(&spectra[0], &spectra[1]);
        let exact = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
        // extrapolation lands much closer than the raw fine value
        assert!((extrap - exact).abs() < 0.2 * (spectra[1].nu1 - exact).abs());
        assert!(err > 0.0);
    }

    #[test]
    fn pairing_constant_against_arc_form_gives_length(){
        let (m, _) = generate_model(
            &ModelSpec::FlatCylinder { length: 1.0, circumference: 1.0 },
            16,
        )
        .unwrap();
        let comp = component_complex(&m, 0).unwrap();
        let ones = Cochain { complex_id: comp.id(), degree: 0, values: vec![1.0; comp.cell_count(0)] };
        // the arc cochain: each edge carries its length, signed by the
        // reference orientation relative to the fundamental cycle
        let mut arc = Cochain { complex_id: comp.id(), degree: 1, values: vec![0.0; comp.cell_count(1)] };
        for (ei, l) in comp.edge_lengths().iter().enumerate() {
            arc.values[ei] = *l * comp.top_orientation()[ei] as f64;
        }
        let total = hodge_pairing(&comp, &ones, &arc).unwrap();
        assert!((total.abs() - 1.0).abs() < 1e-13, "pairing {total}");
        // antisymmetry sign for (p, q) = (0, 1) on a circle: (+1)
        let flipped = hodge_pairing(&comp, &arc, &ones).unwrap();
        assert!((total - flipped).abs() < 1e-13);
    }
}
