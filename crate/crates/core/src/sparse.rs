//! Minimal sparse toolkit: CSR matrices over f64 and i64, and a Jacobi
//! preconditioned conjugate gradient solver on abstract operators.

use crate::error::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl Csr {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Csr { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), data: Vec::new() }
    }

    /// Build from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, _, _) in triplets {
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0f64; triplets.len()];
        let mut next = counts.clone();
        for &(r, c, v) in triplets {
            let k = next[r];
            cols[k] = c;
            vals[k] = v;
            next[r] += 1;
        }
        // sort each row, merge duplicates
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data = Vec::with_capacity(triplets.len());
        let mut row_buf: Vec<(usize, f64)> = Vec::new();
        for r in 0..nrows {
            row_buf.clear();
            for k in counts[r]..counts[r + 1] {
                row_buf.push((cols[k], vals[k]));
            }
            row_buf.sort_unstable_by_key(|e| e.0);
            let mut i = 0;
            while i < row_buf.len() {
                let c = row_buf[i].0;
                let mut v = row_buf[i].1;
                let mut j = i + 1;
                while j < row_buf.len() && row_buf[j].0 == c {
                    v += row_buf[j].1;
                    j += 1;
                }
                indices.push(c);
                data.push(v);
                i = j;
            }
            indptr[r + 1] = indices.len();
        }
        Csr { nrows, ncols, indptr, indices, data }
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let mut acc = 0.0;
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.data[k] * x[self.indices[k]];
            }
            y[r] = acc;
        }
    }

    /// y = A^T x
    pub fn mul_transpose_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        y.iter_mut().for_each(|v| *v = 0.0);
        for r in 0..self.nrows {
            let xr = x[r];
            if xr == 0.0 {
                continue;
            }
            for k in self.indptr[r]..self.indptr[r + 1] {
                y[self.indices[k]] += self.data[k] * xr;
            }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec(x, &mut y);
        y
    }

    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.ncols];
        self.mul_transpose_vec(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.nrows.min(self.ncols)];
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.indices[k] == r {
                    d[r] = self.data[k];
                }
            }
        }
        d
    }

    pub fn transpose(&self) -> Csr {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                triplets.push((self.indices[k], r, self.data[k]));
            }
        }
        Csr::from_triplets(self.ncols, self.nrows, &triplets)
    }

    /// Restriction to a subset of rows and columns given by boolean masks.
    pub fn restrict(&self, rows: &[bool], cols: &[bool]) -> Csr {
        let row_map = mask_index(rows);
        let col_map = mask_index(cols);
        let nr = rows.iter().filter(|&&b| b).count();
        let nc = cols.iter().filter(|&&b| b).count();
        let mut triplets = Vec::new();
        for r in 0..self.nrows {
            if !rows[r] {
                continue;
            }
            for k in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[k];
                if cols[c] {
                    triplets.push((row_map[r], col_map[c], self.data[k]));
                }
            }
        }
        Csr::from_triplets(nr, nc, &triplets)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                m[(r, self.indices[k])] = self.data[k];
            }
        }
        m
    }
}

fn mask_index(mask: &[bool]) -> Vec<usize> {
    let mut map = vec![usize::MAX; mask.len()];
    let mut j = 0;
    for (i, &b) in mask.iter().enumerate() {
        if b {
            map[i] = j;
            j += 1;
        }
    }
    map
}

/// Integer CSR, used for exact chain-complex checks (entries stay i64).
#[derive(Debug, Clone)]
pub struct IntCsr {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<i64>,
}

impl IntCsr {
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, i64)]) -> Self {
        let f: Vec<(usize, usize, f64)> =
            triplets.iter().map(|&(r, c, v)| (r, c, v as f64)).collect();
        let csr = Csr::from_triplets(nrows, ncols, &f);
        IntCsr {
            nrows,
            ncols,
            indptr: csr.indptr,
            indices: csr.indices,
            data: csr.data.iter().map(|&v| v as i64).collect(),
        }
    }

    pub fn to_f64(&self) -> Csr {
        Csr {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr: self.indptr.clone(),
            indices: self.indices.clone(),
            data: self.data.iter().map(|&v| v as f64).collect(),
        }
    }

    /// Exact integer product, for ∂∘∂ = 0 style checks.
    pub fn mul(&self, other: &IntCsr) -> IntCsr {
        assert_eq!(self.ncols, other.nrows);
        let mut triplets = Vec::new();
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let mid = self.indices[k];
                let a = self.data[k];
                for l in other.indptr[mid]..other.indptr[mid + 1] {
                    triplets.push((r, other.indices[l], a * other.data[l]));
                }
            }
        }
        let mut m = IntCsr::from_triplets(self.nrows, other.ncols, &triplets);
        // drop explicit zeros after summation
        let mut indptr = vec![0usize; m.nrows + 1];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        for r in 0..m.nrows {
            for k in m.indptr[r]..m.indptr[r + 1] {
                if m.data[k] != 0 {
                    indices.push(m.indices[k]);
                    data.push(m.data[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        m.indptr = indptr;
        m.indices = indices;
        m.data = data;
        m
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    /// Rank over the prime field Z/p via sparse Gaussian elimination.
    pub fn rank_mod(&self, p: i64) -> usize {
        // columns as sparse vectors of (row, value mod p)
        let mut cols: Vec<Vec<(usize, i64)>> = vec![Vec::new(); self.ncols];
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let v = self.data[k].rem_euclid(p);
                if v != 0 {
                    cols[self.indices[k]].push((r, v));
                }
            }
        }
        for c in cols.iter_mut() {
            c.sort_unstable_by_key(|e| e.0);
        }
        // pivot row -> column index of stored reduced column
        let mut pivot_of_row: std::collections::HashMap<usize, Vec<(usize, i64)>> =
            std::collections::HashMap::new();
        let mut rank = 0;
        for c in 0..self.ncols {
            let mut col = std::mem::take(&mut cols[c]);
            loop {
                let Some(&(low, val)) = col.last() else { break };
                if let Some(other) = pivot_of_row.get(&low) {
                    // eliminate: col -= val/other_low * other
                    let other_low = other.last().unwrap().1;
                    let factor = mul_mod(val, mod_inv(other_low, p), p);
                    col = sub_scaled_mod(&col, other, factor, p);
                } else {
                    let _ = val;
                    pivot_of_row.insert(low, col);
                    rank += 1;
                    break;
                }
            }
        }
        rank
    }

    /// Rank certified by agreement over two large primes.
    pub fn rank(&self) -> usize {
        const P1: i64 = 2_147_483_647; // 2^31 - 1
        const P2: i64 = 2_147_483_629;
        let r1 = self.rank_mod(P1);
        let r2 = self.rank_mod(P2);
        debug_assert_eq!(r1, r2, "modular rank disagreement");
        r1.max(r2)
    }
}

fn mul_mod(a: i64, b: i64, p: i64) -> i64 {
    ((a as i128 * b as i128) % p as i128) as i64
}

fn mod_inv(a: i64, p: i64) -> i64 {
    // extended Euclid
    let (mut t, mut new_t) = (0i64, 1i64);
    let (mut r, mut new_r) = (p, a.rem_euclid(p));
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    debug_assert_eq!(r, 1, "non-invertible element");
    t.rem_euclid(p)
}

fn sub_scaled_mod(
    a: &[(usize, i64)],
    b: &[(usize, i64)],
    factor: i64,
    p: i64,
) -> Vec<(usize, i64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i]);
            i += 1;
        } else if i >= a.len() || b[j].0 < a[i].0 {
            let v = (-mul_mod(factor, b[j].1, p)).rem_euclid(p);
            if v != 0 {
                out.push((b[j].0, v));
            }
            j += 1;
        } else {
            let v = (a[i].1 - mul_mod(factor, b[j].1, p)).rem_euclid(p);
            if v != 0 {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Abstract symmetric positive semidefinite operator for iterative solves.
pub trait LinearOp {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOp for Csr {
    fn dim(&self) -> usize {
        debug_assert_eq!(self.nrows, self.ncols);
        self.nrows
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec(x, y)
    }
}

/// Operator defined by a closure.
pub struct FnOp<F: Fn(&[f64], &mut [f64])> {
    pub n: usize,
    pub f: F,
}

impl<F: Fn(&[f64], &mut [f64])> LinearOp for FnOp<F> {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Settings for the conjugate gradient solver.
#[derive(Debug, Clone)]
pub struct CgConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl Default for CgConfig {
    fn default() -> Self {
        CgConfig { rel_tol: 1e-14, abs_tol: 1e-300, max_iter: 200_000 }
    }
}

/// Jacobi-preconditioned CG. `diag` may be empty (identity preconditioner).
/// Consistent singular systems are fine: iterates stay in the range of A.
pub fn cg(op: &dyn LinearOp, b: &[f64], diag: &[f64], cfg: &CgConfig) -> Result<Vec<f64>> {
    let n = op.dim();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(x);
    }
    let precond = |r: &[f64], z: &mut [f64]| {
        if diag.is_empty() {
            z.copy_from_slice(r);
        } else {
            for i in 0..n {
                z[i] = if diag[i].abs() > 0.0 { r[i] / diag[i] } else { r[i] };
            }
        }
    };
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for _ in 0..cfg.max_iter {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            // numerical null-space direction; project it out and stop
            break;
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rnorm = norm(&r);
        if rnorm <= cfg.rel_tol * bnorm + cfg.abs_tol {
            return Ok(x);
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rnorm = norm(&r);
    if rnorm <= 1e-9 * bnorm {
        // loose convergence: accept but signal through Ok; callers check residuals
        return Ok(x);
    }
    Err(Error::Numerical(format!(
        "CG failed to converge: residual {:.3e} of {:.3e}",
        rnorm, bnorm
    )))
}
