//! Metric geometry of single simplices from edge-length data: volumes,
//! barycentric gradients and local Gram matrices of piecewise-linear forms.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Metric data of a k-simplex: Gram matrix of the barycentric gradients,
/// simplex volume, and the λ-moment factor used in mass assembly.
#[derive(Debug, Clone)]
pub struct SimplexMetric {
    /// ⟨∇λ_i, ∇λ_j⟩ for i, j in 0..=k.
    pub grad_gram: DMatrix<f64>,
    pub volume: f64,
    k: usize,
}

impl SimplexMetric {
    /// Build from the squared lengths of the edges (i, j), i < j, of a
    /// k-simplex with local vertices 0..=k. `len2(i, j)` must be positive.
    pub fn from_edge_lengths<F: Fn(usize, usize) -> f64>(k: usize, len2: F) -> Result<Self> {
        if k == 0 {
            return Ok(SimplexMetric { grad_gram: DMatrix::zeros(1, 1), volume: 1.0, k });
        }
        // Gram of the edge vectors e_i = v_i - v_0.
        let l2 = |i: usize, j: usize| if i == j { 0.0 } else { len2(i, j) };
        let mut e = DMatrix::zeros(k, k);
        for i in 1..=k {
            for j in 1..=k {
                let v = 0.5 * (l2(0, i) + l2(0, j) - l2(i, j));
                e[(i - 1, j - 1)] = v;
            }
        }
        let det = e.clone().determinant();
        if !(det > 0.0) {
            return Err(Error::Generation(format!(
                "degenerate simplex: Gram determinant {det:.3e}"
            )));
        }
        let factorial: f64 = (1..=k).product::<usize>() as f64;
        let volume = det.sqrt() / factorial;
        let einv = e
            .try_inverse()
            .ok_or_else(|| Error::Generation("singular edge Gram".into()))?;
        // ∇λ_i for i >= 1 has Gram E^{-1}; ∇λ_0 = -Σ ∇λ_i.
        let mut g = DMatrix::zeros(k + 1, k + 1);
        for i in 1..=k {
            for j in 1..=k {
                g[(i, j)] = einv[(i - 1, j - 1)];
            }
        }
        for i in 1..=k {
            let s: f64 = (1..=k).map(|j| einv[(i - 1, j - 1)]).sum();
            g[(0, i)] = -s;
            g[(i, 0)] = -s;
        }
        g[(0, 0)] = (1..=k).map(|i| -g[(0, i)]).sum();
        Ok(SimplexMetric { grad_gram: g, volume, k })
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    /// ∫_T λ_a λ_b dV = Vol · (1 + δ_ab) / ((k+1)(k+2)).
    pub fn lambda_moment(&self, a: usize, b: usize) -> f64 {
        let k = self.k as f64;
        self.volume * if a == b { 2.0 } else { 1.0 } / ((k + 1.0) * (k + 2.0))
    }

    /// ⟨dλ_{a_1}∧…∧dλ_{a_p}, dλ_{b_1}∧…∧dλ_{b_p}⟩ as a determinant of the
    /// gradient Gram.
    pub fn form_gram(&self, a: &[usize], b: &[usize]) -> f64 {
        let p = a.len();
        debug_assert_eq!(p, b.len());
        if p == 0 {
            return 1.0;
        }
        let mut m = DMatrix::zeros(p, p);
        for i in 0..p {
            for j in 0..p {
                m[(i, j)] = self.grad_gram[(a[i], b[j])];
            }
        }
        m.determinant()
    }

    /// Local Whitney mass matrix of the p-faces of this simplex. Faces are
    /// indexed by increasing (p+1)-subsets of 0..=k in lexicographic order,
    /// matching [`subsets`].
    pub fn whitney_mass(&self, p: usize) -> DMatrix<f64> {
        let faces = subsets(self.k + 1, p + 1);
        let nf = faces.len();
        let pf: f64 = (1..=p).product::<usize>() as f64;
        let scale = pf * pf;
        let mut m = DMatrix::zeros(nf, nf);
        let mut ai = Vec::with_capacity(p);
        let mut bj = Vec::with_capacity(p);
        for (fi, sa) in faces.iter().enumerate() {
            for (fj, sb) in faces.iter().enumerate() {
                let mut acc = 0.0;
                for (i, &va) in sa.iter().enumerate() {
                    ai.clear();
                    ai.extend(sa.iter().enumerate().filter(|&(t, _)| t != i).map(|(_, &v)| v));
                    for (j, &vb) in sb.iter().enumerate() {
                        bj.clear();
                        bj.extend(
                            sb.iter().enumerate().filter(|&(t, _)| t != j).map(|(_, &v)| v),
                        );
                        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                        acc += sign * self.lambda_moment(va, vb) * self.form_gram(&ai, &bj);
                    }
                }
                m[(fi, fj)] = scale * acc;
            }
        }
        m
    }

    /// Local matrix of the wedge pairing ∫_T W_σ ∧ W_τ for p-faces σ against
    /// q-faces τ with p + q = k, relative to the reference orientation
    /// [v_0, …, v_k] of the simplex. Rows index p-faces, columns q-faces.
    pub fn whitney_wedge(&self, p: usize) -> DMatrix<f64> {
        let k = self.k;
        let q = k - p;
        let pfaces = subsets(k + 1, p + 1);
        let qfaces = subsets(k + 1, q + 1);
        let pf: f64 = (1..=p).product::<usize>() as f64;
        let qf: f64 = (1..=q).product::<usize>() as f64;
        let kf: f64 = (1..=k).product::<usize>() as f64;
        let mut m = DMatrix::zeros(pfaces.len(), qfaces.len());
        let mut merged = Vec::with_capacity(k);
        for (fi, sa) in pfaces.iter().enumerate() {
            for (fj, sb) in qfaces.iter().enumerate() {
                let mut acc = 0.0;
                for (i, &va) in sa.iter().enumerate() {
                    for (j, &vb) in sb.iter().enumerate() {
                        merged.clear();
                        merged.extend(sa.iter().enumerate().filter(|&(t, _)| t != i).map(|(_, &v)| v));
                        let split = merged.len();
                        merged.extend(sb.iter().enumerate().filter(|&(t, _)| t != j).map(|(_, &v)| v));
                        let Some(perm_sign) = merge_sign(&merged, split) else { continue };
                        // merged is now a permutation of 0..=k minus one index m0
                        let mut present = vec![false; k + 1];
                        for &v in merged.iter() {
                            present[v] = true;
                        }
                        let missing = present.iter().position(|&b| !b).unwrap();
                        let missing_sign = if missing % 2 == 0 { 1.0 } else { -1.0 };
                        let base_sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                        // dλ_{merged} = sign · vol_form / (k! Vol), so the
                        // integral contributes moment(a,b) · sign / (k! Vol).
                        acc += base_sign * perm_sign * missing_sign * self.lambda_moment(va, vb)
                            / (kf * self.volume);
                    }
                }
                m[(fi, fj)] = pf * qf * acc;
            }
        }
        m
    }
}

/// Signature of sorting `merged` (two sorted halves split at `split`) into
/// ascending order; None if any duplicate entry exists.
fn merge_sign(merged: &[usize], split: usize) -> Option<f64> {
    // count inversions across the two sorted halves
    let (a, b) = merged.split_at(split);
    let mut inv = 0usize;
    for &x in a {
        for &y in b {
            if x == y {
                return None;
            }
            if x > y {
                inv += 1;
            }
        }
    }
    Some(if inv % 2 == 0 { 1.0 } else { -1.0 })
}

/// Increasing m-subsets of 0..n in lexicographic order.
pub fn subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(m);
    fn rec(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(v + 1, n, m, cur, out);
            cur.pop();
        }
    }
    rec(0, n, m, &mut cur, &mut out);
    out
}

/// Area of a triangle from its three side lengths (numerically stable Kahan
/// form of Heron's formula).
pub fn triangle_area(a: f64, b: f64, c: f64) -> Result<f64> {
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let [a, b, c] = s;
    if c <= 0.0 || a >= b + c {
        return Err(Error::Generation(format!(
            "triangle inequality violated: sides {a}, {b}, {c}"
        )));
    }
    let t = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    Ok(0.25 * t.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn right_triangle_metric() {
        // legs 3, 4, hypotenuse 5
        let len2 = |i: usize, j: usize| -> f64 {
            match (i.min(j), i.max(j)) {
                (0, 1) => 9.0,
                (0, 2) => 16.0,
                (1, 2) => 25.0,
                _ => unreachable!(),
            }
        };
        let m = SimplexMetric::from_edge_lengths(2, len2).unwrap();
        assert_relative_eq!(m.volume, 6.0, epsilon = 1e-12);
        assert_relative_eq!(triangle_area(3.0, 4.0, 5.0).unwrap(), 6.0, epsilon = 1e-12);
        // embed at (0,0), (3,0), (0,4): ∇λ1 = (1/3, 0), ∇λ2 = (0, 1/4)
        assert_relative_eq!(m.grad_gram[(1, 1)], 1.0 / 9.0, epsilon = 1e-12);
        assert_relative_eq!(m.grad_gram[(2, 2)], 1.0 / 16.0, epsilon = 1e-12);
        assert_relative_eq!(m.grad_gram[(1, 2)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn whitney_mass_p0_matches_p1_mass_matrix() {
        let len2 = |i: usize, j: usize| -> f64 {
            match (i.min(j), i.max(j)) {
                (0, 1) => 1.0,
                (0, 2) => 1.0,
                (1, 2) => 1.0,
                _ => unreachable!(),
            }
        };
        let m = SimplexMetric::from_edge_lengths(2, len2).unwrap();
        let mass0 = m.whitney_mass(0);
        // classical P1 mass matrix: Vol/12 * (1 + δ)
        for i in 0..3 {
            for j in 0..3 {
                let expect = m.volume / 12.0 * if i == j { 2.0 } else { 1.0 };
                assert_relative_eq!(mass0[(i, j)], expect, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn whitney_mass_top_degree_is_inverse_volume() {
        let len2 = |i: usize, j: usize| -> f64 {
            match (i.min(j), i.max(j)) {
                (0, 1) => 4.0,
                (0, 2) => 9.0,
                (1, 2) => 5.0,
                _ => unreachable!(),
            }
        };
        let m = SimplexMetric::from_edge_lengths(2, len2).unwrap();
        let mass2 = m.whitney_mass(2);
        assert_eq!(mass2.nrows(), 1);
        assert_relative_eq!(mass2[(0, 0)], 1.0 / m.volume, epsilon = 1e-12);
    }

    #[test]
    fn whitney_mass_p1_against_quadrature() {
        // generic triangle, compare against midpoint quadrature (exact for
        // quadratic integrands) in an explicit embedding
        let va = [0.0, 0.0];
        let vb = [1.3, 0.0];
        let vc = [0.4, 0.9];
        let d2 = |p: [f64; 2], q: [f64; 2]| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
        let pts = [va, vb, vc];
        let len2 = |i: usize, j: usize| d2(pts[i], pts[j]);
        let m = SimplexMetric::from_edge_lengths(2, len2).unwrap();
        let mass1 = m.whitney_mass(1);

        // explicit gradients
        let area = triangle_area(len2(0, 1).sqrt(), len2(0, 2).sqrt(), len2(1, 2).sqrt()).unwrap();
        let grad = |i: usize| -> [f64; 2] {
            // ∇λ_i = rot(opposite edge)/2A
            let (p, q) = match i {
                0 => (vb, vc),
                1 => (vc, va),
                _ => (va, vb),
            };
            [(p[1] - q[1]) / (2.0 * area), (q[0] - p[0]) / (2.0 * area)]
        };
        let lam = |i: usize, x: [f64; 2]| -> f64 {
            let g = grad(i);
            let v0 = pts[i];
            1.0 + g[0] * (x[0] - v0[0]) + g[1] * (x[1] - v0[1])
        };
        let whitney = |e: (usize, usize), x: [f64; 2]| -> [f64; 2] {
            let (a, b) = e;
            let (ga, gb) = (grad(a), grad(b));
            let (la, lb) = (lam(a, x), lam(b, x));
            [la * gb[0] - lb * ga[0], la * gb[1] - lb * ga[1]]
        };
        let edges = [(0, 1), (0, 2), (1, 2)];
        let mids = [
            [(va[0] + vb[0]) / 2.0, (va[1] + vb[1]) / 2.0],
            [(va[0] + vc[0]) / 2.0, (va[1] + vc[1]) / 2.0],
            [(vb[0] + vc[0]) / 2.0, (vb[1] + vc[1]) / 2.0],
        ];
        for (ei, &e) in edges.iter().enumerate() {
            for (fj, &f) in edges.iter().enumerate() {
                let mut acc = 0.0;
                for mp in mids {
                    let we = whitney(e, mp);
                    let wf = whitney(f, mp);
                    acc += (we[0] * wf[0] + we[1] * wf[1]) * area / 3.0;
                }
                assert_relative_eq!(mass1[(ei, fj)], acc, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn whitney_mass_on_tetrahedron_against_quadrature() {
        // generic tet, degree-2 exact 4-point rule in an explicit embedding
        let pts = [
            [0.0, 0.0, 0.0],
            [1.1, 0.0, 0.0],
            [0.3, 0.9, 0.0],
            [0.2, 0.3, 0.8],
        ];
        let d2 = |p: [f64; 3], q: [f64; 3]| -> f64 {
            (0..3).map(|i| (p[i] - q[i]).powi(2)).sum()
        };
        let len2 = |i: usize, j: usize| d2(pts[i], pts[j]);
        let m = SimplexMetric::from_edge_lengths(3, len2).unwrap();

        // explicit barycentric gradients from the embedding
        let e = nalgebra::Matrix3::from_columns(&[
            nalgebra::Vector3::new(pts[1][0], pts[1][1], pts[1][2]),
            nalgebra::Vector3::new(pts[2][0], pts[2][1], pts[2][2]),
            nalgebra::Vector3::new(pts[3][0], pts[3][1], pts[3][2]),
        ]);
        let einv = e.try_inverse().unwrap();
        let grads: Vec<nalgebra::Vector3<f64>> = {
            let mut g: Vec<nalgebra::Vector3<f64>> =
                (0..3).map(|i| einv.row(i).transpose()).collect();
            let g0 = -(g[0] + g[1] + g[2]);
            g.insert(0, g0);
            g
        };
        let lam = |i: usize, x: &nalgebra::Vector3<f64>| -> f64 {
            if i == 0 {
                1.0 - grads[1].dot(x) - grads[2].dot(x) - grads[3].dot(x)
            } else {
                grads[i].dot(x)
            }
        };
        // degree-2 exact rule: 4 points at (α, β, β, β) permutations
        let alpha = (5.0 + 3.0 * 5f64.sqrt()) / 20.0;
        let beta = (5.0 - 5f64.sqrt()) / 20.0;
        let nodes: Vec<nalgebra::Vector3<f64>> = (0..4)
            .map(|k| {
                let mut bary = [beta; 4];
                bary[k] = alpha;
                let mut x = nalgebra::Vector3::zeros();
                for (i, p) in pts.iter().enumerate() {
                    x += bary[i] * nalgebra::Vector3::new(p[0], p[1], p[2]);
                }
                x
            })
            .collect();
        let whitney = |a: usize, b: usize, x: &nalgebra::Vector3<f64>| -> nalgebra::Vector3<f64> {
            lam(a, x) * grads[b] - lam(b, x) * grads[a]
        };
        let edges = subsets(4, 2);
        let mass1 = m.whitney_mass(1);
        for (ei, ea) in edges.iter().enumerate() {
            for (fj, eb) in edges.iter().enumerate() {
                let mut acc = 0.0;
                for x in &nodes {
                    let wa = whitney(ea[0], ea[1], x);
                    let wb = whitney(eb[0], eb[1], x);
                    acc += wa.dot(&wb) * m.volume / 4.0;
                }
                assert_relative_eq!(mass1[(ei, fj)], acc, epsilon = 1e-12, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn wedge_pairing_on_unit_interval_and_triangle() {
        // 1-simplex: ∫ W_v ∧ W_{01} = ∫ λ_v · (1/ℓ) ds = 1/2
        let m = SimplexMetric::from_edge_lengths(1, |_, _| 4.0).unwrap();
        let w = m.whitney_wedge(0);
        assert_eq!(w.nrows(), 2);
        assert_relative_eq!(w[(0, 0)], 0.5, epsilon = 1e-14);
        assert_relative_eq!(w[(1, 0)], 0.5, epsilon = 1e-14);

        // 2-simplex, p = 1 against q = 1: ∫ W_{01} ∧ W_{02} = 1/6
        let t = SimplexMetric::from_edge_lengths(2, |i, j| {
            match (i.min(j), i.max(j)) {
                (0, 1) => 1.0,
                (0, 2) => 1.0,
                (1, 2) => 1.5,
                _ => unreachable!(),
            }
        })
        .unwrap();
        let w1 = t.whitney_wedge(1);
        // order of 1-faces: [01], [02], [12]
        assert_relative_eq!(w1[(0, 1)], 1.0 / 6.0, epsilon = 1e-13);
        assert_relative_eq!(w1[(1, 0)], -1.0 / 6.0, epsilon = 1e-13);
        assert_relative_eq!(w1[(0, 0)], 0.0, epsilon = 1e-13);
        // p=0 vs q=2 on the triangle: ∫ λ_v · W_T = 1/3
        let w0 = t.whitney_wedge(0);
        for i in 0..3 {
            assert_relative_eq!(w0[(i, 0)], 1.0 / 3.0, epsilon = 1e-13);
        }
    }
}
