//! Semi-analytic oracle: per-mode 1-D transfer-matrix scattering on
//! piecewise-cylindrical models, S(λ) below threshold, and the
//! Eisenbud–Wigner time delay T(λ) = −i S(λ)⁻¹ S′(λ) from analytic
//! λ-derivatives.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square root with the branch √(r e^{iφ}) = √r e^{iφ/2}, 0 ≤ φ < 2π.
pub fn branch_sqrt(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let mut phi = z.arg();
    if phi < 0.0 {
        phi += 2.0 * std::f64::consts::PI;
    }
    Complex64::from_polar(r.sqrt(), 0.5 * phi)
}

/// Chain of cylinder segments (length, cross-sectional weight) carrying one
/// transverse mode of eigenvalue ν. End weights are the first/last segment
/// weights.
#[derive(Debug, Clone)]
pub struct PiecewiseCylinderModel {
    pub segments: Vec<(f64, f64)>,
    pub nu: f64,
}

impl PiecewiseCylinderModel {
    pub fn new(segments: Vec<(f64, f64)>, nu: f64) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Parameter("model needs at least one segment".into()));
        }
        for &(l, w) in &segments {
            if l < 0.0 || !(w > 0.0) {
                return Err(Error::Parameter(
                    "segment lengths must be ≥ 0 and weights > 0".into(),
                ));
            }
        }
        if nu < 0.0 {
            return Err(Error::Parameter("transverse eigenvalue must be ≥ 0".into()));
        }
        Ok(PiecewiseCylinderModel { segments, nu })
    }

    pub fn w_left(&self) -> f64 {
        self.segments.first().unwrap().1
    }

    pub fn w_right(&self) -> f64 {
        self.segments.last().unwrap().1
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.0).sum()
    }
}

/// Second-order Taylor jet (value, f', f''/2) of an analytic function of λ.
#[derive(Debug, Clone, Copy)]
struct Jet {
    c0: Complex64,
    c1: Complex64,
    c2: Complex64,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl Jet {
    fn constant(v: Complex64) -> Jet {
        Jet { c0: v, c1: ZERO, c2: ZERO }
    }
    fn variable(v: Complex64) -> Jet {
        Jet { c0: v, c1: ONE, c2: ZERO }
    }
    fn add(self, o: Jet) -> Jet {
        Jet { c0: self.c0 + o.c0, c1: self.c1 + o.c1, c2: self.c2 + o.c2 }
    }
    fn sub(self, o: Jet) -> Jet {
        Jet { c0: self.c0 - o.c0, c1: self.c1 - o.c1, c2: self.c2 - o.c2 }
    }
    fn mul(self, o: Jet) -> Jet {
        Jet {
            c0: self.c0 * o.c0,
            c1: self.c0 * o.c1 + self.c1 * o.c0,
            c2: self.c0 * o.c2 + self.c1 * o.c1 + self.c2 * o.c0,
        }
    }
    fn scale(self, s: Complex64) -> Jet {
        Jet { c0: s * self.c0, c1: s * self.c1, c2: s * self.c2 }
    }
    /// Division. When both leading coefficients vanish exactly, the common
    /// zero is cancelled (losing one Taylor order, which we do not need).
    fn div(self, o: Jet) -> Result<Jet> {
        if o.c0 == ZERO {
            if self.c0 != ZERO || o.c1 == ZERO {
                return Err(Error::Numerical(
                    "singular scattering conversion (non-removable pole)".into(),
                ));
            }
            // (a1 h + a2 h²) / (b1 h + b2 h²)
            let v = self.c1 / o.c1;
            let d = (self.c2 * o.c1 - self.c1 * o.c2) / (o.c1 * o.c1);
            return Ok(Jet { c0: v, c1: d, c2: Complex64::new(f64::NAN, f64::NAN) });
        }
        let inv0 = ONE / o.c0;
        let v = self.c0 * inv0;
        let d = (self.c1 - v * o.c1) * inv0;
        let dd = (self.c2 - v * o.c2 - d * o.c1) * inv0;
        Ok(Jet { c0: v, c1: d, c2: dd })
    }
    /// Compose with an analytic scalar map given f(c0), f'(c0), f''(c0).
    fn compose(self, f: Complex64, fp: Complex64, fpp: Complex64) -> Jet {
        Jet {
            c0: f,
            c1: fp * self.c1,
            c2: fp * self.c2 + 0.5 * fpp * self.c1 * self.c1,
        }
    }
}

/// sinc-type entire functions of z = (kℓ)²: S(z) = sin√z/√z and its first
/// two derivatives, stable near z = 0.
fn sinc_family(z: Complex64) -> (Complex64, Complex64, Complex64) {
    if z.norm() < 0.25 {
        // series with plenty of margin at |z| < 0.25
        let mut s = ZERO;
        let mut s1 = ZERO;
        let mut s2 = ZERO;
        let mut coef = ONE; // (-1)^n / (2n+1)!
        let (mut z_nm2, mut z_nm1, mut z_n) = (ZERO, ZERO, ONE);
        for n in 0..12u32 {
            let nf = n as f64;
            s += coef * z_n;
            s1 += coef * nf * z_nm1;
            s2 += coef * nf * (nf - 1.0) * z_nm2;
            coef = -coef / (((2 * n + 2) * (2 * n + 3)) as f64);
            z_nm2 = z_nm1;
            z_nm1 = z_n;
            z_n *= z;
        }
        (s, s1, s2)
    } else {
        let rt = z.sqrt(); // S, C are even: any square-root branch works
        let s = rt.sin() / rt;
        let c = rt.cos();
        let s1 = (c - s) / (2.0 * z);
        let s2 = ((-0.5 * s - s1) * z - (c - s)) / (2.0 * z * z);
        (s, s1, s2)
    }
}

fn cos_family(z: Complex64) -> (Complex64, Complex64, Complex64) {
    let (s, s1, _) = sinc_family(z);
    if z.norm() < 0.25 {
        let mut c = ZERO;
        let mut term = ONE;
        let mut zn = ONE;
        for n in 0..12u32 {
            c += term * zn;
            term = -term / (((2 * n + 1) * (2 * n + 2)) as f64);
            zn *= z;
        }
        (c, -0.5 * s, -0.5 * s1)
    } else {
        let rt = z.sqrt();
        (rt.cos(), -0.5 * s, -0.5 * s1)
    }
}

/// 2×2 jet matrix.
#[derive(Clone, Copy)]
struct JetMat {
    a: [[Jet; 2]; 2],
}

impl JetMat {
    fn identity() -> JetMat {
        let z = Jet::constant(ZERO);
        let o = Jet::constant(ONE);
        JetMat { a: [[o, z], [z, o]] }
    }
    fn mul(self, o: JetMat) -> JetMat {
        let mut out = [[Jet::constant(ZERO); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] =
                    self.a[i][0].mul(o.a[0][j]).add(self.a[i][1].mul(o.a[1][j]));
            }
        }
        JetMat { a: out }
    }
}

/// Impedance transfer matrix of one segment, acting on (f, w f'), as jets
/// in λ around the evaluation point.
fn segment_matrix(l: f64, w: f64, nu: f64, lambda: Complex64) -> JetMat {
    // x = λ² − ν, z = x ℓ²
    let lam = Jet::variable(lambda);
    let x = lam.mul(lam).sub(Jet::constant(Complex64::new(nu, 0.0)));
    let z = x.scale(Complex64::new(l * l, 0.0));
    let (sv, s1, s2) = sinc_family(z.c0);
    let (cv, c1, c2) = cos_family(z.c0);
    let cos_kl = z.compose(cv, c1, c2);
    let sinc = z.compose(sv, s1, s2); // sin(kℓ)/(kℓ)
    // B = sin(kℓ)/(w k) = ℓ sinc / w;  C = −w k sin(kℓ) = −w x ℓ sinc
    let b = sinc.scale(Complex64::new(l / w, 0.0));
    let c = x.mul(sinc).scale(Complex64::new(-w * l, 0.0));
    JetMat { a: [[cos_kl, b], [c, cos_kl]] }
}

/// 2×2 complex S-matrix at one λ, in the characteristic-function (value)
/// basis, plus its analytic λ-derivative.
#[derive(Debug, Clone)]
pub struct SMatrix {
    pub lambda: Complex64,
    pub s: [[Complex64; 2]; 2],
    pub s_prime: [[Complex64; 2]; 2],
    pub w_left: f64,
    pub w_right: f64,
}

impl SMatrix {
    /// W^{1/2} S W^{-1/2}: the basis of weight-normalized unit incoming
    /// amplitudes, in which S is unitary on the real axis.
    pub fn weight_normalized(&self) -> [[Complex64; 2]; 2] {
        let w = [self.w_left, self.w_right];
        let mut out = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = self.s[i][j] * (w[i] / w[j]).sqrt();
            }
        }
        out
    }

    pub fn weight_normalized_prime(&self) -> [[Complex64; 2]; 2] {
        let w = [self.w_left, self.w_right];
        let mut out = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = self.s_prime[i][j] * (w[i] / w[j]).sqrt();
            }
        }
        out
    }

    /// ‖S*S − 1‖ in the weight-normalized basis (Frobenius).
    pub fn unitarity_defect(&self) -> f64 {
        let s = self.weight_normalized();
        let mut acc = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut v = if i == j { -ONE } else { ZERO };
                for k in 0..2 {
                    v += s[k][i].conj() * s[k][j];
                }
                acc += v.norm_sqr();
            }
        }
        acc.sqrt()
    }
}

pub fn mat2_mul(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat2_inv(a: &[[Complex64; 2]; 2]) -> Result<[[Complex64; 2]; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.norm() == 0.0 {
        return Err(Error::Numerical("singular 2×2 matrix".into()));
    }
    Ok([[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]])
}

pub fn mat2_sub_identity_norm(a: &[[Complex64; 2]; 2]) -> f64 {
    let mut acc = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let v = a[i][j] - if i == j { ONE } else { ZERO };
            acc += v.norm_sqr();
        }
    }
    acc.sqrt()
}

/// S(λ) of the model (and its λ-derivative) by interface matching: value
/// continuous, w·derivative continuous across segment joints.
pub fn s_matrix(model: &PiecewiseCylinderModel, lambda: Complex64) -> Result<SMatrix> {
    let nu = model.nu;
    // end wavenumber κ = √(λ²−ν) on the physical sheet; the jet uses dκ/dλ = λ/κ
    let kappa: Jet = if nu == 0.0 {
        Jet::variable(lambda)
    } else {
        let x = lambda * lambda - Complex64::new(nu, 0.0);
        let k0 = branch_sqrt(x);
        if k0.norm() == 0.0 {
            return Err(Error::Numerical("λ sits exactly at a threshold".into()));
        }
        let kp = lambda / k0;
        let kpp = (k0 - lambda * kp) / x; // d/dλ (λ/κ)
        Jet { c0: k0, c1: kp, c2: 0.5 * kpp }
    };

    let mut m = JetMat::identity();
    for &(l, w) in &model.segments {
        m = segment_matrix(l, w, nu, lambda).mul(m);
    }
    let (m11, m12, m21, m22) = (m.a[0][0], m.a[0][1], m.a[1][0], m.a[1][1]);
    let wl = Complex64::new(model.w_left(), 0.0);
    let wr = Complex64::new(model.w_right(), 0.0);
    let i = Complex64::new(0.0, 1.0);
    let ik = kappa.scale(i);
    let k2 = kappa.mul(kappa);

    let denom = ik
        .mul(m11.scale(wr).add(m22.scale(wl)))
        .add(k2.mul(m12).scale(wl * wr))
        .sub(m21);
    let n11 = m21
        .add(k2.mul(m12).scale(wl * wr))
        .add(ik.mul(m22.scale(wl).sub(m11.scale(wr))));
    let s11 = n11.div(denom)?;
    let s12 = ik.scale(2.0 * wr).div(denom)?;
    // S21 = M11 (1 + S11) + iκ w_L M12 (1 − S11)
    let one = Jet::constant(ONE);
    let s21 = m11.mul(one.add(s11)).add(ik.mul(m12).scale(wl).mul(one.sub(s11)));
    // S22 = S12 (M11 − iκ w_L M12) − 1
    let s22 = s12.mul(m11.sub(ik.mul(m12).scale(wl))).sub(one);

    Ok(SMatrix {
        lambda,
        s: [[s11.c0, s12.c0], [s21.c0, s22.c0]],
        s_prime: [[s11.c1, s12.c1], [s21.c1, s22.c1]],
        w_left: model.w_left(),
        w_right: model.w_right(),
    })
}

/// Eisenbud–Wigner time delay T(λ) = −i S(λ)⁻¹ S′(λ), in the value basis.
pub fn time_delay(model: &PiecewiseCylinderModel, lambda: Complex64) -> Result<[[Complex64; 2]; 2]> {
    let sm = s_matrix(model, lambda)?;
    let sinv = mat2_inv(&sm.s)?;
    let mut t = mat2_mul(&sinv, &sm.s_prime);
    for row in t.iter_mut() {
        for v in row.iter_mut() {
            *v *= -Complex64::new(0.0, 1.0);
        }
    }
    Ok(t)
}

/// Zero-energy scattering data of the constant mode: T(0) with its
/// eigenvalues split along the ±1 eigenvectors of S(0).
#[derive(Debug, Clone)]
pub struct OracleT0 {
    /// t on the +1 eigenvector of S(0) (the kernel of ∂).
    pub t1: f64,
    /// t on the −1 eigenvector.
    pub t2: f64,
    /// Weight-normalized T(0).
    pub t_normalized: [[f64; 2]; 2],
    pub s0_normalized: [[f64; 2]; 2],
}

/// T(0) on the two-dimensional constant-mode space (ν must be 0).
pub fn oracle_t0(model: &PiecewiseCylinderModel) -> Result<OracleT0> {
    if model.nu != 0.0 {
        return Err(Error::Parameter("the zero-energy oracle needs the constant mode".into()));
    }
    let sm = s_matrix(model, ZERO)?;
    let sn = sm.weight_normalized();
    let spn = sm.weight_normalized_prime();
    // S(0) real symmetric involution; T(0) = −i S(0) S'(0) real symmetric
    let mut s0 = [[0.0f64; 2]; 2];
    let mut t = [[0.0f64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            s0[i][j] = sn[i][j].re;
            let v = -Complex64::new(0.0, 1.0)
                * (Complex64::new(sn[i][0].re, 0.0) * spn[0][j]
                    + Complex64::new(sn[i][1].re, 0.0) * spn[1][j]);
            t[i][j] = v.re;
        }
    }
    // eigenvectors of the involution: ±1 spaces
    let (e_plus, _e_minus) = involution_eigvecs(&s0);
    let quad = |v: [f64; 2], m: &[[f64; 2]; 2]| -> f64 {
        v[0] * (m[0][0] * v[0] + m[0][1] * v[1]) + v[1] * (m[1][0] * v[0] + m[1][1] * v[1])
    };
    let t1 = quad(e_plus, &t);
    let e_minus = [-e_plus[1], e_plus[0]];
    let t2 = quad(e_minus, &t);
    // closed form: t1 = 2 Vol(M) / Vol(Y)
    let vol: f64 = model.segments.iter().map(|&(l, w)| l * w).sum();
    let voly = model.w_left() + model.w_right();
    let t1_expected = 2.0 * vol / voly;
    if (t1 - t1_expected).abs() > 1e-10 * t1_expected.max(1.0) {
        return Err(Error::Numerical(format!(
            "oracle self-check failed: t1 = {t1}, closed form {t1_expected}"
        )));
    }
    Ok(OracleT0 { t1, t2, t_normalized: t, s0_normalized: s0 })
}

fn involution_eigvecs(s: &[[f64; 2]; 2]) -> ([f64; 2], [f64; 2]) {
    // (S + 1)/2 projects onto the +1 eigenspace
    let p = [[0.5 * (s[0][0] + 1.0), 0.5 * s[0][1]], [0.5 * s[1][0], 0.5 * (s[1][1] + 1.0)]];
    let col = if p[0][0].hypot(p[1][0]) >= p[0][1].hypot(p[1][1]) { 0 } else { 1 };
    let v = [p[0][col], p[1][col]];
    let n = v[0].hypot(v[1]);
    let plus = [v[0] / n, v[1] / n];
    let minus = [-plus[1], plus[0]];
    (plus, minus)
}

/// Redheffer star product: S of the concatenation of two chains sharing an
/// interface (model A's right port feeding model B's left port).
pub fn redheffer_star(a: &SMatrix, b: &SMatrix) -> Result<SMatrix> {
    let d = ONE - a.s[1][1] * b.s[0][0];
    if d.norm() == 0.0 {
        return Err(Error::Numerical("singular Redheffer composition".into()));
    }
    let s11 = a.s[0][0] + a.s[0][1] * b.s[0][0] * a.s[1][0] / d;
    let s12 = a.s[0][1] * b.s[0][1] / d;
    let s21 = b.s[1][0] * a.s[1][0] / d;
    let s22 = b.s[1][1] + b.s[1][0] * a.s[1][1] * b.s[0][1] / d;
    Ok(SMatrix {
        lambda: a.lambda,
        s: [[s11, s12], [s21, s22]],
        s_prime: [[ZERO; 2]; 2],
        w_left: a.w_left,
        w_right: b.w_right,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn free_cylinder(l: f64, w: f64) -> PiecewiseCylinderModel {
        PiecewiseCylinderModel::new(vec![(l, w)], 0.0).unwrap()
    }

    #[test]
    fn free_propagation_phase() {
        let m = free_cylinder(2.0, 3.0);
        for lam in [0.3, 1.0, 2.7] {
            let sm = s_matrix(&m, Complex64::new(lam, 0.0)).unwrap();
            let expect = Complex64::new(0.0, lam * 2.0).exp();
            assert!((sm.s[0][0]).norm() < 1e-13);
            assert!((sm.s[1][1]).norm() < 1e-13);
            assert!((sm.s[0][1] - expect).norm() < 1e-12);
            assert!((sm.s[1][0] - expect).norm() < 1e-12);
            assert!(sm.unitarity_defect() < 1e-13);
        }
    }

    #[test]
    fn zero_length_junction_reflection() {
        let m = PiecewiseCylinderModel::new(vec![(0.0, 2.0), (0.0, 1.0)], 0.0).unwrap();
        let sm = s_matrix(&m, Complex64::new(0.4, 0.0)).unwrap();
        assert_relative_eq!(sm.s[0][0].re, 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(sm.s[1][0].re, 4.0 / 3.0, epsilon = 1e-12);
        assert!(sm.s[0][0].im.abs() < 1e-13);
    }

    #[test]
    fn s_zero_is_real_involution() {
        let m = PiecewiseCylinderModel::new(vec![(1.0, 2.0), (1.0, 1.0)], 0.0).unwrap();
        let sm = s_matrix(&m, ZERO).unwrap();
        let sn = sm.weight_normalized();
        for i in 0..2 {
            for j in 0..2 {
                assert!(sn[i][j].im.abs() < 1e-13);
            }
        }
        let s2 = mat2_mul(&sn, &sn);
        assert!(mat2_sub_identity_norm(&s2) < 1e-12);
    }

    #[test]
    fn time_delay_free_cylinder_is_length() {
        let m = free_cylinder(1.7, 0.5);
        for lam in [0.0, 0.6, 1.9] {
            let t = time_delay(&m, Complex64::new(lam, 0.0)).unwrap();
            assert!((t[0][0] - Complex64::new(1.7, 0.0)).norm() < 1e-11);
            assert!((t[1][1] - Complex64::new(1.7, 0.0)).norm() < 1e-11);
            assert!(t[0][1].norm() < 1e-11);
        }
    }

    #[test]
    fn oracle_junction_values() {
        let m = PiecewiseCylinderModel::new(vec![(1.0, 2.0), (1.0, 1.0)], 0.0).unwrap();
        let t0 = oracle_t0(&m).unwrap();
        assert_relative_eq!(t0.t1, 2.0, epsilon = 1e-11);
        assert_relative_eq!(t0.t2, 2.0, epsilon = 1e-11);
    }

    #[test]
    fn weight_scaling_covariance() {
        let a = PiecewiseCylinderModel::new(vec![(0.7, 2.0), (1.3, 0.8)], 0.0).unwrap();
        let b = PiecewiseCylinderModel::new(vec![(0.7, 6.0), (1.3, 2.4)], 0.0).unwrap();
        for lam in [0.0, 0.9] {
            let sa = s_matrix(&a, Complex64::new(lam, 0.0)).unwrap();
            let sb = s_matrix(&b, Complex64::new(lam, 0.0)).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((sa.s[i][j] - sb.s[i][j]).norm() < 1e-12);
                }
            }
        }
        let ta = oracle_t0(&a).unwrap();
        let tb = oracle_t0(&b).unwrap();
        assert_relative_eq!(ta.t2, tb.t2, epsilon = 1e-11);
    }

    #[test]
    fn functional_equation_and_derivative_check() {
        let m = PiecewiseCylinderModel::new(vec![(0.5, 1.0), (0.25, 3.0), (1.0, 0.7)], 0.0)
            .unwrap();
        for lam in [0.17, 0.8, 2.3] {
            let sp = s_matrix(&m, Complex64::new(lam, 0.0)).unwrap();
            let sn = s_matrix(&m, Complex64::new(-lam, 0.0)).unwrap();
            let prod = mat2_mul(&sp.s, &sn.s);
            assert!(mat2_sub_identity_norm(&prod) < 1e-12, "S(λ)S(−λ) ≠ 1");
            assert!(sp.unitarity_defect() < 1e-12);
            // central difference vs analytic derivative
            let h = 1e-4;
            let f = s_matrix(&m, Complex64::new(lam + h, 0.0)).unwrap();
            let g = s_matrix(&m, Complex64::new(lam - h, 0.0)).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let fd = (f.s[i][j] - g.s[i][j]) / (2.0 * h);
                    assert!(
                        (fd - sp.s_prime[i][j]).norm() < 1e-6 * (1.0 + sp.s_prime[i][j].norm()),
                        "derivative mismatch at λ={lam}"
                    );
                }
            }
        }
    }

    #[test]
    fn redheffer_matches_concatenation() {
        let a = PiecewiseCylinderModel::new(vec![(0.6, 2.0), (0.4, 1.5)], 0.0).unwrap();
        let b = PiecewiseCylinderModel::new(vec![(0.9, 1.5), (0.3, 0.5)], 0.0).unwrap();
        let c = PiecewiseCylinderModel::new(
            vec![(0.6, 2.0), (0.4, 1.5), (0.9, 1.5), (0.3, 0.5)],
            0.0,
        )
        .unwrap();
        for lam in [0.21, 1.3] {
            let sa = s_matrix(&a, Complex64::new(lam, 0.0)).unwrap();
            let sb = s_matrix(&b, Complex64::new(lam, 0.0)).unwrap();
            let star = redheffer_star(&sa, &sb).unwrap();
            let sc = s_matrix(&c, Complex64::new(lam, 0.0)).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert!(
                        (star.s[i][j] - sc.s[i][j]).norm() < 1e-12,
                        "star product differs at λ={lam} ({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn above_threshold_mode_is_unitary() {
        let m = PiecewiseCylinderModel::new(vec![(1.0, 2.0), (0.5, 1.0)], 4.0).unwrap();
        // open window: λ > √ν = 2
        for lam in [2.2, 3.0] {
            let sm = s_matrix(&m, Complex64::new(lam, 0.0)).unwrap();
            assert!(sm.unitarity_defect() < 1e-12, "defect {}", sm.unitarity_defect());
        }
    }
}
