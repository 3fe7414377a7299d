//! Three-dimensional exercise: the solid torus D × S¹. Runs the whole
//! pipeline in n = 3 — topology, harmonic spaces, the zero-energy
//! involution, the q(a) extrapolation and the geometric sandwich — with
//! structural assertions and flagged bound checks (no closed-form target
//! for t here; the bounds do the judging).

use mwce_core::bounds::{
    stable_norm_mincut_relative, stable_norm_shortest_cycle, torus_sandwich,
};
use mwce_core::complex::generators::solid_torus;
use mwce_core::complex::CylinderSpec;
use mwce_core::dec::{boundary_spectrum, MetricOps, Tolerances};
use mwce_core::homology::{betti_numbers, boundary_betti_numbers, Flavor};
use mwce_core::les::exactness_audit;
use mwce_core::scatlen::{complete_t0, extrapolate_t0, q_sample};

const SEED: u64 = 0x70f0;

#[test]
fn solid_torus_pipeline() {
    let tol = Tolerances::default();
    let core_length = 2.0;
    let (m, rep, classes) = solid_torus(core_length, 0.5, 8, 8).unwrap();

    // topology: solid torus M, boundary T²
    assert_eq!(m.dim(), 3);
    assert_eq!(m.euler_characteristic(), 0);
    assert_eq!(betti_numbers(&m, Flavor::Absolute).unwrap(), vec![1, 1, 0, 0]);
    assert_eq!(betti_numbers(&m, Flavor::Relative).unwrap(), vec![0, 0, 1, 1]);
    assert_eq!(boundary_betti_numbers(&m).unwrap(), vec![1, 2, 1]);
    // exact product volume
    assert!((rep.volume.discrete - rep.volume.nominal).abs() < 1e-10 * rep.volume.nominal);

    // chain complex closes in three dimensions
    for p in 2..=3 {
        let b1 = m.boundary_matrix(p - 1).unwrap();
        let b2 = m.boundary_matrix(p).unwrap();
        assert_eq!(b1.mul(&b2).nnz(), 0);
    }

    let ops = MetricOps::assemble(&m).unwrap();
    let audit = exactness_audit(&m, &ops, SEED, &tol).unwrap();
    assert!(audit.exact, "three-dimensional long exact sequence audit");

    // zero-energy scattering in the middle degree: star is antisymmetric on
    // H¹(T²) and S(0) has a one-dimensional +1 eigenspace (the core class)
    let sc = mwce_core::les::s_zero(&m, &ops, 1, SEED, &tol).unwrap();
    assert_eq!(sc.y_basis_p.dim(), 2);
    assert_eq!(sc.frame_plus_p.ncols(), 1);
    let s2 = &sc.s0_p * &sc.s0_p;
    assert!((s2 - nalgebra::DMatrix::<f64>::identity(2, 2)).norm() < 1e-12);
    assert!(
        (sc.star_raw[(0, 0)]).abs() < 1e-9 && (sc.star_raw[(1, 1)]).abs() < 1e-9,
        "middle-degree star pairing must be antisymmetric: {}",
        sc.star_raw
    );

    // stable norms of the reference classes
    let (alpha, duality_ok) = stable_norm_mincut_relative(&m, &classes.meridian_cycle).unwrap();
    assert!(duality_ok);
    // the minimal transversal surface is one meridian disk copy
    let disk_area = rep.volume.discrete / core_length;
    assert!(
        (alpha.value - disk_area).abs() < 1e-9 * disk_area,
        "meridian min-cut {} vs disk area {disk_area}",
        alpha.value
    );
    let beta = stable_norm_shortest_cycle(&m, &[1], &[classes.core_tracking_cocycle.clone()])
        .unwrap();
    assert!(
        (beta.value - core_length).abs() < 1e-9 * core_length,
        "core circle length {} vs {core_length}",
        beta.value
    );

    // q(a) study in degree 1 (self-dual on T²): manual schedule with a
    // thicker layer policy than the cross-section collar
    let minus = sc.minus_eigenspace_cochains(&m.boundary_structure().unwrap().complex);
    assert_eq!(minus.len(), 1);
    let schedule = [0.75, 1.5, 2.25];
    let layers = |a: f64| ((a / 0.25).round() as usize).max(1);
    let samples: Vec<_> = schedule
        .iter()
        .map(|&a| q_sample(&m, 1, &minus, a, layers(a), SEED, &tol).unwrap())
        .collect();
    // monotonicity of q(a)
    for w in samples.windows(2) {
        assert!(w[0].q_matrix[(0, 0)] > w[1].q_matrix[(0, 0)]);
    }
    let y = &m.boundary_structure().unwrap().complex;
    let spec = boundary_spectrum(y, 1, 6, &tol).unwrap();
    let partial = extrapolate_t0(1, &samples, spec.mu1, 0.05).unwrap();
    let report = complete_t0(&sc, &partial, &partial).unwrap();
    let t = partial.t0_minus[(0, 0)];
    assert!(t > 0.0, "scattering length must be positive");
    // star symmetry forces both eigenvalues to agree
    let spread = (report.eigenvalues[1] - report.eigenvalues[0]).abs();
    assert!(spread < 0.05 * t, "T(0) eigenvalue spread {spread} on t = {t}");

    // sandwich with ℓ ratios from the boundary metric: x = core direction
    // of circumference L, y = meridian of circumference P
    let perimeter = m.boundary_component_volume(0) / core_length;
    let (l1, l2) = (
        core_length / (2.0 * std::f64::consts::PI),
        perimeter / (2.0 * std::f64::consts::PI),
    );
    let vol_star = mwce_core::bounds::effective_volume(&m, &spec).unwrap();
    let (lower, upper) = torus_sandwich(l1, l2, m.volume(), vol_star, alpha.value, beta.value);
    // the lower endpoint is tight for the flat product torus (t = 2A/P)
    assert!(
        lower <= t + 1e-9 * t && t <= upper,
        "torus sandwich: {lower} ≤ {t} ≤ {upper}"
    );
    assert!(
        (lower - t).abs() <= 1e-6 * t,
        "flat product torus saturates the lower bound: {lower} vs {t}"
    );
    println!(
        "torus: t = {t:.6}, sandwich [{lower:.6}, {upper:.6}], meridian {:.6}, core {:.6}",
        alpha.value, beta.value
    );
}

#[test]
fn solid_torus_attach_preserves_product_structure() {
    let (m, _, _) = solid_torus(1.0, 0.5, 8, 6).unwrap();
    let ma = mwce_core::attach_cylinder(&m, &CylinderSpec::new(0.5, 4)).unwrap();
    let expect = m.volume() + 0.5 * m.boundary_volume();
    assert!((ma.volume() - expect).abs() < 1e-10 * expect);
    assert!((ma.boundary_volume() - m.boundary_volume()).abs() < 1e-10);
}
