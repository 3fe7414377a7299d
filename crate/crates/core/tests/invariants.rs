//! Property-based invariants over randomized fixtures and inputs.

use mwce_core::complex::generators::{generate_model, ModelSpec};
use mwce_core::complex::meshio::{read_mesh, write_mesh};
use mwce_core::complex::CylinderSpec;
use mwce_core::dec::hodge_pairing;
use mwce_core::modes::{mat2_mul, mat2_sub_identity_norm, s_matrix, PiecewiseCylinderModel};
use mwce_core::{attach_cylinder, Cochain};
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// i* ∘ d = d' ∘ i* exactly at the cochain level.
    #[test]
    fn restriction_commutes_with_d(
        len in 0.5f64..3.0,
        circ in 0.5f64..2.0,
        res in 6usize..14,
        seed in any::<u64>(),
    ) {
        let (m, _) = generate_model(
            &ModelSpec::FlatCylinder { length: len, circumference: circ }, res,
        ).unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let omega = Cochain {
            complex_id: m.id(),
            degree: 0,
            values: (0..m.cell_count(0)).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        };
        let d_omega = Cochain {
            complex_id: m.id(),
            degree: 1,
            values: m.coboundary(0).unwrap().to_f64().apply(&omega.values),
        };
        let lhs = m.restrict_to_boundary(&d_omega).unwrap();
        let tr = m.restrict_to_boundary(&omega).unwrap();
        let y = &m.boundary_structure().unwrap().complex;
        let rhs = y.coboundary(0).unwrap().to_f64().apply(&tr.values);
        for (a, b) in lhs.values.iter().zip(&rhs) {
            prop_assert!((a - b).abs() <= 1e-13);
        }
    }

    /// Vol(M_a) = Vol(M) + a·Vol(Y) under cylinder attachment.
    #[test]
    fn attach_volume_additivity(
        len in 0.5f64..2.0,
        a in 0.1f64..2.0,
        res in 6usize..12,
    ) {
        let (m, _) = generate_model(
            &ModelSpec::FlatCylinder { length: len, circumference: 1.0 }, res,
        ).unwrap();
        let layers = ((a * res as f64).ceil() as usize).max(1);
        let ma = attach_cylinder(&m, &CylinderSpec::new(a, layers)).unwrap();
        let expect = m.volume() + a * m.boundary_volume();
        prop_assert!((ma.volume() - expect).abs() <= 1e-10 * expect);
    }

    /// Wedge pairing antisymmetry: ∫ α∧β = (−1)^{p(n−1−p)} ∫ β∧α.
    #[test]
    fn pairing_antisymmetry_on_circles(
        res in 6usize..16,
        seed in any::<u64>(),
    ) {
        let (m, _) = generate_model(
            &ModelSpec::FlatCylinder { length: 1.0, circumference: 1.0 }, res,
        ).unwrap();
        let y = &m.boundary_structure().unwrap().complex;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let alpha = Cochain {
            complex_id: y.id(),
            degree: 0,
            values: (0..y.cell_count(0)).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        };
        let beta = Cochain {
            complex_id: y.id(),
            degree: 1,
            values: (0..y.cell_count(1)).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        };
        let ab = hodge_pairing(y, &alpha, &beta).unwrap();
        let ba = hodge_pairing(y, &beta, &alpha).unwrap();
        // p(n−1−p) = 0 on circles: symmetric
        prop_assert!((ab - ba).abs() <= 1e-12 * ab.abs().max(1.0));
    }

    /// Mesh files round-trip: counts, volumes and collar metadata survive.
    #[test]
    fn mesh_roundtrip(
        len in 0.5f64..2.0,
        circ in 0.5f64..2.0,
        res in 6usize..12,
    ) {
        let (m, _) = generate_model(
            &ModelSpec::FlatCylinder { length: len, circumference: circ }, res,
        ).unwrap();
        let mut buf = Vec::new();
        write_mesh(&m, &mut buf).unwrap();
        let m2 = read_mesh(std::io::Cursor::new(&buf)).unwrap();
        prop_assert_eq!(m2.cell_count(0), m.cell_count(0));
        prop_assert_eq!(m2.cell_count(1), m.cell_count(1));
        prop_assert_eq!(m2.cell_count(2), m.cell_count(2));
        prop_assert!((m2.volume() - m.volume()).abs() <= 1e-12);
        prop_assert_eq!(m2.collar().unwrap().layers, m.collar().unwrap().layers);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Unitarity and S(λ)S(−λ) = 1 for random chains at random energies.
    #[test]
    fn s_matrix_functional_equations(
        nseg in 1usize..5,
        lam in 0.05f64..5.0,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let segments: Vec<(f64, f64)> = (0..nseg)
            .map(|_| (rng.gen_range(0.1..2.0), rng.gen_range(0.2..4.0)))
            .collect();
        let model = PiecewiseCylinderModel::new(segments, 0.0).unwrap();
        let sp = s_matrix(&model, Complex64::new(lam, 0.0)).unwrap();
        prop_assert!(sp.unitarity_defect() <= 1e-11);
        let sn = s_matrix(&model, Complex64::new(-lam, 0.0)).unwrap();
        let prod = mat2_mul(&sp.s, &sn.s);
        prop_assert!(mat2_sub_identity_norm(&prod) <= 1e-11);
    }
}
