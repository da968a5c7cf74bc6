use std::f64::consts::PI;

use hankelscope::coeff_map::{build_map_matrix, p_to_q, q_to_p, QuasiCarlemanKernel};
use hankelscope::delta_spectra::{delta_spectrum, DeltaKernel};
use hankelscope::discretization::{build_a_matrix, build_hankel_matrix, eigen_sym};
use hankelscope::polynomials::{is_nonnegative_on_reals, RealPolynomial};
use hankelscope::special_functions::gamma_half_phase;
use hankelscope::transforms::{inverse_mellin, mellin, v_eval, Domain, GridFunction, LogGrid};
use hankelscope::Complex64;
use proptest::prelude::*;

fn poly(max_degree: usize) -> impl Strategy<Value = RealPolynomial> {
    (0..=max_degree)
        .prop_flat_map(|d| (prop::collection::vec(-2.0..2.0f64, d), 0.1..2.0f64, any::<bool>()))
        .prop_map(|(mut c, lead, neg)| {
            c.push(if neg { -lead } else { lead });
            RealPolynomial::new(c)
        })
}

proptest! {
    #[test]
    fn map_roundtrip(p in poly(8)) {
        let back = q_to_p(&p_to_q(&p).unwrap()).unwrap();
        prop_assert_eq!(back.degree(), p.degree());
        for (a, b) in p.coeffs().iter().zip(back.coeffs()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn map_is_linear(a in poly(6), b in poly(6), s in -3.0..3.0f64) {
        let sum = &a.scale(s) + &b;
        prop_assume!(!sum.is_zero());
        let lhs = p_to_q(&sum).unwrap();
        let qa = p_to_q(&a).unwrap().scale(s);
        let rhs = &qa + &p_to_q(&b).unwrap();
        for k in 0..=lhs.degree().max(rhs.degree()) {
            let x = lhs.coeffs().get(k).copied().unwrap_or(0.0);
            let y = rhs.coeffs().get(k).copied().unwrap_or(0.0);
            prop_assert!((x - y).abs() < 1e-11 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn map_preserves_degree_and_leading(p in poly(10)) {
        let q = p_to_q(&p).unwrap();
        prop_assert_eq!(q.degree(), p.degree());
        prop_assert_eq!(q.leading(), p.leading());
        let m = build_map_matrix(p.degree()).unwrap();
        for k in 0..=p.degree() {
            prop_assert_eq!(m.entry(k, k), 1.0);
        }
    }

    #[test]
    fn weight_is_even_positive_and_bounded(xi in -300.0..300.0f64) {
        let v = v_eval(xi);
        prop_assert_eq!(v, v_eval(-xi));
        prop_assert!(v > 0.0 && v <= PI.sqrt());
        prop_assert!(v <= (2.0 * PI).sqrt() * (-PI * xi.abs() / 2.0).exp() * (1.0 + 1e-13));
    }

    #[test]
    fn gamma_phase_has_unit_modulus(xi in -500.0..500.0f64) {
        let z = gamma_half_phase(xi);
        prop_assert!((z.norm() - 1.0).abs() < 1e-13);
        prop_assert!((gamma_half_phase(-xi) - z.conj()).norm() < 1e-12);
    }

    #[test]
    fn mellin_is_unitary(
        centres in prop::collection::vec(-4.0..4.0f64, 1..4),
        widths in prop::collection::vec(0.3..2.0f64, 3),
        freq in 0.0..5.0f64,
    ) {
        let grid = LogGrid::new(12.0, 512).unwrap();
        let u = GridFunction::from_fn(grid, Domain::Log, |x| {
            centres.iter().zip(&widths).map(|(c, w)| {
                let g = (-(x - c).powi(2) / (2.0 * w * w)).exp();
                Complex64::new(g * (freq * x).cos(), g * (freq * x).sin() * 0.5)
            }).sum()
        });
        let g = mellin(&u).unwrap();
        prop_assert!((g.norm() - u.norm()).abs() < 1e-10 * u.norm());
        let back = inverse_mellin(&g).unwrap();
        for (a, b) in back.values().iter().zip(u.values()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn shifted_square_plus_constant(a in -5.0..5.0f64, b in -3.0..3.0f64) {
        // (x − a)² + b is nonnegative exactly when b ≥ 0.
        let p = RealPolynomial::new(vec![a * a + b, -2.0 * a, 1.0]);
        prop_assume!(b.abs() > 1e-9);
        prop_assert_eq!(is_nonnegative_on_reals(&p).unwrap().nonnegative, b > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn assembled_matrices_are_symmetric(p in poly(3)) {
        let grid = LogGrid::new(6.0, 64).unwrap();
        let h = build_hankel_matrix(&QuasiCarlemanKernel::new(p.clone()).unwrap(), &grid).unwrap();
        prop_assert_eq!(h.matrix.asymmetry(), 0.0);
        let a = build_a_matrix(&p_to_q(&p).unwrap(), &grid).unwrap();
        prop_assert!(a.matrix.asymmetry() <= 1e-12 * a.matrix.max_abs());
    }

    #[test]
    fn hankel_eigenvalues_scale_with_kernel(p in poly(2), c in 0.1..4.0f64) {
        let grid = LogGrid::new(6.0, 64).unwrap();
        let r1 = eigen_sym(&build_hankel_matrix(&QuasiCarlemanKernel::new(p.clone()).unwrap(), &grid).unwrap()).unwrap();
        let r2 = eigen_sym(&build_hankel_matrix(&QuasiCarlemanKernel::new(p.scale(c)).unwrap(), &grid).unwrap()).unwrap();
        let top = r2.max_abs_eigenvalue();
        for (x, y) in r1.eigenvalues.iter().zip(&r2.eigenvalues) {
            prop_assert!((c * x - y).abs() < 1e-12 * top);
        }
    }

    #[test]
    fn delta_eigenvalues_scale_with_kernel(h0 in -1.0..1.0f64, h1 in 0.2..2.0f64, c in 0.1..5.0f64) {
        let k = DeltaKernel::new(vec![h0, h1], 1.0).unwrap();
        let a = delta_spectrum(&k, 48, 8).unwrap();
        let b = delta_spectrum(&k.scaled(c).unwrap(), 48, 8).unwrap();
        for (x, y) in a.positive.iter().zip(&b.positive).chain(a.negative.iter().zip(&b.negative)) {
            prop_assert!((c * x - y).abs() < 1e-9 * y.abs());
        }
    }
}
