use pencilkit_core::dense::{c, re, Matrix, C64};
use pencilkit_core::duality::{left_dual_qr, right_dual_qr, verify_dual};
use pencilkit_core::eigen::solve_pencil;
use pencilkit_core::harness::matching_distance;
use pencilkit_core::linearize::{companion_second_form, w_linearization, AnnihilatorMode};
use pencilkit_core::{chordal_distance, scale_fan_lin_van_dooren, HomogeneousEval, HomogeneousPoint, MatrixPolynomial, Pencil};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, k: usize) -> Matrix {
    Matrix::from_fn(r, k, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn random_poly(seed: u64, n: usize, d: usize) -> MatrixPolynomial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MatrixPolynomial::new((0..=d).map(|_| random_matrix(&mut rng, n, n)).collect()).unwrap()
}

fn point() -> impl Strategy<Value = HomogeneousPoint> {
    (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64)
        .prop_filter("nonzero", |(a, b, x, y)| a.abs() + b.abs() + x.abs() + y.abs() > 1e-3)
        .prop_map(|(a, b, x, y)| HomogeneousPoint::new(c(a, b), c(x, y)))
}

fn rel_diff(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).norm_fro() / a.norm_fro().max(b.norm_fro()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pencil_eval_is_mu_p0_minus_lambda_p1(seed in any::<u64>(), n in 1usize..5, pt in point()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = Pencil::new(random_matrix(&mut rng, n, n), random_matrix(&mut rng, n, n)).unwrap();
        let expect = &p.p0().scale(pt.mu()) - &p.p1().scale(pt.lambda());
        prop_assert!(rel_diff(&p.eval_at(&pt), &expect) < 1e-14);
    }

    #[test]
    fn rev_is_an_involution_swapping_arguments(seed in any::<u64>(), n in 1usize..4, d in 1usize..5, pt in point()) {
        let a = random_poly(seed, n, d);
        prop_assert_eq!(a.rev().rev(), a.clone());
        let lhs = a.rev().eval(pt.lambda(), pt.mu());
        let rhs = a.eval(pt.mu(), pt.lambda());
        prop_assert!(rel_diff(&lhs, &rhs) < 1e-13);
    }

    #[test]
    fn chordal_distance_is_a_metric(p in point(), q in point(), r in point(), s in -2.0..2.0f64, t in -2.0..2.0f64) {
        let dpq = chordal_distance(&p, &q);
        prop_assert!((0.0..=core::f64::consts::FRAC_PI_2 + 1e-15).contains(&dpq));
        prop_assert!((dpq - chordal_distance(&q, &p)).abs() < 1e-15);
        prop_assert!(chordal_distance(&p, &p) < 1e-7);
        prop_assert!(dpq <= chordal_distance(&p, &r) + chordal_distance(&r, &q) + 1e-12);
        // Invariant under rescaling a representative.
        let k = C64::from_polar(1.0 + s.abs(), t);
        let pk = HomogeneousPoint::new(p.lambda() * k, p.mu() * k);
        prop_assert!((chordal_distance(&pk, &q) - dpq).abs() < 1e-12);
    }

    #[test]
    fn scaling_commutes_with_eigenvalues(seed in any::<u64>(), n in 1usize..4, mag in -3.0..3.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = 10f64.powf(mag);
        let a = MatrixPolynomial::new(vec![
            random_matrix(&mut rng, n, n).scale(re(s)),
            random_matrix(&mut rng, n, n),
            random_matrix(&mut rng, n, n).scale(re(1.0 / s)),
        ]).unwrap();
        let (scaled, report) = scale_fan_lin_van_dooren(&a).unwrap();
        let direct = solve_pencil(&companion_second_form(&a).unwrap()).unwrap().eigenvalues();
        let back: Vec<_> = solve_pencil(&companion_second_form(&scaled).unwrap())
            .unwrap()
            .eigenvalues()
            .iter()
            .map(|p| report.unscale(p))
            .collect();
        prop_assert!(matching_distance(&direct, &back).unwrap() < 1e-7);
    }

    #[test]
    fn qr_duals_satisfy_the_commutation(seed in any::<u64>(), n in 1usize..4, d in 2usize..4) {
        let a = random_poly(seed, n, d);
        let l = companion_second_form(&a).unwrap();
        let m = left_dual_qr(&l).unwrap();
        let cert = verify_dual(&m, &l).unwrap();
        prop_assert!(cert.verdict.is_left(), "{:?}", cert);
        let r = right_dual_qr(&l).unwrap();
        prop_assert!(verify_dual(&r, &l).unwrap().verdict.is_right());
    }

    #[test]
    fn w_pencil_is_left_dual_to_companion(seed in any::<u64>(), n in 1usize..4, d in 2usize..5) {
        let a = random_poly(seed, n, d);
        let w = w_linearization(&a, AnnihilatorMode::QrOrthonormal).unwrap();
        let l = companion_second_form(&a).unwrap();
        prop_assert!(verify_dual(&w.pencil, &l).unwrap().verdict.is_left());
    }
}
