use pencilkit_core::dense::{c, re, Matrix};
use pencilkit_core::harness::{
    builtin_suite, compare_problem, generate_problem, hungarian, matching_distance, oracle_reference, pair_eigenvalues, Layout,
    Method, Outcome, ProblemSpec, Suite,
};
use pencilkit_core::{chordal_distance, HomogeneousPoint, MatrixPolynomial};
use proptest::prelude::*;

fn brute_force_min(cost: &[f64], n: usize) -> f64 {
    fn go(row: usize, used: &mut Vec<bool>, cost: &[f64], n: usize, acc: f64, best: &mut f64) {
        if row == n {
            *best = best.min(acc);
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                go(row + 1, used, cost, n, acc + cost[row * n + j], best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(0, &mut vec![false; n], cost, n, 0.0, &mut best);
    best
}

proptest! {
    #[test]
    fn hungarian_matches_brute_force(n in 1usize..7, raw in proptest::collection::vec(0.0..10.0f64, 36)) {
        let cost = &raw[..n * n];
        let assign = hungarian(cost, n);
        let mut seen = assign.clone();
        seen.sort();
        prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
        let total: f64 = assign.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
        prop_assert!((total - brute_force_min(cost, n)).abs() < 1e-9);
    }

    #[test]
    fn pairing_recovers_a_permutation(seed in 0u64..1000, n in 1usize..7) {
        let pts: Vec<_> = (0..n)
            .map(|k| HomogeneousPoint::from_affine(c((seed as f64 + k as f64 * 1.7).sin(), k as f64)))
            .collect();
        let mut shuffled = pts.clone();
        shuffled.rotate_left(seed as usize % n);
        let assign = pair_eigenvalues(&shuffled, &pts).unwrap();
        for (i, &k) in assign.iter().enumerate() {
            prop_assert!(chordal_distance(&pts[i], &shuffled[k]) < 1e-15);
        }
    }
}

#[test]
fn scalar_quadratic_roots() {
    let a = MatrixPolynomial::scalar(&[re(5.0), re(3.0), re(2.0)]).unwrap();
    let r = oracle_reference(&a).unwrap();
    let s = 31f64.sqrt() / 4.0;
    let exact = [HomogeneousPoint::from_affine(c(-0.75, s)), HomogeneousPoint::from_affine(c(-0.75, -s))];
    assert!(matching_distance(&r, &exact).unwrap() < 1e-14);
}

#[test]
fn scalar_times_identity_has_double_eigenvalue() {
    let i2 = Matrix::identity(2);
    let a = MatrixPolynomial::new(vec![-&i2, i2]).unwrap();
    let r = oracle_reference(&a).unwrap();
    assert_eq!(r.len(), 2);
    let one = HomogeneousPoint::from_affine(re(1.0));
    assert!(r.iter().all(|p| chordal_distance(p, &one) < 1e-14));
}

#[test]
fn rank_deficient_leading_coefficient_gives_one_infinite_eigenvalue() {
    let a = MatrixPolynomial::new(vec![
        Matrix::from_real_rows(&[&[2.0, -1.0], &[0.3, 1.0]]),
        Matrix::from_real_rows(&[&[0.5, 0.0], &[1.0, -1.0]]),
        Matrix::from_real_rows(&[&[1.0, 2.0], &[0.5, 1.0]]),
    ])
    .unwrap();
    let r = oracle_reference(&a).unwrap();
    assert_eq!(r.len(), 4);
    let inf = r.iter().filter(|p| chordal_distance(p, &HomogeneousPoint::infinity()) < 1e-12).count();
    assert_eq!(inf, 1);
}

#[test]
fn prescribed_integer_spectrum_is_recovered() {
    let eigs: Vec<_> = (1..=8).map(|k| re(k as f64)).collect();
    let spec = ProblemSpec {
        name: "ints".into(),
        n: 4,
        d: 2,
        layout: Layout::PrescribedSpectrum { eigenvalues: eigs.clone() },
        seed: 99,
        scaling: false,
    };
    let p = generate_problem(&spec).unwrap();
    let exact: Vec<_> = eigs.into_iter().map(HomogeneousPoint::from_affine).collect();
    assert!(matching_distance(&p.reference, &exact).unwrap() < 1e-9);
    let table = compare_problem(&p, &Method::ALL);
    for row in &table.rows {
        for o in &row.outcomes {
            assert!(matches!(o, Outcome::Error(e) if *e <= 1e-8), "{o:?}");
        }
    }
}

#[test]
fn degenerate_problems_skip_dl_methods() {
    let specs = builtin_suite(Suite::Degenerate, 3, true);
    let p = generate_problem(&specs[0]).unwrap();
    assert!(!p.admits_dl());
    let t = compare_problem(&p, &Method::ALL);
    for row in &t.rows {
        assert!(matches!(row.outcomes[0], Outcome::Error(_)));
        assert!(matches!(row.outcomes[1], Outcome::Error(_)));
        assert!(row.outcomes[2..].iter().all(|o| *o == Outcome::Skipped));
    }
}

#[test]
fn hmt_switch_follows_the_rule() {
    let specs = builtin_suite(Suite::Default, 1, true);
    let p = generate_problem(&specs[2]).unwrap();
    let t = compare_problem(&p, &[Method::DlE1, Method::DlEd, Method::HmtSwitch]);
    for row in &t.rows {
        let hmt = row.outcomes[2];
        assert!(hmt == row.outcomes[0] || hmt == row.outcomes[1]);
    }
}
