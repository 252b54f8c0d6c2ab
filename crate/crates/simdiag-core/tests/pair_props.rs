//! Randomized invariants for the pair decision: planted instances are
//! recovered with verified certificates, verdicts survive congruence,
//! argument order and pencil shifts, and rejections are corroborated by
//! brute-force search over random congruences.

mod common;

use common::{grid_sym, planted_family, random_congruence, relative_offdiag};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use simdiag_core::spectral::diagonal_inertia;
use simdiag_core::{inertia, sd_pair, Obstruction, SymMat, TolerancePolicy, Verdict};

fn tol() -> TolerancePolicy {
    TolerancePolicy::default()
}

fn grid_diag(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec((-6i32..=6).prop_map(|k| f64::from(k) * 0.5), n)
}

fn planted(n: usize, d1: &[f64], d2: &[f64], seed: u64) -> (SymMat, SymMat) {
    let fam = planted_family(n, &[d1.to_vec(), d2.to_vec()], seed);
    (fam[0].clone(), fam[1].clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn planted_pairs_are_recovered(
        n in 2usize..=6,
        seed in 0u64..1_000_000,
        d1 in grid_diag(6),
        d2 in grid_diag(6),
    ) {
        let t = tol();
        let (a, b) = planted(n, &d1[..n], &d2[..n], seed);
        let outcome = sd_pair(&a, &b, &t).unwrap();
        prop_assert_eq!(outcome.verdict, Verdict::Sd, "{:?}", outcome.obstruction);
        let cong = outcome.congruence.as_ref().unwrap();
        let im_a = cong.apply(&a).unwrap();
        let im_b = cong.apply(&b).unwrap();
        prop_assert!(relative_offdiag(&im_a) <= 1e-7);
        prop_assert!(relative_offdiag(&im_b) <= 1e-7);

        // Sylvester: recovered diagonals carry the input inertias.
        let diags = outcome.diagonals.as_ref().unwrap();
        prop_assert_eq!(diagonal_inertia(&diags[0], &t), inertia(&a, &t).unwrap());
        prop_assert_eq!(diagonal_inertia(&diags[1], &t), inertia(&b, &t).unwrap());
    }

    #[test]
    fn verdict_is_congruence_invariant_on_planted_pairs(
        n in 2usize..=5,
        seed in 0u64..1_000_000,
        seed2 in 0u64..1_000_000,
        d1 in grid_diag(5),
        d2 in grid_diag(5),
    ) {
        let t = tol();
        let (a, b) = planted(n, &d1[..n], &d2[..n], seed);
        let h = random_congruence(n, seed2.wrapping_add(17));
        let ah = SymMat::from_matrix(h.transpose() * a.matrix() * &h).unwrap();
        let bh = SymMat::from_matrix(h.transpose() * b.matrix() * &h).unwrap();
        let before = sd_pair(&a, &b, &t).unwrap();
        let after = sd_pair(&ah, &bh, &t).unwrap();
        prop_assert_eq!(before.verdict, Verdict::Sd);
        prop_assert_eq!(after.verdict, Verdict::Sd);
    }

    #[test]
    fn verdict_is_symmetric_in_argument_order(
        n in 2usize..=4,
        a in grid_sym(4),
        b in grid_sym(4),
    ) {
        let t = tol();
        let sub = |s: &SymMat| {
            SymMat::from_matrix(s.matrix().view((0, 0), (n, n)).into_owned()).unwrap()
        };
        let (a, b) = (sub(&a), sub(&b));
        let ab = sd_pair(&a, &b, &t).unwrap();
        let ba = sd_pair(&b, &a, &t).unwrap();
        prop_assert_eq!(ab.verdict, ba.verdict);
    }

    #[test]
    fn verdict_survives_pencil_shift(
        n in 2usize..=4,
        a in grid_sym(4),
        b in grid_sym(4),
    ) {
        // P diagonalizes (A, B) iff it diagonalizes (A, B + alpha A), so the
        // verdict must not move under the shift.
        let t = tol();
        let sub = |s: &SymMat| {
            SymMat::from_matrix(s.matrix().view((0, 0), (n, n)).into_owned()).unwrap()
        };
        let (a, b) = (sub(&a), sub(&b));
        let shifted = SymMat::from_matrix(b.matrix() + a.matrix() * 0.75).unwrap();
        let plain = sd_pair(&a, &b, &t).unwrap();
        let moved = sd_pair(&a, &shifted, &t).unwrap();
        prop_assert_eq!(plain.verdict, moved.verdict);
    }

    #[test]
    fn definite_pencil_implies_sd(
        n in 2usize..=6,
        seed in 0u64..1_000_000,
        a in grid_sym(6),
    ) {
        // Plant T = A + B positive definite; such a pair is always SD.
        let t = tol();
        let sub = SymMat::from_matrix(a.matrix().view((0, 0), (n, n)).into_owned()).unwrap();
        let h = random_congruence(n, seed.wrapping_add(29));
        let spd = h.transpose() * &h + DMatrix::identity(n, n) * 0.5;
        let b = SymMat::from_matrix({
            let m = spd - sub.matrix();
            (m.clone() + m.transpose()) * 0.5
        })
        .unwrap();
        let outcome = sd_pair(&sub, &b, &t).unwrap();
        prop_assert_eq!(outcome.verdict, Verdict::Sd, "{:?}", outcome.obstruction);
    }
}

#[test]
fn obstruction_kind_is_congruence_invariant() {
    let t = tol();
    let fixtures: Vec<(SymMat, SymMat, fn(&Obstruction) -> bool)> = vec![
        (
            SymMat::from_diagonal(&[1.0, -1.0]).unwrap(),
            SymMat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
            |o| matches!(o, Obstruction::NonRealEigenvalue { .. }),
        ),
        (
            SymMat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
            SymMat::from_rows(&[vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap(),
            |o| matches!(o, Obstruction::NonDiagonalizableJordan { .. }),
        ),
        (
            SymMat::from_diagonal(&[1.0, 0.0]).unwrap(),
            SymMat::from_rows(&[vec![1.0, 1.0], vec![1.0, 0.0]]).unwrap(),
            |o| matches!(o, Obstruction::B2NotZero { .. }),
        ),
    ];
    for (k, (a, b, expected)) in fixtures.iter().enumerate() {
        for trial in 0..20u64 {
            let g = random_congruence(2, 1000 + 37 * trial + k as u64);
            let ag = SymMat::from_matrix(g.transpose() * a.matrix() * &g).unwrap();
            let bg = SymMat::from_matrix(g.transpose() * b.matrix() * &g).unwrap();
            let outcome = sd_pair(&ag, &bg, &t).unwrap();
            assert_eq!(outcome.verdict, Verdict::NotSd, "fixture {k} trial {trial}");
            let obs = outcome.obstruction.as_ref().unwrap();
            assert!(expected(obs), "fixture {k} trial {trial}: {obs:?}");
        }
    }
}

#[test]
fn rejected_two_by_two_pairs_resist_brute_force() {
    // Independent check of NotSd verdicts: no random congruence gets both
    // images anywhere near diagonal.
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(424242);
    let mut rejected = 0usize;
    while rejected < 8 {
        let mut entry = || f64::from(rng.random_range(-12i32..=12)) * 0.25;
        let mut grid_sym2 = || {
            let mut m = DMatrix::zeros(2, 2);
            m[(0, 0)] = entry();
            m[(0, 1)] = entry();
            m[(1, 0)] = m[(0, 1)];
            m[(1, 1)] = entry();
            SymMat::from_matrix(m).unwrap()
        };
        let a = grid_sym2();
        let b = grid_sym2();
        let outcome = sd_pair(&a, &b, &t).unwrap();
        if outcome.verdict != Verdict::NotSd {
            continue;
        }
        // Keep only solidly rejected pairs; near-real rotations make the
        // search bound quantitatively meaningless.
        if let Some(Obstruction::NonRealEigenvalue { im, .. }) = &outcome.obstruction {
            if im.abs() < 0.05 {
                continue;
            }
        }
        rejected += 1;

        let mut best = f64::INFINITY;
        for _ in 0..20_000 {
            let p = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0f64..=1.0));
            if (p[(0, 0)] * p[(1, 1)] - p[(0, 1)] * p[(1, 0)]).abs() < 0.1 {
                continue;
            }
            let ia = SymMat::from_matrix({
                let m = p.transpose() * a.matrix() * &p;
                (m.clone() + m.transpose()) * 0.5
            })
            .unwrap();
            let ib = SymMat::from_matrix({
                let m = p.transpose() * b.matrix() * &p;
                (m.clone() + m.transpose()) * 0.5
            })
            .unwrap();
            let off = relative_offdiag(&ia).max(relative_offdiag(&ib));
            best = best.min(off);
        }
        assert!(
            best > 1e-3,
            "NotSd pair nearly diagonalized by brute force: off mass {best:.3e}"
        );
    }
}
