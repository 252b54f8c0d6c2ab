//! Shared generators for the integration suites.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use simdiag_core::SymMat;

/// Quarter-integer grid keeps every rank/cluster decision far away from the
/// tolerance bands, so randomized verdicts are reproducible.
pub fn grid() -> impl Strategy<Value = f64> {
    (-12i32..=12).prop_map(|k| f64::from(k) * 0.25)
}

pub fn grid_sym(n: usize) -> impl Strategy<Value = SymMat> {
    proptest::collection::vec(grid(), n * (n + 1) / 2).prop_map(move |vals| {
        let mut m = DMatrix::zeros(n, n);
        let mut it = vals.into_iter();
        for i in 0..n {
            for j in i..n {
                let v = it.next().unwrap();
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMat::from_matrix(m).unwrap()
    })
}

/// A mild perturbation of the identity: always well-conditioned.
pub fn random_congruence(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = DMatrix::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] += 0.3 * rng.random_range(-1.0..=1.0);
        }
    }
    g
}

pub fn planted_family(n: usize, ds: &[Vec<f64>], seed: u64) -> Vec<SymMat> {
    let g = random_congruence(n, seed);
    ds.iter()
        .map(|d| {
            let m = g.transpose()
                * DMatrix::from_diagonal(&DVector::from_vec(d[..n].to_vec()))
                * &g;
            SymMat::from_matrix((m.clone() + m.transpose()) * 0.5).unwrap()
        })
        .collect()
}

/// Diagonal seeds with a semidefinite pencil at every recursion level: seed
/// k is positive on its own coordinate window, arbitrary before it, and zero
/// after it, so each kernel subfamily again contains a semidefinite member.
/// Coordinates beyond the last window are zero in every seed.
pub fn hierarchical_seeds(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<Vec<f64>> {
    let mut cuts = vec![0usize; m + 1];
    for k in 1..=m {
        let lo = if k == 1 { 1 } else { cuts[k - 1] };
        cuts[k] = rng.random_range(lo..=n);
    }
    (0..m)
        .map(|k| {
            (0..n)
                .map(|i| {
                    if i < cuts[k] {
                        f64::from(rng.random_range(-6i32..=6)) * 0.5
                    } else if i < cuts[k + 1] {
                        f64::from(rng.random_range(1i32..=6)) * 0.5
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

pub fn relative_offdiag(s: &SymMat) -> f64 {
    s.max_offdiag() / s.fro_norm().max(1.0)
}
