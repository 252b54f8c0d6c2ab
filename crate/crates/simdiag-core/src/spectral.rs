//! Orthogonal eigendecompositions with the rank split and eigenvalue
//! clustering used throughout the SD algorithms, plus SVD-based rank,
//! nullspace and conditioning helpers.

use crate::error::Error;
use crate::matrix::SymMat;
use crate::tol::{DecisionLog, TolerancePolicy};
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;

/// Orthogonal eigendecomposition `Q^T A Q = diag(values)` of a symmetric
/// matrix with the rank split applied: `values[..rank]` are the eigenvalues
/// judged nonzero (sorted by decreasing value), `values[rank..]` span the
/// numerical kernel.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub q: DMatrix<f64>,
    pub values: Vec<f64>,
    pub rank: usize,
}

/// Counts of positive, negative and zero eigenvalues. Congruence-invariant by
/// Sylvester's law of inertia, which makes it the cheap cross-check applied to
/// every SD certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub pos: usize,
    pub neg: usize,
    pub zero: usize,
}

/// Raw symmetric eigendecomposition, eigenvalues sorted descending, no rank
/// decision. Columns of `q` are orthonormal eigenvectors in matching order.
pub(crate) fn eigen_sorted(a: &SymMat) -> Result<(DMatrix<f64>, Vec<f64>), Error> {
    let n = a.n();
    if n == 0 {
        return Ok((DMatrix::zeros(0, 0), Vec::new()));
    }
    if n == 1 {
        return Ok((DMatrix::identity(1, 1), vec![a.matrix()[(0, 0)]]));
    }
    // Bounded iterations with a widening convergence band: an unlimited
    // sweep count can spin forever when the off-diagonal decay plateaus a
    // few ulps above the machine-epsilon test. A converged stage is only
    // trusted when everything it returns is finite.
    let mut converged = None;
    for mult in [1.0, 4.0, 32.0, 256.0] {
        let Some(e) = a
            .matrix()
            .clone()
            .try_symmetric_eigen(f64::EPSILON * mult, 100 * n)
        else {
            continue;
        };
        if e.eigenvalues.iter().all(|x| x.is_finite())
            && e.eigenvectors.iter().all(|x| x.is_finite())
        {
            converged = Some(e);
            break;
        }
    }
    let eig = converged.ok_or(Error::EigensolverFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let q = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((q, values))
}

pub(crate) fn spectral_decompose_logged(
    a: &SymMat,
    tol: &TolerancePolicy,
    log: &mut DecisionLog,
) -> Result<SpectralDecomposition, Error> {
    let (q, values) = eigen_sorted(a)?;
    let n = a.n();
    let thr = tol.rank_threshold(a.fro_norm());
    // Partition indices into nonzero (kept in descending-value order) and
    // zero, preserving relative order within each class.
    let mut nonzero: Vec<usize> = Vec::new();
    let mut zero: Vec<usize> = Vec::new();
    for i in 0..n {
        if log.is_zero("eigenvalue rank cut", values[i], thr) {
            zero.push(i);
        } else {
            nonzero.push(i);
        }
    }
    let rank = nonzero.len();
    let order: Vec<usize> = nonzero.into_iter().chain(zero).collect();
    let sorted_values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let qs = DMatrix::from_fn(n, n, |r, c| q[(r, order[c])]);
    Ok(SpectralDecomposition {
        q: qs,
        values: sorted_values,
        rank,
    })
}

/// Spectral decomposition with the rank split at `eps_rank`, relative to
/// `max(1, ||A||_F)`.
pub fn spectral_decompose(
    a: &SymMat,
    tol: &TolerancePolicy,
) -> Result<SpectralDecomposition, Error> {
    let mut log = DecisionLog::new();
    spectral_decompose_logged(a, tol, &mut log)
}

pub(crate) fn inertia_logged(
    a: &SymMat,
    tol: &TolerancePolicy,
    log: &mut DecisionLog,
) -> Result<Inertia, Error> {
    let (_, values) = eigen_sorted(a)?;
    let thr = tol.rank_threshold(a.fro_norm());
    let mut out = Inertia {
        pos: 0,
        neg: 0,
        zero: 0,
    };
    for v in values {
        if log.is_zero("inertia sign cut", v, thr) {
            out.zero += 1;
        } else if v > 0.0 {
            out.pos += 1;
        } else {
            out.neg += 1;
        }
    }
    Ok(out)
}

/// Signature (n_+, n_-, n_0) of a symmetric matrix at the policy's rank cut.
pub fn inertia(a: &SymMat, tol: &TolerancePolicy) -> Result<Inertia, Error> {
    let mut log = DecisionLog::new();
    inertia_logged(a, tol, &mut log)
}

/// Inertia of an explicit diagonal, same rank cut. Scale is the vector's
/// Euclidean norm so the decision matches `inertia` on `diag(d)`.
pub fn diagonal_inertia(d: &[f64], tol: &TolerancePolicy) -> Inertia {
    let scale = libm::sqrt(d.iter().map(|x| x * x).sum::<f64>());
    let thr = tol.rank_threshold(scale);
    let mut out = Inertia {
        pos: 0,
        neg: 0,
        zero: 0,
    };
    for &v in d {
        if v.abs() <= thr {
            out.zero += 1;
        } else if v > 0.0 {
            out.pos += 1;
        } else {
            out.neg += 1;
        }
    }
    out
}

/// One eigenvalue cluster of a symmetric matrix: consecutive (sorted)
/// eigenvalues whose gaps stay within the cluster tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    /// Mean of the member eigenvalues.
    pub value: f64,
    /// Column offset of the cluster's eigenvectors in `q`.
    pub start: usize,
    pub size: usize,
}

/// Eigendecomposition with eigenvalues sorted ascending and grouped into
/// clusters at `eps_cluster`, relative to `max(1, spectral radius)`. Used by
/// the commuting-family recursion, where the blocks of the remaining matrices
/// follow the cluster structure.
pub(crate) fn clustered_spectral(
    a: &SymMat,
    tol: &TolerancePolicy,
    log: &mut DecisionLog,
) -> Result<(DMatrix<f64>, Vec<Cluster>), Error> {
    let (q_desc, values_desc) = eigen_sorted(a)?;
    let n = a.n();
    // Ascending order reads more naturally for gap scans.
    let values: Vec<f64> = values_desc.iter().rev().copied().collect();
    let q = DMatrix::from_fn(n, n, |r, c| q_desc[(r, n - 1 - c)]);
    let radius = values
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let thr = tol.cluster_threshold(radius);
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut start = 0;
    for i in 0..n {
        let last_in_cluster = if i + 1 < n {
            let gap = values[i + 1] - values[i];
            !log.is_zero("eigenvalue cluster gap", gap, thr)
        } else {
            true
        };
        if last_in_cluster {
            let size = i + 1 - start;
            let value = values[start..=i].iter().sum::<f64>() / size as f64;
            clusters.push(Cluster { value, start, size });
            start = i + 1;
        }
    }
    Ok((q, clusters))
}

/// Singular values of `m`, descending.
pub(crate) fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>, Error> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    let svd = m
        .clone()
        .try_svd(false, false, f64::EPSILON, 0)
        .ok_or(Error::EigensolverFailure)?;
    Ok(svd.singular_values.iter().copied().collect())
}

/// Orthonormal basis of the numerical nullspace of `m` (right singular
/// vectors whose singular values fall below the rank cut), returned as the
/// columns of a `ncols x nullity` matrix.
pub(crate) fn nullspace_logged(
    m: &DMatrix<f64>,
    tol: &TolerancePolicy,
    log: &mut DecisionLog,
) -> Result<DMatrix<f64>, Error> {
    let cols = m.ncols();
    if m.nrows() == 0 || cols == 0 {
        return Ok(DMatrix::identity(cols, cols));
    }
    let svd = m
        .clone()
        .try_svd(false, true, f64::EPSILON, 0)
        .ok_or(Error::EigensolverFailure)?;
    let v_t = svd.v_t.ok_or(Error::EigensolverFailure)?;
    let sv = svd.singular_values;
    let thr = tol.rank_threshold(m.norm());
    let mut zero_idx: Vec<usize> = Vec::new();
    for (i, s) in sv.iter().enumerate() {
        if log.is_zero("nullspace singular value", *s, thr) {
            zero_idx.push(i);
        }
    }
    // A wide matrix has cols - nrows extra right singular directions beyond
    // those paired with singular values; they are null directions too. v_t
    // from nalgebra has min(nrows, cols) rows, so this only matters for
    // square/tall inputs here (all callers pass square matrices).
    let nullity = zero_idx.len();
    let mut basis = DMatrix::zeros(cols, nullity);
    for (k, &i) in zero_idx.iter().enumerate() {
        for r in 0..cols {
            basis[(r, k)] = v_t[(i, r)];
        }
    }
    Ok(basis)
}

/// Spectral condition estimate `sigma_max / sigma_min`; infinite when
/// numerically singular, 1 for empty matrices.
pub fn cond_estimate(m: &DMatrix<f64>) -> Result<f64, Error> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(1.0);
    }
    let sv = singular_values(m)?;
    let hi = sv.first().copied().unwrap_or(0.0);
    let lo = sv.last().copied().unwrap_or(0.0);
    if lo == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(hi / lo)
}
