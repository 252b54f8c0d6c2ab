//! SD for families of symmetric matrices.
//!
//! For `m = 2` the pair pipeline is complete. For larger families the
//! decision routes through a penalty combination ("pencil"): a vector
//! `lambda` with `sum lambda_i A_i` positive definite or positive
//! semidefinite. A definite pencil reduces the family to a commuting check
//! after one normalization; a semidefinite pencil splits off the common
//! kernel recursively and leaves structured conditions on the coupling
//! blocks. Families whose every pair commutes skip the pencil entirely and
//! are diagonalized by one orthogonal congruence.
//!
//! When no usable pencil is found the verdict is `Indeterminate`, never
//! `NotSd`: absence of a pencil is not a proof.

use crate::error::Error;
use crate::matrix::{block_diag, commutator_norm, Congruence, SymMat};
use crate::outcome::{Obstruction, SdOutcome, Verdict};
use crate::pair::sd_pair_detailed;
use crate::spectral::{clustered_spectral, eigen_sorted, spectral_decompose_logged};
use crate::tol::{BorderlineEvent, DecisionLog, TolerancePolicy};
use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use libm::sqrt;
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Definiteness class of a pencil combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PencilClass {
    Definite,
    Semidefinite,
    Indefinite,
}

impl core::fmt::Display for PencilClass {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PencilClass::Definite => f.write_str("definite"),
            PencilClass::Semidefinite => f.write_str("semidefinite"),
            PencilClass::Indefinite => f.write_str("indefinite"),
        }
    }
}

/// Result of classifying one pencil combination.
#[derive(Debug, Clone, Copy)]
pub struct PencilEval {
    pub class: PencilClass,
    /// Smallest eigenvalue of the combination.
    pub min_eigenvalue: f64,
    /// Frobenius norm of the combination (the classification scale).
    pub scale: f64,
    /// Numerical rank of the combination.
    pub rank: usize,
}

/// A pencil found by [`find_pencil`], normalized to unit max-coefficient.
#[derive(Debug, Clone)]
pub struct PencilCertificate {
    pub lambda: Vec<f64>,
    pub class: PencilClass,
    pub min_eigenvalue: f64,
    /// Index of the largest-magnitude coefficient (lowest index on ties).
    pub pivot: usize,
}

/// Controls for the randomized part of [`find_pencil`]. All runs with the
/// same options on the same family are deterministic.
#[derive(Debug, Clone)]
pub struct FindPencilOptions {
    pub seed: u64,
    pub random_starts: usize,
    pub ascent_iters: usize,
}

impl Default for FindPencilOptions {
    fn default() -> Self {
        FindPencilOptions {
            seed: 0,
            random_starts: 8,
            ascent_iters: 150,
        }
    }
}

fn check_family(family: &[SymMat]) -> Result<usize, Error> {
    let Some(first) = family.first() else {
        return Err(Error::EmptyInput);
    };
    let n = first.n();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    for a in family {
        if a.n() != n {
            return Err(Error::DimensionMismatch {
                expected: (n, n),
                got: (a.n(), a.n()),
            });
        }
    }
    Ok(n)
}

fn lin_comb(family: &[SymMat], lambda: &[f64]) -> Result<SymMat, Error> {
    let n = check_family(family)?;
    if lambda.len() != family.len() {
        return Err(Error::DimensionMismatch {
            expected: (family.len(), 1),
            got: (lambda.len(), 1),
        });
    }
    if lambda.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut t = DMatrix::zeros(n, n);
    for (c, a) in lambda.iter().zip(family.iter()) {
        if *c != 0.0 {
            t += a.matrix() * *c;
        }
    }
    SymMat::from_matrix(t)
}

fn classify_pencil_logged(
    family: &[SymMat],
    lambda: &[f64],
    tol: &TolerancePolicy,
    log: &mut DecisionLog,
) -> Result<PencilEval, Error> {
    let t = lin_comb(family, lambda)?;
    let scale = t.fro_norm();
    let (_, values) = eigen_sorted(&t)?;
    let min_eigenvalue = values.last().copied().unwrap_or(0.0);
    let thr = tol.rank_threshold(scale);
    let rank = values.iter().filter(|v| v.abs() > thr).count();
    let class = if log.is_zero("pencil minimum eigenvalue", min_eigenvalue, thr) {
        PencilClass::Semidefinite
    } else if min_eigenvalue > 0.0 {
        PencilClass::Definite
    } else {
        PencilClass::Indefinite
    };
    Ok(PencilEval {
        class,
        min_eigenvalue,
        scale,
        rank,
    })
}

/// Classifies the combination `sum lambda_i A_i` as definite, semidefinite
/// (singular but without negative eigenvalues), or indefinite, at the
/// `eps_rank` scale.
pub fn classify_pencil(
    family: &[SymMat],
    lambda: &[f64],
    tol: &TolerancePolicy,
) -> Result<PencilEval, Error> {
    let mut log = DecisionLog::new();
    classify_pencil_logged(family, lambda, tol, &mut log)
}

fn pivot_of(lambda: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in lambda.iter().enumerate() {
        if v.abs() > lambda[best].abs() {
            best = i;
        }
    }
    best
}

fn inf_normalize(lambda: &mut [f64]) -> bool {
    let mx = lambda.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    if mx <= 0.0 || !mx.is_finite() {
        return false;
    }
    for x in lambda.iter_mut() {
        *x /= mx;
    }
    true
}

fn round_to_digits(x: f64, digits: u32) -> f64 {
    let f = libm::pow(10.0, digits as f64);
    libm::round(x * f) / f
}

/// Searches for a definite or semidefinite pencil by projected subgradient
/// ascent on the minimum eigenvalue over the max-norm ball, from a fixed set
/// of coordinate starts plus seeded random starts, with a decimal rounding
/// polish so exactly-singular optima are recovered with rational
/// coefficients. Returns `None` when nothing definite or semidefinite is
/// found; that is not a proof of anything.
pub fn find_pencil(
    family: &[SymMat],
    opts: &FindPencilOptions,
    tol: &TolerancePolicy,
) -> Result<Option<PencilCertificate>, Error> {
    let n = check_family(family)?;
    let m = family.len();

    // Search in scaled coordinates so wildly different matrix norms do not
    // distort the ascent geometry.
    let scales: Vec<f64> = family.iter().map(|a| a.fro_norm().max(1.0)).collect();
    let scaled: Vec<SymMat> = family
        .iter()
        .zip(scales.iter())
        .map(|(a, s)| SymMat::from_matrix(a.matrix() / *s))
        .collect::<Result<_, _>>()?;

    let mut candidates: Vec<Vec<f64>> = Vec::new();
    let push_candidate = |lam: Vec<f64>, out: &mut Vec<Vec<f64>>| {
        if lam.iter().all(|x| x.is_finite()) && lam.iter().any(|x| *x != 0.0) {
            out.push(lam);
        }
    };

    for i in 0..m {
        for sign in [1.0, -1.0] {
            let mut lam = vec![0.0; m];
            lam[i] = sign;
            push_candidate(lam, &mut candidates);
        }
    }
    push_candidate(vec![1.0; m], &mut candidates);
    push_candidate(vec![-1.0; m], &mut candidates);

    // Subgradient ascent on lambda_min(sum lam_i A_i / s_i).
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts: Vec<Vec<f64>> = vec![vec![1.0; m]];
    for _ in 0..opts.random_starts {
        let lam: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect();
        if lam.iter().any(|x| x.abs() > 1e-3) {
            starts.push(lam);
        }
    }
    for start in &starts {
        let mut lam = start.clone();
        inf_normalize(&mut lam);
        let mut best = lam.clone();
        let mut best_val = f64::NEG_INFINITY;
        for k in 0..opts.ascent_iters {
            let t = lin_comb(&scaled, &lam)?;
            let (vecs, values) = eigen_sorted(&t)?;
            let w = values.last().copied().unwrap_or(0.0);
            if w > best_val {
                best_val = w;
                best = lam.clone();
            }
            let u = vecs.column(n - 1).into_owned();
            let g: Vec<f64> = scaled
                .iter()
                .map(|a| u.dot(&(a.matrix() * &u)))
                .collect();
            let gn = sqrt(g.iter().map(|x| x * x).sum());
            if gn < 1e-14 {
                break;
            }
            let step = 0.5 / sqrt((k + 1) as f64);
            for (li, gi) in lam.iter_mut().zip(g.iter()) {
                *li = (*li + step * gi / gn).clamp(-1.0, 1.0);
            }
        }
        // Map back to original coordinates and normalize.
        let mut mapped: Vec<f64> = best.iter().zip(scales.iter()).map(|(l, s)| l / s).collect();
        if inf_normalize(&mut mapped) {
            for digits in 0..=4 {
                let rounded: Vec<f64> =
                    mapped.iter().map(|x| round_to_digits(*x, digits)).collect();
                push_candidate(rounded, &mut candidates);
            }
            push_candidate(mapped, &mut candidates);
        }
    }

    // Evaluate every candidate against the original family; keep the best
    // definite one, else the best semidefinite one.
    let mut best_definite: Option<(f64, PencilCertificate)> = None;
    let mut best_semi: Option<(usize, PencilCertificate)> = None;
    for cand in &candidates {
        let mut lam = cand.clone();
        if !inf_normalize(&mut lam) {
            continue;
        }
        let mut scratch = DecisionLog::new();
        let eval = classify_pencil_logged(family, &lam, tol, &mut scratch)?;
        // A combination that cancels to (numerically) nothing certifies
        // nothing.
        let input_scale: f64 = family
            .iter()
            .zip(lam.iter())
            .map(|(a, l)| a.fro_norm() * l.abs())
            .sum();
        if eval.scale <= tol.rank_threshold(input_scale) {
            continue;
        }
        match eval.class {
            PencilClass::Definite => {
                let margin = eval.min_eigenvalue / eval.scale.max(1.0);
                if best_definite.as_ref().map_or(true, |(mg, _)| margin > *mg) {
                    best_definite = Some((
                        margin,
                        PencilCertificate {
                            lambda: lam.clone(),
                            class: PencilClass::Definite,
                            min_eigenvalue: eval.min_eigenvalue,
                            pivot: pivot_of(&lam),
                        },
                    ));
                }
            }
            PencilClass::Semidefinite => {
                if best_semi.as_ref().map_or(true, |(rk, _)| eval.rank > *rk) {
                    best_semi = Some((
                        eval.rank,
                        PencilCertificate {
                            lambda: lam.clone(),
                            class: PencilClass::Semidefinite,
                            min_eigenvalue: eval.min_eigenvalue,
                            pivot: pivot_of(&lam),
                        },
                    ));
                }
            }
            PencilClass::Indefinite => {}
        }
    }
    Ok(best_definite
        .map(|(_, c)| c)
        .or(best_semi.map(|(_, c)| c)))
}

/// Failure of the commuting-family diagonalization.
#[derive(Debug, Clone)]
pub enum CommutingError {
    /// Two inputs do not commute; indices refer to the slice passed in.
    NotCommuting {
        i: usize,
        j: usize,
        commutator_norm: f64,
        threshold: f64,
    },
    /// The inputs passed the commuting test, yet a cross-cluster block did
    /// not vanish; the reads contradict each other.
    Inconsistent {
        matrix_index: usize,
        norm: f64,
        threshold: f64,
    },
    Numeric(Error),
}

impl core::fmt::Display for CommutingError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CommutingError::NotCommuting {
                i,
                j,
                commutator_norm,
                threshold,
            } => write!(
                f,
                "matrices {i} and {j} do not commute: |[A,B]| = {commutator_norm:.6e} > {threshold:.6e}"
            ),
            CommutingError::Inconsistent {
                matrix_index,
                norm,
                threshold,
            } => write!(
                f,
                "matrix {matrix_index}: cross-cluster block {norm:.6e} > {threshold:.6e} despite passing the commuting test"
            ),
            CommutingError::Numeric(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CommutingError {
    fn from(e: Error) -> Self {
        CommutingError::Numeric(e)
    }
}

fn pairwise_commute_check(
    family: &[SymMat],
    tol: &TolerancePolicy,
) -> Result<(), CommutingError> {
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            let c = commutator_norm(&family[i], &family[j])?;
            let thr = tol
                .commute_threshold(family[i].fro_norm() * family[j].fro_norm());
            if c > thr {
                return Err(CommutingError::NotCommuting {
                    i,
                    j,
                    commutator_norm: c,
                    threshold: thr,
                });
            }
        }
    }
    Ok(())
}

// One recursion level: eigendecompose the first matrix, split the rest along
// its eigenvalue clusters, recurse per cluster with one matrix fewer.
fn commuting_recurse(
    mats: &[DMatrix<f64>],
    index_base: usize,
    n: usize,
    tol: &TolerancePolicy,
    log: &mut DecisionLog,
) -> Result<DMatrix<f64>, CommutingError> {
    if mats.is_empty() || n <= 1 {
        return Ok(DMatrix::identity(n, n));
    }
    let head = SymMat::from_matrix(mats[0].clone())?;
    let (q0, clusters) = clustered_spectral(&head, tol, log)?;

    let rest: Vec<DMatrix<f64>> = mats[1..]
        .iter()
        .map(|m| {
            let t = q0.transpose() * m * &q0;
            // Symmetrize: m is symmetric and q0 orthogonal up to roundoff.
            (&t + t.transpose()) * 0.5
        })
        .collect();

    // Commuting matrices are block-diagonal along the eigenspaces of the
    // head; a visible cross-cluster block means the reads are inconsistent.
    for (k, t) in rest.iter().enumerate() {
        let thr = tol.commute_threshold(t.norm());
        for (ci, a) in clusters.iter().enumerate() {
            for b in clusters.iter().skip(ci + 1) {
                let blk = t.view((a.start, b.start), (a.size, b.size));
                let norm = blk.norm();
                if norm > thr {
                    return Err(CommutingError::Inconsistent {
                        matrix_index: index_base + 1 + k,
                        norm,
                        threshold: thr,
                    });
                }
            }
        }
    }

    let mut blocks: Vec<DMatrix<f64>> = Vec::with_capacity(clusters.len());
    for c in &clusters {
        let sub: Vec<DMatrix<f64>> = rest
            .iter()
            .map(|t| t.view((c.start, c.start), (c.size, c.size)).into_owned())
            .collect();
        blocks.push(commuting_recurse(&sub, index_base + 1, c.size, tol, log)?);
    }
    Ok(q0 * block_diag(&blocks))
}

pub(crate) fn commuting_family_diag_logged(
    family: &[SymMat],
    tol: &TolerancePolicy,
    log: &mut DecisionLog,
) -> Result<DMatrix<f64>, CommutingError> {
    let n = check_family(family)?;
    pairwise_commute_check(family, tol)?;
    let mats: Vec<DMatrix<f64>> = family.iter().map(|a| a.matrix().clone()).collect();
    commuting_recurse(&mats, 0, n, tol, log)
}

/// Jointly diagonalizes a family of pairwise commuting symmetric matrices by
/// one orthogonal matrix, recursing along eigenvalue clusters of the first
/// matrix. The commuting hypothesis is checked first.
pub fn commuting_family_diag(
    family: &[SymMat],
    tol: &TolerancePolicy,
) -> Result<DMatrix<f64>, CommutingError> {
    let mut log = DecisionLog::new();
    commuting_family_diag_logged(family, tol, &mut log)
}

/// Failure of the nonsingularity search over diagonal combinations.
#[derive(Debug, Clone)]
pub enum MuError {
    /// All matrices consumed without reaching a nonsingular combination.
    Exhausted { support_size: usize, dimension: usize },
    Invalid(Error),
}

impl core::fmt::Display for MuError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MuError::Exhausted {
                support_size,
                dimension,
            } => write!(
                f,
                "no nonsingular combination: joint support covers {support_size} of {dimension} coordinates"
            ),
            MuError::Invalid(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for MuError {
    fn from(e: Error) -> Self {
        MuError::Invalid(e)
    }
}

fn support(d: &[f64], tol: &TolerancePolicy) -> Vec<bool> {
    let scale = sqrt(d.iter().map(|x| x * x).sum());
    let thr = tol.rank_threshold(scale);
    d.iter().map(|x| x.abs() > thr).collect()
}

/// Finds coefficients `mu` (with `mu_1 = 1`) making `sum mu_j D_j`
/// nonsingular, where each `D_j` is a diagonal matrix given by its diagonal
/// vector. Processes the matrices in order; at step `j` the coefficient is
/// the smallest `s/q`, `s` in `{0, ..., q}` with `q` the dimension, that
/// keeps every already-covered coordinate covered while adding the support
/// of `D_j`. Stops early once the running combination is nonsingular.
pub fn mu_search(diags: &[Vec<f64>], tol: &TolerancePolicy) -> Result<Vec<f64>, MuError> {
    let Some(first) = diags.first() else {
        return Err(MuError::Invalid(Error::EmptyInput));
    };
    let q = first.len();
    for d in diags {
        if d.len() != q {
            return Err(MuError::Invalid(Error::DimensionMismatch {
                expected: (q, 1),
                got: (d.len(), 1),
            }));
        }
        if d.iter().any(|x| !x.is_finite()) {
            return Err(MuError::Invalid(Error::NonFinite));
        }
    }

    let mut mu = vec![0.0; diags.len()];
    mu[0] = 1.0;
    let mut current = first.clone();
    let nonsingular = |d: &[f64], tol: &TolerancePolicy| support(d, tol).iter().all(|b| *b);

    for j in 1..diags.len() {
        if q == 0 || nonsingular(&current, tol) {
            break;
        }
        let target: Vec<bool> = support(&current, tol)
            .iter()
            .zip(support(&diags[j], tol).iter())
            .map(|(a, b)| *a || *b)
            .collect();
        for s in 0..=q {
            let t = s as f64 / q as f64;
            let cand: Vec<f64> = current
                .iter()
                .zip(diags[j].iter())
                .map(|(a, b)| a + t * b)
                .collect();
            if support(&cand, tol) == target {
                mu[j] = t;
                current = cand;
                break;
            }
        }
    }

    if q == 0 || nonsingular(&current, tol) {
        Ok(mu)
    } else {
        Err(MuError::Exhausted {
            support_size: support(&current, tol).iter().filter(|b| **b).count(),
            dimension: q,
        })
    }
}

/// Which route decided a family outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyPath {
    /// One matrix: plain spectral decomposition.
    Single,
    /// Two matrices: the pair pipeline.
    Pair,
    /// Pairwise commuting family: joint orthogonal diagonalization.
    Commuting,
    /// Definite pencil normalization.
    Definite,
    /// Semidefinite pencil with kernel recursion.
    Semidefinite,
    /// No route applied.
    NoPath,
}

/// Diagnostic sidecar of [`sd_family_detailed`].
#[derive(Debug, Clone)]
pub struct FamilyTrace {
    pub n: usize,
    pub m: usize,
    pub path: FamilyPath,
    pub pencil: Option<PencilCertificate>,
    /// Dimension of the pencil kernel handled recursively (semidefinite
    /// path only).
    pub kernel_dim: usize,
    /// Support-filling kernel combination used to eliminate the coupling
    /// blocks (semidefinite path only, top level).
    pub mu: Option<Vec<f64>>,
    pub borderline: Vec<BorderlineEvent>,
}

fn verified_sd(
    family: &[SymMat],
    p_mat: DMatrix<f64>,
    tol: &TolerancePolicy,
) -> Result<SdOutcome, Error> {
    let congruence = match Congruence::new(p_mat, tol) {
        Ok(c) => c,
        Err(Error::SingularCongruence { cond }) => {
            return Ok(SdOutcome::indeterminate(
                Obstruction::IllConditionedTransform {
                    cond,
                    limit: 1.0 / tol.eps_rank,
                },
            ))
        }
        Err(e) => return Err(e),
    };
    let mut diagonals = Vec::with_capacity(family.len());
    for (idx, a) in family.iter().enumerate() {
        let im = congruence.apply(a)?;
        let thr = tol.offdiag_threshold(im.fro_norm());
        let worst = im.max_offdiag();
        if worst > thr {
            return Ok(SdOutcome::indeterminate(Obstruction::VerificationFailed {
                detail: format!(
                    "image {idx} off-diagonal {worst:.6e} exceeds {thr:.6e}"
                ),
            }));
        }
        diagonals.push(im.diagonal());
    }
    Ok(SdOutcome::sd(congruence, diagonals))
}

fn commuting_error_outcome(e: CommutingError) -> Result<SdOutcome, Error> {
    match e {
        CommutingError::NotCommuting {
            i,
            j,
            commutator_norm,
            threshold,
        } => Ok(SdOutcome::not_sd(Obstruction::CommutationFailure {
            i,
            j,
            commutator_norm,
            threshold,
        })),
        CommutingError::Inconsistent {
            matrix_index,
            norm,
            threshold,
        } => Ok(SdOutcome::indeterminate(Obstruction::VerificationFailed {
            detail: format!(
                "matrix {matrix_index}: cross-cluster block {norm:.6e} > {threshold:.6e} after a passed commuting test"
            ),
        })),
        CommutingError::Numeric(e) => Err(e),
    }
}

// Definite path: P0 = U D^{-1/2} sends the pencil to the identity; the
// family is SD exactly when the transformed matrices pairwise commute.
fn sd_family_definite(
    family: &[SymMat],
    lambda: &[f64],
    tol: &TolerancePolicy,
    log: &mut DecisionLog,
) -> Result<SdOutcome, Error> {
    let n = check_family(family)?;
    let t = lin_comb(family, lambda)?;
    let (u, values) = eigen_sorted(&t)?;
    let thr = tol.rank_threshold(t.fro_norm());
    if values.iter().any(|v| *v <= thr) {
        return Ok(SdOutcome::indeterminate(Obstruction::VerificationFailed {
            detail: String::from("pencil combination not definite at recheck"),
        }));
    }
    let mut p0 = u;
    for j in 0..n {
        let s = 1.0 / sqrt(values[j]);
        for i in 0..n {
            p0[(i, j)] *= s;
        }
    }
    let transformed: Vec<SymMat> = family
        .iter()
        .map(|a| SymMat::from_matrix(p0.transpose() * a.matrix() * &p0))
        .collect::<Result<_, _>>()?;
    match commuting_family_diag_logged(&transformed, tol, log) {
        Ok(q) => verified_sd(family, p0 * q, tol),
        Err(e) => commuting_error_outcome(e),
    }
}

// Semidefinite path: normalize the pencil image to diag(I_p, 0), decide the
// kernel subfamily recursively, push common kernel zeros to the lower right,
// then test the three structural conditions and assemble the closing
// congruence.
fn sd_family_semidefinite(
    family: &[SymMat],
    lambda: &[f64],
    opts: &FindPencilOptions,
    tol: &TolerancePolicy,
    log: &mut DecisionLog,
    kernel_dim: &mut usize,
    mu_out: &mut Option<Vec<f64>>,
) -> Result<SdOutcome, Error> {
    let n = check_family(family)?;
    let m = family.len();
    let t = lin_comb(family, lambda)?;
    let st = spectral_decompose_logged(&t, tol, log)?;
    let p = st.rank;
    let thr_t = tol.rank_threshold(t.fro_norm());
    if st.values[..p].iter().any(|v| *v <= 0.0) || st.values[p..].iter().any(|v| *v < -thr_t) {
        return Ok(SdOutcome::indeterminate(Obstruction::VerificationFailed {
            detail: String::from("pencil combination not positive semidefinite at recheck"),
        }));
    }
    if p == 0 {
        return Ok(SdOutcome::indeterminate(Obstruction::NoPencilFound {
            detail: String::from("pencil combination vanishes"),
        }));
    }
    if p == n {
        return sd_family_definite(family, lambda, tol, log);
    }
    let k = n - p;
    *kernel_dim = k;

    // Q1 normalizes the pencil image to diag(I_p, 0).
    let mut q1 = st.q;
    for j in 0..p {
        let s = 1.0 / sqrt(st.values[j]);
        for i in 0..n {
            q1[(i, j)] *= s;
        }
    }
    let images: Vec<SymMat> = family
        .iter()
        .map(|a| SymMat::from_matrix(q1.transpose() * a.matrix() * &q1))
        .collect::<Result<_, _>>()?;

    // Decide the kernel subfamily recursively.
    let kernel_family: Vec<SymMat> = images
        .iter()
        .map(|im| SymMat::from_matrix(im.matrix().view((p, p), (k, k)).into_owned()))
        .collect::<Result<_, _>>()?;
    let (inner, _) = sd_family_detailed(&kernel_family, opts, tol)?;
    let v0 = match inner.verdict {
        Verdict::Sd => inner.congruence.unwrap().into_matrix(),
        Verdict::NotSd => {
            return Ok(SdOutcome::not_sd(Obstruction::KernelBlockNotSD {
                inner: Box::new(inner.obstruction.unwrap()),
            }))
        }
        Verdict::Indeterminate => {
            let ob = inner.obstruction.unwrap();
            return Ok(match ob {
                Obstruction::NoPencilFound { .. } => SdOutcome::indeterminate(ob),
                other => SdOutcome::indeterminate(Obstruction::KernelBlockNotSD {
                    inner: Box::new(other),
                }),
            });
        }
    };

    // Kernel diagonals per matrix; coordinates nobody touches move to the
    // lower right.
    let kernel_diags: Vec<Vec<f64>> = images
        .iter()
        .map(|im| {
            let blk = v0.transpose() * im.matrix().view((p, p), (k, k)) * &v0;
            (0..k).map(|i| blk[(i, i)]).collect()
        })
        .collect();
    let supports: Vec<Vec<bool>> = kernel_diags.iter().map(|d| support(d, tol)).collect();
    let mut active: Vec<usize> = Vec::new();
    let mut common_zero: Vec<usize> = Vec::new();
    for c in 0..k {
        if supports.iter().any(|s| s[c]) {
            active.push(c);
        } else {
            common_zero.push(c);
        }
    }
    let q = active.len();
    let r2 = common_zero.len();
    let mut perm = DMatrix::zeros(k, k);
    for (new, old) in active.iter().chain(common_zero.iter()).enumerate() {
        perm[(*old, new)] = 1.0;
    }
    let v = &v0 * perm;

    let w = &q1 * block_diag(&[DMatrix::identity(p, p), v]);
    let b: Vec<SymMat> = family
        .iter()
        .map(|a| SymMat::from_matrix(w.transpose() * a.matrix() * &w))
        .collect::<Result<_, _>>()?;

    // Condition (i): no coupling between the range block and the common
    // kernel coordinates.
    for (i, bi) in b.iter().enumerate() {
        if r2 == 0 {
            break;
        }
        let blk = bi.matrix().view((0, p + q), (p, r2));
        let norm = blk.norm();
        let thr = tol.offdiag_threshold(bi.fro_norm());
        if !log.is_zero("common-kernel coupling block", norm, thr) {
            return Ok(SdOutcome::not_sd(Obstruction::B2NotZero {
                matrix_index: i,
                norm,
                threshold: thr,
            }));
        }
    }

    // D3 = sum mu_j A_j^3 nonsingular via the support-filling coefficients.
    let active_diags: Vec<Vec<f64>> = kernel_diags
        .iter()
        .map(|d| active.iter().map(|&c| d[c]).collect())
        .collect();
    let mu = match mu_search(&active_diags, tol) {
        Ok(mu) => mu,
        Err(MuError::Exhausted { .. }) => {
            return Ok(SdOutcome::indeterminate(Obstruction::VerificationFailed {
                detail: String::from(
                    "no nonsingular kernel combination despite no common zeros",
                ),
            }))
        }
        Err(MuError::Invalid(e)) => return Err(e),
    };
    *mu_out = Some(mu.clone());
    let mut d3 = vec![0.0; q];
    let mut d2 = DMatrix::zeros(p, q);
    for (j, bj) in b.iter().enumerate() {
        if mu[j] == 0.0 {
            continue;
        }
        for c in 0..q {
            d3[c] += mu[j] * active_diags[j][c];
        }
        d2 += bj.matrix().view((0, p), (p, q)) * mu[j];
    }

    // Condition (ii): every coupling block is the pencil coupling scaled by
    // the matrix's own kernel diagonal.
    for (i, bi) in b.iter().enumerate() {
        let a2 = bi.matrix().view((0, p), (p, q)).into_owned();
        let mut expected = d2.clone();
        for c in 0..q {
            let f = active_diags[i][c] / d3[c];
            for rr in 0..p {
                expected[(rr, c)] *= f;
            }
        }
        let residual = (&a2 - &expected).norm();
        let thr = tol.offdiag_threshold(bi.fro_norm());
        if !log.is_zero("kernel coupling proportionality", residual, thr) {
            return Ok(SdOutcome::not_sd(Obstruction::CouplingMismatch {
                matrix_index: i,
                residual,
                threshold: thr,
            }));
        }
    }

    // Condition (iii): the Schur-reduced range blocks must commute.
    let mut d2_d3inv = d2.clone();
    for c in 0..q {
        for rr in 0..p {
            d2_d3inv[(rr, c)] /= d3[c];
        }
    }
    let h: Vec<SymMat> = b
        .iter()
        .map(|bi| {
            let a1 = bi.matrix().view((0, 0), (p, p)).into_owned();
            let a2 = bi.matrix().view((0, p), (p, q)).into_owned();
            SymMat::from_matrix(a1 - a2 * d2_d3inv.transpose())
        })
        .collect::<Result<_, _>>()?;
    let p1 = match commuting_family_diag_logged(&h, tol, log) {
        Ok(q) => q,
        Err(e) => return commuting_error_outcome(e),
    };

    // Closing congruence: clear the coupling through the nonsingular kernel
    // combination, identity elsewhere.
    let nfull = p + q + r2;
    debug_assert_eq!(nfull, n);
    let mut closing = DMatrix::identity(nfull, nfull);
    closing.view_mut((0, 0), (p, p)).copy_from(&p1);
    let lower = -d2_d3inv.transpose() * &p1;
    closing.view_mut((p, 0), (q, p)).copy_from(&lower);
    let _ = m;
    verified_sd(family, w * closing, tol)
}

fn single_matrix_outcome(a: &SymMat, tol: &TolerancePolicy) -> Result<SdOutcome, Error> {
    let (q, _) = eigen_sorted(a)?;
    verified_sd(core::slice::from_ref(a), q, tol)
}

fn run_family(
    family: &[SymMat],
    supplied: Option<&[f64]>,
    opts: &FindPencilOptions,
    tol: &TolerancePolicy,
) -> Result<(SdOutcome, FamilyTrace), Error> {
    let n = check_family(family)?;
    let m = family.len();
    let mut trace = FamilyTrace {
        n,
        m,
        path: FamilyPath::NoPath,
        pencil: None,
        kernel_dim: 0,
        mu: None,
        borderline: Vec::new(),
    };

    if m == 1 {
        trace.path = FamilyPath::Single;
        let outcome = single_matrix_outcome(&family[0], tol)?;
        return Ok((outcome, trace));
    }
    if m == 2 && supplied.is_none() {
        let (outcome, pt) = sd_pair_detailed(&family[0], &family[1], tol)?;
        trace.path = FamilyPath::Pair;
        trace.kernel_dim = pt.r;
        trace.borderline = pt.borderline;
        return Ok((outcome, trace));
    }

    let mut log = DecisionLog::new();

    // Commuting families need no pencil at all.
    if supplied.is_none() && pairwise_commute_check(family, tol).is_ok() {
        trace.path = FamilyPath::Commuting;
        let mats: Vec<DMatrix<f64>> = family.iter().map(|a| a.matrix().clone()).collect();
        let outcome = match commuting_recurse(&mats, 0, n, tol, &mut log) {
            Ok(q) => verified_sd(family, q, tol)?,
            Err(e) => commuting_error_outcome(e)?,
        };
        return finish_family(outcome, trace, log);
    }

    let pencil = match supplied {
        Some(lambda) => {
            if lambda.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: (m, 1),
                    got: (lambda.len(), 1),
                });
            }
            let mut lam = lambda.to_vec();
            if !inf_normalize(&mut lam) {
                return Err(Error::Invalid(String::from(
                    "supplied pencil coefficients are all zero",
                )));
            }
            let eval = classify_pencil_logged(family, &lam, tol, &mut log)?;
            if eval.class == PencilClass::Indefinite {
                let outcome = SdOutcome::indeterminate(Obstruction::NoPencilFound {
                    detail: format!(
                        "supplied pencil combination is indefinite (min eigenvalue {:.6e})",
                        eval.min_eigenvalue
                    ),
                });
                return finish_family(outcome, trace, log);
            }
            PencilCertificate {
                lambda: lam.clone(),
                class: eval.class,
                min_eigenvalue: eval.min_eigenvalue,
                pivot: pivot_of(&lam),
            }
        }
        None => match find_pencil(family, opts, tol)? {
            Some(c) => c,
            None => {
                let outcome = SdOutcome::indeterminate(Obstruction::NoPencilFound {
                    detail: String::from(
                        "no definite or semidefinite pencil combination found",
                    ),
                });
                return finish_family(outcome, trace, log);
            }
        },
    };

    let outcome = match pencil.class {
        PencilClass::Definite => {
            trace.path = FamilyPath::Definite;
            sd_family_definite(family, &pencil.lambda, tol, &mut log)?
        }
        PencilClass::Semidefinite => {
            trace.path = FamilyPath::Semidefinite;
            sd_family_semidefinite(
                family,
                &pencil.lambda,
                opts,
                tol,
                &mut log,
                &mut trace.kernel_dim,
                &mut trace.mu,
            )?
        }
        PencilClass::Indefinite => unreachable!("indefinite pencils are filtered above"),
    };
    trace.pencil = Some(pencil);
    finish_family(outcome, trace, log)
}

fn finish_family(
    mut outcome: SdOutcome,
    mut trace: FamilyTrace,
    log: DecisionLog,
) -> Result<(SdOutcome, FamilyTrace), Error> {
    if !log.is_clean() && outcome.verdict != Verdict::Indeterminate {
        outcome = SdOutcome::indeterminate(Obstruction::Borderline {
            events: log.events().to_vec(),
        });
    }
    trace.borderline = log.into_events();
    Ok((outcome, trace))
}

/// SD decision for a family, with the diagnostic trace.
pub fn sd_family_detailed(
    family: &[SymMat],
    opts: &FindPencilOptions,
    tol: &TolerancePolicy,
) -> Result<(SdOutcome, FamilyTrace), Error> {
    run_family(family, None, opts, tol)
}

/// Decides SD for a family of symmetric matrices; certificates are verified
/// before being returned. See the module docs for the decision routes.
pub fn sd_family(
    family: &[SymMat],
    opts: &FindPencilOptions,
    tol: &TolerancePolicy,
) -> Result<SdOutcome, Error> {
    run_family(family, None, opts, tol).map(|(o, _)| o)
}

/// Like [`sd_family`] but with caller-supplied pencil coefficients instead
/// of the automatic search. The coefficients are max-normalized, classified,
/// and rejected (as `Indeterminate`) when indefinite.
pub fn sd_family_with_pencil(
    family: &[SymMat],
    lambda: &[f64],
    opts: &FindPencilOptions,
    tol: &TolerancePolicy,
) -> Result<(SdOutcome, FamilyTrace), Error> {
    run_family(family, Some(lambda), opts, tol)
}

/// SD check for the two-constraint (objective plus two quadratic
/// constraints) structure: the decision for the triple of matrices.
pub fn cdt_sd_check(
    a0: &SymMat,
    a1: &SymMat,
    a2: &SymMat,
    opts: &FindPencilOptions,
    tol: &TolerancePolicy,
) -> Result<SdOutcome, Error> {
    sd_family(&[a0.clone(), a1.clone(), a2.clone()], opts, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{commute, is_diagonal};
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;

    fn sym(rows: &[&[f64]]) -> SymMat {
        let v: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        SymMat::from_rows(&v).unwrap()
    }

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn opts() -> FindPencilOptions {
        FindPencilOptions::default()
    }

    // Three 2x2 matrices, pairwise non-commuting, with a definite pencil.
    fn definite_trio() -> Vec<SymMat> {
        vec![
            sym(&[&[1.0, 2.0], &[2.0, 20.0]]),
            sym(&[&[-1.0, -2.0], &[-2.0, -28.0]]),
            sym(&[&[3.0, 6.0], &[6.0, -20.0]]),
        ]
    }

    #[test]
    fn classify_pencil_classes() {
        let t = tol();
        let fam = vec![
            SymMat::identity(2),
            SymMat::from_diagonal(&[1.0, -1.0]).unwrap(),
        ];
        let def = classify_pencil(&fam, &[1.0, 0.0], &t).unwrap();
        assert_eq!(def.class, PencilClass::Definite);
        let semi = classify_pencil(&fam, &[1.0, 1.0], &t).unwrap();
        assert_eq!(semi.class, PencilClass::Semidefinite);
        assert_eq!(semi.rank, 1);
        let indef = classify_pencil(&fam, &[0.0, 1.0], &t).unwrap();
        assert_eq!(indef.class, PencilClass::Indefinite);
    }

    #[test]
    fn find_pencil_definite_trio() {
        let fam = definite_trio();
        let cert = find_pencil(&fam, &opts(), &tol()).unwrap().unwrap();
        assert_eq!(cert.class, PencilClass::Definite);
        let eval = classify_pencil(&fam, &cert.lambda, &tol()).unwrap();
        assert!(eval.min_eigenvalue > 0.0);
    }

    #[test]
    fn find_pencil_semidefinite_fixture() {
        // Only lambda proportional to (1, 0) yields a PSD combination.
        let fam = vec![
            SymMat::from_diagonal(&[1.0, 0.0]).unwrap(),
            sym(&[&[0.0, 1.0], &[1.0, 0.0]]),
        ];
        let cert = find_pencil(&fam, &opts(), &tol()).unwrap().unwrap();
        assert_eq!(cert.class, PencilClass::Semidefinite);
        assert_abs_diff_eq!(cert.lambda[0].abs(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cert.lambda[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn find_pencil_none_for_traceless_span() {
        // Every combination is traceless, so PSD means zero; nothing usable.
        let fam = vec![
            SymMat::from_diagonal(&[1.0, -1.0]).unwrap(),
            sym(&[&[0.0, 1.0], &[1.0, 0.0]]),
            SymMat::from_diagonal(&[2.0, -2.0]).unwrap(),
        ];
        assert!(find_pencil(&fam, &opts(), &tol()).unwrap().is_none());
    }

    #[test]
    fn mu_search_fills_support() {
        let t = tol();
        let mu = mu_search(&[vec![1.0, 0.0], vec![0.0, 1.0]], &t).unwrap();
        assert_eq!(mu, vec![1.0, 0.5]);
    }

    #[test]
    fn mu_search_stops_when_nonsingular() {
        let t = tol();
        let mu = mu_search(&[vec![2.0, 3.0]], &t).unwrap();
        assert_eq!(mu, vec![1.0]);
        let mu2 = mu_search(&[vec![1.0, -1.0], vec![1.0, 1.0]], &t).unwrap();
        assert_eq!(mu2, vec![1.0, 0.0]);
    }

    #[test]
    fn mu_search_exhausted_on_common_zero() {
        let t = tol();
        let err = mu_search(&[vec![1.0, 0.0], vec![2.0, 0.0]], &t).unwrap_err();
        assert!(matches!(err, MuError::Exhausted { .. }));
    }

    #[test]
    fn mu_search_avoids_cancellation() {
        let t = tol();
        // s = q would cancel coordinate 1; a smaller s must be chosen.
        let mu = mu_search(&[vec![-1.0, 0.0], vec![1.0, 1.0]], &t).unwrap();
        let d: Vec<f64> = (0..2).map(|i| -((i == 0) as i32 as f64)).collect();
        let comb: Vec<f64> = d
            .iter()
            .zip([mu[1], mu[1]].iter())
            .map(|(a, b)| a + b)
            .collect();
        assert!(comb.iter().all(|x| x.abs() > 1e-12));
    }

    #[test]
    fn commuting_family_joint_diagonalization() {
        let t = tol();
        // Rotate two diagonal matrices with nested multiplicity patterns by
        // a common orthogonal basis.
        let theta: f64 = 0.63;
        let (c, s) = (theta.cos(), theta.sin());
        let g = DMatrix::from_row_slice(
            3,
            3,
            &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0],
        );
        let rot = {
            let phi: f64 = -0.41;
            let (c2, s2) = (phi.cos(), phi.sin());
            g * DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, c2, -s2, 0.0, s2, c2])
        };
        let d1 = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 2.0]));
        let d2 = DMatrix::from_diagonal(&DVector::from_vec(vec![5.0, 6.0, 6.0]));
        let a = SymMat::from_matrix(&rot * d1 * rot.transpose()).unwrap();
        let b = SymMat::from_matrix(&rot * d2 * rot.transpose()).unwrap();
        assert!(commute(&a, &b, &t).unwrap());

        let q = commuting_family_diag(&[a.clone(), b.clone()], &t).unwrap();
        let qtq = q.transpose() * &q;
        assert!((qtq - DMatrix::identity(3, 3)).norm() <= 1e-10);
        let cong = Congruence::new(q, &t).unwrap();
        assert!(is_diagonal(&cong.apply(&a).unwrap(), &t));
        assert!(is_diagonal(&cong.apply(&b).unwrap(), &t));
    }

    #[test]
    fn commuting_family_rejects_non_commuting() {
        let t = tol();
        let a = SymMat::from_diagonal(&[1.0, 2.0]).unwrap();
        let b = sym(&[&[0.0, 1.0], &[1.0, 0.0]]);
        match commuting_family_diag(&[a, b], &t) {
            Err(CommutingError::NotCommuting { i, j, .. }) => {
                assert_eq!((i, j), (0, 1));
            }
            other => panic!("expected NotCommuting, got {other:?}"),
        }
    }

    #[test]
    fn family_definite_trio_is_sd() {
        let t = tol();
        let fam = definite_trio();
        assert!(!commute(&fam[0], &fam[1], &t).unwrap());
        let (outcome, trace) = sd_family_detailed(&fam, &opts(), &t).unwrap();
        assert_eq!(outcome.verdict, Verdict::Sd, "{:?}", outcome.obstruction);
        assert_eq!(trace.path, FamilyPath::Definite);
        let cong = outcome.congruence.unwrap();
        for a in &fam {
            assert!(is_diagonal(&cong.apply(a).unwrap(), &t));
        }
    }

    #[test]
    fn family_supplied_pencil_definite_trio() {
        let t = tol();
        let fam = definite_trio();
        let (outcome, trace) =
            sd_family_with_pencil(&fam, &[1.0, 0.0, 0.0], &opts(), &t).unwrap();
        assert_eq!(outcome.verdict, Verdict::Sd);
        assert_eq!(trace.pencil.unwrap().class, PencilClass::Definite);
    }

    #[test]
    fn family_supplied_indefinite_pencil_is_indeterminate() {
        let t = tol();
        let fam = definite_trio();
        let (outcome, _) =
            sd_family_with_pencil(&fam, &[0.0, 0.0, 1.0], &opts(), &t).unwrap();
        assert_eq!(outcome.verdict, Verdict::Indeterminate);
        assert!(matches!(
            outcome.obstruction,
            Some(Obstruction::NoPencilFound { .. })
        ));
    }

    #[test]
    fn family_semidefinite_coupling_rejected() {
        // The PSD pencil (1, 0) exposes an irremovable range-kernel
        // coupling in the second matrix. Routed through the pair pipeline
        // for m = 2; the triple version exercises the semidefinite path.
        let t = tol();
        let a = SymMat::from_diagonal(&[1.0, 0.0]).unwrap();
        let b = sym(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let outcome = sd_family(&[a.clone(), b.clone()], &opts(), &t).unwrap();
        assert_eq!(outcome.verdict, Verdict::NotSd);

        let (outcome3, trace3) = sd_family_with_pencil(
            &[a.clone(), a.clone(), b.clone()],
            &[1.0, 1.0, 0.0],
            &opts(),
            &t,
        )
        .unwrap();
        assert_eq!(trace3.path, FamilyPath::Semidefinite);
        assert_eq!(outcome3.verdict, Verdict::NotSd);
        match outcome3.obstruction.unwrap() {
            Obstruction::B2NotZero { matrix_index, .. } => assert_eq!(matrix_index, 2),
            Obstruction::KernelBlockNotSD { .. } => {}
            other => panic!("unexpected obstruction {other:?}"),
        }
    }

    #[test]
    fn family_semidefinite_preformed_blocks() {
        // Matrices handed over already in the special block
        // form: the pencil member is exactly diag(I_p, 0) and every other
        // member is [[K_i + C D_i C^T, C D_i], [D_i C^T, D_i]] with diagonal
        // D_i and diagonal K_i. The couplings then satisfy
        // A_i^2 = A_1^2 (A_1^3)^{-1} A_i^3 and the Schur complements K_i
        // commute, so the semidefinite path with the unit pencil must accept
        // without any preparatory reduction.
        let t = tol();
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.5, 1.0]);
        let block = |k: &[f64], d: &[f64]| {
            let kd = DMatrix::from_diagonal(&DVector::from_row_slice(k));
            let dd = DMatrix::from_diagonal(&DVector::from_row_slice(d));
            let cd = &c * &dd;
            let mut m = DMatrix::zeros(4, 4);
            m.view_mut((0, 0), (2, 2))
                .copy_from(&(kd + &cd * &dd.clone_owned().try_inverse().unwrap() * cd.transpose()));
            m.view_mut((0, 2), (2, 2)).copy_from(&cd);
            m.view_mut((2, 0), (2, 2)).copy_from(&cd.transpose());
            m.view_mut((2, 2), (2, 2)).copy_from(&dd);
            SymMat::from_matrix(m).unwrap()
        };
        let pencil_member = SymMat::from_diagonal(&[1.0, 1.0, 0.0, 0.0]).unwrap();
        let fam = vec![
            pencil_member,
            block(&[0.5, -1.0], &[1.0, 2.0]),
            block(&[2.0, 1.0], &[3.0, 0.5]),
        ];
        // Coupling consistency of the raw blocks, as constructed:
        // C D_1 (D_1)^{-1} D_2 == C D_2.
        let d1 = DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, 2.0]));
        let d2 = DMatrix::from_diagonal(&DVector::from_row_slice(&[3.0, 0.5]));
        let lhs = &c * &d1 * d1.clone().try_inverse().unwrap() * &d2;
        assert_abs_diff_eq!(lhs, &c * &d2, epsilon = 1e-12);

        let (outcome, trace) =
            sd_family_with_pencil(&fam, &[1.0, 0.0, 0.0], &opts(), &t).unwrap();
        assert_eq!(trace.path, FamilyPath::Semidefinite);
        assert_eq!(trace.kernel_dim, 2);
        assert_eq!(outcome.verdict, Verdict::Sd, "{:?}", outcome.obstruction);
        let cong = outcome.congruence.unwrap();
        for a in &fam {
            assert!(is_diagonal(&cong.apply(a).unwrap(), &t));
        }
        // The pencil member keeps its inertia (2 positive, kernel of 2).
        let diags = outcome.diagonals.unwrap();
        let pos = diags[0].iter().filter(|x| **x > 1e-8).count();
        let zero = diags[0].iter().filter(|x| x.abs() <= 1e-8).count();
        assert_eq!((pos, zero), (2, 2));
    }

    #[test]
    fn family_semidefinite_planted_is_sd() {
        let t = tol();
        // G^T D_i G with a shared zero coordinate: the best pencil is PSD
        // and the kernel recursion plus closing congruence must finish it.
        let g = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.3, -0.2, 0.5, //
                0.0, 1.0, 0.4, -0.1, //
                0.0, 0.0, 1.0, 0.2, //
                0.0, 0.0, 0.0, 1.0,
            ],
        );
        let ds = [
            vec![1.0, 2.0, 0.0, 0.0],
            vec![3.0, 1.0, 1.0, 0.0],
            vec![1.0, 1.0, -1.0, 0.0],
        ];
        let fam: Vec<SymMat> = ds
            .iter()
            .map(|d| {
                let dm = DMatrix::from_diagonal(&DVector::from_vec(d.clone()));
                SymMat::from_matrix(g.transpose() * dm * &g).unwrap()
            })
            .collect();
        let (outcome, trace) = sd_family_detailed(&fam, &opts(), &t).unwrap();
        assert_eq!(outcome.verdict, Verdict::Sd, "{:?}", outcome.obstruction);
        let cong = outcome.congruence.unwrap();
        for a in &fam {
            assert!(is_diagonal(&cong.apply(a).unwrap(), &t));
        }
        // Inertia of each image matches the planted diagonal.
        let diags = outcome.diagonals.unwrap();
        for (d, planted) in diags.iter().zip(ds.iter()) {
            let pos = d.iter().filter(|x| **x > 1e-8).count();
            let neg = d.iter().filter(|x| **x < -1e-8).count();
            let ppos = planted.iter().filter(|x| **x > 0.0).count();
            let pneg = planted.iter().filter(|x| **x < 0.0).count();
            assert_eq!((pos, neg), (ppos, pneg));
        }
        let _ = trace;
    }

    #[test]
    fn family_definite_normalization_needed() {
        // Raw matrices do not commute, but they share the form L C_i L^T
        // with commuting C_i, so the definite path must succeed where the
        // commuting shortcut cannot.
        let t = tol();
        let l = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 2.0, 1.0, 0.0, 0.5, -1.0, 1.0]);
        let c2 = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0]));
        let c3 = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 4.0, 0.5]));
        let a1 = SymMat::from_matrix(&l * l.transpose()).unwrap();
        let a2 = SymMat::from_matrix(&l * c2 * l.transpose()).unwrap();
        let a3 = SymMat::from_matrix(&l * c3 * l.transpose()).unwrap();
        assert!(!commute(&a2, &a3, &t).unwrap());
        let (outcome, trace) = sd_family_detailed(&[a1, a2, a3], &opts(), &t).unwrap();
        assert_eq!(outcome.verdict, Verdict::Sd, "{:?}", outcome.obstruction);
        assert_eq!(trace.path, FamilyPath::Definite);
    }

    #[test]
    fn family_commuting_shortcut() {
        let t = tol();
        let fam = vec![
            SymMat::from_diagonal(&[1.0, 2.0, 2.0]).unwrap(),
            SymMat::from_diagonal(&[3.0, 3.0, 4.0]).unwrap(),
            SymMat::from_diagonal(&[0.0, 5.0, -1.0]).unwrap(),
        ];
        let (outcome, trace) = sd_family_detailed(&fam, &opts(), &t).unwrap();
        assert_eq!(outcome.verdict, Verdict::Sd);
        assert_eq!(trace.path, FamilyPath::Commuting);
    }

    #[test]
    fn family_commutation_failure_named_pair() {
        let t = tol();
        // Identity commutes with everything; matrices 1 and 2 clash and the
        // pencil lambda = (1, 0, 0) is definite.
        let fam = vec![
            SymMat::identity(2),
            SymMat::from_diagonal(&[1.0, 2.0]).unwrap(),
            sym(&[&[0.0, 1.0], &[1.0, 0.0]]),
        ];
        let (outcome, _) = sd_family_detailed(&fam, &opts(), &t).unwrap();
        assert_eq!(outcome.verdict, Verdict::NotSd);
        match outcome.obstruction.unwrap() {
            Obstruction::CommutationFailure { i, j, .. } => {
                assert_eq!((i, j), (1, 2));
            }
            other => panic!("expected commutation failure, got {other:?}"),
        }
    }

    #[test]
    fn family_no_pencil_is_indeterminate() {
        let t = tol();
        let fam = vec![
            SymMat::from_diagonal(&[1.0, -1.0]).unwrap(),
            sym(&[&[0.0, 1.0], &[1.0, 0.0]]),
            SymMat::from_diagonal(&[2.0, -2.0]).unwrap(),
        ];
        let (outcome, trace) = sd_family_detailed(&fam, &opts(), &t).unwrap();
        assert_eq!(outcome.verdict, Verdict::Indeterminate);
        assert!(matches!(
            outcome.obstruction,
            Some(Obstruction::NoPencilFound { .. })
        ));
        assert_eq!(trace.path, FamilyPath::NoPath);
    }

    #[test]
    fn family_single_matrix() {
        let t = tol();
        let a = sym(&[&[2.0, 1.0], &[1.0, 3.0]]);
        let (outcome, trace) = sd_family_detailed(&[a], &opts(), &t).unwrap();
        assert_eq!(outcome.verdict, Verdict::Sd);
        assert_eq!(trace.path, FamilyPath::Single);
    }

    #[test]
    fn family_pair_routes_through_pair_pipeline() {
        let t = tol();
        let a = SymMat::from_diagonal(&[1.0, -1.0]).unwrap();
        let b = sym(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let (outcome, trace) = sd_family_detailed(&[a, b], &opts(), &t).unwrap();
        assert_eq!(trace.path, FamilyPath::Pair);
        assert_eq!(outcome.verdict, Verdict::NotSd);
        assert!(matches!(
            outcome.obstruction,
            Some(Obstruction::NonRealEigenvalue { .. })
        ));
    }

    #[test]
    fn family_order_permutation_consistent() {
        let t = tol();
        let fam = definite_trio();
        let perm = vec![fam[2].clone(), fam[0].clone(), fam[1].clone()];
        let v1 = sd_family(&fam, &opts(), &t).unwrap().verdict;
        let v2 = sd_family(&perm, &opts(), &t).unwrap().verdict;
        assert_eq!(v1, v2);
    }

    #[test]
    fn cdt_wrapper_matches_family() {
        let t = tol();
        let fam = definite_trio();
        let o1 = cdt_sd_check(&fam[0], &fam[1], &fam[2], &opts(), &t).unwrap();
        let o2 = sd_family(&fam, &opts(), &t).unwrap();
        assert_eq!(o1.verdict, o2.verdict);
    }
}
