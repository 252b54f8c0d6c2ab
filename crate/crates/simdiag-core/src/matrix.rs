//! Dense symmetric matrices, congruence transforms, and the small predicates
//! (diagonality, commutation) the SD algorithms are built from.

use crate::error::Error;
use crate::tol::TolerancePolicy;
use alloc::vec::Vec;
use nalgebra::DMatrix;

/// Dense real symmetric matrix. Construction symmetrizes via `(M + M^T)/2`
/// and rejects non-finite entries, so every value of this type is exactly
/// symmetric and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat {
    m: DMatrix<f64>,
}

fn ensure_finite(m: &DMatrix<f64>) -> Result<(), Error> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

impl SymMat {
    /// Symmetrizes an arbitrary square matrix by averaging.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self, Error> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: (m.nrows(), m.nrows()),
                got: (m.nrows(), m.ncols()),
            });
        }
        ensure_finite(&m)?;
        let sym = (&m + m.transpose()) * 0.5;
        Ok(SymMat { m: sym })
    }

    /// Builds from row-major nested slices; every row must have length `n`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, Error> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: (n, n),
                    got: (n, r.len()),
                });
            }
        }
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::from_matrix(m)
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self, Error> {
        if d.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = d.len();
        Ok(SymMat {
            m: DMatrix::from_fn(n, n, |i, j| if i == j { d[i] } else { 0.0 }),
        })
    }

    pub fn identity(n: usize) -> Self {
        SymMat {
            m: DMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        SymMat {
            m: DMatrix::zeros(n, n),
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    #[inline]
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn fro_norm(&self) -> f64 {
        self.m.norm()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.m[(i, i)]).collect()
    }

    /// Largest absolute off-diagonal entry.
    pub fn max_offdiag(&self) -> f64 {
        max_abs_offdiag(&self.m)
    }

    /// Quadratic form `x^T A x`.
    pub fn quad(&self, x: &[f64]) -> Result<f64, Error> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: (self.n(), 1),
                got: (x.len(), 1),
            });
        }
        let mut acc = 0.0;
        for i in 0..self.n() {
            let mut row = 0.0;
            for j in 0..self.n() {
                row += self.m[(i, j)] * x[j];
            }
            acc += x[i] * row;
        }
        Ok(acc)
    }
}

pub(crate) fn max_abs_offdiag(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                worst = worst.max(m[(i, j)].abs());
            }
        }
    }
    worst
}

/// `P^T A P`, re-symmetrized to wash out the floating-point asymmetry of the
/// two products. `P` must be square with the same dimension as `A` (it need
/// not be nonsingular here; wrap it in [`Congruence`] when it must be).
pub fn apply_congruence(p: &DMatrix<f64>, a: &SymMat) -> Result<SymMat, Error> {
    if p.nrows() != a.n() || p.ncols() != a.n() {
        return Err(Error::DimensionMismatch {
            expected: (a.n(), a.n()),
            got: (p.nrows(), p.ncols()),
        });
    }
    ensure_finite(p)?;
    let image = p.transpose() * a.matrix() * p;
    SymMat::from_matrix(image)
}

/// Frobenius norm of the commutator `AB - BA`.
pub fn commutator_norm(a: &SymMat, b: &SymMat) -> Result<f64, Error> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: (a.n(), a.n()),
            got: (b.n(), b.n()),
        });
    }
    let ab = a.matrix() * b.matrix();
    let ba = b.matrix() * a.matrix();
    Ok((ab - ba).norm())
}

/// Commutation test at the policy's `eps_commute`, relative to
/// `max(1, ||A||_F * ||B||_F)`.
pub fn commute(a: &SymMat, b: &SymMat, tol: &TolerancePolicy) -> Result<bool, Error> {
    let norm = commutator_norm(a, b)?;
    let scale = a.fro_norm() * b.fro_norm();
    Ok(norm <= tol.commute_threshold(scale))
}

/// Diagonality test at the policy's `eps_offdiag`, relative to
/// `max(1, ||A||_F)`.
pub fn is_diagonal(a: &SymMat, tol: &TolerancePolicy) -> bool {
    a.max_offdiag() <= tol.offdiag_threshold(a.fro_norm())
}

/// Largest and smallest singular values; (0, 0) for an empty matrix.
pub(crate) fn singular_extremes(m: &DMatrix<f64>) -> Result<(f64, f64), Error> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok((0.0, 0.0));
    }
    let svd = m
        .clone()
        .try_svd(false, false, f64::EPSILON, 0)
        .ok_or(Error::EigensolverFailure)?;
    let sv = svd.singular_values;
    let mut hi = 0.0_f64;
    let mut lo = f64::INFINITY;
    for s in sv.iter() {
        hi = hi.max(*s);
        lo = lo.min(*s);
    }
    Ok((hi, lo))
}

/// A nonsingular change of basis acting on symmetric matrices by
/// `A -> P^T A P`. Construction verifies nonsingularity
/// (`sigma_min > eps_rank * sigma_max`) and records the spectral condition
/// estimate `sigma_max / sigma_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct Congruence {
    p: DMatrix<f64>,
    cond: f64,
}

impl Congruence {
    pub fn new(p: DMatrix<f64>, tol: &TolerancePolicy) -> Result<Self, Error> {
        if p.nrows() != p.ncols() {
            return Err(Error::DimensionMismatch {
                expected: (p.nrows(), p.nrows()),
                got: (p.nrows(), p.ncols()),
            });
        }
        ensure_finite(&p)?;
        if p.nrows() == 0 {
            return Ok(Congruence { p, cond: 1.0 });
        }
        let (hi, lo) = singular_extremes(&p)?;
        if lo <= tol.eps_rank * hi {
            let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
            return Err(Error::SingularCongruence { cond });
        }
        Ok(Congruence { p, cond: hi / lo })
    }

    pub fn identity(n: usize) -> Self {
        Congruence {
            p: DMatrix::identity(n, n),
            cond: 1.0,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    #[inline]
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.p
    }

    pub fn cond_estimate(&self) -> f64 {
        self.cond
    }

    pub fn apply(&self, a: &SymMat) -> Result<SymMat, Error> {
        apply_congruence(&self.p, a)
    }

    /// Composition `self` then `next`: applying the result equals applying
    /// `self` first and `next` to the image, i.e. the factor is `P * Q`.
    pub fn then(&self, next: &Congruence, tol: &TolerancePolicy) -> Result<Congruence, Error> {
        if self.n() != next.n() {
            return Err(Error::DimensionMismatch {
                expected: (self.n(), self.n()),
                got: (next.n(), next.n()),
            });
        }
        Congruence::new(&self.p * next.matrix(), tol)
    }
}

/// Stacks square blocks along the diagonal.
pub(crate) fn block_diag(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((off, off), (k, k)).copy_from(b);
        off += k;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn construction_symmetrizes_by_averaging() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 3.0, 0.0]);
        let s = SymMat::from_matrix(m).unwrap();
        assert_eq!(s.matrix()[(0, 1)], 2.0);
        assert_eq!(s.matrix()[(1, 0)], 2.0);
    }

    #[test]
    fn rejects_non_finite() {
        let m = DMatrix::from_row_slice(1, 1, &[f64::NAN]);
        assert_eq!(SymMat::from_matrix(m), Err(Error::NonFinite));
        assert_eq!(SymMat::from_diagonal(&[1.0, f64::INFINITY]), Err(Error::NonFinite));
    }

    #[test]
    fn rejects_ragged_rows() {
        let rows = alloc::vec![alloc::vec![1.0, 2.0], alloc::vec![3.0]];
        assert!(SymMat::from_rows(&rows).is_err());
    }

    #[test]
    fn congruence_by_identity_is_identity() {
        let a = SymMat::from_rows(&[alloc::vec![1.0, 2.0], alloc::vec![2.0, 5.0]]).unwrap();
        let p = DMatrix::identity(2, 2);
        let out = apply_congruence(&p, &a).unwrap();
        assert_eq!(out, a);
    }

    #[test]
    fn congruence_by_scaled_identity_scales_quadratically() {
        let a = SymMat::from_rows(&[alloc::vec![1.0, 2.0], alloc::vec![2.0, 5.0]]).unwrap();
        let p = DMatrix::identity(2, 2) * 2.0;
        let out = apply_congruence(&p, &a).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(out.matrix()[(i, j)], 4.0 * a.matrix()[(i, j)]);
            }
        }
    }

    #[test]
    fn congruence_dimension_mismatch() {
        let a = SymMat::identity(2);
        let p = DMatrix::identity(3, 3);
        assert!(apply_congruence(&p, &a).is_err());
    }

    #[test]
    fn commute_detects_diagonal_pairs_and_rejects_generic() {
        let tol = TolerancePolicy::default();
        let d1 = SymMat::from_diagonal(&[1.0, 2.0]).unwrap();
        let d2 = SymMat::from_diagonal(&[-3.0, 5.0]).unwrap();
        assert!(commute(&d1, &d2, &tol).unwrap());

        let a = SymMat::from_rows(&[alloc::vec![1.0, 2.0], alloc::vec![2.0, 20.0]]).unwrap();
        let b = SymMat::from_rows(&[alloc::vec![-1.0, -2.0], alloc::vec![-2.0, -28.0]]).unwrap();
        assert!(!commute(&a, &b, &tol).unwrap());
    }

    #[test]
    fn diagonality_is_relative_to_scale() {
        let tol = TolerancePolicy::default();
        // Absolute off-diagonal 1e-6 fails at scale ~1 but passes at scale 1e4.
        let small = SymMat::from_rows(&[alloc::vec![1.0, 1e-6], alloc::vec![1e-6, 1.0]]).unwrap();
        assert!(!is_diagonal(&small, &tol));
        let big = SymMat::from_rows(&[alloc::vec![1e4, 1e-6], alloc::vec![1e-6, 1e4]]).unwrap();
        assert!(is_diagonal(&big, &tol));
    }

    #[test]
    fn congruence_rejects_singular_factor() {
        let tol = TolerancePolicy::default();
        let p = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        match Congruence::new(p, &tol) {
            Err(Error::SingularCongruence { .. }) => {}
            other => panic!("expected SingularCongruence, got {other:?}"),
        }
    }

    #[test]
    fn congruence_composition_matches_sequential_application() {
        let tol = TolerancePolicy::default();
        let a = SymMat::from_rows(&[alloc::vec![2.0, 1.0], alloc::vec![1.0, 3.0]]).unwrap();
        let p = Congruence::new(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]), &tol).unwrap();
        let q = Congruence::new(DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 1.0, 1.0]), &tol).unwrap();
        let seq = q.apply(&p.apply(&a).unwrap()).unwrap();
        let composed = p.then(&q, &tol).unwrap().apply(&a).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(seq.matrix()[(i, j)], composed.matrix()[(i, j)], epsilon = 1e-12);
            }
        }
    }
}
