//! The tolerance policy behind every yes/no numeric decision in this crate.
//!
//! All thresholds are relative: a quantity measured against a matrix of
//! Frobenius norm `s` counts as zero when it is at most `eps * max(1, s)`.
//! A decision whose quantity lands within a factor of ten of its threshold is
//! recorded as borderline; the top-level SD drivers downgrade their verdict to
//! indeterminate instead of pretending the call was clean.

use crate::error::Error;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// Relative tolerances for rank cuts, off-diagonal mass, eigenvalue
/// clustering and commutator tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TolerancePolicy {
    /// Rank decisions: eigenvalues / singular values below
    /// `eps_rank * max(1, ||M||_F)` count as zero.
    pub eps_rank: f64,
    /// Off-diagonal mass allowed in a matrix that must be diagonal.
    pub eps_offdiag: f64,
    /// Eigenvalues closer than `eps_cluster * max(1, spectral radius)` are
    /// treated as one cluster; also bounds the imaginary part tolerated in a
    /// nominally real eigenvalue.
    pub eps_cluster: f64,
    /// Commutator test: `||AB - BA||_F <= eps_commute * max(1, ||A|| ||B||)`.
    pub eps_commute: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy {
            eps_rank: 1e-10,
            eps_offdiag: 1e-8,
            eps_cluster: 1e-6,
            eps_commute: 1e-10,
        }
    }
}

impl TolerancePolicy {
    pub fn new(
        eps_rank: f64,
        eps_offdiag: f64,
        eps_cluster: f64,
        eps_commute: f64,
    ) -> Result<Self, Error> {
        let all = [eps_rank, eps_offdiag, eps_cluster, eps_commute];
        if all.iter().any(|e| !e.is_finite() || *e <= 0.0) {
            return Err(Error::Invalid(String::from(
                "tolerances must be strictly positive and finite",
            )));
        }
        Ok(TolerancePolicy {
            eps_rank,
            eps_offdiag,
            eps_cluster,
            eps_commute,
        })
    }

    /// Absolute threshold for a relative tolerance at the given scale.
    #[inline]
    pub fn absolute(eps: f64, scale: f64) -> f64 {
        eps * scale.max(1.0)
    }

    #[inline]
    pub fn rank_threshold(&self, scale: f64) -> f64 {
        Self::absolute(self.eps_rank, scale)
    }

    #[inline]
    pub fn offdiag_threshold(&self, scale: f64) -> f64 {
        Self::absolute(self.eps_offdiag, scale)
    }

    #[inline]
    pub fn cluster_threshold(&self, scale: f64) -> f64 {
        Self::absolute(self.eps_cluster, scale)
    }

    #[inline]
    pub fn commute_threshold(&self, scale: f64) -> f64 {
        Self::absolute(self.eps_commute, scale)
    }
}

/// Outcome of a single thresholded zero test.
#[derive(Debug, Clone, Copy)]
pub struct ZeroTest {
    pub is_zero: bool,
    /// Quantity within a factor of ten of the threshold on either side.
    pub borderline: bool,
    pub quantity: f64,
    pub threshold: f64,
}

/// Tests `|quantity| <= threshold` and flags the borderline band.
pub fn zero_test(quantity: f64, threshold: f64) -> ZeroTest {
    let q = quantity.abs();
    ZeroTest {
        is_zero: q <= threshold,
        borderline: q > threshold / 10.0 && q < threshold * 10.0,
        quantity: q,
        threshold,
    }
}

/// One borderline decision observed during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct BorderlineEvent {
    /// What was being decided, e.g. "eigenvalue rank cut".
    pub context: String,
    pub quantity: f64,
    pub threshold: f64,
}

impl core::fmt::Display for BorderlineEvent {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "{}: quantity {:e} within 10x of threshold {:e}",
            self.context, self.quantity, self.threshold
        )
    }
}

/// Accumulates borderline decisions so the caller can downgrade its verdict.
#[derive(Debug, Default, Clone)]
pub struct DecisionLog {
    events: Vec<BorderlineEvent>,
}

impl DecisionLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Runs a zero test, records it if borderline, returns whether the
    /// quantity counts as zero.
    pub fn is_zero(&mut self, context: &str, quantity: f64, threshold: f64) -> bool {
        let t = zero_test(quantity, threshold);
        if t.borderline {
            self.events.push(BorderlineEvent {
                context: format!("{context}"),
                quantity: t.quantity,
                threshold,
            });
        }
        t.is_zero
    }

    pub fn is_clean(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[BorderlineEvent] {
        &self.events
    }

    pub fn into_events(self) -> Vec<BorderlineEvent> {
        self.events
    }

    pub fn absorb(&mut self, other: DecisionLog) {
        self.events.extend(other.events);
    }
}
