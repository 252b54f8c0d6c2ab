//! Simultaneous diagonalization (SD) of real symmetric matrices by congruence.
//!
//! Two or more symmetric matrices `A_1, ..., A_m` are simultaneously
//! diagonalizable by congruence when a single nonsingular `P` makes every
//! `P^T A_i P` diagonal. This is a different (and weaker) requirement than
//! simultaneous diagonalization by similarity: `P` need not be orthogonal and
//! the diagonal values are not eigenvalues.
//!
//! The crate decides SD for pairs and families, constructs the congruence
//! certificate when one exists, reports a structured obstruction when none
//! does, and rewrites quadratically constrained quadratic programs whose
//! matrices are SD into linear or second-order cone models over the squared
//! variables.
//!
//! Everything here is deterministic: the only randomness (pencil search
//! multi-start, sampling verification) is driven by explicit seeds. The crate
//! is `no_std`-compatible (it needs `alloc` but no OS services), so the
//! algorithms can be embedded; IO and file formats live in the companion CLI
//! crate.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod error;
pub mod family;
pub mod matrix;
pub mod outcome;
pub mod pair;
pub mod qcqp;
pub mod spectral;
pub mod tol;

pub use error::Error;
pub use family::{
    cdt_sd_check, classify_pencil, commuting_family_diag, find_pencil, mu_search, sd_family,
    sd_family_detailed, sd_family_with_pencil, CommutingError, FamilyPath, FamilyTrace,
    FindPencilOptions, MuError, PencilCertificate, PencilClass, PencilEval,
};
pub use matrix::{apply_congruence, commutator_norm, commute, is_diagonal, Congruence, SymMat};
pub use outcome::{Obstruction, SdOutcome, Verdict};
pub use pair::{
    canonical_pair_form, real_diag_test, sd_pair, sd_pair_detailed, CanonicalPairForm,
    EigCluster, PairTrace, RealDiagCertificate, RealDiagOutcome,
};
pub use qcqp::{
    classify_exactness, classify_problem, diagonalize_qcqp, emit_lp, emit_socp, homogenize,
    verify_reformulation, ConicModel, ConstraintSense, DiagConstraint, DiagQcqp,
    DiagonalizeResult, ExactnessReport, ExactnessStatus, HomogenizationMap, ModelKind,
    ModelProvenance, ModelRow, ModelVar, ProblemKind, QcqpConstraint, QcqpProblem,
    ReformulationCheck, RowSense,
};
pub use spectral::{inertia, spectral_decompose, Inertia, SpectralDecomposition};
pub use tol::{BorderlineEvent, DecisionLog, TolerancePolicy};
