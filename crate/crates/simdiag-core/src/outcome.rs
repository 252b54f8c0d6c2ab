//! Verdicts, certificates and structured obstructions for SD queries.

use crate::matrix::Congruence;
use crate::tol::BorderlineEvent;
use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Three-way answer to "is this family simultaneously diagonalizable by
/// congruence".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Sd,
    NotSd,
    Indeterminate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Sd => write!(f, "SD"),
            Verdict::NotSd => write!(f, "not SD"),
            Verdict::Indeterminate => write!(f, "indeterminate"),
        }
    }
}

/// Why a query is not SD, or why no verdict could be reached. The first six
/// variants are hard obstructions; the final three explain indeterminate
/// outcomes.
#[derive(Debug, Clone, PartialEq)]
pub enum Obstruction {
    /// The pencil inverse-product has a genuinely complex eigenvalue.
    NonRealEigenvalue { re: f64, im: f64 },
    /// An eigenvalue is defective: geometric multiplicity below algebraic.
    NonDiagonalizableJordan {
        eigenvalue: f64,
        algebraic: usize,
        geometric: usize,
    },
    /// Coupling between the range part and the common kernel survives the
    /// canonical reduction (the B2 block, or condition (i) in the family
    /// case). `matrix_index` names the offending input matrix.
    B2NotZero {
        matrix_index: usize,
        norm: f64,
        threshold: f64,
    },
    /// Two matrices that would have to commute do not. Indices refer to the
    /// caller's ordering of the inputs.
    CommutationFailure {
        i: usize,
        j: usize,
        commutator_norm: f64,
        threshold: f64,
    },
    /// The kernel-block subfamily is itself not SD.
    KernelBlockNotSD { inner: Box<Obstruction> },
    /// A coupling block is not the required common multiple of its diagonal
    /// block (condition (ii) in the family case).
    CouplingMismatch {
        matrix_index: usize,
        residual: f64,
        threshold: f64,
    },
    /// No positive semidefinite pencil combination was found. Heuristic:
    /// this never certifies that no pencil exists.
    NoPencilFound { detail: String },
    /// Rank/cluster decisions landed within a factor ten of their threshold,
    /// so any verdict would be a guess.
    Borderline { events: Vec<BorderlineEvent> },
    /// An eigenvector basis needed by the certificate is too ill-conditioned
    /// to trust.
    IllConditionedTransform { cond: f64, limit: f64 },
    /// The assembled certificate failed its own residual re-check.
    VerificationFailed { detail: String },
}

impl fmt::Display for Obstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Obstruction::NonRealEigenvalue { re, im } => {
                write!(f, "non-real pencil eigenvalue {re:.6e} + {im:.6e}i")
            }
            Obstruction::NonDiagonalizableJordan {
                eigenvalue,
                algebraic,
                geometric,
            } => write!(
                f,
                "defective eigenvalue {eigenvalue:.6e} (algebraic {algebraic}, geometric {geometric})"
            ),
            Obstruction::B2NotZero {
                matrix_index,
                norm,
                threshold,
            } => write!(
                f,
                "matrix {matrix_index}: kernel coupling block is nonzero (|B2| = {norm:.6e} > {threshold:.6e})"
            ),
            Obstruction::CommutationFailure {
                i,
                j,
                commutator_norm,
                threshold,
            } => write!(
                f,
                "matrices {i} and {j} do not commute where required (|[Ai,Aj]| = {commutator_norm:.6e} > {threshold:.6e})"
            ),
            Obstruction::KernelBlockNotSD { inner } => {
                write!(f, "kernel-block subfamily is not SD: {inner}")
            }
            Obstruction::CouplingMismatch {
                matrix_index,
                residual,
                threshold,
            } => write!(
                f,
                "matrix {matrix_index}: coupling block is not the common multiple of its diagonal block (residual {residual:.6e} > {threshold:.6e})"
            ),
            Obstruction::NoPencilFound { detail } => {
                write!(f, "no positive semidefinite pencil found ({detail})")
            }
            Obstruction::Borderline { events } => {
                write!(f, "borderline numeric decisions: ")?;
                for (k, e) in events.iter().enumerate() {
                    if k > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{e}")?;
                }
                Ok(())
            }
            Obstruction::IllConditionedTransform { cond, limit } => write!(
                f,
                "eigenvector basis too ill-conditioned (cond {cond:.6e} > {limit:.6e})"
            ),
            Obstruction::VerificationFailed { detail } => {
                write!(f, "certificate failed verification: {detail}")
            }
        }
    }
}

/// Result of an SD query over one or more symmetric matrices.
///
/// Invariants: `congruence` and `diagonals` are present exactly when the
/// verdict is [`Verdict::Sd`]; `obstruction` is present exactly otherwise.
/// `diagonals[i]` is the diagonal of `P^T A_i P` in the caller's input order.
#[derive(Debug, Clone)]
pub struct SdOutcome {
    pub verdict: Verdict,
    pub congruence: Option<Congruence>,
    pub diagonals: Option<Vec<Vec<f64>>>,
    pub obstruction: Option<Obstruction>,
}

impl SdOutcome {
    pub fn sd(congruence: Congruence, diagonals: Vec<Vec<f64>>) -> Self {
        SdOutcome {
            verdict: Verdict::Sd,
            congruence: Some(congruence),
            diagonals: Some(diagonals),
            obstruction: None,
        }
    }

    pub fn not_sd(obstruction: Obstruction) -> Self {
        SdOutcome {
            verdict: Verdict::NotSd,
            congruence: None,
            diagonals: None,
            obstruction: Some(obstruction),
        }
    }

    pub fn indeterminate(obstruction: Obstruction) -> Self {
        SdOutcome {
            verdict: Verdict::Indeterminate,
            congruence: None,
            diagonals: None,
            obstruction: Some(obstruction),
        }
    }

    pub fn is_sd(&self) -> bool {
        self.verdict == Verdict::Sd
    }
}
