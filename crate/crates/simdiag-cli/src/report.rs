//! Deterministic plain-text run reports.
//!
//! Every quantity is printed through the fixed-precision formatters here, so
//! identical inputs and flags produce byte-identical output. Residuals shown
//! in a report are recomputed from the certificate that is being reported,
//! never copied out of the algorithm's internal state.

use simdiag_core::Obstruction;

/// Fixed-precision scientific formatting; negative zero collapses to zero so
/// reruns cannot differ in sign-of-zero.
pub fn fnum(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.12e}")
}

pub fn fvec(xs: &[f64]) -> String {
    let body: Vec<String> = xs.iter().map(|x| fnum(*x)).collect();
    format!("[{}]", body.join(", "))
}

/// Inertia of a diagonal: entries within `thr` of zero count as zero.
pub fn inertia_of_diag(d: &[f64], thr: f64) -> (usize, usize, usize) {
    let pos = d.iter().filter(|x| **x > thr).count();
    let neg = d.iter().filter(|x| **x < -thr).count();
    (pos, neg, d.len() - pos - neg)
}

pub fn inertia_str(i: (usize, usize, usize)) -> String {
    format!("({}, {}, {})", i.0, i.1, i.2)
}

/// Stable machine-readable name of an obstruction variant.
pub fn obstruction_kind(o: &Obstruction) -> &'static str {
    match o {
        Obstruction::NonRealEigenvalue { .. } => "NonRealEigenvalue",
        Obstruction::NonDiagonalizableJordan { .. } => "NonDiagonalizableJordan",
        Obstruction::B2NotZero { .. } => "B2NotZero",
        Obstruction::CommutationFailure { .. } => "CommutationFailure",
        Obstruction::KernelBlockNotSD { .. } => "KernelBlockNotSD",
        Obstruction::CouplingMismatch { .. } => "CouplingMismatch",
        Obstruction::NoPencilFound { .. } => "NoPencilFound",
        Obstruction::Borderline { .. } => "Borderline",
        Obstruction::IllConditionedTransform { .. } => "IllConditionedTransform",
        Obstruction::VerificationFailed { .. } => "VerificationFailed",
    }
}

/// Which structural condition of the family criterion an obstruction breaks,
/// when it maps to one.
pub fn failed_condition(o: &Obstruction) -> Option<String> {
    match o {
        Obstruction::B2NotZero { .. } => Some(String::from(
            "(i) coupling into the common kernel must vanish",
        )),
        Obstruction::CouplingMismatch { .. } => Some(String::from(
            "(ii) each coupling block must be the shared coupling scaled by its kernel diagonal",
        )),
        Obstruction::CommutationFailure { .. } => Some(String::from(
            "(iii) the reduced range blocks must commute",
        )),
        Obstruction::KernelBlockNotSD { inner } => failed_condition(inner)
            .map(|c| format!("{c} (inside the kernel subfamily)"))
            .or(Some(String::from("kernel subfamily is not SD"))),
        _ => None,
    }
}

/// Line-oriented report builder.
#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<String>,
}

impl Report {
    pub fn new() -> Self {
        Report { lines: Vec::new() }
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    pub fn kv(&mut self, key: &str, value: impl AsRef<str>) {
        self.lines.push(format!("{key}: {}", value.as_ref()));
    }

    pub fn finish(self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }
}
