//! QCQP modeling, homogenization, SD-based diagonalization, and conic model
//! emission.
//!
//! Problems follow the convention `f0(x) = 1/2 x' A0 x + a0' x` for the
//! objective and `fi(x) = 1/2 x' Ai x + ai' x + 1/2 di` for constraints,
//! with senses `<= 0`, `= 0`, or two-sided `l <= fi(x) <= u`. A successful
//! SD of the involved matrices rewrites the problem in separable variables;
//! the separable form is then emitted as an SOCP (single- and
//! two-constraint shapes, using `y_i` for `1/2 x_i^2`) or an LP
//! (homogeneous shapes, using `y_k` for `x_k^2`).

use crate::error::Error;
use crate::family::{cdt_sd_check, sd_family, FindPencilOptions};
use crate::matrix::{Congruence, SymMat};
use crate::outcome::SdOutcome;
use crate::pair::sd_pair;
use crate::tol::TolerancePolicy;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Constraint sense: `f(x) <= 0`, `f(x) = 0`, or `l <= f(x) <= u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstraintSense {
    Le,
    Eq,
    Interval { l: f64, u: f64 },
}

/// One quadratic constraint `1/2 x' A x + a' x + 1/2 d  (sense)`.
#[derive(Debug, Clone)]
pub struct QcqpConstraint {
    pub a: SymMat,
    pub lin: DVector<f64>,
    pub d: f64,
    pub sense: ConstraintSense,
}

impl QcqpConstraint {
    pub fn new(
        a: SymMat,
        lin: DVector<f64>,
        d: f64,
        sense: ConstraintSense,
    ) -> Result<Self, Error> {
        if lin.len() != a.n() {
            return Err(Error::DimensionMismatch {
                expected: (a.n(), 1),
                got: (lin.len(), 1),
            });
        }
        if !d.is_finite() || lin.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        if let ConstraintSense::Interval { l, u } = sense {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::Invalid(String::from(
                    "interval sense requires finite l < u",
                )));
            }
        }
        Ok(QcqpConstraint { a, lin, d, sense })
    }
}

/// A QCQP instance in the fixed convention above. Minimization throughout.
#[derive(Debug, Clone)]
pub struct QcqpProblem {
    pub n: usize,
    pub a0: SymMat,
    pub lin0: DVector<f64>,
    pub constraints: Vec<QcqpConstraint>,
}

impl QcqpProblem {
    pub fn new(a0: SymMat, lin0: DVector<f64>) -> Result<Self, Error> {
        let n = a0.n();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        if lin0.len() != n {
            return Err(Error::DimensionMismatch {
                expected: (n, 1),
                got: (lin0.len(), 1),
            });
        }
        if lin0.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(QcqpProblem {
            n,
            a0,
            lin0,
            constraints: Vec::new(),
        })
    }

    pub fn with_constraint(mut self, c: QcqpConstraint) -> Result<Self, Error> {
        if c.a.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: (self.n, self.n),
                got: (c.a.n(), c.a.n()),
            });
        }
        self.constraints.push(c);
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn all_linear_zero(&self) -> bool {
        self.lin0.iter().all(|x| *x == 0.0)
            && self
                .constraints
                .iter()
                .all(|c| c.lin.iter().all(|x| *x == 0.0))
    }

    pub fn eval_objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(self.a0.matrix() * x)) + self.lin0.dot(x)
    }

    /// Value of `fi(x) = 1/2 x' Ai x + ai' x + 1/2 di`.
    pub fn eval_constraint(&self, i: usize, x: &DVector<f64>) -> f64 {
        let c = &self.constraints[i];
        0.5 * x.dot(&(c.a.matrix() * x)) + c.lin.dot(x) + 0.5 * c.d
    }
}

/// Structural shape of an instance, deciding the diagonalization route and
/// the emitted model family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Trs,
    Gtrs,
    Igtrs,
    TwoConstraint,
    HomogeneousMulti,
    GeneralMulti,
}

impl core::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let s = match self {
            ProblemKind::Trs => "TRS",
            ProblemKind::Gtrs => "GTRS",
            ProblemKind::Igtrs => "IGTRS",
            ProblemKind::TwoConstraint => "two-constraint",
            ProblemKind::HomogeneousMulti => "homogeneous-multi",
            ProblemKind::GeneralMulti => "general-multi",
        };
        f.write_str(s)
    }
}

/// Classifies the shape of a problem. Precedence: identity-ball single
/// constraint (TRS), then two-sided single constraint (IGTRS), then exactly
/// two constraints, then fully homogeneous instances of any size, then the
/// single-constraint and general fallbacks.
pub fn classify_problem(p: &QcqpProblem, tol: &TolerancePolicy) -> ProblemKind {
    let m = p.m();
    if m == 1 {
        let c = &p.constraints[0];
        match c.sense {
            ConstraintSense::Interval { .. } => return ProblemKind::Igtrs,
            ConstraintSense::Le | ConstraintSense::Eq => {
                let dev = (c.a.matrix() - DMatrix::identity(p.n, p.n)).norm();
                if dev <= tol.offdiag_threshold(c.a.fro_norm()) {
                    return ProblemKind::Trs;
                }
            }
        }
    }
    if m == 2 {
        return ProblemKind::TwoConstraint;
    }
    if p.all_linear_zero() {
        return ProblemKind::HomogeneousMulti;
    }
    if m == 1 {
        return ProblemKind::Gtrs;
    }
    ProblemKind::GeneralMulti
}

/// Records how a problem was lifted to homogeneous form, for solution
/// recovery.
#[derive(Debug, Clone, Copy)]
pub struct HomogenizationMap {
    pub original_n: usize,
    /// Index of the added variable (`= original_n`).
    pub lifted_index: usize,
    /// Index of the added normalization constraint in the lifted problem.
    pub normalization_constraint: usize,
}

/// Lifts the problem to dimension `n + 1` with border matrices
/// `Bi = [[Ai, ai], [ai', di]]` (the objective gets corner 0) and appends
/// the normalization constraint `x_{n+1}^2 = 1`. Linear terms and constant
/// offsets vanish in the lifted problem.
pub fn homogenize(p: &QcqpProblem) -> Result<(QcqpProblem, HomogenizationMap), Error> {
    let n = p.n;
    let border = |a: &SymMat, lin: &DVector<f64>, corner: f64| -> Result<SymMat, Error> {
        let mut b = DMatrix::zeros(n + 1, n + 1);
        b.view_mut((0, 0), (n, n)).copy_from(a.matrix());
        for i in 0..n {
            b[(i, n)] = lin[i];
            b[(n, i)] = lin[i];
        }
        b[(n, n)] = corner;
        SymMat::from_matrix(b)
    };

    let b0 = border(&p.a0, &p.lin0, 0.0)?;
    let mut lifted = QcqpProblem::new(b0, DVector::zeros(n + 1))?;
    for c in &p.constraints {
        let bi = border(&c.a, &c.lin, c.d)?;
        lifted = lifted.with_constraint(QcqpConstraint::new(
            bi,
            DVector::zeros(n + 1),
            0.0,
            c.sense,
        )?)?;
    }
    let mut norm_mat = DMatrix::zeros(n + 1, n + 1);
    norm_mat[(n, n)] = 1.0;
    lifted = lifted.with_constraint(QcqpConstraint::new(
        SymMat::from_matrix(norm_mat)?,
        DVector::zeros(n + 1),
        -1.0,
        ConstraintSense::Eq,
    )?)?;
    let m = p.m();
    Ok((
        lifted,
        HomogenizationMap {
            original_n: n,
            lifted_index: n,
            normalization_constraint: m,
        },
    ))
}

/// One diagonalized constraint: `sum 1/2 alpha_k x_k^2 + beta' x + 1/2 d`.
#[derive(Debug, Clone)]
pub struct DiagConstraint {
    pub alpha: Vec<f64>,
    pub beta: DVector<f64>,
    pub d: f64,
    pub sense: ConstraintSense,
}

/// A problem rewritten in separable variables by a congruence `P`:
/// the objective becomes `sum 1/2 delta_k x_k^2 + epsilon' x` and each
/// constraint a [`DiagConstraint`]. `working` is the problem the congruence
/// actually diagonalized (the original, or its homogenization).
#[derive(Debug, Clone)]
pub struct DiagQcqp {
    pub kind: ProblemKind,
    pub p: Congruence,
    pub delta: Vec<f64>,
    pub epsilon: DVector<f64>,
    pub constraints: Vec<DiagConstraint>,
    pub homogenization: Option<HomogenizationMap>,
    pub working: QcqpProblem,
}

impl DiagQcqp {
    pub fn eval_objective(&self, x: &DVector<f64>) -> f64 {
        let q: f64 = self
            .delta
            .iter()
            .zip(x.iter())
            .map(|(a, v)| 0.5 * a * v * v)
            .sum();
        q + self.epsilon.dot(x)
    }

    pub fn eval_constraint(&self, i: usize, x: &DVector<f64>) -> f64 {
        let c = &self.constraints[i];
        let q: f64 = c
            .alpha
            .iter()
            .zip(x.iter())
            .map(|(a, v)| 0.5 * a * v * v)
            .sum();
        q + c.beta.dot(x) + 0.5 * c.d
    }
}

/// Result of [`diagonalize_qcqp`]: either the separable rewrite or the SD
/// outcome explaining why there is none.
#[derive(Debug, Clone)]
pub enum DiagonalizeResult {
    Diagonalized(DiagQcqp),
    /// SD failed or was undecidable; carries the verdict and obstruction.
    NotDiagonalized(SdOutcome),
}

fn assemble_diag(
    kind: ProblemKind,
    outcome: SdOutcome,
    working: QcqpProblem,
    homogenization: Option<HomogenizationMap>,
) -> DiagonalizeResult {
    let Some(cong) = outcome.congruence.clone() else {
        return DiagonalizeResult::NotDiagonalized(outcome);
    };
    let diags = outcome.diagonals.clone().expect("SD outcome carries diagonals");
    let pt = cong.matrix().transpose();
    let epsilon = &pt * &working.lin0;
    let constraints = working
        .constraints
        .iter()
        .enumerate()
        .map(|(i, c)| DiagConstraint {
            alpha: diags[i + 1].clone(),
            beta: &pt * &c.lin,
            d: c.d,
            sense: c.sense,
        })
        .collect();
    DiagonalizeResult::Diagonalized(DiagQcqp {
        kind,
        p: cong,
        delta: diags[0].clone(),
        epsilon,
        constraints,
        homogenization,
        working,
    })
}

/// Diagonalizes the quadratic forms of a problem via SD. Single-constraint
/// shapes use the raw pair (linear terms survive into the separable form),
/// the two-constraint shape uses the raw triple, homogeneous families are
/// used as given, and everything else is homogenized first.
pub fn diagonalize_qcqp(
    p: &QcqpProblem,
    opts: &FindPencilOptions,
    tol: &TolerancePolicy,
) -> Result<DiagonalizeResult, Error> {
    let kind = classify_problem(p, tol);
    match kind {
        ProblemKind::Trs | ProblemKind::Gtrs | ProblemKind::Igtrs => {
            let c = &p.constraints[0];
            let outcome = sd_pair(&p.a0, &c.a, tol)?;
            Ok(assemble_diag(kind, outcome, p.clone(), None))
        }
        ProblemKind::TwoConstraint => {
            let outcome = cdt_sd_check(
                &p.a0,
                &p.constraints[0].a,
                &p.constraints[1].a,
                opts,
                tol,
            )?;
            Ok(assemble_diag(kind, outcome, p.clone(), None))
        }
        ProblemKind::HomogeneousMulti => {
            let mut family = vec![p.a0.clone()];
            family.extend(p.constraints.iter().map(|c| c.a.clone()));
            let outcome = sd_family(&family, opts, tol)?;
            Ok(assemble_diag(kind, outcome, p.clone(), None))
        }
        ProblemKind::GeneralMulti => {
            let (lifted, map) = homogenize(p)?;
            let mut family = vec![lifted.a0.clone()];
            family.extend(lifted.constraints.iter().map(|c| c.a.clone()));
            let outcome = sd_family(&family, opts, tol)?;
            Ok(assemble_diag(kind, outcome, lifted, Some(map)))
        }
    }
}

/// Model family of an emitted conic program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Lp,
    Socp,
}

/// Linear row sense in an emitted model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
}

#[derive(Debug, Clone)]
pub struct ModelVar {
    pub name: String,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ModelRow {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
    pub sense: RowSense,
}

/// Everything needed to map model variables back to the separable and
/// original coordinates, and to reconstruct the diagonalized data exactly.
#[derive(Debug, Clone)]
pub struct ModelProvenance {
    pub kind: ProblemKind,
    /// The congruence matrix, row by row.
    pub p: DMatrix<f64>,
    pub delta: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub alphas: Vec<Vec<f64>>,
    pub betas: Vec<Vec<f64>>,
    pub ds: Vec<f64>,
    pub senses: Vec<ConstraintSense>,
    /// Human-readable recovery rule for the y variables.
    pub recovery: String,
    pub lifted: bool,
    pub original_n: usize,
}

/// An emitted LP or SOCP. LP models have only `y` variables with `y >= 0`
/// bounds; SOCP models have `x` then `y` variables and one rotated-cone link
/// `1/2 x_i^2 <= y_i` per coordinate pair.
#[derive(Debug, Clone)]
pub struct ConicModel {
    pub kind: ModelKind,
    pub vars: Vec<ModelVar>,
    pub obj: Vec<f64>,
    pub rows: Vec<ModelRow>,
    /// Rotated-cone links as `(x_index, y_index)` pairs; empty for LP.
    pub cones: Vec<(usize, usize)>,
    pub provenance: ModelProvenance,
}

fn provenance_of(d: &DiagQcqp, recovery: &str) -> ModelProvenance {
    ModelProvenance {
        kind: d.kind,
        p: d.p.matrix().clone(),
        delta: d.delta.clone(),
        epsilon: d.epsilon.iter().copied().collect(),
        alphas: d.constraints.iter().map(|c| c.alpha.clone()).collect(),
        betas: d
            .constraints
            .iter()
            .map(|c| c.beta.iter().copied().collect())
            .collect(),
        ds: d.constraints.iter().map(|c| c.d).collect(),
        senses: d.constraints.iter().map(|c| c.sense).collect(),
        recovery: String::from(recovery),
        lifted: d.homogenization.is_some(),
        original_n: d
            .homogenization
            .map_or(d.working.n, |h| h.original_n),
    }
}

/// Emits the homogeneous LP: variables `y_k >= 0` standing for `x_k^2`,
/// objective `sum 1/2 delta_k y_k`, and one row
/// `sum 1/2 alpha_k y_k + 1/2 d (sense) 0` per constraint (two opposed rows
/// for a two-sided constraint). Requires every linear term to be zero.
pub fn emit_lp(d: &DiagQcqp) -> Result<ConicModel, Error> {
    if !matches!(
        d.kind,
        ProblemKind::HomogeneousMulti | ProblemKind::GeneralMulti
    ) {
        return Err(Error::Invalid(format!(
            "LP emission requires a homogeneous shape, got {}",
            d.kind
        )));
    }
    let zero_lin = d.epsilon.iter().all(|x| *x == 0.0)
        && d.constraints
            .iter()
            .all(|c| c.beta.iter().all(|x| *x == 0.0));
    if !zero_lin {
        return Err(Error::Invalid(String::from(
            "LP emission requires zero linear terms",
        )));
    }
    let n = d.delta.len();
    let vars = (0..n)
        .map(|k| ModelVar {
            name: format!("y{}", k + 1),
            lower: Some(0.0),
            upper: None,
        })
        .collect();
    let obj: Vec<f64> = d.delta.iter().map(|a| 0.5 * a).collect();
    let mut rows = Vec::new();
    for c in &d.constraints {
        let coeffs: Vec<f64> = c.alpha.iter().map(|a| 0.5 * a).collect();
        match c.sense {
            ConstraintSense::Le => rows.push(ModelRow {
                coeffs,
                rhs: -0.5 * c.d,
                sense: RowSense::Le,
            }),
            ConstraintSense::Eq => rows.push(ModelRow {
                coeffs,
                rhs: -0.5 * c.d,
                sense: RowSense::Eq,
            }),
            ConstraintSense::Interval { l, u } => {
                let neg: Vec<f64> = coeffs.iter().map(|x| -x).collect();
                rows.push(ModelRow {
                    coeffs,
                    rhs: u - 0.5 * c.d,
                    sense: RowSense::Le,
                });
                rows.push(ModelRow {
                    coeffs: neg,
                    rhs: 0.5 * c.d - l,
                    sense: RowSense::Le,
                });
            }
        }
    }
    Ok(ConicModel {
        kind: ModelKind::Lp,
        vars,
        obj,
        rows,
        cones: Vec::new(),
        provenance: provenance_of(d, "x_k = +/- sqrt(y_k)"),
    })
}

/// Emits the SOCP: variables `x` then `y` with `y_i` standing for
/// `1/2 x_i^2`, objective `epsilon' x + delta' y`, one row
/// `beta' x + alpha' y + 1/2 d (sense) 0` per constraint (two opposed rows
/// for a two-sided constraint), and the `n` rotated-cone links.
pub fn emit_socp(d: &DiagQcqp) -> Result<ConicModel, Error> {
    if !matches!(
        d.kind,
        ProblemKind::Trs | ProblemKind::Gtrs | ProblemKind::Igtrs | ProblemKind::TwoConstraint
    ) {
        return Err(Error::Invalid(format!(
            "SOCP emission supports single- and two-constraint shapes, got {}",
            d.kind
        )));
    }
    let n = d.delta.len();
    let mut vars: Vec<ModelVar> = (0..n)
        .map(|k| ModelVar {
            name: format!("x{}", k + 1),
            lower: None,
            upper: None,
        })
        .collect();
    vars.extend((0..n).map(|k| ModelVar {
        name: format!("y{}", k + 1),
        lower: None,
        upper: None,
    }));
    let mut obj = vec![0.0; 2 * n];
    for k in 0..n {
        obj[k] = d.epsilon[k];
        obj[n + k] = d.delta[k];
    }
    let stack = |c: &DiagConstraint| -> Vec<f64> {
        let mut v = vec![0.0; 2 * n];
        for k in 0..n {
            v[k] = c.beta[k];
            v[n + k] = c.alpha[k];
        }
        v
    };
    let mut rows = Vec::new();
    for c in &d.constraints {
        let coeffs = stack(c);
        match c.sense {
            ConstraintSense::Le => rows.push(ModelRow {
                coeffs,
                rhs: -0.5 * c.d,
                sense: RowSense::Le,
            }),
            ConstraintSense::Eq => rows.push(ModelRow {
                coeffs,
                rhs: -0.5 * c.d,
                sense: RowSense::Eq,
            }),
            ConstraintSense::Interval { l, u } => {
                let neg: Vec<f64> = coeffs.iter().map(|x| -x).collect();
                rows.push(ModelRow {
                    coeffs,
                    rhs: u - 0.5 * c.d,
                    sense: RowSense::Le,
                });
                rows.push(ModelRow {
                    coeffs: neg,
                    rhs: 0.5 * c.d - l,
                    sense: RowSense::Le,
                });
            }
        }
    }
    let cones = (0..n).map(|k| (k, n + k)).collect();
    Ok(ConicModel {
        kind: ModelKind::Socp,
        vars,
        obj,
        rows,
        cones,
        provenance: provenance_of(d, "y_i = 1/2 x_i^2 at cone-tight points"),
    })
}

/// Exactness of the conic relaxation for a diagonalized problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactnessStatus {
    ExactAlways,
    ConditionallyExact,
    Unknown,
}

impl core::fmt::Display for ExactnessStatus {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let s = match self {
            ExactnessStatus::ExactAlways => "exact-always",
            ExactnessStatus::ConditionallyExact => "conditionally-exact",
            ExactnessStatus::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct ExactnessReport {
    pub status: ExactnessStatus,
    /// Stable machine-readable tag for the rationale.
    pub tag: String,
    pub condition: String,
}

/// Classifies relaxation exactness by problem shape. Single-constraint
/// shapes are exact outright; a two-sided constraint is exact because its
/// two boundaries cannot bind simultaneously; the two-constraint shape is
/// exact when a KKT multiplier of the first two constraints vanishes (not
/// checked here, it requires a solve); anything else is unknown.
pub fn classify_exactness(d: &DiagQcqp) -> ExactnessReport {
    match d.kind {
        ProblemKind::Trs | ProblemKind::Gtrs => ExactnessReport {
            status: ExactnessStatus::ExactAlways,
            tag: String::from("single_constraint_socp_exact"),
            condition: String::from(
                "single quadratic constraint: the SOCP relaxation is exact",
            ),
        },
        ProblemKind::Igtrs => ExactnessReport {
            status: ExactnessStatus::ExactAlways,
            tag: String::from("interval_bounds_not_simultaneously_binding"),
            condition: String::from(
                "two-sided constraint: the lower and upper boundaries cannot bind simultaneously, so the relaxation is exact",
            ),
        },
        ProblemKind::TwoConstraint => ExactnessReport {
            status: ExactnessStatus::ConditionallyExact,
            tag: String::from("kkt_multiplier_zero"),
            condition: String::from(
                "exact if a KKT multiplier of the first two constraints is zero at the relaxed optimum; not verified here",
            ),
        },
        ProblemKind::HomogeneousMulti | ProblemKind::GeneralMulti => ExactnessReport {
            status: ExactnessStatus::Unknown,
            tag: String::from("unknown"),
            condition: String::from(
                "no general exactness guarantee for this shape; the y-recovery map is recorded in the model provenance",
            ),
        },
    }
}

/// Sampled agreement between a problem and its separable rewrite.
#[derive(Debug, Clone)]
pub struct ReformulationCheck {
    pub samples: usize,
    /// Largest relative discrepancy over all sampled points and functions.
    pub max_discrepancy: f64,
    pub objective_max: f64,
    pub constraint_max: Vec<f64>,
}

/// Samples points `x` and compares the original functions at `P x` against
/// the separable functions at `x`, relative to `max(1, |value|)`.
/// Discrepancies are reported, never thrown. When the rewrite went through
/// homogenization the comparison runs against the lifted problem, which is
/// re-derived from `p` and must match the recorded one.
pub fn verify_reformulation(
    p: &QcqpProblem,
    d: &DiagQcqp,
    samples: usize,
    seed: u64,
) -> Result<ReformulationCheck, Error> {
    if let Some(map) = &d.homogenization {
        if map.original_n != p.n || d.working.n != p.n + 1 {
            return Err(Error::Invalid(String::from(
                "rewrite does not belong to this problem",
            )));
        }
    } else if d.working.n != p.n || d.working.m() != p.m() {
        return Err(Error::Invalid(String::from(
            "rewrite does not belong to this problem",
        )));
    }

    let w = &d.working;
    let n = w.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut objective_max = 0.0_f64;
    let mut constraint_max = vec![0.0_f64; w.m()];
    for _ in 0..samples {
        let x = DVector::from_iterator(n, (0..n).map(|_| rng.random_range(-1.0..=1.0)));
        let z = d.p.matrix() * &x;
        let orig = w.eval_objective(&z);
        let diag = d.eval_objective(&x);
        let disc = (orig - diag).abs() / orig.abs().max(1.0);
        objective_max = objective_max.max(disc);
        for i in 0..w.m() {
            let orig_c = w.eval_constraint(i, &z);
            let diag_c = d.eval_constraint(i, &x);
            let disc_c = (orig_c - diag_c).abs() / orig_c.abs().max(1.0);
            constraint_max[i] = constraint_max[i].max(disc_c);
        }
    }
    let max_discrepancy = constraint_max
        .iter()
        .fold(objective_max, |a, b| a.max(*b));
    Ok(ReformulationCheck {
        samples,
        max_discrepancy,
        objective_max,
        constraint_max,
    })
}
