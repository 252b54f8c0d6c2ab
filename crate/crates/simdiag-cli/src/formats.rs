//! On-disk formats.
//!
//! Matrices come in as JSON (`{"n": 2, "data": [[...], [...]]}`) or as
//! MatrixMarket coordinate files; everything written out is JSON. A
//! certificate records the congruence and the diagonals it produced so a
//! later `verify` run can re-check it against the original matrices. A model
//! file records an emitted LP/SOCP together with the provenance needed to
//! map its variables back to the original coordinates.

use crate::CliError;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use simdiag_core::{
    ConicModel, ConstraintSense, ExactnessReport, ModelKind, QcqpConstraint, QcqpProblem,
    ReformulationCheck, RowSense, SymMat,
};
use std::fs;
use std::path::Path;

/// Dense symmetric matrix file: `n` rows of `n` entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub data: Vec<Vec<f64>>,
}

fn rows_to_dmatrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>, CliError> {
    let n = rows.len();
    if n == 0 {
        return Err(CliError::new(format!("{what}: matrix has no rows")));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(CliError::new(format!(
                "{what}: row {i} has {} entries, expected {n}",
                r.len()
            )));
        }
    }
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    if m.iter().any(|x| !x.is_finite()) {
        return Err(CliError::new(format!("{what}: non-finite entry")));
    }
    Ok(m)
}

fn require_symmetric(m: &DMatrix<f64>, what: &str) -> Result<SymMat, CliError> {
    let mut asym = 0.0_f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    let limit = 1e-10 * m.norm().max(1.0);
    if asym > limit {
        return Err(CliError::new(format!(
            "{what}: matrix is not symmetric (max |M - M'| entry {asym:e})"
        )));
    }
    Ok(SymMat::from_matrix(m.clone())?)
}

fn parse_matrix_market(text: &str, what: &str) -> Result<SymMat, CliError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::new(format!("{what}: empty MatrixMarket file")))?;
    let tokens: Vec<String> = header
        .trim_start_matches("%%MatrixMarket")
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if tokens.len() != 4 || tokens[0] != "matrix" {
        return Err(CliError::new(format!(
            "{what}: unsupported MatrixMarket header \"{header}\""
        )));
    }
    let (format, field, symmetry) = (&tokens[1], &tokens[2], &tokens[3]);
    if format != "coordinate" {
        return Err(CliError::new(format!(
            "{what}: only coordinate MatrixMarket files are supported, got \"{format}\""
        )));
    }
    if field != "real" && field != "integer" {
        return Err(CliError::new(format!(
            "{what}: only real-valued MatrixMarket files are supported, got \"{field}\""
        )));
    }
    if symmetry != "symmetric" && symmetry != "general" {
        return Err(CliError::new(format!(
            "{what}: MatrixMarket symmetry must be symmetric or general, got \"{symmetry}\""
        )));
    }

    let mut data = lines.filter(|l| !l.trim_start().starts_with('%') && !l.trim().is_empty());
    let size_line = data
        .next()
        .ok_or_else(|| CliError::new(format!("{what}: MatrixMarket file has no size line")))?;
    let dims: Vec<&str> = size_line.split_whitespace().collect();
    if dims.len() != 3 {
        return Err(CliError::new(format!(
            "{what}: bad MatrixMarket size line \"{size_line}\""
        )));
    }
    let parse_usize = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| CliError::new(format!("{what}: bad MatrixMarket size entry \"{s}\"")))
    };
    let nrows = parse_usize(dims[0])?;
    let ncols = parse_usize(dims[1])?;
    let nnz = parse_usize(dims[2])?;
    if nrows != ncols {
        return Err(CliError::new(format!(
            "{what}: matrix must be square, got {nrows}x{ncols}"
        )));
    }
    let n = nrows;

    let mut m = DMatrix::zeros(n, n);
    let mut seen = 0usize;
    for line in data {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(CliError::new(format!(
                "{what}: bad MatrixMarket entry \"{line}\""
            )));
        }
        let i = parse_usize(parts[0])?;
        let j = parse_usize(parts[1])?;
        let v: f64 = parts[2]
            .parse()
            .map_err(|_| CliError::new(format!("{what}: bad MatrixMarket value \"{}\"", parts[2])))?;
        if i == 0 || j == 0 || i > n || j > n {
            return Err(CliError::new(format!(
                "{what}: MatrixMarket index ({i}, {j}) out of range for n = {n}"
            )));
        }
        m[(i - 1, j - 1)] = v;
        if symmetry == "symmetric" {
            m[(j - 1, i - 1)] = v;
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(CliError::new(format!(
            "{what}: MatrixMarket file promises {nnz} entries, found {seen}"
        )));
    }
    require_symmetric(&m, what)
}

/// Reads a symmetric matrix from JSON or MatrixMarket, deciding by content.
pub fn load_matrix(path: &Path) -> Result<SymMat, CliError> {
    let what = path.display().to_string();
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::new(format!("{what}: {e}")))?;
    parse_matrix_text(&text, &what)
}

pub fn parse_matrix_text(text: &str, what: &str) -> Result<SymMat, CliError> {
    if text.trim_start().starts_with("%%MatrixMarket") {
        return parse_matrix_market(text, what);
    }
    let mj: MatrixJson = serde_json::from_str(text)
        .map_err(|e| CliError::new(format!("{what}: {e}")))?;
    if mj.data.len() != mj.n {
        return Err(CliError::new(format!(
            "{what}: declared n = {} but data has {} rows",
            mj.n,
            mj.data.len()
        )));
    }
    let m = rows_to_dmatrix(&mj.data, what)?;
    require_symmetric(&m, what)
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Constraint sense in problem and model files: `"le"`, `"eq"`, or
/// `{"interval": [l, u]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SenseJson {
    Keyword(String),
    Interval { interval: [f64; 2] },
}

impl SenseJson {
    pub fn to_sense(&self, what: &str) -> Result<ConstraintSense, CliError> {
        match self {
            SenseJson::Keyword(w) if w == "le" => Ok(ConstraintSense::Le),
            SenseJson::Keyword(w) if w == "eq" => Ok(ConstraintSense::Eq),
            SenseJson::Keyword(w) => Err(CliError::new(format!(
                "{what}: unknown sense \"{w}\" (expected \"le\", \"eq\", or an interval)"
            ))),
            SenseJson::Interval { interval } => Ok(ConstraintSense::Interval {
                l: interval[0],
                u: interval[1],
            }),
        }
    }

    pub fn from_sense(s: &ConstraintSense) -> Self {
        match s {
            ConstraintSense::Le => SenseJson::Keyword("le".to_string()),
            ConstraintSense::Eq => SenseJson::Keyword("eq".to_string()),
            ConstraintSense::Interval { l, u } => SenseJson::Interval { interval: [*l, *u] },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectiveJson {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "a")]
    pub lin: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintJson {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "a")]
    pub lin: Vec<f64>,
    pub d: f64,
    pub sense: SenseJson,
}

/// QCQP instance file: minimize `1/2 x'Ax + a'x` subject to quadratic
/// constraints `1/2 x'A_i x + a_i'x + 1/2 d_i (sense)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemJson {
    pub n: usize,
    pub objective: ObjectiveJson,
    pub constraints: Vec<ConstraintJson>,
}

impl ProblemJson {
    pub fn to_problem(&self, what: &str) -> Result<QcqpProblem, CliError> {
        let a0m = rows_to_dmatrix(&self.objective.a, what)?;
        if a0m.nrows() != self.n {
            return Err(CliError::new(format!(
                "{what}: objective matrix is {}x{} but n = {}",
                a0m.nrows(),
                a0m.ncols(),
                self.n
            )));
        }
        let a0 = require_symmetric(&a0m, what)?;
        if self.objective.lin.len() != self.n {
            return Err(CliError::new(format!(
                "{what}: objective linear term has length {}, expected {}",
                self.objective.lin.len(),
                self.n
            )));
        }
        let lin0 = DVector::from_row_slice(&self.objective.lin);
        let mut p = QcqpProblem::new(a0, lin0)?;
        for (i, c) in self.constraints.iter().enumerate() {
            let cm = rows_to_dmatrix(&c.a, what)?;
            if cm.nrows() != self.n {
                return Err(CliError::new(format!(
                    "{what}: constraint {i} matrix is {}x{} but n = {}",
                    cm.nrows(),
                    cm.ncols(),
                    self.n
                )));
            }
            let ca = require_symmetric(&cm, what)?;
            if c.lin.len() != self.n {
                return Err(CliError::new(format!(
                    "{what}: constraint {i} linear term has length {}, expected {}",
                    c.lin.len(),
                    self.n
                )));
            }
            let lin = DVector::from_row_slice(&c.lin);
            let sense = c.sense.to_sense(what)?;
            p = p.with_constraint(QcqpConstraint::new(ca, lin, c.d, sense)?)?;
        }
        Ok(p)
    }
}

pub fn load_problem(path: &Path) -> Result<(ProblemJson, QcqpProblem), CliError> {
    let what = path.display().to_string();
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::new(format!("{what}: {e}")))?;
    let pj: ProblemJson = serde_json::from_str(&text)
        .map_err(|e| CliError::new(format!("{what}: {e}")))?;
    let p = pj.to_problem(&what)?;
    Ok((pj, p))
}

/// Congruence certificate: the transform `p` and the diagonals of
/// `P' A_i P` it produced, in input order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateJson {
    pub n: usize,
    pub m: usize,
    pub p: Vec<Vec<f64>>,
    pub diagonals: Vec<Vec<f64>>,
    pub cond_estimate: f64,
}

impl CertificateJson {
    pub fn new(p: &DMatrix<f64>, diagonals: &[Vec<f64>], cond_estimate: f64) -> Self {
        CertificateJson {
            n: p.nrows(),
            m: diagonals.len(),
            p: matrix_rows(p),
            diagonals: diagonals.to_vec(),
            cond_estimate,
        }
    }

    pub fn transform(&self, what: &str) -> Result<DMatrix<f64>, CliError> {
        if self.p.len() != self.n {
            return Err(CliError::new(format!(
                "{what}: certificate declares n = {} but p has {} rows",
                self.n,
                self.p.len()
            )));
        }
        rows_to_dmatrix(&self.p, what)
    }
}

pub fn load_certificate(path: &Path) -> Result<CertificateJson, CliError> {
    let what = path.display().to_string();
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::new(format!("{what}: {e}")))?;
    let c: CertificateJson = serde_json::from_str(&text)
        .map_err(|e| CliError::new(format!("{what}: {e}")))?;
    Ok(c)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarJson {
    pub name: String,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RowJson {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
    pub sense: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProvenanceJson {
    pub problem_kind: String,
    pub p: Vec<Vec<f64>>,
    pub delta: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub alphas: Vec<Vec<f64>>,
    pub betas: Vec<Vec<f64>>,
    pub ds: Vec<f64>,
    pub senses: Vec<SenseJson>,
    pub recovery: String,
    pub lifted: bool,
    pub original_n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactnessJson {
    pub status: String,
    pub tag: String,
    pub condition: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationJson {
    pub samples: usize,
    pub seed: u64,
    pub max_discrepancy: f64,
    pub objective_max: f64,
    pub constraint_max: Vec<f64>,
}

/// Emitted model file: the LP/SOCP data plus provenance, exactness, and the
/// optional sampled agreement check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelJson {
    pub kind: String,
    pub vars: Vec<VarJson>,
    pub obj: Vec<f64>,
    pub rows: Vec<RowJson>,
    pub cones: Vec<[usize; 2]>,
    pub provenance: ProvenanceJson,
    pub exactness: ExactnessJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationJson>,
}

impl ModelJson {
    pub fn new(
        model: &ConicModel,
        exact: &ExactnessReport,
        verification: Option<(&ReformulationCheck, u64)>,
    ) -> Self {
        ModelJson {
            kind: match model.kind {
                ModelKind::Lp => "lp".to_string(),
                ModelKind::Socp => "socp".to_string(),
            },
            vars: model
                .vars
                .iter()
                .map(|v| VarJson {
                    name: v.name.clone(),
                    lower: v.lower,
                    upper: v.upper,
                })
                .collect(),
            obj: model.obj.clone(),
            rows: model
                .rows
                .iter()
                .map(|r| RowJson {
                    coeffs: r.coeffs.clone(),
                    rhs: r.rhs,
                    sense: match r.sense {
                        RowSense::Le => "le".to_string(),
                        RowSense::Eq => "eq".to_string(),
                    },
                })
                .collect(),
            cones: model.cones.iter().map(|(x, y)| [*x, *y]).collect(),
            provenance: ProvenanceJson {
                problem_kind: model.provenance.kind.to_string(),
                p: matrix_rows(&model.provenance.p),
                delta: model.provenance.delta.clone(),
                epsilon: model.provenance.epsilon.clone(),
                alphas: model.provenance.alphas.clone(),
                betas: model.provenance.betas.clone(),
                ds: model.provenance.ds.clone(),
                senses: model
                    .provenance
                    .senses
                    .iter()
                    .map(SenseJson::from_sense)
                    .collect(),
                recovery: model.provenance.recovery.clone(),
                lifted: model.provenance.lifted,
                original_n: model.provenance.original_n,
            },
            exactness: ExactnessJson {
                status: exact.status.to_string(),
                tag: exact.tag.clone(),
                condition: exact.condition.clone(),
            },
            verification: verification.map(|(c, seed)| VerificationJson {
                samples: c.samples,
                seed,
                max_discrepancy: c.max_discrepancy,
                objective_max: c.objective_max,
                constraint_max: c.constraint_max.clone(),
            }),
        }
    }
}

/// Writes a value as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let what = path.display().to_string();
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::new(format!("{what}: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::new(format!("{what}: {e}")))?;
    Ok(())
}
