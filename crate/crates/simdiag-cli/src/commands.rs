//! Implementations of the `pair`, `family`, `reformulate` and `verify`
//! subcommands. Each returns the finished report text plus the exit code;
//! printing and process exit stay in `main`.

use crate::formats::{
    load_certificate, load_matrix, load_problem, write_json, CertificateJson, ModelJson,
};
use crate::report::{
    failed_condition, fnum, fvec, inertia_of_diag, inertia_str, obstruction_kind, Report,
};
use crate::CliError;
use nalgebra::DMatrix;
use simdiag_core::{
    apply_congruence, classify_exactness, classify_problem, diagonalize_qcqp, emit_lp, emit_socp,
    sd_family_detailed, sd_family_with_pencil, sd_pair_detailed, verify_reformulation, Congruence,
    DiagonalizeResult, FamilyPath, FamilyTrace, FindPencilOptions, ModelKind, PairTrace,
    ProblemKind, SdOutcome, SymMat, TolerancePolicy, Verdict,
};
use std::path::{Path, PathBuf};

/// Flags shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub tol: TolerancePolicy,
    pub opts: FindPencilOptions,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub verbose: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tol: TolerancePolicy::default(),
            opts: FindPencilOptions::default(),
            seed: 0,
            out: None,
            verbose: false,
        }
    }
}

/// Report text plus the process exit code it implies.
#[derive(Debug)]
pub struct CmdOutput {
    pub exit: i32,
    pub report: String,
}

fn verdict_exit(v: Verdict) -> i32 {
    match v {
        Verdict::Sd => 0,
        Verdict::NotSd => 1,
        Verdict::Indeterminate => 2,
    }
}

/// Recomputes the image of each input under the certificate transform.
/// Reports must derive residuals from this, never from algorithm state.
fn recomputed_images(p: &DMatrix<f64>, inputs: &[SymMat]) -> Result<Vec<SymMat>, CliError> {
    inputs
        .iter()
        .map(|a| apply_congruence(p, a).map_err(CliError::from))
        .collect()
}

fn inertia_threshold(tol: &TolerancePolicy, d: &[f64]) -> f64 {
    let scale = d.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    tol.eps_rank * scale.max(1.0)
}

fn push_outcome_tail(
    rep: &mut Report,
    outcome: &SdOutcome,
    inputs: &[SymMat],
    labels: &[String],
    cfg: &RunConfig,
) -> Result<Option<CertificateJson>, CliError> {
    let mut cert = None;
    if let Some(cong) = &outcome.congruence {
        rep.kv("congruence cond estimate", fnum(cong.cond_estimate()));
        let images = recomputed_images(cong.matrix(), inputs)?;
        for (label, im) in labels.iter().zip(images.iter()) {
            rep.kv(&format!("diag {label}"), fvec(&im.diagonal()));
        }
        for (label, im) in labels.iter().zip(images.iter()) {
            let d = im.diagonal();
            let thr = inertia_threshold(&cfg.tol, &d);
            rep.kv(
                &format!("inertia {label}"),
                inertia_str(inertia_of_diag(&d, thr)),
            );
        }
        for (label, im) in labels.iter().zip(images.iter()) {
            rep.kv(&format!("residual max offdiag {label}"), fnum(im.max_offdiag()));
        }
        cert = Some(CertificateJson::new(
            cong.matrix(),
            &images.iter().map(|im| im.diagonal()).collect::<Vec<_>>(),
            cong.cond_estimate(),
        ));
    }
    if let Some(ob) = &outcome.obstruction {
        rep.kv("obstruction kind", obstruction_kind(ob));
        rep.kv("obstruction", ob.to_string());
        if let Some(cond) = failed_condition(ob) {
            rep.kv("failed condition", cond);
        }
    }
    Ok(cert)
}

fn push_certificate_line(
    rep: &mut Report,
    cert: Option<CertificateJson>,
    cfg: &RunConfig,
) -> Result<(), CliError> {
    if let (Some(cert), Some(out)) = (cert, &cfg.out) {
        write_json(out, &cert)?;
        rep.kv("certificate", out.display().to_string());
    }
    Ok(())
}

fn push_borderline(rep: &mut Report, events: &[simdiag_core::BorderlineEvent]) {
    if !events.is_empty() {
        let body: Vec<String> = events.iter().map(|e| e.to_string()).collect();
        rep.kv("borderline events", body.join("; "));
    }
}

fn push_pair_steps(rep: &mut Report, trace: &PairTrace, n: usize) {
    rep.line(format!(
        "step Q1: spectral basis of the first matrix, rank {} of {}",
        trace.p, n
    ));
    rep.line(format!(
        "step Q2: diag(I_{}, V1) from the kernel-block spectral basis, kernel rank {}",
        trace.p, trace.q
    ));
    rep.kv("B3 eigenvalues", fvec(&trace.b3_eigenvalues));
    rep.line(format!(
        "step Q3: unit shear clearing the coupling against the {} nonsingular kernel columns",
        trace.q
    ));
    rep.line(format!(
        "step Q4: diag(V2 R, I_{}) aligning {} product-eigenvalue clusters",
        n - trace.p,
        trace.clusters.len()
    ));
}

pub fn cmd_pair(file_a: &Path, file_b: &Path, cfg: &RunConfig) -> Result<CmdOutput, CliError> {
    let a = load_matrix(file_a)?;
    let b = load_matrix(file_b)?;
    if a.n() != b.n() {
        return Err(CliError::new(format!(
            "matrix dimensions differ: {} is {na}x{na}, {} is {nb}x{nb}",
            file_a.display(),
            file_b.display(),
            na = a.n(),
            nb = b.n()
        )));
    }
    let (outcome, trace) = sd_pair_detailed(&a, &b, &cfg.tol)?;

    let mut rep = Report::new();
    rep.kv("command", "pair");
    rep.kv("input A", file_a.display().to_string());
    rep.kv("input B", file_b.display().to_string());
    rep.kv("n", a.n().to_string());
    rep.kv("verdict", outcome.verdict.to_string());
    rep.line(format!(
        "canonical dims: p = {}, q = {}, r = {}",
        trace.p, trace.q, trace.r
    ));
    if cfg.verbose {
        push_pair_steps(&mut rep, &trace, a.n());
    }
    if !trace.clusters.is_empty() {
        let cl: Vec<String> = trace
            .clusters
            .iter()
            .map(|c| format!("{} (x{})", fnum(c.value), c.algebraic))
            .collect();
        rep.kv("pencil ratios", cl.join("; "));
    }
    let labels = vec![String::from("A image"), String::from("B image")];
    let cert = push_outcome_tail(&mut rep, &outcome, &[a, b], &labels, cfg)?;
    push_borderline(&mut rep, &trace.borderline);
    push_certificate_line(&mut rep, cert, cfg)?;

    Ok(CmdOutput {
        exit: verdict_exit(outcome.verdict),
        report: rep.finish(),
    })
}

pub fn parse_pencil(s: &str, m: usize) -> Result<Vec<f64>, CliError> {
    let coeffs: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let coeffs =
        coeffs.map_err(|_| CliError::new(format!("malformed pencil coefficients \"{s}\"")))?;
    if coeffs.len() != m {
        return Err(CliError::new(format!(
            "pencil has {} coefficients but the family has {m} matrices",
            coeffs.len()
        )));
    }
    if coeffs.iter().any(|x| !x.is_finite()) {
        return Err(CliError::new(format!(
            "malformed pencil coefficients \"{s}\""
        )));
    }
    Ok(coeffs)
}

fn family_path_str(p: FamilyPath) -> &'static str {
    match p {
        FamilyPath::Single => "single",
        FamilyPath::Pair => "pair",
        FamilyPath::Commuting => "commuting",
        FamilyPath::Definite => "definite",
        FamilyPath::Semidefinite => "semidefinite",
        FamilyPath::NoPath => "none",
    }
}

fn push_family_trace(rep: &mut Report, trace: &FamilyTrace) {
    rep.kv("path", family_path_str(trace.path));
    if let Some(pencil) = &trace.pencil {
        rep.kv("pencil lambda", fvec(&pencil.lambda));
        rep.kv("pencil class", pencil.class.to_string());
        rep.kv("pencil min eigenvalue", fnum(pencil.min_eigenvalue));
    }
    if trace.path == FamilyPath::Semidefinite {
        rep.kv("kernel dim", trace.kernel_dim.to_string());
    }
    if let Some(mu) = &trace.mu {
        rep.kv("mu", fvec(mu));
    }
}

pub fn cmd_family(
    files: &[PathBuf],
    pencil: Option<&str>,
    cfg: &RunConfig,
) -> Result<CmdOutput, CliError> {
    if files.is_empty() {
        return Err(CliError::new("family needs at least one matrix file"));
    }
    let mats: Vec<SymMat> = files
        .iter()
        .map(|f| load_matrix(f))
        .collect::<Result<_, _>>()?;
    let n = mats[0].n();
    for (i, m) in mats.iter().enumerate() {
        if m.n() != n {
            let mn = m.n();
            return Err(CliError::new(format!(
                "matrix dimensions differ: input 0 is {n}x{n}, input {i} is {mn}x{mn}"
            )));
        }
    }

    let (outcome, trace) = match pencil {
        Some(s) => {
            let lambda = parse_pencil(s, mats.len())?;
            sd_family_with_pencil(&mats, &lambda, &cfg.opts, &cfg.tol)?
        }
        None => sd_family_detailed(&mats, &cfg.opts, &cfg.tol)?,
    };

    let mut rep = Report::new();
    rep.kv("command", "family");
    rep.kv("inputs", files.len().to_string());
    for (i, f) in files.iter().enumerate() {
        rep.kv(&format!("input {i}"), f.display().to_string());
    }
    rep.kv("n", n.to_string());
    rep.kv("verdict", outcome.verdict.to_string());
    push_family_trace(&mut rep, &trace);
    let labels: Vec<String> = (0..mats.len()).map(|i| format!("image {i}")).collect();
    let cert = push_outcome_tail(&mut rep, &outcome, &mats, &labels, cfg)?;
    push_borderline(&mut rep, &trace.borderline);
    push_certificate_line(&mut rep, cert, cfg)?;

    Ok(CmdOutput {
        exit: verdict_exit(outcome.verdict),
        report: rep.finish(),
    })
}

fn form_str(k: ModelKind) -> &'static str {
    match k {
        ModelKind::Lp => "lp",
        ModelKind::Socp => "socp",
    }
}

fn form_supports(form: ModelKind, kind: ProblemKind) -> bool {
    match form {
        ModelKind::Lp => matches!(
            kind,
            ProblemKind::HomogeneousMulti | ProblemKind::GeneralMulti
        ),
        ModelKind::Socp => matches!(
            kind,
            ProblemKind::Trs | ProblemKind::Gtrs | ProblemKind::Igtrs | ProblemKind::TwoConstraint
        ),
    }
}

pub fn cmd_reformulate(
    problem_file: &Path,
    form: ModelKind,
    verify_samples: Option<usize>,
    cfg: &RunConfig,
) -> Result<CmdOutput, CliError> {
    let (_, problem) = load_problem(problem_file)?;
    let kind = classify_problem(&problem, &cfg.tol);
    if !form_supports(form, kind) {
        let hint = match form {
            ModelKind::Lp => "form \"lp\" needs a fully homogeneous or lifted shape; use --form socp",
            ModelKind::Socp => "form \"socp\" covers single- and two-constraint shapes; use --form lp",
        };
        return Err(CliError::new(format!(
            "this instance is {kind}: {hint}"
        )));
    }

    let mut rep = Report::new();
    rep.kv("command", "reformulate");
    rep.kv("problem", problem_file.display().to_string());
    rep.kv("n", problem.n.to_string());
    rep.kv("constraints", problem.m().to_string());
    rep.kv("kind", kind.to_string());
    rep.kv("form", form_str(form));

    let diag = match diagonalize_qcqp(&problem, &cfg.opts, &cfg.tol)? {
        DiagonalizeResult::Diagonalized(d) => d,
        DiagonalizeResult::NotDiagonalized(outcome) => {
            rep.kv("verdict", outcome.verdict.to_string());
            if let Some(ob) = &outcome.obstruction {
                rep.kv("obstruction kind", obstruction_kind(ob));
                rep.kv("obstruction", ob.to_string());
            }
            rep.line("no reformulation: the quadratic forms are not simultaneously diagonalizable");
            return Ok(CmdOutput {
                exit: verdict_exit(outcome.verdict),
                report: rep.finish(),
            });
        }
    };
    rep.kv("verdict", Verdict::Sd.to_string());
    if let Some(h) = &diag.homogenization {
        rep.line(format!(
            "homogenized: lifted to n = {} with the normalization coordinate at index {}",
            diag.working.n, h.lifted_index
        ));
    }

    let model = match form {
        ModelKind::Lp => emit_lp(&diag)?,
        ModelKind::Socp => emit_socp(&diag)?,
    };
    rep.kv("variables", model.vars.len().to_string());
    rep.kv("rows", model.rows.len().to_string());
    rep.kv("cones", model.cones.len().to_string());

    let exact = classify_exactness(&diag);
    rep.kv("exactness", exact.status.to_string());
    rep.kv("exactness tag", exact.tag.clone());
    rep.kv("exactness condition", exact.condition.clone());

    let check = match verify_samples {
        Some(samples) => {
            let check = verify_reformulation(&problem, &diag, samples, cfg.seed)?;
            rep.kv("verification samples", check.samples.to_string());
            rep.kv("verification seed", cfg.seed.to_string());
            rep.kv(
                "verification max discrepancy",
                fnum(check.max_discrepancy),
            );
            Some(check)
        }
        None => None,
    };

    if let Some(out) = &cfg.out {
        let mj = ModelJson::new(&model, &exact, check.as_ref().map(|c| (c, cfg.seed)));
        write_json(out, &mj)?;
        rep.kv("model", out.display().to_string());
    }

    Ok(CmdOutput {
        exit: 0,
        report: rep.finish(),
    })
}

pub fn cmd_verify(
    cert_file: &Path,
    matrix_files: &[PathBuf],
    cfg: &RunConfig,
) -> Result<CmdOutput, CliError> {
    let what = cert_file.display().to_string();
    let cert = load_certificate(cert_file)?;
    if matrix_files.len() != cert.m {
        return Err(CliError::new(format!(
            "{what}: certificate covers {} matrices, {} given",
            cert.m,
            matrix_files.len()
        )));
    }
    if cert.diagonals.len() != cert.m || cert.diagonals.iter().any(|d| d.len() != cert.n) {
        return Err(CliError::new(format!(
            "{what}: certificate diagonals do not match its declared shape"
        )));
    }
    let p = cert.transform(&what)?;
    let mats: Vec<SymMat> = matrix_files
        .iter()
        .map(|f| load_matrix(f))
        .collect::<Result<_, _>>()?;
    for (i, m) in mats.iter().enumerate() {
        if m.n() != cert.n {
            let mn = m.n();
            return Err(CliError::new(format!(
                "matrix {i} is {mn}x{mn} but the certificate has n = {}",
                cert.n
            )));
        }
    }

    let mut rep = Report::new();
    rep.kv("command", "verify");
    rep.kv("certificate", what.clone());
    rep.kv("n", cert.n.to_string());
    rep.kv("matrices", cert.m.to_string());

    let cong = match Congruence::new(p, &cfg.tol) {
        Ok(c) => c,
        Err(e) => {
            rep.kv("transform", format!("rejected ({e})"));
            rep.kv("result", "invalid");
            return Ok(CmdOutput {
                exit: 1,
                report: rep.finish(),
            });
        }
    };
    rep.kv("cond estimate (recomputed)", fnum(cong.cond_estimate()));

    let mut valid = true;
    for (i, (file, a)) in matrix_files.iter().zip(mats.iter()).enumerate() {
        let image = cong.apply(a)?;
        let residual = image.max_offdiag();
        let limit = cfg.tol.offdiag_threshold(image.fro_norm());
        let dev = image
            .diagonal()
            .iter()
            .zip(cert.diagonals[i].iter())
            .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()));
        let ok = residual <= limit && dev <= limit;
        valid &= ok;
        rep.kv(&format!("matrix {i}"), file.display().to_string());
        rep.kv(&format!("matrix {i} residual max offdiag"), fnum(residual));
        rep.kv(&format!("matrix {i} residual limit"), fnum(limit));
        rep.kv(&format!("matrix {i} diagonal deviation"), fnum(dev));
        rep.kv(
            &format!("matrix {i} status"),
            if ok { "ok" } else { "fail" },
        );
    }
    rep.kv("result", if valid { "valid" } else { "invalid" });

    Ok(CmdOutput {
        exit: if valid { 0 } else { 1 },
        report: rep.finish(),
    })
}
