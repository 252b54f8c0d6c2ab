use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use simdiag_cli::commands::{cmd_family, cmd_pair, cmd_reformulate, cmd_verify, RunConfig};
use simdiag_core::{FindPencilOptions, ModelKind, TolerancePolicy};
use std::path::PathBuf;
use std::process::ExitCode;

/// Simultaneous diagonalization by congruence: decide SD for pairs and
/// families of symmetric matrices, emit and re-check congruence
/// certificates, and rewrite SD QCQPs as LP or SOCP models.
///
/// Exit codes: 0 = SD / valid / reformulated, 1 = not SD / invalid
/// certificate, 2 = undecidable at the working tolerances, 3 = usage or IO
/// error.
#[derive(Parser)]
#[command(name = "simdiag", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Rank cut: eigenvalues below EPS x scale count as zero.
    #[arg(long, global = true, value_name = "EPS")]
    tol_rank: Option<f64>,

    /// Largest relative off-diagonal mass accepted as diagonal.
    #[arg(long, global = true, value_name = "EPS")]
    tol_offdiag: Option<f64>,

    /// Eigenvalues closer than EPS x scale form one cluster.
    #[arg(long, global = true, value_name = "EPS")]
    tol_cluster: Option<f64>,

    /// Seed for the pencil search and verification sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the certificate (pair, family) or model (reformulate) here.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Print the intermediate reduction steps.
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decide SD for two symmetric matrices.
    Pair { file_a: PathBuf, file_b: PathBuf },

    /// Decide SD for a family of symmetric matrices.
    Family {
        #[arg(required = true)]
        files: Vec<PathBuf>,

        /// Pencil coefficients "l1,l2,...,lm" instead of the automatic
        /// search.
        #[arg(long, value_name = "COEFFS")]
        pencil: Option<String>,
    },

    /// Diagonalize a QCQP and emit an LP or SOCP model.
    Reformulate {
        problem: PathBuf,

        /// Target model family.
        #[arg(long, value_enum, default_value_t = FormArg::Socp)]
        form: FormArg,

        /// Sample count for the original-vs-rewrite agreement check.
        #[arg(long, value_name = "N")]
        verify: Option<usize>,
    },

    /// Re-check an emitted certificate against the original matrices.
    Verify {
        certificate: PathBuf,

        #[arg(required = true)]
        matrices: Vec<PathBuf>,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum FormArg {
    Lp,
    Socp,
}

fn main() -> ExitCode {
    ExitCode::from(run() as u8)
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return code;
        }
    };

    let mut tol = TolerancePolicy::default();
    for (flag, slot) in [
        (cli.tol_rank, &mut tol.eps_rank),
        (cli.tol_offdiag, &mut tol.eps_offdiag),
        (cli.tol_cluster, &mut tol.eps_cluster),
    ] {
        if let Some(v) = flag {
            if !(v.is_finite() && v > 0.0) {
                eprintln!("error: tolerance overrides must be positive and finite, got {v}");
                return 3;
            }
            *slot = v;
        }
    }
    let cfg = RunConfig {
        tol,
        opts: FindPencilOptions {
            seed: cli.seed,
            ..FindPencilOptions::default()
        },
        seed: cli.seed,
        out: cli.out,
        verbose: cli.verbose,
    };

    let result = match &cli.command {
        Command::Pair { file_a, file_b } => cmd_pair(file_a, file_b, &cfg),
        Command::Family { files, pencil } => cmd_family(files, pencil.as_deref(), &cfg),
        Command::Reformulate {
            problem,
            form,
            verify,
        } => {
            let kind = match form {
                FormArg::Lp => ModelKind::Lp,
                FormArg::Socp => ModelKind::Socp,
            };
            cmd_reformulate(problem, kind, *verify, &cfg)
        }
        Command::Verify {
            certificate,
            matrices,
        } => cmd_verify(certificate, matrices, &cfg),
    };

    match result {
        Ok(out) => {
            print!("{}", out.report);
            out.exit
        }
        Err(err) => {
            eprintln!("error: {err}");
            3
        }
    }
}
