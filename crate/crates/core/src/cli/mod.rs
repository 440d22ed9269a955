//! Experiment runner behind the `calderon-lab` binary.
//!
//! Settings come from built-in defaults, then an optional `--config` file of
//! `key = value` lines, then command-line flags. Every table is written as
//! CSV (with a `# config-hash:` header line) and/or aligned markdown.
//!
//! Exit codes: 0 success, 1 at least one Fail verdict, 2 infrastructure
//! error (bad configuration, I/O, numerical breakdown).

pub mod config;
pub mod study;
pub mod table;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use config::{ExperimentConfig, Settings};
use study::{Artifacts, SUMMARY_SOLUTIONS};
use table::{Cell, Table};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "CALDERON_THREADS";

#[derive(Debug, Parser)]
#[command(name = "calderon-lab", version, about = "Calderón-residual and MMS convergence experiments for Laplace and Maxwell BEM")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Key-value configuration file; command-line flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Manufactured solution.
    #[arg(long, global = true, value_parser = ["1a", "1b", "2", "m3", "m4"])]
    pub solution: Option<String>,

    /// Comma-separated sphere levels or cube divisions.
    #[arg(long, global = true, value_name = "LIST")]
    pub levels: Option<String>,

    /// Artificial error injected into the target matrix.
    #[arg(long, global = true, value_parser = ["A", "B", "C", "D", "E", "none"])]
    pub fault: Option<String>,

    /// Matrix receiving the fault.
    #[arg(long, global = true, value_parser = ["V", "W", "E"])]
    pub target: Option<String>,

    /// Seed of the random diagonal of fault A.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Degree of the regular triangle rule.
    #[arg(long, global = true, value_name = "N")]
    pub quad_regular: Option<usize>,

    /// Gauss points per coordinate of the singular rules.
    #[arg(long, global = true, value_name = "N")]
    pub quad_singular: Option<usize>,

    /// Reduced quadrature (regular 2, singular 1).
    #[arg(long, global = true, conflicts_with_all = ["quad_regular", "quad_singular"])]
    pub quad_degraded: bool,

    /// Wavenumber as real and imaginary part.
    #[arg(long, global = true, num_args = 2, value_names = ["RE", "IM"], allow_negative_numbers = true)]
    pub wavenumber: Option<Vec<f64>>,

    /// Relative tolerance of the iterative solvers.
    #[arg(long, global = true)]
    pub solver_tol: Option<f64>,

    /// Energy form for the Maxwell MMS error.
    #[arg(long, global = true, value_parser = ["clean", "k-i"])]
    pub maxwell_energy: Option<String>,

    /// Map from tangential traces to RWG coefficients.
    #[arg(long, global = true, value_parser = ["interpolant", "projection"])]
    pub rwg_trace: Option<String>,

    /// Allow the largest meshes.
    #[arg(long, global = true)]
    pub full: bool,

    /// Write the CSV tables to this file.
    #[arg(long, global = true, value_name = "PATH")]
    pub csv: Option<PathBuf>,

    /// Write the markdown tables to this file.
    #[arg(long, global = true, value_name = "PATH")]
    pub markdown: Option<PathBuf>,

    /// Format printed on standard output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Markdown)]
    pub format: Format,

    /// Write the mesh as OFF (`{level}` in the path writes every level).
    #[arg(long, global = true, value_name = "PATH")]
    pub mesh_out: Option<PathBuf>,

    /// Write a matrix (V, K, Kp, W, Wm, Wtilde, M, E, H) as CSV.
    #[arg(long, global = true, num_args = 2, value_names = ["TAG", "PATH"])]
    pub dump_matrix: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Markdown,
    Csv,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Maximal diagonal entries of the Galerkin matrices and their rates.
    BasisNorms,
    /// Calderón residual convergence study.
    Residuals,
    /// Calderón residuals and MMS errors under an injected fault.
    Inject,
    /// Eigenvalues of a clean and a faulted matrix, with CG on both.
    Spectrum,
    /// Every fault on every operator: the detection summary.
    Report,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::BasisNorms => "basis-norms",
            Command::Residuals => "residuals",
            Command::Inject => "inject",
            Command::Spectrum => "spectrum",
            Command::Report => "report",
        }
    }
}

impl Cli {
    /// Merges the config file and the flags into a resolved configuration.
    pub fn settings(&self) -> Result<ExperimentConfig> {
        let mut s = Settings::default();
        if let Some(p) = &self.config {
            s.load_file(p)?;
        }
        let mut set = |k: &str, v: Option<String>| -> Result<()> {
            match v {
                Some(v) => s.set(k, v),
                None => Ok(()),
            }
        };
        set("solution", self.solution.clone())?;
        set("levels", self.levels.clone())?;
        set("fault", self.fault.clone())?;
        set("target", self.target.clone())?;
        set("seed", self.seed.map(|v| v.to_string()))?;
        set("quad_regular", self.quad_regular.map(|v| v.to_string()))?;
        set("quad_singular", self.quad_singular.map(|v| v.to_string()))?;
        if self.quad_degraded {
            set("quad_regular", Some("2".into()))?;
            set("quad_singular", Some("1".into()))?;
        }
        set("wavenumber", self.wavenumber.as_ref().map(|w| format!("{} {}", w[0], w[1])))?;
        set("solver_tol", self.solver_tol.map(|v| format!("{v:e}")))?;
        set("maxwell_energy", self.maxwell_energy.clone())?;
        set("rwg_trace", self.rwg_trace.clone())?;
        if self.full {
            set("full", Some("true".into()))?;
        }
        s.resolve()
    }

    pub fn artifacts(&self) -> Artifacts {
        Artifacts {
            mesh_out: self.mesh_out.clone(),
            dump_matrix: self.dump_matrix.as_ref().map(|v| (v[0].clone(), PathBuf::from(&v[1]))),
        }
    }
}

/// Tables produced by one command and whether any verdict failed.
#[derive(Debug, Clone)]
pub struct Output {
    pub tables: Vec<Table>,
    pub fail: bool,
    pub hash: String,
}

impl Output {
    pub fn csv(&self) -> String {
        self.tables.iter().map(|t| t.to_csv(&self.hash)).collect::<Vec<_>>().join("\n")
    }

    pub fn markdown(&self) -> String {
        self.tables.iter().map(|t| t.to_markdown(&self.hash)).collect::<Vec<_>>().join("\n")
    }
}

/// Runs `command` with a resolved configuration.
pub fn execute(command: Command, cfg: &ExperimentConfig, art: &Artifacts) -> Result<Output> {
    let hash = cfg.hash(command.name());
    let (tables, fail) = match command {
        Command::BasisNorms => (vec![study::basis_norms(cfg, art)?.to_table()], false),
        Command::Residuals => {
            let run = study::run_study(cfg, false, art)?;
            let fail = run.study.has_fail();
            (vec![run.study.to_table()], fail)
        }
        Command::Inject => {
            let run = study::run_study(cfg, true, art)?;
            let fail = run.study.has_fail();
            let mms = run.mms.expect("MMS requested");
            let mut verdicts = Table::new(
                format!("Verdicts — {}", run.study.title),
                vec!["Calderón test".into(), "MMS".into(), "agree".into()],
            );
            verdicts.push(vec![
                Cell::pair(run.calderon.name(), run.calderon.symbol()),
                Cell::pair(mms.name(), mms.symbol()),
                Cell::text(if run.agree() == Some(true) { "yes" } else { "no" }),
            ]);
            (vec![run.study.to_table(), verdicts], fail)
        }
        Command::Spectrum => (vec![study::spectrum(cfg, art)?.to_table()], false),
        Command::Report => {
            let (rows, studies) = study::summary(cfg, &SUMMARY_SOLUTIONS, art)?;
            let fail = studies.iter().any(|s| s.has_fail());
            let mut tables = vec![study::summary_table(&rows)];
            tables.extend(studies.iter().map(|s| s.to_table()));
            (tables, fail)
        }
    };
    Ok(Output { tables, fail, hash })
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(Error::Config(format!("{THREADS_ENV} must be a positive integer")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run_inner(cli: &Cli) -> Result<bool> {
    init_threads()?;
    let cfg = cli.settings()?;
    log::info!("configuration:\n{}", cfg.canonical());
    let out = execute(cli.command, &cfg, &cli.artifacts())?;
    if let Some(p) = &cli.csv {
        std::fs::write(p, out.csv())?;
    }
    if let Some(p) = &cli.markdown {
        std::fs::write(p, out.markdown())?;
    }
    match cli.format {
        Format::Markdown => print!("{}", out.markdown()),
        Format::Csv => print!("{}", out.csv()),
        Format::None => {}
    }
    Ok(out.fail)
}

/// Runs the parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match run_inner(cli) {
        Ok(false) => 0,
        Ok(true) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
