use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ab_resolvent::ab_kernel::{laplace_symbol, ABSymbolParams};
use ab_resolvent::experiments::{run_experiment, run_theorem_suite, ExperimentConfig, ExperimentKind, Outcome};
use ab_resolvent::operator_model::dirichlet_laplacian;
use ab_resolvent::resolvent_core::{admissible_angle, build_contour};
use ab_resolvent::special_functions::{ml_eval, MLParams};
use ab_resolvent::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "abres",
    version,
    about = "Atangana-Baleanu resolvent families: evaluation, experiments and theorem checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate E_{alpha,beta}(z).
    MlEval {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        /// Real part of z.
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        z_im: f64,
    },
    /// Evaluate the kernel symbol s^{alpha-beta} / (s^alpha + c).
    SymbolEval {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        c: f64,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        s_im: f64,
    },
    /// Run an experiment and write CSV, sidecar JSON and SVG to the output directory.
    Run {
        #[arg(value_name = "EXPERIMENT")]
        kind: Option<RunKind>,
        #[command(flatten)]
        opts: ExperimentArgs,
    },
    /// Run a check suite.
    Check {
        suite: Suite,
        #[command(flatten)]
        opts: ExperimentArgs,
    },
    /// Write the operator and contour of a configuration as JSON.
    Export {
        #[command(flatten)]
        opts: ExperimentArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RunKind {
    FundamentalMode,
    MultiMode,
    Heatmap,
    Bounds,
}

impl From<RunKind> for ExperimentKind {
    fn from(k: RunKind) -> Self {
        match k {
            RunKind::FundamentalMode => ExperimentKind::FundamentalMode,
            RunKind::MultiMode => ExperimentKind::MultiMode,
            RunKind::Heatmap => ExperimentKind::Heatmap,
            RunKind::Bounds => ExperimentKind::Bounds,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Theorems,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON config file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long)]
    out_dir: Option<String>,
    #[arg(long)]
    contour_gamma: Option<f64>,
    #[arg(long)]
    contour_nodes: Option<usize>,
    /// Skip the SVG renderings.
    #[arg(long)]
    no_svg: bool,
}

enum Failure {
    Core(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Core(e) => match e.root() {
                Error::NonConvergence { .. } | Error::Overflow(_) | Error::NonFinite => EXIT_NONCONVERGENCE,
                _ => EXIT_INVALID,
            },
            Failure::Io(_) => EXIT_INVALID,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Io(m) => m.clone(),
        }
    }
}

impl ExperimentArgs {
    fn resolve(&self, kind: Option<ExperimentKind>) -> Result<ExperimentConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
                ExperimentConfig::from_json(&text)?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(e) = &self.experiment {
            cfg.experiment = e.parse()?;
        }
        if let Some(k) = kind {
            cfg.experiment = k;
        }
        if let Some(a) = self.alpha {
            cfg.alpha = a;
        }
        if let Some(b) = self.beta {
            cfg.beta = b;
        }
        if let Some(c) = self.c {
            cfg.c = c;
        }
        if let Some(k) = self.modes {
            cfg.modes = k;
        }
        if let Some(d) = &self.out_dir {
            cfg.out_dir = d.clone();
        }
        if let Some(g) = self.contour_gamma {
            cfg.contour.gamma = Some(g);
        }
        if let Some(n) = self.contour_nodes {
            cfg.contour.nodes = Some(n);
        }
        if self.no_svg {
            cfg.svg = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_all(dir: &Path, files: &[(String, String)]) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    for (name, contents) in files {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn write_outcome(cfg: &ExperimentConfig, out: &Outcome) -> Result<(), Failure> {
    let files: Vec<(String, String)> = out.artifacts.iter().map(|a| (a.name.clone(), a.contents.clone())).collect();
    write_all(Path::new(&cfg.out_dir), &files)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::MlEval { alpha, beta, z, z_im } => {
            let p = MLParams::new(alpha, beta)?;
            let v = ml_eval(p, Complex64::new(z, z_im))?;
            println!("{}", json!({ "alpha": alpha, "beta": beta, "z": [z, z_im], "value": [v.re, v.im] }));
            Ok(0)
        }
        Command::SymbolEval { alpha, beta, c, s, s_im } => {
            let p = ABSymbolParams::new(alpha, beta, c)?;
            let v = laplace_symbol(p, Complex64::new(s, s_im))?;
            println!("{}", json!({ "alpha": alpha, "beta": beta, "c": c, "s": [s, s_im], "value": [v.re, v.im] }));
            Ok(0)
        }
        Command::Run { kind, opts } => {
            let cfg = opts.resolve(kind.map(Into::into))?;
            if cfg.experiment == ExperimentKind::TheoremSuite {
                return check(&cfg);
            }
            let out = run_experiment(&cfg)?;
            write_outcome(&cfg, &out)?;
            Ok(if out.passed { 0 } else { EXIT_CHECK_FAILED })
        }
        Command::Check { suite: Suite::Theorems, opts } => {
            let cfg = opts.resolve(Some(ExperimentKind::TheoremSuite))?;
            check(&cfg)
        }
        Command::Export { opts } => {
            let cfg = opts.resolve(None)?;
            let op = dirichlet_laplacian(cfg.modes)?;
            let params = cfg.params()?;
            let spec = cfg.contour.spec();
            let nodes = build_contour(&op, &params, &spec)?;
            let contour = json!({
                "spec": spec,
                "gamma_used": admissible_angle(&op, &params, spec.gamma)?,
                "nodes": nodes,
            });
            let files = vec![
                ("operator.json".to_string(), op.to_json() + "\n"),
                (
                    "contour.json".to_string(),
                    serde_json::to_string_pretty(&contour).expect("contour serializes") + "\n",
                ),
            ];
            write_all(Path::new(&cfg.out_dir), &files)?;
            Ok(0)
        }
    }
}

fn check(cfg: &ExperimentConfig) -> Result<u8, Failure> {
    let report = run_theorem_suite(cfg)?;
    for c in &report.checks {
        let fitted = c.fitted.map(|f| format!("{f:.6e}")).unwrap_or_else(|| "-".into());
        let expected = c.expected_exponent.map(|e| format!("{e:+.3}")).unwrap_or_else(|| "-".into());
        println!(
            "{} {:22} expected={expected} fitted={fitted} tol={:.1e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.theorem_id,
            c.tolerance
        );
    }
    let sidecar = serde_json::to_string_pretty(&cfg.resolved()).expect("config serializes") + "\n";
    let files = vec![
        ("theorem_suite.config.json".to_string(), sidecar),
        ("theorem_suite.json".to_string(), report.to_json()),
        ("theorem_suite.csv".to_string(), report.to_csv()),
    ];
    write_all(Path::new(&cfg.out_dir), &files)?;
    Ok(if report.checks.iter().all(|c| c.pass) { 0 } else { EXIT_CHECK_FAILED })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
