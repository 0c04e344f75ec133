//! The `crhls` command line: argument parsing, configuration merge, output.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 non-convergence
//! under `--strict`.

mod commands;
mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

pub use commands::{log_log_slope, random_sphere_grid, Outcome, Table};
pub use config::RunConfig;

use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "crhls",
    version,
    about = "HLS numerics on the Heisenberg group and the CR sphere"
)]
struct Cli {
    /// JSON file with run options; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for summary.json and the command's CSV table.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Exit with code 3 when a solver stage does not converge.
    #[arg(long, global = true)]
    strict: bool,
    #[arg(long, global = true, env = "CRHLS_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Default)]
struct ModelArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Debug, Args, Default)]
struct SolverArgs {
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Debug, Args, Default)]
struct SphereArgs {
    #[arg(long)]
    theta: Option<usize>,
    #[arg(long)]
    phi1: Option<usize>,
    #[arg(long)]
    phi2: Option<usize>,
}

#[derive(Debug, Args, Default)]
struct CylinderArgs {
    #[arg(long)]
    radial: Option<usize>,
    #[arg(long)]
    simplex: Option<usize>,
    #[arg(long)]
    angular: Option<usize>,
    #[arg(long)]
    vertical: Option<usize>,
    /// Use uniform spacing instead of the graded rule.
    #[arg(long)]
    uniform: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print Q, p_alpha, q_alpha, b_n and D_H.
    Constants {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Check eps-invariance of the extremal norm and the HLS upper bound.
    VerifyHls {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        cylinder: CylinderArgs,
        #[arg(long, value_delimiter = ',')]
        eps_list: Option<Vec<f64>>,
        /// `R / eps`.
        #[arg(long)]
        ratio: Option<f64>,
    },
    /// Rayleigh quotient of the truncated extremal on a cylinder grid.
    LowerBound {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        cylinder: CylinderArgs,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        ratio: Option<f64>,
    },
    /// Tail integral I1 over a list of `R / eps` ratios and its log-log slope.
    TailIntegral {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        ratios: Option<Vec<f64>>,
    },
    /// Subcritical maximizer on a CSV kernel or the sphere.
    ExtremalSub {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sphere: SphereArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        kernel: Option<PathBuf>,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        blowup_radius: Option<f64>,
    },
    /// Warm-started maximizers along a decreasing exponent schedule.
    Continuation {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sphere: SphereArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_delimiter = ',')]
        p_schedule: Option<Vec<f64>>,
    },
    /// Residual of the discrete curvature equation.
    CurvatureResidual {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sphere: SphereArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_delimiter = ',')]
        p_schedule: Option<Vec<f64>>,
        /// `ones` or `maximizer`.
        #[arg(long)]
        phi: Option<String>,
    },
    /// Green-model quotient against the pure singular quotient.
    MassExperiment {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sphere: SphereArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        a0: Option<Vec<f64>>,
        #[arg(long, allow_hyphen_values = true)]
        c_w: Option<f64>,
    },
    /// Conformal covariance residual on random sphere kernels.
    CovarianceCheck {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        pairs: Option<usize>,
        /// `random`, `ones` or `const:<c>`.
        #[arg(long)]
        phi: Option<String>,
    },
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl ModelArgs {
    fn apply(self, c: &mut RunConfig) {
        set(&mut c.n, self.n);
        set(&mut c.alpha, self.alpha);
    }
}

impl SolverArgs {
    fn apply(self, c: &mut RunConfig) {
        set(&mut c.tol, self.tol);
        set(&mut c.max_iter, self.max_iter);
    }
}

impl SphereArgs {
    fn apply(self, c: &mut RunConfig) {
        set(&mut c.theta, self.theta);
        set(&mut c.phi1, self.phi1);
        set(&mut c.phi2, self.phi2);
    }
}

impl CylinderArgs {
    fn apply(self, c: &mut RunConfig) {
        set(&mut c.radial, self.radial);
        set(&mut c.simplex, self.simplex);
        set(&mut c.angular, self.angular);
        set(&mut c.vertical, self.vertical);
        if self.uniform {
            c.graded = false;
        }
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Constants { .. } => "constants",
            Command::VerifyHls { .. } => "verify-hls",
            Command::LowerBound { .. } => "lower-bound",
            Command::TailIntegral { .. } => "tail-integral",
            Command::ExtremalSub { .. } => "extremal-sub",
            Command::Continuation { .. } => "continuation",
            Command::CurvatureResidual { .. } => "curvature-residual",
            Command::MassExperiment { .. } => "mass-experiment",
            Command::CovarianceCheck { .. } => "covariance-check",
        }
    }

    fn apply(self, c: &mut RunConfig) {
        c.command = self.name().into();
        match self {
            Command::Constants { model } => model.apply(c),
            Command::VerifyHls {
                model,
                cylinder,
                eps_list,
                ratio,
            } => {
                model.apply(c);
                cylinder.apply(c);
                set(&mut c.eps_list, eps_list);
                set(&mut c.ratio, ratio);
            }
            Command::LowerBound {
                model,
                cylinder,
                eps,
                radius,
                ratio,
            } => {
                model.apply(c);
                cylinder.apply(c);
                set(&mut c.eps, eps);
                if radius.is_some() {
                    c.radius = radius;
                }
                set(&mut c.ratio, ratio);
            }
            Command::TailIntegral { model, eps, ratios } => {
                model.apply(c);
                set(&mut c.eps, eps);
                set(&mut c.ratios, ratios);
            }
            Command::ExtremalSub {
                model,
                sphere,
                solver,
                p,
                kernel,
                weights,
                blowup_radius,
            } => {
                model.apply(c);
                sphere.apply(c);
                solver.apply(c);
                set(&mut c.p, p);
                if kernel.is_some() {
                    c.kernel = kernel;
                }
                if weights.is_some() {
                    c.weights = weights;
                }
                set(&mut c.blowup_radius, blowup_radius);
            }
            Command::Continuation {
                model,
                sphere,
                solver,
                p_schedule,
            } => {
                model.apply(c);
                sphere.apply(c);
                solver.apply(c);
                set(&mut c.p_schedule, p_schedule);
            }
            Command::CurvatureResidual {
                model,
                sphere,
                solver,
                p_schedule,
                phi,
            } => {
                model.apply(c);
                sphere.apply(c);
                solver.apply(c);
                set(&mut c.p_schedule, p_schedule);
                match phi {
                    Some(phi) => c.phi = phi,
                    None if c.phi == "random" => c.phi = "ones".into(),
                    None => {}
                }
            }
            Command::MassExperiment {
                model,
                sphere,
                solver,
                a0,
                c_w,
            } => {
                model.apply(c);
                sphere.apply(c);
                solver.apply(c);
                set(&mut c.a0, a0);
                set(&mut c.c_w, c_w);
            }
            Command::CovarianceCheck {
                model,
                seed,
                nodes,
                pairs,
                phi,
            } => {
                model.apply(c);
                set(&mut c.seed, seed);
                set(&mut c.nodes, nodes);
                set(&mut c.pairs, pairs);
                set(&mut c.phi, phi);
            }
        }
    }
}

/// Validates `config` and runs its command.
pub fn execute(config: &RunConfig) -> Result<Outcome> {
    config.validate()?;
    commands::run_command(config)
}

/// The JSON document printed to stdout and written as `summary.json`.
pub fn summary(config: &RunConfig, outcome: &Outcome) -> serde_json::Value {
    json!({
        "command": config.command,
        "config": config,
        "result": outcome.result,
        "status": if outcome.converged { "ok" } else { "not_converged" },
    })
}

fn write_outputs(dir: &Path, config: &RunConfig, outcome: &Outcome) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let text = serde_json::to_string_pretty(&summary(config, outcome))?;
    std::fs::write(dir.join("summary.json"), text + "\n")?;
    if let Some(table) = &outcome.table {
        let mut w = csv::Writer::from_path(dir.join(format!("{}.csv", config.command)))?;
        w.write_record(&table.header)?;
        for row in &table.rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Csv(c) if c.is_io_error() => EXIT_IO,
        _ => EXIT_INVALID,
    }
}

/// Resolves the configuration from `args` (file first, then flags).
pub fn resolve(
    args: impl IntoIterator<Item = OsString>,
) -> std::result::Result<RunConfig, clap::Error> {
    let cli = Cli::try_parse_from(args)?;
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_file(path).map_err(|e| {
            clap::Error::raw(clap::error::ErrorKind::ValueValidation, format!("{e}\n"))
        })?,
        None => RunConfig::default(),
    };
    if cli.output.is_some() {
        config.output = cli.output;
    }
    config.strict |= cli.strict;
    if cli.threads.is_some() {
        config.threads = cli.threads;
    }
    cli.command.apply(&mut config);
    Ok(config)
}

/// Runs the CLI on `args` and returns the process exit code.
pub fn run(args: impl IntoIterator<Item = OsString>) -> i32 {
    let config = match resolve(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let _ = e.print();
            return code;
        }
    };
    if let Some(t) = config.threads {
        // Fails only when a pool already exists, which keeps the earlier setting.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    let outcome = match execute(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let doc = summary(&config, &outcome);
    let text = serde_json::to_string_pretty(&doc).expect("serializable summary");
    if let Err(e) = writeln!(std::io::stdout().lock(), "{text}") {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("error: {e}");
            return EXIT_IO;
        }
    }
    if let Some(dir) = &config.output {
        if let Err(e) = write_outputs(dir, &config, &outcome) {
            eprintln!("error: {e}");
            return EXIT_IO;
        }
    }
    if config.strict && !outcome.converged {
        eprintln!("error: a solver stage did not converge");
        return EXIT_NOT_CONVERGED;
    }
    EXIT_OK
}
