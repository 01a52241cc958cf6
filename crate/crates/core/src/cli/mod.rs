//! Command-line front end.
//!
//! Parses arguments into a [`RunConfig`], runs one subcommand and returns the
//! text it produced together with whether every verification held. The
//! binary maps that to exit codes: 0 success, 1 a verification failed,
//! 2 bad configuration or input.

pub mod expr;
mod reproduce;
mod table;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::analysis::{
    convergence_profile, fmt_real, profiles_csv, profiles_json, uniformity_argmax, weak_star_gap,
    AnalysisError, ConvergenceProfile, PROFILE_HEADER,
};
use crate::certify::{
    adversarial_set_family, check_doeblin, verify_z_witness, CertifyError, DoeblinCertificate,
    Shape, ZWitness, ZWitnessSpec,
};
use crate::kernel::{iterate, KernelError, KernelSpec, TransitionKernel, TwoJumpChain};
use crate::measure::{default_test_family, dirac, grid, Point};

pub use reproduce::{reproduce, Reproduction};
pub use table::Table;

/// `1/π`, available as `inv_pi` in x₀ lists.
pub const INV_PI: f64 = std::f64::consts::FRAC_1_PI;
/// `1/e`, available as `inv_e` in x₀ lists.
pub const INV_E: f64 = 0.36787944117144233;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ChainName {
    Mc1,
    Mc2,
    Mc3,
    Mc4,
    Mc5,
}

#[derive(Debug, Parser)]
#[command(
    name = "pfa",
    version,
    about = "Two-jump Markov chains on [0,1]: iteration, convergence diagnostics, certificate checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Builtin chain: mc1..mc5.
    #[arg(long, global = true, value_enum)]
    pub chain: Option<ChainName>,
    /// Kernel spec JSON file; overrides --chain.
    #[arg(long, global = true)]
    pub pi_file: Option<PathBuf>,
    /// Jump probability for mc5.
    #[arg(long, global = true)]
    pub p: Option<f64>,
    /// Comma-separated starting points; `inv_pi` and `inv_e` are accepted.
    #[arg(long, global = true, default_value = "0.5")]
    pub x0: String,
    /// Number of steps.
    #[arg(long, global = true, default_value_t = 10)]
    pub n: usize,
    /// Witness depth, or trajectory depth for set families.
    #[arg(long, global = true, default_value_t = 20)]
    pub depth: u32,
    /// Probes per witness level.
    #[arg(long, global = true, default_value_t = 16)]
    pub probes: usize,
    /// Starting-point grid, `geo:<j_max>`.
    #[arg(long, global = true, default_value = "geo:12")]
    pub grid: String,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Omit the timestamp comment line.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dump μ₀..μₙ for each starting point.
    Iterate,
    /// Distance to the target and weak-* gap for n = 0..N.
    Profile {
        /// Target is the Dirac mass at this point.
        #[arg(long, default_value_t = 0.0)]
        target: f64,
    },
    /// Worst distance to the target over the grid, per n.
    Sweep {
        #[arg(long, default_value_t = 0.0)]
        target: f64,
    },
    /// Verify a certificate.
    Certify {
        #[command(subcommand)]
        which: CertifyCommand,
    },
    /// Grid points the chain never leaves.
    FixedPoints,
    /// Canned tables for one of the five example chains.
    Reproduce {
        #[arg(value_enum)]
        chain: ChainName,
    },
}

#[derive(Debug, Subcommand)]
pub enum CertifyCommand {
    /// Check an (εₙ, Kₙ) witness.
    Z {
        #[arg(long, default_value = "near_one")]
        shape: String,
        #[arg(long, default_value_t = 0.5)]
        param: f64,
        /// Witness JSON file; overrides --shape and --param.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Check a Doeblin certificate over the adversarial set family.
    Doeblin {
        /// Certificate JSON file. Defaults to φ = ½δ₀ + ½δ₁, ε = ¼, k = 1.
        #[arg(long)]
        cert: Option<PathBuf>,
        /// Override ε of the default certificate.
        #[arg(long)]
        eps: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Task {
    Iterate,
    Profile { target: Point },
    Sweep { target: Point },
    CertifyZ(ZSource),
    CertifyDoeblin(DoeblinCertificate),
    FixedPoints,
    Reproduce(ChainName),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ZSource {
    Shape { shape: Shape, param: f64 },
    Spec(ZWitnessSpec),
}

/// A validated run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub chain: KernelSpec,
    /// True when the chain came from a spec file.
    pub custom_file: bool,
    pub task: Task,
    pub x0: Vec<Point>,
    pub n_max: usize,
    pub grid_j_max: u32,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub depth: u32,
    pub probes: usize,
    pub timestamp: bool,
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses a comma-separated x₀ list.
pub fn parse_x0_list(src: &str) -> Result<Vec<Point>, CliError> {
    let mut out = Vec::new();
    for tok in src.split(',').map(str::trim) {
        let v = match tok {
            "inv_pi" => INV_PI,
            "inv_e" => INV_E,
            t => t
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("bad x0 value {t:?}")))?,
        };
        out.push(Point::new(v).map_err(|e| CliError::Config(format!("x0 {tok}: {e}")))?);
    }
    Ok(out)
}

/// Parses `geo:<j_max>`.
pub fn parse_grid(src: &str) -> Result<u32, CliError> {
    let bad = || CliError::Config(format!("bad grid {src:?}, expected geo:<j_max>"));
    let j = src.strip_prefix("geo:").ok_or_else(bad)?;
    match j.parse::<u32>() {
        Ok(j) if j >= 1 => Ok(j),
        _ => Err(bad()),
    }
}

fn builtin_spec(name: ChainName, p: f64) -> KernelSpec {
    match name {
        ChainName::Mc1 => KernelSpec::Mc1,
        ChainName::Mc2 => KernelSpec::Mc2,
        ChainName::Mc3 => KernelSpec::Mc3,
        ChainName::Mc4 => KernelSpec::Mc4,
        ChainName::Mc5 => KernelSpec::Mc5 { p },
    }
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<RunConfig, CliError> {
        if cli.n == 0 || cli.depth == 0 || cli.probes == 0 {
            return Err(CliError::Config(
                "--n, --depth and --probes must be at least 1".into(),
            ));
        }
        let task = match cli.command {
            Command::Iterate => Task::Iterate,
            Command::Profile { target } => Task::Profile {
                target: Point::new(target).map_err(|e| CliError::Config(e.to_string()))?,
            },
            Command::Sweep { target } => Task::Sweep {
                target: Point::new(target).map_err(|e| CliError::Config(e.to_string()))?,
            },
            Command::Certify { which } => match which {
                CertifyCommand::Z {
                    shape,
                    param,
                    witness,
                } => Task::CertifyZ(match witness {
                    Some(path) => ZSource::Spec(ZWitnessSpec::from_json(&read(&path)?)?),
                    None => ZSource::Shape {
                        shape: shape.parse()?,
                        param,
                    },
                }),
                CertifyCommand::Doeblin { cert, eps } => {
                    let mut c = match cert {
                        Some(path) => DoeblinCertificate::from_json(&read(&path)?)?,
                        None => DoeblinCertificate::two_point(0.5)?,
                    };
                    if let Some(e) = eps {
                        c = DoeblinCertificate::new(c.phi, e, c.k, c.cesaro_m)?;
                    }
                    Task::CertifyDoeblin(c)
                }
            },
            Command::FixedPoints => Task::FixedPoints,
            Command::Reproduce { chain } => Task::Reproduce(chain),
        };
        let default_p = if matches!(task, Task::Reproduce(ChainName::Mc5)) {
            0.3
        } else {
            0.5
        };
        let p = cli.p.unwrap_or(default_p);
        let (chain, custom_file) = match (&cli.pi_file, &task) {
            (Some(path), _) => (KernelSpec::from_json(&read(path)?)?, true),
            (None, Task::Reproduce(name)) => (builtin_spec(*name, p), false),
            (None, _) => (builtin_spec(cli.chain.unwrap_or(ChainName::Mc1), p), false),
        };
        Ok(RunConfig {
            chain,
            custom_file,
            task,
            x0: parse_x0_list(&cli.x0)?,
            n_max: cli.n,
            grid_j_max: parse_grid(&cli.grid)?,
            format: cli.format,
            out: cli.out,
            depth: cli.depth,
            probes: cli.probes,
            timestamp: !cli.no_timestamp,
        })
    }
}

/// What a run produced.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub output: String,
    /// False when a checked property failed; the output holds the report.
    pub verified: bool,
    /// Human-readable failure summary for standard error.
    pub diagnostics: Vec<String>,
}

fn timestamp_line() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("# generated at unix time {secs}\n")
}

fn real(v: f64) -> String {
    fmt_real(v)
}

pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut chain = config.chain.build()?;
    if let Task::Reproduce(name) = config.task {
        // Reproduction tables are labelled by the example they reproduce,
        // whatever spec supplied the kernel.
        chain = chain.with_label(format!("{name:?}").to_lowercase());
    }
    let csv = config.format == Format::Csv;
    let mut outcome = match &config.task {
        Task::Iterate => run_iterate(&chain, config)?,
        Task::Profile { target } => {
            let profiles = profiles(&chain, config, *target)?;
            Outcome {
                output: if csv {
                    profiles_csv(&profiles)
                } else {
                    profiles_json(&profiles)
                },
                verified: true,
                diagnostics: vec![],
            }
        }
        Task::Sweep { target } => run_sweep(&chain, config, *target)?,
        Task::CertifyZ(source) => {
            let w = match source {
                ZSource::Shape { shape, param } => {
                    ZWitness::of_shape(*shape, *param, config.depth)?
                }
                ZSource::Spec(spec) => spec.build()?,
            };
            let report = verify_z_witness(&chain, &w, config.probes)?;
            let mut diagnostics = vec![];
            if let Some(c) = &report.counterexample {
                diagnostics.push(format!(
                    "kernel bound fails at n = {}, x = {}: p(x, K_n) = {} < {}",
                    c.n, c.x, c.mass, c.required
                ));
            }
            diagnostics.extend(report.notes.iter().cloned());
            Outcome {
                output: report.to_json() + "\n",
                verified: report.passed(),
                diagnostics,
            }
        }
        Task::CertifyDoeblin(cert) => {
            let family = adversarial_set_family(&interior_seeds(&config.x0), config.depth)?;
            let x_grid = doeblin_grid(config.grid_j_max);
            let report = check_doeblin(&chain, cert, &family, &x_grid)?;
            let mut diagnostics = vec![];
            if let Some(c) = &report.counterexample {
                diagnostics.push(format!(
                    "condition fails on set #{} {} at x = {}: {} > {}",
                    c.set_index, c.set, c.x, c.value, report.bound
                ));
            }
            Outcome {
                output: report.to_json() + "\n",
                verified: report.passed,
                diagnostics,
            }
        }
        Task::FixedPoints => run_fixed_points(&chain, config)?,
        Task::Reproduce(name) => {
            let r = reproduce(*name, &chain, config.grid_j_max)?;
            let diagnostics = r.failed_checks();
            Outcome {
                verified: diagnostics.is_empty(),
                output: r.text,
                diagnostics,
            }
        }
    };
    let commented = csv || matches!(config.task, Task::Reproduce(_));
    let json_report = matches!(config.task, Task::CertifyZ(_) | Task::CertifyDoeblin(_));
    if config.timestamp && commented && !json_report {
        outcome.output = timestamp_line() + &outcome.output;
    }
    Ok(outcome)
}

fn interior_seeds(x0: &[Point]) -> Vec<Point> {
    x0.iter().copied().filter(|p| p.is_interior()).collect()
}

/// `{0, 1}`, a uniform grid of 1000 cells and the geometric endpoint grid.
pub fn doeblin_grid(j_max: u32) -> Vec<Point> {
    let mut g = grid::audit_grid(1000);
    g.extend(grid::geometric_grid(j_max));
    g.sort();
    g.dedup();
    g
}

fn profiles(
    chain: &TwoJumpChain,
    config: &RunConfig,
    target: Point,
) -> Result<Vec<ConvergenceProfile>, CliError> {
    let tests = default_test_family();
    let mut out = Vec::with_capacity(config.x0.len());
    for &x0 in &config.x0 {
        out.push(convergence_profile(
            chain,
            x0,
            &dirac(target),
            config.n_max,
            &tests,
        )?);
    }
    Ok(out)
}

fn run_iterate(chain: &TwoJumpChain, config: &RunConfig) -> Result<Outcome, CliError> {
    let mut table = Table::new(&["chain", "x0", "n", "x", "log_x", "mass", "log_mass"]);
    let mut json = Vec::new();
    for &x0 in &config.x0 {
        for (n, mu) in iterate(chain, &dirac(x0), config.n_max)?.iter().enumerate() {
            for a in mu.atoms() {
                table.row(vec![
                    chain.label().to_string(),
                    x0.to_string(),
                    n.to_string(),
                    real(a.point.value()),
                    real(a.point.log_value()),
                    real(a.mass.value()),
                    real(a.mass.ln()),
                ]);
            }
            json.push(serde_json::json!({
                "chain": chain.label(),
                "x0": x0.value(),
                "n": n,
                "measure": mu.to_json(),
            }));
        }
    }
    let output = match config.format {
        Format::Csv => table.render(),
        Format::Json => serde_json::to_string_pretty(&json).expect("serializes") + "\n",
    };
    Ok(Outcome {
        output,
        verified: true,
        diagnostics: vec![],
    })
}

/// One row per n: the grid point with the largest distance, in the profile
/// column layout.
fn run_sweep(chain: &TwoJumpChain, config: &RunConfig, target: Point) -> Result<Outcome, CliError> {
    let grid: Vec<Point> = grid::geometric_grid(config.grid_j_max);
    let tests = default_test_family();
    let target_m = dirac(target);
    let mut table = Table::new(&PROFILE_HEADER.split(',').collect::<Vec<_>>());
    let mut json = Vec::new();
    for n in 0..=config.n_max {
        let (x0, tv) = uniformity_argmax(chain, &grid, &target_m, n)?;
        let gap = weak_star_gap(chain, x0, n, &tests, &target_m)?;
        let log10 = if tv > 0.0 {
            tv.log10()
        } else {
            f64::NEG_INFINITY
        };
        table.row(vec![
            chain.label().to_string(),
            x0.to_string(),
            n.to_string(),
            real(tv),
            real(log10),
            real(gap),
        ]);
        json.push(serde_json::json!({
            "chain": chain.label(),
            "x0": x0.value(),
            "n": n,
            "tv": tv,
            "log10_tv": real(log10),
            "weak_gap": gap,
            "grid": format!("geo:{}", config.grid_j_max),
        }));
    }
    let output = match config.format {
        Format::Csv => table.render(),
        Format::Json => serde_json::to_string_pretty(&json).expect("serializes") + "\n",
    };
    Ok(Outcome {
        output,
        verified: true,
        diagnostics: vec![],
    })
}

fn run_fixed_points(chain: &TwoJumpChain, config: &RunConfig) -> Result<Outcome, CliError> {
    let mut g = grid::with_endpoints(&grid::interior_grid(1000));
    g.extend(grid::geometric_grid(config.grid_j_max));
    g.sort();
    g.dedup();
    let fixed = crate::analysis::dirac_fixed_points(chain, &g)?;
    let mut table = Table::new(&["chain", "x", "log_x"]);
    for x in &fixed {
        table.row(vec![
            chain.label().to_string(),
            real(x.value()),
            real(x.log_value()),
        ]);
    }
    let output = match config.format {
        Format::Csv => table.render(),
        Format::Json => {
            let xs: Vec<f64> = fixed.iter().map(|x| x.value()).collect();
            serde_json::to_string_pretty(&serde_json::json!({
                "chain": chain.label(),
                "grid_size": g.len(),
                "fixed_points": xs,
            }))
            .expect("serializes")
                + "\n"
        }
    };
    Ok(Outcome {
        output,
        verified: true,
        diagnostics: vec![],
    })
}

/// Entry point used by the binary. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let config = match RunConfig::from_cli(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let outcome = match run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let written = match &config.out {
        Some(path) => fs::write(path, &outcome.output).map_err(|e| (path.display().to_string(), e)),
        None => std::io::stdout()
            .write_all(outcome.output.as_bytes())
            .map_err(|e| ("standard output".to_string(), e)),
    };
    if let Err((path, e)) = written {
        eprintln!("error: writing {path}: {e}");
        return 2;
    }
    for d in &outcome.diagnostics {
        eprintln!("{d}");
    }
    if outcome.verified {
        0
    } else {
        eprintln!("verification failed");
        1
    }
}
