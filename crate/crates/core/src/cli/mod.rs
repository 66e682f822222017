//! The `topophase` command line.
//!
//! Exit status: 0 on success, 2 for configuration or validation errors, 3 when
//! the allocation is infeasible, 4 for usage errors.

pub mod render;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::capability::{line_yield, CapabilityVector};
use crate::config::{bundled_document, bundled_presets_source, Config, DEFAULT_PRESET};
use crate::error::Error;
use crate::mca::mca_rank;
use crate::model::{AllocationMethod, ModelBundle};
use crate::path::LinearPath;
use crate::phase::{mci, sweep_1d, sweep_2d, AxisEmbedding, SweepOptions};
use crate::siteselect::{select_site, SelectionMode};
use crate::topology::{allocate, brute_force_allocate, instances::random_instance, mebs, n_star, regime, FacilityCost};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "topophase", version, about = "Capability-driven manufacturing siting and topology analysis")]
pub struct Cli {
    /// Configuration file, or the name of a bundled document
    /// (default, two-metro, mca-demo, ab-sites).
    #[arg(long, global = true, default_value = "default")]
    pub config: String,

    /// Industry preset supplying thresholds and the default capability vector.
    #[arg(long, global = true, default_value = DEFAULT_PRESET)]
    pub preset: String,

    /// Write the primary output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Override a configuration value by dotted path, e.g. `product.price=12`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Method {
    Auto,
    Exact,
    LocalSearch,
}

impl From<Method> for AllocationMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Auto => AllocationMethod::Auto,
            Method::Exact => AllocationMethod::Exact,
            Method::LocalSearch => AllocationMethod::LocalSearch,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Mode {
    Classic,
    Mca,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PathKind {
    /// All four indices rise together from 0 to 1.
    Diagonal,
    /// From the preset's current capability to (1, 1, 1, 1).
    Preset,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Embedding {
    Symmetric,
    Dexterity,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Line yield rho^n.
    Yield {
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 50)]
        n: u32,
    },
    /// Minimum economic batch size and the regime it implies.
    Mebs {
        /// Capability as `delta,gamma,rho,tau`; defaults to the preset's current state.
        #[arg(long, value_name = "D,G,R,T")]
        c: Option<String>,
    },
    /// Rank regions by siting objective, best first.
    SelectSite {
        #[arg(long, value_name = "D,G,R,T")]
        c: Option<String>,
        #[arg(long, value_enum, default_value = "classic")]
        mode: Mode,
    },
    /// Rank regions by machine-climate adaptation factor.
    McaRank,
    /// Cost-minimizing facility set; CSV on the output, summary on stderr.
    Allocate {
        #[arg(long, value_name = "D,G,R,T")]
        c: Option<String>,
        #[arg(long, value_enum, default_value = "auto")]
        method: Method,
    },
    /// Concentration and phase along a capability path, with critical points on stderr.
    Sweep {
        #[arg(long, value_enum, default_value = "diagonal", conflicts_with_all = ["from", "to"])]
        path: PathKind,
        #[arg(long, value_name = "D,G,R,T", requires = "to")]
        from: Option<String>,
        #[arg(long, value_name = "D,G,R,T", requires = "from")]
        to: Option<String>,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[arg(long, default_value_t = 0.1)]
        jump_threshold: f64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long, value_enum, default_value = "auto")]
        method: Method,
        /// Also write the critical points as CSV to this file.
        #[arg(long)]
        critical_out: Option<PathBuf>,
    },
    /// Phase labels and concentration over the (delta*rho, gamma) plane.
    PhaseDiagram {
        #[arg(long, default_value_t = 0.8)]
        tau: f64,
        #[arg(long, default_value_t = 50)]
        rows: usize,
        #[arg(long, default_value_t = 50)]
        cols: usize,
        #[arg(long, value_enum, default_value = "symmetric")]
        embedding: Embedding,
        #[arg(long, value_enum, default_value = "auto")]
        method: Method,
    },
    /// Bundled industry presets.
    Presets {
        /// Print the shipped preset file verbatim instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Check the configuration and report every issue.
    Validate,
    /// Print the resolved configuration (after overrides) as JSON.
    Config,
    /// Compare `allocate` against exhaustive enumeration on random instances.
    OracleCheck {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 8)]
        max_regions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "local-search")]
        method: Method,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Model(Error),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Model(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_CONFIG,
            CliError::Model(e) => match e.root() {
                Error::Infeasible(_) | Error::Size(_) => EXIT_INFEASIBLE,
                _ => EXIT_CONFIG,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Io(m) => m.clone(),
            CliError::Model(e) => e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `delta,gamma,rho,tau`.
pub fn parse_capability(raw: &str) -> CliResult<CapabilityVector> {
    let parts = raw
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(format!("capability '{raw}': {e}")))?;
    let [d, g, r, t] = parts[..] else {
        return Err(CliError::Usage(format!(
            "capability '{raw}' must have four comma-separated components"
        )));
    };
    CapabilityVector::new(d, g, r, t).map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_overrides(raw: &[String]) -> CliResult<Vec<(String, String)>> {
    raw.iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_owned(), v.to_owned()))
                .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got '{kv}'")))
        })
        .collect()
}

fn read_document(spec: &str) -> CliResult<String> {
    let path = Path::new(spec);
    if path.is_file() {
        return fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {spec}: {e}")));
    }
    bundled_document(spec)
        .map(str::to_owned)
        .ok_or_else(|| CliError::Io(format!("configuration '{spec}' is neither a file nor a bundled document")))
}

fn load_config(cli: &Cli) -> CliResult<Config> {
    let document = read_document(&cli.config)?;
    Ok(Config::from_json_with_overrides(&document, &parse_overrides(&cli.overrides)?)?)
}

fn capability_or_preset(raw: Option<&str>, config: &Config, preset: &str) -> CliResult<CapabilityVector> {
    match raw {
        Some(raw) => parse_capability(raw),
        None => Ok(config.preset(preset)?.current),
    }
}

fn bundle(cli: &Cli, config: &Config, method: Method) -> CliResult<ModelBundle> {
    Ok(ModelBundle::from_config(config, &cli.preset)?.with_method(method.into()))
}

/// Output of one invocation: the primary text plus diagnostics for stderr.
#[derive(Debug, Default)]
pub struct Output {
    pub primary: String,
    pub diagnostics: String,
}

impl Output {
    fn primary(text: String) -> Self {
        Output {
            primary: text,
            diagnostics: String::new(),
        }
    }
}

/// Runs a parsed command without touching stdout or stderr.
pub fn execute(cli: &Cli) -> CliResult<Output> {
    match &cli.command {
        Command::Yield { rho, n } => {
            let y = line_yield(*rho, *n).map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(Output::primary(render::yield_table(*rho, *n, y)))
        }
        Command::Presets { json: true } => Ok(Output::primary(bundled_presets_source().to_owned())),
        Command::Presets { json: false } => Ok(Output::primary(render::presets(&load_config(cli)?.presets))),
        Command::Validate => {
            let config = load_config(cli)?;
            Ok(Output::primary(format!(
                "ok: {} regions, {} presets\n",
                config.world.regions.len(),
                config.presets.len()
            )))
        }
        Command::Config => Ok(Output::primary(load_config(cli)?.to_json_string())),
        Command::Mebs { c } => {
            let config = load_config(cli)?;
            let c = capability_or_preset(c.as_deref(), &config, &cli.preset)?;
            let m = mebs(&c, &config.cost_constants, &config.product)?;
            let threshold = n_star(&config.world, &config.product)?;
            let terms = FacilityCost::at(&c, &config.cost_constants, &config.product)?;
            Ok(Output::primary(render::mebs_table(m, threshold, regime(m, threshold)?, &terms)))
        }
        Command::SelectSite { c, mode } => {
            let config = load_config(cli)?;
            let c = capability_or_preset(c.as_deref(), &config, &cli.preset)?;
            let mode = match mode {
                Mode::Classic => SelectionMode::Classic,
                Mode::Mca => SelectionMode::Mca,
            };
            let scores = select_site(&config.world, &c, &config.weights, mode, Some(&config.mca_model))?;
            Ok(Output::primary(render::site_scores(&scores)))
        }
        Command::McaRank => {
            let config = load_config(cli)?;
            Ok(Output::primary(render::mca_ranking(&mca_rank(&config.world, &config.mca_model)?)))
        }
        Command::Allocate { c, method } => {
            let config = load_config(cli)?;
            let c = capability_or_preset(c.as_deref(), &config, &cli.preset)?;
            let b = bundle(cli, &config, *method)?;
            let allocation = allocate(&b, &c)?;
            let concentration = mci(&allocation.output_values())?;
            Ok(Output {
                primary: allocation.to_csv(&b.world)?,
                diagnostics: format!(
                    "total_cost={:.6} mci={concentration:.6} facilities={} [{}]\n",
                    allocation.total_cost,
                    allocation.facility_count(),
                    allocation.facility_ids().join(" ")
                ),
            })
        }
        Command::Sweep {
            path,
            from,
            to,
            steps,
            jump_threshold,
            tol,
            method,
            critical_out,
        } => {
            let config = load_config(cli)?;
            let b = bundle(cli, &config, *method)?;
            let line = match (from, to) {
                (Some(from), Some(to)) => LinearPath::new(parse_capability(from)?, parse_capability(to)?),
                _ => match path {
                    PathKind::Diagonal => LinearPath::diagonal(),
                    PathKind::Preset => LinearPath::new(config.preset(&cli.preset)?.current, CapabilityVector::ONE),
                },
            };
            if tol.is_nan() || *tol <= 0.0 {
                return Err(CliError::Usage(format!("--tol must be > 0, got {tol}")));
            }
            let opts = SweepOptions {
                jump_threshold: *jump_threshold,
                tol: *tol,
                ..SweepOptions::default()
            };
            let result = sweep_1d(&line, *steps, &b, &opts).map_err(|e| match e {
                Error::Domain(m) => CliError::Usage(m),
                other => other.into(),
            })?;
            let critical = result.critical_points_csv();
            if let Some(path) = critical_out {
                write_file(path, &critical)?;
            }
            Ok(Output {
                primary: result.to_csv(),
                diagnostics: critical,
            })
        }
        Command::PhaseDiagram {
            tau,
            rows,
            cols,
            embedding,
            method,
        } => {
            let config = load_config(cli)?;
            let b = bundle(cli, &config, *method)?;
            let embedding = match embedding {
                Embedding::Symmetric => AxisEmbedding::Symmetric,
                Embedding::Dexterity => AxisEmbedding::Dexterity,
            };
            let diagram = sweep_2d(*tau, (*rows, *cols), &b, embedding).map_err(|e| match e {
                Error::Domain(m) => CliError::Usage(m),
                other => other.into(),
            })?;
            Ok(Output::primary(diagram.to_csv()))
        }
        Command::OracleCheck {
            count,
            max_regions,
            seed,
            method,
        } => oracle_check(*count, *max_regions, *seed, *method),
    }
}

fn oracle_check(count: usize, max_regions: usize, seed: u64, method: Method) -> CliResult<Output> {
    if max_regions == 0 || max_regions > crate::topology::ORACLE_LIMIT {
        return Err(CliError::Usage(format!(
            "--max-regions must be in 1..={}",
            crate::topology::ORACLE_LIMIT
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::from("case,regions,allocate_cost,oracle_cost,relative_gap,same_facilities\n");
    let (mut equal, mut worst) = (0usize, 0.0f64);
    for case in 0..count {
        let (b, c) = random_instance(&mut rng, max_regions);
        let b = b.with_method(method.into());
        let heuristic = allocate(&b, &c)?;
        let exact = brute_force_allocate(&b, &c)?;
        let gap = (heuristic.total_cost - exact.total_cost) / exact.total_cost.abs().max(f64::MIN_POSITIVE);
        let same = heuristic.facility_ids() == exact.facility_ids();
        equal += usize::from(gap.abs() <= 1e-9);
        worst = worst.max(gap);
        out.push_str(&format!(
            "{case},{},{:.6},{:.6},{gap:.6},{same}\n",
            b.world.regions.len(),
            heuristic.total_cost,
            exact.total_cost
        ));
    }
    Ok(Output {
        primary: out,
        diagnostics: format!("equal={equal}/{count} worst_relative_gap={worst:.6}\n"),
    })
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Parses `args`, runs the command and writes its output. Returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(output) => {
            eprint!("{}", output.diagnostics);
            match &cli.out {
                Some(path) => match write_file(path, &output.primary) {
                    Ok(()) => 0,
                    Err(e) => {
                        eprintln!("error: {}", e.message());
                        e.exit_code()
                    }
                },
                None => {
                    print!("{}", output.primary);
                    0
                }
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}
