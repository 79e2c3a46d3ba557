//! Command-line front end for `rds-entropy`: parses flags and config files,
//! runs an experiment and maps outcomes to exit codes.

pub mod config;
pub mod run;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{ConfigLayer, ExperimentConfig, Needs};
use run::{ExitStatus, RunError, RunOutput};

#[derive(Debug, Parser)]
#[command(name = "rds-entropy", version, about = "Entropy experiments on random dynamical systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the model systems with their parameters and oracles.
    ListSystems,
    /// Estimate separated-set topological entropy.
    EstimateTop(RunArgs),
    /// Estimate fiber entropy of partitions under the invariant measure.
    EstimateFiber(RunArgs),
    /// Compare topological and fiber entropy.
    Varprin(RunArgs),
    /// Run the invariant suites.
    Audit {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Flat TOML file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    system: Option<String>,
    /// System parameter, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    param: Vec<String>,
    /// Window index, repeatable, strictly increasing.
    #[arg(long = "n")]
    n: Vec<usize>,
    /// Scale, repeatable, strictly decreasing.
    #[arg(long = "eps")]
    eps: Vec<f64>,
    #[arg(long)]
    omega_samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// exact or greedy.
    #[arg(long)]
    method: Option<String>,
    /// Partition name, repeatable; defaults to the system's canonical ones.
    #[arg(long = "partition")]
    partition: Vec<String>,
    /// CSV output path; the table goes to standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    exact_cap: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

fn nonempty<T>(v: Vec<T>) -> Option<Vec<T>> {
    (!v.is_empty()).then_some(v)
}

impl RunArgs {
    fn layer(self) -> Result<ConfigLayer, config::ConfigError> {
        let base = match &self.config {
            Some(path) => ConfigLayer::from_file(path)?,
            None => ConfigLayer::default(),
        };
        Ok(base.overlay(ConfigLayer {
            system: self.system,
            param: nonempty(self.param),
            n: nonempty(self.n),
            eps: nonempty(self.eps),
            omega_samples: self.omega_samples,
            seed: self.seed,
            method: self.method,
            partition: nonempty(self.partition),
            out: self.out,
            exact_cap: self.exact_cap,
            threads: self.threads,
        }))
    }
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    match threads {
        None => Ok(f()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| RunError::Config(config::ConfigError::new("threads", e.to_string()))),
    }
}

type Runner = fn(&ExperimentConfig) -> Result<RunOutput, RunError>;

fn execute(command: Command) -> Result<(RunOutput, Option<PathBuf>), RunError> {
    let (args, needs, body): (RunArgs, Needs, Runner) = match command {
        Command::ListSystems => return Ok((run::list_systems(), None)),
        Command::Audit { seed, threads } => {
            if threads == Some(0) {
                return Err(config::ConfigError::new("threads", "must be at least 1").into());
            }
            return Ok((in_pool(threads, || run::audit(seed))?, None));
        }
        Command::EstimateTop(a) => (a, Needs::Top, run::estimate_top),
        Command::EstimateFiber(a) => (a, Needs::Fiber, run::estimate_fiber),
        Command::Varprin(a) => (a, Needs::Both, run::varprin),
    };
    let cfg = ExperimentConfig::resolve(args.layer()?, needs)?;
    let output = in_pool(cfg.threads, || body(&cfg))??;
    Ok((output, cfg.out.clone()))
}

/// Runs the tool on `args` (program name first) and returns its exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { ExitStatus::Config } else { ExitStatus::Success };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code as i32;
        }
    };
    match execute(cli.command) {
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.status() as i32
        }
        Ok((output, out_path)) => {
            let _ = stdout.write_all(output.summary.as_bytes());
            if let Some(table) = &output.table {
                let csv = table.to_csv_string();
                match out_path {
                    Some(path) => {
                        if let Err(e) = std::fs::write(&path, csv) {
                            let _ = writeln!(stderr, "cannot write {}: {e}", path.display());
                            return ExitStatus::Config as i32;
                        }
                    }
                    None => {
                        let _ = stdout.write_all(csv.as_bytes());
                    }
                }
            }
            if output.passed {
                ExitStatus::Success as i32
            } else {
                ExitStatus::PropertyFailure as i32
            }
        }
    }
}
