mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hetring::dynamics::Representation;

use commands::Status;
use config::{Format, Layer, RunConfig};

/// Heteroclinic networks of inhibitory-coupled logistic maps on ring graphs.
#[derive(Debug, Parser)]
#[command(name = "hetring", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fixed points and connections: DOT and JSON, census, sinks.
    Network,
    /// Enumerate heteroclinic cycles.
    Cycles,
    /// Transition matrices and stability reports per cycle.
    Stability,
    /// Closed-form vs numeric stability over a (j, p, delta) grid.
    Sweep,
    /// Iterate the map, writing the trajectory and its epochs.
    Simulate,
    /// Fit the two-mode decay model to valley logs from an epoch CSV.
    Fit,
    /// Run the acceptance checks.
    Verify,
}

#[derive(Debug, Args)]
struct Opts {
    /// Config file (TOML, or JSON by extension); CLI flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Graph JSON: {"n": 5, "m": 1} or {"n": 4, "edges": [[1, 2], ...]}.
    #[arg(long, global = true)]
    graph: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    m: Option<usize>,
    #[arg(long, global = true)]
    r: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long, global = true)]
    steps: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Epoch threshold (default xhat / 2).
    #[arg(long, global = true)]
    theta: Option<f64>,
    /// Lower clamp applied after every step.
    #[arg(long, global = true)]
    floor: Option<f64>,
    /// Output directory (default ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Longest cycle to enumerate (default: number of fixed points).
    #[arg(long, global = true)]
    max_cycle_len: Option<usize>,
    /// Cycle index as listed by `cycles`.
    #[arg(long, global = true)]
    cycle: Option<usize>,
    /// Initial condition: fixed point label like `1,3`, `eigen`, or `state:x1,x2,...`.
    #[arg(long, global = true)]
    ic: Option<String>,
    /// Noise amplitude for fixed-point initial conditions.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true, value_enum)]
    representation: Option<RepresentationArg>,
    #[arg(long, global = true)]
    record_every: Option<u64>,
    /// Stop after this many complete epochs.
    #[arg(long, global = true)]
    max_epochs: Option<usize>,
    /// Eigenvalue index (descending modulus) for `--ic eigen`; default: the positive real one.
    #[arg(long, global = true)]
    eig_index: Option<usize>,
    /// Log-space scale for `--ic eigen` (negative).
    #[arg(long, global = true, allow_negative_numbers = true)]
    scale: Option<f64>,
    /// Epoch CSV for `fit`.
    #[arg(long, global = true)]
    epochs: Option<PathBuf>,
    /// First epoch to fit.
    #[arg(long, global = true)]
    first: Option<usize>,
    /// Number of epochs to fit.
    #[arg(long, global = true)]
    count: Option<usize>,
    /// Criteria to verify, e.g. `1,2,6`.
    #[arg(long, global = true, value_delimiter = ',')]
    criteria: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum RepresentationArg {
    Linear,
    Log,
}

impl Opts {
    fn layer(&self) -> Layer {
        Layer {
            graph_file: self.graph.clone(),
            graph: None,
            n: self.n,
            m: self.m,
            r: self.r,
            gamma: self.gamma,
            steps: self.steps,
            seed: self.seed,
            theta: self.theta,
            floor: self.floor,
            out: self.out.clone(),
            format: self.format,
            jobs: self.jobs,
            max_cycle_len: self.max_cycle_len,
            cycle: self.cycle,
            ic: self.ic.clone(),
            epsilon: self.epsilon,
            representation: self.representation.map(|r| match r {
                RepresentationArg::Linear => Representation::Linear,
                RepresentationArg::Log => Representation::Log,
            }),
            record_every: self.record_every,
            max_epochs: self.max_epochs,
            eig_index: self.eig_index,
            scale: self.scale,
            epochs: self.epochs.clone(),
            first: self.first,
            count: self.count,
            grid: None,
            criteria: self.criteria.clone(),
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<Status> {
    let file = match &cli.opts.config {
        Some(p) => Layer::from_file(p)?,
        None => Layer::default(),
    };
    let name = match cli.command {
        Command::Network => "network",
        Command::Cycles => "cycles",
        Command::Stability => "stability",
        Command::Sweep => "sweep",
        Command::Simulate => "simulate",
        Command::Fit => "fit",
        Command::Verify => "verify",
    };
    let cfg = RunConfig::resolve(name, cli.opts.layer(), file)?;
    match cli.command {
        Command::Network => commands::cmd_network(&cfg),
        Command::Cycles => commands::cmd_cycles(&cfg),
        Command::Stability => commands::cmd_stability(&cfg),
        Command::Sweep => commands::cmd_sweep(&cfg),
        Command::Simulate => commands::cmd_simulate(&cfg),
        Command::Fit => commands::cmd_fit(&cfg),
        Command::Verify => commands::cmd_verify(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Status::Complete) => ExitCode::SUCCESS,
        Ok(Status::Partial(n)) => {
            eprintln!("error: {n} requested item(s) failed; see the output files");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
