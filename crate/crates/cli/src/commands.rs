use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, bail, Context, Result};
use hetring::dynamics::{
    eigenvector_ic, epoch_growth_rate, fit_decay_values, fit_pure_mode, perturbed_ic, simulate, FitResult,
    InitialState, PureFit, SimParams,
};
use hetring::export::{
    epoch_rows, network_dot, network_record, read_epochs_csv, to_json_pretty, write_epochs_csv,
    write_fit_curve_csv, write_trajectory_csv, OFF_NETWORK,
};
use hetring::graph::ActiveSet;
use hetring::linalg::{eigenvalues, is_real, ComplexValue};
use hetring::network::{FixedPoint, SymmetryClass};
use hetring::stability::{
    delta, gamma_for_delta, podvigina_check, transition_matrix_for_cycle, StabilityReport, TransitionMatrix,
};
use hetring::sweep::{run_sweep, write_sweep_csv};
use hetring::{build_network, enumerate_cycles, CouplingGraph, CycleDescriptor, HetNetwork};
use log::info;
use serde::Serialize;

use crate::config::{Format, RunConfig};

/// How a command finished when it did not error outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Complete,
    /// Output was written but some requested items failed.
    Partial(usize),
}

struct Output<'a> {
    dir: &'a Path,
    written: Vec<PathBuf>,
}

impl<'a> Output<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self> {
        fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
        let mut out = Output {
            dir: &cfg.out,
            written: Vec::new(),
        };
        out.text("config.json", &format!("{}\n", to_json_pretty(cfg)?))?;
        Ok(out)
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.written.push(p.clone());
        p
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, body).with_context(|| format!("writing {}", p.display()))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.text(name, &format!("{}\n", to_json_pretty(value)?))
    }

    fn file(&mut self, name: &str) -> Result<BufWriter<File>> {
        let p = self.path(name);
        Ok(BufWriter::new(
            File::create(&p).with_context(|| format!("creating {}", p.display()))?,
        ))
    }

    /// Timestamped sidecar; the only output that differs between reruns.
    fn finish(self, cfg: &RunConfig, status: Status) -> Result<Status> {
        #[derive(Serialize)]
        struct Meta<'a> {
            command: &'a str,
            version: &'a str,
            timestamp_unix: u64,
            complete: bool,
            outputs: Vec<String>,
        }
        let outputs = self
            .written
            .iter()
            .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
            .collect();
        let meta = Meta {
            command: &cfg.command,
            version: env!("CARGO_PKG_VERSION"),
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            complete: status == Status::Complete,
            outputs,
        };
        let p = self.dir.join("meta.json");
        fs::write(&p, format!("{}\n", to_json_pretty(&meta)?))
            .with_context(|| format!("writing {}", p.display()))?;
        Ok(status)
    }
}

fn graph(cfg: &RunConfig) -> Result<CouplingGraph> {
    Ok(cfg.graph.build()?)
}

fn network(cfg: &RunConfig) -> Result<HetNetwork> {
    Ok(build_network(&graph(cfg)?, cfg.r, cfg.gamma)?)
}

fn cycles(cfg: &RunConfig, net: &HetNetwork) -> Result<Vec<CycleDescriptor>> {
    let max_len = cfg.max_cycle_len.unwrap_or(net.fixed_points.len());
    Ok(enumerate_cycles(net, max_len)?)
}

fn select_cycle(cfg: &RunConfig, net: &HetNetwork) -> Result<(usize, CycleDescriptor)> {
    let all = cycles(cfg, net)?;
    let idx = cfg.cycle.unwrap_or(0);
    let c = all
        .get(idx)
        .cloned()
        .ok_or_else(|| anyhow!("cycle {idx} not found; the network has {} cycles", all.len()))?;
    Ok((idx, c))
}

fn check_format(cfg: &RunConfig, allowed: &[Format]) -> Result<()> {
    match cfg.format {
        Some(f) if !allowed.contains(&f) => bail!("--format {f:?} is not available for {}", cfg.command),
        _ => Ok(()),
    }
}

pub fn cmd_network(cfg: &RunConfig) -> Result<Status> {
    check_format(cfg, &[Format::Dot, Format::Json])?;
    let net = network(cfg)?;
    let mut out = Output::new(cfg)?;
    let rec = network_record(&net);
    if cfg.format != Some(Format::Json) {
        out.text("network.dot", &network_dot(&net))?;
    }
    if cfg.format != Some(Format::Dot) {
        out.json("network.json", &rec)?;
    }
    let census: Vec<String> = rec.census[1..].iter().map(|c| c.to_string()).collect();
    println!(
        "{} fixed points (by active count {}), {} connections, sinks: {}",
        net.fixed_points.len(),
        census.join("/"),
        net.connections.len(),
        if rec.sinks.is_empty() { "none".into() } else { rec.sinks.join(" ") }
    );
    out.finish(cfg, Status::Complete)
}

#[derive(Serialize)]
struct CycleRecord {
    index: usize,
    labels: Vec<String>,
    len: usize,
    j: Option<usize>,
    symmetric: bool,
    symmetry_class: SymmetryClass,
    rotation: Option<usize>,
    /// 1-based entering node of each connection.
    entering: Vec<usize>,
}

fn cycle_record(net: &HetNetwork, index: usize, c: &CycleDescriptor) -> CycleRecord {
    CycleRecord {
        index,
        labels: c.labels(net),
        len: c.len(),
        j: c.j,
        symmetric: c.symmetric,
        symmetry_class: c.symmetry_class,
        rotation: c.rotation,
        entering: c.connections.iter().map(|&k| net.connections[k].entering + 1).collect(),
    }
}

pub fn cmd_cycles(cfg: &RunConfig) -> Result<Status> {
    check_format(cfg, &[Format::Json])?;
    let net = network(cfg)?;
    let all = cycles(cfg, &net)?;
    let mut out = Output::new(cfg)?;
    let records: Vec<CycleRecord> = all.iter().enumerate().map(|(i, c)| cycle_record(&net, i, c)).collect();
    for r in &records {
        println!("cycle {}: {}", r.index, r.labels.join(" -> "));
    }
    out.json("cycles.json", &records)?;
    out.finish(cfg, Status::Complete)
}

#[derive(Serialize)]
struct CycleStability {
    cycle: CycleRecord,
    delta: f64,
    /// Coupling at which `delta` reaches the report's threshold.
    gamma_star: Option<f64>,
    matrix: Option<TransitionMatrix>,
    report: Option<StabilityReport>,
    error: Option<String>,
}

pub fn cmd_stability(cfg: &RunConfig) -> Result<Status> {
    check_format(cfg, &[Format::Json])?;
    let net = network(cfg)?;
    let d = delta(cfg.r, cfg.gamma)?;
    let selected: Vec<(usize, CycleDescriptor)> = match cfg.cycle {
        Some(_) => vec![select_cycle(cfg, &net)?],
        None => cycles(cfg, &net)?.into_iter().enumerate().collect(),
    };
    let mut out = Output::new(cfg)?;
    let mut failed = 0;
    let mut results = Vec::new();
    for (i, c) in selected {
        let analysed = transition_matrix_for_cycle(&net, &c, &d)
            .and_then(|m| podvigina_check(&m).map(|rep| (m, rep)));
        let record = cycle_record(&net, i, &c);
        let entry = match analysed {
            Ok((m, rep)) => {
                println!(
                    "cycle {i} ({}): {:?}, lambda_max = {:.6}{:+.6}i, delta* = {:.6}",
                    record.labels.join(" -> "),
                    rep.status,
                    rep.lambda_max.re,
                    rep.lambda_max.im,
                    rep.delta_star
                );
                CycleStability {
                    cycle: record,
                    delta: d.value,
                    gamma_star: Some(gamma_for_delta(cfg.r, rep.delta_star)),
                    matrix: Some(m),
                    report: Some(rep),
                    error: None,
                }
            }
            Err(e) => {
                failed += 1;
                eprintln!("cycle {i} ({}): {e}", record.labels.join(" -> "));
                CycleStability {
                    cycle: record,
                    delta: d.value,
                    gamma_star: None,
                    matrix: None,
                    report: None,
                    error: Some(e.to_string()),
                }
            }
        };
        results.push(entry);
    }
    out.json("stability.json", &results)?;
    out.finish(cfg, if failed == 0 { Status::Complete } else { Status::Partial(failed) })
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Status> {
    check_format(cfg, &[Format::Csv, Format::Json])?;
    let rows = run_sweep(&cfg.grid, cfg.jobs)?;
    let mut out = Output::new(cfg)?;
    if cfg.format == Some(Format::Json) {
        out.json("sweep.json", &rows)?;
    } else {
        write_sweep_csv(&rows, out.file("sweep.csv")?)?;
    }
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    let disagree = rows
        .iter()
        .filter(|r| !r.near_threshold && r.agreement == Some(false))
        .count();
    println!("{} cells, {failed} failed, {disagree} disagreements away from the threshold", rows.len());
    out.finish(cfg, if failed == 0 { Status::Complete } else { Status::Partial(failed) })
}

/// `1,3` (fixed point plus noise), `eigen` (eigenvector of the selected
/// cycle) or `state:x1,x2,...` (explicit linear state).
fn initial_state(cfg: &RunConfig, g: &CouplingGraph) -> Result<InitialState> {
    if let Some(list) = cfg.ic.strip_prefix("state:") {
        let x = list
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .context("parsing --ic state")?;
        return Ok(InitialState::Linear(x));
    }
    if cfg.ic == "eigen" {
        let net = build_network(g, cfg.r, cfg.gamma)?;
        let (_, c) = select_cycle(cfg, &net)?;
        let m = transition_matrix_for_cycle(&net, &c, &delta(cfg.r, cfg.gamma)?)?;
        let which = match cfg.eig_index {
            Some(k) => k,
            None => positive_real_index(&m)?,
        };
        return Ok(eigenvector_ic(&net, &c, &m, which, cfg.scale)?);
    }
    let labels = cfg
        .ic
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .with_context(|| format!("--ic {:?} is not a fixed point label, \"eigen\" or \"state:...\"", cfg.ic))?;
    let fp = FixedPoint::new(g, ActiveSet::from_one_based(&labels)?, cfg.r)?;
    Ok(InitialState::Linear(perturbed_ic(&fp, g.n(), cfg.epsilon, cfg.seed)?))
}

fn positive_real_index(m: &TransitionMatrix) -> Result<usize> {
    eigenvalues(&m.entries)?
        .iter()
        .position(|z| is_real(*z) && z.re > 0.0)
        .ok_or_else(|| anyhow!("transition matrix has no positive real eigenvalue"))
}

#[derive(Serialize)]
struct SimSummary {
    iterations: u64,
    recorded: usize,
    theta: f64,
    epochs: usize,
    off_network_epochs: usize,
    growth_rate: Option<f64>,
    growth_settled: Option<bool>,
    active_sequence: Vec<String>,
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Status> {
    check_format(cfg, &[Format::Csv, Format::Json])?;
    let g = graph(cfg)?;
    let initial = initial_state(cfg, &g)?;
    let mut p = SimParams::new(g, cfg.r, cfg.gamma, cfg.steps, initial);
    p.floor = cfg.floor;
    p.theta = cfg.theta;
    p.record_every = cfg.record_every;
    p.representation = cfg.representation;
    p.stop_after_epochs = cfg.max_epochs;
    let traj = simulate(&p)?;
    let mut out = Output::new(cfg)?;
    let log_columns = cfg.representation == hetring::dynamics::Representation::Log;
    if cfg.format == Some(Format::Json) {
        #[derive(Serialize)]
        struct TrajectoryJson<'a> {
            times: &'a [u64],
            states: &'a [Vec<f64>],
            log_states: Option<&'a Vec<Vec<f64>>>,
        }
        out.json(
            "trajectory.json",
            &TrajectoryJson {
                times: &traj.times,
                states: &traj.states,
                log_states: traj.log_states.as_ref(),
            },
        )?;
        out.json("epochs.json", &epoch_rows(&traj.epochs))?;
    } else {
        write_trajectory_csv(&traj, log_columns, out.file("trajectory.csv")?)?;
        write_epochs_csv(&traj.epochs, out.file("epochs.csv")?)?;
    }
    let growth = epoch_growth_rate(&traj.epochs).ok();
    let summary = SimSummary {
        iterations: traj.iterations,
        recorded: traj.len(),
        theta: traj.epochs.theta,
        epochs: traj.epochs.len(),
        off_network_epochs: traj.epochs.epochs.iter().filter(|e| e.off_network()).count(),
        growth_rate: growth.map(|g| g.rate),
        growth_settled: growth.map(|g| g.settled),
        active_sequence: traj
            .epochs
            .epochs
            .iter()
            .map(|e| e.shadowed.as_ref().map_or_else(|| OFF_NETWORK.to_string(), |s| s.to_string()))
            .collect(),
    };
    info!("simulated {} iterations", traj.iterations);
    println!(
        "{} iterations, {} epochs{}",
        summary.iterations,
        summary.epochs,
        summary.growth_rate.map(|g| format!(", duration growth {g:.5}")).unwrap_or_default()
    );
    out.json("summary.json", &summary)?;
    out.finish(cfg, Status::Complete)
}

#[derive(Serialize)]
struct FitOutput {
    cycle: CycleRecord,
    first: usize,
    valleys: Vec<f64>,
    lambda1: ComplexValue,
    lambda2: f64,
    fit: FitResult,
    pure: PureFit,
}

pub fn cmd_fit(cfg: &RunConfig) -> Result<Status> {
    check_format(cfg, &[Format::Json])?;
    let path = cfg
        .epochs
        .as_ref()
        .ok_or_else(|| anyhow!("fit needs --epochs <epochs.csv>"))?;
    let rows = read_epochs_csv(File::open(path).with_context(|| format!("opening {}", path.display()))?)
        .with_context(|| format!("parsing {}", path.display()))?;
    let end = cfg.count.map_or(rows.len(), |c| (cfg.first + c).min(rows.len()));
    let valleys: Vec<f64> = rows.get(cfg.first..end).unwrap_or(&[]).iter().map(|r| r.x_k).collect();

    let net = network(cfg)?;
    let (idx, c) = select_cycle(cfg, &net)?;
    let m = transition_matrix_for_cycle(&net, &c, &delta(cfg.r, cfg.gamma)?)?;
    let ev = eigenvalues(&m.entries)?;
    let lambda1 = ev
        .iter()
        .copied()
        .find(|z| !is_real(*z) && z.im > 0.0)
        .ok_or_else(|| anyhow!("cycle {idx} has no complex eigenvalue"))?;
    let lambda2 = ev[positive_real_index(&m)?].re;

    let fit = fit_decay_values(&valleys, lambda1, lambda2)?;
    let pure = fit_pure_mode(&valleys, lambda2)?;
    let mut out = Output::new(cfg)?;
    write_fit_curve_csv(&valleys, &fit, Some(&pure), out.file("fit_curve.csv")?)?;
    println!(
        "{} valleys: rms {:.4e} (pure mode {:.4e}); c1 = {:.6}, c2 = {:.6}, c3 = {:.6}",
        valleys.len(),
        fit.rms_residual,
        pure.rms_residual,
        fit.c1,
        fit.c2,
        fit.c3
    );
    out.json(
        "fit.json",
        &FitOutput {
            cycle: cycle_record(&net, idx, &c),
            first: cfg.first,
            valleys,
            lambda1: lambda1.into(),
            lambda2,
            fit,
            pure,
        },
    )?;
    out.finish(cfg, Status::Complete)
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Status> {
    check_format(cfg, &[Format::Json])?;
    let mut out = Output::new(cfg)?;
    let outcomes: Vec<_> = cfg.criteria.iter().map(|&id| hetring::verify::run(id)).collect();
    for o in &outcomes {
        println!("{}", o.line());
    }
    out.json("verify.json", &outcomes)?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    out.finish(cfg, if failed == 0 { Status::Complete } else { Status::Partial(failed) })
}
