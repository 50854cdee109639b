//! Layered run configuration: CLI flags over a config file over defaults.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hetring::dynamics::Representation;
use hetring::sweep::GridSpec;
use hetring::GraphSpec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Dot,
}

/// One layer of settings; unset fields fall through to the layer below.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    /// Path to a graph JSON file.
    pub graph_file: Option<PathBuf>,
    /// Inline graph, config files only.
    pub graph: Option<GraphSpec>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub r: Option<f64>,
    pub gamma: Option<f64>,
    pub steps: Option<u64>,
    pub seed: Option<u64>,
    pub theta: Option<f64>,
    pub floor: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub jobs: Option<usize>,
    pub max_cycle_len: Option<usize>,
    pub cycle: Option<usize>,
    pub ic: Option<String>,
    pub epsilon: Option<f64>,
    pub representation: Option<Representation>,
    pub record_every: Option<u64>,
    pub max_epochs: Option<usize>,
    pub eig_index: Option<usize>,
    pub scale: Option<f64>,
    pub epochs: Option<PathBuf>,
    pub first: Option<usize>,
    pub count: Option<usize>,
    pub grid: Option<GridSpec>,
    pub criteria: Option<Vec<usize>>,
}

macro_rules! overlay {
    ($top:expr, $base:expr, $($field:ident),*) => {
        Layer { $($field: $top.$field.or($base.$field)),* }
    };
}

impl Layer {
    /// Fields set in `self` win over `base`.
    pub fn over(self, base: Layer) -> Layer {
        overlay!(
            self, base, graph_file, graph, n, m, r, gamma, steps, seed, theta, floor, out, format, jobs,
            max_cycle_len, cycle, ic, epsilon, representation, record_every, max_epochs, eig_index, scale,
            epochs, first, count, grid, criteria
        )
    }

    pub fn from_file(path: &Path) -> Result<Layer> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let is_json = path.extension().is_some_and(|e| e == "json");
        let layer: Layer = if is_json {
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        } else {
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        };
        // relative paths in a config file are relative to the file
        let dir = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: Option<PathBuf>| p.map(|p| if p.is_relative() { dir.join(p) } else { p });
        Ok(Layer {
            graph_file: rebase(layer.graph_file.clone()),
            epochs: rebase(layer.epochs.clone()),
            ..layer
        })
    }

    fn has_graph(&self) -> bool {
        self.graph_file.is_some() || self.graph.is_some() || self.n.is_some() || self.m.is_some()
    }
}

/// Fully resolved settings, echoed next to every run's output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub graph: GraphSpec,
    pub r: f64,
    pub gamma: f64,
    pub steps: u64,
    pub seed: u64,
    pub theta: Option<f64>,
    pub floor: Option<f64>,
    pub out: PathBuf,
    pub format: Option<Format>,
    pub jobs: Option<usize>,
    pub max_cycle_len: Option<usize>,
    pub cycle: Option<usize>,
    pub ic: String,
    pub epsilon: f64,
    pub representation: Representation,
    pub record_every: u64,
    pub max_epochs: Option<usize>,
    pub eig_index: Option<usize>,
    pub scale: f64,
    pub epochs: Option<PathBuf>,
    pub first: usize,
    pub count: Option<usize>,
    pub grid: GridSpec,
    pub criteria: Vec<usize>,
}

pub const DEFAULT_N: usize = 5;
pub const DEFAULT_M: usize = 1;
pub const DEFAULT_R: f64 = 2.0;
pub const DEFAULT_GAMMA: f64 = 3.04;
pub const DEFAULT_STEPS: u64 = 1_000_000;
pub const DEFAULT_EPSILON: f64 = 1e-6;
pub const DEFAULT_SCALE: f64 = -1e4;

fn graph_from(layer: &Layer) -> Result<Option<GraphSpec>> {
    if let Some(path) = &layer.graph_file {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading graph {}", path.display()))?;
        return Ok(Some(
            GraphSpec::from_json(&text).with_context(|| format!("parsing graph {}", path.display()))?,
        ));
    }
    if let Some(g) = &layer.graph {
        return Ok(Some(g.clone()));
    }
    Ok(None)
}

/// Graph precedence: a CLI graph file, else CLI `--n`/`--m` (missing values
/// from the file layer or defaults), else the file layer's graph, else the
/// default ring.
fn resolve_graph(cli: &Layer, file: &Layer) -> Result<GraphSpec> {
    if let Some(g) = graph_from(cli)? {
        return Ok(g);
    }
    if cli.n.is_some() || cli.m.is_some() {
        return Ok(GraphSpec::ring(
            cli.n.or(file.n).unwrap_or(DEFAULT_N),
            cli.m.or(file.m).unwrap_or(DEFAULT_M),
        ));
    }
    if let Some(g) = graph_from(file)? {
        return Ok(g);
    }
    if file.has_graph() {
        return Ok(GraphSpec::ring(file.n.unwrap_or(DEFAULT_N), file.m.unwrap_or(DEFAULT_M)));
    }
    Ok(GraphSpec::ring(DEFAULT_N, DEFAULT_M))
}

impl RunConfig {
    pub fn resolve(command: &str, cli: Layer, file: Layer) -> Result<RunConfig> {
        let graph = resolve_graph(&cli, &file)?;
        let l = cli.over(file);
        let cfg = RunConfig {
            command: command.to_string(),
            graph,
            r: l.r.unwrap_or(DEFAULT_R),
            gamma: l.gamma.unwrap_or(DEFAULT_GAMMA),
            steps: l.steps.unwrap_or(DEFAULT_STEPS),
            seed: l.seed.unwrap_or(1),
            theta: l.theta,
            floor: l.floor,
            out: l.out.unwrap_or_else(|| PathBuf::from("out")),
            format: l.format,
            jobs: l.jobs,
            max_cycle_len: l.max_cycle_len,
            cycle: l.cycle,
            ic: l.ic.unwrap_or_else(|| "1".into()),
            epsilon: l.epsilon.unwrap_or(DEFAULT_EPSILON),
            representation: l.representation.unwrap_or_default(),
            record_every: l.record_every.unwrap_or(1),
            max_epochs: l.max_epochs,
            eig_index: l.eig_index,
            scale: l.scale.unwrap_or(DEFAULT_SCALE),
            epochs: l.epochs,
            first: l.first.unwrap_or(0),
            count: l.count,
            grid: l.grid.unwrap_or_default(),
            criteria: l.criteria.unwrap_or_else(|| (1..=9).collect()),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.graph.build()?;
        if !(self.r.is_finite() && self.gamma.is_finite()) {
            bail!("r and gamma must be finite");
        }
        if self.jobs == Some(0) {
            bail!("--jobs must be at least 1");
        }
        if self.record_every == 0 {
            bail!("--record-every must be at least 1");
        }
        if !(self.epsilon >= 0.0) {
            bail!("--epsilon must be non-negative");
        }
        if !(self.scale < 0.0) {
            bail!("--scale must be negative");
        }
        if self.max_cycle_len == Some(0) {
            bail!("--max-cycle-len must be at least 1");
        }
        if let Some(bad) = self.criteria.iter().find(|c| !(1..=9).contains(*c)) {
            bail!("unknown criterion {bad}; criteria are numbered 1 to 9");
        }
        self.grid.validate()?;
        Ok(())
    }
}
