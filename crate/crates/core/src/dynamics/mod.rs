//! Direct iteration of the coupled map
//! `x'_k = r x_k (1 - x_k) exp(-gamma * sum of x_a over inhibitors a of k)`.
//!
//! Trajectories that shadow a stable cycle approach the invariant subspaces
//! faster than exponentially and reach the `f64` underflow limit within a few
//! epochs. [`Representation::Log`] iterates `y = ln x` instead, which keeps
//! full relative precision at any depth.

mod epochs;
mod fit;
mod ic;

pub use epochs::{
    cycle_run_length, epoch_growth_rate, extract_epochs, Epoch, EpochSeries, EpochTracker,
    GrowthRate,
};
pub use fit::{fit_decay, fit_decay_values, fit_pure_mode, FitResult, PureFit};
pub use ic::{eigenvector_ic, perturbed_ic};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{independent_sets, CouplingGraph};
use crate::network::xhat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Linear(Vec<f64>),
    /// Natural logarithms of the components.
    Log(Vec<f64>),
}

impl InitialState {
    pub fn len(&self) -> usize {
        match self {
            Self::Linear(v) | Self::Log(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_linear(&self) -> Vec<f64> {
        match self {
            Self::Linear(v) => v.clone(),
            Self::Log(v) => v.iter().map(|y| y.exp()).collect(),
        }
    }

    pub fn to_log(&self) -> Vec<f64> {
        match self {
            Self::Linear(v) => v.iter().map(|x| x.ln()).collect(),
            Self::Log(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimParams {
    pub graph: CouplingGraph,
    pub r: f64,
    pub gamma: f64,
    pub steps: u64,
    pub initial: InitialState,
    /// Lower clamp applied after every step when set.
    pub floor: Option<f64>,
    pub record_every: u64,
    pub representation: Representation,
    /// Epoch threshold; defaults to `xhat / 2`.
    pub theta: Option<f64>,
    /// Stop early once this many complete epochs have been seen.
    pub stop_after_epochs: Option<usize>,
}

impl SimParams {
    pub fn new(graph: CouplingGraph, r: f64, gamma: f64, steps: u64, initial: InitialState) -> Self {
        Self {
            graph,
            r,
            gamma,
            steps,
            initial,
            floor: None,
            record_every: 1,
            representation: Representation::Linear,
            theta: None,
            stop_after_epochs: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r <= 4.0) {
            return Err(Error::Domain(format!("r must lie in (0, 4], got {}", self.r)));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::Domain(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if self.initial.len() != self.graph.n() {
            return Err(Error::Domain(format!(
                "initial state has {} components, graph has {}",
                self.initial.len(),
                self.graph.n()
            )));
        }
        let linear = self.initial.to_linear();
        if let Some(bad) = linear.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::Domain(format!("initial component {bad} outside [0, 1]")));
        }
        if self.record_every == 0 {
            return Err(Error::Domain("record_every must be >= 1".into()));
        }
        if let Some(f) = self.floor {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::Domain(format!("floor must lie in (0, 1), got {f}")));
            }
        }
        let theta = self.theta();
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::Domain(format!("theta must lie in (0, 1), got {theta}")));
        }
        Ok(())
    }

    pub fn theta(&self) -> f64 {
        self.theta.unwrap_or_else(|| xhat(self.r) / 2.0)
    }
}

/// Precomputed inhibitor lists for repeated stepping.
#[derive(Debug, Clone)]
pub struct Stepper {
    inhibitors: Vec<Vec<usize>>,
    r: f64,
    ln_r: f64,
    gamma: f64,
}

impl Stepper {
    pub fn new(g: &CouplingGraph, r: f64, gamma: f64) -> Self {
        Self {
            inhibitors: (0..g.n()).map(|k| g.inhibitors_of(k)).collect(),
            r,
            ln_r: r.ln(),
            gamma,
        }
    }

    pub fn step_into(&self, x: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            let field: f64 = self.inhibitors[k].iter().map(|&a| x[a]).sum();
            *o = self.r * x[k] * (1.0 - x[k]) * (-self.gamma * field).exp();
        }
    }

    /// Same map on `y = ln x`; `lin` is scratch space for `exp(y)`.
    pub fn step_log_into(&self, y: &[f64], lin: &mut [f64], out: &mut [f64]) {
        for (l, &v) in lin.iter_mut().zip(y) {
            *l = v.exp();
        }
        for (k, o) in out.iter_mut().enumerate() {
            let field: f64 = self.inhibitors[k].iter().map(|&a| lin[a]).sum();
            *o = self.ln_r + y[k] + (-lin[k]).ln_1p() - self.gamma * field;
        }
    }
}

/// One application of the map.
pub fn step(g: &CouplingGraph, r: f64, gamma: f64, state: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; state.len()];
    Stepper::new(g, r, gamma).step_into(state, &mut out);
    out
}

/// One application of the map in log coordinates.
pub fn step_log(g: &CouplingGraph, r: f64, gamma: f64, y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; y.len()];
    let mut lin = vec![0.0; y.len()];
    Stepper::new(g, r, gamma).step_log_into(y, &mut lin, &mut out);
    out
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<u64>,
    /// Recorded states in `[0, 1]^n` (log runs are exponentiated and may underflow).
    pub states: Vec<Vec<f64>>,
    /// Recorded `ln x`, present for log runs.
    pub log_states: Option<Vec<Vec<f64>>>,
    pub params: SimParams,
    /// Epochs found at full resolution while iterating.
    pub epochs: EpochSeries,
    /// Iterations actually performed.
    pub iterations: u64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n(&self) -> usize {
        self.params.graph.n()
    }

    /// Recorded states as logarithms.
    pub fn logs(&self) -> Vec<Vec<f64>> {
        match &self.log_states {
            Some(l) => l.clone(),
            None => self
                .states
                .iter()
                .map(|s| s.iter().map(|x| x.ln()).collect())
                .collect(),
        }
    }
}

struct Recorder {
    log_mode: bool,
    times: Vec<u64>,
    states: Vec<Vec<f64>>,
    log_states: Option<Vec<Vec<f64>>>,
}

impl Recorder {
    fn new(log_mode: bool) -> Self {
        Self {
            log_mode,
            times: Vec::new(),
            states: Vec::new(),
            log_states: log_mode.then(Vec::new),
        }
    }

    fn push(&mut self, i: u64, cur: &[f64]) {
        self.times.push(i);
        if self.log_mode {
            self.states.push(cur.iter().map(|y| y.exp()).collect());
            if let Some(ls) = self.log_states.as_mut() {
                ls.push(cur.to_vec());
            }
        } else {
            self.states.push(cur.to_vec());
        }
    }
}

/// Iterate the map, recording every `record_every` steps and tracking epochs
/// at every step.
pub fn simulate(params: &SimParams) -> Result<Trajectory> {
    params.validate()?;
    let n = params.graph.n();
    let stepper = Stepper::new(&params.graph, params.r, params.gamma);
    let fixed = independent_sets(&params.graph).ok();
    let mut tracker = EpochTracker::new(n, params.theta(), fixed);
    let log_mode = params.representation == Representation::Log;
    let floor_log = params.floor.map(f64::ln);

    let mut cur = match params.representation {
        Representation::Linear => params.initial.to_linear(),
        Representation::Log => params.initial.to_log(),
    };
    let mut next = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut warned = vec![false; n];

    let observe = |cur: &[f64], buf: &mut Vec<f64>| {
        buf.clear();
        if log_mode {
            buf.extend_from_slice(cur);
        } else {
            buf.extend(cur.iter().map(|x| x.ln()));
        }
    };
    let mut logs = Vec::with_capacity(n);
    observe(&cur, &mut logs);
    tracker.push(0, &logs);
    let mut rec = Recorder::new(log_mode);
    rec.push(0, &cur);

    let mut iterations = 0;
    for i in 1..=params.steps {
        if log_mode {
            stepper.step_log_into(&cur, &mut scratch, &mut next);
            if let Some(fl) = floor_log {
                next.iter_mut().for_each(|y| *y = y.max(fl));
            }
        } else {
            stepper.step_into(&cur, &mut next);
            if let Some(fl) = params.floor {
                next.iter_mut().for_each(|x| *x = x.max(fl));
            }
            for k in 0..n {
                if next[k] == 0.0 && cur[k] > 0.0 && !warned[k] {
                    warned[k] = true;
                    warn!(
                        "component {} underflowed to exactly 0 at iteration {i}; it stays 0 from here on",
                        k + 1
                    );
                }
            }
        }
        if let Some(k) = next.iter().position(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::Diverged {
                iteration: i,
                message: format!("component {} became {}", k + 1, next[k]),
            });
        }
        std::mem::swap(&mut cur, &mut next);
        iterations = i;
        observe(&cur, &mut logs);
        tracker.push(i, &logs);
        if i % params.record_every == 0 {
            rec.push(i, &cur);
        }
        if params
            .stop_after_epochs
            .is_some_and(|limit| tracker.completed() >= limit)
        {
            break;
        }
    }
    if rec.times.last() != Some(&iterations) {
        rec.push(iterations, &cur);
    }
    Ok(Trajectory {
        times: rec.times,
        states: rec.states,
        log_states: rec.log_states,
        params: params.clone(),
        epochs: tracker.finish(),
        iterations,
    })
}
