//! Segmentation of a trajectory into epochs spent near one fixed point.
//!
//! An epoch ends when some component rises through `theta` from below. Its
//! valley is the log of the smallest value that component reached during
//! the epoch, and the fixed point it shadowed is the set of components that
//! stayed above `theta` for more than half of it.

use std::collections::HashSet;

use serde::Serialize;

use super::Trajectory;
use crate::error::{Error, Result};
use crate::graph::{independent_sets, ActiveSet};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Epoch {
    pub start: u64,
    pub end: u64,
    /// Component that crosses `theta` at `end` (0-based).
    pub exit_node: usize,
    pub valley_log: f64,
    /// Components above `theta` for more than half of the epoch.
    pub above: ActiveSet,
    /// `above` when it is the active set of a fixed point, else `None`.
    pub shadowed: Option<ActiveSet>,
}

impl Epoch {
    pub fn duration(&self) -> u64 {
        self.end - self.start
    }

    pub fn off_network(&self) -> bool {
        self.shadowed.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochSeries {
    pub theta: f64,
    /// Iterations of every upward crossing, including the one before the
    /// first complete epoch.
    pub boundaries: Vec<u64>,
    pub epochs: Vec<Epoch>,
}

impl EpochSeries {
    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn durations(&self) -> Vec<u64> {
        self.epochs.iter().map(Epoch::duration).collect()
    }

    pub fn valley_logs(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.valley_log).collect()
    }

    pub fn active_sequence(&self) -> Vec<Option<ActiveSet>> {
        self.epochs.iter().map(|e| e.shadowed.clone()).collect()
    }
}

/// Online epoch detection fed one state (as logs) per iteration.
#[derive(Debug, Clone)]
pub struct EpochTracker {
    theta: f64,
    log_theta: f64,
    fixed: Option<HashSet<ActiveSet>>,
    above: Vec<bool>,
    above_count: Vec<u64>,
    window_min: Vec<f64>,
    started: bool,
    last_boundary: Option<u64>,
    boundaries: Vec<u64>,
    epochs: Vec<Epoch>,
}

impl EpochTracker {
    /// `fixed` lists the admissible active sets; without it every epoch is
    /// reported off-network.
    pub fn new(n: usize, theta: f64, fixed: Option<Vec<ActiveSet>>) -> Self {
        Self {
            theta,
            log_theta: theta.ln(),
            fixed: fixed.map(|v| v.into_iter().filter(|s| !s.is_empty()).collect()),
            above: vec![false; n],
            above_count: vec![0; n],
            window_min: vec![f64::INFINITY; n],
            started: false,
            last_boundary: None,
            boundaries: Vec::new(),
            epochs: Vec::new(),
        }
    }

    pub fn push(&mut self, i: u64, logs: &[f64]) {
        let mut exit: Option<usize> = None;
        if self.started {
            for (k, &y) in logs.iter().enumerate() {
                if y > self.log_theta && !self.above[k] && exit.is_none_or(|e| y > logs[e]) {
                    exit = Some(k);
                }
            }
        }
        match exit {
            Some(exit) => {
                if let Some(start) = self.last_boundary {
                    let duration = i - start;
                    let above = ActiveSet::new(
                        (0..logs.len())
                            .filter(|&k| 2 * self.above_count[k] > duration)
                            .collect(),
                    );
                    let shadowed = self
                        .fixed
                        .as_ref()
                        .and_then(|f| f.contains(&above).then(|| above.clone()));
                    self.epochs.push(Epoch {
                        start,
                        end: i,
                        exit_node: exit,
                        valley_log: self.window_min[exit],
                        above,
                        shadowed,
                    });
                }
                self.last_boundary = Some(i);
                self.boundaries.push(i);
                self.window_min.copy_from_slice(logs);
                self.above_count.iter_mut().for_each(|c| *c = 0);
            }
            None => {
                for (m, &y) in self.window_min.iter_mut().zip(logs) {
                    if y < *m {
                        *m = y;
                    }
                }
            }
        }
        for ((a, c), &y) in self.above.iter_mut().zip(&mut self.above_count).zip(logs) {
            *a = y > self.log_theta;
            *c += u64::from(*a);
        }
        self.started = true;
    }

    /// Complete epochs seen so far.
    pub fn completed(&self) -> usize {
        self.epochs.len()
    }

    pub fn finish(self) -> EpochSeries {
        EpochSeries {
            theta: self.theta,
            boundaries: self.boundaries,
            epochs: self.epochs,
        }
    }
}

/// Epochs from the recorded samples of a trajectory. Exact when every
/// iteration was recorded; [`Trajectory::epochs`] is always exact.
pub fn extract_epochs(traj: &Trajectory, theta: f64) -> Result<EpochSeries> {
    let r = traj.params.r;
    let xhat = (r - 1.0) / r;
    if !(theta > 0.0 && theta < xhat) {
        return Err(Error::Domain(format!("theta must lie in (0, {xhat}), got {theta}")));
    }
    let fixed = independent_sets(&traj.params.graph).ok();
    let mut tracker = EpochTracker::new(traj.n(), theta, fixed);
    for (i, logs) in traj.times.iter().zip(traj.logs()) {
        tracker.push(*i, &logs);
    }
    let series = tracker.finish();
    if series.boundaries.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "found {} epoch boundaries, need at least 2",
            series.boundaries.len()
        )));
    }
    Ok(series)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRate {
    /// Geometric mean of `T_{k+1} / T_k` over the second half of the series.
    pub rate: f64,
    /// Standard deviation of `ln(T_{k+1} / T_k)` over the same window.
    pub log_spread: f64,
    /// False when the spread suggests the ratios have not settled.
    pub settled: bool,
}

/// Spread of log-ratios above which a growth rate is flagged as unsettled.
pub const GROWTH_SPREAD_LIMIT: f64 = 0.05;

pub fn epoch_growth_rate(epochs: &EpochSeries) -> Result<GrowthRate> {
    let d = epochs.durations();
    if d.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "growth rate needs at least 4 epochs, have {}",
            d.len()
        )));
    }
    let tail = &d[d.len() / 2..];
    let logs: Vec<f64> = tail
        .windows(2)
        .map(|w| (w[1] as f64 / w[0] as f64).ln())
        .collect();
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    let var = logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / logs.len() as f64;
    let log_spread = var.sqrt();
    Ok(GrowthRate {
        rate: mean.exp(),
        log_spread,
        settled: log_spread < GROWTH_SPREAD_LIMIT,
    })
}

/// Longest run of consecutive epochs that visit `cycle` in order (each
/// shadowed fixed point followed by its cyclic successor) with strictly
/// decreasing valley logs.
pub fn cycle_run_length(epochs: &EpochSeries, cycle: &[ActiveSet]) -> usize {
    let position = |e: &Epoch| {
        e.shadowed
            .as_ref()
            .and_then(|s| cycle.iter().position(|c| c == s))
    };
    let mut best = 0;
    let mut run = 0;
    let mut prev: Option<(usize, f64)> = None;
    for e in &epochs.epochs {
        let here = position(e);
        run = match (prev, here) {
            (Some((p, v)), Some(h)) if h == (p + 1) % cycle.len() && e.valley_log < v => run + 1,
            (_, Some(_)) => 1,
            _ => 0,
        };
        best = best.max(run);
        prev = here.map(|h| (h, e.valley_log));
    }
    best
}
