//! Flat-file output: DOT and JSON for networks, CSV for trajectories, epochs
//! and fitted curves. Column layouts are gnuplot friendly.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::dynamics::{EpochSeries, FitResult, PureFit, Trajectory};
use crate::error::{Error, Result};
use crate::graph::ActiveSet;
use crate::network::HetNetwork;

/// Label written for epochs that shadow no fixed point.
pub const OFF_NETWORK: &str = "off-network";

pub fn network_dot(net: &HetNetwork) -> String {
    let mut s = String::from("digraph network {\n  rankdir=LR;\n");
    for (i, fp) in net.fixed_points.iter().enumerate() {
        let shape = if net.is_sink(i) { "doublecircle" } else { "circle" };
        let _ = writeln!(s, "  fp{i} [label=\"{}\", shape={shape}];", fp.active);
    }
    for c in 0..net.connections.len() {
        let _ = writeln!(
            s,
            "  fp{} -> fp{} [label=\"{}\"];",
            net.source_index(c),
            net.target_index(c),
            net.connections[c].entering + 1
        );
    }
    s.push_str("}\n");
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointRecord {
    pub index: usize,
    pub label: String,
    pub active: ActiveSet,
    pub j: usize,
    pub sink: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConnectionRecord {
    pub source: usize,
    pub target: usize,
    /// 1-based entering node.
    pub entering: usize,
    pub displaced: ActiveSet,
    pub kind: [usize; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct NetworkRecord {
    pub n: usize,
    /// 1-based `[from, to]` inhibition edges.
    pub edges: Vec<[usize; 2]>,
    pub r: f64,
    pub gamma: f64,
    pub fixed_points: Vec<FixedPointRecord>,
    pub connections: Vec<ConnectionRecord>,
    /// Number of fixed points by active count, index 0 = origin (excluded).
    pub census: Vec<usize>,
    pub sinks: Vec<String>,
}

pub fn network_record(net: &HetNetwork) -> NetworkRecord {
    NetworkRecord {
        n: net.graph.n(),
        edges: net.graph.edges().iter().map(|&(a, b)| [a + 1, b + 1]).collect(),
        r: net.r,
        gamma: net.gamma,
        fixed_points: net
            .fixed_points
            .iter()
            .enumerate()
            .map(|(index, fp)| FixedPointRecord {
                index,
                label: fp.active.to_string(),
                active: fp.active.clone(),
                j: fp.j(),
                sink: net.is_sink(index),
            })
            .collect(),
        connections: (0..net.connections.len())
            .map(|c| {
                let conn = &net.connections[c];
                let (p, q) = conn.kind();
                ConnectionRecord {
                    source: net.source_index(c),
                    target: net.target_index(c),
                    entering: conn.entering + 1,
                    displaced: conn.displaced.clone(),
                    kind: [p, q],
                }
            })
            .collect(),
        census: net.census(),
        sinks: net
            .sinks
            .iter()
            .map(|&i| net.fixed_points[i].active.to_string())
            .collect(),
    }
}

/// Header `i,x1..xn`, plus `y1..yn` (natural logs) when `with_logs`.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, with_logs: bool, out: W) -> Result<()> {
    let n = traj.n();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["i".to_string()];
    header.extend((1..=n).map(|k| format!("x{k}")));
    if with_logs {
        header.extend((1..=n).map(|k| format!("y{k}")));
    }
    w.write_record(&header)?;
    let logs = with_logs.then(|| traj.logs());
    for (row, (i, x)) in traj.times.iter().zip(&traj.states).enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(x.iter().map(|v| v.to_string()));
        if let Some(l) = &logs {
            rec.extend(l[row].iter().map(|v| v.to_string()));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// One row of an epoch CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRow {
    pub k: usize,
    pub boundary_i: u64,
    #[serde(rename = "T_k")]
    pub t_k: u64,
    #[serde(rename = "X_k")]
    pub x_k: f64,
    pub shadowed_fixed_point: String,
}

pub fn epoch_rows(series: &EpochSeries) -> Vec<EpochRow> {
    series
        .epochs
        .iter()
        .enumerate()
        .map(|(k, e)| EpochRow {
            k,
            boundary_i: e.end,
            t_k: e.duration(),
            x_k: e.valley_log,
            shadowed_fixed_point: e
                .shadowed
                .as_ref()
                .map_or_else(|| OFF_NETWORK.to_string(), |s| s.label()),
        })
        .collect()
}

pub fn write_epochs_csv<W: Write>(series: &EpochSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in epoch_rows(series) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_epochs_csv<R: Read>(input: R) -> Result<Vec<EpochRow>> {
    let mut rows = Vec::new();
    for row in csv::Reader::from_reader(input).deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

/// Columns `k,X_k,model,pure_model` for the fitted epochs.
pub fn write_fit_curve_csv<W: Write>(valleys: &[f64], fit: &FitResult, pure: Option<&PureFit>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "X_k", "model", "pure_model"])?;
    for (k, v) in valleys.iter().enumerate() {
        let pure_value = pure.map(|p| p.model(k).to_string()).unwrap_or_default();
        w.write_record([k.to_string(), v.to_string(), fit.model(k).to_string(), pure_value])?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(Error::from)
}
