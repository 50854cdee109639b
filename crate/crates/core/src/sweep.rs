//! Grid comparison of the closed-form stability verdict against the numeric
//! eigenvalue check, over symmetric transition matrices.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stability::{delta_star, podvigina_check, theorem_verdict, transition_matrix_symmetric, Verdict};

/// Cells with `q = j (p - 1)` and `delta = delta_start + k * delta_step`
/// for `k < delta_count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub j: Vec<usize>,
    pub p: Vec<usize>,
    pub delta_start: f64,
    pub delta_step: f64,
    pub delta_count: usize,
    /// Cells with `|delta - delta*|` below this are flagged `near_threshold`.
    pub threshold_window: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            j: (1..=5).collect(),
            p: (2..=5).collect(),
            delta_start: 0.1,
            delta_step: 0.15,
            delta_count: 33,
            threshold_window: 0.05,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.j.contains(&0) {
            return Err(Error::Validation("j values must be positive".into()));
        }
        if self.p.iter().any(|&p| p < 2) {
            return Err(Error::Validation("p values must be at least 2".into()));
        }
        if !(self.delta_start.is_finite() && self.delta_step.is_finite()) {
            return Err(Error::Validation("delta range must be finite".into()));
        }
        if !(self.threshold_window >= 0.0) {
            return Err(Error::Validation("threshold window must be non-negative".into()));
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for &j in &self.j {
            for &p in &self.p {
                for k in 0..self.delta_count {
                    out.push((j, p, self.delta_start + self.delta_step * k as f64));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub j: usize,
    pub p: usize,
    pub q: usize,
    pub delta: f64,
    pub delta_star: f64,
    pub near_threshold: bool,
    pub theorem_fas: bool,
    pub numeric_fas: Option<bool>,
    pub status: String,
    pub lambda_max_re: Option<f64>,
    pub lambda_max_im: Option<f64>,
    pub agreement: Option<bool>,
    pub error: Option<String>,
}

fn evaluate(j: usize, p: usize, d: f64, window: f64) -> SweepRow {
    let q = j * (p - 1);
    let ds = delta_star(j, q);
    let theorem = theorem_verdict(j, q, d).verdict;
    let mut row = SweepRow {
        j,
        p,
        q,
        delta: d,
        delta_star: ds,
        near_threshold: (d - ds).abs() < window,
        theorem_fas: theorem,
        numeric_fas: None,
        status: "error".into(),
        lambda_max_re: None,
        lambda_max_im: None,
        agreement: None,
        error: None,
    };
    match transition_matrix_symmetric(j, q, d).and_then(|m| podvigina_check(&m)) {
        Ok(rep) => {
            row.numeric_fas = Some(rep.fas);
            row.status = match rep.status {
                Verdict::Fas => "fas",
                Verdict::NotFas => "not_fas",
                Verdict::Resonant => "resonant",
            }
            .into();
            row.lambda_max_re = Some(rep.lambda_max.re);
            row.lambda_max_im = Some(rep.lambda_max.im);
            row.agreement = Some(rep.fas == theorem);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Evaluate every cell on at most `jobs` threads (all cores when `None`).
/// Per-cell failures are recorded in the row and do not stop the sweep.
pub fn run_sweep(spec: &GridSpec, jobs: Option<usize>) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let cells = spec.cells();
    let window = spec.threshold_window;
    let work = || -> Vec<SweepRow> {
        cells
            .par_iter()
            .map(|&(j, p, d)| evaluate(j, p, d, window))
            .collect()
    };
    match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Validation(format!("thread pool: {e}")))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

pub const SWEEP_HEADER: [&str; 13] = [
    "j",
    "p",
    "q",
    "delta",
    "delta_star",
    "near_threshold",
    "theorem_fas",
    "numeric_fas",
    "status",
    "lambda_max_re",
    "lambda_max_im",
    "agreement",
    "error",
];

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_agrees_away_from_threshold() {
        let rows = run_sweep(&GridSpec::default(), Some(2)).unwrap();
        assert_eq!(rows.len(), 5 * 4 * 33);
        assert!(rows
            .iter()
            .filter(|r| !r.near_threshold)
            .all(|r| r.agreement == Some(true)));
    }

    #[test]
    fn single_cell_square_case() {
        let spec = GridSpec {
            j: vec![1],
            p: vec![2],
            delta_start: 2.0,
            delta_step: 0.0,
            delta_count: 1,
            ..GridSpec::default()
        };
        let rows = run_sweep(&spec, None).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].q, 1);
        assert_eq!(rows[0].numeric_fas, Some(true));
        assert!((rows[0].lambda_max_re.unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_grid_writes_header_only() {
        let spec = GridSpec {
            j: Vec::new(),
            ..GridSpec::default()
        };
        let rows = run_sweep(&spec, None).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", SWEEP_HEADER.join(",")));
    }

    #[test]
    fn csv_columns_match_header() {
        let spec = GridSpec {
            j: vec![2],
            p: vec![3],
            delta_count: 2,
            ..GridSpec::default()
        };
        let rows = run_sweep(&spec, Some(1)).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for line in text.lines() {
            assert_eq!(line.split(',').count(), SWEEP_HEADER.len());
        }
    }

    #[test]
    fn invalid_grid_rejected() {
        let spec = GridSpec {
            p: vec![1],
            ..GridSpec::default()
        };
        assert!(run_sweep(&spec, None).is_err());
    }
}
