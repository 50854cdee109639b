//! Transition matrices for heteroclinic cycles and their stability.
//!
//! Coordinates are the logarithms of the non-active components at the start
//! of an epoch. A cycle's transition matrix maps these values from one epoch
//! to the next, identifying coordinates by node across each connection.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{suppression_profile, ActiveSet};
use crate::linalg::{
    self, eigenvalues, is_real, normalize_max_positive, real_eigenvector, ComplexValue, C64,
    TIE_TOL,
};
use crate::network::{xhat, CycleDescriptor, HetNetwork};

/// Smallest eigenvector entry accepted as strictly positive.
pub const EIGENVECTOR_SIGN_TOL: f64 = 1e-9;

/// `delta = gamma * xhat / ln r - 1` together with its inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Delta {
    pub value: f64,
    pub r: f64,
    pub gamma: f64,
}

impl Delta {
    /// Fixed points are saddles exactly when `delta > 0`.
    pub fn is_saddle(&self) -> bool {
        self.value > 0.0
    }

    /// Exponent gained per unit entering-coordinate by a node with
    /// suppression number `ns`: `ns * gamma * xhat / ln r - 1`.
    pub fn decay_coefficient(&self, ns: usize) -> f64 {
        ns as f64 * self.gamma * xhat(self.r) / self.r.ln() - 1.0
    }

    /// Stand-alone value with no `(r, gamma)` behind it.
    pub fn raw(value: f64) -> Self {
        Self {
            value,
            r: f64::NAN,
            gamma: f64::NAN,
        }
    }
}

pub fn delta(r: f64, gamma: f64) -> Result<Delta> {
    if !(r > 1.0 && r <= 3.0) {
        return Err(Error::Domain(format!(
            "analytic results need 1 < r <= 3, got r = {r}"
        )));
    }
    if !(gamma >= 0.0) {
        return Err(Error::Domain(format!("gamma must be >= 0, got {gamma}")));
    }
    Ok(Delta {
        value: gamma * xhat(r) / r.ln() - 1.0,
        r,
        gamma,
    })
}

/// Coupling strength that yields a given `delta`.
pub fn gamma_for_delta(r: f64, delta: f64) -> f64 {
    (delta + 1.0) * r.ln() / xhat(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowRole {
    /// Coordinate of a growing node; leads with `-1`.
    Growing,
    /// Coordinate of a suppressed node; leads with a decay coefficient.
    Decaying,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionMatrix {
    #[serde(serialize_with = "serialize_rows")]
    pub entries: DMatrix<f64>,
    pub q: usize,
    /// Active count of the fixed points along the cycle.
    pub j: usize,
    pub row_roles: Vec<RowRole>,
    /// `delta` the matrix was built from, when known.
    pub delta: Option<f64>,
    /// Input coordinates as 0-based node ids at the cycle's first fixed
    /// point. Empty for matrices built from parameters alone.
    pub coordinates: Vec<usize>,
    /// Node displaced on the connection into the cycle's first fixed point.
    pub displaced: Option<usize>,
    /// The matrix for one trip round the cycle is `entries^period_power`.
    pub period_power: usize,
}

fn serialize_rows<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect();
    rows.serialize(s)
}

impl TransitionMatrix {
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.q)
            .map(|i| self.entries.row(i).iter().copied().collect())
            .collect()
    }

    /// Number of decaying rows.
    pub fn decaying_rows(&self) -> usize {
        self.row_roles.iter().filter(|r| **r == RowRole::Decaying).count()
    }

    /// Matrix for one full trip round the cycle.
    pub fn full_cycle(&self) -> DMatrix<f64> {
        let mut out = DMatrix::identity(self.q, self.q);
        for _ in 0..self.period_power {
            out = &self.entries * out;
        }
        out
    }

    /// True when the entries have the `(L, j)` block shape: a first column of
    /// `-1`s then equal positive values, ones on the superdiagonal and zeros
    /// elsewhere. Returns the number of positive rows and their common value.
    pub fn symmetric_shape(&self) -> Option<(usize, f64)> {
        let m = &self.entries;
        let q = self.q;
        let growing = (0..q).take_while(|&i| m[(i, 0)] == -1.0).count();
        let decaying = q - growing;
        if decaying == 0 {
            return None;
        }
        let d = m[(growing, 0)];
        let lead_ok = (growing..q).all(|i| m[(i, 0)] == d);
        let rest_ok = (0..q).all(|i| {
            (1..q).all(|k| m[(i, k)] == if k == i + 1 { 1.0 } else { 0.0 })
        });
        (lead_ok && rest_ok).then_some((decaying, d))
    }
}

/// The block-form matrix: `q - j` rows led by `-1`, then `j` rows led by
/// `delta`, with ones on the superdiagonal.
pub fn transition_matrix_symmetric(j: usize, q: usize, delta: f64) -> Result<TransitionMatrix> {
    if j == 0 || q < j {
        return Err(Error::Domain(format!("need q >= j >= 1, got j = {j}, q = {q}")));
    }
    let growing = q - j;
    let mut m = DMatrix::zeros(q, q);
    for i in 0..q {
        m[(i, 0)] = if i < growing { -1.0 } else { delta };
        if i + 1 < q {
            m[(i, i + 1)] = 1.0;
        }
    }
    let row_roles = (0..q)
        .map(|i| if i < growing { RowRole::Growing } else { RowRole::Decaying })
        .collect();
    Ok(TransitionMatrix {
        entries: m,
        q,
        j,
        row_roles,
        delta: Some(delta),
        coordinates: Vec::new(),
        displaced: None,
        period_power: 1,
    })
}

struct Epoch<'a> {
    active: &'a ActiveSet,
    /// Node displaced on the way in.
    displaced: usize,
    /// Node that grows to end the epoch.
    entering: usize,
}

/// Non-active coordinates of epoch `k`, ordered by how soon each node enters
/// the active set (never-entering nodes last, by id).
fn canonical_order(epochs: &[Epoch<'_>], k: usize, n: usize) -> Vec<usize> {
    let len = epochs.len();
    let e = &epochs[k];
    let mut nodes: Vec<(usize, usize)> = (0..n)
        .filter(|&u| !e.active.contains(u) && u != e.displaced)
        .map(|u| {
            let when = (0..len)
                .find(|&t| epochs[(k + t) % len].entering == u)
                .unwrap_or(usize::MAX);
            (when, u)
        })
        .collect();
    nodes.sort_unstable();
    nodes.into_iter().map(|(_, u)| u).collect()
}

/// Transition matrix of a cycle with constant active count in which every
/// connection displaces exactly one node.
///
/// Over an epoch at `Z` left via entering node `e`, each coordinate `X_u`
/// becomes `X_u - X_e` when `u` grows and `X_u + c(ns) X_e` when `u` is
/// suppressed `ns` times; the node displaced on the way into `Z` leaves at
/// `c(ns) X_e`. Symmetric cycles give the same matrix every epoch and the
/// one-epoch matrix is returned with `period_power` set to the cycle length.
pub fn transition_matrix_for_cycle(
    net: &HetNetwork,
    cycle: &CycleDescriptor,
    delta: &Delta,
) -> Result<TransitionMatrix> {
    let len = cycle.len();
    if len == 0 {
        return Err(Error::Unsupported("empty cycle".into()));
    }
    let j = cycle.j.ok_or_else(|| {
        Error::Unsupported("active count varies along the cycle".into())
    })?;
    for &c in &cycle.connections {
        if net.connections[c].displaced.len() != 1 {
            return Err(Error::Unsupported(format!(
                "connection {} displaces {} nodes",
                net.connections[c],
                net.connections[c].displaced.len()
            )));
        }
    }
    let g = &net.graph;
    let n = g.n();
    let epochs: Vec<Epoch<'_>> = (0..len)
        .map(|k| {
            let into = &net.connections[cycle.connections[(k + len - 1) % len]];
            let out = &net.connections[cycle.connections[k]];
            Epoch {
                active: &net.fixed_points[cycle.fixed_points[k]].active,
                displaced: into.displaced.members()[0],
                entering: out.entering,
            }
        })
        .collect();

    let mut steps = Vec::with_capacity(len);
    let mut last_roles = Vec::new();
    for k in 0..len {
        let input = canonical_order(&epochs, k, n);
        let output = canonical_order(&epochs, (k + 1) % len, n);
        let pos: BTreeMap<usize, usize> = input.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        let ep = &epochs[k];
        let profile = suppression_profile(g, ep.active)?;
        let e_col = pos[&ep.entering];
        let mut m = DMatrix::zeros(output.len(), input.len());
        let mut roles = Vec::with_capacity(output.len());
        for (row, &u) in output.iter().enumerate() {
            if u == ep.displaced {
                let ns = profile.suppression_number(u).ok_or_else(|| {
                    Error::Unsupported(format!("displaced node {} is not suppressed", u + 1))
                })?;
                m[(row, e_col)] = delta.decay_coefficient(ns);
                roles.push(RowRole::Decaying);
            } else if let Some(ns) = profile.suppression_number(u) {
                m[(row, pos[&u])] = 1.0;
                m[(row, e_col)] += delta.decay_coefficient(ns);
                roles.push(RowRole::Decaying);
            } else {
                m[(row, pos[&u])] = 1.0;
                m[(row, e_col)] -= 1.0;
                roles.push(RowRole::Growing);
            }
        }
        steps.push(m);
        last_roles = roles;
    }

    let q = steps[0].nrows();
    if steps.iter().any(|m| m.nrows() != q || m.ncols() != q) {
        return Err(Error::Unsupported("coordinate count varies along the cycle".into()));
    }
    let coordinates = canonical_order(&epochs, 0, n);
    let displaced = Some(epochs[0].displaced);
    let uniform = steps.iter().all(|m| *m == steps[0]);
    if cycle.symmetric && uniform {
        let first_roles = {
            let output = canonical_order(&epochs, 1 % len, n);
            let profile = suppression_profile(g, epochs[0].active)?;
            output
                .iter()
                .map(|&u| {
                    if u == epochs[0].displaced || profile.suppression_number(u).is_some() {
                        RowRole::Decaying
                    } else {
                        RowRole::Growing
                    }
                })
                .collect()
        };
        return Ok(TransitionMatrix {
            entries: steps.swap_remove(0),
            q,
            j,
            row_roles: first_roles,
            delta: Some(delta.value),
            coordinates,
            displaced,
            period_power: len,
        });
    }
    let product = steps
        .iter()
        .fold(DMatrix::identity(q, q), |acc, m| m * acc);
    Ok(TransitionMatrix {
        entries: product,
        q,
        j,
        row_roles: last_roles,
        delta: Some(delta.value),
        coordinates,
        displaced,
        period_power: 1,
    })
}

/// Characteristic polynomial of the block-form matrix, descending order:
/// `z^q + ... + z^j - delta (z^(j-1) + ... + 1)`.
pub fn char_poly(j: usize, q: usize, delta: f64) -> Result<Vec<f64>> {
    if j == 0 || q < j {
        return Err(Error::Domain(format!("need q >= j >= 1, got j = {j}, q = {q}")));
    }
    let mut c = vec![1.0; q - j + 1];
    c.extend(std::iter::repeat(-delta).take(j));
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Fas,
    NotFas,
    /// Dominant eigenvalue at `+1`, outside the hypothesis of the test.
    Resonant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub j: usize,
    pub q: usize,
    pub delta: Option<f64>,
    pub delta_star: f64,
    pub lambda_max: ComplexValue,
    pub v_max: Option<Vec<f64>>,
    pub fas: bool,
    pub status: Verdict,
    /// Closed-form verdict, present when the matrix has the block form.
    pub theorem_verdict: Option<bool>,
    pub agreement: Option<bool>,
    pub roots: Vec<ComplexValue>,
    /// First failing condition, if any.
    pub reason: Option<String>,
}

/// `(q + 1 - j) / j`.
pub fn delta_star(j: usize, q: usize) -> f64 {
    (q + 1 - j) as f64 / j as f64
}

/// Fragmentary asymptotic stability from the dominant eigenpair: the
/// eigenvalue of largest modulus must be real, exceed one, and have an
/// eigenvector whose entries share a strict sign. A tie in modulus between
/// distinct eigenvalues fails the first condition.
pub fn podvigina_check(m: &TransitionMatrix) -> Result<StabilityReport> {
    let ev = eigenvalues(&m.entries)?;
    let lead = ev[0];
    let scale = lead.norm().max(f64::MIN_POSITIVE);
    let tied = ev.len() > 1
        && lead.norm() - ev[1].norm() <= TIE_TOL * scale
        && (lead - ev[1]).norm() > TIE_TOL * scale;
    let real = is_real(lead) && !tied;

    let mut v_max = None;
    let (status, reason) = if real && (lead.re - 1.0).abs() <= TIE_TOL {
        (Verdict::Resonant, Some("dominant eigenvalue is 1".to_string()))
    } else if !real {
        let why = if tied {
            "dominant modulus shared by distinct eigenvalues"
        } else {
            "dominant eigenvalue is not real"
        };
        (Verdict::NotFas, Some(why.to_string()))
    } else {
        let v = normalize_max_positive(&real_eigenvector(&m.entries, lead.re));
        let same_sign = v.iter().all(|&x| x > EIGENVECTOR_SIGN_TOL);
        v_max = Some(v.iter().copied().collect::<Vec<_>>());
        if lead.re <= 1.0 {
            (Verdict::NotFas, Some("dominant eigenvalue is not above 1".to_string()))
        } else if !same_sign {
            (
                Verdict::NotFas,
                Some("dominant eigenvector has a zero or sign change".to_string()),
            )
        } else {
            (Verdict::Fas, None)
        }
    };

    let shape = m
        .symmetric_shape()
        .filter(|&(_, d)| m.delta.is_none() || m.delta == Some(d));
    let theorem = shape.map(|(decaying, d)| theorem_verdict(decaying, m.q, d).verdict);
    let fas = status == Verdict::Fas;
    Ok(StabilityReport {
        j: m.j,
        q: m.q,
        delta: m.delta,
        delta_star: delta_star(shape.map_or(m.j, |(decaying, _)| decaying), m.q),
        lambda_max: lead.into(),
        v_max,
        fas,
        status,
        theorem_verdict: theorem,
        agreement: theorem.map(|t| t == fas),
        roots: ev.into_iter().map(Into::into).collect(),
        reason,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremReport {
    pub j: usize,
    pub q: usize,
    pub delta: f64,
    pub delta_star: f64,
    pub verdict: bool,
}

/// Closed form: stable exactly when `q = j` and `delta > delta*`.
pub fn theorem_verdict(j: usize, q: usize, delta: f64) -> TheoremReport {
    let ds = delta_star(j, q);
    TheoremReport {
        j,
        q,
        delta,
        delta_star: ds,
        verdict: q == j && delta > ds,
    }
}

/// Coupling threshold `(ln r / xhat) (n - j) / j` for a `q = j` cycle on `n` nodes.
pub fn gamma_star(n: usize, j: usize, r: f64) -> f64 {
    r.ln() / xhat(r) * (n - j) as f64 / j as f64
}

/// Dominant eigenvector of the `q = j` block matrix in closed form, with
/// `rho` the positive root of its characteristic polynomial.
pub fn vmax_closed_form(j: usize, q: usize, delta: f64, rho: f64) -> Result<Vec<f64>> {
    if q != j {
        return Err(Error::Unsupported(format!(
            "closed-form eigenvector needs q = j, got j = {j}, q = {q}"
        )));
    }
    if j == 0 {
        return Err(Error::Domain("j must be >= 1".into()));
    }
    let mut v = vec![1.0];
    for i in 2..=j {
        let tail: f64 = (0..=(j - i)).map(|k| rho.powi(-(k as i32))).sum();
        v.push(delta / rho * tail);
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RootCase {
    /// `q = j`.
    Square,
    /// `q > j`, `j` odd, `q` even.
    NegativeDominant,
    /// Every other `q > j`.
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootCheck {
    pub name: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootStructure {
    pub j: usize,
    pub q: usize,
    pub delta: f64,
    pub case: RootCase,
    pub roots: Vec<ComplexValue>,
    pub positive_root: Option<f64>,
    pub max_residual: f64,
    pub checks: Vec<RootCheck>,
    pub passed: bool,
}

impl RootStructure {
    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// Numerically check the location of the characteristic roots against the
/// expected pattern for the given `(j, q)`.
pub fn classify_roots(j: usize, q: usize, delta: f64) -> Result<RootStructure> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("root structure needs delta > 0, got {delta}")));
    }
    let coeffs = char_poly(j, q, delta)?;
    let zs = linalg::roots(&coeffs)?;
    let max_residual = linalg::max_residual(&coeffs, &zs);

    let positive: Vec<usize> = (0..zs.len())
        .filter(|&i| is_real(zs[i]) && zs[i].re > 0.0)
        .collect();
    let mut checks = vec![RootCheck {
        name: "exactly one positive real root".into(),
        passed: positive.len() == 1,
    }];
    let case = if q == j {
        RootCase::Square
    } else if j % 2 == 1 && q % 2 == 0 {
        RootCase::NegativeDominant
    } else {
        RootCase::General
    };
    let rp_index = positive.first().copied();
    let rp = rp_index.map(|i| zs[i].re);
    let shrink = 1.0 - TIE_TOL;
    let grow = 1.0 + TIE_TOL;

    if let (Some(ip), Some(rp)) = (rp_index, rp) {
        let others: Vec<C64> = zs
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != ip)
            .map(|(_, z)| *z)
            .collect();
        match case {
            RootCase::Square => {
                checks.push(RootCheck {
                    name: "positive root has the largest modulus".into(),
                    passed: others.iter().all(|z| z.norm() < rp * shrink),
                });
                checks.push(RootCheck {
                    name: "positive root above 1 exactly when delta > delta*".into(),
                    passed: (rp > 1.0) == (delta > delta_star(j, q)),
                });
            }
            RootCase::NegativeDominant => {
                let lead = zs[0];
                let dominant = is_real(lead)
                    && lead.re < 0.0
                    && zs[1..].iter().all(|z| z.norm() < lead.norm() * shrink);
                checks.push(RootCheck {
                    name: "dominant root is real and negative".into(),
                    passed: dominant,
                });
                let complex = zs[1..]
                    .iter()
                    .filter(|z| !is_real(**z))
                    .count();
                checks.push(RootCheck {
                    name: "remaining q-2 roots are complex".into(),
                    passed: complex == q - 2,
                });
            }
            RootCase::General => {
                let bound = rp.max(1.0);
                let inside: Vec<C64> = others
                    .iter()
                    .copied()
                    .filter(|z| z.norm() < bound * shrink)
                    .collect();
                checks.push(RootCheck {
                    name: "j-1 roots inside max(r+, 1)".into(),
                    passed: inside.len() == j - 1,
                });
                let real_inside = inside.iter().filter(|z| is_real(**z)).count();
                checks.push(RootCheck {
                    name: "one real root inside exactly when j is even".into(),
                    passed: real_inside == usize::from(j % 2 == 0),
                });
                let outside = others.iter().filter(|z| z.norm() > rp * grow).count();
                checks.push(RootCheck {
                    name: "q-j roots outside r+".into(),
                    passed: outside == q - j,
                });
            }
        }
    }
    checks.push(RootCheck {
        name: "root residuals below tolerance".into(),
        passed: max_residual < linalg::ROOT_RESIDUAL_TOL,
    });
    let passed = checks.iter().all(|c| c.passed);
    Ok(RootStructure {
        j,
        q,
        delta,
        case,
        roots: zs.into_iter().map(Into::into).collect(),
        positive_root: rp,
        max_residual,
        checks,
        passed,
    })
}

/// Iterate `X <- M X` from `X = -(1, ..., 1)` and report whether every
/// coordinate stays negative and strictly grows in magnitude over the second
/// half of the run.
pub fn linear_map_diverges(m: &DMatrix<f64>, iterations: usize) -> bool {
    let q = m.nrows();
    let mut x = nalgebra::DVector::from_element(q, -1.0);
    let mut prev = x.clone();
    let settle = iterations / 2;
    for it in 1..=iterations {
        x = m * &x;
        if it > settle {
            let ok = x.iter().zip(prev.iter()).all(|(&now, &before)| now < 0.0 && now < before);
            if !ok || x.iter().any(|v| !v.is_finite()) {
                return false;
            }
        }
        prev = x.clone();
    }
    true
}
