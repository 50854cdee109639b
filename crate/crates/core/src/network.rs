//! Phase-space heteroclinic network: fixed points, connections between them,
//! simple cycles and their rotational symmetry.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{independent_sets, suppression_profile, ActiveSet, CouplingGraph};

/// Default cap on the number of cycles returned by [`enumerate_cycles`].
pub const DEFAULT_CYCLE_BUDGET: usize = 100_000;

/// Nonzero fixed value of the logistic map, `(r - 1) / r`.
pub fn xhat(r: f64) -> f64 {
    (r - 1.0) / r
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPoint {
    pub active: ActiveSet,
    pub xhat: f64,
    pub r: f64,
}

impl FixedPoint {
    pub fn new(g: &CouplingGraph, active: ActiveSet, r: f64) -> Result<Self> {
        if !(r > 1.0) {
            return Err(Error::Domain(format!("fixed points need r > 1, got r = {r}")));
        }
        if !g.is_independent(&active) {
            return Err(Error::Domain(format!("{active} is not an independent set")));
        }
        Ok(Self {
            active,
            xhat: xhat(r),
            r,
        })
    }

    /// Number of active nodes.
    pub fn j(&self) -> usize {
        self.active.len()
    }

    /// The point in `[0, 1]^n`.
    pub fn state(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for &k in self.active.members() {
            x[k] = self.xhat;
        }
        x
    }

    /// Analytic treatment assumes the active value is stable in the uncoupled map.
    pub fn is_analytic(&self) -> bool {
        self.r > 1.0 && self.r <= 3.0
    }
}

impl fmt::Display for FixedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.active)
    }
}

/// Fixed points for every nonempty independent set.
pub fn fixed_points(g: &CouplingGraph, r: f64) -> Result<Vec<FixedPoint>> {
    fixed_points_with_origin(g, r, false)
}

pub fn fixed_points_with_origin(
    g: &CouplingGraph,
    r: f64,
    include_origin: bool,
) -> Result<Vec<FixedPoint>> {
    if !(r > 1.0) {
        return Err(Error::Domain(format!("fixed points need r > 1, got r = {r}")));
    }
    Ok(independent_sets(g)?
        .into_iter()
        .filter(|s| include_origin || !s.is_empty())
        .map(|active| FixedPoint {
            active,
            xhat: xhat(r),
            r,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeClass {
    Active,
    Suppressed,
    Growing,
}

/// Linearization multiplier in one node direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeMultiplier {
    pub node: usize,
    pub value: f64,
    pub class: NodeClass,
    pub suppression_number: Option<usize>,
}

/// Eigenvalues of the linearization about `fp`, one per node in node order.
pub fn linearization_eigenvalues(
    g: &CouplingGraph,
    fp: &FixedPoint,
    gamma: f64,
) -> Result<Vec<NodeMultiplier>> {
    if !(gamma >= 0.0) {
        return Err(Error::Domain(format!("gamma must be >= 0, got {gamma}")));
    }
    let profile = suppression_profile(g, &fp.active)?;
    let r = fp.r;
    Ok((0..g.n())
        .map(|node| {
            if fp.active.contains(node) {
                NodeMultiplier {
                    node,
                    value: 2.0 - r,
                    class: NodeClass::Active,
                    suppression_number: None,
                }
            } else if let Some(ns) = profile.suppression_number(node) {
                NodeMultiplier {
                    node,
                    value: r * (-(ns as f64) * gamma * fp.xhat).exp(),
                    class: NodeClass::Suppressed,
                    suppression_number: Some(ns),
                }
            } else {
                NodeMultiplier {
                    node,
                    value: r,
                    class: NodeClass::Growing,
                    suppression_number: None,
                }
            }
        })
        .collect())
}

/// `r * exp(-gamma * xhat)`; fixed points are saddles when this is below one.
pub fn suppressed_multiplier(r: f64, gamma: f64) -> f64 {
    r * (-gamma * xhat(r)).exp()
}

fn check_saddle(r: f64, gamma: f64) -> Result<()> {
    if !(gamma >= 0.0) {
        return Err(Error::Domain(format!("gamma must be >= 0, got {gamma}")));
    }
    let mult = suppressed_multiplier(r, gamma);
    if mult < 1.0 {
        Ok(())
    } else {
        Err(Error::NotSaddle(mult))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Connection {
    pub source: ActiveSet,
    pub target: ActiveSet,
    /// Growing node `b` that becomes active.
    pub entering: usize,
    /// Active nodes suppressed by `b`.
    pub displaced: ActiveSet,
}

impl Connection {
    /// `(p, q)` for a `p -> q` connection.
    pub fn kind(&self) -> (usize, usize) {
        (self.source.len(), self.target.len())
    }
}

impl fmt::Display for Connection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} (b = {})", self.source, self.target, self.entering + 1)
    }
}

/// Outgoing connections of `fp`: one per growing node `b`, to
/// `active + {b} - (active nodes b suppresses)`. Suppressed nodes give none.
pub fn connections_from(g: &CouplingGraph, fp: &FixedPoint, gamma: f64) -> Result<Vec<Connection>> {
    check_saddle(fp.r, gamma)?;
    let profile = suppression_profile(g, &fp.active)?;
    Ok(profile
        .growing
        .iter()
        .map(|&b| {
            let displaced: Vec<usize> = fp
                .active
                .members()
                .iter()
                .copied()
                .filter(|&a| g.inhibits(b, a))
                .collect();
            let target = fp.active.without_all(&displaced).with(b);
            Connection {
                source: fp.active.clone(),
                target,
                entering: b,
                displaced: ActiveSet::new(displaced),
            }
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct HetNetwork {
    pub graph: CouplingGraph,
    pub r: f64,
    pub gamma: f64,
    pub fixed_points: Vec<FixedPoint>,
    pub connections: Vec<Connection>,
    /// Indices into `fixed_points` with no outgoing connection.
    pub sinks: Vec<usize>,
    index: HashMap<ActiveSet, usize>,
    outgoing: Vec<Vec<usize>>,
}

impl HetNetwork {
    pub fn index_of(&self, active: &ActiveSet) -> Option<usize> {
        self.index.get(active).copied()
    }

    /// Connection indices leaving fixed point `fp`, ordered by target index.
    pub fn outgoing(&self, fp: usize) -> &[usize] {
        &self.outgoing[fp]
    }

    pub fn source_index(&self, c: usize) -> usize {
        self.index[&self.connections[c].source]
    }

    pub fn target_index(&self, c: usize) -> usize {
        self.index[&self.connections[c].target]
    }

    pub fn connection_between(&self, from: usize, to: usize) -> Option<usize> {
        self.outgoing[from]
            .iter()
            .copied()
            .find(|&c| self.target_index(c) == to)
    }

    /// Fixed-point counts by number of active nodes (index = active count).
    pub fn census(&self) -> Vec<usize> {
        let max = self.fixed_points.iter().map(|f| f.j()).max().unwrap_or(0);
        let mut out = vec![0; max + 1];
        for f in &self.fixed_points {
            out[f.j()] += 1;
        }
        out
    }

    pub fn is_sink(&self, fp: usize) -> bool {
        self.outgoing[fp].is_empty()
    }
}

/// Union of [`connections_from`] over every nonzero fixed point.
pub fn build_network(g: &CouplingGraph, r: f64, gamma: f64) -> Result<HetNetwork> {
    check_saddle(r, gamma)?;
    let fixed_points = fixed_points(g, r)?;
    let index: HashMap<ActiveSet, usize> = fixed_points
        .iter()
        .enumerate()
        .map(|(i, f)| (f.active.clone(), i))
        .collect();
    let mut connections = Vec::new();
    let mut outgoing = vec![Vec::new(); fixed_points.len()];
    for (i, fp) in fixed_points.iter().enumerate() {
        let mut conns = connections_from(g, fp, gamma)?;
        conns.sort_by_key(|c| index[&c.target]);
        for c in conns {
            outgoing[i].push(connections.len());
            connections.push(c);
        }
    }
    let sinks = (0..fixed_points.len())
        .filter(|&i| outgoing[i].is_empty())
        .collect();
    Ok(HetNetwork {
        graph: g.clone(),
        r,
        gamma,
        fixed_points,
        connections,
        sinks,
        index,
        outgoing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum SymmetryClass {
    /// `n = p j + 1`: one gap between active nodes is larger than the others.
    CaseI { p: usize },
    /// `n = s j - 1`: one gap is smaller than the others.
    CaseII { s: usize },
    SingleNode,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleDescriptor {
    /// Fixed-point indices in visiting order, starting from the smallest index.
    pub fixed_points: Vec<usize>,
    /// `connections[k]` joins `fixed_points[k]` to `fixed_points[k + 1]` (cyclically).
    pub connections: Vec<usize>,
    /// Common active count, if constant along the cycle.
    pub j: Option<usize>,
    pub symmetric: bool,
    pub symmetry_class: SymmetryClass,
    /// `M` with `zeta_k = sigma^M zeta_{k-1}` when symmetric.
    pub rotation: Option<usize>,
}

impl CycleDescriptor {
    pub fn len(&self) -> usize {
        self.fixed_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixed_points.is_empty()
    }

    pub fn labels(&self, net: &HetNetwork) -> Vec<String> {
        self.fixed_points
            .iter()
            .map(|&i| net.fixed_points[i].active.to_string())
            .collect()
    }

    /// Rotate the cycle so it starts at the given fixed point.
    pub fn starting_at(&self, fp: usize) -> Option<Self> {
        let pos = self.fixed_points.iter().position(|&f| f == fp)?;
        let mut out = self.clone();
        out.fixed_points.rotate_left(pos);
        out.connections.rotate_left(pos);
        Some(out)
    }
}

/// All simple directed cycles with at most `max_len` fixed points.
pub fn enumerate_cycles(net: &HetNetwork, max_len: usize) -> Result<Vec<CycleDescriptor>> {
    enumerate_cycles_with_budget(net, max_len, DEFAULT_CYCLE_BUDGET)
}

/// Each cycle is found exactly once, rooted at its smallest fixed-point
/// index, by a depth-first search restricted to larger indices inside the
/// root's strongly connected component.
pub fn enumerate_cycles_with_budget(
    net: &HetNetwork,
    max_len: usize,
    budget: usize,
) -> Result<Vec<CycleDescriptor>> {
    let count = net.fixed_points.len();
    let succ: Vec<Vec<usize>> = (0..count)
        .map(|i| net.outgoing(i).iter().map(|&c| net.target_index(c)).collect())
        .collect();
    let scc = strongly_connected_components(&succ);

    let mut raw: Vec<Vec<usize>> = Vec::new();
    let mut path = Vec::new();
    let mut on_path = vec![false; count];
    for root in 0..count {
        path.push(root);
        on_path[root] = true;
        let ctx = CycleSearch {
            succ: &succ,
            scc: &scc,
            root,
            max_len,
            budget,
        };
        ctx.walk(&mut path, &mut on_path, &mut raw)?;
        on_path[root] = false;
        path.pop();
    }
    raw.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

    let ring = net.graph.ring_shape().is_some();
    raw.into_iter()
        .map(|fps| {
            let connections = (0..fps.len())
                .map(|k| {
                    net.connection_between(fps[k], fps[(k + 1) % fps.len()])
                        .expect("cycle edge present in network")
                })
                .collect();
            let first_j = net.fixed_points[fps[0]].j();
            let j = fps
                .iter()
                .all(|&f| net.fixed_points[f].j() == first_j)
                .then_some(first_j);
            let mut cycle = CycleDescriptor {
                fixed_points: fps,
                connections,
                j,
                symmetric: false,
                symmetry_class: SymmetryClass::None,
                rotation: None,
            };
            if ring {
                let (class, rotation) = symmetry_of(&cycle, net)?;
                cycle.symmetric = rotation.is_some();
                cycle.rotation = rotation;
                cycle.symmetry_class = class;
            }
            Ok(cycle)
        })
        .collect()
}

struct CycleSearch<'a> {
    succ: &'a [Vec<usize>],
    scc: &'a [usize],
    root: usize,
    max_len: usize,
    budget: usize,
}

impl CycleSearch<'_> {
    fn walk(&self, path: &mut Vec<usize>, on_path: &mut [bool], out: &mut Vec<Vec<usize>>) -> Result<()> {
        let here = *path.last().expect("nonempty path");
        for &next in &self.succ[here] {
            if next == self.root {
                if out.len() >= self.budget {
                    return Err(Error::LimitExceeded(format!(
                        "more than {} cycles; raise the budget or lower max_len",
                        self.budget
                    )));
                }
                out.push(path.clone());
            } else if next > self.root
                && !on_path[next]
                && self.scc[next] == self.scc[self.root]
                && path.len() < self.max_len
            {
                path.push(next);
                on_path[next] = true;
                self.walk(path, on_path, out)?;
                on_path[next] = false;
                path.pop();
            }
        }
        Ok(())
    }
}

/// Tarjan's algorithm; returns a component id per vertex.
fn strongly_connected_components(succ: &[Vec<usize>]) -> Vec<usize> {
    struct State {
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        comp: Vec<usize>,
        next_index: usize,
        next_comp: usize,
    }
    fn visit(v: usize, succ: &[Vec<usize>], s: &mut State) {
        s.index[v] = Some(s.next_index);
        s.low[v] = s.next_index;
        s.next_index += 1;
        s.stack.push(v);
        s.on_stack[v] = true;
        for &w in &succ[v] {
            match s.index[w] {
                None => {
                    visit(w, succ, s);
                    s.low[v] = s.low[v].min(s.low[w]);
                }
                Some(iw) if s.on_stack[w] => s.low[v] = s.low[v].min(iw),
                _ => {}
            }
        }
        if Some(s.low[v]) == s.index[v] {
            loop {
                let w = s.stack.pop().expect("tarjan stack");
                s.on_stack[w] = false;
                s.comp[w] = s.next_comp;
                if w == v {
                    break;
                }
            }
            s.next_comp += 1;
        }
    }
    let n = succ.len();
    let mut s = State {
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        comp: vec![0; n],
        next_index: 0,
        next_comp: 0,
    };
    for v in 0..n {
        if s.index[v].is_none() {
            visit(v, succ, &mut s);
        }
    }
    s.comp
}

/// Arithmetic parameters `(p, s)` with `n = p j + 1` (`p >= 2`) and
/// `n = s j - 1` (`s >= 3`), where they exist.
pub fn symmetric_case_parameters(n: usize, j: usize) -> (Option<usize>, Option<usize>) {
    if j == 0 {
        return (None, None);
    }
    let p = (n >= 1 && (n - 1) % j == 0 && (n - 1) / j >= 2).then(|| (n - 1) / j);
    let s = ((n + 1) % j == 0 && (n + 1) / j >= 3).then(|| (n + 1) / j);
    (p, s)
}

/// Symmetry class of a cycle on a ring graph. Requires both a rotation
/// `sigma^M` carrying each fixed point to the next and, for `(n, 1)`-rings,
/// the arithmetic condition on `(n, j)`. When `j = 2` both arithmetic cases
/// can hold at once; case (i) is reported.
pub fn classify_symmetric(cycle: &CycleDescriptor, net: &HetNetwork) -> Result<SymmetryClass> {
    symmetry_of(cycle, net).map(|(class, _)| class)
}

fn symmetry_of(cycle: &CycleDescriptor, net: &HetNetwork) -> Result<(SymmetryClass, Option<usize>)> {
    let shape = net
        .graph
        .ring_shape()
        .ok_or_else(|| Error::Unsupported("symmetry classification needs a ring graph".into()))?;
    let n = shape.n;
    let sets: Vec<&ActiveSet> = cycle
        .fixed_points
        .iter()
        .map(|&i| &net.fixed_points[i].active)
        .collect();
    let len = sets.len();
    let rotation = (1..n).find(|&shift| {
        (0..len).all(|k| sets[k].rotated(n, shift) == *sets[(k + 1) % len])
    });
    let (Some(_), Some(j)) = (rotation, cycle.j) else {
        return Ok((SymmetryClass::None, rotation));
    };
    if j == 1 {
        return Ok((SymmetryClass::SingleNode, rotation));
    }
    if shape.m != 1 {
        return Ok((SymmetryClass::None, rotation));
    }
    debug_assert!(gaps_equal_but_one(sets[0], n), "spacing rule broken for {}", sets[0]);
    let class = match symmetric_case_parameters(n, j) {
        (Some(p), _) => SymmetryClass::CaseI { p },
        (None, Some(s)) => SymmetryClass::CaseII { s },
        (None, None) => SymmetryClass::None,
    };
    Ok((class, rotation))
}

/// Cyclic gaps between consecutive active nodes are all equal except at most
/// one, which differs from the rest by exactly one.
pub fn gaps_equal_but_one(set: &ActiveSet, n: usize) -> bool {
    let m = set.members();
    if m.len() < 2 {
        return true;
    }
    let mut gaps: Vec<usize> = (0..m.len())
        .map(|k| (m[(k + 1) % m.len()] + n - m[k]) % n)
        .collect();
    gaps.sort_unstable();
    let lo = gaps[0];
    let hi = gaps[gaps.len() - 1];
    if lo == hi {
        return true;
    }
    hi - lo == 1
        && (gaps.iter().filter(|&&g| g == lo).count() == 1
            || gaps.iter().filter(|&&g| g == hi).count() == 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MaximalVerdict {
    /// Every maximally active fixed point is a sink.
    AllSinks,
    /// One-dimensional unstable manifolds and a single heteroclinic cycle.
    SingleCycle,
    /// `p`-dimensional unstable manifolds and a heteroclinic network.
    Network { p: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MaximallyActive {
    pub j_max: usize,
    pub verdict: MaximalVerdict,
}

/// Largest active count on an `(n, m)`-ring and the structure between the
/// fixed points that attain it, from `n mod (m + 1)`.
pub fn maximally_active(g: &CouplingGraph) -> Result<MaximallyActive> {
    let shape = g
        .ring_shape()
        .ok_or_else(|| Error::Unsupported("maximally active analysis needs a ring graph".into()))?;
    let period = shape.m + 1;
    let verdict = match shape.n % period {
        0 => MaximalVerdict::AllSinks,
        1 => MaximalVerdict::SingleCycle,
        p => MaximalVerdict::Network { p },
    };
    Ok(MaximallyActive {
        j_max: shape.n / period,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::make_ring;

    fn set(labels: &[usize]) -> ActiveSet {
        ActiveSet::from_one_based(labels).unwrap()
    }

    fn net(n: usize, m: usize) -> HetNetwork {
        build_network(&make_ring(n, m).unwrap(), 2.0, 3.04).unwrap()
    }

    #[test]
    fn fixed_point_census_7_1() {
        let fps = fixed_points(&make_ring(7, 1).unwrap(), 2.0).unwrap();
        let count = |k| fps.iter().filter(|f| f.j() == k).count();
        assert_eq!((count(1), count(2), count(3)), (7, 14, 7));
    }

    #[test]
    fn ring_5_2_has_only_singletons() {
        let fps = fixed_points(&make_ring(5, 2).unwrap(), 2.0).unwrap();
        assert_eq!(fps.len(), 5);
        assert!(fps.iter().all(|f| f.j() == 1));
    }

    #[test]
    fn three_ring_fixed_points() {
        let fps = fixed_points(&make_ring(3, 1).unwrap(), 2.0).unwrap();
        let sets: Vec<_> = fps.iter().map(|f| f.active.clone()).collect();
        assert_eq!(sets, vec![set(&[1]), set(&[2]), set(&[3])]);
        assert!(fps.iter().all(|f| f.xhat == 0.5));
        assert_eq!(fps[0].state(3), vec![0.5, 0.0, 0.0]);
    }

    #[test]
    fn origin_only_on_request() {
        let g = make_ring(5, 1).unwrap();
        assert_eq!(fixed_points(&g, 2.0).unwrap().len(), 10);
        let with = fixed_points_with_origin(&g, 2.0, true).unwrap();
        assert_eq!(with.len(), 11);
        assert!(with[0].active.is_empty());
    }

    #[test]
    fn fixed_points_need_r_above_one() {
        let g = make_ring(5, 1).unwrap();
        assert!(matches!(fixed_points(&g, 1.0), Err(Error::Domain(_))));
        assert!(matches!(fixed_points(&g, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn linearization_at_xi1() {
        let g = make_ring(5, 1).unwrap();
        let fp = FixedPoint::new(&g, set(&[1]), 2.0).unwrap();
        let eig = linearization_eigenvalues(&g, &fp, 3.04).unwrap();
        assert_eq!(eig[0].value, 0.0);
        assert_eq!(eig[0].class, NodeClass::Active);
        // 2 exp(-3.04 * 0.5)
        assert!((eig[1].value - 2.0 * (-1.52f64).exp()).abs() < 1e-15);
        assert!((eig[1].value - 0.437_43).abs() < 1e-5);
        assert_eq!(eig[1].class, NodeClass::Suppressed);
        for e in &eig[2..] {
            assert_eq!(e.value, 2.0);
            assert_eq!(e.class, NodeClass::Growing);
        }
        assert!(eig[1].value < 1.0);
    }

    #[test]
    fn uncoupled_linearization_collapses_to_r() {
        let g = make_ring(6, 1).unwrap();
        let fp = FixedPoint::new(&g, set(&[1, 3]), 2.5).unwrap();
        let eig = linearization_eigenvalues(&g, &fp, 0.0).unwrap();
        for e in eig.iter().filter(|e| e.class == NodeClass::Suppressed) {
            assert_eq!(e.value, 2.5);
        }
    }

    #[test]
    fn connections_from_xi1_in_5_1() {
        let g = make_ring(5, 1).unwrap();
        let fp = FixedPoint::new(&g, set(&[1]), 2.0).unwrap();
        let conns = connections_from(&g, &fp, 3.04).unwrap();
        let targets: Vec<_> = conns.iter().map(|c| c.target.clone()).collect();
        assert_eq!(targets, vec![set(&[1, 3]), set(&[1, 4]), set(&[5])]);
        let to_xi5 = &conns[2];
        assert_eq!(to_xi5.entering, 4);
        assert_eq!(to_xi5.displaced, set(&[1]));
        assert_eq!(to_xi5.kind(), (1, 1));
        assert_eq!(conns[0].kind(), (1, 2));
    }

    #[test]
    fn pair_connection_in_5_1() {
        let g = make_ring(5, 1).unwrap();
        let fp = FixedPoint::new(&g, set(&[1, 3]), 2.0).unwrap();
        let conns = connections_from(&g, &fp, 3.04).unwrap();
        assert_eq!(conns.len(), 1);
        assert_eq!(conns[0].target, set(&[3, 5]));
        assert_eq!(conns[0].entering, 4);
    }

    #[test]
    fn triple_in_6_1_is_a_sink() {
        let g = make_ring(6, 1).unwrap();
        let fp = FixedPoint::new(&g, set(&[1, 3, 5]), 2.0).unwrap();
        assert!(connections_from(&g, &fp, 3.04).unwrap().is_empty());
    }

    #[test]
    fn saddle_condition_enforced() {
        let g = make_ring(5, 1).unwrap();
        let fp = FixedPoint::new(&g, set(&[1]), 2.0).unwrap();
        // 2 exp(-0.5 gamma) >= 1 for gamma <= 2 ln 2
        assert!(matches!(connections_from(&g, &fp, 1.0), Err(Error::NotSaddle(_))));
        assert!(matches!(build_network(&g, 2.0, 1.0), Err(Error::NotSaddle(_))));
    }

    #[test]
    fn five_one_network_shape() {
        let net = net(5, 1);
        assert_eq!(net.census(), vec![0, 5, 5]);
        assert_eq!(net.connections.len(), 20);
        let kinds = |p, q| net.connections.iter().filter(|c| c.kind() == (p, q)).count();
        assert_eq!((kinds(1, 1), kinds(1, 2), kinds(2, 2)), (5, 10, 5));
        assert!(net.sinks.is_empty());
    }

    #[test]
    fn five_one_has_two_cycles() {
        let net = net(5, 1);
        let cycles = enumerate_cycles(&net, 10).unwrap();
        assert_eq!(cycles.len(), 2);
        assert_eq!(cycles[0].j, Some(1));
        assert_eq!(cycles[0].symmetry_class, SymmetryClass::SingleNode);
        assert_eq!(cycles[1].j, Some(2));
        assert_eq!(cycles[1].symmetry_class, SymmetryClass::CaseI { p: 2 });
        assert_eq!(cycles[1].rotation, Some(2));
        let labels = cycles[0].labels(&net);
        assert_eq!(labels, ["xi_{1}", "xi_{5}", "xi_{4}", "xi_{3}", "xi_{2}"]);
    }

    #[test]
    fn five_two_contains_rotation_and_skip_cycles() {
        let net = net(5, 2);
        assert_eq!(net.connections.len(), 10);
        assert!((0..5).all(|i| net.outgoing(i).len() == 2));
        let cycles = enumerate_cycles(&net, 5).unwrap();
        let seqs: Vec<Vec<String>> = cycles.iter().map(|c| c.labels(&net)).collect();
        let a: Vec<String> = [1, 5, 4, 3, 2].iter().map(|k| format!("xi_{{{k}}}")).collect();
        let b: Vec<String> = [1, 4, 2, 5, 3].iter().map(|k| format!("xi_{{{k}}}")).collect();
        assert!(seqs.contains(&a));
        assert!(seqs.contains(&b));
    }

    #[test]
    fn six_one_sinks_and_pair_level() {
        let net = net(6, 1);
        assert_eq!(net.census(), vec![0, 6, 9, 2]);
        let sinks: Vec<_> = net.sinks.iter().map(|&i| net.fixed_points[i].active.clone()).collect();
        assert_eq!(sinks, vec![set(&[1, 3, 5]), set(&[2, 4, 6])]);
        // xi_j -> xi_{j-1}, xi_{j,j+2}, xi_{j,j+3}, xi_{j,j+4}
        let xi1 = net.index_of(&set(&[1])).unwrap();
        let targets: Vec<_> = net
            .outgoing(xi1)
            .iter()
            .map(|&c| net.connections[c].target.clone())
            .collect();
        assert_eq!(targets, vec![set(&[6]), set(&[1, 3]), set(&[1, 4]), set(&[1, 5])]);
    }

    #[test]
    fn six_one_pair_level_has_no_symmetric_cycle() {
        let net = net(6, 1);
        let cycles = enumerate_cycles(&net, 12).unwrap();
        let pairs: Vec<_> = cycles.iter().filter(|c| c.j == Some(2)).collect();
        assert!(!pairs.is_empty());
        assert!(pairs.iter().all(|c| c.symmetry_class == SymmetryClass::None && !c.symmetric));
    }

    #[test]
    fn seven_one_symmetric_cycles() {
        let net = net(7, 1);
        let cycles = enumerate_cycles(&net, 7).unwrap();
        let pair = cycles
            .iter()
            .find(|c| c.j == Some(2) && c.symmetric)
            .expect("symmetric pair cycle");
        let first = &net.fixed_points[pair.fixed_points[0]].active;
        assert_eq!(first, &set(&[1, 4]));
        // j = 2: both arithmetic cases hold
        assert_eq!(pair.symmetry_class, SymmetryClass::CaseI { p: 3 });
        assert_eq!(symmetric_case_parameters(7, 2), (Some(3), Some(4)));
        let triple = cycles.iter().find(|c| c.j == Some(3)).expect("triple cycle");
        assert_eq!(triple.symmetry_class, SymmetryClass::CaseI { p: 2 });
    }

    #[test]
    fn eleven_node_case_ii() {
        assert_eq!(symmetric_case_parameters(11, 3), (None, Some(4)));
        assert_eq!(symmetric_case_parameters(11, 4), (None, Some(3)));
        assert_eq!(symmetric_case_parameters(11, 5), (Some(2), None));
    }

    #[test]
    fn spacing_rule() {
        assert!(gaps_equal_but_one(&set(&[1, 3]), 5));
        assert!(gaps_equal_but_one(&set(&[1, 5, 9]), 11));
        assert!(!gaps_equal_but_one(&set(&[1, 4, 7]), 11));
        assert!(!gaps_equal_but_one(&set(&[1, 3]), 8));
    }

    #[test]
    fn cycle_budget_is_enforced() {
        let net = net(7, 1);
        let all = enumerate_cycles(&net, 28).unwrap();
        assert!(all.len() > 2);
        assert!(matches!(
            enumerate_cycles_with_budget(&net, 28, 2),
            Err(Error::LimitExceeded(_))
        ));
    }

    #[test]
    fn sink_only_network_has_no_cycles() {
        // two isolated nodes: the only cycles would need connections between sinks
        let g = CouplingGraph::from_edges(2, &[]).unwrap();
        let net = build_network(&g, 2.0, 3.0).unwrap();
        assert_eq!(net.sinks.len(), 1);
        assert!(enumerate_cycles(&net, 10).unwrap().is_empty());
    }

    #[test]
    fn maximally_active_rules() {
        let v = |n, m| maximally_active(&make_ring(n, m).unwrap()).unwrap();
        assert_eq!(v(6, 1), MaximallyActive { j_max: 3, verdict: MaximalVerdict::AllSinks });
        assert_eq!(v(7, 1), MaximallyActive { j_max: 3, verdict: MaximalVerdict::SingleCycle });
        assert_eq!(v(5, 2), MaximallyActive { j_max: 1, verdict: MaximalVerdict::Network { p: 2 } });
        assert_eq!(v(7, 2).j_max, 2);
        let g = CouplingGraph::from_edges(3, &[(1, 2)]).unwrap();
        assert!(matches!(maximally_active(&g), Err(Error::Unsupported(_))));
    }

    #[test]
    fn classification_needs_a_ring() {
        let g = CouplingGraph::from_edges(4, &[(1, 2), (2, 3), (3, 4), (4, 1), (1, 3)]).unwrap();
        let net = build_network(&g, 2.0, 3.0).unwrap();
        let cycles = enumerate_cycles(&net, 6).unwrap();
        assert!(!cycles.is_empty());
        assert!(matches!(
            classify_symmetric(&cycles[0], &net),
            Err(Error::Unsupported(_))
        ));
    }
}
