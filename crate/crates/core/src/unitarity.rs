//! Decision procedures for unitarity of the global evolution, periodic and
//! infinite lattices, with witnesses for every violated condition.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::ControlFlow;
use core::str::FromStr;

use crate::debruijn::{
    build_g1, build_g2, deterministic_sector, sector_vertices, DeterministicSector, Edge, WeightedDiGraph,
    DEFAULT_CYCLE_CAP,
};
use crate::debruijn::cycles::strongly_connected_components;
use crate::error::{Error, Result};
use crate::linalg::det;
use crate::rule::{approx_one, approx_zero, Amplitude, LocalConfig, RuleTable};
use crate::surjectivity;

/// One condition of the periodic (`P-*`) or infinite (`I-*`) criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConditionId {
    /// Every cycle of `G1` has weight 1.
    PeriodicCycles,
    /// Every cycle of `M` has weight 0.
    PeriodicMismatchedCycles,
    /// Every acyclic `M` path between `G1` vertices has weight 0.
    PeriodicMismatchedPaths,
    /// Every cycle of `G1` has weight 1.
    InfiniteCycles,
    /// Every acyclic `G1` path between `D1` vertices has weight 1.
    InfiniteSectorPaths,
    /// Every acyclic `M` path between `G1` vertices has weight 0.
    InfiniteMismatchedPaths,
    /// Every cycle of `D2 ∩ M` has weight 0.
    InfiniteSectorCycles,
    /// The global evolution is surjective.
    InfiniteSurjective,
}

impl ConditionId {
    pub const PERIODIC: [ConditionId; 3] = [
        ConditionId::PeriodicCycles,
        ConditionId::PeriodicMismatchedCycles,
        ConditionId::PeriodicMismatchedPaths,
    ];
    pub const INFINITE: [ConditionId; 5] = [
        ConditionId::InfiniteCycles,
        ConditionId::InfiniteSectorPaths,
        ConditionId::InfiniteMismatchedPaths,
        ConditionId::InfiniteSectorCycles,
        ConditionId::InfiniteSurjective,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConditionId::PeriodicCycles => "P-i",
            ConditionId::PeriodicMismatchedCycles => "P-ii",
            ConditionId::PeriodicMismatchedPaths => "P-iii",
            ConditionId::InfiniteCycles => "I-i",
            ConditionId::InfiniteSectorPaths => "I-ii",
            ConditionId::InfiniteMismatchedPaths => "I-iii",
            ConditionId::InfiniteSectorCycles => "I-iv",
            ConditionId::InfiniteSurjective => "I-v",
        }
    }

    pub fn mode(self) -> Mode {
        if ConditionId::PERIODIC.contains(&self) {
            Mode::Periodic
        } else {
            Mode::Infinite
        }
    }

    /// The value every witness weight must take.
    pub fn target(self) -> Amplitude {
        match self {
            ConditionId::PeriodicCycles | ConditionId::InfiniteCycles | ConditionId::InfiniteSectorPaths => {
                Amplitude::new(1.0, 0.0)
            }
            _ => Amplitude::new(0.0, 0.0),
        }
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConditionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConditionId::PERIODIC
            .iter()
            .chain(ConditionId::INFINITE.iter())
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Parameter(alloc::format!("unknown condition {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Periodic,
    Infinite,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Periodic => "periodic",
            Mode::Infinite => "infinite",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Mode::Periodic),
            "infinite" => Ok(Mode::Infinite),
            _ => Err(Error::Parameter(alloc::format!("unknown mode {s:?}"))),
        }
    }
}

/// What a report points at. Graph witnesses list the configuration pair
/// `(a, b)` of every edge in order; on `G1` the two entries coincide.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Witness {
    Cycle(Vec<(LocalConfig, LocalConfig)>),
    Path(Vec<(LocalConfig, LocalConfig)>),
    /// `⟨ρ'_0…ρ'_{k-2}|F|γ ρ_0…ρ_{k-2}⟩` vanishes.
    Scalar { gamma: Vec<usize>, rho: LocalConfig, rho_prime: LocalConfig },
    /// `det Φ^(γ)` vanishes.
    PhiDeterminant { gamma: Vec<usize> },
}

impl Witness {
    /// Recomputes the offending quantity from the rule.
    pub fn evaluate(&self, rule: &RuleTable) -> Result<Amplitude> {
        match self {
            Witness::Cycle(edges) | Witness::Path(edges) => {
                edges.iter().try_fold(Amplitude::new(1.0, 0.0), |acc, &(a, b)| Ok(acc * rule.inner(a, b)?))
            }
            Witness::Scalar { gamma, rho, rho_prime } => {
                surjectivity::bordered_scalar(rule, gamma, rule.check(*rho)?, rule.check(*rho_prime)?)
            }
            Witness::PhiDeterminant { gamma } => Ok(det(&surjectivity::phi_matrix(rule, gamma)?.entries)),
        }
    }

    /// Edge pairs for graph witnesses, empty otherwise.
    pub fn edges(&self) -> &[(LocalConfig, LocalConfig)] {
        match self {
            Witness::Cycle(e) | Witness::Path(e) => e,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    pub condition: ConditionId,
    pub witness: Witness,
    pub value: Amplitude,
    /// `|value − target|`.
    pub margin: f64,
}

impl ConstraintReport {
    pub fn new(condition: ConditionId, witness: Witness, value: Amplitude) -> Self {
        let margin = (value - condition.target()).norm();
        ConstraintReport { condition, witness, value, margin }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub unitary: bool,
    pub mode: Mode,
    pub reports: Vec<ConstraintReport>,
}

impl Verdict {
    fn from_reports(mode: Mode, reports: Vec<ConstraintReport>) -> Self {
        Verdict { unitary: reports.is_empty(), mode, reports }
    }

    /// Conditions with at least one report, in order.
    pub fn failed_conditions(&self) -> Vec<ConditionId> {
        let set: BTreeSet<_> = self.reports.iter().map(|r| r.condition).collect();
        set.into_iter().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    /// Bound on enumerated cycles or paths where enumeration is needed.
    pub cycle_cap: usize,
    /// Reports kept per condition.
    pub max_reports: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { cycle_cap: DEFAULT_CYCLE_CAP, max_reports: 100 }
    }
}

pub fn check_periodic(rule: &RuleTable) -> Result<Verdict> {
    check_periodic_with(rule, &CheckOptions::default())
}

pub fn check_periodic_with(rule: &RuleTable, opts: &CheckOptions) -> Result<Verdict> {
    let ctx = Context::new(rule, None);
    let mut reports = Vec::new();
    for cond in ConditionId::PERIODIC {
        reports.extend(ctx.evaluate(cond, opts)?);
    }
    Ok(Verdict::from_reports(Mode::Periodic, reports))
}

pub fn check_infinite(rule: &RuleTable) -> Result<Verdict> {
    check_infinite_with(rule, &CheckOptions::default())
}

pub fn check_infinite_with(rule: &RuleTable, opts: &CheckOptions) -> Result<Verdict> {
    let sector = deterministic_sector(rule);
    if sector.is_empty() {
        return Err(Error::NoDeterministicSector);
    }
    let ctx = Context::new(rule, Some(sector));
    let mut reports = Vec::new();
    for cond in ConditionId::INFINITE {
        reports.extend(ctx.evaluate(cond, opts)?);
    }
    Ok(Verdict::from_reports(Mode::Infinite, reports))
}

/// Violations of a single condition, at most `max_reports` of them.
pub fn evaluate_condition(rule: &RuleTable, cond: ConditionId) -> Result<Vec<ConstraintReport>> {
    evaluate_condition_with(rule, cond, &CheckOptions::default())
}

pub fn evaluate_condition_with(
    rule: &RuleTable,
    cond: ConditionId,
    opts: &CheckOptions,
) -> Result<Vec<ConstraintReport>> {
    let sector = match cond.mode() {
        Mode::Periodic => None,
        Mode::Infinite => {
            let s = deterministic_sector(rule);
            if s.is_empty() {
                return Err(Error::NoDeterministicSector);
            }
            Some(s)
        }
    };
    Context::new(rule, sector).evaluate(cond, opts)
}

struct Context<'a> {
    rule: &'a RuleTable,
    eps: f64,
    g1: WeightedDiGraph,
    g2: WeightedDiGraph,
    sector: Option<DeterministicSector>,
}

impl<'a> Context<'a> {
    fn new(rule: &'a RuleTable, sector: Option<DeterministicSector>) -> Self {
        let mut g2 = build_g2(rule);
        if let Some(s) = &sector {
            g2 = g2.with_sector(s);
        }
        Context { rule, eps: rule.tolerance(), g1: build_g1(rule), g2, sector }
    }

    fn evaluate(&self, cond: ConditionId, opts: &CheckOptions) -> Result<Vec<ConstraintReport>> {
        let mut reports = match cond {
            ConditionId::PeriodicCycles | ConditionId::InfiniteCycles => self.normalization(cond, opts).reports,
            ConditionId::PeriodicMismatchedCycles => self.mismatched_cycles(cond, opts, |_| true),
            ConditionId::InfiniteSectorCycles => self.mismatched_cycles(cond, opts, |e| e.in_d),
            ConditionId::PeriodicMismatchedPaths | ConditionId::InfiniteMismatchedPaths => {
                self.mismatched_paths(cond, opts)
            }
            ConditionId::InfiniteSectorPaths => self.sector_paths(opts)?,
            ConditionId::InfiniteSurjective => {
                let sector = self.sector.as_ref().ok_or(Error::NoDeterministicSector)?;
                surjectivity::check_surjectivity(self.rule, sector)?
            }
        };
        reports.truncate(opts.max_reports);
        reports.sort_by(|a, b| a.witness.cmp(&b.witness));
        Ok(reports)
    }

    fn pairs(&self, g: &WeightedDiGraph, ids: &[usize]) -> Vec<(LocalConfig, LocalConfig)> {
        ids.iter().map(|&id| g.edge(id).configs).collect()
    }

    fn nonzero(&self, e: &Edge) -> bool {
        !approx_zero(e.weight, self.eps)
    }

    /// Cycles of `G1` with weight other than 1, found without enumerating
    /// all cycles. A zero edge closes into a zero-weight cycle through the
    /// shortest path back. On the nonzero edges every cycle has weight 1
    /// iff each strongly connected component carries a potential `h` with
    /// `h(u)·w = h(v)` on every edge; an edge breaking this closes a walk
    /// through the BFS tree whose simple cycles are checked directly.
    fn normalization(&self, cond: ConditionId, opts: &CheckOptions) -> Normalization {
        let g = &self.g1;
        let n = g.vertex_count();
        let mut reports = Vec::new();
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut consistent = true;

        let mut push_cycle = |ids: Vec<usize>, reports: &mut Vec<ConstraintReport>| {
            let value = g.weight_of(&ids);
            if approx_one(value, self.eps) || !seen.insert(canonical_rotation(&ids)) {
                return;
            }
            reports.push(ConstraintReport::new(cond, Witness::Cycle(self.pairs(g, &ids)), value));
        };

        for (id, e) in g.edges().iter().enumerate() {
            if reports.len() >= opts.max_reports {
                break;
            }
            if self.nonzero(e) {
                continue;
            }
            consistent = false;
            let back = g.shortest_path(e.target, e.source, |_| true).expect("de Bruijn graphs are strongly connected");
            let mut ids = vec![id];
            ids.extend(back);
            push_cycle(ids, &mut reports);
        }

        let adj: Vec<Vec<usize>> = (0..n)
            .map(|v| {
                g.out_edges(v)
                    .iter()
                    .filter(|&&id| self.nonzero(g.edge(id)))
                    .map(|&id| g.edge(id).target)
                    .collect()
            })
            .collect();
        let comp = strongly_connected_components(&adj);
        let same = |e: &Edge| self.nonzero(e) && comp[e.source] == comp[e.target];

        // BFS trees with potentials, one per component
        let mut h = vec![Amplitude::new(0.0, 0.0); n];
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut root = vec![usize::MAX; n];
        for r in 0..n {
            if root[r] != usize::MAX {
                continue;
            }
            root[r] = r;
            h[r] = Amplitude::new(1.0, 0.0);
            let mut queue = VecDeque::from([r]);
            while let Some(u) = queue.pop_front() {
                for &id in g.out_edges(u) {
                    let e = g.edge(id);
                    if same(e) && root[e.target] == usize::MAX {
                        root[e.target] = r;
                        h[e.target] = h[u] * e.weight;
                        parent[e.target] = Some(id);
                        queue.push_back(e.target);
                    }
                }
            }
        }

        // a cycle of length <= n deviating by more than eps forces some edge
        // to deviate by more than eps / n relative to the potential
        let rel = self.eps / (2.0 * n as f64);
        for (id, e) in g.edges().iter().enumerate() {
            if reports.len() >= opts.max_reports {
                break;
            }
            if !same(e) || (h[e.source] * e.weight - h[e.target]).norm() <= rel * h[e.target].norm() {
                continue;
            }
            consistent = false;
            let r = root[e.source];
            let mut walk = tree_path(g, &parent, e.source);
            walk.push(id);
            walk.extend(g.shortest_path(e.target, r, |x| same(x)).expect("same component"));
            for cycle in split_closed_walk(g, &walk) {
                push_cycle(cycle, &mut reports);
            }
        }

        Normalization { reports, potential: if consistent { Some(h) } else { None } }
    }

    /// `I-ii`. With a consistent potential every simple path from `u` to
    /// `v` weighs `h(v)/h(u)`, so one shortest path per pair suffices.
    /// Otherwise paths between sector vertices are enumerated.
    fn sector_paths(&self, opts: &CheckOptions) -> Result<Vec<ConstraintReport>> {
        let cond = ConditionId::InfiniteSectorPaths;
        let sector = self.sector.as_ref().ok_or(Error::NoDeterministicSector)?;
        let ends = sector_vertices(self.rule, sector);
        let g = &self.g1;
        let mut reports = Vec::new();
        if ends.len() < 2 {
            return Ok(reports);
        }

        if let Some(h) = self.normalization(cond, opts).potential {
            for &u in &ends {
                for &v in &ends {
                    if u == v || approx_one(h[v] / h[u], self.eps) {
                        continue;
                    }
                    let ids = g.shortest_path(u, v, |_| true).expect("strongly connected");
                    let value = g.weight_of(&ids);
                    if !approx_one(value, self.eps) {
                        reports.push(ConstraintReport::new(cond, Witness::Path(self.pairs(g, &ids)), value));
                    }
                    if reports.len() >= opts.max_reports {
                        return Ok(reports);
                    }
                }
            }
            return Ok(reports);
        }

        let mut explored = 0usize;
        for &u in &ends {
            let flow = simple_paths_from(g, u, |ids, last| {
                explored += 1;
                if explored > opts.cycle_cap {
                    return ControlFlow::Break(Err(Error::PathCapExceeded { cap: opts.cycle_cap }));
                }
                if last != u && ends.contains(&last) {
                    let value = g.weight_of(ids);
                    if !approx_one(value, self.eps) {
                        reports.push(ConstraintReport::new(cond, Witness::Path(self.pairs(g, ids)), value));
                        if reports.len() >= opts.max_reports {
                            return ControlFlow::Break(Ok(()));
                        }
                    }
                }
                ControlFlow::Continue(())
            });
            match flow {
                ControlFlow::Break(Err(e)) => return Err(e),
                ControlFlow::Break(Ok(())) => break,
                ControlFlow::Continue(()) => {}
            }
        }
        Ok(reports)
    }

    /// Cycles of nonzero `M` edges avoiding the `G1` copy. Any such cycle
    /// has a nonzero weight, so each one found is a violation.
    fn mismatched_cycles<A>(&self, cond: ConditionId, opts: &CheckOptions, extra: A) -> Vec<ConstraintReport>
    where
        A: Fn(&Edge) -> bool,
    {
        let g = &self.g2;
        let mut reports = Vec::new();
        let _ = g.for_each_cycle(
            |e| e.in_m && extra(e) && self.nonzero(e) && !g.is_diagonal(e.source) && !g.is_diagonal(e.target),
            |ids| {
                reports.push(ConstraintReport::new(cond, Witness::Cycle(self.pairs(g, ids)), g.weight_of(ids)));
                if reports.len() >= opts.max_reports {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            },
        );
        reports
    }

    /// Paths of nonzero `M` edges that leave a diagonal vertex, stay off the
    /// diagonal, and return to it. Reachability decides the condition; the
    /// BFS tree supplies one simple witness per entering edge.
    fn mismatched_paths(&self, cond: ConditionId, opts: &CheckOptions) -> Vec<ConstraintReport> {
        let g = &self.g2;
        let n = g.vertex_count();
        let mut reports = Vec::new();
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut seen = vec![false; n];
        for s in (0..n).filter(|&v| g.is_diagonal(v)) {
            parent.iter_mut().for_each(|p| *p = None);
            seen.iter_mut().for_each(|x| *x = false);
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for &id in g.out_edges(x) {
                    let e = g.edge(id);
                    if !e.in_m || !self.nonzero(e) {
                        continue;
                    }
                    if g.is_diagonal(e.target) {
                        let mut ids = tree_path(g, &parent, x);
                        ids.push(id);
                        let value = g.weight_of(&ids);
                        reports.push(ConstraintReport::new(cond, Witness::Path(self.pairs(g, &ids)), value));
                        if reports.len() >= opts.max_reports {
                            return reports;
                        }
                    } else if !seen[e.target] {
                        seen[e.target] = true;
                        parent[e.target] = Some(id);
                        queue.push_back(e.target);
                    }
                }
            }
        }
        reports
    }
}

struct Normalization {
    reports: Vec<ConstraintReport>,
    /// Present when every cycle of `G1` has weight 1.
    potential: Option<Vec<Amplitude>>,
}

/// Edge ids from the BFS root to `v` along parent pointers.
fn tree_path(g: &WeightedDiGraph, parent: &[Option<usize>], mut v: usize) -> Vec<usize> {
    let mut ids = Vec::new();
    while let Some(id) = parent[v] {
        ids.push(id);
        v = g.edge(id).source;
    }
    ids.reverse();
    ids
}

/// Splits a closed walk into vertex-simple cycles.
fn split_closed_walk(g: &WeightedDiGraph, walk: &[usize]) -> Vec<Vec<usize>> {
    let mut cycles = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut verts: Vec<usize> = vec![g.edge(walk[0]).source];
    for &id in walk {
        let t = g.edge(id).target;
        stack.push(id);
        if let Some(pos) = verts.iter().position(|&v| v == t) {
            cycles.push(stack.split_off(pos));
            verts.truncate(pos + 1);
        } else {
            verts.push(t);
        }
    }
    cycles
}

/// Rotation of a cycle starting at its least edge id.
fn canonical_rotation(ids: &[usize]) -> Vec<usize> {
    let start = (0..ids.len()).min_by_key(|&i| ids[i]).unwrap_or(0);
    ids[start..].iter().chain(&ids[..start]).copied().collect()
}

/// Depth-first over vertex-simple paths from `start`; `visit` sees each
/// nonempty path and its last vertex.
fn simple_paths_from<F, B>(g: &WeightedDiGraph, start: usize, mut visit: F) -> ControlFlow<B>
where
    F: FnMut(&[usize], usize) -> ControlFlow<B>,
{
    let mut on_path = vec![false; g.vertex_count()];
    on_path[start] = true;
    let mut ids: Vec<usize> = Vec::new();
    let mut frames = vec![(start, 0usize)];
    while let Some(&mut (v, ref mut next)) = frames.last_mut() {
        if let Some(&id) = g.out_edges(v).get(*next) {
            *next += 1;
            let w = g.edge(id).target;
            if on_path[w] {
                continue;
            }
            on_path[w] = true;
            ids.push(id);
            visit(&ids, w)?;
            frames.push((w, 0));
        } else {
            frames.pop();
            if !frames.is_empty() {
                on_path[v] = false;
                ids.pop();
            }
        }
    }
    ControlFlow::Continue(())
}

/// Renders graph witnesses as `a|b` pairs joined by spaces.
pub fn witness_string(rule: &RuleTable, w: &Witness) -> String {
    use alloc::format;
    let pair = |&(a, b): &(LocalConfig, LocalConfig)| format!("{}|{}", rule.config_string(a), rule.config_string(b));
    match w {
        Witness::Cycle(e) => format!("cycle {}", e.iter().map(pair).collect::<Vec<_>>().join(" ")),
        Witness::Path(e) => format!("path {}", e.iter().map(pair).collect::<Vec<_>>().join(" ")),
        Witness::Scalar { gamma, rho, rho_prime } => format!(
            "scalar gamma={} rho={} rho'={}",
            crate::rule::digits_to_string(gamma),
            rule.config_string(*rho),
            rule.config_string(*rho_prime)
        ),
        Witness::PhiDeterminant { gamma } => format!("det Phi({})", crate::rule::digits_to_string(gamma)),
    }
}
