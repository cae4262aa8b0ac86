//! Weighted de Bruijn graphs `G1(Q,k)` and `G2(Q,k)`.
//!
//! `G1` has one vertex per word in `Q^{k-1}` and one edge per local
//! configuration `λ = i_1…i_k`, running from `i_1…i_{k-1}` to `i_2…i_k` with
//! weight `⟨⟨λ|λ⟩⟩`. `G2` is the same construction on pairs: vertex `(u, v)`
//! has index `u·q^{k-1} + v` and the edge for `(a, b)` carries `⟨⟨a|b⟩⟩`.
//! Edges of `G2` with `a ≠ b` form `M(Q,k)`; the rest form a copy of `G1`.

pub mod cycles;
mod sector;

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::rule::{decode, digits_to_string, pow, Amplitude, LocalConfig, RuleTable};

pub use sector::{deterministic_sector, DeterministicSector};

/// Default bound on the number of cycles [`enumerate_cycles`] will return.
pub const DEFAULT_CYCLE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    G1,
    G2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    /// `(a, b)` with weight `⟨⟨a|b⟩⟩`; `a == b` on `G1`.
    pub configs: (LocalConfig, LocalConfig),
    pub weight: Amplitude,
    /// The edge belongs to `M` (mismatched pair).
    pub in_m: bool,
    /// Both configurations lie in the deterministic sector.
    pub in_d: bool,
}

/// Edge subsets used to restrict cycle and path searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeFilter {
    All,
    /// Edges of `M`.
    Mismatched,
    /// Edges of the `G1` copy inside `G2` (all edges of a `G1` graph).
    Diagonal,
    /// Edges whose configurations lie in the deterministic sector.
    Sector,
    /// `D2 ∩ M`.
    SectorMismatched,
}

impl EdgeFilter {
    pub fn accepts(self, e: &Edge) -> bool {
        match self {
            EdgeFilter::All => true,
            EdgeFilter::Mismatched => e.in_m,
            EdgeFilter::Diagonal => !e.in_m,
            EdgeFilter::Sector => e.in_d,
            EdgeFilter::SectorMismatched => e.in_d && e.in_m,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDiGraph {
    kind: GraphKind,
    q: usize,
    k: usize,
    vertex_count: usize,
    edges: Vec<Edge>,
    out: Vec<Vec<usize>>,
}

/// A vertex-simple cycle as a sequence of edge ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Cycle {
    pub edges: Vec<usize>,
    pub weight: Amplitude,
}

pub fn build_g1(rule: &RuleTable) -> WeightedDiGraph {
    let (q, k) = (rule.q(), rule.k());
    let v = pow(q, k - 1);
    let edges = rule
        .configs()
        .map(|c| Edge {
            source: c.index() / q,
            target: c.index() % v,
            configs: (c, c),
            weight: rule.inner_unchecked(c, c),
            in_m: false,
            in_d: false,
        })
        .collect();
    WeightedDiGraph::from_edges(GraphKind::G1, q, k, v, edges)
}

pub fn build_g2(rule: &RuleTable) -> WeightedDiGraph {
    let (q, k) = (rule.q(), rule.k());
    let v = pow(q, k - 1);
    let mut edges = Vec::with_capacity(rule.config_count() * rule.config_count());
    for a in rule.configs() {
        for b in rule.configs() {
            let (ai, bi) = (a.index(), b.index());
            edges.push(Edge {
                source: (ai / q) * v + bi / q,
                target: (ai % v) * v + bi % v,
                configs: (a, b),
                weight: rule.inner_unchecked(a, b),
                in_m: a != b,
                in_d: false,
            });
        }
    }
    WeightedDiGraph::from_edges(GraphKind::G2, q, k, v * v, edges)
}

impl WeightedDiGraph {
    fn from_edges(kind: GraphKind, q: usize, k: usize, vertex_count: usize, edges: Vec<Edge>) -> Self {
        let mut out = vec![Vec::new(); vertex_count];
        for (id, e) in edges.iter().enumerate() {
            out[e.source].push(id);
        }
        WeightedDiGraph { kind, q, k, vertex_count, edges, out }
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    /// Ids of the edges leaving `v`.
    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    /// Side length of the vertex words, `q^{k-1}`.
    fn word_count(&self) -> usize {
        pow(self.q, self.k - 1)
    }

    /// The vertex lies in the `G1` copy (always true on `G1`).
    pub fn is_diagonal(&self, v: usize) -> bool {
        match self.kind {
            GraphKind::G1 => true,
            GraphKind::G2 => {
                let w = self.word_count();
                v / w == v % w
            }
        }
    }

    fn word(&self, index: usize) -> String {
        if self.k == 1 {
            // the single empty word
            return String::from("-");
        }
        digits_to_string(&decode(index, self.q, self.k - 1))
    }

    /// `i_1…i_{k-1}` on `G1`, `(u,v)` on `G2`.
    pub fn vertex_label(&self, v: usize) -> String {
        match self.kind {
            GraphKind::G1 => self.word(v),
            GraphKind::G2 => {
                let w = self.word_count();
                format!("({},{})", self.word(v / w), self.word(v % w))
            }
        }
    }

    /// The configuration string on `G1`, `a,b` on `G2`.
    pub fn edge_label(&self, id: usize) -> String {
        let (a, b) = self.edges[id].configs;
        let s = |c: LocalConfig| digits_to_string(&decode(c.index(), self.q, self.k));
        match self.kind {
            GraphKind::G1 => s(a),
            GraphKind::G2 => format!("{},{}", s(a), s(b)),
        }
    }

    /// Marks every edge whose configurations all lie in `sector`.
    pub fn with_sector(mut self, sector: &DeterministicSector) -> Self {
        for e in &mut self.edges {
            e.in_d = sector.contains(e.configs.0) && sector.contains(e.configs.1);
        }
        self
    }

    /// Keeps only the edges accepted by `filter`; vertices are kept.
    pub fn filtered(&self, filter: EdgeFilter) -> Self {
        let edges = self.edges.iter().filter(|e| filter.accepts(e)).cloned().collect();
        WeightedDiGraph::from_edges(self.kind, self.q, self.k, self.vertex_count, edges)
    }

    /// Product of the weights of the given edges.
    pub fn weight_of(&self, edge_ids: &[usize]) -> Amplitude {
        edge_ids.iter().map(|&e| self.edges[e].weight).product()
    }

    /// Calls `visit` once per vertex-simple cycle using only edges accepted
    /// by `accept`. Parallel edges give distinct cycles.
    pub fn for_each_cycle<A, F>(&self, accept: A, mut visit: F) -> ControlFlow<()>
    where
        A: Fn(&Edge) -> bool,
        F: FnMut(&[usize]) -> ControlFlow<()>,
    {
        // parallel[(u, w)] lists the accepted edges u -> w
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.vertex_count];
        let mut parallel: Vec<Vec<Vec<usize>>> = vec![Vec::new(); self.vertex_count];
        for (u, ids) in self.out.iter().enumerate() {
            for &id in ids {
                let e = &self.edges[id];
                if !accept(e) {
                    continue;
                }
                match adj[u].iter().position(|&w| w == e.target) {
                    Some(slot) => parallel[u][slot].push(id),
                    None => {
                        adj[u].push(e.target);
                        parallel[u].push(vec![id]);
                    }
                }
            }
        }
        let mut ids = Vec::new();
        cycles::elementary_circuits(&adj, |verts| {
            let choices: Vec<&[usize]> = (0..verts.len())
                .map(|i| {
                    let (u, w) = (verts[i], verts[(i + 1) % verts.len()]);
                    let slot = adj[u].iter().position(|&x| x == w).expect("circuit edge");
                    parallel[u][slot].as_slice()
                })
                .collect();
            // odometer over the parallel-edge choices
            let mut pick = vec![0usize; choices.len()];
            loop {
                ids.clear();
                ids.extend(pick.iter().zip(&choices).map(|(&p, c)| c[p]));
                visit(&ids)?;
                let mut i = 0;
                loop {
                    if i == pick.len() {
                        return ControlFlow::Continue(());
                    }
                    pick[i] += 1;
                    if pick[i] < choices[i].len() {
                        break;
                    }
                    pick[i] = 0;
                    i += 1;
                }
            }
        })
    }

    /// Shortest path from `from` to `to` over accepted edges, as edge ids.
    pub fn shortest_path<A>(&self, from: usize, to: usize, accept: A) -> Option<Vec<usize>>
    where
        A: Fn(&Edge) -> bool,
    {
        let out: Vec<Vec<(usize, usize)>> = self
            .out
            .iter()
            .map(|ids| ids.iter().map(|&id| (id, self.edges[id].target)).collect())
            .collect();
        cycles::shortest_path(&out, from, to, |id, _| accept(&self.edges[id]))
    }
}

/// All vertex-simple cycles of `g` whose edges pass `filter`, in a
/// deterministic order. Fails once more than `cap` cycles are found.
pub fn enumerate_cycles(g: &WeightedDiGraph, filter: EdgeFilter, cap: usize) -> Result<Vec<Cycle>> {
    let mut found = Vec::new();
    let flow = g.for_each_cycle(
        |e| filter.accepts(e),
        |ids| {
            if found.len() == cap {
                return ControlFlow::Break(());
            }
            found.push(Cycle { edges: ids.to_vec(), weight: g.weight_of(ids) });
            ControlFlow::Continue(())
        },
    );
    match flow {
        ControlFlow::Break(()) => Err(Error::CycleCapExceeded { cap }),
        ControlFlow::Continue(()) => Ok(found),
    }
}

/// `D1` or `D2`: the edges of `g` whose configurations all lie in `sector`.
pub fn subgraph_d(g: &WeightedDiGraph, sector: &DeterministicSector) -> WeightedDiGraph {
    g.clone().with_sector(sector).filtered(EdgeFilter::Sector)
}

/// Vertices touched by edges of `sector`, as `G1` vertex ids.
pub(crate) fn sector_vertices(rule: &RuleTable, sector: &DeterministicSector) -> BTreeSet<usize> {
    let (q, v) = (rule.q(), pow(rule.q(), rule.k() - 1));
    sector
        .configs()
        .iter()
        .flat_map(|c| [c.index() / q, c.index() % v])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule::DEFAULT_TOLERANCE;

    fn identity(k: usize) -> RuleTable {
        RuleTable::deterministic(2, k, DEFAULT_TOLERANCE, |d| d[k - 1]).unwrap()
    }

    #[test]
    fn g1_shapes() {
        let g = build_g1(&identity(2));
        assert_eq!((g.vertex_count(), g.edges().len()), (2, 4));
        let g = build_g1(&identity(3));
        assert_eq!((g.vertex_count(), g.edges().len()), (4, 8));
        for v in 0..4 {
            assert_eq!(g.out_edges(v).len(), 2);
            assert_eq!(g.edges().iter().filter(|e| e.target == v).count(), 2);
        }
        let g = build_g1(&identity(1));
        assert_eq!((g.vertex_count(), g.edges().len()), (1, 2));
        assert!(g.edges().iter().all(|e| e.source == 0 && e.target == 0));
    }

    #[test]
    fn g1_edge_101_runs_from_10_to_01() {
        let g = build_g1(&identity(3));
        let e = g.edge(5);
        assert_eq!(g.edge_label(5), "101");
        assert_eq!((g.vertex_label(e.source).as_str(), g.vertex_label(e.target).as_str()), ("10", "01"));
    }

    #[test]
    fn g2_shapes_and_flags() {
        let g = build_g2(&identity(2));
        assert_eq!((g.vertex_count(), g.edges().len()), (4, 16));
        assert_eq!(g.edges().iter().filter(|e| e.in_m).count(), 12);
        let g = build_g2(&identity(3));
        assert_eq!((g.vertex_count(), g.edges().len()), (16, 64));
        for e in g.edges() {
            assert_eq!(e.in_m, !(g.is_diagonal(e.source) && g.is_diagonal(e.target)));
        }
    }

    #[test]
    fn g1_cycle_counts() {
        for (k, n) in [(1, 2), (2, 3), (3, 6), (4, 19)] {
            let cycles = enumerate_cycles(&build_g1(&identity(k)), EdgeFilter::All, DEFAULT_CYCLE_CAP).unwrap();
            assert_eq!(cycles.len(), n, "k = {k}");
        }
    }

    #[test]
    fn cycle_cap_is_enforced() {
        let g = build_g1(&identity(3));
        assert_eq!(enumerate_cycles(&g, EdgeFilter::All, 5), Err(Error::CycleCapExceeded { cap: 5 }));
        assert_eq!(enumerate_cycles(&g, EdgeFilter::All, 6).unwrap().len(), 6);
    }

    #[test]
    fn k1_g2_has_q_squared_loops() {
        let g = build_g2(&identity(1));
        assert_eq!(g.vertex_count(), 1);
        let cycles = enumerate_cycles(&g, EdgeFilter::Mismatched, 10).unwrap();
        assert_eq!(cycles.len(), 2);
    }

    #[test]
    fn subgraph_d_of_two_config_sector() {
        let rule = identity(3);
        let sector = DeterministicSector::from_configs([LocalConfig::from_index(0), LocalConfig::from_index(7)]);
        let d2 = subgraph_d(&build_g2(&rule), &sector);
        let mut pairs: Vec<_> = d2.edges().iter().map(|e| (e.configs.0.index(), e.configs.1.index())).collect();
        pairs.sort();
        assert_eq!(pairs, vec![(0, 0), (0, 7), (7, 0), (7, 7)]);
        let d1 = subgraph_d(&build_g1(&rule), &DeterministicSector::default());
        assert!(d1.edges().is_empty());
    }
}
