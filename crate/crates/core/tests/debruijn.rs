mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use qca_core::debruijn::{
    build_g1, build_g2, deterministic_sector, enumerate_cycles, subgraph_d, DeterministicSector, EdgeFilter,
    GraphKind, DEFAULT_CYCLE_CAP,
};
use qca_core::families::Family;
use qca_core::rule::encode;
use qca_core::transfer::WeightMonomial;
use qca_core::{Error, RuleTable, DEFAULT_TOLERANCE};

/// Each cycle as the sorted list of its configuration indices, rendered
/// like `w1w2w4`.
fn g1_cycle_labels(rule: &RuleTable) -> BTreeSet<String> {
    let g = build_g1(rule);
    enumerate_cycles(&g, EdgeFilter::All, DEFAULT_CYCLE_CAP)
        .unwrap()
        .iter()
        .map(|c| {
            let mut ids: Vec<usize> = c.edges.iter().map(|&e| g.edge(e).configs.0.index()).collect();
            ids.sort();
            ids.iter().map(|i| format!("w{i}")).collect::<String>()
        })
        .collect()
}

fn shift(k: usize) -> RuleTable {
    RuleTable::deterministic(2, k, DEFAULT_TOLERANCE, |d| d[k - 1]).unwrap()
}

#[test]
fn graph_shapes() {
    for (k, v, e) in [(1, 1, 2), (2, 2, 4), (3, 4, 8)] {
        let g = build_g1(&shift(k));
        assert_eq!((g.vertex_count(), g.edges().len()), (v, e));
        assert_eq!(g.kind(), GraphKind::G1);
    }
    let g = build_g1(&shift(1));
    assert!(g.edges().iter().all(|e| e.source == 0 && e.target == 0));
    for (k, v, e) in [(2, 4, 16), (3, 16, 64)] {
        let g = build_g2(&shift(k));
        assert_eq!((g.vertex_count(), g.edges().len()), (v, e));
        assert_eq!(g.edges().iter().filter(|e| e.in_m).count(), e - 2usize.pow(k as u32));
    }
    let g1 = build_g1(&shift(3));
    assert_eq!(g1.vertex_label(5 % 4), "01");
    assert_eq!(g1.edge_label(5), "101");
}

#[test]
fn de_bruijn_degrees() {
    let g = build_g2(&shift(3));
    let mut indeg = vec![0; g.vertex_count()];
    for v in 0..g.vertex_count() {
        assert_eq!(g.out_edges(v).len(), 4);
    }
    for e in g.edges() {
        indeg[e.target] += 1;
    }
    assert!(indeg.iter().all(|&d| d == 4));
}

#[test]
fn g1_cycle_lists() {
    let r2 = common::random_rule(&mut common::rng(1), 2, 2);
    assert_eq!(g1_cycle_labels(&r2), ["w0", "w3", "w1w2"].iter().map(|s| s.to_string()).collect());
    let r3 = common::random_rule(&mut common::rng(1), 2, 3);
    let expect: BTreeSet<String> = ["w0", "w7", "w2w5", "w1w2w4", "w3w5w6", "w1w3w4w6"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    assert_eq!(g1_cycle_labels(&r3), expect);
}

#[test]
fn cycle_weights_are_products() {
    let r = common::random_rule(&mut common::rng(2), 2, 3);
    let g = build_g2(&r);
    for c in enumerate_cycles(&g, EdgeFilter::Mismatched, DEFAULT_CYCLE_CAP).unwrap().iter().take(200) {
        let w: qca_core::Amplitude = c.edges.iter().map(|&e| r.inner(g.edge(e).configs.0, g.edge(e).configs.1).unwrap()).product();
        assert!((w - c.weight).norm() < 1e-12);
        for (i, &e) in c.edges.iter().enumerate() {
            assert_eq!(g.edge(e).target, g.edge(c.edges[(i + 1) % c.edges.len()]).source);
        }
    }
}

#[test]
fn off_diagonal_m_cycles_for_k2() {
    let r = common::random_rule(&mut common::rng(3), 2, 2);
    let g = build_g2(&r);
    let labels: BTreeSet<String> = enumerate_cycles(&g, EdgeFilter::Mismatched, DEFAULT_CYCLE_CAP)
        .unwrap()
        .iter()
        .filter(|c| c.edges.iter().all(|&e| !g.is_diagonal(g.edge(e).source)))
        .map(|c| {
            WeightMonomial::new(c.edges.iter().map(|&e| {
                let (a, b) = g.edge(e).configs;
                (a.index(), b.index())
            }))
            .to_string()
        })
        .collect();
    assert_eq!(labels, ["w03", "w12^2"].iter().map(|s| s.to_string()).collect());
}

#[test]
fn cycle_cap_is_a_resource_error() {
    let g = build_g2(&shift(3));
    let err = enumerate_cycles(&g, EdgeFilter::All, 10).unwrap_err();
    assert_eq!(err, Error::CycleCapExceeded { cap: 10 });
    assert!(err.is_resource());
}

#[test]
fn sectors_of_families() {
    let mut rng = common::rng(5);
    let r = common::sample(Family::F21_00, &mut rng);
    let s = deterministic_sector(&r);
    assert_eq!(s.configs().iter().map(|&c| r.config_string(c)).collect::<Vec<_>>(), ["00"]);
    let r = common::sample(Family::F31_000_111, &mut rng);
    let s = deterministic_sector(&r);
    assert_eq!(s.configs().iter().map(|&c| r.config_string(c)).collect::<Vec<_>>(), ["000", "111"]);
    assert_eq!(deterministic_sector(&shift(2)).len(), 4);
}

#[test]
fn sector_subgraphs() {
    let r = shift(2);
    let s = DeterministicSector::from_configs([r.parse_config("00").unwrap()]);
    let d1 = subgraph_d(&build_g1(&r), &s);
    assert_eq!(d1.edges().len(), 1);
    assert_eq!((d1.edges()[0].source, d1.edges()[0].target), (0, 0));

    let r3 = shift(3);
    let s = DeterministicSector::from_configs(["000", "111"].map(|x| r3.parse_config(x).unwrap()));
    let d2 = subgraph_d(&build_g2(&r3), &s);
    let pairs: BTreeSet<String> = (0..d2.edges().len()).map(|e| d2.edge_label(e)).collect();
    let expect: BTreeSet<String> =
        ["000,000", "000,111", "111,000", "111,111"].iter().map(|s| s.to_string()).collect();
    assert_eq!(pairs, expect);

    assert!(subgraph_d(&build_g2(&r3), &DeterministicSector::default()).edges().is_empty());
}

/// The deterministic evolution of every length-k path inside the sector
/// stays inside the sector.
fn assert_closed(rule: &RuleTable, sector: &DeterministicSector) {
    let (q, k) = (rule.q(), rule.k());
    let len = 2 * k - 1;
    for idx in 0..q.pow(len as u32) {
        let digits = qca_core::rule::decode(idx, q, len);
        let windows: Vec<_> = (0..k).map(|i| rule.config(&digits[i..i + k]).unwrap()).collect();
        if windows.iter().all(|&w| sector.contains(w)) {
            let image: Vec<usize> = windows.iter().map(|&w| rule.deterministic_output(w).unwrap()).collect();
            assert!(sector.contains(qca_core::LocalConfig::from_index(encode(&image, q))));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn g1_is_the_diagonal_of_g2(seed in any::<u64>(), k in 1usize..=3) {
        let r = common::random_rule(&mut common::rng(seed), 2, k);
        let g1 = build_g1(&r);
        let g2 = build_g2(&r);
        let v = g1.vertex_count();
        let diag: Vec<_> = g2.edges().iter().filter(|e| !e.in_m).collect();
        prop_assert_eq!(diag.len(), g1.edges().len());
        for e in diag {
            let e1 = &g1.edges()[e.configs.0.index()];
            prop_assert_eq!(e.source, e1.source * v + e1.source);
            prop_assert_eq!(e.target, e1.target * v + e1.target);
            prop_assert_eq!(e.weight, e1.weight);
        }
    }

    #[test]
    fn sector_is_closed_and_on_cycles(seed in any::<u64>(), k in 1usize..=3) {
        use rand::Rng;
        let mut rng = common::rng(seed);
        // a rule that is deterministic on a random subset of configurations
        let table: Vec<Option<usize>> = (0..1usize << k)
            .map(|_| if rng.random_bool(0.7) { Some(rng.random_range(0..2)) } else { None })
            .collect();
        let rule = qca_core::RuleTable::from_fn(2, k, DEFAULT_TOLERANCE, |d, i| {
            match table[encode(d, 2)] {
                Some(o) if o == i => qca_core::Amplitude::new(1.0, 0.0),
                Some(_) => qca_core::Amplitude::new(0.0, 0.0),
                None => qca_core::Amplitude::new(0.6, 0.0),
            }
        }).unwrap();
        let sector = deterministic_sector(&rule);
        prop_assert!(sector.configs().is_subset(&rule.big_set()));
        assert_closed(&rule, &sector);
        // every sector edge lies on a cycle made of sector edges
        let g = subgraph_d(&build_g1(&rule), &sector);
        let on_cycle: BTreeSet<usize> = enumerate_cycles(&g, EdgeFilter::All, DEFAULT_CYCLE_CAP)
            .unwrap()
            .iter()
            .flat_map(|c| c.edges.iter().map(|&e| g.edge(e).configs.0.index()).collect::<Vec<_>>())
            .collect();
        let all: BTreeSet<usize> = sector.configs().iter().map(|c| c.index()).collect();
        prop_assert_eq!(on_cycle, all);
    }
}
