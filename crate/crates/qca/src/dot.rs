//! Graphviz export of the weighted de Bruijn graphs.

use std::fmt::Write;

use qca_core::debruijn::{GraphKind, WeightedDiGraph};
use qca_core::Amplitude;

fn weight(w: Amplitude) -> String {
    // avoid printing -0
    let clean = |x: f64| if x.abs() < 5e-5 { 0.0 } else { x };
    let (re, im) = (clean(w.re), clean(w.im));
    if im == 0.0 {
        format!("{re:.4}")
    } else {
        format!("{re:.4}{im:+.4}i")
    }
}

/// Vertices are labelled by their words, edges by `label / weight`.
/// `M` edges are dashed.
pub fn to_dot(g: &WeightedDiGraph) -> String {
    let name = match g.kind() {
        GraphKind::G1 => "G1",
        GraphKind::G2 => "G2",
    };
    let mut out = format!("digraph {name} {{\n");
    for v in 0..g.vertex_count() {
        let label = g.vertex_label(v);
        let label = if label.is_empty() { "-".to_string() } else { label };
        writeln!(out, "  v{v} [label=\"{label}\"];").unwrap();
    }
    for (id, e) in g.edges().iter().enumerate() {
        let style = if e.in_m { ", style=dashed" } else { "" };
        writeln!(
            out,
            "  v{} -> v{} [label=\"{} / {}\"{style}];",
            e.source,
            e.target,
            g.edge_label(id),
            weight(e.weight)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
