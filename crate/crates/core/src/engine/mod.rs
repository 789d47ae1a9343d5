//! Forward error analysis of straight-line determinant programs.
//!
//! [`ExprGraph`] is the program, [`analyze`] bounds the error of every node
//! with exact dyadic arithmetic, and [`threshold`] turns the root bound into
//! the constant used by the static filters.

mod analyze;
mod graph;

pub use analyze::{
    analyze, analyze_nodes, reference_threshold, unit_roundoff, EngineError, FilterReport, NodeBounds, ReferenceRow,
    TableRow, INSPHERE_3D_REFERENCE,
};
pub use graph::{Arith, ExprGraph, ExprKind, NodeId};

use std::sync::OnceLock;

use crate::dim::{Dim, PredicateKind, Precision};

struct Compiled {
    graph: ExprGraph,
    threshold: [f64; 2],
}

fn table() -> &'static Vec<Compiled> {
    static TABLE: OnceLock<Vec<Compiled>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut v = Vec::new();
        for kind in [PredicateKind::Orientation, PredicateKind::Insphere] {
            for dim in Dim::all() {
                let graph = ExprGraph::for_predicate(kind, dim);
                let threshold = [Precision::Double, Precision::Single]
                    .map(|p| analyze(&graph, p.mantissa_bits()).expect("acyclic").threshold.to_f64_up());
                v.push(Compiled { graph, threshold });
            }
        }
        v
    })
}

fn slot(kind: PredicateKind, dim: Dim) -> usize {
    let base = match kind {
        PredicateKind::Orientation => 0,
        PredicateKind::Insphere => Dim::MAX,
    };
    base + dim.get() - 1
}

/// Shared instance of the built-in graph for a predicate.
pub fn graph(kind: PredicateKind, dim: Dim) -> &'static ExprGraph {
    &table()[slot(kind, dim)].graph
}

/// Static filter threshold: the root error bound rounded up to binary64.
pub fn threshold(kind: PredicateKind, dim: Dim, precision: Precision) -> f64 {
    let idx = match precision {
        Precision::Double => 0,
        Precision::Single => 1,
    };
    table()[slot(kind, dim)].threshold[idx]
}

/// Insphere threshold for the given dimension and mantissa width.
pub fn insphere_threshold(dim: Dim, precision: Precision) -> f64 {
    threshold(PredicateKind::Insphere, dim, precision)
}
