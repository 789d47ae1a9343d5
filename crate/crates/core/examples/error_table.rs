//! Derives static filter thresholds with the forward error engine, for the
//! built-in predicates and for a hand-built expression.

use certpred::engine::{analyze, ExprGraph, ExprKind, FilterReport, NodeId};
use certpred::{Dim, PredicateKind, Precision};

fn main() {
    let report = FilterReport::for_predicate(PredicateKind::Insphere, Dim::new(3).unwrap(), Precision::Double);
    print!("{}", report.to_text());

    println!();
    println!("{:<12} {:>4} {:>24} {:>24}", "test", "dim", "53-bit threshold", "24-bit threshold");
    for kind in [PredicateKind::Orientation, PredicateKind::Insphere] {
        for dim in Dim::all() {
            let t53 = certpred::engine::threshold(kind, dim, Precision::Double);
            let t24 = certpred::engine::threshold(kind, dim, Precision::Single);
            println!("{:<12} {:>4} {:>24.6e} {:>24.6e}", kind.to_string(), dim.get(), t53, t24);
        }
    }

    // a*b - c*d over four inputs in [-1, 1]
    let nodes = vec![
        ExprKind::Input(0),
        ExprKind::Input(1),
        ExprKind::Input(2),
        ExprKind::Input(3),
        ExprKind::Mul(NodeId(0), NodeId(1)),
        ExprKind::Mul(NodeId(2), NodeId(3)),
        ExprKind::Sub(NodeId(4), NodeId(5)),
    ];
    let graph = ExprGraph::from_nodes(nodes, NodeId(6)).unwrap();
    let custom = analyze(&graph, 53).unwrap();
    println!();
    println!("a*b - c*d: magnitude {} error {} ({:e})", custom.mag_bound, custom.threshold, custom.threshold_f64);
}
