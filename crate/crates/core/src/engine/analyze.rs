use std::collections::HashMap;

use num_bigint::BigUint;
use serde::Serialize;
use thiserror::Error;

use super::graph::{ExprGraph, ExprKind, NodeId};
use crate::dim::{Dim, PredicateKind, Precision};
use crate::exact::DyadicBound;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("expression graph has a cycle through node {0}")]
    Cycle(usize),
}

/// Magnitude and error bounds of one node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeBounds {
    /// Upper bound on the absolute exact value.
    pub mag: DyadicBound,
    /// Upper bound on `|computed - exact|`.
    pub err: DyadicBound,
}

/// Unit roundoff `2^-(m+1)` for an `m`-bit mantissa.
pub fn unit_roundoff(mantissa_bits: u32) -> DyadicBound {
    DyadicBound::pow2(-(i64::from(mantissa_bits) + 1))
}

/// Propagates bounds bottom-up through every node reachable from the root.
///
/// Inputs have magnitude 1 and error `u`. For `x ± y` the magnitudes add and
/// the error is `err(x) + err(y) + (mag(x) + mag(y)) u`; for `x y` the
/// magnitude is the product and the error is
/// `mag(x) err(y) + mag(y) err(x) + mag(x) mag(y) u`.
pub fn analyze_nodes(graph: &ExprGraph, mantissa_bits: u32) -> Result<Vec<Option<NodeBounds>>, EngineError> {
    let u = unit_roundoff(mantissa_bits);
    let n = graph.nodes().len();
    let mut out: Vec<Option<NodeBounds>> = vec![None; n];
    let mut on_stack = vec![false; n];
    // Iterative post-order walk so deep graphs cannot overflow the stack.
    let mut stack = vec![(graph.root(), false)];
    while let Some((id, expanded)) = stack.pop() {
        if out[id.0].is_some() {
            continue;
        }
        let node = graph.node(id);
        match (node.children(), expanded) {
            (Some((a, b)), false) => {
                if on_stack[id.0] {
                    return Err(EngineError::Cycle(id.0));
                }
                on_stack[id.0] = true;
                stack.push((id, true));
                for c in [b, a] {
                    if out[c.0].is_none() {
                        if on_stack[c.0] {
                            return Err(EngineError::Cycle(c.0));
                        }
                        stack.push((c, false));
                    }
                }
            }
            _ => {
                on_stack[id.0] = false;
                out[id.0] = Some(bounds_of(node, &out, &u));
            }
        }
    }
    Ok(out)
}

fn bounds_of(node: ExprKind, done: &[Option<NodeBounds>], u: &DyadicBound) -> NodeBounds {
    let get = |id: NodeId| done[id.0].as_ref().expect("children analyzed first");
    match node {
        ExprKind::Input(_) => NodeBounds { mag: DyadicBound::one(), err: u.clone() },
        ExprKind::Add(a, b) | ExprKind::Sub(a, b) => {
            let (x, y) = (get(a), get(b));
            let mag = &x.mag + &y.mag;
            let err = &(&x.err + &y.err) + &(&mag * u);
            NodeBounds { mag, err }
        }
        ExprKind::Mul(a, b) => {
            let (x, y) = (get(a), get(b));
            let mag = &x.mag * &y.mag;
            let err = &(&(&x.mag * &y.err) + &(&y.mag * &x.err)) + &(&mag * u);
            NodeBounds { mag, err }
        }
    }
}

/// One line of the error table: a class of nodes sharing both bounds.
#[derive(Clone, Debug, Serialize)]
pub struct TableRow {
    pub label: String,
    pub description: String,
    pub typical: String,
    #[serde(serialize_with = "ser_dyadic")]
    pub mag: DyadicBound,
    #[serde(serialize_with = "ser_dyadic")]
    pub err: DyadicBound,
    /// Hand-computed reference values, when a reference table exists.
    pub reference: Option<ReferenceRow>,
}

impl TableRow {
    pub fn matches_reference(&self) -> Option<bool> {
        self.reference.as_ref().map(|r| r.mag == self.mag && r.err == self.err)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReferenceRow {
    #[serde(serialize_with = "ser_dyadic")]
    pub mag: DyadicBound,
    #[serde(serialize_with = "ser_dyadic")]
    pub err: DyadicBound,
}

fn ser_dyadic<S: serde::Serializer>(v: &DyadicBound, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Result of analyzing one expression graph.
#[derive(Clone, Debug, Serialize)]
pub struct FilterReport {
    /// Certified bound on the root's absolute error.
    #[serde(serialize_with = "ser_dyadic")]
    pub threshold: DyadicBound,
    #[serde(serialize_with = "ser_dyadic")]
    pub mag_bound: DyadicBound,
    pub threshold_f64: f64,
    pub mantissa_bits: u32,
    pub rows: Vec<TableRow>,
    pub notes: Vec<String>,
}

/// Analyzes `graph` and groups its nodes into table rows.
///
/// Nodes with identical (magnitude, error) pairs form one row, labelled
/// `X1, X2, ...` in order of first construction, which for the built-in
/// graphs is bottom-up.
pub fn analyze(graph: &ExprGraph, mantissa_bits: u32) -> Result<FilterReport, EngineError> {
    let bounds = analyze_nodes(graph, mantissa_bits)?;
    let mut class_of: HashMap<(DyadicBound, DyadicBound), usize> = HashMap::new();
    let mut node_class = vec![usize::MAX; bounds.len()];
    let mut firsts: Vec<usize> = Vec::new();
    for (i, b) in bounds.iter().enumerate() {
        let Some(b) = b else { continue };
        let key = (b.mag.clone(), b.err.clone());
        node_class[i] = *class_of.entry(key).or_insert_with(|| {
            firsts.push(i);
            firsts.len() - 1
        });
    }
    let label = |id: NodeId| format!("X{}", node_class[id.0] + 1);
    let rows = firsts
        .iter()
        .enumerate()
        .map(|(c, &i)| {
            let b = bounds[i].as_ref().expect("classed nodes are analyzed");
            let description = match graph.node(NodeId(i)) {
                ExprKind::Input(_) => "entry".to_string(),
                ExprKind::Add(a, b) => format!("{} + {}", label(a), label(b)),
                ExprKind::Sub(a, b) => format!("{} - {}", label(a), label(b)),
                ExprKind::Mul(a, b) => format!("{} x {}", label(a), label(b)),
            };
            let rendered = graph.render(NodeId(i));
            TableRow {
                label: format!("X{}", c + 1),
                description,
                typical: if rendered.len() <= 40 { rendered } else { String::new() },
                mag: b.mag.clone(),
                err: b.err.clone(),
                reference: None,
            }
        })
        .collect();
    let root = bounds[graph.root().0].clone().expect("root analyzed");
    Ok(FilterReport {
        threshold_f64: root.err.to_f64_up(),
        threshold: root.err,
        mag_bound: root.mag,
        mantissa_bits,
        rows,
        notes: Vec::new(),
    })
}

/// The hand-computed table for the 3D insphere determinant, as
/// (magnitude, error in units of `u`).
pub const INSPHERE_3D_REFERENCE: [(u64, u64); 10] = [
    (1, 1),
    (1, 3),
    (2, 8),
    (2, 10),
    (4, 24),
    (6, 40),
    (3, 14),
    (18, 222),
    (36, 480),
    (72, 1032),
];

/// Reference threshold `129 * 2^-51` (53-bit) or `129 * 2^-22` (24-bit).
pub fn reference_threshold(precision: Precision) -> DyadicBound {
    let units = INSPHERE_3D_REFERENCE[9].1;
    &DyadicBound::from_u64(units) * &unit_roundoff(precision.mantissa_bits())
}

impl FilterReport {
    /// Analyzes the built-in graph for a predicate and, for the 3D insphere
    /// test, attaches the reference table and flags every row that differs.
    pub fn for_predicate(kind: PredicateKind, dim: Dim, precision: Precision) -> FilterReport {
        let graph = ExprGraph::for_predicate(kind, dim);
        let mut report = analyze(&graph, precision.mantissa_bits()).expect("built-in graphs are acyclic");
        if kind == PredicateKind::Insphere && dim.get() == 3 && report.rows.len() == INSPHERE_3D_REFERENCE.len() {
            let u = unit_roundoff(precision.mantissa_bits());
            for (row, &(mag, units)) in report.rows.iter_mut().zip(INSPHERE_3D_REFERENCE.iter()) {
                row.reference = Some(ReferenceRow {
                    mag: DyadicBound::from_u64(mag),
                    err: &DyadicBound::from_u64(units) * &u,
                });
            }
            let differing: Vec<&TableRow> = report.rows.iter().filter(|r| r.matches_reference() == Some(false)).collect();
            if let Some(first) = differing.first() {
                let reference = first.reference.as_ref().expect("attached above");
                report.notes.push(format!(
                    "{}: reference error {} omits mag({}) * err(X1) from the product rule; literal propagation gives {}",
                    first.label,
                    reference.err,
                    "X3",
                    first.err
                ));
                let rest: Vec<&str> = differing[1..].iter().map(|r| r.label.as_str()).collect();
                if !rest.is_empty() {
                    report.notes.push(format!(
                        "{} differ from the reference as a consequence of {}",
                        rest.join(", "),
                        first.label
                    ));
                }
            }
            let reference = reference_threshold(precision);
            report.notes.push(format!(
                "threshold {} = {:.4} x reference {}",
                report.threshold,
                ratio(&report.threshold, &reference),
                reference
            ));
        }
        report
    }

    /// Plain-text table in the layout of a hand-written error analysis.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let w_desc = self.rows.iter().map(|r| r.description.len()).max().unwrap_or(0).max(11);
        let w_typ = self.rows.iter().map(|r| r.typical.len()).max().unwrap_or(0).max(18);
        let w_mag = self.rows.iter().map(|r| r.mag.to_string().len()).max().unwrap_or(0).max(11);
        let w_err = self.rows.iter().map(|r| r.err.to_string().len()).max().unwrap_or(0).max(11);
        let has_ref = self.rows.iter().any(|r| r.reference.is_some());
        out.push_str(&format!(
            "{:<4} | {:<w_desc$} | {:<w_typ$} | {:>w_mag$} | {:<w_err$}",
            "ref", "description", "typical expression", "upper bound", "error bound"
        ));
        if has_ref {
            out.push_str(" | reference");
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{:<4} | {:<w_desc$} | {:<w_typ$} | {:>w_mag$} | {:<w_err$}",
                r.label,
                r.description,
                r.typical,
                r.mag.to_string(),
                r.err.to_string()
            ));
            if let Some(reference) = &r.reference {
                let flag = if r.matches_reference() == Some(true) { "" } else { "  DIFFERS" };
                out.push_str(&format!(" | {}{}", reference.err, flag));
            }
            out.push('\n');
        }
        out.push_str(&format!(
            "mantissa bits: {}\nmagnitude bound: {}\nthreshold: {} ({:e})\n",
            self.mantissa_bits, self.mag_bound, self.threshold, self.threshold_f64
        ));
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }
}

fn ratio(a: &DyadicBound, b: &DyadicBound) -> f64 {
    let e = a.exponent().min(b.exponent());
    let scale = |x: &DyadicBound| -> f64 {
        let m: BigUint = x.mantissa() << (x.exponent() - e) as usize;
        DyadicBound::new(m, 0).to_f64()
    };
    scale(a) / scale(b)
}
