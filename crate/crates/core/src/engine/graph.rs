use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::dim::{Dim, PredicateKind};

/// Index of a node inside an [`ExprGraph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

/// One operation of a straight-line floating-point program.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExprKind {
    /// A stored input coordinate, by position in the input slice.
    Input(usize),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
}

impl ExprKind {
    pub fn children(&self) -> Option<(NodeId, NodeId)> {
        match *self {
            ExprKind::Input(_) => None,
            ExprKind::Add(a, b) | ExprKind::Sub(a, b) | ExprKind::Mul(a, b) => Some((a, b)),
        }
    }
}

/// An expression DAG with a single root.
///
/// The same graph is both analyzed by [`analyze`](super::analyze) and
/// executed by [`ExprGraph::eval`], so the certified bound always refers to
/// the operation order that actually runs. Identical sub-expressions are
/// shared nodes.
#[derive(Clone, Debug)]
pub struct ExprGraph {
    nodes: Vec<ExprKind>,
    root: NodeId,
    /// The root value is the negation of the root node (negation is exact).
    negated: bool,
    inputs: usize,
    names: Vec<String>,
    topological: bool,
}

/// Scalar types the graph can be executed over.
pub trait Arith: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {}

impl Arith for f64 {}
impl Arith for f32 {}

impl ExprGraph {
    /// Wraps raw nodes. Child references must be in range; cycles are
    /// reported by `analyze`.
    pub fn from_nodes(nodes: Vec<ExprKind>, root: NodeId) -> Option<Self> {
        let n = nodes.len();
        let in_range = |id: NodeId| id.0 < n;
        if !in_range(root) {
            return None;
        }
        let mut inputs = 0;
        let mut topological = true;
        for (i, node) in nodes.iter().enumerate() {
            match node.children() {
                Some((a, b)) => {
                    if !in_range(a) || !in_range(b) {
                        return None;
                    }
                    topological &= a.0 < i && b.0 < i;
                }
                None => {
                    if let ExprKind::Input(k) = node {
                        inputs = inputs.max(k + 1);
                    }
                }
            }
        }
        let names = (0..inputs).map(|k| format!("a{k}")).collect();
        Some(ExprGraph { nodes, root, negated: false, inputs, names, topological })
    }

    /// Determinant of the `dim` points `p_1 .. p_dim`, expanded down the
    /// first column; within each minor the signed terms are summed left to
    /// right.
    pub fn orientation(dim: Dim) -> Self {
        let d = dim.get();
        let mut b = Builder::new(d, d);
        let mut memo = HashMap::new();
        let all = (1usize << d) - 1;
        let root = b.minor(all, &mut memo);
        b.finish(root, false)
    }

    /// The lifted determinant of `dim + 1` points with last column `|p_i|^2`,
    /// expanded along that column. Each term is `|p_i|^2 * M_i` with `M_i`
    /// the orientation minor of the other rows, and the signed terms are
    /// summed pairwise.
    pub fn insphere(dim: Dim) -> Self {
        let d = dim.get();
        let rows = d + 1;
        let mut b = Builder::new(rows, d);
        let mut memo = HashMap::new();
        let all = (1usize << rows) - 1;
        let mut terms = Vec::with_capacity(rows);
        for i in 0..rows {
            let m = b.minor(all & !(1 << i), &mut memo);
            let s = b.squared_norm(i);
            let t = b.push(ExprKind::Mul(s, m));
            // Cofactor sign of entry (i, d) in a (d+1)x(d+1) matrix.
            let negative = (i + d) % 2 == 1;
            terms.push((t, negative));
        }
        let (root, negated) = b.pairwise(&terms);
        b.finish(root, negated)
    }

    pub fn for_predicate(kind: PredicateKind, dim: Dim) -> Self {
        match kind {
            PredicateKind::Orientation => Self::orientation(dim),
            PredicateKind::Insphere => Self::insphere(dim),
        }
    }

    pub fn nodes(&self) -> &[ExprKind] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> ExprKind {
        self.nodes[id.0]
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn is_negated(&self) -> bool {
        self.negated
    }

    pub fn input_count(&self) -> usize {
        self.inputs
    }

    pub fn is_topological(&self) -> bool {
        self.topological
    }

    /// Runs the program over `inputs`. Panics if the graph is not in
    /// topological order or the input slice is too short; graphs from the
    /// built-in constructors always are.
    pub fn eval<T: Arith>(&self, inputs: &[T]) -> T {
        assert!(self.topological, "graph is not topologically ordered");
        assert!(inputs.len() >= self.inputs, "expected {} inputs", self.inputs);
        let mut vals: Vec<T> = Vec::with_capacity(self.root.0 + 1);
        for node in &self.nodes[..=self.root.0] {
            let v = match *node {
                ExprKind::Input(k) => inputs[k],
                ExprKind::Add(a, b) => vals[a.0] + vals[b.0],
                ExprKind::Sub(a, b) => vals[a.0] - vals[b.0],
                ExprKind::Mul(a, b) => vals[a.0] * vals[b.0],
            };
            vals.push(v);
        }
        let r = vals[self.root.0];
        if self.negated {
            -r
        } else {
            r
        }
    }

    /// Infix rendering of a node using coordinate names (`x1`, `y2`, ...).
    pub fn render(&self, id: NodeId) -> String {
        match self.nodes[id.0] {
            ExprKind::Input(k) => self.names.get(k).cloned().unwrap_or_else(|| format!("a{k}")),
            ExprKind::Add(a, b) => format!("{} + {}", self.render(a), self.render(b)),
            ExprKind::Sub(a, b) => format!("{} - {}", self.render(a), self.render_factor(b)),
            ExprKind::Mul(a, b) => {
                if a == b {
                    format!("{}^2", self.render_factor(a))
                } else {
                    format!("{} {}", self.render_factor(a), self.render_factor(b))
                }
            }
        }
    }

    fn render_factor(&self, id: NodeId) -> String {
        match self.nodes[id.0] {
            ExprKind::Add(..) | ExprKind::Sub(..) => format!("({})", self.render(id)),
            _ => self.render(id),
        }
    }
}

struct Builder {
    nodes: Vec<ExprKind>,
    dedup: HashMap<ExprKind, NodeId>,
    dim: usize,
    rows: usize,
}

impl Builder {
    fn new(rows: usize, dim: usize) -> Self {
        let mut b = Builder { nodes: Vec::new(), dedup: HashMap::new(), dim, rows };
        // Inputs are laid out row-major: coordinate j of point i is i * dim + j.
        for k in 0..rows * dim {
            b.push(ExprKind::Input(k));
        }
        b
    }

    fn push(&mut self, kind: ExprKind) -> NodeId {
        if let Some(&id) = self.dedup.get(&kind) {
            return id;
        }
        let id = NodeId(self.nodes.len());
        self.nodes.push(kind);
        self.dedup.insert(kind, id);
        id
    }

    fn entry(&self, row: usize, col: usize) -> NodeId {
        NodeId(row * self.dim + col)
    }

    /// Determinant of the rows in `mask` over the trailing columns, the
    /// column index being implied by how many rows remain.
    fn minor(&mut self, mask: usize, memo: &mut HashMap<usize, NodeId>) -> NodeId {
        if let Some(&id) = memo.get(&mask) {
            return id;
        }
        let col = self.dim - mask.count_ones() as usize;
        let rows: Vec<usize> = (0..self.rows).filter(|r| mask & (1 << r) != 0).collect();
        let id = if rows.len() == 1 {
            self.entry(rows[0], col)
        } else {
            let mut acc: Option<NodeId> = None;
            for (pos, &r) in rows.iter().enumerate() {
                let sub = self.minor(mask & !(1 << r), memo);
                let e = self.entry(r, col);
                let term = self.push(ExprKind::Mul(e, sub));
                acc = Some(match acc {
                    None => term,
                    Some(a) if pos % 2 == 1 => self.push(ExprKind::Sub(a, term)),
                    Some(a) => self.push(ExprKind::Add(a, term)),
                });
            }
            acc.expect("non-empty minor")
        };
        memo.insert(mask, id);
        id
    }

    /// `x^2 + y^2 + ...` for point `row`, left-associated.
    fn squared_norm(&mut self, row: usize) -> NodeId {
        let mut acc: Option<NodeId> = None;
        for col in 0..self.dim {
            let e = self.entry(row, col);
            let sq = self.push(ExprKind::Mul(e, e));
            acc = Some(match acc {
                None => sq,
                Some(a) => self.push(ExprKind::Add(a, sq)),
            });
        }
        acc.expect("dimension is at least one")
    }

    /// Balanced summation of signed terms; returns the node and whether it
    /// holds the negated sum.
    fn pairwise(&mut self, terms: &[(NodeId, bool)]) -> (NodeId, bool) {
        if terms.len() == 1 {
            return terms[0];
        }
        let mid = terms.len() / 2;
        let (a, na) = self.pairwise(&terms[..mid]);
        let (b, nb) = self.pairwise(&terms[mid..]);
        match (na, nb) {
            (false, false) => (self.push(ExprKind::Add(a, b)), false),
            (false, true) => (self.push(ExprKind::Sub(a, b)), false),
            (true, false) => (self.push(ExprKind::Sub(b, a)), false),
            (true, true) => (self.push(ExprKind::Add(a, b)), true),
        }
    }

    fn finish(self, root: NodeId, negated: bool) -> ExprGraph {
        let axes = ["x", "y", "z", "w", "u", "v"];
        let names = (0..self.rows * self.dim)
            .map(|k| {
                let (row, col) = (k / self.dim, k % self.dim);
                if self.dim <= axes.len() {
                    format!("{}{}", axes[col], row + 1)
                } else {
                    format!("x{}_{}", row + 1, col + 1)
                }
            })
            .collect();
        ExprGraph { nodes: self.nodes, root, negated, inputs: self.rows * self.dim, names, topological: true }
    }
}
