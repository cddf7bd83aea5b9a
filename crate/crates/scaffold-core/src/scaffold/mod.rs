//! Scaffold diagrams: the data model, a line-oriented text format, two
//! independent evaluators, and diagram surgery.
//!
//! A diagram is a finite digraph with matrix-weighted edges (parallel edges
//! and loops allowed), an ordered list of *root* nodes (repeats allowed),
//! and a partial assignment of nodes to vertices. Its value over an
//! [`EvalContext`] is the tensor
//!
//! ```text
//!   Σ_φ  Π_{e=(a,b)} w(e)[φ(a), φ(b)]  ·  ⊗_j  unit(φ(root_j))
//! ```
//!
//! where `φ` ranges over all maps from nodes to the vertex set that extend
//! the fixed assignment. A diagram with no roots evaluates to a scalar; one
//! root gives a vector, two a matrix, and so on. Edge direction selects the
//! (row, column) of the weight, so reversing an edge while transposing its
//! weight never changes the value.

mod eval;
mod ops;

pub use eval::{elimination_order, evaluate, evaluate_both, evaluate_combo, EliminationPlan};
pub use ops::{
    bilinear_pair, glue, hollow, is_fan, jaeger_action, ternary_mesner, terwilliger_star, xi_map,
    Fan, JaegerAction,
};

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{CMatrix, GaussInt, IntMatrix, Tolerance};
use crate::par::Parallelism;
use crate::schemes::AssociationScheme;
use crate::{Error, Result};

/// The matrix a weight reference points at, before decorations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WeightKind {
    /// Scheme basis matrix `A_i`.
    BasisA(usize),
    /// Scheme idempotent `E_j`.
    BasisE(usize),
    /// The identity matrix.
    Identity,
    /// The all-ones matrix.
    AllOnes,
    /// A named matrix resolved from the evaluation context.
    Custom(String),
}

/// An edge weight: a base matrix with optional transpose/conjugate
/// decorations and a complex scalar factor.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightRef {
    pub kind: WeightKind,
    pub transpose: bool,
    pub conjugate: bool,
    pub scalar: Complex64,
}

/// Weights serialize as their text-format token (`"2*A1'"`), so rewrite
/// chains stay readable and replayable.
impl serde::Serialize for WeightRef {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render())
    }
}

impl<'de> serde::Deserialize<'de> for WeightRef {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let token = String::deserialize(deserializer)?;
        parse_weight(&token).map_err(serde::de::Error::custom)
    }
}

impl WeightRef {
    pub fn new(kind: WeightKind) -> Self {
        WeightRef { kind, transpose: false, conjugate: false, scalar: Complex64::ONE }
    }

    pub fn basis_a(i: usize) -> Self {
        Self::new(WeightKind::BasisA(i))
    }

    pub fn basis_e(j: usize) -> Self {
        Self::new(WeightKind::BasisE(j))
    }

    pub fn identity() -> Self {
        Self::new(WeightKind::Identity)
    }

    pub fn all_ones() -> Self {
        Self::new(WeightKind::AllOnes)
    }

    pub fn custom(name: impl Into<String>) -> Self {
        Self::new(WeightKind::Custom(name.into()))
    }

    pub fn scaled(mut self, c: Complex64) -> Self {
        self.scalar *= c;
        self
    }

    /// The weight for the reversed edge: same value read as `wᵀ`.
    pub fn transposed(mut self) -> Self {
        self.transpose = !self.transpose;
        self
    }

    /// The entrywise conjugate weight (scalar included).
    pub fn conjugated(mut self) -> Self {
        self.conjugate = !self.conjugate;
        self.scalar = self.scalar.conj();
        self
    }

    /// Render in the diagram text format.
    pub fn render(&self) -> String {
        let base = match &self.kind {
            WeightKind::BasisA(i) => format!("A{i}"),
            WeightKind::BasisE(j) => format!("E{j}"),
            WeightKind::Identity => "I".into(),
            WeightKind::AllOnes => "J".into(),
            WeightKind::Custom(name) => format!("M:{name}"),
        };
        let mut out = String::new();
        if self.scalar != Complex64::ONE {
            out.push_str(&render_complex(self.scalar));
            out.push('*');
        }
        out.push_str(&base);
        if self.transpose {
            out.push('\'');
        }
        if self.conjugate {
            out.push('~');
        }
        out
    }
}

impl fmt::Display for WeightRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// A weighted directed edge between node indices (loops allowed).
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub weight: WeightRef,
}

/// A scaffold diagram.
///
/// Nodes are identified by free-form string ids; the struct stores them in
/// declaration order and resolves ids on demand. Roots are an ordered list
/// of node indices, possibly with repeats (a repeated root replicates the
/// tensor axis along the diagonal).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagram {
    nodes: Vec<String>,
    edges: Vec<Edge>,
    roots: Vec<usize>,
    fixed: BTreeMap<usize, usize>,
}

impl Diagram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declare a node; ids must be unique.
    pub fn add_node(&mut self, id: impl Into<String>) -> Result<usize> {
        let id = id.into();
        if self.nodes.contains(&id) {
            return Err(Error::DuplicateNode(id));
        }
        self.nodes.push(id);
        Ok(self.nodes.len() - 1)
    }

    /// The index of a declared node.
    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.nodes
            .iter()
            .position(|candidate| candidate == id)
            .ok_or_else(|| Error::UndeclaredNode(id.to_string()))
    }

    pub fn node_id(&self, index: usize) -> &str {
        &self.nodes[index]
    }

    pub fn node_ids(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edges_mut(&mut self) -> &mut [Edge] {
        &mut self.edges
    }

    /// Root node indices in axis order.
    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    /// Number of roots = order of the evaluated tensor.
    pub fn order(&self) -> usize {
        self.roots.len()
    }

    pub fn fixed(&self) -> &BTreeMap<usize, usize> {
        &self.fixed
    }

    pub fn add_edge(&mut self, tail: &str, head: &str, weight: WeightRef) -> Result<()> {
        let tail = self.index_of(tail)?;
        let head = self.index_of(head)?;
        self.edges.push(Edge { tail, head, weight });
        Ok(())
    }

    pub fn add_edge_idx(&mut self, tail: usize, head: usize, weight: WeightRef) {
        debug_assert!(tail < self.nodes.len() && head < self.nodes.len());
        self.edges.push(Edge { tail, head, weight });
    }

    /// Append one root (repeats allowed).
    pub fn push_root(&mut self, id: &str) -> Result<()> {
        let index = self.index_of(id)?;
        self.roots.push(index);
        Ok(())
    }

    pub fn push_root_idx(&mut self, index: usize) {
        debug_assert!(index < self.nodes.len());
        self.roots.push(index);
    }

    /// Replace the whole root list.
    pub fn set_roots(&mut self, ids: &[&str]) -> Result<()> {
        let mut roots = Vec::with_capacity(ids.len());
        for id in ids {
            roots.push(self.index_of(id)?);
        }
        self.roots = roots;
        Ok(())
    }

    pub fn set_roots_idx(&mut self, roots: Vec<usize>) {
        debug_assert!(roots.iter().all(|&r| r < self.nodes.len()));
        self.roots = roots;
    }

    /// Pin a node to a vertex index (checked against `n` at evaluation).
    pub fn fix(&mut self, id: &str, vertex: usize) -> Result<()> {
        let index = self.index_of(id)?;
        self.fixed.insert(index, vertex);
        Ok(())
    }

    pub fn fix_idx(&mut self, index: usize, vertex: usize) {
        debug_assert!(index < self.nodes.len());
        self.fixed.insert(index, vertex);
    }

    pub fn unfix_idx(&mut self, index: usize) {
        self.fixed.remove(&index);
    }

    /// Remove the edge at `index`, returning it.
    pub fn remove_edge(&mut self, index: usize) -> Result<Edge> {
        if index >= self.edges.len() {
            return Err(Error::Range(format!("edge index {index} out of range (diagram has {} edges)", self.edges.len())));
        }
        Ok(self.edges.remove(index))
    }

    /// Remove a node that carries nothing: no incident edges, not a root,
    /// not fixed. Node indices above it shift down by one.
    pub fn remove_isolated_node(&mut self, index: usize) -> Result<()> {
        if index >= self.nodes.len() {
            return Err(Error::Range(format!("node index {index} out of range (diagram has {} nodes)", self.nodes.len())));
        }
        if self.edges.iter().any(|e| e.tail == index || e.head == index) {
            return Err(Error::Range(format!("node `{}` still has incident edges", self.nodes[index])));
        }
        if self.roots.contains(&index) {
            return Err(Error::Range(format!("node `{}` is a root", self.nodes[index])));
        }
        if self.fixed.contains_key(&index) {
            return Err(Error::Range(format!("node `{}` is fixed", self.nodes[index])));
        }
        self.nodes.remove(index);
        for edge in &mut self.edges {
            if edge.tail > index {
                edge.tail -= 1;
            }
            if edge.head > index {
                edge.head -= 1;
            }
        }
        for root in &mut self.roots {
            if *root > index {
                *root -= 1;
            }
        }
        self.fixed = std::mem::take(&mut self.fixed)
            .into_iter()
            .map(|(node, vertex)| (if node > index { node - 1 } else { node }, vertex))
            .collect();
        Ok(())
    }

    /// A fresh node id: `base` with apostrophes appended until unique.
    pub fn fresh_id(&self, base: &str) -> String {
        let mut id = base.to_string();
        while self.nodes.contains(&id) {
            id.push('\'');
        }
        id
    }

    /// Nodes that must be enumerated: not fixed.
    pub fn free_node_count(&self) -> usize {
        self.nodes.len() - self.fixed.len()
    }

    /// Whether the node at `index` occurs among the roots.
    pub fn is_root(&self, index: usize) -> bool {
        self.roots.contains(&index)
    }
}

/// A linear combination of diagrams with a shared root arity.
///
/// Axis `j` of every term corresponds to axis `j` of the combination, so
/// evaluation is simply the coefficient-weighted sum of the term values. An
/// empty combination denotes the zero tensor of the stored order.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagramCombo {
    order: usize,
    terms: Vec<(Complex64, Diagram)>,
}

impl DiagramCombo {
    /// Bundle terms; all must share the given root count.
    pub fn new(order: usize, terms: Vec<(Complex64, Diagram)>) -> Result<Self> {
        for (_, diagram) in &terms {
            if diagram.order() != order {
                return Err(Error::Arity(format!(
                    "combination of order {order} contains a term of order {}",
                    diagram.order()
                )));
            }
        }
        Ok(DiagramCombo { order, terms })
    }

    /// The zero tensor of the given order.
    pub fn zero(order: usize) -> Self {
        DiagramCombo { order, terms: Vec::new() }
    }

    /// A single unscaled diagram.
    pub fn single(diagram: Diagram) -> Self {
        DiagramCombo { order: diagram.order(), terms: vec![(Complex64::ONE, diagram)] }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &[(Complex64, Diagram)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Evaluation method selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Enumerate all assignments of the free nodes.
    Brute,
    /// Contract nodes one at a time along a min-fill elimination order.
    Eliminate,
    /// Brute force when the estimated cost is small, elimination otherwise.
    #[default]
    Auto,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(Method::Brute),
            "eliminate" => Ok(Method::Eliminate),
            "auto" => Ok(Method::Auto),
            other => Err(Error::Range(format!("unknown method `{other}`"))),
        }
    }
}

/// Estimated brute-force multiply-adds above which `Method::Auto` switches
/// to elimination.
pub const AUTO_BRUTE_LIMIT: f64 = 1e9;

/// Default cap on enumerated (non-fixed) nodes for the brute evaluator.
pub const DEFAULT_NODE_CAP: usize = 8;

/// Hard cap on the entry count of any evaluated tensor or intermediate
/// elimination factor.
pub const MAX_TABLE_ENTRIES: usize = 1 << 26;

#[derive(Debug, Clone)]
struct CustomWeight {
    complex: CMatrix,
    exact: Option<IntMatrix>,
}

/// Everything an evaluation needs besides the diagram: the scheme (if
/// any), named custom matrices, tolerance, method, and resource caps.
///
/// Contexts are immutable once built and cheap to clone; evaluation is a
/// pure function of (diagram, context).
#[derive(Debug, Clone)]
pub struct EvalContext {
    scheme: Option<Arc<AssociationScheme>>,
    n: usize,
    customs: BTreeMap<String, CustomWeight>,
    tol: Tolerance,
    method: Method,
    node_cap: usize,
    par: Parallelism,
}

impl EvalContext {
    /// Context over an association scheme.
    pub fn new(scheme: AssociationScheme) -> Self {
        let n = scheme.n();
        EvalContext {
            scheme: Some(Arc::new(scheme)),
            n,
            customs: BTreeMap::new(),
            tol: Tolerance::default(),
            method: Method::Auto,
            node_cap: DEFAULT_NODE_CAP,
            par: Parallelism::default(),
        }
    }

    /// Scheme-free context: only `I`, `J`, and custom weights resolve.
    pub fn for_matrices(n: usize) -> Self {
        EvalContext {
            scheme: None,
            n,
            customs: BTreeMap::new(),
            tol: Tolerance::default(),
            method: Method::Auto,
            node_cap: DEFAULT_NODE_CAP,
            par: Parallelism::default(),
        }
    }

    pub fn with_custom(mut self, name: impl Into<String>, matrix: CMatrix) -> Result<Self> {
        let name = name.into();
        if matrix.size() != self.n {
            return Err(Error::Shape(format!(
                "custom matrix `{name}` is {0}×{0}, context has n = {1}",
                matrix.size(),
                self.n
            )));
        }
        self.customs.insert(name, CustomWeight { complex: matrix, exact: None });
        Ok(self)
    }

    /// Register an integer custom matrix, eligible for exact evaluation.
    pub fn with_custom_exact(mut self, name: impl Into<String>, matrix: IntMatrix) -> Result<Self> {
        let name = name.into();
        if matrix.size() != self.n {
            return Err(Error::Shape(format!(
                "custom matrix `{name}` is {0}×{0}, context has n = {1}",
                matrix.size(),
                self.n
            )));
        }
        let complex = matrix.to_cmatrix();
        self.customs.insert(name, CustomWeight { complex, exact: Some(matrix) });
        Ok(self)
    }

    pub fn with_tol(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_node_cap(mut self, cap: usize) -> Self {
        self.node_cap = cap;
        self
    }

    pub fn with_parallelism(mut self, par: Parallelism) -> Self {
        self.par = par;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scheme(&self) -> Option<&AssociationScheme> {
        self.scheme.as_deref()
    }

    pub fn tol(&self) -> &Tolerance {
        &self.tol
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn node_cap(&self) -> usize {
        self.node_cap
    }

    pub fn parallelism(&self) -> Parallelism {
        self.par
    }

    fn scheme_for(&self, weight: &WeightRef) -> Result<&AssociationScheme> {
        self.scheme.as_deref().ok_or_else(|| {
            Error::UnknownWeight(format!("weight {weight} needs a scheme, context has none"))
        })
    }

    /// Resolve a weight to its dense complex matrix (decorations applied).
    pub fn resolve(&self, weight: &WeightRef) -> Result<CMatrix> {
        let base = match &weight.kind {
            WeightKind::BasisA(i) => {
                let scheme = self.scheme_for(weight)?;
                if *i > scheme.d() {
                    return Err(Error::UnknownWeight(format!(
                        "A{i} out of range: scheme has classes 0..{}",
                        scheme.d()
                    )));
                }
                scheme.relation(*i).to_cmatrix()
            }
            WeightKind::BasisE(j) => {
                let scheme = self.scheme_for(weight)?;
                if *j > scheme.d() {
                    return Err(Error::UnknownWeight(format!(
                        "E{j} out of range: scheme has eigenspaces 0..{}",
                        scheme.d()
                    )));
                }
                scheme.idempotent(*j).clone()
            }
            WeightKind::Identity => CMatrix::identity(self.n),
            WeightKind::AllOnes => CMatrix::ones(self.n),
            WeightKind::Custom(name) => self
                .customs
                .get(name)
                .ok_or_else(|| Error::UnknownWeight(format!("no custom matrix named `{name}`")))?
                .complex
                .clone(),
        };
        let mut out = base;
        if weight.transpose {
            out = out.transpose();
        }
        if weight.conjugate {
            out = out.conj();
        }
        if weight.scalar != Complex64::ONE {
            out = out.scale(weight.scalar);
        }
        Ok(out)
    }

    /// Resolve a weight as a Gaussian-integer matrix if it is exactly
    /// representable (integer base matrix and Gaussian-integer scalar).
    /// Returns a flat row-major table, or `None` when the weight is not
    /// exact. Unknown weights still error.
    pub fn resolve_exact(&self, weight: &WeightRef) -> Result<Option<Vec<GaussInt>>> {
        let Some(scalar) = GaussInt::from_c64(weight.scalar, 1e-12) else {
            return Ok(None);
        };
        let base: Option<IntMatrix> = match &weight.kind {
            WeightKind::BasisA(i) => {
                let scheme = self.scheme_for(weight)?;
                if *i > scheme.d() {
                    return Err(Error::UnknownWeight(format!(
                        "A{i} out of range: scheme has classes 0..{}",
                        scheme.d()
                    )));
                }
                Some(scheme.relation(*i).clone())
            }
            WeightKind::BasisE(j) => {
                let scheme = self.scheme_for(weight)?;
                if *j > scheme.d() {
                    return Err(Error::UnknownWeight(format!(
                        "E{j} out of range: scheme has eigenspaces 0..{}",
                        scheme.d()
                    )));
                }
                None
            }
            WeightKind::Identity => Some(IntMatrix::identity(self.n)),
            WeightKind::AllOnes => Some(IntMatrix::ones(self.n)),
            WeightKind::Custom(name) => {
                let custom = self.customs.get(name).ok_or_else(|| {
                    Error::UnknownWeight(format!("no custom matrix named `{name}`"))
                })?;
                custom.exact.clone()
            }
        };
        let Some(base) = base else { return Ok(None) };
        let base = if weight.transpose { base.transpose() } else { base };
        // Conjugation is trivial on real integer matrices.
        let n = self.n;
        let mut table = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                let entry = GaussInt::new(base.get(x, y).clone(), 0);
                table.push(entry.mul(&scalar));
            }
        }
        Ok(Some(table))
    }
}

// ---------------------------------------------------------------------------
// Text format.
//
//   # comment
//   node <id>
//   root <id> [<id> ...]
//   edge <tail> <head> <weight>
//   fix <id> = <vertex-index>
//
// with weight ::= [<complex>*] (A<k> | E<k> | I | J | M:<name>) ['] [~]
// ---------------------------------------------------------------------------

/// Parse the diagram text format.
pub fn parse_diagram(text: &str) -> Result<Diagram> {
    let mut diagram = Diagram::new();
    let mut pending_roots: Vec<(usize, usize, String)> = Vec::new();
    for (line_idx, raw) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let tokens = tokens_of(line);
        let Some(&(_, keyword)) = tokens.first() else { continue };
        let args = &tokens[1..];
        match keyword {
            "node" => {
                let [(_, id)] = args else {
                    return Err(syntax(line_no, arg_col(&tokens, 1), "node takes exactly one id"));
                };
                diagram.add_node(*id)?;
            }
            "root" => {
                if args.is_empty() {
                    return Err(syntax(line_no, arg_col(&tokens, 1), "root needs at least one id"));
                }
                for (col, id) in args {
                    pending_roots.push((line_no, *col, (*id).to_string()));
                }
            }
            "edge" => {
                let [(_, tail), (_, head), (wcol, wtok)] = args else {
                    return Err(syntax(
                        line_no,
                        arg_col(&tokens, 1),
                        "edge takes tail, head, and a weight",
                    ));
                };
                let weight = parse_weight(wtok)
                    .map_err(|detail| syntax(line_no, *wcol, detail))?;
                diagram.add_edge(tail, head, weight)?;
            }
            "fix" => {
                let [(_, id), (_, "="), (vcol, vtok)] = args else {
                    return Err(syntax(
                        line_no,
                        arg_col(&tokens, 1),
                        "fix takes the form `fix <id> = <vertex-index>`",
                    ));
                };
                let vertex: usize = vtok.parse().map_err(|_| {
                    syntax(line_no, *vcol, format!("vertex index `{vtok}` is not a non-negative integer"))
                })?;
                let index = diagram.index_of(id)?;
                if diagram.fixed().contains_key(&index) {
                    return Err(syntax(line_no, args[0].0, format!("node `{id}` fixed twice")));
                }
                diagram.fix_idx(index, vertex);
            }
            other => {
                return Err(syntax(
                    line_no,
                    tokens[0].0,
                    format!("unknown directive `{other}` (expected node/root/edge/fix)"),
                ));
            }
        }
    }
    // Roots resolve after all declarations so `root` lines may precede the
    // `node` lines they reference.
    for (_, _, id) in &pending_roots {
        diagram.push_root(id)?;
    }
    Ok(diagram)
}

/// Render a diagram in the text format; parses back to an equal diagram.
pub fn unparse_diagram(diagram: &Diagram) -> String {
    let mut out = String::new();
    for id in diagram.node_ids() {
        out.push_str(&format!("node {id}\n"));
    }
    if !diagram.roots().is_empty() {
        out.push_str("root");
        for &r in diagram.roots() {
            out.push(' ');
            out.push_str(diagram.node_id(r));
        }
        out.push('\n');
    }
    for (index, vertex) in diagram.fixed() {
        out.push_str(&format!("fix {} = {vertex}\n", diagram.node_id(*index)));
    }
    for edge in diagram.edges() {
        out.push_str(&format!(
            "edge {} {} {}\n",
            diagram.node_id(edge.tail),
            diagram.node_id(edge.head),
            edge.weight.render()
        ));
    }
    out
}

fn syntax(line: usize, column: usize, detail: impl Into<String>) -> Error {
    Error::Syntax { line, column, detail: detail.into() }
}

/// Column to blame when argument `idx` is missing or malformed.
fn arg_col(tokens: &[(usize, &str)], idx: usize) -> usize {
    tokens.get(idx).map_or_else(|| tokens[0].0 + tokens[0].1.len() + 1, |(col, _)| *col)
}

/// Tokens of a line with their 1-based columns.
fn tokens_of(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (idx, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..idx]));
            }
        } else if start.is_none() {
            start = Some(idx);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

/// Parse a weight token; the error is a detail string for the caller to
/// wrap with position information.
pub fn parse_weight(token: &str) -> std::result::Result<WeightRef, String> {
    let mut rest = token;
    let mut scalar = Complex64::ONE;
    if let Some(star) = rest.rfind('*') {
        let lit = &rest[..star];
        scalar = parse_complex(lit).ok_or_else(|| format!("bad scalar literal `{lit}`"))?;
        rest = &rest[star + 1..];
    }
    let mut transpose = false;
    let mut conjugate = false;
    loop {
        if let Some(stripped) = rest.strip_suffix('\'') {
            if transpose {
                return Err("duplicate transpose suffix `'`".into());
            }
            transpose = true;
            rest = stripped;
        } else if let Some(stripped) = rest.strip_suffix('~') {
            if conjugate {
                return Err("duplicate conjugate suffix `~`".into());
            }
            conjugate = true;
            rest = stripped;
        } else {
            break;
        }
    }
    let kind = if let Some(index) = rest.strip_prefix('A') {
        WeightKind::BasisA(index.parse().map_err(|_| format!("bad basis index in `{rest}`"))?)
    } else if let Some(index) = rest.strip_prefix('E') {
        WeightKind::BasisE(index.parse().map_err(|_| format!("bad basis index in `{rest}`"))?)
    } else if rest == "I" {
        WeightKind::Identity
    } else if rest == "J" {
        WeightKind::AllOnes
    } else if let Some(name) = rest.strip_prefix("M:") {
        if name.is_empty() {
            return Err("custom weight needs a name after `M:`".into());
        }
        WeightKind::Custom(name.to_string())
    } else {
        return Err(format!("unknown weight `{rest}` (expected A<k>, E<k>, I, J, or M:<name>)"));
    };
    let mut weight = WeightRef::new(kind);
    weight.transpose = transpose;
    weight.conjugate = conjugate;
    weight.scalar = scalar;
    Ok(weight)
}

/// Parse `a`, `bi`, or `a±bi` complex literals (`i` alone is `1i`).
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    if let Some(im_part) = s.strip_suffix('i') {
        // Split real and imaginary on the last +/- that is not an exponent
        // sign and not the leading sign.
        let bytes = im_part.as_bytes();
        let mut split = None;
        for pos in (1..im_part.len()).rev() {
            let b = bytes[pos];
            if (b == b'+' || b == b'-') && !matches!(bytes[pos - 1], b'e' | b'E') {
                split = Some(pos);
                break;
            }
        }
        let (re_lit, im_lit) = match split {
            Some(pos) => (&im_part[..pos], &im_part[pos..]),
            None => ("", im_part),
        };
        let im = match im_lit {
            "" | "+" => 1.0,
            "-" => -1.0,
            lit => lit.parse::<f64>().ok()?,
        };
        let re = if re_lit.is_empty() { 0.0 } else { re_lit.parse::<f64>().ok()? };
        return Some(Complex64::new(re, im));
    }
    s.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0))
}

/// Render a complex scalar in the shortest form [`parse_complex`] accepts.
pub fn render_complex(z: Complex64) -> String {
    let fmt_f = |x: f64| {
        let r = crate::report::round_sig(x);
        if r == r.trunc() && r.abs() < 1e15 {
            format!("{}", r as i64)
        } else {
            format!("{r}")
        }
    };
    if z.im == 0.0 {
        fmt_f(z.re)
    } else if z.re == 0.0 {
        format!("{}i", fmt_f(z.im))
    } else if z.im < 0.0 {
        format!("{}-{}i", fmt_f(z.re), fmt_f(-z.im))
    } else {
        format!("{}+{}i", fmt_f(z.re), fmt_f(z.im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_simple_edge_diagram() {
        let d = parse_diagram("node a\nnode b\nroot a b\nedge a b A1\n").unwrap();
        assert_eq!(d.node_count(), 2);
        assert_eq!(d.order(), 2);
        assert_eq!(d.edges().len(), 1);
        assert_eq!(d.edges()[0].weight, WeightRef::basis_a(1));
    }

    #[test]
    fn parse_loop_and_fix_and_comment() {
        let text = "# diagonal extractor\nnode a\nroot a\nedge a a M:m # loop\nfix a = 3\n";
        let d = parse_diagram(text).unwrap();
        assert_eq!(d.edges()[0].tail, d.edges()[0].head);
        assert_eq!(d.fixed().get(&0), Some(&3));
    }

    #[test]
    fn parse_errors_name_the_problem() {
        assert!(matches!(parse_diagram("edge a b A1\n"), Err(Error::UndeclaredNode(id)) if id == "a"));
        assert!(matches!(
            parse_diagram("node a\nnode a\n"),
            Err(Error::DuplicateNode(id)) if id == "a"
        ));
        match parse_diagram("node a\nedge a a Q7\n") {
            Err(Error::Syntax { line, column, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(column, 10);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn weight_decorations_roundtrip() {
        for token in ["A1", "E2'", "I~", "J'~", "M:foo", "2*A1", "0.5-0.25i*E0'", "i*M:bar'~"] {
            let weight = parse_weight(token).unwrap();
            let rendered = weight.render();
            let reparsed = parse_weight(&rendered).unwrap();
            assert_eq!(weight, reparsed, "token `{token}` rendered as `{rendered}`");
        }
        assert_eq!(parse_weight("3i*A0").unwrap().scalar, Complex64::new(0.0, 3.0));
        assert_eq!(parse_weight("-i*A0").unwrap().scalar, Complex64::new(0.0, -1.0));
        assert_eq!(parse_weight("1e-3*A0").unwrap().scalar, Complex64::new(1e-3, 0.0));
        assert_eq!(parse_weight("1.5+2i*A0").unwrap().scalar, Complex64::new(1.5, 2.0));
    }

    #[test]
    fn unparse_roundtrips() {
        let text = "node a\nnode b\nnode c\nroot a b b\nfix c = 2\nedge a b 2*A1\nedge b c E0~\nedge c c I\n";
        let d = parse_diagram(text).unwrap();
        let rendered = unparse_diagram(&d);
        let d2 = parse_diagram(&rendered).unwrap();
        assert_eq!(d, d2);
    }

    #[test]
    fn conjugated_weight_conjugates_scalar() {
        let w = WeightRef::basis_e(1).scaled(Complex64::new(0.0, 2.0));
        let c = w.clone().conjugated();
        assert_eq!(c.scalar, Complex64::new(0.0, -2.0));
        assert!(c.conjugate);
        assert_eq!(c.clone().conjugated(), w);
    }
}
