//! Value-preserving diagram rewrites.
//!
//! Seventeen rules transform a diagram into an explicit linear combination
//! of diagrams — a [`DiagramCombo`] — with the same tensor value. Each rule
//! checks its own side conditions before touching anything: parameter
//! hypotheses are looked up in the scheme's tables at the hard zero
//! threshold [`PARAM_ZERO`], numeric conditions (constant row sums,
//! commuting weights, expansion coefficients) are verified against the
//! evaluation context's tolerance, and shape conditions (hollow nodes of
//! the right degree and orientation) are checked structurally. A failing
//! side condition is reported as `precondition(rule, detail)`; a locus that
//! does not select the shape the rule acts on is reported as `locus`.
//!
//! Rules return fresh combinations instead of mutating in place, so a
//! sequence of steps can be recorded, serialized to JSON, and replayed.
//! [`verify_step`] confirms value preservation by evaluating both sides;
//! [`check_identity`] compares two combinations and produces a citable
//! report, which in turn serves as the equality certificate demanded by the
//! substitution rules.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{CMatrix, Tensor};
use crate::report::{fmt_sig, CaseRecord, IdentityReport};
use crate::scaffold::{
    bilinear_pair, evaluate, glue, hollow, parse_diagram, render_complex, unparse_diagram,
    Diagram, DiagramCombo, EvalContext, WeightKind, WeightRef,
};
use crate::schemes::{AssociationScheme, PARAM_ZERO};
use crate::{Error, Result};

/// The rule catalog. Unprimed and primed variants are distinct rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    /// Split a node in two, tying the halves with an identity edge; or
    /// contract an identity edge into one of its endpoints.
    #[serde(rename = "SR0")]
    Sr0,
    /// Insert an all-ones edge between two nodes, or delete one.
    #[serde(rename = "SR0'")]
    Sr0Prime,
    /// Suppress a hollow node with one edge in and one out by composing
    /// the two weights.
    #[serde(rename = "SR1")]
    Sr1,
    /// Merge two parallel edges by the entrywise product of their weights.
    #[serde(rename = "SR1'")]
    Sr1Prime,
    /// A triangle of relation weights with vanishing intersection number
    /// kills the whole diagram.
    #[serde(rename = "SR2")]
    Sr2,
    /// A hollow degree-3 node of idempotent weights with vanishing Krein
    /// parameter kills the whole diagram.
    #[serde(rename = "SR2'")]
    Sr2Prime,
    /// Collapse a pinched idempotent star `E_i, E_j in / E_k out` to a
    /// single `E_k` edge scaled by `q_ij^k / n`.
    #[serde(rename = "SR3")]
    Sr3,
    /// Collapse a hollow relation-weight detour beside a direct edge `A_k`
    /// to the direct edge scaled by `p_ij^k`.
    #[serde(rename = "SR3'")]
    Sr3Prime,
    /// Krein isthmus: merge the parallel idempotent edges leaving a hollow
    /// junction, or split the junction along the sole surviving idempotent.
    #[serde(rename = "SR4")]
    Sr4,
    /// Dual isthmus: collapse a hollow relation-weight path running beside
    /// a witness path, or insert the implied chord.
    #[serde(rename = "SR4'")]
    Sr4Prime,
    /// Substitute one certified-equal plug for another inside a glue.
    #[serde(rename = "SR5")]
    Sr5,
    /// Replace an edge weight by a linear expansion of it, one term per
    /// summand.
    #[serde(rename = "SR6")]
    Sr6,
    /// Reverse an edge while transposing its weight.
    #[serde(rename = "SR7")]
    Sr7,
    /// Swap the two weights around a hollow pass-through node when they
    /// commute.
    #[serde(rename = "SR8")]
    Sr8,
    /// Delete a hollow leaf whose edge weight has constant row (or column)
    /// sums, keeping the sum as a scalar factor.
    #[serde(rename = "SR9")]
    Sr9,
    /// Drop root positions, re-rooting the diagram on a subset.
    #[serde(rename = "SR10")]
    Sr10,
    /// Substitute one certified-equal inner factor of a bilinear pairing
    /// for another.
    #[serde(rename = "SR11")]
    Sr11,
}

/// Every rule, in catalog order.
pub const ALL_RULES: [Rule; 17] = [
    Rule::Sr0,
    Rule::Sr0Prime,
    Rule::Sr1,
    Rule::Sr1Prime,
    Rule::Sr2,
    Rule::Sr2Prime,
    Rule::Sr3,
    Rule::Sr3Prime,
    Rule::Sr4,
    Rule::Sr4Prime,
    Rule::Sr5,
    Rule::Sr6,
    Rule::Sr7,
    Rule::Sr8,
    Rule::Sr9,
    Rule::Sr10,
    Rule::Sr11,
];

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Sr0 => "SR0",
            Rule::Sr0Prime => "SR0'",
            Rule::Sr1 => "SR1",
            Rule::Sr1Prime => "SR1'",
            Rule::Sr2 => "SR2",
            Rule::Sr2Prime => "SR2'",
            Rule::Sr3 => "SR3",
            Rule::Sr3Prime => "SR3'",
            Rule::Sr4 => "SR4",
            Rule::Sr4Prime => "SR4'",
            Rule::Sr5 => "SR5",
            Rule::Sr6 => "SR6",
            Rule::Sr7 => "SR7",
            Rule::Sr8 => "SR8",
            Rule::Sr9 => "SR9",
            Rule::Sr10 => "SR10",
            Rule::Sr11 => "SR11",
        }
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.to_ascii_uppercase();
        ALL_RULES
            .into_iter()
            .find(|r| r.name() == upper)
            .ok_or_else(|| Error::Range(format!("unknown rewrite rule `{s}`")))
    }
}

/// Which nodes and edges a step acts on, by index into the diagram.
///
/// The meaning of each position is rule-specific and documented on the
/// [`RewriteStep`] constructors.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Locus {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nodes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<usize>,
}

impl Locus {
    pub fn none() -> Self {
        Locus::default()
    }

    pub fn node(index: usize) -> Self {
        Locus { nodes: vec![index], edges: Vec::new() }
    }

    pub fn edge(index: usize) -> Self {
        Locus { nodes: Vec::new(), edges: vec![index] }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty()
    }
}

/// Rule-specific data beyond the locus.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Params {
    /// The locus alone determines the transformation.
    #[default]
    None,
    /// Splitting a node: the incident edges (by index) that re-attach to
    /// the fresh hollow half.
    Split { moved: Vec<usize> },
    /// Isthmus rules: the index of the sole surviving parameter (`h` for
    /// the idempotent side, the chord relation for the dual side).
    Survivor { index: usize },
    /// Linear expansion of an edge weight: the replacement terms.
    Expansion { terms: Vec<(Complex64, WeightRef)> },
    /// Substitution of one certified-equal subdiagram for another. The
    /// diagrams travel in the text format; `certificate` cites the
    /// [`check_identity`] report that established `original = replacement`.
    Substitution {
        host: String,
        original: String,
        replacement: String,
        pairing: Vec<(usize, usize)>,
        certificate: String,
    },
    /// Root positions kept when demoting the rest.
    Keep { roots: Vec<usize> },
}

impl Params {
    pub fn is_none(&self) -> bool {
        matches!(self, Params::None)
    }
}

/// One rewrite: a rule, where it acts, and its extra data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewriteStep {
    pub rule: Rule,
    #[serde(default, skip_serializing_if = "Locus::is_empty")]
    pub locus: Locus,
    #[serde(default, skip_serializing_if = "Params::is_none")]
    pub params: Params,
}

impl RewriteStep {
    pub fn new(rule: Rule, locus: Locus, params: Params) -> Self {
        RewriteStep { rule, locus, params }
    }

    /// Split node `node`, re-attaching the listed incident edges to the
    /// fresh hollow half, which is tied back by an identity edge.
    pub fn split_node(node: usize, moved: Vec<usize>) -> Self {
        RewriteStep::new(Rule::Sr0, Locus::node(node), Params::Split { moved })
    }

    /// Contract the identity-weight edge at `edge` into its solid endpoint.
    pub fn contract_identity(edge: usize) -> Self {
        RewriteStep::new(Rule::Sr0, Locus::edge(edge), Params::None)
    }

    /// Insert an all-ones edge from node `tail` to node `head`.
    pub fn insert_all_ones(tail: usize, head: usize) -> Self {
        RewriteStep::new(Rule::Sr0Prime, Locus { nodes: vec![tail, head], edges: Vec::new() }, Params::None)
    }

    /// Delete the all-ones edge at `edge`.
    pub fn delete_all_ones(edge: usize) -> Self {
        RewriteStep::new(Rule::Sr0Prime, Locus::edge(edge), Params::None)
    }

    /// Compose the in- and out-weights across the hollow node `node`.
    pub fn series(node: usize) -> Self {
        RewriteStep::new(Rule::Sr1, Locus::node(node), Params::None)
    }

    /// Merge the parallel edges `first` and `second` entrywise.
    pub fn parallel(first: usize, second: usize) -> Self {
        RewriteStep::new(Rule::Sr1Prime, Locus { nodes: Vec::new(), edges: vec![first, second] }, Params::None)
    }

    /// Kill the diagram through the triangle `a→b`, `b→c`, `a→c` (edges in
    /// that order) whose intersection number vanishes.
    pub fn vanish_triangle(ab: usize, bc: usize, ac: usize) -> Self {
        RewriteStep::new(Rule::Sr2, Locus { nodes: Vec::new(), edges: vec![ab, bc, ac] }, Params::None)
    }

    /// Kill the diagram through the hollow degree-3 node `node` whose Krein
    /// parameter vanishes.
    pub fn vanish_star(node: usize) -> Self {
        RewriteStep::new(Rule::Sr2Prime, Locus::node(node), Params::None)
    }

    /// Collapse the pinched idempotent star at hollow node `node`.
    pub fn pinch(node: usize) -> Self {
        RewriteStep::new(Rule::Sr3, Locus::node(node), Params::None)
    }

    /// Collapse the hollow detour at `node` onto the direct edge `direct`.
    pub fn collapse_triangle(node: usize, direct: usize) -> Self {
        RewriteStep::new(Rule::Sr3Prime, Locus { nodes: vec![node], edges: vec![direct] }, Params::None)
    }

    /// Merge the parallel idempotent edges `first`/`second` leaving hollow
    /// junction `node` into a single `E_survivor` edge.
    pub fn merge_isthmus(node: usize, first: usize, second: usize, survivor: usize) -> Self {
        RewriteStep::new(
            Rule::Sr4,
            Locus { nodes: vec![node], edges: vec![first, second] },
            Params::Survivor { index: survivor },
        )
    }

    /// Split hollow junction `node` along the sole surviving idempotent
    /// `E_survivor`, moving its outgoing edges to the fresh half.
    pub fn split_isthmus(node: usize, survivor: usize) -> Self {
        RewriteStep::new(Rule::Sr4, Locus::node(node), Params::Survivor { index: survivor })
    }

    /// Collapse the hollow relation path through `node` (witnessed by the
    /// parallel path `witness_in`, `witness_out`) to an `A_survivor` chord.
    pub fn collapse_dual_isthmus(node: usize, witness_in: usize, witness_out: usize, survivor: usize) -> Self {
        RewriteStep::new(
            Rule::Sr4Prime,
            Locus { nodes: vec![node], edges: vec![witness_in, witness_out] },
            Params::Survivor { index: survivor },
        )
    }

    /// Insert the chord `A_survivor` implied by the two parallel relation
    /// paths `witness_in, witness_out` and `path_in, path_out`.
    pub fn insert_chord(witness_in: usize, witness_out: usize, path_in: usize, path_out: usize, survivor: usize) -> Self {
        RewriteStep::new(
            Rule::Sr4Prime,
            Locus { nodes: Vec::new(), edges: vec![witness_in, witness_out, path_in, path_out] },
            Params::Survivor { index: survivor },
        )
    }

    /// Replace the plug `original` of `glue(host, original, pairing)` by
    /// the certified-equal `replacement`. Diagrams travel as text.
    pub fn substitute(
        host: &Diagram,
        original: &Diagram,
        replacement: &Diagram,
        pairing: Vec<(usize, usize)>,
        certificate: impl Into<String>,
    ) -> Self {
        RewriteStep::new(
            Rule::Sr5,
            Locus::none(),
            Params::Substitution {
                host: unparse_diagram(host),
                original: unparse_diagram(original),
                replacement: unparse_diagram(replacement),
                pairing,
                certificate: certificate.into(),
            },
        )
    }

    /// Expand the weight of `edge` into the given linear combination.
    pub fn expand(edge: usize, terms: Vec<(Complex64, WeightRef)>) -> Self {
        RewriteStep::new(Rule::Sr6, Locus::edge(edge), Params::Expansion { terms })
    }

    /// Reverse `edge`, transposing its weight.
    pub fn transpose_edge(edge: usize) -> Self {
        RewriteStep::new(Rule::Sr7, Locus::edge(edge), Params::None)
    }

    /// Swap the commuting weights around the hollow pass-through `node`.
    pub fn swap_commuting(node: usize) -> Self {
        RewriteStep::new(Rule::Sr8, Locus::node(node), Params::None)
    }

    /// Delete the hollow leaf `node`, keeping the constant edge sum as a
    /// scalar factor.
    pub fn prune_leaf(node: usize) -> Self {
        RewriteStep::new(Rule::Sr9, Locus::node(node), Params::None)
    }

    /// Keep only the root positions in `roots` (in the given order),
    /// demoting the other roots to hollow nodes.
    pub fn restrict_roots(roots: Vec<usize>) -> Self {
        RewriteStep::new(Rule::Sr10, Locus::none(), Params::Keep { roots })
    }

    /// Replace the inner factor of `bilinear_pair(outer, original, r)` by
    /// the certified-equal `replacement`, pairing the first `r` roots.
    pub fn pair_substitute(
        outer: &Diagram,
        original: &Diagram,
        replacement: &Diagram,
        r: usize,
        certificate: impl Into<String>,
    ) -> Self {
        RewriteStep::new(
            Rule::Sr11,
            Locus::none(),
            Params::Substitution {
                host: unparse_diagram(outer),
                original: unparse_diagram(original),
                replacement: unparse_diagram(replacement),
                pairing: (0..r).map(|i| (i, i)).collect(),
                certificate: certificate.into(),
            },
        )
    }
}

/// One replayable entry of a recorded rewrite chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub rule: Rule,
    #[serde(default, skip_serializing_if = "Locus::is_empty")]
    pub locus: Locus,
    #[serde(default, skip_serializing_if = "Params::is_none")]
    pub params: Params,
    /// Max-norm evaluation gap measured when the step was applied.
    pub residual: f64,
}

impl ChainRecord {
    pub fn step(&self) -> RewriteStep {
        RewriteStep::new(self.rule, self.locus.clone(), self.params.clone())
    }
}

/// Serialize a recorded chain to JSON.
pub fn chain_to_json(records: &[ChainRecord]) -> Result<String> {
    Ok(serde_json::to_string_pretty(records)?)
}

/// Parse a recorded chain back into replayable steps.
pub fn chain_from_json(text: &str) -> Result<Vec<RewriteStep>> {
    let records: Vec<ChainRecord> = serde_json::from_str(text)?;
    Ok(records.iter().map(ChainRecord::step).collect())
}

// ---------------------------------------------------------------------------
// Weight normal forms
// ---------------------------------------------------------------------------

/// A weight with transpose/conjugation folded into the basis index and the
/// scalar factored out. `Other` covers custom weights and out-of-range
/// indices, which the symbolic rules refuse.
enum Basis {
    A(usize),
    E(usize),
    Identity,
    AllOnes,
    Other,
}

fn normal_form(weight: &WeightRef, scheme: &AssociationScheme) -> (Basis, Complex64) {
    let scalar = weight.scalar;
    let basis = match &weight.kind {
        WeightKind::BasisA(i) if *i <= scheme.d() => {
            // Relation matrices are real, so conjugation leaves them alone
            // and only the transpose moves the index.
            let index = if weight.transpose { scheme.conj_a(*i) } else { *i };
            Basis::A(index)
        }
        WeightKind::BasisE(j) if *j <= scheme.d() => {
            // Idempotents are Hermitian: transpose and entrywise
            // conjugation both land on the paired idempotent.
            let mut index = *j;
            if weight.transpose {
                index = scheme.conj_e(index);
            }
            if weight.conjugate {
                index = scheme.conj_e(index);
            }
            Basis::E(index)
        }
        WeightKind::Identity => Basis::Identity,
        WeightKind::AllOnes => Basis::AllOnes,
        _ => Basis::Other,
    };
    (basis, scalar)
}

fn precondition(rule: Rule, detail: impl Into<String>) -> Error {
    Error::Precondition { rule: rule.name(), detail: detail.into() }
}

fn scheme_of<'c>(ctx: &'c EvalContext, rule: Rule) -> Result<&'c AssociationScheme> {
    ctx.scheme().ok_or_else(|| precondition(rule, "evaluation context carries no scheme"))
}

fn check_edge_index(diag: &Diagram, index: usize) -> Result<()> {
    if index >= diag.edges().len() {
        return Err(Error::Locus(format!("edge index {index} out of range (diagram has {} edges)", diag.edges().len())));
    }
    Ok(())
}

fn check_node_index(diag: &Diagram, index: usize) -> Result<()> {
    if index >= diag.node_count() {
        return Err(Error::Locus(format!("node index {index} out of range (diagram has {} nodes)", diag.node_count())));
    }
    Ok(())
}

/// The incident edges of a hollow (non-root, non-fixed, loop-free) node,
/// split into incoming and outgoing.
fn hollow_in_out(diag: &Diagram, node: usize, rule: Rule) -> Result<(Vec<usize>, Vec<usize>)> {
    check_node_index(diag, node)?;
    let id = diag.node_id(node);
    if diag.is_root(node) {
        return Err(precondition(rule, format!("node `{id}` is a root")));
    }
    if diag.fixed().contains_key(&node) {
        return Err(precondition(rule, format!("node `{id}` is fixed to a vertex")));
    }
    let mut ins = Vec::new();
    let mut outs = Vec::new();
    for (i, edge) in diag.edges().iter().enumerate() {
        if edge.tail == node && edge.head == node {
            return Err(precondition(rule, format!("node `{id}` carries a loop")));
        }
        if edge.head == node {
            ins.push(i);
        } else if edge.tail == node {
            outs.push(i);
        }
    }
    Ok((ins, outs))
}

/// Remove the listed edges (descending index order) and then the node,
/// which must have become isolated.
fn excise(diag: &Diagram, node: usize, edges: &[usize]) -> Result<Diagram> {
    let mut out = diag.clone();
    let mut order: Vec<usize> = edges.to_vec();
    order.sort_unstable();
    for &e in order.iter().rev() {
        out.remove_edge(e)?;
    }
    out.remove_isolated_node(node)?;
    Ok(out)
}

fn shift_past(index: usize, removed: usize) -> usize {
    if index > removed { index - 1 } else { index }
}

fn max_abs(mat: &CMatrix) -> f64 {
    let n = mat.size();
    let mut worst = 0.0f64;
    for x in 0..n {
        for y in 0..n {
            worst = worst.max(mat.get(x, y).norm());
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// Rule application
// ---------------------------------------------------------------------------

/// Apply one rewrite step, checking its side conditions, and return the
/// equal-valued combination.
///
/// This is the scheme-weight entry point; weights must resolve from the
/// scheme alone. Use [`apply_rule_in`] when the diagram mentions custom
/// weights registered in an [`EvalContext`].
pub fn apply_rule(diag: &Diagram, step: &RewriteStep, scheme: &AssociationScheme) -> Result<DiagramCombo> {
    apply_rule_in(diag, step, &EvalContext::new(scheme.clone()))
}

/// Apply one rewrite step with weights resolved through `ctx`.
pub fn apply_rule_in(diag: &Diagram, step: &RewriteStep, ctx: &EvalContext) -> Result<DiagramCombo> {
    match step.rule {
        Rule::Sr0 => split_or_contract(diag, step),
        Rule::Sr0Prime => all_ones_edge(diag, step, ctx),
        Rule::Sr1 => series(diag, step, ctx),
        Rule::Sr1Prime => parallel(diag, step, ctx),
        Rule::Sr2 => vanish_triangle(diag, step, ctx),
        Rule::Sr2Prime => vanish_star(diag, step, ctx),
        Rule::Sr3 => pinch(diag, step, ctx),
        Rule::Sr3Prime => collapse_triangle(diag, step, ctx),
        Rule::Sr4 => isthmus(diag, step, ctx),
        Rule::Sr4Prime => dual_isthmus(diag, step, ctx),
        Rule::Sr5 => substitute(diag, step),
        Rule::Sr6 => expand(diag, step, ctx),
        Rule::Sr7 => transpose_edge(diag, step),
        Rule::Sr8 => swap_commuting(diag, step, ctx),
        Rule::Sr9 => prune_leaf(diag, step, ctx),
        Rule::Sr10 => restrict_roots(diag, step),
        Rule::Sr11 => pair_substitute(diag, step),
    }
}

/// Evaluate both sides of a step and return the max-norm gap.
///
/// For the root-dropping rule the reference is the input's value summed
/// over the dropped axes, since that is what re-rooting computes; every
/// other rule preserves the value as-is.
pub fn verify_step(diag: &Diagram, step: &RewriteStep, scheme: &AssociationScheme, ctx: &EvalContext) -> Result<f64> {
    let combo = if ctx.scheme().is_some() {
        apply_rule_in(diag, step, ctx)?
    } else {
        apply_rule(diag, step, scheme)?
    };
    let after = crate::scaffold::evaluate_combo(&combo, ctx)?;
    let before = evaluate(diag, ctx)?;
    let reference = if step.rule == Rule::Sr10 {
        let Params::Keep { roots } = &step.params else {
            return Err(Error::Locus("root restriction requires kept root positions".into()));
        };
        let dropped: Vec<usize> = (0..diag.order()).filter(|i| !roots.contains(i)).collect();
        before.sum_axes(&dropped)?
    } else {
        before
    };
    reference.max_diff(&after)
}

/// Compare two combinations of equal arity and report the outcome.
///
/// The report lists each side's terms (coefficient and max-norm) and one
/// comparison case; its [`identity_certificate`] names it for use as an
/// equality certificate in substitution steps.
pub fn check_identity(lhs: &DiagramCombo, rhs: &DiagramCombo, ctx: &EvalContext) -> Result<IdentityReport> {
    if lhs.order() != rhs.order() {
        return Err(Error::Arity(format!(
            "left side has order {}, right side has order {}",
            lhs.order(),
            rhs.order()
        )));
    }
    let mut sides: [Tensor; 2] = [
        Tensor::zeros(ctx.n(), lhs.order()),
        Tensor::zeros(ctx.n(), rhs.order()),
    ];
    let mut term_cases = Vec::new();
    for (side, (name, combo)) in [("lhs", lhs), ("rhs", rhs)].into_iter().enumerate() {
        for (idx, (coeff, diagram)) in combo.terms().iter().enumerate() {
            let value = evaluate(diagram, ctx)?;
            term_cases.push((
                format!("{name}[{idx}]"),
                format!("coefficient {} · max-norm {}", render_complex(*coeff), fmt_sig(value.max_abs())),
            ));
            sides[side] = sides[side].add(&value.scale(*coeff))?;
        }
    }
    let [left, right] = sides;
    let scale = left.max_abs().max(right.max_abs());
    let tolerance = ctx.tol().bound(scale);
    let residual = left.max_diff(&right)?;
    let mut cases = vec![CaseRecord::new(
        "sides",
        "left equals right",
        format!("max-norm gap {}", fmt_sig(residual)),
        residual,
        tolerance,
    )];
    for (id, computed) in term_cases {
        cases.push(CaseRecord::new(id, "term value", computed, 0.0, tolerance));
    }
    Ok(IdentityReport::new(
        "check-identity",
        format!("n={}", ctx.n()),
        true,
        tolerance,
        cases,
    ))
}

/// A stable name for a report, suitable as a substitution certificate.
pub fn identity_certificate(report: &IdentityReport) -> String {
    format!(
        "{}[{}]cases={},max_residual={:e},pass={}",
        report.suite,
        report.scheme,
        report.cases.len(),
        report.max_residual,
        report.pass
    )
}

/// Replay a chain of steps on a diagram, verifying each one.
///
/// Chains thread a single running diagram, so every intermediate
/// combination must have at most one term; scalar coefficients accumulate.
/// A step that returns the empty combination ends the chain early only if
/// it is the last step. Returns the final combination and one record per
/// step, ready for [`chain_to_json`].
pub fn run_chain(diag: &Diagram, steps: &[RewriteStep], ctx: &EvalContext) -> Result<(DiagramCombo, Vec<ChainRecord>)> {
    let mut current = diag.clone();
    let mut coefficient = Complex64::ONE;
    let mut records = Vec::with_capacity(steps.len());
    for (position, step) in steps.iter().enumerate() {
        let combo = apply_rule_in(&current, step, ctx)?;
        let after = crate::scaffold::evaluate_combo(&combo, ctx)?;
        let before = evaluate(&current, ctx)?;
        let reference = if step.rule == Rule::Sr10 {
            let Params::Keep { roots } = &step.params else {
                return Err(Error::Locus("root restriction requires kept root positions".into()));
            };
            let dropped: Vec<usize> = (0..current.order()).filter(|i| !roots.contains(i)).collect();
            before.sum_axes(&dropped)?
        } else {
            before
        };
        let residual = reference.max_diff(&after)?;
        records.push(ChainRecord {
            rule: step.rule,
            locus: step.locus.clone(),
            params: step.params.clone(),
            residual,
        });
        match combo.terms() {
            [] => {
                if position + 1 != steps.len() {
                    return Err(Error::Locus(format!(
                        "step {} produced the zero combination with {} steps left",
                        position + 1,
                        steps.len() - position - 1
                    )));
                }
                return Ok((DiagramCombo::zero(combo.order()), records));
            }
            [(c, d)] => {
                coefficient *= c;
                current = d.clone();
            }
            terms => {
                return Err(Error::Locus(format!(
                    "step {} produced {} terms; chains replay on single-term results",
                    position + 1,
                    terms.len()
                )));
            }
        }
    }
    let order = current.order();
    Ok((DiagramCombo::new(order, vec![(coefficient, current)])?, records))
}

/// Expansion of the all-ones weight over the relation basis.
pub fn ones_expansion(scheme: &AssociationScheme) -> Vec<(Complex64, WeightRef)> {
    (0..=scheme.d()).map(|i| (Complex64::ONE, WeightRef::basis_a(i))).collect()
}

/// Expansion of the identity weight over the idempotent basis.
pub fn identity_expansion(scheme: &AssociationScheme) -> Vec<(Complex64, WeightRef)> {
    (0..=scheme.d()).map(|j| (Complex64::ONE, WeightRef::basis_e(j))).collect()
}

// ---------------------------------------------------------------------------
// Individual rules
// ---------------------------------------------------------------------------

/// Split a node (locus node + moved edges) or contract an identity edge
/// (locus edge).
fn split_or_contract(diag: &Diagram, step: &RewriteStep) -> Result<DiagramCombo> {
    if let Params::Split { moved } = &step.params {
        let &[node] = step.locus.nodes.as_slice() else {
            return Err(Error::Locus("splitting acts on exactly one node".into()));
        };
        check_node_index(diag, node)?;
        let mut seen = std::collections::BTreeSet::new();
        for &e in moved {
            check_edge_index(diag, e)?;
            let edge = &diag.edges()[e];
            if edge.tail != node && edge.head != node {
                return Err(Error::Locus(format!("edge {e} is not incident to node `{}`", diag.node_id(node))));
            }
            if !seen.insert(e) {
                return Err(Error::Locus(format!("edge {e} listed twice")));
            }
        }
        let mut out = diag.clone();
        let half = out.add_node(out.fresh_id(diag.node_id(node)))?;
        for &e in moved {
            let edge = &mut out.edges_mut()[e];
            if edge.tail == node {
                edge.tail = half;
            }
            if edge.head == node {
                edge.head = half;
            }
        }
        out.add_edge_idx(half, node, WeightRef::identity());
        return Ok(DiagramCombo::single(out));
    }
    let &[edge_index] = step.locus.edges.as_slice() else {
        return Err(Error::Locus("contraction acts on exactly one edge".into()));
    };
    check_edge_index(diag, edge_index)?;
    let edge = &diag.edges()[edge_index];
    if edge.weight.kind != WeightKind::Identity {
        return Err(precondition(Rule::Sr0, format!("edge {edge_index} has weight {}, not the identity", edge.weight)));
    }
    let coefficient = edge.weight.scalar;
    let (tail, head) = (edge.tail, edge.head);
    let mut out = diag.clone();
    out.remove_edge(edge_index)?;
    if tail == head {
        // A diagonal identity factor is identically 1.
        return Ok(DiagramCombo::new(diag.order(), vec![(coefficient, out)])?);
    }
    let hollow_end = [head, tail]
        .into_iter()
        .find(|&v| !diag.is_root(v) && !diag.fixed().contains_key(&v))
        .ok_or_else(|| precondition(Rule::Sr0, "contracting an identity edge requires a hollow endpoint"))?;
    let keep = if hollow_end == head { tail } else { head };
    for e in out.edges_mut() {
        if e.tail == hollow_end {
            e.tail = keep;
        }
        if e.head == hollow_end {
            e.head = keep;
        }
    }
    out.remove_isolated_node(hollow_end)?;
    Ok(DiagramCombo::new(diag.order(), vec![(coefficient, out)])?)
}

/// Insert an all-ones edge (locus: tail and head nodes) or delete one
/// (locus: the edge).
fn all_ones_edge(diag: &Diagram, step: &RewriteStep, ctx: &EvalContext) -> Result<DiagramCombo> {
    if let &[edge_index] = step.locus.edges.as_slice() {
        check_edge_index(diag, edge_index)?;
        let weight = &diag.edges()[edge_index].weight;
        let coefficient = if weight.kind == WeightKind::AllOnes {
            weight.scalar
        } else {
            let resolved = ctx.resolve(weight)?;
            let gap = resolved.max_diff(&CMatrix::ones(ctx.n()))?;
            if gap > ctx.tol().bound(1.0) {
                return Err(precondition(
                    Rule::Sr0Prime,
                    format!("edge {edge_index} weight differs from the all-ones matrix by {gap:.3e}"),
                ));
            }
            Complex64::ONE
        };
        let mut out = diag.clone();
        out.remove_edge(edge_index)?;
        return Ok(DiagramCombo::new(diag.order(), vec![(coefficient, out)])?);
    }
    let &[tail, head] = step.locus.nodes.as_slice() else {
        return Err(Error::Locus("insertion names a tail node and a head node; deletion names one edge".into()));
    };
    check_node_index(diag, tail)?;
    check_node_index(diag, head)?;
    let mut out = diag.clone();
    out.add_edge_idx(tail, head, WeightRef::all_ones());
    Ok(DiagramCombo::single(out))
}

/// Compose the weights across a hollow in-1/out-1 node and expand the
/// product over a scheme basis.
fn series(diag: &Diagram, step: &RewriteStep, ctx: &EvalContext) -> Result<DiagramCombo> {
    let &[node] = step.locus.nodes.as_slice() else {
        return Err(Error::Locus("series composition acts on exactly one node".into()));
    };
    let (ins, outs) = hollow_in_out(diag, node, Rule::Sr1)?;
    let (&[in_edge], &[out_edge]) = (ins.as_slice(), outs.as_slice()) else {
        return Err(precondition(
            Rule::Sr1,
            format!(
                "node `{}` must have exactly one incoming and one outgoing edge (found {} in, {} out)",
                diag.node_id(node),
                ins.len(),
                outs.len()
            ),
        ));
    };
    let first = diag.edges()[in_edge].weight.clone();
    let second = diag.edges()[out_edge].weight.clone();
    let tail = shift_past(diag.edges()[in_edge].tail, node);
    let head = shift_past(diag.edges()[out_edge].head, node);
    let base = excise(diag, node, &[in_edge, out_edge])?;
    let order = diag.order();

    let with_edge = |weight: WeightRef| {
        let mut d = base.clone();
        d.add_edge_idx(tail, head, weight);
        d
    };

    // Identity on either side composes symbolically, scheme or not.
    if first.kind == WeightKind::Identity && !first.transpose && !first.conjugate {
        return Ok(DiagramCombo::single(with_edge(second.scaled(first.scalar))));
    }
    if second.kind == WeightKind::Identity && !second.transpose && !second.conjugate {
        return Ok(DiagramCombo::single(with_edge(first.scaled(second.scalar))));
    }

    let scheme = scheme_of(ctx, Rule::Sr1)?;
    match (normal_form(&first, scheme), normal_form(&second, scheme)) {
        // A_i A_j = Σ_k p_ij^k A_k, exactly.
        ((Basis::A(i), c1), (Basis::A(j), c2)) => {
            let mut terms = Vec::new();
            for k in 0..=scheme.d() {
                let p = scheme.p_u64(i, j, k);
                if p != 0 {
                    terms.push((c1 * c2 * p as f64, with_edge(WeightRef::basis_a(k))));
                }
            }
            Ok(DiagramCombo::new(order, terms)?)
        }
        // E_i E_j = δ_ij E_i.
        ((Basis::E(i), c1), (Basis::E(j), c2)) => {
            if i == j {
                Ok(DiagramCombo::new(order, vec![(c1 * c2, with_edge(WeightRef::basis_e(i)))])?)
            } else {
                Ok(DiagramCombo::zero(order))
            }
        }
        // Anything else: compute the product and expand it over the
        // idempotents, refusing weights whose product leaves the algebra.
        _ => {
            let product = ctx.resolve(&first)?.product(&ctx.resolve(&second)?)?;
            let (coeff, gap) = scheme.expand_in_e_basis(&product)?;
            if gap > ctx.tol().bound(max_abs(&product)) {
                return Err(precondition(
                    Rule::Sr1,
                    format!("product of the edge weights leaves the Bose–Mesner algebra (residual {gap:.3e})"),
                ));
            }
            let cutoff = 1e-12 * coeff.iter().map(|c| c.norm()).fold(1.0, f64::max);
            let terms: Vec<_> = coeff
                .into_iter()
                .enumerate()
                .filter(|(_, c)| c.norm() > cutoff)
                .map(|(j, c)| (c, with_edge(WeightRef::basis_e(j))))
                .collect();
            Ok(DiagramCombo::new(order, terms)?)
        }
    }
}

/// Merge two parallel edges by the entrywise product of their weights.
fn parallel(diag: &Diagram, step: &RewriteStep, ctx: &EvalContext) -> Result<DiagramCombo> {
    let &[first_index, second_index] = step.locus.edges.as_slice() else {
        return Err(Error::Locus("parallel merge acts on exactly two edges".into()));
    };
    check_edge_index(diag, first_index)?;
    check_edge_index(diag, second_index)?;
    if first_index == second_index {
        return Err(Error::Locus("parallel merge needs two distinct edges".into()));
    }
    let first = &diag.edges()[first_index];
    let second = &diag.edges()[second_index];
    if first.tail != second.tail || first.head != second.head {
        return Err(Error::Locus(format!(
            "edges {first_index} and {second_index} do not share tail and head"
        )));
    }
    let (tail, head) = (first.tail, first.head);
    let (w1, w2) = (first.weight.clone(), second.weight.clone());
    let mut base = diag.clone();
    base.remove_edge(first_index.max(second_index))?;
    base.remove_edge(first_index.min(second_index))?;
    let order = diag.order();

    let with_edge = |weight: WeightRef| {
        let mut d = base.clone();
        d.add_edge_idx(tail, head, weight);
        d
    };

    let scheme = scheme_of(ctx, Rule::Sr1Prime)?;
    let n = scheme.n() as f64;
    let ((b1, c1), (b2, c2)) = (normal_form(&w1, scheme), normal_form(&w2, scheme));
    match (b1, b2) {
        // J is the unit of the entrywise product.
        (Basis::AllOnes, _) => Ok(DiagramCombo::new(order, vec![(c1, with_edge(w2))])?),
        (_, Basis::AllOnes) => Ok(DiagramCombo::new(order, vec![(c2, with_edge(w1))])?),
        // I ∘ M keeps the diagonal of M.
        (Basis::Identity, Basis::Identity) => {
            Ok(DiagramCombo::new(order, vec![(c1 * c2, with_edge(WeightRef::identity()))])?)
        }
        (Basis::Identity, Basis::A(i)) | (Basis::A(i), Basis::Identity) => {
            if i == 0 {
                Ok(DiagramCombo::new(order, vec![(c1 * c2, with_edge(WeightRef::identity()))])?)
            } else {
                Ok(DiagramCombo::zero(order))
            }
        }
        (Basis::Identity, Basis::E(j)) | (Basis::E(j), Basis::Identity) => {
            let diagonal = scheme.multiplicity(j) as f64 / n;
            Ok(DiagramCombo::new(order, vec![(c1 * c2 * diagonal, with_edge(WeightRef::identity()))])?)
        }
        // A_i ∘ A_j = δ_ij A_i.
        (Basis::A(i), Basis::A(j)) => {
            if i == j {
                Ok(DiagramCombo::new(order, vec![(c1 * c2, with_edge(WeightRef::basis_a(i)))])?)
            } else {
                Ok(DiagramCombo::zero(order))
            }
        }
        // E_i ∘ E_j = (1/n) Σ_k q_ij^k E_k.
        (Basis::E(i), Basis::E(j)) => {
            let q_scale = (0..=scheme.d()).map(|k| scheme.q(i, j, k).norm()).fold(1.0, f64::max);
            let mut terms = Vec::new();
            for k in 0..=scheme.d() {
                let q = scheme.q(i, j, k);
                if q.norm() > 1e-12 * q_scale {
                    terms.push((c1 * c2 * q / n, with_edge(WeightRef::basis_e(k))));
                }
            }
            Ok(DiagramCombo::new(order, terms)?)
        }
        // Mixed and custom weights: compute the entrywise product and read
        // its relation-class coefficients.
        _ => {
            let product = ctx.resolve(&w1)?.hadamard(&ctx.resolve(&w2)?)?;
            let (coeff, gap) = scheme.expand_in_a_basis(&product)?;
            if gap > ctx.tol().bound(max_abs(&product)) {
                return Err(precondition(
                    Rule::Sr1Prime,
                    format!("entrywise product leaves the Bose–Mesner algebra (residual {gap:.3e})"),
                ));
            }
            let cutoff = 1e-12 * coeff.iter().map(|c| c.norm()).fold(1.0, f64::max);
            let terms: Vec<_> = coeff
                .into_iter()
                .enumerate()
                .filter(|(_, c)| c.norm() > cutoff)
                .map(|(i, c)| (c, with_edge(WeightRef::basis_a(i))))
                .collect();
            Ok(DiagramCombo::new(order, terms)?)
        }
    }
}

/// A relation triangle with vanishing intersection number kills every
/// assignment, hence the diagram.
fn vanish_triangle(diag: &Diagram, step: &RewriteStep, ctx: &EvalContext) -> Result<DiagramCombo> {
    let &[ab, bc, ac] = step.locus.edges.as_slice() else {
        return Err(Error::Locus("the triangle rule names three edges a→b, b→c, a→c".into()));
    };
    for e in [ab, bc, ac] {
        check_edge_index(diag, e)?;
    }
    let (eab, ebc, eac) = (&diag.edges()[ab], &diag.edges()[bc], &diag.edges()[ac]);
    if eab.head != ebc.tail || eab.tail != eac.tail || ebc.head != eac.head {
        return Err(Error::Locus("edges do not close into a directed triangle a→b, b→c, a→c".into()));
    }
    let scheme = scheme_of(ctx, Rule::Sr2)?;
    let mut indices = [0usize; 3];
    for (slot, edge) in [eab, ebc, eac].into_iter().enumerate() {
        match normal_form(&edge.weight, scheme) {
            (Basis::A(i), _) => indices[slot] = i,
            _ => {
                return Err(precondition(
                    Rule::Sr2,
                    format!("triangle weights must be relation matrices (found {})", edge.weight),
                ))
            }
        }
    }
    let [i, j, k] = indices;
    let p = scheme.p_u64(i, j, k);
    if (p as f64) >= PARAM_ZERO {
        return Err(precondition(
            Rule::Sr2,
            format!("intersection number p_{i}{j}^{k} = {p} is nonzero"),
        ));
    }
    Ok(DiagramCombo::zero(diag.order()))
}

/// A hollow degree-3 idempotent junction with vanishing Krein parameter
/// kills the diagram.
fn vanish_star(diag: &Diagram, step: &RewriteStep, ctx: &EvalContext) -> Result<DiagramCombo> {
    let &[node] = step.locus.nodes.as_slice() else {
        return Err(Error::Locus("the star rule acts on exactly one node".into()));
    };
    let scheme = scheme_of(ctx, Rule::Sr2Prime)?;
    let (_, _, i, j, k) = star_shape(diag, node, Rule::Sr2Prime, scheme, false)?;
    let q = scheme.q(i, j, k);
    if q.norm() >= PARAM_ZERO {
        return Err(precondition(
            Rule::Sr2Prime,
            format!("Krein parameter q_{i}{j}^{k} = {} is nonzero", render_complex(q)),
        ));
    }
    Ok(DiagramCombo::zero(diag.order()))
}

/// Shape check shared by the vanishing star and the pinched star: a hollow
/// node with two incoming idempotent edges and one outgoing. Returns the
/// in-edge indices and the normalized weight indices `(i, j, k)`.
/// `pinched` additionally requires the two in-edges to share their tail.
fn star_shape(
    diag: &Diagram,
    node: usize,
    rule: Rule,
    scheme: &AssociationScheme,
    pinched: bool,
) -> Result<(Vec<usize>, usize, usize, usize, usize)> {
    let (ins, outs) = hollow_in_out(diag, node, rule)?;
    if ins.len() != 2 || outs.len() != 1 {
        return Err(precondition(
            rule,
            format!(
                "node `{}` must have exactly two incoming edges and one outgoing (found {} in, {} out)",
                diag.node_id(node),
                ins.len(),
                outs.len()
            ),
        ));
    }
    if pinched && diag.edges()[ins[0]].tail != diag.edges()[ins[1]].tail {
        return Err(precondition(rule, "the two incoming edges must share their tail"));
    }
    let mut indices = [0usize; 3];
    for (slot, &e) in ins.iter().chain(&outs).enumerate() {
        match normal_form(&diag.edges()[e].weight, scheme) {
            (Basis::E(idx), _) => indices[slot] = idx,
            _ => {
                return Err(precondition(
                    rule,
                    format!("star weights must be primitive idempotents (found {})", diag.edges()[e].weight),
                ))
            }
        }
    }
    Ok((ins.clone(), outs[0], indices[0], indices[1], indices[2]))
}

/// Collapse a pinched idempotent star onto a single scaled edge.
fn pinch(diag: &Diagram, step: &RewriteStep, ctx: &EvalContext) -> Result<DiagramCombo> {
    let &[node] = step.locus.nodes.as_slice() else {
        return Err(Error::Locus("the pinched star acts on exactly one node".into()));
    };
    let scheme = scheme_of(ctx, Rule::Sr3)?;
    let (ins, out_edge, i, j, k) = star_shape(diag, node, Rule::Sr3, scheme, true)?;
    let q = scheme.q(i, j, k);
    let order = diag.order();
    if q.norm() < PARAM_ZERO {
        return Ok(DiagramCombo::zero(order));
    }
    let scalars = diag.edges()[ins[0]].weight.scalar
        * diag.edges()[ins[1]].weight.scalar
        * diag.edges()[out_edge].weight.scalar;
    let tail = shift_past(diag.edges()[ins[0]].tail, node);
    let head = shift_past(diag.edges()[out_edge].head, node);
    let mut base = excise(diag, node, &[ins[0], ins[1], out_edge])?;
    base.add_edge_idx(tail, head, WeightRef::basis_e(k));
    let coefficient = scalars * q / scheme.n() as f64;
    Ok(DiagramCombo::new(order, vec![(coefficient, base)])?)
}

/// Collapse a hollow relation detour onto the direct edge it parallels.
fn collapse_triangle(diag: &Diagram, step: &RewriteStep, ctx: &EvalContext) -> Result<DiagramCombo> {
    let (&[node], &[direct]) = (step.locus.nodes.as_slice(), step.locus.edges.as_slice()) else {
        return Err(Error::Locus("the detour collapse names the hollow node and the direct edge".into()));
    };
    check_edge_index(diag, direct)?;
    let (ins, outs) = hollow_in_out(diag, node, Rule::Sr3Prime)?;
    let (&[in_edge], &[out_edge]) = (ins.as_slice(), outs.as_slice()) else {
        return Err(precondition(
            Rule::Sr3Prime,
            format!(
                "node `{}` must have exactly one incoming and one outgoing edge (found {} in, {} out)",
                diag.node_id(node),
                ins.len(),
                outs.len()
            ),
        ));
    };
    let direct_edge = &diag.edges()[direct];
    if direct_edge.tail != diag.edges()[in_edge].tail || direct_edge.head != diag.edges()[out_edge].head {
        return Err(Error::Locus(
            "the direct edge must run from the detour's tail to its head".into(),
        ));
    }
    let scheme = scheme_of(ctx, Rule::Sr3Prime)?;
    let mut indices = [0usize; 3];
    for (slot, e) in [in_edge, out_edge, direct].into_iter().enumerate() {
        match normal_form(&diag.edges()[e].weight, scheme) {
            (Basis::A(idx), _) => indices[slot] = idx,
            _ => {
                return Err(precondition(
                    Rule::Sr3Prime,
                    format!("detour weights must be relation matrices (found {})", diag.edges()[e].weight),
                ))
            }
        }
    }
    let [i, j, k] = indices;
    let p = scheme.p_u64(i, j, k);
    let order = diag.order();
    if p == 0 {
        return Ok(DiagramCombo::zero(order));
    }
    let scalars = diag.edges()[in_edge].weight.scalar * diag.edges()[out_edge].weight.scalar;
    let base = excise(diag, node, &[in_edge, out_edge])?;
    Ok(DiagramCombo::new(order, vec![(scalars * p as f64, base)])?)
}

/// The idempotent isthmus junction: a hollow node with two incoming and two
/// outgoing idempotent edges. Returns `(in_edges, out_edges, j, k, l, m)`.
fn isthmus_shape(
    diag: &Diagram,
    node: usize,
    scheme: &AssociationScheme,
) -> Result<([usize; 2], [usize; 2], usize, usize, usize, usize)> {
    let (ins, outs) = hollow_in_out(diag, node, Rule::Sr4)?;
    if ins.len() != 2 || outs.len() != 2 {
        return Err(precondition(
            Rule::Sr4,
            format!(
                "node `{}` must have exactly two incoming and two outgoing edges (found {} in, {} out)",
                diag.node_id(node),
                ins.len(),
                outs.len()
            ),
        ));
    }
    let mut indices = [0usize; 4];
    for (slot, &e) in ins.iter().chain(&outs).enumerate() {
        match normal_form(&diag.edges()[e].weight, scheme) {
            (Basis::E(idx), _) => indices[slot] = idx,
            _ => {
                return Err(precondition(
                    Rule::Sr4,
                    format!("junction weights must be primitive idempotents (found {})", diag.edges()[e].weight),
                ))
            }
        }
    }
    Ok(([ins[0], ins[1]], [outs[0], outs[1]], indices[0], indices[1], indices[2], indices[3]))
}

/// `for every e ≠ survivor, q_jk^e = 0 or q_lm^e = 0` at the hard zero
/// threshold.
fn isthmus_hypothesis(scheme: &AssociationScheme, jk: (usize, usize), lm: (usize, usize), survivor: usize, rule: Rule) -> Result<()> {
    if survivor > scheme.d() {
        return Err(Error::Range(format!("idempotent index {survivor} out of range")));
    }
    for e in 0..=scheme.d() {
        if e == survivor {
            continue;
        }
        let a = scheme.q(jk.0, jk.1, e).norm();
        let b = scheme.q(lm.0, lm.1, e).norm();
        if a >= PARAM_ZERO && b >= PARAM_ZERO {
            return Err(precondition(
                rule,
                format!(
                    "q_{}{}^{e} = {a:.4} and q_{}{}^{e} = {b:.4} are both nonzero",
                    jk.0, jk.1, lm.0, lm.1
                ),
            ));
        }
    }
    Ok(())
}

/// Merge the two parallel idempotent edges leaving an isthmus junction
/// (locus edges given), or split the junction along the survivor (no locus
/// edges).
fn isthmus(diag: &Diagram, step: &RewriteStep, ctx: &EvalContext) -> Result<DiagramCombo> {
    let &[node] = step.locus.nodes.as_slice() else {
        return Err(Error::Locus("the isthmus acts on exactly one junction node".into()));
    };
    let Params::Survivor { index: survivor } = step.params else {
        return Err(Error::Locus("the isthmus requires the surviving idempotent index".into()));
    };
    let scheme = scheme_of(ctx, Rule::Sr4)?;
    let (ins, outs, j, k, l, m) = isthmus_shape(diag, node, scheme)?;
    isthmus_hypothesis(scheme, (j, k), (l, m), survivor, Rule::Sr4)?;
    let order = diag.order();

    if step.locus.edges.is_empty() {
        // Split: the outgoing edges move to a fresh hollow half joined by
        // the surviving idempotent.
        let mut out = diag.clone();
        let half = out.add_node(out.fresh_id(diag.node_id(node)))?;
        for e in outs {
            out.edges_mut()[e].tail = half;
        }
        out.add_edge_idx(node, half, WeightRef::basis_e(survivor));
        return Ok(DiagramCombo::single(out));
    }

    // Merge: the two named out-edges must share their head.
    let mut named = step.locus.edges.clone();
    named.sort_unstable();
    let mut actual = outs.to_vec();
    actual.sort_unstable();
    if named != actual {
        return Err(Error::Locus(format!(
            "the merge names edges {named:?}, but the junction's outgoing edges are {actual:?}"
        )));
    }
    let head_node = diag.edges()[outs[0]].head;
    if diag.edges()[outs[1]].head != head_node {
        return Err(precondition(Rule::Sr4, "the outgoing edges must share their head to merge"));
    }
    let q = scheme.q(l, m, survivor);
    if q.norm() < PARAM_ZERO {
        return Ok(DiagramCombo::zero(order));
    }
    let scalars = diag.edges()[outs[0]].weight.scalar * diag.edges()[outs[1]].weight.scalar;
    let mut base = diag.clone();
    base.remove_edge(outs[0].max(outs[1]))?;
    base.remove_edge(outs[0].min(outs[1]))?;
    base.add_edge_idx(node, head_node, WeightRef::basis_e(survivor));
    let coefficient = scalars * q / scheme.n() as f64;
    let _ = ins;
    Ok(DiagramCombo::new(order, vec![(coefficient, base)])?)
}

/// `for every e ≠ survivor, p_hi^e = 0 or p_jk^e = 0`, exactly.
fn dual_isthmus_hypothesis(scheme: &AssociationScheme, hi: (usize, usize), jk: (usize, usize), survivor: usize) -> Result<()> {
    if survivor > scheme.d() {
        return Err(Error::Range(format!("relation index {survivor} out of range")));
    }
    for e in 0..=scheme.d() {
        if e == survivor {
            continue;
        }
        let a = scheme.p_u64(hi.0, hi.1, e);
        let b = scheme.p_u64(jk.0, jk.1, e);
        if a != 0 && b != 0 {
            return Err(precondition(
                Rule::Sr4Prime,
                format!(
                    "p_{}{}^{e} = {a} and p_{}{}^{e} = {b} are both nonzero",
                    hi.0, hi.1, jk.0, jk.1
                ),
            ));
        }
    }
    Ok(())
}

/// Expect a relation weight; return its normalized index.
fn relation_index(diag: &Diagram, edge: usize, scheme: &AssociationScheme, rule: Rule) -> Result<usize> {
    match normal_form(&diag.edges()[edge].weight, scheme) {
        (Basis::A(i), _) => Ok(i),
        _ => Err(precondition(
            rule,
            format!("edge {edge} must carry a relation matrix (found {})", diag.edges()[edge].weight),
        )),
    }
}

/// Collapse a hollow relation path beside a witness path (two locus edges)
/// or insert the implied chord beside two full paths (four locus edges).
fn dual_isthmus(diag: &Diagram, step: &RewriteStep, ctx: &EvalContext) -> Result<DiagramCombo> {
    let Params::Survivor { index: survivor } = step.params else {
        return Err(Error::Locus("the dual isthmus requires the surviving relation index".into()));
    };
    let scheme = scheme_of(ctx, Rule::Sr4Prime)?;
    let order = diag.order();
    match step.locus.edges.as_slice() {
        &[witness_in, witness_out] => {
            let &[node] = step.locus.nodes.as_slice() else {
                return Err(Error::Locus("the collapse names the hollow path node".into()));
            };
            check_edge_index(diag, witness_in)?;
            check_edge_index(diag, witness_out)?;
            let (ins, outs) = hollow_in_out(diag, node, Rule::Sr4Prime)?;
            let (&[in_edge], &[out_edge]) = (ins.as_slice(), outs.as_slice()) else {
                return Err(precondition(
                    Rule::Sr4Prime,
                    format!(
                        "node `{}` must have exactly one incoming and one outgoing edge (found {} in, {} out)",
                        diag.node_id(node),
                        ins.len(),
                        outs.len()
                    ),
                ));
            };
            let tail = diag.edges()[in_edge].tail;
            let head = diag.edges()[out_edge].head;
            if diag.edges()[witness_in].tail != tail
                || diag.edges()[witness_in].head != diag.edges()[witness_out].tail
                || diag.edges()[witness_out].head != head
            {
                return Err(Error::Locus(
                    "the witness path must run from the collapsed path's tail to its head".into(),
                ));
            }
            let h = relation_index(diag, witness_in, scheme, Rule::Sr4Prime)?;
            let i = relation_index(diag, witness_out, scheme, Rule::Sr4Prime)?;
            let j = relation_index(diag, in_edge, scheme, Rule::Sr4Prime)?;
            let k = relation_index(diag, out_edge, scheme, Rule::Sr4Prime)?;
            dual_isthmus_hypothesis(scheme, (h, i), (j, k), survivor)?;
            let p = scheme.p_u64(j, k, survivor);
            if p == 0 {
                return Ok(DiagramCombo::zero(order));
            }
            let scalars = diag.edges()[in_edge].weight.scalar * diag.edges()[out_edge].weight.scalar;
            let mut base = excise(diag, node, &[in_edge, out_edge])?;
            base.add_edge_idx(shift_past(tail, node), shift_past(head, node), WeightRef::basis_a(survivor));
            Ok(DiagramCombo::new(order, vec![(scalars * p as f64, base)])?)
        }
        &[witness_in, witness_out, path_in, path_out] => {
            for e in [witness_in, witness_out, path_in, path_out] {
                check_edge_index(diag, e)?;
            }
            let tail = diag.edges()[path_in].tail;
            let head = diag.edges()[path_out].head;
            if diag.edges()[path_in].head != diag.edges()[path_out].tail {
                return Err(Error::Locus("the second pair of edges must form a two-step path".into()));
            }
            if diag.edges()[witness_in].tail != tail
                || diag.edges()[witness_in].head != diag.edges()[witness_out].tail
                || diag.edges()[witness_out].head != head
            {
                return Err(Error::Locus(
                    "both paths must share their endpoints for the chord to be implied".into(),
                ));
            }
            let h = relation_index(diag, witness_in, scheme, Rule::Sr4Prime)?;
            let i = relation_index(diag, witness_out, scheme, Rule::Sr4Prime)?;
            let j = relation_index(diag, path_in, scheme, Rule::Sr4Prime)?;
            let k = relation_index(diag, path_out, scheme, Rule::Sr4Prime)?;
            dual_isthmus_hypothesis(scheme, (h, i), (j, k), survivor)?;
            let mut out = diag.clone();
            out.add_edge_idx(tail, head, WeightRef::basis_a(survivor));
            Ok(DiagramCombo::single(out))
        }
        _ => Err(Error::Locus(
            "the dual isthmus names two witness edges (collapse) or two paths of two edges each (chord)".into(),
        )),
    }
}

/// Rebuild and compare the glued original, then return the glued
/// replacement.
fn substitute(diag: &Diagram, step: &RewriteStep) -> Result<DiagramCombo> {
    let Params::Substitution { host, original, replacement, pairing, certificate } = &step.params else {
        return Err(Error::Locus("substitution carries its diagrams and pairing in the step data".into()));
    };
    if certificate.is_empty() {
        return Err(precondition(
            Rule::Sr5,
            "substitution requires an equality certificate naming a prior identity check",
        ));
    }
    let host = parse_diagram(host)?;
    let original = parse_diagram(original)?;
    let replacement = parse_diagram(replacement)?;
    if original.order() != replacement.order() {
        return Err(Error::Arity(format!(
            "plugs must share their root count (found {} and {})",
            original.order(),
            replacement.order()
        )));
    }
    let built = glue(&host, &original, pairing)?;
    if unparse_diagram(&built) != unparse_diagram(diag) {
        return Err(Error::Locus(
            "diagram does not match the host glued with the original plug".into(),
        ));
    }
    Ok(DiagramCombo::single(glue(&host, &replacement, pairing)?))
}

/// Rebuild and compare the paired original, then return the paired
/// replacement.
fn pair_substitute(diag: &Diagram, step: &RewriteStep) -> Result<DiagramCombo> {
    let Params::Substitution { host, original, replacement, pairing, certificate } = &step.params else {
        return Err(Error::Locus("pair substitution carries its diagrams and arity in the step data".into()));
    };
    if certificate.is_empty() {
        return Err(precondition(
            Rule::Sr11,
            "pair substitution requires an equality certificate naming a prior identity check",
        ));
    }
    if pairing.iter().enumerate().any(|(i, &(a, b))| a != i || b != i) {
        return Err(Error::Locus("pair substitution pairs the leading roots of both factors in order".into()));
    }
    let r = pairing.len();
    let outer = parse_diagram(host)?;
    let original = parse_diagram(original)?;
    let replacement = parse_diagram(replacement)?;
    if original.order() != replacement.order() {
        return Err(Error::Arity(format!(
            "inner factors must share their root count (found {} and {})",
            original.order(),
            replacement.order()
        )));
    }
    let built = bilinear_pair(&outer, &original, r)?;
    if unparse_diagram(&built) != unparse_diagram(diag) {
        return Err(Error::Locus(
            "diagram does not match the outer factor paired with the original".into(),
        ));
    }
    Ok(DiagramCombo::single(bilinear_pair(&outer, &replacement, r)?))
}

/// Replace an edge weight by a checked linear expansion of it.
fn expand(diag: &Diagram, step: &RewriteStep, ctx: &EvalContext) -> Result<DiagramCombo> {
    let &[edge_index] = step.locus.edges.as_slice() else {
        return Err(Error::Locus("expansion acts on exactly one edge".into()));
    };
    check_edge_index(diag, edge_index)?;
    let Params::Expansion { terms } = &step.params else {
        return Err(Error::Locus("expansion carries its replacement terms in the step data".into()));
    };
    let target = ctx.resolve(&diag.edges()[edge_index].weight)?;
    let mut sum = CMatrix::zeros(ctx.n());
    for (coeff, weight) in terms {
        sum = sum.add(&ctx.resolve(weight)?.scale(*coeff))?;
    }
    let gap = target.max_diff(&sum)?;
    if gap > ctx.tol().bound(max_abs(&target)) {
        return Err(precondition(
            Rule::Sr6,
            format!("expansion misses the edge weight by {gap:.3e}"),
        ));
    }
    let mut combo_terms = Vec::new();
    for (coeff, weight) in terms {
        if *coeff == Complex64::ZERO {
            continue;
        }
        let mut d = diag.clone();
        d.edges_mut()[edge_index].weight = weight.clone();
        combo_terms.push((*coeff, d));
    }
    Ok(DiagramCombo::new(diag.order(), combo_terms)?)
}

/// Reverse an edge, transposing its weight.
fn transpose_edge(diag: &Diagram, step: &RewriteStep) -> Result<DiagramCombo> {
    let &[edge_index] = step.locus.edges.as_slice() else {
        return Err(Error::Locus("transposition acts on exactly one edge".into()));
    };
    check_edge_index(diag, edge_index)?;
    let mut out = diag.clone();
    let edge = &mut out.edges_mut()[edge_index];
    std::mem::swap(&mut edge.tail, &mut edge.head);
    edge.weight = edge.weight.clone().transposed();
    Ok(DiagramCombo::single(out))
}

/// Swap the weights around a hollow pass-through node when they commute.
fn swap_commuting(diag: &Diagram, step: &RewriteStep, ctx: &EvalContext) -> Result<DiagramCombo> {
    let &[node] = step.locus.nodes.as_slice() else {
        return Err(Error::Locus("the commuting swap acts on exactly one node".into()));
    };
    let (ins, outs) = hollow_in_out(diag, node, Rule::Sr8)?;
    let (&[in_edge], &[out_edge]) = (ins.as_slice(), outs.as_slice()) else {
        return Err(precondition(
            Rule::Sr8,
            format!(
                "node `{}` must have exactly one incoming and one outgoing edge (found {} in, {} out)",
                diag.node_id(node),
                ins.len(),
                outs.len()
            ),
        ));
    };
    let first = ctx.resolve(&diag.edges()[in_edge].weight)?;
    let second = ctx.resolve(&diag.edges()[out_edge].weight)?;
    let forward = first.product(&second)?;
    let backward = second.product(&first)?;
    let gap = forward.max_diff(&backward)?;
    if gap > ctx.tol().bound(max_abs(&forward)) {
        return Err(precondition(Rule::Sr8, format!("the weights do not commute (gap {gap:.3e})")));
    }
    let mut out = diag.clone();
    let w_in = out.edges()[in_edge].weight.clone();
    let w_out = out.edges()[out_edge].weight.clone();
    out.edges_mut()[in_edge].weight = w_out;
    out.edges_mut()[out_edge].weight = w_in;
    Ok(DiagramCombo::single(out))
}

/// Delete a hollow leaf whose edge sums are constant, keeping the sum.
fn prune_leaf(diag: &Diagram, step: &RewriteStep, ctx: &EvalContext) -> Result<DiagramCombo> {
    let &[node] = step.locus.nodes.as_slice() else {
        return Err(Error::Locus("leaf pruning acts on exactly one node".into()));
    };
    let (ins, outs) = hollow_in_out(diag, node, Rule::Sr9)?;
    let (edge_index, row_sums) = match (ins.as_slice(), outs.as_slice()) {
        (&[e], &[]) => (e, true),   // summing the leaf ranges over columns of the weight
        (&[], &[e]) => (e, false),  // summing the leaf ranges over rows of the weight
        _ => {
            return Err(precondition(
                Rule::Sr9,
                format!(
                    "node `{}` must have exactly one incident edge (found {})",
                    diag.node_id(node),
                    ins.len() + outs.len()
                ),
            ))
        }
    };
    let weight = ctx.resolve(&diag.edges()[edge_index].weight)?;
    let n = ctx.n();
    let mut sums = Vec::with_capacity(n);
    for x in 0..n {
        let mut total = Complex64::ZERO;
        for y in 0..n {
            total += if row_sums { weight.get(x, y) } else { weight.get(y, x) };
        }
        sums.push(total);
    }
    let mean = sums.iter().sum::<Complex64>() / n as f64;
    let spread = sums.iter().map(|s| (s - mean).norm()).fold(0.0, f64::max);
    let scale = sums.iter().map(|s| s.norm()).fold(1.0, f64::max);
    if spread > ctx.tol().bound(scale) {
        let kind = if row_sums { "row" } else { "column" };
        return Err(precondition(
            Rule::Sr9,
            format!("edge weight does not have constant {kind} sums (spread {spread:.3e})"),
        ));
    }
    let base = excise(diag, node, &[edge_index])?;
    Ok(DiagramCombo::new(diag.order(), vec![(mean, base)])?)
}

/// Re-root the diagram on a subset of its root positions.
fn restrict_roots(diag: &Diagram, step: &RewriteStep) -> Result<DiagramCombo> {
    let Params::Keep { roots } = &step.params else {
        return Err(Error::Locus("root restriction carries the kept positions in the step data".into()));
    };
    Ok(DiagramCombo::single(hollow(diag, roots)?))
}
