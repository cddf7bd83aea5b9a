//! Derived computations on top of schemes and scaffolds: generalized
//! intersection counts, vanishing-parameter identities, regularity tests,
//! W-space ranks, spin models, homomorphism counting, multi-step proof
//! chains, planar duality, and the bundled identity suites.
//!
//! Everything here reduces to diagram evaluations plus table lookups; the
//! functions differ in how they aggregate the results (exact integers,
//! residuals, ranks, or [`IdentityReport`](crate::IdentityReport)s).
//! Suites report every case they check and never stop early, so a failing
//! report shows the full extent of the damage.

mod chains;
mod dual;
mod regularity;
mod spin;
mod suites;
mod wspace;

pub use chains::{proof_chain, suzuki_admissible, two_ordering_admissible, ProofChain};
pub use dual::{
    duality_experiment, planar_dual, planar_dual_with_embedding, DualityFamily, Embedding,
};
pub use regularity::{regularity_check, RegularityMode, RegularityResult, RegularityWitness};
pub use spin::{cyclic_spin_model, spin_model_check, SpinModelReport};
pub use suites::{identity_suite, SuiteName};
pub use wspace::{four_vertex_condition, wspace_rank, FourVertexResult, WShape};

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::algebra::{IntMatrix, Tensor};
use crate::scaffold::{evaluate, Diagram, EvalContext, Method, WeightRef, DEFAULT_NODE_CAP};
use crate::schemes::{AssociationScheme, PARAM_ZERO};
use crate::{Error, Result};

/// Build a diagram on nodes `n0..n{nodes-1}` with the given directed
/// weighted edges and root indices. Shared shorthand for the fixed shapes
/// this module enumerates; panics only on out-of-range indices, which
/// would be a bug in the caller's shape table.
pub(crate) fn build_diagram(
    nodes: usize,
    edges: &[(usize, usize, WeightRef)],
    roots: &[usize],
) -> Diagram {
    let mut diag = Diagram::new();
    for i in 0..nodes {
        diag.add_node(format!("n{i}")).expect("generated node ids are distinct");
    }
    for (tail, head, weight) in edges {
        diag.add_edge_idx(*tail, *head, weight.clone());
    }
    diag.set_roots_idx(roots.to_vec());
    diag
}

/// Evaluate a fixed shape given as `(nodes, edges, roots)` lists.
pub(crate) fn eval_shape(
    nodes: usize,
    edges: &[(usize, usize, WeightRef)],
    roots: &[usize],
    ctx: &EvalContext,
) -> Result<Tensor> {
    evaluate(&build_diagram(nodes, edges, roots), ctx)
}

/// A simple undirected graph, the left-hand side of homomorphism counts.
#[derive(Debug, Clone)]
pub struct Graph {
    adjacency: IntMatrix,
}

impl Graph {
    /// Wrap an adjacency matrix, which must be symmetric 0/1 with zero
    /// diagonal.
    pub fn new(adjacency: IntMatrix) -> Result<Self> {
        if !adjacency.is_zero_one() {
            return Err(Error::Shape("graph adjacency entries must be 0 or 1".into()));
        }
        if !adjacency.is_symmetric() {
            return Err(Error::Shape("graph adjacency must be symmetric".into()));
        }
        for i in 0..adjacency.size() {
            if !adjacency.get(i, i).is_zero() {
                return Err(Error::Shape(format!("graph has a loop at node {i}")));
            }
        }
        Ok(Graph { adjacency })
    }

    /// Graph on `k` nodes from an explicit edge list (loops rejected).
    pub fn from_edges(k: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = IntMatrix::zeros(k);
        for &(u, v) in edges {
            if u >= k || v >= k {
                return Err(Error::Range(format!("edge ({u},{v}) exceeds {k} nodes")));
            }
            adj.set(u, v, 1);
            adj.set(v, u, 1);
        }
        Graph::new(adj)
    }

    /// The complete graph `K_k`.
    pub fn complete(k: usize) -> Self {
        let adj = IntMatrix::from_fn(k, |i, j| if i == j { 0 } else { 1 });
        Graph { adjacency: adj }
    }

    /// The cycle `C_k`, `k ≥ 3`.
    pub fn cycle(k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::Range(format!("cycle needs at least 3 nodes, got {k}")));
        }
        let edges: Vec<(usize, usize)> = (0..k).map(|i| (i, (i + 1) % k)).collect();
        Graph::from_edges(k, &edges)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.size()
    }

    pub fn adjacency(&self) -> &IntMatrix {
        &self.adjacency
    }

    /// Undirected edges as ordered pairs `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let k = self.adjacency.size();
        let mut out = Vec::new();
        for u in 0..k {
            for v in (u + 1)..k {
                if !self.adjacency.get(u, v).is_zero() {
                    out.push((u, v));
                }
            }
        }
        out
    }
}

/// Generalized intersection number: the count of vertices `b` with
/// `(a_t, b) ∈ R_{i_t}` for every position `t`.
///
/// The count is taken twice — once by direct enumeration of `b`, once as
/// the order-0 star scaffold whose feet are fixed to the basepoints — and
/// the two must agree exactly; a disagreement would be an evaluator bug
/// and panics. With empty lists the count is `|X|`; with one basepoint it
/// reduces to the valency `v_i`.
pub fn triple_star(
    scheme: &AssociationScheme,
    basepoints: &[usize],
    indices: &[usize],
) -> Result<BigInt> {
    if basepoints.len() != indices.len() {
        return Err(Error::Arity(format!(
            "{} basepoints against {} relation indices",
            basepoints.len(),
            indices.len()
        )));
    }
    let n = scheme.n();
    for &a in basepoints {
        if a >= n {
            return Err(Error::Range(format!("basepoint {a} exceeds ground set of size {n}")));
        }
    }
    for &i in indices {
        if i > scheme.d() {
            return Err(Error::Range(format!("relation index {i} exceeds d={}", scheme.d())));
        }
    }

    let count = (0..n)
        .filter(|&b| {
            basepoints
                .iter()
                .zip(indices)
                .all(|(&a, &i)| !scheme.relation(i).get(a, b).is_zero())
        })
        .count();

    // Star scaffold with fixed feet: nodes a_0..a_{k-1} pinned to the
    // basepoints, one free hollow centre, edges a_t → centre with weight
    // A_{i_t}. Its scalar value is the same count.
    let k = basepoints.len();
    let mut diag = Diagram::new();
    for t in 0..k {
        diag.add_node(format!("a{t}")).expect("generated node ids are distinct");
        diag.fix_idx(t, basepoints[t]);
    }
    diag.add_node("b").expect("fresh id");
    for (t, &i) in indices.iter().enumerate() {
        diag.add_edge_idx(t, k, WeightRef::basis_a(i));
    }
    let ctx = EvalContext::new(scheme.clone());
    let star = evaluate(&diag, &ctx)?;
    let via_star = star.scalar()?.re.round() as i64;
    assert_eq!(
        via_star, count as i64,
        "star-scaffold coefficient disagrees with the direct count"
    );

    Ok(BigInt::from(count))
}

/// Which parameter family a vanishing-parameter identity quotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VanishingMode {
    /// `q_rs^t = 0` forces the Q-weighted sum of hollow A-stars to vanish.
    Krein,
    /// `p_rs^t = 0` forces the P-weighted sum of E-triangles to vanish.
    Intersection,
}

impl std::str::FromStr for VanishingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "krein" => Ok(VanishingMode::Krein),
            "intersection" => Ok(VanishingMode::Intersection),
            other => Err(Error::Range(format!("unknown vanishing mode `{other}`"))),
        }
    }
}

/// Third-order identity forced by one vanishing parameter.
///
/// In `Krein` mode the hypothesis is `q_rs^t = 0` (after normalizing by
/// the largest Krein magnitude) and the returned residual is the max-norm
/// of `Σ_{i,j,k} Q_ir Q_js Q_kt · star(A_i, A_j, A_k)` where the star is
/// the order-3 scaffold with a hollow centre. In `Intersection` mode the
/// hypothesis is `p_rs^t = 0` exactly and the tensor is
/// `Σ_{i,j,k} P_ir P_js P_kt · triangle(E_i, E_j, E_k)` on three solid
/// nodes. A non-vanishing parameter is reported as a `hypothesis` error.
pub fn vanishing_parameter_relation(
    scheme: &AssociationScheme,
    mode: VanishingMode,
    r: usize,
    s: usize,
    t: usize,
) -> Result<f64> {
    let d = scheme.d();
    if r > d || s > d || t > d {
        return Err(Error::Range(format!("({r},{s},{t}) exceeds d={d}")));
    }
    let n = scheme.n();
    let ctx = EvalContext::new(scheme.clone());

    match mode {
        VanishingMode::Krein => {
            let mut qscale = 1.0_f64;
            for i in 0..=d {
                for j in 0..=d {
                    for k in 0..=d {
                        qscale = qscale.max(scheme.q(i, j, k).norm());
                    }
                }
            }
            let hyp = scheme.q(r, s, t);
            if hyp.norm() >= PARAM_ZERO * qscale {
                return Err(Error::Hypothesis(format!(
                    "q_{r}{s}^{t} = {} does not vanish",
                    hyp.re
                )));
            }
            let mut total = Tensor::zeros(n, 3);
            for i in 0..=d {
                for j in 0..=d {
                    for k in 0..=d {
                        let coef = scheme.qmat().get(i, r)
                            * scheme.qmat().get(j, s)
                            * scheme.qmat().get(k, t);
                        if coef.norm() < 1e-12 {
                            continue;
                        }
                        let star = eval_shape(
                            4,
                            &[
                                (0, 3, WeightRef::basis_a(i)),
                                (1, 3, WeightRef::basis_a(j)),
                                (2, 3, WeightRef::basis_a(k)),
                            ],
                            &[0, 1, 2],
                            &ctx,
                        )?;
                        total = total.add(&star.scale(coef))?;
                    }
                }
            }
            Ok(total.max_abs())
        }
        VanishingMode::Intersection => {
            if !scheme.p(r, s, t).is_zero() {
                return Err(Error::Hypothesis(format!(
                    "p_{r}{s}^{t} = {} does not vanish",
                    scheme.p(r, s, t)
                )));
            }
            let mut total = Tensor::zeros(n, 3);
            for i in 0..=d {
                for j in 0..=d {
                    for k in 0..=d {
                        let coef = scheme.pmat().get(i, r)
                            * scheme.pmat().get(j, s)
                            * scheme.pmat().get(k, t);
                        if coef.norm() < 1e-12 {
                            continue;
                        }
                        // All-solid E-triangle with entries
                        // E_i[z,y]·E_j[x,z]·E_k[x,y] at (x,y,z).
                        let tri = eval_shape(
                            3,
                            &[
                                (2, 1, WeightRef::basis_e(i)),
                                (0, 2, WeightRef::basis_e(j)),
                                (0, 1, WeightRef::basis_e(k)),
                            ],
                            &[0, 1, 2],
                            &ctx,
                        )?;
                        total = total.add(&tri.scale(coef))?;
                    }
                }
            }
            Ok(total.max_abs())
        }
    }
}

/// How homomorphisms are counted.
#[derive(Debug, Clone)]
pub enum HomMode {
    /// Count all homomorphisms.
    All,
    /// Pin the listed graph nodes to the listed target vertices.
    Fixed(Vec<(usize, usize)>),
}

/// Exact number of graph homomorphisms `g → gamma`.
///
/// The count is the order-0 scaffold on `g`'s node set with every edge
/// weighted by `gamma`'s adjacency matrix, evaluated by elimination on the
/// exact integer backend. Graphs above the evaluator node cap are
/// rejected as `too-large`.
pub fn hom_count(g: &Graph, gamma: &Graph, mode: &HomMode) -> Result<BigInt> {
    let k = g.node_count();
    let n = gamma.node_count();
    if k > DEFAULT_NODE_CAP {
        return Err(Error::TooLarge(format!(
            "pattern graph has {k} nodes, cap is {DEFAULT_NODE_CAP}"
        )));
    }
    let fixes: &[(usize, usize)] = match mode {
        HomMode::All => &[],
        HomMode::Fixed(list) => list,
    };
    for &(node, vertex) in fixes {
        if node >= k {
            return Err(Error::Range(format!("fixed node {node} exceeds {k} pattern nodes")));
        }
        if vertex >= n {
            return Err(Error::Range(format!("fixed vertex {vertex} exceeds {n} vertices")));
        }
    }

    let edges = g.edges();
    if edges.is_empty() {
        // No constraints: every assignment of the unpinned nodes counts.
        let fixed: std::collections::BTreeSet<usize> = fixes.iter().map(|&(u, _)| u).collect();
        return Ok(BigInt::from(n).pow((k - fixed.len()) as u32));
    }

    let mut diag = Diagram::new();
    for i in 0..k {
        diag.add_node(format!("n{i}")).expect("generated node ids are distinct");
    }
    for (u, v) in edges {
        diag.add_edge_idx(u, v, WeightRef::custom("adj"));
    }
    for &(node, vertex) in fixes {
        diag.fix_idx(node, vertex);
    }

    let ctx = EvalContext::for_matrices(n)
        .with_custom_exact("adj", gamma.adjacency().clone())?
        .with_method(Method::Elimination);
    let value = evaluate(&diag, &ctx)?;
    let exact = value.scalar_exact()?;
    debug_assert!(exact.im.is_zero(), "homomorphism counts are real");
    Ok(exact.re)
}

/// Homomorphism density `|Hom(g,gamma)| / |V(gamma)|^{|V(g)|}` in lowest
/// terms.
pub fn hom_density(g: &Graph, gamma: &Graph) -> Result<BigRational> {
    let count = hom_count(g, gamma, &HomMode::All)?;
    let denom = BigInt::from(gamma.node_count()).pow(g.node_count() as u32);
    Ok(BigRational::new(count, denom))
}

/// Shared label for report `scheme` fields.
pub(crate) fn scheme_label(scheme: &AssociationScheme) -> String {
    format!("n={},d={}", scheme.n(), scheme.d())
}
