//! Computer algebra for commutative association schemes and scaffold
//! tensor diagrams.
//!
//! A *scaffold* is a finite digraph with matrix-weighted edges, a
//! distinguished ordered list of *root* nodes, and an optional partial
//! assignment of nodes to vertices of an underlying set `X`. Its value is a
//! tensor: entries are sums, over all assignments of non-fixed nodes to `X`
//! extending the partial assignment, of the product of edge-weight entries
//! selected by the assignment. Order-0 scaffolds are scalars, order-1 are
//! vectors, order-2 are matrices, and so on.
//!
//! The crate is organised as five layers:
//!
//! * [`algebra`] — dense exact/complex matrices, tensors with an exact
//!   Gaussian-integer side-channel, simultaneous eigenprojectors, span ranks.
//! * [`schemes`] — commutative association schemes: axioms, intersection and
//!   Krein parameters, eigenmatrices, builtin families, P-/Q-polynomial
//!   structure.
//! * [`scaffold`] — diagrams, the text format for them, two independent
//!   evaluation backends (brute-force and tree-width style elimination), and
//!   diagram surgery (gluing, hollowing, bilinear pairing, fans).
//! * [`rewrite`] — the local rewrite rules for diagrams over a scheme, with
//!   checked preconditions and numeric verification of every step.
//! * [`analysis`] — derived computations: regularity tests, vanishing-
//!   parameter identities, spin models, homomorphism counts, proof chains,
//!   planar duality, and the bundled identity suites.

pub mod algebra;
pub mod analysis;
pub mod par;
pub mod report;
pub mod rewrite;
pub mod scaffold;
pub mod schemes;

pub use algebra::{CMatrix, GaussInt, IntMatrix, Tensor, Tolerance};
pub use report::{CaseRecord, IdentityReport};
pub use rewrite::{Locus, Params, RewriteStep, Rule};
pub use scaffold::{Diagram, DiagramCombo, EvalContext, Method, WeightKind, WeightRef};
pub use schemes::AssociationScheme;

/// Crate-wide error type.
///
/// Variants carry a short machine-readable token as the leading word of
/// their rendering (`shape`, `not-a-scheme (iv)`, `too-large`, …) so that
/// callers and the command-line tool can match on failures without parsing
/// free-form prose.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Operands have incompatible dimensions, orders, or arities.
    #[error("shape: {0}")]
    Shape(String),

    /// A matrix family that must commute pairwise does not.
    #[error("not-commutative: {0}")]
    NotCommutative(String),

    /// A random spectral split failed to separate eigenspaces; the caller
    /// may retry with a different seed.
    #[error("degenerate-spectrum: {0}")]
    DegenerateSpectrum(String),

    /// Relation matrices violate one of the association-scheme axioms
    /// (i)–(vi); the axiom is named.
    #[error("not-a-scheme ({axiom}): {detail}")]
    NotAScheme { axiom: &'static str, detail: String },

    /// A graph whose distance relations were requested is not connected.
    #[error("disconnected: {0}")]
    Disconnected(String),

    /// Unknown builtin scheme name or parameters out of range.
    #[error("bad-builtin: {0}")]
    BadBuiltin(String),

    /// Diagram text failed to parse.
    #[error("syntax (line {line}, column {column}): {detail}")]
    Syntax { line: usize, column: usize, detail: String },

    /// An edge, root, or fix statement references a node never declared.
    #[error("undeclared node: {0}")]
    UndeclaredNode(String),

    /// A node identifier was declared twice.
    #[error("duplicate node id: {0}")]
    DuplicateNode(String),

    /// A weight reference cannot be resolved against the evaluation context.
    #[error("unknown-weight: {0}")]
    UnknownWeight(String),

    /// The requested computation exceeds the configured resource bounds.
    #[error("too-large: {0}")]
    TooLarge(String),

    /// A glue pairing is not a bijection between root nodes.
    #[error("bad-pairing: {0}")]
    BadPairing(String),

    /// A root position or root-indexed argument is out of range or refers
    /// to a non-root node.
    #[error("bad-root: {0}")]
    BadRoot(String),

    /// Tensor or diagram orders do not match the requested pairing arity.
    #[error("arity: {0}")]
    Arity(String),

    /// A diagram does not have the fan shape required by the star product.
    #[error("not-fan: {0}")]
    NotFan(String),

    /// A rewrite rule's precondition fails on the given locus.
    #[error("precondition({rule}, {detail})")]
    Precondition { rule: &'static str, detail: String },

    /// A rewrite locus does not select the shape the rule acts on.
    #[error("locus: {0}")]
    Locus(String),

    /// A numeric argument (index, vertex, parameter) is out of range.
    #[error("range: {0}")]
    Range(String),

    /// A theorem hypothesis fails, so the requested derivation is vacuous.
    #[error("hypothesis: {0}")]
    Hypothesis(String),

    /// A labelled step of a proof chain has a failing hypothesis.
    #[error("hypothesis({step}): {detail}")]
    HypothesisStep { step: &'static str, detail: String },

    /// The operation is only defined for symmetric schemes.
    #[error("symmetric-only: {0}")]
    SymmetricOnly(String),

    /// A parity constraint fails (e.g. cyclic spin models need odd size).
    #[error("parity: {0}")]
    Parity(String),

    /// A combinatorial embedding is inconsistent or does not match the
    /// diagram.
    #[error("bad-embedding: {0}")]
    BadEmbedding(String),

    /// An ordering fails the requested polynomial (P or Q) conditions; the
    /// violating triple is reported in logical (reordered) indices.
    #[error("not-polynomial ({kind}): ordering {ordering:?} fails at (i,j,k)=({i},{j},{k}): {detail}")]
    NotPolynomial {
        kind: &'static str,
        ordering: Vec<usize>,
        i: usize,
        j: usize,
        k: usize,
        detail: String,
    },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
