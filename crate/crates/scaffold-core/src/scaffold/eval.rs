//! The two diagram evaluators and the elimination planner.
//!
//! Brute force enumerates every assignment of the free nodes; elimination
//! contracts one hollow node at a time along a min-fill order, which turns
//! exponential-in-nodes work into exponential-in-treewidth work. Both
//! produce the identical tensor, so disagreement beyond roundoff is a bug;
//! [`evaluate_both`] exists to make that cross-check routine.
//!
//! When every edge weight resolves to a (scaled, possibly transposed)
//! integer matrix with a Gaussian-integer scalar, both evaluators run over
//! arbitrary-precision Gaussian integers and the result tensor carries an
//! exact channel. Otherwise they run over `Complex64`.

use num_complex::Complex64;

use crate::algebra::{GaussInt, Tensor};
use crate::par::{par_chunk_sum, Add0};
use crate::{Error, Result};

use super::{Diagram, DiagramCombo, EvalContext, Method, AUTO_BRUTE_LIMIT, MAX_TABLE_ENTRIES};

// ---------------------------------------------------------------------------
// Scalar abstraction shared by the exact and floating evaluators.
// ---------------------------------------------------------------------------

trait Scalar: Clone + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    /// The ring image of a vertex count (used for summed-out isolated nodes).
    fn from_count(count: usize) -> Self;
    fn is_zero(&self) -> bool;
    fn mul(&self, other: &Self) -> Self;
    fn add_assign(&mut self, other: &Self);
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::ZERO
    }

    fn one() -> Self {
        Complex64::ONE
    }

    fn from_count(count: usize) -> Self {
        Complex64::new(count as f64, 0.0)
    }

    fn is_zero(&self) -> bool {
        *self == Complex64::ZERO
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
}

impl Scalar for GaussInt {
    fn zero() -> Self {
        GaussInt::zero()
    }

    fn one() -> Self {
        GaussInt::one()
    }

    fn from_count(count: usize) -> Self {
        GaussInt::new(count as u64, 0u8)
    }

    fn is_zero(&self) -> bool {
        GaussInt::is_zero(self)
    }

    fn mul(&self, other: &Self) -> Self {
        GaussInt::mul(self, other)
    }

    fn add_assign(&mut self, other: &Self) {
        *self = GaussInt::add(self, other);
    }
}

// ---------------------------------------------------------------------------
// Weight tables.
// ---------------------------------------------------------------------------

/// Per-edge flat `n × n` complex tables with decorations applied.
fn complex_tables(diagram: &Diagram, ctx: &EvalContext) -> Result<Vec<Vec<Complex64>>> {
    let n = ctx.n();
    diagram
        .edges()
        .iter()
        .map(|edge| {
            let matrix = ctx.resolve(&edge.weight)?;
            let mut table = Vec::with_capacity(n * n);
            for x in 0..n {
                for y in 0..n {
                    table.push(matrix.get(x, y));
                }
            }
            Ok(table)
        })
        .collect()
}

/// Per-edge exact tables, or `None` when any weight is not exactly
/// representable. Unresolvable weights still error.
fn exact_tables(diagram: &Diagram, ctx: &EvalContext) -> Result<Option<Vec<Vec<GaussInt>>>> {
    let mut tables = Vec::with_capacity(diagram.edges().len());
    for edge in diagram.edges() {
        match ctx.resolve_exact(&edge.weight)? {
            Some(table) => tables.push(table),
            None => return Ok(None),
        }
    }
    Ok(Some(tables))
}

// ---------------------------------------------------------------------------
// Validation and method choice.
// ---------------------------------------------------------------------------

fn validate(diagram: &Diagram, ctx: &EvalContext) -> Result<()> {
    let n = ctx.n();
    for (&node, &vertex) in diagram.fixed() {
        if vertex >= n {
            return Err(Error::Range(format!(
                "node `{}` fixed to vertex {vertex}, but the vertex set has size {n}",
                diagram.node_id(node)
            )));
        }
    }
    let out_entries = (n as f64).powi(diagram.order() as i32);
    if out_entries > MAX_TABLE_ENTRIES as f64 {
        return Err(Error::TooLarge(format!(
            "order-{} tensor over {n} vertices has {out_entries:.2e} entries (cap {MAX_TABLE_ENTRIES})",
            diagram.order()
        )));
    }
    Ok(())
}

/// Estimated multiply-adds for brute enumeration.
pub(crate) fn brute_cost(diagram: &Diagram, n: usize) -> f64 {
    (n as f64).powi(diagram.free_node_count() as i32) * diagram.edges().len().max(1) as f64
}

fn choose_brute(diagram: &Diagram, ctx: &EvalContext) -> Result<bool> {
    let free = diagram.free_node_count();
    match ctx.method() {
        Method::Brute => {
            if free > ctx.node_cap() {
                return Err(Error::TooLarge(format!(
                    "brute evaluation over {free} free nodes exceeds the cap of {}",
                    ctx.node_cap()
                )));
            }
            Ok(true)
        }
        Method::Eliminate => Ok(false),
        Method::Auto => {
            Ok(free <= ctx.node_cap() && brute_cost(diagram, ctx.n()) <= AUTO_BRUTE_LIMIT)
        }
    }
}

// ---------------------------------------------------------------------------
// Brute-force evaluation.
// ---------------------------------------------------------------------------

fn brute<S: Scalar>(diagram: &Diagram, ctx: &EvalContext, tables: &[Vec<S>]) -> Result<Vec<S>>
where
    Vec<S>: Add0,
{
    let n = ctx.n();
    let free: Vec<usize> =
        (0..diagram.node_count()).filter(|i| !diagram.fixed().contains_key(i)).collect();
    let states = n
        .checked_pow(free.len() as u32)
        .ok_or_else(|| Error::TooLarge(format!("{n}^{} assignments overflow", free.len())))?;
    let out_len = n.pow(diagram.order() as u32);

    let mut base = vec![0usize; diagram.node_count().max(1)];
    for (&node, &vertex) in diagram.fixed() {
        base[node] = vertex;
    }
    let edge_ends: Vec<(usize, usize)> =
        diagram.edges().iter().map(|e| (e.tail, e.head)).collect();
    let roots = diagram.roots().to_vec();

    // Chunk on the two most significant digits so the split (and hence the
    // floating-point summation order) is independent of the thread count.
    let chunk = n.pow((free.len() - free.len().min(2)) as u32);
    let out = par_chunk_sum(
        ctx.parallelism(),
        states,
        chunk,
        vec![S::zero(); out_len],
        |acc, range| {
            let mut assign = base.clone();
            for state in range {
                let mut rem = state;
                for k in (0..free.len()).rev() {
                    assign[free[k]] = rem % n;
                    rem /= n;
                }
                let mut product = S::one();
                let mut dead = false;
                for (table, &(tail, head)) in tables.iter().zip(&edge_ends) {
                    let w = &table[assign[tail] * n + assign[head]];
                    if w.is_zero() {
                        dead = true;
                        break;
                    }
                    product = product.mul(w);
                }
                if dead {
                    continue;
                }
                let mut offset = 0usize;
                for &root in &roots {
                    offset = offset * n + assign[root];
                }
                acc[offset].add_assign(&product);
            }
        },
    );
    Ok(out)
}

// ---------------------------------------------------------------------------
// Elimination planning.
// ---------------------------------------------------------------------------

/// A node-elimination schedule with its structural cost profile.
///
/// `order[k]` is the node index contracted at step `k` and `bags[k]` holds
/// that node together with its neighbours at the time of contraction, so
/// step `k` touches a table with `n^|bags[k]|` entries. `max_bag` is the
/// largest bag; the whole contraction runs in `O(Σ n^|bag|)` ring
/// operations plus the final assembly over the distinct roots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationPlan {
    pub order: Vec<usize>,
    pub bags: Vec<Vec<usize>>,
    pub max_bag: usize,
    /// Number of distinct root nodes (size of the assembly table's index).
    pub root_bag: usize,
}

impl EliminationPlan {
    /// Estimated ring operations over a vertex set of size `n`.
    pub fn cost(&self, n: usize) -> f64 {
        let n = n as f64;
        self.bags.iter().map(|bag| n.powi(bag.len() as i32)).sum::<f64>()
            + n.powi(self.root_bag as i32)
    }
}

/// Plan a min-fill elimination order for the non-root nodes.
///
/// The moral graph joins the endpoints of every non-loop edge; loops and
/// fixed-node constraints are unary and add no adjacency. At each step the
/// candidate whose neighbourhood needs the fewest fill-in edges is
/// contracted, ties broken by the lexicographically least node id, and its
/// neighbours become a clique.
pub fn elimination_order(diagram: &Diagram) -> EliminationPlan {
    let count = diagram.node_count();
    let mut adjacency = vec![vec![false; count]; count];
    for edge in diagram.edges() {
        if edge.tail != edge.head {
            adjacency[edge.tail][edge.head] = true;
            adjacency[edge.head][edge.tail] = true;
        }
    }
    let mut alive: Vec<bool> = (0..count).map(|i| !diagram.is_root(i)).collect();
    let mut remaining: usize = alive.iter().filter(|&&a| a).count();
    // Root nodes participate as neighbours but are never eliminated.
    let mut present = vec![true; count];

    let mut order = Vec::with_capacity(remaining);
    let mut bags = Vec::with_capacity(remaining);
    while remaining > 0 {
        let mut best: Option<(usize, usize)> = None; // (fill, node)
        for v in 0..count {
            if !alive[v] {
                continue;
            }
            let neighbours: Vec<usize> =
                (0..count).filter(|&u| u != v && present[u] && adjacency[v][u]).collect();
            let mut fill = 0usize;
            for (a, &x) in neighbours.iter().enumerate() {
                for &y in &neighbours[a + 1..] {
                    if !adjacency[x][y] {
                        fill += 1;
                    }
                }
            }
            let better = match best {
                None => true,
                Some((best_fill, best_node)) => {
                    fill < best_fill
                        || (fill == best_fill
                            && diagram.node_id(v) < diagram.node_id(best_node))
                }
            };
            if better {
                best = Some((fill, v));
            }
        }
        let (_, v) = best.expect("candidate exists while remaining > 0");
        let neighbours: Vec<usize> =
            (0..count).filter(|&u| u != v && present[u] && adjacency[v][u]).collect();
        let mut bag = neighbours.clone();
        bag.push(v);
        bag.sort_unstable();
        bags.push(bag);
        for (a, &x) in neighbours.iter().enumerate() {
            for &y in &neighbours[a + 1..] {
                adjacency[x][y] = true;
                adjacency[y][x] = true;
            }
        }
        present[v] = false;
        alive[v] = false;
        order.push(v);
        remaining -= 1;
    }
    let max_bag = bags.iter().map(Vec::len).max().unwrap_or(0);
    let mut unique_roots = diagram.roots().to_vec();
    unique_roots.sort_unstable();
    unique_roots.dedup();
    EliminationPlan { order, bags, max_bag, root_bag: unique_roots.len() }
}

// ---------------------------------------------------------------------------
// Elimination evaluation.
// ---------------------------------------------------------------------------

/// A dense table over an ordered set of node variables (row-major, first
/// variable slowest). `vars` is strictly increasing.
struct Factor<S> {
    vars: Vec<usize>,
    table: Vec<S>,
}

/// Multiply factors over the union of their variables and optionally sum
/// out one variable. `keep` forces extra variables into the union (used by
/// the final assembly so isolated roots get their free axis).
fn contract<S: Scalar>(
    factors: &[Factor<S>],
    sum_out: Option<usize>,
    keep: &[usize],
    n: usize,
) -> Result<Factor<S>> {
    let mut union: Vec<usize> = keep.to_vec();
    for factor in factors {
        union.extend_from_slice(&factor.vars);
    }
    union.sort_unstable();
    union.dedup();

    let entries = (n as f64).powi(union.len() as i32);
    if entries > MAX_TABLE_ENTRIES as f64 {
        return Err(Error::TooLarge(format!(
            "elimination factor over {} nodes has {entries:.2e} entries (cap {MAX_TABLE_ENTRIES})",
            union.len()
        )));
    }

    let out_vars: Vec<usize> =
        union.iter().copied().filter(|v| Some(*v) != sum_out).collect();
    let out_len = n.pow(out_vars.len() as u32);
    let mut out = vec![S::zero(); out_len];

    // Position of each union variable in each factor / in the output.
    let factor_positions: Vec<Vec<Option<usize>>> = factors
        .iter()
        .map(|f| union.iter().map(|v| f.vars.iter().position(|fv| fv == v)).collect())
        .collect();
    let out_positions: Vec<Option<usize>> =
        union.iter().map(|v| out_vars.iter().position(|ov| ov == v)).collect();

    let total = n.pow(union.len() as u32);
    let mut digits = vec![0usize; union.len()];
    for state in 0..total {
        let mut rem = state;
        for k in (0..union.len()).rev() {
            digits[k] = rem % n;
            rem /= n;
        }
        let mut product = S::one();
        let mut dead = false;
        for (factor, positions) in factors.iter().zip(&factor_positions) {
            let mut offset = 0usize;
            // Factor vars are a subsequence of the union, so walking union
            // positions in order visits them in the factor's own order.
            for (k, pos) in positions.iter().enumerate() {
                if pos.is_some() {
                    offset = offset * n + digits[k];
                }
            }
            let w = &factor.table[offset];
            if w.is_zero() {
                dead = true;
                break;
            }
            product = product.mul(w);
        }
        if dead {
            continue;
        }
        let mut offset = 0usize;
        for (k, pos) in out_positions.iter().enumerate() {
            if pos.is_some() {
                offset = offset * n + digits[k];
            }
        }
        out[offset].add_assign(&product);
    }
    Ok(Factor { vars: out_vars, table: out })
}

fn eliminate<S: Scalar>(diagram: &Diagram, ctx: &EvalContext, tables: &[Vec<S>]) -> Result<Vec<S>> {
    let n = ctx.n();
    let plan = elimination_order(diagram);

    let mut factors: Vec<Factor<S>> = Vec::new();
    for (table, edge) in tables.iter().zip(diagram.edges()) {
        if edge.tail == edge.head {
            // A loop reads the weight's diagonal.
            let diag: Vec<S> = (0..n).map(|x| table[x * n + x].clone()).collect();
            factors.push(Factor { vars: vec![edge.tail], table: diag });
        } else if edge.tail < edge.head {
            factors.push(Factor { vars: vec![edge.tail, edge.head], table: table.clone() });
        } else {
            // Store transposed so vars stay sorted.
            let mut flipped = Vec::with_capacity(n * n);
            for y in 0..n {
                for x in 0..n {
                    flipped.push(table[x * n + y].clone());
                }
            }
            factors.push(Factor { vars: vec![edge.head, edge.tail], table: flipped });
        }
    }
    for (&node, &vertex) in diagram.fixed() {
        let delta: Vec<S> =
            (0..n).map(|x| if x == vertex { S::one() } else { S::zero() }).collect();
        factors.push(Factor { vars: vec![node], table: delta });
    }

    let mut scalar = S::one();
    for &v in &plan.order {
        let (with_v, rest): (Vec<Factor<S>>, Vec<Factor<S>>) =
            factors.into_iter().partition(|f| f.vars.contains(&v));
        factors = rest;
        if with_v.is_empty() {
            // Isolated hollow node: summing the empty product over its n
            // assignments contributes a factor of n.
            scalar = scalar.mul(&S::from_count(n));
            continue;
        }
        let contracted = contract(&with_v, Some(v), &[], n)?;
        if contracted.vars.is_empty() {
            scalar = scalar.mul(&contracted.table[0]);
        } else {
            factors.push(contracted);
        }
    }

    // All hollow nodes are gone; assemble the table over the distinct roots.
    let mut unique_roots = diagram.roots().to_vec();
    unique_roots.sort_unstable();
    unique_roots.dedup();
    let assembled = contract(&factors, None, &unique_roots, n)?;
    debug_assert_eq!(assembled.vars, unique_roots);

    // Spread over the ordered root list, repeated roots along the diagonal.
    let order = diagram.order();
    let out_len = n.pow(order as u32);
    let mut out = vec![S::zero(); out_len];
    let mut digits = vec![0usize; unique_roots.len()];
    for (offset, value) in assembled.table.iter().enumerate() {
        let mut rem = offset;
        for k in (0..unique_roots.len()).rev() {
            digits[k] = rem % n;
            rem /= n;
        }
        let mut target = 0usize;
        for &root in diagram.roots() {
            let pos = unique_roots.binary_search(&root).expect("root is in unique list");
            target = target * n + digits[pos];
        }
        out[target] = value.mul(&scalar);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Public entry points.
// ---------------------------------------------------------------------------

/// Evaluate a diagram to its tensor value.
pub fn evaluate(diagram: &Diagram, ctx: &EvalContext) -> Result<Tensor> {
    validate(diagram, ctx)?;
    let n = ctx.n();
    let use_brute = choose_brute(diagram, ctx)?;
    if let Some(tables) = exact_tables(diagram, ctx)? {
        let data = if use_brute {
            brute(diagram, ctx, &tables)?
        } else {
            eliminate(diagram, ctx, &tables)?
        };
        return Tensor::from_exact(n, diagram.order(), data);
    }
    let tables = complex_tables(diagram, ctx)?;
    let data = if use_brute {
        brute(diagram, ctx, &tables)?
    } else {
        eliminate(diagram, ctx, &tables)?
    };
    Tensor::from_data(n, diagram.order(), data)
}

/// Evaluate a linear combination of diagrams.
pub fn evaluate_combo(combo: &DiagramCombo, ctx: &EvalContext) -> Result<Tensor> {
    let mut acc = Tensor::zeros(ctx.n(), combo.order());
    for (coefficient, diagram) in combo.terms() {
        let term = evaluate(diagram, ctx)?;
        acc = acc.add(&term.scale(*coefficient))?;
    }
    Ok(acc)
}

/// Evaluate with both backends and report the discrepancy.
///
/// Returns the elimination result together with the max-norm difference
/// from brute force. The brute side still honours the context's node cap.
pub fn evaluate_both(diagram: &Diagram, ctx: &EvalContext) -> Result<(Tensor, f64)> {
    let eliminated = evaluate(diagram, &ctx.clone().with_method(Method::Eliminate))?;
    let brute_forced = evaluate(diagram, &ctx.clone().with_method(Method::Brute))?;
    let diff = eliminated.max_diff(&brute_forced)?;
    Ok((eliminated, diff))
}
