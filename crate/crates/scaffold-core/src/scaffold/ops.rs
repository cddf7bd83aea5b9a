//! Diagram surgery: gluing, hollowing, pairings, root actions, and the
//! star product on fan diagrams.
//!
//! These operations build new diagrams from old ones; none of them touch
//! an evaluation context except [`xi_map`], which resolves weights.

use num_complex::Complex64;

use crate::algebra::CMatrix;
use crate::{Error, Result};

use super::{Diagram, EvalContext, WeightRef};

/// Identify paired root nodes of `s` and `t`.
///
/// `pairing` lists `(s_root_position, t_root_position)` pairs; the induced
/// map on root *nodes* must be injective in both directions. Merged nodes
/// keep `t`'s identifiers; other `s` identifiers that collide with `t`'s
/// are freshened with appended apostrophes. The result's roots are `s`'s
/// root list (through the identification) followed by `t`'s unpaired
/// roots, so the merged nodes stay roots. Contradictory `fix` constraints
/// on a merged node are rejected.
pub fn glue(s: &Diagram, t: &Diagram, pairing: &[(usize, usize)]) -> Result<Diagram> {
    let mut node_pairs: Vec<(usize, usize)> = Vec::with_capacity(pairing.len());
    let mut paired_t_positions = vec![false; t.order()];
    for &(si, ti) in pairing {
        if si >= s.order() || ti >= t.order() {
            return Err(Error::BadPairing(format!(
                "pair ({si}, {ti}) out of range for orders {} and {}",
                s.order(),
                t.order()
            )));
        }
        paired_t_positions[ti] = true;
        let pair = (s.roots()[si], t.roots()[ti]);
        if !node_pairs.contains(&pair) {
            node_pairs.push(pair);
        }
    }
    for (idx, &(sa, ta)) in node_pairs.iter().enumerate() {
        for &(sb, tb) in &node_pairs[idx + 1..] {
            if (sa == sb) != (ta == tb) {
                return Err(Error::BadPairing(format!(
                    "node `{}` and node `{}` are not matched one-to-one",
                    s.node_id(sa),
                    t.node_id(ta)
                )));
            }
        }
    }

    let mut out = t.clone();
    // Where each s node lands in the merged diagram.
    let mut s_map = vec![usize::MAX; s.node_count()];
    for &(sn, tn) in &node_pairs {
        s_map[sn] = tn;
    }
    for sn in 0..s.node_count() {
        if s_map[sn] != usize::MAX {
            continue;
        }
        let id = out.fresh_id(s.node_id(sn));
        s_map[sn] = out.add_node(id)?;
    }
    for edge in s.edges() {
        out.add_edge_idx(s_map[edge.tail], s_map[edge.head], edge.weight.clone());
    }
    for (&node, &vertex) in s.fixed() {
        let target = s_map[node];
        match out.fixed().get(&target) {
            Some(&existing) if existing != vertex => {
                return Err(Error::BadPairing(format!(
                    "node `{}` is fixed to both {existing} and {vertex}",
                    out.node_id(target)
                )));
            }
            _ => out.fix_idx(target, vertex),
        }
    }

    let mut roots: Vec<usize> = s.roots().iter().map(|&r| s_map[r]).collect();
    for (position, &root) in t.roots().iter().enumerate() {
        if !paired_t_positions[position] {
            roots.push(root);
        }
    }
    out.set_roots_idx(roots);
    Ok(out)
}

/// Demote roots: keep only the root positions listed in `keep`, in that
/// order. Dropped positions become hollow, so evaluation sums over them.
pub fn hollow(diagram: &Diagram, keep: &[usize]) -> Result<Diagram> {
    let mut seen = vec![false; diagram.order()];
    for &position in keep {
        if position >= diagram.order() {
            return Err(Error::BadRoot(format!(
                "root position {position} out of range 0..{}",
                diagram.order()
            )));
        }
        if seen[position] {
            return Err(Error::BadRoot(format!("root position {position} kept twice")));
        }
        seen[position] = true;
    }
    let mut out = diagram.clone();
    out.set_roots_idx(keep.iter().map(|&p| diagram.roots()[p]).collect());
    Ok(out)
}

/// Join the first `r` roots of `s` and `t` with identity edges and demote
/// them, conjugating every weight of `s`.
///
/// With `r` equal to both orders this evaluates to the Hermitian inner
/// product of the two tensors; smaller `r` leaves the tails as roots, so
/// order-2 diagrams paired at one root compose like matrices.
pub fn bilinear_pair(s: &Diagram, t: &Diagram, r: usize) -> Result<Diagram> {
    if r > s.order() || r > t.order() {
        return Err(Error::Arity(format!(
            "cannot pair {r} roots of diagrams with orders {} and {}",
            s.order(),
            t.order()
        )));
    }
    let mut out = t.clone();
    let mut s_map = vec![usize::MAX; s.node_count()];
    for sn in 0..s.node_count() {
        let id = out.fresh_id(s.node_id(sn));
        s_map[sn] = out.add_node(id)?;
    }
    for edge in s.edges() {
        out.add_edge_idx(s_map[edge.tail], s_map[edge.head], edge.weight.clone().conjugated());
    }
    for (&node, &vertex) in s.fixed() {
        out.fix_idx(s_map[node], vertex);
    }
    for position in 0..r {
        let sn = s_map[s.roots()[position]];
        let tn = t.roots()[position];
        out.add_edge_idx(sn, tn, WeightRef::identity());
    }
    let mut roots: Vec<usize> = s.roots()[r..].iter().map(|&n| s_map[n]).collect();
    roots.extend_from_slice(&t.roots()[r..]);
    out.set_roots_idx(roots);
    Ok(out)
}

/// One generator of the root-action algebra on diagrams.
#[derive(Debug, Clone, PartialEq)]
pub enum JaegerAction {
    /// Act on root position `i` by a matrix: a fresh node takes over the
    /// root slot, with an edge from it to the demoted original.
    Node(usize),
    /// Connect root positions `i` and `j` by a new weighted edge (equal
    /// positions give a loop on that root).
    Edge(usize, usize),
}

/// Apply a root action with the given weight.
pub fn jaeger_action(diagram: &Diagram, action: &JaegerAction, weight: WeightRef) -> Result<Diagram> {
    let check = |position: usize| -> Result<usize> {
        if position >= diagram.order() {
            return Err(Error::BadRoot(format!(
                "root position {position} out of range 0..{}",
                diagram.order()
            )));
        }
        Ok(diagram.roots()[position])
    };
    let mut out = diagram.clone();
    match *action {
        JaegerAction::Node(position) => {
            let old = check(position)?;
            let id = out.fresh_id(out.node_id(old));
            let fresh = out.add_node(id)?;
            out.add_edge_idx(fresh, old, weight);
            let mut roots = out.roots().to_vec();
            roots[position] = fresh;
            out.set_roots_idx(roots);
        }
        JaegerAction::Edge(i, j) => {
            let tail = check(i)?;
            let head = check(j)?;
            out.add_edge_idx(tail, head, weight);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Fans and the star product.
// ---------------------------------------------------------------------------

/// The recognised shape of a fan diagram: an apex with spokes to every
/// node of a directed path, roots `(first, apex, last)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Fan {
    pub apex: usize,
    /// Path nodes in path order; a single entry means a one-top fan (the
    /// first and last root coincide).
    pub tops: Vec<usize>,
    /// `spokes[k]` are the weights of the parallel apex→`tops[k]` edges.
    pub spokes: Vec<Vec<WeightRef>>,
    /// `path[k]` is the weight of the edge `tops[k]` → `tops[k+1]`.
    pub path: Vec<WeightRef>,
}

/// Recognise a diagram as a fan.
///
/// The shape is checked strictly: exactly the roots `(first, apex, last)`,
/// every edge either a spoke leaving the apex or one of the single
/// forward path edges, every non-apex node on the path, and no fixed
/// nodes. Parallel spokes are allowed (they multiply entrywise); parallel
/// path edges are not.
pub fn is_fan(diagram: &Diagram) -> Result<Fan> {
    if diagram.order() != 3 {
        return Err(Error::NotFan(format!("expected 3 roots, found {}", diagram.order())));
    }
    if !diagram.fixed().is_empty() {
        return Err(Error::NotFan("fan diagrams cannot fix nodes".into()));
    }
    let apex = diagram.roots()[1];
    let first = diagram.roots()[0];
    let last = diagram.roots()[2];
    if apex == first || apex == last {
        return Err(Error::NotFan("apex root coincides with a path end".into()));
    }

    let count = diagram.node_count();
    let mut spokes: Vec<Vec<WeightRef>> = vec![Vec::new(); count];
    let mut successor: Vec<Option<(usize, WeightRef)>> = vec![None; count];
    let mut has_predecessor = vec![false; count];
    for edge in diagram.edges() {
        if edge.tail == edge.head {
            return Err(Error::NotFan(format!("loop on node `{}`", diagram.node_id(edge.tail))));
        }
        if edge.head == apex {
            return Err(Error::NotFan(format!(
                "edge from `{}` runs into the apex",
                diagram.node_id(edge.tail)
            )));
        }
        if edge.tail == apex {
            spokes[edge.head].push(edge.weight.clone());
        } else {
            if successor[edge.tail].is_some() {
                return Err(Error::NotFan(format!(
                    "two path edges leave `{}`",
                    diagram.node_id(edge.tail)
                )));
            }
            if has_predecessor[edge.head] {
                return Err(Error::NotFan(format!(
                    "two path edges enter `{}`",
                    diagram.node_id(edge.head)
                )));
            }
            successor[edge.tail] = Some((edge.head, edge.weight.clone()));
            has_predecessor[edge.head] = true;
        }
    }
    if has_predecessor[first] {
        return Err(Error::NotFan("a path edge enters the first root".into()));
    }

    let mut tops = vec![first];
    let mut path = Vec::new();
    let mut current = first;
    while let Some((next, weight)) = successor[current].clone() {
        if tops.contains(&next) {
            return Err(Error::NotFan("path edges form a cycle".into()));
        }
        tops.push(next);
        path.push(weight);
        current = next;
    }
    if current != last {
        return Err(Error::NotFan(format!(
            "path from `{}` ends at `{}`, not the last root `{}`",
            diagram.node_id(first),
            diagram.node_id(current),
            diagram.node_id(last)
        )));
    }
    if tops.len() + 1 != count {
        return Err(Error::NotFan("a node is neither the apex nor on the path".into()));
    }
    let spokes: Vec<Vec<WeightRef>> = tops.iter().map(|&top| spokes[top].clone()).collect();
    Ok(Fan { apex, tops, spokes, path })
}

/// The star product of two fans: identify the apexes and the junction
/// tops (`s`'s last with `t`'s first), concatenating the paths.
///
/// Spokes meeting at the junction become parallel edges, which is exactly
/// the entrywise product their diagonal weights must take.
pub fn terwilliger_star(s: &Diagram, t: &Diagram) -> Result<Diagram> {
    let fan_s = is_fan(s)?;
    let fan_t = is_fan(t)?;

    let mut out = Diagram::new();
    let apex = out.add_node(s.node_id(fan_s.apex))?;
    let mut tops = Vec::with_capacity(fan_s.tops.len() + fan_t.tops.len() - 1);
    for &top in &fan_s.tops {
        tops.push(out.add_node(s.node_id(top))?);
    }
    for &top in &fan_t.tops[1..] {
        let id = out.fresh_id(t.node_id(top));
        tops.push(out.add_node(id)?);
    }

    let junction = fan_s.tops.len() - 1;
    for (k, weights) in fan_s.spokes.iter().enumerate() {
        for weight in weights {
            out.add_edge_idx(apex, tops[k], weight.clone());
        }
    }
    for (k, weights) in fan_t.spokes.iter().enumerate() {
        for weight in weights {
            out.add_edge_idx(apex, tops[junction + k], weight.clone());
        }
    }
    for (k, weight) in fan_s.path.iter().enumerate() {
        out.add_edge_idx(tops[k], tops[k + 1], weight.clone());
    }
    for (k, weight) in fan_t.path.iter().enumerate() {
        out.add_edge_idx(tops[junction + k], tops[junction + k + 1], weight.clone());
    }
    out.set_roots_idx(vec![tops[0], apex, *tops.last().expect("fan has a top")]);
    Ok(out)
}

/// The matrix-valued transform of a fan: for each vertex `x`, the product
///
/// ```text
///   M_x = D_0(x) · W_1 · D_1(x) · W_2 ··· W_ℓ · D_ℓ(x)
/// ```
///
/// where `W_k` is the `k`-th path weight and `D_k(x)` is the diagonal
/// matrix of the entrywise product of the `k`-th spoke weights' rows at
/// `x`. Slicing the fan's tensor at middle root `x` gives exactly `M_x`,
/// and the transform carries the star product to vertexwise matrix
/// multiplication.
pub fn xi_map(diagram: &Diagram, ctx: &EvalContext) -> Result<Vec<CMatrix>> {
    let fan = is_fan(diagram)?;
    let n = ctx.n();
    let spoke_matrices: Vec<Vec<CMatrix>> = fan
        .spokes
        .iter()
        .map(|weights| weights.iter().map(|w| ctx.resolve(w)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let path_matrices: Vec<CMatrix> =
        fan.path.iter().map(|w| ctx.resolve(w)).collect::<Result<Vec<_>>>()?;

    let diagonal = |k: usize, x: usize| -> Result<CMatrix> {
        CMatrix::from_fn(n, |i, j| {
            if i != j {
                return Complex64::ZERO;
            }
            spoke_matrices[k].iter().map(|m| m.get(x, i)).product()
        })
    };

    let mut out = Vec::with_capacity(n);
    for x in 0..n {
        let mut m = diagonal(0, x)?;
        for k in 0..path_matrices.len() {
            m = m.product(&path_matrices[k])?;
            m = m.product(&diagonal(k + 1, x)?)?;
        }
        out.push(m);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// The ternary product template.
// ---------------------------------------------------------------------------

/// The three-triangle diagram computing the ternary matrix product
///
/// ```text
///   T(L; M; N)[a, b, c] = Σ_x L3[a,b]·L1[b,x]·L2[a,x]
///                             · M1[c,b]·M3[b,x]·M2[c,x]
///                             · N2[a,c]·N3[a,x]·N1[c,x]
/// ```
///
/// Each triple hangs as a triangle off the corner pair it couples, with
/// its own interior node; the three interior nodes are tied together by
/// identity edges, so they collapse to the single summation variable `x`.
/// Roots are the corners `(a, b, c)`.
pub fn ternary_mesner(
    l: &[WeightRef; 3],
    m: &[WeightRef; 3],
    n: &[WeightRef; 3],
) -> Diagram {
    let mut out = Diagram::new();
    let d1 = out.add_node("D1").expect("fresh diagram");
    let d2 = out.add_node("D2").expect("fresh diagram");
    let d3 = out.add_node("D3").expect("fresh diagram");
    let x_l = out.add_node("xL").expect("fresh diagram");
    let x_m = out.add_node("xM").expect("fresh diagram");
    let x_n = out.add_node("xN").expect("fresh diagram");

    out.add_edge_idx(d1, d2, l[2].clone());
    out.add_edge_idx(d2, x_l, l[0].clone());
    out.add_edge_idx(d1, x_l, l[1].clone());

    out.add_edge_idx(d3, d2, m[0].clone());
    out.add_edge_idx(d2, x_m, m[2].clone());
    out.add_edge_idx(d3, x_m, m[1].clone());

    out.add_edge_idx(d1, d3, n[1].clone());
    out.add_edge_idx(d1, x_n, n[2].clone());
    out.add_edge_idx(d3, x_n, n[0].clone());

    out.add_edge_idx(x_l, x_m, WeightRef::identity());
    out.add_edge_idx(x_m, x_n, WeightRef::identity());
    out.add_edge_idx(x_l, x_n, WeightRef::identity());

    out.set_roots_idx(vec![d1, d2, d3]);
    out
}
