//! Shared helpers for the integration-test targets.

#![allow(dead_code)] // each test target uses a different subset

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use scaffold_core::{Diagram, WeightRef};

/// A seeded random diagram over a scheme with `d` classes: up to
/// `max_nodes` nodes and `max_edges` edges (loops and parallels allowed),
/// weights drawn from `{A_i, E_j, I, J}` with occasional transpose,
/// conjugate, and small integer scalar decorations, up to three roots
/// (repeats allowed), and an optional fixed node when `fix_range > 0`.
pub fn random_diagram(
    rng: &mut ChaCha12Rng,
    d: usize,
    max_nodes: usize,
    max_edges: usize,
    fix_range: usize,
) -> Diagram {
    let node_count = rng.random_range(1..=max_nodes);
    let mut diagram = Diagram::new();
    for i in 0..node_count {
        diagram.add_node(format!("v{i}")).expect("fresh ids");
    }
    let edge_count = rng.random_range(0..=max_edges);
    for _ in 0..edge_count {
        let tail = rng.random_range(0..node_count);
        let head = rng.random_range(0..node_count);
        let mut weight = match rng.random_range(0..4) {
            0 => WeightRef::basis_a(rng.random_range(0..=d)),
            1 => WeightRef::basis_e(rng.random_range(0..=d)),
            2 => WeightRef::identity(),
            _ => WeightRef::all_ones(),
        };
        if rng.random_bool(0.2) {
            weight = weight.transposed();
        }
        if rng.random_bool(0.1) {
            weight = weight.conjugated();
        }
        if rng.random_bool(0.15) {
            weight = weight.scaled(Complex64::new(rng.random_range(-2i32..=2) as f64, 0.0));
        }
        diagram.add_edge_idx(tail, head, weight);
    }
    let root_count = rng.random_range(0..=node_count.min(3));
    for _ in 0..root_count {
        diagram.push_root_idx(rng.random_range(0..node_count));
    }
    if fix_range > 0 && rng.random_bool(0.3) {
        let node = rng.random_range(0..node_count);
        diagram.fix_idx(node, rng.random_range(0..fix_range));
    }
    diagram
}

// ---------------------------------------------------------------------------
// Planted rewrite instances for the soundness sweeps.
// ---------------------------------------------------------------------------

use scaffold_core::rewrite::{check_identity, identity_certificate, RewriteStep, Rule};
use scaffold_core::scaffold::{bilinear_pair, glue};
use scaffold_core::schemes::PARAM_ZERO;
use scaffold_core::{AssociationScheme, DiagramCombo, EvalContext};

/// A basis weight for planting rule patterns, with occasional transpose,
/// conjugate, and sign decorations (folded away by the rules' normal
/// forms, so they exercise that path).
fn plant_weight(rng: &mut ChaCha12Rng, d: usize, allow_ones: bool) -> WeightRef {
    let mut weight = match rng.random_range(0..if allow_ones { 4 } else { 3 }) {
        0 => WeightRef::basis_a(rng.random_range(0..=d)),
        1 => WeightRef::basis_e(rng.random_range(0..=d)),
        2 => WeightRef::identity(),
        _ => WeightRef::all_ones(),
    };
    if rng.random_bool(0.15) {
        weight = weight.transposed();
    }
    if rng.random_bool(0.1) {
        weight = weight.conjugated();
    }
    if rng.random_bool(0.1) {
        weight = weight.scaled(Complex64::new(-1.0, 0.0));
    }
    weight
}

/// A small random host diagram the planted pattern will sit inside. Kept
/// small so evaluation magnitudes stay far from the float noise floor.
fn ambient_diagram(rng: &mut ChaCha12Rng, d: usize) -> Diagram {
    let count = rng.random_range(1..=2);
    let mut diagram = Diagram::new();
    for i in 0..count {
        diagram.add_node(format!("amb{i}")).expect("fresh ids");
    }
    for _ in 0..rng.random_range(0..=2) {
        let tail = rng.random_range(0..count);
        let head = rng.random_range(0..count);
        diagram.add_edge_idx(tail, head, plant_weight(rng, d, false));
    }
    diagram
}

fn plant_nodes(diagram: &mut Diagram, labels: &[&str]) -> Vec<usize> {
    labels.iter().map(|label| diagram.add_node(*label).expect("fresh ids")).collect()
}

/// Root up to three of the allowed nodes at random.
fn scatter_roots(rng: &mut ChaCha12Rng, diagram: &mut Diagram, allowed: &[usize]) {
    let mut count = 0;
    for &node in allowed {
        if count >= 3 {
            break;
        }
        if rng.random_bool(0.35) {
            diagram.push_root_idx(node);
            count += 1;
        }
    }
}

/// All `(i, j, k)` with `p_ij^k = 0`.
pub fn zero_intersection_tuples(scheme: &AssociationScheme) -> Vec<(usize, usize, usize)> {
    let d = scheme.d();
    let mut out = Vec::new();
    for i in 0..=d {
        for j in 0..=d {
            for k in 0..=d {
                if scheme.p_u64(i, j, k) == 0 {
                    out.push((i, j, k));
                }
            }
        }
    }
    out
}

/// All `(i, j, k)` with `q_ij^k` at the hard zero threshold.
pub fn zero_krein_tuples(scheme: &AssociationScheme) -> Vec<(usize, usize, usize)> {
    let d = scheme.d();
    let mut out = Vec::new();
    for i in 0..=d {
        for j in 0..=d {
            for k in 0..=d {
                if scheme.q(i, j, k).norm() < PARAM_ZERO {
                    out.push((i, j, k));
                }
            }
        }
    }
    out
}

/// All `(j, k, l, m, h)` satisfying the isthmus hypothesis: for every
/// `e ≠ h`, `q_jk^e` or `q_lm^e` vanishes.
pub fn isthmus_tuples(scheme: &AssociationScheme) -> Vec<(usize, usize, usize, usize, usize)> {
    let d = scheme.d();
    let mut out = Vec::new();
    for j in 0..=d {
        for k in 0..=d {
            for l in 0..=d {
                for m in 0..=d {
                    for h in 0..=d {
                        let ok = (0..=d).all(|e| {
                            e == h
                                || scheme.q(j, k, e).norm() < PARAM_ZERO
                                || scheme.q(l, m, e).norm() < PARAM_ZERO
                        });
                        if ok {
                            out.push((j, k, l, m, h));
                        }
                    }
                }
            }
        }
    }
    out
}

/// All `(h, i, j, k, l)` satisfying the dual hypothesis: for every
/// `e ≠ l`, `p_hi^e` or `p_jk^e` vanishes.
pub fn dual_isthmus_tuples(scheme: &AssociationScheme) -> Vec<(usize, usize, usize, usize, usize)> {
    let d = scheme.d();
    let mut out = Vec::new();
    for h in 0..=d {
        for i in 0..=d {
            for j in 0..=d {
                for k in 0..=d {
                    for l in 0..=d {
                        let ok = (0..=d).all(|e| {
                            e == l || scheme.p_u64(h, i, e) == 0 || scheme.p_u64(j, k, e) == 0
                        });
                        if ok {
                            out.push((h, i, j, k, l));
                        }
                    }
                }
            }
        }
    }
    out
}

/// A random diagram with exactly `order` roots on distinct nodes.
fn rooted_diagram(rng: &mut ChaCha12Rng, d: usize, order: usize) -> Diagram {
    let nodes = rng.random_range(order.max(1)..=order.max(1) + 1);
    let mut diagram = Diagram::new();
    for i in 0..nodes {
        diagram.add_node(format!("r{i}")).expect("fresh ids");
    }
    for _ in 0..rng.random_range(1..=2) {
        let tail = rng.random_range(0..nodes);
        let head = rng.random_range(0..nodes);
        diagram.add_edge_idx(tail, head, plant_weight(rng, d, false));
    }
    diagram.set_roots_idx((0..order).collect());
    diagram
}

/// `t` with its first edge reversed and transposed — a diagram equal to
/// `t` by the transpose rule, used as a certified substitution partner.
fn transposed_variant(t: &Diagram) -> Diagram {
    let mut out = t.clone();
    if !out.edges().is_empty() {
        let edge = &mut out.edges_mut()[0];
        std::mem::swap(&mut edge.tail, &mut edge.head);
        edge.weight = edge.weight.clone().transposed();
    }
    out
}

/// A seeded applicable instance of `rule`: a diagram containing the rule's
/// pattern (planted on fresh nodes inside a random ambient diagram, with
/// random roots on the untouched nodes) plus the step that fires it.
pub fn planted_rewrite_instance(
    rule: Rule,
    rng: &mut ChaCha12Rng,
    ctx: &EvalContext,
) -> (Diagram, RewriteStep) {
    let scheme = ctx.scheme().expect("sweep contexts carry a scheme");
    let d = scheme.d();
    match rule {
        Rule::Sr0 => {
            if rng.random_bool(0.5) {
                // Split a random node of a random diagram.
                let mut diagram = ambient_diagram(rng, d);
                let node = rng.random_range(0..diagram.node_count());
                let incident: Vec<usize> = diagram
                    .edges()
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| e.tail == node || e.head == node)
                    .map(|(i, _)| i)
                    .collect();
                let moved: Vec<usize> =
                    incident.into_iter().filter(|_| rng.random_bool(0.5)).collect();
                let allowed: Vec<usize> = (0..diagram.node_count()).collect();
                scatter_roots(rng, &mut diagram, &allowed);
                (diagram.clone(), RewriteStep::split_node(node, moved))
            } else {
                // Contract an identity edge into a hollow endpoint.
                let mut diagram = ambient_diagram(rng, d);
                let target = rng.random_range(0..diagram.node_count());
                let [half] = plant_nodes(&mut diagram, &["half"])[..] else { unreachable!() };
                let edge = diagram.edges().len();
                if rng.random_bool(0.5) {
                    diagram.add_edge_idx(half, target, WeightRef::identity());
                } else {
                    diagram.add_edge_idx(target, half, WeightRef::identity());
                }
                // The hollow half may carry other edges; they re-attach.
                if rng.random_bool(0.5) {
                    let other = rng.random_range(0..half);
                    diagram.add_edge_idx(half, other, plant_weight(rng, d, false));
                }
                let allowed: Vec<usize> = (0..diagram.node_count()).filter(|&v| v != half).collect();
                scatter_roots(rng, &mut diagram, &allowed);
                (diagram.clone(), RewriteStep::contract_identity(edge))
            }
        }
        Rule::Sr0Prime => {
            let mut diagram = ambient_diagram(rng, d);
            let allowed: Vec<usize> = (0..diagram.node_count()).collect();
            scatter_roots(rng, &mut diagram, &allowed);
            if rng.random_bool(0.5) {
                let tail = rng.random_range(0..diagram.node_count());
                let head = rng.random_range(0..diagram.node_count());
                (diagram.clone(), RewriteStep::insert_all_ones(tail, head))
            } else {
                let tail = rng.random_range(0..diagram.node_count());
                let head = rng.random_range(0..diagram.node_count());
                let edge = diagram.edges().len();
                diagram.add_edge_idx(tail, head, WeightRef::all_ones());
                (diagram.clone(), RewriteStep::delete_all_ones(edge))
            }
        }
        Rule::Sr1 => {
            let mut diagram = ambient_diagram(rng, d);
            let [u, x, v] = plant_nodes(&mut diagram, &["u", "x", "v"])[..] else { unreachable!() };
            diagram.add_edge_idx(u, x, plant_weight(rng, d, true));
            diagram.add_edge_idx(x, v, plant_weight(rng, d, true));
            let allowed: Vec<usize> = (0..diagram.node_count()).filter(|&n| n != x).collect();
            scatter_roots(rng, &mut diagram, &allowed);
            (diagram.clone(), RewriteStep::series(x))
        }
        Rule::Sr1Prime => {
            let mut diagram = ambient_diagram(rng, d);
            let [u, v] = plant_nodes(&mut diagram, &["u", "v"])[..] else { unreachable!() };
            let edge = diagram.edges().len();
            diagram.add_edge_idx(u, v, plant_weight(rng, d, true));
            diagram.add_edge_idx(u, v, plant_weight(rng, d, true));
            let allowed: Vec<usize> = (0..diagram.node_count()).collect();
            scatter_roots(rng, &mut diagram, &allowed);
            (diagram.clone(), RewriteStep::parallel(edge, edge + 1))
        }
        Rule::Sr2 => {
            let tuples = zero_intersection_tuples(scheme);
            let (i, j, k) = tuples[rng.random_range(0..tuples.len())];
            let mut diagram = ambient_diagram(rng, d);
            let [a, b, c] = plant_nodes(&mut diagram, &["a", "b", "c"])[..] else { unreachable!() };
            let edge = diagram.edges().len();
            diagram.add_edge_idx(a, b, WeightRef::basis_a(i));
            diagram.add_edge_idx(b, c, WeightRef::basis_a(j));
            diagram.add_edge_idx(a, c, WeightRef::basis_a(k));
            let allowed: Vec<usize> = (0..diagram.node_count()).collect();
            scatter_roots(rng, &mut diagram, &allowed);
            (diagram.clone(), RewriteStep::vanish_triangle(edge, edge + 1, edge + 2))
        }
        Rule::Sr2Prime => {
            let tuples = zero_krein_tuples(scheme);
            let (i, j, k) = tuples[rng.random_range(0..tuples.len())];
            let mut diagram = ambient_diagram(rng, d);
            let [a, b, x, c] = plant_nodes(&mut diagram, &["a", "b", "x", "c"])[..] else {
                unreachable!()
            };
            diagram.add_edge_idx(a, x, WeightRef::basis_e(i));
            diagram.add_edge_idx(b, x, WeightRef::basis_e(j));
            diagram.add_edge_idx(x, c, WeightRef::basis_e(k));
            let allowed: Vec<usize> = (0..diagram.node_count()).filter(|&n| n != x).collect();
            scatter_roots(rng, &mut diagram, &allowed);
            (diagram.clone(), RewriteStep::vanish_star(x))
        }
        Rule::Sr3 => {
            let (i, j, k) =
                (rng.random_range(0..=d), rng.random_range(0..=d), rng.random_range(0..=d));
            let mut diagram = ambient_diagram(rng, d);
            let [a, x, c] = plant_nodes(&mut diagram, &["a", "x", "c"])[..] else { unreachable!() };
            diagram.add_edge_idx(a, x, WeightRef::basis_e(i));
            diagram.add_edge_idx(a, x, WeightRef::basis_e(j));
            diagram.add_edge_idx(x, c, WeightRef::basis_e(k));
            let allowed: Vec<usize> = (0..diagram.node_count()).filter(|&n| n != x).collect();
            scatter_roots(rng, &mut diagram, &allowed);
            (diagram.clone(), RewriteStep::pinch(x))
        }
        Rule::Sr3Prime => {
            let (i, j, k) =
                (rng.random_range(0..=d), rng.random_range(0..=d), rng.random_range(0..=d));
            let mut diagram = ambient_diagram(rng, d);
            let [u, x, v] = plant_nodes(&mut diagram, &["u", "x", "v"])[..] else { unreachable!() };
            let edge = diagram.edges().len();
            diagram.add_edge_idx(u, x, WeightRef::basis_a(i));
            diagram.add_edge_idx(x, v, WeightRef::basis_a(j));
            diagram.add_edge_idx(u, v, WeightRef::basis_a(k));
            let allowed: Vec<usize> = (0..diagram.node_count()).filter(|&n| n != x).collect();
            scatter_roots(rng, &mut diagram, &allowed);
            (diagram.clone(), RewriteStep::collapse_triangle(x, edge + 2))
        }
        Rule::Sr4 => {
            let tuples = isthmus_tuples(scheme);
            let (j, k, l, m, h) = tuples[rng.random_range(0..tuples.len())];
            let mut diagram = ambient_diagram(rng, d);
            if rng.random_bool(0.5) {
                // Merge form: the out-edges are parallel.
                let [a, b, x, c] = plant_nodes(&mut diagram, &["a", "b", "x", "c"])[..] else {
                    unreachable!()
                };
                let edge = diagram.edges().len();
                diagram.add_edge_idx(a, x, WeightRef::basis_e(j));
                diagram.add_edge_idx(b, x, WeightRef::basis_e(k));
                diagram.add_edge_idx(x, c, WeightRef::basis_e(l));
                diagram.add_edge_idx(x, c, WeightRef::basis_e(m));
                let allowed: Vec<usize> = (0..diagram.node_count()).filter(|&n| n != x).collect();
                scatter_roots(rng, &mut diagram, &allowed);
                (diagram.clone(), RewriteStep::merge_isthmus(x, edge + 2, edge + 3, h))
            } else {
                // Split form: the out-edges go wherever they like.
                let [a, b, x, c, e] = plant_nodes(&mut diagram, &["a", "b", "x", "c", "e"])[..]
                else {
                    unreachable!()
                };
                diagram.add_edge_idx(a, x, WeightRef::basis_e(j));
                diagram.add_edge_idx(b, x, WeightRef::basis_e(k));
                diagram.add_edge_idx(x, c, WeightRef::basis_e(l));
                diagram.add_edge_idx(x, e, WeightRef::basis_e(m));
                let allowed: Vec<usize> = (0..diagram.node_count()).filter(|&n| n != x).collect();
                scatter_roots(rng, &mut diagram, &allowed);
                (diagram.clone(), RewriteStep::split_isthmus(x, h))
            }
        }
        Rule::Sr4Prime => {
            let tuples = dual_isthmus_tuples(scheme);
            let (h, i, j, k, l) = tuples[rng.random_range(0..tuples.len())];
            let mut diagram = ambient_diagram(rng, d);
            let [u, w, v, x] = plant_nodes(&mut diagram, &["u", "w", "v", "x"])[..] else {
                unreachable!()
            };
            let edge = diagram.edges().len();
            diagram.add_edge_idx(u, w, WeightRef::basis_a(h));
            diagram.add_edge_idx(w, v, WeightRef::basis_a(i));
            diagram.add_edge_idx(u, x, WeightRef::basis_a(j));
            diagram.add_edge_idx(x, v, WeightRef::basis_a(k));
            if rng.random_bool(0.5) {
                // Collapse form consumes the hollow path node.
                let allowed: Vec<usize> = (0..diagram.node_count()).filter(|&n| n != x).collect();
                scatter_roots(rng, &mut diagram, &allowed);
                (diagram.clone(), RewriteStep::collapse_dual_isthmus(x, edge, edge + 1, l))
            } else {
                // Chord form leaves every node alone, so all may be rooted.
                let allowed: Vec<usize> = (0..diagram.node_count()).collect();
                scatter_roots(rng, &mut diagram, &allowed);
                (diagram.clone(), RewriteStep::insert_chord(edge, edge + 1, edge + 2, edge + 3, l))
            }
        }
        Rule::Sr5 => {
            let host = rooted_diagram(rng, d, 2);
            let original = rooted_diagram(rng, d, 2);
            let replacement = transposed_variant(&original);
            let report = check_identity(
                &DiagramCombo::single(original.clone()),
                &DiagramCombo::single(replacement.clone()),
                ctx,
            )
            .expect("certificate check");
            assert!(report.pass, "transposed variant must equal the original");
            let pairing = vec![(0, 0), (1, 1)];
            let diagram = glue(&host, &original, &pairing).expect("plant glue");
            let step = RewriteStep::substitute(
                &host,
                &original,
                &replacement,
                pairing,
                identity_certificate(&report),
            );
            (diagram, step)
        }
        Rule::Sr6 => {
            let mut diagram = ambient_diagram(rng, d);
            let [u, v] = plant_nodes(&mut diagram, &["u", "v"])[..] else { unreachable!() };
            let edge = diagram.edges().len();
            let terms = if rng.random_bool(0.5) {
                diagram.add_edge_idx(u, v, WeightRef::all_ones());
                scaffold_core::rewrite::ones_expansion(scheme)
            } else {
                diagram.add_edge_idx(u, v, WeightRef::identity());
                scaffold_core::rewrite::identity_expansion(scheme)
            };
            let allowed: Vec<usize> = (0..diagram.node_count()).collect();
            scatter_roots(rng, &mut diagram, &allowed);
            (diagram.clone(), RewriteStep::expand(edge, terms))
        }
        Rule::Sr7 => {
            let mut diagram = ambient_diagram(rng, d);
            if diagram.edges().is_empty() {
                diagram.add_edge_idx(0, 0, plant_weight(rng, d, true));
            }
            let edge = rng.random_range(0..diagram.edges().len());
            let allowed: Vec<usize> = (0..diagram.node_count()).collect();
            scatter_roots(rng, &mut diagram, &allowed);
            (diagram.clone(), RewriteStep::transpose_edge(edge))
        }
        Rule::Sr8 => {
            let mut diagram = ambient_diagram(rng, d);
            let [u, x, v] = plant_nodes(&mut diagram, &["u", "x", "v"])[..] else { unreachable!() };
            // Scheme weights all commute with each other.
            let pick = |rng: &mut ChaCha12Rng| {
                if rng.random_bool(0.5) {
                    WeightRef::basis_a(rng.random_range(0..=d))
                } else {
                    WeightRef::basis_e(rng.random_range(0..=d))
                }
            };
            let first = pick(rng);
            let second = pick(rng);
            diagram.add_edge_idx(u, x, first);
            diagram.add_edge_idx(x, v, second);
            let allowed: Vec<usize> = (0..diagram.node_count()).filter(|&n| n != x).collect();
            scatter_roots(rng, &mut diagram, &allowed);
            (diagram.clone(), RewriteStep::swap_commuting(x))
        }
        Rule::Sr9 => {
            let mut diagram = ambient_diagram(rng, d);
            let target = rng.random_range(0..diagram.node_count());
            let [leaf] = plant_nodes(&mut diagram, &["leaf"])[..] else { unreachable!() };
            if rng.random_bool(0.5) {
                diagram.add_edge_idx(target, leaf, plant_weight(rng, d, true));
            } else {
                diagram.add_edge_idx(leaf, target, plant_weight(rng, d, true));
            }
            let allowed: Vec<usize> = (0..diagram.node_count()).filter(|&n| n != leaf).collect();
            scatter_roots(rng, &mut diagram, &allowed);
            (diagram.clone(), RewriteStep::prune_leaf(leaf))
        }
        Rule::Sr10 => {
            let diagram = random_diagram(rng, d, 4, 4, 0);
            let keep: Vec<usize> = (0..diagram.order()).filter(|_| rng.random_bool(0.6)).collect();
            (diagram, RewriteStep::restrict_roots(keep))
        }
        Rule::Sr11 => {
            let r = rng.random_range(1..=2);
            let outer = rooted_diagram(rng, d, r);
            let original = rooted_diagram(rng, d, r);
            let replacement = transposed_variant(&original);
            let report = check_identity(
                &DiagramCombo::single(original.clone()),
                &DiagramCombo::single(replacement.clone()),
                ctx,
            )
            .expect("certificate check");
            assert!(report.pass, "transposed variant must equal the original");
            let diagram = bilinear_pair(&outer, &original, r).expect("plant pairing");
            let step = RewriteStep::pair_substitute(
                &outer,
                &original,
                &replacement,
                r,
                identity_certificate(&report),
            );
            (diagram, step)
        }
    }
}
