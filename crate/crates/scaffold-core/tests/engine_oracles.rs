//! Evaluator ground truth: small diagrams whose values are forced by the
//! definition, frozen counting values for the builtin schemes, and the
//! structural diagram operations.

mod common;

use num_bigint::BigInt;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use scaffold_core::algebra::tensor_inner;
use scaffold_core::scaffold::{
    bilinear_pair, elimination_order, evaluate, evaluate_both, evaluate_combo, glue, hollow,
    is_fan, jaeger_action, parse_diagram, ternary_mesner, terwilliger_star, xi_map, JaegerAction,
};
use scaffold_core::schemes::builtin;
use scaffold_core::{
    CMatrix, Diagram, DiagramCombo, Error, EvalContext, IntMatrix, Method, Tensor, WeightRef,
};

fn petersen_ctx() -> EvalContext {
    EvalContext::new(builtin("petersen", &[]).unwrap())
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

/// `edge a b <w>` with roots `(a, b)`.
fn edge_diagram(weight: WeightRef) -> Diagram {
    let mut d = Diagram::new();
    d.add_node("a").unwrap();
    d.add_node("b").unwrap();
    d.add_edge("a", "b", weight).unwrap();
    d.set_roots(&["a", "b"]).unwrap();
    d
}

/// Hollow complete graph on `k` nodes, all edges carrying `weight`.
fn complete_diagram(k: usize, weight: &WeightRef) -> Diagram {
    let mut d = Diagram::new();
    for i in 0..k {
        d.add_node(format!("v{i}")).unwrap();
    }
    for i in 0..k {
        for j in i + 1..k {
            d.add_edge_idx(i, j, weight.clone());
        }
    }
    d
}

fn tensor_matches_matrix(t: &Tensor, m: &CMatrix, tol: f64) -> bool {
    let n = m.size();
    if t.order() != 2 || t.ground_size() != n {
        return false;
    }
    (0..n).all(|x| (0..n).all(|y| close(t.get(&[x, y]).unwrap(), m.get(x, y), tol)))
}

// ---------------------------------------------------------------------------
// Definition-forced values.
// ---------------------------------------------------------------------------

#[test]
fn single_edge_reproduces_its_weight() {
    let ctx = petersen_ctx();
    let scheme = ctx.scheme().unwrap();

    let t = evaluate(&edge_diagram(WeightRef::basis_a(1)), &ctx).unwrap();
    assert!(t.exact_flag());
    assert!(tensor_matches_matrix(&t, &scheme.relation(1).to_cmatrix(), 0.0));

    let t = evaluate(&edge_diagram(WeightRef::basis_e(1)), &ctx).unwrap();
    assert!(!t.exact_flag());
    assert!(tensor_matches_matrix(&t, scheme.idempotent(1), 1e-12));

    // Gaussian-integer scalars keep the exact channel; other scalars drop it.
    let t = evaluate(&edge_diagram(WeightRef::basis_a(2).scaled(Complex64::new(1.0, 2.0))), &ctx)
        .unwrap();
    assert!(t.exact_flag());
    assert!(tensor_matches_matrix(
        &t,
        &scheme.relation(2).to_cmatrix().scale(Complex64::new(1.0, 2.0)),
        0.0
    ));
    let t = evaluate(&edge_diagram(WeightRef::basis_a(2).scaled(Complex64::new(0.5, 0.0))), &ctx)
        .unwrap();
    assert!(!t.exact_flag());
    assert!(tensor_matches_matrix(&t, &scheme.relation(2).to_cmatrix().scale(0.5.into()), 1e-12));
}

#[test]
fn edge_direction_selects_rows_and_columns() {
    // A deliberately asymmetric integer matrix exposes any index swap.
    let m = IntMatrix::from_rows(&[vec![0, 1, 0], vec![0, 0, 2], vec![3, 0, 0]]).unwrap();
    let ctx = EvalContext::for_matrices(3).with_custom_exact("m", m.clone()).unwrap();

    let forward = evaluate(&edge_diagram(WeightRef::custom("m")), &ctx).unwrap();
    assert!(tensor_matches_matrix(&forward, &m.to_cmatrix(), 0.0));

    // Reversing the roots reads the same value transposed.
    let mut reversed = edge_diagram(WeightRef::custom("m"));
    reversed.set_roots(&["b", "a"]).unwrap();
    let t = evaluate(&reversed, &ctx).unwrap();
    assert!(tensor_matches_matrix(&t, &m.to_cmatrix().transpose(), 0.0));

    // Reversing the edge while transposing the weight changes nothing.
    let mut flipped = Diagram::new();
    flipped.add_node("a").unwrap();
    flipped.add_node("b").unwrap();
    flipped.add_edge("b", "a", WeightRef::custom("m").transposed()).unwrap();
    flipped.set_roots(&["a", "b"]).unwrap();
    let t = evaluate(&flipped, &ctx).unwrap();
    assert_eq!(t.max_diff(&forward).unwrap(), 0.0);
}

#[test]
fn edgeless_diagrams_count_assignments() {
    let ctx = petersen_ctx();

    // Two roots, one extra hollow node: J scaled by the free sum.
    let mut d = Diagram::new();
    for id in ["a", "b", "c"] {
        d.add_node(id).unwrap();
    }
    d.set_roots(&["a", "b"]).unwrap();
    let t = evaluate(&d, &ctx).unwrap();
    assert!(t.exact_flag());
    assert!(t.data().iter().all(|&z| z == Complex64::new(10.0, 0.0)));

    // One hollow node, no roots: the vertex count.
    let mut d = Diagram::new();
    d.add_node("a").unwrap();
    assert_eq!(evaluate(&d, &ctx).unwrap().scalar().unwrap(), Complex64::new(10.0, 0.0));

    // The empty diagram: the empty sum has exactly one term, the empty
    // product.
    assert_eq!(evaluate(&Diagram::new(), &ctx).unwrap().scalar().unwrap(), Complex64::ONE);

    // A repeated root puts the simple tensors on the diagonal.
    let mut d = Diagram::new();
    d.add_node("a").unwrap();
    d.set_roots(&["a", "a"]).unwrap();
    let t = evaluate(&d, &ctx).unwrap();
    for x in 0..10 {
        for y in 0..10 {
            let expect = if x == y { Complex64::ONE } else { Complex64::ZERO };
            assert_eq!(t.get(&[x, y]).unwrap(), expect);
        }
    }
}

#[test]
fn loops_read_weight_diagonals() {
    let m = IntMatrix::from_rows(&[vec![5, 1, 1], vec![2, 7, 2], vec![3, 3, 9]]).unwrap();
    let ctx = EvalContext::for_matrices(3).with_custom_exact("m", m).unwrap();
    let mut d = Diagram::new();
    d.add_node("a").unwrap();
    d.add_edge("a", "a", WeightRef::custom("m")).unwrap();
    d.set_roots(&["a"]).unwrap();
    let t = evaluate(&d, &ctx).unwrap();
    for (x, want) in [5.0, 7.0, 9.0].into_iter().enumerate() {
        assert_eq!(t.get(&[x]).unwrap(), Complex64::new(want, 0.0));
    }
    // A second loop squares the diagonal.
    d.add_edge("a", "a", WeightRef::custom("m")).unwrap();
    let t = evaluate(&d, &ctx).unwrap();
    for (x, want) in [25.0, 49.0, 81.0].into_iter().enumerate() {
        assert_eq!(t.get(&[x]).unwrap(), Complex64::new(want, 0.0));
    }
}

#[test]
fn fixed_nodes_pin_assignments() {
    let ctx = petersen_ctx();
    let scheme = ctx.scheme().unwrap();

    // fix the tail: the value is one row of A1.
    let mut d = Diagram::new();
    d.add_node("a").unwrap();
    d.add_node("b").unwrap();
    d.add_edge("a", "b", WeightRef::basis_a(1)).unwrap();
    d.set_roots(&["b"]).unwrap();
    d.fix("a", 0).unwrap();
    let t = evaluate(&d, &ctx).unwrap();
    for y in 0..10 {
        let want = scheme.relation(1).to_cmatrix().get(0, y);
        assert_eq!(t.get(&[y]).unwrap(), want);
    }

    // Summing the rows over all fixes recovers the unfixed diagram.
    let mut unfixed = d.clone();
    unfixed.unfix_idx(0);
    let full = evaluate(&unfixed, &ctx).unwrap();
    let mut acc = Tensor::zeros(10, 1);
    for vertex in 0..10 {
        let mut pinned = d.clone();
        pinned.fix_idx(0, vertex);
        acc = acc.add(&evaluate(&pinned, &ctx).unwrap()).unwrap();
    }
    assert_eq!(acc.max_diff(&full).unwrap(), 0.0);

    // Out-of-range fixes are rejected.
    let mut bad = d.clone();
    bad.fix_idx(0, 10);
    assert!(matches!(evaluate(&bad, &ctx), Err(Error::Range(_))));
}

// ---------------------------------------------------------------------------
// Frozen counting values.
// ---------------------------------------------------------------------------

#[test]
fn subgraph_counts_match_frozen_values() {
    let a1 = WeightRef::basis_a(1);

    let hamming = EvalContext::new(builtin("hamming", &[2, 4]).unwrap());
    let t = evaluate(&complete_diagram(3, &a1), &hamming).unwrap();
    assert_eq!(t.scalar_exact().unwrap().re, BigInt::from(192));
    let t = evaluate(&complete_diagram(4, &a1), &hamming).unwrap();
    assert_eq!(t.scalar_exact().unwrap().re, BigInt::from(192));

    let doob = EvalContext::new(builtin("doob", &[1, 1]).unwrap());
    let t = evaluate(&complete_diagram(3, &a1), &doob).unwrap();
    assert_eq!(t.scalar_exact().unwrap().re, BigInt::from(1152));
    let t = evaluate(&complete_diagram(4, &a1), &doob).unwrap();
    assert_eq!(t.scalar_exact().unwrap().re, BigInt::from(384));

    let shrikhande = EvalContext::new(builtin("shrikhande", &[]).unwrap());
    let t = evaluate(&complete_diagram(4, &a1), &shrikhande).unwrap();
    assert!(t.scalar_exact().unwrap().is_zero());

    // The Petersen graph is triangle-free.
    let t = evaluate(&complete_diagram(3, &a1), &petersen_ctx()).unwrap();
    assert!(t.scalar_exact().unwrap().is_zero());
}

#[test]
fn counts_agree_across_methods() {
    let a1 = WeightRef::basis_a(1);
    let doob = EvalContext::new(builtin("doob", &[1, 1]).unwrap());
    let (t, diff) = evaluate_both(&complete_diagram(4, &a1), &doob).unwrap();
    assert_eq!(diff, 0.0);
    assert_eq!(t.scalar_exact().unwrap().re, BigInt::from(384));
}

#[test]
fn petersen_idempotent_complete_graph_value() {
    // Hollow K4 with one E1 edge and five E2 edges.
    let ctx = petersen_ctx();
    let mut d = Diagram::new();
    for i in 0..4 {
        d.add_node(format!("c{i}")).unwrap();
    }
    let pairs = [(0, 1, 1), (0, 2, 2), (1, 2, 2), (0, 3, 2), (1, 3, 2), (2, 3, 2)];
    for (tail, head, idx) in pairs {
        d.add_edge_idx(tail, head, WeightRef::basis_e(idx));
    }
    let value = evaluate(&d, &ctx).unwrap().scalar().unwrap();
    let expect = -2.0 / 243.0;
    assert!(
        (value - Complex64::new(expect, 0.0)).norm() <= 1e-10,
        "got {value}, want {expect}"
    );

    // The same number as a pairing of a three-arm star against a triangle.
    let mut wye = Diagram::new();
    for id in ["r0", "r1", "r2", "hub"] {
        wye.add_node(id).unwrap();
    }
    for r in 0..3 {
        wye.add_edge_idx(r, 3, WeightRef::basis_e(2));
    }
    wye.set_roots_idx(vec![0, 1, 2]);
    let mut tri = Diagram::new();
    for id in ["t0", "t1", "t2"] {
        tri.add_node(id).unwrap();
    }
    tri.add_edge_idx(0, 1, WeightRef::basis_e(1));
    tri.add_edge_idx(0, 2, WeightRef::basis_e(2));
    tri.add_edge_idx(1, 2, WeightRef::basis_e(2));
    tri.set_roots_idx(vec![0, 1, 2]);

    let paired = bilinear_pair(&wye, &tri, 3).unwrap();
    assert_eq!(paired.order(), 0);
    let via_pairing = evaluate(&paired, &ctx).unwrap().scalar().unwrap();
    assert!(close(via_pairing, value, 1e-12));

    // ... which is the Hermitian inner product of the two tensors.
    let inner =
        tensor_inner(&evaluate(&wye, &ctx).unwrap(), &evaluate(&tri, &ctx).unwrap()).unwrap();
    assert!(close(inner, value, 1e-12));
}

#[test]
fn drumstick_and_triangle_reductions_match_parameters() {
    // Two idempotent edges into a hollow middle joined to a pendant edge
    // reduce to (q_ij^k / n) E_k; the hollow triangle over the adjacency
    // basis reduces to p_jk^i A_i.
    let ctx = petersen_ctx();
    let scheme = ctx.scheme().unwrap();
    let n = 10.0;
    for (i, j, k) in [(1, 1, 1), (1, 2, 1), (2, 2, 2), (1, 1, 0), (0, 2, 2)] {
        let mut d = Diagram::new();
        for id in ["u", "v", "w"] {
            d.add_node(id).unwrap();
        }
        d.add_edge_idx(0, 1, WeightRef::basis_e(i));
        d.add_edge_idx(0, 1, WeightRef::basis_e(j));
        d.add_edge_idx(1, 2, WeightRef::basis_e(k));
        d.set_roots_idx(vec![0, 2]);
        let t = evaluate(&d, &ctx).unwrap();
        let want = scheme.idempotent(k).scale(Complex64::new(scheme.q(i, j, k).re / n, 0.0));
        assert!(tensor_matches_matrix(&t, &want, 1e-10), "drumstick ({i},{j},{k})");

        let mut d = Diagram::new();
        for id in ["u", "v", "w"] {
            d.add_node(id).unwrap();
        }
        d.add_edge_idx(0, 2, WeightRef::basis_a(i));
        d.add_edge_idx(0, 1, WeightRef::basis_a(j));
        d.add_edge_idx(1, 2, WeightRef::basis_a(k));
        d.set_roots_idx(vec![0, 2]);
        let t = evaluate(&d, &ctx).unwrap();
        let p = scheme.p_u64(j, k, i) as f64;
        let want = scheme.relation(i).to_cmatrix().scale(Complex64::new(p, 0.0));
        assert!(tensor_matches_matrix(&t, &want, 1e-9), "hollow triangle ({i},{j},{k})");
    }
}

// ---------------------------------------------------------------------------
// Method agreement and planning.
// ---------------------------------------------------------------------------

#[test]
fn methods_agree_on_random_diagrams() {
    for (name, params) in [("petersen", &[][..]), ("cycle", &[5][..])] {
        let scheme = builtin(name, params).unwrap();
        let n = scheme.n();
        let d = scheme.d();
        let ctx = EvalContext::new(scheme);
        let mut rng = ChaCha12Rng::seed_from_u64(0x5caf_f01d);
        for case in 0..40 {
            let diagram = common::random_diagram(&mut rng, d, 5, 7, n);
            let (_, diff) = evaluate_both(&diagram, &ctx)
                .unwrap_or_else(|e| panic!("case {case} on {name}: {e}"));
            assert!(diff <= 1e-9, "case {case} on {name}: methods differ by {diff:.3e}");
        }
    }
}

#[test]
fn auto_eliminates_long_paths() {
    // Ten chained A1 edges have a 16^11-state brute space; Auto must pick
    // elimination and reproduce the 10th power of A1.
    let scheme = builtin("hamming", &[2, 4]).unwrap();
    let a1 = scheme.relation(1).clone();
    let ctx = EvalContext::new(scheme);
    let mut d = Diagram::new();
    let steps = 10;
    for i in 0..=steps {
        d.add_node(format!("p{i}")).unwrap();
    }
    for i in 0..steps {
        d.add_edge_idx(i, i + 1, WeightRef::basis_a(1));
    }
    d.set_roots_idx(vec![0, steps]);

    assert!(matches!(
        evaluate(&d, &ctx.clone().with_method(Method::Brute)),
        Err(Error::TooLarge(_))
    ));

    let t = evaluate(&d, &ctx).unwrap();
    assert!(t.exact_flag());
    let mut power = IntMatrix::identity(16);
    for _ in 0..steps {
        power = power.product(&a1).unwrap();
    }
    assert!(tensor_matches_matrix(&t, &power.to_cmatrix(), 0.0));
}

#[test]
fn elimination_plans_use_inclusive_bags() {
    // Path a—b—c—d with hollow middle: both bags have three nodes.
    let mut d = Diagram::new();
    for id in ["a", "b", "c", "d"] {
        d.add_node(id).unwrap();
    }
    d.add_edge_idx(0, 1, WeightRef::all_ones());
    d.add_edge_idx(1, 2, WeightRef::all_ones());
    d.add_edge_idx(2, 3, WeightRef::all_ones());
    d.set_roots_idx(vec![0, 3]);
    let plan = elimination_order(&d);
    assert_eq!(plan.order, vec![1, 2]);
    assert_eq!(plan.bags, vec![vec![0, 1, 2], vec![0, 2, 3]]);
    assert_eq!(plan.max_bag, 3);
    assert_eq!(plan.root_bag, 2);
    assert_eq!(plan.cost(10), 1000.0 + 1000.0 + 100.0);

    // A hollow complete graph's first bag is the whole clique.
    let k4 = complete_diagram(4, &WeightRef::all_ones());
    let plan = elimination_order(&k4);
    assert_eq!(plan.max_bag, 4);
    assert_eq!(plan.bags[0].len(), 4);
    // Ties in fill break toward the lexicographically least id.
    assert_eq!(plan.order[0], 0);
}

#[test]
fn resource_guards_reject_oversized_work() {
    let ctx = EvalContext::for_matrices(20);

    // Explicit brute force beyond the free-node cap.
    let mut wide = Diagram::new();
    for i in 0..12 {
        wide.add_node(format!("v{i}")).unwrap();
    }
    assert!(matches!(
        evaluate(&wide, &ctx.clone().with_method(Method::Brute)),
        Err(Error::TooLarge(_))
    ));

    // Result tensor too large regardless of method.
    let mut many_roots = Diagram::new();
    many_roots.add_node("a").unwrap();
    many_roots.set_roots_idx(vec![0; 8]);
    assert!(matches!(evaluate(&many_roots, &ctx), Err(Error::TooLarge(_))));

    // Elimination factor too large: a hollow clique of 12 nodes over 20
    // vertices needs a 20^12-entry table.
    let k12 = complete_diagram(12, &WeightRef::all_ones());
    assert!(matches!(
        evaluate(&k12, &ctx.clone().with_method(Method::Eliminate)),
        Err(Error::TooLarge(_))
    ));
}

// ---------------------------------------------------------------------------
// Surgery.
// ---------------------------------------------------------------------------

#[test]
fn glue_merges_roots_and_forms_products() {
    let m = IntMatrix::from_rows(&[vec![1, 2, 0], vec![0, 3, 1], vec![4, 0, 5]]).unwrap();
    let k = IntMatrix::from_rows(&[vec![2, 0, 1], vec![1, 1, 0], vec![0, 2, 3]]).unwrap();
    let ctx = EvalContext::for_matrices(3)
        .with_custom_exact("m", m.clone())
        .unwrap()
        .with_custom_exact("k", k.clone())
        .unwrap();

    // Gluing both roots of two single-edge diagrams multiplies entrywise.
    let s = edge_diagram(WeightRef::custom("m"));
    let t = edge_diagram(WeightRef::custom("k"));
    let glued = glue(&s, &t, &[(0, 0), (1, 1)]).unwrap();
    assert_eq!(glued.order(), 2);
    assert_eq!(glued.node_count(), 2);
    let value = evaluate(&glued, &ctx).unwrap();
    let want = m.to_cmatrix().hadamard(&k.to_cmatrix()).unwrap();
    assert!(tensor_matches_matrix(&value, &want, 0.0));

    // An empty pairing is a disjoint union, which evaluates to the tensor
    // product.
    let union = glue(&s, &t, &[]).unwrap();
    assert_eq!(union.order(), 4);
    assert_eq!(union.node_count(), 4);
    let value = evaluate(&union, &ctx).unwrap();
    for idx in [[0usize, 1, 2, 0], [2, 2, 1, 1], [1, 0, 0, 2]] {
        let want = m.to_cmatrix().get(idx[0], idx[1]) * k.to_cmatrix().get(idx[2], idx[3]);
        assert_eq!(value.get(&idx).unwrap(), want);
    }

    // Colliding identifiers from the left diagram are freshened.
    assert!(union.node_ids().contains(&"a'".to_string()));
    assert!(union.node_ids().contains(&"b'".to_string()));

    // Root-node pairings must be one-to-one.
    let mut vee = Diagram::new();
    vee.add_node("x").unwrap();
    vee.add_node("y").unwrap();
    vee.set_roots(&["x", "x"]).unwrap();
    assert!(matches!(glue(&vee, &t, &[(0, 0), (1, 1)]), Err(Error::BadPairing(_))));
    assert!(matches!(glue(&s, &t, &[(0, 5)]), Err(Error::BadPairing(_))));

    // Contradictory fixes on a merged node are rejected.
    let mut s_fixed = s.clone();
    s_fixed.fix("a", 0).unwrap();
    let mut t_fixed = t.clone();
    t_fixed.fix("a", 1).unwrap();
    assert!(matches!(glue(&s_fixed, &t_fixed, &[(0, 0)]), Err(Error::BadPairing(_))));
}

#[test]
fn glue_substitutes_equal_value_plugs() {
    // Two different diagrams with the same tensor glued into a host give
    // the same value: a two-step A1 walk equals its A-basis expansion
    // A1² = 3·A0 + 0·A1 + 1·A2 on the Petersen scheme... exercised here
    // simply by gluing each side into a common host and comparing.
    let ctx = petersen_ctx();
    let mut walk = Diagram::new();
    for id in ["u", "mid", "v"] {
        walk.add_node(id).unwrap();
    }
    walk.add_edge_idx(0, 1, WeightRef::basis_a(1));
    walk.add_edge_idx(1, 2, WeightRef::basis_a(1));
    walk.set_roots_idx(vec![0, 2]);

    let combo = [(3.0, 0usize), (1.0, 2usize)];
    let host = {
        let mut d = edge_diagram(WeightRef::basis_e(1));
        d.push_root("a").unwrap();
        d // roots (a, b, a)
    };
    let glued_walk = glue(&host, &walk, &[(0, 0), (1, 1)]).unwrap();
    let walk_value = evaluate(&glued_walk, &ctx).unwrap();

    let mut expansion = Tensor::zeros(10, glued_walk.order());
    for (coefficient, class) in combo {
        let glued = glue(&host, &edge_diagram(WeightRef::basis_a(class)), &[(0, 0), (1, 1)])
            .unwrap();
        let term = evaluate(&glued, &ctx).unwrap().scale(Complex64::new(coefficient, 0.0));
        expansion = expansion.add(&term).unwrap();
    }
    assert!(walk_value.max_diff(&expansion).unwrap() <= 1e-10);
}

#[test]
fn hollowing_sums_axes() {
    let ctx = petersen_ctx();
    let mut tri = Diagram::new();
    for id in ["u", "v", "w"] {
        tri.add_node(id).unwrap();
    }
    tri.add_edge_idx(0, 1, WeightRef::basis_a(1));
    tri.add_edge_idx(0, 2, WeightRef::basis_a(2));
    tri.add_edge_idx(1, 2, WeightRef::basis_a(1));
    tri.set_roots_idx(vec![0, 1, 2]);

    let full = evaluate(&tri, &ctx).unwrap();
    let kept = hollow(&tri, &[0, 2]).unwrap();
    assert_eq!(kept.order(), 2);
    let value = evaluate(&kept, &ctx).unwrap();
    assert_eq!(value.max_diff(&full.sum_axes(&[1]).unwrap()).unwrap(), 0.0);

    // Keeping in a different order permutes the axes.
    let swapped = hollow(&tri, &[2, 0]).unwrap();
    let value_swapped = evaluate(&swapped, &ctx).unwrap();
    let expect = full.sum_axes(&[1]).unwrap().permute_axes(&[1, 0]).unwrap();
    assert_eq!(value_swapped.max_diff(&expect).unwrap(), 0.0);

    assert!(matches!(hollow(&tri, &[3]), Err(Error::BadRoot(_))));
    assert!(matches!(hollow(&tri, &[0, 0]), Err(Error::BadRoot(_))));
}

#[test]
fn bilinear_pairing_conjugates_the_left_side() {
    // On a non-symmetric scheme the idempotents are complex, so the
    // pairing must conjugate: ⟨E1, E1⟩ is the real trace m_1, while the
    // unconjugated sum of squares would be complex.
    let shifts = [
        vec![0usize, 1, 2, 3],
        vec![1, 2, 3, 0],
        vec![2, 3, 0, 1],
        vec![3, 0, 1, 2],
    ];
    let mut relations = Vec::new();
    for shift in &shifts {
        relations.push(IntMatrix::from_fn(4, |x, y| if shift[x] == y { 1 } else { 0 }));
    }
    let scheme = scaffold_core::AssociationScheme::from_relations(
        &relations,
        &scaffold_core::Tolerance::default(),
        scaffold_core::schemes::BUILTIN_SEED,
    )
    .unwrap();
    assert!(!scheme.is_symmetric());
    let m1 = scheme.multiplicity(1) as f64;
    let ctx = EvalContext::new(scheme);

    let s = edge_diagram(WeightRef::basis_e(1));
    let paired = bilinear_pair(&s, &s, 2).unwrap();
    assert_eq!(paired.order(), 0);
    let value = evaluate(&paired, &ctx).unwrap().scalar().unwrap();
    assert!(close(value, Complex64::new(m1, 0.0), 1e-10), "⟨E1,E1⟩ = {value}");

    // Against the library's tensor inner product.
    let t = evaluate(&s, &ctx).unwrap();
    assert!(close(tensor_inner(&t, &t).unwrap(), value, 1e-12));

    // Partial pairing composes like matrix multiplication with the left
    // operand conjugate-transposed: E1ᴴ·E2 = E1·E2 = 0.
    let s2 = edge_diagram(WeightRef::basis_e(2));
    let partial = bilinear_pair(&s, &s2, 1).unwrap();
    assert_eq!(partial.order(), 2);
    let value = evaluate(&partial, &ctx).unwrap();
    assert!(value.max_abs() <= 1e-10);

    assert!(matches!(bilinear_pair(&s, &s2, 3), Err(Error::Arity(_))));
}

#[test]
fn root_actions_multiply_and_scale() {
    let ctx = petersen_ctx();
    let scheme = ctx.scheme().unwrap();
    let base = edge_diagram(WeightRef::basis_a(1));
    let a1 = scheme.relation(1).to_cmatrix();
    let e1 = scheme.idempotent(1).clone();
    let a2 = scheme.relation(2).to_cmatrix();

    // Acting on the first root multiplies from the left.
    let acted = jaeger_action(&base, &JaegerAction::Node(0), WeightRef::basis_e(1)).unwrap();
    assert_eq!(acted.order(), 2);
    let t = evaluate(&acted, &ctx).unwrap();
    assert!(tensor_matches_matrix(&t, &e1.product(&a1).unwrap(), 1e-10));

    // Acting on the second root multiplies by the transpose on the right.
    let acted = jaeger_action(&base, &JaegerAction::Node(1), WeightRef::basis_e(1)).unwrap();
    let t = evaluate(&acted, &ctx).unwrap();
    assert!(tensor_matches_matrix(&t, &a1.product(&e1.transpose()).unwrap(), 1e-10));

    // An edge between the roots multiplies entrywise.
    let acted = jaeger_action(&base, &JaegerAction::Edge(0, 1), WeightRef::basis_a(2)).unwrap();
    let t = evaluate(&acted, &ctx).unwrap();
    assert!(tensor_matches_matrix(&t, &a1.hadamard(&a2).unwrap(), 0.0));
    // A1 and A2 have disjoint support, so that product is zero.
    assert_eq!(t.max_abs(), 0.0);

    // A loop action scales row x by W[x,x]; with W = n·E0 = J every
    // diagonal entry is 1/n·n = 1, i.e. the identity action... use A0.
    let acted = jaeger_action(&base, &JaegerAction::Edge(0, 0), WeightRef::basis_a(0)).unwrap();
    let t = evaluate(&acted, &ctx).unwrap();
    assert!(tensor_matches_matrix(&t, &a1, 0.0));

    assert!(matches!(
        jaeger_action(&base, &JaegerAction::Node(2), WeightRef::identity()),
        Err(Error::BadRoot(_))
    ));
    assert!(matches!(
        jaeger_action(&base, &JaegerAction::Edge(0, 2), WeightRef::identity()),
        Err(Error::BadRoot(_))
    ));
}

// ---------------------------------------------------------------------------
// Fans, the star product, and the matrix transform.
// ---------------------------------------------------------------------------

/// The two-top fan with spokes `s0`, `s1` and path weight `p` used across
/// the fan tests: apex `x`, tops `b0 → b1`, roots `(b0, x, b1)`.
fn two_top_fan(s0: WeightRef, p: WeightRef, s1: WeightRef) -> Diagram {
    let mut d = Diagram::new();
    d.add_node("b0").unwrap();
    d.add_node("x").unwrap();
    d.add_node("b1").unwrap();
    d.add_edge("x", "b0", s0).unwrap();
    d.add_edge("x", "b1", s1).unwrap();
    d.add_edge("b0", "b1", p).unwrap();
    d.set_roots(&["b0", "x", "b1"]).unwrap();
    d
}

#[test]
fn fan_recognition_is_strict() {
    let fan = two_top_fan(WeightRef::basis_a(1), WeightRef::basis_a(2), WeightRef::basis_a(1));
    let shape = is_fan(&fan).unwrap();
    assert_eq!(shape.apex, 1);
    assert_eq!(shape.tops, vec![0, 2]);
    assert_eq!(shape.path.len(), 1);
    assert_eq!(shape.spokes[0], vec![WeightRef::basis_a(1)]);

    // Parallel spokes are fine.
    let mut multi = fan.clone();
    multi.add_edge("x", "b0", WeightRef::basis_e(1)).unwrap();
    assert_eq!(is_fan(&multi).unwrap().spokes[0].len(), 2);

    // Wrong root count.
    let mut bad = fan.clone();
    bad.set_roots(&["b0", "x"]).unwrap();
    assert!(matches!(is_fan(&bad), Err(Error::NotFan(_))));

    // An edge into the apex.
    let mut bad = fan.clone();
    bad.add_edge("b0", "x", WeightRef::identity()).unwrap();
    assert!(matches!(is_fan(&bad), Err(Error::NotFan(_))));

    // A second path edge out of the same top.
    let mut bad = fan.clone();
    bad.add_edge("b0", "b1", WeightRef::identity()).unwrap();
    assert!(matches!(is_fan(&bad), Err(Error::NotFan(_))));

    // A single-top fan: spokes only, first and last roots equal.
    let mut tiny = Diagram::new();
    tiny.add_node("b").unwrap();
    tiny.add_node("x").unwrap();
    tiny.add_edge("x", "b", WeightRef::basis_a(1)).unwrap();
    tiny.set_roots(&["b", "x", "b"]).unwrap();
    let shape = is_fan(&tiny).unwrap();
    assert_eq!(shape.tops, vec![0]);
    assert!(shape.path.is_empty());
}

#[test]
fn xi_blocks_match_tensor_slices() {
    let ctx = petersen_ctx();
    let fan = two_top_fan(WeightRef::basis_a(1), WeightRef::basis_a(2), WeightRef::basis_a(1));
    let blocks = xi_map(&fan, &ctx).unwrap();
    let tensor = evaluate(&fan, &ctx).unwrap();
    for x in 0..10 {
        for y0 in 0..10 {
            for y1 in 0..10 {
                let slice = tensor.get(&[y0, x, y1]).unwrap();
                assert!(
                    close(slice, blocks[x].get(y0, y1), 1e-10),
                    "slice mismatch at ({y0}, {x}, {y1})"
                );
            }
        }
    }
}

#[test]
fn star_product_multiplies_xi_blocks() {
    let ctx = petersen_ctx();
    let s = two_top_fan(WeightRef::basis_a(1), WeightRef::basis_a(2), WeightRef::basis_a(1));
    let t = two_top_fan(WeightRef::basis_a(2), WeightRef::basis_a(1), WeightRef::basis_a(2));

    let st = terwilliger_star(&s, &t).unwrap();
    assert_eq!(st.node_count(), 4);
    let shape = is_fan(&st).unwrap();
    assert_eq!(shape.tops.len(), 3);
    // The junction top carries both fans' spokes in parallel.
    assert_eq!(shape.spokes[1].len(), 2);

    let blocks_s = xi_map(&s, &ctx).unwrap();
    let blocks_t = xi_map(&t, &ctx).unwrap();
    let blocks_st = xi_map(&st, &ctx).unwrap();
    let tensor = evaluate(&st, &ctx).unwrap();
    for x in 0..10 {
        let want = blocks_s[x].product(&blocks_t[x]).unwrap();
        assert!(blocks_st[x].max_diff(&want).unwrap() <= 1e-9, "ξ multiplicativity at {x}");
        for y0 in 0..10 {
            for y1 in 0..10 {
                assert!(
                    close(tensor.get(&[y0, x, y1]).unwrap(), want.get(y0, y1), 1e-9),
                    "star slice at ({y0}, {x}, {y1})"
                );
            }
        }
    }

    // Associativity, as evaluated tensors.
    let left = terwilliger_star(&terwilliger_star(&s, &t).unwrap(), &s).unwrap();
    let right = terwilliger_star(&s, &terwilliger_star(&t, &s).unwrap()).unwrap();
    let lv = evaluate(&left, &ctx).unwrap();
    let rv = evaluate(&right, &ctx).unwrap();
    assert!(lv.max_diff(&rv).unwrap() <= 1e-9);
}

// ---------------------------------------------------------------------------
// The ternary product template.
// ---------------------------------------------------------------------------

#[test]
fn ternary_template_matches_direct_formula() {
    // Nine distinct asymmetric integer matrices over a 4-element set.
    let n = 4usize;
    let mats: Vec<IntMatrix> = (0..9)
        .map(|s| {
            IntMatrix::from_fn(n, |x, y| {
                (((7 * s + 3) * x + (2 * s + 1) * y + s * x * y) % 5) as i64 - 1
            })
        })
        .collect();
    let mut ctx = EvalContext::for_matrices(n);
    for (idx, m) in mats.iter().enumerate() {
        ctx = ctx.with_custom_exact(format!("w{idx}"), m.clone()).unwrap();
    }
    let w = |idx: usize| WeightRef::custom(format!("w{idx}"));
    let l = [w(0), w(1), w(2)];
    let m = [w(3), w(4), w(5)];
    let nn = [w(6), w(7), w(8)];

    let template = ternary_mesner(&l, &m, &nn);
    assert_eq!(template.node_count(), 6);
    assert_eq!(template.order(), 3);
    let value = evaluate(&template, &ctx).unwrap();
    assert!(value.exact_flag());

    // Direct semantics, straight from the definition.
    let entry = |i: usize, x: usize, y: usize| mats[i].to_cmatrix().get(x, y);
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut want = Complex64::ZERO;
                for x in 0..n {
                    let t_l = entry(2, a, b) * entry(0, b, x) * entry(1, a, x);
                    let t_m = entry(3, c, b) * entry(5, b, x) * entry(4, c, x);
                    let t_n = entry(7, a, c) * entry(8, a, x) * entry(6, c, x);
                    want += t_l * t_m * t_n;
                }
                worst = worst.max((value.get(&[a, b, c]).unwrap() - want).norm());
            }
        }
    }
    assert_eq!(worst, 0.0, "template disagrees with the direct sum by {worst:.3e}");

    // Collapsing the three interior nodes into one by hand gives the same
    // diagram value.
    let mut collapsed = Diagram::new();
    for id in ["D1", "D2", "D3", "hub"] {
        collapsed.add_node(id).unwrap();
    }
    let edges = [
        (0usize, 1usize, 2usize),
        (2, 1, 3),
        (0, 2, 7),
        (0, 3, 1),
        (0, 3, 8),
        (1, 3, 5),
        (1, 3, 0),
        (2, 3, 6),
        (2, 3, 4),
    ];
    for (tail, head, widx) in edges {
        collapsed.add_edge_idx(tail, head, w(widx));
    }
    collapsed.set_roots_idx(vec![0, 1, 2]);
    let collapsed_value = evaluate(&collapsed, &ctx).unwrap();
    assert_eq!(value.max_diff(&collapsed_value).unwrap(), 0.0);
}

// ---------------------------------------------------------------------------
// Combinations and the text format end-to-end.
// ---------------------------------------------------------------------------

#[test]
fn combos_sum_terms_with_coefficients() {
    let ctx = petersen_ctx();
    // A0 + A1 + A2 = J.
    let combo = DiagramCombo::new(
        2,
        (0..3)
            .map(|i| (Complex64::ONE, edge_diagram(WeightRef::basis_a(i))))
            .collect(),
    )
    .unwrap();
    let t = evaluate_combo(&combo, &ctx).unwrap();
    assert!(t.exact_flag());
    assert!(t.data().iter().all(|&z| z == Complex64::ONE));

    // An empty combination is the zero tensor.
    let zero = evaluate_combo(&DiagramCombo::zero(2), &ctx).unwrap();
    assert_eq!(zero.max_abs(), 0.0);
    assert_eq!(zero.order(), 2);

    // Arity mismatches are rejected at construction.
    let mismatch = DiagramCombo::new(
        1,
        vec![(Complex64::ONE, edge_diagram(WeightRef::basis_a(1)))],
    );
    assert!(matches!(mismatch, Err(Error::Arity(_))));
}

#[test]
fn text_format_evaluates_like_builders() {
    let ctx = petersen_ctx();
    let text = "\
# two-step walk, tail pinned
node u
node mid
node v
root v
fix u = 3
edge u mid A1
edge mid v A1
";
    let parsed = parse_diagram(text).unwrap();
    let value = evaluate(&parsed, &ctx).unwrap();

    let mut built = Diagram::new();
    for id in ["u", "mid", "v"] {
        built.add_node(id).unwrap();
    }
    built.add_edge_idx(0, 1, WeightRef::basis_a(1));
    built.add_edge_idx(1, 2, WeightRef::basis_a(1));
    built.set_roots_idx(vec![2]);
    built.fix_idx(0, 3);
    assert_eq!(parsed, built);
    assert_eq!(value.max_diff(&evaluate(&built, &ctx).unwrap()).unwrap(), 0.0);

    // Row sums of A1² are k² = 9.
    let total: Complex64 = value.data().iter().sum();
    assert_eq!(total, Complex64::new(9.0, 0.0));
}
