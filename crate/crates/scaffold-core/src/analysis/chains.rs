//! Machine-checked chains of scaffold identities: each chain mirrors a
//! vanishing-parameter derivation for cometric schemes, evaluating every
//! intermediate diagram and reporting its residual.

use num_complex::Complex64;

use crate::algebra::Tolerance;
use crate::report::{CaseRecord, IdentityReport};
use crate::scaffold::{EvalContext, WeightRef};
use crate::schemes::{polynomial_structure, AssociationScheme, PolyKind, PARAM_ZERO};
use crate::{Error, Result};

use super::{eval_shape, scheme_label};

/// A supported derivation chain. Indices are *logical* positions in the
/// supplied cometric ordering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofChain {
    /// From `a_j* = 0` (with `b_j* ≠ 0` and `q_{j,j+1}^1 ≠ 0`) derive
    /// `a_1* = 0`.
    Dickie { j: usize },
    /// From `q_{i,h+j}^{h+i} = 0` plus an isthmus condition derive
    /// `q_{h+j,h+j}^j = 0`.
    Suzuki { h: usize, i: usize, j: usize },
    /// The two-orderings lemma: when `q_{ij}^h ≠ 0` and two isthmus
    /// conditions hold, `q_{kl}^i = q_{km}^j`.
    SuzukiTwoOrderings { h: usize, i: usize, j: usize, k: usize, l: usize, m: usize },
}

impl ProofChain {
    fn label(&self) -> String {
        match self {
            ProofChain::Dickie { j } => format!("dickie(j={j})"),
            ProofChain::Suzuki { h, i, j } => format!("suzuki(h={h},i={i},j={j})"),
            ProofChain::SuzukiTwoOrderings { h, i, j, k, l, m } => {
                format!("two-orderings(h={h},i={i},j={j},k={k},l={l},m={m})")
            }
        }
    }
}

/// Krein parameters looked up through a logical ordering, with the
/// scale-relative zero test used for all hypothesis checks.
struct OrderedKrein<'a> {
    scheme: &'a AssociationScheme,
    ordering: &'a [usize],
    scale: f64,
}

impl<'a> OrderedKrein<'a> {
    fn new(scheme: &'a AssociationScheme, ordering: &'a [usize]) -> Self {
        let d = scheme.d();
        let mut scale = 1.0_f64;
        for i in 0..=d {
            for j in 0..=d {
                for k in 0..=d {
                    scale = scale.max(scheme.q(i, j, k).norm());
                }
            }
        }
        OrderedKrein { scheme, ordering, scale }
    }

    fn q(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.scheme.q(self.ordering[i], self.ordering[j], self.ordering[k])
    }

    fn is_zero(&self, z: Complex64) -> bool {
        z.norm() < PARAM_ZERO * self.scale
    }

    fn e(&self, j: usize) -> WeightRef {
        WeightRef::basis_e(self.ordering[j])
    }
}

/// Evaluate every diagram of a derivation chain and report residuals.
///
/// The ordering must be a valid cometric ordering of the scheme
/// (validated via the polynomial conditions); the chain's hypotheses are
/// checked against the reordered Krein parameters and reported as
/// `hypothesis(step)` errors when they fail. Residuals are held to the
/// default tolerance at unit scale.
pub fn proof_chain(
    scheme: &AssociationScheme,
    chain: &ProofChain,
    ordering: &[usize],
) -> Result<IdentityReport> {
    polynomial_structure(scheme, PolyKind::Cometric, ordering)?;
    let kr = OrderedKrein::new(scheme, ordering);
    let tol = Tolerance::default();
    let bound = tol.bound(1.0);
    let ctx = EvalContext::new(scheme.clone());

    let cases = match chain {
        ProofChain::Dickie { j } => dickie_cases(scheme, &kr, &ctx, *j, bound)?,
        ProofChain::Suzuki { h, i, j } => suzuki_cases(&kr, &ctx, *h, *i, *j, bound)?,
        ProofChain::SuzukiTwoOrderings { h, i, j, k, l, m } => {
            two_orderings_cases(scheme, &kr, &ctx, [*h, *i, *j, *k, *l, *m], bound)?
        }
    };

    Ok(IdentityReport::new(chain.label(), scheme_label(scheme), true, bound, cases))
}

fn dickie_cases(
    scheme: &AssociationScheme,
    kr: &OrderedKrein,
    ctx: &EvalContext,
    j: usize,
    bound: f64,
) -> Result<Vec<CaseRecord>> {
    let d = scheme.d();
    if j < 1 || j + 1 > d {
        return Err(Error::Range(format!(
            "dickie chain needs 1 ≤ j ≤ d−1 = {}, got j = {j}",
            d - 1
        )));
    }
    // Hypotheses: a_j* = q_{1,j}^j vanishes, the ladder coefficients
    // b_j* = q_{1,j+1}^j and q_{j,j+1}^1 do not.
    if !kr.is_zero(kr.q(1, j, j)) {
        return Err(Error::HypothesisStep {
            step: "assumption",
            detail: format!("a_{j}* = |{}| is not zero", kr.q(1, j, j)),
        });
    }
    if kr.is_zero(kr.q(1, j + 1, j)) {
        return Err(Error::HypothesisStep {
            step: "leg-expansion",
            detail: format!("b_{j}* = q(1,{},{j}) vanishes; legs cannot be expanded", j + 1),
        });
    }
    if kr.is_zero(kr.q(j, j + 1, 1)) {
        return Err(Error::HypothesisStep {
            step: "pinch",
            detail: format!("q({j},{},1) vanishes; the pinch step divides by it", j + 1),
        });
    }

    let e1 = kr.e(1);
    let ej = kr.e(j);
    let ejm = kr.e(j - 1);
    let ejp = kr.e(j + 1);
    let mut cases = Vec::new();
    let mut push = |id: &str, value: f64| {
        cases.push(CaseRecord::new(id, "0", format!("{value:.3e}"), value, bound));
    };

    // D01: the assumption as a scaffold — the idempotent star with legs
    // E_j, E_j, E_1 vanishes.
    let d01 = eval_shape(
        4,
        &[(0, 3, ej.clone()), (1, 3, ej.clone()), (2, 3, e1.clone())],
        &[0, 1, 2],
        ctx,
    )?;
    push("D01", d01.max_abs());

    // D02: one leg expanded through a q_{1,j+1}-weighted fork.
    let d02 = eval_shape(
        5,
        &[
            (0, 4, ej.clone()),
            (4, 3, e1.clone()),
            (4, 3, ejp.clone()),
            (1, 3, ej.clone()),
            (2, 3, e1.clone()),
        ],
        &[0, 1, 2],
        ctx,
    )?;
    push("D02", d02.max_abs());

    // D03: all legs expanded; the inner triangle appears.
    let d03_edges = [
        (0, 3, ej.clone()),
        (3, 4, e1.clone()),
        (3, 5, ejp.clone()),
        (1, 4, ej.clone()),
        (4, 5, ejp.clone()),
        (2, 5, e1.clone()),
    ];
    let d03 = eval_shape(6, &d03_edges, &[0, 1, 2], ctx)?;
    push("D03", d03.max_abs());

    // D04: close the roots with a triangle of weights E_{j-1}, E_1, E_1
    // to make the order-0 prism.
    let mut d04_edges = d03_edges.to_vec();
    d04_edges.push((0, 1, ejm.clone()));
    d04_edges.push((1, 2, e1.clone()));
    d04_edges.push((2, 0, e1.clone()));
    let d04 = eval_shape(6, &d04_edges, &[], ctx)?;
    push("D04", d04.scalar()?.norm());

    // D05: contract one rung of the prism.
    let d05 = eval_shape(
        5,
        &[
            (0, 1, ej.clone()),
            (1, 2, e1.clone()),
            (1, 3, ejp.clone()),
            (2, 3, ejp.clone()),
            (4, 3, e1.clone()),
            (0, 2, ejm.clone()),
            (2, 4, e1.clone()),
            (4, 0, e1.clone()),
        ],
        &[],
        ctx,
    )?;
    push("D05", d05.scalar()?.norm());

    // D06: contract again down to four nodes; the doubled (0,1) edge
    // carries E_1 and E_{j-1}.
    let d06 = eval_shape(
        4,
        &[
            (0, 1, e1.clone()),
            (0, 2, ejp.clone()),
            (1, 2, ejp.clone()),
            (3, 2, e1.clone()),
            (0, 1, ejm.clone()),
            (1, 3, e1.clone()),
            (3, 0, e1.clone()),
        ],
        &[],
        ctx,
    )?;
    push("D06", d06.scalar()?.norm());

    // D07: merge the doubled edge into a single Hadamard-product weight.
    let merged = scheme
        .idempotent(kr.ordering[1])
        .hadamard(scheme.idempotent(kr.ordering[j - 1]))?;
    let merged_ctx = EvalContext::new(scheme.clone()).with_custom("merged", merged)?;
    let d07 = eval_shape(
        4,
        &[
            (0, 1, WeightRef::custom("merged")),
            (0, 2, ejp.clone()),
            (1, 2, ejp.clone()),
            (3, 2, e1.clone()),
            (1, 3, e1.clone()),
            (3, 0, e1.clone()),
        ],
        &[],
        &merged_ctx,
    )?;
    push("D07", d07.scalar()?.norm());

    // D08: the Hadamard product expands over the Krein support; only the
    // E_j term survives the assumption.
    let d08 = eval_shape(
        4,
        &[
            (0, 1, ej.clone()),
            (0, 2, ejp.clone()),
            (1, 2, ejp.clone()),
            (3, 2, e1.clone()),
            (1, 3, e1.clone()),
            (3, 0, e1.clone()),
        ],
        &[],
        ctx,
    )?;
    push("D08", d08.scalar()?.norm());

    // D09: pinch the E_{j+1} pair; a doubled edge with a pendant remains.
    let d09 = eval_shape(
        3,
        &[
            (1, 2, ej.clone()),
            (1, 2, ejp.clone()),
            (2, 0, e1.clone()),
            (0, 2, e1.clone()),
            (0, 1, e1.clone()),
        ],
        &[],
        ctx,
    )?;
    push("D09", d09.scalar()?.norm());

    // D10: the final drumstick-free form: a tripled E_1 edge, whose value
    // is a_1*·m_1/|X| up to the chain's nonzero factors.
    let d10 = eval_shape(
        2,
        &[(0, 1, e1.clone()), (0, 1, e1.clone()), (0, 1, e1.clone())],
        &[],
        ctx,
    )?;
    push("D10", d10.scalar()?.norm());

    // Conclusion: a_1* itself.
    let a1 = kr.q(1, 1, 1);
    cases.push(CaseRecord::new(
        "conclusion",
        "a_1* = 0",
        format!("{:.3e}", a1.norm()),
        a1.norm(),
        bound,
    ));
    Ok(cases)
}

fn suzuki_cases(
    kr: &OrderedKrein,
    ctx: &EvalContext,
    h: usize,
    i: usize,
    j: usize,
    bound: f64,
) -> Result<Vec<CaseRecord>> {
    let d = kr.scheme.d();
    if h < 1 || j < 1 || j > i || h + i + j > d {
        return Err(Error::Range(format!(
            "suzuki chain needs h ≥ 1, 1 ≤ j ≤ i, h+i+j ≤ d = {d}; got (h,i,j) = ({h},{i},{j})"
        )));
    }
    if !kr.is_zero(kr.q(i, h + j, h + i)) {
        return Err(Error::HypothesisStep {
            step: "assumption",
            detail: format!("q({i},{},{}) = {} is not zero", h + j, h + i, kr.q(i, h + j, h + i)),
        });
    }
    for e in 0..=d {
        if e == h + i - j {
            continue;
        }
        let product = kr.q(j, h + i, e) * kr.q(i - j, h + j, e);
        if !kr.is_zero(product) {
            return Err(Error::HypothesisStep {
                step: "isthmus",
                detail: format!(
                    "edge index {e} ≠ {} carries weight q({j},{},{e})·q({},{},{e}) = {product}",
                    h + i - j,
                    h + i,
                    i - j,
                    h + j
                ),
            });
        }
    }
    if kr.is_zero(kr.q(j, i - j, i)) {
        return Err(Error::HypothesisStep {
            step: "pinch",
            detail: format!("q({j},{},{i}) vanishes; the pinch step divides by it", i - j),
        });
    }

    // The prism whose vanishing carries the conclusion: inner triangle at
    // indices (i−j, h+i−j, j), spokes (i, h+j, h+i), outer triangle
    // (h+j, h+i+j, j).
    let prism = eval_shape(
        6,
        &[
            (3, 4, kr.e(i - j)),
            (4, 5, kr.e(h + i - j)),
            (3, 5, kr.e(j)),
            (0, 3, kr.e(i)),
            (1, 4, kr.e(h + j)),
            (2, 5, kr.e(h + i)),
            (0, 1, kr.e(h + j)),
            (0, 2, kr.e(h + i + j)),
            (1, 2, kr.e(j)),
        ],
        &[],
        ctx,
    )?;
    let prism_residual = prism.scalar()?.norm();

    let conclusion = kr.q(j, h + j, h + j).norm();
    Ok(vec![
        CaseRecord::new("prism", "0", format!("{prism_residual:.3e}"), prism_residual, bound),
        CaseRecord::new(
            "conclusion",
            format!("q({j},{},{}) = 0", h + j, h + j),
            format!("{conclusion:.3e}"),
            conclusion,
            bound,
        ),
    ])
}

fn two_orderings_cases(
    scheme: &AssociationScheme,
    kr: &OrderedKrein,
    ctx: &EvalContext,
    [h, i, j, k, l, m]: [usize; 6],
    bound: f64,
) -> Result<Vec<CaseRecord>> {
    let d = scheme.d();
    for (name, idx) in [("h", h), ("i", i), ("j", j), ("k", k), ("l", l), ("m", m)] {
        if idx > d {
            return Err(Error::Range(format!("index {name} = {idx} exceeds d = {d}")));
        }
    }
    if kr.is_zero(kr.q(i, j, h)) {
        return Err(Error::HypothesisStep {
            step: "support",
            detail: format!("q({i},{j},{h}) vanishes; the tetrahedron has no core"),
        });
    }
    for e in 0..=d {
        if e != l && !kr.is_zero(kr.q(h, m, e) * kr.q(i, k, e)) {
            return Err(Error::HypothesisStep {
                step: "isthmus-l",
                detail: format!("edge index {e} ≠ {l} carries weight on both sides"),
            });
        }
        if e != m && !kr.is_zero(kr.q(h, l, e) * kr.q(j, k, e)) {
            return Err(Error::HypothesisStep {
                step: "isthmus-m",
                detail: format!("edge index {e} ≠ {m} carries weight on both sides"),
            });
        }
    }

    let n = scheme.n() as f64;
    // θ: the tripled edge carrying E_h, E_i, E_j.
    let theta = eval_shape(
        2,
        &[(0, 1, kr.e(h)), (0, 1, kr.e(i)), (0, 1, kr.e(j))],
        &[],
        ctx,
    )?
    .scalar()?;

    // The order-0 tetrahedron.
    let k4 = eval_shape(
        4,
        &[
            (0, 1, kr.e(h)),
            (0, 2, kr.e(i)),
            (0, 3, kr.e(j)),
            (1, 2, kr.e(l)),
            (1, 3, kr.e(m)),
            (2, 3, kr.e(k)),
        ],
        &[],
        ctx,
    )?
    .scalar()?;

    // Route 1: collapse the isthmus at l, then pinch.
    let c1 = eval_shape(
        3,
        &[
            (0, 1, kr.e(h)),
            (1, 0, kr.e(i)),
            (2, 0, kr.e(j)),
            (2, 1, kr.e(m)),
            (1, 2, kr.e(k)),
        ],
        &[],
        ctx,
    )?
    .scalar()?;
    let r1 = kr.q(k, m, j) / n * theta;

    // Route 2: collapse at m instead.
    let c2 = eval_shape(
        3,
        &[
            (0, 1, kr.e(h)),
            (1, 0, kr.e(j)),
            (2, 0, kr.e(i)),
            (2, 1, kr.e(l)),
            (1, 2, kr.e(k)),
        ],
        &[],
        ctx,
    )?
    .scalar()?;
    let r2 = kr.q(k, l, i) / n * theta;

    let conclusion = (kr.q(k, l, i) - kr.q(k, m, j)).norm();
    let record = |id: &str, value: f64| {
        CaseRecord::new(id, "0", format!("{value:.3e}"), value, bound)
    };
    Ok(vec![
        record("route1-collapse", (k4 - c1).norm()),
        record("route1-pinch", (c1 - r1).norm()),
        record("route2-collapse", (k4 - c2).norm()),
        record("route2-pinch", (c2 - r2).norm()),
        CaseRecord::new(
            "conclusion",
            format!("q({k},{l},{i}) = q({k},{m},{j})"),
            format!("{conclusion:.3e}"),
            conclusion,
            bound,
        ),
    ])
}

/// All `(h, i, j)` tuples of the scheme (in its natural eigenspace
/// ordering) satisfying the hypotheses of the [`ProofChain::Suzuki`]
/// chain.
pub fn suzuki_admissible(scheme: &AssociationScheme) -> Vec<(usize, usize, usize)> {
    let d = scheme.d();
    let identity: Vec<usize> = (0..=d).collect();
    let kr = OrderedKrein::new(scheme, &identity);
    let mut found = Vec::new();
    for h in 1..=d {
        for i in 1..=d {
            for j in 1..=i {
                if h + i + j > d {
                    continue;
                }
                if !kr.is_zero(kr.q(i, h + j, h + i)) {
                    continue;
                }
                let isthmus = (0..=d).all(|e| {
                    e == h + i - j || kr.is_zero(kr.q(j, h + i, e) * kr.q(i - j, h + j, e))
                });
                if !isthmus {
                    continue;
                }
                if kr.is_zero(kr.q(j, i - j, i)) {
                    continue;
                }
                found.push((h, i, j));
            }
        }
    }
    found
}

/// All `(h, i, j, k, l, m)` tuples (natural ordering) satisfying the
/// hypotheses of [`ProofChain::SuzukiTwoOrderings`].
pub fn two_ordering_admissible(scheme: &AssociationScheme) -> Vec<[usize; 6]> {
    let d = scheme.d();
    let identity: Vec<usize> = (0..=d).collect();
    let kr = OrderedKrein::new(scheme, &identity);
    let mut found = Vec::new();
    for h in 0..=d {
        for i in 0..=d {
            for j in 0..=d {
                if kr.is_zero(kr.q(i, j, h)) {
                    continue;
                }
                for k in 0..=d {
                    for l in 0..=d {
                        for m in 0..=d {
                            let isthmus_l = (0..=d)
                                .all(|e| e == l || kr.is_zero(kr.q(h, m, e) * kr.q(i, k, e)));
                            if !isthmus_l {
                                continue;
                            }
                            let isthmus_m = (0..=d)
                                .all(|e| e == m || kr.is_zero(kr.q(h, l, e) * kr.q(j, k, e)));
                            if !isthmus_m {
                                continue;
                            }
                            found.push([h, i, j, k, l, m]);
                        }
                    }
                }
            }
        }
    }
    found
}
