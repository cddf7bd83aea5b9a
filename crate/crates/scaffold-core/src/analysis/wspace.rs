//! W-spaces: the span of all scaffolds on a fixed rooted diagram as the
//! edge weights range over the scheme's basis, and the membership test
//! behind the 4-vertex condition.

use num_complex::Complex64;
use num_traits::Zero;

use crate::algebra::{span_rank, tensor_inner, Tensor, Tolerance};
use crate::scaffold::{evaluate, Diagram, EvalContext, WeightRef};
use crate::schemes::{AssociationScheme, PARAM_ZERO};
use crate::{Error, Result};

use super::build_diagram;

/// Maximum number of basis-weight assignments a W-space enumeration may
/// visit.
pub const MAX_WSPACE_COMBOS: f64 = 1e6;

/// Named rooted diagram shapes whose W-space rank is of interest, plus an
/// escape hatch for arbitrary diagrams.
///
/// The named shapes fix both the edge list and the root list; weights are
/// ignored (the enumeration assigns every basis combination). `Path(m)`
/// is the two-root path with `m` edges; `Star(m)` the `m`-root star with
/// a hollow centre (`Star(3)` is `Wye`). For `Custom` the diagram's own
/// roots are used and its edge weights are overwritten per assignment.
#[derive(Debug, Clone)]
pub enum WShape {
    Edge,
    Triangle,
    Wye,
    K4,
    Tristar,
    Path(usize),
    Star(usize),
    Custom(Diagram),
}

impl WShape {
    pub fn name(&self) -> String {
        match self {
            WShape::Edge => "edge".into(),
            WShape::Triangle => "triangle".into(),
            WShape::Wye => "wye".into(),
            WShape::K4 => "k4".into(),
            WShape::Tristar => "tristar".into(),
            WShape::Path(m) => format!("path_{m}"),
            WShape::Star(m) => format!("star_{m}"),
            WShape::Custom(_) => "custom".into(),
        }
    }

    /// Node count, edges, and roots of a named shape.
    fn template(&self) -> Result<(usize, Vec<(usize, usize)>, Vec<usize>)> {
        Ok(match self {
            WShape::Edge => (2, vec![(0, 1)], vec![0, 1]),
            WShape::Triangle => (3, vec![(1, 2), (0, 2), (0, 1)], vec![0, 1, 2]),
            WShape::Wye => (4, vec![(0, 3), (1, 3), (2, 3)], vec![0, 1, 2]),
            WShape::K4 => (
                4,
                vec![(1, 2), (0, 2), (0, 1), (0, 3), (1, 3), (2, 3)],
                vec![0, 1, 2],
            ),
            WShape::Tristar => (
                6,
                vec![(0, 3), (1, 4), (2, 5), (3, 4), (4, 5), (3, 5)],
                vec![0, 1, 2],
            ),
            WShape::Path(m) => {
                if *m == 0 {
                    return Err(Error::Range("path shape needs at least one edge".into()));
                }
                (*m + 1, (0..*m).map(|i| (i, i + 1)).collect(), vec![0, *m])
            }
            WShape::Star(m) => {
                if *m == 0 {
                    return Err(Error::Range("star shape needs at least one leg".into()));
                }
                (*m + 1, (0..*m).map(|i| (i, *m)).collect(), (0..*m).collect())
            }
            WShape::Custom(_) => unreachable!("custom shapes carry their own diagram"),
        })
    }
}

impl std::str::FromStr for WShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if let Some(m) = lower.strip_prefix("path_") {
            let m: usize =
                m.parse().map_err(|_| Error::Range(format!("bad path length in `{s}`")))?;
            return Ok(WShape::Path(m));
        }
        if let Some(m) = lower.strip_prefix("star_") {
            let m: usize =
                m.parse().map_err(|_| Error::Range(format!("bad star size in `{s}`")))?;
            return Ok(WShape::Star(m));
        }
        match lower.as_str() {
            "edge" => Ok(WShape::Edge),
            "triangle" => Ok(WShape::Triangle),
            "wye" => Ok(WShape::Wye),
            "k4" => Ok(WShape::K4),
            "tristar" => Ok(WShape::Tristar),
            other => Err(Error::Range(format!("unknown W-space shape `{other}`"))),
        }
    }
}

/// Dimension of the W-space of a shape over a scheme: the span rank of
/// the scaffold tensors obtained by assigning every combination of
/// relation-basis weights to the shape's edges.
///
/// For `Triangle` and `Wye` on symmetric schemes the computation also
/// verifies the known orthogonal bases as a self-check: the triangle
/// family at tuples with `p_ij^k > 0` must be pairwise orthogonal with
/// squared norms `n·v_k·p_ij^k`, and the idempotent-weighted wye family
/// at tuples with `q_ij^k ≠ 0` pairwise orthogonal with squared norms
/// `m_i·q_jk^i/n`. Enumerations beyond [`MAX_WSPACE_COMBOS`] assignments
/// are rejected as `too-large`.
pub fn wspace_rank(scheme: &AssociationScheme, shape: &WShape, tol: &Tolerance) -> Result<usize> {
    let d = scheme.d();
    let ctx = EvalContext::new(scheme.clone());

    let (nodes, edges, roots): (usize, Vec<(usize, usize)>, Vec<usize>) = match shape {
        WShape::Custom(diag) => (
            diag.node_count(),
            diag.edges().iter().map(|e| (e.tail, e.head)).collect(),
            diag.roots().to_vec(),
        ),
        named => named.template()?,
    };

    let combos = ((d + 1) as f64).powi(edges.len() as i32);
    if combos > MAX_WSPACE_COMBOS {
        return Err(Error::TooLarge(format!(
            "{} weight assignments for {} edges over d+1={} classes",
            combos,
            edges.len(),
            d + 1
        )));
    }

    let mut assignment = vec![0usize; edges.len()];
    let mut tensors = Vec::with_capacity(combos as usize);
    loop {
        let weighted: Vec<(usize, usize, WeightRef)> = edges
            .iter()
            .zip(&assignment)
            .map(|(&(a, b), &w)| (a, b, WeightRef::basis_a(w)))
            .collect();
        tensors.push(evaluate(&build_diagram(nodes, &weighted, &roots), &ctx)?);
        // Mixed-radix increment over the assignment vector.
        let mut pos = 0;
        loop {
            if pos == assignment.len() {
                break;
            }
            assignment[pos] += 1;
            if assignment[pos] <= d {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
        if pos == assignment.len() {
            break;
        }
    }

    if scheme.is_symmetric() {
        match shape {
            WShape::Triangle => verify_triangle_basis(scheme, &tensors, tol)?,
            WShape::Wye => verify_wye_basis(scheme, &ctx, tol)?,
            _ => {}
        }
    }

    span_rank(&tensors, tol)
}

/// Orthogonality self-check for the triangle family: the enumerated
/// tensors at tuples with `p_ij^k > 0` form an orthogonal set with
/// squared norms `n·v_k·p_ij^k`.
fn verify_triangle_basis(
    scheme: &AssociationScheme,
    tensors: &[Tensor],
    tol: &Tolerance,
) -> Result<()> {
    let d = scheme.d();
    let n = scheme.n() as f64;
    // Enumeration order above: assignment[0] is the (1,2) edge, [1] the
    // (0,2) edge, [2] the (0,1) edge, least-significant first.
    let index = |i: usize, j: usize, k: usize| i + (d + 1) * (j + (d + 1) * k);
    let mut family = Vec::new();
    for k in 0..=d {
        for j in 0..=d {
            for i in 0..=d {
                if !scheme.p(i, j, k).is_zero() {
                    family.push((i, j, k));
                }
            }
        }
    }
    for (a, &(i, j, k)) in family.iter().enumerate() {
        for &(r, s, t) in &family[a..] {
            let lhs = tensor_inner(&tensors[index(i, j, k)], &tensors[index(r, s, t)])?;
            let rhs = if (i, j, k) == (r, s, t) {
                n * scheme.valency(k) as f64 * scheme.p_u64(i, j, k) as f64
            } else {
                0.0
            };
            let bound = tol.bound(rhs.abs().max(1.0));
            if (lhs - Complex64::new(rhs, 0.0)).norm() > bound {
                return Err(Error::Hypothesis(format!(
                    "triangle basis self-check failed at ({i},{j},{k})·({r},{s},{t}): \
                     inner product {lhs}, expected {rhs}"
                )));
            }
        }
    }
    Ok(())
}

/// Orthogonality self-check for the idempotent-weighted wye family at
/// tuples with nonzero Krein parameters: squared norms `m_i·q_jk^i/n`.
fn verify_wye_basis(
    scheme: &AssociationScheme,
    ctx: &EvalContext,
    tol: &Tolerance,
) -> Result<()> {
    let d = scheme.d();
    let n = scheme.n() as f64;
    let mut qscale = 1.0_f64;
    for i in 0..=d {
        for j in 0..=d {
            for k in 0..=d {
                qscale = qscale.max(scheme.q(i, j, k).norm());
            }
        }
    }
    let wye = |i: usize, j: usize, k: usize| -> Result<Tensor> {
        evaluate(
            &build_diagram(
                4,
                &[
                    (0, 3, WeightRef::basis_e(i)),
                    (1, 3, WeightRef::basis_e(j)),
                    (2, 3, WeightRef::basis_e(k)),
                ],
                &[0, 1, 2],
            ),
            ctx,
        )
    };
    let mut family = Vec::new();
    for i in 0..=d {
        for j in 0..=d {
            for k in 0..=d {
                // Tensor at legs (E_i, E_j, E_k) has squared norm
                // m_i·q_jk^i/n; it is nonzero exactly on the q-support.
                if scheme.q(j, k, i).norm() > PARAM_ZERO * qscale {
                    family.push((i, j, k));
                }
            }
        }
    }
    let tensors: Vec<Tensor> =
        family.iter().map(|&(i, j, k)| wye(i, j, k)).collect::<Result<_>>()?;
    for a in 0..family.len() {
        for b in a..family.len() {
            let (i, j, k) = family[a];
            let lhs = tensor_inner(&tensors[a], &tensors[b])?;
            let rhs = if a == b {
                scheme.multiplicity(i) as f64 * scheme.q(j, k, i).re / n
            } else {
                0.0
            };
            let bound = tol.bound(rhs.abs().max(1.0));
            if (lhs - Complex64::new(rhs, 0.0)).norm() > bound {
                let (r, s, t) = family[b];
                return Err(Error::Hypothesis(format!(
                    "wye basis self-check failed at ({i},{j},{k})·({r},{s},{t}): \
                     inner product {lhs}, expected {rhs}"
                )));
            }
        }
    }
    Ok(())
}

/// Outcome of the 4-vertex membership sweep.
#[derive(Debug, Clone)]
pub struct FourVertexResult {
    /// True when every enumerated tensor stayed inside span{A_0..A_d}.
    pub pass: bool,
    /// The first diagram whose value left the span, if any.
    pub witness: Option<Diagram>,
    /// Number of (edge set, weight assignment) pairs evaluated.
    pub checked: usize,
}

/// The 4-vertex condition: every order-2 scaffold on at most four nodes
/// with two roots and relation-basis weights lies in the span of the
/// relation matrices.
///
/// Edge sets range over the six unordered node pairs; sets that touch the
/// second hollow node but not the first are skipped as relabelings of a
/// set already visited. Membership is a span-rank test at the given
/// tolerance against the relation matrices. The sweep stops at the first
/// violation and returns the offending diagram.
pub fn four_vertex_condition(scheme: &AssociationScheme, tol: &Tolerance) -> Result<FourVertexResult> {
    let d = scheme.d();
    let n = scheme.n();
    let ctx = EvalContext::new(scheme.clone());

    let base: Vec<Tensor> = (0..=d)
        .map(|i| {
            Tensor::from_data(n, 2, scheme.relation(i).to_cmatrix().data().to_vec())
        })
        .collect::<Result<_>>()?;
    let rank_base = span_rank(&base, tol)?;

    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let mut checked = 0usize;
    for mask in 1u32..64 {
        let edges: Vec<(usize, usize)> =
            (0..6).filter(|b| mask >> b & 1 == 1).map(|b| pairs[b]).collect();
        let touches = |node: usize| edges.iter().any(|&(a, b)| a == node || b == node);
        if touches(3) && !touches(2) {
            continue; // the 2↔3 relabel was already enumerated
        }
        let mut assignment = vec![0usize; edges.len()];
        loop {
            let weighted: Vec<(usize, usize, WeightRef)> = edges
                .iter()
                .zip(&assignment)
                .map(|(&(a, b), &w)| (a, b, WeightRef::basis_a(w)))
                .collect();
            let diag = build_diagram(4, &weighted, &[0, 1]);
            let value = evaluate(&diag, &ctx)?;
            checked += 1;
            let mut with = base.clone();
            with.push(value);
            if span_rank(&with, tol)? > rank_base {
                return Ok(FourVertexResult { pass: false, witness: Some(diag), checked });
            }
            let mut pos = 0;
            loop {
                if pos == assignment.len() {
                    break;
                }
                assignment[pos] += 1;
                if assignment[pos] <= d {
                    break;
                }
                assignment[pos] = 0;
                pos += 1;
            }
            if pos == assignment.len() {
                break;
            }
        }
    }
    Ok(FourVertexResult { pass: true, witness: None, checked })
}
