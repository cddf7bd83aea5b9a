//! P-polynomial (metric) and Q-polynomial (cometric) structure.

use crate::{Error, Result};

use super::{AssociationScheme, PARAM_ZERO};

/// Which parameter family the polynomial conditions are checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyKind {
    /// P-polynomial: conditions on the intersection numbers `p_ij^k`.
    Metric,
    /// Q-polynomial: conditions on the Krein parameters `q_ij^k`.
    Cometric,
}

impl PolyKind {
    fn name(self) -> &'static str {
        match self {
            PolyKind::Metric => "metric",
            PolyKind::Cometric => "cometric",
        }
    }
}

/// The tridiagonal parameter rows of a valid polynomial ordering.
///
/// For a metric ordering these are the intersection array entries
/// `a_j = p_{1,j}^j`, `b_j = p_{1,j+1}^j`, `c_j = p_{1,j-1}^j`; for a
/// cometric ordering the starred analogues `a_j*`, `b_j*`, `c_j*` built
/// from the Krein parameters. Indices are *logical*: position `j` refers
/// to the `j`-th class of the reordered scheme.
#[derive(Debug, Clone)]
pub struct PolynomialStructure {
    pub kind: PolyKind,
    pub ordering: Vec<usize>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

/// Validate an ordering as metric or cometric and extract its parameter
/// rows.
///
/// The ordering permutes classes (metric) or eigenspaces (cometric) and
/// must fix 0. The conditions follow the classical definition: the
/// structure constant `s_{ij}^k` of the reordered scheme must vanish
/// whenever one of `i, j, k` exceeds the sum of the other two, and must be
/// strictly positive whenever one equals the sum of the other two. A
/// violation is reported with the offending (logical) triple.
pub fn polynomial_structure(
    scheme: &AssociationScheme,
    kind: PolyKind,
    ordering: &[usize],
) -> Result<PolynomialStructure> {
    let d = scheme.d();
    if ordering.len() != d + 1 {
        return Err(Error::Range(format!(
            "ordering has {} entries, scheme has {} classes",
            ordering.len(),
            d + 1
        )));
    }
    if ordering[0] != 0 {
        return Err(Error::Range("ordering must fix position 0".into()));
    }
    let mut seen = vec![false; d + 1];
    for &o in ordering {
        if o > d || seen[o] {
            return Err(Error::Range(format!("ordering {ordering:?} is not a permutation")));
        }
        seen[o] = true;
    }

    // Structure constant in logical indices.
    let s = |i: usize, j: usize, k: usize| -> f64 {
        let (pi, pj, pk) = (ordering[i], ordering[j], ordering[k]);
        match kind {
            PolyKind::Metric => scheme.p_u64(pi, pj, pk) as f64,
            PolyKind::Cometric => {
                let z = scheme.q(pi, pj, pk);
                // Krein parameters of valid schemes are real nonnegative;
                // keep the magnitude but let genuine negatives fail the
                // positivity test below.
                if z.re < 0.0 {
                    z.re
                } else {
                    z.norm()
                }
            }
        }
    };

    let fail = |i: usize, j: usize, k: usize, detail: String| -> Error {
        Error::NotPolynomial { kind: kind.name(), ordering: ordering.to_vec(), i, j, k, detail }
    };

    for i in 0..=d {
        for j in 0..=d {
            for k in 0..=d {
                let val = s(i, j, k);
                let exceeds = i > j + k || j > i + k || k > i + j;
                let equals = i == j + k || j == i + k || k == i + j;
                if exceeds && val.abs() > PARAM_ZERO {
                    return Err(fail(
                        i,
                        j,
                        k,
                        format!("constant {val:.6e} must vanish: one index exceeds the sum of the others"),
                    ));
                }
                if !exceeds && equals && val <= PARAM_ZERO {
                    return Err(fail(
                        i,
                        j,
                        k,
                        format!("constant {val:.6e} must be positive: one index equals the sum of the others"),
                    ));
                }
            }
        }
    }

    let mut a = Vec::with_capacity(d + 1);
    let mut b = Vec::with_capacity(d + 1);
    let mut c = Vec::with_capacity(d + 1);
    for j in 0..=d {
        a.push(s(1, j, j));
        b.push(if j < d { s(1, j + 1, j) } else { 0.0 });
        c.push(if j > 0 { s(1, j - 1, j) } else { 0.0 });
    }
    Ok(PolynomialStructure { kind, ordering: ordering.to_vec(), a, b, c })
}
