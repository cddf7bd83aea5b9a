//! Structured scheme reports.
//!
//! [`scheme_report`] recomputes every documented invariant of a scheme from
//! scratch — eigenmatrix orthogonality, the intersection-number
//! reconstruction `A_i A_j = Σ_k p_ij^k A_k`, the recurrence
//! `Σ_ℓ p_hi^ℓ p_ℓj^k = Σ_r p_hr^k p_ij^r`, and the transpose pairings of
//! both bases — and bundles the residuals with the parameter tables. All
//! floats are rounded to twelve significant digits so serialized reports
//! are byte-stable across runs.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::CMatrix;
use crate::report::round_sig;
use crate::Result;

use super::{AssociationScheme, PARAM_ZERO};

/// A complex value in a report, rounded for stable serialization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEntry {
    pub re: f64,
    pub im: f64,
}

impl ComplexEntry {
    fn new(z: Complex64) -> Self {
        ComplexEntry { re: round_sig(z.re), im: round_sig(z.im) }
    }
}

/// Residuals of the scheme invariants, all expected to be tiny.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeResiduals {
    /// Max entry of `PQ − nI`.
    pub pq_identity: f64,
    /// Max over `i, j` of `|m_j P_ji − v_i conj(Q_ij)|`.
    pub row_orthogonality: f64,
    /// Max entry of `Σ_j E_j − I`.
    pub idempotent_sum: f64,
    /// Max integer deviation of `A_i A_j − Σ_k p_ij^k A_k` (exactly 0 for
    /// a valid scheme).
    pub p_reconstruction: f64,
    /// Max integer deviation in `Σ_ℓ p_hi^ℓ p_ℓj^k − Σ_r p_hr^k p_ij^r`
    /// (exactly 0 for a valid scheme).
    pub p_recurrence: f64,
    /// Max integer deviation of `A_i^⊤ − A_{i'}` over the transpose pairing.
    pub transpose_a: f64,
    /// Max entry of `E_j^⊤ − E_{j'}` over the transpose pairing.
    pub transpose_e: f64,
}

/// Everything one usually wants to know about a scheme, in one record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeReport {
    /// Vertex count `|X|`.
    pub n: usize,
    /// Class count.
    pub d: usize,
    pub symmetric: bool,
    /// Valencies `v_i`.
    pub valencies: Vec<u64>,
    /// Multiplicities `m_j`.
    pub multiplicities: Vec<u64>,
    /// Transpose pairing of the relations: `A_i^⊤ = A_{conj_a[i]}`.
    pub conj_a: Vec<usize>,
    /// Transpose pairing of the idempotents: `E_j^⊤ = E_{conj_e[j]}`.
    pub conj_e: Vec<usize>,
    /// First eigenmatrix, `eigenmatrix_p[j][i]` = eigenvalue of `A_i` on
    /// eigenspace `j`.
    pub eigenmatrix_p: Vec<Vec<ComplexEntry>>,
    /// Second eigenmatrix, `PQ = nI`.
    pub eigenmatrix_q: Vec<Vec<ComplexEntry>>,
    /// Intersection numbers, `p[i][j][k]` = `p_ij^k`.
    pub p: Vec<Vec<Vec<u64>>>,
    /// Krein parameters, `q[i][j][k]` = `q_ij^k`.
    pub q: Vec<Vec<Vec<ComplexEntry>>>,
    /// Count of nonzero intersection numbers.
    pub nonzero_p: usize,
    /// Count of Krein parameters with magnitude above the zero threshold.
    pub nonzero_q: usize,
    pub residuals: SchemeResiduals,
}

/// Recompute all invariants of a scheme and package them as a report.
pub fn scheme_report(scheme: &AssociationScheme) -> Result<SchemeReport> {
    let n = scheme.n();
    let d = scheme.d();

    let mut nonzero_p = 0usize;
    let mut p = vec![vec![vec![0u64; d + 1]; d + 1]; d + 1];
    let mut q = vec![vec![vec![ComplexEntry { re: 0.0, im: 0.0 }; d + 1]; d + 1]; d + 1];
    let mut nonzero_q = 0usize;
    for i in 0..=d {
        for j in 0..=d {
            for k in 0..=d {
                let pv = scheme.p_u64(i, j, k);
                p[i][j][k] = pv;
                nonzero_p += usize::from(pv > 0);
                let qv = scheme.q(i, j, k);
                q[i][j][k] = ComplexEntry::new(qv);
                nonzero_q += usize::from(qv.norm() > PARAM_ZERO);
            }
        }
    }

    // PQ = nI and row orthogonality.
    let pq = scheme.pmat().product(scheme.qmat())?;
    let ni = CMatrix::identity(d + 1).scale(Complex64::new(n as f64, 0.0));
    let pq_identity = pq.max_diff(&ni)?;
    let mut row_orthogonality = 0.0f64;
    for j in 0..=d {
        for i in 0..=d {
            let lhs = scheme.theta(j, i) * Complex64::new(scheme.multiplicity(j) as f64, 0.0);
            let rhs = scheme.qmat().get(i, j).conj() * Complex64::new(scheme.valency(i) as f64, 0.0);
            row_orthogonality = row_orthogonality.max((lhs - rhs).norm());
        }
    }

    // Σ_j E_j = I.
    let mut esum = CMatrix::zeros(n);
    for ej in scheme.idempotents() {
        esum = esum.add(ej)?;
    }
    let idempotent_sum = esum.max_diff(&CMatrix::identity(n))?;

    // A_i A_j = Σ_k p_ij^k A_k, exact.
    let mut p_reconstruction = BigInt::zero();
    for i in 0..=d {
        for j in 0..=d {
            let prod = scheme.relation(i).product(scheme.relation(j))?;
            for x in 0..n {
                for y in 0..n {
                    let k = scheme.relation_of(x, y);
                    let diff = (prod.get(x, y) - scheme.p(i, j, k)).abs();
                    if diff > p_reconstruction {
                        p_reconstruction = diff;
                    }
                }
            }
        }
    }

    // Σ_ℓ p_hi^ℓ p_ℓj^k = Σ_r p_hr^k p_ij^r, exact.
    let mut p_recurrence = BigInt::zero();
    for h in 0..=d {
        for i in 0..=d {
            for j in 0..=d {
                for k in 0..=d {
                    let lhs: BigInt = (0..=d).map(|l| scheme.p(h, i, l) * scheme.p(l, j, k)).sum();
                    let rhs: BigInt = (0..=d).map(|r| scheme.p(h, r, k) * scheme.p(i, j, r)).sum();
                    let diff = (lhs - rhs).abs();
                    if diff > p_recurrence {
                        p_recurrence = diff;
                    }
                }
            }
        }
    }

    // Transpose pairings.
    let mut transpose_a = BigInt::zero();
    for i in 0..=d {
        let t = scheme.relation(i).transpose();
        let diff = t.max_abs_diff(scheme.relation(scheme.conj_a(i)))?;
        if diff > transpose_a {
            transpose_a = diff;
        }
    }
    let mut transpose_e = 0.0f64;
    for j in 0..=d {
        let t = scheme.idempotent(j).transpose();
        transpose_e = transpose_e.max(t.max_diff(scheme.idempotent(scheme.conj_e(j)))?);
    }

    let cmat_entries = |m: &CMatrix| -> Vec<Vec<ComplexEntry>> {
        (0..=d).map(|r| (0..=d).map(|c| ComplexEntry::new(m.get(r, c))).collect()).collect()
    };

    Ok(SchemeReport {
        n,
        d,
        symmetric: scheme.is_symmetric(),
        valencies: scheme.valencies().to_vec(),
        multiplicities: scheme.multiplicities().iter().map(|&m| m as u64).collect(),
        conj_a: (0..=d).map(|i| scheme.conj_a(i)).collect(),
        conj_e: (0..=d).map(|j| scheme.conj_e(j)).collect(),
        eigenmatrix_p: cmat_entries(scheme.pmat()),
        eigenmatrix_q: cmat_entries(scheme.qmat()),
        p,
        q,
        nonzero_p,
        nonzero_q,
        residuals: SchemeResiduals {
            pq_identity: round_sig(pq_identity),
            row_orthogonality: round_sig(row_orthogonality),
            idempotent_sum: round_sig(idempotent_sum),
            p_reconstruction: p_reconstruction.to_f64().unwrap_or(f64::INFINITY),
            p_recurrence: p_recurrence.to_f64().unwrap_or(f64::INFINITY),
            transpose_a: transpose_a.to_f64().unwrap_or(f64::INFINITY),
            transpose_e: round_sig(transpose_e),
        },
    })
}

impl SchemeReport {
    /// Serialize as pretty-printed JSON (field order fixed, floats already
    /// rounded, so the output is byte-stable).
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Render a human-readable table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "scheme: n = {}, d = {}, {}\n",
            self.n,
            self.d,
            if self.symmetric { "symmetric" } else { "non-symmetric" }
        ));
        out.push_str(&format!("valencies      v = {:?}\n", self.valencies));
        out.push_str(&format!("multiplicities m = {:?}\n", self.multiplicities));
        if self.conj_a.iter().enumerate().any(|(i, &ip)| i != ip) {
            out.push_str(&format!("transpose maps: A {:?}, E {:?}\n", self.conj_a, self.conj_e));
        }
        out.push_str("eigenmatrix P (rows = eigenspaces):\n");
        out.push_str(&fmt_cmatrix(&self.eigenmatrix_p));
        out.push_str("eigenmatrix Q:\n");
        out.push_str(&fmt_cmatrix(&self.eigenmatrix_q));
        out.push_str(&format!(
            "nonzero intersection numbers: {}   nonzero Krein parameters: {}\n",
            self.nonzero_p, self.nonzero_q
        ));
        let r = &self.residuals;
        out.push_str(&format!(
            "residuals: PQ-nI {:.2e}; orthogonality {:.2e}; sum(E)-I {:.2e}; \
             p-reconstruction {}; p-recurrence {}; A-transpose {}; E-transpose {:.2e}\n",
            r.pq_identity,
            r.row_orthogonality,
            r.idempotent_sum,
            r.p_reconstruction,
            r.p_recurrence,
            r.transpose_a,
            r.transpose_e
        ));
        out
    }
}

fn fmt_complex(z: &ComplexEntry) -> String {
    let fmt_re = |x: f64| {
        let s = format!("{:.6}", x);
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s.is_empty() || s == "-" { "0".to_string() } else { s.to_string() }
    };
    if z.im.abs() <= 1e-9 {
        fmt_re(z.re)
    } else if z.im > 0.0 {
        format!("{}+{}i", fmt_re(z.re), fmt_re(z.im))
    } else {
        format!("{}-{}i", fmt_re(z.re), fmt_re(-z.im))
    }
}

fn fmt_cmatrix(rows: &[Vec<ComplexEntry>]) -> String {
    let cells: Vec<Vec<String>> =
        rows.iter().map(|row| row.iter().map(fmt_complex).collect()).collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    let mut out = String::new();
    for row in &cells {
        out.push_str("  [");
        for (idx, cell) in row.iter().enumerate() {
            if idx > 0 {
                out.push(' ');
            }
            out.push_str(&format!("{cell:>width$}"));
        }
        out.push_str("]\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Tolerance;
    use crate::schemes::builtin;

    #[test]
    fn complete_graph_report_is_clean() {
        let scheme = builtin("complete", &[4]).unwrap();
        let report = scheme_report(&scheme).unwrap();
        assert_eq!(report.n, 4);
        assert_eq!(report.d, 1);
        assert_eq!(report.valencies, vec![1, 3]);
        assert_eq!(report.p[1][1][1], 2);
        assert!(report.residuals.pq_identity <= 1e-12);
        assert_eq!(report.residuals.p_reconstruction, 0.0);
        assert_eq!(report.residuals.p_recurrence, 0.0);
        assert_eq!(report.residuals.transpose_a, 0.0);
    }

    #[test]
    fn report_json_roundtrips() {
        let scheme = AssociationScheme::from_graph(
            &crate::algebra::IntMatrix::from_fn(5, |x, y| {
                i64::from((x + 1) % 5 == y || (y + 1) % 5 == x)
            }),
            &Tolerance::default(),
            7,
        )
        .unwrap();
        let report = scheme_report(&scheme).unwrap();
        let json = report.to_json().unwrap();
        let back: SchemeReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_json().unwrap(), json);
        assert_eq!(back.nonzero_p, 13);
        assert_eq!(back.nonzero_q, 13);
    }
}
