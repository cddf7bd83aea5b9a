//! Spin-model pairs: matrices satisfying the type I–III link-invariance
//! relations, and the cyclic (Potts-like) family that realizes them on
//! odd cycles.

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{CMatrix, Tolerance};
use crate::{Error, Result};

/// Residuals of the type I–III spin-model relations for a matrix pair,
/// together with the estimated loop constants.
#[derive(Debug, Clone, Serialize)]
pub struct SpinModelReport {
    /// Ground-set size.
    pub n: usize,
    /// Diagonal constant: `W⁺` must be `α` on the diagonal.
    pub alpha: Complex64,
    /// Loop constant `D`, estimated as `α` times the mean row sum of `W⁺`.
    pub d_value: Complex64,
    /// max |W⁺[a,a] − α|.
    pub residual_diag_plus: f64,
    /// max |W⁻[a,a] − 1/α|.
    pub residual_diag_minus: f64,
    /// max |Σ_b W⁺[a,b] − D/α| over rows.
    pub residual_row_plus: f64,
    /// max |Σ_a W⁺[a,b] − D/α| over columns.
    pub residual_col_plus: f64,
    /// max |Σ_b W⁻[a,b] − n·α/D| over rows.
    pub residual_row_minus: f64,
    /// max |Σ_a W⁻[a,b] − n·α/D| over columns.
    pub residual_col_minus: f64,
    /// Type II as entrywise inverses: max |W⁺[a,b]·W⁻[b,a] − 1|.
    pub residual_type2_hadamard: f64,
    /// Type II as matrix inverses: max |W⁻W⁺ − nI| and |W⁺W⁻ − nI|.
    pub residual_type2_product: f64,
    /// Type III (star–triangle): max over (a,b,c) of
    /// |Σ_x W⁺[x,a]W⁺[x,b]W⁻[c,x] − D·W⁺[a,b]W⁻[b,c]W⁻[c,a]|.
    pub residual_type3: f64,
    /// | |D|² − n |; the loop constant has modulus √n.
    pub residual_modulus: f64,
    /// Bound all residuals are held to.
    pub tolerance: f64,
    /// True when every residual is within the bound.
    pub pass: bool,
}

impl SpinModelReport {
    /// Largest of the recorded residuals.
    pub fn max_residual(&self) -> f64 {
        [
            self.residual_diag_plus,
            self.residual_diag_minus,
            self.residual_row_plus,
            self.residual_col_plus,
            self.residual_row_minus,
            self.residual_col_minus,
            self.residual_type2_hadamard,
            self.residual_type2_product,
            self.residual_type3,
            self.residual_modulus,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// The cyclic spin-model pair on `n` points, `n` odd: `W⁺[a,b] =
/// ω^((a−b)²)` for ω a primitive `n`-th root of unity, and `W⁻` its
/// entrywise transposed inverse.
pub fn cyclic_spin_model(n: usize) -> Result<(CMatrix, CMatrix)> {
    if n % 2 == 0 {
        return Err(Error::Parity(format!(
            "the cyclic spin model needs an odd cycle, got n = {n}"
        )));
    }
    if n < 3 {
        return Err(Error::Range(format!("cycle length must be at least 3, got {n}")));
    }
    let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / n as f64);
    let w_plus = CMatrix::from_fn(n, |a, b| {
        let diff = a as i64 - b as i64;
        omega.powu((diff * diff).rem_euclid(n as i64) as u32)
    })?;
    let w_minus = CMatrix::from_fn(n, |a, b| w_plus.get(b, a).inv())?;
    Ok((w_plus, w_minus))
}

/// Check the type I–III spin-model relations for a matrix pair.
///
/// `α` is estimated from the diagonal of `W⁺` and the loop constant `D`
/// from its row sums; the report records the worst residual of each
/// relation family plus `||D|² − n|`, all held to `tol.bound(n)`.
pub fn spin_model_check(
    w_plus: &CMatrix,
    w_minus: &CMatrix,
    tol: &Tolerance,
) -> Result<SpinModelReport> {
    let n = w_plus.size();
    if w_minus.size() != n {
        return Err(Error::Shape(format!(
            "matrix pair sizes differ: {} vs {}",
            n,
            w_minus.size()
        )));
    }
    let nf = n as f64;

    let alpha = (0..n).map(|a| w_plus.get(a, a)).sum::<Complex64>() / nf;
    if alpha.norm() < 1e-12 {
        return Err(Error::DegenerateSpectrum(
            "diagonal of W⁺ averages to zero; no loop constant".into(),
        ));
    }
    let total: Complex64 = w_plus.data().iter().sum();
    let d_value = alpha * total / nf;
    if d_value.norm() < 1e-12 {
        return Err(Error::DegenerateSpectrum(
            "row sums of W⁺ average to zero; no loop constant".into(),
        ));
    }

    let mut residual_diag_plus = 0.0_f64;
    let mut residual_diag_minus = 0.0_f64;
    for a in 0..n {
        residual_diag_plus = residual_diag_plus.max((w_plus.get(a, a) - alpha).norm());
        residual_diag_minus =
            residual_diag_minus.max((w_minus.get(a, a) - alpha.inv()).norm());
    }

    let row_target = d_value / alpha;
    let dual_target = nf / d_value * alpha;
    let mut residual_row_plus = 0.0_f64;
    let mut residual_col_plus = 0.0_f64;
    let mut residual_row_minus = 0.0_f64;
    let mut residual_col_minus = 0.0_f64;
    for a in 0..n {
        let rp: Complex64 = (0..n).map(|b| w_plus.get(a, b)).sum();
        let cp: Complex64 = (0..n).map(|b| w_plus.get(b, a)).sum();
        let rm: Complex64 = (0..n).map(|b| w_minus.get(a, b)).sum();
        let cm: Complex64 = (0..n).map(|b| w_minus.get(b, a)).sum();
        residual_row_plus = residual_row_plus.max((rp - row_target).norm());
        residual_col_plus = residual_col_plus.max((cp - row_target).norm());
        residual_row_minus = residual_row_minus.max((rm - dual_target).norm());
        residual_col_minus = residual_col_minus.max((cm - dual_target).norm());
    }

    let mut residual_type2_hadamard = 0.0_f64;
    for a in 0..n {
        for b in 0..n {
            let h = w_plus.get(a, b) * w_minus.get(b, a) - Complex64::ONE;
            residual_type2_hadamard = residual_type2_hadamard.max(h.norm());
        }
    }
    let mut residual_type2_product = 0.0_f64;
    for (prod, _) in [(w_minus.product(w_plus)?, "-+"), (w_plus.product(w_minus)?, "+-")] {
        for a in 0..n {
            for b in 0..n {
                let target = if a == b { Complex64::new(nf, 0.0) } else { Complex64::ZERO };
                residual_type2_product =
                    residual_type2_product.max((prod.get(a, b) - target).norm());
            }
        }
    }

    let mut residual_type3 = 0.0_f64;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let lhs: Complex64 = (0..n)
                    .map(|x| w_plus.get(x, a) * w_plus.get(x, b) * w_minus.get(c, x))
                    .sum();
                let rhs =
                    d_value * w_plus.get(a, b) * w_minus.get(b, c) * w_minus.get(c, a);
                residual_type3 = residual_type3.max((lhs - rhs).norm());
            }
        }
    }

    let residual_modulus = (d_value.norm_sqr() - nf).abs();

    let tolerance = tol.bound(nf);
    let report = SpinModelReport {
        n,
        alpha,
        d_value,
        residual_diag_plus,
        residual_diag_minus,
        residual_row_plus,
        residual_col_plus,
        residual_row_minus,
        residual_col_minus,
        residual_type2_hadamard,
        residual_type2_product,
        residual_type3,
        residual_modulus,
        tolerance,
        pass: false,
    };
    let pass = report.max_residual() <= tolerance;
    Ok(SpinModelReport { pass, ..report })
}
