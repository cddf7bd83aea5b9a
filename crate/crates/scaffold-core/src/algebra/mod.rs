//! Dense matrix and tensor kernel.
//!
//! Everything downstream works over the vertex set of a scheme, so matrices
//! here are square, dense, and small (n ≤ 128 by design). Two entry domains
//! are supported side by side:
//!
//! * [`IntMatrix`] — arbitrary-precision integers, for 0/1 relation matrices
//!   and exact counting;
//! * [`CMatrix`] — complex `f64`, for spectral idempotents and general
//!   weights.
//!
//! [`Tensor`] (in [`tensor`]) is the value domain of scaffold evaluation and
//! carries an optional exact Gaussian-integer image of its entries.

mod eigen;
mod tensor;

pub use eigen::{simultaneous_eigenprojectors, span_rank};
pub use tensor::{tensor_close, tensor_inner, Tensor};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Numeric comparison thresholds used across the crate.
///
/// * `abs_tol` — absolute floor for treating a value as zero;
/// * `rel_tol` — relative slack, scaled by the magnitude of the data;
/// * `cluster_tol` — gap threshold for grouping eigenvalues into
///   eigenspaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub cluster_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs_tol: 1e-9, rel_tol: 1e-8, cluster_tol: 1e-6 }
    }
}

impl Tolerance {
    /// Absolute bound for data of the given magnitude scale.
    pub fn bound(&self, scale: f64) -> f64 {
        self.abs_tol + self.rel_tol * scale
    }
}

/// A Gaussian integer: `re + im·i` with arbitrary-precision parts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GaussInt {
    pub re: BigInt,
    pub im: BigInt,
}

impl GaussInt {
    pub fn new(re: impl Into<BigInt>, im: impl Into<BigInt>) -> Self {
        GaussInt { re: re.into(), im: im.into() }
    }

    pub fn zero() -> Self {
        GaussInt::default()
    }

    pub fn one() -> Self {
        GaussInt::new(1, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        GaussInt { re: &self.re + &other.re, im: &self.im + &other.im }
    }

    pub fn sub(&self, other: &Self) -> Self {
        GaussInt { re: &self.re - &other.re, im: &self.im - &other.im }
    }

    pub fn mul(&self, other: &Self) -> Self {
        GaussInt {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }

    pub fn conj(&self) -> Self {
        GaussInt { re: self.re.clone(), im: -&self.im }
    }

    /// Lossy image in `Complex64` (exact when the parts fit in 53 bits).
    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    /// Recognise a complex float as a Gaussian integer, within `eps`.
    pub fn from_c64(z: Complex64, eps: f64) -> Option<Self> {
        let re = z.re.round();
        let im = z.im.round();
        if (z.re - re).abs() <= eps && (z.im - im).abs() <= eps && re.abs() < 2f64.powi(52) && im.abs() < 2f64.powi(52) {
            Some(GaussInt::new(re as i64, im as i64))
        } else {
            None
        }
    }
}

fn check_same_size(what: &str, a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!("{what}: {a} vs {b}")));
    }
    Ok(())
}

/// Square matrix with arbitrary-precision integer entries, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    n: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(n: usize) -> Self {
        IntMatrix { n, data: vec![BigInt::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::from(1);
        }
        m
    }

    /// The all-ones matrix.
    pub fn ones(n: usize) -> Self {
        IntMatrix { n, data: vec![BigInt::from(1); n * n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> i64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(BigInt::from(f(i, j)));
            }
        }
        IntMatrix { n, data }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("row lengths must equal the row count".into()));
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: impl Into<BigInt>) {
        self.data[i * self.n + j] = v.into();
    }

    /// Ordinary matrix product.
    pub fn product(&self, other: &Self) -> Result<Self> {
        check_same_size("product operands", self.n, other.n)?;
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * n + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Entrywise (Schur) product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        check_same_size("hadamard operands", self.n, other.n)?;
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n * n {
            out.data[i] = &self.data[i] * &other.data[i];
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same_size("sum operands", self.n, other.n)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(out)
    }

    /// Largest absolute entrywise difference, exact.
    pub fn max_abs_diff(&self, other: &Self) -> Result<BigInt> {
        check_same_size("difference operands", self.n, other.n)?;
        let mut best = BigInt::zero();
        for (a, b) in self.data.iter().zip(&other.data) {
            let d = (a - b).abs();
            if d > best {
                best = d;
            }
        }
        Ok(best)
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        Self::from_fn_big(n, |i, j| self.get(j, i).clone())
    }

    fn from_fn_big(n: usize, f: impl Fn(usize, usize) -> BigInt) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        IntMatrix { n, data }
    }

    pub fn trace(&self) -> BigInt {
        (0..self.n).map(|i| self.get(i, i).clone()).sum()
    }

    pub fn row_sum(&self, i: usize) -> BigInt {
        self.data[i * self.n..(i + 1) * self.n].iter().sum()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_zero_one(&self) -> bool {
        self.data.iter().all(|v| v.is_zero() || *v == BigInt::from(1))
    }

    pub fn to_cmatrix(&self) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .map(|v| Complex64::new(v.to_f64().unwrap_or(f64::NAN), 0.0))
                .collect(),
        }
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    /// Positions `(i, j)` of nonzero entries, row-major.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if !self.get(i, j).is_zero() {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> BigInt {
        self.data.iter().map(|v| v.abs()).max().unwrap_or_else(BigInt::zero)
    }
}

/// Square matrix with complex `f64` entries, row-major.
///
/// Constructors reject non-finite entries, so downstream code may assume
/// every `CMatrix` is NaN/∞-free.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix { n, data: vec![Complex64::ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::ONE;
        }
        m
    }

    pub fn ones(n: usize) -> Self {
        CMatrix { n, data: vec![Complex64::ONE; n * n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Result<Self> {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = f(i, j);
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::Shape(format!("non-finite entry at ({i}, {j})")));
                }
                data.push(z);
            }
        }
        Ok(CMatrix { n, data })
    }

    pub fn from_data(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Shape(format!("expected {} entries, got {}", n * n, data.len())));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Shape("non-finite entry".into()));
        }
        Ok(CMatrix { n, data })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Ordinary matrix product.
    pub fn product(&self, other: &Self) -> Result<Self> {
        check_same_size("product operands", self.n, other.n)?;
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == Complex64::ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// Entrywise (Schur) product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        check_same_size("hadamard operands", self.n, other.n)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a *= b;
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same_size("sum operands", self.n, other.n)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_same_size("difference operands", self.n, other.n)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= c;
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = a.conj();
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        self.transpose().conj()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn row_sum(&self, i: usize) -> Complex64 {
        self.data[i * self.n..(i + 1) * self.n].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> Complex64 {
        (0..self.n).map(|i| self.get(i, j)).sum()
    }

    pub fn sum(&self) -> Complex64 {
        self.data.iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-norm of `self − other`.
    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        check_same_size("difference operands", self.n, other.n)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut inv = Self::identity(n).data;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| {
                    a[r * n + col]
                        .norm()
                        .partial_cmp(&a[s * n + col].norm())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap();
            if a[pivot * n + col].norm() < 1e-300 {
                return Err(Error::Shape("singular matrix has no inverse".into()));
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                    inv.swap(col * n + j, pivot * n + j);
                }
            }
            let p = a[col * n + col];
            for j in 0..n {
                a[col * n + j] /= p;
                inv[col * n + j] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r * n + col];
                if f == Complex64::ZERO {
                    continue;
                }
                for j in 0..n {
                    let ac = a[col * n + j];
                    let ic = inv[col * n + j];
                    a[r * n + j] -= f * ac;
                    inv[r * n + j] -= f * ic;
                }
            }
        }
        Ok(CMatrix { n, data: inv })
    }

    /// Exact image of this matrix, if every entry is a Gaussian integer
    /// within `eps`.
    pub fn to_exact(&self, eps: f64) -> Option<Vec<GaussInt>> {
        self.data.iter().map(|&z| GaussInt::from_c64(z, eps)).collect()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.n).all(|i| {
            (0..=i).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol)
        })
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.data.iter().all(|z| z.im.abs() <= tol)
    }
}

/// Ordinary matrix product of two complex matrices.
///
/// Free-function alias of [`CMatrix::product`] for call sites that read
/// better with the operation name first.
pub fn mat_product(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    a.product(b)
}

/// Entrywise product of two complex matrices.
pub fn mat_hadamard(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    a.hadamard(b)
}
