//! Dense tensors over the vertex set, with an exact side-channel.
//!
//! A [`Tensor`] of order `m` over a set of size `n` stores `n^m` complex
//! entries row-major (first index slowest). When every contributing weight
//! was integer-valued, evaluation also carries exact Gaussian-integer
//! entries alongside the floats; the `exact` flag advertises that channel.

use num_bigint::BigInt;
use num_complex::Complex64;

use crate::{Error, Result};

use super::{GaussInt, Tolerance};

/// Dense complex tensor of fixed order over a ground set of size `n`.
#[derive(Debug, Clone)]
pub struct Tensor {
    n: usize,
    order: usize,
    data: Vec<Complex64>,
    exact: Option<Vec<GaussInt>>,
}

impl Tensor {
    /// The all-zero tensor (exact).
    pub fn zeros(n: usize, order: usize) -> Self {
        let len = n.checked_pow(order as u32).expect("tensor size overflow");
        Tensor { n, order, data: vec![Complex64::ZERO; len], exact: Some(vec![GaussInt::zero(); len]) }
    }

    /// An order-0 tensor holding one complex scalar.
    pub fn from_scalar(n: usize, z: Complex64) -> Self {
        Tensor { n, order: 0, data: vec![z], exact: GaussInt::from_c64(z, 0.0).map(|g| vec![g]) }
    }

    /// Build from raw complex entries (row-major, length `n^order`).
    pub fn from_data(n: usize, order: usize, data: Vec<Complex64>) -> Result<Self> {
        let len = n.checked_pow(order as u32).ok_or_else(|| Error::TooLarge("tensor size overflow".into()))?;
        if data.len() != len {
            return Err(Error::Shape(format!("expected {} entries, got {}", len, data.len())));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Shape("non-finite entry".into()));
        }
        Ok(Tensor { n, order, data, exact: None })
    }

    /// Build from exact entries; the float channel is derived from them.
    pub fn from_exact(n: usize, order: usize, exact: Vec<GaussInt>) -> Result<Self> {
        let len = n.checked_pow(order as u32).ok_or_else(|| Error::TooLarge("tensor size overflow".into()))?;
        if exact.len() != len {
            return Err(Error::Shape(format!("expected {} entries, got {}", len, exact.len())));
        }
        let data = exact.iter().map(GaussInt::to_c64).collect();
        Ok(Tensor { n, order, data, exact: Some(exact) })
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Whether the exact Gaussian-integer channel is populated. When set,
    /// entries are exactly representable and round-trip through big
    /// integers with zero error.
    pub fn exact_flag(&self) -> bool {
        self.exact.is_some()
    }

    pub fn exact_entries(&self) -> Option<&[GaussInt]> {
        self.exact.as_deref()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Flat offset of a multi-index (first axis slowest).
    pub fn offset(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.order {
            return Err(Error::Shape(format!(
                "index of length {} into order-{} tensor",
                idx.len(),
                self.order
            )));
        }
        let mut off = 0usize;
        for &i in idx {
            if i >= self.n {
                return Err(Error::Range(format!("index {i} out of range 0..{}", self.n)));
            }
            off = off * self.n + i;
        }
        Ok(off)
    }

    pub fn get(&self, idx: &[usize]) -> Result<Complex64> {
        Ok(self.data[self.offset(idx)?])
    }

    /// The value of an order-0 tensor.
    pub fn scalar(&self) -> Result<Complex64> {
        if self.order != 0 {
            return Err(Error::Shape(format!("order-{} tensor is not a scalar", self.order)));
        }
        Ok(self.data[0])
    }

    /// The exact value of an order-0 tensor with the exact channel set.
    pub fn scalar_exact(&self) -> Result<GaussInt> {
        if self.order != 0 {
            return Err(Error::Shape(format!("order-{} tensor is not a scalar", self.order)));
        }
        self.exact
            .as_ref()
            .map(|e| e[0].clone())
            .ok_or_else(|| Error::Shape("tensor has no exact channel".into()))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-norm of `self − other`. Exactness is ignored.
    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.order != other.order {
            return Err(Error::Shape(format!(
                "tensor shapes differ: n={}, order={} vs n={}, order={}",
                self.n, self.order, other.n, other.order
            )));
        }
        Ok(())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        let exact = match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()),
            _ => None,
        };
        Ok(Tensor { n: self.n, order: self.order, data, exact })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        let exact = match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(x, y)| x.add(y)).collect()),
            _ => None,
        };
        Ok(Tensor { n: self.n, order: self.order, data, exact })
    }

    /// Scale by a complex constant. The exact channel survives only when
    /// the constant is itself a Gaussian integer.
    pub fn scale(&self, c: Complex64) -> Self {
        let data = self.data.iter().map(|z| z * c).collect();
        let exact = match (&self.exact, GaussInt::from_c64(c, 0.0)) {
            (Some(e), Some(g)) => Some(e.iter().map(|x| x.mul(&g)).collect()),
            _ => None,
        };
        Tensor { n: self.n, order: self.order, data, exact }
    }

    pub fn conj(&self) -> Self {
        let data = self.data.iter().map(|z| z.conj()).collect();
        let exact = self.exact.as_ref().map(|e| e.iter().map(GaussInt::conj).collect());
        Tensor { n: self.n, order: self.order, data, exact }
    }

    /// Reorder axes: output axis `k` reads input axis `perm[k]`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.order {
            return Err(Error::Shape(format!(
                "permutation of length {} for order-{} tensor",
                perm.len(),
                self.order
            )));
        }
        let mut seen = vec![false; self.order];
        for &p in perm {
            if p >= self.order || seen[p] {
                return Err(Error::Range(format!("invalid axis permutation {perm:?}")));
            }
            seen[p] = true;
        }
        let mut out = Tensor::zeros(self.n, self.order);
        if self.exact.is_none() {
            out.exact = None;
        }
        let mut idx = vec![0usize; self.order];
        for off in 0..self.data.len() {
            // Decode `off` in the output layout, pull from the permuted
            // input position.
            let mut rem = off;
            for k in (0..self.order).rev() {
                idx[k] = rem % self.n;
                rem /= self.n;
            }
            let mut in_idx = vec![0usize; self.order];
            for k in 0..self.order {
                in_idx[perm[k]] = idx[k];
            }
            let mut src_off = 0usize;
            for &i in &in_idx {
                src_off = src_off * self.n + i;
            }
            out.data[off] = self.data[src_off];
            if let (Some(oe), Some(se)) = (&mut out.exact, &self.exact) {
                oe[off] = se[src_off].clone();
            }
        }
        Ok(out)
    }

    /// Sum out the given axes (ascending list of distinct axis numbers),
    /// producing a tensor of lower order. This is the value-level image of
    /// hollowing roots.
    pub fn sum_axes(&self, axes: &[usize]) -> Result<Self> {
        let mut drop = vec![false; self.order];
        for &a in axes {
            if a >= self.order {
                return Err(Error::Range(format!("axis {a} out of range")));
            }
            if drop[a] {
                return Err(Error::Range(format!("axis {a} listed twice")));
            }
            drop[a] = true;
        }
        let kept: Vec<usize> = (0..self.order).filter(|&a| !drop[a]).collect();
        let mut out = Tensor::zeros(self.n, kept.len());
        if self.exact.is_none() {
            out.exact = None;
        }
        let mut idx = vec![0usize; self.order];
        for off in 0..self.data.len() {
            let mut rem = off;
            for k in (0..self.order).rev() {
                idx[k] = rem % self.n;
                rem /= self.n;
            }
            let mut dst = 0usize;
            for &k in &kept {
                dst = dst * self.n + idx[k];
            }
            out.data[dst] += self.data[off];
            if let (Some(oe), Some(se)) = (&mut out.exact, &self.exact) {
                oe[dst] = oe[dst].add(&se[off]);
            }
        }
        Ok(out)
    }

    /// Serialize to the tensor JSON format.
    ///
    /// Entries with magnitude at most `tol.abs_tol` are omitted. Exact
    /// tensors write their Gaussian-integer parts as decimal strings so
    /// that arbitrary-precision values survive the round trip; inexact
    /// tensors write floats rounded to 12 significant digits.
    pub fn to_json(&self, tol: &Tolerance) -> serde_json::Value {
        use serde_json::{json, Map, Value};
        let mut obj = Map::new();
        obj.insert("n".into(), json!(self.n));
        obj.insert("order".into(), json!(self.order));
        obj.insert("exact".into(), json!(self.exact.is_some()));
        let entry_value = |off: usize| -> (Value, Value) {
            if let Some(e) = &self.exact {
                (Value::String(e[off].re.to_string()), Value::String(e[off].im.to_string()))
            } else {
                let z = self.data[off];
                (json!(crate::report::round_sig(z.re)), json!(crate::report::round_sig(z.im)))
            }
        };
        if self.order == 0 {
            let (re, im) = entry_value(0);
            obj.insert("scalar".into(), json!({ "re": re, "im": im }));
            return Value::Object(obj);
        }
        let mut entries = Vec::new();
        let mut idx = vec![0usize; self.order];
        for off in 0..self.data.len() {
            let mut rem = off;
            for k in (0..self.order).rev() {
                idx[k] = rem % self.n;
                rem /= self.n;
            }
            if self.data[off].norm() > tol.abs_tol {
                let (re, im) = entry_value(off);
                entries.push(json!({ "idx": idx.clone(), "re": re, "im": im }));
            }
        }
        obj.insert("entries".into(), Value::Array(entries));
        Value::Object(obj)
    }

    /// Parse the tensor JSON format produced by [`Tensor::to_json`].
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::Shape("tensor JSON must be an object".into()))?;
        let n = obj.get("n").and_then(|x| x.as_u64()).ok_or_else(|| Error::Shape("missing n".into()))? as usize;
        let order =
            obj.get("order").and_then(|x| x.as_u64()).ok_or_else(|| Error::Shape("missing order".into()))? as usize;
        let exact_flag = obj.get("exact").and_then(|x| x.as_bool()).unwrap_or(false);
        let mut t = Tensor::zeros(n, order);
        if !exact_flag {
            t.exact = None;
        }
        let parse_part = |part: &serde_json::Value| -> Result<(f64, Option<BigInt>)> {
            if let Some(s) = part.as_str() {
                let b: BigInt = s
                    .parse()
                    .map_err(|_| Error::Shape(format!("bad integer literal {s:?}")))?;
                let f = num_traits::ToPrimitive::to_f64(&b).unwrap_or(f64::NAN);
                Ok((f, Some(b)))
            } else if let Some(f) = part.as_f64() {
                Ok((f, None))
            } else {
                Err(Error::Shape("entry parts must be numbers or integer strings".into()))
            }
        };
        let put = |t: &mut Tensor, off: usize, re: &serde_json::Value, im: &serde_json::Value| -> Result<()> {
            let (fre, bre) = parse_part(re)?;
            let (fim, bim) = parse_part(im)?;
            t.data[off] = Complex64::new(fre, fim);
            if let Some(e) = &mut t.exact {
                match (bre, bim) {
                    (Some(r), Some(i)) => e[off] = GaussInt { re: r, im: i },
                    _ => {
                        let g = GaussInt::from_c64(t.data[off], 0.0)
                            .ok_or_else(|| Error::Shape("exact tensor with non-integer entry".into()))?;
                        e[off] = g;
                    }
                }
            }
            Ok(())
        };
        if order == 0 {
            let s = obj.get("scalar").ok_or_else(|| Error::Shape("order-0 tensor needs scalar".into()))?;
            let re = s.get("re").ok_or_else(|| Error::Shape("scalar needs re".into()))?;
            let im = s.get("im").ok_or_else(|| Error::Shape("scalar needs im".into()))?;
            put(&mut t, 0, re, im)?;
            return Ok(t);
        }
        let entries = obj
            .get("entries")
            .and_then(|x| x.as_array())
            .ok_or_else(|| Error::Shape("missing entries".into()))?;
        for e in entries {
            let idx: Vec<usize> = e
                .get("idx")
                .and_then(|x| x.as_array())
                .ok_or_else(|| Error::Shape("entry needs idx".into()))?
                .iter()
                .map(|x| x.as_u64().map(|u| u as usize).ok_or_else(|| Error::Shape("bad index".into())))
                .collect::<Result<_>>()?;
            let off = t.offset(&idx)?;
            let re = e.get("re").ok_or_else(|| Error::Shape("entry needs re".into()))?.clone();
            let im = e.get("im").ok_or_else(|| Error::Shape("entry needs im".into()))?.clone();
            put(&mut t, off, &re, &im)?;
        }
        Ok(t)
    }
}

/// Hermitian inner product `⟨s, t⟩ = Σ conj(s_e)·t_e` over all entries.
pub fn tensor_inner(s: &Tensor, t: &Tensor) -> Result<Complex64> {
    s.check_same_shape(t)?;
    Ok(s.data.iter().zip(&t.data).map(|(a, b)| a.conj() * b).sum())
}

/// Entrywise closeness in max-norm, at `abs_tol + rel_tol·scale` where
/// `scale` is the larger max-norm of the two operands.
pub fn tensor_close(s: &Tensor, t: &Tensor, tol: &Tolerance) -> Result<bool> {
    let scale = s.max_abs().max(t.max_abs());
    Ok(s.max_diff(t)? <= tol.bound(scale))
}
