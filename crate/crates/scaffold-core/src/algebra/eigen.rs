//! Simultaneous eigenspace projectors and numerical span ranks.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

use super::{CMatrix, Tensor, Tolerance};

/// Common eigenspace projectors of a commuting matrix family.
///
/// A random Hermitian combination of the family (and its adjoints) is
/// diagonalized; eigenvalues are grouped at `cluster_tol` and each group's
/// projector is reconstructed from its eigenvectors. Every projector is
/// then verified to act as a scalar on every family member, so an unlucky
/// draw that merges two eigenspaces is detected and retried with a fresh
/// derived seed rather than silently accepted.
///
/// The projector list is canonically ordered: the projector closest to
/// `J/n` (the one fixing the all-ones vector, present whenever the family
/// spans a coherent algebra containing `J`) comes first; the rest follow in
/// descending lexicographic order of their eigenvalue tuples on the family.
///
/// Errors: `shape` (empty family, mismatched sizes), `not-commutative`,
/// and `degenerate-spectrum` when repeated retries fail to split
/// eigenspaces (callers may retry with a different seed).
pub fn simultaneous_eigenprojectors(
    family: &[CMatrix],
    tol: &Tolerance,
    seed: u64,
) -> Result<Vec<CMatrix>> {
    if family.is_empty() {
        return Err(Error::Shape("empty matrix family".into()));
    }
    let n = family[0].size();
    for (k, f) in family.iter().enumerate() {
        if f.size() != n {
            return Err(Error::Shape(format!("family member {k} is {}×{}, expected {n}×{n}", f.size(), f.size())));
        }
    }
    for a in 0..family.len() {
        for b in a + 1..family.len() {
            let ab = family[a].product(&family[b])?;
            let ba = family[b].product(&family[a])?;
            let scale = n as f64 * family[a].max_abs() * family[b].max_abs();
            if ab.max_diff(&ba)? > tol.bound(scale) {
                return Err(Error::NotCommutative(format!("members {a} and {b} do not commute")));
            }
        }
    }

    let mut last_err = String::new();
    for attempt in 0..5u64 {
        let attempt_seed = seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        match try_projectors(family, tol, attempt_seed) {
            Ok(projs) => return Ok(order_projectors(projs, family, n)),
            Err(Error::DegenerateSpectrum(msg)) => last_err = msg,
            Err(e) => return Err(e),
        }
    }
    Err(Error::DegenerateSpectrum(format!("after 5 seeds: {last_err}")))
}

fn try_projectors(family: &[CMatrix], tol: &Tolerance, seed: u64) -> Result<Vec<CMatrix>> {
    use rand::{Rng, SeedableRng};
    let n = family[0].size();
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);

    // Random Hermitian combination H = Σ z_k F_k + conj(z_k) F_k^H.
    let mut h = CMatrix::zeros(n);
    for f in family {
        let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        h = h.add(&f.scale(z))?.add(&f.adjoint().scale(z.conj()))?;
    }

    let real = h.is_real(1e-13);
    let (eigvals, eigvecs_cols, emb) = if real {
        let m = DMatrix::from_fn(n, n, |i, j| h.get(i, j).re);
        let se = nalgebra::SymmetricEigen::new(m);
        (se.eigenvalues.as_slice().to_vec(), se.eigenvectors, 1usize)
    } else {
        // Hermitian complex → 2n×2n real symmetric embedding
        // [[Re, -Im], [Im, Re]]; eigenvalues double up, projectors embed
        // the same way, so the complex projector is read off blockwise.
        let m = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            let (bi, ii) = (i / n, i % n);
            let (bj, jj) = (j / n, j % n);
            let z = h.get(ii, jj);
            match (bi, bj) {
                (0, 0) | (1, 1) => z.re,
                (0, 1) => -z.im,
                _ => z.im,
            }
        });
        let se = nalgebra::SymmetricEigen::new(m);
        (se.eigenvalues.as_slice().to_vec(), se.eigenvectors, 2usize)
    };

    // Sort eigenpairs and group at the cluster threshold.
    let dim = n * emb;
    let mut idx: Vec<usize> = (0..dim).collect();
    idx.sort_by(|&a, &b| eigvals[a].partial_cmp(&eigvals[b]).unwrap());
    let spread = eigvals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - eigvals.iter().cloned().fold(f64::INFINITY, f64::min);
    let gap = tol.cluster_tol * spread.max(1.0);
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (pos, &i) in idx.iter().enumerate() {
        if pos == 0 || eigvals[i] - eigvals[idx[pos - 1]] > gap {
            clusters.push(Vec::new());
        }
        clusters.last_mut().unwrap().push(i);
    }

    let mut projs = Vec::with_capacity(clusters.len());
    for cluster in &clusters {
        if emb == 2 && cluster.len() % 2 != 0 {
            return Err(Error::DegenerateSpectrum("embedded eigenspace of odd dimension".into()));
        }
        // P_emb = Σ v vᵀ over the cluster's orthonormal eigenvectors.
        let mut p = DMatrix::<f64>::zeros(dim, dim);
        for &c in cluster {
            let v = eigvecs_cols.column(c);
            for i in 0..dim {
                let vi = v[i];
                if vi == 0.0 {
                    continue;
                }
                for j in 0..dim {
                    p[(i, j)] += vi * v[j];
                }
            }
        }
        let pc = if emb == 1 {
            CMatrix::from_fn(n, |i, j| Complex64::new(p[(i, j)], 0.0))?
        } else {
            CMatrix::from_fn(n, |i, j| Complex64::new(p[(i, j)], p[(i + n, j)]))?
        };
        projs.push(pc);
    }

    // Post-verify: each projector must be an eigenprojector of every
    // family member. A merged cluster fails this and triggers a retry.
    let check = tol.bound(1.0).max(1e-8);
    for f in family {
        for p in &projs {
            let rank = p.trace().re;
            if rank < 0.5 {
                return Err(Error::DegenerateSpectrum("projector of rank zero".into()));
            }
            let theta = f.product(p)?.trace() / Complex64::new(rank, 0.0);
            let resid = f.product(p)?.max_diff(&p.scale(theta))?;
            let scale = f.max_abs().max(1.0);
            if resid > check * scale {
                return Err(Error::DegenerateSpectrum(format!(
                    "projector is not an eigenprojector (residual {resid:.3e})"
                )));
            }
        }
    }
    Ok(projs)
}

fn order_projectors(projs: Vec<CMatrix>, family: &[CMatrix], n: usize) -> Vec<CMatrix> {
    // Eigenvalue tuple of each projector over the family, for ordering.
    let theta = |p: &CMatrix| -> Vec<Complex64> {
        family
            .iter()
            .map(|f| {
                let rank = p.trace().re;
                f.product(p).expect("sizes verified").trace() / Complex64::new(rank, 0.0)
            })
            .collect()
    };
    let jn = {
        let mut j = CMatrix::ones(n);
        j = j.scale(Complex64::new(1.0 / n as f64, 0.0));
        j
    };
    let mut rows: Vec<(CMatrix, Vec<Complex64>, f64)> = projs
        .into_iter()
        .map(|p| {
            let t = theta(&p);
            let dj = p.max_diff(&jn).expect("sizes verified");
            (p, t, dj)
        })
        .collect();
    // The all-ones eigenspace projector (if present) goes first.
    rows.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
    let first_is_jn = rows.first().map(|r| r.2 < 1e-6).unwrap_or(false);
    let mut out = Vec::with_capacity(rows.len());
    let mut rest: Vec<(CMatrix, Vec<Complex64>)> = if first_is_jn {
        let head = rows.remove(0);
        out.push(head.0);
        rows.into_iter().map(|(p, t, _)| (p, t)).collect()
    } else {
        rows.into_iter().map(|(p, t, _)| (p, t)).collect()
    };
    // Remaining projectors: descending lexicographic eigenvalue tuples,
    // quantized so float noise cannot flip the order.
    let quant = |z: Complex64| -> (i64, i64) {
        ((z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64)
    };
    rest.sort_by(|a, b| {
        let ka: Vec<(i64, i64)> = a.1.iter().map(|&z| quant(z)).collect();
        let kb: Vec<(i64, i64)> = b.1.iter().map(|&z| quant(z)).collect();
        kb.cmp(&ka)
    });
    out.extend(rest.into_iter().map(|(p, _)| p));
    out
}

/// Dimension of the complex span of a list of same-shape tensors.
///
/// Flattened tensors are the rows of a matrix; the rank is the number of
/// singular values exceeding `rel_tol` times the largest one. The rows are
/// first compressed onto an orthonormal basis (modified Gram–Schmidt with
/// re-orthogonalization at a much looser threshold), then the small
/// coefficient matrix is measured spectrally, so the thresholding happens
/// at full accuracy even for thousands of rows.
pub fn span_rank(tensors: &[Tensor], tol: &Tolerance) -> Result<usize> {
    if tensors.is_empty() {
        return Ok(0);
    }
    let n = tensors[0].ground_size();
    let order = tensors[0].order();
    for t in tensors {
        if t.ground_size() != n || t.order() != order {
            return Err(Error::Shape(format!(
                "mixed tensor shapes: n={}, order={} vs n={}, order={}",
                n,
                order,
                t.ground_size(),
                t.order()
            )));
        }
    }
    let len = tensors[0].len();

    // Stage 1: loose orthonormal basis + coefficient rows.
    let pre_eps = 1e-13;
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut coeff_rows: Vec<Vec<Complex64>> = Vec::new();
    for t in tensors {
        let mut v: Vec<Complex64> = t.data().to_vec();
        let norm0: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut row = vec![Complex64::ZERO; basis.len() + 1];
        for _pass in 0..2 {
            for (bi, b) in basis.iter().enumerate() {
                let c: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                row[bi] += c;
                for (vv, bb) in v.iter_mut().zip(b) {
                    *vv -= c * bb;
                }
            }
        }
        let rem: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if rem > pre_eps * norm0.max(1e-300) && rem > 0.0 {
            for z in v.iter_mut() {
                *z /= rem;
            }
            row[basis.len()] = Complex64::new(rem, 0.0);
            basis.push(v);
        }
        row.resize(basis.len(), Complex64::ZERO);
        coeff_rows.push(row);
    }
    let q = basis.len();
    if q == 0 {
        return Ok(0);
    }
    let k = coeff_rows.len();
    for r in coeff_rows.iter_mut() {
        r.resize(q, Complex64::ZERO);
    }
    let _ = len;

    // Stage 2: singular values of the k×q coefficient matrix via the
    // eigenvalues of its q×q Gram matrix (q is small).
    let mut gram = vec![Complex64::ZERO; q * q];
    for row in &coeff_rows {
        for a in 0..q {
            let ca = row[a].conj();
            if ca == Complex64::ZERO {
                continue;
            }
            for b in 0..q {
                gram[a * q + b] += ca * row[b];
            }
        }
    }
    let emb = DMatrix::from_fn(2 * q, 2 * q, |i, j| {
        let (bi, ii) = (i / q, i % q);
        let (bj, jj) = (j / q, j % q);
        let z = gram[ii * q + jj];
        match (bi, bj) {
            (0, 0) | (1, 1) => z.re,
            (0, 1) => -z.im,
            _ => z.im,
        }
    });
    let se = nalgebra::SymmetricEigen::new(emb);
    let mut lambda: Vec<f64> = se.eigenvalues.as_slice().to_vec();
    lambda.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let lmax = lambda.first().cloned().unwrap_or(0.0).max(0.0);
    if lmax <= 0.0 {
        return Ok(0);
    }
    let thr = (tol.rel_tol * lmax.sqrt()).powi(2);
    let count = lambda.iter().filter(|&&l| l > thr).count();
    // The real embedding doubles every eigenvalue.
    let _ = k;
    Ok(count.div_euclid(2) + usize::from(count % 2 == 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::IntMatrix;

    #[test]
    fn projectors_of_identity_family() {
        let n = 4;
        let fam = vec![IntMatrix::identity(n).to_cmatrix()];
        let projs = simultaneous_eigenprojectors(&fam, &Tolerance::default(), 7).unwrap();
        assert_eq!(projs.len(), 1);
        assert!(projs[0].max_diff(&CMatrix::identity(n)).unwrap() < 1e-9);
    }

    #[test]
    fn non_commuting_family_is_rejected() {
        let a = IntMatrix::from_rows(&[vec![0, 1], vec![0, 0]]).unwrap().to_cmatrix();
        let b = IntMatrix::from_rows(&[vec![1, 0], vec![0, 0]]).unwrap().to_cmatrix();
        match simultaneous_eigenprojectors(&[a, b], &Tolerance::default(), 1) {
            Err(Error::NotCommutative(_)) => {}
            other => panic!("expected not-commutative, got {other:?}"),
        }
    }

    #[test]
    fn span_rank_counts_independent_directions() {
        let tol = Tolerance::default();
        let e0 = Tensor::from_data(3, 1, vec![Complex64::ONE, Complex64::ZERO, Complex64::ZERO]).unwrap();
        let e1 = Tensor::from_data(3, 1, vec![Complex64::ZERO, Complex64::ONE, Complex64::ZERO]).unwrap();
        let sum = e0.add(&e1).unwrap();
        assert_eq!(span_rank(&[], &tol).unwrap(), 0);
        assert_eq!(span_rank(&[e0.clone()], &tol).unwrap(), 1);
        assert_eq!(span_rank(&[e0.clone(), e1.clone(), sum], &tol).unwrap(), 2);
        let z = Tensor::zeros(3, 1);
        assert_eq!(span_rank(&[z], &tol).unwrap(), 0);
        let bad = Tensor::zeros(2, 1);
        assert!(span_rank(&[e0, bad], &tol).is_err());
    }
}
