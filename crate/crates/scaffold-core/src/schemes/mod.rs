//! Commutative association schemes.
//!
//! A scheme on a vertex set `X` (|X| = n) is a partition of `X × X` into
//! relations `R_0..R_d` whose 0/1 adjacency matrices satisfy the classical
//! axioms:
//!
//! * (i) the identity relation is present (reordered to position 0);
//! * (ii) the relations are pairwise disjoint;
//! * (iii) together they cover `X × X`;
//! * (iv) the transpose of every relation is a relation;
//! * (v) products `A_i A_j` are constant on every relation (the
//!   intersection numbers `p_ij^k`);
//! * (vi) `p_ij^k = p_ji^k` (commutativity).
//!
//! [`AssociationScheme`] bundles the relation matrices with the spectral
//! side of the theory: primitive idempotents `E_j`, eigenmatrices `P`/`Q`,
//! Krein parameters `q_ij^k`, valencies, multiplicities, and the transpose
//! pairings of both bases.

mod builtins;
mod io;
mod polynomial;
mod report;

pub use builtins::{builtin, builtin_from_spec, BUILTIN_SEED, MAX_VERTICES};
pub use io::{read_relations, write_relations};
pub use polynomial::{polynomial_structure, PolyKind, PolynomialStructure};
pub use report::{scheme_report, SchemeReport};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::algebra::{simultaneous_eigenprojectors, CMatrix, IntMatrix, Tolerance};
use crate::{Error, Result};

/// Magnitudes below this are treated as structurally zero parameters
/// (Krein parameters, hypothesis checks in rewrite rules and theorems).
pub const PARAM_ZERO: f64 = 1e-7;

/// A commutative association scheme with its full parameter set.
#[derive(Debug, Clone)]
pub struct AssociationScheme {
    n: usize,
    d: usize,
    /// Relation adjacency matrices, `A_0 = I` first.
    a: Vec<IntMatrix>,
    /// Primitive idempotents, `E_0 = J/n` first, the rest in descending
    /// lexicographic order of their eigenvalue tuples on `A_1, A_2, …`.
    e: Vec<CMatrix>,
    /// Intersection numbers, flattened `(d+1)³`, index `((i)(d+1)+j)(d+1)+k`.
    p: Vec<BigInt>,
    /// Krein parameters, same layout (real for symmetric schemes).
    q: Vec<Complex64>,
    /// First eigenmatrix: `A_i = Σ_j P_ji E_j` (rows indexed by `j`).
    pmat: CMatrix,
    /// Second eigenmatrix: `E_j = (1/n) Σ_i Q_ij A_i`.
    qmat: CMatrix,
    /// Valencies `v_i` (row sums of `A_i`).
    v: Vec<u64>,
    /// Multiplicities `m_j = rank E_j`.
    m: Vec<usize>,
    /// `A_i^⊤ = A_{conj_a[i]}`.
    conj_a: Vec<usize>,
    /// `E_j^⊤ = conj(E_j) = E_{conj_e[j]}`.
    conj_e: Vec<usize>,
    symmetric: bool,
}

impl AssociationScheme {
    /// Number of vertices `|X|`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of classes (relations minus the identity).
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn relation(&self, i: usize) -> &IntMatrix {
        &self.a[i]
    }

    pub fn relations(&self) -> &[IntMatrix] {
        &self.a
    }

    pub fn idempotent(&self, j: usize) -> &CMatrix {
        &self.e[j]
    }

    pub fn idempotents(&self) -> &[CMatrix] {
        &self.e
    }

    fn tri(&self, i: usize, j: usize, k: usize) -> usize {
        (i * (self.d + 1) + j) * (self.d + 1) + k
    }

    /// Intersection number `p_ij^k`.
    pub fn p(&self, i: usize, j: usize, k: usize) -> &BigInt {
        &self.p[self.tri(i, j, k)]
    }

    /// Intersection number as `u64` (they are counts bounded by `n`).
    pub fn p_u64(&self, i: usize, j: usize, k: usize) -> u64 {
        self.p(i, j, k).to_u64().expect("intersection numbers are small nonnegative counts")
    }

    /// Krein parameter `q_ij^k`.
    pub fn q(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.q[self.tri(i, j, k)]
    }

    /// Whether `q_ij^k` is structurally nonzero (magnitude above the
    /// reporting threshold `1e-7`).
    pub fn q_nonzero(&self, i: usize, j: usize, k: usize) -> bool {
        self.q(i, j, k).norm() > PARAM_ZERO
    }

    /// First eigenmatrix `P`; `P[j][i]` is the eigenvalue of `A_i` on the
    /// eigenspace of `E_j`.
    pub fn pmat(&self) -> &CMatrix {
        &self.pmat
    }

    /// Second eigenmatrix `Q` with `PQ = nI`.
    pub fn qmat(&self) -> &CMatrix {
        &self.qmat
    }

    /// Eigenvalue of `A_i` on eigenspace `j`.
    pub fn theta(&self, j: usize, i: usize) -> Complex64 {
        self.pmat.get(j, i)
    }

    pub fn valency(&self, i: usize) -> u64 {
        self.v[i]
    }

    pub fn valencies(&self) -> &[u64] {
        &self.v
    }

    pub fn multiplicity(&self, j: usize) -> usize {
        self.m[j]
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.m
    }

    /// Index `i'` with `A_i^⊤ = A_{i'}`.
    pub fn conj_a(&self, i: usize) -> usize {
        self.conj_a[i]
    }

    /// Index `j'` with `E_j^⊤ = E_{j'}`.
    pub fn conj_e(&self, j: usize) -> usize {
        self.conj_e[j]
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// The relation index of the pair `(x, y)`.
    pub fn relation_of(&self, x: usize, y: usize) -> usize {
        (0..=self.d)
            .find(|&i| !self.a[i].get(x, y).is_zero())
            .expect("relations partition X×X")
    }

    /// Build a scheme from candidate relation matrices.
    ///
    /// The matrices may arrive in any order; the identity is moved to the
    /// front. Axiom violations are reported as `not-a-scheme` with the
    /// failing axiom named. The spectral data is derived with the given
    /// tolerance and seed (the seed only feeds the random spectral split;
    /// the result is post-verified, so any successful run yields the same
    /// idempotents up to the documented canonical order).
    pub fn from_relations(mats: &[IntMatrix], tol: &Tolerance, seed: u64) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::NotAScheme { axiom: "i", detail: "no relations given".into() });
        }
        let n = mats[0].size();
        if n == 0 {
            return Err(Error::NotAScheme { axiom: "i", detail: "empty vertex set".into() });
        }
        for (idx, a) in mats.iter().enumerate() {
            if a.size() != n {
                return Err(Error::Shape(format!("relation {idx} is {}×{}, expected {n}×{n}", a.size(), a.size())));
            }
            if !a.is_zero_one() {
                return Err(Error::NotAScheme {
                    axiom: "ii",
                    detail: format!("relation {idx} has entries other than 0/1"),
                });
            }
        }

        // (ii) disjoint and (iii) covering: the pointwise sum must be J.
        let mut sum = IntMatrix::zeros(n);
        for a in mats {
            sum = sum.add(a)?;
        }
        for x in 0..n {
            for y in 0..n {
                let s = sum.get(x, y).to_i64().unwrap_or(-1);
                if s > 1 {
                    return Err(Error::NotAScheme {
                        axiom: "ii",
                        detail: format!("relations overlap at ({x}, {y})"),
                    });
                }
                if s < 1 {
                    return Err(Error::NotAScheme {
                        axiom: "iii",
                        detail: format!("no relation contains ({x}, {y})"),
                    });
                }
            }
        }

        // (i) identity present; reorder it to the front.
        let mut mats: Vec<IntMatrix> = mats.to_vec();
        let id = IntMatrix::identity(n);
        let Some(pos) = mats.iter().position(|a| *a == id) else {
            return Err(Error::NotAScheme { axiom: "i", detail: "no relation equals the identity".into() });
        };
        mats.swap(0, pos);
        let d = mats.len() - 1;

        // (iv) transpose closure.
        let mut conj_a = vec![0usize; d + 1];
        for i in 0..=d {
            let t = mats[i].transpose();
            let Some(ip) = mats.iter().position(|a| *a == t) else {
                return Err(Error::NotAScheme {
                    axiom: "iv",
                    detail: format!("transpose of relation {i} is not a relation"),
                });
            };
            conj_a[i] = ip;
        }

        // (v) intersection numbers and (vi) commutativity.
        let supports: Vec<(usize, usize)> =
            mats.iter().map(|a| a.support().into_iter().next().expect("nonempty relation")).collect();
        let mut p = vec![BigInt::zero(); (d + 1) * (d + 1) * (d + 1)];
        let tri = |i: usize, j: usize, k: usize| (i * (d + 1) + j) * (d + 1) + k;
        for i in 0..=d {
            for j in 0..=d {
                let prod = mats[i].product(&mats[j])?;
                for k in 0..=d {
                    let (x0, y0) = supports[k];
                    let c = prod.get(x0, y0).clone();
                    for (x, y) in mats[k].support() {
                        if prod.get(x, y) != &c {
                            return Err(Error::NotAScheme {
                                axiom: "v",
                                detail: format!(
                                    "A_{i}·A_{j} is not constant on relation {k}: entries ({x0},{y0}) and ({x},{y}) differ"
                                ),
                            });
                        }
                    }
                    p[tri(i, j, k)] = c;
                }
            }
        }
        for i in 0..=d {
            for j in 0..i {
                for k in 0..=d {
                    if p[tri(i, j, k)] != p[tri(j, i, k)] {
                        return Err(Error::NotAScheme {
                            axiom: "vi",
                            detail: format!("p_{{{i},{j}}}^{k} ≠ p_{{{j},{i}}}^{k}"),
                        });
                    }
                }
            }
        }

        // Valencies (constant row sums follow from (v), but verify).
        let mut v = vec![0u64; d + 1];
        for i in 0..=d {
            let r0 = mats[i].row_sum(0);
            for x in 1..n {
                if mats[i].row_sum(x) != r0 {
                    return Err(Error::NotAScheme {
                        axiom: "v",
                        detail: format!("relation {i} has non-constant row sums"),
                    });
                }
            }
            v[i] = r0.to_u64().expect("valency fits u64");
        }

        // Spectral side.
        let family: Vec<CMatrix> = mats.iter().map(IntMatrix::to_cmatrix).collect();
        let e = simultaneous_eigenprojectors(&family, tol, seed)?;
        if e.len() != d + 1 {
            return Err(Error::DegenerateSpectrum(format!(
                "expected {} common eigenspaces, found {}",
                d + 1,
                e.len()
            )));
        }
        let mut m = vec![0usize; d + 1];
        let mut mf = 0.0f64;
        for (j, ej) in e.iter().enumerate() {
            let t = ej.trace();
            let r = t.re.round();
            if (t.re - r).abs() > 1e-6 || t.im.abs() > 1e-6 || r < 1.0 {
                return Err(Error::DegenerateSpectrum(format!("idempotent {j} has non-integral rank {t}")));
            }
            m[j] = r as usize;
            mf += r;
        }
        if (mf - n as f64).abs() > 1e-9 {
            return Err(Error::DegenerateSpectrum("multiplicities do not sum to n".into()));
        }

        let mut pmat = CMatrix::zeros(d + 1);
        for j in 0..=d {
            for i in 0..=d {
                let th = family[i].product(&e[j])?.trace() / Complex64::new(m[j] as f64, 0.0);
                pmat.set(j, i, th);
            }
        }
        let qmat = pmat.inverse()?.scale(Complex64::new(n as f64, 0.0));

        let mut conj_e = vec![0usize; d + 1];
        for j in 0..=d {
            let t = e[j].transpose();
            let (best, dist) = e
                .iter()
                .enumerate()
                .map(|(j2, e2)| (j2, t.max_diff(e2).expect("same size")))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .expect("nonempty");
            if dist > tol.bound(1.0).max(1e-7) {
                return Err(Error::DegenerateSpectrum(format!(
                    "transpose of idempotent {j} is not an idempotent (distance {dist:.2e})"
                )));
            }
            conj_e[j] = best;
        }

        // Krein parameters via the trace form:
        // q_ij^k = (n / m_k) Σ_{x,y} (E_i ∘ E_j ∘ conj(E_k))_{x,y}.
        let symmetric = mats.iter().all(IntMatrix::is_symmetric);
        let mut q = vec![Complex64::ZERO; (d + 1) * (d + 1) * (d + 1)];
        for i in 0..=d {
            for j in 0..=i {
                let had = e[i].hadamard(&e[j])?;
                for k in 0..=d {
                    let s = had.hadamard(&e[k].conj())?.sum();
                    let qa = s * Complex64::new(n as f64 / m[k] as f64, 0.0);
                    q[tri(i, j, k)] = qa;
                    q[tri(j, i, k)] = qa;
                }
            }
        }
        if symmetric {
            for (idx, z) in q.iter().enumerate() {
                if z.im.abs() > PARAM_ZERO || z.re < -PARAM_ZERO {
                    let k = idx % (d + 1);
                    let j = (idx / (d + 1)) % (d + 1);
                    let i = idx / ((d + 1) * (d + 1));
                    return Err(Error::DegenerateSpectrum(format!(
                        "Krein parameter q_{{{i},{j}}}^{k} = {z} violates positivity for a symmetric scheme"
                    )));
                }
            }
        }

        let scheme = AssociationScheme {
            n,
            d,
            a: mats,
            e,
            p,
            q,
            pmat,
            qmat,
            v,
            m,
            conj_a,
            conj_e,
            symmetric,
        };
        scheme.verify_spectral(tol)?;
        Ok(scheme)
    }

    /// Build the distance scheme of a connected graph.
    ///
    /// The adjacency matrix must be symmetric 0/1 with zero diagonal. The
    /// relations are the distance classes; if the graph is not
    /// distance-regular the product axiom (v) fails and the error says so.
    pub fn from_graph(adj: &IntMatrix, tol: &Tolerance, seed: u64) -> Result<Self> {
        let n = adj.size();
        if n == 0 {
            return Err(Error::Shape("empty graph".into()));
        }
        if !adj.is_zero_one() || !adj.is_symmetric() {
            return Err(Error::Shape("adjacency matrix must be symmetric 0/1".into()));
        }
        for x in 0..n {
            if !adj.get(x, x).is_zero() {
                return Err(Error::Shape(format!("vertex {x} has a loop")));
            }
        }
        let neighbors: Vec<Vec<usize>> = (0..n)
            .map(|x| (0..n).filter(|&y| !adj.get(x, y).is_zero()).collect())
            .collect();
        let mut dist = vec![vec![usize::MAX; n]; n];
        for start in 0..n {
            let mut queue = std::collections::VecDeque::new();
            dist[start][start] = 0;
            queue.push_back(start);
            while let Some(x) = queue.pop_front() {
                for &y in &neighbors[x] {
                    if dist[start][y] == usize::MAX {
                        dist[start][y] = dist[start][x] + 1;
                        queue.push_back(y);
                    }
                }
            }
            if dist[start].iter().any(|&dd| dd == usize::MAX) {
                return Err(Error::Disconnected(format!("vertex {start} does not reach every vertex")));
            }
        }
        let diameter = dist.iter().flat_map(|row| row.iter().cloned()).max().unwrap_or(0);
        let mats: Vec<IntMatrix> = (0..=diameter)
            .map(|k| IntMatrix::from_fn(n, |x, y| i64::from(dist[x][y] == k)))
            .collect();
        Self::from_relations(&mats, tol, seed)
    }

    /// Cheap numerical sanity checks on freshly derived spectral data.
    fn verify_spectral(&self, tol: &Tolerance) -> Result<()> {
        let n = self.n;
        let d = self.d;
        let bound = tol.bound(n as f64).max(1e-8);
        // PQ = nI.
        let pq = self.pmat.product(&self.qmat)?;
        let ni = CMatrix::identity(d + 1).scale(Complex64::new(n as f64, 0.0));
        if pq.max_diff(&ni)? > bound {
            return Err(Error::DegenerateSpectrum("PQ differs from nI".into()));
        }
        // Row orthogonality m_j P_ji = v_i conj(Q_ij) (the conjugate is
        // vacuous for symmetric schemes where P and Q are real).
        for j in 0..=d {
            for i in 0..=d {
                let lhs = self.pmat.get(j, i) * Complex64::new(self.m[j] as f64, 0.0);
                let rhs = self.qmat.get(i, j).conj() * Complex64::new(self.v[i] as f64, 0.0);
                if (lhs - rhs).norm() > bound {
                    return Err(Error::DegenerateSpectrum(format!(
                        "orthogonality m_j P_ji = v_i conj(Q_ij) fails at (j, i) = ({j}, {i})"
                    )));
                }
            }
        }
        // ΣE_j = I.
        let mut s = CMatrix::zeros(n);
        for ej in &self.e {
            s = s.add(ej)?;
        }
        if s.max_diff(&CMatrix::identity(n))? > bound {
            return Err(Error::DegenerateSpectrum("idempotents do not sum to I".into()));
        }
        Ok(())
    }

    /// The matrix `Σ_i c_i A_i` for complex coefficients `c`.
    pub fn a_combination(&self, coeff: &[Complex64]) -> Result<CMatrix> {
        if coeff.len() != self.d + 1 {
            return Err(Error::Shape(format!("expected {} coefficients", self.d + 1)));
        }
        let mut out = CMatrix::zeros(self.n);
        for (i, &c) in coeff.iter().enumerate() {
            if c != Complex64::ZERO {
                out = out.add(&self.a[i].to_cmatrix().scale(c))?;
            }
        }
        Ok(out)
    }

    /// Expand a matrix over the `A`-basis: `M = Σ_i c_i A_i`, or report how
    /// far `M` is from the Bose–Mesner algebra.
    ///
    /// Returns the coefficients and the max-norm residual of the
    /// reconstruction. Membership holds exactly when the matrix is constant
    /// on every relation class, so the coefficients are read off the
    /// classes directly.
    pub fn expand_in_a_basis(&self, mat: &CMatrix) -> Result<(Vec<Complex64>, f64)> {
        if mat.size() != self.n {
            return Err(Error::Shape(format!("matrix is {}×{}, scheme has n = {}", mat.size(), mat.size(), self.n)));
        }
        let mut coeff = vec![Complex64::ZERO; self.d + 1];
        for i in 0..=self.d {
            let (x0, y0) = self.a[i].support().into_iter().next().expect("nonempty relation");
            coeff[i] = mat.get(x0, y0);
        }
        let recon = self.a_combination(&coeff)?;
        let resid = mat.max_diff(&recon)?;
        Ok((coeff, resid))
    }

    /// Sum `Σ_j c_j E_j` over the primitive idempotents.
    pub fn e_combination(&self, coeff: &[Complex64]) -> Result<CMatrix> {
        if coeff.len() != self.d + 1 {
            return Err(Error::Shape(format!("expected {} coefficients", self.d + 1)));
        }
        let mut out = CMatrix::zeros(self.n);
        for (j, &c) in coeff.iter().enumerate() {
            if c != Complex64::ZERO {
                out = out.add(&self.e[j].scale(c))?;
            }
        }
        Ok(out)
    }

    /// Expand a matrix over the `E`-basis: `M = Σ_j c_j E_j`, or report how
    /// far `M` is from the Bose–Mesner algebra.
    ///
    /// Each `E_j` is a rank-`m_j` projection annihilated by the others, so
    /// `c_j = tr(E_j M) / m_j`; the returned residual is the max-norm gap of
    /// the reconstruction.
    pub fn expand_in_e_basis(&self, mat: &CMatrix) -> Result<(Vec<Complex64>, f64)> {
        if mat.size() != self.n {
            return Err(Error::Shape(format!("matrix is {}×{}, scheme has n = {}", mat.size(), mat.size(), self.n)));
        }
        let mut coeff = vec![Complex64::ZERO; self.d + 1];
        for j in 0..=self.d {
            let mut trace = Complex64::ZERO;
            for x in 0..self.n {
                for y in 0..self.n {
                    trace += self.e[j].get(x, y) * mat.get(y, x);
                }
            }
            coeff[j] = trace / self.m[j] as f64;
        }
        let recon = self.e_combination(&coeff)?;
        let resid = mat.max_diff(&recon)?;
        Ok((coeff, resid))
    }
}
