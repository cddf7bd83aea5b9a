//! Triple regularity and its dual: whether the number of common
//! neighbours of a vertex triple (resp. the idempotent analogue) depends
//! only on the pairwise relations of the triple.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::algebra::{tensor_inner, Tensor, Tolerance};
use crate::scaffold::WeightRef;
use crate::schemes::AssociationScheme;
use crate::{Error, Result};

use super::eval_shape;
use super::wspace::{wspace_rank, WShape};
use crate::scaffold::EvalContext;

/// Largest ground set the brute-force triple sweep will visit.
pub const MAX_REGULARITY_VERTICES: usize = 128;

/// Which regularity property to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegularityMode {
    /// Counts `|{w : (x,w) ∈ R_r, (y,w) ∈ R_s, (z,w) ∈ R_t}|` constant on
    /// each relation-type class of triples.
    Triply,
    /// The idempotent analogue: the triple product tensor proportional to
    /// the idempotent star on each eigenspace-type class.
    Dually,
}

impl std::str::FromStr for RegularityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "triply" => Ok(RegularityMode::Triply),
            "dually" => Ok(RegularityMode::Dually),
            other => Err(Error::Range(format!("unknown regularity mode `{other}`"))),
        }
    }
}

/// A counterexample to regularity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularityWitness {
    /// Vertex triple where constancy (or proportionality) fails.
    pub triple: (usize, usize, usize),
    /// Relation or eigenspace types `(i, j, k)` of the triple's class.
    pub group: (usize, usize, usize),
    /// The parameter triple `(r, s, t)` that exposes the failure.
    pub params: (usize, usize, usize),
}

/// Outcome of a regularity check.
#[derive(Debug, Clone)]
pub struct RegularityResult {
    pub mode: RegularityMode,
    /// True when the property holds.
    pub flag: bool,
    /// `(i, j, k, r, s, t)` → the constant `τ` (triply) or the
    /// proportionality factor `σ` (dually). Complete when `flag` is true;
    /// filled up to the first failure otherwise.
    pub table: BTreeMap<(usize, usize, usize, usize, usize, usize), Complex64>,
    /// First counterexample found, present exactly when `flag` is false.
    pub witness: Option<RegularityWitness>,
    /// Span ranks of the two W-spaces whose equality is equivalent to the
    /// flag: (triangle, K4) for triply, (wye, tristar) for dually.
    pub rank_check: (usize, usize),
}

impl RegularityResult {
    /// Whether the rank cross-check agrees with the brute-force flag.
    pub fn ranks_agree(&self) -> bool {
        (self.rank_check.0 == self.rank_check.1) == self.flag
    }
}

/// Decide triple (or dual triple) regularity of a symmetric scheme by
/// brute force, and cross-check the verdict against the W-space rank
/// characterization.
///
/// Triply: for every vertex triple and every `(r,s,t)` the count of
/// vertices `w` in relations `r, s, t` to the triple must depend only on
/// the triple's relation types `(i,j,k)`. Dually: for every type tuple,
/// the idempotent triple tensor must be a scalar multiple of the
/// idempotent star on `(i,j,k)` (zero where the star vanishes). Ground
/// sets beyond [`MAX_REGULARITY_VERTICES`] vertices are rejected as
/// `too-large`; non-symmetric schemes as `symmetric-only`.
pub fn regularity_check(
    scheme: &AssociationScheme,
    mode: RegularityMode,
    tol: &Tolerance,
) -> Result<RegularityResult> {
    if !scheme.is_symmetric() {
        return Err(Error::SymmetricOnly(
            "regularity sweeps are defined for symmetric schemes".into(),
        ));
    }
    if scheme.n() > MAX_REGULARITY_VERTICES {
        return Err(Error::TooLarge(format!(
            "{} vertices exceeds the regularity sweep cap of {}",
            scheme.n(),
            MAX_REGULARITY_VERTICES
        )));
    }
    let (flag, table, witness) = match mode {
        RegularityMode::Triply => triply_brute(scheme),
        RegularityMode::Dually => dually_brute(scheme, tol)?,
    };
    let rank_check = match mode {
        RegularityMode::Triply => (
            wspace_rank(scheme, &WShape::Triangle, tol)?,
            wspace_rank(scheme, &WShape::K4, tol)?,
        ),
        RegularityMode::Dually => (
            wspace_rank(scheme, &WShape::Wye, tol)?,
            wspace_rank(scheme, &WShape::Tristar, tol)?,
        ),
    };
    Ok(RegularityResult { mode, flag, table, witness, rank_check })
}

type BruteOutcome = (
    bool,
    BTreeMap<(usize, usize, usize, usize, usize, usize), Complex64>,
    Option<RegularityWitness>,
);

fn triply_brute(scheme: &AssociationScheme) -> BruteOutcome {
    let n = scheme.n();
    let d = scheme.d();
    let width = d + 1;
    let rel: Vec<Vec<usize>> =
        (0..n).map(|x| (0..n).map(|y| scheme.relation_of(x, y)).collect()).collect();

    let mut table = BTreeMap::new();
    let mut counters = vec![0u32; width * width * width];
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let group = (rel[y][z], rel[x][z], rel[x][y]);
                counters.fill(0);
                for w in 0..n {
                    counters[(rel[x][w] * width + rel[y][w]) * width + rel[z][w]] += 1;
                }
                for r in 0..width {
                    for s in 0..width {
                        for t in 0..width {
                            let count = counters[(r * width + s) * width + t];
                            let key = (group.0, group.1, group.2, r, s, t);
                            let value = Complex64::new(count as f64, 0.0);
                            match table.get(&key) {
                                None => {
                                    table.insert(key, value);
                                }
                                Some(&prev) if prev == value => {}
                                Some(_) => {
                                    return (
                                        false,
                                        table,
                                        Some(RegularityWitness {
                                            triple: (x, y, z),
                                            group,
                                            params: (r, s, t),
                                        }),
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    (true, table, None)
}

fn dually_brute(scheme: &AssociationScheme, tol: &Tolerance) -> Result<BruteOutcome> {
    let n = scheme.n();
    let d = scheme.d();
    let ctx = EvalContext::new(scheme.clone());

    let mut table = BTreeMap::new();
    for i in 0..=d {
        for j in 0..=d {
            for k in 0..=d {
                // Idempotent star on (i,j,k): legs from the three roots
                // into a shared hollow node.
                let star = eval_shape(
                    4,
                    &[
                        (0, 3, WeightRef::basis_e(i)),
                        (1, 3, WeightRef::basis_e(j)),
                        (2, 3, WeightRef::basis_e(k)),
                    ],
                    &[0, 1, 2],
                    &ctx,
                )?;
                let star_norm_sq = tensor_inner(&star, &star)?.re;
                for r in 0..=d {
                    for s in 0..=d {
                        for t in 0..=d {
                            // Idempotent triple tensor: a triangle of
                            // idempotents hung between the three roots.
                            let triple = eval_shape(
                                6,
                                &[
                                    (0, 3, WeightRef::basis_e(i)),
                                    (1, 4, WeightRef::basis_e(j)),
                                    (2, 5, WeightRef::basis_e(k)),
                                    (4, 5, WeightRef::basis_e(r)),
                                    (5, 3, WeightRef::basis_e(s)),
                                    (3, 4, WeightRef::basis_e(t)),
                                ],
                                &[0, 1, 2],
                                &ctx,
                            )?;
                            let key = (i, j, k, r, s, t);
                            let scale = triple.max_abs().max(star.max_abs()).max(1.0);
                            let bound = tol.bound(scale);
                            if star_norm_sq < 1e-12 {
                                // The star vanishes; the triple tensor
                                // must vanish with it.
                                if triple.max_abs() > bound {
                                    let witness = RegularityWitness {
                                        triple: argmax_triple(&triple, n),
                                        group: (i, j, k),
                                        params: (r, s, t),
                                    };
                                    return Ok((false, table, Some(witness)));
                                }
                                table.insert(key, Complex64::ZERO);
                                continue;
                            }
                            let sigma = tensor_inner(&star, &triple)? / star_norm_sq;
                            let residual = triple.sub(&star.scale(sigma))?;
                            if residual.max_abs() > bound {
                                let witness = RegularityWitness {
                                    triple: argmax_triple(&residual, n),
                                    group: (i, j, k),
                                    params: (r, s, t),
                                };
                                return Ok((false, table, Some(witness)));
                            }
                            table.insert(key, sigma);
                        }
                    }
                }
            }
        }
    }
    Ok((true, table, None))
}

/// Multi-index of the largest-modulus entry of an order-3 tensor.
fn argmax_triple(t: &Tensor, n: usize) -> (usize, usize, usize) {
    let mut best = 0usize;
    let mut best_norm = -1.0;
    for (off, z) in t.data().iter().enumerate() {
        if z.norm() > best_norm {
            best_norm = z.norm();
            best = off;
        }
    }
    let z = best % n;
    let y = (best / n) % n;
    let x = best / (n * n);
    (x, y, z)
}

