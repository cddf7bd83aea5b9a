//! Builtin scheme families.
//!
//! All builtins are distance schemes of named distance-regular graphs,
//! constructed with a fixed internal seed so repeated calls return
//! identical spectral data.

use crate::algebra::{IntMatrix, Tolerance};
use crate::{Error, Result};

use super::AssociationScheme;

/// Seed for the spectral split of builtin schemes. The split is
/// post-verified, so the value only needs to be fixed, not special.
pub const BUILTIN_SEED: u64 = 0x5caf_f01d;

/// Largest vertex count a scheme is allowed to reach; dense spectral
/// work beyond this is outside the design envelope.
pub const MAX_VERTICES: usize = 1024;

/// Construct a builtin scheme by name.
///
/// Known names and parameters:
///
/// * `petersen` — the Petersen graph (Kneser graph on 2-subsets of a
///   5-set), 2 classes on 10 vertices;
/// * `hamming` `(d, q)` — `H(d, q)`, words of length `d` over `q` symbols;
/// * `johnson` `(n, k)` — `J(n, k)`, `k`-subsets of an `n`-set;
/// * `cycle` `(n)` — the `n`-cycle;
/// * `complete` `(n)` — the 1-class scheme on `n` vertices;
/// * `shrikhande` — the Shrikhande graph (Cayley graph on ℤ₄ × ℤ₄);
/// * `doob` `(s, t)`, `s ≥ 1` — Cartesian product of `s` Shrikhande graphs
///   and `t` copies of `K₄`, sharing the parameters of `H(2s + t, 4)`.
pub fn builtin(name: &str, params: &[i64]) -> Result<AssociationScheme> {
    let tol = Tolerance::default();
    let arity = |want: usize| -> Result<()> {
        if params.len() != want {
            return Err(Error::BadBuiltin(format!(
                "{name} takes {want} parameter(s), got {}",
                params.len()
            )));
        }
        Ok(())
    };
    let adj = match name {
        "petersen" => {
            arity(0)?;
            petersen_adjacency()
        }
        "hamming" => {
            arity(2)?;
            let (d, q) = (params[0], params[1]);
            if d < 1 || q < 2 {
                return Err(Error::BadBuiltin(format!("hamming needs d ≥ 1 and q ≥ 2, got ({d}, {q})")));
            }
            let n = (q as usize).checked_pow(d as u32).filter(|&n| n <= MAX_VERTICES);
            let Some(n) = n else {
                return Err(Error::BadBuiltin(format!("hamming({d}, {q}) exceeds {MAX_VERTICES} vertices")));
            };
            hamming_adjacency(d as usize, q as usize, n)
        }
        "johnson" => {
            arity(2)?;
            let (nn, k) = (params[0], params[1]);
            if nn < 2 || k < 1 || k >= nn {
                return Err(Error::BadBuiltin(format!("johnson needs 1 ≤ k < n, got ({nn}, {k})")));
            }
            let verts = k_subsets(nn as usize, k as usize);
            if verts.len() > MAX_VERTICES {
                return Err(Error::BadBuiltin(format!("johnson({nn}, {k}) exceeds {MAX_VERTICES} vertices")));
            }
            johnson_adjacency(&verts, k as usize)
        }
        "cycle" => {
            arity(1)?;
            let n = params[0];
            if n < 3 || n as usize > MAX_VERTICES {
                return Err(Error::BadBuiltin(format!("cycle needs 3 ≤ n ≤ {MAX_VERTICES}, got {n}")));
            }
            let n = n as usize;
            IntMatrix::from_fn(n, |i, j| {
                let diff = (i + n - j) % n;
                i64::from(diff == 1 || diff == n - 1)
            })
        }
        "complete" => {
            arity(1)?;
            let n = params[0];
            if n < 2 || n as usize > MAX_VERTICES {
                return Err(Error::BadBuiltin(format!("complete needs 2 ≤ n ≤ {MAX_VERTICES}, got {n}")));
            }
            let n = n as usize;
            IntMatrix::from_fn(n, |i, j| i64::from(i != j))
        }
        "shrikhande" => {
            arity(0)?;
            shrikhande_adjacency()
        }
        "doob" => {
            arity(2)?;
            let (s, t) = (params[0], params[1]);
            if s < 1 || t < 0 {
                return Err(Error::BadBuiltin(format!("doob needs s ≥ 1 and t ≥ 0, got ({s}, {t})")));
            }
            let size = 16usize
                .checked_pow(s as u32)
                .and_then(|a| a.checked_mul(4usize.pow(t as u32)))
                .filter(|&n| n <= MAX_VERTICES);
            if size.is_none() {
                return Err(Error::BadBuiltin(format!("doob({s}, {t}) exceeds {MAX_VERTICES} vertices")));
            }
            let mut adj = shrikhande_adjacency();
            for _ in 1..s {
                adj = cartesian_product(&adj, &shrikhande_adjacency());
            }
            let k4 = IntMatrix::from_fn(4, |i, j| i64::from(i != j));
            for _ in 0..t {
                adj = cartesian_product(&adj, &k4);
            }
            adj
        }
        other => return Err(Error::BadBuiltin(format!("unknown scheme name {other:?}"))),
    };
    AssociationScheme::from_graph(&adj, &tol, BUILTIN_SEED)
}

/// Parse a scheme spec of the form `name` or `name:p1,p2,…` and build it.
pub fn builtin_from_spec(spec: &str) -> Result<AssociationScheme> {
    let (name, params) = match spec.split_once(':') {
        None => (spec, Vec::new()),
        Some((name, rest)) => {
            let params: Vec<i64> = rest
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<i64>()
                        .map_err(|_| Error::BadBuiltin(format!("bad parameter {s:?} in {spec:?}")))
                })
                .collect::<Result<_>>()?;
            (name, params)
        }
    };
    builtin(name.trim(), &params)
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    (0..n).combinations(k).collect()
}

fn petersen_adjacency() -> IntMatrix {
    let verts = k_subsets(5, 2);
    IntMatrix::from_fn(verts.len(), |i, j| {
        i64::from(i != j && verts[i].iter().all(|x| !verts[j].contains(x)))
    })
}

fn hamming_adjacency(d: usize, q: usize, n: usize) -> IntMatrix {
    // Vertex index = base-q digits, most significant first.
    let digits = |mut x: usize| -> Vec<usize> {
        let mut out = vec![0; d];
        for slot in (0..d).rev() {
            out[slot] = x % q;
            x /= q;
        }
        out
    };
    let words: Vec<Vec<usize>> = (0..n).map(digits).collect();
    IntMatrix::from_fn(n, |i, j| {
        let dist = words[i].iter().zip(&words[j]).filter(|(a, b)| a != b).count();
        i64::from(dist == 1)
    })
}

fn johnson_adjacency(verts: &[Vec<usize>], k: usize) -> IntMatrix {
    IntMatrix::from_fn(verts.len(), |i, j| {
        let inter = verts[i].iter().filter(|x| verts[j].contains(x)).count();
        i64::from(i != j && inter == k - 1)
    })
}

fn shrikhande_adjacency() -> IntMatrix {
    // Cayley graph on ℤ₄ × ℤ₄ with connection set
    // {±(1,0), ±(0,1), ±(1,1)}; vertex index = 4a + b.
    const CONN: [(usize, usize); 6] = [(1, 0), (3, 0), (0, 1), (0, 3), (1, 1), (3, 3)];
    IntMatrix::from_fn(16, |i, j| {
        let (a1, b1) = (i / 4, i % 4);
        let (a2, b2) = (j / 4, j % 4);
        let diff = ((a1 + 4 - a2) % 4, (b1 + 4 - b2) % 4);
        i64::from(CONN.contains(&diff))
    })
}

/// Cartesian (box) product of two graphs; index = `u·|H| + x`.
fn cartesian_product(g: &IntMatrix, h: &IntMatrix) -> IntMatrix {
    let (gn, hn) = (g.size(), h.size());
    IntMatrix::from_fn(gn * hn, |i, j| {
        let (u, x) = (i / hn, i % hn);
        let (v, y) = (j / hn, j % hn);
        use num_traits::Zero;
        i64::from((u == v && !h.get(x, y).is_zero()) || (x == y && !g.get(u, v).is_zero()))
    })
}
