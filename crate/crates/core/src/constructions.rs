//! Example representations: ping-pong generators, symmetric and exterior
//! powers, direct sums, perturbations, and SL2 weight bookkeeping.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;

use crate::automaton::ray_rng;
use crate::error::{Error, Result};
use crate::exterior::compound;
use crate::representation::Representation;

/// Rank-two Schottky group: `a = diag(t, 1/t)` and `b` its conjugate by the
/// rotation of angle `theta`.
pub fn schottky_fuchsian(t: f64, theta: f64) -> Result<Representation> {
    if !(t > 1.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!(
            "translation parameter {t} must exceed 1"
        )));
    }
    // eigenlines of b are the coordinate axes rotated by theta
    if (2.0 * theta).sin().abs() < 1e-12 {
        return Err(Error::DegenerateAxes);
    }
    let a = DMatrix::from_row_slice(2, 2, &[t, 0.0, 0.0, 1.0 / t]);
    let a_inv = DMatrix::from_row_slice(2, 2, &[1.0 / t, 0.0, 0.0, t]);
    let (c, s) = (theta.cos(), theta.sin());
    let r = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
    let rt = r.transpose();
    let b = &r * &a * &rt;
    let b_inv = &r * &a_inv * &rt;
    Representation::from_pairs(
        format!("schottky({t},{theta})"),
        vec![(a, a_inv), (b, b_inv)],
    )
}

/// Rank-one group generated by `diag(t, 1/t)`.
pub fn cyclic_hyperbolic(t: f64) -> Result<Representation> {
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!(
            "eigenvalue {t} must be positive"
        )));
    }
    let a = DMatrix::from_row_slice(2, 2, &[t, 0.0, 0.0, 1.0 / t]);
    let a_inv = DMatrix::from_row_slice(2, 2, &[1.0 / t, 0.0, 0.0, t]);
    Representation::from_pairs(format!("cyclic({t})"), vec![(a, a_inv)])
}

/// Degree-`k` monomials in `n` variables as exponent vectors, ordered so
/// that higher powers of earlier variables come first.
pub fn monomials(n: usize, k: usize) -> Vec<Vec<u32>> {
    fn rec(n: usize, k: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n - 1 {
            prefix.push(k as u32);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=k).rev() {
            prefix.push(e as u32);
            rec(n, k - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    rec(n, k, &mut Vec::with_capacity(n), &mut out);
    out
}

fn ln_factorial_vec(e: &[u32]) -> f64 {
    e.iter()
        .map(|&x| (1..=x).map(|i| (i as f64).ln()).sum::<f64>())
        .sum()
}

/// Action of `a` on degree-`k` polynomials in the basis
/// `sqrt(k!/alpha!) x^alpha`, which makes orthogonal matrices act
/// orthogonally.
pub fn symmetric_power_matrix(a: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let n = a.nrows();
    let basis = monomials(n, k);
    let index: BTreeMap<&[u32], usize> = basis
        .iter()
        .enumerate()
        .map(|(i, e)| (e.as_slice(), i))
        .collect();
    let mut out = DMatrix::zeros(basis.len(), basis.len());
    for (col, alpha) in basis.iter().enumerate() {
        // expand prod_j (sum_i a_ij x_i)^{alpha_j}
        let mut poly: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        poly.insert(vec![0; n], 1.0);
        for (j, &e) in alpha.iter().enumerate() {
            for _ in 0..e {
                let mut next: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
                for (mono, c) in &poly {
                    for i in 0..n {
                        let aij = a[(i, j)];
                        if aij == 0.0 {
                            continue;
                        }
                        let mut m = mono.clone();
                        m[i] += 1;
                        *next.entry(m).or_insert(0.0) += c * aij;
                    }
                }
                poly = next;
            }
        }
        let la = ln_factorial_vec(alpha);
        for (beta, c) in poly {
            let row = index[beta.as_slice()];
            out[(row, col)] = c * (0.5 * (ln_factorial_vec(&beta) - la)).exp();
        }
    }
    out
}

fn map_rep(
    rep: &Representation,
    label: String,
    f: impl Fn(&DMatrix<f64>) -> DMatrix<f64>,
) -> Result<Representation> {
    let pairs = rep
        .generator_pairs()
        .iter()
        .map(|(g, inv)| (f(g), f(inv)))
        .collect();
    Representation::from_pairs(label, pairs)
}

/// `S^k` of a representation.
pub fn symmetric_power(rep: &Representation, k: usize) -> Result<Representation> {
    if k == 0 {
        return Err(Error::InvalidInput("symmetric power needs k >= 1".into()));
    }
    map_rep(rep, format!("sym({k},{})", rep.label()), |m| {
        symmetric_power_matrix(m, k)
    })
}

/// The `d`-dimensional irreducible representation composed with a
/// two-dimensional one.
pub fn irreducible_rep(d: usize, rep: &Representation) -> Result<Representation> {
    if d < 2 {
        return Err(Error::InvalidInput(format!(
            "irreducible dimension {d} below 2"
        )));
    }
    if rep.dim() != 2 {
        return Err(Error::DimensionMismatch(rep.dim(), 2));
    }
    Ok(symmetric_power(rep, d - 1)?.with_label(format!("irr({d})∘{}", rep.label())))
}

/// `\wedge^p` of a representation.
pub fn exterior_power(rep: &Representation, p: usize) -> Result<Representation> {
    if p == 0 || p > rep.dim() {
        return Err(Error::IndexOutOfRange {
            index: p,
            max: rep.dim(),
        });
    }
    map_rep(rep, format!("wedge({p},{})", rep.label()), |m| {
        compound(m, p)
    })
}

/// Block-diagonal sum of two representations of the same group.
pub fn direct_sum(a: &Representation, b: &Representation) -> Result<Representation> {
    if a.rank() != b.rank() {
        return Err(Error::Validation(format!(
            "ranks differ: {} vs {}",
            a.rank(),
            b.rank()
        )));
    }
    let (da, db) = (a.dim(), b.dim());
    let block = |x: &DMatrix<f64>, y: &DMatrix<f64>| {
        let mut m = DMatrix::zeros(da + db, da + db);
        m.view_mut((0, 0), (da, da)).copy_from(x);
        m.view_mut((da, da), (db, db)).copy_from(y);
        m
    };
    let pairs = a
        .generator_pairs()
        .iter()
        .zip(b.generator_pairs().iter())
        .map(|((g, gi), (h, hi))| (block(g, h), block(gi, hi)))
        .collect();
    Representation::from_pairs(format!("sum({},{})", a.label(), b.label()), pairs)
}

/// Multiplies each generator image by `exp(X)` for a seeded random `X`
/// with entries in `[-epsilon, epsilon]`; inverses become `exp(-X) A^-1`.
pub fn perturb(rep: &Representation, epsilon: f64, seed: u64) -> Result<Representation> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "epsilon {epsilon} must be non-negative"
        )));
    }
    let d = rep.dim();
    let mut rng = ray_rng(seed, 0);
    let pairs = rep
        .generator_pairs()
        .into_iter()
        .map(|(g, inv)| {
            if epsilon == 0.0 {
                return (g, inv);
            }
            let x = DMatrix::from_fn(d, d, |_, _| epsilon * (2.0 * rng.random::<f64>() - 1.0));
            let ex = x.clone().exp();
            let exi = (-x).exp();
            (g * ex, exi * inv)
        })
        .collect();
    Representation::from_pairs(format!("perturb({epsilon},{seed},{})", rep.label()), pairs)
}

/// Dimensions of the irreducible factors, sorted non-increasing.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::InvalidInput("parts must be positive".into()));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self(parts))
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// Weights of an SL2 module, sorted non-increasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightList(Vec<i64>);

impl WeightList {
    pub fn new(mut weights: Vec<i64>) -> Self {
        weights.sort_unstable_by(|a, b| b.cmp(a));
        Self(weights)
    }

    pub fn weights(&self) -> &[i64] {
        &self.0
    }
}

/// Union over parts `d` of `{d-1, d-3, ..., -(d-1)}`.
pub fn sl2_weights(partition: &Partition) -> WeightList {
    let mut w = Vec::with_capacity(partition.total());
    for &d in partition.parts() {
        let top = d as i64 - 1;
        w.extend((0..d as i64).map(|j| top - 2 * j));
    }
    WeightList::new(w)
}

/// `d_1 > d_2 + 2(k-1)`; a single irreducible factor counts as coherent for
/// `k <= d_1 - 1`.
pub fn coherence_check(partition: &Partition, k: usize) -> bool {
    let p = partition.parts();
    let d1 = p[0] as i64;
    let k = k as i64;
    if p.len() == 1 {
        return k < d1;
    }
    d1 > p[1] as i64 + 2 * (k - 1)
}

/// Recovers the partition by repeatedly removing the longest string
/// `m, m-2, ..., -m` headed by the current largest weight.
pub fn decompose_weights(weights: &WeightList) -> Result<Partition> {
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for &w in weights.weights() {
        *counts.entry(w).or_insert(0) += 1;
    }
    for (&w, &c) in &counts {
        if counts.get(&-w) != Some(&c) {
            return Err(Error::NotAnSl2Module(format!("weight {w} has no mirror")));
        }
    }
    let mut parts = Vec::new();
    while let Some((&m, _)) = counts.iter().next_back() {
        if m < 0 {
            return Err(Error::NotAnSl2Module(format!(
                "leftover negative weight {m}"
            )));
        }
        let mut w = m;
        while w >= -m {
            match counts.get_mut(&w) {
                Some(c) => {
                    *c -= 1;
                    if *c == 0 {
                        counts.remove(&w);
                    }
                }
                None => {
                    return Err(Error::NotAnSl2Module(format!(
                        "string from {m} breaks at {w}"
                    )))
                }
            }
            w -= 2;
        }
        parts.push((m + 1) as usize);
    }
    Partition::new(parts)
}
