//! Exact integer combinatorics for the multinomial expansions.
//!
//! Index conventions: a [`Composition`] is stored 0-based, but the
//! triangular-slot maps ([`alpha_beta_index`], [`flat_index`]) address its
//! components 1-based, so slot `i` of the triangle lives at `parts[i - 1]`.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::error::{precondition, Result};

/// A vector of nonnegative integers with a fixed coordinate sum.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Composition {
    parts: Vec<usize>,
}

impl Composition {
    pub fn new(parts: Vec<usize>) -> Self {
        Self { parts }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn total(&self) -> usize {
        self.parts.iter().sum()
    }

    /// 1-based component access.
    pub fn slot(&self, i: usize) -> usize {
        self.parts[i - 1]
    }
}

/// A length-`p` vector of nonnegative integers (exponent vectors like `r`, `α(k)`, `η(r, k)`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexVector(pub Vec<usize>);

impl IndexVector {
    pub fn zeros(p: usize) -> Self {
        Self(vec![0; p])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }
}

/// Every vector in `Z_{>=0}^m` with coordinate sum `n`, in lexicographic order.
pub fn compositions(n: usize, m: usize) -> Vec<Composition> {
    assert!(m >= 1, "compositions need at least one part");
    let mut out = Vec::new();
    let mut current = vec![0usize; m];
    fill_compositions(n, 0, &mut current, &mut out);
    out
}

fn fill_compositions(remaining: usize, pos: usize, current: &mut Vec<usize>, out: &mut Vec<Composition>) {
    let m = current.len();
    if pos + 1 == m {
        current[pos] = remaining;
        out.push(Composition::new(current.clone()));
        return;
    }
    for v in 0..=remaining {
        current[pos] = v;
        fill_compositions(remaining - v, pos + 1, current, out);
    }
}

/// Binomial coefficient extended by `binom(n, -1) = δ_{n,-1}` and zero elsewhere
/// outside `n >= k >= 0`.
pub fn binomial_with_convention(n: i64, k: i64) -> BigInt {
    if k == -1 {
        return if n == -1 { BigInt::one() } else { BigInt::zero() };
    }
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    BigInt::from(binomial(n as u64, k as u64))
}

pub(crate) fn binomial(n: u64, k: u64) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `n! / ∏ k_i!`, exact.
pub fn multinomial(n: usize, k: &Composition) -> Result<BigUint> {
    if k.total() != n {
        return Err(precondition(format!(
            "multinomial: parts sum to {} but n = {n}",
            k.total()
        )));
    }
    // Product of binomials avoids forming n! explicitly.
    let mut acc = BigUint::one();
    let mut seen = 0u64;
    for &part in k.parts() {
        seen += part as u64;
        acc *= binomial(seen, part as u64);
    }
    Ok(acc)
}

/// Number of slots in the triangular `f_{k,ℓ}` array, `(p+1)(p+2)/2`.
pub fn triangle_size(p: usize) -> usize {
    (p + 1) * (p + 2) / 2
}

/// `(α(k, j), β(k, j))` for a composition over the triangular array.
///
/// `α(k, j) = Σ_{t=1}^{p-j+1} k((j+t)(j+t+1)/2 - j)` and
/// `β(k, j) = Σ_{t=1}^{p-j+1} k((j+t-1)(j+t)/2 + j + 1)`, with 1-based component indexing.
pub fn alpha_beta_index(k: &Composition, j: usize, p: usize) -> Result<(usize, usize)> {
    if k.len() != triangle_size(p) {
        return Err(precondition(format!(
            "alpha_beta_index: composition has {} parts, expected {}",
            k.len(),
            triangle_size(p)
        )));
    }
    if j == 0 || j > p {
        return Err(precondition(format!("alpha_beta_index: j = {j} outside 1..={p}")));
    }
    let mut alpha = 0;
    let mut beta = 0;
    for t in 1..=(p - j + 1) {
        alpha += k.slot((j + t) * (j + t + 1) / 2 - j);
        beta += k.slot((j + t - 1) * (j + t) / 2 + j + 1);
    }
    Ok((alpha, beta))
}

/// The vectors `α(k) = (α(k,1), …, α(k,p))` and `β(k)`.
pub fn alpha_beta_vectors(k: &Composition, p: usize) -> Result<(IndexVector, IndexVector)> {
    let mut alpha = Vec::with_capacity(p);
    let mut beta = Vec::with_capacity(p);
    for j in 1..=p {
        let (a, b) = alpha_beta_index(k, j, p)?;
        alpha.push(a);
        beta.push(b);
    }
    Ok((IndexVector(alpha), IndexVector(beta)))
}

/// Position of `f_{k,ℓ}` in the flattened triangle: `ℓ(ℓ+1)/2 + k + 1`.
pub fn flat_index(k_row: usize, ell: usize) -> Result<usize> {
    if k_row > ell {
        return Err(precondition(format!("flat_index: row {k_row} exceeds column {ell}")));
    }
    Ok(ell * (ell + 1) / 2 + k_row + 1)
}

/// `η(r, k) = (k_1 + r_2, …, k_{p-1} + r_p, k_p)`.
pub fn eta_map(r: &IndexVector, k: &Composition) -> Result<IndexVector> {
    let p = r.len();
    if p == 0 || k.len() != p + 1 {
        return Err(precondition(format!(
            "eta_map: r has {} entries and k has {}, expected p and p+1",
            r.len(),
            k.len()
        )));
    }
    let kp = k.parts();
    let out = (1..=p)
        .map(|i| if i < p { kp[i] + r.0[i] } else { kp[p] })
        .collect();
    Ok(IndexVector(out))
}

/// All exponent vectors of length `p` with total at most `max_total`, graded then lexicographic.
pub fn index_vectors_up_to(p: usize, max_total: usize) -> Vec<IndexVector> {
    (0..=max_total)
        .flat_map(|t| compositions(t, p))
        .map(|c| IndexVector(c.parts))
        .collect()
}
