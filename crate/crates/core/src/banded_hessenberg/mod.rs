//! Finite banded lower Hessenberg matrices and their characteristic polynomials.
//!
//! A [`FiniteBandedMatrix`] of size `n` with `p` subdiagonals has ones on the
//! superdiagonal and `m_{j+k, j} = b_j^{(k)}` for `0 <= k <= p`. The
//! [`PolynomialFamily`] holds `Q_n = det(zI - B)` together with the trailing
//! (`Q_ℓ⁺`) and leading (`Q_ℓ⁻`) principal minors, each produced by its own
//! recurrence.

mod band_power;
mod dense;

pub use band_power::{power_diagonal_entries, trace_power, trace_powers};
pub use dense::resolvent_entry_dense_oracle;

use crate::error::{precondition, Error, Result};
use crate::poly::Poly;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteBandedMatrix<S> {
    n: usize,
    p: usize,
    /// `diag[k][j - 1] = b_j^{(k)}`, `1 <= j <= n - k`.
    diag: Vec<Vec<S>>,
}

impl<S: Scalar> FiniteBandedMatrix<S> {
    pub fn new(n: usize, p: usize, diag: Vec<Vec<S>>) -> Result<Self> {
        if diag.len() != p + 1 {
            return Err(precondition(format!(
                "banded matrix needs {} diagonals, got {}",
                p + 1,
                diag.len()
            )));
        }
        for (k, d) in diag.iter().enumerate() {
            if d.len() != n.saturating_sub(k) {
                return Err(precondition(format!(
                    "diagonal {k} has {} entries, expected {}",
                    d.len(),
                    n.saturating_sub(k)
                )));
            }
        }
        Ok(Self { n, p, diag })
    }

    /// Builds the matrix from `b(k, j) = b_j^{(k)}` (1-based `j`).
    pub fn from_fn(n: usize, p: usize, mut b: impl FnMut(usize, usize) -> S) -> Self {
        let diag = (0..=p)
            .map(|k| (1..=n.saturating_sub(k)).map(|j| b(k, j)).collect())
            .collect();
        Self { n, p, diag }
    }

    pub fn zeros(n: usize, p: usize) -> Self {
        Self::from_fn(n, p, |_, _| S::zero())
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bands(&self) -> usize {
        self.p
    }

    pub fn diagonals(&self) -> &[Vec<S>] {
        &self.diag
    }

    /// `b_j^{(k)}`, or `None` when the position lies outside the matrix.
    pub fn coeff(&self, k: usize, j: isize) -> Option<&S> {
        if j < 1 || k > self.p {
            return None;
        }
        self.diag[k].get(j as usize - 1)
    }

    pub fn coeff_mut(&mut self, k: usize, j: usize) -> &mut S {
        &mut self.diag[k][j - 1]
    }

    /// Entry `(i, j)`, 1-based.
    pub fn entry(&self, i: usize, j: usize) -> S {
        if i + 1 == j {
            return S::one();
        }
        if i >= j && i - j <= self.p {
            return self.diag[i - j][j - 1].clone();
        }
        S::zero()
    }

    pub fn to_dense(&self) -> Vec<Vec<S>> {
        (1..=self.n)
            .map(|i| (1..=self.n).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    /// `B v` for a vector indexed from 0 (position `i` is row `i + 1`).
    pub fn matvec(&self, v: &[S]) -> Vec<S> {
        let n = self.n;
        let mut out = vec![S::zero(); n];
        for c in 0..n {
            if v[c].is_zero() {
                continue;
            }
            if c > 0 {
                out[c - 1] = out[c - 1].clone() + v[c].clone();
            }
            for k in 0..=self.p {
                if c + k < n {
                    out[c + k] = out[c + k].clone() + self.diag[k][c].clone() * v[c].clone();
                }
            }
        }
        out
    }

    pub fn max_modulus(&self) -> f64 {
        self.diag
            .iter()
            .flatten()
            .map(|x| x.modulus())
            .fold(0.0, f64::max)
    }
}

/// One-sided diagonal sequences `a_n^{(k)}`, `n = 1..=len`, `k = 0..=p`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalSequences<S> {
    /// `a[k][n - 1] = a_n^{(k)}`.
    a: Vec<Vec<S>>,
}

impl<S: Scalar> DiagonalSequences<S> {
    pub fn new(a: Vec<Vec<S>>) -> Result<Self> {
        let Some(len) = a.first().map(Vec::len) else {
            return Err(precondition("diagonal sequences need at least the main diagonal"));
        };
        if a.iter().any(|d| d.len() != len) {
            return Err(precondition("all diagonal sequences must share one length"));
        }
        Ok(Self { a })
    }

    pub fn from_fn(p: usize, len: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        Self {
            a: (0..=p).map(|k| (1..=len).map(|n| f(k, n)).collect()).collect(),
        }
    }

    pub fn constant(p: usize, len: usize, values: &[S]) -> Self {
        Self::from_fn(p, len, |k, _| values[k].clone())
    }

    pub fn bands(&self) -> usize {
        self.a.len() - 1
    }

    pub fn len(&self) -> usize {
        self.a[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `a_n^{(k)}`, 1-based `n`.
    pub fn get(&self, k: usize, n: usize) -> &S {
        &self.a[k][n - 1]
    }

    /// `(a_1^{(0)}, …, a_1^{(p)})`.
    pub fn first_column(&self) -> Vec<S> {
        self.a.iter().map(|d| d[0].clone()).collect()
    }

    /// Sequences of the operator with its first row and column removed: `a_{n+by}`.
    pub fn shifted(&self, by: usize) -> Result<Self> {
        if by >= self.len() {
            return Err(Error::InsufficientWindow {
                needed: by + 1,
                available: self.len(),
            });
        }
        Ok(Self {
            a: self.a.iter().map(|d| d[by..].to_vec()).collect(),
        })
    }

    /// Principal `n × n` truncation `H_n`.
    pub fn truncation(&self, n: usize) -> Result<FiniteBandedMatrix<S>> {
        if n > self.len() {
            return Err(Error::InsufficientWindow {
                needed: n,
                available: self.len(),
            });
        }
        Ok(FiniteBandedMatrix::from_fn(n, self.bands(), |k, j| {
            self.get(k, j).clone()
        }))
    }

    pub fn max_modulus(&self) -> f64 {
        self.a.iter().flatten().map(|x| x.modulus()).fold(0.0, f64::max)
    }
}

/// `Q_n`, `Q_ℓ⁺` and `Q_ℓ⁻` for `0 <= ℓ <= n - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialFamily<S> {
    pub q: Poly<S>,
    /// `Q_ℓ⁺`: trailing `ℓ × ℓ` principal minor of `zI - B`.
    pub qplus: Vec<Poly<S>>,
    /// `Q_ℓ⁻`: leading `ℓ × ℓ` principal minor of `zI - B`.
    pub qminus: Vec<Poly<S>>,
}

impl<S: Scalar> PolynomialFamily<S> {
    pub fn size(&self) -> usize {
        self.qplus.len()
    }

    /// `Q_ℓ⁺` with `Q_n⁺ = Q_n` and the zero polynomial for negative `ℓ`.
    pub fn plus(&self, ell: isize) -> Poly<S> {
        self.side(&self.qplus, ell)
    }

    /// `Q_ℓ⁻` with `Q_n⁻ = Q_n` and the zero polynomial for negative `ℓ`.
    pub fn minus(&self, ell: isize) -> Poly<S> {
        self.side(&self.qminus, ell)
    }

    fn side(&self, polys: &[Poly<S>], ell: isize) -> Poly<S> {
        if ell < 0 {
            return Poly::zero();
        }
        let ell = ell as usize;
        if ell == polys.len() {
            return self.q.clone();
        }
        polys[ell].clone()
    }
}

fn times_linear<S: Scalar>(p: &Poly<S>, b: &S) -> Poly<S> {
    // (z - b) p
    let c = p.coeffs();
    let mut out = vec![S::zero(); c.len() + 1];
    for (i, x) in c.iter().enumerate() {
        out[i + 1] = out[i + 1].clone() + x.clone();
        out[i] = out[i].clone() - b.clone() * x.clone();
    }
    Poly::new(out)
}

/// Characteristic polynomial family of `B` by three recurrences.
///
/// Leading minors follow the last-row expansion
/// `D_m = (z - b_m^{(0)}) D_{m-1} - Σ_{k=1}^{p} b_{m-k}^{(k)} D_{m-k-1}`;
/// trailing minors follow the first-column expansion
/// `T_ℓ = (z - b_i^{(0)}) T_{ℓ-1} - Σ_k b_i^{(k)} T_{ℓ-k-1}` with `i = n - ℓ + 1`.
pub fn char_poly_family<S: Scalar>(b: &FiniteBandedMatrix<S>) -> Result<PolynomialFamily<S>> {
    let n = b.size();
    if n == 0 {
        return Err(precondition("char_poly_family needs n >= 1"));
    }
    let p = b.bands();

    let mut lead: Vec<Poly<S>> = Vec::with_capacity(n + 1);
    lead.push(Poly::one());
    for m in 1..=n {
        let mut d = times_linear(&lead[m - 1], b.coeff(0, m as isize).unwrap());
        for k in 1..=p.min(m - 1) {
            let coeff = b.coeff(k, (m - k) as isize).unwrap();
            d = &d - &lead[m - k - 1].scale(coeff);
        }
        lead.push(d);
    }

    let mut trail: Vec<Poly<S>> = Vec::with_capacity(n + 1);
    trail.push(Poly::one());
    for ell in 1..=n {
        let i = (n - ell + 1) as isize;
        let mut t = times_linear(&trail[ell - 1], b.coeff(0, i).unwrap());
        for k in 1..=p.min(ell - 1) {
            let coeff = b.coeff(k, i).unwrap();
            t = &t - &trail[ell - k - 1].scale(coeff);
        }
        trail.push(t);
    }

    let q = lead.pop().unwrap();
    trail.pop();
    Ok(PolynomialFamily {
        q,
        qplus: trail,
        qminus: lead,
    })
}

/// `Q_n' - Σ_{j=1}^{n} Q_{n-j}⁺ Q_{j-1}⁻`.
pub fn derivative_identity_residual<S: Scalar>(fam: &PolynomialFamily<S>) -> Poly<S> {
    let n = fam.size() as isize;
    let mut acc = fam.q.derivative();
    for j in 1..=n {
        acc = &acc - &(&fam.plus(n - j) * &fam.minus(j - 1));
    }
    acc
}

/// Residual of the row-`j` expansion of `Q_n` in terms of `Q⁺` and `Q⁻`:
/// `Q_n - [(z - b_j^{(0)}) Q_{n-j}⁺ Q_{j-1}⁻ - Σ_{ℓ=1}^{p} Σ_{k=0}^{ℓ} b_{j-k}^{(ℓ)} Q_{n-j+k-ℓ}⁺ Q_{j-k-1}⁻]`.
///
/// A coefficient `b_m^{(ℓ)}` outside the matrix is absent; its partner
/// polynomial always has a negative index and vanishes.
pub fn row_expansion_residual<S: Scalar>(
    b: &FiniteBandedMatrix<S>,
    fam: &PolynomialFamily<S>,
    j: usize,
) -> Result<Poly<S>> {
    let n = b.size();
    if j == 0 || j > n {
        return Err(precondition(format!("row_expansion_residual: j = {j} outside 1..={n}")));
    }
    let (n, j) = (n as isize, j as isize);
    let mut expansion = times_linear(&(&fam.plus(n - j) * &fam.minus(j - 1)), b.coeff(0, j).unwrap());
    for ell in 1..=b.bands() as isize {
        for k in 0..=ell {
            let Some(coeff) = b.coeff(ell as usize, j - k) else {
                debug_assert!(n - j + k - ell < 0 || j - k - 1 < 0);
                continue;
            };
            let term = &fam.plus(n - j + k - ell) * &fam.minus(j - k - 1);
            expansion = &expansion - &term.scale(coeff);
        }
    }
    Ok(&fam.q - &expansion)
}

/// Entry of `(zI - B)^{-1}` from the polynomial family: the diagonal entry
/// `Q_{n-j}⁺ Q_{j-1}⁻ / Q_n` when `i == j`, the first-row entry `Q_{n-j}⁺ / Q_n` when `i == 1`.
pub fn resolvent_entry_poly<S: Scalar>(fam: &PolynomialFamily<S>, z: &S, i: usize, j: usize) -> Result<S> {
    let n = fam.size();
    if j == 0 || j > n || (i != j && i != 1) {
        return Err(precondition(format!(
            "resolvent_entry_poly: entry ({i}, {j}) is neither diagonal nor first-row for n = {n}"
        )));
    }
    let qn = fam.q.eval(z);
    if qn.is_zero() {
        return Err(Error::EigenvalueHit);
    }
    let (n, ji) = (n as isize, j as isize);
    let plus = fam.plus(n - ji).eval(z);
    let num = if i == j {
        plus * fam.minus(ji - 1).eval(z)
    } else {
        plus
    };
    Ok(num / qn)
}

/// `(1/n) Q_n'(z) / Q_n(z)` from scaled recurrences for `Q_m / z^m` and `Q_m' / z^m`,
/// so large `|z|` and large `n` do not overflow.
pub fn normalized_log_derivative<S: Scalar>(b: &FiniteBandedMatrix<S>, z: &S) -> Result<S> {
    let n = b.size();
    if n == 0 {
        return Err(precondition("normalized_log_derivative needs n >= 1"));
    }
    let p = b.bands();
    let w = S::one() / z.clone();
    // Powers w^{k+1}, k = 0..=p.
    let wp: Vec<S> = (1..=p + 1).map(|e| w.pow_u(e)).collect();
    let mut e: Vec<S> = Vec::with_capacity(n + 1);
    let mut g: Vec<S> = Vec::with_capacity(n + 1);
    e.push(S::one());
    g.push(S::zero());
    for m in 1..=n {
        let b0 = b.coeff(0, m as isize).unwrap().clone();
        let lin = S::one() - b0 * w.clone();
        let mut em = lin.clone() * e[m - 1].clone();
        let mut gm = e[m - 1].clone() * w.clone() + lin * g[m - 1].clone();
        for k in 1..=p.min(m - 1) {
            let c = b.coeff(k, (m - k) as isize).unwrap().clone() * wp[k].clone();
            em = em - c.clone() * e[m - k - 1].clone();
            gm = gm - c * g[m - k - 1].clone();
        }
        e.push(em);
        g.push(gm);
    }
    let en = e.pop().unwrap();
    if en.is_zero() {
        return Err(Error::EigenvalueHit);
    }
    Ok(g.pop().unwrap() / (en * S::from_i64(n as i64)))
}

/// Truncation size that makes `⟨H^s e_j, e_1⟩` exact: `j + s p + p`.
pub fn locality_bound(j: usize, s: usize, p: usize) -> usize {
    j + s * p + p
}

/// `⟨H^s e_j, e_1⟩` for the one-sided operator built from `seqs`.
///
/// Walks `H^s e_j` on the truncation of size [`locality_bound`], which agrees
/// with the infinite operator on every index the walk can reach.
pub fn power_inner_product<S: Scalar>(seqs: &DiagonalSequences<S>, s: usize, j: usize) -> Result<S> {
    if j == 0 {
        return Err(precondition("power_inner_product: j is 1-based"));
    }
    let m = locality_bound(j, s, seqs.bands());
    if seqs.len() < m {
        return Err(Error::InsufficientWindow {
            needed: m,
            available: seqs.len(),
        });
    }
    let h = seqs.truncation(m)?;
    let mut v = vec![S::zero(); m];
    v[j - 1] = S::one();
    for _ in 0..s {
        v = h.matvec(&v);
    }
    Ok(v.swap_remove(0))
}

#[cfg(test)]
mod tests;
