//! One-sided Weyl systems and their Hermite–Padé approximants.
//!
//! `φ_j(z) = ⟨(zI - H)^{-1} e_j, e_1⟩ = Σ_s ⟨H^s e_j, e_1⟩ z^{-s-1}` for the
//! one-sided banded operator `H` built from diagonal sequences.

use crate::banded_hessenberg::{char_poly_family, DiagonalSequences};
use crate::combinatorics::{binomial_with_convention, compositions, multinomial, IndexVector};
use crate::error::{precondition, Error, Result};
use crate::laurent::TruncatedLaurent;
use crate::poly::Poly;
use crate::scalar::Scalar;

/// Contact tolerance for float backends, relative to the size of the `q_n` coefficients.
pub const FLOAT_CONTACT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct WeylSystem<S> {
    p: usize,
    order: usize,
    /// `φ_1..φ_p`.
    phi: Vec<TruncatedLaurent<S>>,
}

impl<S: Scalar> WeylSystem<S> {
    pub fn new(phi: Vec<TruncatedLaurent<S>>) -> Result<Self> {
        let p = phi.len();
        let order = phi
            .first()
            .map(|f| f.order())
            .ok_or_else(|| precondition("a Weyl system needs p >= 1 functions"))?;
        if phi.iter().any(|f| f.order() != order) {
            return Err(precondition("Weyl functions must share one truncation order"));
        }
        Ok(Self { p, order, phi })
    }

    pub fn bands(&self) -> usize {
        self.p
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `φ_j` for `0 <= j <= p`, with `φ_0 ≡ 1`.
    pub fn phi(&self, j: usize) -> TruncatedLaurent<S> {
        if j == 0 {
            TruncatedLaurent::one(self.order)
        } else {
            self.phi[j - 1].clone()
        }
    }

    pub fn functions(&self) -> &[TruncatedLaurent<S>] {
        &self.phi
    }

    /// `[φ_j]_j = 1` and `[φ_j]_k = 0` for `k < j` (as far as the order reaches).
    pub fn leading_terms_hold(&self) -> bool {
        self.phi.iter().enumerate().all(|(i, f)| {
            let j = i + 1;
            f.coeffs().iter().take(j).all(|c| c.is_zero())
                && f.coeffs().get(j).is_none_or(|c| *c == S::one())
        })
    }
}

/// Window length required by [`weyl_series`]: `p N + 2p`.
pub fn weyl_window(p: usize, order: usize) -> usize {
    p * order + 2 * p
}

/// `φ_1..φ_p` to order `N`.
///
/// Coefficients come from the first row of `H^s`: `u_{s+1} = u_s H` with
/// `(u H)_c = u_{c-1} + Σ_k u_{c+k} a_c^{(k)}`, so `[φ_j]_{s+1} = (u_s)_j`.
/// Row `u_s` is supported on `1..=s+1`, hence one pass yields every `j`.
pub fn weyl_series<S: Scalar>(seqs: &DiagonalSequences<S>, order: usize) -> Result<WeylSystem<S>> {
    let p = seqs.bands();
    if p == 0 {
        return Err(precondition("weyl_series needs p >= 1"));
    }
    let needed = weyl_window(p, order);
    if seqs.len() < needed {
        return Err(Error::InsufficientWindow {
            needed,
            available: seqs.len(),
        });
    }
    let mut phi = vec![vec![S::zero(); order + 1]; p];
    // u[c - 1] = (u_s)_c
    let mut u: Vec<S> = vec![S::one()];
    for s in 0..order {
        for (j, f) in phi.iter_mut().enumerate() {
            if let Some(x) = u.get(j) {
                f[s + 1] = x.clone();
            }
        }
        if s + 1 == order {
            break;
        }
        let width = u.len() + 1;
        let mut next = vec![S::zero(); width];
        for (c, out) in next.iter_mut().enumerate() {
            // 0-based column c is 1-based column c + 1.
            let mut acc = if c > 0 { u[c - 1].clone() } else { S::zero() };
            for k in 0..=p {
                if let Some(x) = u.get(c + k) {
                    if !x.is_zero() {
                        acc = acc + x.clone() * seqs.get(k, c + 1).clone();
                    }
                }
            }
            *out = acc;
        }
        u = next;
    }
    WeylSystem::new(phi.into_iter().map(TruncatedLaurent::new).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct HermitePadePair<S> {
    pub n: usize,
    /// `q_n = det(zI - H_n)`.
    pub q: Poly<S>,
    /// `q_{n,1}..q_{n,p}`, with `q_{n,j} = det` of `zI - H_n` without its first `j` rows and columns.
    pub q_sub: Vec<Poly<S>>,
    /// `(n_1, …, n_p)`, `n_j = ⌊(n - j)/p⌋ + 1`.
    pub multi_index: Vec<usize>,
}

/// `n_j = ⌊(n - j)/p⌋ + 1`, never negative for `1 <= j <= p`.
pub fn contact_index(n: usize, j: usize, p: usize) -> usize {
    ((n as i64 - j as i64).div_euclid(p as i64) + 1) as usize
}

pub fn hermite_pade_pair<S: Scalar>(seqs: &DiagonalSequences<S>, n: usize) -> Result<HermitePadePair<S>> {
    let p = seqs.bands();
    if p == 0 {
        return Err(precondition("hermite_pade_pair needs p >= 1"));
    }
    let multi_index = (1..=p).map(|j| contact_index(n, j, p)).collect();
    if n == 0 {
        return Ok(HermitePadePair {
            n,
            q: Poly::one(),
            q_sub: vec![Poly::zero(); p],
            multi_index,
        });
    }
    let fam = char_poly_family(&seqs.truncation(n)?)?;
    let q_sub = (1..=p).map(|j| fam.plus(n as isize - j as isize)).collect();
    Ok(HermitePadePair {
        n,
        q: fam.q,
        q_sub,
        multi_index,
    })
}

/// Coefficients of `q_n φ_j - q_{n,j}` at `z^n, z^{n-1}, …, z^{-n_j}`.
pub fn contact_residual<S: Scalar>(pair: &HermitePadePair<S>, w: &WeylSystem<S>, j: usize) -> Result<Vec<S>> {
    if j == 0 || j > w.bands() || pair.q_sub.len() != w.bands() {
        return Err(precondition("contact_residual: index or band count mismatch"));
    }
    let n = pair.n as i64;
    let nj = pair.multi_index[j - 1] as i64;
    let needed = (n + nj) as usize;
    if w.order() < needed {
        return Err(Error::TruncationExceeded {
            requested: needed,
            order: w.order(),
        });
    }
    let phi = w.functions()[j - 1].coeffs();
    let sub = &pair.q_sub[j - 1];
    let mut out = Vec::with_capacity((n + nj + 1) as usize);
    for m in (-nj..=n).rev() {
        // [q_n φ_j]_{z^m} = Σ_{i >= m} q_i [φ_j]_{i - m}
        let mut acc = S::zero();
        for i in m.max(0)..=n {
            let c = &phi[(i - m) as usize];
            if !c.is_zero() {
                acc = acc + pair.q.coeff(i as usize) * c.clone();
            }
        }
        if m >= 0 {
            acc = acc - sub.coeff(m as usize);
        }
        out.push(acc);
    }
    Ok(out)
}

/// For each `j`, whether `q_n φ_j - q_{n,j}` vanishes at `z^n, …, z^{-n_j}`.
pub fn contact_order_check<S: Scalar>(pair: &HermitePadePair<S>, w: &WeylSystem<S>) -> Result<Vec<bool>> {
    let tol = FLOAT_CONTACT_TOL * pair.q.coeff_scale();
    (1..=w.bands())
        .map(|j| {
            contact_residual(pair, w, j)
                .map(|r| r.iter().all(|c| crate::scalar::is_negligible(c, tol)))
        })
        .collect()
}

/// Formal series of `q_{n,j} / q_n` to `order`, by long division at infinity.
pub fn pade_ratio_series<S: Scalar>(pair: &HermitePadePair<S>, j: usize, order: usize) -> Result<TruncatedLaurent<S>> {
    if j == 0 || j > pair.q_sub.len() {
        return Err(precondition("pade_ratio_series: j outside 1..=p"));
    }
    Poly::ratio_series(&pair.q_sub[j - 1], &pair.q, order)
}

/// Smallest `n` from which `[q_{n,j}/q_n]_k = [φ_j]_k` is guaranteed: `p(k + 1) + j`.
pub fn stabilization_threshold(p: usize, j: usize, k: usize) -> usize {
    p * (k + 1) + j
}

fn check_pair_systems<S: Scalar>(w: &WeylSystem<S>, w1: &WeylSystem<S>, a1: &[S]) -> Result<()> {
    if w.bands() != w1.bands() || a1.len() != w.bands() + 1 {
        return Err(precondition("shift relation: mismatched band counts"));
    }
    if w.order() != w1.order() {
        return Err(precondition("shift relation: systems have different orders"));
    }
    Ok(())
}

/// Residuals of `(z - a_1^{(0)} - Σ_k a_1^{(k)} φ_{1,k}) φ_1 - 1` (order `N - 1`)
/// followed by `φ_j - φ_{1,j-1} φ_1` for `j = 2..=p` (order `N`).
pub fn shift_relation_residuals<S: Scalar>(
    w: &WeylSystem<S>,
    w1: &WeylSystem<S>,
    a1: &[S],
) -> Result<Vec<TruncatedLaurent<S>>> {
    check_pair_systems(w, w1, a1)?;
    if w.order() == 0 {
        return Err(precondition("shift relation needs order >= 1"));
    }
    let phi1 = w.phi(1);
    let mut first = &phi1.times_z()? - &TruncatedLaurent::one(w.order() - 1);
    first = &first - &phi1.scale(&a1[0]).truncate(w.order() - 1);
    for (k, a) in a1.iter().enumerate().skip(1) {
        let t = w1.phi(k).multiply(&phi1).scale(a).truncate(w.order() - 1);
        first = &first - &t;
    }
    let mut out = vec![first];
    for j in 2..=w.bands() {
        out.push(&w.phi(j) - &w1.phi(j - 1).multiply(&phi1));
    }
    Ok(out)
}

fn product_of_powers<S: Scalar>(
    bases: &[TruncatedLaurent<S>],
    exps: &[usize],
    order: usize,
) -> TruncatedLaurent<S> {
    let mut acc = TruncatedLaurent::one(order);
    for (b, &e) in bases.iter().zip(exps) {
        if e > 0 {
            acc = acc.multiply(&b.truncate(order).power(e));
        }
    }
    acc
}

/// `∏_j φ_j^{r_j}` minus its expansion in `φ_{1,·}`:
/// `Σ_n Σ_{k ∈ C(n)} z^{-n-r} binom(n+r-1, r-1) multinomial(n, k) ∏_{j=0}^{p} (a_1^{(j)})^{k_j} ∏_{j=1}^{p} φ_{1,j}^{k_j + r_{j+1}}`,
/// truncated at order `N`.
pub fn product_expansion_residual<S: Scalar>(
    w: &WeylSystem<S>,
    w1: &WeylSystem<S>,
    a1: &[S],
    r: &IndexVector,
    order: usize,
) -> Result<TruncatedLaurent<S>> {
    check_pair_systems(w, w1, a1)?;
    let p = w.bands();
    if r.len() != p {
        return Err(precondition("product expansion: r must have p entries"));
    }
    if order > w.order() {
        return Err(Error::TruncationExceeded {
            requested: order,
            order: w.order(),
        });
    }
    let lhs = product_of_powers(w.functions(), r.entries(), order);

    let rt = r.total();
    let base: Vec<TruncatedLaurent<S>> = w1.functions().iter().map(|f| f.truncate(order)).collect();
    let mut rhs = TruncatedLaurent::zero(order);
    for n in 0..=order.saturating_sub(rt) {
        let shift = n + rt;
        if shift > order {
            break;
        }
        let lead = binomial_with_convention((n + rt) as i64 - 1, rt as i64 - 1);
        if lead == 0.into() {
            continue;
        }
        let rest = order - shift;
        for k in compositions(n, p + 1) {
            let coeff = multinomial(n, &k)? * lead.magnitude();
            let mut c = S::from_bigint(&coeff.into());
            for (j, &kj) in k.parts().iter().enumerate() {
                c = c * a1[j].pow_u(kj);
            }
            if c.is_zero() {
                continue;
            }
            let exps: Vec<usize> = (1..=p)
                .map(|j| k.parts()[j] + if j < p { r.entries()[j] } else { 0 })
                .collect();
            let term = product_of_powers(&base, &exps, rest).scale(&c);
            let mut lifted = vec![S::zero(); order + 1];
            for (i, x) in term.into_coeffs().into_iter().enumerate() {
                lifted[i + shift] = x;
            }
            rhs = &rhs + &TruncatedLaurent::new(lifted);
        }
    }
    Ok(&lhs - &rhs)
}

/// `true` when every coefficient of `f` is negligible (exact zero on exact backends).
pub fn series_vanishes<S: Scalar>(f: &TruncatedLaurent<S>, tol: f64) -> bool {
    f.first_nonzero(tol).is_none()
}

/// Float-friendly magnitude for reporting a residual.
pub fn residual_size<S: Scalar>(f: &TruncatedLaurent<S>) -> f64 {
    f.coeffs().iter().map(|c| c.modulus()).fold(0.0, f64::max)
}
