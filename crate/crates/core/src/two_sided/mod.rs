//! The bi-infinite banded operator `𝓜` seen through a finite window of its
//! coefficient sequences, with its one-sided restrictions `𝓗_r^±` and the
//! diagonal resolvent functions `w_j`.

mod vanishing;

pub(crate) use vanishing::vanishing_suite_with_truncation;

pub use vanishing::{vanishing_half_width, vanishing_order_suite, Parity, VanishingCheck, VanishingKind, VanishingReport};

use crate::banded_hessenberg::{power_diagonal_entries, DiagonalSequences, FiniteBandedMatrix};
use crate::combinatorics::{alpha_beta_vectors, compositions, flat_index, multinomial, triangle_size};
use crate::error::{precondition, Error, Result};
use crate::laurent::TruncatedLaurent;
use crate::scalar::Scalar;
use crate::weyl::{weyl_series, weyl_window, WeylSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Plus,
    Minus,
}

/// Values `a_n^{(k)}` for `-L <= n <= L`, `0 <= k <= p`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoSidedWindow<S> {
    p: usize,
    half_width: usize,
    /// `a[k][n + L]`.
    a: Vec<Vec<S>>,
}

impl<S: Scalar> TwoSidedWindow<S> {
    pub fn new(p: usize, half_width: usize, a: Vec<Vec<S>>) -> Result<Self> {
        if a.len() != p + 1 || a.iter().any(|d| d.len() != 2 * half_width + 1) {
            return Err(precondition(format!(
                "window needs {} sequences of length {}",
                p + 1,
                2 * half_width + 1
            )));
        }
        Ok(Self { p, half_width, a })
    }

    pub fn from_fn(p: usize, half_width: usize, mut f: impl FnMut(usize, i64) -> S) -> Self {
        let l = half_width as i64;
        Self {
            p,
            half_width,
            a: (0..=p).map(|k| (-l..=l).map(|n| f(k, n)).collect()).collect(),
        }
    }

    pub fn bands(&self) -> usize {
        self.p
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn contains(&self, n: i64) -> bool {
        n.unsigned_abs() as usize <= self.half_width
    }

    /// `a_n^{(k)}`.
    pub fn get(&self, k: usize, n: i64) -> Result<&S> {
        if !self.contains(n) {
            return Err(Error::InsufficientWindow {
                needed: n.unsigned_abs() as usize,
                available: self.half_width,
            });
        }
        Ok(&self.a[k][(n + self.half_width as i64) as usize])
    }

    /// The window of `a'_n = a_{n + offset}`, of half-width `L - |offset|`.
    pub fn shifted(&self, offset: i64) -> Result<Self> {
        let l = self
            .half_width
            .checked_sub(offset.unsigned_abs() as usize)
            .ok_or(Error::InsufficientWindow {
                needed: offset.unsigned_abs() as usize,
                available: self.half_width,
            })?;
        Ok(Self::from_fn(self.p, l, |k, n| self.get(k, n + offset).unwrap().clone()))
    }

    /// Principal submatrix of `M` on the sites `lo..=hi`; row `i` is site `lo + i - 1`.
    pub fn central_truncation(&self, lo: i64, hi: i64) -> Result<FiniteBandedMatrix<S>> {
        if hi < lo {
            return Err(precondition("central_truncation: empty site range"));
        }
        if !self.contains(lo) || !self.contains(hi) {
            return Err(Error::InsufficientWindow {
                needed: lo.unsigned_abs().max(hi.unsigned_abs()) as usize,
                available: self.half_width,
            });
        }
        let n = (hi - lo + 1) as usize;
        Ok(FiniteBandedMatrix::from_fn(n, self.p, |k, c| {
            self.get(k, lo + c as i64 - 1).unwrap().clone()
        }))
    }

    pub fn max_modulus(&self) -> f64 {
        self.a.iter().flatten().map(|x| x.modulus()).fold(0.0, f64::max)
    }
}

/// Number of sequence terms of `𝓗_r^±` the window provides.
pub fn one_sided_len(l: usize, p: usize, r: i64, side: Side) -> i64 {
    let l = l as i64;
    match side {
        Side::Plus => l - r,
        Side::Minus => r + l - p as i64,
    }
}

/// Sequences of `𝓗_r^+` (`a_{n+r}^{(k)}`) or `𝓗_r^-` (`a_{r-n-k}^{(k)}`), as long as the window allows.
pub fn extract_one_sided<S: Scalar>(wnd: &TwoSidedWindow<S>, r: i64, side: Side) -> Result<DiagonalSequences<S>> {
    let len = one_sided_len(wnd.half_width, wnd.p, r, side);
    let top_ok = match side {
        Side::Plus => wnd.contains(r + 1),
        Side::Minus => wnd.contains(r - 1),
    };
    if len < 1 || !top_ok {
        return Err(Error::InsufficientWindow {
            needed: 1,
            available: len.max(0) as usize,
        });
    }
    Ok(DiagonalSequences::from_fn(wnd.p, len as usize, |k, n| {
        let site = match side {
            Side::Plus => n as i64 + r,
            Side::Minus => r - n as i64 - k as i64,
        };
        wnd.get(k, site).unwrap().clone()
    }))
}

/// Smallest half-width for which both `φ_{r,·}^±` reach `order`.
pub fn half_width_for(p: usize, r: i64, order: usize) -> usize {
    let need = weyl_window(p, order) as i64;
    (need + r).max(need + p as i64 - r).max(r.abs() + 1) as usize
}

fn window_check<S: Scalar>(wnd: &TwoSidedWindow<S>, r: i64, order: usize) -> Result<()> {
    let needed = half_width_for(wnd.p, r, order);
    if wnd.half_width < needed {
        return Err(Error::InsufficientWindow {
            needed,
            available: wnd.half_width,
        });
    }
    Ok(())
}

/// `(φ_{r,1}^±, …, φ_{r,p}^±)` to `order`.
pub fn phi_pm_series<S: Scalar>(wnd: &TwoSidedWindow<S>, r: i64, side: Side, order: usize) -> Result<WeylSystem<S>> {
    let seqs = extract_one_sided(wnd, r, side)?;
    weyl_series(&seqs, order).map_err(|e| match e {
        Error::InsufficientWindow { .. } => Error::InsufficientWindow {
            needed: half_width_for(wnd.p, r, order),
            available: wnd.half_width,
        },
        other => other,
    })
}

/// `d_j = a_j^{(0)} + Σ_{ℓ=1}^{p} Σ_{k=0}^{ℓ} a_{j-k}^{(ℓ)} φ_{j,ℓ-k}^+ φ_{j,k}^-` to `order`.
pub fn d_series<S: Scalar>(wnd: &TwoSidedWindow<S>, j: i64, order: usize) -> Result<TruncatedLaurent<S>> {
    window_check(wnd, j, order)?;
    let plus = phi_pm_series(wnd, j, Side::Plus, order)?;
    let minus = phi_pm_series(wnd, j, Side::Minus, order)?;
    d_from_systems(wnd, j, &plus, &minus, order)
}

pub(crate) fn d_from_systems<S: Scalar>(
    wnd: &TwoSidedWindow<S>,
    j: i64,
    plus: &WeylSystem<S>,
    minus: &WeylSystem<S>,
    order: usize,
) -> Result<TruncatedLaurent<S>> {
    let mut d = TruncatedLaurent::constant(wnd.get(0, j)?.clone(), order);
    for ell in 1..=wnd.p {
        for k in 0..=ell {
            let a = wnd.get(ell, j - k as i64)?;
            if a.is_zero() {
                continue;
            }
            let term = plus.phi(ell - k).truncate(order).multiply(&minus.phi(k).truncate(order)).scale(a);
            d = &d + &term;
        }
    }
    Ok(d)
}

/// `w_j = 1 / (z - d_j)` to order `N + 1`.
pub fn w_series<S: Scalar>(wnd: &TwoSidedWindow<S>, j: i64, order: usize) -> Result<TruncatedLaurent<S>> {
    Ok(TruncatedLaurent::resolvent_reciprocal(&d_series(wnd, j, order)?))
}

/// Half-width demanded by [`central_coefficient_check`].
pub fn central_check_half_width(p: usize, j: i64, s_max: usize) -> usize {
    (j.unsigned_abs() as usize + p * s_max + p).max(half_width_for(p, j, s_max))
}

/// `[w_j]_{s+1} = M^s(j, j)` for `0 <= s <= s_max`, the right side taken on the
/// central truncation over sites `j - s_max ..= j + s_max`, which contains
/// every closed walk of length at most `s_max` from `j`.
pub fn central_coefficient_check<S: Scalar>(wnd: &TwoSidedWindow<S>, j: i64, s_max: usize) -> Result<Vec<bool>> {
    let needed = central_check_half_width(wnd.p, j, s_max);
    if wnd.half_width < needed {
        return Err(Error::InsufficientWindow {
            needed,
            available: wnd.half_width,
        });
    }
    central_check_against(wnd, wnd, j, s_max)
}

/// [`central_coefficient_check`] with the truncation taken from `trunc_src`.
pub(crate) fn central_check_against<S: Scalar>(
    wnd: &TwoSidedWindow<S>,
    trunc_src: &TwoSidedWindow<S>,
    j: i64,
    s_max: usize,
) -> Result<Vec<bool>> {
    let w = w_series(wnd, j, s_max)?;
    let s = s_max as i64;
    let m = trunc_src.central_truncation(j - s, j + s)?;
    let diag = power_diagonal_entries(&m, (s + 1) as usize, s_max);
    let tol = 1e-9 * (1.0 + wnd.max_modulus()).powi(s_max as i32);
    Ok((0..=s_max)
        .map(|k| {
            let diff = w.coeffs()[k + 1].clone() - diag[k].clone();
            crate::scalar::is_negligible(&diff, tol)
        })
        .collect())
}

/// The double sum over `r <= R` and `k ∈ Ĉ(r)` of
/// `z^{-r-1} multinomial(r, k) ∏ (a_{-s}^{(ℓ)})^{k(flat(s, ℓ))} ∏_j (φ_{0,j}^+)^{α(k,j)} (φ_{0,j}^-)^{β(k,j)}`,
/// stored to `order + 1`. It agrees with `w_0` through `z^{-R-1}`.
pub fn w0_multinomial_expansion<S: Scalar>(wnd: &TwoSidedWindow<S>, r_max: usize, order: usize) -> Result<TruncatedLaurent<S>> {
    if r_max > order {
        return Err(precondition("w0 expansion needs R <= N"));
    }
    window_check(wnd, 0, order)?;
    let p = wnd.p;
    let plus = phi_pm_series(wnd, 0, Side::Plus, order)?;
    let minus = phi_pm_series(wnd, 0, Side::Minus, order)?;
    let slots = triangle_size(p);
    // coefficient a_{-s}^{(ℓ)} for each flattened slot
    let mut slot_coeff: Vec<S> = vec![S::zero(); slots];
    for ell in 0..=p {
        for s in 0..=ell {
            slot_coeff[flat_index(s, ell)? - 1] = wnd.get(ell, -(s as i64))?.clone();
        }
    }
    let total = order + 1;
    let mut out = TruncatedLaurent::zero(total);
    for r in 0..=r_max {
        let rest = order - r;
        // Group compositions by their (α, β) exponents before touching series.
        let mut groups: Vec<(Vec<usize>, S)> = Vec::new();
        for k in compositions(r, slots) {
            let mut c = S::from_bigint(&multinomial(r, &k)?.into());
            for (x, &e) in slot_coeff.iter().zip(k.parts()) {
                if e > 0 {
                    c = c * x.pow_u(e);
                }
            }
            if c.is_zero() {
                continue;
            }
            let (alpha, beta) = alpha_beta_vectors(&k, p)?;
            let key: Vec<usize> = alpha.0.into_iter().chain(beta.0).collect();
            match groups.iter_mut().find(|(g, _)| *g == key) {
                Some((_, acc)) => *acc = acc.clone() + c,
                None => groups.push((key, c)),
            }
        }
        for (key, c) in groups {
            if c.is_zero() {
                continue;
            }
            let mut term = TruncatedLaurent::one(rest);
            for j in 1..=p {
                for (sys, e) in [(&plus, key[j - 1]), (&minus, key[p + j - 1])] {
                    if e > 0 {
                        term = term.multiply(&sys.phi(j).truncate(rest).power(e));
                    }
                }
            }
            let mut lifted = vec![S::zero(); total + 1];
            for (i, x) in term.into_coeffs().into_iter().enumerate() {
                lifted[i + r + 1] = x * c.clone();
            }
            out = &out + &TruncatedLaurent::new(lifted);
        }
    }
    Ok(out)
}
