//! Formal-series vanishing orders of the central-truncation approximants.

use super::{d_from_systems, half_width_for, phi_pm_series, Side, TwoSidedWindow};
use crate::banded_hessenberg::{char_poly_family, FiniteBandedMatrix};
use crate::error::{precondition, Error, Result};
use crate::laurent::TruncatedLaurent;
use crate::poly::SeriesDenominator;
use crate::scalar::Scalar;

/// Float tolerance relative to the largest coefficient of the compared series.
const FLOAT_VANISH_TOL: f64 = 1e-8;

/// `M_{2n+1}` over sites `-n..=n`, or `M_{2n}` over `-n+1..=n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VanishingKind {
    /// `φ_{j,m}^+ - Q_{n-j-m}^+ / Q_{n-j}^+`.
    Plus { j: i64, m: usize },
    /// `φ_{j,k}^- - Q_{N'-k}^- / Q_{N'}^-` with `N'` the size of the leading block.
    Minus { j: i64, k: usize },
    /// `Q_{n-j}^+ Q_{N'}^- / Q_{size} - w_j`.
    Resolvent { j: i64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct VanishingCheck {
    pub kind: VanishingKind,
    /// Every coefficient at `z^0 … z^{-required}` must vanish.
    pub required: usize,
    /// Index of the first nonvanishing coefficient among those computed.
    pub first_nonzero: Option<usize>,
    pub passed: bool,
    /// For the odd resolvent check: whether the next coefficient also vanishes.
    pub one_more: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VanishingReport {
    pub n: usize,
    pub parity: Parity,
    pub checks: Vec<VanishingCheck>,
}

impl VanishingReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VanishingCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn floor_div(a: i64, p: usize) -> i64 {
    a.div_euclid(p as i64)
}

fn first_nonzero<S: Scalar>(f: &TruncatedLaurent<S>) -> Option<usize> {
    let scale = f.coeffs().iter().map(|c| c.modulus()).fold(1.0, f64::max);
    f.first_nonzero(FLOAT_VANISH_TOL * scale)
}

fn judge<S: Scalar>(kind: VanishingKind, diff: &TruncatedLaurent<S>, required: usize, informational: bool) -> VanishingCheck {
    let first = first_nonzero(diff);
    let passed = first.is_none_or(|i| i > required);
    let one_more = informational.then(|| first.is_none_or(|i| i > required + 1));
    VanishingCheck {
        kind,
        required,
        first_nonzero: first,
        passed,
        one_more,
    }
}

/// Required vanishing orders for site `j`: plus side per `m`, minus side per `k`, then the resolvent.
fn required_orders(n: usize, j: i64, p: usize, parity: Parity) -> (Vec<i64>, Vec<i64>, i64) {
    let n = n as i64;
    let plus_size = n - j;
    let minus_size = match parity {
        Parity::Odd => n + j,
        Parity::Even => n + j - 1,
    };
    let plus = (1..=p as i64)
        .map(|m| plus_size + 1 + floor_div(plus_size - m, p))
        .collect();
    let minus = (1..=p as i64)
        .map(|k| minus_size + 1 + floor_div(minus_size - k, p))
        .collect();
    let e = n - j.abs();
    let resolvent = match parity {
        Parity::Odd => e + 2 + floor_div(e, p),
        Parity::Even => e + floor_div(e, p),
    };
    (plus, minus, resolvent)
}

/// Checks the approximation orders of the central truncation for every admissible site.
///
/// With `size = 2n+1` (odd) or `2n` (even), the trailing block after site `j`
/// has `n - j` sites and the leading block before it `N' = n + j` (odd) or
/// `n + j - 1` (even). Required orders, as "vanishes through":
/// plus side `n - j + 1 + ⌊(n-j-m)/p⌋`, minus side `N' + 1 + ⌊(N'-k)/p⌋`,
/// resolvent `n - |j| + 2 + ⌊(n-|j|)/p⌋` (odd) or `n - |j| + ⌊(n-|j|)/p⌋` (even).
pub fn vanishing_order_suite<S: Scalar>(wnd: &TwoSidedWindow<S>, n: usize, parity: Parity) -> Result<VanishingReport> {
    let p = wnd.bands();
    let ni = n as i64;
    if parity == Parity::Even && n == 0 {
        return Err(precondition("even truncation needs n >= 1"));
    }
    let lo = *admissible_sites(n, parity).start();
    let max_order = suite_order(n, p, parity);
    let needed = vanishing_half_width(p, n, parity);
    if wnd.half_width() < needed {
        return Err(Error::InsufficientWindow {
            needed,
            available: wnd.half_width(),
        });
    }

    let m = wnd.central_truncation(lo, ni)?;
    suite_on_truncation(wnd, &m, n, parity, max_order)
}

/// Same as [`vanishing_order_suite`] with the central truncation supplied by the caller.
pub(crate) fn vanishing_suite_with_truncation<S: Scalar>(
    wnd: &TwoSidedWindow<S>,
    m: &FiniteBandedMatrix<S>,
    n: usize,
    parity: Parity,
) -> Result<VanishingReport> {
    let expected = match parity {
        Parity::Odd => 2 * n + 1,
        Parity::Even => 2 * n,
    };
    if m.size() != expected || m.bands() != wnd.bands() {
        return Err(precondition("truncation does not match the requested parity"));
    }
    suite_on_truncation(wnd, m, n, parity, suite_order(n, wnd.bands(), parity))
}

/// Series order used by the suite: one past the largest required order.
fn suite_order(n: usize, p: usize, parity: Parity) -> usize {
    admissible_sites(n, parity)
        .map(|j| {
            let (a, b, c) = required_orders(n, j, p, parity);
            a.into_iter().chain(b).chain([c]).max().unwrap() as usize + 1
        })
        .max()
        .unwrap()
}

/// Half-width demanded by [`vanishing_order_suite`].
pub fn vanishing_half_width(p: usize, n: usize, parity: Parity) -> usize {
    let order = suite_order(n, p, parity);
    admissible_sites(n, parity)
        .map(|j| half_width_for(p, j, order))
        .max()
        .unwrap()
}

fn admissible_sites(n: usize, parity: Parity) -> std::ops::RangeInclusive<i64> {
    let ni = n as i64;
    match parity {
        Parity::Odd => -ni..=ni,
        Parity::Even => -ni + 1..=ni,
    }
}

fn suite_on_truncation<S: Scalar>(
    wnd: &TwoSidedWindow<S>,
    m: &FiniteBandedMatrix<S>,
    n: usize,
    parity: Parity,
    max_order: usize,
) -> Result<VanishingReport> {
    let p = wnd.bands();
    let ni = n as i64;
    let sites = admissible_sites(n, parity);
    let lo = *sites.start();
    let fam = char_poly_family(m)?;
    let order = max_order;
    let full = SeriesDenominator::new(&fam.q, order)?;
    let mut checks = Vec::new();
    for j in sites {
        let (plus_req, minus_req, res_req) = required_orders(n, j, p, parity);
        let plus_block = (ni - j) as isize;
        let minus_block = (j - lo) as isize;
        let plus = phi_pm_series(wnd, j, Side::Plus, order)?;
        let minus = phi_pm_series(wnd, j, Side::Minus, order)?;
        let plus_den = SeriesDenominator::new(&fam.plus(plus_block), order)?;
        for mm in 1..=p {
            let approx = plus_den.ratio(&fam.plus(plus_block - mm as isize))?;
            let diff = &plus.phi(mm) - &approx;
            checks.push(judge(VanishingKind::Plus { j, m: mm }, &diff, plus_req[mm - 1].max(0) as usize, false));
        }
        let minus_den = SeriesDenominator::new(&fam.minus(minus_block), order)?;
        for k in 1..=p {
            let approx = minus_den.ratio(&fam.minus(minus_block - k as isize))?;
            let diff = &minus.phi(k) - &approx;
            checks.push(judge(VanishingKind::Minus { j, k }, &diff, minus_req[k - 1].max(0) as usize, false));
        }
        let ratio = full.ratio(&(&fam.plus(plus_block) * &fam.minus(minus_block)))?;
        let d = d_from_systems(wnd, j, &plus, &minus, order - 1)?;
        let w = TruncatedLaurent::resolvent_reciprocal(&d);
        let diff = &ratio - &w;
        checks.push(judge(
            VanishingKind::Resolvent { j },
            &diff,
            res_req as usize,
            parity == Parity::Odd,
        ));
    }
    Ok(VanishingReport { n, parity, checks })
}
