//! Exact-path aggregation of every deterministic identity, over a seeded grid.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::banded_hessenberg::{
    char_poly_family, derivative_identity_residual, row_expansion_residual, DiagonalSequences, FiniteBandedMatrix,
};
use crate::combinatorics::index_vectors_up_to;
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::sampling::{DistributionSpec, EnsembleSpec, Role, Sampler, StreamId};
use crate::scalar::{rational, Rational, Scalar};
use crate::two_sided::{
    central_check_against, central_check_half_width, half_width_for, vanishing_half_width, vanishing_order_suite,
    vanishing_suite_with_truncation, w0_multinomial_expansion, w_series, Parity, TwoSidedWindow,
};
use crate::weyl::{
    contact_order_check, hermite_pade_pair, product_expansion_residual, shift_relation_residuals, weyl_series,
    weyl_window,
};

use super::{par_trials, Row, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdentityCheck {
    Derivative,
    RowExpansion,
    Contact,
    ShiftRelation,
    ProductExpansion,
    CentralCoefficients,
    Vanishing,
    W0Expansion,
}

impl IdentityCheck {
    pub const ALL: [IdentityCheck; 8] = [
        IdentityCheck::Derivative,
        IdentityCheck::RowExpansion,
        IdentityCheck::Contact,
        IdentityCheck::ShiftRelation,
        IdentityCheck::ProductExpansion,
        IdentityCheck::CentralCoefficients,
        IdentityCheck::Vanishing,
        IdentityCheck::W0Expansion,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            IdentityCheck::Derivative => "derivative",
            IdentityCheck::RowExpansion => "row-expansion",
            IdentityCheck::Contact => "contact",
            IdentityCheck::ShiftRelation => "shift-relation",
            IdentityCheck::ProductExpansion => "product-expansion",
            IdentityCheck::CentralCoefficients => "central-coefficients",
            IdentityCheck::Vanishing => "vanishing",
            IdentityCheck::W0Expansion => "w0-expansion",
        }
    }
}

impl fmt::Display for IdentityCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IdentityCheck {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown check {s:?}")))
    }
}

/// Order for the shift and product checks.
pub const SHIFT_ORDER: usize = 10;
/// `|j|` and `s` ranges of the central check.
pub const CENTRAL_SITES: i64 = 3;
pub const CENTRAL_S_MAX: usize = 8;
/// Largest `n` and `p` of the vanishing check.
pub const VANISHING_N_MAX: usize = 8;
pub const VANISHING_P_MAX: usize = 2;
/// Largest `R` for the `w_0` expansion.
pub const W0_R_MAX: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityGrid {
    pub seed: u64,
    pub p_max: usize,
    pub n_max: usize,
    pub draws: usize,
    /// Run only this draw index.
    pub single_draw: Option<u64>,
    pub checks: Vec<IdentityCheck>,
    /// Corrupt one entry on one side of this check.
    pub inject: Option<IdentityCheck>,
}

impl IdentityGrid {
    /// `p <= 3`, `n <= 12`, 50 draws, every check.
    pub fn standard(seed: u64) -> Self {
        Self {
            seed,
            p_max: 3,
            n_max: 12,
            draws: 50,
            single_draw: None,
            checks: IdentityCheck::ALL.to_vec(),
            inject: None,
        }
    }

    fn draw_indices(&self) -> Vec<u64> {
        match self.single_draw {
            Some(d) => vec![d],
            None => (0..self.draws as u64).collect(),
        }
    }

    /// `(p, n)` cells visited by `check`; `n` is the matrix size, series order, `s_max` or `R`.
    pub fn cells(&self, check: IdentityCheck) -> Vec<(usize, usize)> {
        let ps = 1..=self.p_max;
        match check {
            IdentityCheck::Derivative | IdentityCheck::RowExpansion | IdentityCheck::Contact => {
                ps.flat_map(|p| (1..=self.n_max).map(move |n| (p, n))).collect()
            }
            IdentityCheck::ShiftRelation | IdentityCheck::ProductExpansion => ps.map(|p| (p, SHIFT_ORDER)).collect(),
            IdentityCheck::CentralCoefficients => ps.map(|p| (p, CENTRAL_S_MAX)).collect(),
            IdentityCheck::Vanishing => (1..=self.p_max.min(VANISHING_P_MAX))
                .flat_map(|p| (1..=self.n_max.min(VANISHING_N_MAX)).map(move |n| (p, n)))
                .collect(),
            IdentityCheck::W0Expansion => ps.flat_map(|p| (0..=W0_R_MAX).map(move |r| (p, r))).collect(),
        }
    }
}

/// Minimal reproducer of a failed check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityFailure {
    pub check: IdentityCheck,
    pub seed: u64,
    pub p: usize,
    pub n: usize,
    pub draw: u64,
    pub detail: String,
}

impl fmt::Display for IdentityFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} failed: seed={} p={} n={} draw={} ({})",
            self.check, self.seed, self.p, self.n, self.draw, self.detail
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellOutcome {
    pub check: IdentityCheck,
    pub p: usize,
    pub runs: usize,
    pub failures: Vec<IdentityFailure>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityOutcome {
    /// One entry per `(check, p)`.
    pub cells: Vec<CellOutcome>,
}

impl IdentityOutcome {
    pub fn failures(&self) -> impl Iterator<Item = &IdentityFailure> {
        self.cells.iter().flat_map(|c| c.failures.iter())
    }

    pub fn runs(&self, check: IdentityCheck) -> usize {
        self.cells.iter().filter(|c| c.check == check).map(|c| c.runs).sum()
    }

    pub fn rows(&self) -> Vec<Row> {
        self.cells
            .iter()
            .map(|c| Row {
                experiment: "identities".into(),
                key: c.check.name().into(),
                n: None,
                lhs: None,
                rhs: None,
                verdict: if c.failures.is_empty() { Verdict::Pass } else { Verdict::Fail },
                allowance: 0.0,
                detail: match c.failures.first() {
                    None => format!("p={} runs={} failures=0", c.p, c.runs),
                    Some(f) => format!("p={} runs={} failures={} first: {f}", c.p, c.runs, c.failures.len()),
                },
            })
            .collect()
    }
}

/// Integer atoms `-3..=3` with equal weights on every diagonal.
pub fn identity_ensemble(p: usize, seed: u64) -> EnsembleSpec {
    let atoms: Vec<Rational> = (-3..=3).map(|v| rational(v, 1)).collect();
    EnsembleSpec::new(p, vec![DistributionSpec::uniform_atoms(&atoms); p + 1], seed).expect("valid ensemble")
}

/// Stream trial index for a grid cell.
pub fn cell_trial(p: usize, n: usize, draw: u64) -> u64 {
    ((p as u64) << 48) | ((n as u64) << 32) | draw
}

fn bump_seqs(s: &DiagonalSequences<Rational>) -> DiagonalSequences<Rational> {
    DiagonalSequences::from_fn(s.bands(), s.len(), |k, n| {
        let v = s.get(k, n).clone();
        if k == 0 && n == 1 {
            v + Rational::from_i64(1)
        } else {
            v
        }
    })
}

fn bump_matrix(m: &FiniteBandedMatrix<Rational>) -> FiniteBandedMatrix<Rational> {
    let mut out = m.clone();
    *out.coeff_mut(0, 1) = out.coeff_mut(0, 1).clone() + Rational::from_i64(1);
    out
}

fn bump_window(w: &TwoSidedWindow<Rational>) -> TwoSidedWindow<Rational> {
    TwoSidedWindow::from_fn(w.bands(), w.half_width(), |k, n| {
        let v = w.get(k, n).unwrap().clone();
        if k == 0 && n == 0 {
            v + Rational::from_i64(1)
        } else {
            v
        }
    })
}

/// `Ok(None)` on success, `Ok(Some(detail))` on failure.
fn run_one(check: IdentityCheck, sampler: &Sampler<Rational>, p: usize, n: usize, draw: u64, inject: bool) -> Result<Option<String>> {
    let stream = StreamId::new(cell_trial(p, n, draw), Role::Identity);
    let fail = |ok: bool, what: String| if ok { None } else { Some(what) };
    Ok(match check {
        IdentityCheck::Derivative => {
            let h = sampler.sequences(n, stream).truncation(n)?;
            let mut fam = char_poly_family(&h)?;
            if inject {
                fam.q = &fam.q + &Poly::monomial(1);
            }
            let res = derivative_identity_residual(&fam);
            fail(res.is_zero(), format!("residual degree {:?}", res.degree()))
        }
        IdentityCheck::RowExpansion => {
            let h = sampler.sequences(n, stream).truncation(n)?;
            let fam = char_poly_family(&h)?;
            let b = if inject { bump_matrix(&h) } else { h };
            let bad: Vec<usize> = (1..=n)
                .filter(|&j| !row_expansion_residual(&b, &fam, j).map(|r| r.is_zero()).unwrap_or(false))
                .collect();
            fail(bad.is_empty(), format!("rows {bad:?}"))
        }
        IdentityCheck::Contact => {
            let order = 2 * n;
            let seqs = sampler.sequences(weyl_window(p, order), stream);
            let w = weyl_series(&seqs, order)?;
            let pair = hermite_pade_pair(&if inject { bump_seqs(&seqs) } else { seqs }, n)?;
            let ok = contact_order_check(&pair, &w)?;
            fail(ok.iter().all(|&b| b), format!("per-j {ok:?}"))
        }
        IdentityCheck::ShiftRelation | IdentityCheck::ProductExpansion => {
            let order = n;
            let seqs = sampler.sequences(weyl_window(p, order) + 1, stream);
            let w = weyl_series(&seqs, order)?;
            let w1 = weyl_series(&seqs.shifted(1)?, order)?;
            let mut a1 = seqs.first_column();
            if inject {
                a1[0] = a1[0].clone() + Rational::from_i64(1);
            }
            if check == IdentityCheck::ShiftRelation {
                let res = shift_relation_residuals(&w, &w1, &a1)?;
                let bad: Vec<usize> = (1..=p).filter(|&j| !res[j - 1].is_zero()).collect();
                fail(bad.is_empty(), format!("relations {bad:?}"))
            } else {
                let mut bad = Vec::new();
                for r in index_vectors_up_to(p, 3) {
                    if !product_expansion_residual(&w, &w1, &a1, &r, order)?.is_zero() {
                        bad.push(r.0);
                    }
                }
                fail(bad.is_empty(), format!("r vectors {bad:?}"))
            }
        }
        IdentityCheck::CentralCoefficients => {
            let l = (-CENTRAL_SITES..=CENTRAL_SITES)
                .map(|j| central_check_half_width(p, j, n))
                .max()
                .unwrap();
            let wnd = sampler.window(l, stream);
            let src = if inject { bump_window(&wnd) } else { wnd.clone() };
            let mut bad = Vec::new();
            for j in -CENTRAL_SITES..=CENTRAL_SITES {
                let ok = central_check_against(&wnd, &src, j, n)?;
                if let Some(s) = ok.iter().position(|&b| !b) {
                    bad.push((j, s));
                }
            }
            fail(bad.is_empty(), format!("(j, s) {bad:?}"))
        }
        IdentityCheck::Vanishing => {
            let l = vanishing_half_width(p, n, Parity::Odd).max(vanishing_half_width(p, n, Parity::Even));
            let wnd = sampler.window(l, stream);
            let mut bad = Vec::new();
            for parity in [Parity::Odd, Parity::Even] {
                let report = if inject {
                    let (lo, hi) = match parity {
                        Parity::Odd => (-(n as i64), n as i64),
                        Parity::Even => (1 - n as i64, n as i64),
                    };
                    let m = bump_matrix(&wnd.central_truncation(lo, hi)?);
                    vanishing_suite_with_truncation(&wnd, &m, n, parity)?
                } else {
                    vanishing_order_suite(&wnd, n, parity)?
                };
                bad.extend(report.failures().map(|c| format!("{parity:?} {:?}", c.kind)));
            }
            fail(bad.is_empty(), bad.join("; "))
        }
        IdentityCheck::W0Expansion => {
            let wnd = sampler.window(half_width_for(p, 0, n), stream);
            let src = if inject { bump_window(&wnd) } else { wnd.clone() };
            let w = w_series(&wnd, 0, n)?;
            let e = w0_multinomial_expansion(&src, n, n)?;
            let diff: Vec<usize> = (0..=n + 1).filter(|&i| w.coeffs()[i] != e.coeffs()[i]).collect();
            fail(diff.is_empty(), format!("coefficients {diff:?}"))
        }
    })
}

/// Runs every selected check over the grid on the exact path.
pub fn run_identity_suite(grid: &IdentityGrid) -> Result<IdentityOutcome> {
    let draws = grid.draw_indices();
    let mut cells = Vec::new();
    for &check in &grid.checks {
        for p in 1..=grid.p_max {
            let cell_list: Vec<usize> = grid.cells(check).into_iter().filter(|c| c.0 == p).map(|c| c.1).collect();
            if cell_list.is_empty() {
                continue;
            }
            let sampler: Sampler<Rational> = Sampler::new(&identity_ensemble(p, grid.seed))?;
            let inject = grid.inject == Some(check);
            let jobs: Vec<(usize, u64)> = cell_list.iter().flat_map(|&n| draws.iter().map(move |&d| (n, d))).collect();
            let results = par_trials(jobs.len(), |i| {
                let (n, d) = jobs[i as usize];
                run_one(check, &sampler, p, n, d, inject)
            })?;
            let failures = jobs
                .iter()
                .zip(results)
                .filter_map(|(&(n, draw), r)| {
                    r.map(|detail| IdentityFailure {
                        check,
                        seed: grid.seed,
                        p,
                        n,
                        draw,
                        detail,
                    })
                })
                .collect();
            cells.push(CellOutcome {
                check,
                p,
                runs: jobs.len(),
                failures,
            });
        }
    }
    Ok(IdentityOutcome { cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> IdentityGrid {
        IdentityGrid {
            seed,
            p_max: 2,
            n_max: 4,
            draws: 3,
            single_draw: None,
            checks: IdentityCheck::ALL.to_vec(),
            inject: None,
        }
    }

    #[test]
    fn small_grid_passes() {
        let out = run_identity_suite(&small(1)).unwrap();
        let fails: Vec<String> = out.failures().map(|f| f.to_string()).collect();
        assert!(fails.is_empty(), "{fails:?}");
        assert!(out.rows().iter().all(|r| r.verdict == Verdict::Pass));
    }

    #[test]
    fn injection_is_attributed() {
        for check in IdentityCheck::ALL {
            let grid = IdentityGrid {
                inject: Some(check),
                ..small(2)
            };
            let out = run_identity_suite(&grid).unwrap();
            let failed: Vec<IdentityCheck> = out.failures().map(|f| f.check).collect();
            assert!(!failed.is_empty(), "{check} injection went unnoticed");
            assert!(failed.iter().all(|&c| c == check), "{check}: {failed:?}");
        }
    }

    #[test]
    fn single_draw_matches_grid() {
        let grid = small(3);
        let full = run_identity_suite(&grid).unwrap();
        let one = run_identity_suite(&IdentityGrid {
            single_draw: Some(1),
            ..grid
        })
        .unwrap();
        assert_eq!(one.cells.len(), full.cells.len());
        assert!(one.failures().next().is_none());
        assert_eq!(one.runs(IdentityCheck::Derivative), 2 * 4);
    }

    #[test]
    fn check_names_round_trip() {
        for c in IdentityCheck::ALL {
            assert_eq!(c.name().parse::<IdentityCheck>().unwrap(), c);
        }
        assert!("nope".parse::<IdentityCheck>().is_err());
    }
}
