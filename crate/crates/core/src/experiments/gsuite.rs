//! Moments `g_r(z) = E ∏ φ_{0,k}^+(z)^{r_k}` of the Weyl vector: the η-recursion and the expansion of `E W(z)`.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use crate::combinatorics::{
    alpha_beta_vectors, binomial_with_convention, compositions, eta_map, flat_index, index_vectors_up_to, multinomial,
    triangle_size, IndexVector,
};
use crate::error::{Error, Result};
use crate::sampling::{exact_moment, EnsembleSpec, Role, Sampler};
use crate::scalar::{Scalar, C64};
use crate::two_sided::{half_width_for, w_series};

use super::{
    float_slack, judge, par_trials, sample_weyl_vector, summarize, Estimate, ExperimentConfig, Geometry, Row, Verdict,
    TAIL_TARGET,
};

/// Largest `n` (η-recursion) or `r` (expansion of `E W`) the suite will expand to.
pub const EXPANSION_CAP: usize = 40;
/// Cap on `R` in the expansion of `E W`, where the composition count grows fastest.
pub const EW_CAP: usize = 12;

/// `r` vectors used when none are given: every vector of total at most 2.
pub fn default_r_list(p: usize) -> Vec<IndexVector> {
    index_vectors_up_to(p, 2)
}

fn monomial(x: &[C64], e: &[usize]) -> C64 {
    x.iter().zip(e).fold(C64::new(1.0, 0.0), |acc, (v, &k)| acc * v.powu(k as u32))
}

/// `m_k^{(ℓ)}` as complex doubles for `k <= k_max`.
fn moment_table(ens: &EnsembleSpec, k_max: usize) -> Vec<Vec<C64>> {
    ens.mus
        .iter()
        .map(|d| (0..=k_max).map(|k| exact_moment(d, k).to_c64()).collect())
        .collect()
}

fn big_to_f64(b: num_bigint::BigUint) -> f64 {
    b.to_f64().unwrap_or(f64::INFINITY)
}

/// Tail `Σ_{n > n_max} binom(n+r-1, r-1) x^n`, summed until terms are negligible.
fn negative_binomial_tail(x: f64, r: usize, n_max: usize) -> f64 {
    if r == 0 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut n = n_max + 1;
    loop {
        let term = binomial_with_convention((n + r - 1) as i64, r as i64 - 1).to_f64().unwrap() * x.powi(n as i32);
        sum += term;
        if n > n_max + 20 && term < sum * 1e-17 {
            return sum;
        }
        n += 1;
    }
}

/// Pre-grouped right side of the η-recursion: coefficient per exponent vector `η`.
struct EtaExpansion {
    groups: Vec<(Vec<usize>, C64)>,
    n_max: usize,
    tail: f64,
}

fn eta_expansion(ens: &EnsembleSpec, geo: &Geometry, r: &IndexVector, moments: &[Vec<C64>]) -> Result<EtaExpansion> {
    let p = ens.p;
    let rt = r.total();
    let z = geo.z;
    let rho: f64 = (0..=p).map(|l| ens.mus[l].bound() * geo.phi_bound(l)).sum();
    let x = rho / z.norm();
    let carried: f64 = (2..=p).map(|j| geo.phi_bound(j - 1).powi(r.0[j - 1] as i32)).product();
    let scale = carried.max(1.0) / z.norm().powi(rt as i32);
    let tail_at = |n: usize| scale * negative_binomial_tail(x, rt, n);
    let n_max = if rt == 0 {
        0
    } else {
        (0..=EXPANSION_CAP).find(|&n| tail_at(n) < TAIL_TARGET).unwrap_or(EXPANSION_CAP)
    };
    let mut groups: BTreeMap<Vec<usize>, C64> = BTreeMap::new();
    for n in 0..=n_max {
        let lead = binomial_with_convention((n + rt) as i64 - 1, rt as i64 - 1);
        if lead == 0.into() {
            continue;
        }
        let lead = lead.to_f64().unwrap() / z.powu((n + rt) as u32);
        for k in compositions(n, p + 1) {
            let mut c = lead * big_to_f64(multinomial(n, &k)?);
            for (l, &kl) in k.parts().iter().enumerate() {
                c *= moments[l][kl];
            }
            let eta = eta_map(r, &k)?;
            *groups.entry(eta.0).or_insert(C64::new(0.0, 0.0)) += c;
        }
    }
    Ok(EtaExpansion {
        groups: groups.into_iter().collect(),
        n_max,
        tail: tail_at(n_max),
    })
}

/// Pre-grouped expansion of `E W(z)`: coefficient per `(α, β)`.
struct EwExpansion {
    groups: Vec<(Vec<usize>, Vec<usize>, C64)>,
    r_max: usize,
    tail: f64,
}

fn ew_expansion(ens: &EnsembleSpec, geo: &Geometry, moments: &[Vec<C64>]) -> Result<EwExpansion> {
    let p = ens.p;
    let z = geo.z;
    let f: f64 = (0..=p)
        .flat_map(|l| (0..=l).map(move |s| (l, s)))
        .map(|(l, s)| ens.mus[l].bound() * geo.phi_bound(l - s) * geo.phi_bound(s))
        .sum();
    let x = f / z.norm();
    let tail_at = |r: usize| x.powi(r as i32 + 1) / (z.norm() * (1.0 - x));
    let r_max = (0..=EW_CAP).find(|&r| tail_at(r) < TAIL_TARGET).unwrap_or(EW_CAP);
    let slots = triangle_size(p);
    // slot index -> diagonal ℓ
    let mut slot_diag = vec![0; slots];
    for l in 0..=p {
        for s in 0..=l {
            slot_diag[flat_index(s, l)? - 1] = l;
        }
    }
    let mut groups: BTreeMap<(Vec<usize>, Vec<usize>), C64> = BTreeMap::new();
    for r in 0..=r_max {
        let lead = z.powu(r as u32 + 1).inv();
        for k in compositions(r, slots) {
            let mut c = lead * big_to_f64(multinomial(r, &k)?);
            for (i, &e) in k.parts().iter().enumerate() {
                c *= moments[slot_diag[i]][e];
            }
            let (a, b) = alpha_beta_vectors(&k, p)?;
            *groups.entry((a.0, b.0)).or_insert(C64::new(0.0, 0.0)) += c;
        }
    }
    Ok(EwExpansion {
        groups: groups.into_iter().map(|((a, b), c)| (a, b, c)).collect(),
        r_max,
        tail: tail_at(r_max),
    })
}

/// Verdict that reports an unreachable truncation as inconclusive.
fn truncated_verdict(diff: f64, lhs: &Estimate, rhs: &Estimate, sigmas: f64, tail: f64) -> (Verdict, f64) {
    let allowance = tail + float_slack(lhs.value(), rhs.value());
    let noise = sigmas * (lhs.se * lhs.se + rhs.se * rhs.se).sqrt();
    if tail > TAIL_TARGET && tail > 0.1 * noise {
        return (Verdict::Inconclusive, allowance);
    }
    (judge(diff, lhs, rhs, sigmas, allowance), allowance)
}

/// Checks the η-recursion for each `r` and the expansion of `E W(z)`.
///
/// Left sides use the `Weyl` substreams; right sides use fresh `WeylAux` draws
/// with exact moments, so both sides are independent Monte Carlo estimates.
pub fn run_g_suite(cfg: &ExperimentConfig, r_list: &[IndexVector]) -> Result<Vec<Row>> {
    let ens = &cfg.ensemble;
    let p = ens.p;
    if let Some(r) = r_list.iter().find(|r| r.len() != p) {
        return Err(Error::Config(format!("r vector {:?} must have {p} entries", r.0)));
    }
    let geo = Geometry::new(cfg.z_eval()?, ens.norm_bound());
    let order = geo.order_for(TAIL_TARGET * 0.1);
    let sampler: Sampler<C64> = Sampler::new(ens)?;
    let trials = cfg.trials_lhs.max(cfg.trials_rhs);
    let a = par_trials(trials, |t| sample_weyl_vector(&sampler, t, Role::Weyl, order, geo.z))?;
    let b = par_trials(cfg.trials_rhs, |t| sample_weyl_vector(&sampler, t, Role::WeylAux, order, geo.z))?;
    let moments = moment_table(ens, EXPANSION_CAP.max(EW_CAP));
    let k = cfg.tolerance_sigmas;

    let mut rows = Vec::new();
    for r in r_list {
        let lhs_vals: Vec<C64> = a[..cfg.trials_lhs].iter().map(|x| monomial(x, r.entries())).collect();
        let exp = eta_expansion(ens, &geo, r, &moments)?;
        let rhs_vals: Vec<C64> = b
            .iter()
            .map(|x| exp.groups.iter().map(|(eta, c)| c * monomial(x, eta)).sum())
            .collect();
        let (_, lhs) = summarize(&lhs_vals);
        let (_, rhs) = summarize(&rhs_vals);
        let diff = (lhs.value() - rhs.value()).norm();
        let (verdict, allowance) = truncated_verdict(diff, &lhs, &rhs, k, exp.tail);
        rows.push(Row {
            experiment: "gsuite/eta".into(),
            key: format!("r={:?}", r.0),
            n: None,
            lhs: Some(lhs),
            rhs: Some(rhs),
            verdict,
            allowance,
            detail: format!("n_max={} tail={:.3e} groups={}", exp.n_max, exp.tail, exp.groups.len()),
        });
    }

    // E W(z) directly, against the grouped expansion with independent φ^+ and φ^- draws.
    let w_order = order;
    let lhs_vals = par_trials(cfg.trials_lhs, |t| {
        let wnd = sampler.theorem_collections(half_width_for(p, 0, w_order), t)?;
        Ok(w_series(&wnd, 0, w_order)?.eval(&geo.z))
    })?;
    let exp = ew_expansion(ens, &geo, &moments)?;
    let rhs_vals: Vec<C64> = (0..cfg.trials_rhs)
        .map(|t| {
            exp.groups
                .iter()
                .map(|(al, be, c)| c * monomial(&a[t], al) * monomial(&b[t], be))
                .sum()
        })
        .collect();
    let (_, lhs) = summarize(&lhs_vals);
    let (_, rhs) = summarize(&rhs_vals);
    let diff = (lhs.value() - rhs.value()).norm();
    let tail = exp.tail + geo.tail_from(w_order + 2);
    let (verdict, allowance) = truncated_verdict(diff, &lhs, &rhs, k, tail);
    rows.push(Row {
        experiment: "gsuite/ew".into(),
        key: "W(z)".into(),
        n: None,
        lhs: Some(lhs),
        rhs: Some(rhs),
        verdict,
        allowance,
        detail: format!("r_max={} tail={:.3e} groups={}", exp.r_max, tail, exp.groups.len()),
    });
    Ok(rows)
}
