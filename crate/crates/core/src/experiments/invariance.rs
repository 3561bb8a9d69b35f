//! Fixed-point property of the law `σ_z` of the Weyl vector under `λ_z`.

use crate::combinatorics::index_vectors_up_to;
use crate::error::{Error, Result};
use crate::sampling::{Role, Sampler, StreamId};
use crate::scalar::C64;

use super::{float_slack, judge, par_trials, sample_weyl_vector, summarize, ExperimentConfig, Geometry, Row, TAIL_TARGET};

/// Denominators closer to zero than this reject the configuration.
pub const DENOMINATOR_FLOOR: f64 = 1e-9;

/// `λ_z(t, x) = (1, x_1, …, x_{p-1}) / (z - t_0 - Σ_k t_k x_k)`.
pub fn lambda_z(z: C64, t: &[C64], x: &[C64]) -> Result<Vec<C64>> {
    let d = z - t[0] - t[1..].iter().zip(x).map(|(a, b)| a * b).sum::<C64>();
    if d.norm() < DENOMINATOR_FLOOR {
        return Err(Error::Config(format!(
            "denominator {d} at z = {z} is within {DENOMINATOR_FLOOR:e} of zero; increase z_eval"
        )));
    }
    let inv = d.inv();
    Ok(std::iter::once(inv)
        .chain(x[..x.len() - 1].iter().map(|v| v * inv))
        .collect())
}

/// Compares `E f(Φ(z))` with `E f(λ_z(t, X))` for every monomial of degree at most `degree`.
pub fn run_invariance(cfg: &ExperimentConfig, degree: usize) -> Result<Vec<Row>> {
    let ens = &cfg.ensemble;
    let geo = Geometry::new(cfg.z_eval()?, ens.norm_bound());
    let order = geo.order_for(TAIL_TARGET * 0.1);
    let sampler: Sampler<C64> = Sampler::new(ens)?;
    let direct = par_trials(cfg.trials_lhs, |t| sample_weyl_vector(&sampler, t, Role::Weyl, order, geo.z))?;
    let pushed = par_trials(cfg.trials_rhs, |t| {
        let x = sample_weyl_vector(&sampler, t, Role::WeylAux, order, geo.z)?;
        let draw = sampler.product_draw(StreamId::new(t, Role::Mixing), 0);
        lambda_z(geo.z, &draw, &x)
    })?;
    // Each coordinate is off by at most the series tail; monomials scale it by degree.
    let coord_tail = geo.tail_from(order + 1);
    let mut rows = Vec::new();
    for d in index_vectors_up_to(ens.p, degree) {
        let f = |x: &Vec<C64>| x.iter().zip(d.entries()).fold(C64::new(1.0, 0.0), |acc, (v, &k)| acc * v.powu(k as u32));
        let (_, lhs) = summarize(&direct.iter().map(f).collect::<Vec<_>>());
        let (_, rhs) = summarize(&pushed.iter().map(f).collect::<Vec<_>>());
        let allowance = 2.0 * d.total() as f64 * coord_tail + float_slack(lhs.value(), rhs.value());
        let diff = (lhs.value() - rhs.value()).norm();
        rows.push(Row {
            experiment: "invariance".into(),
            key: format!("d={:?}", d.0),
            n: None,
            lhs: Some(lhs),
            rhs: Some(rhs),
            verdict: judge(diff, &lhs, &rhs, cfg.tolerance_sigmas, allowance),
            allowance,
            detail: format!("series_order={order}"),
        });
    }
    Ok(rows)
}
