//! One pass/fail line per acceptance criterion.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use num_traits::{One, Zero};

use banded_spectra::banded_hessenberg::{
    char_poly_family, normalized_log_derivative, resolvent_entry_dense_oracle, resolvent_entry_poly,
};
use banded_spectra::combinatorics::index_vectors_up_to;
use banded_spectra::experiments::identities::{run_identity_suite, IdentityCheck, IdentityGrid};
use banded_spectra::experiments::{
    gsuite, invariance, moments, with_threads, ExperimentConfig, ExperimentReport, Row, Verdict,
};
use banded_spectra::sampling::{exact_moment, DistributionSpec, EnsembleSpec, Role, Sampler, StreamId};
use banded_spectra::{ExactComplex, Rational, Scalar, C64};

const SEED: u64 = 20_251_018;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn constant_ensemble(p: usize) -> EnsembleSpec {
    EnsembleSpec::new(p, vec![DistributionSpec::constant(q(1, 2)); p + 1], SEED).unwrap()
}

fn bernoulli_ensemble(p: usize) -> EnsembleSpec {
    let mut mus = vec![DistributionSpec::constant(q(0, 1)); p];
    mus.push(DistributionSpec::uniform_atoms(&[q(-1, 1), q(1, 1)]));
    EnsembleSpec::new(p, mus, SEED).unwrap()
}

fn uniform_ensemble(p: usize) -> EnsembleSpec {
    EnsembleSpec::new(p, vec![DistributionSpec::uniform(q(-1, 1), q(1, 1)); p + 1], SEED).unwrap()
}

fn grid_ensembles() -> Vec<(String, EnsembleSpec)> {
    let mut out = Vec::new();
    for p in 1..=2 {
        out.push((format!("constant p={p}"), constant_ensemble(p)));
        out.push((format!("bernoulli p={p}"), bernoulli_ensemble(p)));
        out.push((format!("uniform p={p}"), uniform_ensemble(p)));
    }
    out
}

fn config(ens: EnsembleSpec, n_values: Vec<usize>, s_max: usize, trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        ensemble: ens,
        n_values,
        s_max,
        trials_lhs: trials,
        trials_rhs: trials,
        laurent_order: s_max + 2,
        z_eval: None,
        tolerance_sigmas: 3.0,
    }
}

/// Expected closed-walk weight `E H^s(i, i)` summed over starting sites, by
/// enumerating every walk and pairing repeated variables through exact moments.
/// Steps: `i -> i+1` with weight 1, `i -> i` with `a_i^{(0)}`, `i -> i-k` with `a_{i-k}^{(k)}`.
/// `bounds = Some(n)` confines walks to `1..=n`; `None` is the bi-infinite operator.
struct WalkOracle {
    p: usize,
    /// `moments[k][m] = m_m^{(k)}`
    moments: Vec<Vec<ExactComplex>>,
}

impl WalkOracle {
    fn new(ens: &EnsembleSpec, s_max: usize) -> Self {
        Self {
            p: ens.p,
            moments: ens.mus.iter().map(|d| (0..=s_max).map(|m| exact_moment(d, m)).collect()).collect(),
        }
    }

    fn walks(&self, start: i64, s: usize, bounds: Option<i64>) -> ExactComplex {
        let mut total = ExactComplex::zero();
        let mut uses: Vec<(usize, i64)> = Vec::new();
        self.dfs(start, start, s, bounds, &mut uses, &mut total);
        total
    }

    fn dfs(&self, start: i64, at: i64, left: usize, bounds: Option<i64>, uses: &mut Vec<(usize, i64)>, total: &mut ExactComplex) {
        if left == 0 {
            if at == start {
                let mut counts: BTreeMap<(usize, i64), usize> = BTreeMap::new();
                for u in uses.iter() {
                    *counts.entry(*u).or_default() += 1;
                }
                let w = counts
                    .iter()
                    .fold(ExactComplex::one(), |acc, ((k, _), &c)| acc * self.moments[*k][c].clone());
                *total = total.clone() + w;
            }
            return;
        }
        let inside = |x: i64| bounds.is_none_or(|n| (1..=n).contains(&x));
        // Down steps drop at most p sites, so the walk must still be able to return.
        if at + 1 - start <= (self.p * (left - 1)) as i64 && inside(at + 1) {
            self.dfs(start, at + 1, left - 1, bounds, uses, total);
        }
        for k in 0..=self.p {
            let to = at - k as i64;
            if !inside(to) {
                continue;
            }
            uses.push((k, to));
            self.dfs(start, to, left - 1, bounds, uses, total);
            uses.pop();
        }
    }

    fn limit(&self, s: usize) -> ExactComplex {
        self.walks(0, s, None)
    }

    /// `E (1/n) tr H_n^s`.
    fn finite(&self, n: i64, s: usize) -> ExactComplex {
        let sum = (1..=n).fold(ExactComplex::zero(), |acc, i| acc + self.walks(i, s, Some(n)));
        sum / ExactComplex::from_i64(n)
    }
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn identity_criterion(checks: &[IdentityCheck], p_max: usize, n_max: usize, draws: usize) -> Outcome {
    let grid = IdentityGrid {
        seed: SEED,
        p_max,
        n_max,
        draws,
        single_draw: None,
        checks: checks.to_vec(),
        inject: None,
    };
    let start = Instant::now();
    let out = run_identity_suite(&grid).expect("identity suite runs");
    let runs: usize = checks.iter().map(|&c| out.runs(c)).sum();
    let failures: Vec<String> = out.failures().map(|f| f.to_string()).collect();
    outcome(
        failures.is_empty(),
        format!(
            "{runs} exact checks, {} failures, {:.1}s{}",
            failures.len(),
            start.elapsed().as_secs_f64(),
            failures.first().map(|f| format!(", first: {f}")).unwrap_or_default()
        ),
    )
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut o = identity_criterion(&[IdentityCheck::Derivative, IdentityCheck::RowExpansion], 3, 12, 50);
    let secs = start.elapsed().as_secs_f64();
    if secs >= 10.0 {
        o.passed = false;
        o.detail += " (over the 10 s budget)";
    }
    o
}

fn criterion_2() -> Outcome {
    let ens = |p: usize| {
        let atoms: Vec<Rational> = (-3..=3).map(|v| q(v, 1)).collect();
        EnsembleSpec::new(p, vec![DistributionSpec::uniform_atoms(&atoms); p + 1], SEED).unwrap()
    };
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for case in 0..100u64 {
        let p = 1 + (case % 3) as usize;
        let n = 2 + (case % 11) as usize;
        let e = ens(p);
        let sampler: Sampler<C64> = Sampler::new(&e).unwrap();
        let b = sampler.sequences(n, StreamId::new(case, Role::Matrix)).truncation(n).unwrap();
        let draw = sampler.product_draw(StreamId::new(case, Role::Mixing), 0);
        let h = e.norm_bound();
        let angle = draw[0].re * 0.7 + case as f64;
        let z = C64::from_polar(2.0 * h * (1.0 + 0.1 * (case % 7) as f64), angle);
        let fam = char_poly_family(&b).unwrap();
        let j = 1 + (case as usize * 7) % n;
        for (i, j) in [(j, j), (1, j)] {
            let fast = resolvent_entry_poly(&fam, &z, i, j).unwrap();
            let slow = resolvent_entry_dense_oracle(&b, &z, i, j).unwrap();
            worst = worst.max((fast - slow).norm() / slow.norm().max(f64::MIN_POSITIVE));
        }
        let trace: C64 = (1..=n).map(|k| resolvent_entry_dense_oracle(&b, &z, k, k).unwrap()).sum::<C64>() / n as f64;
        let log_der = normalized_log_derivative(&b, &z).unwrap();
        worst = worst.max((trace - log_der).norm() / trace.norm());
        cases += 1;
    }
    outcome(worst <= 1e-10, format!("{cases} random (B, z), worst relative deviation {worst:.2e}"))
}

fn check_rows(rows: &[Row], experiment_prefix: &str) -> (usize, Vec<String>) {
    let judged: Vec<&Row> = rows
        .iter()
        .filter(|r| r.experiment.starts_with(experiment_prefix) && r.verdict != Verdict::Info)
        .collect();
    let bad = judged
        .iter()
        .filter(|r| r.verdict != Verdict::Pass)
        .map(|r| {
            let (l, rr) = (r.lhs.unwrap(), r.rhs.unwrap());
            format!(
                "{} {} {}: lhs {:.5}±{:.1e} rhs {:.5}±{:.1e}",
                r.experiment,
                r.key,
                r.verdict.as_str(),
                l.re,
                l.se,
                rr.re,
                rr.se
            )
        })
        .collect();
    (judged.len(), bad)
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let s_max = 6;
    let mut details = Vec::new();
    let mut passed = true;
    let mut judged = 0;
    for (name, ens) in grid_ensembles() {
        let cfg = config(ens.clone(), vec![50, 100, 200], s_max, 2000);
        let rows = moments::compare_theorem_main::<C64>(&cfg).unwrap();
        let (count, bad) = check_rows(&rows, "compare");
        judged += count;
        for b in bad {
            passed = false;
            details.push(format!("{name}: {b}"));
        }
        // Right side against the exact limit from the walk oracle.
        let oracle = WalkOracle::new(&ens, s_max);
        for r in rows.iter().filter(|r| r.experiment == "moments/rhs" && r.key.starts_with("s=")) {
            let s: usize = r.key[2..].parse().unwrap();
            let limit = oracle.limit(s).to_c64();
            let est = r.lhs.unwrap();
            judged += 1;
            if (est.value() - limit).norm() > 3.0 * est.se + 1e-12 {
                passed = false;
                details.push(format!("{name}: rhs s={s} {:.5} vs limit {:.5}", est.re, limit.re));
            }
        }
        if ens.is_deterministic() {
            let exact_cfg = ExperimentConfig {
                trials_lhs: 1,
                trials_rhs: 1,
                n_values: vec![100, 200],
                ..cfg.clone()
            };
            let rows = moments::compare_theorem_main::<ExactComplex>(&exact_cfg).unwrap();
            for r in rows.iter().filter(|r| r.experiment == "compare" && r.key != "pointwise") {
                judged += 1;
                if r.lhs.unwrap().value() != r.rhs.unwrap().value() || r.lhs.unwrap().se != 0.0 || r.rhs.unwrap().se != 0.0 {
                    passed = false;
                    details.push(format!("{name}: exact path {} differs", r.key));
                }
            }
        }
    }

    // Anchor: p = 1, zero diagonal, Bernoulli subdiagonal.
    let ens = bernoulli_ensemble(1);
    let oracle = WalkOracle::new(&ens, 4);
    let limits: Vec<Rational> = (1..=4).map(|s| oracle.limit(s).re).collect();
    let expected = vec![q(0, 1), q(0, 1), q(0, 1), q(2, 1)];
    judged += 1;
    if limits != expected {
        passed = false;
        details.push(format!("anchor limits {limits:?}"));
    }
    let finite4 = oracle.finite(200, 4).re;
    judged += 1;
    if finite4 != q(2, 1) - q(2, 200) {
        passed = false;
        details.push(format!("anchor E_200 at s=4 is {finite4}"));
    }
    let cfg = config(ens, vec![200], 4, 2000);
    let lhs = moments::run_lhs_moments::<C64>(&cfg).unwrap();
    let rhs = moments::run_rhs_moments::<C64>(&cfg).unwrap();
    for s in 1..=4 {
        let limit = oracle.limit(s).to_c64();
        let band = (oracle.finite(200, s).to_c64() - limit).norm();
        let l = lhs[0].moments[s];
        let r = rhs.moments[s];
        judged += 2;
        if (l.value() - limit).norm() > 3.0 * l.se + band || (r.value() - limit).norm() > 3.0 * r.se {
            passed = false;
            details.push(format!("anchor s={s}: lhs {:.4}±{:.1e} rhs {:.4}±{:.1e}", l.re, l.se, r.re, r.se));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 120.0 {
        passed = false;
        details.push(format!("runtime {secs:.0}s over budget"));
    }
    let head = format!("{judged} comparisons over 6 ensembles plus anchor (limits 0,0,0,2), {secs:.1}s");
    outcome(passed, if details.is_empty() { head } else { format!("{head}; {}", details.join("; ")) })
}

fn criterion_9() -> Outcome {
    let mut details = Vec::new();
    let mut judged = 0;
    for (name, ens) in grid_ensembles() {
        let p = ens.p;
        let cfg = config(ens.clone(), vec![10], 2, 10_000);
        let r_list = index_vectors_up_to(p, 3);
        let rows = gsuite::run_g_suite(&cfg, &r_list).unwrap();
        let (count, bad) = check_rows(&rows, "gsuite");
        judged += count;
        details.extend(bad.into_iter().map(|b| format!("{name}: {b}")));
        if ens.is_deterministic() {
            for r in &rows {
                let (l, rr) = (r.lhs.unwrap(), r.rhs.unwrap());
                if l.se != 0.0 || rr.se != 0.0 || (l.value() - rr.value()).norm() > 1e-11 {
                    details.push(format!("{name}: {} not exact", r.key));
                }
            }
        }
    }
    let head = format!("{judged} g-suite comparisons, |r| <= 3, 10^4 trials per side");
    outcome(details.is_empty(), if details.is_empty() { head } else { format!("{head}; {}", details.join("; ")) })
}

fn criterion_10() -> Outcome {
    let atoms = |v: &[i64]| DistributionSpec::uniform_atoms(&v.iter().map(|&x| q(x, 1)).collect::<Vec<_>>());
    let complex_atoms = DistributionSpec::atoms(
        vec![ExactComplex::new(q(0, 1), q(1, 1)), ExactComplex::new(q(0, 1), q(-1, 1)), ExactComplex::new(q(1, 2), q(0, 1))],
        vec![q(1, 4), q(1, 4), q(1, 2)],
    );
    let ensembles = vec![
        ("atoms p=1", EnsembleSpec::new(1, vec![atoms(&[-1, 0, 1]), atoms(&[-1, 1])], SEED).unwrap()),
        ("atoms p=2", EnsembleSpec::new(2, vec![atoms(&[-1, 1]), atoms(&[0, 2]), complex_atoms], SEED).unwrap()),
        ("point mass p=1", constant_ensemble(1)),
        ("point mass p=2", constant_ensemble(2)),
    ];
    let mut details = Vec::new();
    let mut judged = 0;
    for (name, ens) in ensembles {
        let cfg = config(ens.clone(), vec![10], 2, 10_000);
        let rows = invariance::run_invariance(&cfg, 2).unwrap();
        let (count, bad) = check_rows(&rows, "invariance");
        judged += count;
        details.extend(bad.into_iter().map(|b| format!("{name}: {b}")));
        if ens.is_deterministic() {
            for r in &rows {
                let (l, rr) = (r.lhs.unwrap(), r.rhs.unwrap());
                if l.se != 0.0 || rr.se != 0.0 || (l.value() - rr.value()).norm() > 1e-11 {
                    details.push(format!("{name}: {} not exact", r.key));
                }
            }
        }
    }
    let head = format!("{judged} monomials of degree <= 2, 10^4 trials per side");
    outcome(details.is_empty(), if details.is_empty() { head } else { format!("{head}; {}", details.join("; ")) })
}

fn full_report(threads: usize) -> String {
    with_threads(Some(threads), || {
        let cfg = config(uniform_ensemble(2), vec![20, 40], 4, 300);
        let mut report = ExperimentReport::new(SEED, cfg.hash());
        let grid = IdentityGrid {
            seed: SEED,
            p_max: 2,
            n_max: 4,
            draws: 4,
            single_draw: None,
            checks: IdentityCheck::ALL.to_vec(),
            inject: None,
        };
        report.rows.extend(run_identity_suite(&grid).unwrap().rows());
        report.rows.extend(moments::compare_theorem_main::<C64>(&cfg).unwrap());
        report.rows.extend(gsuite::run_g_suite(&cfg, &gsuite::default_r_list(2)).unwrap());
        report.rows.extend(invariance::run_invariance(&cfg, 2).unwrap());
        report.to_json() + &report.to_csv()
    })
}

fn criterion_11() -> Outcome {
    let one = full_report(1);
    let eight = full_report(8);
    let again = full_report(8);
    outcome(
        one == eight && eight == again,
        format!("{} report bytes, identical across 1 and 8 threads and reruns", one.len()),
    )
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 identity suite", Box::new(criterion_1)),
        ("2 resolvent formulas", Box::new(criterion_2)),
        ("3 Hermite-Pade contact", Box::new(|| identity_criterion(&[IdentityCheck::Contact], 3, 12, 20))),
        (
            "4 shift relations and product expansion",
            Box::new(|| identity_criterion(&[IdentityCheck::ShiftRelation, IdentityCheck::ProductExpansion], 3, 12, 50)),
        ),
        ("5 two-sided central identity", Box::new(|| identity_criterion(&[IdentityCheck::CentralCoefficients], 3, 12, 100))),
        ("6 vanishing orders", Box::new(|| identity_criterion(&[IdentityCheck::Vanishing], 2, 8, 8))),
        ("7 w0 expansion", Box::new(|| identity_criterion(&[IdentityCheck::W0Expansion], 3, 12, 50))),
        ("8 moments at desk scale", Box::new(criterion_8)),
        ("9 g-suite", Box::new(criterion_9)),
        ("10 invariance principle", Box::new(criterion_10)),
        ("11 determinism", Box::new(criterion_11)),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        println!("criterion {name}: {} ({})", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        if !o.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
