use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::scalar::{Scalar, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub re: f64,
    pub im: f64,
    /// `sqrt((Var re + Var im) / T)`.
    pub se: f64,
}

impl Estimate {
    pub fn exact(v: C64) -> Self {
        Self {
            re: v.re,
            im: v.im,
            se: 0.0,
        }
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

/// Sample mean in `S` plus its float summary. Values are summed in the given order.
pub fn summarize<S: Scalar>(values: &[S]) -> (S, Estimate) {
    let t = values.len();
    assert!(t > 0, "no samples");
    let sum = values.iter().fold(S::zero(), |acc, v| acc + v.clone());
    let mean = sum / S::from_i64(t as i64);
    let m = mean.to_c64();
    let se = if t > 1 && values.iter().any(|v| *v != values[0]) {
        let var = values
            .iter()
            .map(|v| (v.to_c64() - m).norm_sqr())
            .sum::<f64>()
            / (t - 1) as f64;
        (var / t as f64).sqrt()
    } else {
        0.0
    };
    (mean, Estimate { re: m.re, im: m.im, se })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    /// Reported value without a comparison.
    Info,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Info => "info",
        }
    }
}

/// Pass iff `|Δ| <= k sqrt(SE_l² + SE_r²) + allowance`.
pub fn judge(delta: f64, lhs: &Estimate, rhs: &Estimate, sigmas: f64, allowance: f64) -> Verdict {
    let bound = sigmas * (lhs.se * lhs.se + rhs.se * rhs.se).sqrt() + allowance;
    if delta <= bound {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub experiment: String,
    /// Moment order, monomial, index vector or check name.
    pub key: String,
    pub n: Option<usize>,
    pub lhs: Option<Estimate>,
    pub rhs: Option<Estimate>,
    pub verdict: Verdict,
    /// Deterministic slack added to the statistical bound.
    pub allowance: f64,
    pub detail: String,
}

impl Row {
    pub fn info(experiment: &str, key: String, n: Option<usize>, lhs: Estimate, detail: String) -> Self {
        Self {
            experiment: experiment.into(),
            key,
            n,
            lhs: Some(lhs),
            rhs: None,
            verdict: Verdict::Info,
            allowance: 0.0,
            detail,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: u64,
    pub config_hash: String,
    /// Wall-clock seconds per experiment; only filled on request since it breaks byte identity.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub timings: Vec<(String, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub metadata: Metadata,
    pub rows: Vec<Row>,
}

impl ExperimentReport {
    pub fn new(seed: u64, config_hash: String) -> Self {
        Self {
            metadata: Metadata {
                seed,
                config_hash,
                timings: Vec::new(),
            },
            rows: Vec::new(),
        }
    }

    pub fn extend(&mut self, other: ExperimentReport) {
        self.rows.extend(other.rows);
        self.metadata.timings.extend(other.metadata.timings);
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.verdict == Verdict::Fail)
    }

    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.verdict != Verdict::Fail && r.verdict != Verdict::Inconclusive)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// One line per row; floats in `{:.16e}` (17 significant digits).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "experiment,key,n,estimate_lhs,estimate_lhs_im,se_lhs,estimate_rhs,estimate_rhs_im,se_rhs,verdict,allowance,detail\n",
        );
        let num = |x: f64| format!("{x:.16e}");
        let est = |e: &Option<Estimate>| match e {
            Some(e) => format!("{},{},{}", num(e.re), num(e.im), num(e.se)),
            None => ",,".into(),
        };
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                csv_field(&r.experiment),
                csv_field(&r.key),
                r.n.map(|n| n.to_string()).unwrap_or_default(),
                est(&r.lhs),
                est(&r.rhs),
                r.verdict.as_str(),
                num(r.allowance),
                csv_field(&r.detail)
            );
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
