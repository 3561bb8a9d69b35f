//! Bounded coefficient distributions, their exact moments, and seeded sampling.
//!
//! Every sampled entry is a pure function of `(seed, trial, role, k, n)`: the
//! stream `trial << 4 | role` selects a ChaCha20 stream and `(k, n)` selects a
//! fixed block inside it. Windows therefore do not depend on evaluation order
//! or thread count.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::banded_hessenberg::DiagonalSequences;
use crate::error::{Error, Result};
use crate::scalar::{exact_modulus, exact_real, ExactComplex, Rational, Scalar};
use crate::two_sided::TwoSidedWindow;

/// A complex rational read from configuration: an integer, a `"p/q"` string,
/// a float (converted exactly), or `{"re": …, "im": …}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactValue(pub ExactComplex);

fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Config(format!("cannot parse {s:?} as a rational"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Ok(n) = BigInt::from_str(s) {
        return Ok(Rational::from_integer(n));
    }
    let f = f64::from_str(s).map_err(|_| bad())?;
    Rational::from_float(f).ok_or_else(bad)
}

impl fmt::Display for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.im.is_zero() {
            write!(f, "{}", format_rational(&self.0.re))
        } else {
            write!(f, "{}+{}i", format_rational(&self.0.re), format_rational(&self.0.im))
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RealRepr {
    Int(i64),
    Float(f64),
    Text(String),
}

impl RealRepr {
    fn to_rational(&self) -> Result<Rational> {
        match self {
            RealRepr::Int(v) => Ok(Rational::from_integer((*v).into())),
            RealRepr::Float(v) => Rational::from_float(*v).ok_or_else(|| Error::Config(format!("non-finite value {v}"))),
            RealRepr::Text(s) => parse_rational(s),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ValueRepr {
    Real(RealRepr),
    Complex { re: RealRepr, im: RealRepr },
}

impl Serialize for ExactValue {
    fn serialize<Se: Serializer>(&self, s: Se) -> std::result::Result<Se::Ok, Se::Error> {
        let repr = if self.0.im.is_zero() {
            ValueRepr::Real(RealRepr::Text(format_rational(&self.0.re)))
        } else {
            ValueRepr::Complex {
                re: RealRepr::Text(format_rational(&self.0.re)),
                im: RealRepr::Text(format_rational(&self.0.im)),
            }
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExactValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = ValueRepr::deserialize(d)?;
        let v = match repr {
            ValueRepr::Real(r) => exact_real(r.to_rational().map_err(serde::de::Error::custom)?),
            ValueRepr::Complex { re, im } => Complex::new(
                re.to_rational().map_err(serde::de::Error::custom)?,
                im.to_rational().map_err(serde::de::Error::custom)?,
            ),
        };
        Ok(ExactValue(v))
    }
}

impl From<Rational> for ExactValue {
    fn from(r: Rational) -> Self {
        ExactValue(exact_real(r))
    }
}

/// A real rational read from configuration (same formats as [`ExactValue`], real only).
#[derive(Clone, Debug, PartialEq)]
pub struct RationalValue(pub Rational);

impl Serialize for RationalValue {
    fn serialize<Se: Serializer>(&self, s: Se) -> std::result::Result<Se::Ok, Se::Error> {
        RealRepr::Text(format_rational(&self.0)).serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = RealRepr::deserialize(d)?;
        r.to_rational().map(RationalValue).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Constant(ExactValue),
    Atoms {
        values: Vec<ExactValue>,
        probs: Vec<RationalValue>,
    },
    /// Uniform law on the real interval `[lo, hi]`.
    Uniform { lo: RationalValue, hi: RationalValue },
}

impl DistributionSpec {
    pub fn constant(c: Rational) -> Self {
        DistributionSpec::Constant(c.into())
    }

    pub fn atoms(values: Vec<ExactComplex>, probs: Vec<Rational>) -> Self {
        DistributionSpec::Atoms {
            values: values.into_iter().map(ExactValue).collect(),
            probs: probs.into_iter().map(RationalValue).collect(),
        }
    }

    /// Equal-weight real atoms.
    pub fn uniform_atoms(values: &[Rational]) -> Self {
        let w = Rational::new(BigInt::one(), BigInt::from(values.len()));
        Self::atoms(
            values.iter().cloned().map(exact_real).collect(),
            vec![w; values.len()],
        )
    }

    pub fn uniform(lo: Rational, hi: Rational) -> Self {
        DistributionSpec::Uniform {
            lo: RationalValue(lo),
            hi: RationalValue(hi),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DistributionSpec::Constant(_) => Ok(()),
            DistributionSpec::Atoms { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return Err(Error::Config("atoms need matching, nonempty values and probs".into()));
                }
                if probs.iter().any(|p| p.0.is_negative()) {
                    return Err(Error::Config("atom probabilities must be nonnegative".into()));
                }
                let total = probs.iter().fold(Rational::zero(), |acc, p| acc + p.0.clone());
                if !total.is_one() {
                    return Err(Error::Config(format!("atom probabilities sum to {total}, not 1")));
                }
                Ok(())
            }
            DistributionSpec::Uniform { lo, hi } => {
                if lo.0 >= hi.0 {
                    return Err(Error::Config("uniform law needs lo < hi".into()));
                }
                Ok(())
            }
        }
    }

    /// `C`: the largest modulus in the support.
    pub fn bound(&self) -> f64 {
        match self {
            DistributionSpec::Constant(c) => exact_modulus(&c.0),
            DistributionSpec::Atoms { values, probs } => values
                .iter()
                .zip(probs)
                .filter(|(_, p)| !p.0.is_zero())
                .map(|(v, _)| exact_modulus(&v.0))
                .fold(0.0, f64::max),
            DistributionSpec::Uniform { lo, hi } => lo.0.abs().max(hi.0.abs()).to_f64().unwrap_or(f64::INFINITY),
        }
    }

    /// `true` for a point mass.
    pub fn is_deterministic(&self) -> bool {
        match self {
            DistributionSpec::Constant(_) => true,
            DistributionSpec::Atoms { probs, .. } => probs.iter().filter(|p| !p.0.is_zero()).count() == 1,
            DistributionSpec::Uniform { .. } => false,
        }
    }
}

/// `m_k = ∫ z^k dμ`, exactly.
pub fn exact_moment(d: &DistributionSpec, k: usize) -> ExactComplex {
    if k == 0 {
        return ExactComplex::one();
    }
    match d {
        DistributionSpec::Constant(c) => c.0.pow_u(k),
        DistributionSpec::Atoms { values, probs } => values
            .iter()
            .zip(probs)
            .fold(ExactComplex::zero(), |acc, (v, p)| acc + v.0.pow_u(k) * exact_real(p.0.clone())),
        DistributionSpec::Uniform { lo, hi } => {
            let (lo, hi) = (&lo.0, &hi.0);
            let e = (k + 1) as i32;
            let num = num_traits::pow(hi.clone(), e as usize) - num_traits::pow(lo.clone(), e as usize);
            let den = Rational::from_integer(BigInt::from(e)) * (hi - lo);
            exact_real(num / den)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub p: usize,
    pub mus: Vec<DistributionSpec>,
    #[serde(default)]
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(p: usize, mus: Vec<DistributionSpec>, seed: u64) -> Result<Self> {
        let e = Self { p, mus, seed };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::Config("p must be at least 1".into()));
        }
        if self.mus.len() != self.p + 1 {
            return Err(Error::Config(format!(
                "ensemble with p = {} needs {} distributions, got {}",
                self.p,
                self.p + 1,
                self.mus.len()
            )));
        }
        self.mus.iter().try_for_each(DistributionSpec::validate)
    }

    /// `C = max_k C_k`.
    pub fn bound(&self) -> f64 {
        self.mus.iter().map(DistributionSpec::bound).fold(0.0, f64::max)
    }

    /// A-priori operator norm bound `(C + 1)(p + 2)`.
    pub fn norm_bound(&self) -> f64 {
        (self.bound() + 1.0) * (self.p as f64 + 2.0)
    }

    pub fn is_deterministic(&self) -> bool {
        self.mus.iter().all(DistributionSpec::is_deterministic)
    }
}

/// Purpose of a random substream; at most 16 roles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Role {
    Window = 0,
    CollectionA = 1,
    CollectionB = 2,
    Alpha = 3,
    Matrix = 4,
    Weyl = 5,
    WeylAux = 6,
    Mixing = 7,
    Identity = 8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamId {
    pub trial: u64,
    pub role: Role,
}

impl StreamId {
    pub fn new(trial: u64, role: Role) -> Self {
        Self { trial, role }
    }

    fn stream(&self) -> u64 {
        assert!(self.trial < 1 << 60, "trial index exceeds the stream space");
        (self.trial << 4) | self.role as u64
    }
}

/// Per-distribution sampler with thresholds and values prepared for `S`.
enum Prepared<S> {
    Constant(S),
    /// Cumulative thresholds `⌈F_i · 2^64⌉`; draw `U` picks the first `i` with `U < t_i`.
    Atoms { thresholds: Vec<u128>, values: Vec<S> },
    Uniform { lo: f64, width: f64 },
}

fn convert<S: Scalar>(v: &ExactComplex) -> Result<S> {
    S::from_exact(v).ok_or_else(|| Error::Config(format!("value {} is not representable on this scalar backend", ExactValue(v.clone()))))
}

impl<S: Scalar> Prepared<S> {
    fn new(d: &DistributionSpec) -> Result<Self> {
        Ok(match d {
            DistributionSpec::Constant(c) => Prepared::Constant(convert(&c.0)?),
            DistributionSpec::Atoms { values, probs } => {
                let scale = Rational::from_integer(BigInt::one() << 64);
                let mut cum = Rational::zero();
                let mut thresholds = Vec::with_capacity(probs.len());
                for p in probs {
                    cum = cum + p.0.clone();
                    let t = (cum.clone() * scale.clone()).ceil().to_integer();
                    thresholds.push(t.to_u128().expect("threshold at most 2^64"));
                }
                Prepared::Atoms {
                    thresholds,
                    values: values.iter().map(|v| convert(&v.0)).collect::<Result<_>>()?,
                }
            }
            DistributionSpec::Uniform { lo, hi } => {
                let lo_f = lo.0.to_f64().unwrap();
                Prepared::Uniform {
                    lo: lo_f,
                    width: hi.0.to_f64().unwrap() - lo_f,
                }
            }
        })
    }

    fn draw(&self, u: u64) -> S {
        match self {
            Prepared::Constant(c) => c.clone(),
            Prepared::Atoms { thresholds, values } => {
                let u = u as u128;
                let i = thresholds.iter().position(|&t| u < t).unwrap_or(values.len() - 1);
                values[i].clone()
            }
            Prepared::Uniform { lo, width } => {
                let x = (u >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                S::from_f64(lo + width * x)
            }
        }
    }
}

/// Deterministic sampler for one ensemble on scalar backend `S`.
pub struct Sampler<S> {
    seed: u64,
    prepared: Vec<Prepared<S>>,
    p: usize,
}

const SITE_OFFSET: i64 = 1 << 32;

impl<S: Scalar> Sampler<S> {
    pub fn new(e: &EnsembleSpec) -> Result<Self> {
        e.validate()?;
        Ok(Self {
            seed: e.seed,
            prepared: e.mus.iter().map(Prepared::new).collect::<Result<_>>()?,
            p: e.p,
        })
    }

    pub fn bands(&self) -> usize {
        self.p
    }

    fn rng(&self, stream: StreamId) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(stream.stream());
        rng
    }

    /// Draw for slot `(k, n)` of `stream`, distributed as `μ_law`.
    fn entry(&self, rng: &mut ChaCha20Rng, law: usize, k: usize, n: i64) -> S {
        let pos = ((k as u128) << 33) + (n + SITE_OFFSET) as u128;
        rng.set_word_pos(pos * 16);
        self.prepared[law].draw(rng.next_u64())
    }

    /// `a_n^{(k)}` for `n ∈ [-L, L]`, i.i.d. from `μ_k`.
    pub fn window(&self, half_width: usize, stream: StreamId) -> TwoSidedWindow<S> {
        let mut rng = self.rng(stream);
        TwoSidedWindow::from_fn(self.p, half_width, |k, n| self.entry(&mut rng, k, k, n))
    }

    /// `a_n^{(k)}` for `n = 1..=len`.
    pub fn sequences(&self, len: usize, stream: StreamId) -> DiagonalSequences<S> {
        let mut rng = self.rng(stream);
        DiagonalSequences::from_fn(self.p, len, |k, n| self.entry(&mut rng, k, k, n as i64))
    }

    /// One draw of `(a^{(0)}, …, a^{(p)})` from the product law, indexed by `slot`.
    pub fn product_draw(&self, stream: StreamId, slot: i64) -> Vec<S> {
        let mut rng = self.rng(stream);
        (0..=self.p).map(|k| self.entry(&mut rng, k, k, slot)).collect()
    }

    /// Two-sided window assembled from independent `𝒜`, `ℬ` and `α`:
    /// `a_n = 𝒜_n` for `n >= 1`, `α_{-n}^{(k)}` for `-k <= n <= 0`, and
    /// `b_{-n-k}^{(k)}` for `n <= -k-1`. Then `w_0` of the window is `W`.
    pub fn theorem_collections(&self, half_width: usize, trial: u64) -> Result<TwoSidedWindow<S>> {
        if half_width < self.p {
            return Err(Error::InsufficientWindow {
                needed: self.p,
                available: half_width,
            });
        }
        let mut ra = self.rng(StreamId::new(trial, Role::CollectionA));
        let mut rb = self.rng(StreamId::new(trial, Role::CollectionB));
        let mut ralpha = self.rng(StreamId::new(trial, Role::Alpha));
        Ok(TwoSidedWindow::from_fn(self.p, half_width, |k, n| {
            if n >= 1 {
                self.entry(&mut ra, k, k, n)
            } else if n >= -(k as i64) {
                self.entry(&mut ralpha, k, k, -n)
            } else {
                self.entry(&mut rb, k, k, -n - k as i64)
            }
        }))
    }
}

pub fn sample_window<S: Scalar>(e: &EnsembleSpec, half_width: usize, stream: StreamId) -> Result<TwoSidedWindow<S>> {
    Ok(Sampler::new(e)?.window(half_width, stream))
}

pub fn sample_sequences<S: Scalar>(e: &EnsembleSpec, len: usize, stream: StreamId) -> Result<DiagonalSequences<S>> {
    Ok(Sampler::new(e)?.sequences(len, stream))
}

pub fn build_theorem_collections<S: Scalar>(e: &EnsembleSpec, half_width: usize, trial: u64) -> Result<TwoSidedWindow<S>> {
    Sampler::new(e)?.theorem_collections(half_width, trial)
}
