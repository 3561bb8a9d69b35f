//! Monte Carlo and deterministic experiments behind the command line tool.
//!
//! Trials run in parallel but every trial draws from its own substream and the
//! results are reduced in trial order, so reports do not depend on the thread count.

mod config;
pub mod gsuite;
pub mod identities;
pub mod invariance;
pub mod moments;
mod report;

pub use config::ExperimentConfig;
pub use report::{judge, summarize, Estimate, ExperimentReport, Metadata, Row, Verdict};

use rayon::prelude::*;

use crate::banded_hessenberg::DiagonalSequences;
use crate::error::Result;
use crate::sampling::{Role, Sampler, StreamId};
use crate::scalar::C64;
use crate::weyl::{weyl_series, weyl_window};

/// Absolute slack for float-path comparisons that are exact in exact arithmetic.
pub const FLOAT_SLACK: f64 = 1e-10;

/// Target for geometric truncation tails at `z_eval`.
pub const TAIL_TARGET: f64 = 1e-12;

/// Runs `f(0..count)` in parallel and returns results in trial order.
pub fn par_trials<T: Send>(count: usize, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    let out: Vec<Result<T>> = (0..count as u64).into_par_iter().map(f).collect();
    out.into_iter().collect()
}

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// Geometric data at `z` for a window with norm bound `h`.
#[derive(Clone, Copy, Debug)]
pub struct Geometry {
    pub z: C64,
    pub h: f64,
    /// `q = h / |z|`.
    pub q: f64,
}

impl Geometry {
    pub fn new(z: C64, h: f64) -> Self {
        Self { z, h, q: h / z.norm() }
    }

    /// `Σ_{k >= m} h^{k-1} / |z|^k`, the tail of a series with `|c_k| <= h^{k-1}` past `z^{-m+1}`.
    pub fn tail_from(&self, m: usize) -> f64 {
        self.q.powi(m as i32 - 1) / (self.z.norm() * (1.0 - self.q))
    }

    /// Smallest order `N` whose tail past `z^{-N}` is below `tol`.
    pub fn order_for(&self, tol: f64) -> usize {
        (1..).find(|&n| self.tail_from(n + 1) < tol).unwrap()
    }

    /// `u_k` bounding `|φ_k(z)|`: `u_0 = 1`, `u_k = q^{k-1} / (|z| - h)`.
    pub fn phi_bound(&self, k: usize) -> f64 {
        if k == 0 {
            1.0
        } else {
            self.q.powi(k as i32 - 1) / (self.z.norm() - self.h)
        }
    }
}

/// Evaluates `(φ_1(z), …, φ_p(z))` of the sequences, truncated at `order`.
pub fn weyl_vector_at(seqs: &DiagonalSequences<C64>, order: usize, z: C64) -> Result<Vec<C64>> {
    let w = weyl_series(seqs, order)?;
    Ok(w.functions().iter().map(|f| f.eval(&z)).collect())
}

/// One Weyl vector draw for `(trial, role)`.
pub fn sample_weyl_vector(sampler: &Sampler<C64>, trial: u64, role: Role, order: usize, z: C64) -> Result<Vec<C64>> {
    let seqs = sampler.sequences(weyl_window(sampler.bands(), order), StreamId::new(trial, role));
    weyl_vector_at(&seqs, order, z)
}

/// `FLOAT_SLACK` scaled to the compared magnitudes.
pub fn float_slack(a: C64, b: C64) -> f64 {
    FLOAT_SLACK * (1.0 + a.norm() + b.norm())
}
