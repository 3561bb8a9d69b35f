//! Traces and diagonal entries of matrix powers that exploit the band.

use super::FiniteBandedMatrix;
use crate::scalar::Scalar;

/// Banded storage of `B^m`: row `i` holds columns `i - lower ..= i + upper`.
struct Band<S> {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<S>,
}

impl<S: Scalar> Band<S> {
    fn width(&self) -> usize {
        self.lower + self.upper + 1
    }

    fn get(&self, i: usize, c: isize) -> Option<&S> {
        if c < 0 || c as usize >= self.n {
            return None;
        }
        let off = c - i as isize + self.lower as isize;
        if off < 0 || off as usize >= self.width() {
            return None;
        }
        Some(&self.data[i * self.width() + off as usize])
    }

    fn identity(n: usize) -> Self {
        let mut data = vec![S::zero(); n];
        for x in data.iter_mut() {
            *x = S::one();
        }
        Self {
            n,
            lower: 0,
            upper: 0,
            data,
        }
    }

    fn trace(&self) -> S {
        (0..self.n).fold(S::zero(), |acc, i| acc + self.data[i * self.width() + self.lower].clone())
    }

    /// `self · B`. Column `c` of `B` has the superdiagonal one at row `c - 1`
    /// and `b_c^{(k)}` at row `c + k`.
    fn times(&self, b: &FiniteBandedMatrix<S>) -> Self {
        let n = self.n;
        let p = b.bands();
        let lower = (self.lower + p).min(n.saturating_sub(1));
        let upper = (self.upper + 1).min(n.saturating_sub(1));
        let width = lower + upper + 1;
        let mut data = vec![S::zero(); n * width];
        for i in 0..n {
            let lo = i.saturating_sub(lower);
            let hi = (i + upper).min(n - 1);
            for c in lo..=hi {
                let mut acc = S::zero();
                if let Some(x) = self.get(i, c as isize - 1) {
                    acc = acc + x.clone();
                }
                for k in 0..=p {
                    if let (Some(x), Some(bk)) = (self.get(i, (c + k) as isize), b.coeff(k, c as isize + 1)) {
                        if !x.is_zero() {
                            acc = acc + x.clone() * bk.clone();
                        }
                    }
                }
                data[i * width + (c + lower - i)] = acc;
            }
        }
        Self { n, lower, upper, data }
    }
}

/// `tr(B^s)` for `s = 0..=s_max` by repeated banded products.
///
/// Step `m` costs `O(n · m p · p)`; no eigenvalues are computed.
pub fn trace_powers<S: Scalar>(b: &FiniteBandedMatrix<S>, s_max: usize) -> Vec<S> {
    let mut out = Vec::with_capacity(s_max + 1);
    let mut pow = Band::identity(b.size());
    out.push(S::from_i64(b.size() as i64));
    for _ in 0..s_max {
        pow = pow.times(b);
        out.push(pow.trace());
    }
    out
}

/// `tr(B^s)`.
pub fn trace_power<S: Scalar>(b: &FiniteBandedMatrix<S>, s: usize) -> S {
    trace_powers(b, s).pop().unwrap()
}

/// `B^s(j, j)` for `s = 0..=s_max` (1-based `j`), by walking `B^s e_j`.
pub fn power_diagonal_entries<S: Scalar>(b: &FiniteBandedMatrix<S>, j: usize, s_max: usize) -> Vec<S> {
    let mut v = vec![S::zero(); b.size()];
    v[j - 1] = S::one();
    let mut out = Vec::with_capacity(s_max + 1);
    out.push(S::one());
    for _ in 0..s_max {
        v = b.matvec(&v);
        out.push(v[j - 1].clone());
    }
    out
}
