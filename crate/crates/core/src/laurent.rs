//! Truncated Laurent series at infinity, `f(z) = Σ_{k=0}^{N} c_k z^{-k}`.
//!
//! A series knows its order `N`. Binary operations truncate to the shorter
//! operand, and asking for `c_k` with `k > N` is an error: coefficients that
//! were never computed are not reported as zero.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{precondition, Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedLaurent<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> TruncatedLaurent<S> {
    /// Series with coefficients `c_0..c_N`; `coeffs` must be nonempty.
    pub fn new(coeffs: Vec<S>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series stores at least c_0");
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(vec![S::zero(); order + 1])
    }

    /// The unit series `1`.
    pub fn one(order: usize) -> Self {
        Self::constant(S::one(), order)
    }

    pub fn constant(c: S, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// `z^{-k}` stored to `order` (the zero series when `k > order`).
    pub fn monomial(k: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if k <= order {
            s.coeffs[k] = S::one();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    /// `[f]_k`.
    pub fn coefficient_at(&self, k: usize) -> Result<&S> {
        self.coeffs.get(k).ok_or(Error::TruncationExceeded {
            requested: k,
            order: self.order(),
        })
    }

    pub fn truncate(&self, order: usize) -> Self {
        let keep = order.min(self.order()) + 1;
        Self::new(self.coeffs[..keep].to_vec())
    }

    /// `a f + b g`, truncated to the shorter operand.
    pub fn linear_combine(a: &S, f: &Self, b: &S, g: &Self) -> Self {
        let n = f.order().min(g.order()) + 1;
        Self::new(
            f.coeffs[..n]
                .iter()
                .zip(&g.coeffs[..n])
                .map(|(x, y)| a.clone() * x.clone() + b.clone() * y.clone())
                .collect(),
        )
    }

    pub fn scale(&self, a: &S) -> Self {
        Self::new(self.coeffs.iter().map(|c| a.clone() * c.clone()).collect())
    }

    /// Cauchy product truncated to the shorter operand.
    pub fn multiply(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut out = vec![S::zero(); order + 1];
        for (i, a) in self.coeffs[..=order].iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=order - i].iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::new(out)
    }

    pub fn power(&self, m: usize) -> Self {
        let mut acc = Self::one(self.order());
        let mut base = self.clone();
        let mut e = m;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.multiply(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.multiply(&base);
            }
        }
        acc
    }

    /// Series of `1 / (z - d(z))`, one order longer than `d`.
    ///
    /// Equivalent to the geometric expansion `(1/z) Σ_m (d/z)^m`; the
    /// coefficients come from `(z - d) r = 1`, i.e. `r_0 = 0`, `r_1 = 1` and
    /// `r_{k+1} = Σ_{i=0}^{k} d_i r_{k-i}` for `k >= 1`.
    pub fn resolvent_reciprocal(d: &Self) -> Self {
        let n = d.order();
        let mut r = vec![S::zero(); n + 2];
        r[1] = S::one();
        for k in 0..=n {
            let mut acc = if k == 0 { S::one() } else { S::zero() };
            for i in 0..=k {
                if !r[k - i].is_zero() {
                    acc = acc + d.coeffs[i].clone() * r[k - i].clone();
                }
            }
            r[k + 1] = acc;
        }
        Self::new(r)
    }

    /// Multiplicative inverse of a series with invertible constant term.
    pub fn inverse(&self) -> Result<Self> {
        let c0 = &self.coeffs[0];
        if c0.is_zero() {
            return Err(precondition("series inverse needs a nonzero constant term"));
        }
        let inv0 = S::one() / c0.clone();
        let n = self.order();
        let mut out: Vec<S> = Vec::with_capacity(n + 1);
        out.push(inv0.clone());
        for k in 1..=n {
            let mut acc = S::zero();
            for i in 1..=k {
                acc = acc + self.coeffs[i].clone() * out[k - i].clone();
            }
            out.push(-(acc * inv0.clone()));
        }
        Ok(Self::new(out))
    }

    /// `z^{-m} f`, keeping the order.
    pub fn shift_down(&self, m: usize) -> Self {
        let n = self.order();
        let mut out = vec![S::zero(); n + 1];
        for k in m..=n {
            out[k] = self.coeffs[k - m].clone();
        }
        Self::new(out)
    }

    /// `z f` for a series without constant term; the order drops by one.
    pub fn times_z(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(precondition("times_z: series has a constant term"));
        }
        if self.order() == 0 {
            return Err(precondition("times_z: order-0 series has no decaying part"));
        }
        Ok(Self::new(self.coeffs[1..].to_vec()))
    }

    /// Index of the first coefficient that is not negligible (exactly zero on exact backends).
    pub fn first_nonzero(&self, tol: f64) -> Option<usize> {
        self.coeffs
            .iter()
            .position(|c| !crate::scalar::is_negligible(c, tol))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Partial sum `Σ_{k<=N} c_k z^{-k}` by Horner's rule in `1/z`.
    pub fn eval(&self, z: &S) -> S {
        let w = S::one() / z.clone();
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc * w.clone() + c.clone())
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> TruncatedLaurent<T> {
        TruncatedLaurent::new(self.coeffs.iter().map(f).collect())
    }
}

impl<S: Scalar> Add for &TruncatedLaurent<S> {
    type Output = TruncatedLaurent<S>;
    fn add(self, rhs: Self) -> Self::Output {
        TruncatedLaurent::linear_combine(&S::one(), self, &S::one(), rhs)
    }
}

impl<S: Scalar> Sub for &TruncatedLaurent<S> {
    type Output = TruncatedLaurent<S>;
    fn sub(self, rhs: Self) -> Self::Output {
        TruncatedLaurent::linear_combine(&S::one(), self, &-S::one(), rhs)
    }
}

impl<S: Scalar> Mul for &TruncatedLaurent<S> {
    type Output = TruncatedLaurent<S>;
    fn mul(self, rhs: Self) -> Self::Output {
        self.multiply(rhs)
    }
}

impl<S: Scalar> Neg for &TruncatedLaurent<S> {
    type Output = TruncatedLaurent<S>;
    fn neg(self) -> Self::Output {
        self.scale(&-S::one())
    }
}
