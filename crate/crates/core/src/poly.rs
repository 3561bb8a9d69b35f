//! Dense polynomials in `z` with ascending coefficients.

use std::ops::{Add, Mul, Sub};

use crate::error::{precondition, Result};
use crate::laurent::TruncatedLaurent;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Poly<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> Poly<S> {
    /// Coefficients in ascending degree order.
    pub fn new(coeffs: Vec<S>) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::new(vec![S::one()])
    }

    /// `z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![S::zero(); k + 1];
        c[k] = S::one();
        Self::new(c)
    }

    /// `z - c`.
    pub fn linear(c: S) -> Self {
        Self::new(vec![-c, S::one()])
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// Coefficient of `z^k` (zero beyond the stored length).
    pub fn coeff(&self, k: usize) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Highest index with a nonzero coefficient; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    pub fn scale(&self, a: &S) -> Self {
        Self::new(self.coeffs.iter().map(|c| a.clone() * c.clone()).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| S::from_i64(k as i64) * c.clone())
                .collect(),
        )
    }

    pub fn eval(&self, z: &S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc * z.clone() + c.clone())
    }

    /// Largest coefficient modulus (at least 1), a scale for float tolerances.
    pub fn coeff_scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.modulus()).fold(1.0, f64::max)
    }

    fn combine(&self, other: &Self, sign: S) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(
            (0..n)
                .map(|k| self.coeff(k) + sign.clone() * other.coeff(k))
                .collect(),
        )
    }

    /// Laurent series of `num / den` at infinity, to `order`.
    ///
    /// Requires `deg num <= deg den`; the leading coefficient of `den` must be
    /// invertible. The zero numerator gives the zero series.
    pub fn ratio_series(num: &Self, den: &Self, order: usize) -> Result<TruncatedLaurent<S>> {
        SeriesDenominator::new(den, order)?.ratio(num)
    }
}

/// Expansion of `1/Q` at infinity, kept for repeated `P/Q` expansions with the same `Q`.
pub(crate) struct SeriesDenominator<S> {
    degree: usize,
    order: usize,
    inv: TruncatedLaurent<S>,
}

impl<S: Scalar> SeriesDenominator<S> {
    pub(crate) fn new(den: &Poly<S>, order: usize) -> Result<Self> {
        let degree = den
            .degree()
            .ok_or_else(|| precondition("ratio_series: zero denominator"))?;
        let inv = Self::lift(den, degree, order).inverse()?;
        Ok(Self { degree, order, inv })
    }

    // z^{-d} P as a series in 1/z: coefficient of z^{-(d-i)} is p_i.
    fn lift(p: &Poly<S>, d: usize, order: usize) -> TruncatedLaurent<S> {
        let mut c = vec![S::zero(); order + 1];
        for i in 0..=d {
            let k = d - i;
            if k <= order {
                c[k] = p.coeff(i);
            }
        }
        TruncatedLaurent::new(c)
    }

    pub(crate) fn ratio(&self, num: &Poly<S>) -> Result<TruncatedLaurent<S>> {
        let Some(dn) = num.degree() else {
            return Ok(TruncatedLaurent::zero(self.order));
        };
        if dn > self.degree {
            return Err(precondition("ratio_series: numerator degree exceeds denominator degree"));
        }
        Ok(Self::lift(num, self.degree, self.order).multiply(&self.inv))
    }
}

impl<S: Scalar> Add for &Poly<S> {
    type Output = Poly<S>;
    fn add(self, rhs: Self) -> Poly<S> {
        self.combine(rhs, S::one())
    }
}

impl<S: Scalar> Sub for &Poly<S> {
    type Output = Poly<S>;
    fn sub(self, rhs: Self) -> Poly<S> {
        self.combine(rhs, -S::one())
    }
}

impl<S: Scalar> Mul for &Poly<S> {
    type Output = Poly<S>;
    fn mul(self, rhs: Self) -> Poly<S> {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return Poly::zero();
        }
        let mut out = vec![S::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn p(v: &[i64]) -> Poly<Rational> {
        Poly::new(v.iter().map(|&x| Rational::from_i64(x)).collect())
    }

    #[test]
    fn arithmetic() {
        let a = p(&[1, 1]);
        let b = p(&[-1, 1]);
        assert_eq!((&a * &b), p(&[-1, 0, 1]));
        assert!((&(&a - &a)).is_zero());
        assert_eq!(p(&[3, 2, 1]).derivative(), p(&[2, 2]));
        assert_eq!(p(&[1, 0, 2]).eval(&Rational::from_i64(3)), Rational::from_i64(19));
        assert_eq!(p(&[0, 5, 0, 0]).degree(), Some(1));
        assert_eq!(Poly::<Rational>::zero().degree(), None);
    }

    #[test]
    fn ratio_series_of_linear_factor() {
        // 1/(z - 2) = Σ 2^s z^{-s-1}
        let s = Poly::ratio_series(&p(&[1]), &p(&[-2, 1]), 6).unwrap();
        for k in 1..=6 {
            assert_eq!(s.coeffs()[k], Rational::from_i64(1 << (k - 1)));
        }
        assert!(Poly::ratio_series(&p(&[0, 0, 1]), &p(&[1, 1]), 4).is_err());
        assert!(Poly::ratio_series(&Poly::zero(), &p(&[1, 1]), 4).unwrap().is_zero());
    }
}
