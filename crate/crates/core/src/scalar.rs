//! Scalar abstraction shared by every numeric module.
//!
//! All of the series, polynomial and matrix code is written against
//! [`Scalar`], so the same routines run on exact rationals (real or complex)
//! and on machine floats. The exact backends are what the contact-order and
//! residual checks rely on; floats carry the Monte Carlo work.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

/// Exact rational scalar.
pub type Rational = BigRational;
/// Exact complex scalar: a pair of rationals.
pub type ExactComplex = Complex<BigRational>;
/// Double precision complex scalar.
pub type C64 = Complex<f64>;

pub trait Scalar: Num + Neg<Output = Self> + Clone + Debug + PartialEq + Send + Sync + 'static {
    /// `true` for backends where arithmetic never rounds.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    fn from_bigint(v: &BigInt) -> Self;

    /// Lossless conversion from an exact complex value, when representable.
    /// Real backends return `None` for a nonzero imaginary part.
    fn from_exact(v: &ExactComplex) -> Option<Self>;

    /// Conversion from a real double. Exact backends convert the binary value exactly.
    fn from_f64(v: f64) -> Self;

    fn to_c64(&self) -> C64;

    /// Modulus as a double, used for pivoting and tolerances.
    fn modulus(&self) -> f64 {
        self.to_c64().norm()
    }

    fn pow_u(&self, mut e: usize) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Ratio of huge integers: fall back on scaled division.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

fn rational_from_f64(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite value")
}

macro_rules! impl_real_float {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_i64(v: i64) -> Self {
                v as $t
            }

            fn from_bigint(v: &BigInt) -> Self {
                v.to_f64().unwrap_or(f64::INFINITY) as $t
            }

            fn from_exact(v: &ExactComplex) -> Option<Self> {
                if !v.im.is_zero() {
                    return None;
                }
                Some(rational_to_f64(&v.re) as $t)
            }

            fn from_f64(v: f64) -> Self {
                v as $t
            }

            fn to_c64(&self) -> C64 {
                C64::new(*self as f64, 0.0)
            }

            fn modulus(&self) -> f64 {
                (*self as f64).abs()
            }
        }
    };
}

impl_real_float!(f32);
impl_real_float!(f64);

macro_rules! impl_complex_float {
    ($t:ty) => {
        impl Scalar for Complex<$t> {
            const EXACT: bool = false;

            fn from_i64(v: i64) -> Self {
                Complex::new(v as $t, 0.0)
            }

            fn from_bigint(v: &BigInt) -> Self {
                Complex::new(v.to_f64().unwrap_or(f64::INFINITY) as $t, 0.0)
            }

            fn from_exact(v: &ExactComplex) -> Option<Self> {
                Some(Complex::new(
                    rational_to_f64(&v.re) as $t,
                    rational_to_f64(&v.im) as $t,
                ))
            }

            fn from_f64(v: f64) -> Self {
                Complex::new(v as $t, 0.0)
            }

            fn to_c64(&self) -> C64 {
                C64::new(self.re as f64, self.im as f64)
            }
        }
    };
}

impl_complex_float!(f32);
impl_complex_float!(f64);

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_bigint(v: &BigInt) -> Self {
        BigRational::from_integer(v.clone())
    }

    fn from_exact(v: &ExactComplex) -> Option<Self> {
        v.im.is_zero().then(|| v.re.clone())
    }

    fn from_f64(v: f64) -> Self {
        rational_from_f64(v)
    }

    fn to_c64(&self) -> C64 {
        C64::new(rational_to_f64(self), 0.0)
    }

    fn modulus(&self) -> f64 {
        rational_to_f64(&self.abs())
    }
}

impl Scalar for ExactComplex {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        Complex::new(BigRational::from_i64(v), BigRational::zero())
    }

    fn from_bigint(v: &BigInt) -> Self {
        Complex::new(BigRational::from_integer(v.clone()), BigRational::zero())
    }

    fn from_exact(v: &ExactComplex) -> Option<Self> {
        Some(v.clone())
    }

    fn from_f64(v: f64) -> Self {
        Complex::new(rational_from_f64(v), BigRational::zero())
    }

    fn to_c64(&self) -> C64 {
        C64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
}

/// `true` when `v` is zero on an exact backend, or within `tol` in modulus otherwise.
pub fn is_negligible<S: Scalar>(v: &S, tol: f64) -> bool {
    if S::EXACT {
        v.is_zero()
    } else {
        v.modulus() <= tol
    }
}

/// Exact complex value from a real rational.
pub fn exact_real(r: BigRational) -> ExactComplex {
    Complex::new(r, BigRational::zero())
}

/// Exact modulus bound: `sqrt(re^2 + im^2)` rounded to a double.
pub fn exact_modulus(v: &ExactComplex) -> f64 {
    let re = rational_to_f64(&v.re);
    let im = rational_to_f64(&v.im);
    re.hypot(im)
}

#[allow(dead_code)]
pub(crate) fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
