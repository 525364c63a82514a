//! Complex scalars shared by the exact and floating code paths.
//!
//! The algebraic parts of the crate (q-numbers, series, recurrences, moments)
//! are written against [`Scalar`], which is implemented for `Complex<f32>`,
//! `Complex<f64>` and `Complex<BigRational>`. Analytic parts (infinite
//! products, roots, quadrature) need a floating component type and are
//! generic over [`Real`] instead.

use std::fmt::Debug;
use std::ops::Neg;

use num_complex::Complex;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Floating component type of a complex scalar.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Default + Send + Sync + 'static {}

impl Real for f32 {}
impl Real for f64 {}

/// A complex field element.
pub trait Scalar: Clone + Debug + PartialEq + Num + Neg<Output = Self> + Send + Sync + 'static {
    /// Whether arithmetic is exact.
    const EXACT: bool;

    fn from_parts(re: f64, im: f64) -> Self;

    fn to_c64(&self) -> Complex<f64>;

    /// Principal square root. Exact scalars return `None` unless the value is a
    /// perfect square.
    fn try_sqrt(&self) -> Option<Self>;

    /// Principal complex power `self^e`. Exact scalars only support integral `e`.
    fn try_pow(&self, e: &Self) -> Option<Self>;

    /// Principal logarithm (floating scalars only).
    fn try_ln(&self) -> Option<Self>;

    fn from_real(x: f64) -> Self {
        Self::from_parts(x, 0.0)
    }

    fn from_int(n: i64) -> Self {
        Self::from_parts(n as f64, 0.0)
    }

    fn modulus(&self) -> f64 {
        self.to_c64().norm()
    }

    /// Zero test: exact equality for exact scalars, `|x| <= tol` otherwise.
    fn vanishes(&self, tol: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.modulus() <= tol
        }
    }

    /// Integer power by repeated squaring; negative exponents invert.
    fn ipow(&self, n: i64) -> Self {
        let mut base = if n < 0 { Self::one() / self.clone() } else { self.clone() };
        let mut e = n.unsigned_abs();
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

    /// Integral value of `self` if it is (numerically) an integer.
    fn as_integer(&self) -> Option<i64> {
        let z = self.to_c64();
        let r = z.re.round();
        if z.im.abs() <= 1e-12 && (z.re - r).abs() <= 1e-12 * r.abs().max(1.0) && r.abs() < 1e15 {
            Some(r as i64)
        } else {
            None
        }
    }
}

impl<T: Real> Scalar for Complex<T> {
    const EXACT: bool = false;

    fn from_parts(re: f64, im: f64) -> Self {
        Complex::new(T::from_f64(re).unwrap_or_else(T::nan), T::from_f64(im).unwrap_or_else(T::nan))
    }

    fn to_c64(&self) -> Complex<f64> {
        Complex::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }

    fn try_sqrt(&self) -> Option<Self> {
        Some(self.sqrt())
    }

    fn try_pow(&self, e: &Self) -> Option<Self> {
        if let Some(n) = e.as_integer() {
            return Some(self.ipow(n));
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        Some(self.powc(*e))
    }

    fn try_ln(&self) -> Option<Self> {
        Some(self.ln())
    }
}

fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

fn decimal_rational(x: f64) -> BigRational {
    assert!(x.is_finite(), "non-finite value {x}");
    let text = format!("{x:e}");
    let (mantissa, exp) = text.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: BigInt = format!("{int}{frac}").parse().expect("decimal digits");
    let shift = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    if shift >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, shift as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-shift) as usize))
    }
}

impl Scalar for Complex<BigRational> {
    const EXACT: bool = true;

    /// Exact value of the shortest decimals that round-trip to the given
    /// floats, so `0.55` becomes `11/20`.
    ///
    /// # Panics
    /// On non-finite input.
    fn from_parts(re: f64, im: f64) -> Self {
        Complex::new(decimal_rational(re), decimal_rational(im))
    }

    fn from_int(n: i64) -> Self {
        Complex::new(BigRational::from_integer(n.into()), BigRational::zero())
    }

    fn to_c64(&self) -> Complex<f64> {
        Complex::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }

    fn try_sqrt(&self) -> Option<Self> {
        let (a, b) = (&self.re, &self.im);
        if b.is_zero() {
            return if a.is_negative() {
                rational_sqrt(&-a.clone()).map(|s| Complex::new(BigRational::zero(), s))
            } else {
                rational_sqrt(a).map(|s| Complex::new(s, BigRational::zero()))
            };
        }
        let m = rational_sqrt(&(a * a + b * b))?;
        let two = BigRational::from_integer(2.into());
        let x = rational_sqrt(&((a + &m) / &two))?;
        if x.is_zero() {
            return None;
        }
        let y = b / (&two * &x);
        Some(Complex::new(x, y))
    }

    fn try_pow(&self, e: &Self) -> Option<Self> {
        if !e.im.is_zero() || !e.re.is_integer() {
            return None;
        }
        e.re.to_integer().to_i64().map(|n| self.ipow(n))
    }

    fn try_ln(&self) -> Option<Self> {
        None
    }

    fn as_integer(&self) -> Option<i64> {
        if self.im.is_zero() && self.re.is_integer() {
            self.re.to_integer().to_i64()
        } else {
            None
        }
    }
}

/// Single-precision complex scalar.
pub type C32 = Complex<f32>;
/// Double-precision complex scalar.
pub type C64 = Complex<f64>;
/// Exact complex rational scalar.
pub type CExact = Complex<BigRational>;

/// Shorthand constructor for a double-precision complex number.
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Lossy conversion between scalar types (exact for float to rational).
pub fn convert<S: Scalar, R: Scalar>(x: &S) -> R {
    let z = x.to_c64();
    R::from_parts(z.re, z.im)
}

/// Promote a real floating value into a complex scalar over the same component.
pub fn re<T: Real>(x: f64) -> Complex<T> {
    Complex::new(T::from_f64(x).unwrap_or_else(T::nan), T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_conversion() {
        let x = CExact::from_parts(0.55, -1.25e-3);
        assert_eq!(x.re, BigRational::new(11.into(), 20.into()));
        assert_eq!(x.im, BigRational::new((-1).into(), 800.into()));
        assert_eq!(CExact::from_parts(3e5, 0.0), CExact::from_int(300000));
    }

    #[test]
    fn exact_sqrt_of_squares() {
        let x = CExact::from_parts(2.25, 0.0);
        assert_eq!(x.try_sqrt().unwrap(), CExact::from_parts(1.5, 0.0));
        let y = CExact::from_parts(-4.0, 0.0);
        assert_eq!(y.try_sqrt().unwrap(), CExact::from_parts(0.0, 2.0));
        let z = CExact::from_parts(3.0, 4.0);
        assert_eq!(z.try_sqrt().unwrap(), CExact::from_parts(2.0, 1.0));
        assert!(CExact::from_parts(2.0, 0.0).try_sqrt().is_none());
    }

    #[test]
    fn ipow_matches_repeated_product() {
        let q = c64(0.3, 0.4);
        let mut acc = c64(1.0, 0.0);
        for _ in 0..7 {
            acc *= q;
        }
        assert!((q.ipow(7) - acc).norm() < 1e-15);
        assert!((q.ipow(-2) * q * q - c64(1.0, 0.0)).norm() < 1e-14);
        let e = CExact::from_parts(0.5, 0.0);
        assert_eq!(e.ipow(-3), CExact::from_int(8));
    }

    #[test]
    fn integer_detection() {
        assert_eq!(c64(4.0, 0.0).as_integer(), Some(4));
        assert_eq!(c64(4.5, 0.0).as_integer(), None);
        assert_eq!(CExact::from_int(-3).as_integer(), Some(-3));
        assert_eq!(CExact::from_parts(0.5, 0.0).as_integer(), None);
    }
}
