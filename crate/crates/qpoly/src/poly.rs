//! Dense polynomials in the monomial basis.

use std::ops::{Add, Deref, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Polynomial with ascending monomial coefficients.
///
/// The formal degree is `coeffs.len() - 1`; trailing zeros are kept unless
/// [`Poly::trim`] is called, so degree bookkeeping stays explicit.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> Poly<S> {
    pub fn new(mut coeffs: Vec<S>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(S::zero());
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly::new(vec![S::zero()])
    }

    pub fn constant(c: S) -> Self {
        Poly::new(vec![c])
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        Poly::new(vec![S::zero(), S::one()])
    }

    pub fn monomial(k: usize) -> Self {
        let mut c = vec![S::zero(); k + 1];
        c[k] = S::one();
        Poly::new(c)
    }

    /// `∏ (x - r)` over the given roots.
    pub fn from_roots(roots: &[S]) -> Self {
        roots.iter().fold(Poly::constant(S::one()), |acc, r| {
            &acc * &Poly::new(vec![-r.clone(), S::one()])
        })
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> &S {
        self.coeffs.last().expect("nonempty")
    }

    pub fn coeff(&self, k: usize) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(S::zero)
    }

    pub fn eval(&self, x: &S) -> S {
        let mut acc = S::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * S::from_int(k as i64))
                .collect(),
        )
    }

    pub fn scale(&self, c: &S) -> Self {
        Poly::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    /// `p(u x + v)`.
    pub fn compose_affine(&self, u: &S, v: &S) -> Self {
        let lin = Poly::new(vec![v.clone(), u.clone()]);
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &lin) + &Poly::constant(c.clone());
        }
        acc.truncate_to(self.degree())
    }

    /// Drop coefficients beyond `deg` (they must be negligible).
    fn truncate_to(mut self, deg: usize) -> Self {
        self.coeffs.truncate(deg + 1);
        self
    }

    /// Remove trailing coefficients whose modulus is at most `tol` times the
    /// largest coefficient (exact zeros for exact scalars).
    pub fn trim(mut self, tol: f64) -> Self {
        let scale = self.max_abs_coeff();
        while self.coeffs.len() > 1 && self.coeffs.last().unwrap().vanishes(tol * scale) {
            self.coeffs.pop();
        }
        self
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.modulus()).fold(0.0, f64::max)
    }

    /// Polynomial of formal degree `nodes.len() - 1` through the given values
    /// (Newton divided differences).
    pub fn interpolate(nodes: &[S], values: &[S]) -> Self {
        assert_eq!(nodes.len(), values.len());
        let n = nodes.len();
        let mut dd = values.to_vec();
        for j in 1..n {
            for i in (j..n).rev() {
                dd[i] = (dd[i].clone() - dd[i - 1].clone()) / (nodes[i].clone() - nodes[i - j].clone());
            }
        }
        let mut acc = Poly::constant(dd[n - 1].clone());
        for i in (0..n - 1).rev() {
            acc = &(&acc * &Poly::new(vec![-nodes[i].clone(), S::one()])) + &Poly::constant(dd[i].clone());
        }
        acc
    }

    /// Divide by the leading coefficient.
    pub fn into_monic(self) -> Result<MonicPoly<S>> {
        MonicPoly::from_poly(self)
    }
}

impl<S: Scalar> Add for &Poly<S> {
    type Output = Poly<S>;
    fn add(self, rhs: &Poly<S>) -> Poly<S> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<S: Scalar> Sub for &Poly<S> {
    type Output = Poly<S>;
    fn sub(self, rhs: &Poly<S>) -> Poly<S> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<S: Scalar> Mul for &Poly<S> {
    type Output = Poly<S>;
    fn mul(self, rhs: &Poly<S>) -> Poly<S> {
        let mut out = vec![S::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }
}

impl<S: Scalar> Neg for &Poly<S> {
    type Output = Poly<S>;
    fn neg(self) -> Poly<S> {
        Poly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

/// Polynomial whose leading coefficient is exactly one.
#[derive(Clone, Debug, PartialEq)]
pub struct MonicPoly<S>(Poly<S>);

impl<S: Scalar> MonicPoly<S> {
    pub fn one() -> Self {
        MonicPoly(Poly::constant(S::one()))
    }

    /// Normalize a polynomial by its leading coefficient.
    pub fn from_poly(p: Poly<S>) -> Result<Self> {
        let lc = p.leading().clone();
        if lc.is_zero() {
            return Err(Error::InvalidArgument("leading coefficient is zero".into()));
        }
        let mut c: Vec<S> = p.into_coeffs().into_iter().map(|a| a / lc.clone()).collect();
        *c.last_mut().unwrap() = S::one();
        Ok(MonicPoly(Poly::new(c)))
    }

    /// Wrap coefficients whose last entry is already one.
    pub(crate) fn from_coeffs_unchecked(mut c: Vec<S>) -> Self {
        *c.last_mut().expect("nonempty") = S::one();
        MonicPoly(Poly::new(c))
    }

    pub fn as_poly(&self) -> &Poly<S> {
        &self.0
    }

    pub fn into_poly(self) -> Poly<S> {
        self.0
    }
}

impl<S> Deref for MonicPoly<S> {
    type Target = Poly<S>;
    fn deref(&self) -> &Poly<S> {
        &self.0
    }
}

/// `max_k |a_k - b_k| / max_k |b_k|` over the union of coefficient ranges.
pub fn rel_coeff_diff<S: Scalar>(a: &Poly<S>, b: &Poly<S>) -> f64 {
    let n = a.coeffs().len().max(b.coeffs().len());
    let num = (0..n).map(|k| (a.coeff(k) - b.coeff(k)).modulus()).fold(0.0, f64::max);
    let den = b.max_abs_coeff();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Chebyshev points of `[-1, 1]` mapped to `center + radius * t`.
///
/// For exact scalars the points are rounded to multiples of 1/1024 to keep
/// rational arithmetic small; interpolation is exact anyway.
pub fn chebyshev_nodes<S: Scalar>(count: usize, center: f64, radius: f64) -> Vec<S> {
    (0..count)
        .map(|k| {
            let t = (std::f64::consts::PI * (2 * k + 1) as f64 / (2 * count) as f64).cos();
            let mut x = center + radius * t;
            if S::EXACT {
                x = (x * 1024.0).round() / 1024.0;
            }
            S::from_real(x)
        })
        .collect()
}
