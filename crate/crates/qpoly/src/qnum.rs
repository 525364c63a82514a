//! q-Pochhammer symbols, q-numbers and terminating basic hypergeometric series.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

/// Hard cap on the number of factors in an infinite product.
pub const MAX_FACTORS: usize = 10_000;

/// `(a;q)_n = ∏_{k<n} (1 - a q^k)`.
pub fn qpochhammer<S: Scalar>(a: &S, q: &S, n: usize) -> S {
    let mut acc = S::one();
    let mut t = a.clone();
    for _ in 0..n {
        acc = acc * (S::one() - t.clone());
        t = t * q.clone();
    }
    acc
}

/// Value of a truncated infinite product with the number of factors used.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncated<T> {
    pub value: Complex<T>,
    pub terms: usize,
}

/// `(a;q)_∞`, truncated once `|a q^k| < tol`.
pub fn qpochhammer_inf<T: Real>(a: Complex<T>, q: Complex<T>, tol: f64) -> Result<Truncated<T>> {
    let qa = q.norm().to_f64().unwrap_or(f64::NAN);
    if !(qa < 1.0) {
        return Err(Error::BaseOutOfDisk(qa));
    }
    let tol = T::from_f64(tol).unwrap_or_else(T::epsilon);
    let one = Complex::new(T::one(), T::zero());
    let mut acc = one;
    let mut t = a;
    for k in 0..=MAX_FACTORS {
        if t.norm() < tol {
            return Ok(Truncated { value: acc, terms: k });
        }
        acc = acc * (one - t);
        t = t * q;
    }
    Err(Error::NonConvergence { what: "infinite q-Pochhammer product", iterations: MAX_FACTORS })
}

/// Product of several infinite Pochhammers sharing a base.
pub fn qpochhammer_inf_prod<T: Real>(args: &[Complex<T>], q: Complex<T>, tol: f64) -> Result<Complex<T>> {
    let mut acc = Complex::new(T::one(), T::zero());
    for a in args {
        acc = acc * qpochhammer_inf(*a, q, tol)?.value;
    }
    Ok(acc)
}

/// `[n]_q = (1 - q^n)/(1 - q)`.
pub fn qnumber<S: Scalar>(n: i64, q: &S) -> Result<S> {
    if (q.clone() - S::one()).is_zero() {
        return Err(Error::DegenerateBase);
    }
    Ok((S::one() - q.ipow(n)) / (S::one() - q.clone()))
}

/// `d/da (a;q)_n` by the product rule, valid when a factor vanishes.
pub fn qpochhammer_param_derivative<S: Scalar>(a: &S, q: &S, n: usize) -> S {
    let factors: Vec<S> = (0..n).map(|m| S::one() - a.clone() * q.ipow(m as i64)).collect();
    let mut total = S::zero();
    for k in 0..n {
        let mut term = -q.ipow(k as i64);
        for (m, f) in factors.iter().enumerate() {
            if m != k {
                term = term * f.clone();
            }
        }
        total = total + term;
    }
    total
}

/// A numerator slot of a basic hypergeometric series.
#[derive(Clone, Debug, PartialEq)]
pub enum SeriesParam<S> {
    /// A single parameter `a`, contributing `(a;q)_k`.
    Single(S),
    /// Two parameters `u, v` given through `u + v` and `u v`; contributes
    /// `(u;q)_k (v;q)_k = ∏_{j<k} (1 - (u+v) q^j + u v q^{2j})`.
    Pair { sum: S, product: S },
}

impl<S> SeriesParam<S> {
    fn slots(&self) -> i64 {
        match self {
            SeriesParam::Single(_) => 1,
            SeriesParam::Pair { .. } => 2,
        }
    }
}

/// Multiply the series termwise by `(b;q)_length` where `b` is the indicated
/// denominator, so a denominator of the form `q^{-j}` (`j < n`) yields finite
/// terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Regularization {
    pub denominator: usize,
    pub length: usize,
}

/// A terminating series `_rφ_s(q^{-n}, a_1, ...; b_1, ... | q; z)`.
///
/// `numerators` lists the parameters after the implicit leading `q^{-n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesSpec<S> {
    pub numerators: Vec<SeriesParam<S>>,
    pub denominators: Vec<S>,
    pub q: S,
    pub argument: S,
    pub degree: usize,
    pub regularize: Option<Regularization>,
}

impl<S: Scalar> SeriesSpec<S> {
    pub fn new(numerators: Vec<SeriesParam<S>>, denominators: Vec<S>, q: S, argument: S, degree: usize) -> Self {
        SeriesSpec { numerators, denominators, q, argument, degree, regularize: None }
    }

    /// Number of numerator parameters, including `q^{-n}`.
    pub fn r(&self) -> i64 {
        1 + self.numerators.iter().map(SeriesParam::slots).sum::<i64>()
    }

    pub fn s(&self) -> i64 {
        self.denominators.len() as i64
    }

    /// Flag the first denominator equal to `q^{-j}` with `j < degree`.
    pub fn with_auto_regularization(mut self, tol: f64) -> Self {
        self.regularize = find_regularization(&self.denominators, &self.q, self.degree, tol)
            .map(|denominator| Regularization { denominator, length: self.degree });
        self
    }
}

/// Index of the first denominator `b` with `b q^j = 1` for some `j < n`.
pub fn find_regularization<S: Scalar>(denominators: &[S], q: &S, n: usize, tol: f64) -> Option<usize> {
    denominators.iter().position(|b| {
        let mut t = b.clone();
        for _ in 0..n {
            if (S::one() - t.clone()).vanishes(tol) {
                return true;
            }
            t = t * q.clone();
        }
        false
    })
}

const DENOMINATOR_TOL: f64 = 1e-13;

/// Sum a terminating basic hypergeometric series in ascending order.
pub fn phi_terminating<S: Scalar>(spec: &SeriesSpec<S>) -> Result<S> {
    let n = spec.degree;
    let q = &spec.q;
    let q_minus_n = q.ipow(-(n as i64));
    let excess = 1 + spec.s() - spec.r();
    let reg = spec.regularize;
    let mut coeff = S::one();
    let mut zk = S::one();
    let mut qj = S::one();
    let mut sum = S::zero();
    for k in 0..=n {
        if k > 0 {
            let mut f = S::one() - q_minus_n.clone() * qj.clone();
            for p in &spec.numerators {
                f = f * match p {
                    SeriesParam::Single(a) => S::one() - a.clone() * qj.clone(),
                    SeriesParam::Pair { sum, product } => {
                        S::one() - sum.clone() * qj.clone() + product.clone() * qj.clone() * qj.clone()
                    }
                };
            }
            let qk = qj.clone() * q.clone();
            let mut d = S::one() - qk.clone();
            for (i, b) in spec.denominators.iter().enumerate() {
                if reg.is_some_and(|r| r.denominator == i) {
                    continue;
                }
                d = d * (S::one() - b.clone() * qj.clone());
            }
            if d.vanishes(DENOMINATOR_TOL) {
                return Err(Error::DegenerateDenominator { k });
            }
            coeff = coeff * f / d;
            zk = zk * spec.argument.clone();
            qj = qk;
        }
        if coeff.is_zero() {
            continue;
        }
        let mut term = coeff.clone() * zk.clone();
        if let Some(r) = reg {
            term = term * regularizing_ratio(&spec.denominators[r.denominator], q, r.length, k)?;
        }
        if excess != 0 {
            let sign = if k % 2 == 1 { -S::one() } else { S::one() };
            let base = sign * q.ipow((k * k.saturating_sub(1) / 2) as i64);
            term = term * base.ipow(excess);
        }
        sum = sum + term;
    }
    Ok(sum)
}

/// `(b;q)_len / (b;q)_k`, computed without forming either product.
fn regularizing_ratio<S: Scalar>(b: &S, q: &S, len: usize, k: usize) -> Result<S> {
    let mut acc = S::one();
    if k <= len {
        for m in k..len {
            acc = acc * (S::one() - b.clone() * q.ipow(m as i64));
        }
    } else {
        for m in len..k {
            let f = S::one() - b.clone() * q.ipow(m as i64);
            if f.vanishes(DENOMINATOR_TOL) {
                return Err(Error::DegenerateDenominator { k });
            }
            acc = acc / f;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{c64, CExact, C64};
    use proptest::prelude::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn pochhammer_examples() {
        let q = c64(0.5, 0.0);
        assert_eq!(qpochhammer(&c64(0.7, 0.0), &q, 0), c64(1.0, 0.0));
        assert_eq!(qpochhammer(&c64(1.0, 0.0), &q, 3), c64(0.0, 0.0));
        assert_eq!(qpochhammer(&c64(0.5, 0.0), &q, 2), c64(0.375, 0.0));
    }

    #[test]
    fn infinite_product_examples() {
        let q = c64(0.3, 0.0);
        assert_eq!(qpochhammer_inf(c64(0.0, 0.0), q, 1e-14).unwrap().value, c64(1.0, 0.0));
        let q4 = c64(0.4, 0.0);
        let v = qpochhammer_inf(q4.ipow(-2), q4, 1e-14).unwrap().value;
        assert!(v.norm() < 1e-15);
        // partial products stagnate at the truncated value
        let half = c64(0.5, 0.0);
        let full = qpochhammer_inf(half, half, 1e-14).unwrap();
        let partial = qpochhammer(&half, &half, 200);
        assert!(close(full.value, partial, 1e-14));
        assert!(full.terms >= 45);
        assert_eq!(qpochhammer_inf(half, c64(1.0, 0.0), 1e-14), Err(Error::BaseOutOfDisk(1.0)));
    }

    #[test]
    fn qnumber_examples() {
        assert_eq!(qnumber(1, &c64(0.5, 0.0)).unwrap(), c64(1.0, 0.0));
        assert_eq!(qnumber(2, &c64(0.5, 0.0)).unwrap(), c64(1.5, 0.0));
        assert!(close(qnumber(3, &c64(0.0, 1.0)).unwrap(), c64(0.0, 1.0), 1e-15));
        assert_eq!(qnumber(2, &c64(1.0, 0.0)), Err(Error::DegenerateBase));
    }

    #[test]
    fn derivative_examples() {
        let q = c64(0.5, 0.0);
        let a = c64(0.5, 0.0);
        assert_eq!(qpochhammer_param_derivative(&a, &q, 0), c64(0.0, 0.0));
        assert_eq!(qpochhammer_param_derivative(&a, &q, 1), c64(-1.0, 0.0));
        assert_eq!(qpochhammer_param_derivative(&a, &q, 2), c64(-1.0, 0.0));
    }

    #[test]
    fn series_examples() {
        let q = c64(0.5, 0.0);
        let s0 = SeriesSpec::new(vec![SeriesParam::Single(c64(0.3, 0.0))], vec![c64(0.2, 0.0)], q, c64(0.7, 0.0), 0);
        assert_eq!(phi_terminating(&s0).unwrap(), c64(1.0, 0.0));
        // 1φ0 with n=1, z=0.25 carries the unbalancing factor (-1)^k q^{C(k,2)} to power 0
        let s1 = SeriesSpec::new(vec![], vec![], q, c64(0.25, 0.0), 1);
        // r=1, s=0: excess 0 -> 1 + (1 - q^{-1})/(1 - q) z
        assert!(close(phi_terminating(&s1).unwrap(), c64(0.5, 0.0), 1e-15));
    }

    #[test]
    fn unbalanced_series_factor() {
        // 2φ0(q^{-1}, a; -; q, z) = 1 + (1-q^{-1})(1-a)/(1-q) * z * (-1)^1 q^0
        let q = c64(0.5, 0.0);
        let a = c64(0.3, 0.0);
        let z = c64(0.7, 0.0);
        let s = SeriesSpec::new(vec![SeriesParam::Single(a)], vec![], q, z, 1);
        let expect = c64(1.0, 0.0) - (c64(1.0, 0.0) - c64(2.0, 0.0)) * (c64(1.0, 0.0) - a) / (c64(1.0, 0.0) - q) * z;
        assert!(close(phi_terminating(&s).unwrap(), expect, 1e-15));
    }

    #[test]
    fn pair_parameter_equals_two_singles() {
        let q = c64(0.45, 0.0);
        let (u, v) = (c64(0.3, 0.2), c64(-0.6, 0.1));
        let pair = SeriesSpec::new(
            vec![SeriesParam::Pair { sum: u + v, product: u * v }],
            vec![c64(0.2, 0.0), c64(-0.1, 0.0)],
            q,
            q,
            5,
        );
        let singles = SeriesSpec::new(
            vec![SeriesParam::Single(u), SeriesParam::Single(v)],
            vec![c64(0.2, 0.0), c64(-0.1, 0.0)],
            q,
            q,
            5,
        );
        let (x, y) = (phi_terminating(&pair).unwrap(), phi_terminating(&singles).unwrap());
        assert!(close(x, y, 1e-10), "{x} {y}");
    }

    #[test]
    fn degenerate_denominator_is_reported() {
        let q = CExact::from_parts(0.5, 0.0);
        let b = q.ipow(-1);
        let s = SeriesSpec::new(vec![], vec![b], q, CExact::from_int(1), 3);
        assert_eq!(phi_terminating(&s), Err(Error::DegenerateDenominator { k: 2 }));
        let reg = s.clone().with_auto_regularization(0.0);
        assert_eq!(reg.regularize, Some(Regularization { denominator: 0, length: 3 }));
        assert!(phi_terminating(&reg).is_ok());
    }

    fn small() -> impl Strategy<Value = f64> {
        -0.9f64..0.9
    }

    proptest! {
        #[test]
        fn pochhammer_splits(ar in small(), ai in small(), qr in small(), qi in small(), n in 0usize..8, m in 0usize..8) {
            let a = c64(ar, ai);
            let q = c64(qr, qi);
            let lhs = qpochhammer(&a, &q, n + m);
            let rhs = qpochhammer(&a, &q, n) * qpochhammer(&(a * q.ipow(n as i64)), &q, m);
            prop_assert!(close(lhs, rhs, 1e-12));
        }

        #[test]
        fn pochhammer_reversal(ar in 0.2f64..2.0, ai in small(), qr in 0.3f64..0.9, s in 0usize..7) {
            let a = c64(ar, ai);
            let q = c64(qr, 0.0);
            let lhs = qpochhammer(&a, &q, s);
            let rev = qpochhammer(&(a.inv() * q.ipow(1 - s as i64)), &q, s)
                * (-a).ipow(s as i64)
                * q.ipow((s * s.saturating_sub(1) / 2) as i64);
            prop_assert!(close(lhs, rev, 1e-10));
        }

        #[test]
        fn derivative_matches_finite_difference(ar in small(), qr in 0.2f64..0.9, n in 1usize..7) {
            let a = c64(ar, 0.0);
            let q = c64(qr, 0.0);
            let h = c64(1e-6, 0.0);
            let fd = (qpochhammer(&(a + h), &q, n) - qpochhammer(&(a - h), &q, n)) / (h * 2.0);
            let d = qpochhammer_param_derivative(&a, &q, n);
            prop_assume!(qpochhammer(&a, &q, n).norm() > 1e-6);
            prop_assert!((fd - d).norm() <= 1e-6 * d.norm().max(1.0));
        }

        #[test]
        fn degree_one_series_is_pochhammer_ratio(ar in small(), br in small(), qr in 0.2f64..0.9, zr in small()) {
            let (a, b, q, z) = (c64(ar, 0.0), c64(br, 0.1), c64(qr, 0.0), c64(zr, 0.0));
            let s = SeriesSpec::new(vec![SeriesParam::Single(a)], vec![b], q, z, 1);
            let expect = c64(1.0, 0.0) + (c64(1.0, 0.0) - q.inv()) * (c64(1.0, 0.0) - a) / ((c64(1.0, 0.0) - q) * (c64(1.0, 0.0) - b)) * z;
            prop_assert!(close(phi_terminating(&s).unwrap(), expect, 1e-12));
        }
    }
}
