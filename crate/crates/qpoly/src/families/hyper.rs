//! Basic hypergeometric representations and their monic normalization.

use super::{EvalOnlyFamily, FamilyId, FamilyInstance, OMEGA_TOL};
use crate::error::{Error, Result};
use crate::poly::{chebyshev_nodes, MonicPoly, Poly};
use crate::qnum::{phi_terminating, SeriesParam, SeriesSpec};
use crate::scalar::Scalar;

/// Interval `(lo, hi)` holding the interpolation nodes of the monic
/// normalization.
pub const REFERENCE_INTERVAL: (f64, f64) = (-0.95, 1.05);

/// Relative size of the degree `n+1` coefficient tolerated by the guard.
const GUARD_TOL: f64 = 1e-6;

fn single<S>(a: S) -> SeriesParam<S> {
    SeriesParam::Single(a)
}

impl<S: Scalar> FamilyInstance<S> {
    /// Parameters with the first nonzero entry moved to the front.
    fn leading_nonzero(&self) -> Result<Vec<S>> {
        let mut p = self.params.clone();
        let lead = p
            .iter()
            .position(|x| !x.is_zero())
            .ok_or_else(|| Error::InvalidArgument("all parameters vanish".into()))?;
        p.swap(0, lead);
        Ok(p)
    }

    /// The unnormalized series of degree `n` at `x`.
    pub fn series_spec(&self, n: usize, x: &S) -> Result<SeriesSpec<S>> {
        use EvalOnlyFamily as E;
        use FamilyId as F;
        let q = self.q.clone();
        let p = &self.params;
        let one = S::one;
        let zero = S::zero;
        let two = S::from_int(2);
        let qn = q.ipow(n as i64);
        let q_n1 = qn.clone() * q.clone();
        let x = x.clone();
        let (num, den, arg) = match self.id {
            F::AskeyWilson => {
                let p = self.leading_nonzero()?;
                let (a, b, c, d) = (&p[0], &p[1], &p[2], &p[3]);
                let abcd = a.clone() * b.clone() * c.clone() * d.clone();
                (
                    vec![
                        single(abcd * qn / q.clone()),
                        SeriesParam::Pair { sum: two * a.clone() * x, product: a.clone() * a.clone() },
                    ],
                    vec![a.clone() * b.clone(), a.clone() * c.clone(), a.clone() * d.clone()],
                    q.clone(),
                )
            }
            F::QRacah => {
                let (al, be, ga, de) = (&p[0], &p[1], &p[2], &p[3]);
                (
                    vec![
                        single(al.clone() * be.clone() * q_n1),
                        SeriesParam::Pair { sum: x, product: ga.clone() * de.clone() * q.clone() },
                    ],
                    vec![al.clone() * q.clone(), be.clone() * de.clone() * q.clone(), ga.clone() * q.clone()],
                    q.clone(),
                )
            }
            F::BigQJacobi => (
                vec![single(p[0].clone() * p[1].clone() * q_n1), single(x)],
                vec![p[0].clone() * q.clone(), p[2].clone() * q.clone()],
                q.clone(),
            ),
            F::QHahn => (
                vec![single(p[0].clone() * p[1].clone() * q_n1), single(x)],
                vec![p[0].clone() * q.clone(), self.qpow(&-p[2].clone())?],
                q.clone(),
            ),
            F::DualQHahn => (
                vec![SeriesParam::Pair { sum: x, product: p[0].clone() * p[1].clone() * q.clone() }],
                vec![p[0].clone() * q.clone(), self.qpow(&-p[2].clone())?],
                q.clone(),
            ),
            F::ContinuousDualQHahn => {
                let p = self.leading_nonzero()?;
                (
                    vec![SeriesParam::Pair { sum: two * p[0].clone() * x, product: p[0].clone() * p[0].clone() }],
                    vec![p[0].clone() * p[1].clone(), p[0].clone() * p[2].clone()],
                    q.clone(),
                )
            }
            F::BigQLaguerre => (
                vec![single(zero()), single(x)],
                vec![p[0].clone() * q.clone(), p[1].clone() * q.clone()],
                q.clone(),
            ),
            F::LittleQJacobi => (
                vec![single(p[0].clone() * p[1].clone() * q_n1)],
                vec![p[0].clone() * q.clone()],
                q.clone() * x,
            ),
            F::QMeixner => (vec![single(x)], vec![p[0].clone() * q.clone()], -q_n1 / p[1].clone()),
            F::QuantumQKrawtchouk => {
                (vec![single(x)], vec![self.qpow(&-p[1].clone())?], p[0].clone() * q_n1)
            }
            F::AffineQKrawtchouk => (
                vec![single(zero()), single(x)],
                vec![p[0].clone() * q.clone(), self.qpow(&-p[1].clone())?],
                q.clone(),
            ),
            F::QKrawtchouk => (
                vec![single(x), single(-p[0].clone() * qn)],
                vec![self.qpow(&-p[1].clone())?, zero()],
                q.clone(),
            ),
            F::DualQKrawtchouk => {
                let qmn = self.qpow(&-p[1].clone())?;
                (
                    vec![SeriesParam::Pair { sum: x, product: p[0].clone() * qmn.clone() }],
                    vec![qmn, zero()],
                    q.clone(),
                )
            }
            F::EvalOnly(E::ZeroJacobiBessel) => {
                (vec![single(p[0].clone() * qn)], vec![], x / (p[0].clone() * p[1].clone()))
            }
            F::EvalOnly(E::ZeroLaguerreBessel) => (vec![single(zero())], vec![], x / p[0].clone()),
            F::EvalOnly(E::LittleQLaguerre) => (vec![single(zero())], vec![p[0].clone() * q.clone()], q.clone() * x),
            F::EvalOnly(E::QLaguerre) => {
                (vec![single(-x)], vec![zero()], q_n1 * self.qpow(&p[0])?)
            }
            F::EvalOnly(E::AltQCharlier) => (vec![single(-p[0].clone() * qn)], vec![zero()], q.clone() * x),
            F::EvalOnly(E::QCharlier) => (vec![single(x)], vec![zero()], -q_n1 / p[0].clone()),
            F::EvalOnly(E::AlSalamCarlitzI) => {
                if x.is_zero() {
                    return Err(Error::InvalidArgument("the series form needs x != 0".into()));
                }
                (vec![single(one() / x.clone())], vec![zero()], q.clone() * x / p[0].clone())
            }
            F::EvalOnly(E::AlSalamCarlitzII) => (vec![single(x)], vec![], qn / p[0].clone()),
            F::EvalOnly(E::StieltjesWigert) => (vec![], vec![zero()], -q_n1 * x),
        };
        Ok(SeriesSpec::new(num, den, q, arg, n).with_auto_regularization(OMEGA_TOL))
    }

    /// Unnormalized series value of degree `n` at `x`.
    pub fn series_at(&self, n: usize, x: &S) -> Result<S> {
        phi_terminating(&self.series_spec(n, x)?)
    }

    /// Series as a polynomial of formal degree `n` (not normalized).
    ///
    /// Interpolates at `n + 2` nodes; the extra node must leave a negligible
    /// degree `n + 1` coefficient.
    pub fn series_poly(&self, n: usize) -> Result<Poly<S>> {
        let (lo, hi) = REFERENCE_INTERVAL;
        let nodes = chebyshev_nodes::<S>(n + 2, 0.5 * (lo + hi), 0.5 * (hi - lo));
        let values = nodes.iter().map(|x| self.series_at(n, x)).collect::<Result<Vec<_>>>()?;
        let full = Poly::interpolate(&nodes, &values);
        let scale = full.max_abs_coeff();
        let extra = full.coeff(n + 1);
        if !extra.vanishes(GUARD_TOL * scale) {
            return Err(Error::NotPolynomialOutput { mismatch: extra.modulus() / scale.max(f64::MIN_POSITIVE) });
        }
        let mut c = full.into_coeffs();
        c.truncate(n + 1);
        Ok(Poly::new(c))
    }

    /// Monic polynomial of the hypergeometric representation.
    pub fn hyper_poly(&self, n: usize) -> Result<MonicPoly<S>> {
        let p = self.series_poly(n)?;
        if p.leading().vanishes(1e-14 * p.max_abs_coeff()) {
            return Err(Error::InvalidArgument(format!("series of degree {n} has no x^{n} term")));
        }
        MonicPoly::from_poly(p)
    }

    /// Monic value `p_n(x)` from the series, normalized by its leading
    /// coefficient.
    pub fn hyper_eval(&self, n: usize, x: &S) -> Result<S> {
        if n == 0 {
            return Ok(S::one());
        }
        let lead = self.series_poly(n)?.leading().clone();
        match self.series_at(n, x) {
            Ok(v) => Ok(v / lead),
            Err(Error::InvalidArgument(_)) => Ok(self.hyper_poly(n)?.eval(x)),
            Err(e) => Err(e),
        }
    }
}

/// Both solutions of `z + 1/z = 2x`, the one with `|z| >= 1` first.
pub fn aw_z_roots<S: Scalar>(x: &S) -> Result<(S, S)> {
    let disc = (x.clone() * x.clone() - S::one())
        .try_sqrt()
        .ok_or(Error::RequiresFloat("square root of x^2 - 1"))?;
    let z = x.clone() + disc;
    let w = S::one() / z.clone();
    if z.modulus() >= 1.0 {
        Ok((z, w))
    } else {
        Ok((w, z))
    }
}

impl<S: Scalar> FamilyInstance<S> {
    /// Askey–Wilson series evaluated through `z` with `x = (z + 1/z)/2`, once
    /// for each root; both values must agree.
    pub fn aw_series_via_z(&self, n: usize, x: &S) -> Result<(S, S)> {
        if self.id != FamilyId::AskeyWilson {
            return Err(Error::InvalidArgument("z-form series is defined for Askey-Wilson only".into()));
        }
        let p = self.leading_nonzero()?;
        let (a, b, c, d) = (&p[0], &p[1], &p[2], &p[3]);
        let abcd = a.clone() * b.clone() * c.clone() * d.clone();
        let q = self.q.clone();
        let (z1, z2) = aw_z_roots(x)?;
        let eval = |z: S| {
            let spec = SeriesSpec::new(
                vec![
                    single(abcd.clone() * q.ipow(n as i64 - 1)),
                    single(a.clone() * z.clone()),
                    single(a.clone() / z),
                ],
                vec![a.clone() * b.clone(), a.clone() * c.clone(), a.clone() * d.clone()],
                q.clone(),
                q.clone(),
                n,
            )
            .with_auto_regularization(OMEGA_TOL);
            phi_terminating(&spec)
        };
        Ok((eval(z1)?, eval(z2)?))
    }
}
