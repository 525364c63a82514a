//! Closed-form recurrence coefficients of the two root families.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const POLE_TOL: f64 = 1e-15;

fn nonzero<S: Scalar>(d: S, n: usize) -> Result<S> {
    if d.vanishes(POLE_TOL) {
        Err(Error::PoleInCoefficient { n })
    } else {
        Ok(d)
    }
}

/// Askey–Wilson `(β_n, γ_n)`; the parameters are permuted so that `a ≠ 0`.
pub(crate) fn askey_wilson<S: Scalar>(params: &[S], q: &S, n: usize) -> Result<(S, S)> {
    let mut p = params.to_vec();
    let lead = p
        .iter()
        .position(|x| !x.is_zero())
        .ok_or_else(|| Error::InvalidArgument("all Askey-Wilson parameters vanish".into()))?;
    p.swap(0, lead);
    let (a, b, c, d) = (&p[0], &p[1], &p[2], &p[3]);
    let one = S::one;
    let abcd = a.clone() * b.clone() * c.clone() * d.clone();
    let big_a = |m: usize| -> Result<S> {
        let qm = q.ipow(m as i64);
        let num = (one() - a.clone() * b.clone() * qm.clone())
            * (one() - a.clone() * c.clone() * qm.clone())
            * (one() - a.clone() * d.clone() * qm.clone());
        if m == 0 {
            let den = nonzero(a.clone() * (one() - abcd.clone()), m)?;
            return Ok(num / den);
        }
        let num = num * (one() - abcd.clone() * q.ipow(m as i64 - 1));
        let den = a.clone()
            * (one() - abcd.clone() * q.ipow(2 * m as i64 - 1))
            * (one() - abcd.clone() * q.ipow(2 * m as i64));
        Ok(num / nonzero(den, m)?)
    };
    let big_c = |m: usize| -> Result<S> {
        if m == 0 {
            return Ok(S::zero());
        }
        let qm1 = q.ipow(m as i64 - 1);
        let num = a.clone()
            * (one() - q.ipow(m as i64))
            * (one() - b.clone() * c.clone() * qm1.clone())
            * (one() - b.clone() * d.clone() * qm1.clone())
            * (one() - c.clone() * d.clone() * qm1);
        let den = (one() - abcd.clone() * q.ipow(2 * m as i64 - 2)) * (one() - abcd.clone() * q.ipow(2 * m as i64 - 1));
        Ok(num / nonzero(den, m)?)
    };
    let two = S::from_int(2);
    let an = big_a(n)?;
    let cn = big_c(n)?;
    let beta = (a.clone() + one() / a.clone() - an - cn.clone()) / two.clone();
    let gamma = if n == 0 { S::zero() } else { big_a(n - 1)? * cn / (two.clone() * two) };
    Ok((beta, gamma))
}

/// Big q-Jacobi `(β_n, γ_n)`.
pub(crate) fn big_q_jacobi<S: Scalar>(params: &[S], q: &S, n: usize) -> Result<(S, S)> {
    let (a, b, c) = (&params[0], &params[1], &params[2]);
    let one = S::one;
    let ab = a.clone() * b.clone();
    let hat_a = |m: usize| -> Result<S> {
        let q1 = q.ipow(m as i64 + 1);
        let num = (one() - a.clone() * q1.clone()) * (one() - ab.clone() * q1.clone()) * (one() - c.clone() * q1);
        let den = (one() - ab.clone() * q.ipow(2 * m as i64 + 1)) * (one() - ab.clone() * q.ipow(2 * m as i64 + 2));
        Ok(num / nonzero(den, m)?)
    };
    let hat_c = |m: usize| -> Result<S> {
        if m == 0 {
            return Ok(S::zero());
        }
        let qm = q.ipow(m as i64);
        let num = -(a.clone() * q.ipow(m as i64 + 1))
            * (one() - qm.clone())
            * (c.clone() - ab.clone() * qm.clone())
            * (one() - b.clone() * qm);
        let den = (one() - ab.clone() * q.ipow(2 * m as i64)) * (one() - ab.clone() * q.ipow(2 * m as i64 + 1));
        Ok(num / nonzero(den, m)?)
    };
    let an = hat_a(n)?;
    let cn = hat_c(n)?;
    let beta = one() - an - cn.clone();
    let gamma = if n == 0 { S::zero() } else { hat_a(n - 1)? * cn };
    Ok((beta, gamma))
}
