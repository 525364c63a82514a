//! Parameter maps between families.
//!
//! Each identity sends an instance to a target instance and an affine change
//! of variable with `p_source(x) = p_target(u x + v) / u^n` for the monic
//! polynomials.

use serde::Serialize;

use super::{FamilyId, FamilyInstance, OMEGA_HORIZON, OMEGA_TOL};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Identities between families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Identity {
    QrToAw,
    AwToQr,
    BqjToQh,
    QhToBqj,
    DqhToCdqh,
    CdqhToDqh,
    QqkToQm,
    QmToQqk,
    QqkToAqk,
    AqkToQqk,
    QkToLqj,
    LqjToQk,
    AqkToBql,
    BqlToAqk,
    LqjToBqj,
    QkToBqj,
    /// `p_n(x;a,b,c) = p_n(x;c,ab/c,a)`.
    BqjSymmetry,
    /// Big q-Jacobi with `b = q^{-N}` as a rescaled q-Hahn-type instance.
    BqjBLimit,
    AwQInverse,
    BqjQInverse,
}

const ALL: [Identity; 20] = [
    Identity::QrToAw,
    Identity::AwToQr,
    Identity::BqjToQh,
    Identity::QhToBqj,
    Identity::DqhToCdqh,
    Identity::CdqhToDqh,
    Identity::QqkToQm,
    Identity::QmToQqk,
    Identity::QqkToAqk,
    Identity::AqkToQqk,
    Identity::QkToLqj,
    Identity::LqjToQk,
    Identity::AqkToBql,
    Identity::BqlToAqk,
    Identity::LqjToBqj,
    Identity::QkToBqj,
    Identity::BqjSymmetry,
    Identity::BqjBLimit,
    Identity::AwQInverse,
    Identity::BqjQInverse,
];

impl Identity {
    pub fn all() -> &'static [Identity] {
        &ALL
    }

    pub fn source(self) -> FamilyId {
        use FamilyId as F;
        use Identity as I;
        match self {
            I::QrToAw => F::QRacah,
            I::AwToQr | I::AwQInverse => F::AskeyWilson,
            I::BqjToQh | I::BqjSymmetry | I::BqjBLimit | I::BqjQInverse => F::BigQJacobi,
            I::QhToBqj => F::QHahn,
            I::DqhToCdqh => F::DualQHahn,
            I::CdqhToDqh => F::ContinuousDualQHahn,
            I::QqkToQm | I::QqkToAqk => F::QuantumQKrawtchouk,
            I::QmToQqk => F::QMeixner,
            I::AqkToQqk | I::AqkToBql => F::AffineQKrawtchouk,
            I::QkToLqj | I::QkToBqj => F::QKrawtchouk,
            I::LqjToQk | I::LqjToBqj => F::LittleQJacobi,
            I::BqlToAqk => F::BigQLaguerre,
        }
    }

    pub fn name(self) -> String {
        format!("{self:?}")
    }
}

/// Target instance and variable change of an identity.
#[derive(Clone, Debug)]
pub struct MapResult<S> {
    pub target: FamilyInstance<S>,
    pub u: S,
    pub v: S,
    /// Branch choices and similar caveats.
    pub notes: Vec<String>,
}

/// `log_q x`: an integer when `x` is an integral power of `q` (within the
/// membership tolerance), else the principal branch with a note.
pub fn log_q<S: Scalar>(x: &S, q: &S) -> Result<(S, Option<String>)> {
    let mut up = S::one();
    let mut down = S::one();
    let qinv = S::one() / q.clone();
    for k in 0..=OMEGA_HORIZON as i64 {
        if (up.clone() - x.clone()).vanishes(OMEGA_TOL * x.modulus().max(1.0)) {
            return Ok((S::from_int(k), None));
        }
        if (down.clone() - x.clone()).vanishes(OMEGA_TOL * x.modulus().max(1.0)) {
            return Ok((S::from_int(-k), None));
        }
        up = up * q.clone();
        down = down * qinv.clone();
    }
    let lx = x.try_ln().ok_or(Error::RequiresFloat("logarithm of a non-power of q"))?;
    let lq = q.try_ln().ok_or(Error::RequiresFloat("logarithm of q"))?;
    let value = lx / lq;
    Ok((value, Some(format!("log_q uses the principal branch ({:?})", x.to_c64()))))
}

fn inapplicable<T>(identity: Identity, reason: &str) -> Result<T> {
    Err(Error::InapplicableIdentity { identity: identity.name(), reason: reason.into() })
}

/// Apply an identity to an instance.
pub fn param_map<S: Scalar>(identity: Identity, fam: &FamilyInstance<S>) -> Result<MapResult<S>> {
    use FamilyId as F;
    use Identity as I;
    if fam.id() != identity.source() {
        return inapplicable(identity, &format!("source family is {}", fam.id().tag()));
    }
    let p = fam.params();
    let q = fam.q().clone();
    let one = S::one;
    let zero = S::zero;
    let two = S::from_int(2);
    let mode = fam.q_mode();
    let mut notes = Vec::new();
    let mut note = |n: Option<String>| notes.extend(n);
    let same_q = |id: FamilyId, params: Vec<S>| FamilyInstance::build(id, params, q.clone(), mode);
    let inv_q = |id: FamilyId, params: Vec<S>| FamilyInstance::build(id, params, one() / q.clone(), mode.inverse());
    let (target, u) = match identity {
        I::QrToAw => {
            let b = fam.base_form()?;
            (FamilyInstance::build(F::AskeyWilson, b.base.params, q.clone(), mode)?, b.u)
        }
        I::AwToQr => {
            let (a, b, c, d) = (&p[0], &p[1], &p[2], &p[3]);
            if a.is_zero() || d.is_zero() {
                return inapplicable(identity, "needs a != 0 and d != 0");
            }
            let params = vec![
                a.clone() * b.clone() / q.clone(),
                c.clone() * d.clone() / q.clone(),
                a.clone() * d.clone() / q.clone(),
                a.clone() / d.clone(),
            ];
            (same_q(F::QRacah, params)?, two * a.clone())
        }
        I::BqjToQh => {
            let (l, n) = log_q(&p[2], &q)?;
            note(n);
            (same_q(F::QHahn, vec![p[0].clone(), p[1].clone(), -one() - l])?, one())
        }
        I::QhToBqj => {
            let c = fam.qpow(&(-p[2].clone() - one()))?;
            (same_q(F::BigQJacobi, vec![p[0].clone(), p[1].clone(), c])?, one())
        }
        I::DqhToCdqh => {
            let b = fam.base_form()?;
            let params = b.base.params[..3].to_vec();
            (same_q(F::ContinuousDualQHahn, params)?, b.u)
        }
        I::CdqhToDqh => {
            let (a, b, c) = (&p[0], &p[1], &p[2]);
            if a.is_zero() || b.is_zero() || c.is_zero() {
                return inapplicable(identity, "needs a, b, c != 0");
            }
            let (l, n) = log_q(&(a.clone() * c.clone()), &q)?;
            note(n);
            let params = vec![a.clone() * b.clone() / q.clone(), a.clone() / b.clone(), -l];
            (same_q(F::DualQHahn, params)?, two * a.clone())
        }
        I::QqkToQm => {
            let b = fam.qpow(&(-p[1].clone() - one()))?;
            (same_q(F::QMeixner, vec![b, -one() / p[0].clone()])?, one())
        }
        I::QmToQqk => {
            // The printed row swaps the two target arguments.
            let (l, n) = log_q(&p[0], &q)?;
            note(n);
            if p[1].is_zero() {
                return inapplicable(identity, "needs c != 0");
            }
            (same_q(F::QuantumQKrawtchouk, vec![-one() / p[1].clone(), -one() - l])?, one())
        }
        I::QqkToAqk => {
            let qn = fam.qpow(&p[1])?;
            (inv_q(F::AffineQKrawtchouk, vec![one() / p[0].clone(), p[1].clone()])?, qn)
        }
        I::AqkToQqk => {
            let qn = fam.qpow(&p[1])?;
            (inv_q(F::QuantumQKrawtchouk, vec![one() / p[0].clone(), p[1].clone()])?, qn)
        }
        I::QkToLqj => {
            let qn = fam.qpow(&p[1])?;
            let params = vec![-p[0].clone() * qn.clone(), one() / (qn.clone() * q.clone())];
            (same_q(F::LittleQJacobi, params)?, qn)
        }
        I::LqjToQk => {
            let (a, b) = (&p[0], &p[1]);
            let (l, n) = log_q(b, &q)?;
            note(n);
            let params = vec![-a.clone() * b.clone() * q.clone(), -one() - l];
            (same_q(F::QKrawtchouk, params)?, b.clone() * q.clone())
        }
        I::AqkToBql => {
            let c = fam.qpow(&(-p[1].clone() - one()))?;
            (same_q(F::BigQLaguerre, vec![p[0].clone(), c])?, one())
        }
        I::BqlToAqk => {
            // The printed row reads log_q N; log_q b is meant.
            let (l, n) = log_q(&p[1], &q)?;
            note(n);
            (same_q(F::AffineQKrawtchouk, vec![p[0].clone(), -one() - l])?, one())
        }
        I::LqjToBqj => {
            let (a, b) = (&p[0], &p[1]);
            (same_q(F::BigQJacobi, vec![b.clone(), a.clone(), zero()])?, b.clone() * q.clone())
        }
        I::QkToBqj => {
            let qn = fam.qpow(&p[1])?;
            let params = vec![one() / (qn.clone() * q.clone()), -p[0].clone() * qn, zero()];
            (same_q(F::BigQJacobi, params)?, one())
        }
        I::BqjSymmetry => {
            let (a, b, c) = (&p[0], &p[1], &p[2]);
            if c.is_zero() {
                return inapplicable(identity, "needs c != 0");
            }
            (same_q(F::BigQJacobi, vec![c.clone(), a.clone() * b.clone() / c.clone(), a.clone()])?, one())
        }
        I::BqjBLimit => {
            let (a, b, c) = (&p[0], &p[1], &p[2]);
            let n = match log_q(&(one() / b.clone()), &q)? {
                (l, None) => l,
                _ => return inapplicable(identity, "needs b = q^-N"),
            };
            if c.is_zero() {
                return inapplicable(identity, "needs c != 0");
            }
            let cqn = c.clone() * fam.qpow(&n)?;
            let params = vec![a.clone() / cqn.clone(), c.clone(), b.clone()];
            (same_q(F::BigQJacobi, params)?, one() / cqn)
        }
        I::AwQInverse => {
            if p.iter().any(|x| x.is_zero()) {
                return inapplicable(identity, "needs nonzero parameters");
            }
            (inv_q(F::AskeyWilson, p.iter().map(|x| one() / x.clone()).collect())?, one())
        }
        I::BqjQInverse => {
            let (a, b, c) = (&p[0], &p[1], &p[2]);
            if a.is_zero() || b.is_zero() {
                return inapplicable(identity, "needs a, b != 0");
            }
            let params = vec![one() / a.clone(), one() / b.clone(), c.clone() / (a.clone() * b.clone())];
            (inv_q(F::BigQJacobi, params)?, one() / (a.clone() * q.clone()))
        }
    };
    Ok(MapResult { target, u, v: zero(), notes })
}

/// Largest relative discrepancy `|p_s(x) - p_t(u x + v)/u^n| / max(1, |p_s(x)|)`
/// over the given points and degrees `0..=n_max`, both sides from their
/// recurrences.
pub fn identity_residual<S: Scalar>(
    identity: Identity,
    fam: &FamilyInstance<S>,
    n_max: usize,
    points: &[S],
) -> Result<f64> {
    let m = param_map(identity, fam)?;
    let src = fam.sequence(n_max)?;
    let tgt = m.target.sequence(n_max)?;
    let mut worst: f64 = 0.0;
    for n in 0..=n_max {
        let un = m.u.ipow(n as i64);
        for x in points {
            let a = src.get(n).eval(x);
            let b = tgt.get(n).eval(&(m.u.clone() * x.clone() + m.v.clone())) / un.clone();
            worst = worst.max((a.clone() - b).modulus() / a.modulus().max(1.0));
        }
    }
    Ok(worst)
}
