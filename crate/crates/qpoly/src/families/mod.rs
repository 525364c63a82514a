//! Registry of the q-hypergeometric families.
//!
//! Askey–Wilson and big q-Jacobi carry closed-form recurrence coefficients.
//! Every other family with a recurrence reaches one of them through an affine
//! change of variable and a parameter map (its *base form*); the remaining
//! families only have a series representation.

mod coeffs;
mod hyper;
mod maps;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::polyengine::{generate_seq, PolySeq, Provenance, RecurrenceCoeffs};
use crate::scalar::Scalar;

pub use hyper::REFERENCE_INTERVAL;
pub use maps::{identity_residual, log_q, param_map, Identity, MapResult};

/// `|γ_n| <= VANISH_TOL` times the largest of `γ_{n±1}, γ_{n±2}` counts as vanishing.
pub const VANISH_TOL: f64 = 1e-10;
/// Tolerance for `|x q^k - 1|` in membership tests for `{q^{-k}}`.
pub const OMEGA_TOL: f64 = 1e-10;
/// Largest `k` tried in membership tests for `{q^{-k}}`.
pub const OMEGA_HORIZON: usize = 64;
/// Degree range of the degeneracy scan attached at construction.
pub const SCAN_N_MAX: usize = 32;

/// Families exposing only a series representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum EvalOnlyFamily {
    ZeroJacobiBessel,
    ZeroLaguerreBessel,
    LittleQLaguerre,
    QLaguerre,
    AltQCharlier,
    QCharlier,
    AlSalamCarlitzI,
    AlSalamCarlitzII,
    StieltjesWigert,
}

/// Family identifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum FamilyId {
    AskeyWilson,
    QRacah,
    BigQJacobi,
    QHahn,
    DualQHahn,
    ContinuousDualQHahn,
    BigQLaguerre,
    LittleQJacobi,
    QMeixner,
    QuantumQKrawtchouk,
    AffineQKrawtchouk,
    QKrawtchouk,
    DualQKrawtchouk,
    EvalOnly(EvalOnlyFamily),
}

const ALL: [FamilyId; 22] = [
    FamilyId::AskeyWilson,
    FamilyId::QRacah,
    FamilyId::BigQJacobi,
    FamilyId::QHahn,
    FamilyId::DualQHahn,
    FamilyId::ContinuousDualQHahn,
    FamilyId::BigQLaguerre,
    FamilyId::LittleQJacobi,
    FamilyId::QMeixner,
    FamilyId::QuantumQKrawtchouk,
    FamilyId::AffineQKrawtchouk,
    FamilyId::QKrawtchouk,
    FamilyId::DualQKrawtchouk,
    FamilyId::EvalOnly(EvalOnlyFamily::ZeroJacobiBessel),
    FamilyId::EvalOnly(EvalOnlyFamily::ZeroLaguerreBessel),
    FamilyId::EvalOnly(EvalOnlyFamily::LittleQLaguerre),
    FamilyId::EvalOnly(EvalOnlyFamily::QLaguerre),
    FamilyId::EvalOnly(EvalOnlyFamily::AltQCharlier),
    FamilyId::EvalOnly(EvalOnlyFamily::QCharlier),
    FamilyId::EvalOnly(EvalOnlyFamily::AlSalamCarlitzI),
    FamilyId::EvalOnly(EvalOnlyFamily::AlSalamCarlitzII),
    FamilyId::EvalOnly(EvalOnlyFamily::StieltjesWigert),
];

impl FamilyId {
    pub fn all() -> &'static [FamilyId] {
        &ALL
    }

    /// Short tag used in configs and reports.
    pub fn tag(self) -> &'static str {
        use EvalOnlyFamily as E;
        match self {
            FamilyId::AskeyWilson => "AW",
            FamilyId::QRacah => "qR",
            FamilyId::BigQJacobi => "bqJ",
            FamilyId::QHahn => "qH",
            FamilyId::DualQHahn => "dqH",
            FamilyId::ContinuousDualQHahn => "cdqH",
            FamilyId::BigQLaguerre => "bqL",
            FamilyId::LittleQJacobi => "lqJ",
            FamilyId::QMeixner => "qM",
            FamilyId::QuantumQKrawtchouk => "QqK",
            FamilyId::AffineQKrawtchouk => "AqK",
            FamilyId::QKrawtchouk => "qK",
            FamilyId::DualQKrawtchouk => "dqK",
            FamilyId::EvalOnly(E::ZeroJacobiBessel) => "0JB",
            FamilyId::EvalOnly(E::ZeroLaguerreBessel) => "0LB",
            FamilyId::EvalOnly(E::LittleQLaguerre) => "lqL",
            FamilyId::EvalOnly(E::QLaguerre) => "qL",
            FamilyId::EvalOnly(E::AltQCharlier) => "AqC",
            FamilyId::EvalOnly(E::QCharlier) => "qC",
            FamilyId::EvalOnly(E::AlSalamCarlitzI) => "ACI",
            FamilyId::EvalOnly(E::AlSalamCarlitzII) => "ACII",
            FamilyId::EvalOnly(E::StieltjesWigert) => "SW",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        ALL.iter().copied().find(|f| f.tag() == tag).ok_or_else(|| Error::UnknownFamily(tag.to_string()))
    }

    /// Parameter names in positional order.
    pub fn param_names(self) -> &'static [&'static str] {
        use EvalOnlyFamily as E;
        match self {
            FamilyId::AskeyWilson => &["a", "b", "c", "d"],
            FamilyId::QRacah => &["alpha", "beta", "gamma", "delta"],
            FamilyId::BigQJacobi | FamilyId::ContinuousDualQHahn => &["a", "b", "c"],
            FamilyId::QHahn => &["alpha", "beta", "N"],
            FamilyId::DualQHahn => &["gamma", "delta", "N"],
            FamilyId::BigQLaguerre | FamilyId::LittleQJacobi => &["a", "b"],
            FamilyId::QMeixner => &["b", "c"],
            FamilyId::QuantumQKrawtchouk | FamilyId::AffineQKrawtchouk | FamilyId::QKrawtchouk => &["p", "N"],
            FamilyId::DualQKrawtchouk => &["c", "N"],
            FamilyId::EvalOnly(E::ZeroJacobiBessel) => &["a", "b"],
            FamilyId::EvalOnly(E::QLaguerre) => &["alpha"],
            FamilyId::EvalOnly(E::StieltjesWigert) => &[],
            FamilyId::EvalOnly(_) => &["a"],
        }
    }

    pub fn has_recurrence(self) -> bool {
        !matches!(self, FamilyId::EvalOnly(_))
    }
}

/// How the base `q` was specified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum QMode {
    Generic,
    RootOfUnity { m: u32, n: u32 },
}

impl QMode {
    /// The mode of `1/q`.
    fn inverse(self) -> QMode {
        match self {
            QMode::Generic => QMode::Generic,
            QMode::RootOfUnity { m, n } => QMode::RootOfUnity { m: n - m % n, n },
        }
    }
}

/// Vanishing recurrence coefficients and parameter products in `{q^{-k}}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegeneracyProfile {
    pub lambda_set: Vec<usize>,
    pub omega_hits: Vec<String>,
    pub n_max: usize,
    pub horizon: usize,
    /// First index whose coefficient has a pole, if the scan met one.
    pub pole_at: Option<usize>,
    /// For roots of unity: whether every multiple of the order lies in the set.
    pub root_of_unity_containment: Option<bool>,
}

/// A family together with validated parameters and base.
#[derive(Clone, Debug)]
pub struct FamilyInstance<S> {
    id: FamilyId,
    params: Vec<S>,
    q: S,
    q_mode: QMode,
    profile: Option<DegeneracyProfile>,
}

/// `p_family(x) = p_base(u x + v) / u^n` with `base` an Askey–Wilson or big
/// q-Jacobi instance.
#[derive(Clone, Debug)]
pub struct BaseForm<S> {
    pub base: FamilyInstance<S>,
    pub u: S,
    pub v: S,
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Whether `x q^k = 1` for some `0 <= k <= horizon`.
pub fn in_omega<S: Scalar>(x: &S, q: &S, horizon: usize) -> Option<usize> {
    let mut t = x.clone();
    for k in 0..=horizon {
        if (t.clone() - S::one()).vanishes(OMEGA_TOL) {
            return Some(k);
        }
        t = t * q.clone();
    }
    None
}

impl<S: Scalar> FamilyInstance<S> {
    /// Instance with positional parameters and a generic base.
    pub fn new(id: FamilyId, params: Vec<S>, q: S) -> Result<Self> {
        Self::build(id, params, q, QMode::Generic)
    }

    /// Instance at `q = exp(2πi m/n)`.
    pub fn at_root_of_unity(id: FamilyId, params: Vec<S>, m: u32, n: u32) -> Result<Self> {
        let t = 2.0 * std::f64::consts::PI * m as f64 / n.max(1) as f64;
        Self::build(id, params, S::from_parts(t.cos(), t.sin()), QMode::RootOfUnity { m, n })
    }

    /// Instance with named parameters, checked against the family schema.
    pub fn make_family(id: FamilyId, named: &[(&str, S)], q: S, q_mode: QMode) -> Result<Self> {
        let names = id.param_names();
        if let Some((bad, _)) = named.iter().find(|(k, _)| !names.contains(k)) {
            return Err(Error::UnknownParam((*bad).to_string()));
        }
        let params = names
            .iter()
            .map(|n| {
                named
                    .iter()
                    .find(|(k, _)| k == n)
                    .map(|(_, v)| v.clone())
                    .ok_or_else(|| Error::MissingParam((*n).to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::build(id, params, q, q_mode)
    }

    fn build(id: FamilyId, params: Vec<S>, q: S, q_mode: QMode) -> Result<Self> {
        let mut fam = Self::unchecked(id, params, q, q_mode)?;
        fam.validate()?;
        if id.has_recurrence() {
            fam.profile = Some(fam.lambda_set(SCAN_N_MAX)?);
        }
        Ok(fam)
    }

    pub(crate) fn unchecked(id: FamilyId, params: Vec<S>, q: S, q_mode: QMode) -> Result<Self> {
        if params.len() != id.param_names().len() {
            return Err(Error::InvalidArgument(format!(
                "{} expects {} parameters, got {}",
                id.tag(),
                id.param_names().len(),
                params.len()
            )));
        }
        Ok(FamilyInstance { id, params, q, q_mode, profile: None })
    }

    fn validate(&self) -> Result<()> {
        let q = &self.q;
        if q.is_zero() || (q.clone() - S::one()).is_zero() {
            return Err(Error::InvalidArgument("base q must differ from 0 and 1".into()));
        }
        if let QMode::RootOfUnity { m, n } = self.q_mode {
            if m == 0 || n == 0 || gcd(m, n) != 1 {
                return Err(Error::BadRootOfUnity(format!("need gcd(M, N) = 1, got M = {m}, N = {n}")));
            }
            let t = 2.0 * std::f64::consts::PI * m as f64 / n as f64;
            let z = q.to_c64();
            if (z.re - t.cos()).hypot(z.im - t.sin()) > 1e-14 {
                return Err(Error::BadRootOfUnity(format!("q is not exp(2πi·{m}/{n})")));
            }
        }
        if !self.id.has_recurrence() {
            return Ok(());
        }
        let base = self.base_form()?.base;
        match base.id {
            FamilyId::AskeyWilson => {
                let abcd = base.params.iter().cloned().fold(S::one(), |a, b| a * b);
                if let Some(k) = in_omega(&abcd, &base.q, OMEGA_HORIZON) {
                    return Err(Error::NonNormal(format!("abcd = q^-{k}")));
                }
            }
            _ => {
                let ab = base.params[0].clone() * base.params[1].clone();
                if let Some(k) = in_omega(&ab, &base.q, OMEGA_HORIZON) {
                    return Err(Error::NonNormal(format!("ab = q^-{k}")));
                }
            }
        }
        Ok(())
    }

    pub fn id(&self) -> FamilyId {
        self.id
    }

    pub fn params(&self) -> &[S] {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<&S> {
        self.id.param_names().iter().position(|n| *n == name).map(|i| &self.params[i])
    }

    pub fn q(&self) -> &S {
        &self.q
    }

    pub fn q_mode(&self) -> QMode {
        self.q_mode
    }

    /// Degeneracy scan attached at construction.
    pub fn profile(&self) -> Option<&DegeneracyProfile> {
        self.profile.as_ref()
    }

    /// Same family and base with new positional parameters.
    pub fn with_params(&self, params: Vec<S>) -> Result<Self> {
        Self::build(self.id, params, self.q.clone(), self.q_mode)
    }

    /// `q^e` for a parameter exponent (integral exponents stay exact).
    pub(crate) fn qpow(&self, e: &S) -> Result<S> {
        self.q.try_pow(e).ok_or(Error::RequiresFloat("non-integral power of q"))
    }

    pub(crate) fn sqrt(x: &S) -> Result<S> {
        x.try_sqrt().ok_or(Error::RequiresFloat("square root of a non-square"))
    }

    /// The Askey–Wilson or big q-Jacobi instance this family reduces to.
    pub fn base_form(&self) -> Result<BaseForm<S>> {
        use FamilyId as F;
        let p = &self.params;
        let q = self.q.clone();
        let one = S::one;
        let zero = S::zero;
        let aw = |params: Vec<S>| Self::unchecked(F::AskeyWilson, params, q.clone(), self.q_mode);
        let bqj = |params: Vec<S>| Self::unchecked(F::BigQJacobi, params, q.clone(), self.q_mode);
        let inv_q = one() / q.clone();
        let bqj_inv = |params: Vec<S>| Self::unchecked(F::BigQJacobi, params, inv_q.clone(), self.q_mode.inverse());
        let two = S::from_int(2);
        let (base, u) = match self.id {
            F::AskeyWilson => (aw(p.clone())?, one()),
            F::BigQJacobi => (bqj(p.clone())?, one()),
            F::QRacah => {
                let (al, be, ga, de) = (&p[0], &p[1], &p[2], &p[3]);
                let s = Self::sqrt(&(ga.clone() * de.clone() * q.clone()))?;
                if s.is_zero() {
                    return Err(Error::AssumptionViolated("gamma*delta must be nonzero".into()));
                }
                let params = vec![
                    s.clone(),
                    al.clone() * q.clone() / s.clone(),
                    be.clone() * de.clone() * q.clone() / s.clone(),
                    ga.clone() * q.clone() / s.clone(),
                ];
                (aw(params)?, one() / (two * s))
            }
            F::QHahn => {
                let c = self.qpow(&(-p[2].clone() - one()))?;
                (bqj(vec![p[0].clone(), p[1].clone(), c])?, one())
            }
            F::DualQHahn => {
                let s = Self::sqrt(&(p[0].clone() * p[1].clone() * q.clone()))?;
                if s.is_zero() {
                    return Err(Error::AssumptionViolated("gamma*delta must be nonzero".into()));
                }
                let qn = self.qpow(&-p[2].clone())?;
                let params = vec![s.clone(), p[0].clone() * q.clone() / s.clone(), qn / s.clone(), zero()];
                (aw(params)?, one() / (two * s))
            }
            F::ContinuousDualQHahn => (aw(vec![p[0].clone(), p[1].clone(), p[2].clone(), zero()])?, one()),
            F::BigQLaguerre => (bqj(vec![p[0].clone(), zero(), p[1].clone()])?, one()),
            F::LittleQJacobi => {
                (bqj(vec![p[1].clone(), p[0].clone(), zero()])?, p[1].clone() * q.clone())
            }
            F::QMeixner => {
                let (b, c) = (&p[0], &p[1]);
                if b.is_zero() {
                    return Err(Error::AssumptionViolated("b must be nonzero".into()));
                }
                (bqj_inv(vec![-c.clone(), zero(), one() / b.clone()])?, one() / (b.clone() * q.clone()))
            }
            F::QuantumQKrawtchouk => {
                let qn = self.qpow(&p[1])?;
                (bqj_inv(vec![one() / p[0].clone(), zero(), qn.clone() * q.clone()])?, qn)
            }
            F::AffineQKrawtchouk => {
                let c = self.qpow(&(-p[1].clone() - one()))?;
                (bqj(vec![p[0].clone(), zero(), c])?, one())
            }
            F::QKrawtchouk => {
                let qn = self.qpow(&p[1])?;
                (bqj(vec![one() / (qn.clone() * q.clone()), -p[0].clone() * qn, zero()])?, one())
            }
            F::DualQKrawtchouk => {
                let qn = self.qpow(&-p[1].clone())?;
                let s = Self::sqrt(&(p[0].clone() * qn.clone()))?;
                if s.is_zero() {
                    return Err(Error::AssumptionViolated("c must be nonzero".into()));
                }
                (aw(vec![s.clone(), zero(), qn / s.clone(), zero()])?, one() / (two * s))
            }
            F::EvalOnly(_) => return Err(Error::EvalOnlyFamily(self.id.tag().into())),
        };
        Ok(BaseForm { base, u, v: S::zero() })
    }

    /// `(β_n, γ_n)` of the monic recurrence.
    pub fn ttrr_coeffs(&self, n: usize) -> Result<(S, S)> {
        self.recurrence()?.get(n)
    }

    /// The coefficient stream of this family.
    pub fn recurrence(&self) -> Result<RecurrenceCoeffs<S>> {
        let BaseForm { base, u, v } = self.base_form()?;
        let params = base.params.clone();
        let q = base.q.clone();
        let raw = match base.id {
            FamilyId::AskeyWilson => RecurrenceCoeffs::from_fn(Provenance::AskeyWilson, move |n| {
                coeffs::askey_wilson(&params, &q, n)
            }),
            _ => RecurrenceCoeffs::from_fn(Provenance::BigQJacobi, move |n| coeffs::big_q_jacobi(&params, &q, n)),
        };
        if self.id == base.id {
            return Ok(raw);
        }
        let mapped = raw.affine(u, v);
        let family = self.id.tag().to_string();
        Ok(RecurrenceCoeffs::from_fn(Provenance::Mapped { family }, move |n| mapped.get(n)))
    }

    /// Monic polynomials `p_0..p_{n_max}` from the recurrence.
    pub fn sequence(&self, n_max: usize) -> Result<PolySeq<S>> {
        generate_seq(&self.recurrence()?, n_max)
    }

    /// Scan `γ_1..γ_{n_max}` for vanishing entries.
    pub fn lambda_set(&self, n_max: usize) -> Result<DegeneracyProfile> {
        let rec = self.recurrence()?;
        let mut gammas = Vec::new();
        let mut pole_at = None;
        // two extra entries so the last scanned index still has right neighbours
        for n in 1..=n_max + 2 {
            match rec.get(n) {
                Ok((_, g)) => gammas.push(g),
                Err(Error::PoleInCoefficient { n: at }) => {
                    if at <= n_max {
                        pole_at = Some(at);
                    }
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        // A zero is judged against the neighbouring entries, since γ_n may
        // decay or grow geometrically.
        let mut lambda_set = Vec::new();
        let mags: Vec<f64> = gammas.iter().map(Scalar::modulus).collect();
        for (i, g) in gammas.iter().enumerate().take(n_max) {
            let lo = i.saturating_sub(2);
            let hi = (i + 2).min(mags.len() - 1);
            let scale = (lo..=hi).filter(|&k| k != i).map(|k| mags[k]).fold(0.0, f64::max);
            let scale = if scale > 0.0 { scale } else { 1.0 };
            if g.vanishes(VANISH_TOL * scale) {
                lambda_set.push(i + 1);
            }
        }
        let root_of_unity_containment = match self.q_mode {
            QMode::RootOfUnity { n: order, .. } => {
                let limit = pole_at.map_or(n_max, |p| p.saturating_sub(1));
                let order = order as usize;
                Some((1..=limit / order).all(|k| lambda_set.contains(&(k * order))))
            }
            QMode::Generic => None,
        };
        Ok(DegeneracyProfile {
            lambda_set,
            omega_hits: self.omega_hits()?,
            n_max,
            horizon: OMEGA_HORIZON,
            pole_at,
            root_of_unity_containment,
        })
    }

    fn omega_hits(&self) -> Result<Vec<String>> {
        let base = self.base_form()?.base;
        let p = &base.params;
        let mut products: Vec<(String, S)> = Vec::new();
        match base.id {
            FamilyId::AskeyWilson => {
                let names = ["a", "b", "c", "d"];
                for i in 0..4 {
                    for j in i + 1..4 {
                        products.push((format!("{}{}", names[i], names[j]), p[i].clone() * p[j].clone()));
                    }
                }
                products.push(("abcd".into(), p.iter().cloned().fold(S::one(), |a, b| a * b)));
            }
            _ => {
                products.push(("a".into(), p[0].clone()));
                products.push(("b".into(), p[1].clone()));
                products.push(("c".into(), p[2].clone()));
                if !p[2].is_zero() {
                    products.push(("ab/c".into(), p[0].clone() * p[1].clone() / p[2].clone()));
                }
            }
        }
        let prefix = if base.id == self.id { String::new() } else { format!("{}:", base.id.tag()) };
        Ok(products
            .into_iter()
            .filter_map(|(name, x)| in_omega(&x, &base.q, OMEGA_HORIZON).map(|k| format!("{prefix}{name}=q^-{k}")))
            .collect())
    }
}

#[cfg(test)]
pub(crate) mod tests;
