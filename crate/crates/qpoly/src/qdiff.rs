//! Difference operators, the hypergeometric-type operator on the q-linear
//! lattice, and eigenfunction checks.
//!
//! Every operator here is a two-point divided difference
//! `(f(s_1) - f(s_2)) / (s_1 - s_2)` whose nodes are the roots of
//! `t^2 - e_1 t + e_2` with `e_1, e_2` polynomial in the output variable, so
//! `x^k ↦ h_{k-1}(s_1, s_2)` (complete homogeneous symmetric polynomials) is
//! an exact monomial rule.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{FamilyId, FamilyInstance, QMode};
use crate::poly::{chebyshev_nodes, Poly};
use crate::scalar::Scalar;

/// Node sets of lattice forward differences.
#[derive(Clone, Debug, PartialEq)]
pub enum LatticeSpec<S> {
    /// `x(s) = q^{-s}`; the forward difference is `D_{1/q}`.
    QLinear,
    /// `μ(s) = q^{-s} + γδ q^{s+1}`.
    QQuadratic { gamma_delta: S },
}

#[derive(Clone, Debug, PartialEq)]
pub enum OperatorKind<S> {
    /// `(f(x) - f(qx)) / ((1-q) x)`.
    HahnDq,
    /// `(f(x) - f(x/q)) / ((1-1/q) x)`.
    HahnDqInv,
    /// Askey–Wilson divided difference on `x = (z + 1/z)/2`.
    AWDividedDiff,
    LatticeForward(LatticeSpec<S>),
}

/// An operator together with its base.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSpec<S> {
    pub kind: OperatorKind<S>,
    pub q: S,
    /// Branch of `q^{1/2}` used by the Askey–Wilson operator.
    pub sqrt_q: Option<S>,
}

impl<S: Scalar> OperatorSpec<S> {
    pub fn new(kind: OperatorKind<S>, q: S) -> Self {
        OperatorSpec { kind, q, sqrt_q: None }
    }

    /// Askey–Wilson operator with an explicit branch of `q^{1/2}`.
    pub fn askey_wilson(q: S, sqrt_q: S) -> Self {
        OperatorSpec { kind: OperatorKind::AWDividedDiff, q, sqrt_q: Some(sqrt_q) }
    }

    fn half(&self) -> Result<S> {
        match &self.sqrt_q {
            Some(h) => Ok(h.clone()),
            None => self.q.try_sqrt().ok_or(Error::RequiresFloat("square root of q")),
        }
    }

    /// `(e_1, e_2)` in the output variable.
    fn symbols(&self) -> Result<(Poly<S>, Poly<S>)> {
        let q = self.q.clone();
        if (q.clone() - S::one()).is_zero() {
            return Err(Error::DegenerateBase);
        }
        let one = S::one;
        let zero = S::zero;
        Ok(match &self.kind {
            OperatorKind::HahnDq => {
                (Poly::new(vec![zero(), one() + q.clone()]), Poly::new(vec![zero(), zero(), q]))
            }
            OperatorKind::HahnDqInv | OperatorKind::LatticeForward(LatticeSpec::QLinear) => {
                let qi = one() / q;
                (Poly::new(vec![zero(), one() + qi.clone()]), Poly::new(vec![zero(), zero(), qi]))
            }
            OperatorKind::AWDividedDiff => {
                let h = self.half()?;
                let c = (q.clone() + one() / q - S::from_int(2)) / S::from_int(4);
                (Poly::new(vec![zero(), h.clone() + one() / h]), Poly::new(vec![c, zero(), one()]))
            }
            OperatorKind::LatticeForward(LatticeSpec::QQuadratic { gamma_delta }) => {
                let qi = one() / q.clone();
                let c = gamma_delta.clone() * (one() - q.clone()) * (one() - q);
                (Poly::new(vec![zero(), one() + qi.clone()]), Poly::new(vec![c, zero(), qi]))
            }
        })
    }

    /// `(∂_q e_1, ∂_q e_2)`.
    fn symbol_derivatives(&self) -> Result<(Poly<S>, Poly<S>)> {
        let q = self.q.clone();
        let one = S::one;
        let zero = S::zero;
        Ok(match &self.kind {
            OperatorKind::HahnDq => (Poly::new(vec![zero(), one()]), Poly::new(vec![zero(), zero(), one()])),
            OperatorKind::HahnDqInv | OperatorKind::LatticeForward(LatticeSpec::QLinear) => {
                let d = -one() / (q.clone() * q);
                (Poly::new(vec![zero(), d.clone()]), Poly::new(vec![zero(), zero(), d]))
            }
            OperatorKind::AWDividedDiff => {
                let h = self.half()?;
                let two = S::from_int(2);
                let e1 = (one() - one() / (h.clone() * h.clone())) / (two.clone() * h);
                let e2 = (one() - one() / (q.clone() * q)) / (two.clone() * two);
                (Poly::new(vec![zero(), e1]), Poly::constant(e2))
            }
            OperatorKind::LatticeForward(LatticeSpec::QQuadratic { .. }) => {
                return Err(Error::InvalidArgument("q-derivative of the q-quadratic lattice operator".into()))
            }
        })
    }

    /// The operator acting on the output of this one (the q-quadratic lattice
    /// moves to `γδ q`).
    pub fn next(&self) -> Self {
        let mut out = self.clone();
        if let OperatorKind::LatticeForward(LatticeSpec::QQuadratic { gamma_delta }) = &self.kind {
            out.kind = OperatorKind::LatticeForward(LatticeSpec::QQuadratic {
                gamma_delta: gamma_delta.clone() * self.q.clone(),
            });
        }
        out
    }

    /// Pointwise two-point evaluation, used to cross-check the monomial rule.
    pub fn apply_at(&self, f: &dyn Fn(&S) -> S, x: &S) -> Result<S> {
        let (e1, e2) = self.symbols()?;
        let (a, b) = (e1.eval(x), e2.eval(x));
        let disc = (a.clone() * a.clone() - S::from_int(4) * b)
            .try_sqrt()
            .ok_or(Error::RequiresFloat("square root of the node discriminant"))?;
        let two = S::from_int(2);
        let s1 = (a.clone() + disc.clone()) / two.clone();
        let s2 = (a - disc.clone()) / two;
        if disc.vanishes(1e-300) {
            return Err(Error::SamplePole);
        }
        Ok((f(&s1) - f(&s2)) / (s1 - s2))
    }
}

/// `h_0, …, h_{m}` for the given symbols.
fn homogeneous<S: Scalar>(e1: &Poly<S>, e2: &Poly<S>, m: usize) -> Vec<Poly<S>> {
    let mut h = vec![Poly::constant(S::one())];
    if m >= 1 {
        h.push(e1.clone());
    }
    for j in 2..=m {
        let next = &(e1 * &h[j - 1]) - &(e2 * &h[j - 2]);
        h.push(next);
    }
    h
}

fn combine<S: Scalar>(p: &Poly<S>, basis: &[Poly<S>]) -> Poly<S> {
    let n = p.degree();
    if n == 0 {
        return Poly::zero();
    }
    let mut out = Poly::zero();
    for k in 1..=n {
        out = &out + &basis[k - 1].scale(&p.coeff(k));
    }
    let mut c = out.into_coeffs();
    c.resize(n, S::zero());
    Poly::new(c)
}

/// Apply the operator; the result has formal degree `deg p - 1`.
pub fn apply_operator<S: Scalar>(op: &OperatorSpec<S>, p: &Poly<S>) -> Result<Poly<S>> {
    let (e1, e2) = op.symbols()?;
    let h = homogeneous(&e1, &e2, p.degree().saturating_sub(1));
    Ok(combine(p, &h))
}

/// `∂_q` of the operator applied to a fixed polynomial.
pub fn apply_operator_q_derivative<S: Scalar>(op: &OperatorSpec<S>, p: &Poly<S>) -> Result<Poly<S>> {
    let (e1, e2) = op.symbols()?;
    let (d1, d2) = op.symbol_derivatives()?;
    let m = p.degree().saturating_sub(1);
    let h = homogeneous(&e1, &e2, m);
    let mut dh = vec![Poly::zero()];
    if m >= 1 {
        dh.push(d1.clone());
    }
    for j in 2..=m {
        let t = &(&(&d1 * &h[j - 1]) + &(&e1 * &dh[j - 1])) - &(&(&d2 * &h[j - 2]) + &(&e2 * &dh[j - 2]));
        dh.push(t);
    }
    Ok(combine(p, &dh))
}

/// `k`-fold application, advancing the lattice between steps.
pub fn operator_power<S: Scalar>(op: &OperatorSpec<S>, k: usize, p: &Poly<S>) -> Result<Poly<S>> {
    let mut cur = op.clone();
    let mut out = p.clone();
    for _ in 0..k {
        out = apply_operator(&cur, &out)?;
        cur = cur.next();
    }
    Ok(out)
}

/// `∂_q (D^N)` applied to `p`: `Σ_i D^i (∂_q D) D^{N-1-i} p`.
///
/// At a primitive `N`th root of unity `D^N` vanishes identically; this is
/// the first nonvanishing term of its expansion in `q`.
pub fn regularized_power<S: Scalar>(op: &OperatorSpec<S>, order: usize, p: &Poly<S>) -> Result<Poly<S>> {
    if order == 0 {
        return Ok(Poly::zero());
    }
    let target = p.degree().saturating_sub(order);
    let mut total: Option<Poly<S>> = None;
    for i in 0..order {
        let inner = operator_power(op, order - 1 - i, p)?;
        let mid = apply_operator_q_derivative(op, &inner)?;
        let outer = operator_power(op, i, &mid)?;
        total = Some(match total {
            None => outer,
            Some(t) => &t + &outer,
        });
    }
    let mut c = total.unwrap_or_else(Poly::zero).into_coeffs();
    c.resize(target + 1, S::zero());
    Ok(Poly::new(c))
}

/// Parameters after one application of the family's lowering operator.
///
/// `sqrt_q` fixes the branch of `q^{1/2}` for the Askey–Wilson type shifts.
pub fn shift_family<S: Scalar>(fam: &FamilyInstance<S>, sqrt_q: &S) -> Result<FamilyInstance<S>> {
    use FamilyId as F;
    let p = fam.params();
    let q = fam.q().clone();
    let one = S::one();
    let params: Vec<S> = match fam.id() {
        F::AskeyWilson | F::ContinuousDualQHahn => p.iter().map(|a| a.clone() * sqrt_q.clone()).collect(),
        F::BigQJacobi => p.iter().map(|a| a.clone() * q.clone()).collect(),
        F::QHahn => vec![p[0].clone() * q.clone(), p[1].clone() * q.clone(), p[2].clone() - one],
        F::QRacah => vec![
            p[0].clone() * q.clone(),
            p[1].clone() * q.clone(),
            p[2].clone() * q.clone(),
            p[3].clone(),
        ],
        F::DualQHahn => vec![p[0].clone() * q.clone(), p[1].clone(), p[2].clone() - one],
        F::DualQKrawtchouk => vec![p[0].clone(), p[1].clone() - one],
        F::AffineQKrawtchouk => vec![p[0].clone() * q.clone(), p[1].clone() - one],
        F::QKrawtchouk => vec![p[0].clone() * q.clone() * q.clone(), p[1].clone() - one],
        F::QuantumQKrawtchouk => vec![p[0].clone() * q.clone(), p[1].clone() - one],
        F::QMeixner => vec![p[0].clone() * q.clone(), p[1].clone() / q.clone()],
        F::BigQLaguerre => p.iter().map(|a| a.clone() * q.clone()).collect(),
        F::LittleQJacobi | F::EvalOnly(_) => {
            return Err(Error::InvalidArgument(format!("no lowering rule for {}", fam.id().tag())))
        }
    };
    FamilyInstance::unchecked(fam.id(), params, q, fam.q_mode())
}

/// The lowering operator naturally attached to a family.
pub fn family_operator<S: Scalar>(fam: &FamilyInstance<S>) -> Result<OperatorSpec<S>> {
    use FamilyId as F;
    let q = fam.q().clone();
    let p = fam.params();
    Ok(match fam.id() {
        F::AskeyWilson | F::ContinuousDualQHahn => OperatorSpec::askey_wilson(q.clone(), sqrt_q_for(fam)?),
        F::QRacah => OperatorSpec::new(
            OperatorKind::LatticeForward(LatticeSpec::QQuadratic { gamma_delta: p[2].clone() * p[3].clone() }),
            q,
        ),
        F::DualQHahn => OperatorSpec::new(
            OperatorKind::LatticeForward(LatticeSpec::QQuadratic { gamma_delta: p[0].clone() * p[1].clone() }),
            q,
        ),
        F::DualQKrawtchouk => {
            let gd = p[0].clone() * fam.q().try_pow(&(-p[1].clone() - S::one())).ok_or(Error::RequiresFloat("q^-N"))?;
            OperatorSpec::new(OperatorKind::LatticeForward(LatticeSpec::QQuadratic { gamma_delta: gd }), q)
        }
        F::LittleQJacobi | F::EvalOnly(_) => {
            return Err(Error::InvalidArgument(format!("no lowering operator for {}", fam.id().tag())))
        }
        _ => OperatorSpec::new(OperatorKind::HahnDqInv, q),
    })
}

/// `q^{1/2}`, taken as `exp(πiM/N)` at `q = exp(2πiM/N)`.
pub fn sqrt_q_for<S: Scalar>(fam: &FamilyInstance<S>) -> Result<S> {
    match fam.q_mode() {
        QMode::RootOfUnity { m, n } => {
            let t = std::f64::consts::PI * m as f64 / n as f64;
            Ok(S::from_parts(t.cos(), t.sin()))
        }
        QMode::Generic => fam.q().try_sqrt().ok_or(Error::RequiresFloat("square root of q")),
    }
}

/// Outcome of comparing `D p_n(x; θ)` with `c · p_{n-1}(x; θ')`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftReport {
    pub n: usize,
    /// Residual with the constant `(q^n - 1)/(q - 1)` (or its `1/q` analogue
    /// for backward operators).
    pub stated_residual: f64,
    /// Least-squares constant and the residual it leaves.
    pub fitted_ratio: [f64; 2],
    pub fitted_residual: f64,
}

fn sample_points<S: Scalar>(count: usize) -> Vec<S> {
    chebyshev_nodes(count, 0.05, 0.9)
}

/// Least-squares `λ` with `a ≈ λ b` over samples and the relative residual.
fn fit_ratio<S: Scalar>(a: &[S], b: &[S]) -> (S, f64) {
    let conj = |z: &S| {
        let c = z.to_c64();
        S::from_parts(c.re, -c.im)
    };
    let mut num = S::zero();
    let mut den = S::zero();
    for (x, y) in a.iter().zip(b) {
        num = num + conj(y) * x.clone();
        den = den + conj(y) * y.clone();
    }
    let lam = if den.is_zero() { S::zero() } else { num / den };
    let res = max_rel(a, &b.iter().map(|y| lam.clone() * y.clone()).collect::<Vec<_>>());
    (lam, res)
}

fn max_rel<S: Scalar>(a: &[S], b: &[S]) -> f64 {
    let scale = a.iter().chain(b).map(Scalar::modulus).fold(0.0, f64::max);
    let diff = a.iter().zip(b).map(|(x, y)| (x.clone() - y.clone()).modulus()).fold(0.0, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Residual of the degree-lowering identity for the family's shift rule.
pub fn shift_identity_residual<S: Scalar>(
    fam: &FamilyInstance<S>,
    op: &OperatorSpec<S>,
    n: usize,
) -> Result<ShiftReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let h = op.sqrt_q.clone().map_or_else(|| sqrt_q_for(fam), Ok)?;
    let lhs = apply_operator(op, fam.sequence(n)?.get(n))?;
    let shifted = shift_family(fam, &h)?;
    let rhs = shifted.sequence(n - 1)?.get(n - 1).as_poly().clone();
    let q = op.q.clone();
    let stated = match op.kind {
        OperatorKind::HahnDq | OperatorKind::AWDividedDiff => {
            (q.ipow(n as i64) - S::one()) / (q.clone() - S::one())
        }
        _ => (q.ipow(-(n as i64)) - S::one()) / (q.ipow(-1) - S::one()),
    };
    let xs: Vec<S> = sample_points(n + 1);
    let a: Vec<S> = xs.iter().map(|x| lhs.eval(x)).collect();
    let b: Vec<S> = xs.iter().map(|x| rhs.eval(x)).collect();
    let stated_residual = max_rel(&a, &b.iter().map(|y| stated.clone() * y.clone()).collect::<Vec<_>>());
    let (lam, fitted_residual) = fit_ratio(&a, &b);
    let l = lam.to_c64();
    Ok(ShiftReport { n, stated_residual, fitted_ratio: [l.re, l.im], fitted_residual })
}

/// Lowering by the regularized `N`th power at `q = exp(2πiM/N)`.
///
/// For Askey–Wilson type families the parameters pick up `q^{N/2} = (-1)^M`,
/// so the image is expected along `p_{n-N}((-1)^M x)`; elsewhere along
/// `p_{n-N}(x)`. Both signs are fitted.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootOfUnityLowering {
    pub n: usize,
    pub sign: i8,
    /// Fit against `p_{n-N}(sign · x)`.
    pub matched: EigenReport,
    /// Fit against `p_{n-N}(-sign · x)`.
    pub flipped: EigenReport,
}

pub fn root_of_unity_lowering<S: Scalar>(fam: &FamilyInstance<S>, n: usize) -> Result<RootOfUnityLowering> {
    let QMode::RootOfUnity { m, n: order } = fam.q_mode() else {
        return Err(Error::InvalidArgument("family is not at a root of unity".into()));
    };
    let order = order as usize;
    if n < order {
        return Err(Error::InvalidArgument(format!("need n >= {order}")));
    }
    let op = family_operator(fam)?;
    let seq = fam.sequence(n)?;
    let lhs = regularized_power(&op, order, seq.get(n))?;
    let low = seq.get(n - order).as_poly();
    let aw_type = matches!(op.kind, OperatorKind::AWDividedDiff);
    let sign: i8 = if aw_type && m % 2 == 1 { -1 } else { 1 };
    let xs: Vec<S> = sample_points(n + 2);
    let a: Vec<S> = xs.iter().map(|x| lhs.eval(x)).collect();
    let fit = |s: i8| {
        let s = S::from_int(s as i64);
        let b: Vec<S> = xs.iter().map(|x| low.eval(&(s.clone() * x.clone()))).collect();
        eigen_from_samples(&a, &b)
    };
    Ok(RootOfUnityLowering { n, sign, matched: fit(sign), flipped: fit(-sign) })
}

/// Second-order data `σ`, `τ` of the hypergeometric-type operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffEqData<S> {
    pub sigma: Poly<S>,
    /// `τ` itself (the tabulated column divided by `q - 1`).
    pub tau: Poly<S>,
}

impl<S: Scalar> DiffEqData<S> {
    /// Build from `σ` and the tabulated `(q-1)τ`.
    pub fn from_table(sigma: Poly<S>, q_minus_one_tau: Poly<S>, q: &S) -> Result<Self> {
        if sigma.degree() > 2 || q_minus_one_tau.degree() > 1 {
            return Err(Error::InvalidArgument("need deg σ <= 2 and deg τ <= 1".into()));
        }
        let d = q.clone() - S::one();
        if d.is_zero() {
            return Err(Error::DegenerateBase);
        }
        Ok(DiffEqData { sigma, tau: q_minus_one_tau.scale(&(S::one() / d)) })
    }

    /// Eigenvalue on degree `n` read off the leading coefficients.
    pub fn lambda(&self, n: usize, q: &S, realization: Realization) -> Result<S> {
        let lead = hyper_operator_monomial(self, q, n, realization)?;
        Ok(lead.coeff(n))
    }
}

/// How the second difference of the hypergeometric-type operator is scaled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Realization {
    /// `Δ(∇f/∇x) / (x(s+1/2) - x(s-1/2))`.
    HalfStep,
    /// `Δ(∇f/∇x) / (x(s+1) - x(s))`; the scaling the tabulated `σ` fits.
    FullStep,
}

/// Pointwise `ℋf(x)` on the lattice `x(s) = q^s`.
pub fn hyper_operator_at<S: Scalar>(
    data: &DiffEqData<S>,
    q: &S,
    f: &dyn Fn(&S) -> S,
    x: &S,
    realization: Realization,
) -> Result<S> {
    let one = S::one();
    let xq = x.clone() * q.clone();
    let xd = x.clone() / q.clone();
    let den_fwd = xq.clone() - x.clone();
    let den_bwd = x.clone() - xd.clone();
    if den_fwd.vanishes(1e-300) || den_bwd.vanishes(1e-300) {
        return Err(Error::SamplePole);
    }
    let fx = f(x);
    let fwd = (f(&xq) - fx.clone()) / den_fwd;
    let bwd = (fx - f(&xd)) / den_bwd;
    let step = match realization {
        Realization::HalfStep => {
            let h = q.try_sqrt().ok_or(Error::RequiresFloat("square root of q"))?;
            x.clone() * (h.clone() - one / h)
        }
        Realization::FullStep => x.clone() * (q.clone() - one),
    };
    Ok(data.sigma.eval(x) * (fwd.clone() - bwd) / step + data.tau.eval(x) * fwd)
}

fn operator_nodes<S: Scalar>(count: usize) -> Vec<S> {
    // Shifted off the origin, where the lattice degenerates.
    chebyshev_nodes(count, 0.55, 0.4)
}

const GUARD_TOL: f64 = 1e-9;

/// `ℋp` as a polynomial of formal degree `deg p`, recovered by interpolation;
/// an extra node guards exactness.
pub fn hyper_operator_apply<S: Scalar>(
    data: &DiffEqData<S>,
    q: &S,
    p: &Poly<S>,
    realization: Realization,
) -> Result<Poly<S>> {
    let n = p.degree();
    let nodes: Vec<S> = operator_nodes(n + 2);
    let f = |x: &S| p.eval(x);
    let values = nodes
        .iter()
        .map(|x| hyper_operator_at(data, q, &f, x, realization))
        .collect::<Result<Vec<_>>>()?;
    let full = Poly::interpolate(&nodes[..=n], &values[..=n]);
    let guard = full.eval(&nodes[n + 1]);
    let scale = values.iter().map(Scalar::modulus).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mismatch = (guard - values[n + 1].clone()).modulus() / scale;
    if !S::EXACT && mismatch > GUARD_TOL || S::EXACT && mismatch != 0.0 {
        return Err(Error::NotPolynomialOutput { mismatch });
    }
    Ok(full)
}

fn hyper_operator_monomial<S: Scalar>(data: &DiffEqData<S>, q: &S, n: usize, r: Realization) -> Result<Poly<S>> {
    hyper_operator_apply(data, q, &Poly::monomial(n), r)
}

/// Least-squares eigenvalue of `op` on `p` and the relative residual
/// `‖op p - λ p‖ / ‖p‖` over the samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenReport {
    pub lambda_fit: [f64; 2],
    pub residual: f64,
}

fn eigen_from_samples<S: Scalar>(op_values: &[S], p_values: &[S]) -> EigenReport {
    let (lam, _) = fit_ratio(op_values, p_values);
    let norm = p_values.iter().map(|v| v.modulus().powi(2)).sum::<f64>().sqrt();
    let res = op_values
        .iter()
        .zip(p_values)
        .map(|(a, b)| (a.clone() - lam.clone() * b.clone()).modulus().powi(2))
        .sum::<f64>()
        .sqrt();
    let l = lam.to_c64();
    EigenReport { lambda_fit: [l.re, l.im], residual: if norm == 0.0 { res } else { res / norm } }
}

/// Eigencheck of the hypergeometric-type operator on `p`.
pub fn eigen_check<S: Scalar>(data: &DiffEqData<S>, q: &S, p: &Poly<S>, realization: Realization) -> Result<EigenReport> {
    let hp = hyper_operator_apply(data, q, p, realization)?;
    let xs: Vec<S> = sample_points(p.degree() + 3);
    let a: Vec<S> = xs.iter().map(|x| hp.eval(x)).collect();
    let b: Vec<S> = xs.iter().map(|x| p.eval(x)).collect();
    Ok(eigen_from_samples(&a, &b))
}

/// Status of a row of the `σ, (q-1)τ` table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RowStatus {
    /// Used as printed.
    AsPrinted,
    /// A corrected variant is available next to the printed one.
    Corrected,
    /// The parameter correspondence to a registry family is not fixed.
    Ambiguous,
    /// No registry family carries these polynomials.
    NoFamily,
    /// The row fails for every parameter reading tried.
    Unresolved,
}

/// One row: label, family (when registered), status and the data builder.
#[derive(Clone, Copy, Debug)]
pub struct OperatorRow {
    pub index: usize,
    pub label: &'static str,
    pub family: Option<&'static str>,
    pub status: RowStatus,
}

/// The seventeen rows in table order.
pub const OPERATOR_TABLE: [OperatorRow; 17] = [
    OperatorRow { index: 1, label: "p_n(x;a,b,c;q)", family: Some("bqJ"), status: RowStatus::AsPrinted },
    OperatorRow { index: 2, label: "h_n^(alpha,beta)(x,N;q)", family: Some("qH"), status: RowStatus::Ambiguous },
    OperatorRow { index: 3, label: "p_n(x;a,b;q)", family: Some("bqL"), status: RowStatus::AsPrinted },
    OperatorRow { index: 4, label: "k_n^Aff(x;p,N;q)", family: Some("AqK"), status: RowStatus::Corrected },
    OperatorRow { index: 5, label: "u_n^(a)(x;q)", family: Some("ACI"), status: RowStatus::AsPrinted },
    OperatorRow { index: 6, label: "p_n(x;a,b|q)", family: Some("lqJ"), status: RowStatus::AsPrinted },
    OperatorRow { index: 7, label: "k_n(x;p,N;q)", family: Some("qK"), status: RowStatus::Corrected },
    OperatorRow { index: 8, label: "k_n(x;a;q)", family: None, status: RowStatus::NoFamily },
    OperatorRow { index: 9, label: "p_n(x;a|q)", family: Some("lqL"), status: RowStatus::AsPrinted },
    OperatorRow { index: 10, label: "j_n(x;a,b)", family: Some("0JB"), status: RowStatus::AsPrinted },
    OperatorRow { index: 11, label: "l_n(x;a)", family: Some("0LB"), status: RowStatus::Corrected },
    OperatorRow { index: 12, label: "m_n(x;b,c;q)", family: Some("qM"), status: RowStatus::AsPrinted },
    OperatorRow { index: 13, label: "k_n^qtm(x;p,N;q)", family: Some("QqK"), status: RowStatus::Unresolved },
    OperatorRow { index: 14, label: "s_n(x;q)", family: Some("SW"), status: RowStatus::AsPrinted },
    OperatorRow { index: 15, label: "l_n^(alpha)(x;q)", family: Some("qL"), status: RowStatus::Unresolved },
    OperatorRow { index: 16, label: "c_n(x;a;q)", family: Some("qC"), status: RowStatus::AsPrinted },
    OperatorRow { index: 17, label: "v_n^(a)(x;q)", family: Some("ACII"), status: RowStatus::AsPrinted },
];

fn lin<S: Scalar>(c0: S, c1: S) -> Poly<S> {
    Poly::new(vec![c0, c1])
}

/// `σ` and `(q-1)τ` of a row for the given parameters (in the family's
/// schema order; row 8 takes `[a]`). `corrected` selects the corrected
/// variant of rows 4, 7 and 11 (row 11 is printed for `-a`).
pub fn operator_table_data<S: Scalar>(index: usize, params: &[S], q: &S, corrected: bool) -> Result<DiffEqData<S>> {
    let q = q.clone();
    let one = S::one;
    let zero = S::zero;
    let p = |i: usize| -> Result<S> {
        params.get(i).cloned().ok_or_else(|| Error::InvalidArgument(format!("row {index} needs parameter {i}")))
    };
    let qpow = |e: S| q.try_pow(&e).ok_or(Error::RequiresFloat("q to a non-integral power"));
    let (sigma, col) = match index {
        1 => {
            let (a, b, c) = (p(0)?, p(1)?, p(2)?);
            let ab = a.clone() * b;
            (
                Poly::from_roots(&[a.clone() * q.clone(), c.clone() * q.clone()]),
                lin(
                    q.clone() * (a.clone() + c.clone() - ab.clone() * q.clone() - a * c * q.clone()),
                    ab * q.clone() * q.clone() - one(),
                ),
            )
        }
        2 => {
            let (al, be, n) = (p(0)?, p(1)?, p(2)?);
            let qn = qpow(n)?;
            (
                Poly::from_roots(&[one(), al.clone() * qn.clone()]),
                lin(
                    one() - al.clone() * (q.clone() - qn.clone() + be.clone() * q.clone() * qn),
                    al * be * q.clone() * q.clone() - one(),
                ),
            )
        }
        3 => {
            let (a, b) = (p(0)?, p(1)?);
            (
                Poly::from_roots(&[a.clone() * q.clone(), b.clone() * q.clone()]),
                lin(q.clone() * (a.clone() + b.clone() - a * b * q.clone()), -one()),
            )
        }
        4 => {
            let (pp, n) = (p(0)?, p(1)?);
            let qmn = qpow(-n)?;
            let c0 = if corrected {
                q.clone() * (qmn.clone() / q.clone() + pp.clone() - pp.clone() * qmn.clone())
            } else {
                q.clone() * (qmn.clone() / q.clone() + q.clone() - qmn.clone() * q.clone())
            };
            (Poly::from_roots(&[qmn, pp * q.clone()]), lin(c0, -one()))
        }
        5 => {
            let a = p(0)?;
            (Poly::from_roots(&[one(), a.clone()]), lin(one() + a, -one()))
        }
        6 => {
            let (a, b) = (p(0)?, p(1)?);
            (
                Poly::from_roots(&[zero(), one()]),
                lin(one() - a.clone() * q.clone(), a * b * q.clone() * q.clone() - one()),
            )
        }
        7 => {
            let (pp, n) = (p(0)?, p(1)?);
            let qmn = qpow(-n)?;
            let c0 = if corrected { pp.clone() * q.clone() + qmn.clone() } else { pp.clone() * q.clone() - qmn.clone() };
            (Poly::from_roots(&[zero(), qmn]), lin(c0, -(one() + pp * q.clone())))
        }
        8 => {
            let a = p(0)?;
            (Poly::from_roots(&[zero(), one()]), lin(one(), -(a * q.clone() + one())))
        }
        9 => {
            let a = p(0)?;
            (Poly::from_roots(&[zero(), one()]), lin(one() - a * q.clone(), -one()))
        }
        10 => {
            let (a, b) = (p(0)?, p(1)?);
            (Poly::monomial(2), lin(-(a.clone() * b * q.clone()), a * q.clone() - one()))
        }
        11 => {
            let a = p(0)?;
            let c0 = if corrected { -(a * q.clone()) } else { a * q.clone() };
            (Poly::monomial(2), lin(c0, -one()))
        }
        12 => {
            let (b, c) = (p(0)?, p(1)?);
            let qc = q.clone() / c;
            (lin(-(b.clone() * q.clone()), one()), lin(-qc.clone() - one() + b * q.clone(), qc))
        }
        13 => {
            let (pp, n) = (p(0)?, p(1)?);
            let q1n = qpow(one() - n.clone())?;
            let q2n = qpow(S::from_int(2) - n)?;
            (lin(-one(), one()), lin(q1n - one() + pp.clone() * q.clone(), -(pp * q2n)))
        }
        14 => (Poly::x(), lin(-one(), q.clone())),
        15 => {
            let al = p(0)?;
            (Poly::x(), lin(-(al.clone() * q.clone()) - one(), al * q.clone()))
        }
        16 => {
            let a = p(0)?;
            let qa = q.clone() / a;
            (Poly::x(), lin(-qa.clone() - one(), qa))
        }
        17 => {
            let a = p(0)?;
            let ai = one() / a;
            (Poly::constant(one()), lin(-ai.clone() - one(), ai))
        }
        _ => return Err(Error::InvalidArgument(format!("no row {index}"))),
    };
    DiffEqData::from_table(sigma, col, &q)
}

/// Monic `p_n` of a family, from the recurrence when there is one.
pub fn family_poly<S: Scalar>(fam: &FamilyInstance<S>, n: usize) -> Result<Poly<S>> {
    if fam.id().has_recurrence() {
        Ok(fam.sequence(n)?.get(n).as_poly().clone())
    } else {
        Ok(fam.hyper_poly(n)?.into_poly())
    }
}

/// Eigencheck of a table row on the `n`th polynomial of `fam`.
pub fn operator_table_eigen_check<S: Scalar>(
    index: usize,
    fam: &FamilyInstance<S>,
    n: usize,
    corrected: bool,
    realization: Realization,
) -> Result<EigenReport> {
    let data = operator_table_data(index, fam.params(), fam.q(), corrected)?;
    eigen_check(&data, fam.q(), &family_poly(fam, n)?, realization)
}

/// Poles of `A(z) = (1-az)(1-bz)(1-cz)(1-dz)/((1-z^2)(1-qz^2))` closer than
/// this to a sample are rejected.
const POLE_TOL: f64 = 1e-8;

/// Left side of the `z`-form Askey–Wilson equation,
/// `A(1/z) p(z/q) - (A(z) + A(1/z)) p(z) + A(z) p(qz)`, at the given `z`
/// (`p` is a polynomial in `x = (z + 1/z)/2`).
pub fn aw_zform_apply<S: Scalar>(fam: &FamilyInstance<S>, p: &Poly<S>, zs: &[S]) -> Result<Vec<S>> {
    if fam.id() != FamilyId::AskeyWilson {
        return Err(Error::InvalidArgument("z-form equation is defined for Askey-Wilson".into()));
    }
    let q = fam.q().clone();
    let par = fam.params().to_vec();
    let one = S::one;
    let big_a = |z: &S| -> Result<S> {
        let num = par.iter().fold(one(), |acc, a| acc * (one() - a.clone() * z.clone()));
        let den = (one() - z.clone() * z.clone()) * (one() - q.clone() * z.clone() * z.clone());
        if den.vanishes(POLE_TOL) {
            return Err(Error::SamplePole);
        }
        Ok(num / den)
    };
    let at = |z: &S| p.eval(&((z.clone() + one() / z.clone()) / S::from_int(2)));
    zs.iter()
        .map(|z| {
            let zi = one() / z.clone();
            let (az, azi) = (big_a(z)?, big_a(&zi)?);
            Ok(azi.clone() * at(&(z.clone() / q.clone())) - (az.clone() + azi) * at(z) + az * at(&(q.clone() * z.clone())))
        })
        .collect()
}

/// Unit-circle samples avoiding `z^2 = 1`.
pub fn zform_samples<S: Scalar>(count: usize) -> Vec<S> {
    (0..count)
        .map(|k| {
            let t = 0.37 + 2.0 * std::f64::consts::PI * k as f64 / count as f64;
            S::from_parts(t.cos(), t.sin())
        })
        .collect()
}

/// `λ_n = -4 q^{1-n} (1 - q^n)(1 - abcd q^{n-1})` as tabulated for the
/// `z`-form equation.
pub fn aw_zform_stated_lambda<S: Scalar>(fam: &FamilyInstance<S>, n: usize) -> S {
    let q = fam.q().clone();
    let abcd = fam.params().iter().cloned().fold(S::one(), |a, b| a * b);
    let n = n as i64;
    -S::from_int(4) * q.ipow(1 - n) * (S::one() - q.ipow(n)) * (S::one() - abcd * q.ipow(n - 1))
}

/// Eigencheck of the `z`-form equation on `p_n`, with the ratio to the
/// tabulated eigenvalue.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZFormReport {
    pub n: usize,
    pub eigen: EigenReport,
    pub ratio_to_stated: Option<[f64; 2]>,
}

pub fn aw_zform_eigen_check<S: Scalar>(fam: &FamilyInstance<S>, n: usize) -> Result<ZFormReport> {
    let p = fam.sequence(n)?.get(n).as_poly().clone();
    let zs: Vec<S> = zform_samples(2 * n + 6);
    let a = aw_zform_apply(fam, &p, &zs)?;
    let b: Vec<S> = zs.iter().map(|z| p.eval(&((z.clone() + S::one() / z.clone()) / S::from_int(2)))).collect();
    let eigen = eigen_from_samples(&a, &b);
    let stated = aw_zform_stated_lambda(fam, n);
    let ratio_to_stated = (!stated.vanishes(1e-300)).then(|| {
        let r = S::from_parts(eigen.lambda_fit[0], eigen.lambda_fit[1]) / stated;
        let r = r.to_c64();
        [r.re, r.im]
    });
    Ok(ZFormReport { n, eigen, ratio_to_stated })
}

#[cfg(test)]
mod tests;
