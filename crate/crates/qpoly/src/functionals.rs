//! Moment functionals realized as finite or truncated mass lists, periodic
//! quadrature on the unit circle, or raw moment vectors.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{in_omega, FamilyId, FamilyInstance, QMode, OMEGA_HORIZON, OMEGA_TOL};
use crate::poly::Poly;
use crate::polyengine::{canonical_moments, oracle_apply, roots, MomentVector, PolySeq, RecurrenceCoeffs, DEFAULT_CLUSTER_TOL};
use crate::qnum::{qpochhammer, qpochhammer_inf_prod};
use crate::scalar::{Real, Scalar};

/// Default node count of the circle quadrature.
pub const DEFAULT_NODES: usize = 4096;
/// Degree the tail bound of Jackson-type chains protects.
pub const TAIL_DEGREE: usize = 24;
/// Default truncation tolerance for Jackson-type chains.
pub const DEFAULT_TAIL_TOL: f64 = 1e-17;
const INF_TOL: f64 = 1e-18;
const MAX_CHAIN: usize = 20_000;

type C<T> = Complex<T>;

/// `weight · p^{(order)}(location)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MassPoint<T> {
    pub location: C<T>,
    pub order: u8,
    pub weight: C<T>,
}

impl<T: Real> MassPoint<T> {
    pub fn new(location: C<T>, weight: C<T>) -> Self {
        MassPoint { location, order: 0, weight }
    }

    pub fn derivative(location: C<T>, weight: C<T>) -> Self {
        MassPoint { location, order: 1, weight }
    }
}

/// Where a truncated chain stopped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailReport {
    pub terms: usize,
    /// Last rejected tail bound relative to the chain's head.
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FunctionalKind<T> {
    MassList { masses: Vec<MassPoint<T>>, tail: Vec<TailReport> },
    /// Trapezoidal rule on the unit circle, stored as `(x_k, w_k)`.
    CircleQuadrature { nodes: usize, samples: Vec<(C<T>, C<T>)> },
    /// A functional known only through its moments.
    Moments(MomentVector<C<T>>),
}

/// A linear functional on polynomials, scaled by `normalization`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentFunctional<T> {
    pub kind: FunctionalKind<T>,
    pub normalization: C<T>,
}

/// One entry of the JSON form of a mass list.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MassRecord {
    pub x_re: f64,
    pub x_im: f64,
    pub order: u8,
    pub w_re: f64,
    pub w_im: f64,
}

impl<T: Real> MomentFunctional<T> {
    pub fn mass_list(masses: Vec<MassPoint<T>>) -> Self {
        MomentFunctional { kind: FunctionalKind::MassList { masses, tail: Vec::new() }, normalization: C::<T>::one() }
    }

    pub fn from_moments(mu: MomentVector<C<T>>) -> Self {
        MomentFunctional { kind: FunctionalKind::Moments(mu), normalization: C::<T>::one() }
    }

    /// Canonical functional of a recurrence, up to degree `k_max`.
    pub fn canonical(coeffs: &RecurrenceCoeffs<C<T>>, k_max: usize) -> Result<Self> {
        Ok(Self::from_moments(canonical_moments(coeffs, k_max)?))
    }

    pub fn masses(&self) -> Option<&[MassPoint<T>]> {
        match &self.kind {
            FunctionalKind::MassList { masses, .. } => Some(masses),
            _ => None,
        }
    }

    pub fn tail(&self) -> &[TailReport] {
        match &self.kind {
            FunctionalKind::MassList { tail, .. } => tail,
            _ => &[],
        }
    }

    fn raw_apply(&self, p: &Poly<C<T>>) -> Result<C<T>> {
        match &self.kind {
            FunctionalKind::MassList { masses, .. } => {
                let dp = p.derivative();
                Ok(masses.iter().fold(C::<T>::zero(), |acc, m| {
                    let v = match m.order {
                        0 => p.eval(&m.location),
                        1 => dp.eval(&m.location),
                        k => {
                            let mut d = p.clone();
                            for _ in 0..k {
                                d = d.derivative();
                            }
                            d.eval(&m.location)
                        }
                    };
                    acc + m.weight * v
                }))
            }
            FunctionalKind::CircleQuadrature { samples, .. } => {
                Ok(samples.iter().fold(C::<T>::zero(), |acc, (x, w)| acc + *w * p.eval(x)))
            }
            FunctionalKind::Moments(mu) => oracle_apply(mu, p),
        }
    }

    pub fn apply(&self, p: &Poly<C<T>>) -> Result<C<T>> {
        Ok(self.normalization * self.raw_apply(p)?)
    }

    /// `|L|(|p|)`: the functional with every weight, location and coefficient
    /// replaced by its modulus. Bounds the rounding error of `apply`.
    pub fn abs_apply(&self, p: &Poly<C<T>>) -> Result<f64> {
        let abs = |p: &Poly<C<T>>| -> Vec<f64> { p.coeffs().iter().map(|c| c.modulus()).collect() };
        let eval = |c: &[f64], x: f64| c.iter().rev().fold(0.0, |acc, v| acc * x + v);
        let total = match &self.kind {
            FunctionalKind::MassList { masses, .. } => {
                let mut total = 0.0;
                for m in masses {
                    let mut d = p.clone();
                    for _ in 0..m.order {
                        d = d.derivative();
                    }
                    total += m.weight.modulus() * eval(&abs(&d), m.location.modulus());
                }
                total
            }
            FunctionalKind::CircleQuadrature { samples, .. } => {
                let c = abs(p);
                samples.iter().map(|(x, w)| w.modulus() * eval(&c, x.modulus())).sum()
            }
            FunctionalKind::Moments(mu) => {
                abs(p).iter().zip(&mu.mu).map(|(c, m)| c * m.modulus()).sum()
            }
        };
        Ok(self.normalization.modulus() * total)
    }

    /// Copy rescaled so that the constant 1 maps to 1.
    pub fn self_normalized(&self) -> Result<Self> {
        let total = self.raw_apply(&Poly::constant(C::<T>::one()))?;
        if total.modulus() == 0.0 || !total.modulus().is_finite() {
            return Err(Error::DegenerateWeight { index: 0 });
        }
        Ok(MomentFunctional { kind: self.kind.clone(), normalization: C::<T>::one() / total })
    }

    /// `μ_0, …, μ_{k_max}`.
    pub fn moments(&self, k_max: usize) -> Result<MomentVector<C<T>>> {
        let mu = (0..=k_max).map(|k| self.apply(&Poly::monomial(k))).collect::<Result<_>>()?;
        Ok(MomentVector { mu })
    }

    /// The functional `p ↦ L(p(u x + v))`.
    pub fn pullback_affine(&self, u: C<T>, v: C<T>) -> Result<Self> {
        let kind = match &self.kind {
            FunctionalKind::MassList { masses, tail } => FunctionalKind::MassList {
                masses: masses
                    .iter()
                    .map(|m| MassPoint {
                        location: u * m.location + v,
                        order: m.order,
                        weight: m.weight * u.ipow(m.order as i64),
                    })
                    .collect(),
                tail: tail.clone(),
            },
            FunctionalKind::CircleQuadrature { nodes, samples } => FunctionalKind::CircleQuadrature {
                nodes: *nodes,
                samples: samples.iter().map(|(x, w)| (u * x + v, *w)).collect(),
            },
            FunctionalKind::Moments(_) => {
                return Err(Error::InvalidArgument("affine change of a moment-only functional".into()))
            }
        };
        Ok(MomentFunctional { kind, normalization: self.normalization })
    }

    /// JSON-ready mass list with the normalization folded into the weights.
    pub fn mass_records(&self) -> Option<Vec<MassRecord>> {
        let n = self.normalization;
        self.masses().map(|ms| {
            ms.iter()
                .map(|m| {
                    let x = m.location.to_c64();
                    let w = (n * m.weight).to_c64();
                    MassRecord { x_re: x.re, x_im: x.im, order: m.order, w_re: w.re, w_im: w.im }
                })
                .collect()
        })
    }
}

/// Anything that pairs two polynomials.
pub trait BilinearForm<S> {
    fn pair(&self, p: &Poly<S>, r: &Poly<S>) -> Result<S>;

    /// The pairing with every weight, node and coefficient replaced by its
    /// modulus: the scale against which rounding in `pair` is measured.
    fn abs_pair(&self, p: &Poly<S>, r: &Poly<S>) -> Result<f64>;
}

impl<T: Real> BilinearForm<C<T>> for MomentFunctional<T> {
    /// Mass lists evaluate both factors at the nodes instead of expanding the
    /// product, which keeps cancellation between large coefficients out.
    fn pair(&self, p: &Poly<C<T>>, r: &Poly<C<T>>) -> Result<C<T>> {
        match self.masses() {
            Some(masses) if masses.iter().all(|m| m.order <= 1) => {
                let (dp, dr) = (p.derivative(), r.derivative());
                let total = masses.iter().fold(C::<T>::zero(), |acc, m| {
                    let x = &m.location;
                    let v = if m.order == 0 {
                        p.eval(x) * r.eval(x)
                    } else {
                        dp.eval(x) * r.eval(x) + p.eval(x) * dr.eval(x)
                    };
                    acc + m.weight * v
                });
                Ok(self.normalization * total)
            }
            _ => self.apply(&(p * r)),
        }
    }

    /// For mass lists this is the first-order bound
    /// `Σ |w| (|p|(|x|) |r(x)| + |p(x)| |r|(|x|))`, which stays small when a
    /// factor vanishes on the nodes.
    fn abs_pair(&self, p: &Poly<C<T>>, r: &Poly<C<T>>) -> Result<f64> {
        let Some(masses) = self.masses().filter(|m| m.iter().all(|m| m.order <= 1)) else {
            return self.abs_apply(&(p * r));
        };
        let abs_eval = |p: &Poly<C<T>>, x: f64| p.coeffs().iter().rev().fold(0.0, |acc, c| acc * x + c.modulus());
        let (dp, dr) = (p.derivative(), r.derivative());
        let mut total = 0.0;
        for m in masses {
            let x = &m.location;
            let ax = x.modulus();
            let bound = |f: &Poly<C<T>>, g: &Poly<C<T>>| abs_eval(f, ax) * g.eval(x).modulus() + f.eval(x).modulus() * abs_eval(g, ax);
            let v = if m.order == 0 { bound(p, r) } else { bound(&dp, r) + bound(p, &dr) };
            total += m.weight.modulus() * v;
        }
        Ok(self.normalization.modulus() * total)
    }
}

pub fn functional_apply<T: Real>(f: &MomentFunctional<T>, p: &Poly<C<T>>) -> Result<C<T>> {
    f.apply(p)
}

/// `G[n][m] = form(p_n, p_m)` for `n, m <= n_max`.
pub fn gram_matrix<S: Scalar, F: BilinearForm<S> + ?Sized>(form: &F, seq: &PolySeq<S>, n_max: usize) -> Result<Vec<Vec<S>>> {
    if n_max > seq.n_max() {
        return Err(Error::InvalidArgument(format!("sequence only reaches degree {}", seq.n_max())));
    }
    let mut g = vec![vec![S::zero(); n_max + 1]; n_max + 1];
    for n in 0..=n_max {
        for m in 0..=n {
            let v = form.pair(seq.get(n), seq.get(m))?;
            g[n][m] = v.clone();
            g[m][n] = v;
        }
    }
    Ok(g)
}

/// Largest `|L(p_n p_m)| / |L|(|p_n p_m|)` over `m < n <= n_max`: orthogonality
/// measured against the rounding scale of each entry, which stays meaningful
/// when `L(p_n^2)` itself vanishes.
pub fn scaled_offdiag<T: Real>(f: &MomentFunctional<T>, seq: &PolySeq<C<T>>, n_max: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for n in 1..=n_max {
        for m in 0..n {
            let prod = seq.get(n).as_poly() * seq.get(m).as_poly();
            let scale = f.abs_apply(&prod)?;
            if scale > 0.0 {
                worst = worst.max(f.apply(&prod)?.modulus() / scale);
            }
        }
    }
    Ok(worst)
}

/// Relative deviation of `moments` from the canonical moments of `coeffs`
/// through degree `k_max`.
pub fn moment_mismatch<T: Real>(f: &MomentFunctional<T>, coeffs: &RecurrenceCoeffs<C<T>>, k_max: usize) -> Result<f64> {
    let got = f.self_normalized()?.moments(k_max)?;
    let want = canonical_moments(coeffs, k_max)?;
    Ok(got
        .mu
        .iter()
        .zip(&want.mu)
        .map(|(a, b)| (*a - *b).modulus() / b.modulus().max(1.0))
        .fold(0.0, f64::max))
}

fn check_base<T: Real>(q: &C<T>) -> Result<()> {
    let m = q.modulus();
    if m < 1.0 {
        Ok(())
    } else {
        Err(Error::BaseOutOfDisk(m))
    }
}

fn expect(fam_id: FamilyId, want: FamilyId) -> Result<()> {
    if fam_id == want {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("expected {}, got {}", want.tag(), fam_id.tag())))
    }
}

fn real<T: Real>(x: f64) -> C<T> {
    C::<T>::from_real(x)
}

/// Squared norm of the monic Askey–Wilson polynomial of degree `n`.
pub fn aw_squared_norm<T: Real>(fam: &FamilyInstance<C<T>>, n: usize) -> Result<C<T>> {
    expect(fam.id(), FamilyId::AskeyWilson)?;
    let q = *fam.q();
    check_base(&q)?;
    let p = fam.params();
    let abcd = p[0] * p[1] * p[2] * p[3];
    let qn = q.ipow(n as i64);
    let mut den_args = vec![q * qn];
    for i in 0..4 {
        for j in i + 1..4 {
            den_args.push(p[i] * p[j] * qn);
        }
    }
    let num = qpochhammer_inf_prod(&[abcd * qn * qn], q, INF_TOL)?;
    let den = qpochhammer_inf_prod(&den_args, q, INF_TOL)?
        * real::<T>(4.0).ipow(n as i64)
        * qpochhammer(&(abcd * qn / q), &q, n);
    Ok(num / den)
}

/// Trapezoidal rule for the Askey–Wilson weight on the unit circle.
pub fn aw_circle_functional<T: Real>(fam: &FamilyInstance<C<T>>, node_count: usize) -> Result<MomentFunctional<T>> {
    expect(fam.id(), FamilyId::AskeyWilson)?;
    let q = *fam.q();
    check_base(&q)?;
    if fam.params().iter().any(|a| a.modulus() >= 1.0) {
        return Err(Error::ParamsOutsideDisk);
    }
    if !node_count.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("node count {node_count} is not a power of two")));
    }
    let scale = real::<T>(1.0 / (2.0 * node_count as f64));
    let samples = (0..node_count)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / node_count as f64;
            let z = C::<T>::from_parts(t.cos(), t.sin());
            let zi = C::<T>::one() / z;
            let num = qpochhammer_inf_prod(&[z * z, zi * zi], q, INF_TOL)?;
            let den_args: Vec<C<T>> = fam.params().iter().flat_map(|a| [*a * z, *a * zi]).collect();
            let den = qpochhammer_inf_prod(&den_args, q, INF_TOL)?;
            Ok((C::<T>::from_real(t.cos()), scale * num / den))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentFunctional { kind: FunctionalKind::CircleQuadrature { nodes: node_count, samples }, normalization: C::<T>::one() })
}

/// `∏_{k<j} (1 - a s q^k) / (s - a q^{k+1})`, the Pochhammer ratio
/// `(a s;q)_j / ((a q/s;q)_j s^j)` without dividing by `s`.
fn pair_ratio<T: Real>(a: C<T>, s: C<T>, q: C<T>, j: usize) -> C<T> {
    let mut acc = C::<T>::one();
    for k in 0..j {
        let qk = q.ipow(k as i64);
        acc = acc * (C::<T>::one() - a * s * qk) / (s - a * q * qk);
    }
    acc
}

fn finite(w: C<f64>) -> bool {
    w.re.is_finite() && w.im.is_finite()
}

fn checked<T: Real>(w: C<T>, index: usize) -> Result<C<T>> {
    if finite(w.to_c64()) {
        Ok(w)
    } else {
        Err(Error::DegenerateWeight { index })
    }
}

/// Number of masses for an Askey–Wilson family with `ab = q^{1-N}`.
fn racah_size<T: Real>(fam: &FamilyInstance<C<T>>) -> Result<usize> {
    let p = fam.params();
    let ab = p[0] * p[1];
    match in_omega(&(ab / *fam.q()), fam.q(), OMEGA_HORIZON) {
        Some(k) if k >= 1 => Ok(k),
        _ => Err(Error::InvalidArgument("need ab = q^{1-N} with N >= 2".into())),
    }
}

/// Finite functional of the terminating case `ab = q^{1-N}`.
pub fn qracah_functional<T: Real>(fam: &FamilyInstance<C<T>>) -> Result<MomentFunctional<T>> {
    expect(fam.id(), FamilyId::AskeyWilson)?;
    let big_n = racah_size(fam)?;
    let q = *fam.q();
    let p = fam.params();
    let (a, b, c, d) = (p[0], p[1], p[2], p[3]);
    for (name, x) in [("a", a), ("b", b)] {
        let sq = x * x;
        for k in 0..=big_n.saturating_sub(2) {
            if (sq * q.ipow(k as i64) - C::<T>::one()).vanishes(OMEGA_TOL) {
                return Err(Error::AssumptionViolated(format!("{name}^2 = q^-{k}")));
            }
        }
    }
    let a2 = a * a;
    let qn = q.ipow(-(big_n as i64));
    let masses = (0..big_n)
        .map(|j| {
            let qj = q.ipow(j as i64);
            let w = qpochhammer(&(q * qn), &q, j) * qpochhammer(&a2, &q, j)
                / (qpochhammer(&q, &q, j) * qpochhammer(&(a2 / qn), &q, j))
                * pair_ratio(a, c, q, j)
                * pair_ratio(a, d, q, j)
                * (C::<T>::one() - a2 * qj * qj)
                / ((C::<T>::one() - a2) * qn.ipow(j as i64));
            let x = (C::<T>::one() / qj + a2 * qj) / (real::<T>(2.0) * a);
            Ok(MassPoint::new(x, checked(w, j)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentFunctional::mass_list(masses))
}

/// A product of factors `f_i(α)^{±1}`, differentiated exactly.
struct FactorProduct<T> {
    constant: C<T>,
    num: Vec<(C<T>, C<T>)>,
    den: Vec<(C<T>, C<T>)>,
}

impl<T: Real> FactorProduct<T> {
    fn value(&self) -> C<T> {
        let n = self.num.iter().fold(self.constant, |acc, (v, _)| acc * *v);
        self.den.iter().fold(n, |acc, (v, _)| acc / *v)
    }

    fn derivative(&self) -> C<T> {
        let den = self.den.iter().fold(C::<T>::one(), |acc, (v, _)| acc * *v);
        let num_vals: Vec<C<T>> = self.num.iter().map(|(v, _)| *v).collect();
        let mut total = C::<T>::zero();
        for (i, (_, dv)) in self.num.iter().enumerate() {
            let rest = num_vals.iter().enumerate().filter(|(k, _)| *k != i).fold(C::<T>::one(), |acc, (_, v)| acc * *v);
            total = total + *dv * rest;
        }
        total = total / den;
        let all = num_vals.iter().fold(C::<T>::one(), |acc, v| acc * *v) / den;
        for (v, dv) in &self.den {
            total = total - all * *dv / *v;
        }
        self.constant * total
    }
}

/// `A_j(α)` of the limit construction, as exact factors in `α`.
fn aw_a_factors<T: Real>(alpha: C<T>, c: C<T>, d: C<T>, q: C<T>, big_n: usize, j: usize) -> FactorProduct<T> {
    let one = C::<T>::one();
    let two = real::<T>(2.0);
    let qn = q.ipow(big_n as i64);
    let mut fp = FactorProduct {
        constant: qpochhammer(&(q / qn), &q, j) / qpochhammer(&q, &q, j) * qn.ipow(j as i64),
        num: Vec::new(),
        den: Vec::new(),
    };
    if j == 0 {
        return fp;
    }
    let a2 = alpha * alpha;
    // (α²;q)_j / (1-α²) = ∏_{1<=k<j} (1 - α² q^k)
    for k in 1..j {
        let qk = q.ipow(k as i64);
        fp.num.push((one - a2 * qk, -two * alpha * qk));
    }
    let q2j = q.ipow(2 * j as i64);
    fp.num.push((one - a2 * q2j, -two * alpha * q2j));
    for k in 0..j {
        let qk = q.ipow(k as i64);
        fp.num.push((one - alpha * c * qk, -c * qk));
        fp.num.push((one - alpha * d * qk, -d * qk));
        fp.den.push((one - a2 * qn * qk, -two * alpha * qn * qk));
        fp.den.push((c - alpha * q * qk, -q * qk));
        fp.den.push((d - alpha * q * qk, -q * qk));
    }
    fp
}

/// `(A_j(a), A_j'(a))` for `j < N`.
pub fn aw_limit_weights<T: Real>(fam: &FamilyInstance<C<T>>) -> Result<Vec<(C<T>, C<T>)>> {
    expect(fam.id(), FamilyId::AskeyWilson)?;
    let big_n = racah_size(fam)?;
    let p = fam.params();
    let q = *fam.q();
    Ok((0..big_n)
        .map(|j| {
            let f = aw_a_factors(p[0], p[2], p[3], q, big_n, j);
            (f.value(), f.derivative())
        })
        .collect())
}

/// `μ_j(a) = (a q^j + a^{-1} q^{-j}) / 2`.
pub fn aw_mu<T: Real>(a: C<T>, q: C<T>, j: i64) -> C<T> {
    (a * q.ipow(j) + C::<T>::one() / (a * q.ipow(j))) / real::<T>(2.0)
}

/// Limit functional for `ab = q^{1-N}` and `a^2 = q^{-M}`, `M <= N-2`.
pub fn aw_degenerate_functional<T: Real>(fam: &FamilyInstance<C<T>>) -> Result<MomentFunctional<T>> {
    expect(fam.id(), FamilyId::AskeyWilson)?;
    let big_n = racah_size(fam)?;
    let q = *fam.q();
    let a = fam.params()[0];
    let m = in_omega(&(a * a), &q, OMEGA_HORIZON)
        .ok_or_else(|| Error::AssumptionViolated("a^2 is not q^-M".into()))?;
    if m + 2 > big_n {
        return Err(Error::BranchMismatch { m, n: big_n });
    }
    let aw = aw_limit_weights(fam)?;
    let mut masses = Vec::new();
    let pair_end = m.div_ceil(2);
    for j in 0..pair_end {
        let (aj, dj) = aw[j];
        let (_, dmj) = aw[m - j];
        let x = aw_mu(a, q, j as i64);
        masses.push(MassPoint::new(x, checked(dj + dmj, j)?));
        let coeff = aj * (q.ipow(j as i64) - q.ipow((m - j) as i64));
        masses.push(MassPoint::derivative(x, checked(coeff, j)?));
    }
    if m % 2 == 0 {
        masses.push(MassPoint::new(aw_mu(a, q, (m / 2) as i64), checked(aw[m / 2].1, m / 2)?));
    }
    for (j, w) in aw.iter().enumerate().take(big_n).skip(m + 1) {
        masses.push(MassPoint::new(aw_mu(a, q, j as i64), checked(w.1, j)?));
    }
    Ok(MomentFunctional::mass_list(masses))
}

/// Jackson integral of `p` over `[lower, upper]`, truncated when both tails
/// drop below `tol` (relative to the first term).
pub fn jackson_qintegral<T: Real>(p: &Poly<C<T>>, lower: C<T>, upper: C<T>, q: C<T>, tol: f64) -> Result<C<T>> {
    check_base(&q)?;
    let chain = |end: C<T>| -> Result<C<T>> {
        if end.modulus() == 0.0 {
            return Ok(C::<T>::zero());
        }
        let mut total = C::<T>::zero();
        let mut x = end;
        let mut qs = C::<T>::one();
        let mut head = 0.0f64;
        for s in 0..MAX_CHAIN {
            let term = p.eval(&x) * qs;
            total = total + term;
            let size = term.modulus();
            head = head.max(size);
            if s > 0 && size <= tol * head.max(f64::MIN_POSITIVE) && qs.modulus() <= tol {
                return Ok(end * (q - C::<T>::one()) * total);
            }
            x = x * q;
            qs = qs * q;
        }
        Err(Error::NonConvergence { what: "Jackson q-integral", iterations: MAX_CHAIN })
    };
    Ok(chain(lower)? - chain(upper)?)
}

/// Masses of `sign · end (1-q) q^s w(end q^s)` along one geometric chain,
/// with `w` advanced by its `q`-shift ratio.
fn jackson_chain<T: Real>(
    end: C<T>,
    q: C<T>,
    first_weight: C<T>,
    ratio: &dyn Fn(C<T>) -> Result<C<T>>,
    tol: f64,
    degree: usize,
) -> Result<(Vec<MassPoint<T>>, TailReport)> {
    let mut masses = Vec::new();
    let mut x = end;
    let mut w = first_weight * end * (C::<T>::one() - q);
    let bound = |x: &C<T>, w: &C<T>| w.modulus() * x.modulus().max(1.0).powi(2 * degree as i32);
    let head = bound(&x, &w).max(f64::MIN_POSITIVE);
    for s in 0..MAX_CHAIN {
        let b = bound(&x, &w);
        if s > 0 && b <= tol * head {
            return Ok((masses, TailReport { terms: s, bound: b / head }));
        }
        masses.push(MassPoint::new(x, checked(w, s)?));
        w = w * q * ratio(x)?;
        x = x * q;
    }
    Err(Error::NonConvergence { what: "Jackson chain", iterations: MAX_CHAIN })
}

/// Big q-Jacobi weight as a Jackson integral over `[cq, aq]`.
pub fn bqj_functional<T: Real>(fam: &FamilyInstance<C<T>>, tol: f64) -> Result<MomentFunctional<T>> {
    expect(fam.id(), FamilyId::BigQJacobi)?;
    let q = *fam.q();
    check_base(&q)?;
    if let Some(prof) = fam.profile() {
        if !prof.lambda_set.is_empty() {
            return Err(Error::NonNormal(format!("Λ = {:?}", prof.lambda_set)));
        }
    }
    let p = fam.params();
    let (a, b, c) = (p[0], p[1], p[2]);
    if a.modulus() == 0.0 || c.modulus() == 0.0 {
        return Err(Error::InvalidArgument("need a, c nonzero".into()));
    }
    let one = C::<T>::one();
    let w0 = |x: C<T>| -> Result<C<T>> {
        Ok(qpochhammer_inf_prod(&[x / a, x / c], q, INF_TOL)? / qpochhammer_inf_prod(&[x, b * x / c], q, INF_TOL)?)
    };
    let ratio = move |x: C<T>| -> Result<C<T>> {
        let den = (one - x / a) * (one - x / c);
        if den.vanishes(1e-300) {
            return Err(Error::DegenerateWeight { index: 0 });
        }
        Ok((one - x) * (one - b * x / c) / den)
    };
    let (ma, ta) = jackson_chain(a * q, q, w0(a * q)?, &ratio, tol, TAIL_DEGREE)?;
    let (mc, tc) = jackson_chain(c * q, q, -w0(c * q)?, &ratio, tol, TAIL_DEGREE)?;
    let masses = ma.into_iter().chain(mc).collect();
    Ok(MomentFunctional { kind: FunctionalKind::MassList { masses, tail: vec![ta, tc] }, normalization: one })
}

/// `∏_{k<x} (s - t q^k)`: `(t/s;q)_x s^x` without dividing by `s`.
fn scaled_poch<T: Real>(s: C<T>, t: C<T>, q: C<T>, x: usize) -> C<T> {
    (0..x).fold(C::<T>::one(), |acc, k| acc * (s - t * q.ipow(k as i64)))
}

/// q-Hahn weight on `q^{-x}`, `x < N`, orthogonalizing bqJ(a, b, q^{-N}).
pub fn qhahn_functional<T: Real>(a: C<T>, b: C<T>, big_n: usize, q: C<T>) -> Result<MomentFunctional<T>> {
    if big_n == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    let qn1 = q / q.ipow(big_n as i64);
    let masses = (0..big_n)
        .map(|x| {
            let w = qpochhammer(&(a * q), &q, x) * qpochhammer(&qn1, &q, x)
                / (qpochhammer(&q, &q, x) * scaled_poch(b, qn1, q, x))
                / (a * q).ipow(x as i64);
            Ok(MassPoint::new(q.ipow(-(x as i64)), checked(w, x)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentFunctional::mass_list(masses))
}

/// Limit `b → q^{-N}` of the big q-Jacobi weight: masses at `c q^{N-s}`.
pub fn bqj_blimit_functional<T: Real>(a: C<T>, c: C<T>, big_n: usize, q: C<T>) -> Result<MomentFunctional<T>> {
    if big_n == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    let qn1 = q / q.ipow(big_n as i64);
    let masses = (0..big_n)
        .map(|s| {
            let w = qpochhammer(&(a / c * qn1), &q, s) * qpochhammer(&qn1, &q, s)
                / (qpochhammer(&(qn1 / c), &q, s) * qpochhammer(&q, &q, s))
                * (q.ipow(big_n as i64 - 1) / a).ipow(s as i64);
            Ok(MassPoint::new(c * q.ipow(big_n as i64 - s as i64), checked(w, s)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentFunctional::mass_list(masses))
}

/// Largest relative moment deviation between the b-limit functional and the
/// q-Hahn functional in the variable `c^{-1} q^{-N} x`, through degree
/// `2N - 2`.
pub fn blimit_equivalence_residual<T: Real>(a: C<T>, c: C<T>, big_n: usize, q: C<T>) -> Result<f64> {
    let lim = bqj_blimit_functional(a, c, big_n, q)?.self_normalized()?;
    let cqn = c * q.ipow(big_n as i64);
    let hahn = qhahn_functional(a / cqn, c, big_n, q)?.pullback_affine(cqn, C::<T>::zero())?.self_normalized()?;
    let k = 2 * big_n - 2;
    let (x, y) = (lim.moments(k)?, hahn.moments(k)?);
    Ok(x.mu.iter().zip(&y.mu).map(|(s, t)| (*s - *t).modulus() / s.modulus().max(t.modulus()).max(1e-300)).fold(0.0, f64::max))
}

/// Root data of the root-of-unity construction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootOfUnityData<T> {
    pub r: C<T>,
    /// `r^N`.
    pub target: C<T>,
    /// `E_N` (Askey–Wilson) or the big q-Jacobi right side.
    pub rhs: C<T>,
    pub n: usize,
    /// Root from the other square-root branch (Askey–Wilson only).
    pub alternate: Option<C<T>>,
    pub branch_note: String,
}

/// `N`th root of `t` with minimal argument in `[0, 2π)`.
fn minimal_root<T: Real>(t: C<T>, n: usize) -> C<T> {
    let z = t.to_c64();
    let mut arg = z.im.atan2(z.re);
    if arg < 0.0 {
        arg += 2.0 * std::f64::consts::PI;
    }
    let rho = z.norm().powf(1.0 / n as f64);
    let th = arg / n as f64;
    C::<T>::from_parts(rho * th.cos(), rho * th.sin())
}

fn root_order<T: Real>(fam: &FamilyInstance<C<T>>) -> Result<usize> {
    match fam.q_mode() {
        QMode::RootOfUnity { n, .. } => Ok(n as usize),
        QMode::Generic => Err(Error::InvalidArgument("family is not at a root of unity".into())),
    }
}

pub fn solve_root_of_unity_r<T: Real>(fam: &FamilyInstance<C<T>>) -> Result<RootOfUnityData<T>> {
    let n = root_order(fam)?;
    let ni = n as i64;
    let p = fam.params();
    let one = C::<T>::one();
    match fam.id() {
        FamilyId::AskeyWilson => {
            let (a, b, c, d) = (p[0], p[1], p[2], p[3]);
            let den = one - (a * b * c * d).ipow(ni);
            if den.vanishes(OMEGA_TOL) {
                return Err(Error::DenominatorVanishes);
            }
            let num = a.ipow(ni) + b.ipow(ni) + c.ipow(ni) + d.ipow(ni)
                - (a * b * c).ipow(ni)
                - (a * b * d).ipow(ni)
                - (a * c * d).ipow(ni)
                - (b * c * d).ipow(ni);
            let e = num / den;
            let half = e / real::<T>(2.0);
            let s = (half * half - one).try_sqrt().ok_or(Error::RequiresFloat("square root"))?;
            let target = half + s;
            Ok(RootOfUnityData {
                r: minimal_root(target, n),
                target,
                rhs: e,
                n,
                alternate: Some(minimal_root(half - s, n)),
                branch_note: "principal square root; alternate branch is the reciprocal target".into(),
            })
        }
        FamilyId::BigQJacobi => {
            let (a, b, c) = (p[0], p[1], p[2]);
            let den = one - (a * b).ipow(ni);
            if den.vanishes(OMEGA_TOL) {
                return Err(Error::DenominatorVanishes);
            }
            let t = (a.ipow(ni) + c.ipow(ni) - (a * b).ipow(ni) - (a * c).ipow(ni)) / den;
            Ok(RootOfUnityData { r: minimal_root(t, n), target: t, rhs: t, n, alternate: None, branch_note: String::new() })
        }
        other => Err(Error::InvalidArgument(format!("no root-of-unity functional for {}", other.tag()))),
    }
}

fn check_powers<T: Real>(vals: &[(&str, C<T>)], q: C<T>, n: usize) -> Result<()> {
    for (name, v) in vals {
        for k in 0..n {
            if (*v - q.ipow(k as i64)).vanishes(1e-10) {
                return Err(Error::AssumptionViolated(format!("{name} = q^{k}")));
            }
        }
    }
    Ok(())
}

/// Mass locations of the Askey–Wilson root-of-unity functional.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AwNodes {
    /// `(r q^j + r^{-1} q^{-j}) / 2`, on the `x = (z + 1/z)/2` scale.
    Half,
    /// `r q^j + r^{-1} q^{-j}` as tabulated.
    Full,
}

/// `ρ(j)` of the root-of-unity Askey–Wilson weight, `j <= N`.
pub fn aw_rho<T: Real>(fam: &FamilyInstance<C<T>>, r: C<T>, j: usize) -> C<T> {
    let q = *fam.q();
    let p = fam.params();
    let one = C::<T>::one();
    let mut w = q.ipow(j as i64) * (one - r * r * q.ipow(2 * j as i64)) / (one - r * r);
    for a in p {
        w = w * qpochhammer(&(*a * r), &q, j) / scaled_poch(*a, r * q, q, j);
    }
    w
}

/// Root-of-unity Askey–Wilson functional (`N` masses).
pub fn aw_rootofunity_functional<T: Real>(fam: &FamilyInstance<C<T>>, data: &RootOfUnityData<T>, nodes: AwNodes) -> Result<MomentFunctional<T>> {
    expect(fam.id(), FamilyId::AskeyWilson)?;
    let n = root_order(fam)?;
    let q = *fam.q();
    let p = fam.params();
    let mut pairs = vec![("abcd", p[0] * p[1] * p[2] * p[3])];
    let names = ["ab", "ac", "ad", "bc", "bd", "cd"];
    let mut k = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            pairs.push((names[k], p[i] * p[j]));
            k += 1;
        }
    }
    check_powers(&pairs, q, n)?;
    let r = data.r;
    let scale = match nodes {
        AwNodes::Half => real::<T>(0.5),
        AwNodes::Full => C::<T>::one(),
    };
    let masses = (0..n)
        .map(|j| {
            let qj = q.ipow(j as i64);
            let x = scale * (r * qj + C::<T>::one() / (r * qj));
            Ok(MassPoint::new(x, checked(aw_rho(fam, r, j), j)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentFunctional::mass_list(masses))
}

/// `|ρ(N) - ρ(0)| / |ρ(0)|`: the weight must be `N`-periodic.
pub fn aw_rho_periodicity<T: Real>(fam: &FamilyInstance<C<T>>, data: &RootOfUnityData<T>) -> f64 {
    let r0 = aw_rho(fam, data.r, 0);
    (aw_rho(fam, data.r, data.n) - r0).modulus() / r0.modulus()
}

/// `(1 - x)/(1 - x/c)`. At `c = 1` (where `r = 1`) the first factor is `0/0`;
/// its value is the limit along `r(c)`, `r'/(r' - 1)` with
/// `r' = (1 - a^N)/(1 - (ab)^N)`.
fn shift_factor<T: Real>(x: C<T>, c: C<T>, limit: C<T>) -> C<T> {
    let one = C::<T>::one();
    if (c - one).is_zero() && (x - one).vanishes(1e-12) {
        limit
    } else {
        (one - x) / (one - x / c)
    }
}

/// Root-of-unity big q-Jacobi functional, normalized to `L(1) = 1`.
pub fn bqj_rootofunity_functional<T: Real>(fam: &FamilyInstance<C<T>>, data: &RootOfUnityData<T>) -> Result<MomentFunctional<T>> {
    expect(fam.id(), FamilyId::BigQJacobi)?;
    let n = root_order(fam)?;
    let q = *fam.q();
    let p = fam.params();
    let (a, b, c) = (p[0], p[1], p[2]);
    // c = 1 is the classical special case; its factors cancel in `shift_factor`.
    let mut conds = vec![("a", a), ("b", b), ("ab", a * b), ("ab/c", a * b / c)];
    if !(c - C::<T>::one()).is_zero() {
        conds.push(("c", c));
    }
    check_powers(&conds, q, n)?;
    let r = data.r;
    let one = C::<T>::one();
    let ni = n as i64;
    let dr = (one - a.ipow(ni)) / (one - (a * b).ipow(ni));
    let limit = dr / (dr - one);
    let mut w = one;
    let mut masses = Vec::with_capacity(n);
    for j in 0..n {
        let x = r * q.ipow(j as i64);
        masses.push(MassPoint::new(x, checked(w, j)?));
        w = w * q * shift_factor(x, c, limit) * (one - b * x / c) / (one - x / a);
    }
    let f = MomentFunctional::mass_list(masses);
    f.self_normalized()
}

/// The weights `ω_s` tabulated for `c = 1`.
pub fn bqj_c1_stated_weights<T: Real>(fam: &FamilyInstance<C<T>>) -> Result<Vec<C<T>>> {
    expect(fam.id(), FamilyId::BigQJacobi)?;
    let n = root_order(fam)?;
    let q = *fam.q();
    let (a, b) = (fam.params()[0], fam.params()[1]);
    let one = C::<T>::one();
    let ni = n as i64;
    let pref = (one - a.ipow(ni)) * (one - a * b * q) / (a * q * (b - one) * (one - (a * b).ipow(ni)));
    Ok((0..n)
        .map(|s| pref * qpochhammer(&b, &q, s) / qpochhammer(&(one / a), &q, s) * q.ipow(s as i64))
        .collect())
}

/// Values `p_0(x), …, p_n(x)` and `p_n'(x)` by running the recurrence.
fn recurrence_values<T: Real>(coeffs: &RecurrenceCoeffs<C<T>>, n: usize, x: C<T>) -> Result<(Vec<C<T>>, C<T>)> {
    let mut p = vec![C::<T>::one()];
    let (mut d_prev, mut d) = (C::<T>::zero(), C::<T>::zero());
    let mut prev = C::<T>::zero();
    for k in 0..n {
        let (b, g) = (coeffs.beta(k)?, if k == 0 { C::<T>::zero() } else { coeffs.gamma(k)? });
        let next = (x - b) * p[k] - g * prev;
        let d_next = p[k] + (x - b) * d - g * d_prev;
        prev = p[k];
        d_prev = d;
        d = d_next;
        p.push(next);
    }
    Ok((p, d))
}

/// Gauss-type functional on the zeros of `p_N`, normalized so that `L(1) = 1`.
///
/// Zeros are polished by Newton steps on the recurrence and the weights are
/// `1 / Σ_{k<N} p_k(x_s)^2 / (γ_1 ⋯ γ_k)`, which equals
/// `γ_1 ⋯ γ_{N-1} / (p_{N-1}(x_s) p_N'(x_s))` but avoids the monomial form.
pub fn christoffel_functional<T: Real>(coeffs: &RecurrenceCoeffs<C<T>>, n: usize) -> Result<MomentFunctional<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    let seq = crate::polyengine::generate_seq(coeffs, n)?;
    let zeros = roots(seq.get(n).as_poly(), DEFAULT_CLUSTER_TOL)?;
    if let Some(z) = zeros.iter().find(|z| z.multiplicity > 1) {
        return Err(Error::MultipleZero(format!("{:?}", z.location.to_c64())));
    }
    let mut h = vec![C::<T>::one()];
    for k in 1..n {
        h.push(h[k - 1] * coeffs.gamma(k)?);
    }
    let masses = zeros
        .iter()
        .enumerate()
        .map(|(s, z)| {
            let mut x = z.location;
            for _ in 0..3 {
                let (p, d) = recurrence_values(coeffs, n, x)?;
                if d.is_zero() {
                    break;
                }
                let step = p[n] / d;
                if !(step.re.is_finite() && step.im.is_finite()) {
                    break;
                }
                x = x - step;
            }
            let (p, _) = recurrence_values(coeffs, n, x)?;
            let sum = (0..n).fold(C::<T>::zero(), |acc, k| acc + p[k] * p[k] / h[k]);
            Ok(MassPoint::new(x, checked(C::<T>::one() / sum, s)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentFunctional::mass_list(masses))
}

/// Sort masses by location so two constructions can be compared pointwise.
pub fn sorted_masses<T: Real>(f: &MomentFunctional<T>) -> Vec<MassPoint<T>> {
    let mut m = f.masses().map(<[_]>::to_vec).unwrap_or_default();
    m.sort_by(|x, y| {
        let (a, b) = (x.location.to_c64(), y.location.to_c64());
        a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
    });
    m
}

/// Match masses of `f` and `g` by location; returns the common weight ratio
/// `g/f` and the largest relative deviation from it (`None` when the
/// locations differ).
pub fn weight_ratio<T: Real>(f: &MomentFunctional<T>, g: &MomentFunctional<T>, loc_tol: f64) -> Option<(C<f64>, f64)> {
    let (a, b) = (f.masses()?, g.masses()?);
    if a.len() != b.len() {
        return None;
    }
    let mut ratios = Vec::with_capacity(a.len());
    for m in a {
        let other = b.iter().find(|o| (o.location - m.location).modulus() <= loc_tol * m.location.modulus().max(1.0))?;
        ratios.push((g.normalization * other.weight).to_c64() / (f.normalization * m.weight).to_c64());
    }
    let r0 = ratios[0];
    let dev = ratios.iter().map(|r| (r - r0).norm() / r0.norm()).fold(0.0, f64::max);
    Some((r0, dev))
}

#[cfg(test)]
mod tests;
