//! Sobolev-type bilinear forms for sequences whose recurrence has vanishing
//! `γ_N`.
//!
//! When `γ_N = 0` the moment functional `L_0` of the recurrence annihilates
//! `p_N^2`, so it cannot single out the sequence. Adding terms
//! `L_k(T^{(k)} f · T^{(k)} g)`, where `T^{(k)}` lowers degrees by `k` and maps
//! `p_{n+k}` onto an orthogonal sequence of `L_k`, restores a nondegenerate
//! form. [`build_level_plan`] finds the levels, [`build_sobolev_form`] attaches
//! concrete functionals, and [`gram_check`] / [`gram_schmidt_monic`] verify
//! that the form characterizes the recurrence sequence.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{in_omega, FamilyId, FamilyInstance, QMode, OMEGA_HORIZON};
use crate::functionals::{
    aw_circle_functional, aw_degenerate_functional, aw_rootofunity_functional, bqj_blimit_functional, bqj_functional,
    bqj_rootofunity_functional, christoffel_functional, qhahn_functional, qracah_functional, solve_root_of_unity_r,
    AwNodes, BilinearForm, MomentFunctional, DEFAULT_NODES, DEFAULT_TAIL_TOL,
};
use crate::poly::{rel_coeff_diff, MonicPoly, Poly};
use crate::polyengine::{associated_seq, generate_seq, PolySeq};
use crate::qdiff::{family_operator, operator_power, regularized_power, shift_family, sqrt_q_for, OperatorKind, OperatorSpec};
use crate::qnum::{phi_terminating, qpochhammer, Regularization, SeriesParam, SeriesSpec};
use crate::scalar::{Real, Scalar};

type C<T> = Complex<T>;

/// Diagonal entries below this fraction of their rounding scale count as zero.
pub const DIAG_FLOOR: f64 = 1e-10;
/// Pivot, relative to its rounding scale, below which Gram–Schmidt reports a
/// singular minor.
pub const PIVOT_TOL: f64 = 1e-12;

/// Which construction produced a functional.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FunctionalSource {
    /// Moments of the recurrence itself.
    Canonical,
    AwCircle,
    QRacah,
    AwDegenerate,
    QHahn,
    BigQJacobiJackson,
    BigQJacobiBLimit,
    /// Gauss rule on the zeros of `p_N`.
    Christoffel,
    AwRootOfUnity,
    BigQJacobiRootOfUnity,
}

/// A composite lowering operator `T^{(k)}`.
#[derive(Clone, Debug, PartialEq)]
pub enum Chain<S> {
    /// `count` applications, the lattice advanced between them.
    Iterated { op: OperatorSpec<S>, count: usize },
    /// `times`-fold regularized `order`th power at a root of unity.
    Regularized { op: OperatorSpec<S>, order: usize, times: usize },
}

impl<S: Scalar> Chain<S> {
    pub fn apply(&self, p: &Poly<S>) -> Result<Poly<S>> {
        match self {
            Chain::Iterated { op, count } => operator_power(op, *count, p),
            Chain::Regularized { op, order, times } => {
                let mut out = p.clone();
                for _ in 0..*times {
                    out = regularized_power(op, *order, &out)?;
                }
                Ok(out)
            }
        }
    }

    /// Degree drop.
    pub fn order(&self) -> usize {
        match self {
            Chain::Iterated { count, .. } => *count,
            Chain::Regularized { order, times, .. } => order * times,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Level<T> {
    pub degree: usize,
    pub chain: Chain<C<T>>,
    /// Family of `T^{(k)} p_{n+k}`.
    pub family: FamilyInstance<C<T>>,
    /// The level functional acts on `f(-x)`.
    pub reflected: bool,
}

/// The index set `{N_0, N_1, …}` with the data for each level.
#[derive(Clone, Debug)]
pub struct LevelPlan<T> {
    pub levels: Vec<Level<T>>,
    pub n_max: usize,
    /// Levels above `n_max` were dropped.
    pub truncated: bool,
}

impl<T: Real> LevelPlan<T> {
    pub fn degrees(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.degree).collect()
    }
}

/// Levels of the form for degrees up to `n_max`.
///
/// Away from roots of unity `N_0 = min Λ` and `N_{j+1} = N_j + n`, `n` the
/// first vanishing `γ` of the family shifted `N_j` times. At a primitive
/// `N`th root of unity the levels are the multiples of `N`, each lowered by
/// the regularized `N`th power; for Askey–Wilson type operators with odd `M`
/// the odd levels are reflected.
pub fn build_level_plan<T: Real>(fam: &FamilyInstance<C<T>>, n_max: usize) -> Result<LevelPlan<T>> {
    let lambda = fam.lambda_set(n_max)?.lambda_set;
    let mut plan = LevelPlan { levels: Vec::new(), n_max, truncated: false };
    let Some(&first) = lambda.first() else {
        return Ok(plan);
    };
    let op = family_operator(fam)?;
    match fam.q_mode() {
        QMode::RootOfUnity { m, n } => {
            let order = n as usize;
            let flip = matches!(op.kind, OperatorKind::AWDividedDiff) && m % 2 == 1;
            let mut j = 1;
            while j * order <= n_max {
                plan.levels.push(Level {
                    degree: j * order,
                    chain: Chain::Regularized { op: op.clone(), order, times: j },
                    family: fam.clone(),
                    reflected: flip && j % 2 == 1,
                });
                j += 1;
            }
            plan.truncated = true;
        }
        QMode::Generic => {
            let h = sqrt_q_for(fam)?;
            let mut shifted = fam.clone();
            let mut steps = 0;
            let mut level = first;
            loop {
                while steps < level {
                    shifted = shift_family(&shifted, &h)?;
                    steps += 1;
                }
                plan.levels.push(Level {
                    degree: level,
                    chain: Chain::Iterated { op: op.clone(), count: level },
                    family: shifted.clone(),
                    reflected: false,
                });
                if level >= n_max {
                    break;
                }
                match shifted.lambda_set(n_max - level)?.lambda_set.first() {
                    Some(&k) if level + k <= n_max => level += k,
                    Some(_) => {
                        plan.truncated = true;
                        break;
                    }
                    None => break,
                }
            }
        }
    }
    Ok(plan)
}

/// One `L_k(T^{(k)} f · T^{(k)} g)` term.
#[derive(Clone, Debug)]
pub struct SobolevTerm<T> {
    pub degree: usize,
    pub chain: Chain<C<T>>,
    pub functional: MomentFunctional<T>,
    pub source: FunctionalSource,
}

/// `⟨f, g⟩ = L_0(fg) + Σ_k L_k(T^{(k)} f · T^{(k)} g)`.
#[derive(Clone, Debug)]
pub struct SobolevForm<T> {
    pub base: MomentFunctional<T>,
    pub base_source: FunctionalSource,
    pub terms: Vec<SobolevTerm<T>>,
}

impl<T: Real> SobolevForm<T> {
    /// The form `L_0(fg)` alone.
    pub fn base_only(base: MomentFunctional<T>, base_source: FunctionalSource) -> Self {
        SobolevForm { base, base_source, terms: Vec::new() }
    }
}

impl<T: Real> BilinearForm<C<T>> for SobolevForm<T> {
    fn pair(&self, p: &Poly<C<T>>, r: &Poly<C<T>>) -> Result<C<T>> {
        sobolev_apply(self, p, r)
    }

    fn abs_pair(&self, f: &Poly<C<T>>, g: &Poly<C<T>>) -> Result<f64> {
        let mut total = self.base.abs_pair(f, g)?;
        for t in &self.terms {
            if f.degree() < t.degree || g.degree() < t.degree {
                continue;
            }
            total += t.functional.abs_pair(&t.chain.apply(f)?, &t.chain.apply(g)?)?;
        }
        Ok(total)
    }
}

pub fn sobolev_apply<T: Real>(form: &SobolevForm<T>, f: &Poly<C<T>>, g: &Poly<C<T>>) -> Result<C<T>> {
    let mut total = form.base.pair(f, g)?;
    for t in &form.terms {
        if f.degree() < t.degree || g.degree() < t.degree {
            continue;
        }
        let (tf, tg) = (t.chain.apply(f)?, t.chain.apply(g)?);
        total = total + t.functional.pair(&tf, &tg)?;
    }
    Ok(total)
}

fn real_base<T: Real>(q: &C<T>) -> bool {
    let z = q.to_c64();
    z.im == 0.0 && z.re > 0.0 && z.re < 1.0
}

/// A functional of the (normal) family valid through degree `2 n_max`: the
/// circle or Jackson integral of its base form when available, otherwise a
/// Gauss rule with `n_max + 1` nodes, otherwise its moments.
pub fn level_functional<T: Real>(fam: &FamilyInstance<C<T>>, n_max: usize) -> Result<(MomentFunctional<T>, FunctionalSource)> {
    if let Some(found) = concrete_normal(fam) {
        return Ok(found);
    }
    let rec = fam.recurrence()?;
    if let Ok(f) = christoffel_functional(&rec, n_max + 1) {
        return Ok((f, FunctionalSource::Christoffel));
    }
    Ok((MomentFunctional::canonical(&rec, 2 * n_max + 2)?, FunctionalSource::Canonical))
}

fn concrete_normal<T: Real>(fam: &FamilyInstance<C<T>>) -> Option<(MomentFunctional<T>, FunctionalSource)> {
    match fam.id() {
        FamilyId::AskeyWilson if real_base(fam.q()) => {
            aw_circle_functional(fam, DEFAULT_NODES).ok().map(|f| (f, FunctionalSource::AwCircle))
        }
        FamilyId::BigQJacobi if real_base(fam.q()) => {
            bqj_functional(fam, DEFAULT_TAIL_TOL).ok().map(|f| (f, FunctionalSource::BigQJacobiJackson))
        }
        FamilyId::AskeyWilson | FamilyId::BigQJacobi => None,
        _ => {
            let bf = fam.base_form().ok()?;
            let (f, src) = concrete_normal(&bf.base)?;
            Some((pull_to_family(f, &bf.u, &bf.v).ok()?, src))
        }
    }
}

/// `L_fam(p) = L_base(p((x - v)/u))` for a base variable `u x + v`.
fn pull_to_family<T: Real>(f: MomentFunctional<T>, u: &C<T>, v: &C<T>) -> Result<MomentFunctional<T>> {
    let inv = C::<T>::one() / *u;
    f.pullback_affine(inv, -*v * inv)
}

fn christoffel<T: Real>(fam: &FamilyInstance<C<T>>, n: usize) -> Result<(MomentFunctional<T>, FunctionalSource)> {
    Ok((christoffel_functional(&fam.recurrence()?, n)?, FunctionalSource::Christoffel))
}

/// Finite functional of a family with `γ_N = 0` from the closed forms for
/// Askey–Wilson and big q-Jacobi (directly or through the base form).
fn concrete_degenerate<T: Real>(fam: &FamilyInstance<C<T>>, n: usize) -> Result<(MomentFunctional<T>, FunctionalSource)> {
    let q = *fam.q();
    let p = fam.params();
    let hits = |x: C<T>| in_omega(&x, &q, OMEGA_HORIZON) == Some(n);
    match fam.id() {
        FamilyId::AskeyWilson => {
            if in_omega(&(p[0] * p[0]), &q, OMEGA_HORIZON).is_some_and(|m| m + 2 <= n) {
                Ok((aw_degenerate_functional(fam)?, FunctionalSource::AwDegenerate))
            } else {
                Ok((qracah_functional(fam)?, FunctionalSource::QRacah))
            }
        }
        FamilyId::BigQJacobi => {
            let (a, b, c) = (p[0], p[1], p[2]);
            let f = if hits(c) {
                (qhahn_functional(a, b, n, q)?, FunctionalSource::QHahn)
            } else if hits(a) {
                (qhahn_functional(c, a * b / c, n, q)?, FunctionalSource::QHahn)
            } else if hits(b) {
                (bqj_blimit_functional(a, c, n, q)?, FunctionalSource::BigQJacobiBLimit)
            } else if !c.is_zero() && hits(a * b / c) {
                (bqj_blimit_functional(c, a, n, q)?, FunctionalSource::BigQJacobiBLimit)
            } else {
                return Err(Error::AssumptionViolated(format!("no closed form for γ_{n} = 0")));
            };
            Ok(f)
        }
        _ => {
            let bf = fam.base_form()?;
            let (f, src) = concrete_degenerate(&bf.base, n)?;
            Ok((pull_to_family(f, &bf.u, &bf.v)?, src))
        }
    }
}

/// The functional `L_0`: orthogonalizing the family through degree `N - 1`
/// when `γ_N = 0`, or the whole family when it is normal.
pub fn base_functional<T: Real>(fam: &FamilyInstance<C<T>>, n_max: usize) -> Result<(MomentFunctional<T>, FunctionalSource)> {
    let lambda = fam.lambda_set(n_max)?.lambda_set;
    if let QMode::RootOfUnity { n, .. } = fam.q_mode() {
        return match fam.id() {
            FamilyId::AskeyWilson => {
                let data = solve_root_of_unity_r(fam)?;
                Ok((aw_rootofunity_functional(fam, &data, AwNodes::Half)?, FunctionalSource::AwRootOfUnity))
            }
            FamilyId::BigQJacobi => {
                let data = solve_root_of_unity_r(fam)?;
                Ok((bqj_rootofunity_functional(fam, &data)?, FunctionalSource::BigQJacobiRootOfUnity))
            }
            _ => christoffel(fam, n as usize),
        };
    }
    match lambda.first() {
        None => level_functional(fam, n_max),
        Some(&n) => concrete_degenerate(fam, n).or_else(|_| christoffel(fam, n)),
    }
}

/// Attach functionals to the plan. Root-of-unity levels reuse `L_0`
/// (reflected where the plan says so); other levels use the shifted family's
/// own functional.
pub fn build_sobolev_form<T: Real>(fam: &FamilyInstance<C<T>>, plan: &LevelPlan<T>) -> Result<SobolevForm<T>> {
    let (base, base_source) = base_functional(fam, plan.n_max)?;
    let root = matches!(fam.q_mode(), QMode::RootOfUnity { .. });
    let mut terms = Vec::with_capacity(plan.levels.len());
    for level in &plan.levels {
        let (functional, source) = if root {
            (base.clone(), base_source)
        } else {
            base_functional(&level.family, plan.n_max - level.degree)?
        };
        let functional = if level.reflected {
            functional.pullback_affine(-C::<T>::one(), C::<T>::zero())?
        } else {
            functional
        };
        terms.push(SobolevTerm { degree: level.degree, chain: level.chain.clone(), functional, source });
    }
    Ok(SobolevForm { base, base_source, terms })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GramReport {
    pub n_max: usize,
    /// `max |G_nm| / sqrt(|G_nn G_mm|)` over `m < n`.
    pub max_offdiag_rel: f64,
    /// `max |G_nm|` over its rounding scale, for `m < n`.
    pub max_offdiag_scaled: f64,
    /// `min |G_nn| / scale_n`, `scale_n` the modulus pairing of `p_n` with itself.
    pub min_diag_rel: f64,
    pub min_diag_abs: f64,
    /// First degree whose diagonal entry is below the floor.
    pub zero_diag_at: Option<usize>,
    pub diag: Vec<[f64; 2]>,
    pub pass: bool,
}

/// Gram matrix of `seq` under `form`, judged with off-diagonal tolerance `tol`.
/// A diagonal entry counts as zero when it is below [`DIAG_FLOOR`] times its
/// own rounding scale.
pub fn gram_check<S: Scalar, F: BilinearForm<S> + ?Sized>(form: &F, seq: &PolySeq<S>, n_max: usize, tol: f64) -> Result<GramReport> {
    let g = crate::functionals::gram_matrix(form, seq, n_max)?;
    let diag: Vec<f64> = (0..=n_max).map(|n| g[n][n].modulus()).collect();
    let mut rel = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let p = seq.get(n).as_poly();
        let scale = form.abs_pair(p, p)?;
        rel.push(if scale > 0.0 { diag[n] / scale } else { 0.0 });
    }
    let zero_diag_at = rel.iter().position(|d| *d <= DIAG_FLOOR);
    let (mut max_offdiag_rel, mut max_offdiag_scaled) = (0.0f64, 0.0f64);
    for n in 1..=n_max {
        for m in 0..n {
            let v = g[n][m].modulus();
            let den = (diag[n] * diag[m]).sqrt();
            max_offdiag_rel = max_offdiag_rel.max(if den > 0.0 { v / den } else { f64::INFINITY });
            let scale = form.abs_pair(seq.get(n).as_poly(), seq.get(m).as_poly())?;
            if scale > 0.0 {
                max_offdiag_scaled = max_offdiag_scaled.max(v / scale);
            }
        }
    }
    Ok(GramReport {
        n_max,
        max_offdiag_rel,
        max_offdiag_scaled,
        min_diag_rel: rel.iter().copied().fold(f64::INFINITY, f64::min),
        min_diag_abs: diag.iter().copied().fold(f64::INFINITY, f64::min),
        zero_diag_at,
        diag: (0..=n_max)
            .map(|n| {
                let z = g[n][n].to_c64();
                [z.re, z.im]
            })
            .collect(),
        pass: zero_diag_at.is_none() && max_offdiag_rel <= tol,
    })
}

/// Monic polynomials orthogonal under `form`, by Gram–Schmidt on the Krylov
/// vectors `x p_{n-1}` with one reorthogonalization pass.
pub fn gram_schmidt_monic<S: Scalar, F: BilinearForm<S> + ?Sized>(form: &F, n_max: usize) -> Result<Vec<MonicPoly<S>>> {
    let mut polys: Vec<Poly<S>> = vec![Poly::constant(S::one())];
    let mut norms = vec![form.pair(&polys[0], &polys[0])?];
    if norms[0].modulus() <= PIVOT_TOL * form.abs_pair(&polys[0], &polys[0])? {
        return Err(Error::SingularMinor { degree: 0 });
    }
    let x = Poly::x();
    for n in 1..=n_max {
        let mut v = &x * &polys[n - 1];
        for _ in 0..2 {
            for k in 0..n {
                let c = form.pair(&v, &polys[k])? / norms[k].clone();
                v = &v - &polys[k].scale(&c);
            }
        }
        let mut c = v.into_coeffs();
        c.truncate(n + 1);
        let v = Poly::new(c);
        let d = form.pair(&v, &v)?;
        if d.modulus() <= PIVOT_TOL * form.abs_pair(&v, &v)? {
            return Err(Error::SingularMinor { degree: n });
        }
        polys.push(v);
        norms.push(d);
    }
    polys.into_iter().map(Poly::into_monic).collect()
}

/// Largest relative coefficient difference between the Gram–Schmidt sequence
/// of `form` and the recurrence sequence, through `n_max`.
pub fn characterization_residual<S: Scalar, F: BilinearForm<S> + ?Sized>(form: &F, seq: &PolySeq<S>, n_max: usize) -> Result<f64> {
    let gs = gram_schmidt_monic(form, n_max)?;
    Ok(gs.iter().zip(seq.polys()).map(|(a, b)| rel_coeff_diff(a.as_poly(), b.as_poly())).fold(0.0, f64::max))
}

/// The `N`th associated family listed for a finite family, as the family and
/// the scale `u` with `p_n^{(N)}(x) ∝ r_n(u x)`.
#[derive(Clone, Debug)]
pub struct AssociatedRow<S> {
    pub family: FamilyInstance<S>,
    pub u: S,
}

/// Tabulated associated family of a finite family whose size parameter is
/// `N - 1` (so that `γ_N = 0`).
pub fn associated_family<S: Scalar>(fam: &FamilyInstance<S>) -> Result<Option<(usize, AssociatedRow<S>)>> {
    use FamilyId as F;
    let p = fam.params();
    let q = fam.q().clone();
    let size = |v: &S| -> Result<usize> {
        v.as_integer()
            .filter(|k| *k >= 0)
            .map(|k| k as usize + 1)
            .ok_or_else(|| Error::InvalidArgument("size parameter must be a nonnegative integer".into()))
    };
    let sqrt = |v: S| v.try_sqrt().ok_or(Error::RequiresFloat("square root"));
    let one = S::one;
    let two = S::from_int(2);
    let (n, id, params, u) = match fam.id() {
        F::QHahn => {
            let n = size(&p[2])?;
            let qn = q.ipow(n as i64);
            (n, F::BigQJacobi, vec![p[0].clone() * qn.clone(), p[1].clone() * qn.clone(), qn.clone()], qn)
        }
        F::DualQHahn => {
            let n = size(&p[2])?;
            let qn = q.ipow(n as i64);
            let gd = p[0].clone() * p[1].clone();
            let s = sqrt(gd.clone() * q.clone())?;
            let params = vec![qn * s.clone(), sqrt(q.clone() / gd)?, sqrt(p[0].clone() * q.clone() / p[1].clone())?];
            (n, F::ContinuousDualQHahn, params, one() / (two * s))
        }
        F::QKrawtchouk => {
            let n = size(&p[1])?;
            let qn = q.ipow(n as i64);
            (n, F::BigQJacobi, vec![qn.clone(), -p[0].clone() * q.ipow(n as i64 - 1), S::zero()], qn)
        }
        F::QuantumQKrawtchouk => {
            let n = size(&p[1])?;
            let qn = q.ipow(n as i64);
            (n, F::QMeixner, vec![qn.clone(), -one() / (p[0].clone() * qn.clone())], qn)
        }
        F::AffineQKrawtchouk => {
            let n = size(&p[1])?;
            let qn = q.ipow(n as i64);
            (n, F::BigQLaguerre, vec![p[0].clone() * qn.clone(), qn.clone()], qn)
        }
        F::DualQKrawtchouk => {
            let n = size(&p[1])?;
            let c = p[0].clone();
            let s = sqrt(c.clone() * q.ipow(1 - n as i64))?;
            let params = vec![sqrt(c.clone() * q.ipow(n as i64 + 1))?, sqrt(q.ipow(n as i64 + 1) / c)?, S::zero()];
            (n, F::ContinuousDualQHahn, params, one() / (two * s))
        }
        _ => return Ok(None),
    };
    let family = FamilyInstance::unchecked(id, params, q, fam.q_mode())?;
    Ok(Some((n, AssociatedRow { family, u })))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorizationReport {
    pub n: usize,
    /// `max_n rel |p_{n+N} - p_N p_n^{(N)}|`.
    pub residual: f64,
    /// Largest relative coefficient difference between the tabulated
    /// associated family (monic) and the associated sequence.
    pub associated_family_match: Option<f64>,
}

/// Check `p_{n+N} = p_N p_n^{(N)}` for `n + N <= n_max`, and the tabulated
/// associated family when one is listed.
pub fn factorization_check<S: Scalar>(fam: &FamilyInstance<S>, big_n: usize, n_max: usize) -> Result<FactorizationReport> {
    if big_n == 0 || n_max < big_n {
        return Err(Error::InvalidArgument("need 1 <= N <= n_max".into()));
    }
    let rec = fam.recurrence()?;
    let scale = rec.gamma(big_n.saturating_sub(1).max(1))?.modulus().max(1.0);
    if !rec.gamma(big_n)?.vanishes(1e-10 * scale) {
        return Err(Error::GammaNotZero { n: big_n });
    }
    let seq = generate_seq(&rec, n_max)?;
    let assoc = associated_seq(&rec, big_n, n_max - big_n)?;
    let pn = seq.get(big_n).as_poly();
    let residual = (0..=n_max - big_n)
        .map(|n| rel_coeff_diff(&(pn * assoc.get(n).as_poly()), seq.get(n + big_n).as_poly()))
        .fold(0.0, f64::max);
    let associated_family_match = match associated_family(fam)? {
        Some((n, row)) if n == big_n => {
            let mut worst = 0.0f64;
            for k in 0..=n_max - big_n {
                let r = row.family.sequence(k)?.get(k).as_poly().compose_affine(&row.u, &S::zero());
                let r = r.into_monic()?;
                worst = worst.max(rel_coeff_diff(r.as_poly(), assoc.get(k).as_poly()));
            }
            Some(worst)
        }
        _ => None,
    };
    Ok(FactorizationReport { n: big_n, residual, associated_family_match })
}

/// `max rel |p_{ℓN+m} - p_N^ℓ p_m|` over `ℓ <= ell_max`, `m < N`.
pub fn power_factorization_residual<S: Scalar>(fam: &FamilyInstance<S>, big_n: usize, ell_max: usize) -> Result<f64> {
    let seq = fam.sequence(big_n * (ell_max + 1))?;
    let pn = seq.get(big_n).as_poly();
    let mut worst = 0.0f64;
    let mut power = Poly::constant(S::one());
    for ell in 0..=ell_max {
        for m in 0..big_n {
            let lhs = seq.get(ell * big_n + m).as_poly();
            worst = worst.max(rel_coeff_diff(&(&power * seq.get(m).as_poly()), lhs));
        }
        power = &power * pn;
    }
    Ok(worst)
}

/// Both sides of the factorization of the normalized terminating series
/// `(q^{1-N};q)_{n+N} φ(q^{-n-N}, a; q^{1-N}, b | q; z)`.
pub fn hyper_factorization_sides<S: Scalar>(a: &[S], b: &[S], q: &S, z: &S, n: usize, big_n: usize) -> Result<(S, S)> {
    let qn = q.ipow(big_n as i64);
    let low = q.ipow(1 - big_n as i64);
    let singles = |v: &[S], f: &S| v.iter().map(|x| SeriesParam::Single(x.clone() * f.clone())).collect::<Vec<_>>();
    let dens = |f: &S, first: S| std::iter::once(first).chain(b.iter().map(|x| x.clone() * f.clone())).collect::<Vec<_>>();
    let one = S::one();
    let mut lhs = SeriesSpec::new(singles(a, &one), dens(&one, low.clone()), q.clone(), z.clone(), n + big_n);
    lhs.regularize = Some(Regularization { denominator: 0, length: n + big_n });
    let mut head = SeriesSpec::new(singles(a, &one), dens(&one, low), q.clone(), z.clone(), big_n);
    head.regularize = Some(Regularization { denominator: 0, length: big_n });
    let tail = SeriesSpec::new(singles(a, &qn), dens(&qn, qn.clone() * q.clone()), q.clone(), z.clone(), n);
    let factor = q.ipow(-((n * big_n) as i64)) * qpochhammer(&(qn * q.clone()), q, n);
    Ok((phi_terminating(&lhs)?, factor * phi_terminating(&head)? * phi_terminating(&tail)?))
}
