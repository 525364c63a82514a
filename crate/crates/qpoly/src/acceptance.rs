//! The acceptance suite: twelve criteria, each a list of named checks.
//!
//! Every criterion runs on a primary family (overridable, so that job files
//! can drive it) plus fixed companion instances. Tolerances are part of the
//! criterion and cannot be overridden.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{identity_residual, FamilyId, FamilyInstance, Identity, QMode};
use crate::functionals::{
    aw_circle_functional, aw_degenerate_functional, aw_limit_weights, aw_mu, aw_rootofunity_functional,
    aw_squared_norm, blimit_equivalence_residual, bqj_blimit_functional, bqj_c1_stated_weights, bqj_functional,
    bqj_rootofunity_functional, christoffel_functional, gram_matrix, moment_mismatch, qhahn_functional,
    qracah_functional, scaled_offdiag, solve_root_of_unity_r, weight_ratio, AwNodes, MomentFunctional,
    DEFAULT_NODES, DEFAULT_TAIL_TOL,
};
use crate::poly::rel_coeff_diff;
use crate::polyengine::{roots, DEFAULT_CLUSTER_TOL};
use crate::qdiff::{
    aw_zform_eigen_check, family_operator, shift_identity_residual, operator_table_eigen_check, Realization, RowStatus,
    OPERATOR_TABLE,
};
use crate::scalar::{c64, CExact, Scalar, C64};
use crate::sobolev::{
    build_level_plan, build_sobolev_form, characterization_residual, factorization_check, gram_check,
    hyper_factorization_sides, power_factorization_residual,
};

/// How `q` is given.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum QSpec {
    Value(C64),
    RootOfUnity { m: u32, n: u32 },
}

/// A family instance independent of the scalar type.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilySpec {
    pub family: FamilyId,
    pub params: Vec<C64>,
    pub q: QSpec,
}

impl FamilySpec {
    pub fn real(family: FamilyId, params: &[f64], q: f64) -> Self {
        FamilySpec { family, params: params.iter().map(|&x| c64(x, 0.0)).collect(), q: QSpec::Value(c64(q, 0.0)) }
    }

    pub fn root_of_unity(family: FamilyId, params: &[f64], m: u32, n: u32) -> Self {
        FamilySpec { family, params: params.iter().map(|&x| c64(x, 0.0)).collect(), q: QSpec::RootOfUnity { m, n } }
    }

    pub fn build<S: Scalar>(&self) -> Result<FamilyInstance<S>> {
        let params = self.params.iter().map(|z| S::from_parts(z.re, z.im)).collect();
        match self.q {
            QSpec::Value(q) => FamilyInstance::new(self.family, params, S::from_parts(q.re, q.im)),
            QSpec::RootOfUnity { m, n } => FamilyInstance::at_root_of_unity(self.family, params, m, n),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Bound {
    AtMost,
    AtLeast,
}

/// One measured quantity against its bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub kind: Bound,
    /// Informational checks are reported but do not decide the criterion.
    pub gating: bool,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, bound, kind: Bound::AtMost, gating: true, pass: value <= bound }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, bound, kind: Bound::AtLeast, gating: true, pass: value >= bound }
    }

    /// A yes/no condition, recorded as `1 >= 1` or `0 >= 1`.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Check::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    pub fn info(mut self) -> Self {
        self.gating = false;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl CriterionReport {
    fn new(id: u8, checks: Vec<Check>, notes: Vec<String>) -> Self {
        let pass = !checks.is_empty() && checks.iter().filter(|c| c.gating).all(|c| c.pass);
        CriterionReport { id, title: TITLES[id as usize - 1], pass, checks, notes }
    }

    /// `PASS`/`FAIL`, id, title and the failing gating checks.
    pub fn summary_line(&self) -> String {
        let failed: Vec<String> = self
            .checks
            .iter()
            .filter(|c| c.gating && !c.pass)
            .map(|c| format!("{} = {:.3e}", c.name, c.value))
            .collect();
        let status = if self.pass { "PASS" } else { "FAIL" };
        if failed.is_empty() {
            format!("{status} criterion {:>2}: {}", self.id, self.title)
        } else {
            format!("{status} criterion {:>2}: {} [{}]", self.id, self.title, failed.join("; "))
        }
    }
}

pub const TITLES: [&str; 12] = [
    "representation consistency",
    "norm/recurrence identity",
    "circle-functional Gram",
    "oracle equivalence",
    "degenerate Askey-Wilson, q-Racah block",
    "degenerate Askey-Wilson, derivative masses",
    "big q-Jacobi degenerate suite",
    "root of unity",
    "factorization",
    "identity suite",
    "operator suite",
    "negative control",
];

/// Seed for the random sample points of criterion 9.
pub const DEFAULT_SEED: u64 = 20_240_611;

/// Primary instance of each criterion.
pub fn default_spec(id: u8) -> Option<FamilySpec> {
    use FamilyId as F;
    let q4 = 0.5f64.powi(-4);
    Some(match id {
        1..=4 | 10 | 11 => FamilySpec::real(F::AskeyWilson, &[0.3, -0.2, 0.4, 0.25], 0.55),
        5 => FamilySpec::real(F::AskeyWilson, &[3.2, 5.0, 0.35, 0.15], 0.5),
        6 => FamilySpec::real(F::AskeyWilson, &[2.0, 16.0, 0.35, 0.15], 0.5),
        7 => FamilySpec::real(F::BigQJacobi, &[0.4, 0.3, q4], 0.5),
        8 => FamilySpec::root_of_unity(F::AskeyWilson, &[0.3, 0.25, -0.2, 0.15], 1, 5),
        9 => FamilySpec::real(F::QHahn, &[0.4, 0.3, 3.0], 0.5),
        12 => FamilySpec::real(F::QHahn, &[0.4, 0.3, 3.0], 0.5),
        _ => return None,
    })
}

/// Run one criterion. `primary` replaces the default primary instance and
/// `n_max` the default top degree where the criterion has one.
pub fn run_criterion(id: u8, primary: Option<&FamilySpec>, n_max: Option<usize>, seed: u64) -> Result<CriterionReport> {
    let spec = match primary {
        Some(s) => s.clone(),
        None => default_spec(id).ok_or_else(|| Error::InvalidArgument(format!("no criterion {id}")))?,
    };
    let mut notes = Vec::new();
    let checks = match id {
        1 => representation(&spec, n_max.unwrap_or(12))?,
        2 => norm_identity(&spec, n_max.unwrap_or(10))?,
        3 => circle_gram(&spec, n_max.unwrap_or(8))?,
        4 => oracle_equivalence(&spec)?,
        5 => degenerate_racah(&spec, n_max.unwrap_or(10))?,
        6 => degenerate_derivative(&spec, &mut notes)?,
        7 => bqj_suite(&spec, n_max.unwrap_or(9))?,
        8 => root_of_unity(&spec, &mut notes)?,
        9 => factorization(&spec, n_max.unwrap_or(6), seed)?,
        10 => identity_suite()?,
        11 => operator_suite(&spec, &mut notes)?,
        12 => negative_control(&spec)?,
        _ => return Err(Error::InvalidArgument(format!("no criterion {id}"))),
    };
    Ok(CriterionReport::new(id, checks, notes))
}

/// All twelve criteria with their defaults. A criterion that errors is
/// reported as failed with the error in its notes.
pub fn run_all(seed: u64) -> Vec<CriterionReport> {
    (1..=12)
        .map(|id| {
            run_criterion(id, None, None, seed).unwrap_or_else(|e| CriterionReport {
                id,
                title: TITLES[id as usize - 1],
                pass: false,
                checks: Vec::new(),
                notes: vec![format!("error: {e}")],
            })
        })
        .collect()
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn representation(primary: &FamilySpec, n_max: usize) -> Result<Vec<Check>> {
    use FamilyId as F;
    let qr = FamilySpec::real(F::QRacah, &[0.3, 0.2, 0.25, 0.5], 0.5);
    let qh = FamilySpec::real(F::QHahn, &[0.4, 0.3, 14.0], 0.5);
    let dqh = FamilySpec::real(F::DualQHahn, &[0.25, 0.5, 14.0], 0.5);
    let specs = [primary.clone(), FamilySpec::real(F::BigQJacobi, &[0.4, 0.3, -0.7], 0.5), qr.clone(), qh.clone(), dqh.clone()];
    let mut checks = Vec::new();
    for spec in &specs {
        let fam = spec.build::<CExact>()?;
        let seq = fam.sequence(n_max)?;
        let mut worst = 0.0f64;
        for n in 0..=n_max {
            worst = worst.max(rel_coeff_diff(seq.get(n).as_poly(), fam.hyper_poly(n)?.as_poly()));
        }
        checks.push(Check::at_most(format!("{} recurrence vs series, n <= {n_max}", fam.id().tag()), worst, 1e-9));
    }
    let pts: Vec<CExact> = [0.13, -0.41, 0.77, -0.9, 0.5].iter().map(|&x| CExact::from_real(x)).collect();
    for (ident, spec) in [(Identity::QrToAw, qr), (Identity::QhToBqj, qh), (Identity::DqhToCdqh, dqh)] {
        let res = identity_residual(ident, &spec.build::<CExact>()?, n_max, &pts)?;
        checks.push(Check::at_most(format!("{} map, n <= {n_max}", ident.name()), res, 1e-9));
    }
    Ok(checks)
}

fn norm_identity(spec: &FamilySpec, n_max: usize) -> Result<Vec<Check>> {
    let fam = spec.build::<C64>()?;
    let rec = fam.recurrence()?;
    let mut worst = 0.0f64;
    for n in 1..=n_max {
        let ratio = aw_squared_norm(&fam, n)? / aw_squared_norm(&fam, n - 1)?;
        worst = worst.max(rel(rec.gamma(n)?, ratio));
    }
    Ok(vec![Check::at_most(format!("gamma_n vs norm ratio, n <= {n_max}"), worst, 1e-9)])
}

fn circle_gram(spec: &FamilySpec, n_max: usize) -> Result<Vec<Check>> {
    let fam = spec.build::<C64>()?;
    let seq = fam.sequence(n_max)?;
    let fun = aw_circle_functional(&fam, DEFAULT_NODES)?;
    let g = gram_matrix(&fun, &seq, n_max)?;
    let scale = (0..=n_max).map(|n| g[n][n].norm()).fold(0.0, f64::max);
    let (mut off, mut diag) = (0.0f64, 0.0f64);
    for n in 0..=n_max {
        diag = diag.max(rel(g[n][n], aw_squared_norm(&fam, n)?));
        for m in 0..n {
            off = off.max(g[n][m].norm() / scale);
        }
    }
    let fine = aw_circle_functional(&fam, 2 * DEFAULT_NODES)?;
    let g2 = gram_matrix(&fine, &seq, n_max)?;
    let mut drift = 0.0f64;
    for n in 0..=n_max {
        for m in 0..=n_max {
            drift = drift.max((g[n][m] - g2[n][m]).norm() / scale);
        }
    }
    Ok(vec![
        Check::at_most("off-diagonal / diagonal scale", off, 1e-8),
        Check::at_most("diagonal vs squared norm", diag, 1e-8),
        Check::at_most("change under node doubling", drift, 1e-10),
    ])
}

fn oracle_equivalence(aw: &FamilySpec) -> Result<Vec<Check>> {
    use FamilyId as F;
    let q = c64(0.5, 0.0);
    let q4 = 0.5f64.powi(-4);
    let fam = |s: FamilySpec| s.build::<C64>();
    let mut cases: Vec<(String, MomentFunctional<f64>, FamilyInstance<C64>, usize)> = Vec::new();
    let circle = fam(aw.clone())?;
    cases.push(("Askey-Wilson circle".into(), aw_circle_functional(&circle, DEFAULT_NODES)?, circle, 16));
    let racah = fam(FamilySpec::real(F::AskeyWilson, &[3.2, 5.0, 0.35, 0.15], 0.5))?;
    cases.push(("q-Racah".into(), qracah_functional(&racah)?, racah, 8));
    let lim = fam(FamilySpec::real(F::AskeyWilson, &[2.0, 16.0, 0.35, 0.15], 0.5))?;
    cases.push(("Askey-Wilson derivative masses".into(), aw_degenerate_functional(&lim)?, lim, 10));
    let jackson = fam(FamilySpec::real(F::BigQJacobi, &[0.4, 0.3, -0.7], 0.5))?;
    cases.push(("big q-Jacobi Jackson".into(), bqj_functional(&jackson, DEFAULT_TAIL_TOL)?, jackson.clone(), 16));
    let hahn = fam(FamilySpec::real(F::BigQJacobi, &[0.4, 0.3, q4], 0.5))?;
    cases.push(("q-Hahn".into(), qhahn_functional(c64(0.4, 0.0), c64(0.3, 0.0), 4, q)?, hahn, 6));
    let blim = fam(FamilySpec::real(F::BigQJacobi, &[0.4, q4, -0.7], 0.5))?;
    cases.push(("big q-Jacobi b-limit".into(), bqj_blimit_functional(c64(0.4, 0.0), c64(-0.7, 0.0), 4, q)?, blim, 6));
    cases.push(("Christoffel, 5 nodes".into(), christoffel_functional(&jackson.recurrence()?, 5)?, jackson, 8));
    let awr = fam(FamilySpec::root_of_unity(F::AskeyWilson, &[0.3, 0.25, -0.2, 0.15], 1, 5))?;
    let data = solve_root_of_unity_r(&awr)?;
    cases.push(("Askey-Wilson root of unity".into(), aw_rootofunity_functional(&awr, &data, AwNodes::Half)?, awr, 8));
    for c in [-0.7, 1.0] {
        let bqr = fam(FamilySpec::root_of_unity(F::BigQJacobi, &[0.4, 0.3, c], 1, 5))?;
        let data = solve_root_of_unity_r(&bqr)?;
        cases.push((format!("big q-Jacobi root of unity, c = {c}"), bqj_rootofunity_functional(&bqr, &data)?, bqr, 8));
    }
    cases
        .into_iter()
        .map(|(name, f, fam, k)| Ok(Check::at_most(format!("{name}, degree <= {k}"), moment_mismatch(&f, &fam.recurrence()?, k)?, 1e-8)))
        .collect()
}

fn sobolev_checks(fam: &FamilyInstance<C64>, n_max: usize, label: &str) -> Result<Vec<Check>> {
    let plan = build_level_plan(fam, n_max)?;
    let form = build_sobolev_form(fam, &plan)?;
    let seq = fam.sequence(n_max)?;
    let rep = gram_check(&form, &seq, n_max, 1e-7)?;
    let zero_floor = crate::sobolev::DIAG_FLOOR;
    Ok(vec![
        Check::at_most(format!("{label} Sobolev off-diagonal, n <= {n_max}"), rep.max_offdiag_rel, 1e-7),
        Check::at_least(format!("{label} Sobolev diagonal / rounding scale"), rep.min_diag_rel, zero_floor),
        Check::at_most(format!("{label} Gram-Schmidt vs recurrence"), characterization_residual(&form, &seq, n_max)?, 1e-7),
    ])
}

fn degenerate_racah(spec: &FamilySpec, n_max: usize) -> Result<Vec<Check>> {
    let fam = spec.build::<C64>()?;
    let lambda = fam.lambda_set(n_max)?.lambda_set;
    let big_n = *lambda.first().ok_or(Error::AssumptionViolated("no vanishing gamma".into()))?;
    let fun = qracah_functional(&fam)?;
    let seq = fam.sequence(n_max)?;
    let low = gram_check(&fun, &seq, big_n - 1, 1e-7)?;
    let mut checks = vec![
        Check::holds(format!("gamma_{big_n} flagged zero (N = 5)"), big_n == 5),
        Check::at_least(format!("q-Racah diagonal / rounding scale, n <= {}", big_n - 1), low.min_diag_rel, crate::sobolev::DIAG_FLOOR),
    ];
    checks.extend(sobolev_checks(&fam, n_max, "")?);
    Ok(checks)
}

fn degenerate_derivative(spec: &FamilySpec, notes: &mut Vec<String>) -> Result<Vec<Check>> {
    let fam = spec.build::<C64>()?;
    let q = *fam.q();
    let a = fam.params()[0];
    let m = crate::families::in_omega(&(a * a), &q, crate::families::OMEGA_HORIZON)
        .ok_or(Error::AssumptionViolated("a^2 is not q^-M".into()))?;
    let weights = aw_limit_weights(&fam)?;
    let big_n = weights.len();
    let scale = weights[0].0.norm();
    let mut checks = Vec::new();
    let vanishing = (m + 1..big_n).map(|j| weights[j].0.norm() / scale).fold(0.0, f64::max);
    checks.push(Check::at_most(format!("|A_j(a)| / |A_0(a)|, j = {}..{}", m + 1, big_n - 1), vanishing, 1e-12));
    let pairing = (0..=m as i64).map(|j| rel(aw_mu(a, q, j), aw_mu(a, q, m as i64 - j))).fold(0.0, f64::max);
    checks.push(Check::at_most("mu_j(a) = mu_{M-j}(a)", pairing, 1e-12));
    let fun = aw_degenerate_functional(&fam)?;
    let seq = fam.sequence(big_n)?;
    checks.push(Check::at_most(format!("orthogonality m < n <= {big_n} (rounding scale)"), scaled_offdiag(&fun, &seq, big_n)?, 1e-12));
    let zeros = roots(seq.get(big_n).as_poly(), DEFAULT_CLUSTER_TOL)?;
    let mut pattern = Vec::new();
    let mut total = 0;
    for z in &zeros {
        total += z.multiplicity;
        let label = (0..big_n as i64)
            .find(|&j| (aw_mu(a, q, j) - z.location).norm() < 1e-6 * z.location.norm().max(1.0))
            .map_or_else(|| format!("{:.6}", z.location), |j| format!("mu_{j}"));
        pattern.push(format!("{label} x{}", z.multiplicity));
    }
    notes.push(format!("zeros of p_{big_n}: {}", pattern.join(", ")));
    let doubles = zeros.iter().filter(|z| z.multiplicity == 2).count();
    checks.push(Check::holds(format!("p_{big_n} has double and simple zeros, total degree {big_n}"), doubles > 0 && total == big_n && zeros.iter().any(|z| z.multiplicity == 1)));
    Ok(checks)
}

fn bqj_suite(primary: &FamilySpec, n_max: usize) -> Result<Vec<Check>> {
    let q4 = 0.5f64.powi(-4);
    let specs = [
        primary.clone(),
        FamilySpec::real(FamilyId::BigQJacobi, &[q4, 0.3, -0.7], 0.5),
        FamilySpec::real(FamilyId::BigQJacobi, &[0.4, q4, -0.7], 0.5),
        FamilySpec::real(FamilyId::BigQJacobi, &[0.4, 14.0, 0.35], 0.5),
    ];
    let mut checks = Vec::new();
    for (k, spec) in specs.iter().enumerate() {
        checks.extend(sobolev_checks(&spec.build()?, n_max, &format!("subcase {}:", k + 1))?);
    }
    let q = c64(0.5, 0.0);
    checks.push(Check::at_most("b-limit vs mapped q-Hahn moments", blimit_equivalence_residual(c64(0.4, 0.0), c64(-0.7, 0.0), 4, q)?, 1e-10));
    Ok(checks)
}

fn root_of_unity(spec: &FamilySpec, notes: &mut Vec<String>) -> Result<Vec<Check>> {
    let fam = spec.build::<C64>()?;
    let QMode::RootOfUnity { n, .. } = fam.q_mode() else {
        return Err(Error::InvalidArgument("criterion needs a root of unity".into()));
    };
    let n = n as usize;
    let rec = fam.recurrence()?;
    let mut checks = vec![Check::at_most(format!("|gamma_{n}|"), rec.gamma(n)?.norm(), 1e-12)];
    let data = solve_root_of_unity_r(&fam)?;
    checks.push(Check::at_most(format!("|r^{n} - target|"), (crate::scalar::Scalar::ipow(&data.r, n as i64) - data.target).norm(), 1e-12));
    let fun = aw_rootofunity_functional(&fam, &data, AwNodes::Half)?;
    let seq = fam.sequence(3 * n)?;
    let low = gram_check(&fun, &seq, n - 1, 1e-7)?;
    checks.push(Check::at_least(format!("diagonal / rounding scale, n <= {}", n - 1), low.min_diag_rel, crate::sobolev::DIAG_FLOOR));
    let ch = christoffel_functional(&rec, n)?;
    let dev = weight_ratio(&fun, &ch, 1e-8).map_or(f64::INFINITY, |(_, d)| d);
    checks.push(Check::at_most("Christoffel vs r-formula weights (common constant)", dev, 1e-8));

    let bqj = FamilySpec::root_of_unity(FamilyId::BigQJacobi, &[0.4, 0.3, 1.0], 1, n as u32).build::<C64>()?;
    let bdata = solve_root_of_unity_r(&bqj)?;
    let bfun = bqj_rootofunity_functional(&bqj, &bdata)?;
    let stated = bqj_c1_stated_weights(&bqj)?;
    let masses = bfun.masses().ok_or_else(|| Error::InvalidArgument("expected a mass list".into()))?;
    let weight_at = |x: C64| -> Result<C64> {
        masses
            .iter()
            .find(|m| (m.location - x).norm() < 1e-10)
            .map(|m| m.weight * bfun.normalization)
            .ok_or_else(|| Error::InvalidArgument(format!("no mass at {x}")))
    };
    let qb = *bqj.q();
    let mut worst = 0.0f64;
    for (s, w) in stated.iter().enumerate().skip(1) {
        worst = worst.max(rel(weight_at(qb.powi(s as i32))?, *w));
    }
    checks.push(Check::at_most("big q-Jacobi c = 1: omega_s, s >= 1", worst, 1e-8));
    let w0 = weight_at(c64(1.0, 0.0))?;
    checks.push(Check::at_most("big q-Jacobi c = 1: omega_0 as printed", rel(w0, stated[0]), 1e-8));
    let rest: C64 = stated.iter().skip(1).sum();
    checks.push(Check::at_most("big q-Jacobi c = 1: omega_0 = 1 - sum of the others", rel(w0, c64(1.0, 0.0) - rest), 1e-8).info());
    notes.push(format!("omega_0 printed {:.12}, computed {:.12}", stated[0], w0));
    checks.push(Check::at_most("p_{lN+m} = p_N^l p_m, l <= 2", power_factorization_residual(&fam, n, 2)?, 1e-8));
    Ok(checks)
}

fn factorization(primary: &FamilySpec, span: usize, seed: u64) -> Result<Vec<Check>> {
    use FamilyId as F;
    let specs = [
        primary.clone(),
        FamilySpec::real(F::DualQHahn, &[0.4, 0.3, 3.0], 0.5),
        FamilySpec::real(F::QKrawtchouk, &[0.4, 3.0], 0.5),
        FamilySpec::real(F::QuantumQKrawtchouk, &[3.0, 3.0], 0.5),
        FamilySpec::real(F::AffineQKrawtchouk, &[0.4, 3.0], 0.5),
        FamilySpec::real(F::DualQKrawtchouk, &[0.4, 3.0], 0.5),
    ];
    let mut checks = Vec::new();
    for spec in &specs {
        let fam = spec.build::<C64>()?;
        let big_n = *fam.lambda_set(span + 8)?.lambda_set.first().ok_or(Error::AssumptionViolated("no vanishing gamma".into()))?;
        let rep = factorization_check(&fam, big_n, big_n + span)?;
        let tag = fam.id().tag();
        checks.push(Check::at_most(format!("{tag}: p_(n+N) - p_N p_n^(N), n <= {span}"), rep.residual, 1e-9));
        let assoc = rep.associated_family_match.unwrap_or(f64::INFINITY);
        checks.push(Check::at_most(format!("{tag}: tabulated associated family"), assoc, 1e-8));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let (a, b) = ([c64(0.3, 0.0), c64(-0.45, 0.0)], [c64(0.6, 0.0)]);
    let mut worst = 0.0f64;
    for _ in 0..7 {
        let z = c64(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
        let (lhs, rhs) = hyper_factorization_sides(&a, &b, &c64(0.5, 0.0), &z, 3, 4)?;
        worst = worst.max((lhs - rhs).norm() / lhs.norm().max(1.0));
    }
    checks.push(Check::at_most("series factorization at 7 random z, (n, N) = (3, 4)", worst, 1e-9));
    Ok(checks)
}

/// The instance each identity is checked on.
pub fn identity_instance(ident: Identity) -> Result<FamilyInstance<C64>> {
    use FamilyId as F;
    let q = 0.5f64;
    let q7 = q.powi(-7);
    let s = match ident {
        Identity::BqjBLimit => FamilySpec::real(F::BigQJacobi, &[0.4, q.powi(-4), -0.7], q),
        Identity::BqjToQh => FamilySpec::real(F::BigQJacobi, &[0.4, 0.3, q7], q),
        Identity::LqjToQk => FamilySpec::real(F::LittleQJacobi, &[0.4, q7], q),
        Identity::BqlToAqk => FamilySpec::real(F::BigQLaguerre, &[0.4, q7], q),
        Identity::QmToQqk => FamilySpec::real(F::QMeixner, &[q7, 0.7], q),
        Identity::CdqhToDqh => FamilySpec::real(F::ContinuousDualQHahn, &[2.0, 0.3, q.powi(-6) / 2.0], q),
        _ => {
            let (params, q): (&[f64], f64) = match ident.source() {
                F::AskeyWilson => (&[0.3, -0.2, 0.4, 0.25], 0.55),
                F::QRacah => (&[0.3, 0.2, 0.25, 0.5], q),
                F::BigQJacobi => (&[0.4, 0.3, -0.7], q),
                F::QHahn => (&[0.4, 0.3, 10.0], q),
                F::DualQHahn => (&[0.25, 0.5, 10.0], q),
                F::ContinuousDualQHahn => (&[0.3, 0.2, -0.4], q),
                F::BigQLaguerre => (&[0.4, -0.5], q),
                F::LittleQJacobi => (&[0.4, 0.3], q),
                F::QMeixner => (&[0.4, 0.7], q),
                F::QuantumQKrawtchouk => (&[2.5, 10.0], q),
                F::AffineQKrawtchouk | F::QKrawtchouk => (&[0.4, 10.0], q),
                F::DualQKrawtchouk => (&[0.25, 10.0], q),
                F::EvalOnly(_) => return Err(Error::InvalidArgument("identity source has no recurrence".into())),
            };
            FamilySpec::real(ident.source(), params, q)
        }
    };
    s.build()
}

fn identity_suite() -> Result<Vec<Check>> {
    let pts: Vec<C64> = [0.13, -0.41, 0.77, -0.9, 0.5].iter().map(|&x| c64(x, 0.0)).collect();
    Identity::all()
        .iter()
        .map(|&ident| Ok(Check::at_most(ident.name(), identity_residual(ident, &identity_instance(ident)?, 5, &pts)?, 1e-9)))
        .collect()
}

/// Desk instance for a row of the `σ, τ` table (`None` without a family).
pub fn operator_table_instance(index: usize) -> Result<Option<FamilyInstance<C64>>> {
    let Some(tag) = OPERATOR_TABLE.get(index.wrapping_sub(1)).and_then(|r| r.family) else {
        return Ok(None);
    };
    let params: &[f64] = match index {
        1 => &[0.4, 0.3, -0.7],
        2 => &[0.4, 0.3, 6.0],
        3 => &[0.4, -0.5],
        4 | 7 => &[0.4, 6.0],
        6 => &[0.4, 0.3],
        10 => &[0.6, 0.7],
        12 => &[0.4, 0.7],
        13 => &[2.5, 6.0],
        14 => &[],
        _ => &[0.6],
    };
    FamilySpec::real(FamilyId::from_tag(tag)?, params, 0.5).build().map(Some)
}

fn operator_suite(aw: &FamilySpec, notes: &mut Vec<String>) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for spec in [FamilySpec::real(FamilyId::QHahn, &[0.4, 0.3, 10.0], 0.5), FamilySpec::real(FamilyId::BigQJacobi, &[0.4, 0.3, -0.7], 0.5)] {
        let fam = spec.build::<C64>()?;
        let op = family_operator(&fam)?;
        let worst = (1..=8).map(|n| shift_identity_residual(&fam, &op, n).map(|r| r.stated_residual)).try_fold(0.0f64, |acc, r| r.map(|v| acc.max(v)))?;
        checks.push(Check::at_most(format!("{} shift identity, n <= 8", fam.id().tag()), worst, 1e-9));
    }
    for row in OPERATOR_TABLE.iter() {
        let Some(fam) = operator_table_instance(row.index)? else {
            notes.push(format!("row {} ({}) has no registered family", row.index, row.label));
            continue;
        };
        let worst = |corrected: bool| -> Result<f64> {
            (1..=6).try_fold(0.0f64, |acc, n| Ok(acc.max(operator_table_eigen_check(row.index, &fam, n, corrected, Realization::FullStep)?.residual)))
        };
        checks.push(Check::at_most(format!("row {} {} as printed", row.index, row.label), worst(false)?, 1e-8));
        if row.status == RowStatus::Corrected {
            checks.push(Check::at_most(format!("row {} {} corrected", row.index, row.label), worst(true)?, 1e-8).info());
        }
    }
    let fam = aw.build::<C64>()?;
    let mut worst = 0.0f64;
    let mut ratios = Vec::new();
    for n in 1..=6 {
        let rep = aw_zform_eigen_check(&fam, n)?;
        worst = worst.max(rep.eigen.residual);
        let r = rep.ratio_to_stated.ok_or(Error::InvalidArgument("stated eigenvalue vanishes".into()))?;
        ratios.push(c64(r[0], r[1]));
    }
    checks.push(Check::at_most("Askey-Wilson z-form residual, n <= 6", worst, 1e-8));
    let spread = ratios.iter().map(|r| (r - ratios[0]).norm() / ratios[0].norm()).fold(0.0, f64::max);
    checks.push(Check::at_most("fitted / tabulated eigenvalue constant in n", spread, 1e-6));
    notes.push(format!("fitted / tabulated eigenvalue ratio {:.12}", ratios[0]));
    Ok(checks)
}

/// Every degenerate scenario of the Sobolev suite.
pub fn degenerate_scenarios() -> Vec<FamilySpec> {
    use FamilyId as F;
    let q4 = 0.5f64.powi(-4);
    vec![
        FamilySpec::real(F::QHahn, &[0.4, 0.3, 3.0], 0.5),
        FamilySpec::real(F::DualQHahn, &[0.4, 0.3, 3.0], 0.5),
        FamilySpec::real(F::QKrawtchouk, &[1.5, 3.0], 0.7),
        FamilySpec::real(F::QuantumQKrawtchouk, &[3.0, 3.0], 0.5),
        FamilySpec::real(F::AffineQKrawtchouk, &[0.4, 3.0], 0.5),
        FamilySpec::real(F::DualQKrawtchouk, &[0.4, 3.0], 0.5),
        FamilySpec::real(F::AskeyWilson, &[3.2, 5.0, 0.35, 0.15], 0.5),
        FamilySpec::real(F::AskeyWilson, &[2.0, 16.0, 0.35, 0.15], 0.5),
        FamilySpec::real(F::BigQJacobi, &[0.4, 0.3, q4], 0.5),
        FamilySpec::real(F::BigQJacobi, &[q4, 0.3, -0.7], 0.5),
        FamilySpec::real(F::BigQJacobi, &[0.4, q4, -0.7], 0.5),
        FamilySpec::real(F::BigQJacobi, &[0.4, 14.0, 0.35], 0.5),
        FamilySpec::root_of_unity(F::AskeyWilson, &[0.3, 0.25, -0.2, 0.15], 1, 5),
        FamilySpec::root_of_unity(F::AskeyWilson, &[0.3, 0.25, -0.2, 0.15], 2, 5),
        FamilySpec::root_of_unity(F::BigQJacobi, &[0.4, 0.3, -0.7], 1, 5),
        FamilySpec::root_of_unity(F::BigQJacobi, &[0.4, 0.3, 1.0], 1, 5),
    ]
}

fn negative_control(primary: &FamilySpec) -> Result<Vec<Check>> {
    let mut specs = vec![primary.clone()];
    specs.extend(degenerate_scenarios().into_iter().filter(|s| s != primary));
    let mut checks = Vec::new();
    for spec in &specs {
        let fam = spec.build::<C64>()?;
        let n = *fam.lambda_set(12)?.lambda_set.first().ok_or(Error::AssumptionViolated("no vanishing gamma".into()))?;
        let plan = build_level_plan(&fam, n + 1)?;
        let form = build_sobolev_form(&fam, &plan)?;
        let rep = gram_check(&form.base, &fam.sequence(n + 1)?, n + 1, 1e-7)?;
        let label = match spec.q {
            QSpec::RootOfUnity { m, n } => format!("{} at exp(2 pi i {m}/{n})", fam.id().tag()),
            QSpec::Value(_) => format!("{} {:?}", fam.id().tag(), spec.params.iter().map(|z| z.re).collect::<Vec<_>>()),
        };
        checks.push(Check::holds(format!("{label}: L_0 alone loses the diagonal at n = {n}"), rep.zero_diag_at == Some(n)));
    }
    Ok(checks)
}

/// Criteria whose failure is explained by misprints in the tabulated data
/// (see the project notes): the printed `ω_0` of the `c = 1` big q-Jacobi
/// weights, and the printed rows 2, 4, 7, 11, 13 and 15 of the `σ, τ` table.
pub const KNOWN_FAILURES: [u8; 2] = [8, 11];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_bounds() {
        assert!(Check::at_most("x", 1.0, 1.0).pass);
        assert!(!Check::at_most("x", 1.5, 1.0).pass);
        assert!(Check::at_least("x", 2.0, 1.0).pass);
        assert!(!Check::holds("x", false).pass);
        let report = CriterionReport::new(3, vec![Check::at_most("a", 0.0, 1.0), Check::at_most("b", 2.0, 1.0).info()], vec![]);
        assert!(report.pass);
        assert!(report.summary_line().starts_with("PASS criterion  3"));
        assert!(!CriterionReport::new(3, vec![], vec![]).pass);
    }

    #[test]
    fn specs_build_in_every_scalar() {
        for id in 1..=12 {
            let spec = default_spec(id).unwrap();
            assert!(spec.build::<C64>().is_ok());
        }
        assert!(FamilySpec::real(FamilyId::BigQJacobi, &[0.4, 0.3, -0.7], 0.5).build::<CExact>().is_ok());
        assert!(default_spec(13).is_none());
        assert!(run_criterion(13, None, None, DEFAULT_SEED).is_err());
    }

    #[test]
    fn root_of_unity_spec_needs_root_mode() {
        let spec = default_spec(2).unwrap();
        assert!(run_criterion(8, Some(&spec), None, DEFAULT_SEED).is_err());
    }
}
