use super::*;
use crate::poly::rel_coeff_diff;
use crate::scalar::{c64, CExact, C64};

fn r(x: f64) -> C64 {
    c64(x, 0.0)
}

fn desk(id: FamilyId) -> FamilyInstance<C64> {
    desk_in(id)
}

/// Desk parameters; square roots in the base maps are exact.
pub(crate) fn desk_in<S: Scalar>(id: FamilyId) -> FamilyInstance<S> {
    use FamilyId as F;
    let (params, q): (Vec<f64>, f64) = match id {
        F::AskeyWilson => (vec![0.3, -0.2, 0.4, 0.25], 0.55),
        F::QRacah => (vec![0.3, 0.2, 0.25, 0.5], 0.5),
        F::BigQJacobi => (vec![0.4, 0.3, -0.7], 0.5),
        F::QHahn => (vec![0.4, 0.3, 10.0], 0.5),
        F::DualQHahn => (vec![0.25, 0.5, 10.0], 0.5),
        F::ContinuousDualQHahn => (vec![0.3, 0.2, -0.4], 0.5),
        F::BigQLaguerre => (vec![0.4, -0.5], 0.5),
        F::LittleQJacobi => (vec![0.4, 0.3], 0.5),
        F::QMeixner => (vec![0.4, 0.7], 0.5),
        F::QuantumQKrawtchouk => (vec![2.5, 10.0], 0.5),
        F::AffineQKrawtchouk => (vec![0.4, 10.0], 0.5),
        F::QKrawtchouk => (vec![0.4, 10.0], 0.5),
        F::DualQKrawtchouk => (vec![0.25, 10.0], 0.5),
        F::EvalOnly(_) => unreachable!(),
    };
    FamilyInstance::new(id, params.into_iter().map(S::from_real).collect(), S::from_real(q)).unwrap()
}

fn with_recurrence() -> impl Iterator<Item = FamilyId> {
    FamilyId::all().iter().copied().filter(|f| f.has_recurrence())
}

#[test]
fn make_family_examples() {
    let q = r(0.55);
    let aw = FamilyInstance::make_family(
        FamilyId::AskeyWilson,
        &[("a", r(0.3)), ("b", r(-0.2)), ("c", r(0.4)), ("d", r(0.25))],
        q,
        QMode::Generic,
    )
    .unwrap();
    assert!(aw.profile().unwrap().lambda_set.is_empty());

    let deg = FamilyInstance::new(FamilyId::AskeyWilson, vec![r(2.0), r(4.0), r(0.3), r(0.2)], r(0.5)).unwrap();
    assert_eq!(deg.profile().unwrap().lambda_set, vec![4]);

    let bad = FamilyInstance::new(FamilyId::AskeyWilson, vec![r(2.0), r(2.0), r(0.5), r(2.0)], r(0.5));
    assert!(matches!(bad, Err(Error::NonNormal(_))));

    let unknown = FamilyInstance::make_family(FamilyId::BigQLaguerre, &[("z", r(1.0))], r(0.5), QMode::Generic);
    assert_eq!(unknown.unwrap_err(), Error::UnknownParam("z".into()));
    let missing = FamilyInstance::make_family(FamilyId::BigQLaguerre, &[("a", r(1.0))], r(0.5), QMode::Generic);
    assert_eq!(missing.unwrap_err(), Error::MissingParam("b".into()));
}

#[test]
fn root_of_unity_validation() {
    let p = vec![r(0.3), r(0.25), r(-0.2), r(0.15)];
    assert!(FamilyInstance::<C64>::at_root_of_unity(FamilyId::AskeyWilson, p.clone(), 2, 4).is_err());
    let wrong = FamilyInstance::make_family(
        FamilyId::AskeyWilson,
        &[("a", p[0]), ("b", p[1]), ("c", p[2]), ("d", p[3])],
        r(0.5),
        QMode::RootOfUnity { m: 1, n: 3 },
    );
    assert!(matches!(wrong, Err(Error::BadRootOfUnity(_))));
    let fam = FamilyInstance::<C64>::at_root_of_unity(FamilyId::AskeyWilson, p, 1, 3).unwrap();
    let prof = fam.lambda_set(10).unwrap();
    for k in [3, 6, 9] {
        assert!(prof.lambda_set.contains(&k));
    }
    assert_eq!(prof.root_of_unity_containment, Some(true));
}

#[test]
fn first_coefficients() {
    let aw = desk(FamilyId::AskeyWilson);
    let (a, b, c, d) = (r(0.3), r(-0.2), r(0.4), r(0.25));
    let a0 = (r(1.0) - a * b) * (r(1.0) - a * c) * (r(1.0) - a * d) / (a * (r(1.0) - a * b * c * d));
    let (b0, g0) = aw.ttrr_coeffs(0).unwrap();
    assert!((b0 - (a + r(1.0) / a - a0) / r(2.0)).norm() < 1e-14);
    assert_eq!(g0, r(0.0));

    let bqj = desk(FamilyId::BigQJacobi);
    let q = r(0.5);
    let (a, b, c) = (r(0.4), r(0.3), r(-0.7));
    let hat_a0 = (r(1.0) - a * q) * (r(1.0) - a * b * q) * (r(1.0) - c * q) / ((r(1.0) - a * b * q) * (r(1.0) - a * b * q * q));
    assert!((bqj.ttrr_coeffs(0).unwrap().0 - (r(1.0) - hat_a0)).norm() < 1e-14);
}

#[test]
fn vanishing_gamma_for_c_in_omega() {
    let q = r(0.5);
    let fam = FamilyInstance::new(FamilyId::BigQJacobi, vec![r(0.4), r(0.3), q.ipow(-5)], q).unwrap();
    assert_eq!(fam.profile().unwrap().lambda_set, vec![5]);
}

#[test]
fn recurrence_matches_series_for_every_family() {
    for id in with_recurrence() {
        let fam = desk_in::<CExact>(id);
        let seq = fam.sequence(8).unwrap();
        for n in 0..=8 {
            assert_eq!(seq.get(n), &fam.hyper_poly(n).unwrap(), "{} n={n}", id.tag());
        }
    }
}

// Families whose x^n series coefficient is exponentially small (q^{-N}
// denominators, powers of q in the argument) lose the monic normalization to
// round-off in f64; they are covered by the exact test above.
#[test]
fn float_series_agrees_at_low_degree() {
    use FamilyId as F;
    let ids = [F::AskeyWilson, F::QRacah, F::BigQJacobi, F::ContinuousDualQHahn, F::BigQLaguerre, F::LittleQJacobi];
    for id in ids {
        let fam = desk(id);
        let seq = fam.sequence(5).unwrap();
        for n in 0..=5 {
            let d = rel_coeff_diff(seq.get(n), &fam.hyper_poly(n).unwrap());
            assert!(d < 1e-9, "{} n={n}: {d:e}", id.tag());
        }
    }
}

#[test]
fn exact_askey_wilson_matches_series() {
    let p = [0.3, -0.2, 0.4, 0.25].map(|x| CExact::from_parts(x, 0.0)).to_vec();
    let fam = FamilyInstance::new(FamilyId::AskeyWilson, p, CExact::from_parts(0.55, 0.0)).unwrap();
    let seq = fam.sequence(6).unwrap();
    for n in 0..=6 {
        assert_eq!(seq.get(n), &fam.hyper_poly(n).unwrap());
    }
}

#[test]
fn degree_one_is_x_minus_beta0() {
    let x = r(0.37);
    for id in with_recurrence() {
        let fam = desk(id);
        let b0 = fam.ttrr_coeffs(0).unwrap().0;
        assert!((fam.hyper_eval(1, &x).unwrap() - (x - b0)).norm() < 1e-10, "{}", id.tag());
        assert_eq!(fam.hyper_eval(0, &x).unwrap(), r(1.0));
    }
}

#[test]
fn askey_wilson_symmetry_and_z_roots() {
    let fam = desk(FamilyId::AskeyWilson);
    let perm = fam.with_params(vec![r(0.25), r(0.4), r(0.3), r(-0.2)]).unwrap();
    for x in [r(0.1), r(-0.6), r(0.9)] {
        let a = fam.hyper_eval(4, &x).unwrap();
        assert!((a - perm.hyper_eval(4, &x).unwrap()).norm() < 1e-12);
        let (u, v) = fam.aw_series_via_z(4, &x).unwrap();
        assert!((u - v).norm() < 1e-12 * u.norm().max(1.0));
        assert!((u - fam.series_at(4, &x).unwrap()).norm() < 1e-12 * u.norm().max(1.0));
    }
}

#[test]
fn eval_only_families() {
    let q = r(0.5);
    for &id in FamilyId::all().iter().filter(|f| !f.has_recurrence()) {
        let params = id.param_names().iter().map(|_| r(0.6)).collect();
        let fam = FamilyInstance::new(id, params, q).unwrap();
        assert!(matches!(fam.ttrr_coeffs(0), Err(Error::EvalOnlyFamily(_))));
        let p = fam.hyper_poly(4).unwrap();
        assert_eq!(p.degree(), 4);
        let x = r(0.3);
        assert!((p.eval(&x) - fam.hyper_eval(4, &x).unwrap()).norm() < 1e-9);
    }
}

#[test]
fn tags_round_trip() {
    for &id in FamilyId::all() {
        assert_eq!(FamilyId::from_tag(id.tag()).unwrap(), id);
    }
    assert!(FamilyId::from_tag("nope").is_err());
}

#[test]
fn identities_hold_at_desk_parameters() {
    let q = r(0.5);
    let pts = [r(0.13), r(-0.41), r(0.77), r(-0.9), r(0.5)];
    for &ident in Identity::all() {
        let fam = match ident {
            Identity::BqjBLimit => {
                FamilyInstance::new(FamilyId::BigQJacobi, vec![r(0.4), q.ipow(-4), r(-0.7)], q).unwrap()
            }
            Identity::BqjToQh => {
                FamilyInstance::new(FamilyId::BigQJacobi, vec![r(0.4), r(0.3), q.ipow(-7)], q).unwrap()
            }
            Identity::LqjToQk => {
                FamilyInstance::new(FamilyId::LittleQJacobi, vec![r(0.4), q.ipow(-7)], q).unwrap()
            }
            Identity::BqlToAqk => {
                FamilyInstance::new(FamilyId::BigQLaguerre, vec![r(0.4), q.ipow(-7)], q).unwrap()
            }
            Identity::QmToQqk => FamilyInstance::new(FamilyId::QMeixner, vec![q.ipow(-7), r(0.7)], q).unwrap(),
            Identity::CdqhToDqh => {
                FamilyInstance::new(FamilyId::ContinuousDualQHahn, vec![r(2.0), r(0.3), q.ipow(-6) / r(2.0)], q)
                    .unwrap()
            }
            _ => desk(ident.source()),
        };
        let res = identity_residual(ident, &fam, 5, &pts).unwrap();
        assert!(res < 1e-9, "{ident:?}: {res:e}");
    }
}

#[test]
fn q_inverse_twice_preserves_lambda_set() {
    let q = r(0.5);
    let fam = FamilyInstance::new(FamilyId::AskeyWilson, vec![r(2.0), r(4.0), r(0.3), r(0.2)], q).unwrap();
    let once = param_map(Identity::AwQInverse, &fam).unwrap().target;
    let twice = param_map(Identity::AwQInverse, &once).unwrap().target;
    assert_eq!(fam.lambda_set(12).unwrap().lambda_set, twice.lambda_set(12).unwrap().lambda_set);
    assert_eq!(fam.lambda_set(12).unwrap().lambda_set, once.lambda_set(12).unwrap().lambda_set);
}

#[test]
fn principal_log_is_flagged() {
    let q = r(0.5);
    assert_eq!(log_q(&q.ipow(-3), &q).unwrap(), (r(-3.0), None));
    let (v, note) = log_q(&r(3.0), &q).unwrap();
    assert!(note.is_some());
    assert!((q.powc(v) - r(3.0)).norm() < 1e-12);
}
