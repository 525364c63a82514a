use proptest::prelude::*;

use super::*;
use crate::families::tests::desk_in;
use crate::qnum::qnumber;
use crate::scalar::{c64, CExact, C64};

fn r(x: f64) -> C64 {
    c64(x, 0.0)
}

fn fam(id: FamilyId, params: &[f64], q: f64) -> FamilyInstance<C64> {
    FamilyInstance::new(id, params.iter().map(|&x| r(x)).collect(), r(q)).unwrap()
}

fn close(a: &Poly<C64>, b: &Poly<C64>, tol: f64) -> bool {
    crate::poly::rel_coeff_diff(a, b) <= tol
}

#[test]
fn hahn_monomials() {
    let q = r(0.5);
    let op = OperatorSpec::new(OperatorKind::HahnDq, q);
    assert_eq!(apply_operator(&op, &Poly::constant(r(3.0))).unwrap(), Poly::zero());
    assert!(close(&apply_operator(&op, &Poly::monomial(2)).unwrap(), &Poly::new(vec![r(0.0), r(1.5)]), 1e-15));
    let twice = operator_power(&op, 2, &Poly::monomial(3)).unwrap();
    let want = qnumber(3, &q).unwrap() * qnumber(2, &q).unwrap();
    assert!(close(&twice, &Poly::new(vec![r(0.0), want]), 1e-15));
    let once = operator_power(&op, 1, &Poly::monomial(5)).unwrap();
    assert_eq!(once, apply_operator(&op, &Poly::monomial(5)).unwrap());
}

#[test]
fn backward_operator_uses_inverse_base() {
    let q = r(0.4);
    let inv = OperatorSpec::new(OperatorKind::HahnDqInv, q);
    let fwd = OperatorSpec::new(OperatorKind::HahnDq, r(2.5));
    let p = Poly::new(vec![r(1.0), r(-2.0), r(0.5), r(3.0), r(-1.0)]);
    assert!(close(&apply_operator(&inv, &p).unwrap(), &apply_operator(&fwd, &p).unwrap(), 1e-14));
    let lin = OperatorSpec::new(OperatorKind::LatticeForward(LatticeSpec::QLinear), q);
    assert_eq!(apply_operator(&inv, &p).unwrap(), apply_operator(&lin, &p).unwrap());
}

#[test]
fn divided_difference_of_x_is_one() {
    let op = OperatorSpec::new(OperatorKind::AWDividedDiff, r(0.55));
    assert!(close(&apply_operator(&op, &Poly::x()).unwrap(), &Poly::constant(r(1.0)), 1e-15));
}

#[test]
fn base_one_is_rejected() {
    let op = OperatorSpec::new(OperatorKind::HahnDq, r(1.0));
    assert_eq!(apply_operator(&op, &Poly::x()), Err(Error::DegenerateBase));
}

#[test]
fn monomial_rule_matches_pointwise_nodes() {
    let p = Poly::new(vec![r(0.3), r(-1.0), r(2.0), r(0.7), r(-0.4), r(1.1)]);
    let f = |x: &C64| p.eval(x);
    let ops = [
        OperatorSpec::new(OperatorKind::HahnDq, r(0.6)),
        OperatorSpec::new(OperatorKind::HahnDqInv, r(0.6)),
        OperatorSpec::new(OperatorKind::AWDividedDiff, r(0.6)),
        OperatorSpec::new(OperatorKind::LatticeForward(LatticeSpec::QQuadratic { gamma_delta: r(0.3) }), r(0.6)),
    ];
    for op in &ops {
        let dp = apply_operator(op, &p).unwrap();
        for x in [r(0.37), r(-0.81), r(1.9)] {
            let direct = op.apply_at(&f, &x).unwrap();
            assert!((direct - dp.eval(&x)).norm() < 1e-12 * direct.norm().max(1.0), "{:?}", op.kind);
        }
    }
}

#[test]
fn exact_and_float_rules_agree() {
    let pe: Poly<CExact> = Poly::new([1, -2, 3, 5].iter().map(|&c| CExact::from_int(c)).collect());
    let pf: Poly<C64> = Poly::new([1, -2, 3, 5].iter().map(|&c| r(c as f64)).collect());
    let ge = apply_operator(&OperatorSpec::new(OperatorKind::HahnDqInv, CExact::from_real(0.5)), &pe).unwrap();
    let gf = apply_operator(&OperatorSpec::new(OperatorKind::HahnDqInv, r(0.5)), &pf).unwrap();
    let back: Poly<C64> = Poly::new(ge.coeffs().iter().map(crate::scalar::convert).collect());
    assert!(close(&back, &gf, 1e-15));
}

proptest! {
    #[test]
    fn every_operator_lowers_degree(coeffs in prop::collection::vec(-3.0f64..3.0, 2..=13), lead in 0.5f64..2.0, q in 0.2f64..0.9) {
        let mut c: Vec<C64> = coeffs.iter().map(|&x| r(x)).collect();
        let n = c.len();
        c.push(r(lead));
        let p = Poly::new(c);
        for kind in [
            OperatorKind::HahnDq,
            OperatorKind::HahnDqInv,
            OperatorKind::AWDividedDiff,
            OperatorKind::LatticeForward(LatticeSpec::QLinear),
            OperatorKind::LatticeForward(LatticeSpec::QQuadratic { gamma_delta: r(0.2) }),
        ] {
            let dp = apply_operator(&OperatorSpec::new(kind, r(q)), &p).unwrap();
            prop_assert_eq!(dp.degree(), n - 1);
            prop_assert!(dp.leading().norm() > 0.0);
        }
    }
}

#[test]
fn shift_identities_for_hahn_and_big_jacobi() {
    for id in [FamilyId::QHahn, FamilyId::BigQJacobi] {
        let f = desk_in::<C64>(id);
        let op = family_operator(&f).unwrap();
        for n in 1..=8 {
            let rep = shift_identity_residual(&f, &op, n).unwrap();
            assert!(rep.stated_residual <= 1e-9, "{} n={n}: {rep:?}", id.tag());
        }
    }
    let qh = desk_in::<C64>(FamilyId::QHahn);
    let rep = shift_identity_residual(&qh, &OperatorSpec::new(OperatorKind::HahnDqInv, r(0.5)), 4).unwrap();
    assert!(rep.stated_residual <= 1e-9);
    assert_eq!(shift_identity_residual(&qh, &OperatorSpec::new(OperatorKind::HahnDqInv, r(0.5)), 1).unwrap().stated_residual, 0.0);
}

#[test]
fn shift_rules_hold_for_every_closed_family() {
    for &id in FamilyId::all().iter().filter(|f| f.has_recurrence() && **f != FamilyId::LittleQJacobi) {
        let f = desk_in::<C64>(id);
        let op = family_operator(&f).unwrap();
        for n in 1..=6 {
            let rep = shift_identity_residual(&f, &op, n).unwrap();
            assert!(rep.fitted_residual <= 1e-12, "{} n={n}: {rep:?}", id.tag());
        }
    }
}

#[test]
fn askey_wilson_lowering_constant() {
    // The divided difference carries q^{-(n-1)/2} [n]_q; Hahn's operator does
    // not lower to the shifted family at all.
    let aw = desk_in::<C64>(FamilyId::AskeyWilson);
    let q = *aw.q();
    let dd = family_operator(&aw).unwrap();
    let hahn = OperatorSpec::new(OperatorKind::HahnDq, q);
    for n in 2..=6 {
        let rep = shift_identity_residual(&aw, &dd, n).unwrap();
        let want = q.powf(-(n as f64 - 1.0) / 2.0) * qnumber(n as i64, &q).unwrap();
        assert!(rep.fitted_residual < 1e-12);
        assert!((rep.fitted_ratio[0] - want.re).abs() < 1e-10 * want.re);
        assert!(rep.stated_residual > 1e-3);
        let h = shift_identity_residual(&aw, &hahn, n).unwrap();
        assert!(h.fitted_residual > 1e-3);
    }
    let hahn3 = shift_identity_residual(&aw, &hahn, 3).unwrap();
    let dd3 = shift_identity_residual(&aw, &dd, 3).unwrap();
    assert!(hahn3.stated_residual > 1e-3 && dd3.stated_residual > 1e-3);
}

#[test]
fn big_jacobi_power_lowers_to_shifted_family() {
    // c = q^{-N} lands on c = 1.
    let f = fam(FamilyId::BigQJacobi, &[0.4, 0.3, 8.0], 0.5);
    let op = family_operator(&f).unwrap();
    let big_n = 3;
    let shifted = fam(FamilyId::BigQJacobi, &[0.4 * 0.125, 0.3 * 0.125, 1.0], 0.5);
    for n in big_n..=7 {
        let lhs = operator_power(&op, big_n, f.sequence(n).unwrap().get(n)).unwrap();
        let rhs = shifted.sequence(n - big_n).unwrap().get(n - big_n).as_poly().clone();
        let ratio = *lhs.leading();
        assert!(close(&lhs, &rhs.scale(&ratio), 1e-12), "n={n}");
    }
}

#[test]
fn hyper_operator_basics() {
    let q = r(0.5);
    let data = operator_table_data(1, &[r(0.4), r(0.3), r(-0.7)], &q, false).unwrap();
    for real in [Realization::HalfStep, Realization::FullStep] {
        let h1 = hyper_operator_apply(&data, &q, &Poly::constant(r(1.0)), real).unwrap();
        assert!(h1.max_abs_coeff() < 1e-14);
        let hx = hyper_operator_apply(&data, &q, &Poly::x(), real).unwrap();
        assert!(close(&hx, &data.tau, 1e-13));
    }
}

#[test]
fn bad_row_is_detected_by_guard() {
    let q = r(0.5);
    let data = DiffEqData { sigma: Poly::monomial(3), tau: Poly::x() };
    let err = hyper_operator_apply(&data, &q, &Poly::monomial(3), Realization::FullStep).unwrap_err();
    assert!(matches!(err, Error::NotPolynomialOutput { .. }));
}

/// Desk parameters per table row (`None` where no family applies).
fn row_family(index: usize) -> Option<FamilyInstance<C64>> {
    let tag = OPERATOR_TABLE[index - 1].family?;
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
    Some(fam(FamilyId::from_tag(tag).unwrap(), params, 0.5))
}

#[test]
fn table_rows_are_eigen_operators() {
    for row in OPERATOR_TABLE.iter() {
        let Some(f) = row_family(row.index) else { continue };
        let corrected = row.status == RowStatus::Corrected;
        let worst = (1..=6)
            .map(|n| operator_table_eigen_check(row.index, &f, n, corrected, Realization::FullStep).unwrap().residual)
            .fold(0.0, f64::max);
        let ok = worst <= 1e-8;
        match row.status {
            RowStatus::AsPrinted | RowStatus::Corrected => assert!(ok, "row {} residual {worst:e}", row.index),
            _ => assert!(!ok, "row {} unexpectedly passes", row.index),
        }
        if row.status == RowStatus::Corrected {
            let printed = (1..=6)
                .map(|n| operator_table_eigen_check(row.index, &f, n, false, Realization::FullStep).unwrap().residual)
                .fold(0.0, f64::max);
            assert!(printed > 1e-3, "row {} printed variant passes", row.index);
        }
    }
}

#[test]
fn half_step_scaling_fails_beyond_degree_one() {
    let f = row_family(1).unwrap();
    assert!(operator_table_eigen_check(1, &f, 1, false, Realization::HalfStep).unwrap().residual < 1e-12);
    assert!(operator_table_eigen_check(1, &f, 3, false, Realization::HalfStep).unwrap().residual > 1e-3);
    assert!(operator_table_eigen_check(1, &f, 3, false, Realization::FullStep).unwrap().residual < 1e-8);
}

#[test]
fn eigenvalues_are_distinct() {
    let f = row_family(1).unwrap();
    let data = operator_table_data(1, f.params(), f.q(), false).unwrap();
    let lams: Vec<f64> =
        (0..=8).map(|n| data.lambda(n, f.q(), Realization::FullStep).unwrap().re).collect();
    for n in 1..=8 {
        let fit = operator_table_eigen_check(1, &f, n, false, Realization::FullStep).unwrap().lambda_fit[0];
        assert!((fit - lams[n]).abs() < 1e-8 * lams[n].abs().max(1.0));
        for m in 0..n {
            assert!((lams[n] - lams[m]).abs() > 1e-6);
        }
    }
    let zero = eigen_check(&data, f.q(), &Poly::constant(r(1.0)), Realization::FullStep).unwrap();
    assert_eq!(zero.residual, 0.0);
    assert!(zero.lambda_fit[0].abs() < 1e-14);
}

#[test]
fn zform_equation() {
    let aw = desk_in::<C64>(FamilyId::AskeyWilson);
    let zs: Vec<C64> = zform_samples(10);
    let ones = aw_zform_apply(&aw, &Poly::constant(r(1.0)), &zs).unwrap();
    assert!(ones.iter().all(|v| v.norm() < 1e-13));
    let want = -1.0 / (4.0 * 0.55);
    for n in 1..=6 {
        let rep = aw_zform_eigen_check(&aw, n).unwrap();
        assert!(rep.eigen.residual <= 1e-8, "n={n}: {rep:?}");
        let ratio = rep.ratio_to_stated.unwrap();
        assert!((ratio[0] - want).abs() < 1e-6 && ratio[1].abs() < 1e-6, "n={n}: {ratio:?}");
    }
    let pole = aw_zform_apply(&aw, &Poly::x(), &[r(1.0)]);
    assert_eq!(pole, Err(Error::SamplePole));
}

#[test]
fn root_of_unity_lowering_sign() {
    let params = vec![r(0.3), r(0.25), r(-0.2), r(0.15)];
    for m in [1u32, 2] {
        let f = FamilyInstance::at_root_of_unity(FamilyId::AskeyWilson, params.clone(), m, 5).unwrap();
        let op = family_operator(&f).unwrap();
        // The plain fifth power vanishes identically.
        let p = f.sequence(7).unwrap();
        assert!(operator_power(&op, 5, p.get(7)).unwrap().max_abs_coeff() < 1e-12);
        for n in 5..=9 {
            let rep = root_of_unity_lowering(&f, n).unwrap();
            assert_eq!(rep.sign, if m == 1 { -1 } else { 1 });
            assert!(rep.matched.residual < 1e-10, "M={m} n={n}: {rep:?}");
            if m == 1 && n > 5 {
                assert!(rep.flipped.residual > 1e-3);
            }
        }
    }
    let bqj = FamilyInstance::at_root_of_unity(FamilyId::BigQJacobi, vec![r(0.4), r(0.3), r(1.0)], 1, 5).unwrap();
    for n in 5..=8 {
        let rep = root_of_unity_lowering(&bqj, n).unwrap();
        assert_eq!(rep.sign, 1);
        assert!(rep.matched.residual < 1e-10);
    }
}

#[test]
fn regularized_power_of_generic_base_is_derivative() {
    // Finite-difference check of d/dq (D^3 p) at a generic q.
    let p = Poly::new(vec![r(0.2), r(-1.0), r(0.5), r(2.0), r(-0.3), r(1.0)]);
    let q0 = 0.6;
    let eps = 1e-6;
    let at = |q: f64| operator_power(&OperatorSpec::new(OperatorKind::HahnDq, r(q)), 3, &p).unwrap();
    let fd = &at(q0 + eps) - &at(q0 - eps);
    let fd = fd.scale(&r(0.5 / eps));
    let t = regularized_power(&OperatorSpec::new(OperatorKind::HahnDq, r(q0)), 3, &p).unwrap();
    assert!(close(&t, &fd, 1e-7));
    let op = OperatorSpec::askey_wilson(r(0.6), r(0.6f64.sqrt()));
    let at = |q: f64| operator_power(&OperatorSpec::askey_wilson(r(q), r(q.sqrt())), 3, &p).unwrap();
    let fd = (&at(q0 + eps) - &at(q0 - eps)).scale(&r(0.5 / eps));
    assert!(close(&regularized_power(&op, 3, &p).unwrap(), &fd, 1e-7));
}
