use proptest::prelude::*;
use qpoly::families::{FamilyId, FamilyInstance};
use qpoly::functionals::{gram_matrix, MomentFunctional};
use qpoly::poly::rel_coeff_diff;
use qpoly::sobolev::{build_level_plan, build_sobolev_form, gram_check};
use qpoly::{c64, CExact, Family64, Poly, Scalar, C32, C64};

fn aw<S: Scalar>() -> FamilyInstance<S> {
    let params = [0.3, -0.2, 0.4, 0.25].iter().map(|&x| S::from_real(x)).collect();
    FamilyInstance::new(FamilyId::AskeyWilson, params, S::from_real(0.55)).unwrap()
}

fn to_c64<S: Scalar>(p: &Poly<S>) -> Poly<C64> {
    Poly::new(p.coeffs().iter().map(Scalar::to_c64).collect())
}

#[test]
fn scalars_agree_on_askey_wilson() {
    let exact = aw::<CExact>().sequence(6).unwrap();
    let double = aw::<C64>().sequence(6).unwrap();
    let single = aw::<C32>().sequence(6).unwrap();
    for n in 0..=6 {
        let e = to_c64(exact.get(n).as_poly());
        assert!(rel_coeff_diff(&to_c64(double.get(n).as_poly()), &e) < 1e-13);
        assert!(rel_coeff_diff(&to_c64(single.get(n).as_poly()), &e) < 1e-4);
    }
}

#[test]
fn canonical_moments_orthogonalize_the_sequence() {
    let fam = aw::<C64>();
    let f = MomentFunctional::canonical(&fam.recurrence().unwrap(), 16).unwrap();
    let seq = fam.sequence(8).unwrap();
    let g = gram_matrix(&f, &seq, 8).unwrap();
    for (n, row) in g.iter().enumerate() {
        for (m, v) in row.iter().enumerate().take(n) {
            assert!(v.norm() <= 1e-10 * (g[n][n].norm() * g[m][m].norm()).sqrt(), "({n}, {m})");
        }
    }
}

#[test]
fn degenerate_family_needs_the_sobolev_levels() {
    let q = 0.5f64;
    let fam = Family64::new(FamilyId::BigQJacobi, vec![c64(0.4, 0.0), c64(0.3, 0.0), c64(q.powi(-4), 0.0)], c64(q, 0.0)).unwrap();
    assert_eq!(fam.lambda_set(10).unwrap().lambda_set.first(), Some(&4));
    let plan = build_level_plan(&fam, 9).unwrap();
    let form = build_sobolev_form(&fam, &plan).unwrap();
    let seq = fam.sequence(9).unwrap();
    assert!(gram_check(&form, &seq, 9, 1e-7).unwrap().pass);
    assert_eq!(gram_check(&form.base, &seq, 9, 1e-7).unwrap().zero_diag_at, Some(4));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn big_q_jacobi_recurrence_matches_series(a in 0.1f64..0.8, b in -0.8f64..0.8, c in -0.9f64..-0.1, x in -0.9f64..0.9) {
        let fam = Family64::new(FamilyId::BigQJacobi, vec![c64(a, 0.0), c64(b, 0.0), c64(c, 0.0)], c64(0.5, 0.0)).unwrap();
        let seq = fam.sequence(6).unwrap();
        let x = c64(x, 0.0);
        for n in 0..=6 {
            let t = seq.get(n).eval(&x);
            let h = fam.hyper_eval(n, &x).unwrap();
            prop_assert!((t - h).norm() <= 1e-9 * t.norm().max(1.0));
        }
    }

    #[test]
    fn recurrence_holds_pointwise(a in 0.1f64..0.6, b in 0.1f64..0.6, x in -1.0f64..1.0) {
        let fam = Family64::new(FamilyId::AskeyWilson, vec![c64(a, 0.0), c64(-b, 0.0), c64(0.4, 0.0), c64(0.25, 0.0)], c64(0.55, 0.0)).unwrap();
        let seq = fam.sequence(7).unwrap();
        let x = c64(x, 0.0);
        for n in 1..7 {
            let (beta, gamma) = fam.ttrr_coeffs(n).unwrap();
            let lhs = x * seq.get(n).eval(&x);
            let rhs = seq.get(n + 1).eval(&x) + beta * seq.get(n).eval(&x) + gamma * seq.get(n - 1).eval(&x);
            prop_assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0));
        }
    }
}
