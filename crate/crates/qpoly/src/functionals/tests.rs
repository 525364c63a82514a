use super::*;
use crate::families::FamilyInstance;
use crate::polyengine::RecurrenceCoeffs;
use crate::scalar::{c64, C64};

fn r(x: f64) -> C64 {
    c64(x, 0.0)
}

fn aw(params: [f64; 4], q: f64) -> FamilyInstance<C64> {
    FamilyInstance::new(FamilyId::AskeyWilson, params.iter().map(|&x| r(x)).collect(), r(q)).unwrap()
}

fn bqj(a: f64, b: f64, c: f64, q: f64) -> FamilyInstance<C64> {
    FamilyInstance::new(FamilyId::BigQJacobi, vec![r(a), r(b), r(c)], r(q)).unwrap()
}

fn rec(f: &FamilyInstance<C64>) -> RecurrenceCoeffs<C64> {
    f.recurrence().unwrap()
}

fn aw_root() -> FamilyInstance<C64> {
    FamilyInstance::at_root_of_unity(FamilyId::AskeyWilson, vec![r(0.3), r(0.25), r(-0.2), r(0.15)], 1, 5).unwrap()
}

fn bqj_root_c1() -> FamilyInstance<C64> {
    FamilyInstance::at_root_of_unity(FamilyId::BigQJacobi, vec![r(0.4), r(0.3), r(1.0)], 1, 5).unwrap()
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

#[test]
fn jackson_integrals_of_low_powers() {
    let q = r(0.5);
    let one = jackson_qintegral(&Poly::constant(r(1.0)), r(0.0), r(1.0), q, 1e-17).unwrap();
    assert!(rel(one, r(1.0)) < 1e-14);
    let t = jackson_qintegral(&Poly::x(), r(0.0), r(1.0), q, 1e-17).unwrap();
    assert!(rel(t, r(1.0 / 1.5)) < 1e-14);
    let empty = jackson_qintegral(&Poly::x(), r(0.7), r(0.7), q, 1e-17).unwrap();
    assert_eq!(empty, r(0.0));
    assert!(jackson_qintegral(&Poly::x(), r(0.0), r(1.0), r(1.0), 1e-17).is_err());
}

#[test]
fn applying_mass_lists() {
    let empty = MomentFunctional::<f64>::mass_list(Vec::new());
    assert_eq!(functional_apply(&empty, &Poly::x()).unwrap(), r(0.0));
    let single = MomentFunctional::mass_list(vec![MassPoint::new(r(2.0), r(3.0))]);
    let p = Poly::new(vec![r(1.0), r(1.0)]);
    assert_eq!(functional_apply(&single, &p).unwrap(), r(9.0));
    let deriv = MomentFunctional::mass_list(vec![MassPoint::derivative(r(2.0), r(1.0))]);
    assert_eq!(functional_apply(&deriv, &Poly::monomial(2)).unwrap(), r(4.0));
    let norm = single.self_normalized().unwrap();
    assert!(rel(norm.apply(&Poly::constant(r(1.0))).unwrap(), r(1.0)) < 1e-15);
    let moved = deriv.pullback_affine(r(2.0), r(1.0)).unwrap();
    // d/dx (2x+1)^2 at x = 2 is 4(2x+1) = 20
    assert!(rel(moved.apply(&Poly::monomial(2)).unwrap(), r(20.0)) < 1e-15);
}

#[test]
fn mass_records_serialize() {
    let f = MomentFunctional::mass_list(vec![MassPoint::derivative(r(0.5), c64(1.0, -2.0))]).self_normalized();
    assert!(f.is_err());
    let g = MomentFunctional { normalization: r(2.0), ..MomentFunctional::mass_list(vec![MassPoint::new(r(0.5), c64(1.0, -2.0))]) };
    let json = serde_json::to_string(&g.mass_records().unwrap()).unwrap();
    assert_eq!(json, r#"[{"x_re":0.5,"x_im":0.0,"order":0,"w_re":2.0,"w_im":-4.0}]"#);
}

#[test]
fn circle_gram_matches_norms() {
    let f = aw([0.3, -0.2, 0.4, 0.25], 0.55);
    let fun = aw_circle_functional(&f, DEFAULT_NODES).unwrap();
    let seq = f.sequence(8).unwrap();
    let g = gram_matrix(&fun, &seq, 8).unwrap();
    let scale = (0..=8).map(|n| g[n][n].norm()).fold(0.0, f64::max);
    for n in 0..=8 {
        assert!(rel(g[n][n], aw_squared_norm(&f, n).unwrap()) < 1e-8, "diag {n}");
        for m in 0..n {
            assert!(g[n][m].norm() <= 1e-8 * scale, "entry {n},{m}");
        }
    }
    let fine = aw_circle_functional(&f, 2 * DEFAULT_NODES).unwrap();
    let g2 = gram_matrix(&fine, &seq, 8).unwrap();
    for n in 0..=8 {
        for m in 0..=8 {
            assert!((g[n][m] - g2[n][m]).norm() <= 1e-10 * scale.max(1.0));
        }
    }
    assert!(aw_circle_functional(&f, 100).is_err());
    assert!(matches!(aw_circle_functional(&aw([1.3, -0.2, 0.4, 0.25], 0.55), 64), Err(Error::ParamsOutsideDisk)));
}

#[test]
fn circle_functional_reproduces_moments() {
    let f = aw([0.3, -0.2, 0.4, 0.25], 0.55);
    let fun = aw_circle_functional(&f, DEFAULT_NODES).unwrap();
    assert!(moment_mismatch(&fun, &rec(&f), 16).unwrap() < 1e-8);
}

#[test]
fn big_jacobi_jackson_functional() {
    let f = bqj(0.4, 0.3, -0.7, 0.5);
    let fun = bqj_functional(&f, DEFAULT_TAIL_TOL).unwrap();
    assert!(moment_mismatch(&fun, &rec(&f), 12).unwrap() < 1e-9);
    assert_eq!(fun.tail().len(), 2);
    let fun = fun.self_normalized().unwrap();
    for m in fun.masses().unwrap() {
        let w = fun.normalization * m.weight;
        assert!(w.re > 0.0 && w.im.abs() < 1e-14, "{w:?}");
    }
}

#[test]
fn qracah_functional_is_finite_and_orthogonal() {
    let f = aw([3.2, 5.0, 0.35, 0.15], 0.5);
    let fun = qracah_functional(&f).unwrap();
    assert_eq!(fun.masses().unwrap().len(), 5);
    assert!(moment_mismatch(&fun, &rec(&f), 8).unwrap() < 1e-8);
    let seq = f.sequence(4).unwrap();
    let g = gram_matrix(&fun, &seq, 4).unwrap();
    for n in 0..=4 {
        assert!(g[n][n].norm() > 1e-10);
    }
    assert!(qracah_functional(&aw([0.3, -0.2, 0.4, 0.25], 0.55)).is_err());
}

#[test]
fn degenerate_limit_functional() {
    let f = aw([2.0, 16.0, 0.35, 0.15], 0.5);
    let a = aw_limit_weights(&f).unwrap();
    assert_eq!(a.len(), 6);
    assert!(rel(a[0].0, r(1.0)) < 1e-14);
    for j in [1, 3, 4, 5] {
        assert!(a[j].0.norm() < 1e-14, "A_{j}");
    }
    let q = r(0.5);
    let alpha = r(2.0);
    for j in 0..=2 {
        assert!(rel(aw_mu(alpha, q, j), aw_mu(alpha, q, 2 - j)) < 1e-14);
    }
    let fun = aw_degenerate_functional(&f).unwrap();
    assert!(fun.masses().unwrap().iter().any(|m| m.order == 1));
    assert!(moment_mismatch(&fun, &rec(&f), 10).unwrap() < 1e-8);
    let seq = f.sequence(6).unwrap();
    assert!(scaled_offdiag(&fun, &seq, 6).unwrap() < 1e-12);
    let g = gram_matrix(&fun, &seq, 5).unwrap();
    for n in 0..=5 {
        assert!(g[n][n].norm() > 1e-10);
    }
}

#[test]
fn limit_weight_derivatives_match_differences() {
    let f = aw([2.0, 16.0, 0.35, 0.15], 0.5);
    let p = f.params();
    let q = *f.q();
    let h = 1e-6;
    for j in 0..6 {
        let fp = aw_a_factors(p[0] + h, p[2], p[3], q, 6, j).value();
        let fm = aw_a_factors(p[0] - h, p[2], p[3], q, 6, j).value();
        let exact = aw_a_factors(p[0], p[2], p[3], q, 6, j).derivative();
        assert!((exact - (fp - fm) / (2.0 * h)).norm() < 1e-6 * exact.norm().max(1.0), "j={j}");
    }
}

#[test]
fn hahn_and_b_limit_functionals() {
    let q = r(0.5);
    let hahn = qhahn_functional(r(0.4), r(0.3), 4, q).unwrap();
    assert!(moment_mismatch(&hahn, &rec(&bqj(0.4, 0.3, 16.0, 0.5)), 6).unwrap() < 1e-8);
    let lim = bqj_blimit_functional(r(0.4), r(-0.7), 4, q).unwrap();
    assert!(moment_mismatch(&lim, &rec(&bqj(0.4, 16.0, -0.7, 0.5)), 6).unwrap() < 1e-8);
    assert!(blimit_equivalence_residual(r(0.4), r(-0.7), 4, q).unwrap() < 1e-10);
    assert!(qhahn_functional(r(0.4), r(0.3), 0, q).is_err());
}

#[test]
fn christoffel_functional_is_gauss_rule() {
    let f = bqj(0.4, 0.3, -0.7, 0.5);
    let one = christoffel_functional(&rec(&f), 1).unwrap();
    let m = one.masses().unwrap();
    assert_eq!(m.len(), 1);
    assert!(rel(m[0].location, rec(&f).beta(0).unwrap()) < 1e-14);
    assert!(rel(m[0].weight, r(1.0)) < 1e-14);
    let five = christoffel_functional(&rec(&f), 5).unwrap();
    assert!(moment_mismatch(&five, &rec(&f), 9).unwrap() < 1e-8);
    assert!(christoffel_functional(&rec(&f), 0).is_err());
}

#[test]
fn askey_wilson_root_of_unity() {
    let f = aw_root();
    let data = solve_root_of_unity_r(&f).unwrap();
    assert!((data.r.powi(5) - data.target).norm() <= 1e-12);
    assert!(aw_rho_periodicity(&f, &data) < 1e-12);
    let fun = aw_rootofunity_functional(&f, &data, AwNodes::Half).unwrap();
    assert!(moment_mismatch(&fun, &rec(&f), 8).unwrap() < 1e-8);
    let ch = christoffel_functional(&rec(&f), 5).unwrap();
    let (_, dev) = weight_ratio(&fun, &ch, 1e-8).unwrap();
    assert!(dev < 1e-8);
    let full = aw_rootofunity_functional(&f, &data, AwNodes::Full).unwrap();
    assert!(weight_ratio(&full, &ch, 1e-8).is_none());
    let seq = f.sequence(4).unwrap();
    let g = gram_matrix(&fun, &seq, 4).unwrap();
    for n in 0..=4 {
        assert!(g[n][n].norm() > 1e-10);
    }
    // the other square-root branch is a valid root as well
    let alt = RootOfUnityData { r: data.alternate.unwrap(), ..data.clone() };
    let alt_fun = aw_rootofunity_functional(&f, &alt, AwNodes::Half).unwrap();
    assert!(weight_ratio(&alt_fun, &ch, 1e-8).unwrap().1 < 1e-8);
}

#[test]
fn big_jacobi_root_of_unity_at_c_one() {
    let f = bqj_root_c1();
    let data = solve_root_of_unity_r(&f).unwrap();
    assert!((data.target - r(1.0)).norm() < 1e-12);
    assert!((data.r - r(1.0)).norm() < 1e-12);
    let fun = bqj_rootofunity_functional(&f, &data).unwrap();
    assert!(moment_mismatch(&fun, &rec(&f), 8).unwrap() < 1e-8);
    let ch = christoffel_functional(&rec(&f), 5).unwrap();
    assert!(weight_ratio(&fun, &ch, 1e-8).unwrap().1 < 1e-8);
    let stated = bqj_c1_stated_weights(&f).unwrap();
    let q = *f.q();
    let masses = fun.masses().unwrap();
    for (s, w) in stated.iter().enumerate().skip(1) {
        let m = masses.iter().find(|m| (m.location - q.powi(s as i32)).norm() < 1e-10).unwrap();
        assert!(rel(fun.normalization * m.weight, *w) < 1e-8, "s={s}");
    }
    let rest: C64 = stated.iter().skip(1).sum();
    let w0 = masses.iter().find(|m| (m.location - r(1.0)).norm() < 1e-10).unwrap().weight * fun.normalization;
    assert!(rel(w0, r(1.0) - rest) < 1e-8);
    assert!(rel(w0, stated[0]) > 1e-2);
}

#[test]
fn root_of_unity_needs_root_mode() {
    let f = bqj(0.4, 0.3, -0.7, 0.5);
    assert!(solve_root_of_unity_r(&f).is_err());
}

#[test]
fn shift_factor_limit_only_at_one() {
    let lim = r(7.0);
    assert_eq!(shift_factor(r(1.0), r(1.0), lim), lim);
    assert!(rel(shift_factor(r(0.5), r(1.0), lim), r(1.0)) < 1e-15);
    assert!(rel(shift_factor(r(0.5), r(2.0), lim), r(0.5 / 0.75)) < 1e-15);
}
