//! Sequences generated by the monic three-term recurrence
//! `p_{n+1} = (x - β_n) p_n - γ_n p_{n-1}`, associated polynomials, and the
//! canonical moment functional used as an independent oracle.

mod roots;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{MonicPoly, Poly};
use crate::scalar::Scalar;

pub use roots::{roots, Root, DEFAULT_CLUSTER_TOL};

type CoeffFn<S> = dyn Fn(usize) -> Result<(S, S)> + Send + Sync;

/// Where a coefficient stream came from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Provenance {
    AskeyWilson,
    BigQJacobi,
    Mapped { family: String },
    Table,
    Constant,
    Shifted { by: usize, inner: Box<Provenance> },
}

/// The coefficient streams `n ↦ (β_n, γ_n)`; `γ_0` is reported as zero.
#[derive(Clone)]
pub struct RecurrenceCoeffs<S> {
    source: Arc<CoeffFn<S>>,
    provenance: Provenance,
}

impl<S: Scalar> RecurrenceCoeffs<S> {
    pub fn from_fn<F>(provenance: Provenance, f: F) -> Self
    where
        F: Fn(usize) -> Result<(S, S)> + Send + Sync + 'static,
    {
        RecurrenceCoeffs { source: Arc::new(f), provenance }
    }

    /// Finite tables; queries past the end fail.
    pub fn from_table(betas: Vec<S>, gammas: Vec<S>) -> Self {
        Self::from_fn(Provenance::Table, move |n| match (betas.get(n), gammas.get(n)) {
            (Some(b), Some(g)) => Ok((b.clone(), if n == 0 { S::zero() } else { g.clone() })),
            _ => Err(Error::InvalidArgument(format!("coefficient table has no entry {n}"))),
        })
    }

    pub fn constant(beta: S, gamma: S) -> Self {
        Self::from_fn(Provenance::Constant, move |n| {
            Ok((beta.clone(), if n == 0 { S::zero() } else { gamma.clone() }))
        })
    }

    pub fn get(&self, n: usize) -> Result<(S, S)> {
        let (b, g) = (self.source)(n)?;
        Ok((b, if n == 0 { S::zero() } else { g }))
    }

    pub fn beta(&self, n: usize) -> Result<S> {
        Ok(self.get(n)?.0)
    }

    pub fn gamma(&self, n: usize) -> Result<S> {
        Ok(self.get(n)?.1)
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// The stream `n ↦ (β_{n+N}, γ_{n+N})` of the `N`th associated polynomials.
    pub fn shifted(&self, by: usize) -> Self {
        let inner = self.source.clone();
        RecurrenceCoeffs {
            source: Arc::new(move |n| inner(n + by)),
            provenance: Provenance::Shifted { by, inner: Box::new(self.provenance.clone()) },
        }
    }

    /// Coefficients of `p_n(u x + v) / u^n`.
    pub fn affine(&self, u: S, v: S) -> Self {
        let inner = self.source.clone();
        let provenance = self.provenance.clone();
        RecurrenceCoeffs {
            source: Arc::new(move |n| {
                let (b, g) = inner(n)?;
                Ok(((b - v.clone()) / u.clone(), g / (u.clone() * u.clone())))
            }),
            provenance,
        }
    }

    /// `γ_1 ⋯ γ_n`.
    pub fn gamma_product(&self, n: usize) -> Result<S> {
        let mut acc = S::one();
        for k in 1..=n {
            acc = acc * self.gamma(k)?;
        }
        Ok(acc)
    }
}

impl<S> fmt::Debug for RecurrenceCoeffs<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RecurrenceCoeffs").field("provenance", &self.provenance).finish()
    }
}

/// Monic polynomials `p_0, …, p_{n_max}` with the stream that built them.
#[derive(Clone, Debug)]
pub struct PolySeq<S> {
    polys: Vec<MonicPoly<S>>,
    source: RecurrenceCoeffs<S>,
}

impl<S: Scalar> PolySeq<S> {
    pub fn polys(&self) -> &[MonicPoly<S>] {
        &self.polys
    }

    pub fn get(&self, n: usize) -> &MonicPoly<S> {
        &self.polys[n]
    }

    pub fn n_max(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn source(&self) -> &RecurrenceCoeffs<S> {
        &self.source
    }

    /// Largest coefficient of `p_{n+1} - (x-β_n) p_n + γ_n p_{n-1}` relative to
    /// the coefficient scale of the terms.
    pub fn recurrence_residual(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for n in 1..self.polys.len() - 1 {
            let (b, g) = self.source.get(n)?;
            let lin = Poly::new(vec![-b, S::one()]);
            let step = &lin * self.polys[n].as_poly();
            let tail = self.polys[n - 1].scale(&g);
            let r = &(&self.polys[n + 1].as_poly().clone() - &step) + &tail;
            let scale = step.max_abs_coeff().max(tail.max_abs_coeff()).max(1.0);
            worst = worst.max(r.max_abs_coeff() / scale);
        }
        Ok(worst)
    }
}

/// Run the recurrence up to degree `n_max`.
pub fn generate_seq<S: Scalar>(coeffs: &RecurrenceCoeffs<S>, n_max: usize) -> Result<PolySeq<S>> {
    let mut polys = vec![MonicPoly::one()];
    if n_max >= 1 {
        let b0 = coeffs.beta(0)?;
        polys.push(MonicPoly::from_coeffs_unchecked(vec![-b0, S::one()]));
    }
    for n in 1..n_max {
        let (b, g) = coeffs.get(n)?;
        let pn = polys[n].coeffs();
        let pm = polys[n - 1].coeffs();
        let mut next = vec![S::zero(); n + 2];
        for (k, c) in pn.iter().enumerate() {
            next[k + 1] = next[k + 1].clone() + c.clone();
            next[k] = next[k].clone() - b.clone() * c.clone();
        }
        for (k, c) in pm.iter().enumerate() {
            next[k] = next[k].clone() - g.clone() * c.clone();
        }
        polys.push(MonicPoly::from_coeffs_unchecked(next));
    }
    Ok(PolySeq { polys, source: coeffs.clone() })
}

/// The `N`th associated polynomials `p_n^{(N)}`.
pub fn associated_seq<S: Scalar>(coeffs: &RecurrenceCoeffs<S>, order: usize, n_max: usize) -> Result<PolySeq<S>> {
    if order == 0 {
        return Err(Error::InvalidArgument("associated order must be at least 1".into()));
    }
    generate_seq(&coeffs.shifted(order), n_max)
}

/// Moments `μ_0, …, μ_{k_max}` of a functional.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector<S> {
    pub mu: Vec<S>,
}

impl<S: Scalar> MomentVector<S> {
    pub fn k_max(&self) -> usize {
        self.mu.len() - 1
    }
}

/// Moments of the canonical functional (`L(p_n) = δ_{n0}`) from the table
/// recurrence `L(x^{k+1} p_n) = L(x^k p_{n+1}) + β_n L(x^k p_n) + γ_n L(x^k p_{n-1})`.
pub fn canonical_moments<S: Scalar>(coeffs: &RecurrenceCoeffs<S>, k_max: usize) -> Result<MomentVector<S>> {
    let mut row: Vec<S> = (0..=k_max).map(|n| if n == 0 { S::one() } else { S::zero() }).collect();
    // Only indices n <= k_max/2 ever meet a nonzero entry.
    let cs: Vec<(S, S)> = (0..=k_max / 2).map(|n| coeffs.get(n)).collect::<Result<_>>()?;
    let mut mu = vec![S::one()];
    for k in 0..k_max {
        let width = k_max - k;
        let mut next = Vec::with_capacity(width);
        for n in 0..width {
            if n > k + 1 {
                next.push(S::zero());
                continue;
            }
            let (b, g) = &cs[n];
            let mut v = row[n + 1].clone() + b.clone() * row[n].clone();
            if n > 0 {
                v = v + g.clone() * row[n - 1].clone();
            }
            next.push(v);
        }
        mu.push(next[0].clone());
        row = next;
    }
    Ok(MomentVector { mu })
}

/// Linear extension of the moments to `p`.
pub fn oracle_apply<S: Scalar>(mu: &MomentVector<S>, p: &Poly<S>) -> Result<S> {
    if p.degree() > mu.k_max() {
        return Err(Error::MomentsTooShort { needed: p.degree(), have: mu.k_max() });
    }
    Ok(p.coeffs().iter().zip(&mu.mu).fold(S::zero(), |acc, (c, m)| acc + c.clone() * m.clone()))
}

/// `L(p r)` by direct convolution.
pub fn oracle_apply_product<S: Scalar>(mu: &MomentVector<S>, p: &Poly<S>, r: &Poly<S>) -> Result<S> {
    oracle_apply(mu, &(p * r))
}

/// `T_1(p)(x) = L_t((p(t) - p(x)) / (t - x))`.
pub fn numerator_transform<S: Scalar>(mu: &MomentVector<S>, p: &Poly<S>) -> Result<Poly<S>> {
    let deg = p.degree();
    if deg == 0 {
        return Ok(Poly::zero());
    }
    if deg - 1 > mu.k_max() {
        return Err(Error::MomentsTooShort { needed: deg - 1, have: mu.k_max() });
    }
    let c = p.coeffs();
    let out = (0..deg)
        .map(|j| {
            (j + 1..=deg).fold(S::zero(), |acc, k| acc + c[k].clone() * mu.mu[k - 1 - j].clone())
        })
        .collect();
    Ok(Poly::new(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{c64, CExact, C64};
    use proptest::prelude::*;

    fn random_stream(seed: &[(f64, f64)]) -> RecurrenceCoeffs<C64> {
        let betas = seed.iter().map(|s| c64(s.0, 0.1 * s.1)).collect();
        let gammas = seed.iter().map(|s| c64(0.5 + s.1.abs(), 0.2 * s.0)).collect();
        RecurrenceCoeffs::from_table(betas, gammas)
    }

    #[test]
    fn initial_conditions() {
        let c = RecurrenceCoeffs::constant(c64(0.25, 0.0), c64(1.0, 0.0));
        let s = generate_seq(&c, 1).unwrap();
        assert_eq!(s.get(0).coeffs(), &[c64(1.0, 0.0)]);
        assert_eq!(s.get(1).coeffs(), &[c64(-0.25, 0.0), c64(1.0, 0.0)]);
    }

    #[test]
    fn chebyshev_like_step() {
        let c = RecurrenceCoeffs::constant(CExact::from_int(0), CExact::from_int(1));
        let s = generate_seq(&c, 2).unwrap();
        assert_eq!(s.get(2).coeffs(), &[CExact::from_int(-1), CExact::from_int(0), CExact::from_int(1)]);
    }

    #[test]
    fn associated_initial_terms() {
        let c = RecurrenceCoeffs::from_table(
            (0..6).map(CExact::from_int).collect(),
            (0..6).map(|k| CExact::from_int(k + 1)).collect(),
        );
        let a = associated_seq(&c, 2, 2).unwrap();
        assert_eq!(a.get(0).coeffs(), &[CExact::from_int(1)]);
        assert_eq!(a.get(1).coeffs(), &[CExact::from_int(-2), CExact::from_int(1)]);
        assert!(associated_seq(&c, 0, 2).is_err());
    }

    #[test]
    fn factorization_when_gamma_vanishes() {
        let mut gammas: Vec<CExact> = (0..10).map(|k| CExact::from_parts(0.5 + 0.25 * k as f64, 0.0)).collect();
        gammas[3] = CExact::from_int(0);
        let betas = (0..10).map(|k| CExact::from_parts(0.125 * k as f64 - 0.3, 0.0)).collect();
        let c = RecurrenceCoeffs::from_table(betas, gammas);
        let p = generate_seq(&c, 9).unwrap();
        let a = associated_seq(&c, 3, 6).unwrap();
        for n in 0..=6 {
            assert_eq!(p.get(n + 3).as_poly(), &(p.get(3).as_poly() * a.get(n).as_poly()));
        }
    }

    #[test]
    fn first_moments() {
        let c = RecurrenceCoeffs::from_table(
            vec![c64(0.3, 0.0), c64(-0.2, 0.0), c64(0.1, 0.0)],
            vec![c64(0.0, 0.0), c64(0.7, 0.0), c64(0.4, 0.0)],
        );
        let m = canonical_moments(&c, 2).unwrap();
        assert_eq!(m.mu[0], c64(1.0, 0.0));
        assert_eq!(m.mu[1], c64(0.3, 0.0));
        assert!((m.mu[2] - c64(0.09 + 0.7, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn numerator_transform_examples() {
        let mu = MomentVector { mu: vec![c64(1.0, 0.0), c64(0.4, 0.0), c64(0.9, 0.0)] };
        assert_eq!(numerator_transform(&mu, &Poly::constant(c64(3.0, 0.0))).unwrap(), Poly::zero());
        assert_eq!(numerator_transform(&mu, &Poly::x()).unwrap().coeffs(), &[c64(1.0, 0.0)]);
        let t2 = numerator_transform(&mu, &Poly::monomial(2)).unwrap();
        assert_eq!(t2.coeffs(), &[c64(0.4, 0.0), c64(1.0, 0.0)]);
        let short = MomentVector { mu: vec![c64(1.0, 0.0)] };
        assert!(numerator_transform(&short, &Poly::monomial(3)).is_err());
    }

    #[test]
    fn exact_orthogonality_under_oracle() {
        let c = RecurrenceCoeffs::from_table(
            (0..8).map(|k| CExact::from_parts(0.25 * k as f64, -0.5)).collect(),
            (0..8).map(|k| CExact::from_parts(1.0 + 0.5 * k as f64, 0.25)).collect(),
        );
        let s = generate_seq(&c, 6).unwrap();
        let mu = canonical_moments(&c, 12).unwrap();
        for n in 0..=6 {
            for m in 0..=6 {
                let v = oracle_apply_product(&mu, s.get(n), s.get(m)).unwrap();
                let expect = if n == m { c.gamma_product(n).unwrap() } else { CExact::from_int(0) };
                assert_eq!(v, expect);
            }
        }
    }

    proptest! {
        #[test]
        fn oracle_gram_is_diagonal(seed in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 12)) {
            let c = random_stream(&seed);
            let s = generate_seq(&c, 10).unwrap();
            prop_assert!(s.recurrence_residual().unwrap() <= 1e-12);
            let mu = canonical_moments(&c, 20).unwrap();
            for n in 0..=10 {
                for m in 0..=n {
                    let v = oracle_apply_product(&mu, s.get(n), s.get(m)).unwrap();
                    let d = c.gamma_product(n).unwrap();
                    let scale = s.get(n).max_abs_coeff() * s.get(m).max_abs_coeff()
                        * mu.mu.iter().map(|x| x.norm()).fold(1.0, f64::max);
                    let expect = if n == m { d } else { c64(0.0, 0.0) };
                    prop_assert!((v - expect).norm() <= 1e-10 * scale);
                }
            }
        }

        #[test]
        fn numerator_transform_shifts_recurrence(seed in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 10)) {
            let c = random_stream(&seed);
            let s = generate_seq(&c, 8).unwrap();
            let mu = canonical_moments(&c, 10).unwrap();
            let assoc = associated_seq(&c, 1, 7).unwrap();
            for n in 1..=8 {
                let t = numerator_transform(&mu, s.get(n)).unwrap().into_monic().unwrap();
                let d = crate::poly::rel_coeff_diff(t.as_poly(), assoc.get(n - 1).as_poly());
                prop_assert!(d <= 1e-10);
            }
        }
    }
}
