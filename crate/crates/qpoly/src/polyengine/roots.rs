//! Polynomial roots with multiplicities.
//!
//! Eigenvalues of the balanced companion matrix by single-shift complex QR,
//! Newton polishing on the original polynomial, then greedy clustering.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::Real;

/// Default clustering radius for multiplicity detection.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-5;

/// A root and its detected multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Root<T> {
    pub location: Complex<T>,
    pub multiplicity: usize,
}

/// All roots of `p` (degree at least one), clustered within `cluster_tol`.
pub fn roots<T: Real>(p: &Poly<Complex<T>>, cluster_tol: f64) -> Result<Vec<Root<T>>> {
    let p = p.clone().trim(0.0);
    let n = p.degree();
    if n == 0 {
        return Err(Error::InvalidArgument("roots of a constant".into()));
    }
    let lc = *p.leading();
    let monic: Vec<Complex<T>> = p.coeffs().iter().map(|c| *c / lc).collect();
    let mut h = companion(&monic);
    balance(&mut h);
    let mut eig = hessenberg_eigenvalues(h)?;
    for z in eig.iter_mut() {
        *z = polish(&p, *z);
    }
    Ok(cluster(&p, eig, T::from_f64(cluster_tol).unwrap_or_else(T::epsilon)))
}

fn companion<T: Real>(monic: &[Complex<T>]) -> Vec<Vec<Complex<T>>> {
    let n = monic.len() - 1;
    let mut h = vec![vec![Complex::zero(); n]; n];
    for j in 0..n {
        h[0][j] = -monic[n - 1 - j];
    }
    for i in 1..n {
        h[i][i - 1] = Complex::one();
    }
    h
}

/// Diagonal similarity equalizing row and column norms (Parlett–Reinsch).
fn balance<T: Real>(h: &mut [Vec<Complex<T>>]) {
    let n = h.len();
    let two = T::one() + T::one();
    for _ in 0..100 {
        let mut done = true;
        for i in 0..n {
            let mut c = T::zero();
            let mut r = T::zero();
            for j in 0..n {
                if j != i {
                    c = c + h[j][i].norm();
                    r = r + h[i][j].norm();
                }
            }
            if c.is_zero() || r.is_zero() {
                continue;
            }
            let s = c + r;
            let mut f = T::one();
            let mut cc = c;
            while cc < r / two {
                cc = cc * two;
                f = f * two;
            }
            while cc >= r * two {
                cc = cc / two;
                f = f / two;
            }
            if (cc + r / f) < T::from_f64(0.95).unwrap() * s {
                done = false;
                for j in 0..n {
                    h[i][j] = h[i][j] / f;
                    h[j][i] = h[j][i] * f;
                }
            }
        }
        if done {
            break;
        }
    }
}

fn hessenberg_eigenvalues<T: Real>(mut h: Vec<Vec<Complex<T>>>) -> Result<Vec<Complex<T>>> {
    let n = h.len();
    let eps = T::epsilon();
    let mut out = Vec::with_capacity(n);
    let mut hi = n;
    let mut iter = 0usize;
    let max_iter = 60 * n.max(1);
    while hi > 0 {
        let top = hi - 1;
        let mut lo = top;
        while lo > 0 {
            let s = h[lo - 1][lo - 1].norm() + h[lo][lo].norm();
            if h[lo][lo - 1].norm() <= eps * s {
                h[lo][lo - 1] = Complex::zero();
                break;
            }
            lo -= 1;
        }
        if lo == top {
            out.push(h[top][top]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > max_iter {
            return Err(Error::NonConvergence { what: "companion QR", iterations: iter });
        }
        let shift = if iter % 11 == 10 {
            h[top][top] + Complex::new(h[top][top - 1].norm(), T::zero())
        } else {
            wilkinson(h[top - 1][top - 1], h[top - 1][top], h[top][top - 1], h[top][top])
        };
        qr_step(&mut h, lo, top, shift);
    }
    Ok(out)
}

fn wilkinson<T: Real>(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Complex<T> {
    let two = T::one() + T::one();
    let half = (a - d) / two;
    let disc = (half * half + b * c).sqrt();
    let m = (a + d) / two;
    let (r1, r2) = (m + disc, m - disc);
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// One explicit shifted QR sweep on rows/columns `lo..=hi` via Givens rotations.
fn qr_step<T: Real>(h: &mut [Vec<Complex<T>>], lo: usize, hi: usize, shift: Complex<T>) {
    for k in lo..=hi {
        h[k][k] = h[k][k] - shift;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let x = h[k][k];
        let y = h[k + 1][k];
        let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
        let (c, s) = if r.is_zero() {
            (Complex::one(), Complex::zero())
        } else {
            (x / r, y / r)
        };
        for j in k..=hi {
            let (u, v) = (h[k][j], h[k + 1][j]);
            h[k][j] = c.conj() * u + s.conj() * v;
            h[k + 1][j] = -s * u + c * v;
        }
        rots.push((c, s));
    }
    for (i, (c, s)) in rots.into_iter().enumerate() {
        let k = lo + i;
        for row in h.iter_mut().take((k + 2).min(hi + 1)).skip(lo) {
            let (u, v) = (row[k], row[k + 1]);
            row[k] = u * c + v * s;
            row[k + 1] = -u * s.conj() + v * c.conj();
        }
    }
    for k in lo..=hi {
        h[k][k] = h[k][k] + shift;
    }
}

fn polish<T: Real>(p: &Poly<Complex<T>>, z0: Complex<T>) -> Complex<T> {
    let dp = p.derivative();
    let mut z = z0;
    let mut best = p.eval(&z).norm();
    for _ in 0..20 {
        let d = dp.eval(&z);
        if d.norm().is_zero() {
            break;
        }
        let cand = z - p.eval(&z) / d;
        let v = p.eval(&cand).norm();
        if !(v < best) {
            break;
        }
        best = v;
        z = cand;
    }
    z
}

fn cluster<T: Real>(p: &Poly<Complex<T>>, mut eig: Vec<Complex<T>>, tol: T) -> Vec<Root<T>> {
    eig.sort_by(|a, b| {
        a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal).then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    let mut used = vec![false; eig.len()];
    let mut out = Vec::new();
    for i in 0..eig.len() {
        if used[i] {
            continue;
        }
        let mut members = vec![eig[i]];
        used[i] = true;
        for j in i + 1..eig.len() {
            if !used[j] && (eig[j] - eig[i]).norm() <= tol {
                used[j] = true;
                members.push(eig[j]);
            }
        }
        let m = members.len();
        let count = T::from_usize(m).unwrap();
        let mean = members.iter().fold(Complex::zero(), |a: Complex<T>, b| a + *b) / count;
        let location = if m > 1 { refine_multiple(p, mean, m) } else { mean };
        out.push(Root { location, multiplicity: m });
    }
    out
}

/// Newton on the `(m-1)`th derivative, where a root of multiplicity `m` is simple.
fn refine_multiple<T: Real>(p: &Poly<Complex<T>>, z0: Complex<T>, m: usize) -> Complex<T> {
    let mut d = p.clone();
    for _ in 0..m - 1 {
        d = d.derivative();
    }
    let z = polish(&d, z0);
    if p.eval(&z).norm() <= p.eval(&z0).norm() {
        z
    } else {
        z0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{c64, C32, C64};

    fn sorted(mut r: Vec<Root<f64>>) -> Vec<Root<f64>> {
        r.sort_by(|a, b| a.location.re.partial_cmp(&b.location.re).unwrap());
        r
    }

    #[test]
    fn simple_pair() {
        let p = Poly::new(vec![c64(-1.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)]);
        let r = sorted(roots(&p, DEFAULT_CLUSTER_TOL).unwrap());
        assert_eq!(r.len(), 2);
        assert!((r[0].location - c64(-1.0, 0.0)).norm() < 1e-14);
        assert!((r[1].location - c64(1.0, 0.0)).norm() < 1e-14);
        assert!(r.iter().all(|x| x.multiplicity == 1));
    }

    #[test]
    fn perfect_square() {
        let p = Poly::new(vec![c64(4.0, 0.0), c64(-4.0, 0.0), c64(1.0, 0.0)]);
        let r = roots(&p, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].multiplicity, 2);
        assert!((r[0].location - c64(2.0, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn mixed_multiplicities_and_complex_roots() {
        let rs = [c64(0.5, 0.3), c64(0.5, 0.3), c64(-1.2, 0.0), c64(0.1, -2.0), c64(0.1, -2.0), c64(0.1, -2.0)];
        let p: Poly<C64> = Poly::from_roots(&rs);
        let r = roots(&p, 1e-3).unwrap();
        let total: usize = r.iter().map(|x| x.multiplicity).sum();
        assert_eq!(total, 6);
        let mut mults: Vec<usize> = r.iter().map(|x| x.multiplicity).collect();
        mults.sort();
        assert_eq!(mults, vec![1, 2, 3]);
    }

    #[test]
    fn single_precision_roots() {
        let p: Poly<C32> = Poly::from_roots(&[C32::new(0.5, 0.0), C32::new(-0.25, 1.0), C32::new(2.0, 0.0)]);
        let r = roots(&p, 1e-3).unwrap();
        assert_eq!(r.len(), 3);
        for x in r {
            assert!(p.eval(&x.location).norm() < 1e-4);
        }
    }

    proptest::proptest! {
        #[test]
        fn residuals_are_small(c in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 2..14)) {
            let mut coeffs: Vec<C64> = c.iter().map(|(a, b)| c64(*a, *b)).collect();
            coeffs.push(c64(1.0, 0.0));
            let p = Poly::new(coeffs);
            let r = roots(&p, 1e-9).unwrap();
            let total: usize = r.iter().map(|x| x.multiplicity).sum();
            proptest::prop_assert_eq!(total, p.degree());
            let scale = p.max_abs_coeff();
            for x in &r {
                let mag = x.location.norm().max(1.0).powi(p.degree() as i32);
                proptest::prop_assert!(p.eval(&x.location).norm() <= 1e-8 * scale * mag);
            }
        }
    }
}
