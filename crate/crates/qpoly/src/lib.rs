//! Classical q-orthogonal polynomials.
//!
//! Monic sequences are built from their three-term recurrences and compared
//! with basic hypergeometric representations; moment functionals (including
//! the degenerate and root-of-unity cases) and Sobolev-type bilinear forms are
//! realized concretely and checked against the canonical moment functional of
//! the recurrence.
//!
//! The algebraic core is generic over [`Scalar`], so the same code runs in
//! `f32`, `f64` or exact complex rationals:
//!
//! ```
//! use qpoly::{families::{FamilyId, FamilyInstance}, c64, C64};
//!
//! let q = c64(0.5, 0.0);
//! let fam = FamilyInstance::<C64>::new(FamilyId::BigQJacobi, vec![c64(0.4, 0.0), c64(0.3, 0.0), c64(-0.7, 0.0)], q).unwrap();
//! let seq = fam.sequence(4).unwrap();
//! let x = c64(0.2, 0.0);
//! let direct = fam.hyper_eval(4, &x).unwrap();
//! assert!((seq.get(4).eval(&x) - direct).norm() < 1e-12);
//! ```

pub mod error;
pub mod families;
pub mod functionals;
pub mod poly;
pub mod polyengine;
pub mod qdiff;
pub mod qnum;
pub mod scalar;
pub mod sobolev;

pub mod acceptance;

pub use error::{Error, Result};
pub use poly::{MonicPoly, Poly};
pub use scalar::{c64, CExact, Real, Scalar, C32, C64};

/// Double-precision family instance.
pub type Family64 = families::FamilyInstance<C64>;
/// Exact-arithmetic family instance.
pub type FamilyExact = families::FamilyInstance<CExact>;
/// Double-precision moment functional.
pub type Functional64 = functionals::MomentFunctional<f64>;
