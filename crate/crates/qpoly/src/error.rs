use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("base q must satisfy |q| < 1 (got |q| = {0})")]
    BaseOutOfDisk(f64),
    #[error("degenerate base q = 1")]
    DegenerateBase,
    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },
    #[error("denominator Pochhammer vanishes at term {k}")]
    DegenerateDenominator { k: usize },
    #[error("family is not normal: {0}")]
    NonNormal(String),
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("missing parameter `{0}`")]
    MissingParam(String),
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("invalid root of unity: {0}")]
    BadRootOfUnity(String),
    #[error("family {0} has no recurrence stream")]
    EvalOnlyFamily(String),
    #[error("recurrence coefficient has a pole at n = {n}")]
    PoleInCoefficient { n: usize },
    #[error("identity {identity} does not apply: {reason}")]
    InapplicableIdentity { identity: String, reason: String },
    #[error("need moments up to degree {needed}, have {have}")]
    MomentsTooShort { needed: usize, have: usize },
    #[error("operator output is not a polynomial (guard mismatch {mismatch:e})")]
    NotPolynomialOutput { mismatch: f64 },
    #[error("sample point hits a pole of the operator")]
    SamplePole,
    #[error("parameters must lie inside the unit disk")]
    ParamsOutsideDisk,
    #[error("weight denominator vanishes at index {index}")]
    DegenerateWeight { index: usize },
    #[error("index overlap in the derivative-mass branches (M = {m}, N = {n})")]
    BranchMismatch { m: usize, n: usize },
    #[error("denominator of the root-of-unity equation vanishes")]
    DenominatorVanishes,
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("p_N has a multiple zero near {0}")]
    MultipleZero(String),
    #[error("gamma_{n} does not vanish")]
    GammaNotZero { n: usize },
    #[error("singular leading minor at degree {degree}")]
    SingularMinor { degree: usize },
    #[error("operation needs floating arithmetic: {0}")]
    RequiresFloat(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for errors caused by malformed input rather than mathematics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::UnknownParam(_)
                | Error::MissingParam(_)
                | Error::UnknownFamily(_)
                | Error::BadRootOfUnity(_)
                | Error::InvalidArgument(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
