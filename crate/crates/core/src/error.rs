use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("an environment needs at least two arms, got {0}")]
    TooFewArms(usize),
    #[error("bernoulli p must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("gaussian mean must be finite, got {0}")]
    InvalidMean(f64),
    #[error("gaussian variance must be positive and finite, got {0}")]
    InvalidVariance(f64),
    #[error("arm {arm}: {source}")]
    InvalidArm {
        arm: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
    #[error("alpha must exceed 1, got {0}")]
    InvalidAlpha(f64),
    #[error("sigma2 must be positive and finite, got {0}")]
    InvalidSigma2(f64),
    #[error("horizon must be at least 2, got {0}")]
    HorizonTooShort(u64),
    #[error("replications must be at least 1")]
    NoReplications,
    #[error("trace_stride must be at least 1")]
    ZeroStride,
    #[error("step {got} recorded out of order, expected step {expected}")]
    StepOutOfOrder { expected: u64, got: u64 },
    #[error("arm index {arm} out of range for {arms} arms")]
    ArmOutOfRange { arm: usize, arms: usize },
    #[error("probability must lie strictly between 0 and 1, got {0}")]
    ProbabilityDomain(f64),
    #[error("check requires rewards bounded in [0, 1]")]
    UnboundedEnvironment,
    #[error("check requires the batched policy")]
    RequiresBatched,
    #[error("invalid check parameter: {0}")]
    InvalidParameter(String),
    #[error("invariant violated (seed {seed}, replication {replication}): {detail}")]
    InvariantViolation {
        seed: u64,
        replication: u64,
        detail: String,
    },
}

impl Error {
    pub(crate) fn arm(arm: usize, source: Error) -> Self {
        Error::InvalidArm {
            arm,
            source: alloc::boxed::Box::new(source),
        }
    }
}
