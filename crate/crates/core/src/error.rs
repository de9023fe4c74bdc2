use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong while building models, computing
/// coincidence statistics or estimating reliability.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid category set: {0}")]
    InvalidCategories(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unmapped category {0:?}")]
    UnmappedCategory(String),

    #[error("unknown category {0:?}")]
    UnknownCategory(String),

    #[error("need at least two raters")]
    NeedTwoRaters,

    #[error("instance too large for oracle ({0} joint outcomes)")]
    InstanceTooLarge(u128),

    #[error("degenerate true distribution: all items belong to {0:?}")]
    DegenerateTrueDistribution(String),

    #[error("upper a-priori bound must be < 1")]
    UpperBoundTooLarge,

    #[error("need triple coincidences (at least three raters)")]
    NeedTripleCoincidences,

    #[error("use two-star path: C* has {0} categories")]
    UseTwoStarPath(usize),

    #[error("category not in C*: {0:?}")]
    NotInCstar(String),

    #[error("inconsistent pairwise stats")]
    InconsistentPairwise,

    #[error("base-rate category degenerate: e1[{0:?}] = {1}")]
    BaseRateDegenerate(String, f64),

    #[error("two categories need three raters")]
    TwoCategoriesNeedThreeRaters,

    #[error("no successful replications")]
    NoSuccessfulReplications,

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
