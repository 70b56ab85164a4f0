use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed group descriptor {0:?}: expected Z<m> factors joined by 'x'")]
    MalformedGroup(String),
    #[error("cyclic factor order must be at least 1, got {0}")]
    InvalidFactor(u64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("flat index {index} out of range for group of order {order}")]
    IndexOutOfRange { index: usize, order: usize },
    #[error("group order {order} exceeds the configured bound {bound}")]
    OrderBound { order: usize, bound: usize },
    #[error("element set is not a subgroup: {0}")]
    NotASubgroup(&'static str),
    #[error("subgroup belongs to a group of order {found}, expected {expected}")]
    ForeignSubgroup { expected: usize, found: usize },
    #[error("non-finite weight at index {0}")]
    NonFinite(usize),
    #[error("negative mass {value} at index {index}")]
    NegativeMass { index: usize, value: f64 },
    #[error("total mass {0} deviates from 1 beyond the pre-normalization tolerance")]
    MassDeviation(f64),
    #[error("measure is not strictly positive at index {index} (weight {value})")]
    NotStrictlyPositive { index: usize, value: f64 },
    #[error("operation requires the trivial subgroup, operator has a subgroup of order {0}")]
    NontrivialSubgroup(usize),
    #[error("operator subgroup is not contained in the quotient subgroup")]
    SubgroupNotContained,
    #[error("dense coefficient storage refused for order {order} (bound {bound})")]
    DenseStorageBound { order: usize, bound: usize },
    #[error("envelope argument {0} outside (0, 1]")]
    EnvelopeDomain(f64),
    #[error("infeasible envelope problem: n·p = {0} < 1")]
    Infeasible(f64),
    #[error("the Haar center has no expanding tangent direction")]
    CenterHasNoUnstableDirection,
    #[error("state lies on the pre-period of its orbit (pre-period {0}), not on the cycle")]
    NotPeriodic(usize),
    #[error("Volterra parameter {name} = {value} outside [-1, 1]")]
    VolterraParameter { name: &'static str, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
