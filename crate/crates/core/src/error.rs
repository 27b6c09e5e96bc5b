use thiserror::Error;

/// Which precondition of a stability decomposition was violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityPrecondition {
    OddModulus,
    UnbalancedSize,
    FullSumset,
}

impl std::fmt::Display for StabilityPrecondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StabilityPrecondition::OddModulus => "modulus is odd",
            StabilityPrecondition::UnbalancedSize => "|A| != m/2",
            StabilityPrecondition::FullSumset => "A+A covers the whole ring",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("integer overflow in {0} (exact i128 arithmetic exceeded)")]
    Overflow(&'static str),

    #[error("degree {degree} exceeds difference order {n}")]
    DegreeTooHigh { degree: usize, n: u32 },

    #[error("not a valid target polynomial: {0}")]
    InvalidTarget(String),

    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u64, right: u64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("stability decomposition precondition violated: {0}")]
    StabilityPrecondition(StabilityPrecondition),

    #[error("{m_star} does not divide {m}")]
    NotADivisor { m: u64, m_star: u64 },

    #[error("colour classes are not balanced: got {size} classes mod {m}, need {m}/2")]
    UnbalancedClasses { m: u64, size: u64 },

    #[error("horizon n = {n} is too small for this construction")]
    TargetTooSmall { n: u64 },

    #[error("k = {k} is not a switch of the coloring")]
    NotASwitch { k: u64 },

    #[error("degenerate gap at k = {k}: p(k) = {p_k}, p(k+1) - p(k) = {m_k}")]
    DegenerateGap { k: u64, p_k: i128, m_k: i128 },

    #[error("switch k = {k} has a non-monotone residue class (j = {class_j})")]
    NonMonotoneSwitch { k: u64, class_j: u64 },

    #[error("derivative vanishes identically; the sieve needs deg(p) >= 1")]
    DerivativeVanishes,

    #[error("factorization budget exhausted; composite cofactor {remaining} left")]
    FactorizationTooHard { remaining: u128 },

    #[error("horizon {horizon} too small; need at least {required}")]
    HorizonTooSmall { horizon: u64, required: u128 },

    #[error("n = {n} too large for exhaustive mode (max {max})")]
    TooLargeForExhaustive { n: u64, max: u64 },

    #[error("at most 2 congruence constraints supported, got {given}")]
    TooManyConstraints { given: usize },

    #[error("coloring domain ends at {domain}, but position {required} is needed")]
    ColoringDomainTooShort { required: u64, domain: u64 },

    #[error("modulus {m} exceeds the dense representation limit {max}")]
    ModulusTooLarge { m: u64, max: u64 },

    #[error("internal invariant broken: {0}")]
    InternalInvariantBroken(String),
}

impl Error {
    /// Stable machine-readable tag, used by the CLI error report.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Overflow(_) => "overflow_exceeded",
            Error::DegreeTooHigh { .. } => "degree_too_high",
            Error::InvalidTarget(_) => "invalid_target",
            Error::Parse { .. } => "parse_error",
            Error::ModulusMismatch { .. } => "modulus_mismatch",
            Error::EmptyInput(_) => "empty_input",
            Error::Precondition(_) => "precondition_violated",
            Error::StabilityPrecondition(_) => "precondition_violated",
            Error::NotADivisor { .. } => "not_a_divisor",
            Error::UnbalancedClasses { .. } => "unbalanced_classes",
            Error::TargetTooSmall { .. } => "target_too_small",
            Error::NotASwitch { .. } => "not_a_switch",
            Error::DegenerateGap { .. } => "degenerate_gap",
            Error::NonMonotoneSwitch { .. } => "non_monotone_switch",
            Error::DerivativeVanishes => "derivative_vanishes",
            Error::FactorizationTooHard { .. } => "factorization_too_hard",
            Error::HorizonTooSmall { .. } => "horizon_too_small",
            Error::TooLargeForExhaustive { .. } => "too_large_for_exhaustive",
            Error::TooManyConstraints { .. } => "too_many_constraints",
            Error::ColoringDomainTooShort { .. } => "coloring_domain_too_short",
            Error::ModulusTooLarge { .. } => "modulus_too_large",
            Error::InternalInvariantBroken(_) => "internal_invariant_broken",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
