use thiserror::Error;

use crate::rules::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("domain error on `{feature}`: {reason}")]
    Domain { feature: String, reason: String },

    /// A negative dependency closes a cycle among aux predicates.
    #[error("non-stratified negation through cycle {}", .cycle.join(" -> "))]
    NonStratified { cycle: Vec<String> },

    /// The partition does not keep an atom constant on one of its intervals.
    #[error("internal error: atom `{atom}` is not constant on interval {interval}")]
    NonConstantAtom { atom: String, interval: String },

    #[error(
        "conflicting causes on `{feature}`: rule {first_rule} forces {first_value}, \
         rule {second_rule} forces {second_value}"
    )]
    ConflictingCauses {
        feature: String,
        first_rule: usize,
        first_value: String,
        second_rule: usize,
        second_value: String,
    },

    #[error("causal propagation did not reach a fixpoint within {0} passes")]
    NonTermination(usize),

    #[error("abstract state space has {size} states, above the cap of {cap}")]
    StateSpaceTooLarge { size: u128, cap: u128 },

    #[error("no path found within {max_depth} direct interventions ({})", match .counterfactuals {
        Some(0) => "no counterfactual state exists".to_string(),
        Some(n) => format!("{n} counterfactual sets exist; the bound is too small"),
        None => "counterfactual count unavailable".to_string(),
    })]
    NoPathFound {
        max_depth: usize,
        counterfactuals: Option<u128>,
    },

    #[error("replay mismatch at step {step}: {reason}")]
    ReplayMismatch { step: usize, reason: String },
}

impl Error {
    /// Semantic errors are well-formed inputs that cannot be evaluated, as
    /// opposed to malformed text or unreadable files.
    pub fn is_semantic(&self) -> bool {
        match self {
            Error::Parse(e) => e.is_semantic(),
            Error::NoPathFound { .. } => false,
            _ => true,
        }
    }
}
