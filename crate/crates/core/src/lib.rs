//! Counterfactual explanations with intervention paths for rule-based
//! decision models.
//!
//! Given decision rules for an undesired outcome and causal rules among
//! features, the crate enumerates counterfactual goal states (states that
//! avoid the outcome and respect the causal rules read as "if and only if")
//! and plans minimal sequences of direct interventions, each followed by the
//! causal changes it triggers, from an initial instance to a goal.
//!
//! ```
//! use cogs::{find_minimal_paths, parse_ruleset, Model, PlanOptions, PointInstance, PointValue};
//!
//! let rules = parse_ruleset(
//!     "feature debt numeric [0, 100000].\n\
//!      feature credit_score numeric [300, 850] causal.\n\
//!      decision reject :- credit_score <= 599.\n\
//!      causal credit_score == 620 :- debt == 0.\n",
//! )?;
//! let model = Model::new(rules)?;
//! let john = PointInstance::new(
//!     model.schema(),
//!     vec![PointValue::Numeric(6000.0), PointValue::Numeric(550.0)],
//! )?;
//! let paths = find_minimal_paths(&model, &model.box_of(&john)?, &PlanOptions::default())?;
//! assert_eq!(paths[0].direct_count, 1);
//! assert_eq!(paths[0].steps.len(), 2);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod cli;
pub mod counterfactual;
pub mod error;
pub mod planner;
pub mod rules;
pub mod schema;
pub mod semantics;

pub use counterfactual::{
    count_counterfactuals, enumerate_counterfactuals, is_counterfactual, CounterfactualSet, Limits,
};
pub use error::{Error, Result};
pub use planner::{
    apply, find_minimal_paths, legal_direct_actions, replay, DirectAction, Path, PlanOptions,
};
pub use rules::{collect_thresholds, parse_ruleset, serialize_ruleset, stratify, RuleSet};
pub use schema::{
    box_of, discretize, state_space_size, AtomicInterval, FeatureSchema, Partition, PointInstance,
    PointValue, State,
};
pub use semantics::{CausalVerdict, Intervention, InterventionKind, Model, Outcome};
