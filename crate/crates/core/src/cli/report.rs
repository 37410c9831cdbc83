//! Machine-readable output. States map feature names to cell labels:
//! categorical values verbatim, intervals as `[lo, hi)`-style strings.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::counterfactual::CounterfactualSet;
use crate::error::{Error, Result};
use crate::planner::Path;
use crate::schema::{PointInstance, PointValue, State};
use crate::semantics::{CausalVerdict, Direction, Intervention, InterventionKind, Model, Outcome};

pub type StateJson = IndexMap<String, String>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepJson {
    pub kind: String,
    pub feature: String,
    pub from: String,
    pub to: String,
    /// Index into the ruleset's causal rules.
    pub cause: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathJson {
    pub initial: StateJson,
    pub steps: Vec<StepJson>,
    pub goal: StateJson,
    pub direct_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationJson {
    pub rule: usize,
    pub direction: String,
    pub feature: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckJson {
    pub label: String,
    pub undesired: bool,
    pub fired_rules: Vec<usize>,
    pub consistent: bool,
    pub violations: Vec<ViolationJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountJson {
    pub dataset: String,
    pub features: usize,
    pub count: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetJson {
    pub state: StateJson,
    pub witness: Option<IndexMap<String, serde_json::Value>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerateJson {
    pub count: usize,
    pub sets: Vec<SetJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Paths { paths: Vec<PathJson> },
    Check(CheckJson),
    Count(CountJson),
    Enumerate(EnumerateJson),
}

/// Result of one CLI command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub elapsed_ms: f64,
    pub result: Payload,
}

pub fn state_json(model: &Model, state: &State) -> StateJson {
    (0..model.schema().len())
        .map(|f| {
            (
                model.feature_name(f).to_string(),
                model.value(f, state.cell(f)).to_string(),
            )
        })
        .collect()
}

pub fn state_from_json(model: &Model, json: &StateJson) -> Result<State> {
    let schema = model.schema();
    if json.len() != schema.len() {
        return Err(Error::Schema(format!(
            "state lists {} features, schema has {}",
            json.len(),
            schema.len()
        )));
    }
    let cells = (0..schema.len())
        .map(|f| {
            let name = model.feature_name(f);
            let label = json
                .get(name)
                .ok_or_else(|| Error::Schema(format!("state is missing `{name}`")))?;
            cell_from_label(model, f, label)
        })
        .collect::<Result<_>>()?;
    Ok(State::from_cells(cells))
}

fn cell_from_label(model: &Model, feature: usize, label: &str) -> Result<usize> {
    model
        .cell_by_label(feature, label)
        .ok_or_else(|| Error::Domain {
            feature: model.feature_name(feature).to_string(),
            reason: format!("`{label}` is not a cell"),
        })
}

pub fn path_json(model: &Model, path: &Path) -> PathJson {
    PathJson {
        initial: state_json(model, &path.initial),
        steps: path
            .steps
            .iter()
            .map(|s| StepJson {
                kind: match s.kind {
                    InterventionKind::Direct => "direct",
                    InterventionKind::Causal => "causal",
                }
                .into(),
                feature: model.feature_name(s.feature).to_string(),
                from: model.value(s.feature, s.from).to_string(),
                to: model.value(s.feature, s.to).to_string(),
                cause: s.cause,
            })
            .collect(),
        goal: state_json(model, &path.goal),
        direct_count: path.direct_count,
    }
}

/// Rebuilds a [`Path`] from its JSON form; replay it to validate.
pub fn path_from_json(model: &Model, json: &PathJson) -> Result<Path> {
    let steps = json
        .steps
        .iter()
        .map(|s| {
            let feature = model
                .schema()
                .index_of(&s.feature)
                .ok_or_else(|| Error::Schema(format!("unknown feature `{}`", s.feature)))?;
            let kind = match s.kind.as_str() {
                "direct" => InterventionKind::Direct,
                "causal" => InterventionKind::Causal,
                other => return Err(Error::Schema(format!("unknown step kind `{other}`"))),
            };
            Ok(Intervention {
                kind,
                feature,
                from: cell_from_label(model, feature, &s.from)?,
                to: cell_from_label(model, feature, &s.to)?,
                cause: s.cause,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Path {
        initial: state_from_json(model, &json.initial)?,
        steps,
        goal: state_from_json(model, &json.goal)?,
        direct_count: json.direct_count,
    })
}

pub fn check_json(model: &Model, outcome: &Outcome, verdict: &CausalVerdict) -> CheckJson {
    CheckJson {
        label: outcome.label.clone(),
        undesired: outcome.holds(),
        fired_rules: outcome.fired_rules.clone(),
        consistent: verdict.consistent(),
        violations: verdict
            .violations
            .iter()
            .map(|v| ViolationJson {
                rule: v.rule,
                direction: match v.direction {
                    Direction::Forward => "forward",
                    Direction::Completion => "completion",
                }
                .into(),
                feature: model.feature_name(v.feature).to_string(),
            })
            .collect(),
    }
}

fn witness_json(model: &Model, witness: &PointInstance) -> IndexMap<String, serde_json::Value> {
    witness
        .values()
        .iter()
        .enumerate()
        .map(|(f, v)| {
            let value = match v {
                PointValue::Categorical(s) => serde_json::Value::from(s.as_str()),
                PointValue::Numeric(x) => serde_json::Value::from(*x),
            };
            (model.feature_name(f).to_string(), value)
        })
        .collect()
}

pub fn set_json(model: &Model, set: &CounterfactualSet) -> SetJson {
    SetJson {
        state: state_json(model, &set.state),
        witness: set.witness.as_ref().map(|w| witness_json(model, w)),
    }
}
