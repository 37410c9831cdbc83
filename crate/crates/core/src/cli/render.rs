//! Plain-text tables.
//!
//! A path table has one row per feature and the columns
//! `Features | Initial State | Action | (Intermediate | Action)* | Goal State`.
//! Each action column holds one intervention: `Direct` or `Causal` on the
//! changed feature's row and `N/A` elsewhere. Intermediate columns show the
//! full state after each non-final intervention.

use crate::counterfactual::CounterfactualSet;
use crate::planner::Path;
use crate::semantics::{CausalVerdict, Direction, InterventionKind, Model, Outcome};

/// Left-aligned columns separated by ` | `, header underlined.
pub fn table(header: &[String], rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            rows.iter()
                .map(|r| r[c].chars().count())
                .chain(std::iter::once(header[c].chars().count()))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join(" | ").trim_end().to_string()
    };
    let mut out = line(header);
    out.push('\n');
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&rule.join("-+-"));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}

pub fn path_table(model: &Model, path: &Path) -> String {
    let states = path.states();
    let n = path.steps.len();
    let mut header = vec!["Features".to_string(), "Initial State".to_string()];
    for i in 0..n {
        header.push("Action".into());
        header.push(
            if i + 1 == n {
                "Goal State"
            } else {
                "Intermediate"
            }
            .into(),
        );
    }
    if n == 0 {
        header.push("Goal State".into());
    }

    let rows: Vec<Vec<String>> = (0..model.schema().len())
        .map(|f| {
            let mut row = vec![
                model.feature_name(f).to_string(),
                model.value(f, path.initial.cell(f)).to_string(),
            ];
            for (step, after) in path.steps.iter().zip(&states[1..]) {
                row.push(
                    if step.feature == f {
                        match step.kind {
                            InterventionKind::Direct => "Direct",
                            InterventionKind::Causal => "Causal",
                        }
                    } else {
                        "N/A"
                    }
                    .to_string(),
                );
                row.push(model.value(f, after.cell(f)).to_string());
            }
            if n == 0 {
                row.push(model.value(f, path.goal.cell(f)).to_string());
            }
            row
        })
        .collect();
    table(&header, &rows)
}

/// All paths, numbered when there is more than one.
pub fn paths_text(model: &Model, paths: &[Path]) -> String {
    let mut out = String::new();
    for (i, path) in paths.iter().enumerate() {
        if paths.len() > 1 {
            out.push_str(&format!("Path {} of {}\n", i + 1, paths.len()));
        }
        out.push_str(&path_table(model, path));
        out.push_str(&format!("Direct interventions: {}\n", path.direct_count));
        if i + 1 < paths.len() {
            out.push('\n');
        }
    }
    out
}

pub fn check_text(model: &Model, outcome: &Outcome, verdict: &CausalVerdict) -> String {
    let yes_no = |b: bool| if b { "yes" } else { "no" };
    let mut out = format!(
        "undesired: {}; causal: {}\n",
        yes_no(outcome.holds()),
        if verdict.consistent() {
            "consistent"
        } else {
            "inconsistent"
        }
    );
    let negation = if outcome.holds() { "" } else { "not " };
    out.push_str(&format!("decision: {negation}{}\n", outcome.label));
    if outcome.holds() {
        let fired: Vec<String> = outcome.fired_rules.iter().map(|i| i.to_string()).collect();
        out.push_str(&format!("fired decision rules: {}\n", fired.join(", ")));
    }
    for v in &verdict.violations {
        let direction = match v.direction {
            Direction::Forward => "forward",
            Direction::Completion => "completion",
        };
        out.push_str(&format!(
            "violation: {direction} on {} (causal rule {})\n",
            model.feature_name(v.feature),
            v.rule
        ));
    }
    out
}

pub fn count_text(dataset: &str, features: usize, count: u128) -> String {
    table(
        &[
            "Dataset".into(),
            "# of Features Used".into(),
            "# of Counterfactuals".into(),
        ],
        &[vec![
            dataset.to_string(),
            features.to_string(),
            count.to_string(),
        ]],
    )
}

pub fn sets_text(model: &Model, sets: &[CounterfactualSet]) -> String {
    let header: Vec<String> = (0..model.schema().len())
        .map(|f| model.feature_name(f).to_string())
        .collect();
    let rows: Vec<Vec<String>> = sets
        .iter()
        .map(|s| {
            (0..model.schema().len())
                .map(|f| model.value(f, s.state.cell(f)).to_string())
                .collect()
        })
        .collect();
    let mut out = table(&header, &rows);
    out.push_str(&format!("Counterfactual sets: {}\n", sets.len()));
    out
}
