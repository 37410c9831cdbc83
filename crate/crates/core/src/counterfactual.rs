//! Counterfactual goal states: states that avoid the undesired label while
//! staying consistent with the causal rules.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::schema::{witness_of, Mutability, PointInstance, State};
use crate::semantics::Model;

pub const DEFAULT_STATE_CAP: u128 = 100_000_000;

/// Environment variable overriding [`DEFAULT_STATE_CAP`].
pub const STATE_CAP_ENV: &str = "COGS_STATE_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest abstract state space enumeration will walk.
    pub state_cap: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

impl Limits {
    /// Defaults, with the cap taken from `COGS_STATE_CAP` when it parses.
    pub fn from_env() -> Self {
        let state_cap = std::env::var(STATE_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_STATE_CAP);
        Self { state_cap }
    }
}

/// One interval box of counterfactual instances.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterfactualSet {
    pub state: State,
    pub witness: Option<PointInstance>,
}

/// A goal state: the undesired label does not hold and the state is
/// causally consistent.
pub fn is_counterfactual(model: &Model, state: &State) -> bool {
    !model.decide(state).holds() && model.causally_consistent(state).consistent()
}

/// Per-feature candidate cells: immutable features are pinned to `pin`'s
/// cells when given, every other feature ranges over its whole domain.
fn axes(model: &Model, pin: Option<&State>) -> Vec<Vec<usize>> {
    (0..model.schema().len())
        .map(|f| match pin {
            Some(state) if model.schema().feature(f).mutability == Mutability::Immutable => {
                vec![state.cell(f)]
            }
            _ => (0..model.domain_size(f)).collect(),
        })
        .collect()
}

fn checked_size(axes: &[Vec<usize>], limits: &Limits) -> Result<u128> {
    let size = axes
        .iter()
        .fold(1u128, |acc, a| acc.saturating_mul(a.len() as u128));
    if size > limits.state_cap {
        return Err(Error::StateSpaceTooLarge {
            size,
            cap: limits.state_cap,
        });
    }
    Ok(size)
}

/// Visits every state whose first cell is `lead`, in lexicographic order.
fn for_each_with_lead(axes: &[Vec<usize>], lead: usize, mut visit: impl FnMut(&State)) {
    let mut digits = vec![0usize; axes.len()];
    let mut state = State::from_cells(axes.iter().map(|a| a[0]).collect());
    state.set(0, lead);
    loop {
        visit(&state);
        // Odometer increment, last feature fastest.
        let mut f = axes.len();
        loop {
            if f <= 1 {
                return;
            }
            f -= 1;
            digits[f] += 1;
            if digits[f] < axes[f].len() {
                state.set(f, axes[f][digits[f]]);
                break;
            }
            digits[f] = 0;
            state.set(f, axes[f][0]);
        }
    }
}

/// All counterfactual boxes in lexicographic order of declaration and cell
/// order. Work is split over the first feature's cells; output order is the
/// sequential one.
pub fn enumerate_counterfactuals(
    model: &Model,
    pin: Option<&State>,
    limits: &Limits,
) -> Result<Vec<CounterfactualSet>> {
    let axes = axes(model, pin);
    checked_size(&axes, limits)?;
    if axes.is_empty() {
        let empty = State::from_cells(Vec::new());
        return Ok(if is_counterfactual(model, &empty) {
            vec![with_witness(model, empty)]
        } else {
            Vec::new()
        });
    }
    let chunks: Vec<Vec<CounterfactualSet>> = axes[0]
        .par_iter()
        .map(|&lead| {
            let mut found = Vec::new();
            for_each_with_lead(&axes, lead, |s| {
                if is_counterfactual(model, s) {
                    found.push(with_witness(model, s.clone()));
                }
            });
            found
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

/// Number of counterfactual boxes, without materializing them.
pub fn count_counterfactuals(model: &Model, pin: Option<&State>, limits: &Limits) -> Result<u128> {
    let axes = axes(model, pin);
    checked_size(&axes, limits)?;
    if axes.is_empty() {
        return Ok(u128::from(is_counterfactual(
            model,
            &State::from_cells(Vec::new()),
        )));
    }
    Ok(axes[0]
        .par_iter()
        .map(|&lead| {
            let mut n = 0u128;
            for_each_with_lead(&axes, lead, |s| {
                n += u128::from(is_counterfactual(model, s))
            });
            n
        })
        .sum())
}

fn with_witness(model: &Model, state: State) -> CounterfactualSet {
    let witness = witness_of(model.schema(), model.partition(), &state);
    CounterfactualSet {
        state,
        witness: Some(witness),
    }
}
