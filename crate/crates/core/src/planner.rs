//! Minimal intervention paths from an initial state to a counterfactual goal.
//!
//! Each planning step is one direct intervention followed by causal
//! propagation to a fixpoint. Path length counts direct interventions only.
//! Search is iterative deepening over that length, so the first depth that
//! reaches a goal is the minimum.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use crate::counterfactual::{count_counterfactuals, is_counterfactual, Limits};
use crate::error::{Error, Result};
use crate::schema::{Mutability, State};
use crate::semantics::{Intervention, InterventionKind, Model};

pub const DEFAULT_MAX_DEPTH: usize = 5;

/// Set `feature` to `cell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DirectAction {
    pub feature: usize,
    pub cell: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub initial: State,
    pub steps: Vec<Intervention>,
    pub goal: State,
    pub direct_count: usize,
}

impl Path {
    /// The direct interventions only, in order.
    pub fn direct_actions(&self) -> Vec<DirectAction> {
        self.steps
            .iter()
            .filter(|s| s.kind == InterventionKind::Direct)
            .map(|s| DirectAction {
                feature: s.feature,
                cell: s.to,
            })
            .collect()
    }

    /// The state after each step, starting with `initial`.
    pub fn states(&self) -> Vec<State> {
        let mut out = vec![self.initial.clone()];
        let mut cur = self.initial.clone();
        for step in &self.steps {
            cur.set(step.feature, step.to);
            out.push(cur.clone());
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanOptions {
    pub max_depth: usize,
    /// Return every minimal path instead of the first.
    pub all: bool,
    /// Pin immutable features when counting goals for a `NoPathFound`
    /// diagnosis.
    pub fix_immutables: bool,
    pub limits: Limits,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            max_depth: DEFAULT_MAX_DEPTH,
            all: false,
            fix_immutables: true,
            limits: Limits::default(),
        }
    }
}

/// Every change the agent may make: directly mutable features to any other
/// cell, in declaration then cell order.
pub fn legal_direct_actions(model: &Model, state: &State) -> Vec<DirectAction> {
    let schema = model.schema();
    (0..schema.len())
        .filter(|&f| schema.feature(f).mutability == Mutability::Direct)
        .flat_map(|f| {
            (0..model.domain_size(f))
                .filter(move |&c| c != state.cell(f))
                .map(move |cell| DirectAction { feature: f, cell })
        })
        .collect()
}

/// Performs one direct intervention and closes the result under causal
/// propagation. Returns the new state and the direct step followed by the
/// causal steps it triggered.
pub fn apply(
    model: &Model,
    state: &State,
    action: DirectAction,
) -> Result<(State, Vec<Intervention>)> {
    let direct = Intervention {
        kind: InterventionKind::Direct,
        feature: action.feature,
        from: state.cell(action.feature),
        to: action.cell,
        cause: None,
    };
    let (next, causal) = model.propagate(&state.with(action.feature, action.cell))?;
    let mut steps = Vec::with_capacity(1 + causal.len());
    steps.push(direct);
    steps.extend(causal);
    Ok((next, steps))
}

/// Consistent successors of one state with the steps that reach them.
type Moves = Rc<Vec<(State, Vec<Intervention>)>>;

struct Search<'m> {
    model: &'m Model,
    all: bool,
    /// Largest remaining budget with which a state is known to reach no goal.
    dead: HashMap<State, usize>,
    /// Transition cache.
    moves: HashMap<State, Moves>,
    on_path: Vec<State>,
    steps: Vec<Intervention>,
    found: Vec<Path>,
}

impl Search<'_> {
    /// Boundary states that fail causal consistency are pruned.
    fn successors(&mut self, state: &State) -> Result<Moves> {
        if let Some(m) = self.moves.get(state) {
            return Ok(m.clone());
        }
        let mut out = Vec::new();
        for action in legal_direct_actions(self.model, state) {
            let (next, steps) = apply(self.model, state, action)?;
            if self.model.causally_consistent(&next).consistent() {
                out.push((next, steps));
            }
        }
        let out = Rc::new(out);
        self.moves.insert(state.clone(), out.clone());
        Ok(out)
    }

    /// Depth-first search for goals exactly `budget` direct steps away.
    /// Returns whether any goal was found below `state`.
    fn descend(&mut self, state: &State, budget: usize) -> Result<bool> {
        if budget == 0 {
            if is_counterfactual(self.model, state) {
                self.found.push(Path {
                    initial: self.on_path[0].clone(),
                    steps: self.steps.clone(),
                    goal: state.clone(),
                    direct_count: self.on_path.len() - 1,
                });
                return Ok(true);
            }
            return Ok(false);
        }
        if self.dead.get(state).is_some_and(|&b| b >= budget) {
            return Ok(false);
        }
        let mut any = false;
        for (next, steps) in self.successors(state)?.iter() {
            if self.on_path.contains(next) {
                continue;
            }
            self.on_path.push(next.clone());
            let mark = self.steps.len();
            self.steps.extend(steps.iter().cloned());
            let hit = self.descend(next, budget - 1)?;
            self.steps.truncate(mark);
            self.on_path.pop();
            any |= hit;
            if hit && !self.all {
                return Ok(true);
            }
        }
        if !any {
            let entry = self.dead.entry(state.clone()).or_insert(0);
            *entry = (*entry).max(budget);
        }
        Ok(any)
    }
}

/// Iterative deepening on the number of direct interventions. At the first
/// depth that reaches a goal, returns the first path in action order, or
/// every loop-free path of that depth when `options.all` is set.
pub fn find_minimal_paths(
    model: &Model,
    initial: &State,
    options: &PlanOptions,
) -> Result<Vec<Path>> {
    model.check_state(initial)?;
    if is_counterfactual(model, initial) {
        return Ok(vec![Path {
            initial: initial.clone(),
            steps: Vec::new(),
            goal: initial.clone(),
            direct_count: 0,
        }]);
    }
    let mut search = Search {
        model,
        all: options.all,
        dead: HashMap::new(),
        moves: HashMap::new(),
        on_path: vec![initial.clone()],
        steps: Vec::new(),
        found: Vec::new(),
    };
    for depth in 1..=options.max_depth {
        if search.descend(initial, depth)? {
            let mut seen = HashSet::new();
            let mut paths = search.found;
            paths.retain(|p| seen.insert(p.steps.clone()));
            return Ok(paths);
        }
    }
    let pin = options.fix_immutables.then_some(initial);
    Err(Error::NoPathFound {
        max_depth: options.max_depth,
        counterfactuals: count_counterfactuals(model, pin, &options.limits).ok(),
    })
}

/// Re-executes a path from its initial state, checking every step, and
/// returns the final state.
pub fn replay(model: &Model, path: &Path) -> Result<State> {
    model.check_state(&path.initial)?;
    model.check_state(&path.goal)?;
    let mismatch = |step: usize, reason: String| Error::ReplayMismatch { step, reason };
    let mut state = path.initial.clone();
    let mut i = 0;
    let mut direct_count = 0;
    while i < path.steps.len() {
        let step = &path.steps[i];
        if step.kind != InterventionKind::Direct {
            return Err(mismatch(
                i,
                "causal step without a preceding direct intervention".into(),
            ));
        }
        if step.feature >= model.schema().len() || step.to >= model.domain_size(step.feature) {
            return Err(mismatch(
                i,
                "step refers to a missing feature or cell".into(),
            ));
        }
        let action = DirectAction {
            feature: step.feature,
            cell: step.to,
        };
        if !legal_direct_actions(model, &state).contains(&action) {
            return Err(mismatch(
                i,
                format!(
                    "direct change of `{}` is not legal here",
                    model.feature_name(step.feature)
                ),
            ));
        }
        let (next, expected) = apply(model, &state, action)?;
        let recorded = path
            .steps
            .get(i..i + expected.len())
            .unwrap_or(&path.steps[i..]);
        if recorded != expected.as_slice()
            || path
                .steps
                .get(i + expected.len())
                .is_some_and(|s| s.kind == InterventionKind::Causal)
        {
            return Err(mismatch(
                i,
                "recorded steps differ from the interventions' effects".into(),
            ));
        }
        if i + expected.len() < path.steps.len() && !model.causally_consistent(&next).consistent() {
            return Err(mismatch(
                i,
                "intermediate state is causally inconsistent".into(),
            ));
        }
        state = next;
        i += expected.len();
        direct_count += 1;
    }
    if state != path.goal {
        return Err(mismatch(
            path.steps.len(),
            "final state differs from the recorded goal".into(),
        ));
    }
    if direct_count != path.direct_count {
        return Err(mismatch(
            path.steps.len(),
            "direct step count differs from the record".into(),
        ));
    }
    Ok(state)
}
