//! Library-versus-reference checks shared by the integration tests and the
//! acceptance runner. Each returns `Err` with a reproducible description on
//! the first disagreement.

use std::collections::BTreeSet;

use cogs::semantics::Direction;
use cogs::{
    count_counterfactuals, enumerate_counterfactuals, find_minimal_paths, parse_ruleset, replay,
    Error, Limits, Model, PlanOptions, PointInstance, PointValue, State,
};

use super::{generate, rng, sample_in, Cells, Dom, Shape, Space, Spec, Val};

pub fn build(spec: &Spec) -> Result<Model, String> {
    let text = spec.text();
    let rules = parse_ruleset(&text).map_err(|e| format!("parse: {e}\n{text}"))?;
    Model::new(rules).map_err(|e| format!("model: {e}\n{text}"))
}

fn to_point_instance(model: &Model, p: &[Val]) -> PointInstance {
    let values = p
        .iter()
        .enumerate()
        .map(|(f, v)| match v {
            Val::Cat(i) => {
                PointValue::Categorical(model.schema().feature(f).categories()[*i].clone())
            }
            Val::Num(x) => PointValue::Numeric(*x),
        })
        .collect();
    PointInstance::new(model.schema(), values).expect("reference point is in the domain")
}

fn from_point_instance(model: &Model, p: &PointInstance) -> Vec<Val> {
    p.values()
        .iter()
        .enumerate()
        .map(|(f, v)| match v {
            PointValue::Categorical(s) => Val::Cat(
                model
                    .schema()
                    .feature(f)
                    .category_index(s)
                    .expect("known category"),
            ),
            PointValue::Numeric(x) => Val::Num(*x),
        })
        .collect()
}

/// The library's partition must match the reference cells index by index.
fn check_cells(space: &Space, model: &Model) -> Result<(), String> {
    let ctx = || space.spec.text();
    for (f, cells) in space.cells.iter().enumerate() {
        if model.domain_size(f) != cells.len() {
            return Err(format!(
                "feature f{f}: {} cells, reference has {}\n{}",
                model.domain_size(f),
                cells.len(),
                ctx()
            ));
        }
        for (c, &(first, last)) in cells.iter().enumerate() {
            for v in [first, last] {
                if let Val::Num(x) = v {
                    if model.partition().locate(f, x) != Some(c) {
                        return Err(format!("f{f}={x} not in cell {c}\n{}", ctx()));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Counting and enumeration agree with a brute-force filter over the
/// reference state space. Returns the number of goals.
pub fn check_count(seed: u64) -> Result<usize, String> {
    let mut r = rng(seed);
    let space = Space::new(generate(&mut r, Shape::default()));
    let model = build(&space.spec)?;
    check_cells(&space, &model)?;
    let expected = space.goals();
    let limits = Limits::default();
    let count = count_counterfactuals(&model, None, &limits).map_err(|e| e.to_string())?;
    if count != expected.len() as u128 {
        return Err(format!(
            "seed {seed}: count {count}, reference {}\n{}",
            expected.len(),
            space.spec.text()
        ));
    }
    let sets = enumerate_counterfactuals(&model, None, &limits).map_err(|e| e.to_string())?;
    let got: Vec<Cells> = sets.iter().map(|s| s.state.cells().to_vec()).collect();
    if got != expected {
        return Err(format!(
            "seed {seed}: enumeration differs\n{}",
            space.spec.text()
        ));
    }
    for set in &sets {
        if let Some(w) = &set.witness {
            let p = from_point_instance(&model, w);
            if !space.spec.is_goal(&p) || model.box_of(w).map_err(|e| e.to_string())? != set.state {
                return Err(format!(
                    "seed {seed}: witness {p:?} is not a goal in its box"
                ));
            }
        }
    }
    Ok(expected.len())
}

/// Outcome of one planner comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanCheck {
    pub depth: Option<usize>,
    pub all_compared: bool,
}

/// Deepest optimum at which `all` mode is compared as a whole set.
pub const ALL_MODE_DEPTH: usize = 4;

pub fn check_planner(seed: u64) -> Result<PlanCheck, String> {
    let mut r = rng(seed);
    let shape = Shape {
        max_features: 6,
        max_decisions: 6,
        max_state_space: 100_000,
    };
    let (space, initial) = loop {
        let space = Space::new(generate(&mut r, shape));
        if let Some(initial) = space.random_rejected(&mut r) {
            break (space, initial);
        }
    };
    check_planner_on(&space, &initial, &format!("seed {seed}"))
}

/// Planner results from `initial` against breadth-first search and, for
/// shallow optima, against the full set of minimal paths.
pub fn check_planner_on(
    space: &Space,
    initial: &[usize],
    label: &str,
) -> Result<PlanCheck, String> {
    let model = build(&space.spec)?;
    check_cells(space, &model)?;
    let max_depth = 5;
    let expected = space.min_depth(initial, max_depth);
    let ctx = || format!("{label}, initial {initial:?}\n{}", space.spec.text());

    let mut options = PlanOptions {
        max_depth,
        ..PlanOptions::default()
    };
    let first = find_minimal_paths(&model, &State::from_cells(initial.to_vec()), &options);
    let d = match (expected, first) {
        (None, Err(Error::NoPathFound { .. })) => {
            return Ok(PlanCheck {
                depth: None,
                all_compared: false,
            })
        }
        (Some(d), Ok(paths)) => {
            if paths.len() != 1 {
                return Err(format!("expected one path, got {}\n{}", paths.len(), ctx()));
            }
            check_path(space, &model, &paths[0], d).map_err(|e| format!("{e}\n{}", ctx()))?;
            d
        }
        (e, got) => return Err(format!("reference depth {e:?}, planner {got:?}\n{}", ctx())),
    };

    if d > ALL_MODE_DEPTH {
        return Ok(PlanCheck {
            depth: Some(d),
            all_compared: false,
        });
    }
    options.all = true;
    let paths = find_minimal_paths(&model, &State::from_cells(initial.to_vec()), &options)
        .map_err(|e| format!("all mode: {e}\n{}", ctx()))?;
    let oracle = space.all_paths(initial, d);
    let mut got = BTreeSet::new();
    for p in &paths {
        check_path(space, &model, p, d).map_err(|e| format!("{e}\n{}", ctx()))?;
        let seq: Vec<(usize, usize)> = p
            .direct_actions()
            .iter()
            .map(|a| (a.feature, a.cell))
            .collect();
        if !got.insert(seq) {
            return Err(format!("duplicate path\n{}", ctx()));
        }
    }
    if got != oracle {
        return Err(format!(
            "all mode: {} paths, reference {}\n{}",
            got.len(),
            oracle.len(),
            ctx()
        ));
    }
    let first_seq: Vec<(usize, usize)> = paths
        .first()
        .map(|p| {
            p.direct_actions()
                .iter()
                .map(|a| (a.feature, a.cell))
                .collect()
        })
        .unwrap_or_default();
    if oracle.iter().next() != Some(&first_seq) {
        return Err(format!("paths are not in action order\n{}", ctx()));
    }
    Ok(PlanCheck {
        depth: Some(d),
        all_compared: true,
    })
}

fn check_path(space: &Space, model: &Model, path: &cogs::Path, d: usize) -> Result<(), String> {
    if path.direct_count != d || path.direct_actions().len() != d {
        return Err(format!(
            "path has {} direct steps, optimum is {d}",
            path.direct_count
        ));
    }
    let end = replay(model, path).map_err(|e| format!("replay: {e}"))?;
    if end != path.goal || !space.is_goal(path.goal.cells()) {
        return Err("path does not end in a reference goal".into());
    }
    let mut cur = path.initial.cells().to_vec();
    let mut seen = vec![cur.clone()];
    for a in path.direct_actions() {
        cur = space.step(&cur, a.feature, a.cell);
        if !space.consistent(&cur) {
            return Err("path visits an inconsistent state".into());
        }
        if seen.contains(&cur) {
            return Err("path revisits a state".into());
        }
        seen.push(cur.clone());
    }
    if cur != path.goal.cells() {
        return Err("reference replay ends elsewhere".into());
    }
    Ok(())
}

/// Box verdicts against point-wise evaluation, completion, and propagation
/// on random states of one random ruleset. Returns the number of states
/// checked.
pub fn check_semantics(seed: u64, states: usize, samples: usize) -> Result<usize, String> {
    let mut r = rng(seed);
    let space = Space::new(generate(&mut r, Shape::default()));
    let model = build(&space.spec)?;
    check_cells(&space, &model)?;
    let spec = &space.spec;
    for _ in 0..states {
        let cells = space.random_state(&mut r);
        let state = State::from_cells(cells.clone());
        let ctx = || format!("seed {seed}, state {cells:?}\n{}", spec.text());
        let outcome = model.decide(&state);
        let verdict = model.causally_consistent(&state);

        for _ in 0..samples {
            let p: Vec<Val> = cells
                .iter()
                .enumerate()
                .map(|(f, &c)| match spec.feats[f].dom {
                    Dom::Cat(_) => Val::Cat(c),
                    Dom::Num { .. } => {
                        let iv = model.partition().intervals(f)[c];
                        Val::Num(sample_in(
                            &mut r,
                            iv.lower,
                            iv.upper,
                            iv.lower_closed,
                            iv.upper_closed,
                        ))
                    }
                })
                .collect();
            if spec.rejects(&p) != outcome.holds() {
                return Err(format!("decide differs at {p:?}\n{}", ctx()));
            }
            if spec.consistent(&p) != verdict.consistent() {
                return Err(format!("consistency differs at {p:?}\n{}", ctx()));
            }
            let boxed = model
                .box_of(&to_point_instance(&model, &p))
                .map_err(|e| e.to_string())?;
            if boxed != state {
                return Err(format!("{p:?} boxes to {:?}\n{}", boxed.cells(), ctx()));
            }
        }

        let p = space.point(&cells);
        let lib: BTreeSet<usize> = verdict.violations.iter().map(|v| v.feature).collect();
        let reference: BTreeSet<usize> = spec.violations(&p).into_iter().collect();
        if lib != reference {
            return Err(format!(
                "violations {lib:?}, reference {reference:?}\n{}",
                ctx()
            ));
        }
        for v in &verdict.violations {
            let head_holds = spec
                .causal
                .iter()
                .any(|c| c.feature == v.feature && p[v.feature] == c.head);
            let expected = if head_holds {
                Direction::Completion
            } else {
                Direction::Forward
            };
            if v.direction != expected {
                return Err(format!(
                    "violation on f{} has direction {:?}\n{}",
                    v.feature,
                    v.direction,
                    ctx()
                ));
            }
        }

        let (next, changes) = model
            .propagate(&state)
            .map_err(|e| format!("propagate: {e}\n{}", ctx()))?;
        let reference = space.cells_of(&spec.propagate(&p));
        if next.cells() != reference.as_slice() {
            return Err(format!(
                "propagate gives {:?}, reference {reference:?}\n{}",
                next.cells(),
                ctx()
            ));
        }
        if changes.len() != cells.iter().zip(&reference).filter(|(a, b)| a != b).count() {
            return Err(format!(
                "propagate recorded {} changes\n{}",
                changes.len(),
                ctx()
            ));
        }
        let (again, more) = model.propagate(&next).map_err(|e| e.to_string())?;
        if again != next || !more.is_empty() {
            return Err(format!("propagate is not idempotent\n{}", ctx()));
        }
        if !model.causally_consistent(&next).forward_consistent() {
            return Err(format!("forward violation after propagate\n{}", ctx()));
        }
    }
    Ok(states)
}

/// Completion read as "if and only if": for each causal head, a state where
/// the head holds is rejected exactly when no rule for it fires. States are
/// built by setting the head on random states. Returns the number of cases.
pub fn check_completion(seed: u64, states: usize) -> Result<usize, String> {
    let mut r = rng(seed);
    let space = Space::new(generate(&mut r, Shape::default()));
    let model = build(&space.spec)?;
    let spec = &space.spec;
    let mut cases = 0;
    for rule in &spec.causal {
        let f = rule.feature;
        let head = space.cell_of(f, rule.head);
        for _ in 0..states {
            let mut cells = space.random_state(&mut r);
            cells[f] = head;
            let p = space.point(&cells);
            let supported = spec
                .causal
                .iter()
                .any(|c| c.feature == f && c.body.iter().all(|b| spec.cond_holds(&p, b)));
            let verdict = model.causally_consistent(&State::from_cells(cells.clone()));
            let on_f: Vec<_> = verdict
                .violations
                .iter()
                .filter(|v| v.feature == f)
                .collect();
            let ok = if supported {
                on_f.is_empty()
            } else {
                on_f.len() == 1 && on_f[0].direction == Direction::Completion
            };
            if !ok {
                return Err(format!(
                    "seed {seed}: head f{f} at {cells:?}, supported {supported}, violations {on_f:?}\n{}",
                    spec.text()
                ));
            }
            cases += 1;
        }
    }
    Ok(cases)
}
