//! Evaluation of rules on interval-box states.
//!
//! A [`Model`] binds a [`RuleSet`] to its partition and precompiles every
//! atom into a truth table over the cells of its feature. Causal rules are
//! read under completion: a head value may hold only while some rule for
//! that value fires.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::rules::{
    collect_thresholds, stratify, Atom, Head, Literal, Operand, Rule, RuleSet, Term,
};
use crate::schema::{
    box_of, cell_value, discretize, domain_size, state_space_size, CellValue, Domain,
    FeatureSchema, Partition, PointInstance, State,
};

/// Whether the undesired label holds, and through which decision rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub label: String,
    /// Indices into `RuleSet::decision_rules`.
    pub fired_rules: Vec<usize>,
}

impl Outcome {
    pub fn holds(&self) -> bool {
        !self.fired_rules.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// A rule fires but its head value does not hold.
    Forward,
    /// A head value holds but no rule for it fires.
    Completion,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Index into `RuleSet::causal_rules`; for completion violations, the
    /// first rule targeting the unsupported value.
    pub rule: usize,
    pub direction: Direction,
    pub feature: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalVerdict {
    pub violations: Vec<Violation>,
}

impl CausalVerdict {
    pub fn consistent(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn forward_consistent(&self) -> bool {
        self.violations
            .iter()
            .all(|v| v.direction != Direction::Forward)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterventionKind {
    Direct,
    Causal,
}

/// One path step: the agent changing a feature, or a causal rule forcing one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Intervention {
    pub kind: InterventionKind,
    pub feature: usize,
    pub from: usize,
    pub to: usize,
    /// The firing causal rule, for causal steps.
    pub cause: Option<usize>,
}

#[derive(Debug, Clone)]
enum CompiledTerm {
    /// Truth per cell of the feature.
    Atom {
        feature: usize,
        truth: Vec<bool>,
    },
    Aux(usize),
}

#[derive(Debug, Clone)]
struct CompiledLiteral {
    negated: bool,
    term: CompiledTerm,
}

type Body = Vec<CompiledLiteral>;

#[derive(Debug, Clone)]
struct CausalRule {
    feature: usize,
    cell: usize,
    body: Body,
}

#[derive(Debug, Clone)]
pub struct Model {
    rules: RuleSet,
    partition: Partition,
    /// Aux rules grouped by stratum: (head id, body).
    strata: Vec<Vec<(usize, Body)>>,
    aux_count: usize,
    /// Decision rules for the undesired label: (rule index, body).
    decisions: Vec<(usize, Body)>,
    causal: Vec<CausalRule>,
    /// Causal rule indices grouped by (feature, head cell), first-seen order.
    head_groups: Vec<((usize, usize), Vec<usize>)>,
}

impl Model {
    /// Discretizes the schema at the rule thresholds and compiles the rules.
    pub fn new(rules: RuleSet) -> Result<Self> {
        let partition = discretize(&rules.schema, &collect_thresholds(&rules))?;
        Self::with_partition(rules, partition)
    }

    /// Compiles against a caller-supplied partition. Fails with
    /// [`Error::NonConstantAtom`] when an atom is not constant on some cell.
    pub fn with_partition(rules: RuleSet, partition: Partition) -> Result<Self> {
        let schema = &rules.schema;
        for (f, decl) in schema.features().iter().enumerate() {
            if decl.is_numeric() && partition.intervals(f).is_empty() {
                return Err(Error::Domain {
                    feature: decl.name.clone(),
                    reason: "partition has no intervals".into(),
                });
            }
        }

        let strata_names = stratify(&rules)?;
        let aux_ids: HashMap<&str, usize> = rules
            .aux_names()
            .into_iter()
            .enumerate()
            .map(|(i, n)| (n, i))
            .collect();
        let aux_count = aux_ids.len();
        let compiler = Compiler {
            schema,
            partition: &partition,
            aux_ids: &aux_ids,
        };

        let mut level_of = vec![0; aux_count];
        for (level, names) in strata_names.iter().enumerate() {
            for n in names {
                level_of[aux_ids[n.as_str()]] = level;
            }
        }
        let mut strata = vec![Vec::new(); strata_names.len()];
        for rule in &rules.aux_rules {
            let Head::Aux(name) = &rule.head else {
                continue;
            };
            let id = aux_ids[name.as_str()];
            strata[level_of[id]].push((id, compiler.body(rule)?));
        }

        let mut decisions = Vec::new();
        for (i, rule) in rules.decision_rules.iter().enumerate() {
            if matches!(&rule.head, Head::Decision(l) if *l == rules.undesired_label) {
                decisions.push((i, compiler.body(rule)?));
            }
        }

        let mut causal = Vec::new();
        let mut head_groups: Vec<((usize, usize), Vec<usize>)> = Vec::new();
        for (i, rule) in rules.causal_rules.iter().enumerate() {
            let Head::Causal(atom) = &rule.head else {
                continue;
            };
            let (feature, cell) = compiler.head_cell(atom)?;
            match head_groups
                .iter_mut()
                .find(|(key, _)| *key == (feature, cell))
            {
                Some((_, members)) => members.push(i),
                None => head_groups.push(((feature, cell), vec![i])),
            }
            causal.push(CausalRule {
                feature,
                cell,
                body: compiler.body(rule)?,
            });
        }

        Ok(Self {
            rules,
            partition,
            strata,
            aux_count,
            decisions,
            causal,
            head_groups,
        })
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.rules.schema
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn feature_name(&self, feature: usize) -> &str {
        &self.schema().feature(feature).name
    }

    pub fn domain_size(&self, feature: usize) -> usize {
        domain_size(self.schema(), &self.partition, feature)
    }

    pub fn state_space_size(&self) -> u128 {
        state_space_size(self.schema(), &self.partition)
    }

    pub fn value(&self, feature: usize, cell: usize) -> CellValue<'_> {
        cell_value(self.schema(), &self.partition, feature, cell)
    }

    /// Cell of `feature` whose rendering equals `label`.
    pub fn cell_by_label(&self, feature: usize, label: &str) -> Option<usize> {
        (0..self.domain_size(feature)).find(|&c| self.value(feature, c).to_string() == label)
    }

    pub fn box_of(&self, instance: &PointInstance) -> Result<State> {
        box_of(self.schema(), instance, &self.partition)
    }

    /// Checks that a state is total and every cell exists.
    pub fn check_state(&self, state: &State) -> Result<()> {
        if state.cells().len() != self.schema().len() {
            return Err(Error::Schema(format!(
                "state has {} cells for {} features",
                state.cells().len(),
                self.schema().len()
            )));
        }
        for (f, &cell) in state.cells().iter().enumerate() {
            if cell >= self.domain_size(f) {
                return Err(Error::Domain {
                    feature: self.feature_name(f).to_string(),
                    reason: format!("cell {cell} does not exist"),
                });
            }
        }
        Ok(())
    }

    /// Evaluates an arbitrary atom against the state's cell for its feature.
    pub fn eval_atom(&self, state: &State, atom: &Atom) -> Result<bool> {
        let compiler = Compiler {
            schema: self.schema(),
            partition: &self.partition,
            aux_ids: &HashMap::new(),
        };
        let (feature, truth) = compiler.atom(atom)?;
        Ok(truth[state.cell(feature)])
    }

    /// Truth of every aux predicate, computed stratum by stratum.
    fn aux_model(&self, state: &State) -> Vec<bool> {
        let mut truth = vec![false; self.aux_count];
        for stratum in &self.strata {
            loop {
                let mut changed = false;
                for (head, body) in stratum {
                    if !truth[*head] && body_holds(body, state, &truth) {
                        truth[*head] = true;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
        }
        truth
    }

    pub fn decide(&self, state: &State) -> Outcome {
        let aux = self.aux_model(state);
        Outcome {
            label: self.rules.undesired_label.clone(),
            fired_rules: self
                .decisions
                .iter()
                .filter(|(_, body)| body_holds(body, state, &aux))
                .map(|(i, _)| *i)
                .collect(),
        }
    }

    fn causal_firing(&self, state: &State) -> Vec<bool> {
        let aux = self.aux_model(state);
        self.causal
            .iter()
            .map(|r| body_holds(&r.body, state, &aux))
            .collect()
    }

    /// Checks both directions of every causal rule: firing bodies force their
    /// head value, and a head value holds only with a firing rule for it.
    pub fn causally_consistent(&self, state: &State) -> CausalVerdict {
        let fires = self.causal_firing(state);
        let mut violations = Vec::new();
        for (i, rule) in self.causal.iter().enumerate() {
            if fires[i] && state.cell(rule.feature) != rule.cell {
                violations.push(Violation {
                    rule: i,
                    direction: Direction::Forward,
                    feature: rule.feature,
                });
            }
        }
        for ((feature, cell), members) in &self.head_groups {
            if state.cell(*feature) == *cell && !members.iter().any(|&i| fires[i]) {
                violations.push(Violation {
                    rule: members[0],
                    direction: Direction::Completion,
                    feature: *feature,
                });
            }
        }
        CausalVerdict { violations }
    }

    /// Applies firing causal rules until nothing changes. Each pass evaluates
    /// all rules on the state left by the previous pass; changes are recorded
    /// in rule order.
    pub fn propagate(&self, state: &State) -> Result<(State, Vec<Intervention>)> {
        let limit = (self.schema().len() * self.causal.len()).max(1);
        let mut current = state.clone();
        let mut actions = Vec::new();
        // One extra pass observes the fixpoint.
        for _ in 0..=limit {
            let fires = self.causal_firing(&current);
            let mut forced: Vec<Option<(usize, usize)>> = vec![None; self.schema().len()];
            for (i, rule) in self.causal.iter().enumerate() {
                if !fires[i] {
                    continue;
                }
                match forced[rule.feature] {
                    Some((first, cell)) if cell != rule.cell => {
                        return Err(Error::ConflictingCauses {
                            feature: self.feature_name(rule.feature).to_string(),
                            first_rule: first,
                            first_value: self.value(rule.feature, cell).to_string(),
                            second_rule: i,
                            second_value: self.value(rule.feature, rule.cell).to_string(),
                        });
                    }
                    Some(_) => {}
                    None => forced[rule.feature] = Some((i, rule.cell)),
                }
            }
            let mut pass: Vec<(usize, usize)> = forced
                .iter()
                .enumerate()
                .filter_map(|(f, slot)| slot.map(|(rule, cell)| (rule, f, cell)))
                .filter(|&(_, f, cell)| current.cell(f) != cell)
                .map(|(rule, f, _)| (rule, f))
                .collect();
            if pass.is_empty() {
                return Ok((current, actions));
            }
            pass.sort_unstable();
            let next_cells: Vec<usize> = pass
                .iter()
                .map(|&(rule, _)| self.causal[rule].cell)
                .collect();
            for (&(rule, feature), to) in pass.iter().zip(next_cells) {
                actions.push(Intervention {
                    kind: InterventionKind::Causal,
                    feature,
                    from: current.cell(feature),
                    to,
                    cause: Some(rule),
                });
                current.set(feature, to);
            }
        }
        Err(Error::NonTermination(limit))
    }
}

fn body_holds(body: &[CompiledLiteral], state: &State, aux: &[bool]) -> bool {
    body.iter().all(|lit| {
        let value = match &lit.term {
            CompiledTerm::Atom { feature, truth } => truth[state.cell(*feature)],
            CompiledTerm::Aux(id) => aux[*id],
        };
        value != lit.negated
    })
}

struct Compiler<'a> {
    schema: &'a FeatureSchema,
    partition: &'a Partition,
    aux_ids: &'a HashMap<&'a str, usize>,
}

impl Compiler<'_> {
    fn feature(&self, name: &str) -> Result<usize> {
        self.schema
            .index_of(name)
            .ok_or_else(|| Error::Schema(format!("unknown feature `{name}`")))
    }

    fn atom(&self, atom: &Atom) -> Result<(usize, Vec<bool>)> {
        let f = self.feature(&atom.feature)?;
        let mismatch = || Error::Domain {
            feature: atom.feature.clone(),
            reason: format!("atom `{atom}` does not match the feature type"),
        };
        let truth = match (&self.schema.feature(f).domain, &atom.rhs) {
            (Domain::Categorical(values), Operand::Symbol(v)) => {
                let equal = match atom.cmp {
                    crate::schema::Comparator::Eq => true,
                    crate::schema::Comparator::Ne => false,
                    _ => return Err(mismatch()),
                };
                values.iter().map(|x| (x == v) == equal).collect()
            }
            (Domain::Numeric { .. }, Operand::Number(t)) => self
                .partition
                .intervals(f)
                .iter()
                .map(|cell| {
                    cell.compare(atom.cmp, *t)
                        .ok_or_else(|| Error::NonConstantAtom {
                            atom: atom.to_string(),
                            interval: cell.to_string(),
                        })
                })
                .collect::<Result<_>>()?,
            _ => return Err(mismatch()),
        };
        Ok((f, truth))
    }

    fn literal(&self, lit: &Literal) -> Result<CompiledLiteral> {
        let term = match &lit.term {
            Term::Atom(atom) => {
                let (feature, truth) = self.atom(atom)?;
                CompiledTerm::Atom { feature, truth }
            }
            Term::Aux(name) => CompiledTerm::Aux(
                *self
                    .aux_ids
                    .get(name.as_str())
                    .ok_or_else(|| Error::Schema(format!("unknown aux predicate `{name}`")))?,
            ),
        };
        Ok(CompiledLiteral {
            negated: lit.negated,
            term,
        })
    }

    fn body(&self, rule: &Rule) -> Result<Body> {
        rule.body.iter().map(|l| self.literal(l)).collect()
    }

    /// The single cell a causal head forces.
    fn head_cell(&self, atom: &Atom) -> Result<(usize, usize)> {
        let (feature, truth) = self.atom(atom)?;
        let mut cells = truth
            .iter()
            .enumerate()
            .filter(|(_, t)| **t)
            .map(|(c, _)| c);
        match (cells.next(), cells.next()) {
            (Some(c), None) => Ok((feature, c)),
            _ => Err(Error::Domain {
                feature: atom.feature.clone(),
                reason: format!("causal head `{atom}` does not select exactly one cell"),
            }),
        }
    }
}
