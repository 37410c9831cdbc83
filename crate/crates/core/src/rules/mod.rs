//! The rule language: feature declarations, decision rules, causal rules and
//! auxiliary predicates with stratified negation.
//!
//! ```text
//! feature debt numeric [0, 100000] direct.
//! feature credit_score numeric [300, 850] causal.
//! undesired reject.
//! decision reject :- credit_score <= 599.
//! causal credit_score == 620 :- debt == 0.
//! ```

mod lexer;
mod parser;
mod stratify;

use std::fmt;

pub use lexer::Pos;
pub use parser::{parse_ruleset, ParseError, ParseErrorKind};
pub use stratify::stratify;

pub use crate::schema::Comparator;
use crate::schema::{normalize_thresholds, Domain, FeatureSchema, Threshold, Thresholds};

/// Right-hand side of a comparison.
#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Symbol(String),
    Number(f64),
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Symbol(s) => f.write_str(s),
            Operand::Number(x) => write!(f, "{x}"),
        }
    }
}

/// `feature <cmp> value`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub feature: String,
    pub cmp: Comparator,
    pub rhs: Operand,
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.feature, self.cmp, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Atom(Atom),
    /// Reference to an aux predicate.
    Aux(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Literal {
    pub negated: bool,
    pub term: Term,
}

impl Literal {
    pub fn atom(atom: Atom) -> Self {
        Self {
            negated: false,
            term: Term::Atom(atom),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("not ")?;
        }
        match &self.term {
            Term::Atom(a) => a.fmt(f),
            Term::Aux(name) => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Head {
    /// The rule derives this outcome label.
    Decision(String),
    /// The rule forces `feature == value`.
    Causal(Atom),
    Aux(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub head: Head,
    pub body: Vec<Literal>,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.head {
            Head::Decision(label) => write!(f, "decision {label} :- ")?,
            Head::Causal(atom) => write!(f, "causal {atom} :- ")?,
            Head::Aux(name) => write!(f, "aux {name} :- ")?,
        }
        for (i, lit) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            lit.fmt(f)?;
        }
        f.write_str(".")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    pub schema: FeatureSchema,
    pub decision_rules: Vec<Rule>,
    pub causal_rules: Vec<Rule>,
    pub aux_rules: Vec<Rule>,
    pub undesired_label: String,
}

impl RuleSet {
    /// Every rule in section order: decision, causal, aux.
    pub fn all_rules(&self) -> impl Iterator<Item = &Rule> {
        self.decision_rules
            .iter()
            .chain(&self.causal_rules)
            .chain(&self.aux_rules)
    }

    /// Aux predicate names in order of first definition.
    pub fn aux_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = Vec::new();
        for rule in &self.aux_rules {
            if let Head::Aux(name) = &rule.head {
                if !names.contains(&name.as_str()) {
                    names.push(name);
                }
            }
        }
        names
    }
}

/// Canonical text: declarations, the undesired directive, then one rule per
/// line in section and declaration order.
pub fn serialize_ruleset(rs: &RuleSet) -> String {
    rs.to_string()
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for decl in self.schema.features() {
            write!(f, "feature {} ", decl.name)?;
            match &decl.domain {
                Domain::Categorical(values) => write!(f, "categorical {{{}}}", values.join(", "))?,
                Domain::Numeric { lower, upper } => write!(f, "numeric [{lower}, {upper}]")?,
            }
            writeln!(f, " {}.", decl.mutability.keyword())?;
        }
        writeln!(f, "undesired {}.", self.undesired_label)?;
        for rule in self.all_rules() {
            writeln!(f, "{rule}")?;
        }
        Ok(())
    }
}

/// Numeric constants of every atom, including causal heads, grouped by
/// feature, sorted and deduplicated.
pub fn collect_thresholds(rs: &RuleSet) -> Thresholds {
    let mut out = Thresholds::new();
    let mut push = |atom: &Atom| {
        if let Operand::Number(value) = atom.rhs {
            out.entry(atom.feature.clone())
                .or_default()
                .push(Threshold {
                    value,
                    cut: atom.cmp.cut(),
                });
        }
    };
    for rule in rs.all_rules() {
        if let Head::Causal(atom) = &rule.head {
            push(atom);
        }
        for lit in &rule.body {
            if let Term::Atom(atom) = &lit.term {
                push(atom);
            }
        }
    }
    for list in out.values_mut() {
        normalize_thresholds(list);
    }
    out
}
