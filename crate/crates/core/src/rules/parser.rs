use std::collections::HashMap;

use thiserror::Error;

use super::lexer::{tokenize, Pos, Tok, Token};
use super::{stratify, Atom, Head, Literal, Operand, Rule, RuleSet, Term};
use crate::error::Error;
use crate::schema::{Comparator, Domain, FeatureDecl, FeatureSchema, Mutability};

const KEYWORDS: &[&str] = &[
    "feature",
    "categorical",
    "numeric",
    "direct",
    "causal",
    "immutable",
    "decision",
    "aux",
    "not",
    "undesired",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("invalid declaration: {0}")]
    Declaration(String),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("unknown aux predicate `{0}`")]
    UnknownAux(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("`{value}` is not a value of `{feature}`")]
    NotInDomain { feature: String, value: String },
    #[error("causal head on `{feature}`, which is declared {mutability}")]
    CausalHeadMutability {
        feature: String,
        mutability: &'static str,
    },
    #[error("causal heads must use `==`, found `{0}`")]
    CausalHeadComparator(Comparator),
    #[error("undesired label: {0}")]
    Undesired(String),
    #[error("non-stratified negation through cycle {}", .0.join(" -> "))]
    NonStratified(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}:{}: {kind}", .pos.line, .pos.column)]
pub struct ParseError {
    pub pos: Pos,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub fn line(&self) -> usize {
        self.pos.line
    }

    pub fn column(&self) -> usize {
        self.pos.column
    }

    /// Well-formed text whose rules cannot be given a meaning.
    pub fn is_semantic(&self) -> bool {
        matches!(
            self.kind,
            ParseErrorKind::NonStratified(_) | ParseErrorKind::CausalHeadMutability { .. }
        )
    }
}

fn err<T>(pos: Pos, kind: ParseErrorKind) -> Result<T, ParseError> {
    Err(ParseError { pos, kind })
}

/// Parses rule-language text into a validated [`RuleSet`].
pub fn parse_ruleset(text: &str) -> Result<RuleSet, ParseError> {
    let tokens = tokenize(text).map_err(|(pos, msg)| ParseError {
        pos,
        kind: ParseErrorKind::Syntax(msg),
    })?;
    let program = Parser { tokens, at: 0 }.program()?;
    program.resolve()
}

struct RawAtom {
    feature: String,
    feature_pos: Pos,
    cmp: Comparator,
    rhs: Tok,
    rhs_pos: Pos,
}

enum RawTerm {
    Atom(RawAtom),
    Aux(String, Pos),
}

struct RawLiteral {
    negated: bool,
    term: RawTerm,
}

enum RawHead {
    Decision(String),
    Causal(RawAtom),
    Aux(String),
}

struct RawRule {
    pos: Pos,
    head: RawHead,
    body: Vec<RawLiteral>,
}

#[derive(Default)]
struct Program {
    features: Vec<(Pos, FeatureDecl)>,
    rules: Vec<RawRule>,
    undesired: Vec<(Pos, String)>,
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn peek_nth(&self, n: usize) -> &Tok {
        let i = (self.at + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &str) -> Result<T, ParseError> {
        let t = self.peek();
        err(
            t.pos,
            ParseErrorKind::Syntax(format!("expected {expected}, found {}", t.tok.describe())),
        )
    }

    fn expect(&mut self, tok: Tok) -> Result<Pos, ParseError> {
        if self.peek().tok == tok {
            Ok(self.next().pos)
        } else {
            self.unexpected(&tok.describe())
        }
    }

    fn name(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        match &self.peek().tok {
            Tok::Name(n) => {
                let n = n.clone();
                Ok((n, self.next().pos))
            }
            _ => self.unexpected(what),
        }
    }

    /// A declared name for a feature, aux predicate or label.
    fn identifier(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        let (name, pos) = self.name(what)?;
        if KEYWORDS.contains(&name.as_str()) {
            return err(
                pos,
                ParseErrorKind::Syntax(format!("keyword `{name}` cannot be used as {what}")),
            );
        }
        Ok((name, pos))
    }

    fn keyword_is(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Name(n) if n == kw)
    }

    fn program(mut self) -> Result<Program, ParseError> {
        let mut program = Program::default();
        loop {
            let start = self.peek().clone();
            let Tok::Name(kw) = &start.tok else {
                if start.tok == Tok::Eof {
                    return Ok(program);
                }
                return self.unexpected("a declaration or rule");
            };
            match kw.as_str() {
                "feature" => {
                    self.next();
                    let decl = self.feature_decl()?;
                    program.features.push((start.pos, decl));
                }
                "undesired" => {
                    self.next();
                    let (label, _) = self.identifier("an outcome label")?;
                    self.expect(Tok::Dot)?;
                    program.undesired.push((start.pos, label));
                }
                "decision" | "causal" | "aux" => {
                    let rule = self.rule()?;
                    program.rules.push(rule);
                }
                _ => {
                    return self.unexpected("`feature`, `undesired`, `decision`, `causal` or `aux`")
                }
            }
        }
    }

    fn feature_decl(&mut self) -> Result<FeatureDecl, ParseError> {
        let (name, _) = self.identifier("a feature name")?;
        let domain = if self.keyword_is("categorical") {
            self.next();
            self.expect(Tok::LBrace)?;
            let mut values = vec![self.name("a categorical value")?.0];
            while self.peek().tok == Tok::Comma {
                self.next();
                values.push(self.name("a categorical value")?.0);
            }
            self.expect(Tok::RBrace)?;
            Domain::Categorical(values)
        } else if self.keyword_is("numeric") {
            self.next();
            self.expect(Tok::LBracket)?;
            let lower = self.bound()?;
            self.expect(Tok::Comma)?;
            let upper = self.bound()?;
            self.expect(Tok::RBracket)?;
            Domain::Numeric { lower, upper }
        } else {
            return self.unexpected("`categorical` or `numeric`");
        };
        let mutability = match &self.peek().tok {
            Tok::Name(n) if n == "direct" => Some(Mutability::Direct),
            Tok::Name(n) if n == "causal" => Some(Mutability::Causal),
            Tok::Name(n) if n == "immutable" => Some(Mutability::Immutable),
            _ => None,
        };
        if mutability.is_some() {
            self.next();
        }
        self.expect(Tok::Dot)?;
        Ok(FeatureDecl {
            name,
            domain,
            mutability: mutability.unwrap_or_default(),
        })
    }

    fn bound(&mut self) -> Result<f64, ParseError> {
        match &self.peek().tok {
            Tok::Num(x) => {
                let x = *x;
                self.next();
                Ok(x)
            }
            Tok::Name(n) if n == "inf" => {
                self.next();
                Ok(f64::INFINITY)
            }
            _ => self.unexpected("a numeric bound"),
        }
    }

    fn rule(&mut self) -> Result<RawRule, ParseError> {
        let (kw, pos) = self.name("a rule keyword")?;
        let head = match kw.as_str() {
            "decision" => RawHead::Decision(self.identifier("an outcome label")?.0),
            "causal" => RawHead::Causal(self.atom()?),
            _ => RawHead::Aux(self.identifier("an aux predicate name")?.0),
        };
        self.expect(Tok::If)?;
        let mut body = vec![self.literal()?];
        while self.peek().tok == Tok::Comma {
            self.next();
            body.push(self.literal()?);
        }
        self.expect(Tok::Dot)?;
        Ok(RawRule { pos, head, body })
    }

    fn literal(&mut self) -> Result<RawLiteral, ParseError> {
        let negated = self.keyword_is("not") && matches!(self.peek_nth(1), Tok::Name(_));
        if negated {
            self.next();
        }
        let term = if matches!(self.peek_nth(1), Tok::Cmp(_)) {
            RawTerm::Atom(self.atom()?)
        } else {
            let (name, pos) = self.identifier("an atom or aux predicate")?;
            RawTerm::Aux(name, pos)
        };
        Ok(RawLiteral { negated, term })
    }

    fn atom(&mut self) -> Result<RawAtom, ParseError> {
        let (feature, feature_pos) = self.identifier("a feature name")?;
        let cmp = match self.peek().tok {
            Tok::Cmp(c) => {
                self.next();
                c
            }
            _ => return self.unexpected("a comparator"),
        };
        let rhs = self.peek().clone();
        match rhs.tok {
            Tok::Name(_) | Tok::Num(_) => {
                self.next();
            }
            _ => return self.unexpected("a value or number"),
        }
        Ok(RawAtom {
            feature,
            feature_pos,
            cmp,
            rhs: rhs.tok,
            rhs_pos: rhs.pos,
        })
    }
}

impl Program {
    fn resolve(self) -> Result<RuleSet, ParseError> {
        let mut seen: HashMap<&str, Pos> = HashMap::new();
        for (pos, decl) in &self.features {
            if seen.insert(&decl.name, *pos).is_some() {
                return err(
                    *pos,
                    ParseErrorKind::Declaration(format!("duplicate feature `{}`", decl.name)),
                );
            }
        }
        let decls: Vec<FeatureDecl> = self.features.iter().map(|(_, d)| d.clone()).collect();
        let schema = FeatureSchema::new(decls).map_err(|e| {
            let pos = self.features.first().map(|(p, _)| *p).unwrap_or_default();
            let pos = match &e {
                Error::Schema(msg) => self
                    .features
                    .iter()
                    .find(|(_, d)| msg.contains(&format!("`{}`", d.name)))
                    .map_or(pos, |(p, _)| *p),
                _ => pos,
            };
            ParseError {
                pos,
                kind: ParseErrorKind::Declaration(e.to_string()),
            }
        })?;

        let aux_heads: HashMap<&str, Pos> = self
            .rules
            .iter()
            .filter_map(|r| match &r.head {
                RawHead::Aux(name) => Some((name.as_str(), r.pos)),
                _ => None,
            })
            .collect();

        let mut decision_rules = Vec::new();
        let mut causal_rules = Vec::new();
        let mut aux_rules = Vec::new();
        let mut aux_positions: HashMap<String, Pos> = HashMap::new();
        for raw in &self.rules {
            let body = raw
                .body
                .iter()
                .map(|lit| {
                    let term = match &lit.term {
                        RawTerm::Atom(a) => Term::Atom(resolve_atom(&schema, a)?),
                        RawTerm::Aux(name, pos) => {
                            if !aux_heads.contains_key(name.as_str()) {
                                return err(*pos, ParseErrorKind::UnknownAux(name.clone()));
                            }
                            Term::Aux(name.clone())
                        }
                    };
                    Ok(Literal {
                        negated: lit.negated,
                        term,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            match &raw.head {
                RawHead::Decision(label) => decision_rules.push(Rule {
                    head: Head::Decision(label.clone()),
                    body,
                }),
                RawHead::Causal(a) => {
                    let atom = resolve_atom(&schema, a)?;
                    if atom.cmp != Comparator::Eq {
                        return err(
                            a.feature_pos,
                            ParseErrorKind::CausalHeadComparator(atom.cmp),
                        );
                    }
                    let decl = &schema.features()[schema.index_of(&atom.feature).unwrap()];
                    if decl.mutability != Mutability::Causal {
                        return err(
                            a.feature_pos,
                            ParseErrorKind::CausalHeadMutability {
                                feature: decl.name.clone(),
                                mutability: decl.mutability.keyword(),
                            },
                        );
                    }
                    causal_rules.push(Rule {
                        head: Head::Causal(atom),
                        body,
                    });
                }
                RawHead::Aux(name) => {
                    aux_positions.entry(name.clone()).or_insert(raw.pos);
                    aux_rules.push(Rule {
                        head: Head::Aux(name.clone()),
                        body,
                    });
                }
            }
        }

        let undesired_label = match self.undesired.as_slice() {
            [(_, label)] => label.clone(),
            [] => {
                let mut labels: Vec<&str> = decision_rules
                    .iter()
                    .filter_map(|r| match &r.head {
                        Head::Decision(l) => Some(l.as_str()),
                        _ => None,
                    })
                    .collect();
                labels.sort_unstable();
                labels.dedup();
                match labels.as_slice() {
                    [only] => only.to_string(),
                    _ => {
                        return err(
                            Pos { line: 1, column: 1 },
                            ParseErrorKind::Undesired(
                                "add an `undesired <label>.` directive to designate it".into(),
                            ),
                        )
                    }
                }
            }
            [_, (pos, _), ..] => {
                return err(
                    *pos,
                    ParseErrorKind::Undesired("declared more than once".into()),
                )
            }
        };

        let rs = RuleSet {
            schema,
            decision_rules,
            causal_rules,
            aux_rules,
            undesired_label,
        };
        if let Err(Error::NonStratified { cycle }) = stratify(&rs) {
            let pos = cycle
                .first()
                .and_then(|n| aux_positions.get(n))
                .copied()
                .unwrap_or_default();
            return err(pos, ParseErrorKind::NonStratified(cycle));
        }
        Ok(rs)
    }
}

fn resolve_atom(schema: &FeatureSchema, raw: &RawAtom) -> Result<Atom, ParseError> {
    let Some(index) = schema.index_of(&raw.feature) else {
        return err(
            raw.feature_pos,
            ParseErrorKind::UnknownFeature(raw.feature.clone()),
        );
    };
    let decl = schema.feature(index);
    let rhs = match (&decl.domain, &raw.rhs) {
        (Domain::Categorical(values), Tok::Name(v)) => {
            if !matches!(raw.cmp, Comparator::Eq | Comparator::Ne) {
                return err(
                    raw.feature_pos,
                    ParseErrorKind::TypeMismatch(format!(
                        "`{}` is categorical and only supports `==` and `!=`",
                        decl.name
                    )),
                );
            }
            if !values.contains(v) {
                return err(
                    raw.rhs_pos,
                    ParseErrorKind::NotInDomain {
                        feature: decl.name.clone(),
                        value: v.clone(),
                    },
                );
            }
            Operand::Symbol(v.clone())
        }
        (Domain::Numeric { .. }, Tok::Num(x)) if x.is_finite() => Operand::Number(*x),
        (Domain::Numeric { .. }, Tok::Num(_)) => {
            return err(
                raw.rhs_pos,
                ParseErrorKind::TypeMismatch("comparison against an infinite constant".into()),
            )
        }
        (Domain::Numeric { .. }, _) => {
            return err(
                raw.rhs_pos,
                ParseErrorKind::TypeMismatch(format!(
                    "`{}` is numeric; expected a number",
                    decl.name
                )),
            )
        }
        (Domain::Categorical(_), _) => {
            return err(
                raw.rhs_pos,
                ParseErrorKind::TypeMismatch(format!(
                    "`{}` is categorical; expected a value name",
                    decl.name
                )),
            )
        }
    };
    Ok(Atom {
        feature: decl.name.clone(),
        cmp: raw.cmp,
        rhs,
    })
}
