//! Feature declarations, threshold-induced discretization of numeric
//! domains, and interval-box states.
//!
//! A [`State`] assigns every feature one *cell*: a categorical value, or one
//! atomic interval of the feature's numeric partition. The partition is the
//! coarsest one on which every rule atom is constant, so a state stands for
//! the whole set of concrete instances inside its box.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mutability {
    /// The agent may change the feature.
    #[default]
    Direct,
    /// Only causal rules change the feature.
    Causal,
    Immutable,
}

impl Mutability {
    pub fn keyword(self) -> &'static str {
        match self {
            Mutability::Direct => "direct",
            Mutability::Causal => "causal",
            Mutability::Immutable => "immutable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Categorical(Vec<String>),
    /// Inclusive bounds. Infinite bounds are open.
    Numeric {
        lower: f64,
        upper: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDecl {
    pub name: String,
    pub domain: Domain,
    pub mutability: Mutability,
}

impl FeatureDecl {
    pub fn is_numeric(&self) -> bool {
        matches!(self.domain, Domain::Numeric { .. })
    }

    pub fn categories(&self) -> &[String] {
        match &self.domain {
            Domain::Categorical(values) => values,
            Domain::Numeric { .. } => &[],
        }
    }

    pub fn category_index(&self, value: &str) -> Option<usize> {
        self.categories().iter().position(|v| v == value)
    }

    /// The whole declared numeric domain as one interval.
    pub fn numeric_range(&self) -> Option<AtomicInterval> {
        match self.domain {
            Domain::Numeric { lower, upper } => Some(AtomicInterval {
                lower,
                upper,
                lower_closed: lower.is_finite(),
                upper_closed: upper.is_finite(),
            }),
            Domain::Categorical(_) => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let fail = |reason: &str| Error::Schema(format!("feature `{}`: {reason}", self.name));
        match &self.domain {
            Domain::Categorical(values) => {
                if values.is_empty() {
                    return Err(fail("categorical domain is empty"));
                }
                let mut seen = HashSet::new();
                for v in values {
                    if !seen.insert(v.as_str()) {
                        return Err(fail(&format!("duplicate value `{v}`")));
                    }
                }
            }
            Domain::Numeric { lower, upper } => {
                if lower.is_nan() || upper.is_nan() {
                    return Err(fail("numeric bound is NaN"));
                }
                if lower > upper {
                    return Err(fail("lower bound exceeds upper bound"));
                }
                if lower == upper && !lower.is_finite() {
                    return Err(fail("numeric domain is empty"));
                }
            }
        }
        Ok(())
    }
}

/// Ordered feature declarations. Declaration order drives every tie-break.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureSchema {
    features: Vec<FeatureDecl>,
}

impl FeatureSchema {
    pub fn new(features: Vec<FeatureDecl>) -> Result<Self> {
        let mut seen = HashSet::new();
        for f in &features {
            f.validate()?;
            if !seen.insert(f.name.as_str()) {
                return Err(Error::Schema(format!("duplicate feature `{}`", f.name)));
            }
        }
        Ok(Self { features })
    }

    pub fn features(&self) -> &[FeatureDecl] {
        &self.features
    }

    pub fn feature(&self, index: usize) -> &FeatureDecl {
        &self.features[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

/// A non-empty numeric interval with open or closed ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomicInterval {
    pub lower: f64,
    pub upper: f64,
    pub lower_closed: bool,
    pub upper_closed: bool,
}

impl AtomicInterval {
    /// Returns `None` when the described interval is empty.
    pub fn new(lower: f64, upper: f64, lower_closed: bool, upper_closed: bool) -> Option<Self> {
        let lower_closed = lower_closed && lower.is_finite();
        let upper_closed = upper_closed && upper.is_finite();
        let non_empty = lower < upper || (lower == upper && lower_closed && upper_closed);
        non_empty.then_some(Self {
            lower,
            upper,
            lower_closed,
            upper_closed,
        })
    }

    pub fn point(x: f64) -> Self {
        Self {
            lower: x,
            upper: x,
            lower_closed: true,
            upper_closed: true,
        }
    }

    pub fn is_point(&self) -> bool {
        self.lower == self.upper
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lower_closed {
            x >= self.lower
        } else {
            x > self.lower
        };
        let below = if self.upper_closed {
            x <= self.upper
        } else {
            x < self.upper
        };
        above && below
    }

    /// Truth of `x <cmp> rhs` over the whole interval, or `None` when the
    /// comparison is true for some members and false for others.
    pub fn compare(&self, cmp: Comparator, rhs: f64) -> Option<bool> {
        match cmp {
            Comparator::Lt => {
                if self.upper < rhs || (self.upper == rhs && !self.upper_closed) {
                    Some(true)
                } else if self.lower >= rhs {
                    Some(false)
                } else {
                    None
                }
            }
            Comparator::Le => {
                if self.upper <= rhs {
                    Some(true)
                } else if self.lower > rhs || (self.lower == rhs && !self.lower_closed) {
                    Some(false)
                } else {
                    None
                }
            }
            Comparator::Gt => self.compare(Comparator::Le, rhs).map(|b| !b),
            Comparator::Ge => self.compare(Comparator::Lt, rhs).map(|b| !b),
            Comparator::Eq => {
                if self.is_point() && self.lower == rhs {
                    Some(true)
                } else if !self.contains(rhs) {
                    Some(false)
                } else {
                    None
                }
            }
            Comparator::Ne => self.compare(Comparator::Eq, rhs).map(|b| !b),
        }
    }

    /// A member chosen by `t` in `[0, 1]`; interior for non-degenerate
    /// intervals whenever `0 < t < 1`.
    pub fn sample_at(&self, t: f64) -> f64 {
        if self.is_point() {
            return self.lower;
        }
        match (self.lower.is_finite(), self.upper.is_finite()) {
            (true, true) => {
                let x = self.lower + (self.upper - self.lower) * t;
                if self.contains(x) {
                    x
                } else {
                    self.midpoint()
                }
            }
            (true, false) => self.lower + 1.0 + t * 1e3,
            (false, true) => self.upper - 1.0 - t * 1e3,
            (false, false) => (t - 0.5) * 1e3,
        }
    }

    /// A canonical member: the point itself, the midpoint of a bounded
    /// interval, or the finite closed end of a half-bounded one.
    pub fn witness(&self) -> f64 {
        if self.is_point() {
            return self.lower;
        }
        match (self.lower.is_finite(), self.upper.is_finite()) {
            (true, true) => self.midpoint(),
            (true, false) if self.lower_closed => self.lower,
            (true, false) => self.lower + 1.0,
            (false, true) if self.upper_closed => self.upper,
            (false, true) => self.upper - 1.0,
            (false, false) => 0.0,
        }
    }

    fn midpoint(&self) -> f64 {
        self.lower / 2.0 + self.upper / 2.0
    }
}

impl fmt::Display for AtomicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lower_closed { '[' } else { '(' };
        let close = if self.upper_closed { ']' } else { ')' };
        write!(f, "{open}{}, {}{close}", self.lower, self.upper)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparator {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Eq => "==",
            Comparator::Ne => "!=",
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
        }
    }

    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Comparator::Eq => lhs == rhs,
            Comparator::Ne => lhs != rhs,
            Comparator::Lt => lhs < rhs,
            Comparator::Le => lhs <= rhs,
            Comparator::Gt => lhs > rhs,
            Comparator::Ge => lhs >= rhs,
        }
    }

    /// How a threshold on this comparator must split the number line.
    pub fn cut(self) -> Cut {
        match self {
            Comparator::Lt | Comparator::Ge => Cut::Below,
            Comparator::Le | Comparator::Gt => Cut::Above,
            Comparator::Eq | Comparator::Ne => Cut::Point,
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// The split a threshold `t` induces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cut {
    /// `[.., t)` and `[t, ..]`.
    Below,
    /// `[.., t]` and `(t, ..]`.
    Above,
    /// `[.., t)`, `[t, t]` and `(t, ..]`.
    Point,
}

impl Cut {
    fn merge(self, other: Cut) -> Cut {
        if self == other {
            self
        } else {
            Cut::Point
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub value: f64,
    pub cut: Cut,
}

/// Per-feature threshold lists keyed by feature name.
pub type Thresholds = BTreeMap<String, Vec<Threshold>>;

/// Sorts, then merges thresholds sharing a value.
pub(crate) fn normalize_thresholds(list: &mut Vec<Threshold>) {
    list.sort_by(|a, b| a.value.total_cmp(&b.value));
    let mut merged: Vec<Threshold> = Vec::with_capacity(list.len());
    for t in list.drain(..) {
        match merged.last_mut() {
            Some(last) if last.value == t.value => last.cut = last.cut.merge(t.cut),
            _ => merged.push(t),
        }
    }
    *list = merged;
}

/// Atomic intervals per feature, indexed by schema position. Categorical
/// features carry an empty list.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Partition {
    intervals: Vec<Vec<AtomicInterval>>,
}

impl Partition {
    pub fn from_intervals(intervals: Vec<Vec<AtomicInterval>>) -> Self {
        Self { intervals }
    }

    pub fn intervals(&self, feature: usize) -> &[AtomicInterval] {
        self.intervals.get(feature).map_or(&[], Vec::as_slice)
    }

    pub fn locate(&self, feature: usize, x: f64) -> Option<usize> {
        self.intervals(feature).iter().position(|i| i.contains(x))
    }
}

/// Splits every numeric domain at its thresholds, producing the coarsest
/// partition on which each thresholded atom is constant.
pub fn discretize(schema: &FeatureSchema, thresholds: &Thresholds) -> Result<Partition> {
    for name in thresholds.keys() {
        match schema.index_of(name) {
            None => {
                return Err(Error::Schema(format!(
                    "thresholds for unknown feature `{name}`"
                )))
            }
            Some(i) if !schema.feature(i).is_numeric() => {
                return Err(Error::Domain {
                    feature: name.clone(),
                    reason: "numeric thresholds on a categorical feature".into(),
                })
            }
            Some(_) => {}
        }
    }

    let mut intervals = Vec::with_capacity(schema.len());
    for decl in schema.features() {
        let Some(range) = decl.numeric_range() else {
            intervals.push(Vec::new());
            continue;
        };
        let mut cuts = thresholds.get(&decl.name).cloned().unwrap_or_default();
        normalize_thresholds(&mut cuts);
        if cuts.is_empty() && !(range.lower.is_finite() && range.upper.is_finite()) {
            return Err(Error::Domain {
                feature: decl.name.clone(),
                reason: "unbounded domain needs at least one threshold".into(),
            });
        }

        let mut cells = Vec::with_capacity(2 * cuts.len() + 1);
        let (mut lower, mut lower_closed) = (range.lower, range.lower_closed);
        for t in &cuts {
            if !t.value.is_finite() || !range.contains(t.value) {
                return Err(Error::Domain {
                    feature: decl.name.clone(),
                    reason: format!("threshold {} lies outside {range}", t.value),
                });
            }
            match t.cut {
                Cut::Below => {
                    cells.extend(AtomicInterval::new(lower, t.value, lower_closed, false));
                    (lower, lower_closed) = (t.value, true);
                }
                Cut::Above => {
                    cells.extend(AtomicInterval::new(lower, t.value, lower_closed, true));
                    (lower, lower_closed) = (t.value, false);
                }
                Cut::Point => {
                    cells.extend(AtomicInterval::new(lower, t.value, lower_closed, false));
                    cells.push(AtomicInterval::point(t.value));
                    (lower, lower_closed) = (t.value, false);
                }
            }
        }
        cells.extend(AtomicInterval::new(
            lower,
            range.upper,
            lower_closed,
            range.upper_closed,
        ));
        intervals.push(cells);
    }
    Ok(Partition { intervals })
}

/// Number of cells a feature ranges over: its categorical values or its
/// atomic intervals.
pub fn domain_size(schema: &FeatureSchema, partition: &Partition, feature: usize) -> usize {
    match &schema.feature(feature).domain {
        Domain::Categorical(values) => values.len(),
        Domain::Numeric { .. } => partition.intervals(feature).len(),
    }
}

/// Size of the abstract state space; saturates at `u128::MAX`.
pub fn state_space_size(schema: &FeatureSchema, partition: &Partition) -> u128 {
    (0..schema.len()).fold(1u128, |acc, f| {
        acc.saturating_mul(domain_size(schema, partition, f) as u128)
    })
}

/// An interval box: one cell index per feature, in schema order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    cells: Vec<usize>,
}

impl State {
    pub fn from_cells(cells: Vec<usize>) -> Self {
        Self { cells }
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn cell(&self, feature: usize) -> usize {
        self.cells[feature]
    }

    pub fn set(&mut self, feature: usize, cell: usize) {
        self.cells[feature] = cell;
    }

    pub fn with(&self, feature: usize, cell: usize) -> State {
        let mut next = self.clone();
        next.set(feature, cell);
        next
    }
}

/// The value a state holds for one feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellValue<'a> {
    Categorical(&'a str),
    Interval(AtomicInterval),
}

impl fmt::Display for CellValue<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellValue::Categorical(v) => f.write_str(v),
            CellValue::Interval(i) => i.fmt(f),
        }
    }
}

pub fn cell_value<'a>(
    schema: &'a FeatureSchema,
    partition: &Partition,
    feature: usize,
    cell: usize,
) -> CellValue<'a> {
    match &schema.feature(feature).domain {
        Domain::Categorical(values) => CellValue::Categorical(&values[cell]),
        Domain::Numeric { .. } => CellValue::Interval(partition.intervals(feature)[cell]),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointValue {
    Categorical(String),
    Numeric(f64),
}

impl fmt::Display for PointValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointValue::Categorical(v) => f.write_str(v),
            PointValue::Numeric(x) => x.fmt(f),
        }
    }
}

/// A concrete input: one value per feature, in schema order.
#[derive(Debug, Clone, PartialEq)]
pub struct PointInstance {
    values: Vec<PointValue>,
}

impl PointInstance {
    pub fn new(schema: &FeatureSchema, values: Vec<PointValue>) -> Result<Self> {
        if values.len() != schema.len() {
            return Err(Error::Schema(format!(
                "instance has {} values for {} features",
                values.len(),
                schema.len()
            )));
        }
        for (decl, value) in schema.features().iter().zip(&values) {
            let domain_err = |reason: String| Error::Domain {
                feature: decl.name.clone(),
                reason,
            };
            match (&decl.domain, value) {
                (Domain::Categorical(values), PointValue::Categorical(v)) => {
                    if !values.contains(v) {
                        return Err(domain_err(format!("`{v}` is not a declared value")));
                    }
                }
                (Domain::Numeric { .. }, PointValue::Numeric(x)) => {
                    let range = decl.numeric_range().expect("numeric domain");
                    if !range.contains(*x) {
                        return Err(domain_err(format!("{x} lies outside {range}")));
                    }
                }
                _ => return Err(domain_err(format!("value `{value}` has the wrong type"))),
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[PointValue] {
        &self.values
    }

    pub fn value(&self, feature: usize) -> &PointValue {
        &self.values[feature]
    }
}

/// Replaces each numeric value by the atomic interval containing it.
pub fn box_of(
    schema: &FeatureSchema,
    instance: &PointInstance,
    partition: &Partition,
) -> Result<State> {
    let mut cells = Vec::with_capacity(schema.len());
    for (f, decl) in schema.features().iter().enumerate() {
        let cell = match instance.value(f) {
            PointValue::Categorical(v) => decl.category_index(v),
            PointValue::Numeric(x) => partition.locate(f, *x),
        };
        cells.push(cell.ok_or_else(|| Error::Domain {
            feature: decl.name.clone(),
            reason: format!("value `{}` is outside the domain", instance.value(f)),
        })?);
    }
    Ok(State::from_cells(cells))
}

/// A concrete member of a state's box.
pub fn witness_of(schema: &FeatureSchema, partition: &Partition, state: &State) -> PointInstance {
    let values = (0..schema.len())
        .map(|f| match cell_value(schema, partition, f, state.cell(f)) {
            CellValue::Categorical(v) => PointValue::Categorical(v.to_string()),
            CellValue::Interval(i) => PointValue::Numeric(i.witness()),
        })
        .collect();
    PointInstance { values }
}
