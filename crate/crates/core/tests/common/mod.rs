//! Reference model for differential tests.
//!
//! A random generator builds small rulesets as plain data and renders them
//! to rule text. The reference side evaluates that data point by point and
//! derives abstract cells on its own, as maximal runs of a half-step grid on
//! which every atom of the feature keeps its truth value. Nothing here calls
//! into the library's evaluation code.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub mod checks;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Direct,
    Causal,
    Immutable,
}

#[derive(Debug, Clone)]
pub enum Dom {
    Cat(usize),
    Num { lo: i64, hi: i64 },
}

#[derive(Debug, Clone)]
pub struct Feat {
    pub dom: Dom,
    pub mode: Mode,
}

impl Feat {
    /// Same domain, so conditions written for one apply to the other.
    pub fn dom_matches(&self, other: &Feat) -> bool {
        match (&self.dom, &other.dom) {
            (Dom::Cat(a), Dom::Cat(b)) => a == b,
            (Dom::Num { lo, hi }, Dom::Num { lo: l, hi: h }) => lo == l && hi == h,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Op {
    const ALL: [Op; 6] = [Op::Eq, Op::Ne, Op::Lt, Op::Le, Op::Gt, Op::Ge];

    fn text(self) -> &'static str {
        match self {
            Op::Eq => "==",
            Op::Ne => "!=",
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Gt => ">",
            Op::Ge => ">=",
        }
    }

    fn test(self, a: f64, b: f64) -> bool {
        match self {
            Op::Eq => a == b,
            Op::Ne => a != b,
            Op::Lt => a < b,
            Op::Le => a <= b,
            Op::Gt => a > b,
            Op::Ge => a >= b,
        }
    }
}

/// Categorical values are indices, numeric values are reals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Val {
    Cat(usize),
    Num(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct Cond {
    pub feature: usize,
    pub op: Op,
    pub rhs: Val,
}

#[derive(Debug, Clone, Copy)]
pub enum Lit {
    Cond(bool, Cond),
    Aux(bool, usize),
}

#[derive(Debug, Clone)]
pub struct CausalRule {
    pub feature: usize,
    pub head: Val,
    pub body: Vec<Cond>,
}

/// Ruleset as data. Aux predicate `i` only refers to aux predicates below
/// `i`, so a single bottom-up pass computes its model. Each causal feature
/// has one head value and its rule bodies mention non-causal features only.
#[derive(Debug, Clone)]
pub struct Spec {
    pub feats: Vec<Feat>,
    pub decision: Vec<Vec<Lit>>,
    pub causal: Vec<CausalRule>,
    pub aux: Vec<Vec<Vec<Lit>>>,
}

pub type Point = Vec<Val>;

/// Size knobs for [`generate`].
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_features: usize,
    pub max_decisions: usize,
    pub max_state_space: usize,
}

impl Default for Shape {
    fn default() -> Self {
        Self {
            max_features: 5,
            max_decisions: 4,
            max_state_space: 10_000,
        }
    }
}

fn gen_cond(rng: &mut ChaCha8Rng, feats: &[Feat], allowed: &[usize]) -> Cond {
    let feature = allowed[rng.gen_range(0..allowed.len())];
    match feats[feature].dom {
        Dom::Cat(n) => Cond {
            feature,
            op: if rng.gen_bool(0.7) { Op::Eq } else { Op::Ne },
            rhs: Val::Cat(rng.gen_range(0..n)),
        },
        Dom::Num { lo, hi } => Cond {
            feature,
            op: Op::ALL[rng.gen_range(0..6)],
            rhs: Val::Num(rng.gen_range(lo..=hi) as f64),
        },
    }
}

fn gen_body(rng: &mut ChaCha8Rng, feats: &[Feat], aux_below: usize) -> Vec<Lit> {
    let all: Vec<usize> = (0..feats.len()).collect();
    (0..rng.gen_range(1..=3))
        .map(|_| {
            if aux_below > 0 && rng.gen_bool(0.3) {
                Lit::Aux(rng.gen_bool(0.4), rng.gen_range(0..aux_below))
            } else {
                Lit::Cond(rng.gen_bool(0.2), gen_cond(rng, feats, &all))
            }
        })
        .collect()
}

/// Draws a ruleset whose reference state space fits `shape`.
pub fn generate(rng: &mut ChaCha8Rng, shape: Shape) -> Spec {
    loop {
        let spec = generate_once(rng, shape);
        let size: usize = (0..spec.feats.len()).map(|f| spec.cells(f).len()).product();
        if size <= shape.max_state_space {
            return spec;
        }
    }
}

fn generate_once(rng: &mut ChaCha8Rng, shape: Shape) -> Spec {
    let n = rng.gen_range(2..=shape.max_features);
    let feats: Vec<Feat> = (0..n)
        .map(|_| {
            let dom = if rng.gen_bool(0.5) {
                Dom::Cat(rng.gen_range(2..=3))
            } else {
                let lo = rng.gen_range(0..=2);
                Dom::Num {
                    lo,
                    hi: rng.gen_range(lo + 1..=10),
                }
            };
            let mode = match rng.gen_range(0..10) {
                0..=5 => Mode::Direct,
                6..=7 => Mode::Causal,
                _ => Mode::Immutable,
            };
            Feat { dom, mode }
        })
        .collect();

    let aux_count = rng.gen_range(0..=3);
    let mut aux = Vec::new();
    for i in 0..aux_count {
        let rules = (0..rng.gen_range(1..=2))
            .map(|_| gen_body(rng, &feats, i))
            .collect();
        aux.push(rules);
    }
    let decision = (0..rng.gen_range(0..=shape.max_decisions))
        .map(|_| gen_body(rng, &feats, aux_count))
        .collect();

    let plain: Vec<usize> = (0..n).filter(|&f| feats[f].mode != Mode::Causal).collect();
    let mut causal = Vec::new();
    if !plain.is_empty() {
        for (f, feat) in feats.iter().enumerate() {
            if feat.mode != Mode::Causal || rng.gen_bool(0.2) {
                continue;
            }
            let head = match feat.dom {
                Dom::Cat(k) => Val::Cat(rng.gen_range(0..k)),
                Dom::Num { lo, hi } => Val::Num(rng.gen_range(lo..=hi) as f64),
            };
            for _ in 0..rng.gen_range(1..=2) {
                let body = (0..rng.gen_range(1..=2))
                    .map(|_| gen_cond(rng, &feats, &plain))
                    .collect();
                causal.push(CausalRule {
                    feature: f,
                    head,
                    body,
                });
            }
        }
    }
    Spec {
        feats,
        decision,
        causal,
        aux,
    }
}

fn feat_name(f: usize) -> String {
    format!("f{f}")
}

fn cat_name(f: usize, v: usize) -> String {
    format!("v{f}_{v}")
}

fn val_text(f: usize, v: Val) -> String {
    match v {
        Val::Cat(i) => cat_name(f, i),
        Val::Num(x) => format!("{x}"),
    }
}

fn cond_text(c: &Cond) -> String {
    format!(
        "{} {} {}",
        feat_name(c.feature),
        c.op.text(),
        val_text(c.feature, c.rhs)
    )
}

fn body_text(body: &[Lit]) -> String {
    body.iter()
        .map(|l| match l {
            Lit::Cond(neg, c) => format!("{}{}", if *neg { "not " } else { "" }, cond_text(c)),
            Lit::Aux(neg, i) => format!("{}p{i}", if *neg { "not " } else { "" }),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

impl Spec {
    /// Rule text for the library parser.
    pub fn text(&self) -> String {
        let mut s = String::new();
        for (f, feat) in self.feats.iter().enumerate() {
            let dom = match feat.dom {
                Dom::Cat(k) => format!(
                    "categorical {{{}}}",
                    (0..k)
                        .map(|v| cat_name(f, v))
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
                Dom::Num { lo, hi } => format!("numeric [{lo}, {hi}]"),
            };
            let mode = match feat.mode {
                Mode::Direct => "direct",
                Mode::Causal => "causal",
                Mode::Immutable => "immutable",
            };
            writeln!(s, "feature {} {dom} {mode}.", feat_name(f)).unwrap();
        }
        writeln!(s, "undesired bad.").unwrap();
        for body in &self.decision {
            writeln!(s, "decision bad :- {}.", body_text(body)).unwrap();
        }
        for r in &self.causal {
            let head = Cond {
                feature: r.feature,
                op: Op::Eq,
                rhs: r.head,
            };
            let body: Vec<String> = r.body.iter().map(cond_text).collect();
            writeln!(s, "causal {} :- {}.", cond_text(&head), body.join(", ")).unwrap();
        }
        for (i, rules) in self.aux.iter().enumerate() {
            for body in rules {
                writeln!(s, "aux p{i} :- {}.", body_text(body)).unwrap();
            }
        }
        s
    }

    fn conds_on(&self, f: usize) -> Vec<Cond> {
        let mut out = Vec::new();
        let mut take = |body: &[Lit]| {
            for l in body {
                if let Lit::Cond(_, c) = l {
                    if c.feature == f {
                        out.push(*c);
                    }
                }
            }
        };
        for b in &self.decision {
            take(b);
        }
        for rules in &self.aux {
            for b in rules {
                take(b);
            }
        }
        for r in &self.causal {
            out.extend(r.body.iter().filter(|c| c.feature == f).copied());
            if r.feature == f {
                out.push(Cond {
                    feature: f,
                    op: Op::Eq,
                    rhs: r.head,
                });
            }
        }
        out
    }

    /// Runs of the half-step grid over the domain on which every atom of
    /// `f` has a fixed truth value. Thresholds are integers, so every
    /// atomic interval contains a grid point. Returns `(first, last)` grid
    /// values per run, or one entry per category.
    pub fn cells(&self, f: usize) -> Vec<(Val, Val)> {
        match self.feats[f].dom {
            Dom::Cat(k) => (0..k).map(|v| (Val::Cat(v), Val::Cat(v))).collect(),
            Dom::Num { lo, hi } => {
                let conds = self.conds_on(f);
                let sig = |x: f64| -> Vec<bool> {
                    conds
                        .iter()
                        .map(|c| match c.rhs {
                            Val::Num(t) => c.op.test(x, t),
                            Val::Cat(_) => unreachable!(),
                        })
                        .collect()
                };
                let grid: Vec<f64> = (2 * lo..=2 * hi).map(|k| k as f64 / 2.0).collect();
                let mut runs: Vec<(f64, f64)> = Vec::new();
                let mut prev: Option<Vec<bool>> = None;
                for &x in &grid {
                    let s = sig(x);
                    match (&prev, runs.last_mut()) {
                        (Some(p), Some(run)) if *p == s => run.1 = x,
                        _ => runs.push((x, x)),
                    }
                    prev = Some(s);
                }
                runs.into_iter()
                    .map(|(a, b)| (Val::Num(a), Val::Num(b)))
                    .collect()
            }
        }
    }

    pub fn all_cells(&self) -> Vec<Vec<(Val, Val)>> {
        (0..self.feats.len()).map(|f| self.cells(f)).collect()
    }

    pub fn cond_holds(&self, p: &Point, c: &Cond) -> bool {
        match (p[c.feature], c.rhs) {
            (Val::Cat(a), Val::Cat(b)) => match c.op {
                Op::Eq => a == b,
                Op::Ne => a != b,
                _ => unreachable!(),
            },
            (Val::Num(a), Val::Num(b)) => c.op.test(a, b),
            _ => unreachable!(),
        }
    }

    fn aux_model(&self, p: &Point) -> Vec<bool> {
        let mut m: Vec<bool> = Vec::with_capacity(self.aux.len());
        for rules in &self.aux {
            let v = rules.iter().any(|b| self.body_holds(p, b, &m));
            m.push(v);
        }
        m
    }

    fn body_holds(&self, p: &Point, body: &[Lit], aux: &[bool]) -> bool {
        body.iter().all(|l| match l {
            Lit::Cond(neg, c) => self.cond_holds(p, c) != *neg,
            Lit::Aux(neg, i) => aux[*i] != *neg,
        })
    }

    /// Number of decision rules whose body holds at `p`.
    pub fn fired(&self, p: &Point) -> usize {
        let aux = self.aux_model(p);
        self.decision
            .iter()
            .filter(|b| self.body_holds(p, b, &aux))
            .count()
    }

    /// True when the undesired label is derived at `p`.
    pub fn rejects(&self, p: &Point) -> bool {
        let aux = self.aux_model(p);
        self.decision.iter().any(|b| self.body_holds(p, b, &aux))
    }

    fn fires(&self, p: &Point, f: usize) -> Option<bool> {
        let rules: Vec<&CausalRule> = self.causal.iter().filter(|r| r.feature == f).collect();
        if rules.is_empty() {
            return None;
        }
        Some(
            rules
                .iter()
                .any(|r| r.body.iter().all(|c| self.cond_holds(p, c))),
        )
    }

    fn head_of(&self, f: usize) -> Option<Val> {
        self.causal.iter().find(|r| r.feature == f).map(|r| r.head)
    }

    /// Causal features whose value disagrees with the "if and only if"
    /// reading of their rules at `p`.
    pub fn violations(&self, p: &Point) -> Vec<usize> {
        (0..self.feats.len())
            .filter(|&f| match (self.fires(p, f), self.head_of(f)) {
                (Some(fires), Some(h)) => fires != (p[f] == h),
                _ => false,
            })
            .collect()
    }

    pub fn consistent(&self, p: &Point) -> bool {
        self.violations(p).is_empty()
    }

    pub fn forward_consistent(&self, p: &Point) -> bool {
        (0..self.feats.len()).all(|f| match (self.fires(p, f), self.head_of(f)) {
            (Some(true), Some(h)) => p[f] == h,
            _ => true,
        })
    }

    pub fn is_goal(&self, p: &Point) -> bool {
        !self.rejects(p) && self.consistent(p)
    }

    /// Causal bodies read non-causal features only, so one pass reaches
    /// the fixpoint.
    pub fn propagate(&self, p: &Point) -> Point {
        (0..self.feats.len())
            .map(|f| match (self.fires(p, f), self.head_of(f)) {
                (Some(true), Some(h)) => h,
                _ => p[f],
            })
            .collect()
    }
}

/// The reference state space: cell tuples with one representative point per
/// cell.
pub struct Space {
    pub spec: Spec,
    pub cells: Vec<Vec<(Val, Val)>>,
}

pub type Cells = Vec<usize>;

impl Space {
    pub fn new(spec: Spec) -> Self {
        let cells = spec.all_cells();
        Self { spec, cells }
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.cells.iter().map(Vec::len).collect()
    }

    pub fn size(&self) -> usize {
        self.sizes().iter().product()
    }

    pub fn point(&self, s: &[usize]) -> Point {
        s.iter()
            .enumerate()
            .map(|(f, &c)| self.cells[f][c].0)
            .collect()
    }

    pub fn cell_of(&self, f: usize, v: Val) -> usize {
        self.cells[f]
            .iter()
            .position(|&(a, b)| match (a, b, v) {
                (Val::Cat(a), _, Val::Cat(x)) => a == x,
                (Val::Num(a), Val::Num(b), Val::Num(x)) => a <= x && x <= b,
                _ => false,
            })
            .expect("value outside every cell")
    }

    pub fn cells_of(&self, p: &Point) -> Cells {
        p.iter()
            .enumerate()
            .map(|(f, &v)| self.cell_of(f, v))
            .collect()
    }

    /// Every state in lexicographic order, last feature fastest.
    pub fn states(&self) -> Vec<Cells> {
        let sizes = self.sizes();
        let mut out = Vec::new();
        let mut cur = vec![0; sizes.len()];
        loop {
            out.push(cur.clone());
            let mut i = sizes.len();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < sizes[i] {
                    break;
                }
                cur[i] = 0;
            }
        }
    }

    pub fn goals(&self) -> Vec<Cells> {
        self.states()
            .into_iter()
            .filter(|s| self.spec.is_goal(&self.point(s)))
            .collect()
    }

    pub fn is_goal(&self, s: &[usize]) -> bool {
        self.spec.is_goal(&self.point(s))
    }

    pub fn consistent(&self, s: &[usize]) -> bool {
        self.spec.consistent(&self.point(s))
    }

    /// One planning step: change `f` to `c`, then apply the causal rules.
    pub fn step(&self, s: &[usize], f: usize, c: usize) -> Cells {
        let mut t = s.to_vec();
        t[f] = c;
        let p = self.spec.propagate(&self.point(&t));
        let mut out = t.clone();
        for (g, (&v, old)) in p.iter().zip(self.point(&t)).enumerate() {
            if v != old {
                out[g] = self.cell_of(g, v);
            }
        }
        out
    }

    /// Consistent successors with the action that produced them.
    pub fn successors(&self, s: &[usize]) -> Vec<((usize, usize), Cells)> {
        let mut out = Vec::new();
        for f in 0..s.len() {
            if self.spec.feats[f].mode != Mode::Direct {
                continue;
            }
            for c in 0..self.cells[f].len() {
                if c == s[f] {
                    continue;
                }
                let t = self.step(s, f, c);
                if self.consistent(&t) {
                    out.push(((f, c), t));
                }
            }
        }
        out
    }

    /// Fewest direct steps from `s` to a goal, by breadth-first search.
    pub fn min_depth(&self, s: &[usize], max_depth: usize) -> Option<usize> {
        if self.is_goal(s) {
            return Some(0);
        }
        let mut seen: HashSet<Cells> = HashSet::from([s.to_vec()]);
        let mut queue = VecDeque::from([(s.to_vec(), 0usize)]);
        while let Some((u, d)) = queue.pop_front() {
            if d == max_depth {
                continue;
            }
            for (_, v) in self.successors(&u) {
                if self.is_goal(&v) {
                    return Some(d + 1);
                }
                if seen.insert(v.clone()) {
                    queue.push_back((v, d + 1));
                }
            }
        }
        None
    }

    /// Every loop-free action sequence of exactly `depth` steps that ends
    /// in a goal.
    pub fn all_paths(&self, s: &[usize], depth: usize) -> BTreeSet<Vec<(usize, usize)>> {
        let mut out = BTreeSet::new();
        let mut on_path = vec![s.to_vec()];
        let mut actions = Vec::new();
        self.dfs(s, depth, &mut on_path, &mut actions, &mut out);
        out
    }

    fn dfs(
        &self,
        s: &[usize],
        left: usize,
        on_path: &mut Vec<Cells>,
        actions: &mut Vec<(usize, usize)>,
        out: &mut BTreeSet<Vec<(usize, usize)>>,
    ) {
        if left == 0 {
            if self.is_goal(s) {
                out.insert(actions.clone());
            }
            return;
        }
        for (a, t) in self.successors(s) {
            if on_path.contains(&t) {
                continue;
            }
            on_path.push(t.clone());
            actions.push(a);
            self.dfs(&t, left - 1, on_path, actions, out);
            actions.pop();
            on_path.pop();
        }
    }

    pub fn random_state(&self, rng: &mut ChaCha8Rng) -> Cells {
        self.sizes().iter().map(|&n| rng.gen_range(0..n)).collect()
    }

    /// Among a bounded number of random draws, a rejected state firing the
    /// most decision rules. Such states tend to need longer paths.
    pub fn random_rejected(&self, rng: &mut ChaCha8Rng) -> Option<Cells> {
        (0..200)
            .map(|_| self.random_state(rng))
            .map(|s| (self.spec.fired(&self.point(&s)), s))
            .filter(|(n, _)| *n > 0)
            .max_by_key(|(n, _)| *n)
            .map(|(_, s)| s)
    }
}

/// A uniformly drawn real inside an interval, honouring open ends.
pub fn sample_in(
    rng: &mut ChaCha8Rng,
    lower: f64,
    upper: f64,
    lower_closed: bool,
    upper_closed: bool,
) -> f64 {
    if lower == upper {
        return lower;
    }
    loop {
        let x = match rng.gen_range(0..6) {
            0 if lower_closed => lower,
            1 if upper_closed => upper,
            _ => rng.gen_range(lower..upper),
        };
        let above = if lower_closed { x >= lower } else { x > lower };
        let below = if upper_closed { x <= upper } else { x < upper };
        if above && below {
            return x;
        }
    }
}
