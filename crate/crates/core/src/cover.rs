//! Downward-closed sets of counter configurations as finite unions of
//! ideals, the backward algorithm for monotone counter machines, the two
//! forward semi-procedures, and x0-coverability.
//!
//! Two step relations act on down-sets: the exact one on any
//! [`CounterMachine`] (zero tests respected), and the monotone one available
//! only through [`MonotoneMachine`], which rejects zero tests on
//! construction.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use crate::counter::{CounterConfig, CounterMachine, CounterOp, TransitionId};
use crate::error::{Error, Result};
use crate::ordering::{counter_state_leq, NatVec};
use crate::verdict::AnalysisVerdict;

/// A natural number or ω. `Fin(_) < Omega`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtNat {
    Fin(u64),
    Omega,
}

impl ExtNat {
    fn inc(self) -> ExtNat {
        match self {
            ExtNat::Fin(n) => ExtNat::Fin(n + 1),
            ExtNat::Omega => ExtNat::Omega,
        }
    }

    fn dec(self) -> Option<ExtNat> {
        match self {
            ExtNat::Fin(0) => None,
            ExtNat::Fin(n) => Some(ExtNat::Fin(n - 1)),
            ExtNat::Omega => Some(ExtNat::Omega),
        }
    }

    pub fn covers(self, n: u64) -> bool {
        match self {
            ExtNat::Fin(m) => n <= m,
            ExtNat::Omega => true,
        }
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Fin(n) => write!(f, "{n}"),
            ExtNat::Omega => write!(f, "ω"),
        }
    }
}

/// ω-extended vector; denotes `{v : v_i <= entry_i}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OmegaVec(pub Vec<ExtNat>);

impl OmegaVec {
    pub fn finite(v: &[u64]) -> Self {
        OmegaVec(v.iter().map(|&n| ExtNat::Fin(n)).collect())
    }

    pub fn leq(&self, other: &OmegaVec) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl From<&NatVec> for OmegaVec {
    fn from(v: &NatVec) -> Self {
        OmegaVec::finite(v.as_slice())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ideal {
    pub control: usize,
    pub bound: OmegaVec,
}

impl Ideal {
    pub fn new(control: usize, bound: OmegaVec) -> Self {
        Ideal { control, bound }
    }

    /// Downward closure of a single configuration.
    pub fn of(x: &CounterConfig) -> Self {
        Ideal::new(x.control, OmegaVec::from(&x.valuation))
    }

    pub fn contains(&self, x: &CounterConfig) -> bool {
        self.control == x.control
            && self.bound.0.len() == x.valuation.dim()
            && self
                .bound
                .0
                .iter()
                .zip(x.valuation.as_slice())
                .all(|(b, &v)| b.covers(v))
    }

    pub fn is_subset(&self, other: &Ideal) -> bool {
        self.control == other.control && self.bound.leq(&other.bound)
    }
}

pub fn ideal_contains(i: &Ideal, x: &CounterConfig) -> bool {
    i.contains(x)
}

pub fn ideal_subset(i1: &Ideal, i2: &Ideal) -> bool {
    i1.is_subset(i2)
}

/// Finite union of ideals, kept inclusion-minimal and sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DownSet {
    ideals: Vec<Ideal>,
}

impl DownSet {
    pub fn empty() -> Self {
        DownSet::default()
    }

    pub fn ideals(&self) -> &[Ideal] {
        &self.ideals
    }

    pub fn is_empty(&self) -> bool {
        self.ideals.is_empty()
    }

    pub fn of(x: &CounterConfig) -> Self {
        DownSet {
            ideals: vec![Ideal::of(x)],
        }
    }

    pub fn contains(&self, x: &CounterConfig) -> bool {
        self.ideals.iter().any(|i| i.contains(x))
    }

    pub fn contains_ideal(&self, i: &Ideal) -> bool {
        self.ideals.iter().any(|j| i.is_subset(j))
    }

    /// Inclusion of denotations. An ideal is included in a finite union of
    /// ideals iff it is included in one of them.
    pub fn is_subset(&self, other: &DownSet) -> bool {
        self.ideals.iter().all(|i| other.contains_ideal(i))
    }

    pub fn union(&self, other: &DownSet) -> DownSet {
        downset_normalize(self.ideals.iter().chain(&other.ideals).cloned())
    }

    pub fn insert(&mut self, i: Ideal) {
        if self.contains_ideal(&i) {
            return;
        }
        self.ideals.retain(|j| !j.is_subset(&i));
        let pos = self.ideals.binary_search(&i).unwrap_or_else(|p| p);
        self.ideals.insert(pos, i);
    }

    pub fn render(&self, machine: &CounterMachine) -> String {
        let parts: Vec<String> = self
            .ideals
            .iter()
            .map(|i| {
                let entries: Vec<String> = i.bound.0.iter().map(|e| e.to_string()).collect();
                format!("{}:({})", machine.controls[i.control], entries.join(","))
            })
            .collect();
        format!("{{{}}}", parts.join(", "))
    }
}

pub fn downset_normalize(ideals: impl IntoIterator<Item = Ideal>) -> DownSet {
    let mut d = DownSet::empty();
    for i in ideals {
        d.insert(i);
    }
    d
}

/// Image of one ideal under one transition, downward closed. `None` when the
/// transition is disabled on every element of the ideal.
fn ideal_post(machine: &CounterMachine, ideal: &Ideal, t: TransitionId) -> Option<Ideal> {
    let tr = &machine.transitions[t];
    if tr.source != ideal.control {
        return None;
    }
    let mut b = ideal.bound.0.clone();
    for &c in &tr.zero_tests {
        b[c] = ExtNat::Fin(0);
    }
    match tr.op {
        CounterOp::Inc(c) => b[c] = b[c].inc(),
        CounterOp::Dec(c) => b[c] = b[c].dec()?,
        CounterOp::Noop => {}
    }
    Some(Ideal::new(tr.target, OmegaVec(b)))
}

/// Exact `↓Post(D)`, zero tests respected.
pub fn downset_post(machine: &CounterMachine, d: &DownSet) -> DownSet {
    let mut out = DownSet::empty();
    for i in d.ideals() {
        for t in 0..machine.transitions.len() {
            if let Some(j) = ideal_post(machine, i, t) {
                out.insert(j);
            }
        }
    }
    out
}

/// `↓Post^*(D)` by iterating [`downset_post`] until it stabilises, or `None`
/// after `max_rounds` rounds.
pub fn downset_post_star(machine: &CounterMachine, d: &DownSet, max_rounds: usize) -> Option<DownSet> {
    let mut cur = d.clone();
    for _ in 0..max_rounds {
        let next = cur.union(&downset_post(machine, &cur));
        if next == cur {
            return Some(cur);
        }
        cur = next;
    }
    None
}

/// `↓Post(D) ⊆ D`.
pub fn is_inductive(machine: &CounterMachine, d: &DownSet) -> bool {
    downset_post(machine, d).is_subset(d)
}

/// Upward-closed set given by a minimal basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct UpSet {
    basis: Vec<CounterConfig>,
}

impl UpSet {
    pub fn empty() -> Self {
        UpSet::default()
    }

    pub fn of(x: CounterConfig) -> Self {
        UpSet { basis: vec![x] }
    }

    pub fn basis(&self) -> &[CounterConfig] {
        &self.basis
    }

    pub fn contains(&self, x: &CounterConfig) -> bool {
        self.basis.iter().any(|b| counter_state_leq(b, x).unwrap_or(false))
    }

    pub fn insert(&mut self, x: CounterConfig) {
        if self.contains(&x) {
            return;
        }
        self.basis.retain(|b| !counter_state_leq(&x, b).unwrap_or(false));
        let pos = self.basis.binary_search(&x).unwrap_or_else(|p| p);
        self.basis.insert(pos, x);
    }

    /// The complement, as a down-set over `controls` control states and
    /// `dim` counters.
    pub fn complement(&self, controls: usize, dim: usize) -> DownSet {
        let mut out = Vec::new();
        for q in 0..controls {
            let mut parts = vec![OmegaVec(vec![ExtNat::Omega; dim])];
            for b in self.basis.iter().filter(|b| b.control == q) {
                let mut next = Vec::new();
                for p in &parts {
                    for (i, &bi) in b.valuation.as_slice().iter().enumerate() {
                        if bi == 0 {
                            continue;
                        }
                        let mut v = p.clone();
                        v.0[i] = v.0[i].min(ExtNat::Fin(bi - 1));
                        next.push(v);
                    }
                }
                parts = downset_normalize(next.into_iter().map(|v| Ideal::new(q, v)))
                    .ideals
                    .into_iter()
                    .map(|i| i.bound)
                    .collect();
            }
            out.extend(parts.into_iter().map(|v| Ideal::new(q, v)));
        }
        downset_normalize(out)
    }

    pub fn union(&self, other: &UpSet) -> UpSet {
        let mut u = self.clone();
        for b in &other.basis {
            u.insert(b.clone());
        }
        u
    }
}

/// A counter machine without zero tests. Such machines are monotone, so the
/// backward algorithm and the coverability forward procedure are sound.
#[derive(Clone, Copy, Debug)]
pub struct MonotoneMachine<'m>(&'m CounterMachine);

impl<'m> MonotoneMachine<'m> {
    pub fn new(machine: &'m CounterMachine) -> Result<Self> {
        match machine.transitions.iter().position(|t| !t.zero_tests.is_empty()) {
            Some(t) => Err(Error::ZeroTestInMonotone { transition: t }),
            None => Ok(MonotoneMachine(machine)),
        }
    }

    pub fn machine(&self) -> &'m CounterMachine {
        self.0
    }

    pub fn downset_post(&self, d: &DownSet) -> DownSet {
        downset_post(self.0, d)
    }
}

impl<'m> TryFrom<&'m CounterMachine> for MonotoneMachine<'m> {
    type Error = Error;

    fn try_from(m: &'m CounterMachine) -> Result<Self> {
        MonotoneMachine::new(m)
    }
}

/// Minimal basis of `↑Pre(↑u)`.
pub fn pre_basis(machine: &MonotoneMachine<'_>, u: &UpSet) -> UpSet {
    let m = machine.0;
    let mut out = UpSet::empty();
    for b in u.basis() {
        for tr in m.transitions.iter().filter(|t| t.target == b.control) {
            let mut v = b.valuation.clone();
            match tr.op {
                CounterOp::Inc(c) => v.0[c] = v.0[c].saturating_sub(1),
                CounterOp::Dec(c) => v.0[c] += 1,
                CounterOp::Noop => {}
            }
            out.insert(CounterConfig::new(tr.source, v));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BackwardResult {
    pub coverable: bool,
    /// Basis of `↑Pre^*(↑y)` at the fixpoint.
    pub basis: UpSet,
    pub iterations: usize,
}

/// Iterates `I_{n+1} = I_n ∪ pb(I_n)` from `{y}` until the upward closures
/// coincide, then tests `x0 ∈ ↑I`.
pub fn backward_coverability(
    machine: &MonotoneMachine<'_>,
    x0: &CounterConfig,
    y: &CounterConfig,
) -> Result<BackwardResult> {
    let dim = machine.0.dim();
    for x in [x0, y] {
        if x.valuation.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: x.valuation.dim(),
            });
        }
    }
    let mut cur = UpSet::of(y.clone());
    let mut iterations = 0;
    loop {
        iterations += 1;
        let next = cur.union(&pre_basis(machine, &cur));
        if next == cur {
            break;
        }
        cur = next;
    }
    Ok(BackwardResult {
        coverable: cur.contains(x0),
        basis: cur,
        iterations,
    })
}

impl BackwardResult {
    /// When `y` is not coverable, the complement of `↑Pre^*(↑y)` is an
    /// inductive invariant containing `x0` and excluding `y`.
    pub fn invariant(&self, machine: &CounterMachine) -> DownSet {
        self.basis.complement(machine.controls.len(), machine.dim())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForwardCover {
    pub coverable: bool,
    pub steps: usize,
    /// `D_0 ⊆ D_1 ⊆ ...` as computed.
    pub sets: Vec<DownSet>,
}

/// Iterates `D := ↓(D ∪ Post(D))` from `↓x0` until `y ∈ D` or the step
/// budget runs out. Only meaningful for monotone machines.
pub fn forward_cover_semiproc(
    machine: &MonotoneMachine<'_>,
    x0: &CounterConfig,
    y: &CounterConfig,
    step_budget: usize,
) -> ForwardCover {
    let mut d = DownSet::of(x0);
    let mut sets = vec![d.clone()];
    for step in 0..=step_budget {
        if d.contains(y) {
            return ForwardCover {
                coverable: true,
                steps: step,
                sets,
            };
        }
        if step == step_budget {
            break;
        }
        d = d.union(&machine.downset_post(&d));
        sets.push(d.clone());
    }
    ForwardCover {
        coverable: false,
        steps: step_budget,
        sets,
    }
}

/// Keeps a per-control antichain `(control, ideals)` as a candidate.
pub type CandidateFilter = Box<dyn Fn(usize, &[Ideal]) -> bool>;

/// Enumerates down-sets in a fixed fair order: by increasing bound `B`,
/// all down-sets whose ideals have finite entries `<= B` and at most `B`
/// ideals per control state, each listed once, at the first bound that can
/// express it. Within a bound, candidates are ordered lexicographically over
/// the control states (first control most significant); per control the
/// antichains are ordered by size, then lexicographically.
pub struct DownSetEnumerator {
    dim: usize,
    controls: usize,
    bound: u64,
    choices: Vec<Vec<Vec<Ideal>>>,
    odometer: Vec<usize>,
    filter: CandidateFilter,
    started: bool,
}

impl DownSetEnumerator {
    pub fn new(dim: usize, controls: usize) -> Self {
        Self::with_filter(dim, controls, Box::new(|_, _| true))
    }

    /// Restricts the per-control choices; the relative order of the
    /// remaining candidates is unchanged.
    pub fn with_filter(dim: usize, controls: usize, filter: CandidateFilter) -> Self {
        let mut e = DownSetEnumerator {
            dim,
            controls,
            bound: 0,
            choices: Vec::new(),
            odometer: Vec::new(),
            filter,
            started: false,
        };
        e.prepare_bound();
        e
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    fn vectors(&self) -> Vec<OmegaVec> {
        let values: Vec<ExtNat> = (0..=self.bound)
            .map(ExtNat::Fin)
            .chain(std::iter::once(ExtNat::Omega))
            .collect();
        let mut out = vec![Vec::new()];
        for _ in 0..self.dim {
            out = out
                .into_iter()
                .flat_map(|p: Vec<ExtNat>| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(*v);
                        q
                    })
                })
                .collect();
        }
        out.into_iter().map(OmegaVec).collect()
    }

    fn antichains(&self, control: usize) -> Vec<Vec<Ideal>> {
        let vecs = self.vectors();
        let max = self.bound as usize;
        let mut all: Vec<Vec<usize>> = vec![Vec::new()];
        let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..max {
            let mut next = Vec::new();
            for set in &layer {
                let start = set.last().map_or(0, |&l| l + 1);
                for j in start..vecs.len() {
                    if set.iter().all(|&i| !vecs[i].leq(&vecs[j]) && !vecs[j].leq(&vecs[i])) {
                        let mut s = set.clone();
                        s.push(j);
                        next.push(s);
                    }
                }
            }
            all.extend(next.iter().cloned());
            layer = next;
        }
        all.into_iter()
            .map(|s| {
                s.into_iter()
                    .map(|i| Ideal::new(control, vecs[i].clone()))
                    .collect::<Vec<_>>()
            })
            .filter(|s| (self.filter)(control, s))
            .collect()
    }

    fn expressible_below(&self, picks: &[&Vec<Ideal>]) -> bool {
        if self.bound == 0 {
            return false;
        }
        let b = self.bound - 1;
        picks.iter().all(|s| {
            s.len() as u64 <= b
                && s.iter().all(|i| {
                    i.bound
                        .0
                        .iter()
                        .all(|e| matches!(e, ExtNat::Omega) || *e <= ExtNat::Fin(b))
                })
        })
    }

    fn prepare_bound(&mut self) {
        self.choices = (0..self.controls).map(|c| self.antichains(c)).collect();
        self.odometer = vec![0; self.controls];
        self.started = false;
    }

    fn advance(&mut self) -> bool {
        if !self.started {
            self.started = true;
            return self.choices.iter().all(|c| !c.is_empty());
        }
        for pos in (0..self.controls).rev() {
            self.odometer[pos] += 1;
            if self.odometer[pos] < self.choices[pos].len() {
                return true;
            }
            self.odometer[pos] = 0;
        }
        false
    }
}

impl DownSetEnumerator {
    /// One unit of enumeration work: the next candidate, or `None` when the
    /// step skipped an already listed candidate or moved to the next bound.
    /// With a restrictive filter the candidates may run out while steps
    /// continue forever, so budgets should count steps.
    pub fn step(&mut self) -> Option<DownSet> {
        if self.controls == 0 {
            return None;
        }
        if !self.advance() {
            self.bound += 1;
            self.prepare_bound();
            return None;
        }
        let picks: Vec<&Vec<Ideal>> = self
            .odometer
            .iter()
            .enumerate()
            .map(|(c, &i)| &self.choices[c][i])
            .collect();
        if self.expressible_below(&picks) {
            return None;
        }
        let ideals = picks.into_iter().flatten().cloned().collect::<Vec<_>>();
        Some(downset_normalize(ideals))
    }
}

impl Iterator for DownSetEnumerator {
    type Item = DownSet;

    fn next(&mut self) -> Option<DownSet> {
        if self.controls == 0 {
            return None;
        }
        loop {
            if let Some(d) = self.step() {
                return Some(d);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NonCover {
    /// Inductive down-set containing `x0` and not `y`.
    NotCoverable(DownSet),
    Inconclusive {
        examined: usize,
    },
}

/// Enumerates down-sets and stops at the first `D` with `↓Post(D) ⊆ D`,
/// `x0 ∈ D` and `y ∉ D`, using the exact step relation. The budget counts
/// enumeration steps (see [`DownSetEnumerator::step`]).
pub fn noncover_semiproc(
    machine: &CounterMachine,
    x0: &CounterConfig,
    y: &CounterConfig,
    enumeration_budget: usize,
) -> NonCover {
    if counter_state_leq(y, x0).unwrap_or(false) {
        // every candidate containing x0 contains y
        return NonCover::Inconclusive {
            examined: enumeration_budget,
        };
    }
    let mut it = candidate_enumerator(machine, x0, y);
    for _ in 0..enumeration_budget {
        if let Some(d) = it.step() {
            if is_inductive(machine, &d) {
                return NonCover::NotCoverable(d);
            }
        }
    }
    NonCover::Inconclusive {
        examined: enumeration_budget,
    }
}

/// Enumerator restricted to candidates containing `x0` and excluding `y`;
/// the others can never be accepted, so skipping them keeps the outcome of
/// the full enumeration.
fn candidate_enumerator(machine: &CounterMachine, x0: &CounterConfig, y: &CounterConfig) -> DownSetEnumerator {
    let (x0, y) = (x0.clone(), y.clone());
    DownSetEnumerator::with_filter(
        machine.dim(),
        machine.controls.len(),
        Box::new(move |c, ideals: &[Ideal]| {
            (c != x0.control || ideals.iter().any(|i| i.contains(&x0)))
                && (c != y.control || !ideals.iter().any(|i| i.contains(&y)))
        }),
    )
}

/// Exact forward exploration from `x0` looking for a state above `y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Search {
    Found {
        run: Vec<TransitionId>,
        reached: CounterConfig,
    },
    /// The whole (finite) reachable set was explored without covering `y`.
    Exhausted {
        reachable: Vec<CounterConfig>,
    },
    BudgetExceeded,
}

struct ForwardBfs<'m> {
    machine: &'m CounterMachine,
    parent: HashMap<CounterConfig, Option<(CounterConfig, TransitionId)>>,
    order: Vec<CounterConfig>,
    frontier: VecDeque<CounterConfig>,
}

impl<'m> ForwardBfs<'m> {
    fn new(machine: &'m CounterMachine, x0: &CounterConfig) -> Self {
        ForwardBfs {
            machine,
            parent: HashMap::from([(x0.clone(), None)]),
            order: vec![x0.clone()],
            frontier: VecDeque::from([x0.clone()]),
        }
    }

    fn run_to(&self, x: &CounterConfig) -> Vec<TransitionId> {
        let mut run = Vec::new();
        let mut cur = x.clone();
        while let Some(Some((p, t))) = self.parent.get(&cur) {
            run.push(*t);
            cur = p.clone();
        }
        run.reverse();
        run
    }

    fn covering(&self, y: &CounterConfig) -> Option<CounterConfig> {
        self.order
            .iter()
            .find(|x| counter_state_leq(y, x).unwrap_or(false))
            .cloned()
    }

    /// Expands one BFS layer; returns newly discovered states.
    fn layer(&mut self) -> Vec<CounterConfig> {
        let mut fresh = Vec::new();
        for _ in 0..self.frontier.len() {
            let x = self.frontier.pop_front().expect("non-empty");
            for (t, y) in self.machine.post(&x) {
                if !self.parent.contains_key(&y) {
                    self.parent.insert(y.clone(), Some((x.clone(), t)));
                    self.order.push(y.clone());
                    self.frontier.push_back(y.clone());
                    fresh.push(y);
                }
            }
        }
        fresh
    }
}

/// Breadth-first search over `Post^k(x0)` for a state covering `y`.
pub fn forward_search(machine: &CounterMachine, x0: &CounterConfig, y: &CounterConfig, state_budget: usize) -> Search {
    let mut bfs = ForwardBfs::new(machine, x0);
    if let Some(r) = bfs.covering(y) {
        return Search::Found {
            run: bfs.run_to(&r),
            reached: r,
        };
    }
    while !bfs.frontier.is_empty() {
        let fresh = bfs.layer();
        if let Some(r) = fresh.iter().find(|x| counter_state_leq(y, x).unwrap_or(false)) {
            return Search::Found {
                run: bfs.run_to(r),
                reached: r.clone(),
            };
        }
        if bfs.order.len() > state_budget {
            return Search::BudgetExceeded;
        }
    }
    Search::Exhausted { reachable: bfs.order }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoverCertificate {
    /// Run from `x0` reaching a state above the target.
    Run {
        labels: Vec<TransitionId>,
        reached: CounterConfig,
    },
    /// Inductive invariant containing `x0` and not the target.
    Invariant(DownSet),
    /// The complete, finite reachable set; none of its states covers the target.
    ReachableSet(Vec<CounterConfig>),
}

impl CoverCertificate {
    /// Re-checks the certificate against the machine.
    pub fn verify(&self, machine: &CounterMachine, x0: &CounterConfig, y: &CounterConfig) -> bool {
        match self {
            CoverCertificate::Run { labels, reached } => {
                matches!(
                    machine.run(x0, labels),
                    Ok(crate::counter::RunOutcome::Completed(ref z)) if z == reached
                ) && counter_state_leq(y, reached).unwrap_or(false)
            }
            CoverCertificate::Invariant(d) => d.contains(x0) && !d.contains(y) && is_inductive(machine, d),
            CoverCertificate::ReachableSet(states) => {
                let set: HashSet<&CounterConfig> = states.iter().collect();
                set.contains(x0)
                    && states
                        .iter()
                        .all(|x| machine.post(x).iter().all(|(_, z)| set.contains(z)))
                    && !states.iter().any(|x| counter_state_leq(y, x).unwrap_or(false))
            }
        }
    }

    pub fn render(&self, machine: &CounterMachine) -> String {
        match self {
            CoverCertificate::Run { labels, reached } => {
                let steps: Vec<String> = labels.iter().map(|&t| machine.show_action(t)).collect();
                format!("run [{}] reaching {}", steps.join(", "), machine.show_config(reached))
            }
            CoverCertificate::Invariant(d) => format!("inductive invariant {}", d.render(machine)),
            CoverCertificate::ReachableSet(s) => format!("complete reachable set of {} states", s.len()),
        }
    }
}

/// Enumeration steps taken by the non-coverability side per forward layer.
const CANDIDATES_PER_ROUND: usize = 64;

/// Decides whether `y` is coverable from `x0` by alternating an exact
/// forward search with the enumeration of inductive invariants. Both
/// certificates are sound for any counter machine; termination is
/// guaranteed when the machine is cover-monotone from `x0`. `budget` bounds
/// the total number of explored states plus enumerated candidates.
pub fn x0_coverability(
    machine: &CounterMachine,
    x0: &CounterConfig,
    y: &CounterConfig,
    budget: usize,
    cover_monotone_asserted: bool,
) -> AnalysisVerdict<CoverCertificate> {
    let mut bfs = ForwardBfs::new(machine, x0);
    let mut enumerator = candidate_enumerator(machine, x0, y);
    let mut used = 1usize;
    if let Some(r) = bfs.covering(y) {
        return AnalysisVerdict::positive(
            CoverCertificate::Run {
                labels: bfs.run_to(&r),
                reached: r,
            },
            used,
            budget,
        );
    }
    while used < budget {
        if !bfs.frontier.is_empty() {
            let fresh = bfs.layer();
            used += fresh.len();
            if let Some(r) = fresh.iter().find(|x| counter_state_leq(y, x).unwrap_or(false)) {
                return AnalysisVerdict::positive(
                    CoverCertificate::Run {
                        labels: bfs.run_to(r),
                        reached: r.clone(),
                    },
                    used,
                    budget,
                );
            }
            if bfs.frontier.is_empty() {
                return AnalysisVerdict::negative(
                    Some(CoverCertificate::ReachableSet(bfs.order.clone())),
                    used,
                    budget,
                );
            }
        }
        for _ in 0..CANDIDATES_PER_ROUND {
            if used >= budget {
                break;
            }
            used += 1;
            if let Some(d) = enumerator.step() {
                if is_inductive(machine, &d) {
                    return AnalysisVerdict::negative(Some(CoverCertificate::Invariant(d)), used, budget);
                }
            }
        }
    }
    let v = AnalysisVerdict::inconclusive(used, budget);
    if cover_monotone_asserted {
        v
    } else {
        v.with_caveat("cover-monotony not asserted; the procedure need not terminate")
    }
}

/// Violation of cover-monotony: `y1` covered from `x0`, `x1 <= y1`,
/// `x1 -> x2`, and no `y2 >= x2` reachable from `y1` within the length cap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverMonotonyViolation {
    pub y1: CounterConfig,
    pub x1: CounterConfig,
    pub x2: CounterConfig,
}

/// Searches for a cover-monotony violation among states with counter values
/// `<= value_cap`, using runs of length `<= length_cap` both to approximate
/// the cover of `x0` and to look for the simulating run. `None` means no
/// violation was found within the caps, not a proof.
pub fn check_cover_monotone_bounded(
    machine: &CounterMachine,
    x0: &CounterConfig,
    value_cap: u64,
    length_cap: usize,
) -> Option<CoverMonotonyViolation> {
    let reach = |from: &CounterConfig| -> Vec<CounterConfig> {
        let mut seen = HashSet::from([from.clone()]);
        let mut layer = vec![from.clone()];
        let mut all = vec![from.clone()];
        for _ in 0..length_cap {
            let mut next = Vec::new();
            for x in &layer {
                for (_, y) in machine.post(x) {
                    if seen.insert(y.clone()) {
                        all.push(y.clone());
                        next.push(y);
                    }
                }
            }
            layer = next;
        }
        all
    };
    let mut cover: Vec<CounterConfig> = Vec::new();
    let mut cover_seen = HashSet::new();
    for r in reach(x0) {
        for z in below(&r, value_cap) {
            if cover_seen.insert(z.clone()) {
                cover.push(z);
            }
        }
    }
    cover.sort();
    for y1 in &cover {
        let from_y1 = reach(y1);
        for x1 in below(y1, value_cap) {
            for (_, x2) in machine.post(&x1) {
                if !from_y1.iter().any(|y2| counter_state_leq(&x2, y2).unwrap_or(false)) {
                    return Some(CoverMonotonyViolation { y1: y1.clone(), x1, x2 });
                }
            }
        }
    }
    None
}

/// All configurations below `x` (same control) with entries capped.
fn below(x: &CounterConfig, cap: u64) -> Vec<CounterConfig> {
    let mut out = vec![Vec::new()];
    for &v in x.valuation.as_slice() {
        out = out
            .into_iter()
            .flat_map(|p: Vec<u64>| {
                (0..=v.min(cap)).map(move |n| {
                    let mut q = p.clone();
                    q.push(n);
                    q
                })
            })
            .collect();
    }
    out.into_iter().map(|v| CounterConfig::new(x.control, v)).collect()
}

/// A finite ordered transition system given by explicit tables, used to
/// check monotony properties exhaustively.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteSystem {
    /// `leq[x][y]` iff `x <= y`.
    pub leq: Vec<Vec<bool>>,
    pub succ: Vec<Vec<usize>>,
}

impl FiniteSystem {
    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    fn reachable(&self, x: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![x];
        seen[x] = true;
        while let Some(s) = stack.pop() {
            for &t in &self.succ[s] {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }

    /// `↓Post^*(x0)`.
    pub fn cover(&self, x0: usize) -> Vec<bool> {
        let reach = self.reachable(x0);
        (0..self.len())
            .map(|z| (0..self.len()).any(|r| reach[r] && self.leq[z][r]))
            .collect()
    }

    fn simulates_from(&self, y1: usize) -> bool {
        let reach = self.reachable(y1);
        (0..self.len()).filter(|&x1| self.leq[x1][y1]).all(|x1| {
            self.succ[x1]
                .iter()
                .all(|&x2| (0..self.len()).any(|y2| reach[y2] && self.leq[x2][y2]))
        })
    }

    pub fn is_monotone(&self) -> bool {
        (0..self.len()).all(|y1| self.simulates_from(y1))
    }

    pub fn is_cover_monotone(&self, x0: usize) -> bool {
        let cover = self.cover(x0);
        (0..self.len()).filter(|&y| cover[y]).all(|y1| self.simulates_from(y1))
    }
}
