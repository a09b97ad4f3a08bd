//! Counter machines with zero tests: syntax, semantics and the
//! restricted-zero-test (CMRZ) check.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::ordering::{CounterOrder, NatVec};
use crate::system::Olts;

/// Index of a transition in declaration order. Transition identities are the
/// labels of the induced transition system.
pub type TransitionId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CounterOp {
    Inc(usize),
    Dec(usize),
    Noop,
}

impl CounterOp {
    pub fn counter(&self) -> Option<usize> {
        match *self {
            CounterOp::Inc(c) | CounterOp::Dec(c) => Some(c),
            CounterOp::Noop => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CounterTransition {
    pub source: usize,
    pub op: CounterOp,
    /// Counters that must be zero for the transition to fire.
    pub zero_tests: Vec<usize>,
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterMachine {
    pub name: String,
    pub controls: Vec<String>,
    pub counters: Vec<String>,
    pub transitions: Vec<CounterTransition>,
    pub initial_control: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CounterConfig {
    pub control: usize,
    pub valuation: NatVec,
}

impl CounterConfig {
    pub fn new(control: usize, valuation: impl Into<NatVec>) -> Self {
        CounterConfig {
            control,
            valuation: valuation.into(),
        }
    }
}

/// Result of folding a label sequence over the step relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunOutcome<S> {
    Completed(S),
    /// The label at `index` was disabled in `at`.
    Stuck {
        index: usize,
        at: S,
    },
}

/// Outcome of the CMRZ check. `witness` is a shortest transition sequence
/// in the control graph along which a zero-tested counter is modified
/// afterwards; empty when the machine is CMRZ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CmrzReport {
    pub is_cmrz: bool,
    pub witness: Vec<TransitionId>,
}

impl CounterMachine {
    pub fn new(
        name: impl Into<String>,
        controls: Vec<String>,
        counters: Vec<String>,
        transitions: Vec<CounterTransition>,
        initial_control: usize,
    ) -> Result<Self> {
        let m = CounterMachine {
            name: name.into(),
            controls,
            counters,
            transitions,
            initial_control,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let nq = self.controls.len();
        let nc = self.counters.len();
        if self.initial_control >= nq {
            return Err(Error::InvalidMachine("initial control state out of range".into()));
        }
        for (i, t) in self.transitions.iter().enumerate() {
            if t.source >= nq || t.target >= nq {
                return Err(Error::InvalidMachine(format!(
                    "transition {i} references an unknown control state"
                )));
            }
            if t.op.counter().is_some_and(|c| c >= nc) || t.zero_tests.iter().any(|&c| c >= nc) {
                return Err(Error::InvalidMachine(format!(
                    "transition {i} references an unknown counter"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.counters.len()
    }

    pub fn control_id(&self, name: &str) -> Option<usize> {
        self.controls.iter().position(|c| c == name)
    }

    pub fn counter_id(&self, name: &str) -> Option<usize> {
        self.counters.iter().position(|c| c == name)
    }

    pub fn has_zero_tests(&self) -> bool {
        self.transitions.iter().any(|t| !t.zero_tests.is_empty())
    }

    pub fn initial_config(&self) -> CounterConfig {
        CounterConfig::new(self.initial_control, NatVec::zeros(self.dim()))
    }

    /// Fires `t` from `x`. Zero tests read the pre-state; a failing test or a
    /// decrement below zero disables the transition.
    pub fn step(&self, x: &CounterConfig, t: TransitionId) -> Result<Option<CounterConfig>> {
        let tr = self.transitions.get(t).ok_or(Error::UnknownTransition(t))?;
        if x.valuation.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.valuation.dim(),
            });
        }
        if tr.source != x.control {
            return Err(Error::WrongSource { transition: t });
        }
        Ok(self.fire(x, tr))
    }

    fn fire(&self, x: &CounterConfig, tr: &CounterTransition) -> Option<CounterConfig> {
        if tr.source != x.control || tr.zero_tests.iter().any(|&c| x.valuation.0[c] != 0) {
            return None;
        }
        let mut v = x.valuation.clone();
        match tr.op {
            CounterOp::Inc(c) => v.0[c] += 1,
            CounterOp::Dec(c) => {
                if v.0[c] == 0 {
                    return None;
                }
                v.0[c] -= 1;
            }
            CounterOp::Noop => {}
        }
        Some(CounterConfig::new(tr.target, v))
    }

    /// Enabled one-step successors, in declaration order of the transitions.
    pub fn post(&self, x: &CounterConfig) -> Vec<(TransitionId, CounterConfig)> {
        self.transitions
            .iter()
            .enumerate()
            .filter_map(|(i, tr)| self.fire(x, tr).map(|y| (i, y)))
            .collect()
    }

    pub fn run(&self, x0: &CounterConfig, labels: &[TransitionId]) -> Result<RunOutcome<CounterConfig>> {
        if let Some(&bad) = labels.iter().find(|&&t| t >= self.transitions.len()) {
            return Err(Error::UnknownTransition(bad));
        }
        let mut cur = x0.clone();
        for (index, &t) in labels.iter().enumerate() {
            match self.fire(&cur, &self.transitions[t]) {
                Some(next) => cur = next,
                None => return Ok(RunOutcome::Stuck { index, at: cur }),
            }
        }
        Ok(RunOutcome::Completed(cur))
    }

    /// Checks the restricted-zero-test condition on the control graph: no
    /// transition reachable from (and including) a zero test on `c` may
    /// increment or decrement `c`.
    pub fn is_cmrz(&self) -> CmrzReport {
        let mut best: Option<Vec<TransitionId>> = None;
        for (ti, t) in self.transitions.iter().enumerate() {
            if t.zero_tests.is_empty() {
                continue;
            }
            let modifies = |tr: &CounterTransition| tr.op.counter().is_some_and(|c| t.zero_tests.contains(&c));
            let witness = if modifies(t) {
                Some(vec![ti])
            } else {
                self.shortest_path_to(t.target, modifies).map(|mut p| {
                    p.insert(0, ti);
                    p
                })
            };
            if let Some(w) = witness {
                if best.as_ref().is_none_or(|b| w.len() < b.len()) {
                    best = Some(w);
                }
            }
        }
        match best {
            Some(witness) => CmrzReport {
                is_cmrz: false,
                witness,
            },
            None => CmrzReport {
                is_cmrz: true,
                witness: Vec::new(),
            },
        }
    }

    /// BFS over the control graph from `from`; returns the shortest transition
    /// path whose last transition satisfies `pred`.
    fn shortest_path_to(&self, from: usize, pred: impl Fn(&CounterTransition) -> bool) -> Option<Vec<TransitionId>> {
        let mut prev: Vec<Option<(usize, TransitionId)>> = vec![None; self.controls.len()];
        let mut seen = vec![false; self.controls.len()];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        let path_to = |prev: &[Option<(usize, TransitionId)>], mut q: usize| {
            let mut p = Vec::new();
            while q != from {
                let (pq, t) = prev[q].expect("reached control has a predecessor");
                p.push(t);
                q = pq;
            }
            p.reverse();
            p
        };
        while let Some(q) = queue.pop_front() {
            for (ti, tr) in self.transitions.iter().enumerate() {
                if tr.source != q {
                    continue;
                }
                if pred(tr) {
                    let mut p = path_to(&prev, q);
                    p.push(ti);
                    return Some(p);
                }
                if !seen[tr.target] {
                    seen[tr.target] = true;
                    prev[tr.target] = Some((q, ti));
                    queue.push_back(tr.target);
                }
            }
        }
        None
    }

    pub fn show_transition(&self, t: TransitionId) -> String {
        let tr = &self.transitions[t];
        let op = match tr.op {
            CounterOp::Inc(c) => format!("inc({})", self.counters[c]),
            CounterOp::Dec(c) => format!("dec({})", self.counters[c]),
            CounterOp::Noop => "nop".to_string(),
        };
        let zero = if tr.zero_tests.is_empty() {
            String::new()
        } else {
            let names: Vec<&str> = tr.zero_tests.iter().map(|&c| self.counters[c].as_str()).collect();
            format!(" [zero: {}]", names.join(", "))
        };
        format!(
            "{} -- {}{} --> {}",
            self.controls[tr.source], op, zero, self.controls[tr.target]
        )
    }

    /// Short action label such as `inc(c)` or `zero(c)`.
    pub fn show_action(&self, t: TransitionId) -> String {
        let tr = &self.transitions[t];
        let mut parts = Vec::new();
        match tr.op {
            CounterOp::Inc(c) => parts.push(format!("inc({})", self.counters[c])),
            CounterOp::Dec(c) => parts.push(format!("dec({})", self.counters[c])),
            CounterOp::Noop => {}
        }
        if !tr.zero_tests.is_empty() {
            let names: Vec<&str> = tr.zero_tests.iter().map(|&c| self.counters[c].as_str()).collect();
            parts.push(format!("zero({})", names.join(",")));
        }
        if parts.is_empty() {
            "nop".to_string()
        } else {
            parts.join("+")
        }
    }

    pub fn show_config(&self, x: &CounterConfig) -> String {
        format!("({},{})", self.controls[x.control], x.valuation)
    }
}

/// The ordered transition system induced by a counter machine and an
/// initial configuration.
#[derive(Clone, Debug)]
pub struct CounterSystem<'m> {
    pub machine: &'m CounterMachine,
    initial: CounterConfig,
    order: CounterOrder,
}

impl<'m> CounterSystem<'m> {
    pub fn new(machine: &'m CounterMachine, initial: CounterConfig) -> Self {
        CounterSystem {
            machine,
            initial,
            order: CounterOrder,
        }
    }

    pub fn from_initial_control(machine: &'m CounterMachine) -> Self {
        Self::new(machine, machine.initial_config())
    }
}

impl Olts for CounterSystem<'_> {
    type State = CounterConfig;
    type Label = TransitionId;
    type Order = CounterOrder;

    fn initial(&self) -> &CounterConfig {
        &self.initial
    }

    fn post(&self, x: &CounterConfig) -> Vec<(TransitionId, CounterConfig)> {
        self.machine.post(x)
    }

    fn step(&self, x: &CounterConfig, label: &TransitionId) -> Option<CounterConfig> {
        self.machine
            .transitions
            .get(*label)
            .and_then(|tr| self.machine.fire(x, tr))
    }

    fn order(&self) -> &CounterOrder {
        &self.order
    }

    fn show_state(&self, x: &CounterConfig) -> String {
        self.machine.show_config(x)
    }

    fn show_label(&self, label: &TransitionId) -> String {
        self.machine.show_action(*label)
    }
}

impl fmt::Display for CounterOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CounterOp::Inc(c) => write!(f, "inc(#{c})"),
            CounterOp::Dec(c) => write!(f, "dec(#{c})"),
            CounterOp::Noop => write!(f, "nop"),
        }
    }
}
