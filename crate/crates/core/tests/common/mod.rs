//! Random machine generators and explicit-state oracles shared by the
//! property suites and the acceptance run.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};

use bwsts::counter::{CounterConfig, CounterMachine, CounterOp, CounterTransition, RunOutcome};
use bwsts::fifo::{Action, FifoConfig, FifoMachine, FifoTransition};
use bwsts::ordering::{counter_state_leq, Alphabet, Word};
use bwsts::{Olts, QuasiOrder};
use rand::Rng;

pub fn random_counter_machine(rng: &mut impl Rng, zero_test_prob: f64) -> CounterMachine {
    let controls = rng.gen_range(1..=4);
    let counters = rng.gen_range(1..=2);
    let n = rng.gen_range(1..=6);
    let transitions = (0..n)
        .map(|_| {
            let c = rng.gen_range(0..counters);
            let op = match rng.gen_range(0..5) {
                0 | 1 => CounterOp::Inc(c),
                2 | 3 => CounterOp::Dec(c),
                _ => CounterOp::Noop,
            };
            let zero_tests = (0..counters).filter(|_| rng.gen_bool(zero_test_prob)).collect();
            CounterTransition {
                source: rng.gen_range(0..controls),
                op,
                zero_tests,
                target: rng.gen_range(0..controls),
            }
        })
        .collect();
    CounterMachine::new(
        "random",
        (0..controls).map(|i| format!("q{i}")).collect(),
        (0..counters).map(|i| format!("c{i}")).collect(),
        transitions,
        0,
    )
    .expect("generated machine is valid")
}

pub fn random_monotone_machine(rng: &mut impl Rng) -> CounterMachine {
    random_counter_machine(rng, 0.0)
}

/// CMRZ machine with at least one zero test, by rejection.
pub fn random_cmrz_machine(rng: &mut impl Rng) -> CounterMachine {
    loop {
        let m = random_counter_machine(rng, 0.3);
        if m.has_zero_tests() && m.is_cmrz().is_cmrz {
            return m;
        }
    }
}

pub fn random_config(rng: &mut impl Rng, m: &CounterMachine, max: u64) -> CounterConfig {
    CounterConfig::new(
        rng.gen_range(0..m.controls.len()),
        (0..m.dim()).map(|_| rng.gen_range(0..=max)).collect::<Vec<_>>(),
    )
}

/// Breadth-first search over configurations whose counters stay `<= cap`.
/// `Some(true)` when a state above `y` is found, `Some(false)` when the
/// search completed without ever dropping a state over the cap.
pub fn capped_cover_oracle(m: &CounterMachine, x0: &CounterConfig, y: &CounterConfig, cap: u64) -> Option<bool> {
    let mut seen = HashSet::from([x0.clone()]);
    let mut queue = VecDeque::from([x0.clone()]);
    let mut truncated = false;
    while let Some(x) = queue.pop_front() {
        if counter_state_leq(y, &x).unwrap() {
            return Some(true);
        }
        for (_, z) in m.post(&x) {
            if z.valuation.as_slice().iter().any(|&v| v > cap) {
                truncated = true;
                continue;
            }
            if seen.insert(z.clone()) {
                queue.push_back(z);
            }
        }
    }
    if truncated {
        None
    } else {
        Some(false)
    }
}

/// Explicit reachability graph from `x0`, stopped after `limit` states.
pub struct Explored {
    pub states: Vec<CounterConfig>,
    pub edges: Vec<Vec<usize>>,
    pub complete: bool,
}

pub fn explore(m: &CounterMachine, x0: &CounterConfig, limit: usize) -> Explored {
    let mut index = HashMap::from([(x0.clone(), 0usize)]);
    let mut states = vec![x0.clone()];
    let mut edges: Vec<Vec<usize>> = vec![Vec::new()];
    let mut i = 0;
    while i < states.len() {
        if states.len() > limit {
            return Explored {
                states,
                edges,
                complete: false,
            };
        }
        let x = states[i].clone();
        for (_, z) in m.post(&x) {
            let id = *index.entry(z.clone()).or_insert_with(|| {
                states.push(z);
                edges.push(Vec::new());
                states.len() - 1
            });
            edges[i].push(id);
        }
        i += 1;
    }
    Explored {
        states,
        edges,
        complete: true,
    }
}

pub fn has_cycle(edges: &[Vec<usize>], limit_to: usize) -> bool {
    // iterative three-colour DFS over the first `limit_to` nodes
    let mut colour = vec![0u8; edges.len()];
    for s in 0..limit_to {
        if colour[s] != 0 {
            continue;
        }
        let mut stack = vec![(s, 0usize)];
        colour[s] = 1;
        while let Some(&mut (v, ref mut k)) = stack.last_mut() {
            if *k < edges[v].len() {
                let w = edges[v][*k];
                *k += 1;
                if w >= limit_to {
                    continue;
                }
                match colour[w] {
                    0 => {
                        colour[w] = 1;
                        stack.push((w, 0));
                    }
                    1 => return true,
                    _ => {}
                }
            } else {
                colour[v] = 2;
                stack.pop();
            }
        }
    }
    false
}

/// Bounded iff the explicit search completes within `limit` states.
pub fn bounded_oracle(m: &CounterMachine, x0: &CounterConfig, limit: usize) -> bool {
    explore(m, x0, limit).complete
}

/// Terminating iff the complete reachability graph is acyclic. A cycle in
/// the explored part proves non-termination; a search that outgrows `limit`
/// is read as an infinite, finitely branching graph, hence non-terminating.
pub fn terminating_oracle(m: &CounterMachine, x0: &CounterConfig, limit: usize) -> bool {
    let e = explore(m, x0, limit);
    let expanded = if e.complete { e.states.len() } else { limit };
    !(has_cycle(&e.edges, expanded) || !e.complete)
}

/// Replays `sigma` `iterations` times; `false` as soon as a pass gets stuck.
pub fn replay_counter(
    m: &CounterMachine,
    x: &CounterConfig,
    sigma: &[usize],
    iterations: usize,
) -> Option<Vec<CounterConfig>> {
    let mut cur = x.clone();
    let mut out = Vec::new();
    for _ in 0..iterations {
        match m.run(&cur, sigma).ok()? {
            RunOutcome::Completed(y) => {
                out.push(y.clone());
                cur = y;
            }
            RunOutcome::Stuck { .. } => return None,
        }
    }
    Some(out)
}

pub fn replay_fifo(m: &FifoMachine, x: &FifoConfig, sigma: &[usize], iterations: usize) -> Option<Vec<FifoConfig>> {
    let mut cur = x.clone();
    let mut out = Vec::new();
    for _ in 0..iterations {
        match m.run(&cur, sigma).ok()? {
            RunOutcome::Completed(y) => {
                out.push(y.clone());
                cur = y;
            }
            RunOutcome::Stuck { .. } => return None,
        }
    }
    Some(out)
}

/// One-control, one-channel machine over `{a,b}` with every send and
/// receive as a self-loop, plus a random loop `sigma` and initial content.
pub fn random_loop_instance(rng: &mut impl Rng) -> (FifoMachine, FifoConfig, Vec<usize>) {
    let alphabet = Alphabet::from_names(["a", "b"]);
    let letters: Vec<_> = alphabet.symbols().collect();
    let mut transitions = Vec::new();
    for &l in &letters {
        transitions.push(FifoTransition {
            source: 0,
            action: Action::send(0, l),
            target: 0,
        });
        transitions.push(FifoTransition {
            source: 0,
            action: Action::recv(0, l),
            target: 0,
        });
    }
    let m =
        FifoMachine::new("loop", vec!["q".into()], vec!["c".into()], alphabet, transitions, 0).expect("valid machine");
    if rng.gen_bool(0.5) {
        // periodic instance: content in z^*, sends z^k, receives z^j
        let z: Vec<usize> = (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(0..2)).collect();
        let w: Vec<_> = (0..rng.gen_range(0..=2))
            .flat_map(|_| z.iter().map(|&i| letters[i]))
            .collect();
        let k = rng.gen_range(1..=2);
        let j = rng.gen_range(0..=k + 1);
        let mut sigma: Vec<usize> = (0..k).flat_map(|_| z.iter().map(|&i| 2 * i)).collect();
        let recvs: Vec<usize> = (0..j).flat_map(|_| z.iter().map(|&i| 2 * i + 1)).collect();
        if rng.gen_bool(0.5) {
            sigma.extend(recvs);
        } else {
            sigma.splice(0..0, recvs);
        }
        return (m, FifoConfig::new(0, vec![Word::from_symbols(w)]), sigma);
    }
    let w_len = rng.gen_range(0..=4);
    let w: Vec<_> = (0..w_len).map(|_| letters[rng.gen_range(0..2)]).collect();
    let sigma_len = rng.gen_range(1..=6);
    let sigma = (0..sigma_len).map(|_| rng.gen_range(0..4)).collect();
    (m, FifoConfig::new(0, vec![Word::from_symbols(w)]), sigma)
}

/// Every run of length `<= depth` from the initial state, as label sequences
/// with their visited states.
pub type Run<S> = (Vec<<S as Olts>::Label>, Vec<<S as Olts>::State>);

pub fn runs<S: Olts>(sys: &S, depth: usize) -> Vec<Run<S>> {
    let mut out = Vec::new();
    let mut layer = vec![(Vec::new(), vec![sys.initial().clone()])];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (labels, states) in &layer {
            for (l, y) in sys.post(states.last().unwrap()) {
                let mut l2: Vec<S::Label> = labels.clone();
                l2.push(l);
                let mut s2: Vec<S::State> = states.clone();
                s2.push(y);
                next.push((l2, s2));
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// For every increasing pair along every run, the segment replays from the
/// larger state to an even larger one, up to five times. Returns the number
/// of pairs checked.
pub fn check_branch_monotone<S: Olts>(sys: &S, depth: usize, strict: bool) -> Result<usize, String> {
    let o = sys.order();
    let mut pairs = 0;
    for (labels, states) in runs(sys, depth) {
        let j = states.len() - 1;
        for i in 0..j {
            if !o.leq(&states[i], &states[j]) {
                continue;
            }
            pairs += 1;
            let sigma = &labels[i..j];
            let mut prev = states[j].clone();
            for _ in 0..5 {
                let next = sys
                    .replay(&prev, sigma)
                    .map_err(|(k, at)| format!("replay of {sigma:?} stuck at {k} from {at:?}"))?;
                let grows = o.leq(&prev, &next) && o.leq(&states[i], &next);
                let strict_ok = !(strict && o.strictly_less(&states[i], &states[j])) || o.strictly_less(&prev, &next);
                if !grows || !strict_ok {
                    return Err(format!("{prev:?} -{sigma:?}-> {next:?} does not grow"));
                }
                prev = next;
            }
        }
    }
    Ok(pairs)
}

/// All quasi-orders on `n` points as `leq[x][y]` tables.
pub fn quasi_orders(n: usize) -> Vec<Vec<Vec<bool>>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|(a, b)| a != b)
        .collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for (k, &(a, b)) in pairs.iter().enumerate() {
            if mask >> k & 1 == 1 {
                leq[a][b] = true;
            }
        }
        let transitive = (0..n).all(|a| (0..n).all(|b| (0..n).all(|c| !(leq[a][b] && leq[b][c]) || leq[a][c])));
        if transitive {
            out.push(leq);
        }
    }
    out
}

/// Every finite system with at most `max_states` states: a quasi-order
/// together with an arbitrary successor relation.
pub type Relation = Vec<Vec<bool>>;

pub fn finite_systems(max_states: usize) -> Vec<(Relation, Vec<Vec<usize>>)> {
    let mut out = Vec::new();
    for n in 1..=max_states {
        for leq in quasi_orders(n) {
            for rel in 0u32..(1 << (n * n)) {
                let succ: Vec<Vec<usize>> = (0..n)
                    .map(|a| (0..n).filter(|b| rel >> (a * n + b) & 1 == 1).collect())
                    .collect();
                out.push((leq.clone(), succ));
            }
        }
    }
    out
}
