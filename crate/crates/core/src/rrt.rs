//! Reduced reachability trees.
//!
//! A node whose state dominates the state of a strict ancestor is marked dead
//! and not expanded. For branch-wqo, finitely branching systems the tree is
//! finite; construction is nevertheless bounded by a node budget so that
//! arbitrary inputs yield an inconclusive verdict instead of divergence.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::counter::TransitionId;
use crate::error::{Error, Result};
use crate::fifo::{recv_proj, send_proj, FifoConfig, FifoMachine};
use crate::omega::{commute, eventually_periodic_eq};
use crate::ordering::{QuasiOrder, Symbol};
use crate::system::Olts;
use crate::verdict::AnalysisVerdict;

pub type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mark {
    Live,
    Dead,
}

#[derive(Clone, Debug)]
pub struct RrtNode<S, L> {
    pub id: NodeId,
    pub state: S,
    pub parent: Option<NodeId>,
    pub label: Option<L>,
    pub mark: Mark,
    /// Closest-to-root strict ancestor whose state is below this one.
    pub subsumed_by: Option<NodeId>,
    /// Set only in labelled trees.
    pub iterable: bool,
    /// State reached by replaying the subsuming segment once more, when that
    /// replay succeeded.
    pub replay_state: Option<S>,
    pub depth: usize,
    pub children: Vec<NodeId>,
    pub expanded: bool,
}

#[derive(Clone, Debug)]
pub struct Rrt<S, L> {
    pub nodes: Vec<RrtNode<S, L>>,
    pub budget: usize,
    pub budget_exhausted: bool,
    pub labelled: bool,
}

/// Pair of tree nodes `(ancestor, node)` witnessing a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodePair {
    pub ancestor: NodeId,
    pub node: NodeId,
}

impl<S, L: Clone> Rrt<S, L> {
    pub fn root(&self) -> &RrtNode<S, L> {
        &self.nodes[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &RrtNode<S, L> {
        &self.nodes[id]
    }

    /// Strict ancestors of `id`, root first.
    pub fn ancestors(&self, id: NodeId) -> Vec<NodeId> {
        let mut v = Vec::new();
        let mut cur = self.nodes[id].parent;
        while let Some(p) = cur {
            v.push(p);
            cur = self.nodes[p].parent;
        }
        v.reverse();
        v
    }

    /// Labels along the path from the root to `id`.
    pub fn path_labels(&self, id: NodeId) -> Vec<L> {
        let mut v = Vec::new();
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            v.push(self.nodes[cur].label.clone().expect("non-root node has a label"));
            cur = p;
        }
        v.reverse();
        v
    }

    /// Labels from `ancestor` down to `node`.
    pub fn segment_labels(&self, ancestor: NodeId, node: NodeId) -> Vec<L> {
        let depth = self.nodes[ancestor].depth;
        self.path_labels(node).split_off(depth)
    }

    pub fn subsumed_nodes(&self) -> impl Iterator<Item = &RrtNode<S, L>> {
        self.nodes.iter().filter(|n| n.subsumed_by.is_some())
    }

    pub fn iterable_nodes(&self) -> impl Iterator<Item = &RrtNode<S, L>> {
        self.nodes.iter().filter(|n| n.iterable)
    }

    /// Whether the tree is a single path.
    pub fn is_path(&self) -> bool {
        self.nodes.iter().all(|n| n.children.len() <= 1)
    }
}

/// Breadth-first construction of the reduced reachability tree.
pub fn build_rrt<S: Olts>(system: &S, budget: usize) -> Result<Rrt<S::State, S::Label>> {
    build(system, budget, false)
}

/// Reduced reachability tree in which every subsumed node is additionally
/// tested for iterability: the label segment from the subsuming ancestor is
/// replayed from the node, and the node is iterable when the replay succeeds
/// and ends in a state at least as large.
pub fn build_lrrt<S: Olts>(system: &S, budget: usize) -> Result<Rrt<S::State, S::Label>> {
    build(system, budget, true)
}

fn build<S: Olts>(system: &S, budget: usize, labelled: bool) -> Result<Rrt<S::State, S::Label>> {
    if budget == 0 {
        return Err(Error::ZeroBudget);
    }
    let order = system.order();
    let mut tree = Rrt {
        nodes: vec![RrtNode {
            id: 0,
            state: system.initial().clone(),
            parent: None,
            label: None,
            mark: Mark::Live,
            subsumed_by: None,
            iterable: false,
            replay_state: None,
            depth: 0,
            children: Vec::new(),
            expanded: false,
        }],
        budget,
        budget_exhausted: false,
        labelled,
    };
    let mut frontier = VecDeque::from([0usize]);
    while let Some(id) = frontier.pop_front() {
        let succ = system.post(&tree.nodes[id].state);
        if succ.is_empty() {
            tree.nodes[id].mark = Mark::Dead;
            tree.nodes[id].expanded = true;
            continue;
        }
        if tree.nodes.len() + succ.len() > budget {
            tree.budget_exhausted = true;
            break;
        }
        tree.nodes[id].expanded = true;
        for (label, state) in succ {
            let child = tree.nodes.len();
            let mut ancestors = tree.ancestors(id);
            ancestors.push(id);
            let subsumed_by = ancestors.into_iter().find(|&a| order.leq(&tree.nodes[a].state, &state));
            tree.nodes.push(RrtNode {
                id: child,
                state,
                parent: Some(id),
                label: Some(label),
                mark: if subsumed_by.is_some() { Mark::Dead } else { Mark::Live },
                subsumed_by,
                iterable: false,
                replay_state: None,
                depth: tree.nodes[id].depth + 1,
                children: Vec::new(),
                expanded: subsumed_by.is_some(),
            });
            tree.nodes[id].children.push(child);
            match subsumed_by {
                Some(anc) if labelled => {
                    let sigma = tree.segment_labels(anc, child);
                    let node = &tree.nodes[child];
                    if let Ok(next) = system.replay(&node.state, &sigma) {
                        let iterable = order.leq(&node.state, &next);
                        let node = &mut tree.nodes[child];
                        node.iterable = iterable;
                        node.replay_state = Some(next);
                    }
                }
                Some(_) => {}
                None => frontier.push_back(child),
            }
        }
    }
    Ok(tree)
}

/// Unboundedness holds iff some node strictly dominates one of its
/// ancestors, provided the system is strictly branch-monotone and branch-wqo
/// for a partial order. Without the strict branch-monotony assertion the
/// verdict carries a caveat.
pub fn decide_boundedness<S, L, O>(
    rrt: &Rrt<S, L>,
    order: &O,
    strict_monotone_asserted: bool,
) -> Result<AnalysisVerdict<NodePair>>
where
    S: PartialEq + std::fmt::Debug,
    L: Clone,
    O: QuasiOrder<S>,
{
    if !order.is_partial() {
        return Err(Error::NotAntisymmetric("declared quasi-order".into()));
    }
    for n in rrt.subsumed_nodes() {
        let anc = &rrt.nodes[n.subsumed_by.expect("subsumed")];
        if order.leq(&n.state, &anc.state) && !order.equal(&n.state, &anc.state) {
            return Err(Error::NotAntisymmetric(format!("{:?} and {:?}", anc.state, n.state)));
        }
    }
    let mut witness = None;
    'outer: for n in &rrt.nodes {
        for a in rrt.ancestors(n.id) {
            if order.strictly_less(&rrt.nodes[a].state, &n.state) {
                witness = Some(NodePair {
                    ancestor: a,
                    node: n.id,
                });
                break 'outer;
            }
        }
    }
    let verdict = match witness {
        Some(w) => AnalysisVerdict::positive(w, rrt.len(), rrt.budget),
        None if rrt.budget_exhausted => AnalysisVerdict::inconclusive(rrt.len(), rrt.budget),
        None => AnalysisVerdict::negative(None, rrt.len(), rrt.budget),
    };
    Ok(if strict_monotone_asserted || verdict.is_inconclusive() {
        verdict
    } else {
        verdict.with_caveat("strict branch-monotony not asserted")
    })
}

/// Non-termination holds iff the tree has a subsumed node (for branch-WSTS).
pub fn decide_nontermination<S, L: Clone>(rrt: &Rrt<S, L>) -> AnalysisVerdict<NodePair> {
    match rrt.subsumed_nodes().next() {
        Some(n) => AnalysisVerdict::positive(
            NodePair {
                ancestor: n.subsumed_by.expect("subsumed"),
                node: n.id,
            },
            rrt.len(),
            rrt.budget,
        ),
        None if rrt.budget_exhausted => AnalysisVerdict::inconclusive(rrt.len(), rrt.budget),
        None => AnalysisVerdict::negative(None, rrt.len(), rrt.budget),
    }
}

/// An iterable node certifies non-termination. The condition is only
/// sufficient: without one the answer is inconclusive, never negative.
pub fn decide_nonterm_by_iterable<S, L: Clone>(lrrt: &Rrt<S, L>) -> AnalysisVerdict<NodePair> {
    match lrrt.iterable_nodes().next() {
        Some(n) => AnalysisVerdict::positive(
            NodePair {
                ancestor: n.subsumed_by.expect("iterable nodes are subsumed"),
                node: n.id,
            },
            lrrt.len(),
            lrrt.budget,
        ),
        None => {
            let v = AnalysisVerdict::inconclusive(lrrt.len(), lrrt.budget);
            if lrrt.budget_exhausted {
                v
            } else {
                v.with_caveat("no iterable node; the iterable-node condition is only sufficient")
            }
        }
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering. Nodes are named `n0, n1, ...` in BFS order; dead
/// nodes are filled grey, subsumption is a dashed edge back to the
/// subsuming ancestor, iterable nodes get a double border.
pub fn export_dot<S: Olts>(rrt: &Rrt<S::State, S::Label>, system: &S) -> String {
    let mut out = String::new();
    out.push_str("digraph rrt {\n  node [shape=box, fontname=\"monospace\"];\n");
    for n in &rrt.nodes {
        let mut attrs = vec![format!("label=\"{}\"", dot_escape(&system.show_state(&n.state)))];
        if n.mark == Mark::Dead {
            attrs.push("style=filled".into());
            attrs.push("fillcolor=lightgrey".into());
        }
        if n.iterable {
            attrs.push("peripheries=2".into());
        }
        let _ = writeln!(out, "  n{} [{}];", n.id, attrs.join(", "));
    }
    for n in &rrt.nodes {
        if let (Some(p), Some(l)) = (n.parent, &n.label) {
            let _ = writeln!(
                out,
                "  n{} -> n{} [label=\"{}\"];",
                p,
                n.id,
                dot_escape(&system.show_label(l))
            );
        }
    }
    for n in &rrt.nodes {
        if let Some(a) = n.subsumed_by {
            let _ = writeln!(out, "  n{} -> n{} [style=dashed, constraint=false];", n.id, a);
        }
    }
    out.push_str("}\n");
    out
}

/// Decides whether the loop `sigma` can be iterated forever from `x`: for
/// every channel either nothing is received, or the loop is fireable, does
/// not shrink the channel, and `content · send^ω = recv^ω`.
pub fn check_fifo_infinite_iterability(machine: &FifoMachine, x: &FifoConfig, sigma: &[TransitionId]) -> bool {
    if sigma.iter().any(|&t| t >= machine.transitions.len()) {
        return false;
    }
    let end = match machine.run(x, sigma) {
        Ok(crate::counter::RunOutcome::Completed(y)) => y,
        _ => return false,
    };
    if end.control != x.control {
        return false;
    }
    let actions = machine.actions_of(sigma);
    (0..machine.channels.len()).all(|c| {
        let recv = recv_proj(&actions, c);
        if recv.is_empty() {
            return true;
        }
        let send = send_proj(&actions, c);
        recv.len() <= send.len() && eventually_periodic_eq(x.contents[c].as_slice(), &send, &[], &recv)
    })
}

/// Per-channel instance of the word equations satisfied by a loop
/// `(q,u) -σ-> (q,u·v) -σ-> (q,u·v·w)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopEquations {
    pub u: Vec<Symbol>,
    pub v: Vec<Symbol>,
    pub w: Vec<Symbol>,
    pub send: Vec<Symbol>,
    pub recv: Vec<Symbol>,
}

fn cat(parts: &[&[Symbol]]) -> Vec<Symbol> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

impl LoopEquations {
    /// `u·send = recv·u·v`
    pub fn first_pass(&self) -> bool {
        cat(&[&self.u, &self.send]) == cat(&[&self.recv, &self.u, &self.v])
    }

    /// `u·v·send = recv·u·v·w`
    pub fn second_pass(&self) -> bool {
        cat(&[&self.u, &self.v, &self.send]) == cat(&[&self.recv, &self.u, &self.v, &self.w])
    }

    /// `v·send = send·w`
    pub fn shift(&self) -> bool {
        cat(&[&self.v, &self.send]) == cat(&[&self.send, &self.w])
    }

    /// `|send| = |recv| + |v| = |recv| + |w|`
    pub fn lengths(&self) -> bool {
        self.send.len() == self.recv.len() + self.v.len() && self.send.len() == self.recv.len() + self.w.len()
    }

    /// `v = w` and `v·send = send·v`.
    pub fn commutation(&self) -> bool {
        self.v == self.w && commute(&self.v, &self.send)
    }

    pub fn all_hold(&self) -> bool {
        self.first_pass() && self.second_pass() && self.shift() && self.lengths() && self.commutation()
    }
}

/// Runs `sigma` twice from `x`. When both passes succeed and each grows the
/// channel contents by a suffix, returns the per-channel equation data.
pub fn loop_equations(machine: &FifoMachine, x: &FifoConfig, sigma: &[TransitionId]) -> Option<Vec<LoopEquations>> {
    use crate::counter::RunOutcome::Completed;
    let Ok(Completed(x1)) = machine.run(x, sigma) else {
        return None;
    };
    let Ok(Completed(x2)) = machine.run(&x1, sigma) else {
        return None;
    };
    if x1.control != x.control || x2.control != x.control {
        return None;
    }
    let actions = machine.actions_of(sigma);
    let mut out = Vec::new();
    for c in 0..machine.channels.len() {
        let u = x.contents[c].as_slice();
        let uv = x1.contents[c].as_slice();
        let uvw = x2.contents[c].as_slice();
        if !uv.starts_with(u) || !uvw.starts_with(uv) {
            return None;
        }
        out.push(LoopEquations {
            u: u.to_vec(),
            v: uv[u.len()..].to_vec(),
            w: uvw[uv.len()..].to_vec(),
            send: send_proj(&actions, c),
            recv: recv_proj(&actions, c),
        });
    }
    Some(out)
}
