//! FIFO machines: semantics, send/receive projections, distinct-letter
//! normalization of bounded input languages, and the product with the
//! automata recognising input-bounded behaviours.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use crate::counter::{RunOutcome, TransitionId};
use crate::error::{Error, Result};
use crate::ordering::{Alphabet, ExtPrefixOrder, Symbol, Word};
use crate::system::Olts;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Send,
    Recv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action {
    pub channel: usize,
    pub dir: Direction,
    pub letter: Symbol,
}

impl Action {
    pub fn send(channel: usize, letter: Symbol) -> Self {
        Action {
            channel,
            dir: Direction::Send,
            letter,
        }
    }

    pub fn recv(channel: usize, letter: Symbol) -> Self {
        Action {
            channel,
            dir: Direction::Recv,
            letter,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FifoTransition {
    pub source: usize,
    pub action: Action,
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FifoMachine {
    pub name: String,
    pub controls: Vec<String>,
    pub channels: Vec<String>,
    pub alphabet: Alphabet,
    pub transitions: Vec<FifoTransition>,
    pub initial_control: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FifoConfig {
    pub control: usize,
    pub contents: Vec<Word>,
}

impl FifoConfig {
    pub fn new(control: usize, contents: Vec<Word>) -> Self {
        FifoConfig { control, contents }
    }

    pub fn empty(control: usize, channels: usize) -> Self {
        FifoConfig {
            control,
            contents: vec![Word::empty(); channels],
        }
    }
}

impl FifoMachine {
    pub fn new(
        name: impl Into<String>,
        controls: Vec<String>,
        channels: Vec<String>,
        alphabet: Alphabet,
        transitions: Vec<FifoTransition>,
        initial_control: usize,
    ) -> Result<Self> {
        let m = FifoMachine {
            name: name.into(),
            controls,
            channels,
            alphabet,
            transitions,
            initial_control,
        };
        if m.initial_control >= m.controls.len() {
            return Err(Error::InvalidMachine("initial control state out of range".into()));
        }
        for (i, t) in m.transitions.iter().enumerate() {
            if t.source >= m.controls.len() || t.target >= m.controls.len() {
                return Err(Error::InvalidMachine(format!(
                    "transition {i} references an unknown control state"
                )));
            }
            if t.action.channel >= m.channels.len() {
                return Err(Error::InvalidMachine(format!(
                    "transition {i} references an unknown channel"
                )));
            }
            if !m.alphabet.contains(t.action.letter) {
                return Err(Error::InvalidMachine(format!(
                    "transition {i} uses a letter outside the alphabet"
                )));
            }
        }
        Ok(m)
    }

    pub fn control_id(&self, name: &str) -> Option<usize> {
        self.controls.iter().position(|c| c == name)
    }

    pub fn channel_id(&self, name: &str) -> Option<usize> {
        self.channels.iter().position(|c| c == name)
    }

    pub fn initial_config(&self) -> FifoConfig {
        FifoConfig::empty(self.initial_control, self.channels.len())
    }

    /// Config with the given control and a single channel holding `word`
    /// (letters parsed with [`Alphabet::parse_word`]). Convenience for the
    /// common one-channel case.
    pub fn config(&self, control: &str, words: &[&str]) -> Option<FifoConfig> {
        let q = self.control_id(control)?;
        let contents = words
            .iter()
            .map(|w| self.alphabet.parse_word(w).map(Word::from_symbols))
            .collect::<Option<Vec<_>>>()?;
        if contents.len() != self.channels.len() {
            return None;
        }
        Some(FifoConfig::new(q, contents))
    }

    /// First transition leaving `source` with the given action.
    pub fn find_transition(&self, source: usize, action: Action) -> Option<TransitionId> {
        self.transitions
            .iter()
            .position(|t| t.source == source && t.action == action)
    }

    /// Resolves textual actions such as `!a`, `?b` or `c!a` into transition
    /// identities, following the control flow from `from`.
    pub fn resolve_actions(&self, from: usize, actions: &[&str]) -> Option<Vec<TransitionId>> {
        let mut q = from;
        let mut out = Vec::with_capacity(actions.len());
        for a in actions {
            let action = self.parse_action(a)?;
            let t = self.find_transition(q, action)?;
            out.push(t);
            q = self.transitions[t].target;
        }
        Some(out)
    }

    pub fn parse_action(&self, text: &str) -> Option<Action> {
        let pos = text.find(['!', '?'])?;
        let (chan, rest) = text.split_at(pos);
        let channel = if chan.is_empty() {
            if self.channels.len() != 1 {
                return None;
            }
            0
        } else {
            self.channel_id(chan)?
        };
        let letter = self.alphabet.lookup(&rest[1..])?;
        Some(if rest.starts_with('!') {
            Action::send(channel, letter)
        } else {
            Action::recv(channel, letter)
        })
    }

    fn fire(&self, x: &FifoConfig, t: &FifoTransition) -> Option<FifoConfig> {
        if t.source != x.control {
            return None;
        }
        let c = t.action.channel;
        let mut contents = x.contents.clone();
        match t.action.dir {
            Direction::Send => contents[c] = contents[c].appended(t.action.letter),
            Direction::Recv => {
                if contents[c].head() != Some(t.action.letter) {
                    return None;
                }
                contents[c] = contents[c].tail()?;
            }
        }
        Some(FifoConfig::new(t.target, contents))
    }

    pub fn step(&self, x: &FifoConfig, t: TransitionId) -> Result<Option<FifoConfig>> {
        let tr = self.transitions.get(t).ok_or(Error::UnknownTransition(t))?;
        if x.contents.len() != self.channels.len() {
            return Err(Error::SignatureMismatch(format!(
                "expected {} channels, found {}",
                self.channels.len(),
                x.contents.len()
            )));
        }
        if tr.source != x.control {
            return Err(Error::WrongSource { transition: t });
        }
        Ok(self.fire(x, tr))
    }

    pub fn post(&self, x: &FifoConfig) -> Vec<(TransitionId, FifoConfig)> {
        self.transitions
            .iter()
            .enumerate()
            .filter_map(|(i, t)| self.fire(x, t).map(|y| (i, y)))
            .collect()
    }

    pub fn run(&self, x0: &FifoConfig, labels: &[TransitionId]) -> Result<RunOutcome<FifoConfig>> {
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

    pub fn actions_of(&self, sigma: &[TransitionId]) -> Vec<Action> {
        sigma.iter().map(|&t| self.transitions[t].action).collect()
    }

    pub fn show_action(&self, a: &Action) -> String {
        let chan = if self.channels.len() == 1 {
            ""
        } else {
            self.channels[a.channel].as_str()
        };
        let dir = match a.dir {
            Direction::Send => '!',
            Direction::Recv => '?',
        };
        format!("{chan}{dir}{}", self.alphabet.name(a.letter))
    }

    pub fn show_transition(&self, t: TransitionId) -> String {
        let tr = &self.transitions[t];
        let dir = match tr.action.dir {
            Direction::Send => '!',
            Direction::Recv => '?',
        };
        format!(
            "{} -- {}{}{} --> {}",
            self.controls[tr.source],
            self.channels[tr.action.channel],
            dir,
            self.alphabet.name(tr.action.letter),
            self.controls[tr.target]
        )
    }

    pub fn show_config(&self, x: &FifoConfig) -> String {
        let words: Vec<String> = x
            .contents
            .iter()
            .map(|w| format!("\"{}\"", self.alphabet.render(w.as_slice())))
            .collect();
        format!("({},{})", self.controls[x.control], words.join(","))
    }
}

/// Letters sent on `channel` along the action sequence.
pub fn send_proj(actions: &[Action], channel: usize) -> Vec<Symbol> {
    actions
        .iter()
        .filter(|a| a.channel == channel && a.dir == Direction::Send)
        .map(|a| a.letter)
        .collect()
}

/// Letters received from `channel` along the action sequence.
pub fn recv_proj(actions: &[Action], channel: usize) -> Vec<Symbol> {
    actions
        .iter()
        .filter(|a| a.channel == channel && a.dir == Direction::Recv)
        .map(|a| a.letter)
        .collect()
}

/// A bounded language `w_1^* ... w_n^*` for one channel.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoundedLang {
    pub words: Vec<Vec<Symbol>>,
}

impl BoundedLang {
    pub fn new(words: Vec<Vec<Symbol>>) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::InvalidBoundedLang("at least one word is required".into()));
        }
        if words.iter().any(|w| w.is_empty()) {
            return Err(Error::InvalidBoundedLang("words must be non-empty".into()));
        }
        Ok(BoundedLang { words })
    }

    /// Every letter occurs exactly once across `w_1 ... w_n`.
    pub fn is_distinct_letter(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.words.iter().flatten().all(|s| seen.insert(*s))
    }

    pub fn letters(&self) -> Vec<Symbol> {
        let mut v: Vec<Symbol> = self.words.iter().flatten().copied().collect();
        v.sort();
        v.dedup();
        v
    }

    /// Positions `(block, offset)` reachable after reading `word`; offset 0
    /// means a block boundary.
    fn positions_after(&self, word: &[Symbol]) -> Vec<(usize, usize)> {
        let mut cur = vec![(0usize, 0usize)];
        for &a in word {
            let mut next = Vec::new();
            for &(i, j) in &cur {
                for p in self.advance(i, j, a) {
                    if !next.contains(&p) {
                        next.push(p);
                    }
                }
            }
            if next.is_empty() {
                return next;
            }
            cur = next;
        }
        cur
    }

    fn advance(&self, i: usize, j: usize, a: Symbol) -> Vec<(usize, usize)> {
        if j > 0 {
            let w = &self.words[i];
            if w[j] == a {
                vec![(i, (j + 1) % w.len())]
            } else {
                Vec::new()
            }
        } else {
            (i..self.words.len())
                .filter(|&k| self.words[k][0] == a)
                .map(|k| (k, 1 % self.words[k].len()))
                .collect()
        }
    }

    pub fn contains(&self, word: &[Symbol]) -> bool {
        word.is_empty() || self.positions_after(word).iter().any(|&(_, j)| j == 0)
    }

    pub fn contains_prefix(&self, word: &[Symbol]) -> bool {
        word.is_empty() || !self.positions_after(word).is_empty()
    }
}

/// Result of [`normalize_distinct_letter`].
#[derive(Clone, Debug)]
pub struct Normalized {
    pub machine: FifoMachine,
    pub langs: Vec<BoundedLang>,
    /// Original letter of every letter of the normalized alphabet.
    pub letter_map: Vec<Symbol>,
    /// Original transition of every normalized transition.
    pub transition_origin: Vec<TransitionId>,
    pub identity: bool,
}

impl Normalized {
    pub fn original_letter(&self, s: Symbol) -> Symbol {
        self.letter_map[s.0 as usize]
    }
}

/// Renames letters so that every channel language becomes distinct-letter.
///
/// Each occurrence of a letter `a` in block `i` at offset `j` of a
/// non-distinct-letter language becomes a fresh letter `a_i_j` (blocks
/// numbered from 1). Every send or receive of `a` on that channel is split
/// into one transition per occurrence; sends and receives of letters that do
/// not occur in the channel language are dropped, since no input-bounded run
/// can use them.
pub fn normalize_distinct_letter(machine: &FifoMachine, langs: &[BoundedLang]) -> Result<Normalized> {
    if langs.len() != machine.channels.len() {
        return Err(Error::InvalidBoundedLang(format!(
            "{} channel languages for {} channels",
            langs.len(),
            machine.channels.len()
        )));
    }
    for l in langs {
        if l.words.is_empty() || l.words.iter().any(|w| w.is_empty()) {
            return Err(Error::InvalidBoundedLang("words must be non-empty".into()));
        }
        if l.words.iter().flatten().any(|s| !machine.alphabet.contains(*s)) {
            return Err(Error::InvalidBoundedLang("letter outside the machine alphabet".into()));
        }
    }
    if langs.iter().all(BoundedLang::is_distinct_letter) {
        return Ok(Normalized {
            machine: machine.clone(),
            langs: langs.to_vec(),
            letter_map: machine.alphabet.symbols().collect(),
            transition_origin: (0..machine.transitions.len()).collect(),
            identity: true,
        });
    }

    let mut alphabet = Alphabet::new();
    let mut letter_map = Vec::new();
    // per channel: original letter -> annotated letters, in L order
    let mut occurrences: Vec<BTreeMap<Symbol, Vec<Symbol>>> = Vec::new();
    let mut new_langs = Vec::new();
    for l in langs {
        let distinct = l.is_distinct_letter();
        let mut occ: BTreeMap<Symbol, Vec<Symbol>> = BTreeMap::new();
        let mut words = Vec::new();
        for (i, w) in l.words.iter().enumerate() {
            let mut nw = Vec::new();
            for (j, &a) in w.iter().enumerate() {
                let base = machine.alphabet.name(a);
                let name = if distinct {
                    base.to_string()
                } else {
                    format!("{base}_{}_{j}", i + 1)
                };
                let before = alphabet.len();
                let s = alphabet.intern(&name);
                if alphabet.len() > before {
                    letter_map.push(a);
                }
                occ.entry(a).or_default().push(s);
                nw.push(s);
            }
            words.push(nw);
        }
        occurrences.push(occ);
        new_langs.push(BoundedLang { words });
    }

    let mut transitions = Vec::new();
    let mut origin = Vec::new();
    for (ti, t) in machine.transitions.iter().enumerate() {
        let c = t.action.channel;
        if let Some(annotated) = occurrences[c].get(&t.action.letter) {
            for &s in annotated {
                transitions.push(FifoTransition {
                    source: t.source,
                    action: Action { letter: s, ..t.action },
                    target: t.target,
                });
                origin.push(ti);
            }
        }
    }
    let normalized = FifoMachine::new(
        machine.name.clone(),
        machine.controls.clone(),
        machine.channels.clone(),
        alphabet,
        transitions,
        machine.initial_control,
    )?;
    Ok(Normalized {
        machine: normalized,
        langs: new_langs,
        letter_map,
        transition_origin: origin,
        identity: false,
    })
}

/// Deterministic automaton over machine actions. Missing entries of `delta`
/// reject.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    pub states: Vec<String>,
    pub alphabet: Vec<Action>,
    pub delta: HashMap<(usize, Action), usize>,
    pub initial: usize,
    pub accepting: Vec<bool>,
}

impl Dfa {
    pub fn next(&self, state: usize, a: &Action) -> Option<usize> {
        self.delta.get(&(state, *a)).copied()
    }

    pub fn run(&self, actions: &[Action]) -> Option<usize> {
        actions.iter().try_fold(self.initial, |s, a| self.next(s, a))
    }

    pub fn accepts(&self, actions: &[Action]) -> bool {
        self.run(actions).is_some_and(|s| self.accepting[s])
    }
}

/// Position tracker through `w_1^* ... w_n^*` for a distinct-letter language.
fn track(lang: &BoundedLang, (i, j): (usize, usize), a: Symbol) -> Option<(usize, usize)> {
    lang.advance(i, j, a).into_iter().next()
}

fn build_tracker_dfa(langs: &[BoundedLang], tracked: Direction, prefix: &str) -> Result<Dfa> {
    if let Some(c) = langs.iter().position(|l| !l.is_distinct_letter()) {
        return Err(Error::InvalidBoundedLang(format!(
            "language of channel {c} is not distinct-letter"
        )));
    }
    let mut alphabet = Vec::new();
    for (c, l) in langs.iter().enumerate() {
        for a in l.letters() {
            alphabet.push(Action::send(c, a));
        }
        for a in l.letters() {
            alphabet.push(Action::recv(c, a));
        }
    }
    let start: Vec<(usize, usize)> = vec![(0, 0); langs.len()];
    let mut index: HashMap<Vec<(usize, usize)>, usize> = HashMap::from([(start.clone(), 0)]);
    let mut states = vec![start];
    let mut delta = HashMap::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        for a in &alphabet {
            let cur = states[s].clone();
            let next = if a.dir == tracked {
                match track(&langs[a.channel], cur[a.channel], a.letter) {
                    Some(p) => {
                        let mut n = cur;
                        n[a.channel] = p;
                        n
                    }
                    None => continue,
                }
            } else {
                cur
            };
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    let id = states.len();
                    index.insert(next.clone(), id);
                    states.push(next);
                    queue.push_back(id);
                    id
                }
            };
            delta.insert((s, *a), id);
        }
    }
    let accepting = states
        .iter()
        .map(|pos| match tracked {
            Direction::Send => pos.iter().all(|&(_, j)| j == 0),
            Direction::Recv => true,
        })
        .collect();
    Ok(Dfa {
        states: (0..states.len()).map(|i| format!("{prefix}{i}")).collect(),
        alphabet,
        delta,
        initial: 0,
        accepting,
    })
}

/// Automaton accepting the action sequences whose send projection on every
/// channel lies in that channel's language.
pub fn build_send_dfa(langs: &[BoundedLang]) -> Result<Dfa> {
    build_tracker_dfa(langs, Direction::Send, "s")
}

/// Automaton accepting the action sequences whose receive projection on
/// every channel is a prefix of a word of that channel's language.
pub fn build_recv_dfa(langs: &[BoundedLang]) -> Result<Dfa> {
    build_tracker_dfa(langs, Direction::Recv, "r")
}

/// Product of a FIFO machine with the send and receive automata.
#[derive(Clone, Debug)]
pub struct ProductMachine {
    pub machine: FifoMachine,
    /// `(machine control, send state, receive state)` of each product control.
    pub components: Vec<(usize, usize, usize)>,
    /// Machine transition each product transition comes from.
    pub transition_origin: Vec<TransitionId>,
}

pub fn product_machine(machine: &FifoMachine, send: &Dfa, recv: &Dfa, prune: bool) -> Result<ProductMachine> {
    let start = (machine.initial_control, send.initial, recv.initial);
    let mut index: HashMap<(usize, usize, usize), usize> = HashMap::from([(start, 0)]);
    let mut comps = vec![start];
    let mut edges: Vec<(usize, Action, usize, TransitionId)> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(p) = queue.pop_front() {
        let (q, s, r) = comps[p];
        for (ti, t) in machine.transitions.iter().enumerate() {
            if t.source != q {
                continue;
            }
            let (Some(s2), Some(r2)) = (send.next(s, &t.action), recv.next(r, &t.action)) else {
                continue;
            };
            let key = (t.target, s2, r2);
            let id = *index.entry(key).or_insert_with(|| {
                comps.push(key);
                queue.push_back(comps.len() - 1);
                comps.len() - 1
            });
            edges.push((p, t.action, id, ti));
        }
    }

    let keep: Vec<bool> = if prune {
        let accepting = |&(_, s, r): &(usize, usize, usize)| send.accepting[s] && recv.accepting[r];
        let mut alive: Vec<bool> = comps.iter().map(accepting).collect();
        loop {
            let mut changed = false;
            for &(from, _, to, _) in &edges {
                if alive[to] && !alive[from] {
                    alive[from] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        alive[0] = true;
        alive
    } else {
        vec![true; comps.len()]
    };

    let mut renumber = vec![usize::MAX; comps.len()];
    let mut controls = Vec::new();
    let mut components = Vec::new();
    for (i, &(q, s, r)) in comps.iter().enumerate() {
        if keep[i] {
            renumber[i] = controls.len();
            controls.push(format!("{}.{}.{}", machine.controls[q], send.states[s], recv.states[r]));
            components.push((q, s, r));
        }
    }
    let mut transitions = Vec::new();
    let mut origin = Vec::new();
    for &(from, action, to, ti) in &edges {
        if keep[from] && keep[to] {
            transitions.push(FifoTransition {
                source: renumber[from],
                action,
                target: renumber[to],
            });
            origin.push(ti);
        }
    }
    let product = FifoMachine::new(
        format!("{}_product", machine.name),
        controls,
        machine.channels.clone(),
        machine.alphabet.clone(),
        transitions,
        0,
    )?;
    Ok(ProductMachine {
        machine: product,
        components,
        transition_origin: origin,
    })
}

/// Normalizes `machine` for `langs` and builds the product with the send
/// and receive automata of the normalized languages.
pub fn input_bounded_product(
    machine: &FifoMachine,
    langs: &[BoundedLang],
    prune: bool,
) -> Result<(Normalized, ProductMachine)> {
    let normalized = normalize_distinct_letter(machine, langs)?;
    let send = build_send_dfa(&normalized.langs)?;
    let recv = build_recv_dfa(&normalized.langs)?;
    let product = product_machine(&normalized.machine, &send, &recv, prune)?;
    Ok((normalized, product))
}

/// The ordered transition system induced by a FIFO machine under the
/// extended prefix ordering.
#[derive(Clone, Debug)]
pub struct FifoSystem<'m> {
    pub machine: &'m FifoMachine,
    initial: FifoConfig,
    order: ExtPrefixOrder,
}

impl<'m> FifoSystem<'m> {
    pub fn new(machine: &'m FifoMachine, initial: FifoConfig) -> Self {
        FifoSystem {
            machine,
            initial,
            order: ExtPrefixOrder,
        }
    }

    pub fn from_initial_control(machine: &'m FifoMachine) -> Self {
        Self::new(machine, machine.initial_config())
    }
}

impl Olts for FifoSystem<'_> {
    type State = FifoConfig;
    type Label = TransitionId;
    type Order = ExtPrefixOrder;

    fn initial(&self) -> &FifoConfig {
        &self.initial
    }

    fn post(&self, x: &FifoConfig) -> Vec<(TransitionId, FifoConfig)> {
        self.machine.post(x)
    }

    fn step(&self, x: &FifoConfig, label: &TransitionId) -> Option<FifoConfig> {
        self.machine
            .transitions
            .get(*label)
            .and_then(|t| self.machine.fire(x, t))
    }

    fn order(&self) -> &ExtPrefixOrder {
        &self.order
    }

    fn show_state(&self, x: &FifoConfig) -> String {
        self.machine.show_config(x)
    }

    fn show_label(&self, label: &TransitionId) -> String {
        self.machine.show_action(&self.machine.transitions[*label].action)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Send => "!",
            Direction::Recv => "?",
        })
    }
}
