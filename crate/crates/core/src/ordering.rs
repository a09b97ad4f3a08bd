//! Quasi-orderings on machine states and words.
//!
//! An order is a value implementing [`QuasiOrder`]; `strictly_less` is always
//! derived from `leq`, so the two can never disagree.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::counter::CounterConfig;
use crate::error::{Error, Result};
use crate::fifo::FifoConfig;
use crate::system::Olts;

/// A vector of naturals with component-wise (Dickson) ordering.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NatVec(pub Vec<u64>);

impl NatVec {
    pub fn zeros(dim: usize) -> Self {
        NatVec(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, i: usize) -> u64 {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }
}

impl From<Vec<u64>> for NatVec {
    fn from(v: Vec<u64>) -> Self {
        NatVec(v)
    }
}

impl fmt::Display for NatVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

pub fn nat_vec_leq(u: &NatVec, v: &NatVec) -> Result<bool> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: v.dim(),
        });
    }
    Ok(u.0.iter().zip(&v.0).all(|(a, b)| a <= b))
}

/// Interned letter of a message alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(pub u32);

/// Symbol table for a finite alphabet.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut a = Alphabet::new();
        for n in names {
            a.intern(&n.into());
        }
        a
    }

    pub fn intern(&mut self, name: &str) -> Symbol {
        if let Some(s) = self.lookup(name) {
            return s;
        }
        self.names.push(name.to_string());
        Symbol((self.names.len() - 1) as u32)
    }

    pub fn lookup(&self, name: &str) -> Option<Symbol> {
        self.names.iter().position(|n| n == name).map(|i| Symbol(i as u32))
    }

    pub fn name(&self, s: Symbol) -> &str {
        &self.names[s.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains(&self, s: Symbol) -> bool {
        (s.0 as usize) < self.names.len()
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.names.len() as u32).map(Symbol)
    }

    /// Letters are written back to back when every name is one character long,
    /// and separated by dots otherwise.
    pub fn render(&self, letters: &[Symbol]) -> String {
        let single = self.names.iter().all(|n| n.chars().count() == 1);
        let sep = if single { "" } else { "." };
        letters.iter().map(|&s| self.name(s)).collect::<Vec<_>>().join(sep)
    }

    /// Inverse of [`Alphabet::render`]. Returns `None` on an unknown letter.
    pub fn parse_word(&self, text: &str) -> Option<Vec<Symbol>> {
        if text.is_empty() {
            return Some(Vec::new());
        }
        if text.contains('.') || text.contains(char::is_whitespace) {
            return text
                .split(|c: char| c == '.' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| self.lookup(t))
                .collect();
        }
        let per_char: Option<Vec<Symbol>> = text.chars().map(|c| self.lookup(&c.to_string())).collect();
        per_char.or_else(|| self.lookup(text).map(|s| vec![s]))
    }
}

/// Immutable finite word. Consuming the head shares the backing buffer.
#[derive(Clone)]
pub struct Word {
    buf: Arc<[Symbol]>,
    start: usize,
}

impl Word {
    pub fn empty() -> Self {
        Word {
            buf: Arc::from(Vec::new()),
            start: 0,
        }
    }

    pub fn from_symbols(letters: Vec<Symbol>) -> Self {
        Word {
            buf: Arc::from(letters),
            start: 0,
        }
    }

    pub fn as_slice(&self) -> &[Symbol] {
        &self.buf[self.start..]
    }

    pub fn len(&self) -> usize {
        self.buf.len() - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn head(&self) -> Option<Symbol> {
        self.as_slice().first().copied()
    }

    /// Word without its first letter.
    pub fn tail(&self) -> Option<Word> {
        if self.is_empty() {
            None
        } else {
            Some(Word {
                buf: Arc::clone(&self.buf),
                start: self.start + 1,
            })
        }
    }

    pub fn appended(&self, letter: Symbol) -> Word {
        let mut v = Vec::with_capacity(self.len() + 1);
        v.extend_from_slice(self.as_slice());
        v.push(letter);
        Word::from_symbols(v)
    }
}

impl PartialEq for Word {
    fn eq(&self, other: &Self) -> bool {
        self.as_slice() == other.as_slice()
    }
}

impl Eq for Word {}

impl Hash for Word {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.as_slice().hash(state)
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.as_slice().cmp(other.as_slice())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice().iter().map(|s| s.0)).finish()
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Word::from_symbols(v)
    }
}

pub fn prefix_leq(u: &[Symbol], w: &[Symbol]) -> bool {
    w.starts_with(u)
}

pub fn ext_prefix_leq(x: &FifoConfig, y: &FifoConfig) -> Result<bool> {
    if x.contents.len() != y.contents.len() {
        return Err(Error::SignatureMismatch(format!(
            "{} channels vs {} channels",
            x.contents.len(),
            y.contents.len()
        )));
    }
    Ok(x.control == y.control
        && x.contents
            .iter()
            .zip(&y.contents)
            .all(|(u, w)| prefix_leq(u.as_slice(), w.as_slice())))
}

pub fn counter_state_leq(x: &CounterConfig, y: &CounterConfig) -> Result<bool> {
    if x.valuation.dim() != y.valuation.dim() {
        return Err(Error::SignatureMismatch(format!(
            "{} counters vs {} counters",
            x.valuation.dim(),
            y.valuation.dim()
        )));
    }
    Ok(x.control == y.control && nat_vec_leq(&x.valuation, &y.valuation)?)
}

/// A decidable quasi-ordering on `T`.
pub trait QuasiOrder<T: PartialEq> {
    fn leq(&self, x: &T, y: &T) -> bool;

    fn strictly_less(&self, x: &T, y: &T) -> bool {
        self.leq(x, y) && !self.leq(y, x)
    }

    /// State equality bundled with the order.
    fn equal(&self, x: &T, y: &T) -> bool {
        x == y
    }

    /// Whether the order is antisymmetric.
    fn is_partial(&self) -> bool;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Dickson;

impl QuasiOrder<NatVec> for Dickson {
    fn leq(&self, x: &NatVec, y: &NatVec) -> bool {
        nat_vec_leq(x, y).unwrap_or(false)
    }

    fn is_partial(&self) -> bool {
        true
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PrefixOrder;

impl QuasiOrder<Word> for PrefixOrder {
    fn leq(&self, x: &Word, y: &Word) -> bool {
        prefix_leq(x.as_slice(), y.as_slice())
    }

    fn is_partial(&self) -> bool {
        true
    }
}

/// Same control state and channel-wise prefix.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExtPrefixOrder;

impl QuasiOrder<FifoConfig> for ExtPrefixOrder {
    fn leq(&self, x: &FifoConfig, y: &FifoConfig) -> bool {
        ext_prefix_leq(x, y).unwrap_or(false)
    }

    fn is_partial(&self) -> bool {
        true
    }
}

/// Same control state and component-wise counter ordering.
#[derive(Clone, Copy, Debug, Default)]
pub struct CounterOrder;

impl QuasiOrder<CounterConfig> for CounterOrder {
    fn leq(&self, x: &CounterConfig, y: &CounterConfig) -> bool {
        counter_state_leq(x, y).unwrap_or(false)
    }

    fn is_partial(&self) -> bool {
        true
    }
}

/// Greedy left-to-right antichain among the states visited by `run` from the
/// initial state. A state is kept when it is incomparable with every state
/// kept so far. Fewer than two pairwise-incomparable states yields an empty
/// list.
pub fn find_antichain_on_run<S: Olts>(system: &S, run: &[S::Label], limit: usize) -> Result<Vec<S::State>> {
    let order = system.order();
    let mut visited = vec![system.initial().clone()];
    let mut cur = system.initial().clone();
    for (i, label) in run.iter().enumerate() {
        cur = system.step(&cur, label).ok_or(Error::RunStuck { index: i })?;
        visited.push(cur.clone());
    }
    let mut chosen: Vec<S::State> = Vec::new();
    for x in visited {
        if chosen.len() >= limit {
            break;
        }
        if chosen.iter().all(|c| !order.leq(c, &x) && !order.leq(&x, c)) {
            chosen.push(x);
        }
    }
    if chosen.len() < 2 {
        chosen.clear();
    }
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn nv(v: &[u64]) -> NatVec {
        NatVec(v.to_vec())
    }

    #[test]
    fn dickson_examples() {
        assert!(nat_vec_leq(&nv(&[0, 0]), &nv(&[0, 0])).unwrap());
        assert!(nat_vec_leq(&nv(&[1, 2]), &nv(&[1, 3])).unwrap());
        assert!(!nat_vec_leq(&nv(&[2, 1]), &nv(&[1, 3])).unwrap());
        assert!(matches!(
            nat_vec_leq(&nv(&[1]), &nv(&[1, 2])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn prefix_examples() {
        let a = Symbol(0);
        let b = Symbol(1);
        assert!(prefix_leq(&[], &[a, b]));
        assert!(prefix_leq(&[a], &[a, b]));
        assert!(!prefix_leq(&[b], &[a, b]));
        // a^i b is never a prefix of a^j b for i < j
        for i in 0..4 {
            for j in (i + 1)..6 {
                let mut u = vec![a; i];
                u.push(b);
                let mut w = vec![a; j];
                w.push(b);
                assert!(!prefix_leq(&u, &w));
            }
        }
    }

    #[test]
    fn word_tail_shares_buffer() {
        let w = Word::from_symbols(vec![Symbol(0), Symbol(1), Symbol(2)]);
        let t = w.tail().unwrap();
        assert_eq!(t.as_slice(), &[Symbol(1), Symbol(2)]);
        assert_eq!(t, Word::from_symbols(vec![Symbol(1), Symbol(2)]));
        assert!(Word::empty().tail().is_none());
        assert_eq!(t.appended(Symbol(0)).as_slice(), &[Symbol(1), Symbol(2), Symbol(0)]);
    }

    #[test]
    fn alphabet_render_and_parse() {
        let a = Alphabet::from_names(["a", "b"]);
        let w = a.parse_word("abba").unwrap();
        assert_eq!(a.render(&w), "abba");
        assert!(a.parse_word("abc").is_none());
        let long = Alphabet::from_names(["a_1_0", "b_1_1"]);
        let w = long.parse_word("a_1_0.b_1_1").unwrap();
        assert_eq!(w, vec![Symbol(0), Symbol(1)]);
        assert_eq!(long.render(&w), "a_1_0.b_1_1");
    }

    proptest! {
        #[test]
        fn dickson_is_a_partial_order(
            x in proptest::collection::vec(0u64..4, 3),
            y in proptest::collection::vec(0u64..4, 3),
            z in proptest::collection::vec(0u64..4, 3),
        ) {
            let (x, y, z) = (NatVec(x), NatVec(y), NatVec(z));
            let o = Dickson;
            prop_assert!(o.leq(&x, &x));
            if o.leq(&x, &y) && o.leq(&y, &z) {
                prop_assert!(o.leq(&x, &z));
            }
            if o.leq(&x, &y) && o.leq(&y, &x) {
                prop_assert_eq!(&x, &y);
            }
            if o.strictly_less(&x, &y) {
                prop_assert!(o.leq(&x, &y) && x != y);
            }
        }

        #[test]
        fn prefix_is_a_partial_order(
            x in proptest::collection::vec(0u32..2, 0..4),
            y in proptest::collection::vec(0u32..2, 0..4),
            z in proptest::collection::vec(0u32..2, 0..4),
        ) {
            let w = |v: Vec<u32>| Word::from_symbols(v.into_iter().map(Symbol).collect());
            let (x, y, z) = (w(x), w(y), w(z));
            let o = PrefixOrder;
            prop_assert!(o.leq(&x, &x));
            if o.leq(&x, &y) && o.leq(&y, &z) {
                prop_assert!(o.leq(&x, &z));
            }
            if o.leq(&x, &y) && o.leq(&y, &x) {
                prop_assert_eq!(&x, &y);
            }
        }

        #[test]
        fn long_bounded_sequences_contain_an_increasing_pair(
            seq in proptest::collection::vec(proptest::collection::vec(0u64..3, 2), 10..20),
        ) {
            // (B+1)^k = 9 for B = 2, k = 2; any longer sequence has i < j with x_i <= x_j.
            let seq: Vec<NatVec> = seq.into_iter().map(NatVec).collect();
            let found = (0..seq.len())
                .any(|i| ((i + 1)..seq.len()).any(|j| Dickson.leq(&seq[i], &seq[j])));
            prop_assert!(found);
        }
    }
}
