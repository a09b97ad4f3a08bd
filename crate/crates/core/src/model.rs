//! Text format for machine descriptions.
//!
//! ```text
//! # comment
//! counter m8
//! states q0 q1 q2 q3
//! counters c
//! q0 -- dec(c) --> q1
//! q1 -- nop [zero: c] --> q3
//! init q0 (0)
//! ```
//!
//! FIFO models declare `channels` and `alphabet`, use transitions such as
//! `q0 -- c!a --> q1` (the channel may be omitted when there is only one),
//! optional `bound c: (ab)(c)` clauses and `init q0 c="ab"`.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::counter::{CounterConfig, CounterMachine, CounterOp, CounterTransition};
use crate::fifo::{Action, BoundedLang, FifoConfig, FifoMachine, FifoTransition};
use crate::ordering::{Alphabet, NatVec, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("line {line}, column {col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}, column {col}: {msg}")]
    Semantic { line: usize, col: usize, msg: String },
}

impl ModelError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            ModelError::Syntax { line, col, .. } | ModelError::Semantic { line, col, .. } => (*line, *col),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Counter,
    Fifo,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelFile {
    Counter {
        machine: CounterMachine,
        init: CounterConfig,
    },
    Fifo {
        machine: FifoMachine,
        init: FifoConfig,
        /// Per channel, the declared bounded language if any.
        bounds: Vec<Option<BoundedLang>>,
    },
}

impl ModelFile {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelFile::Counter { .. } => ModelKind::Counter,
            ModelFile::Fifo { .. } => ModelKind::Fifo,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            ModelFile::Counter { machine, .. } => &machine.name,
            ModelFile::Fifo { machine, .. } => &machine.name,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(u64),
    Punct(&'static str),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    col: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | '\'')
}

fn lex(line: &str, lineno: usize) -> Result<Vec<Token>, ModelError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '-' {
            let dashes = chars[i..].iter().take_while(|&&d| d == '-').count();
            let tok = match (dashes, chars.get(i + dashes)) {
                (2, Some('>')) => {
                    i += 3;
                    "-->"
                }
                (2, _) => {
                    i += 2;
                    "--"
                }
                _ => {
                    return Err(ModelError::Syntax {
                        line: lineno,
                        col,
                        msg: "expected `--` or `-->`".into(),
                    })
                }
            };
            out.push(Token {
                tok: Tok::Punct(tok),
                col,
            });
            continue;
        }
        if c == '"' {
            let end = chars[i + 1..]
                .iter()
                .position(|&d| d == '"')
                .ok_or(ModelError::Syntax {
                    line: lineno,
                    col,
                    msg: "unterminated string".into(),
                })?;
            let s: String = chars[i + 1..i + 1 + end].iter().collect();
            out.push(Token { tok: Tok::Str(s), col });
            i += end + 2;
            continue;
        }
        let punct = match c {
            '(' => Some("("),
            ')' => Some(")"),
            '[' => Some("["),
            ']' => Some("]"),
            ',' => Some(","),
            ':' => Some(":"),
            '!' => Some("!"),
            '?' => Some("?"),
            '*' => Some("*"),
            '=' => Some("="),
            _ => None,
        };
        if let Some(p) = punct {
            out.push(Token {
                tok: Tok::Punct(p),
                col,
            });
            i += 1;
            continue;
        }
        if is_ident_char(c) {
            let len = chars[i..].iter().take_while(|&&d| is_ident_char(d)).count();
            let s: String = chars[i..i + len].iter().collect();
            let tok = match s.parse::<u64>() {
                Ok(n) => Tok::Num(n),
                Err(_) => Tok::Ident(s),
            };
            out.push(Token { tok, col });
            i += len;
            continue;
        }
        return Err(ModelError::Syntax {
            line: lineno,
            col,
            msg: format!("unexpected character `{c}`"),
        });
    }
    Ok(out)
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn err(&self, msg: impl Into<String>) -> ModelError {
        ModelError::Syntax {
            line: self.line,
            col: self.col(),
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn eat(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Punct(q)) if *q == p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> Result<(), ModelError> {
        if self.eat(p) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{p}`")))
        }
    }

    /// Identifier (numbers are accepted as names too).
    fn name(&mut self, what: &str) -> Result<(String, usize), ModelError> {
        let col = self.col();
        let s = match self.peek() {
            Some(Tok::Ident(s)) => s.clone(),
            Some(Tok::Num(n)) => n.to_string(),
            _ => return Err(self.err(format!("expected {what}"))),
        };
        self.pos += 1;
        Ok((s, col))
    }

    fn num(&mut self) -> Result<u64, ModelError> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.err("expected a number")),
        }
    }

    fn finish(&self) -> Result<(), ModelError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }
}

type Spanned = (String, usize, usize);

enum RawAction {
    Inc(Spanned),
    Dec(Spanned),
    Nop,
    Fifo {
        channel: Option<Spanned>,
        send: bool,
        letter: Spanned,
    },
}

struct RawTransition {
    source: Spanned,
    action: RawAction,
    zero: Vec<Spanned>,
    target: Spanned,
}

enum RawInit {
    Counter(Vec<u64>),
    Fifo(Vec<(Spanned, String, usize)>),
    Bare,
}

struct RawBound {
    channel: Spanned,
    words: Vec<(String, usize)>,
    line: usize,
}

#[derive(Default)]
struct Raw {
    kind: Option<(ModelKind, String)>,
    states: Vec<Spanned>,
    counters: Vec<Spanned>,
    channels: Vec<Spanned>,
    alphabet: Vec<Spanned>,
    transitions: Vec<RawTransition>,
    bounds: Vec<RawBound>,
    init: Option<(Spanned, RawInit)>,
}

fn names_rest(cur: &mut Cursor<'_>, what: &str) -> Result<Vec<Spanned>, ModelError> {
    let mut out = Vec::new();
    while !cur.at_end() {
        cur.eat(",");
        let (n, col) = cur.name(what)?;
        out.push((n, cur.line, col));
    }
    Ok(out)
}

fn parse_line(raw: &mut Raw, cur: &mut Cursor<'_>) -> Result<(), ModelError> {
    let line = cur.line;
    let (head, head_col) = cur.name("a keyword or a state name")?;
    if raw.kind.is_none() {
        let kind = match head.as_str() {
            "counter" => ModelKind::Counter,
            "fifo" => ModelKind::Fifo,
            _ => {
                return Err(ModelError::Syntax {
                    line,
                    col: head_col,
                    msg: "model must start with `counter <name>` or `fifo <name>`".into(),
                })
            }
        };
        let (name, _) = cur.name("a machine name")?;
        cur.finish()?;
        raw.kind = Some((kind, name));
        return Ok(());
    }
    let is_kw = !matches!(cur.peek(), Some(Tok::Punct("--")));
    if is_kw {
        match head.as_str() {
            "states" => raw.states.extend(names_rest(cur, "a state name")?),
            "counters" => raw.counters.extend(names_rest(cur, "a counter name")?),
            "channels" => raw.channels.extend(names_rest(cur, "a channel name")?),
            "alphabet" => raw.alphabet.extend(names_rest(cur, "a letter")?),
            "bound" | "input_bounded" => {
                let (ch, col) = cur.name("a channel name")?;
                cur.expect(":")?;
                let mut words = Vec::new();
                while !cur.at_end() {
                    let col = cur.col();
                    cur.expect("(")?;
                    let mut w = String::new();
                    while !cur.eat(")") {
                        let (n, _) = cur.name("a letter or `)`")?;
                        if !w.is_empty() {
                            w.push('.');
                        }
                        w.push_str(&n);
                    }
                    cur.eat("*");
                    words.push((w, col));
                }
                if words.is_empty() {
                    return Err(cur.err("expected at least one `(word)`"));
                }
                raw.bounds.push(RawBound {
                    channel: (ch, line, col),
                    words,
                    line,
                });
            }
            "init" => {
                let (q, col) = cur.name("a state name")?;
                let init = if cur.at_end() {
                    RawInit::Bare
                } else if cur.eat("(") {
                    let mut vals = Vec::new();
                    if !cur.eat(")") {
                        loop {
                            vals.push(cur.num()?);
                            if cur.eat(")") {
                                break;
                            }
                            cur.expect(",")?;
                        }
                    }
                    cur.finish()?;
                    RawInit::Counter(vals)
                } else {
                    let mut contents = Vec::new();
                    while !cur.at_end() {
                        cur.eat(",");
                        let (ch, ccol) = cur.name("a channel name")?;
                        cur.expect("=")?;
                        let scol = cur.col();
                        let s = match cur.peek() {
                            Some(Tok::Str(s)) => s.clone(),
                            _ => return Err(cur.err("expected a quoted word")),
                        };
                        cur.pos += 1;
                        contents.push(((ch, line, ccol), s, scol));
                    }
                    RawInit::Fifo(contents)
                };
                if raw.init.is_some() {
                    return Err(ModelError::Syntax {
                        line,
                        col: head_col,
                        msg: "duplicate `init`".into(),
                    });
                }
                raw.init = Some(((q, line, col), init));
            }
            _ => {
                return Err(ModelError::Syntax {
                    line,
                    col: head_col,
                    msg: format!("unknown keyword `{head}`"),
                })
            }
        }
        return cur.finish();
    }
    cur.expect("--")?;
    let action_col = cur.col();
    let action = if cur.eat("!") || cur.eat("?") {
        let send = matches!(cur.toks[cur.pos - 1].tok, Tok::Punct("!"));
        let (l, lcol) = cur.name("a letter")?;
        RawAction::Fifo {
            channel: None,
            send,
            letter: (l, line, lcol),
        }
    } else {
        let (word, _) = cur.name("an action")?;
        match word.as_str() {
            "inc" | "dec" if matches!(cur.peek(), Some(Tok::Punct("("))) => {
                cur.expect("(")?;
                let (c, ccol) = cur.name("a counter name")?;
                cur.expect(")")?;
                if word == "inc" {
                    RawAction::Inc((c, line, ccol))
                } else {
                    RawAction::Dec((c, line, ccol))
                }
            }
            "nop" if !matches!(cur.peek(), Some(Tok::Punct("!" | "?"))) => RawAction::Nop,
            _ => {
                let send = if cur.eat("!") {
                    true
                } else if cur.eat("?") {
                    false
                } else {
                    return Err(ModelError::Syntax {
                        line,
                        col: action_col,
                        msg: "expected `inc(c)`, `dec(c)`, `nop`, `ch!a` or `ch?a`".into(),
                    });
                };
                let (l, lcol) = cur.name("a letter")?;
                RawAction::Fifo {
                    channel: Some((word, line, action_col)),
                    send,
                    letter: (l, line, lcol),
                }
            }
        }
    };
    let mut zero = Vec::new();
    if cur.eat("[") {
        let (kw, kcol) = cur.name("`zero`")?;
        if kw != "zero" {
            return Err(ModelError::Syntax {
                line,
                col: kcol,
                msg: "expected `zero`".into(),
            });
        }
        cur.expect(":")?;
        loop {
            let (c, ccol) = cur.name("a counter name")?;
            zero.push((c, line, ccol));
            if cur.eat("]") {
                break;
            }
            cur.expect(",")?;
        }
    }
    cur.expect("-->")?;
    let (target, tcol) = cur.name("a target state")?;
    cur.finish()?;
    raw.transitions.push(RawTransition {
        source: (head, line, head_col),
        action,
        zero,
        target: (target, line, tcol),
    });
    Ok(())
}

fn semantic(s: &Spanned, msg: String) -> ModelError {
    ModelError::Semantic {
        line: s.1,
        col: s.2,
        msg,
    }
}

struct Table {
    what: &'static str,
    ids: HashMap<String, usize>,
    names: Vec<String>,
}

impl Table {
    fn new(what: &'static str, decls: &[Spanned]) -> Result<Self, ModelError> {
        let mut t = Table {
            what,
            ids: HashMap::new(),
            names: Vec::new(),
        };
        for d in decls {
            if t.ids.insert(d.0.clone(), t.names.len()).is_some() {
                return Err(semantic(d, format!("duplicate {what} `{}`", d.0)));
            }
            t.names.push(d.0.clone());
        }
        Ok(t)
    }

    fn get(&self, s: &Spanned) -> Result<usize, ModelError> {
        self.ids
            .get(&s.0)
            .copied()
            .ok_or_else(|| semantic(s, format!("unknown {} `{}`", self.what, s.0)))
    }
}

pub fn parse_model(text: &str) -> Result<ModelFile, ModelError> {
    let mut raw = Raw::default();
    let mut last_line = 1;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        last_line = lineno;
        let toks = lex(line, lineno)?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor {
            toks: &toks,
            pos: 0,
            line: lineno,
            end_col: line.chars().count() + 1,
        };
        parse_line(&mut raw, &mut cur)?;
    }
    let Some((kind, name)) = raw.kind.take() else {
        return Err(ModelError::Syntax {
            line: last_line,
            col: 1,
            msg: "empty model".into(),
        });
    };
    if raw.states.is_empty() {
        return Err(ModelError::Semantic {
            line: 1,
            col: 1,
            msg: "no `states` declared".into(),
        });
    }
    let states = Table::new("state", &raw.states)?;
    let init_control = match &raw.init {
        Some((q, _)) => states.get(q)?,
        None => 0,
    };
    match kind {
        ModelKind::Counter => build_counter(raw, name, states, init_control),
        ModelKind::Fifo => build_fifo(raw, name, states, init_control),
    }
}

fn misplaced(s: &Spanned, what: &str, kind: &str) -> ModelError {
    semantic(s, format!("{what} not allowed in a {kind} model"))
}

fn build_counter(raw: Raw, name: String, states: Table, init_control: usize) -> Result<ModelFile, ModelError> {
    if let Some(c) = raw.channels.first() {
        return Err(misplaced(c, "`channels`", "counter"));
    }
    if let Some(c) = raw.alphabet.first() {
        return Err(misplaced(c, "`alphabet`", "counter"));
    }
    if let Some(b) = raw.bounds.first() {
        return Err(misplaced(&b.channel, "`bound`", "counter"));
    }
    let counters = Table::new("counter", &raw.counters)?;
    let mut transitions = Vec::new();
    for t in &raw.transitions {
        let op = match &t.action {
            RawAction::Inc(c) => CounterOp::Inc(counters.get(c)?),
            RawAction::Dec(c) => CounterOp::Dec(counters.get(c)?),
            RawAction::Nop => CounterOp::Noop,
            RawAction::Fifo { letter, .. } => return Err(misplaced(letter, "channel action", "counter")),
        };
        let zero_tests = t.zero.iter().map(|c| counters.get(c)).collect::<Result<Vec<_>, _>>()?;
        transitions.push(CounterTransition {
            source: states.get(&t.source)?,
            op,
            zero_tests,
            target: states.get(&t.target)?,
        });
    }
    let valuation = match &raw.init {
        None | Some((_, RawInit::Bare)) => vec![0; counters.names.len()],
        Some((q, RawInit::Counter(v))) => {
            if v.len() != counters.names.len() {
                return Err(semantic(
                    q,
                    format!(
                        "initial valuation has {} entries for {} counters",
                        v.len(),
                        counters.names.len()
                    ),
                ));
            }
            v.clone()
        }
        Some((q, RawInit::Fifo(_))) => return Err(misplaced(q, "channel contents", "counter")),
    };
    let machine = CounterMachine::new(name, states.names, counters.names, transitions, init_control).map_err(|e| {
        ModelError::Semantic {
            line: 1,
            col: 1,
            msg: e.to_string(),
        }
    })?;
    let init = CounterConfig::new(init_control, NatVec(valuation));
    Ok(ModelFile::Counter { machine, init })
}

fn build_fifo(raw: Raw, name: String, states: Table, init_control: usize) -> Result<ModelFile, ModelError> {
    if let Some(c) = raw.counters.first() {
        return Err(misplaced(c, "`counters`", "FIFO"));
    }
    let channels = Table::new("channel", &raw.channels)?;
    if channels.names.is_empty() {
        return Err(ModelError::Semantic {
            line: 1,
            col: 1,
            msg: "no `channels` declared".into(),
        });
    }
    let letters = Table::new("letter", &raw.alphabet)?;
    for l in &raw.alphabet {
        if l.0.contains('.') {
            return Err(semantic(l, format!("letter `{}` must not contain `.`", l.0)));
        }
    }
    let alphabet = Alphabet::from_names(letters.names.iter().map(String::as_str));
    let mut transitions = Vec::new();
    for t in &raw.transitions {
        let (channel, send, letter) = match &t.action {
            RawAction::Fifo { channel, send, letter } => (channel, *send, letter),
            RawAction::Inc(c) | RawAction::Dec(c) => return Err(misplaced(c, "counter action", "FIFO")),
            RawAction::Nop => return Err(misplaced(&t.source, "`nop`", "FIFO")),
        };
        if let Some(z) = t.zero.first() {
            return Err(misplaced(z, "zero test", "FIFO"));
        }
        let ch = match channel {
            Some(c) => channels.get(c)?,
            None if channels.names.len() == 1 => 0,
            None => {
                return Err(semantic(
                    letter,
                    "channel must be named when several channels are declared".into(),
                ))
            }
        };
        let sym = alphabet
            .lookup(&letter.0)
            .ok_or_else(|| semantic(letter, format!("unknown letter `{}`", letter.0)))?;
        let action = if send {
            Action::send(ch, sym)
        } else {
            Action::recv(ch, sym)
        };
        transitions.push(FifoTransition {
            source: states.get(&t.source)?,
            action,
            target: states.get(&t.target)?,
        });
    }
    let mut bounds = vec![None; channels.names.len()];
    for b in &raw.bounds {
        let ch = channels.get(&b.channel)?;
        let mut words = Vec::new();
        for (w, col) in &b.words {
            let sym = alphabet.parse_word(w).ok_or_else(|| ModelError::Semantic {
                line: b.line,
                col: *col,
                msg: format!("unknown letter in `({w})`"),
            })?;
            words.push(sym);
        }
        let lang = BoundedLang::new(words).map_err(|e| semantic(&b.channel, e.to_string()))?;
        if bounds[ch].replace(lang).is_some() {
            return Err(semantic(
                &b.channel,
                format!("duplicate bound for channel `{}`", b.channel.0),
            ));
        }
    }
    let mut contents = vec![Word::empty(); channels.names.len()];
    match &raw.init {
        None | Some((_, RawInit::Bare)) => {}
        Some((q, RawInit::Counter(v))) => {
            if !v.is_empty() {
                return Err(misplaced(q, "counter valuation", "FIFO"));
            }
        }
        Some((_, RawInit::Fifo(cs))) => {
            for (ch, w, col) in cs {
                let c = channels.get(ch)?;
                let sym = alphabet.parse_word(w).ok_or_else(|| ModelError::Semantic {
                    line: ch.1,
                    col: *col,
                    msg: format!("unknown letter in \"{w}\""),
                })?;
                contents[c] = Word::from_symbols(sym);
            }
        }
    }
    let machine =
        FifoMachine::new(name, states.names, channels.names, alphabet, transitions, init_control).map_err(|e| {
            ModelError::Semantic {
                line: 1,
                col: 1,
                msg: e.to_string(),
            }
        })?;
    let init = FifoConfig::new(init_control, contents);
    Ok(ModelFile::Fifo { machine, init, bounds })
}

/// Renders a model in the format accepted by [`parse_model`].
pub fn print_model(model: &ModelFile) -> String {
    let mut s = String::new();
    match model {
        ModelFile::Counter { machine, init } => {
            let _ = writeln!(s, "counter {}", machine.name);
            let _ = writeln!(s, "states {}", machine.controls.join(" "));
            if !machine.counters.is_empty() {
                let _ = writeln!(s, "counters {}", machine.counters.join(" "));
            }
            for t in 0..machine.transitions.len() {
                let _ = writeln!(s, "{}", machine.show_transition(t));
            }
            let vals: Vec<String> = init.valuation.as_slice().iter().map(u64::to_string).collect();
            let _ = writeln!(s, "init {} ({})", machine.controls[init.control], vals.join(","));
        }
        ModelFile::Fifo { machine, init, bounds } => {
            let _ = writeln!(s, "fifo {}", machine.name);
            let _ = writeln!(s, "states {}", machine.controls.join(" "));
            let _ = writeln!(s, "channels {}", machine.channels.join(" "));
            let letters: Vec<&str> = machine.alphabet.symbols().map(|a| machine.alphabet.name(a)).collect();
            let _ = writeln!(s, "alphabet {}", letters.join(" "));
            for t in 0..machine.transitions.len() {
                let _ = writeln!(s, "{}", machine.show_transition(t));
            }
            for (c, b) in bounds.iter().enumerate() {
                if let Some(l) = b {
                    let words: String = l
                        .words
                        .iter()
                        .map(|w| format!("({})", machine.alphabet.render(w)))
                        .collect();
                    let _ = writeln!(s, "bound {}: {}", machine.channels[c], words);
                }
            }
            let contents: Vec<String> = init
                .contents
                .iter()
                .enumerate()
                .filter(|(_, w)| !w.is_empty())
                .map(|(c, w)| format!("{}=\"{}\"", machine.channels[c], machine.alphabet.render(w.as_slice())))
                .collect();
            let mut line = format!("init {}", machine.controls[init.control]);
            for c in contents {
                line.push(' ');
                line.push_str(&c);
            }
            let _ = writeln!(s, "{line}");
        }
    }
    s
}
