//! Command surface of the `bwsts` tool: model loading, analysis dispatch and
//! report rendering.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bwsts::cover::{x0_coverability, CoverCertificate};
use bwsts::fifo::input_bounded_product;
use bwsts::rrt::{
    build_lrrt, build_rrt, decide_boundedness, decide_nonterm_by_iterable, decide_nontermination, export_dot, NodePair,
};
use bwsts::{
    parse_model, print_model, AnalysisVerdict, CounterConfig, CounterMachine, CounterSystem, FifoConfig, FifoSystem,
    ModelError, ModelFile, Olts, Outcome, Rrt,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_BUDGET: usize = 10_000;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: ModelError,
    },
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Analysis(#[from] bwsts::Error),
}

#[derive(Debug, Parser)]
#[command(
    name = "bwsts",
    version,
    about = "Analyses for branch-WSTS counter and FIFO machines"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one analysis on a model file.
    Check(CheckArgs),
    /// Write the input-bounded product of a FIFO model with its bound clauses.
    Product(ProductArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    Boundedness,
    Termination,
    NontermIterable,
    Cmrz,
    X0Cover,
}

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Analysis::Boundedness => "boundedness",
            Analysis::Termination => "termination",
            Analysis::NontermIterable => "nonterm-iterable",
            Analysis::Cmrz => "cmrz",
            Analysis::X0Cover => "x0-cover",
        }
    }

    fn verdict_word(self, outcome: Outcome) -> &'static str {
        match (self, outcome) {
            (_, Outcome::Inconclusive) => "INCONCLUSIVE",
            (Analysis::Boundedness, Outcome::Positive) => "UNBOUNDED",
            (Analysis::Boundedness, Outcome::Negative) => "BOUNDED",
            (Analysis::Termination | Analysis::NontermIterable, Outcome::Positive) => "NON-TERMINATING",
            (Analysis::Termination | Analysis::NontermIterable, Outcome::Negative) => "TERMINATING",
            (Analysis::Cmrz, Outcome::Positive) => "CMRZ",
            (Analysis::Cmrz, Outcome::Negative) => "NOT CMRZ",
            (Analysis::X0Cover, Outcome::Positive) => "COVERABLE",
            (Analysis::X0Cover, Outcome::Negative) => "NOT COVERABLE",
        }
    }

    fn budget_unit(self) -> &'static str {
        match self {
            Analysis::X0Cover => "search steps",
            _ => "tree nodes",
        }
    }
}

#[derive(Clone, Debug, clap::Args)]
pub struct CheckArgs {
    pub analysis: Analysis,
    pub model: PathBuf,
    /// Work limit: tree nodes, or states plus invariant candidates for x0-cover.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
    /// Coverability target, `q:(v1,..)` for counter machines.
    #[arg(long)]
    pub target: Option<String>,
    /// Assert strict branch-monotony; drops the caveat on boundedness verdicts.
    #[arg(long)]
    pub assert_strict_monotone: bool,
    /// Assert cover-monotony from the initial state; drops the caveat on x0-cover.
    #[arg(long)]
    pub assert_cover_monotone: bool,
    /// Write the reachability tree in Graphviz format.
    #[arg(long, value_name = "PATH")]
    pub dot: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Debug, clap::Args)]
pub struct ProductArgs {
    pub model: PathBuf,
    #[arg(short, long, value_name = "OUT")]
    pub output: PathBuf,
    /// Keep product states that cannot reach an accepting pair.
    #[arg(long)]
    pub no_prune: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub command: String,
    pub machine: String,
    pub verdict: String,
    pub outcome: String,
    pub witness: Option<String>,
    pub caveat: Option<String>,
    pub budget: usize,
    pub budget_used: usize,
    pub budget_unit: String,
    pub elapsed_ms: u64,
}

impl Report {
    fn new<W>(analysis: Analysis, machine: &str, v: &AnalysisVerdict<W>, witness: Option<String>) -> Self {
        Report {
            command: analysis.name().to_string(),
            machine: machine.to_string(),
            verdict: analysis.verdict_word(v.outcome).to_string(),
            outcome: outcome_name(v.outcome).to_string(),
            witness,
            caveat: v.caveat.clone(),
            budget: v.budget,
            budget_used: v.budget_used,
            budget_unit: analysis.budget_unit().to_string(),
            elapsed_ms: 0,
        }
    }

    pub fn is_inconclusive(&self) -> bool {
        self.outcome == "inconclusive"
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_inconclusive() {
            2
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} [{}]: {}", self.machine, self.command, self.verdict);
        if let Some(w) = &self.witness {
            let _ = writeln!(s, "  witness: {w}");
        }
        if let Some(c) = &self.caveat {
            let _ = writeln!(s, "  caveat: {c}");
        }
        if self.command == Analysis::Cmrz.name() {
            // purely structural, no budget involved
        } else if self.is_inconclusive() {
            let _ = writeln!(
                s,
                "  budget of {} {} exhausted without a verdict",
                self.budget, self.budget_unit
            );
        } else {
            let _ = writeln!(
                s,
                "  budget: {} of {} {} used",
                self.budget_used, self.budget, self.budget_unit
            );
        }
        let _ = writeln!(s, "  elapsed: {} ms", self.elapsed_ms);
        s
    }
}

pub fn outcome_name(o: Outcome) -> &'static str {
    match o {
        Outcome::Positive => "positive",
        Outcome::Negative => "negative",
        Outcome::Inconclusive => "inconclusive",
    }
}

pub fn load_model(path: &Path) -> Result<ModelFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_model(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// Options of a `check` run that do not depend on the command line.
#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub budget: usize,
    pub target: Option<String>,
    pub assert_strict_monotone: bool,
    pub assert_cover_monotone: bool,
    pub want_dot: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            budget: DEFAULT_BUDGET,
            target: None,
            assert_strict_monotone: false,
            assert_cover_monotone: false,
            want_dot: false,
        }
    }
}

impl From<&CheckArgs> for CheckOptions {
    fn from(a: &CheckArgs) -> Self {
        CheckOptions {
            budget: a.budget,
            target: a.target.clone(),
            assert_strict_monotone: a.assert_strict_monotone,
            assert_cover_monotone: a.assert_cover_monotone,
            want_dot: a.dot.is_some(),
        }
    }
}

pub struct CheckOutput {
    pub report: Report,
    pub dot: Option<String>,
}

/// Runs `analysis` on a parsed model.
pub fn check(model: &ModelFile, analysis: Analysis, opts: &CheckOptions) -> Result<CheckOutput, CliError> {
    let start = Instant::now();
    if opts.budget == 0 {
        return Err(CliError::Usage("--budget must be at least 1".into()));
    }
    let tree_based = matches!(
        analysis,
        Analysis::Boundedness | Analysis::Termination | Analysis::NontermIterable
    );
    if opts.want_dot && !tree_based {
        return Err(CliError::Usage(format!("--dot does not apply to {}", analysis.name())));
    }
    if opts.target.is_some() && analysis != Analysis::X0Cover {
        return Err(CliError::Usage(format!(
            "--target does not apply to {}",
            analysis.name()
        )));
    }
    let mut out = match model {
        ModelFile::Counter { machine, init } => {
            let system = CounterSystem::new(machine, init.clone());
            match analysis {
                Analysis::Cmrz => cmrz(machine),
                Analysis::X0Cover => x0_cover(machine, init, opts)?,
                _ => tree_analysis(&system, &machine.name, analysis, opts)?,
            }
        }
        ModelFile::Fifo { machine, init, .. } => {
            let system = FifoSystem::new(machine, init.clone());
            match analysis {
                Analysis::Cmrz | Analysis::X0Cover => {
                    return Err(CliError::Usage(format!(
                        "{} applies to counter machines only",
                        analysis.name()
                    )))
                }
                _ => tree_analysis(&system, &machine.name, analysis, opts)?,
            }
        }
    };
    out.report.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(out)
}

fn tree_analysis<S: Olts>(
    system: &S,
    name: &str,
    analysis: Analysis,
    opts: &CheckOptions,
) -> Result<CheckOutput, CliError> {
    let tree = if analysis == Analysis::NontermIterable {
        build_lrrt(system, opts.budget)?
    } else {
        build_rrt(system, opts.budget)?
    };
    let verdict = match analysis {
        Analysis::Boundedness => decide_boundedness(&tree, system.order(), opts.assert_strict_monotone)?,
        Analysis::Termination => decide_nontermination(&tree),
        _ => decide_nonterm_by_iterable(&tree),
    };
    let witness = verdict.witness.map(|p| render_pair(system, &tree, p));
    let report = Report::new(analysis, name, &verdict, witness);
    Ok(CheckOutput {
        report,
        dot: opts.want_dot.then(|| export_dot(&tree, system)),
    })
}

fn render_pair<S: Olts>(system: &S, tree: &Rrt<S::State, S::Label>, p: NodePair) -> String {
    let labels: Vec<String> = tree
        .segment_labels(p.ancestor, p.node)
        .iter()
        .map(|l| system.show_label(l))
        .collect();
    format!(
        "{} --[{}]--> {}",
        system.show_state(&tree.node(p.ancestor).state),
        labels.join(" "),
        system.show_state(&tree.node(p.node).state)
    )
}

fn cmrz(machine: &CounterMachine) -> CheckOutput {
    let r = machine.is_cmrz();
    let verdict: AnalysisVerdict<()> = if r.is_cmrz {
        AnalysisVerdict::positive((), 0, 0)
    } else {
        AnalysisVerdict::negative(None, 0, 0)
    };
    let witness = (!r.is_cmrz).then(|| render_path(machine, &r.witness));
    CheckOutput {
        report: Report::new(Analysis::Cmrz, &machine.name, &verdict, witness),
        dot: None,
    }
}

/// `q1 --zero(c)--> q3 --inc(c)--> q1`
pub fn render_path(machine: &CounterMachine, path: &[usize]) -> String {
    let Some(&first) = path.first() else {
        return String::new();
    };
    let mut s = machine.controls[machine.transitions[first].source].clone();
    for &t in path {
        let _ = write!(
            s,
            " --{}--> {}",
            machine.show_action(t),
            machine.controls[machine.transitions[t].target]
        );
    }
    s
}

fn x0_cover(machine: &CounterMachine, init: &CounterConfig, opts: &CheckOptions) -> Result<CheckOutput, CliError> {
    let text = opts
        .target
        .as_deref()
        .ok_or_else(|| CliError::Usage("x0-cover needs --target q:(v1,..)".into()))?;
    let y = parse_counter_target(machine, text)?;
    let v = x0_coverability(machine, init, &y, opts.budget, opts.assert_cover_monotone);
    let witness = v.witness.as_ref().map(|c: &CoverCertificate| c.render(machine));
    Ok(CheckOutput {
        report: Report::new(Analysis::X0Cover, &machine.name, &v, witness),
        dot: None,
    })
}

/// A parsed `--target` value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    Counter {
        control: String,
        values: Vec<u64>,
    },
    Fifo {
        control: String,
        word: String,
        channel: Option<String>,
    },
}

/// Parses `q:(v1,..)` or `q:"w"@ch` (the channel may be omitted).
pub fn parse_target(text: &str) -> Result<Target, CliError> {
    let bad = || CliError::Usage(format!("malformed target `{text}`; expected q:(v1,..) or q:\"w\"@ch"));
    let (control, rest) = text.split_once(':').ok_or_else(bad)?;
    let control = control.trim();
    if control.is_empty() {
        return Err(bad());
    }
    let rest = rest.trim();
    if let Some(inner) = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        let values = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner
                .split(',')
                .map(|v| v.trim().parse::<u64>().map_err(|_| bad()))
                .collect::<Result<_, _>>()?
        };
        return Ok(Target::Counter {
            control: control.to_string(),
            values,
        });
    }
    let rest = rest.strip_prefix('"').ok_or_else(bad)?;
    let (word, tail) = rest.split_once('"').ok_or_else(bad)?;
    let channel = match tail.trim() {
        "" => None,
        t => Some(t.strip_prefix('@').ok_or_else(bad)?.trim().to_string()),
    };
    Ok(Target::Fifo {
        control: control.to_string(),
        word: word.to_string(),
        channel,
    })
}

fn parse_counter_target(machine: &CounterMachine, text: &str) -> Result<CounterConfig, CliError> {
    match parse_target(text)? {
        Target::Counter { control, values } => {
            let q = machine
                .control_id(&control)
                .ok_or_else(|| CliError::Usage(format!("unknown control state `{control}`")))?;
            if values.len() != machine.dim() {
                return Err(CliError::Usage(format!(
                    "target has {} values but the machine has {} counters",
                    values.len(),
                    machine.dim()
                )));
            }
            Ok(CounterConfig::new(q, values))
        }
        Target::Fifo { .. } => Err(CliError::Usage(
            "channel targets are not supported; x0-cover applies to counter machines only".into(),
        )),
    }
}

/// Normalizes a FIFO model for its bound clauses and returns the product
/// machine as a model file, preceded by a letter map comment block.
pub fn product_model(model: &ModelFile, prune: bool) -> Result<String, CliError> {
    let ModelFile::Fifo { machine, init, bounds } = model else {
        return Err(CliError::Usage("product needs a FIFO model".into()));
    };
    let mut langs = Vec::new();
    for (c, b) in bounds.iter().enumerate() {
        match b {
            Some(l) => langs.push(l.clone()),
            None => {
                return Err(CliError::Usage(format!(
                    "channel `{}` has no bound clause",
                    machine.channels[c]
                )))
            }
        }
    }
    if init.contents.iter().any(|w| !w.is_empty()) {
        return Err(CliError::Usage("product needs empty initial channels".into()));
    }
    let (normalized, product) = input_bounded_product(machine, &langs, prune)?;
    let out = ModelFile::Fifo {
        init: FifoConfig::empty(0, product.machine.channels.len()),
        bounds: normalized.langs.iter().cloned().map(Some).collect(),
        machine: product.machine,
    };
    let mut s = String::new();
    let _ = writeln!(s, "# input-bounded product of {}", machine.name);
    let _ = writeln!(s, "# letter_map");
    for a in normalized.machine.alphabet.symbols() {
        let _ = writeln!(
            s,
            "#   {} = {}",
            normalized.machine.alphabet.name(a),
            machine.alphabet.name(normalized.original_letter(a))
        );
    }
    s.push_str(&print_model(&out));
    Ok(s)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Executes a parsed command line, writing the report to `out`. Returns the
/// process exit code.
pub fn run(cli: &Cli, out: &mut impl std::io::Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Check(args) => {
            let model = load_model(&args.model)?;
            let result = check(&model, args.analysis, &CheckOptions::from(args))?;
            if let (Some(path), Some(dot)) = (&args.dot, &result.dot) {
                write_file(path, dot)?;
            }
            let text = if args.json {
                result.report.to_json() + "\n"
            } else {
                result.report.render()
            };
            out.write_all(text.as_bytes()).map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })?;
            Ok(result.report.exit_code())
        }
        Command::Product(args) => {
            let model = load_model(&args.model)?;
            let text = product_model(&model, !args.no_prune)?;
            write_file(&args.output, &text)?;
            Ok(0)
        }
    }
}
