use std::path::{Path, PathBuf};
use std::process::Command;

use bwsts::cover::x0_coverability;
use bwsts::rrt::{build_lrrt, build_rrt, decide_boundedness, decide_nonterm_by_iterable, decide_nontermination};
use bwsts::{corpus, parse_model, print_model, CounterSystem, FifoSystem, ModelFile, Olts, Outcome};
use bwsts_cli::outcome_name;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[path = "../../core/tests/common/mod.rs"]
mod common;

fn model_path(stem: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(format!("{stem}.model"))
}

fn bwsts(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_bwsts"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn check(analysis: &str, path: &Path, extra: &[&str]) -> (i32, String, String) {
    let mut args = vec!["check", analysis, path.to_str().unwrap()];
    args.extend_from_slice(extra);
    bwsts(&args)
}

fn json(analysis: &str, path: &Path, extra: &[&str]) -> (i32, serde_json::Value) {
    let mut extra = extra.to_vec();
    extra.push("--json");
    let (code, out, err) = check(analysis, path, &extra);
    assert!(err.is_empty(), "{err}");
    (code, serde_json::from_str(&out).expect("json report"))
}

#[test]
fn m1_is_unbounded() {
    let (code, out, _) = check("boundedness", &model_path("m1"), &[]);
    assert_eq!(code, 0);
    assert!(out.contains("m1 [boundedness]: UNBOUNDED"), "{out}");
    let (code, out, _) = check("termination", &model_path("m1"), &[]);
    assert_eq!(code, 0);
    assert!(out.contains(": NON-TERMINATING"), "{out}");
}

#[test]
fn m8_is_not_cmrz() {
    let (code, out, _) = check("cmrz", &model_path("m8"), &[]);
    assert_eq!(code, 0);
    assert!(out.contains(": NOT CMRZ"));
    assert!(out.contains("witness: q1 --zero(c)--> q3 --inc(c)--> q1"), "{out}");
}

#[test]
fn m8_cover_queries() {
    let (code, out, _) = check("x0-cover", &model_path("m8"), &["--target", "q2:(3)"]);
    assert_eq!(code, 0);
    assert!(out.contains(": COVERABLE"));
    assert!(out.contains("run [inc(c), inc(c), inc(c)] reaching (q2,(3))"), "{out}");
    let (code, out, _) = check("x0-cover", &model_path("m8"), &["--target", "q1:(1)"]);
    assert_eq!(code, 0);
    assert!(out.contains(": NOT COVERABLE"));
    assert!(out.contains("inductive invariant {q0:(0), q2:(ω)}"), "{out}");
}

#[test]
fn exhausted_budget_is_inconclusive_and_named() {
    let (code, out, _) = check("termination", &model_path("m1"), &["--budget", "1"]);
    assert_eq!(code, 2);
    assert!(out.contains(": INCONCLUSIVE"));
    assert!(out.contains("budget of 1 tree nodes exhausted"), "{out}");
    let (code, v) = json("termination", &model_path("m1"), &["--budget", "1"]);
    assert_eq!(code, 2);
    assert_eq!(v["verdict"], "INCONCLUSIVE");
    assert_eq!(v["budget"], 1);
}

#[test]
fn usage_errors_exit_with_one() {
    let m8 = model_path("m8");
    let m1 = model_path("m1");
    let cases: Vec<(i32, String)> = vec![
        check("x0-cover", &m8, &[]),
        check("x0-cover", &m8, &["--target", "q9:(1)"]),
        check("x0-cover", &m8, &["--target", "q1:(1,2)"]),
        check("x0-cover", &m1, &["--target", "q0:\"a\"@c"]),
        check("cmrz", &m1, &[]),
        check("cmrz", &m8, &["--dot", "/tmp/never.dot"]),
        check("boundedness", &m8, &["--budget", "0"]),
        check("boundedness", Path::new("/nonexistent.model"), &[]),
        bwsts(&["check", "nope", m1.to_str().unwrap()]),
        bwsts(&["frobnicate"]),
    ]
    .into_iter()
    .map(|(c, _, e)| (c, e))
    .collect();
    for (code, err) in cases {
        assert_eq!(code, 1, "{err}");
        assert!(!err.is_empty());
    }
}

#[test]
fn parse_errors_carry_positions() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.model");
    std::fs::write(
        &p,
        "counter x\nstates q0\ncounters c\nq0 -- inc(d) --> q0\ninit q0 (0)\n",
    )
    .unwrap();
    let (code, _, err) = check("cmrz", &p, &[]);
    assert_eq!(code, 1);
    assert!(err.contains("line 4, column 11"), "{err}");
}

#[test]
fn json_report_has_the_schema_fields() {
    let (_, v) = json("x0-cover", &model_path("m8"), &["--target", "q2:(3)"]);
    for key in [
        "command",
        "machine",
        "verdict",
        "witness",
        "budget",
        "budget_used",
        "elapsed_ms",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["command"], "x0-cover");
    assert_eq!(v["machine"], "m8");
    assert_eq!(v["budget"], 10_000);
}

#[test]
fn dot_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m1.dot");
    let (code, _, _) = check("boundedness", &model_path("m1"), &["--dot", p.to_str().unwrap()]);
    assert_eq!(code, 0);
    let dot = std::fs::read_to_string(&p).unwrap();
    assert!(dot.starts_with("digraph rrt {"));
    assert!(dot.contains("n1 -> n0 [style=dashed"));
}

fn library_outcomes(model: &ModelFile, budget: usize) -> Vec<(&'static str, Outcome)> {
    fn trees<S: Olts>(s: &S, budget: usize) -> Vec<(&'static str, Outcome)> {
        let rrt = build_rrt(s, budget).unwrap();
        let lrrt = build_lrrt(s, budget).unwrap();
        vec![
            (
                "boundedness",
                decide_boundedness(&rrt, s.order(), false).unwrap().outcome,
            ),
            ("termination", decide_nontermination(&rrt).outcome),
            ("nonterm-iterable", decide_nonterm_by_iterable(&lrrt).outcome),
        ]
    }
    match model {
        ModelFile::Counter { machine, init } => {
            let mut v = trees(&CounterSystem::new(machine, init.clone()), budget);
            v.push((
                "cmrz",
                if machine.is_cmrz().is_cmrz {
                    Outcome::Positive
                } else {
                    Outcome::Negative
                },
            ));
            v
        }
        ModelFile::Fifo { machine, init, .. } => trees(&FifoSystem::new(machine, init.clone()), budget),
    }
}

#[test]
fn exit_codes_and_json_agree_with_the_library_on_the_corpus() {
    for (stem, src) in corpus::ALL {
        let model = corpus::load(src);
        for budget in [1usize, 3, 10_000] {
            for (analysis, outcome) in library_outcomes(&model, budget) {
                let b = budget.to_string();
                let (code, v) = json(analysis, &model_path(stem), &["--budget", &b]);
                assert_eq!(v["outcome"], outcome_name(outcome), "{stem} {analysis} {budget}");
                assert_eq!(code, if outcome == Outcome::Inconclusive { 2 } else { 0 });
            }
        }
    }
    let queries = [
        ("m7", "q2:(0)"),
        ("m7", "q1:(1)"),
        ("m8", "q2:(3)"),
        ("m8", "q1:(1)"),
        ("m6", "q1:(0)"),
    ];
    for (stem, target) in queries {
        let ModelFile::Counter { machine, init } = corpus::load(corpus::ALL.iter().find(|e| e.0 == stem).unwrap().1)
        else {
            unreachable!()
        };
        let (code, v) = json("x0-cover", &model_path(stem), &["--target", target, "--budget", "3000"]);
        let (q, vals) = target.split_once(':').unwrap();
        let n: u64 = vals.trim_matches(|c| c == '(' || c == ')').parse().unwrap();
        let y = bwsts::CounterConfig::new(machine.control_id(q).unwrap(), vec![n]);
        let lib = x0_coverability(&machine, &init, &y, 3000, false);
        assert_eq!(v["outcome"], outcome_name(lib.outcome), "{stem} {target}");
        assert_eq!(code, if lib.is_inconclusive() { 2 } else { 0 });
    }
}

#[test]
fn random_machines_agree_through_the_model_format() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..15 {
        let machine = common::random_counter_machine(&mut rng, 0.2);
        let model = ModelFile::Counter {
            init: machine.initial_config(),
            machine,
        };
        let text = print_model(&model);
        assert_eq!(parse_model(&text).unwrap(), model);
        let p = dir.path().join(format!("r{i}.model"));
        std::fs::write(&p, &text).unwrap();
        for (analysis, outcome) in library_outcomes(&model, 200) {
            let (_, v) = json(analysis, &p, &["--budget", "200"]);
            assert_eq!(v["outcome"], outcome_name(outcome), "{text}");
        }
    }
}

#[test]
fn corpus_round_trips() {
    for (stem, src) in corpus::ALL {
        let once = parse_model(src).unwrap();
        let twice = parse_model(&print_model(&once)).unwrap();
        assert_eq!(once, twice, "{stem}");
    }
}

fn product_of(stem_or_path: &Path, extra: &[&str]) -> (i32, String, String) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("product.model");
    let mut args = vec!["product", stem_or_path.to_str().unwrap(), "-o", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let (code, _, err) = bwsts(&args);
    let text = std::fs::read_to_string(&out).unwrap_or_default();
    (code, text, err)
}

#[test]
fn m4_product_has_six_controls_and_terminates() {
    let (code, text, _) = product_of(&model_path("m4"), &[]);
    assert_eq!(code, 0);
    assert!(text.contains("# letter_map"));
    let ModelFile::Fifo { machine, .. } = parse_model(&text).unwrap() else {
        panic!("fifo product expected")
    };
    assert_eq!(machine.controls.len(), 6);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.model");
    std::fs::write(&p, &text).unwrap();
    let (code, out, _) = check("termination", &p, &[]);
    assert_eq!(code, 0);
    assert!(out.contains(": TERMINATING"), "{out}");
    let (_, out, _) = check("boundedness", &p, &[]);
    assert!(out.contains(": BOUNDED"), "{out}");
}

#[test]
fn m3_product_terminates() {
    let (code, text, _) = product_of(&model_path("m3"), &[]);
    assert_eq!(code, 0);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.model");
    std::fs::write(&p, &text).unwrap();
    let (code, out, _) = check("termination", &p, &[]);
    assert_eq!(code, 0);
    assert!(out.contains(": TERMINATING"), "{out}");
}

#[test]
fn no_receive_product_is_the_original_up_to_annotation() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("send.model");
    let src = "fifo send\nstates p q\nchannels c\nalphabet a\np -- c!a --> p\np -- c!a --> q\nbound c: (a)\ninit p\n";
    std::fs::write(&p, src).unwrap();
    let (code, text, _) = product_of(&p, &[]);
    assert_eq!(code, 0);
    let ModelFile::Fifo { machine, .. } = parse_model(&text).unwrap() else {
        panic!()
    };
    let stripped: Vec<&str> = machine.controls.iter().map(|c| c.split('.').next().unwrap()).collect();
    assert_eq!(stripped, ["p", "q"]);
    assert_eq!(machine.transitions.len(), 2);
    let ModelFile::Fifo { machine: orig, .. } = parse_model(src).unwrap() else {
        panic!()
    };
    for (t, o) in machine.transitions.iter().zip(&orig.transitions) {
        assert_eq!(t.action, o.action);
        assert_eq!(stripped[t.source], orig.controls[o.source]);
        assert_eq!(stripped[t.target], orig.controls[o.target]);
    }
}

#[test]
fn product_without_bound_is_a_usage_error() {
    let (code, _, err) = product_of(&model_path("m2"), &[]);
    assert_eq!(code, 1);
    assert!(err.contains("no bound clause"), "{err}");
    let (code, _, _) = product_of(&model_path("m8"), &[]);
    assert_eq!(code, 1);
}

#[test]
fn pruning_can_be_disabled() {
    let (_, pruned, _) = product_of(&model_path("m3"), &[]);
    let (_, full, _) = product_of(&model_path("m3"), &["--no-prune"]);
    let count = |t: &str| match parse_model(t).unwrap() {
        ModelFile::Fifo { machine, .. } => machine.controls.len(),
        _ => 0,
    };
    assert!(count(&full) >= count(&pruned));
}
