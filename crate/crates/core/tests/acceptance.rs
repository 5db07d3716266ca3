//! One PASS/FAIL line per acceptance criterion.
//!
//! Run with `cargo test -p abt-edit --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use abt_edit::abt::{alpha_eq, check_well_formed, parse_tree, Abstraction, Abt, WellFormedTree};
use abt_edit::encoding::{encode_abt, encode_editor_expr, render_tree_term, EncodingEnv};
use abt_edit::engine::{parse_editor_expr, run, step, Config, RunOutcome, StepLabel, StepOutcome};
use abt_edit::gen::{random_apc, random_condition, random_script, random_tree, random_wf_tree, GenConfig};
use abt_edit::harness::{render_report, run_suite, SuiteOptions, SuiteSummary};
use abt_edit::lambda::{eval, typecheck, Type, TypeEnv};
use abt_edit::language::{Literal, Sort, LETLANG};
use abt_edit::logic::{brute_force_satisfies, parse_condition, satisfies};
use abt_edit::zipper::{apply_command, Apc, StuckReason};
use abt_edit::LanguageSpec;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn spec() -> LanguageSpec {
    LanguageSpec::load(LETLANG).unwrap().editor_extend().unwrap()
}

fn wf(text: &str, spec: &LanguageSpec) -> WellFormedTree {
    check_well_formed(&parse_tree(text, spec).unwrap(), spec).unwrap()
}

fn worked_examples(spec: &LanguageSpec) -> Outcome {
    let mut failures = Vec::new();

    // The let statement with nested lets is a well-sorted tree.
    let stmt = "(op let (op num 5) (bind (x) (op let (op num 10) (bind (y) (cursor (op exp (op plus (var x) (var y))))))))";
    if parse_tree(stmt, spec).and_then(|a| check_well_formed(&a, spec)).is_err() {
        failures.push("nested let does not sort-check".to_string());
    }

    // `@hole_e => {plus}.nil | nil` on an e-hole: an ε step, a {plus} step,
    // then a terminal configuration, three calls to `step` in all.
    let script = parse_editor_expr("@hole_e => {plus}.nil | nil").unwrap();
    let mut config = Config::new(script.clone(), wf("(cursor (hole e))", spec)).unwrap();
    let mut labels = Vec::new();
    let mut calls = 0;
    loop {
        calls += 1;
        match step(&config, spec) {
            StepOutcome::Step(l, next) => {
                labels.push(l);
                config = next;
            }
            StepOutcome::Terminal => break,
            StepOutcome::Stuck(s) => {
                failures.push(format!("plus script stuck: {s}"));
                break;
            }
        }
        if calls > 10 {
            break;
        }
    }
    let want = [StepLabel::Silent, StepLabel::Command(Apc::insert("plus"))];
    if calls != 3 || labels != want || config.tree().to_string() != "(cursor (op plus (hole e) (hole e)))" {
        failures.push(format!("plus script: {calls} steps, labels {labels:?}, tree {}", config.tree()));
    }
    let r = run(Config::new(script, wf("(cursor (hole e))", spec)).unwrap(), spec, 10);
    if r.outcome != RunOutcome::Terminal || r.steps() != 2 {
        failures.push("plus script through run".into());
    }

    // The cursor can sit on the let or on its bound expression.
    for t in [
        "(op let (cursor (hole e)) (bind (x) (op exp (op plus (var x) (op num 5)))))",
        "(cursor (op let (hole e) (bind (x) (op exp (op plus (var x) (op num 5))))))",
    ] {
        if parse_tree(t, spec).and_then(|a| check_well_formed(&a, spec)).is_err() {
            failures.push(format!("not well-formed: {t}"));
        }
    }
    let two = "(cursor (op let (cursor (hole e)) (bind (x) (op exp (var x)))))";
    if parse_tree(two, spec).and_then(|a| check_well_formed(&a, spec)).is_ok() {
        failures.push("two cursors accepted".into());
    }

    // Inserting a statement at an expression hole gets stuck.
    let t = wf("(op let (cursor (hole e)) (bind (x) (op exp (var x))))", spec);
    match apply_command(&t, &Apc::insert("let"), spec) {
        Err(s) if s.reason == StuckReason::SortMismatch => {}
        other => failures.push(format!("{{let}} at an e-hole: {other:?}")),
    }
    let r = run(Config::new(parse_editor_expr("{let}.nil").unwrap(), t).unwrap(), spec, 10);
    if !matches!(r.outcome, RunOutcome::Stuck(ref s) if s.reason == StuckReason::SortMismatch) {
        failures.push("{let}.nil does not get stuck".into());
    }

    // The encoding of `let x = cursor(hole_e) in x + 5`, literally as
    // printed: the body is an expression where the valence wants a
    // statement, so only its shape is compared.
    let env = EncodingEnv::new(spec, &Sort::new("s")).unwrap();
    let literal = Abt::op(
        "let",
        vec![
            Abstraction::plain(Abt::cursor(&Sort::new("e"), Abt::hole(&Sort::new("e")))),
            Abstraction::bind(
                [("x", "e")],
                Abt::app("plus", vec![Abt::var("x"), Abt::lit("num", Literal::Int(5))]),
            ),
        ],
    );
    let shape = encode_abt(&literal, &env).map(|t| render_tree_term(&t, spec));
    if shape.as_deref() != Ok("let (cursor_e hole_e) (λx. plus (var x) (num 5))") {
        failures.push(format!("encoded shape: {shape:?}"));
    }
    // The well-sorted version needs `exp` around the body, and typechecks.
    let sorted = wf("(op let (cursor (hole e)) (bind (x) (op exp (op plus (var x) (op num 5)))))", spec);
    match encode_abt(sorted.tree(), &env) {
        Ok(t) => {
            let shape = render_tree_term(&t, spec);
            if shape != "let (cursor_e hole_e) (λx. exp (plus (var x) (num 5)))" {
                failures.push(format!("sorted shape: {shape}"));
            }
            if typecheck(&t, &TypeEnv::new(), spec) != Ok(Type::base("s")) {
                failures.push("sorted encoding does not typecheck at s".into());
            }
        }
        Err(e) => failures.push(format!("sorted encoding: {e}")),
    }

    if failures.is_empty() {
        return outcome(true, "let statements, cursor placement, plus script, stuck let insert, encoded shape");
    }
    outcome(false, failures.join("; "))
}

/// The fixed transition corpus shared by the preservation and inverse checks.
fn corpus(spec: &LanguageSpec, n: usize) -> Vec<(WellFormedTree, Apc)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let cfg = GenConfig::default();
    (0..n)
        .map(|_| {
            let root = spec.sorts()[rng.gen_range(0..spec.sorts().len())].clone();
            let t = random_wf_tree(spec, &root, 8, &mut rng);
            (t, random_apc(spec, &cfg, &mut rng))
        })
        .collect()
}

fn preservation(spec: &LanguageSpec, corpus: &[(WellFormedTree, Apc)]) -> Outcome {
    let mut stepped = 0;
    let mut bad = Vec::new();
    for (t, cmd) in corpus {
        if let Ok(next) = apply_command(t, cmd, spec) {
            stepped += 1;
            let ok = next.tree().count_cursors() == 1
                && check_well_formed(next.tree(), spec).is_ok_and(|c| c.sort() == t.sort());
            if !ok {
                bad.push(format!("{t} --{cmd}--> {next}"));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{} transitions, {stepped} non-stuck, {} violations {}", corpus.len(), bad.len(), bad.first().map_or("", |s| s)),
    )
}

fn inverse_laws(spec: &LanguageSpec, corpus: &[(WellFormedTree, Apc)]) -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for (t, _) in corpus {
        for i in 1..=3 {
            if let Ok(down) = apply_command(t, &Apc::Child(i), spec) {
                checked += 1;
                match apply_command(&down, &Apc::Parent, spec) {
                    Ok(back) if alpha_eq(back.tree(), t.tree()) => {}
                    other => bad.push(format!("child {i}; parent on {t}: {other:?}")),
                }
            }
        }
        if let Ok(up) = apply_command(t, &Apc::Parent, spec) {
            checked += 1;
            let i = t.cursor_path().last().unwrap() + 1;
            match apply_command(&up, &Apc::Child(i), spec) {
                Ok(back) if alpha_eq(back.tree(), t.tree()) => {}
                other => bad.push(format!("parent; child {i} on {t}: {other:?}")),
            }
        }
    }
    outcome(bad.is_empty(), format!("{checked} round trips, {} violations", bad.len()))
}

fn logic_oracle(spec: &LanguageSpec) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x10C1C);
    let cfg = GenConfig {
        condition_size: 5,
        ..GenConfig::default()
    };
    let mut disagreements = Vec::new();
    let mut holds = 0;
    for _ in 0..5_000 {
        let sort = spec.sorts()[rng.gen_range(0..spec.sorts().len())].clone();
        let a = random_tree(spec, &sort, 6, &mut rng);
        let phi = random_condition(spec, &cfg, &mut rng);
        let fast = satisfies(&a, &phi, spec).unwrap();
        let slow = brute_force_satisfies(&a, &phi, spec).unwrap();
        holds += fast as usize;
        if fast != slow {
            disagreements.push(format!("{phi} on {a}"));
        }
    }
    outcome(
        disagreements.is_empty(),
        format!("5000 pairs, {holds} satisfied, {} disagreements", disagreements.len()),
    )
}

fn encoding_typing(spec: &LanguageSpec) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7E9E);
    let envs: Vec<EncodingEnv> = spec.sorts().iter().map(|s| EncodingEnv::new(spec, s).unwrap()).collect();
    let mut failures = Vec::new();
    for _ in 0..1_000 {
        let i = rng.gen_range(0..envs.len());
        let sort = &spec.sorts()[i];
        let a = random_tree(spec, sort, 8, &mut rng);
        match encode_abt(&a, &envs[i]) {
            Ok(t) if typecheck(&t, &TypeEnv::new(), spec) == Ok(Type::Base(sort.clone())) => {}
            other => failures.push(format!("tree {a}: {other:?}")),
        }
    }
    let cfg = GenConfig {
        named_conditions: false,
        ..GenConfig::default()
    };
    for _ in 0..500 {
        let i = rng.gen_range(0..envs.len());
        let env = &envs[i];
        let e = random_script(spec, &cfg, &mut rng);
        let ctx = env.ctx_type(env.root());
        match encode_editor_expr(&e, env.root(), env) {
            Ok(t) if typecheck(&t, &TypeEnv::new(), spec) == Ok(Type::arrow(ctx.clone(), ctx)) => {}
            Ok(t) => failures.push(format!("script {e}: {:?}", typecheck(&t, &TypeEnv::new(), spec))),
            Err(err) => failures.push(format!("script {e}: {err}")),
        }
    }
    outcome(
        failures.is_empty(),
        format!("1000 trees, 500 scripts, {} failures {}", failures.len(), failures.first().map_or("", |s| s)),
    )
}

fn soundness(spec: &LanguageSpec) -> Outcome {
    let opts = SuiteOptions {
        cases: 500,
        seed: 0,
        fuel: 1_000,
        ..SuiteOptions::default()
    };
    let start = Instant::now();
    let summary = SuiteSummary::from_reports(&run_suite(spec, &opts));
    let took = start.elapsed();
    let canary = SuiteSummary::from_reports(&run_suite(spec, &SuiteOptions { mutate: true, ..opts }));
    outcome(
        summary.mismatch == 0 && canary.mismatch >= 1 && took < Duration::from_secs(120),
        format!("{summary} in {took:.1?}; canary: {} mismatch", canary.mismatch),
    )
}

fn determinism(spec: &LanguageSpec) -> Outcome {
    let opts = SuiteOptions {
        cases: 100,
        seed: 42,
        ..SuiteOptions::default()
    };
    let suite_same = render_report(&run_suite(spec, &opts)) == render_report(&run_suite(spec, &opts));

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = GenConfig::default();
    let mut traces_same = true;
    let mut evals_same = true;
    for _ in 0..200 {
        let root = spec.sorts()[rng.gen_range(0..spec.sorts().len())].clone();
        let t = random_wf_tree(spec, &root, 6, &mut rng);
        let e = random_script(spec, &cfg, &mut rng);
        let once = || {
            let r = run(Config::new(e.clone(), t.clone()).unwrap(), spec, 200);
            let trace: Vec<String> = r.trace.iter().map(|x| format!("{} {}", x.label, x.tree)).collect();
            format!("{:?} {}", r.outcome, trace.join("\n"))
        };
        traces_same &= once() == once();
        let env = EncodingEnv::new(spec, &root).unwrap();
        let a = random_tree(spec, &root, 6, &mut rng);
        let term = encode_abt(&a, &env).unwrap();
        let show = || eval(&term, spec, 10_000).map(|v| v.to_string()).map_err(|e| e.to_string());
        evals_same &= show() == show();
    }
    let q = parse_condition("<>plus").unwrap();
    let t = wf("(cursor (op plus (hole e) (op num 1)))", spec);
    let queries_same = satisfies(t.focus(), &q, spec) == satisfies(t.focus(), &q, spec);
    outcome(
        suite_same && traces_same && evals_same && queries_same,
        format!("suite {suite_same}, traces {traces_same}, eval {evals_same}, query {queries_same}"),
    )
}

fn timed(name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    let took = start.elapsed();
    let in_time = limit.is_none_or(|l| took < l);
    let ok = o.ok && in_time;
    let budget = limit.map_or(String::new(), |l| format!(" / {l:?}"));
    println!(
        "{} {name}: {} [{took:.2?}{budget}]",
        if ok { "PASS" } else { "FAIL" },
        o.detail
    );
    ok
}

#[test]
fn acceptance() {
    let handle = std::thread::Builder::new()
        .stack_size(256 << 20)
        .spawn(|| {
            let spec = spec();
            let corpus = corpus(&spec, 10_000);
            let results = [
                timed("worked examples", Some(Duration::from_secs(1)), || worked_examples(&spec)),
                timed("well-formedness preservation", Some(Duration::from_secs(30)), || {
                    preservation(&spec, &corpus)
                }),
                timed("zipper inverse laws", None, || inverse_laws(&spec, &corpus)),
                timed("logic oracle equivalence", None, || logic_oracle(&spec)),
                timed("encoding typing coherence", None, || encoding_typing(&spec)),
                timed("encoding soundness", None, || soundness(&spec)),
                timed("determinism", None, || determinism(&spec)),
            ];
            results.iter().filter(|ok| !**ok).count()
        })
        .unwrap();
    let failed = handle.join().unwrap();
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
