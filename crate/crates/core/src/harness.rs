//! Differential check of the direct semantics against the encoding.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::abt::{alpha_eq, WellFormedTree};
use crate::encoding::{decode_context, encode_editor_expr, encode_root_context, EncodingEnv};
use crate::engine::{run, Config, EditorExpr, RunOutcome};
use crate::gen::{random_script, random_wf_tree, GenConfig};
use crate::lambda::{typecheck, EvalError, Evaluator, Term, TypeEnv};
use crate::language::LanguageSpec;
use crate::zipper::StuckReason;

/// Reductions allowed to the encoded run per unit of direct fuel.
pub const ENCODED_FUEL_FACTOR: usize = 2_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum CaseStatus {
    /// Both runs end in the same tree.
    Match,
    /// The direct run terminated and the encoded one disagrees.
    Mismatch,
    /// The direct run is stuck and the encoded run fails to match.
    StuckAgree,
    /// The direct run is stuck and the encoded run does not fail.
    StuckOnly,
    /// The direct run ran out of fuel; nothing is compared.
    Fuel,
}

impl fmt::Display for CaseStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseStatus::Match => "MATCH",
            CaseStatus::Mismatch => "MISMATCH",
            CaseStatus::StuckAgree => "STUCK-AGREE",
            CaseStatus::StuckOnly => "STUCK-ONLY",
            CaseStatus::Fuel => "FUEL",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseReport {
    pub status: CaseStatus,
    pub root: String,
    pub script: String,
    pub tree: String,
    /// `terminal`, `stuck:<reason>` or `fuel`.
    pub direct: String,
    pub direct_steps: usize,
    /// Labels of the direct run, `ε` for silent steps.
    pub direct_trace: Vec<String>,
    /// The direct final tree, when it terminated.
    pub direct_tree: Option<String>,
    /// The decoded encoded result, `match-failure`, `fuel`, `skipped` or an
    /// error description.
    pub encoded: String,
    pub encoded_steps: usize,
}

impl fmt::Display for CaseReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} direct={} steps={} encoded-steps={} root={} script={} tree={}",
            self.status, self.direct, self.direct_steps, self.encoded_steps, self.root, self.script, self.tree
        )
    }
}

/// Runs `expr` on `tree` directly and through the encoding and compares.
pub fn check_soundness(expr: &EditorExpr, tree: &WellFormedTree, fuel: usize, env: &EncodingEnv) -> CaseReport {
    let spec = env.spec();
    let direct = run(
        Config::new(expr.clone(), tree.clone()).expect("closed scripts"),
        spec,
        fuel,
    );
    let mut report = CaseReport {
        status: CaseStatus::Fuel,
        root: env.root().to_string(),
        script: expr.to_string(),
        tree: tree.to_string(),
        direct: match &direct.outcome {
            RunOutcome::Terminal => "terminal".into(),
            RunOutcome::Stuck(s) => format!("stuck:{}", s.reason.code()),
            RunOutcome::FuelExhausted => "fuel".into(),
        },
        direct_steps: direct.steps(),
        direct_trace: direct.trace.iter().map(|e| e.label.to_string()).collect(),
        direct_tree: matches!(direct.outcome, RunOutcome::Terminal).then(|| direct.last.tree().to_string()),
        encoded: "skipped".into(),
        encoded_steps: 0,
    };
    if direct.outcome == RunOutcome::FuelExhausted {
        return report;
    }

    let encoded = encode_editor_expr(expr, env.root(), env)
        .and_then(|f| Ok(Term::app(f, encode_root_context(tree, env)?)));
    let term = match encoded {
        Ok(term) => term,
        Err(e) => {
            report.encoded = format!("encoding failed: {e}");
            report.status = match &direct.outcome {
                RunOutcome::Stuck(s) if s.reason == StuckReason::UnknownOperator => CaseStatus::StuckAgree,
                RunOutcome::Stuck(_) => CaseStatus::StuckOnly,
                _ => CaseStatus::Mismatch,
            };
            return report;
        }
    };
    let ctx = env.ctx_type(env.root());
    match typecheck(&term, &TypeEnv::new(), spec) {
        Ok(ty) if ty == ctx => {}
        Ok(ty) => {
            report.encoded = format!("ill-typed: {ty}");
            report.status = CaseStatus::Mismatch;
            return report;
        }
        Err(e) => {
            report.encoded = format!("ill-typed: {e}");
            report.status = CaseStatus::Mismatch;
            return report;
        }
    }

    let mut ev = Evaluator::new(spec, fuel.max(1).saturating_mul(ENCODED_FUEL_FACTOR));
    let result = ev.eval(&term);
    report.encoded_steps = ev.steps();
    let decoded = result.as_ref().map_err(Clone::clone).map(|v| decode_context(v, env));
    report.encoded = match &decoded {
        Ok(Ok(a)) => crate::abt::print_tree(a),
        Ok(Err(e)) => format!("not a tree: {e}"),
        Err(EvalError::MatchFailure) => "match-failure".into(),
        Err(EvalError::FuelExhausted) => "fuel".into(),
        Err(e) => e.to_string(),
    };
    report.status = match (&direct.outcome, &decoded) {
        (RunOutcome::Terminal, Ok(Ok(a))) if alpha_eq(a, direct.last.tree().tree()) => CaseStatus::Match,
        (RunOutcome::Terminal, _) => CaseStatus::Mismatch,
        (RunOutcome::Stuck(_), Err(EvalError::MatchFailure)) => CaseStatus::StuckAgree,
        (RunOutcome::Stuck(_), _) => CaseStatus::StuckOnly,
        (RunOutcome::FuelExhausted, _) => unreachable!("returned above"),
    };
    report
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub cases: usize,
    pub seed: u64,
    pub fuel: usize,
    pub mutate: bool,
    pub gen: GenConfig,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            cases: 500,
            seed: 0,
            fuel: 1_000,
            mutate: false,
            gen: GenConfig {
                max_depth: 6,
                script_size: 12,
                named_conditions: false,
                invalid_inserts: false,
                ..GenConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SuiteSummary {
    pub cases: usize,
    pub matched: usize,
    pub mismatch: usize,
    pub stuck_agree: usize,
    pub stuck_only: usize,
    pub fuel: usize,
}

impl SuiteSummary {
    pub fn from_reports(reports: &[CaseReport]) -> Self {
        let mut s = SuiteSummary {
            cases: reports.len(),
            ..Default::default()
        };
        for r in reports {
            match r.status {
                CaseStatus::Match => s.matched += 1,
                CaseStatus::Mismatch => s.mismatch += 1,
                CaseStatus::StuckAgree => s.stuck_agree += 1,
                CaseStatus::StuckOnly => s.stuck_only += 1,
                CaseStatus::Fuel => s.fuel += 1,
            }
        }
        s
    }
}

impl fmt::Display for SuiteSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} cases: {} match, {} stuck-agree, {} fuel, {} mismatch",
            self.cases, self.matched, self.stuck_agree, self.fuel, self.mismatch
        )?;
        if self.stuck_only > 0 {
            write!(f, ", {} stuck-only", self.stuck_only)?;
        }
        Ok(())
    }
}

/// The case list for a seed: per case, a root sort, a tree and a script.
pub fn generate_cases(spec: &LanguageSpec, opts: &SuiteOptions) -> Vec<(EditorExpr, WellFormedTree)> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    (0..opts.cases)
        .map(|_| {
            let root = spec.sorts()[rng.gen_range(0..spec.sorts().len())].clone();
            let tree = random_wf_tree(spec, &root, opts.gen.max_depth, &mut rng);
            let script = random_script(spec, &opts.gen, &mut rng);
            (script, tree)
        })
        .collect()
}

/// Runs a seeded suite. Cases run on worker threads; reports come back in
/// case order.
pub fn run_suite(spec: &LanguageSpec, opts: &SuiteOptions) -> Vec<CaseReport> {
    let cases = generate_cases(spec, opts);
    let envs: Vec<EncodingEnv> = spec
        .sorts()
        .iter()
        .map(|s| {
            EncodingEnv::new(spec, s)
                .expect("editor-extended spec")
                .with_mutation(opts.mutate)
        })
        .collect();
    let env_for = |t: &WellFormedTree| {
        let i = spec.sorts().iter().position(|s| s == t.sort()).expect("root sort");
        &envs[i]
    };
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).clamp(1, 8);
    let next = AtomicUsize::new(0);
    let mut slots: Vec<Option<CaseReport>> = vec![None; cases.len()];
    let results: Vec<Vec<(usize, CaseReport)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                std::thread::Builder::new()
                    .stack_size(256 << 20)
                    .spawn_scoped(scope, || {
                        let mut out = Vec::new();
                        loop {
                            let i = next.fetch_add(1, Ordering::Relaxed);
                            let Some((script, tree)) = cases.get(i) else { break };
                            out.push((i, check_soundness(script, tree, opts.fuel, env_for(tree))));
                        }
                        out
                    })
                    .expect("spawn worker")
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    for (i, r) in results.into_iter().flatten() {
        slots[i] = Some(r);
    }
    slots.into_iter().map(|r| r.expect("every case ran")).collect()
}

/// The report file: one line per case, then the summary as JSON.
pub fn render_report(reports: &[CaseReport]) -> String {
    let mut out = String::new();
    for (i, r) in reports.iter().enumerate() {
        out.push_str(&format!("{i:04} {r}\n"));
    }
    let summary = SuiteSummary::from_reports(reports);
    out.push_str(&serde_json::to_string(&summary).expect("plain struct"));
    out.push('\n');
    out
}
