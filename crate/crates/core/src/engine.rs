//! Editor expressions and their labelled small-step semantics.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::abt::WellFormedTree;
use crate::language::Literal;
use crate::logic::{parse_or, satisfies, Condition};
use crate::syntax::{SyntaxError, Token, Tokens};
use crate::zipper::{apply_command, Apc, Stuck, StuckReason};
use crate::LanguageSpec;

/// Default step bound for runs.
pub const DEFAULT_FUEL: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EditorExpr {
    Prefix(Apc, Box<EditorExpr>),
    Cond(Condition, Box<EditorExpr>, Box<EditorExpr>),
    Seq(Box<EditorExpr>, Box<EditorExpr>),
    Rec(String, Box<EditorExpr>),
    RecVar(String),
    Nil,
}

impl EditorExpr {
    pub fn prefix(cmd: Apc, then: EditorExpr) -> Self {
        EditorExpr::Prefix(cmd, Box::new(then))
    }

    pub fn cond(phi: Condition, yes: EditorExpr, no: EditorExpr) -> Self {
        EditorExpr::Cond(phi, Box::new(yes), Box::new(no))
    }

    pub fn seq(first: EditorExpr, second: EditorExpr) -> Self {
        EditorExpr::Seq(Box::new(first), Box::new(second))
    }

    pub fn rec(var: impl Into<String>, body: EditorExpr) -> Self {
        EditorExpr::Rec(var.into(), Box::new(body))
    }

    pub fn var(var: impl Into<String>) -> Self {
        EditorExpr::RecVar(var.into())
    }

    /// Runs `cmds` in order, then `nil`.
    pub fn commands(cmds: impl IntoIterator<Item = Apc, IntoIter: DoubleEndedIterator>) -> Self {
        cmds.into_iter()
            .rev()
            .fold(EditorExpr::Nil, |acc, c| EditorExpr::prefix(c, acc))
    }

    /// First unbound recursion variable, if any.
    pub fn free_var(&self) -> Option<&str> {
        fn go<'a>(e: &'a EditorExpr, bound: &mut Vec<&'a str>) -> Option<&'a str> {
            match e {
                EditorExpr::Nil => None,
                EditorExpr::RecVar(x) => (!bound.contains(&x.as_str())).then_some(x.as_str()),
                EditorExpr::Prefix(_, k) => go(k, bound),
                EditorExpr::Cond(_, a, b) | EditorExpr::Seq(a, b) => {
                    go(a, bound).or_else(|| go(b, bound))
                }
                EditorExpr::Rec(x, body) => {
                    bound.push(x);
                    let r = go(body, bound);
                    bound.pop();
                    r
                }
            }
        }
        go(self, &mut Vec::new())
    }

    pub fn is_closed(&self) -> bool {
        self.free_var().is_none()
    }

    /// `self[var := with]`. Recursion variables live apart from tree
    /// binders, and `with` is closed whenever it is used here, so no
    /// renaming is needed.
    pub fn substitute(&self, var: &str, with: &EditorExpr) -> EditorExpr {
        match self {
            EditorExpr::Nil => EditorExpr::Nil,
            EditorExpr::RecVar(x) if x == var => with.clone(),
            EditorExpr::RecVar(_) => self.clone(),
            EditorExpr::Prefix(c, k) => EditorExpr::prefix(c.clone(), k.substitute(var, with)),
            EditorExpr::Cond(phi, a, b) => {
                EditorExpr::cond(phi.clone(), a.substitute(var, with), b.substitute(var, with))
            }
            EditorExpr::Seq(a, b) => EditorExpr::seq(a.substitute(var, with), b.substitute(var, with)),
            EditorExpr::Rec(x, _) if x == var => self.clone(),
            EditorExpr::Rec(x, body) => EditorExpr::rec(x.clone(), body.substitute(var, with)),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            EditorExpr::Nil | EditorExpr::RecVar(_) => 1,
            EditorExpr::Prefix(_, k) | EditorExpr::Rec(_, k) => 1 + k.size(),
            EditorExpr::Cond(_, a, b) | EditorExpr::Seq(a, b) => 1 + a.size() + b.size(),
        }
    }
}

impl fmt::Display for EditorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EditorExpr::Nil => f.write_str("nil"),
            EditorExpr::RecVar(x) => f.write_str(x),
            EditorExpr::Prefix(c, k) => write!(f, "{c}. {}", Atom(k)),
            EditorExpr::Cond(phi, a, b) => write!(f, "({phi}) => {} | {}", Atom(a), Atom(b)),
            EditorExpr::Seq(a, b) => write!(f, "{} >> {}", Atom(a), Atom(b)),
            EditorExpr::Rec(x, body) => write!(f, "rec {x}. {}", Atom(body)),
        }
    }
}

struct Atom<'a>(&'a EditorExpr);

impl fmt::Display for Atom<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            EditorExpr::Nil | EditorExpr::RecVar(_) | EditorExpr::Prefix(..) => write!(f, "{}", self.0),
            other => write!(f, "({other})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "command", rename_all = "lowercase")]
pub enum StepLabel {
    Silent,
    Command(#[serde(serialize_with = "crate::engine::ser_display")] Apc),
}

pub(crate) fn ser_display<T: fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl fmt::Display for StepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepLabel::Silent => f.write_str("ε"),
            StepLabel::Command(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("recursion variable `{0}` is unbound")]
    Open(String),
}

/// A closed editor expression paired with a well-formed tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    expr: EditorExpr,
    tree: WellFormedTree,
}

impl Config {
    pub fn new(expr: EditorExpr, tree: WellFormedTree) -> Result<Self, ConfigError> {
        if let Some(x) = expr.free_var() {
            return Err(ConfigError::Open(x.to_owned()));
        }
        Ok(Config { expr, tree })
    }

    pub fn expr(&self) -> &EditorExpr {
        &self.expr
    }

    pub fn tree(&self) -> &WellFormedTree {
        &self.tree
    }

    pub fn is_terminal(&self) -> bool {
        self.expr == EditorExpr::Nil
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum StepOutcome {
    Step(StepLabel, Config),
    Terminal,
    Stuck(Stuck),
}

/// One transition.
pub fn step(c: &Config, spec: &LanguageSpec) -> StepOutcome {
    match step_expr(&c.expr, &c.tree, spec) {
        Ok(Some((label, expr, tree))) => StepOutcome::Step(label, Config { expr, tree }),
        Ok(None) => StepOutcome::Terminal,
        Err(stuck) => StepOutcome::Stuck(stuck),
    }
}

type Successor = (StepLabel, EditorExpr, WellFormedTree);

fn step_expr(
    e: &EditorExpr,
    t: &WellFormedTree,
    spec: &LanguageSpec,
) -> Result<Option<Successor>, Stuck> {
    match e {
        EditorExpr::Nil => Ok(None),
        EditorExpr::Cond(phi, yes, no) => {
            let holds = satisfies(t.focus(), phi, spec).map_err(|err| Stuck {
                reason: StuckReason::UnknownOperator,
                detail: err.to_string(),
            })?;
            let next = if holds { yes } else { no };
            Ok(Some((StepLabel::Silent, (**next).clone(), t.clone())))
        }
        EditorExpr::Seq(first, second) => {
            if **first == EditorExpr::Nil {
                return Ok(Some((StepLabel::Silent, (**second).clone(), t.clone())));
            }
            let (label, first, tree) =
                step_expr(first, t, spec)?.expect("a non-nil expression is never terminal");
            Ok(Some((label, EditorExpr::seq(first, (**second).clone()), tree)))
        }
        EditorExpr::Rec(x, body) => Ok(Some((StepLabel::Silent, body.substitute(x, e), t.clone()))),
        EditorExpr::Prefix(cmd, then) => {
            let tree = apply_command(t, cmd, spec)?;
            Ok(Some((StepLabel::Command(cmd.clone()), (**then).clone(), tree)))
        }
        EditorExpr::RecVar(x) => unreachable!("configurations are closed, found free `{x}`"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    Terminal,
    Stuck(Stuck),
    FuelExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub label: StepLabel,
    pub tree: WellFormedTree,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub outcome: RunOutcome,
    /// The last configuration reached.
    pub last: Config,
    pub trace: Vec<TraceEntry>,
}

impl RunResult {
    pub fn steps(&self) -> usize {
        self.trace.len()
    }

    /// Labels of the non-silent steps.
    pub fn commands(&self) -> Vec<&Apc> {
        self.trace
            .iter()
            .filter_map(|e| match &e.label {
                StepLabel::Command(c) => Some(c),
                StepLabel::Silent => None,
            })
            .collect()
    }
}

/// Steps until terminal, stuck, or `fuel` steps have been taken.
pub fn run(c: Config, spec: &LanguageSpec, fuel: usize) -> RunResult {
    let mut cur = c;
    let mut trace = Vec::new();
    loop {
        if cur.is_terminal() {
            return RunResult {
                outcome: RunOutcome::Terminal,
                last: cur,
                trace,
            };
        }
        if trace.len() == fuel {
            return RunResult {
                outcome: RunOutcome::FuelExhausted,
                last: cur,
                trace,
            };
        }
        match step(&cur, spec) {
            StepOutcome::Step(label, next) => {
                trace.push(TraceEntry {
                    label,
                    tree: next.tree.clone(),
                });
                cur = next;
            }
            StepOutcome::Terminal => unreachable!("checked above"),
            StepOutcome::Stuck(stuck) => {
                return RunResult {
                    outcome: RunOutcome::Stuck(stuck),
                    last: cur,
                    trace,
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScriptError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("recursion variable `{0}` is unbound")]
    Unbound(String),
}

const KEYWORDS: [&str; 4] = ["nil", "child", "parent", "rec"];

/// Parses an editor script.
///
/// Grammar, loosest first: `E >> E` (right-associative), `phi => E | E`,
/// then the prefix forms `child n. E`, `parent. E`, `{op[:lit]}. E`,
/// `rec X. E`, plus `nil`, `X` and parentheses. `#` starts a comment.
pub fn parse_editor_expr(text: &str) -> Result<EditorExpr, ScriptError> {
    let mut toks = Tokens::lex(text)?;
    let e = parse_seq(&mut toks)?;
    if !toks.at_end() {
        return Err(toks.unexpected("end of script").into());
    }
    if let Some(x) = e.free_var() {
        return Err(ScriptError::Unbound(x.to_owned()));
    }
    Ok(e)
}

fn parse_seq(toks: &mut Tokens<'_>) -> Result<EditorExpr, SyntaxError> {
    let first = parse_cond(toks)?;
    if toks.peek_sym(">>") {
        toks.next();
        let rest = parse_seq(toks)?;
        return Ok(EditorExpr::seq(first, rest));
    }
    Ok(first)
}

fn starts_condition(toks: &Tokens<'_>) -> bool {
    matches!(toks.peek(), Some(Token::Sym("!" | "@" | "<>" | "[]")))
}

fn parse_cond(toks: &mut Tokens<'_>) -> Result<EditorExpr, SyntaxError> {
    let guard = if starts_condition(toks) {
        let phi = parse_or(toks)?;
        toks.expect_sym("=>")?;
        Some(phi)
    } else if toks.peek_sym("(") {
        // `(phi) => …` or a parenthesised expression
        let mark = toks.mark();
        match parse_or(toks) {
            Ok(phi) if toks.peek_sym("=>") => {
                toks.next();
                Some(phi)
            }
            _ => {
                toks.reset(mark);
                None
            }
        }
    } else {
        None
    };
    match guard {
        Some(phi) => {
            let yes = parse_cond(toks)?;
            toks.expect_sym("|")?;
            let no = parse_cond(toks)?;
            Ok(EditorExpr::cond(phi, yes, no))
        }
        None => parse_prefix(toks),
    }
}

fn parse_prefix(toks: &mut Tokens<'_>) -> Result<EditorExpr, SyntaxError> {
    match toks.peek().cloned() {
        Some(Token::Ident(word)) => match word.as_str() {
            "nil" => {
                toks.next();
                Ok(EditorExpr::Nil)
            }
            "child" => {
                toks.next();
                let n = match toks.next() {
                    Some(Token::Int(n)) if n >= 1 => n as usize,
                    _ => return Err(toks.error("expected a positive child index")),
                };
                toks.expect_sym(".")?;
                Ok(EditorExpr::prefix(Apc::Child(n), parse_cond(toks)?))
            }
            "parent" => {
                toks.next();
                toks.expect_sym(".")?;
                Ok(EditorExpr::prefix(Apc::Parent, parse_cond(toks)?))
            }
            "rec" => {
                toks.next();
                let x = toks.ident()?;
                if KEYWORDS.contains(&x.as_str()) {
                    return Err(toks.error(format!("`{x}` is a keyword")));
                }
                toks.expect_sym(".")?;
                Ok(EditorExpr::rec(x, parse_seq(toks)?))
            }
            _ => {
                toks.next();
                Ok(EditorExpr::var(word))
            }
        },
        Some(Token::Sym("{")) => {
            toks.next();
            let op = toks.ident()?;
            let literal = if toks.peek_sym(":") {
                toks.next();
                match toks.next() {
                    Some(Token::Int(n)) => Some(Literal::Int(n)),
                    Some(Token::Ident(x)) => Some(Literal::Name(x)),
                    _ => return Err(toks.error("expected a literal after `:`")),
                }
            } else {
                None
            };
            toks.expect_sym("}")?;
            toks.expect_sym(".")?;
            Ok(EditorExpr::prefix(Apc::Insert { op, literal }, parse_cond(toks)?))
        }
        Some(Token::Sym("(")) => {
            toks.next();
            let e = parse_seq(toks)?;
            toks.expect_sym(")")?;
            Ok(e)
        }
        _ => Err(toks.unexpected("an editor expression")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abt::{alpha_eq, check_well_formed, parse_tree};
    use crate::language::LETLANG;

    fn spec() -> LanguageSpec {
        LanguageSpec::load(LETLANG).unwrap().editor_extend().unwrap()
    }

    fn wf(text: &str) -> WellFormedTree {
        let spec = spec();
        check_well_formed(&parse_tree(text, &spec).unwrap(), &spec).unwrap()
    }

    fn config(script: &str, tree: &str) -> Config {
        Config::new(parse_editor_expr(script).unwrap(), wf(tree)).unwrap()
    }

    #[test]
    fn parses_conditional_script() {
        let e = parse_editor_expr("@hole_e => {plus}.nil | nil").unwrap();
        assert_eq!(
            e,
            EditorExpr::cond(
                Condition::at("hole_e"),
                EditorExpr::prefix(Apc::insert("plus"), EditorExpr::Nil),
                EditorExpr::Nil
            )
        );
        assert_eq!(parse_editor_expr("nil").unwrap(), EditorExpr::Nil);
        assert_eq!(
            parse_editor_expr("rec X. child 1. X").unwrap(),
            EditorExpr::rec("X", EditorExpr::prefix(Apc::Child(1), EditorExpr::var("X")))
        );
    }

    #[test]
    fn parse_precedence_and_errors() {
        let e = parse_editor_expr("child 1. nil >> parent. nil >> nil").unwrap();
        assert_eq!(
            e,
            EditorExpr::seq(
                EditorExpr::prefix(Apc::Child(1), EditorExpr::Nil),
                EditorExpr::seq(EditorExpr::prefix(Apc::Parent, EditorExpr::Nil), EditorExpr::Nil)
            )
        );
        let e = parse_editor_expr("(<>plus | @num) => nil | {num:3}. nil # trailing").unwrap();
        assert!(matches!(e, EditorExpr::Cond(Condition::Or(..), _, _)));
        let e = parse_editor_expr("(nil >> nil) >> nil").unwrap();
        assert!(matches!(&e, EditorExpr::Seq(a, _) if matches!(**a, EditorExpr::Seq(..))));
        assert_eq!(parse_editor_expr(&e.to_string()).unwrap(), e);
        assert_eq!(parse_editor_expr("X").unwrap_err(), ScriptError::Unbound("X".into()));
        assert!(matches!(parse_editor_expr("child 0. nil"), Err(ScriptError::Syntax(_))));
        assert!(matches!(parse_editor_expr("@a => nil"), Err(ScriptError::Syntax(_))));
        assert!(matches!(parse_editor_expr("{plus} nil"), Err(ScriptError::Syntax(_))));
    }

    #[test]
    fn conditional_insert_runs_in_three_steps() {
        let spec = spec();
        let c = config("@hole_e => {plus}.nil | nil", "(cursor (hole e))");
        let StepOutcome::Step(l1, c1) = step(&c, &spec) else { panic!() };
        assert_eq!(l1, StepLabel::Silent);
        assert_eq!(c1.expr(), &parse_editor_expr("{plus}.nil").unwrap());
        let StepOutcome::Step(l2, c2) = step(&c1, &spec) else { panic!() };
        assert_eq!(l2, StepLabel::Command(Apc::insert("plus")));
        assert_eq!(c2.tree(), &wf("(cursor (plus (hole e) (hole e)))"));
        assert_eq!(step(&c2, &spec), StepOutcome::Terminal);

        let r = run(c, &spec, 10);
        assert_eq!(r.outcome, RunOutcome::Terminal);
        assert_eq!(r.steps(), 2);
    }

    #[test]
    fn sort_mismatch_is_stuck() {
        let spec = spec();
        let c = config("{let}.nil", "(let (cursor (hole e)) (bind (x) (exp (var x))))");
        match step(&c, &spec) {
            StepOutcome::Stuck(s) => assert_eq!(s.reason, StuckReason::SortMismatch),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn seq_trivial_and_recursion() {
        let spec = spec();
        let c = config("nil >> nil", "(cursor (hole e))");
        let StepOutcome::Step(l, c1) = step(&c, &spec) else { panic!() };
        assert_eq!(l, StepLabel::Silent);
        assert!(c1.is_terminal());

        let c = config("rec X. X", "(cursor (hole e))");
        let StepOutcome::Step(l, c1) = step(&c, &spec) else { panic!() };
        assert_eq!(l, StepLabel::Silent);
        assert_eq!(c1, c);
        let r = run(c, &spec, 5);
        assert_eq!(r.outcome, RunOutcome::FuelExhausted);
        assert_eq!(r.steps(), 5);
    }

    #[test]
    fn fuel_zero_exhausts_on_non_nil() {
        let spec = spec();
        assert_eq!(run(config("parent. nil", "(cursor (hole e))"), &spec, 0).outcome, RunOutcome::FuelExhausted);
        assert_eq!(run(config("nil", "(cursor (hole e))"), &spec, 0).outcome, RunOutcome::Terminal);
    }

    #[test]
    fn child_then_parent_round_trips() {
        let spec = spec();
        let c = config("child 1. parent. nil", "(cursor (plus (hole e) (hole e)))");
        let start = c.tree().clone();
        let r = run(c, &spec, 10);
        assert_eq!(r.outcome, RunOutcome::Terminal);
        assert!(alpha_eq(r.last.tree().tree(), start.tree()));
        assert_eq!(r.commands(), vec![&Apc::Child(1), &Apc::Parent]);
    }

    #[test]
    fn recursion_descends_until_stuck() {
        let spec = spec();
        let c = config("rec X. child 1. X", "(cursor (plus (plus (num 1) (hole e)) (hole e)))");
        let r = run(c, &spec, 100);
        match r.outcome {
            RunOutcome::Stuck(s) => assert_eq!(s.reason, StuckReason::NoSuchChild),
            other => panic!("{other:?}"),
        }
        assert_eq!(r.last.tree().focus(), &parse_tree("(num 1)", &spec).unwrap());
    }

    #[test]
    fn unknown_condition_operator_is_stuck() {
        let spec = spec();
        let r = run(config("@minus => nil | nil", "(cursor (hole e))"), &spec, 10);
        assert!(matches!(r.outcome, RunOutcome::Stuck(Stuck { reason: StuckReason::UnknownOperator, .. })));
    }

    #[test]
    fn open_configs_are_rejected() {
        let e = EditorExpr::prefix(Apc::Parent, EditorExpr::var("Y"));
        assert_eq!(Config::new(e, wf("(cursor (hole e))")).unwrap_err(), ConfigError::Open("Y".into()));
    }
}
