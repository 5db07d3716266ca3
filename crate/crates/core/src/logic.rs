//! Conditions over the subtree enclosed by the cursor, and their
//! satisfaction relation.
//!
//! [`satisfies`] follows the inference rules directly: `@o` inspects the
//! root, `<>o` holds at the root or in some argument, `[]o` holds when every
//! immediate argument satisfies `<>o`. [`brute_force_satisfies`] computes the
//! same relation by enumerating nodes and serves as a test oracle.

use std::fmt;

use thiserror::Error;

use crate::abt::Abt;
use crate::language::{Literal, LanguageSpec};
use crate::syntax::{SyntaxError, Token, Tokens};

/// An operator reference inside a condition. Without a literal, a literal
/// operator matches its whole family (`@num`); with one, only that instance
/// (`@num:5`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpRef {
    pub op: String,
    pub literal: Option<Literal>,
}

impl OpRef {
    pub fn new(op: impl Into<String>) -> Self {
        OpRef {
            op: op.into(),
            literal: None,
        }
    }

    pub fn with_literal(op: impl Into<String>, literal: Literal) -> Self {
        OpRef {
            op: op.into(),
            literal: Some(literal),
        }
    }
}

impl fmt::Display for OpRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.literal {
            None => f.write_str(&self.op),
            Some(l) => write!(f, "{}:{l}", self.op),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Condition {
    Neg(Box<Condition>),
    And(Box<Condition>, Box<Condition>),
    Or(Box<Condition>, Box<Condition>),
    At(OpRef),
    Possibly(OpRef),
    Necessity(OpRef),
}

impl Condition {
    #[allow(clippy::should_implement_trait)]
    pub fn neg(p: Condition) -> Self {
        Condition::Neg(Box::new(p))
    }

    pub fn and(p: Condition, q: Condition) -> Self {
        Condition::And(Box::new(p), Box::new(q))
    }

    pub fn or(p: Condition, q: Condition) -> Self {
        Condition::Or(Box::new(p), Box::new(q))
    }

    pub fn at(op: impl Into<String>) -> Self {
        Condition::At(OpRef::new(op))
    }

    pub fn possibly(op: impl Into<String>) -> Self {
        Condition::Possibly(OpRef::new(op))
    }

    pub fn necessity(op: impl Into<String>) -> Self {
        Condition::Necessity(OpRef::new(op))
    }

    /// Number of connectives and modalities.
    pub fn size(&self) -> usize {
        match self {
            Condition::Neg(p) => 1 + p.size(),
            Condition::And(p, q) | Condition::Or(p, q) => 1 + p.size() + q.size(),
            _ => 1,
        }
    }

    /// Every operator reference, left to right.
    pub fn op_refs(&self) -> Vec<&OpRef> {
        let mut out = Vec::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs<'a>(&'a self, out: &mut Vec<&'a OpRef>) {
        match self {
            Condition::Neg(p) => p.collect_refs(out),
            Condition::And(p, q) | Condition::Or(p, q) => {
                p.collect_refs(out);
                q.collect_refs(out);
            }
            Condition::At(o) | Condition::Possibly(o) | Condition::Necessity(o) => out.push(o),
        }
    }

    /// Checks every operator reference against the spec.
    pub fn validate(&self, spec: &LanguageSpec) -> Result<(), LogicError> {
        for r in self.op_refs() {
            let decl = spec
                .operator(&r.op)
                .ok_or_else(|| LogicError::UnknownOperator(r.op.clone()))?;
            if let Some(lit) = &r.literal {
                if lit.kind() != decl.param {
                    return Err(LogicError::BadLiteral(r.to_string()));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Neg(p) => write!(f, "!{}", Paren(p)),
            Condition::And(p, q) => write!(f, "{} & {}", Paren(p), Paren(q)),
            Condition::Or(p, q) => write!(f, "{} | {}", Paren(p), Paren(q)),
            Condition::At(o) => write!(f, "@{o}"),
            Condition::Possibly(o) => write!(f, "<>{o}"),
            Condition::Necessity(o) => write!(f, "[]{o}"),
        }
    }
}

struct Paren<'a>(&'a Condition);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Condition::And(..) | Condition::Or(..) => write!(f, "({})", self.0),
            other => write!(f, "{other}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("unknown operator `{0}` in condition")]
    UnknownOperator(String),
    #[error("literal does not fit operator in `{0}`")]
    BadLiteral(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

fn labelled(a: &Abt, r: &OpRef, spec: &LanguageSpec) -> bool {
    match a {
        Abt::Op(n) => n.op == r.op && (r.literal.is_none() || r.literal == n.literal),
        // Variable references are instances of the name-literal operators.
        Abt::Var(x) => {
            spec.operator(&r.op).is_some_and(|d| d.is_variable_ref())
                && match &r.literal {
                    None => true,
                    Some(Literal::Name(y)) => x == y,
                    Some(_) => false,
                }
        }
    }
}

/// Whether `a` (the cursorless subtree under the cursor) satisfies `phi`.
pub fn satisfies(a: &Abt, phi: &Condition, spec: &LanguageSpec) -> Result<bool, LogicError> {
    phi.validate(spec)?;
    Ok(holds(a, phi, spec))
}

fn holds(a: &Abt, phi: &Condition, spec: &LanguageSpec) -> bool {
    match phi {
        Condition::Neg(p) => !holds(a, p, spec),
        Condition::And(p, q) => holds(a, p, spec) && holds(a, q, spec),
        Condition::Or(p, q) => holds(a, p, spec) || holds(a, q, spec),
        Condition::At(o) => labelled(a, o, spec),
        Condition::Possibly(o) => possibly(a, o, spec),
        Condition::Necessity(o) => a.children().all(|c| possibly(c, o, spec)),
    }
}

fn possibly(a: &Abt, o: &OpRef, spec: &LanguageSpec) -> bool {
    labelled(a, o, spec) || a.children().any(|c| possibly(c, o, spec))
}

/// Oracle for [`satisfies`] by exhaustive node enumeration.
pub fn brute_force_satisfies(
    a: &Abt,
    phi: &Condition,
    spec: &LanguageSpec,
) -> Result<bool, LogicError> {
    phi.validate(spec)?;
    Ok(brute(a, phi, spec))
}

fn all_nodes(a: &Abt) -> Vec<&Abt> {
    let mut out = Vec::new();
    let mut stack = vec![a];
    while let Some(n) = stack.pop() {
        out.push(n);
        stack.extend(n.children());
    }
    out
}

fn brute(a: &Abt, phi: &Condition, spec: &LanguageSpec) -> bool {
    match phi {
        Condition::Neg(p) => !brute(a, p, spec),
        Condition::And(p, q) => brute(a, p, spec) && brute(a, q, spec),
        Condition::Or(p, q) => brute(a, p, spec) || brute(a, q, spec),
        Condition::At(o) => labelled(a, o, spec),
        Condition::Possibly(o) => all_nodes(a).into_iter().any(|n| labelled(n, o, spec)),
        Condition::Necessity(o) => {
            let children: Vec<&Abt> = a.children().collect();
            children
                .into_iter()
                .all(|c| all_nodes(c).into_iter().any(|n| labelled(n, o, spec)))
        }
    }
}

/// Parses the condition syntax: `!p`, `p & q`, `p | q`, `@o`, `<>o`, `[]o`,
/// parentheses, and literal references such as `@num:5`. `!` binds
/// tightest, then `&`, then `|`.
pub fn parse_condition(text: &str) -> Result<Condition, LogicError> {
    let mut toks = Tokens::lex(text)?;
    let phi = parse_or(&mut toks)?;
    if !toks.at_end() {
        return Err(toks.unexpected("end of condition").into());
    }
    Ok(phi)
}

pub(crate) fn parse_or(toks: &mut Tokens<'_>) -> Result<Condition, SyntaxError> {
    let mut lhs = parse_and(toks)?;
    while toks.peek_sym("|") {
        toks.next();
        let rhs = parse_and(toks)?;
        lhs = Condition::or(lhs, rhs);
    }
    Ok(lhs)
}

fn parse_and(toks: &mut Tokens<'_>) -> Result<Condition, SyntaxError> {
    let mut lhs = parse_unary(toks)?;
    while toks.peek_sym("&") {
        toks.next();
        let rhs = parse_unary(toks)?;
        lhs = Condition::and(lhs, rhs);
    }
    Ok(lhs)
}

fn parse_unary(toks: &mut Tokens<'_>) -> Result<Condition, SyntaxError> {
    match toks.peek() {
        Some(Token::Sym("!")) => {
            toks.next();
            Ok(Condition::neg(parse_unary(toks)?))
        }
        Some(Token::Sym("(")) => {
            toks.next();
            let inner = parse_or(toks)?;
            toks.expect_sym(")")?;
            Ok(inner)
        }
        Some(Token::Sym("@")) => {
            toks.next();
            Ok(Condition::At(parse_opref(toks)?))
        }
        Some(Token::Sym("<>")) => {
            toks.next();
            Ok(Condition::Possibly(parse_opref(toks)?))
        }
        Some(Token::Sym("[]")) => {
            toks.next();
            Ok(Condition::Necessity(parse_opref(toks)?))
        }
        _ => Err(toks.unexpected("a condition")),
    }
}

pub(crate) fn parse_opref(toks: &mut Tokens<'_>) -> Result<OpRef, SyntaxError> {
    let op = toks.ident()?;
    if !toks.peek_sym(":") {
        return Ok(OpRef::new(op));
    }
    toks.next();
    let literal = match toks.next() {
        Some(Token::Int(n)) => Literal::Int(n),
        Some(Token::Ident(x)) => Literal::Name(x),
        _ => return Err(toks.error("expected a literal after `:`")),
    };
    Ok(OpRef::with_literal(op, literal))
}
