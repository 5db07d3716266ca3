//! The simply typed λ-calculus with pairs, booleans, pattern matching and
//! fixed points that editor programs are encoded into.

mod eval;
mod library;
mod typing;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::language::{Literal, Sort};

pub use eval::{eval, infer_value_type, Evaluator, EvalError, Value};
pub use library::{ZipperFamily, ZipperLibrary};
pub use typing::{typecheck, TypeEnv, TypeError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Type {
    Base(Sort),
    Bool,
    Arrow(Box<Type>, Box<Type>),
    Product(Box<Type>, Box<Type>),
}

impl Type {
    pub fn base(sort: impl Into<Sort>) -> Self {
        Type::Base(sort.into())
    }

    pub fn arrow(a: Type, b: Type) -> Self {
        Type::Arrow(Box::new(a), Box::new(b))
    }

    pub fn product(a: Type, b: Type) -> Self {
        Type::Product(Box::new(a), Box::new(b))
    }

    /// `a1 → … → an → result`.
    pub fn curried(args: impl IntoIterator<Item = Type, IntoIter: DoubleEndedIterator>, result: Type) -> Self {
        args.into_iter().rev().fold(result, |acc, a| Type::arrow(a, acc))
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Base(s) => write!(f, "{s}"),
            Type::Bool => f.write_str("Bool"),
            Type::Arrow(a, b) => match **a {
                Type::Arrow(..) | Type::Product(..) => write!(f, "({a}) -> {b}"),
                _ => write!(f, "{a} -> {b}"),
            },
            Type::Product(a, b) => {
                let side = |t: &Type, f: &mut fmt::Formatter<'_>| match t {
                    Type::Arrow(..) | Type::Product(..) => write!(f, "({t})"),
                    _ => write!(f, "{t}"),
                };
                side(a, f)?;
                f.write_str(" * ")?;
                side(b, f)
            }
        }
    }
}

/// Head of a constant: an operator of the language or the context hole.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ConstHead {
    Op(String),
    ContextHole(Sort),
}

impl fmt::Display for ConstHead {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstHead::Op(o) => f.write_str(o),
            ConstHead::ContextHole(s) => write!(f, "⊙_{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Lam(String, Type, Arc<Term>),
    App(Arc<Term>, Arc<Term>),
    Const {
        head: ConstHead,
        literal: Option<Literal>,
    },
    Pair(Arc<Term>, Arc<Term>),
    Proj1(Arc<Term>),
    Proj2(Arc<Term>),
    True,
    False,
    Fix(Arc<Term>),
    Match(Arc<Term>, Vec<(Pattern, Arc<Term>)>),
}

impl Term {
    pub fn var(x: impl Into<String>) -> Self {
        Term::Var(x.into())
    }

    pub fn lam(x: impl Into<String>, ty: Type, body: Term) -> Self {
        Term::Lam(x.into(), ty, Arc::new(body))
    }

    pub fn app(f: Term, a: Term) -> Self {
        Term::App(Arc::new(f), Arc::new(a))
    }

    /// `f a1 … an`.
    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Self {
        args.into_iter().fold(f, Term::app)
    }

    pub fn op(name: impl Into<String>) -> Self {
        Term::Const {
            head: ConstHead::Op(name.into()),
            literal: None,
        }
    }

    pub fn op_lit(name: impl Into<String>, literal: Literal) -> Self {
        Term::Const {
            head: ConstHead::Op(name.into()),
            literal: Some(literal),
        }
    }

    pub fn context_hole(sort: &Sort) -> Self {
        Term::Const {
            head: ConstHead::ContextHole(sort.clone()),
            literal: None,
        }
    }

    pub fn pair(a: Term, b: Term) -> Self {
        Term::Pair(Arc::new(a), Arc::new(b))
    }

    pub fn proj1(t: Term) -> Self {
        Term::Proj1(Arc::new(t))
    }

    pub fn proj2(t: Term) -> Self {
        Term::Proj2(Arc::new(t))
    }

    pub fn bool(b: bool) -> Self {
        if b {
            Term::True
        } else {
            Term::False
        }
    }

    pub fn fix(t: Term) -> Self {
        Term::Fix(Arc::new(t))
    }

    pub fn matching(scrutinee: Term, branches: Vec<(Pattern, Term)>) -> Self {
        assert!(!branches.is_empty(), "match needs at least one branch");
        Term::Match(
            Arc::new(scrutinee),
            branches.into_iter().map(|(p, b)| (p, Arc::new(b))).collect(),
        )
    }

    /// `match t with | true -> yes | false -> no`.
    pub fn if_then_else(t: Term, yes: Term, no: Term) -> Self {
        Term::matching(t, vec![(Pattern::True, yes), (Pattern::False, no)])
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(t: &Term, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match t {
                Term::Var(x) => {
                    if !bound.contains(x) {
                        out.insert(x.clone());
                    }
                }
                Term::Lam(x, _, body) => {
                    bound.push(x.clone());
                    go(body, bound, out);
                    bound.pop();
                }
                Term::App(a, b) | Term::Pair(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Term::Proj1(a) | Term::Proj2(a) | Term::Fix(a) => go(a, bound, out),
                Term::Const { .. } | Term::True | Term::False => {}
                Term::Match(s, branches) => {
                    go(s, bound, out);
                    for (p, body) in branches {
                        let vars = p.vars();
                        let n = bound.len();
                        bound.extend(vars);
                        go(body, bound, out);
                        bound.truncate(n);
                    }
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const { .. } | Term::True | Term::False => 1,
            Term::Lam(_, _, b) | Term::Proj1(b) | Term::Proj2(b) | Term::Fix(b) => 1 + b.size(),
            Term::App(a, b) | Term::Pair(a, b) => 1 + a.size() + b.size(),
            Term::Match(s, bs) => 1 + s.size() + bs.iter().map(|(_, b)| b.size()).sum::<usize>(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pattern {
    Var(String),
    Wild,
    /// A constant spine with exactly `args.len()` arguments. A `None`
    /// literal matches any literal.
    Op {
        head: ConstHead,
        literal: Option<Literal>,
        args: Vec<Pattern>,
    },
    Pair(Box<Pattern>, Box<Pattern>),
    /// Matches an abstraction by its body; captures are re-abstracted.
    Bind(Box<Pattern>),
    True,
    False,
}

impl Pattern {
    pub fn var(x: impl Into<String>) -> Self {
        Pattern::Var(x.into())
    }

    pub fn op(name: impl Into<String>, args: Vec<Pattern>) -> Self {
        Pattern::Op {
            head: ConstHead::Op(name.into()),
            literal: None,
            args,
        }
    }

    pub fn context_hole(sort: &Sort) -> Self {
        Pattern::Op {
            head: ConstHead::ContextHole(sort.clone()),
            literal: None,
            args: Vec::new(),
        }
    }

    pub fn pair(a: Pattern, b: Pattern) -> Self {
        Pattern::Pair(Box::new(a), Box::new(b))
    }

    pub fn bind(p: Pattern) -> Self {
        Pattern::Bind(Box::new(p))
    }

    /// `n` nested binding patterns around `p`.
    pub fn bind_n(n: usize, p: Pattern) -> Self {
        (0..n).fold(p, |acc, _| Pattern::bind(acc))
    }

    /// Variables in binding order.
    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Pattern::Var(x) => out.push(x.clone()),
            Pattern::Wild | Pattern::True | Pattern::False => {}
            Pattern::Op { args, .. } => args.iter().for_each(|p| p.collect_vars(out)),
            Pattern::Pair(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Pattern::Bind(p) => p.collect_vars(out),
        }
    }

    pub fn is_linear(&self) -> bool {
        let vars = self.vars();
        let set: BTreeSet<&String> = vars.iter().collect();
        set.len() == vars.len()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Var(x) => f.write_str(x),
            Pattern::Wild => f.write_str("_"),
            Pattern::True => f.write_str("true"),
            Pattern::False => f.write_str("false"),
            Pattern::Op { head, literal, args } => {
                let simple = args.is_empty() && literal.is_none();
                if !simple {
                    f.write_str("(")?;
                }
                write!(f, "{head}")?;
                if let Some(l) = literal {
                    write!(f, " {l}")?;
                }
                for a in args {
                    write!(f, " {a}")?;
                }
                if !simple {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Pattern::Pair(a, b) => write!(f, "({a}, {b})"),
            Pattern::Bind(p) => write!(f, "(.{p})"),
        }
    }
}

// Printing precedence: 0 = open (λ, match, fix extend right), 1 = application
// operand position.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(self, f, 0)
    }
}

fn write_term(t: &Term, f: &mut fmt::Formatter<'_>, level: u8) -> fmt::Result {
    let open = |f: &mut fmt::Formatter<'_>| if level > 0 { f.write_str("(") } else { Ok(()) };
    let close = |f: &mut fmt::Formatter<'_>| if level > 0 { f.write_str(")") } else { Ok(()) };
    match t {
        Term::Var(x) => f.write_str(x),
        Term::True => f.write_str("true"),
        Term::False => f.write_str("false"),
        Term::Const { head, literal: None } => write!(f, "{head}"),
        Term::Const {
            head,
            literal: Some(l),
        } => {
            open(f)?;
            write!(f, "{head} {l}")?;
            close(f)
        }
        Term::Pair(a, b) => {
            f.write_str("(")?;
            write_term(a, f, 0)?;
            f.write_str(", ")?;
            write_term(b, f, 0)?;
            f.write_str(")")
        }
        Term::Proj1(a) | Term::Proj2(a) => {
            write_term(a, f, 2)?;
            f.write_str(if matches!(t, Term::Proj1(_)) { ".1" } else { ".2" })
        }
        Term::App(..) => {
            let mut spine = vec![];
            let mut head = t;
            while let Term::App(g, a) = head {
                spine.push(a);
                head = g;
            }
            open(f)?;
            write_term(head, f, 2)?;
            for a in spine.iter().rev() {
                f.write_str(" ")?;
                write_term(a, f, 2)?;
            }
            close(f)
        }
        Term::Lam(x, ty, body) => {
            open(f)?;
            write!(f, "\\{x}:{ty}. ")?;
            write_term(body, f, 0)?;
            close(f)
        }
        Term::Fix(a) => {
            open(f)?;
            f.write_str("fix ")?;
            write_term(a, f, 2)?;
            close(f)
        }
        Term::Match(s, branches) => {
            f.write_str("(")?;
            f.write_str("match ")?;
            write_term(s, f, 0)?;
            f.write_str(" with")?;
            for (p, b) in branches {
                write!(f, " | {p} -> ")?;
                write_term(b, f, 0)?;
            }
            f.write_str(")")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prints_surface_syntax() {
        let e = Type::base("e");
        let t = Term::lam(
            "x",
            e.clone(),
            Term::apps(Term::op("plus"), [Term::var("x"), Term::op_lit("num", Literal::Int(5))]),
        );
        assert_eq!(t.to_string(), "\\x:e. plus x (num 5)");
        let p = Term::proj1(Term::pair(Term::True, Term::False));
        assert_eq!(p.to_string(), "(true, false).1");
        let m = Term::if_then_else(Term::var("b"), Term::fix(Term::var("f")), Term::False);
        assert_eq!(m.to_string(), "(match b with | true -> fix f | false -> false)");
        assert_eq!(
            Type::arrow(Type::arrow(e.clone(), e.clone()), Type::product(e.clone(), Type::Bool)).to_string(),
            "(e -> e) -> e * Bool"
        );
        assert_eq!(Term::context_hole(&Sort::new("s")).to_string(), "⊙_s");
    }

    #[test]
    fn free_vars_respect_binders_and_patterns() {
        let t = Term::matching(
            Term::var("a"),
            vec![(
                Pattern::op("plus", vec![Pattern::var("b"), Pattern::Wild]),
                Term::app(Term::var("b"), Term::var("c")),
            )],
        );
        assert_eq!(t.free_vars(), ["a", "c"].into_iter().map(String::from).collect());
        assert!(Pattern::pair(Pattern::var("x"), Pattern::var("y")).is_linear());
        assert!(!Pattern::pair(Pattern::var("x"), Pattern::bind(Pattern::var("x"))).is_linear());
    }
}
