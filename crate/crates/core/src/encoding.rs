//! Encoding trees, cursor contexts, commands, conditions and editor
//! expressions into the λ-calculus, and decoding values back into trees.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::abt::{Abstraction, Abt, Binder, Node, SortEnv, WellFormedTree};
use crate::engine::EditorExpr;
use crate::lambda::{ConstHead, Pattern, Term, Type, Value, ZipperLibrary};
use crate::language::{cursor_name, LanguageSpec, Literal, OperatorDecl, Sort};
use crate::logic::{Condition, OpRef};
use crate::zipper::{decompose, fresh_template, Apc};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("variable `{0}` is free and its sort has no variable operator")]
    FreeVariable(String),
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("conditions on named variables such as `{0}` have no encoding")]
    NamedVariableCondition(String),
    #[error("value is not an encoded tree: {0}")]
    NotInImage(String),
    #[error("the specification is not editor-extended")]
    NotExtended,
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
}

/// Everything the encodings need: the language, the root sort and the
/// zipper definitions.
#[derive(Debug, Clone)]
pub struct EncodingEnv {
    spec: LanguageSpec,
    root: Sort,
    library: ZipperLibrary,
    mutate: bool,
}

const CTX: &str = "$c";

impl EncodingEnv {
    pub fn new(spec: &LanguageSpec, root: &Sort) -> Result<Self, EncodeError> {
        if !spec.is_editor_extended() {
            return Err(EncodeError::NotExtended);
        }
        if !spec.has_sort(root) {
            return Err(EncodeError::UnknownSort(root.to_string()));
        }
        Ok(EncodingEnv {
            spec: spec.clone(),
            root: root.clone(),
            library: ZipperLibrary::new(spec),
            mutate: false,
        })
    }

    /// Deliberately wrong sequencing, used to check that the harness can
    /// detect a broken encoding.
    pub fn with_mutation(mut self, on: bool) -> Self {
        self.mutate = on;
        self
    }

    pub fn spec(&self) -> &LanguageSpec {
        &self.spec
    }

    pub fn root(&self) -> &Sort {
        &self.root
    }

    pub fn library(&self) -> &ZipperLibrary {
        &self.library
    }

    /// `focus × root`.
    pub fn ctx_type(&self, focus: &Sort) -> Type {
        Type::product(Type::Base(focus.clone()), Type::Base(self.root.clone()))
    }

    fn variable_family(&self, sort: &Sort) -> Option<&OperatorDecl> {
        self.spec
            .operators_of_sort(sort)
            .find(|d| d.is_variable_ref())
    }
}

/// `[[a]]` for a closed tree.
pub fn encode_abt(a: &Abt, env: &EncodingEnv) -> Result<Term, EncodeError> {
    encode_open(a, &SortEnv::new(), env)
}

/// `[[a]]` where the free variables of `a` have the sorts in `free`; they
/// become literal instances of their sort's variable operator.
pub fn encode_open(a: &Abt, free: &SortEnv, env: &EncodingEnv) -> Result<Term, EncodeError> {
    let mut bound = Vec::new();
    encode_rec(a, &mut bound, free, env, None)
}

fn encode_rec(
    a: &Abt,
    bound: &mut Vec<String>,
    free: &SortEnv,
    env: &EncodingEnv,
    hole: Option<(&[usize], &Term)>,
) -> Result<Term, EncodeError> {
    if let Some((path, filler)) = hole {
        if path.is_empty() {
            return Ok(filler.clone());
        }
    }
    match a {
        Abt::Var(x) if bound.contains(x) => Ok(Term::var(x)),
        Abt::Var(x) => {
            let sort = free.lookup(x).ok_or_else(|| EncodeError::FreeVariable(x.clone()))?;
            let fam = env
                .variable_family(sort)
                .ok_or_else(|| EncodeError::FreeVariable(x.clone()))?;
            Ok(Term::op_lit(&fam.name, Literal::Name(x.clone())))
        }
        Abt::Op(n) => {
            if env.spec.operator(&n.op).is_none() {
                return Err(EncodeError::UnknownOperator(n.op.clone()));
            }
            let head = Term::Const {
                head: ConstHead::Op(n.op.clone()),
                literal: n.literal.clone(),
            };
            let mut args = Vec::with_capacity(n.args.len());
            for (i, arg) in n.args.iter().enumerate() {
                let sub_hole = match hole {
                    Some((path, filler)) if path[0] == i => Some((&path[1..], filler)),
                    _ => None,
                };
                let depth = bound.len();
                bound.extend(arg.binders.iter().map(|b| b.name.clone()));
                let body = encode_rec(&arg.body, bound, free, env, sub_hole);
                bound.truncate(depth);
                let body = body?;
                args.push(
                    arg.binders
                        .iter()
                        .rev()
                        .fold(body, |acc, b| Term::lam(&b.name, Type::Base(b.sort.clone()), acc)),
                );
            }
            Ok(Term::apps(head, args))
        }
    }
}

/// The inverse of [`encode_abt`] on values.
pub fn decode_abt(v: &Value, env: &EncodingEnv) -> Result<Abt, EncodeError> {
    decode_rec(v, env, None, &mut Vec::new())
}

fn decode_rec(
    v: &Value,
    env: &EncodingEnv,
    filler: Option<&Abt>,
    scope: &mut Vec<(u64, String)>,
) -> Result<Abt, EncodeError> {
    match v {
        Value::Neutral(b) => {
            // the innermost binder with this name must be this one
            match scope.iter().rev().find(|(_, n)| *n == b.name()) {
                Some((id, _)) if *id == b.id() => Ok(Abt::var(b.name())),
                _ => Err(EncodeError::NotInImage(format!("variable `{}` escapes or is captured", b.name()))),
            }
        }
        Value::Con {
            head: ConstHead::ContextHole(_),
            args,
            ..
        } if args.is_empty() => filler
            .cloned()
            .ok_or_else(|| EncodeError::NotInImage("unexpected context hole".into())),
        Value::Con {
            head: ConstHead::Op(o),
            literal,
            args,
        } => {
            let decl = env
                .spec
                .operator(o)
                .ok_or_else(|| EncodeError::UnknownOperator(o.clone()))?;
            if args.len() != decl.arity() {
                return Err(EncodeError::NotInImage(format!("partially applied `{o}`")));
            }
            if decl.is_variable_ref() {
                return match literal {
                    Some(Literal::Name(x)) => Ok(Abt::var(x.clone())),
                    _ => Err(EncodeError::NotInImage(format!("`{o}` without a name"))),
                };
            }
            let mut out = Vec::with_capacity(args.len());
            for (arg, valence) in args.iter().zip(&decl.args) {
                let mut binders = Vec::new();
                let mut cur: &Value = arg;
                let depth = scope.len();
                for _ in &valence.binds {
                    match cur {
                        Value::Abs { binder, body } => {
                            binders.push(Binder {
                                name: binder.name(),
                                sort: binder.sort().clone(),
                            });
                            scope.push((binder.id(), binder.name()));
                            cur = body;
                        }
                        other => {
                            scope.truncate(depth);
                            return Err(EncodeError::NotInImage(format!("expected an abstraction, found {other}")));
                        }
                    }
                }
                let body = decode_rec(cur, env, filler, scope);
                scope.truncate(depth);
                out.push(Abstraction { binders, body: body? });
            }
            Ok(Abt::Op(Node {
                op: o.clone(),
                literal: literal.clone(),
                args: out,
            }))
        }
        other => Err(EncodeError::NotInImage(other.to_string())),
    }
}

/// `([[C's focus]], [[C]])` for the canonical decomposition: the first
/// component is the cursor node, the second the context with `⊙`.
pub fn encode_context(t: &WellFormedTree, env: &EncodingEnv) -> Result<Term, EncodeError> {
    let (ctx, cursor) = decompose(t, &env.spec);
    let focus_sort = cursor
        .node()
        .and_then(|n| env.spec.operator(&n.op))
        .map(|d| d.result.clone())
        .expect("the focus is a cursor node");
    let focus = encode_open(&cursor, &ctx.sort_env(), env)?;
    let hole = Term::context_hole(&focus_sort);
    let mut bound = Vec::new();
    let context = encode_rec(
        t.tree(),
        &mut bound,
        &SortEnv::new(),
        env,
        Some((t.cursor_path(), &hole)),
    )?;
    Ok(Term::pair(focus, context))
}

/// The other reading of a configuration: the whole tree in focus and an
/// empty context, `([[t]], ⊙)`.
pub fn encode_root_context(t: &WellFormedTree, env: &EncodingEnv) -> Result<Term, EncodeError> {
    Ok(Term::pair(encode_abt(t.tree(), env)?, Term::context_hole(&env.root)))
}

/// Splices the focus of a context pair value into its context.
pub fn decode_context(v: &Value, env: &EncodingEnv) -> Result<Abt, EncodeError> {
    let Value::Pair(focus, context) = v else {
        return Err(EncodeError::NotInImage(format!("expected a pair, found {v}")));
    };
    let focus = decode_abt(focus, env)?;
    decode_rec(context, env, Some(&focus), &mut Vec::new())
}

/// `[[π]] : focus → focus`.
pub fn encode_command(cmd: &Apc, focus: &Sort, env: &EncodingEnv) -> Result<Term, EncodeError> {
    let lib = &env.library;
    match cmd {
        Apc::Child(0) => Ok(lib.stuck(focus)),
        Apc::Child(1) => Ok(lib.down(focus)),
        Apc::Child(n) => {
            let inner = encode_command(&Apc::Child(n - 1), focus, env)?;
            Ok(Term::lam(
                "x",
                Type::Base(focus.clone()),
                Term::app(lib.right(focus), Term::app(inner, Term::var("x"))),
            ))
        }
        Apc::Parent => Ok(lib.up(focus)),
        Apc::Insert { op, literal } => {
            let decl = env
                .spec
                .lookup_operator(op, literal.as_ref())
                .map_err(|_| EncodeError::UnknownOperator(op.clone()))?;
            if decl.is_cursor() {
                return Ok(lib.stuck(focus));
            }
            let template = match fresh_template(decl, literal.as_ref(), &BTreeSet::new()) {
                Abt::Var(x) => Term::op_lit(&decl.name, Literal::Name(x)),
                other => encode_abt(&other, env)?,
            };
            Ok(Term::app(lib.set(&decl.result, focus), template))
        }
    }
}

/// `[[φ]] : sort → Bool`. On a tree with a cursor it evaluates `φ` at the
/// cursor's content, otherwise at the root.
pub fn encode_condition(phi: &Condition, sort: &Sort, env: &EncodingEnv) -> Result<Term, EncodeError> {
    phi.validate(&env.spec).map_err(|e| EncodeError::UnknownOperator(e.to_string()))?;
    for r in phi.op_refs() {
        if r.literal.is_some() && env.spec.operator(&r.op).is_some_and(|d| d.is_variable_ref()) {
            return Err(EncodeError::NamedVariableCondition(r.to_string()));
        }
    }
    let c = CondBuilder { env };
    let pair = Type::product(Type::Bool, Type::Bool);
    let t = Term::var("t");
    Ok(Term::lam(
        "t",
        Type::Base(sort.clone()),
        Term::app(
            Term::lam(
                "p",
                pair,
                Term::if_then_else(
                    Term::proj1(Term::var("p")),
                    Term::proj2(Term::var("p")),
                    Term::app(c.at_root(phi, sort), t.clone()),
                ),
            ),
            Term::app(c.project(c.find(phi), sort), t),
        ),
    ))
}

struct CondBuilder<'a> {
    env: &'a EncodingEnv,
}

impl CondBuilder<'_> {
    fn sorts(&self) -> &[Sort] {
        self.env.spec.sorts()
    }

    fn project(&self, tuple: Term, sort: &Sort) -> Term {
        let n = self.sorts().len();
        let i = self.sorts().iter().position(|s| s == sort).expect("known sort");
        let mut t = tuple;
        for _ in 0..i {
            t = Term::proj2(t);
        }
        if i + 1 < n {
            t = Term::proj1(t);
        }
        t
    }

    /// A fixed point over one `s → out` function per sort.
    fn family(&self, out: &Type, branches: impl Fn(&Sort) -> Vec<(Pattern, Term)>) -> Term {
        let mut comps: Vec<Term> = self
            .sorts()
            .iter()
            .map(|j| Term::lam("t", Type::Base(j.clone()), Term::matching(Term::var("t"), branches(j))))
            .collect();
        let mut tys: Vec<Type> = self
            .sorts()
            .iter()
            .map(|j| Type::arrow(Type::Base(j.clone()), out.clone()))
            .collect();
        let last = comps.pop().expect("at least one sort");
        let tuple = comps.into_iter().rev().fold(last, |acc, t| Term::pair(t, acc));
        let last_ty = tys.pop().expect("at least one sort");
        let ty = tys.into_iter().rev().fold(last_ty, |acc, t| Type::product(t, acc));
        Term::fix(Term::lam("self", ty, tuple))
    }

    fn rec(&self, sort: &Sort) -> Term {
        self.project(Term::var("self"), sort)
    }

    /// Patterns `o w1 … wn` for every operator of `j` with arguments, and
    /// the children each one exposes with binders filled by `⊙`.
    fn spines(&self, j: &Sort) -> Vec<(Pattern, Vec<(Sort, Term)>)> {
        self.env
            .spec
            .operators_of_sort(j)
            .filter(|d| d.arity() > 0)
            .map(|d| {
                let pat = Pattern::op(&d.name, (0..d.arity()).map(|i| Pattern::var(format!("w{}", i + 1))).collect());
                let children = d
                    .args
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let dummies = v.binds.iter().map(Term::context_hole);
                        (v.body.clone(), Term::apps(Term::var(format!("w{}", i + 1)), dummies))
                    })
                    .collect();
                (pat, children)
            })
            .collect()
    }

    /// Patterns for nodes labelled by `r` at sort `j`.
    fn labelled(&self, r: &OpRef, j: &Sort) -> Vec<Pattern> {
        let spec = &self.env.spec;
        let decl = spec.operator(&r.op).expect("validated");
        if decl.is_variable_ref() {
            let mut out: Vec<Pattern> = spec
                .operators_of_sort(j)
                .filter(|d| d.is_variable_ref())
                .map(|d| Pattern::op(&d.name, vec![]))
                .collect();
            out.push(Pattern::context_hole(j));
            out
        } else if decl.result == *j {
            vec![Pattern::Op {
                head: ConstHead::Op(decl.name.clone()),
                literal: r.literal.clone(),
                args: vec![Pattern::Wild; decl.arity()],
            }]
        } else {
            vec![]
        }
    }

    fn test(&self, pats: Vec<Pattern>, yes: Term, no: Term) -> Vec<(Pattern, Term)> {
        let mut out: Vec<(Pattern, Term)> = pats.into_iter().map(|p| (p, yes.clone())).collect();
        out.push((Pattern::Wild, no));
        out
    }

    /// `[[φ]]` at the root of a cursorless tree of sort `j`.
    fn at_root(&self, phi: &Condition, j: &Sort) -> Term {
        let ty = Type::Base(j.clone());
        let arg = || Term::var("t");
        let body = match phi {
            Condition::Neg(p) => Term::if_then_else(Term::app(self.at_root(p, j), arg()), Term::False, Term::True),
            Condition::And(p, q) => Term::if_then_else(
                Term::app(self.at_root(p, j), arg()),
                Term::app(self.at_root(q, j), arg()),
                Term::False,
            ),
            Condition::Or(p, q) => Term::if_then_else(
                Term::app(self.at_root(p, j), arg()),
                Term::True,
                Term::app(self.at_root(q, j), arg()),
            ),
            Condition::At(r) => Term::matching(arg(), self.test(self.labelled(r, j), Term::True, Term::False)),
            Condition::Possibly(r) => Term::app(self.project(self.possibly(r), j), arg()),
            Condition::Necessity(r) => {
                let poss = self.possibly(r);
                let mut branches: Vec<(Pattern, Term)> = self
                    .spines(j)
                    .into_iter()
                    .map(|(pat, children)| {
                        let all = children.into_iter().rev().fold(Term::True, |acc, (s, c)| {
                            Term::if_then_else(Term::app(self.project(poss.clone(), &s), c), acc, Term::False)
                        });
                        (pat, all)
                    })
                    .collect();
                branches.push((Pattern::Wild, Term::True));
                Term::matching(arg(), branches)
            }
        };
        Term::lam("t", ty, body)
    }

    /// `◇r` as a family over all sorts.
    fn possibly(&self, r: &OpRef) -> Term {
        self.family(&Type::Bool, |j| {
            let mut branches: Vec<(Pattern, Term)> =
                self.labelled(r, j).into_iter().map(|p| (p, Term::True)).collect();
            for (pat, children) in self.spines(j) {
                let any = children.into_iter().rev().fold(Term::False, |acc, (s, c)| {
                    Term::if_then_else(Term::app(self.rec(&s), c), Term::True, acc)
                });
                branches.push((pat, any));
            }
            branches.push((Pattern::Wild, Term::False));
            branches
        })
    }

    /// Finds the cursor: `(true, φ at its content)` or `(false, false)`.
    fn find(&self, phi: &Condition) -> Term {
        let pair = Type::product(Type::Bool, Type::Bool);
        self.family(&pair, |j| {
            let mut branches = vec![(
                Pattern::op(cursor_name(j), vec![Pattern::var("c")]),
                Term::pair(Term::True, Term::app(self.at_root(phi, j), Term::var("c"))),
            )];
            for (pat, children) in self.spines(j) {
                let first = children
                    .into_iter()
                    .rev()
                    .fold(Term::pair(Term::False, Term::False), |acc, (s, c)| {
                        Term::app(
                            Term::lam(
                                "p",
                                pair.clone(),
                                Term::if_then_else(Term::proj1(Term::var("p")), Term::var("p"), acc),
                            ),
                            Term::app(self.rec(&s), c),
                        )
                    });
                branches.push((pat, first));
            }
            branches.push((Pattern::Wild, Term::pair(Term::False, Term::False)));
            branches
        })
    }
}

/// `[[E]] : Ctx → Ctx` with `Ctx = focus × root`.
pub fn encode_editor_expr(e: &EditorExpr, focus: &Sort, env: &EncodingEnv) -> Result<Term, EncodeError> {
    let ctx = env.ctx_type(focus);
    let c = || Term::var(CTX);
    Ok(match e {
        EditorExpr::Nil => Term::lam(CTX, ctx, c()),
        EditorExpr::RecVar(x) => Term::var(x),
        EditorExpr::Rec(x, body) => Term::fix(Term::lam(
            x,
            Type::arrow(ctx.clone(), ctx),
            encode_editor_expr(body, focus, env)?,
        )),
        EditorExpr::Prefix(cmd, then) => Term::lam(
            CTX,
            ctx,
            Term::app(
                encode_editor_expr(then, focus, env)?,
                Term::pair(Term::app(encode_command(cmd, focus, env)?, Term::proj1(c())), Term::proj2(c())),
            ),
        ),
        EditorExpr::Seq(a, b) => {
            let (first, second) = if env.mutate { (b, a) } else { (a, b) };
            Term::lam(
                CTX,
                ctx,
                Term::app(
                    encode_editor_expr(second, focus, env)?,
                    Term::app(encode_editor_expr(first, focus, env)?, c()),
                ),
            )
        }
        EditorExpr::Cond(phi, yes, no) => Term::lam(
            CTX,
            ctx,
            Term::if_then_else(
                Term::app(encode_condition(phi, focus, env)?, Term::proj1(c())),
                Term::app(encode_editor_expr(yes, focus, env)?, c()),
                Term::app(encode_editor_expr(no, focus, env)?, c()),
            ),
        ),
    })
}

/// Renders an encoded tree in the flattened notation used when writing
/// encodings by hand: `λx.` without annotations and variables shown
/// through their sort's variable operator.
pub fn render_tree_term(t: &Term, spec: &LanguageSpec) -> String {
    fn go(t: &Term, spec: &LanguageSpec, scope: &mut Vec<(String, Type)>, atom: bool, out: &mut String) {
        let compound = match t {
            Term::Var(x) => {
                let fam = scope
                    .iter()
                    .rev()
                    .find(|(n, _)| n == x)
                    .and_then(|(_, ty)| match ty {
                        Type::Base(s) => spec.operators_of_sort(s).find(|d| d.is_variable_ref()),
                        _ => None,
                    });
                match fam {
                    Some(d) => {
                        let _ = write!(out, "{}{} {x}{}", if atom { "(" } else { "" }, d.name, if atom { ")" } else { "" });
                    }
                    None => out.push_str(x),
                }
                return;
            }
            Term::Const { literal: None, head } => {
                let _ = write!(out, "{head}");
                return;
            }
            _ => true,
        };
        if compound && atom {
            out.push('(');
        }
        match t {
            Term::Const { head, literal: Some(l) } => {
                let _ = write!(out, "{head} {l}");
            }
            Term::Lam(x, ty, body) => {
                let _ = write!(out, "λ{x}. ");
                scope.push((x.clone(), ty.clone()));
                go(body, spec, scope, false, out);
                scope.pop();
            }
            Term::App(..) => {
                let mut spine = Vec::new();
                let mut head = t;
                while let Term::App(f, a) = head {
                    spine.push(a);
                    head = f;
                }
                go(head, spec, scope, true, out);
                for a in spine.iter().rev() {
                    out.push(' ');
                    go(a, spec, scope, true, out);
                }
            }
            other => {
                let _ = write!(out, "{other}");
            }
        }
        if compound && atom {
            out.push(')');
        }
    }
    let mut out = String::new();
    go(t, spec, &mut Vec::new(), false, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abt::{alpha_eq, check_well_formed, parse_tree};
    use crate::engine::parse_editor_expr;
    use crate::lambda::{eval, typecheck, EvalError, TypeEnv};
    use crate::language::LETLANG;
    use crate::logic::{parse_condition, satisfies};

    fn spec() -> LanguageSpec {
        LanguageSpec::load(LETLANG).unwrap().editor_extend().unwrap()
    }

    fn env(root: &str) -> EncodingEnv {
        EncodingEnv::new(&spec(), &Sort::new(root)).unwrap()
    }

    fn wf(text: &str) -> WellFormedTree {
        let spec = spec();
        check_well_formed(&parse_tree(text, &spec).unwrap(), &spec).unwrap()
    }

    const LET_TREE: &str = "(let (cursor (hole e)) (bind (x) (exp (plus (var x) (num 5)))))";

    #[test]
    fn encodes_trees_as_curried_constants() {
        let env = env("s");
        let spec = spec();
        let t = encode_abt(wf(LET_TREE).tree(), &env).unwrap();
        assert_eq!(
            t.to_string(),
            "let (cursor_e hole_e) (\\x:e. exp (plus x (num 5)))"
        );
        assert_eq!(
            render_tree_term(&t, &spec),
            "let (cursor_e hole_e) (λx. exp (plus (var x) (num 5)))"
        );
        assert_eq!(typecheck(&t, &TypeEnv::new(), &spec).unwrap(), Type::base("s"));
        let v = eval(&t, &spec, 1000).unwrap();
        assert!(alpha_eq(&decode_abt(&v, &env).unwrap(), wf(LET_TREE).tree()));
    }

    #[test]
    fn decode_rejects_non_trees() {
        let env = env("e");
        let spec = spec();
        let v = eval(&Term::True, &spec, 10).unwrap();
        assert!(matches!(decode_abt(&v, &env), Err(EncodeError::NotInImage(_))));
        let v = eval(&Term::app(Term::op("plus"), Term::op("hole_e")), &spec, 10).unwrap();
        assert!(decode_abt(&v, &env).is_err());
    }

    #[test]
    fn canonical_context_pair() {
        let env = env("s");
        let spec = spec();
        let t = encode_context(&wf(LET_TREE), &env).unwrap();
        assert_eq!(
            t.to_string(),
            "(cursor_e hole_e, let ⊙_e (\\x:e. exp (plus x (num 5))))"
        );
        assert_eq!(
            typecheck(&t, &TypeEnv::new(), &spec).unwrap(),
            Type::product(Type::base("e"), Type::base("s"))
        );
        let v = eval(&t, &spec, 1000).unwrap();
        assert!(alpha_eq(&decode_context(&v, &env).unwrap(), wf(LET_TREE).tree()));

        let root = wf("(cursor (hole s))");
        assert_eq!(encode_context(&root, &env).unwrap().to_string(), "(cursor_s hole_s, ⊙_s)");
    }

    #[test]
    fn focus_variables_become_named_constants() {
        let env = env("s");
        let spec = spec();
        let tree = wf("(let (num 1) (bind (x) (exp (cursor (var x)))))");
        let t = encode_context(&tree, &env).unwrap();
        assert_eq!(t.to_string(), "(cursor_e (var x), let (num 1) (\\x:e. exp ⊙_e))");
        let v = eval(&t, &spec, 1000).unwrap();
        assert!(alpha_eq(&decode_context(&v, &env).unwrap(), tree.tree()));
    }

    #[test]
    fn commands() {
        let env = env("e");
        let spec = spec();
        let e = Sort::new("e");
        let tree = Term::app(Term::op("cursor_e"), Term::apps(Term::op("plus"), [Term::op("hole_e"), Term::op("hole_e")]));
        let run = |cmd: Apc| {
            let f = encode_command(&cmd, &e, &env).unwrap();
            assert_eq!(typecheck(&f, &TypeEnv::new(), &spec).unwrap(), Type::arrow(Type::base("e"), Type::base("e")));
            eval(&Term::app(f, tree.clone()), &spec, 100_000).map(|v| v.to_string())
        };
        assert_eq!(run(Apc::Child(2)).unwrap(), "plus hole_e (cursor_e hole_e)");
        assert_eq!(run(Apc::Child(3)).unwrap_err(), EvalError::MatchFailure);
        assert_eq!(run(Apc::Parent).unwrap_err(), EvalError::MatchFailure);
        assert_eq!(run(Apc::insert("hole_e")).unwrap(), "cursor_e hole_e");
        assert_eq!(run(Apc::insert_lit("num", Literal::Int(7))).unwrap(), "cursor_e (num 7)");
        assert_eq!(run(Apc::insert("exp")).unwrap_err(), EvalError::MatchFailure);
        assert_eq!(encode_command(&Apc::insert("minus"), &e, &env).unwrap_err(), EncodeError::UnknownOperator("minus".into()));
        assert_eq!(run(Apc::insert("cursor_e")).unwrap_err(), EvalError::MatchFailure);
        assert_eq!(run(Apc::Child(0)).unwrap_err(), EvalError::MatchFailure);
        let set = encode_command(&Apc::insert("let"), &Sort::new("s"), &env).unwrap();
        assert_eq!(typecheck(&set, &TypeEnv::new(), &spec).unwrap(), Type::arrow(Type::base("s"), Type::base("s")));
    }

    #[test]
    fn conditions_agree_with_the_logic() {
        let env = env("s");
        let spec = spec();
        let trees = [
            "(let (num 5) (bind (x) (exp (plus (var x) (num 1)))))",
            "(exp (hole e))",
            "(let (plus (num 1) (hole e)) (bind (y) (hole s)))",
        ];
        let phis = ["@hole_e", "<>plus", "!@plus", "[]num", "<>var", "@num:5 | []hole_s", "<>num:1 & !<>hole_s", "[]var"];
        for text in trees {
            let a = parse_tree(text, &spec).unwrap();
            let enc = encode_abt(&a, &env).unwrap();
            for p in phis {
                let phi = parse_condition(p).unwrap();
                let f = encode_condition(&phi, &Sort::new("s"), &env).unwrap();
                assert_eq!(typecheck(&f, &TypeEnv::new(), &spec).unwrap(), Type::arrow(Type::base("s"), Type::Bool));
                let v = eval(&Term::app(f, enc.clone()), &spec, 100_000).unwrap();
                let expected = satisfies(&a, &phi, &spec).unwrap();
                assert_eq!(matches!(*v, Value::Bool(true)), expected, "{p} on {text}");
            }
        }
        let named = parse_condition("@var:x").unwrap();
        assert!(matches!(encode_condition(&named, &Sort::new("s"), &env), Err(EncodeError::NamedVariableCondition(_))));
    }

    #[test]
    fn conditional_script_on_a_hole() {
        let env = env("e");
        let spec = spec();
        let e = Sort::new("e");
        let script = parse_editor_expr("@hole_e => {plus}.nil | nil").unwrap();
        let f = encode_editor_expr(&script, &e, &env).unwrap();
        let ctx = env.ctx_type(&e);
        assert_eq!(typecheck(&f, &TypeEnv::new(), &spec).unwrap(), Type::arrow(ctx.clone(), ctx));
        let start = encode_context(&wf("(cursor (hole e))"), &env).unwrap();
        let v = eval(&Term::app(f, start), &spec, 100_000).unwrap();
        assert_eq!(v.to_string(), "(cursor_e (plus hole_e hole_e), ⊙_e)");
    }

    #[test]
    fn rec_and_seq() {
        let env = env("e");
        let spec = spec();
        let e = Sort::new("e");
        let tree = wf("(cursor (plus (plus (num 1) (hole e)) (hole e)))");
        let script = parse_editor_expr("(rec X. <>plus => child 1. X | nil) >> parent. nil").unwrap();
        let direct = crate::engine::run(
            crate::engine::Config::new(script.clone(), tree.clone()).unwrap(),
            &spec,
            100,
        );
        assert_eq!(direct.outcome, crate::engine::RunOutcome::Terminal);
        let f = encode_editor_expr(&script, &e, &env).unwrap();
        let v = eval(&Term::app(f, encode_root_context(&tree, &env).unwrap()), &spec, 1_000_000).unwrap();
        let decoded = decode_context(&v, &env).unwrap();
        assert_eq!(
            crate::abt::print_tree(&decoded),
            "(op plus (cursor (op plus (op num 1) (hole e))) (hole e))"
        );
        assert!(alpha_eq(&decoded, direct.last.tree().tree()));
    }
}
