//! Call-by-value, left-to-right evaluation with a step budget.

use std::cell::{Cell, RefCell};
use std::fmt;
use std::rc::Rc;
use std::sync::Arc;

use thiserror::Error;

use super::typing::{const_type, typecheck, TypeEnv};
use super::{ConstHead, Pattern, Term, Type};
use crate::language::{LanguageSpec, Literal, Sort};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no match branch applies")]
    MatchFailure,
    #[error("fuel exhausted")]
    FuelExhausted,
    #[error("evaluation stuck: {0}")]
    Stuck(String),
}

/// An abstraction's bound variable inside values.
#[derive(Debug)]
pub struct Binder {
    id: u64,
    name: RefCell<String>,
    sort: Sort,
    // Renamed to the first abstraction it is substituted into.
    provisional: Cell<bool>,
}

impl Binder {
    pub fn name(&self) -> String {
        self.name.borrow().clone()
    }

    pub fn sort(&self) -> &Sort {
        &self.sort
    }

    pub fn id(&self) -> u64 {
        self.id
    }
}

#[derive(Debug, Clone)]
struct EnvNode {
    name: String,
    value: Rc<Value>,
    next: Env,
}

#[derive(Debug, Clone, Default)]
pub struct Env(Option<Rc<EnvNode>>);

impl Env {
    fn extend(&self, name: &str, value: Rc<Value>) -> Env {
        Env(Some(Rc::new(EnvNode {
            name: name.to_owned(),
            value,
            next: self.clone(),
        })))
    }

    fn lookup(&self, name: &str) -> Option<&Rc<Value>> {
        let mut cur = self.0.as_deref();
        while let Some(node) = cur {
            if node.name == name {
                return Some(&node.value);
            }
            cur = node.next.0.as_deref();
        }
        None
    }
}

#[derive(Debug)]
pub enum Value {
    /// A constant applied to some of its arguments.
    Con {
        head: ConstHead,
        literal: Option<Literal>,
        args: Vec<Rc<Value>>,
    },
    Closure {
        param: String,
        ty: Type,
        body: Arc<Term>,
        env: Env,
    },
    /// A normalized abstraction over a sort.
    Abs { binder: Rc<Binder>, body: Rc<Value> },
    Neutral(Rc<Binder>),
    Pair(Rc<Value>, Rc<Value>),
    Bool(bool),
    /// `fix f`, unfolded on use.
    Fix(Rc<Value>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn atom(v: &Value, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match v {
                Value::Con { args, literal: None, .. } if args.is_empty() => write!(f, "{v}"),
                Value::Con { .. } | Value::Abs { .. } => write!(f, "({v})"),
                _ => write!(f, "{v}"),
            }
        }
        match self {
            Value::Con { head, literal, args } => {
                write!(f, "{head}")?;
                if let Some(l) = literal {
                    write!(f, " {l}")?;
                }
                for a in args {
                    f.write_str(" ")?;
                    atom(a, f)?;
                }
                Ok(())
            }
            Value::Closure { param, ty, .. } => write!(f, "<closure \\{param}:{ty}>"),
            Value::Abs { binder, body } => write!(f, "\\{}. {body}", binder.name()),
            Value::Neutral(b) => f.write_str(&b.name()),
            Value::Pair(a, b) => write!(f, "({a}, {b})"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Fix(_) => f.write_str("<fix>"),
        }
    }
}

type Bindings = Vec<(String, Rc<Value>)>;

/// Evaluation state: the language, the step budget and binder ids.
pub struct Evaluator<'s> {
    spec: &'s LanguageSpec,
    fuel: usize,
    used: usize,
    next_id: u64,
}

impl<'s> Evaluator<'s> {
    pub fn new(spec: &'s LanguageSpec, fuel: usize) -> Self {
        Evaluator {
            spec,
            fuel,
            used: 0,
            next_id: 0,
        }
    }

    /// Reductions performed so far.
    pub fn steps(&self) -> usize {
        self.used
    }

    fn tick(&mut self) -> Result<(), EvalError> {
        if self.used >= self.fuel {
            return Err(EvalError::FuelExhausted);
        }
        self.used += 1;
        Ok(())
    }

    pub fn eval(&mut self, t: &Term) -> Result<Rc<Value>, EvalError> {
        self.eval_in(Arc::new(t.clone()), Env::default())
    }

    fn eval_in(&mut self, mut term: Arc<Term>, mut env: Env) -> Result<Rc<Value>, EvalError> {
        loop {
            match &*term {
                Term::Var(x) => {
                    return env
                        .lookup(x)
                        .cloned()
                        .ok_or_else(|| EvalError::Stuck(format!("unbound variable `{x}`")))
                }
                Term::Lam(x, ty, body) => {
                    return Ok(Rc::new(Value::Closure {
                        param: x.clone(),
                        ty: ty.clone(),
                        body: body.clone(),
                        env,
                    }))
                }
                Term::Const { head, literal } => {
                    return Ok(Rc::new(Value::Con {
                        head: head.clone(),
                        literal: literal.clone(),
                        args: Vec::new(),
                    }))
                }
                Term::True => return Ok(Rc::new(Value::Bool(true))),
                Term::False => return Ok(Rc::new(Value::Bool(false))),
                Term::Pair(a, b) => {
                    let a = self.eval_in(a.clone(), env.clone())?;
                    let b = self.eval_in(b.clone(), env)?;
                    return Ok(Rc::new(Value::Pair(a, b)));
                }
                Term::Proj1(a) | Term::Proj2(a) => {
                    let v = self.eval_in(a.clone(), env)?;
                    let v = self.force(v)?;
                    self.tick()?;
                    return match &*v {
                        Value::Pair(l, r) => Ok(if matches!(*term, Term::Proj1(_)) { l.clone() } else { r.clone() }),
                        other => Err(EvalError::Stuck(format!("projection from {other}"))),
                    };
                }
                Term::Fix(a) => {
                    let f = self.eval_in(a.clone(), env)?;
                    return Ok(Rc::new(Value::Fix(f)));
                }
                Term::App(f, a) => {
                    let fv = self.eval_in(f.clone(), env.clone())?;
                    let av = self.eval_in(a.clone(), env.clone())?;
                    let fv = self.force(fv)?;
                    if let Value::Closure {
                        param,
                        body,
                        env: cenv,
                        ..
                    } = &*fv
                    {
                        self.tick()?;
                        env = cenv.extend(param, av);
                        term = body.clone();
                        continue;
                    }
                    return self.apply(fv, av);
                }
                Term::Match(s, branches) => {
                    let sv = self.eval_in(s.clone(), env.clone())?;
                    self.tick()?;
                    let mut chosen = None;
                    for (p, body) in branches {
                        if let Some(bindings) = self.match_pattern(p, &sv)? {
                            chosen = Some((bindings, body.clone()));
                            break;
                        }
                    }
                    let (bindings, body) = chosen.ok_or(EvalError::MatchFailure)?;
                    for (x, v) in bindings {
                        env = env.extend(&x, v);
                    }
                    term = body;
                }
            }
        }
    }

    /// Unfolds `fix` values until something else appears.
    fn force(&mut self, mut v: Rc<Value>) -> Result<Rc<Value>, EvalError> {
        while let Value::Fix(f) = &*v {
            let f = f.clone();
            self.tick()?;
            v = self.apply(f, v)?;
        }
        Ok(v)
    }

    pub fn apply(&mut self, f: Rc<Value>, a: Rc<Value>) -> Result<Rc<Value>, EvalError> {
        let f = self.force(f)?;
        match &*f {
            Value::Closure { param, body, env, .. } => {
                self.tick()?;
                let env = env.extend(param, a);
                self.eval_in(body.clone(), env)
            }
            Value::Con { head, literal, args } => {
                if args.len() >= self.arity(head) {
                    return Err(EvalError::Stuck(format!("{f} is fully applied")));
                }
                self.tick()?;
                let a = self.normalize(a)?;
                let mut args = args.clone();
                args.push(a);
                Ok(Rc::new(Value::Con {
                    head: head.clone(),
                    literal: literal.clone(),
                    args,
                }))
            }
            Value::Abs { binder, body } => {
                self.tick()?;
                if let Value::Neutral(n) = &*a {
                    if n.provisional.get() {
                        *n.name.borrow_mut() = binder.name();
                        n.provisional.set(false);
                    }
                }
                Ok(subst(body, binder.id, &a))
            }
            other => Err(EvalError::Stuck(format!("applying {other}"))),
        }
    }

    fn arity(&self, head: &ConstHead) -> usize {
        match head {
            ConstHead::Op(o) => self.spec.operator(o).map_or(0, |d| d.arity()),
            ConstHead::ContextHole(_) => 0,
        }
    }

    /// Domain sort when `v` is a function over a sort.
    fn abstraction_domain(&self, v: &Value) -> Option<(Sort, String)> {
        match v {
            Value::Closure {
                param,
                ty: Type::Base(s),
                ..
            } => Some((s.clone(), param.clone())),
            Value::Fix(f) => match &**f {
                // the functional's parameter has the fixed point's type
                Value::Closure {
                    ty: Type::Arrow(dom, _),
                    ..
                } => match &**dom {
                    Type::Base(s) => Some((s.clone(), "x".to_owned())),
                    _ => None,
                },
                _ => None,
            },
            Value::Con { head, literal, args } if args.len() < self.arity(head) => {
                let mut ty = const_type(head, literal.is_some(), self.spec).ok()?;
                for _ in args {
                    ty = match ty {
                        Type::Arrow(_, b) => *b,
                        _ => return None,
                    };
                }
                match ty {
                    Type::Arrow(a, _) => match *a {
                        Type::Base(s) => Some((s, "x".to_owned())),
                        _ => None,
                    },
                    _ => None,
                }
            }
            _ => None,
        }
    }

    /// Turns functions over sorts into `Abs` values.
    fn normalize(&mut self, v: Rc<Value>) -> Result<Rc<Value>, EvalError> {
        let Some((sort, name)) = self.abstraction_domain(&v) else {
            return Ok(v);
        };
        self.next_id += 1;
        let binder = Rc::new(Binder {
            id: self.next_id,
            name: RefCell::new(name),
            sort,
            provisional: Cell::new(true),
        });
        let body = self.apply(v, Rc::new(Value::Neutral(binder.clone())))?;
        let body = self.normalize(body)?;
        binder.provisional.set(false);
        Ok(Rc::new(Value::Abs { binder, body }))
    }

    /// Matches `p` against `v`; `None` is no match.
    pub fn match_pattern(&mut self, p: &Pattern, v: &Rc<Value>) -> Result<Option<Bindings>, EvalError> {
        let mut out = Vec::new();
        Ok(self.match_into(p, v, &mut out)?.then_some(out))
    }

    fn match_into(&mut self, p: &Pattern, v: &Rc<Value>, out: &mut Bindings) -> Result<bool, EvalError> {
        match p {
            Pattern::Var(x) => {
                out.push((x.clone(), v.clone()));
                return Ok(true);
            }
            Pattern::Wild => return Ok(true),
            _ => {}
        }
        let v = self.force(v.clone())?;
        match (p, &*v) {
            (Pattern::True, Value::Bool(b)) => Ok(*b),
            (Pattern::False, Value::Bool(b)) => Ok(!*b),
            (Pattern::Pair(pa, pb), Value::Pair(a, b)) => {
                Ok(self.match_into(pa, a, out)? && self.match_into(pb, b, out)?)
            }
            (Pattern::Op { head, literal, args }, Value::Con { head: h, literal: l, args: vs }) => {
                if head != h || args.len() != vs.len() || (literal.is_some() && literal != l) {
                    return Ok(false);
                }
                for (p, v) in args.iter().zip(vs) {
                    if !self.match_into(p, v, out)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            (
                Pattern::Op {
                    head: ConstHead::Op(o),
                    literal: None,
                    args,
                },
                Value::Neutral(_),
            ) => Ok(args.is_empty() && self.spec.operator(o).is_some_and(|d| d.is_variable_ref())),
            (Pattern::Bind(inner), _) => {
                let abs = self.normalize(v.clone())?;
                let Value::Abs { binder, body } = &*abs else {
                    return Ok(false);
                };
                let mut inner_out = Vec::new();
                if !self.match_into(inner, body, &mut inner_out)? {
                    return Ok(false);
                }
                out.extend(inner_out.into_iter().map(|(x, b)| {
                    (
                        x,
                        Rc::new(Value::Abs {
                            binder: binder.clone(),
                            body: b,
                        }),
                    )
                }));
                Ok(true)
            }
            _ => Ok(false),
        }
    }
}

fn subst(v: &Rc<Value>, id: u64, with: &Rc<Value>) -> Rc<Value> {
    match &**v {
        Value::Neutral(b) if b.id == id => with.clone(),
        Value::Con { head, literal, args } if !args.is_empty() => Rc::new(Value::Con {
            head: head.clone(),
            literal: literal.clone(),
            args: args.iter().map(|a| subst(a, id, with)).collect(),
        }),
        Value::Abs { binder, body } => Rc::new(Value::Abs {
            binder: binder.clone(),
            body: subst(body, id, with),
        }),
        Value::Pair(a, b) => Rc::new(Value::Pair(subst(a, id, with), subst(b, id, with))),
        _ => v.clone(),
    }
}

/// Evaluates a closed term.
pub fn eval(t: &Term, spec: &LanguageSpec, fuel: usize) -> Result<Rc<Value>, EvalError> {
    Evaluator::new(spec, fuel).eval(t)
}

/// The type of a value, reconstructed from its shape.
pub fn infer_value_type(v: &Value, spec: &LanguageSpec) -> Option<Type> {
    match v {
        Value::Bool(_) => Some(Type::Bool),
        Value::Pair(a, b) => Some(Type::product(infer_value_type(a, spec)?, infer_value_type(b, spec)?)),
        Value::Neutral(b) => Some(Type::Base(b.sort.clone())),
        Value::Abs { binder, body } => Some(Type::arrow(
            Type::Base(binder.sort.clone()),
            infer_value_type(body, spec)?,
        )),
        Value::Con { head, literal, args } => {
            let mut ty = const_type(head, literal.is_some(), spec).ok()?;
            for a in args {
                ty = match ty {
                    Type::Arrow(dom, cod) if infer_value_type(a, spec).as_ref() == Some(&*dom) => *cod,
                    _ => return None,
                };
            }
            Some(ty)
        }
        Value::Closure { param, ty, body, env } => {
            let mut tenv = TypeEnv::new();
            let free = Term::Lam(param.clone(), ty.clone(), body.clone()).free_vars();
            for x in free {
                tenv = tenv.with(x.clone(), infer_value_type(env.lookup(&x)?, spec)?);
            }
            let body_ty = typecheck(body, &tenv.with(param.clone(), ty.clone()), spec).ok()?;
            Some(Type::arrow(ty.clone(), body_ty))
        }
        Value::Fix(f) => match infer_value_type(f, spec)? {
            Type::Arrow(a, b) if a == b => Some(*a),
            _ => None,
        },
    }
}
