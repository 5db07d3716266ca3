use thiserror::Error;

use super::{ConstHead, Pattern, Term, Type};
use crate::language::LanguageSpec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unbound variable `{name}` at {path:?}")]
    Unbound { name: String, path: Vec<usize> },
    #[error("unknown constant `{name}` at {path:?}")]
    UnknownConstant { name: String, path: Vec<usize> },
    #[error("type mismatch at {path:?}: expected {expected}, found {found}")]
    Mismatch {
        expected: String,
        found: String,
        path: Vec<usize>,
    },
    #[error("{message} at {path:?}")]
    Ill { message: String, path: Vec<usize> },
}

/// Typing context: a stack of variable types with shadowing.
#[derive(Debug, Clone, Default)]
pub struct TypeEnv {
    vars: Vec<(String, Type)>,
}

impl TypeEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, ty: Type) -> Self {
        self.vars.push((name.into(), ty));
        self
    }

    pub fn lookup(&self, name: &str) -> Option<&Type> {
        self.vars.iter().rev().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

/// The curried type of a constant.
pub(crate) fn const_type(
    head: &ConstHead,
    literal_present: bool,
    spec: &LanguageSpec,
) -> Result<Type, String> {
    match head {
        ConstHead::ContextHole(s) => {
            if !spec.has_sort(s) {
                return Err(format!("unknown sort `{s}`"));
            }
            if literal_present {
                return Err("the context hole takes no literal".into());
            }
            Ok(Type::Base(s.clone()))
        }
        ConstHead::Op(name) => {
            let decl = spec.operator(name).ok_or_else(|| format!("unknown constant `{name}`"))?;
            if decl.is_literal() != literal_present {
                return Err(format!("literal presence does not fit `{name}`"));
            }
            let args = decl.args.iter().map(|v| {
                Type::curried(v.binds.iter().map(|s| Type::Base(s.clone())), Type::Base(v.body.clone()))
            });
            Ok(Type::curried(args.collect::<Vec<_>>(), Type::Base(decl.result.clone())))
        }
    }
}

/// The unique type of `t`, or the first error.
pub fn typecheck(t: &Term, env: &TypeEnv, spec: &LanguageSpec) -> Result<Type, TypeError> {
    let mut env = env.vars.clone();
    let mut path = Vec::new();
    check(t, &mut env, &mut path, spec)
}

fn mismatch(expected: &Type, found: &Type, path: &[usize]) -> TypeError {
    TypeError::Mismatch {
        expected: expected.to_string(),
        found: found.to_string(),
        path: path.to_vec(),
    }
}

fn check(
    t: &Term,
    env: &mut Vec<(String, Type)>,
    path: &mut Vec<usize>,
    spec: &LanguageSpec,
) -> Result<Type, TypeError> {
    let sub = |i: usize, t: &Term, env: &mut Vec<(String, Type)>, path: &mut Vec<usize>| {
        path.push(i);
        let r = check(t, env, path, spec);
        path.pop();
        r
    };
    match t {
        Term::Var(x) => env
            .iter()
            .rev()
            .find(|(n, _)| n == x)
            .map(|(_, ty)| ty.clone())
            .ok_or_else(|| TypeError::Unbound {
                name: x.clone(),
                path: path.clone(),
            }),
        Term::True | Term::False => Ok(Type::Bool),
        Term::Const { head, literal } => {
            let ty = const_type(head, literal.is_some(), spec).map_err(|message| match head {
                ConstHead::Op(name) if spec.operator(name).is_none() => TypeError::UnknownConstant {
                    name: name.clone(),
                    path: path.clone(),
                },
                _ => TypeError::Ill {
                    message,
                    path: path.clone(),
                },
            })?;
            if let (ConstHead::Op(name), Some(l)) = (head, literal) {
                let decl = spec.operator(name).expect("checked by const_type");
                if l.kind() != decl.param {
                    return Err(TypeError::Ill {
                        message: format!("literal `{l}` does not fit `{name}`"),
                        path: path.clone(),
                    });
                }
            }
            Ok(ty)
        }
        Term::Lam(x, ty, body) => {
            check_type(ty, spec).map_err(|message| TypeError::Ill {
                message,
                path: path.clone(),
            })?;
            env.push((x.clone(), ty.clone()));
            let r = sub(0, body, env, path);
            env.pop();
            Ok(Type::arrow(ty.clone(), r?))
        }
        Term::App(f, a) => {
            let ft = sub(0, f, env, path)?;
            let at = sub(1, a, env, path)?;
            match ft {
                Type::Arrow(dom, cod) if *dom == at => Ok(*cod),
                Type::Arrow(dom, _) => Err(mismatch(&dom, &at, path)),
                other => Err(TypeError::Ill {
                    message: format!("applying a non-function of type {other}"),
                    path: path.clone(),
                }),
            }
        }
        Term::Pair(a, b) => Ok(Type::product(sub(0, a, env, path)?, sub(1, b, env, path)?)),
        Term::Proj1(a) | Term::Proj2(a) => match sub(0, a, env, path)? {
            Type::Product(l, r) => Ok(if matches!(t, Term::Proj1(_)) { *l } else { *r }),
            other => Err(TypeError::Ill {
                message: format!("projecting from non-pair type {other}"),
                path: path.clone(),
            }),
        },
        Term::Fix(a) => match sub(0, a, env, path)? {
            Type::Arrow(dom, cod) if dom == cod => Ok(*dom),
            other => Err(TypeError::Ill {
                message: format!("fix needs T -> T, found {other}"),
                path: path.clone(),
            }),
        },
        Term::Match(s, branches) => {
            let st = sub(0, s, env, path)?;
            if branches.is_empty() {
                return Err(TypeError::Ill {
                    message: "match without branches".into(),
                    path: path.clone(),
                });
            }
            let mut result: Option<Type> = None;
            for (i, (p, body)) in branches.iter().enumerate() {
                path.push(i + 1);
                if !p.is_linear() {
                    let e = TypeError::Ill {
                        message: format!("pattern {p} binds a variable twice"),
                        path: path.clone(),
                    };
                    path.pop();
                    return Err(e);
                }
                let mut bound = Vec::new();
                if let Err(message) = pattern_bindings(p, &st, spec, &mut bound) {
                    let e = TypeError::Ill {
                        message,
                        path: path.clone(),
                    };
                    path.pop();
                    return Err(e);
                }
                let n = env.len();
                env.extend(bound);
                let r = check(body, env, path, spec);
                env.truncate(n);
                let bt = match r {
                    Ok(bt) => bt,
                    Err(e) => {
                        path.pop();
                        return Err(e);
                    }
                };
                if let Some(rt) = &result {
                    if *rt != bt {
                        let e = mismatch(rt, &bt, path);
                        path.pop();
                        return Err(e);
                    }
                } else {
                    result = Some(bt);
                }
                path.pop();
            }
            Ok(result.expect("at least one branch"))
        }
    }
}

fn check_type(ty: &Type, spec: &LanguageSpec) -> Result<(), String> {
    match ty {
        Type::Base(s) if spec.has_sort(s) => Ok(()),
        Type::Base(s) => Err(format!("unknown sort `{s}`")),
        Type::Bool => Ok(()),
        Type::Arrow(a, b) | Type::Product(a, b) => {
            check_type(a, spec)?;
            check_type(b, spec)
        }
    }
}

/// Types bound by `p` against a scrutinee of type `ty`.
pub(crate) fn pattern_bindings(
    p: &Pattern,
    ty: &Type,
    spec: &LanguageSpec,
    out: &mut Vec<(String, Type)>,
) -> Result<(), String> {
    match p {
        Pattern::Var(x) => {
            out.push((x.clone(), ty.clone()));
            Ok(())
        }
        Pattern::Wild => Ok(()),
        Pattern::True | Pattern::False => match ty {
            Type::Bool => Ok(()),
            other => Err(format!("boolean pattern against {other}")),
        },
        Pattern::Pair(a, b) => match ty {
            Type::Product(l, r) => {
                pattern_bindings(a, l, spec, out)?;
                pattern_bindings(b, r, spec, out)
            }
            other => Err(format!("pair pattern against {other}")),
        },
        Pattern::Op { head, literal, args } => {
            let mut ct = const_type(head, is_literal_head(head, spec), spec)?;
            if let (Some(l), ConstHead::Op(name)) = (literal, head) {
                if spec.operator(name).is_some_and(|d| d.param != l.kind()) {
                    return Err(format!("literal `{l}` does not fit `{name}`"));
                }
            }
            let mut arg_types = Vec::with_capacity(args.len());
            for _ in args {
                match ct {
                    Type::Arrow(a, b) => {
                        arg_types.push(*a);
                        ct = *b;
                    }
                    _ => return Err(format!("too many arguments in pattern {p}")),
                }
            }
            if ct != *ty {
                return Err(format!("pattern {p} has type {ct}, scrutinee has {ty}"));
            }
            for (a, at) in args.iter().zip(&arg_types) {
                pattern_bindings(a, at, spec, out)?;
            }
            Ok(())
        }
        Pattern::Bind(inner) => match ty {
            Type::Arrow(dom, cod) if matches!(**dom, Type::Base(_)) => {
                let mut inner_out = Vec::new();
                pattern_bindings(inner, cod, spec, &mut inner_out)?;
                out.extend(
                    inner_out
                        .into_iter()
                        .map(|(x, t)| (x, Type::arrow((**dom).clone(), t))),
                );
                Ok(())
            }
            other => Err(format!("binding pattern against {other}")),
        },
    }
}

fn is_literal_head(head: &ConstHead, spec: &LanguageSpec) -> bool {
    match head {
        ConstHead::Op(name) => spec.operator(name).is_some_and(|d| d.is_literal()),
        ConstHead::ContextHole(_) => false,
    }
}
