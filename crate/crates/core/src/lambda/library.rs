//! Cursor movement and substitution as λ-terms over encoded trees.
//!
//! Each family is one fixed point over a right-nested product with one
//! `s -> s` component per sort, so a function can recurse into children of
//! any sort. The cursor may sit anywhere inside the argument.

use std::sync::Arc;

use super::{Pattern, Term, Type};
use crate::language::{cursor_name, hole_name, LanguageSpec, OperatorDecl, Sort};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ZipperFamily {
    Down,
    Right,
    Up,
}

#[derive(Debug, Clone)]
pub struct ZipperLibrary {
    spec: LanguageSpec,
    down: Arc<Term>,
    right: Arc<Term>,
    up: Arc<Term>,
}

const SELF: &str = "self";
const SCRUTINEE: &str = "t";
const CONTENT: &str = "c";
const NEW: &str = "a";

impl ZipperLibrary {
    /// Builds the definitions; the spec must be editor-extended.
    pub fn new(spec: &LanguageSpec) -> Self {
        assert!(spec.is_editor_extended(), "the zipper library needs cursor and hole operators");
        let mut lib = ZipperLibrary {
            spec: spec.clone(),
            down: Arc::new(Term::True),
            right: Arc::new(Term::True),
            up: Arc::new(Term::True),
        };
        lib.down = Arc::new(lib.family_fix(|l, j| l.down_branches(j)));
        lib.right = Arc::new(lib.family_fix(|l, j| l.right_branches(j)));
        lib.up = Arc::new(lib.family_fix(|l, j| l.up_branches(j)));
        lib
    }

    pub fn spec(&self) -> &LanguageSpec {
        &self.spec
    }

    /// `(s1 -> s1) * ((s2 -> s2) * …)`.
    pub fn family_type(&self) -> Type {
        let mut comps: Vec<Type> = self
            .spec
            .sorts()
            .iter()
            .map(|s| Type::arrow(Type::Base(s.clone()), Type::Base(s.clone())))
            .collect();
        let last = comps.pop().expect("a language has at least one sort");
        comps.into_iter().rev().fold(last, |acc, t| Type::product(t, acc))
    }

    fn index(&self, sort: &Sort) -> usize {
        self.spec
            .sorts()
            .iter()
            .position(|s| s == sort)
            .unwrap_or_else(|| panic!("unknown sort `{sort}`"))
    }

    /// Component of a family tuple for `sort`.
    fn project(&self, tuple: Term, sort: &Sort) -> Term {
        let n = self.spec.sorts().len();
        let i = self.index(sort);
        let mut t = tuple;
        for _ in 0..i {
            t = Term::proj2(t);
        }
        if i + 1 < n {
            t = Term::proj1(t);
        }
        t
    }

    fn tuple(&self, comps: Vec<Term>) -> Term {
        let mut comps = comps;
        let last = comps.pop().expect("a language has at least one sort");
        comps.into_iter().rev().fold(last, |acc, t| Term::pair(t, acc))
    }

    fn family_fix(&self, branches: impl Fn(&Self, &Sort) -> Vec<(Pattern, Term)>) -> Term {
        let comps = self
            .spec
            .sorts()
            .iter()
            .map(|j| {
                Term::lam(
                    SCRUTINEE,
                    Type::Base(j.clone()),
                    Term::matching(Term::var(SCRUTINEE), branches(self, j)),
                )
            })
            .collect();
        Term::fix(Term::lam(SELF, self.family_type(), self.tuple(comps)))
    }

    /// `fam_sort : sort -> sort`.
    pub fn function(&self, family: ZipperFamily, sort: &Sort) -> Term {
        let fam = match family {
            ZipperFamily::Down => &self.down,
            ZipperFamily::Right => &self.right,
            ZipperFamily::Up => &self.up,
        };
        self.project((**fam).clone(), sort)
    }

    pub fn down(&self, sort: &Sort) -> Term {
        self.function(ZipperFamily::Down, sort)
    }

    pub fn right(&self, sort: &Sort) -> Term {
        self.function(ZipperFamily::Right, sort)
    }

    pub fn up(&self, sort: &Sort) -> Term {
        self.function(ZipperFamily::Up, sort)
    }

    /// `set : k -> at -> at`, replacing the content of a `k` cursor.
    pub fn set(&self, k: &Sort, at: &Sort) -> Term {
        let fam = self.family_fix(|l, j| l.set_branches(k, j));
        Term::lam(NEW, Type::Base(k.clone()), self.project(fam, at))
    }

    /// `s → s`, failing on every argument.
    pub fn stuck(&self, sort: &Sort) -> Term {
        Term::lam("x", Type::Base(sort.clone()), fail(&Type::Base(sort.clone())))
    }

    /// Closed named definitions: `down_s`, `right_s`, `up_s` and `set_k`
    /// at `root`.
    pub fn definitions(&self, root: &Sort) -> Vec<(String, Term)> {
        let mut out = Vec::new();
        for s in self.spec.sorts() {
            out.push((format!("down_{s}"), self.down(s)));
            out.push((format!("right_{s}"), self.right(s)));
            out.push((format!("up_{s}"), self.up(s)));
        }
        for k in self.spec.sorts() {
            out.push((format!("set_{k}"), self.set(k, root)));
        }
        out
    }

    fn rec(&self, sort: &Sort) -> Term {
        self.project(Term::var(SELF), sort)
    }

    fn structural_ops(&self, j: &Sort) -> Vec<&OperatorDecl> {
        self.spec
            .operators_of_sort(j)
            .filter(|d| d.arity() > 0 && !d.is_cursor())
            .collect()
    }

    /// `o w1 … wn -> o (λy⃗. rec (w1 y⃗)) …`, then the cursor-free leaves.
    fn generic_branches(&self, j: &Sort) -> Vec<(Pattern, Term)> {
        let mut out: Vec<(Pattern, Term)> = self
            .structural_ops(j)
            .into_iter()
            .map(|d| {
                let rebuilt = (0..d.arity())
                    .map(|i| {
                        let v = &d.args[i];
                        under_binders(Term::var(arg_var(i)), &v.binds, |x| Term::app(self.rec(&v.body), x))
                    })
                    .collect::<Vec<_>>();
                (op_pattern(d, None), Term::apps(Term::op(&d.name), rebuilt))
            })
            .collect();
        out.push((Pattern::Wild, Term::var(SCRUTINEE)));
        out
    }

    fn cursor_fails(&self, j: &Sort) -> (Pattern, Term) {
        (Pattern::op(cursor_name(j), vec![Pattern::Wild]), fail(&Type::Base(j.clone())))
    }

    fn down_branches(&self, j: &Sort) -> Vec<(Pattern, Term)> {
        let mut out = Vec::new();
        for d in self.structural_ops(j) {
            let v = &d.args[0];
            let mut args: Vec<Term> = (0..d.arity()).map(|i| Term::var(arg_var(i))).collect();
            args[0] = under_binders(Term::var(arg_var(0)), &v.binds, |x| Term::app(Term::op(cursor_name(&v.body)), x));
            out.push((
                Pattern::op(cursor_name(j), vec![op_pattern(d, None)]),
                Term::apps(Term::op(&d.name), args),
            ));
        }
        out.push(self.cursor_fails(j));
        out.extend(self.generic_branches(j));
        out
    }

    fn right_branches(&self, j: &Sort) -> Vec<(Pattern, Term)> {
        let mut out = Vec::new();
        for d in self.structural_ops(j) {
            for i in 0..d.arity().saturating_sub(1) {
                let mut args: Vec<Term> = (0..d.arity()).map(|k| Term::var(arg_var(k))).collect();
                args[i] = Term::var(CONTENT);
                let next = &d.args[i + 1];
                args[i + 1] = under_binders(Term::var(arg_var(i + 1)), &next.binds, |x| {
                    Term::app(Term::op(cursor_name(&next.body)), x)
                });
                out.push((op_pattern(d, Some(i)), Term::apps(Term::op(&d.name), args)));
            }
        }
        out.push(self.cursor_fails(j));
        out.extend(self.generic_branches(j));
        out
    }

    fn up_branches(&self, j: &Sort) -> Vec<(Pattern, Term)> {
        let mut out = Vec::new();
        for d in self.structural_ops(j) {
            for i in 0..d.arity() {
                let mut args: Vec<Term> = (0..d.arity()).map(|k| Term::var(arg_var(k))).collect();
                args[i] = Term::var(CONTENT);
                out.push((
                    op_pattern(d, Some(i)),
                    Term::app(Term::op(cursor_name(j)), Term::apps(Term::op(&d.name), args)),
                ));
            }
        }
        out.push(self.cursor_fails(j));
        out.extend(self.generic_branches(j));
        out
    }

    fn set_branches(&self, k: &Sort, j: &Sort) -> Vec<(Pattern, Term)> {
        let mut out = Vec::new();
        if j == k {
            out.push((
                Pattern::op(cursor_name(j), vec![Pattern::Wild]),
                Term::app(Term::op(cursor_name(j)), Term::var(NEW)),
            ));
        } else {
            out.push(self.cursor_fails(j));
        }
        out.extend(self.generic_branches(j));
        out
    }
}

fn arg_var(i: usize) -> String {
    format!("w{}", i + 1)
}

/// `o w1 … wn`, with a cursor pattern `c` under the binders of argument
/// `cursor_at`.
fn op_pattern(d: &OperatorDecl, cursor_at: Option<usize>) -> Pattern {
    let args = (0..d.arity())
        .map(|i| {
            if Some(i) == cursor_at {
                let v = &d.args[i];
                Pattern::bind_n(
                    v.binds.len(),
                    Pattern::op(cursor_name(&v.body), vec![Pattern::var(CONTENT)]),
                )
            } else {
                Pattern::var(arg_var(i))
            }
        })
        .collect();
    Pattern::op(&d.name, args)
}

/// `λy1:s1 … λym:sm. f (w y1 … ym)`.
fn under_binders(w: Term, binds: &[Sort], f: impl FnOnce(Term) -> Term) -> Term {
    let names: Vec<String> = (1..=binds.len()).map(|i| format!("y{i}")).collect();
    let applied = Term::apps(w, names.iter().map(Term::var));
    binds
        .iter()
        .zip(&names)
        .rev()
        .fold(f(applied), |acc, (s, y)| Term::lam(y, Type::Base(s.clone()), acc))
}

/// A term of type `ty` whose evaluation fails to match.
pub(crate) fn fail(ty: &Type) -> Term {
    Term::matching(Term::True, vec![(Pattern::False, default_of(ty))])
}

fn default_of(ty: &Type) -> Term {
    match ty {
        Type::Base(s) => Term::op(hole_name(s)),
        Type::Bool => Term::False,
        Type::Arrow(a, b) => Term::lam("_", (**a).clone(), default_of(b)),
        Type::Product(a, b) => Term::pair(default_of(a), default_of(b)),
    }
}
