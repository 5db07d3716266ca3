//! Abstract binding trees over a [`LanguageSpec`].

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::language::{
    cursor_name, hole_name, Literal, LanguageSpec, Sort, CURSOR_PREFIX, HOLE_PREFIX,
};

/// An abstract binding tree. Bound variables keep their names; equality up
/// to renaming is [`alpha_eq`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Abt {
    Var(String),
    Op(Node),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Node {
    pub op: String,
    pub literal: Option<Literal>,
    pub args: Vec<Abstraction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Binder {
    pub name: String,
    pub sort: Sort,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Abstraction {
    pub binders: Vec<Binder>,
    pub body: Abt,
}

impl Abstraction {
    pub fn plain(body: Abt) -> Self {
        Abstraction {
            binders: Vec::new(),
            body,
        }
    }

    pub fn bind<I, N, S>(binders: I, body: Abt) -> Self
    where
        I: IntoIterator<Item = (N, S)>,
        N: Into<String>,
        S: Into<Sort>,
    {
        Abstraction {
            binders: binders
                .into_iter()
                .map(|(name, sort)| Binder {
                    name: name.into(),
                    sort: sort.into(),
                })
                .collect(),
            body,
        }
    }
}

impl Abt {
    pub fn var(name: impl Into<String>) -> Self {
        Abt::Var(name.into())
    }

    pub fn op(name: impl Into<String>, args: Vec<Abstraction>) -> Self {
        Abt::Op(Node {
            op: name.into(),
            literal: None,
            args,
        })
    }

    /// An operator whose arguments bind nothing.
    pub fn app(name: impl Into<String>, children: Vec<Abt>) -> Self {
        Abt::op(name, children.into_iter().map(Abstraction::plain).collect())
    }

    pub fn leaf(name: impl Into<String>) -> Self {
        Abt::op(name, Vec::new())
    }

    pub fn lit(name: impl Into<String>, literal: Literal) -> Self {
        Abt::Op(Node {
            op: name.into(),
            literal: Some(literal),
            args: Vec::new(),
        })
    }

    pub fn hole(sort: &Sort) -> Self {
        Abt::leaf(hole_name(sort))
    }

    pub fn cursor(sort: &Sort, body: Abt) -> Self {
        Abt::app(cursor_name(sort), vec![body])
    }

    pub fn node(&self) -> Option<&Node> {
        match self {
            Abt::Op(n) => Some(n),
            Abt::Var(_) => None,
        }
    }

    pub fn is_cursor(&self) -> bool {
        matches!(self, Abt::Op(n) if n.is_cursor())
    }

    /// The subtree enclosed by this node when it is a cursor.
    pub fn cursor_body(&self) -> Option<&Abt> {
        match self {
            Abt::Op(n) if n.is_cursor() => n.args.first().map(|a| &a.body),
            _ => None,
        }
    }

    /// Immediate subtrees, one per argument.
    pub fn children(&self) -> impl Iterator<Item = &Abt> {
        let args: &[Abstraction] = match self {
            Abt::Op(n) => &n.args,
            Abt::Var(_) => &[],
        };
        args.iter().map(|a| &a.body)
    }

    /// Sort of this tree in `env`.
    pub fn sort_of(&self, spec: &LanguageSpec, env: &SortEnv) -> Result<Sort, AbtError> {
        let mut env = env.clone();
        let mut path = Vec::new();
        sort_of_at(self, spec, &mut env, &mut path)
    }

    pub fn count_cursors(&self) -> usize {
        match self {
            Abt::Var(_) => 0,
            Abt::Op(n) => {
                usize::from(n.is_cursor()) + n.args.iter().map(|a| a.body.count_cursors()).sum::<usize>()
            }
        }
    }

    /// Names of variables occurring free in the tree.
    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(a: &Abt, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match a {
                Abt::Var(x) => {
                    if !bound.contains(x) {
                        out.insert(x.clone());
                    }
                }
                Abt::Op(n) => {
                    for arg in &n.args {
                        let depth = bound.len();
                        bound.extend(arg.binders.iter().map(|b| b.name.clone()));
                        go(&arg.body, bound, out);
                        bound.truncate(depth);
                    }
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().map(Abt::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().map(Abt::depth).max().unwrap_or(0)
    }

    pub fn subtree(&self, path: &[usize]) -> Option<&Abt> {
        let mut cur = self;
        for &i in path {
            cur = &cur.node()?.args.get(i)?.body;
        }
        Some(cur)
    }
}

impl Node {
    pub fn is_cursor(&self) -> bool {
        self.op.starts_with(CURSOR_PREFIX)
    }

    pub fn is_hole(&self) -> bool {
        self.op.starts_with(HOLE_PREFIX)
    }
}

fn sort_of_at(
    a: &Abt,
    spec: &LanguageSpec,
    env: &mut SortEnv,
    path: &mut Vec<usize>,
) -> Result<Sort, AbtError> {
    match a {
        Abt::Var(x) => env.lookup(x).cloned().ok_or_else(|| AbtError::UnboundVariable {
            name: x.clone(),
            path: path.clone(),
        }),
        Abt::Op(n) => {
            let decl = spec
                .lookup_operator(&n.op, n.literal.as_ref())
                .map_err(|e| AbtError::Operator {
                    message: e.to_string(),
                    path: path.clone(),
                })?;
            if decl.args.len() != n.args.len() {
                return Err(AbtError::ArityMismatch {
                    op: n.op.clone(),
                    expected: decl.args.len(),
                    found: n.args.len(),
                    path: path.clone(),
                });
            }
            for (i, (valence, arg)) in decl.args.iter().zip(&n.args).enumerate() {
                path.push(i);
                if valence.binds.len() != arg.binders.len() {
                    return Err(AbtError::BinderCount {
                        op: n.op.clone(),
                        expected: valence.binds.len(),
                        found: arg.binders.len(),
                        path: path.clone(),
                    });
                }
                for (j, b) in arg.binders.iter().enumerate() {
                    if arg.binders[..j].iter().any(|p| p.name == b.name) {
                        return Err(AbtError::DuplicateBinder {
                            name: b.name.clone(),
                            path: path.clone(),
                        });
                    }
                }
                let mark = env.len();
                for (b, expected) in arg.binders.iter().zip(&valence.binds) {
                    if &b.sort != expected {
                        return Err(AbtError::SortMismatch {
                            expected: expected.clone(),
                            found: b.sort.clone(),
                            path: path.clone(),
                        });
                    }
                    env.push(b.name.clone(), b.sort.clone());
                }
                let found = sort_of_at(&arg.body, spec, env, path)?;
                env.truncate(mark);
                if found != valence.body {
                    return Err(AbtError::SortMismatch {
                        expected: valence.body.clone(),
                        found,
                        path: path.clone(),
                    });
                }
                path.pop();
            }
            Ok(decl.result.clone())
        }
    }
}

/// In-scope variables and their sorts; later entries shadow earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SortEnv {
    entries: Vec<(String, Sort)>,
}

impl SortEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: String, sort: Sort) {
        self.entries.push((name, sort));
    }

    pub fn with(mut self, name: impl Into<String>, sort: impl Into<Sort>) -> Self {
        self.push(name.into(), sort.into());
        self
    }

    pub fn lookup(&self, name: &str) -> Option<&Sort> {
        self.entries.iter().rev().find(|(x, _)| x == name).map(|(_, s)| s)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn truncate(&mut self, len: usize) {
        self.entries.truncate(len);
    }

    pub fn iter(&self) -> impl Iterator<Item = &(String, Sort)> {
        self.entries.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AbtError {
    #[error("unbound variable `{name}` at {path:?}")]
    UnboundVariable { name: String, path: Vec<usize> },
    #[error("expected sort {expected}, found {found} at {path:?}")]
    SortMismatch {
        expected: Sort,
        found: Sort,
        path: Vec<usize>,
    },
    #[error("operator `{op}` expects {expected} arguments, found {found} at {path:?}")]
    ArityMismatch {
        op: String,
        expected: usize,
        found: usize,
        path: Vec<usize>,
    },
    #[error("argument of `{op}` binds {found} variables, expected {expected} at {path:?}")]
    BinderCount {
        op: String,
        expected: usize,
        found: usize,
        path: Vec<usize>,
    },
    #[error("binder `{name}` repeated in one abstraction at {path:?}")]
    DuplicateBinder { name: String, path: Vec<usize> },
    #[error("{message} at {path:?}")]
    Operator { message: String, path: Vec<usize> },
    #[error("tree contains no cursor")]
    NoCursor,
    #[error("tree contains {0} cursors")]
    MultipleCursors(usize),
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

/// A tree with exactly one cursor that sort-checks in the empty environment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WellFormedTree {
    tree: Abt,
    cursor_path: Vec<usize>,
    sort: Sort,
}

impl WellFormedTree {
    /// `cursor_s(hole_s)`, the minimal editable state.
    pub fn initial(spec: &LanguageSpec, sort: &Sort) -> Result<Self, AbtError> {
        check_well_formed(&Abt::cursor(sort, Abt::hole(sort)), spec)
    }

    pub fn tree(&self) -> &Abt {
        &self.tree
    }

    pub fn into_tree(self) -> Abt {
        self.tree
    }

    pub fn cursor_path(&self) -> &[usize] {
        &self.cursor_path
    }

    /// Sort of the whole tree.
    pub fn sort(&self) -> &Sort {
        &self.sort
    }

    /// The cursor node itself.
    pub fn cursor_node(&self) -> &Abt {
        self.tree
            .subtree(&self.cursor_path)
            .expect("cursor path is valid by construction")
    }

    /// The cursorless subtree enclosed by the cursor.
    pub fn focus(&self) -> &Abt {
        self.cursor_node()
            .cursor_body()
            .expect("cursor path ends at a cursor")
    }

    pub(crate) fn from_parts_unchecked(tree: Abt, cursor_path: Vec<usize>, sort: Sort) -> Self {
        WellFormedTree {
            tree,
            cursor_path,
            sort,
        }
    }
}

impl fmt::Display for WellFormedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tree)
    }
}

pub fn check_well_formed(a: &Abt, spec: &LanguageSpec) -> Result<WellFormedTree, AbtError> {
    match a.count_cursors() {
        0 => return Err(AbtError::NoCursor),
        1 => {}
        n => return Err(AbtError::MultipleCursors(n)),
    }
    let sort = a.sort_of(spec, &SortEnv::new())?;
    let path = cursor_path(a).expect("exactly one cursor");
    Ok(WellFormedTree {
        tree: a.clone(),
        cursor_path: path,
        sort,
    })
}

fn cursor_path(a: &Abt) -> Option<Vec<usize>> {
    if a.is_cursor() {
        return Some(Vec::new());
    }
    let node = a.node()?;
    node.args.iter().enumerate().find_map(|(i, arg)| {
        cursor_path(&arg.body).map(|mut p| {
            p.insert(0, i);
            p
        })
    })
}

/// Equality up to consistent renaming of bound variables. Free variables
/// compare by name.
pub fn alpha_eq(a: &Abt, b: &Abt) -> bool {
    fn go<'a>(a: &'a Abt, b: &'a Abt, sa: &mut Vec<&'a str>, sb: &mut Vec<&'a str>) -> bool {
        match (a, b) {
            (Abt::Var(x), Abt::Var(y)) => {
                let ix = sa.iter().rposition(|v| *v == x);
                let iy = sb.iter().rposition(|v| *v == y);
                match (ix, iy) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (Abt::Op(m), Abt::Op(n)) => {
                m.op == n.op
                    && m.literal == n.literal
                    && m.args.len() == n.args.len()
                    && m.args.iter().zip(&n.args).all(|(p, q)| {
                        if p.binders.len() != q.binders.len()
                            || p.binders.iter().zip(&q.binders).any(|(x, y)| x.sort != y.sort)
                        {
                            return false;
                        }
                        let (la, lb) = (sa.len(), sb.len());
                        sa.extend(p.binders.iter().map(|v| v.name.as_str()));
                        sb.extend(q.binders.iter().map(|v| v.name.as_str()));
                        let ok = go(&p.body, &q.body, sa, sb);
                        sa.truncate(la);
                        sb.truncate(lb);
                        ok
                    })
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new(), &mut Vec::new())
}

/// Deterministic fresh names `x1, x2, …` skipping everything in `avoid`.
pub struct FreshNames<'a> {
    avoid: &'a BTreeSet<String>,
    next: usize,
}

impl<'a> FreshNames<'a> {
    pub fn new(avoid: &'a BTreeSet<String>) -> Self {
        FreshNames { avoid, next: 1 }
    }
}

impl Iterator for FreshNames<'_> {
    type Item = String;

    fn next(&mut self) -> Option<String> {
        loop {
            let name = format!("x{}", self.next);
            self.next += 1;
            if !self.avoid.contains(&name) {
                return Some(name);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// s-expression text format

impl fmt::Display for Abt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Abt::Var(x) => write!(f, "(var {x})"),
            Abt::Op(n) if n.is_hole() => write!(f, "(hole {})", &n.op[HOLE_PREFIX.len()..]),
            Abt::Op(n) if n.is_cursor() => {
                write!(f, "(cursor {})", n.args[0].body)
            }
            Abt::Op(n) => {
                write!(f, "(op {}", n.op)?;
                if let Some(lit) = &n.literal {
                    write!(f, " {lit}")?;
                }
                for arg in &n.args {
                    if arg.binders.is_empty() {
                        write!(f, " {}", arg.body)?;
                    } else {
                        let names: Vec<&str> = arg.binders.iter().map(|b| b.name.as_str()).collect();
                        write!(f, " (bind ({}) {})", names.join(" "), arg.body)?;
                    }
                }
                write!(f, ")")
            }
        }
    }
}

pub fn print_tree(a: &Abt) -> String {
    a.to_string()
}

/// Parses the s-expression form of a tree. Binder sorts come from the
/// operators' valences; the sort of a `(cursor …)` node is the sort of its
/// child.
pub fn parse_tree(text: &str, spec: &LanguageSpec) -> Result<Abt, AbtError> {
    let sexp = sexp::parse(text)?;
    let mut env = SortEnv::new();
    elaborate(&sexp, spec, &mut env, text)
}

const KEYWORDS: [&str; 5] = ["op", "hole", "cursor", "var", "bind"];

fn elaborate(
    s: &sexp::Sexp,
    spec: &LanguageSpec,
    env: &mut SortEnv,
    src: &str,
) -> Result<Abt, AbtError> {
    let err = |at: usize, msg: String| {
        let (line, column) = sexp::line_col(src, at);
        AbtError::Parse {
            line,
            column,
            message: msg,
        }
    };
    let items = match s {
        sexp::Sexp::List(items, _) => items,
        sexp::Sexp::Atom(a, at) => return Err(err(*at, format!("expected a tree, found `{a}`"))),
    };
    let head = match items.first() {
        Some(sexp::Sexp::Atom(h, _)) => h.as_str(),
        _ => return Err(err(s.pos(), "expected an operator name".into())),
    };
    match head {
        "var" => match &items[1..] {
            [sexp::Sexp::Atom(x, _)] => Ok(Abt::var(x.clone())),
            _ => Err(err(s.pos(), "expected (var <ident>)".into())),
        },
        "hole" => match &items[1..] {
            [sexp::Sexp::Atom(sort, at)] => {
                let sort = spec.sort(sort).map_err(|e| err(*at, e.to_string()))?;
                if spec.hole_op(sort).is_none() {
                    return Err(err(s.pos(), "holes need an editor-extended spec".into()));
                }
                Ok(Abt::hole(sort))
            }
            _ => Err(err(s.pos(), "expected (hole <sort>)".into())),
        },
        "cursor" => match &items[1..] {
            [child] => {
                let body = elaborate(child, spec, env, src)?;
                let sort = match &body {
                    Abt::Var(x) => env
                        .lookup(x)
                        .cloned()
                        .ok_or_else(|| err(child.pos(), format!("unbound variable `{x}` under cursor")))?,
                    Abt::Op(n) => spec
                        .operator(&n.op)
                        .map(|d| d.result.clone())
                        .ok_or_else(|| err(child.pos(), format!("unknown operator `{}`", n.op)))?,
                };
                if spec.cursor_op(&sort).is_none() {
                    return Err(err(s.pos(), "cursors need an editor-extended spec".into()));
                }
                Ok(Abt::cursor(&sort, body))
            }
            _ => Err(err(s.pos(), "expected (cursor <tree>)".into())),
        },
        "bind" => Err(err(s.pos(), "`bind` only appears as an operator argument".into())),
        _ => {
            let (name, name_at, rest) = if head == "op" {
                match items.get(1) {
                    Some(sexp::Sexp::Atom(n, at)) => (n.as_str(), *at, &items[2..]),
                    _ => return Err(err(s.pos(), "expected (op <name> …)".into())),
                }
            } else {
                (head, items[0].pos(), &items[1..])
            };
            if name.starts_with(CURSOR_PREFIX) || name.starts_with(HOLE_PREFIX) {
                return Err(err(name_at, format!("write `{name}` as (cursor …) or (hole …)")));
            }
            let decl = spec
                .operator(name)
                .ok_or_else(|| err(name_at, format!("unknown operator `{name}`")))?
                .clone();
            let mut rest = rest;
            let literal = if decl.is_literal() {
                match rest.first() {
                    Some(sexp::Sexp::Atom(text, at)) => {
                        rest = &rest[1..];
                        Some(
                            Literal::parse_as(decl.param, text)
                                .ok_or_else(|| err(*at, format!("bad literal `{text}` for `{name}`")))?,
                        )
                    }
                    _ => return Err(err(s.pos(), format!("operator `{name}` needs a literal"))),
                }
            } else {
                None
            };
            if rest.len() != decl.args.len() {
                return Err(err(
                    s.pos(),
                    format!("operator `{name}` expects {} arguments, found {}", decl.args.len(), rest.len()),
                ));
            }
            let mut args = Vec::with_capacity(rest.len());
            for (arg, valence) in rest.iter().zip(&decl.args) {
                if valence.binds.is_empty() {
                    args.push(Abstraction::plain(elaborate(arg, spec, env, src)?));
                    continue;
                }
                let (names, body) = match arg {
                    sexp::Sexp::List(parts, _)
                        if parts.len() == 3 && matches!(&parts[0], sexp::Sexp::Atom(b, _) if b == "bind") =>
                    {
                        match &parts[1] {
                            sexp::Sexp::List(names, _) => (names, &parts[2]),
                            other => return Err(err(other.pos(), "expected a binder list".into())),
                        }
                    }
                    other => return Err(err(other.pos(), "expected (bind (<ident>*) <tree>)".into())),
                };
                if names.len() != valence.binds.len() {
                    return Err(err(
                        arg.pos(),
                        format!("expected {} binders, found {}", valence.binds.len(), names.len()),
                    ));
                }
                let mut binders = Vec::new();
                for (n, sort) in names.iter().zip(&valence.binds) {
                    match n {
                        sexp::Sexp::Atom(x, at) if crate::language::is_identifier(x) && !KEYWORDS.contains(&x.as_str()) => {
                            if binders.iter().any(|b: &Binder| &b.name == x) {
                                return Err(err(*at, format!("binder `{x}` repeated")));
                            }
                            binders.push(Binder {
                                name: x.clone(),
                                sort: sort.clone(),
                            })
                        }
                        other => return Err(err(other.pos(), "expected a binder name".into())),
                    }
                }
                let mark = env.len();
                for b in &binders {
                    env.push(b.name.clone(), b.sort.clone());
                }
                let body = elaborate(body, spec, env, src);
                env.truncate(mark);
                args.push(Abstraction { binders, body: body? });
            }
            Ok(Abt::Op(Node {
                op: name.to_owned(),
                literal,
                args,
            }))
        }
    }
}

pub(crate) mod sexp {
    use super::AbtError;

    #[derive(Debug)]
    pub enum Sexp {
        Atom(String, usize),
        List(Vec<Sexp>, usize),
    }

    impl Sexp {
        pub fn pos(&self) -> usize {
            match self {
                Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
            }
        }
    }

    pub fn line_col(src: &str, offset: usize) -> (usize, usize) {
        let before = &src[..offset.min(src.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
        (line, column)
    }

    fn error(src: &str, at: usize, message: &str) -> AbtError {
        let (line, column) = line_col(src, at);
        AbtError::Parse {
            line,
            column,
            message: message.to_owned(),
        }
    }

    pub fn parse(src: &str) -> Result<Sexp, AbtError> {
        let mut pos = 0;
        let value = parse_one(src, &mut pos)?;
        skip_ws(src, &mut pos);
        if pos < src.len() {
            return Err(error(src, pos, "unexpected input after tree"));
        }
        Ok(value)
    }

    fn skip_ws(src: &str, pos: &mut usize) {
        let bytes = src.as_bytes();
        while *pos < bytes.len() {
            if bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            } else if bytes[*pos] == b';' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn parse_one(src: &str, pos: &mut usize) -> Result<Sexp, AbtError> {
        skip_ws(src, pos);
        let bytes = src.as_bytes();
        match bytes.get(*pos) {
            None => Err(error(src, *pos, "unexpected end of input")),
            Some(b'(') => {
                let start = *pos;
                *pos += 1;
                let mut items = Vec::new();
                loop {
                    skip_ws(src, pos);
                    match bytes.get(*pos) {
                        None => return Err(error(src, start, "unclosed parenthesis")),
                        Some(b')') => {
                            *pos += 1;
                            return Ok(Sexp::List(items, start));
                        }
                        _ => items.push(parse_one(src, pos)?),
                    }
                }
            }
            Some(b')') => Err(error(src, *pos, "unexpected `)`")),
            Some(_) => {
                let start = *pos;
                while *pos < bytes.len()
                    && !bytes[*pos].is_ascii_whitespace()
                    && bytes[*pos] != b'('
                    && bytes[*pos] != b')'
                {
                    *pos += 1;
                }
                Ok(Sexp::Atom(src[start..*pos].to_owned(), start))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::LETLANG;

    fn spec() -> LanguageSpec {
        LanguageSpec::load(LETLANG).unwrap().editor_extend().unwrap()
    }

    fn e() -> Sort {
        Sort::new("e")
    }

    fn s() -> Sort {
        Sort::new("s")
    }

    fn num(n: i64) -> Abt {
        Abt::lit("num", Literal::Int(n))
    }

    // let(num[5]; x.exp(var x))
    fn let_exp() -> Abt {
        Abt::op(
            "let",
            vec![
                Abstraction::plain(num(5)),
                Abstraction::bind([("x", "e")], Abt::app("exp", vec![Abt::var("x")])),
            ],
        )
    }

    #[test]
    fn sorts() {
        let spec = spec();
        assert_eq!(let_exp().sort_of(&spec, &SortEnv::new()).unwrap(), s());
        assert_eq!(Abt::hole(&e()).sort_of(&spec, &SortEnv::new()).unwrap(), e());
        let err = Abt::app("exp", vec![Abt::var("x")])
            .sort_of(&spec, &SortEnv::new())
            .unwrap_err();
        assert_eq!(
            err,
            AbtError::UnboundVariable {
                name: "x".into(),
                path: vec![0]
            }
        );
        let with_x = SortEnv::new().with("x", "e");
        assert_eq!(Abt::var("x").sort_of(&spec, &with_x).unwrap(), e());
    }

    #[test]
    fn sort_errors_report_paths() {
        let spec = spec();
        let bad = Abt::app("plus", vec![num(1), Abt::hole(&s())]);
        assert_eq!(
            bad.sort_of(&spec, &SortEnv::new()).unwrap_err(),
            AbtError::SortMismatch {
                expected: e(),
                found: s(),
                path: vec![1]
            }
        );
        let short = Abt::app("plus", vec![num(1)]);
        assert!(matches!(
            short.sort_of(&spec, &SortEnv::new()),
            Err(AbtError::ArityMismatch { expected: 2, found: 1, .. })
        ));
        let unbound_binder = Abt::op(
            "let",
            vec![Abstraction::plain(num(5)), Abstraction::plain(Abt::hole(&s()))],
        );
        assert!(matches!(
            unbound_binder.sort_of(&spec, &SortEnv::new()),
            Err(AbtError::BinderCount { .. })
        ));
    }

    #[test]
    fn cursor_counts() {
        let one = Abt::op(
            "let",
            vec![
                Abstraction::plain(Abt::cursor(&e(), Abt::hole(&e()))),
                Abstraction::bind(
                    [("x", "e")],
                    Abt::app("exp", vec![Abt::app("plus", vec![Abt::var("x"), Abt::hole(&e())])]),
                ),
            ],
        );
        assert_eq!(one.count_cursors(), 1);
        assert_eq!(Abt::hole(&e()).count_cursors(), 0);
        let two = Abt::app(
            "plus",
            vec![Abt::cursor(&e(), Abt::hole(&e())), Abt::cursor(&e(), Abt::hole(&e()))],
        );
        assert_eq!(two.count_cursors(), 2);
    }

    #[test]
    fn well_formedness() {
        let spec = spec();
        let t = Abt::op(
            "let",
            vec![
                Abstraction::plain(Abt::cursor(&e(), Abt::hole(&e()))),
                Abstraction::bind(
                    [("x", "e")],
                    Abt::app("exp", vec![Abt::app("plus", vec![Abt::var("x"), num(5)])]),
                ),
            ],
        );
        let wf = check_well_formed(&t, &spec).unwrap();
        assert_eq!(wf.cursor_path(), &[0]);
        assert_eq!(wf.sort(), &s());
        assert_eq!(wf.focus(), &Abt::hole(&e()));

        assert_eq!(check_well_formed(&Abt::hole(&s()), &spec).unwrap_err(), AbtError::NoCursor);
        let nested = Abt::cursor(&s(), Abt::app("exp", vec![Abt::cursor(&e(), Abt::hole(&e()))]));
        assert_eq!(check_well_formed(&nested, &spec).unwrap_err(), AbtError::MultipleCursors(2));
        let ill = Abt::cursor(&s(), Abt::app("exp", vec![Abt::hole(&s())]));
        assert!(matches!(check_well_formed(&ill, &spec), Err(AbtError::SortMismatch { .. })));
    }

    #[test]
    fn alpha_equivalence() {
        let a = Abt::op(
            "let",
            vec![
                Abstraction::plain(Abt::hole(&e())),
                Abstraction::bind([("x", "e")], Abt::app("exp", vec![Abt::var("x")])),
            ],
        );
        let b = Abt::op(
            "let",
            vec![
                Abstraction::plain(Abt::hole(&e())),
                Abstraction::bind([("y", "e")], Abt::app("exp", vec![Abt::var("y")])),
            ],
        );
        assert!(alpha_eq(&a, &b));
        assert!(!alpha_eq(&Abt::var("x"), &Abt::var("y")));
        assert!(alpha_eq(&let_exp(), &let_exp()));

        // let x = _ in let y = _ in x  vs  let x = _ in let x = _ in x
        let outer = |inner_name: &str, refer: &str| {
            Abt::op(
                "let",
                vec![
                    Abstraction::plain(Abt::hole(&e())),
                    Abstraction::bind(
                        [("x", "e")],
                        Abt::op(
                            "let",
                            vec![
                                Abstraction::plain(Abt::hole(&e())),
                                Abstraction::bind([(inner_name, "e")], Abt::app("exp", vec![Abt::var(refer)])),
                            ],
                        ),
                    ),
                ],
            )
        };
        assert!(!alpha_eq(&outer("y", "x"), &outer("x", "x")));
        assert!(alpha_eq(&outer("y", "y"), &outer("x", "x")));
    }

    #[test]
    fn parse_examples() {
        let spec = spec();
        let t = parse_tree("(let (num 5) (bind (x) (exp (var x))))", &spec).unwrap();
        assert_eq!(t, let_exp());
        assert_eq!(parse_tree("(hole e)", &spec).unwrap(), Abt::hole(&e()));
        let t = parse_tree(
            "(op let (cursor (hole e)) (bind (x) (op exp (op plus (var x) (op num 5)))))",
            &spec,
        )
        .unwrap();
        let wf = check_well_formed(&t, &spec).unwrap();
        assert_eq!(wf.cursor_path(), &[0]);
        assert_eq!(wf.cursor_node(), &Abt::cursor(&e(), Abt::hole(&e())));
    }

    #[test]
    fn cursor_over_bound_variable_takes_binder_sort() {
        let spec = spec();
        let t = parse_tree("(let (num 1) (bind (x) (exp (cursor (var x)))))", &spec).unwrap();
        let wf = check_well_formed(&t, &spec).unwrap();
        assert_eq!(wf.cursor_node(), &Abt::cursor(&e(), Abt::var("x")));
    }

    #[test]
    fn parse_errors_have_locations() {
        let spec = spec();
        match parse_tree("(plus (num 1)\n  (frob))", &spec).unwrap_err() {
            AbtError::Parse { line, column, .. } => assert_eq!((line, column), (2, 4)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_tree("(plus (num 1)", &spec), Err(AbtError::Parse { .. })));
        assert!(matches!(parse_tree("(num x)", &spec), Err(AbtError::Parse { .. })));
        assert!(matches!(parse_tree("(let (num 1) (exp (hole e)))", &spec), Err(AbtError::Parse { .. })));
    }

    #[test]
    fn print_is_canonical() {
        let t = parse_tree("(let (num 5) (bind (x) (exp (cursor (var x)))))", &spec()).unwrap();
        assert_eq!(
            print_tree(&t),
            "(op let (op num 5) (bind (x) (op exp (cursor (var x)))))"
        );
    }

    #[test]
    fn fresh_names_skip_avoided() {
        let avoid: BTreeSet<String> = ["x1".to_owned(), "x3".to_owned()].into();
        let names: Vec<String> = FreshNames::new(&avoid).take(3).collect();
        assert_eq!(names, ["x2", "x4", "x5"]);
    }
}
