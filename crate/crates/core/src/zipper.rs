//! Cursor contexts and the transition rules for cursor movement and
//! substitution.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::abt::{Abstraction, Abt, Binder, FreshNames, Node, SortEnv, WellFormedTree};
use crate::language::{Literal, LanguageSpec, OperatorDecl, Sort};

/// Atomic prefix command.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Apc {
    /// Move into the n-th argument, 1-based.
    Child(usize),
    Parent,
    Insert { op: String, literal: Option<Literal> },
}

impl Apc {
    pub fn insert(op: impl Into<String>) -> Self {
        Apc::Insert {
            op: op.into(),
            literal: None,
        }
    }

    pub fn insert_lit(op: impl Into<String>, literal: Literal) -> Self {
        Apc::Insert {
            op: op.into(),
            literal: Some(literal),
        }
    }
}

impl fmt::Display for Apc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Apc::Child(n) => write!(f, "child {n}"),
            Apc::Parent => write!(f, "parent"),
            Apc::Insert { op, literal: None } => write!(f, "{{{op}}}"),
            Apc::Insert {
                op,
                literal: Some(l),
            } => write!(f, "{{{op}:{l}}}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StuckReason {
    SortMismatch,
    NoSuchChild,
    AtRoot,
    UnknownOperator,
}

impl StuckReason {
    pub fn code(self) -> &'static str {
        match self {
            StuckReason::SortMismatch => "sort-mismatch",
            StuckReason::NoSuchChild => "no-such-child",
            StuckReason::AtRoot => "at-root",
            StuckReason::UnknownOperator => "unknown-operator",
        }
    }
}

impl fmt::Display for StuckReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// A command with no applicable rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stuck {
    pub reason: StuckReason,
    pub detail: String,
}

impl Stuck {
    fn new(reason: StuckReason, detail: impl Into<String>) -> Self {
        Stuck {
            reason,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Stuck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.reason, self.detail)
    }
}

/// One step of a path from the root to the context hole: the parent node
/// with the hole in one of its argument positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub op: String,
    pub literal: Option<Literal>,
    pub result: Sort,
    pub left: Vec<Abstraction>,
    pub binders: Vec<Binder>,
    pub right: Vec<Abstraction>,
}

impl Frame {
    fn plug(&self, body: Abt) -> Abt {
        let mut args = self.left.clone();
        args.push(Abstraction {
            binders: self.binders.clone(),
            body,
        });
        args.extend(self.right.iter().cloned());
        Abt::Op(Node {
            op: self.op.clone(),
            literal: self.literal.clone(),
            args,
        })
    }
}

/// A one-hole context; frames are ordered from the root inwards.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CursorCtx {
    pub frames: Vec<Frame>,
}

impl CursorCtx {
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Fills the hole with `focus`.
    pub fn recompose(&self, focus: Abt) -> Abt {
        self.frames.iter().rev().fold(focus, |acc, frame| frame.plug(acc))
    }

    /// Variables bound around the hole.
    pub fn sort_env(&self) -> SortEnv {
        let mut env = SortEnv::new();
        for b in self.frames.iter().flat_map(|f| &f.binders) {
            env.push(b.name.clone(), b.sort.clone());
        }
        env
    }
}

/// Splits a well-formed tree into the context reaching down to the cursor
/// and the cursor node itself.
pub fn decompose(t: &WellFormedTree, spec: &LanguageSpec) -> (CursorCtx, Abt) {
    let mut frames = Vec::with_capacity(t.cursor_path().len());
    let mut cur = t.tree();
    for &i in t.cursor_path() {
        let node = cur.node().expect("path runs through operator nodes");
        let result = spec
            .operator(&node.op)
            .map(|d| d.result.clone())
            .expect("well-formed trees use declared operators");
        frames.push(Frame {
            op: node.op.clone(),
            literal: node.literal.clone(),
            result,
            left: node.args[..i].to_vec(),
            binders: node.args[i].binders.clone(),
            right: node.args[i + 1..].to_vec(),
        });
        cur = &node.args[i].body;
    }
    (CursorCtx { frames }, cur.clone())
}

/// `o(x⃗1.hole; …; x⃗n.hole)` with fresh binders, or the literal leaf.
pub fn fresh_template(
    decl: &OperatorDecl,
    literal: Option<&Literal>,
    avoid: &std::collections::BTreeSet<String>,
) -> Abt {
    if decl.is_variable_ref() {
        if let Some(Literal::Name(x)) = literal {
            return Abt::var(x.clone());
        }
    }
    let mut fresh = FreshNames::new(avoid);
    let args = decl
        .args
        .iter()
        .map(|valence| Abstraction {
            binders: valence
                .binds
                .iter()
                .map(|sort| Binder {
                    name: fresh.next().expect("infinite supply"),
                    sort: sort.clone(),
                })
                .collect(),
            body: Abt::hole(&valence.body),
        })
        .collect();
    Abt::Op(Node {
        op: decl.name.clone(),
        literal: literal.cloned(),
        args,
    })
}

/// Applies one atomic command.
pub fn apply_command(
    t: &WellFormedTree,
    cmd: &Apc,
    spec: &LanguageSpec,
) -> Result<WellFormedTree, Stuck> {
    let (ctx, cursor) = decompose(t, spec);
    let cursor_node = cursor.node().expect("focus is the cursor node");
    let cursor_sort = spec
        .operator(&cursor_node.op)
        .map(|d| d.result.clone())
        .expect("cursor operator belongs to the spec");
    let enclosed = &cursor_node.args[0].body;
    let path = t.cursor_path().to_vec();

    match cmd {
        Apc::Insert { op, literal } => {
            let decl = spec
                .lookup_operator(op, literal.as_ref())
                .map_err(|e| Stuck::new(StuckReason::UnknownOperator, e.to_string()))?;
            if decl.is_cursor() {
                return Err(Stuck::new(
                    StuckReason::UnknownOperator,
                    format!("`{op}` is not an insertable operator"),
                ));
            }
            if decl.result != cursor_sort {
                return Err(Stuck::new(
                    StuckReason::SortMismatch,
                    format!("`{op}` has sort {}, cursor is at sort {cursor_sort}", decl.result),
                ));
            }
            if decl.is_variable_ref() {
                let Some(Literal::Name(x)) = literal else {
                    unreachable!("lookup_operator checked the literal kind")
                };
                match ctx.sort_env().lookup(x) {
                    Some(sort) if *sort == cursor_sort => {}
                    Some(sort) => {
                        return Err(Stuck::new(
                            StuckReason::SortMismatch,
                            format!("variable `{x}` has sort {sort}, cursor is at sort {cursor_sort}"),
                        ))
                    }
                    None => {
                        return Err(Stuck::new(
                            StuckReason::SortMismatch,
                            format!("variable `{x}` is not in scope"),
                        ))
                    }
                }
            }
            let template = fresh_template(decl, literal.as_ref(), &t.tree().free_vars());
            let tree = ctx.recompose(Abt::cursor(&cursor_sort, template));
            Ok(WellFormedTree::from_parts_unchecked(tree, path, t.sort().clone()))
        }
        Apc::Child(i) => {
            let node = match enclosed {
                Abt::Op(n) if *i >= 1 && *i <= n.args.len() => n,
                _ => {
                    return Err(Stuck::new(
                        StuckReason::NoSuchChild,
                        format!("the enclosed tree has no argument {i}"),
                    ))
                }
            };
            let decl = spec
                .operator(&node.op)
                .expect("well-formed trees use declared operators");
            let mut node = node.clone();
            let slot = &mut node.args[i - 1];
            let body = std::mem::replace(&mut slot.body, Abt::Var(String::new()));
            slot.body = Abt::cursor(&decl.args[i - 1].body, body);
            let tree = ctx.recompose(Abt::Op(node));
            let mut path = path;
            path.push(i - 1);
            Ok(WellFormedTree::from_parts_unchecked(tree, path, t.sort().clone()))
        }
        Apc::Parent => {
            let mut ctx = ctx;
            let frame = ctx
                .frames
                .pop()
                .ok_or_else(|| Stuck::new(StuckReason::AtRoot, "the cursor is at the root"))?;
            let parent = frame.plug(enclosed.clone());
            let tree = ctx.recompose(Abt::cursor(&frame.result, parent));
            let mut path = path;
            path.pop();
            Ok(WellFormedTree::from_parts_unchecked(tree, path, t.sort().clone()))
        }
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

    fn tree(text: &str) -> Abt {
        parse_tree(text, &spec()).unwrap()
    }

    #[test]
    fn decompose_example_tree() {
        let t = wf("(let (cursor (hole e)) (bind (x) (exp (plus (var x) (num 5)))))");
        let (ctx, focus) = decompose(&t, &spec());
        assert_eq!(focus, tree("(cursor (hole e))"));
        assert_eq!(ctx.frames.len(), 1);
        let frame = &ctx.frames[0];
        assert_eq!(frame.op, "let");
        assert!(frame.left.is_empty());
        assert!(frame.binders.is_empty());
        assert_eq!(frame.right.len(), 1);
        assert_eq!(frame.right[0].binders[0].name, "x");
        assert_eq!(frame.right[0].body, tree("(let (num 0) (bind (x) (exp (plus (var x) (num 5)))))").subtree(&[1]).unwrap().clone());
        assert_eq!(ctx.recompose(focus), *t.tree());
    }

    #[test]
    fn decompose_at_root() {
        let t = wf("(cursor (hole s))");
        let (ctx, focus) = decompose(&t, &spec());
        assert!(ctx.is_empty());
        assert_eq!(focus, *t.tree());
    }

    #[test]
    fn insert_plus_at_hole() {
        let t = wf("(cursor (hole e))");
        let out = apply_command(&t, &Apc::insert("plus"), &spec()).unwrap();
        assert_eq!(*out.tree(), tree("(cursor (plus (hole e) (hole e)))"));
    }

    #[test]
    fn insert_statement_into_expression_is_stuck() {
        let t = wf("(let (cursor (hole e)) (bind (x) (exp (var x))))");
        let stuck = apply_command(&t, &Apc::insert("let"), &spec()).unwrap_err();
        assert_eq!(stuck.reason, StuckReason::SortMismatch);
    }

    #[test]
    fn insert_unknown_or_cursor_is_stuck() {
        let t = wf("(cursor (hole e))");
        let spec = spec();
        for cmd in [Apc::insert("minus"), Apc::insert("cursor_e"), Apc::insert("num")] {
            assert_eq!(
                apply_command(&t, &cmd, &spec).unwrap_err().reason,
                StuckReason::UnknownOperator,
                "{cmd}"
            );
        }
    }

    #[test]
    fn insert_literal_and_variables() {
        let spec = spec();
        let t = wf("(let (num 1) (bind (x) (exp (cursor (hole e)))))");
        let out = apply_command(&t, &Apc::insert_lit("num", Literal::Int(7)), &spec).unwrap();
        assert_eq!(*out.tree(), tree("(let (num 1) (bind (x) (exp (cursor (num 7)))))"));
        let out = apply_command(&t, &Apc::insert_lit("var", Literal::Name("x".into())), &spec).unwrap();
        assert_eq!(*out.tree(), tree("(let (num 1) (bind (x) (exp (cursor (var x)))))"));
        let stuck = apply_command(&t, &Apc::insert_lit("var", Literal::Name("y".into())), &spec).unwrap_err();
        assert_eq!(stuck.reason, StuckReason::SortMismatch);
        // the bound variable is not in scope in the first argument
        let t = wf("(let (cursor (num 1)) (bind (x) (exp (hole e))))");
        let stuck = apply_command(&t, &Apc::insert_lit("var", Literal::Name("x".into())), &spec).unwrap_err();
        assert_eq!(stuck.reason, StuckReason::SortMismatch);
    }

    #[test]
    fn insert_let_uses_fresh_binder() {
        let t = wf("(cursor (hole s))");
        let out = apply_command(&t, &Apc::insert("let"), &spec()).unwrap();
        assert_eq!(*out.tree(), tree("(cursor (let (hole e) (bind (x1) (hole s))))"));
    }

    #[test]
    fn child_and_parent_on_let() {
        let spec = spec();
        let t = wf("(cursor (let (num 1) (bind (x) (exp (var x)))))");
        let c1 = apply_command(&t, &Apc::Child(1), &spec).unwrap();
        assert_eq!(*c1.tree(), tree("(let (cursor (num 1)) (bind (x) (exp (var x))))"));
        assert_eq!(c1.cursor_path(), &[0]);
        let c2 = apply_command(&t, &Apc::Child(2), &spec).unwrap();
        assert_eq!(*c2.tree(), tree("(let (num 1) (bind (x) (cursor (exp (var x)))))"));
        let back = apply_command(&c2, &Apc::Parent, &spec).unwrap();
        assert!(alpha_eq(back.tree(), t.tree()));
        assert_eq!(back, t);
    }

    #[test]
    fn stuck_movements() {
        let spec = spec();
        let root = wf("(cursor (plus (hole e) (hole e)))");
        assert_eq!(apply_command(&root, &Apc::Parent, &spec).unwrap_err().reason, StuckReason::AtRoot);
        assert_eq!(apply_command(&root, &Apc::Child(3), &spec).unwrap_err().reason, StuckReason::NoSuchChild);
        assert_eq!(apply_command(&root, &Apc::Child(0), &spec).unwrap_err().reason, StuckReason::NoSuchChild);
        for leaf in ["(cursor (hole e))", "(cursor (num 3))", "(let (num 1) (bind (x) (exp (cursor (var x)))))"] {
            let t = wf(leaf);
            assert_eq!(apply_command(&t, &Apc::Child(1), &spec).unwrap_err().reason, StuckReason::NoSuchChild);
        }
    }

    #[test]
    fn templates() {
        let spec = spec();
        let none = Default::default();
        assert_eq!(
            fresh_template(spec.operator("let").unwrap(), None, &none),
            tree("(let (hole e) (bind (x1) (hole s)))")
        );
        assert_eq!(
            fresh_template(spec.operator("num").unwrap(), Some(&Literal::Int(7)), &none),
            tree("(num 7)")
        );
        assert_eq!(
            fresh_template(spec.operator("plus").unwrap(), None, &none),
            tree("(plus (hole e) (hole e))")
        );
    }
}
