//! Seeded random trees, commands, conditions and scripts.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::abt::{check_well_formed, Abstraction, Abt, Binder, Node, WellFormedTree};
use crate::engine::EditorExpr;
use crate::language::{LanguageSpec, Literal, ParamKind, Sort};
use crate::logic::{Condition, OpRef};
use crate::zipper::Apc;

const NAMES: [&str; 3] = ["x", "y", "z"];

/// Knobs for the generators.
#[derive(Debug, Clone)]
pub struct GenConfig {
    /// Depth bound for trees, counting the cursor.
    pub max_depth: usize,
    /// Node bound for conditions.
    pub condition_size: usize,
    /// Node bound for scripts.
    pub script_size: usize,
    /// Allow `var:x` style references in conditions.
    pub named_conditions: bool,
    /// Allow inserting cursor operators, which always gets stuck.
    pub invalid_inserts: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_depth: 8,
            condition_size: 5,
            script_size: 12,
            named_conditions: true,
            invalid_inserts: true,
        }
    }
}

fn random_literal<R: Rng + ?Sized>(kind: ParamKind, rng: &mut R) -> Option<Literal> {
    match kind {
        ParamKind::None => None,
        ParamKind::IntLiteral => Some(Literal::Int(rng.gen_range(-3..10))),
        ParamKind::NameLiteral => Some(Literal::Name(NAMES.choose(rng).unwrap().to_string())),
    }
}

/// A closed, cursorless, well-sorted tree of depth at most `max_depth`.
pub fn random_tree<R: Rng + ?Sized>(spec: &LanguageSpec, sort: &Sort, max_depth: usize, rng: &mut R) -> Abt {
    let mut scope = Vec::new();
    tree_rec(spec, sort, max_depth.max(1), &mut scope, rng)
}

fn tree_rec<R: Rng + ?Sized>(
    spec: &LanguageSpec,
    sort: &Sort,
    depth: usize,
    scope: &mut Vec<(String, Sort)>,
    rng: &mut R,
) -> Abt {
    let vars: Vec<&String> = scope.iter().filter(|(_, s)| s == sort).map(|(n, _)| n).collect();
    let ops: Vec<_> = spec
        .operators_of_sort(sort)
        .filter(|d| !d.is_cursor() && !d.is_variable_ref())
        .collect();
    let (leaves, inner): (Vec<_>, Vec<_>) = ops.into_iter().partition(|d| d.arity() == 0);
    let want_leaf = depth <= 1 || inner.is_empty() || rng.gen_bool(0.3);
    if want_leaf {
        if !vars.is_empty() && rng.gen_bool(0.4) {
            return Abt::var(vars.choose(rng).unwrap().as_str());
        }
        let d = leaves.choose(rng).expect("every sort has a hole");
        return Abt::Op(Node {
            op: d.name.clone(),
            literal: random_literal(d.param, rng),
            args: vec![],
        });
    }
    let d = *inner.choose(rng).unwrap();
    let mut args = Vec::with_capacity(d.arity());
    for v in &d.args {
        let binders: Vec<Binder> = v
            .binds
            .iter()
            .map(|s| Binder {
                name: NAMES.choose(rng).unwrap().to_string(),
                sort: s.clone(),
            })
            .collect();
        let n = scope.len();
        scope.extend(binders.iter().map(|b| (b.name.clone(), b.sort.clone())));
        let body = tree_rec(spec, &v.body, depth - 1, scope, rng);
        scope.truncate(n);
        args.push(Abstraction { binders, body });
    }
    Abt::Op(Node {
        op: d.name.clone(),
        literal: d.is_literal().then(|| random_literal(d.param, rng)).flatten(),
        args,
    })
}

/// Paths (argument indices) to every node with the node's sort.
fn node_paths(spec: &LanguageSpec, a: &Abt, sort: &Sort, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, Sort)>) {
    out.push((path.clone(), sort.clone()));
    if let Abt::Op(n) = a {
        let decl = spec.operator(&n.op).expect("generated from the spec");
        for (i, (arg, v)) in n.args.iter().zip(&decl.args).enumerate() {
            path.push(i);
            node_paths(spec, &arg.body, &v.body, path, out);
            path.pop();
        }
    }
}

fn wrap_at(a: Abt, path: &[usize], sort: &Sort) -> Abt {
    match (path.split_first(), a) {
        (None, a) => Abt::cursor(sort, a),
        (Some((&i, rest)), Abt::Op(mut n)) => {
            let body = std::mem::replace(&mut n.args[i].body, Abt::var(""));
            n.args[i].body = wrap_at(body, rest, sort);
            Abt::Op(n)
        }
        (Some(_), Abt::Var(_)) => unreachable!("paths follow operator nodes"),
    }
}

/// A well-formed tree of depth at most `max_depth` with the cursor on a
/// uniformly chosen node.
pub fn random_wf_tree<R: Rng + ?Sized>(
    spec: &LanguageSpec,
    root: &Sort,
    max_depth: usize,
    rng: &mut R,
) -> WellFormedTree {
    let plain = random_tree(spec, root, max_depth.saturating_sub(1).max(1), rng);
    let mut paths = Vec::new();
    node_paths(spec, &plain, root, &mut Vec::new(), &mut paths);
    let (path, sort) = paths.choose(rng).unwrap().clone();
    let tree = wrap_at(plain, &path, &sort);
    check_well_formed(&tree, spec).expect("generated trees are well-formed")
}

/// Any command, valid or not.
pub fn random_apc<R: Rng + ?Sized>(spec: &LanguageSpec, cfg: &GenConfig, rng: &mut R) -> Apc {
    let roll = rng.gen_range(0..100);
    if roll < 35 {
        Apc::Child(rng.gen_range(1..=3))
    } else if roll < 55 {
        Apc::Parent
    } else {
        let ops: Vec<_> = spec
            .operators()
            .iter()
            .filter(|d| cfg.invalid_inserts || !d.is_cursor())
            .collect();
        let d = ops.choose(rng).unwrap();
        Apc::Insert {
            op: d.name.clone(),
            literal: random_literal(d.param, rng),
        }
    }
}

fn random_opref<R: Rng + ?Sized>(spec: &LanguageSpec, cfg: &GenConfig, rng: &mut R) -> OpRef {
    let ops: Vec<_> = spec
        .operators()
        .iter()
        .filter(|d| !d.is_cursor())
        .collect();
    let d = ops.choose(rng).unwrap();
    let literal = match d.param {
        ParamKind::IntLiteral if rng.gen_bool(0.5) => random_literal(d.param, rng),
        ParamKind::NameLiteral if cfg.named_conditions && rng.gen_bool(0.5) => random_literal(d.param, rng),
        _ => None,
    };
    OpRef {
        op: d.name.clone(),
        literal,
    }
}

/// A condition with at most `cfg.condition_size` nodes.
pub fn random_condition<R: Rng + ?Sized>(spec: &LanguageSpec, cfg: &GenConfig, rng: &mut R) -> Condition {
    let size = rng.gen_range(1..=cfg.condition_size.max(1));
    condition_rec(spec, cfg, size, rng)
}

fn condition_rec<R: Rng + ?Sized>(spec: &LanguageSpec, cfg: &GenConfig, size: usize, rng: &mut R) -> Condition {
    if size <= 1 {
        let r = random_opref(spec, cfg, rng);
        return match rng.gen_range(0..3) {
            0 => Condition::At(r),
            1 => Condition::Possibly(r),
            _ => Condition::Necessity(r),
        };
    }
    if size == 2 || rng.gen_bool(0.3) {
        return Condition::neg(condition_rec(spec, cfg, size - 1, rng));
    }
    let left = rng.gen_range(1..size - 1);
    let (p, q) = (
        condition_rec(spec, cfg, left, rng),
        condition_rec(spec, cfg, size - 1 - left, rng),
    );
    if rng.gen_bool(0.5) {
        Condition::and(p, q)
    } else {
        Condition::or(p, q)
    }
}

/// A closed script with at most `cfg.script_size` nodes.
pub fn random_script<R: Rng + ?Sized>(spec: &LanguageSpec, cfg: &GenConfig, rng: &mut R) -> EditorExpr {
    let size = rng.gen_range(1..=cfg.script_size.max(1));
    script_rec(spec, cfg, size, &mut Vec::new(), rng)
}

fn script_rec<R: Rng + ?Sized>(
    spec: &LanguageSpec,
    cfg: &GenConfig,
    size: usize,
    vars: &mut Vec<String>,
    rng: &mut R,
) -> EditorExpr {
    if size <= 1 {
        if !vars.is_empty() && rng.gen_bool(0.3) {
            return EditorExpr::var(vars.choose(rng).unwrap().clone());
        }
        return EditorExpr::Nil;
    }
    let roll = rng.gen_range(0..100);
    if roll < 45 {
        EditorExpr::prefix(random_apc(spec, cfg, rng), script_rec(spec, cfg, size - 1, vars, rng))
    } else if roll < 65 && size >= 3 {
        let left = rng.gen_range(1..size - 1);
        let phi = random_condition(spec, cfg, rng);
        EditorExpr::cond(
            phi,
            script_rec(spec, cfg, left, vars, rng),
            script_rec(spec, cfg, size - 1 - left, vars, rng),
        )
    } else if roll < 82 && size >= 3 {
        let left = rng.gen_range(1..size - 1);
        EditorExpr::seq(
            script_rec(spec, cfg, left, vars, rng),
            script_rec(spec, cfg, size - 1 - left, vars, rng),
        )
    } else if size >= 5 {
        // a guarded loop: rec X. φ => π. … X | E
        let x = format!("X{}", vars.len());
        vars.push(x.clone());
        let phi = random_condition(spec, cfg, rng);
        let exit = script_rec(spec, cfg, size - 4, vars, rng);
        let step = random_apc(spec, cfg, rng);
        let body = EditorExpr::cond(phi, EditorExpr::prefix(step, EditorExpr::var(x.clone())), exit);
        vars.pop();
        EditorExpr::rec(x, body)
    } else {
        EditorExpr::prefix(random_apc(spec, cfg, rng), script_rec(spec, cfg, size - 1, vars, rng))
    }
}
