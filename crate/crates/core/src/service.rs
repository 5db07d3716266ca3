//! Editing sessions over JSON/HTTP.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::abt::{Abt, SortEnv, WellFormedTree};
use crate::engine::{parse_editor_expr, run, Config, RunOutcome, StepLabel, DEFAULT_FUEL};
use crate::language::{LanguageSpec, Literal, Sort};
use crate::logic::{parse_condition, satisfies};
use crate::zipper::{apply_command, Apc, Stuck};

// ---------------------------------------------------------------------------
// wire types

/// A tree node on the wire. A cursor is a flag on the node it encloses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireTree {
    /// Operator name, `hole_<sort>`, or the variable's name.
    pub node: String,
    /// `op`, `hole` or `var`.
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub literal: Option<Literal>,
    /// Names bound over this node by its parent's valence.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub binders: Option<Vec<String>>,
    pub children: Vec<WireTree>,
    pub cursor: bool,
    pub sort: Sort,
}

/// Converts a closed tree of the given sort to wire form.
pub fn to_wire(a: &Abt, sort: &Sort, spec: &LanguageSpec) -> WireTree {
    wire_rec(a, sort, None, &mut SortEnv::new(), spec)
}

fn wire_rec(a: &Abt, sort: &Sort, binders: Option<Vec<String>>, env: &mut SortEnv, spec: &LanguageSpec) -> WireTree {
    match a {
        Abt::Var(x) => WireTree {
            node: x.clone(),
            kind: "var".into(),
            literal: None,
            binders,
            children: vec![],
            cursor: false,
            sort: env.lookup(x).cloned().unwrap_or_else(|| sort.clone()),
        },
        Abt::Op(n) if n.is_cursor() => {
            let mut inner = wire_rec(&n.args[0].body, sort, binders, env, spec);
            inner.cursor = true;
            inner
        }
        Abt::Op(n) => {
            let decl = spec.operator(&n.op).expect("well-formed trees use declared operators");
            let children = n
                .args
                .iter()
                .zip(&decl.args)
                .map(|(arg, valence)| {
                    let mark = env.len();
                    for b in &arg.binders {
                        env.push(b.name.clone(), b.sort.clone());
                    }
                    let names = (!arg.binders.is_empty()).then(|| arg.binders.iter().map(|b| b.name.clone()).collect());
                    let child = wire_rec(&arg.body, &valence.body, names, env, spec);
                    env.truncate(mark);
                    child
                })
                .collect();
            WireTree {
                node: n.op.clone(),
                kind: if n.is_hole() { "hole" } else { "op" }.into(),
                literal: n.literal.clone(),
                binders,
                children,
                cursor: false,
                sort: decl.result.clone(),
            }
        }
    }
}

/// Insertable operators at one hole.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaletteEntry {
    /// Child indices from the root in the wire tree.
    pub path: Vec<usize>,
    pub sort: Sort,
    pub operators: Vec<String>,
    /// Variables in scope at the hole with its sort.
    pub variables: Vec<String>,
}

/// Operators whose result sort is `sort`, minus cursor operators.
pub fn insertable(spec: &LanguageSpec, sort: &Sort) -> Vec<String> {
    spec.operators_of_sort(sort)
        .filter(|d| !d.is_cursor())
        .map(|d| d.name.clone())
        .collect()
}

/// One palette entry per hole.
pub fn palette(t: &WellFormedTree, spec: &LanguageSpec) -> Vec<PaletteEntry> {
    let mut out = Vec::new();
    palette_rec(&to_wire(t.tree(), t.sort(), spec), &mut Vec::new(), &mut Vec::new(), spec, &mut out);
    out
}

fn palette_rec(
    w: &WireTree,
    path: &mut Vec<usize>,
    scope: &mut Vec<(String, Sort)>,
    spec: &LanguageSpec,
    out: &mut Vec<PaletteEntry>,
) {
    if w.kind == "hole" {
        let mut seen = std::collections::BTreeSet::new();
        let mut variables: Vec<String> = scope
            .iter()
            .rev()
            .filter(|(x, s)| seen.insert(x.clone()) && *s == w.sort)
            .map(|(x, _)| x.clone())
            .collect();
        variables.sort();
        out.push(PaletteEntry {
            path: path.clone(),
            sort: w.sort.clone(),
            operators: insertable(spec, &w.sort),
            variables,
        });
    }
    let decl = spec.operator(&w.node);
    for (i, c) in w.children.iter().enumerate() {
        let mark = scope.len();
        if let (Some(names), Some(d)) = (&c.binders, decl) {
            scope.extend(names.iter().cloned().zip(d.args[i].binds.iter().cloned()));
        }
        path.push(i);
        palette_rec(c, path, scope, spec, out);
        path.pop();
        scope.truncate(mark);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireStuck {
    pub reason: String,
    pub detail: String,
}

impl From<&Stuck> for WireStuck {
    fn from(s: &Stuck) -> Self {
        WireStuck {
            reason: s.reason.code().into(),
            detail: s.detail.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireStep {
    pub label: String,
    pub tree: String,
}

/// The current state of a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionView {
    pub id: String,
    pub root_sort: Sort,
    /// The s-expression form.
    pub text: String,
    pub tree: WireTree,
    pub cursor_path: Vec<usize>,
    pub palette: Vec<PaletteEntry>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stuck: Option<WireStuck>,
}

/// Result of a script run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    /// `terminal`, `stuck` or `fuel-exhausted`.
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stuck: Option<WireStuck>,
    pub steps: usize,
    pub trace: Vec<WireStep>,
    /// The last tree reached, committed or not.
    pub last: WireTree,
    #[serde(rename = "lastText")]
    pub last_text: String,
}

impl RunReport {
    pub fn new(result: &crate::engine::RunResult, spec: &LanguageSpec) -> Self {
        let tree = result.last.tree();
        RunReport {
            outcome: match result.outcome {
                RunOutcome::Terminal => "terminal",
                RunOutcome::Stuck(_) => "stuck",
                RunOutcome::FuelExhausted => "fuel-exhausted",
            }
            .into(),
            stuck: match &result.outcome {
                RunOutcome::Stuck(s) => Some(s.into()),
                _ => None,
            },
            steps: result.steps(),
            trace: result
                .trace
                .iter()
                .map(|e| WireStep {
                    label: e.label.to_string(),
                    tree: e.tree.to_string(),
                })
                .collect(),
            last: to_wire(tree.tree(), tree.sort(), spec),
            last_text: tree.to_string(),
        }
    }
}

// ---------------------------------------------------------------------------
// sessions

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ServiceError {
    #[error("no session `{0}`")]
    UnknownSession(String),
    #[error("{0}")]
    BadRequest(String),
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match self {
            ServiceError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
        };
        (status, Json(serde_json::json!({ "error": self.to_string() }))).into_response()
    }
}

#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    pub spec: Arc<LanguageSpec>,
    pub initial: WellFormedTree,
    pub tree: WellFormedTree,
    pub history: Vec<(StepLabel, WellFormedTree)>,
}

impl Session {
    pub fn new(id: String, spec: Arc<LanguageSpec>, root: &Sort) -> Result<Self, ServiceError> {
        let initial = WellFormedTree::initial(&spec, root).map_err(|e| ServiceError::BadRequest(e.to_string()))?;
        Ok(Session {
            id,
            spec,
            tree: initial.clone(),
            initial,
            history: Vec::new(),
        })
    }

    pub fn view(&self, stuck: Option<&Stuck>) -> SessionView {
        let wire = to_wire(self.tree.tree(), self.tree.sort(), &self.spec);
        SessionView {
            id: self.id.clone(),
            root_sort: self.tree.sort().clone(),
            text: self.tree.to_string(),
            cursor_path: wire_cursor_path(&wire),
            tree: wire,
            palette: palette(&self.tree, &self.spec),
            stuck: stuck.map(Into::into),
        }
    }

    /// Applies one command. A stuck command leaves the session unchanged.
    pub fn command(&mut self, cmd: &Apc) -> Result<(), Stuck> {
        let next = apply_command(&self.tree, cmd, &self.spec)?;
        self.history.push((StepLabel::Command(cmd.clone()), next.clone()));
        self.tree = next;
        Ok(())
    }

    /// Runs a script and commits its result only if it terminates.
    pub fn script(&mut self, text: &str, fuel: usize) -> Result<RunReport, ServiceError> {
        let expr = parse_editor_expr(text).map_err(|e| ServiceError::BadRequest(e.to_string()))?;
        let config = Config::new(expr, self.tree.clone()).map_err(|e| ServiceError::BadRequest(e.to_string()))?;
        let result = run(config, &self.spec, fuel);
        if result.outcome == RunOutcome::Terminal {
            self.history
                .extend(result.trace.iter().map(|e| (e.label.clone(), e.tree.clone())));
            self.tree = result.last.tree().clone();
        }
        Ok(RunReport::new(&result, &self.spec))
    }

    pub fn query(&self, phi: &str) -> Result<bool, ServiceError> {
        let phi = parse_condition(phi).map_err(|e| ServiceError::BadRequest(e.to_string()))?;
        satisfies(self.tree.focus(), &phi, &self.spec).map_err(|e| ServiceError::BadRequest(e.to_string()))
    }

    /// Replays the command labels of the history from the initial tree.
    pub fn replay(&self) -> Result<WellFormedTree, Stuck> {
        let mut t = self.initial.clone();
        for (label, _) in &self.history {
            if let StepLabel::Command(c) = label {
                t = apply_command(&t, c, &self.spec)?;
            }
        }
        Ok(t)
    }
}

fn wire_cursor_path(w: &WireTree) -> Vec<usize> {
    fn go(w: &WireTree, path: &mut Vec<usize>) -> bool {
        if w.cursor {
            return true;
        }
        for (i, c) in w.children.iter().enumerate() {
            path.push(i);
            if go(c, path) {
                return true;
            }
            path.pop();
        }
        false
    }
    let mut path = Vec::new();
    go(w, &mut path);
    path
}

/// Parses a wire command: `child` with a 1-based index, `parent`, or
/// `insert` with `op` or `op:literal`.
pub fn parse_command(kind: &str, arg: Option<&serde_json::Value>, spec: &LanguageSpec) -> Result<Apc, ServiceError> {
    let bad = |m: String| ServiceError::BadRequest(m);
    match kind {
        "parent" => Ok(Apc::Parent),
        "child" => {
            let n = match arg {
                Some(serde_json::Value::Number(n)) => n.as_u64(),
                Some(serde_json::Value::String(s)) => s.trim().parse().ok(),
                _ => None,
            };
            n.map(|n| Apc::Child(n as usize))
                .ok_or_else(|| bad("child needs a positive index".into()))
        }
        "insert" => {
            let Some(serde_json::Value::String(s)) = arg else {
                return Err(bad("insert needs an operator name".into()));
            };
            let (op, lit) = match s.split_once(':') {
                Some((op, lit)) => (op.trim(), Some(lit.trim())),
                None => (s.trim(), None),
            };
            let literal = match (lit, spec.operator(op)) {
                (None, _) => None,
                (Some(text), Some(d)) => Some(
                    Literal::parse_as(d.param, text).ok_or_else(|| bad(format!("`{text}` is not a literal for `{op}`")))?,
                ),
                // Unknown operators get stuck when applied.
                (Some(text), None) => Some(
                    text.parse()
                        .map(Literal::Int)
                        .unwrap_or_else(|_| Literal::Name(text.to_owned())),
                ),
            };
            Ok(Apc::Insert {
                op: op.to_owned(),
                literal,
            })
        }
        other => Err(bad(format!("unknown command kind `{other}`"))),
    }
}

// ---------------------------------------------------------------------------
// HTTP

#[derive(Default)]
pub struct Store {
    next: AtomicU64,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create(&self, spec_document: &str, root: &str) -> Result<SessionView, ServiceError> {
        let spec = LanguageSpec::load(spec_document)
            .and_then(|s| s.editor_extend())
            .map_err(|e| ServiceError::BadRequest(e.to_string()))?;
        let root = spec.sort(root).map_err(|e| ServiceError::BadRequest(e.to_string()))?.clone();
        let id = (self.next.fetch_add(1, Ordering::Relaxed) + 1).to_string();
        let session = Session::new(id.clone(), Arc::new(spec), &root)?;
        let view = session.view(None);
        self.sessions
            .write()
            .expect("store lock")
            .insert(id, Arc::new(Mutex::new(session)));
        Ok(view)
    }

    /// Runs `f` with the session locked.
    pub fn with<T>(&self, id: &str, f: impl FnOnce(&mut Session) -> T) -> Result<T, ServiceError> {
        let session = self
            .sessions
            .read()
            .expect("store lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_owned()))?;
        let mut guard = session.lock().expect("session lock");
        Ok(f(&mut guard))
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct CreateRequest {
    spec: String,
    root_sort: String,
}

#[derive(Deserialize)]
struct CommandRequest {
    kind: String,
    #[serde(default)]
    arg: Option<serde_json::Value>,
}

#[derive(Deserialize)]
struct ScriptRequest {
    text: String,
    #[serde(default)]
    fuel: Option<usize>,
}

#[derive(Serialize)]
struct ScriptResponse {
    run: RunReport,
    session: SessionView,
}

#[derive(Deserialize)]
struct QueryRequest {
    phi: String,
}

type Shared = Arc<Store>;

/// The HTTP routes over a session store.
pub fn router(store: Shared) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(show))
        .route("/sessions/{id}/command", post(command))
        .route("/sessions/{id}/script", post(script))
        .route("/sessions/{id}/query", post(query))
        .route("/sessions/{id}/trace", get(trace))
        .with_state(store)
}

async fn create(State(store): State<Shared>, Json(req): Json<CreateRequest>) -> Result<Json<SessionView>, ServiceError> {
    store.create(&req.spec, &req.root_sort).map(Json)
}

async fn show(State(store): State<Shared>, Path(id): Path<String>) -> Result<Json<SessionView>, ServiceError> {
    store.with(&id, |s| Json(s.view(None)))
}

async fn command(
    State(store): State<Shared>,
    Path(id): Path<String>,
    Json(req): Json<CommandRequest>,
) -> Result<Json<SessionView>, ServiceError> {
    store.with(&id, |s| {
        let cmd = parse_command(&req.kind, req.arg.as_ref(), &s.spec)?;
        let stuck = s.command(&cmd).err();
        Ok(Json(s.view(stuck.as_ref())))
    })?
}

async fn script(
    State(store): State<Shared>,
    Path(id): Path<String>,
    Json(req): Json<ScriptRequest>,
) -> Result<Json<ScriptResponse>, ServiceError> {
    store.with(&id, |s| {
        let run = s.script(&req.text, req.fuel.unwrap_or(DEFAULT_FUEL))?;
        Ok(Json(ScriptResponse { run, session: s.view(None) }))
    })?
}

async fn query(
    State(store): State<Shared>,
    Path(id): Path<String>,
    Json(req): Json<QueryRequest>,
) -> Result<Json<serde_json::Value>, ServiceError> {
    store.with(&id, |s| s.query(&req.phi).map(|v| Json(serde_json::json!({ "value": v }))))?
}

async fn trace(State(store): State<Shared>, Path(id): Path<String>) -> Result<Json<Vec<WireStep>>, ServiceError> {
    store.with(&id, |s| {
        let mut steps = vec![WireStep {
            label: "init".into(),
            tree: s.initial.to_string(),
        }];
        steps.extend(s.history.iter().map(|(l, t)| WireStep {
            label: l.to_string(),
            tree: t.to_string(),
        }));
        Json(steps)
    })
}

/// Serves the routes on `addr` until the process stops.
pub async fn serve(addr: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(Arc::new(Store::new()))).await
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::LETLANG;

    fn session(root: &str) -> Session {
        let spec = LanguageSpec::load(LETLANG).unwrap().editor_extend().unwrap();
        Session::new("t".into(), Arc::new(spec), &Sort::new(root)).unwrap()
    }

    #[test]
    fn wire_form_flags_the_cursor() {
        let mut s = session("s");
        s.command(&Apc::insert("let")).unwrap();
        s.command(&Apc::Child(2)).unwrap();
        let v = s.view(None);
        assert_eq!(v.cursor_path, vec![1]);
        assert_eq!(v.tree.node, "let");
        assert!(!v.tree.cursor);
        let body = &v.tree.children[1];
        assert!(body.cursor);
        assert_eq!(body.kind, "hole");
        assert_eq!(body.binders.as_deref().map(|b| b.len()), Some(1));
    }

    #[test]
    fn palette_filters_by_sort_and_lists_scope() {
        let mut s = session("s");
        s.command(&Apc::insert("let")).unwrap();
        s.command(&Apc::Child(2)).unwrap();
        s.command(&Apc::insert("exp")).unwrap();
        let p = palette(&s.tree, &s.spec);
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].sort, Sort::new("e"));
        assert!(p[0].variables.is_empty());
        assert_eq!(p[1].path, vec![1, 0]);
        assert_eq!(p[1].variables.len(), 1);
        assert_eq!(p[1].operators, vec!["plus", "num", "var", "hole_e"]);
    }

    #[test]
    fn stuck_scripts_do_not_commit() {
        let mut s = session("e");
        let r = s.script("{plus}. parent. nil", 100).unwrap();
        assert_eq!(r.outcome, "stuck");
        assert_eq!(r.stuck.unwrap().reason, "at-root");
        assert_eq!(s.tree.to_string(), "(cursor (hole e))");
        let r = s.script("{plus}. nil", 0).unwrap();
        assert_eq!(r.outcome, "fuel-exhausted");
        assert!(s.history.is_empty());
        s.script("{plus}. child 1. {num:1}. nil", 100).unwrap();
        assert_eq!(s.replay().unwrap(), s.tree);
    }

    #[test]
    fn commands_parse() {
        let s = session("e");
        let j = |v: serde_json::Value| Some(v);
        assert_eq!(parse_command("child", j(2.into()).as_ref(), &s.spec).unwrap(), Apc::Child(2));
        assert_eq!(
            parse_command("insert", j("num:5".into()).as_ref(), &s.spec).unwrap(),
            Apc::insert_lit("num", Literal::Int(5))
        );
        assert!(parse_command("insert", j("num:x".into()).as_ref(), &s.spec).is_err());
        assert!(parse_command("jump", None, &s.spec).is_err());
    }
}
