//! Language definitions: sorts, operators and their binding arities.
//!
//! A [`LanguageSpec`] is the editor's grammar. It is loaded from a small
//! line-oriented text format:
//!
//! ```text
//! sort s
//! sort e
//! op let : (e, e.s) s
//! op plus : (e, e) e
//! litop num : int e
//! litop var : name e
//! ```
//!
//! [`LanguageSpec::editor_extend`] adds the per-sort `cursor_<sort>` and
//! `hole_<sort>` operators that every structure editor needs.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CURSOR_PREFIX: &str = "cursor_";
pub const HOLE_PREFIX: &str = "hole_";

/// A syntactic category.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sort(String);

impl Sort {
    pub fn new(name: impl Into<String>) -> Self {
        Sort(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Sort {
    fn from(s: &str) -> Self {
        Sort::new(s)
    }
}

/// The signature of one operator argument: the sorts of the variables it
/// binds, and the sort of its body.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Valence {
    pub binds: Vec<Sort>,
    pub body: Sort,
}

impl Valence {
    pub fn plain(body: impl Into<Sort>) -> Self {
        Valence {
            binds: Vec::new(),
            body: body.into(),
        }
    }
}

impl fmt::Display for Valence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.binds.is_empty() {
            let binds: Vec<&str> = self.binds.iter().map(Sort::name).collect();
            write!(f, "{}.", binds.join(" "))?;
        }
        write!(f, "{}", self.body)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamKind {
    None,
    IntLiteral,
    NameLiteral,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Int(i64),
    Name(String),
}

impl Literal {
    pub fn kind(&self) -> ParamKind {
        match self {
            Literal::Int(_) => ParamKind::IntLiteral,
            Literal::Name(_) => ParamKind::NameLiteral,
        }
    }

    /// Parses `text` as a literal of the given kind.
    pub fn parse_as(kind: ParamKind, text: &str) -> Option<Literal> {
        match kind {
            ParamKind::None => None,
            ParamKind::IntLiteral => text.parse().ok().map(Literal::Int),
            ParamKind::NameLiteral => is_identifier(text).then(|| Literal::Name(text.to_owned())),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(n) => write!(f, "{n}"),
            Literal::Name(x) => f.write_str(x),
        }
    }
}

/// Where an operator came from: the user's grammar or the editor extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    User,
    Hole,
    Cursor,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OperatorDecl {
    pub name: String,
    pub result: Sort,
    pub args: Vec<Valence>,
    pub param: ParamKind,
    pub kind: OperatorKind,
}

impl OperatorDecl {
    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_literal(&self) -> bool {
        self.param != ParamKind::None
    }

    /// Name-literal operators stand for references to bound variables.
    pub fn is_variable_ref(&self) -> bool {
        self.param == ParamKind::NameLiteral
    }

    pub fn is_cursor(&self) -> bool {
        self.kind == OperatorKind::Cursor
    }

    pub fn is_hole(&self) -> bool {
        self.kind == OperatorKind::Hole
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate sort `{0}`")]
    DuplicateSort(String),
    #[error("duplicate operator `{0}`")]
    DuplicateOperator(String),
    #[error("operator `{operator}` refers to undeclared sort `{sort}`")]
    UndeclaredSort { operator: String, sort: String },
    #[error("operator name `{0}` is reserved for the editor extension")]
    ReservedName(String),
    #[error("specification is already editor-extended")]
    AlreadyExtended,
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("operator `{0}` takes no literal")]
    UnexpectedLiteral(String),
    #[error("operator `{0}` requires a literal")]
    MissingLiteral(String),
    #[error("literal `{literal}` does not fit operator `{operator}`")]
    LiteralKind { operator: String, literal: String },
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
}

/// An immutable language definition.
#[derive(Debug, Clone)]
pub struct LanguageSpec {
    sorts: Vec<Sort>,
    operators: Vec<OperatorDecl>,
    index: HashMap<String, usize>,
    editor_extended: bool,
}

impl PartialEq for LanguageSpec {
    fn eq(&self, other: &Self) -> bool {
        self.sorts == other.sorts
            && self.operators == other.operators
            && self.editor_extended == other.editor_extended
    }
}

impl Eq for LanguageSpec {}

impl LanguageSpec {
    /// Builds and validates a spec from parts.
    pub fn new(sorts: Vec<Sort>, operators: Vec<OperatorDecl>) -> Result<Self, SpecError> {
        let mut spec = LanguageSpec {
            sorts: Vec::new(),
            operators: Vec::new(),
            index: HashMap::new(),
            editor_extended: false,
        };
        for sort in sorts {
            if spec.sorts.contains(&sort) {
                return Err(SpecError::DuplicateSort(sort.0));
            }
            spec.sorts.push(sort);
        }
        for op in operators {
            if is_reserved(&op.name) {
                return Err(SpecError::ReservedName(op.name));
            }
            spec.push_operator(op)?;
        }
        Ok(spec)
    }

    /// Parses and validates a spec document.
    pub fn load(document: &str) -> Result<Self, SpecError> {
        let mut sorts = Vec::new();
        let mut operators = Vec::new();
        for (lineno, raw) in document.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            let mut p = LineParser::new(line, lineno + 1);
            let keyword = p.ident()?;
            match keyword.as_str() {
                "sort" => {
                    let name = p.ident()?;
                    p.end()?;
                    if sorts.iter().any(|s: &Sort| s.name() == name) {
                        return Err(SpecError::DuplicateSort(name));
                    }
                    sorts.push(Sort(name));
                }
                "op" => {
                    let name = p.ident()?;
                    p.expect(':')?;
                    p.expect('(')?;
                    let mut args = Vec::new();
                    if !p.peek_is(')') {
                        loop {
                            args.push(p.valence()?);
                            if p.peek_is(',') {
                                p.expect(',')?;
                            } else {
                                break;
                            }
                        }
                    }
                    p.expect(')')?;
                    let result = Sort(p.ident()?);
                    p.end()?;
                    operators.push(OperatorDecl {
                        name,
                        result,
                        args,
                        param: ParamKind::None,
                        kind: OperatorKind::User,
                    });
                }
                "litop" => {
                    let name = p.ident()?;
                    p.expect(':')?;
                    let col = p.column();
                    let param = match p.ident()?.as_str() {
                        "int" => ParamKind::IntLiteral,
                        "name" => ParamKind::NameLiteral,
                        other => {
                            return Err(p.error_at(
                                col,
                                format!("expected `int` or `name`, found `{other}`"),
                            ))
                        }
                    };
                    let result = Sort(p.ident()?);
                    p.end()?;
                    operators.push(OperatorDecl {
                        name,
                        result,
                        args: Vec::new(),
                        param,
                        kind: OperatorKind::User,
                    });
                }
                other => {
                    return Err(p.error_at(1, format!("unknown declaration `{other}`")));
                }
            }
        }
        Self::new(sorts, operators)
    }

    /// Serializes the user-declared part of the spec in the document format.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        for sort in &self.sorts {
            out.push_str(&format!("sort {sort}\n"));
        }
        for op in self.operators.iter().filter(|o| o.kind == OperatorKind::User) {
            match op.param {
                ParamKind::None => {
                    let args: Vec<String> = op.args.iter().map(Valence::to_string).collect();
                    out.push_str(&format!("op {} : ({}) {}\n", op.name, args.join(", "), op.result));
                }
                ParamKind::IntLiteral => {
                    out.push_str(&format!("litop {} : int {}\n", op.name, op.result))
                }
                ParamKind::NameLiteral => {
                    out.push_str(&format!("litop {} : name {}\n", op.name, op.result))
                }
            }
        }
        out
    }

    /// Adds `cursor_<s>` and `hole_<s>` for every sort `s`.
    pub fn editor_extend(&self) -> Result<Self, SpecError> {
        if self.editor_extended {
            return Err(SpecError::AlreadyExtended);
        }
        let mut out = self.clone();
        for sort in &self.sorts {
            out.push_operator(OperatorDecl {
                name: cursor_name(sort),
                result: sort.clone(),
                args: vec![Valence::plain(sort.clone())],
                param: ParamKind::None,
                kind: OperatorKind::Cursor,
            })?;
            out.push_operator(OperatorDecl {
                name: hole_name(sort),
                result: sort.clone(),
                args: Vec::new(),
                param: ParamKind::None,
                kind: OperatorKind::Hole,
            })?;
        }
        out.editor_extended = true;
        Ok(out)
    }

    pub fn sorts(&self) -> &[Sort] {
        &self.sorts
    }

    pub fn operators(&self) -> &[OperatorDecl] {
        &self.operators
    }

    pub fn is_editor_extended(&self) -> bool {
        self.editor_extended
    }

    pub fn has_sort(&self, sort: &Sort) -> bool {
        self.sorts.contains(sort)
    }

    pub fn sort(&self, name: &str) -> Result<&Sort, SpecError> {
        self.sorts
            .iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| SpecError::UnknownSort(name.to_owned()))
    }

    /// Looks up an operator family by name, without literal checks.
    pub fn operator(&self, name: &str) -> Option<&OperatorDecl> {
        self.index.get(name).map(|&i| &self.operators[i])
    }

    /// Looks up an operator and checks that a literal is supplied exactly
    /// when the operator is a literal family, and that it has the right kind.
    pub fn lookup_operator(
        &self,
        name: &str,
        literal: Option<&Literal>,
    ) -> Result<&OperatorDecl, SpecError> {
        let op = self
            .operator(name)
            .ok_or_else(|| SpecError::UnknownOperator(name.to_owned()))?;
        match (op.param, literal) {
            (ParamKind::None, None) => Ok(op),
            (ParamKind::None, Some(_)) => Err(SpecError::UnexpectedLiteral(name.to_owned())),
            (_, None) => Err(SpecError::MissingLiteral(name.to_owned())),
            (kind, Some(lit)) if lit.kind() == kind => Ok(op),
            (_, Some(lit)) => Err(SpecError::LiteralKind {
                operator: name.to_owned(),
                literal: lit.to_string(),
            }),
        }
    }

    pub fn cursor_op(&self, sort: &Sort) -> Option<&OperatorDecl> {
        self.operator(&cursor_name(sort))
    }

    pub fn hole_op(&self, sort: &Sort) -> Option<&OperatorDecl> {
        self.operator(&hole_name(sort))
    }

    /// Operators whose result sort is `sort`, in declaration order.
    pub fn operators_of_sort(&self, sort: &Sort) -> impl Iterator<Item = &OperatorDecl> + '_ {
        let sort = sort.clone();
        self.operators.iter().filter(move |o| o.result == sort)
    }

    fn push_operator(&mut self, op: OperatorDecl) -> Result<(), SpecError> {
        if self.index.contains_key(&op.name) {
            return Err(SpecError::DuplicateOperator(op.name));
        }
        if op.param != ParamKind::None && !op.args.is_empty() {
            return Err(SpecError::Parse {
                line: 0,
                column: 0,
                message: format!("literal operator `{}` cannot take arguments", op.name),
            });
        }
        let referenced = op
            .args
            .iter()
            .flat_map(|v| v.binds.iter().chain(std::iter::once(&v.body)))
            .chain(std::iter::once(&op.result));
        for sort in referenced {
            if !self.sorts.contains(sort) {
                return Err(SpecError::UndeclaredSort {
                    operator: op.name.clone(),
                    sort: sort.0.clone(),
                });
            }
        }
        self.index.insert(op.name.clone(), self.operators.len());
        self.operators.push(op);
        Ok(())
    }
}

pub fn cursor_name(sort: &Sort) -> String {
    format!("{CURSOR_PREFIX}{sort}")
}

pub fn hole_name(sort: &Sort) -> String {
    format!("{HOLE_PREFIX}{sort}")
}

fn is_reserved(name: &str) -> bool {
    name.starts_with(CURSOR_PREFIX) || name.starts_with(HOLE_PREFIX)
}

pub fn is_identifier(text: &str) -> bool {
    let mut chars = text.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

struct LineParser<'a> {
    line: &'a str,
    pos: usize,
    lineno: usize,
}

impl<'a> LineParser<'a> {
    fn new(line: &'a str, lineno: usize) -> Self {
        LineParser { line, pos: 0, lineno }
    }

    fn column(&mut self) -> usize {
        self.skip_ws();
        self.pos + 1
    }

    fn error_at(&self, column: usize, message: String) -> SpecError {
        SpecError::Parse {
            line: self.lineno,
            column,
            message,
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.line[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek_is(&mut self, c: char) -> bool {
        self.skip_ws();
        self.line[self.pos..].starts_with(c)
    }

    fn expect(&mut self, c: char) -> Result<(), SpecError> {
        if self.peek_is(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.error_at(self.pos + 1, format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> Result<String, SpecError> {
        self.skip_ws();
        let rest = &self.line[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '\''))
            .unwrap_or(rest.len());
        let word = &rest[..len];
        if !is_identifier(word) {
            return Err(self.error_at(self.pos + 1, "expected an identifier".to_owned()));
        }
        self.pos += len;
        Ok(word.to_owned())
    }

    // [<sort>{ <sort>}.]<sort>
    fn valence(&mut self) -> Result<Valence, SpecError> {
        let mut sorts = vec![Sort(self.ident()?)];
        loop {
            if self.peek_is('.') {
                self.expect('.')?;
                let body = Sort(self.ident()?);
                return Ok(Valence { binds: sorts, body });
            }
            if self.peek_is(',') || self.peek_is(')') {
                if sorts.len() > 1 {
                    return Err(self.error_at(self.pos + 1, "expected `.` after bound sorts".into()));
                }
                return Ok(Valence::plain(sorts.pop().unwrap()));
            }
            sorts.push(Sort(self.ident()?));
        }
    }

    fn end(&mut self) -> Result<(), SpecError> {
        self.skip_ws();
        if self.pos == self.line.len() {
            Ok(())
        } else {
            Err(self.error_at(self.pos + 1, "unexpected trailing input".to_owned()))
        }
    }
}

/// The statement/expression language used throughout the docs and tests.
pub const LETLANG: &str = include_str!("../examples/letlang.edspec");
