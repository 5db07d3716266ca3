//! Tokenizer shared by the condition and editor-script grammars.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    Ident(String),
    Int(i64),
    Sym(&'static str),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "`{s}`"),
            Token::Int(n) => write!(f, "`{n}`"),
            Token::Sym(s) => write!(f, "`{s}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

// Longest symbols first.
const SYMBOLS: [&str; 14] = [
    "<>", "[]", "=>", ">>", "(", ")", "{", "}", ".", ":", "!", "&", "|", "@",
];

pub struct Tokens<'a> {
    src: &'a str,
    toks: Vec<(Token, usize)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    pub fn lex(src: &'a str) -> Result<Self, SyntaxError> {
        let mut toks = Vec::new();
        let bytes = src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            if c.is_ascii_whitespace() {
                i += 1;
            } else if c == b'#' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            } else if c.is_ascii_alphabetic() || c == b'_' {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
                {
                    i += 1;
                }
                toks.push((Token::Ident(src[start..i].to_owned()), start));
            } else if c.is_ascii_digit()
                || (c == b'-' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit))
            {
                let start = i;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n = src[start..i]
                    .parse()
                    .map_err(|_| error_at(src, start, "integer literal out of range".into()))?;
                toks.push((Token::Int(n), start));
            } else if let Some(sym) = SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
                toks.push((Token::Sym(sym), i));
                i += sym.len();
            } else {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(error_at(src, i, format!("unexpected character `{ch}`")));
            }
        }
        Ok(Tokens { src, toks, pos: 0 })
    }

    pub fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    pub fn peek_sym(&self, sym: &str) -> bool {
        matches!(self.peek(), Some(Token::Sym(s)) if *s == sym)
    }

    pub fn peek_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Token::Ident(s)) if s == word)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn mark(&self) -> usize {
        self.pos
    }

    pub fn reset(&mut self, mark: usize) {
        self.pos = mark;
    }

    pub fn error(&self, message: impl Into<String>) -> SyntaxError {
        let offset = self
            .toks
            .get(self.pos)
            .map_or(self.src.len(), |(_, at)| *at);
        error_at(self.src, offset, message.into())
    }

    pub fn expect_sym(&mut self, sym: &str) -> Result<(), SyntaxError> {
        if self.peek_sym(sym) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{sym}`")))
        }
    }

    pub fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(Token::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    pub fn unexpected(&self, wanted: &str) -> SyntaxError {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {t}")),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }
}

fn error_at(src: &str, offset: usize, message: String) -> SyntaxError {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    SyntaxError {
        line,
        column,
        message,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_script_symbols() {
        let mut t = Tokens::lex("rec X. <>plus => {num:-3}.X | [] # c\n >>").unwrap();
        let mut all = Vec::new();
        while let Some(tok) = t.next() {
            all.push(tok);
        }
        assert_eq!(
            all,
            vec![
                Token::Ident("rec".into()),
                Token::Ident("X".into()),
                Token::Sym("."),
                Token::Sym("<>"),
                Token::Ident("plus".into()),
                Token::Sym("=>"),
                Token::Sym("{"),
                Token::Ident("num".into()),
                Token::Sym(":"),
                Token::Int(-3),
                Token::Sym("}"),
                Token::Sym("."),
                Token::Ident("X".into()),
                Token::Sym("|"),
                Token::Sym("[]"),
                Token::Sym(">>"),
            ]
        );
    }

    #[test]
    fn reports_position() {
        let err = Tokens::lex("nil\n  $").err().unwrap();
        assert_eq!((err.line, err.column), (2, 3));
    }
}
