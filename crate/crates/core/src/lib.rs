//! Syntax-directed structure editing over abstract binding trees.

pub mod abt;
pub mod cli;
pub mod encoding;
pub mod engine;
pub mod gen;
pub mod harness;
pub mod lambda;
pub mod language;
pub mod logic;
pub mod service;
pub mod syntax;
pub mod zipper;

pub use language::LanguageSpec;
