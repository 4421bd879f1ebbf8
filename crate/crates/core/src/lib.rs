//! Multilingual controlled-language semantic wiki engine.

pub mod error;
pub mod ace;
pub mod grammar;
pub mod reasoner;
pub mod eval;
pub mod wiki;
pub mod semantics;

pub use error::{Diagnostic, GrammarError, MorphologyError, TreeError, TreeSyntaxError};
pub use grammar::{CompiledGrammar, Tree};
