use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed tree: {0}")]
pub struct TreeSyntaxError(pub String);

/// One compiler message, located in a grammar module.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub module: String,
    pub line: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn new(module: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Diagnostic { module: module.into(), line, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.module, self.line, self.message)
    }
}

/// Grammar compilation failed; every diagnostic found is reported.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct GrammarError {
    pub diagnostics: Vec<Diagnostic>,
}

impl GrammarError {
    pub fn single(module: &str, line: usize, message: impl Into<String>) -> Self {
        GrammarError { diagnostics: vec![Diagnostic::new(module, line, message)] }
    }

    pub fn mentions(&self, needle: &str) -> bool {
        self.diagnostics.iter().any(|d| d.message.contains(needle))
    }
}

impl fmt::Display for GrammarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Errors raised when a tree does not fit the current grammar.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("function `{fun}` expects {expected} arguments, got {found}")]
    Arity { fun: String, expected: usize, found: usize },
    #[error("argument {index} of `{fun}` has category {found}, expected {expected}")]
    Category { fun: String, index: usize, expected: String, found: String },
    #[error("tree has category {0}, which is not a start category")]
    NotStart(String),
    #[error("unknown language `{0}`")]
    UnknownLanguage(String),
    #[error("no linearization of `{fun}` in language `{lang}`")]
    MissingLin { lang: String, fun: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphologyError {
    #[error("`{op}` takes {expected}, got {found} arguments")]
    ArgCount { op: String, expected: String, found: usize },
    #[error("empty word form")]
    EmptyForm,
    #[error("unknown paradigm `{0}`")]
    UnknownOperator(String),
    #[error("unknown gender `{0}`")]
    UnknownGender(String),
    #[error("cannot conjugate `{0}`: infinitive must end in -ar, -er or -ir")]
    Infinitive(String),
    #[error("no paradigms for language `{0}`")]
    UnknownLanguage(String),
}
