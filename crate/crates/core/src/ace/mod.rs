//! The shipped multilingual grammar: abstract syntax, English (ACE), German
//! and Spanish concrete syntaxes, demo lexicons, paradigms and tokenization.

mod paradigms;
mod tokenize;

pub use paradigms::{english_participle, english_plural, spanish_plural, AceMorphology};
pub use tokenize::{detokenize, tokenize};

use crate::error::GrammarError;
use crate::grammar::{compile_sources, CompiledGrammar};

/// Name of the shipped abstract syntax module.
pub const ABSTRACT: &str = "Ace";

/// The shipped language tags, reference language first.
pub const LANGUAGES: [&str; 3] = ["ace", "ger", "spa"];

/// Shipped grammar modules as (module name, source) pairs.
pub fn shipped_sources() -> Vec<(String, String)> {
    [
        ("Ace", include_str!("../../grammar/Ace.gfs")),
        ("AceAce", include_str!("../../grammar/AceAce.gfs")),
        ("AceGer", include_str!("../../grammar/AceGer.gfs")),
        ("AceSpa", include_str!("../../grammar/AceSpa.gfs")),
        ("LexAce", include_str!("../../grammar/LexAce.gfs")),
        ("LexGer", include_str!("../../grammar/LexGer.gfs")),
        ("LexSpa", include_str!("../../grammar/LexSpa.gfs")),
    ]
    .into_iter()
    .map(|(n, s)| (n.to_string(), s.to_string()))
    .collect()
}

/// Lexicon page name for a language tag: `ger` → `LexGer`.
pub fn lexicon_module(lang: &str) -> String {
    let mut cs = lang.chars();
    match cs.next() {
        Some(first) => format!("Lex{}{}", first.to_uppercase(), cs.as_str()),
        None => "Lex".into(),
    }
}

/// Compiles module sources with the shipped paradigms.
pub fn compile(sources: &[(String, String)]) -> Result<CompiledGrammar, GrammarError> {
    compile_sources(sources, &AceMorphology)
}

pub fn shipped_grammar() -> CompiledGrammar {
    compile(&shipped_sources()).expect("shipped grammar compiles")
}
