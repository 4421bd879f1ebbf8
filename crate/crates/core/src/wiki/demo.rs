//! Shipped demo content: a small geography article.

use super::{Article, ArticleKind, Entry, EntryKind, DEMO_ARTICLE};
use crate::ace::tokenize;
use crate::grammar::{CompiledGrammar, Tree};

/// Typed in ACE; stored as trees like any other entry.
const SENTENCES: [&str; 9] = [
    "Germany is a country.",
    "France is a country.",
    "Germany borders France.",
    "if X borders Y then Y borders X.",
    "every country contains a lake.",
    "no lake is a country.",
    "if X contains Y then Y does not contain X.",
    "John likes Germany.",
    "which country borders France?",
];

const COMMENT: &str = "Countries, their neighbours and their lakes.";

pub(crate) fn article(g: &CompiledGrammar, next_entry: &mut u64) -> Article {
    let mut next_id = || {
        let id = format!("e{next_entry}");
        *next_entry += 1;
        id
    };
    let mut entries = vec![Entry {
        id: next_id(),
        kind: EntryKind::Comment,
        trees: Vec::new(),
        source_language: String::new(),
        text: Some(COMMENT.to_string()),
    }];
    for s in SENTENCES {
        let trees: Vec<Tree> = g.parse("ace", &tokenize("ace", s)).into_iter().collect();
        assert!(!trees.is_empty(), "demo sentence does not parse: {s}");
        let kind = if s.ends_with('?') { EntryKind::Question } else { EntryKind::Declarative };
        entries.push(Entry { id: next_id(), kind, trees, source_language: "ace".into(), text: None });
    }
    Article { name: DEMO_ARTICLE.to_string(), kind: ArticleKind::Free, entries }
}
