//! The wiki: articles of tree-set entries, editable grammar modules, and the
//! knowledge base derived from them.
//!
//! Readers take an `Arc<Snapshot>` and never block; writers are serialized
//! and publish a whole new snapshot (grammar, entries, kb) at once.

mod demo;
mod snapshot;
mod store;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use snapshot::{AnswerView, ArticleView, QueryAnswer, Reading, RenderedEntry, Snapshot, TaxonomyNodeView, TaxonomyView};
pub use store::Meta;

use crate::ace;
use crate::error::{Diagnostic, GrammarError};
use crate::grammar::Tree;
use crate::reasoner::Reasoner;
use crate::semantics::{Axiom, Class};
use store::Store;

/// Name of the shipped demo article.
pub const DEMO_ARTICLE: &str = "Geography";

#[derive(Debug, Error)]
pub enum WikiError {
    #[error("unknown language `{0}`")]
    UnknownLanguage(String),
    #[error("input does not parse; the longest parsable prefix has {} tokens", prefix.len())]
    Unparsable { prefix: Vec<String>, completions: BTreeSet<String> },
    #[error("{0}")]
    Lint(String),
    #[error("unknown article `{0}`")]
    UnknownArticle(String),
    #[error("unknown entry `{0}`")]
    UnknownEntry(String),
    #[error("invalid article name `{0}`")]
    InvalidName(String),
    #[error("`{0}` is a grammar module, not an entry article")]
    NotEntryArticle(String),
    #[error("grammar module `{0}` is read-only")]
    ReadOnly(String),
    #[error("`{0}` is not a grammar module")]
    NotModule(String),
    #[error("grammar rejected: {0}")]
    Grammar(#[from] GrammarError),
    #[error("the knowledge base is inconsistent")]
    Inconsistent { conflict: Vec<String> },
    #[error("the reasoner gave up: node budget exhausted")]
    ReasonerUnknown,
    #[error("not a question")]
    NotQuestion,
    #[error("no answer: {0}")]
    UnsupportedQuery(String),
    #[error("tree is not a reading of entry `{0}`")]
    NotAReading(String),
    #[error("store: {0}")]
    Store(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryKind {
    Declarative,
    Question,
    Comment,
}

/// A wiki unit. Sentences are stored as their tree sets only; comments
/// keep their raw text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Entry {
    pub id: String,
    pub kind: EntryKind,
    pub trees: Vec<Tree>,
    pub source_language: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArticleKind {
    /// Named by a lexicon identifier.
    Entity,
    Free,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub name: String,
    pub kind: ArticleKind,
    pub entries: Vec<Entry>,
}

/// Semantic status of an entry under the current grammar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Status {
    Included { axiom: Axiom },
    /// Readings disagree on their axiom.
    Excluded,
    Unsupported { reason: String },
    /// Trees use functions the grammar no longer has.
    Invalid { missing: Vec<String> },
    /// A question and the class it asks for.
    Query { query: Class },
    Comment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "camelCase")]
pub enum EntryOutcome {
    Unchanged { id: String },
    Invalidated { id: String, missing: Vec<String> },
    /// Previously invalid, valid again.
    Revalidated { id: String },
    #[serde(rename_all = "camelCase")]
    AmbiguityChanged { id: String, language: String, old: usize, new: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum GrammarOutcome {
    Compiled { warnings: Vec<Diagnostic> },
    Rejected { diagnostics: Vec<Diagnostic> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RevalidationReport {
    pub grammar: GrammarOutcome,
    pub generation: u64,
    pub entries: Vec<EntryOutcome>,
}

impl RevalidationReport {
    pub fn rejected(err: &GrammarError, generation: u64) -> Self {
        RevalidationReport {
            grammar: GrammarOutcome::Rejected { diagnostics: err.diagnostics.clone() },
            generation,
            entries: Vec::new(),
        }
    }
}

pub(crate) fn valid_article_name(name: &str) -> bool {
    !name.is_empty() && name.len() <= 128 && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Rejects trees where `no` appears inside the object of a negated clause.
fn lint(t: &Tree) -> Result<(), WikiError> {
    fn has_no(t: &Tree) -> bool {
        t.fun == "noNP" || t.args.iter().any(has_no)
    }
    if t.fun == "neg_vpS" && t.args.len() == 2 && has_no(&t.args[1]) {
        return Err(WikiError::Lint(
            "a negated sentence cannot contain `no` in its verb phrase; rephrase without double negation".into(),
        ));
    }
    t.args.iter().try_for_each(lint)
}

pub struct Wiki {
    store: Option<Store>,
    current: RwLock<Arc<Snapshot>>,
    writer: Mutex<()>,
    reasoner: Reasoner,
}

impl Wiki {
    /// Opens the wiki stored in `dir`, bootstrapping the demo content into
    /// an empty or missing directory.
    pub fn open(dir: impl AsRef<Path>) -> Result<Wiki, WikiError> {
        Self::open_with(dir, true)
    }

    /// Like [`Wiki::open`]; `demo` selects whether an empty store gets the
    /// demo article or only the shipped grammar.
    pub fn open_with(dir: impl AsRef<Path>, demo: bool) -> Result<Wiki, WikiError> {
        let store = Store::new(PathBuf::from(dir.as_ref()));
        let reasoner = Reasoner::default();
        if store.is_empty() {
            store.init()?;
            let snap = Self::fresh(demo, reasoner)?;
            for (name, src) in &snap.modules {
                store.save_module(name, src)?;
            }
            for a in snap.articles.values() {
                store.save_article(a)?;
            }
            store.save_meta(&snap.meta())?;
            return Ok(Wiki::from_parts(Some(store), snap, reasoner));
        }
        let modules = store.load_modules()?;
        let mut articles = store.load_articles()?;
        let meta = store.load_meta()?;
        let sources: Vec<(String, String)> = modules.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        let grammar = ace::compile(&sources)?;
        for a in snapshot::missing_entity_articles(&grammar, &articles) {
            store.save_article(&a)?;
            articles.insert(a.name.clone(), a);
        }
        let snap = Snapshot::build(Arc::new(grammar), modules, articles, meta, reasoner);
        Ok(Wiki::from_parts(Some(store), snap, reasoner))
    }

    /// A wiki held only in memory.
    pub fn in_memory(demo: bool) -> Result<Wiki, WikiError> {
        let reasoner = Reasoner::default();
        Ok(Wiki::from_parts(None, Self::fresh(demo, reasoner)?, reasoner))
    }

    fn from_parts(store: Option<Store>, snap: Snapshot, reasoner: Reasoner) -> Wiki {
        Wiki { store, current: RwLock::new(Arc::new(snap)), writer: Mutex::new(()), reasoner }
    }

    fn fresh(demo: bool, reasoner: Reasoner) -> Result<Snapshot, WikiError> {
        let modules: BTreeMap<String, String> = ace::shipped_sources().into_iter().collect();
        let grammar = Arc::new(ace::shipped_grammar());
        let mut articles: BTreeMap<String, Article> = snapshot::missing_entity_articles(&grammar, &BTreeMap::new())
            .into_iter()
            .map(|a| (a.name.clone(), a))
            .collect();
        let mut meta = Meta { generation: 0, next_entry: 1 };
        if demo {
            let a = demo::article(&grammar, &mut meta.next_entry);
            articles.insert(a.name.clone(), a);
        }
        Ok(Snapshot::build(grammar, modules, articles, meta, reasoner))
    }

    /// The current consistent view; cheap, never blocks on writers for long.
    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.current.read().clone()
    }

    fn publish(&self, snap: Snapshot) -> Arc<Snapshot> {
        let snap = Arc::new(snap);
        *self.current.write() = snap.clone();
        snap
    }

    fn persist_meta(&self, snap: &Snapshot) -> Result<(), WikiError> {
        match &self.store {
            Some(s) => s.save_meta(&snap.meta()),
            None => Ok(()),
        }
    }

    fn persist_article(&self, a: &Article) -> Result<(), WikiError> {
        match &self.store {
            Some(s) => s.save_article(a),
            None => Ok(()),
        }
    }

    /// Parses `tokens` and stores every reading as one entry.
    pub fn add_entry(&self, article: &str, lang: &str, tokens: &[impl AsRef<str>]) -> Result<RenderedEntry, WikiError> {
        let _w = self.writer.lock();
        let cur = self.snapshot();
        if !cur.grammar.has_language(lang) {
            return Err(WikiError::UnknownLanguage(lang.to_string()));
        }
        let trees: Vec<Tree> = cur.grammar.parse(lang, tokens).into_iter().collect();
        if trees.is_empty() {
            let n = cur.grammar.longest_viable_prefix(lang, tokens);
            let prefix: Vec<String> = tokens[..n].iter().map(|t| t.as_ref().to_string()).collect();
            let completions = cur.grammar.complete(lang, &prefix);
            return Err(WikiError::Unparsable { prefix, completions });
        }
        trees.iter().try_for_each(lint)?;
        let abs = cur.grammar.abstract_syntax();
        let kind = match abs.infer(&trees[0]).map(|c| abs.cat_name(c)) {
            Ok("Q") => EntryKind::Question,
            _ => EntryKind::Declarative,
        };
        let (mut articles, mut meta) = self.target_article(&cur, article)?;
        let entry = Entry {
            id: format!("e{}", meta.next_entry),
            kind,
            trees,
            source_language: lang.to_string(),
            text: None,
        };
        meta.next_entry += 1;
        let a = articles.get_mut(article).expect("target article");
        a.entries.push(entry.clone());
        self.persist_article(a)?;
        let snap = self.commit(&cur, articles, meta)?;
        snap.render_entry(&entry, lang)
    }

    /// Adds an informal comment.
    pub fn add_comment(&self, article: &str, text: &str) -> Result<Entry, WikiError> {
        let _w = self.writer.lock();
        let cur = self.snapshot();
        let (mut articles, mut meta) = self.target_article(&cur, article)?;
        let entry = Entry {
            id: format!("e{}", meta.next_entry),
            kind: EntryKind::Comment,
            trees: Vec::new(),
            source_language: String::new(),
            text: Some(text.to_string()),
        };
        meta.next_entry += 1;
        let a = articles.get_mut(article).expect("target article");
        a.entries.push(entry.clone());
        self.persist_article(a)?;
        self.commit(&cur, articles, meta)?;
        Ok(entry)
    }

    /// Copy of the articles with `name` present, creating a free article.
    fn target_article(&self, cur: &Snapshot, name: &str) -> Result<(BTreeMap<String, Article>, Meta), WikiError> {
        if cur.modules.contains_key(name) {
            return Err(WikiError::NotEntryArticle(name.to_string()));
        }
        if !valid_article_name(name) {
            return Err(WikiError::InvalidName(name.to_string()));
        }
        let mut articles = cur.articles.clone();
        articles
            .entry(name.to_string())
            .or_insert_with(|| Article { name: name.to_string(), kind: ArticleKind::Free, entries: Vec::new() });
        Ok((articles, cur.meta()))
    }

    fn commit(&self, cur: &Snapshot, articles: BTreeMap<String, Article>, mut meta: Meta) -> Result<Arc<Snapshot>, WikiError> {
        meta.generation = cur.generation + 1;
        let snap = Snapshot::build(cur.grammar.clone(), cur.modules.clone(), articles, meta, self.reasoner);
        self.persist_meta(&snap)?;
        Ok(self.publish(snap))
    }

    pub fn delete_entry(&self, id: &str) -> Result<(), WikiError> {
        let _w = self.writer.lock();
        let cur = self.snapshot();
        let mut articles = cur.articles.clone();
        let a = articles
            .values_mut()
            .find(|a| a.entries.iter().any(|e| e.id == id))
            .ok_or_else(|| WikiError::UnknownEntry(id.to_string()))?;
        a.entries.retain(|e| e.id != id);
        self.persist_article(a)?;
        self.commit(&cur, articles, cur.meta())?;
        Ok(())
    }

    /// Keeps only `reading` among the entry's trees.
    pub fn disambiguate(&self, id: &str, reading: &Tree) -> Result<(), WikiError> {
        let _w = self.writer.lock();
        let cur = self.snapshot();
        let mut articles = cur.articles.clone();
        let a = articles
            .values_mut()
            .find(|a| a.entries.iter().any(|e| e.id == id))
            .ok_or_else(|| WikiError::UnknownEntry(id.to_string()))?;
        let e = a.entries.iter_mut().find(|e| e.id == id).expect("entry present");
        if !e.trees.contains(reading) {
            return Err(WikiError::NotAReading(id.to_string()));
        }
        e.trees = vec![reading.clone()];
        self.persist_article(a)?;
        self.commit(&cur, articles, cur.meta())?;
        Ok(())
    }

    pub fn edit_lexicon(&self, lang: &str, source: &str) -> Result<RevalidationReport, WikiError> {
        self.edit_module(&ace::lexicon_module(lang), source)
    }

    /// Replaces a grammar module and recompiles. On any error the wiki and
    /// its store are left untouched.
    pub fn edit_module(&self, name: &str, source: &str) -> Result<RevalidationReport, WikiError> {
        let _w = self.writer.lock();
        let cur = self.snapshot();
        if name == ace::ABSTRACT {
            return Err(WikiError::ReadOnly(name.to_string()));
        }
        if !cur.modules.contains_key(name) {
            let is_lexicon = name.strip_prefix("Lex").is_some_and(|l| !l.is_empty());
            if !is_lexicon || !valid_article_name(name) {
                return Err(WikiError::NotModule(name.to_string()));
            }
        }
        let mut modules = cur.modules.clone();
        modules.insert(name.to_string(), source.to_string());
        let sources: Vec<(String, String)> = modules.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        let grammar = Arc::new(ace::compile(&sources)?);

        let mut articles = cur.articles.clone();
        let created = snapshot::missing_entity_articles(&grammar, &articles);
        if let Some(s) = &self.store {
            s.save_module(name, source)?;
            for a in &created {
                s.save_article(a)?;
            }
        }
        for a in created {
            articles.insert(a.name.clone(), a);
        }
        let mut meta = cur.meta();
        meta.generation = cur.generation + 1;
        let snap = Snapshot::build(grammar.clone(), modules, articles, meta, self.reasoner);
        let report = RevalidationReport {
            grammar: GrammarOutcome::Compiled { warnings: grammar.warnings().to_vec() },
            generation: snap.generation,
            entries: snapshot::revalidate(&cur, &snap),
        };
        self.persist_meta(&snap)?;
        self.publish(snap);
        Ok(report)
    }
}
