//! Immutable wiki state and everything computed from it.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use super::{Article, ArticleKind, Entry, EntryKind, EntryOutcome, Meta, Status, WikiError};
use crate::ace::{self, detokenize};
use crate::grammar::{CompiledGrammar, Tree};
use crate::reasoner::{Consistency, KnowledgeBase, Reasoner, ReasonerError, Signature, Taxonomy};
use crate::semantics::{entity_name, entry_semantics, query_semantics, Axiom, Class, EntrySemantics};

/// Grammar, content and knowledge base of one generation.
pub struct Snapshot {
    pub generation: u64,
    pub grammar: Arc<CompiledGrammar>,
    /// Grammar module sources by module name.
    pub modules: BTreeMap<String, String>,
    pub articles: BTreeMap<String, Article>,
    pub statuses: BTreeMap<String, Status>,
    pub kb: KnowledgeBase,
    pub consistency: Consistency,
    /// Answers to question entries, as individual names.
    pub answers: BTreeMap<String, Result<BTreeSet<String>, ReasonerError>>,
    pub warnings: Vec<String>,
    next_entry: u64,
    reasoner: Reasoner,
    taxonomy: OnceLock<Result<Taxonomy, ReasonerError>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RenderedEntry {
    pub id: String,
    pub kind: EntryKind,
    #[serde(flatten)]
    pub status: Status,
    /// Display text: the first sentence, the comment, or stored tree text
    /// for entries that cannot be linearized.
    pub text: String,
    /// Distinct linearizations of the entry's trees.
    pub sentences: Vec<String>,
    pub ambiguous: bool,
    /// Bracketed readings when several trees share one sentence.
    pub bracketed: Vec<String>,
    /// One per tree of an ambiguous entry, for choosing a reading.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub readings: Vec<Reading>,
    pub trees: Vec<String>,
    /// Entity articles this entry mentions.
    pub links: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub answer: Option<AnswerView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Reading {
    pub tree: String,
    pub bracketed: String,
    /// The reading in every other language it can be expressed in.
    pub translations: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum AnswerView {
    Answered { individuals: Vec<String> },
    Inconsistent,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ArticleView {
    Entity { name: String, generation: u64, entries: Vec<RenderedEntry> },
    Free { name: String, generation: u64, entries: Vec<RenderedEntry> },
    Module { name: String, generation: u64, source: String, #[serde(rename = "readOnly")] read_only: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct QueryAnswer {
    pub query: Class,
    /// Individual names.
    pub individuals: Vec<String>,
    /// The same individuals as proper names of the requested language.
    pub names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaxonomyNodeView {
    pub classes: Vec<String>,
    pub parents: Vec<String>,
    /// Nouns for `classes` in the requested language.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaxonomyView {
    pub generation: u64,
    pub nodes: Vec<TaxonomyNodeView>,
}

/// Entity articles for lexical functions that have none yet.
pub(crate) fn missing_entity_articles(g: &CompiledGrammar, have: &BTreeMap<String, Article>) -> Vec<Article> {
    g.abstract_syntax()
        .lexical_functions()
        .filter(|f| !have.contains_key(&f.name))
        .map(|f| Article { name: f.name.clone(), kind: ArticleKind::Entity, entries: Vec::new() })
        .collect()
}

fn entry_number(id: &str) -> u64 {
    id.trim_start_matches('e').parse().unwrap_or(u64::MAX)
}

fn status_of(g: &CompiledGrammar, e: &Entry) -> Status {
    if e.kind == EntryKind::Comment {
        return Status::Comment;
    }
    let abs = g.abstract_syntax();
    let mut missing: Vec<String> = e.trees.iter().flat_map(|t| abs.missing_functions(t)).collect();
    missing.sort();
    missing.dedup();
    if !missing.is_empty() {
        return Status::Invalid { missing };
    }
    if e.trees.iter().any(|t| g.check_tree(t).is_err()) {
        return Status::Invalid { missing };
    }
    match e.kind {
        EntryKind::Question => match query_semantics(&e.trees) {
            Ok(Some(query)) => Status::Query { query },
            Ok(None) => Status::Excluded,
            Err(err) => Status::Unsupported { reason: err.to_string() },
        },
        _ => match entry_semantics(&e.trees) {
            EntrySemantics::Axiom(axiom) => Status::Included { axiom },
            EntrySemantics::Excluded => Status::Excluded,
            EntrySemantics::Unsupported(reason) => Status::Unsupported { reason },
        },
    }
}

/// Lexicon-declared entities: nouns as classes, names as individuals,
/// verbs as roles.
fn lexicon_signature(g: &CompiledGrammar) -> Signature {
    let abs = g.abstract_syntax();
    let mut sig = Signature::default();
    for f in abs.lexical_functions() {
        let name = entity_name(&f.name);
        match abs.cat_name(f.result) {
            "N" => sig.classes.insert(name),
            "PN" => sig.individuals.insert(name),
            "V2" => sig.roles.insert(name),
            _ => false,
        };
    }
    sig
}

/// Number of trees the entry's sentences parse to in `lang`, or 0 when the
/// entry cannot be rendered there.
fn probe(g: &CompiledGrammar, e: &Entry, lang: &str) -> usize {
    let mut trees = BTreeSet::new();
    for t in &e.trees {
        match g.linearize(lang, t) {
            Ok(s) => trees.extend(g.parse(lang, &s)),
            Err(_) => return 0,
        }
    }
    trees.len()
}

/// Per-entry consequences of moving from `old` to `new`.
pub(crate) fn revalidate(old: &Snapshot, new: &Snapshot) -> Vec<EntryOutcome> {
    let langs: BTreeSet<&str> = old.grammar.languages().chain(new.grammar.languages()).collect();
    let mut out = Vec::new();
    for e in new.entries() {
        if e.kind == EntryKind::Comment {
            continue;
        }
        let id = e.id.clone();
        let was_invalid = matches!(old.statuses.get(&e.id), Some(Status::Invalid { .. }));
        match new.statuses.get(&e.id) {
            Some(Status::Invalid { missing }) => {
                if !was_invalid {
                    out.push(EntryOutcome::Invalidated { id, missing: missing.clone() });
                } else {
                    out.push(EntryOutcome::Unchanged { id });
                }
                continue;
            }
            _ if was_invalid => {
                out.push(EntryOutcome::Revalidated { id });
                continue;
            }
            _ => {}
        }
        let mut changed = false;
        for &lang in &langs {
            let (a, b) = (probe(&old.grammar, e, lang), probe(&new.grammar, e, lang));
            if a != b {
                changed = true;
                out.push(EntryOutcome::AmbiguityChanged { id: id.clone(), language: lang.to_string(), old: a, new: b });
            }
        }
        if !changed {
            out.push(EntryOutcome::Unchanged { id });
        }
    }
    out
}

impl Snapshot {
    pub(crate) fn build(
        grammar: Arc<CompiledGrammar>,
        modules: BTreeMap<String, String>,
        articles: BTreeMap<String, Article>,
        meta: Meta,
        reasoner: Reasoner,
    ) -> Snapshot {
        let mut statuses = BTreeMap::new();
        let mut entries: Vec<&Entry> = articles.values().flat_map(|a| &a.entries).collect();
        entries.sort_by_key(|e| entry_number(&e.id));
        let mut axioms = Vec::new();
        for e in &entries {
            let s = status_of(&grammar, e);
            if let Status::Included { axiom } = &s {
                axioms.push((e.id.clone(), axiom.clone()));
            }
            statuses.insert(e.id.clone(), s);
        }
        let kb = KnowledgeBase::new(axioms, lexicon_signature(&grammar));
        let consistency = reasoner.is_consistent(&kb);
        let mut warnings = Vec::new();
        let mut answers = BTreeMap::new();
        match &consistency {
            Consistency::Unknown => warnings.push("reasoner gave up on the consistency check".to_string()),
            Consistency::Inconsistent { conflict } => {
                warnings.push(format!("knowledge base is inconsistent: {}", conflict.join(", ")))
            }
            Consistency::Consistent => {
                for e in &entries {
                    if let Some(Status::Query { query }) = statuses.get(&e.id) {
                        let a = reasoner.answer_query(&kb, query);
                        if a.is_err() {
                            warnings.push(format!("reasoner gave up on question {}", e.id));
                        }
                        answers.insert(e.id.clone(), a);
                    }
                }
            }
        }
        Snapshot {
            generation: meta.generation,
            grammar,
            modules,
            articles,
            statuses,
            kb,
            consistency,
            answers,
            warnings,
            next_entry: meta.next_entry.max(1),
            reasoner,
            taxonomy: OnceLock::new(),
        }
    }

    pub fn meta(&self) -> Meta {
        Meta { generation: self.generation, next_entry: self.next_entry }
    }

    /// All entries in creation order.
    pub fn entries(&self) -> Vec<&Entry> {
        let mut v: Vec<&Entry> = self.articles.values().flat_map(|a| &a.entries).collect();
        v.sort_by_key(|e| entry_number(&e.id));
        v
    }

    pub fn entry(&self, id: &str) -> Option<&Entry> {
        self.articles.values().flat_map(|a| &a.entries).find(|e| e.id == id)
    }

    pub fn languages(&self) -> Vec<String> {
        // reference language first, then the rest alphabetically
        let mut v: Vec<String> = self.grammar.languages().map(str::to_string).collect();
        v.sort_by_key(|l| (l != "ace", l.clone()));
        v
    }

    fn check_lang(&self, lang: &str) -> Result<(), WikiError> {
        if self.grammar.has_language(lang) {
            Ok(())
        } else {
            Err(WikiError::UnknownLanguage(lang.to_string()))
        }
    }

    /// Proper name of an individual in `lang`, or the individual id itself.
    pub fn individual_name(&self, lang: &str, ind: &str) -> String {
        self.lexical_label(lang, ind, "PN")
    }

    fn lexical_label(&self, lang: &str, entity: &str, cat: &str) -> String {
        let abs = self.grammar.abstract_syntax();
        abs.lexical_functions()
            .find(|f| abs.cat_name(f.result) == cat && entity_name(&f.name) == entity)
            .and_then(|f| self.grammar.lexical_form(lang, &f.name))
            .unwrap_or_else(|| entity.to_string())
    }

    pub fn render_entry(&self, e: &Entry, lang: &str) -> Result<RenderedEntry, WikiError> {
        self.check_lang(lang)?;
        let status = self.statuses.get(&e.id).cloned().unwrap_or_else(|| status_of(&self.grammar, e));
        let trees: Vec<String> = e.trees.iter().map(Tree::to_string).collect();
        let mut links: Vec<String> = e
            .trees
            .iter()
            .flat_map(|t| t.functions())
            .filter(|f| self.articles.get(*f).is_some_and(|a| a.kind == ArticleKind::Entity))
            .map(str::to_string)
            .collect();
        links.sort();
        links.dedup();
        let mut r = RenderedEntry {
            id: e.id.clone(),
            kind: e.kind,
            status: status.clone(),
            text: String::new(),
            sentences: Vec::new(),
            ambiguous: e.trees.len() > 1,
            bracketed: Vec::new(),
            readings: Vec::new(),
            trees,
            links,
            answer: None,
            prompt: None,
        };
        if e.kind == EntryKind::Comment {
            r.text = e.text.clone().unwrap_or_default();
            return Ok(r);
        }
        if let Status::Invalid { missing } = &status {
            r.text = r.trees.join(" | ");
            r.prompt = Some(format!(
                "This entry uses {} which the grammar no longer defines; please reformulate it.",
                missing.join(", ")
            ));
            return Ok(r);
        }
        for t in &e.trees {
            match self.grammar.linearize(lang, t) {
                Ok(s) => {
                    let s = detokenize(&s);
                    if !r.sentences.contains(&s) {
                        r.sentences.push(s);
                    }
                }
                Err(err) => {
                    r.text = r.trees.join(" | ");
                    r.sentences.clear();
                    r.prompt = Some(format!("Not expressible in `{lang}`: {err}."));
                    return Ok(r);
                }
            }
        }
        r.text = r.sentences[0].clone();
        if e.trees.len() > 1 {
            for t in &e.trees {
                let bracketed = self.grammar.linearize_bracketed(lang, t).map(|b| detokenize(&b)).unwrap_or_default();
                let translations = self
                    .grammar
                    .languages()
                    .filter(|l| *l != lang)
                    .filter_map(|l| Some((l.to_string(), detokenize(&self.grammar.linearize(l, t).ok()?))))
                    .collect();
                r.readings.push(Reading { tree: t.to_string(), bracketed, translations });
            }
            if r.sentences.len() == 1 {
                r.bracketed = r.readings.iter().map(|x| x.bracketed.clone()).collect();
            }
        }
        if e.kind == EntryKind::Question && matches!(status, Status::Query { .. }) {
            r.answer = Some(match (&self.consistency, self.answers.get(&e.id)) {
                (Consistency::Inconsistent { .. }, _) => AnswerView::Inconsistent,
                (_, Some(Ok(inds))) => AnswerView::Answered {
                    individuals: inds.iter().map(|i| self.individual_name(lang, i)).collect(),
                },
                _ => AnswerView::Unknown,
            });
        }
        Ok(r)
    }

    pub fn render_article(&self, name: &str, lang: &str) -> Result<ArticleView, WikiError> {
        self.check_lang(lang)?;
        if let Some(src) = self.modules.get(name) {
            return Ok(ArticleView::Module {
                name: name.to_string(),
                generation: self.generation,
                source: src.clone(),
                read_only: name == ace::ABSTRACT,
            });
        }
        let a = self.articles.get(name).ok_or_else(|| WikiError::UnknownArticle(name.to_string()))?;
        let entries = a.entries.iter().map(|e| self.render_entry(e, lang)).collect::<Result<Vec<_>, _>>()?;
        let (name, generation) = (a.name.clone(), self.generation);
        Ok(match a.kind {
            ArticleKind::Entity => ArticleView::Entity { name, generation, entries },
            ArticleKind::Free => ArticleView::Free { name, generation, entries },
        })
    }

    fn require_consistent(&self) -> Result<(), WikiError> {
        match &self.consistency {
            Consistency::Consistent => Ok(()),
            Consistency::Inconsistent { conflict } => Err(WikiError::Inconsistent { conflict: conflict.clone() }),
            Consistency::Unknown => Err(WikiError::ReasonerUnknown),
        }
    }

    /// Class hierarchy, computed once per snapshot.
    pub fn taxonomy(&self) -> Result<&Taxonomy, WikiError> {
        self.require_consistent()?;
        match self.taxonomy.get_or_init(|| self.reasoner.classify(&self.kb)) {
            Ok(t) => Ok(t),
            Err(ReasonerError::Inconsistent) => Err(WikiError::Inconsistent { conflict: Vec::new() }),
            Err(ReasonerError::Unknown) => Err(WikiError::ReasonerUnknown),
        }
    }

    pub fn taxonomy_view(&self, lang: Option<&str>) -> Result<TaxonomyView, WikiError> {
        if let Some(l) = lang {
            self.check_lang(l)?;
        }
        let t = self.taxonomy()?;
        let nodes = t
            .nodes
            .iter()
            .map(|n| TaxonomyNodeView {
                classes: n.classes.clone(),
                parents: n.parents.clone(),
                labels: lang.map_or_else(Vec::new, |l| n.classes.iter().map(|c| self.lexical_label(l, c, "N")).collect()),
            })
            .collect();
        Ok(TaxonomyView { generation: self.generation, nodes })
    }

    /// Answers a question typed in `lang`.
    pub fn query(&self, lang: &str, tokens: &[impl AsRef<str>]) -> Result<QueryAnswer, WikiError> {
        self.check_lang(lang)?;
        let trees: Vec<Tree> = self.grammar.parse(lang, tokens).into_iter().collect();
        if trees.is_empty() {
            let n = self.grammar.longest_viable_prefix(lang, tokens);
            let prefix: Vec<String> = tokens[..n].iter().map(|t| t.as_ref().to_string()).collect();
            let completions = self.grammar.complete(lang, &prefix);
            return Err(WikiError::Unparsable { prefix, completions });
        }
        let abs = self.grammar.abstract_syntax();
        if trees.iter().any(|t| abs.infer(t).map(|c| abs.cat_name(c)) != Ok("Q")) {
            return Err(WikiError::NotQuestion);
        }
        let query = match query_semantics(&trees) {
            Ok(Some(q)) => q,
            Ok(None) => return Err(WikiError::UnsupportedQuery("readings ask different questions".into())),
            Err(e) => return Err(WikiError::UnsupportedQuery(e.to_string())),
        };
        self.require_consistent()?;
        let inds = self.reasoner.answer_query(&self.kb, &query).map_err(|e| match e {
            ReasonerError::Unknown => WikiError::ReasonerUnknown,
            ReasonerError::Inconsistent => WikiError::Inconsistent { conflict: Vec::new() },
        })?;
        Ok(QueryAnswer {
            query,
            names: inds.iter().map(|i| self.individual_name(lang, i)).collect(),
            individuals: inds.into_iter().collect(),
        })
    }

    /// Included axioms in entry order, with their entry ids.
    pub fn axioms(&self) -> &[(String, Axiom)] {
        &self.kb.axioms
    }
}
