//! HTTP API over the wiki engine.
//!
//! Every request names its language explicitly; the server keeps no
//! per-client state. Reads work on the current snapshot, writes go through
//! the wiki's single writer.

use std::collections::BTreeSet;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use cnlwiki_core::ace::lexicon_module;
use cnlwiki_core::wiki::{RevalidationReport, Wiki, WikiError};
use cnlwiki_core::Tree;

pub mod cli;

#[derive(Debug, Error)]
pub enum ApiError {
    #[error(transparent)]
    Wiki(#[from] WikiError),
    #[error("malformed tree: {0}")]
    BadTree(String),
    #[error("worker failed: {0}")]
    Join(String),
}

impl ApiError {
    fn status(&self) -> StatusCode {
        use WikiError as W;
        match self {
            ApiError::BadTree(_) => StatusCode::BAD_REQUEST,
            ApiError::Join(_) => StatusCode::INTERNAL_SERVER_ERROR,
            ApiError::Wiki(e) => match e {
                W::UnknownLanguage(_)
                | W::Unparsable { .. }
                | W::Lint(_)
                | W::InvalidName(_)
                | W::NotEntryArticle(_)
                | W::NotQuestion
                | W::UnsupportedQuery(_)
                | W::NotAReading(_) => StatusCode::BAD_REQUEST,
                W::UnknownArticle(_) | W::UnknownEntry(_) | W::NotModule(_) => StatusCode::NOT_FOUND,
                W::ReadOnly(_) => StatusCode::FORBIDDEN,
                W::Grammar(_) => StatusCode::UNPROCESSABLE_ENTITY,
                W::Inconsistent { .. } => StatusCode::CONFLICT,
                W::ReasonerUnknown => StatusCode::SERVICE_UNAVAILABLE,
                W::Store(_) | W::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            },
        }
    }

    fn code(&self) -> &'static str {
        use WikiError as W;
        match self {
            ApiError::BadTree(_) => "bad_tree",
            ApiError::Join(_) => "internal",
            ApiError::Wiki(e) => match e {
                W::UnknownLanguage(_) => "unknown_language",
                W::Unparsable { .. } => "unparsable",
                W::Lint(_) => "rejected_sentence",
                W::UnknownArticle(_) => "unknown_article",
                W::UnknownEntry(_) => "unknown_entry",
                W::InvalidName(_) => "invalid_name",
                W::NotEntryArticle(_) => "not_entry_article",
                W::ReadOnly(_) => "read_only",
                W::NotModule(_) => "not_module",
                W::Grammar(_) => "grammar_rejected",
                W::Inconsistent { .. } => "inconsistent",
                W::ReasonerUnknown => "reasoner_unknown",
                W::NotQuestion => "not_question",
                W::UnsupportedQuery(_) => "unsupported_query",
                W::NotAReading(_) => "not_a_reading",
                W::Store(_) | W::Io(_) => "store",
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.code(), "message": self.to_string() });
        if let ApiError::Wiki(e) = &self {
            match e {
                WikiError::Unparsable { prefix, completions } => {
                    body["prefix"] = json!(prefix);
                    body["completions"] = json!(completions);
                }
                WikiError::Inconsistent { conflict } => body["conflict"] = json!(conflict),
                _ => {}
            }
        }
        (self.status(), Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Runs wiki work off the async executor; parsing and reasoning are CPU-bound.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::Join(e.to_string()))?
}

fn parse_tree(s: &str) -> ApiResult<Tree> {
    s.parse().map_err(|e: cnlwiki_core::TreeSyntaxError| ApiError::BadTree(e.to_string()))
}

fn check_lang(wiki: &Wiki, lang: &str) -> ApiResult<()> {
    if wiki.snapshot().grammar.has_language(lang) {
        Ok(())
    } else {
        Err(WikiError::UnknownLanguage(lang.to_string()).into())
    }
}

#[derive(Clone)]
struct AppState {
    wiki: Arc<Wiki>,
}

/// The full API.
pub fn router(wiki: Arc<Wiki>) -> Router {
    Router::new()
        .route("/languages", get(languages))
        .route("/complete", post(complete))
        .route("/parse", post(parse))
        .route("/linearize", post(linearize))
        .route("/translate", post(translate))
        .route("/entries", post(add_entry))
        .route("/entries/{id}", axum::routing::delete(delete_entry))
        .route("/entries/{id}/disambiguate", post(disambiguate))
        .route("/comments", post(add_comment))
        .route("/articles", get(list_articles))
        .route("/articles/{name}", get(article))
        .route("/lexicon/{lang}", put(edit_lexicon))
        .route("/modules/{name}", put(edit_module))
        .route("/reasoner/status", get(reasoner_status))
        .route("/reasoner/taxonomy", get(taxonomy))
        .route("/reasoner/query", post(query))
        .route("/axioms", get(axioms))
        .with_state(AppState { wiki })
}

async fn languages(State(s): State<AppState>) -> Json<Vec<String>> {
    Json(s.wiki.snapshot().languages())
}

#[derive(Deserialize)]
struct CompleteReq {
    lang: String,
    #[serde(default)]
    prefix: Vec<String>,
}

#[derive(Serialize)]
struct CompleteResp {
    tokens: BTreeSet<String>,
    generation: u64,
}

async fn complete(State(s): State<AppState>, Json(r): Json<CompleteReq>) -> ApiResult<Json<CompleteResp>> {
    blocking(move || {
        check_lang(&s.wiki, &r.lang)?;
        let snap = s.wiki.snapshot();
        Ok(Json(CompleteResp { tokens: snap.grammar.complete(&r.lang, &r.prefix), generation: snap.generation }))
    })
    .await
}

#[derive(Deserialize)]
struct TokensReq {
    lang: String,
    tokens: Vec<String>,
}

async fn parse(State(s): State<AppState>, Json(r): Json<TokensReq>) -> ApiResult<Json<Value>> {
    blocking(move || {
        check_lang(&s.wiki, &r.lang)?;
        let snap = s.wiki.snapshot();
        let trees: Vec<String> = snap.grammar.parse(&r.lang, &r.tokens).iter().map(Tree::to_string).collect();
        Ok(Json(json!({ "trees": trees, "generation": snap.generation })))
    })
    .await
}

#[derive(Deserialize)]
struct LinearizeReq {
    lang: String,
    tree: String,
}

async fn linearize(State(s): State<AppState>, Json(r): Json<LinearizeReq>) -> ApiResult<Json<Value>> {
    blocking(move || {
        check_lang(&s.wiki, &r.lang)?;
        let tree = parse_tree(&r.tree)?;
        let g = s.wiki.snapshot().grammar.clone();
        let bad = |e: cnlwiki_core::TreeError| ApiError::BadTree(e.to_string());
        Ok(Json(json!({
            "tokens": g.linearize(&r.lang, &tree).map_err(bad)?,
            "all": g.linearize_all(&r.lang, &tree).map_err(bad)?,
            "bracketed": g.linearize_bracketed(&r.lang, &tree).map_err(bad)?,
        })))
    })
    .await
}

#[derive(Deserialize)]
struct TranslateReq {
    from: String,
    to: String,
    tokens: Vec<String>,
}

async fn translate(State(s): State<AppState>, Json(r): Json<TranslateReq>) -> ApiResult<Json<Value>> {
    blocking(move || {
        check_lang(&s.wiki, &r.from)?;
        check_lang(&s.wiki, &r.to)?;
        let g = s.wiki.snapshot().grammar.clone();
        Ok(Json(json!({ "translations": g.translate(&r.from, &r.to, &r.tokens) })))
    })
    .await
}

#[derive(Deserialize)]
struct EntryReq {
    article: String,
    lang: String,
    tokens: Vec<String>,
}

async fn add_entry(State(s): State<AppState>, Json(r): Json<EntryReq>) -> ApiResult<(StatusCode, Json<Value>)> {
    blocking(move || {
        let e = s.wiki.add_entry(&r.article, &r.lang, &r.tokens)?;
        let mut v = serde_json::to_value(e).expect("entry serializes");
        v["generation"] = json!(s.wiki.snapshot().generation);
        Ok((StatusCode::CREATED, Json(v)))
    })
    .await
}

#[derive(Deserialize)]
struct CommentReq {
    article: String,
    text: String,
}

async fn add_comment(State(s): State<AppState>, Json(r): Json<CommentReq>) -> ApiResult<(StatusCode, Json<Value>)> {
    blocking(move || {
        let e = s.wiki.add_comment(&r.article, &r.text)?;
        Ok((StatusCode::CREATED, Json(serde_json::to_value(e).expect("entry serializes"))))
    })
    .await
}

async fn delete_entry(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    blocking(move || {
        s.wiki.delete_entry(&id)?;
        Ok(StatusCode::NO_CONTENT)
    })
    .await
}

#[derive(Deserialize)]
struct DisambiguateReq {
    tree: String,
    #[serde(default = "default_lang")]
    lang: String,
}

fn default_lang() -> String {
    "ace".into()
}

async fn disambiguate(
    State(s): State<AppState>,
    Path(id): Path<String>,
    Json(r): Json<DisambiguateReq>,
) -> ApiResult<Json<Value>> {
    blocking(move || {
        let tree = parse_tree(&r.tree)?;
        s.wiki.disambiguate(&id, &tree)?;
        let snap = s.wiki.snapshot();
        let e = snap.entry(&id).ok_or_else(|| WikiError::UnknownEntry(id.clone()))?;
        Ok(Json(serde_json::to_value(snap.render_entry(e, &r.lang)?).expect("entry serializes")))
    })
    .await
}

async fn list_articles(State(s): State<AppState>) -> Json<Value> {
    let snap = s.wiki.snapshot();
    let articles: Vec<Value> = snap
        .articles
        .values()
        .map(|a| json!({ "name": a.name, "kind": a.kind, "entries": a.entries.len() }))
        .collect();
    let modules: Vec<&String> = snap.modules.keys().collect();
    Json(json!({ "generation": snap.generation, "articles": articles, "modules": modules }))
}

#[derive(Deserialize)]
struct LangQuery {
    lang: Option<String>,
}

async fn article(
    State(s): State<AppState>,
    Path(name): Path<String>,
    Query(q): Query<LangQuery>,
) -> ApiResult<Json<Value>> {
    blocking(move || {
        let lang = q.lang.unwrap_or_else(default_lang);
        let view = s.wiki.snapshot().render_article(&name, &lang)?;
        Ok(Json(serde_json::to_value(view).expect("article serializes")))
    })
    .await
}

#[derive(Deserialize)]
struct SourceReq {
    source: String,
}

fn grammar_edit(wiki: &Wiki, res: Result<RevalidationReport, WikiError>) -> Response {
    match res {
        Ok(report) => Json(report).into_response(),
        Err(WikiError::Grammar(e)) => {
            let report = RevalidationReport::rejected(&e, wiki.snapshot().generation);
            (StatusCode::UNPROCESSABLE_ENTITY, Json(report)).into_response()
        }
        Err(e) => ApiError::from(e).into_response(),
    }
}

async fn edit_lexicon(State(s): State<AppState>, Path(lang): Path<String>, Json(r): Json<SourceReq>) -> Response {
    blocking(move || {
        // a lexicon page exists only for a known language
        if !s.wiki.snapshot().modules.contains_key(&lexicon_module(&lang)) {
            return Err(WikiError::UnknownLanguage(lang).into());
        }
        Ok(grammar_edit(&s.wiki, s.wiki.edit_lexicon(&lang, &r.source)))
    })
    .await
    .into_response()
}

async fn edit_module(State(s): State<AppState>, Path(name): Path<String>, Json(r): Json<SourceReq>) -> Response {
    blocking(move || Ok(grammar_edit(&s.wiki, s.wiki.edit_module(&name, &r.source)))).await.into_response()
}

async fn reasoner_status(State(s): State<AppState>) -> Json<Value> {
    let snap = s.wiki.snapshot();
    Json(json!({ "generation": snap.generation, "consistency": snap.consistency, "warnings": snap.warnings }))
}

async fn taxonomy(State(s): State<AppState>, Query(q): Query<LangQuery>) -> ApiResult<Json<Value>> {
    blocking(move || {
        let view = s.wiki.snapshot().taxonomy_view(q.lang.as_deref())?;
        Ok(Json(serde_json::to_value(view).expect("taxonomy serializes")))
    })
    .await
}

async fn query(State(s): State<AppState>, Json(r): Json<TokensReq>) -> ApiResult<Json<Value>> {
    blocking(move || {
        let snap = s.wiki.snapshot();
        let answer = snap.query(&r.lang, &r.tokens)?;
        let mut v = serde_json::to_value(answer).expect("answer serializes");
        v["generation"] = json!(snap.generation);
        Ok(Json(v))
    })
    .await
}

async fn axioms(State(s): State<AppState>) -> Json<Value> {
    let snap = s.wiki.snapshot();
    let list: Vec<Value> =
        snap.axioms().iter().map(|(id, a)| json!({ "entry": id, "axiom": a.to_string() })).collect();
    Json(json!({ "generation": snap.generation, "axioms": list }))
}
