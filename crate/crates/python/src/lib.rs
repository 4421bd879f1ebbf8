//! Python bindings: `cnlwiki.Grammar` for the grammar runtime and
//! `cnlwiki.Wiki` for the wiki engine. Structured results come back as
//! plain dicts and lists.

use std::path::PathBuf;
use std::sync::Arc;

use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::{create_exception, IntoPyObjectExt};
use serde_json::Value;

use cnlwiki_core::ace::{self, tokenize};
use cnlwiki_core::semantics::{tree_to_axiom, tree_to_query};
use cnlwiki_core::wiki::WikiError;
use cnlwiki_core::{CompiledGrammar, Tree};

create_exception!(cnlwiki, GrammarError, PyException, "A grammar failed to compile.");
create_exception!(cnlwiki, WikiException, PyException, "A wiki operation was refused.");

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn wiki_err(e: WikiError) -> PyErr {
    match e {
        WikiError::Grammar(g) => GrammarError::new_err(g.to_string()),
        other => WikiException::new_err(other.to_string()),
    }
}

fn tree(s: &str) -> PyResult<Tree> {
    s.parse().map_err(value_err)
}

/// Accepts either a token list or a sentence string.
#[derive(FromPyObject)]
enum Input {
    Tokens(Vec<String>),
    Text(String),
}

impl Input {
    fn tokens(self, lang: &str) -> Vec<String> {
        match self {
            Input::Tokens(t) => t,
            Input::Text(s) => tokenize(lang, &s),
        }
    }
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_bound_py_any(py)?,
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_bound_py_any(py)?,
            None => n.as_f64().unwrap_or(f64::NAN).into_bound_py_any(py)?,
        },
        Value::String(s) => s.into_bound_py_any(py)?,
        Value::Array(xs) => {
            let list = PyList::empty(py);
            for x in xs {
                list.append(to_py(py, x)?)?;
            }
            list.into_any()
        }
        Value::Object(m) => {
            let d = PyDict::new(py);
            for (k, x) in m {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn serialize<'py>(py: Python<'py>, x: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &serde_json::to_value(x).map_err(value_err)?)
}

/// A compiled multilingual grammar.
#[pyclass(frozen)]
struct Grammar {
    inner: Arc<CompiledGrammar>,
}

#[pymethods]
impl Grammar {
    /// The shipped grammar, or the `.gfs` modules of `directory`.
    #[new]
    #[pyo3(signature = (directory = None))]
    fn new(directory: Option<PathBuf>) -> PyResult<Self> {
        let g = match directory {
            None => ace::shipped_grammar(),
            Some(dir) => {
                let mut sources = Vec::new();
                for e in std::fs::read_dir(&dir).map_err(value_err)? {
                    let path = e.map_err(value_err)?.path();
                    if path.extension().is_some_and(|x| x == "gfs") {
                        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
                        sources.push((name, std::fs::read_to_string(&path).map_err(value_err)?));
                    }
                }
                ace::compile(&sources).map_err(|e| GrammarError::new_err(e.to_string()))?
            }
        };
        Ok(Grammar { inner: Arc::new(g) })
    }

    fn languages(&self) -> Vec<String> {
        self.inner.languages().map(str::to_string).collect()
    }

    /// Tree texts of all parses.
    fn parse(&self, lang: &str, sentence: Input) -> Vec<String> {
        self.inner.parse(lang, &sentence.tokens(lang)).iter().map(Tree::to_string).collect()
    }

    fn linearize(&self, lang: &str, tree_text: &str) -> PyResult<Vec<String>> {
        self.inner.linearize(lang, &tree(tree_text)?).map_err(value_err)
    }

    fn linearize_all(&self, lang: &str, tree_text: &str) -> PyResult<Vec<Vec<String>>> {
        Ok(self.inner.linearize_all(lang, &tree(tree_text)?).map_err(value_err)?.into_iter().collect())
    }

    fn linearize_bracketed(&self, lang: &str, tree_text: &str) -> PyResult<Vec<String>> {
        self.inner.linearize_bracketed(lang, &tree(tree_text)?).map_err(value_err)
    }

    /// Tokens that may follow `prefix`.
    fn complete(&self, lang: &str, prefix: Vec<String>) -> Vec<String> {
        self.inner.complete(lang, &prefix).into_iter().collect()
    }

    fn translate(&self, source: &str, target: &str, sentence: Input) -> Vec<Vec<String>> {
        self.inner.translate(source, target, &sentence.tokens(source)).into_iter().collect()
    }

    /// Axiom text of a declarative tree; `ValueError` outside the supported fragment.
    fn tree_to_axiom(&self, tree_text: &str) -> PyResult<String> {
        let t = tree(tree_text)?;
        self.inner.check_tree(&t).map_err(value_err)?;
        Ok(tree_to_axiom(&t).map_err(value_err)?.to_string())
    }

    /// Class expression asked for by a question tree.
    fn tree_to_query(&self, tree_text: &str) -> PyResult<String> {
        Ok(tree_to_query(&tree(tree_text)?).map_err(value_err)?.to_string())
    }
}

/// A wiki, in memory or backed by a store directory.
#[pyclass(frozen)]
struct Wiki {
    inner: cnlwiki_core::wiki::Wiki,
}

#[pymethods]
impl Wiki {
    #[new]
    #[pyo3(signature = (store = None, demo = true))]
    fn new(store: Option<PathBuf>, demo: bool) -> PyResult<Self> {
        let inner = match store {
            Some(dir) => cnlwiki_core::wiki::Wiki::open_with(dir, demo),
            None => cnlwiki_core::wiki::Wiki::in_memory(demo),
        }
        .map_err(wiki_err)?;
        Ok(Wiki { inner })
    }

    fn languages(&self) -> Vec<String> {
        self.inner.snapshot().languages()
    }

    fn grammar(&self) -> Grammar {
        Grammar { inner: self.inner.snapshot().grammar.clone() }
    }

    #[getter]
    fn generation(&self) -> u64 {
        self.inner.snapshot().generation
    }

    /// Adds a sentence; returns the rendered entry.
    fn add_entry<'py>(&self, py: Python<'py>, article: &str, lang: &str, sentence: Input) -> PyResult<Bound<'py, PyAny>> {
        let tokens = sentence.tokens(lang);
        let e = py.detach(|| self.inner.add_entry(article, lang, &tokens)).map_err(wiki_err)?;
        serialize(py, &e)
    }

    fn add_comment<'py>(&self, py: Python<'py>, article: &str, text: &str) -> PyResult<Bound<'py, PyAny>> {
        serialize(py, &self.inner.add_comment(article, text).map_err(wiki_err)?)
    }

    fn delete_entry(&self, py: Python<'_>, entry_id: &str) -> PyResult<()> {
        py.detach(|| self.inner.delete_entry(entry_id)).map_err(wiki_err)
    }

    fn disambiguate(&self, py: Python<'_>, entry_id: &str, tree_text: &str) -> PyResult<()> {
        let t = tree(tree_text)?;
        py.detach(|| self.inner.disambiguate(entry_id, &t)).map_err(wiki_err)
    }

    #[pyo3(signature = (name, lang = "ace"))]
    fn article<'py>(&self, py: Python<'py>, name: &str, lang: &str) -> PyResult<Bound<'py, PyAny>> {
        serialize(py, &self.inner.snapshot().render_article(name, lang).map_err(wiki_err)?)
    }

    /// Replaces a lexicon page; returns the revalidation report.
    fn edit_lexicon<'py>(&self, py: Python<'py>, lang: &str, source: &str) -> PyResult<Bound<'py, PyAny>> {
        let r = py.detach(|| self.inner.edit_lexicon(lang, source)).map_err(wiki_err)?;
        serialize(py, &r)
    }

    /// Proper names answering a question, in the question's language.
    fn query(&self, py: Python<'_>, lang: &str, question: Input) -> PyResult<Vec<String>> {
        let tokens = question.tokens(lang);
        let snap = self.inner.snapshot();
        Ok(py.detach(|| snap.query(lang, &tokens)).map_err(wiki_err)?.names)
    }

    /// Included axioms as (entry id, axiom text) pairs.
    fn axioms(&self) -> Vec<(String, String)> {
        self.inner.snapshot().axioms().iter().map(|(id, a)| (id.clone(), a.to_string())).collect()
    }
}

#[pymodule]
fn cnlwiki(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Grammar>()?;
    m.add_class::<Wiki>()?;
    m.add("GrammarError", m.py().get_type::<GrammarError>())?;
    m.add("WikiException", m.py().get_type::<WikiException>())?;
    Ok(())
}
