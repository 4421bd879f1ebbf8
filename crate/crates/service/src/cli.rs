//! Command-line interface: `serve`, `check-grammar`, `eval`, `export-axioms`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use cnlwiki_core::ace::{self, LANGUAGES};
use cnlwiki_core::eval::{self, EvalError, EvalReport};
use cnlwiki_core::reasoner::Reasoner;
use cnlwiki_core::wiki::{Wiki, WikiError};
use cnlwiki_core::{CompiledGrammar, GrammarError};

#[derive(Debug, Parser)]
#[command(name = "cnlwiki", version, about = "Multilingual controlled-language semantic wiki")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Serve the HTTP API over a wiki store.
    Serve {
        /// Store directory; created with the shipped grammar and demo article if empty.
        #[arg(long, env = "CNLWIKI_STORE")]
        store: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Bootstrap a new store without the demo article.
        #[arg(long)]
        no_demo: bool,
    },
    /// Compile the grammar modules in DIR (a store or a directory of `.gfs` files).
    CheckGrammar { dir: PathBuf },
    /// Coverage, ambiguity and round-trip measurements, or the reasoner test pool.
    Eval {
        #[arg(value_enum)]
        what: EvalKind,
        /// Language tag; repeat for several. Defaults to all languages.
        #[arg(long)]
        lang: Vec<String>,
        #[arg(long, default_value_t = 8)]
        max_tokens: usize,
        #[arg(long, default_value_t = 4)]
        max_depth: usize,
        /// Largest knowledge base in the reasoner pool.
        #[arg(long, default_value_t = 4)]
        max_axioms: usize,
        /// Grammar to measure (a store or a directory of `.gfs` files); the shipped grammar by default.
        #[arg(long)]
        grammar: Option<PathBuf>,
    },
    /// Print the knowledge base of the store in DIR, one axiom per line.
    ExportAxioms {
        dir: PathBuf,
        /// Prefix each axiom with its entry id and a tab.
        #[arg(long)]
        with_ids: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalKind {
    Coverage,
    Ambiguity,
    Roundtrip,
    Reasoner,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Wiki(#[from] WikiError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Reads `*.gfs` modules from `dir`, or from `dir/grammar` for a store.
pub fn read_modules(dir: &Path) -> Result<Vec<(String, String)>, CliError> {
    let grammar = dir.join("grammar");
    let dir = if grammar.is_dir() { grammar } else { dir.to_path_buf() };
    let mut out = Vec::new();
    for e in fs::read_dir(&dir)? {
        let path = e?.path();
        if path.extension().is_some_and(|x| x == "gfs") {
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            out.push((name, fs::read_to_string(&path)?));
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(CliError::Usage(format!("no .gfs modules in {}", dir.display())));
    }
    Ok(out)
}

fn load_grammar(dir: Option<&Path>) -> Result<CompiledGrammar, CliError> {
    match dir {
        Some(d) => Ok(ace::compile(&read_modules(d)?)?),
        None => Ok(ace::shipped_grammar()),
    }
}

/// Runs one command; the return value is the process exit code.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Serve { store, port, host, no_demo } => serve(&store, &host, port, !no_demo),
        Command::CheckGrammar { dir } => check_grammar(&dir),
        Command::Eval { what, lang, max_tokens, max_depth, max_axioms, grammar } => {
            run_eval(what, lang, max_tokens, max_depth, max_axioms, grammar.as_deref())
        }
        Command::ExportAxioms { dir, with_ids } => export_axioms(&dir, with_ids),
    }
}

fn serve(store: &Path, host: &str, port: u16, demo: bool) -> Result<i32, CliError> {
    let wiki = Arc::new(Wiki::open_with(store, demo)?);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind((host, port)).await?;
        eprintln!("serving {} on http://{}", store.display(), listener.local_addr()?);
        axum::serve(listener, crate::router(wiki))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    })?;
    Ok(0)
}

fn check_grammar(dir: &Path) -> Result<i32, CliError> {
    let modules = read_modules(dir)?;
    match ace::compile(&modules) {
        Ok(g) => {
            for w in g.warnings() {
                eprintln!("warning: {}:{}: {}", w.module, w.line, w.message);
            }
            let langs: Vec<&str> = g.languages().collect();
            println!("ok: {} modules, languages {}", modules.len(), langs.join(", "));
            Ok(0)
        }
        Err(e) => {
            for d in &e.diagnostics {
                eprintln!("error: {}:{}: {}", d.module, d.line, d.message);
            }
            Ok(1)
        }
    }
}

fn run_eval(
    what: EvalKind,
    langs: Vec<String>,
    max_tokens: usize,
    max_depth: usize,
    max_axioms: usize,
    grammar: Option<&Path>,
) -> Result<i32, CliError> {
    let mut out = std::io::stdout().lock();
    if what == EvalKind::Reasoner {
        let (basis, verdicts) = eval::reasoner_pool(&Reasoner::default(), max_axioms);
        let count = |v: &str| verdicts.iter().filter(|p| p.verdict == v).count();
        eprintln!(
            "pool of {} knowledge bases: {} consistent, {} inconsistent, {} unknown",
            verdicts.len(),
            count("consistent"),
            count("inconsistent"),
            count("unknown")
        );
        let basis: Vec<String> = basis.iter().map(ToString::to_string).collect();
        serde_json::to_writer(&mut out, &json!({ "basis": basis, "verdicts": verdicts })).map_err(std::io::Error::from)?;
        writeln!(out)?;
        return Ok(0);
    }
    let g = load_grammar(grammar)?;
    let langs = if langs.is_empty() { LANGUAGES.iter().map(|l| l.to_string()).collect() } else { langs };
    let mut reports: Vec<EvalReport> = Vec::new();
    let mut failed = false;
    for lang in &langs {
        let r = match what {
            EvalKind::Coverage => eval::coverage_report(&g, lang, max_tokens)?,
            EvalKind::Ambiguity => eval::ambiguity_report(&g, lang, max_tokens)?,
            EvalKind::Roundtrip => eval::roundtrip_check(&g, lang, max_depth)?,
            EvalKind::Reasoner => unreachable!(),
        };
        eprint!("{}", r.summary());
        failed |= !r.round_trip_failures.is_empty() || r.harmless_rate < 1.0;
        reports.push(r);
    }
    serde_json::to_writer(&mut out, &reports).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(i32::from(failed))
}

fn export_axioms(dir: &Path, with_ids: bool) -> Result<i32, CliError> {
    if !dir.join("grammar").is_dir() {
        return Err(CliError::Usage(format!("{} is not a wiki store", dir.display())));
    }
    let wiki = Wiki::open_with(dir, false)?;
    let snap = wiki.snapshot();
    let mut out = std::io::stdout().lock();
    for (id, a) in snap.axioms() {
        if with_ids {
            writeln!(out, "{id}\t{a}")?;
        } else {
            writeln!(out, "{a}")?;
        }
    }
    Ok(0)
}
