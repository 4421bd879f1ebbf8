//! Grammar kernel: abstract syntax, concrete syntaxes compiled to PMCFG,
//! linearization, parsing, completion and translation.

pub mod abstract_syntax;
pub mod compile;
mod parse;
pub mod pmcfg;
pub mod source;
pub mod tree;

use std::collections::{BTreeMap, BTreeSet};

pub use abstract_syntax::{AbstractSyntax, CatIdx, FunIdx, Function};
pub use compile::{compile_modules, compile_sources, LexValue, Morphology, NoMorphology};
pub use pmcfg::{CatId, Concrete, ConcreteCat, Production, Symbol};
pub use tree::Tree;

use crate::error::{Diagnostic, TreeError};
use parse::Chart;
use pmcfg::TokId;

/// Linearizations computed per subtree are capped; variant-heavy grammars
/// otherwise grow combinatorially.
const MAX_LINEARIZATIONS: usize = 256;

const OPEN: TokId = TokId::MAX;
const CLOSE: TokId = TokId::MAX - 1;

/// Abstract syntax plus one compiled concrete syntax per language tag.
/// Immutable once built; share it behind an `Arc`.
#[derive(Debug, Clone)]
pub struct CompiledGrammar {
    abs: AbstractSyntax,
    concretes: BTreeMap<String, Concrete>,
    warnings: Vec<Diagnostic>,
}

type Lin = (CatId, Vec<Vec<TokId>>);

impl CompiledGrammar {
    pub(crate) fn from_parts(abs: AbstractSyntax, concretes: BTreeMap<String, Concrete>, warnings: Vec<Diagnostic>) -> Self {
        CompiledGrammar { abs, concretes, warnings }
    }

    pub fn abstract_syntax(&self) -> &AbstractSyntax {
        &self.abs
    }

    pub fn concrete(&self, lang: &str) -> Option<&Concrete> {
        self.concretes.get(lang)
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.concretes.keys().map(String::as_str)
    }

    pub fn has_language(&self, lang: &str) -> bool {
        self.concretes.contains_key(lang)
    }

    /// Non-fatal compiler findings, such as lexicon entries missing in one language.
    pub fn warnings(&self) -> &[Diagnostic] {
        &self.warnings
    }

    fn concrete_or_err(&self, lang: &str) -> Result<&Concrete, TreeError> {
        self.concretes.get(lang).ok_or_else(|| TreeError::UnknownLanguage(lang.to_string()))
    }

    /// Checks that `t` is a well-typed tree of a start category.
    pub fn check_tree(&self, t: &Tree) -> Result<CatIdx, TreeError> {
        let cat = self.abs.infer(t)?;
        if !self.abs.is_start(cat) {
            return Err(TreeError::NotStart(self.abs.cats[cat].clone()));
        }
        Ok(cat)
    }

    fn lin_options(&self, c: &Concrete, t: &Tree, bracket: Option<&[bool]>) -> Result<Vec<Lin>, TreeError> {
        let fi = self.abs.fun(&t.fun).ok_or_else(|| TreeError::UnknownFunction(t.fun.clone()))?;
        let prods = c.productions_of_fun(fi);
        if prods.is_empty() {
            return Err(TreeError::MissingLin { lang: c.lang.clone(), fun: t.fun.clone() });
        }
        let children: Vec<Vec<Lin>> =
            t.args.iter().map(|a| self.lin_options(c, a, bracket)).collect::<Result<_, _>>()?;
        let wrap = bracket.is_some_and(|b| b[self.abs.funs[fi].result]);
        let mut out: Vec<Lin> = Vec::new();
        for &pid in prods {
            let p = c.production(pid);
            let matching: Vec<Vec<&Lin>> = p
                .args
                .iter()
                .zip(&children)
                .map(|(&want, opts)| opts.iter().filter(|(cat, _)| *cat == want).collect())
                .collect();
            let mut idx = vec![0usize; matching.len()];
            if matching.iter().any(Vec::is_empty) {
                continue;
            }
            loop {
                let fields: Vec<Vec<TokId>> = p
                    .fields
                    .iter()
                    .map(|seq| {
                        let mut toks = Vec::new();
                        for s in seq {
                            match *s {
                                Symbol::Tok(tk) => toks.push(tk),
                                Symbol::Arg { arg, field } => {
                                    let a = arg as usize;
                                    toks.extend_from_slice(&matching[a][idx[a]].1[field as usize]);
                                }
                            }
                        }
                        if wrap && !toks.is_empty() {
                            toks.insert(0, OPEN);
                            toks.push(CLOSE);
                        }
                        toks
                    })
                    .collect();
                let lin = (p.result, fields);
                if !out.contains(&lin) {
                    out.push(lin);
                    if out.len() >= MAX_LINEARIZATIONS {
                        return Ok(out);
                    }
                }
                // odometer over argument choices
                let mut k = matching.len();
                let mut carried = true;
                while carried && k > 0 {
                    k -= 1;
                    idx[k] += 1;
                    carried = idx[k] == matching[k].len();
                    if carried {
                        idx[k] = 0;
                    }
                }
                if carried {
                    break;
                }
            }
        }
        Ok(out)
    }

    fn start_strings(&self, c: &Concrete, t: &Tree, bracket: Option<&[bool]>) -> Result<Vec<Vec<String>>, TreeError> {
        self.check_tree(t)?;
        let opts = self.lin_options(c, t, bracket)?;
        let mut out: Vec<Vec<String>> = Vec::new();
        for (_, fields) in opts {
            let toks = fields[0]
                .iter()
                .map(|&tk| match tk {
                    OPEN => "[".to_string(),
                    CLOSE => "]".to_string(),
                    _ => c.token(tk).to_string(),
                })
                .collect();
            if !out.contains(&toks) {
                out.push(toks);
            }
        }
        Ok(out)
    }

    /// Canonical token sequence of a start-category tree: first variant everywhere.
    pub fn linearize(&self, lang: &str, t: &Tree) -> Result<Vec<String>, TreeError> {
        let c = self.concrete_or_err(lang)?;
        Ok(self.start_strings(c, t, None)?.swap_remove(0))
    }

    /// Every variant linearization, duplicates removed.
    pub fn linearize_all(&self, lang: &str, t: &Tree) -> Result<BTreeSet<Vec<String>>, TreeError> {
        let c = self.concrete_or_err(lang)?;
        Ok(self.start_strings(c, t, None)?.into_iter().collect())
    }

    /// Canonical linearization with brackets around every field of each NP,
    /// VP and relative-clause constituent.
    pub fn linearize_bracketed(&self, lang: &str, t: &Tree) -> Result<Vec<String>, TreeError> {
        let c = self.concrete_or_err(lang)?;
        let marks: Vec<bool> =
            self.abs.cats.iter().map(|name| matches!(name.as_str(), "NP" | "VP" | "RelCl")).collect();
        Ok(self.start_strings(c, t, Some(&marks))?.swap_remove(0))
    }

    /// All trees of a start category having `tokens` among their linearizations.
    /// Unknown languages and tokens give the empty set.
    pub fn parse(&self, lang: &str, tokens: &[impl AsRef<str>]) -> BTreeSet<Tree> {
        match self.concretes.get(lang) {
            Some(c) => Chart::run(&self.abs, c, tokens).trees(&self.abs, tokens.len()),
            None => BTreeSet::new(),
        }
    }

    /// Tokens that can follow `prefix` in some sentence of the language.
    pub fn complete(&self, lang: &str, prefix: &[impl AsRef<str>]) -> BTreeSet<String> {
        let Some(c) = self.concretes.get(lang) else { return BTreeSet::new() };
        Chart::run(&self.abs, c, prefix)
            .next_tokens(prefix.len())
            .into_iter()
            .map(|t| c.token(t).to_string())
            .collect()
    }

    /// Length of the longest prefix of `tokens` that some sentence extends.
    pub fn longest_viable_prefix(&self, lang: &str, tokens: &[impl AsRef<str>]) -> usize {
        match self.concretes.get(lang) {
            Some(c) => Chart::run(&self.abs, c, tokens).viable_prefix(),
            None => 0,
        }
    }

    /// Parses in `from` and linearizes each tree canonically in `to`.
    pub fn translate(&self, from: &str, to: &str, tokens: &[impl AsRef<str>]) -> BTreeSet<Vec<String>> {
        self.parse(from, tokens).iter().filter_map(|t| self.linearize(to, t).ok()).collect()
    }

    /// Citation form of a lexical function: the first field of its first
    /// production (nominative singular for nouns and names).
    pub fn lexical_form(&self, lang: &str, fun: &str) -> Option<String> {
        let c = self.concretes.get(lang)?;
        let fi = self.abs.fun(fun)?;
        let p = c.production(*c.productions_of_fun(fi).first()?);
        let words: Vec<&str> = p.fields.first()?.iter().filter_map(|s| match *s {
            Symbol::Tok(t) => Some(c.token(t)),
            Symbol::Arg { .. } => None,
        })
        .collect();
        Some(words.join(" "))
    }
}
