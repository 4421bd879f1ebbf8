//! Compiled concrete syntax: a parallel multiple context-free grammar.

use rustc_hash::FxHashMap;

use super::abstract_syntax::{CatIdx, FunIdx};

pub type CatId = u32;
pub type TokId = u32;
pub type ProdId = u32;

/// One item of a field's linearization sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    Tok(TokId),
    /// Field `field` of argument `arg`.
    Arg { arg: u8, field: u16 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Production {
    pub result: CatId,
    pub fun: FunIdx,
    pub args: Vec<CatId>,
    pub fields: Vec<Vec<Symbol>>,
}

/// An abstract category split by the values of its inherent parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteCat {
    pub abs: CatIdx,
    /// (parameter field path, constructor) pairs in lincat order.
    pub params: Vec<(String, String)>,
}

/// The compiled form of one concrete syntax.
#[derive(Debug, Clone)]
pub struct Concrete {
    pub lang: String,
    pub name: String,
    pub cats: Vec<ConcreteCat>,
    pub productions: Vec<Production>,
    /// Field paths (`s.Sg.Nom`) per abstract category.
    pub field_names: Vec<Vec<String>>,
    pub tokens: Vec<String>,
    pub(crate) token_index: FxHashMap<String, TokId>,
    pub(crate) prods_by_cat: Vec<Vec<ProdId>>,
    pub(crate) prods_by_fun: Vec<Vec<ProdId>>,
    pub(crate) cats_by_abs: Vec<Vec<CatId>>,
    /// Lexical functions of the abstract syntax this language has no entry for.
    pub untranslated: Vec<String>,
}

impl Concrete {
    pub fn token(&self, t: TokId) -> &str {
        &self.tokens[t as usize]
    }

    pub fn token_id(&self, s: &str) -> Option<TokId> {
        self.token_index.get(s).copied()
    }

    pub fn productions_of_cat(&self, c: CatId) -> &[ProdId] {
        &self.prods_by_cat[c as usize]
    }

    pub fn productions_of_fun(&self, f: FunIdx) -> &[ProdId] {
        self.prods_by_fun.get(f).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn production(&self, p: ProdId) -> &Production {
        &self.productions[p as usize]
    }

    pub fn cats_of(&self, abs: CatIdx) -> &[CatId] {
        self.cats_by_abs.get(abs).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn field_count(&self, c: CatId) -> usize {
        self.field_names[self.cats[c as usize].abs].len()
    }

    /// Number of distinct productions a function compiled to.
    pub fn production_count(&self, f: FunIdx) -> usize {
        self.productions_of_fun(f).len()
    }

    pub(crate) fn index(&mut self, abs_cats: usize, funs: usize) {
        self.prods_by_cat = vec![Vec::new(); self.cats.len()];
        self.prods_by_fun = vec![Vec::new(); funs];
        self.cats_by_abs = vec![Vec::new(); abs_cats];
        for (i, c) in self.cats.iter().enumerate() {
            self.cats_by_abs[c.abs].push(i as CatId);
        }
        for (i, p) in self.productions.iter().enumerate() {
            self.prods_by_cat[p.result as usize].push(i as ProdId);
            self.prods_by_fun[p.fun].push(i as ProdId);
        }
    }
}
