//! Incremental agenda-based chart parser for PMCFG.
//!
//! Items are dotted positions inside one field's sequence of a production.
//! When a field of an argument has been recognized over a span, a fresh
//! category is created for that (category, field, span); later fields of the
//! same argument are parsed against the fresh category only, which keeps the
//! argument's fields consistent with a single derivation.

use std::collections::BTreeSet;

use rustc_hash::{FxHashMap, FxHashSet};

use super::abstract_syntax::AbstractSyntax;
use super::pmcfg::{CatId, Concrete, ProdId, Symbol, TokId};
use super::tree::Tree;

/// Trees extracted per chart category are capped to keep pathological
/// ambiguity from exhausting memory.
const MAX_TREES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct ChartProd {
    result: CatId,
    prod: ProdId,
    args: Vec<CatId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Item {
    cp: u32,
    field: u16,
    dot: u16,
    start: u32,
}

#[derive(Default)]
struct Column {
    items: Vec<Item>,
    seen: FxHashSet<Item>,
    waiting: FxHashMap<(CatId, u16), Vec<Item>>,
}

pub(crate) struct Chart<'g> {
    c: &'g Concrete,
    ncats: CatId,
    tokens: Vec<TokId>,
    cps: Vec<ChartProd>,
    cp_index: FxHashMap<ChartProd, u32>,
    orig_cps: FxHashMap<ProdId, u32>,
    fresh: FxHashMap<(CatId, u16, u32, u32), CatId>,
    fresh_base: Vec<CatId>,
    fresh_prods: Vec<Vec<u32>>,
    passive: FxHashMap<(CatId, u16, u32), Vec<CatId>>,
    predicted: FxHashSet<(CatId, u16, u32)>,
    columns: Vec<Column>,
    /// Number of tokens consumed by a non-empty chart column.
    viable: usize,
}

impl<'g> Chart<'g> {
    /// Runs the parser over `tokens` starting from field 0 of every start
    /// category. Stops early at the first column without items.
    pub(crate) fn run(abs: &AbstractSyntax, c: &'g Concrete, tokens: &[impl AsRef<str>]) -> Chart<'g> {
        let mut ids = Vec::with_capacity(tokens.len());
        for t in tokens {
            match c.token_id(t.as_ref()) {
                Some(id) => ids.push(id),
                None => break,
            }
        }
        let n = ids.len();
        let mut chart = Chart {
            c,
            ncats: c.cats.len() as CatId,
            tokens: ids,
            cps: Vec::new(),
            cp_index: FxHashMap::default(),
            orig_cps: FxHashMap::default(),
            fresh: FxHashMap::default(),
            fresh_base: Vec::new(),
            fresh_prods: Vec::new(),
            passive: FxHashMap::default(),
            predicted: FxHashSet::default(),
            columns: (0..=n).map(|_| Column::default()).collect(),
            viable: 0,
        };
        for &s in &abs.start_cats {
            for &cat in c.cats_of(s) {
                chart.predict(cat, 0, 0);
            }
        }
        for k in 0..=n {
            if chart.columns[k].items.is_empty() {
                break;
            }
            chart.viable = k;
            let mut i = 0;
            while i < chart.columns[k].items.len() {
                let item = chart.columns[k].items[i];
                chart.process(item, k);
                i += 1;
            }
        }
        chart
    }

    /// Length of the longest prefix of the input that some sentence extends.
    pub(crate) fn viable_prefix(&self) -> usize {
        self.viable
    }

    fn is_complete_input(&self, len: usize) -> bool {
        self.tokens.len() == len && self.viable == len
    }

    fn intern(&mut self, cp: ChartProd) -> u32 {
        if let Some(&i) = self.cp_index.get(&cp) {
            return i;
        }
        let i = self.cps.len() as u32;
        self.cps.push(cp.clone());
        self.cp_index.insert(cp, i);
        i
    }

    fn add(&mut self, k: usize, item: Item) {
        let col = &mut self.columns[k];
        if col.seen.insert(item) {
            col.items.push(item);
        }
    }

    fn base(&self, cat: CatId) -> CatId {
        if cat < self.ncats {
            cat
        } else {
            self.fresh_base[(cat - self.ncats) as usize]
        }
    }

    fn productions_of(&mut self, cat: CatId) -> Vec<u32> {
        if cat >= self.ncats {
            return self.fresh_prods[(cat - self.ncats) as usize].clone();
        }
        let c = self.c;
        c.productions_of_cat(cat)
            .iter()
            .map(|&p| match self.orig_cps.get(&p) {
                Some(&i) => i,
                None => {
                    let prod = c.production(p);
                    let i = self.intern(ChartProd { result: cat, prod: p, args: prod.args.clone() });
                    self.orig_cps.insert(p, i);
                    i
                }
            })
            .collect()
    }

    fn predict(&mut self, cat: CatId, field: u16, k: usize) {
        if self.predicted.insert((cat, field, k as u32)) {
            for cp in self.productions_of(cat) {
                self.add(k, Item { cp, field, dot: 0, start: k as u32 });
            }
        }
    }

    fn advance(&mut self, item: Item, arg: u8, bound: CatId, k: usize) {
        let mut cp = self.cps[item.cp as usize].clone();
        cp.args[arg as usize] = bound;
        let cp = self.intern(cp);
        self.add(k, Item { cp, field: item.field, dot: item.dot + 1, start: item.start });
    }

    fn process(&mut self, item: Item, k: usize) {
        let c = self.c;
        let cp = &self.cps[item.cp as usize];
        let seq = &c.production(cp.prod).fields[item.field as usize];
        if let Some(&sym) = seq.get(item.dot as usize) {
            match sym {
                Symbol::Tok(t) => {
                    if self.tokens.get(k) == Some(&t) {
                        self.add(k + 1, Item { dot: item.dot + 1, ..item });
                    }
                }
                Symbol::Arg { arg, field } => {
                    let b = cp.args[arg as usize];
                    self.columns[k].waiting.entry((b, field)).or_default().push(item);
                    self.predict(b, field, k);
                    if let Some(done) = self.passive.get(&(b, field, k as u32)) {
                        for fresh in done.clone() {
                            self.advance(item, arg, fresh, k);
                        }
                    }
                }
            }
            return;
        }

        let (result, prod, args) = (cp.result, cp.prod, cp.args.clone());
        let key = (result, item.field, item.start, k as u32);
        let (fresh, is_new) = match self.fresh.get(&key) {
            Some(&f) => (f, false),
            None => {
                let f = self.ncats + self.fresh_base.len() as CatId;
                let base = self.base(result);
                self.fresh.insert(key, f);
                self.fresh_base.push(base);
                self.fresh_prods.push(Vec::new());
                self.passive.entry((result, item.field, item.start)).or_default().push(f);
                (f, true)
            }
        };
        let new_cp = self.intern(ChartProd { result: fresh, prod, args });
        let slot = &mut self.fresh_prods[(fresh - self.ncats) as usize];
        if slot.contains(&new_cp) {
            return;
        }
        slot.push(new_cp);
        if is_new {
            let start = item.start as usize;
            let waiting = self.columns[start].waiting.get(&(result, item.field)).cloned().unwrap_or_default();
            for w in waiting {
                let wcp = &self.cps[w.cp as usize];
                let Symbol::Arg { arg, .. } = c.production(wcp.prod).fields[w.field as usize][w.dot as usize] else {
                    unreachable!("waiting items stand before an argument");
                };
                self.advance(w, arg, fresh, k);
            }
        } else {
            // the fresh category gained a production after fields of it were predicted here
            let nfields = c.field_count(self.base(fresh)) as u16;
            for f in 0..nfields {
                if self.predicted.contains(&(fresh, f, k as u32)) {
                    self.add(k, Item { cp: new_cp, field: f, dot: 0, start: k as u32 });
                }
            }
        }
    }

    /// Tokens that may follow the consumed input.
    pub(crate) fn next_tokens(&self, len: usize) -> BTreeSet<TokId> {
        let mut out = BTreeSet::new();
        if !self.is_complete_input(len) {
            return out;
        }
        for item in &self.columns[len].items {
            let cp = &self.cps[item.cp as usize];
            if let Some(Symbol::Tok(t)) = self.c.production(cp.prod).fields[item.field as usize].get(item.dot as usize) {
                out.insert(*t);
            }
        }
        out
    }

    /// Trees whose start field spans the whole input.
    pub(crate) fn trees(&self, abs: &AbstractSyntax, len: usize) -> BTreeSet<Tree> {
        let mut out = BTreeSet::new();
        if !self.is_complete_input(len) {
            return out;
        }
        let mut memo: FxHashMap<CatId, Vec<Tree>> = FxHashMap::default();
        let mut visiting = FxHashSet::default();
        for &s in &abs.start_cats {
            for &cat in self.c.cats_of(s) {
                if let Some(&fresh) = self.fresh.get(&(cat, 0, 0, len as u32)) {
                    out.extend(self.extract(abs, fresh, &mut memo, &mut visiting));
                }
            }
        }
        out
    }

    fn extract(
        &self,
        abs: &AbstractSyntax,
        cat: CatId,
        memo: &mut FxHashMap<CatId, Vec<Tree>>,
        visiting: &mut FxHashSet<CatId>,
    ) -> Vec<Tree> {
        if cat < self.ncats {
            // an argument none of whose fields were parsed
            return Vec::new();
        }
        if let Some(t) = memo.get(&cat) {
            return t.clone();
        }
        if !visiting.insert(cat) {
            return Vec::new();
        }
        let mut out: Vec<Tree> = Vec::new();
        let mut seen = FxHashSet::default();
        for &cp in &self.fresh_prods[(cat - self.ncats) as usize] {
            let cp = &self.cps[cp as usize];
            let fun = &abs.funs[self.c.production(cp.prod).fun].name;
            let mut combos: Vec<Vec<Tree>> = vec![Vec::new()];
            for &a in &cp.args {
                let sub = self.extract(abs, a, memo, visiting);
                let mut next = Vec::new();
                for prefix in &combos {
                    for t in &sub {
                        if next.len() >= MAX_TREES {
                            break;
                        }
                        let mut p = prefix.clone();
                        p.push(t.clone());
                        next.push(p);
                    }
                }
                combos = next;
            }
            for args in combos {
                let t = Tree::app(fun, args);
                if out.len() < MAX_TREES && seen.insert(t.clone()) {
                    out.push(t);
                }
            }
        }
        visiting.remove(&cat);
        memo.insert(cat, out.clone());
        out
    }
}
