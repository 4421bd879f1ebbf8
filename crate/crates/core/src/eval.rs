//! Coverage, ambiguity and round-trip measurements over exhaustively
//! enumerated sentences and trees.

use std::collections::{BTreeMap, BTreeSet};

use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;
use thiserror::Error;

use crate::grammar::pmcfg::TokId;
use crate::grammar::{CatId, CompiledGrammar, Concrete, Production, Symbol, Tree};
use crate::reasoner::Reasoner;
use crate::semantics::{entry_semantics, query_semantics, Axiom, Class, EntrySemantics, Role};

/// Default upper bound on `max_tokens` for sentence enumeration.
pub const DEFAULT_TOKEN_CAP: usize = 10;
/// Upper bound on `max_depth` for round-trip checks.
pub const MAX_ROUNDTRIP_DEPTH: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unknown language `{0}`")]
    UnknownLanguage(String),
    #[error("max tokens {requested} exceeds the cap of {cap}")]
    TokenCap { requested: usize, cap: usize },
    #[error("max depth {requested} exceeds the cap of {cap}")]
    DepthCap { requested: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AmbiguousSentence {
    pub tokens: Vec<String>,
    pub trees: Vec<String>,
    pub harmless: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
#[serde(rename_all = "camelCase")]
pub struct EvalReport {
    pub language: String,
    /// Sentence count per token length.
    pub sentence_counts: BTreeMap<usize, usize>,
    pub sentences: usize,
    pub ambiguous: usize,
    pub ambiguity_rate: f64,
    /// Share of ambiguous sentences whose readings agree on one axiom;
    /// 1.0 when nothing is ambiguous.
    pub harmless_rate: f64,
    pub ambiguous_sentences: Vec<AmbiguousSentence>,
    pub trees_checked: usize,
    pub round_trip_failures: Vec<String>,
}

impl EvalReport {
    pub fn summary(&self) -> String {
        let mut s = format!("language {}\n", self.language);
        if !self.sentence_counts.is_empty() || self.trees_checked == 0 {
            for (len, n) in &self.sentence_counts {
                s += &format!("  {len:>2} tokens: {n}\n");
            }
            s += &format!("sentences: {}\n", self.sentences);
            s += &format!(
                "ambiguous: {} (rate {:.4}, harmless {:.4})\n",
                self.ambiguous, self.ambiguity_rate, self.harmless_rate
            );
        }
        if self.trees_checked > 0 {
            s += &format!("trees checked: {}\nround-trip failures: {}\n", self.trees_checked, self.round_trip_failures.len());
        }
        s
    }
}

type Field = Option<Box<[TokId]>>;
type Tuple = Box<[Field]>;

/// Length-bounded bottom-up derivation search over one concrete syntax.
/// Field values longer than the room a sentence could leave for them are
/// collapsed to `None`, which keeps the search finite.
struct Generator<'c> {
    c: &'c Concrete,
    /// Per concrete category and field: largest useful length, or -1.
    room: Vec<Vec<i64>>,
    /// Per concrete category and field: shortest yield.
    min_len: Vec<Vec<u64>>,
}

impl<'c> Generator<'c> {
    fn new(g: &CompiledGrammar, c: &'c Concrete, max_tokens: usize) -> Self {
        let ncat = c.cats.len();
        let fields = |cat: CatId| c.field_count(cat);
        // shortest yield of every field
        let mut min_len: Vec<Vec<u64>> = (0..ncat).map(|k| vec![u64::MAX; fields(k as CatId)]).collect();
        let seq_len = |seq: &[Symbol], args: &[CatId], min_len: &Vec<Vec<u64>>| -> u64 {
            seq.iter().fold(0u64, |acc, s| match *s {
                Symbol::Tok(_) => acc.saturating_add(1),
                Symbol::Arg { arg, field } => acc.saturating_add(min_len[args[arg as usize] as usize][field as usize]),
            })
        };
        let mut changed = true;
        while changed {
            changed = false;
            for p in &c.productions {
                for (f, seq) in p.fields.iter().enumerate() {
                    let l = seq_len(seq, &p.args, &min_len);
                    if l < min_len[p.result as usize][f] {
                        min_len[p.result as usize][f] = l;
                        changed = true;
                    }
                }
            }
        }
        // fewest tokens any sentence adds around a field
        let mut context: Vec<Vec<u64>> = (0..ncat).map(|k| vec![u64::MAX; fields(k as CatId)]).collect();
        let abs = g.abstract_syntax();
        for (k, cat) in c.cats.iter().enumerate() {
            if abs.is_start(cat.abs) {
                context[k][0] = 0;
            }
        }
        changed = true;
        while changed {
            changed = false;
            for p in &c.productions {
                for (f, seq) in p.fields.iter().enumerate() {
                    let outer = context[p.result as usize][f];
                    if outer == u64::MAX {
                        continue;
                    }
                    let total = seq_len(seq, &p.args, &min_len);
                    for s in seq {
                        if let Symbol::Arg { arg, field } = *s {
                            let a = p.args[arg as usize] as usize;
                            let own = min_len[a][field as usize];
                            let ctx = outer.saturating_add(total.saturating_sub(own));
                            if ctx < context[a][field as usize] {
                                context[a][field as usize] = ctx;
                                changed = true;
                            }
                        }
                    }
                }
            }
        }
        let room = context
            .iter()
            .map(|row| row.iter().map(|&x| if x == u64::MAX { -1 } else { max_tokens as i64 - x as i64 }).collect())
            .collect();
        Generator { c, room, min_len }
    }

    /// Field lengths of the result of `p` applied to arguments with the given
    /// field lengths; `None` marks a field that outgrew its room.
    fn result_lens(&self, p: &Production, args: &[&[Option<u32>]]) -> Option<Box<[Option<u32>]>> {
        let room = &self.room[p.result as usize];
        let mut any = false;
        let lens = p
            .fields
            .iter()
            .enumerate()
            .map(|(f, seq)| {
                if room[f] < 0 {
                    return None;
                }
                let mut n = 0u32;
                for s in seq {
                    n += match *s {
                        Symbol::Tok(_) => 1,
                        Symbol::Arg { arg, field } => args[arg as usize][field as usize]?,
                    };
                }
                let ok = n as i64 <= room[f];
                any |= ok;
                ok.then_some(n)
            })
            .collect();
        any.then_some(lens)
    }

    /// Whether some field could still fit once the first `chosen` arguments
    /// are fixed and the rest take their shortest yields.
    fn may_fit(&self, p: &Production, args: &[&[Option<u32>]], chosen: usize) -> bool {
        let room = &self.room[p.result as usize];
        p.fields.iter().enumerate().any(|(f, seq)| {
            if room[f] < 0 {
                return false;
            }
            let mut n = 0u64;
            for s in seq {
                match *s {
                    Symbol::Tok(_) => n += 1,
                    Symbol::Arg { arg, field } if (arg as usize) < chosen => match args[arg as usize][field as usize] {
                        Some(l) => n += l as u64,
                        None => return false,
                    },
                    Symbol::Arg { arg, field } => {
                        n = n.saturating_add(self.min_len[p.args[arg as usize] as usize][field as usize])
                    }
                }
            }
            n as i64 <= room[f]
        })
    }

    fn build(p: &Production, lens: &[Option<u32>], args: &[&Tuple]) -> Tuple {
        p.fields
            .iter()
            .zip(lens)
            .map(|(seq, len)| {
                len.map(|_| {
                    let mut out: Vec<TokId> = Vec::new();
                    for s in seq {
                        match *s {
                            Symbol::Tok(t) => out.push(t),
                            Symbol::Arg { arg, field } => {
                                out.extend_from_slice(args[arg as usize][field as usize].as_deref().expect("fits"))
                            }
                        }
                    }
                    out.into_boxed_slice()
                })
            })
            .collect()
    }

    /// All reachable field tuples per concrete category (semi-naive fixpoint
    /// over groups of tuples sharing their field lengths).
    fn run(&self) -> Vec<Vec<Tuple>> {
        let n = self.c.cats.len();
        let mut groups: Vec<Vec<Group>> = (0..n).map(|_| Vec::new()).collect();
        let mut by_lens: Vec<FxHashMap<Box<[Option<u32>]>, usize>> = vec![FxHashMap::default(); n];
        let mut seen: Vec<FxHashSet<Tuple>> = vec![FxHashSet::default(); n];
        let mut first = true;
        loop {
            let mut fresh: Vec<(CatId, Box<[Option<u32>]>, Tuple)> = Vec::new();
            for p in &self.c.productions {
                let k = p.args.len();
                if k == 0 {
                    if first {
                        if let Some(lens) = self.result_lens(p, &[]) {
                            fresh.push((p.result, lens.clone(), Self::build(p, &lens, &[])));
                        }
                    }
                    continue;
                }
                for pivot in 0..k {
                    let mut pick: Vec<(usize, usize, usize)> = Vec::with_capacity(k);
                    self.combine(p, pivot, &groups, &mut pick, &mut fresh);
                }
            }
            first = false;
            for gs in groups.iter_mut() {
                for g in gs.iter_mut() {
                    g.old = g.tuples.len();
                }
            }
            let mut grew = false;
            for (cat, lens, t) in fresh {
                let k = cat as usize;
                if !seen[k].insert(t.clone()) {
                    continue;
                }
                let gi = *by_lens[k].entry(lens.clone()).or_insert_with(|| {
                    groups[k].push(Group { lens, tuples: Vec::new(), old: 0 });
                    groups[k].len() - 1
                });
                groups[k][gi].tuples.push(t);
                grew = true;
            }
            if !grew {
                return groups.into_iter().map(|gs| gs.into_iter().flat_map(|g| g.tuples).collect()).collect();
            }
        }
    }

    /// Depth-first choice of one group per argument (as `(group, lo, hi)`);
    /// arguments before `pivot` take old tuples, the pivot new ones.
    fn combine(
        &self,
        p: &Production,
        pivot: usize,
        groups: &[Vec<Group>],
        pick: &mut Vec<(usize, usize, usize)>,
        fresh: &mut Vec<(CatId, Box<[Option<u32>]>, Tuple)>,
    ) {
        let i = pick.len();
        let k = p.args.len();
        if i == k {
            let arg_groups: Vec<&Group> = (0..k).map(|a| &groups[p.args[a] as usize][pick[a].0]).collect();
            let lens: Vec<&[Option<u32>]> = arg_groups.iter().map(|g| &*g.lens).collect();
            let Some(out) = self.result_lens(p, &lens) else { return };
            let mut idx: Vec<usize> = pick.iter().map(|x| x.1).collect();
            loop {
                let args: Vec<&Tuple> = (0..k).map(|a| &arg_groups[a].tuples[idx[a]]).collect();
                fresh.push((p.result, out.clone(), Self::build(p, &out, &args)));
                let mut a = k;
                let mut carried = true;
                while carried && a > 0 {
                    a -= 1;
                    idx[a] += 1;
                    carried = idx[a] == pick[a].2;
                    if carried {
                        idx[a] = pick[a].1;
                    }
                }
                if carried {
                    return;
                }
            }
        }
        for (gi, g) in groups[p.args[i] as usize].iter().enumerate() {
            let (lo, hi) = match i.cmp(&pivot) {
                std::cmp::Ordering::Less => (0, g.old),
                std::cmp::Ordering::Equal => (g.old, g.tuples.len()),
                std::cmp::Ordering::Greater => (0, g.tuples.len()),
            };
            if lo >= hi {
                continue;
            }
            pick.push((gi, lo, hi));
            let lens: Vec<&[Option<u32>]> =
                pick.iter().enumerate().map(|(a, x)| &*groups[p.args[a] as usize][x.0].lens).collect();
            if self.may_fit(p, &lens, i + 1) {
                self.combine(p, pivot, groups, pick, fresh);
            }
            pick.pop();
        }
    }
}

struct Group {
    lens: Box<[Option<u32>]>,
    tuples: Vec<Tuple>,
    /// Tuples before this index were known before the current round.
    old: usize,
}

/// Every sentence of `lang` with at most `max_tokens` tokens, sorted, each once.
pub fn enumerate_sentences(g: &CompiledGrammar, lang: &str, max_tokens: usize) -> Result<Vec<Vec<String>>, EvalError> {
    enumerate_sentences_with_cap(g, lang, max_tokens, DEFAULT_TOKEN_CAP)
}

pub fn enumerate_sentences_with_cap(
    g: &CompiledGrammar,
    lang: &str,
    max_tokens: usize,
    cap: usize,
) -> Result<Vec<Vec<String>>, EvalError> {
    let mut out: BTreeSet<Vec<String>> = BTreeSet::new();
    for_each_sentence(g, lang, max_tokens, cap, |s| {
        out.insert(s.iter().map(|x| x.to_string()).collect());
    })?;
    Ok(out.into_iter().collect())
}

/// Streams the sentences of `lang` with at most `max_tokens` tokens without
/// collecting them. A sentence with several derivations may be visited more
/// than once.
pub fn for_each_sentence(
    g: &CompiledGrammar,
    lang: &str,
    max_tokens: usize,
    cap: usize,
    mut visit: impl FnMut(&[&str]),
) -> Result<(), EvalError> {
    let c = g.concrete(lang).ok_or_else(|| EvalError::UnknownLanguage(lang.to_string()))?;
    if max_tokens > cap {
        return Err(EvalError::TokenCap { requested: max_tokens, cap });
    }
    if max_tokens == 0 {
        return Ok(());
    }
    let gen = Generator::new(g, c, max_tokens);
    let tuples = gen.run();
    let abs = g.abstract_syntax();
    let mut buf: Vec<&str> = Vec::with_capacity(max_tokens);
    for (k, cat) in c.cats.iter().enumerate() {
        if !abs.is_start(cat.abs) {
            continue;
        }
        for t in &tuples[k] {
            if let Some(toks) = &t[0] {
                if !toks.is_empty() && toks.len() <= max_tokens {
                    buf.clear();
                    buf.extend(toks.iter().map(|&x| c.token(x)));
                    visit(&buf);
                }
            }
        }
    }
    Ok(())
}

fn counts(sentences: &[Vec<String>]) -> BTreeMap<usize, usize> {
    let mut m = BTreeMap::new();
    for s in sentences {
        *m.entry(s.len()).or_insert(0) += 1;
    }
    m
}

/// Sentence counts per length.
pub fn coverage_report(g: &CompiledGrammar, lang: &str, max_tokens: usize) -> Result<EvalReport, EvalError> {
    let sentences = enumerate_sentences(g, lang, max_tokens)?;
    Ok(EvalReport {
        language: lang.to_string(),
        sentence_counts: counts(&sentences),
        sentences: sentences.len(),
        harmless_rate: 1.0,
        ..EvalReport::default()
    })
}

/// Whether all readings of an ambiguous sentence mean the same.
fn harmless(trees: &[Tree]) -> bool {
    match entry_semantics(trees) {
        EntrySemantics::Axiom(_) => true,
        EntrySemantics::Excluded => false,
        EntrySemantics::Unsupported(_) => matches!(query_semantics(trees), Ok(Some(_))),
    }
}

/// Parses every enumerated sentence and measures how many have several trees.
pub fn ambiguity_report(g: &CompiledGrammar, lang: &str, max_tokens: usize) -> Result<EvalReport, EvalError> {
    let sentences = enumerate_sentences(g, lang, max_tokens)?;
    let mut ambiguous = Vec::new();
    for s in &sentences {
        let trees: Vec<Tree> = g.parse(lang, s).into_iter().collect();
        if trees.len() > 1 {
            ambiguous.push(AmbiguousSentence {
                tokens: s.clone(),
                trees: trees.iter().map(Tree::to_string).collect(),
                harmless: harmless(&trees),
            });
        }
    }
    let n = sentences.len();
    let a = ambiguous.len();
    Ok(EvalReport {
        language: lang.to_string(),
        sentence_counts: counts(&sentences),
        sentences: n,
        ambiguous: a,
        ambiguity_rate: if n == 0 { 0.0 } else { a as f64 / n as f64 },
        harmless_rate: if a == 0 { 1.0 } else { ambiguous.iter().filter(|x| x.harmless).count() as f64 / a as f64 },
        ambiguous_sentences: ambiguous,
        ..EvalReport::default()
    })
}

/// Checks `t ∈ parse(linearize(t))` for every start-category tree up to `max_depth`.
pub fn roundtrip_check(g: &CompiledGrammar, lang: &str, max_depth: usize) -> Result<EvalReport, EvalError> {
    if !g.has_language(lang) {
        return Err(EvalError::UnknownLanguage(lang.to_string()));
    }
    if max_depth > MAX_ROUNDTRIP_DEPTH {
        return Err(EvalError::DepthCap { requested: max_depth, cap: MAX_ROUNDTRIP_DEPTH });
    }
    let abs = g.abstract_syntax();
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let check = |t: &Tree| match g.linearize(lang, t) {
        Ok(s) => g.parse(lang, &s).contains(t),
        Err(_) => false,
    };
    let mut checked = 0usize;
    let mut failures = Vec::new();
    let mut batch: Vec<Tree> = Vec::new();
    let flush = |batch: &mut Vec<Tree>, failures: &mut Vec<String>| {
        let chunk = batch.len().div_ceil(threads).max(1);
        let found: Vec<Vec<String>> = std::thread::scope(|s| {
            let handles: Vec<_> = batch
                .chunks(chunk)
                .map(|part| s.spawn(move || part.iter().filter(|t| !check(t)).map(Tree::to_string).collect::<Vec<_>>()))
                .collect();
            handles.into_iter().map(|h| h.join().expect("round-trip worker")).collect()
        });
        failures.extend(found.into_iter().flatten());
        batch.clear();
    };
    for (ci, _) in abs.cats.iter().enumerate() {
        if !abs.is_start(ci) {
            continue;
        }
        abs.for_each_tree(ci, max_depth, |t| {
            checked += 1;
            batch.push(t.clone());
            if batch.len() >= 8192 {
                flush(&mut batch, &mut failures);
            }
        });
    }
    flush(&mut batch, &mut failures);
    failures.sort();
    Ok(EvalReport {
        language: lang.to_string(),
        harmless_rate: 1.0,
        trees_checked: checked,
        round_trip_failures: failures,
        ..EvalReport::default()
    })
}

/// Basic axioms over classes `a`, `b`, role `r` and individuals `i`, `j`,
/// from which the reasoner test pool draws its knowledge bases.
pub fn pool_basis() -> Vec<Axiom> {
    let a = || Class::named("a");
    let b = || Class::named("b");
    let r = || Role::Named("r".into());
    let ri = || Role::Inverse("r".into());
    let s = |x: &str| x.to_string();
    vec![
        Axiom::ClassAssertion(a(), s("i")),
        Axiom::ClassAssertion(b(), s("j")),
        Axiom::ClassAssertion(Class::not(a()), s("j")),
        Axiom::ClassAssertion(Class::not(b()), s("i")),
        Axiom::ClassAssertion(Class::exists(r(), b()), s("i")),
        Axiom::ClassAssertion(Class::exists(ri(), a()), s("j")),
        Axiom::ClassAssertion(Class::not(Class::exists(r(), a())), s("i")),
        Axiom::ClassAssertion(Class::HasValue(r(), s("i")), s("j")),
        Axiom::ClassAssertion(Class::not(Class::HasValue(ri(), s("j"))), s("i")),
        Axiom::SubClassOf(a(), b()),
        Axiom::SubClassOf(b(), Class::not(a())),
        Axiom::SubClassOf(a(), Class::exists(r(), a())),
        Axiom::SubClassOf(b(), Class::exists(ri(), b())),
        Axiom::SubClassOf(Class::exists(r(), b()), a()),
        Axiom::SubClassOf(Class::exists(ri(), a()), Class::not(b())),
        Axiom::SubClassOf(a(), Class::exists(r(), Class::and(b(), Class::not(a())))),
        Axiom::SubClassOf(Class::and(a(), b()), Class::exists(r(), Class::not(b()))),
        Axiom::SubClassOf(a(), Class::HasValue(r(), s("j"))),
        Axiom::SubClassOf(Class::HasValue(ri(), s("i")), b()),
        Axiom::SubClassOf(b(), Class::not(Class::exists(r(), b()))),
        Axiom::RoleAssertion(s("r"), s("i"), s("j")),
        Axiom::RoleAssertion(s("r"), s("j"), s("i")),
        Axiom::RoleAssertion(s("r"), s("i"), s("i")),
        Axiom::NegRoleAssertion(s("r"), s("i"), s("j")),
        Axiom::NegRoleAssertion(s("r"), s("j"), s("j")),
        Axiom::Asymmetric(s("r")),
        Axiom::Symmetric(s("r")),
    ]
}

/// Index sets of all knowledge bases of at most `max_axioms` basis axioms.
pub fn pool_cases(basis_len: usize, max_axioms: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_axioms {
        let mut next = Vec::new();
        for c in &frontier {
            let start = c.last().map_or(0, |&l: &usize| l + 1);
            for i in start..basis_len {
                let mut d = c.clone();
                d.push(i);
                next.push(d);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PoolVerdict {
    pub axioms: Vec<usize>,
    /// `consistent`, `inconsistent` or `unknown`.
    pub verdict: &'static str,
}

/// Tableau verdicts over the whole pool.
pub fn reasoner_pool(reasoner: &Reasoner, max_axioms: usize) -> (Vec<Axiom>, Vec<PoolVerdict>) {
    let basis = pool_basis();
    let verdicts = pool_cases(basis.len(), max_axioms)
        .into_iter()
        .map(|idx| {
            let kb: Vec<Axiom> = idx.iter().map(|&i| basis[i].clone()).collect();
            let verdict = match reasoner.satisfiable(&kb) {
                Ok(true) => "consistent",
                Ok(false) => "inconsistent",
                Err(_) => "unknown",
            };
            PoolVerdict { axioms: idx, verdict }
        })
        .collect();
    (basis, verdicts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ace::shipped_grammar;

    #[test]
    fn zero_tokens_is_empty() {
        let g = shipped_grammar();
        assert!(enumerate_sentences(&g, "ace", 0).unwrap().is_empty());
        assert!(matches!(enumerate_sentences(&g, "ace", 11), Err(EvalError::TokenCap { .. })));
        assert!(matches!(roundtrip_check(&g, "ace", 6), Err(EvalError::DepthCap { .. })));
    }

    #[test]
    fn short_sentences() {
        let g = shipped_grammar();
        let s = enumerate_sentences(&g, "ace", 4).unwrap();
        let text: Vec<String> = s.iter().map(|x| x.join(" ")).collect();
        assert!(text.contains(&"Germany borders France .".to_string()));
        assert!(text.contains(&"who likes John ?".to_string()));
        assert!(s.iter().all(|x| x.len() <= 4));
    }

    #[test]
    fn pool_size() {
        // C(27,0)+C(27,1)+C(27,2)
        assert_eq!(pool_cases(27, 2).len(), 1 + 27 + 351);
    }
}
