//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. The system under test is driven only through the
//! HTTP router and the `cnlwiki` binary; expected values come from oracles
//! in this file.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde_json::{json, Value};
use tower::ServiceExt;

use cnlwiki_core::ace::{shipped_grammar, tokenize};
use cnlwiki_core::eval::{enumerate_sentences, for_each_sentence};
use cnlwiki_core::semantics::{Axiom, Class, Role};
use cnlwiki_core::wiki::Wiki;

// ---------------------------------------------------------------------------
// Pinned values

/// The tree of the figure, whitespace-normalized.
const FIG2_TREE: &str = "if_thenS
  (vpS
    (termNP X_Var) (v2VP contain_V2 (termNP Y_Var)))
  (neg_vpS
    (termNP Y_Var) (v2VP contain_V2 (termNP X_Var)))";
const FIG2_ACE: &str = "if X contains Y then Y does not contain X";
const FIG2_GER: &str = "wenn X Y enthält , dann enthält Y X nicht";
const FIG2_SPA: &str = "si X contiene Y entonces Y no contiene X";
/// The figure's strings omit the sentence-final period the grammar requires.
const PERIOD: &str = ".";

const FIG2_GOLDEN_BUDGET: Duration = Duration::from_secs(1);
const FIG2_SEMANTICS_BUDGET: Duration = Duration::from_secs(5);

const ROUND_TRIP_DEPTH: usize = 4;
const ROUND_TRIP_MAX_FAILURES: usize = 0;

const AMBIGUITY_TOKENS: usize = 8;
const REQUIRED_HARMLESS_RATE: f64 = 1.0;
const TARGET_AMBIGUOUS: usize = 0;
const AMBIGUITY_PARSE_SAMPLE: usize = 200;

const COMPLETION_SAMPLES: usize = 200;
const COMPLETION_PREFIX_TOKENS: usize = 8;
/// Sentences up to this length decide the next-token sets of the sampled
/// prefixes: any viable prefix here can be closed within four tokens.
const COMPLETION_ORACLE_TOKENS: usize = COMPLETION_PREFIX_TOKENS + 4;
const SEED: u64 = 20_131;

const POOL_AXIOMS: usize = 4;
const POOL_DOMAIN: usize = 3;
const POOL_MAX_DISAGREEMENTS: usize = 0;

const LANGS: [&str; 3] = ["ace", "ger", "spa"];

// ---------------------------------------------------------------------------
// Drivers

struct Api {
    router: Router,
}

impl Api {
    fn new(wiki: Wiki) -> Api {
        Api { router: cnlwiki_service::router(Arc::new(wiki)) }
    }

    async fn call(&self, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
        let req = req.body(body.map_or_else(Body::empty, |b| Body::from(b.to_string()))).unwrap();
        let resp = self.router.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let v = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
        (status, v)
    }

    async fn get(&self, uri: &str) -> (StatusCode, Value) {
        self.call(Method::GET, uri, None).await
    }

    async fn post(&self, uri: &str, body: Value) -> (StatusCode, Value) {
        self.call(Method::POST, uri, Some(body)).await
    }

    async fn put(&self, uri: &str, body: Value) -> (StatusCode, Value) {
        self.call(Method::PUT, uri, Some(body)).await
    }
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_cnlwiki")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

fn with_period(s: &str) -> Vec<String> {
    let mut t = toks(s);
    t.push(PERIOD.into());
    t
}

fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").replace("( ", "(")
}

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

// ---------------------------------------------------------------------------
// Criteria

async fn fig2_golden() -> Outcome {
    let api = Api::new(Wiki::in_memory(false).map_err(|e| e.to_string())?);
    let start = Instant::now();
    let (st, v) = api.post("/parse", json!({ "lang": "ace", "tokens": with_period(FIG2_ACE) })).await;
    ensure!(st == StatusCode::OK, "parse: {st} {v}");
    let trees: Vec<String> = serde_json::from_value(v["trees"].clone()).unwrap();
    ensure!(trees.len() == 1, "expected one tree, got {trees:?}");
    ensure!(normalize(&trees[0]) == normalize(FIG2_TREE), "tree {} differs", trees[0]);
    for (lang, golden) in [("ace", FIG2_ACE), ("ger", FIG2_GER), ("spa", FIG2_SPA)] {
        let (st, v) = api.post("/linearize", json!({ "lang": lang, "tree": trees[0] })).await;
        ensure!(st == StatusCode::OK, "linearize {lang}: {st} {v}");
        let got: Vec<String> = serde_json::from_value(v["tokens"].clone()).unwrap();
        ensure!(got == with_period(golden), "{lang}: {got:?}");
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < FIG2_GOLDEN_BUDGET, "took {elapsed:?}");
    Ok(format!("one tree, ACE/German/Spanish token-exact, {elapsed:.0?}"))
}

/// Tiny oracle for the role clash: over domains of one or two elements,
/// the three axioms have no model while every two of them do.
fn border_clash_oracle() -> bool {
    let sat = |n: usize, g: usize, f: usize, rel: u8, which: [bool; 3]| {
        let holds = |x: usize, y: usize| rel >> (x * n + y) & 1 == 1;
        let asym = (0..n).all(|x| (0..n).all(|y| !(holds(x, y) && holds(y, x))));
        (!which[0] || holds(g, f)) && (!which[1] || holds(f, g)) && (!which[2] || asym)
    };
    let has_model = |which: [bool; 3]| {
        (1..=2usize).any(|n| {
            (0..n).any(|g| (0..n).any(|f| (0..1u8 << (n * n)).any(|rel| sat(n, g, f, rel, which))))
        })
    };
    !has_model([true; 3]) && [[true, true, false], [true, false, true], [false, true, true]].iter().all(|&w| has_model(w))
}

async fn fig2_semantics() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let api = Api::new(Wiki::open_with(dir.path(), false).map_err(|e| e.to_string())?);
    let start = Instant::now();
    let add = |s: &'static str| {
        let api = &api;
        async move { api.post("/entries", json!({ "article": "Relations", "lang": "ace", "tokens": tokenize("ace", s) })).await }
    };
    let (st, v) = add("if X contains Y then Y does not contain X.").await;
    ensure!(st == StatusCode::CREATED, "add: {st} {v}");
    ensure!(v["status"] == "included" && v["axiom"] == "Asymmetric(contain)", "status {v}");
    let mut ids = BTreeSet::new();
    for s in ["Germany borders France.", "France borders Germany.", "if X borders Y then Y does not border X."] {
        let (st, v) = add(s).await;
        ensure!(st == StatusCode::CREATED, "add {s}: {st} {v}");
        ids.insert(v["id"].as_str().unwrap().to_string());
    }
    ensure!(border_clash_oracle(), "oracle does not certify the clash");
    let (st, v) = api.get("/reasoner/taxonomy").await;
    ensure!(st == StatusCode::CONFLICT, "taxonomy: {st} {v}");
    let conflict: BTreeSet<String> = serde_json::from_value(v["conflict"].clone()).unwrap();
    ensure!(conflict == ids, "conflict {conflict:?}, expected {ids:?}");
    let elapsed = start.elapsed();
    ensure!(elapsed < FIG2_SEMANTICS_BUDGET, "took {elapsed:?}");
    Ok(format!("Asymmetric(contain); conflict {conflict:?} is exactly the three entries, {elapsed:.0?}"))
}

/// Number of well-typed trees of the start categories up to `depth`,
/// counted from the grammar sources: `count_d(c)` sums over functions into
/// `c` the product of `count_{d-1}` of their arguments; constants count at
/// every depth.
fn tree_count_oracle(abstract_src: &str, lexicon_src: &str, depth: usize) -> u64 {
    let mut funs: Vec<(Vec<String>, String)> = Vec::new();
    let body = abstract_src.split_once("fun").unwrap().1;
    for decl in body.split(';') {
        let Some((names, ty)) = decl.split_once(':') else { continue };
        let parts: Vec<String> = ty.split("->").map(|p| p.trim().to_string()).collect();
        let (res, args) = parts.split_last().unwrap();
        for _ in names.split(',') {
            funs.push((args.to_vec(), res.clone()));
        }
    }
    for line in lexicon_src.lines().filter(|l| l.contains('=') && !l.trim_start().starts_with("--")) {
        let name = line.split('=').next().unwrap().trim();
        funs.push((Vec::new(), name.rsplit_once('_').unwrap().1.to_string()));
    }
    let cats: BTreeSet<String> = funs.iter().flat_map(|(a, r)| a.iter().chain([r]).cloned()).collect();
    let mut count: BTreeMap<String, u64> = cats.iter().map(|c| (c.clone(), 0)).collect();
    for _ in 0..=depth {
        let prev = count.clone();
        for c in &cats {
            let n = funs
                .iter()
                .filter(|(_, r)| r == c)
                .map(|(args, _)| if args.is_empty() { 1 } else { args.iter().map(|a| prev[a]).product() })
                .sum();
            count.insert(c.clone(), n);
        }
    }
    count["S"] + count["Q"]
}

async fn round_trip() -> Outcome {
    let api = Api::new(Wiki::in_memory(false).map_err(|e| e.to_string())?);
    let (_, ace_src) = api.get("/articles/Ace").await;
    let (_, lex_src) = api.get("/articles/LexAce").await;
    let expected = tree_count_oracle(ace_src["source"].as_str().unwrap(), lex_src["source"].as_str().unwrap(), ROUND_TRIP_DEPTH);
    let depth = ROUND_TRIP_DEPTH.to_string();
    let (code, out) = cli(&["eval", "roundtrip", "--max-depth", &depth]);
    let reports: Vec<Value> = serde_json::from_str(&out).map_err(|e| format!("bad report: {e}"))?;
    ensure!(reports.len() == LANGS.len(), "{} reports", reports.len());
    let mut total = 0;
    for r in &reports {
        let failures = r["roundTripFailures"].as_array().unwrap().len();
        let checked = r["treesChecked"].as_u64().unwrap();
        ensure!(failures <= ROUND_TRIP_MAX_FAILURES, "{}: {failures} failures", r["language"]);
        ensure!(checked == expected, "{}: checked {checked} trees, oracle counts {expected}", r["language"]);
        total += checked;
    }
    ensure!(code == 0, "exit code {code}");
    Ok(format!("{total} tree/language pairs at depth {ROUND_TRIP_DEPTH}, 0 failures"))
}

async fn ace_unambiguity() -> Outcome {
    let n = AMBIGUITY_TOKENS.to_string();
    let (code, out) = cli(&["eval", "ambiguity", "--lang", "ace", "--max-tokens", &n]);
    let reports: Vec<Value> = serde_json::from_str(&out).map_err(|e| format!("bad report: {e}"))?;
    let r = &reports[0];
    let (sentences, ambiguous) = (r["sentences"].as_u64().unwrap(), r["ambiguous"].as_u64().unwrap() as usize);
    let harmless = r["harmlessRate"].as_f64().unwrap();
    ensure!(sentences > 0, "no sentences");
    ensure!(harmless == REQUIRED_HARMLESS_RATE, "harmless rate {harmless}");
    ensure!(code == 0, "exit code {code}");
    // spot-check the report through the parser
    let g = shipped_grammar();
    let mut all = enumerate_sentences(&g, "ace", AMBIGUITY_TOKENS).map_err(|e| e.to_string())?;
    ensure!(all.len() as u64 == sentences, "report counts {sentences}, enumeration {}", all.len());
    all.shuffle(&mut StdRng::seed_from_u64(SEED));
    let api = Api::new(Wiki::in_memory(false).map_err(|e| e.to_string())?);
    for s in all.iter().take(AMBIGUITY_PARSE_SAMPLE) {
        let (_, v) = api.post("/parse", json!({ "lang": "ace", "tokens": s })).await;
        let trees = v["trees"].as_array().unwrap().len();
        ensure!(ambiguous > 0 || trees == 1, "{s:?} has {trees} parses but the report says none is ambiguous");
    }
    let target = if ambiguous == TARGET_AMBIGUOUS { "met" } else { "missed" };
    Ok(format!("{sentences} sentences ≤{AMBIGUITY_TOKENS} tokens, {ambiguous} ambiguous (target {target}), harmless rate {harmless}"))
}

async fn completion() -> Outcome {
    let g = shipped_grammar();
    let api = Api::new(Wiki::in_memory(false).map_err(|e| e.to_string())?);
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut checked = 0;
    for lang in LANGS {
        let sentences = enumerate_sentences(&g, lang, COMPLETION_PREFIX_TOKENS).map_err(|e| e.to_string())?;
        let mut prefixes: Vec<Vec<String>> = Vec::with_capacity(COMPLETION_SAMPLES);
        for s in sentences.choose_multiple(&mut rng, COMPLETION_SAMPLES) {
            let k = rand::Rng::gen_range(&mut rng, 0..s.len());
            prefixes.push(s[..k].to_vec());
        }
        let mut oracle: BTreeMap<Vec<String>, BTreeSet<String>> =
            prefixes.iter().map(|p| (p.clone(), BTreeSet::new())).collect();
        let lens: BTreeSet<usize> = prefixes.iter().map(Vec::len).collect();
        for_each_sentence(&g, lang, COMPLETION_ORACLE_TOKENS, COMPLETION_ORACLE_TOKENS, |s| {
            for &k in lens.iter().filter(|&&k| k < s.len()) {
                let p: Vec<String> = s[..k].iter().map(|x| x.to_string()).collect();
                if let Some(next) = oracle.get_mut(&p) {
                    next.insert(s[k].to_string());
                }
            }
        })
        .map_err(|e| e.to_string())?;
        for p in &prefixes {
            let (st, v) = api.post("/complete", json!({ "lang": lang, "prefix": p })).await;
            ensure!(st == StatusCode::OK, "{st} {v}");
            let got: BTreeSet<String> = serde_json::from_value(v["tokens"].clone()).unwrap();
            ensure!(got == oracle[p], "{lang} {p:?}: server {got:?}, oracle {:?}", oracle[p]);
            checked += 1;
        }
    }
    Ok(format!("{checked} sampled prefixes ({COMPLETION_SAMPLES} per language) match the brute-force next-token sets"))
}

/// Test-side model over the pool signature: classes a, b; role r;
/// individuals i, j.
struct Small {
    n: usize,
    a: u8,
    b: u8,
    r: u16,
    i: usize,
    j: usize,
}

impl Small {
    fn rel(&self, role: &Role, x: usize, y: usize) -> bool {
        let (p, q) = if matches!(role, Role::Inverse(_)) { (y, x) } else { (x, y) };
        self.r >> (p * self.n + q) & 1 == 1
    }

    fn ind(&self, v: &str) -> usize {
        match v {
            "i" => self.i,
            "j" => self.j,
            _ => panic!("individual {v} outside the pool signature"),
        }
    }

    fn member(&self, c: &Class, x: usize) -> bool {
        match c {
            Class::Named(n) if n == "a" => self.a >> x & 1 == 1,
            Class::Named(n) if n == "b" => self.b >> x & 1 == 1,
            Class::Named(n) => panic!("class {n} outside the pool signature"),
            Class::Complement(d) => !self.member(d, x),
            Class::Intersection(d, e) => self.member(d, x) && self.member(e, x),
            Class::Exists(role, d) => (0..self.n).any(|y| self.rel(role, x, y) && self.member(d, y)),
            Class::HasValue(role, v) => self.rel(role, x, self.ind(v)),
        }
    }

    fn holds(&self, a: &Axiom) -> bool {
        let r = Role::Named("r".into());
        let d = || 0..self.n;
        match a {
            Axiom::SubClassOf(c, e) => d().all(|x| !self.member(c, x) || self.member(e, x)),
            Axiom::ClassAssertion(c, v) => self.member(c, self.ind(v)),
            Axiom::RoleAssertion(_, x, y) => self.rel(&r, self.ind(x), self.ind(y)),
            Axiom::NegRoleAssertion(_, x, y) => !self.rel(&r, self.ind(x), self.ind(y)),
            Axiom::Symmetric(_) => d().all(|x| d().all(|y| !self.rel(&r, x, y) || self.rel(&r, y, x))),
            Axiom::Asymmetric(_) => d().all(|x| d().all(|y| !(self.rel(&r, x, y) && self.rel(&r, y, x)))),
        }
    }
}

async fn reasoner_pool() -> Outcome {
    let max = POOL_AXIOMS.to_string();
    let (code, out) = cli(&["eval", "reasoner", "--max-axioms", &max]);
    ensure!(code == 0, "exit code {code}");
    let v: Value = serde_json::from_str(&out).map_err(|e| format!("bad output: {e}"))?;
    let basis: Vec<Axiom> = v["basis"].as_array().unwrap().iter().map(|a| a.as_str().unwrap().parse().unwrap()).collect();
    // every basis axiom is evaluated over {a, b} × {r} × {i, j}; `Small` panics otherwise
    let mut sat_sets = HashSet::new();
    for n in 1..=POOL_DOMAIN {
        for a in 0..1u8 << n {
            for b in 0..1u8 << n {
                for r in 0..1u16 << (n * n) {
                    for i in 0..n {
                        for j in 0..n {
                            let m = Small { n, a, b, r, i, j };
                            sat_sets.insert(basis.iter().enumerate().filter(|(_, x)| m.holds(x)).fold(0u64, |s, (k, _)| s | 1 << k));
                        }
                    }
                }
            }
        }
    }
    let verdicts = v["verdicts"].as_array().unwrap();
    let binom = |n: u64, k: u64| (0..k).fold(1u64, |acc, x| acc * (n - x) / (x + 1));
    let expected_size: u64 = (0..=POOL_AXIOMS as u64).map(|k| binom(basis.len() as u64, k)).sum();
    ensure!(verdicts.len() as u64 == expected_size, "pool has {} kbs, expected {expected_size}", verdicts.len());
    let (mut disagreements, mut decisive, mut undecided, mut unknown) = (0, 0, 0, 0);
    let mut first_bad = None;
    for p in verdicts {
        let idx: Vec<usize> = serde_json::from_value(p["axioms"].clone()).unwrap();
        let want = idx.iter().fold(0u64, |s, &k| s | 1 << k);
        let has_model = sat_sets.iter().any(|m| m & want == want);
        match (p["verdict"].as_str().unwrap(), has_model) {
            (_, true) if p["verdict"] == "consistent" => decisive += 1,
            ("unknown", _) => unknown += 1,
            ("inconsistent", true) => {
                disagreements += 1;
                first_bad.get_or_insert(idx);
            }
            ("inconsistent", false) => decisive += 1,
            // a model may need more than POOL_DOMAIN elements
            (_, false) => undecided += 1,
            _ => unreachable!(),
        }
    }
    ensure!(disagreements <= POOL_MAX_DISAGREEMENTS, "{disagreements} disagreements, first {first_bad:?}");
    Ok(format!(
        "{} kbs: {decisive} agree, {disagreements} disagree, {undecided} consistent without a model ≤{POOL_DOMAIN}, {unknown} unknown",
        verdicts.len()
    ))
}

fn store_bytes(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().display().to_string(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

async fn lexicon_atomicity() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let api = Api::new(Wiki::open_with(dir.path(), true).map_err(|e| e.to_string())?);
    let article_file = dir.path().join("articles").join("Geography.json");
    let before_file = std::fs::read(&article_file).map_err(|e| e.to_string())?;
    let (_, article) = api.get("/articles/Geography").await;
    let entries = article["entries"].as_array().unwrap().clone();
    // oracle: entries whose stored trees mention the function
    let mentions = |e: &Value| e["trees"].as_array().unwrap().iter().any(|t| t.as_str().unwrap().split([' ', '(', ')']).any(|w| w == "contain_V2"));
    let expected: BTreeSet<String> = entries.iter().filter(|e| mentions(e)).map(|e| e["id"].as_str().unwrap().to_string()).collect();
    ensure!(!expected.is_empty(), "demo has no entry using contain_V2");

    let mut sources = BTreeMap::new();
    for lang in LANGS {
        let (_, m) = api.get(&format!("/articles/Lex{}{}", lang[..1].to_uppercase(), &lang[1..])).await;
        sources.insert(lang, m["source"].as_str().unwrap().to_string());
    }
    let mut invalidated = BTreeSet::new();
    for lang in LANGS {
        let without: String = sources[lang].lines().filter(|l| !l.starts_with("contain_V2")).map(|l| format!("{l}\n")).collect();
        let (st, r) = api.put(&format!("/lexicon/{lang}"), json!({ "source": without })).await;
        ensure!(st == StatusCode::OK, "remove from {lang}: {st} {r}");
        for o in r["entries"].as_array().unwrap() {
            if o["outcome"] == "invalidated" {
                invalidated.insert(o["id"].as_str().unwrap().to_string());
            }
        }
    }
    ensure!(invalidated == expected, "invalidated {invalidated:?}, expected {expected:?}");
    let (_, after) = api.get("/articles/Geography").await;
    for e in after["entries"].as_array().unwrap() {
        let id = e["id"].as_str().unwrap();
        ensure!((e["status"] == "invalid") == expected.contains(id), "{id} has status {}", e["status"]);
    }

    for lang in LANGS.iter().rev() {
        let (st, r) = api.put(&format!("/lexicon/{lang}"), json!({ "source": sources[lang] })).await;
        ensure!(st == StatusCode::OK, "restore {lang}: {st} {r}");
    }
    let (_, restored) = api.get("/articles/Geography").await;
    for (old, new) in entries.iter().zip(restored["entries"].as_array().unwrap()) {
        ensure!(old["trees"] == new["trees"] && old["status"] == new["status"] && old.get("axiom") == new.get("axiom"), "{} not restored", old["id"]);
    }
    ensure!(std::fs::read(&article_file).unwrap() == before_file, "article file changed across remove/restore");

    let snapshot = store_bytes(dir.path());
    let broken = format!("{}country_N = mkN \"Land\" neuter\n", sources["ger"]);
    let (st, r) = api.put("/lexicon/ger", json!({ "source": broken })).await;
    ensure!(st == StatusCode::UNPROCESSABLE_ENTITY, "broken edit: {st} {r}");
    ensure!(r["grammar"]["outcome"] == "rejected" && !r["grammar"]["diagnostics"].as_array().unwrap().is_empty(), "{r}");
    ensure!(store_bytes(dir.path()) == snapshot, "store changed after a rejected edit");
    Ok(format!("{} entries invalidated and restored byte-identically; rejected edit left {} files untouched", expected.len(), snapshot.len()))
}

/// Proper name of `fun` in a lexicon page: the first quoted string.
fn lexicon_name(source: &str, fun: &str) -> Option<String> {
    let line = source.lines().find(|l| l.split('=').next().is_some_and(|n| n.trim() == fun))?;
    Some(line.split('"').nth(1)?.to_string())
}

async fn demo_query() -> Outcome {
    let api = Api::new(Wiki::in_memory(true).map_err(|e| e.to_string())?);
    let (_, ax) = api.get("/axioms").await;
    let kb: Vec<Axiom> = ax["axioms"].as_array().unwrap().iter().map(|a| a["axiom"].as_str().unwrap().parse().unwrap()).collect();
    // oracle: germany is an answer by two asserted facts; the explicit model
    // below satisfies the kb while france and john are no answers
    let asserted = kb.contains(&"ClassAssertion(country, germany)".parse().unwrap())
        && kb.contains(&"RoleAssertion(border, germany, france)".parse().unwrap());
    ensure!(asserted, "demo kb lacks the facts about Germany");
    let model = Model::countermodel();
    for a in &kb {
        ensure!(model.holds(a), "countermodel violates {a}");
    }
    for other in ["france", "john"] {
        ensure!(!model.answers(model.ind(other)), "countermodel does not separate {other}");
    }
    let expected_inds = ["germany"];

    let mut shown = Vec::new();
    for lang in LANGS {
        let (_, lex) = api.get(&format!("/articles/Lex{}{}", lang[..1].to_uppercase(), &lang[1..])).await;
        let expected_names: BTreeSet<String> = expected_inds
            .iter()
            .map(|i| lexicon_name(lex["source"].as_str().unwrap(), &format!("{i}_PN")).unwrap())
            .collect();
        let (_, q) = api.post("/parse", json!({ "lang": "ace", "tokens": toks("which country borders France ?") })).await;
        let tree = q["trees"][0].as_str().unwrap().to_string();
        let (_, lin) = api.post("/linearize", json!({ "lang": lang, "tree": tree })).await;
        let (st, v) = api.post("/reasoner/query", json!({ "lang": lang, "tokens": lin["tokens"] })).await;
        ensure!(st == StatusCode::OK, "{lang}: {st} {v}");
        let names: BTreeSet<String> = serde_json::from_value(v["names"].clone()).unwrap();
        ensure!(names == expected_names, "{lang}: {names:?}, expected {expected_names:?}");
        shown.push(format!("{lang} {names:?}"));
    }
    Ok(shown.join(", "))
}

/// Hand-built model of the demo knowledge base: germany 0, france 1,
/// john 2, and one lake 3.
struct Model {
    classes: BTreeMap<&'static str, Vec<usize>>,
    roles: BTreeMap<&'static str, Vec<(usize, usize)>>,
}

impl Model {
    fn countermodel() -> Model {
        Model {
            classes: BTreeMap::from([("country", vec![0, 1]), ("lake", vec![3]), ("person", vec![2])]),
            roles: BTreeMap::from([
                ("border", vec![(0, 1), (1, 0)]),
                ("contain", vec![(0, 3), (1, 3)]),
                ("like", vec![(2, 0)]),
            ]),
        }
    }

    fn ind(&self, name: &str) -> usize {
        ["germany", "france", "john"].iter().position(|n| *n == name).expect("demo individual")
    }

    fn rel(&self, r: &Role, x: usize, y: usize) -> bool {
        let pairs = self.roles.get(r.name()).map_or(&[][..], Vec::as_slice);
        match r {
            Role::Named(_) => pairs.contains(&(x, y)),
            Role::Inverse(_) => pairs.contains(&(y, x)),
        }
    }

    fn member(&self, c: &Class, x: usize) -> bool {
        match c {
            Class::Named(n) => self.classes.get(n.as_str()).is_some_and(|v| v.contains(&x)),
            Class::Complement(d) => !self.member(d, x),
            Class::Intersection(d, e) => self.member(d, x) && self.member(e, x),
            Class::Exists(r, d) => (0..4).any(|y| self.rel(r, x, y) && self.member(d, y)),
            Class::HasValue(r, v) => self.rel(r, x, self.ind(v)),
        }
    }

    fn holds(&self, a: &Axiom) -> bool {
        let named = |n: &str| Role::Named(n.to_string());
        match a {
            Axiom::SubClassOf(c, d) => (0..4).all(|x| !self.member(c, x) || self.member(d, x)),
            Axiom::ClassAssertion(c, v) => self.member(c, self.ind(v)),
            Axiom::RoleAssertion(r, x, y) => self.rel(&named(r), self.ind(x), self.ind(y)),
            Axiom::NegRoleAssertion(r, x, y) => !self.rel(&named(r), self.ind(x), self.ind(y)),
            Axiom::Symmetric(r) => (0..4).all(|x| (0..4).all(|y| !self.rel(&named(r), x, y) || self.rel(&named(r), y, x))),
            Axiom::Asymmetric(r) => (0..4).all(|x| (0..4).all(|y| !(self.rel(&named(r), x, y) && self.rel(&named(r), y, x)))),
        }
    }

    /// Membership in "country that borders France".
    fn answers(&self, x: usize) -> bool {
        self.member(&"Intersection(country, HasValue(border, france))".parse().unwrap(), x)
    }
}

// ---------------------------------------------------------------------------

fn main() {
    let rt = tokio::runtime::Runtime::new().unwrap();
    let criteria: Vec<(&str, std::pin::Pin<Box<dyn std::future::Future<Output = Outcome>>>)> = vec![
        ("fig2-golden-translations", Box::pin(fig2_golden())),
        ("fig2-semantics", Box::pin(fig2_semantics())),
        ("round-trip-depth-4", Box::pin(round_trip())),
        ("ace-unambiguity", Box::pin(ace_unambiguity())),
        ("completion-exactness", Box::pin(completion())),
        ("reasoner-oracle-agreement", Box::pin(reasoner_pool())),
        ("lexicon-edit-atomicity", Box::pin(lexicon_atomicity())),
        ("demo-query", Box::pin(demo_query())),
    ];
    let mut failed = 0;
    for (name, fut) in criteria {
        let start = Instant::now();
        let outcome = rt.block_on(fut);
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name} ({secs:.1}s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1}s): {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
