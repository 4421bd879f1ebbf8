//! Grammar compilation: type-directed evaluation of linearization rules into
//! PMCFG productions, one per combination of argument parameter values and
//! per variant choice.

use std::collections::{BTreeMap, BTreeSet};

use rustc_hash::{FxHashMap, FxHashSet};

use super::abstract_syntax::{AbstractSyntax, CatIdx, FunIdx, Function};
use super::pmcfg::{CatId, Concrete, ConcreteCat, Production, Symbol, TokId};
use super::source::{
    parse_module, AbstractModule, CaseArm, ConcreteModule, Expr, LexArg, LexiconModule, Module, Pattern,
    TypeExpr,
};
use super::CompiledGrammar;
use crate::error::{Diagnostic, GrammarError, MorphologyError};

/// Upper bound on variant alternatives produced by a single rule application.
const MAX_ALTERNATIVES: usize = 4096;

/// An untyped inflection value built by a paradigm operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LexValue {
    Str(String),
    Param(String),
    Record(Vec<(String, LexValue)>),
    Table(Vec<(String, LexValue)>),
}

impl LexValue {
    pub fn field(&self, name: &str) -> Option<&LexValue> {
        match self {
            LexValue::Record(fs) => fs.iter().find(|(n, _)| n == name).map(|(_, v)| v),
            _ => None,
        }
    }

    pub fn cell(&self, con: &str) -> Option<&LexValue> {
        match self {
            LexValue::Table(cs) => cs.iter().find(|(n, _)| n == con).map(|(_, v)| v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            LexValue::Str(s) => Some(s),
            _ => None,
        }
    }
}

/// Paradigm operators available to lexicon pages.
pub trait Morphology {
    fn apply(&self, lang: &str, op: &str, args: &[LexArg]) -> Result<LexValue, MorphologyError>;
}

/// Rejects every paradigm; grammars compiled with it can only use `lin` rules.
pub struct NoMorphology;

impl Morphology for NoMorphology {
    fn apply(&self, _lang: &str, op: &str, _args: &[LexArg]) -> Result<LexValue, MorphologyError> {
        Err(MorphologyError::UnknownOperator(op.to_string()))
    }
}

/// Compiles named module sources into a grammar.
pub fn compile_sources(
    sources: &[(String, String)],
    morphology: &dyn Morphology,
) -> Result<CompiledGrammar, GrammarError> {
    let mut modules = Vec::new();
    let mut diagnostics = Vec::new();
    for (name, text) in sources {
        match parse_module(name, text) {
            Ok(m) => modules.push(m),
            Err(e) => diagnostics.extend(e.diagnostics),
        }
    }
    if !diagnostics.is_empty() {
        return Err(GrammarError { diagnostics });
    }
    compile_modules(&modules, morphology)
}

pub fn compile_modules(modules: &[Module], morphology: &dyn Morphology) -> Result<CompiledGrammar, GrammarError> {
    let mut diags = Vec::new();
    let abstracts: Vec<&AbstractModule> = modules
        .iter()
        .filter_map(|m| if let Module::Abstract(a) = m { Some(a) } else { None })
        .collect();
    let abs_mod = match abstracts.as_slice() {
        [a] => *a,
        [] => return Err(GrammarError::single("grammar", 0, "no abstract module")),
        [_, b, ..] => return Err(GrammarError::single(&b.name, 1, "more than one abstract module")),
    };
    let mut abs = build_abstract(abs_mod, &mut diags);

    let mut concretes: BTreeMap<String, &ConcreteModule> = BTreeMap::new();
    for m in modules {
        if let Module::Concrete(c) = m {
            if c.of != abs_mod.name {
                diags.push(Diagnostic::new(&c.name, 1, format!("concrete syntax of unknown abstract `{}`", c.of)));
                continue;
            }
            let lang = language_tag(&c.name, &abs_mod.name);
            if concretes.insert(lang.clone(), c).is_some() {
                diags.push(Diagnostic::new(&c.name, 1, format!("second concrete syntax for language `{lang}`")));
            }
        }
    }
    let mut lexicons: BTreeMap<String, Vec<&LexiconModule>> = BTreeMap::new();
    for m in modules {
        if let Module::Lexicon(l) = m {
            let lang = language_tag(&l.name, "Lex");
            if !concretes.contains_key(&lang) {
                diags.push(Diagnostic::new(&l.name, 1, format!("lexicon for unknown language `{lang}`")));
                continue;
            }
            lexicons.entry(lang).or_default().push(l);
        }
    }

    // Lexicon identifiers become lexical functions of the abstract syntax.
    let mut lexical: BTreeMap<String, CatIdx> = BTreeMap::new();
    for lex in lexicons.values().flatten() {
        let mut seen = FxHashSet::default();
        for e in &lex.entries {
            if !seen.insert(e.id.as_str()) {
                diags.push(Diagnostic::new(&lex.name, e.line, format!("duplicate lexicon entry `{}`", e.id)));
                continue;
            }
            let Some(cat) = e.id.rsplit_once('_').and_then(|(_, suffix)| abs.cat(suffix)) else {
                diags.push(Diagnostic::new(
                    &lex.name,
                    e.line,
                    format!("identifier `{}` does not end in a category suffix", e.id),
                ));
                continue;
            };
            if abs.fun(&e.id).is_some() {
                diags.push(Diagnostic::new(&lex.name, e.line, format!("`{}` is already an abstract function", e.id)));
                continue;
            }
            match lexical.get(&e.id) {
                Some(&c) if c != cat => unreachable!("category derives from the identifier"),
                _ => {
                    lexical.insert(e.id.clone(), cat);
                }
            }
        }
    }
    for (name, cat) in &lexical {
        abs.add_fun(Function { name: name.clone(), args: vec![], result: *cat, lexical: true });
    }
    if !diags.is_empty() {
        return Err(GrammarError { diagnostics: diags });
    }

    let mut compiled = BTreeMap::new();
    let mut warnings = Vec::new();
    for (lang, cm) in &concretes {
        let lexs = lexicons.get(lang).map(Vec::as_slice).unwrap_or(&[]);
        match compile_concrete(&abs, lang, cm, lexs, morphology, &mut warnings) {
            Ok(c) => {
                compiled.insert(lang.clone(), c);
            }
            Err(mut d) => diags.append(&mut d),
        }
    }
    if !diags.is_empty() {
        return Err(GrammarError { diagnostics: diags });
    }
    Ok(CompiledGrammar::from_parts(abs, compiled, warnings))
}

/// `AceGer` of `Ace` is language `ger`; `LexGer` is the lexicon for `ger`.
pub fn language_tag(module: &str, prefix: &str) -> String {
    module.strip_prefix(prefix).filter(|s| !s.is_empty()).unwrap_or(module).to_lowercase()
}

fn build_abstract(m: &AbstractModule, diags: &mut Vec<Diagnostic>) -> AbstractSyntax {
    let mut abs = AbstractSyntax::new(&m.name);
    for (c, line) in &m.cats {
        if !abs.add_cat(c) {
            diags.push(Diagnostic::new(&m.name, *line, format!("duplicate category `{c}`")));
        }
    }
    for f in &m.funs {
        let mut ok = true;
        let mut args = Vec::new();
        for a in &f.args {
            match abs.cat(a) {
                Some(i) => args.push(i),
                None => {
                    diags.push(Diagnostic::new(&m.name, f.line, format!("unknown category `{a}` in `{}`", f.name)));
                    ok = false;
                }
            }
        }
        let result = abs.cat(&f.result);
        if result.is_none() {
            diags.push(Diagnostic::new(&m.name, f.line, format!("unknown category `{}` in `{}`", f.result, f.name)));
        }
        if let (true, Some(result)) = (ok, result) {
            if args.len() > u8::MAX as usize {
                diags.push(Diagnostic::new(&m.name, f.line, "too many arguments"));
            } else if !abs.add_fun(Function { name: f.name.clone(), args, result, lexical: false }) {
                diags.push(Diagnostic::new(&m.name, f.line, format!("duplicate function `{}`", f.name)));
            }
        }
    }
    for (c, line) in &m.start_cats {
        match abs.cat(c) {
            Some(i) => abs.start_cats.push(i),
            None => diags.push(Diagnostic::new(&m.name, *line, format!("unknown start category `{c}`"))),
        }
    }
    if m.start_cats.is_empty() {
        diags.push(Diagnostic::new(&m.name, 1, "missing `flags startcat`"));
    }
    abs
}

// ---------------------------------------------------------------------------
// Types and values

#[derive(Debug, Clone)]
struct ParamType {
    name: String,
    values: Vec<String>,
}

#[derive(Debug, Default)]
struct Params {
    types: Vec<ParamType>,
    by_name: FxHashMap<String, usize>,
    constructors: FxHashMap<String, (usize, u16)>,
}

#[derive(Debug, Clone, PartialEq)]
enum Ty {
    Str,
    Param(usize),
    Record(Vec<(String, Ty)>),
    Table(usize, Box<Ty>),
}

#[derive(Debug, Clone, PartialEq)]
enum Sym {
    Tok(String),
    Arg(u8, u16),
}

#[derive(Debug, Clone, PartialEq)]
enum Val {
    Str(Vec<Sym>),
    Param(usize, u16),
    Record(Vec<(String, Val)>),
    Table(usize, Vec<Val>),
}

struct Lincat {
    ty: Ty,
    fields: Vec<String>,
}

impl Params {
    fn resolve(&self, t: &TypeExpr, under_table: bool) -> Result<Ty, String> {
        match t {
            TypeExpr::Str => Ok(Ty::Str),
            TypeExpr::Param(p) => {
                if under_table {
                    return Err(format!("parameter `{p}` stored inside a table is not supported"));
                }
                self.by_name.get(p).map(|&i| Ty::Param(i)).ok_or_else(|| format!("unknown parameter type `{p}`"))
            }
            TypeExpr::Record(fields) => {
                let mut out: Vec<(String, Ty)> = Vec::new();
                for (n, ft) in fields {
                    if out.iter().any(|(m, _)| m == n) {
                        return Err(format!("duplicate field `{n}`"));
                    }
                    out.push((n.clone(), self.resolve(ft, under_table)?));
                }
                Ok(Ty::Record(out))
            }
            TypeExpr::Table(arg, res) => {
                let TypeExpr::Param(p) = arg.as_ref() else {
                    return Err("table argument must be a parameter type".into());
                };
                let pi = *self.by_name.get(p).ok_or_else(|| format!("unknown parameter type `{p}`"))?;
                Ok(Ty::Table(pi, Box::new(self.resolve(res, true)?)))
            }
        }
    }

    fn describe(&self, ty: &Ty) -> String {
        match ty {
            Ty::Str => "Str".into(),
            Ty::Param(p) => self.types[*p].name.clone(),
            Ty::Record(fs) => {
                let inner: Vec<String> = fs.iter().map(|(n, t)| format!("{n} : {}", self.describe(t))).collect();
                format!("{{{}}}", inner.join(" ; "))
            }
            Ty::Table(p, r) => format!("{} => {}", self.types[*p].name, self.describe(r)),
        }
    }
}

fn field_paths(params: &Params, ty: &Ty, prefix: &str, out: &mut Vec<String>) {
    let join = |s: &str| if prefix.is_empty() { s.to_string() } else { format!("{prefix}.{s}") };
    match ty {
        Ty::Str => out.push(if prefix.is_empty() { "s".into() } else { prefix.to_string() }),
        Ty::Param(_) => {}
        Ty::Record(fs) => {
            for (n, t) in fs {
                field_paths(params, t, &join(n), out);
            }
        }
        Ty::Table(p, r) => {
            for v in &params.types[*p].values {
                field_paths(params, r, &join(v), out);
            }
        }
    }
}

fn param_paths(ty: &Ty, prefix: &str, out: &mut Vec<(String, usize)>) {
    match ty {
        Ty::Param(p) => out.push((prefix.to_string(), *p)),
        Ty::Record(fs) => {
            for (n, t) in fs {
                let path = if prefix.is_empty() { n.clone() } else { format!("{prefix}.{n}") };
                param_paths(t, &path, out);
            }
        }
        _ => {}
    }
}

/// Builds the symbolic value of argument `arg`: string leaves refer to the
/// argument's fields, parameter leaves take the concrete category's values.
fn arg_value(params: &Params, ty: &Ty, arg: u8, next_field: &mut u16, inherent: &mut std::slice::Iter<'_, u16>) -> Val {
    match ty {
        Ty::Str => {
            let v = Val::Str(vec![Sym::Arg(arg, *next_field)]);
            *next_field += 1;
            v
        }
        Ty::Param(p) => Val::Param(*p, *inherent.next().expect("parameter value per inherent field")),
        Ty::Record(fs) => Val::Record(
            fs.iter().map(|(n, t)| (n.clone(), arg_value(params, t, arg, next_field, inherent))).collect(),
        ),
        // cells are laid out in parameter order, matching field_paths
        Ty::Table(p, r) => Val::Table(
            *p,
            (0..params.types[*p].values.len()).map(|_| arg_value(params, r, arg, next_field, inherent)).collect(),
        ),
    }
}

fn check_type(params: &Params, v: &Val, ty: &Ty) -> Result<(), String> {
    match (v, ty) {
        (Val::Str(_), Ty::Str) => Ok(()),
        (Val::Param(p, _), Ty::Param(q)) if p == q => Ok(()),
        (Val::Record(vs), Ty::Record(ts)) => {
            for (n, t) in ts {
                let fv = vs.iter().find(|(m, _)| m == n).ok_or_else(|| format!("missing field `{n}`"))?;
                check_type(params, &fv.1, t).map_err(|e| format!("in field `{n}`: {e}"))?;
            }
            if let Some((extra, _)) = vs.iter().find(|(m, _)| !ts.iter().any(|(n, _)| n == m)) {
                return Err(format!("unexpected field `{extra}`"));
            }
            Ok(())
        }
        (Val::Table(p, cells), Ty::Table(q, r)) if p == q => cells.iter().try_for_each(|c| check_type(params, c, r)),
        _ => Err(format!("expected {}, found {}", params.describe(ty), describe_val(params, v))),
    }
}

fn describe_val(params: &Params, v: &Val) -> String {
    match v {
        Val::Str(_) => "a string".into(),
        Val::Param(p, i) => format!("parameter {}", params.types[*p].values[*i as usize]),
        Val::Record(_) => "a record".into(),
        Val::Table(p, _) => format!("a table over {}", params.types[*p].name),
    }
}

/// Flattens a checked value into (string fields, inherent parameter values).
fn flatten(v: &Val, ty: &Ty, fields: &mut Vec<Vec<Sym>>, inherent: &mut Vec<u16>) {
    match (v, ty) {
        (Val::Str(s), Ty::Str) => fields.push(s.clone()),
        (Val::Param(_, i), Ty::Param(_)) => inherent.push(*i),
        (Val::Record(vs), Ty::Record(ts)) => {
            for (n, t) in ts {
                let fv = &vs.iter().find(|(m, _)| m == n).expect("checked").1;
                flatten(fv, t, fields, inherent);
            }
        }
        (Val::Table(_, cells), Ty::Table(_, r)) => {
            for c in cells {
                flatten(c, r, fields, inherent);
            }
        }
        _ => unreachable!("value was type-checked"),
    }
}

// ---------------------------------------------------------------------------
// Evaluation

struct Env<'a> {
    params: &'a Params,
    arg_names: &'a [String],
    args: &'a [Val],
    bound: Vec<(String, Val)>,
}

fn product(choices: Vec<Vec<Val>>) -> Result<Vec<Vec<Val>>, String> {
    let mut out: Vec<Vec<Val>> = vec![Vec::new()];
    for alts in choices {
        if out.len() * alts.len() > MAX_ALTERNATIVES {
            return Err("too many variant combinations".into());
        }
        let mut next = Vec::with_capacity(out.len() * alts.len());
        for prefix in &out {
            for a in &alts {
                let mut p = prefix.clone();
                p.push(a.clone());
                next.push(p);
            }
        }
        out = next;
    }
    Ok(out)
}

impl Env<'_> {
    fn lookup(&self, name: &str) -> Result<Val, String> {
        if let Some((_, v)) = self.bound.iter().rev().find(|(n, _)| n == name) {
            return Ok(v.clone());
        }
        if let Some(i) = self.arg_names.iter().position(|n| n == name) {
            return Ok(self.args[i].clone());
        }
        if let Some(&(p, i)) = self.params.constructors.get(name) {
            return Ok(Val::Param(p, i));
        }
        Err(format!("unknown identifier `{name}`"))
    }

    fn eval(&mut self, e: &Expr, expected: Option<&Ty>) -> Result<Vec<Val>, String> {
        match e {
            Expr::Lit(s) => Ok(vec![Val::Str(s.split_whitespace().map(|t| Sym::Tok(t.to_string())).collect())]),
            Expr::Empty => Ok(vec![Val::Str(Vec::new())]),
            Expr::Ident(n) => Ok(vec![self.lookup(n)?]),
            Expr::Proj(inner, field) => {
                let vals = self.eval(inner, None)?;
                vals.into_iter()
                    .map(|v| match v {
                        Val::Record(fs) => fs
                            .into_iter()
                            .find(|(n, _)| n == field)
                            .map(|(_, v)| v)
                            .ok_or_else(|| format!("record has no field `{field}`")),
                        other => Err(format!("projection `.{field}` on {}", describe_val(self.params, &other))),
                    })
                    .collect()
            }
            Expr::Select(table, index) => {
                let tables = self.eval(table, None)?;
                let indices = self.eval(index, None)?;
                let mut out = Vec::new();
                for t in &tables {
                    for i in &indices {
                        match (t, i) {
                            (Val::Table(p, cells), Val::Param(q, k)) if p == q => out.push(cells[*k as usize].clone()),
                            (Val::Table(p, _), other) => {
                                return Err(format!(
                                    "table over {} selected with {}",
                                    self.params.types[*p].name,
                                    describe_val(self.params, other)
                                ))
                            }
                            (other, _) => return Err(format!("selection `!` on {}", describe_val(self.params, other))),
                        }
                    }
                }
                Ok(out)
            }
            Expr::Concat(a, b) => {
                let left = self.eval(a, Some(&Ty::Str))?;
                let right = self.eval(b, Some(&Ty::Str))?;
                let mut out = Vec::new();
                for l in &left {
                    for r in &right {
                        match (l, r) {
                            (Val::Str(x), Val::Str(y)) => {
                                let mut s = x.clone();
                                s.extend(y.iter().cloned());
                                out.push(Val::Str(s));
                            }
                            (Val::Str(_), other) | (other, _) => {
                                return Err(format!("`++` applied to {}", describe_val(self.params, other)))
                            }
                        }
                    }
                }
                if out.len() > MAX_ALTERNATIVES {
                    return Err("too many variant combinations".into());
                }
                Ok(out)
            }
            Expr::Record(fields) => {
                let mut names = Vec::new();
                let mut choices = Vec::new();
                match expected {
                    Some(Ty::Record(tys)) => {
                        for (n, t) in tys {
                            let Some((_, fe)) = fields.iter().find(|(m, _)| m == n) else {
                                return Err(format!("missing field `{n}`"));
                            };
                            names.push(n.clone());
                            choices.push(self.eval(fe, Some(t))?);
                        }
                        if let Some((extra, _)) = fields.iter().find(|(m, _)| !tys.iter().any(|(n, _)| n == m)) {
                            return Err(format!("unexpected field `{extra}`"));
                        }
                    }
                    Some(other) => {
                        return Err(format!("record where {} was expected", self.params.describe(other)));
                    }
                    None => {
                        for (n, fe) in fields {
                            names.push(n.clone());
                            choices.push(self.eval(fe, None)?);
                        }
                    }
                }
                Ok(product(choices)?
                    .into_iter()
                    .map(|vals| Val::Record(names.iter().cloned().zip(vals).collect()))
                    .collect())
            }
            Expr::Lambda(vars, body) => {
                let Some((first, rest)) = vars.split_first() else {
                    return Err("empty table abstraction".into());
                };
                let Some(Ty::Table(p, inner)) = expected else {
                    return Err(format!("cannot infer the parameter type of `\\\\{first}`"));
                };
                let nested;
                let body_expr: &Expr = if rest.is_empty() {
                    body
                } else {
                    nested = Expr::Lambda(rest.to_vec(), body.clone());
                    &nested
                };
                let n = self.params.types[*p].values.len();
                let mut choices = Vec::with_capacity(n);
                for k in 0..n {
                    self.bound.push((first.clone(), Val::Param(*p, k as u16)));
                    let r = self.eval(body_expr, Some(inner));
                    self.bound.pop();
                    choices.push(r?);
                }
                Ok(product(choices)?.into_iter().map(|cells| Val::Table(*p, cells)).collect())
            }
            Expr::Table(arms) => {
                let (p, inner) = match expected {
                    Some(Ty::Table(p, inner)) => (*p, Some(inner.as_ref())),
                    Some(other) => return Err(format!("table where {} was expected", self.params.describe(other))),
                    None => (self.arms_param(arms)?, None),
                };
                self.check_arms(arms, p)?;
                let n = self.params.types[p].values.len();
                let mut choices = Vec::with_capacity(n);
                for k in 0..n {
                    let arm = self.select_arm(arms, p, k as u16)?;
                    choices.push(self.eval(&arm.body, inner)?);
                }
                Ok(product(choices)?.into_iter().map(|cells| Val::Table(p, cells)).collect())
            }
            Expr::Case(scrutinee, arms) => {
                let vals = self.eval(scrutinee, None)?;
                let mut out = Vec::new();
                for v in vals {
                    let Val::Param(p, k) = v else {
                        return Err(format!("case analysis on {}", describe_val(self.params, &v)));
                    };
                    self.check_arms(arms, p)?;
                    let arm = self.select_arm(arms, p, k)?;
                    out.extend(self.eval(&arm.body, expected)?);
                }
                Ok(out)
            }
            Expr::Variants(alts) => {
                let mut out = Vec::new();
                for a in alts {
                    out.extend(self.eval(a, expected)?);
                }
                Ok(out)
            }
        }
    }

    fn arms_param(&self, arms: &[CaseArm]) -> Result<usize, String> {
        arms.iter()
            .flat_map(|a| &a.patterns)
            .find_map(|p| match p {
                Pattern::Con(c) => self.params.constructors.get(c).map(|&(t, _)| t),
                Pattern::Wild => None,
            })
            .ok_or_else(|| "cannot infer the parameter type of a table".to_string())
    }

    /// Patterns must belong to the scrutinee's type and cover all of its values.
    fn check_arms(&self, arms: &[CaseArm], p: usize) -> Result<(), String> {
        for pat in arms.iter().flat_map(|a| &a.patterns) {
            if let Pattern::Con(c) = pat {
                match self.params.constructors.get(c) {
                    Some(&(t, _)) if t == p => {}
                    Some(_) => return Err(format!("`{c}` is not a value of {}", self.params.types[p].name)),
                    None => return Err(format!("unknown parameter value `{c}`")),
                }
            }
        }
        let ty = &self.params.types[p];
        for (k, v) in ty.values.iter().enumerate() {
            if self.select_arm(arms, p, k as u16).is_err() {
                return Err(format!("non-exhaustive table: no branch for `{v}` of {}", ty.name));
            }
        }
        Ok(())
    }

    fn select_arm<'e>(&self, arms: &'e [CaseArm], p: usize, k: u16) -> Result<&'e CaseArm, String> {
        let name = &self.params.types[p].values[k as usize];
        arms.iter()
            .find(|a| a.patterns.iter().any(|pat| matches!(pat, Pattern::Wild) || matches!(pat, Pattern::Con(c) if c == name)))
            .ok_or_else(|| format!("non-exhaustive table: no branch for `{name}`"))
    }
}

fn lex_to_val(params: &Params, v: &LexValue, ty: &Ty) -> Result<Val, String> {
    match (v, ty) {
        (LexValue::Str(s), Ty::Str) => {
            if s.trim().is_empty() {
                return Err("empty word form".into());
            }
            Ok(Val::Str(s.split_whitespace().map(|t| Sym::Tok(t.to_string())).collect()))
        }
        (LexValue::Param(c), Ty::Param(p)) => match params.constructors.get(c) {
            Some(&(q, i)) if q == *p => Ok(Val::Param(q, i)),
            _ => Err(format!("`{c}` is not a value of {}", params.types[*p].name)),
        },
        (LexValue::Record(fs), Ty::Record(ts)) => {
            let mut out = Vec::new();
            for (n, t) in ts {
                let (_, fv) = fs.iter().find(|(m, _)| m == n).ok_or_else(|| format!("paradigm lacks field `{n}`"))?;
                out.push((n.clone(), lex_to_val(params, fv, t)?));
            }
            Ok(Val::Record(out))
        }
        (LexValue::Table(cells), Ty::Table(p, r)) => {
            let mut out = Vec::new();
            for name in &params.types[*p].values {
                let (_, cv) = cells
                    .iter()
                    .find(|(m, _)| m == name)
                    .ok_or_else(|| format!("paradigm lacks form for `{name}`"))?;
                out.push(lex_to_val(params, cv, r)?);
            }
            Ok(Val::Table(*p, out))
        }
        _ => Err(format!("paradigm result does not match lincat {}", params.describe(ty))),
    }
}

// ---------------------------------------------------------------------------
// Concrete syntax compilation

enum Rule<'a> {
    Lin { args: &'a [String], body: &'a Expr, module: &'a str, line: usize },
    Lexical { value: Val },
}

fn compile_concrete(
    abs: &AbstractSyntax,
    lang: &str,
    cm: &ConcreteModule,
    lexicons: &[&LexiconModule],
    morphology: &dyn Morphology,
    warnings: &mut Vec<Diagnostic>,
) -> Result<Concrete, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let here = |line: usize, msg: String| Diagnostic::new(&cm.name, line, msg);

    let mut params = Params::default();
    for p in &cm.params {
        if params.by_name.contains_key(&p.name) {
            diags.push(here(p.line, format!("duplicate parameter type `{}`", p.name)));
            continue;
        }
        let idx = params.types.len();
        for (k, v) in p.values.iter().enumerate() {
            if params.constructors.insert(v.clone(), (idx, k as u16)).is_some() {
                diags.push(here(p.line, format!("parameter value `{v}` declared twice")));
            }
        }
        params.by_name.insert(p.name.clone(), idx);
        params.types.push(ParamType { name: p.name.clone(), values: p.values.clone() });
    }

    let mut lincats: Vec<Option<Lincat>> = (0..abs.cats.len()).map(|_| None).collect();
    for lc in &cm.lincats {
        let Some(ci) = abs.cat(&lc.cat) else {
            diags.push(here(lc.line, format!("lincat for unknown category `{}`", lc.cat)));
            continue;
        };
        if lincats[ci].is_some() {
            diags.push(here(lc.line, format!("duplicate lincat for `{}`", lc.cat)));
            continue;
        }
        match params.resolve(&lc.ty, false) {
            Ok(ty) => {
                let mut fields = Vec::new();
                field_paths(&params, &ty, "", &mut fields);
                if fields.is_empty() {
                    diags.push(here(lc.line, format!("lincat for `{}` has no string fields", lc.cat)));
                } else if fields.len() > 64 {
                    diags.push(here(lc.line, format!("lincat for `{}` has more than 64 string fields", lc.cat)));
                }
                lincats[ci] = Some(Lincat { ty, fields });
            }
            Err(e) => diags.push(here(lc.line, e)),
        }
    }
    for (ci, lc) in lincats.iter().enumerate() {
        if lc.is_none() {
            diags.push(here(1, format!("missing lincat for {}", abs.cats[ci])));
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    let lincats: Vec<Lincat> = lincats.into_iter().map(Option::unwrap).collect();

    let mut rules: Vec<Option<Rule>> = (0..abs.funs.len()).map(|_| None).collect();
    for lin in &cm.lins {
        let Some(fi) = abs.fun(&lin.fun) else {
            diags.push(here(lin.line, format!("lin for unknown function `{}`", lin.fun)));
            continue;
        };
        if rules[fi].is_some() {
            diags.push(here(lin.line, format!("duplicate lin for `{}`", lin.fun)));
            continue;
        }
        let arity = abs.funs[fi].args.len();
        if lin.args.len() != arity {
            diags.push(here(lin.line, format!("lin for `{}` binds {} arguments, function has {arity}", lin.fun, lin.args.len())));
            continue;
        }
        rules[fi] = Some(Rule::Lin { args: &lin.args, body: &lin.body, module: &cm.name, line: lin.line });
    }
    for lex in lexicons {
        for e in &lex.entries {
            let fi = abs.fun(&e.id).expect("lexicon ids were added to the abstract syntax");
            if rules[fi].is_some() {
                diags.push(Diagnostic::new(&lex.name, e.line, format!("`{}` is defined twice", e.id)));
                continue;
            }
            let lincat = &lincats[abs.funs[fi].result];
            let value = morphology
                .apply(lang, &e.op, &e.args)
                .map_err(|err| err.to_string())
                .and_then(|lv| lex_to_val(&params, &lv, &lincat.ty));
            match value {
                Ok(value) => rules[fi] = Some(Rule::Lexical { value }),
                Err(msg) => diags.push(Diagnostic::new(&lex.name, e.line, format!("`{}`: {msg}", e.id))),
            }
        }
    }
    let mut untranslated = Vec::new();
    for (fi, f) in abs.funs.iter().enumerate() {
        if rules[fi].is_none() {
            if f.lexical {
                untranslated.push(f.name.clone());
                warnings.push(Diagnostic::new(&cm.name, 0, format!("no `{lang}` lexicon entry for `{}`", f.name)));
            } else {
                diags.push(here(1, format!("missing lin for {}", f.name)));
            }
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }

    // Bottom-up closure over concrete categories.
    let mut cats: Vec<ConcreteCat> = Vec::new();
    let mut cat_keys: FxHashMap<(CatIdx, Vec<u16>), CatId> = FxHashMap::default();
    let mut by_abs: Vec<Vec<CatId>> = vec![Vec::new(); abs.cats.len()];
    let mut productions: Vec<Production> = Vec::new();
    let mut prod_seen: FxHashSet<Production> = FxHashSet::default();
    let mut tokens: Vec<String> = Vec::new();
    let mut token_index: FxHashMap<String, TokId> = FxHashMap::default();
    let mut done: FxHashSet<(FunIdx, Vec<CatId>)> = FxHashSet::default();
    let mut cat_params: Vec<Vec<u16>> = Vec::new();
    let param_path_lists: Vec<Vec<(String, usize)>> = lincats
        .iter()
        .map(|l| {
            let mut out = Vec::new();
            param_paths(&l.ty, "", &mut out);
            out
        })
        .collect();

    loop {
        let mut changed = false;
        for (fi, f) in abs.funs.iter().enumerate() {
            let Some(rule) = &rules[fi] else { continue };
            let pools: Vec<Vec<CatId>> = f.args.iter().map(|&a| by_abs[a].clone()).collect();
            if pools.iter().any(Vec::is_empty) {
                continue;
            }
            let mut combos: Vec<Vec<CatId>> = vec![Vec::new()];
            for pool in &pools {
                combos = combos
                    .into_iter()
                    .flat_map(|c| pool.iter().map(move |&x| {
                        let mut c = c.clone();
                        c.push(x);
                        c
                    }))
                    .collect();
            }
            for combo in combos {
                if !done.insert((fi, combo.clone())) {
                    continue;
                }
                let result_ty = &lincats[f.result].ty;
                let alternatives = match rule {
                    Rule::Lexical { value } => Ok(vec![value.clone()]),
                    Rule::Lin { args, body, .. } => {
                        let arg_vals: Vec<Val> = combo
                            .iter()
                            .enumerate()
                            .map(|(i, &c)| {
                                let mut next = 0u16;
                                let ps = &cat_params[c as usize];
                                arg_value(&params, &lincats[f.args[i]].ty, i as u8, &mut next, &mut ps.iter())
                            })
                            .collect();
                        let mut env = Env { params: &params, arg_names: args, args: &arg_vals, bound: Vec::new() };
                        env.eval(body, Some(result_ty)).and_then(|vals| {
                            vals.iter().try_for_each(|v| check_type(&params, v, result_ty))?;
                            Ok(vals)
                        })
                    }
                };
                let alternatives = match alternatives {
                    Ok(a) => a,
                    Err(msg) => {
                        let (module, line) = match rule {
                            Rule::Lin { module, line, .. } => (*module, *line),
                            Rule::Lexical { .. } => (cm.name.as_str(), 0),
                        };
                        let ctx: Vec<String> = combo.iter().map(|&c| describe_cat(abs, &cats[c as usize])).collect();
                        let msg = if ctx.is_empty() {
                            format!("in lin {}: {msg}", f.name)
                        } else {
                            format!("in lin {} (arguments {}): {msg}", f.name, ctx.join(", "))
                        };
                        return Err(vec![Diagnostic::new(module, line, msg)]);
                    }
                };
                for alt in alternatives {
                    let mut fields = Vec::new();
                    let mut inherent = Vec::new();
                    flatten(&alt, result_ty, &mut fields, &mut inherent);
                    let key = (f.result, inherent.clone());
                    let result = match cat_keys.get(&key) {
                        Some(&c) => c,
                        None => {
                            let id = cats.len() as CatId;
                            let paths = &param_path_lists[f.result];
                            cats.push(ConcreteCat {
                                abs: f.result,
                                params: paths
                                    .iter()
                                    .zip(&inherent)
                                    .map(|((path, p), &v)| (path.clone(), params.types[*p].values[v as usize].clone()))
                                    .collect(),
                            });
                            cat_params.push(inherent);
                            cat_keys.insert(key, id);
                            by_abs[f.result].push(id);
                            changed = true;
                            id
                        }
                    };
                    let fields = fields
                        .into_iter()
                        .map(|seq| {
                            seq.into_iter()
                                .map(|s| match s {
                                    Sym::Arg(a, fld) => Symbol::Arg { arg: a, field: fld },
                                    Sym::Tok(t) => {
                                        let next = tokens.len() as TokId;
                                        let id = *token_index.entry(t.clone()).or_insert(next);
                                        if id == next {
                                            tokens.push(t);
                                        }
                                        Symbol::Tok(id)
                                    }
                                })
                                .collect()
                        })
                        .collect();
                    let prod = Production { result, fun: fi, args: combo.clone(), fields };
                    if prod_seen.insert(prod.clone()) {
                        productions.push(prod);
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut concrete = Concrete {
        lang: lang.to_string(),
        name: cm.name.clone(),
        cats,
        productions,
        field_names: lincats.iter().map(|l| l.fields.clone()).collect(),
        tokens,
        token_index,
        prods_by_cat: Vec::new(),
        prods_by_fun: Vec::new(),
        cats_by_abs: Vec::new(),
        untranslated,
    };
    concrete.index(abs.cats.len(), abs.funs.len());

    for (fi, f) in abs.funs.iter().enumerate() {
        if !f.lexical && concrete.productions_of_fun(fi).is_empty() {
            warnings.push(Diagnostic::new(&cm.name, 0, format!("`{}` has no productions in `{lang}`", f.name)));
        }
    }
    let line_of = |fi: FunIdx| match &rules[fi] {
        Some(Rule::Lin { line, .. }) => *line,
        _ => 0,
    };
    let arg_name = |fi: FunIdx, d: usize| match &rules[fi] {
        Some(Rule::Lin { args, .. }) => args[d].clone(),
        _ => d.to_string(),
    };
    let erased = erased_arguments(abs, &concrete);
    if !erased.is_empty() {
        return Err(erased
            .into_iter()
            .map(|(fi, d, fields)| {
                here(
                    line_of(fi),
                    format!(
                        "argument `{}` of `{}` is not realized when only fields [{}] are used",
                        arg_name(fi, d),
                        abs.funs[fi].name,
                        fields.join(", ")
                    ),
                )
            })
            .collect());
    }
    Ok(concrete)
}

fn describe_cat(abs: &AbstractSyntax, c: &ConcreteCat) -> String {
    if c.params.is_empty() {
        abs.cats[c.abs].clone()
    } else {
        let ps: Vec<String> = c.params.iter().map(|(_, v)| v.clone()).collect();
        format!("{}[{}]", abs.cats[c.abs], ps.join(","))
    }
}

/// Finds arguments that no used field refers to. Starting from field 0 of the
/// start categories, propagates the sets of fields parsed together per category.
fn erased_arguments(abs: &AbstractSyntax, c: &Concrete) -> BTreeSet<(FunIdx, usize, Vec<String>)> {
    let mut seen: FxHashSet<(CatId, u64)> = FxHashSet::default();
    let mut work: Vec<(CatId, u64)> = Vec::new();
    for &s in &abs.start_cats {
        for &cat in c.cats_of(s) {
            if seen.insert((cat, 1)) {
                work.push((cat, 1));
            }
        }
    }
    let mut out = BTreeSet::new();
    while let Some((cat, mask)) = work.pop() {
        for &pid in c.productions_of_cat(cat) {
            let p = c.production(pid);
            let mut arg_masks = vec![0u64; p.args.len()];
            for (fi, seq) in p.fields.iter().enumerate() {
                if mask & (1 << fi) == 0 {
                    continue;
                }
                for s in seq {
                    if let Symbol::Arg { arg, field } = s {
                        arg_masks[*arg as usize] |= 1 << field;
                    }
                }
            }
            for (d, &m) in arg_masks.iter().enumerate() {
                if m == 0 {
                    let names = &c.field_names[abs.funs[p.fun].result];
                    let used = (0..names.len()).filter(|i| mask & (1 << i) != 0).map(|i| names[i].clone()).collect();
                    out.insert((p.fun, d, used));
                } else if seen.insert((p.args[d], m)) {
                    work.push((p.args[d], m));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const ABS: &str = "abstract T {
        flags startcat = S ;
        cat S ; NP ; N ;
        fun pred : NP -> N -> S ;
            every : N -> NP ;
            dog, cat_N : N ;
    }";

    fn compile(conc: &str) -> Result<CompiledGrammar, GrammarError> {
        compile_sources(&[("T".into(), ABS.into()), ("TEng".into(), conc.into())], &NoMorphology)
    }

    const ENG: &str = r#"concrete TEng of T {
        param Num = Sg | Pl ; Gen = Masc | Fem ;
        lincat S = {s : Str} ; NP = {s : Str ; g : Gen} ; N = {s : Num => Str ; g : Gen} ;
        lin pred np n = {s = np.s ++ "is" ++ case np.g of {Masc => "a" ; Fem => "an"} ++ n.s ! Sg} ;
            every n = {s = "every" ++ n.s ! Sg ; g = n.g} ;
            dog = {s = table {Sg => "dog" ; Pl => "dogs"} ; g = Masc} ;
            cat_N = {s = \\n => ("cat" | "kitty") ; g = Fem} ;
    }"#;

    #[test]
    fn expands_parameters_and_variants() {
        let g = compile(ENG).unwrap();
        let c = g.concrete("eng").unwrap();
        let abs = g.abstract_syntax();
        // N splits by gender: one category each
        assert_eq!(c.cats_of(abs.cat("N").unwrap()).len(), 2);
        // cat_N: 2 variants per cell, cells vary independently: 4 productions
        assert_eq!(c.production_count(abs.fun("cat_N").unwrap()), 4);
        // every: one production per N category
        assert_eq!(c.production_count(abs.fun("every").unwrap()), 2);
        assert_eq!(c.field_count(c.cats_of(abs.cat("N").unwrap())[0]), 2);
        assert_eq!(c.field_names[abs.cat("N").unwrap()], vec!["s.Sg", "s.Pl"]);
    }

    #[test]
    fn missing_lin_is_reported() {
        let conc = ENG.replace("every n = {s = \"every\" ++ n.s ! Sg ; g = n.g} ;", "");
        let err = compile(&conc).unwrap_err();
        assert!(err.mentions("missing lin for every"), "{err}");
    }

    #[test]
    fn non_exhaustive_table_is_reported_with_line() {
        let conc = ENG.replace("table {Sg => \"dog\" ; Pl => \"dogs\"}", "table {Sg => \"dog\"}");
        let err = compile(&conc).unwrap_err();
        assert!(err.mentions("non-exhaustive"), "{err}");
        assert_eq!(err.diagnostics[0].line, 6);
    }

    #[test]
    fn type_mismatch_is_reported() {
        let conc = ENG.replace("g = Masc}", "g = Sg}");
        let err = compile(&conc).unwrap_err();
        assert!(err.mentions("expected Gen"), "{err}");
    }

    #[test]
    fn unknown_identifiers_and_functions() {
        let conc = ENG.replace("n.s ! Sg ; g = n.g}", "m.s ! Sg ; g = n.g}");
        assert!(compile(&conc).unwrap_err().mentions("unknown identifier `m`"));
        let conc = ENG.replace("dog = {", "horse = {");
        assert!(compile(&conc).unwrap_err().mentions("unknown function `horse`"));
    }

    #[test]
    fn erased_argument_is_rejected() {
        let conc = ENG.replace("np.s ++ \"is\"", "\"it\" ++ \"is\"");
        let err = compile(&conc).unwrap_err();
        assert!(err.mentions("argument `np` of `pred` is not realized"), "{err}");
    }

    #[test]
    fn unknown_category_in_abstract() {
        let err = compile_sources(&[("T".into(), "abstract T { flags startcat = S ; cat S ; fun f : X -> S ; }".into())], &NoMorphology)
            .unwrap_err();
        assert!(err.mentions("unknown category `X`"));
    }
}
