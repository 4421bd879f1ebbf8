//! Mapping between trees of the shipped fragment and description-logic axioms.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::grammar::{AbstractSyntax, Tree};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Named(String),
    Inverse(String),
}

impl Role {
    pub fn name(&self) -> &str {
        match self {
            Role::Named(r) | Role::Inverse(r) => r,
        }
    }

    pub fn inverse(&self) -> Role {
        match self {
            Role::Named(r) => Role::Inverse(r.clone()),
            Role::Inverse(r) => Role::Named(r.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    Named(String),
    Complement(Box<Class>),
    Intersection(Box<Class>, Box<Class>),
    Exists(Role, Box<Class>),
    HasValue(Role, String),
}

impl Class {
    pub fn named(n: &str) -> Class {
        Class::Named(n.to_string())
    }

    pub fn not(c: Class) -> Class {
        Class::Complement(Box::new(c))
    }

    pub fn and(a: Class, b: Class) -> Class {
        Class::Intersection(Box::new(a), Box::new(b))
    }

    pub fn exists(r: Role, c: Class) -> Class {
        Class::Exists(r, Box::new(c))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axiom {
    SubClassOf(Class, Class),
    ClassAssertion(Class, String),
    RoleAssertion(String, String, String),
    NegRoleAssertion(String, String, String),
    Asymmetric(String),
    Symmetric(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("not verbalizable: {0}")]
    NotVerbalizable(String),
}

/// Semantic reading of an entry's tree set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EntrySemantics {
    Axiom(Axiom),
    /// Trees disagree on their axiom.
    Excluded,
    Unsupported(String),
}

/// Entity name of a lexical function: the identifier minus its category
/// suffix, lowercased (`germany_PN` → `germany`).
pub fn entity_name(fun: &str) -> String {
    fun.rsplit_once('_').map_or(fun, |(stem, _)| stem).to_lowercase()
}

fn unsupported(t: &Tree, why: &str) -> SemanticsError {
    SemanticsError::Unsupported(format!("{why}: {t}"))
}

fn is_var(np: &Tree) -> Option<&str> {
    (np.fun == "termNP" && np.args.len() == 1).then(|| np.args[0].fun.as_str())
}

/// Class denoted by a common noun.
fn cn_class(t: &Tree) -> Result<Class, SemanticsError> {
    match (t.fun.as_str(), t.args.as_slice()) {
        ("useN", [n]) => Ok(Class::Named(entity_name(&n.fun))),
        ("relCN", [cn, rel]) => {
            let vp = match (rel.fun.as_str(), rel.args.as_slice()) {
                ("thatVP_Rel", [vp]) => vp,
                _ => return Err(unsupported(rel, "unknown relative clause")),
            };
            Ok(Class::and(cn_class(cn)?, vp_class(vp)?))
        }
        _ => Err(unsupported(t, "unknown common noun")),
    }
}

fn object_class(role: Role, np: &Tree) -> Result<Class, SemanticsError> {
    match (np.fun.as_str(), np.args.as_slice()) {
        ("pnNP", [pn]) => Ok(Class::HasValue(role, entity_name(&pn.fun))),
        ("aNP", [cn]) => Ok(Class::exists(role, cn_class(cn)?)),
        ("everyNP" | "noNP", _) => Err(unsupported(np, "quantified noun phrase in object position")),
        ("termNP", _) => Err(unsupported(np, "variable outside a conditional pattern")),
        _ => Err(unsupported(np, "unknown noun phrase")),
    }
}

/// Class denoted by a verb phrase.
fn vp_class(t: &Tree) -> Result<Class, SemanticsError> {
    match (t.fun.as_str(), t.args.as_slice()) {
        ("isaVP", [cn]) => cn_class(cn),
        ("v2VP", [v, np]) => object_class(Role::Named(entity_name(&v.fun)), np),
        ("v2_byVP", [v, np]) => object_class(Role::Inverse(entity_name(&v.fun)), np),
        _ => Err(unsupported(t, "unknown verb phrase")),
    }
}

/// `X r Y` with distinct variables: (r, subject variable, object variable).
fn var_clause(s: &Tree) -> Option<(bool, &str, &str, &str)> {
    let positive = match s.fun.as_str() {
        "vpS" => true,
        "neg_vpS" => false,
        _ => return None,
    };
    let (np, vp) = (s.args.first()?, s.args.get(1)?);
    let subj = is_var(np)?;
    if vp.fun != "v2VP" || vp.args.len() != 2 {
        return None;
    }
    let obj = is_var(&vp.args[1])?;
    (subj != obj).then_some((positive, vp.args[0].fun.as_str(), subj, obj))
}

/// Axiom expressed by a declarative tree.
pub fn tree_to_axiom(t: &Tree) -> Result<Axiom, SemanticsError> {
    match (t.fun.as_str(), t.args.as_slice()) {
        ("if_thenS", [a, b]) => {
            let (Some((true, r1, x1, y1)), Some((pos2, r2, x2, y2))) = (var_clause(a), var_clause(b)) else {
                return Err(unsupported(t, "conditional outside the property patterns"));
            };
            if r1 != r2 || x1 != y2 || y1 != x2 {
                return Err(unsupported(t, "conditional outside the property patterns"));
            }
            let r = entity_name(r1);
            Ok(if pos2 { Axiom::Symmetric(r) } else { Axiom::Asymmetric(r) })
        }
        (f @ ("vpS" | "neg_vpS"), [np, vp]) => {
            let positive = f == "vpS";
            match (np.fun.as_str(), np.args.as_slice()) {
                ("everyNP", [cn]) => {
                    let c = cn_class(cn)?;
                    let d = vp_class(vp)?;
                    Ok(Axiom::SubClassOf(c, if positive { d } else { Class::not(d) }))
                }
                ("noNP", [cn]) => {
                    if !positive {
                        return Err(unsupported(t, "negated sentence with a negative subject"));
                    }
                    Ok(Axiom::SubClassOf(cn_class(cn)?, Class::not(vp_class(vp)?)))
                }
                ("pnNP", [pn]) => {
                    let p = entity_name(&pn.fun);
                    if let ("v2VP", [v, obj]) = (vp.fun.as_str(), vp.args.as_slice()) {
                        if let ("pnNP", [q]) = (obj.fun.as_str(), obj.args.as_slice()) {
                            let (r, q) = (entity_name(&v.fun), entity_name(&q.fun));
                            return Ok(if positive {
                                Axiom::RoleAssertion(r, p, q)
                            } else {
                                Axiom::NegRoleAssertion(r, p, q)
                            });
                        }
                    }
                    let c = vp_class(vp)?;
                    Ok(Axiom::ClassAssertion(if positive { c } else { Class::not(c) }, p))
                }
                ("aNP", _) => Err(unsupported(t, "indefinite subject")),
                ("termNP", _) => Err(unsupported(t, "variable outside a conditional pattern")),
                _ => Err(unsupported(np, "unknown noun phrase")),
            }
        }
        _ => Err(unsupported(t, "not a declarative sentence")),
    }
}

/// Class expression asked for by a question tree.
pub fn tree_to_query(t: &Tree) -> Result<Class, SemanticsError> {
    match (t.fun.as_str(), t.args.as_slice()) {
        ("whoQ", [vp]) => vp_class(vp),
        ("whichQ", [cn, vp]) => Ok(Class::and(cn_class(cn)?, vp_class(vp)?)),
        _ => Err(unsupported(t, "not a question")),
    }
}

/// One axiom for all trees, or the reason there is none.
pub fn entry_semantics(trees: &[Tree]) -> EntrySemantics {
    let mut axioms = Vec::new();
    for t in trees {
        match tree_to_axiom(t) {
            Ok(a) => axioms.push(a),
            Err(e) => return EntrySemantics::Unsupported(e.to_string()),
        }
    }
    match axioms.split_first() {
        None => EntrySemantics::Unsupported("no trees".into()),
        Some((first, rest)) if rest.iter().all(|a| a == first) => EntrySemantics::Axiom(first.clone()),
        _ => EntrySemantics::Excluded,
    }
}

/// Query semantics for a question entry, by the same agreement rule.
pub fn query_semantics(trees: &[Tree]) -> Result<Option<Class>, SemanticsError> {
    let mut out: Option<Class> = None;
    for t in trees {
        let q = tree_to_query(t)?;
        match &out {
            None => out = Some(q),
            Some(prev) if *prev == q => {}
            Some(_) => return Ok(None),
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Verbalization

struct Verbalizer<'a> {
    abs: &'a AbstractSyntax,
}

impl Verbalizer<'_> {
    fn lexical(&self, entity: &str, cat: &str) -> Result<Tree, SemanticsError> {
        let cat_idx = self.abs.cat(cat);
        self.abs
            .lexical_functions()
            .find(|f| Some(f.result) == cat_idx && entity_name(&f.name) == entity)
            .map(|f| Tree::leaf(&f.name))
            .ok_or_else(|| SemanticsError::NotVerbalizable(format!("no {cat} in the lexicon for `{entity}`")))
    }

    fn cn(&self, c: &Class) -> Result<Tree, SemanticsError> {
        match c {
            Class::Named(n) => Ok(Tree::app("useN", vec![self.lexical(n, "N")?])),
            Class::Intersection(a, b) => Ok(Tree::app(
                "relCN",
                vec![self.cn(a)?, Tree::app("thatVP_Rel", vec![self.vp(b)?])],
            )),
            other => Err(SemanticsError::NotVerbalizable(format!("`{other}` as a noun"))),
        }
    }

    fn vp(&self, c: &Class) -> Result<Tree, SemanticsError> {
        let verb = |r: &Role| -> Result<(&'static str, Tree), SemanticsError> {
            let f = if matches!(r, Role::Named(_)) { "v2VP" } else { "v2_byVP" };
            Ok((f, self.lexical(r.name(), "V2")?))
        };
        match c {
            Class::Named(_) | Class::Intersection(..) => Ok(Tree::app("isaVP", vec![self.cn(c)?])),
            Class::Exists(r, filler) => {
                let (f, v) = verb(r)?;
                Ok(Tree::app(f, vec![v, Tree::app("aNP", vec![self.cn(filler)?])]))
            }
            Class::HasValue(r, ind) => {
                let (f, v) = verb(r)?;
                Ok(Tree::app(f, vec![v, self.pn(ind)?]))
            }
            Class::Complement(_) => Err(SemanticsError::NotVerbalizable(format!("nested complement `{c}`"))),
        }
    }

    fn pn(&self, ind: &str) -> Result<Tree, SemanticsError> {
        Ok(Tree::app("pnNP", vec![self.lexical(ind, "PN")?]))
    }

    fn clause(&self, subject: Tree, c: &Class) -> Result<Tree, SemanticsError> {
        match c {
            Class::Complement(inner) => Ok(Tree::app("neg_vpS", vec![subject, self.vp(inner)?])),
            _ => Ok(Tree::app("vpS", vec![subject, self.vp(c)?])),
        }
    }

    fn property(&self, r: &str, negated: bool) -> Result<Tree, SemanticsError> {
        let v = self.lexical(r, "V2")?;
        let var = |x: &str| Tree::app("termNP", vec![Tree::leaf(x)]);
        let first = Tree::app("vpS", vec![var("X_Var"), Tree::app("v2VP", vec![v.clone(), var("Y_Var")])]);
        let second = Tree::app(
            if negated { "neg_vpS" } else { "vpS" },
            vec![var("Y_Var"), Tree::app("v2VP", vec![v, var("X_Var")])],
        );
        Ok(Tree::app("if_thenS", vec![first, second]))
    }

    fn axiom(&self, a: &Axiom) -> Result<Tree, SemanticsError> {
        match a {
            Axiom::SubClassOf(c, d) => self.clause(Tree::app("everyNP", vec![self.cn(c)?]), d),
            Axiom::ClassAssertion(c, p) => self.clause(self.pn(p)?, c),
            Axiom::RoleAssertion(r, p, q) => Ok(Tree::app(
                "vpS",
                vec![self.pn(p)?, Tree::app("v2VP", vec![self.lexical(r, "V2")?, self.pn(q)?])],
            )),
            Axiom::NegRoleAssertion(r, p, q) => Ok(Tree::app(
                "neg_vpS",
                vec![self.pn(p)?, Tree::app("v2VP", vec![self.lexical(r, "V2")?, self.pn(q)?])],
            )),
            Axiom::Asymmetric(r) => self.property(r, true),
            Axiom::Symmetric(r) => self.property(r, false),
        }
    }
}

/// Canonical tree expressing `a`: active voice, `every` subjects, negation on
/// the verb phrase. Fails unless the tree maps back to exactly `a`.
pub fn axiom_to_tree(abs: &AbstractSyntax, a: &Axiom) -> Result<Tree, SemanticsError> {
    let t = Verbalizer { abs }.axiom(a)?;
    match tree_to_axiom(&t) {
        Ok(back) if back == *a => Ok(t),
        _ => Err(SemanticsError::NotVerbalizable(a.to_string())),
    }
}

// ---------------------------------------------------------------------------
// Text form

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Named(r) => write!(f, "{r}"),
            Role::Inverse(r) => write!(f, "Inverse({r})"),
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Class::Named(n) => write!(f, "{n}"),
            Class::Complement(c) => write!(f, "Complement({c})"),
            Class::Intersection(a, b) => write!(f, "Intersection({a}, {b})"),
            Class::Exists(r, c) => write!(f, "Exists({r}, {c})"),
            Class::HasValue(r, i) => write!(f, "HasValue({r}, {i})"),
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::SubClassOf(c, d) => write!(f, "SubClassOf({c}, {d})"),
            Axiom::ClassAssertion(c, i) => write!(f, "ClassAssertion({c}, {i})"),
            Axiom::RoleAssertion(r, a, b) => write!(f, "RoleAssertion({r}, {a}, {b})"),
            Axiom::NegRoleAssertion(r, a, b) => write!(f, "NegRoleAssertion({r}, {a}, {b})"),
            Axiom::Asymmetric(r) => write!(f, "Asymmetric({r})"),
            Axiom::Symmetric(r) => write!(f, "Symmetric({r})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed axiom: {0}")]
pub struct AxiomSyntaxError(pub String);

struct TextParser<'a> {
    toks: Vec<&'a str>,
    pos: usize,
}

impl<'a> TextParser<'a> {
    fn new(s: &'a str) -> Self {
        let mut toks = Vec::new();
        let mut start = None;
        for (i, ch) in s.char_indices() {
            if ch == '(' || ch == ')' || ch == ',' || ch.is_whitespace() {
                if let Some(st) = start.take() {
                    toks.push(&s[st..i]);
                }
                if !ch.is_whitespace() {
                    toks.push(&s[i..i + 1]);
                }
            } else if start.is_none() {
                start = Some(i);
            }
        }
        if let Some(st) = start {
            toks.push(&s[st..]);
        }
        TextParser { toks, pos: 0 }
    }

    fn next(&mut self) -> Result<&'a str, AxiomSyntaxError> {
        let t = self.toks.get(self.pos).copied().ok_or_else(|| AxiomSyntaxError("unexpected end".into()))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, want: &str) -> Result<(), AxiomSyntaxError> {
        let t = self.next()?;
        if t == want {
            Ok(())
        } else {
            Err(AxiomSyntaxError(format!("expected `{want}`, found `{t}`")))
        }
    }

    fn name(&mut self) -> Result<String, AxiomSyntaxError> {
        let t = self.next()?;
        if matches!(t, "(" | ")" | ",") {
            return Err(AxiomSyntaxError(format!("expected a name, found `{t}`")));
        }
        Ok(t.to_string())
    }

    fn peek_is(&self, s: &str) -> bool {
        self.toks.get(self.pos + 1) == Some(&"(") && self.toks.get(self.pos) == Some(&s)
    }

    fn role(&mut self) -> Result<Role, AxiomSyntaxError> {
        if self.peek_is("Inverse") {
            self.pos += 2;
            let r = self.name()?;
            self.expect(")")?;
            Ok(Role::Inverse(r))
        } else {
            Ok(Role::Named(self.name()?))
        }
    }

    fn class(&mut self) -> Result<Class, AxiomSyntaxError> {
        for head in ["Complement", "Intersection", "Exists", "HasValue"] {
            if self.peek_is(head) {
                self.pos += 2;
                let c = match head {
                    "Complement" => Class::not(self.class()?),
                    "Intersection" => {
                        let a = self.class()?;
                        self.expect(",")?;
                        Class::and(a, self.class()?)
                    }
                    "Exists" => {
                        let r = self.role()?;
                        self.expect(",")?;
                        Class::exists(r, self.class()?)
                    }
                    _ => {
                        let r = self.role()?;
                        self.expect(",")?;
                        Class::HasValue(r, self.name()?)
                    }
                };
                self.expect(")")?;
                return Ok(c);
            }
        }
        Ok(Class::Named(self.name()?))
    }

    fn axiom(&mut self) -> Result<Axiom, AxiomSyntaxError> {
        let head = self.name()?;
        self.expect("(")?;
        let a = match head.as_str() {
            "SubClassOf" => {
                let c = self.class()?;
                self.expect(",")?;
                Axiom::SubClassOf(c, self.class()?)
            }
            "ClassAssertion" => {
                let c = self.class()?;
                self.expect(",")?;
                Axiom::ClassAssertion(c, self.name()?)
            }
            "RoleAssertion" | "NegRoleAssertion" => {
                let r = self.name()?;
                self.expect(",")?;
                let a = self.name()?;
                self.expect(",")?;
                let b = self.name()?;
                if head == "RoleAssertion" {
                    Axiom::RoleAssertion(r, a, b)
                } else {
                    Axiom::NegRoleAssertion(r, a, b)
                }
            }
            "Asymmetric" => Axiom::Asymmetric(self.name()?),
            "Symmetric" => Axiom::Symmetric(self.name()?),
            other => return Err(AxiomSyntaxError(format!("unknown axiom kind `{other}`"))),
        };
        self.expect(")")?;
        Ok(a)
    }

    fn finish<T>(&self, v: T) -> Result<T, AxiomSyntaxError> {
        match self.toks.get(self.pos) {
            None => Ok(v),
            Some(t) => Err(AxiomSyntaxError(format!("trailing input at `{t}`"))),
        }
    }
}

impl FromStr for Axiom {
    type Err = AxiomSyntaxError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = TextParser::new(s);
        let a = p.axiom()?;
        p.finish(a)
    }
}

impl FromStr for Class {
    type Err = AxiomSyntaxError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = TextParser::new(s);
        let c = p.class()?;
        p.finish(c)
    }
}

impl Serialize for Axiom {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Axiom {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

impl Serialize for Class {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Class {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}
