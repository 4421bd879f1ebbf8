//! Consistency checking, classification and query answering.

mod bounded;
mod tableau;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

pub use bounded::{bounded_entails, bounded_model, BoundedResult, Interpretation, ModelSearch, Signature};
use tableau::Tableau;

use crate::semantics::{Axiom, Class};

pub const DEFAULT_NODE_BUDGET: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReasonerError {
    #[error("reasoner gave up: node budget exhausted")]
    Unknown,
    #[error("knowledge base is inconsistent")]
    Inconsistent,
}

/// Axioms tagged with the entry they come from, plus the declared signature.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    pub axioms: Vec<(String, Axiom)>,
    pub signature: Signature,
}

impl KnowledgeBase {
    pub fn new(axioms: Vec<(String, Axiom)>, mut signature: Signature) -> Self {
        for (_, a) in &axioms {
            signature.add_axiom(a);
        }
        KnowledgeBase { axioms, signature }
    }

    pub fn from_axioms(axioms: impl IntoIterator<Item = Axiom>) -> Self {
        let tagged = axioms.into_iter().enumerate().map(|(i, a)| (i.to_string(), a)).collect();
        KnowledgeBase::new(tagged, Signature::default())
    }

    fn plain(&self) -> Vec<&Axiom> {
        self.axioms.iter().map(|(_, a)| a).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Consistency {
    Consistent,
    /// Entry ids of a conflict set found by greedy deletion; minimal with
    /// respect to removing any single member, not necessarily the smallest.
    Inconsistent { conflict: Vec<String> },
    Unknown,
}

/// One node of the class hierarchy: equivalent classes and their direct parents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaxonomyNode {
    pub classes: Vec<String>,
    /// First class name of each direct parent node.
    pub parents: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Taxonomy {
    pub nodes: Vec<TaxonomyNode>,
}

impl Taxonomy {
    pub fn parents_of(&self, class: &str) -> Option<&[String]> {
        self.nodes.iter().find(|n| n.classes.iter().any(|c| c == class)).map(|n| n.parents.as_slice())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Reasoner {
    pub node_budget: usize,
}

impl Default for Reasoner {
    fn default() -> Self {
        Reasoner { node_budget: DEFAULT_NODE_BUDGET }
    }
}

impl Reasoner {
    pub fn with_budget(node_budget: usize) -> Self {
        Reasoner { node_budget }
    }

    fn sat(&self, axioms: &[&Axiom], witness: &[Class]) -> Result<bool, ReasonerError> {
        Tableau::satisfiable(axioms, witness, self.node_budget).map_err(|_| ReasonerError::Unknown)
    }

    /// Whether the axioms have a model, without conflict analysis.
    pub fn satisfiable(&self, axioms: &[Axiom]) -> Result<bool, ReasonerError> {
        let refs: Vec<&Axiom> = axioms.iter().collect();
        self.sat(&refs, &[])
    }

    pub fn is_consistent(&self, kb: &KnowledgeBase) -> Consistency {
        let all = kb.plain();
        match self.sat(&all, &[]) {
            Ok(true) => return Consistency::Consistent,
            Err(_) => return Consistency::Unknown,
            Ok(false) => {}
        }
        // drop each axiom whose removal keeps the rest inconsistent
        let mut keep: Vec<bool> = vec![true; all.len()];
        for i in 0..all.len() {
            keep[i] = false;
            let rest: Vec<&Axiom> = all.iter().zip(&keep).filter(|(_, &k)| k).map(|(a, _)| *a).collect();
            if self.sat(&rest, &[]) != Ok(false) {
                keep[i] = true;
            }
        }
        let mut conflict: Vec<String> =
            kb.axioms.iter().zip(&keep).filter(|(_, &k)| k).map(|((id, _), _)| id.clone()).collect();
        conflict.dedup();
        Consistency::Inconsistent { conflict }
    }

    fn require_consistent<'k>(&self, kb: &'k KnowledgeBase) -> Result<Vec<&'k Axiom>, ReasonerError> {
        let all = kb.plain();
        match self.sat(&all, &[])? {
            true => Ok(all),
            false => Err(ReasonerError::Inconsistent),
        }
    }

    /// `c ⊑ d` in every model of the knowledge base.
    pub fn is_subsumed_by(&self, kb: &KnowledgeBase, c: &Class, d: &Class) -> Result<bool, ReasonerError> {
        let all = self.require_consistent(kb)?;
        Ok(!self.sat(&all, &[c.clone(), Class::not(d.clone())])?)
    }

    /// Direct-subsumption hierarchy over the signature's named classes.
    pub fn classify(&self, kb: &KnowledgeBase) -> Result<Taxonomy, ReasonerError> {
        let all = self.require_consistent(kb)?;
        let names: Vec<&String> = kb.signature.classes.iter().collect();
        let n = names.len();
        let mut sub = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                sub[i][j] = i == j
                    || !self.sat(&all, &[Class::named(names[i]), Class::not(Class::named(names[j]))])?;
            }
        }
        // merge equivalents; the representative is the first member
        let mut rep: Vec<usize> = (0..n).collect();
        for i in 0..n {
            if let Some(j) = (0..i).find(|&j| sub[i][j] && sub[j][i]) {
                rep[i] = rep[j];
            }
        }
        let reps: Vec<usize> = (0..n).filter(|&i| rep[i] == i).collect();
        let strictly_below = |a: usize, b: usize| a != b && sub[a][b] && !sub[b][a];
        let mut nodes = Vec::new();
        for &a in &reps {
            let supers: Vec<usize> = reps.iter().copied().filter(|&b| strictly_below(a, b)).collect();
            let direct: Vec<String> = supers
                .iter()
                .filter(|&&b| !supers.iter().any(|&m| m != b && strictly_below(m, b)))
                .map(|&b| names[b].clone())
                .collect();
            nodes.push(TaxonomyNode {
                classes: (0..n).filter(|&i| rep[i] == a).map(|i| names[i].clone()).collect(),
                parents: direct,
            });
        }
        Ok(Taxonomy { nodes })
    }

    /// Individuals that belong to `q` in every model.
    pub fn answer_query(&self, kb: &KnowledgeBase, q: &Class) -> Result<BTreeSet<String>, ReasonerError> {
        let all = self.require_consistent(kb)?;
        let mut out = BTreeSet::new();
        for ind in &kb.signature.individuals {
            let negated = Axiom::ClassAssertion(Class::not(q.clone()), ind.clone());
            let mut with: Vec<&Axiom> = all.clone();
            with.push(&negated);
            if !self.sat(&with, &[])? {
                out.insert(ind.clone());
            }
        }
        Ok(out)
    }
}

/// Groups axioms by entry for display.
pub fn axioms_by_entry(kb: &KnowledgeBase) -> BTreeMap<&str, Vec<&Axiom>> {
    let mut out: BTreeMap<&str, Vec<&Axiom>> = BTreeMap::new();
    for (id, a) in &kb.axioms {
        out.entry(id.as_str()).or_default().push(a);
    }
    out
}
