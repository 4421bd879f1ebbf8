//! Exhaustive finite-model search, used as a test oracle for the tableau.
//! Individuals may share an element (no unique-name assumption).

use std::collections::BTreeSet;

use serde::Serialize;

use crate::semantics::{Axiom, Class, Role};

/// Searches larger than this many interpretations give `Unknown`.
const MAX_INTERPRETATIONS: u128 = 50_000_000;

/// A finite interpretation over domain `0..size`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Interpretation {
    pub size: usize,
    /// Class name → member bitmask.
    pub classes: Vec<(String, u64)>,
    /// Role name → bitmask over pairs, bit `x * size + y` for (x, y).
    pub roles: Vec<(String, u64)>,
    pub individuals: Vec<(String, usize)>,
}

impl Interpretation {
    fn all(&self) -> u64 {
        (1u64 << self.size) - 1
    }

    fn class(&self, n: &str) -> u64 {
        self.classes.iter().find(|(m, _)| m == n).map_or(0, |(_, v)| *v)
    }

    fn role_bits(&self, n: &str) -> u64 {
        self.roles.iter().find(|(m, _)| m == n).map_or(0, |(_, v)| *v)
    }

    fn individual(&self, n: &str) -> usize {
        self.individuals.iter().find(|(m, _)| m == n).map(|(_, v)| *v).expect("individual in signature")
    }

    pub fn holds(&self, r: &Role, x: usize, y: usize) -> bool {
        let bits = self.role_bits(r.name());
        let (a, b) = if matches!(r, Role::Inverse(_)) { (y, x) } else { (x, y) };
        bits & (1 << (a * self.size + b)) != 0
    }

    /// Extension of a class expression as a bitmask.
    pub fn extension(&self, c: &Class) -> u64 {
        match c {
            Class::Named(n) => self.class(n),
            Class::Complement(x) => self.all() & !self.extension(x),
            Class::Intersection(a, b) => self.extension(a) & self.extension(b),
            Class::Exists(r, x) => {
                let filler = self.extension(x);
                (0..self.size)
                    .filter(|&e| (0..self.size).any(|f| filler & (1 << f) != 0 && self.holds(r, e, f)))
                    .fold(0, |m, e| m | 1 << e)
            }
            Class::HasValue(r, i) => {
                let v = self.individual(i);
                (0..self.size).filter(|&e| self.holds(r, e, v)).fold(0, |m, e| m | 1 << e)
            }
        }
    }

    pub fn satisfies(&self, a: &Axiom) -> bool {
        let r = |n: &str| Role::Named(n.to_string());
        match a {
            Axiom::SubClassOf(c, d) => self.extension(c) & !self.extension(d) == 0,
            Axiom::ClassAssertion(c, i) => self.extension(c) & (1 << self.individual(i)) != 0,
            Axiom::RoleAssertion(n, x, y) => self.holds(&r(n), self.individual(x), self.individual(y)),
            Axiom::NegRoleAssertion(n, x, y) => !self.holds(&r(n), self.individual(x), self.individual(y)),
            Axiom::Symmetric(n) => {
                (0..self.size).all(|x| (0..self.size).all(|y| !self.holds(&r(n), x, y) || self.holds(&r(n), y, x)))
            }
            Axiom::Asymmetric(n) => {
                (0..self.size).all(|x| (0..self.size).all(|y| !(self.holds(&r(n), x, y) && self.holds(&r(n), y, x))))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum BoundedResult {
    /// No counter-model up to the bound; says nothing about larger domains.
    Entailed,
    CounterModel(Interpretation),
    /// The search space exceeds the configured limit.
    Unknown,
}

#[derive(Debug, Clone, Default)]
pub struct Signature {
    pub classes: BTreeSet<String>,
    pub roles: BTreeSet<String>,
    pub individuals: BTreeSet<String>,
}

impl Signature {
    pub fn of<'a>(axioms: impl IntoIterator<Item = &'a Axiom>) -> Signature {
        let mut s = Signature::default();
        for a in axioms {
            s.add_axiom(a);
        }
        s
    }

    pub fn add_axiom(&mut self, a: &Axiom) {
        match a {
            Axiom::SubClassOf(c, d) => {
                self.add_class(c);
                self.add_class(d);
            }
            Axiom::ClassAssertion(c, i) => {
                self.add_class(c);
                self.individuals.insert(i.clone());
            }
            Axiom::RoleAssertion(r, x, y) | Axiom::NegRoleAssertion(r, x, y) => {
                self.roles.insert(r.clone());
                self.individuals.insert(x.clone());
                self.individuals.insert(y.clone());
            }
            Axiom::Symmetric(r) | Axiom::Asymmetric(r) => {
                self.roles.insert(r.clone());
            }
        }
    }

    pub fn add_class(&mut self, c: &Class) {
        match c {
            Class::Named(n) => {
                self.classes.insert(n.clone());
            }
            Class::Complement(x) => self.add_class(x),
            Class::Intersection(a, b) => {
                self.add_class(a);
                self.add_class(b);
            }
            Class::Exists(r, x) => {
                self.roles.insert(r.name().to_string());
                self.add_class(x);
            }
            Class::HasValue(r, i) => {
                self.roles.insert(r.name().to_string());
                self.individuals.insert(i.clone());
            }
        }
    }

    /// Number of interpretations with domain `size`.
    pub fn count(&self, size: usize) -> u128 {
        let n = size as u128;
        let class_bits = (self.classes.len() * size) as u32;
        let role_bits = (self.roles.len() * size * size) as u32;
        if class_bits + role_bits >= 120 {
            return u128::MAX;
        }
        (1u128 << (class_bits + role_bits)).saturating_mul(n.saturating_pow(self.individuals.len() as u32))
    }

    /// Calls `visit` on every interpretation of domain `size` until it returns false.
    pub fn for_each_interpretation(&self, size: usize, mut visit: impl FnMut(&Interpretation) -> bool) {
        assert!(size >= 1 && size * size <= 64, "domain size out of range");
        let classes: Vec<&String> = self.classes.iter().collect();
        let roles: Vec<&String> = self.roles.iter().collect();
        let inds: Vec<&String> = self.individuals.iter().collect();
        let mut interp = Interpretation {
            size,
            classes: classes.iter().map(|c| (c.to_string(), 0)).collect(),
            roles: roles.iter().map(|r| (r.to_string(), 0)).collect(),
            individuals: inds.iter().map(|i| (i.to_string(), 0)).collect(),
        };
        let class_limit = 1u64 << size;
        let role_limit: u128 = 1u128 << (size * size);
        // odometer over all class, role and individual choices
        loop {
            if !visit(&interp) {
                return;
            }
            let mut carry = true;
            for (_, v) in interp.classes.iter_mut() {
                *v += 1;
                if *v < class_limit {
                    carry = false;
                    break;
                }
                *v = 0;
            }
            if carry {
                for (_, v) in interp.roles.iter_mut() {
                    if (*v as u128) + 1 < role_limit {
                        *v += 1;
                        carry = false;
                        break;
                    }
                    *v = 0;
                }
            }
            if carry {
                for (_, v) in interp.individuals.iter_mut() {
                    *v += 1;
                    if *v < size {
                        carry = false;
                        break;
                    }
                    *v = 0;
                }
            }
            if carry {
                return;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSearch {
    Model(Interpretation),
    /// No model with at most the given number of elements.
    NoModel,
    Unknown,
}

/// Searches for a model of `axioms` with at most `max_domain` elements.
pub fn bounded_model(axioms: &[Axiom], max_domain: usize) -> ModelSearch {
    let sig = Signature::of(axioms);
    let mut total = 0u128;
    for n in 1..=max_domain {
        total = total.saturating_add(sig.count(n));
    }
    if max_domain == 0 || total > MAX_INTERPRETATIONS || max_domain * max_domain > 64 {
        return ModelSearch::Unknown;
    }
    for n in 1..=max_domain {
        let mut found = None;
        sig.for_each_interpretation(n, |i| {
            if axioms.iter().all(|a| i.satisfies(a)) {
                found = Some(i.clone());
                false
            } else {
                true
            }
        });
        if let Some(m) = found {
            return ModelSearch::Model(m);
        }
    }
    ModelSearch::NoModel
}

/// Whether every model of `kb` with at most `max_domain` elements satisfies `axiom`.
pub fn bounded_entails(kb: &[Axiom], axiom: &Axiom, max_domain: usize) -> BoundedResult {
    let mut sig = Signature::of(kb);
    sig.add_axiom(axiom);
    let mut total = 0u128;
    for n in 1..=max_domain {
        total = total.saturating_add(sig.count(n));
    }
    if max_domain == 0 || total > MAX_INTERPRETATIONS || max_domain * max_domain > 64 {
        return BoundedResult::Unknown;
    }
    for n in 1..=max_domain {
        let mut counter = None;
        sig.for_each_interpretation(n, |i| {
            if kb.iter().all(|a| i.satisfies(a)) && !i.satisfies(axiom) {
                counter = Some(i.clone());
                false
            } else {
                true
            }
        });
        if let Some(c) = counter {
            return BoundedResult::CounterModel(c);
        }
    }
    BoundedResult::Entailed
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ax(s: &str) -> Axiom {
        s.parse().unwrap()
    }

    #[test]
    fn empty_kb_has_size_one_counter_model() {
        match bounded_entails(&[], &ax("ClassAssertion(c, a)"), 3) {
            BoundedResult::CounterModel(m) => assert_eq!(m.size, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn asymmetry_clash_has_no_model() {
        let kb = [
            ax("RoleAssertion(border, germany, france)"),
            ax("RoleAssertion(border, france, germany)"),
            ax("Asymmetric(border)"),
        ];
        assert_eq!(bounded_model(&kb, 2), ModelSearch::NoModel);
        assert!(matches!(bounded_model(&kb[..2], 2), ModelSearch::Model(_)));
    }

    #[test]
    fn passive_subclass_models() {
        let a = ax("SubClassOf(country, Exists(Inverse(border), country))");
        let m = Interpretation {
            size: 2,
            classes: vec![("country".into(), 0b11)],
            roles: vec![("border".into(), (1 << 1) | (1 << 2))],
            individuals: vec![],
        };
        assert!(m.satisfies(&a));
        let kb = [a];
        assert_eq!(
            bounded_entails(&kb, &ax("SubClassOf(country, Exists(Inverse(border), country))"), 3),
            BoundedResult::Entailed
        );
        assert!(matches!(
            bounded_entails(&kb, &ax("SubClassOf(country, Exists(border, country))"), 2),
            BoundedResult::CounterModel(_)
        ));
    }
}
