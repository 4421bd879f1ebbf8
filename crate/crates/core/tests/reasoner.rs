use std::collections::{BTreeMap, BTreeSet, HashSet};

use cnlwiki_core::eval::{pool_basis, pool_cases};
use cnlwiki_core::reasoner::{bounded_entails, bounded_model, BoundedResult, Consistency, KnowledgeBase, ModelSearch, Reasoner};
use cnlwiki_core::semantics::{Axiom, Class, Role};

fn ax(s: &str) -> Axiom {
    s.parse().unwrap()
}

fn cls(s: &str) -> Class {
    s.parse().unwrap()
}

fn kb(axioms: &[&str]) -> KnowledgeBase {
    KnowledgeBase::from_axioms(axioms.iter().map(|s| ax(s)))
}

const BOUND: usize = 3;

#[test]
fn consistency_examples() {
    let r = Reasoner::default();
    assert_eq!(r.is_consistent(&kb(&[])), Consistency::Consistent);
    let clash = ["RoleAssertion(border, germany, france)", "RoleAssertion(border, france, germany)", "Asymmetric(border)"];
    assert!(matches!(r.is_consistent(&kb(&clash)), Consistency::Inconsistent { .. }));
    let man = ["SubClassOf(man, human)", "ClassAssertion(man, john)", "ClassAssertion(Complement(human), john)"];
    let axioms: Vec<Axiom> = man.iter().map(|s| ax(s)).collect();
    assert_eq!(bounded_model(&axioms, BOUND), ModelSearch::NoModel);
    match r.is_consistent(&kb(&man)) {
        Consistency::Inconsistent { conflict } => assert_eq!(conflict, ["0", "1", "2"]),
        other => panic!("{other:?}"),
    }
    // the asymmetry clash needs two elements to even state
    let c: Vec<Axiom> = clash.iter().map(|s| ax(s)).collect();
    assert_eq!(bounded_model(&c, 2), ModelSearch::NoModel);
}

#[test]
fn subsumption_examples_certified_by_bounded_models() {
    let r = Reasoner::default();
    let k = kb(&["SubClassOf(country, Exists(Inverse(border), country))"]);
    let (c, inv, fwd) = (cls("country"), cls("Exists(Inverse(border), country)"), cls("Exists(border, country)"));
    assert!(r.is_subsumed_by(&k, &c, &c).unwrap());
    assert!(r.is_subsumed_by(&k, &c, &inv).unwrap());
    assert!(!r.is_subsumed_by(&k, &c, &fwd).unwrap());
    let axioms: Vec<Axiom> = k.axioms.iter().map(|(_, a)| a.clone()).collect();
    let sub = |d: &Class| Axiom::SubClassOf(c.clone(), d.clone());
    assert_eq!(bounded_entails(&axioms, &sub(&inv), BOUND), BoundedResult::Entailed);
    assert!(matches!(bounded_entails(&axioms, &sub(&fwd), BOUND), BoundedResult::CounterModel(_)));
    assert!(r.is_subsumed_by(&kb(&["SubClassOf(man, human)"]), &cls("man"), &cls("human")).unwrap());
}

#[test]
fn query_examples_certified_by_bounded_models() {
    let r = Reasoner::default();
    let cases = [
        (vec!["ClassAssertion(man, john)", "SubClassOf(man, human)"], "human", vec!["john"]),
        (vec!["RoleAssertion(border, germany, france)", "ClassAssertion(country, france)"], "Exists(border, country)", vec!["germany"]),
        (vec!["ClassAssertion(man, john)"], "unicorn", vec![]),
    ];
    for (axioms, q, expected) in cases {
        let k = kb(&axioms);
        let q = cls(q);
        let got = r.answer_query(&k, &q).unwrap();
        assert_eq!(got, expected.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>());
        let list: Vec<Axiom> = k.axioms.iter().map(|(_, a)| a.clone()).collect();
        for ind in &k.signature.individuals {
            let verdict = bounded_entails(&list, &Axiom::ClassAssertion(q.clone(), ind.clone()), BOUND);
            if got.contains(ind) {
                assert_eq!(verdict, BoundedResult::Entailed, "{ind}");
            } else {
                assert!(matches!(verdict, BoundedResult::CounterModel(_)), "{ind}");
            }
        }
    }
    assert!(matches!(bounded_entails(&[], &ax("ClassAssertion(c, a)"), 1), BoundedResult::CounterModel(m) if m.size == 1));
}

#[test]
fn classification_chain_is_reduced() {
    let t = Reasoner::default().classify(&kb(&["SubClassOf(a, b)", "SubClassOf(b, c)"])).unwrap();
    assert_eq!(t.parents_of("a").unwrap(), ["b"]);
    assert_eq!(t.parents_of("b").unwrap(), ["c"]);
    assert!(t.parents_of("c").unwrap().is_empty());
}

// Test-side oracle over the pool signature: classes a, b; role r;
// individuals i, j. Each interpretation is reduced to the set of basis
// axioms it satisfies.

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
        let (p, q) = match role {
            Role::Named(_) => (x, y),
            Role::Inverse(_) => (y, x),
        };
        self.r >> (p * self.n + q) & 1 == 1
    }

    fn ind(&self, name: &str) -> usize {
        if name == "i" { self.i } else { self.j }
    }

    fn member(&self, c: &Class, x: usize) -> bool {
        match c {
            Class::Named(n) if n == "a" => self.a >> x & 1 == 1,
            Class::Named(_) => self.b >> x & 1 == 1,
            Class::Complement(d) => !self.member(d, x),
            Class::Intersection(d, e) => self.member(d, x) && self.member(e, x),
            Class::Exists(role, d) => (0..self.n).any(|y| self.rel(role, x, y) && self.member(d, y)),
            Class::HasValue(role, v) => self.rel(role, x, self.ind(v)),
        }
    }

    fn holds(&self, a: &Axiom) -> bool {
        let named = Role::Named("r".into());
        let dom = 0..self.n;
        match a {
            Axiom::SubClassOf(c, d) => dom.clone().all(|x| !self.member(c, x) || self.member(d, x)),
            Axiom::ClassAssertion(c, v) => self.member(c, self.ind(v)),
            Axiom::RoleAssertion(_, x, y) => self.rel(&named, self.ind(x), self.ind(y)),
            Axiom::NegRoleAssertion(_, x, y) => !self.rel(&named, self.ind(x), self.ind(y)),
            Axiom::Symmetric(_) => dom.clone().all(|x| dom.clone().all(|y| !self.rel(&named, x, y) || self.rel(&named, y, x))),
            Axiom::Asymmetric(_) => dom.clone().all(|x| dom.clone().all(|y| !(self.rel(&named, x, y) && self.rel(&named, y, x)))),
        }
    }
}

fn satisfied_sets(basis: &[Axiom]) -> Vec<u32> {
    let mut seen = HashSet::new();
    for n in 1..=BOUND {
        for a in 0..1u8 << n {
            for b in 0..1u8 << n {
                for r in 0..1u16 << (n * n) {
                    for i in 0..n {
                        for j in 0..n {
                            let m = Small { n, a, b, r, i, j };
                            let mask = basis.iter().enumerate().filter(|(_, x)| m.holds(x)).fold(0u32, |s, (k, _)| s | 1 << k);
                            seen.insert(mask);
                        }
                    }
                }
            }
        }
    }
    seen.into_iter().collect()
}

#[test]
fn tableau_agrees_with_small_models() {
    let basis = pool_basis();
    assert_eq!(basis.len(), 27);
    let models = satisfied_sets(&basis);
    let r = Reasoner::default();
    let mut undecided = 0;
    for case in pool_cases(basis.len(), 3) {
        let want = case.iter().fold(0u32, |s, &k| s | 1 << k);
        let has_model = models.iter().any(|m| m & want == want);
        let axioms: Vec<Axiom> = case.iter().map(|&k| basis[k].clone()).collect();
        let verdict = r.satisfiable(&axioms).expect("pool stays within budget");
        if has_model {
            assert!(verdict, "tableau rejects a kb with a model: {case:?}");
        } else if verdict {
            undecided += 1;
        }
    }
    // every pool kb either has a small model or a tableau refutation
    assert_eq!(undecided, 0);
}

#[test]
fn answers_grow_with_the_kb() {
    let basis = pool_basis();
    let r = Reasoner::default();
    let queries = [cls("a"), cls("b"), cls("Exists(r, b)"), cls("Complement(a)")];
    let answers = |idx: &[usize]| -> Option<Vec<BTreeSet<String>>> {
        let k = KnowledgeBase::from_axioms(idx.iter().map(|&x| basis[x].clone()));
        queries.iter().map(|q| r.answer_query(&k, q).ok()).collect()
    };
    for case in pool_cases(basis.len(), 2) {
        let Some(before) = answers(&case) else { continue };
        for extra in 0..basis.len() {
            if case.contains(&extra) {
                continue;
            }
            let mut bigger = case.clone();
            bigger.push(extra);
            if let Some(after) = answers(&bigger) {
                for (b, a) in before.iter().zip(&after) {
                    assert!(b.is_subset(a), "{case:?} + {extra}");
                }
            }
        }
    }
}

#[test]
fn taxonomies_are_acyclic_and_reduced() {
    let basis = pool_basis();
    let r = Reasoner::default();
    for case in pool_cases(basis.len(), 3) {
        let k = KnowledgeBase::from_axioms(case.iter().map(|&x| basis[x].clone()));
        let Ok(t) = r.classify(&k) else { continue };
        let parents: BTreeMap<&str, Vec<&str>> = t
            .nodes
            .iter()
            .map(|n| (n.classes[0].as_str(), n.parents.iter().map(String::as_str).collect()))
            .collect();
        let ancestors = |start: &str| {
            let mut seen = BTreeSet::new();
            let mut stack = parents[start].clone();
            while let Some(p) = stack.pop() {
                if seen.insert(p) {
                    stack.extend(parents[p].iter().copied());
                }
            }
            seen
        };
        for (&c, ps) in &parents {
            assert!(!ancestors(c).contains(c), "cycle at {c} in {case:?}");
            for p in ps {
                for q in ps {
                    assert!(p == q || !ancestors(q).contains(p), "{c}: {p} is implied by {q} in {case:?}");
                }
            }
        }
    }
}
