use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use cnlwiki_core::ace::shipped_grammar;
use cnlwiki_core::reasoner::Interpretation;
use cnlwiki_core::semantics::{axiom_to_tree, tree_to_axiom, tree_to_query, Axiom, SemanticsError};
use cnlwiki_core::Tree;

/// Reasons a supported-fragment mapping may give for rejecting a tree.
const DOCUMENTED: [&str; 5] = [
    "quantified noun phrase in object position",
    "variable outside a conditional pattern",
    "conditional outside the property patterns",
    "negated sentence with a negative subject",
    "indefinite subject",
];

const MODELS_PER_TREE: usize = 24;
const DOMAIN: usize = 3;

/// Test-side model over the shipped lexicon, evaluated straight from trees.
struct Model {
    classes: BTreeMap<String, [bool; DOMAIN]>,
    roles: BTreeMap<String, [[bool; DOMAIN]; DOMAIN]>,
    names: BTreeMap<String, usize>,
}

fn stem(fun: &str) -> String {
    fun.rsplit_once('_').unwrap().0.to_lowercase()
}

impl Model {
    fn random(rng: &mut StdRng) -> Model {
        let mut classes = BTreeMap::new();
        for n in ["country", "lake", "person"] {
            classes.insert(n.to_string(), std::array::from_fn(|_| rng.gen_bool(0.5)));
        }
        let mut roles = BTreeMap::new();
        for r in ["border", "contain", "like"] {
            roles.insert(r.to_string(), std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_bool(0.4))));
        }
        let mut names = BTreeMap::new();
        for p in ["germany", "france", "john"] {
            names.insert(p.to_string(), rng.gen_range(0..DOMAIN));
        }
        Model { classes, roles, names }
    }

    fn to_interpretation(&self) -> Interpretation {
        let mask = |f: &dyn Fn(usize) -> bool, n: usize| (0..n).filter(|&i| f(i)).fold(0u64, |m, i| m | 1 << i);
        Interpretation {
            size: DOMAIN,
            classes: self.classes.iter().map(|(n, v)| (n.clone(), mask(&|i| v[i], DOMAIN))).collect(),
            roles: self
                .roles
                .iter()
                .map(|(n, v)| (n.clone(), mask(&|k| v[k / DOMAIN][k % DOMAIN], DOMAIN * DOMAIN)))
                .collect(),
            individuals: self.names.iter().map(|(n, &v)| (n.clone(), v)).collect(),
        }
    }

    fn rel(&self, v: &Tree, x: usize, y: usize) -> bool {
        self.roles[&stem(&v.fun)][x][y]
    }

    fn cn(&self, t: &Tree, x: usize) -> bool {
        match t.fun.as_str() {
            "useN" => self.classes[&stem(&t.args[0].fun)][x],
            "relCN" => self.cn(&t.args[0], x) && self.vp(&t.args[1].args[0], x),
            f => panic!("{f}"),
        }
    }

    /// Truth of "x VP" where the object noun phrase is a name or indefinite.
    fn vp(&self, t: &Tree, x: usize) -> bool {
        match t.fun.as_str() {
            "isaVP" => self.cn(&t.args[0], x),
            "v2VP" => self.object(&t.args[1], |y| self.rel(&t.args[0], x, y)),
            "v2_byVP" => self.object(&t.args[1], |y| self.rel(&t.args[0], y, x)),
            f => panic!("{f}"),
        }
    }

    fn object(&self, np: &Tree, p: impl Fn(usize) -> bool) -> bool {
        match np.fun.as_str() {
            "pnNP" => p(self.names[&stem(&np.args[0].fun)]),
            "aNP" => (0..DOMAIN).any(|y| self.cn(&np.args[0], y) && p(y)),
            f => panic!("{f}"),
        }
    }

    fn sentence(&self, t: &Tree) -> bool {
        let all = |p: &dyn Fn(usize) -> bool| (0..DOMAIN).all(p);
        match t.fun.as_str() {
            "if_thenS" => {
                let (a, b) = (&t.args[0], &t.args[1]);
                let v = &a.args[1].args[0];
                let negated = b.fun == "neg_vpS";
                all(&|x| all(&|y| !self.rel(v, x, y) || (self.rel(v, y, x) != negated)))
            }
            f @ ("vpS" | "neg_vpS") => {
                let neg = f == "neg_vpS";
                let (np, vp) = (&t.args[0], &t.args[1]);
                match np.fun.as_str() {
                    "everyNP" => all(&|x| !self.cn(&np.args[0], x) || self.vp(vp, x) != neg),
                    "noNP" => all(&|x| !self.cn(&np.args[0], x) || !self.vp(vp, x)),
                    "pnNP" => self.vp(vp, self.names[&stem(&np.args[0].fun)]) != neg,
                    f => panic!("{f}"),
                }
            }
            f => panic!("{f}"),
        }
    }
}

fn s_trees(depth: usize) -> Vec<Tree> {
    let g = shipped_grammar();
    let abs = g.abstract_syntax();
    abs.enumerate_trees(abs.cat("S").unwrap(), depth)
}

#[test]
fn mapping_is_total_over_depth_4() {
    let mut counts = BTreeMap::new();
    for t in s_trees(4) {
        match tree_to_axiom(&t) {
            Ok(_) => *counts.entry("ok").or_insert(0) += 1,
            Err(SemanticsError::Unsupported(msg)) => {
                let why = DOCUMENTED.iter().find(|d| msg.starts_with(*d));
                assert!(why.is_some(), "undocumented rejection: {msg}");
                *counts.entry(*why.unwrap()).or_insert(0) += 1;
            }
            Err(e) => panic!("{t}: {e}"),
        }
    }
    assert!(counts["ok"] > 0);
}

#[test]
fn axioms_hold_exactly_where_sentences_are_true() {
    let mut rng = StdRng::seed_from_u64(7);
    let models: Vec<Model> = (0..MODELS_PER_TREE * 8).map(|_| Model::random(&mut rng)).collect();
    let interps: Vec<Interpretation> = models.iter().map(Model::to_interpretation).collect();
    let mut checked = 0;
    // all of depth 3, then a stride through depth 4
    let trees: Vec<Tree> = s_trees(3).into_iter().chain(s_trees(4).into_iter().step_by(13)).collect();
    for (k, t) in trees.iter().enumerate() {
        let Ok(a) = tree_to_axiom(t) else { continue };
        for m in (0..MODELS_PER_TREE).map(|i| (k * 5 + i) % models.len()) {
            assert_eq!(models[m].sentence(t), interps[m].satisfies(&a), "{t} ↦ {a}");
        }
        checked += 1;
    }
    assert!(checked > 300, "{checked}");
}

#[test]
fn questions_denote_the_true_individuals() {
    let g = shipped_grammar();
    let abs = g.abstract_syntax();
    let mut rng = StdRng::seed_from_u64(11);
    let models: Vec<Model> = (0..16).map(|_| Model::random(&mut rng)).collect();
    for t in abs.enumerate_trees(abs.cat("Q").unwrap(), 3) {
        let Ok(q) = tree_to_query(&t) else { continue };
        for m in &models {
            let i = m.to_interpretation();
            let ext = i.extension(&q);
            for x in 0..DOMAIN {
                let expected = match t.fun.as_str() {
                    "whoQ" => m.vp(&t.args[0], x),
                    _ => m.cn(&t.args[0], x) && m.vp(&t.args[1], x),
                };
                assert_eq!(ext & (1 << x) != 0, expected, "{t}");
            }
        }
    }
}

#[test]
fn verbalization_inverts_the_mapping() {
    let g = shipped_grammar();
    let mut verbalized = 0;
    for t in s_trees(4) {
        let Ok(a) = tree_to_axiom(&t) else { continue };
        match axiom_to_tree(g.abstract_syntax(), &a) {
            Ok(back) => {
                assert_eq!(tree_to_axiom(&back).unwrap(), a);
                verbalized += 1;
            }
            Err(SemanticsError::NotVerbalizable(_)) => {}
            Err(e) => panic!("{a}: {e}"),
        }
        let text = a.to_string();
        assert_eq!(text.parse::<Axiom>().unwrap(), a, "{text}");
    }
    assert!(verbalized > 0);
}

#[test]
fn passive_with_indefinite_object() {
    let g = shipped_grammar();
    let t: Tree = "vpS (everyNP (useN country_N)) (v2_byVP border_V2 (aNP (useN country_N)))".parse().unwrap();
    let a = tree_to_axiom(&t).unwrap();
    assert_eq!(a.to_string(), "SubClassOf(country, Exists(Inverse(border), country))");
    assert_eq!(
        g.linearize("ace", &axiom_to_tree(g.abstract_syntax(), &a).unwrap()).unwrap().join(" "),
        "every country is bordered by a country ."
    );
}
