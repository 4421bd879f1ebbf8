//! Tableau satisfiability for ALC with inverse roles, individuals, value
//! restrictions and (a)symmetric roles. Pairwise blocking; a node budget
//! turns runaway searches into `BudgetExceeded`.

use std::cell::Cell;
use std::collections::BTreeSet;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::semantics::{Axiom, Class, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudgetExceeded;

type Cid = u32;
type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct R {
    role: u32,
    inverse: bool,
}

/// Concepts in negation normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Nnf {
    Atom(u32),
    NotAtom(u32),
    And(Vec<Cid>),
    Or(Vec<Cid>),
    Exists(R, Cid),
    All(R, Cid),
    Value(R, u32),
    NotValue(R, u32),
}

#[derive(Default)]
struct Symbols {
    classes: FxHashMap<String, u32>,
    roles: FxHashMap<String, u32>,
    individuals: FxHashMap<String, u32>,
}

fn intern(map: &mut FxHashMap<String, u32>, name: &str) -> u32 {
    let next = map.len() as u32;
    *map.entry(name.to_string()).or_insert(next)
}

#[derive(Default)]
struct Concepts {
    table: Vec<Nnf>,
    index: FxHashMap<Nnf, Cid>,
}

impl Concepts {
    fn add(&mut self, c: Nnf) -> Cid {
        if let Some(&i) = self.index.get(&c) {
            return i;
        }
        let i = self.table.len() as Cid;
        self.table.push(c.clone());
        self.index.insert(c, i);
        i
    }
}

#[derive(Debug, Clone)]
struct Node {
    label: BTreeSet<Cid>,
    parent: Option<NodeId>,
}

#[derive(Debug, Clone, Default)]
struct Graph {
    nodes: Vec<Node>,
    /// (from, role, to)
    edges: FxHashSet<(NodeId, u32, NodeId)>,
    adj: Vec<Vec<(u32, NodeId, bool)>>,
}

impl Graph {
    fn add_node(&mut self, parent: Option<NodeId>) -> NodeId {
        self.nodes.push(Node { label: BTreeSet::new(), parent });
        self.adj.push(Vec::new());
        self.nodes.len() - 1
    }

    fn add_edge(&mut self, from: NodeId, role: u32, to: NodeId) -> bool {
        if !self.edges.insert((from, role, to)) {
            return false;
        }
        self.adj[from].push((role, to, true));
        if from != to {
            self.adj[to].push((role, from, false));
        }
        true
    }

    /// Adds an edge realizing `x R y`.
    fn relate(&mut self, x: NodeId, r: R, y: NodeId) -> bool {
        if r.inverse {
            self.add_edge(y, r.role, x)
        } else {
            self.add_edge(x, r.role, y)
        }
    }

    fn related(&self, x: NodeId, r: R, y: NodeId) -> bool {
        if r.inverse {
            self.edges.contains(&(y, r.role, x))
        } else {
            self.edges.contains(&(x, r.role, y))
        }
    }

    fn neighbours(&self, x: NodeId, r: R) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = Vec::new();
        for &(role, y, outgoing) in &self.adj[x] {
            if role != r.role {
                continue;
            }
            // a self loop is stored once, as outgoing
            let fits = if x == y { true } else { outgoing != r.inverse };
            if fits && !out.contains(&y) {
                out.push(y);
            }
        }
        out
    }

    fn edge_roles(&self, from: NodeId, to: NodeId) -> BTreeSet<(u32, bool)> {
        self.adj[from].iter().filter(|&&(_, y, _)| y == to).map(|&(r, _, out)| (r, out)).collect()
    }
}

/// Fixed part of a satisfiability problem.
struct Problem {
    concepts: Concepts,
    tbox: Vec<Cid>,
    named: usize,
    symmetric: Vec<u32>,
    asymmetric: Vec<u32>,
    negated: Vec<(NodeId, u32, NodeId)>,
    budget: usize,
    created: Cell<usize>,
}

pub(crate) struct Tableau;

impl Tableau {
    /// Satisfiability of `axioms`, optionally with an extra anonymous element
    /// that must belong to every class in `witness`.
    pub(crate) fn satisfiable(axioms: &[&Axiom], witness: &[Class], budget: usize) -> Result<bool, BudgetExceeded> {
        let mut syms = Symbols::default();
        let mut concepts = Concepts::default();
        // individuals first so that their node ids equal their symbol ids
        for a in axioms {
            match a {
                Axiom::ClassAssertion(c, i) => {
                    intern(&mut syms.individuals, i);
                    collect_individuals(c, &mut syms);
                }
                Axiom::RoleAssertion(_, x, y) | Axiom::NegRoleAssertion(_, x, y) => {
                    intern(&mut syms.individuals, x);
                    intern(&mut syms.individuals, y);
                }
                Axiom::SubClassOf(c, d) => {
                    collect_individuals(c, &mut syms);
                    collect_individuals(d, &mut syms);
                }
                _ => {}
            }
        }
        for c in witness {
            collect_individuals(c, &mut syms);
        }
        let named = syms.individuals.len();
        let mut g = Graph::default();
        for _ in 0..named {
            g.add_node(None);
        }
        let mut p = Problem {
            concepts: Concepts::default(),
            tbox: Vec::new(),
            named,
            symmetric: Vec::new(),
            asymmetric: Vec::new(),
            negated: Vec::new(),
            budget,
            created: Cell::new(named),
        };
        for a in axioms {
            match a {
                Axiom::SubClassOf(c, d) => {
                    let nc = nnf(c, true, &mut syms, &mut concepts);
                    let nd = nnf(d, false, &mut syms, &mut concepts);
                    p.tbox.push(concepts.add(Nnf::Or(vec![nc, nd])));
                }
                Axiom::ClassAssertion(c, i) => {
                    let x = syms.individuals[i.as_str()] as NodeId;
                    let cid = nnf(c, false, &mut syms, &mut concepts);
                    g.nodes[x].label.insert(cid);
                }
                Axiom::RoleAssertion(r, x, y) => {
                    let role = intern(&mut syms.roles, r);
                    g.add_edge(syms.individuals[x.as_str()] as NodeId, role, syms.individuals[y.as_str()] as NodeId);
                }
                Axiom::NegRoleAssertion(r, x, y) => {
                    let role = intern(&mut syms.roles, r);
                    p.negated.push((syms.individuals[x.as_str()] as NodeId, role, syms.individuals[y.as_str()] as NodeId));
                }
                Axiom::Symmetric(r) => {
                    let role = intern(&mut syms.roles, r);
                    p.symmetric.push(role);
                }
                Axiom::Asymmetric(r) => {
                    let role = intern(&mut syms.roles, r);
                    p.asymmetric.push(role);
                }
            }
        }
        if !witness.is_empty() {
            let w = g.add_node(None);
            for c in witness {
                let cid = nnf(c, false, &mut syms, &mut concepts);
                g.nodes[w].label.insert(cid);
            }
        }
        for x in 0..g.nodes.len() {
            let tbox = p.tbox.clone();
            g.nodes[x].label.extend(tbox);
        }
        p.concepts = concepts;
        p.expand(g)
    }
}

fn collect_individuals(c: &Class, syms: &mut Symbols) {
    match c {
        Class::Named(_) => {}
        Class::Complement(x) | Class::Exists(_, x) => collect_individuals(x, syms),
        Class::Intersection(a, b) => {
            collect_individuals(a, syms);
            collect_individuals(b, syms);
        }
        Class::HasValue(_, i) => {
            intern(&mut syms.individuals, i);
        }
    }
}

fn role_of(r: &Role, syms: &mut Symbols) -> R {
    match r {
        Role::Named(n) => R { role: intern(&mut syms.roles, n), inverse: false },
        Role::Inverse(n) => R { role: intern(&mut syms.roles, n), inverse: true },
    }
}

fn nnf(c: &Class, negated: bool, syms: &mut Symbols, cs: &mut Concepts) -> Cid {
    let node = match (c, negated) {
        (Class::Named(n), false) => Nnf::Atom(intern(&mut syms.classes, n)),
        (Class::Named(n), true) => Nnf::NotAtom(intern(&mut syms.classes, n)),
        (Class::Complement(x), _) => return nnf(x, !negated, syms, cs),
        (Class::Intersection(a, b), false) => Nnf::And(vec![nnf(a, false, syms, cs), nnf(b, false, syms, cs)]),
        (Class::Intersection(a, b), true) => Nnf::Or(vec![nnf(a, true, syms, cs), nnf(b, true, syms, cs)]),
        (Class::Exists(r, x), false) => Nnf::Exists(role_of(r, syms), nnf(x, false, syms, cs)),
        (Class::Exists(r, x), true) => Nnf::All(role_of(r, syms), nnf(x, true, syms, cs)),
        (Class::HasValue(r, i), neg) => {
            let r = role_of(r, syms);
            let i = intern(&mut syms.individuals, i);
            if neg {
                Nnf::NotValue(r, i)
            } else {
                Nnf::Value(r, i)
            }
        }
    };
    cs.add(node)
}

impl Problem {
    fn concept(&self, c: Cid) -> &Nnf {
        &self.concepts.table[c as usize]
    }

    fn new_node(&self, g: &mut Graph, parent: NodeId) -> Result<NodeId, BudgetExceeded> {
        let n = self.created.get() + 1;
        if n > self.budget {
            return Err(BudgetExceeded);
        }
        self.created.set(n);
        let x = g.add_node(Some(parent));
        g.nodes[x].label.extend(self.tbox.iter().copied());
        Ok(x)
    }

    fn expand(&self, mut g: Graph) -> Result<bool, BudgetExceeded> {
        loop {
            if !self.saturate(&mut g) {
                return Ok(false);
            }
            if let Some((x, ds)) = self.open_disjunction(&g) {
                for d in ds {
                    let mut branch = g.clone();
                    branch.nodes[x].label.insert(d);
                    if self.expand(branch)? {
                        return Ok(true);
                    }
                }
                return Ok(false);
            }
            match self.open_existential(&g) {
                Some((x, r, c)) => {
                    let y = self.new_node(&mut g, x)?;
                    g.nodes[y].label.insert(c);
                    g.relate(x, r, y);
                }
                None => return Ok(true),
            }
        }
    }

    /// Applies the deterministic rules to a fixpoint; false on a clash.
    fn saturate(&self, g: &mut Graph) -> bool {
        loop {
            let mut changed = false;
            for x in 0..g.nodes.len() {
                let label: Vec<Cid> = g.nodes[x].label.iter().copied().collect();
                for c in label {
                    match self.concept(c) {
                        Nnf::And(cs) => {
                            for &d in cs {
                                changed |= g.nodes[x].label.insert(d);
                            }
                        }
                        Nnf::All(r, d) => {
                            for y in g.neighbours(x, *r) {
                                changed |= g.nodes[y].label.insert(*d);
                            }
                        }
                        Nnf::Value(r, i) => changed |= g.relate(x, *r, *i as NodeId),
                        _ => {}
                    }
                }
            }
            for &role in &self.symmetric {
                let pending: Vec<(NodeId, NodeId)> =
                    g.edges.iter().filter(|e| e.1 == role).map(|&(a, _, b)| (b, a)).collect();
                for (a, b) in pending {
                    changed |= g.add_edge(a, role, b);
                }
            }
            if self.clash(g) {
                return false;
            }
            if !changed {
                return true;
            }
        }
    }

    fn clash(&self, g: &Graph) -> bool {
        for (x, node) in g.nodes.iter().enumerate() {
            for &c in &node.label {
                match self.concept(c) {
                    Nnf::NotAtom(a) => {
                        let atom = self.concepts.index.get(&Nnf::Atom(*a));
                        if atom.is_some_and(|id| node.label.contains(id)) {
                            return true;
                        }
                    }
                    Nnf::NotValue(r, i) if g.related(x, *r, *i as NodeId) => return true,
                    _ => {}
                }
            }
        }
        for &role in &self.asymmetric {
            if g.edges.iter().any(|&(a, r, b)| r == role && g.edges.contains(&(b, role, a))) {
                return true;
            }
        }
        self.negated.iter().any(|e| g.edges.contains(e))
    }

    fn open_disjunction(&self, g: &Graph) -> Option<(NodeId, Vec<Cid>)> {
        for (x, node) in g.nodes.iter().enumerate() {
            for &c in &node.label {
                if let Nnf::Or(ds) = self.concept(c) {
                    if !ds.iter().any(|d| node.label.contains(d)) {
                        return Some((x, ds.clone()));
                    }
                }
            }
        }
        None
    }

    fn open_existential(&self, g: &Graph) -> Option<(NodeId, R, Cid)> {
        for x in 0..g.nodes.len() {
            if self.blocked(g, x) {
                continue;
            }
            for &c in &g.nodes[x].label {
                if let Nnf::Exists(r, d) = self.concept(c) {
                    if !g.neighbours(x, *r).iter().any(|&y| g.nodes[y].label.contains(d)) {
                        return Some((x, *r, *d));
                    }
                }
            }
        }
        None
    }

    fn anonymous(&self, x: NodeId) -> bool {
        x >= self.named
    }

    /// Blocked directly, or below a directly blocked ancestor.
    fn blocked(&self, g: &Graph, x: NodeId) -> bool {
        let mut cur = Some(x);
        while let Some(n) = cur {
            if self.directly_blocked(g, n) {
                return true;
            }
            cur = g.nodes[n].parent;
        }
        false
    }

    /// Pairwise blocking: an anonymous ancestor y with a parent such that
    /// x and y, and their parents, carry equal labels and equal edges.
    fn directly_blocked(&self, g: &Graph, x: NodeId) -> bool {
        if !self.anonymous(x) {
            return false;
        }
        let Some(px) = g.nodes[x].parent else { return false };
        let mut cur = px;
        while let Some(py) = g.nodes[cur].parent {
            let y = cur;
            if self.anonymous(y)
                && g.nodes[y].label == g.nodes[x].label
                && g.nodes[py].label == g.nodes[px].label
                && g.edge_roles(py, y) == g.edge_roles(px, x)
            {
                return true;
            }
            cur = py;
        }
        false
    }
}
