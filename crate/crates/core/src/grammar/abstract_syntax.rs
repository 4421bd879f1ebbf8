use rustc_hash::FxHashMap;

use super::tree::Tree;
use crate::error::TreeError;

pub type CatIdx = usize;
pub type FunIdx = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Function {
    pub name: String,
    pub args: Vec<CatIdx>,
    pub result: CatIdx,
    /// Defined by a lexicon page rather than the abstract module.
    pub lexical: bool,
}

/// Categories and typed functions shared by all concrete syntaxes.
#[derive(Debug, Clone, Default)]
pub struct AbstractSyntax {
    pub name: String,
    pub cats: Vec<String>,
    pub funs: Vec<Function>,
    pub start_cats: Vec<CatIdx>,
    cat_index: FxHashMap<String, CatIdx>,
    fun_index: FxHashMap<String, FunIdx>,
}

impl AbstractSyntax {
    pub fn new(name: impl Into<String>) -> Self {
        AbstractSyntax { name: name.into(), ..Default::default() }
    }

    /// Returns false if the category already exists.
    pub fn add_cat(&mut self, name: &str) -> bool {
        if self.cat_index.contains_key(name) {
            return false;
        }
        self.cat_index.insert(name.to_string(), self.cats.len());
        self.cats.push(name.to_string());
        true
    }

    pub fn add_fun(&mut self, f: Function) -> bool {
        if self.fun_index.contains_key(&f.name) {
            return false;
        }
        self.fun_index.insert(f.name.clone(), self.funs.len());
        self.funs.push(f);
        true
    }

    pub fn cat(&self, name: &str) -> Option<CatIdx> {
        self.cat_index.get(name).copied()
    }

    pub fn fun(&self, name: &str) -> Option<FunIdx> {
        self.fun_index.get(name).copied()
    }

    pub fn function(&self, name: &str) -> Option<&Function> {
        self.fun(name).map(|i| &self.funs[i])
    }

    pub fn cat_name(&self, c: CatIdx) -> &str {
        &self.cats[c]
    }

    pub fn is_start(&self, c: CatIdx) -> bool {
        self.start_cats.contains(&c)
    }

    pub fn lexical_functions(&self) -> impl Iterator<Item = &Function> {
        self.funs.iter().filter(|f| f.lexical)
    }

    /// Type-checks a tree and returns its category.
    pub fn infer(&self, t: &Tree) -> Result<CatIdx, TreeError> {
        let idx = self.fun(&t.fun).ok_or_else(|| TreeError::UnknownFunction(t.fun.clone()))?;
        let f = &self.funs[idx];
        if f.args.len() != t.args.len() {
            return Err(TreeError::Arity { fun: f.name.clone(), expected: f.args.len(), found: t.args.len() });
        }
        for (i, (arg, &expected)) in t.args.iter().zip(&f.args).enumerate() {
            let found = self.infer(arg)?;
            if found != expected {
                return Err(TreeError::Category {
                    fun: f.name.clone(),
                    index: i,
                    expected: self.cats[expected].clone(),
                    found: self.cats[found].clone(),
                });
            }
        }
        Ok(f.result)
    }

    /// Function names in the tree that this abstract syntax does not declare.
    pub fn missing_functions(&self, t: &Tree) -> Vec<String> {
        let mut out: Vec<String> = t
            .functions()
            .into_iter()
            .filter(|f| self.fun(f).is_none())
            .map(str::to_string)
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// All well-typed trees of `cat` with depth at most `max_depth`.
    pub fn enumerate_trees(&self, cat: CatIdx, max_depth: usize) -> Vec<Tree> {
        let mut out = Vec::new();
        self.for_each_tree(cat, max_depth, |t| out.push(t.clone()));
        out
    }

    /// Streams the trees of `enumerate_trees` without materializing the top layer.
    pub fn for_each_tree(&self, cat: CatIdx, max_depth: usize, mut visit: impl FnMut(&Tree)) {
        let below = if max_depth == 0 { None } else { Some(self.layers(max_depth - 1)) };
        for f in self.funs.iter().filter(|f| f.result == cat) {
            if f.args.is_empty() {
                visit(&Tree::leaf(&f.name));
                continue;
            }
            let Some(prev) = &below else { continue };
            let pools: Vec<&Vec<Tree>> = f.args.iter().map(|&a| &prev[a]).collect();
            if pools.iter().any(|p| p.is_empty()) {
                continue;
            }
            let mut idx = vec![0usize; pools.len()];
            let mut tree = Tree::app(&f.name, pools.iter().map(|p| p[0].clone()).collect());
            loop {
                visit(&tree);
                // odometer increment, last argument fastest
                let mut k = pools.len();
                loop {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < pools[k].len() {
                        tree.args[k] = pools[k][idx[k]].clone();
                        break;
                    }
                    idx[k] = 0;
                    tree.args[k] = pools[k][0].clone();
                    if k == 0 {
                        k = usize::MAX;
                        break;
                    }
                }
                if k == usize::MAX {
                    break;
                }
            }
        }
    }

    /// `layers(d)[c]` holds every tree of category `c` with depth at most `d`.
    pub fn layers(&self, max_depth: usize) -> Vec<Vec<Tree>> {
        let mut prev: Option<Vec<Vec<Tree>>> = None;
        for d in 0..=max_depth {
            let mut layer: Vec<Vec<Tree>> = vec![Vec::new(); self.cats.len()];
            for f in &self.funs {
                if f.args.is_empty() {
                    layer[f.result].push(Tree::leaf(&f.name));
                } else if d > 0 {
                    let p = prev.as_ref().expect("previous layer");
                    let pools: Vec<&Vec<Tree>> = f.args.iter().map(|&a| &p[a]).collect();
                    for combo in cartesian(&pools) {
                        layer[f.result].push(Tree::app(&f.name, combo));
                    }
                }
            }
            prev = Some(layer);
        }
        prev.unwrap_or_default()
    }
}

fn cartesian(pools: &[&Vec<Tree>]) -> Vec<Vec<Tree>> {
    let mut out: Vec<Vec<Tree>> = vec![Vec::new()];
    for pool in pools {
        let mut next = Vec::with_capacity(out.len() * pool.len());
        for prefix in &out {
            for t in pool.iter() {
                let mut v = prefix.clone();
                v.push(t.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}
