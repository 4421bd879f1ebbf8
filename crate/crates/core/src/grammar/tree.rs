//! Abstract syntax trees and their parenthesized text form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::TreeSyntaxError;

/// A function application tree over an abstract syntax.
///
/// The text form is prefix application with parenthesized subtrees:
/// `vpS (termNP X_Var) (v2VP contain_V2 (termNP Y_Var))`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tree {
    pub fun: String,
    pub args: Vec<Tree>,
}

impl Tree {
    pub fn leaf(fun: impl Into<String>) -> Self {
        Tree { fun: fun.into(), args: Vec::new() }
    }

    pub fn app(fun: impl Into<String>, args: Vec<Tree>) -> Self {
        Tree { fun: fun.into(), args }
    }

    /// Lexical constants have depth 0; each application adds one level.
    pub fn depth(&self) -> usize {
        self.args.iter().map(|a| a.depth() + 1).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.args.iter().map(Tree::size).sum::<usize>()
    }

    /// Visits every function name in the tree, root first.
    pub fn functions(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_functions(&mut out);
        out
    }

    fn collect_functions<'a>(&'a self, out: &mut Vec<&'a str>) {
        out.push(&self.fun);
        for a in &self.args {
            a.collect_functions(out);
        }
    }

    pub fn mentions(&self, fun: &str) -> bool {
        self.fun == fun || self.args.iter().any(|a| a.mentions(fun))
    }

    fn write_arg(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            write!(f, "{}", self.fun)
        } else {
            write!(f, "({self})")
        }
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fun)?;
        for a in &self.args {
            write!(f, " ")?;
            a.write_arg(f)?;
        }
        Ok(())
    }
}

impl FromStr for Tree {
    type Err = TreeSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tokens = lex_tree(s)?;
        let mut pos = 0;
        let tree = parse_app(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(TreeSyntaxError(format!("unexpected `{}` after tree", tokens[pos])));
        }
        Ok(tree)
    }
}

fn lex_tree(s: &str) -> Result<Vec<String>, TreeSyntaxError> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c if c.is_alphanumeric() || c == '_' || c == '\'' => cur.push(c),
            other => return Err(TreeSyntaxError(format!("unexpected character `{other}`"))),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    if out.is_empty() {
        return Err(TreeSyntaxError("empty tree".into()));
    }
    Ok(out)
}

fn parse_app(tokens: &[String], pos: &mut usize) -> Result<Tree, TreeSyntaxError> {
    let fun = match tokens.get(*pos) {
        Some(t) if t != "(" && t != ")" => t.clone(),
        Some(t) => return Err(TreeSyntaxError(format!("expected function name, found `{t}`"))),
        None => return Err(TreeSyntaxError("unexpected end of tree".into())),
    };
    *pos += 1;
    let mut args = Vec::new();
    while let Some(t) = tokens.get(*pos) {
        match t.as_str() {
            ")" => break,
            "(" => {
                *pos += 1;
                args.push(parse_app(tokens, pos)?);
                match tokens.get(*pos).map(String::as_str) {
                    Some(")") => *pos += 1,
                    _ => return Err(TreeSyntaxError("missing `)`".into())),
                }
            }
            name => {
                args.push(Tree::leaf(name));
                *pos += 1;
            }
        }
    }
    Ok(Tree { fun, args })
}

impl Serialize for Tree {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Tree {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
