//! Grammar module source format: lexer and parser.
//!
//! Three module shapes are recognized:
//!
//! ```text
//! abstract Ace { flags startcat = S, Q ; cat S ; NP ; fun vpS : NP -> VP -> S ; }
//! concrete AceGer of Ace { param Num = Sg | Pl ; lincat N = {s : Num => Str} ; lin ... ; }
//! country_N = mkN "Land" "Länder" neuter ;
//! ```
//!
//! The last form is a lexicon page: a sequence of paradigm applications.

use crate::error::{Diagnostic, GrammarError};

#[derive(Debug, Clone, PartialEq)]
pub enum Module {
    Abstract(AbstractModule),
    Concrete(ConcreteModule),
    Lexicon(LexiconModule),
}

impl Module {
    pub fn name(&self) -> &str {
        match self {
            Module::Abstract(m) => &m.name,
            Module::Concrete(m) => &m.name,
            Module::Lexicon(m) => &m.name,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbstractModule {
    pub name: String,
    pub start_cats: Vec<(String, usize)>,
    pub cats: Vec<(String, usize)>,
    pub funs: Vec<FunDecl>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunDecl {
    pub name: String,
    pub args: Vec<String>,
    pub result: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcreteModule {
    pub name: String,
    pub of: String,
    pub params: Vec<ParamDecl>,
    pub lincats: Vec<LincatDecl>,
    pub lins: Vec<LinDecl>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamDecl {
    pub name: String,
    pub values: Vec<String>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LincatDecl {
    pub cat: String,
    pub ty: TypeExpr,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinDecl {
    pub fun: String,
    pub args: Vec<String>,
    pub body: Expr,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexiconModule {
    pub name: String,
    pub entries: Vec<LexEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexEntry {
    pub id: String,
    pub op: String,
    pub args: Vec<LexArg>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LexArg {
    Form(String),
    Tag(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TypeExpr {
    Str,
    Param(String),
    Record(Vec<(String, TypeExpr)>),
    Table(Box<TypeExpr>, Box<TypeExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// A string literal; whitespace inside separates tokens.
    Lit(String),
    Empty,
    Ident(String),
    Proj(Box<Expr>, String),
    Select(Box<Expr>, Box<Expr>),
    Concat(Box<Expr>, Box<Expr>),
    Record(Vec<(String, Expr)>),
    Lambda(Vec<String>, Box<Expr>),
    Table(Vec<CaseArm>),
    Case(Box<Expr>, Vec<CaseArm>),
    Variants(Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseArm {
    pub patterns: Vec<Pattern>,
    pub body: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    Con(String),
    Wild,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Sym(&'static str),
}

const SYMBOLS: &[&str] = &[
    "\\\\", "=>", "->", "++", "[]", "{", "}", "(", ")", ";", ":", ",", "=", "|", "!", ".", "_",
];

fn lex(module: &str, src: &str) -> Result<Vec<(Tok, usize)>, GrammarError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut line = 1;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c == '"' {
            let start_line = line;
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(GrammarError::single(module, start_line, "unterminated string literal")),
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some('\\') if chars.get(i + 1) == Some(&'"') => {
                        s.push('"');
                        i += 2;
                    }
                    Some('\n') => return Err(GrammarError::single(module, start_line, "newline in string literal")),
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            out.push((Tok::Str(s), start_line));
        } else if c.is_alphabetic() || (c == '_' && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())) {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                s.push(chars[i]);
                i += 1;
            }
            out.push((Tok::Ident(s), line));
        } else {
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(sym) => {
                    out.push((Tok::Sym(sym), line));
                    i += sym.chars().count();
                }
                None => return Err(GrammarError::single(module, line, format!("unexpected character `{c}`"))),
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    module: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostic>;

const KEYWORDS: &[&str] = &["cat", "fun", "flags", "param", "lincat", "lin", "table", "case", "of"];

impl<'a> Parser<'a> {
    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|t| t.1)
            .unwrap_or(1)
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(Diagnostic::new(self.module, self.line(), msg))
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek_at(&self, off: usize) -> Option<&Tok> {
        self.toks.get(self.pos + off).map(|t| &t.0)
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn at_keyword(&self, k: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn describe(&self) -> String {
        match self.peek() {
            None => "end of module".to_string(),
            Some(Tok::Ident(s)) => format!("`{s}`"),
            Some(Tok::Str(s)) => format!("\"{s}\""),
            Some(Tok::Sym(s)) => format!("`{s}`"),
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err(format!("expected identifier, found {}", self.describe())),
        }
    }

    fn keyword(&mut self, k: &str) -> PResult<()> {
        if self.at_keyword(k) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{k}`, found {}", self.describe()))
        }
    }

    /// True when the next tokens start a new judgement group or close the module.
    fn at_section_end(&self) -> bool {
        self.at_sym("}") || self.peek().is_none() || KEYWORDS[..6].iter().any(|k| self.at_keyword(k))
    }

    fn abstract_module(&mut self) -> PResult<AbstractModule> {
        self.keyword("abstract")?;
        let name = self.ident()?;
        self.expect_sym("{")?;
        let mut m = AbstractModule { name, start_cats: vec![], cats: vec![], funs: vec![] };
        while !self.eat_sym("}") {
            if self.peek().is_none() {
                return self.err("missing `}` at end of module");
            }
            if self.at_keyword("flags") {
                self.pos += 1;
                while !self.at_section_end() {
                    let flag = self.ident()?;
                    self.expect_sym("=")?;
                    if flag != "startcat" {
                        return self.err(format!("unknown flag `{flag}`"));
                    }
                    loop {
                        let line = self.line();
                        m.start_cats.push((self.ident()?, line));
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                    self.expect_sym(";")?;
                }
            } else if self.at_keyword("cat") {
                self.pos += 1;
                while !self.at_section_end() {
                    loop {
                        let line = self.line();
                        m.cats.push((self.ident()?, line));
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                    self.expect_sym(";")?;
                }
            } else if self.at_keyword("fun") {
                self.pos += 1;
                while !self.at_section_end() {
                    let line = self.line();
                    let mut names = vec![self.ident()?];
                    while self.eat_sym(",") {
                        names.push(self.ident()?);
                    }
                    self.expect_sym(":")?;
                    let mut cats = vec![self.ident()?];
                    while self.eat_sym("->") {
                        cats.push(self.ident()?);
                    }
                    self.expect_sym(";")?;
                    let result = cats.pop().expect("at least one category");
                    for name in names {
                        m.funs.push(FunDecl { name, args: cats.clone(), result: result.clone(), line });
                    }
                }
            } else {
                return self.err(format!("expected `cat`, `fun` or `flags`, found {}", self.describe()));
            }
        }
        self.expect_end()?;
        Ok(m)
    }

    fn expect_end(&self) -> PResult<()> {
        if self.peek().is_some() {
            return self.err(format!("unexpected {} after module end", self.describe()));
        }
        Ok(())
    }

    fn concrete_module(&mut self) -> PResult<ConcreteModule> {
        self.keyword("concrete")?;
        let name = self.ident()?;
        self.keyword("of")?;
        let of = self.ident()?;
        self.expect_sym("{")?;
        let mut m = ConcreteModule { name, of, params: vec![], lincats: vec![], lins: vec![] };
        while !self.eat_sym("}") {
            if self.peek().is_none() {
                return self.err("missing `}` at end of module");
            }
            if self.at_keyword("param") {
                self.pos += 1;
                while !self.at_section_end() {
                    let line = self.line();
                    let name = self.ident()?;
                    self.expect_sym("=")?;
                    let mut values = vec![self.ident()?];
                    while self.eat_sym("|") {
                        values.push(self.ident()?);
                    }
                    self.expect_sym(";")?;
                    m.params.push(ParamDecl { name, values, line });
                }
            } else if self.at_keyword("lincat") {
                self.pos += 1;
                while !self.at_section_end() {
                    let line = self.line();
                    let mut cats = vec![self.ident()?];
                    while self.eat_sym(",") {
                        cats.push(self.ident()?);
                    }
                    self.expect_sym("=")?;
                    let ty = self.type_expr()?;
                    self.expect_sym(";")?;
                    for cat in cats {
                        m.lincats.push(LincatDecl { cat, ty: ty.clone(), line });
                    }
                }
            } else if self.at_keyword("lin") {
                self.pos += 1;
                while !self.at_section_end() {
                    let line = self.line();
                    let fun = self.ident()?;
                    let mut args = Vec::new();
                    while !self.at_sym("=") {
                        if self.eat_sym("_") {
                            args.push("_".to_string());
                        } else {
                            args.push(self.ident()?);
                        }
                    }
                    self.expect_sym("=")?;
                    let body = self.expr()?;
                    self.expect_sym(";")?;
                    m.lins.push(LinDecl { fun, args, body, line });
                }
            } else {
                return self.err(format!("expected `param`, `lincat` or `lin`, found {}", self.describe()));
            }
        }
        self.expect_end()?;
        Ok(m)
    }

    fn type_expr(&mut self) -> PResult<TypeExpr> {
        let lhs = if self.eat_sym("{") {
            let mut fields = Vec::new();
            while !self.eat_sym("}") {
                let mut names = vec![self.ident()?];
                while self.eat_sym(",") {
                    names.push(self.ident()?);
                }
                self.expect_sym(":")?;
                let ty = self.type_expr()?;
                for n in names {
                    fields.push((n, ty.clone()));
                }
                if !self.eat_sym(";") && !self.at_sym("}") {
                    return self.err(format!("expected `;` or `}}` in record type, found {}", self.describe()));
                }
            }
            TypeExpr::Record(fields)
        } else if self.eat_sym("(") {
            let t = self.type_expr()?;
            self.expect_sym(")")?;
            t
        } else {
            let name = self.ident()?;
            if name == "Str" {
                TypeExpr::Str
            } else {
                TypeExpr::Param(name)
            }
        };
        if self.eat_sym("=>") {
            let rhs = self.type_expr()?;
            Ok(TypeExpr::Table(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        let first = self.concat()?;
        if !self.at_sym("|") {
            return Ok(first);
        }
        let mut alts = vec![first];
        while self.eat_sym("|") {
            alts.push(self.concat()?);
        }
        Ok(Expr::Variants(alts))
    }

    fn concat(&mut self) -> PResult<Expr> {
        let mut e = self.select()?;
        while self.eat_sym("++") {
            let rhs = self.select()?;
            e = Expr::Concat(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn select(&mut self) -> PResult<Expr> {
        let mut e = self.postfix()?;
        while self.eat_sym("!") {
            let rhs = self.postfix()?;
            e = Expr::Select(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.atom()?;
        while self.eat_sym(".") {
            let field = self.ident()?;
            e = Expr::Proj(Box::new(e), field);
        }
        Ok(e)
    }

    fn atom(&mut self) -> PResult<Expr> {
        match self.peek().cloned() {
            Some(Tok::Str(s)) => {
                self.pos += 1;
                Ok(Expr::Lit(s))
            }
            Some(Tok::Sym("[]")) => {
                self.pos += 1;
                Ok(Expr::Empty)
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Some(Tok::Sym("{")) => {
                self.pos += 1;
                let mut fields = Vec::new();
                while !self.eat_sym("}") {
                    let name = self.ident()?;
                    self.expect_sym("=")?;
                    let e = self.expr()?;
                    fields.push((name, e));
                    if !self.eat_sym(";") && !self.at_sym("}") {
                        return self.err(format!("expected `;` or `}}` in record, found {}", self.describe()));
                    }
                }
                Ok(Expr::Record(fields))
            }
            Some(Tok::Sym("\\\\")) => {
                self.pos += 1;
                let mut vars = vec![self.ident()?];
                while self.eat_sym(",") {
                    vars.push(self.ident()?);
                }
                self.expect_sym("=>")?;
                let body = self.expr()?;
                Ok(Expr::Lambda(vars, Box::new(body)))
            }
            Some(Tok::Ident(k)) if k == "table" => {
                self.pos += 1;
                Ok(Expr::Table(self.arms()?))
            }
            Some(Tok::Ident(k)) if k == "case" => {
                self.pos += 1;
                let scrutinee = self.expr()?;
                self.keyword("of")?;
                Ok(Expr::Case(Box::new(scrutinee), self.arms()?))
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(Expr::Ident(s))
            }
            _ => self.err(format!("expected expression, found {}", self.describe())),
        }
    }

    fn arms(&mut self) -> PResult<Vec<CaseArm>> {
        self.expect_sym("{")?;
        let mut arms = Vec::new();
        while !self.eat_sym("}") {
            let mut patterns = vec![self.pattern()?];
            while self.eat_sym("|") {
                patterns.push(self.pattern()?);
            }
            self.expect_sym("=>")?;
            let body = self.expr()?;
            arms.push(CaseArm { patterns, body });
            if !self.eat_sym(";") && !self.at_sym("}") {
                return self.err(format!("expected `;` or `}}` between branches, found {}", self.describe()));
            }
        }
        Ok(arms)
    }

    fn pattern(&mut self) -> PResult<Pattern> {
        if self.eat_sym("_") {
            Ok(Pattern::Wild)
        } else {
            Ok(Pattern::Con(self.ident()?))
        }
    }

    fn lexicon(&mut self, name: &str) -> PResult<LexiconModule> {
        let mut entries = Vec::new();
        while self.peek().is_some() {
            let line = self.line();
            let id = self.ident()?;
            self.expect_sym("=")?;
            let op = self.ident()?;
            let mut args = Vec::new();
            loop {
                match self.peek().cloned() {
                    Some(Tok::Str(s)) => {
                        self.pos += 1;
                        args.push(LexArg::Form(s));
                    }
                    Some(Tok::Ident(s)) => {
                        self.pos += 1;
                        args.push(LexArg::Tag(s));
                    }
                    _ => break,
                }
            }
            self.expect_sym(";")?;
            entries.push(LexEntry { id, op, args, line });
        }
        Ok(LexiconModule { name: name.to_string(), entries })
    }
}

/// Parses one grammar module. `name` is used for lexicon pages, which carry no header.
pub fn parse_module(name: &str, src: &str) -> Result<Module, GrammarError> {
    let toks = lex(name, src)?;
    let mut p = Parser { module: name, toks, pos: 0 };
    let result = match p.peek() {
        Some(Tok::Ident(k)) if k == "abstract" && matches!(p.peek_at(1), Some(Tok::Ident(_))) => {
            p.abstract_module().map(Module::Abstract)
        }
        Some(Tok::Ident(k)) if k == "concrete" && matches!(p.peek_at(1), Some(Tok::Ident(_))) => {
            p.concrete_module().map(Module::Concrete)
        }
        _ => p.lexicon(name).map(Module::Lexicon),
    };
    result.map_err(|d| GrammarError { diagnostics: vec![d] })
}
