//! Text format for algebras and morphisms.
//!
//! ```text
//! name A(0)
//! param i = 0 in 0..
//! gen x1 : 4
//! gen y1, y2 : 27      # several generators of one degree
//! d y1 = x1^4*x2^2
//! volume x2^26*z' - x1^(15+i)*x2^24*y1
//! ```
//!
//! Expressions use `+ - * ^`, integer and rational (`3/4`) literals and
//! parentheses. `^` binds tightest and associates to the right; exponents
//! are non-negative integer expressions and may use parameters. Morphism
//! files consist of `f NAME = EXPR` lines.

use crate::gca::{AlgebraError, Element, FreeGca, Generator};
use crate::rational::{to_short, Q};
use crate::sullivan::SullivanAlgebra;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax,
    Semantic,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub struct DslError {
    pub line: usize,
    pub col: usize,
    pub kind: ErrorKind,
    pub message: String,
}

impl fmt::Display for DslError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ErrorKind::Syntax => "syntax error",
            ErrorKind::Semantic => "error",
        };
        write!(f, "{}:{}: {}: {}", self.line, self.col, kind, self.message)
    }
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> DslError {
    DslError { line, col, kind: ErrorKind::Syntax, message: msg.into() }
}

fn semantic(line: usize, col: usize, msg: impl Into<String>) -> DslError {
    DslError { line, col, kind: ErrorKind::Semantic, message: msg.into() }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
    Colon,
    Eq,
    Comma,
    DotDot,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn lex(line_no: usize, text: &str) -> Result<Vec<Token>, DslError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Token { tok: Tok::Int(s.parse().unwrap()), col });
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), col });
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '/' => Tok::Slash,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ':' => Tok::Colon,
            '=' => Tok::Eq,
            ',' => Tok::Comma,
            '.' if chars.get(i + 1) == Some(&'.') => {
                i += 1;
                Tok::DotDot
            }
            _ => return Err(syntax(line_no, col, format!("unexpected character {c:?}"))),
        };
        out.push(Token { tok, col });
        i += 1;
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum Expr {
    Num(Q, usize),
    Ident(String, usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, Box<Expr>, usize),
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.col).unwrap_or(self.end_col)
    }

    fn bump(&mut self) -> Option<&Token> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), DslError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(syntax(self.line, self.col(), format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize), DslError> {
        let col = self.col();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok((s, col))
            }
            _ => Err(syntax(self.line, col, format!("expected {what}"))),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn finish(&self) -> Result<(), DslError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(syntax(self.line, self.col(), "unexpected trailing input"))
        }
    }

    fn sum(&mut self) -> Result<Expr, DslError> {
        let mut lhs = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Expr::Neg(Box::new(self.product()?))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.product()?
            }
            _ => self.product()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.power()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
        }
        Ok(lhs)
    }

    fn power(&mut self) -> Result<Expr, DslError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            let col = self.col();
            self.pos += 1;
            let exp = self.power()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp), col));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, DslError> {
        let col = self.col();
        match self.bump().map(|t| t.tok.clone()) {
            Some(Tok::Int(n)) => {
                if self.peek() == Some(&Tok::Slash) {
                    self.pos += 1;
                    let dcol = self.col();
                    match self.bump().map(|t| t.tok.clone()) {
                        Some(Tok::Int(d)) if !d.is_zero() => Ok(Expr::Num(Q::new(n, d), col)),
                        Some(Tok::Int(_)) => Err(semantic(self.line, dcol, "zero denominator")),
                        _ => Err(syntax(self.line, dcol, "expected denominator")),
                    }
                } else {
                    Ok(Expr::Num(Q::from_integer(n), col))
                }
            }
            Some(Tok::Ident(s)) => Ok(Expr::Ident(s, col)),
            Some(Tok::LParen) => {
                let e = self.sum()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Some(Tok::Minus) => Err(syntax(self.line, col, "unary minus must start a sum; use parentheses")),
            Some(_) => Err(syntax(self.line, col, "expected a number, name or '('")),
            None => Err(syntax(self.line, col, "unexpected end of line")),
        }
    }
}

/// Names visible while evaluating expressions.
struct Scope<'a> {
    params: &'a HashMap<String, i64>,
    gca: Option<&'a FreeGca>,
    line: usize,
}

impl Scope<'_> {
    fn int(&self, e: &Expr) -> Result<BigInt, DslError> {
        let err = |c: usize, m: &str| semantic(self.line, c, m.to_string());
        Ok(match e {
            Expr::Num(q, c) => {
                if !q.is_integer() {
                    return Err(err(*c, "integer expected"));
                }
                q.to_integer()
            }
            Expr::Ident(s, c) => match self.params.get(s) {
                Some(v) => BigInt::from(*v),
                None => return Err(err(*c, &format!("unknown parameter {s}"))),
            },
            Expr::Add(a, b) => self.int(a)? + self.int(b)?,
            Expr::Sub(a, b) => self.int(a)? - self.int(b)?,
            Expr::Mul(a, b) => self.int(a)? * self.int(b)?,
            Expr::Neg(a) => -self.int(a)?,
            Expr::Pow(a, b, c) => {
                let base = self.int(a)?;
                let exp = self.exponent(b, *c)?;
                num_traits::pow(base, exp as usize)
            }
        })
    }

    fn exponent(&self, e: &Expr, col: usize) -> Result<u32, DslError> {
        let v = self.int(e)?;
        if v.is_negative() {
            return Err(semantic(self.line, col, "negative exponent"));
        }
        v.to_u32().ok_or_else(|| semantic(self.line, col, "exponent too large"))
    }

    fn element(&self, e: &Expr) -> Result<Element, DslError> {
        let gca = self.gca.expect("element scope");
        Ok(match e {
            Expr::Num(q, _) => gca.one().scale(q),
            Expr::Ident(s, c) => {
                if let Some(g) = gca.index_of(s) {
                    gca.generator_element(g)
                } else if let Some(v) = self.params.get(s) {
                    gca.one().scale(&Q::from_integer((*v).into()))
                } else {
                    return Err(semantic(self.line, *c, format!("unknown name {s}")));
                }
            }
            Expr::Add(a, b) => self.element(a)?.add(&self.element(b)?),
            Expr::Sub(a, b) => self.element(a)?.sub(&self.element(b)?),
            Expr::Mul(a, b) => gca.mul(&self.element(a)?, &self.element(b)?),
            Expr::Neg(a) => self.element(a)?.neg(),
            Expr::Pow(a, b, c) => {
                let n = self.exponent(b, *c)?;
                if let Expr::Ident(s, _) = a.as_ref() {
                    if let Some(g) = gca.index_of(s) {
                        if gca.is_odd(g) && n >= 2 {
                            return Err(semantic(self.line, *c, format!("odd generator {s} squared")));
                        }
                    }
                }
                gca.pow(&self.element(a)?, n)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamDecl {
    pub name: String,
    pub default: i64,
    pub min: Option<i64>,
    pub max: Option<i64>,
}

/// Parsed algebra with parameters already substituted.
#[derive(Clone, Debug)]
pub struct AlgebraFile {
    pub name: Option<String>,
    pub params: Vec<ParamDecl>,
    pub values: Vec<(String, i64)>,
    pub algebra: SullivanAlgebra,
    pub volume: Option<Element>,
}

struct Line {
    no: usize,
    toks: Vec<Token>,
    len: usize,
}

fn lines(text: &str) -> Result<Vec<Line>, DslError> {
    let mut out = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let toks = lex(i + 1, l)?;
        if !toks.is_empty() {
            out.push(Line { no: i + 1, toks, len: l.chars().count() + 1 });
        }
    }
    Ok(out)
}

fn parser(l: &Line) -> Parser<'_> {
    Parser { toks: &l.toks, pos: 1, line: l.no, end_col: l.len }
}

fn keyword(l: &Line) -> &str {
    match &l.toks[0].tok {
        Tok::Ident(s) => s,
        _ => "",
    }
}

pub fn parse_algebra(text: &str) -> Result<AlgebraFile, DslError> {
    parse_algebra_with(text, &[])
}

/// Parses with some parameters overridden; values are range-checked.
pub fn parse_algebra_with(text: &str, overrides: &[(String, i64)]) -> Result<AlgebraFile, DslError> {
    let lines = lines(text)?;
    let mut name = None;
    let mut params: Vec<ParamDecl> = Vec::new();
    let mut values: HashMap<String, i64> = HashMap::new();
    let empty = HashMap::new();
    for l in &lines {
        match keyword(l) {
            "name" => {
                let rest: String = text.lines().nth(l.no - 1).unwrap().trim_start()[4..]
                    .split('#')
                    .next()
                    .unwrap()
                    .trim()
                    .to_string();
                if rest.is_empty() {
                    return Err(syntax(l.no, l.len, "expected a name"));
                }
                name = Some(rest);
            }
            "param" => {
                let mut p = parser(l);
                let (pname, pcol) = p.ident("parameter name")?;
                p.expect(Tok::Eq, "'='")?;
                let scope = Scope { params: &empty, gca: None, line: l.no };
                let default = to_i64(scope.int(&p.sum()?)?, l.no, pcol)?;
                let (mut min, mut max) = (None, None);
                if let Some(Tok::Ident(kw)) = p.peek() {
                    if kw == "in" {
                        p.pos += 1;
                        if p.peek() != Some(&Tok::DotDot) {
                            min = Some(to_i64(scope.int(&p.sum()?)?, l.no, pcol)?);
                        }
                        p.expect(Tok::DotDot, "'..'")?;
                        if !p.at_end() {
                            max = Some(to_i64(scope.int(&p.sum()?)?, l.no, pcol)?);
                        }
                    }
                }
                p.finish()?;
                if params.iter().any(|q| q.name == pname) {
                    return Err(semantic(l.no, pcol, format!("parameter {pname} declared twice")));
                }
                values.insert(pname.clone(), default);
                params.push(ParamDecl { name: pname, default, min, max });
            }
            _ => {}
        }
    }
    for (k, v) in overrides {
        if !params.iter().any(|p| &p.name == k) {
            return Err(semantic(0, 0, format!("no parameter named {k}")));
        }
        values.insert(k.clone(), *v);
    }
    for p in &params {
        let v = values[&p.name];
        if p.min.is_some_and(|m| v < m) || p.max.is_some_and(|m| v > m) {
            let range = format!(
                "{}..{}",
                p.min.map(|m| m.to_string()).unwrap_or_default(),
                p.max.map(|m| m.to_string()).unwrap_or_default()
            );
            return Err(semantic(0, 0, format!("parameter {} = {v} outside the range {range}", p.name)));
        }
    }

    let mut gens = Vec::new();
    let mut gen_lines = Vec::new();
    for l in &lines {
        if keyword(l) != "gen" {
            continue;
        }
        let mut p = parser(l);
        let mut names = vec![p.ident("generator name")?];
        while p.peek() == Some(&Tok::Comma) {
            p.pos += 1;
            names.push(p.ident("generator name")?);
        }
        p.expect(Tok::Colon, "':'")?;
        let dcol = p.col();
        let scope = Scope { params: &values, gca: None, line: l.no };
        let deg = scope.int(&p.sum()?)?;
        p.finish()?;
        let deg = deg.to_u32().filter(|&d| d >= 2).ok_or_else(|| {
            semantic(l.no, dcol, format!("generator degree {deg} must be an integer at least 2"))
        })?;
        for (n, col) in names {
            if values.contains_key(&n) {
                return Err(semantic(l.no, col, format!("{n} is already a parameter")));
            }
            if gens.iter().any(|g: &Generator| g.name == n) {
                return Err(semantic(l.no, col, format!("generator {n} declared twice")));
            }
            gens.push(Generator::new(n, deg));
            gen_lines.push(l.no);
        }
    }
    let gca = FreeGca::new(gens.clone()).map_err(|e| semantic(0, 0, e.to_string()))?;
    let scope = |line| Scope { params: &values, gca: Some(&gca), line };

    let mut diff: Vec<Option<Element>> = vec![None; gens.len()];
    let mut volume = None;
    for l in &lines {
        match keyword(l) {
            "name" | "param" | "gen" => {}
            "d" => {
                let mut p = parser(l);
                let (g, gcol) = p.ident("generator name")?;
                p.expect(Tok::Eq, "'='")?;
                let ecol = p.col();
                let expr = p.sum()?;
                p.finish()?;
                let gi = gca.index_of(&g).ok_or_else(|| semantic(l.no, gcol, format!("unknown generator {g}")))?;
                if diff[gi].is_some() {
                    return Err(semantic(l.no, gcol, format!("d {g} given twice")));
                }
                let e = scope(l.no).element(&expr)?;
                let expected = gens[gi].degree + 1;
                match gca.element_degree(&e) {
                    Err(_) => {
                        return Err(semantic(
                            l.no,
                            ecol,
                            format!("d {g} is not homogeneous; it must have degree {expected}"),
                        ))
                    }
                    Ok(Some(found)) if found != expected => {
                        return Err(semantic(
                            l.no,
                            ecol,
                            format!("degree mismatch: d {g} must have degree {expected}, found {found}"),
                        ))
                    }
                    _ => {}
                }
                diff[gi] = Some(e);
            }
            "volume" => {
                let mut p = parser(l);
                let expr = p.sum()?;
                p.finish()?;
                if volume.is_some() {
                    return Err(semantic(l.no, 1, "volume given twice"));
                }
                volume = Some(scope(l.no).element(&expr)?);
            }
            other => {
                return Err(syntax(l.no, l.toks[0].col, format!("unknown declaration {other:?}")));
            }
        }
    }
    let diff = diff.into_iter().map(|d| d.unwrap_or_default()).collect();
    let algebra = SullivanAlgebra::new(name.clone().unwrap_or_default(), gens, diff)
        .map_err(|e: AlgebraError| semantic(0, 0, e.to_string()))?;
    let values = params.iter().map(|p| (p.name.clone(), values[&p.name])).collect();
    Ok(AlgebraFile { name, params, values, algebra, volume })
}

fn to_i64(v: BigInt, line: usize, col: usize) -> Result<i64, DslError> {
    v.to_i64().ok_or_else(|| semantic(line, col, "integer out of range"))
}

/// Parses a single expression over the generators of `alg`.
pub fn parse_element(alg: &SullivanAlgebra, text: &str) -> Result<Element, DslError> {
    let toks = lex(1, text)?;
    let mut p = Parser { toks: &toks, pos: 0, line: 1, end_col: text.chars().count() + 1 };
    let expr = p.sum()?;
    p.finish()?;
    let params = HashMap::new();
    Scope { params: &params, gca: Some(alg.gca()), line: 1 }.element(&expr)
}

/// Parses `f NAME = EXPR` lines into one image per generator.
pub fn parse_morphism(alg: &SullivanAlgebra, text: &str) -> Result<Vec<Element>, DslError> {
    let gca = alg.gca();
    let params = HashMap::new();
    let mut images: Vec<Option<Element>> = vec![None; alg.ngens()];
    for l in lines(text)? {
        if keyword(&l) != "f" {
            return Err(syntax(l.no, l.toks[0].col, "expected 'f NAME = EXPR'"));
        }
        let mut p = parser(&l);
        let (g, gcol) = p.ident("generator name")?;
        p.expect(Tok::Eq, "'='")?;
        let ecol = p.col();
        let expr = p.sum()?;
        p.finish()?;
        let gi = gca.index_of(&g).ok_or_else(|| semantic(l.no, gcol, format!("unknown generator {g}")))?;
        if images[gi].is_some() {
            return Err(semantic(l.no, gcol, format!("f {g} given twice")));
        }
        let e = Scope { params: &params, gca: Some(gca), line: l.no }.element(&expr)?;
        let expected = alg.generators()[gi].degree;
        match gca.element_degree(&e) {
            Ok(Some(found)) if found != expected => {
                return Err(semantic(
                    l.no,
                    ecol,
                    format!("degree mismatch: f {g} must have degree {expected}, found {found}"),
                ))
            }
            Err(_) => return Err(semantic(l.no, ecol, format!("f {g} is not homogeneous"))),
            _ => {}
        }
        images[gi] = Some(e);
    }
    images
        .into_iter()
        .enumerate()
        .map(|(g, e)| {
            e.ok_or_else(|| semantic(0, 0, format!("no image given for {}", alg.generators()[g].name)))
        })
        .collect()
}

/// Prints an algebra in the file format; parameters are already substituted.
pub fn print_algebra(alg: &SullivanAlgebra, volume: Option<&Element>) -> String {
    let mut s = String::new();
    if !alg.name().is_empty() {
        s.push_str(&format!("name {}\n", alg.name()));
    }
    for g in alg.generators() {
        s.push_str(&format!("gen {} : {}\n", g.name, g.degree));
    }
    for (g, dg) in alg.differentials().iter().enumerate() {
        if !dg.is_zero() {
            s.push_str(&format!("d {} = {}\n", alg.generators()[g].name, alg.gca().fmt_element(dg)));
        }
    }
    if let Some(v) = volume {
        s.push_str(&format!("volume {}\n", alg.gca().fmt_element(v)));
    }
    s
}

pub fn print_morphism(alg: &SullivanAlgebra, images: &[Element]) -> String {
    images
        .iter()
        .enumerate()
        .map(|(g, e)| format!("f {} = {}\n", alg.generators()[g].name, alg.gca().fmt_element(e)))
        .collect()
}

/// Short textual form of a rational, as accepted by the expression grammar.
pub fn fmt_scalar(q: &Q) -> String {
    if q.is_integer() || !q.is_negative() {
        to_short(q)
    } else {
        format!("-{}", to_short(&-q))
    }
}
