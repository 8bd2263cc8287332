//! Text formats for algebras, operator families, tensors and remarks.
//!
//! A document is a sequence of blocks, each opened by a header line
//! (`algebra`, `lie`, `family`, `tensor` or `remark`) and closed by `end`.
//! `#` starts a comment. Coefficients use one expression syntax everywhere:
//! integers, `a/b`, `i`, parameters, `+ - * / ^`, parentheses, `sqrt(…)`,
//! juxtaposition as multiplication, basis labels such as `e2` or `e2*`, and
//! `(x)` for the tensor product of two vectors.
//!
//! ```text
//! algebra B1
//! dim 2
//! e2 * e1 = -e1
//! e2 * e2 = e1 - e2
//! end
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{AlgebraError, BilinearProduct, LieAlgebra, ProductNotation, StructureConstants, Vector};
use crate::operators::{LinearOperator, OperatorKind, ParametricFamily};
use crate::scalars::{GaussianRational, Scalar, ScalarError};
use crate::yangbaxter::Tensor2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("line {line}, column {col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("line {line}: product `{product}` defined twice")]
    DuplicateProduct { line: usize, product: String },
    #[error("line {line}: basis vector `{label}` out of range for dimension {dim}")]
    IndexOutOfRange { line: usize, label: String, dim: usize },
    #[error("line {line}: {source}")]
    Algebra { line: usize, source: AlgebraError },
    #[error("line {line}: {source}")]
    Scalar { line: usize, source: ScalarError },
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        col,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Equals,
    Tensor,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    col: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex(text: &str, line: usize) -> Result<Vec<Token>, FormatError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    let rest_is = |k: usize, s: &str| chars[k..].iter().take(s.chars().count()).copied().eq(s.chars());
    while k < chars.len() {
        let c = chars[k];
        let col = k + 1;
        if c.is_whitespace() {
            k += 1;
            continue;
        }
        let tok = if c.is_ascii_digit() {
            let start = k;
            while k < chars.len() && chars[k].is_ascii_digit() {
                k += 1;
            }
            let digits: String = chars[start..k].iter().collect();
            out.push(Token {
                tok: Tok::Num(digits.parse().expect("digits")),
                col,
            });
            continue;
        } else if c.is_ascii_alphabetic() {
            let start = k;
            while k < chars.len() && is_ident_char(chars[k]) {
                k += 1;
            }
            let mut name: String = chars[start..k].iter().collect();
            // `e2*` is a dual basis label unless the star multiplies what follows
            if k < chars.len() && chars[k] == '*' {
                let next = chars.get(k + 1).copied();
                let glued = match next {
                    None => true,
                    Some(n) if n.is_whitespace() || matches!(n, ')' | ',' | ']') => true,
                    Some('(') => rest_is(k + 1, "(x)"),
                    _ => false,
                };
                if glued {
                    name.push('*');
                    k += 1;
                }
            }
            out.push(Token {
                tok: Tok::Ident(name),
                col,
            });
            continue;
        } else if c == '(' && rest_is(k, "(x)") {
            k += 3;
            out.push(Token { tok: Tok::Tensor, col });
            continue;
        } else {
            match c {
                '+' => Tok::Plus,
                '-' | '−' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                '=' => Tok::Equals,
                '⊗' => Tok::Tensor,
                _ => return Err(syntax(line, col, format!("unexpected character `{c}`"))),
            }
        };
        out.push(Token { tok, col });
        k += 1;
    }
    Ok(out)
}

/// A parsed expression: a scalar, a vector, or an order-2 tensor.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scalar(Scalar),
    Vector(Vector<Scalar>),
    Tensor(Tensor2<Scalar>),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Scalar(_) => "scalar",
            Value::Vector(_) => "vector",
            Value::Tensor(_) => "tensor",
        }
    }

    fn is_zero_scalar(&self) -> bool {
        matches!(self, Value::Scalar(s) if s.is_zero())
    }
}

/// True for labels of the form `e<digits>` or `e<digits>*`.
fn basis_like(name: &str) -> bool {
    let core = name.strip_suffix('*').unwrap_or(name);
    core.len() > 1 && core.starts_with('e') && core[1..].chars().all(|c| c.is_ascii_digit())
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    eol: usize,
    basis: &'a [String],
    params: &'a mut BTreeSet<String>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.col).unwrap_or(self.eol)
    }

    fn err(&self, message: impl Into<String>) -> FormatError {
        syntax(self.line, self.col(), message)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), FormatError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn scalar_err(&self, source: ScalarError) -> FormatError {
        FormatError::Scalar { line: self.line, source }
    }

    fn expr(&mut self) -> Result<Value, FormatError> {
        let mut acc = self.term()?;
        loop {
            let sub = match self.peek() {
                Some(Tok::Plus) => false,
                Some(Tok::Minus) => true,
                _ => return Ok(acc),
            };
            let col = self.col();
            self.pos += 1;
            let rhs = self.term()?;
            let rhs = if sub { self.neg(rhs) } else { rhs };
            acc = self.add(acc, rhs, col)?;
        }
    }

    fn term(&mut self) -> Result<Value, FormatError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Tok::Tensor) {
            let col = self.col();
            self.pos += 1;
            let rhs = self.factor()?;
            acc = match (acc, rhs) {
                (Value::Vector(a), Value::Vector(b)) => Value::Tensor(Tensor2::outer(&a, &b)),
                (a, b) => {
                    return Err(syntax(
                        self.line,
                        col,
                        format!("(x) needs two vectors, found {} and {}", a.kind(), b.kind()),
                    ))
                }
            };
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Value, FormatError> {
        let mut acc = self.unary()?;
        loop {
            let col = self.col();
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = self.mul(acc, rhs, col)?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = self.div(acc, rhs, col)?;
                }
                Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::LParen) => {
                    let rhs = self.unary()?;
                    acc = self.mul(acc, rhs, col)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Value, FormatError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                let v = self.unary()?;
                Ok(self.neg(v))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Value, FormatError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let col = self.col();
        let e = match self.peek() {
            Some(Tok::Num(n)) => u32::try_from(n.clone()).map_err(|_| syntax(self.line, col, "exponent too large"))?,
            _ => return Err(self.err("expected a non-negative integer exponent")),
        };
        self.pos += 1;
        match base {
            Value::Scalar(s) => Ok(Value::Scalar(s.pow(e))),
            other => Err(syntax(self.line, col, format!("cannot raise a {} to a power", other.kind()))),
        }
    }

    fn atom(&mut self) -> Result<Value, FormatError> {
        let col = self.col();
        let tok = self.peek().cloned().ok_or_else(|| self.err("unexpected end of expression"))?;
        self.pos += 1;
        match tok {
            Tok::Num(n) => Ok(Value::Scalar(Scalar::constant(GaussianRational::from(n)))),
            Tok::LParen => {
                let v = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(v)
            }
            Tok::Ident(name) => self.ident(&name, col),
            other => Err(syntax(self.line, col, format!("unexpected {other:?}"))),
        }
    }

    fn ident(&mut self, name: &str, col: usize) -> Result<Value, FormatError> {
        if let Some(k) = self.basis.iter().position(|b| b == name) {
            return Ok(Value::Vector(Vector::basis(k)));
        }
        if name == "sqrt" && self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            let arg = self.expr()?;
            self.expect(Tok::RParen, "`)`")?;
            return match arg {
                Value::Scalar(s) => Scalar::sqrt_of(&s).map(Value::Scalar).map_err(|e| self.scalar_err(e)),
                other => Err(syntax(self.line, col, format!("sqrt of a {}", other.kind()))),
            };
        }
        if name == "i" {
            return Ok(Value::Scalar(Scalar::i()));
        }
        if basis_like(name) {
            return Err(FormatError::IndexOutOfRange {
                line: self.line,
                label: name.to_string(),
                dim: self.basis.len(),
            });
        }
        if name.ends_with('*') {
            return Err(syntax(self.line, col, format!("unknown dual basis label `{name}`")));
        }
        self.params.insert(name.to_string());
        Ok(Value::Scalar(Scalar::param(name)))
    }

    fn neg(&self, v: Value) -> Value {
        match v {
            Value::Scalar(s) => Value::Scalar(-s),
            Value::Vector(x) => Value::Vector(x.neg()),
            Value::Tensor(t) => Value::Tensor(t.scale(&-Scalar::one())),
        }
    }

    fn add(&self, a: Value, b: Value, col: usize) -> Result<Value, FormatError> {
        if a.is_zero_scalar() {
            return Ok(b);
        }
        if b.is_zero_scalar() {
            return Ok(a);
        }
        match (a, b) {
            (Value::Scalar(x), Value::Scalar(y)) => Ok(Value::Scalar(&x + &y)),
            (Value::Vector(x), Value::Vector(y)) => Ok(Value::Vector(x.add(&y))),
            (Value::Tensor(x), Value::Tensor(y)) => Ok(Value::Tensor(x.add(&y))),
            (x, y) => Err(syntax(self.line, col, format!("cannot add a {} and a {}", x.kind(), y.kind()))),
        }
    }

    fn mul(&self, a: Value, b: Value, col: usize) -> Result<Value, FormatError> {
        match (a, b) {
            (Value::Scalar(x), Value::Scalar(y)) => Ok(Value::Scalar(&x * &y)),
            (Value::Scalar(c), Value::Vector(v)) | (Value::Vector(v), Value::Scalar(c)) => Ok(Value::Vector(v.scale(&c))),
            (Value::Scalar(c), Value::Tensor(t)) | (Value::Tensor(t), Value::Scalar(c)) => Ok(Value::Tensor(t.scale(&c))),
            (x, y) => Err(syntax(self.line, col, format!("cannot multiply a {} by a {}", x.kind(), y.kind()))),
        }
    }

    fn div(&self, a: Value, b: Value, col: usize) -> Result<Value, FormatError> {
        let d = match b {
            Value::Scalar(d) => d,
            other => return Err(syntax(self.line, col, format!("cannot divide by a {}", other.kind()))),
        };
        let inv = d.try_inv().map_err(|e| self.scalar_err(e))?;
        self.mul(a, Value::Scalar(inv), col)
    }
}

/// Parse one expression over the given basis labels. Every identifier that
/// is not a basis label, `i` or `sqrt` is a parameter and is added to
/// `params`.
pub fn parse_expr(text: &str, line: usize, basis: &[String], params: &mut BTreeSet<String>) -> Result<Value, FormatError> {
    let toks = lex(text, line)?;
    parse_tokens(&toks, line, text.chars().count() + 1, basis, params)
}

fn parse_tokens(
    toks: &[Token],
    line: usize,
    eol: usize,
    basis: &[String],
    params: &mut BTreeSet<String>,
) -> Result<Value, FormatError> {
    let mut p = Parser {
        toks,
        pos: 0,
        line,
        eol,
        basis,
        params,
    };
    if toks.is_empty() {
        return Err(p.err("empty expression"));
    }
    let v = p.expr()?;
    if p.pos < toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(v)
}

/// Parse a standalone scalar, e.g. `-(n11 - n33)^2/n12`.
pub fn parse_scalar(text: &str) -> Result<Scalar, FormatError> {
    let mut params = BTreeSet::new();
    match parse_expr(text, 1, &[], &mut params)? {
        Value::Scalar(s) => Ok(s),
        other => Err(syntax(1, 1, format!("expected a scalar, found a {}", other.kind()))),
    }
}

fn expect_scalar(v: Value, line: usize) -> Result<Scalar, FormatError> {
    match v {
        Value::Scalar(s) => Ok(s),
        other => Err(syntax(line, 1, format!("expected a scalar, found a {}", other.kind()))),
    }
}

fn expect_vector(v: Value, line: usize) -> Result<Vector<Scalar>, FormatError> {
    match v {
        Value::Vector(x) => Ok(x),
        v if v.is_zero_scalar() => Ok(Vector::zero()),
        other => Err(syntax(line, 1, format!("expected a vector, found a {}", other.kind()))),
    }
}

fn expect_tensor(v: Value, line: usize) -> Result<Tensor2<Scalar>, FormatError> {
    match v {
        Value::Tensor(t) => Ok(t),
        v if v.is_zero_scalar() => Ok(Tensor2::zero()),
        other => Err(syntax(line, 1, format!("expected a tensor, found a {}", other.kind()))),
    }
}

/// An algebra block; `is_lie` for blocks written with brackets.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraDef {
    pub constants: StructureConstants<Scalar>,
    pub is_lie: bool,
    /// Free-form tags, e.g. `associative`.
    pub flags: Vec<String>,
}

impl AlgebraDef {
    pub fn id(&self) -> &str {
        &self.constants.name
    }

    /// The Lie algebra of a bracket block.
    pub fn lie(&self) -> Result<LieAlgebra<Scalar>, AlgebraError> {
        LieAlgebra::new(self.constants.clone())
    }
}

/// An operator family block together with the identity it is claimed to
/// satisfy.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyDef {
    pub family: ParametricFamily,
    pub kind: OperatorKind,
    /// Operator letter used in the rows, e.g. `N` or `R`.
    pub symbol: String,
    pub flags: Vec<String>,
}

/// A tensor over the double of a Lie algebra of dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorDef {
    pub id: String,
    pub algebra: String,
    pub dim: usize,
    pub params: Vec<String>,
    pub tensor: Tensor2<Scalar>,
    pub constraints: Vec<Scalar>,
    /// Operator whose skew-symmetrized tensor this is claimed to be.
    pub from: Option<String>,
    pub notes: Vec<String>,
    pub flags: Vec<String>,
}

/// Basis labels of the double: `e1 … en e1* … en*`.
pub fn double_basis(dim: usize) -> Vec<String> {
    (1..=dim)
        .map(|i| format!("e{i}"))
        .chain((1..=dim).map(|i| format!("e{i}*")))
        .collect()
}

/// Free text plus machine-checkable claims.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemarkDef {
    pub id: String,
    pub text: Vec<String>,
    /// Each check is a keyword followed by its arguments.
    pub checks: Vec<Vec<String>>,
    /// Discrepancies to surface in reports as findings.
    pub findings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    Algebra(AlgebraDef),
    Family(FamilyDef),
    Tensor(TensorDef),
    Remark(RemarkDef),
}

impl Block {
    pub fn id(&self) -> &str {
        match self {
            Block::Algebra(a) => a.id(),
            Block::Family(f) => &f.family.id,
            Block::Tensor(t) => &t.id,
            Block::Remark(r) => &r.id,
        }
    }
}

struct Line<'a> {
    no: usize,
    text: &'a str,
}

impl<'a> Line<'a> {
    fn keyword(&self) -> &'a str {
        self.text.split_whitespace().next().unwrap_or("")
    }

    /// Text after the keyword, trimmed.
    fn rest(&self) -> &'a str {
        let t = self.text.trim_start();
        t[self.keyword().len()..].trim()
    }

    fn words(&self) -> Vec<&'a str> {
        self.rest().split_whitespace().collect()
    }

    /// Column of the text after the keyword.
    fn rest_col(&self) -> usize {
        let lead = self.text.len() - self.text.trim_start().len();
        let rest = self.rest();
        match self.text[lead + self.keyword().len()..].find(rest) {
            Some(k) if !rest.is_empty() => lead + self.keyword().len() + k + 1,
            _ => self.text.chars().count() + 1,
        }
    }
}

fn shift_col(e: FormatError, by: usize) -> FormatError {
    match e {
        FormatError::Syntax { line, col, message } => FormatError::Syntax {
            line,
            col: col + by,
            message,
        },
        other => other,
    }
}

/// `kind` arguments of a header, e.g. `family N_A1^1 on A1`.
fn header_on(line: &Line, what: &str) -> Result<(String, String), FormatError> {
    match line.words().as_slice() {
        [id, "on", alg] => Ok((id.to_string(), alg.to_string())),
        _ => Err(syntax(line.no, 1, format!("expected `{what} ID on ALGEBRA`"))),
    }
}

fn parse_dim(line: &Line) -> Result<usize, FormatError> {
    match line.words().as_slice() {
        [d] => d
            .parse::<usize>()
            .ok()
            .filter(|d| *d > 0)
            .ok_or_else(|| syntax(line.no, line.rest_col(), "expected a positive dimension")),
        _ => Err(syntax(line.no, 1, "expected `dim N`")),
    }
}

fn words_owned(line: &Line) -> Vec<String> {
    line.words().into_iter().map(str::to_string).collect()
}

/// Split `require nonzero EXPR` / `require zero EXPR`.
fn require_kind<'a>(line: &Line<'a>) -> Result<(bool, &'a str, usize), FormatError> {
    let rest = line.rest();
    for (word, nonzero) in [("nonzero", true), ("zero", false)] {
        if let Some(expr) = rest.strip_prefix(word) {
            if expr.starts_with(char::is_whitespace) {
                let col = line.rest_col() + word.len() + (expr.len() - expr.trim_start().len());
                return Ok((nonzero, expr.trim(), col));
            }
        }
    }
    Err(syntax(line.no, line.rest_col(), "expected `require nonzero EXPR` or `require zero EXPR`"))
}

fn parse_require(line: &Line, basis: &[String], params: &mut BTreeSet<String>) -> Result<(bool, Scalar), FormatError> {
    let (nonzero, text, col) = require_kind(line)?;
    let v = parse_expr(text, line.no, basis, params).map_err(|e| shift_col(e, col - 1))?;
    Ok((nonzero, expect_scalar(v, line.no)?))
}

fn basis_index(name: &str, basis: &[String], line: usize, col: usize) -> Result<usize, FormatError> {
    if let Some(k) = basis.iter().position(|b| b == name) {
        return Ok(k);
    }
    if basis_like(name) {
        return Err(FormatError::IndexOutOfRange {
            line,
            label: name.to_string(),
            dim: basis.len(),
        });
    }
    Err(syntax(line, col, format!("`{name}` is not a basis label")))
}

fn parse_algebra_block(header: &Line, body: &[Line], is_lie: bool) -> Result<AlgebraDef, FormatError> {
    let name = match header.words().as_slice() {
        [n] => n.to_string(),
        _ => return Err(syntax(header.no, 1, "expected `algebra NAME` or `lie NAME`")),
    };
    let mut dim = None;
    let mut basis: Option<Vec<String>> = None;
    let mut declared: Vec<String> = Vec::new();
    let mut flags = Vec::new();
    for l in body {
        match l.keyword() {
            "dim" => dim = Some(parse_dim(l)?),
            "basis" => basis = Some(words_owned(l)),
            "params" => declared = words_owned(l),
            "flag" => flags.push(l.rest().to_string()),
            _ => {}
        }
    }
    let dim = dim.ok_or_else(|| syntax(header.no, 1, format!("algebra `{name}` has no `dim` line")))?;
    let alg_err = |line: usize| move |source: AlgebraError| FormatError::Algebra { line, source };
    let mut c = StructureConstants::new(&name, dim);
    if let Some(b) = basis {
        c = c.with_basis_names(b).map_err(alg_err(header.no))?;
    }
    c.params = declared.clone();
    let names = c.basis_names().to_vec();
    let mut used = BTreeSet::new();
    let mut seen = BTreeMap::new();
    for l in body {
        match l.keyword() {
            "dim" | "basis" | "params" | "flag" => continue,
            "require" => {
                let (nonzero, s) = parse_require(l, &[], &mut used)?;
                if !nonzero {
                    return Err(syntax(l.no, 1, "algebras only take `require nonzero`"));
                }
                c.constraints.push(s);
                continue;
            }
            _ => {}
        }
        let toks = lex(l.text, l.no)?;
        let label_at = |k: usize| -> Result<(String, usize), FormatError> {
            match toks.get(k) {
                Some(Token { tok: Tok::Ident(s), col }) => Ok((s.clone(), *col)),
                Some(t) => Err(syntax(l.no, t.col, "expected a basis label")),
                None => Err(syntax(l.no, l.text.len() + 1, "expected a basis label")),
            }
        };
        let tok_is = |k: usize, t: Tok| toks.get(k).map(|x| x.tok == t) == Some(true);
        let (a, b, rhs_at) = if is_lie {
            if !tok_is(0, Tok::LBracket) || !tok_is(2, Tok::Comma) || !tok_is(4, Tok::RBracket) || !tok_is(5, Tok::Equals) {
                return Err(syntax(l.no, 1, "expected `[X, Y] = EXPR`"));
            }
            (label_at(1)?, label_at(3)?, 6)
        } else {
            if !tok_is(1, Tok::Star) || !tok_is(3, Tok::Equals) {
                return Err(syntax(l.no, 1, "expected `X * Y = EXPR`"));
            }
            (label_at(0)?, label_at(2)?, 4)
        };
        let i = basis_index(&a.0, &names, l.no, a.1)?;
        let j = basis_index(&b.0, &names, l.no, b.1)?;
        let eol = l.text.chars().count() + 1;
        let v = expect_vector(parse_tokens(&toks[rhs_at..], l.no, eol, &names, &mut used)?, l.no)?;
        let mut define = |i: usize, j: usize, v: Vector<Scalar>| -> Result<(), FormatError> {
            if seen.insert((i, j), l.no).is_some() {
                let product = if is_lie {
                    format!("[{}, {}]", names[i], names[j])
                } else {
                    format!("{} * {}", names[i], names[j])
                };
                return Err(FormatError::DuplicateProduct { line: l.no, product });
            }
            c.set_product(i, j, v).map_err(alg_err(l.no))
        };
        if is_lie {
            if i == j && !v.is_zero() {
                return Err(syntax(l.no, 1, "a bracket [x, x] must be zero"));
            }
            define(j, i, v.neg())?;
        }
        define(i, j, v)?;
    }
    if let Some(p) = used.iter().find(|p| !declared.contains(p)) {
        return Err(syntax(header.no, 1, format!("algebra `{name}` uses undeclared parameter `{p}`")));
    }
    Ok(AlgebraDef {
        constants: c,
        is_lie,
        flags,
    })
}

fn parse_family_block(header: &Line, body: &[Line]) -> Result<FamilyDef, FormatError> {
    let (id, algebra) = header_on(header, "family")?;
    let mut params = Vec::new();
    let mut kind = OperatorKind::Nijenhuis;
    let mut symbol: Option<String> = None;
    let mut rows: Vec<&Line> = Vec::new();
    let mut requires: Vec<&Line> = Vec::new();
    let mut notes = Vec::new();
    let mut flags = Vec::new();
    let mut scratch = BTreeSet::new();
    for l in body {
        match l.keyword() {
            "params" => params = words_owned(l),
            "kind" => {
                let rest = l.rest();
                kind = if rest == "nijenhuis" {
                    OperatorKind::Nijenhuis
                } else if let Some(w) = rest.strip_prefix("rota-baxter") {
                    let v = parse_expr(w.trim(), l.no, &[], &mut scratch)?;
                    OperatorKind::RotaBaxter(expect_scalar(v, l.no)?)
                } else {
                    return Err(syntax(l.no, 1, "expected `kind nijenhuis` or `kind rota-baxter WEIGHT`"));
                };
            }
            "require" => requires.push(l),
            "note" => notes.push(l.rest().to_string()),
            "flag" => flags.push(l.rest().to_string()),
            kw => {
                match &symbol {
                    None => symbol = Some(kw.to_string()),
                    Some(s) if s == kw => {}
                    Some(s) => return Err(syntax(l.no, 1, format!("expected a row `{s} eK = …`, found `{kw}`"))),
                }
                rows.push(l);
            }
        }
    }
    let n = rows.len();
    if n == 0 {
        return Err(syntax(header.no, 1, format!("family `{id}` has no rows")));
    }
    let basis: Vec<String> = (1..=n).map(|i| format!("e{i}")).collect();
    let mut matrix: Vec<Option<Vector<Scalar>>> = vec![None; n];
    let mut used = BTreeSet::new();
    for l in rows {
        let rest = l.rest();
        let (lhs, rhs) = rest
            .split_once('=')
            .ok_or_else(|| syntax(l.no, l.rest_col(), "expected `eK = EXPR`"))?;
        let k = basis_index(lhs.trim(), &basis, l.no, l.rest_col())?;
        if matrix[k].is_some() {
            return Err(FormatError::DuplicateProduct {
                line: l.no,
                product: format!("{} {}", l.keyword(), basis[k]),
            });
        }
        let col = l.rest_col() + lhs.len() + 1;
        let v = parse_expr(rhs, l.no, &basis, &mut used).map_err(|e| shift_col(e, col - 1))?;
        matrix[k] = Some(expect_vector(v, l.no)?);
    }
    let rows: Vec<Vector<Scalar>> = matrix.into_iter().map(|r| r.expect("n distinct rows")).collect();
    let matrix = LinearOperator::new(rows).map_err(|source| FormatError::Algebra { line: header.no, source })?;
    let mut family = ParametricFamily::new(&id, &algebra, &[], matrix);
    family.params = params;
    family.notes = notes;
    for l in requires {
        let (nonzero, s) = parse_require(l, &basis, &mut used)?;
        if nonzero {
            family.constraints.push(s);
        } else {
            family.side_conditions.push(s);
        }
    }
    Ok(FamilyDef {
        family,
        kind,
        symbol: symbol.expect("at least one row"),
        flags,
    })
}

fn parse_tensor_block(header: &Line, body: &[Line]) -> Result<TensorDef, FormatError> {
    let (id, algebra) = header_on(header, "tensor")?;
    let dim = body
        .iter()
        .find(|l| l.keyword() == "dim")
        .map(parse_dim)
        .transpose()?
        .ok_or_else(|| syntax(header.no, 1, format!("tensor `{id}` has no `dim` line")))?;
    let basis = double_basis(dim);
    let mut def = TensorDef {
        id,
        algebra,
        dim,
        params: Vec::new(),
        tensor: Tensor2::zero(),
        constraints: Vec::new(),
        from: None,
        notes: Vec::new(),
        flags: Vec::new(),
    };
    let mut used = BTreeSet::new();
    let mut seen_r = false;
    for l in body {
        match l.keyword() {
            "dim" => {}
            "params" => def.params = words_owned(l),
            "from" => def.from = Some(l.rest().to_string()),
            "note" => def.notes.push(l.rest().to_string()),
            "flag" => def.flags.push(l.rest().to_string()),
            "require" => {
                let (nonzero, s) = parse_require(l, &basis, &mut used)?;
                if !nonzero {
                    return Err(syntax(l.no, 1, "tensors only take `require nonzero`"));
                }
                def.constraints.push(s);
            }
            "r" => {
                let rest = l.rest();
                let expr = rest
                    .strip_prefix('=')
                    .ok_or_else(|| syntax(l.no, l.rest_col(), "expected `r = EXPR`"))?;
                if seen_r {
                    return Err(syntax(l.no, 1, "tensor defined twice"));
                }
                seen_r = true;
                let v = parse_expr(expr, l.no, &basis, &mut used).map_err(|e| shift_col(e, l.rest_col()))?;
                def.tensor = expect_tensor(v, l.no)?;
            }
            kw => return Err(syntax(l.no, 1, format!("unexpected `{kw}` in tensor block"))),
        }
    }
    if !seen_r {
        return Err(syntax(header.no, 1, format!("tensor `{}` has no `r = …` line", def.id)));
    }
    Ok(def)
}

fn parse_remark_block(header: &Line, body: &[Line]) -> Result<RemarkDef, FormatError> {
    let id = match header.words().as_slice() {
        [id] => id.to_string(),
        _ => return Err(syntax(header.no, 1, "expected `remark ID`")),
    };
    let mut r = RemarkDef {
        id,
        text: Vec::new(),
        checks: Vec::new(),
        findings: Vec::new(),
    };
    for l in body {
        match l.keyword() {
            "text" => r.text.push(l.rest().to_string()),
            "check" => r.checks.push(words_owned(l)),
            "finding" => r.findings.push(l.rest().to_string()),
            kw => return Err(syntax(l.no, 1, format!("unexpected `{kw}` in remark block"))),
        }
    }
    Ok(r)
}

/// Parse every block of a document.
pub fn parse_document(text: &str) -> Result<Vec<Block>, FormatError> {
    let lines: Vec<Line> = text
        .lines()
        .enumerate()
        .map(|(k, raw)| Line {
            no: k + 1,
            text: raw.split('#').next().unwrap_or(""),
        })
        .filter(|l| !l.text.trim().is_empty())
        .collect();
    let mut blocks = Vec::new();
    let mut k = 0;
    while k < lines.len() {
        let header = &lines[k];
        let end = lines[k + 1..]
            .iter()
            .position(|l| l.text.trim() == "end")
            .map(|p| k + 1 + p)
            .ok_or_else(|| syntax(header.no, 1, format!("block `{}` is not closed by `end`", header.text.trim())))?;
        let body = &lines[k + 1..end];
        if let Some(inner) = body
            .iter()
            .find(|l| matches!(l.keyword(), "algebra" | "lie" | "family" | "tensor" | "remark"))
        {
            return Err(syntax(inner.no, 1, "block opened before the previous one was closed"));
        }
        let block = match header.keyword() {
            "algebra" => Block::Algebra(parse_algebra_block(header, body, false)?),
            "lie" => Block::Algebra(parse_algebra_block(header, body, true)?),
            "family" => Block::Family(parse_family_block(header, body)?),
            "tensor" => Block::Tensor(parse_tensor_block(header, body)?),
            "remark" => Block::Remark(parse_remark_block(header, body)?),
            kw => return Err(syntax(header.no, 1, format!("unknown block `{kw}`"))),
        };
        blocks.push(block);
        k = end + 1;
    }
    Ok(blocks)
}

/// The single algebra of a file in the algebra format.
pub fn parse_algebra_file(text: &str) -> Result<StructureConstants<Scalar>, FormatError> {
    let blocks = parse_document(text)?;
    match blocks.as_slice() {
        [Block::Algebra(a)] => Ok(a.constants.clone()),
        _ => Err(syntax(1, 1, "expected exactly one algebra block")),
    }
}

/// Every family block of a file.
pub fn parse_family_file(text: &str) -> Result<Vec<FamilyDef>, FormatError> {
    parse_document(text)?
        .into_iter()
        .map(|b| match b {
            Block::Family(f) => Ok(f),
            other => Err(syntax(1, 1, format!("`{}` is not a family block", other.id()))),
        })
        .collect()
}

/// Every tensor block of a file.
pub fn parse_tensor_file(text: &str) -> Result<Vec<TensorDef>, FormatError> {
    parse_document(text)?
        .into_iter()
        .map(|b| match b {
            Block::Tensor(t) => Ok(t),
            other => Err(syntax(1, 1, format!("`{}` is not a tensor block", other.id()))),
        })
        .collect()
}

fn push_list(out: &mut String, keyword: &str, items: &[String]) {
    if !items.is_empty() {
        out.push_str(&format!("{keyword} {}\n", items.join(" ")));
    }
}

fn default_basis(names: &[String]) -> bool {
    names.iter().enumerate().all(|(k, n)| *n == format!("e{}", k + 1))
}

pub fn print_algebra(a: &AlgebraDef) -> String {
    let c = &a.constants;
    let mut out = format!("{} {}\ndim {}\n", if a.is_lie { "lie" } else { "algebra" }, c.name, c.dim());
    if !default_basis(c.basis_names()) {
        push_list(&mut out, "basis", c.basis_names());
    }
    push_list(&mut out, "params", &c.params);
    let notation = if a.is_lie {
        ProductNotation::Bracket
    } else {
        ProductNotation::Dot
    };
    for line in c.product_lines(notation) {
        out.push_str(&line);
        out.push('\n');
    }
    for s in &c.constraints {
        out.push_str(&format!("require nonzero {s}\n"));
    }
    for f in &a.flags {
        out.push_str(&format!("flag {f}\n"));
    }
    out.push_str("end\n");
    out
}

pub fn print_family(f: &FamilyDef) -> String {
    let fam = &f.family;
    let mut out = format!("family {} on {}\n", fam.id, fam.algebra);
    push_list(&mut out, "params", &fam.params);
    if let OperatorKind::RotaBaxter(w) = &f.kind {
        out.push_str(&format!("kind rota-baxter {w}\n"));
    }
    let names: Vec<String> = (1..=fam.dim()).map(|i| format!("e{i}")).collect();
    for line in fam.row_lines(&names, &f.symbol) {
        out.push_str(&line);
        out.push('\n');
    }
    for s in &fam.constraints {
        out.push_str(&format!("require nonzero {s}\n"));
    }
    for s in &fam.side_conditions {
        out.push_str(&format!("require zero {s}\n"));
    }
    for n in &fam.notes {
        out.push_str(&format!("note {n}\n"));
    }
    for n in &f.flags {
        out.push_str(&format!("flag {n}\n"));
    }
    out.push_str("end\n");
    out
}

pub fn print_tensor(t: &TensorDef) -> String {
    let mut out = format!("tensor {} on {}\ndim {}\n", t.id, t.algebra, t.dim);
    push_list(&mut out, "params", &t.params);
    out.push_str(&format!("r = {}\n", t.tensor.display(&double_basis(t.dim))));
    for s in &t.constraints {
        out.push_str(&format!("require nonzero {s}\n"));
    }
    if let Some(f) = &t.from {
        out.push_str(&format!("from {f}\n"));
    }
    for n in &t.notes {
        out.push_str(&format!("note {n}\n"));
    }
    for n in &t.flags {
        out.push_str(&format!("flag {n}\n"));
    }
    out.push_str("end\n");
    out
}

pub fn print_remark(r: &RemarkDef) -> String {
    let mut out = format!("remark {}\n", r.id);
    for t in &r.text {
        out.push_str(&format!("text {t}\n"));
    }
    for c in &r.checks {
        out.push_str(&format!("check {}\n", c.join(" ")));
    }
    for f in &r.findings {
        out.push_str(&format!("finding {f}\n"));
    }
    out.push_str("end\n");
    out
}

pub fn print_block(b: &Block) -> String {
    match b {
        Block::Algebra(a) => print_algebra(a),
        Block::Family(f) => print_family(f),
        Block::Tensor(t) => print_tensor(t),
        Block::Remark(r) => print_remark(r),
    }
}

/// Blocks separated by blank lines.
pub fn print_document(blocks: &[Block]) -> String {
    blocks.iter().map(print_block).collect::<Vec<_>>().join("\n")
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print_block(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const B1: &str = "algebra B1\ndim 2\nbasis e1 e2\ne2 * e1 = -1 e1\ne2 * e2 = 1 e1 + -1 e2\nend\n";

    #[test]
    fn parses_the_b1_block() {
        let a = parse_algebra_file(B1).unwrap();
        assert_eq!(a.product_lines(ProductNotation::Dot), ["e2 * e1 = -e1", "e2 * e2 = e1 - e2"]);
    }

    #[test]
    fn empty_product_list_is_the_zero_algebra() {
        let a = parse_algebra_file("algebra A4\ndim 2\nend").unwrap();
        assert!(a.is_zero_product());
        assert_eq!(a.dim(), 2);
    }

    #[test]
    fn out_of_range_label() {
        let err = parse_algebra_file("algebra X\ndim 2\ne3 * e1 = e1\nend").unwrap_err();
        assert!(matches!(err, FormatError::IndexOutOfRange { line: 3, .. }), "{err:?}");
        let err = parse_algebra_file("algebra X\ndim 2\ne1 * e1 = e3\nend").unwrap_err();
        assert!(matches!(err, FormatError::IndexOutOfRange { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn duplicate_product() {
        let err = parse_algebra_file("algebra X\ndim 2\ne1 * e1 = e1\ne1 * e1 = e2\nend").unwrap_err();
        assert_eq!(
            err,
            FormatError::DuplicateProduct {
                line: 4,
                product: "e1 * e1".into()
            }
        );
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_algebra_file("algebra X\ndim 2\ne1 * e1 = e1 + ) \nend").unwrap_err();
        assert!(matches!(err, FormatError::Syntax { line: 3, col: 16, .. }), "{err:?}");
        let err = parse_algebra_file("algebra X\ndim 2\ne1 * e1 = e1 $\nend").unwrap_err();
        assert!(matches!(err, FormatError::Syntax { line: 3, col: 14, .. }), "{err:?}");
    }

    #[test]
    fn undeclared_algebra_parameter() {
        assert!(parse_algebra_file("algebra X\ndim 1\ne1 * e1 = k e1\nend").is_err());
        let a = parse_algebra_file("algebra X\ndim 1\nparams k\ne1 * e1 = k e1\nrequire nonzero k + 1\nend").unwrap();
        assert_eq!(a.constraints.len(), 1);
    }

    #[test]
    fn scalar_syntax() {
        let s = parse_scalar("-(n11 - n33)^2/n12").unwrap();
        assert_eq!(s.to_string(), "(-n11^2 + 2 n11 n33 - n33^2)/n12");
        assert_eq!(parse_scalar(&s.to_string()).unwrap(), s);
        assert_eq!(parse_scalar("(1 + i)(1 - i)").unwrap(), Scalar::from(2));
        let r = parse_scalar("sqrt(1 - 4 lambda)").unwrap();
        assert_eq!(parse_scalar(&(&r * &r).to_string()).unwrap(), parse_scalar("1 - 4 lambda").unwrap());
        assert_eq!(parse_scalar("sqrt(-1)").unwrap(), Scalar::i());
    }

    #[test]
    fn dual_labels_and_tensor_products() {
        let text = "tensor g1_r1 on g1\ndim 2\nparams n21\nr = n21 e1 (x) e2* - e2* (x) n21 e1\nrequire nonzero n21\nend\n";
        let t = &parse_tensor_file(text).unwrap()[0];
        assert_eq!(t.tensor.display(&double_basis(2)), "n21 e1 (x) e2* - n21 e2* (x) e1");
        let again = &parse_tensor_file(&print_tensor(t)).unwrap()[0];
        assert_eq!(again, t);
        let star = parse_expr("e2*e1", 1, &double_basis(2), &mut BTreeSet::new());
        assert!(star.is_err(), "vector times vector is not a scalar product");
    }

    #[test]
    fn family_round_trip() {
        let text = "family N_A1^1 on A1\nparams n11 n21\nN e1 = n11 e1\nN e2 = n21 e1 + (n11 + n21) e2\nrequire nonzero n21\nend\n";
        let f = &parse_family_file(text).unwrap()[0];
        assert_eq!(f.family.constraints, vec![Scalar::param("n21")]);
        assert_eq!(print_family(f), text);
        let rb = "family R_g1^1 on g1\nparams n21\nkind rota-baxter 0\nR e1 = 0\nR e2 = n21 e1\nend\n";
        let g = &parse_family_file(rb).unwrap()[0];
        assert_eq!(g.kind, OperatorKind::RotaBaxter(Scalar::zero()));
        assert_eq!(print_family(g), rb);
    }

    #[test]
    fn lie_blocks_fill_antisymmetry() {
        let d = &parse_document("lie g1\ndim 2\n[e1, e2] = e1\nend").unwrap()[0];
        let Block::Algebra(a) = d else { panic!() };
        assert!(a.is_lie);
        assert_eq!(a.constants.product_basis(1, 0), Vector::basis(0).neg());
        assert!(a.lie().is_ok());
        assert_eq!(parse_document(&print_block(d)).unwrap()[0], *d);
    }

    #[test]
    fn unclosed_block() {
        let err = parse_document("algebra X\ndim 1\n").unwrap_err();
        assert!(matches!(err, FormatError::Syntax { line: 1, .. }));
    }
}
