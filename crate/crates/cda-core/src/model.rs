//! The SUT model: parameters with finite value domains plus a boolean
//! constraint formula, and the `.sut` text format it is read from.
//!
//! A model file looks like:
//!
//! ```text
//! model "shopping";
//! param address : domestic | international ;
//! param method  : same_day | two_day | seven_day ;
//! constraint address = international -> method != same_day ;
//! ```
//!
//! Values are symbolic in files and indexed internally: the j-th declared
//! value of a parameter always maps to index j. A model with no
//! `constraint` lines has the constant `TRUE` formula.

use std::fmt;

use thiserror::Error;

/// One test parameter and its ordered value domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parameter {
    pub name: String,
    /// Value names in declaration order; index in this list is the value index.
    pub values: Vec<String>,
}

impl Parameter {
    pub fn domain_size(&self) -> usize {
        self.values.len()
    }
}

/// Boolean constraint syntax over `param = value` / `param != value` atoms.
///
/// Atoms store resolved (parameter index, value index) pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintExpr {
    True,
    False,
    Eq(usize, usize),
    Neq(usize, usize),
    Not(Box<ConstraintExpr>),
    And(Box<ConstraintExpr>, Box<ConstraintExpr>),
    Or(Box<ConstraintExpr>, Box<ConstraintExpr>),
    Implies(Box<ConstraintExpr>, Box<ConstraintExpr>),
}

/// A full assignment of one value index per parameter.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TestCase {
    pub values: Vec<usize>,
}

impl TestCase {
    pub fn new(values: Vec<usize>) -> Self {
        TestCase { values }
    }

    pub fn value(&self, param: usize) -> usize {
        self.values[param]
    }
}

/// The system under test: parameters, domains, and the conjunction of all
/// declared constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SutModel {
    pub name: String,
    pub parameters: Vec<Parameter>,
    pub constraints: Vec<ConstraintExpr>,
}

impl SutModel {
    /// Number of parameters.
    pub fn k(&self) -> usize {
        self.parameters.len()
    }

    pub fn domain_size(&self, param: usize) -> usize {
        self.parameters[param].values.len()
    }

    /// Product of all domain sizes; `None` on overflow.
    pub fn total_assignments(&self) -> Option<u128> {
        self.parameters
            .iter()
            .try_fold(1u128, |acc, p| acc.checked_mul(p.values.len() as u128))
    }

    /// Checks a test case for shape only (length and per-parameter range).
    pub fn in_domain(&self, tc: &TestCase) -> bool {
        tc.values.len() == self.k()
            && tc
                .values
                .iter()
                .enumerate()
                .all(|(i, &v)| v < self.domain_size(i))
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.parameters.iter().position(|p| p.name == name)
    }

    pub fn value_index(&self, param: usize, name: &str) -> Option<usize> {
        self.parameters[param].values.iter().position(|v| v == name)
    }

    /// Value name for a (parameter, value-index) pair.
    pub fn value_name(&self, param: usize, value: usize) -> &str {
        &self.parameters[param].values[value]
    }

    /// Renders the model back into the `.sut` text form.
    ///
    /// Parsing the result yields a structurally equal model.
    pub fn to_dsl(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("model \"{}\";\n", self.name));
        for p in &self.parameters {
            out.push_str(&format!("param {} : {} ;\n", p.name, p.values.join(" | ")));
        }
        for c in &self.constraints {
            out.push_str(&format!("constraint {} ;\n", print_expr(self, c)));
        }
        out
    }
}

/// A parse failure with its 1-based source position.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Str(String),
    Semi,
    Colon,
    Pipe,
    LParen,
    RParen,
    Bang,
    Eq,
    Neq,
    AndAnd,
    OrOr,
    Arrow,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::Semi => write!(f, "`;`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Pipe => write!(f, "`|`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Bang => write!(f, "`!`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Neq => write!(f, "`!=`"),
            Tok::AndAnd => write!(f, "`&&`"),
            Tok::OrOr => write!(f, "`||`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

type Spanned = (Tok, usize, usize);

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    fn bump(&mut self) -> u8 {
        let b = self.src[self.pos];
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        b
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(b' ') | Some(b'\t') | Some(b'\r') | Some(b'\n') => {
                    self.bump();
                }
                Some(b'#') => {
                    while let Some(b) = self.peek() {
                        if b == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn next_token(&mut self) -> Result<Spanned, ParseError> {
        self.skip_trivia();
        let (line, col) = (self.line, self.col);
        let Some(b) = self.peek() else {
            return Ok((Tok::Eof, line, col));
        };
        let tok = match b {
            b';' => {
                self.bump();
                Tok::Semi
            }
            b':' => {
                self.bump();
                Tok::Colon
            }
            b'(' => {
                self.bump();
                Tok::LParen
            }
            b')' => {
                self.bump();
                Tok::RParen
            }
            b'=' => {
                self.bump();
                Tok::Eq
            }
            b'!' => {
                self.bump();
                if self.peek() == Some(b'=') {
                    self.bump();
                    Tok::Neq
                } else {
                    Tok::Bang
                }
            }
            b'&' => {
                self.bump();
                if self.peek() == Some(b'&') {
                    self.bump();
                    Tok::AndAnd
                } else {
                    return Err(self.error("expected `&&`"));
                }
            }
            b'|' => {
                if self.peek2() == Some(b'|') {
                    self.bump();
                    self.bump();
                    Tok::OrOr
                } else {
                    self.bump();
                    Tok::Pipe
                }
            }
            b'-' => {
                self.bump();
                if self.peek() == Some(b'>') {
                    self.bump();
                    Tok::Arrow
                } else {
                    return Err(self.error("expected `->`"));
                }
            }
            b'"' => {
                self.bump();
                let start = self.pos;
                loop {
                    match self.peek() {
                        None | Some(b'\n') => return Err(self.error("unterminated string")),
                        Some(b'"') => break,
                        Some(_) => {
                            self.bump();
                        }
                    }
                }
                // The source is valid UTF-8 and `"` is a one-byte
                // codepoint, so the span is too.
                let s = std::str::from_utf8(&self.src[start..self.pos])
                    .expect("string spans whole codepoints")
                    .to_owned();
                self.bump();
                Tok::Str(s)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut s = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || c == b'_' {
                        self.bump();
                        s.push(c as char);
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            }
            c => return Err(self.error(format!("unexpected character `{}`", c as char))),
        };
        Ok((tok, line, col))
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

/// Expression nesting limit; keeps adversarial inputs off the call stack.
const MAX_EXPR_DEPTH: usize = 256;
/// Atom limit per constraint; bounds the tree depth that evaluation and
/// printing recurse through on long `&&`/`||` chains.
const MAX_CONSTRAINT_ATOMS: usize = 4096;

struct Parser {
    toks: Vec<Spanned>,
    idx: usize,
    depth: usize,
    atoms: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.idx]
    }

    fn advance(&mut self) -> Spanned {
        let t = self.toks[self.idx].clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn error_at(&self, message: impl Into<String>) -> ParseError {
        let (_, line, col) = *self.peek();
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }

    fn expect(&mut self, want: &Tok) -> Result<(), ParseError> {
        if &self.peek().0 == want {
            self.advance();
            Ok(())
        } else {
            Err(self.error_at(format!("expected {}, found {}", want, self.peek().0)))
        }
    }

    fn expect_ident(&mut self) -> Result<String, ParseError> {
        match self.peek().0.clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok(s)
            }
            other => Err(self.error_at(format!("expected identifier, found {other}"))),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match &self.peek().0 {
            Tok::Ident(s) if s == kw => {
                self.advance();
                Ok(())
            }
            other => Err(self.error_at(format!("expected `{kw}`, found {other}"))),
        }
    }

    fn parse_model(&mut self) -> Result<SutModel, ParseError> {
        self.expect_keyword("model")?;
        let name = match self.peek().0.clone() {
            Tok::Str(s) => {
                self.advance();
                s
            }
            other => {
                return Err(self.error_at(format!("expected model name string, found {other}")))
            }
        };
        self.expect(&Tok::Semi)?;

        let mut parameters: Vec<Parameter> = Vec::new();
        // Parse all `param` declarations first so constraints can reference
        // any parameter regardless of ordering within the file.
        let mut pending_constraint_starts = Vec::new();
        loop {
            match self.peek().0.clone() {
                Tok::Eof => break,
                Tok::Ident(kw) if kw == "param" => {
                    self.advance();
                    let pname = self.expect_ident()?;
                    if parameters.iter().any(|p| p.name == pname) {
                        return Err(self.error_at(format!("duplicate parameter name `{pname}`")));
                    }
                    self.expect(&Tok::Colon)?;
                    let mut values = vec![self.expect_ident()?];
                    while self.peek().0 == Tok::Pipe {
                        self.advance();
                        values.push(self.expect_ident()?);
                    }
                    self.expect(&Tok::Semi)?;
                    for (i, v) in values.iter().enumerate() {
                        if values[..i].contains(v) {
                            return Err(self.error_at(format!(
                                "duplicate value `{v}` in parameter `{pname}`"
                            )));
                        }
                    }
                    if values.len() < 2 {
                        return Err(self.error_at(format!(
                            "parameter `{pname}` needs a domain of at least 2 values"
                        )));
                    }
                    parameters.push(Parameter {
                        name: pname,
                        values,
                    });
                }
                Tok::Ident(kw) if kw == "constraint" => {
                    self.advance();
                    pending_constraint_starts.push(self.idx);
                    // Skip to the terminating semicolon; re-parsed below.
                    let mut depth = 0usize;
                    loop {
                        match &self.peek().0 {
                            Tok::Semi if depth == 0 => {
                                self.advance();
                                break;
                            }
                            Tok::LParen => {
                                depth += 1;
                                self.advance();
                            }
                            Tok::RParen => {
                                depth = depth.saturating_sub(1);
                                self.advance();
                            }
                            Tok::Eof => return Err(self.error_at("unterminated constraint")),
                            _ => {
                                self.advance();
                            }
                        }
                    }
                }
                other => {
                    return Err(
                        self.error_at(format!("expected `param` or `constraint`, found {other}"))
                    )
                }
            }
        }
        if parameters.is_empty() {
            return Err(self.error_at("model declares no parameters"));
        }

        let mut model = SutModel {
            name,
            parameters,
            constraints: Vec::new(),
        };
        for start in pending_constraint_starts {
            self.idx = start;
            self.depth = 0;
            self.atoms = 0;
            let expr = self.parse_expr(&model)?;
            self.expect(&Tok::Semi)?;
            model.constraints.push(expr);
        }
        Ok(model)
    }

    // expr := or ("->" expr)?            (right associative)
    fn parse_expr(&mut self, m: &SutModel) -> Result<ConstraintExpr, ParseError> {
        self.depth += 1;
        if self.depth > MAX_EXPR_DEPTH {
            return Err(self.error_at(format!("constraint nesting deeper than {MAX_EXPR_DEPTH}")));
        }
        let result = (|| {
            let lhs = self.parse_or(m)?;
            if self.peek().0 == Tok::Arrow {
                self.advance();
                let rhs = self.parse_expr(m)?;
                Ok(ConstraintExpr::Implies(Box::new(lhs), Box::new(rhs)))
            } else {
                Ok(lhs)
            }
        })();
        self.depth -= 1;
        result
    }

    fn parse_or(&mut self, m: &SutModel) -> Result<ConstraintExpr, ParseError> {
        let mut lhs = self.parse_and(m)?;
        while self.peek().0 == Tok::OrOr {
            self.advance();
            let rhs = self.parse_and(m)?;
            lhs = ConstraintExpr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_and(&mut self, m: &SutModel) -> Result<ConstraintExpr, ParseError> {
        let mut lhs = self.parse_unary(m)?;
        while self.peek().0 == Tok::AndAnd {
            self.advance();
            let rhs = self.parse_unary(m)?;
            lhs = ConstraintExpr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self, m: &SutModel) -> Result<ConstraintExpr, ParseError> {
        if self.peek().0 == Tok::Bang {
            self.depth += 1;
            if self.depth > MAX_EXPR_DEPTH {
                return Err(
                    self.error_at(format!("constraint nesting deeper than {MAX_EXPR_DEPTH}"))
                );
            }
            self.advance();
            let inner = self.parse_unary(m);
            self.depth -= 1;
            return Ok(ConstraintExpr::Not(Box::new(inner?)));
        }
        self.parse_atom(m)
    }

    fn parse_atom(&mut self, m: &SutModel) -> Result<ConstraintExpr, ParseError> {
        self.atoms += 1;
        if self.atoms > MAX_CONSTRAINT_ATOMS {
            return Err(self.error_at(format!(
                "constraint has more than {MAX_CONSTRAINT_ATOMS} atoms"
            )));
        }
        match self.peek().0.clone() {
            Tok::LParen => {
                self.advance();
                let e = self.parse_expr(m)?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) if s == "TRUE" => {
                self.advance();
                Ok(ConstraintExpr::True)
            }
            Tok::Ident(s) if s == "FALSE" => {
                self.advance();
                Ok(ConstraintExpr::False)
            }
            Tok::Ident(pname) => {
                let Some(param) = m.param_index(&pname) else {
                    return Err(self.error_at(format!("unknown parameter `{pname}`")));
                };
                self.advance();
                let negated = match self.peek().0 {
                    Tok::Eq => false,
                    Tok::Neq => true,
                    _ => {
                        return Err(self
                            .error_at(format!("expected `=` or `!=` after parameter `{pname}`")))
                    }
                };
                self.advance();
                let vname = self.expect_ident()?;
                let Some(value) = m.value_index(param, &vname) else {
                    return Err(
                        self.error_at(format!("unknown value `{vname}` for parameter `{pname}`"))
                    );
                };
                Ok(if negated {
                    ConstraintExpr::Neq(param, value)
                } else {
                    ConstraintExpr::Eq(param, value)
                })
            }
            other => Err(self.error_at(format!("expected expression, found {other}"))),
        }
    }
}

/// Parses a model from `.sut` text.
pub fn parse_model(text: &str) -> Result<SutModel, ParseError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lexer = Lexer::new(text);
    let mut toks = Vec::new();
    loop {
        let t = lexer.next_token()?;
        let eof = t.0 == Tok::Eof;
        toks.push(t);
        if eof {
            break;
        }
    }
    let mut parser = Parser {
        toks,
        idx: 0,
        depth: 0,
        atoms: 0,
    };
    parser.parse_model()
}

/// Succeeds iff the model admits at least one valid test case.
pub fn validate_model(m: &SutModel) -> crate::Result<()> {
    match crate::constraints::complete(m, &crate::interactions::Interaction::empty()) {
        Some(_) => Ok(()),
        None => Err(crate::Error::UnsatisfiableModel),
    }
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

fn prec(e: &ConstraintExpr) -> u8 {
    match e {
        ConstraintExpr::Implies(..) => 1,
        ConstraintExpr::Or(..) => 2,
        ConstraintExpr::And(..) => 3,
        ConstraintExpr::Not(..) => 4,
        _ => 5,
    }
}

/// Renders a constraint expression using the model's symbolic value names.
pub fn print_expr(m: &SutModel, e: &ConstraintExpr) -> String {
    fn child(m: &SutModel, e: &ConstraintExpr, min: u8) -> String {
        if prec(e) < min {
            format!("({})", print_expr(m, e))
        } else {
            print_expr(m, e)
        }
    }
    match e {
        ConstraintExpr::True => "TRUE".into(),
        ConstraintExpr::False => "FALSE".into(),
        ConstraintExpr::Eq(p, v) => format!("{} = {}", m.parameters[*p].name, m.value_name(*p, *v)),
        ConstraintExpr::Neq(p, v) => {
            format!("{} != {}", m.parameters[*p].name, m.value_name(*p, *v))
        }
        ConstraintExpr::Not(inner) => format!("!{}", child(m, inner, 4)),
        // Left-associative chains print without parens on the left child.
        ConstraintExpr::And(a, b) => format!("{} && {}", child(m, a, 3), child(m, b, 4)),
        ConstraintExpr::Or(a, b) => format!("{} || {}", child(m, a, 2), child(m, b, 3)),
        // `->` is right-associative: parenthesize a left implication child.
        ConstraintExpr::Implies(a, b) => format!("{} -> {}", child(m, a, 2), child(m, b, 1)),
    }
}
