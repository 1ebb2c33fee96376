//! The `.cvx` problem language: a recursive descent parser and a printer
//! whose output parses back to the same tree.
//!
//! ```text
//! problem     := vardecl* objective constraints?
//! vardecl     := "var" IDENT ("[" INT "]")? "nonneg"? ";"
//! objective   := ("minimize" | "maximize") expr ";"
//! constraints := "subject" "to" (expr REL expr ";")+        REL := "<=" | ">=" | "=="
//! expr        := term (("+" | "-") term)*
//! term        := factor ("*" factor)*
//! factor      := NUMBER | "[" NUMBER ("," NUMBER)* "]" | IDENT | IDENT "[" INT "]"
//!              | ATOM "(" expr ("," expr)* ")" | "(" expr ")" ("[" INT "]")? | "-" factor
//! ATOM        := abs | max | sum | square | sum_squares | norm2
//! ```
//!
//! `#` starts a comment running to the end of the line. A `-` directly in
//! front of a number literal is folded into the literal.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::error::ExprError;
use crate::expr::{build, Atom, Constraint, Expr, ExprKind, Problem, Relation, Sense, VarId, Variable};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("{0}")]
    Expr(ExprError),
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("{span}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: SourceSpan,
}

const ATOMS: [&str; 6] = ["abs", "max", "sum", "square", "sum_squares", "norm2"];
const KEYWORDS: [&str; 6] = ["var", "minimize", "maximize", "subject", "to", "nonneg"];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Int(usize),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Plus,
    Minus,
    Star,
    Le,
    Ge,
    EqEq,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(n) => format!("number {n}"),
            Tok::Int(n) => format!("number {n}"),
            Tok::Eof => "end of input".to_string(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::EqEq => "`==`".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let start = SourceSpan { line, column: col, length: 1 };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
                col += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let begin = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[begin..i].iter().collect();
            let span = SourceSpan { length: i - begin, ..start };
            col += i - begin;
            out.push(Token { tok: Tok::Ident(word), span });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let begin = i;
            let mut integral = true;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                integral = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    integral = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let raw: String = chars[begin..i].iter().collect();
            let span = SourceSpan { length: i - begin, ..start };
            col += i - begin;
            let value: f64 = raw
                .parse()
                .map_err(|_| ParseError { kind: ParseErrorKind::Syntax(format!("malformed number `{raw}`")), span })?;
            if !value.is_finite() {
                return Err(ParseError {
                    kind: ParseErrorKind::Syntax(format!("number `{raw}` is out of range")),
                    span,
                });
            }
            let tok = match raw.parse::<usize>() {
                Ok(n) if integral => Tok::Int(n),
                _ => Tok::Number(value),
            };
            out.push(Token { tok, span });
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let (tok, len) = match two.as_str() {
            "<=" => (Tok::Le, 2),
            ">=" => (Tok::Ge, 2),
            "==" => (Tok::EqEq, 2),
            _ => match c {
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                '[' => (Tok::LBracket, 1),
                ']' => (Tok::RBracket, 1),
                ',' => (Tok::Comma, 1),
                ';' => (Tok::Semi, 1),
                '+' => (Tok::Plus, 1),
                '-' => (Tok::Minus, 1),
                '*' => (Tok::Star, 1),
                _ => {
                    return Err(ParseError {
                        kind: ParseErrorKind::Syntax(format!("unexpected character `{c}`")),
                        span: SourceSpan { length: 1, ..start },
                    })
                }
            },
        };
        out.push(Token { tok, span: SourceSpan { length: len, ..start } });
        i += len;
        col += len;
    }
    out.push(Token { tok: Tok::Eof, span: SourceSpan { line, column: col, length: 0 } });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    vars: BTreeMap<String, Variable>,
    depth: usize,
}

/// Nesting bound for expressions.
const MAX_DEPTH: usize = 200;
/// Largest accepted variable dimension.
pub const MAX_DIM: usize = 10_000;

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(ParseError { kind: ParseErrorKind::Syntax(msg.into()), span: self.span() })
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            self.error(format!("expected {}, found {}", tok.describe(), self.peek().describe()))
        }
    }

    fn is_keyword(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == word)
    }

    fn expr_err<T>(span: SourceSpan, e: ExprError) -> PResult<T> {
        Err(ParseError { kind: ParseErrorKind::Expr(e), span })
    }

    fn problem(&mut self) -> PResult<Problem> {
        let mut decls = Vec::new();
        while self.is_keyword("var") {
            self.bump();
            let span = self.span();
            let name = match self.bump().tok {
                Tok::Ident(n) => n,
                other => {
                    return Err(ParseError {
                        kind: ParseErrorKind::Syntax(format!("expected variable name, found {}", other.describe())),
                        span,
                    })
                }
            };
            if KEYWORDS.contains(&name.as_str()) || ATOMS.contains(&name.as_str()) {
                return Err(ParseError { kind: ParseErrorKind::Syntax(format!("`{name}` is reserved")), span });
            }
            if self.vars.contains_key(&name) {
                return Err(ParseError { kind: ParseErrorKind::Expr(ExprError::DuplicateVariable { name }), span });
            }
            let mut dim = 1;
            if *self.peek() == Tok::LBracket {
                self.bump();
                let dspan = self.span();
                dim = match self.bump().tok {
                    Tok::Int(n) if (1..=MAX_DIM).contains(&n) => n,
                    _ => {
                        return Err(ParseError {
                            kind: ParseErrorKind::Syntax(format!("dimension must be an integer in 1..={MAX_DIM}")),
                            span: dspan,
                        })
                    }
                };
                self.expect(Tok::RBracket)?;
            }
            let id = VarId(decls.len() as u32);
            let mut var = Variable::new(id, name.clone(), dim);
            if self.is_keyword("nonneg") {
                self.bump();
                var = var.nonneg();
            }
            self.expect(Tok::Semi)?;
            self.vars.insert(name, var.clone());
            decls.push(var);
        }
        let sense = if self.is_keyword("minimize") {
            Sense::Minimize
        } else if self.is_keyword("maximize") {
            Sense::Maximize
        } else {
            return self.error(format!("expected `var`, `minimize` or `maximize`, found {}", self.peek().describe()));
        };
        self.bump();
        let obj_span = self.span();
        let objective = self.expr()?;
        if objective.dim() != 1 {
            return Self::expr_err(obj_span, ExprError::NonScalarObjective { dim: objective.dim() });
        }
        self.expect(Tok::Semi)?;
        let mut constraints = Vec::new();
        if self.is_keyword("subject") {
            self.bump();
            if !self.is_keyword("to") {
                return self.error("expected `to` after `subject`");
            }
            self.bump();
            loop {
                let cspan = self.span();
                let lhs = self.expr()?;
                let rel = match self.peek() {
                    Tok::Le => Relation::Le,
                    Tok::Ge => Relation::Ge,
                    Tok::EqEq => Relation::Eq,
                    other => return self.error(format!("expected relation, found {}", other.describe())),
                };
                self.bump();
                let rhs = self.expr()?;
                if matches!(self.peek(), Tok::Le | Tok::Ge | Tok::EqEq) {
                    return self.error("chained relations are not supported");
                }
                let c = Constraint::new(rel, lhs, rhs).or_else(|e| Self::expr_err(cspan, e))?;
                constraints.push(c);
                self.expect(Tok::Semi)?;
                if *self.peek() == Tok::Eof {
                    break;
                }
            }
        }
        if *self.peek() != Tok::Eof {
            return self.error(format!("unexpected {}", self.peek().describe()));
        }
        Problem::new(sense, objective, constraints, decls).or_else(|e| Self::expr_err(obj_span, e))
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.error("expression nested too deeply");
        }
        let out = self.additive();
        self.depth -= 1;
        out
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let atom = match self.peek() {
                Tok::Plus => Atom::Add,
                Tok::Minus => Atom::Sub,
                _ => return Ok(lhs),
            };
            let span = self.bump().span;
            let rhs = self.term()?;
            lhs = Expr::apply(atom, vec![lhs, rhs]).or_else(|e| Self::expr_err(span, e))?;
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.factor()?;
        while *self.peek() == Tok::Star {
            let span = self.bump().span;
            let rhs = self.factor()?;
            lhs = build::mul(lhs, rhs).or_else(|e| Self::expr_err(span, e))?;
        }
        Ok(lhs)
    }

    fn number(&mut self) -> PResult<f64> {
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let v = match self.peek().clone() {
            Tok::Number(v) => v,
            Tok::Int(n) => n as f64,
            other => return self.error(format!("expected number, found {}", other.describe())),
        };
        self.bump();
        Ok(if negative { -v } else { v })
    }

    fn index_suffix(&mut self, base: Expr) -> PResult<Expr> {
        self.expect(Tok::LBracket)?;
        let span = self.span();
        let k = match self.bump().tok {
            Tok::Int(k) => k,
            other => {
                return Err(ParseError {
                    kind: ParseErrorKind::Syntax(format!("expected index, found {}", other.describe())),
                    span,
                })
            }
        };
        self.expect(Tok::RBracket)?;
        build::index(base, k).or_else(|e| Self::expr_err(span, e))
    }

    fn factor(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Minus => {
                if matches!(self.peek_at(1), Tok::Number(_) | Tok::Int(_)) {
                    let v = self.number()?;
                    return Ok(Expr::scalar(v));
                }
                self.bump();
                self.depth += 1;
                if self.depth > MAX_DEPTH {
                    return self.error("expression nested too deeply");
                }
                let inner = self.factor();
                self.depth -= 1;
                build::neg(inner?).or_else(|e| Self::expr_err(span, e))
            }
            Tok::Number(_) | Tok::Int(_) => Ok(Expr::scalar(self.number()?)),
            Tok::LBracket => {
                self.bump();
                let mut values = vec![self.number()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    values.push(self.number()?);
                }
                self.expect(Tok::RBracket)?;
                Expr::constant(values).or_else(|e| Self::expr_err(span, e))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                if *self.peek() == Tok::LBracket {
                    self.index_suffix(inner)
                } else {
                    Ok(inner)
                }
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    let atom = match name.as_str() {
                        "abs" => Atom::Abs,
                        "max" => Atom::Max,
                        "sum" => Atom::Sum,
                        "square" => Atom::Square,
                        "sum_squares" => Atom::SumSquares,
                        "norm2" => Atom::Norm2,
                        _ => return Err(ParseError { kind: ParseErrorKind::UnknownAtom(name), span }),
                    };
                    self.bump();
                    let mut args = vec![self.expr()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen)?;
                    return Expr::apply(atom, args).or_else(|e| Self::expr_err(span, e));
                }
                if KEYWORDS.contains(&name.as_str()) || ATOMS.contains(&name.as_str()) {
                    return Err(ParseError {
                        kind: ParseErrorKind::Syntax(format!("unexpected keyword `{name}`")),
                        span,
                    });
                }
                let var = match self.vars.get(&name) {
                    Some(v) => v.expr(),
                    None => return Err(ParseError { kind: ParseErrorKind::UnknownIdentifier(name), span }),
                };
                if *self.peek() == Tok::LBracket {
                    self.index_suffix(var)
                } else {
                    Ok(var)
                }
            }
            other => self.error(format!("expected expression, found {}", other.describe())),
        }
    }
}

/// Parses a problem in the `.cvx` language.
pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0, vars: BTreeMap::new(), depth: 0 };
    p.problem()
}

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_UNARY: u8 = 3;

struct Printer<'a> {
    names: BTreeMap<VarId, &'a str>,
}

impl Printer<'_> {
    fn number(v: f64, out: &mut String) {
        out.push_str(&format!("{v}"));
    }

    fn expr(&self, e: &Expr, prec: u8, out: &mut String) {
        match e.kind() {
            ExprKind::Constant(v) => {
                if v.len() == 1 {
                    Self::number(v[0], out);
                } else {
                    out.push('[');
                    for (i, x) in v.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        Self::number(*x, out);
                    }
                    out.push(']');
                }
            }
            ExprKind::Variable { id, .. } => match self.names.get(id) {
                Some(n) => out.push_str(n),
                None => out.push_str(&id.to_string()),
            },
            ExprKind::Atom { atom, args } => match atom {
                Atom::Add | Atom::Sub => {
                    let wrap = prec > PREC_ADD;
                    if wrap {
                        out.push('(');
                    }
                    self.expr(&args[0], PREC_ADD, out);
                    out.push_str(if *atom == Atom::Add { " + " } else { " - " });
                    self.expr(&args[1], PREC_MUL, out);
                    if wrap {
                        out.push(')');
                    }
                }
                Atom::MulConst => {
                    let wrap = prec > PREC_MUL;
                    if wrap {
                        out.push('(');
                    }
                    self.expr(&args[0], PREC_MUL, out);
                    out.push_str(" * ");
                    self.expr(&args[1], PREC_UNARY, out);
                    if wrap {
                        out.push(')');
                    }
                }
                Atom::Neg => {
                    out.push('-');
                    if args[0].as_constant().is_some() {
                        out.push('(');
                        self.expr(&args[0], 0, out);
                        out.push(')');
                    } else {
                        self.expr(&args[0], PREC_UNARY, out);
                    }
                }
                Atom::Index(k) => {
                    if args[0].as_variable().is_some() {
                        self.expr(&args[0], PREC_UNARY + 1, out);
                    } else {
                        out.push('(');
                        self.expr(&args[0], 0, out);
                        out.push(')');
                    }
                    out.push_str(&format!("[{k}]"));
                }
                _ => {
                    out.push_str(atom.name());
                    out.push('(');
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        self.expr(a, 0, out);
                    }
                    out.push(')');
                }
            },
        }
    }
}

/// Prints an expression with variables shown by id.
pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    Printer { names: BTreeMap::new() }.expr(e, 0, &mut out);
    out
}

/// Prints an expression using the variable names of `problem`.
pub fn print_expr_in(problem: &Problem, e: &Expr) -> String {
    let mut out = String::new();
    printer_for(problem).expr(e, 0, &mut out);
    out
}

/// Prints an expression using the names in `vars`.
pub fn print_expr_with(vars: &[Variable], e: &Expr) -> String {
    let mut out = String::new();
    Printer { names: vars.iter().map(|v| (v.id, v.name.as_str())).collect() }.expr(e, 0, &mut out);
    out
}

fn printer_for(problem: &Problem) -> Printer<'_> {
    Printer { names: problem.variables().iter().map(|v| (v.id, v.name.as_str())).collect() }
}

/// Canonical text form of a problem.
pub fn print_problem(problem: &Problem) -> String {
    let printer = printer_for(problem);
    let mut out = String::new();
    for v in problem.variables() {
        out.push_str("var ");
        out.push_str(&v.name);
        if v.dim > 1 {
            out.push_str(&format!("[{}]", v.dim));
        }
        if v.nonneg {
            out.push_str(" nonneg");
        }
        out.push_str(";\n");
    }
    out.push_str(match problem.sense() {
        Sense::Minimize => "minimize ",
        Sense::Maximize => "maximize ",
    });
    printer.expr(problem.objective(), 0, &mut out);
    out.push_str(";\n");
    if !problem.constraints().is_empty() {
        out.push_str("subject to\n");
        for c in problem.constraints() {
            out.push_str("  ");
            printer.expr(c.lhs(), 0, &mut out);
            out.push(' ');
            out.push_str(c.relation().symbol());
            out.push(' ');
            printer.expr(c.rhs(), 0, &mut out);
            out.push_str(";\n");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "var a; var b; minimize max(a+b+2, -a-b); subject to a <= 0; b == -0.5;";

    #[test]
    fn parses_toy() {
        let p = parse_problem(TOY).unwrap();
        assert_eq!(p.variables().len(), 2);
        assert_eq!(p.variables()[0].name, "a");
        assert_eq!(p.sense(), Sense::Minimize);
        assert_eq!(p.constraints().len(), 2);
        assert_eq!(p.constraints()[1].relation(), Relation::Eq);
        assert_eq!(p.constraints()[1].rhs().as_constant(), Some(&[-0.5][..]));
        assert_eq!(p.objective().atom(), Some(Atom::Max));
    }

    #[test]
    fn parses_unconstrained_and_example() {
        let p = parse_problem("var x; minimize square(x);").unwrap();
        assert!(p.constraints().is_empty());
        assert_eq!(p.variables().len(), 1);
        let q = parse_problem("var x; minimize square(max(x,0)+max(x-1,0));").unwrap();
        assert_eq!(q.objective().atom(), Some(Atom::Square));
        assert_eq!(q.objective().args()[0].atom(), Some(Atom::Add));
    }

    #[test]
    fn precedence() {
        let p = parse_problem("var x; minimize -x * 2 + 3 * x - 1;").unwrap();
        // ((-x * 2) + (3 * x)) - 1
        let o = p.objective();
        assert_eq!(o.atom(), Some(Atom::Sub));
        assert_eq!(o.args()[0].atom(), Some(Atom::Add));
        let first = &o.args()[0].args()[0];
        assert_eq!(first.atom(), Some(Atom::MulConst));
        assert_eq!(first.args()[1].atom(), Some(Atom::Neg));
    }

    #[test]
    fn prints_toy() {
        let p = parse_problem(TOY).unwrap();
        let s = print_problem(&p);
        assert!(s.contains("minimize max("), "{s}");
        assert!(s.contains("b == -0.5"), "{s}");
        assert_eq!(parse_problem(&s).unwrap(), p);
    }

    #[test]
    fn prints_without_constraint_block_and_vectors() {
        let p = parse_problem("var y[3]; minimize sum([1, 2, 3] * y);").unwrap();
        let s = print_problem(&p);
        assert!(!s.contains("subject to"));
        assert!(s.contains("[1, 2, 3]"), "{s}");
        assert!(s.contains("var y[3];"));
    }

    #[test]
    fn roundtrip_tricky_forms() {
        for src in [
            "var x; minimize -(3) * x;",
            "var x; minimize x - -3;",
            "var x; minimize --x;",
            "var y[2] nonneg; minimize (y - 1)[1] + y[0];",
            "var x; minimize 2 * (3 * x) + x * 2 * 3;",
            "var x; minimize x - (x - 1);",
            "var x; minimize abs(-(-2));",
        ] {
            let p = parse_problem(src).unwrap();
            let printed = print_problem(&p);
            assert_eq!(parse_problem(&printed).unwrap(), p, "{src} -> {printed}");
        }
    }

    #[test]
    fn comments_are_ignored() {
        let p = parse_problem("# header\nvar x; # trailing\nminimize x; # done").unwrap();
        assert_eq!(p.variables().len(), 1);
    }

    fn err(src: &str) -> ParseError {
        parse_problem(src).unwrap_err()
    }

    #[test]
    fn errors_carry_spans() {
        let e = err("var x;\nminimize foo(x);");
        assert_eq!(e.kind, ParseErrorKind::UnknownAtom("foo".into()));
        assert_eq!((e.span.line, e.span.column), (2, 10));

        let e = err("var x; minimize y;");
        assert_eq!(e.kind, ParseErrorKind::UnknownIdentifier("y".into()));
        assert_eq!(e.span.column, 17);

        let e = err("var x; var y; minimize x * y;");
        assert_eq!(e.kind, ParseErrorKind::Expr(ExprError::NonConstantProduct));

        let e = err("var x[2]; var y[3]; minimize sum(x + y);");
        assert!(matches!(e.kind, ParseErrorKind::Expr(ExprError::DimensionMismatch { .. })));

        let e = err("var x; minimize x; subject to 0 <= x <= 1;");
        assert!(matches!(e.kind, ParseErrorKind::Syntax(ref m) if m.contains("chained")));

        let e = err("var x; minimize x");
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
        assert_eq!(e.span.column, 18);

        let e = err("var x[2]; minimize x;");
        assert!(matches!(e.kind, ParseErrorKind::Expr(ExprError::NonScalarObjective { dim: 2 })));

        let e = err("var x[2]; minimize x[2];");
        assert!(matches!(e.kind, ParseErrorKind::Expr(ExprError::IndexOutOfRange { .. })));

        let e = err("var max; minimize 1;");
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));

        let e = err("var x; minimize x @ 1;");
        assert_eq!(e.span.column, 19);
    }
}
