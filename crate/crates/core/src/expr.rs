//! Scalar expressions in the variables `x`, `t` and `u`.
//!
//! Kernels, right-hand sides, nonlinearities and exact solutions are all
//! written as text and parsed into an [`Expr`]. The grammar is a small
//! precedence-climbing one:
//!
//! ```text
//! expr    := sum
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          (right associative)
//! atom    := number | ident | ident '(' args ')' | '(' expr ')'
//! ```
//!
//! `pi` and `e` are predefined constants. Functions: `sin cos tan exp ln
//! sqrt abs` (unary), `pow(a, b)` and `cond(c, a, b)`, which yields `a`
//! when `c >= 0` and `b` otherwise, evaluating only the selected branch.

use std::fmt;

use thiserror::Error;

/// Syntax error with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("syntax error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(Var),
    #[error("domain error in `{node}`: {reason}")]
    Domain { node: String, reason: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    T,
    U,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Var::X => "x",
            Var::T => "t",
            Var::U => "u",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Pow,
    Cond,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "pow" => Func::Pow,
            "cond" => Func::Cond,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Pow => "pow",
            Func::Cond => "cond",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            Func::Cond => 3,
            _ => 1,
        }
    }
}

/// A node of the expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// Variable bindings for evaluation. Unset variables are unbound.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Bindings {
    pub x: Option<f64>,
    pub t: Option<f64>,
    pub u: Option<f64>,
}

impl Bindings {
    pub fn t(t: f64) -> Self {
        Self { t: Some(t), ..Self::default() }
    }

    pub fn xt(x: f64, t: f64) -> Self {
        Self { x: Some(x), t: Some(t), u: None }
    }

    pub fn u(u: f64) -> Self {
        Self { u: Some(u), ..Self::default() }
    }

    fn get(&self, v: Var) -> Option<f64> {
        match v {
            Var::X => self.x,
            Var::T => self.t,
            Var::U => self.u,
        }
    }
}

/// A parsed expression. Immutable and cheap to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
}

impl Expr {
    pub fn parse(source: &str) -> Result<Expr, ParseError> {
        let tokens = tokenize(source)?;
        let mut p = Parser { tokens, pos: 0, len: source.len() };
        if p.tokens.is_empty() {
            return Err(ParseError { offset: 0, message: "empty expression".into() });
        }
        let root = p.expr()?;
        if let Some(tok) = p.peek() {
            return Err(ParseError {
                offset: tok.offset,
                message: format!("unexpected {}", tok.kind.describe()),
            });
        }
        Ok(Expr { root })
    }

    pub fn from_node(root: Node) -> Expr {
        Expr { root }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn eval(&self, b: &Bindings) -> Result<f64, EvalError> {
        eval_node(&self.root, b)
    }

    pub fn eval_t(&self, t: f64) -> Result<f64, EvalError> {
        self.eval(&Bindings::t(t))
    }

    pub fn eval_xt(&self, x: f64, t: f64) -> Result<f64, EvalError> {
        self.eval(&Bindings::xt(x, t))
    }

    pub fn eval_u(&self, u: f64) -> Result<f64, EvalError> {
        self.eval(&Bindings::u(u))
    }

    /// True if `v` occurs anywhere in the tree.
    pub fn uses(&self, v: Var) -> bool {
        fn walk(n: &Node, v: Var) -> bool {
            match n {
                Node::Num(_) => false,
                Node::Var(w) => *w == v,
                Node::Neg(a) => walk(a, v),
                Node::Binary(_, a, b) => walk(a, v) || walk(b, v),
                Node::Call(_, args) => args.iter().any(|a| walk(a, v)),
            }
        }
        walk(&self.root, v)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

/// Fully parenthesized text that parses back to an equivalent tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Num(v) => write!(f, "({v:?})"),
            Node::Var(v) => write!(f, "{v}"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Binary(op, a, b) => write!(f, "({a}{}{b})", op.symbol()),
            Node::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

fn domain(node: &Node, reason: &'static str) -> EvalError {
    EvalError::Domain { node: node.to_string(), reason }
}

fn eval_node(node: &Node, b: &Bindings) -> Result<f64, EvalError> {
    match node {
        Node::Num(v) => Ok(*v),
        Node::Var(v) => b.get(*v).ok_or(EvalError::Unbound(*v)),
        Node::Neg(a) => Ok(-eval_node(a, b)?),
        Node::Binary(op, l, r) => {
            let x = eval_node(l, b)?;
            let y = eval_node(r, b)?;
            match op {
                BinOp::Add => Ok(x + y),
                BinOp::Sub => Ok(x - y),
                BinOp::Mul => Ok(x * y),
                BinOp::Div => {
                    if y == 0.0 {
                        Err(domain(node, "division by zero"))
                    } else {
                        Ok(x / y)
                    }
                }
                BinOp::Pow => real_pow(node, x, y),
            }
        }
        Node::Call(func, args) => {
            if *func == Func::Cond {
                let c = eval_node(&args[0], b)?;
                return eval_node(if c >= 0.0 { &args[1] } else { &args[2] }, b);
            }
            let a = eval_node(&args[0], b)?;
            match func {
                Func::Sin => Ok(a.sin()),
                Func::Cos => Ok(a.cos()),
                Func::Tan => Ok(a.tan()),
                Func::Exp => Ok(a.exp()),
                Func::Ln => {
                    if a <= 0.0 {
                        Err(domain(node, "logarithm of a non-positive number"))
                    } else {
                        Ok(a.ln())
                    }
                }
                Func::Sqrt => {
                    if a < 0.0 {
                        Err(domain(node, "square root of a negative number"))
                    } else {
                        Ok(a.sqrt())
                    }
                }
                Func::Abs => Ok(a.abs()),
                Func::Pow => real_pow(node, a, eval_node(&args[1], b)?),
                Func::Cond => unreachable!(),
            }
        }
    }
}

fn real_pow(node: &Node, base: f64, exp: f64) -> Result<f64, EvalError> {
    if base < 0.0 && exp.fract() != 0.0 {
        return Err(domain(node, "fractional power of a negative number"));
    }
    if base == 0.0 && exp < 0.0 {
        return Err(domain(node, "negative power of zero"));
    }
    if exp.fract() == 0.0 && exp.abs() <= i32::MAX as f64 {
        return Ok(base.powi(exp as i32));
    }
    Ok(base.powf(exp))
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

impl TokKind {
    fn describe(&self) -> String {
        match self {
            TokKind::Num(v) => format!("number {v}"),
            TokKind::Ident(s) => format!("identifier `{s}`"),
            TokKind::Op(c) => format!("operator `{c}`"),
            TokKind::LParen => "`(`".into(),
            TokKind::RParen => "`)`".into(),
            TokKind::Comma => "`,`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokKind,
    offset: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let kind = if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent part, only when followed by digits
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| ParseError {
                offset: start,
                message: format!("malformed number `{text}`"),
            })?;
            TokKind::Num(v)
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            TokKind::Ident(src[start..i].to_string())
        } else {
            i += 1;
            match c {
                '+' | '-' | '*' | '/' | '^' => TokKind::Op(c),
                '(' => TokKind::LParen,
                ')' => TokKind::RParen,
                ',' => TokKind::Comma,
                _ => {
                    let ch = src[start..].chars().next().unwrap_or('?');
                    return Err(ParseError {
                        offset: start,
                        message: format!("unknown token `{ch}`"),
                    });
                }
            }
        };
        out.push(Token { kind, offset: start });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.len, |t| t.offset)
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        match self.peek() {
            Some(Token { kind: TokKind::Op(c), .. }) if ops.contains(c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.product()?;
        while let Some(op) = self.eat_op(&['+', '-']) {
            let rhs = self.product()?;
            let op = if op == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.eat_op(&['*', '/']) {
            let rhs = self.unary()?;
            let op = if op == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.eat_op(&['-']).is_some() {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.eat_op(&['^']).is_some() {
            let exp = self.unary()?;
            return Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let at = self.here();
        let Some(tok) = self.next() else {
            return Err(ParseError { offset: at, message: "unexpected end of expression".into() });
        };
        match tok.kind {
            TokKind::Num(v) => Ok(Node::Num(v)),
            TokKind::LParen => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Token { kind: TokKind::RParen, .. }) => Ok(inner),
                    _ => Err(ParseError { offset: tok.offset, message: "unbalanced `(`".into() }),
                }
            }
            TokKind::Ident(name) => self.ident(name, tok.offset),
            other => Err(ParseError { offset: tok.offset, message: format!("unexpected {}", other.describe()) }),
        }
    }

    fn ident(&mut self, name: String, offset: usize) -> Result<Node, ParseError> {
        let is_call = matches!(self.peek(), Some(Token { kind: TokKind::LParen, .. }));
        if !is_call {
            return match name.as_str() {
                "x" => Ok(Node::Var(Var::X)),
                "t" => Ok(Node::Var(Var::T)),
                "u" => Ok(Node::Var(Var::U)),
                "pi" => Ok(Node::Num(std::f64::consts::PI)),
                "e" => Ok(Node::Num(std::f64::consts::E)),
                _ if Func::lookup(&name).is_some() => {
                    Err(ParseError { offset, message: format!("function `{name}` needs an argument list") })
                }
                _ => Err(ParseError { offset, message: format!("unknown identifier `{name}`") }),
            };
        }
        let func = Func::lookup(&name)
            .ok_or_else(|| ParseError { offset, message: format!("unknown function `{name}`") })?;
        self.pos += 1; // '('
        let mut args = Vec::new();
        if matches!(self.peek(), Some(Token { kind: TokKind::RParen, .. })) {
            self.pos += 1;
        } else {
            loop {
                args.push(self.expr()?);
                let at = self.here();
                match self.next() {
                    Some(Token { kind: TokKind::Comma, .. }) => continue,
                    Some(Token { kind: TokKind::RParen, .. }) => break,
                    Some(t) => {
                        return Err(ParseError {
                            offset: t.offset,
                            message: format!("expected `,` or `)`, found {}", t.kind.describe()),
                        })
                    }
                    None => return Err(ParseError { offset: at, message: format!("unbalanced `(` in call to `{name}`") }),
                }
            }
        }
        if args.len() != func.arity() {
            return Err(ParseError {
                offset,
                message: format!("`{name}` takes {} argument(s), got {}", func.arity(), args.len()),
            });
        }
        Ok(Node::Call(func, args))
    }
}
