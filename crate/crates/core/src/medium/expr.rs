//! Closed-form scalar expressions over `x1..xN`.
//!
//! Grammar (precedence from loosest to tightest):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?          (right associative)
//! primary := number | 'pi' | xK | func '(' expr (',' expr)* ')' | '(' expr ')'
//! func    := sin | cos | exp | sqrt | abs
//! ```
//!
//! Parsed expressions are compiled to a postfix program so that repeated
//! evaluation on large grids does not walk a pointer tree.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "sqrt" => Some(Func::Sqrt),
            "abs" => Some(Func::Abs),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
        }
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
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => a / b,
            BinOp::Pow => pow(a, b),
        }
    }
}

fn pow(a: f64, b: f64) -> f64 {
    if b == b.trunc() && b.abs() <= 64.0 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

/// Abstract syntax tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    /// Zero-based variable index (`x1` is `Var(0)`).
    Var(usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Num(v) => write!(f, "{v}"),
            Node::Var(i) => write!(f, "x{}", i + 1),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Instr {
    Push(f64),
    Load(usize),
    Neg,
    Bin(BinOp),
    Call(Func),
}

/// A parsed and compiled expression in `dim` variables.
#[derive(Debug, Clone)]
pub struct Expr {
    source: String,
    dim: usize,
    root: Node,
    program: Vec<Instr>,
    max_stack: usize,
}

impl Expr {
    pub fn parse(text: &str, dim: usize) -> Result<Expr> {
        if text.trim().is_empty() {
            return Err(Error::Syntax {
                offset: 0,
                message: "empty expression".into(),
            });
        }
        let mut parser = Parser {
            src: text.as_bytes(),
            pos: 0,
            dim,
        };
        let root = parser.expr()?;
        parser.skip_ws();
        if parser.pos < parser.src.len() {
            return Err(parser.unexpected());
        }
        let mut program = Vec::new();
        compile(&root, &mut program);
        let max_stack = stack_depth(&program);
        Ok(Expr {
            source: text.to_string(),
            dim,
            root,
            program,
            max_stack,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ast(&self) -> &Node {
        &self.root
    }

    /// Whether variable `x{axis+1}` appears anywhere in the expression.
    pub fn uses_var(&self, axis: usize) -> bool {
        self.program
            .iter()
            .any(|ins| matches!(ins, Instr::Load(i) if *i == axis))
    }

    /// Evaluates at `x`. Missing trailing coordinates read as zero.
    pub fn eval(&self, x: &[f64]) -> f64 {
        const INLINE: usize = 32;
        if self.max_stack <= INLINE {
            let mut stack = [0.0f64; INLINE];
            self.run(x, &mut stack)
        } else {
            let mut stack = vec![0.0; self.max_stack];
            self.run(x, &mut stack)
        }
    }

    fn run(&self, x: &[f64], stack: &mut [f64]) -> f64 {
        let mut sp = 0usize;
        for ins in &self.program {
            match *ins {
                Instr::Push(v) => {
                    stack[sp] = v;
                    sp += 1;
                }
                Instr::Load(i) => {
                    stack[sp] = x.get(i).copied().unwrap_or(0.0);
                    sp += 1;
                }
                Instr::Neg => stack[sp - 1] = -stack[sp - 1],
                Instr::Bin(op) => {
                    let b = stack[sp - 1];
                    sp -= 1;
                    stack[sp - 1] = op.apply(stack[sp - 1], b);
                }
                Instr::Call(func) => stack[sp - 1] = func.apply(stack[sp - 1]),
            }
        }
        stack[0]
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

fn compile(node: &Node, out: &mut Vec<Instr>) {
    match node {
        Node::Num(v) => out.push(Instr::Push(*v)),
        Node::Var(i) => out.push(Instr::Load(*i)),
        Node::Neg(a) => {
            compile(a, out);
            out.push(Instr::Neg);
        }
        Node::Bin(op, a, b) => {
            compile(a, out);
            compile(b, out);
            out.push(Instr::Bin(*op));
        }
        Node::Call(func, a) => {
            compile(a, out);
            out.push(Instr::Call(*func));
        }
    }
}

fn stack_depth(program: &[Instr]) -> usize {
    let (mut depth, mut max) = (0usize, 0usize);
    for ins in program {
        match ins {
            Instr::Push(_) | Instr::Load(_) => depth += 1,
            Instr::Bin(_) => depth -= 1,
            Instr::Neg | Instr::Call(_) => {}
        }
        max = max.max(depth);
    }
    max
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn unexpected(&self) -> Error {
        match self.src.get(self.pos) {
            Some(&c) => Error::Syntax {
                offset: self.pos,
                message: format!("unexpected `{}`", c as char),
            },
            None => Error::Syntax {
                offset: self.pos,
                message: "unexpected end of input".into(),
            },
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            match self.src.get(self.pos) {
                Some(&found) => Err(Error::Syntax {
                    offset: self.pos,
                    message: format!("expected `{}`, found `{}`", c as char, found as char),
                }),
                None => Err(Error::Syntax {
                    offset: self.pos,
                    message: format!("expected `{}`, found end of input", c as char),
                }),
            }
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            _ => Err(self.unexpected()),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(Error::Syntax {
                offset: start,
                message: "malformed number".into(),
            });
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        text.parse::<f64>().map(Node::Num).map_err(|_| Error::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })
    }

    fn ident(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();

        if name == "pi" {
            return Ok(Node::Num(std::f64::consts::PI));
        }
        if let Some(func) = Func::from_name(name) {
            self.expect(b'(')?;
            let mut args = vec![self.expr()?];
            while self.peek() == Some(b',') {
                self.pos += 1;
                args.push(self.expr()?);
            }
            self.expect(b')')?;
            if args.len() != 1 {
                return Err(Error::Arity {
                    name: name.to_string(),
                    expected: 1,
                    found: args.len(),
                    offset: start,
                });
            }
            return Ok(Node::Call(func, Box::new(args.pop().unwrap())));
        }
        if let Some(idx) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
            if idx >= 1 && idx <= self.dim && !name[1..].starts_with('0') {
                return Ok(Node::Var(idx - 1));
            }
        }
        Err(Error::UnknownIdentifier {
            name: name.to_string(),
            offset: start,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant() {
        let e = Expr::parse("1", 2).unwrap();
        assert_eq!(e.ast(), &Node::Num(1.0));
        assert_eq!(e.eval(&[0.3, 0.4]), 1.0);
    }

    #[test]
    fn smooth_laminate_value() {
        let e = Expr::parse("1 + 0.5*sin(2*pi*x1)^2", 2).unwrap();
        assert!((e.eval(&[0.25, 0.7]) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn syntax_error_offset() {
        match Expr::parse("1 + )", 2) {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let e = |s: &str| Expr::parse(s, 1).unwrap().eval(&[0.0]);
        assert_eq!(e("2^3^2"), 512.0);
        assert_eq!(e("-2^2"), -4.0);
        assert_eq!(e("2^-1"), 0.5);
        assert_eq!(e("8/4/2"), 1.0);
        assert_eq!(e("1-2-3"), -4.0);
        assert_eq!(e("2*3+4*5"), 26.0);
        assert_eq!(e("1.5e1 + .5"), 15.5);
    }

    #[test]
    fn unknown_identifier_and_arity() {
        assert!(matches!(
            Expr::parse("x3 + 1", 2),
            Err(Error::UnknownIdentifier { ref name, offset: 0 }) if name == "x3"
        ));
        assert!(matches!(
            Expr::parse("1 + foo", 2),
            Err(Error::UnknownIdentifier { offset: 4, .. })
        ));
        assert!(matches!(
            Expr::parse("sin(x1, x2)", 2),
            Err(Error::Arity { expected: 1, found: 2, .. })
        ));
        assert!(matches!(Expr::parse("", 2), Err(Error::Syntax { .. })));
        assert!(matches!(Expr::parse("(1 + x1", 2), Err(Error::Syntax { offset: 7, .. })));
    }

    #[test]
    fn display_round_trips_structure() {
        let e = Expr::parse("1 + 0.5*sin(2*pi*x1)^2*sin(2*pi*x2)^2", 2).unwrap();
        let again = Expr::parse(&e.ast().to_string(), 2).unwrap();
        for p in [[0.1, 0.2], [0.33, 0.9], [-1.2, 4.0]] {
            assert_eq!(e.eval(&p), again.eval(&p));
        }
    }

    #[test]
    fn uses_var() {
        let e = Expr::parse("1 + x2", 2).unwrap();
        assert!(!e.uses_var(0));
        assert!(e.uses_var(1));
    }
}
