//! Scalar coefficient expressions in one free variable.
//!
//! Every coefficient of a problem instance (`alpha(t)`, `beta(t)`, `f(s)`,
//! `g(s)`, `u0(x)` and the auxiliary functions used by the analysis module) is
//! an [`Expr`]. The grammar is deliberately small so that the families that
//! matter for integral-convergence decisions can be recognized structurally;
//! see [`canonical`].

mod canonical;
mod parser;
mod shape;

use std::fmt;

use thiserror::Error;

pub use canonical::{CanonicalForm, Term};
pub use parser::parse;
pub use shape::{check_shape, check_shape_sampled, Interval, ShapeCheck, ShapeProperty};

/// The free variable of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    T,
    S,
    X,
}

impl Symbol {
    pub fn name(self) -> &'static str {
        match self {
            Symbol::T => "t",
            Symbol::S => "s",
            Symbol::X => "x",
        }
    }

    pub fn from_name(name: &str) -> Option<Symbol> {
        match name {
            "t" => Some(Symbol::T),
            "s" => Some(Symbol::S),
            "x" => Some(Symbol::X),
            _ => None,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Cos => "cos",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

/// A node of the expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(Symbol),
    Neg(Box<Node>),
    Call(Func, Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    /// Power with a constant exponent.
    Pow(Box<Node>, f64),
}

impl Node {
    pub fn constant(c: f64) -> Node {
        Node::Const(c)
    }

    pub fn var(sym: Symbol) -> Node {
        Node::Var(sym)
    }

    pub fn binary(op: BinOp, lhs: Node, rhs: Node) -> Node {
        Node::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn call(func: Func, arg: Node) -> Node {
        Node::Call(func, Box::new(arg))
    }

    pub fn pow(base: Node, exponent: f64) -> Node {
        Node::Pow(Box::new(base), exponent)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(inner: Node) -> Node {
        Node::Neg(Box::new(inner))
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Neg(a) | Node::Call(_, a) | Node::Pow(a, _) => 1 + a.depth(),
            Node::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    fn collect_symbols(&self, out: &mut Vec<Symbol>) {
        match self {
            Node::Const(_) => {}
            Node::Var(s) => {
                if !out.contains(s) {
                    out.push(*s);
                }
            }
            Node::Neg(a) | Node::Call(_, a) | Node::Pow(a, _) => a.collect_symbols(out),
            Node::Binary(_, a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
        }
    }

    fn eval(&self, v: f64) -> Result<f64, EvalError> {
        let out = match self {
            Node::Const(c) => *c,
            Node::Var(_) => v,
            Node::Neg(a) => -a.eval(v)?,
            Node::Call(func, a) => {
                let arg = a.eval(v)?;
                match func {
                    Func::Exp => arg.exp(),
                    Func::Log => {
                        if arg <= 0.0 {
                            return Err(EvalError::Domain {
                                op: "log",
                                arg,
                                at: v,
                            });
                        }
                        arg.ln()
                    }
                    Func::Sqrt => {
                        if arg < 0.0 {
                            return Err(EvalError::Domain {
                                op: "sqrt",
                                arg,
                                at: v,
                            });
                        }
                        arg.sqrt()
                    }
                    Func::Cos => arg.cos(),
                }
            }
            Node::Binary(op, a, b) => {
                let l = a.eval(v)?;
                let r = b.eval(v)?;
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if r == 0.0 {
                            return Err(EvalError::Domain {
                                op: "division",
                                arg: r,
                                at: v,
                            });
                        }
                        l / r
                    }
                }
            }
            Node::Pow(a, p) => {
                let base = a.eval(v)?;
                pow_checked(base, *p).map_err(|op| EvalError::Domain { op, arg: base, at: v })?
            }
        };
        if out.is_finite() {
            Ok(out)
        } else if out.is_nan() {
            Err(EvalError::Domain {
                op: "arithmetic",
                arg: out,
                at: v,
            })
        } else {
            Err(EvalError::Overflow { at: v })
        }
    }
}

fn pow_checked(base: f64, p: f64) -> Result<f64, &'static str> {
    if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
        if base == 0.0 && p < 0.0 {
            return Err("pow");
        }
        Ok(base.powi(p as i32))
    } else {
        if base < 0.0 || (base == 0.0 && p < 0.0) {
            return Err("pow");
        }
        Ok(base.powf(p))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{op} undefined for argument {arg} (variable = {at})")]
    Domain { op: &'static str, arg: f64, at: f64 },
    #[error("overflow evaluating at {at}")]
    Overflow { at: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("more than one free variable: `{first}` and `{second}`")]
    MultipleVariables { first: Symbol, second: Symbol },
    #[error("exponent at offset {offset} must be a numeric constant")]
    NonConstantExponent { offset: usize },
    #[error("empty expression")]
    Empty,
}

/// A parsed scalar function of at most one free variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    symbol: Option<Symbol>,
}

impl Expr {
    /// Wraps a node, rejecting trees that mention two different variables.
    pub fn from_node(root: Node) -> Result<Expr, ParseError> {
        let mut syms = Vec::new();
        root.collect_symbols(&mut syms);
        if syms.len() > 1 {
            return Err(ParseError::MultipleVariables {
                first: syms[0],
                second: syms[1],
            });
        }
        Ok(Expr {
            root,
            symbol: syms.first().copied(),
        })
    }

    pub fn constant(c: f64) -> Expr {
        Expr {
            root: Node::Const(c),
            symbol: None,
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// The free variable, `None` for constant expressions.
    pub fn symbol(&self) -> Option<Symbol> {
        self.symbol
    }

    pub fn eval(&self, v: f64) -> Result<f64, EvalError> {
        self.root.eval(v)
    }

    pub fn canonicalize(&self) -> CanonicalForm {
        canonical::canonicalize(&self.root)
    }

    /// Leading term as the variable tends to `+inf`, when it can be read off
    /// the tree.
    pub fn leading_at_infinity(&self) -> Option<Term> {
        canonical::leading_at_infinity(&self.root)
    }

    /// Leading term as the variable tends to `0+`.
    pub fn leading_at_zero(&self) -> Option<Term> {
        canonical::leading_at_zero(&self.root)
    }

    /// True when the expression is the zero function.
    pub fn is_zero(&self) -> bool {
        matches!(self.canonicalize(), CanonicalForm::Constant { c } if c == 0.0)
    }

    /// Sum of two expressions; both must share the same variable (or be
    /// constant).
    pub fn add(&self, other: &Expr) -> Result<Expr, ParseError> {
        Expr::from_node(Node::binary(
            BinOp::Add,
            self.root.clone(),
            other.root.clone(),
        ))
    }

    /// `v ↦ e(v + shift)`.
    pub fn shifted(&self, shift: f64) -> Expr {
        fn go(n: &Node, shift: f64) -> Node {
            match n {
                Node::Const(c) => Node::Const(*c),
                Node::Var(s) => Node::binary(BinOp::Add, Node::Var(*s), Node::Const(shift)),
                Node::Neg(a) => Node::neg(go(a, shift)),
                Node::Call(func, a) => Node::call(*func, go(a, shift)),
                Node::Binary(op, a, b) => Node::binary(*op, go(a, shift), go(b, shift)),
                Node::Pow(a, p) => Node::pow(go(a, shift), *p),
            }
        }
        if shift == 0.0 {
            return self.clone();
        }
        Expr {
            root: go(&self.root, shift),
            symbol: self.symbol,
        }
    }

    pub fn scale(&self, c: f64) -> Expr {
        Expr {
            root: Node::binary(BinOp::Mul, Node::Const(c), self.root.clone()),
            symbol: self.symbol,
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Expr, ParseError> {
        parse(s)
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    // Debug formatting of f64 is the shortest representation that reads back
    // to the same value.
    write!(f, "{c:?}")
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => write_const(f, *c),
            Node::Var(s) => write!(f, "{s}"),
            Node::Neg(a) => write!(f, "-({a})"),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
            Node::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Node::Pow(a, p) => {
                write!(f, "({a})^")?;
                write_const(f, *p)
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}
