//! Scalar expression language for bifunctions such as `f(x, p)`.
//!
//! Vector variables are addressed by component (`x1`, `x2`, ...); a
//! one-dimensional variable may also be written bare (`x`). Piecewise
//! definitions use `if(lhs <op> rhs, then, else)`.

mod ast;
mod eval;
mod lexer;
mod parser;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use ast::{BinaryOp, CompareOp, Condition, Function, Node, VarRef};
pub use eval::{eval_node, Program};
pub use lexer::{tokenize, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("unexpected character {character:?} at offset {position}")]
    Lex { position: usize, character: char },
    #[error("parse error at offset {position}: expected {expected}")]
    Parse { position: usize, expected: String },
    #[error("unknown identifier `{name}` at offset {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("invalid variable declaration `{name}`")]
    InvalidDeclaration { name: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("zero raised to a negative power")]
    ZeroToNegativePower,
    #[error("`{op}` produced NaN")]
    NotANumber { op: &'static str },
    #[error("result is not finite")]
    Overflow,
    #[error("variable `{name}` is not bound")]
    Unbound { name: String },
    #[error("variable `{name}` bound with dimension {got}, declared {expected}")]
    DimensionMismatch { name: String, expected: usize, got: usize },
}

/// A declared vector variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub dim: usize,
}

impl VarDecl {
    pub fn new(name: &str, dim: usize) -> Self {
        VarDecl { name: name.to_string(), dim }
    }
}

pub type Bindings = BTreeMap<String, Vec<f64>>;

/// Parse `tokens` against the declared variables.
pub fn parse(tokens: &[Token], vars: &[VarDecl]) -> Result<Expression, ExprError> {
    let root = parser::parse(tokens, vars)?;
    Ok(Expression::from_root(root, vars.to_vec()))
}

/// A parsed, immutable expression.
#[derive(Debug, Clone)]
pub struct Expression {
    root: Node,
    vars: Vec<VarDecl>,
    program: Option<Program>,
}

impl Expression {
    pub fn parse_str(text: &str, vars: &[VarDecl]) -> Result<Self, ExprError> {
        parse(&tokenize(text)?, vars)
    }

    /// Parse a bifunction over two variables of the same dimension.
    pub fn bifunction(text: &str, first: &str, second: &str, dim: usize) -> Result<Self, ExprError> {
        Self::parse_str(text, &[VarDecl::new(first, dim), VarDecl::new(second, dim)])
    }

    fn from_root(root: Node, vars: Vec<VarDecl>) -> Self {
        let program = Program::compile(&root);
        Expression { root, vars, program }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn variables(&self) -> &[VarDecl] {
        &self.vars
    }

    /// Evaluate with positional arguments, one slice per declared variable.
    /// Dimensions are trusted; use [`Expression::evaluate`] for checked input.
    #[inline]
    pub fn eval(&self, args: &[&[f64]]) -> Result<f64, EvalError> {
        match &self.program {
            Some(p) => p.run(args),
            None => eval_node(&self.root, args),
        }
    }

    /// Tree-walking evaluation, kept as an independent route.
    pub fn eval_reference(&self, args: &[&[f64]]) -> Result<f64, EvalError> {
        eval_node(&self.root, args)
    }

    /// Evaluate with named bindings; every declared variable must be bound
    /// with its declared dimension.
    pub fn evaluate(&self, bindings: &Bindings) -> Result<f64, EvalError> {
        let mut args: Vec<&[f64]> = Vec::with_capacity(self.vars.len());
        for v in &self.vars {
            let value = bindings.get(&v.name).ok_or_else(|| EvalError::Unbound { name: v.name.clone() })?;
            if value.len() != v.dim {
                return Err(EvalError::DimensionMismatch { name: v.name.clone(), expected: v.dim, got: value.len() });
            }
            args.push(value);
        }
        self.eval(&args)
    }
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root && self.vars == other.vars
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}
