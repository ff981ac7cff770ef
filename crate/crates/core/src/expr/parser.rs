//! Recursive-descent parser.
//!
//! Precedence, loosest first: comparison (only as the first argument of
//! `if`), `+ -`, `* /`, unary `-`, `^` (right associative, constant
//! exponent).

use super::ast::{BinaryOp, CompareOp, Condition, Function, Node, VarRef};
use super::eval::eval_node;
use super::lexer::{Token, TokenKind};
use super::{ExprError, VarDecl};

pub fn parse(tokens: &[Token], vars: &[VarDecl]) -> Result<Node, ExprError> {
    validate_declarations(vars)?;
    let end = tokens.last().map_or(0, |t| t.position + t.lexeme.chars().count());
    let mut p = Parser { tokens, pos: 0, vars, end };
    let node = p.additive()?;
    if let Some(t) = p.peek() {
        return Err(p.error_at(t.position, "end of input"));
    }
    Ok(node)
}

fn validate_declarations(vars: &[VarDecl]) -> Result<(), ExprError> {
    for (i, v) in vars.iter().enumerate() {
        let well_formed = !v.name.is_empty()
            && v.name.chars().all(|c| c.is_ascii_alphabetic() || c == '_')
            && Function::from_name(&v.name).is_none()
            && v.name != "if"
            && v.dim > 0;
        if !well_formed || vars[..i].iter().any(|w| w.name == v.name) {
            return Err(ExprError::InvalidDeclaration { name: v.name.clone() });
        }
    }
    Ok(())
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    vars: &'a [VarDecl],
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.end, |t| t.position)
    }

    fn error_at(&self, position: usize, expected: &str) -> ExprError {
        ExprError::Parse { position, expected: expected.to_string() }
    }

    fn eat_op(&mut self, ops: &[&str]) -> Option<&'a Token> {
        let t = self.peek()?;
        if t.kind == TokenKind::Operator && ops.contains(&normalized(&t.lexeme)) {
            self.pos += 1;
            Some(t)
        } else {
            None
        }
    }

    fn expect_paren(&mut self, p: char) -> Result<(), ExprError> {
        match self.peek() {
            Some(t) if t.is_paren(p) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error_at(self.here(), &format!("'{p}'"))),
        }
    }

    fn expect_comma(&mut self) -> Result<(), ExprError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Comma => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error_at(self.here(), "','")),
        }
    }

    fn additive(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.multiplicative()?;
        while let Some(t) = self.eat_op(&["+", "-"]) {
            let op = if normalized(&t.lexeme) == "+" { BinaryOp::Add } else { BinaryOp::Sub };
            let rhs = self.multiplicative()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn multiplicative(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(t) = self.eat_op(&["*", "/"]) {
            let op = if t.lexeme == "*" { BinaryOp::Mul } else { BinaryOp::Div };
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat_op(&["-"]).is_some() {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.primary()?;
        if let Some(t) = self.eat_op(&["^"]) {
            let exponent_at = self.here();
            let exponent = self.unary()?;
            if exponent.contains_variables() {
                return Err(self.error_at(exponent_at, "constant exponent"));
            }
            let e = eval_node(&exponent, &[]).map_err(|_| self.error_at(t.position, "finite exponent"))?;
            return Ok(Node::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        let here = self.here();
        let Some(t) = self.next() else {
            return Err(self.error_at(here, "operand"));
        };
        match t.kind {
            TokenKind::Number => {
                let v: f64 = t.lexeme.parse().map_err(|_| self.error_at(t.position, "number"))?;
                if !v.is_finite() {
                    return Err(self.error_at(t.position, "finite number"));
                }
                Ok(Node::Const(v))
            }
            TokenKind::Paren if t.lexeme == "(" => {
                let inner = self.additive()?;
                self.expect_paren(')')?;
                Ok(inner)
            }
            TokenKind::Identifier => self.identifier(t),
            _ => Err(self.error_at(t.position, "operand")),
        }
    }

    fn identifier(&mut self, t: &'a Token) -> Result<Node, ExprError> {
        let name = t.lexeme.as_str();
        if name == "if" {
            return self.conditional(t);
        }
        if let Some(func) = Function::from_name(name) {
            return self.call(t, func);
        }
        match self.resolve(name) {
            Some(Resolved::Component(v)) => Ok(Node::Var(v)),
            Some(Resolved::Vector(_)) => Err(self.error_at(
                t.position,
                &format!("component reference such as {name}1 (bare vector names are only allowed in norm)"),
            )),
            None => Err(ExprError::UnknownIdentifier { name: name.to_string(), position: t.position }),
        }
    }

    fn resolve(&self, name: &str) -> Option<Resolved> {
        for (slot, v) in self.vars.iter().enumerate() {
            if name == v.name {
                return Some(if v.dim == 1 {
                    Resolved::Component(VarRef { slot, component: 0, text: name.to_string() })
                } else {
                    Resolved::Vector(slot)
                });
            }
            if let Some(suffix) = name.strip_prefix(v.name.as_str()) {
                if !suffix.is_empty() && suffix.chars().all(|c| c.is_ascii_digit()) && !suffix.starts_with('0') {
                    let k: usize = suffix.parse().ok()?;
                    if (1..=v.dim).contains(&k) {
                        return Some(Resolved::Component(VarRef { slot, component: k - 1, text: name.to_string() }));
                    }
                }
            }
        }
        None
    }

    fn call(&mut self, t: &'a Token, func: Function) -> Result<Node, ExprError> {
        self.expect_paren('(')?;
        let mut args = Vec::new();
        loop {
            if func == Function::Norm {
                if let Some(slot) = self.bare_vector() {
                    let v = &self.vars[slot];
                    args.extend(
                        (0..v.dim)
                            .map(|c| Node::Var(VarRef { slot, component: c, text: format!("{}{}", v.name, c + 1) })),
                    );
                } else {
                    args.push(self.additive()?);
                }
            } else {
                args.push(self.additive()?);
            }
            match self.peek() {
                Some(c) if c.kind == TokenKind::Comma => self.pos += 1,
                _ => break,
            }
        }
        self.expect_paren(')')?;
        let (lo, hi) = func.arity();
        if args.len() < lo || args.len() > hi {
            return Err(self.error_at(t.position, &format!("{} with a valid argument count", func.name())));
        }
        Ok(Node::Call(func, args))
    }

    /// A lone vector identifier directly followed by `,` or `)`.
    fn bare_vector(&mut self) -> Option<usize> {
        let t = self.peek()?;
        if t.kind != TokenKind::Identifier {
            return None;
        }
        let Some(Resolved::Vector(slot)) = self.resolve(&t.lexeme) else {
            return None;
        };
        let follower = self.tokens.get(self.pos + 1)?;
        if follower.kind == TokenKind::Comma || follower.is_paren(')') {
            self.pos += 1;
            Some(slot)
        } else {
            None
        }
    }

    fn conditional(&mut self, _t: &'a Token) -> Result<Node, ExprError> {
        self.expect_paren('(')?;
        let lhs = self.additive()?;
        let op_at = self.here();
        let op = match self.next() {
            Some(o) if o.kind == TokenKind::Operator => CompareOp::from_symbol(&o.lexeme),
            _ => None,
        }
        .ok_or_else(|| self.error_at(op_at, "comparison operator"))?;
        let rhs = self.additive()?;
        self.expect_comma()?;
        let then = self.additive()?;
        self.expect_comma()?;
        let otherwise = self.additive()?;
        self.expect_paren(')')?;
        Ok(Node::If {
            cond: Condition { op, lhs: Box::new(lhs), rhs: Box::new(rhs) },
            then: Box::new(then),
            otherwise: Box::new(otherwise),
        })
    }
}

enum Resolved {
    Component(VarRef),
    Vector(usize),
}

fn normalized(lexeme: &str) -> &str {
    if lexeme == "\u{2212}" {
        "-"
    } else {
        lexeme
    }
}
