//! Two evaluators over the same semantics: a recursive tree walker and a
//! flat stack program compiled from the tree. Both share the primitive
//! operations below so their results are bit-identical.

use super::ast::{BinaryOp, CompareOp, Function, Node};
use super::EvalError;

fn checked(v: f64, op: &'static str) -> Result<f64, EvalError> {
    if v.is_nan() {
        Err(EvalError::NotANumber { op })
    } else {
        Ok(v)
    }
}

fn binary(op: BinaryOp, a: f64, b: f64) -> Result<f64, EvalError> {
    match op {
        BinaryOp::Add => checked(a + b, "+"),
        BinaryOp::Sub => checked(a - b, "-"),
        BinaryOp::Mul => checked(a * b, "*"),
        BinaryOp::Div => {
            if b == 0.0 {
                Err(EvalError::DivisionByZero)
            } else {
                checked(a / b, "/")
            }
        }
    }
}

fn power(base: f64, e: f64) -> Result<f64, EvalError> {
    if base == 0.0 && e < 0.0 {
        return Err(EvalError::ZeroToNegativePower);
    }
    let v = if e.fract() == 0.0 && e.abs() <= f64::from(i32::MAX) { base.powi(e as i32) } else { base.powf(e) };
    checked(v, "^")
}

fn unary_call(func: Function, a: f64) -> Result<f64, EvalError> {
    match func {
        Function::Exp => checked(a.exp(), "exp"),
        Function::Abs => Ok(a.abs()),
        Function::Sqrt => checked(a.sqrt(), "sqrt"),
        _ => unreachable!("not a unary function"),
    }
}

fn fold(func: Function, values: &[f64]) -> Result<f64, EvalError> {
    match func {
        Function::Min => Ok(values.iter().copied().fold(f64::INFINITY, f64::min)),
        Function::Max => Ok(values.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        Function::Norm => checked(values.iter().map(|v| v * v).sum::<f64>().sqrt(), "norm"),
        _ => unary_call(func, values[0]),
    }
}

fn finish(v: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Overflow)
    }
}

/// Tree-walking evaluation; `args[slot][component]` holds variable values.
pub fn eval_node(node: &Node, args: &[&[f64]]) -> Result<f64, EvalError> {
    finish(walk(node, args)?)
}

fn walk(node: &Node, args: &[&[f64]]) -> Result<f64, EvalError> {
    match node {
        Node::Const(v) => Ok(*v),
        Node::Var(v) => args
            .get(v.slot)
            .and_then(|a| a.get(v.component))
            .copied()
            .ok_or_else(|| EvalError::Unbound { name: v.text.clone() }),
        Node::Neg(a) => Ok(-walk(a, args)?),
        Node::Binary(op, a, b) => binary(*op, walk(a, args)?, walk(b, args)?),
        Node::Pow(a, e) => power(walk(a, args)?, *e),
        Node::Call(func, list) => {
            let values = list.iter().map(|a| walk(a, args)).collect::<Result<Vec<_>, _>>()?;
            fold(*func, &values)
        }
        Node::If { cond, then, otherwise } => {
            let l = walk(&cond.lhs, args)?;
            let r = walk(&cond.rhs, args)?;
            if cond.op.apply(l, r) {
                walk(then, args)
            } else {
                walk(otherwise, args)
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Instr {
    Const(f64),
    Load {
        slot: usize,
        component: usize,
    },
    Neg,
    Binary(BinaryOp),
    Pow(f64),
    Unary(Function),
    Fold(Function, usize),
    /// Pops rhs, lhs; jumps to target when the comparison is false.
    JumpUnless(CompareOp, usize),
    Jump(usize),
}

const STACK_LIMIT: usize = 64;

/// Compiled form of an expression tree.
#[derive(Debug, Clone)]
pub struct Program {
    code: Vec<Instr>,
}

impl Program {
    /// Returns `None` when the tree needs more stack than the fixed buffer.
    pub fn compile(node: &Node) -> Option<Self> {
        let mut code = Vec::with_capacity(node.size());
        let depth = emit(node, &mut code, 0);
        (depth <= STACK_LIMIT).then_some(Program { code })
    }

    pub fn run(&self, args: &[&[f64]]) -> Result<f64, EvalError> {
        let mut stack = [0.0f64; STACK_LIMIT];
        let mut sp = 0usize;
        let mut pc = 0usize;
        while pc < self.code.len() {
            match self.code[pc] {
                Instr::Const(v) => {
                    stack[sp] = v;
                    sp += 1;
                }
                Instr::Load { slot, component } => {
                    stack[sp] = match args.get(slot).and_then(|a| a.get(component)) {
                        Some(v) => *v,
                        None => return Err(EvalError::Unbound { name: format!("slot {slot}[{component}]") }),
                    };
                    sp += 1;
                }
                Instr::Neg => stack[sp - 1] = -stack[sp - 1],
                Instr::Binary(op) => {
                    sp -= 1;
                    stack[sp - 1] = binary(op, stack[sp - 1], stack[sp])?;
                }
                Instr::Pow(e) => stack[sp - 1] = power(stack[sp - 1], e)?,
                Instr::Unary(func) => stack[sp - 1] = unary_call(func, stack[sp - 1])?,
                Instr::Fold(func, n) => {
                    let v = fold(func, &stack[sp - n..sp])?;
                    sp -= n;
                    stack[sp] = v;
                    sp += 1;
                }
                Instr::JumpUnless(op, target) => {
                    sp -= 2;
                    if !op.apply(stack[sp], stack[sp + 1]) {
                        pc = target;
                        continue;
                    }
                }
                Instr::Jump(target) => {
                    pc = target;
                    continue;
                }
            }
            pc += 1;
        }
        debug_assert_eq!(sp, 1);
        finish(stack[0])
    }
}

/// Appends code for `node`; returns the peak stack depth reached, given
/// `base` values already on the stack.
fn emit(node: &Node, code: &mut Vec<Instr>, base: usize) -> usize {
    match node {
        Node::Const(v) => {
            code.push(Instr::Const(*v));
            base + 1
        }
        Node::Var(v) => {
            code.push(Instr::Load { slot: v.slot, component: v.component });
            base + 1
        }
        Node::Neg(a) => {
            let d = emit(a, code, base);
            code.push(Instr::Neg);
            d
        }
        Node::Binary(op, a, b) => {
            let da = emit(a, code, base);
            let db = emit(b, code, base + 1);
            code.push(Instr::Binary(*op));
            da.max(db)
        }
        Node::Pow(a, e) => {
            let d = emit(a, code, base);
            code.push(Instr::Pow(*e));
            d
        }
        Node::Call(func, list) => {
            let mut peak = base;
            for (i, a) in list.iter().enumerate() {
                peak = peak.max(emit(a, code, base + i));
            }
            match func {
                Function::Exp | Function::Abs | Function::Sqrt => code.push(Instr::Unary(*func)),
                _ => code.push(Instr::Fold(*func, list.len())),
            }
            peak
        }
        Node::If { cond, then, otherwise } => {
            let dl = emit(&cond.lhs, code, base);
            let dr = emit(&cond.rhs, code, base + 1);
            let branch = code.len();
            code.push(Instr::JumpUnless(cond.op, 0));
            let dt = emit(then, code, base);
            let jump = code.len();
            code.push(Instr::Jump(0));
            let else_start = code.len();
            let de = emit(otherwise, code, base);
            let end = code.len();
            code[branch] = Instr::JumpUnless(cond.op, else_start);
            code[jump] = Instr::Jump(end);
            dl.max(dr).max(dt).max(de)
        }
    }
}
