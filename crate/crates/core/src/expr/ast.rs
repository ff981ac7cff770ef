use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Add | BinaryOp::Sub => 1,
            BinaryOp::Mul | BinaryOp::Div => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Exp,
    Abs,
    Sqrt,
    Min,
    Max,
    Norm,
}

impl Function {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Function::Exp,
            "abs" => Function::Abs,
            "sqrt" => Function::Sqrt,
            "min" => Function::Min,
            "max" => Function::Max,
            "norm" => Function::Norm,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Function::Exp => "exp",
            Function::Abs => "abs",
            Function::Sqrt => "sqrt",
            Function::Min => "min",
            Function::Max => "max",
            Function::Norm => "norm",
        }
    }

    /// Inclusive bounds on the argument count.
    pub fn arity(self) -> (usize, usize) {
        match self {
            Function::Exp | Function::Abs | Function::Sqrt => (1, 1),
            Function::Min | Function::Max => (2, usize::MAX),
            Function::Norm => (1, usize::MAX),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl CompareOp {
    pub fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            "<" => CompareOp::Lt,
            "<=" => CompareOp::Le,
            ">" => CompareOp::Gt,
            ">=" => CompareOp::Ge,
            "==" => CompareOp::Eq,
            _ => return None,
        })
    }

    fn symbol(self) -> &'static str {
        match self {
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
            CompareOp::Eq => "==",
        }
    }

    /// Exact IEEE comparison; `==` included.
    #[allow(clippy::float_cmp)]
    pub fn apply(self, lhs: f64, rhs: f64) -> bool {
        match self {
            CompareOp::Lt => lhs < rhs,
            CompareOp::Le => lhs <= rhs,
            CompareOp::Gt => lhs > rhs,
            CompareOp::Ge => lhs >= rhs,
            CompareOp::Eq => lhs == rhs,
        }
    }
}

/// Reference to one component of a declared vector variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarRef {
    pub slot: usize,
    pub component: usize,
    /// Spelling used when printing (`x`, `x2`, ...).
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub op: CompareOp,
    pub lhs: Box<Node>,
    pub rhs: Box<Node>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(VarRef),
    Neg(Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
    /// Power with a constant exponent, folded at parse time.
    Pow(Box<Node>, f64),
    Call(Function, Vec<Node>),
    If {
        cond: Condition,
        then: Box<Node>,
        otherwise: Box<Node>,
    },
}

const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Node {
    fn precedence(&self) -> u8 {
        match self {
            Node::Binary(op, ..) => op.precedence(),
            Node::Neg(_) => PREC_NEG,
            Node::Pow(..) => PREC_POW,
            _ => PREC_ATOM,
        }
    }

    pub fn contains_variables(&self) -> bool {
        match self {
            Node::Const(_) => false,
            Node::Var(_) => true,
            Node::Neg(a) | Node::Pow(a, _) => a.contains_variables(),
            Node::Binary(_, a, b) => a.contains_variables() || b.contains_variables(),
            Node::Call(_, args) => args.iter().any(Node::contains_variables),
            Node::If { cond, then, otherwise } => {
                cond.lhs.contains_variables()
                    || cond.rhs.contains_variables()
                    || then.contains_variables()
                    || otherwise.contains_variables()
            }
        }
    }

    /// Number of nodes; used by the compiler to size buffers.
    pub fn size(&self) -> usize {
        1 + match self {
            Node::Const(_) | Node::Var(_) => 0,
            Node::Neg(a) | Node::Pow(a, _) => a.size(),
            Node::Binary(_, a, b) => a.size() + b.size(),
            Node::Call(_, args) => args.iter().map(Node::size).sum(),
            Node::If { cond, then, otherwise } => cond.lhs.size() + cond.rhs.size() + then.size() + otherwise.size(),
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Node, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

// Printing inserts exactly the parentheses needed for the parser to rebuild
// the same tree: right operands of equal precedence are always wrapped.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(v) => write!(f, "{v}"),
            Node::Var(v) => f.write_str(&v.text),
            Node::Neg(a) => {
                f.write_str("-")?;
                write_child(f, a, a.precedence() < PREC_NEG)
            }
            Node::Binary(op, a, b) => {
                let p = op.precedence();
                write_child(f, a, a.precedence() < p)?;
                write!(f, " {} ", op.symbol())?;
                write_child(f, b, b.precedence() <= p)
            }
            Node::Pow(a, e) => {
                write_child(f, a, a.precedence() <= PREC_POW)?;
                if e.is_sign_negative() {
                    write!(f, "^(-{})", -e)
                } else {
                    write!(f, "^{e}")
                }
            }
            Node::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Node::If { cond, then, otherwise } => {
                write!(f, "if({} {} {}, {then}, {otherwise})", cond.lhs, cond.op.symbol(), cond.rhs)
            }
        }
    }
}
