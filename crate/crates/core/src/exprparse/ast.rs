use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
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

#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Number(f64),
    Var(Var),
    Pi,
    Neg(Box<ExprAst>),
    Binary {
        op: BinOp,
        lhs: Box<ExprAst>,
        rhs: Box<ExprAst>,
    },
    Call {
        func: Func,
        arg: Box<ExprAst>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("domain error in {0}")]
    Domain(&'static str),
    #[error("result is not finite")]
    NonFinite,
}

impl ExprAst {
    pub fn evaluate(&self, x: f64, t: f64) -> Result<f64, EvalError> {
        let value = match self {
            ExprAst::Number(v) => *v,
            ExprAst::Var(Var::X) => x,
            ExprAst::Var(Var::T) => t,
            ExprAst::Pi => std::f64::consts::PI,
            ExprAst::Neg(e) => -e.evaluate(x, t)?,
            ExprAst::Binary { op, lhs, rhs } => {
                let a = lhs.evaluate(x, t)?;
                let b = rhs.evaluate(x, t)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        if a == 0.0 && b < 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        if a < 0.0 && b.fract() != 0.0 {
                            return Err(EvalError::Domain("^"));
                        }
                        a.powf(b)
                    }
                }
            }
            ExprAst::Call { func, arg } => {
                let a = arg.evaluate(x, t)?;
                match func {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(EvalError::Domain("sqrt"));
                        }
                        a.sqrt()
                    }
                    Func::Abs => a.abs(),
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    pub fn depends_on(&self, var: Var) -> bool {
        match self {
            ExprAst::Var(v) => *v == var,
            ExprAst::Number(_) | ExprAst::Pi => false,
            ExprAst::Neg(e) | ExprAst::Call { arg: e, .. } => e.depends_on(var),
            ExprAst::Binary { lhs, rhs, .. } => lhs.depends_on(var) || rhs.depends_on(var),
        }
    }

    pub fn depth(&self) -> usize {
        1 + match self {
            ExprAst::Number(_) | ExprAst::Var(_) | ExprAst::Pi => 0,
            ExprAst::Neg(e) | ExprAst::Call { arg: e, .. } => e.depth(),
            ExprAst::Binary { lhs, rhs, .. } => lhs.depth().max(rhs.depth()),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            ExprAst::Binary { op: BinOp::Add | BinOp::Sub, .. } => 1,
            ExprAst::Binary { op: BinOp::Mul | BinOp::Div, .. } => 2,
            ExprAst::Neg(_) => 3,
            ExprAst::Binary { op: BinOp::Pow, .. } => 4,
            _ => 5,
        }
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &ExprAst, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Minimal-parenthesis rendering that parses back to the same tree.
impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprAst::Number(v) => write!(f, "{v}"),
            ExprAst::Var(Var::X) => f.write_str("x"),
            ExprAst::Var(Var::T) => f.write_str("t"),
            ExprAst::Pi => f.write_str("pi"),
            ExprAst::Neg(e) => {
                f.write_str("-")?;
                write_wrapped(f, e, e.precedence() < 3)
            }
            ExprAst::Call { func, arg } => write!(f, "{}({arg})", func.name()),
            ExprAst::Binary { op, lhs, rhs } => {
                let p = self.precedence();
                let (left, right) = if *op == BinOp::Pow {
                    (lhs.precedence() <= 4, rhs.precedence() < 3)
                } else {
                    (lhs.precedence() < p, rhs.precedence() <= p)
                };
                write_wrapped(f, lhs, left)?;
                write!(f, " {} ", op.symbol())?;
                write_wrapped(f, rhs, right)
            }
        }
    }
}
