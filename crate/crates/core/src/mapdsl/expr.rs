use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

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

    fn apply(self, l: f64, r: f64) -> f64 {
        match self {
            BinOp::Add => l + r,
            BinOp::Sub => l - r,
            BinOp::Mul => l * r,
            BinOp::Div => l / r,
            BinOp::Pow => l.powf(r),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    fn holds(self, l: f64, r: f64) -> bool {
        match self {
            CmpOp::Lt => l < r,
            CmpOp::Le => l <= r,
            CmpOp::Gt => l > r,
            CmpOp::Ge => l >= r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Sin, Func::Cos, Func::Exp, Func::Log, Func::Abs];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            // NaN / -inf for non-positive input; callers detect non-finite steps.
            Func::Log => v.ln(),
            Func::Abs => v.abs(),
        }
    }
}

/// Expression tree produced by [`super::parse_expr`].
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    /// Only valid at the top of an expression (map guards).
    Compare(CmpOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn free_variables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(name) => {
                out.insert(name);
            }
            Expr::Neg(e) | Expr::Call(_, e) => e.collect_vars(out),
            Expr::Binary(_, l, r) | Expr::Compare(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    pub fn is_comparison(&self) -> bool {
        matches!(self, Expr::Compare(..))
    }

    /// Evaluates in IEEE-754 double precision. Comparisons yield 1.0 or 0.0.
    pub fn eval(&self, bindings: &HashMap<String, f64>) -> Result<f64> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var(name) => *bindings.get(name).ok_or_else(|| Error::UnboundVariable(name.clone()))?,
            Expr::Neg(e) => -e.eval(bindings)?,
            Expr::Binary(op, l, r) => op.apply(l.eval(bindings)?, r.eval(bindings)?),
            Expr::Call(f, e) => f.apply(e.eval(bindings)?),
            Expr::Compare(op, l, r) => {
                if op.holds(l.eval(bindings)?, r.eval(bindings)?) {
                    1.0
                } else {
                    0.0
                }
            }
        })
    }

    fn is_atomic(&self) -> bool {
        matches!(self, Expr::Num(_) | Expr::Var(_) | Expr::Call(..))
    }
}

/// Prints a form that reparses to the same tree: every binary operation is
/// parenthesized and literals use the shortest round-trip representation.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(name) => f.write_str(name),
            Expr::Neg(e) if e.is_atomic() => write!(f, "-{e}"),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Compare(op, l, r) => write!(f, "{l} {} {r}", op.symbol()),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Slot {
    State(usize),
    Param(usize),
}

/// Expression with variables resolved to state/parameter slots.
#[derive(Debug, Clone)]
pub(crate) enum Compiled {
    Num(f64),
    Slot(Slot),
    Neg(Box<Compiled>),
    Binary(BinOp, Box<Compiled>, Box<Compiled>),
    Call(Func, Box<Compiled>),
    Compare(CmpOp, Box<Compiled>, Box<Compiled>),
}

impl Compiled {
    pub(crate) fn new(expr: &Expr, state_names: &[String], param_names: &[String]) -> Result<Self> {
        let rec = |e: &Expr| Compiled::new(e, state_names, param_names).map(Box::new);
        Ok(match expr {
            Expr::Num(v) => Compiled::Num(*v),
            Expr::Var(name) => {
                if let Some(i) = state_names.iter().position(|s| s == name) {
                    Compiled::Slot(Slot::State(i))
                } else if let Some(i) = param_names.iter().position(|s| s == name) {
                    Compiled::Slot(Slot::Param(i))
                } else {
                    return Err(Error::UnboundVariable(name.clone()));
                }
            }
            Expr::Neg(e) => Compiled::Neg(rec(e)?),
            Expr::Binary(op, l, r) => Compiled::Binary(*op, rec(l)?, rec(r)?),
            Expr::Call(f, e) => Compiled::Call(*f, rec(e)?),
            Expr::Compare(op, l, r) => Compiled::Compare(*op, rec(l)?, rec(r)?),
        })
    }

    pub(crate) fn eval(&self, x: &[f64], params: &[f64]) -> f64 {
        match self {
            Compiled::Num(v) => *v,
            Compiled::Slot(Slot::State(i)) => x[*i],
            Compiled::Slot(Slot::Param(i)) => params[*i],
            Compiled::Neg(e) => -e.eval(x, params),
            Compiled::Binary(op, l, r) => op.apply(l.eval(x, params), r.eval(x, params)),
            Compiled::Call(f, e) => f.apply(e.eval(x, params)),
            Compiled::Compare(op, l, r) => {
                if op.holds(l.eval(x, params), r.eval(x, params)) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}
