//! Evaluation of ground pivot expressions (literals, constants and bound
//! loop variables). Shared by the passes and the backends.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::*;
use crate::diagnostics::Span;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Real(f64),
    Set(BTreeSet<i64>),
}

impl Value {
    /// Integer view; booleans count as 0/1.
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            Value::Bool(b) => Some(*b as i64),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Real(r) => Some(*r),
            other => other.as_int().map(|v| v as f64),
        }
    }

    /// Literal expression for this value.
    pub fn to_expr(&self) -> Expr {
        match self {
            Value::Bool(b) => Expr::boolean(*b),
            Value::Int(v) => Expr::int(*v),
            Value::Real(r) => Expr::real(*r),
            Value::Set(s) => Expr::generated(ExprKind::SetValue(
                s.iter().map(|v| Expr::int(*v)).collect(),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    #[error("`{name}` is not a constant")]
    NotGround { name: String, span: Span },
    #[error("division by zero")]
    DivisionByZero { span: Span },
    #[error("arithmetic overflow")]
    Overflow { span: Span },
    /// Integer division with a remainder, or a negative integer exponent.
    #[error("result is not exactly representable")]
    Inexact { span: Span },
    #[error("{message}")]
    Invalid { message: String, span: Span },
}

impl EvalError {
    pub fn span(&self) -> Span {
        match self {
            EvalError::NotGround { span, .. }
            | EvalError::DivisionByZero { span }
            | EvalError::Overflow { span }
            | EvalError::Inexact { span }
            | EvalError::Invalid { span, .. } => *span,
        }
    }
}

/// Values of named constants plus bound loop variables.
#[derive(Clone, Debug, Default)]
pub struct ConstEnv {
    constants: HashMap<String, Value>,
    locals: Vec<(String, i64)>,
}

impl ConstEnv {
    pub fn new() -> Self {
        Self::default()
    }

    /// Evaluates the model's top-level constants in declaration order.
    pub fn from_model(model: &Model) -> Result<Self, EvalError> {
        let mut env = ConstEnv::new();
        for c in model.constants() {
            let mut v = env.eval(&c.value)?;
            if c.decl.ty == TypeRef::Data(DataType::Real) {
                if let Value::Int(i) = v {
                    v = Value::Real(i as f64);
                }
            }
            env.constants.insert(c.decl.name.clone(), v);
        }
        Ok(env)
    }

    pub fn constant(&self, name: &str) -> Option<&Value> {
        self.constants.get(name)
    }

    pub fn insert_constant(&mut self, name: impl Into<String>, value: Value) {
        self.constants.insert(name.into(), value);
    }

    pub fn push_local(&mut self, name: &str, value: i64) {
        self.locals.push((name.to_string(), value));
    }

    pub fn pop_local(&mut self) {
        self.locals.pop();
    }

    pub fn local(&self, name: &str) -> Option<i64> {
        self.locals
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }

    fn lookup(&self, v: &VarRef, span: Span) -> Result<Value, EvalError> {
        if v.indexes.is_empty() {
            if let Some(x) = self.local(&v.name) {
                return Ok(Value::Int(x));
            }
        }
        let not_ground = || EvalError::NotGround {
            name: v.name.clone(),
            span,
        };
        match &v.binding {
            Binding::Literal { position, .. } => Ok(Value::Int(*position as i64)),
            Binding::Constant | Binding::Unresolved if v.indexes.is_empty() => {
                self.constants.get(&v.name).cloned().ok_or_else(not_ground)
            }
            _ => Err(not_ground()),
        }
    }

    pub fn eval_int(&self, e: &Expr) -> Result<i64, EvalError> {
        let v = self.eval(e)?;
        v.as_int().ok_or_else(|| EvalError::Invalid {
            message: "expected an integer".into(),
            span: e.span,
        })
    }

    pub fn eval_bool(&self, e: &Expr) -> Result<bool, EvalError> {
        let v = self.eval(e)?;
        v.as_bool().ok_or_else(|| EvalError::Invalid {
            message: "expected a boolean".into(),
            span: e.span,
        })
    }

    pub fn eval(&self, e: &Expr) -> Result<Value, EvalError> {
        let span = e.span;
        let invalid = |message: &str| EvalError::Invalid {
            message: message.to_string(),
            span,
        };
        match &e.kind {
            ExprKind::Bool(b) => Ok(Value::Bool(*b)),
            ExprKind::Int(v) => Ok(Value::Int(*v)),
            ExprKind::Real(r) => Ok(Value::Real(*r)),
            ExprKind::Var(v) => self.lookup(v, span),
            ExprKind::Object(path) => Err(EvalError::NotGround {
                name: path.first().map(|s| s.name.clone()).unwrap_or_default(),
                span,
            }),
            ExprKind::Interval(..) => Err(invalid("intervals have no ground value")),
            ExprKind::FunctionCall { callee, .. } | ExprKind::PredicateCall { callee, .. } => {
                Err(EvalError::NotGround {
                    name: callee.clone(),
                    span,
                })
            }
            ExprKind::Not(x) => Ok(Value::Bool(!self.eval_bool(x)?)),
            ExprKind::BoolBinary(op, l, r) => {
                let a = self.eval(l)?;
                let b = self.eval(r)?;
                compare_or_logic(*op, &a, &b).ok_or_else(|| invalid("operand type mismatch"))
            }
            ExprKind::SetValue(items) => {
                let mut s = BTreeSet::new();
                for i in items {
                    s.insert(self.eval_int(i)?);
                }
                Ok(Value::Set(s))
            }
            ExprKind::SetFunction(SetFn::Card, x) => match self.eval(x)? {
                Value::Set(s) => Ok(Value::Int(s.len() as i64)),
                _ => Err(invalid("card expects a set")),
            },
            ExprKind::SetBinary(op, l, r) => match (self.eval(l)?, self.eval(r)?) {
                (Value::Set(a), Value::Set(b)) => Ok(Value::Set(match op {
                    SetBinOp::Intersect => a.intersection(&b).copied().collect(),
                    SetBinOp::Union => a.union(&b).copied().collect(),
                    SetBinOp::Diff => a.difference(&b).copied().collect(),
                })),
                _ => Err(invalid("set operator expects sets")),
            },
            ExprKind::AlgFunction(f, args) => {
                let vals = args
                    .iter()
                    .map(|a| self.eval(a))
                    .collect::<Result<Vec<_>, _>>()?;
                alg_function(*f, &vals, span)
            }
            ExprKind::AlgUnary(op, x) => {
                let v = self.eval(x)?;
                match (op, v) {
                    (AlgUnaryOp::Plus, Value::Real(r)) => Ok(Value::Real(r)),
                    (AlgUnaryOp::Neg, Value::Real(r)) => Ok(Value::Real(-r)),
                    (op, v) => {
                        let i = v.as_int().ok_or_else(|| invalid("expected a number"))?;
                        match op {
                            AlgUnaryOp::Plus => Ok(Value::Int(i)),
                            AlgUnaryOp::Neg => {
                                i.checked_neg().map(Value::Int).ok_or(EvalError::Overflow { span })
                            }
                        }
                    }
                }
            }
            ExprKind::AlgBinary(op, l, r) => {
                let a = self.eval(l)?;
                let b = self.eval(r)?;
                arith(*op, &a, &b, span)
            }
        }
    }
}

pub(crate) fn compare_or_logic(op: BoolBinOp, a: &Value, b: &Value) -> Option<Value> {
    use std::cmp::Ordering;
    if !op.is_comparison() {
        let (x, y) = (a.as_bool()?, b.as_bool()?);
        return Some(Value::Bool(match op {
            BoolBinOp::And => x && y,
            BoolBinOp::Or => x || y,
            BoolBinOp::Implies => !x || y,
            BoolBinOp::Iff => x == y,
            _ => unreachable!(),
        }));
    }
    let ord = match (a, b) {
        (Value::Set(x), Value::Set(y)) => {
            return match op {
                BoolBinOp::Eq => Some(Value::Bool(x == y)),
                BoolBinOp::Ne => Some(Value::Bool(x != y)),
                _ => None,
            }
        }
        (Value::Real(_), _) | (_, Value::Real(_)) => a.as_f64()?.partial_cmp(&b.as_f64()?)?,
        _ => a.as_int()?.cmp(&b.as_int()?),
    };
    Some(Value::Bool(match op {
        BoolBinOp::Eq => ord == Ordering::Equal,
        BoolBinOp::Ne => ord != Ordering::Equal,
        BoolBinOp::Le => ord != Ordering::Greater,
        BoolBinOp::Ge => ord != Ordering::Less,
        BoolBinOp::Lt => ord == Ordering::Less,
        BoolBinOp::Gt => ord == Ordering::Greater,
        _ => unreachable!(),
    }))
}

fn arith(op: AlgBinOp, a: &Value, b: &Value, span: Span) -> Result<Value, EvalError> {
    let overflow = EvalError::Overflow { span };
    let invalid = || EvalError::Invalid {
        message: "expected numbers".into(),
        span,
    };
    if let (Some(x), Some(y)) = (a.as_int(), b.as_int()) {
        return match op {
            AlgBinOp::Add => x.checked_add(y).map(Value::Int).ok_or(overflow),
            AlgBinOp::Sub => x.checked_sub(y).map(Value::Int).ok_or(overflow),
            AlgBinOp::Mul => x.checked_mul(y).map(Value::Int).ok_or(overflow),
            AlgBinOp::Div => {
                if y == 0 {
                    Err(EvalError::DivisionByZero { span })
                } else if x % y != 0 {
                    Err(EvalError::Inexact { span })
                } else {
                    Ok(Value::Real((x / y) as f64))
                }
            }
            AlgBinOp::Pow => {
                if y < 0 {
                    Err(EvalError::Inexact { span })
                } else {
                    let exp = u32::try_from(y).map_err(|_| overflow.clone())?;
                    x.checked_pow(exp).map(Value::Int).ok_or(overflow)
                }
            }
        };
    }
    let x = a.as_f64().ok_or_else(invalid)?;
    let y = b.as_f64().ok_or_else(invalid)?;
    match op {
        AlgBinOp::Add => Ok(Value::Real(x + y)),
        AlgBinOp::Sub => Ok(Value::Real(x - y)),
        AlgBinOp::Mul => Ok(Value::Real(x * y)),
        AlgBinOp::Div if y == 0.0 => Err(EvalError::DivisionByZero { span }),
        AlgBinOp::Div => Ok(Value::Real(x / y)),
        AlgBinOp::Pow => Ok(Value::Real(x.powf(y))),
    }
}

fn alg_function(f: AlgFn, vals: &[Value], span: Span) -> Result<Value, EvalError> {
    let invalid = |m: &str| EvalError::Invalid {
        message: m.to_string(),
        span,
    };
    let all_int = vals.iter().all(|v| v.as_int().is_some());
    match f {
        AlgFn::Abs | AlgFn::Min | AlgFn::Max if all_int => {
            let ints: Vec<i64> = vals.iter().filter_map(Value::as_int).collect();
            let r = match f {
                AlgFn::Abs => ints
                    .first()
                    .ok_or_else(|| invalid("abs expects one argument"))?
                    .checked_abs()
                    .ok_or(EvalError::Overflow { span })?,
                AlgFn::Min => *ints.iter().min().ok_or_else(|| invalid("min of nothing"))?,
                _ => *ints.iter().max().ok_or_else(|| invalid("max of nothing"))?,
            };
            Ok(Value::Int(r))
        }
        _ => {
            let xs = vals
                .iter()
                .map(|v| v.as_f64().ok_or_else(|| invalid("expected numbers")))
                .collect::<Result<Vec<_>, _>>()?;
            let x = *xs.first().ok_or_else(|| invalid("missing argument"))?;
            let r = match f {
                AlgFn::Abs => x.abs(),
                AlgFn::Min => xs.iter().copied().fold(f64::INFINITY, f64::min),
                AlgFn::Max => xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                AlgFn::Sin => x.sin(),
                AlgFn::Cos => x.cos(),
                AlgFn::Tan => x.tan(),
                AlgFn::Exp => x.exp(),
                AlgFn::Log if x <= 0.0 => return Err(invalid("log of a non-positive number")),
                AlgFn::Log => x.ln(),
                AlgFn::Sqrt if x < 0.0 => return Err(invalid("sqrt of a negative number")),
                AlgFn::Sqrt => x.sqrt(),
            };
            Ok(Value::Real(r))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_expression;

    fn eval(text: &str) -> Result<Value, EvalError> {
        ConstEnv::new().eval(&parse_expression(text).unwrap())
    }

    #[test]
    fn integer_arithmetic() {
        assert_eq!(eval("1 + 2 * 3"), Ok(Value::Int(7)));
        assert_eq!(eval("-2 ^ 2"), Ok(Value::Int(-4)));
        assert_eq!(eval("(0 - 2) ^ 2"), Ok(Value::Int(4)));
        assert_eq!(eval("abs(3 - 5)"), Ok(Value::Int(2)));
        assert_eq!(eval("max(1, 7, 3)"), Ok(Value::Int(7)));
    }

    #[test]
    fn division_is_exact_or_inexact() {
        assert_eq!(eval("6 / 3"), Ok(Value::Real(2.0)));
        assert!(matches!(eval("1 / 3"), Err(EvalError::Inexact { .. })));
        assert!(matches!(eval("1 / 0"), Err(EvalError::DivisionByZero { .. })));
    }

    #[test]
    fn sets_and_comparisons() {
        assert_eq!(eval("card({1, 2} union {2, 3})"), Ok(Value::Int(3)));
        assert_eq!(eval("1 < 2 and not false"), Ok(Value::Bool(true)));
        assert_eq!(eval("1 = 1.0"), Ok(Value::Bool(true)));
    }

    #[test]
    fn names_are_not_ground_without_env() {
        assert!(matches!(eval("x + 1"), Err(EvalError::NotGround { .. })));
        let mut env = ConstEnv::new();
        env.insert_constant("x", Value::Int(4));
        assert_eq!(env.eval(&parse_expression("x + 1").unwrap()), Ok(Value::Int(5)));
        env.push_local("x", 1);
        assert_eq!(env.eval(&parse_expression("x + 1").unwrap()), Ok(Value::Int(2)));
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(
            eval("9223372036854775807 + 1"),
            Err(EvalError::Overflow { .. })
        ));
    }
}
