use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::diagnostics::{Diagnostic, Span};
use crate::pivot::*;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlatDomain {
    Range(i64, i64),
    Values(Vec<i64>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlatVarKind {
    Int(FlatDomain),
    Bool,
    /// Set of integers drawn from `lo..hi`.
    Set { lo: i64, hi: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatVar {
    pub name: String,
    pub kind: FlatVarKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FlatOp {
    Iff,
    Implies,
    Or,
    And,
    Eq,
    Ne,
    Le,
    Ge,
    Lt,
    Gt,
    Union,
    Diff,
    Intersect,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Scalar constraint expression. Integer literals are stored with their
/// sign, so `Neg` never wraps a literal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlatExpr {
    Int(i64),
    Bool(bool),
    Var(String),
    Set(Vec<i64>),
    Neg(Box<FlatExpr>),
    Not(Box<FlatExpr>),
    Card(Box<FlatExpr>),
    Call(AlgFn, Vec<FlatExpr>),
    Bin(FlatOp, Box<FlatExpr>, Box<FlatExpr>),
}

impl FlatExpr {
    pub fn bin(op: FlatOp, l: FlatExpr, r: FlatExpr) -> FlatExpr {
        FlatExpr::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn negate(x: FlatExpr) -> FlatExpr {
        match x {
            FlatExpr::Int(v) if v != i64::MIN => FlatExpr::Int(-v),
            other => FlatExpr::Neg(Box::new(other)),
        }
    }

    /// Names of the variables mentioned, in first-occurrence order.
    pub fn variables(&self) -> Vec<&str> {
        fn go<'a>(e: &'a FlatExpr, out: &mut Vec<&'a str>) {
            match e {
                FlatExpr::Var(n) => {
                    if !out.contains(&n.as_str()) {
                        out.push(n)
                    }
                }
                FlatExpr::Neg(x) | FlatExpr::Not(x) | FlatExpr::Card(x) => go(x, out),
                FlatExpr::Call(_, args) => args.iter().for_each(|a| go(a, out)),
                FlatExpr::Bin(_, l, r) => {
                    go(l, out);
                    go(r, out)
                }
                _ => {}
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    /// Equivalent pivot expression, used for printing.
    pub fn to_pivot(&self) -> Expr {
        match self {
            FlatExpr::Int(v) => Expr::int(*v),
            FlatExpr::Bool(b) => Expr::boolean(*b),
            FlatExpr::Var(n) => Expr::generated(ExprKind::Var(VarRef {
                name: n.clone(),
                indexes: vec![],
                binding: Binding::Variable,
            })),
            FlatExpr::Set(items) => Expr::generated(ExprKind::SetValue(items.iter().map(|v| Expr::int(*v)).collect())),
            FlatExpr::Neg(x) => Expr::generated(ExprKind::AlgUnary(AlgUnaryOp::Neg, Box::new(x.to_pivot()))),
            FlatExpr::Not(x) => Expr::generated(ExprKind::Not(Box::new(x.to_pivot()))),
            FlatExpr::Card(x) => Expr::generated(ExprKind::SetFunction(SetFn::Card, Box::new(x.to_pivot()))),
            FlatExpr::Call(f, args) => Expr::generated(ExprKind::AlgFunction(*f, args.iter().map(|a| a.to_pivot()).collect())),
            FlatExpr::Bin(op, l, r) => {
                let (l, r) = (Box::new(l.to_pivot()), Box::new(r.to_pivot()));
                Expr::generated(match op {
                    FlatOp::Iff => ExprKind::BoolBinary(BoolBinOp::Iff, l, r),
                    FlatOp::Implies => ExprKind::BoolBinary(BoolBinOp::Implies, l, r),
                    FlatOp::Or => ExprKind::BoolBinary(BoolBinOp::Or, l, r),
                    FlatOp::And => ExprKind::BoolBinary(BoolBinOp::And, l, r),
                    FlatOp::Eq => ExprKind::BoolBinary(BoolBinOp::Eq, l, r),
                    FlatOp::Ne => ExprKind::BoolBinary(BoolBinOp::Ne, l, r),
                    FlatOp::Le => ExprKind::BoolBinary(BoolBinOp::Le, l, r),
                    FlatOp::Ge => ExprKind::BoolBinary(BoolBinOp::Ge, l, r),
                    FlatOp::Lt => ExprKind::BoolBinary(BoolBinOp::Lt, l, r),
                    FlatOp::Gt => ExprKind::BoolBinary(BoolBinOp::Gt, l, r),
                    FlatOp::Union => ExprKind::SetBinary(SetBinOp::Union, l, r),
                    FlatOp::Diff => ExprKind::SetBinary(SetBinOp::Diff, l, r),
                    FlatOp::Intersect => ExprKind::SetBinary(SetBinOp::Intersect, l, r),
                    FlatOp::Add => ExprKind::AlgBinary(AlgBinOp::Add, l, r),
                    FlatOp::Sub => ExprKind::AlgBinary(AlgBinOp::Sub, l, r),
                    FlatOp::Mul => ExprKind::AlgBinary(AlgBinOp::Mul, l, r),
                    FlatOp::Div => ExprKind::AlgBinary(AlgBinOp::Div, l, r),
                    FlatOp::Pow => ExprKind::AlgBinary(AlgBinOp::Pow, l, r),
                })
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FlatProgram {
    pub vars: Vec<FlatVar>,
    pub constraints: Vec<FlatExpr>,
}

impl FlatProgram {
    pub fn var(&self, name: &str) -> Option<&FlatVar> {
        self.vars.iter().find(|v| v.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum FlatError {
    #[error("{kind} must be removed before flat lowering")]
    ResidualStatement { kind: String, span: Span },
    #[error("index {index} of `{name}` is out of range 1..{size}")]
    IndexOutOfRange { name: String, index: i64, size: i64, span: Span },
    #[error("`{what}` is not ground")]
    NonGround { what: String, span: Span },
    #[error("not supported in flat models: {what}")]
    Unsupported { what: String, span: Span },
    #[error("scalarized name `{0}` is used twice")]
    NameCollision(String),
}

impl FlatError {
    pub fn span(&self) -> Span {
        match self {
            FlatError::ResidualStatement { span, .. }
            | FlatError::IndexOutOfRange { span, .. }
            | FlatError::NonGround { span, .. }
            | FlatError::Unsupported { span, .. } => *span,
            FlatError::NameCollision(_) => Span::generated(),
        }
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        Diagnostic::error(self.span(), self.to_string())
    }
}

fn unsupported(what: impl Into<String>, span: Span) -> FlatError {
    FlatError::Unsupported {
        what: what.into(),
        span,
    }
}

/// `name__i__j` for a cell of an array.
pub fn scalar_name(base: &str, index: &[i64]) -> String {
    let mut s = base.to_string();
    for i in index {
        let _ = write!(s, "__{}", i);
    }
    s
}

/// All index tuples of an array, row-major.
fn cells(dims: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for &d in dims {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (1..=d).map(move |i| {
                    let mut p = prefix.clone();
                    p.push(i);
                    p
                })
            })
            .collect();
    }
    out
}

struct Lowerer<'m> {
    env: ConstEnv,
    arrays: std::collections::HashMap<&'m str, Vec<i64>>,
}

impl Lowerer<'_> {
    fn ground(&self, e: &Expr, what: &str) -> Result<i64, FlatError> {
        match self.env.eval_int(e) {
            Ok(v) => Ok(v),
            Err(EvalError::NotGround { .. }) => Err(FlatError::NonGround {
                what: what.to_string(),
                span: e.span,
            }),
            Err(err) => Err(unsupported(format!("{} ({})", what, err), e.span)),
        }
    }

    fn domain(&self, v: &Variable) -> Result<Option<FlatDomain>, FlatError> {
        let name = &v.decl.name;
        Ok(Some(match &v.domain {
            None => return Ok(None),
            Some(Domain::Interval { lo, hi }) => FlatDomain::Range(self.ground(lo, name)?, self.ground(hi, name)?),
            Some(Domain::Set { members }) => {
                let mut vals = members.iter().map(|m| self.ground(m, name)).collect::<Result<Vec<_>, _>>()?;
                vals.sort_unstable();
                vals.dedup();
                FlatDomain::Values(vals)
            }
            Some(Domain::Expr { expr }) => match self.env.eval(expr) {
                Ok(Value::Set(s)) => FlatDomain::Values(s.into_iter().collect()),
                _ => return Err(FlatError::NonGround { what: name.clone(), span: expr.span }),
            },
        }))
    }

    fn var_kind(&self, v: &Variable) -> Result<FlatVarKind, FlatError> {
        let span = v.decl.span;
        match &v.decl.ty {
            TypeRef::Data(DataType::Boolean) if !v.decl.is_set => Ok(FlatVarKind::Bool),
            TypeRef::Data(DataType::Integer) if v.decl.is_set => match self.domain(v)? {
                Some(FlatDomain::Range(lo, hi)) => Ok(FlatVarKind::Set { lo, hi }),
                Some(FlatDomain::Values(vals)) => match (vals.first(), vals.last()) {
                    (Some(&lo), Some(&hi)) if (hi - lo + 1) as usize == vals.len() => Ok(FlatVarKind::Set { lo, hi }),
                    _ => Err(unsupported(format!("non-contiguous universe of `{}`", v.decl.name), span)),
                },
                None => Err(unsupported(format!("set variable `{}` without a universe", v.decl.name), span)),
            },
            TypeRef::Data(DataType::Integer) => match self.domain(v)? {
                Some(d) => Ok(FlatVarKind::Int(d)),
                None => Err(unsupported(format!("unbounded integer variable `{}`", v.decl.name), span)),
            },
            TypeRef::Data(DataType::Real) => Err(unsupported(format!("real variable `{}`", v.decl.name), span)),
            other => Err(FlatError::ResidualStatement {
                kind: format!("variable of type `{}`", other.name()),
                span,
            }),
        }
    }

    fn expr(&self, e: &Expr) -> Result<FlatExpr, FlatError> {
        let span = e.span;
        Ok(match &e.kind {
            ExprKind::Int(v) => FlatExpr::Int(*v),
            ExprKind::Bool(b) => FlatExpr::Bool(*b),
            ExprKind::Real(_) | ExprKind::Interval(..) => return Err(unsupported("real numbers", span)),
            ExprKind::Var(v) => {
                if let Some(dims) = self.arrays.get(v.name.as_str()) {
                    if v.indexes.len() != dims.len() {
                        return Err(unsupported(format!("array `{}` used without all its indexes", v.name), span));
                    }
                    let mut idx = Vec::with_capacity(dims.len());
                    for (i, d) in v.indexes.iter().zip(dims) {
                        let k = self.ground(i, &format!("index of `{}`", v.name))?;
                        if k < 1 || k > *d {
                            return Err(FlatError::IndexOutOfRange {
                                name: v.name.clone(),
                                index: k,
                                size: *d,
                                span,
                            });
                        }
                        idx.push(k);
                    }
                    FlatExpr::Var(scalar_name(&v.name, &idx))
                } else if let Some(c) = self.env.constant(&v.name).filter(|_| v.binding != Binding::Variable) {
                    match c {
                        Value::Int(i) => FlatExpr::Int(*i),
                        Value::Bool(b) => FlatExpr::Bool(*b),
                        Value::Set(s) => FlatExpr::Set(s.iter().copied().collect()),
                        Value::Real(_) => return Err(unsupported("real numbers", span)),
                    }
                } else if let Binding::Literal { .. } = v.binding {
                    return Err(FlatError::ResidualStatement {
                        kind: "enumeration literal".into(),
                        span,
                    });
                } else if !v.indexes.is_empty() {
                    return Err(unsupported(format!("indexing the scalar `{}`", v.name), span));
                } else if v.binding == Binding::Variable {
                    FlatExpr::Var(v.name.clone())
                } else {
                    return Err(FlatError::NonGround {
                        what: v.name.clone(),
                        span,
                    });
                }
            }
            ExprKind::Object(_) => {
                return Err(FlatError::ResidualStatement {
                    kind: "object navigation".into(),
                    span,
                })
            }
            ExprKind::FunctionCall { callee, .. } | ExprKind::PredicateCall { callee, .. } => {
                return Err(unsupported(format!("call to `{}`", callee), span))
            }
            ExprKind::Not(x) => FlatExpr::Not(Box::new(self.expr(x)?)),
            ExprKind::BoolBinary(op, l, r) => {
                let op = match op {
                    BoolBinOp::Iff => FlatOp::Iff,
                    BoolBinOp::Implies => FlatOp::Implies,
                    BoolBinOp::And => FlatOp::And,
                    BoolBinOp::Or => FlatOp::Or,
                    BoolBinOp::Eq => FlatOp::Eq,
                    BoolBinOp::Ne => FlatOp::Ne,
                    BoolBinOp::Le => FlatOp::Le,
                    BoolBinOp::Ge => FlatOp::Ge,
                    BoolBinOp::Lt => FlatOp::Lt,
                    BoolBinOp::Gt => FlatOp::Gt,
                };
                FlatExpr::bin(op, self.expr(l)?, self.expr(r)?)
            }
            ExprKind::SetValue(items) => {
                let mut vals = Vec::with_capacity(items.len());
                for i in items {
                    match self.expr(i)? {
                        FlatExpr::Int(v) => vals.push(v),
                        _ => return Err(FlatError::NonGround { what: "set element".into(), span: i.span }),
                    }
                }
                FlatExpr::Set(vals)
            }
            ExprKind::SetFunction(SetFn::Card, x) => FlatExpr::Card(Box::new(self.expr(x)?)),
            ExprKind::SetBinary(op, l, r) => {
                let op = match op {
                    SetBinOp::Intersect => FlatOp::Intersect,
                    SetBinOp::Union => FlatOp::Union,
                    SetBinOp::Diff => FlatOp::Diff,
                };
                FlatExpr::bin(op, self.expr(l)?, self.expr(r)?)
            }
            ExprKind::AlgFunction(f, args) => match f {
                AlgFn::Abs | AlgFn::Min | AlgFn::Max => {
                    FlatExpr::Call(*f, args.iter().map(|a| self.expr(a)).collect::<Result<_, _>>()?)
                }
                other => return Err(unsupported(format!("function `{}`", other.name()), span)),
            },
            ExprKind::AlgUnary(AlgUnaryOp::Plus, x) => self.expr(x)?,
            ExprKind::AlgUnary(AlgUnaryOp::Neg, x) => FlatExpr::negate(self.expr(x)?),
            ExprKind::AlgBinary(op, l, r) => {
                let op = match op {
                    AlgBinOp::Add => FlatOp::Add,
                    AlgBinOp::Sub => FlatOp::Sub,
                    AlgBinOp::Mul => FlatOp::Mul,
                    AlgBinOp::Div => FlatOp::Div,
                    AlgBinOp::Pow => FlatOp::Pow,
                };
                FlatExpr::bin(op, self.expr(l)?, self.expr(r)?)
            }
        })
    }
}

/// Scalarizes arrays and inlines constants. The model must be free of
/// classes, enumerations, loops, conditionals and global constraints.
pub fn lower_to_flat(m: &Model) -> Result<FlatProgram, FlatError> {
    for e in &m.elements {
        let residual = match e {
            ModelElement::Classifier(Classifier::Class(c)) => Some((format!("class `{}`", c.name), c.span)),
            ModelElement::Classifier(Classifier::Enumeration(en)) => {
                Some((format!("enumeration `{}`", en.name), en.span))
            }
            ModelElement::Parameterized(ParameterizedElement::Predicate(p)) => {
                Some((format!("predicate `{}`", p.name), p.span))
            }
            ModelElement::Parameterized(ParameterizedElement::Function(f)) => {
                Some((format!("function `{}`", f.name), f.span))
            }
            ModelElement::Feature(ModelFeature::Record(r)) => Some((format!("record `{}`", r.name), r.span)),
            _ => None,
        };
        if let Some((kind, span)) = residual {
            return Err(FlatError::ResidualStatement { kind, span });
        }
    }
    let mut low = Lowerer {
        env: crate::passes::constant_env(m).map_err(|e| unsupported(e.to_string(), e.span()))?,
        arrays: Default::default(),
    };
    let mut prog = FlatProgram::default();
    let mut names = HashSet::new();
    for v in m.variables() {
        let kind = low.var_kind(v)?;
        let dims = v
            .decl
            .dims
            .iter()
            .map(|d| low.ground(d, &v.decl.name))
            .collect::<Result<Vec<_>, _>>()?;
        if !dims.is_empty() {
            low.arrays.insert(&v.decl.name, dims.clone());
        }
        for idx in cells(&dims) {
            let name = scalar_name(&v.decl.name, &idx);
            if !names.insert(name.clone()) {
                return Err(FlatError::NameCollision(name));
            }
            prog.vars.push(FlatVar {
                name,
                kind: kind.clone(),
            });
        }
    }
    for z in m.zones() {
        for s in &z.body {
            match s {
                Statement::Constraint(c) => prog.constraints.push(low.expr(&c.expr)?),
                other => {
                    let kind = match other {
                        Statement::Global(g) => format!("global constraint `{}`", g.name),
                        other => other.kind_name().to_string(),
                    };
                    return Err(FlatError::ResidualStatement {
                        kind,
                        span: other.span(),
                    });
                }
            }
        }
    }
    Ok(prog)
}

/// One line per variable, then one line per constraint.
pub fn emit_flat(p: &FlatProgram) -> String {
    let mut out = String::new();
    for v in &p.vars {
        match &v.kind {
            FlatVarKind::Int(FlatDomain::Range(lo, hi)) => {
                let _ = writeln!(out, "var int {} in {}..{};", v.name, lo, hi);
            }
            FlatVarKind::Int(FlatDomain::Values(vals)) => {
                let vals: Vec<String> = vals.iter().map(|x| x.to_string()).collect();
                let _ = writeln!(out, "var int {} in {{{}}};", v.name, vals.join(", "));
            }
            FlatVarKind::Bool => {
                let _ = writeln!(out, "var bool {};", v.name);
            }
            FlatVarKind::Set { lo, hi } => {
                let _ = writeln!(out, "var set of {}..{} {};", lo, hi, v.name);
            }
        }
    }
    for c in &p.constraints {
        // Flat expressions only contain printable forms.
        let text = print_expr(&c.to_pivot()).unwrap_or_default();
        let _ = writeln!(out, "constraint {};", text);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse, SourceUnit};
    use crate::passes::loop_unroll;

    fn lower(text: &str) -> Result<FlatProgram, FlatError> {
        let m = parse(&SourceUnit::model(text)).unwrap();
        lower_to_flat(&loop_unroll(&m).unwrap())
    }

    #[test]
    fn two_cells_one_constraint() {
        let p = lower("int x[2] in 1..3; constraint c { x[1] != x[2]; }").unwrap();
        assert_eq!(
            emit_flat(&p),
            "var int x__1 in 1..3;\nvar int x__2 in 1..3;\nconstraint x__1 != x__2;\n"
        );
    }

    #[test]
    fn empty_model_is_empty() {
        let p = lower_to_flat(&Model::new("e")).unwrap();
        assert_eq!(p, FlatProgram::default());
        assert_eq!(emit_flat(&p), "");
    }

    #[test]
    fn simple_program_text() {
        let p = FlatProgram {
            vars: vec![FlatVar {
                name: "x".into(),
                kind: FlatVarKind::Int(FlatDomain::Range(1, 3)),
            }],
            constraints: vec![FlatExpr::bin(FlatOp::Eq, FlatExpr::Var("x".into()), FlatExpr::Int(2))],
        };
        assert_eq!(emit_flat(&p), "var int x in 1..3;\nconstraint x = 2;\n");
    }

    #[test]
    fn constants_are_inlined_and_sets_declared() {
        let p = lower("int k := 2; int set s[2] in 1..4; bool b; constraint c { card(s[k]) = k; b; }").unwrap();
        assert_eq!(
            emit_flat(&p),
            "var set of 1..4 s__1;\nvar set of 1..4 s__2;\nvar bool b;\nconstraint card(s__2) = 2;\nconstraint b;\n"
        );
    }

    #[test]
    fn residual_statements_are_reported() {
        let m = parse(&SourceUnit::model("int x[2] in 1..2; constraint c { forall(i in 1..2) { x[i] = 1; } }")).unwrap();
        assert!(matches!(lower_to_flat(&m), Err(FlatError::ResidualStatement { .. })));
        let m = parse(&SourceUnit::model("int x[2] in 1..2; constraint c { alldifferent(x[1], x[2]); }")).unwrap();
        assert!(matches!(lower_to_flat(&m), Err(FlatError::ResidualStatement { .. })));
    }

    #[test]
    fn out_of_range_index() {
        assert!(matches!(
            lower("int x[2] in 1..2; constraint c { x[3] = 1; }"),
            Err(FlatError::IndexOutOfRange { index: 3, .. })
        ));
    }

    #[test]
    fn scalarized_names_must_be_unique() {
        assert!(matches!(
            lower("int x[1] in 1..2; int x__1 in 1..2;"),
            Err(FlatError::NameCollision(_))
        ));
    }
}
