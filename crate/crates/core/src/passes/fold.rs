use super::PassOutput;
use crate::pivot::visit::map_children;
use crate::pivot::*;

/// Bottom-up expression simplifier.
///
/// Literal-only subexpressions are evaluated. Loop variables bound in `env`
/// are replaced by their value. Constants are inlined only where requested:
/// everywhere when `inline_constants` is set, inside array indexes when
/// `inline_in_indexes` is set.
pub(crate) struct Folder<'e> {
    pub env: &'e ConstEnv,
    pub inline_constants: bool,
    pub inline_in_indexes: bool,
    pub rewrites: usize,
}

/// Literal forms: numbers (with a canonical leading minus), booleans and
/// sets of integer literals.
pub(crate) fn is_literal(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Int(_) | ExprKind::Real(_) | ExprKind::Bool(_) => true,
        ExprKind::AlgUnary(AlgUnaryOp::Neg, x) => matches!(x.kind, ExprKind::Int(_) | ExprKind::Real(_)),
        ExprKind::SetValue(items) => items.iter().all(|i| i.as_int().is_some()),
        _ => false,
    }
}

fn children_literal(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Not(x) | ExprKind::SetFunction(_, x) | ExprKind::AlgUnary(_, x) => is_literal(x),
        ExprKind::BoolBinary(_, l, r) | ExprKind::SetBinary(_, l, r) | ExprKind::AlgBinary(_, l, r) => {
            is_literal(l) && is_literal(r)
        }
        ExprKind::AlgFunction(_, args) => args.iter().all(is_literal),
        _ => false,
    }
}

fn is_int(e: &Expr, v: i64) -> bool {
    matches!(e.kind, ExprKind::Int(x) if x == v)
}

impl Folder<'_> {
    pub(crate) fn new(env: &ConstEnv) -> Folder<'_> {
        Folder {
            env,
            inline_constants: false,
            inline_in_indexes: false,
            rewrites: 0,
        }
    }

    pub(crate) fn expr(&mut self, e: &Expr) -> Result<Expr, EvalError> {
        self.fold(e, self.inline_constants)
    }

    /// Folds with constants inlined, for dims, domains and constant values.
    pub(crate) fn ground(&mut self, e: &Expr) -> Result<Expr, EvalError> {
        self.fold(e, true)
    }

    fn var(&mut self, v: &VarRef) -> Result<VarRef, EvalError> {
        let inline = self.inline_constants || self.inline_in_indexes;
        Ok(VarRef {
            name: v.name.clone(),
            indexes: v
                .indexes
                .iter()
                .map(|i| self.fold(i, inline))
                .collect::<Result<_, _>>()?,
            binding: v.binding.clone(),
        })
    }

    fn fold(&mut self, e: &Expr, inline: bool) -> Result<Expr, EvalError> {
        match &e.kind {
            ExprKind::Var(v) => {
                if v.indexes.is_empty() {
                    if matches!(v.binding, Binding::Local | Binding::Unresolved) {
                        if let Some(x) = self.env.local(&v.name) {
                            self.rewrites += 1;
                            return Ok(Expr { span: e.span, ..Expr::int(x) });
                        }
                    }
                    if inline && v.binding == Binding::Constant {
                        if let Some(c) = self.env.constant(&v.name) {
                            self.rewrites += 1;
                            return Ok(Expr { span: e.span, ..c.to_expr() });
                        }
                    }
                }
                return Ok(Expr::new(ExprKind::Var(self.var(v)?), e.span));
            }
            ExprKind::Object(path) => {
                let path = path.iter().map(|s| self.var(s)).collect::<Result<_, _>>()?;
                return Ok(Expr::new(ExprKind::Object(path), e.span));
            }
            _ => {}
        }
        if is_literal(e) {
            return Ok(e.clone());
        }
        let folded = map_children(e, &mut |c| self.fold(c, inline))?;
        if children_literal(&folded) {
            match self.env.eval(&folded) {
                Ok(Value::Real(r)) if !r.is_finite() => return Ok(folded),
                Ok(v) => {
                    self.rewrites += 1;
                    return Ok(Expr { span: e.span, ..v.to_expr() });
                }
                Err(err @ (EvalError::DivisionByZero { .. } | EvalError::Overflow { .. })) => {
                    return Err(err)
                }
                Err(_) => return Ok(folded),
            }
        }
        Ok(self.identity(folded))
    }

    fn identity(&mut self, e: Expr) -> Expr {
        let ExprKind::AlgBinary(op, l, r) = &e.kind else {
            return e;
        };
        let keep = match op {
            AlgBinOp::Add if is_int(r, 0) => Some(l),
            AlgBinOp::Add if is_int(l, 0) => Some(r),
            AlgBinOp::Sub if is_int(r, 0) => Some(l),
            AlgBinOp::Mul if is_int(r, 1) => Some(l),
            AlgBinOp::Mul if is_int(l, 1) => Some(r),
            AlgBinOp::Pow if is_int(r, 1) => Some(l),
            _ => None,
        };
        match keep {
            Some(x) => {
                self.rewrites += 1;
                (**x).clone()
            }
            None => e,
        }
    }

    pub(crate) fn statements(&mut self, stmts: &[Statement]) -> Result<Vec<Statement>, EvalError> {
        stmts.iter().map(|s| self.statement(s)).collect()
    }

    fn statement(&mut self, s: &Statement) -> Result<Statement, EvalError> {
        Ok(match s {
            Statement::Constraint(c) => Statement::Constraint(ExpressionConstraint { expr: self.expr(&c.expr)? }),
            Statement::Global(g) => Statement::Global(GlobalCtr {
                name: g.name.clone(),
                params: g.params.iter().map(|p| self.expr(p)).collect::<Result<_, _>>()?,
                span: g.span,
            }),
            Statement::ForAll(f) => Statement::ForAll(ForAll {
                var: f.var.clone(),
                lower: self.expr(&f.lower)?,
                upper: self.expr(&f.upper)?,
                body: self.statements(&f.body)?,
                span: f.span,
            }),
            Statement::If(i) => Statement::If(IfStmt {
                cond: self.expr(&i.cond)?,
                then_body: self.statements(&i.then_body)?,
                else_body: i.else_body.as_ref().map(|b| self.statements(b)).transpose()?,
                span: i.span,
            }),
        })
    }

    pub(crate) fn typed(&mut self, t: &TypedElement) -> Result<TypedElement, EvalError> {
        Ok(TypedElement {
            dims: t.dims.iter().map(|d| self.ground(d)).collect::<Result<_, _>>()?,
            ..t.clone()
        })
    }

    pub(crate) fn domain(&mut self, d: &Domain) -> Result<Domain, EvalError> {
        Ok(match d {
            Domain::Interval { lo, hi } => Domain::Interval {
                lo: self.ground(lo)?,
                hi: self.ground(hi)?,
            },
            Domain::Set { members } => Domain::Set {
                members: members.iter().map(|m| self.ground(m)).collect::<Result<_, _>>()?,
            },
            Domain::Expr { expr } => Domain::Expr { expr: self.ground(expr)? },
        })
    }

    pub(crate) fn feature(&mut self, f: &ModelFeature) -> Result<ModelFeature, EvalError> {
        Ok(match f {
            ModelFeature::Record(r) => ModelFeature::Record(Record {
                components: r.components.iter().map(|c| self.feature(c)).collect::<Result<_, _>>()?,
                ..r.clone()
            }),
            ModelFeature::Variable(v) => ModelFeature::Variable(Variable {
                decl: self.typed(&v.decl)?,
                domain: v.domain.as_ref().map(|d| self.domain(d)).transpose()?,
            }),
            ModelFeature::Constant(c) => ModelFeature::Constant(Constant {
                decl: self.typed(&c.decl)?,
                value: self.ground(&c.value)?,
            }),
            ModelFeature::Zone(z) => ModelFeature::Zone(ConstraintZone {
                body: self.statements(&z.body)?,
                ..z.clone()
            }),
        })
    }
}

/// Constant values that evaluate cleanly. Constants that do not (for example
/// an inexact division) are simply not inlined; hard arithmetic errors are
/// reported.
pub(crate) fn constant_env(m: &Model) -> Result<ConstEnv, EvalError> {
    let mut env = ConstEnv::new();
    for c in m.constants() {
        match env.eval(&c.value) {
            Ok(mut v) => {
                if c.decl.ty == TypeRef::Data(DataType::Real) {
                    if let Value::Int(i) = v {
                        v = Value::Real(i as f64);
                    }
                }
                env.insert_constant(c.decl.name.clone(), v);
            }
            Err(e @ (EvalError::DivisionByZero { .. } | EvalError::Overflow { .. })) => return Err(e),
            Err(_) => {}
        }
    }
    Ok(env)
}

pub(super) fn run(m: &Model) -> Result<PassOutput, super::PassError> {
    let env = constant_env(m)?;
    let mut f = Folder::new(&env);
    let mut elements = Vec::with_capacity(m.elements.len());
    for e in &m.elements {
        elements.push(match e {
            ModelElement::Feature(x) => ModelElement::Feature(f.feature(x)?),
            ModelElement::Classifier(Classifier::Class(c)) => ModelElement::Classifier(Classifier::Class(Class {
                features: c.features.iter().map(|x| f.feature(x)).collect::<Result<_, _>>()?,
                ..c.clone()
            })),
            ModelElement::Parameterized(ParameterizedElement::Predicate(p)) => {
                ModelElement::Parameterized(ParameterizedElement::Predicate(Predicate {
                    params: p.params.iter().map(|t| f.typed(t)).collect::<Result<_, _>>()?,
                    body: p.body.iter().map(|x| f.feature(x)).collect::<Result<_, _>>()?,
                    ..p.clone()
                }))
            }
            ModelElement::Parameterized(ParameterizedElement::Function(func)) => {
                ModelElement::Parameterized(ParameterizedElement::Function(Function {
                    params: func.params.iter().map(|t| f.typed(t)).collect::<Result<_, _>>()?,
                    body: Box::new(f.statements(std::slice::from_ref(&*func.body))?.remove(0)),
                    ..func.clone()
                }))
            }
            other => other.clone(),
        });
    }
    Ok(PassOutput {
        model: Model {
            name: m.name.clone(),
            elements,
        },
        rewrites: f.rewrites,
    })
}
