use std::collections::{HashMap, HashSet};

use thiserror::Error;

use super::types::{Decl, Scope};
use super::*;
use crate::diagnostics::{Diagnostic, Span};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ResolveError {
    #[error("unresolved name `{name}`")]
    UnresolvedName { name: String, span: Span },
    #[error("duplicate name `{name}`")]
    DuplicateName { name: String, span: Span },
}

impl ResolveError {
    pub fn span(&self) -> Span {
        match self {
            ResolveError::UnresolvedName { span, .. } | ResolveError::DuplicateName { span, .. } => {
                *span
            }
        }
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        Diagnostic::error(self.span(), self.to_string())
    }
}

/// Binds every name occurrence and type reference to its declaration.
///
/// Lookup order is loop variables (innermost first), then features of the
/// enclosing class, then top-level declarations, then enumeration literals.
/// Resolving an already resolved model returns an equal model.
pub fn resolve(model: &Model) -> Result<Model, Vec<ResolveError>> {
    let mut r = Resolver {
        model,
        errors: Vec::new(),
    };
    r.check_names();
    let elements = model
        .elements
        .iter()
        .map(|e| r.element(e))
        .collect::<Vec<_>>();
    if r.errors.is_empty() {
        Ok(Model {
            name: model.name.clone(),
            elements,
        })
    } else {
        Err(r.errors)
    }
}

struct Resolver<'a> {
    model: &'a Model,
    errors: Vec<ResolveError>,
}

impl<'a> Resolver<'a> {
    fn dup(&mut self, name: &str, span: Span) {
        self.errors.push(ResolveError::DuplicateName {
            name: name.to_string(),
            span,
        });
    }

    fn check_names(&mut self) {
        let mut top: HashSet<&str> = HashSet::new();
        let mut literals: HashMap<&str, &str> = HashMap::new();
        for e in &self.model.elements {
            let (name, span) = match e {
                ModelElement::Classifier(Classifier::Enumeration(en)) => {
                    let mut local = HashSet::new();
                    for lit in &en.literals {
                        if !local.insert(lit.as_str()) || literals.insert(lit, &en.name).is_some() {
                            self.dup(lit, en.span);
                        }
                    }
                    (en.name.as_str(), en.span)
                }
                ModelElement::Classifier(Classifier::Class(c)) => {
                    let mut local = HashSet::new();
                    for f in &c.features {
                        if matches!(f, ModelFeature::Zone(_)) {
                            continue;
                        }
                        if !local.insert(f.name()) {
                            self.dup(f.name(), feature_span(f));
                        }
                    }
                    (c.name.as_str(), c.span)
                }
                ModelElement::Feature(ModelFeature::Zone(_)) => continue,
                ModelElement::Feature(f) => (f.name(), feature_span(f)),
                ModelElement::Parameterized(ParameterizedElement::Predicate(p)) => {
                    (p.name.as_str(), p.span)
                }
                ModelElement::Parameterized(ParameterizedElement::Function(f)) => {
                    (f.name.as_str(), f.span)
                }
            };
            if !top.insert(name) {
                self.dup(name, span);
            }
        }
    }

    fn element(&mut self, e: &'a ModelElement) -> ModelElement {
        match e {
            ModelElement::Classifier(Classifier::Enumeration(_)) => e.clone(),
            ModelElement::Classifier(Classifier::Class(c)) => {
                let mut scope = Scope::new(self.model).in_class(c);
                let features = c
                    .features
                    .iter()
                    .map(|f| self.feature(&mut scope, f))
                    .collect();
                ModelElement::Classifier(Classifier::Class(Class {
                    name: c.name.clone(),
                    features,
                    is_main: c.is_main,
                    span: c.span,
                }))
            }
            ModelElement::Feature(f) => {
                let mut scope = Scope::new(self.model);
                ModelElement::Feature(self.feature(&mut scope, f))
            }
            ModelElement::Parameterized(ParameterizedElement::Predicate(p)) => {
                let mut scope = Scope::new(self.model);
                let params: Vec<TypedElement> =
                    p.params.iter().map(|t| self.typed(&mut scope, t)).collect();
                for t in &p.params {
                    scope.push_param(t);
                }
                let body = p.body.iter().map(|f| self.feature(&mut scope, f)).collect();
                ModelElement::Parameterized(ParameterizedElement::Predicate(Predicate {
                    name: p.name.clone(),
                    params,
                    body,
                    span: p.span,
                }))
            }
            ModelElement::Parameterized(ParameterizedElement::Function(f)) => {
                let mut scope = Scope::new(self.model);
                let params: Vec<TypedElement> =
                    f.params.iter().map(|t| self.typed(&mut scope, t)).collect();
                for t in &f.params {
                    scope.push_param(t);
                }
                let body = self.statement(&mut scope, &f.body);
                let result = self.type_ref(&f.result, f.span);
                ModelElement::Parameterized(ParameterizedElement::Function(Function {
                    name: f.name.clone(),
                    params,
                    result,
                    body: Box::new(body),
                    span: f.span,
                }))
            }
        }
    }

    fn feature(&mut self, scope: &mut Scope<'a>, f: &'a ModelFeature) -> ModelFeature {
        match f {
            ModelFeature::Record(r) => ModelFeature::Record(Record {
                name: r.name.clone(),
                components: r
                    .components
                    .iter()
                    .map(|c| self.feature(scope, c))
                    .collect(),
                span: r.span,
            }),
            ModelFeature::Variable(v) => ModelFeature::Variable(Variable {
                decl: self.typed(scope, &v.decl),
                domain: v.domain.as_ref().map(|d| self.domain(scope, d)),
            }),
            ModelFeature::Constant(c) => ModelFeature::Constant(Constant {
                decl: self.typed(scope, &c.decl),
                value: self.expr(scope, &c.value),
            }),
            ModelFeature::Zone(z) => ModelFeature::Zone(ConstraintZone {
                name: z.name.clone(),
                body: self.statements(scope, &z.body),
                span: z.span,
            }),
        }
    }

    fn type_ref(&mut self, ty: &TypeRef, span: Span) -> TypeRef {
        match ty {
            TypeRef::Data(d) => TypeRef::Data(*d),
            TypeRef::Enum(n) | TypeRef::Class(n) | TypeRef::Unresolved(n) => {
                if self.model.enumeration(n).is_some() {
                    TypeRef::Enum(n.clone())
                } else if self.model.class(n).is_some() {
                    TypeRef::Class(n.clone())
                } else {
                    self.errors.push(ResolveError::UnresolvedName {
                        name: n.clone(),
                        span,
                    });
                    ty.clone()
                }
            }
        }
    }

    fn typed(&mut self, scope: &mut Scope<'a>, t: &TypedElement) -> TypedElement {
        TypedElement {
            name: t.name.clone(),
            ty: self.type_ref(&t.ty, t.span),
            is_set: t.is_set,
            dims: t.dims.iter().map(|d| self.expr(scope, d)).collect(),
            span: t.span,
        }
    }

    fn domain(&mut self, scope: &mut Scope<'a>, d: &Domain) -> Domain {
        match d {
            Domain::Interval { lo, hi } => Domain::Interval {
                lo: self.expr(scope, lo),
                hi: self.expr(scope, hi),
            },
            Domain::Set { members } => Domain::Set {
                members: members.iter().map(|m| self.expr(scope, m)).collect(),
            },
            Domain::Expr { expr } => Domain::Expr {
                expr: self.expr(scope, expr),
            },
        }
    }

    fn statements(&mut self, scope: &mut Scope<'a>, stmts: &'a [Statement]) -> Vec<Statement> {
        stmts.iter().map(|s| self.statement(scope, s)).collect()
    }

    fn statement(&mut self, scope: &mut Scope<'a>, s: &'a Statement) -> Statement {
        match s {
            Statement::Constraint(c) => Statement::Constraint(ExpressionConstraint {
                expr: self.expr(scope, &c.expr),
            }),
            Statement::Global(g) => Statement::Global(GlobalCtr {
                name: g.name.clone(),
                params: g.params.iter().map(|p| self.expr(scope, p)).collect(),
                span: g.span,
            }),
            Statement::ForAll(f) => {
                let lower = self.expr(scope, &f.lower);
                let upper = self.expr(scope, &f.upper);
                scope.push_local(&f.var);
                let body = self.statements(scope, &f.body);
                scope.pop();
                Statement::ForAll(ForAll {
                    var: f.var.clone(),
                    lower,
                    upper,
                    body,
                    span: f.span,
                })
            }
            Statement::If(i) => Statement::If(IfStmt {
                cond: self.expr(scope, &i.cond),
                then_body: self.statements(scope, &i.then_body),
                else_body: i.else_body.as_ref().map(|b| self.statements(scope, b)),
                span: i.span,
            }),
        }
    }

    fn unresolved(&mut self, name: &str, span: Span) {
        self.errors.push(ResolveError::UnresolvedName {
            name: name.to_string(),
            span,
        });
    }

    fn var_ref(&mut self, scope: &mut Scope<'a>, v: &VarRef, span: Span) -> VarRef {
        let binding = match scope.lookup(&v.name) {
            Some(d) => d.binding(),
            None => {
                self.unresolved(&v.name, span);
                Binding::Unresolved
            }
        };
        VarRef {
            name: v.name.clone(),
            indexes: v.indexes.iter().map(|i| self.expr(scope, i)).collect(),
            binding,
        }
    }

    fn expr(&mut self, scope: &mut Scope<'a>, e: &Expr) -> Expr {
        let span = e.span;
        let kind = match &e.kind {
            ExprKind::Var(v) => ExprKind::Var(self.var_ref(scope, v, span)),
            ExprKind::Object(path) => {
                let mut steps = Vec::with_capacity(path.len());
                let mut current: Option<&'a Class> = None;
                let mut ok = true;
                for (i, step) in path.iter().enumerate() {
                    let indexes = step.indexes.iter().map(|x| self.expr(scope, x)).collect();
                    let decl = if i == 0 {
                        scope.lookup(&step.name)
                    } else if ok {
                        current.and_then(|c| scope.member(c, &step.name))
                    } else {
                        None
                    };
                    let binding = match &decl {
                        Some(d) => d.binding(),
                        None => {
                            if ok {
                                self.unresolved(&step.name, span);
                            }
                            ok = false;
                            Binding::Unresolved
                        }
                    };
                    current = decl.as_ref().and_then(|d| match d {
                        Decl::Typed { decl, .. } => scope.class_of(&decl.ty),
                        _ => None,
                    });
                    steps.push(VarRef {
                        name: step.name.clone(),
                        indexes,
                        binding,
                    });
                }
                ExprKind::Object(steps)
            }
            ExprKind::FunctionCall { callee, args } | ExprKind::PredicateCall { callee, args } => {
                let args = args.iter().map(|a| self.expr(scope, a)).collect();
                match self.callable(callee) {
                    Some(true) => ExprKind::FunctionCall {
                        callee: callee.clone(),
                        args,
                    },
                    Some(false) => ExprKind::PredicateCall {
                        callee: callee.clone(),
                        args,
                    },
                    None => {
                        self.unresolved(callee, span);
                        e.kind.clone_with_args(args)
                    }
                }
            }
            ExprKind::Bool(b) => ExprKind::Bool(*b),
            ExprKind::Int(v) => ExprKind::Int(*v),
            ExprKind::Real(v) => ExprKind::Real(*v),
            ExprKind::Interval(lo, hi) => ExprKind::Interval(*lo, *hi),
            ExprKind::Not(x) => ExprKind::Not(Box::new(self.expr(scope, x))),
            ExprKind::BoolBinary(op, l, r) => ExprKind::BoolBinary(
                *op,
                Box::new(self.expr(scope, l)),
                Box::new(self.expr(scope, r)),
            ),
            ExprKind::SetValue(items) => {
                ExprKind::SetValue(items.iter().map(|x| self.expr(scope, x)).collect())
            }
            ExprKind::SetFunction(f, x) => ExprKind::SetFunction(*f, Box::new(self.expr(scope, x))),
            ExprKind::SetBinary(op, l, r) => ExprKind::SetBinary(
                *op,
                Box::new(self.expr(scope, l)),
                Box::new(self.expr(scope, r)),
            ),
            ExprKind::AlgFunction(f, args) => {
                ExprKind::AlgFunction(*f, args.iter().map(|x| self.expr(scope, x)).collect())
            }
            ExprKind::AlgUnary(op, x) => ExprKind::AlgUnary(*op, Box::new(self.expr(scope, x))),
            ExprKind::AlgBinary(op, l, r) => ExprKind::AlgBinary(
                *op,
                Box::new(self.expr(scope, l)),
                Box::new(self.expr(scope, r)),
            ),
        };
        Expr { kind, span }
    }

    /// `Some(true)` for a function, `Some(false)` for a predicate.
    fn callable(&self, name: &str) -> Option<bool> {
        self.model.elements.iter().find_map(|e| match e {
            ModelElement::Parameterized(ParameterizedElement::Function(f)) if f.name == name => {
                Some(true)
            }
            ModelElement::Parameterized(ParameterizedElement::Predicate(p)) if p.name == name => {
                Some(false)
            }
            _ => None,
        })
    }
}

impl ExprKind {
    fn clone_with_args(&self, args: Vec<Expr>) -> ExprKind {
        match self {
            ExprKind::PredicateCall { callee, .. } => ExprKind::PredicateCall {
                callee: callee.clone(),
                args,
            },
            ExprKind::FunctionCall { callee, .. } => ExprKind::FunctionCall {
                callee: callee.clone(),
                args,
            },
            other => other.clone(),
        }
    }
}

pub(crate) fn feature_span(f: &ModelFeature) -> Span {
    match f {
        ModelFeature::Record(r) => r.span,
        ModelFeature::Variable(v) => v.decl.span,
        ModelFeature::Constant(c) => c.decl.span,
        ModelFeature::Zone(z) => z.span,
    }
}
