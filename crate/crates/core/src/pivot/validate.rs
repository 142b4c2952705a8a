use super::types::{declared_type, expect, Scope, TypeError, TypeKind};
use super::*;
use crate::diagnostics::{Diagnostic, Span};

/// Checks the typing invariants of a resolved model. An empty result means
/// the model is valid.
pub fn validate(model: &Model) -> Vec<Diagnostic> {
    let mut v = Validator { diags: Vec::new() };
    let mains = model.classes().filter(|c| c.is_main).count();
    if mains > 1 {
        let span = model
            .classes()
            .filter(|c| c.is_main)
            .nth(1)
            .map(|c| c.span)
            .unwrap_or_default();
        v.diags
            .push(Diagnostic::error(span, "at most one main class is allowed"));
    }
    for e in &model.elements {
        match e {
            ModelElement::Classifier(Classifier::Enumeration(en)) => {
                if en.literals.is_empty() {
                    v.diags.push(Diagnostic::error(
                        en.span,
                        format!("enumeration `{}` has no literals", en.name),
                    ));
                }
            }
            ModelElement::Classifier(Classifier::Class(c)) => {
                let mut scope = Scope::new(model).in_class(c);
                for f in &c.features {
                    v.feature(&mut scope, f);
                }
            }
            ModelElement::Feature(f) => v.feature(&mut Scope::new(model), f),
            ModelElement::Parameterized(ParameterizedElement::Predicate(p)) => {
                let mut scope = Scope::new(model);
                for t in &p.params {
                    v.typed(&mut scope, t);
                    scope.push_param(t);
                }
                for f in &p.body {
                    v.feature(&mut scope, f);
                }
            }
            ModelElement::Parameterized(ParameterizedElement::Function(f)) => {
                let mut scope = Scope::new(model);
                for t in &f.params {
                    v.typed(&mut scope, t);
                    scope.push_param(t);
                }
                v.statement(&mut scope, &f.body);
            }
        }
    }
    v.diags
}

struct Validator {
    diags: Vec<Diagnostic>,
}

impl Validator {
    fn type_error(&mut self, e: TypeError) {
        self.diags.push(Diagnostic::error(e.span(), e.to_string()));
    }

    fn error(&mut self, span: Span, message: impl Into<String>) {
        self.diags.push(Diagnostic::error(span, message));
    }

    fn expect(&mut self, scope: &Scope<'_>, e: &Expr, want: TypeKind) {
        if let Err(err) = expect(e, scope, &want) {
            self.type_error(err);
        }
    }

    fn typed(&mut self, scope: &mut Scope<'_>, t: &TypedElement) -> Option<TypeKind> {
        for d in &t.dims {
            self.expect(scope, d, TypeKind::Integer);
        }
        match declared_type(t, t.span) {
            Ok(k) => Some(k),
            Err(e) => {
                self.type_error(e);
                None
            }
        }
    }

    fn feature(&mut self, scope: &mut Scope<'_>, f: &ModelFeature) {
        match f {
            ModelFeature::Record(r) => {
                if r.components.is_empty() {
                    self.error(r.span, format!("record `{}` has no components", r.name));
                }
                for c in &r.components {
                    self.feature(scope, c);
                }
            }
            ModelFeature::Variable(var) => {
                let Some(kind) = self.typed(scope, &var.decl) else {
                    return;
                };
                if let TypeKind::Object(_) = kind {
                    if var.domain.is_some() {
                        self.error(var.decl.span, "object variables cannot have a domain");
                    }
                    return;
                }
                if let Some(d) = &var.domain {
                    self.domain(scope, d, &kind);
                }
            }
            ModelFeature::Constant(c) => {
                let Some(kind) = self.typed(scope, &c.decl) else {
                    return;
                };
                if let Some(name) = first_variable(&c.value, scope) {
                    self.error(
                        c.value.span,
                        format!("constant `{}` depends on variable `{}`", c.decl.name, name),
                    );
                    return;
                }
                self.expect(scope, &c.value, kind);
            }
            ModelFeature::Zone(z) => {
                for s in &z.body {
                    self.statement(scope, s);
                }
            }
        }
    }

    fn domain(&mut self, scope: &Scope<'_>, d: &Domain, var_kind: &TypeKind) {
        match d {
            Domain::Interval { lo, hi } => {
                for b in [lo, hi] {
                    match infer_type(b, scope) {
                        Ok(TypeKind::Integer | TypeKind::Real) => {}
                        Ok(TypeKind::Enum(e))
                            if matches!(var_kind, TypeKind::Enum(v) | TypeKind::SetOfEnum(v) if *v == e) => {}
                        Ok(t) => self.type_error(TypeError::Mismatch {
                            expected: "integer or real bound".into(),
                            found: t,
                            span: b.span,
                        }),
                        Err(e) => self.type_error(e),
                    }
                }
            }
            Domain::Set { members } => {
                for m in members {
                    if let Some(name) = first_variable(m, scope) {
                        self.error(m.span, format!("domain member depends on variable `{}`", name));
                    } else if let Err(e) = infer_type(m, scope) {
                        self.type_error(e);
                    }
                }
            }
            Domain::Expr { expr } => {
                if let Err(e) = infer_type(expr, scope) {
                    self.type_error(e);
                }
            }
        }
    }

    fn statement(&mut self, scope: &mut Scope<'_>, s: &Statement) {
        match s {
            Statement::Constraint(c) => self.expect(scope, &c.expr, TypeKind::Boolean),
            Statement::Global(g) => {
                if g.name.is_empty() {
                    self.error(g.span, "global constraint without a name");
                }
                if g.name == ALLDIFFERENT {
                    for p in &g.params {
                        self.expect(scope, p, TypeKind::Integer);
                    }
                } else {
                    for p in &g.params {
                        if let Err(e) = infer_type(p, scope) {
                            self.type_error(e);
                        }
                    }
                }
            }
            Statement::ForAll(f) => {
                self.expect(scope, &f.lower, TypeKind::Integer);
                self.expect(scope, &f.upper, TypeKind::Integer);
                scope.push_local(&f.var);
                for b in &f.body {
                    self.statement(scope, b);
                }
                scope.pop();
            }
            Statement::If(i) => {
                self.expect(scope, &i.cond, TypeKind::Boolean);
                for b in i.then_body.iter().chain(i.else_body.iter().flatten()) {
                    self.statement(scope, b);
                }
            }
        }
    }
}

/// First occurrence of a decision variable in `e`, if any.
fn first_variable(e: &Expr, scope: &Scope<'_>) -> Option<String> {
    let mut found = None;
    visit::walk_expr(e, &mut |x| {
        if found.is_some() {
            return;
        }
        match &x.kind {
            ExprKind::Var(v) if v.binding == Binding::Variable => found = Some(v.name.clone()),
            ExprKind::Var(v) if v.binding == Binding::Unresolved => {
                if let Some(super::types::Decl::Typed {
                    binding: Binding::Variable,
                    ..
                }) = scope.lookup(&v.name)
                {
                    found = Some(v.name.clone())
                }
            }
            ExprKind::Object(p) => found = p.first().map(|s| s.name.clone()),
            _ => {}
        }
    });
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse, SourceUnit};
    use crate::pivot::resolve;

    fn diags(text: &str) -> Vec<Diagnostic> {
        validate(&resolve(&parse(&SourceUnit::model(text)).unwrap()).unwrap())
    }

    #[test]
    fn non_boolean_constraint() {
        let d = diags("main class M { constraint c { 1 + 2; } }");
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("type mismatch"), "{}", d[0].message);
    }

    #[test]
    fn real_loop_bounds() {
        let d = diags("main class M { int x in 1..3; constraint c { forall(i in 1.5..3) { x = i; } } }");
        assert_eq!(d.len(), 1, "{:?}", d);
    }

    #[test]
    fn constants_must_be_ground() {
        let d = diags("int k := 2;\nmain class M { int x in 1..3; int y := x; }");
        assert_eq!(d.len(), 1, "{:?}", d);
    }

    #[test]
    fn alldifferent_params_are_integers() {
        assert!(diags("main class M { int x in 1..3; int y in 1..3; constraint c { alldifferent(x, y); } }").is_empty());
        let d = diags("main class M { bool x; real y; constraint c { alldifferent(x, y); } }");
        assert_eq!(d.len(), 2, "{:?}", d);
    }

    #[test]
    fn object_variables_take_no_domain() {
        let d = diags("main class M { P p in 1..2; }\nclass P { int x in 1..2; }");
        assert_eq!(d.len(), 1, "{:?}", d);
    }

    #[test]
    fn two_main_classes() {
        let d = diags("main class A { }\nmain class B { }");
        assert_eq!(d.len(), 1);
    }
}
