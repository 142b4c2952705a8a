use std::collections::HashMap;

use super::{PassError, PassOutput};
use crate::pivot::visit::map_children;
use crate::pivot::*;

struct EnumRemover<'m> {
    sizes: HashMap<&'m str, usize>,
    rewrites: usize,
}

impl EnumRemover<'_> {
    fn expr(&mut self, e: &Expr) -> Expr {
        if let ExprKind::Var(v) = &e.kind {
            if let Binding::Literal { position, .. } = v.binding {
                self.rewrites += 1;
                return Expr { span: e.span, ..Expr::int(position as i64) };
            }
        }
        map_children(e, &mut |c| Ok::<_, ()>(self.expr(c))).unwrap()
    }

    fn exprs(&mut self, es: &[Expr]) -> Vec<Expr> {
        es.iter().map(|e| self.expr(e)).collect()
    }

    /// Retypes an enum-typed element; returns the literal count if it was.
    fn typed(&mut self, t: &TypedElement) -> (TypedElement, Option<usize>) {
        let n = match &t.ty {
            TypeRef::Enum(name) => self.sizes.get(name.as_str()).copied(),
            _ => None,
        };
        let ty = if n.is_some() {
            self.rewrites += 1;
            TypeRef::Data(DataType::Integer)
        } else {
            t.ty.clone()
        };
        let decl = TypedElement {
            ty,
            dims: self.exprs(&t.dims),
            ..t.clone()
        };
        (decl, n)
    }

    fn domain(&mut self, d: &Domain) -> Domain {
        match d {
            Domain::Interval { lo, hi } => Domain::Interval {
                lo: self.expr(lo),
                hi: self.expr(hi),
            },
            Domain::Set { members } => Domain::Set {
                members: self.exprs(members),
            },
            Domain::Expr { expr } => Domain::Expr { expr: self.expr(expr) },
        }
    }

    fn feature(&mut self, f: &ModelFeature) -> ModelFeature {
        match f {
            ModelFeature::Variable(v) => {
                let (decl, n) = self.typed(&v.decl);
                let domain = match (&v.domain, n) {
                    (Some(d), _) => Some(self.domain(d)),
                    (None, Some(n)) => Some(Domain::Interval {
                        lo: Expr::int(1),
                        hi: Expr::int(n as i64),
                    }),
                    (None, None) => None,
                };
                ModelFeature::Variable(Variable { decl, domain })
            }
            ModelFeature::Constant(c) => ModelFeature::Constant(Constant {
                decl: self.typed(&c.decl).0,
                value: self.expr(&c.value),
            }),
            ModelFeature::Zone(z) => ModelFeature::Zone(ConstraintZone {
                body: self.statements(&z.body),
                ..z.clone()
            }),
            ModelFeature::Record(r) => ModelFeature::Record(Record {
                components: r.components.iter().map(|c| self.feature(c)).collect(),
                ..r.clone()
            }),
        }
    }

    fn statements(&mut self, stmts: &[Statement]) -> Vec<Statement> {
        stmts
            .iter()
            .map(|s| match s {
                Statement::Constraint(c) => Statement::Constraint(ExpressionConstraint { expr: self.expr(&c.expr) }),
                Statement::Global(g) => Statement::Global(GlobalCtr {
                    params: self.exprs(&g.params),
                    ..g.clone()
                }),
                Statement::ForAll(l) => Statement::ForAll(ForAll {
                    var: l.var.clone(),
                    lower: self.expr(&l.lower),
                    upper: self.expr(&l.upper),
                    body: self.statements(&l.body),
                    span: l.span,
                }),
                Statement::If(i) => Statement::If(IfStmt {
                    cond: self.expr(&i.cond),
                    then_body: self.statements(&i.then_body),
                    else_body: i.else_body.as_ref().map(|b| self.statements(b)),
                    span: i.span,
                }),
            })
            .collect()
    }
}

/// Removes every enumeration: enum-typed elements become integers over
/// `1..n` and literals become their 1-based position.
pub(super) fn run(m: &Model) -> Result<PassOutput, PassError> {
    let mut r = EnumRemover {
        sizes: m.enumerations().map(|e| (e.name.as_str(), e.literals.len())).collect(),
        rewrites: 0,
    };
    let mut elements = Vec::new();
    for e in &m.elements {
        match e {
            ModelElement::Classifier(Classifier::Enumeration(_)) => r.rewrites += 1,
            ModelElement::Classifier(Classifier::Class(_)) => elements.push(e.clone()),
            ModelElement::Feature(f) => elements.push(ModelElement::Feature(r.feature(f))),
            ModelElement::Parameterized(ParameterizedElement::Predicate(p)) => {
                elements.push(ModelElement::Parameterized(ParameterizedElement::Predicate(Predicate {
                    params: p.params.iter().map(|t| r.typed(t).0).collect(),
                    body: p.body.iter().map(|f| r.feature(f)).collect(),
                    ..p.clone()
                })))
            }
            ModelElement::Parameterized(ParameterizedElement::Function(f)) => {
                let result = match &f.result {
                    TypeRef::Enum(n) if r.sizes.contains_key(n.as_str()) => TypeRef::Data(DataType::Integer),
                    other => other.clone(),
                };
                elements.push(ModelElement::Parameterized(ParameterizedElement::Function(Function {
                    params: f.params.iter().map(|t| r.typed(t).0).collect(),
                    result,
                    body: Box::new(r.statements(std::slice::from_ref(&*f.body)).remove(0)),
                    ..f.clone()
                })))
            }
        }
    }
    Ok(PassOutput {
        model: Model {
            name: m.name.clone(),
            elements,
        },
        rewrites: r.rewrites,
    })
}

#[cfg(test)]
mod tests {
    use crate::frontend::{parse, SourceUnit};
    use crate::passes::enum_remove;
    use crate::pivot::*;

    #[test]
    fn literals_become_positions() {
        let m = parse(&SourceUnit::model(
            "enum Name := {a,b,c,d,e,f,g,h,i};\nName x;\nName set s[2];\nconstraint k { x = c; card(s[1]) = 3; }",
        ))
        .unwrap();
        let out = enum_remove(&m).unwrap();
        assert!(!out.has_enumerations());
        let text = print_pivot(&out).unwrap();
        assert!(text.contains("int x in 1..9;"), "{}", text);
        assert!(text.contains("int set s[2] in 1..9;"), "{}", text);
        assert!(text.contains("x = 3;"), "{}", text);
    }

    #[test]
    fn existing_domains_are_mapped() {
        let m = parse(&SourceUnit::model("enum C := {r, g, b};\nC x in g..b;\nC y in {r, b};")).unwrap();
        let text = print_pivot(&enum_remove(&m).unwrap()).unwrap();
        assert!(text.contains("int x in 2..3;"), "{}", text);
        assert!(text.contains("int y in {1, 3};"), "{}", text);
    }

    #[test]
    fn no_enums_is_identity() {
        let m = resolve(&parse(&SourceUnit::model("int x in 1..3; constraint c { x > 1; }")).unwrap()).unwrap();
        assert_eq!(enum_remove(&m).unwrap(), m);
    }

    #[test]
    fn classes_are_a_precondition_error() {
        let m = parse(&SourceUnit::model("main class M { }")).unwrap();
        assert!(matches!(enum_remove(&m), Err(crate::passes::PassError::Precondition { .. })));
    }
}
