use std::fmt;

use thiserror::Error;

use super::*;
use crate::diagnostics::Span;

/// Result of type inference on an expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TypeKind {
    Boolean,
    Integer,
    Real,
    SetOfInt,
    SetOfEnum(String),
    Enum(String),
    Object(String),
}

impl TypeKind {
    /// `Some(false)` for integer-valued kinds (booleans count as 0/1),
    /// `Some(true)` for reals.
    fn numeric(&self) -> Option<bool> {
        match self {
            TypeKind::Integer | TypeKind::Boolean => Some(false),
            TypeKind::Real => Some(true),
            _ => None,
        }
    }

    pub fn is_set(&self) -> bool {
        matches!(self, TypeKind::SetOfInt | TypeKind::SetOfEnum(_))
    }
}

impl fmt::Display for TypeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeKind::Boolean => f.write_str("boolean"),
            TypeKind::Integer => f.write_str("integer"),
            TypeKind::Real => f.write_str("real"),
            TypeKind::SetOfInt => f.write_str("set of integer"),
            TypeKind::SetOfEnum(e) => write!(f, "set of {}", e),
            TypeKind::Enum(e) => write!(f, "enumeration {}", e),
            TypeKind::Object(c) => write!(f, "object of class {}", c),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum TypeError {
    #[error("type mismatch: expected {expected}, found {found}")]
    Mismatch {
        expected: String,
        found: TypeKind,
        span: Span,
    },
    #[error("{message}")]
    Invalid { message: String, span: Span },
}

impl TypeError {
    pub fn span(&self) -> Span {
        match self {
            TypeError::Mismatch { span, .. } | TypeError::Invalid { span, .. } => *span,
        }
    }

    fn invalid(span: Span, message: impl Into<String>) -> Self {
        TypeError::Invalid {
            message: message.into(),
            span,
        }
    }
}

fn mismatch(span: Span, expected: impl Into<String>, found: TypeKind) -> TypeError {
    TypeError::Mismatch {
        expected: expected.into(),
        found,
        span,
    }
}

/// What a name resolves to in a [`Scope`].
#[derive(Clone, Debug)]
pub enum Decl<'a> {
    /// Loop iteration variable.
    Local,
    Typed {
        decl: &'a TypedElement,
        binding: Binding,
        domain: Option<&'a Domain>,
        value: Option<&'a Expr>,
    },
    Record(&'a Record),
    Literal {
        enumeration: &'a Enumeration,
        position: usize,
    },
}

impl Decl<'_> {
    pub fn binding(&self) -> Binding {
        match self {
            Decl::Local => Binding::Local,
            Decl::Typed { binding, .. } => binding.clone(),
            Decl::Record(_) => Binding::Record,
            Decl::Literal {
                enumeration,
                position,
            } => Binding::Literal {
                enumeration: enumeration.name.clone(),
                position: *position,
            },
        }
    }
}

#[derive(Clone, Debug)]
enum Local<'a> {
    Iter(String),
    Param(&'a TypedElement),
}

/// Lexical context for name lookup and type inference.
#[derive(Clone, Debug)]
pub struct Scope<'a> {
    model: &'a Model,
    class: Option<&'a Class>,
    locals: Vec<Local<'a>>,
}

fn feature_decl(f: &ModelFeature) -> Option<Decl<'_>> {
    match f {
        ModelFeature::Variable(v) => Some(Decl::Typed {
            decl: &v.decl,
            binding: Binding::Variable,
            domain: v.domain.as_ref(),
            value: None,
        }),
        ModelFeature::Constant(c) => Some(Decl::Typed {
            decl: &c.decl,
            binding: Binding::Constant,
            domain: None,
            value: Some(&c.value),
        }),
        ModelFeature::Record(r) => Some(Decl::Record(r)),
        ModelFeature::Zone(_) => None,
    }
}

impl<'a> Scope<'a> {
    pub fn new(model: &'a Model) -> Self {
        Scope {
            model,
            class: None,
            locals: Vec::new(),
        }
    }

    pub fn in_class(mut self, class: &'a Class) -> Self {
        self.class = Some(class);
        self
    }

    pub fn model(&self) -> &'a Model {
        self.model
    }

    pub fn class(&self) -> Option<&'a Class> {
        self.class
    }

    pub fn push_local(&mut self, name: &str) {
        self.locals.push(Local::Iter(name.to_string()));
    }

    pub fn push_param(&mut self, param: &'a TypedElement) {
        self.locals.push(Local::Param(param));
    }

    pub fn pop(&mut self) {
        self.locals.pop();
    }

    pub fn is_local(&self, name: &str) -> bool {
        self.locals.iter().any(|l| match l {
            Local::Iter(n) => n == name,
            Local::Param(p) => p.name == name,
        })
    }

    pub fn lookup(&self, name: &str) -> Option<Decl<'a>> {
        for l in self.locals.iter().rev() {
            match l {
                Local::Iter(n) if n == name => return Some(Decl::Local),
                Local::Param(p) if p.name == name => {
                    return Some(Decl::Typed {
                        decl: p,
                        binding: Binding::Local,
                        domain: None,
                        value: None,
                    })
                }
                _ => {}
            }
        }
        if let Some(c) = self.class {
            if let Some(d) = self.member(c, name) {
                return Some(d);
            }
        }
        if let Some(d) = self
            .model
            .features()
            .filter(|f| f.name() == name)
            .find_map(feature_decl)
        {
            return Some(d);
        }
        self.model.enumerations().find_map(|e| {
            e.position(name).map(|position| Decl::Literal {
                enumeration: e,
                position,
            })
        })
    }

    /// A feature of `class` by name.
    pub fn member(&self, class: &'a Class, name: &str) -> Option<Decl<'a>> {
        class
            .features
            .iter()
            .filter(|f| f.name() == name)
            .find_map(feature_decl)
    }

    pub fn class_of(&self, ty: &TypeRef) -> Option<&'a Class> {
        match ty {
            TypeRef::Class(n) | TypeRef::Unresolved(n) => self.model.class(n),
            _ => None,
        }
    }
}

/// Type of a declared element, with `is_set` applied.
pub fn declared_type(t: &TypedElement, span: Span) -> Result<TypeKind, TypeError> {
    let base = match &t.ty {
        TypeRef::Data(DataType::Boolean) => TypeKind::Boolean,
        TypeRef::Data(DataType::Integer) => TypeKind::Integer,
        TypeRef::Data(DataType::Real) => TypeKind::Real,
        TypeRef::Enum(e) => TypeKind::Enum(e.clone()),
        TypeRef::Class(c) => TypeKind::Object(c.clone()),
        TypeRef::Unresolved(n) => {
            return Err(TypeError::invalid(span, format!("unresolved type `{}`", n)))
        }
    };
    if !t.is_set {
        return Ok(base);
    }
    match base {
        TypeKind::Integer => Ok(TypeKind::SetOfInt),
        TypeKind::Enum(e) => Ok(TypeKind::SetOfEnum(e)),
        other => Err(TypeError::invalid(
            span,
            format!("sets of {} are not supported", other),
        )),
    }
}

/// Infers the type of a resolved expression.
///
/// Integers promote to reals in mixed arithmetic; booleans count as 0/1 in
/// arithmetic and comparisons against numbers. Division is always real.
pub fn infer_type(expr: &Expr, scope: &Scope<'_>) -> Result<TypeKind, TypeError> {
    let span = expr.span;
    match &expr.kind {
        ExprKind::Int(_) => Ok(TypeKind::Integer),
        ExprKind::Real(_) | ExprKind::Interval(..) => Ok(TypeKind::Real),
        ExprKind::Bool(_) => Ok(TypeKind::Boolean),
        ExprKind::Var(v) => {
            let decl = scope
                .lookup(&v.name)
                .ok_or_else(|| TypeError::invalid(span, format!("unresolved name `{}`", v.name)))?;
            occurrence_type(v, &decl, scope, span)
        }
        ExprKind::Object(path) => {
            let mut class: Option<&Class> = None;
            let mut ty = None;
            for (i, step) in path.iter().enumerate() {
                let decl = if i == 0 {
                    scope.lookup(&step.name)
                } else {
                    class.and_then(|c| scope.member(c, &step.name))
                }
                .ok_or_else(|| {
                    TypeError::invalid(span, format!("unresolved name `{}`", step.name))
                })?;
                let t = occurrence_type(step, &decl, scope, span)?;
                if i + 1 < path.len() {
                    match &t {
                        TypeKind::Object(c) => class = scope.model.class(c),
                        other => return Err(mismatch(span, "object", other.clone())),
                    }
                }
                ty = Some(t);
            }
            ty.ok_or_else(|| TypeError::invalid(span, "empty navigation path"))
        }
        ExprKind::Not(x) => {
            expect(x, scope, &TypeKind::Boolean)?;
            Ok(TypeKind::Boolean)
        }
        ExprKind::BoolBinary(op, l, r) => {
            if !op.is_comparison() {
                expect(l, scope, &TypeKind::Boolean)?;
                expect(r, scope, &TypeKind::Boolean)?;
                return Ok(TypeKind::Boolean);
            }
            let lt = infer_type(l, scope)?;
            let rt = infer_type(r, scope)?;
            let ordered = !matches!(op, BoolBinOp::Eq | BoolBinOp::Ne);
            let ok = match (&lt, &rt) {
                (a, b) if a.numeric().is_some() && b.numeric().is_some() => true,
                (TypeKind::Enum(a), TypeKind::Enum(b)) => a == b,
                (a, b) if a.is_set() && !ordered => a == b,
                _ => false,
            };
            if ok {
                Ok(TypeKind::Boolean)
            } else {
                Err(mismatch(r.span, format!("operand comparable with {}", lt), rt))
            }
        }
        ExprKind::SetValue(items) => {
            let mut kind = None;
            for item in items {
                let t = infer_type(item, scope)?;
                let elem = match &t {
                    TypeKind::Integer => TypeKind::SetOfInt,
                    TypeKind::Enum(e) => TypeKind::SetOfEnum(e.clone()),
                    _ => return Err(mismatch(item.span, "integer or enumeration literal", t)),
                };
                match &kind {
                    None => kind = Some(elem),
                    Some(k) if *k == elem => {}
                    Some(k) => return Err(mismatch(item.span, format!("element of {}", k), t)),
                }
            }
            Ok(kind.unwrap_or(TypeKind::SetOfInt))
        }
        ExprKind::SetFunction(SetFn::Card, x) => {
            let t = infer_type(x, scope)?;
            if t.is_set() {
                Ok(TypeKind::Integer)
            } else {
                Err(mismatch(x.span, "set", t))
            }
        }
        ExprKind::SetBinary(_, l, r) => {
            let lt = infer_type(l, scope)?;
            if !lt.is_set() {
                return Err(mismatch(l.span, "set", lt));
            }
            let rt = infer_type(r, scope)?;
            if rt != lt {
                return Err(mismatch(r.span, lt.to_string(), rt));
            }
            Ok(lt)
        }
        ExprKind::AlgFunction(f, args) => {
            let arity_ok = match f {
                AlgFn::Min | AlgFn::Max => !args.is_empty(),
                _ => args.len() == 1,
            };
            if !arity_ok {
                return Err(TypeError::invalid(
                    span,
                    format!("wrong number of arguments to `{}`", f.name()),
                ));
            }
            let mut real = false;
            for a in args {
                real |= numeric(a, scope)?;
            }
            match f {
                AlgFn::Abs | AlgFn::Min | AlgFn::Max if !real => Ok(TypeKind::Integer),
                _ => Ok(TypeKind::Real),
            }
        }
        ExprKind::AlgUnary(_, x) => Ok(if numeric(x, scope)? {
            TypeKind::Real
        } else {
            TypeKind::Integer
        }),
        ExprKind::AlgBinary(op, l, r) => {
            let real = numeric(l, scope)? | numeric(r, scope)?;
            Ok(if real || *op == AlgBinOp::Div {
                TypeKind::Real
            } else {
                TypeKind::Integer
            })
        }
        ExprKind::FunctionCall { callee, args } => {
            let f = scope
                .model
                .elements
                .iter()
                .find_map(|e| match e {
                    ModelElement::Parameterized(ParameterizedElement::Function(f))
                        if f.name == *callee =>
                    {
                        Some(f)
                    }
                    _ => None,
                })
                .ok_or_else(|| TypeError::invalid(span, format!("unknown function `{}`", callee)))?;
            check_args(&f.params, args, scope, span)?;
            declared_type(
                &TypedElement {
                    name: f.name.clone(),
                    ty: f.result.clone(),
                    is_set: false,
                    dims: Vec::new(),
                    span,
                },
                span,
            )
        }
        ExprKind::PredicateCall { callee, args } => {
            let p = scope
                .model
                .elements
                .iter()
                .find_map(|e| match e {
                    ModelElement::Parameterized(ParameterizedElement::Predicate(p))
                        if p.name == *callee =>
                    {
                        Some(p)
                    }
                    _ => None,
                })
                .ok_or_else(|| {
                    TypeError::invalid(span, format!("unknown predicate `{}`", callee))
                })?;
            check_args(&p.params, args, scope, span)?;
            Ok(TypeKind::Boolean)
        }
    }
}

fn check_args(
    params: &[TypedElement],
    args: &[Expr],
    scope: &Scope<'_>,
    span: Span,
) -> Result<(), TypeError> {
    if params.len() != args.len() {
        return Err(TypeError::invalid(
            span,
            format!("expected {} arguments, found {}", params.len(), args.len()),
        ));
    }
    for (p, a) in params.iter().zip(args) {
        let want = declared_type(p, p.span)?;
        let got = infer_type(a, scope)?;
        let ok = want == got || (want == TypeKind::Real && got.numeric().is_some());
        if !ok {
            return Err(mismatch(a.span, want.to_string(), got));
        }
    }
    Ok(())
}

fn occurrence_type(
    v: &VarRef,
    decl: &Decl<'_>,
    scope: &Scope<'_>,
    span: Span,
) -> Result<TypeKind, TypeError> {
    let dims = match decl {
        Decl::Typed { decl, .. } => decl.dims.len(),
        _ => 0,
    };
    if v.indexes.len() != dims {
        return Err(TypeError::invalid(
            span,
            format!(
                "`{}` takes {} index(es), found {}",
                v.name,
                dims,
                v.indexes.len()
            ),
        ));
    }
    for i in &v.indexes {
        expect(i, scope, &TypeKind::Integer)?;
    }
    match decl {
        Decl::Local => Ok(TypeKind::Integer),
        Decl::Literal { enumeration, .. } => Ok(TypeKind::Enum(enumeration.name.clone())),
        Decl::Typed { decl, .. } => declared_type(decl, span),
        Decl::Record(r) => Err(TypeError::invalid(
            span,
            format!("record `{}` has no type", r.name),
        )),
    }
}

/// Returns whether the numeric expression is real-valued.
fn numeric(e: &Expr, scope: &Scope<'_>) -> Result<bool, TypeError> {
    let t = infer_type(e, scope)?;
    t.numeric().ok_or_else(|| mismatch(e.span, "number", t))
}

/// Checks `e` has type `want`. Integers also satisfy an expected real.
pub fn expect(e: &Expr, scope: &Scope<'_>, want: &TypeKind) -> Result<TypeKind, TypeError> {
    let t = infer_type(e, scope)?;
    let ok = t == *want || (*want == TypeKind::Real && t == TypeKind::Integer);
    if ok {
        Ok(t)
    } else {
        Err(mismatch(e.span, want.to_string(), t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse, parse_expression, SourceUnit};
    use crate::pivot::resolve;

    fn ty(model_text: &str, expr: &str) -> Result<TypeKind, TypeError> {
        let m = if model_text.is_empty() {
            Model::new("M")
        } else {
            resolve(&parse(&SourceUnit::model(model_text)).unwrap()).unwrap()
        };
        let e = parse_expression(expr).unwrap();
        infer_type(&e, &Scope::new(&m))
    }

    #[test]
    fn card_of_set_is_integer() {
        let src = "enum Name := {a, b};\nName set players;";
        assert_eq!(ty(src, "card(players)"), Ok(TypeKind::Integer));
    }

    #[test]
    fn literals() {
        assert_eq!(ty("", "true"), Ok(TypeKind::Boolean));
        assert_eq!(ty("", "1 + 0.5"), Ok(TypeKind::Real));
        assert_eq!(ty("", "1 + 2"), Ok(TypeKind::Integer));
        assert_eq!(ty("", "4 / 2"), Ok(TypeKind::Real));
        assert_eq!(ty("", "{}"), Ok(TypeKind::SetOfInt));
    }

    #[test]
    fn enum_sets_and_literals() {
        let src = "enum Name := {a, b};\nName set p;";
        assert_eq!(ty(src, "p intersect {a}"), Ok(TypeKind::SetOfEnum("Name".into())));
        assert!(matches!(
            ty(src, "p union {1}"),
            Err(TypeError::Mismatch { .. })
        ));
        assert_eq!(ty(src, "a < b"), Ok(TypeKind::Boolean));
    }

    #[test]
    fn index_count_is_checked() {
        let src = "int x[2, 3] in 1..3;";
        assert_eq!(ty(src, "x[1, 2]"), Ok(TypeKind::Integer));
        assert!(ty(src, "x[1]").is_err());
    }

    #[test]
    fn inference_is_pure() {
        let src = "int x[2] in 1..3;";
        assert_eq!(ty(src, "x[1] * 2 <= 3"), ty(src, "x[1] * 2 <= 3"));
    }

    #[test]
    fn logical_operands_must_be_boolean() {
        assert!(matches!(
            ty("", "1 and true"),
            Err(TypeError::Mismatch { found: TypeKind::Integer, .. })
        ));
    }
}
