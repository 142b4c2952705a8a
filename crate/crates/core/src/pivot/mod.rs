//! The pivot model: a language-independent representation of constraint
//! models. Frontends produce it, passes rewrite it, backends consume it.
//!
//! Models are plain values. Passes never mutate their input; they build a
//! new model and re-run [`resolve`] on it so bindings stay consistent.

mod eval;
mod print;
mod resolve;
mod types;
mod validate;
pub mod visit;

pub use eval::{ConstEnv, EvalError, Value};
pub use print::{print_expr, print_pivot, PrintError};
pub use resolve::{resolve, ResolveError};
pub use types::{infer_type, Scope, TypeError, TypeKind};
pub use validate::validate;

use crate::diagnostics::Span;

/// Root container of a constraint model.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub name: String,
    pub elements: Vec<ModelElement>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelElement {
    Classifier(Classifier),
    Feature(ModelFeature),
    Parameterized(ParameterizedElement),
}

/// User-declared classifiers. The primitive data types are not declared; see
/// [`DataType`].
#[derive(Clone, Debug, PartialEq)]
pub enum Classifier {
    Enumeration(Enumeration),
    Class(Class),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DataType {
    Boolean,
    Integer,
    Real,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Enumeration {
    pub name: String,
    pub literals: Vec<String>,
    pub span: Span,
}

impl Enumeration {
    /// 1-based position of `literal` in declaration order.
    pub fn position(&self, literal: &str) -> Option<usize> {
        self.literals.iter().position(|l| l == literal).map(|p| p + 1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Class {
    pub name: String,
    pub features: Vec<ModelFeature>,
    pub is_main: bool,
    pub span: Span,
}

/// Instance-level content of a model or class.
///
/// Statements are always housed in a named [`ConstraintZone`].
#[derive(Clone, Debug, PartialEq)]
pub enum ModelFeature {
    Record(Record),
    Variable(Variable),
    Constant(Constant),
    Zone(ConstraintZone),
}

impl ModelFeature {
    pub fn name(&self) -> &str {
        match self {
            ModelFeature::Record(r) => &r.name,
            ModelFeature::Variable(v) => &v.decl.name,
            ModelFeature::Constant(c) => &c.decl.name,
            ModelFeature::Zone(z) => &z.name,
        }
    }

    /// The typed declaration, for variables and constants.
    pub fn typed(&self) -> Option<&TypedElement> {
        match self {
            ModelFeature::Variable(v) => Some(&v.decl),
            ModelFeature::Constant(c) => Some(&c.decl),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub name: String,
    pub components: Vec<ModelFeature>,
    pub span: Span,
}

/// Reference from a typed element to its classifier.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TypeRef {
    Data(DataType),
    Enum(String),
    Class(String),
    /// A name not yet bound to an enumeration or class.
    Unresolved(String),
}

impl TypeRef {
    pub fn name(&self) -> &str {
        match self {
            TypeRef::Data(DataType::Boolean) => "bool",
            TypeRef::Data(DataType::Integer) => "int",
            TypeRef::Data(DataType::Real) => "real",
            TypeRef::Enum(n) | TypeRef::Class(n) | TypeRef::Unresolved(n) => n,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypedElement {
    pub name: String,
    pub ty: TypeRef,
    pub is_set: bool,
    /// Array dimension sizes; empty for scalars.
    pub dims: Vec<Expr>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub decl: TypedElement,
    pub domain: Option<Domain>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constant {
    pub decl: TypedElement,
    pub value: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Interval { lo: Expr, hi: Expr },
    Set { members: Vec<Expr> },
    Expr { expr: Expr },
}

/// A named group of statements.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintZone {
    pub name: String,
    pub body: Vec<Statement>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Statement {
    Constraint(ExpressionConstraint),
    Global(GlobalCtr),
    ForAll(ForAll),
    If(IfStmt),
}

impl Statement {
    pub fn span(&self) -> Span {
        match self {
            Statement::Constraint(c) => c.expr.span,
            Statement::Global(g) => g.span,
            Statement::ForAll(f) => f.span,
            Statement::If(i) => i.span,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Statement::Constraint(_) => "constraint",
            Statement::Global(_) => "global constraint",
            Statement::ForAll(_) => "forall",
            Statement::If(_) => "if",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpressionConstraint {
    pub expr: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlobalCtr {
    pub name: String,
    pub params: Vec<Expr>,
    pub span: Span,
}

pub const ALLDIFFERENT: &str = "alldifferent";

#[derive(Clone, Debug, PartialEq)]
pub struct ForAll {
    pub var: String,
    pub lower: Expr,
    pub upper: Expr,
    pub body: Vec<Statement>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IfStmt {
    pub cond: Expr,
    pub then_body: Vec<Statement>,
    pub else_body: Option<Vec<Statement>>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParameterizedElement {
    Predicate(Predicate),
    Function(Function),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Predicate {
    pub name: String,
    pub params: Vec<TypedElement>,
    pub body: Vec<ModelFeature>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Function {
    pub name: String,
    pub params: Vec<TypedElement>,
    pub result: TypeRef,
    pub body: Box<Statement>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

/// What a name occurrence refers to, filled in by [`resolve`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Binding {
    Unresolved,
    /// A loop iteration variable or a parameter.
    Local,
    Variable,
    Constant,
    Record,
    /// Enumeration literal, 1-based position.
    Literal { enumeration: String, position: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarRef {
    pub name: String,
    pub indexes: Vec<Expr>,
    pub binding: Binding,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoolBinOp {
    Iff,
    Implies,
    And,
    Or,
    Eq,
    Ne,
    Le,
    Ge,
    Lt,
    Gt,
}

impl BoolBinOp {
    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BoolBinOp::Eq | BoolBinOp::Ne | BoolBinOp::Le | BoolBinOp::Ge | BoolBinOp::Lt | BoolBinOp::Gt
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SetFn {
    Card,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SetBinOp {
    Intersect,
    Union,
    Diff,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AlgFn {
    Abs,
    Min,
    Max,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
}

impl AlgFn {
    pub const ALL: [AlgFn; 9] = [
        AlgFn::Abs,
        AlgFn::Min,
        AlgFn::Max,
        AlgFn::Sin,
        AlgFn::Cos,
        AlgFn::Tan,
        AlgFn::Exp,
        AlgFn::Log,
        AlgFn::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgFn::Abs => "abs",
            AlgFn::Min => "min",
            AlgFn::Max => "max",
            AlgFn::Sin => "sin",
            AlgFn::Cos => "cos",
            AlgFn::Tan => "tan",
            AlgFn::Exp => "exp",
            AlgFn::Log => "log",
            AlgFn::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<AlgFn> {
        AlgFn::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AlgUnaryOp {
    Neg,
    Plus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AlgBinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    FunctionCall { callee: String, args: Vec<Expr> },
    Var(VarRef),
    /// Navigation path `a[i].b[j].c`; at least two steps.
    Object(Vec<VarRef>),
    Bool(bool),
    PredicateCall { callee: String, args: Vec<Expr> },
    /// Boolean negation.
    Not(Box<Expr>),
    BoolBinary(BoolBinOp, Box<Expr>, Box<Expr>),
    SetValue(Vec<Expr>),
    SetFunction(SetFn, Box<Expr>),
    SetBinary(SetBinOp, Box<Expr>, Box<Expr>),
    Int(i64),
    Real(f64),
    Interval(f64, f64),
    AlgFunction(AlgFn, Vec<Expr>),
    AlgUnary(AlgUnaryOp, Box<Expr>),
    AlgBinary(AlgBinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    pub fn generated(kind: ExprKind) -> Self {
        Expr {
            kind,
            span: Span::generated(),
        }
    }

    /// Integer literal in canonical form: negative values are a negation of
    /// a non-negative literal, which is also what the parser produces.
    pub fn int(value: i64) -> Self {
        if value < 0 {
            match value.checked_neg() {
                Some(pos) => Expr::generated(ExprKind::AlgUnary(
                    AlgUnaryOp::Neg,
                    Box::new(Expr::generated(ExprKind::Int(pos))),
                )),
                None => Expr::generated(ExprKind::Int(value)),
            }
        } else {
            Expr::generated(ExprKind::Int(value))
        }
    }

    pub fn real(value: f64) -> Self {
        if value < 0.0 || (value == 0.0 && value.is_sign_negative()) {
            Expr::generated(ExprKind::AlgUnary(
                AlgUnaryOp::Neg,
                Box::new(Expr::generated(ExprKind::Real(-value))),
            ))
        } else {
            Expr::generated(ExprKind::Real(value))
        }
    }

    pub fn boolean(value: bool) -> Self {
        Expr::generated(ExprKind::Bool(value))
    }

    /// Unresolved name occurrence; `resolve` binds it.
    pub fn name(name: impl Into<String>, indexes: Vec<Expr>) -> Self {
        Expr::generated(ExprKind::Var(VarRef {
            name: name.into(),
            indexes,
            binding: Binding::Unresolved,
        }))
    }

    pub fn binary(op: AlgBinOp, left: Expr, right: Expr) -> Self {
        Expr::generated(ExprKind::AlgBinary(op, Box::new(left), Box::new(right)))
    }

    pub fn compare(op: BoolBinOp, left: Expr, right: Expr) -> Self {
        Expr::generated(ExprKind::BoolBinary(op, Box::new(left), Box::new(right)))
    }

    /// Left-associated sum; `None` for an empty list.
    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Option<Expr> {
        terms
            .into_iter()
            .reduce(|acc, t| Expr::binary(AlgBinOp::Add, acc, t))
    }

    pub fn as_var(&self) -> Option<&VarRef> {
        match &self.kind {
            ExprKind::Var(v) => Some(v),
            _ => None,
        }
    }

    /// Integer value of a literal in canonical form.
    pub fn as_int(&self) -> Option<i64> {
        match &self.kind {
            ExprKind::Int(v) => Some(*v),
            ExprKind::AlgUnary(AlgUnaryOp::Neg, inner) => match inner.kind {
                ExprKind::Int(v) => v.checked_neg(),
                _ => None,
            },
            _ => None,
        }
    }
}

impl Model {
    pub fn new(name: impl Into<String>) -> Self {
        Model {
            name: name.into(),
            elements: Vec::new(),
        }
    }

    /// Structural equality: names, order and structure, ignoring locations.
    pub fn model_equals(&self, other: &Model) -> bool {
        self == other
    }

    pub fn enumerations(&self) -> impl Iterator<Item = &Enumeration> {
        self.elements.iter().filter_map(|e| match e {
            ModelElement::Classifier(Classifier::Enumeration(en)) => Some(en),
            _ => None,
        })
    }

    pub fn classes(&self) -> impl Iterator<Item = &Class> {
        self.elements.iter().filter_map(|e| match e {
            ModelElement::Classifier(Classifier::Class(c)) => Some(c),
            _ => None,
        })
    }

    pub fn class(&self, name: &str) -> Option<&Class> {
        self.classes().find(|c| c.name == name)
    }

    pub fn enumeration(&self, name: &str) -> Option<&Enumeration> {
        self.enumerations().find(|e| e.name == name)
    }

    pub fn features(&self) -> impl Iterator<Item = &ModelFeature> {
        self.elements.iter().filter_map(|e| match e {
            ModelElement::Feature(f) => Some(f),
            _ => None,
        })
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.features().filter_map(|f| match f {
            ModelFeature::Variable(v) => Some(v),
            _ => None,
        })
    }

    pub fn constants(&self) -> impl Iterator<Item = &Constant> {
        self.features().filter_map(|f| match f {
            ModelFeature::Constant(c) => Some(c),
            _ => None,
        })
    }

    pub fn zones(&self) -> impl Iterator<Item = &ConstraintZone> {
        self.features().filter_map(|f| match f {
            ModelFeature::Zone(z) => Some(z),
            _ => None,
        })
    }

    pub fn has_classes(&self) -> bool {
        self.classes().next().is_some()
    }

    pub fn has_enumerations(&self) -> bool {
        self.enumerations().next().is_some()
    }

    /// Number of model elements, counting class features and nested
    /// statements individually.
    pub fn element_count(&self) -> usize {
        self.elements
            .iter()
            .map(|e| match e {
                ModelElement::Classifier(Classifier::Enumeration(_)) => 1,
                ModelElement::Classifier(Classifier::Class(c)) => {
                    1 + c.features.iter().map(feature_count).sum::<usize>()
                }
                ModelElement::Feature(f) => feature_count(f),
                ModelElement::Parameterized(ParameterizedElement::Predicate(p)) => {
                    1 + p.body.iter().map(feature_count).sum::<usize>()
                }
                ModelElement::Parameterized(ParameterizedElement::Function(f)) => {
                    1 + statement_count(std::slice::from_ref(&*f.body))
                }
            })
            .sum()
    }

    /// Number of statements, nested ones included.
    pub fn statement_count(&self) -> usize {
        let mut n = 0;
        for e in &self.elements {
            match e {
                ModelElement::Classifier(Classifier::Class(c)) => {
                    n += c.features.iter().map(zone_statements).sum::<usize>()
                }
                ModelElement::Feature(f) => n += zone_statements(f),
                _ => {}
            }
        }
        n
    }
}

fn zone_statements(f: &ModelFeature) -> usize {
    match f {
        ModelFeature::Zone(z) => statement_count(&z.body),
        ModelFeature::Record(r) => r.components.iter().map(zone_statements).sum(),
        _ => 0,
    }
}

fn feature_count(f: &ModelFeature) -> usize {
    match f {
        ModelFeature::Zone(z) => 1 + statement_count(&z.body),
        ModelFeature::Record(r) => 1 + r.components.iter().map(feature_count).sum::<usize>(),
        _ => 1,
    }
}

pub fn statement_count(stmts: &[Statement]) -> usize {
    stmts
        .iter()
        .map(|s| match s {
            Statement::ForAll(f) => 1 + statement_count(&f.body),
            Statement::If(i) => {
                1 + statement_count(&i.then_body)
                    + i.else_body.as_deref().map_or(0, statement_count)
            }
            _ => 1,
        })
        .sum()
}
