//! Pretty printer emitting the frontend's concrete syntax.

use std::fmt::Write;

use thiserror::Error;

use super::*;
use crate::frontend::is_keyword;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum PrintError {
    #[error("cannot print {0} in source syntax")]
    Unprintable(String),
}

fn unprintable(what: impl Into<String>) -> PrintError {
    PrintError::Unprintable(what.into())
}

/// Binding strength, loosest first. Mirrors the parser's precedence table.
mod prec {
    pub const IFF: u8 = 1;
    pub const IMPLIES: u8 = 2;
    pub const OR: u8 = 3;
    pub const AND: u8 = 4;
    pub const NOT: u8 = 5;
    pub const CMP: u8 = 6;
    pub const UNION: u8 = 7;
    pub const INTERSECT: u8 = 8;
    pub const ADD: u8 = 9;
    pub const MUL: u8 = 10;
    pub const UNARY: u8 = 11;
    pub const POW: u8 = 12;
    pub const PRIMARY: u8 = 13;
}

pub(crate) fn bool_op_symbol(op: BoolBinOp) -> &'static str {
    match op {
        BoolBinOp::Iff => "iff",
        BoolBinOp::Implies => "implies",
        BoolBinOp::And => "and",
        BoolBinOp::Or => "or",
        BoolBinOp::Eq => "=",
        BoolBinOp::Ne => "!=",
        BoolBinOp::Le => "<=",
        BoolBinOp::Ge => ">=",
        BoolBinOp::Lt => "<",
        BoolBinOp::Gt => ">",
    }
}

fn level(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::BoolBinary(op, ..) => match op {
            BoolBinOp::Iff => prec::IFF,
            BoolBinOp::Implies => prec::IMPLIES,
            BoolBinOp::Or => prec::OR,
            BoolBinOp::And => prec::AND,
            _ => prec::CMP,
        },
        ExprKind::Not(_) => prec::NOT,
        ExprKind::SetBinary(SetBinOp::Intersect, ..) => prec::INTERSECT,
        ExprKind::SetBinary(..) => prec::UNION,
        ExprKind::AlgBinary(AlgBinOp::Add | AlgBinOp::Sub, ..) => prec::ADD,
        ExprKind::AlgBinary(AlgBinOp::Mul | AlgBinOp::Div, ..) => prec::MUL,
        ExprKind::AlgBinary(AlgBinOp::Pow, ..) => prec::POW,
        ExprKind::AlgUnary(..) => prec::UNARY,
        ExprKind::Int(v) if *v < 0 => prec::UNARY,
        _ => prec::PRIMARY,
    }
}

fn ident(name: &str) -> Result<&str, PrintError> {
    let mut chars = name.chars();
    let valid = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !is_keyword(name);
    if valid {
        Ok(name)
    } else {
        Err(unprintable(format!("identifier `{}`", name)))
    }
}

fn real(v: f64) -> Result<String, PrintError> {
    if v.is_finite() {
        Ok(format!("{:?}", v))
    } else {
        Err(unprintable(format!("real value {}", v)))
    }
}

struct ExprPrinter<'o> {
    out: &'o mut String,
}

impl ExprPrinter<'_> {
    fn child(&mut self, e: &Expr, min: u8) -> Result<(), PrintError> {
        if level(e) < min {
            self.out.push('(');
            self.expr(e)?;
            self.out.push(')');
            Ok(())
        } else {
            self.expr(e)
        }
    }

    fn list(&mut self, items: &[Expr]) -> Result<(), PrintError> {
        for (i, x) in items.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            self.expr(x)?;
        }
        Ok(())
    }

    fn var(&mut self, v: &VarRef) -> Result<(), PrintError> {
        self.out.push_str(ident(&v.name)?);
        if !v.indexes.is_empty() {
            self.out.push('[');
            self.list(&v.indexes)?;
            self.out.push(']');
        }
        Ok(())
    }

    fn binary(&mut self, l: &Expr, sym: &str, r: &Expr, p: u8, right_assoc: bool) -> Result<(), PrintError> {
        let (lmin, rmin) = if right_assoc { (p + 1, p) } else { (p, p + 1) };
        self.child(l, lmin)?;
        self.out.push(' ');
        self.out.push_str(sym);
        self.out.push(' ');
        self.child(r, rmin)
    }

    fn expr(&mut self, e: &Expr) -> Result<(), PrintError> {
        match &e.kind {
            ExprKind::Int(v) => write!(self.out, "{}", v).unwrap(),
            ExprKind::Real(v) => self.out.push_str(&real(*v)?),
            ExprKind::Bool(b) => self.out.push_str(if *b { "true" } else { "false" }),
            ExprKind::Interval(lo, hi) => {
                write!(self.out, "[{} .. {}]", real(*lo)?, real(*hi)?).unwrap()
            }
            ExprKind::Var(v) => self.var(v)?,
            ExprKind::Object(path) => {
                for (i, s) in path.iter().enumerate() {
                    if i > 0 {
                        self.out.push('.');
                    }
                    self.var(s)?;
                }
            }
            ExprKind::FunctionCall { callee, args } | ExprKind::PredicateCall { callee, args } => {
                self.out.push_str(ident(callee)?);
                self.out.push('(');
                self.list(args)?;
                self.out.push(')');
            }
            ExprKind::Not(x) => {
                self.out.push_str("not ");
                self.child(x, prec::NOT)?;
            }
            ExprKind::BoolBinary(op, l, r) => {
                let p = level(e);
                self.binary(l, bool_op_symbol(*op), r, p, *op == BoolBinOp::Implies)?
            }
            ExprKind::SetValue(items) => {
                self.out.push('{');
                self.list(items)?;
                self.out.push('}');
            }
            ExprKind::SetFunction(SetFn::Card, x) => {
                self.out.push_str("card(");
                self.expr(x)?;
                self.out.push(')');
            }
            ExprKind::SetBinary(op, l, r) => {
                let sym = match op {
                    SetBinOp::Intersect => "intersect",
                    SetBinOp::Union => "union",
                    SetBinOp::Diff => "diff",
                };
                self.binary(l, sym, r, level(e), false)?
            }
            ExprKind::AlgFunction(f, args) => {
                self.out.push_str(f.name());
                self.out.push('(');
                self.list(args)?;
                self.out.push(')');
            }
            ExprKind::AlgUnary(op, x) => {
                self.out.push(match op {
                    AlgUnaryOp::Neg => '-',
                    AlgUnaryOp::Plus => '+',
                });
                self.child(x, prec::UNARY)?;
            }
            ExprKind::AlgBinary(op, l, r) => {
                if *op == AlgBinOp::Pow {
                    self.child(l, prec::PRIMARY)?;
                    self.out.push('^');
                    self.child(r, prec::UNARY)?;
                } else {
                    let sym = match op {
                        AlgBinOp::Add => "+",
                        AlgBinOp::Sub => "-",
                        AlgBinOp::Mul => "*",
                        _ => "/",
                    };
                    self.binary(l, sym, r, level(e), false)?
                }
            }
        }
        Ok(())
    }
}

/// Prints a single expression in source syntax.
pub fn print_expr(e: &Expr) -> Result<String, PrintError> {
    let mut out = String::new();
    ExprPrinter { out: &mut out }.expr(e)?;
    Ok(out)
}

/// Expression that must not start with `{` (domain and range positions).
fn bound(e: &Expr) -> Result<String, PrintError> {
    let s = print_expr(e)?;
    Ok(if s.starts_with('{') {
        format!("({})", s)
    } else {
        s
    })
}

struct Printer {
    out: String,
}

impl Printer {
    fn line(&mut self, depth: usize, text: &str) {
        for _ in 0..depth {
            self.out.push_str("  ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn exprs(items: &[Expr]) -> Result<String, PrintError> {
        Ok(items
            .iter()
            .map(print_expr)
            .collect::<Result<Vec<_>, _>>()?
            .join(", "))
    }

    fn type_name(t: &TypedElement) -> Result<&str, PrintError> {
        match &t.ty {
            TypeRef::Data(_) => Ok(t.ty.name()),
            other => ident(other.name()),
        }
    }

    fn feature(&mut self, depth: usize, f: &ModelFeature) -> Result<(), PrintError> {
        match f {
            ModelFeature::Record(r) => Err(unprintable(format!("record `{}`", r.name))),
            ModelFeature::Variable(v) => {
                let d = &v.decl;
                let mut s = String::from(Self::type_name(d)?);
                if d.is_set {
                    s.push_str(" set");
                }
                s.push(' ');
                s.push_str(ident(&d.name)?);
                if !d.dims.is_empty() {
                    write!(s, "[{}]", Self::exprs(&d.dims)?).unwrap();
                }
                match &v.domain {
                    None => {}
                    Some(Domain::Interval { lo, hi }) => {
                        write!(s, " in {}..{}", bound(lo)?, bound(hi)?).unwrap()
                    }
                    Some(Domain::Set { members }) => {
                        write!(s, " in {{{}}}", Self::exprs(members)?).unwrap()
                    }
                    Some(Domain::Expr { expr }) => write!(s, " in {}", bound(expr)?).unwrap(),
                }
                s.push(';');
                self.line(depth, &s);
                Ok(())
            }
            ModelFeature::Constant(c) => {
                let d = &c.decl;
                if d.is_set || !d.dims.is_empty() || !matches!(d.ty, TypeRef::Data(_)) {
                    return Err(unprintable(format!("constant `{}` of this shape", d.name)));
                }
                let s = format!("{} {} := {};", d.ty.name(), ident(&d.name)?, print_expr(&c.value)?);
                self.line(depth, &s);
                Ok(())
            }
            ModelFeature::Zone(z) => {
                self.line(depth, &format!("constraint {} {{", ident(&z.name)?));
                self.statements(depth + 1, &z.body)?;
                self.line(depth, "}");
                Ok(())
            }
        }
    }

    fn statements(&mut self, depth: usize, stmts: &[Statement]) -> Result<(), PrintError> {
        for s in stmts {
            self.statement(depth, s)?;
        }
        Ok(())
    }

    fn statement(&mut self, depth: usize, s: &Statement) -> Result<(), PrintError> {
        match s {
            Statement::Constraint(c) => {
                let text = format!("{};", print_expr(&c.expr)?);
                self.line(depth, &text);
            }
            Statement::Global(g) => {
                let text = format!("{}({});", ident(&g.name)?, Self::exprs(&g.params)?);
                self.line(depth, &text);
            }
            Statement::ForAll(f) => {
                let head = format!(
                    "forall({} in {}..{}) {{",
                    ident(&f.var)?,
                    bound(&f.lower)?,
                    bound(&f.upper)?
                );
                self.line(depth, &head);
                self.statements(depth + 1, &f.body)?;
                self.line(depth, "}");
            }
            Statement::If(i) => {
                self.line(depth, &format!("if ({}) {{", print_expr(&i.cond)?));
                self.statements(depth + 1, &i.then_body)?;
                if let Some(b) = &i.else_body {
                    self.line(depth, "} else {");
                    self.statements(depth + 1, b)?;
                }
                self.line(depth, "}");
            }
        }
        Ok(())
    }
}

/// Prints a model in the frontend grammar. Reparsing the output yields an
/// equal model. Predicates, functions and records have no source syntax.
pub fn print_pivot(model: &Model) -> Result<String, PrintError> {
    let mut p = Printer { out: String::new() };
    p.line(0, &format!("model {};", ident(&model.name)?));
    for e in &model.elements {
        match e {
            ModelElement::Classifier(Classifier::Enumeration(en)) => {
                let lits = en
                    .literals
                    .iter()
                    .map(|l| ident(l))
                    .collect::<Result<Vec<_>, _>>()?
                    .join(", ");
                p.line(0, &format!("enum {} := {{{}}};", ident(&en.name)?, lits));
            }
            ModelElement::Classifier(Classifier::Class(c)) => {
                let head = format!(
                    "{}class {} {{",
                    if c.is_main { "main " } else { "" },
                    ident(&c.name)?
                );
                p.line(0, &head);
                for f in &c.features {
                    p.feature(1, f)?;
                }
                p.line(0, "}");
            }
            ModelElement::Feature(f) => p.feature(0, f)?,
            ModelElement::Parameterized(ParameterizedElement::Predicate(pr)) => {
                return Err(unprintable(format!("predicate `{}`", pr.name)))
            }
            ModelElement::Parameterized(ParameterizedElement::Function(f)) => {
                return Err(unprintable(format!("function `{}`", f.name)))
            }
        }
    }
    Ok(p.out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::Span;
    use crate::frontend::parse_expression;

    fn roundtrip(text: &str) -> String {
        print_expr(&parse_expression(text).unwrap()).unwrap()
    }

    #[test]
    fn minimal_parentheses() {
        assert_eq!(roundtrip("1+2*3"), "1 + 2 * 3");
        assert_eq!(roundtrip("(1+2)*3"), "(1 + 2) * 3");
        assert_eq!(roundtrip("-x^2"), "-x^2");
        assert_eq!(roundtrip("(-x)^2"), "(-x)^2");
        assert_eq!(roundtrip("2^3^2"), "2^3^2");
        assert_eq!(roundtrip("(2^3)^2"), "(2^3)^2");
        assert_eq!(roundtrip("a - (b - c)"), "a - (b - c)");
        assert_eq!(roundtrip("not (a and b)"), "not (a and b)");
        assert_eq!(roundtrip("a implies b implies c"), "a implies b implies c");
        assert_eq!(roundtrip("(a implies b) implies c"), "(a implies b) implies c");
    }

    #[test]
    fn empty_model_prints_header_only() {
        assert_eq!(print_pivot(&Model::new("M")).unwrap(), "model M;\n");
    }

    #[test]
    fn predicates_are_unprintable() {
        let mut m = Model::new("M");
        m.elements
            .push(ModelElement::Parameterized(ParameterizedElement::Predicate(Predicate {
                name: "p".into(),
                params: vec![],
                body: vec![],
                span: Span::default(),
            })));
        assert!(matches!(print_pivot(&m), Err(PrintError::Unprintable(_))));
    }

    #[test]
    fn keywords_are_not_identifiers() {
        assert!(print_expr(&Expr::name("forall", vec![])).is_err());
    }
}
