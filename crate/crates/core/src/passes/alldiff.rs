use std::collections::HashSet;

use super::fold::constant_env;
use super::{AlldiffMode, PassError, PassOutput};
use crate::diagnostics::Span;
use crate::pivot::visit::{all_names, walk_expr};
use crate::pivot::*;

fn check_name(c: &GlobalCtr) -> Result<(), PassError> {
    if c.name == ALLDIFFERENT {
        Ok(())
    } else {
        Err(PassError::NotAlldifferent(c.name.clone()))
    }
}

fn shown(e: &Expr) -> String {
    print_expr(e).unwrap_or_else(|_| "<expression>".into())
}

fn constraint(expr: Expr) -> Statement {
    Statement::Constraint(ExpressionConstraint { expr })
}

/// `params[i] != params[j]` for every pair `i < j`, in lexicographic order.
pub fn alldiff_to_disequalities(c: &GlobalCtr) -> Result<Vec<Statement>, PassError> {
    check_name(c)?;
    let p = &c.params;
    let mut out = Vec::with_capacity(p.len() * p.len().saturating_sub(1) / 2);
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            out.push(constraint(Expr::compare(BoolBinOp::Ne, p[i].clone(), p[j].clone())));
        }
    }
    Ok(out)
}

/// Integer bounds of the interval domain declared for the variable that `p`
/// occurs of.
fn declared_bounds(p: &Expr, m: &Model, env: &ConstEnv) -> Option<(i64, i64)> {
    let v = p.as_var().filter(|v| v.binding == Binding::Variable)?;
    let var = m.variables().find(|x| x.decl.name == v.name)?;
    if var.decl.is_set {
        return None;
    }
    match &var.domain {
        Some(Domain::Interval { lo, hi }) => Some((env.eval_int(lo).ok()?, env.eval_int(hi).ok()?)),
        _ => None,
    }
}

/// `Σ params = n(n+1)/2`, valid only when every parameter ranges over
/// exactly `1..n`. The result admits every solution of the original
/// constraint and possibly more.
pub fn alldiff_to_relaxation(c: &GlobalCtr, m: &Model) -> Result<Statement, PassError> {
    check_name(c)?;
    let env = constant_env(m)?;
    let n = c.params.len() as i64;
    for p in &c.params {
        if declared_bounds(p, m, &env) != Some((1, n)) {
            return Err(PassError::DomainAssumptionViolated {
                param: shown(p),
                expected: format!("1..{}", n),
                span: p.span,
            });
        }
    }
    Ok(match Expr::sum(c.params.iter().cloned()) {
        Some(sum) => constraint(Expr::compare(BoolBinOp::Eq, sum, Expr::int(n * (n + 1) / 2))),
        None => constraint(Expr::boolean(true)),
    })
}

/// The boolean matrix form of one alldifferent constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct BooleanEncoding {
    /// `bool b[n, m]`, where `b[i, j]` holds iff parameter `i` takes value `j`.
    pub variable: Variable,
    /// Row sums, then column sums, then the channeling equalities.
    pub constraints: Vec<Statement>,
}

fn mentions_local(e: &Expr) -> bool {
    let mut found = false;
    walk_expr(e, &mut |x| {
        if let ExprKind::Var(v) = &x.kind {
            found |= v.binding == Binding::Local;
        }
    });
    found
}

/// Boolean reformulation: every parameter must be a variable occurrence over
/// a common domain `1..m`.
pub fn alldiff_to_boolean(c: &GlobalCtr, m: &Model, b_name: &str) -> Result<BooleanEncoding, PassError> {
    check_name(c)?;
    let env = constant_env(m)?;
    let mut upper = None;
    for p in &c.params {
        let is_var = matches!(p.as_var(), Some(v) if v.binding == Binding::Variable);
        if !is_var || mentions_local(p) {
            return Err(PassError::NonVariableParam {
                param: shown(p),
                span: p.span,
            });
        }
        let Some((lo, hi)) = declared_bounds(p, m, &env).filter(|(lo, _)| *lo == 1) else {
            return Err(PassError::DomainAssumptionViolated {
                param: shown(p),
                expected: "1..m".into(),
                span: p.span,
            });
        };
        debug_assert_eq!(lo, 1);
        match upper {
            None => upper = Some(hi),
            Some(u) if u != hi => return Err(PassError::HeterogeneousDomains { span: c.span }),
            _ => {}
        }
    }
    let n = c.params.len() as i64;
    let width = upper.unwrap_or(0);
    let b = |i: i64, j: i64| Expr::name(b_name, vec![Expr::int(i), Expr::int(j)]);
    let variable = Variable {
        decl: TypedElement {
            name: b_name.to_string(),
            ty: TypeRef::Data(DataType::Boolean),
            is_set: false,
            dims: vec![Expr::int(n), Expr::int(width)],
            span: Span::generated(),
        },
        domain: None,
    };
    let mut constraints = Vec::new();
    for i in 1..=n {
        let row = Expr::sum((1..=width).map(|j| b(i, j)));
        if let Some(row) = row {
            constraints.push(constraint(Expr::compare(BoolBinOp::Eq, row, Expr::int(1))));
        }
    }
    let op = if width == n { BoolBinOp::Eq } else { BoolBinOp::Le };
    for j in 1..=width {
        if let Some(col) = Expr::sum((1..=n).map(|i| b(i, j))) {
            let stmt = constraint(Expr::compare(op, col, Expr::int(1)));
            // With a single cell the column sum repeats the row sum.
            if !constraints.contains(&stmt) {
                constraints.push(stmt);
            }
        }
    }
    for (i, p) in (1..=n).zip(&c.params) {
        let terms = (1..=width).map(|j| Expr::binary(AlgBinOp::Mul, Expr::int(j), b(i, j)));
        let rhs = Expr::sum(terms).unwrap_or_else(|| Expr::int(0));
        constraints.push(constraint(Expr::compare(BoolBinOp::Eq, p.clone(), rhs)));
    }
    Ok(BooleanEncoding { variable, constraints })
}

struct Rewriter<'m> {
    model: &'m Model,
    mode: AlldiffMode,
    taken: HashSet<String>,
    /// Boolean matrices created while rewriting the current element.
    pending: Vec<Variable>,
    rewrites: usize,
}

impl Rewriter<'_> {
    fn fresh_name(&mut self) -> String {
        let name = std::iter::once("b".to_string())
            .chain((1..).map(|k| format!("b{}", k)))
            .find(|n| !self.taken.contains(n))
            .unwrap();
        self.taken.insert(name.clone());
        name
    }

    fn statements(&mut self, stmts: &[Statement]) -> Result<Vec<Statement>, PassError> {
        let mut out = Vec::with_capacity(stmts.len());
        for s in stmts {
            match s {
                Statement::Global(g) if g.name == ALLDIFFERENT => {
                    self.rewrites += 1;
                    match self.mode {
                        AlldiffMode::Disequalities => out.extend(alldiff_to_disequalities(g)?),
                        AlldiffMode::Relaxation => out.push(alldiff_to_relaxation(g, self.model)?),
                        AlldiffMode::Boolean => {
                            let name = self.fresh_name();
                            let enc = alldiff_to_boolean(g, self.model, &name)?;
                            self.pending.push(enc.variable);
                            out.extend(enc.constraints);
                        }
                    }
                }
                Statement::ForAll(l) => out.push(Statement::ForAll(ForAll {
                    body: self.statements(&l.body)?,
                    ..l.clone()
                })),
                Statement::If(i) => out.push(Statement::If(IfStmt {
                    then_body: self.statements(&i.then_body)?,
                    else_body: i.else_body.as_ref().map(|b| self.statements(b)).transpose()?,
                    ..i.clone()
                })),
                other => out.push(other.clone()),
            }
        }
        Ok(out)
    }
}

/// Rewrites every `alldifferent` constraint according to `mode`. Boolean
/// matrices are declared just before the element that uses them.
pub(super) fn run(m: &Model, mode: AlldiffMode) -> Result<PassOutput, PassError> {
    let mut r = Rewriter {
        model: m,
        mode,
        taken: all_names(m),
        pending: Vec::new(),
        rewrites: 0,
    };
    let mut elements = Vec::with_capacity(m.elements.len());
    for e in &m.elements {
        let rewritten = match e {
            ModelElement::Feature(ModelFeature::Zone(z)) => ModelElement::Feature(ModelFeature::Zone(ConstraintZone {
                body: r.statements(&z.body)?,
                ..z.clone()
            })),
            other => other.clone(),
        };
        elements.extend(
            r.pending
                .drain(..)
                .map(|v| ModelElement::Feature(ModelFeature::Variable(v))),
        );
        elements.push(rewritten);
    }
    Ok(PassOutput {
        model: Model {
            name: m.name.clone(),
            elements,
        },
        rewrites: r.rewrites,
    })
}
