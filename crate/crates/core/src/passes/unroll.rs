use super::fold::{constant_env, Folder};
use super::{PassError, PassOutput};
use crate::pivot::*;

struct Unroller {
    env: ConstEnv,
    expansions: usize,
}

impl Unroller {
    /// Substitutes bound loop variables, folds indexes completely and
    /// literal subexpressions elsewhere.
    fn expr(&self, e: &Expr) -> Result<Expr, PassError> {
        let mut f = Folder::new(&self.env);
        f.inline_in_indexes = true;
        Ok(f.expr(e)?)
    }

    fn ground_int(&self, e: &Expr) -> Result<i64, PassError> {
        match self.env.eval_int(e) {
            Ok(v) => Ok(v),
            Err(EvalError::NotGround { .. }) => Err(PassError::NonGroundBound { span: e.span }),
            Err(err) => Err(err.into()),
        }
    }

    fn statements(&mut self, stmts: &[Statement], out: &mut Vec<Statement>) -> Result<(), PassError> {
        for s in stmts {
            match s {
                Statement::Constraint(c) => {
                    out.push(Statement::Constraint(ExpressionConstraint { expr: self.expr(&c.expr)? }))
                }
                Statement::Global(g) => out.push(Statement::Global(GlobalCtr {
                    params: g.params.iter().map(|p| self.expr(p)).collect::<Result<_, _>>()?,
                    ..g.clone()
                })),
                Statement::ForAll(l) => {
                    let lo = self.ground_int(&l.lower)?;
                    let hi = self.ground_int(&l.upper)?;
                    self.expansions += 1;
                    for v in lo..=hi {
                        self.env.push_local(&l.var, v);
                        let r = self.statements(&l.body, out);
                        self.env.pop_local();
                        r?;
                    }
                }
                Statement::If(i) => {
                    let cond = match self.env.eval_bool(&i.cond) {
                        Ok(b) => b,
                        Err(EvalError::NotGround { .. }) => {
                            return Err(PassError::NonGroundCondition { span: i.cond.span })
                        }
                        Err(err) => return Err(err.into()),
                    };
                    self.expansions += 1;
                    if cond {
                        self.statements(&i.then_body, out)?;
                    } else if let Some(b) = &i.else_body {
                        self.statements(b, out)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Replaces every loop by one copy of its body per iteration and every
/// conditional by the selected branch.
pub(super) fn run(m: &Model) -> Result<PassOutput, PassError> {
    let mut u = Unroller {
        env: constant_env(m)?,
        expansions: 0,
    };
    let mut elements = Vec::with_capacity(m.elements.len());
    for e in &m.elements {
        elements.push(match e {
            ModelElement::Feature(ModelFeature::Zone(z)) => {
                let mut body = Vec::new();
                u.statements(&z.body, &mut body)?;
                ModelElement::Feature(ModelFeature::Zone(ConstraintZone { body, ..z.clone() }))
            }
            other => other.clone(),
        });
    }
    Ok(PassOutput {
        model: Model {
            name: m.name.clone(),
            elements,
        },
        rewrites: u.expansions,
    })
}

#[cfg(test)]
mod tests {
    use crate::frontend::{parse, SourceUnit};
    use crate::passes::{loop_unroll, PassError};
    use crate::pivot::*;

    fn unrolled(text: &str) -> Result<String, PassError> {
        let m = parse(&SourceUnit::model(text)).unwrap();
        loop_unroll(&m).map(|m| print_pivot(&m).unwrap())
    }

    #[test]
    fn substitutes_the_iteration_variable() {
        let text = unrolled("int x[3] in 1..3; constraint c { forall(i in 1..2) { x[i] != x[i+1]; } }").unwrap();
        assert!(text.contains("  x[1] != x[2];\n  x[2] != x[3];\n"), "{}", text);
    }

    #[test]
    fn empty_range_produces_nothing() {
        let text = unrolled("int x[3] in 1..3; constraint c { forall(i in 1..0) { x[i] = 1; } }").unwrap();
        assert!(text.ends_with("constraint c {\n}\n"), "{}", text);
    }

    #[test]
    fn conditionals_pick_a_branch() {
        let text = unrolled(
            "int n := 2; int x[3] in 1..3;\nconstraint c { forall(i in 1..3) { if (i = n) { x[i] = 1; } else { x[i] = 2; } } }",
        )
        .unwrap();
        assert!(text.contains("x[1] = 2;\n  x[2] = 1;\n  x[3] = 2;"), "{}", text);
    }

    #[test]
    fn indexes_fold_with_constants() {
        let text = unrolled("int g := 3; int x[9] in 1..3; constraint c { forall(i in 1..1) { x[g*(i-1)+2] = i + g; } }")
            .unwrap();
        assert!(text.contains("x[2] = 1 + g;"), "{}", text);
    }

    #[test]
    fn non_ground_bounds_and_conditions() {
        assert!(matches!(
            unrolled("int y in 1..3; int x[3] in 1..3; constraint c { forall(i in 1..y) { x[i] = 1; } }"),
            Err(PassError::NonGroundBound { .. })
        ));
        assert!(matches!(
            unrolled("int y in 1..3; constraint c { if (y = 1) { y = 1; } }"),
            Err(PassError::NonGroundCondition { .. })
        ));
    }
}
