//! Traversal helpers shared by the passes and backends.

use super::*;

/// Rebuilds `e` with every direct child expression replaced by `f(child)`.
/// Index expressions of occurrences count as children.
pub fn map_children<E>(
    e: &Expr,
    f: &mut impl FnMut(&Expr) -> Result<Expr, E>,
) -> Result<Expr, E> {
    let map_var = |v: &VarRef, f: &mut dyn FnMut(&Expr) -> Result<Expr, E>| -> Result<VarRef, E> {
        Ok(VarRef {
            name: v.name.clone(),
            indexes: v.indexes.iter().map(&mut *f).collect::<Result<_, _>>()?,
            binding: v.binding.clone(),
        })
    };
    let kind = match &e.kind {
        ExprKind::Var(v) => ExprKind::Var(map_var(v, f)?),
        ExprKind::Object(path) => ExprKind::Object(
            path.iter()
                .map(|s| map_var(s, f))
                .collect::<Result<_, _>>()?,
        ),
        ExprKind::FunctionCall { callee, args } => ExprKind::FunctionCall {
            callee: callee.clone(),
            args: args.iter().map(&mut *f).collect::<Result<_, _>>()?,
        },
        ExprKind::PredicateCall { callee, args } => ExprKind::PredicateCall {
            callee: callee.clone(),
            args: args.iter().map(&mut *f).collect::<Result<_, _>>()?,
        },
        ExprKind::Bool(_) | ExprKind::Int(_) | ExprKind::Real(_) | ExprKind::Interval(..) => {
            e.kind.clone()
        }
        ExprKind::Not(x) => ExprKind::Not(Box::new(f(x)?)),
        ExprKind::BoolBinary(op, l, r) => ExprKind::BoolBinary(*op, Box::new(f(l)?), Box::new(f(r)?)),
        ExprKind::SetValue(items) => {
            ExprKind::SetValue(items.iter().map(&mut *f).collect::<Result<_, _>>()?)
        }
        ExprKind::SetFunction(sf, x) => ExprKind::SetFunction(*sf, Box::new(f(x)?)),
        ExprKind::SetBinary(op, l, r) => ExprKind::SetBinary(*op, Box::new(f(l)?), Box::new(f(r)?)),
        ExprKind::AlgFunction(af, args) => {
            ExprKind::AlgFunction(*af, args.iter().map(&mut *f).collect::<Result<_, _>>()?)
        }
        ExprKind::AlgUnary(op, x) => ExprKind::AlgUnary(*op, Box::new(f(x)?)),
        ExprKind::AlgBinary(op, l, r) => ExprKind::AlgBinary(*op, Box::new(f(l)?), Box::new(f(r)?)),
    };
    Ok(Expr { kind, span: e.span })
}

/// Visits `e` and all its subexpressions, parents first.
pub fn walk_expr<'e>(e: &'e Expr, f: &mut impl FnMut(&'e Expr)) {
    f(e);
    match &e.kind {
        ExprKind::Var(v) => v.indexes.iter().for_each(|i| walk_expr(i, f)),
        ExprKind::Object(path) => {
            for s in path {
                s.indexes.iter().for_each(|i| walk_expr(i, f));
            }
        }
        ExprKind::FunctionCall { args, .. }
        | ExprKind::PredicateCall { args, .. }
        | ExprKind::SetValue(args)
        | ExprKind::AlgFunction(_, args) => args.iter().for_each(|a| walk_expr(a, f)),
        ExprKind::Bool(_) | ExprKind::Int(_) | ExprKind::Real(_) | ExprKind::Interval(..) => {}
        ExprKind::Not(x) | ExprKind::SetFunction(_, x) | ExprKind::AlgUnary(_, x) => walk_expr(x, f),
        ExprKind::BoolBinary(_, l, r) | ExprKind::SetBinary(_, l, r) | ExprKind::AlgBinary(_, l, r) => {
            walk_expr(l, f);
            walk_expr(r, f);
        }
    }
}

/// Visits every expression held by `stmts`, recursively; loop bounds included.
pub fn walk_statement_exprs<'s>(stmts: &'s [Statement], f: &mut impl FnMut(&'s Expr)) {
    for s in stmts {
        match s {
            Statement::Constraint(c) => walk_expr(&c.expr, f),
            Statement::Global(g) => g.params.iter().for_each(|p| walk_expr(p, f)),
            Statement::ForAll(l) => {
                walk_expr(&l.lower, f);
                walk_expr(&l.upper, f);
                walk_statement_exprs(&l.body, f);
            }
            Statement::If(i) => {
                walk_expr(&i.cond, f);
                walk_statement_exprs(&i.then_body, f);
                if let Some(b) = &i.else_body {
                    walk_statement_exprs(b, f);
                }
            }
        }
    }
}

/// Visits every statement, parents first.
pub fn walk_statements<'s>(stmts: &'s [Statement], f: &mut impl FnMut(&'s Statement)) {
    for s in stmts {
        f(s);
        match s {
            Statement::ForAll(l) => walk_statements(&l.body, f),
            Statement::If(i) => {
                walk_statements(&i.then_body, f);
                if let Some(b) = &i.else_body {
                    walk_statements(b, f);
                }
            }
            _ => {}
        }
    }
}

/// Whether `e` mentions any name at all (variables, constants, literals or
/// loop variables).
pub fn mentions_names(e: &Expr) -> bool {
    let mut found = false;
    walk_expr(e, &mut |x| {
        if matches!(
            x.kind,
            ExprKind::Var(_)
                | ExprKind::Object(_)
                | ExprKind::FunctionCall { .. }
                | ExprKind::PredicateCall { .. }
        ) {
            found = true;
        }
    });
    found
}

/// Every name occurring anywhere in the model: declarations, occurrences,
/// loop variables, zones.
pub fn all_names(model: &Model) -> std::collections::HashSet<String> {
    let mut names = std::collections::HashSet::new();
    fn stmts(s: &[Statement], names: &mut std::collections::HashSet<String>) {
        walk_statements(s, &mut |st| {
            if let Statement::ForAll(l) = st {
                names.insert(l.var.clone());
            }
        });
        walk_statement_exprs(s, &mut |e| expr_names(e, names));
    }
    fn expr_names(e: &Expr, names: &mut std::collections::HashSet<String>) {
        walk_expr(e, &mut |x| match &x.kind {
            ExprKind::Var(v) => {
                names.insert(v.name.clone());
            }
            ExprKind::Object(p) => p.iter().for_each(|s| {
                names.insert(s.name.clone());
            }),
            _ => {}
        });
    }
    fn typed(t: &TypedElement, names: &mut std::collections::HashSet<String>) {
        names.insert(t.name.clone());
        t.dims.iter().for_each(|d| expr_names(d, names));
    }
    fn feature(f: &ModelFeature, names: &mut std::collections::HashSet<String>) {
        names.insert(f.name().to_string());
        match f {
            ModelFeature::Variable(v) => {
                typed(&v.decl, names);
                match &v.domain {
                    Some(Domain::Interval { lo, hi }) => {
                        expr_names(lo, names);
                        expr_names(hi, names);
                    }
                    Some(Domain::Set { members }) => members.iter().for_each(|m| expr_names(m, names)),
                    Some(Domain::Expr { expr }) => expr_names(expr, names),
                    None => {}
                }
            }
            ModelFeature::Constant(c) => {
                typed(&c.decl, names);
                expr_names(&c.value, names);
            }
            ModelFeature::Zone(z) => stmts(&z.body, names),
            ModelFeature::Record(r) => r.components.iter().for_each(|c| feature(c, names)),
        }
    }
    for e in &model.elements {
        match e {
            ModelElement::Classifier(Classifier::Enumeration(en)) => {
                names.insert(en.name.clone());
                names.extend(en.literals.iter().cloned());
            }
            ModelElement::Classifier(Classifier::Class(c)) => {
                names.insert(c.name.clone());
                c.features.iter().for_each(|f| feature(f, &mut names));
            }
            ModelElement::Feature(f) => feature(f, &mut names),
            ModelElement::Parameterized(ParameterizedElement::Predicate(p)) => {
                names.insert(p.name.clone());
                p.params.iter().for_each(|t| typed(t, &mut names));
                p.body.iter().for_each(|f| feature(f, &mut names));
            }
            ModelElement::Parameterized(ParameterizedElement::Function(f)) => {
                names.insert(f.name.clone());
                f.params.iter().for_each(|t| typed(t, &mut names));
                stmts(std::slice::from_ref(&*f.body), &mut names);
            }
        }
    }
    names
}
