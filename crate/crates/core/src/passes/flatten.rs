use std::collections::HashSet;

use super::{PassError, PassId, PassOutput};
use crate::diagnostics::Span;
use crate::pivot::visit::{all_names, map_children};
use crate::pivot::*;

/// One object in the instantiation tree. The root instance (`class` is the
/// main class or `None` for top-level declarations) has an empty prefix.
#[derive(Clone)]
struct Instance<'m> {
    class: Option<&'m Class>,
    prefix: String,
    /// Dimensions of the enclosing object arrays, outermost first.
    dims: Vec<Expr>,
}

/// Where a name found by [`Flattener::lookup`] was declared.
enum Origin {
    Instance,
    TopLevel,
}

struct Scope<'a, 'm> {
    inst: &'a Instance<'m>,
    /// Iteration variables of the loops wrapping a zone, one per entry of
    /// `inst.dims`.
    iters: &'a [String],
    locals: Vec<String>,
}

struct Flattener<'m> {
    model: &'m Model,
    taken: HashSet<String>,
    emitted: HashSet<String>,
    out: Vec<ModelElement>,
    rewrites: usize,
}

fn precondition(message: impl Into<String>, span: Span) -> PassError {
    PassError::Precondition {
        pass: PassId::ObjectFlatten,
        message: message.into(),
        span,
    }
}

/// `d1`, then `dk * acc` for every further dimension.
fn product(dims: &[Expr]) -> Expr {
    let mut acc = dims[0].clone();
    for d in &dims[1..] {
        acc = Expr::binary(AlgBinOp::Mul, d.clone(), acc);
    }
    acc
}

/// Row-major linear index: `i1`, then `nk * (acc - 1) + ik`.
fn linearize(indexes: &[Expr], dims: &[Expr]) -> Expr {
    let mut acc = indexes[0].clone();
    for (i, d) in indexes[1..].iter().zip(&dims[1..]) {
        let shifted = Expr::binary(AlgBinOp::Sub, acc, Expr::int(1));
        acc = Expr::binary(AlgBinOp::Add, Expr::binary(AlgBinOp::Mul, d.clone(), shifted), i.clone());
    }
    acc
}

fn class_type<'m>(model: &'m Model, t: &TypedElement) -> Option<&'m Class> {
    match &t.ty {
        TypeRef::Class(c) | TypeRef::Unresolved(c) => model.class(c),
        _ => None,
    }
}

fn find_feature<'m>(features: &'m [ModelFeature], name: &str) -> Option<&'m ModelFeature> {
    features
        .iter()
        .find(|f| !matches!(f, ModelFeature::Zone(_)) && f.name() == name)
}

impl<'m> Flattener<'m> {
    fn top_features(&self) -> impl Iterator<Item = &'m ModelFeature> {
        self.model.features()
    }

    fn lookup(&self, inst: &Instance<'m>, name: &str) -> Option<(Origin, &'m ModelFeature)> {
        if let Some(f) = inst.class.and_then(|c| find_feature(&c.features, name)) {
            return Some((Origin::Instance, f));
        }
        self.top_features()
            .find(|f| !matches!(f, ModelFeature::Zone(_)) && f.name() == name)
            .map(|f| (Origin::TopLevel, f))
    }

    fn members(&self, class: Option<&'m Class>, name: &str) -> Option<&'m ModelFeature> {
        match class {
            Some(c) => find_feature(&c.features, name),
            None => self.top_features().find(|f| !matches!(f, ModelFeature::Zone(_)) && f.name() == name),
        }
    }

    fn emit_name(&mut self, name: &str, span: Span) -> Result<(), PassError> {
        if !self.emitted.insert(name.to_string()) {
            return Err(PassError::NameCollision {
                name: name.to_string(),
                span,
            });
        }
        self.taken.insert(name.to_string());
        Ok(())
    }

    fn check_cycles(&self) -> Result<(), PassError> {
        fn visit<'m>(
            f: &Flattener<'m>,
            c: &'m Class,
            stack: &mut Vec<&'m str>,
            done: &mut HashSet<&'m str>,
        ) -> Result<(), PassError> {
            if done.contains(c.name.as_str()) {
                return Ok(());
            }
            stack.push(&c.name);
            for feat in &c.features {
                let Some(d) = feat.typed().and_then(|t| class_type(f.model, t)) else {
                    continue;
                };
                if stack.contains(&d.name.as_str()) {
                    return Err(PassError::CyclicComposition(c.name.clone(), d.name.clone()));
                }
                visit(f, d, stack, done)?;
            }
            stack.pop();
            done.insert(&c.name);
            Ok(())
        }
        let mut done = HashSet::new();
        for c in self.model.classes() {
            visit(self, c, &mut Vec::new(), &mut done)?;
        }
        Ok(())
    }

    // ---------------------------------------------------------- expressions

    fn var_ref(&mut self, v: &VarRef, sc: &mut Scope<'_, 'm>) -> Result<Vec<Expr>, PassError> {
        v.indexes.iter().map(|i| self.expr(i, sc)).collect()
    }

    fn renamed(&self, name: String, indexes: Vec<Expr>, span: Span, sc: &Scope<'_, 'm>) -> Result<Expr, PassError> {
        if sc.locals.contains(&name) {
            return Err(PassError::NameCollision { name, span });
        }
        Ok(Expr::new(
            ExprKind::Var(VarRef {
                name,
                indexes,
                binding: Binding::Unresolved,
            }),
            span,
        ))
    }

    /// Index of the object an instance-level reference points into.
    fn instance_index(&self, sc: &Scope<'_, 'm>, span: Span) -> Result<Option<Expr>, PassError> {
        if sc.inst.dims.is_empty() {
            return Ok(None);
        }
        if sc.iters.len() != sc.inst.dims.len() {
            return Err(precondition("object attribute used outside a constraint zone", span));
        }
        let idx: Vec<Expr> = sc.iters.iter().map(|n| Expr::name(n.clone(), vec![])).collect();
        Ok(Some(linearize(&idx, &sc.inst.dims)))
    }

    fn expr(&mut self, e: &Expr, sc: &mut Scope<'_, 'm>) -> Result<Expr, PassError> {
        match &e.kind {
            ExprKind::Var(v) => {
                let indexes = self.var_ref(v, sc)?;
                let keep = |indexes| {
                    Expr::new(
                        ExprKind::Var(VarRef {
                            name: v.name.clone(),
                            indexes,
                            binding: v.binding.clone(),
                        }),
                        e.span,
                    )
                };
                if sc.locals.contains(&v.name) {
                    return Ok(keep(indexes));
                }
                match self.lookup(sc.inst, &v.name) {
                    Some((Origin::Instance, f)) => match f {
                        ModelFeature::Variable(var) if class_type(self.model, &var.decl).is_none() => {
                            let mut all = Vec::new();
                            all.extend(self.instance_index(sc, e.span)?);
                            all.extend(indexes);
                            self.renamed(format!("{}{}", sc.inst.prefix, v.name), all, e.span, sc)
                        }
                        ModelFeature::Constant(_) => {
                            self.renamed(format!("{}{}", sc.inst.prefix, v.name), indexes, e.span, sc)
                        }
                        _ => Err(precondition(format!("`{}` cannot be used as a value", v.name), e.span)),
                    },
                    Some((Origin::TopLevel, ModelFeature::Variable(var))) if class_type(self.model, &var.decl).is_some() => {
                        Err(precondition(format!("object `{}` cannot be used as a value", v.name), e.span))
                    }
                    _ => Ok(keep(indexes)),
                }
            }
            ExprKind::Object(path) => self.object_path(path, e.span, sc),
            _ => map_children(e, &mut |c| self.expr(c, sc)),
        }
    }

    fn object_path(&mut self, path: &[VarRef], span: Span, sc: &mut Scope<'_, 'm>) -> Result<Expr, PassError> {
        let first = &path[0];
        if sc.locals.contains(&first.name) {
            return Err(precondition(format!("`{}` is not an object", first.name), span));
        }
        let (origin, _) = self
            .lookup(sc.inst, &first.name)
            .ok_or_else(|| precondition(format!("unknown object `{}`", first.name), span))?;
        let (mut class, mut prefix, mut idx, mut dims) = match origin {
            Origin::Instance => {
                let idx = match self.instance_index(sc, span)? {
                    Some(_) => sc.iters.iter().map(|n| Expr::name(n.clone(), vec![])).collect(),
                    None => vec![],
                };
                (sc.inst.class, sc.inst.prefix.clone(), idx, sc.inst.dims.clone())
            }
            Origin::TopLevel => (None, String::new(), vec![], vec![]),
        };
        let (last, steps) = path.split_last().unwrap();
        for step in steps {
            let feature = self.members(class, &step.name);
            let Some(ModelFeature::Variable(var)) = feature else {
                return Err(precondition(format!("`{}` is not an object", step.name), span));
            };
            let Some(target) = class_type(self.model, &var.decl) else {
                return Err(precondition(format!("`{}` is not an object", step.name), span));
            };
            let decl_inst = Instance {
                class,
                prefix: prefix.clone(),
                dims: vec![],
            };
            for d in &var.decl.dims {
                dims.push(self.decl_expr(d, &decl_inst)?);
            }
            for i in &step.indexes {
                idx.push(self.expr(i, sc)?);
            }
            prefix = format!("{}{}_", prefix, step.name);
            class = Some(target);
        }
        self.rewrites += 1;
        let own = self.var_ref(last, sc)?;
        match self.members(class, &last.name) {
            Some(ModelFeature::Variable(var)) if class_type(self.model, &var.decl).is_none() => {
                let mut all = Vec::new();
                if !idx.is_empty() {
                    all.push(linearize(&idx, &dims));
                }
                all.extend(own);
                self.renamed(format!("{}{}", prefix, last.name), all, span, sc)
            }
            Some(ModelFeature::Constant(_)) => self.renamed(format!("{}{}", prefix, last.name), own, span, sc),
            _ => Err(precondition(format!("`{}` cannot be used as a value", last.name), span)),
        }
    }

    /// Rewrites an expression of a declaration (dims, domain, value).
    fn decl_expr(&mut self, e: &Expr, inst: &Instance<'m>) -> Result<Expr, PassError> {
        let mut sc = Scope {
            inst,
            iters: &[],
            locals: vec![],
        };
        self.expr(e, &mut sc)
    }

    fn statements(&mut self, stmts: &[Statement], sc: &mut Scope<'_, 'm>) -> Result<Vec<Statement>, PassError> {
        let mut out = Vec::with_capacity(stmts.len());
        for s in stmts {
            out.push(match s {
                Statement::Constraint(c) => Statement::Constraint(ExpressionConstraint {
                    expr: self.expr(&c.expr, sc)?,
                }),
                Statement::Global(g) => Statement::Global(GlobalCtr {
                    params: g.params.iter().map(|p| self.expr(p, sc)).collect::<Result<_, _>>()?,
                    ..g.clone()
                }),
                Statement::ForAll(l) => {
                    let lower = self.expr(&l.lower, sc)?;
                    let upper = self.expr(&l.upper, sc)?;
                    sc.locals.push(l.var.clone());
                    let body = self.statements(&l.body, sc);
                    sc.locals.pop();
                    Statement::ForAll(ForAll {
                        var: l.var.clone(),
                        lower,
                        upper,
                        body: body?,
                        span: l.span,
                    })
                }
                Statement::If(i) => Statement::If(IfStmt {
                    cond: self.expr(&i.cond, sc)?,
                    then_body: self.statements(&i.then_body, sc)?,
                    else_body: match &i.else_body {
                        Some(b) => Some(self.statements(b, sc)?),
                        None => None,
                    },
                    span: i.span,
                }),
            });
        }
        Ok(out)
    }

    // --------------------------------------------------------- declarations

    fn domain(&mut self, d: &Domain, inst: &Instance<'m>) -> Result<Domain, PassError> {
        Ok(match d {
            Domain::Interval { lo, hi } => Domain::Interval {
                lo: self.decl_expr(lo, inst)?,
                hi: self.decl_expr(hi, inst)?,
            },
            Domain::Set { members } => Domain::Set {
                members: members.iter().map(|m| self.decl_expr(m, inst)).collect::<Result<_, _>>()?,
            },
            Domain::Expr { expr } => Domain::Expr {
                expr: self.decl_expr(expr, inst)?,
            },
        })
    }

    fn fresh_iters(&self, n: usize) -> Vec<String> {
        (1..)
            .map(|k| format!("i{}", k))
            .filter(|name| !self.taken.contains(name))
            .take(n)
            .collect()
    }

    fn instantiate(&mut self, inst: &Instance<'m>, features: &'m [ModelFeature]) -> Result<(), PassError> {
        for f in features {
            self.feature(inst, f)?;
        }
        Ok(())
    }

    fn feature(&mut self, inst: &Instance<'m>, f: &'m ModelFeature) -> Result<(), PassError> {
        match f {
            ModelFeature::Variable(v) => {
                let own_dims = v
                    .decl
                    .dims
                    .iter()
                    .map(|d| self.decl_expr(d, inst))
                    .collect::<Result<Vec<_>, _>>()?;
                if let Some(target) = class_type(self.model, &v.decl) {
                    self.rewrites += 1;
                    let mut dims = inst.dims.clone();
                    dims.extend(own_dims);
                    let child = Instance {
                        class: Some(target),
                        prefix: format!("{}{}_", inst.prefix, v.decl.name),
                        dims,
                    };
                    return self.instantiate(&child, &target.features);
                }
                let name = format!("{}{}", inst.prefix, v.decl.name);
                self.emit_name(&name, v.decl.span)?;
                let mut dims = Vec::new();
                if !inst.dims.is_empty() {
                    dims.push(product(&inst.dims));
                }
                dims.extend(own_dims);
                let domain = v.domain.as_ref().map(|d| self.domain(d, inst)).transpose()?;
                self.push(ModelFeature::Variable(Variable {
                    decl: TypedElement {
                        name,
                        dims,
                        ..v.decl.clone()
                    },
                    domain,
                }));
            }
            ModelFeature::Constant(c) => {
                let name = format!("{}{}", inst.prefix, c.decl.name);
                self.emit_name(&name, c.decl.span)?;
                let value = self.decl_expr(&c.value, inst)?;
                self.push(ModelFeature::Constant(Constant {
                    decl: TypedElement {
                        name,
                        ..c.decl.clone()
                    },
                    value,
                }));
            }
            ModelFeature::Zone(z) => {
                let iters = self.fresh_iters(inst.dims.len());
                let mut sc = Scope {
                    inst,
                    iters: &iters,
                    locals: iters.clone(),
                };
                let mut body = self.statements(&z.body, &mut sc)?;
                for (var, dim) in iters.iter().zip(&inst.dims).rev() {
                    self.rewrites += 1;
                    body = vec![Statement::ForAll(ForAll {
                        var: var.clone(),
                        lower: Expr::int(1),
                        upper: dim.clone(),
                        body,
                        span: z.span,
                    })];
                }
                self.push(ModelFeature::Zone(ConstraintZone {
                    name: format!("{}{}", inst.prefix, z.name),
                    body,
                    span: z.span,
                }));
            }
            ModelFeature::Record(r) => {
                return Err(precondition(format!("record `{}` cannot be flattened", r.name), r.span))
            }
        }
        Ok(())
    }

    fn push(&mut self, f: ModelFeature) {
        self.out.push(ModelElement::Feature(f));
    }
}

/// Removes all classes. The main class is instantiated in place with an
/// empty prefix; every object variable is replaced by copies of its class
/// features named `path_attribute`, arrays of objects becoming one
/// linearized dimension.
pub(super) fn run(m: &Model) -> Result<PassOutput, PassError> {
    let mut emitted = HashSet::new();
    for e in &m.elements {
        match e {
            ModelElement::Classifier(Classifier::Enumeration(en)) => {
                emitted.insert(en.name.clone());
            }
            ModelElement::Parameterized(ParameterizedElement::Predicate(p)) => {
                emitted.insert(p.name.clone());
            }
            ModelElement::Parameterized(ParameterizedElement::Function(f)) => {
                emitted.insert(f.name.clone());
            }
            _ => {}
        }
    }
    let mut fl = Flattener {
        model: m,
        taken: all_names(m),
        emitted,
        out: Vec::new(),
        rewrites: 0,
    };
    fl.check_cycles()?;
    let root = Instance {
        class: None,
        prefix: String::new(),
        dims: vec![],
    };
    for e in &m.elements {
        match e {
            ModelElement::Classifier(Classifier::Class(c)) => {
                if c.is_main {
                    let main = Instance {
                        class: Some(c),
                        ..root.clone()
                    };
                    fl.instantiate(&main, &c.features)?;
                }
            }
            ModelElement::Feature(f) => fl.feature(&root, f)?,
            other => fl.out.push(other.clone()),
        }
    }
    Ok(PassOutput {
        model: Model {
            name: m.name.clone(),
            elements: fl.out,
        },
        rewrites: fl.rewrites,
    })
}
