use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::diagnostics::{Diagnostic, Span};
use crate::pivot::visit::{walk_expr, walk_statements};
use crate::pivot::*;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClpEmitOptions {
    /// Clause name; defaults to the model name with a lower-case initial.
    pub predicate_name: Option<String>,
    /// Append a labeling goal.
    pub labeling: bool,
}

impl Default for ClpEmitOptions {
    fn default() -> Self {
        ClpEmitOptions {
            predicate_name: None,
            labeling: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ClpError {
    #[error("unsupported by the CLP target: {0}")]
    UnsupportedElement(String),
    #[error("unsupported by the CLP target: {what}")]
    Unsupported { what: String, span: Span },
    #[error("`{0}` is not a valid predicate name")]
    InvalidPredicateName(String),
    #[error("`{0}` and `{1}` map to the same target name")]
    NameCollision(String, String),
    #[error("dimension or bound of `{name}` is not a ground integer")]
    NonGround { name: String, span: Span },
}

impl ClpError {
    pub fn to_diagnostic(&self) -> Diagnostic {
        let span = match self {
            ClpError::Unsupported { span, .. } | ClpError::NonGround { span, .. } => *span,
            _ => Span::generated(),
        };
        Diagnostic::error(span, self.to_string())
    }
}

fn unsupported(what: impl Into<String>, span: Span) -> ClpError {
    ClpError::Unsupported {
        what: what.into(),
        span,
    }
}

fn target_name(name: &str) -> String {
    name.to_uppercase()
}

struct ArrayInfo {
    dims: Vec<i64>,
    /// List the cells are looked up in.
    list: String,
}

enum Item {
    Blank,
    Comment(String),
    Goal(String),
}

struct Emitter<'m> {
    model: &'m Model,
    arrays: HashMap<&'m str, ArrayInfo>,
    scalars: HashSet<&'m str>,
    set_vars: HashSet<&'m str>,
    constants: HashSet<&'m str>,
    /// Parameter ordering: decision lists, then constants.
    order: Vec<String>,
    taken: HashSet<String>,
    fresh: usize,
    env: ConstEnv,
}

/// Per-statement emission state.
struct Ctx {
    locals: Vec<String>,
    used: Vec<BTreeSet<String>>,
    /// Element lookups, one goal line each.
    pre: Vec<String>,
    /// Short goals placed on the final line before the constraint.
    inline: Vec<String>,
}

impl Ctx {
    fn use_name(&mut self, name: &str) {
        if let Some(top) = self.used.last_mut() {
            top.insert(name.to_string());
        }
    }
}

fn mentions_decision_vars(e: &Expr) -> bool {
    let mut found = false;
    walk_expr(e, &mut |x| match &x.kind {
        ExprKind::Var(v) if v.binding == Binding::Variable => found = true,
        ExprKind::Object(_) | ExprKind::FunctionCall { .. } | ExprKind::PredicateCall { .. } => found = true,
        _ => {}
    });
    found
}

fn lin_index(indexes: &[Expr], dims: &[i64]) -> Expr {
    let mut acc = indexes[0].clone();
    for (i, d) in indexes[1..].iter().zip(&dims[1..]) {
        let shifted = Expr::binary(AlgBinOp::Sub, acc, Expr::int(1));
        acc = Expr::binary(AlgBinOp::Add, Expr::binary(AlgBinOp::Mul, Expr::int(*d), shifted), i.clone());
    }
    acc
}

impl<'m> Emitter<'m> {
    fn fresh_var(&mut self) -> String {
        loop {
            self.fresh += 1;
            let name = format!("V{}", self.fresh);
            if !self.taken.contains(&name) {
                return name;
            }
        }
    }

    fn ground(&self, e: &Expr, name: &str) -> Result<i64, ClpError> {
        self.env.eval_int(e).map_err(|_| ClpError::NonGround {
            name: name.to_string(),
            span: e.span,
        })
    }

    // ------------------------------------------------------------ terms

    fn access(&mut self, v: &VarRef, span: Span, cx: &mut Ctx) -> Result<String, ClpError> {
        if let Binding::Literal { .. } = v.binding {
            return Err(unsupported(format!("enumeration literal `{}`", v.name), span));
        }
        let name = target_name(&v.name);
        if cx.locals.contains(&v.name) || self.constants.contains(v.name.as_str()) || self.scalars.contains(v.name.as_str())
        {
            if !v.indexes.is_empty() {
                return Err(unsupported(format!("indexing the scalar `{}`", v.name), span));
            }
            cx.use_name(&name);
            return Ok(name);
        }
        let Some(info) = self.arrays.get(v.name.as_str()) else {
            return Err(unsupported(format!("unknown name `{}`", v.name), span));
        };
        let list = info.list.clone();
        if v.indexes.is_empty() {
            cx.use_name(&list);
            return Ok(list);
        }
        if v.indexes.len() != info.dims.len() {
            return Err(unsupported(format!("partial indexing of `{}`", v.name), span));
        }
        if v.indexes.iter().any(mentions_decision_vars) {
            return Err(unsupported(format!("variable index into `{}`", v.name), span));
        }
        let index = lin_index(&v.indexes, &info.dims);
        let index = match self.env.eval_int(&index) {
            Ok(i) => Expr::int(i),
            Err(_) => index,
        };
        let idx_term = self.arith(&index, cx)?.0;
        cx.use_name(&list);
        let cell = self.fresh_var();
        let simple = matches!(index.kind, ExprKind::Int(_) | ExprKind::Var(_));
        if simple {
            cx.pre.push(format!("nth({},{},{})", cell, idx_term, list));
        } else {
            let at = cell;
            let cell = self.fresh_var();
            cx.pre.push(format!("{} is {},nth({},{},{})", at, idx_term, cell, at, list));
            return Ok(cell);
        }
        Ok(cell)
    }

    fn is_set_expr(&self, e: &Expr) -> bool {
        match &e.kind {
            ExprKind::SetValue(_) | ExprKind::SetBinary(..) => true,
            ExprKind::Var(v) => self.set_vars.contains(v.name.as_str()),
            _ => false,
        }
    }

    fn set_term(&mut self, e: &Expr, cx: &mut Ctx) -> Result<String, ClpError> {
        Ok(match &e.kind {
            ExprKind::SetValue(items) => {
                let items = items.iter().map(|i| Ok(self.arith(i, cx)?.0)).collect::<Result<Vec<_>, ClpError>>()?;
                format!("[{}]", items.join(","))
            }
            ExprKind::SetBinary(op, l, r) => {
                let sym = match op {
                    SetBinOp::Intersect => "/\\",
                    SetBinOp::Union => "\\/",
                    SetBinOp::Diff => "\\",
                };
                let l = self.set_term(l, cx)?;
                let rt = self.set_term(r, cx)?;
                let rt = if matches!(r.kind, ExprKind::SetBinary(..)) {
                    format!("({})", rt)
                } else {
                    rt
                };
                format!("{} {} {}", l, sym, rt)
            }
            ExprKind::Var(v) => self.access(v, e.span, cx)?,
            _ => return Err(unsupported("set expression", e.span)),
        })
    }

    /// Arithmetic term and its operator priority.
    fn arith(&mut self, e: &Expr, cx: &mut Ctx) -> Result<(String, u32), ClpError> {
        Ok(match &e.kind {
            ExprKind::Int(v) => (v.to_string(), if *v < 0 { 200 } else { 0 }),
            ExprKind::Real(r) if r.is_finite() => (format!("{:?}", r), 0),
            ExprKind::Bool(b) => ((*b as i32).to_string(), 0),
            ExprKind::Var(v) => (self.access(v, e.span, cx)?, 0),
            ExprKind::AlgUnary(AlgUnaryOp::Plus, x) => self.arith(x, cx)?,
            ExprKind::AlgUnary(AlgUnaryOp::Neg, x) => {
                let (t, p) = self.arith(x, cx)?;
                let t = if p > 0 { format!("({})", t) } else { t };
                (format!("-{}", t), 200)
            }
            ExprKind::AlgBinary(op, l, r) => {
                let (sym, prec, right_max) = match op {
                    AlgBinOp::Add => ("+", 500, 499),
                    AlgBinOp::Sub => ("-", 500, 499),
                    AlgBinOp::Mul => ("*", 400, 399),
                    AlgBinOp::Div => ("/", 400, 399),
                    AlgBinOp::Pow => ("^", 200, 199),
                };
                let left_max = if *op == AlgBinOp::Pow { 199 } else { prec };
                let (lt, lp) = self.arith(l, cx)?;
                let (rt, rp) = self.arith(r, cx)?;
                let lt = if lp > left_max { format!("({})", lt) } else { lt };
                let rt = if rp > right_max { format!("({})", rt) } else { rt };
                (format!("{}{}{}", lt, sym, rt), prec)
            }
            ExprKind::AlgFunction(f, args) => {
                let name = match f {
                    AlgFn::Log => "ln",
                    other => other.name(),
                };
                let args = args.iter().map(|a| Ok(self.arith(a, cx)?.0)).collect::<Result<Vec<_>, ClpError>>()?;
                (format!("{}({})", name, args.join(",")), 0)
            }
            ExprKind::SetFunction(SetFn::Card, s) => {
                let set = self.set_term(s, cx)?;
                let n = self.fresh_var();
                cx.inline.push(format!("#({}, {})", set, n));
                (n, 0)
            }
            _ => return Err(unsupported("expression in arithmetic position", e.span)),
        })
    }

    fn goal(&mut self, e: &Expr, cx: &mut Ctx) -> Result<String, ClpError> {
        match &e.kind {
            ExprKind::Bool(true) => Ok("true".into()),
            ExprKind::Bool(false) => Ok("fail".into()),
            ExprKind::Var(_) => Ok(format!("{} $= 1", self.arith(e, cx)?.0)),
            ExprKind::Not(x) => Ok(format!("neg({})", self.goal(x, cx)?)),
            ExprKind::BoolBinary(op, l, r) if op.is_comparison() => {
                if self.is_set_expr(l) || self.is_set_expr(r) {
                    return Err(unsupported("comparison between sets", e.span));
                }
                if *op == BoolBinOp::Eq {
                    if let (ExprKind::SetFunction(SetFn::Card, s), Some(n)) = (&l.kind, r.as_int()) {
                        let set = self.set_term(s, cx)?;
                        return Ok(format!("#({}, {})", set, n));
                    }
                }
                let sym = match op {
                    BoolBinOp::Eq => "$=",
                    BoolBinOp::Ne => "$\\=",
                    BoolBinOp::Le => "$=<",
                    BoolBinOp::Ge => "$>=",
                    BoolBinOp::Lt => "$<",
                    _ => "$>",
                };
                let lt = self.arith(l, cx)?.0;
                let rt = self.arith(r, cx)?.0;
                Ok(format!("{} {} {}", lt, sym, rt))
            }
            ExprKind::BoolBinary(op, l, r) => {
                let a = self.goal(l, cx)?;
                let b = self.goal(r, cx)?;
                Ok(match op {
                    BoolBinOp::And => format!("({} and {})", a, b),
                    BoolBinOp::Or => format!("({} or {})", a, b),
                    BoolBinOp::Implies => format!("({} => {})", a, b),
                    _ => format!("(({} => {}) and ({} => {}))", a, b, b, a),
                })
            }
            _ => Err(unsupported("constraint form", e.span)),
        }
    }

    /// Ground test for `if` conditions, in Prolog arithmetic.
    fn test(&mut self, e: &Expr, cx: &mut Ctx) -> Result<String, ClpError> {
        match &e.kind {
            ExprKind::Bool(true) => Ok("true".into()),
            ExprKind::Bool(false) => Ok("fail".into()),
            ExprKind::Not(x) => Ok(format!("\\+ ({})", self.test(x, cx)?)),
            ExprKind::BoolBinary(op, l, r) if op.is_comparison() => {
                let sym = match op {
                    BoolBinOp::Eq => "=:=",
                    BoolBinOp::Ne => "=\\=",
                    BoolBinOp::Le => "=<",
                    BoolBinOp::Ge => ">=",
                    BoolBinOp::Lt => "<",
                    _ => ">",
                };
                Ok(format!("{} {} {}", self.arith(l, cx)?.0, sym, self.arith(r, cx)?.0))
            }
            ExprKind::BoolBinary(op, l, r) => {
                let a = self.test(l, cx)?;
                let b = self.test(r, cx)?;
                Ok(match op {
                    BoolBinOp::And => format!("({}, {})", a, b),
                    BoolBinOp::Or => format!("({} ; {})", a, b),
                    BoolBinOp::Implies => format!("(\\+ ({}) ; {})", a, b),
                    _ => format!("(({}, {}) ; (\\+ ({}), \\+ ({})))", a, b, a, b),
                })
            }
            _ => Err(unsupported("condition form", e.span)),
        }
    }

    // ------------------------------------------------------- statements

    fn take_line(cx: &mut Ctx, indent: &str, last: String, out: &mut Vec<String>) {
        for p in cx.pre.drain(..) {
            out.push(format!("{}{}", indent, p));
        }
        let mut parts: Vec<String> = cx.inline.drain(..).collect();
        if !last.is_empty() {
            parts.push(last);
        }
        if !parts.is_empty() {
            out.push(format!("{}{}", indent, parts.join(",")));
        }
    }

    fn statements(&mut self, stmts: &[Statement], depth: usize, cx: &mut Ctx) -> Result<Vec<String>, ClpError> {
        let mut out = Vec::new();
        for s in stmts {
            self.statement(s, depth, cx, &mut out)?;
        }
        Ok(out)
    }

    fn block(&mut self, stmts: &[Statement], depth: usize, cx: &mut Ctx) -> Result<String, ClpError> {
        let goals = self.statements(stmts, depth, cx)?;
        if goals.is_empty() {
            Ok(format!("{}true", " ".repeat(depth)))
        } else {
            Ok(goals.join(",\n"))
        }
    }

    fn statement(&mut self, s: &Statement, depth: usize, cx: &mut Ctx, out: &mut Vec<String>) -> Result<(), ClpError> {
        let indent = " ".repeat(depth);
        match s {
            Statement::Constraint(c) => {
                let g = self.goal(&c.expr, cx)?;
                Self::take_line(cx, &indent, g, out);
            }
            Statement::Global(g) => {
                let args = g
                    .params
                    .iter()
                    .map(|p| {
                        if self.is_set_expr(p) {
                            self.set_term(p, cx)
                        } else {
                            Ok(self.arith(p, cx)?.0)
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let goal = format!("{}([{}])", g.name, args.join(","));
                Self::take_line(cx, &indent, goal, out);
            }
            Statement::ForAll(l) => {
                for b in [&l.lower, &l.upper] {
                    if mentions_decision_vars(b) {
                        return Err(unsupported("loop bound depending on decision variables", b.span));
                    }
                }
                let lo = self.arith(&l.lower, cx)?.0;
                let hi = self.arith(&l.upper, cx)?.0;
                Self::take_line(cx, &indent, String::new(), out);
                let var = target_name(&l.var);
                let mut body_cx = Ctx {
                    locals: cx.locals.clone(),
                    used: vec![BTreeSet::new()],
                    pre: vec![],
                    inline: vec![],
                };
                body_cx.locals.push(l.var.clone());
                let body = self.block(&l.body, depth + 1, &mut body_cx)?;
                let mut used = body_cx.used.pop().unwrap_or_default();
                used.remove(&var);
                let mut params: Vec<String> = self.order.iter().filter(|n| used.contains(*n)).cloned().collect();
                for outer in &cx.locals {
                    let t = target_name(outer);
                    if used.contains(&t) && !params.contains(&t) {
                        params.push(t);
                    }
                }
                for p in &params {
                    cx.use_name(p);
                }
                let param = if params.is_empty() {
                    String::new()
                } else {
                    format!(",param({})", params.join(","))
                };
                out.push(format!("{}(for({},{},{}){} do\n{}\n{})", indent, var, lo, hi, param, body, indent));
            }
            Statement::If(i) => {
                if mentions_decision_vars(&i.cond) {
                    return Err(unsupported("condition on decision variables", i.cond.span));
                }
                let cond = self.test(&i.cond, cx)?;
                Self::take_line(cx, &indent, String::new(), out);
                let then = self.block(&i.then_body, depth + 1, cx)?;
                let els = match &i.else_body {
                    Some(b) => self.block(b, depth + 1, cx)?,
                    None => format!("{} true", indent),
                };
                out.push(format!("{}({} ->\n{}\n{};\n{}\n{})", indent, cond, then, indent, els, indent));
            }
        }
        Ok(())
    }

    // ----------------------------------------------------- declarations

    fn declarations(&mut self, items: &mut Vec<Item>, head: &str) -> Result<(), ClpError> {
        let mut goals = Vec::new();
        let mut lists = Vec::new();
        for v in self.model.variables() {
            let name = target_name(&v.decl.name);
            let count = if v.decl.dims.is_empty() {
                None
            } else {
                let mut n: i64 = 1;
                for d in &v.decl.dims {
                    n = n.saturating_mul(self.ground(d, &v.decl.name)?);
                }
                Some(n)
            };
            let range = |em: &Self| -> Result<Option<(i64, i64)>, ClpError> {
                match &v.domain {
                    Some(Domain::Interval { lo, hi }) => {
                        Ok(Some((em.ground(lo, &v.decl.name)?, em.ground(hi, &v.decl.name)?)))
                    }
                    _ => Ok(None),
                }
            };
            if v.decl.is_set {
                let Some((lo, hi)) = range(self)? else {
                    return Err(unsupported(
                        format!("set variable `{}` without an interval universe", v.decl.name),
                        v.decl.span,
                    ));
                };
                goals.push(match count {
                    Some(n) => format!("intsets({},{},{},{})", name, n, lo, hi),
                    None => format!("intset({},{},{})", name, lo, hi),
                });
            } else {
                if let Some(n) = count {
                    goals.push(format!("length({},{})", name, n));
                }
                let target = if count.is_some() { name.clone() } else { format!("[{}]", name) };
                let domain = match (&v.decl.ty, &v.domain) {
                    (TypeRef::Data(DataType::Boolean), _) => Some("0..1".to_string()),
                    (_, Some(Domain::Interval { .. })) => {
                        let (lo, hi) = range(self)?.unwrap_or((0, 0));
                        Some(format!("{}..{}", lo, hi))
                    }
                    (_, Some(Domain::Set { members })) => {
                        let vals = members
                            .iter()
                            .map(|m| self.ground(m, &v.decl.name).map(|x| x.to_string()))
                            .collect::<Result<Vec<_>, _>>()?;
                        Some(format!("[{}]", vals.join(",")))
                    }
                    (_, Some(Domain::Expr { expr })) => {
                        let value = self.env.eval(expr).map_err(|_| ClpError::NonGround {
                            name: v.decl.name.clone(),
                            span: expr.span,
                        })?;
                        let Value::Set(vals) = value else {
                            return Err(unsupported(format!("domain of `{}`", v.decl.name), expr.span));
                        };
                        let vals: Vec<String> = vals.iter().map(|x| x.to_string()).collect();
                        Some(format!("[{}]", vals.join(",")))
                    }
                    (_, None) => None,
                };
                goals.push(match domain {
                    Some(d) => format!("{} :: {}", name, d),
                    None => format!("integers({})", target),
                });
            }
            lists.push((name, count.is_some()));
        }
        let binding = match &lists[..] {
            [] => format!("{} = []", head),
            [(name, true)] => format!("{} = {}", head, name),
            _ if lists.iter().all(|(_, array)| !array) => {
                let names: Vec<&str> = lists.iter().map(|(n, _)| n.as_str()).collect();
                format!("{} = [{}]", head, names.join(","))
            }
            _ => {
                let names: Vec<&str> = lists.iter().map(|(n, _)| n.as_str()).collect();
                format!("flatten([{}],{})", names.join(","), head)
            }
        };
        goals.push(binding);
        items.extend(goals.into_iter().map(Item::Goal));
        Ok(())
    }
}

fn check_supported(m: &Model) -> Result<(), ClpError> {
    for e in &m.elements {
        match e {
            ModelElement::Classifier(Classifier::Class(c)) => {
                return Err(ClpError::UnsupportedElement(format!("class `{}`", c.name)))
            }
            ModelElement::Classifier(Classifier::Enumeration(en)) => {
                return Err(ClpError::UnsupportedElement(format!("enumeration `{}`", en.name)))
            }
            ModelElement::Parameterized(ParameterizedElement::Function(f)) => {
                return Err(ClpError::UnsupportedElement(format!("function `{}`", f.name)))
            }
            ModelElement::Parameterized(ParameterizedElement::Predicate(p)) => {
                return Err(ClpError::UnsupportedElement(format!("predicate `{}`", p.name)))
            }
            ModelElement::Feature(ModelFeature::Record(r)) => {
                return Err(ClpError::UnsupportedElement(format!("record `{}`", r.name)))
            }
            ModelElement::Feature(ModelFeature::Variable(v)) => match &v.decl.ty {
                TypeRef::Data(DataType::Real) => {
                    return Err(ClpError::UnsupportedElement(format!("real variable `{}`", v.decl.name)))
                }
                TypeRef::Data(_) => {}
                other => {
                    return Err(ClpError::UnsupportedElement(format!(
                        "variable `{}` of type `{}`",
                        v.decl.name,
                        other.name()
                    )))
                }
            },
            ModelElement::Feature(_) => {}
        }
    }
    Ok(())
}

fn valid_atom(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn default_predicate_name(model: &str) -> String {
    let mut chars = model.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => "model".into(),
    }
}

/// Emits one clause `name(L):-` whose argument is the list of decision
/// variables. Loops and zones keep their structure.
pub fn emit_clp(m: &Model, opts: &ClpEmitOptions) -> Result<String, ClpError> {
    check_supported(m)?;
    let pred = opts.predicate_name.clone().unwrap_or_else(|| default_predicate_name(&m.name));
    if !valid_atom(&pred) {
        return Err(ClpError::InvalidPredicateName(pred));
    }

    // Target names: every variable, constant and loop variable.
    let mut seen: HashMap<String, String> = HashMap::new();
    let mut declare = |name: &str| -> Result<(), ClpError> {
        let t = target_name(name);
        match seen.get(&t) {
            Some(other) if other != name => Err(ClpError::NameCollision(other.clone(), name.to_string())),
            _ => {
                seen.insert(t, name.to_string());
                Ok(())
            }
        }
    };
    for f in m.features() {
        match f {
            ModelFeature::Variable(v) => declare(&v.decl.name)?,
            ModelFeature::Constant(c) => declare(&c.decl.name)?,
            ModelFeature::Zone(z) => {
                let mut r = Ok(());
                walk_statements(&z.body, &mut |s| {
                    if let Statement::ForAll(l) = s {
                        if r.is_ok() {
                            r = declare(&l.var);
                        }
                    }
                });
                r?
            }
            ModelFeature::Record(_) => {}
        }
    }
    let mut taken: HashSet<String> = seen.keys().cloned().collect();
    let head = (0..)
        .map(|k| if k == 0 { "L".to_string() } else { format!("L{}", k) })
        .find(|n| !taken.contains(n))
        .unwrap_or_default();
    taken.insert(head.clone());

    let env = crate::passes::constant_env(m).unwrap_or_default();
    let var_count = m.variables().count();
    let mut em = Emitter {
        model: m,
        arrays: HashMap::new(),
        scalars: HashSet::new(),
        set_vars: HashSet::new(),
        constants: m.constants().map(|c| c.decl.name.as_str()).collect(),
        order: Vec::new(),
        taken,
        fresh: 0,
        env,
    };
    for v in m.variables() {
        if v.decl.is_set {
            em.set_vars.insert(&v.decl.name);
        }
        if v.decl.dims.is_empty() {
            em.scalars.insert(&v.decl.name);
            em.order.push(target_name(&v.decl.name));
        } else {
            let dims = v
                .decl
                .dims
                .iter()
                .map(|d| em.ground(d, &v.decl.name))
                .collect::<Result<Vec<_>, _>>()?;
            let list = if var_count == 1 { head.clone() } else { target_name(&v.decl.name) };
            em.order.push(list.clone());
            em.arrays.insert(&v.decl.name, ArrayInfo { dims, list });
        }
    }
    if var_count != 1 || em.arrays.is_empty() {
        em.order.insert(0, head.clone());
    }
    for c in m.constants() {
        em.order.push(target_name(&c.decl.name));
    }

    let mut items = Vec::new();
    let mut cx = Ctx {
        locals: vec![],
        used: vec![BTreeSet::new()],
        pre: vec![],
        inline: vec![],
    };
    for c in m.constants() {
        let value = em.arith(&c.value, &mut cx)?.0;
        items.push(Item::Goal(format!("{} $= {}", target_name(&c.decl.name), value)));
    }
    if !items.is_empty() {
        items.push(Item::Blank);
    }
    em.declarations(&mut items, &head)?;
    for z in m.zones() {
        items.push(Item::Blank);
        items.push(Item::Comment(format!("% {}", z.name)));
        let goals = em.statements(&z.body, 1, &mut cx)?;
        items.extend(goals.into_iter().map(Item::Goal));
    }
    if opts.labeling {
        items.push(Item::Blank);
        let goal = if em.set_vars.is_empty() { "labeling" } else { "label_sets" };
        items.push(Item::Goal(format!("{}({})", goal, head)));
    }

    let last = items.iter().rposition(|i| matches!(i, Item::Goal(_))).unwrap_or(0);
    let mut out = format!("{}({}):-\n", pred, head);
    for (k, item) in items.iter().enumerate() {
        match item {
            Item::Blank => {
                if k < last {
                    out.push('\n')
                }
            }
            Item::Comment(c) => {
                out.push(' ');
                out.push_str(c);
                out.push('\n');
            }
            Item::Goal(g) => {
                let g = if g.starts_with(' ') { g.clone() } else { format!(" {}", g) };
                out.push_str(&g);
                out.push_str(if k == last { ".\n" } else { ",\n" });
            }
        }
    }
    Ok(out)
}
