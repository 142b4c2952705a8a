//! Helpers shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, Zero};
use rand::Rng;

use pivot_cp::backend::{FlatDomain, FlatExpr, FlatOp, FlatProgram, FlatVarKind};
use pivot_cp::frontend::{parse, SourceUnit};
use pivot_cp::oracle::{Assignment, OracleValue};
use pivot_cp::pivot::*;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{}: {}", name, e))
}

/// Fixture models as (model file, optional data file).
pub const FIXTURES: [(&str, Option<&str>); 5] = [
    ("golfers.som", Some("golfers.dat")),
    ("queens4.som", None),
    ("queens5.som", None),
    ("queens6.som", None),
    ("send.som", None),
];

pub fn load_fixture(model: &str, data: Option<&str>) -> Model {
    let src = SourceUnit::new(data.map(fixture_text), fixture_text(model));
    parse(&src).unwrap_or_else(|d| panic!("{}: {:?}", model, d))
}

pub fn parse_text(text: &str) -> Model {
    parse(&SourceUnit::model(text)).unwrap_or_else(|d| panic!("{:?}\n{}", d, text))
}

// ------------------------------------------------- reference enumeration

/// Plain cross-product enumeration of a flat program: every combination is
/// built and filtered. Deliberately unoptimised.
pub fn naive_solutions(p: &FlatProgram) -> BTreeSet<Assignment> {
    let domains: Vec<Vec<OracleValue>> = p.vars.iter().map(|v| values(&v.kind)).collect();
    let mut out = BTreeSet::new();
    if domains.iter().any(|d| d.is_empty()) {
        return out;
    }
    let mut pos = vec![0usize; domains.len()];
    loop {
        let asg: Assignment = p
            .vars
            .iter()
            .zip(&pos)
            .enumerate()
            .map(|(i, (v, &k))| (v.name.clone(), domains[i][k].clone()))
            .collect();
        if p.constraints.iter().all(|c| matches!(value(c, &asg), Some(V::B(true)))) {
            out.insert(asg);
        }
        let mut i = 0;
        loop {
            if i == pos.len() {
                return out;
            }
            pos[i] += 1;
            if pos[i] < domains[i].len() {
                break;
            }
            pos[i] = 0;
            i += 1;
        }
    }
}

fn values(kind: &FlatVarKind) -> Vec<OracleValue> {
    match kind {
        FlatVarKind::Bool => vec![OracleValue::Bool(false), OracleValue::Bool(true)],
        FlatVarKind::Int(FlatDomain::Range(lo, hi)) => (*lo..=*hi).map(OracleValue::Int).collect(),
        FlatVarKind::Int(FlatDomain::Values(v)) => {
            v.iter().copied().collect::<BTreeSet<_>>().into_iter().map(OracleValue::Int).collect()
        }
        FlatVarKind::Set { lo, hi } => {
            let universe: Vec<i64> = (*lo..=*hi).collect();
            (0u32..1 << universe.len())
                .map(|mask| {
                    OracleValue::Set(
                        universe.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, v)| *v).collect(),
                    )
                })
                .collect()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum V {
    B(bool),
    N(Ratio<i128>),
    S(BTreeSet<i64>),
}

fn num(v: V) -> Option<Ratio<i128>> {
    match v {
        V::B(b) => Some(Ratio::from_integer(b as i128)),
        V::N(n) => Some(n),
        V::S(_) => None,
    }
}

fn value(e: &FlatExpr, asg: &Assignment) -> Option<V> {
    let n = |x: &FlatExpr| value(x, asg).and_then(num);
    let b = |x: &FlatExpr| match value(x, asg)? {
        V::B(v) => Some(v),
        _ => None,
    };
    Some(match e {
        FlatExpr::Int(v) => V::N(Ratio::from_integer(*v as i128)),
        FlatExpr::Bool(v) => V::B(*v),
        FlatExpr::Set(items) => V::S(items.iter().copied().collect()),
        FlatExpr::Var(name) => match asg.get(name)? {
            OracleValue::Bool(v) => V::B(*v),
            OracleValue::Int(v) => V::N(Ratio::from_integer(*v as i128)),
            OracleValue::Set(s) => V::S(s.clone()),
        },
        FlatExpr::Neg(x) => V::N(-n(x)?),
        FlatExpr::Not(x) => V::B(!b(x)?),
        FlatExpr::Card(x) => match value(x, asg)? {
            V::S(s) => V::N(Ratio::from_integer(s.len() as i128)),
            _ => return None,
        },
        FlatExpr::Call(f, args) => {
            let vals = args.iter().map(&n).collect::<Option<Vec<_>>>()?;
            V::N(match (f, vals.as_slice()) {
                (AlgFn::Abs, [x]) => x.abs(),
                (AlgFn::Min, [_, ..]) => vals.iter().copied().min()?,
                (AlgFn::Max, [_, ..]) => vals.iter().copied().max()?,
                _ => return None,
            })
        }
        FlatExpr::Bin(op, l, r) => match op {
            FlatOp::And => V::B(b(l)? && b(r)?),
            FlatOp::Or => V::B(b(l)? || b(r)?),
            FlatOp::Implies => V::B(!b(l)? || b(r)?),
            FlatOp::Iff => V::B(b(l)? == b(r)?),
            FlatOp::Eq | FlatOp::Ne => {
                let same = match (value(l, asg)?, value(r, asg)?) {
                    (V::S(x), V::S(y)) => x == y,
                    (V::S(_), _) | (_, V::S(_)) => return None,
                    (x, y) => num(x)? == num(y)?,
                };
                V::B(same == (*op == FlatOp::Eq))
            }
            FlatOp::Lt => V::B(n(l)? < n(r)?),
            FlatOp::Le => V::B(n(l)? <= n(r)?),
            FlatOp::Gt => V::B(n(l)? > n(r)?),
            FlatOp::Ge => V::B(n(l)? >= n(r)?),
            FlatOp::Union | FlatOp::Diff | FlatOp::Intersect => match (value(l, asg)?, value(r, asg)?) {
                (V::S(x), V::S(y)) => V::S(match op {
                    FlatOp::Union => &x | &y,
                    FlatOp::Diff => &x - &y,
                    _ => &x & &y,
                }),
                _ => return None,
            },
            FlatOp::Add => V::N(n(l)?.checked_add(&n(r)?)?),
            FlatOp::Sub => V::N(n(l)?.checked_sub(&n(r)?)?),
            FlatOp::Mul => V::N(n(l)?.checked_mul(&n(r)?)?),
            FlatOp::Div => {
                let d = n(r)?;
                if d.is_zero() {
                    return None;
                }
                V::N(n(l)?.checked_div(&d)?)
            }
            FlatOp::Pow => {
                let (x, y) = (n(l)?, n(r)?);
                if !y.is_integer() || y.to_integer().abs() > 64 {
                    return None;
                }
                let k = y.to_integer();
                if x.is_zero() && k < 0 {
                    return None;
                }
                let mut acc = Ratio::<i128>::one();
                for _ in 0..k.abs() {
                    acc = acc.checked_mul(&x)?;
                }
                V::N(if k < 0 { acc.recip() } else { acc })
            }
        },
    })
}

// ------------------------------------------------ structured evaluation

/// Cell assignment of a structured (loop-preserving) pivot model: one value
/// per array cell, keyed by name and index.
type Cell = (String, Vec<i64>);
type Cells = HashMap<Cell, i64>;

/// Counts the solutions of a resolved, class-free pivot model with integer
/// variables by evaluating its zones directly, loops and all.
pub fn structured_solution_count(m: &Model) -> usize {
    let env = ConstEnv::from_model(m).expect("constants evaluate");
    let mut cells: Vec<(Cell, Vec<i64>)> = Vec::new();
    for v in m.variables() {
        let dims: Vec<i64> = v.decl.dims.iter().map(|d| env.eval_int(d).expect("ground dim")).collect();
        let dom: Vec<i64> = match v.domain.as_ref().expect("integer domain") {
            Domain::Interval { lo, hi } => (env.eval_int(lo).unwrap()..=env.eval_int(hi).unwrap()).collect(),
            Domain::Set { members } => members.iter().map(|x| env.eval_int(x).unwrap()).collect(),
            Domain::Expr { .. } => panic!("unsupported domain form"),
        };
        for index in index_tuples(&dims) {
            cells.push(((v.decl.name.clone(), index), dom.clone()));
        }
    }
    let zones: Vec<&ConstraintZone> = m.zones().collect();
    let mut pos = vec![0usize; cells.len()];
    let mut count = 0;
    loop {
        let asg: Cells = cells.iter().zip(&pos).map(|((k, d), &i)| (k.clone(), d[i])).collect();
        let mut locals = Vec::new();
        if zones.iter().all(|z| block_holds(&z.body, &env, &asg, &mut locals)) {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == pos.len() {
                return count;
            }
            pos[i] += 1;
            if pos[i] < cells[i].1.len() {
                break;
            }
            pos[i] = 0;
            i += 1;
        }
    }
}

fn index_tuples(dims: &[i64]) -> Vec<Vec<i64>> {
    dims.iter().fold(vec![vec![]], |acc, &d| {
        acc.into_iter()
            .flat_map(|prefix| {
                (1..=d).map(move |i| {
                    let mut t = prefix.clone();
                    t.push(i);
                    t
                })
            })
            .collect()
    })
}

fn block_holds(body: &[Statement], env: &ConstEnv, asg: &Cells, locals: &mut Vec<(String, i64)>) -> bool {
    body.iter().all(|s| match s {
        Statement::Constraint(c) => truth(&c.expr, env, asg, locals) == Some(true),
        Statement::Global(g) if g.name == ALLDIFFERENT => {
            let vals: Option<Vec<i64>> = g.params.iter().map(|p| int(p, env, asg, locals)).collect();
            vals.is_some_and(|v| v.iter().collect::<BTreeSet<_>>().len() == v.len())
        }
        Statement::Global(g) => panic!("unsupported global `{}`", g.name),
        Statement::ForAll(f) => {
            let (Some(lo), Some(hi)) = (int(&f.lower, env, asg, locals), int(&f.upper, env, asg, locals)) else {
                return false;
            };
            (lo..=hi).all(|i| {
                locals.push((f.var.clone(), i));
                let ok = block_holds(&f.body, env, asg, locals);
                locals.pop();
                ok
            })
        }
        Statement::If(i) => match truth(&i.cond, env, asg, locals) {
            Some(true) => block_holds(&i.then_body, env, asg, locals),
            Some(false) => i.else_body.as_deref().is_none_or(|b| block_holds(b, env, asg, locals)),
            None => false,
        },
    })
}

fn int(e: &Expr, env: &ConstEnv, asg: &Cells, locals: &[(String, i64)]) -> Option<i64> {
    let rec = |x: &Expr| int(x, env, asg, locals);
    match &e.kind {
        ExprKind::Int(v) => Some(*v),
        ExprKind::Var(v) => {
            if v.indexes.is_empty() {
                if let Some((_, x)) = locals.iter().rev().find(|(n, _)| *n == v.name) {
                    return Some(*x);
                }
            }
            match v.binding {
                Binding::Variable => {
                    let index = v.indexes.iter().map(rec).collect::<Option<Vec<_>>>()?;
                    asg.get(&(v.name.clone(), index)).copied()
                }
                _ => env.eval_int(e).ok(),
            }
        }
        ExprKind::AlgUnary(AlgUnaryOp::Neg, x) => rec(x)?.checked_neg(),
        ExprKind::AlgUnary(AlgUnaryOp::Plus, x) => rec(x),
        ExprKind::AlgBinary(op, l, r) => {
            let (a, b) = (rec(l)?, rec(r)?);
            match op {
                AlgBinOp::Add => a.checked_add(b),
                AlgBinOp::Sub => a.checked_sub(b),
                AlgBinOp::Mul => a.checked_mul(b),
                _ => panic!("unsupported operator"),
            }
        }
        ExprKind::AlgFunction(AlgFn::Abs, args) if args.len() == 1 => rec(&args[0]).map(i64::abs),
        other => panic!("unsupported expression {:?}", other),
    }
}

fn truth(e: &Expr, env: &ConstEnv, asg: &Cells, locals: &[(String, i64)]) -> Option<bool> {
    let i = |x: &Expr| int(x, env, asg, locals);
    let t = |x: &Expr| truth(x, env, asg, locals);
    match &e.kind {
        ExprKind::Bool(b) => Some(*b),
        ExprKind::Not(x) => t(x).map(|b| !b),
        ExprKind::BoolBinary(op, l, r) => Some(match op {
            BoolBinOp::And => t(l)? && t(r)?,
            BoolBinOp::Or => t(l)? || t(r)?,
            BoolBinOp::Implies => !t(l)? || t(r)?,
            BoolBinOp::Iff => t(l)? == t(r)?,
            BoolBinOp::Eq => i(l)? == i(r)?,
            BoolBinOp::Ne => i(l)? != i(r)?,
            BoolBinOp::Le => i(l)? <= i(r)?,
            BoolBinOp::Ge => i(l)? >= i(r)?,
            BoolBinOp::Lt => i(l)? < i(r)?,
            BoolBinOp::Gt => i(l)? > i(r)?,
        }),
        other => panic!("unsupported condition {:?}", other),
    }
}

/// Board placements with no two queens on a row or diagonal, counted from
/// first principles.
pub fn queens_count(n: i64) -> usize {
    fn place(n: i64, cols: &mut Vec<i64>) -> usize {
        if cols.len() as i64 == n {
            return 1;
        }
        let c = cols.len() as i64 + 1;
        let mut total = 0;
        for r in 1..=n {
            let ok = cols.iter().enumerate().all(|(j, &rj)| {
                let cj = j as i64 + 1;
                rj != r && (rj - r).abs() != (cj - c).abs()
            });
            if ok {
                cols.push(r);
                total += place(n, cols);
                cols.pop();
            }
        }
        total
    }
    place(n, &mut Vec::new())
}

/// Assignments of `names` over `1..=n` whose values are pairwise distinct,
/// found by filtering the full cross product.
pub fn distinct_tuples(names: &[String], n: i64) -> BTreeSet<Assignment> {
    let mut out = BTreeSet::new();
    let k = names.len() as u32;
    for code in 0..(n as u64).pow(k) {
        let mut c = code;
        let vals: Vec<i64> = (0..k)
            .map(|_| {
                let v = (c % n as u64) as i64 + 1;
                c /= n as u64;
                v
            })
            .collect();
        if vals.iter().collect::<BTreeSet<_>>().len() == vals.len() {
            out.insert(names.iter().cloned().zip(vals.into_iter().map(OracleValue::Int)).collect());
        }
    }
    out
}

pub fn to_set(sols: &[Assignment]) -> BTreeSet<Assignment> {
    sols.iter().cloned().collect()
}

// -------------------------------------------------- random source models

/// Generates the text of a small model that parses and resolves.
pub fn random_model_source<R: Rng>(rng: &mut R) -> String {
    Gen::new(rng).model()
}

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    out: String,
    ints: Vec<String>,
    arrays: Vec<(String, i64)>,
    bools: Vec<String>,
    enums: Vec<(String, Vec<String>)>,
    enum_vars: Vec<(String, usize)>,
    locals: Vec<(String, i64)>,
    next: usize,
}

impl<'r, R: Rng> Gen<'r, R> {
    fn new(rng: &'r mut R) -> Self {
        Gen {
            rng,
            out: String::new(),
            ints: Vec::new(),
            arrays: Vec::new(),
            bools: Vec::new(),
            enums: Vec::new(),
            enum_vars: Vec::new(),
            locals: Vec::new(),
            next: 0,
        }
    }

    fn fresh(&mut self, prefix: &str) -> String {
        self.next += 1;
        format!("{}{}", prefix, self.next)
    }

    fn model(mut self) -> String {
        if self.rng.gen_bool(0.3) {
            let n = self.fresh("M");
            self.out += &format!("model {};\n", n);
        }
        for _ in 0..self.rng.gen_range(0..=2) {
            let name = self.fresh("E");
            let lits: Vec<String> = (0..self.rng.gen_range(1..=3)).map(|_| self.fresh("lit")).collect();
            self.out += &format!("enum {} := {{{}}};\n", name, lits.join(", "));
            self.enums.push((name, lits));
        }
        for _ in 0..self.rng.gen_range(0..=3) {
            let name = self.fresh("c");
            let value = self.int_expr(2, true);
            self.out += &format!("int {} := {};\n", name, value);
            self.ints.push(name);
        }
        if self.rng.gen_bool(0.2) {
            let name = self.fresh("flag");
            let v = self.rng.gen_bool(0.5);
            self.out += &format!("bool {} := {};\n", name, v);
        }
        if self.rng.gen_bool(0.2) {
            let name = self.fresh("r");
            let v = self.rng.gen_range(-40..40) as f64 / 4.0;
            self.out += &format!("real {} := {:?};\n", name, v);
        }
        let helper = if self.rng.gen_bool(0.3) {
            let class = self.fresh("Part");
            let field = self.fresh("f");
            let zone = self.fresh("pz");
            self.out += &format!(
                "class {} {{\n  int {} in 0..3;\n  constraint {} {{\n    {} >= 1;\n  }}\n}}\n",
                class, field, zone, field
            );
            Some(class)
        } else {
            None
        };
        let in_class = helper.is_some() || self.rng.gen_bool(0.6);
        let indent = if in_class { "  " } else { "" };
        if in_class {
            let name = self.fresh("Main");
            self.out += &format!("main class {} {{\n", name);
        }
        if let Some(class) = &helper {
            let obj = self.fresh("part");
            if self.rng.gen_bool(0.5) {
                let n = self.rng.gen_range(1..=3);
                self.out += &format!("{}{} {}[{}];\n", indent, class, obj, n);
            } else {
                self.out += &format!("{}{} {};\n", indent, class, obj);
            }
        }
        for _ in 0..self.rng.gen_range(1..=4) {
            let line = self.declaration();
            self.out += &format!("{}{}\n", indent, line);
        }
        for _ in 0..self.rng.gen_range(0..=3) {
            let name = self.fresh("z");
            let mut body = String::new();
            for _ in 0..self.rng.gen_range(0..=3) {
                body += &self.statement(2, &format!("{}  ", indent));
            }
            self.out += &format!("{}constraint {} {{\n{}{}}}\n", indent, name, body, indent);
        }
        if in_class {
            self.out += "}\n";
        }
        self.out
    }

    fn declaration(&mut self) -> String {
        let lo = self.rng.gen_range(-3..=2);
        let hi = lo + self.rng.gen_range(0..=4);
        match self.rng.gen_range(0..6) {
            0 => {
                let name = self.fresh("a");
                let n = self.rng.gen_range(1..=4);
                self.arrays.push((name.clone(), n));
                format!("int {}[{}] in {}..{};", name, n, lo, hi)
            }
            1 => {
                let name = self.fresh("b");
                self.bools.push(name.clone());
                format!("bool {};", name)
            }
            2 if !self.enums.is_empty() => {
                let k = self.rng.gen_range(0..self.enums.len());
                let name = self.fresh("ev");
                self.enum_vars.push((name.clone(), k));
                let set = if self.rng.gen_bool(0.3) { " set" } else { "" };
                let decl = format!("{}{} {};", self.enums[k].0, set, name);
                if !set.is_empty() {
                    self.enum_vars.pop();
                }
                decl
            }
            3 => {
                let name = self.fresh("v");
                self.ints.push(name.clone());
                let members: Vec<String> = (0..self.rng.gen_range(1..=3)).map(|i| (lo + 2 * i).to_string()).collect();
                format!("int {} in {{{}}};", name, members.join(", "))
            }
            _ => {
                let name = self.fresh("x");
                self.ints.push(name.clone());
                format!("int {} in {}..{};", name, lo, hi)
            }
        }
    }

    fn int_atom(&mut self, consts_only: bool) -> String {
        let mut choices: Vec<String> = vec![self.rng.gen_range(0..10).to_string()];
        if consts_only {
            choices.extend(self.ints.iter().filter(|n| n.starts_with('c')).cloned());
        } else {
            choices.extend(self.ints.iter().cloned());
            choices.extend(self.locals.iter().map(|(n, _)| n.clone()));
            for (a, n) in &self.arrays {
                choices.push(format!("{}[{}]", a, self.rng.gen_range(1..=*n)));
                if let Some((l, hi)) = self.locals.last() {
                    if hi <= n {
                        choices.push(format!("{}[{}]", a, l));
                    }
                }
            }
        }
        let k = self.rng.gen_range(0..choices.len());
        choices.swap_remove(k)
    }

    fn int_expr(&mut self, depth: u32, consts_only: bool) -> String {
        if depth == 0 || self.rng.gen_bool(0.4) {
            return self.int_atom(consts_only);
        }
        match self.rng.gen_range(0..7) {
            0 => format!("-{}", self.int_expr(depth - 1, consts_only)),
            1 => format!("({})", self.int_expr(depth - 1, consts_only)),
            2 if !consts_only => format!("abs({})", self.int_expr(depth - 1, consts_only)),
            3 => format!("{}^{}", self.int_atom(consts_only), self.rng.gen_range(0..3)),
            _ => {
                let op = ["+", "-", "*"][self.rng.gen_range(0..3)];
                let l = self.int_expr(depth - 1, consts_only);
                let r = self.int_expr(depth - 1, consts_only);
                format!("{} {} {}", l, op, r)
            }
        }
    }

    fn bool_expr(&mut self, depth: u32) -> String {
        let choice = if depth == 0 { self.rng.gen_range(0..3) } else { self.rng.gen_range(0..7) };
        match choice {
            1 if !self.bools.is_empty() => self.bools[self.rng.gen_range(0..self.bools.len())].clone(),
            2 if !self.enum_vars.is_empty() => {
                let (v, k) = self.enum_vars[self.rng.gen_range(0..self.enum_vars.len())].clone();
                let lits = &self.enums[k].1;
                let lit = lits[self.rng.gen_range(0..lits.len())].clone();
                format!("{} != {}", v, lit)
            }
            3 => format!("not ({})", self.bool_expr(depth - 1)),
            4 | 5 => {
                let op = ["and", "or", "implies", "iff"][self.rng.gen_range(0..4)];
                let l = self.bool_expr(depth - 1);
                let r = self.bool_expr(depth - 1);
                format!("({}) {} ({})", l, op, r)
            }
            _ => {
                let op = ["=", "!=", "<", "<=", ">", ">="][self.rng.gen_range(0..6)];
                let l = self.int_expr(depth.min(2), false);
                let r = self.int_expr(depth.min(2), false);
                format!("{} {} {}", l, op, r)
            }
        }
    }

    fn statement(&mut self, depth: u32, indent: &str) -> String {
        let choice = if depth == 0 { 0 } else { self.rng.gen_range(0..5) };
        match choice {
            1 => {
                let var = self.fresh("i");
                let hi = self.rng.gen_range(1..=3);
                self.locals.push((var.clone(), hi));
                let inner = format!("{}  ", indent);
                let body = self.statement(depth - 1, &inner);
                self.locals.pop();
                format!("{}forall({} in 1..{}) {{\n{}{}}}\n", indent, var, hi, body, indent)
            }
            2 => {
                let cond = self.bool_expr(1);
                let inner = format!("{}  ", indent);
                let then = self.statement(depth - 1, &inner);
                if self.rng.gen_bool(0.5) {
                    let other = self.statement(depth - 1, &inner);
                    format!("{}if ({}) {{\n{}{}}} else {{\n{}{}}}\n", indent, cond, then, indent, other, indent)
                } else {
                    format!("{}if ({}) {{\n{}{}}}\n", indent, cond, then, indent)
                }
            }
            3 => {
                let args: Vec<String> = (0..self.rng.gen_range(1..=3)).map(|_| self.int_atom(false)).collect();
                format!("{}alldifferent({});\n", indent, args.join(", "))
            }
            _ => format!("{}{};\n", indent, self.bool_expr(2)),
        }
    }
}
