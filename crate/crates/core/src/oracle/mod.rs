//! Brute-force enumeration of flat programs, the ground truth used to check
//! that rewrites preserve (or only relax) solution sets.
//!
//! The search is plain backtracking over declared domains. A constraint is
//! checked as soon as all of its variables are assigned, and constraints on
//! a single variable prune its domain before the search starts. No other
//! propagation is done.

mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Zero};
use thiserror::Error;

use crate::backend::{FlatDomain, FlatExpr, FlatOp, FlatProgram, FlatVarKind};
use crate::pivot::AlgFn;

pub use parse::parse_flat;

/// Largest number of candidate assignments `enumerate` accepts.
pub const MAX_SEARCH_SPACE: u128 = 1 << 40;
/// Largest universe a set variable may range over.
pub const MAX_SET_UNIVERSE: i64 = 12;
const MAX_DOMAIN: u128 = 1 << 22;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OracleValue {
    Bool(bool),
    Int(i64),
    Set(BTreeSet<i64>),
}

impl fmt::Display for OracleValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleValue::Bool(b) => write!(f, "{}", b),
            OracleValue::Int(v) => write!(f, "{}", v),
            OracleValue::Set(s) => {
                let items: Vec<String> = s.iter().map(|v| v.to_string()).collect();
                write!(f, "{{{}}}", items.join(", "))
            }
        }
    }
}

pub type Assignment = BTreeMap<String, OracleValue>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_solutions: usize,
    pub max_nodes: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_solutions: 1_000_000,
            max_nodes: 10_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionSet {
    pub variables: Vec<String>,
    /// Sorted, without duplicates.
    pub solutions: Vec<Assignment>,
    /// False when a limit stopped the search early.
    pub complete: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    Equal,
    Subset,
    Superset,
    Incomparable,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparison::Equal => "EQUAL",
            Comparison::Subset => "SUBSET",
            Comparison::Superset => "SUPERSET",
            Comparison::Incomparable => "DIFFER",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("search space of {size} assignments exceeds the limit of 2^40")]
    SearchSpaceTooLarge { size: String },
    #[error("set variable `{name}` ranges over {size} values; at most 12 are supported")]
    UniverseTooLarge { name: String, size: i64 },
    #[error("solution set is incomplete")]
    IncompleteSolutionSet,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    /// Restricts every solution to `names`, merging duplicates.
    pub fn project(&self, names: &[impl AsRef<str>]) -> Result<SolutionSet, OracleError> {
        for n in names {
            if !self.variables.iter().any(|v| v == n.as_ref()) {
                return Err(OracleError::UnknownVariable(n.as_ref().to_string()));
            }
        }
        let keep = |v: &String| names.iter().any(|n| n.as_ref() == v);
        let solutions: BTreeSet<Assignment> = self
            .solutions
            .iter()
            .map(|s| s.iter().filter(|(k, _)| keep(k)).map(|(k, v)| (k.clone(), v.clone())).collect())
            .collect();
        Ok(SolutionSet {
            variables: self.variables.iter().filter(|v| keep(v)).cloned().collect(),
            solutions: solutions.into_iter().collect(),
            complete: self.complete,
        })
    }
}

/// Compares `a` with `b` after projecting both onto `projection`.
pub fn compare_solutions(
    a: &SolutionSet,
    b: &SolutionSet,
    projection: &[impl AsRef<str>],
) -> Result<Comparison, OracleError> {
    if !a.complete || !b.complete {
        return Err(OracleError::IncompleteSolutionSet);
    }
    let a: BTreeSet<Assignment> = a.project(projection)?.solutions.into_iter().collect();
    let b: BTreeSet<Assignment> = b.project(projection)?.solutions.into_iter().collect();
    Ok(if a == b {
        Comparison::Equal
    } else if a.is_subset(&b) {
        Comparison::Subset
    } else if a.is_superset(&b) {
        Comparison::Superset
    } else {
        Comparison::Incomparable
    })
}

// ------------------------------------------------------------- evaluation

#[derive(Clone, Debug, PartialEq)]
enum Num {
    Int(i128),
    Rat(Ratio<i128>),
}

impl Num {
    fn rat(&self) -> Ratio<i128> {
        match self {
            Num::Int(v) => Ratio::from_integer(*v),
            Num::Rat(r) => *r,
        }
    }

    fn from_rat(r: Ratio<i128>) -> Num {
        if r.is_integer() {
            Num::Int(r.to_integer())
        } else {
            Num::Rat(r)
        }
    }

    fn cmp(&self, other: &Num) -> std::cmp::Ordering {
        match (self, other) {
            (Num::Int(a), Num::Int(b)) => a.cmp(b),
            _ => self.rat().cmp(&other.rat()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Val {
    Bool(bool),
    Num(Num),
    Set(BTreeSet<i64>),
}

impl Val {
    fn num(&self) -> Option<Num> {
        match self {
            Val::Num(n) => Some(n.clone()),
            Val::Bool(b) => Some(Num::Int(*b as i128)),
            Val::Set(_) => None,
        }
    }

    fn public(&self) -> OracleValue {
        match self {
            Val::Bool(b) => OracleValue::Bool(*b),
            Val::Num(Num::Int(v)) => OracleValue::Int(*v as i64),
            Val::Num(Num::Rat(_)) => unreachable!("domains hold integers"),
            Val::Set(s) => OracleValue::Set(s.clone()),
        }
    }
}

/// Flat expression with variables replaced by their position.
enum Code {
    Const(Val),
    Var(usize),
    Neg(Box<Code>),
    Not(Box<Code>),
    Card(Box<Code>),
    Call(AlgFn, Vec<Code>),
    Bin(FlatOp, Box<Code>, Box<Code>),
}

fn compile(e: &FlatExpr, index: &BTreeMap<&str, usize>) -> Result<Code, OracleError> {
    let rec = |x: &FlatExpr| compile(x, index).map(Box::new);
    Ok(match e {
        FlatExpr::Int(v) => Code::Const(Val::Num(Num::Int(*v as i128))),
        FlatExpr::Bool(b) => Code::Const(Val::Bool(*b)),
        FlatExpr::Set(items) => Code::Const(Val::Set(items.iter().copied().collect())),
        FlatExpr::Var(n) => Code::Var(*index.get(n.as_str()).ok_or_else(|| OracleError::UnknownVariable(n.clone()))?),
        FlatExpr::Neg(x) => Code::Neg(rec(x)?),
        FlatExpr::Not(x) => Code::Not(rec(x)?),
        FlatExpr::Card(x) => Code::Card(rec(x)?),
        FlatExpr::Call(f, args) => Code::Call(*f, args.iter().map(|a| compile(a, index)).collect::<Result<_, _>>()?),
        FlatExpr::Bin(op, l, r) => Code::Bin(*op, rec(l)?, rec(r)?),
    })
}

fn arith(op: FlatOp, a: Num, b: Num) -> Option<Num> {
    if let (Num::Int(x), Num::Int(y)) = (&a, &b) {
        let (x, y) = (*x, *y);
        return match op {
            FlatOp::Add => x.checked_add(y).map(Num::Int),
            FlatOp::Sub => x.checked_sub(y).map(Num::Int),
            FlatOp::Mul => x.checked_mul(y).map(Num::Int),
            FlatOp::Div if y == 0 => None,
            FlatOp::Div if x % y == 0 => Some(Num::Int(x / y)),
            FlatOp::Div => Some(Num::Rat(Ratio::new(x, y))),
            _ => power(Ratio::from_integer(x), y).map(Num::from_rat),
        };
    }
    let (x, y) = (a.rat(), b.rat());
    let r = match op {
        FlatOp::Add => x.checked_add(&y)?,
        FlatOp::Sub => x.checked_sub(&y)?,
        FlatOp::Mul => x.checked_mul(&y)?,
        FlatOp::Div if y.is_zero() => return None,
        FlatOp::Div => x.checked_div(&y)?,
        _ if y.is_integer() => power(x, y.to_integer())?,
        _ => return None,
    };
    Some(Num::from_rat(r))
}

/// Exact integer power; non-integral results of roots are not defined.
fn power(base: Ratio<i128>, exp: i128) -> Option<Ratio<i128>> {
    if base.is_zero() {
        return match exp {
            0 => Some(Ratio::one()),
            e if e > 0 => Some(Ratio::zero()),
            _ => None,
        };
    }
    if base.is_one() {
        return Some(base);
    }
    if base == -Ratio::one() {
        return Some(if exp % 2 == 0 { Ratio::one() } else { base });
    }
    if exp.unsigned_abs() > 128 {
        return None;
    }
    let mut acc = Ratio::one();
    for _ in 0..exp.unsigned_abs() {
        acc = acc.checked_mul(&base)?;
    }
    if exp < 0 {
        acc = Ratio::one().checked_div(&acc)?;
    }
    Some(acc)
}

/// Value of `c`, or `None` when undefined (division by zero, overflow,
/// operands of the wrong kind).
fn eval(c: &Code, asg: &[Val]) -> Option<Val> {
    Some(match c {
        Code::Const(v) => v.clone(),
        Code::Var(i) => asg[*i].clone(),
        Code::Neg(x) => match eval(x, asg)?.num()? {
            Num::Int(v) => Val::Num(Num::Int(v.checked_neg()?)),
            Num::Rat(r) => Val::Num(Num::Rat(-r)),
        },
        Code::Not(x) => match eval(x, asg)? {
            Val::Bool(b) => Val::Bool(!b),
            _ => return None,
        },
        Code::Card(x) => match eval(x, asg)? {
            Val::Set(s) => Val::Num(Num::Int(s.len() as i128)),
            _ => return None,
        },
        Code::Call(f, args) => {
            let vals = args.iter().map(|a| eval(a, asg)?.num()).collect::<Option<Vec<_>>>()?;
            match f {
                AlgFn::Abs if vals.len() == 1 => match &vals[0] {
                    Num::Int(v) => Val::Num(Num::Int(v.checked_abs()?)),
                    Num::Rat(r) => Val::Num(Num::Rat(if *r < Ratio::zero() { -r } else { *r })),
                },
                AlgFn::Min | AlgFn::Max if !vals.is_empty() => {
                    let pick = vals.into_iter().reduce(|a, b| {
                        let less = a.cmp(&b) == std::cmp::Ordering::Less;
                        if less == (*f == AlgFn::Min) {
                            a
                        } else {
                            b
                        }
                    })?;
                    Val::Num(pick)
                }
                _ => return None,
            }
        }
        Code::Bin(op, l, r) => {
            // Connectives short-circuit so an undefined operand on the
            // unused side does not matter.
            match op {
                FlatOp::And | FlatOp::Or | FlatOp::Implies => {
                    let Val::Bool(a) = eval(l, asg)? else { return None };
                    let decided = match op {
                        FlatOp::And => (!a).then_some(false),
                        FlatOp::Or => a.then_some(true),
                        _ => (!a).then_some(true),
                    };
                    if let Some(v) = decided {
                        return Some(Val::Bool(v));
                    }
                    let Val::Bool(b) = eval(r, asg)? else { return None };
                    return Some(Val::Bool(b));
                }
                _ => {}
            }
            let a = eval(l, asg)?;
            let b = eval(r, asg)?;
            match op {
                FlatOp::Iff => match (a, b) {
                    (Val::Bool(a), Val::Bool(b)) => Val::Bool(a == b),
                    _ => return None,
                },
                FlatOp::Eq | FlatOp::Ne => {
                    let same = match (&a, &b) {
                        (Val::Set(x), Val::Set(y)) => x == y,
                        (Val::Bool(x), Val::Bool(y)) => x == y,
                        _ => a.num()?.cmp(&b.num()?) == std::cmp::Ordering::Equal,
                    };
                    Val::Bool(same == (*op == FlatOp::Eq))
                }
                FlatOp::Le | FlatOp::Ge | FlatOp::Lt | FlatOp::Gt => {
                    let ord = a.num()?.cmp(&b.num()?);
                    Val::Bool(match op {
                        FlatOp::Le => ord.is_le(),
                        FlatOp::Ge => ord.is_ge(),
                        FlatOp::Lt => ord.is_lt(),
                        _ => ord.is_gt(),
                    })
                }
                FlatOp::Union | FlatOp::Diff | FlatOp::Intersect => match (a, b) {
                    (Val::Set(x), Val::Set(y)) => Val::Set(match op {
                        FlatOp::Union => x.union(&y).copied().collect(),
                        FlatOp::Diff => x.difference(&y).copied().collect(),
                        _ => x.intersection(&y).copied().collect(),
                    }),
                    _ => return None,
                },
                _ => Val::Num(arith(*op, a.num()?, b.num()?)?),
            }
        }
    })
}

fn holds(c: &Code, asg: &[Val]) -> bool {
    matches!(eval(c, asg), Some(Val::Bool(true)))
}

// ----------------------------------------------------------------- search

/// Subsets of `lo..hi` by increasing size, then lexicographically.
fn subsets(lo: i64, hi: i64) -> Vec<BTreeSet<i64>> {
    let universe: Vec<i64> = (lo..=hi).collect();
    let n = universe.len();
    let mut out: Vec<Vec<i64>> = (0u32..(1 << n))
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).map(|i| universe[i]).collect())
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out.into_iter().map(|v| v.into_iter().collect()).collect()
}

fn domain_size(kind: &FlatVarKind) -> u128 {
    match kind {
        FlatVarKind::Bool => 2,
        FlatVarKind::Int(FlatDomain::Range(lo, hi)) => {
            if hi < lo {
                0
            } else {
                (*hi as i128 - *lo as i128 + 1) as u128
            }
        }
        FlatVarKind::Int(FlatDomain::Values(v)) => v.iter().collect::<BTreeSet<_>>().len() as u128,
        FlatVarKind::Set { lo, hi } => {
            if hi < lo {
                1
            } else {
                1u128 << (*hi as i128 - *lo as i128 + 1).min(127)
            }
        }
    }
}

fn domain(kind: &FlatVarKind) -> Vec<Val> {
    match kind {
        FlatVarKind::Bool => vec![Val::Bool(false), Val::Bool(true)],
        FlatVarKind::Int(FlatDomain::Range(lo, hi)) => (*lo..=*hi).map(|v| Val::Num(Num::Int(v as i128))).collect(),
        FlatVarKind::Int(FlatDomain::Values(v)) => v
            .iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(|v| Val::Num(Num::Int(*v as i128)))
            .collect(),
        FlatVarKind::Set { lo, hi } => {
            if hi < lo {
                vec![Val::Set(BTreeSet::new())]
            } else {
                subsets(*lo, *hi).into_iter().map(Val::Set).collect()
            }
        }
    }
}

struct Search<'a> {
    domains: Vec<Vec<Val>>,
    /// Constraints to check once variable `i` is assigned.
    checks: Vec<Vec<&'a Code>>,
    limits: Limits,
    nodes: u64,
    found: Vec<Vec<Val>>,
    stopped: bool,
}

impl Search<'_> {
    fn run(&mut self, depth: usize, asg: &mut Vec<Val>) {
        if depth == self.domains.len() {
            if self.found.len() >= self.limits.max_solutions {
                self.stopped = true;
            } else {
                self.found.push(asg.clone());
            }
            return;
        }
        for k in 0..self.domains[depth].len() {
            self.nodes += 1;
            if self.nodes > self.limits.max_nodes {
                self.stopped = true;
            }
            if self.stopped {
                return;
            }
            asg[depth] = self.domains[depth][k].clone();
            if self.checks[depth].iter().all(|c| holds(c, asg)) {
                self.run(depth + 1, asg);
            }
        }
    }
}

/// Every assignment of `p`'s variables satisfying all its constraints.
pub fn enumerate(p: &FlatProgram, limits: Limits) -> Result<SolutionSet, OracleError> {
    let index: BTreeMap<&str, usize> = p.vars.iter().enumerate().map(|(i, v)| (v.name.as_str(), i)).collect();
    let code = p.constraints.iter().map(|c| compile(c, &index)).collect::<Result<Vec<_>, _>>()?;
    for v in &p.vars {
        if let FlatVarKind::Set { lo, hi } = v.kind {
            let size = (hi as i128 - lo as i128 + 1).max(0);
            if size > MAX_SET_UNIVERSE as i128 {
                return Err(OracleError::UniverseTooLarge {
                    name: v.name.clone(),
                    size: size as i64,
                });
            }
        }
        let size = domain_size(&v.kind);
        if size > MAX_DOMAIN {
            return Err(OracleError::SearchSpaceTooLarge { size: format!("more than {}", MAX_DOMAIN) });
        }
    }
    let variables: Vec<String> = p.vars.iter().map(|v| v.name.clone()).collect();
    let mut domains: Vec<Vec<Val>> = p.vars.iter().map(|v| domain(&v.kind)).collect();

    // Ground constraints decide everything; single-variable ones prune.
    let mut checks: Vec<Vec<&Code>> = vec![Vec::new(); p.vars.len()];
    let empty = || SolutionSet {
        variables: variables.clone(),
        solutions: vec![],
        complete: true,
    };
    for (c, e) in code.iter().zip(&p.constraints) {
        let vars: Vec<usize> = e.variables().iter().map(|n| index[n]).collect();
        match vars.iter().max() {
            None => {
                if !holds(c, &[]) {
                    return Ok(empty());
                }
            }
            Some(&last) if vars.len() == 1 => {
                let mut asg: Vec<Val> = p.vars.iter().map(|_| Val::Bool(false)).collect();
                domains[last].retain(|v| {
                    asg[last] = v.clone();
                    holds(c, &asg)
                });
            }
            Some(&last) => checks[last].push(c),
        }
    }
    let mut space: u128 = 1;
    for d in &domains {
        space = space.saturating_mul(d.len() as u128);
    }
    if space > MAX_SEARCH_SPACE {
        return Err(OracleError::SearchSpaceTooLarge { size: space.to_string() });
    }
    if p.vars.is_empty() {
        return Ok(SolutionSet {
            variables,
            solutions: vec![Assignment::new()],
            complete: true,
        });
    }

    let mut search = Search {
        domains,
        checks,
        limits,
        nodes: 0,
        found: Vec::new(),
        stopped: false,
    };
    let mut asg: Vec<Val> = p.vars.iter().map(|_| Val::Bool(false)).collect();
    search.run(0, &mut asg);
    let mut solutions: Vec<Assignment> = search
        .found
        .iter()
        .map(|vals| variables.iter().cloned().zip(vals.iter().map(Val::public)).collect())
        .collect();
    solutions.sort();
    solutions.dedup();
    Ok(SolutionSet {
        variables,
        solutions,
        complete: !search.stopped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(text: &str) -> SolutionSet {
        enumerate(&parse_flat(text).unwrap(), Limits::default()).unwrap()
    }

    fn ints(s: &SolutionSet) -> Vec<Vec<i64>> {
        s.solutions
            .iter()
            .map(|a| {
                s.variables
                    .iter()
                    .map(|v| match &a[v] {
                        OracleValue::Int(i) => *i,
                        other => panic!("{:?}", other),
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn two_variables_disequal() {
        let s = solve("var int x in 1..2;\nvar int y in 1..2;\nconstraint x != y;\n");
        assert_eq!(ints(&s), vec![vec![1, 2], vec![2, 1]]);
        assert!(s.complete);
    }

    #[test]
    fn unsatisfiable_is_empty_and_complete() {
        let s = solve("var int x in 1..3;\nconstraint x = 1;\nconstraint x = 2;\n");
        assert!(s.is_empty() && s.complete);
    }

    #[test]
    fn division_is_exact() {
        let s = solve("var int x in 1..6;\nconstraint x / 4 * 4 = x;\n");
        assert_eq!(s.len(), 6);
        let s = solve("var int x in 1..6;\nconstraint x / 4 = 1 / 2;\n");
        assert_eq!(ints(&s), vec![vec![2]]);
        let s = solve("var int x in 0..2;\nconstraint 1 / x >= 1;\n");
        assert_eq!(ints(&s), vec![vec![1]]);
    }

    #[test]
    fn sets_by_size_then_lexicographic() {
        let s = solve("var set of 1..3 s;\nconstraint card(s) <= 3;\n");
        let order: Vec<String> = s.solutions.iter().map(|a| a["s"].to_string()).collect();
        assert_eq!(order.len(), 8);
        let sets = subsets(1, 3);
        let text: Vec<String> = sets.iter().map(|x| OracleValue::Set(x.clone()).to_string()).collect();
        assert_eq!(text, vec!["{}", "{1}", "{2}", "{3}", "{1, 2}", "{1, 3}", "{2, 3}", "{1, 2, 3}"]);
    }

    #[test]
    fn card_filters_sets_eagerly() {
        let s = solve("var set of 1..9 a;\nvar set of 1..9 b;\nconstraint card(a) = 3;\nconstraint card(b) = 3;\nconstraint card(a intersect b) = 0;\n");
        assert_eq!(s.len(), 84 * 20);
    }

    #[test]
    fn limits() {
        let p = parse_flat("var int x in 1..10;\nvar int y in 1..10;\n").unwrap();
        let s = enumerate(&p, Limits { max_solutions: 5, max_nodes: 1000 }).unwrap();
        assert!(!s.complete);
        assert_eq!(s.len(), 5);
        let s = enumerate(&p, Limits { max_solutions: 100, max_nodes: 1000 }).unwrap();
        assert!(s.complete);
        let s = enumerate(&p, Limits { max_solutions: 1000, max_nodes: 20 }).unwrap();
        assert!(!s.complete);
        let big = parse_flat("var int a in 1..1000;\nvar int b in 1..1000;\nvar int c in 1..1000;\nvar int d in 1..1000;\nvar int e in 1..1000;\n").unwrap();
        assert!(matches!(enumerate(&big, Limits::default()), Err(OracleError::SearchSpaceTooLarge { .. })));
        let wide = parse_flat("var set of 1..13 s;\n").unwrap();
        assert!(matches!(enumerate(&wide, Limits::default()), Err(OracleError::UniverseTooLarge { .. })));
    }

    #[test]
    fn comparisons_and_projection() {
        let perm = solve("var int x in 1..3;\nvar int y in 1..3;\nvar int z in 1..3;\nconstraint x != y;\nconstraint x != z;\nconstraint y != z;\n");
        let sum = solve("var int x in 1..3;\nvar int y in 1..3;\nvar int z in 1..3;\nconstraint x + y + z = 6;\n");
        assert_eq!(perm.len(), 6);
        assert_eq!(sum.len(), 7);
        let all = ["x", "y", "z"];
        assert_eq!(compare_solutions(&perm, &sum, &all).unwrap(), Comparison::Subset);
        assert_eq!(compare_solutions(&sum, &perm, &all).unwrap(), Comparison::Superset);
        assert_eq!(compare_solutions(&sum, &sum, &all).unwrap(), Comparison::Equal);
        assert_eq!(perm.project(&all).unwrap(), perm);
        assert_eq!(perm.project(&["x"]).unwrap().len(), 3);
        assert!(matches!(perm.project(&["w"]), Err(OracleError::UnknownVariable(_))));
        let partial = SolutionSet { complete: false, ..perm.clone() };
        assert_eq!(compare_solutions(&partial, &perm, &all), Err(OracleError::IncompleteSolutionSet));
    }

    #[test]
    fn empty_program_has_one_empty_solution() {
        let s = solve("");
        assert_eq!(s.solutions, vec![Assignment::new()]);
    }
}
