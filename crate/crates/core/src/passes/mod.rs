//! Semantics-preserving rewrites over pivot models.
//!
//! Every pass is a pure function from a resolved model to a new resolved
//! model. [`run_pipeline`] applies a [`PassConfig`] and collects one
//! [`PassReport`] per pass.

mod alldiff;
mod enums;
mod flatten;
mod fold;
mod unroll;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::diagnostics::{Diagnostic, Span};
use crate::pivot::{resolve, validate, ConstEnv, EvalError, Expr, Model, ResolveError};

pub use alldiff::{alldiff_to_boolean, alldiff_to_disequalities, alldiff_to_relaxation, BooleanEncoding};
pub(crate) use fold::constant_env;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PassId {
    ObjectFlatten,
    EnumRemove,
    AlldiffRewrite,
    LoopUnroll,
    FoldConstants,
}

impl PassId {
    pub const ALL: [PassId; 5] = [
        PassId::ObjectFlatten,
        PassId::EnumRemove,
        PassId::AlldiffRewrite,
        PassId::LoopUnroll,
        PassId::FoldConstants,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PassId::ObjectFlatten => "objectFlatten",
            PassId::EnumRemove => "enumRemove",
            PassId::AlldiffRewrite => "alldiffRewrite",
            PassId::LoopUnroll => "loopUnroll",
            PassId::FoldConstants => "foldConstants",
        }
    }
}

impl fmt::Display for PassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PassId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        PassId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown pass `{}`", s))
    }
}

/// How `alldifferent` constraints are rewritten.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum AlldiffMode {
    #[default]
    Disequalities,
    Relaxation,
    Boolean,
}

impl AlldiffMode {
    pub fn name(self) -> &'static str {
        match self {
            AlldiffMode::Disequalities => "disequalities",
            AlldiffMode::Relaxation => "relaxation",
            AlldiffMode::Boolean => "boolean",
        }
    }
}

impl fmt::Display for AlldiffMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlldiffMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [AlldiffMode::Disequalities, AlldiffMode::Relaxation, AlldiffMode::Boolean]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown alldifferent mode `{}`", s))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PassConfig {
    pub passes: Vec<PassId>,
    pub alldiff_mode: AlldiffMode,
    /// Run `loopUnroll` last if the pass list does not already contain it.
    pub unroll: bool,
}

impl PassConfig {
    pub fn new(passes: Vec<PassId>, alldiff_mode: AlldiffMode, unroll: bool) -> Result<Self, PassError> {
        let cfg = PassConfig {
            passes,
            alldiff_mode,
            unroll,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<(), PassError> {
        for (i, p) in self.passes.iter().enumerate() {
            if self.passes[..i].contains(p) {
                return Err(PassError::DuplicatePass(*p));
            }
        }
        Ok(())
    }

    /// The passes actually run, in order.
    pub fn effective_passes(&self) -> Vec<PassId> {
        let mut passes = self.passes.clone();
        if self.unroll && !passes.contains(&PassId::LoopUnroll) {
            passes.push(PassId::LoopUnroll);
        }
        passes
    }

    pub fn unrolls(&self) -> bool {
        self.effective_passes().contains(&PassId::LoopUnroll)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PassReport {
    pub pass: PassId,
    pub elements_before: usize,
    pub elements_after: usize,
    pub rewrites_applied: usize,
}

impl fmt::Display for PassReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} -> {} elements, {} rewrites",
            self.pass, self.elements_before, self.elements_after, self.rewrites_applied
        )
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum PassError {
    #[error("pass `{0}` appears more than once")]
    DuplicatePass(PassId),
    #[error("the input model is invalid")]
    Invalid(Vec<Diagnostic>),
    #[error("{pass} cannot run: {message}")]
    Precondition { pass: PassId, message: String, span: Span },
    #[error("cyclic composition between classes `{0}` and `{1}`")]
    CyclicComposition(String, String),
    #[error("flattened name `{name}` is already in use")]
    NameCollision { name: String, span: Span },
    #[error("`{0}` is not an alldifferent constraint")]
    NotAlldifferent(String),
    #[error("`{param}` must have domain {expected}")]
    DomainAssumptionViolated { param: String, expected: String, span: Span },
    #[error("alldifferent parameter `{param}` is not a variable occurrence")]
    NonVariableParam { param: String, span: Span },
    #[error("alldifferent parameters have different domains")]
    HeterogeneousDomains { span: Span },
    #[error("loop bounds are not constant")]
    NonGroundBound { span: Span },
    #[error("if condition is not constant")]
    NonGroundCondition { span: Span },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("rewritten model does not resolve")]
    Resolve(Vec<ResolveError>),
}

impl PassError {
    pub fn span(&self) -> Span {
        match self {
            PassError::Precondition { span, .. }
            | PassError::NameCollision { span, .. }
            | PassError::DomainAssumptionViolated { span, .. }
            | PassError::NonVariableParam { span, .. }
            | PassError::HeterogeneousDomains { span }
            | PassError::NonGroundBound { span }
            | PassError::NonGroundCondition { span } => *span,
            PassError::Eval(e) => e.span(),
            _ => Span::default(),
        }
    }

    pub fn to_diagnostics(&self) -> Vec<Diagnostic> {
        match self {
            PassError::Invalid(d) => d.clone(),
            PassError::Resolve(errs) => errs.iter().map(ResolveError::to_diagnostic).collect(),
            other => vec![Diagnostic::error(other.span(), other.to_string())],
        }
    }
}

impl From<Vec<ResolveError>> for PassError {
    fn from(e: Vec<ResolveError>) -> Self {
        PassError::Resolve(e)
    }
}

/// Result of one pass application.
pub(crate) struct PassOutput {
    pub model: Model,
    pub rewrites: usize,
}

fn require_class_free(m: &Model, pass: PassId) -> Result<(), PassError> {
    match m.classes().next() {
        Some(c) => Err(PassError::Precondition {
            pass,
            message: format!("class `{}` must be flattened first", c.name),
            span: c.span,
        }),
        None => Ok(()),
    }
}

fn apply(pass: PassId, m: &Model, mode: AlldiffMode) -> Result<PassOutput, PassError> {
    let m = resolve(m)?;
    let out = match pass {
        PassId::ObjectFlatten => flatten::run(&m)?,
        PassId::EnumRemove => {
            require_class_free(&m, pass)?;
            enums::run(&m)?
        }
        PassId::AlldiffRewrite => {
            require_class_free(&m, pass)?;
            alldiff::run(&m, mode)?
        }
        PassId::LoopUnroll => {
            require_class_free(&m, pass)?;
            unroll::run(&m)?
        }
        PassId::FoldConstants => fold::run(&m)?,
    };
    Ok(PassOutput {
        model: resolve(&out.model)?,
        rewrites: out.rewrites,
    })
}

/// Replaces class-typed variables by prefixed copies of their features.
pub fn object_flatten(m: &Model) -> Result<Model, PassError> {
    apply(PassId::ObjectFlatten, m, AlldiffMode::default()).map(|o| o.model)
}

/// Maps enumeration literals to their 1-based positions.
pub fn enum_remove(m: &Model) -> Result<Model, PassError> {
    apply(PassId::EnumRemove, m, AlldiffMode::default()).map(|o| o.model)
}

pub fn alldiff_rewrite(m: &Model, mode: AlldiffMode) -> Result<Model, PassError> {
    apply(PassId::AlldiffRewrite, m, mode).map(|o| o.model)
}

/// Expands every loop and conditional.
pub fn loop_unroll(m: &Model) -> Result<Model, PassError> {
    apply(PassId::LoopUnroll, m, AlldiffMode::default()).map(|o| o.model)
}

pub fn fold_constants(m: &Model) -> Result<Model, PassError> {
    apply(PassId::FoldConstants, m, AlldiffMode::default()).map(|o| o.model)
}

/// Folds a standalone expression: literal subexpressions are evaluated and
/// arithmetic identities removed.
pub fn fold_expression(e: &Expr) -> Result<Expr, EvalError> {
    let env = ConstEnv::new();
    fold::Folder::new(&env).expr(e)
}

/// Runs a single pass by id.
pub fn run_pass(m: &Model, pass: PassId, mode: AlldiffMode) -> Result<Model, PassError> {
    apply(pass, m, mode).map(|o| o.model)
}

/// Failure of a pipeline: the error plus the reports of passes that ran.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineError {
    pub error: PassError,
    pub reports: Vec<PassReport>,
}

/// Validates `m`, then applies the configured passes in order. The first
/// failing pass aborts the pipeline.
pub fn run_pipeline(m: &Model, cfg: &PassConfig) -> Result<(Model, Vec<PassReport>), PipelineError> {
    let fail = |error, reports| PipelineError { error, reports };
    cfg.check().map_err(|e| fail(e, vec![]))?;
    let mut model = resolve(m).map_err(|e| fail(e.into(), vec![]))?;
    let diags = validate(&model);
    if diags.iter().any(Diagnostic::is_error) {
        return Err(fail(PassError::Invalid(diags), vec![]));
    }
    let mut reports = Vec::new();
    for pass in cfg.effective_passes() {
        let before = model.element_count();
        match apply(pass, &model, cfg.alldiff_mode) {
            Ok(out) => {
                reports.push(PassReport {
                    pass,
                    elements_before: before,
                    elements_after: out.model.element_count(),
                    rewrites_applied: out.rewrites,
                });
                model = out.model;
            }
            Err(e) => return Err(fail(e, reports)),
        }
    }
    Ok((model, reports))
}
