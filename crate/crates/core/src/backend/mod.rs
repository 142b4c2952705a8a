//! Code generators for the two targets: a structured CLP program that keeps
//! loops, and a flat list of scalar constraints.

pub mod clp;
pub mod flat;

pub use clp::{emit_clp, ClpEmitOptions, ClpError};
pub use flat::{emit_flat, lower_to_flat, FlatDomain, FlatError, FlatExpr, FlatOp, FlatProgram, FlatVar, FlatVarKind};
