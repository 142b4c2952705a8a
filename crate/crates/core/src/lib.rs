//! Constraint model compiler built around a language-independent pivot
//! model: parse, rewrite, emit, and check rewrites by brute-force
//! enumeration.

pub mod backend;
pub mod cli;
pub mod diagnostics;
pub mod frontend;
pub mod oracle;
pub mod passes;
pub mod pivot;
