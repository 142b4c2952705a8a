//! Source locations and user-facing diagnostics.

use std::fmt;
use std::hash::{Hash, Hasher};

/// Which input text a location points into.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SourceKind {
    Data,
    #[default]
    Model,
    /// A standalone expression (`eval`, tests).
    Expr,
    /// Element created by a pass rather than parsed.
    Generated,
}

/// A line/column position. Spans never take part in model equality: two
/// spans always compare equal, so structurally identical models parsed from
/// differently laid-out text are equal.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub source: SourceKind,
    pub line: u32,
    pub column: u32,
}

impl Span {
    pub fn new(source: SourceKind, line: u32, column: u32) -> Self {
        Span {
            source,
            line,
            column,
        }
    }

    pub fn generated() -> Self {
        Span {
            source: SourceKind::Generated,
            line: 0,
            column: 0,
        }
    }
}

impl PartialEq for Span {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

impl Hash for Span {
    fn hash<H: Hasher>(&self, _state: &mut H) {}
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn error(span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            message: message.into(),
            span,
        }
    }

    pub fn warning(span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            message: message.into(),
            span,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// Render as `file:line:col: severity: message`.
    pub fn render(&self, file: &str) -> String {
        format!(
            "{}:{}:{}: {}: {}",
            file,
            self.span.line.max(1),
            self.span.column.max(1),
            self.severity,
            self.message
        )
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.span, self.severity, self.message)
    }
}
