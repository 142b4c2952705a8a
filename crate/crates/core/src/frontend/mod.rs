//! Parser for the object-oriented source language: an optional data file
//! followed by a model file, producing an unresolved pivot [`Model`].

mod lexer;
mod parser;

use crate::diagnostics::{Diagnostic, SourceKind, Span};
use crate::pivot::{Classifier, Expr, Model, ModelElement};
use parser::{Parser, MAX_DIAGNOSTICS};

const KEYWORDS: &[&str] = &[
    "model", "enum", "int", "real", "bool", "set", "main", "class", "constraint", "forall", "in",
    "if", "else", "iff", "implies", "or", "and", "not", "true", "false", "card", "intersect",
    "union", "diff",
];

/// Reserved words, which cannot be used as identifiers.
pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

/// Source texts of one model.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SourceUnit {
    pub data: Option<String>,
    pub model: String,
}

impl SourceUnit {
    pub fn new(data: Option<String>, model: impl Into<String>) -> Self {
        SourceUnit {
            data,
            model: model.into(),
        }
    }

    /// A model file without a data file.
    pub fn model(text: impl Into<String>) -> Self {
        SourceUnit::new(None, text)
    }
}

/// Parses a source unit. Data-file declarations come first in the result.
/// The model name is taken from a `model NAME;` header, else from the main
/// class, else defaults to `Model`.
pub fn parse(src: &SourceUnit) -> Result<Model, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let blank = |t: &str| t.trim().is_empty();
    if blank(&src.model) && src.data.as_deref().is_none_or(blank) {
        diags.push(Diagnostic::error(
            Span::new(SourceKind::Model, 1, 1),
            "the source text is empty",
        ));
        return Err(diags);
    }
    let mut header = None;
    let mut elements = Vec::new();
    let files = [
        (src.data.as_deref(), SourceKind::Data),
        (Some(src.model.as_str()), SourceKind::Model),
    ];
    for (text, kind) in files {
        let Some(text) = text else { continue };
        let toks = lexer::lex(text, kind, &mut diags);
        if diags.len() >= MAX_DIAGNOSTICS {
            break;
        }
        let items = Parser::new(toks, &mut diags).file();
        header = items.header.or(header);
        elements.extend(items.elements);
    }
    if !diags.is_empty() {
        diags.truncate(MAX_DIAGNOSTICS);
        return Err(diags);
    }
    let name = header
        .or_else(|| {
            elements.iter().find_map(|e| match e {
                ModelElement::Classifier(Classifier::Class(c)) if c.is_main => Some(c.name.clone()),
                _ => None,
            })
        })
        .unwrap_or_else(|| "Model".to_string());
    Ok(Model { name, elements })
}

/// Parses raw bytes, reporting invalid UTF-8 as a diagnostic.
pub fn parse_bytes(data: Option<&[u8]>, model: &[u8]) -> Result<Model, Vec<Diagnostic>> {
    let decode = |bytes: &[u8], kind| {
        std::str::from_utf8(bytes).map(str::to_owned).map_err(|e| {
            let valid = &bytes[..e.valid_up_to()];
            let line = 1 + valid.iter().filter(|&&b| b == b'\n').count() as u32;
            let column = 1 + valid.iter().rev().take_while(|&&b| b != b'\n').count() as u32;
            vec![Diagnostic::error(Span::new(kind, line, column), "input is not valid UTF-8")]
        })
    };
    let data = data.map(|d| decode(d, SourceKind::Data)).transpose()?;
    let model = decode(model, SourceKind::Model)?;
    parse(&SourceUnit::new(data, model))
}

/// Parses a standalone expression with the model grammar's precedence.
pub fn parse_expression(text: &str) -> Result<Expr, Diagnostic> {
    let mut diags = Vec::new();
    let toks = lexer::lex(text, SourceKind::Expr, &mut diags);
    let result = if diags.is_empty() {
        let mut p = Parser::new(toks, &mut diags);
        p.expr().and_then(|e| p.finish().map(|_| e)).ok()
    } else {
        None
    };
    match (result, diags.into_iter().next()) {
        (Some(e), None) => Ok(e),
        (_, Some(d)) => Err(d),
        (None, None) => Err(Diagnostic::error(Span::new(SourceKind::Expr, 1, 1), "invalid expression")),
    }
}
