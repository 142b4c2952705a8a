use crate::diagnostics::{Diagnostic, SourceKind, Span};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Real(f64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Dot,
    DotDot,
    Assign,
    Eq,
    Ne,
    Le,
    Ge,
    Lt,
    Gt,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        let s = match self {
            Tok::Ident(n) => return format!("`{}`", n),
            Tok::Int(v) => return format!("integer `{}`", v),
            Tok::Real(v) => return format!("real `{:?}`", v),
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Dot => ".",
            Tok::DotDot => "..",
            Tok::Assign => ":=",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Caret => "^",
            Tok::Eof => return "end of input".to_string(),
        };
        format!("`{}`", s)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

/// Splits `text` into tokens. Lexical errors are reported and the offending
/// character skipped; the token stream always ends with `Eof`.
pub(crate) fn lex(text: &str, source: SourceKind, diags: &mut Vec<Diagnostic>) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let at = |i: usize| chars.get(i).copied();
    while i < chars.len() {
        let c = chars[i];
        let span = Span::new(source, line, col);
        let start = i;
        let simple = |t: Tok, n: usize| Some((t, n));
        let found = match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => None,
            '/' if at(i + 1) == Some('/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                    col += 1;
                }
                continue;
            }
            '{' => simple(Tok::LBrace, 1),
            '}' => simple(Tok::RBrace, 1),
            '(' => simple(Tok::LParen, 1),
            ')' => simple(Tok::RParen, 1),
            '[' => simple(Tok::LBracket, 1),
            ']' => simple(Tok::RBracket, 1),
            ',' => simple(Tok::Comma, 1),
            ';' => simple(Tok::Semi, 1),
            '.' if at(i + 1) == Some('.') => simple(Tok::DotDot, 2),
            '.' => simple(Tok::Dot, 1),
            ':' if at(i + 1) == Some('=') => simple(Tok::Assign, 2),
            '=' => simple(Tok::Eq, 1),
            '!' if at(i + 1) == Some('=') => simple(Tok::Ne, 2),
            '<' if at(i + 1) == Some('=') => simple(Tok::Le, 2),
            '>' if at(i + 1) == Some('=') => simple(Tok::Ge, 2),
            '<' => simple(Tok::Lt, 1),
            '>' => simple(Tok::Gt, 1),
            '\u{2260}' => simple(Tok::Ne, 1),
            '\u{2264}' => simple(Tok::Le, 1),
            '\u{2265}' => simple(Tok::Ge, 1),
            '+' => simple(Tok::Plus, 1),
            '-' => simple(Tok::Minus, 1),
            '*' => simple(Tok::Star, 1),
            '/' => simple(Tok::Slash, 1),
            '^' => simple(Tok::Caret, 1),
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                Some((Tok::Ident(word), j - i))
            }
            c if c.is_ascii_digit() => {
                let (tok, n) = number(&chars[i..], span, diags);
                Some((tok, n))
            }
            other => {
                diags.push(Diagnostic::error(span, format!("unexpected character `{}`", other.escape_debug())));
                None
            }
        };
        match found {
            Some((tok, n)) => {
                out.push(Token { tok, span });
                i += n;
            }
            None => i += 1,
        }
        col += (i - start) as u32;
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(source, line, col),
    });
    out
}

/// Lexes a numeric literal at the start of `s`. `1..3` is an integer
/// followed by `..`, never a real.
fn number(s: &[char], span: Span, diags: &mut Vec<Diagnostic>) -> (Tok, usize) {
    let digits = |from: usize| (from..s.len()).take_while(|&k| s[k].is_ascii_digit()).count();
    let mut n = digits(0);
    let mut is_real = false;
    if s.get(n) == Some(&'.') && s.get(n + 1).is_some_and(|c| c.is_ascii_digit()) {
        n += 1 + digits(n + 1);
        is_real = true;
    }
    if matches!(s.get(n), Some('e' | 'E')) {
        let sign = usize::from(matches!(s.get(n + 1), Some('+' | '-')));
        if s.get(n + 1 + sign).is_some_and(|c| c.is_ascii_digit()) {
            n += 1 + sign + digits(n + 1 + sign);
            is_real = true;
        }
    }
    let text: String = s[..n].iter().collect();
    if is_real {
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => (Tok::Real(v), n),
            _ => {
                diags.push(Diagnostic::error(span, format!("real literal `{}` is out of range", text)));
                (Tok::Real(0.0), n)
            }
        }
    } else {
        match text.parse::<i64>() {
            Ok(v) => (Tok::Int(v), n),
            Err(_) => {
                diags.push(Diagnostic::error(span, format!("integer literal `{}` is out of range", text)));
                (Tok::Int(0), n)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(text: &str) -> Vec<Tok> {
        let mut d = Vec::new();
        let t = lex(text, SourceKind::Model, &mut d);
        assert!(d.is_empty(), "{:?}", d);
        t.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn ranges_are_not_reals() {
        assert_eq!(toks("1..3"), vec![Tok::Int(1), Tok::DotDot, Tok::Int(3), Tok::Eof]);
        assert_eq!(toks("1.5e3 2E-2"), vec![Tok::Real(1500.0), Tok::Real(0.02), Tok::Eof]);
    }

    #[test]
    fn comments_and_positions() {
        let mut d = Vec::new();
        let t = lex("// note\n  x := 3;", SourceKind::Model, &mut d);
        assert_eq!(t[0].tok, Tok::Ident("x".into()));
        assert_eq!((t[0].span.line, t[0].span.column), (2, 3));
        assert_eq!(t[1].tok, Tok::Assign);
    }

    #[test]
    fn unicode_comparisons() {
        assert_eq!(toks("\u{2260}\u{2264}\u{2265}"), vec![Tok::Ne, Tok::Le, Tok::Ge, Tok::Eof]);
    }

    #[test]
    fn bad_characters_are_reported() {
        let mut d = Vec::new();
        lex("x # y\n@", SourceKind::Model, &mut d);
        assert_eq!(d.len(), 2);
        assert_eq!((d[1].span.line, d[1].span.column), (2, 1));
    }

    #[test]
    fn oversized_integer() {
        let mut d = Vec::new();
        lex("99999999999999999999", SourceKind::Model, &mut d);
        assert_eq!(d.len(), 1);
    }
}
