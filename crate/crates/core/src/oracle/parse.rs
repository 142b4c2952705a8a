use std::collections::HashSet;

use crate::backend::{FlatDomain, FlatExpr, FlatOp, FlatProgram, FlatVar, FlatVarKind};
use crate::frontend::{is_keyword, parse_expression};
use crate::pivot::*;

use super::OracleError;

fn syntax(line: usize, column: usize, message: impl Into<String>) -> OracleError {
    OracleError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Cursor over one declaration line.
struct Line<'a> {
    text: &'a str,
    pos: usize,
    number: usize,
}

impl<'a> Line<'a> {
    fn skip_ws(&mut self) {
        while self.text[self.pos..].starts_with([' ', '\t']) {
            self.pos += 1;
        }
    }

    fn err(&self, message: impl Into<String>) -> OracleError {
        syntax(self.number, self.pos + 1, message)
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), OracleError> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{}`", s)))
        }
    }

    fn word(&mut self) -> Result<&'a str, OracleError> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest
            .char_indices()
            .find(|(i, c)| !(c.is_ascii_alphanumeric() || *c == '_') || (*i == 0 && c.is_ascii_digit()))
            .map_or(rest.len(), |(i, _)| i);
        if len == 0 {
            return Err(self.err("expected a name"));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn keyword(&mut self, kw: &str) -> Result<(), OracleError> {
        let start = self.pos;
        match self.word() {
            Ok(w) if w == kw => Ok(()),
            _ => {
                self.pos = start;
                self.skip_ws();
                Err(self.err(format!("expected `{}`", kw)))
            }
        }
    }

    fn name(&mut self) -> Result<String, OracleError> {
        let w = self.word()?;
        if is_keyword(w) {
            self.pos -= w.len();
            return Err(self.err(format!("`{}` is a keyword", w)));
        }
        Ok(w.to_string())
    }

    fn int(&mut self) -> Result<i64, OracleError> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let neg = rest.starts_with('-');
        let digits = rest[neg as usize..].chars().take_while(|c| c.is_ascii_digit()).count();
        if digits == 0 {
            return Err(self.err("expected an integer"));
        }
        let len = neg as usize + digits;
        let v = rest[..len].parse().map_err(|_| self.err("integer out of range"))?;
        self.pos += len;
        Ok(v)
    }

    fn range(&mut self) -> Result<(i64, i64), OracleError> {
        let lo = self.int()?;
        self.expect("..")?;
        Ok((lo, self.int()?))
    }

    fn end(&mut self) -> Result<(), OracleError> {
        self.expect(";")?;
        self.skip_ws();
        if self.pos < self.text.len() {
            return Err(self.err("unexpected text after `;`"));
        }
        Ok(())
    }
}

fn declaration(line: &mut Line<'_>) -> Result<FlatVar, OracleError> {
    let start = line.pos;
    line.skip_ws();
    let kind = line.word().map_err(|_| line.err("expected a variable kind"))?;
    match kind {
        "int" => {
            let name = line.name()?;
            line.keyword("in")?;
            let domain = if line.eat("{") {
                let mut vals = Vec::new();
                if !line.eat("}") {
                    loop {
                        vals.push(line.int()?);
                        if line.eat("}") {
                            break;
                        }
                        line.expect(",")?;
                    }
                }
                FlatDomain::Values(vals)
            } else {
                let (lo, hi) = line.range()?;
                FlatDomain::Range(lo, hi)
            };
            line.end()?;
            Ok(FlatVar {
                name,
                kind: FlatVarKind::Int(domain),
            })
        }
        "bool" => {
            let name = line.name()?;
            line.end()?;
            Ok(FlatVar {
                name,
                kind: FlatVarKind::Bool,
            })
        }
        "set" => {
            line.keyword("of")?;
            let (lo, hi) = line.range()?;
            let name = line.name()?;
            line.end()?;
            Ok(FlatVar {
                name,
                kind: FlatVarKind::Set { lo, hi },
            })
        }
        other => {
            line.pos = start;
            line.skip_ws();
            Err(line.err(format!("unknown variable kind `{}`", other)))
        }
    }
}

fn convert(e: &Expr, vars: &HashSet<String>) -> Result<FlatExpr, String> {
    let bin = |op, l: &Expr, r: &Expr| Ok(FlatExpr::bin(op, convert(l, vars)?, convert(r, vars)?));
    match &e.kind {
        ExprKind::Int(v) => Ok(FlatExpr::Int(*v)),
        ExprKind::Bool(b) => Ok(FlatExpr::Bool(*b)),
        ExprKind::Var(v) if v.indexes.is_empty() => {
            if vars.contains(&v.name) {
                Ok(FlatExpr::Var(v.name.clone()))
            } else {
                Err(format!("undeclared variable `{}`", v.name))
            }
        }
        ExprKind::Var(v) => Err(format!("indexed name `{}` in a flat model", v.name)),
        ExprKind::SetValue(items) => items
            .iter()
            .map(|i| match convert(i, vars)? {
                FlatExpr::Int(v) => Ok(v),
                _ => Err("set literals may only contain integers".to_string()),
            })
            .collect::<Result<_, _>>()
            .map(FlatExpr::Set),
        ExprKind::Not(x) => Ok(FlatExpr::Not(Box::new(convert(x, vars)?))),
        ExprKind::SetFunction(SetFn::Card, x) => Ok(FlatExpr::Card(Box::new(convert(x, vars)?))),
        ExprKind::AlgUnary(AlgUnaryOp::Neg, x) => Ok(FlatExpr::negate(convert(x, vars)?)),
        ExprKind::AlgUnary(AlgUnaryOp::Plus, x) => convert(x, vars),
        ExprKind::AlgFunction(f @ (AlgFn::Abs | AlgFn::Min | AlgFn::Max), args) => Ok(FlatExpr::Call(
            *f,
            args.iter().map(|a| convert(a, vars)).collect::<Result<_, _>>()?,
        )),
        ExprKind::BoolBinary(op, l, r) => bin(
            match op {
                BoolBinOp::Iff => FlatOp::Iff,
                BoolBinOp::Implies => FlatOp::Implies,
                BoolBinOp::And => FlatOp::And,
                BoolBinOp::Or => FlatOp::Or,
                BoolBinOp::Eq => FlatOp::Eq,
                BoolBinOp::Ne => FlatOp::Ne,
                BoolBinOp::Le => FlatOp::Le,
                BoolBinOp::Ge => FlatOp::Ge,
                BoolBinOp::Lt => FlatOp::Lt,
                BoolBinOp::Gt => FlatOp::Gt,
            },
            l,
            r,
        ),
        ExprKind::SetBinary(op, l, r) => bin(
            match op {
                SetBinOp::Intersect => FlatOp::Intersect,
                SetBinOp::Union => FlatOp::Union,
                SetBinOp::Diff => FlatOp::Diff,
            },
            l,
            r,
        ),
        ExprKind::AlgBinary(op, l, r) => bin(
            match op {
                AlgBinOp::Add => FlatOp::Add,
                AlgBinOp::Sub => FlatOp::Sub,
                AlgBinOp::Mul => FlatOp::Mul,
                AlgBinOp::Div => FlatOp::Div,
                AlgBinOp::Pow => FlatOp::Pow,
            },
            l,
            r,
        ),
        _ => Err("expression form not allowed in a flat model".to_string()),
    }
}

/// Reads the `.flat` format written by [`crate::backend::emit_flat`].
/// Blank lines and `//` comment lines are ignored.
pub fn parse_flat(text: &str) -> Result<FlatProgram, OracleError> {
    let mut prog = FlatProgram::default();
    let mut names = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with("//") {
            continue;
        }
        let indent = raw.len() - raw.trim_start().len();
        let mut line = Line {
            text: raw,
            pos: indent,
            number,
        };
        if line.keyword("var").is_ok() {
            if !prog.constraints.is_empty() {
                return Err(syntax(number, indent + 1, "declarations must precede constraints"));
            }
            let var = declaration(&mut line)?;
            if !names.insert(var.name.clone()) {
                return Err(syntax(number, indent + 1, format!("`{}` is declared twice", var.name)));
            }
            prog.vars.push(var);
        } else if line.keyword("constraint").is_ok() {
            let body_start = line.pos;
            let body = raw[body_start..].trim_end();
            let Some(body) = body.strip_suffix(';') else {
                return Err(syntax(number, raw.trim_end().len() + 1, "expected `;`"));
            };
            let expr = parse_expression(body).map_err(|d| {
                let col = if d.span.line <= 1 { body_start + d.span.column as usize } else { 1 };
                syntax(number, col, d.message)
            })?;
            let c = convert(&expr, &names).map_err(|m| syntax(number, body_start + 2, m))?;
            prog.constraints.push(c);
        } else {
            return Err(syntax(number, indent + 1, "expected `var` or `constraint`"));
        }
    }
    Ok(prog)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::emit_flat;

    #[test]
    fn empty_text_is_empty_program() {
        assert_eq!(parse_flat("").unwrap(), FlatProgram::default());
    }

    #[test]
    fn malformed_kind_reports_line_one() {
        match parse_flat("var intt x;") {
            Err(OracleError::Syntax { line, column, .. }) => assert_eq!((line, column), (1, 5)),
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_flat("var int x in 1..2;\n\nconstraint x = ;\n").unwrap_err();
        assert!(matches!(err, OracleError::Syntax { line: 3, .. }), "{:?}", err);
        let err = parse_flat("var int x in 1..2;\nconstraint y = 1;\n").unwrap_err();
        assert!(matches!(err, OracleError::Syntax { line: 2, .. }), "{:?}", err);
    }

    #[test]
    fn round_trip_all_forms() {
        let text = "var int x in -2..3;\nvar int y in {1, 4};\nvar bool b;\nvar set of 1..4 s;\n\
                    constraint x - -3 != y;\nconstraint b implies card(s intersect {1, 2}) = 1;\nconstraint abs(x) * 2 / 3 <= y^2;\n";
        let p = parse_flat(text).unwrap();
        assert_eq!(emit_flat(&p), text);
        assert_eq!(p.constraints[0], FlatExpr::bin(FlatOp::Ne, FlatExpr::bin(FlatOp::Sub, FlatExpr::Var("x".into()), FlatExpr::Int(-3)), FlatExpr::Var("y".into())));
    }
}
