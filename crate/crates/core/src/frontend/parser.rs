use super::lexer::{Tok, Token};
use super::is_keyword;
use crate::diagnostics::{Diagnostic, Span};
use crate::pivot::*;

pub(crate) const MAX_DIAGNOSTICS: usize = 20;
const MAX_DEPTH: usize = 64;

/// Marker for a reported syntax error; the diagnostic is already recorded.
pub(crate) struct Fail;

pub(crate) type PResult<T> = Result<T, Fail>;

/// Builds a binary node from its operands.
type Join = fn(Box<Expr>, Box<Expr>) -> ExprKind;

pub(crate) struct Parser<'d> {
    toks: Vec<Token>,
    pos: usize,
    depth: usize,
    pub(crate) diags: &'d mut Vec<Diagnostic>,
}

/// Items collected from one source file.
#[derive(Default)]
pub(crate) struct FileItems {
    pub header: Option<String>,
    pub elements: Vec<ModelElement>,
}

impl<'d> Parser<'d> {
    pub(crate) fn new(toks: Vec<Token>, diags: &'d mut Vec<Diagnostic>) -> Self {
        Parser {
            toks,
            pos: 0,
            depth: 0,
            diags,
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    fn too_many(&self) -> bool {
        self.diags.len() >= MAX_DIAGNOSTICS
    }

    fn fail<T>(&mut self, message: impl Into<String>) -> PResult<T> {
        let span = self.span();
        if !self.too_many() {
            self.diags.push(Diagnostic::error(span, message));
        }
        Err(Fail)
    }

    fn unexpected<T>(&mut self, wanted: &str) -> PResult<T> {
        let found = self.peek().describe();
        self.fail(format!("expected {}, found {}", wanted, found))
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(n) if n == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.unexpected(&format!("`{}`", kw))
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok) -> PResult<()> {
        if self.eat(t) {
            Ok(())
        } else {
            self.unexpected(&t.describe())
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(n) if !is_keyword(&n) => {
                let span = self.bump().span;
                Ok((n, span))
            }
            _ => self.unexpected("identifier"),
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            self.depth -= 1;
            return self.fail("nesting too deep");
        }
        Ok(())
    }

    fn leave(&mut self, n: usize) {
        self.depth -= n;
    }

    /// Skips to a point where parsing can resume: just past a `;` or
    /// before a `}` at the current nesting level. Always makes progress.
    fn recover(&mut self, start: usize) {
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Semi if depth == 0 => {
                    self.bump();
                    break;
                }
                Tok::RBrace if depth == 0 => {
                    if self.pos == start {
                        self.bump();
                    }
                    break;
                }
                Tok::LBrace | Tok::LParen | Tok::LBracket => depth += 1,
                Tok::RBrace | Tok::RParen | Tok::RBracket => depth = depth.saturating_sub(1),
                _ => {}
            }
            self.bump();
        }
    }

    // ---------------------------------------------------------------- files

    pub(crate) fn file(&mut self) -> FileItems {
        let mut items = FileItems::default();
        if self.is_kw("model") {
            let start = self.pos;
            self.bump();
            match self.ident().and_then(|(n, _)| self.expect(&Tok::Semi).map(|_| n)) {
                Ok(n) => items.header = Some(n),
                Err(Fail) => self.recover(start),
            }
        }
        while !self.at_eof() && !self.too_many() {
            let start = self.pos;
            match self.top_item() {
                Ok(e) => items.elements.push(e),
                Err(Fail) => self.recover(start),
            }
        }
        items
    }

    fn top_item(&mut self) -> PResult<ModelElement> {
        if self.is_kw("enum") {
            return self.enumeration();
        }
        if self.is_kw("main") || self.is_kw("class") {
            return self.class().map(|c| ModelElement::Classifier(Classifier::Class(c)));
        }
        if self.is_kw("model") {
            return self.fail("the model header must come first");
        }
        if *self.peek() == Tok::RBrace {
            return self.unexpected("a declaration");
        }
        self.feature().map(ModelElement::Feature)
    }

    fn enumeration(&mut self) -> PResult<ModelElement> {
        let span = self.span();
        self.expect_kw("enum")?;
        let (name, _) = self.ident()?;
        self.expect(&Tok::Assign)?;
        self.expect(&Tok::LBrace)?;
        let mut literals = Vec::new();
        if *self.peek() != Tok::RBrace {
            loop {
                literals.push(self.ident()?.0);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(&Tok::RBrace)?;
        self.expect(&Tok::Semi)?;
        Ok(ModelElement::Classifier(Classifier::Enumeration(Enumeration {
            name,
            literals,
            span,
        })))
    }

    fn class(&mut self) -> PResult<Class> {
        let span = self.span();
        let is_main = self.eat_kw("main");
        self.expect_kw("class")?;
        let (name, _) = self.ident()?;
        self.expect(&Tok::LBrace)?;
        let mut features = Vec::new();
        while *self.peek() != Tok::RBrace {
            if self.at_eof() || self.too_many() {
                return self.unexpected("`}`");
            }
            let start = self.pos;
            match self.feature() {
                Ok(f) => features.push(f),
                Err(Fail) => self.recover(start),
            }
        }
        self.bump();
        Ok(Class {
            name,
            features,
            is_main,
            span,
        })
    }

    fn feature(&mut self) -> PResult<ModelFeature> {
        if self.is_kw("constraint") {
            return self.zone().map(ModelFeature::Zone);
        }
        self.declaration()
    }

    fn zone(&mut self) -> PResult<ConstraintZone> {
        let span = self.span();
        self.expect_kw("constraint")?;
        let (name, _) = self.ident()?;
        let body = self.block()?;
        Ok(ConstraintZone { name, body, span })
    }

    fn declaration(&mut self) -> PResult<ModelFeature> {
        let span = self.span();
        let ty = match self.peek().clone() {
            Tok::Ident(n) if n == "int" || n == "real" || n == "bool" => {
                self.bump();
                TypeRef::Data(match n.as_str() {
                    "int" => DataType::Integer,
                    "real" => DataType::Real,
                    _ => DataType::Boolean,
                })
            }
            Tok::Ident(n) if !is_keyword(&n) => {
                self.bump();
                TypeRef::Unresolved(n)
            }
            _ => return self.unexpected("a declaration"),
        };
        let is_set = self.eat_kw("set");
        let (name, _) = self.ident()?;
        let mut dims = Vec::new();
        if self.eat(&Tok::LBracket) {
            dims = self.expr_list(&Tok::RBracket)?;
            if dims.is_empty() {
                return self.unexpected("an array size");
            }
        }
        let decl = TypedElement {
            name,
            ty,
            is_set,
            dims,
            span,
        };
        if self.eat(&Tok::Assign) {
            if decl.is_set || !decl.dims.is_empty() || !matches!(decl.ty, TypeRef::Data(_)) {
                return self.fail("constants must be scalars of type int, real or bool");
            }
            let value = self.expr()?;
            self.expect(&Tok::Semi)?;
            return Ok(ModelFeature::Constant(Constant { decl, value }));
        }
        let domain = if self.eat_kw("in") {
            Some(self.domain()?)
        } else {
            None
        };
        self.expect(&Tok::Semi)?;
        Ok(ModelFeature::Variable(Variable { decl, domain }))
    }

    fn domain(&mut self) -> PResult<Domain> {
        if *self.peek() == Tok::LBrace {
            self.bump();
            let members = self.expr_list(&Tok::RBrace)?;
            if *self.peek() != Tok::Semi {
                return self.unexpected("`;` after a set domain");
            }
            return Ok(Domain::Set { members });
        }
        let lo = self.expr()?;
        if self.eat(&Tok::DotDot) {
            let hi = self.expr()?;
            Ok(Domain::Interval { lo, hi })
        } else {
            Ok(Domain::Expr { expr: lo })
        }
    }

    // ----------------------------------------------------------- statements

    fn block(&mut self) -> PResult<Vec<Statement>> {
        self.expect(&Tok::LBrace)?;
        let mut body = Vec::new();
        // Errors inside the block are already recorded; returning the
        // partial body keeps recovery local to the failing statement.
        while *self.peek() != Tok::RBrace {
            if self.at_eof() || self.too_many() {
                return self.unexpected("`}`");
            }
            let start = self.pos;
            match self.statement() {
                Ok(s) => body.push(s),
                Err(Fail) => self.recover(start),
            }
        }
        self.bump();
        Ok(body)
    }

    fn statement(&mut self) -> PResult<Statement> {
        self.enter()?;
        let r = self.statement_inner();
        self.leave(1);
        r
    }

    fn statement_inner(&mut self) -> PResult<Statement> {
        let span = self.span();
        if self.eat_kw("forall") {
            self.expect(&Tok::LParen)?;
            let (var, _) = self.ident()?;
            self.expect_kw("in")?;
            let lower = self.expr()?;
            self.expect(&Tok::DotDot)?;
            let upper = self.expr()?;
            self.expect(&Tok::RParen)?;
            let body = if *self.peek() == Tok::LBrace {
                self.block()?
            } else {
                vec![self.statement()?]
            };
            return Ok(Statement::ForAll(ForAll {
                var,
                lower,
                upper,
                body,
                span,
            }));
        }
        if self.eat_kw("if") {
            self.expect(&Tok::LParen)?;
            let cond = self.expr()?;
            self.expect(&Tok::RParen)?;
            let then_body = self.block()?;
            let else_body = if self.eat_kw("else") {
                Some(self.block()?)
            } else {
                None
            };
            return Ok(Statement::If(IfStmt {
                cond,
                then_body,
                else_body,
                span,
            }));
        }
        let expr = self.expr()?;
        self.expect(&Tok::Semi)?;
        Ok(match expr.kind {
            // A bare call in statement position names a global constraint.
            ExprKind::FunctionCall { callee, args } => Statement::Global(GlobalCtr {
                name: callee,
                params: args,
                span,
            }),
            _ => Statement::Constraint(ExpressionConstraint { expr }),
        })
    }

    // ---------------------------------------------------------- expressions

    fn expr_list(&mut self, close: &Tok) -> PResult<Vec<Expr>> {
        let mut items = Vec::new();
        if self.peek() != close {
            loop {
                items.push(self.expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(close)?;
        Ok(items)
    }

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        self.enter()?;
        let r = self.iff();
        self.leave(1);
        r
    }

    pub(crate) fn finish(&mut self) -> PResult<()> {
        if self.at_eof() {
            Ok(())
        } else {
            self.unexpected("end of expression")
        }
    }

    /// Left-associative chain over `next`, with `op` mapping tokens to node
    /// builders.
    fn chain(
        &mut self,
        next: fn(&mut Self) -> PResult<Expr>,
        op: fn(&Tok) -> Option<Join>,
    ) -> PResult<Expr> {
        let mut left = next(self)?;
        let mut links = 0;
        let result = loop {
            let Some(build) = op(self.peek()) else {
                break Ok(left);
            };
            if let Err(f) = self.enter() {
                break Err(f);
            }
            links += 1;
            let span = self.bump().span;
            match next(self) {
                Ok(right) => left = Expr::new(build(Box::new(left), Box::new(right)), span),
                Err(f) => break Err(f),
            }
        };
        self.leave(links);
        result
    }

    fn iff(&mut self) -> PResult<Expr> {
        self.chain(Self::implies, |t| match t {
            Tok::Ident(n) if n == "iff" => Some(|l, r| ExprKind::BoolBinary(BoolBinOp::Iff, l, r)),
            _ => None,
        })
    }

    fn implies(&mut self) -> PResult<Expr> {
        let left = self.or()?;
        if self.is_kw("implies") {
            let span = self.bump().span;
            self.enter()?;
            let right = self.implies();
            self.leave(1);
            let right = right?;
            return Ok(Expr::new(
                ExprKind::BoolBinary(BoolBinOp::Implies, Box::new(left), Box::new(right)),
                span,
            ));
        }
        Ok(left)
    }

    fn or(&mut self) -> PResult<Expr> {
        self.chain(Self::and, |t| match t {
            Tok::Ident(n) if n == "or" => Some(|l, r| ExprKind::BoolBinary(BoolBinOp::Or, l, r)),
            _ => None,
        })
    }

    fn and(&mut self) -> PResult<Expr> {
        self.chain(Self::not, |t| match t {
            Tok::Ident(n) if n == "and" => Some(|l, r| ExprKind::BoolBinary(BoolBinOp::And, l, r)),
            _ => None,
        })
    }

    fn not(&mut self) -> PResult<Expr> {
        if self.is_kw("not") {
            let span = self.bump().span;
            self.enter()?;
            let inner = self.not();
            self.leave(1);
            return Ok(Expr::new(ExprKind::Not(Box::new(inner?)), span));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Expr> {
        self.chain(Self::union, |t| {
            let op = match t {
                Tok::Eq => BoolBinOp::Eq,
                Tok::Ne => BoolBinOp::Ne,
                Tok::Le => BoolBinOp::Le,
                Tok::Ge => BoolBinOp::Ge,
                Tok::Lt => BoolBinOp::Lt,
                Tok::Gt => BoolBinOp::Gt,
                _ => return None,
            };
            Some(match op {
                BoolBinOp::Eq => |l, r| ExprKind::BoolBinary(BoolBinOp::Eq, l, r),
                BoolBinOp::Ne => |l, r| ExprKind::BoolBinary(BoolBinOp::Ne, l, r),
                BoolBinOp::Le => |l, r| ExprKind::BoolBinary(BoolBinOp::Le, l, r),
                BoolBinOp::Ge => |l, r| ExprKind::BoolBinary(BoolBinOp::Ge, l, r),
                BoolBinOp::Lt => |l, r| ExprKind::BoolBinary(BoolBinOp::Lt, l, r),
                _ => |l, r| ExprKind::BoolBinary(BoolBinOp::Gt, l, r),
            })
        })
    }

    fn union(&mut self) -> PResult<Expr> {
        self.chain(Self::intersect, |t| match t {
            Tok::Ident(n) if n == "union" => Some(|l, r| ExprKind::SetBinary(SetBinOp::Union, l, r)),
            Tok::Ident(n) if n == "diff" => Some(|l, r| ExprKind::SetBinary(SetBinOp::Diff, l, r)),
            _ => None,
        })
    }

    fn intersect(&mut self) -> PResult<Expr> {
        self.chain(Self::additive, |t| match t {
            Tok::Ident(n) if n == "intersect" => {
                Some(|l, r| ExprKind::SetBinary(SetBinOp::Intersect, l, r))
            }
            _ => None,
        })
    }

    fn additive(&mut self) -> PResult<Expr> {
        self.chain(Self::multiplicative, |t| match t {
            Tok::Plus => Some(|l, r| ExprKind::AlgBinary(AlgBinOp::Add, l, r)),
            Tok::Minus => Some(|l, r| ExprKind::AlgBinary(AlgBinOp::Sub, l, r)),
            _ => None,
        })
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        self.chain(Self::unary, |t| match t {
            Tok::Star => Some(|l, r| ExprKind::AlgBinary(AlgBinOp::Mul, l, r)),
            Tok::Slash => Some(|l, r| ExprKind::AlgBinary(AlgBinOp::Div, l, r)),
            _ => None,
        })
    }

    /// Unary signs bind looser than `^`, so `-x^2` is `-(x^2)`.
    fn unary(&mut self) -> PResult<Expr> {
        let op = match self.peek() {
            Tok::Minus => AlgUnaryOp::Neg,
            Tok::Plus => AlgUnaryOp::Plus,
            _ => return self.power(),
        };
        let span = self.bump().span;
        self.enter()?;
        let inner = self.unary();
        self.leave(1);
        Ok(Expr::new(ExprKind::AlgUnary(op, Box::new(inner?)), span))
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            let span = self.bump().span;
            self.enter()?;
            let exp = self.unary();
            self.leave(1);
            return Ok(Expr::new(
                ExprKind::AlgBinary(AlgBinOp::Pow, Box::new(base), Box::new(exp?)),
                span,
            ));
        }
        Ok(base)
    }

    fn signed_number(&mut self) -> PResult<f64> {
        let neg = if self.eat(&Tok::Minus) {
            true
        } else {
            self.eat(&Tok::Plus);
            false
        };
        let v = match *self.peek() {
            Tok::Int(v) => v as f64,
            Tok::Real(v) => v,
            _ => return self.unexpected("a number"),
        };
        self.bump();
        Ok(if neg { -v } else { v })
    }

    fn primary(&mut self) -> PResult<Expr> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                ExprKind::Int(v)
            }
            Tok::Real(v) => {
                self.bump();
                ExprKind::Real(v)
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                return Ok(e);
            }
            Tok::LBrace => {
                self.bump();
                ExprKind::SetValue(self.expr_list(&Tok::RBrace)?)
            }
            Tok::LBracket => {
                self.bump();
                let lo = self.signed_number()?;
                self.expect(&Tok::DotDot)?;
                let hi = self.signed_number()?;
                self.expect(&Tok::RBracket)?;
                ExprKind::Interval(lo, hi)
            }
            Tok::Ident(n) if n == "true" || n == "false" => {
                self.bump();
                ExprKind::Bool(n == "true")
            }
            Tok::Ident(n) if n == "card" => {
                self.bump();
                self.expect(&Tok::LParen)?;
                let arg = self.expr()?;
                self.expect(&Tok::RParen)?;
                ExprKind::SetFunction(SetFn::Card, Box::new(arg))
            }
            Tok::Ident(n) if !is_keyword(&n) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let args = self.expr_list(&Tok::RParen)?;
                    match AlgFn::from_name(&n) {
                        Some(f) => ExprKind::AlgFunction(f, args),
                        None => ExprKind::FunctionCall { callee: n, args },
                    }
                } else {
                    let mut path = vec![self.step(n)?];
                    while *self.peek() == Tok::Dot {
                        self.bump();
                        let (next, _) = self.ident()?;
                        path.push(self.step(next)?);
                    }
                    if path.len() == 1 {
                        ExprKind::Var(path.pop().unwrap())
                    } else {
                        ExprKind::Object(path)
                    }
                }
            }
            _ => return self.unexpected("an expression"),
        };
        Ok(Expr::new(kind, span))
    }

    fn step(&mut self, name: String) -> PResult<VarRef> {
        let mut indexes = Vec::new();
        if self.eat(&Tok::LBracket) {
            indexes = self.expr_list(&Tok::RBracket)?;
            if indexes.is_empty() {
                return self.unexpected("an index");
            }
        }
        Ok(VarRef {
            name,
            indexes,
            binding: Binding::Unresolved,
        })
    }
}
