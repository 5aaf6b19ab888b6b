use std::sync::Arc;

use super::lexer::{tokenize, Tok, Token};
use super::surface::{BinOp, Def, SourceProgram, SurfExpr, SurfKind};
use super::{Span, SyntaxError};
use crate::stdlib::Builtin;
use crate::value::{Literal, NValue};
use crate::DeviceId;

type PResult<T> = Result<T, SyntaxError>;

/// Parses a whole source file: any number of top-level `def`s followed by an
/// optional main expression.
pub fn parse(file: &str, src: &str) -> PResult<SourceProgram> {
    let file: Arc<str> = Arc::from(file);
    let mut p = Parser::new(tokenize(&file, src)?);
    let mut defs = Vec::new();
    while p.at(&Tok::Def) {
        defs.push(p.def()?);
        p.eat(&Tok::Semi);
    }
    let main = if p.at(&Tok::Eof) { None } else { Some(p.expr()?) };
    p.eat(&Tok::Semi);
    p.expect(&Tok::Eof)?;
    Ok(SourceProgram { defs, main })
}

/// Reads a single data literal such as `3`, `-0.5`, `True`, `Infinity` or
/// `Pair(1, False)`.
pub fn parse_literal(text: &str) -> PResult<Literal> {
    let file: Arc<str> = Arc::from("<literal>");
    let mut p = Parser::new(tokenize(&file, text)?);
    let lit = p.literal(&|_| None)?;
    p.expect(&Tok::Eof)?;
    Ok(lit)
}

/// Reads the canonical nvalue rendering `default[d1->v1, d2->v2]`. Function
/// literals written `τN` are looked up through `closures`.
pub(crate) fn parse_nvalue(text: &str, closures: &dyn Fn(&str) -> Option<Literal>) -> PResult<NValue> {
    let file: Arc<str> = Arc::from("<nvalue>");
    let mut p = Parser::new(tokenize(&file, text)?);
    let default = p.literal(closures)?;
    p.expect(&Tok::LBracket)?;
    let mut entries = Vec::new();
    if !p.at(&Tok::RBracket) {
        loop {
            let span = p.span();
            let id = match p.advance().tok {
                Tok::Num(n) if n >= 0.0 && n.fract() == 0.0 && n <= u32::MAX as f64 => n as u32,
                other => return Err(SyntaxError::parse(span, format!("expected device id, found {other}"))),
            };
            p.expect(&Tok::ThinArrow)?;
            entries.push((DeviceId(id), p.literal(closures)?));
            if !p.eat(&Tok::Comma) {
                break;
            }
        }
    }
    p.expect(&Tok::RBracket)?;
    p.expect(&Tok::Eof)?;
    Ok(NValue::from_entries(default, entries))
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(toks: Vec<Token>) -> Self {
        Parser { toks, pos: 0 }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span.clone()
    }

    fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok) -> PResult<Span> {
        if self.at(t) {
            Ok(self.advance().span)
        } else {
            Err(self.unexpected(&t.to_string()))
        }
    }

    fn unexpected(&self, wanted: &str) -> SyntaxError {
        SyntaxError::parse(self.span(), format!("expected {wanted}, found {}", self.peek()))
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.advance();
                Ok(name)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn params(&mut self) -> PResult<Vec<String>> {
        self.expect(&Tok::LParen)?;
        let mut out = Vec::new();
        if !self.at(&Tok::RParen) {
            loop {
                out.push(self.ident()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(&Tok::RParen)?;
        Ok(out)
    }

    fn block(&mut self) -> PResult<SurfExpr> {
        self.expect(&Tok::LBrace)?;
        let e = self.expr()?;
        self.eat(&Tok::Semi);
        self.expect(&Tok::RBrace)?;
        Ok(e)
    }

    fn def(&mut self) -> PResult<Def> {
        let span = self.expect(&Tok::Def)?;
        let name = self.ident()?;
        let params = self.params()?;
        let body = self.block()?;
        Ok(Def { span, name, params, body })
    }

    fn expr(&mut self) -> PResult<SurfExpr> {
        let span = self.span();
        match self.peek() {
            Tok::Val => {
                self.advance();
                let name = self.ident()?;
                self.expect(&Tok::Assign)?;
                let bound = self.expr()?;
                self.expect(&Tok::Semi)?;
                let body = self.expr()?;
                Ok(SurfExpr { span, kind: SurfKind::Val(name, Box::new(bound), Box::new(body)) })
            }
            Tok::Def => {
                let def = self.def()?;
                self.eat(&Tok::Semi);
                let rest = self.expr()?;
                Ok(SurfExpr { span, kind: SurfKind::Def(Box::new(def), Box::new(rest)) })
            }
            _ => self.or_expr(),
        }
    }

    fn binary_level(
        &mut self,
        ops: &[(Tok, BinOp)],
        next: fn(&mut Self) -> PResult<SurfExpr>,
    ) -> PResult<SurfExpr> {
        let mut lhs = next(self)?;
        'outer: loop {
            for (tok, op) in ops {
                if self.at(tok) {
                    let span = self.advance().span;
                    let rhs = next(self)?;
                    lhs = SurfExpr { span, kind: SurfKind::Binary(*op, Box::new(lhs), Box::new(rhs)) };
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn or_expr(&mut self) -> PResult<SurfExpr> {
        self.binary_level(&[(Tok::Or, BinOp::Or)], Self::and_expr)
    }

    fn and_expr(&mut self) -> PResult<SurfExpr> {
        self.binary_level(&[(Tok::And, BinOp::And)], Self::cmp_expr)
    }

    fn cmp_expr(&mut self) -> PResult<SurfExpr> {
        self.binary_level(
            &[
                (Tok::EqEq, BinOp::Eq),
                (Tok::Le, BinOp::Le),
                (Tok::Ge, BinOp::Ge),
                (Tok::Lt, BinOp::Lt),
                (Tok::Gt, BinOp::Gt),
            ],
            Self::add_expr,
        )
    }

    fn add_expr(&mut self) -> PResult<SurfExpr> {
        self.binary_level(&[(Tok::Plus, BinOp::Add), (Tok::Minus, BinOp::Sub)], Self::mul_expr)
    }

    fn mul_expr(&mut self) -> PResult<SurfExpr> {
        self.binary_level(&[(Tok::Star, BinOp::Mul), (Tok::Slash, BinOp::Div)], Self::unary)
    }

    fn unary(&mut self) -> PResult<SurfExpr> {
        if self.at(&Tok::Minus) && !matches!(self.peek_at(1), Tok::Comma | Tok::RParen) {
            let span = self.advance().span;
            match self.peek().clone() {
                Tok::Num(n) if !matches!(self.peek_at(1), Tok::LParen) => {
                    self.advance();
                    return self.postfix(SurfExpr { span, kind: SurfKind::Num(-n) });
                }
                Tok::Infinity => {
                    self.advance();
                    return self.postfix(SurfExpr { span, kind: SurfKind::Num(f64::NEG_INFINITY) });
                }
                _ => {
                    let inner = self.unary()?;
                    return Ok(SurfExpr { span, kind: SurfKind::Neg(Box::new(inner)) });
                }
            }
        }
        let e = self.primary()?;
        self.postfix(e)
    }

    fn postfix(&mut self, mut e: SurfExpr) -> PResult<SurfExpr> {
        while self.at(&Tok::LParen) {
            let span = self.advance().span;
            let mut args = Vec::new();
            if !self.at(&Tok::RParen) {
                loop {
                    args.push(self.expr()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.expect(&Tok::RParen)?;
            e = SurfExpr { span, kind: SurfKind::Call(Box::new(e), args) };
        }
        Ok(e)
    }

    fn lambda_ahead(&self) -> bool {
        if !self.at(&Tok::LParen) {
            return false;
        }
        let mut i = 1;
        if matches!(self.peek_at(i), Tok::RParen) {
            return matches!(self.peek_at(i + 1), Tok::FatArrow);
        }
        loop {
            if !matches!(self.peek_at(i), Tok::Ident(_)) {
                return false;
            }
            i += 1;
            match self.peek_at(i) {
                Tok::Comma => i += 1,
                Tok::RParen => return matches!(self.peek_at(i + 1), Tok::FatArrow),
                _ => return false,
            }
        }
    }

    fn lambda_body(&mut self) -> PResult<SurfExpr> {
        if self.at(&Tok::LBrace) {
            self.block()
        } else {
            self.expr()
        }
    }

    fn primary(&mut self) -> PResult<SurfExpr> {
        let span = self.span();
        let op_ref = |t: &Tok| -> Option<BinOp> {
            Some(match t {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::EqEq => BinOp::Eq,
                Tok::Le => BinOp::Le,
                Tok::Ge => BinOp::Ge,
                Tok::Lt => BinOp::Lt,
                Tok::Gt => BinOp::Gt,
                Tok::And => BinOp::And,
                Tok::Or => BinOp::Or,
                _ => return None,
            })
        };
        let mk = |kind| Ok(SurfExpr { span: span.clone(), kind });

        if let Some(op) = op_ref(self.peek()) {
            if matches!(self.peek_at(1), Tok::Comma | Tok::RParen | Tok::LParen) {
                self.advance();
                return mk(SurfKind::Op(op));
            }
        }
        if self.lambda_ahead() {
            let params = self.params()?;
            self.expect(&Tok::FatArrow)?;
            let body = self.lambda_body()?;
            return mk(SurfKind::Lambda(params, Box::new(body)));
        }

        match self.peek().clone() {
            Tok::Num(n) => {
                self.advance();
                mk(SurfKind::Num(n))
            }
            Tok::Infinity => {
                self.advance();
                mk(SurfKind::Num(f64::INFINITY))
            }
            Tok::True => {
                self.advance();
                mk(SurfKind::Bool(true))
            }
            Tok::False => {
                self.advance();
                mk(SurfKind::Bool(false))
            }
            Tok::Ident(name) => {
                self.advance();
                if self.eat(&Tok::FatArrow) {
                    let body = self.lambda_body()?;
                    return mk(SurfKind::Lambda(vec![name], Box::new(body)));
                }
                mk(SurfKind::Ident(name))
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::If => {
                self.advance();
                self.expect(&Tok::LParen)?;
                let cond = self.expr()?;
                self.expect(&Tok::RParen)?;
                let then = self.block()?;
                self.expect(&Tok::Else)?;
                let other = if self.at(&Tok::If) { self.primary()? } else { self.block()? };
                mk(SurfKind::If(Box::new(cond), Box::new(then), Box::new(other)))
            }
            Tok::Fun => {
                self.advance();
                let name = self.ident()?;
                let params = self.params()?;
                let body = self.block()?;
                mk(SurfKind::Fun(name, params, Box::new(body)))
            }
            Tok::Retsend => {
                self.advance();
                let e = self.expr()?;
                mk(SurfKind::RetSend(Box::new(e)))
            }
            Tok::Return => {
                self.advance();
                let ret = self.or_expr()?;
                self.expect(&Tok::Send)?;
                let send = self.expr()?;
                mk(SurfKind::ReturnSend(Box::new(ret), Box::new(send)))
            }
            Tok::Val | Tok::Def => self.expr(),
            _ => Err(self.unexpected("expression")),
        }
    }

    fn literal(&mut self, closures: &dyn Fn(&str) -> Option<Literal>) -> PResult<Literal> {
        let span = self.span();
        let tok = self.advance().tok;
        let lit = match tok {
            Tok::Num(n) => Literal::Num(n),
            Tok::Infinity => Literal::Num(f64::INFINITY),
            Tok::Minus => match self.peek() {
                Tok::Num(n) => {
                    let n = *n;
                    self.advance();
                    Literal::Num(-n)
                }
                Tok::Infinity => {
                    self.advance();
                    Literal::Num(f64::NEG_INFINITY)
                }
                _ => Literal::Builtin(Builtin::Sub),
            },
            Tok::True => Literal::Bool(true),
            Tok::False => Literal::Bool(false),
            Tok::Ident(name) if name == "NaN" => Literal::Num(f64::NAN),
            Tok::Ident(name) if name == "Pair" && self.at(&Tok::LParen) => {
                self.advance();
                let a = self.literal(closures)?;
                self.expect(&Tok::Comma)?;
                let b = self.literal(closures)?;
                self.expect(&Tok::RParen)?;
                Literal::pair(a, b)
            }
            Tok::Ident(name) => match Builtin::from_name(&name) {
                Some(b) => Literal::Builtin(b),
                None => closures(&name)
                    .ok_or_else(|| SyntaxError::parse(span, format!("unknown literal `{name}`")))?,
            },
            other => {
                let sym = match other {
                    Tok::Plus => "+",
                    Tok::Star => "*",
                    Tok::Slash => "/",
                    Tok::EqEq => "==",
                    Tok::Le => "<=",
                    Tok::Ge => ">=",
                    Tok::And => "and",
                    Tok::Or => "or",
                    _ => return Err(SyntaxError::parse(span, format!("expected literal, found {other}"))),
                };
                Literal::Builtin(Builtin::from_name(sym).expect("operator builtin"))
            }
        };
        Ok(lit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn main_of(src: &str) -> SurfKind {
        parse("t", src).unwrap().main.unwrap().kind
    }

    #[test]
    fn val_chain() {
        match main_of("val x = 1; x") {
            SurfKind::Val(x, bound, body) => {
                assert_eq!(x, "x");
                assert_eq!(bound.kind, SurfKind::Num(1.0));
                assert_eq!(body.kind, SurfKind::Ident("x".into()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn precedence_is_left_associative() {
        let SurfKind::Binary(BinOp::Sub, lhs, rhs) = main_of("1 - 2 - 3 * 4") else { panic!() };
        assert!(matches!(lhs.kind, SurfKind::Binary(BinOp::Sub, _, _)));
        assert!(matches!(rhs.kind, SurfKind::Binary(BinOp::Mul, _, _)));
        let SurfKind::Binary(BinOp::Or, lhs, _) = main_of("a and b or c == d") else { panic!() };
        assert!(matches!(lhs.kind, SurfKind::Binary(BinOp::And, _, _)));
    }

    #[test]
    fn operator_reference_and_negative_literals() {
        let SurfKind::Call(_, args) = main_of("nfold(+, n - 1, -Infinity)") else { panic!() };
        assert_eq!(args[0].kind, SurfKind::Op(BinOp::Add));
        assert!(matches!(args[1].kind, SurfKind::Binary(BinOp::Sub, _, _)));
        assert_eq!(args[2].kind, SurfKind::Num(f64::NEG_INFINITY));
    }

    #[test]
    fn lambdas_and_exchange_forms() {
        let SurfKind::Call(_, args) = main_of("exchange(0, (o, n) => retsend n + 1)") else { panic!() };
        let SurfKind::Lambda(ps, body) = &args[1].kind else { panic!() };
        assert_eq!(ps, &["o", "n"]);
        assert!(matches!(body.kind, SurfKind::RetSend(_)));
        let SurfKind::Call(_, args) = main_of("exchange(0, n => return n send n + 1)") else { panic!() };
        let SurfKind::Lambda(ps, body) = &args[1].kind else { panic!() };
        assert_eq!(ps, &["n"]);
        assert!(matches!(body.kind, SurfKind::ReturnSend(_, _)));
        assert!(matches!(main_of("(() => { 1 })()"), SurfKind::Call(_, _)));
    }

    #[test]
    fn defs_and_main() {
        let p = parse("t", "def f(x){x} f(2)").unwrap();
        assert_eq!(p.defs.len(), 1);
        assert_eq!(p.defs[0].params, vec!["x".to_string()]);
        assert!(matches!(p.main.unwrap().kind, SurfKind::Call(_, _)));
    }

    #[test]
    fn if_else_chain() {
        let SurfKind::If(_, _, other) = main_of("if (a) {1} else if (b) {2} else {3}") else { panic!() };
        assert!(matches!(other.kind, SurfKind::If(_, _, _)));
    }

    #[test]
    fn errors_carry_spans() {
        let err = parse("f.xc", "def f(x) {\n  x +\n}").unwrap_err();
        assert_eq!(err.span.line, 3);
        assert!(err.to_string().starts_with("f.xc:3:1: parse error"));
    }

    #[test]
    fn literals_and_nvalues() {
        assert_eq!(parse_literal("-2.5").unwrap(), Literal::Num(-2.5));
        assert_eq!(parse_literal("Pair(1, True)").unwrap(), Literal::pair(Literal::Num(1.0), Literal::Bool(true)));
        let w = parse_nvalue("0[1->6, 3->5]", &|_| None).unwrap();
        assert_eq!(w.to_string(), "0[1->6, 3->5]");
        assert!(parse_literal("x").is_err());
        assert_eq!(parse_literal("Pair").unwrap(), Literal::Builtin(Builtin::PairCtor));
    }
}
