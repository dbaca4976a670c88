//! Lexer and recursive-descent parser for the family DSL.
//!
//! ```text
//! file     := decl+
//! decl     := "family" [LABEL ":"] spec
//! spec     := KIND ["{" binding* "}"] | "restrict" "(" spec "," pred ")" | "dsum" "(" spec "," spec ")"
//! binding  := NAME ["(" NAME ("," NAME)* ")"] "=" (expr | "constant" "(" INT ")" | "monotone") [";"]
//! expr     := "if" cond "then" expr "else" expr | sum
//! cond     := conj ("or" conj)*  ;  conj := neg ("and" neg)*  ;  neg := "not" neg | "(" cond ")" | cmp
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::expr::{BinOp, CmpOp, Cond, Expr, ExprKind, Span};
use super::predicate::Predicate;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(BigRational),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: Span,
}

const SYMBOLS: [&str; 18] = [
    "<=", ">=", "==", "!=", "{", "}", "(", ")", ",", ";", ":", "=", "+", "-", "*", "/", "^", "<",
];

fn lex(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut k = 0;
    while k < bytes.len() {
        let c = bytes[k];
        if c.is_ascii_whitespace() {
            k += 1;
            continue;
        }
        if c == b'#' || (c == b'/' && bytes.get(k + 1) == Some(&b'/')) {
            while k < bytes.len() && bytes[k] != b'\n' {
                k += 1;
            }
            continue;
        }
        let start = k;
        if c.is_ascii_digit() {
            while k < bytes.len() && bytes[k].is_ascii_digit() {
                k += 1;
            }
            let int: BigInt = src[start..k].parse().expect("digits");
            let mut value = BigRational::from_integer(int);
            if k + 1 < bytes.len() && bytes[k] == b'.' && bytes[k + 1].is_ascii_digit() {
                let fs = k + 1;
                k += 1;
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                let den = num_traits::pow(BigInt::from(10), k - fs);
                let f: BigInt = src[fs..k].parse().expect("digits");
                value += BigRational::new(f, den);
            }
            out.push(Token {
                tok: Tok::Num(value),
                span: (start, k),
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while k < bytes.len() && (bytes[k].is_ascii_alphanumeric() || bytes[k] == b'_') {
                k += 1;
            }
            out.push(Token {
                tok: Tok::Ident(src[start..k].to_string()),
                span: (start, k),
            });
            continue;
        }
        if c == b'>' {
            let two = bytes.get(k + 1) == Some(&b'=');
            k += if two { 2 } else { 1 };
            out.push(Token {
                tok: Tok::Sym(if two { ">=" } else { ">" }),
                span: (start, k),
            });
            continue;
        }
        match SYMBOLS.iter().find(|s| src[k..].starts_with(**s)) {
            Some(s) => {
                k += s.len();
                out.push(Token {
                    tok: Tok::Sym(s),
                    span: (start, k),
                });
            }
            None => {
                let ch = src[k..].chars().next().unwrap_or('?');
                return Err(syntax(src, (k, k + ch.len_utf8()), format!("unexpected character {ch:?}")));
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        span: (src.len(), src.len()),
    });
    Ok(out)
}

/// Builds a syntax error with line and column computed from the span.
pub fn syntax(src: &str, span: Span, message: impl Into<String>) -> Error {
    let before = &src[..span.0.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    Error::Syntax {
        message: message.into(),
        span,
        line,
        column,
    }
}

/// A binding inside `{ ... }`.
#[derive(Clone, Debug, PartialEq)]
pub struct Binding {
    pub name: String,
    pub params: Vec<String>,
    pub value: BindingValue,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BindingValue {
    Expr(Expr),
    TailConstant(u64),
    TailMonotone,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpecNode {
    Kind {
        name: String,
        bindings: Vec<Binding>,
        span: Span,
    },
    Restrict {
        base: Box<SpecNode>,
        predicate: Predicate,
        span: Span,
    },
    DSum {
        left: Box<SpecNode>,
        right: Box<SpecNode>,
        span: Span,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decl {
    pub label: Option<String>,
    pub spec: SpecNode,
    pub span: Span,
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T>;

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self> {
        Ok(Parser {
            src,
            toks: lex(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].span.1
        }
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(syntax(self.src, self.span(), msg))
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("{s:?}"),
            Tok::Num(q) => format!("number {q}"),
            Tok::Sym(s) => format!("{s:?}"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected {s:?}, found {}", self.describe()))
        }
    }

    fn expect_ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let sp = self.bump().span;
                Ok((s, sp))
            }
            _ => self.err(format!("expected a name, found {}", self.describe())),
        }
    }

    fn expect_int(&mut self) -> PResult<u64> {
        match self.peek().clone() {
            Tok::Num(q) if q.is_integer() => match q.to_integer().to_u64() {
                Some(v) => {
                    self.bump();
                    Ok(v)
                }
                None => self.err("integer out of range"),
            },
            _ => self.err(format!("expected a nonnegative integer, found {}", self.describe())),
        }
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn file(&mut self) -> PResult<Vec<Decl>> {
        let mut decls = Vec::new();
        while !self.at_eof() {
            decls.push(self.decl()?);
        }
        if decls.is_empty() {
            return self.err("expected at least one family declaration");
        }
        Ok(decls)
    }

    fn decl(&mut self) -> PResult<Decl> {
        let start = self.span().0;
        if !self.is_kw("family") {
            return self.err(format!("expected \"family\", found {}", self.describe()));
        }
        self.bump();
        let label = if matches!(self.peek(), Tok::Ident(_)) && matches!(self.peek_at(1), Tok::Sym(":")) {
            let (l, _) = self.expect_ident()?;
            self.bump();
            Some(l)
        } else {
            None
        };
        let spec = self.spec()?;
        self.eat_sym(";");
        Ok(Decl {
            label,
            spec,
            span: (start, self.prev_end()),
        })
    }

    fn spec(&mut self) -> PResult<SpecNode> {
        let start = self.span().0;
        let (name, _) = self.expect_ident()?;
        match name.as_str() {
            "restrict" => {
                self.expect_sym("(")?;
                let base = self.spec()?;
                self.expect_sym(",")?;
                let predicate = self.predicate()?;
                self.expect_sym(")")?;
                Ok(SpecNode::Restrict {
                    base: Box::new(base),
                    predicate,
                    span: (start, self.prev_end()),
                })
            }
            "dsum" => {
                self.expect_sym("(")?;
                let left = self.spec()?;
                self.expect_sym(",")?;
                let right = self.spec()?;
                self.expect_sym(")")?;
                Ok(SpecNode::DSum {
                    left: Box::new(left),
                    right: Box::new(right),
                    span: (start, self.prev_end()),
                })
            }
            _ => {
                let mut bindings = Vec::new();
                if self.eat_sym("{") {
                    while !self.eat_sym("}") {
                        if self.at_eof() {
                            return self.err("unterminated binding block, expected \"}\"");
                        }
                        bindings.push(self.binding()?);
                    }
                }
                Ok(SpecNode::Kind {
                    name,
                    bindings,
                    span: (start, self.prev_end()),
                })
            }
        }
    }

    fn binding(&mut self) -> PResult<Binding> {
        let start = self.span().0;
        let (name, _) = self.expect_ident()?;
        let mut params = Vec::new();
        if self.eat_sym("(") {
            loop {
                params.push(self.expect_ident()?.0);
                if self.eat_sym(")") {
                    break;
                }
                self.expect_sym(",")?;
            }
        }
        self.expect_sym("=")?;
        let value = if name == "tail" {
            if self.is_kw("monotone") {
                self.bump();
                BindingValue::TailMonotone
            } else if self.is_kw("constant") {
                self.bump();
                self.expect_sym("(")?;
                let k = self.expect_int()?;
                if k == 0 {
                    return self.err("tail index must be at least 1");
                }
                self.expect_sym(")")?;
                BindingValue::TailConstant(k)
            } else {
                return self.err(format!(
                    "expected \"constant(K)\" or \"monotone\", found {}",
                    self.describe()
                ));
            }
        } else {
            BindingValue::Expr(self.expr()?)
        };
        self.eat_sym(";");
        Ok(Binding {
            name,
            params,
            value,
            span: (start, self.prev_end()),
        })
    }

    fn expr(&mut self) -> PResult<Expr> {
        if self.is_kw("if") {
            let start = self.bump().span.0;
            let c = self.cond()?;
            if !self.is_kw("then") {
                return self.err(format!("expected \"then\", found {}", self.describe()));
            }
            self.bump();
            let a = self.expr()?;
            if !self.is_kw("else") {
                return self.err(format!("expected \"else\", found {}", self.describe()));
            }
            self.bump();
            let b = self.expr()?;
            return Ok(Expr::new(
                ExprKind::If(Box::new(c), Box::new(a), Box::new(b)),
                (start, self.prev_end()),
            ));
        }
        self.sum()
    }

    fn sum(&mut self) -> PResult<Expr> {
        let start = self.span().0;
        let mut lhs = self.product()?;
        loop {
            let op = if self.eat_sym("+") {
                BinOp::Add
            } else if self.eat_sym("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.product()?;
            lhs = Expr::new(
                ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)),
                (start, self.prev_end()),
            );
        }
    }

    fn product(&mut self) -> PResult<Expr> {
        let start = self.span().0;
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat_sym("*") {
                BinOp::Mul
            } else if self.eat_sym("/") {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::new(
                ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)),
                (start, self.prev_end()),
            );
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.is_sym("-") {
            let start = self.bump().span.0;
            let e = self.unary()?;
            let kind = match e.kind {
                ExprKind::Num(q) => ExprKind::Num(-q),
                k => ExprKind::Neg(Box::new(Expr::new(k, e.span))),
            };
            return Ok(Expr::new(kind, (start, self.prev_end())));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        let start = self.span().0;
        let base = self.atom()?;
        if self.eat_sym("^") {
            let exp = self.unary()?;
            return Ok(Expr::new(
                ExprKind::Bin(BinOp::Pow, Box::new(base), Box::new(exp)),
                (start, self.prev_end()),
            ));
        }
        Ok(base)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Num(q) => {
                self.bump();
                Ok(Expr::new(ExprKind::Num(q), span))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(Expr::new(e.kind, (span.0, self.prev_end())))
            }
            Tok::Ident(name) => {
                if ["if", "then", "else", "and", "or", "not"].contains(&name.as_str()) {
                    return self.err(format!("unexpected keyword {name:?}"));
                }
                self.bump();
                if name == "inf" {
                    return Ok(Expr::new(ExprKind::Inf, span));
                }
                if self.eat_sym("(") {
                    let mut args = Vec::new();
                    if !self.eat_sym(")") {
                        loop {
                            args.push(self.expr()?);
                            if self.eat_sym(")") {
                                break;
                            }
                            self.expect_sym(",")?;
                        }
                    }
                    let arity = match name.as_str() {
                        "log" => 1,
                        "min" | "max" => 2,
                        _ => {
                            return Err(syntax(self.src, span, format!("unknown function {name:?}")))
                        }
                    };
                    if args.len() != arity {
                        return Err(syntax(
                            self.src,
                            (span.0, self.prev_end()),
                            format!("{name} takes {arity} argument(s)"),
                        ));
                    }
                    return Ok(Expr::new(ExprKind::Call(name, args), (span.0, self.prev_end())));
                }
                Ok(Expr::new(ExprKind::Var(name), span))
            }
            _ => self.err(format!("expected an expression, found {}", self.describe())),
        }
    }

    fn cond(&mut self) -> PResult<Cond> {
        let mut lhs = self.conj()?;
        while self.is_kw("or") {
            self.bump();
            let rhs = self.conj()?;
            lhs = Cond::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> PResult<Cond> {
        let mut lhs = self.neg()?;
        while self.is_kw("and") {
            self.bump();
            let rhs = self.neg()?;
            lhs = Cond::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn neg(&mut self) -> PResult<Cond> {
        if self.is_kw("not") {
            self.bump();
            return Ok(Cond::Not(Box::new(self.neg()?)));
        }
        if self.is_kw("true") || self.is_kw("false") {
            let b = self.is_kw("true");
            self.bump();
            return Ok(Cond::Bool(b));
        }
        if self.is_sym("(") {
            let save = self.pos;
            self.bump();
            if let Ok(c) = self.cond() {
                if self.eat_sym(")") && !self.at_cmp() {
                    return Ok(c);
                }
            }
            self.pos = save;
        }
        self.cmp()
    }

    fn at_cmp(&self) -> bool {
        ["<", "<=", ">", ">=", "==", "!=", "+", "-", "*", "/", "^"]
            .iter()
            .any(|s| self.is_sym(s))
    }

    fn cmp(&mut self) -> PResult<Cond> {
        let a = self.sum()?;
        let op = match self.peek() {
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            Tok::Sym("==") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            _ => return self.err(format!("expected a comparison, found {}", self.describe())),
        };
        self.bump();
        let b = self.sum()?;
        Ok(Cond::Cmp(op, a, b))
    }

    fn predicate(&mut self) -> PResult<Predicate> {
        let (name, span) = self.expect_ident()?;
        let p = match name.as_str() {
            "all" => Predicate::All,
            "none" | "empty" => Predicate::Empty,
            "diagonal" => Predicate::Diagonal,
            "triangular" => Predicate::Triangular,
            "even" => Predicate::Even,
            "odd" => Predicate::Odd,
            "left" => Predicate::Left,
            "right" => Predicate::Right,
            "row" | "col" | "first" => {
                self.expect_sym("(")?;
                let k = self.expect_int()?;
                self.expect_sym(")")?;
                if k == 0 && name != "first" {
                    return Err(syntax(self.src, span, "rows and columns are numbered from 1"));
                }
                match name.as_str() {
                    "row" => Predicate::Row(k),
                    "col" => Predicate::Column(k),
                    _ => Predicate::UpTo(k),
                }
            }
            "not" => {
                self.expect_sym("(")?;
                let p = self.predicate()?;
                self.expect_sym(")")?;
                Predicate::negate(p)
            }
            "and" | "or" => {
                self.expect_sym("(")?;
                let a = self.predicate()?;
                self.expect_sym(",")?;
                let b = self.predicate()?;
                self.expect_sym(")")?;
                if name == "and" {
                    Predicate::and(a, b)
                } else {
                    Predicate::or(a, b)
                }
            }
            _ => return Err(syntax(self.src, span, format!("unknown predicate {name:?}"))),
        };
        Ok(p)
    }

    fn finish(&self) -> PResult<()> {
        if self.at_eof() {
            Ok(())
        } else {
            self.err(format!("unexpected trailing input {}", self.describe()))
        }
    }
}

/// Parses every declaration of a family file.
pub fn parse_decls(src: &str) -> Result<Vec<Decl>> {
    Parser::new(src)?.file()
}

pub fn parse_expr(src: &str) -> Result<Expr> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

pub fn parse_predicate(src: &str) -> Result<Predicate> {
    let mut p = Parser::new(src)?;
    let e = p.predicate()?;
    p.finish()?;
    Ok(e)
}

/// Parses a rational literal such as `3/4`, `-2` or `0.125`.
pub fn parse_rational_literal(src: &str) -> Result<BigRational> {
    let e = parse_expr(src)?;
    match e.eval_const()? {
        super::expr::Val::Q(q) => Ok(q),
        _ => Err(syntax(src, (0, src.len()), "expected an exact rational")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_declarations() {
        let src = "family nn: grid { c(j) = 1/j; }\nfamily restrict(phi, even)\nfamily dsum(phi, grid)";
        let d = parse_decls(src).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d[0].label.as_deref(), Some("nn"));
        assert!(matches!(d[1].spec, SpecNode::Restrict { .. }));
        assert!(matches!(d[2].spec, SpecNode::DSum { .. }));
    }

    #[test]
    fn tail_bindings() {
        let d = parse_decls("family table { v(n,j) = 1/n; tail = constant(3) }").unwrap();
        let SpecNode::Kind { bindings, .. } = &d[0].spec else { panic!() };
        assert_eq!(bindings[1].value, BindingValue::TailConstant(3));
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_decls("family grid {\n  c(j) = 1/ ;\n}").unwrap_err();
        match err {
            Error::Syntax { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, 13);
            }
            e => panic!("unexpected {e:?}"),
        }
        assert!(parse_decls("").is_err());
        assert!(parse_decls("family grid { c(j) = 1 $ }").is_err());
    }

    #[test]
    fn conditions_with_parentheses() {
        let e = parse_expr("if (j <= n) and not (i > 2) then 1 else inf").unwrap();
        assert_eq!(
            e.eval_with(&[("n", 3), ("j", 2), ("i", 1)]).unwrap(),
            super::super::expr::Val::int(1)
        );
        let e = parse_expr("if (j + 1) * 2 > n then 1 else 2").unwrap();
        assert_eq!(e.eval_with(&[("n", 3), ("j", 2)]).unwrap(), super::super::expr::Val::int(1));
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(
            parse_rational_literal("0.125").unwrap(),
            BigRational::new(1.into(), 8.into())
        );
        assert_eq!(parse_rational_literal("-3/4").unwrap(), BigRational::new((-3).into(), 4.into()));
    }
}
