//! Arithmetic expressions in the single variable `x`.
//!
//! Grammar (whitespace is ignored between tokens):
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | 'x' | 'pi' | 'e' | func '(' sum ')' | '(' sum ')'
//! func    := 'exp' | 'ln' | 'sqrt' | 'sin' | 'cos'
//! ```
//!
//! `^` binds tighter than unary minus and is right-associative, so
//! `-2^2 = -4` and `2^3^2 = 512`. Implicit multiplication is rejected.

use std::f64::consts::{E, PI};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

impl UnaryOp {
    fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => UnaryOp::Exp,
            "ln" => UnaryOp::Ln,
            "sqrt" => UnaryOp::Sqrt,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> Result<f64> {
        let out = match self {
            UnaryOp::Neg => -v,
            UnaryOp::Exp => v.exp(),
            UnaryOp::Ln => {
                if !(v > 0.0) {
                    return Err(Error::Domain(format!("ln of nonpositive value {v}")));
                }
                v.ln()
            }
            UnaryOp::Sqrt => {
                if v < 0.0 {
                    return Err(Error::Domain(format!("sqrt of negative value {v}")));
                }
                v.sqrt()
            }
            UnaryOp::Sin => v.sin(),
            UnaryOp::Cos => v.cos(),
        };
        not_nan(out, self.name())
    }
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }

    fn apply(self, l: f64, r: f64) -> Result<f64> {
        let out = match self {
            BinaryOp::Add => l + r,
            BinaryOp::Sub => l - r,
            BinaryOp::Mul => l * r,
            BinaryOp::Div => {
                if r == 0.0 {
                    return Err(Error::Domain("division by zero".into()));
                }
                l / r
            }
            BinaryOp::Pow => {
                if l == 0.0 && r < 0.0 {
                    return Err(Error::Domain("0 raised to a negative power".into()));
                }
                // powf(0, 0) is 1 already
                l.powf(r)
            }
        };
        not_nan(out, &self.symbol().to_string())
    }
}

fn not_nan(v: f64, op: &str) -> Result<f64> {
    if v.is_nan() {
        Err(Error::Domain(format!("'{op}' produced NaN")))
    } else {
        Ok(v)
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        parse(src)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var => Ok(x),
            Expr::Unary(op, arg) => op.apply(arg.eval(x)?),
            Expr::Binary(op, l, r) => op.apply(l.eval(x)?, r.eval(x)?),
        }
    }

    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn unary(op: UnaryOp, arg: Expr) -> Expr {
        Expr::Unary(op, Box::new(arg))
    }

    pub fn binary(op: BinaryOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    /// Replaces every occurrence of `x` by `inner`.
    pub fn compose(&self, inner: &Expr) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var => inner.clone(),
            Expr::Unary(op, a) => Expr::unary(*op, a.compose(inner)),
            Expr::Binary(op, l, r) => Expr::binary(*op, l.compose(inner), r.compose(inner)),
        }
    }
}

/// Prints a fully parenthesized form that parses back to the same tree
/// (negative constants come back as a negation of a positive literal,
/// which evaluates identically).
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) {
                    write!(f, "(-{:e})", -c)
                } else {
                    write!(f, "{c:e}")
                }
            }
            Expr::Var => f.write_str("x"),
            Expr::Unary(UnaryOp::Neg, a) => write!(f, "(-{a})"),
            Expr::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Expr::Binary(op, l, r) => write!(f, "({l}{}{r})", op.symbol()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(usize, Tok)>> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (at, tok) = lx.next()?;
            let end = tok == Tok::End;
            out.push((at, tok));
            if end {
                return Ok(out);
            }
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn next(&mut self) -> Result<(usize, Tok)> {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(b) = self.peek() else {
            return Ok((start, Tok::End));
        };
        match b {
            b'0'..=b'9' | b'.' => self.number(start),
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                Ok((start, Tok::Ident(self.src[start..self.pos].to_string())))
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Ok((start, Tok::Op(b as char)))
            }
            b'(' => {
                self.pos += 1;
                Ok((start, Tok::LParen))
            }
            b')' => {
                self.pos += 1;
                Ok((start, Tok::RParen))
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                Err(Error::Syntax {
                    offset: start,
                    message: format!("unexpected character '{ch}'"),
                })
            }
        }
    }

    fn number(&mut self, start: usize) -> Result<(usize, Tok)> {
        let digits = |lx: &mut Self| {
            let s = lx.pos;
            while matches!(lx.peek(), Some(b'0'..=b'9')) {
                lx.pos += 1;
            }
            lx.pos - s
        };
        let mut n = digits(self);
        if self.peek() == Some(b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(Error::Syntax {
                offset: start,
                message: "malformed number".into(),
            });
        }
        // exponent only when followed by digits, so "2e" stays an error downstream
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text = &self.src[start..self.pos];
        let v: f64 = text.parse().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("malformed number '{text}'"),
        })?;
        if !v.is_finite() {
            return Err(Error::Syntax {
                offset: start,
                message: format!("number '{text}' overflows"),
            });
        }
        Ok((start, Tok::Num(v)))
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    i: usize,
}

pub fn parse(src: &str) -> Result<Expr> {
    if src.trim().is_empty() {
        return Err(Error::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let mut p = Parser {
        toks: Lexer::tokens(src)?,
        i: 0,
    };
    let e = p.sum()?;
    match p.peek() {
        Tok::End => Ok(e),
        t => Err(p.unexpected(&t.clone())),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].1
    }

    fn offset(&self) -> usize {
        self.toks[self.i].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].1.clone();
        if t != Tok::End {
            self.i += 1;
        }
        t
    }

    fn unexpected(&self, t: &Tok) -> Error {
        let what = match t {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Op(c) => format!("'{c}'"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        };
        Error::Syntax {
            offset: self.offset(),
            message: format!("unexpected {what}"),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&self.peek().clone()))
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinaryOp::Add,
                Tok::Op('-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.product()?);
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinaryOp::Mul,
                Tok::Op('/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::unary(UnaryOp::Neg, self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::binary(BinaryOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let e = self.sum()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(Expr::Var),
                "pi" => Ok(Expr::Const(PI)),
                "e" => Ok(Expr::Const(E)),
                _ => match UnaryOp::from_name(&name) {
                    Some(op) => {
                        self.expect(Tok::LParen)?;
                        let arg = self.sum()?;
                        self.expect(Tok::RParen)?;
                        Ok(Expr::unary(op, arg))
                    }
                    None => Err(Error::UnknownIdentifier { offset: at, name }),
                },
            },
            t => {
                self.i -= usize::from(t != Tok::End);
                Err(self.unexpected(&t))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(src: &str, x: f64) -> f64 {
        parse(src).unwrap().eval(x).unwrap()
    }

    #[test]
    fn spec_examples() {
        assert_eq!(ev("1+2*x", 3.0), 7.0);
        assert_eq!(ev("exp(0*x)", 5.0), 1.0);
        assert_eq!(ev("2^3^2", 0.3), 512.0);
        assert_eq!(ev("ln(e)", 0.0), 1.0);
        assert!((ev("sin(pi*x)", 0.5) - 1.0).abs() <= 1e-15);
        assert!(matches!(
            parse("1/(x-1)").unwrap().eval(1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn precedence_table() {
        let table: [(&str, f64, f64); 20] = [
            ("1+2*3", 0.0, 7.0),
            ("(1+2)*3", 0.0, 9.0),
            ("-2^2", 0.0, -4.0),
            ("(-2)^2", 0.0, 4.0),
            ("2^-1", 0.0, 0.5),
            ("2^3^2", 0.0, 512.0),
            ("(2^3)^2", 0.0, 64.0),
            ("8/4/2", 0.0, 1.0),
            ("8-4-2", 0.0, 2.0),
            ("2*3^2", 0.0, 18.0),
            ("-x^2", 3.0, -9.0),
            ("--x", 3.0, 3.0),
            ("1-x*2", 3.0, -5.0),
            ("x/2*4", 3.0, 6.0),
            ("2*-x", 3.0, -6.0),
            ("exp(0)+1", 0.0, 2.0),
            ("sqrt(16)^0.5", 0.0, 2.0),
            ("2^x^2", 2.0, 16.0),
            ("  1 +\t2 ", 0.0, 3.0),
            ("-2*-3", 0.0, 6.0),
        ];
        for (src, x, want) in table {
            assert_eq!(ev(src, x), want, "{src}");
        }
    }

    #[test]
    fn pow_zero_zero_is_one() {
        assert_eq!(ev("0^0", 0.0), 1.0);
        assert_eq!(ev("x^0", 0.0), 1.0);
        assert!(parse("0^(-1)").unwrap().eval(0.0).is_err());
    }

    #[test]
    fn domain_errors() {
        for (src, x) in [("ln(x)", 0.0), ("ln(x)", -1.0), ("sqrt(x)", -0.5), ("x^0.5", -1.0)] {
            assert!(matches!(parse(src).unwrap().eval(x), Err(Error::Domain(_))), "{src}");
        }
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        assert_eq!(
            parse("2x"),
            Err(Error::Syntax {
                offset: 1,
                message: "unexpected 'x'".into()
            })
        );
        assert!(matches!(parse("1+"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("(1"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("1 $ 2"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("sin x"), Err(Error::Syntax { offset: 4, .. })));
        assert!(matches!(parse(""), Err(Error::Syntax { .. })));
        assert_eq!(
            parse("1+y"),
            Err(Error::UnknownIdentifier {
                offset: 2,
                name: "y".into()
            })
        );
    }

    #[test]
    fn number_forms() {
        assert_eq!(ev("1e-3", 0.0), 1e-3);
        assert_eq!(ev(".5", 0.0), 0.5);
        assert_eq!(ev("2.", 0.0), 2.0);
        assert_eq!(ev("1.5E+2", 0.0), 150.0);
        assert!(parse("2e").is_err());
        assert!(parse("1e999").is_err());
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-10.0f64..10.0).prop_map(Expr::Const),
            Just(Expr::Var),
            Just(Expr::Const(PI)),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            let un = prop_oneof![
                Just(UnaryOp::Neg),
                Just(UnaryOp::Exp),
                Just(UnaryOp::Ln),
                Just(UnaryOp::Sqrt),
                Just(UnaryOp::Sin),
                Just(UnaryOp::Cos),
            ];
            let bin = prop_oneof![
                Just(BinaryOp::Add),
                Just(BinaryOp::Sub),
                Just(BinaryOp::Mul),
                Just(BinaryOp::Div),
                Just(BinaryOp::Pow),
            ];
            prop_oneof![
                (un, inner.clone()).prop_map(|(op, a)| Expr::unary(op, a)),
                (bin, inner.clone(), inner).prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn print_parse_round_trip(e in arb_expr(), xs in proptest::collection::vec(-3.0f64..3.0, 16)) {
            let back = parse(&e.to_string()).unwrap();
            for x in xs {
                match (e.eval(x), back.eval(x)) {
                    (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
                    (Err(_), Err(_)) => {}
                    (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
                }
            }
        }
    }
}
