//! Operator expressions such as `(a+)^2 a a+ + a+ a (a+)^2`.
//!
//! Grammar (whitespace is insignificant except around `a+`):
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor ('*'? factor)*
//! factor := atom ('^' nat)?
//! atom   := 'a+' | 'a' | rational | '(' expr ')'
//! ```
//!
//! A `+` directly after `a` forms the creation operator `a+`; with
//! whitespace in between it is addition. `a⁺` and `a†` are accepted as
//! spellings of `a+`. Rationals are `p` or `p/q` with no inner spaces.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::normal::{Letter, NormalForm};
use crate::rational::{fmt_q, Q};

#[derive(Clone, Debug, PartialEq)]
pub enum OpExpr {
    Letter(Letter),
    Scalar(Q),
    Pow(Box<OpExpr>, u32),
    Mul(Vec<OpExpr>),
    Add(Vec<OpExpr>),
    Neg(Box<OpExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Unexpected {
        found: String,
        expected: Vec<&'static str>,
    },
    InvalidCharacter(char),
    NonIntegerExponent(String),
    ZeroDenominator,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Unexpected { found, expected } => {
                write!(f, "expected one of {}, found {found}", expected.join(", "))
            }
            ParseErrorKind::InvalidCharacter(c) => write!(f, "invalid character {c:?}"),
            ParseErrorKind::NonIntegerExponent(s) => {
                write!(f, "exponent must be a nonnegative integer literal, found {s}")
            }
            ParseErrorKind::ZeroDenominator => f.write_str("zero denominator in rational literal"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    A,
    ADag,
    Num(Q, String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::A => "'a'".into(),
            Tok::ADag => "'a+'".into(),
            Tok::Num(_, s) => format!("number {s}"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(self, Tok::A | Tok::ADag | Tok::Num(..) | Tok::LParen)
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < src.len() {
        let ch = src[pos..].chars().next().expect("char boundary");
        let start = pos;
        pos += ch.len_utf8();
        let tok = match ch {
            c if c.is_whitespace() => continue,
            'a' => {
                let rest = &src[pos..];
                if rest.starts_with('+') {
                    pos += 1;
                    Tok::ADag
                } else if let Some(alt) = ['⁺', '†'].into_iter().find(|&c| rest.starts_with(c)) {
                    pos += alt.len_utf8();
                    Tok::ADag
                } else {
                    Tok::A
                }
            }
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '0'..='9' => {
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                let mut den = None;
                if pos + 1 < bytes.len() && bytes[pos] == b'/' && bytes[pos + 1].is_ascii_digit() {
                    let d0 = pos + 1;
                    pos = d0;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    den = Some(&src[d0..pos]);
                }
                let text = &src[start..pos];
                let num_end = den.map_or(pos, |d| pos - d.len() - 1);
                let n: BigInt = src[start..num_end].parse().expect("digits");
                let d: BigInt = den.map_or_else(|| BigInt::from(1), |d| d.parse().expect("digits"));
                if d.is_zero() {
                    return Err(ParseError {
                        offset: start,
                        kind: ParseErrorKind::ZeroDenominator,
                    });
                }
                Tok::Num(Q::new(n, d), text.to_string())
            }
            c => {
                return Err(ParseError {
                    offset: start,
                    kind: ParseErrorKind::InvalidCharacter(c),
                })
            }
        };
        out.push((tok, start));
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: Vec<&'static str>) -> ParseError {
        ParseError {
            offset: self.offset(),
            kind: ParseErrorKind::Unexpected {
                found: self.peek().describe(),
                expected,
            },
        }
    }

    fn expr(&mut self) -> Result<OpExpr, ParseError> {
        let mut terms = Vec::new();
        let first = if *self.peek() == Tok::Minus {
            self.bump();
            OpExpr::Neg(Box::new(self.term()?))
        } else {
            self.term()?
        };
        terms.push(first);
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    terms.push(OpExpr::Neg(Box::new(self.term()?)));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().expect("one term")
        } else {
            OpExpr::Add(terms)
        })
    }

    fn term(&mut self) -> Result<OpExpr, ParseError> {
        let mut factors = vec![self.factor()?];
        loop {
            if *self.peek() == Tok::Star {
                self.bump();
                factors.push(self.factor()?);
            } else if self.peek().starts_atom() {
                factors.push(self.factor()?);
            } else {
                break;
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().expect("one factor")
        } else {
            OpExpr::Mul(factors)
        })
    }

    fn factor(&mut self) -> Result<OpExpr, ParseError> {
        let atom = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(atom);
        }
        self.bump();
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(q, text) => {
                let exp = if q.is_integer() { q.to_integer().to_u32() } else { None };
                match exp {
                    Some(e) => {
                        self.bump();
                        Ok(OpExpr::Pow(Box::new(atom), e))
                    }
                    None => Err(ParseError {
                        offset,
                        kind: ParseErrorKind::NonIntegerExponent(text),
                    }),
                }
            }
            other => Err(ParseError {
                offset,
                kind: ParseErrorKind::NonIntegerExponent(other.describe()),
            }),
        }
    }

    fn atom(&mut self) -> Result<OpExpr, ParseError> {
        match self.peek().clone() {
            Tok::A => {
                self.bump();
                Ok(OpExpr::Letter(Letter::A))
            }
            Tok::ADag => {
                self.bump();
                Ok(OpExpr::Letter(Letter::ADag))
            }
            Tok::Num(q, _) => {
                self.bump();
                Ok(OpExpr::Scalar(q))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected(vec!["')'", "'+'", "'-'", "'*'", "'^'", "atom"]));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.unexpected(vec!["'a'", "'a+'", "number", "'('"])),
        }
    }
}

pub fn parse(src: &str) -> Result<OpExpr, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected(vec!["'+'", "'-'", "'*'", "'^'", "atom", "end of input"]));
    }
    Ok(e)
}

pub fn eval(e: &OpExpr) -> NormalForm {
    match e {
        OpExpr::Letter(Letter::A) => NormalForm::a(),
        OpExpr::Letter(Letter::ADag) => NormalForm::a_dag(),
        OpExpr::Scalar(q) => NormalForm::scalar(q.clone()),
        OpExpr::Pow(base, n) => eval(base).pow(*n),
        OpExpr::Mul(fs) => fs
            .iter()
            .fold(NormalForm::one(), |acc, f| acc.product(&eval(f))),
        OpExpr::Add(ts) => ts.iter().fold(NormalForm::zero(), |acc, t| &acc + &eval(t)),
        OpExpr::Neg(inner) => -&eval(inner),
    }
}

/// Parses and evaluates in one step.
pub fn parse_normal_form(src: &str) -> Result<NormalForm, ParseError> {
    parse(src).map(|e| eval(&e))
}

impl fmt::Display for OpExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpExpr::Letter(Letter::A) => f.write_str("a"),
            OpExpr::Letter(Letter::ADag) => f.write_str("a+"),
            OpExpr::Scalar(q) => f.write_str(&fmt_q(q)),
            OpExpr::Pow(b, n) => write!(f, "({b})^{n}"),
            OpExpr::Mul(fs) => {
                for (k, x) in fs.iter().enumerate() {
                    if k > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "({x})")?;
                }
                Ok(())
            }
            OpExpr::Add(ts) => {
                for (k, x) in ts.iter().enumerate() {
                    if k > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "({x})")?;
                }
                Ok(())
            }
            OpExpr::Neg(x) => write!(f, "-({x})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};
    use proptest::prelude::*;
    use Letter::{ADag, A};

    fn letter(l: Letter) -> OpExpr {
        OpExpr::Letter(l)
    }

    #[test]
    fn juxtaposition_is_multiplication() {
        assert_eq!(parse("a a+").unwrap(), OpExpr::Mul(vec![letter(A), letter(ADag)]));
        assert_eq!(parse("a*a+").unwrap(), OpExpr::Mul(vec![letter(A), letter(ADag)]));
    }

    #[test]
    fn plus_binds_to_adjacent_a() {
        assert_eq!(parse("a + a").unwrap(), OpExpr::Add(vec![letter(A), letter(A)]));
        assert_eq!(parse("a+ a").unwrap(), OpExpr::Mul(vec![letter(ADag), letter(A)]));
        assert_eq!(parse("a+ + a").unwrap(), OpExpr::Add(vec![letter(ADag), letter(A)]));
        assert_eq!(parse("a⁺ a").unwrap(), parse("a+ a").unwrap());
    }

    #[test]
    fn example_operator() {
        let e = parse("(a+)^2 a a+ + a+ a (a+)^2").unwrap();
        let sq = || OpExpr::Pow(Box::new(letter(ADag)), 2);
        assert_eq!(
            e,
            OpExpr::Add(vec![
                OpExpr::Mul(vec![sq(), letter(A), letter(ADag)]),
                OpExpr::Mul(vec![letter(ADag), letter(A), sq()]),
            ])
        );
        let f = eval(&e);
        assert_eq!(
            f,
            NormalForm::from_terms([((3, 1), int(2)), ((2, 0), int(3))])
        );
    }

    #[test]
    fn rejects_parenthesized_exponent() {
        let err = parse("a^(2)").unwrap_err();
        assert_eq!(err.offset, 2);
        assert!(matches!(err.kind, ParseErrorKind::NonIntegerExponent(_)));
        assert!(matches!(
            parse("a^3/2").unwrap_err().kind,
            ParseErrorKind::NonIntegerExponent(_)
        ));
    }

    #[test]
    fn located_errors() {
        let err = parse("a a+ +").unwrap_err();
        assert_eq!(err.offset, 6);
        match err.kind {
            ParseErrorKind::Unexpected { found, expected } => {
                assert_eq!(found, "end of input");
                assert!(expected.contains(&"'a'"));
            }
            k => panic!("unexpected kind {k:?}"),
        }
        assert_eq!(parse("(a").unwrap_err().offset, 2);
        assert_eq!(parse("a b").unwrap_err().kind, ParseErrorKind::InvalidCharacter('b'));
        assert_eq!(parse("").unwrap_err().offset, 0);
        assert_eq!(parse("1/0").unwrap_err().kind, ParseErrorKind::ZeroDenominator);
        assert!(parse("a )").is_err());
    }

    #[test]
    fn evaluation() {
        assert_eq!(
            parse_normal_form("a a+").unwrap(),
            NormalForm::from_terms([((1, 1), int(1)), ((0, 0), int(1))])
        );
        assert_eq!(
            parse_normal_form("a+ a a a+ a+").unwrap(),
            NormalForm::from_terms([((3, 2), int(1)), ((2, 1), int(4)), ((1, 0), int(2))])
        );
        assert!(parse_normal_form("0").unwrap().is_zero());
        assert_eq!(
            parse_normal_form("-3/2 a - a").unwrap(),
            NormalForm::term(0, 1, frac(-5, 2))
        );
        assert_eq!(parse_normal_form("(a+)^0").unwrap(), NormalForm::one());
    }

    fn arb_nf() -> impl Strategy<Value = NormalForm> {
        prop::collection::vec(((0u32..=4, 0u32..=4), -20i64..=20, 1i64..=6), 0..5).prop_map(|ts| {
            NormalForm::from_terms(ts.into_iter().map(|(k, n, d)| (k, frac(n, d))))
        })
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(f in arb_nf()) {
            prop_assert_eq!(parse_normal_form(&f.render()).unwrap(), f);
        }

        #[test]
        fn parser_never_panics(s in "[a+\\-*^() 0-9/]{0,16}") {
            let _ = parse(&s);
        }
    }
}
