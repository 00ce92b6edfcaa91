//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          (right-associative)
//! primary := integer | ident | ident '(' sum ')' | '(' sum ')'
//! ```
//!
//! `^` binds tighter than unary minus, so `-u^2` is `-(u^2)`.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::node::{Expr, Kernel};
use super::symbol::SymbolTable;
use super::ExprError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
}

impl<'a> Lexer<'a> {
    fn run(src: &'a str) -> Result<Vec<(Tok, usize)>, ExprError> {
        let mut lx = Lexer {
            src,
            toks: Vec::new(),
        };
        let bytes = src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            if c.is_ascii_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = lx.src[start..i].parse().expect("digits");
                lx.toks.push((Tok::Int(n), start));
            } else if c.is_ascii_alphabetic() {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                lx.toks
                    .push((Tok::Ident(lx.src[start..i].to_string()), start));
            } else if "+-*/^()".contains(c) {
                lx.toks.push((Tok::Op(c), i));
                i += 1;
            } else {
                return Err(ExprError::Syntax {
                    pos: i,
                    message: format!("unexpected character '{c}'"),
                });
            }
        }
        lx.toks.push((Tok::End, src.len()));
        Ok(lx.toks)
    }
}

struct Parser<'t> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    table: &'t SymbolTable,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            pos: self.pos(),
            message: message.into(),
        })
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut terms = vec![self.product()?];
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    terms.push(self.product()?);
                }
                Tok::Op('-') => {
                    self.bump();
                    terms.push(self.product()?.neg());
                }
                _ => break,
            }
        }
        Ok(Expr::add(terms))
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    acc = &acc * &self.unary()?;
                }
                Tok::Op('/') => {
                    self.bump();
                    let pos = self.pos();
                    let d = self.unary()?;
                    if d.is_zero() {
                        return Err(ExprError::Syntax {
                            pos,
                            message: "division by zero".into(),
                        });
                    }
                    acc = &acc / &d;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let exponent = self.unary()?;
        Ok(match exponent.as_num() {
            Some(q) => Expr::pow(base, q.clone()),
            // general powers a^b are carried as exp(b*log(a))
            None => Expr::exp(&exponent * &Expr::log(base)),
        })
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Int(n) => Ok(Expr::num(BigRational::from_integer(n))),
            Tok::Op('(') => {
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::Op('(') {
                    self.bump();
                    let arg = self.sum()?;
                    self.expect(')')?;
                    return match name.as_str() {
                        "exp" => Ok(Expr::exp(arg)),
                        "log" | "ln" => Ok(Expr::log(arg)),
                        "sqrt" => Ok(Expr::sqrt(arg)),
                        "sin" => Ok(Expr::fun(Kernel::Sin, arg)),
                        "cos" => Ok(Expr::fun(Kernel::Cos, arg)),
                        _ => Err(ExprError::Syntax {
                            pos,
                            message: format!("unknown function '{name}'"),
                        }),
                    };
                }
                match self.table.lookup(&name) {
                    Some(s) => Ok(Expr::sym(s)),
                    None => Err(ExprError::UnknownIdentifier { pos, name }),
                }
            }
            Tok::End => Err(ExprError::Syntax {
                pos,
                message: "unexpected end of input".into(),
            }),
            Tok::Op(c) => Err(ExprError::Syntax {
                pos,
                message: format!("unexpected '{c}'"),
            }),
        }
    }
}

/// Parses `text` into a normalized expression, resolving identifiers in `table`.
pub fn parse(text: &str, table: &SymbolTable) -> Result<Expr, ExprError> {
    let toks = Lexer::run(text)?;
    let mut p = Parser { toks, at: 0, table };
    let e = p.sum()?;
    if *p.peek() != Tok::End {
        return p.err("trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::node::frac;

    fn table() -> SymbolTable {
        let mut t = SymbolTable::with_dependents(&["u", "v"]);
        t.add_parameter("a");
        t
    }

    #[test]
    fn burgers_rhs() {
        let t = table();
        let e = parse("u_xx + u_x^2", &t).unwrap();
        let expected = Expr::add([
            Expr::sym(t.jet(1, 2)),
            Expr::powi(Expr::sym(t.jet(1, 1)), 2),
        ]);
        assert_eq!(e, expected);
    }

    #[test]
    fn zero_and_rational_literals() {
        let t = table();
        assert_eq!(parse("0", &t).unwrap(), Expr::zero());
        let e = parse("(1/2)*v^2", &t).unwrap();
        assert_eq!(
            e,
            Expr::mul([Expr::frac(1, 2), Expr::powi(Expr::sym(t.jet(2, 0)), 2)])
        );
    }

    #[test]
    fn precedence() {
        let t = table();
        let u = Expr::sym(t.jet(1, 0));
        assert_eq!(parse("-u^2", &t).unwrap(), Expr::powi(u.clone(), 2).neg());
        assert_eq!(parse("u^2^3", &t).unwrap(), Expr::powi(u.clone(), 8));
        assert_eq!(parse("u^-1", &t).unwrap(), u.clone().recip());
        assert_eq!(
            parse("1/2/u", &t).unwrap(),
            Expr::mul([Expr::frac(1, 2), u.clone().recip()])
        );
        assert_eq!(
            parse("sqrt(u)", &t).unwrap(),
            Expr::pow(u.clone(), frac(1, 2))
        );
        let a = Expr::sym(t.lookup("a").unwrap());
        assert_eq!(parse("u^a", &t).unwrap(), Expr::exp(&a * &Expr::log(u)));
    }

    #[test]
    fn errors_carry_positions() {
        let t = table();
        assert!(matches!(
            parse("u + w", &t),
            Err(ExprError::UnknownIdentifier { pos: 4, .. })
        ));
        assert!(matches!(
            parse("u + ", &t),
            Err(ExprError::Syntax { pos: 4, .. })
        ));
        assert!(matches!(parse("(u", &t), Err(ExprError::Syntax { .. })));
        assert!(matches!(
            parse("u $ 2", &t),
            Err(ExprError::Syntax { pos: 2, .. })
        ));
        assert!(matches!(
            parse("foo(u)", &t),
            Err(ExprError::Syntax { pos: 0, .. })
        ));
    }

    #[test]
    fn printing_round_trips() {
        let t = table();
        for src in [
            "u_xx + u_x^2",
            "-2*u_x*u_xx",
            "(3*a*u*u_x*u_xx - 2*a*u_x^3)/u^2",
            "exp(-(x - a)^2/(4*t))/sqrt(4*t)",
            "log((a + u_x)/(a - u_x))/(2*a)",
            "u^(3/2) - 1/(u - 1)^2",
            "-u",
            "(-2)^(1/3)",
        ] {
            let e = parse(src, &t).unwrap();
            let printed = e.to_string();
            let back = parse(&printed, &t).unwrap();
            assert_eq!(back, e, "{src} -> {printed}");
        }
    }
}
