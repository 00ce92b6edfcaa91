use std::fmt;

use num_traits::{One, Signed};

use super::node::{Expr, Node, Rational};

// Output is valid input for the expression parser.

fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Prec {
    Sum = 0,
    Product = 1,
    Unary = 2,
    Power = 3,
}

fn write_prec(e: &Expr, ctx: Prec, out: &mut String) {
    let (text, prec) = render(e);
    if prec < ctx {
        out.push('(');
        out.push_str(&text);
        out.push(')');
    } else {
        out.push_str(&text);
    }
}

fn render(e: &Expr) -> (String, Prec) {
    match e.node() {
        Node::Num(q) => {
            if q.is_negative() {
                (format!("-{}", fmt_rational(&-q)), Prec::Unary)
            } else if q.is_integer() {
                (fmt_rational(q), Prec::Power)
            } else {
                (fmt_rational(q), Prec::Product)
            }
        }
        Node::Sym(s) => (s.name().to_string(), Prec::Power),
        Node::Fun(k, a) => {
            let mut s = format!("{}(", k.name());
            write_prec(a, Prec::Sum, &mut s);
            s.push(')');
            (s, Prec::Power)
        }
        Node::Pow(b, p) => {
            let mut s = String::new();
            if *p == Rational::new(1.into(), 2.into()) {
                s.push_str("sqrt(");
                write_prec(b, Prec::Sum, &mut s);
                s.push(')');
                return (s, Prec::Power);
            }
            if p.is_negative() {
                // b^(-n) prints as 1/b^n
                s.push_str("1/");
                let inv = Expr::pow(b.clone(), -p);
                write_prec(&inv, Prec::Power, &mut s);
                return (s, Prec::Product);
            }
            write_prec(b, Prec::Power, &mut s);
            s.push('^');
            if p.is_integer() {
                s.push_str(&fmt_rational(p));
            } else {
                s.push('(');
                s.push_str(&fmt_rational(p));
                s.push(')');
            }
            (s, Prec::Power)
        }
        Node::Mul(_) => render_product(e),
        Node::Add(ts) => {
            let mut s = String::new();
            for (i, t) in ts.iter().enumerate() {
                let (c, rest) = t.split_coeff();
                if i > 0 {
                    if c.is_negative() {
                        s.push_str(" - ");
                        let pos = if rest.is_one() {
                            Expr::num(-c)
                        } else {
                            Expr::mul([Expr::num(-c), rest])
                        };
                        write_prec(&pos, Prec::Product, &mut s);
                    } else {
                        s.push_str(" + ");
                        write_prec(t, Prec::Product, &mut s);
                    }
                } else {
                    write_prec(t, Prec::Sum, &mut s);
                }
            }
            (s, Prec::Sum)
        }
    }
}

fn render_product(e: &Expr) -> (String, Prec) {
    let (c, rest) = e.split_coeff();
    let mut numer: Vec<Expr> = Vec::new();
    let mut denom: Vec<Expr> = Vec::new();
    for f in rest.factors() {
        match f.node() {
            Node::Pow(b, p) if p.is_negative() => denom.push(Expr::pow(b.clone(), -p)),
            _ => numer.push(f),
        }
    }
    let negative = c.is_negative();
    let c = c.abs();
    let cn = Rational::from_integer(c.numer().clone());
    let cd = Rational::from_integer(c.denom().clone());
    let mut s = String::new();
    if negative {
        s.push('-');
    }
    let mut parts: Vec<String> = Vec::new();
    if !cn.is_one() || numer.is_empty() {
        parts.push(fmt_rational(&cn));
    }
    for f in &numer {
        let mut p = String::new();
        write_prec(f, Prec::Power, &mut p);
        parts.push(p);
    }
    s.push_str(&parts.join("*"));
    let mut dparts: Vec<String> = Vec::new();
    if !cd.is_one() {
        dparts.push(fmt_rational(&cd));
    }
    for f in &denom {
        let mut p = String::new();
        write_prec(f, Prec::Power, &mut p);
        dparts.push(p);
    }
    if !dparts.is_empty() {
        s.push('/');
        if dparts.len() == 1 {
            s.push_str(&dparts[0]);
        } else {
            s.push('(');
            s.push_str(&dparts.join("*"));
            s.push(')');
        }
    }
    (s, if negative { Prec::Unary } else { Prec::Product })
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (s, _) = render(self);
        f.write_str(&s)
    }
}
