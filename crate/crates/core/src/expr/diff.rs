use super::node::{rat, Expr, Kernel, Node};
use super::symbol::Symbol;

/// Partial derivative ∂e/∂s.
pub fn diff(e: &Expr, s: &Symbol) -> Expr {
    if !e.contains(s) {
        return Expr::zero();
    }
    match e.node() {
        Node::Num(_) => Expr::zero(),
        Node::Sym(t) => {
            if t == s {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Add(ts) => Expr::add(ts.iter().map(|t| diff(t, s))),
        Node::Mul(fs) => {
            let mut terms = Vec::with_capacity(fs.len());
            for (i, f) in fs.iter().enumerate() {
                let df = diff(f, s);
                if df.is_zero() {
                    continue;
                }
                let mut prod: Vec<Expr> = Vec::with_capacity(fs.len());
                prod.push(df);
                prod.extend(
                    fs.iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, g)| g.clone()),
                );
                terms.push(Expr::mul(prod));
            }
            Expr::add(terms)
        }
        Node::Pow(b, q) => {
            let db = diff(b, s);
            Expr::mul([Expr::num(q.clone()), Expr::pow(b.clone(), q - rat(1)), db])
        }
        Node::Fun(k, a) => {
            let da = diff(a, s);
            let outer = match k {
                Kernel::Exp => e.clone(),
                Kernel::Log => a.clone().recip(),
                Kernel::Sin => Expr::fun(Kernel::Cos, a.clone()),
                Kernel::Cos => Expr::fun(Kernel::Sin, a.clone()).neg(),
            };
            &outer * &da
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::expr::SymbolTable;

    #[test]
    fn elementary_rules() {
        let t = SymbolTable::with_dependents(&["u"]);
        let u = t.lookup("u").unwrap();
        let p = |s: &str| parse(s, &t).unwrap();
        assert_eq!(diff(&p("u^3 + 2*u*x"), &u), p("3*u^2 + 2*x"));
        assert_eq!(diff(&p("log(u)"), &u), p("1/u"));
        assert_eq!(diff(&p("exp(2*u)"), &u), p("2*exp(2*u)"));
        assert_eq!(diff(&p("sqrt(u)"), &u), p("1/(2*sqrt(u))"));
        assert_eq!(diff(&p("sin(u)"), &u), p("cos(u)"));
        assert_eq!(diff(&p("x*t"), &u), Expr::zero());
    }
}
