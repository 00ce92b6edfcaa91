//! Symbolic antiderivatives in one variable, other symbols held constant.
//!
//! Rational integrands go through Hermite reduction and a partial-fraction
//! log part over factors found from hints, linear pieces and quadratics.
//! Exponential-polynomial products and derivative-divides patterns are
//! handled separately; anything else is reported as not integrable.

use num_traits::{One, Signed, Zero};

use super::upoly::{ext_gcd, gcd, solve_diophantine, UPoly};
use crate::error::{Error, Result};
use crate::expr::{
    diff, eval, simplify, Expr, Kernel, Node, Point, RatContext, RatFun, Rational, Symbol,
};

/// `log(e)` with the argument sign fixed so that it is positive at `base`.
pub(crate) fn oriented_log(e: &Expr, base: &Point) -> Expr {
    match eval(e, base) {
        Ok(v) if v < 0.0 => Expr::log(simplify(&e.neg())),
        _ => Expr::log(e.clone()),
    }
}

fn not_integrable(f: &Expr, var: &Symbol) -> Error {
    Error::NonIntegrable {
        integrand: f.to_string(),
        var: var.to_string(),
    }
}

/// An antiderivative of `f` with respect to `var`. Logarithm arguments are
/// oriented to be positive at `base`.
pub fn antiderivative(f: &Expr, var: &Symbol, base: &Point) -> Result<Expr> {
    let s = simplify(f);
    if !s.contains(var) {
        return Ok(&s * &Expr::sym(var.clone()));
    }
    let hints = denominator_hints(f, var);
    if let Some(r) = rational_integral(&s, var, &hints, base)? {
        return Ok(r);
    }
    if let Some(r) = special_integral(&s, var, base) {
        return Ok(r);
    }
    // split over the numerator terms and treat rational pieces together
    let (num, den) = numerator_denominator(&s);
    let mut rational = Vec::new();
    let mut out = Vec::new();
    for t in num.terms() {
        let piece = &t * &den;
        let ctx = RatContext::new(std::slice::from_ref(&piece));
        if ctx.vars_hiding(var).is_empty() {
            rational.push(piece);
        } else if let Some(r) = special_integral(&piece, var, base) {
            out.push(r);
        } else {
            return Err(not_integrable(f, var));
        }
    }
    if !rational.is_empty() {
        let r = simplify(&Expr::add(rational));
        match rational_integral(&r, var, &hints, base)? {
            Some(v) => out.push(v),
            None => return Err(not_integrable(f, var)),
        }
    }
    Ok(Expr::add(out))
}

/// Splits a normal form into numerator and reciprocal-denominator factors.
fn numerator_denominator(e: &Expr) -> (Expr, Expr) {
    let mut num = Vec::new();
    let mut den = Vec::new();
    for f in e.factors() {
        match f.node() {
            Node::Pow(_, q) if q.is_negative() => den.push(f),
            _ => num.push(f),
        }
    }
    (Expr::mul(num), Expr::mul(den))
}

/// Bases of negative powers that involve `var`: candidate factors of the
/// integrand's denominator.
fn denominator_hints(f: &Expr, var: &Symbol) -> Vec<Expr> {
    fn walk(e: &Expr, var: &Symbol, out: &mut Vec<Expr>) {
        match e.node() {
            Node::Num(_) | Node::Sym(_) => {}
            Node::Add(cs) | Node::Mul(cs) => cs.iter().for_each(|c| walk(c, var, out)),
            Node::Pow(b, q) => {
                if q.is_negative() && b.contains(var) {
                    for g in b.factors() {
                        if g.contains(var) && !out.contains(&g) {
                            out.push(g);
                        }
                    }
                }
                walk(b, var, out);
            }
            Node::Fun(_, a) => walk(a, var, out),
        }
    }
    let mut out = Vec::new();
    walk(f, var, &mut out);
    out
}

/// Exact square root of a rational function, when it exists.
fn sqrt_ratfun(r: &RatFun) -> Option<RatFun> {
    Some(RatFun::new(r.num().sqrt()?, r.den().sqrt()?))
}

/// Integral of a rational function of `var`; `None` when `var` also hides in
/// kernels or radicals.
fn rational_integral(f: &Expr, var: &Symbol, hints: &[Expr], base: &Point) -> Result<Option<Expr>> {
    if !RatContext::new(std::slice::from_ref(f))
        .vars_hiding(var)
        .is_empty()
    {
        return Ok(None);
    }
    let usable: Vec<Expr> = hints
        .iter()
        .filter(|h| {
            RatContext::new(std::slice::from_ref(*h))
                .vars_hiding(var)
                .is_empty()
        })
        .cloned()
        .collect();
    let mut all = vec![f.clone()];
    all.extend(usable.iter().cloned());
    let ctx = RatContext::new(&all);
    let (Some(v), Some(r)) = (ctx.var_of(var), ctx.to_ratfun(f)) else {
        return Ok(None);
    };
    let nv = ctx.nvars();
    let num = UPoly::from_poly(r.num(), v);
    let den = UPoly::from_poly(r.den(), v);
    let (q, a) = num.divrem(&den);
    // polynomial part
    let x = RatFun::var(nv, v);
    let mut rat = RatFun::zero(nv);
    for k in (0..=q.deg()).rev() {
        let c = q
            .coeff(k)
            .scale(&Rational::new(1.into(), ((k + 1) as i64).into()));
        rat = rat.add(&c.mul(&x.powi(k as i64 + 1)));
    }
    if a.is_zero() {
        return Ok(Some(ctx.to_expr(&rat)));
    }
    let (g, a, dstar) = hermite(&a, &den, v);
    rat = rat.add(&g);
    let mut terms = vec![ctx.to_expr(&rat)];
    if !a.is_zero() {
        let hint_polys: Vec<UPoly> = usable
            .iter()
            .filter_map(|h| ctx.to_ratfun(h))
            .filter(|h| h.den().as_constant().is_some())
            .map(|h| UPoly::from_poly(h.num(), v))
            .collect();
        match log_part(&a, &dstar, &hint_polys, v, &ctx, base) {
            Some(e) => terms.push(e),
            None => return Err(not_integrable(f, var)),
        }
    }
    Ok(Some(Expr::add(terms)))
}

/// Mack's linear Hermite reduction: ∫A/D = g + ∫A*/D* with D* squarefree.
fn hermite(a: &UPoly, d: &UPoly, v: usize) -> (RatFun, UPoly, UPoly) {
    let nv = d.coeff(0).nvars();
    let mut a = a.clone();
    let mut g = RatFun::zero(nv);
    let mut dm = gcd(d, &d.derivative());
    let ds = d.quo(&dm);
    while dm.deg() > 0 {
        let d2 = gcd(&dm, &dm.derivative());
        let dms = dm.quo(&d2);
        let lhs = ds.mul(&dm.derivative()).quo(&dm).neg();
        let (b, c) = solve_diophantine(&lhs, &dms, &a);
        a = c.sub(&b.derivative().mul(&ds.quo(&dms)));
        g = g.add(&b.to_ratfun(v).div(&dm.to_ratfun(v)));
        dm = d2;
    }
    (g, a, ds)
}

/// Splits monic quadratics with a square discriminant into linear factors.
fn split_quadratic(p: &UPoly) -> Option<(UPoly, UPoly)> {
    if p.deg() != 2 {
        return None;
    }
    let nv = p.coeff(0).nvars();
    let b = p.coeff(1);
    let c = p.coeff(0);
    let disc = b.mul(&b).sub(&c.scale(&Rational::from_integer(4.into())));
    let s = sqrt_ratfun(&disc)?;
    let half = Rational::new(1.into(), 2.into());
    let r1 = b.neg().add(&s).scale(&half);
    let r2 = b.neg().sub(&s).scale(&half);
    let one = RatFun::one(nv);
    Some((
        UPoly::from_coeffs(vec![r1.neg(), one.clone()], nv),
        UPoly::from_coeffs(vec![r2.neg(), one], nv),
    ))
}

/// ∫ A/D for squarefree D and deg A < deg D.
fn log_part(
    a: &UPoly,
    d: &UPoly,
    hints: &[UPoly],
    v: usize,
    ctx: &RatContext,
    base: &Point,
) -> Option<Expr> {
    let a = a.scale(&d.lc().recip());
    let d = d.monic();
    let mut pieces = vec![d.clone()];
    for h in hints {
        let mut next = Vec::new();
        for p in pieces {
            let g = gcd(&p, h);
            if g.deg() > 0 && g.deg() < p.deg() {
                next.push(p.quo(&g).monic());
                next.push(g);
            } else {
                next.push(p);
            }
        }
        pieces = next;
    }
    let mut split = Vec::new();
    for p in pieces {
        match split_quadratic(&p) {
            Some((l1, l2)) => {
                split.push(l1);
                split.push(l2);
            }
            None => split.push(p),
        }
    }
    let x = Expr::sym(ctx.atom_expr(v).as_sym()?.clone());
    let mut out = Vec::new();
    for p in &split {
        let cofactor = d.quo(p);
        let (s, _, _) = ext_gcd(&cofactor, p);
        let aj = a.mul(&s).divrem(p).1;
        if aj.is_zero() {
            continue;
        }
        let pe = ctx.to_expr(&p.to_ratfun(v));
        match p.deg() {
            1 => out.push(&ctx.to_expr(&aj.coeff(0)) * &oriented_log(&pe, base)),
            2 => {
                // A = αξ + β over P = ξ² + bξ + c
                let alpha = aj.coeff(1);
                let beta = aj.coeff(0);
                let b = p.coeff(1);
                let lambda = alpha.scale(&Rational::new(1.into(), 2.into()));
                let mu = beta.sub(&lambda.mul(&b));
                if !lambda.is_zero() {
                    out.push(&ctx.to_expr(&lambda) * &oriented_log(&pe, base));
                }
                if !mu.is_zero() {
                    let disc = b
                        .mul(&b)
                        .sub(&p.coeff(0).scale(&Rational::from_integer(4.into())));
                    let de = ctx.to_expr(&disc);
                    if eval(&de, base).is_ok_and(|w| w < 0.0) {
                        return None;
                    }
                    let s = Expr::sqrt(de);
                    let lin = &(&Expr::int(2) * &x) + &ctx.to_expr(&b);
                    let ratio = &(&lin - &s) / &(&lin + &s);
                    out.push(&(&ctx.to_expr(&mu) / &s) * &oriented_log(&ratio, base));
                }
            }
            _ => {
                // only A = k·P'
                let dp = p.derivative();
                let k = aj.lc().div(&dp.lc());
                if !aj.sub(&dp.scale(&k)).is_zero() {
                    return None;
                }
                out.push(&ctx.to_expr(&k) * &oriented_log(&pe, base));
            }
        }
    }
    Some(Expr::add(out))
}

/// exp(affine)·polynomial and derivative-divides patterns.
fn special_integral(f: &Expr, var: &Symbol, base: &Point) -> Option<Expr> {
    exp_poly(f, var).or_else(|| derivative_divides(f, var, base))
}

fn is_polynomial_in(e: &Expr, var: &Symbol) -> bool {
    let ctx = RatContext::new(std::slice::from_ref(e));
    if !ctx.vars_hiding(var).is_empty() {
        return false;
    }
    match (ctx.var_of(var), ctx.to_ratfun(e)) {
        (Some(v), Some(r)) => !r.den().uses_var(v),
        (None, Some(_)) => true,
        _ => false,
    }
}

fn exp_poly(f: &Expr, var: &Symbol) -> Option<Expr> {
    let fs = f.factors();
    let idx: Vec<usize> = fs
        .iter()
        .enumerate()
        .filter(|(_, g)| matches!(g.node(), Node::Fun(Kernel::Exp, a) if a.contains(var)))
        .map(|(i, _)| i)
        .collect();
    if idx.len() != 1 {
        return None;
    }
    let Node::Fun(_, arg) = fs[idx[0]].node() else {
        unreachable!()
    };
    let slope = simplify(&diff(arg, var));
    if slope.contains(var) || slope.is_zero() {
        return None;
    }
    let p = Expr::mul(
        fs.iter()
            .enumerate()
            .filter(|(i, _)| *i != idx[0])
            .map(|(_, g)| g.clone()),
    );
    if !is_polynomial_in(&p, var) {
        return None;
    }
    // ∫ P e^{aξ+b} = e^{aξ+b} Σ (-1)^k P^{(k)} / a^{k+1}
    let mut terms = Vec::new();
    let mut dk = simplify(&p);
    let mut sign = Expr::one();
    let mut ak = slope.clone();
    while !dk.is_zero() {
        terms.push(&(&sign * &dk) / &ak);
        dk = simplify(&diff(&dk, var));
        sign = sign.neg();
        ak = &ak * &slope;
    }
    Some(simplify(&(&fs[idx[0]] * &Expr::add(terms))))
}

fn derivative_divides(f: &Expr, var: &Symbol, base: &Point) -> Option<Expr> {
    for g in f.factors() {
        match g.node() {
            Node::Pow(b, q) if b.contains(var) => {
                let db = diff(b, var);
                if db.is_zero() {
                    continue;
                }
                let k = simplify(&(&(f / &g) / &db));
                if k.contains(var) {
                    continue;
                }
                let q1 = q + Rational::one();
                return Some(if q1.is_zero() {
                    &k * &oriented_log(b, base)
                } else {
                    &k * &Expr::pow(b.clone(), q1.clone()).scale(&q1.recip())
                });
            }
            Node::Fun(Kernel::Exp, a) if a.contains(var) => {
                let k = simplify(&(&(f / &g) / &diff(a, var)));
                if !k.contains(var) {
                    return Some(&k * &g);
                }
            }
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, SymbolTable, ZeroTest};

    fn table() -> SymbolTable {
        let mut t = SymbolTable::with_dependents(&["u"]);
        t.add_parameter("k");
        t
    }

    fn check(f: &str, var: &str) -> Expr {
        let t = table();
        let f = parse(f, &t).unwrap();
        let var = t.lookup(var).unwrap();
        let base: Point = f
            .free_symbols()
            .into_iter()
            .chain([var.clone()])
            .map(|s| (s, 1.3))
            .collect();
        let big = antiderivative(&f, &var, &base).unwrap();
        let residual = &diff(&big, &var) - &f;
        assert!(
            ZeroTest::default().check(&residual).unwrap().is_zero(),
            "d/d{var} {big} != {f}"
        );
        big
    }

    #[test]
    fn rational_integrands() {
        check("u_x^3 - 2*u_x + k", "u_x");
        check("1/(k^2 - u_x^2)", "u_x");
        check("-u_x/(u_xx + u_x^2)", "u_x");
        check("1/u_x^2 + 1/(u_x + 1)", "u_x");
        check("(2*u_x + 1)/(u_x^2 + u_x + 3)^2", "u_x");
        check("1/(u_x^2 - 2)", "u_x");
        check("u/(u*u_xx - u_x^2)", "u_xx");
    }

    #[test]
    fn exponential_and_substitution_patterns() {
        check("x^2*exp(2*x + k)", "x");
        check("exp(u)/(1 + exp(u))", "u");
        check("u_x*exp(u_x^2)", "u_x");
    }

    #[test]
    fn logs_are_oriented() {
        let t = table();
        let f = parse("1/(k - u_x)", &t).unwrap();
        let ux = t.lookup("u_x").unwrap();
        let base: Point = [(ux.clone(), 1.0), (Symbol::param("k"), 2.0)]
            .into_iter()
            .collect();
        let big = antiderivative(&f, &ux, &base).unwrap();
        assert!(eval(&big, &base).is_ok());
    }

    #[test]
    fn reports_non_integrable() {
        let t = table();
        let f = parse("1/(u_x^3 + u_x + 1)", &t).unwrap();
        let ux = t.lookup("u_x").unwrap();
        assert!(matches!(
            antiderivative(&f, &ux, &Point::new()),
            Err(Error::NonIntegrable { .. })
        ));
        let g = parse("exp(u_x^2)", &t).unwrap();
        assert!(matches!(
            antiderivative(&g, &ux, &Point::new()),
            Err(Error::NonIntegrable { .. })
        ));
    }
}
