//! Solving a level set F = c for one jet coordinate.

use num_integer::Integer;
use num_traits::One;

use crate::error::{Error, Result};
use crate::expr::{
    diff, eval, simplify, Expr, Kernel, Node, Point, RatContext, RatFun, Rational, Symbol,
};

/// `w = value` on the level set, plus constants introduced for constant
/// exponentials (`k = exp(E/2)` replaces `exp(E)` by `k^2`).
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSolution {
    pub var: Symbol,
    pub value: Expr,
    pub derived: Vec<(Symbol, Expr)>,
    /// Coordinates that were also solvable.
    pub alternatives: Vec<Symbol>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Stage {
    /// Only coordinates that enter affinely.
    Affine,
    /// Unwinding invertible operations, linear algebraic fallback.
    Peel,
    /// Quadratic fallback, branch chosen at the base point.
    Quadratic,
}

/// Solves `f = c` for the first usable coordinate of `candidates` (which the
/// caller orders by preference). Affine occurrences win over nested ones.
pub fn solve_level_set(
    f: &Expr,
    c: &Expr,
    candidates: &[Symbol],
    base: &Point,
    derived_prefix: &str,
) -> Result<LevelSolution> {
    for stage in [Stage::Affine, Stage::Peel, Stage::Quadratic] {
        let mut found: Option<(Symbol, Expr)> = None;
        let mut alternatives = Vec::new();
        for w in candidates {
            if !f.contains(w) {
                continue;
            }
            if stage == Stage::Affine && simplify(&diff(f, w)).contains(w) {
                continue;
            }
            if let Some(v) = isolate(f.clone(), c.clone(), w, base, stage == Stage::Quadratic) {
                if found.is_none() {
                    found = Some((w.clone(), v));
                } else {
                    alternatives.push(w.clone());
                }
            }
        }
        if let Some((var, value)) = found {
            // name constants before normalizing, which would split exp(E) into powers
            let (value, derived) = name_constant_exponentials(&value, derived_prefix);
            return Ok(LevelSolution {
                var,
                value: simplify(&value),
                derived,
                alternatives,
            });
        }
    }
    Err(Error::LevelSet {
        equation: format!("{f} = {c}"),
        reason: "no chart coordinate can be isolated".into(),
    })
}

fn sign_at(e: &Expr, base: &Point) -> f64 {
    match eval(e, base) {
        Ok(v) if v < 0.0 => -1.0,
        _ => 1.0,
    }
}

/// Unwinds `lhs = rhs` towards `w`.
fn isolate(
    mut lhs: Expr,
    mut rhs: Expr,
    w: &Symbol,
    base: &Point,
    quadratic: bool,
) -> Option<Expr> {
    loop {
        if lhs.as_sym() == Some(w) {
            return Some(rhs);
        }
        match lhs.node() {
            Node::Add(ts) => {
                let (with, without): (Vec<Expr>, Vec<Expr>) =
                    ts.iter().cloned().partition(|t| t.contains(w));
                rhs = &rhs - &Expr::add(without);
                if with.len() == 1 {
                    lhs = with[0].clone();
                } else if let Some(comb) = combine_logs(&with, w) {
                    lhs = comb;
                } else {
                    return algebraic(&Expr::add(with), &rhs, w, base, quadratic);
                }
            }
            Node::Mul(fs) => {
                let (with, without): (Vec<Expr>, Vec<Expr>) =
                    fs.iter().cloned().partition(|t| t.contains(w));
                rhs = &rhs / &Expr::mul(without);
                if with.len() == 1 {
                    lhs = with[0].clone();
                } else {
                    return algebraic(&Expr::mul(with), &rhs, w, base, quadratic);
                }
            }
            Node::Pow(b, q) => {
                let inv = q.recip();
                rhs = if q.numer().is_odd() {
                    Expr::pow(rhs, inv)
                } else {
                    // even powers: take the branch through the base point
                    let s = sign_at(b, base);
                    let root = Expr::pow(rhs, inv);
                    if s < 0.0 {
                        root.neg()
                    } else {
                        root
                    }
                };
                lhs = b.clone();
            }
            Node::Fun(Kernel::Log, a) => {
                rhs = Expr::exp(rhs);
                lhs = a.clone();
            }
            Node::Fun(Kernel::Exp, a) => {
                rhs = Expr::log(rhs);
                lhs = a.clone();
            }
            _ => return algebraic(&lhs, &rhs, w, base, quadratic),
        }
    }
}

/// `Σ r_k log(A_k)` with rational ratios `r_k / r_1` becomes `r_1 log(Π A_k^{r_k/r_1})`.
fn combine_logs(terms: &[Expr], w: &Symbol) -> Option<Expr> {
    let mut parts = Vec::new();
    for t in terms {
        let fs = t.factors();
        let logs: Vec<&Expr> = fs
            .iter()
            .filter(|f| matches!(f.node(), Node::Fun(Kernel::Log, _)))
            .collect();
        if logs.len() != 1 {
            return None;
        }
        let Node::Fun(_, arg) = logs[0].node() else {
            return None;
        };
        let rest = Expr::mul(
            fs.iter()
                .filter(|f| !matches!(f.node(), Node::Fun(Kernel::Log, _)))
                .cloned(),
        );
        if rest.contains(w) {
            return None;
        }
        parts.push((rest, arg.clone()));
    }
    let r1 = parts[0].0.clone();
    let mut args = Vec::new();
    for (r, a) in &parts {
        let ratio = simplify(&(r / &r1));
        let q = ratio.as_num()?.clone();
        args.push(Expr::pow(a.clone(), q));
    }
    Some(&r1 * &Expr::log(Expr::mul(args)))
}

/// Solves a rational equation that is linear (or, if allowed, quadratic) in `w`.
fn algebraic(lhs: &Expr, rhs: &Expr, w: &Symbol, base: &Point, quadratic: bool) -> Option<Expr> {
    let e = simplify(&(lhs - rhs));
    let ctx = RatContext::new(std::slice::from_ref(&e));
    if !ctx.vars_hiding(w).is_empty() {
        return None;
    }
    let v = ctx.var_of(w)?;
    let r = ctx.to_ratfun(&e)?;
    let coeffs = r.num().coefficients_in(v);
    let nv = ctx.nvars();
    let rf = |k: usize| {
        RatFun::from_poly(
            coeffs
                .get(k)
                .cloned()
                .unwrap_or_else(|| crate::expr::poly::Poly::zero(nv)),
        )
    };
    match coeffs.len() {
        2 => Some(ctx.to_expr(&rf(0).neg().div(&rf(1)))),
        3 if quadratic => {
            let (a, b, c) = (rf(2), rf(1), rf(0));
            let disc = b
                .mul(&b)
                .sub(&a.mul(&c).scale(&Rational::from_integer(4.into())));
            let s = Expr::sqrt(ctx.to_expr(&disc));
            let two_a = ctx.to_expr(&a.scale(&Rational::from_integer(2.into())));
            let mb = ctx.to_expr(&b.neg());
            let roots = [&(&mb + &s) / &two_a, &(&mb - &s) / &two_a];
            let target = base.get(w).copied()?;
            roots
                .into_iter()
                .filter_map(|r| eval(&r, base).ok().map(|v| ((v - target).abs(), r)))
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map(|(_, r)| r)
        }
        _ => None,
    }
}

/// Replaces each constant-only `exp(E)` by `k^2` and records `k = exp(E/2)`.
fn name_constant_exponentials(e: &Expr, prefix: &str) -> (Expr, Vec<(Symbol, Expr)>) {
    fn walk(e: &Expr, prefix: &str, found: &mut Vec<(Expr, Symbol)>) -> Expr {
        match e.node() {
            Node::Fun(Kernel::Exp, a)
                if !a.free_symbols().is_empty()
                    && a.free_symbols().iter().all(|s| s.is_constant()) =>
            {
                let k = match found.iter().find(|(x, _)| x == a) {
                    Some((_, k)) => k.clone(),
                    None => {
                        let name = if found.is_empty() {
                            prefix.to_string()
                        } else {
                            format!("{prefix}_{}", found.len() + 1)
                        };
                        let k = Symbol::level(&name);
                        found.push((a.clone(), k.clone()));
                        k
                    }
                };
                Expr::powi(Expr::sym(k), 2)
            }
            Node::Num(_) | Node::Sym(_) => e.clone(),
            _ => e.map_children(|c| walk(c, prefix, found)),
        }
    }
    let mut found = Vec::new();
    let out = walk(e, prefix, &mut found);
    let derived = found
        .into_iter()
        .map(|(a, k)| (k, Expr::exp(a.scale(&Rational::new(One::one(), 2.into())))))
        .collect();
    (out, derived)
}
