use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::symbol::Symbol;

pub type Rational = BigRational;

/// Elementary kernels. `sqrt` is not a kernel: it normalizes to `^(1/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kernel {
    Exp,
    Log,
    Sin,
    Cos,
}

impl Kernel {
    pub fn name(self) -> &'static str {
        match self {
            Kernel::Exp => "exp",
            Kernel::Log => "log",
            Kernel::Sin => "sin",
            Kernel::Cos => "cos",
        }
    }
}

#[derive(Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Num(Rational),
    Sym(Symbol),
    /// At least two terms; at most one numeric term, stored first.
    Add(Vec<Expr>),
    /// At least two factors; at most one numeric factor, stored first.
    Mul(Vec<Expr>),
    /// Exponent is never 0 or 1.
    Pow(Expr, Rational),
    Fun(Kernel, Expr),
}

/// Immutable, normalized symbolic expression.
///
/// Every constructor normalizes: sums and products are flattened,
/// constant-folded, like terms/factors are collected, and operands are
/// sorted under [`Ord`]. Normalizing an already normal expression is the
/// identity, so structural equality is meaningful.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Expr(Arc<Node>);

fn kind_rank(n: &Node) -> u8 {
    match n {
        Node::Num(_) => 0,
        Node::Sym(_) => 1,
        Node::Pow(..) => 2,
        Node::Mul(_) => 3,
        Node::Add(_) => 4,
        Node::Fun(..) => 5,
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        let (a, b) = (self.node(), other.node());
        kind_rank(a).cmp(&kind_rank(b)).then_with(|| match (a, b) {
            (Node::Num(x), Node::Num(y)) => x.cmp(y),
            (Node::Sym(x), Node::Sym(y)) => x.cmp(y),
            (Node::Add(x), Node::Add(y)) | (Node::Mul(x), Node::Mul(y)) => x.cmp(y),
            (Node::Pow(b1, e1), Node::Pow(b2, e2)) => b1.cmp(b2).then_with(|| e1.cmp(e2)),
            (Node::Fun(k1, a1), Node::Fun(k2, a2)) => k1.cmp(k2).then_with(|| a1.cmp(a2)),
            _ => unreachable!("kind ranks differ"),
        })
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub(crate) fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact `m`-th root of a non-negative integer, if it exists.
fn exact_root(n: &BigInt, m: u32) -> Option<BigInt> {
    if n.is_negative() {
        if m % 2 == 1 {
            return exact_root(&-n, m).map(|r| -r);
        }
        return None;
    }
    let r = n.nth_root(m);
    if num_traits::pow(r.clone(), m as usize) == *n {
        Some(r)
    } else {
        None
    }
}

fn rat_pow_int(base: &Rational, e: &BigInt) -> Option<Rational> {
    let e = e.to_i64()?;
    if e.unsigned_abs() > 4096 {
        return None;
    }
    if base.is_zero() {
        return if e > 0 { Some(Rational::zero()) } else { None };
    }
    let p = num_traits::pow(base.clone(), e.unsigned_abs() as usize);
    Some(if e < 0 { p.recip() } else { p })
}

impl Expr {
    fn from_node(n: Node) -> Self {
        Expr(Arc::new(n))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn num(q: Rational) -> Self {
        Expr::from_node(Node::Num(q))
    }

    pub fn int(n: i64) -> Self {
        Expr::num(rat(n))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Expr::num(frac(n, d))
    }

    pub fn zero() -> Self {
        Expr::int(0)
    }

    pub fn one() -> Self {
        Expr::int(1)
    }

    pub fn sym(s: Symbol) -> Self {
        Expr::from_node(Node::Sym(s))
    }

    pub fn as_num(&self) -> Option<&Rational> {
        match self.node() {
            Node::Num(q) => Some(q),
            _ => None,
        }
    }

    pub fn as_sym(&self) -> Option<&Symbol> {
        match self.node() {
            Node::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_num().is_some_and(|q| q.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_num().is_some_and(|q| q.is_one())
    }

    /// Operands of a sum (the expression itself otherwise).
    pub fn terms(&self) -> Vec<Expr> {
        match self.node() {
            Node::Add(ts) => ts.clone(),
            _ => vec![self.clone()],
        }
    }

    /// Operands of a product (the expression itself otherwise).
    pub fn factors(&self) -> Vec<Expr> {
        match self.node() {
            Node::Mul(fs) => fs.clone(),
            _ => vec![self.clone()],
        }
    }

    /// Splits a term into numeric coefficient and the remaining product.
    pub fn split_coeff(&self) -> (Rational, Expr) {
        match self.node() {
            Node::Num(q) => (q.clone(), Expr::one()),
            Node::Mul(fs) => {
                if let Node::Num(q) = fs[0].node() {
                    let rest = if fs.len() == 2 {
                        fs[1].clone()
                    } else {
                        Expr::from_node(Node::Mul(fs[1..].to_vec()))
                    };
                    (q.clone(), rest)
                } else {
                    (Rational::one(), self.clone())
                }
            }
            _ => (Rational::one(), self.clone()),
        }
    }

    /// Splits a factor into base and rational exponent.
    fn split_pow(&self) -> (Expr, Rational) {
        match self.node() {
            Node::Pow(b, e) => (b.clone(), e.clone()),
            _ => (self.clone(), Rational::one()),
        }
    }

    /// Rebuilds `coeff * rest` where `rest` is already normal and has no
    /// numeric factor.
    fn with_coeff(coeff: Rational, rest: &Expr) -> Expr {
        if coeff.is_zero() {
            return Expr::zero();
        }
        if rest.is_one() {
            return Expr::num(coeff);
        }
        if coeff.is_one() {
            return rest.clone();
        }
        let mut fs = vec![Expr::num(coeff)];
        fs.extend(rest.factors());
        Expr::from_node(Node::Mul(fs))
    }

    pub fn add<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut constant = Rational::zero();
        let mut collected: BTreeMap<Expr, Rational> = BTreeMap::new();
        let mut stack: Vec<(Rational, Expr)> =
            terms.into_iter().map(|t| (Rational::one(), t)).collect();
        while let Some((scale, t)) = stack.pop() {
            match t.node() {
                Node::Num(q) => constant += scale * q,
                Node::Add(ts) => stack.extend(ts.iter().map(|s| (scale.clone(), s.clone()))),
                _ => {
                    let (c, rest) = t.split_coeff();
                    // distribute a numeric coefficient over a nested sum
                    if let Node::Add(ts) = rest.node() {
                        let s = &scale * &c;
                        stack.extend(ts.iter().map(|u| (s.clone(), u.clone())));
                        continue;
                    }
                    *collected.entry(rest).or_insert_with(Rational::zero) += scale * c;
                }
            }
        }
        let mut out: Vec<Expr> = Vec::with_capacity(collected.len() + 1);
        if !constant.is_zero() {
            out.push(Expr::num(constant));
        }
        for (rest, c) in collected {
            if !c.is_zero() {
                out.push(Expr::with_coeff(c, &rest));
            }
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::from_node(Node::Add(out)),
        }
    }

    pub fn mul<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        Expr::mul_vec(factors.into_iter().collect())
    }

    fn mul_vec(mut stack: Vec<Expr>) -> Expr {
        let mut coeff = Rational::one();
        let mut bases: BTreeMap<Expr, Rational> = BTreeMap::new();
        let mut exp_args: Vec<Expr> = Vec::new();
        while let Some(f) = stack.pop() {
            match f.node() {
                Node::Num(q) => {
                    if q.is_zero() {
                        return Expr::zero();
                    }
                    coeff *= q;
                }
                Node::Mul(fs) => stack.extend(fs.iter().cloned()),
                Node::Fun(Kernel::Exp, a) => exp_args.push(a.clone()),
                _ => {
                    let (b, e) = f.split_pow();
                    *bases.entry(b).or_insert_with(Rational::zero) += e;
                }
            }
        }
        let mut out: Vec<Expr> = Vec::new();
        if !exp_args.is_empty() {
            let e = Expr::exp(Expr::add(exp_args));
            match e.node() {
                Node::Num(q) => coeff *= q,
                Node::Fun(Kernel::Exp, _) => out.push(e),
                _ => {
                    // exp(a + log b) split into b * exp(a)
                    return Expr::mul_vec(
                        std::iter::once(Expr::num(coeff))
                            .chain(bases.into_iter().map(|(b, e)| Expr::pow(b, e)))
                            .chain(std::iter::once(e))
                            .collect(),
                    );
                }
            }
        }
        let mut needs_pass = false;
        for (b, e) in bases {
            if e.is_zero() {
                continue;
            }
            let p = Expr::pow(b, e);
            match p.node() {
                Node::Num(q) => coeff *= q,
                Node::Mul(_) | Node::Fun(Kernel::Exp, _) => {
                    needs_pass = true;
                    out.push(p);
                }
                _ => out.push(p),
            }
        }
        if needs_pass {
            // a power expanded into a product; renormalize once
            return Expr::mul_vec(std::iter::once(Expr::num(coeff)).chain(out).collect());
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
        out.sort();
        if out.is_empty() {
            return Expr::num(coeff);
        }
        if out.len() == 1 {
            let f = out.pop().unwrap();
            if coeff.is_one() {
                return f;
            }
            if let Node::Add(ts) = f.node() {
                return Expr::add(
                    ts.iter()
                        .map(|t| Expr::mul([Expr::num(coeff.clone()), t.clone()])),
                );
            }
            return Expr::from_node(Node::Mul(vec![Expr::num(coeff), f]));
        }
        if !coeff.is_one() {
            out.insert(0, Expr::num(coeff));
        }
        Expr::from_node(Node::Mul(out))
    }

    pub fn pow(base: Expr, e: Rational) -> Expr {
        if e.is_zero() {
            return Expr::one();
        }
        if e.is_one() {
            return base;
        }
        match base.node() {
            Node::Num(q) => Expr::num_pow(q, &e),
            Node::Pow(b, p) => {
                if e.is_integer() || p.numer().is_odd() {
                    Expr::pow(b.clone(), p * &e)
                } else {
                    Expr::from_node(Node::Pow(base.clone(), e))
                }
            }
            Node::Mul(fs) => {
                let negative_coeff = fs[0].as_num().is_some_and(|q| q.is_negative());
                if e.is_integer() || !negative_coeff {
                    Expr::mul(fs.iter().map(|f| Expr::pow(f.clone(), e.clone())))
                } else {
                    Expr::from_node(Node::Pow(base.clone(), e))
                }
            }
            Node::Fun(Kernel::Exp, a) => Expr::exp(Expr::mul([Expr::num(e), a.clone()])),
            _ => Expr::from_node(Node::Pow(base.clone(), e)),
        }
    }

    fn num_pow(q: &Rational, e: &Rational) -> Expr {
        if e.is_integer() {
            if let Some(v) = rat_pow_int(q, e.numer()) {
                return Expr::num(v);
            }
            return Expr::from_node(Node::Pow(Expr::num(q.clone()), e.clone()));
        }
        if q.is_zero() {
            return if e.is_positive() {
                Expr::zero()
            } else {
                Expr::from_node(Node::Pow(Expr::num(q.clone()), e.clone()))
            };
        }
        if q.is_one() {
            return Expr::one();
        }
        let m = e.denom().to_u32().unwrap_or(u32::MAX);
        if let (Some(n), Some(d)) = (exact_root(q.numer(), m), exact_root(q.denom(), m)) {
            let root = Rational::new(n, d);
            if let Some(v) = rat_pow_int(&root, e.numer()) {
                return Expr::num(v);
            }
        }
        if q.is_negative() {
            return Expr::from_node(Node::Pow(Expr::num(q.clone()), e.clone()));
        }
        // q^(k + f) = q^k * q^f with 0 < f < 1
        let k = e.floor();
        let f = e - &k;
        let head = rat_pow_int(q, k.numer()).unwrap_or_else(Rational::one);
        let radical = Expr::from_node(Node::Pow(Expr::num(q.clone()), f));
        if head.is_one() {
            radical
        } else {
            Expr::from_node(Node::Mul(vec![Expr::num(head), radical]))
        }
    }

    pub fn powi(base: Expr, n: i64) -> Expr {
        Expr::pow(base, rat(n))
    }

    pub fn recip(self) -> Expr {
        Expr::powi(self, -1)
    }

    pub fn sqrt(a: Expr) -> Expr {
        Expr::pow(a, frac(1, 2))
    }

    pub fn fun(k: Kernel, a: Expr) -> Expr {
        match k {
            Kernel::Exp => Expr::exp(a),
            Kernel::Log => Expr::log(a),
            Kernel::Sin => {
                if a.is_zero() {
                    Expr::zero()
                } else {
                    Expr::from_node(Node::Fun(k, a))
                }
            }
            Kernel::Cos => {
                if a.is_zero() {
                    Expr::one()
                } else {
                    Expr::from_node(Node::Fun(k, a))
                }
            }
        }
    }

    pub fn exp(a: Expr) -> Expr {
        if a.is_zero() {
            return Expr::one();
        }
        // exp(q*log(b) + rest) = b^q * exp(rest)
        let mut pulled: Vec<Expr> = Vec::new();
        let mut rest: Vec<Expr> = Vec::new();
        for t in a.terms() {
            let (c, r) = t.split_coeff();
            match r.node() {
                Node::Fun(Kernel::Log, b) => pulled.push(Expr::pow(b.clone(), c)),
                _ => rest.push(t),
            }
        }
        if pulled.is_empty() {
            return Expr::from_node(Node::Fun(Kernel::Exp, a));
        }
        let rest = Expr::add(rest);
        let tail = if rest.is_zero() {
            Expr::one()
        } else {
            Expr::from_node(Node::Fun(Kernel::Exp, rest))
        };
        pulled.push(tail);
        Expr::mul(pulled)
    }

    pub fn log(a: Expr) -> Expr {
        match a.node() {
            Node::Num(q) if q.is_one() => Expr::zero(),
            Node::Fun(Kernel::Exp, inner) => inner.clone(),
            _ => Expr::from_node(Node::Fun(Kernel::Log, a)),
        }
    }

    pub fn neg(&self) -> Expr {
        Expr::mul([Expr::int(-1), self.clone()])
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        Expr::add([self.clone(), other.neg()])
    }

    pub fn div(&self, other: &Expr) -> Expr {
        Expr::mul([self.clone(), other.clone().recip()])
    }

    pub fn scale(&self, q: &Rational) -> Expr {
        Expr::mul([Expr::num(q.clone()), self.clone()])
    }

    /// Rebuilds a node from (possibly new) children through the normalizing
    /// constructors.
    pub fn map_children<F: FnMut(&Expr) -> Expr>(&self, mut f: F) -> Expr {
        match self.node() {
            Node::Num(_) | Node::Sym(_) => self.clone(),
            Node::Add(ts) => Expr::add(ts.iter().map(&mut f)),
            Node::Mul(fs) => Expr::mul(fs.iter().map(&mut f)),
            Node::Pow(b, e) => Expr::pow(f(b), e.clone()),
            Node::Fun(k, a) => Expr::fun(*k, f(a)),
        }
    }

    /// Re-applies normalization bottom-up. Normal expressions are fixed points.
    pub fn normalize(&self) -> Expr {
        self.map_children(|c| c.normalize())
    }

    pub fn free_symbols(&self) -> std::collections::BTreeSet<Symbol> {
        let mut out = std::collections::BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut std::collections::BTreeSet<Symbol>) {
        match self.node() {
            Node::Num(_) => {}
            Node::Sym(s) => {
                out.insert(s.clone());
            }
            Node::Add(cs) | Node::Mul(cs) => cs.iter().for_each(|c| c.collect_symbols(out)),
            Node::Pow(b, _) => b.collect_symbols(out),
            Node::Fun(_, a) => a.collect_symbols(out),
        }
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        match self.node() {
            Node::Num(_) => false,
            Node::Sym(t) => t == s,
            Node::Add(cs) | Node::Mul(cs) => cs.iter().any(|c| c.contains(s)),
            Node::Pow(b, _) => b.contains(s),
            Node::Fun(_, a) => a.contains(s),
        }
    }

    pub fn contains_any(&self, syms: &[Symbol]) -> bool {
        syms.iter().any(|s| self.contains(s))
    }

    /// Number of nodes, counting shared subtrees each time they occur.
    pub fn size(&self) -> usize {
        1 + match self.node() {
            Node::Num(_) | Node::Sym(_) => 0,
            Node::Add(cs) | Node::Mul(cs) => cs.iter().map(Expr::size).sum(),
            Node::Pow(b, _) => b.size(),
            Node::Fun(_, a) => a.size(),
        }
    }

    /// Number of occurrences of `s` in the tree.
    pub fn occurrences(&self, s: &Symbol) -> usize {
        match self.node() {
            Node::Num(_) => 0,
            Node::Sym(t) => usize::from(t == s),
            Node::Add(cs) | Node::Mul(cs) => cs.iter().map(|c| c.occurrences(s)).sum(),
            Node::Pow(b, _) => b.occurrences(s),
            Node::Fun(_, a) => a.occurrences(s),
        }
    }
}

impl From<Symbol> for Expr {
    fn from(s: Symbol) -> Self {
        Expr::sym(s)
    }
}

impl From<&Symbol> for Expr {
    fn from(s: &Symbol) -> Self {
        Expr::sym(s.clone())
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs.clone())
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::add([a, b]));
binop!(Sub, sub, |a, b| Expr::add([a, b.neg()]));
binop!(Mul, mul, |a, b| Expr::mul([a, b]));
binop!(Div, div, |a, b| Expr::mul([a, b.recip()]));

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(name: &str) -> Expr {
        Expr::sym(Symbol::param(name))
    }

    #[test]
    fn collects_like_terms_and_factors() {
        let a = s("a");
        let b = s("b");
        let e = &(&a * &b) + &(&b * &a);
        assert_eq!(e, Expr::mul([Expr::int(2), a.clone(), b.clone()]));
        let sq = &a * &a;
        assert_eq!(sq, Expr::powi(a.clone(), 2));
        assert_eq!(&sq / &a, a);
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn numeric_powers() {
        assert_eq!(Expr::sqrt(Expr::int(4)), Expr::int(2));
        assert_eq!(Expr::pow(Expr::frac(8, 27), frac(-1, 3)), Expr::frac(3, 2));
        let r = Expr::pow(Expr::int(8), frac(3, 2));
        assert_eq!(
            r,
            Expr::mul([Expr::int(8), Expr::pow(Expr::int(8), frac(1, 2))])
        );
        assert_eq!(
            &Expr::sqrt(Expr::int(2)) * &Expr::sqrt(Expr::int(2)),
            Expr::int(2)
        );
    }

    #[test]
    fn exp_log_rules() {
        let a = s("a");
        let b = s("b");
        assert_eq!(Expr::exp(Expr::log(a.clone())), a);
        assert_eq!(Expr::log(Expr::exp(a.clone())), a);
        assert_eq!(
            &Expr::exp(a.clone()) * &Expr::exp(b.clone()),
            Expr::exp(&a + &b)
        );
        assert_eq!(&Expr::exp(a.clone()) * &Expr::exp(-&a), Expr::one());
        let e = Expr::exp(&Expr::log(b.clone()).scale(&frac(-1, 2)) + &a);
        assert_eq!(e, Expr::mul([Expr::pow(b, frac(-1, 2)), Expr::exp(a)]));
    }

    #[test]
    fn numeric_coefficient_distributes_over_sum() {
        let a = s("a");
        let b = s("b");
        let e = Expr::mul([Expr::int(2), &a + &b]);
        assert_eq!(e, &(&a + &a) + &(&b + &b));
        let e = &a - &(&a - &b);
        assert_eq!(e, b);
    }

    #[test]
    fn normalize_is_identity_on_normal_forms() {
        let a = s("a");
        let b = s("b");
        let e = Expr::add([
            Expr::mul([Expr::frac(3, 2), a.clone(), Expr::exp(b.clone())]),
            Expr::pow(&a + &b, frac(-1, 2)),
            Expr::log(Expr::powi(a.clone(), 2)),
        ]);
        assert_eq!(e.normalize(), e);
    }
}
