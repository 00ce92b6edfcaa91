//! Rational normal form.
//!
//! An expression is viewed as a rational function in its *atoms*: symbols,
//! kernel applications, exponentials and radicals. Atoms are canonicalized
//! recursively and sorted, the expression is converted to a reduced fraction
//! of polynomials over ℚ, radicals are reduced modulo `s^L = base`, and the
//! fraction is converted back. Equal rational functions give structurally
//! equal expressions.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::node::{Expr, Kernel, Node, Rational};
use super::poly::{gcd, Poly};
use super::symbol::Symbol;

/// Reduced fraction `num / den` with `gcd(num, den) = 1` and `den` monic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFun {
    num: Poly,
    den: Poly,
}

impl RatFun {
    pub fn new(num: Poly, den: Poly) -> RatFun {
        assert!(!den.is_zero(), "zero denominator");
        let n = num.nvars();
        if num.is_zero() {
            return RatFun::zero(n);
        }
        if let Some(c) = den.as_constant() {
            return RatFun {
                num: num.scale(&c.recip()),
                den: Poly::one(n),
            };
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.exact_div(&g).expect("gcd divides"),
                den.exact_div(&g).expect("gcd divides"),
            )
        };
        let lc = den.lead_coeff().recip();
        RatFun {
            num: num.scale(&lc),
            den: den.scale(&lc),
        }
    }

    pub fn from_poly(p: Poly) -> RatFun {
        let n = p.nvars();
        RatFun {
            num: p,
            den: Poly::one(n),
        }
    }

    pub fn zero(nvars: usize) -> RatFun {
        RatFun::from_poly(Poly::zero(nvars))
    }

    pub fn one(nvars: usize) -> RatFun {
        RatFun::from_poly(Poly::one(nvars))
    }

    pub fn constant(nvars: usize, c: Rational) -> RatFun {
        RatFun::from_poly(Poly::constant(nvars, c))
    }

    pub fn var(nvars: usize, i: usize) -> RatFun {
        RatFun::from_poly(Poly::var(nvars, i))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn uses_var(&self, v: usize) -> bool {
        self.num.uses_var(v) || self.den.uses_var(v)
    }

    pub fn add(&self, o: &RatFun) -> RatFun {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return RatFun::new(self.num.add(&o.num), self.den.clone());
        }
        if o.den.is_one() {
            return RatFun {
                num: self.num.add(&o.num.mul(&self.den)),
                den: self.den.clone(),
            };
        }
        if self.den.is_one() {
            return RatFun {
                num: o.num.add(&self.num.mul(&o.den)),
                den: o.den.clone(),
            };
        }
        let g = gcd(&self.den, &o.den);
        let a = self.den.exact_div(&g).unwrap();
        let b = o.den.exact_div(&g).unwrap();
        RatFun::new(self.num.mul(&b).add(&o.num.mul(&a)), a.mul(&o.den))
    }

    pub fn neg(&self) -> RatFun {
        RatFun {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, o: &RatFun) -> RatFun {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &RatFun) -> RatFun {
        if self.is_zero() || o.is_zero() {
            return RatFun::zero(self.nvars());
        }
        let g1 = gcd(&self.num, &o.den);
        let g2 = gcd(&o.num, &self.den);
        let n1 = self.num.exact_div(&g1).unwrap();
        let d2 = o.den.exact_div(&g1).unwrap();
        let n2 = o.num.exact_div(&g2).unwrap();
        let d1 = self.den.exact_div(&g2).unwrap();
        let num = n1.mul(&n2);
        let den = d1.mul(&d2);
        let lc = den.lead_coeff().recip();
        RatFun {
            num: num.scale(&lc),
            den: den.scale(&lc),
        }
    }

    pub fn scale(&self, q: &Rational) -> RatFun {
        if q.is_zero() {
            return RatFun::zero(self.nvars());
        }
        RatFun {
            num: self.num.scale(q),
            den: self.den.clone(),
        }
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn recip(&self) -> RatFun {
        assert!(!self.is_zero(), "reciprocal of zero");
        let lc = self.num.lead_coeff().recip();
        RatFun {
            num: self.den.scale(&lc),
            den: self.num.scale(&lc),
        }
    }

    pub fn div(&self, o: &RatFun) -> RatFun {
        self.mul(&o.recip())
    }

    pub fn powi(&self, n: i64) -> RatFun {
        let e = n.unsigned_abs() as u32;
        let p = RatFun {
            num: self.num.pow(e),
            den: self.den.pow(e),
        };
        if n < 0 {
            p.recip()
        } else {
            p
        }
    }

    pub fn derivative(&self, v: usize) -> RatFun {
        let dn = self.num.derivative(v);
        let dd = self.den.derivative(v);
        if dd.is_zero() {
            return RatFun {
                num: dn,
                den: self.den.clone(),
            };
        }
        RatFun::new(
            dn.mul(&self.den).sub(&self.num.mul(&dd)),
            self.den.mul(&self.den),
        )
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.num.eval_f64(point) / self.den.eval_f64(point)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum AtomKey {
    /// Symbol or opaque kernel application.
    Plain(Expr),
    /// `exp(a0)` with the argument scaled so its first term has coefficient 1.
    Exp(Expr),
    /// Fractional powers of a base.
    Radical(Expr),
}

/// Variable assignment for converting expressions to [`RatFun`] and back.
#[derive(Clone, Debug)]
pub struct RatContext {
    atoms: Vec<AtomKey>,
    index: BTreeMap<AtomKey, usize>,
    /// Variable `i` stands for `atom_i^(1/denom_i)`.
    denom: Vec<u32>,
    /// `(variable, base)` relations `s^L = base` for radicals.
    radicals: Vec<(usize, RatFun)>,
}

/// Splits an exponential argument into `c * a0` with a canonical `a0`.
fn split_exp_arg(a: &Expr) -> (Rational, Expr) {
    let first = a.terms().into_iter().find(|t| t.as_num().is_none());
    let c = match first {
        Some(t) => t.split_coeff().0,
        None => return (Rational::one(), a.clone()),
    };
    (c.clone(), a.scale(&c.recip()))
}

fn lcm_u32(a: u32, b: u32) -> u32 {
    a.lcm(&b)
}

fn denom_u32(q: &Rational) -> u32 {
    q.denom()
        .to_u32()
        .expect("exponent denominator fits in u32")
}

/// Canonicalizes kernel arguments and radical bases, recursively.
fn prepare(e: &Expr) -> Expr {
    match e.node() {
        Node::Num(_) | Node::Sym(_) => e.clone(),
        Node::Add(_) | Node::Mul(_) => e.map_children(prepare),
        Node::Pow(b, q) => {
            if q.is_integer() {
                Expr::pow(prepare(b), q.clone())
            } else {
                Expr::pow(simplify(b), q.clone())
            }
        }
        Node::Fun(k, a) => Expr::fun(*k, simplify(a)),
    }
}

impl RatContext {
    /// Context whose atoms cover every expression in `exprs`.
    pub fn new(exprs: &[Expr]) -> RatContext {
        let prepared: Vec<Expr> = exprs.iter().map(prepare).collect();
        RatContext::from_prepared(&prepared)
    }

    fn from_prepared(prepared: &[Expr]) -> RatContext {
        let mut found: BTreeMap<AtomKey, u32> = BTreeMap::new();
        for e in prepared {
            collect(e, &mut found);
        }
        let mut ctx = RatContext {
            atoms: Vec::new(),
            index: BTreeMap::new(),
            denom: Vec::new(),
            radicals: Vec::new(),
        };
        for (i, (k, l)) in found.into_iter().enumerate() {
            ctx.index.insert(k.clone(), i);
            ctx.atoms.push(k);
            ctx.denom.push(l);
        }
        let mut radicals = Vec::new();
        for (i, k) in ctx.atoms.iter().enumerate() {
            if let AtomKey::Radical(b) = k {
                let base = ctx.convert(b).expect("radical base atoms are registered");
                radicals.push((i, base));
            }
        }
        ctx.radicals = radicals;
        ctx
    }

    pub fn nvars(&self) -> usize {
        self.atoms.len()
    }

    /// Variable index of a plain symbol.
    pub fn var_of(&self, s: &Symbol) -> Option<usize> {
        self.index
            .get(&AtomKey::Plain(Expr::sym(s.clone())))
            .copied()
    }

    /// Expression represented by variable `i`.
    pub fn atom_expr(&self, i: usize) -> Expr {
        self.atom_pow(i, 1)
    }

    /// True when the atom is a symbol (not a kernel or radical).
    pub fn is_symbol_var(&self, i: usize) -> bool {
        matches!(&self.atoms[i], AtomKey::Plain(e) if e.as_sym().is_some())
    }

    /// Variables whose atom involves `s` without being `s` itself.
    pub fn vars_hiding(&self, s: &Symbol) -> Vec<usize> {
        self.atoms
            .iter()
            .enumerate()
            .filter(|(_, k)| match k {
                AtomKey::Plain(e) => e.as_sym().is_none() && e.contains(s),
                AtomKey::Exp(e) | AtomKey::Radical(e) => e.contains(s),
            })
            .map(|(i, _)| i)
            .collect()
    }

    fn atom_pow(&self, i: usize, k: i64) -> Expr {
        let l = self.denom[i] as i64;
        let q = Rational::new(k.into(), l.into());
        match &self.atoms[i] {
            AtomKey::Plain(e) => Expr::pow(e.clone(), q),
            AtomKey::Exp(a0) => Expr::exp(a0.scale(&q)),
            AtomKey::Radical(b) => Expr::pow(b.clone(), q),
        }
    }

    fn var_pow(&self, i: usize, k: &Rational) -> RatFun {
        let n = self.nvars();
        let scaled = k * Rational::from_integer(self.denom[i].into());
        debug_assert!(scaled.is_integer());
        let e = scaled.to_integer().to_i64().expect("exponent fits");
        RatFun::var(n, i).powi(e)
    }

    fn convert(&self, e: &Expr) -> Option<RatFun> {
        let n = self.nvars();
        Some(match e.node() {
            Node::Num(q) => RatFun::constant(n, q.clone()),
            Node::Sym(_) => RatFun::var(n, *self.index.get(&AtomKey::Plain(e.clone()))?),
            Node::Fun(Kernel::Exp, a) => {
                let (c, a0) = split_exp_arg(a);
                let i = *self.index.get(&AtomKey::Exp(a0))?;
                self.var_pow(i, &c)
            }
            Node::Fun(..) => RatFun::var(n, *self.index.get(&AtomKey::Plain(e.clone()))?),
            Node::Add(ts) => {
                let mut acc = RatFun::zero(n);
                for t in ts {
                    acc = acc.add(&self.convert(t)?);
                }
                acc
            }
            Node::Mul(fs) => {
                let mut acc = RatFun::one(n);
                for f in fs {
                    acc = acc.mul(&self.convert(f)?);
                }
                acc
            }
            Node::Pow(b, q) => {
                if q.is_integer() {
                    let base = self.convert(b)?;
                    if base.is_zero() && q.is_negative() {
                        return None;
                    }
                    base.powi(q.to_integer().to_i64()?)
                } else {
                    let i = *self.index.get(&AtomKey::Radical(b.clone()))?;
                    self.var_pow(i, q)
                }
            }
        })
    }

    fn reduce_poly(&self, p: &Poly) -> RatFun {
        let n = self.nvars();
        let mut cur = RatFun::from_poly(p.clone());
        for (v, base) in &self.radicals {
            let l = self.denom[*v];
            if cur.num().degree(*v) < l && cur.den().degree(*v) < l {
                continue;
            }
            let reduce = |q: &Poly| -> RatFun {
                let coeffs = q.coefficients_in(*v);
                let mut acc = RatFun::zero(n);
                for (j, c) in coeffs.into_iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let j = j as u32;
                    let s = RatFun::from_poly(Poly::monomial(n, *v, j % l, Rational::one()));
                    let term = RatFun::from_poly(c).mul(&s).mul(&base.powi((j / l) as i64));
                    acc = acc.add(&term);
                }
                acc
            };
            cur = reduce(cur.num()).div(&reduce(cur.den()));
        }
        cur
    }

    /// Converts an expression covered by this context; `None` if it contains
    /// an unknown atom or divides by zero.
    pub fn to_ratfun(&self, e: &Expr) -> Option<RatFun> {
        self.to_ratfun_prepared(&prepare(e))
    }

    fn to_ratfun_prepared(&self, p: &Expr) -> Option<RatFun> {
        let r = self.convert(p)?;
        if self.radicals.is_empty() {
            return Some(r);
        }
        let num = self.reduce_poly(r.num());
        let den = self.reduce_poly(r.den());
        if den.is_zero() {
            return None;
        }
        Some(num.div(&den))
    }

    pub fn poly_to_expr(&self, p: &Poly) -> Expr {
        Expr::add(p.terms().map(|(m, c)| {
            let mut fs = vec![Expr::num(c.clone())];
            for (i, e) in m.iter().enumerate() {
                if *e > 0 {
                    fs.push(self.atom_pow(i, *e as i64));
                }
            }
            Expr::mul(fs)
        }))
    }

    /// Canonical expression: `numerator / denominator` with an integral,
    /// primitive denominator whose first term is positive.
    pub fn to_expr(&self, r: &RatFun) -> Expr {
        if r.den().is_one() {
            return self.poly_to_expr(r.num());
        }
        let (f, den) = r.den().primitive_integral();
        let mut num = r.num().scale(&f);
        let mut d = self.poly_to_expr(&den);
        let first_negative = d
            .terms()
            .first()
            .map(|t| t.split_coeff().0.is_negative())
            .unwrap_or(false);
        if first_negative {
            num = num.neg();
            d = d.neg();
        }
        Expr::mul([self.poly_to_expr(&num), d.recip()])
    }
}

fn collect(e: &Expr, found: &mut BTreeMap<AtomKey, u32>) {
    let mut note = |k: AtomKey, l: u32| {
        let slot = found.entry(k).or_insert(1);
        *slot = lcm_u32(*slot, l);
    };
    match e.node() {
        Node::Num(_) => {}
        Node::Sym(_) => note(AtomKey::Plain(e.clone()), 1),
        Node::Fun(Kernel::Exp, a) => {
            let (c, a0) = split_exp_arg(a);
            note(AtomKey::Exp(a0), denom_u32(&c));
        }
        Node::Fun(..) => note(AtomKey::Plain(e.clone()), 1),
        Node::Add(cs) | Node::Mul(cs) => cs.iter().for_each(|c| collect(c, found)),
        Node::Pow(b, q) => {
            if q.is_integer() {
                collect(b, found);
            } else {
                note(AtomKey::Radical(b.clone()), denom_u32(q));
                collect(b, found);
            }
        }
    }
}

/// Canonical rational normal form of `e`.
pub fn simplify(e: &Expr) -> Expr {
    if matches!(e.node(), Node::Num(_) | Node::Sym(_)) {
        return e.clone();
    }
    let p = prepare(e);
    let ctx = RatContext::from_prepared(std::slice::from_ref(&p));
    match ctx.to_ratfun_prepared(&p) {
        Some(r) => ctx.to_expr(&r),
        None => p,
    }
}

pub fn simplify_all(es: &[Expr]) -> Vec<Expr> {
    es.iter().map(simplify).collect()
}
