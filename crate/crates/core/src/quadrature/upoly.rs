//! Univariate polynomials in one context variable with coefficients in the
//! field of rational functions of the other variables.

use crate::expr::poly::Poly;
use crate::expr::{RatFun, Rational};

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct UPoly {
    /// Little-endian coefficients; the last one is nonzero.
    c: Vec<RatFun>,
    nv: usize,
}

impl UPoly {
    pub fn zero(nv: usize) -> Self {
        UPoly { c: Vec::new(), nv }
    }

    pub fn constant(k: RatFun) -> Self {
        let nv = k.nvars();
        UPoly::from_coeffs(vec![k], nv)
    }

    pub fn from_coeffs(mut c: Vec<RatFun>, nv: usize) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        UPoly { c, nv }
    }

    /// Splits a multivariate polynomial along variable `v`.
    pub fn from_poly(p: &Poly, v: usize) -> Self {
        let nv = p.nvars();
        UPoly::from_coeffs(
            p.coefficients_in(v)
                .into_iter()
                .map(RatFun::from_poly)
                .collect(),
            nv,
        )
    }

    /// Back to a rational function in all variables.
    pub fn to_ratfun(&self, v: usize) -> RatFun {
        let x = RatFun::var(self.nv, v);
        let mut acc = RatFun::zero(self.nv);
        for c in self.c.iter().rev() {
            acc = acc.mul(&x).add(c);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree; the zero polynomial has degree 0 as well.
    pub fn deg(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn coeff(&self, k: usize) -> RatFun {
        self.c
            .get(k)
            .cloned()
            .unwrap_or_else(|| RatFun::zero(self.nv))
    }

    pub fn lc(&self) -> RatFun {
        self.c
            .last()
            .cloned()
            .unwrap_or_else(|| RatFun::zero(self.nv))
    }

    pub fn add(&self, o: &UPoly) -> UPoly {
        let n = self.c.len().max(o.c.len());
        UPoly::from_coeffs(
            (0..n).map(|k| self.coeff(k).add(&o.coeff(k))).collect(),
            self.nv,
        )
    }

    pub fn sub(&self, o: &UPoly) -> UPoly {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> UPoly {
        UPoly::from_coeffs(self.c.iter().map(|x| x.neg()).collect(), self.nv)
    }

    pub fn scale(&self, k: &RatFun) -> UPoly {
        UPoly::from_coeffs(self.c.iter().map(|x| x.mul(k)).collect(), self.nv)
    }

    pub fn mul(&self, o: &UPoly) -> UPoly {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero(self.nv);
        }
        let mut out = vec![RatFun::zero(self.nv); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        UPoly::from_coeffs(out, self.nv)
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::from_coeffs(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, x)| x.scale(&Rational::from_integer((k as i64).into())))
                .collect(),
            self.nv,
        )
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn divrem(&self, d: &UPoly) -> (UPoly, UPoly) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let mut r = self.clone();
        let mut q = vec![RatFun::zero(self.nv); self.c.len().saturating_sub(d.c.len()) + 1];
        let inv = d.lc().recip();
        while !r.is_zero() && r.c.len() >= d.c.len() {
            let shift = r.c.len() - d.c.len();
            let f = r.lc().mul(&inv);
            q[shift] = f.clone();
            let mut sub = vec![RatFun::zero(self.nv); shift];
            sub.extend(d.c.iter().map(|x| x.mul(&f)));
            let mut next = r.sub(&UPoly::from_coeffs(sub, self.nv));
            // the leading coefficient cancels exactly
            next.c.truncate(r.c.len() - 1);
            next = UPoly::from_coeffs(next.c, self.nv);
            r = next;
        }
        (UPoly::from_coeffs(q, self.nv), r)
    }

    pub fn monic(&self) -> UPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.lc().recip())
    }

    /// Exact quotient (the remainder is discarded).
    pub fn quo(&self, d: &UPoly) -> UPoly {
        self.divrem(d).0
    }
}

/// Monic gcd.
pub(crate) fn gcd(a: &UPoly, b: &UPoly) -> UPoly {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let r = a.divrem(&b).1;
        a = b;
        b = r;
    }
    a.monic()
}

/// `(s, t, g)` with `s·a + t·b = g = gcd(a, b)` monic.
pub(crate) fn ext_gcd(a: &UPoly, b: &UPoly) -> (UPoly, UPoly, UPoly) {
    let nv = a.nv;
    let one = UPoly::constant(RatFun::one(nv));
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (one.clone(), UPoly::zero(nv));
    let (mut t0, mut t1) = (UPoly::zero(nv), one);
    while !r1.is_zero() {
        let (q, r) = r0.divrem(&r1);
        let s = s0.sub(&q.mul(&s1));
        let t = t0.sub(&q.mul(&t1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
        t0 = std::mem::replace(&mut t1, t);
    }
    let k = r0.lc().recip();
    (s0.scale(&k), t0.scale(&k), r0.scale(&k))
}

/// `(s, t)` with `s·a + t·b = c` and `deg s < deg b`, for coprime `a`, `b`.
pub(crate) fn solve_diophantine(a: &UPoly, b: &UPoly, c: &UPoly) -> (UPoly, UPoly) {
    let (s0, _, g) = ext_gcd(a, b);
    debug_assert_eq!(g.deg(), 0, "operands must be coprime");
    let s = s0.mul(c).divrem(b).1;
    let t = c.sub(&s.mul(a)).quo(b);
    (s, t)
}
