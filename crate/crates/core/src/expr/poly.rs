//! Sparse multivariate polynomials over ℚ with exact division and gcd.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::node::Rational;

pub type Mono = Vec<u32>;

/// Polynomial in `nvars` variables; terms keyed by exponent vector under
/// lexicographic order (variable 0 most significant). The leading term is the
/// last entry.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Mono, Rational>,
}

fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn mono_div(a: &Mono, b: &Mono) -> Option<Mono> {
    a.iter().zip(b).map(|(x, y)| x.checked_sub(*y)).collect()
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Poly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Poly::constant(nvars, Rational::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Poly::monomial(nvars, i, 1, Rational::one())
    }

    pub fn monomial(nvars: usize, i: usize, e: u32, c: Rational) -> Self {
        let mut m = vec![0; nvars];
        m[i] = e;
        let mut p = Poly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.iter().all(|e| *e == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn lead(&self) -> Option<(&Mono, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn lead_coeff(&self) -> Rational {
        self.lead()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn degree(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m[var]).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.iter().sum()).max().unwrap_or(0)
    }

    pub fn uses_var(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m[var] > 0)
    }

    pub fn vars(&self) -> Vec<usize> {
        (0..self.nvars).filter(|&v| self.uses_var(v)).collect()
    }

    fn add_term(&mut self, m: Mono, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, q: &Rational) -> Poly {
        if q.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.nvars);
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        let mut out = Poly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(mono_mul(ma, mb), ca * cb);
            }
        }
        out
    }

    fn mul_term(&self, m: &Mono, c: &Rational) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(mm, cc)| (mono_mul(mm, m), cc * c))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one(self.nvars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn derivative(&self, var: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            if m[var] > 0 {
                let mut mm = m.clone();
                mm[var] -= 1;
                out.add_term(mm, c * Rational::from_integer(m[var].into()));
            }
        }
        out
    }

    /// Coefficients of `var^k`, k = 0..=deg, each free of `var`.
    pub fn coefficients_in(&self, var: usize) -> Vec<Poly> {
        let deg = self.degree(var) as usize;
        let mut out = vec![Poly::zero(self.nvars); deg + 1];
        for (m, c) in &self.terms {
            let k = m[var] as usize;
            let mut mm = m.clone();
            mm[var] = 0;
            out[k].terms.insert(mm, c.clone());
        }
        out
    }

    pub fn from_coefficients(var: usize, coeffs: &[Poly], nvars: usize) -> Poly {
        let mut out = Poly::zero(nvars);
        for (k, c) in coeffs.iter().enumerate() {
            for (m, q) in &c.terms {
                let mut mm = m.clone();
                mm[var] += k as u32;
                out.add_term(mm, q.clone());
            }
        }
        out
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let (dm, dc) = d.lead().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        let mut rem = self.clone();
        let mut q = Poly::zero(self.nvars);
        while let Some((rm, rc)) = rem.lead().map(|(m, c)| (m.clone(), c.clone())) {
            let m = mono_div(&rm, &dm)?;
            let c = rc / &dc;
            rem = rem.sub(&d.mul_term(&m, &c));
            q.add_term(m, c);
        }
        Some(q)
    }

    /// Scales to leading coefficient 1.
    pub fn monic(&self) -> Poly {
        match self.lead() {
            None => self.clone(),
            Some((_, c)) if c.is_one() => self.clone(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    /// Scales to coprime integer coefficients with positive leading coefficient.
    /// Returns the factor `f` with `result = f * self`.
    pub fn primitive_integral(&self) -> (Rational, Poly) {
        if self.is_zero() {
            return (Rational::one(), self.clone());
        }
        let mut l = num_bigint::BigInt::one();
        let mut g = num_bigint::BigInt::zero();
        for c in self.terms.values() {
            l = l.lcm(c.denom());
            g = g.gcd(c.numer());
        }
        let mut f = Rational::new(l, g);
        if self.lead_coeff().is_negative() {
            f = -f;
        }
        (f.clone(), self.scale(&f))
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    fn content_in(&self, var: usize) -> Poly {
        let mut g = Poly::zero(self.nvars);
        for c in self.coefficients_in(var) {
            if c.is_zero() {
                continue;
            }
            g = gcd(&g, &c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    fn primitive_in(&self, var: usize) -> Poly {
        let c = self.content_in(var);
        self.exact_div(&c).expect("content divides")
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        use num_traits::ToPrimitive;
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut v = c.to_f64().unwrap_or(f64::NAN);
                for (i, e) in m.iter().enumerate() {
                    if *e > 0 {
                        v *= point[i].powi(*e as i32);
                    }
                }
                v
            })
            .sum()
    }

    /// Exact square root when `self` is a perfect square.
    pub fn sqrt(&self) -> Option<Poly> {
        if self.is_zero() {
            return Some(self.clone());
        }
        if let Some(c) = self.as_constant() {
            if c.is_negative() {
                return None;
            }
            let n = c.numer().sqrt();
            let d = c.denom().sqrt();
            return (&n * &n == *c.numer() && &d * &d == *c.denom())
                .then(|| Poly::constant(self.nvars, Rational::new(n, d)));
        }
        // lexicographic square root: peel leading terms
        let (lm, lc) = self.lead().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        if lm.iter().any(|e| e % 2 == 1) || lc.is_negative() {
            return None;
        }
        let half: Mono = lm.iter().map(|e| e / 2).collect();
        let rc = Poly::constant(self.nvars, lc).sqrt()?.as_constant()?;
        let mut root = Poly::zero(self.nvars);
        root.add_term(half.clone(), rc.clone());
        let two_lead = Rational::from_integer(2.into()) * &rc;
        let mut rem = self.sub(&root.mul(&root));
        let mut guard = 0;
        while let Some((m, c)) = rem.lead().map(|(m, c)| (m.clone(), c.clone())) {
            guard += 1;
            if guard > 10_000 {
                return None;
            }
            let tm = mono_div(&m, &half)?;
            if tm >= half {
                return None;
            }
            let tc = c / &two_lead;
            let mut t = Poly::zero(self.nvars);
            t.add_term(tm, tc);
            // (root + t)^2 - (root)^2 = 2 root t + t^2
            let delta = root
                .mul(&t)
                .scale(&Rational::from_integer(2.into()))
                .add(&t.mul(&t));
            root = root.add(&t);
            rem = rem.sub(&delta);
        }
        Some(root)
    }
}

/// Greatest common divisor over ℚ[x_1..x_n], monic (leading coefficient 1).
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    let n = a.nvars;
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one(n);
    }
    if a == b {
        return a.monic();
    }
    if a.is_monomial() || b.is_monomial() {
        let (m, other) = if a.is_monomial() { (a, b) } else { (b, a) };
        let mut g = m.lead().unwrap().0.clone();
        for om in other.terms.keys() {
            for (x, y) in g.iter_mut().zip(om) {
                *x = (*x).min(*y);
            }
        }
        let mut p = Poly::zero(n);
        p.add_term(g, Rational::one());
        return p;
    }
    if modular_coprime(a, b) {
        return Poly::one(n);
    }
    if a.len() <= b.len() {
        if b.exact_div(a).is_some() {
            return a.monic();
        }
    } else if a.exact_div(b).is_some() {
        return b.monic();
    }
    let va = a.vars();
    let vb = b.vars();
    if let Some(&v) = va.iter().find(|v| !vb.contains(v)) {
        return gcd(&a.content_in(v), b);
    }
    if let Some(&v) = vb.iter().find(|v| !va.contains(v)) {
        return gcd(a, &b.content_in(v));
    }
    let v = *va.iter().max().unwrap();
    let ca = a.content_in(v);
    let cb = b.content_in(v);
    let g = gcd(&ca, &cb);
    let pa = a.exact_div(&ca).unwrap();
    let pb = b.exact_div(&cb).unwrap();
    let (mut p, mut q) = if pa.degree(v) >= pb.degree(v) {
        (pa, pb)
    } else {
        (pb, pa)
    };
    loop {
        let r = pseudo_rem(&p, &q, v);
        if r.is_zero() {
            break;
        }
        if r.degree(v) == 0 {
            q = Poly::one(n);
            break;
        }
        p = q;
        q = r.primitive_in(v);
    }
    g.mul(&q.primitive_in(v)).monic()
}

const PRIME: u64 = 2_147_483_647;

fn mod_pow(mut b: u64, mut e: u64) -> u64 {
    let mut r = 1;
    b %= PRIME;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % PRIME;
        }
        b = b * b % PRIME;
        e >>= 1;
    }
    r
}

fn mod_rational(q: &Rational) -> Option<u64> {
    let p = num_bigint::BigInt::from(PRIME);
    let n = q.numer().mod_floor(&p);
    let d = q.denom().mod_floor(&p);
    let (n, d): (u64, u64) = (n.try_into().ok()?, d.try_into().ok()?);
    (d != 0).then(|| n * mod_pow(d, PRIME - 2) % PRIME)
}

/// Image of `p` in F_p[x_var] with every other variable set from `point`;
/// `None` if the leading coefficient in `var` vanishes there.
fn univariate_image(p: &Poly, var: usize, point: &[u64]) -> Option<Vec<u64>> {
    let deg = p.degree(var) as usize;
    let mut out = vec![0u64; deg + 1];
    for (m, c) in &p.terms {
        let mut v = mod_rational(c)?;
        for (i, e) in m.iter().enumerate() {
            if i != var && *e > 0 {
                v = v * mod_pow(point[i], *e as u64) % PRIME;
            }
        }
        let k = m[var] as usize;
        out[k] = (out[k] + v) % PRIME;
    }
    (out[deg] != 0).then_some(out)
}

fn univariate_gcd_degree(mut a: Vec<u64>, mut b: Vec<u64>) -> usize {
    let trim = |v: &mut Vec<u64>| {
        while v.last() == Some(&0) {
            v.pop();
        }
    };
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        // a mod b
        let inv = mod_pow(*b.last().unwrap(), PRIME - 2);
        while a.len() >= b.len() {
            let f = a.last().unwrap() * inv % PRIME;
            let shift = a.len() - b.len();
            for (i, bc) in b.iter().enumerate() {
                a[shift + i] = (a[shift + i] + PRIME - f * bc % PRIME) % PRIME;
            }
            trim(&mut a);
            if a.is_empty() {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// True when a and b are certainly coprime: for every variable, the gcd of
/// their images over F_p (other variables fixed, leading coefficients kept)
/// is constant. Images can only gain common factors, so a constant image gcd
/// bounds the true degree by zero.
fn modular_coprime(a: &Poly, b: &Poly) -> bool {
    let n = a.nvars;
    let mut seed: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut next = || {
        seed = seed
            .wrapping_mul(6_364_136_223_846_793_005)
            .wrapping_add(1_442_695_040_888_963_407);
        (seed >> 33) % (PRIME - 2) + 2
    };
    let point: Vec<u64> = (0..n).map(|_| next()).collect();
    for v in 0..n {
        let (da, db) = (a.degree(v), b.degree(v));
        if da == 0 || db == 0 {
            continue;
        }
        match (
            univariate_image(a, v, &point),
            univariate_image(b, v, &point),
        ) {
            (Some(ia), Some(ib)) => {
                if univariate_gcd_degree(ia, ib) > 0 {
                    return false;
                }
            }
            _ => return false,
        }
    }
    true
}

/// Sparse pseudo-remainder of `p` by `q` in `var`.
pub fn pseudo_rem(p: &Poly, q: &Poly, var: usize) -> Poly {
    let dq = q.degree(var);
    let qc = q.coefficients_in(var);
    let lc = &qc[dq as usize];
    let mut r = p.clone();
    while !r.is_zero() && r.degree(var) >= dq {
        let dr = r.degree(var);
        let lr = r.coefficients_in(var).swap_remove(dr as usize);
        let shift = Poly::monomial(r.nvars, var, dr - dq, Rational::one());
        r = r.mul(lc).sub(&lr.mul(&shift).mul(q));
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::node::rat;

    fn x(i: usize) -> Poly {
        Poly::var(3, i)
    }

    fn c(n: i64) -> Poly {
        Poly::constant(3, rat(n))
    }

    #[test]
    fn gcd_of_products() {
        let f = x(0).add(&x(1)).add(&c(1));
        let g = x(0).mul(&x(2)).sub(&x(1).pow(2));
        let h = x(2).add(&c(-3));
        let a = f.mul(&g).mul(&g);
        let b = f.mul(&g).mul(&h);
        let d = gcd(&a, &b);
        assert_eq!(d, f.mul(&g).monic());
        assert!(gcd(&f, &h).is_one());
    }

    #[test]
    fn modular_coprimality_never_misses_a_factor() {
        let f = x(0).mul(&x(1)).add(&c(2));
        let g = x(1).sub(&x(2)).scale(&rat(3));
        let h = x(0).add(&x(2).pow(2));
        assert!(modular_coprime(&f.mul(&g), &h));
        assert!(!modular_coprime(&f.mul(&g), &g.mul(&h)));
        // a common factor free of the main variable is still seen
        assert!(!modular_coprime(&x(0).mul(&g), &x(2).mul(&g)));
    }

    #[test]
    fn exact_division_detects_failure() {
        let f = x(0).add(&x(1));
        let g = x(0).sub(&x(1));
        let p = f.mul(&g);
        assert_eq!(p.exact_div(&f), Some(g.clone()));
        assert_eq!(p.exact_div(&x(2)), None);
    }

    #[test]
    fn square_roots() {
        let f = x(0).scale(&rat(2)).add(&x(1).pow(2)).add(&c(-1));
        let sq = f.mul(&f);
        let r = sq.sqrt().unwrap();
        assert!(r == f || r == f.neg());
        assert!(f.sqrt().is_none());
        assert_eq!(Poly::constant(3, rat(9)).sqrt(), Some(c(3)));
    }
}
