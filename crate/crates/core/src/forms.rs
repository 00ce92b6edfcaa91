//! Exterior algebra on a chart: k-forms, wedge, exterior derivative,
//! contraction, pullback, and the dual coframe of a solvable structure.

use std::collections::BTreeMap;
use std::fmt;

use crate::constraint::RestrictedPair;
use crate::error::{Error, Result};
use crate::expr::{diff, simplify, substitute, Expr, Rules, Symbol, ZeroTest};
use crate::matrix;
use crate::structure::{frame_matrix, VectorField};

/// Differential form of fixed degree. Basis monomials dξ_{a_1}∧…∧dξ_{a_k}
/// are keyed by strictly increasing symbol lists; zero coefficients are
/// never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Form {
    degree: usize,
    coeffs: BTreeMap<Vec<Symbol>, Expr>,
}

pub type OneForm = Form;
pub type TwoForm = Form;

/// Sorts `idx` in place and returns the permutation sign, or `None` on a
/// repeated symbol.
fn sort_with_sign(idx: &mut [Symbol]) -> Option<i64> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

impl Form {
    pub fn zero(degree: usize) -> Self {
        Form {
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    /// 0-form.
    pub fn function(f: Expr) -> Self {
        let mut out = Form::zero(0);
        out.add_term(Vec::new(), f);
        out
    }

    pub fn one_form<I: IntoIterator<Item = (Symbol, Expr)>>(it: I) -> Self {
        let mut out = Form::zero(1);
        for (s, c) in it {
            out.add_term(vec![s], c);
        }
        out
    }

    /// dξ.
    pub fn differential(s: &Symbol) -> Self {
        Form::one_form([(s.clone(), Expr::one())])
    }

    fn add_term(&mut self, mut idx: Vec<Symbol>, c: Expr) {
        assert_eq!(idx.len(), self.degree, "form degree mismatch");
        let Some(sign) = sort_with_sign(&mut idx) else {
            return;
        };
        let c = if sign < 0 { c.neg() } else { c };
        let v = match self.coeffs.remove(&idx) {
            Some(old) => simplify(&(&old + &c)),
            None => simplify(&c),
        };
        if !v.is_zero() {
            self.coeffs.insert(idx, v);
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Symbol>, &Expr)> {
        self.coeffs.iter()
    }

    /// Coefficient of dξ for a one-form.
    pub fn coeff(&self, s: &Symbol) -> Expr {
        self.coeffs
            .get(std::slice::from_ref(s))
            .cloned()
            .unwrap_or_else(Expr::zero)
    }

    pub fn coeff_of(&self, idx: &[Symbol]) -> Expr {
        let mut k = idx.to_vec();
        match sort_with_sign(&mut k) {
            None => Expr::zero(),
            Some(sign) => {
                let c = self.coeffs.get(&k).cloned().unwrap_or_else(Expr::zero);
                if sign < 0 {
                    c.neg()
                } else {
                    c
                }
            }
        }
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Zero test of every coefficient.
    pub fn is_zero(&self, zt: &ZeroTest) -> Result<bool> {
        for c in self.coeffs.values() {
            if !zt.check(c)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn add(&self, o: &Form) -> Form {
        assert_eq!(self.degree, o.degree);
        let mut out = self.clone();
        for (k, c) in &o.coeffs {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, f: &Expr) -> Form {
        let mut out = Form::zero(self.degree);
        for (k, c) in &self.coeffs {
            out.add_term(k.clone(), c * f);
        }
        out
    }

    pub fn wedge(&self, o: &Form) -> Form {
        let mut out = Form::zero(self.degree + o.degree);
        for (ka, ca) in &self.coeffs {
            for (kb, cb) in &o.coeffs {
                let mut idx = ka.clone();
                idx.extend(kb.iter().cloned());
                out.add_term(idx, ca * cb);
            }
        }
        out
    }

    /// Exterior derivative. Parameters and level constants are constants.
    pub fn d(&self) -> Form {
        let mut out = Form::zero(self.degree + 1);
        for (k, c) in &self.coeffs {
            for s in c.free_symbols() {
                if s.is_constant() {
                    continue;
                }
                let mut idx = vec![s.clone()];
                idx.extend(k.iter().cloned());
                out.add_term(idx, diff(c, &s));
            }
        }
        out
    }

    /// Interior product X ⌟ ω (contraction in the first slot).
    pub fn contract(&self, x: &VectorField) -> Form {
        assert!(self.degree > 0, "cannot contract a function");
        let mut out = Form::zero(self.degree - 1);
        for (k, c) in &self.coeffs {
            for (pos, s) in k.iter().enumerate() {
                let xs = x.component(s);
                if xs.is_zero() {
                    continue;
                }
                let mut rest = k.clone();
                rest.remove(pos);
                let term = &xs * c;
                out.add_term(rest, if pos % 2 == 1 { term.neg() } else { term });
            }
        }
        out
    }

    /// Value of a one-form on a vector field.
    pub fn pair(&self, x: &VectorField) -> Expr {
        assert_eq!(self.degree, 1, "pairing needs a one-form");
        simplify(&Expr::add(
            self.coeffs.iter().map(|(k, c)| c * &x.component(&k[0])),
        ))
    }

    /// Pullback of a one-form along `w = rules[w]` for eliminated coordinates.
    pub fn pullback(&self, rules: &Rules) -> Form {
        assert_eq!(self.degree, 1, "pullback is implemented for one-forms");
        let mut out = Form::zero(1);
        for (k, c) in &self.coeffs {
            let w = &k[0];
            let a = substitute(c, rules);
            match rules.get(w) {
                None => out.add_term(vec![w.clone()], a),
                Some(phi) => {
                    for s in phi.free_symbols() {
                        if !s.is_constant() {
                            out.add_term(vec![s.clone()], &a * &diff(phi, &s));
                        }
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(k, c)| {
                let basis: Vec<String> = k.iter().map(|s| format!("d{s}")).collect();
                if basis.is_empty() {
                    format!("{c}")
                } else {
                    format!("({c})*{}", basis.join("^"))
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Plain closedness, or closedness modulo the ideal generated by `higher`:
/// dω ∧ ω_{i+1} ∧ … ∧ ω_{r-2} = 0.
pub fn closed_mod(omega: &Form, higher: &[Form], zt: &ZeroTest) -> Result<bool> {
    let mut acc = omega.d();
    for h in higher {
        acc = acc.wedge(h);
    }
    acc.is_zero(zt)
}

/// Δ = det of the frame (X_1, …, X_{r-2}, D̃_x, D̃_t) in chart order.
pub fn denominator(fields: &[VectorField], pair: &RestrictedPair, chart: &[Symbol]) -> Expr {
    matrix::det(&frame_matrix(fields, pair, chart))
}

/// The dual coframe Ω_1, …, Ω_{r-2}: Ω_i(X_j) = δ_ij and Ω_i(D̃_x) = Ω_i(D̃_t)
/// = 0. Equals M·β_i with β_i the cofactor one-forms.
pub fn dual_forms(
    fields: &[VectorField],
    pair: &RestrictedPair,
    chart: &[Symbol],
) -> Result<Vec<OneForm>> {
    let a = frame_matrix(fields, pair, chart);
    let inv = matrix::inverse(&a)
        .ok_or_else(|| Error::DependentGenerators("frame is singular".into()))?;
    Ok((0..fields.len())
        .map(|i| {
            Form::one_form(
                chart
                    .iter()
                    .enumerate()
                    .map(|(k, s)| (s.clone(), inv[k][i].clone())),
            )
        })
        .collect())
}

/// β_i = Δ·Ω_i (coefficients are the signed cofactors of the frame matrix).
pub fn beta(
    i: usize,
    fields: &[VectorField],
    pair: &RestrictedPair,
    chart: &[Symbol],
) -> Result<OneForm> {
    let delta = denominator(fields, pair, chart);
    let forms = dual_forms(fields, pair, chart)?;
    Ok(forms[i].scale(&delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, SymbolTable};

    fn table() -> SymbolTable {
        SymbolTable::with_dependents(&["u"])
    }

    #[test]
    fn derivative_of_one_forms() {
        let t = table();
        let ux = t.jet(1, 1);
        let w = Form::one_form([(Symbol::x(), Expr::sym(ux.clone()))]);
        let dw = w.d();
        assert_eq!(dw.coeff_of(&[Symbol::x(), ux.clone()]), Expr::int(-1));
        assert_eq!(dw.coeff_of(&[ux.clone(), Symbol::x()]), Expr::one());
        let u = t.jet(1, 0);
        let exact = Form::one_form([
            (Symbol::x(), Expr::sym(u.clone())),
            (u.clone(), Expr::sym(Symbol::x())),
        ]);
        assert!(exact.d().is_structurally_zero());
        let f = parse("log(u_xx + u_x^2)/2", &t).unwrap();
        assert!(Form::function(f).d().d().is_structurally_zero());
    }

    #[test]
    fn wedge_and_contraction() {
        let t = table();
        let u = t.jet(1, 0);
        let dx = Form::differential(&Symbol::x());
        let du = Form::differential(&u);
        let w = dx.wedge(&du);
        assert_eq!(w, du.wedge(&dx).scale(&Expr::int(-1)));
        assert!(dx.wedge(&dx).is_structurally_zero());
        let ddx = VectorField::coordinate(&Symbol::x());
        assert_eq!(w.contract(&ddx), du);
        assert_eq!(
            w.contract(&VectorField::coordinate(&u)),
            dx.scale(&Expr::int(-1))
        );
    }

    #[test]
    fn pullback_along_a_rule() {
        let t = table();
        let u = t.jet(1, 0);
        let ux = t.jet(1, 1);
        let w = Form::one_form([(u.clone(), Expr::one())]);
        let mut rules = Rules::new();
        rules.insert(u.clone(), parse("x*u_x^2", &t).unwrap());
        let pb = w.pullback(&rules);
        assert_eq!(pb.coeff(&Symbol::x()), parse("u_x^2", &t).unwrap());
        assert_eq!(pb.coeff(&ux), parse("2*x*u_x", &t).unwrap());
    }

    #[test]
    fn burgers_coframe() {
        use crate::constraint::{build_submanifold, restricted_pair, ConstraintSet};
        use crate::jetspace::EvolutionSystem;
        let t = table();
        let p = |s: &str| parse(s, &t).unwrap();
        let sys = EvolutionSystem::new(t.clone(), vec![p("u_xx + u_x^2")]).unwrap();
        let cons = ConstraintSet::new(vec![(3, p("-2*u_x*u_xx"))]).unwrap();
        let h = build_submanifold(&sys, &cons).unwrap();
        let pair = restricted_pair(&sys, &h).unwrap();
        let (u, ux, uxx) = (t.jet(1, 0), t.jet(1, 1), t.jet(1, 2));
        let fields = vec![
            VectorField::coordinate(&Symbol::x()),
            VectorField::coordinate(&u),
            VectorField::from_components([
                (Symbol::t(), p("2*t")),
                (Symbol::x(), p("x")),
                (ux.clone(), p("-u_x")),
                (uxx.clone(), p("-2*u_xx")),
            ]),
        ];
        let chart = h.chart().to_vec();
        let delta = denominator(&fields, &pair, &chart);
        assert_eq!(delta, simplify(&p("2*u_xx*(u_xx + u_x^2)")));
        let omegas = dual_forms(&fields, &pair, &chart).unwrap();
        for (i, w) in omegas.iter().enumerate() {
            for (j, x) in fields.iter().enumerate() {
                assert_eq!(w.pair(x), if i == j { Expr::one() } else { Expr::zero() });
            }
            assert!(w.pair(&pair.dx).is_zero());
            assert!(w.pair(&pair.dt).is_zero());
        }
        let zt = ZeroTest::default();
        assert!(closed_mod(&omegas[2], &[], &zt).unwrap());
        assert!(closed_mod(&omegas[1], &omegas[2..], &zt).unwrap());
        assert!(closed_mod(&omegas[0], &omegas[1..], &zt).unwrap());
        let b3 = beta(2, &fields, &pair, &chart).unwrap();
        assert_eq!(b3.coeff(&uxx), simplify(&p("-u_xx")));
    }
}
