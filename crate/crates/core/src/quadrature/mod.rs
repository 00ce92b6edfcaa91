//! Quadrature along a solvable structure: potentials of closed one-forms,
//! level-set solving and the descent that assembles the solution.

mod descend;
mod integrate;
mod numeric;
mod solve;
mod upoly;

pub use descend::{descend, DescentOptions, Level, Potential, ReductionChain};
pub use integrate::antiderivative;
pub use numeric::{gauss_legendre, NumericPotential};
pub use solve::{solve_level_set, LevelSolution};

use crate::error::{Error, Result};
use crate::expr::{diff, simplify, Expr, Point, Symbol, ZeroTest};
use crate::forms::OneForm;

/// A potential F with dF = ω, integrating coordinate by coordinate in the
/// given order against the residual ω_ξ − ∂F/∂ξ.
pub fn integrate_closed(
    omega: &OneForm,
    coords: &[Symbol],
    base: &Point,
    zt: &ZeroTest,
) -> Result<Expr> {
    for (k, _) in omega.terms() {
        if !coords.contains(&k[0]) {
            return Err(Error::NotClosed(format!(
                "component along {} is off the chart",
                k[0]
            )));
        }
    }
    if !omega.d().is_zero(zt)? {
        return Err(Error::NotClosed(format!("d({omega}) does not vanish")));
    }
    let mut f = Expr::zero();
    for s in coords {
        let r = simplify(&(&omega.coeff(s) - &diff(&f, s)));
        if r.is_zero() || zt.check(&r)?.is_zero() {
            continue;
        }
        f = &f + &antiderivative(&r, s, base)?;
    }
    for s in coords {
        let r = &omega.coeff(s) - &diff(&f, s);
        if !zt.check(&r)?.is_zero() {
            return Err(Error::NotClosed(format!("potential fails along {s}")));
        }
    }
    Ok(f)
}

/// Independent potentials of every Ω_i, for an abelian structure where each
/// Ω_i is closed on the full chart.
pub fn abelian_potentials(
    omegas: &[OneForm],
    chart: &[Symbol],
    base: &Point,
    zt: &ZeroTest,
) -> Result<Vec<Expr>> {
    omegas
        .iter()
        .map(|w| integrate_closed(w, chart, base, zt))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::{build_submanifold, restricted_pair, ConstraintSet};
    use crate::expr::{eval, parse, SymbolTable};
    use crate::jetspace::EvolutionSystem;
    use crate::structure::VectorField;

    #[test]
    fn closed_form_potential() {
        let t = SymbolTable::with_dependents(&["u"]);
        let (u, ux) = (t.jet(1, 0), t.jet(1, 1));
        let omega = OneForm::one_form([
            (Symbol::x(), parse("u_x", &t).unwrap()),
            (ux.clone(), parse("x + 1/u_x", &t).unwrap()),
        ]);
        let coords = vec![Symbol::t(), Symbol::x(), u, ux.clone()];
        let base: Point = coords.iter().map(|s| (s.clone(), 1.0)).collect();
        let f = integrate_closed(&omega, &coords, &base, &ZeroTest::default()).unwrap();
        assert!(f.contains(&ux));
        let bad = OneForm::one_form([(Symbol::x(), parse("u", &t).unwrap())]);
        assert!(matches!(
            integrate_closed(&bad, &coords, &base, &ZeroTest::default()),
            Err(Error::NotClosed(_))
        ));
    }

    #[test]
    fn burgers_descent() {
        let t = SymbolTable::with_dependents(&["u"]);
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
                (ux, p("-u_x")),
                (uxx, p("-2*u_xx")),
            ]),
        ];
        let chain = descend(
            &fields,
            &pair,
            h.chart(),
            std::slice::from_ref(&u),
            &DescentOptions::default(),
        )
        .unwrap();
        assert!(chain.complete(), "{:?}", chain.failure);
        for l in &chain.levels {
            let (a, b) = l.first_integral.unwrap();
            assert!(a.is_zero() && b.is_zero(), "level {}", l.index);
        }
        let sol = &chain.solution.as_ref().unwrap()[0].1;
        // u_t - u_xx - u_x^2 at a few points
        let res = &(&diff(sol, &Symbol::t()) - &diff(&diff(sol, &Symbol::x()), &Symbol::x()))
            - &Expr::powi(diff(sol, &Symbol::x()), 2);
        let mut pt = chain.base.clone();
        for (x, tt) in [(0.3, 0.2), (0.7, 1.1), (1.4, 0.5)] {
            pt.insert(Symbol::x(), x);
            pt.insert(Symbol::t(), tt);
            let r = eval(&res, &pt).unwrap();
            assert!(r.abs() < 1e-9, "residual {r} for {sol}");
        }
    }
}
