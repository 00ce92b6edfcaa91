//! Independent numeric oracle: residuals of candidate solutions against the
//! evolution equations and the constraints, and spot checks of identities.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constraint::ConstraintSet;
use crate::error::Result;
use crate::expr::{
    diff, eval, simplify, substitute, Expr, ExprError, Point, Rules, Symbol, SymbolKind, Verdict,
    ZeroTest,
};
use crate::jetspace::EvolutionSystem;

/// Sampling ranges, tolerances and seed.
#[derive(Clone, Debug)]
pub struct SamplePlan {
    pub count: usize,
    /// Explicit ranges; other symbols fall back to the defaults below.
    pub ranges: BTreeMap<Symbol, (f64, f64)>,
    /// Range for `x` and `t`.
    pub independent: (f64, f64),
    /// Range for parameters, level constants and jet coordinates.
    pub other: (f64, f64),
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub seed: u64,
    /// Rejection-sampling cap as a multiple of `count`.
    pub retry_factor: usize,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            count: 100,
            ranges: BTreeMap::new(),
            independent: (0.1, 3.0),
            other: (0.5, 2.0),
            tol_abs: 1e-12,
            tol_rel: 1e-9,
            seed: 0x5eed_0002,
            retry_factor: 50,
        }
    }
}

impl SamplePlan {
    fn range(&self, s: &Symbol) -> (f64, f64) {
        if let Some(r) = self.ranges.get(s) {
            return *r;
        }
        match s.kind() {
            SymbolKind::IndependentT | SymbolKind::IndependentX => self.independent,
            _ => self.other,
        }
    }

    /// Deterministic stream of sample points over `syms`.
    fn points<'a>(&'a self, syms: &'a [Symbol]) -> impl Iterator<Item = Point> + 'a {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.count.max(1) * self.retry_factor).map(move |_| {
            syms.iter()
                .map(|s| {
                    let (lo, hi) = self.range(s);
                    (s.clone(), rng.gen_range(lo..=hi))
                })
                .collect()
        })
    }
}

/// Outcome of a residual check.
#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub label: String,
    /// The residual expression after normalization.
    pub expr: Expr,
    pub symbolic: Verdict,
    pub max_abs: f64,
    /// Max of |r| / max(1, |a|, |b|) for residual r = a − b.
    pub max_rel: f64,
    pub samples: usize,
    pub rejected: usize,
    pub pass: bool,
}

/// Samples `a − b`; `None` when every attempt hit a domain error.
fn sample_difference(
    a: &Expr,
    b: &Expr,
    plan: &SamplePlan,
) -> Result<Option<(f64, f64, usize, usize)>> {
    // symbols of both sides: some may cancel in a − b
    let mut syms = a.free_symbols();
    syms.extend(b.free_symbols());
    let syms: Vec<Symbol> = syms.into_iter().collect();
    let (mut max_abs, mut max_rel, mut valid, mut rejected) = (0f64, 0f64, 0usize, 0usize);
    for p in plan.points(&syms) {
        if valid >= plan.count {
            break;
        }
        let (va, vb) = match (eval(a, &p), eval(b, &p)) {
            (Ok(va), Ok(vb)) => (va, vb),
            (Err(ExprError::Domain { .. }), _) | (_, Err(ExprError::Domain { .. })) => {
                rejected += 1;
                continue;
            }
            (Err(e), _) | (_, Err(e)) => return Err(e.into()),
        };
        let r = (va - vb).abs();
        max_abs = max_abs.max(r);
        max_rel = max_rel.max(r / 1f64.max(va.abs()).max(vb.abs()));
        valid += 1;
    }
    Ok((valid > 0).then_some((max_abs, max_rel, valid, rejected)))
}

fn report(
    label: String,
    a: &Expr,
    b: &Expr,
    plan: &SamplePlan,
    zt: &ZeroTest,
) -> Result<ResidualReport> {
    let expr = simplify(&(a - b));
    let symbolic = if expr.is_zero() {
        Verdict::Zero
    } else {
        match zt.check(&expr) {
            Ok(v) => v,
            Err(ExprError::Indeterminate) => Verdict::NonZero,
            Err(e) => return Err(e.into()),
        }
    };
    match sample_difference(a, b, plan)? {
        Some((max_abs, max_rel, samples, rejected)) => {
            let pass =
                samples >= plan.count && (max_rel <= plan.tol_rel || max_abs <= plan.tol_abs);
            Ok(ResidualReport {
                label,
                expr,
                symbolic,
                max_abs,
                max_rel,
                samples,
                rejected,
                pass,
            })
        }
        None => Ok(ResidualReport {
            label,
            expr,
            symbolic,
            max_abs: f64::NAN,
            max_rel: f64::NAN,
            samples: 0,
            rejected: plan.count * plan.retry_factor,
            pass: false,
        }),
    }
}

/// Replaces every jet u^i_r by ∂_x^r sol^i.
fn jets_on_solution(e: &Expr, sol: &[Expr]) -> Expr {
    let mut rules = Rules::new();
    for s in e.free_symbols() {
        if let Some((i, r)) = s.jet_index() {
            let mut d = sol[(i - 1) as usize].clone();
            for _ in 0..r {
                d = diff(&d, &Symbol::x());
            }
            rules.insert(s, d);
        }
    }
    substitute(e, &rules)
}

/// ∂_t sol^i − f^i(x-derivatives of sol), for every i.
pub fn residual(
    sol: &[Expr],
    sys: &EvolutionSystem,
    plan: &SamplePlan,
    zt: &ZeroTest,
) -> Result<Vec<ResidualReport>> {
    (1..=sys.m())
        .map(|i| {
            let lhs = diff(&sol[(i - 1) as usize], &Symbol::t());
            let rhs = jets_on_solution(sys.rhs(i), sol);
            report(
                format!("pde.{}", sys.table().dependent_name(i)),
                &lhs,
                &rhs,
                plan,
                zt,
            )
        })
        .collect()
}

/// u^i_{n_i} − g^i on the solution, for every i.
pub fn constraint_residual(
    sol: &[Expr],
    sys: &EvolutionSystem,
    cons: &ConstraintSet,
    plan: &SamplePlan,
    zt: &ZeroTest,
) -> Result<Vec<ResidualReport>> {
    (1..=sys.m())
        .map(|i| {
            let lhs = jets_on_solution(&Expr::sym(sys.table().jet(i, cons.order(i))), sol);
            let rhs = jets_on_solution(cons.rhs(i), sol);
            report(
                format!("constraint.{}", sys.table().dependent_name(i)),
                &lhs,
                &rhs,
                plan,
                zt,
            )
        })
        .collect()
}

/// Magnitudes of an identity at fresh sample points.
#[derive(Clone, Debug)]
pub struct SpotCheck {
    pub min_abs: f64,
    pub max_abs: f64,
    pub samples: usize,
    /// Some sample exceeded the tolerance.
    pub nonzero: bool,
}

pub fn spot_check(identity: &Expr, plan: &SamplePlan) -> Result<SpotCheck> {
    match sample_difference(identity, &Expr::zero(), plan)? {
        Some((max_abs, max_rel, samples, _)) => {
            let mut min_abs = f64::INFINITY;
            let syms: Vec<Symbol> = identity.free_symbols().into_iter().collect();
            for p in plan.points(&syms).take(plan.count * plan.retry_factor) {
                if let Ok(v) = eval(identity, &p) {
                    min_abs = min_abs.min(v.abs());
                }
            }
            Ok(SpotCheck {
                min_abs,
                max_abs,
                samples,
                nonzero: max_rel > plan.tol_rel && max_abs > plan.tol_abs,
            })
        }
        None => Ok(SpotCheck {
            min_abs: f64::NAN,
            max_abs: f64::NAN,
            samples: 0,
            nonzero: false,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, SymbolTable};

    fn heat() -> EvolutionSystem {
        let t = SymbolTable::with_dependents(&["u"]);
        let f = parse("u_xx", &t).unwrap();
        EvolutionSystem::new(t, vec![f]).unwrap()
    }

    #[test]
    fn heat_kernel_solves_the_heat_equation() {
        let sys = heat();
        let mut t = sys.table().clone();
        t.add_parameter("y");
        let k = parse("exp(-(x - y)^2/(4*t))/(4*t)^(1/2)", &t).unwrap();
        let r = &residual(&[k], &sys, &SamplePlan::default(), &ZeroTest::default()).unwrap()[0];
        assert!(r.pass && r.max_abs <= 1e-12, "{r:?}");
        assert!(r.symbolic.is_zero());
    }

    #[test]
    fn wrong_solution_fails() {
        let t = SymbolTable::with_dependents(&["u"]);
        let sys =
            EvolutionSystem::new(t.clone(), vec![parse("u_xx + u_x^2", &t).unwrap()]).unwrap();
        let r = &residual(
            &[parse("x", &t).unwrap()],
            &sys,
            &SamplePlan::default(),
            &ZeroTest::default(),
        )
        .unwrap()[0];
        assert!(!r.pass);
        assert_eq!(r.expr, Expr::int(-1));
    }

    #[test]
    fn constraint_of_a_quadratic() {
        let sys = heat();
        let cons = ConstraintSet::new(vec![(3, Expr::zero())]).unwrap();
        let sol = [parse("x^2 + 2*t", sys.table()).unwrap()];
        let r = &constraint_residual(
            &sol,
            &sys,
            &cons,
            &SamplePlan::default(),
            &ZeroTest::default(),
        )
        .unwrap()[0];
        assert!(r.pass && r.symbolic == Verdict::Zero);
    }

    #[test]
    fn spot_checks_are_deterministic() {
        let t = SymbolTable::with_dependents(&["u"]);
        let e = parse("u_x*x - 1", &t).unwrap();
        let a = spot_check(&e, &SamplePlan::default()).unwrap();
        let b = spot_check(&e, &SamplePlan::default()).unwrap();
        assert!(a.nonzero);
        assert_eq!(a.max_abs.to_bits(), b.max_abs.to_bits());
    }
}
