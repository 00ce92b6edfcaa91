//! The descent: integrate Ω_{r-2}, …, Ω_1 in turn, each on the level set of
//! the previous first integrals, and assemble the solution.

use std::collections::BTreeSet;

use super::integrate_closed;
use super::numeric::NumericPotential;
use super::solve::{solve_level_set, LevelSolution};
use crate::constraint::RestrictedPair;
use crate::error::{Error, Result};
use crate::expr::{
    diff, eval, simplify, substitute, Expr, Point, Rules, Symbol, Verdict, ZeroTest,
};
use crate::forms::{denominator, dual_forms, OneForm};
use crate::matrix::inverse;
use crate::structure::VectorField;

#[derive(Clone, Debug)]
pub enum Potential {
    Symbolic(Expr),
    Numeric(NumericPotential),
}

/// One step of the descent.
#[derive(Clone, Debug)]
pub struct Level {
    /// 1-based index i of Ω_i.
    pub index: usize,
    /// Ω_i pulled back to the current level set.
    pub omega: OneForm,
    pub closed: bool,
    pub potential: Option<Potential>,
    pub constant: Symbol,
    pub constant_value: f64,
    pub solution: Option<LevelSolution>,
    /// Zero verdicts of D̃_x F and D̃_t F on the level set.
    pub first_integral: Option<(Verdict, Verdict)>,
}

#[derive(Clone, Debug)]
pub struct ReductionChain {
    pub chart: Vec<Symbol>,
    pub delta: Expr,
    /// Full-chart coframe Ω_1, …, Ω_{r-2}.
    pub omegas: Vec<OneForm>,
    /// In descent order, Ω_{r-2} first.
    pub levels: Vec<Level>,
    /// Eliminated coordinates in terms of the remaining ones and constants.
    pub rules: Rules,
    /// Base point with level-constant values.
    pub base: Point,
    /// `u^j = …` for every dependent variable, when the descent completed.
    pub solution: Option<Vec<(Symbol, Expr)>>,
    pub failure: Option<Error>,
}

impl ReductionChain {
    pub fn complete(&self) -> bool {
        self.failure.is_none() && self.solution.is_some()
    }

    /// Level constants (c_i and derived k_i) with their base-point values.
    pub fn constants(&self) -> Vec<(Symbol, f64)> {
        self.base
            .iter()
            .filter(|(s, _)| s.kind() == crate::expr::SymbolKind::LevelConstant)
            .map(|(s, v)| (s.clone(), *v))
            .collect()
    }

    /// Values of the level constants for the solution through `point` (a
    /// point of H, with parameter values): each F_i is evaluated in turn and
    /// derived constants follow from their relations.
    pub fn constants_at(&self, point: &Point) -> Result<Point> {
        let mut p = point.clone();
        let mut out = Point::new();
        for l in &self.levels {
            let Some(Potential::Symbolic(f)) = &l.potential else {
                break;
            };
            let v = eval(f, &p)?;
            p.insert(l.constant.clone(), v);
            out.insert(l.constant.clone(), v);
            if let Some(sol) = &l.solution {
                for (k, rel) in &sol.derived {
                    let v = eval(rel, &p)?;
                    p.insert(k.clone(), v);
                    out.insert(k.clone(), v);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Default)]
pub struct DescentOptions {
    /// Overrides of the default base point (all coordinates 1).
    pub base_point: Point,
    /// Values of the problem parameters (default 1).
    pub parameters: Point,
    pub zero_test: ZeroTest,
}

/// Picks a base point where Δ and every Ω_i are finite and Δ ≠ 0.
fn choose_base(chart: &[Symbol], delta: &Expr, omegas: &[OneForm], opts: &DescentOptions) -> Point {
    let mut syms: BTreeSet<Symbol> = chart.iter().cloned().collect();
    syms.extend(delta.free_symbols());
    for w in omegas {
        for (_, c) in w.terms() {
            syms.extend(c.free_symbols());
        }
    }
    let ok = |p: &Point| {
        eval(delta, p).is_ok_and(|d| d.abs() > 1e-12)
            && omegas
                .iter()
                .all(|w| w.terms().all(|(_, c)| eval(c, p).is_ok()))
    };
    let mut last = Point::new();
    for attempt in 0..40 {
        let mut p = Point::new();
        for (k, s) in syms.iter().enumerate() {
            let v = if let Some(v) = opts.base_point.get(s).or_else(|| opts.parameters.get(s)) {
                *v
            } else if attempt == 0 || s.is_constant() {
                1.0
            } else {
                1.0 + 0.137 * attempt as f64 * ((k % 5) as f64 + 1.0) / 5.0
            };
            p.insert(s.clone(), v);
        }
        if ok(&p) {
            return p;
        }
        last = p;
    }
    last
}

/// Ω_{i+1} on the current level set, as the dual coframe of X_1, …, X_{i+1},
/// D̃_x, D̃_t restricted to the remaining coordinates. These fields are tangent
/// to the level set (X_j(F_k) = Ω_k(X_j) = 0 for j < k), so this equals the
/// pullback of the full-chart form while working with much smaller matrices.
fn restricted_dual(
    i: usize,
    fields: &[VectorField],
    pair: &RestrictedPair,
    rules: &Rules,
    remaining: &[Symbol],
) -> Option<OneForm> {
    if remaining.len() != i + 3 {
        return None;
    }
    let rows: Vec<Vec<Expr>> = fields[..=i]
        .iter()
        .chain([&pair.dx, &pair.dt])
        .map(|f| {
            remaining
                .iter()
                .map(|s| simplify(&substitute(&f.component(s), rules)))
                .collect()
        })
        .collect();
    let inv = inverse(&rows)?;
    Some(OneForm::one_form(
        remaining
            .iter()
            .enumerate()
            .map(|(k, s)| (s.clone(), inv[k][i].clone())),
    ))
}

/// Jet coordinates ordered by decreasing x-order, then dependent index.
fn candidates(remaining: &[Symbol]) -> Vec<Symbol> {
    let mut c: Vec<Symbol> = remaining.iter().filter(|s| s.is_jet()).cloned().collect();
    c.sort_by_key(|s| {
        let (i, r) = s.jet_index().expect("jet");
        (std::cmp::Reverse(r), i)
    });
    c
}

fn first_integral_check(
    f: &Expr,
    pair: &RestrictedPair,
    rules: &Rules,
    remaining: &[Symbol],
    zt: &ZeroTest,
) -> Result<(Verdict, Verdict)> {
    let along = |d: &VectorField| -> Result<Verdict> {
        let e = Expr::add(
            remaining
                .iter()
                .map(|s| &substitute(&d.component(s), rules) * &diff(f, s)),
        );
        Ok(zt.check(&e)?)
    };
    Ok((along(&pair.dx)?, along(&pair.dt)?))
}

/// Runs the descent. Structural failures (non-closed forms, integrals out of
/// reach, unsolvable level sets) end the chain early and are recorded in
/// `failure`; evaluation errors are returned.
pub fn descend(
    fields: &[VectorField],
    pair: &RestrictedPair,
    chart: &[Symbol],
    dependents: &[Symbol],
    opts: &DescentOptions,
) -> Result<ReductionChain> {
    let zt = &opts.zero_test;
    let delta = denominator(fields, pair, chart);
    let omegas = dual_forms(fields, pair, chart)?;
    let mut base = choose_base(chart, &delta, &omegas, opts);
    let mut chain = ReductionChain {
        chart: chart.to_vec(),
        delta,
        omegas: omegas.clone(),
        levels: Vec::new(),
        rules: Rules::new(),
        base: Point::new(),
        solution: None,
        failure: None,
    };
    let mut remaining = chart.to_vec();
    for i in (0..omegas.len()).rev() {
        let omega = match restricted_dual(i, fields, pair, &chain.rules, &remaining) {
            Some(w) => w,
            None => omegas[i].pullback(&chain.rules),
        };
        let constant = Symbol::level(&format!("c{}", i + 1));
        let mut level = Level {
            index: i + 1,
            omega: omega.clone(),
            closed: false,
            potential: None,
            constant: constant.clone(),
            constant_value: f64::NAN,
            solution: None,
            first_integral: None,
        };
        level.closed = omega.d().is_zero(zt)?;
        if !level.closed {
            chain.failure = Some(Error::NotClosed(format!(
                "pulled-back Omega_{} is not closed",
                i + 1
            )));
            chain.levels.push(level);
            break;
        }
        let f = match integrate_closed(&omega, &remaining, &base, zt) {
            Ok(f) => f,
            Err(e @ Error::NonIntegrable { .. }) => {
                let coords = remaining.clone();
                level.potential = Some(Potential::Numeric(NumericPotential::new(
                    omega,
                    coords,
                    base.clone(),
                )));
                chain.failure = Some(e);
                chain.levels.push(level);
                break;
            }
            Err(e) => {
                chain.failure = Some(e);
                chain.levels.push(level);
                break;
            }
        };
        level.potential = Some(Potential::Symbolic(f.clone()));
        level.constant_value = eval(&f, &base)?;
        base.insert(constant.clone(), level.constant_value);
        level.first_integral = Some(first_integral_check(
            &f,
            pair,
            &chain.rules,
            &remaining,
            zt,
        )?);
        let sol = match solve_level_set(
            &f,
            &Expr::sym(constant),
            &candidates(&remaining),
            &base,
            &format!("k{}", i + 1),
        ) {
            Ok(s) => s,
            Err(e) => {
                chain.failure = Some(e);
                chain.levels.push(level);
                break;
            }
        };
        for (k, rel) in &sol.derived {
            let v = eval(rel, &base)?;
            base.insert(k.clone(), v);
        }
        let mut step = Rules::new();
        step.insert(sol.var.clone(), sol.value.clone());
        for v in chain.rules.values_mut() {
            *v = simplify(&substitute(v, &step));
        }
        chain.rules.insert(sol.var.clone(), sol.value.clone());
        remaining.retain(|s| s != &sol.var);
        level.solution = Some(sol);
        chain.levels.push(level);
    }
    if chain.failure.is_none() {
        let mut out = Vec::new();
        for u in dependents {
            match chain.rules.get(u) {
                Some(v) => out.push((u.clone(), v.clone())),
                None => {
                    chain.failure = Some(Error::LevelSet {
                        equation: u.to_string(),
                        reason: "dependent variable was never eliminated".into(),
                    });
                    break;
                }
            }
        }
        if chain.failure.is_none() {
            chain.solution = Some(out);
        }
    }
    chain.base = base;
    Ok(chain)
}
