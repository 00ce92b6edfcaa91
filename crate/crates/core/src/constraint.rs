//! Differential constraints `u^i_{n_i} = g^i`, the constraint submanifold H,
//! restriction to H and the compatibility test.

use crate::error::{Error, Result};
use crate::expr::{simplify, substitute_fixpoint, Expr, Rules, Symbol, Verdict, ZeroTest};
use crate::jetspace::EvolutionSystem;
use crate::structure::VectorField;

/// One constraint `u^i_{n_i} = g^i` per dependent variable.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    entries: Vec<(u32, Expr)>,
}

impl ConstraintSet {
    /// `entries[i-1] = (n_i, g^i)`. Each g^j must be free of every u^i_n with
    /// n ≥ n_i.
    pub fn new(entries: Vec<(u32, Expr)>) -> Result<Self> {
        for (j, (n, g)) in entries.iter().enumerate() {
            if *n == 0 {
                return Err(Error::InvalidConstraint(format!(
                    "constraint {} has order 0",
                    j + 1
                )));
            }
            for s in g.free_symbols() {
                if let Some((i, r)) = s.jet_index() {
                    let Some((ni, _)) = entries.get((i - 1) as usize) else {
                        return Err(Error::InvalidConstraint(format!(
                            "{s} refers to an unknown dependent"
                        )));
                    };
                    if r >= *ni {
                        return Err(Error::InvalidConstraint(format!(
                            "right-hand side of constraint {} depends on {s}, of order ≥ {ni}",
                            j + 1
                        )));
                    }
                }
            }
        }
        Ok(ConstraintSet { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn order(&self, i: u32) -> u32 {
        self.entries[(i - 1) as usize].0
    }

    pub fn rhs(&self, i: u32) -> &Expr {
        &self.entries[(i - 1) as usize].1
    }

    pub fn max_order(&self) -> u32 {
        self.entries.iter().map(|(n, _)| *n).max().unwrap_or(0)
    }

    /// L^i = u^i_{n_i} - g^i.
    pub fn lhs(&self, sys: &EvolutionSystem, i: u32) -> Expr {
        Expr::sym(sys.table().jet(i, self.order(i))).sub(self.rhs(i))
    }
}

/// Finite chart on H with elimination rules for every jet above the cut.
#[derive(Clone, Debug)]
pub struct Submanifold {
    chart: Vec<Symbol>,
    elim: Rules,
    orders: Vec<u32>,
    truncation: u32,
}

impl Submanifold {
    /// Chart coordinates in volume-form order.
    pub fn chart(&self) -> &[Symbol] {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.len()
    }

    pub fn elim(&self) -> &Rules {
        &self.elim
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    /// Reorders the chart (the volume form follows the chart order).
    pub fn with_chart_order(mut self, order: Vec<Symbol>) -> Result<Self> {
        let mut a = order.clone();
        let mut b = self.chart.clone();
        a.sort();
        b.sort();
        if a != b {
            return Err(Error::InvalidConstraint(
                "volume order is not a permutation of the chart".into(),
            ));
        }
        self.chart = order;
        Ok(self)
    }

    fn check_orders(&self, e: &Expr) -> Result<()> {
        for s in e.free_symbols() {
            if let Some((_, r)) = s.jet_index() {
                if r > self.truncation {
                    return Err(Error::Truncation {
                        symbol: s.name().to_string(),
                        limit: self.truncation,
                    });
                }
            }
        }
        Ok(())
    }

    /// Evaluation on H: eliminates every u^i_k with k ≥ n_i and normalizes.
    pub fn restrict(&self, e: &Expr) -> Result<Expr> {
        self.check_orders(e)?;
        Ok(simplify(&substitute_fixpoint(e, &self.elim)?))
    }
}

/// Builds H: elim(u^i_{n_i}) = g^i and elim(u^i_{k+1}) = D̄_x(elim(u^i_k))|_H
/// up to the system's truncation level.
pub fn build_submanifold(sys: &EvolutionSystem, cons: &ConstraintSet) -> Result<Submanifold> {
    if cons.len() as u32 != sys.m() {
        return Err(Error::InvalidConstraint(format!(
            "{} constraints for {} dependent variables",
            cons.len(),
            sys.m()
        )));
    }
    let k_max = sys.truncation();
    if cons.max_order() > k_max {
        return Err(Error::Truncation {
            symbol: format!("order {}", cons.max_order()),
            limit: k_max,
        });
    }
    let mut top = Rules::new();
    for i in 1..=sys.m() {
        top.insert(sys.table().jet(i, cons.order(i)), simplify(cons.rhs(i)));
    }
    let mut elim = top.clone();
    for i in 1..=sys.m() {
        let mut cur = top[&sys.table().jet(i, cons.order(i))].clone();
        for k in cons.order(i)..k_max {
            let next = simplify(&substitute_fixpoint(&sys.bar_dx(&cur)?, &top)?);
            elim.insert(sys.jet(i, k + 1)?, next.clone());
            cur = next;
        }
    }
    let mut chart = vec![Symbol::t(), Symbol::x()];
    for i in 1..=sys.m() {
        for r in 0..cons.order(i) {
            chart.push(sys.table().jet(i, r));
        }
    }
    chart.sort();
    let orders = (1..=sys.m()).map(|i| cons.order(i)).collect();
    Ok(Submanifold {
        chart,
        elim,
        orders,
        truncation: k_max,
    })
}

/// The restrictions D̃_x, D̃_t of the total derivatives to H.
#[derive(Clone, Debug)]
pub struct RestrictedPair {
    pub dx: VectorField,
    pub dt: VectorField,
}

pub fn restricted_pair(sys: &EvolutionSystem, h: &Submanifold) -> Result<RestrictedPair> {
    let mut dx = VectorField::coordinate(&Symbol::x());
    let mut dt = VectorField::coordinate(&Symbol::t());
    for s in h.chart() {
        if let Some((i, r)) = s.jet_index() {
            dx.set(s.clone(), h.restrict(&Expr::sym(sys.jet(i, r + 1)?))?);
            dt.set(s.clone(), h.restrict(&sys.prolongation(i, r)?)?);
        }
    }
    Ok(RestrictedPair { dx, dt })
}

/// Evolutionary field Σ D̃_x^r(φ^i)|_H ∂_{u^i_r} on the chart of H.
pub fn prolong_vertical_field(
    phi: &[Expr],
    sys: &EvolutionSystem,
    h: &Submanifold,
    pair: &RestrictedPair,
) -> Result<VectorField> {
    if phi.len() as u32 != sys.m() {
        return Err(Error::InvalidField(format!(
            "{} generators for {} dependent variables",
            phi.len(),
            sys.m()
        )));
    }
    let mut out = VectorField::new();
    for (idx, p) in phi.iter().enumerate() {
        let i = idx as u32 + 1;
        let mut cur = h.restrict(p)?;
        for r in 0..h.orders()[idx] {
            out.set(sys.table().jet(i, r), cur.clone());
            cur = simplify(&pair.dx.apply(&cur));
        }
    }
    Ok(out)
}

/// Compatibility verdict for one constraint.
#[derive(Clone, Debug)]
pub struct CompatibilityEntry {
    pub dep: u32,
    /// D̄_t(L^i)|_H.
    pub residual: Expr,
    pub verdict: Verdict,
    /// Numeric verdicts for D̄_t(D̄_x^r L^i)|_H, r = 1, 2 (None when beyond K).
    pub cross_checks: Vec<Option<Verdict>>,
}

#[derive(Clone, Debug)]
pub struct CompatibilityReport {
    pub entries: Vec<CompatibilityEntry>,
}

impl CompatibilityReport {
    pub fn compatible(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.verdict.is_zero() && e.cross_checks.iter().flatten().all(|v| v.is_zero()))
    }
}

pub fn check_compatibility(
    sys: &EvolutionSystem,
    cons: &ConstraintSet,
    h: &Submanifold,
    zt: &ZeroTest,
) -> Result<CompatibilityReport> {
    let numeric = ZeroTest {
        numeric_only: true,
        ..zt.clone()
    };
    let mut entries = Vec::new();
    for i in 1..=sys.m() {
        let l = cons.lhs(sys, i);
        let residual = h.restrict(&sys.bar_dt(&l)?)?;
        let verdict = zt.check(&residual)?;
        let mut cross_checks = Vec::new();
        let mut lr = l.clone();
        for _ in 1..=2 {
            let step = sys.bar_dx(&lr).and_then(|d| {
                let r = h.restrict(&sys.bar_dt(&d)?)?;
                Ok((d, r))
            });
            match step {
                Ok((d, r)) => {
                    cross_checks.push(Some(if r.is_zero() {
                        Verdict::Zero
                    } else {
                        numeric.check(&r)?
                    }));
                    lr = d;
                }
                Err(Error::Truncation { .. }) => cross_checks.push(None),
                Err(e) => return Err(e),
            }
        }
        entries.push(CompatibilityEntry {
            dep: i,
            residual,
            verdict,
            cross_checks,
        });
    }
    Ok(CompatibilityReport { entries })
}
