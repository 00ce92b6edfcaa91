//! Evolution systems `u^i_t = f^i(t, x, u^j_r)` in the chart `(x, t, u^i_r)`
//! and the total derivative operators restricted to the equation manifold.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::expr::{diff, Expr, Symbol, SymbolKind, SymbolTable, Verdict, ZeroTest};

#[derive(Debug)]
pub struct EvolutionSystem {
    table: SymbolTable,
    rhs: Vec<Expr>,
    order_bound: u32,
    truncation: u32,
    /// D̄_x^r(f^i) keyed by (i, r).
    prolongations: Mutex<HashMap<(u32, u32), Expr>>,
}

impl Clone for EvolutionSystem {
    fn clone(&self) -> Self {
        EvolutionSystem {
            table: self.table.clone(),
            rhs: self.rhs.clone(),
            order_bound: self.order_bound,
            truncation: self.truncation,
            prolongations: Mutex::new(self.prolongations.lock().expect("cache lock").clone()),
        }
    }
}

/// Highest x-order of any jet symbol in `e` (0 if none).
pub fn max_jet_order(e: &Expr) -> u32 {
    e.free_symbols()
        .iter()
        .filter_map(|s| s.jet_index())
        .map(|(_, r)| r)
        .max()
        .unwrap_or(0)
}

impl EvolutionSystem {
    /// `rhs[i-1]` is f^i. Default truncation is `order_bound + 4`.
    pub fn new(table: SymbolTable, rhs: Vec<Expr>) -> Result<Self> {
        let m = table.dependents().len();
        if rhs.len() != m {
            return Err(Error::InvalidSystem(format!(
                "{} right-hand sides for {} dependent variables",
                rhs.len(),
                m
            )));
        }
        for (i, f) in rhs.iter().enumerate() {
            for s in f.free_symbols() {
                match s.kind() {
                    SymbolKind::Jet { dep, .. } if dep as usize > m => {
                        return Err(Error::InvalidSystem(format!(
                            "f^{} uses unknown jet {}",
                            i + 1,
                            s
                        )));
                    }
                    SymbolKind::LevelConstant => {
                        return Err(Error::InvalidSystem(format!(
                            "f^{} uses level constant {}",
                            i + 1,
                            s
                        )));
                    }
                    _ => {}
                }
            }
        }
        let order_bound = rhs.iter().map(max_jet_order).max().unwrap_or(0);
        Ok(EvolutionSystem {
            table,
            rhs,
            order_bound,
            truncation: order_bound + 4,
            prolongations: Mutex::new(HashMap::new()),
        })
    }

    /// Sets the truncation level K. It never drops below `order_bound + 1`.
    pub fn with_truncation(mut self, k: u32) -> Self {
        self.truncation = k.max(self.order_bound + 1);
        self.prolongations.lock().expect("cache lock").clear();
        self
    }

    pub fn table(&self) -> &SymbolTable {
        &self.table
    }

    /// Number of dependent variables.
    pub fn m(&self) -> u32 {
        self.rhs.len() as u32
    }

    /// f^i for the 1-based index `i`.
    pub fn rhs(&self, i: u32) -> &Expr {
        &self.rhs[(i - 1) as usize]
    }

    pub fn order_bound(&self) -> u32 {
        self.order_bound
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    /// Jet symbol u^i_r; fails above the truncation level.
    pub fn jet(&self, i: u32, r: u32) -> Result<Symbol> {
        let s = self.table.jet(i, r);
        if r > self.truncation {
            return Err(Error::Truncation {
                symbol: s.name().to_string(),
                limit: self.truncation,
            });
        }
        Ok(s)
    }

    fn jets_in(&self, e: &Expr) -> Vec<(Symbol, u32, u32)> {
        e.free_symbols()
            .into_iter()
            .filter_map(|s| s.jet_index().map(|(i, r)| (s, i, r)))
            .collect()
    }

    /// D̄_x e = ∂_x e + Σ u^i_{r+1} ∂e/∂u^i_r.
    pub fn bar_dx(&self, e: &Expr) -> Result<Expr> {
        let mut terms = vec![diff(e, &Symbol::x())];
        for (s, i, r) in self.jets_in(e) {
            let next = self.jet(i, r + 1)?;
            terms.push(Expr::mul([Expr::sym(next), diff(e, &s)]));
        }
        Ok(Expr::add(terms))
    }

    /// D̄_x^r(f^i), cached.
    pub fn prolongation(&self, i: u32, r: u32) -> Result<Expr> {
        if let Some(e) = self.prolongations.lock().expect("cache lock").get(&(i, r)) {
            return Ok(e.clone());
        }
        let e = if r == 0 {
            self.rhs(i).clone()
        } else {
            self.bar_dx(&self.prolongation(i, r - 1)?)?
        };
        self.prolongations
            .lock()
            .expect("cache lock")
            .insert((i, r), e.clone());
        Ok(e)
    }

    /// D̄_t e = ∂_t e + Σ D̄_x^r(f^i) ∂e/∂u^i_r.
    pub fn bar_dt(&self, e: &Expr) -> Result<Expr> {
        let mut terms = vec![diff(e, &Symbol::t())];
        for (s, i, r) in self.jets_in(e) {
            terms.push(Expr::mul([self.prolongation(i, r)?, diff(e, &s)]));
        }
        Ok(Expr::add(terms))
    }

    /// Zero test of [D̄_x, D̄_t] e.
    pub fn commutator_check(&self, e: &Expr, zt: &ZeroTest) -> Result<Verdict> {
        let a = self.bar_dx(&self.bar_dt(e)?)?;
        let b = self.bar_dt(&self.bar_dx(e)?)?;
        Ok(zt.check(&a.sub(&b))?)
    }
}
