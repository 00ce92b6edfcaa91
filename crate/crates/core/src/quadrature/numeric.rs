//! Numeric potential of a closed one-form by axis-aligned path integration
//! with composite Gauss–Legendre quadrature.

use crate::error::Result;
use crate::expr::{eval, Point, Symbol};
use crate::forms::OneForm;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-like initial guess, refined by Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// F(p) = ∫ ω along the path from `base` that moves one coordinate at a
/// time, in chart order.
#[derive(Clone, Debug)]
pub struct NumericPotential {
    pub omega: OneForm,
    pub coords: Vec<Symbol>,
    pub base: Point,
    pub panels: usize,
}

impl NumericPotential {
    pub fn new(omega: OneForm, coords: Vec<Symbol>, base: Point) -> Self {
        NumericPotential {
            omega,
            coords,
            base,
            panels: 16,
        }
    }

    pub fn eval(&self, point: &Point) -> Result<f64> {
        let rule = gauss_legendre(8);
        let mut cur = self.base.clone();
        for (k, v) in point {
            if !self.coords.contains(k) {
                cur.insert(k.clone(), *v);
            }
        }
        let mut total = 0.0;
        for s in &self.coords {
            let a = self.base.get(s).copied().unwrap_or(0.0);
            let b = point.get(s).copied().unwrap_or(a);
            if a == b {
                continue;
            }
            let coeff = self.omega.coeff(s);
            let h = (b - a) / self.panels as f64;
            for j in 0..self.panels {
                let mid = a + (j as f64 + 0.5) * h;
                for (x, w) in &rule {
                    cur.insert(s.clone(), mid + 0.5 * h * x);
                    total += 0.5 * h * w * eval(&coeff, &cur)?;
                }
            }
            cur.insert(s.clone(), b);
        }
        Ok(total)
    }
}
