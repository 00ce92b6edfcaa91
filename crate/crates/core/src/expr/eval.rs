use std::collections::BTreeMap;

use num_traits::{Signed, ToPrimitive};

use super::node::{Expr, Kernel, Node};
use super::symbol::Symbol;
use super::ExprError;

/// Numeric values for symbols.
pub type Point = BTreeMap<Symbol, f64>;

fn domain(detail: impl Into<String>) -> ExprError {
    ExprError::Domain {
        detail: detail.into(),
    }
}

/// Evaluates `e` in f64. Non-finite results, logarithms of non-positive
/// numbers and even roots of negative numbers are domain errors.
pub fn eval(e: &Expr, point: &Point) -> Result<f64, ExprError> {
    let v = match e.node() {
        Node::Num(q) => q
            .to_f64()
            .ok_or_else(|| domain("numeric literal out of range"))?,
        Node::Sym(s) => *point.get(s).ok_or_else(|| ExprError::Unbound {
            name: s.name().to_string(),
        })?,
        Node::Add(ts) => {
            let mut acc = 0.0;
            for t in ts {
                acc += eval(t, point)?;
            }
            acc
        }
        Node::Mul(fs) => {
            let mut acc = 1.0;
            for f in fs {
                acc *= eval(f, point)?;
            }
            acc
        }
        Node::Pow(b, q) => {
            let bv = eval(b, point)?;
            if bv == 0.0 && q.is_negative() {
                return Err(domain(format!("division by zero in {e}")));
            }
            if q.is_integer() {
                match q.to_i32() {
                    Some(n) => bv.powi(n),
                    None => bv.powf(q.to_f64().unwrap_or(f64::NAN)),
                }
            } else {
                let qf = q.to_f64().unwrap_or(f64::NAN);
                if bv < 0.0 {
                    let odd_den = q.denom() % 2u32 == 1u32.into();
                    if !odd_den {
                        return Err(domain(format!("even root of negative value in {e}")));
                    }
                    let mag = (-bv).powf(qf);
                    let odd_num = q.numer() % 2u32 != 0u32.into();
                    if odd_num {
                        -mag
                    } else {
                        mag
                    }
                } else {
                    bv.powf(qf)
                }
            }
        }
        Node::Fun(k, a) => {
            let av = eval(a, point)?;
            match k {
                Kernel::Exp => av.exp(),
                Kernel::Log => {
                    if av <= 0.0 {
                        return Err(domain(format!("log of non-positive value in {e}")));
                    }
                    av.ln()
                }
                Kernel::Sin => av.sin(),
                Kernel::Cos => av.cos(),
            }
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain(format!("non-finite value in {e}")))
    }
}

/// Values of the top-level terms of `e`.
pub fn eval_terms(e: &Expr, point: &Point) -> Result<Vec<f64>, ExprError> {
    e.terms().iter().map(|t| eval(t, point)).collect()
}
