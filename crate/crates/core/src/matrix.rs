//! Exact linear algebra over rational functions in expression atoms.

use crate::expr::poly::Poly;
use crate::expr::{simplify, Expr, RatContext, RatFun};

type RatMatrix = Vec<Vec<RatFun>>;

fn to_rat(m: &[Vec<Expr>]) -> (RatContext, RatMatrix) {
    let flat: Vec<Expr> = m.iter().flatten().cloned().collect();
    let ctx = RatContext::new(&flat);
    let rm = m
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| {
                    ctx.to_ratfun(e)
                        .expect("matrix entries are finite expressions")
                })
                .collect()
        })
        .collect();
    (ctx, rm)
}

fn weight(r: &RatFun) -> usize {
    r.num().len() + r.den().len()
}

/// Index of the simplest nonzero entry in column `c` at or below row `from`.
fn pick_pivot(m: &RatMatrix, c: usize, from: usize) -> Option<usize> {
    (from..m.len())
        .filter(|&r| !m[r][c].is_zero())
        .min_by_key(|&r| weight(&m[r][c]))
}

fn out(ctx: &RatContext, r: &RatFun) -> Expr {
    simplify(&ctx.to_expr(r))
}

/// Rows multiplied through by a common denominator, so every entry is a
/// polynomial; returns the rows and the product of the multipliers.
fn polynomial_rows(a: &RatMatrix, nv: usize) -> (Vec<Vec<Poly>>, Poly) {
    let mut scale = Poly::one(nv);
    let mut rows = Vec::new();
    for row in a {
        let mut s = Poly::one(nv);
        for e in row {
            let d = e.den();
            if d.is_one() || s.exact_div(d).is_some() {
                continue;
            }
            s = if d.exact_div(&s).is_some() {
                d.clone()
            } else {
                s.mul(d)
            };
        }
        rows.push(
            row.iter()
                .map(|e| {
                    e.num()
                        .mul(&s.exact_div(e.den()).expect("multiple of the denominator"))
                })
                .collect(),
        );
        scale = scale.mul(&s);
    }
    (rows, scale)
}

/// Index of the simplest nonzero polynomial in column `c` at or below `from`.
fn pick_poly_pivot(m: &[Vec<Poly>], c: usize, from: usize) -> Option<usize> {
    (from..m.len())
        .filter(|&r| !m[r][c].is_zero())
        .min_by_key(|&r| m[r][c].len())
}

/// Fraction-free (Bareiss) row echelon form in place. Returns the pivot
/// columns and whether an odd number of row swaps happened. Every division is
/// exact, so no polynomial gcds are needed.
fn bareiss(a: &mut [Vec<Poly>], nv: usize) -> (Vec<usize>, bool) {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut prev = Poly::one(nv);
    let mut pivots = Vec::new();
    let mut odd = false;
    let mut row = 0;
    for c in 0..cols {
        if row == rows {
            break;
        }
        let Some(p) = pick_poly_pivot(a, c, row) else {
            continue;
        };
        if p != row {
            a.swap(p, row);
            odd = !odd;
        }
        let piv = a[row][c].clone();
        let (top, below) = a.split_at_mut(row + 1);
        let prow = &top[row];
        for r in below.iter_mut() {
            let f = std::mem::replace(&mut r[c], Poly::zero(nv));
            for k in c + 1..cols {
                let v = piv.mul(&r[k]).sub(&f.mul(&prow[k]));
                r[k] = v.exact_div(&prev).expect("Bareiss division is exact");
            }
        }
        // rows that were skipped over keep the previous divisor
        prev = piv;
        pivots.push(c);
        row += 1;
    }
    (pivots, odd)
}

/// Determinant of a square matrix.
pub fn det(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    if n == 0 {
        return Expr::one();
    }
    assert!(m.iter().all(|row| row.len() == n), "square matrix required");
    let (ctx, a) = to_rat(m);
    let nv = ctx.nvars();
    let (mut rows, scale) = polynomial_rows(&a, nv);
    let (pivots, odd) = bareiss(&mut rows, nv);
    if pivots.len() < n {
        return Expr::zero();
    }
    let d = RatFun::new(rows[n - 1][n - 1].clone(), scale);
    out(&ctx, &if odd { d.neg() } else { d })
}

/// Inverse of a square matrix, or `None` if it is singular.
pub fn inverse(m: &[Vec<Expr>]) -> Option<Vec<Vec<Expr>>> {
    let n = m.len();
    assert!(m.iter().all(|row| row.len() == n), "square matrix required");
    let (ctx, mut a) = to_rat(m);
    let nv = ctx.nvars();
    let mut b: RatMatrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        RatFun::one(nv)
                    } else {
                        RatFun::zero(nv)
                    }
                })
                .collect()
        })
        .collect();
    for c in 0..n {
        let p = pick_pivot(&a, c, c)?;
        a.swap(p, c);
        b.swap(p, c);
        let inv = a[c][c].recip();
        for k in 0..n {
            a[c][k] = a[c][k].mul(&inv);
            b[c][k] = b[c][k].mul(&inv);
        }
        for r in 0..n {
            if r == c || a[r][c].is_zero() {
                continue;
            }
            let f = a[r][c].clone();
            for k in 0..n {
                if !a[c][k].is_zero() {
                    a[r][k] = a[r][k].sub(&f.mul(&a[c][k]));
                }
                if !b[c][k].is_zero() {
                    b[r][k] = b[r][k].sub(&f.mul(&b[c][k]));
                }
            }
        }
    }
    Some(
        b.iter()
            .map(|row| row.iter().map(|r| out(&ctx, r)).collect())
            .collect(),
    )
}

/// Pivot columns of a row-echelon form: a maximal set of columns whose minor
/// with the independent rows is nonzero.
pub fn pivot_columns(m: &[Vec<Expr>]) -> Vec<usize> {
    if m.is_empty() {
        return Vec::new();
    }
    let (ctx, a) = to_rat(m);
    let (mut rows, _) = polynomial_rows(&a, ctx.nvars());
    bareiss(&mut rows, ctx.nvars()).0
}

/// Submatrix with the given columns.
pub fn columns(m: &[Vec<Expr>], cols: &[usize]) -> Vec<Vec<Expr>> {
    m.iter()
        .map(|row| cols.iter().map(|&c| row[c].clone()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, SymbolTable};

    fn p(s: &str) -> Expr {
        parse(s, &SymbolTable::with_dependents(&["u"])).unwrap()
    }

    #[test]
    fn determinant_and_inverse() {
        let m = vec![vec![p("u"), p("1")], vec![p("x"), p("u_x")]];
        assert_eq!(det(&m), simplify(&p("u*u_x - x")));
        let inv = inverse(&m).unwrap();
        assert_eq!(inv[0][0], simplify(&p("u_x/(u*u_x - x)")));
        assert_eq!(inv[0][1], simplify(&p("-1/(u*u_x - x)")));
        let sing = vec![vec![p("u"), p("x")], vec![p("2*u"), p("2*x")]];
        assert!(det(&sing).is_zero());
        assert!(inverse(&sing).is_none());
    }

    #[test]
    fn pivots_skip_dependent_columns() {
        let m = vec![vec![p("1"), p("u"), p("0")], vec![p("2"), p("2*u"), p("x")]];
        assert_eq!(pivot_columns(&m), vec![0, 2]);
    }
}
