//! Vector fields on the constraint submanifold, brackets, span membership and
//! solvable-structure certificates.

use std::collections::BTreeMap;
use std::fmt;

use crate::constraint::RestrictedPair;
use crate::error::{Error, Result};
use crate::expr::{diff, simplify, Expr, Symbol, Verdict, ZeroTest};
use crate::matrix;

/// Components over chart coordinates; absent entries are zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VectorField {
    comps: BTreeMap<Symbol, Expr>,
}

impl VectorField {
    pub fn new() -> Self {
        VectorField::default()
    }

    pub fn from_components<I: IntoIterator<Item = (Symbol, Expr)>>(it: I) -> Self {
        let mut v = VectorField::new();
        for (s, e) in it {
            v.set(s, e);
        }
        v
    }

    /// ∂_s.
    pub fn coordinate(s: &Symbol) -> Self {
        VectorField::from_components([(s.clone(), Expr::one())])
    }

    pub fn set(&mut self, s: Symbol, e: Expr) {
        if e.is_zero() {
            self.comps.remove(&s);
        } else {
            self.comps.insert(s, e);
        }
    }

    pub fn component(&self, s: &Symbol) -> Expr {
        self.comps.get(s).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn components(&self) -> impl Iterator<Item = (&Symbol, &Expr)> {
        self.comps.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Derivative of `e` along the field.
    pub fn apply(&self, e: &Expr) -> Expr {
        Expr::add(
            self.comps
                .iter()
                .map(|(s, c)| Expr::mul([c.clone(), diff(e, s)])),
        )
    }

    pub fn scale(&self, f: &Expr) -> Self {
        VectorField::from_components(
            self.comps
                .iter()
                .map(|(s, c)| (s.clone(), simplify(&(c * f)))),
        )
    }

    pub fn add(&self, o: &VectorField) -> Self {
        let mut out = self.clone();
        for (s, c) in &o.comps {
            let v = simplify(&(&out.component(s) + c));
            out.set(s.clone(), v);
        }
        out
    }

    pub fn sub(&self, o: &VectorField) -> Self {
        self.add(&o.scale(&Expr::int(-1)))
    }

    pub fn simplified(&self) -> Self {
        VectorField::from_components(self.comps.iter().map(|(s, c)| (s.clone(), simplify(c))))
    }

    /// Component row in the given coordinate order.
    pub fn row(&self, chart: &[Symbol]) -> Vec<Expr> {
        chart.iter().map(|s| self.component(s)).collect()
    }

    /// Coordinates outside `chart` carrying a nonzero component.
    pub fn off_chart(&self, chart: &[Symbol]) -> Vec<Symbol> {
        self.comps
            .keys()
            .filter(|s| !chart.contains(s))
            .cloned()
            .collect()
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.comps.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .comps
            .iter()
            .map(|(s, c)| {
                if c.is_one() {
                    format!("d/d{s}")
                } else {
                    format!("({c})*d/d{s}")
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// `[X, Y]^k = X(Y^k) - Y(X^k)`.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> VectorField {
    let mut keys: Vec<&Symbol> = x.comps.keys().chain(y.comps.keys()).collect();
    keys.sort();
    keys.dedup();
    VectorField::from_components(keys.into_iter().map(|k| {
        (
            k.clone(),
            simplify(&x.apply(&y.component(k)).sub(&y.apply(&x.component(k)))),
        )
    }))
}

/// Outcome of a span-membership test.
#[derive(Clone, Debug)]
pub struct SpanCertificate {
    pub in_span: bool,
    /// Nonzero maximal minor of the generators, with its columns.
    pub pivot_columns: Vec<usize>,
    pub pivot_minor: Expr,
    /// Bordered minors `(extra column, minor, verdict)`.
    pub minors: Vec<(usize, Expr, Verdict)>,
}

/// Decides whether `z` lies in the module spanned by `gens` over functions.
pub fn in_span(
    z: &VectorField,
    gens: &[VectorField],
    chart: &[Symbol],
    zt: &ZeroTest,
) -> Result<SpanCertificate> {
    for f in gens.iter().chain(std::iter::once(z)) {
        let off = f.off_chart(chart);
        if !off.is_empty() {
            return Err(Error::InvalidField(format!(
                "component along {} is off the chart",
                off[0]
            )));
        }
    }
    let rows: Vec<Vec<Expr>> = gens.iter().map(|g| g.row(chart)).collect();
    let zrow = z.row(chart);
    let pivots = if rows.is_empty() {
        Vec::new()
    } else {
        matrix::pivot_columns(&rows)
    };
    if pivots.len() < gens.len() {
        return Err(Error::DependentGenerators(format!(
            "rank {} < {}",
            pivots.len(),
            gens.len()
        )));
    }
    let pivot_minor = matrix::det(&matrix::columns(&rows, &pivots));
    if !rows.is_empty() && !zt.check(&pivot_minor)?.eq(&Verdict::NonZero) {
        return Err(Error::DependentGenerators(format!(
            "pivot minor {pivot_minor} vanishes"
        )));
    }
    let mut full = rows.clone();
    full.push(zrow);
    let mut minors = Vec::new();
    let mut in_span = true;
    for c in (0..chart.len()).filter(|c| !pivots.contains(c)) {
        let mut cols = pivots.clone();
        cols.push(c);
        cols.sort_unstable();
        let minor = matrix::det(&matrix::columns(&full, &cols));
        let v = zt.check(&minor)?;
        if !v.is_zero() {
            in_span = false;
        }
        minors.push((c, minor, v));
        if !in_span {
            break;
        }
    }
    Ok(SpanCertificate {
        in_span,
        pivot_columns: pivots,
        pivot_minor,
        minors,
    })
}

/// One bracket condition of a solvable structure.
#[derive(Clone, Debug)]
pub struct BracketCheck {
    pub label: String,
    pub bracket: VectorField,
    pub in_span: bool,
    pub certificate: SpanCertificate,
}

#[derive(Clone, Debug)]
pub struct StructureCertificate {
    pub checks: Vec<BracketCheck>,
    /// Determinant of (X_1, …, X_{r-2}, D̃_x, D̃_t) in chart order.
    pub delta: Expr,
    pub delta_verdict: Verdict,
    pub accepted: bool,
    /// Label of the first failing condition.
    pub failure: Option<String>,
}

/// Component matrix with rows `X_1, …, X_{r-2}, D̃_x, D̃_t`.
pub fn frame_matrix(
    fields: &[VectorField],
    pair: &RestrictedPair,
    chart: &[Symbol],
) -> Vec<Vec<Expr>> {
    fields
        .iter()
        .chain([&pair.dx, &pair.dt])
        .map(|f| f.row(chart))
        .collect()
}

/// Checks that each X_h is a symmetry of C_H ⊕ ⟨X_1, …, X_{h-1}⟩ and that the
/// full frame is transversal (Δ ≢ 0).
pub fn verify_solvable_structure(
    names: &[String],
    fields: &[VectorField],
    pair: &RestrictedPair,
    chart: &[Symbol],
    zt: &ZeroTest,
) -> Result<StructureCertificate> {
    if fields.len() + 2 != chart.len() {
        return Err(Error::InvalidField(format!(
            "{} fields given, the chart needs {}",
            fields.len(),
            chart.len() - 2
        )));
    }
    let mut checks = Vec::new();
    let mut failure = None;
    'outer: for h in 0..fields.len() {
        let mut gens = vec![pair.dx.clone(), pair.dt.clone()];
        gens.extend(fields[..h].iter().cloned());
        let mut targets: Vec<(String, VectorField)> = vec![
            (format!("[{}, Dx]", names[h]), pair.dx.clone()),
            (format!("[{}, Dt]", names[h]), pair.dt.clone()),
        ];
        for j in 0..h {
            targets.push((format!("[{}, {}]", names[h], names[j]), fields[j].clone()));
        }
        for (label, other) in targets {
            let bracket = lie_bracket(&fields[h], &other);
            let cert = in_span(&bracket, &gens, chart, zt)?;
            let ok = cert.in_span;
            checks.push(BracketCheck {
                label: label.clone(),
                bracket,
                in_span: ok,
                certificate: cert,
            });
            if !ok {
                failure = Some(label);
                break 'outer;
            }
        }
    }
    let delta = matrix::det(&frame_matrix(fields, pair, chart));
    let delta_verdict = zt.check(&delta)?;
    if failure.is_none() && delta_verdict.is_zero() {
        failure = Some("transversality: determinant vanishes identically".to_string());
    }
    Ok(StructureCertificate {
        checks,
        delta,
        delta_verdict,
        accepted: failure.is_none(),
        failure,
    })
}

#[derive(Clone, Debug)]
pub struct AbelianReport {
    /// All pairwise brackets of the fields vanish.
    pub fields_commute: bool,
    /// Per field: brackets with D̃_x and D̃_t lie in C_H.
    pub commutes_with_distribution: Vec<bool>,
}

impl AbelianReport {
    pub fn is_abelian(&self) -> bool {
        self.fields_commute && self.commutes_with_distribution.iter().all(|b| *b)
    }
}

pub fn is_abelian(
    fields: &[VectorField],
    pair: &RestrictedPair,
    chart: &[Symbol],
    zt: &ZeroTest,
) -> Result<AbelianReport> {
    let mut fields_commute = true;
    'pairs: for i in 0..fields.len() {
        for j in i + 1..fields.len() {
            if !lie_bracket(&fields[i], &fields[j]).is_zero() {
                fields_commute = false;
                break 'pairs;
            }
        }
    }
    let gens = [pair.dx.clone(), pair.dt.clone()];
    let mut commutes_with_distribution = Vec::new();
    for f in fields {
        let mut ok = true;
        for d in &gens {
            if !in_span(&lie_bracket(f, d), &gens, chart, zt)?.in_span {
                ok = false;
            }
        }
        commutes_with_distribution.push(ok);
    }
    Ok(AbelianReport {
        fields_commute,
        commutes_with_distribution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, SymbolTable};

    #[test]
    fn brackets_of_coordinate_fields() {
        let t = SymbolTable::with_dependents(&["u"]);
        let p = |s: &str| parse(s, &t).unwrap();
        let dx = VectorField::coordinate(&Symbol::x());
        let dt = VectorField::coordinate(&Symbol::t());
        assert!(lie_bracket(&dx, &dt).is_zero());
        let xdx = VectorField::from_components([(Symbol::x(), p("x"))]);
        assert_eq!(lie_bracket(&dx, &xdx), dx);
        assert_eq!(lie_bracket(&xdx, &dx), dx.scale(&Expr::int(-1)));
    }

    #[test]
    fn span_membership() {
        let t = SymbolTable::with_dependents(&["u"]);
        let chart = vec![Symbol::t(), Symbol::x(), t.jet(1, 0)];
        let zt = ZeroTest::default();
        let dx = VectorField::coordinate(&Symbol::x());
        let dt = VectorField::coordinate(&Symbol::t());
        assert!(
            !in_span(&dt, std::slice::from_ref(&dx), &chart, &zt)
                .unwrap()
                .in_span
        );
        let uxdx = VectorField::from_components([(Symbol::x(), Expr::sym(t.jet(1, 1)))]);
        assert!(
            in_span(&uxdx, std::slice::from_ref(&dx), &chart, &zt)
                .unwrap()
                .in_span
        );
        assert!(matches!(
            in_span(&dt, &[dx.clone(), dx.scale(&Expr::int(2))], &chart, &zt),
            Err(Error::DependentGenerators(_))
        ));
    }
}
