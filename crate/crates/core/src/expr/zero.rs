use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::eval::{eval, Point};
use super::node::{Expr, Node};
use super::ratfun::simplify;
use super::ExprError;

/// Outcome of a zero test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Exactly zero after canonical simplification.
    Zero,
    /// Not reduced to zero, but vanished at every sample point.
    ProbablyZero,
    NonZero,
}

impl Verdict {
    pub fn is_zero(self) -> bool {
        !matches!(self, Verdict::NonZero)
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Zero => "zero",
            Verdict::ProbablyZero => "probably-zero",
            Verdict::NonZero => "nonzero",
        }
    }
}

/// Simplify-then-sample zero test.
#[derive(Clone, Debug)]
pub struct ZeroTest {
    pub samples: usize,
    /// Relative tolerance against the magnitude of the largest term.
    pub tolerance: f64,
    pub seed: u64,
    /// Skip the symbolic stage.
    pub numeric_only: bool,
}

impl Default for ZeroTest {
    fn default() -> Self {
        ZeroTest {
            samples: 8,
            tolerance: 1e-9,
            seed: 0x5eed_0001,
            numeric_only: false,
        }
    }
}

/// True when `e` is a rational function of plain symbols, so a nonzero normal
/// form is a proof of non-vanishing.
fn purely_rational(e: &Expr) -> bool {
    match e.node() {
        Node::Num(_) | Node::Sym(_) => true,
        Node::Add(cs) | Node::Mul(cs) => cs.iter().all(purely_rational),
        Node::Pow(b, q) => q.is_integer() && purely_rational(b),
        Node::Fun(..) => false,
    }
}

/// Size of `e` ignoring cancellation between terms.
fn magnitude(e: &Expr, point: &Point) -> Result<f64, ExprError> {
    Ok(match e.node() {
        Node::Add(ts) => {
            let mut acc = 0.0;
            for t in ts {
                acc += magnitude(t, point)?;
            }
            acc
        }
        Node::Mul(fs) => {
            let mut acc = 1.0;
            for f in fs {
                acc *= magnitude(f, point)?;
            }
            acc
        }
        Node::Pow(b, q) if q > &num_traits::Zero::zero() => {
            use num_traits::ToPrimitive;
            magnitude(b, point)?.powf(q.to_f64().unwrap_or(1.0))
        }
        _ => eval(e, point)?.abs(),
    })
}

fn sample_coordinate(rng: &mut ChaCha8Rng) -> f64 {
    // rationals k/100 with |k| in [50, 1000]
    let k: i32 = rng.gen_range(50..=1000);
    let v = k as f64 / 100.0;
    if rng.gen_bool(0.5) {
        v
    } else {
        -v
    }
}

impl ZeroTest {
    pub fn check(&self, e: &Expr) -> Result<Verdict, ExprError> {
        if e.is_zero() {
            return Ok(Verdict::Zero);
        }
        if e.as_num().is_some() {
            return Ok(Verdict::NonZero);
        }
        if !self.numeric_only {
            let s = simplify(e);
            if s.is_zero() {
                return Ok(Verdict::Zero);
            }
            if purely_rational(&s) {
                return Ok(Verdict::NonZero);
            }
        }
        self.sample(e)
    }

    fn sample(&self, e: &Expr) -> Result<Verdict, ExprError> {
        let syms: Vec<_> = e.free_symbols().into_iter().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut valid = 0;
        let max_attempts = self.samples.max(1) * 50;
        for _ in 0..max_attempts {
            if valid >= self.samples {
                break;
            }
            let point: Point = syms
                .iter()
                .map(|s| (s.clone(), sample_coordinate(&mut rng)))
                .collect();
            let v = match eval(e, &point) {
                Ok(v) => v,
                Err(ExprError::Domain { .. }) => continue,
                Err(err) => return Err(err),
            };
            let scale = match magnitude(e, &point) {
                Ok(m) if m.is_finite() => m,
                _ => continue,
            };
            valid += 1;
            if v.abs() > self.tolerance * scale.max(f64::MIN_POSITIVE) {
                return Ok(Verdict::NonZero);
            }
        }
        if valid == 0 {
            return Err(ExprError::Indeterminate);
        }
        Ok(Verdict::ProbablyZero)
    }
}

/// Zero test with default settings.
pub fn is_zero(e: &Expr) -> Result<Verdict, ExprError> {
    ZeroTest::default().check(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, SymbolTable};

    fn p(s: &str) -> Expr {
        parse(s, &SymbolTable::with_dependents(&["u"])).unwrap()
    }

    #[test]
    fn verdicts() {
        assert_eq!(
            is_zero(&p("(u^2 - 1)/(u - 1) - u - 1")).unwrap(),
            Verdict::Zero
        );
        assert_eq!(is_zero(&p("u_x + 1")).unwrap(), Verdict::NonZero);
        // exp(log-sum) identities are not caught by the normal form
        assert_eq!(
            is_zero(&p("log(u^2) - 2*log(u)")).unwrap(),
            Verdict::ProbablyZero
        );
        assert_eq!(
            is_zero(&p("sin(x)^2 + cos(x)^2 - 1")).unwrap(),
            Verdict::ProbablyZero
        );
        assert_eq!(is_zero(&p("exp(x) - 1 - x")).unwrap(), Verdict::NonZero);
    }

    #[test]
    fn all_singular_is_indeterminate() {
        let e = p("log(-u^2 - 1)");
        let t = ZeroTest {
            numeric_only: true,
            ..ZeroTest::default()
        };
        assert_eq!(t.check(&e), Err(ExprError::Indeterminate));
    }

    #[test]
    fn deterministic_by_seed() {
        let e = p("sin(x)*cos(x) - sin(2*x)/2");
        let t = ZeroTest {
            numeric_only: true,
            ..ZeroTest::default()
        };
        assert_eq!(t.check(&e).unwrap(), t.check(&e).unwrap());
    }
}
