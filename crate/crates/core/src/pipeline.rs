//! The full pipeline on a loaded problem: compatibility, structure check,
//! descent and residual verification, with flat key=value reports.

use std::fmt;

use crate::constraint::{
    build_submanifold, check_compatibility, prolong_vertical_field, restricted_pair,
    CompatibilityReport, ConstraintSet, RestrictedPair, Submanifold,
};
use crate::error::{Error, Result};
use crate::expr::{eval, simplify, Expr, Kernel, Node, Point, Symbol, ZeroTest};
use crate::jetspace::EvolutionSystem;
use crate::problem::{FieldSpec, ProblemFile};
use crate::quadrature::{descend, DescentOptions, Potential, ReductionChain};
use crate::structure::{
    is_abelian, verify_solvable_structure, AbelianReport, StructureCertificate, VectorField,
};
use crate::verifier::{constraint_residual, residual, ResidualReport, SamplePlan};

/// Command-line overrides of the problem options.
#[derive(Clone, Debug, Default)]
pub struct Settings {
    pub truncation: Option<u32>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub numeric_only: bool,
}

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Failed = 1,
    InputError = 2,
    Limitation = 3,
}

impl Status {
    pub fn of_error(e: &Error) -> Status {
        if e.is_input_error() {
            Status::InputError
        } else if e.is_limitation() {
            Status::Limitation
        } else {
            Status::Failed
        }
    }

    pub fn code(self) -> i32 {
        self as i32
    }
}

/// A problem with everything derived from it that the stages share.
pub struct Session {
    pub problem: ProblemFile,
    pub sys: EvolutionSystem,
    pub cons: ConstraintSet,
    pub h: Submanifold,
    pub pair: RestrictedPair,
    pub names: Vec<String>,
    pub fields: Vec<VectorField>,
    pub zero_test: ZeroTest,
    pub plan: SamplePlan,
}

/// K large enough for the structure checks and two compatibility cross-checks.
fn default_truncation(sys: &EvolutionSystem, cons: &ConstraintSet) -> u32 {
    let q = sys.order_bound();
    (q + 4).max(cons.max_order() + q + 2)
}

impl Session {
    pub fn new(problem: &ProblemFile, settings: &Settings) -> Result<Session> {
        let sys = EvolutionSystem::new(problem.table(), problem.evolution.clone())?;
        let cons = ConstraintSet::new(problem.constraints.clone())?;
        let k = settings
            .truncation
            .or(problem.options.truncation)
            .unwrap_or_else(|| default_truncation(&sys, &cons));
        let sys = sys.with_truncation(k);
        let mut h = build_submanifold(&sys, &cons)?;
        if let Some(order) = &problem.options.volume_order {
            h = h.with_chart_order(order.clone())?;
        }
        let pair = restricted_pair(&sys, &h)?;
        let mut names = Vec::new();
        let mut fields = Vec::new();
        for s in &problem.symmetries {
            let field = match &s.spec {
                FieldSpec::Components(cs) => {
                    let mut f = VectorField::new();
                    for (k, e) in cs {
                        if !h.chart().contains(k) {
                            return Err(Error::InvalidField(format!(
                                "{}: {k} is not a coordinate on H",
                                s.name
                            )));
                        }
                        f.set(k.clone(), h.restrict(e)?);
                    }
                    f
                }
                FieldSpec::Prolong(gens) => prolong_vertical_field(gens, &sys, &h, &pair)?,
            };
            names.push(s.name.clone());
            fields.push(field);
        }
        let seed = settings.seed.or(problem.options.seed);
        let mut zero_test = ZeroTest {
            numeric_only: settings.numeric_only,
            ..ZeroTest::default()
        };
        let mut plan = SamplePlan::default();
        if let Some(seed) = seed {
            zero_test.seed = seed;
            plan.seed = seed;
        }
        if let Some(n) = settings.samples.or(problem.options.samples) {
            plan.count = n;
        }
        Ok(Session {
            problem: problem.clone(),
            sys,
            cons,
            h,
            pair,
            names,
            fields,
            zero_test,
            plan,
        })
    }

    pub fn check_constraint(&self) -> Result<CompatibilityReport> {
        check_compatibility(&self.sys, &self.cons, &self.h, &self.zero_test)
    }

    pub fn check_structure(&self) -> Result<StructureCertificate> {
        verify_solvable_structure(
            &self.names,
            &self.fields,
            &self.pair,
            self.h.chart(),
            &self.zero_test,
        )
    }

    pub fn abelian(&self) -> Result<AbelianReport> {
        is_abelian(&self.fields, &self.pair, self.h.chart(), &self.zero_test)
    }

    pub fn descent_options(&self) -> Result<DescentOptions> {
        let mut base_point = Point::new();
        for (s, e) in &self.problem.options.base_point {
            base_point.insert(s.clone(), eval(e, &Point::new())?);
        }
        Ok(DescentOptions {
            base_point,
            parameters: Point::new(),
            zero_test: self.zero_test.clone(),
        })
    }

    pub fn reduce(&self) -> Result<ReductionChain> {
        self.reduce_with(&self.descent_options()?)
    }

    pub fn reduce_with(&self, opts: &DescentOptions) -> Result<ReductionChain> {
        let deps: Vec<Symbol> = (1..=self.sys.m())
            .map(|i| self.sys.table().jet(i, 0))
            .collect();
        descend(&self.fields, &self.pair, self.h.chart(), &deps, opts)
    }

    /// PDE and constraint residuals of `sol` (indexed like the dependents).
    pub fn verify(&self, sol: &[Expr]) -> Result<Vec<ResidualReport>> {
        let mut out = residual(sol, &self.sys, &self.plan, &self.zero_test)?;
        out.extend(constraint_residual(
            sol,
            &self.sys,
            &self.cons,
            &self.plan,
            &self.zero_test,
        )?);
        Ok(out)
    }
}

/// Arguments assumed positive: logarithms and even roots.
pub fn side_conditions(e: &Expr) -> Vec<Expr> {
    fn walk(e: &Expr, out: &mut Vec<Expr>) {
        match e.node() {
            Node::Fun(Kernel::Log, a) => {
                if !out.contains(a) && a.as_num().is_none() {
                    out.push(a.clone());
                }
                walk(a, out);
            }
            Node::Pow(b, q) if q.denom() % 2u8 == 0u8.into() => {
                if !out.contains(b) && b.as_num().is_none() {
                    out.push(b.clone());
                }
                walk(b, out);
            }
            Node::Num(_) | Node::Sym(_) => {}
            Node::Pow(b, _) | Node::Fun(_, b) => walk(b, out),
            Node::Add(cs) | Node::Mul(cs) => cs.iter().for_each(|c| walk(c, out)),
        }
    }
    let mut out = Vec::new();
    walk(e, &mut out);
    out
}

/// One `key=value` block of the machine-readable report.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub name: String,
    pub entries: Vec<(String, String)>,
}

impl Block {
    pub fn new(name: impl Into<String>) -> Self {
        Block {
            name: name.into(),
            entries: Vec::new(),
        }
    }

    pub fn put(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.entries
            .push((key.into(), value.to_string().replace('\n', " ")));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

/// Blocks in stage order, plus a human-readable summary.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub blocks: Vec<Block>,
    pub summary: Vec<String>,
}

impl Report {
    pub fn block(&self, name: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.name == name)
    }

    fn say(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, b) in self.blocks.iter().enumerate() {
            if n > 0 {
                writeln!(f)?;
            }
            writeln!(f, "block={}", b.name)?;
            for (k, v) in &b.entries {
                writeln!(f, "{k}={v}")?;
            }
        }
        Ok(())
    }
}

fn num(v: f64) -> String {
    format!("{v:.6e}")
}

impl Session {
    pub fn report_constraint(&self, rep: &mut Report) -> Result<Status> {
        let c = self.check_constraint()?;
        for e in &c.entries {
            let dep = self.sys.table().dependent_name(e.dep);
            let mut b = Block::new(format!("constraint.{dep}"));
            b.put("order", self.cons.order(e.dep))
                .put("rhs", self.cons.rhs(e.dep))
                .put("expr", &e.residual)
                .put("verdict", e.verdict.label());
            let cross: Vec<&str> = e
                .cross_checks
                .iter()
                .map(|v| v.map_or("skipped", |v| v.label()))
                .collect();
            b.put("cross_checks", cross.join(","));
            rep.blocks.push(b);
        }
        let ok = c.compatible();
        let mut b = Block::new("check-constraint");
        b.put("verdict", if ok { "compatible" } else { "incompatible" })
            .put("chart", join(self.h.chart()));
        rep.blocks.push(b);
        rep.say(format!(
            "constraint submanifold: {}",
            if ok { "compatible" } else { "incompatible" }
        ));
        for e in c.entries.iter().filter(|e| !e.verdict.is_zero()) {
            rep.say(format!(
                "  Dt(L) on H for {} = {}",
                self.sys.table().dependent_name(e.dep),
                e.residual
            ));
        }
        Ok(if ok { Status::Ok } else { Status::Failed })
    }

    pub fn report_structure(&self, rep: &mut Report) -> Result<Status> {
        let cert = self.check_structure()?;
        for c in &cert.checks {
            let mut b = Block::new(format!("bracket.{}", c.label));
            b.put("expr", c.bracket.simplified())
                .put("verdict", if c.in_span { "in-span" } else { "not-in-span" });
            if !c.certificate.pivot_columns.is_empty() {
                b.put("pivot_minor", &c.certificate.pivot_minor);
            }
            rep.blocks.push(b);
        }
        let ab = self.abelian()?;
        let delta = simplify(&cert.delta);
        let mut b = Block::new("check-structure");
        b.put(
            "verdict",
            if cert.accepted {
                "accepted"
            } else {
                "rejected"
            },
        )
        .put("fields", self.names.join(","))
        .put("delta", &delta)
        .put("delta_verdict", cert.delta_verdict.label())
        .put("M", simplify(&Expr::recip(delta.clone())))
        .put("abelian", ab.is_abelian());
        if let Some(f) = &cert.failure {
            b.put("failure", f);
        }
        rep.blocks.push(b);
        if cert.accepted {
            rep.say(format!(
                "solvable structure {}: accepted",
                self.names.join(", ")
            ));
            rep.say(format!("  M = 1/({delta})"));
        } else {
            let f = cert.failure.clone().unwrap_or_default();
            rep.say(format!(
                "solvable structure {}: rejected at {f}",
                self.names.join(", ")
            ));
            if let Some(c) = cert.checks.iter().find(|c| !c.in_span) {
                rep.say(format!("  {} = {}", c.label, c.bracket.simplified()));
            }
        }
        Ok(if cert.accepted {
            Status::Ok
        } else {
            Status::Failed
        })
    }

    /// Runs the descent; the chain is returned for verification when complete.
    pub fn report_reduce(&self, rep: &mut Report) -> Result<(Status, Option<ReductionChain>)> {
        let chain = self.reduce()?;
        for l in &chain.levels {
            let mut b = Block::new(format!("level.{}", l.index));
            b.put("omega", &l.omega).put("closed", l.closed);
            match &l.potential {
                Some(Potential::Symbolic(f)) => {
                    b.put("potential", f)
                        .put("constant", &l.constant)
                        .put("constant_base", num(l.constant_value));
                    rep.say(format!("  F{} = {f}", l.index));
                }
                Some(Potential::Numeric(np)) => {
                    b.put("potential", "numeric");
                    if let Ok(v) = np.eval(&chain.base) {
                        b.put("potential_base", num(v));
                    }
                }
                None => {}
            }
            if let Some((a, c)) = l.first_integral {
                b.put("first_integral", format!("{},{}", a.label(), c.label()));
            }
            if let Some(s) = &l.solution {
                b.put("solved_for", &s.var).put("value", &s.value);
                for (k, rel) in &s.derived {
                    b.put(format!("derived.{k}"), rel);
                }
                if !s.alternatives.is_empty() {
                    b.put("alternatives", join(&s.alternatives));
                }
                rep.say(format!(
                    "    on F{} = {}: {} = {}",
                    l.index, l.constant, s.var, s.value
                ));
            }
            rep.blocks.push(b);
        }
        let mut b = Block::new("reduce");
        b.put("delta", &chain.delta);
        let status = match (&chain.failure, &chain.solution) {
            (None, Some(sol)) => {
                b.put("verdict", "complete");
                let mut conds = Vec::new();
                for (u, e) in sol {
                    b.put(format!("solution.{u}"), e);
                    rep.say(format!("solution: {u} = {e}"));
                    for c in side_conditions(e) {
                        if !conds.contains(&c) {
                            conds.push(c);
                        }
                    }
                }
                for l in &chain.levels {
                    if let Some(s) = &l.solution {
                        for c in side_conditions(&s.value) {
                            if !conds.contains(&c) {
                                conds.push(c);
                            }
                        }
                    }
                }
                for (n, c) in conds.iter().enumerate() {
                    b.put(format!("side_condition.{}", n + 1), format!("{c} > 0"));
                }
                for (k, v) in chain.constants() {
                    b.put(format!("base.{k}"), num(v));
                }
                Status::Ok
            }
            (Some(e), _) => {
                b.put("verdict", "incomplete").put("failure", e);
                rep.say(format!("descent stopped: {e}"));
                Status::of_error(e)
            }
            (None, None) => {
                b.put("verdict", "incomplete");
                Status::Failed
            }
        };
        rep.blocks.push(b);
        let chain = (status == Status::Ok).then_some(chain);
        Ok((status, chain))
    }

    pub fn report_verify(&self, sol: &[Expr], rep: &mut Report) -> Result<Status> {
        let reports = self.verify(sol)?;
        let mut ok = true;
        for r in &reports {
            let mut b = Block::new(format!("residual.{}", r.label));
            b.put("verdict", if r.pass { "pass" } else { "fail" })
                .put("expr", &r.expr)
                .put("symbolic", r.symbolic.label())
                .put("max_residual", num(r.max_abs))
                .put("max_rel", num(r.max_rel))
                .put("samples", r.samples)
                .put("rejected", r.rejected);
            rep.blocks.push(b);
            rep.say(format!(
                "residual {}: {} (max rel {}, abs {}, symbolic {})",
                r.label,
                if r.pass { "pass" } else { "fail" },
                num(r.max_rel),
                num(r.max_abs),
                r.symbolic.label()
            ));
            ok &= r.pass;
        }
        Ok(if ok { Status::Ok } else { Status::Failed })
    }

    /// Every stage in order, stopping at the first failure.
    pub fn report_all(&self, rep: &mut Report) -> Result<Status> {
        let s = self.report_constraint(rep)?;
        if s != Status::Ok {
            return Ok(s);
        }
        let s = self.report_structure(rep)?;
        if s != Status::Ok {
            return Ok(s);
        }
        let (s, chain) = self.report_reduce(rep)?;
        let Some(chain) = chain else { return Ok(s) };
        let sol: Vec<Expr> = chain
            .solution
            .expect("complete chain")
            .into_iter()
            .map(|(_, e)| e)
            .collect();
        self.report_verify(&sol, rep)
    }
}

fn join(syms: &[Symbol]) -> String {
    syms.iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::bundled;

    fn session(text: &str) -> Session {
        let p = ProblemFile::parse("t.prob", text, &[]).unwrap();
        Session::new(&p, &Settings::default()).unwrap()
    }

    #[test]
    fn burgers_pipeline_is_deterministic() {
        let s = session(bundled::BURGERS);
        let mut a = Report::default();
        assert_eq!(s.report_all(&mut a).unwrap(), Status::Ok, "{a}");
        let mut b = Report::default();
        s.report_all(&mut b).unwrap();
        assert_eq!(a.to_string(), b.to_string());
        assert_eq!(
            a.block("check-constraint").unwrap().get("verdict"),
            Some("compatible")
        );
        assert!(a.block("reduce").unwrap().get("side_condition.1").is_some());
    }

    #[test]
    fn side_conditions_collect_log_and_root_arguments() {
        let t = crate::expr::SymbolTable::with_dependents(&["u"]);
        let e = crate::expr::parse("log(x + 1) + (t + 2)^(1/2) + u^3", &t).unwrap();
        assert_eq!(side_conditions(&e).len(), 2);
    }
}
