//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach the terminal.
//! The process fails when any check fails, except the checks listed in
//! `KNOWN_UNATTAINABLE`, which are still executed and printed as FAIL.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use solvstruct::expr::{
    diff, eval, parse, simplify, substitute, Expr, Point, Rules, Symbol, SymbolTable, Verdict,
};
use solvstruct::forms::{dual_forms, OneForm};
use solvstruct::pipeline::{Report, Session, Settings, Status};
use solvstruct::problem::{bundled, ProblemFile};
use solvstruct::quadrature::{abelian_potentials, integrate_closed, Potential, ReductionChain};
use solvstruct::structure::{is_abelian, lie_bracket, verify_solvable_structure, VectorField};
use solvstruct::Error;

/// Checks that cannot hold for the given data; see the printed reason.
const KNOWN_UNATTAINABLE: [&str; 1] = ["6.burgers-ux-1-rejected"];

struct Outcome {
    checks: Vec<(String, bool, String)>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { checks: Vec::new() }
    }

    fn check(&mut self, id: &str, ok: bool, detail: impl Into<String>) {
        self.checks.push((id.to_string(), ok, detail.into()));
    }
}

fn session(name: &str, text: &str, templates: &[(String, i64)]) -> Session {
    let p = ProblemFile::parse(name, text, templates).expect("problem parses");
    Session::new(&p, &Settings::default()).expect("session")
}

fn expr(s: &str, table: &SymbolTable) -> Expr {
    parse(s, table).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn same(a: &Expr, b: &Expr) -> bool {
    simplify(&(a - b)).is_zero()
}

/// True when `e` has zero derivative along every chart coordinate.
fn is_constant_on(e: &Expr, chart: &[Symbol]) -> bool {
    chart.iter().all(|s| simplify(&diff(e, s)).is_zero())
}

fn field_is_zero(f: &VectorField) -> bool {
    f.simplified().is_zero()
}

fn solution_exprs(chain: &ReductionChain) -> Vec<Expr> {
    chain
        .solution
        .as_ref()
        .map(|s| s.iter().map(|(_, e)| e.clone()).collect())
        .unwrap_or_default()
}

fn first_integrals_vanish(chain: &ReductionChain) -> bool {
    chain.levels.iter().all(|l| {
        l.first_integral
            .is_some_and(|(a, b)| a.is_zero() && b.is_zero())
    })
}

fn criterion_1(out: &mut Outcome) {
    let s = session("burgers.prob", bundled::BURGERS, &[]);
    let t = s.sys.table().clone();
    let mut rep = Report::default();
    let status = s.report_all(&mut rep).expect("pipeline runs");
    let block = |n: &str, k: &str| {
        rep.block(n)
            .and_then(|b| b.get(k))
            .unwrap_or("")
            .to_string()
    };
    out.check(
        "1.all-status",
        status == Status::Ok,
        format!("exit status {}", status.code()),
    );
    out.check(
        "1.compatible",
        block("check-constraint", "verdict") == "compatible",
        block("check-constraint", "verdict"),
    );
    out.check(
        "1.structure",
        block("check-structure", "verdict") == "accepted"
            && block("check-structure", "fields") == "X1,X2,X3",
        block("check-structure", "fields"),
    );
    let cert = s.check_structure().unwrap();
    let delta_ref = expr("2*u_xx*(u_xx + u_x^2)", &t);
    out.check(
        "1.delta",
        simplify(&cert.delta) == simplify(&delta_ref),
        format!("Delta = {}", simplify(&cert.delta)),
    );

    let chain = s.reduce().unwrap();
    let f3 = match chain.levels.first().and_then(|l| l.potential.as_ref()) {
        Some(Potential::Symbolic(f)) => f.clone(),
        _ => Expr::zero(),
    };
    let target = expr("log(u_xx + u_x^2)/2", &t);
    let up_to_sign = is_constant_on(&(&f3 - &target), s.h.chart())
        || is_constant_on(&(&f3 + &target), s.h.chart());
    out.check("1.F3", up_to_sign, format!("F3 = {f3}"));
    let sol = solution_exprs(&chain);
    match s
        .verify(&sol)
        .ok()
        .and_then(|r| r.into_iter().find(|r| r.label == "pde.u"))
    {
        Some(r) => out.check(
            "1.residual",
            r.symbolic == Verdict::Zero && r.samples >= 100 && r.max_rel <= 1e-9,
            format!(
                "symbolic {}, max residual {:.1e} over {} samples",
                r.symbolic.label(),
                r.max_abs,
                r.samples
            ),
        ),
        None => out.check("1.residual", false, "no solution"),
    }
}

fn criterion_2(out: &mut Outcome) {
    for n in 3..=6i64 {
        let s = session("heat_n.prob", bundled::HEAT_N, &[("n".into(), n)]);
        let id = |k: &str| format!("2.n{n}.{k}");
        out.check(
            &id("compatible"),
            s.check_constraint().unwrap().compatible(),
            "",
        );
        let chart = s.h.chart();
        let fewer = &s.fields[..(n - 1) as usize];
        let ab_fewer = is_abelian(fewer, &s.pair, chart, &s.zero_test)
            .unwrap()
            .is_abelian();
        let ab_all = s.abelian().unwrap().is_abelian();
        out.check(
            &id("abelian"),
            ab_fewer && ab_all,
            format!("X1..X{} and X1..X{n}", n - 1),
        );
        let cert = s.check_structure().unwrap();
        let t = s.sys.table();
        let top = Expr::powi(Expr::sym(t.jet(1, (n - 1) as u32)), n);
        let delta = simplify(&cert.delta);
        let on_locus = same(&delta, &top) || same(&delta, &top.neg());
        out.check(
            &id("structure"),
            cert.accepted && on_locus,
            format!("{} fields, Delta = {delta}", s.fields.len()),
        );
        let forms = dual_forms(&s.fields, &s.pair, chart).unwrap();
        let closed = forms.iter().all(|w| w.d().is_zero(&s.zero_test).unwrap());
        let base: Point = chart.iter().map(|c| (c.clone(), 1.0)).collect();
        let shortcut = abelian_potentials(&forms, chart, &base, &s.zero_test).is_ok();
        out.check(
            &id("closed"),
            closed && shortcut,
            format!("{} forms closed and integrated separately", forms.len()),
        );
    }
}

fn heat_kernel(t: &SymbolTable) -> Expr {
    expr("exp(-(x - y)^2/(4*t))/(4*t)^(1/2)", t)
        * Expr::pow(Expr::sym(Symbol::param("pi")), rat(-1, 2))
}

fn rat(n: i64, d: i64) -> solvstruct::expr::Rational {
    solvstruct::expr::Rational::new(n.into(), d.into())
}

fn criterion_3(out: &mut Outcome) {
    let s = session("modheat.prob", bundled::MODHEAT, &[]);
    let t = s.sys.table().clone();
    let (x1, x2, x3) = (&s.fields[0], &s.fields[1], &s.fields[2]);
    let b = expr("b", &t);
    let mut table_ok = true;
    let mut lines = Vec::new();
    let pairs: Vec<(&str, &VectorField, &str, &VectorField, VectorField)> = vec![
        ("X1", x1, "X2", x2, VectorField::new()),
        ("X1", x1, "X3", x3, VectorField::new()),
        ("X2", x2, "X3", x3, VectorField::new()),
        ("X1", x1, "Dx", &s.pair.dx, VectorField::new()),
        ("X2", x2, "Dx", &s.pair.dx, VectorField::new()),
        ("X3", x3, "Dx", &s.pair.dx, VectorField::new()),
        ("X1", x1, "Dt", &s.pair.dt, VectorField::new()),
        ("X3", x3, "Dt", &s.pair.dt, VectorField::new()),
        ("X2", x2, "Dt", &s.pair.dt, x1.scale(&b)),
    ];
    for (an, a, bn, bf, expected) in pairs {
        let ok = field_is_zero(&lie_bracket(a, bf).sub(&expected));
        table_ok &= ok;
        if !ok {
            lines.push(format!("[{an}, {bn}] differs"));
        }
    }
    out.check(
        "3.brackets",
        table_ok,
        if lines.is_empty() {
            "[X2, Dt] = b X1, others zero".into()
        } else {
            lines.join("; ")
        },
    );

    // M in (t, x, u, u_x, v) with v = u_xx/u - u_x^2/u^2
    let mut tv = t.clone();
    tv.add_parameter("v");
    let delta = s.check_structure().unwrap().delta;
    let mut rules = Rules::new();
    rules.insert(t.jet(1, 2), expr("u*v + u_x^2/u", &tv));
    let m = simplify(&Expr::recip(substitute(&delta, &rules)));
    let m_ref = expr("-1/(2*a*v^3*u^3)", &tv);
    out.check("3.M", same(&m, &m_ref), format!("M = {m}"));

    // heat-kernel specialization
    let p = ProblemFile::parse("modheat.prob", bundled::MODHEAT, &[]).unwrap();
    let p = p
        .specialize("a", "1")
        .and_then(|p| p.specialize("b", "0"))
        .and_then(|p| p.specialize("c", "0"))
        .unwrap();
    let s = Session::new(&p, &Settings::default()).unwrap();
    let mut tk = s.sys.table().clone();
    tk.add_parameter("y");
    tk.add_parameter("pi");
    let kernel = heat_kernel(&tk);
    let (y, pi) = (0.4, std::f64::consts::PI);
    let at = |e: &Expr, xv: f64, tv: f64| {
        let pt: Point = [
            (Symbol::x(), xv),
            (Symbol::t(), tv),
            (Symbol::param("y"), y),
            (Symbol::param("pi"), pi),
        ]
        .into_iter()
        .collect();
        eval(e, &pt).unwrap()
    };
    // base point on the kernel's jet, so level constants and log branches
    // follow the kernel
    let (x0, t0) = (0.7, 1.3);
    let mut opts = s.descent_options().unwrap();
    let mut jet = kernel.clone();
    for r in 0..3 {
        opts.base_point.insert(tk.jet(1, r), at(&jet, x0, t0));
        jet = diff(&jet, &Symbol::x());
    }
    opts.base_point.insert(Symbol::x(), x0);
    opts.base_point.insert(Symbol::t(), t0);
    let chain = s.reduce_with(&opts).unwrap();
    let sol = solution_exprs(&chain);
    let residual_ok = match s.verify(&sol) {
        Ok(r) => r
            .iter()
            .find(|r| r.label == "pde.u")
            .is_some_and(|r| r.symbolic == Verdict::Zero),
        Err(_) => false,
    };
    out.check(
        "3.kernel-residual",
        chain.complete() && residual_ok,
        format!("u = {}", sol.first().cloned().unwrap_or_else(Expr::zero)),
    );
    let mut worst = 0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let mut constants = chain.constants_at(&opts.base_point).unwrap_or_default();
    constants.extend(chain.constants());
    for _ in 0..50 {
        let (xv, tv) = (rng.gen_range(-1.0..2.0), rng.gen_range(0.2..3.0));
        let mut pt = constants.clone();
        pt.insert(Symbol::x(), xv);
        pt.insert(Symbol::t(), tv);
        let ours = sol
            .first()
            .map(|u| eval(u, &pt).unwrap_or(f64::NAN))
            .unwrap_or(f64::NAN);
        let theirs = at(&kernel, xv, tv);
        worst = worst.max((ours - theirs).abs() / theirs.abs().max(1.0));
    }
    let names: Vec<String> = chain
        .constants()
        .iter()
        .map(|(k, v)| format!("{k}={v:.6}"))
        .collect();
    out.check(
        "3.kernel-match",
        worst <= 1e-10,
        format!(
            "max deviation {worst:.1e} at 50 points with {}",
            names.join(", ")
        ),
    );
    out.check("3.first-integrals", first_integrals_vanish(&chain), "");
}

fn criterion_4(out: &mut Outcome) {
    let s = session("system.prob", bundled::SYSTEM, &[]);
    let t = s.sys.table().clone();
    let c = s.check_constraint().unwrap();
    out.check("4.compatible", c.entries.len() == 2 && c.compatible(), "");
    let delta = simplify(&s.check_structure().unwrap().delta);
    out.check(
        "4.delta",
        delta == simplify(&expr("-2*v_xx^2", &t)),
        format!("Delta = {delta}"),
    );
    let chain = s.reduce().unwrap();
    let sol = solution_exprs(&chain);
    let v = sol.get(1).cloned().unwrap_or_else(Expr::zero);
    let quadratic = simplify(&diff(
        &diff(&diff(&v, &Symbol::x()), &Symbol::x()),
        &Symbol::x(),
    ))
    .is_zero();

    // the displayed family, with its own constants
    let mut tp = t.clone();
    for n in ["p1", "p2", "p6"] {
        tp.add_parameter(n);
    }
    let v_ref = expr("-p1 - 2*p6*(-x^2/4 - p2*x/(2*p6) - t)", &tp);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let mut worst = 0f64;
    for _ in 0..5 {
        let mut pt: Point = ["p1", "p2", "p6"]
            .iter()
            .map(|n| (Symbol::param(n), rng.gen_range(0.5..2.0)))
            .collect();
        let (x0, t0) = (rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0));
        pt.insert(Symbol::x(), x0);
        pt.insert(Symbol::t(), t0);
        // jet of the reference v at (x0, t0); the u coordinates only fix c3..c5
        let mut jet = v_ref.clone();
        let mut h = pt.clone();
        for r in 0..3 {
            h.insert(t.jet(2, r), eval(&jet, &pt).unwrap());
            h.insert(t.jet(1, r), 0.3 + 0.1 * r as f64);
            jet = diff(&jet, &Symbol::x());
        }
        let consts = chain.constants_at(&h).unwrap_or_default();
        for _ in 0..10 {
            let mut q = consts.clone();
            let (xv, tv) = (rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0));
            q.insert(Symbol::x(), xv);
            q.insert(Symbol::t(), tv);
            let mut r = pt.clone();
            r.insert(Symbol::x(), xv);
            r.insert(Symbol::t(), tv);
            let (a, b) = (eval(&v, &q).unwrap_or(f64::NAN), eval(&v_ref, &r).unwrap());
            worst = worst.max((a - b).abs() / b.abs().max(1.0));
        }
    }
    out.check(
        "4.v",
        quadratic && worst <= 1e-10,
        format!("v = {v}; max deviation from the displayed family {worst:.1e}"),
    );
    match s.verify(&sol) {
        Ok(reports) => {
            let ok = reports.len() == 4 && reports.iter().all(|r| r.pass && r.max_rel <= 1e-9);
            let worst = reports.iter().map(|r| r.max_rel).fold(0f64, f64::max);
            out.check(
                "4.residuals",
                ok,
                format!("4 residuals, max relative {worst:.1e}"),
            );
        }
        Err(e) => out.check("4.residuals", false, e.to_string()),
    }
}

fn criterion_5(out: &mut Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let t = SymbolTable::with_dependents(&["u"]);
    let samples = [
        "u*u_x^2 + x*t",
        "exp(u_x)*log(1 + u^2)",
        "(u_xx - x)/(1 + u_x^2)",
        "(u + t^2)^(1/2)*u_x",
    ];

    // d∘d = 0 on potentials and one-forms
    let mut dd = true;
    for s in samples {
        let f = expr(s, &t);
        dd &= OneForm::function(f.clone()).d().d().is_structurally_zero();
        let w = OneForm::one_form([(Symbol::x(), f.clone()), (t.jet(1, 1), expr("u*x", &t))]);
        dd &= w.d().d().is_structurally_zero();
    }
    out.check("5.dd", dd, "");

    // duality, [Dx, Dt] = 0 and first integrals on every bundled problem
    let mut dual_ok = true;
    let mut commute_ok = true;
    let mut fi_ok = true;
    let problems: Vec<(&str, &str)> = vec![
        ("burgers.prob", bundled::BURGERS),
        ("heat_n.prob", bundled::HEAT_N),
        ("modheat.prob", bundled::MODHEAT),
        ("system.prob", bundled::SYSTEM),
    ];
    for (name, text) in problems {
        let s = session(name, text, &[]);
        let chart = s.h.chart();
        let forms = dual_forms(&s.fields, &s.pair, chart).unwrap();
        for (i, w) in forms.iter().enumerate() {
            for (j, x) in s.fields.iter().enumerate() {
                let want = if i == j { Expr::one() } else { Expr::zero() };
                dual_ok &= same(&w.pair(x), &want);
            }
            dual_ok &=
                simplify(&w.pair(&s.pair.dx)).is_zero() && simplify(&w.pair(&s.pair.dt)).is_zero();
        }
        let br = lie_bracket(&s.pair.dx, &s.pair.dt);
        commute_ok &= br
            .components()
            .all(|(_, c)| s.zero_test.check(c).unwrap().is_zero());
        fi_ok &= first_integrals_vanish(&s.reduce().unwrap());
    }
    out.check(
        "5.duality",
        dual_ok,
        "Omega_i(X_j) = delta_ij, Omega_i(Dx) = Omega_i(Dt) = 0",
    );
    out.check("5.commute", commute_ok, "");
    out.check("5.first-integrals", fi_ok, "");

    // finite differences against symbolic derivatives
    let coords = [
        Symbol::x(),
        Symbol::t(),
        t.jet(1, 0),
        t.jet(1, 1),
        t.jet(1, 2),
    ];
    let mut fd_worst = 0f64;
    let mut sub_worst = 0f64;
    for s in samples {
        let f = expr(s, &t);
        for _ in 0..20 {
            let p: Point = coords
                .iter()
                .map(|c| (c.clone(), rng.gen_range(0.5..2.0)))
                .collect();
            for c in &coords {
                let h = 1e-5;
                let (mut a, mut b) = (p.clone(), p.clone());
                *a.get_mut(c).unwrap() += h;
                *b.get_mut(c).unwrap() -= h;
                let fd = (eval(&f, &a).unwrap() - eval(&f, &b).unwrap()) / (2.0 * h);
                let sym = eval(&diff(&f, c), &p).unwrap();
                fd_worst = fd_worst.max((fd - sym).abs() / sym.abs().max(1.0));
            }
            // u -> x*t + u_x, then evaluate, against evaluating at the substituted value
            let g = expr("x*t + u_x", &t);
            let rules: Rules = [(t.jet(1, 0), g.clone())].into_iter().collect();
            let lhs = eval(&substitute(&f, &rules), &p).unwrap();
            let mut q = p.clone();
            q.insert(t.jet(1, 0), eval(&g, &p).unwrap());
            let rhs = eval(&f, &q).unwrap();
            sub_worst = sub_worst.max((lhs - rhs).abs() / rhs.abs().max(1.0));
        }
    }
    out.check(
        "5.finite-differences",
        fd_worst <= 1e-6,
        format!("max {fd_worst:.1e}"),
    );
    out.check(
        "5.substitution",
        sub_worst <= 1e-12,
        format!("max {sub_worst:.1e}"),
    );
}

fn criterion_6(out: &mut Outcome) {
    let base = ProblemFile::parse("burgers.prob", bundled::BURGERS, &[]).unwrap();
    let t = base.table();
    let with_constraint = |order: u32, rhs: &str| {
        let mut p = base.clone();
        p.constraints = vec![(order, expr(rhs, &t))];
        p.symmetries.clear();
        let s = Session::new(&p, &Settings::default()).unwrap();
        let c = s.check_constraint().unwrap();
        let r = c.entries[0].residual.clone();
        (c.compatible(), r)
    };
    let (compatible, r) = with_constraint(1, "1");
    out.check(
        "6.burgers-ux-1-rejected",
        !compatible,
        format!("Dt(u_x - 1) on H = {r}; u = x + t + c solves both equations, so the constraint is compatible"),
    );
    let (compatible, r) = with_constraint(2, "1");
    out.check(
        "6.burgers-uxx-1-rejected",
        !compatible,
        format!("Dt(u_xx - 1) on H = {r}"),
    );

    let mut p = base.clone();
    let x3 = p.symmetries.iter_mut().find(|s| s.name == "X3").unwrap();
    if let solvstruct::problem::FieldSpec::Components(cs) = &mut x3.spec {
        for (k, e) in cs.iter_mut() {
            if *k == t.jet(1, 1) {
                *e = e.neg();
            }
        }
    }
    let s = Session::new(&p, &Settings::default()).unwrap();
    let cert =
        verify_solvable_structure(&s.names, &s.fields, &s.pair, s.h.chart(), &s.zero_test).unwrap();
    let failure = cert.failure.clone().unwrap_or_default();
    out.check(
        "6.mutated-X3",
        !cert.accepted && failure.starts_with("[X3"),
        format!("failing bracket {failure}"),
    );

    let w = OneForm::one_form([(Symbol::x(), expr("u", &t)), (t.jet(1, 0), expr("t", &t))]);
    let chart = [Symbol::t(), Symbol::x(), t.jet(1, 0)];
    let pt: Point = chart.iter().map(|c| (c.clone(), 1.0)).collect();
    let r = integrate_closed(&w, &chart, &pt, &Default::default());
    out.check(
        "6.not-closed",
        matches!(r, Err(Error::NotClosed(_))),
        format!("{:?}", r.err()),
    );
}

type Criterion = (&'static str, fn(&mut Outcome));

fn main() {
    let criteria: [Criterion; 6] = [
        ("Burgers end to end", criterion_1),
        ("heat family n = 3..6", criterion_2),
        ("modified heat", criterion_3),
        ("two-component system", criterion_4),
        ("property suite", criterion_5),
        ("negative controls", criterion_6),
    ];
    let mut blocking = 0;
    let mut all: BTreeMap<usize, Vec<(String, bool, String)>> = BTreeMap::new();
    for (n, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut out = Outcome::new();
        run(&mut out);
        let failed: Vec<&(String, bool, String)> = out.checks.iter().filter(|c| !c.1).collect();
        let verdict = if failed.is_empty() { "PASS" } else { "FAIL" };
        let detail = if failed.is_empty() {
            format!("{} checks", out.checks.len())
        } else {
            failed
                .iter()
                .map(|c| format!("{}: {}", c.0, c.2))
                .collect::<Vec<_>>()
                .join("; ")
        };
        println!(
            "criterion {} ({name}): {verdict} [{:.1}s] {detail}",
            n + 1,
            start.elapsed().as_secs_f64()
        );
        blocking += failed
            .iter()
            .filter(|c| !KNOWN_UNATTAINABLE.contains(&c.0.as_str()))
            .count();
        all.insert(n + 1, out.checks);
    }
    if std::env::var_os("ACCEPTANCE_VERBOSE").is_some() {
        for (n, checks) in &all {
            for (id, ok, detail) in checks {
                println!("  {n} {id}: {} {detail}", if *ok { "ok" } else { "FAIL" });
            }
        }
    }
    if blocking > 0 {
        eprintln!("{blocking} acceptance checks failed");
        std::process::exit(1);
    }
}
