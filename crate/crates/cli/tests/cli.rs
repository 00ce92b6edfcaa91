use std::path::PathBuf;
use std::process::{Command, Output};

fn solvstruct(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_solvstruct"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("solvstruct-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, text: &str) -> String {
    let p = scratch(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn burgers_runs_end_to_end() {
    let o = solvstruct(&["all", "burgers"]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{out}{}", stderr(&o));
    assert!(out.contains("constraint submanifold: compatible"));
    assert!(out.contains("M = 1/(2*u_xx^2 + 2*u_xx*u_x^2)"), "{out}");
    assert!(out.contains("solution: u = "));
    assert!(out.contains("residual pde.u: pass"));
}

#[test]
fn heat_constraint_is_compatible() {
    let o = solvstruct(&["check-constraint", "heat_n", "--set", "n=5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("compatible"));
}

#[test]
fn misordered_structure_names_the_failing_bracket() {
    let src = solvstruct::problem::bundled::BURGERS;
    let mut lines: Vec<&str> = src.lines().collect();
    let i = lines.iter().position(|l| l.starts_with("X3")).unwrap();
    let j = lines.iter().position(|l| l.starts_with("X1")).unwrap();
    let l = lines.remove(i);
    lines.insert(j, l);
    let path = write("shuffled.prob", &(lines.join("\n") + "\n"));
    let report = scratch("shuffled.report");
    let o = solvstruct(&[
        "check-structure",
        &path,
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stdout(&o).contains("rejected at [X1, X3]"),
        "{}",
        stdout(&o)
    );
    let rep = std::fs::read_to_string(report).unwrap();
    assert!(rep.contains("failure="), "{rep}");
}

#[test]
fn constraint_of_wrong_order_is_an_input_error() {
    let path = write(
        "bad.prob",
        "[variables]\nindependent = \"x, t\"\ndependent = \"u\"\n[evolution]\nu = \"u_xx\"\n[constraints]\nu_x = \"u_xxx\"\n",
    );
    let o = solvstruct(&["check-constraint", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.prob:7:7:"), "{}", stderr(&o));
}

#[test]
fn syntax_errors_carry_line_and_column() {
    let path = write(
        "syntax.prob",
        "[variables]\nindependent = \"x, t\"\ndependent = \"u\"\n[evolution]\nu = \"u_xx + )\"\n",
    );
    let o = solvstruct(&["all", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("syntax.prob:5:13:"), "{}", stderr(&o));
}

#[test]
fn reports_are_reproducible() {
    let (a, b) = (scratch("r1.txt"), scratch("r2.txt"));
    for p in [&a, &b] {
        let o = solvstruct(&[
            "all",
            "modheat",
            "--seed",
            "7",
            "--report",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let (ra, rb) = (
        std::fs::read_to_string(a).unwrap(),
        std::fs::read_to_string(b).unwrap(),
    );
    assert_eq!(ra, rb);
    assert!(ra.starts_with("block="));
}

#[test]
fn verify_reads_a_reduction_report() {
    let report = scratch("chain.txt");
    let o = solvstruct(&["reduce", "system", "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = solvstruct(&["verify", "system", "--chain", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(
        stdout(&o).contains("residual pde.v: pass"),
        "{}",
        stdout(&o)
    );

    // a wrong solution must be caught
    let wrong = write("wrong.txt", "solution.u=x^2\nsolution.v=t\n");
    let o = solvstruct(&["verify", "system", "--chain", &wrong]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn unknown_problem_is_an_input_error() {
    let o = solvstruct(&["reduce", "no-such-problem"]);
    assert_eq!(o.status.code(), Some(2));
}
