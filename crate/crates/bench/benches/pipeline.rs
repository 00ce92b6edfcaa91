use criterion::{criterion_group, criterion_main, Criterion};
use solvstruct::pipeline::{Report, Session, Settings};
use solvstruct::problem::{bundled, ProblemFile};

fn problem(name: &str, text: &str, over: &[(String, i64)]) -> ProblemFile {
    ProblemFile::parse(name, text, over).unwrap()
}

fn stages(c: &mut Criterion) {
    let burgers = problem("burgers.prob", bundled::BURGERS, &[]);
    let settings = Settings::default();
    let session = Session::new(&burgers, &settings).unwrap();

    c.bench_function("burgers/check-constraint", |b| {
        b.iter(|| session.check_constraint().unwrap())
    });
    c.bench_function("burgers/check-structure", |b| {
        b.iter(|| session.check_structure().unwrap())
    });
    c.bench_function("burgers/reduce", |b| b.iter(|| session.reduce().unwrap()));
    c.bench_function("burgers/all", |b| {
        b.iter(|| {
            let s = Session::new(&burgers, &settings).unwrap();
            let mut r = Report::default();
            s.report_all(&mut r).unwrap()
        })
    });
}

fn heat(c: &mut Criterion) {
    let mut group = c.benchmark_group("heat");
    group.sample_size(10);
    for n in [3i64, 4, 5] {
        let p = problem("heat_n.prob", bundled::HEAT_N, &[("n".into(), n)]);
        group.bench_function(format!("check-structure/n={n}"), |b| {
            b.iter(|| {
                let s = Session::new(&p, &Settings::default()).unwrap();
                s.check_structure().unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, stages, heat);
criterion_main!(benches);
