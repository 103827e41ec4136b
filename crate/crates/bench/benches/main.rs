use criterion::{black_box, criterion_group, criterion_main, Criterion};
use goedel_core::decide::{self, DecideConfig};
use goedel_core::enumerate::{enumerate_propositional, PropPool};
use goedel_core::parser::parse_formula;
use goedel_core::semantics::{eval_formula, Environment, Structure};
use goedel_core::syntax::Signature;
use goedel_core::values::{ConstantFamily, GoedelSet, Value};

fn decide_benches(c: &mut Criterion) {
    let fam = ConstantFamily::finite(vec![Value::frac(1, 4), Value::frac(1, 2)]).unwrap();
    let sig = Signature::propositional(&["p", "q", "rho"], fam.clone(), true);
    let theory = vec![
        parse_formula("~~rho -> #1/2", &sig).unwrap(),
        parse_formula("delta(p) -> (q | rho)", &sig).unwrap(),
        parse_formula("#1/4 -> p & q", &sig).unwrap(),
    ];
    let config = DecideConfig::default();
    let mut group = c.benchmark_group("sat");
    for (name, set) in [
        ("full01", GoedelSet::Full01),
        ("downward", GoedelSet::Downward),
        (
            "finite5",
            GoedelSet::finite(vec![
                Value::zero(),
                Value::frac(1, 4),
                Value::frac(1, 2),
                Value::frac(3, 4),
                Value::one(),
            ])
            .unwrap(),
        ),
    ] {
        group.bench_function(name, |b| {
            b.iter(|| decide::sat(black_box(&theory), &set, &fam, &config).unwrap())
        });
    }
    group.finish();

    c.bench_function("oracle_sat/full01", |b| {
        b.iter(|| {
            decide::oracle_sat(black_box(&theory), &GoedelSet::Full01, &fam, &config).unwrap()
        })
    });
}

fn eval_bench(c: &mut Criterion) {
    let m = Structure::parse(
        "universe a b c d\n\
         pred d/2: default=1/2 a,a=0 b,b=0 c,c=0 d,d=0 a,b=1/4 b,a=1/4\n\
         pred R/1: a=1/4 b=1/4 c=1/2 d=1\n",
    )
    .unwrap();
    let sig = m.infer_signature(ConstantFamily::empty());
    let f = parse_formula("forall x. exists y. (d(x,y) -> (R(x) -> R(y)))", &sig).unwrap();
    let env = Environment::new();
    c.bench_function("eval/forall-exists-depth3", |b| {
        b.iter(|| eval_formula(black_box(&m), &f, &env).unwrap())
    });
}

fn enumeration_bench(c: &mut Criterion) {
    let pool = PropPool::new(&["p", "q"], vec![Value::frac(1, 2)], true);
    c.bench_function("enumerate/size5", |b| {
        b.iter(|| enumerate_propositional(black_box(&pool), 5).len())
    });
}

criterion_group!(benches, decide_benches, eval_bench, enumeration_bench);
criterion_main!(benches);
