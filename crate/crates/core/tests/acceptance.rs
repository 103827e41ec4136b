//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its timing (run with `cargo test --test acceptance -- --nocapture` to see
//! them). Every tolerance is exact; every time budget is asserted.

use goedel_core::algebra::{
    certify_embedding, embed, random_galgebra, validate_galgebra, EmbedCase,
};
use goedel_core::decide::{
    self, enumerate_arrangements, eval_symbolic, oracle_sat, sat, satisfying_arrangements,
    AtomPos, DecideConfig, Sym, Verdict,
};
use goedel_core::enumerate::{enumerate_propositional, random_propositional, PropPool};
use goedel_core::henkin::{complete_and_canonical, random_satisfiable_theory};
use goedel_core::lab::{find_scenario, run_scenario};
use goedel_core::metric::{
    lipschitz_formula_bound, quotient, random_lipschitz_structure, validate_lipschitz,
};
use goedel_core::parser::parse_formula;
use goedel_core::proofs::{random_axiom_instance, schema_names, valid_at_zero};
use goedel_core::semantics::{eval_formula, Environment, Structure};
use goedel_core::syntax::{Formula, Signature};
use goedel_core::ultraproduct::{
    dlimit_frechet, los_check, SymbolicFamily, UltrafilterDesc,
};
use goedel_core::values::{
    self, and, connective, delta, dmax, neg, resid, ClosedForm, Connective, ConstantFamily,
    GoedelSet, Value,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

fn v(p: i64, q: i64) -> Value {
    Value::frac(p, q)
}

fn budget(name: &str, started: Instant, limit: Duration) {
    let elapsed = started.elapsed();
    assert!(
        elapsed <= limit,
        "{name} took {elapsed:?}, over the {limit:?} budget"
    );
    println!("ACCEPTANCE {name}: PASS ({elapsed:?})");
}

fn five_points() -> Vec<Value> {
    vec![Value::zero(), v(1, 4), v(1, 2), v(3, 4), Value::one()]
}

#[test]
fn criterion_01_connective_algebra() {
    let started = Instant::now();
    let pts = five_points();
    for x in &pts {
        for y in &pts {
            // residuum piecewise definition
            let r = resid(x, y);
            if x >= y {
                assert!(r.is_zero());
            } else {
                assert_eq!(&r, y);
            }
            // d_max symmetry and identity of indiscernibles
            assert_eq!(dmax(x, y), dmax(y, x));
            assert_eq!(dmax(x, y).is_zero(), x == y);
            for z in &pts {
                // adjunction
                assert_eq!(and(x, y) >= *z, *x >= resid(y, z));
                // d_max triangle (the ultrametric flavor)
                assert!(dmax(x, z) <= std::cmp::max(dmax(x, y), dmax(y, z)));
            }
            // the generic entry point agrees with the direct ops
            assert_eq!(connective(Connective::Resid, &[x.clone(), y.clone()]).unwrap(), r);
        }
        // projection bivalence
        let d = delta(x);
        assert!(d.is_zero() || d.is_one());
        assert_eq!(d.is_zero(), x.is_zero());
        if !x.is_one() {
            assert!(neg(&neg(x)).is_zero());
        }
    }
    budget("1 connective-algebra", started, Duration::from_secs(1));
}

#[test]
fn criterion_02_strong_completeness_gap_example() {
    let started = Instant::now();
    let fam = ConstantFamily::finite(vec![v(1, 2)]).unwrap();
    let sig = Signature::propositional(&["rho"], fam.clone(), false);
    let theory = vec![parse_formula("~~rho -> #1/2", &sig).unwrap()];
    let goal = parse_formula("~rho", &sig).unwrap();
    let config = DecideConfig::default();
    assert_eq!(
        decide::entails(&theory, &goal, &GoedelSet::Full01, &fam, &config).unwrap(),
        Verdict::Entailed
    );
    // the unique satisfying model class pins rho to 1 (the unprovability
    // half is a documented fact, not machine-checkable here)
    let arrs = satisfying_arrangements(&theory, &GoedelSet::Full01, &config).unwrap();
    assert_eq!(arrs.len(), 1, "exactly one model class");
    for arr in &arrs {
        assert!(matches!(arr.pos[0], AtomPos::Pinned(c) if arr.constants[c].is_one()));
    }
    budget("2 strong-completeness-gap", started, Duration::from_secs(1));
}

#[test]
fn criterion_03_decision_procedure_vs_oracle() {
    let started = Instant::now();
    let pool = PropPool::new(&["p", "q", "rho"], vec![v(1, 4), v(1, 2)], true);
    let fam = ConstantFamily::finite(vec![v(1, 4), v(1, 2)]).unwrap();
    let sets = [
        GoedelSet::Full01,
        GoedelSet::finite(five_points()).unwrap(),
        GoedelSet::Downward,
    ];
    let config = DecideConfig::default();
    // exhaustive to size 6, seeded samples of every size up to 12
    let mut formulas = enumerate_propositional(&pool, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(1203);
    for size in 7..=12 {
        for _ in 0..400 {
            formulas.push(random_propositional(&pool, size, &mut rng));
        }
    }
    let mut checked = 0usize;
    for f in &formulas {
        let theory = std::slice::from_ref(f);
        for set in &sets {
            let fast = sat(theory, set, &fam, &config).unwrap();
            let slow = oracle_sat(theory, set, &fam, &config).unwrap();
            match (&fast, &slow) {
                (Verdict::Sat(w), Verdict::Sat(_)) => {
                    // independent witness re-check at value 0
                    let m = Structure::propositional(w, true);
                    let val = eval_formula(&m, f, &Environment::new()).unwrap();
                    assert!(val.is_zero(), "witness fails on {f}");
                }
                (Verdict::Unsat, Verdict::Unsat) => {}
                other => panic!("disagreement on {f} over {set}: {other:?}"),
            }
            checked += 1;
        }
    }
    assert!(checked >= 3 * (formulas.len() - 10));
    budget("3 decision-vs-oracle", started, Duration::from_secs(60));
}

#[test]
fn criterion_04_axiom_soundness() {
    let started = Instant::now();
    let pool = PropPool::new(&["p", "q", "rho"], vec![v(1, 4), v(1, 2)], true);
    let config = DecideConfig { atom_bound: 8 };
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut instances = 0usize;
    for name in schema_names() {
        for _ in 0..60 {
            let Some(inst) = random_axiom_instance(name, &pool, &mut rng) else {
                continue;
            };
            assert!(
                valid_at_zero(&inst, &GoedelSet::Full01, &[1, 2], &config).unwrap(),
                "{name} instance {inst} has a nonzero arrangement"
            );
            instances += 1;
        }
    }
    assert!(instances >= 40 * schema_names().len());
    budget("4 axiom-soundness", started, Duration::from_secs(30));
}

#[test]
fn criterion_05_compactness_lab() {
    let started = Instant::now();
    for name in [
        "EX_3_1_INC",
        "EX_3_1_DEC",
        "EX_3_2",
        "EX_ENTAIL_FAIL",
        "EX_DELTA",
    ] {
        let scenario = find_scenario(name).unwrap();
        let report = run_scenario(&scenario, 20).unwrap();
        assert!(report.pass, "{name} failed:\n{report}");
        if name == "EX_ENTAIL_FAIL" {
            assert!(report.verdict.contains("FORCED rho = 0"));
            assert!(report.verdict.contains("NO FINITE SUBSET ENTAILS rho"));
        }
    }
    budget("5 compactness-lab", started, Duration::from_secs(10));
}

#[test]
fn criterion_06_approximate_entailment() {
    let started = Instant::now();
    let scenario = find_scenario("EX_ENTAIL_FAIL").unwrap();
    let config = DecideConfig::default();
    let goal = parse_formula("rho", &scenario.signature).unwrap();
    let harmonic = ClosedForm::parse("1/(n)").unwrap();
    for m in 1..=10u64 {
        let prefix = scenario.theory.instantiate(m, &scenario.signature).unwrap();
        let r = harmonic.eval(m);
        let ladder = decide::approx_entails(
            &prefix,
            &goal,
            &scenario.set,
            &scenario.signature.constants,
            std::slice::from_ref(&r),
            &config,
        )
        .unwrap();
        assert_eq!(ladder[0].1, Verdict::Entailed, "m = {m}");
        let direct = decide::entails(
            &prefix,
            &goal,
            &scenario.set,
            &scenario.signature.constants,
            &config,
        )
        .unwrap();
        assert!(
            matches!(direct, Verdict::NotEntailed(_)),
            "prefix m = {m} must not entail the goal"
        );
    }
    budget("6 approximate-entailment", started, Duration::from_secs(5));
}

#[test]
fn criterion_07_embedding_lemma() {
    let started = Instant::now();
    let finite = ConstantFamily::finite(vec![v(1, 4), v(1, 2), v(3, 4)]).unwrap();
    let downward = ConstantFamily::DownwardA;
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut norm_case_seen = false;
    for i in 0..100 {
        let family = if i % 2 == 0 { &finite } else { &downward };
        let alg = random_galgebra(family, 20, &mut rng);
        assert!(validate_galgebra(&alg).is_empty());
        let map = embed(&alg, family).unwrap();
        let violations = certify_embedding(&alg, &map);
        assert!(violations.is_empty(), "{alg}\n{map}\n{violations:?}");
        if map.case == EmbedCase::NormPartition && !alg.constants.is_empty() {
            norm_case_seen = true;
        }
    }
    assert!(norm_case_seen, "the norm-partition case must be exercised");
    budget("7 embedding-lemma", started, Duration::from_secs(30));
}

#[test]
fn criterion_08_henkin_pipeline() {
    let started = Instant::now();
    let fam = ConstantFamily::finite(vec![v(1, 4), v(1, 2), v(3, 4)]).unwrap();
    let pool = PropPool::new(&["p", "q", "rho"], vec![v(1, 4), v(1, 2), v(3, 4)], false);
    let config = DecideConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let env = Environment::new();
    let mut passes = 0usize;
    for _ in 0..50 {
        let theory =
            random_satisfiable_theory(&pool, 3, &GoedelSet::Full01, &fam, &config, &mut rng);
        let (trace, model) =
            complete_and_canonical(&theory, &GoedelSet::Full01, &fam, &config).unwrap();
        assert!(trace.stages.iter().all(|s| s.models_remaining > 0));
        for s in &theory {
            let val = eval_formula(&model.structure, s, &env).unwrap();
            assert!(val.is_zero(), "canonical model fails {s} with {val}");
        }
        passes += 1;
    }
    assert_eq!(passes, 50);
    budget("8 henkin-pipeline", started, Duration::from_secs(60));
}

#[test]
fn criterion_09_lipschitz_bound_and_quotient() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let set = GoedelSet::Full01;
    for _ in 0..100 {
        let size = rng.gen_range(1..=4usize);
        let m = random_lipschitz_structure(size, 2, rng.gen_bool(0.4), &set, &mut rng);
        assert!(validate_lipschitz(&m).unwrap().is_ok());
        let report = lipschitz_formula_bound(&m, 3, 60).unwrap();
        assert!(report.violations.is_empty(), "{:?}", report.violations);

        // quotient evaluation invariance on closed formulas
        let q = quotient(&m).unwrap();
        let sig = m.infer_signature(ConstantFamily::empty());
        for text in [
            "forall x. P0(x)",
            "exists x. P1(x)",
            "forall x. (P0(x) -> exists y. d(x,y))",
            "(forall x. P1(x)) -> (exists x. P0(x))",
        ] {
            let f = parse_formula(text, &sig).unwrap();
            let env = Environment::new();
            assert_eq!(
                eval_formula(&m, &f, &env).unwrap(),
                eval_formula(&q, &f, &env).unwrap(),
                "{text}"
            );
        }
    }
    budget("9 lipschitz-and-quotient", started, Duration::from_secs(60));
}

#[test]
fn criterion_10_los_check() {
    let started = Instant::now();
    let set = GoedelSet::finite(five_points()).unwrap();
    // fixed generator set: three structures of sizes 1, 2, 3 over {d, R}
    let generators = [
        Structure::parse("universe a\npred d/2: a,a=0\npred R/1: a=1/4\n").unwrap(),
        Structure::parse(
            "universe a b\npred d/2: a,a=0 b,b=0 a,b=1 b,a=1\npred R/1: a=0 b=1/2\n",
        )
        .unwrap(),
        Structure::parse(
            "universe a b c\n\
             pred d/2: default=1 a,a=0 b,b=0 c,c=0 a,b=1/2 b,a=1/2\n\
             pred R/1: a=1/4 b=1/4 c=1\n",
        )
        .unwrap(),
    ];
    for m in &generators {
        assert!(validate_lipschitz(m).unwrap().is_ok());
    }
    let mut runs = 0usize;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let triple = [
                    generators[i].clone(),
                    generators[j].clone(),
                    generators[k].clone(),
                ];
                for principal in 0..3 {
                    let report = los_check(
                        &triple,
                        UltrafilterDesc::Principal(principal),
                        &set,
                        3,
                        40,
                    )
                    .unwrap();
                    assert!(
                        report.mismatches.is_empty(),
                        "triple ({i},{j},{k}) principal {principal}:\n{report}"
                    );
                    runs += 1;
                }
            }
        }
    }
    assert_eq!(runs, 81);
    // the harmonic family has D-limit 0 in the downward set
    let fam = SymbolicFamily::Form(ClosedForm::parse("1/(n)").unwrap());
    assert_eq!(
        dlimit_frechet(&fam, UltrafilterDesc::FrechetExtension, &GoedelSet::Downward).unwrap(),
        Value::zero()
    );
    // and the projection genuinely breaks continuity there (recorded)
    let along = goedel_core::ultraproduct::dlimit_of_connective(
        Connective::Delta,
        &fam,
        None,
        &GoedelSet::Downward,
    )
    .unwrap();
    assert_ne!(along, values::delta(&Value::zero()));
    budget("10 los-check", started, Duration::from_secs(60));
}

// The arrangement enumerator itself: deterministic and duplicate-free over a
// non-dense set (exercised here because every criterion above leans on it).
#[test]
fn arrangement_stream_is_deterministic() {
    let started = Instant::now();
    let atoms = vec!["p".to_string(), "q".to_string()];
    let consts = vec![v(1, 2)];
    let config = DecideConfig::default();
    let a: Vec<String> =
        enumerate_arrangements(&atoms, &consts, &GoedelSet::Downward, &config)
            .unwrap()
            .map(|arr| format!("{arr}"))
            .collect();
    let b: Vec<String> =
        enumerate_arrangements(&atoms, &consts, &GoedelSet::Downward, &config)
            .unwrap()
            .map(|arr| format!("{arr}"))
            .collect();
    assert_eq!(a, b);
    let dedup: std::collections::BTreeSet<&String> = a.iter().collect();
    assert_eq!(dedup.len(), a.len());
    // symbolic evaluation stays within the declared symbols
    let fam = ConstantFamily::finite(vec![v(1, 2)]).unwrap();
    let sig = Signature::propositional(&["p", "q"], fam, true);
    let f = parse_formula("delta(p) -> (q & #1/2)", &sig).unwrap();
    for arr in enumerate_arrangements(&atoms, &consts, &GoedelSet::Downward, &config).unwrap() {
        let s = eval_symbolic(&f, &arr).unwrap();
        assert!(matches!(s, Sym::Const(_) | Sym::Gap { .. }));
    }
    let mut witness: BTreeMap<String, Value> = BTreeMap::new();
    witness.insert("p".into(), Value::zero());
    witness.insert("q".into(), Value::zero());
    let m = Structure::propositional(&witness, true);
    assert!(eval_formula(&m, &Formula::to(f.clone(), f), &Environment::new())
        .unwrap()
        .is_zero());
    budget("arrangements-deterministic", started, Duration::from_secs(5));
}
