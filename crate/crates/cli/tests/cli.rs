//! End-to-end tests of the `goedel` binary: exit-code contract, deterministic
//! output, and the documented report shapes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_goedel"))
}

fn data(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/data");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn sat_prints_witness_and_exits_zero() {
    let out = run(&[
        "sat",
        "--V",
        "full01",
        "--A",
        "finite{1/2}",
        "--theory",
        &data("sat_half.gl"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("SAT"), "{text}");
    assert!(text.contains("rho = "), "{text}");
}

#[test]
fn entailment_example() {
    let out = run(&[
        "entail",
        "--A",
        "finite{1/2}",
        "--theory",
        &data("example_21.gl"),
        "--goal",
        "~rho",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("ENTAILED"));

    // the converse direction has a countermodel and exits 1
    let out = run(&[
        "entail",
        "--A",
        "finite{1/2}",
        "--theory",
        &data("sat_half.gl"),
        "--goal",
        "rho",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("NOT-ENTAILED") && text.contains("countermodel"), "{text}");
}

#[test]
fn approx_entailment_over_family_prefix() {
    let out = run(&[
        "approx-entail",
        "--A",
        "downward",
        "--theory",
        &data("harmonic.gl"),
        "--n",
        "4",
        "--goal",
        "rho",
        "--r",
        "1/4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "r = 1/4: ENTAILED\n");
}

#[test]
fn check_proof_ok_and_bad_mp() {
    let out = run(&[
        "check-proof",
        "--theory",
        &data("mp_theory.gl"),
        "--proof",
        &data("mp.prf"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("OK: q"));

    let out = run(&[
        "check-proof",
        "--theory",
        &data("mp_theory.gl"),
        "--proof",
        &data("mp_bad.prf"),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("Error line 3"));
}

#[test]
fn deduction_theorem_proof_pair() {
    // T ∪ {p} proves p & p ...
    let out = run(&[
        "check-proof",
        "--theory",
        &data("dt_left_theory.gl"),
        "--proof",
        &data("dt_left.prf"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("OK: p & p"));
    // ... if and only if T proves p -> (p & p)
    let out = run(&["check-proof", "--proof", &data("dt_right.prf")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("OK: p -> p & p"));
}

#[test]
fn spotcheck_premise_free_proof() {
    let out = run(&[
        "check-proof",
        "--proof",
        &data("rg3.prf"),
        "--A",
        "finite{1/3}",
        "--spotcheck",
        "40",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("spotcheck: 40 samples, all evaluate to 0"), "{text}");
}

#[test]
fn lab_run_delta_scenario() {
    let out = run(&["lab", "run", "EX_DELTA", "--k", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("VERDICT: FINITELY-SAT ∧ UNSAT"), "{text}");

    let out = run(&["lab", "run", "EX_ENTAIL_FAIL", "--k", "10"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("FORCED rho = 0"));

    let out = run(&["lab", "list"]);
    assert_eq!(out.status.code(), Some(0));
    for name in [
        "EX_2_1",
        "EX_3_1_INC",
        "EX_3_1_DEC",
        "EX_3_2",
        "EX_ENTAIL_FAIL",
        "EX_DELTA",
        "EX_APPROX",
    ] {
        assert!(stdout(&out).contains(name));
    }
}

#[test]
fn eval_and_dual_display() {
    let out = run(&[
        "eval",
        "--structure",
        &data("two_point.st"),
        "--formula",
        "forall x. R(x)",
    ]);
    assert_eq!(out.status.code(), Some(1)); // value 2/3 is not absolute truth
    assert!(stdout(&out).contains("value: 2/3"));

    let out = run(&[
        "eval",
        "--structure",
        &data("two_point.st"),
        "--formula",
        "forall x. R(x)",
        "--display",
        "dual",
    ]);
    let text = stdout(&out);
    assert!(text.contains("display: dual"), "{text}");
    assert!(text.contains("value: 1/3"), "{text}");

    let out = run(&[
        "eval",
        "--structure",
        &data("two_point.st"),
        "--formula",
        "exists x. R(x) -> R(x)",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn metric_commands() {
    let out = run(&["metric", "validate", "--structure", &data("metric3.st")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("OK: pseudo-ultrametric"));

    let out = run(&["metric", "lipschitz", "--structure", &data("metric3.st")]);
    assert_eq!(out.status.code(), Some(0));

    let out = run(&[
        "metric",
        "bound",
        "--structure",
        &data("metric3.st"),
        "--depth",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("bound holds everywhere"));

    let out = run(&["metric", "quotient", "--structure", &data("metric_zero.st")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("universe a c"), "{text}");
}

#[test]
fn ultraproduct_and_los() {
    let out = run(&[
        "ultraproduct",
        "--structures",
        &data("factor1.st"),
        &data("factor2.st"),
        "--principal",
        "2",
        "--V",
        "finite{0,1/4,1/2,1}",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("universe a.p a.q b.p b.q"), "{text}");

    let out = run(&[
        "los-check",
        "--structures",
        &data("factor1.st"),
        &data("factor2.st"),
        "--principal",
        "1",
        "--depth",
        "2",
        "--V",
        "finite{0,1/4,1/2,1}",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("no mismatches"));

    // the product of two ultrametric factors is itself an ultrametric
    // structure, and the emitted file feeds straight back in
    let path = std::env::temp_dir().join(format!("goedel-product-{}.st", std::process::id()));
    let path_str = path.to_string_lossy().into_owned();
    let out = run(&[
        "ultraproduct",
        "--structures",
        &data("factor1.st"),
        &data("factor2.st"),
        "--principal",
        "1",
        "--V",
        "finite{0,1/4,1/2,1}",
        "--out",
        &path_str,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["metric", "validate", "--structure", &path_str]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("OK: pseudo-ultrametric"));
    let _ = std::fs::remove_file(&path);
}

#[test]
fn embed_and_validate_and_lindenbaum() {
    let out = run(&["embed", "--algebra", &data("chain.alg"), "--A", "downward"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("certificate: ok"), "{text}");
    assert!(text.contains("norm partition"), "{text}");

    let out = run(&[
        "validate",
        "--V",
        "downward",
        "--A",
        "downward",
        "--algebra",
        &data("chain.alg"),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let out = run(&[
        "lindenbaum",
        "--theory",
        &data("dt_left_theory.gl"),
        "--universe",
        &data("universe_pq.gl"),
        "--A",
        "finite{1/2}",
    ]);
    // p and q are incomparable under {p}? p is forced 0, so p <= q holds
    // everywhere; q vs 1/2-bar is undecided only if 1/2 occurs -- it does
    // not, so the run is complete and succeeds
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("semantic Lindenbaum"));
}

#[test]
fn henkin_complete_and_canonical() {
    let out = run(&[
        "henkin",
        "complete",
        "--theory",
        &data("dt_left_theory.gl"),
        "--universe",
        &data("universe_pq.gl"),
        "--A",
        "finite{1/2}",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("guard: #1/2"), "{text}");
    assert!(text.contains("stage 1"), "{text}");

    let out = run(&[
        "henkin",
        "canonical",
        "--theory",
        &data("example_21.gl"),
        "--A",
        "finite{1/2}",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("pred rho/0: 1"), "{text}");

    // the emitted structure file is consumable by eval
    let path = std::env::temp_dir().join(format!("goedel-canonical-{}.st", std::process::id()));
    let path_str = path.to_string_lossy().into_owned();
    let out = run(&[
        "henkin",
        "canonical",
        "--theory",
        &data("example_21.gl"),
        "--A",
        "finite{1/2}",
        "--out",
        &path_str,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&[
        "eval",
        "--structure",
        &path_str,
        "--formula",
        "~rho",
        "--A",
        "finite{1/2}",
    ]);
    assert_eq!(out.status.code(), Some(0)); // the canonical model satisfies ~rho
    assert!(stdout(&out).contains("value: 0"));
    let _ = std::fs::remove_file(&path);
}

#[test]
fn usage_and_input_errors_exit_two() {
    let out = run(&["sat", "--theory", "/nonexistent/file.gl"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).is_empty(), "no partial output on code 2");

    let out = run(&["sat"]);
    assert_eq!(out.status.code(), Some(2)); // missing required flag

    let out = run(&[
        "sat",
        "--V",
        "bogus",
        "--theory",
        &data("sat_half.gl"),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).is_empty());
}

#[test]
fn quantifier_proof_with_gen_and_instantiation() {
    let out = run(&[
        "check-proof",
        "--proof",
        &data("quantifier.prf"),
        "--pred",
        "R/1",
        "--const",
        "c",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("OK: R(c) & R(c) -> R(c)"));
}

#[test]
fn lab_report_golden() {
    let out = run(&["lab", "run", "EX_ENTAIL_FAIL", "--k", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let expected = "\
scenario EX_ENTAIL_FAIL: {(1/n)-bar -> rho} forces rho = 0 in the limit, so the full theory entails rho while no finite prefix does
m=1: SAT; rho = 0
m=2: SAT; rho = 0
m=3: SAT; rho = 0
constraint: rho <= 1/(n) for all n, hence rho ∈ {0}
  ((1/n)-bar -> rho is 0 iff 1/n >= rho; all n force rho <= inf 1/n = 0)
  surviving feasible set for rho: {0}
rho: forced to the single value 0
full theory forces rho = 0, so it entails rho; no prefix up to 3 does
VERDICT: FINITELY-SAT ∧ FORCED rho = 0 ∧ ENTAILS rho ∧ NO FINITE SUBSET ENTAILS rho
";
    assert_eq!(stdout(&out), expected);
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        vec!["lab", "run", "EX_3_1_INC", "--k", "8"],
        vec![
            "sat",
            "--A",
            "downward",
            "--theory",
            &data("harmonic.gl"),
            "--n",
            "5",
        ],
        vec![
            "entail",
            "--A",
            "finite{1/2}",
            "--theory",
            &data("example_21.gl"),
            "--goal",
            "~rho",
        ],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(stdout(&a), stdout(&b), "{args:?}");
        assert_eq!(a.status.code(), b.status.code());
    }
}
