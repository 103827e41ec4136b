//! Hilbert-style proof checker for the axiom system: G1-G7, the quantifier
//! axioms, the book-keeping axioms RG1-RG3, the delta axioms D1-D5, and the
//! rules Mp, Gen and the delta rule.
//!
//! Axiom schemas are matched by first-order pattern unification with formula
//! metavariables and constant metavariables carrying arithmetic side
//! conditions. `bot` and the truth constant `#1` are interchangeable in
//! constant positions.
//!
//! The generalization rule is checked exactly as stated — `phi` yields
//! `forall x phi` with no side condition on premises with `x` free; its
//! soundness is a rule-of-proof (closed-theory) matter, which is why the
//! spot-checker evaluates conclusions of premise-free proofs only.

use crate::decide::{self, DecideConfig, DecideError, Verdict};
use crate::enumerate::PropPool;
use crate::parser::parse_formula;
use crate::semantics::{eval_formula, ground_over, Environment, Structure, ValueTable};
use crate::syntax::{substitutable, Formula, Signature, SyntaxError, Term};
use crate::values::{GoedelSet, Value};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProofError {
    #[error("line {line}: {reason}")]
    Line { line: usize, reason: String },
    #[error("proof file, line {line}: {msg}")]
    File { line: usize, msg: String },
    #[error("syntax: {0}")]
    Syntax(#[from] SyntaxError),
    #[error("spot-check needs a premise-free proof")]
    HasPremises,
    #[error("decide: {0}")]
    Decide(#[from] DecideError),
}

fn line_err(line: usize, reason: impl Into<String>) -> ProofError {
    ProofError::Line {
        line,
        reason: reason.into(),
    }
}

/// Justification of a proof line; indices are 1-based and must point at
/// strictly earlier lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    Premise,
    Axiom(String),
    Mp(usize, usize),
    Gen(usize, String),
    DeltaRule(usize),
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::Premise => write!(f, "premise"),
            Justification::Axiom(n) => write!(f, "axiom {n}"),
            Justification::Mp(i, j) => write!(f, "mp {i} {j}"),
            Justification::Gen(i, x) => write!(f, "gen {i} {x}"),
            Justification::DeltaRule(i) => write!(f, "delta {i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofLine {
    pub formula: Formula,
    pub just: Justification,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Proof {
    pub lines: Vec<ProofLine>,
}

/// A successful schema match: which schema, and what the metavariables stand
/// for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomMatch {
    pub schema: &'static str,
    pub formulas: BTreeMap<&'static str, Formula>,
    pub constants: BTreeMap<&'static str, Value>,
    pub terms: BTreeMap<&'static str, Term>,
    pub vars: BTreeMap<&'static str, String>,
}

impl AxiomMatch {
    fn new(schema: &'static str) -> Self {
        AxiomMatch {
            schema,
            formulas: BTreeMap::new(),
            constants: BTreeMap::new(),
            terms: BTreeMap::new(),
            vars: BTreeMap::new(),
        }
    }
}

impl fmt::Display for AxiomMatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.schema)?;
        let mut parts: Vec<String> = Vec::new();
        for (k, v) in &self.formulas {
            parts.push(format!("{k} := {v}"));
        }
        for (k, v) in &self.constants {
            parts.push(format!("{k} := {v}"));
        }
        for (k, v) in &self.terms {
            parts.push(format!("{k} := {v}"));
        }
        for (k, v) in &self.vars {
            parts.push(format!("{k} := {v}"));
        }
        if !parts.is_empty() {
            write!(f, " {{{}}}", parts.join(", "))?;
        }
        Ok(())
    }
}

/// Arithmetic side conditions on constant metavariables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    None,
    /// r >= s
    GeRs,
    /// r < s
    LtRs,
    /// r < 1
    LtOneR,
    /// m = max(r, s)
    MaxRsm,
}

impl Side {
    fn check(&self, c: &BTreeMap<&'static str, Value>) -> bool {
        match self {
            Side::None => true,
            Side::GeRs => c["r"] >= c["s"],
            Side::LtRs => c["r"] < c["s"],
            Side::LtOneR => c["r"] < Value::one(),
            Side::MaxRsm => c["m"] == *std::cmp::max(&c["r"], &c["s"]),
        }
    }
}

struct Schema {
    name: &'static str,
    pattern: Formula,
    side: Side,
}

// Metavariables are encoded as reserved atoms inside pattern formulas:
// `?phi ?psi ?chi` match arbitrary formulas, `?r ?s ?m` match constant-valued
// nodes (truth constants or bot).
fn meta(name: &str) -> Formula {
    Formula::atom0(format!("?{name}"))
}

fn propositional_schemas() -> &'static Vec<Schema> {
    static SCHEMAS: OnceLock<Vec<Schema>> = OnceLock::new();
    SCHEMAS.get_or_init(|| {
        let phi = || meta("phi");
        let psi = || meta("psi");
        let chi = || meta("chi");
        let r = || meta("r");
        let s = || meta("s");
        let m = || meta("m");
        vec![
            Schema {
                name: "G1",
                pattern: Formula::to(
                    Formula::to(phi(), psi()),
                    Formula::to(Formula::to(psi(), chi()), Formula::to(phi(), chi())),
                ),
                side: Side::None,
            },
            Schema {
                name: "G2",
                pattern: Formula::to(Formula::and(phi(), psi()), phi()),
                side: Side::None,
            },
            Schema {
                name: "G3",
                pattern: Formula::to(Formula::and(phi(), psi()), Formula::and(psi(), phi())),
                side: Side::None,
            },
            Schema {
                name: "G4",
                pattern: Formula::to(phi(), Formula::and(phi(), phi())),
                side: Side::None,
            },
            Schema {
                name: "G5",
                pattern: Formula::iff(
                    Formula::to(phi(), Formula::to(psi(), chi())),
                    Formula::to(Formula::and(phi(), psi()), chi()),
                ),
                side: Side::None,
            },
            Schema {
                name: "G6",
                pattern: Formula::to(
                    Formula::to(Formula::to(phi(), psi()), chi()),
                    Formula::to(Formula::to(Formula::to(psi(), phi()), chi()), chi()),
                ),
                side: Side::None,
            },
            Schema {
                name: "G7",
                pattern: Formula::to(Formula::TruthConst(Value::one()), phi()),
                side: Side::None,
            },
            Schema {
                name: "RG1",
                pattern: Formula::iff(Formula::and(r(), s()), m()),
                side: Side::MaxRsm,
            },
            Schema {
                name: "RG2a",
                pattern: Formula::to(r(), s()),
                side: Side::GeRs,
            },
            Schema {
                name: "RG2b",
                pattern: Formula::iff(Formula::to(r(), s()), s()),
                side: Side::LtRs,
            },
            Schema {
                name: "RG3",
                pattern: Formula::neg(Formula::neg(r())),
                side: Side::LtOneR,
            },
            Schema {
                name: "D1",
                pattern: Formula::or(
                    Formula::delta(phi()),
                    Formula::neg(Formula::delta(phi())),
                ),
                side: Side::None,
            },
            Schema {
                name: "D2",
                pattern: Formula::to(
                    Formula::delta(Formula::or(phi(), psi())),
                    Formula::or(Formula::delta(phi()), Formula::delta(psi())),
                ),
                side: Side::None,
            },
            Schema {
                name: "D3",
                pattern: Formula::to(Formula::delta(phi()), phi()),
                side: Side::None,
            },
            Schema {
                name: "D4",
                pattern: Formula::to(
                    Formula::delta(phi()),
                    Formula::delta(Formula::delta(phi())),
                ),
                side: Side::None,
            },
            Schema {
                name: "D5",
                pattern: Formula::to(
                    Formula::delta(Formula::to(phi(), psi())),
                    Formula::to(Formula::delta(phi()), Formula::delta(psi())),
                ),
                side: Side::None,
            },
        ]
    })
}

/// Names of all axiom schemas, quantifier schemas included.
pub fn schema_names() -> Vec<&'static str> {
    let mut names: Vec<&'static str> = propositional_schemas().iter().map(|s| s.name).collect();
    names.extend(QUANTIFIER_SCHEMAS);
    names
}

const QUANTIFIER_SCHEMAS: [&str; 5] = ["Gforall1", "Gforall2", "Gforall3", "Gexists1", "Gexists2"];

fn match_pattern(pat: &Formula, f: &Formula, m: &mut AxiomMatch) -> bool {
    match pat {
        Formula::Atom(name, args) if name.starts_with('?') && args.is_empty() => {
            let key = &name[1..];
            if matches!(key, "r" | "s" | "m") {
                let Some(v) = f.as_const_value() else {
                    return false;
                };
                let key: &'static str = match key {
                    "r" => "r",
                    "s" => "s",
                    _ => "m",
                };
                match m.constants.get(key) {
                    Some(prev) => *prev == v,
                    None => {
                        m.constants.insert(key, v);
                        true
                    }
                }
            } else {
                let key: &'static str = match key {
                    "phi" => "phi",
                    "psi" => "psi",
                    _ => "chi",
                };
                match m.formulas.get(key) {
                    Some(prev) => prev == f,
                    None => {
                        m.formulas.insert(key, f.clone());
                        true
                    }
                }
            }
        }
        // Constant positions: bot and #1 are the same nullary connective.
        Formula::Bot | Formula::TruthConst(_) => match (pat.as_const_value(), f.as_const_value()) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        },
        Formula::Atom(..) => pat == f,
        Formula::And(a, b) => match f {
            Formula::And(x, y) => match_pattern(a, x, m) && match_pattern(b, y, m),
            _ => false,
        },
        Formula::To(a, b) => match f {
            Formula::To(x, y) => match_pattern(a, x, m) && match_pattern(b, y, m),
            _ => false,
        },
        Formula::Delta(a) => match f {
            Formula::Delta(x) => match_pattern(a, x, m),
            _ => false,
        },
        Formula::Forall(..) | Formula::Exists(..) => unreachable!("patterns are propositional"),
    }
}

/// Finds the unique term `t` with `body[var := t] = inst`, walking both in
/// lockstep. Returns `None` on mismatch; `Some(None)` when `var` has no free
/// occurrence (any `t` works).
fn match_substitution(body: &Formula, var: &str, inst: &Formula) -> Option<Option<Term>> {
    fn terms(a: &Term, var: &str, b: &Term, shadowed: bool, t: &mut Option<Term>) -> bool {
        match a {
            Term::Var(v) if v == var && !shadowed => match t {
                Some(prev) => prev == b,
                None => {
                    *t = Some(b.clone());
                    true
                }
            },
            Term::Var(_) | Term::Const(_) => a == b,
            Term::App(f, args) => match b {
                Term::App(g, bargs) if f == g && args.len() == bargs.len() => args
                    .iter()
                    .zip(bargs)
                    .all(|(x, y)| terms(x, var, y, shadowed, t)),
                _ => false,
            },
        }
    }
    fn walk(
        a: &Formula,
        var: &str,
        b: &Formula,
        shadowed: bool,
        t: &mut Option<Term>,
    ) -> bool {
        match (a, b) {
            (Formula::Bot, Formula::Bot) => true,
            (Formula::TruthConst(x), Formula::TruthConst(y)) => x == y,
            (Formula::Atom(p, xs), Formula::Atom(q, ys)) => {
                p == q
                    && xs.len() == ys.len()
                    && xs
                        .iter()
                        .zip(ys)
                        .all(|(x, y)| terms(x, var, y, shadowed, t))
            }
            (Formula::And(a1, a2), Formula::And(b1, b2))
            | (Formula::To(a1, a2), Formula::To(b1, b2)) => {
                walk(a1, var, b1, shadowed, t) && walk(a2, var, b2, shadowed, t)
            }
            (Formula::Delta(a), Formula::Delta(b)) => walk(a, var, b, shadowed, t),
            (Formula::Forall(x, a), Formula::Forall(y, b))
            | (Formula::Exists(x, a), Formula::Exists(y, b)) => {
                x == y && walk(a, var, b, shadowed || x == var, t)
            }
            _ => false,
        }
    }
    let mut t = None;
    walk(body, var, inst, false, &mut t).then_some(t)
}

/// Destructures an expanded disjunction `((a->b)->b) & ((b->a)->a)`.
fn as_or(f: &Formula) -> Option<(&Formula, &Formula)> {
    let Formula::And(l, r) = f else { return None };
    let Formula::To(lt, b2) = &**l else {
        return None;
    };
    let Formula::To(a1, b1) = &**lt else {
        return None;
    };
    let Formula::To(rt, a3) = &**r else {
        return None;
    };
    let Formula::To(b3, a2) = &**rt else {
        return None;
    };
    (b1 == b2 && a1 == a2 && a2 == a3 && b1 == b3).then_some((a1, b1))
}

fn match_quantifier_schemas(f: &Formula) -> Vec<AxiomMatch> {
    let mut out = Vec::new();
    let Formula::To(lhs, rhs) = f else {
        return out;
    };

    // Gforall1: (forall x phi(x)) -> phi(t), t substitutable
    if let Formula::Forall(x, body) = &**lhs {
        if let Some(t) = match_substitution(body, x, rhs) {
            let t = t.unwrap_or(Term::Var(x.clone()));
            if substitutable(&t, x, body) {
                let mut m = AxiomMatch::new("Gforall1");
                m.formulas.insert("phi", (**body).clone());
                m.vars.insert("x", x.clone());
                m.terms.insert("t", t);
                out.push(m);
            }
        }
    }
    // Gexists1: phi(t) -> (exists x phi(x))
    if let Formula::Exists(x, body) = &**rhs {
        if let Some(t) = match_substitution(body, x, lhs) {
            let t = t.unwrap_or(Term::Var(x.clone()));
            if substitutable(&t, x, body) {
                let mut m = AxiomMatch::new("Gexists1");
                m.formulas.insert("phi", (**body).clone());
                m.vars.insert("x", x.clone());
                m.terms.insert("t", t);
                out.push(m);
            }
        }
    }
    // Gforall2: (forall x (psi -> phi(x))) -> (psi -> forall x phi(x)), x not free in psi
    if let (Formula::Forall(x, inner), Formula::To(psi2, all2)) = (&**lhs, &**rhs) {
        if let (Formula::To(psi1, phi1), Formula::Forall(x2, phi2)) = (&**inner, &**all2) {
            if x == x2 && psi1 == psi2 && phi1 == phi2 && !psi1.free_vars().contains(x) {
                let mut m = AxiomMatch::new("Gforall2");
                m.formulas.insert("phi", (**phi1).clone());
                m.formulas.insert("psi", (**psi1).clone());
                m.vars.insert("x", x.clone());
                out.push(m);
            }
        }
    }
    // Gforall3: (forall x (psi | phi(x))) -> (psi | forall x phi(x)), x not free in psi
    if let Formula::Forall(x, inner) = &**lhs {
        if let (Some((psi1, phi1)), Some((psi2, Formula::Forall(x2, phi2)))) =
            (as_or(inner), as_or(rhs))
        {
            if x == x2 && psi1 == psi2 && phi1 == &**phi2 && !psi1.free_vars().contains(x) {
                let mut m = AxiomMatch::new("Gforall3");
                m.formulas.insert("phi", phi1.clone());
                m.formulas.insert("psi", psi1.clone());
                m.vars.insert("x", x.clone());
                out.push(m);
            }
        }
    }
    // Gexists2: (forall x (phi(x) -> psi)) -> ((exists x phi(x)) -> psi), x not free in psi
    if let (Formula::Forall(x, inner), Formula::To(ex2, psi2)) = (&**lhs, &**rhs) {
        if let (Formula::To(phi1, psi1), Formula::Exists(x2, phi2)) = (&**inner, &**ex2) {
            if x == x2 && phi1 == phi2 && psi1 == psi2 && !psi1.free_vars().contains(x) {
                let mut m = AxiomMatch::new("Gexists2");
                m.formulas.insert("phi", (**phi1).clone());
                m.formulas.insert("psi", (**psi1).clone());
                m.vars.insert("x", x.clone());
                out.push(m);
            }
        }
    }
    out
}

/// All schemata whose pattern unifies with the formula, side conditions
/// included; the empty list when none do.
pub fn match_axiom(f: &Formula) -> Vec<AxiomMatch> {
    let mut out = Vec::new();
    if f.is_propositional() {
        for schema in propositional_schemas() {
            let mut m = AxiomMatch::new(schema.name);
            if match_pattern(&schema.pattern, f, &mut m) && schema.side.check(&m.constants) {
                out.push(m);
            }
        }
    } else {
        // quantifier instances may still match propositional schemas
        for schema in propositional_schemas() {
            let mut m = AxiomMatch::new(schema.name);
            if match_pattern_fo(&schema.pattern, f, &mut m) && schema.side.check(&m.constants) {
                out.push(m);
            }
        }
    }
    out.extend(match_quantifier_schemas(f));
    out
}

// Propositional pattern against a formula that may contain quantified parts
// inside metavariable positions.
fn match_pattern_fo(pat: &Formula, f: &Formula, m: &mut AxiomMatch) -> bool {
    match pat {
        Formula::Atom(name, _) if name.starts_with('?') => match_pattern(pat, f, m),
        Formula::And(a, b) => match f {
            Formula::And(x, y) => match_pattern_fo(a, x, m) && match_pattern_fo(b, y, m),
            _ => false,
        },
        Formula::To(a, b) => match f {
            Formula::To(x, y) => match_pattern_fo(a, x, m) && match_pattern_fo(b, y, m),
            _ => false,
        },
        Formula::Delta(a) => match f {
            Formula::Delta(x) => match_pattern_fo(a, x, m),
            _ => false,
        },
        _ => match_pattern(pat, f, m),
    }
}

/// Checks a proof against the premises; `Ok` carries the conclusion. Premise
/// lines must be members of the theory up to syntactic equality after sugar
/// expansion.
pub fn check_proof(premises: &[Formula], pf: &Proof) -> Result<Formula, ProofError> {
    if pf.lines.is_empty() {
        return Err(line_err(0, "empty proof"));
    }
    for (ix, line) in pf.lines.iter().enumerate() {
        let lineno = ix + 1;
        let fetch = |i: usize| -> Result<&Formula, ProofError> {
            if i == 0 || i >= lineno {
                return Err(line_err(lineno, "bad index"));
            }
            Ok(&pf.lines[i - 1].formula)
        };
        match &line.just {
            Justification::Premise => {
                if !premises.contains(&line.formula) {
                    return Err(line_err(lineno, "premise not in theory"));
                }
            }
            Justification::Axiom(name) => {
                let matches = match_axiom(&line.formula);
                if !schema_names().contains(&name.as_str()) {
                    return Err(line_err(lineno, format!("unknown axiom schema {name}")));
                }
                if !matches.iter().any(|m| m.schema == name) {
                    return Err(line_err(lineno, format!("no {name} match")));
                }
            }
            Justification::Mp(i, j) => {
                let minor = fetch(*i)?;
                let major = fetch(*j)?;
                let expected = Formula::to(minor.clone(), line.formula.clone());
                if *major != expected {
                    return Err(line_err(lineno, "mp mismatch"));
                }
            }
            Justification::Gen(i, x) => {
                let prev = fetch(*i)?;
                let expected = Formula::forall(x.clone(), prev.clone());
                if line.formula != expected {
                    return Err(line_err(lineno, "gen mismatch"));
                }
            }
            Justification::DeltaRule(i) => {
                let prev = fetch(*i)?;
                let expected = Formula::delta(prev.clone());
                if line.formula != expected {
                    return Err(line_err(lineno, "delta-rule mismatch"));
                }
            }
        }
    }
    Ok(pf.lines.last().unwrap().formula.clone())
}

/// Parses the proof file format: `n. <formula> ; <justification>` per line,
/// `#`-comments. Line numbers must run 1, 2, 3, ...
pub fn parse_proof(text: &str, sig: &Signature) -> Result<Proof, ProofError> {
    let mut lines = Vec::new();
    for (raw_no, raw) in text.lines().enumerate() {
        let file_line = raw_no + 1;
        let line = match raw.find('#') {
            // truth constants appear only left of `;`, guarded by digits
            Some(ix) if !raw[ix + 1..].starts_with(|c: char| c.is_ascii_digit() || c == '(') => {
                &raw[..ix]
            }
            _ => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (head, just) = line.split_once(';').ok_or_else(|| ProofError::File {
            line: file_line,
            msg: "expected `n. formula ; justification`".into(),
        })?;
        let (num, formula_text) = head.trim().split_once('.').ok_or_else(|| ProofError::File {
            line: file_line,
            msg: "expected a line number followed by `.`".into(),
        })?;
        let num: usize = num.trim().parse().map_err(|_| ProofError::File {
            line: file_line,
            msg: format!("bad line number `{num}`"),
        })?;
        if num != lines.len() + 1 {
            return Err(ProofError::File {
                line: file_line,
                msg: format!("expected line number {}, got {num}", lines.len() + 1),
            });
        }
        let formula = parse_formula(formula_text, sig)?;
        let toks: Vec<&str> = just.split_whitespace().collect();
        let just = match toks.as_slice() {
            ["premise"] => Justification::Premise,
            ["axiom", name] => Justification::Axiom((*name).to_string()),
            ["mp", i, j] => Justification::Mp(
                i.parse().map_err(|_| ProofError::File {
                    line: file_line,
                    msg: format!("bad index `{i}`"),
                })?,
                j.parse().map_err(|_| ProofError::File {
                    line: file_line,
                    msg: format!("bad index `{j}`"),
                })?,
            ),
            ["gen", i, x] => Justification::Gen(
                i.parse().map_err(|_| ProofError::File {
                    line: file_line,
                    msg: format!("bad index `{i}`"),
                })?,
                (*x).to_string(),
            ),
            ["delta", i] => Justification::DeltaRule(i.parse().map_err(|_| ProofError::File {
                line: file_line,
                msg: format!("bad index `{i}`"),
            })?),
            _ => {
                return Err(ProofError::File {
                    line: file_line,
                    msg: format!("unrecognized justification `{}`", just.trim()),
                })
            }
        };
        lines.push(ProofLine { formula, just });
    }
    Ok(Proof { lines })
}

/// Report of evaluating a premise-free conclusion in random structures.
#[derive(Debug, Clone)]
pub struct SpotcheckReport {
    pub conclusion: Formula,
    pub samples: usize,
    /// Structures witnessing a nonzero value; any entry flags a checker bug.
    pub counterexamples: Vec<String>,
}

/// Evaluates the conclusion of a checked premise-free proof in `samples`
/// random finite structures (propositional conclusions get random
/// assignments); a nonzero value anywhere flags a soundness bug loudly.
pub fn soundness_spotcheck(
    pf: &Proof,
    samples: usize,
    seed: u64,
) -> Result<SpotcheckReport, ProofError> {
    if pf.lines.iter().any(|l| l.just == Justification::Premise) {
        return Err(ProofError::HasPremises);
    }
    let conclusion = check_proof(&[], pf)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counterexamples = Vec::new();
    let preds = conclusion.preds_used();
    let consts = conclusion.const_syms();
    let mut value_pool: Vec<Value> = conclusion.truth_constants().into_iter().collect();
    value_pool.push(Value::zero());
    value_pool.push(Value::one());
    for denom in [3i64, 5, 8] {
        for num in 1..denom {
            value_pool.push(Value::frac(num, denom));
        }
    }
    let env = Environment::new();
    for _ in 0..samples {
        let size = rng.gen_range(1..=3usize);
        let elements: Vec<String> = (0..size).map(|i| format!("e{i}")).collect();
        let mut m = Structure {
            elements,
            preds: BTreeMap::new(),
            funcs: BTreeMap::new(),
            consts: BTreeMap::new(),
            delta_enabled: conclusion.has_delta(),
        };
        for (p, arity) in &preds {
            let total = size.pow(*arity as u32);
            let data = (0..total)
                .map(|_| value_pool[rng.gen_range(0..value_pool.len())].clone())
                .collect();
            m.preds.insert(
                p.clone(),
                ValueTable {
                    arity: *arity,
                    data,
                },
            );
        }
        for c in &consts {
            m.consts.insert(c.clone(), rng.gen_range(0..size));
        }
        let v = eval_formula(&m, &conclusion, &env)
            .map_err(|e| line_err(pf.lines.len(), e.to_string()))?;
        if !v.is_zero() {
            counterexamples.push(format!("value {v} in\n{m}"));
        }
    }
    Ok(SpotcheckReport {
        conclusion,
        samples,
        counterexamples,
    })
}

/// Universal closure over the free variables, in sorted order.
pub fn universal_closure(f: &Formula) -> Formula {
    let mut out = f.clone();
    for v in f.free_vars().into_iter().rev() {
        out = Formula::forall(v, out);
    }
    out
}

/// Whether the sentence evaluates to 0 in every structure of the given
/// universe sizes, checked by exhaustive arrangement enumeration of the
/// grounded formula. Propositional input is checked directly.
pub fn valid_at_zero(
    f: &Formula,
    set: &GoedelSet,
    sizes: &[usize],
    config: &DecideConfig,
) -> Result<bool, ProofError> {
    let closed = universal_closure(f);
    if closed.is_propositional() {
        let v = decide::entails(&[], &closed, set, &crate::values::ConstantFamily::empty(), config)?;
        return Ok(matches!(v, Verdict::Entailed));
    }
    for size in sizes {
        let names: Vec<String> = (0..*size).map(|i| format!("e{i}")).collect();
        let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let grounded = ground_over(&closed, &name_refs)
            .map_err(|e| line_err(0, e.to_string()))?;
        let v = decide::entails(
            &[],
            &grounded,
            set,
            &crate::values::ConstantFamily::empty(),
            config,
        )?;
        if !matches!(v, Verdict::Entailed) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A random instance of the named schema: propositional metavariables drawn
/// from the pool, constants drawn from `pool.constants ∪ {1}` respecting the
/// side condition, quantifier schemas built over a fresh unary predicate
/// `R` with `t` a fresh free variable (close with [`universal_closure`]
/// before grounding). Returns `None` when the side condition cannot be met.
pub fn random_axiom_instance(
    name: &str,
    pool: &PropPool,
    rng: &mut impl Rng,
) -> Option<Formula> {
    let mut constants = pool.constants.clone();
    constants.push(Value::one());
    fn rand_f(pool: &PropPool, rng: &mut impl Rng) -> Formula {
        let size = rng.gen_range(1..=4usize);
        crate::enumerate::random_propositional(pool, size, rng)
    }
    if let Some(schema) = propositional_schemas().iter().find(|s| s.name == name) {
        // draw constants until the side condition holds
        for _ in 0..64 {
            let r = constants[rng.gen_range(0..constants.len())].clone();
            let s = constants[rng.gen_range(0..constants.len())].clone();
            let m = std::cmp::max(&r, &s).clone();
            let consts: BTreeMap<&'static str, Value> =
                [("r", r.clone()), ("s", s.clone()), ("m", m.clone())]
                    .into_iter()
                    .collect();
            if !schema.side.check(&consts) {
                continue;
            }
            let phi = rand_f(pool, rng);
            let psi = rand_f(pool, rng);
            let chi = rand_f(pool, rng);
            fn subst(
                pat: &Formula,
                phi: &Formula,
                psi: &Formula,
                chi: &Formula,
                consts: &BTreeMap<&'static str, Value>,
            ) -> Formula {
                match pat {
                    Formula::Atom(name, _) if name.starts_with('?') => match &name[1..] {
                        "phi" => phi.clone(),
                        "psi" => psi.clone(),
                        "chi" => chi.clone(),
                        key => Formula::TruthConst(consts[key].clone()),
                    },
                    Formula::Bot => Formula::Bot,
                    Formula::TruthConst(v) => Formula::TruthConst(v.clone()),
                    Formula::Atom(..) => pat.clone(),
                    Formula::And(a, b) => Formula::and(
                        subst(a, phi, psi, chi, consts),
                        subst(b, phi, psi, chi, consts),
                    ),
                    Formula::To(a, b) => Formula::to(
                        subst(a, phi, psi, chi, consts),
                        subst(b, phi, psi, chi, consts),
                    ),
                    Formula::Delta(a) => Formula::delta(subst(a, phi, psi, chi, consts)),
                    Formula::Forall(..) | Formula::Exists(..) => unreachable!(),
                }
            }
            return Some(subst(&schema.pattern, &phi, &psi, &chi, &consts));
        }
        return None;
    }
    // quantifier schemas: phi(x) = R(x) or R(x) ° <small psi>, psi propositional
    let rx = Formula::Atom("R".into(), vec![Term::Var("x".into())]);
    let phi_x = match rng.gen_range(0..3) {
        0 => rx.clone(),
        1 => Formula::and(rx.clone(), rand_f(pool, rng)),
        _ => Formula::to(rand_f(pool, rng), rx.clone()),
    };
    let psi = rand_f(pool, rng);
    let t = Term::Var("y".into());
    Some(match name {
        "Gforall1" => Formula::to(
            Formula::forall("x", phi_x.clone()),
            phi_x.subst_var("x", &t),
        ),
        "Gexists1" => Formula::to(
            phi_x.subst_var("x", &t),
            Formula::exists("x", phi_x.clone()),
        ),
        "Gforall2" => Formula::to(
            Formula::forall("x", Formula::to(psi.clone(), phi_x.clone())),
            Formula::to(psi.clone(), Formula::forall("x", phi_x.clone())),
        ),
        "Gforall3" => Formula::to(
            Formula::forall("x", Formula::or(psi.clone(), phi_x.clone())),
            Formula::or(psi.clone(), Formula::forall("x", phi_x.clone())),
        ),
        "Gexists2" => Formula::to(
            Formula::forall("x", Formula::to(phi_x.clone(), psi.clone())),
            Formula::to(Formula::exists("x", phi_x.clone()), psi.clone()),
        ),
        _ => return None,
    })
}
