//! Machine-checked compactness counterexamples: finite-satisfiability sweeps
//! with verified witnesses, and interval-constraint proofs that the full
//! infinite theories are unsatisfiable (or force a value the finite prefixes
//! never force).
//!
//! Each scenario carries its own constraint derivation: a list of rules
//! mapping sentence schemas to feasible-set updates, each documented with the
//! hand proof it transcribes. The machine checks interval emptiness and
//! prefix witnesses; it does not infer constraints from first-order formulas.

use crate::decide::{self, DecideConfig, DecideError, Verdict};
use crate::parser::{parse_formula, parse_theory};
use crate::semantics::{self, Environment, SemanticsError, Structure, ValueTable};
use crate::syntax::{Formula, Signature, SyntaxError, Theory};
use crate::values::{
    Capacity, ClosedForm, ConstantFamily, GoedelSet, Value, ValueError,
};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("scenario `{0}` not found")]
    UnknownScenario(String),
    #[error("prefix m={m} of `{scenario}` is unexpectedly UNSAT (scenario bug)")]
    PrefixUnsat { scenario: String, m: u64 },
    #[error("witness for m={m} failed the model re-check: {detail}")]
    WitnessRejected { m: u64, detail: String },
    #[error("rule for `{var}` needs `{other}` forced to a point first")]
    RuleNeedsForcedVar { var: String, other: String },
    #[error("expected verdict mismatch: {0}")]
    Expectation(String),
    #[error(transparent)]
    Decide(#[from] DecideError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Value(#[from] ValueError),
}

/// A closed/open interval inside `[0,1]` with rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Value,
    pub lo_open: bool,
    pub hi: Value,
    pub hi_open: bool,
}

impl Interval {
    fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && (self.lo_open || self.hi_open))
    }

    fn contains(&self, v: &Value) -> bool {
        let above = if self.lo_open { v > &self.lo } else { v >= &self.lo };
        let below = if self.hi_open { v < &self.hi } else { v <= &self.hi };
        above && below
    }

    fn intersect(&self, o: &Interval) -> Option<Interval> {
        let (lo, lo_open) = match self.lo.cmp(&o.lo) {
            std::cmp::Ordering::Greater => (self.lo.clone(), self.lo_open),
            std::cmp::Ordering::Less => (o.lo.clone(), o.lo_open),
            std::cmp::Ordering::Equal => (self.lo.clone(), self.lo_open || o.lo_open),
        };
        let (hi, hi_open) = match self.hi.cmp(&o.hi) {
            std::cmp::Ordering::Less => (self.hi.clone(), self.hi_open),
            std::cmp::Ordering::Greater => (o.hi.clone(), o.hi_open),
            std::cmp::Ordering::Equal => (self.hi.clone(), self.hi_open || o.hi_open),
        };
        let out = Interval {
            lo,
            lo_open,
            hi,
            hi_open,
        };
        (!out.is_empty()).then_some(out)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            return write!(f, "{{{}}}", self.lo);
        }
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_open { "(" } else { "[" },
            self.lo,
            self.hi,
            if self.hi_open { ")" } else { "]" },
        )
    }
}

/// A feasible subset of `[0,1]`: a finite union of disjoint intervals plus an
/// "or exactly 0" disjunct. Canonical form keeps the intervals sorted,
/// disjoint, and free of the point 0 (membership of 0 lives in the flag).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSet {
    pub intervals: Vec<Interval>,
    pub or_zero: bool,
}

/// Cardinality summary of a feasible set against a Goedel set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solutions {
    Empty,
    Point(Value),
    Many,
}

impl ConstraintSet {
    pub fn full() -> Self {
        ConstraintSet {
            intervals: vec![Interval {
                lo: Value::zero(),
                lo_open: true,
                hi: Value::one(),
                hi_open: false,
            }],
            or_zero: true,
        }
    }

    pub fn empty() -> Self {
        ConstraintSet {
            intervals: Vec::new(),
            or_zero: false,
        }
    }

    pub fn point(v: Value) -> Self {
        let mut s = ConstraintSet {
            intervals: vec![Interval {
                lo: v.clone(),
                lo_open: false,
                hi: v,
                hi_open: false,
            }],
            or_zero: false,
        };
        s.normalize();
        s
    }

    /// `x <= v`, `x < v`, `x >= v`, `x > v` as subsets of `[0,1]`.
    pub fn at_most(v: Value) -> Self {
        let mut s = ConstraintSet {
            intervals: vec![Interval {
                lo: Value::zero(),
                lo_open: false,
                hi: v,
                hi_open: false,
            }],
            or_zero: false,
        };
        s.normalize();
        s
    }

    pub fn below(v: Value) -> Self {
        let mut s = ConstraintSet {
            intervals: vec![Interval {
                lo: Value::zero(),
                lo_open: false,
                hi: v,
                hi_open: true,
            }],
            or_zero: false,
        };
        s.normalize();
        s
    }

    pub fn at_least(v: Value) -> Self {
        let mut s = ConstraintSet {
            intervals: vec![Interval {
                lo: v,
                lo_open: false,
                hi: Value::one(),
                hi_open: false,
            }],
            or_zero: false,
        };
        s.normalize();
        s
    }

    pub fn above(v: Value) -> Self {
        let mut s = ConstraintSet {
            intervals: vec![Interval {
                lo: v,
                lo_open: true,
                hi: Value::one(),
                hi_open: false,
            }],
            or_zero: false,
        };
        s.normalize();
        s
    }

    /// `x > 0`.
    pub fn nonzero() -> Self {
        ConstraintSet::above(Value::zero())
    }

    fn normalize(&mut self) {
        self.intervals.retain(|i| !i.is_empty());
        for iv in &mut self.intervals {
            if iv.lo.is_zero() && !iv.lo_open {
                self.or_zero = true;
                if iv.hi.is_zero() {
                    iv.hi_open = true; // degenerate {0}: becomes empty
                } else {
                    iv.lo_open = true;
                }
            }
        }
        self.intervals.retain(|i| !i.is_empty());
        self.intervals
            .sort_by(|a, b| (&a.lo, a.lo_open).cmp(&(&b.lo, b.lo_open)));
        let mut merged: Vec<Interval> = Vec::with_capacity(self.intervals.len());
        for iv in self.intervals.drain(..) {
            match merged.last_mut() {
                Some(prev)
                    if iv.lo < prev.hi
                        || (iv.lo == prev.hi && (!iv.lo_open || !prev.hi_open)) =>
                {
                    if (&iv.hi, !iv.hi_open) > (&prev.hi, !prev.hi_open) {
                        prev.hi = iv.hi;
                        prev.hi_open = iv.hi_open;
                    }
                }
                _ => merged.push(iv),
            }
        }
        self.intervals = merged;
    }

    pub fn contains(&self, v: &Value) -> bool {
        if v.is_zero() {
            return self.or_zero;
        }
        self.intervals.iter().any(|i| i.contains(v))
    }

    pub fn intersect(&self, other: &ConstraintSet) -> ConstraintSet {
        let mut intervals = Vec::new();
        for a in &self.intervals {
            for b in &other.intervals {
                if let Some(c) = a.intersect(b) {
                    intervals.push(c);
                }
            }
        }
        let mut out = ConstraintSet {
            intervals,
            or_zero: self.or_zero && other.or_zero,
        };
        out.normalize();
        out
    }

    /// Counts the members of the feasible set inside the Goedel set.
    pub fn solutions_in(&self, set: &GoedelSet) -> Result<Solutions, ValueError> {
        let mut count: u64 = 0;
        let mut sole: Option<Value> = None;
        let mut bump = |v: Value, count: &mut u64| {
            if *count == 0 {
                sole = Some(v);
            }
            *count += 1;
        };
        if self.or_zero {
            bump(Value::zero(), &mut count); // 0 belongs to every Goedel set
        }
        for iv in &self.intervals {
            if iv.lo == iv.hi {
                if set.member(&iv.lo) {
                    bump(iv.lo.clone(), &mut count);
                }
                continue;
            }
            if !iv.lo_open && set.member(&iv.lo) {
                bump(iv.lo.clone(), &mut count);
            }
            if !iv.hi_open && set.member(&iv.hi) {
                bump(iv.hi.clone(), &mut count);
            }
            match set.gap_capacity(&iv.lo, &iv.hi)? {
                Capacity::Infinite => return Ok(Solutions::Many),
                Capacity::Finite(0) => {}
                Capacity::Finite(k) => {
                    if count == 0 && k == 1 {
                        let member = set
                            .enumerate_gap(&iv.lo, &iv.hi)?
                            .expect("finite capacity enumerates")
                            .into_iter()
                            .next()
                            .expect("capacity said one member");
                        bump(member, &mut count);
                    } else {
                        count += k;
                    }
                }
            }
            if count > 1 {
                return Ok(Solutions::Many);
            }
        }
        Ok(match count {
            0 => Solutions::Empty,
            1 => Solutions::Point(sole.expect("counted one member")),
            _ => Solutions::Many,
        })
    }
}

impl fmt::Display for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if self.or_zero {
            write!(f, "{{0}}")?;
            first = false;
        }
        for iv in &self.intervals {
            if !first {
                write!(f, " ∪ ")?;
            }
            write!(f, "{iv}")?;
            first = false;
        }
        if first {
            write!(f, "∅")?;
        }
        Ok(())
    }
}

/// Comparison direction of a per-instance constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Lt,
    Ge,
    Gt,
}

impl Rel {
    fn against(self, v: Value) -> ConstraintSet {
        match self {
            Rel::Le => ConstraintSet::at_most(v),
            Rel::Lt => ConstraintSet::below(v),
            Rel::Ge => ConstraintSet::at_least(v),
            Rel::Gt => ConstraintSet::above(v),
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }
}

/// The feasible set left by imposing `x rel form(n)` for every `n >= 1`,
/// derived from the monotonicity of the closed form. Limit endpoints carry
/// their attainment through the open/closed flags.
pub fn limit_constraint(rel: Rel, form: &ClosedForm) -> ConstraintSet {
    if form.is_constant() {
        return rel.against(form.limit());
    }
    let c = form.limit();
    let first = form.eval(1);
    if form.is_decreasing() {
        match rel {
            // x <= f(n) for all n collapses onto the infimum c, attained
            Rel::Le | Rel::Lt => ConstraintSet::at_most(c),
            // x >= f(n) is hardest at n = 1
            Rel::Ge => ConstraintSet::at_least(first),
            Rel::Gt => ConstraintSet::above(first),
        }
    } else {
        match rel {
            // x >= f(n) for all n collapses onto the supremum c, attained
            Rel::Ge | Rel::Gt => ConstraintSet::at_least(c),
            Rel::Le => ConstraintSet::at_most(first),
            Rel::Lt => ConstraintSet::below(first),
        }
    }
}

/// The feasible set from the first `m` instances only.
pub fn prefix_constraint(rel: Rel, form: &ClosedForm, m: u64) -> ConstraintSet {
    if form.is_constant() {
        return rel.against(form.limit());
    }
    let binding = if form.is_decreasing() {
        // f(m) is the smallest instance so far
        match rel {
            Rel::Le | Rel::Lt => form.eval(m),
            Rel::Ge | Rel::Gt => form.eval(1),
        }
    } else {
        match rel {
            Rel::Ge | Rel::Gt => form.eval(m),
            Rel::Le | Rel::Lt => form.eval(1),
        }
    };
    rel.against(binding)
}

/// One step of a scenario's constraint derivation, with the documented hand
/// proof it transcribes.
#[derive(Debug, Clone)]
pub enum Rule {
    /// A base sentence pins `var` into a fixed set.
    Base {
        var: &'static str,
        set: ConstraintSet,
        note: &'static str,
    },
    /// Family instances impose `var rel form(n)` for every `n`.
    PerInstance {
        var: &'static str,
        rel: Rel,
        form: ClosedForm,
        note: &'static str,
    },
    /// `var < other or var = 0`, where `other` must already be forced.
    LtVarOrZero {
        var: &'static str,
        other: &'static str,
        note: &'static str,
    },
}

impl Rule {
    fn var(&self) -> &'static str {
        match self {
            Rule::Base { var, .. }
            | Rule::PerInstance { var, .. }
            | Rule::LtVarOrZero { var, .. } => var,
        }
    }
}

/// How the sweep obtains a witness for each finite prefix.
#[derive(Clone)]
pub enum WitnessKind {
    /// The decision procedure searches for one.
    Propositional,
    /// Scenario-supplied structure builder for first-order prefixes.
    Builder(fn(u64) -> Structure),
}

/// Expected outcome of the full (infinite) theory.
#[derive(Debug, Clone)]
pub enum Expected {
    /// Finitely satisfiable, full theory unsatisfiable.
    FinSatUnsat,
    /// The full theory is satisfiable but forces `var` to `value`; hence it
    /// entails `goal` while no finite prefix does.
    ForcedEntailmentGap {
        var: &'static str,
        value: Value,
        goal: &'static str,
    },
    /// Finite theory: entailment of `goal` holds and all models pin `var`.
    EntailmentOnly {
        var: &'static str,
        pinned: Value,
        goal: &'static str,
    },
    /// Every prefix m entails `(form(m))-bar -> goal` but never `goal`.
    ApproxLadder {
        form: ClosedForm,
        goal: &'static str,
    },
}

/// A named compactness scenario.
#[derive(Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    pub set: GoedelSet,
    pub signature: Signature,
    pub theory: Theory,
    /// Tracked value variables: name plus the formula whose value it is.
    pub tracked: Vec<(&'static str, &'static str)>,
    pub rules: Vec<Rule>,
    pub expected: Expected,
    pub witness: WitnessKind,
}

impl Scenario {
    fn tracked_values(
        &self,
        m: &Structure,
    ) -> Result<BTreeMap<&'static str, Value>, LabError> {
        let env = Environment::new();
        let mut out = BTreeMap::new();
        for (name, text) in &self.tracked {
            let f = parse_formula(text, &self.signature)?;
            out.insert(*name, semantics::eval_formula(m, &f, &env)?);
        }
        Ok(out)
    }
}

fn v(p: i64, q: i64) -> Value {
    Value::frac(p, q)
}

fn form(text: &str) -> ClosedForm {
    ClosedForm::parse(text).expect("scenario closed form")
}

fn ex_2_1() -> Scenario {
    let constants = ConstantFamily::finite(vec![v(1, 2)]).unwrap();
    let signature = Signature::propositional(&["rho"], constants, false);
    let theory = parse_theory("~~rho -> #1/2\n", &signature).unwrap();
    Scenario {
        name: "EX_2_1",
        description: "strong-completeness gap: the theory semantically entails ~rho \
                      (every model pins rho = 1) though no proof of ~rho exists",
        set: GoedelSet::Full01,
        signature,
        theory,
        tracked: vec![("rho", "rho")],
        rules: vec![Rule::Base {
            var: "rho",
            set: ConstraintSet::point(Value::one()),
            note: "~~rho -> #1/2 is 0 iff ~~rho >= 1/2; ~~rho is 1 iff rho = 1, else 0",
        }],
        expected: Expected::EntailmentOnly {
            var: "rho",
            pinned: Value::one(),
            goal: "~rho",
        },
        witness: WitnessKind::Propositional,
    }
}

fn ex_3_1_inc() -> Scenario {
    // a = 1/2 with r_i = 1/2 - 1/(i+2) increasing to a
    let constants = ConstantFamily::sequence(vec![v(1, 2)], vec![form("1/2-1/(n+2)")]).unwrap();
    let signature = Signature::propositional(&["rho"], constants, false);
    let theory = parse_theory(
        "#1/2 => rho\nfamily n: rho -> #(1/2-1/(n+2))\n",
        &signature,
    )
    .unwrap();
    Scenario {
        name: "EX_3_1_INC",
        description: "a = 1/2 is a limit of increasing constants r_i; \
                      {a => rho} ∪ {rho -> r_i} is finitely satisfiable, not satisfiable",
        set: GoedelSet::Full01,
        signature,
        theory,
        tracked: vec![("rho", "rho")],
        rules: vec![
            Rule::Base {
                var: "rho",
                set: ConstraintSet::below(v(1, 2)),
                note: "#1/2 => rho is 0 iff 1/2 > rho > 0 or rho = 0, i.e. rho < 1/2",
            },
            Rule::PerInstance {
                var: "rho",
                rel: Rel::Ge,
                form: form("1/2-1/(n+2)"),
                note: "rho -> r_n is 0 iff rho >= r_n; all n force rho >= sup r_n = 1/2",
            },
        ],
        expected: Expected::FinSatUnsat,
        witness: WitnessKind::Propositional,
    }
}

fn ex_3_1_dec() -> Scenario {
    // a = 1/2 with r_i = 1/2 + 1/(i+2) decreasing to a
    let constants = ConstantFamily::sequence(vec![v(1, 2)], vec![form("1/2+1/(n+2)")]).unwrap();
    let signature = Signature::propositional(&["rho"], constants, false);
    let theory = parse_theory(
        "rho => #1/2\nfamily n: #(1/2+1/(n+2)) -> rho\n",
        &signature,
    )
    .unwrap();
    Scenario {
        name: "EX_3_1_DEC",
        description: "a = 1/2 is a limit of decreasing constants r_i; \
                      {rho => a} ∪ {r_i -> rho} is finitely satisfiable, not satisfiable",
        set: GoedelSet::Full01,
        signature,
        theory,
        tracked: vec![("rho", "rho")],
        rules: vec![
            Rule::Base {
                var: "rho",
                set: ConstraintSet::above(v(1, 2)),
                note: "rho => #1/2 is 0 iff rho > 1/2 (the constant is nonzero)",
            },
            Rule::PerInstance {
                var: "rho",
                rel: Rel::Le,
                form: form("1/2+1/(n+2)"),
                note: "r_n -> rho is 0 iff r_n >= rho; all n force rho <= inf r_n = 1/2",
            },
        ],
        expected: Expected::FinSatUnsat,
        witness: WitnessKind::Propositional,
    }
}

fn ex_3_2_builder(m: u64) -> Structure {
    // universe e1..e(m+1) with R(e_j) = 1/2 - 1/(j+2); rho = r_m
    let r = form("1/2-1/(n+2)");
    let size = (m + 1) as usize;
    let elements: Vec<String> = (1..=size).map(|j| format!("e{j}")).collect();
    let data: Vec<Value> = (1..=size as u64).map(|j| r.eval(j)).collect();
    let mut preds = BTreeMap::new();
    preds.insert("R".to_string(), ValueTable { arity: 1, data });
    preds.insert(
        "rho".to_string(),
        ValueTable {
            arity: 0,
            data: vec![r.eval(m)],
        },
    );
    Structure {
        elements,
        preds,
        funcs: BTreeMap::new(),
        consts: BTreeMap::new(),
        delta_enabled: false,
    }
}

fn ex_3_2() -> Scenario {
    // a = 1/2 is a two-sided limit of constants but not itself a constant
    let constants = ConstantFamily::sequence(
        Vec::new(),
        vec![form("1/2-1/(n+2)"), form("1/2+1/(n+2)")],
    )
    .unwrap();
    let signature = Signature::propositional(&["rho"], constants, false)
        .with_pred("R", 1)
        .unwrap();
    let theory = parse_theory(
        "(forall x. R(x)) => rho\n\
         family n: exists x. (#(1/2-1/(n+3)) -> R(x)) & (R(x) -> #(1/2-1/(n+2)))\n\
         family n: #(1/2+1/(n+2)) => (forall x. R(x))\n\
         family n: rho -> #(1/2-1/(n+2))\n",
        &signature,
    )
    .unwrap();
    Scenario {
        name: "EX_3_2",
        description: "the supremum of R is squeezed onto a = 1/2 from both sides, \
                      leaving no value for rho",
        set: GoedelSet::Full01,
        signature,
        theory,
        tracked: vec![("v", "forall x. R(x)"), ("rho", "rho")],
        rules: vec![
            Rule::PerInstance {
                var: "v",
                rel: Rel::Ge,
                form: form("1/2-1/(n+2)"),
                note: "exists x (r_{n+1} -> R(x)) & (R(x) -> r_n) demands a witness with \
                       r_n <= R(x) <= r_{n+1}, so v = sup R >= r_n",
            },
            Rule::PerInstance {
                var: "v",
                rel: Rel::Lt,
                form: form("1/2+1/(n+2)"),
                note: "s_n => (forall x R(x)) is 0 iff s_n > v > 0 or v = 0, i.e. v < s_n; \
                       all n force v <= inf s_n = 1/2",
            },
            Rule::LtVarOrZero {
                var: "rho",
                other: "v",
                note: "(forall x R(x)) => rho is 0 iff v > rho > 0 or rho = 0",
            },
            Rule::PerInstance {
                var: "rho",
                rel: Rel::Ge,
                form: form("1/2-1/(n+2)"),
                note: "rho -> r_n is 0 iff rho >= r_n; all n force rho >= 1/2",
            },
        ],
        expected: Expected::FinSatUnsat,
        witness: WitnessKind::Builder(ex_3_2_builder),
    }
}

fn ex_entail_fail() -> Scenario {
    let constants = ConstantFamily::DownwardA;
    let signature = Signature::propositional(&["rho"], constants, false);
    let theory = parse_theory("family n: #(1/(n)) -> rho\n", &signature).unwrap();
    Scenario {
        name: "EX_ENTAIL_FAIL",
        description: "{(1/n)-bar -> rho} forces rho = 0 in the limit, so the full theory \
                      entails rho while no finite prefix does",
        set: GoedelSet::Full01,
        signature,
        theory,
        tracked: vec![("rho", "rho")],
        rules: vec![Rule::PerInstance {
            var: "rho",
            rel: Rel::Le,
            form: form("1/(n)"),
            note: "(1/n)-bar -> rho is 0 iff 1/n >= rho; all n force rho <= inf 1/n = 0",
        }],
        expected: Expected::ForcedEntailmentGap {
            var: "rho",
            value: Value::zero(),
            goal: "rho",
        },
        witness: WitnessKind::Propositional,
    }
}

fn ex_delta() -> Scenario {
    let constants = ConstantFamily::DownwardA;
    let signature = Signature::propositional(&["rho"], constants, true);
    let theory = parse_theory(
        "~delta(rho)\nfamily n: #(1/(n)) -> rho\n",
        &signature,
    )
    .unwrap();
    Scenario {
        name: "EX_DELTA",
        description: "with the projection connective, rho must be positive yet below \
                      every 1/n: finitely satisfiable but not satisfiable",
        set: GoedelSet::Full01,
        signature,
        theory,
        tracked: vec![("rho", "rho")],
        rules: vec![
            Rule::Base {
                var: "rho",
                set: ConstraintSet::nonzero(),
                note: "~delta(rho) is 0 iff delta(rho) = 1 iff rho > 0",
            },
            Rule::PerInstance {
                var: "rho",
                rel: Rel::Le,
                form: form("1/(n)"),
                note: "(1/n)-bar -> rho is 0 iff rho <= 1/n; all n force rho <= inf 1/n = 0",
            },
        ],
        expected: Expected::FinSatUnsat,
        witness: WitnessKind::Propositional,
    }
}

fn ex_approx() -> Scenario {
    let constants = ConstantFamily::DownwardA;
    let signature = Signature::propositional(&["rho"], constants, false);
    let theory = parse_theory("family n: #(1/(n)) -> rho\n", &signature).unwrap();
    Scenario {
        name: "EX_APPROX",
        description: "approximate entailment: every prefix m entails (1/m)-bar -> rho \
                      though no prefix entails rho itself",
        set: GoedelSet::Full01,
        signature,
        theory,
        tracked: vec![("rho", "rho")],
        rules: vec![Rule::PerInstance {
            var: "rho",
            rel: Rel::Le,
            form: form("1/(n)"),
            note: "(1/n)-bar -> rho is 0 iff rho <= 1/n",
        }],
        expected: Expected::ApproxLadder {
            form: form("1/(n)"),
            goal: "rho",
        },
        witness: WitnessKind::Propositional,
    }
}

/// The built-in scenarios.
pub fn scenario_catalog() -> Vec<Scenario> {
    vec![
        ex_2_1(),
        ex_3_1_inc(),
        ex_3_1_dec(),
        ex_3_2(),
        ex_entail_fail(),
        ex_delta(),
        ex_approx(),
    ]
}

pub fn find_scenario(name: &str) -> Result<Scenario, LabError> {
    scenario_catalog()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| LabError::UnknownScenario(name.to_string()))
}

/// One prefix of a sweep: the instantiation parameter, the witness values of
/// the tracked variables, and the verified witness structure.
#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub m: u64,
    pub tracked: BTreeMap<&'static str, Value>,
    pub witness: Structure,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub scenario: String,
    pub entries: Vec<SweepEntry>,
}

impl fmt::Display for SweepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            write!(f, "m={}: SAT;", e.m)?;
            for (name, value) in &e.tracked {
                write!(f, " {name} = {value}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Instantiates every prefix `m <= k`, produces a concrete model for each and
/// re-checks it under the semantics module.
pub fn finite_sat_sweep(s: &Scenario, k: u64) -> Result<SweepReport, LabError> {
    let config = DecideConfig::default();
    let mut entries = Vec::with_capacity(k as usize);
    for m in 1..=k {
        let sentences = s.theory.instantiate(m, &s.signature)?;
        let witness = match &s.witness {
            WitnessKind::Propositional => {
                match decide::sat(&sentences, &s.set, &s.signature.constants, &config)? {
                    Verdict::Sat(assignment) => {
                        Structure::propositional(&assignment, s.signature.delta_enabled)
                    }
                    _ => {
                        return Err(LabError::PrefixUnsat {
                            scenario: s.name.to_string(),
                            m,
                        })
                    }
                }
            }
            WitnessKind::Builder(build) => build(m),
        };
        match semantics::models(&witness, &sentences)? {
            semantics::ModelCheck::Models => {}
            semantics::ModelCheck::Fails { sentence, value } => {
                return Err(LabError::WitnessRejected {
                    m,
                    detail: format!("`{sentence}` has value {value}"),
                })
            }
        }
        let tracked = s.tracked_values(&witness)?;
        entries.push(SweepEntry {
            m,
            tracked,
            witness,
        });
    }
    Ok(SweepReport {
        scenario: s.name.to_string(),
        entries,
    })
}

/// Feasible sets after only the first `m` instances of every rule (relational
/// rules between tracked variables are checked directly on witnesses instead).
pub fn feasible_after_prefix(s: &Scenario, m: u64) -> BTreeMap<&'static str, ConstraintSet> {
    let mut feasible: BTreeMap<&'static str, ConstraintSet> = s
        .tracked
        .iter()
        .map(|(name, _)| (*name, ConstraintSet::full()))
        .collect();
    for rule in &s.rules {
        match rule {
            Rule::Base { var, set, .. } => {
                let cur = feasible[var].intersect(set);
                feasible.insert(var, cur);
            }
            Rule::PerInstance { var, rel, form, .. } => {
                let cur = feasible[var].intersect(&prefix_constraint(*rel, form, m));
                feasible.insert(var, cur);
            }
            Rule::LtVarOrZero { .. } => {}
        }
    }
    feasible
}

#[derive(Debug, Clone)]
pub struct UnsatReport {
    pub scenario: String,
    pub trace: Vec<String>,
    pub feasible: BTreeMap<&'static str, ConstraintSet>,
    pub outcome: BTreeMap<&'static str, Solutions>,
}

impl fmt::Display for UnsatReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.trace {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Applies every rule's full-theory (limit) constraint in order and decides
/// emptiness of the surviving feasible sets against the Goedel set.
pub fn full_unsat(s: &Scenario) -> Result<UnsatReport, LabError> {
    let mut feasible: BTreeMap<&'static str, ConstraintSet> = s
        .tracked
        .iter()
        .map(|(name, _)| (*name, ConstraintSet::full()))
        .collect();
    let mut trace = Vec::new();
    for rule in &s.rules {
        let var = rule.var();
        if !feasible.contains_key(var) {
            return Err(LabError::Expectation(format!(
                "rule mentions untracked variable {var}"
            )));
        }
        let (update, desc, note) = match rule {
            Rule::Base { set, note, .. } => (set.clone(), format!("{var} ∈ {set}"), note),
            Rule::PerInstance {
                rel, form, note, ..
            } => {
                let set = limit_constraint(*rel, form);
                (
                    set.clone(),
                    format!("{var} {} {form} for all n, hence {var} ∈ {set}", rel.symbol()),
                    note,
                )
            }
            Rule::LtVarOrZero { other, note, .. } => {
                let forced = match feasible[other].solutions_in(&s.set)? {
                    Solutions::Point(p) => p,
                    _ => {
                        return Err(LabError::RuleNeedsForcedVar {
                            var: var.to_string(),
                            other: other.to_string(),
                        })
                    }
                };
                let set = ConstraintSet::below(forced.clone());
                (
                    set.clone(),
                    format!("{var} < {other} = {forced} or {var} = 0, hence {var} ∈ {set}"),
                    note,
                )
            }
        };
        let next = feasible[var].intersect(&update);
        trace.push(format!(
            "constraint: {desc}\n  ({note})\n  surviving feasible set for {var}: {next}"
        ));
        feasible.insert(var, next);
    }
    let mut outcome = BTreeMap::new();
    for (name, set) in &feasible {
        let sols = set.solutions_in(&s.set)?;
        let line = match &sols {
            Solutions::Empty => format!("{name}: feasible set empty in the Goedel set"),
            Solutions::Point(p) => format!("{name}: forced to the single value {p}"),
            Solutions::Many => format!("{name}: feasible set {set} keeps several values"),
        };
        trace.push(line);
        outcome.insert(*name, sols);
    }
    Ok(UnsatReport {
        scenario: s.name.to_string(),
        trace,
        feasible,
        outcome,
    })
}

/// Full scenario run: sweep, limit analysis, and the expected-verdict checks.
#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub scenario: String,
    pub lines: Vec<String>,
    pub verdict: String,
    pub pass: bool,
}

impl fmt::Display for ScenarioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        writeln!(f, "VERDICT: {}", self.verdict)
    }
}

pub fn run_scenario(s: &Scenario, k: u64) -> Result<ScenarioReport, LabError> {
    let config = DecideConfig::default();
    let mut lines = Vec::new();
    lines.push(format!("scenario {}: {}", s.name, s.description));
    let sweep = finite_sat_sweep(s, k)?;
    for e in &sweep.entries {
        let tracked: Vec<String> = e
            .tracked
            .iter()
            .map(|(n, v)| format!("{n} = {v}"))
            .collect();
        lines.push(format!("m={}: SAT; {}", e.m, tracked.join(", ")));
    }
    let unsat = full_unsat(s)?;
    lines.extend(unsat.trace.iter().cloned());

    let (verdict, pass) = match &s.expected {
        Expected::FinSatUnsat => {
            let empty = s
                .tracked
                .iter()
                .any(|(name, _)| unsat.outcome[name] == Solutions::Empty);
            (
                "FINITELY-SAT ∧ UNSAT".to_string(),
                empty && sweep.entries.len() == k as usize,
            )
        }
        Expected::ForcedEntailmentGap { var, value, goal } => {
            let forced = unsat.outcome[var] == Solutions::Point(value.clone());
            let goal_f = parse_formula(goal, &s.signature)?;
            // no finite prefix entails the goal
            let mut prefixes_fail = true;
            for m in 1..=k {
                let sentences = s.theory.instantiate(m, &s.signature)?;
                let verdict =
                    decide::entails(&sentences, &goal_f, &s.set, &s.signature.constants, &config)?;
                if verdict.is_positive() {
                    prefixes_fail = false;
                    lines.push(format!("prefix m={m} unexpectedly entails {goal}"));
                }
            }
            lines.push(format!(
                "full theory forces {var} = {value}, so it entails {goal}; \
                 no prefix up to {k} does"
            ));
            (
                format!("FINITELY-SAT ∧ FORCED {var} = {value} ∧ ENTAILS {goal} ∧ NO FINITE SUBSET ENTAILS {goal}"),
                forced && prefixes_fail && sweep.entries.len() == k as usize,
            )
        }
        Expected::EntailmentOnly { var, pinned, goal } => {
            let goal_f = parse_formula(goal, &s.signature)?;
            let sentences = s.theory.instantiate(1, &s.signature)?;
            let entailed =
                decide::entails(&sentences, &goal_f, &s.set, &s.signature.constants, &config)?
                    .is_positive();
            let forced = unsat.outcome[var] == Solutions::Point(pinned.clone());
            lines.push(format!(
                "theory entails {goal}: {entailed}; models pin {var} = {pinned}: {forced}"
            ));
            (
                format!("SAT ∧ MODELS PIN {var} = {pinned} ∧ ENTAILS {goal}"),
                entailed && forced,
            )
        }
        Expected::ApproxLadder { form, goal } => {
            let goal_f = parse_formula(goal, &s.signature)?;
            let mut ok = true;
            for m in 1..=k {
                let sentences = s.theory.instantiate(m, &s.signature)?;
                let guard = Formula::to(Formula::TruthConst(form.eval(m)), goal_f.clone());
                let approx =
                    decide::entails(&sentences, &guard, &s.set, &s.signature.constants, &config)?
                        .is_positive();
                let direct =
                    decide::entails(&sentences, &goal_f, &s.set, &s.signature.constants, &config)?
                        .is_positive();
                if !approx || direct {
                    ok = false;
                    lines.push(format!(
                        "m={m}: approx entailed = {approx}, direct entailed = {direct}"
                    ));
                }
            }
            lines.push(format!(
                "every prefix m <= {k} entails ({form} at n=m)-bar -> {goal}, never {goal} itself"
            ));
            ("APPROX-ENTAILMENT LADDER HOLDS".to_string(), ok)
        }
    };
    Ok(ScenarioReport {
        scenario: s.name.to_string(),
        lines,
        verdict,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_value() -> impl Strategy<Value = Value> {
        (0i64..=12, 1i64..=12).prop_map(|(p, q)| {
            let (p, q) = if p > q { (q, p) } else { (p, q) };
            Value::frac(p, q.max(1))
        })
    }

    fn arb_constraint() -> impl Strategy<Value = ConstraintSet> {
        prop_oneof![
            arb_value().prop_map(ConstraintSet::at_most),
            arb_value().prop_map(ConstraintSet::below),
            arb_value().prop_map(ConstraintSet::at_least),
            arb_value().prop_map(ConstraintSet::above),
            arb_value().prop_map(ConstraintSet::point),
            Just(ConstraintSet::full()),
            Just(ConstraintSet::nonzero()),
        ]
    }

    proptest! {
        #[test]
        fn intersection_is_pointwise_conjunction(
            a in arb_constraint(),
            b in arb_constraint(),
            c in arb_constraint(),
            probe in proptest::collection::vec(arb_value(), 8)
        ) {
            let ab = a.intersect(&b);
            let abc = ab.intersect(&c);
            for v in probe {
                prop_assert_eq!(ab.contains(&v), a.contains(&v) && b.contains(&v));
                prop_assert_eq!(
                    abc.contains(&v),
                    a.contains(&v) && b.contains(&v) && c.contains(&v)
                );
            }
            // emptiness against the full interval agrees with a point probe
            if abc.solutions_in(&GoedelSet::Full01).unwrap() == Solutions::Empty {
                for denom in 1..=16i64 {
                    for numer in 0..=denom {
                        prop_assert!(!abc.contains(&Value::frac(numer, denom)));
                    }
                }
            }
        }
    }

    #[test]
    fn constraint_set_algebra() {
        let a = ConstraintSet::below(v(1, 2)); // {0} ∪ (0, 1/2)
        assert!(a.or_zero);
        assert!(a.contains(&Value::zero()));
        assert!(a.contains(&v(1, 4)));
        assert!(!a.contains(&v(1, 2)));
        let b = ConstraintSet::at_least(v(1, 2));
        assert_eq!(
            a.intersect(&b).solutions_in(&GoedelSet::Full01).unwrap(),
            Solutions::Empty
        );
        let c = ConstraintSet::at_most(v(1, 2)).intersect(&ConstraintSet::at_least(v(1, 2)));
        assert_eq!(
            c.solutions_in(&GoedelSet::Full01).unwrap(),
            Solutions::Point(v(1, 2))
        );
        // nonzero ∩ at_most(0) is empty
        let d = ConstraintSet::nonzero().intersect(&ConstraintSet::at_most(Value::zero()));
        assert_eq!(d.solutions_in(&GoedelSet::Full01).unwrap(), Solutions::Empty);
        // at_most(0) alone forces 0
        assert_eq!(
            ConstraintSet::at_most(Value::zero())
                .solutions_in(&GoedelSet::Full01)
                .unwrap(),
            Solutions::Point(Value::zero())
        );
        // membership respects the Goedel set: (1/3, 1/2) has no downward member
        let e = ConstraintSet::above(v(1, 3)).intersect(&ConstraintSet::below(v(1, 2)));
        assert_eq!(e.solutions_in(&GoedelSet::Downward).unwrap(), Solutions::Empty);
    }

    #[test]
    fn limit_constraints_follow_monotonicity() {
        let dec = form("1/2+1/(n+2)");
        let inc = form("1/2-1/(n+2)");
        // x <= dec(n) for all n: [0, 1/2]
        let s = limit_constraint(Rel::Le, &dec);
        assert!(s.contains(&v(1, 2)) && !s.contains(&v(51, 100)));
        // x >= inc(n) for all n: [1/2, 1]
        let s = limit_constraint(Rel::Ge, &inc);
        assert!(s.contains(&v(1, 2)) && !s.contains(&v(49, 100)));
        // x < dec(n) for all n still admits 1/2 (every dec(n) > 1/2)
        let s = limit_constraint(Rel::Lt, &dec);
        assert!(s.contains(&v(1, 2)));
        // x <= inc(n) for all n is bound by the first instance
        let s = limit_constraint(Rel::Le, &inc);
        assert!(s.contains(&inc.eval(1)) && !s.contains(&v(1, 2)));
        // prefixes
        let p = prefix_constraint(Rel::Le, &form("1/(n)"), 5);
        assert!(p.contains(&v(1, 5)) && !p.contains(&v(1, 4)));
    }

    #[test]
    fn catalog_contents() {
        let cat = scenario_catalog();
        assert!(cat.len() >= 6);
        for s in &cat {
            assert_eq!(find_scenario(s.name).unwrap().name, s.name);
        }
        let ex32 = find_scenario("EX_3_2").unwrap();
        let tracked: Vec<&str> = ex32.tracked.iter().map(|(n, _)| *n).collect();
        assert_eq!(tracked, vec!["v", "rho"]);
        assert!(find_scenario("NOPE").is_err());
    }

    #[test]
    fn sweep_witness_values() {
        // {(1/n)-bar -> rho} with k=5: constraint is rho <= 1/5 at m=5
        let s = find_scenario("EX_ENTAIL_FAIL").unwrap();
        let sweep = finite_sat_sweep(&s, 5).unwrap();
        assert_eq!(sweep.entries.len(), 5);
        for e in &sweep.entries {
            let rho = &e.tracked["rho"];
            assert!(*rho <= form("1/(n)").eval(e.m), "m={} rho={rho}", e.m);
        }

        // EX_3_1_INC at m=3: witness must be in [r_3, 1/2) = [3/10, 1/2)
        let s = find_scenario("EX_3_1_INC").unwrap();
        let sweep = finite_sat_sweep(&s, 3).unwrap();
        let rho = &sweep.entries[2].tracked["rho"];
        assert!(*rho >= v(3, 10) && *rho < v(1, 2), "rho = {rho}");

        // EX_DELTA at m=4: witness in (0, 1/4]
        let s = find_scenario("EX_DELTA").unwrap();
        let sweep = finite_sat_sweep(&s, 4).unwrap();
        let rho = &sweep.entries[3].tracked["rho"];
        assert!(!rho.is_zero() && *rho <= v(1, 4), "rho = {rho}");

        // EX_3_2 via its builder: v = r_{m+1}, rho = r_m
        let s = find_scenario("EX_3_2").unwrap();
        let sweep = finite_sat_sweep(&s, 3).unwrap();
        let e = &sweep.entries[2];
        assert_eq!(e.tracked["v"], form("1/2-1/(n+2)").eval(4));
        assert_eq!(e.tracked["rho"], v(3, 10));
    }

    #[test]
    fn full_unsat_outcomes() {
        let s = find_scenario("EX_ENTAIL_FAIL").unwrap();
        let r = full_unsat(&s).unwrap();
        assert_eq!(r.outcome["rho"], Solutions::Point(Value::zero()));

        for name in ["EX_3_1_INC", "EX_3_1_DEC", "EX_3_2", "EX_DELTA"] {
            let s = find_scenario(name).unwrap();
            let r = full_unsat(&s).unwrap();
            assert!(
                s.tracked
                    .iter()
                    .any(|(n, _)| r.outcome[n] == Solutions::Empty),
                "{name}: {:?}",
                r.outcome
            );
        }

        let s = find_scenario("EX_2_1").unwrap();
        let r = full_unsat(&s).unwrap();
        assert_eq!(r.outcome["rho"], Solutions::Point(Value::one()));
    }

    #[test]
    fn scenario_runs_pass() {
        for s in scenario_catalog() {
            let report = run_scenario(&s, 6).unwrap();
            assert!(report.pass, "{}:\n{report}", s.name);
        }
    }

    #[test]
    fn prefix_feasible_contains_witness() {
        for s in scenario_catalog() {
            let sweep = finite_sat_sweep(&s, 8).unwrap();
            for e in &sweep.entries {
                let feasible = feasible_after_prefix(&s, e.m);
                for (name, value) in &e.tracked {
                    assert!(
                        feasible[name].contains(value),
                        "{}: m={} {name}={value} outside {}",
                        s.name,
                        e.m,
                        feasible[name]
                    );
                }
                // relational rules hold on the witness directly
                for rule in &s.rules {
                    if let Rule::LtVarOrZero { var, other, .. } = rule {
                        let x = &e.tracked[var];
                        let y = &e.tracked[other];
                        assert!(x.is_zero() || x < y, "{}: m={} {var}={x} vs {other}={y}", s.name, e.m);
                    }
                }
            }
        }
    }
}
