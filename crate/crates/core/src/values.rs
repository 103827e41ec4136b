//! Exact truth-value arithmetic over Goedel sets.
//!
//! The whole crate works in the reverse-valued convention: `0` is absolute
//! truth and `1` is absolute falsity. Conjunction is therefore `max`,
//! disjunction is `min`, and the residuum sends `x -> y` to `0` when
//! `x >= y` and to `y` otherwise. Everything is exact rational arithmetic;
//! there is no floating point anywhere in the core logic.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValueError {
    #[error("value {0} is outside [0,1]")]
    OutOfRange(String),
    #[error("{op} expects {expected} arguments, got {got}")]
    ArityMismatch {
        op: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("gap requires a < b, got {0} >= {1}")]
    GapOrder(Value, Value),
    #[error("cannot parse value from `{0}`")]
    Parse(String),
    #[error("invalid descriptor: {0}")]
    Descriptor(String),
}

/// An exact rational truth value in `[0,1]`. `0` is absolute truth.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value(BigRational);

impl Value {
    pub fn zero() -> Self {
        Value(BigRational::zero())
    }

    pub fn one() -> Self {
        Value(BigRational::one())
    }

    pub fn from_ratio(r: BigRational) -> Result<Self, ValueError> {
        if r < BigRational::zero() || r > BigRational::one() {
            return Err(ValueError::OutOfRange(r.to_string()));
        }
        Ok(Value(r))
    }

    /// Convenience constructor for literal fractions; panics outside `[0,1]`.
    pub fn frac(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        Value::from_ratio(BigRational::new(BigInt::from(p), BigInt::from(q)))
            .expect("fraction outside [0,1]")
    }

    pub fn ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Value {
    type Err = ValueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let ratio = match s.split_once('/') {
            Some((p, q)) => {
                let p = BigInt::from_str(p.trim()).map_err(|_| ValueError::Parse(s.into()))?;
                let q = BigInt::from_str(q.trim()).map_err(|_| ValueError::Parse(s.into()))?;
                if q.is_zero() {
                    return Err(ValueError::Parse(s.into()));
                }
                BigRational::new(p, q)
            }
            None => {
                let p = BigInt::from_str(s).map_err(|_| ValueError::Parse(s.into()))?;
                BigRational::from_integer(p)
            }
        };
        Value::from_ratio(ratio)
    }
}

/// Residuum: `0` when `x >= y`, else `y`.
pub fn resid(x: &Value, y: &Value) -> Value {
    if x >= y {
        Value::zero()
    } else {
        y.clone()
    }
}

/// `d_max(x, y)`: `0` when equal, otherwise the larger of the two.
pub fn dmax(x: &Value, y: &Value) -> Value {
    if x == y {
        Value::zero()
    } else {
        std::cmp::max(x, y).clone()
    }
}

/// Reverse-valued conjunction.
pub fn and(x: &Value, y: &Value) -> Value {
    std::cmp::max(x, y).clone()
}

/// Reverse-valued disjunction.
pub fn or(x: &Value, y: &Value) -> Value {
    std::cmp::min(x, y).clone()
}

/// Negation `x -> bot`: `0` when `x = 1`, else `1`.
pub fn neg(x: &Value) -> Value {
    if x.is_one() {
        Value::zero()
    } else {
        Value::one()
    }
}

/// Strong implication `(y -> x) -> y`.
///
/// The published truth table omits the case `y = 0 < x`; the value there
/// follows from the defining abbreviation and is `0`.
pub fn strongimp(x: &Value, y: &Value) -> Value {
    resid(&resid(y, x), y)
}

/// Baaz projection: `0` iff the argument is `0`, else `1`.
pub fn delta(x: &Value) -> Value {
    if x.is_zero() {
        Value::zero()
    } else {
        Value::one()
    }
}

/// Named connectives for the generic entry point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connective {
    And,
    Or,
    Neg,
    /// The implication itself.
    Resid,
    StrongImp,
    Equiv,
    Delta,
}

impl Connective {
    pub fn arity(self) -> usize {
        match self {
            Connective::Neg | Connective::Delta => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Connective::And => "and",
            Connective::Or => "or",
            Connective::Neg => "neg",
            Connective::Resid => "resid",
            Connective::StrongImp => "strongimp",
            Connective::Equiv => "equiv",
            Connective::Delta => "delta",
        }
    }
}

/// Applies a connective to its arguments, checking arity.
pub fn connective(op: Connective, args: &[Value]) -> Result<Value, ValueError> {
    if args.len() != op.arity() {
        return Err(ValueError::ArityMismatch {
            op: op.name(),
            expected: op.arity(),
            got: args.len(),
        });
    }
    Ok(match op {
        Connective::And => and(&args[0], &args[1]),
        Connective::Or => or(&args[0], &args[1]),
        Connective::Neg => neg(&args[0]),
        Connective::Resid => resid(&args[0], &args[1]),
        Connective::StrongImp => strongimp(&args[0], &args[1]),
        Connective::Equiv => dmax(&args[0], &args[1]),
        Connective::Delta => delta(&args[0]),
    })
}

/// Closed form `c + s/(n+k)` over the integer parameter `n >= 1`.
///
/// Used for the monotone families of sequence-style Goedel sets and constant
/// families, for parametric theory schemas, and for symbolic value families
/// in the ultraproduct machinery.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClosedForm {
    pub c: BigRational,
    pub s: BigRational,
    pub k: BigRational,
}

impl ClosedForm {
    pub fn new(c: BigRational, s: BigRational, k: BigRational) -> Result<Self, ValueError> {
        let form = ClosedForm { c, s, k };
        if BigRational::one() + &form.k <= BigRational::zero() {
            return Err(ValueError::Descriptor(format!(
                "closed form denominator n+{} is not positive at n=1",
                form.k
            )));
        }
        // Extremes over n >= 1 are at n = 1 and at the limit.
        for probe in [form.eval_ratio(1), form.c.clone()] {
            if probe < BigRational::zero() || probe > BigRational::one() {
                return Err(ValueError::OutOfRange(probe.to_string()));
            }
        }
        Ok(form)
    }

    pub fn constant(v: &Value) -> Self {
        ClosedForm {
            c: v.ratio().clone(),
            s: BigRational::zero(),
            k: BigRational::zero(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.s.is_zero()
    }

    /// `s > 0`: values strictly decrease towards the limit.
    pub fn is_decreasing(&self) -> bool {
        self.s.is_positive()
    }

    fn eval_ratio(&self, n: u64) -> BigRational {
        if self.s.is_zero() {
            return self.c.clone();
        }
        &self.c + &self.s / (BigRational::from_integer(BigInt::from(n)) + &self.k)
    }

    pub fn eval(&self, n: u64) -> Value {
        Value::from_ratio(self.eval_ratio(n)).expect("closed form validated on construction")
    }

    pub fn limit(&self) -> Value {
        Value::from_ratio(self.c.clone()).expect("closed form validated on construction")
    }

    /// The unique `n >= 1` with `eval(n) = x`, if any.
    pub fn solve(&self, x: &Value) -> Option<u64> {
        if self.s.is_zero() {
            return None; // constant forms are matched by direct comparison
        }
        let diff = x.ratio() - &self.c;
        if diff.is_zero() {
            return None;
        }
        let n = &self.s / diff - &self.k;
        if !n.is_integer() || n < BigRational::one() {
            return None;
        }
        let n: u64 = n.to_integer().try_into().ok()?;
        (self.eval_ratio(n) == *x.ratio()).then_some(n)
    }

    /// Parses `c+s/(n+k)`, `c-s/(n+k)`, `s/(n+k)`, `s/(n)`, or a bare fraction.
    pub fn parse(text: &str) -> Result<Self, ValueError> {
        let t: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0usize;
        let err = |msg: &str| ValueError::Descriptor(format!("closed form `{text}`: {msg}"));

        fn parse_frac(t: &[char], pos: &mut usize) -> Option<BigRational> {
            let start = *pos;
            while *pos < t.len() && t[*pos].is_ascii_digit() {
                *pos += 1;
            }
            if *pos == start {
                return None;
            }
            let numer: String = t[start..*pos].iter().collect();
            let numer = BigInt::from_str(&numer).ok()?;
            // Only consume `/` when digits follow: `1/(n+2)` keeps its slash.
            if *pos + 1 < t.len() && t[*pos] == '/' && t[*pos + 1].is_ascii_digit() {
                *pos += 1;
                let dstart = *pos;
                while *pos < t.len() && t[*pos].is_ascii_digit() {
                    *pos += 1;
                }
                let denom: String = t[dstart..*pos].iter().collect();
                let denom = BigInt::from_str(&denom).ok()?;
                if denom.is_zero() {
                    return None;
                }
                Some(BigRational::new(numer, denom))
            } else {
                Some(BigRational::from_integer(numer))
            }
        }

        let first = parse_frac(&t, &mut pos).ok_or_else(|| err("expected a fraction"))?;
        if pos == t.len() {
            // bare constant
            return ClosedForm::new(first, BigRational::zero(), BigRational::zero());
        }

        let (c, sign, s) = if pos < t.len() && t[pos] == '/' {
            // s/(n+k) with c = 0
            (BigRational::zero(), BigRational::one(), first)
        } else {
            let sign = match t.get(pos) {
                Some('+') => BigRational::one(),
                Some('-') => -BigRational::one(),
                _ => return Err(err("expected `+`, `-` or `/(`")),
            };
            pos += 1;
            let s = parse_frac(&t, &mut pos).ok_or_else(|| err("expected a fraction after sign"))?;
            (first, sign, s)
        };
        if pos >= t.len() || t[pos] != '/' {
            return Err(err("expected `/(n...)`"));
        }
        pos += 1;
        if pos >= t.len() || t[pos] != '(' {
            return Err(err("expected `(` after `/`"));
        }
        pos += 1;
        if pos >= t.len() || t[pos] != 'n' {
            return Err(err("expected `n` inside parentheses"));
        }
        pos += 1;
        let k = match t.get(pos) {
            Some(')') => BigRational::zero(),
            Some('+') => {
                pos += 1;
                parse_frac(&t, &mut pos).ok_or_else(|| err("expected fraction after `n+`"))?
            }
            Some('-') => {
                pos += 1;
                -parse_frac(&t, &mut pos).ok_or_else(|| err("expected fraction after `n-`"))?
            }
            _ => return Err(err("expected `)`, `+` or `-` after `n`")),
        };
        if t.get(pos) != Some(&')') {
            return Err(err("expected closing `)`"));
        }
        pos += 1;
        if pos != t.len() {
            return Err(err("trailing input"));
        }
        ClosedForm::new(c, sign * s, k)
    }
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn frac(r: &BigRational) -> String {
            if r.is_integer() {
                r.numer().to_string()
            } else {
                format!("{}/{}", r.numer(), r.denom())
            }
        }
        if self.s.is_zero() {
            return write!(f, "{}", frac(&self.c));
        }
        if !self.c.is_zero() {
            write!(f, "{}", frac(&self.c))?;
            write!(f, "{}", if self.s.is_negative() { "-" } else { "+" })?;
        } else if self.s.is_negative() {
            write!(f, "-")?;
        }
        write!(f, "{}/(n", frac(&self.s.abs()))?;
        if !self.k.is_zero() {
            if self.k.is_negative() {
                write!(f, "-{}", frac(&self.k.abs()))?;
            } else {
                write!(f, "+{}", frac(&self.k))?;
            }
        }
        write!(f, ")")
    }
}

/// Cardinality of a set slice: exact when finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capacity {
    Finite(u64),
    Infinite,
}

impl Capacity {
    pub fn at_least(&self, n: u64) -> bool {
        match self {
            Capacity::Finite(k) => *k >= n,
            Capacity::Infinite => true,
        }
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Finite(k) => write!(f, "{k}"),
            Capacity::Infinite => write!(f, "inf"),
        }
    }
}

/// Limit points of a value set within `[0,1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LimitPoints {
    Finite(BTreeSet<Value>),
    /// Every point of `[0,1]` is an accumulation point (dense sets).
    UnitInterval,
}

impl LimitPoints {
    pub fn empty() -> Self {
        LimitPoints::Finite(BTreeSet::new())
    }

    pub fn contains(&self, v: &Value) -> bool {
        match self {
            LimitPoints::Finite(s) => s.contains(v),
            LimitPoints::UnitInterval => true,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, LimitPoints::Finite(s) if s.is_empty())
    }

    /// True when the set of limit points is contained in `{0}`.
    pub fn subset_of_zero(&self) -> bool {
        match self {
            LimitPoints::Finite(s) => s.iter().all(Value::is_zero),
            LimitPoints::UnitInterval => false,
        }
    }
}

impl fmt::Display for LimitPoints {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitPoints::Finite(s) => {
                write!(f, "{{")?;
                for (i, v) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "}}")
            }
            LimitPoints::UnitInterval => write!(f, "[0,1]"),
        }
    }
}

/// Descriptor of a Goedel set: a closed subset of `[0,1]` containing 0 and 1,
/// with decidable membership, comparison and gap queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GoedelSet {
    /// All rationals of `[0,1]` (stands in for the full interval; the core is
    /// order-driven and never needs irrational points).
    Full01,
    /// An explicit finite set, sorted, containing 0 and 1.
    FiniteV(Vec<Value>),
    /// `{1/n : n >= 1} ∪ {0}`.
    Downward,
    /// A finite base set plus finitely many monotone closed-form families.
    SequenceV {
        base: Vec<Value>,
        families: Vec<ClosedForm>,
    },
}

impl GoedelSet {
    pub fn finite(mut vals: Vec<Value>) -> Result<Self, ValueError> {
        vals.sort();
        vals.dedup();
        if vals.first() != Some(&Value::zero()) || vals.last() != Some(&Value::one()) {
            return Err(ValueError::Descriptor(
                "finite Goedel set must contain 0 and 1".into(),
            ));
        }
        Ok(GoedelSet::FiniteV(vals))
    }

    pub fn sequence(mut base: Vec<Value>, families: Vec<ClosedForm>) -> Result<Self, ValueError> {
        base.sort();
        base.dedup();
        if !base.contains(&Value::zero()) || !base.contains(&Value::one()) {
            return Err(ValueError::Descriptor(
                "sequence Goedel set base must contain 0 and 1".into(),
            ));
        }
        for fam in &families {
            if fam.is_constant() {
                return Err(ValueError::Descriptor(
                    "constant closed form belongs in the base set".into(),
                ));
            }
        }
        let set = GoedelSet::SequenceV { base, families };
        // Closedness: each family's limit point must itself be a member.
        if let GoedelSet::SequenceV { families, .. } = &set {
            for fam in families {
                let lim = fam.limit();
                if !set.member(&lim) {
                    return Err(ValueError::Descriptor(format!(
                        "family {fam} has limit {lim} outside the set; add it to the base"
                    )));
                }
            }
        }
        Ok(set)
    }

    /// Decides membership.
    pub fn member(&self, x: &Value) -> bool {
        match self {
            GoedelSet::Full01 => true,
            GoedelSet::FiniteV(vals) => vals.binary_search(x).is_ok(),
            GoedelSet::Downward => {
                x.is_zero() || (x.ratio().numer().is_one() && !x.ratio().denom().is_negative())
            }
            GoedelSet::SequenceV { base, families } => {
                base.binary_search(x).is_ok() || families.iter().any(|f| f.solve(x).is_some())
            }
        }
    }

    /// `|V ∩ (a, b)|`, exact when finite.
    pub fn gap_capacity(&self, a: &Value, b: &Value) -> Result<Capacity, ValueError> {
        if a >= b {
            return Err(ValueError::GapOrder(a.clone(), b.clone()));
        }
        Ok(match self {
            GoedelSet::Full01 => Capacity::Infinite,
            GoedelSet::FiniteV(vals) => {
                Capacity::Finite(vals.iter().filter(|v| *v > a && *v < b).count() as u64)
            }
            GoedelSet::Downward => {
                if a.is_zero() {
                    Capacity::Infinite
                } else {
                    // 1/n in (a,b): n strictly between 1/b and 1/a.
                    Capacity::Finite(count_integers_strictly_between(
                        &b.ratio().recip(),
                        &a.ratio().recip(),
                    ))
                }
            }
            GoedelSet::SequenceV { base, families } => {
                for fam in families {
                    if family_gap_is_infinite(fam, a, b) {
                        return Ok(Capacity::Infinite);
                    }
                }
                let mut members: BTreeSet<Value> = base
                    .iter()
                    .filter(|v| *v > a && *v < b)
                    .cloned()
                    .collect();
                for fam in families {
                    for v in family_members_in_gap(fam, a, b) {
                        members.insert(v);
                    }
                }
                Capacity::Finite(members.len() as u64)
            }
        })
    }

    /// Enumerates `V ∩ (a, b)` when finite.
    pub fn enumerate_gap(&self, a: &Value, b: &Value) -> Result<Option<BTreeSet<Value>>, ValueError> {
        match self.gap_capacity(a, b)? {
            Capacity::Infinite => Ok(None),
            Capacity::Finite(_) => {
                let mut out = BTreeSet::new();
                match self {
                    GoedelSet::Full01 => unreachable!("dense gaps are never finite"),
                    GoedelSet::FiniteV(vals) => {
                        out.extend(vals.iter().filter(|v| *v > a && *v < b).cloned());
                    }
                    GoedelSet::Downward => {
                        let lo = b.ratio().recip();
                        let hi = a.ratio().recip();
                        let mut n = floor_plus_one(&lo);
                        while BigRational::from_integer(n.clone()) < hi {
                            out.insert(Value::from_ratio(BigRational::new(
                                BigInt::one(),
                                n.clone(),
                            ))?);
                            n += 1;
                        }
                    }
                    GoedelSet::SequenceV { base, families } => {
                        out.extend(base.iter().filter(|v| *v > a && *v < b).cloned());
                        for fam in families {
                            out.extend(family_members_in_gap(fam, a, b));
                        }
                    }
                }
                Ok(Some(out))
            }
        }
    }

    /// Picks `count` distinct members of `V ∩ (a, b)`, sorted ascending,
    /// preferring the largest available members (dyadic steps below `b` in
    /// dense gaps). Returns `None` when the gap has fewer than `count`
    /// members.
    pub fn pick_in_gap(
        &self,
        a: &Value,
        b: &Value,
        count: usize,
    ) -> Result<Option<Vec<Value>>, ValueError> {
        if count == 0 {
            return Ok(Some(Vec::new()));
        }
        if !self.gap_capacity(a, b)?.at_least(count as u64) {
            return Ok(None);
        }
        if let Some(members) = self.enumerate_gap(a, b)? {
            let mut picked: Vec<Value> = members.into_iter().rev().take(count).collect();
            picked.sort();
            return Ok(Some(picked));
        }
        // Infinite gap content.
        let picked = match self {
            GoedelSet::Full01 => {
                let span = b.ratio() - a.ratio();
                let mut vals = Vec::with_capacity(count);
                let mut step = span / BigRational::from_integer(BigInt::from(2));
                for _ in 0..count {
                    vals.push(Value::from_ratio(b.ratio() - &step)?);
                    step /= BigRational::from_integer(BigInt::from(2));
                }
                vals.sort();
                vals
            }
            GoedelSet::Downward => {
                // a = 0 here; take the largest members 1/n of the gap.
                let mut n = floor_plus_one(&b.ratio().recip());
                let mut vals = Vec::with_capacity(count);
                for _ in 0..count {
                    vals.push(Value::from_ratio(BigRational::new(BigInt::one(), n.clone()))?);
                    n += 1;
                }
                vals.sort();
                vals
            }
            GoedelSet::SequenceV { base, families } => {
                let mut pool: BTreeSet<Value> = base
                    .iter()
                    .filter(|v| *v > a && *v < b)
                    .cloned()
                    .collect();
                for fam in families {
                    pool.extend(family_pick_in_gap(fam, a, b, count));
                }
                let mut vals: Vec<Value> = pool.into_iter().rev().take(count).collect();
                vals.sort();
                vals
            }
            GoedelSet::FiniteV(_) => unreachable!("finite sets always enumerate"),
        };
        debug_assert_eq!(picked.len(), count);
        debug_assert!(picked.iter().all(|v| self.member(v) && v > a && v < b));
        Ok(Some(picked))
    }

    /// Limit points of the whole set (order topology).
    pub fn limit_points(&self) -> LimitPoints {
        match self {
            GoedelSet::Full01 => LimitPoints::UnitInterval,
            GoedelSet::FiniteV(_) => LimitPoints::empty(),
            GoedelSet::Downward => {
                LimitPoints::Finite(std::iter::once(Value::zero()).collect())
            }
            GoedelSet::SequenceV { families, .. } => {
                LimitPoints::Finite(families.iter().map(ClosedForm::limit).collect())
            }
        }
    }

    /// Descriptor syntax: `full01`, `finite{0,1/4,1}`, `downward`,
    /// `seq{base={0,1}; fam=1/2+1/(n+2)}`.
    pub fn parse(text: &str) -> Result<Self, ValueError> {
        let t = text.trim();
        if t == "full01" {
            return Ok(GoedelSet::Full01);
        }
        if t == "downward" {
            return Ok(GoedelSet::Downward);
        }
        if let Some(body) = t.strip_prefix("finite{").and_then(|s| s.strip_suffix('}')) {
            let vals = parse_value_list(body)?;
            return GoedelSet::finite(vals);
        }
        if let Some(body) = t.strip_prefix("seq{").and_then(|s| s.strip_suffix('}')) {
            let (base, families) = parse_seq_body(body)?;
            return GoedelSet::sequence(base, families);
        }
        Err(ValueError::Descriptor(format!(
            "unknown Goedel set descriptor `{t}`"
        )))
    }
}

impl fmt::Display for GoedelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GoedelSet::Full01 => write!(f, "full01"),
            GoedelSet::FiniteV(vals) => {
                write!(f, "finite{{")?;
                for (i, v) in vals.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "}}")
            }
            GoedelSet::Downward => write!(f, "downward"),
            GoedelSet::SequenceV { base, families } => {
                write!(f, "seq{{base={{")?;
                for (i, v) in base.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "}}")?;
                for fam in families {
                    write!(f, "; fam={fam}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// Descriptor of the truth-constant set `A ⊆ V \ {0,1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstantFamily {
    /// An explicit finite set of constants strictly between 0 and 1.
    FiniteA(Vec<Value>),
    /// `{1/n : n >= 2}`.
    DownwardA,
    /// A finite base plus monotone closed-form families, all strictly inside
    /// `(0,1)`. A single family with no base is the harmonic case.
    SeqA {
        base: Vec<Value>,
        families: Vec<ClosedForm>,
    },
    /// All rationals of `(0,1)`.
    DenseRationalsA,
}

impl ConstantFamily {
    pub fn empty() -> Self {
        ConstantFamily::FiniteA(Vec::new())
    }

    pub fn finite(mut vals: Vec<Value>) -> Result<Self, ValueError> {
        vals.sort();
        vals.dedup();
        if vals.iter().any(|v| v.is_zero() || v.is_one()) {
            return Err(ValueError::Descriptor(
                "constants must lie strictly between 0 and 1".into(),
            ));
        }
        Ok(ConstantFamily::FiniteA(vals))
    }

    /// Harmonic family `c + s/(n+k)`.
    pub fn harmonic(form: ClosedForm) -> Result<Self, ValueError> {
        ConstantFamily::sequence(Vec::new(), vec![form])
    }

    pub fn sequence(mut base: Vec<Value>, families: Vec<ClosedForm>) -> Result<Self, ValueError> {
        base.sort();
        base.dedup();
        if base.iter().any(|v| v.is_zero() || v.is_one()) {
            return Err(ValueError::Descriptor(
                "constants must lie strictly between 0 and 1".into(),
            ));
        }
        if families.is_empty() && base.is_empty() {
            return Ok(ConstantFamily::FiniteA(Vec::new()));
        }
        for fam in &families {
            if fam.is_constant() {
                return Err(ValueError::Descriptor(
                    "constant closed form belongs in the base set".into(),
                ));
            }
            let first = fam.eval(1);
            if first.is_zero() || first.is_one() {
                return Err(ValueError::Descriptor(format!(
                    "family {fam} reaches {first} at n=1; constants must stay inside (0,1)"
                )));
            }
            // Decreasing families may limit to 0 (the values stay positive);
            // increasing ones may limit to 1.
            let lim = fam.limit();
            if (fam.is_decreasing() && lim.is_one()) || (!fam.is_decreasing() && lim.is_zero()) {
                return Err(ValueError::Descriptor(format!(
                    "family {fam} leaves (0,1)"
                )));
            }
        }
        Ok(ConstantFamily::SeqA { base, families })
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, ConstantFamily::FiniteA(v) if v.is_empty())
    }

    /// Decides membership of `A`.
    pub fn member(&self, x: &Value) -> bool {
        if x.is_zero() || x.is_one() {
            return false;
        }
        match self {
            ConstantFamily::FiniteA(vals) => vals.binary_search(x).is_ok(),
            ConstantFamily::DownwardA => x.ratio().numer().is_one(),
            ConstantFamily::SeqA { base, families } => {
                base.binary_search(x).is_ok() || families.iter().any(|f| f.solve(x).is_some())
            }
            ConstantFamily::DenseRationalsA => true,
        }
    }

    /// Membership of `A ∪ {1}` (the range of truth constants in side
    /// conditions like the approximate-entailment ladder).
    pub fn member_or_one(&self, x: &Value) -> bool {
        x.is_one() || self.member(x)
    }

    /// Exact set of accumulation points of `A` within `[0,1]`.
    pub fn limit_points(&self) -> LimitPoints {
        match self {
            ConstantFamily::FiniteA(_) => LimitPoints::empty(),
            ConstantFamily::DownwardA => {
                LimitPoints::Finite(std::iter::once(Value::zero()).collect())
            }
            ConstantFamily::SeqA { families, .. } => {
                LimitPoints::Finite(families.iter().map(ClosedForm::limit).collect())
            }
            ConstantFamily::DenseRationalsA => LimitPoints::UnitInterval,
        }
    }

    /// The largest member of `A` strictly below `r`, when it exists. A dense
    /// family, or one accumulating from below towards a point under `r`,
    /// has none.
    pub fn next_below(&self, r: &Value) -> Option<Value> {
        if r.is_zero() {
            return None;
        }
        match self {
            ConstantFamily::FiniteA(vals) => vals.iter().filter(|v| *v < r).max().cloned(),
            ConstantFamily::DownwardA => {
                // the largest 1/n strictly below r
                let inv = r.ratio().recip();
                let n = floor_plus_one(&inv);
                let v = Value::from_ratio(BigRational::new(BigInt::one(), n)).ok()?;
                (v < *r && !v.is_one()).then_some(v)
            }
            ConstantFamily::SeqA { base, families } => {
                let mut best: Option<Value> = base.iter().filter(|v| *v < r).max().cloned();
                for fam in families {
                    if fam.is_decreasing() {
                        if &fam.limit() >= r {
                            continue; // every member exceeds r
                        }
                        // smallest n with f(n) < r carries the largest member below r
                        let bound = &fam.s / (r.ratio() - &fam.c) - &fam.k;
                        let n = std::cmp::max(BigInt::one(), floor_plus_one(&bound));
                        let n: u64 = n.try_into().ok()?;
                        let v = fam.eval(n);
                        if best.as_ref().is_none_or(|b| v > *b) {
                            best = Some(v);
                        }
                    } else if fam.eval(1) < *r {
                        // members climb towards the limit: no largest one below r
                        let sup = std::cmp::min(fam.limit(), r.clone());
                        if best.as_ref().is_none_or(|b| *b < sup) {
                            return None;
                        }
                    }
                }
                best
            }
            ConstantFamily::DenseRationalsA => None,
        }
    }

    /// The minimum of `A`, when it exists. (The stage-0 guard of the
    /// completion procedure needs it; dense or downward families have none.)
    pub fn minimum(&self) -> Option<Value> {
        match self {
            ConstantFamily::FiniteA(vals) => vals.first().cloned(),
            ConstantFamily::DownwardA => None,
            ConstantFamily::SeqA { base, families } => {
                let mut cand: Option<Value> = base.first().cloned();
                for fam in families {
                    if !fam.is_decreasing() {
                        let v = fam.eval(1);
                        if cand.as_ref().is_none_or(|c| v < *c) {
                            cand = Some(v);
                        }
                    }
                }
                // A decreasing family has no minimal member; its values get
                // below every candidate unless the candidate undercuts the
                // limit.
                for fam in families {
                    if fam.is_decreasing() {
                        match &cand {
                            Some(c) if *c <= fam.limit() => {}
                            _ => return None,
                        }
                    }
                }
                cand
            }
            ConstantFamily::DenseRationalsA => None,
        }
    }

    /// Checks `A ⊆ V` for the descriptor combinations the toolkit supports.
    pub fn check_within(&self, set: &GoedelSet) -> Result<(), ValueError> {
        let fail = |what: &str| {
            Err(ValueError::Descriptor(format!(
                "constant family {self} is not contained in Goedel set {set}: {what}"
            )))
        };
        match self {
            ConstantFamily::FiniteA(vals) => {
                for v in vals {
                    if !set.member(v) {
                        return fail(&format!("{v} is not a member"));
                    }
                }
                Ok(())
            }
            ConstantFamily::DownwardA => match set {
                GoedelSet::Full01 | GoedelSet::Downward => Ok(()),
                GoedelSet::FiniteV(_) => fail("finite set cannot contain all 1/n"),
                GoedelSet::SequenceV { .. } => {
                    // Exact containment needs a family covering the 1/n tail.
                    if let GoedelSet::SequenceV { families, .. } = set {
                        let tail = families.iter().find_map(|f| {
                            (f.c.is_zero() && f.s.is_one() && f.k.is_integer() && !f.k.is_negative())
                                .then(|| f.k.to_integer())
                        });
                        match tail {
                            Some(k) => {
                                let k: u64 = k.try_into().unwrap_or(u64::MAX);
                                for n in 2..=(k + 1) {
                                    let v = Value::from_ratio(BigRational::new(
                                        BigInt::one(),
                                        BigInt::from(n),
                                    ))?;
                                    if !set.member(&v) {
                                        return fail(&format!("{v} is not a member"));
                                    }
                                }
                                Ok(())
                            }
                            None => fail("no family covers the 1/n tail"),
                        }
                    } else {
                        unreachable!()
                    }
                }
            },
            ConstantFamily::SeqA { base, families } => {
                for v in base {
                    if !set.member(v) {
                        return fail(&format!("{v} is not a member"));
                    }
                }
                match set {
                    GoedelSet::Full01 => Ok(()),
                    _ => {
                        for fam in families {
                            let covered = match set {
                                GoedelSet::SequenceV { families: vf, .. } => {
                                    vf.iter().any(|g| g == fam)
                                }
                                // s/(n+k) = 1/m for every n forces c = 0,
                                // a unit-numerator slope and an integral
                                // nonnegative shift
                                GoedelSet::Downward => {
                                    fam.c.is_zero()
                                        && fam.s.numer() == &BigInt::from(1)
                                        && fam.s > BigRational::zero()
                                        && fam.k.is_integer()
                                        && !fam.k.is_negative()
                                }
                                _ => false,
                            };
                            if covered {
                                continue;
                            }
                            return fail(&format!(
                                "cannot decide containment of family {fam}"
                            ));
                        }
                        Ok(())
                    }
                }
            }
            ConstantFamily::DenseRationalsA => match set {
                GoedelSet::Full01 => Ok(()),
                _ => fail("dense rationals need the full interval"),
            },
        }
    }

    /// Same descriptor surface as [`GoedelSet::parse`] plus `dense-rationals`.
    pub fn parse(text: &str) -> Result<Self, ValueError> {
        let t = text.trim();
        if t == "dense-rationals" {
            return Ok(ConstantFamily::DenseRationalsA);
        }
        if t == "downward" {
            return Ok(ConstantFamily::DownwardA);
        }
        if t == "empty" {
            return Ok(ConstantFamily::empty());
        }
        if let Some(body) = t.strip_prefix("finite{").and_then(|s| s.strip_suffix('}')) {
            let vals = parse_value_list(body)?;
            return ConstantFamily::finite(vals);
        }
        if let Some(body) = t.strip_prefix("seq{").and_then(|s| s.strip_suffix('}')) {
            let (base, families) = parse_seq_body(body)?;
            return ConstantFamily::sequence(base, families);
        }
        Err(ValueError::Descriptor(format!(
            "unknown constant family descriptor `{t}`"
        )))
    }
}

impl fmt::Display for ConstantFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstantFamily::FiniteA(vals) => {
                if vals.is_empty() {
                    return write!(f, "empty");
                }
                write!(f, "finite{{")?;
                for (i, v) in vals.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "}}")
            }
            ConstantFamily::DownwardA => write!(f, "downward"),
            ConstantFamily::SeqA { base, families } => {
                write!(f, "seq{{base={{")?;
                for (i, v) in base.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "}}")?;
                for fam in families {
                    write!(f, "; fam={fam}")?;
                }
                write!(f, "}}")
            }
            ConstantFamily::DenseRationalsA => write!(f, "dense-rationals"),
        }
    }
}

fn parse_value_list(body: &str) -> Result<Vec<Value>, ValueError> {
    let body = body.trim();
    if body.is_empty() {
        return Ok(Vec::new());
    }
    body.split(',').map(|s| s.trim().parse()).collect()
}

fn parse_seq_body(body: &str) -> Result<(Vec<Value>, Vec<ClosedForm>), ValueError> {
    let mut base = Vec::new();
    let mut families = Vec::new();
    for part in body.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if let Some(list) = part
            .strip_prefix("base=")
            .map(str::trim)
            .and_then(|s| s.strip_prefix('{'))
            .and_then(|s| s.strip_suffix('}'))
        {
            base.extend(parse_value_list(list)?);
        } else if let Some(form) = part.strip_prefix("fam=") {
            families.push(ClosedForm::parse(form)?);
        } else {
            return Err(ValueError::Descriptor(format!(
                "expected `base={{...}}` or `fam=...`, got `{part}`"
            )));
        }
    }
    Ok((base, families))
}

/// Smallest integer strictly greater than `r`.
fn floor_plus_one(r: &BigRational) -> BigInt {
    r.floor().to_integer() + 1
}

/// Number of integers `n` with `lo < n < hi`.
fn count_integers_strictly_between(lo: &BigRational, hi: &BigRational) -> u64 {
    let n_min = floor_plus_one(lo);
    let n_max = hi.ceil().to_integer() - 1;
    if n_max < n_min {
        0
    } else {
        let count: BigInt = n_max - n_min + 1;
        count.try_into().unwrap_or(u64::MAX)
    }
}

/// Whether a monotone family has infinitely many members inside `(a, b)`.
fn family_gap_is_infinite(fam: &ClosedForm, a: &Value, b: &Value) -> bool {
    let (a, b, c) = (a.ratio(), b.ratio(), &fam.c);
    if fam.is_decreasing() {
        a <= c && c < b
    } else {
        a < c && c <= b
    }
}

/// `n`-range (inclusive) of family members strictly inside `(a, b)`; `None`
/// when empty, upper bound `None` when the tail is unbounded.
fn family_gap_range(fam: &ClosedForm, a: &Value, b: &Value) -> Option<(u64, Option<u64>)> {
    let (a, b, c) = (a.ratio(), b.ratio(), &fam.c);
    let to_u64 = |i: BigInt| -> u64 { i.try_into().unwrap_or(u64::MAX) };
    if fam.is_decreasing() {
        // Values live in (c, f(1)], strictly decreasing towards c.
        if c >= b {
            return None;
        }
        // f(n) < b  <=>  n > s/(b-c) - k
        let n_lo = std::cmp::max(BigInt::one(), floor_plus_one(&(&fam.s / (b - c) - &fam.k)));
        if a <= c {
            return Some((to_u64(n_lo), None));
        }
        // a > c: f(n) > a  <=>  n < s/(a-c) - k
        let n_hi = (&fam.s / (a - c) - &fam.k).ceil().to_integer() - 1;
        if n_hi < n_lo {
            None
        } else {
            Some((to_u64(n_lo), Some(to_u64(n_hi))))
        }
    } else {
        // Values live in [f(1), c), strictly increasing towards c.
        let s_abs = -&fam.s;
        if c <= a {
            return None;
        }
        // f(n) > a  <=>  n > |s|/(c-a) - k
        let n_lo = std::cmp::max(BigInt::one(), floor_plus_one(&(&s_abs / (c - a) - &fam.k)));
        if c <= b {
            return Some((to_u64(n_lo), None));
        }
        // c > b: f(n) < b  <=>  n < |s|/(c-b) - k
        let n_hi = (&s_abs / (c - b) - &fam.k).ceil().to_integer() - 1;
        if n_hi < n_lo {
            None
        } else {
            Some((to_u64(n_lo), Some(to_u64(n_hi))))
        }
    }
}

fn family_members_in_gap(fam: &ClosedForm, a: &Value, b: &Value) -> Vec<Value> {
    match family_gap_range(fam, a, b) {
        None => Vec::new(),
        Some((lo, Some(hi))) => (lo..=hi).map(|n| fam.eval(n)).collect(),
        Some((_, None)) => panic!("family has infinitely many members in gap"),
    }
}

/// Deterministic choice of up to `count` members of the family inside the
/// gap, taken from the end that exists.
fn family_pick_in_gap(fam: &ClosedForm, a: &Value, b: &Value, count: usize) -> Vec<Value> {
    match family_gap_range(fam, a, b) {
        None => Vec::new(),
        Some((lo, Some(hi))) => {
            let lo = std::cmp::max(lo, hi.saturating_sub(count as u64 - 1));
            (lo..=hi).map(|n| fam.eval(n)).collect()
        }
        Some((lo, None)) => (lo..lo + count as u64).map(|n| fam.eval(n)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(p: i64, q: i64) -> Value {
        Value::frac(p, q)
    }

    #[test]
    fn resid_piecewise() {
        assert_eq!(resid(&v(1, 2), &v(1, 2)), Value::zero());
        assert_eq!(resid(&Value::zero(), &Value::one()), Value::one());
        assert_eq!(resid(&v(1, 3), &v(2, 3)), v(2, 3));
    }

    #[test]
    fn connectives() {
        assert_eq!(connective(Connective::And, &[v(1, 3), v(1, 2)]).unwrap(), v(1, 2));
        assert_eq!(connective(Connective::Delta, &[Value::zero()]).unwrap(), Value::zero());
        assert_eq!(connective(Connective::Delta, &[v(1, 9)]).unwrap(), Value::one());
        // The published table omits psi = 0 < phi; the abbreviation gives 0.
        assert_eq!(strongimp(&v(1, 2), &Value::zero()), Value::zero());
        assert_eq!(connective(Connective::Or, &[v(1, 3), v(1, 2)]).unwrap(), v(1, 3));
        assert_eq!(neg(&Value::one()), Value::zero());
        assert_eq!(neg(&v(2, 3)), Value::one());
        assert!(matches!(
            connective(Connective::And, &[v(1, 2)]),
            Err(ValueError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn dmax_cases() {
        assert_eq!(dmax(&v(1, 4), &v(1, 4)), Value::zero());
        assert_eq!(dmax(&v(1, 4), &v(3, 4)), v(3, 4));
        assert_eq!(dmax(&Value::zero(), &Value::one()), Value::one());
    }

    #[test]
    fn strongimp_matches_table() {
        // Published table: 0 when x > y > 0; y when x <= y.
        let grid = [Value::zero(), v(1, 4), v(1, 2), v(3, 4), Value::one()];
        for x in &grid {
            for y in &grid {
                let got = strongimp(x, y);
                let expected = if y.is_zero() || (x > y) {
                    Value::zero()
                } else {
                    y.clone()
                };
                assert_eq!(got, expected, "strongimp({x}, {y})");
            }
        }
    }

    #[test]
    fn membership() {
        assert!(GoedelSet::Downward.member(&v(1, 7)));
        assert!(!GoedelSet::Downward.member(&v(2, 7)));
        assert!(GoedelSet::Full01.member(&v(2, 7)));
        let fin = GoedelSet::finite(vec![Value::zero(), v(1, 4), v(1, 2), Value::one()]).unwrap();
        assert!(fin.member(&v(1, 4)));
        assert!(!fin.member(&v(1, 3)));
        let seq = GoedelSet::sequence(
            vec![Value::zero(), v(1, 2), Value::one()],
            vec![ClosedForm::parse("1/2+1/(n+2)").unwrap()],
        )
        .unwrap();
        assert!(seq.member(&v(5, 6))); // n = 1
        assert!(seq.member(&v(3, 4))); // n = 2
        assert!(seq.member(&v(2, 3))); // n = 4
        assert!(seq.member(&v(1, 2))); // declared limit
        assert!(!seq.member(&v(9, 10))); // 1/(9/10 - 1/2) - 2 is not an integer
        assert!(!seq.member(&v(2, 5)));
    }

    #[test]
    fn sequence_set_requires_limit_member() {
        let err = GoedelSet::sequence(
            vec![Value::zero(), Value::one()],
            vec![ClosedForm::parse("1/2+1/(n+2)").unwrap()],
        );
        assert!(err.is_err());
    }

    #[test]
    fn gap_capacities() {
        let dw = GoedelSet::Downward;
        assert_eq!(dw.gap_capacity(&v(1, 3), &v(1, 2)).unwrap(), Capacity::Finite(0));
        assert_eq!(dw.gap_capacity(&Value::zero(), &v(1, 5)).unwrap(), Capacity::Infinite);
        assert_eq!(
            GoedelSet::Full01.gap_capacity(&v(1, 3), &v(1, 2)).unwrap(),
            Capacity::Infinite
        );
        assert_eq!(dw.gap_capacity(&v(1, 5), &v(1, 2)).unwrap(), Capacity::Finite(2));
        assert!(dw.gap_capacity(&v(1, 2), &v(1, 2)).is_err());
    }

    #[test]
    fn gap_capacity_sequence_set() {
        let seq = GoedelSet::sequence(
            vec![Value::zero(), v(1, 2), Value::one()],
            vec![
                ClosedForm::parse("1/2+1/(n+2)").unwrap(),
                ClosedForm::parse("1/2-1/(n+2)").unwrap(),
            ],
        )
        .unwrap();
        // Decreasing-to-1/2 family accumulates just above 1/2.
        assert_eq!(seq.gap_capacity(&v(1, 2), &Value::one()).unwrap(), Capacity::Infinite);
        // Increasing-to-1/2 family accumulates just below 1/2.
        assert_eq!(seq.gap_capacity(&Value::zero(), &v(1, 2)).unwrap(), Capacity::Infinite);
        // (3/4, 1): only n=1 of the upper family (5/6).
        assert_eq!(seq.gap_capacity(&v(3, 4), &Value::one()).unwrap(), Capacity::Finite(1));
        // (1/3, 5/12): increasing family members 1/2-1/(n+2) in there: n=1 -> 1/6? no,
        // 1/2-1/3=1/6; n=2 -> 1/4; n=3 -> 3/10; n=4 -> 1/3; n=5 -> 5/14 in (1/3,5/12); n=6 -> 3/8; n=7 -> 7/18;
        // n=8 -> 2/5; n=9 -> 9/22; upper bound 5/12: n with 1/(n+2) > 1/12 i.e. n < 10.
        assert_eq!(seq.gap_capacity(&v(1, 3), &v(5, 12)).unwrap(), Capacity::Finite(5));
        let members = seq.enumerate_gap(&v(1, 3), &v(5, 12)).unwrap().unwrap();
        assert_eq!(members.len(), 5);
        for m in &members {
            assert!(seq.member(m) && *m > v(1, 3) && *m < v(5, 12));
        }
    }

    #[test]
    fn limit_points_of_families() {
        assert!(ConstantFamily::finite(vec![v(1, 4), v(1, 2)])
            .unwrap()
            .limit_points()
            .is_empty());
        assert_eq!(
            ConstantFamily::DownwardA.limit_points(),
            LimitPoints::Finite(std::iter::once(Value::zero()).collect())
        );
        let harm = ConstantFamily::harmonic(ClosedForm::parse("1/2+1/(n+2)").unwrap()).unwrap();
        assert_eq!(
            harm.limit_points(),
            LimitPoints::Finite(std::iter::once(v(1, 2)).collect())
        );
        assert!(ConstantFamily::DenseRationalsA.limit_points().contains(&v(1, 3)));
        assert!(!ConstantFamily::DenseRationalsA.limit_points().subset_of_zero());
        assert!(ConstantFamily::DownwardA.limit_points().subset_of_zero());
    }

    #[test]
    fn constant_family_membership() {
        assert!(ConstantFamily::DownwardA.member(&v(1, 7)));
        assert!(!ConstantFamily::DownwardA.member(&Value::one()));
        assert!(!ConstantFamily::DownwardA.member(&v(2, 7)));
        assert!(ConstantFamily::DownwardA.member_or_one(&Value::one()));
        let two_sided = ConstantFamily::sequence(
            Vec::new(),
            vec![
                ClosedForm::parse("1/2-1/(n+2)").unwrap(),
                ClosedForm::parse("1/2+1/(n+2)").unwrap(),
            ],
        )
        .unwrap();
        assert!(two_sided.member(&v(1, 6)));
        assert!(two_sided.member(&v(5, 6)));
        assert!(!two_sided.member(&v(1, 2))); // the limit itself is not a member
    }

    #[test]
    fn minimum_of_families() {
        assert_eq!(
            ConstantFamily::finite(vec![v(1, 2), v(1, 4)]).unwrap().minimum(),
            Some(v(1, 4))
        );
        assert_eq!(ConstantFamily::DownwardA.minimum(), None);
        assert_eq!(ConstantFamily::DenseRationalsA.minimum(), None);
        let inc = ConstantFamily::harmonic(ClosedForm::parse("1/2-1/(n+2)").unwrap()).unwrap();
        assert_eq!(inc.minimum(), Some(v(1, 6)));
        let dec = ConstantFamily::harmonic(ClosedForm::parse("1/2+1/(n+2)").unwrap()).unwrap();
        assert_eq!(dec.minimum(), None);
    }

    #[test]
    fn containment_checks() {
        let a = ConstantFamily::finite(vec![v(1, 4), v(1, 2)]).unwrap();
        assert!(a.check_within(&GoedelSet::Full01).is_ok());
        assert!(a
            .check_within(&GoedelSet::finite(vec![Value::zero(), v(1, 4), v(1, 2), Value::one()]).unwrap())
            .is_ok());
        assert!(a.check_within(&GoedelSet::Downward).is_ok()); // both are 1/n
        let b = ConstantFamily::finite(vec![v(1, 3), v(2, 5)]).unwrap();
        assert!(b.check_within(&GoedelSet::Downward).is_err()); // 2/5 is not 1/n
        assert!(ConstantFamily::DownwardA.check_within(&GoedelSet::Downward).is_ok());
        assert!(ConstantFamily::DownwardA.check_within(&GoedelSet::Full01).is_ok());
        // a harmonic family with unit numerator stays inside the downward set
        let tail = ConstantFamily::harmonic(ClosedForm::parse("1/(n+1)").unwrap()).unwrap();
        assert!(tail.check_within(&GoedelSet::Downward).is_ok());
        let off = ConstantFamily::harmonic(ClosedForm::parse("1/2+1/(n+2)").unwrap()).unwrap();
        assert!(off.check_within(&GoedelSet::Downward).is_err());
        assert!(ConstantFamily::DenseRationalsA.check_within(&GoedelSet::Full01).is_ok());
        assert!(ConstantFamily::DenseRationalsA.check_within(&GoedelSet::Downward).is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        for text in [
            "full01",
            "downward",
            "finite{0,1/4,1/2,1}",
            "seq{base={0,1/2,1}; fam=1/2+1/(n+2)}",
        ] {
            let set = GoedelSet::parse(text).unwrap();
            assert_eq!(GoedelSet::parse(&set.to_string()).unwrap(), set);
        }
        for text in ["downward", "finite{1/4,1/2}", "dense-rationals", "seq{fam=1/2-1/(n+2)}"] {
            let fam = ConstantFamily::parse(text).unwrap();
            assert_eq!(ConstantFamily::parse(&fam.to_string()).unwrap(), fam);
        }
        assert!(GoedelSet::parse("finite{1/4,1/2}").is_err()); // missing 0 and 1
        assert!(ConstantFamily::parse("finite{0,1/2}").is_err()); // 0 not allowed
    }

    #[test]
    fn closed_form_parse_eval() {
        let f = ClosedForm::parse("1/2+1/(n+2)").unwrap();
        assert_eq!(f.eval(1), v(5, 6));
        assert_eq!(f.eval(2), v(3, 4));
        assert_eq!(f.limit(), v(1, 2));
        assert_eq!(f.solve(&v(3, 4)), Some(2));
        assert_eq!(f.solve(&v(2, 3)), Some(4));
        assert_eq!(f.solve(&v(9, 10)), None);
        let g = ClosedForm::parse("1/(n)").unwrap();
        assert_eq!(g.eval(1), Value::one());
        assert_eq!(g.eval(3), v(1, 3));
        let h = ClosedForm::parse("1/2-1/(n+2)").unwrap();
        assert_eq!(h.eval(3), v(3, 10));
        assert!(!h.is_decreasing());
        assert!(ClosedForm::parse("2+1/(n)").is_err()); // outside [0,1]
    }

    #[test]
    fn pick_in_gap_determinism_and_membership() {
        let full = GoedelSet::Full01;
        let picks = full.pick_in_gap(&Value::zero(), &Value::one(), 3).unwrap().unwrap();
        assert_eq!(picks, vec![v(1, 2), v(3, 4), v(7, 8)]);
        let dw = GoedelSet::Downward;
        let picks = dw.pick_in_gap(&Value::zero(), &v(1, 2), 3).unwrap().unwrap();
        assert_eq!(picks, vec![v(1, 5), v(1, 4), v(1, 3)]);
        assert_eq!(dw.pick_in_gap(&v(1, 3), &v(1, 2), 1).unwrap(), None);
        let fin = GoedelSet::finite(vec![Value::zero(), v(1, 4), v(1, 2), v(3, 4), Value::one()]).unwrap();
        let picks = fin.pick_in_gap(&Value::zero(), &Value::one(), 2).unwrap().unwrap();
        assert_eq!(picks, vec![v(1, 2), v(3, 4)]);
        let seq = GoedelSet::sequence(
            vec![Value::zero(), v(1, 2), Value::one()],
            vec![ClosedForm::parse("1/2+1/(n+2)").unwrap()],
        )
        .unwrap();
        let picks = seq.pick_in_gap(&v(1, 2), &Value::one(), 3).unwrap().unwrap();
        for p in &picks {
            assert!(seq.member(p) && *p > v(1, 2) && *p < Value::one());
        }
        assert_eq!(picks.len(), 3);
    }

    #[test]
    fn gap_enumeration_matches_capacity() {
        let sets = [
            GoedelSet::Downward,
            GoedelSet::finite(vec![Value::zero(), v(1, 4), v(1, 2), v(3, 4), Value::one()]).unwrap(),
            GoedelSet::sequence(
                vec![Value::zero(), v(1, 2), Value::one()],
                vec![ClosedForm::parse("1/2+1/(n+2)").unwrap()],
            )
            .unwrap(),
        ];
        let probes = [
            (v(1, 5), v(1, 2)),
            (v(1, 3), v(2, 3)),
            (v(3, 5), Value::one()),
            (v(51, 100), v(3, 4)),
        ];
        for set in &sets {
            for (a, b) in &probes {
                if let Capacity::Finite(k) = set.gap_capacity(a, b).unwrap() {
                    let members = set.enumerate_gap(a, b).unwrap().unwrap();
                    assert_eq!(members.len() as u64, k, "{set} on ({a},{b})");
                    for m in &members {
                        assert!(set.member(m));
                    }
                }
            }
        }
    }

    #[test]
    fn adjunction_on_finite_chain() {
        let pts = [Value::zero(), v(1, 4), v(1, 2), v(3, 4), Value::one()];
        for x in &pts {
            for y in &pts {
                for z in &pts {
                    let lhs = and(x, y) >= *z;
                    let rhs = *x >= resid(y, z);
                    assert_eq!(lhs, rhs, "adjunction at ({x},{y},{z})");
                }
            }
        }
    }

    #[test]
    fn dmax_metric_and_ultrametric_laws() {
        let pts = [Value::zero(), v(1, 4), v(1, 2), v(3, 4), Value::one()];
        for x in &pts {
            for y in &pts {
                assert_eq!(dmax(x, y), dmax(y, x));
                assert_eq!(dmax(x, y).is_zero(), x == y);
                for z in &pts {
                    let d_xz = dmax(x, z);
                    let bound = std::cmp::max(dmax(x, y), dmax(y, z));
                    assert!(d_xz <= bound, "strong triangle at ({x},{y},{z})");
                }
            }
        }
    }

    #[test]
    fn delta_bivalent_and_rg3_sound() {
        let pts = [Value::zero(), v(1, 9), v(1, 2), v(99, 100), Value::one()];
        for x in &pts {
            let d = delta(x);
            assert!(d.is_zero() || d.is_one());
            assert_eq!(d.is_zero(), x.is_zero());
            if !x.is_one() {
                assert_eq!(neg(&neg(x)), Value::zero());
            }
        }
    }

    #[test]
    fn resid_zero_iff_ge() {
        let pts = [Value::zero(), v(1, 4), v(2, 5), v(1, 2), Value::one()];
        for x in &pts {
            for y in &pts {
                assert_eq!(resid(x, y).is_zero(), x >= y);
                // antitone in the first argument
                for x2 in &pts {
                    if x2 >= x {
                        assert!(resid(x2, y) <= resid(x, y));
                    }
                }
            }
        }
    }
}
