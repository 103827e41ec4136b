//! Sound-and-complete propositional decision procedure over an arbitrary
//! Goedel set, by symbolic order-type enumeration, plus an independent
//! concrete brute-force oracle.
//!
//! Completeness rests on the order-only dependence of the connective stock:
//! evaluation of `{and, to, delta, constants}` produces only values from
//! `{0, 1} ∪ constants ∪ atom values`, and whether a sentence evaluates to
//! `0` depends only on the order type of the atom values relative to the
//! mentioned constants (with pinning). Gap-capacity pruning accounts for
//! non-dense value sets. This contract is enforced by the oracle-agreement
//! suite rather than assumed.
//!
//! Entailment quantifies over structures valued inside the Goedel set only:
//! arrangements are realized from the set's own members, and the oracle
//! enumerates them from the set, matching the definition of a structure
//! (predicates map into the value set).

use crate::semantics::{eval_formula, Environment, Structure};
use crate::syntax::Formula;
use crate::values::{Capacity, ConstantFamily, GoedelSet, Value, ValueError};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecideError {
    #[error("{count} atoms exceed the configured bound {bound}")]
    AtomBound { count: usize, bound: usize },
    #[error("formula is not propositional: {0}")]
    NotPropositional(String),
    #[error("truth constant {0} is not a member of the Goedel set")]
    ConstantOutsideSet(Value),
    #[error("constant {0} is not in the arrangement")]
    ConstantNotInArrangement(Value),
    #[error("r = {0} is not in A ∪ {{1}}")]
    RNotAllowed(Value),
    #[error("value error: {0}")]
    Value(#[from] ValueError),
    #[error("internal: witness failed the semantic re-check on `{0}`")]
    WitnessRecheck(String),
}

/// Decision-procedure knobs; the atom bound guards the combinatorial blowup.
#[derive(Debug, Clone, Copy)]
pub struct DecideConfig {
    pub atom_bound: usize,
}

impl Default for DecideConfig {
    fn default() -> Self {
        DecideConfig { atom_bound: 6 }
    }
}

/// Placement of one atom in an arrangement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomPos {
    /// Equal to the i-th mentioned constant.
    Pinned(usize),
    /// Strictly inside the i-th gap, in the given strict class (0-based,
    /// ascending value order).
    InGap { gap: usize, class: usize },
}

/// Symbolic order-type assignment of atoms relative to the mentioned
/// constants; the engine of the decision procedure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrangement {
    /// Mentioned constants including 0 and 1, sorted ascending.
    pub constants: Vec<Value>,
    /// Atom names, sorted.
    pub atoms: Vec<String>,
    /// Placement per atom, parallel to `atoms`.
    pub pos: Vec<AtomPos>,
    /// Number of strict classes per gap.
    pub gap_classes: Vec<usize>,
}

impl Arrangement {
    fn atom_index(&self, name: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a == name)
    }

    /// Concrete atom values realizing this arrangement in `set`, taking the
    /// largest available members per gap (dyadic steps below the upper
    /// endpoint in dense gaps).
    pub fn realize(&self, set: &GoedelSet) -> Result<BTreeMap<String, Value>, DecideError> {
        let mut gap_values: Vec<Vec<Value>> = Vec::with_capacity(self.gap_classes.len());
        for (g, k) in self.gap_classes.iter().enumerate() {
            if *k == 0 {
                gap_values.push(Vec::new());
                continue;
            }
            let picks = set
                .pick_in_gap(&self.constants[g], &self.constants[g + 1], *k)?
                .expect("arrangement construction respects gap capacity");
            gap_values.push(picks);
        }
        Ok(self
            .atoms
            .iter()
            .zip(&self.pos)
            .map(|(name, pos)| {
                let v = match pos {
                    AtomPos::Pinned(i) => self.constants[*i].clone(),
                    AtomPos::InGap { gap, class } => gap_values[*gap][*class].clone(),
                };
                (name.clone(), v)
            })
            .collect())
    }
}

impl fmt::Display for Arrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, pos)) in self.atoms.iter().zip(&self.pos).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match pos {
                AtomPos::Pinned(c) => write!(f, "{name} = {}", self.constants[*c])?,
                AtomPos::InGap { gap, class } => write!(
                    f,
                    "{name} in ({}, {}) rank {}",
                    self.constants[*gap],
                    self.constants[*gap + 1],
                    class + 1
                )?,
            }
        }
        Ok(())
    }
}

/// Symbolic value: a mentioned constant or a gap class. Ordered by position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sym {
    Const(usize),
    Gap { gap: usize, class: usize },
}

impl Sym {
    fn key(&self) -> (usize, usize) {
        match self {
            Sym::Const(i) => (2 * i, 0),
            Sym::Gap { gap, class } => (2 * gap + 1, *class),
        }
    }
}

impl PartialOrd for Sym {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Sym {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

/// Evaluates a propositional formula to a symbol under the arrangement; the
/// concrete value of the symbol under any realization equals `eval_formula`.
pub fn eval_symbolic(f: &Formula, arr: &Arrangement) -> Result<Sym, DecideError> {
    let zero = Sym::Const(0);
    let one = Sym::Const(arr.constants.len() - 1);
    match f {
        Formula::Bot => Ok(one),
        Formula::TruthConst(r) => arr
            .constants
            .iter()
            .position(|c| c == r)
            .map(Sym::Const)
            .ok_or_else(|| DecideError::ConstantNotInArrangement(r.clone())),
        Formula::Atom(name, args) => {
            if !args.is_empty() {
                return Err(DecideError::NotPropositional(f.to_string()));
            }
            let ix = arr
                .atom_index(name)
                .ok_or_else(|| DecideError::NotPropositional(format!("unknown atom {name}")))?;
            Ok(match arr.pos[ix] {
                AtomPos::Pinned(c) => Sym::Const(c),
                AtomPos::InGap { gap, class } => Sym::Gap { gap, class },
            })
        }
        Formula::And(a, b) => {
            let (x, y) = (eval_symbolic(a, arr)?, eval_symbolic(b, arr)?);
            Ok(std::cmp::max(x, y))
        }
        Formula::To(a, b) => {
            let (x, y) = (eval_symbolic(a, arr)?, eval_symbolic(b, arr)?);
            Ok(if x >= y { zero } else { y })
        }
        Formula::Delta(a) => {
            let x = eval_symbolic(a, arr)?;
            Ok(if x == zero { zero } else { one })
        }
        Formula::Forall(..) | Formula::Exists(..) => {
            Err(DecideError::NotPropositional(f.to_string()))
        }
    }
}

/// All weak orders of `t` slots with at most `max_classes` classes: class
/// indices per slot, images forming an initial segment `0..k`.
fn weak_orders(t: usize, max_classes: usize) -> Vec<Vec<usize>> {
    if t == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut current = vec![0usize; t];
    loop {
        let k = current.iter().copied().max().unwrap() + 1;
        let is_initial_segment = (0..k).all(|c| current.contains(&c));
        if is_initial_segment && k <= max_classes {
            out.push(current.clone());
        }
        // odometer, base t, last slot fastest
        let mut i = t;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            current[i] += 1;
            if current[i] < t {
                break;
            }
            current[i] = 0;
        }
    }
}

/// Streams every realizable arrangement of the atoms over the mentioned
/// constants exactly once, in deterministic order.
pub struct ArrangementIter {
    atoms: Vec<String>,
    constants: Vec<Value>,
    caps: Vec<Capacity>,
    locations: usize,
    loc: Option<Vec<usize>>, // odometer over per-atom locations
    buffer: std::vec::IntoIter<Arrangement>,
    started: bool,
}

impl ArrangementIter {
    fn fill_buffer(&mut self) -> bool {
        let Some(loc) = &self.loc else {
            return false;
        };
        let gaps = self.constants.len() - 1;
        let mut gap_atoms: Vec<Vec<usize>> = vec![Vec::new(); gaps];
        let mut pos: Vec<Option<AtomPos>> = vec![None; self.atoms.len()];
        for (atom, l) in loc.iter().enumerate() {
            if l % 2 == 0 {
                pos[atom] = Some(AtomPos::Pinned(l / 2));
            } else {
                gap_atoms[l / 2].push(atom);
            }
        }
        // per-gap weak orders, pruned by capacity
        let mut per_gap: Vec<Vec<Vec<usize>>> = Vec::with_capacity(gaps);
        for (g, atoms_here) in gap_atoms.iter().enumerate() {
            let t = atoms_here.len();
            let max_classes = match self.caps[g] {
                Capacity::Finite(k) => std::cmp::min(t as u64, k) as usize,
                Capacity::Infinite => t,
            };
            let orders = weak_orders(t, max_classes);
            if orders.is_empty() {
                return true; // unrealizable assignment, buffer stays empty
            }
            per_gap.push(orders);
        }
        // cartesian product across gaps
        let mut combos: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
        for orders in &per_gap {
            let mut next = Vec::with_capacity(combos.len() * orders.len());
            for combo in &combos {
                for o in orders {
                    let mut c = combo.clone();
                    c.push(o.clone());
                    next.push(c);
                }
            }
            combos = next;
        }
        let mut buf = Vec::with_capacity(combos.len());
        for combo in combos {
            let mut pos = pos.clone();
            let mut gap_classes = vec![0usize; gaps];
            for (g, order) in combo.iter().enumerate() {
                for (slot, class) in order.iter().enumerate() {
                    pos[gap_atoms[g][slot]] = Some(AtomPos::InGap {
                        gap: g,
                        class: *class,
                    });
                }
                gap_classes[g] = order.iter().copied().max().map_or(0, |m| m + 1);
            }
            buf.push(Arrangement {
                constants: self.constants.clone(),
                atoms: self.atoms.clone(),
                pos: pos.into_iter().map(Option::unwrap).collect(),
                gap_classes,
            });
        }
        self.buffer = buf.into_iter();
        true
    }

    fn advance_loc(&mut self) {
        let Some(loc) = &mut self.loc else {
            return;
        };
        if !self.started {
            self.started = true;
            return; // first assignment is all zeros, already in place
        }
        let mut i = loc.len();
        loop {
            if i == 0 {
                self.loc = None;
                return;
            }
            i -= 1;
            loc[i] += 1;
            if loc[i] < self.locations {
                return;
            }
            loc[i] = 0;
        }
    }
}

impl Iterator for ArrangementIter {
    type Item = Arrangement;

    fn next(&mut self) -> Option<Arrangement> {
        loop {
            if let Some(a) = self.buffer.next() {
                return Some(a);
            }
            self.advance_loc();
            self.loc.as_ref()?;
            if !self.fill_buffer() {
                return None;
            }
        }
    }
}

/// Enumerates every realizable arrangement of `atoms` over `constants`
/// (0 and 1 are adjoined) within the Goedel set.
pub fn enumerate_arrangements(
    atoms: &[String],
    constants: &[Value],
    set: &GoedelSet,
    config: &DecideConfig,
) -> Result<ArrangementIter, DecideError> {
    let mut atoms: Vec<String> = atoms.to_vec();
    atoms.sort();
    atoms.dedup();
    if atoms.len() > config.atom_bound {
        return Err(DecideError::AtomBound {
            count: atoms.len(),
            bound: config.atom_bound,
        });
    }
    let mut cs: BTreeSet<Value> = constants.iter().cloned().collect();
    cs.insert(Value::zero());
    cs.insert(Value::one());
    let constants: Vec<Value> = cs.into_iter().collect();
    for c in &constants {
        if !set.member(c) {
            return Err(DecideError::ConstantOutsideSet(c.clone()));
        }
    }
    let mut caps = Vec::with_capacity(constants.len() - 1);
    for g in 0..constants.len() - 1 {
        caps.push(set.gap_capacity(&constants[g], &constants[g + 1])?);
    }
    let locations = 2 * (constants.len() - 1) + 1;
    Ok(ArrangementIter {
        loc: Some(vec![0usize; atoms.len()]),
        atoms,
        constants,
        caps,
        locations,
        buffer: Vec::new().into_iter(),
        started: false,
    })
}

/// Verdict of the decision operations. SAT witnesses re-check under
/// `eval_formula`; countermodels re-check under `models`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Sat(BTreeMap<String, Value>),
    Unsat,
    Entailed,
    NotEntailed(BTreeMap<String, Value>),
}

impl Verdict {
    pub fn is_positive(&self) -> bool {
        matches!(self, Verdict::Sat(_) | Verdict::Entailed)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Sat(w) => {
                write!(f, "SAT")?;
                for (name, v) in w {
                    write!(f, " {name}={v}")?;
                }
                Ok(())
            }
            Verdict::Unsat => write!(f, "UNSAT"),
            Verdict::Entailed => write!(f, "ENTAILED"),
            Verdict::NotEntailed(w) => {
                write!(f, "NOT-ENTAILED countermodel")?;
                for (name, v) in w {
                    write!(f, " {name}={v}")?;
                }
                Ok(())
            }
        }
    }
}

fn gather(
    sentences: &[&Formula],
    config: &DecideConfig,
) -> Result<(Vec<String>, Vec<Value>), DecideError> {
    let mut atoms: BTreeSet<String> = BTreeSet::new();
    let mut constants: BTreeSet<Value> = BTreeSet::new();
    for s in sentences {
        if !s.is_propositional() {
            return Err(DecideError::NotPropositional(s.to_string()));
        }
        atoms.extend(s.preds_used().into_keys());
        constants.extend(s.truth_constants());
    }
    if atoms.len() > config.atom_bound {
        return Err(DecideError::AtomBound {
            count: atoms.len(),
            bound: config.atom_bound,
        });
    }
    Ok((atoms.into_iter().collect(), constants.into_iter().collect()))
}

fn recheck_witness(
    witness: &BTreeMap<String, Value>,
    zero_on: &[&Formula],
    nonzero_on: &[&Formula],
) -> Result<(), DecideError> {
    let has_delta = zero_on.iter().chain(nonzero_on).any(|f| f.has_delta());
    let m = Structure::propositional(witness, has_delta);
    let env = Environment::new();
    for s in zero_on {
        let v = eval_formula(&m, s, &env).map_err(|e| DecideError::WitnessRecheck(e.to_string()))?;
        if !v.is_zero() {
            return Err(DecideError::WitnessRecheck(s.to_string()));
        }
    }
    for s in nonzero_on {
        let v = eval_formula(&m, s, &env).map_err(|e| DecideError::WitnessRecheck(e.to_string()))?;
        if v.is_zero() {
            return Err(DecideError::WitnessRecheck(s.to_string()));
        }
    }
    Ok(())
}

/// Satisfiability of a finite propositional theory over `(set, A)`.
pub fn sat(
    theory: &[Formula],
    set: &GoedelSet,
    constants: &ConstantFamily,
    config: &DecideConfig,
) -> Result<Verdict, DecideError> {
    let _ = constants; // A membership is enforced when formulas are built
    let refs: Vec<&Formula> = theory.iter().collect();
    let (atoms, consts) = gather(&refs, config)?;
    for arr in enumerate_arrangements(&atoms, &consts, set, config)? {
        let zero = Sym::Const(0);
        let all_zero = theory
            .iter()
            .map(|s| eval_symbolic(s, &arr))
            .try_fold(true, |acc, s| s.map(|s| acc && s == zero))?;
        if all_zero {
            let witness = arr.realize(set)?;
            recheck_witness(&witness, &refs, &[])?;
            return Ok(Verdict::Sat(witness));
        }
    }
    Ok(Verdict::Unsat)
}

/// The arrangements whose realizations model the theory (the model classes).
pub fn satisfying_arrangements(
    theory: &[Formula],
    set: &GoedelSet,
    config: &DecideConfig,
) -> Result<Vec<Arrangement>, DecideError> {
    let refs: Vec<&Formula> = theory.iter().collect();
    let (atoms, consts) = gather(&refs, config)?;
    let mut out = Vec::new();
    for arr in enumerate_arrangements(&atoms, &consts, set, config)? {
        let zero = Sym::Const(0);
        let all_zero = theory
            .iter()
            .map(|s| eval_symbolic(s, &arr))
            .try_fold(true, |acc, s| s.map(|s| acc && s == zero))?;
        if all_zero {
            out.push(arr);
        }
    }
    Ok(out)
}

/// Semantic entailment `T ⊨ φ` over `(set, A)`: every arrangement modelling
/// `T` must give `φ` the value 0; otherwise a realized countermodel is
/// returned.
pub fn entails(
    theory: &[Formula],
    goal: &Formula,
    set: &GoedelSet,
    constants: &ConstantFamily,
    config: &DecideConfig,
) -> Result<Verdict, DecideError> {
    let _ = constants;
    let mut refs: Vec<&Formula> = theory.iter().collect();
    refs.push(goal);
    let (atoms, consts) = gather(&refs, config)?;
    for arr in enumerate_arrangements(&atoms, &consts, set, config)? {
        let zero = Sym::Const(0);
        let theory_zero = theory
            .iter()
            .map(|s| eval_symbolic(s, &arr))
            .try_fold(true, |acc, s| s.map(|s| acc && s == zero))?;
        if theory_zero && eval_symbolic(goal, &arr)? != zero {
            let witness = arr.realize(set)?;
            let zero_on: Vec<&Formula> = theory.iter().collect();
            recheck_witness(&witness, &zero_on, &[goal])?;
            return Ok(Verdict::NotEntailed(witness));
        }
    }
    Ok(Verdict::Entailed)
}

/// Approximate entailment ladder: the verdict of `T ⊨ r̄ → φ` for each
/// requested `r ∈ A ∪ {1}`.
pub fn approx_entails(
    theory: &[Formula],
    goal: &Formula,
    set: &GoedelSet,
    constants: &ConstantFamily,
    rs: &[Value],
    config: &DecideConfig,
) -> Result<Vec<(Value, Verdict)>, DecideError> {
    let mut out = Vec::with_capacity(rs.len());
    for r in rs {
        if !constants.member_or_one(r) {
            return Err(DecideError::RNotAllowed(r.clone()));
        }
        let guarded = Formula::to(Formula::TruthConst(r.clone()), goal.clone());
        out.push((
            r.clone(),
            entails(theory, &guarded, set, constants, config)?,
        ));
    }
    Ok(out)
}

/// Independent brute-force satisfiability oracle: concrete assignments drawn
/// from the mentioned constants, 0, 1, and up to `|atoms|` members of the
/// value set per gap, enumerated from the set itself. Must agree with [`sat`]
/// on SAT/UNSAT.
pub fn oracle_sat(
    theory: &[Formula],
    set: &GoedelSet,
    constants: &ConstantFamily,
    config: &DecideConfig,
) -> Result<Verdict, DecideError> {
    let _ = constants;
    let refs: Vec<&Formula> = theory.iter().collect();
    let (atoms, consts) = gather(&refs, config)?;
    let mut candidates: BTreeSet<Value> = consts.iter().cloned().collect();
    candidates.insert(Value::zero());
    candidates.insert(Value::one());
    for c in &candidates {
        if !set.member(c) {
            return Err(DecideError::ConstantOutsideSet(c.clone()));
        }
    }
    let anchors: Vec<Value> = candidates.iter().cloned().collect();
    for g in 0..anchors.len() - 1 {
        let cap = set.gap_capacity(&anchors[g], &anchors[g + 1])?;
        let want = match cap {
            Capacity::Finite(k) => std::cmp::min(k as usize, atoms.len()),
            Capacity::Infinite => atoms.len(),
        };
        if want > 0 {
            if let Some(picks) = set.pick_in_gap(&anchors[g], &anchors[g + 1], want)? {
                candidates.extend(picks);
            }
        }
    }
    let candidates: Vec<Value> = candidates.into_iter().collect();
    let has_delta = theory.iter().any(|f| f.has_delta());
    let env = Environment::new();

    let mut assignment = vec![0usize; atoms.len()];
    loop {
        let witness: BTreeMap<String, Value> = atoms
            .iter()
            .zip(&assignment)
            .map(|(a, ix)| (a.clone(), candidates[*ix].clone()))
            .collect();
        let m = Structure::propositional(&witness, has_delta);
        let mut all_zero = true;
        for s in theory {
            let v = eval_formula(&m, s, &env)
                .map_err(|e| DecideError::NotPropositional(e.to_string()))?;
            if !v.is_zero() {
                all_zero = false;
                break;
            }
        }
        if all_zero {
            return Ok(Verdict::Sat(witness));
        }
        // odometer
        let mut i = assignment.len();
        loop {
            if i == 0 {
                return Ok(Verdict::Unsat);
            }
            i -= 1;
            assignment[i] += 1;
            if assignment[i] < candidates.len() {
                break;
            }
            assignment[i] = 0;
        }
        if atoms.is_empty() {
            return Ok(Verdict::Unsat);
        }
    }
}
