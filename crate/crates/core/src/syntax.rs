//! Signatures, terms, formulas and theories for the first-order language
//! with truth constants and the Baaz projection.
//!
//! Derived connectives (`~`, `|`, `=>`, `<->`) are expanded into the
//! primitive stock `{and, to, bot, truth constants, delta, forall, exists}`
//! at parse time; the evaluator only ever sees primitives.

use crate::values::{ClosedForm, ConstantFamily, Value};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("{pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{name}` expects {expected} arguments, got {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("truth constant #{0} is not in A ∪ {{0,1}}")]
    ConstantNotAllowed(Value),
    #[error("delta is not enabled in this signature")]
    DeltaDisabled,
    #[error("variable `{0}` shadows an enclosing binder")]
    Shadowing(String),
    #[error("expected a sentence, found free variables: {0:?}")]
    FreeVariables(Vec<String>),
    #[error("duplicate symbol `{0}` in signature")]
    DuplicateSymbol(String),
    #[error("family parameter must be >= 1")]
    BadFamilyParameter,
}

/// First-order terms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn free_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::App(_, args) => args.iter().for_each(|t| t.free_vars(out)),
        }
    }

    pub fn const_syms(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(_) => {}
            Term::Const(c) => {
                out.insert(c.clone());
            }
            Term::App(_, args) => args.iter().for_each(|t| t.const_syms(out)),
        }
    }

    fn subst(&self, var: &str, repl: &Term) -> Term {
        match self {
            Term::Var(v) if v == var => repl.clone(),
            Term::Var(_) | Term::Const(_) => self.clone(),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|t| t.subst(var, repl)).collect())
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{c}"),
            Term::App(g, args) => {
                write!(f, "{g}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Formulas over a constant payload `C`; the ordinary formula type fixes
/// `C = Value`, parametric family templates use [`ConstExpr`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula<C = Value> {
    Bot,
    TruthConst(C),
    Atom(String, Vec<Term>),
    And(Box<Formula<C>>, Box<Formula<C>>),
    To(Box<Formula<C>>, Box<Formula<C>>),
    Delta(Box<Formula<C>>),
    Forall(String, Box<Formula<C>>),
    Exists(String, Box<Formula<C>>),
}

/// A truth-constant slot in a family template: fixed, or a closed form in
/// the family parameter `n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstExpr {
    Fixed(Value),
    Form(ClosedForm),
}

impl fmt::Display for ConstExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstExpr::Fixed(v) => write!(f, "{v}"),
            ConstExpr::Form(form) => write!(f, "({form})"),
        }
    }
}

pub type FormulaTemplate = Formula<ConstExpr>;

impl<C: Clone + Ord> Formula<C> {
    pub fn and(a: Formula<C>, b: Formula<C>) -> Formula<C> {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn to(a: Formula<C>, b: Formula<C>) -> Formula<C> {
        Formula::To(Box::new(a), Box::new(b))
    }

    /// `~a` expands to `a -> bot`.
    #[allow(clippy::should_implement_trait)] // constructor, not arithmetic negation
    pub fn neg(a: Formula<C>) -> Formula<C> {
        Formula::to(a, Formula::Bot)
    }

    /// `a | b` expands to `((a -> b) -> b) & ((b -> a) -> a)`.
    pub fn or(a: Formula<C>, b: Formula<C>) -> Formula<C> {
        Formula::and(
            Formula::to(Formula::to(a.clone(), b.clone()), b.clone()),
            Formula::to(Formula::to(b, a.clone()), a),
        )
    }

    /// `a => b` expands to `(b -> a) -> b`.
    pub fn strongimp(a: Formula<C>, b: Formula<C>) -> Formula<C> {
        Formula::to(Formula::to(b.clone(), a), b)
    }

    /// `a <-> b` expands to `(a -> b) & (b -> a)`.
    pub fn iff(a: Formula<C>, b: Formula<C>) -> Formula<C> {
        Formula::and(
            Formula::to(a.clone(), b.clone()),
            Formula::to(b, a),
        )
    }

    pub fn delta(a: Formula<C>) -> Formula<C> {
        Formula::Delta(Box::new(a))
    }

    pub fn forall(x: impl Into<String>, a: Formula<C>) -> Formula<C> {
        Formula::Forall(x.into(), Box::new(a))
    }

    pub fn exists(x: impl Into<String>, a: Formula<C>) -> Formula<C> {
        Formula::Exists(x.into(), Box::new(a))
    }

    pub fn atom0(name: impl Into<String>) -> Formula<C> {
        Formula::Atom(name.into(), Vec::new())
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        fn walk<C: Clone + Ord>(f: &Formula<C>, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match f {
                Formula::Bot | Formula::TruthConst(_) => {}
                Formula::Atom(_, args) => {
                    let mut vars = BTreeSet::new();
                    args.iter().for_each(|t| t.free_vars(&mut vars));
                    out.extend(vars.into_iter().filter(|v| !bound.contains(v)));
                }
                Formula::And(a, b) | Formula::To(a, b) => {
                    walk(a, bound, out);
                    walk(b, bound, out);
                }
                Formula::Delta(a) => walk(a, bound, out),
                Formula::Forall(x, a) | Formula::Exists(x, a) => {
                    bound.push(x.clone());
                    walk(a, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// No quantifiers and only nullary atoms.
    pub fn is_propositional(&self) -> bool {
        match self {
            Formula::Bot | Formula::TruthConst(_) => true,
            Formula::Atom(_, args) => args.is_empty(),
            Formula::And(a, b) | Formula::To(a, b) => {
                a.is_propositional() && b.is_propositional()
            }
            Formula::Delta(a) => a.is_propositional(),
            Formula::Forall(..) | Formula::Exists(..) => false,
        }
    }

    pub fn has_delta(&self) -> bool {
        match self {
            Formula::Bot | Formula::TruthConst(_) | Formula::Atom(..) => false,
            Formula::And(a, b) | Formula::To(a, b) => a.has_delta() || b.has_delta(),
            Formula::Delta(_) => true,
            Formula::Forall(_, a) | Formula::Exists(_, a) => a.has_delta(),
        }
    }

    /// All subformulas in post-order, duplicates removed.
    pub fn subformulas(&self) -> Vec<Formula<C>> {
        fn walk<C: Clone + Ord>(f: &Formula<C>, seen: &mut BTreeSet<Formula<C>>, out: &mut Vec<Formula<C>>) {
            match f {
                Formula::Bot | Formula::TruthConst(_) | Formula::Atom(..) => {}
                Formula::And(a, b) | Formula::To(a, b) => {
                    walk(a, seen, out);
                    walk(b, seen, out);
                }
                Formula::Delta(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => {
                    walk(a, seen, out)
                }
            }
            if seen.insert(f.clone()) {
                out.push(f.clone());
            }
        }
        let mut out = Vec::new();
        walk(self, &mut BTreeSet::new(), &mut out);
        out
    }

    /// Predicate symbols used, with arities.
    pub fn preds_used(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        self.visit_atoms(&mut |name, args| {
            out.insert(name.to_string(), args.len());
        });
        out
    }

    fn visit_atoms(&self, f: &mut impl FnMut(&str, &[Term])) {
        match self {
            Formula::Bot | Formula::TruthConst(_) => {}
            Formula::Atom(name, args) => f(name, args),
            Formula::And(a, b) | Formula::To(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
            Formula::Delta(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => a.visit_atoms(f),
        }
    }

    /// Object-constant symbols appearing in terms.
    pub fn const_syms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |_, args| {
            args.iter().for_each(|t| t.const_syms(&mut out));
        });
        out
    }

    /// Substitutes `repl` for free occurrences of `var`. Callers are expected
    /// to have checked substitutability (see [`substitutable`]).
    pub fn subst_var(&self, var: &str, repl: &Term) -> Formula<C> {
        match self {
            Formula::Bot | Formula::TruthConst(_) => self.clone(),
            Formula::Atom(name, args) => Formula::Atom(
                name.clone(),
                args.iter().map(|t| t.subst(var, repl)).collect(),
            ),
            Formula::And(a, b) => Formula::and(a.subst_var(var, repl), b.subst_var(var, repl)),
            Formula::To(a, b) => Formula::to(a.subst_var(var, repl), b.subst_var(var, repl)),
            Formula::Delta(a) => Formula::delta(a.subst_var(var, repl)),
            Formula::Forall(x, a) if x != var => {
                Formula::forall(x.clone(), a.subst_var(var, repl))
            }
            Formula::Exists(x, a) if x != var => {
                Formula::exists(x.clone(), a.subst_var(var, repl))
            }
            Formula::Forall(..) | Formula::Exists(..) => self.clone(),
        }
    }
}

impl Formula<Value> {
    /// Truth constants occurring in the formula (not counting `bot`).
    pub fn truth_constants(&self) -> BTreeSet<Value> {
        let mut out = BTreeSet::new();
        fn walk(f: &Formula, out: &mut BTreeSet<Value>) {
            match f {
                Formula::TruthConst(v) => {
                    out.insert(v.clone());
                }
                Formula::Bot | Formula::Atom(..) => {}
                Formula::And(a, b) | Formula::To(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Formula::Delta(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => walk(a, out),
            }
        }
        walk(self, &mut out);
        out
    }

    /// Views the node as a truth constant: `bot` counts as `1`.
    pub fn as_const_value(&self) -> Option<Value> {
        match self {
            Formula::Bot => Some(Value::one()),
            Formula::TruthConst(v) => Some(v.clone()),
            _ => None,
        }
    }
}

impl FormulaTemplate {
    /// Evaluates every closed-form constant at parameter `n`.
    pub fn instantiate(&self, n: u64) -> Formula<Value> {
        match self {
            Formula::Bot => Formula::Bot,
            Formula::TruthConst(ConstExpr::Fixed(v)) => Formula::TruthConst(v.clone()),
            Formula::TruthConst(ConstExpr::Form(f)) => Formula::TruthConst(f.eval(n)),
            Formula::Atom(p, args) => Formula::Atom(p.clone(), args.clone()),
            Formula::And(a, b) => Formula::and(a.instantiate(n), b.instantiate(n)),
            Formula::To(a, b) => Formula::to(a.instantiate(n), b.instantiate(n)),
            Formula::Delta(a) => Formula::delta(a.instantiate(n)),
            Formula::Forall(x, a) => Formula::forall(x.clone(), a.instantiate(n)),
            Formula::Exists(x, a) => Formula::exists(x.clone(), a.instantiate(n)),
        }
    }
}

/// Whether `term` can be substituted for `var` in `f` without any of its
/// variables being captured by a binder.
pub fn substitutable<C: Clone + Ord>(term: &Term, var: &str, f: &Formula<C>) -> bool {
    let mut term_vars = BTreeSet::new();
    term.free_vars(&mut term_vars);
    fn walk<C: Clone + Ord>(f: &Formula<C>, var: &str, term_vars: &BTreeSet<String>) -> bool {
        match f {
            Formula::Bot | Formula::TruthConst(_) | Formula::Atom(..) => true,
            Formula::And(a, b) | Formula::To(a, b) => {
                walk(a, var, term_vars) && walk(b, var, term_vars)
            }
            Formula::Delta(a) => walk(a, var, term_vars),
            Formula::Forall(x, a) | Formula::Exists(x, a) => {
                if x == var {
                    true // no free occurrences below
                } else if term_vars.contains(x) && a.free_vars().contains(var) {
                    false
                } else {
                    walk(a, var, term_vars)
                }
            }
        }
    }
    walk(f, var, &term_vars)
}

// Printing: precedence levels, tightest first:
//   atoms/delta(..) > ~ (6) > & (5) > | (4) > -> (3) > => (2) > <-> (1) > quantifiers (0)
// Only `~` is re-sugared on output; other derived connectives print in their
// expanded form, which re-parses to the same tree.
impl<C: Clone + Ord + fmt::Display> Formula<C> {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        match self {
            Formula::Bot => write!(f, "bot"),
            Formula::TruthConst(v) => write!(f, "#{v}"),
            Formula::Atom(p, args) => {
                write!(f, "{p}")?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
            Formula::Delta(a) => {
                write!(f, "delta(")?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")
            }
            Formula::To(a, b) if **b == Formula::Bot => {
                // ~a
                if min > 6 {
                    write!(f, "(")?;
                    write!(f, "~")?;
                    a.fmt_prec(f, 6)?;
                    write!(f, ")")
                } else {
                    write!(f, "~")?;
                    a.fmt_prec(f, 6)
                }
            }
            Formula::To(a, b) => {
                let parens = min > 3;
                if parens {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, 4)?;
                write!(f, " -> ")?;
                b.fmt_prec(f, 3)?;
                if parens {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Formula::And(a, b) => {
                let parens = min > 5;
                if parens {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, 6)?;
                write!(f, " & ")?;
                b.fmt_prec(f, 5)?;
                if parens {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Formula::Forall(x, a) | Formula::Exists(x, a) => {
                let kw = if matches!(self, Formula::Forall(..)) {
                    "forall"
                } else {
                    "exists"
                };
                let parens = min > 0;
                if parens {
                    write!(f, "(")?;
                }
                write!(f, "{kw} {x}. ")?;
                a.fmt_prec(f, 0)?;
                if parens {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl<C: Clone + Ord + fmt::Display> fmt::Display for Formula<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// The vocabulary a formula is read against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub preds: BTreeMap<String, usize>,
    pub funcs: BTreeMap<String, usize>,
    pub consts: BTreeSet<String>,
    pub delta_enabled: bool,
    /// The nullary-connective set A.
    pub constants: ConstantFamily,
}

impl Signature {
    pub fn new(constants: ConstantFamily, delta_enabled: bool) -> Self {
        Signature {
            preds: BTreeMap::new(),
            funcs: BTreeMap::new(),
            consts: BTreeSet::new(),
            delta_enabled,
            constants,
        }
    }

    /// Propositional signature: nullary predicates only.
    pub fn propositional(
        atoms: &[&str],
        constants: ConstantFamily,
        delta_enabled: bool,
    ) -> Self {
        let mut sig = Signature::new(constants, delta_enabled);
        for a in atoms {
            sig.preds.insert((*a).to_string(), 0);
        }
        sig
    }

    pub fn with_pred(mut self, name: &str, arity: usize) -> Result<Self, SyntaxError> {
        self.check_fresh(name)?;
        self.preds.insert(name.to_string(), arity);
        Ok(self)
    }

    pub fn with_func(mut self, name: &str, arity: usize) -> Result<Self, SyntaxError> {
        self.check_fresh(name)?;
        self.funcs.insert(name.to_string(), arity);
        Ok(self)
    }

    pub fn with_const(mut self, name: &str) -> Result<Self, SyntaxError> {
        self.check_fresh(name)?;
        self.consts.insert(name.to_string());
        Ok(self)
    }

    fn check_fresh(&self, name: &str) -> Result<(), SyntaxError> {
        if self.preds.contains_key(name)
            || self.funcs.contains_key(name)
            || self.consts.contains(name)
        {
            return Err(SyntaxError::DuplicateSymbol(name.to_string()));
        }
        Ok(())
    }

    /// Truth constants range over `A ∪ {0, 1}`.
    pub fn allows_truth_constant(&self, v: &Value) -> bool {
        v.is_zero() || v.is_one() || self.constants.member(v)
    }

    /// Structural checks for programmatically built formulas: arities,
    /// truth-constant membership, delta flag, binder shadowing.
    pub fn check_formula<C>(&self, f: &Formula<C>) -> Result<(), SyntaxError>
    where
        C: Clone + Ord,
        Formula<C>: CheckConst,
    {
        fn walk<C: Clone + Ord>(
            sig: &Signature,
            f: &Formula<C>,
            bound: &mut Vec<String>,
        ) -> Result<(), SyntaxError>
        where
            Formula<C>: CheckConst,
        {
            match f {
                Formula::Bot => Ok(()),
                Formula::TruthConst(_) => f.check_const(sig),
                Formula::Atom(p, args) => {
                    let arity = *sig
                        .preds
                        .get(p)
                        .ok_or_else(|| SyntaxError::UnknownSymbol(p.clone()))?;
                    if args.len() != arity {
                        return Err(SyntaxError::Arity {
                            name: p.clone(),
                            expected: arity,
                            got: args.len(),
                        });
                    }
                    for t in args {
                        sig.check_term(t)?;
                    }
                    Ok(())
                }
                Formula::And(a, b) | Formula::To(a, b) => {
                    walk(sig, a, bound)?;
                    walk(sig, b, bound)
                }
                Formula::Delta(a) => {
                    if !sig.delta_enabled {
                        return Err(SyntaxError::DeltaDisabled);
                    }
                    walk(sig, a, bound)
                }
                Formula::Forall(x, a) | Formula::Exists(x, a) => {
                    if bound.contains(x) {
                        return Err(SyntaxError::Shadowing(x.clone()));
                    }
                    bound.push(x.clone());
                    let r = walk(sig, a, bound);
                    bound.pop();
                    r
                }
            }
        }
        walk(self, f, &mut Vec::new())
    }

    fn check_term(&self, t: &Term) -> Result<(), SyntaxError> {
        match t {
            Term::Var(_) => Ok(()),
            Term::Const(c) => {
                if self.consts.contains(c) {
                    Ok(())
                } else {
                    Err(SyntaxError::UnknownSymbol(c.clone()))
                }
            }
            Term::App(f, args) => {
                let arity = *self
                    .funcs
                    .get(f)
                    .ok_or_else(|| SyntaxError::UnknownSymbol(f.clone()))?;
                if args.len() != arity {
                    return Err(SyntaxError::Arity {
                        name: f.clone(),
                        expected: arity,
                        got: args.len(),
                    });
                }
                args.iter().try_for_each(|t| self.check_term(t))
            }
        }
    }
}

/// Truth-constant admissibility, per payload type.
pub trait CheckConst {
    fn check_const(&self, sig: &Signature) -> Result<(), SyntaxError>;
}

impl CheckConst for Formula<Value> {
    fn check_const(&self, sig: &Signature) -> Result<(), SyntaxError> {
        if let Formula::TruthConst(v) = self {
            if !sig.allows_truth_constant(v) {
                return Err(SyntaxError::ConstantNotAllowed(v.clone()));
            }
        }
        Ok(())
    }
}

impl CheckConst for FormulaTemplate {
    fn check_const(&self, sig: &Signature) -> Result<(), SyntaxError> {
        if let Formula::TruthConst(ConstExpr::Fixed(v)) = self {
            if !sig.allows_truth_constant(v) {
                return Err(SyntaxError::ConstantNotAllowed(v.clone()));
            }
        }
        // closed forms are checked per instance at instantiation time
        Ok(())
    }
}

/// A theory: base sentences plus parametric families with one integer
/// parameter `n >= 1` and closed-form truth constants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theory {
    pub sentences: Vec<Formula<Value>>,
    pub families: Vec<FormulaTemplate>,
}

impl Theory {
    pub fn finite(sentences: Vec<Formula<Value>>) -> Self {
        Theory {
            sentences,
            families: Vec::new(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.families.is_empty()
    }

    /// Instantiates every family for parameters `1..=n` and returns the full
    /// sentence list: base sentences first, then each family in parameter
    /// order. Fails if an instantiated constant leaves `A ∪ {0,1}`.
    pub fn instantiate(&self, n: u64, sig: &Signature) -> Result<Vec<Formula<Value>>, SyntaxError> {
        if n < 1 && !self.families.is_empty() {
            return Err(SyntaxError::BadFamilyParameter);
        }
        let mut out = self.sentences.clone();
        for fam in &self.families {
            for m in 1..=n {
                let inst = fam.instantiate(m);
                sig.check_formula(&inst)?;
                out.push(inst);
            }
        }
        Ok(out)
    }
}
