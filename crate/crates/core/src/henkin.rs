//! Desk-scale completion machinery: pair-stage completion of a satisfiable
//! propositional theory, witness axioms for universal formulas, and the
//! canonical-model construction through the Lindenbaum quotient and the
//! unit-interval embedding.
//!
//! Every "does not prove" condition is rendered semantically (via the
//! decision procedure), since provability is not decidable here; reports and
//! traces label the relation accordingly. The guard sentence is a positive
//! truth constant, so "the extension still fails to entail the guard" is
//! exactly "the extension still has a model", which the procedure tracks as
//! a shrinking set of satisfying arrangements.

use crate::algebra::{self, AlgebraError};
use crate::decide::{self, Arrangement, DecideConfig, DecideError, Sym};
use crate::semantics::{self, SemanticsError, Structure, ValueTable};
use crate::syntax::{Formula, Term};
use crate::values::{ConstantFamily, GoedelSet, Value};
use rand::prelude::*;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HenkinError {
    #[error("the theory is unsatisfiable")]
    TheoryUnsatisfiable,
    #[error("the guard {0} is already entailed at stage 0")]
    GuardEntailed(Formula),
    #[error("the constant family has no minimum to serve as the guard")]
    NoGuardMinimum,
    #[error("witness axiom needs r > s, got r = {r}, s = {s}")]
    RNotAboveS { r: Value, s: Value },
    #[error("{0} is not in A ∪ {{1}}")]
    RNotInFamily(Value),
    #[error("variable `{0}` is not free in the formula")]
    VarNotFree(String),
    #[error("constant `{0}` is not fresh for the formula")]
    ConstantNotFresh(String),
    #[error("canonical model fails its certificate: `{sentence}` has value {value}")]
    CertificateFailed { sentence: Formula, value: Value },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Decide(#[from] DecideError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// What happened at one pair stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StageDecision {
    /// Both directions were already entailed; nothing added.
    AlreadyComplete,
    /// Added `theta -> psi`.
    AddedForward,
    /// Added `psi -> theta`.
    AddedBackward,
}

#[derive(Debug, Clone)]
pub struct Stage {
    pub theta: Formula,
    pub psi: Formula,
    pub decision: StageDecision,
    /// Satisfying arrangements surviving after the stage; positive at every
    /// stage (the guard stays unentailed).
    pub models_remaining: usize,
}

/// Full record of a completion run.
#[derive(Debug, Clone)]
pub struct CompletionTrace {
    pub guard: Formula,
    pub initial: Vec<Formula>,
    pub stages: Vec<Stage>,
    /// The initial theory plus everything added, complete over the universe.
    pub final_theory: Vec<Formula>,
}

impl fmt::Display for CompletionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "guard: {}", self.guard)?;
        writeln!(f, "relation: decided semantic entailment (not provability)")?;
        for (i, s) in self.stages.iter().enumerate() {
            let what = match s.decision {
                StageDecision::AlreadyComplete => "already complete".to_string(),
                StageDecision::AddedForward => format!("added {} -> {}", s.theta, s.psi),
                StageDecision::AddedBackward => format!("added {} -> {}", s.psi, s.theta),
            };
            writeln!(
                f,
                "stage {}: pair ({}, {}): {what}; {} model classes remain",
                i + 1,
                s.theta,
                s.psi,
                s.models_remaining
            )?;
        }
        writeln!(f, "final theory ({} sentences):", self.final_theory.len())?;
        for s in &self.final_theory {
            writeln!(f, "  {s}")?;
        }
        Ok(())
    }
}

/// Extends a satisfiable finite propositional theory to one complete over
/// the sentence universe, one unordered pair per stage in lexicographic
/// order of the printed formulas. At each stage the forward implication is
/// added if the result still fails to entail the guard, else the backward
/// one; the guard is the least constant of `A` (`bot` when `A` is empty).
pub fn complete_theory(
    theory: &[Formula],
    universe: &[Formula],
    set: &GoedelSet,
    constants: &ConstantFamily,
    config: &DecideConfig,
) -> Result<CompletionTrace, HenkinError> {
    let guard = if constants.is_empty() {
        Formula::Bot
    } else {
        let min = constants.minimum().ok_or(HenkinError::NoGuardMinimum)?;
        Formula::TruthConst(min)
    };
    // The guard denotes a positive value, so entailing it means having no
    // models at all; a satisfiable theory never entails it.
    match decide::sat(theory, set, constants, config)? {
        decide::Verdict::Sat(_) => {}
        _ => return Err(HenkinError::TheoryUnsatisfiable),
    }
    if decide::entails(theory, &guard, set, constants, config)?.is_positive() {
        return Err(HenkinError::GuardEntailed(guard));
    }

    // All atoms and constants the run can ever mention.
    let mut atoms: BTreeSet<String> = BTreeSet::new();
    let mut consts: BTreeSet<Value> = BTreeSet::new();
    for f in theory.iter().chain(universe) {
        atoms.extend(f.preds_used().into_keys());
        consts.extend(f.truth_constants());
    }
    consts.extend(guard.truth_constants());
    let atoms: Vec<String> = atoms.into_iter().collect();
    let consts: Vec<Value> = consts.into_iter().collect();

    let zero = Sym::Const(0);
    let all_zero = |arr: &Arrangement, fs: &[&Formula]| -> Result<bool, DecideError> {
        for f in fs {
            if decide::eval_symbolic(f, arr)? != zero {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let theory_refs: Vec<&Formula> = theory.iter().collect();
    let mut models: Vec<Arrangement> = Vec::new();
    for arr in decide::enumerate_arrangements(&atoms, &consts, set, config)? {
        if all_zero(&arr, &theory_refs)? {
            models.push(arr);
        }
    }

    let mut pairs: Vec<(Formula, Formula)> = Vec::new();
    let mut sorted: Vec<Formula> = universe.to_vec();
    sorted.sort_by_key(|f| f.to_string());
    sorted.dedup();
    for (i, theta) in sorted.iter().enumerate() {
        for psi in sorted.iter().skip(i + 1) {
            pairs.push((theta.clone(), psi.clone()));
        }
    }

    let mut final_theory: Vec<Formula> = theory.to_vec();
    let mut stages = Vec::with_capacity(pairs.len());
    for (theta, psi) in pairs {
        let fwd = Formula::to(theta.clone(), psi.clone());
        let bwd = Formula::to(psi.clone(), theta.clone());
        let mut fwd_all = true;
        let mut bwd_all = true;
        let mut fwd_some = false;
        for arr in &models {
            let f0 = decide::eval_symbolic(&fwd, arr)? == zero;
            let b0 = decide::eval_symbolic(&bwd, arr)? == zero;
            fwd_all &= f0;
            bwd_all &= b0;
            fwd_some |= f0;
        }
        let keep_models = |keep: &Formula, models: &mut Vec<Arrangement>| -> Result<(), DecideError> {
            let mut kept = Vec::with_capacity(models.len());
            for arr in models.drain(..) {
                if decide::eval_symbolic(keep, &arr)? == zero {
                    kept.push(arr);
                }
            }
            *models = kept;
            Ok(())
        };
        let decision = if fwd_all && bwd_all {
            StageDecision::AlreadyComplete
        } else if fwd_some {
            // the forward extension keeps a model, so it cannot entail the
            // (positive-valued) guard
            keep_models(&fwd, &mut models)?;
            final_theory.push(fwd);
            StageDecision::AddedForward
        } else {
            // every surviving model satisfies one of the two directions
            keep_models(&bwd, &mut models)?;
            final_theory.push(bwd);
            StageDecision::AddedBackward
        };
        debug_assert!(!models.is_empty(), "guard preservation broken");
        stages.push(Stage {
            theta,
            psi,
            decision,
            models_remaining: models.len(),
        });
    }
    Ok(CompletionTrace {
        guard,
        initial: theory.to_vec(),
        stages,
        final_theory,
    })
}

/// Builds the witness axiom
/// `(r-bar -> forall x phi(x)) | (phi(c) -> s-bar)`
/// for a fresh constant `c`; requires `r > s` with both in `A ∪ {1}` and `x`
/// free in `phi`.
pub fn build_theta(
    phi: &Formula,
    var: &str,
    r: &Value,
    s: &Value,
    fresh: &str,
    constants: &ConstantFamily,
) -> Result<Formula, HenkinError> {
    if r <= s {
        return Err(HenkinError::RNotAboveS {
            r: r.clone(),
            s: s.clone(),
        });
    }
    for x in [r, s] {
        if !constants.member_or_one(x) {
            return Err(HenkinError::RNotInFamily(x.clone()));
        }
    }
    if !phi.free_vars().contains(var) {
        return Err(HenkinError::VarNotFree(var.to_string()));
    }
    if phi.const_syms().contains(fresh) {
        return Err(HenkinError::ConstantNotFresh(fresh.to_string()));
    }
    let witness = phi.subst_var(var, &Term::Const(fresh.to_string()));
    Ok(Formula::or(
        Formula::to(
            Formula::TruthConst(r.clone()),
            Formula::forall(var, phi.clone()),
        ),
        Formula::to(witness, Formula::TruthConst(s.clone())),
    ))
}

/// The canonical structure of a theory complete over the universe: the
/// Lindenbaum quotient embedded into the unit interval, with each nullary
/// predicate interpreted by the image of its class. The certificate checks
/// that the structure models the whole theory.
pub struct CanonicalModel {
    pub structure: Structure,
    pub lindenbaum: algebra::Lindenbaum,
    pub embedding: algebra::EmbeddingMap,
}

pub fn canonical_model(
    theory: &[Formula],
    universe: &[Formula],
    set: &GoedelSet,
    constants: &ConstantFamily,
    config: &DecideConfig,
) -> Result<CanonicalModel, HenkinError> {
    let lin = algebra::lindenbaum(theory, universe, set, constants, config)?;
    let map = algebra::embed(&lin.algebra, constants)?;
    let mut atoms: BTreeMap<String, Value> = BTreeMap::new();
    for f in universe {
        for (name, arity) in f.preds_used() {
            if arity == 0 {
                let class = lin.class_of[&Formula::atom0(name.clone())];
                atoms.insert(name, map.image(class).clone());
            }
        }
    }
    let delta = theory.iter().chain(universe).any(Formula::has_delta);
    let structure = Structure {
        elements: vec!["t0".to_string()],
        preds: atoms
            .into_iter()
            .map(|(name, v)| {
                (
                    name,
                    ValueTable {
                        arity: 0,
                        data: vec![v],
                    },
                )
            })
            .collect(),
        funcs: BTreeMap::new(),
        consts: BTreeMap::new(),
        delta_enabled: delta,
    };
    match semantics::models(&structure, theory)? {
        semantics::ModelCheck::Models => {}
        semantics::ModelCheck::Fails { sentence, value } => {
            return Err(HenkinError::CertificateFailed { sentence, value })
        }
    }
    Ok(CanonicalModel {
        structure,
        lindenbaum: lin,
        embedding: map,
    })
}

/// The completion universe used by the pipeline: the subformula closure of
/// the theory, with the constants 0 and 1 adjoined (the Lindenbaum step adds
/// occurring truth constants itself).
pub fn closure_universe(theory: &[Formula]) -> Vec<Formula> {
    let mut out: Vec<Formula> = Vec::new();
    for s in theory {
        out.extend(s.subformulas());
        for r in s.truth_constants() {
            out.push(Formula::TruthConst(r));
        }
    }
    out.push(Formula::TruthConst(Value::zero()));
    out.push(Formula::Bot);
    out.sort();
    out.dedup();
    out
}

/// Runs the full pipeline: complete the theory over its subformula closure,
/// then build the canonical model of the completion. The certificate inside
/// `canonical_model` guarantees the result satisfies the completed theory,
/// hence the original one.
pub fn complete_and_canonical(
    theory: &[Formula],
    set: &GoedelSet,
    constants: &ConstantFamily,
    config: &DecideConfig,
) -> Result<(CompletionTrace, CanonicalModel), HenkinError> {
    let universe = closure_universe(theory);
    let trace = complete_theory(theory, &universe, set, constants, config)?;
    let model = canonical_model(&trace.final_theory, &universe, set, constants, config)?;
    Ok((trace, model))
}

/// A random satisfiable propositional theory over the pool, for pipeline
/// sweeps.
pub fn random_satisfiable_theory(
    pool: &crate::enumerate::PropPool,
    max_sentences: usize,
    set: &GoedelSet,
    constants: &ConstantFamily,
    config: &DecideConfig,
    rng: &mut impl Rng,
) -> Vec<Formula> {
    loop {
        let count = rng.gen_range(1..=max_sentences);
        let theory: Vec<Formula> = (0..count)
            .map(|_| {
                let size = rng.gen_range(1..=6usize);
                crate::enumerate::random_propositional(pool, size, rng)
            })
            .collect();
        if let Ok(decide::Verdict::Sat(_)) = decide::sat(&theory, set, constants, config) {
            return theory;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::PropPool;
    use crate::parser::{parse_formula, parse_theory};
    use crate::semantics::{eval_formula, Environment};
    use crate::syntax::Signature;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(p: i64, q: i64) -> Value {
        Value::frac(p, q)
    }

    fn cfg() -> DecideConfig {
        DecideConfig::default()
    }

    #[test]
    fn first_stage_adds_forward() {
        let fam = ConstantFamily::finite(vec![v(1, 2)]).unwrap();
        let sig = Signature::propositional(&["p", "q"], fam.clone(), false);
        let universe = vec![
            parse_formula("p", &sig).unwrap(),
            parse_formula("q", &sig).unwrap(),
        ];
        let trace =
            complete_theory(&[], &universe, &GoedelSet::Full01, &fam, &cfg()).unwrap();
        assert_eq!(trace.guard, Formula::TruthConst(v(1, 2)));
        assert_eq!(trace.stages.len(), 1);
        assert_eq!(trace.stages[0].decision, StageDecision::AddedForward);
        assert_eq!(
            trace.final_theory,
            vec![parse_formula("p -> q", &sig).unwrap()]
        );
        assert!(trace.stages.iter().all(|s| s.models_remaining > 0));
    }

    #[test]
    fn already_complete_pair() {
        let fam = ConstantFamily::finite(vec![v(1, 2)]).unwrap();
        let sig = Signature::propositional(&["p"], fam.clone(), false);
        let theory = vec![
            parse_formula("p -> #1/2", &sig).unwrap(),
            parse_formula("#1/2 -> p", &sig).unwrap(),
        ];
        let universe = vec![
            parse_formula("p", &sig).unwrap(),
            parse_formula("#1/2", &sig).unwrap(),
        ];
        let trace =
            complete_theory(&theory, &universe, &GoedelSet::Full01, &fam, &cfg()).unwrap();
        assert_eq!(trace.stages.len(), 1);
        assert_eq!(trace.stages[0].decision, StageDecision::AlreadyComplete);
        assert_eq!(trace.final_theory.len(), 2);
    }

    #[test]
    fn pair_with_bot_resolves_by_print_order() {
        let fam = ConstantFamily::finite(vec![v(1, 2)]).unwrap();
        let sig = Signature::propositional(&["q"], fam.clone(), false);
        let theory = vec![parse_formula("q", &sig).unwrap()];
        let universe = vec![
            parse_formula("q", &sig).unwrap(),
            parse_formula("bot", &sig).unwrap(),
        ];
        let trace =
            complete_theory(&theory, &universe, &GoedelSet::Full01, &fam, &cfg()).unwrap();
        // pair (bot, q) in print order: q -> bot kills every model of {q},
        // so the stage adds the backward direction bot -> q ... printed
        // order is ("bot", "q"), so theta = bot, psi = q: theta -> psi is
        // bot -> q, entailed everywhere; psi -> theta is ~q, unsat under q.
        assert_eq!(trace.stages.len(), 1);
        assert_eq!(trace.stages[0].decision, StageDecision::AddedForward);
        assert_eq!(
            trace.final_theory.last().unwrap(),
            &parse_formula("bot -> q", &sig).unwrap()
        );
    }

    #[test]
    fn unsatisfiable_theory_is_rejected() {
        let fam = ConstantFamily::finite(vec![v(1, 2)]).unwrap();
        let sig = Signature::propositional(&["p"], fam.clone(), false);
        let theory = vec![parse_formula("p & ~p", &sig).unwrap()];
        assert!(matches!(
            complete_theory(&theory, &[], &GoedelSet::Full01, &fam, &cfg()),
            Err(HenkinError::TheoryUnsatisfiable)
        ));
    }

    #[test]
    fn theta_shape_and_errors() {
        let fam = ConstantFamily::finite(vec![v(1, 3), v(1, 2)]).unwrap();
        let sig = Signature::propositional(&[], fam.clone(), false)
            .with_pred("R", 1)
            .unwrap()
            .with_const("c")
            .unwrap();
        let phi = parse_formula("R(x)", &sig).unwrap();
        let theta = build_theta(&phi, "x", &v(1, 2), &v(1, 3), "c", &fam).unwrap();
        let expected = parse_formula("(#1/2 -> forall x. R(x)) | (R(c) -> #1/3)", &sig).unwrap();
        assert_eq!(theta, expected);

        assert!(matches!(
            build_theta(&phi, "x", &v(1, 3), &v(1, 3), "c", &fam),
            Err(HenkinError::RNotAboveS { .. })
        ));
        assert!(matches!(
            build_theta(&phi, "y", &v(1, 2), &v(1, 3), "c", &fam),
            Err(HenkinError::VarNotFree(_))
        ));
        let with_c = parse_formula("R(c) & R(x)", &sig).unwrap();
        assert!(matches!(
            build_theta(&with_c, "x", &v(1, 2), &v(1, 3), "c", &fam),
            Err(HenkinError::ConstantNotFresh(_))
        ));
        assert!(matches!(
            build_theta(&phi, "x", &v(1, 2), &v(1, 4), "c", &fam),
            Err(HenkinError::RNotInFamily(_))
        ));
    }

    #[test]
    fn theta_preserves_satisfiability_by_model_extension() {
        // a finite structure modelling T extends to one modelling T + theta
        // by sending the fresh constant to an element attaining the sup
        let fam = ConstantFamily::finite(vec![v(1, 4), v(1, 2)]).unwrap();
        let sig = Signature::propositional(&[], fam.clone(), false)
            .with_pred("R", 1)
            .unwrap();
        let theory_text = "forall x. (R(x) -> #1/2)\n";
        let theory = parse_theory(theory_text, &sig).unwrap().sentences;
        let m = Structure::parse(
            "universe a b c\n\
             pred R/1: a=1/2 b=3/4 c=1\n",
        )
        .unwrap();
        assert!(semantics::models(&m, &theory).unwrap().is_model());

        let phi = parse_formula("R(x)", &sig).unwrap();
        let theta = build_theta(&phi, "x", &v(1, 2), &v(1, 4), "w0", &fam).unwrap();
        // extend with w0 at the element maximizing R (the sup is attained)
        let mut extended = m.clone();
        let best = (0..m.size())
            .max_by_key(|e| m.pred_value("R", &[*e]).unwrap().clone())
            .unwrap();
        extended.consts.insert("w0".to_string(), best);
        let mut full = theory.clone();
        full.push(theta);
        assert!(semantics::models(&extended, &full).unwrap().is_model());
    }

    #[test]
    fn canonical_model_values() {
        let fam = ConstantFamily::finite(vec![v(1, 2)]).unwrap();
        let sig = Signature::propositional(&["rho"], fam.clone(), false);

        // rho pinned to 1/2
        let t = vec![
            parse_formula("rho -> #1/2", &sig).unwrap(),
            parse_formula("#1/2 -> rho", &sig).unwrap(),
        ];
        let (_, model) =
            complete_and_canonical(&t, &GoedelSet::Full01, &fam, &cfg()).unwrap();
        assert_eq!(model.structure.pred_value("rho", &[]).unwrap(), &v(1, 2));

        // rho forced true
        let t = vec![parse_formula("rho", &sig).unwrap()];
        let (_, model) =
            complete_and_canonical(&t, &GoedelSet::Full01, &fam, &cfg()).unwrap();
        assert!(model.structure.pred_value("rho", &[]).unwrap().is_zero());

        // the strong-completeness example: every model pins rho = 1
        let t = vec![parse_formula("~~rho -> #1/2", &sig).unwrap()];
        let (trace, model) =
            complete_and_canonical(&t, &GoedelSet::Full01, &fam, &cfg()).unwrap();
        assert!(model.structure.pred_value("rho", &[]).unwrap().is_one());
        assert!(trace.stages.iter().all(|s| s.models_remaining > 0));
    }

    #[test]
    fn pipeline_with_projection_connective() {
        // delta(p) -> #1/2 forces p > 0; the canonical model must respect it
        let fam = ConstantFamily::finite(vec![v(1, 2)]).unwrap();
        let sig = Signature::propositional(&["p"], fam.clone(), true);
        let theory = vec![parse_formula("delta(p) -> #1/2", &sig).unwrap()];
        let (_, model) =
            complete_and_canonical(&theory, &GoedelSet::Full01, &fam, &cfg()).unwrap();
        let p = model.structure.pred_value("p", &[]).unwrap();
        assert!(!p.is_zero(), "p = {p}");
        assert!(model.structure.delta_enabled);
    }

    #[test]
    fn pipeline_on_random_theories() {
        let fam = ConstantFamily::finite(vec![v(1, 4), v(1, 2), v(3, 4)]).unwrap();
        let pool = PropPool::new(
            &["p", "q", "rho"],
            vec![v(1, 4), v(1, 2), v(3, 4)],
            false,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let env = Environment::new();
        for _ in 0..15 {
            let theory = random_satisfiable_theory(
                &pool,
                3,
                &GoedelSet::Full01,
                &fam,
                &cfg(),
                &mut rng,
            );
            let (trace, model) =
                complete_and_canonical(&theory, &GoedelSet::Full01, &fam, &cfg()).unwrap();
            assert!(trace.stages.iter().all(|s| s.models_remaining > 0));
            for s in &theory {
                let val = eval_formula(&model.structure, s, &env).unwrap();
                assert!(val.is_zero(), "{s} has value {val}");
            }
        }
    }
}
