//! Deterministic formula enumeration and seeded random generation.
//!
//! Used by the oracle-agreement suites, the axiom soundness sweep, the
//! Lipschitz bound and the ultraproduct checks. Enumeration is by AST size
//! (number of nodes) for propositional formulas and by connective depth for
//! the first-order pools, with deterministic truncation caps.

use crate::syntax::{Formula, Term};
use crate::values::Value;
use rand::prelude::*;

/// Leaf stock for propositional enumeration.
#[derive(Debug, Clone)]
pub struct PropPool {
    pub atoms: Vec<String>,
    pub constants: Vec<Value>,
    pub delta: bool,
}

impl PropPool {
    pub fn new(atoms: &[&str], constants: Vec<Value>, delta: bool) -> Self {
        PropPool {
            atoms: atoms.iter().map(|s| s.to_string()).collect(),
            constants,
            delta,
        }
    }

    fn leaves(&self) -> Vec<Formula> {
        let mut out: Vec<Formula> = Vec::new();
        for a in &self.atoms {
            out.push(Formula::atom0(a.clone()));
        }
        out.push(Formula::Bot);
        for c in &self.constants {
            out.push(Formula::TruthConst(c.clone()));
        }
        out
    }
}

/// All formulas with exactly `size` AST nodes, for `size` in `1..=max_size`,
/// over the primitive stock (sugar-free). Deterministic order.
pub fn enumerate_propositional(pool: &PropPool, max_size: usize) -> Vec<Formula> {
    let mut by_size: Vec<Vec<Formula>> = vec![Vec::new(); max_size + 1];
    if max_size == 0 {
        return Vec::new();
    }
    by_size[1] = pool.leaves();
    for size in 2..=max_size {
        let mut layer = Vec::new();
        if pool.delta {
            for f in &by_size[size - 1] {
                layer.push(Formula::delta(f.clone()));
            }
        }
        for left in 1..size - 1 {
            let right = size - 1 - left;
            for a in &by_size[left] {
                for b in &by_size[right] {
                    layer.push(Formula::and(a.clone(), b.clone()));
                    layer.push(Formula::to(a.clone(), b.clone()));
                }
            }
        }
        by_size[size] = layer;
    }
    by_size.into_iter().flatten().collect()
}

/// A random propositional formula with roughly `size` nodes.
pub fn random_propositional(pool: &PropPool, size: usize, rng: &mut impl Rng) -> Formula {
    if size <= 1 {
        let leaves = pool.leaves();
        return leaves[rng.gen_range(0..leaves.len())].clone();
    }
    let choices = if pool.delta { 3 } else { 2 };
    match rng.gen_range(0..choices) {
        0 => {
            let split = rng.gen_range(1..size.max(2));
            Formula::and(
                random_propositional(pool, split, rng),
                random_propositional(pool, size - 1 - split.min(size - 1), rng),
            )
        }
        1 => {
            let split = rng.gen_range(1..size.max(2));
            Formula::to(
                random_propositional(pool, split, rng),
                random_propositional(pool, size - 1 - split.min(size - 1), rng),
            )
        }
        _ => Formula::delta(random_propositional(pool, size - 1, rng)),
    }
}

fn binds_var(f: &Formula, var: &str) -> bool {
    match f {
        Formula::Bot | Formula::TruthConst(_) | Formula::Atom(..) => false,
        Formula::And(a, b) | Formula::To(a, b) => binds_var(a, var) || binds_var(b, var),
        Formula::Delta(a) => binds_var(a, var),
        Formula::Forall(x, a) | Formula::Exists(x, a) => x == var || binds_var(a, var),
    }
}

/// First-order pool: predicates with arities over variables `vars`, where
/// `quant_var` is the one variable quantifiers may bind.
#[derive(Debug, Clone)]
pub struct FoPool {
    pub preds: Vec<(String, usize)>,
    pub vars: Vec<String>,
    pub quant_var: String,
    pub constants: Vec<Value>,
    pub delta: bool,
}

/// Formulas of connective depth `<= depth`, capped at `cap` per depth layer,
/// restricted so that free variables lie within `free_limit`.
pub fn enumerate_fo(pool: &FoPool, depth: usize, cap: usize, free_limit: &[&str]) -> Vec<Formula> {
    let mut atoms: Vec<Formula> = Vec::new();
    for (p, arity) in &pool.preds {
        let mut combos: Vec<Vec<Term>> = vec![Vec::new()];
        for _ in 0..*arity {
            let mut next = Vec::new();
            for combo in &combos {
                for v in &pool.vars {
                    let mut c = combo.clone();
                    c.push(Term::Var(v.clone()));
                    next.push(c);
                }
            }
            combos = next;
        }
        for combo in combos {
            atoms.push(Formula::Atom(p.clone(), combo));
        }
    }
    atoms.push(Formula::Bot);
    for c in &pool.constants {
        atoms.push(Formula::TruthConst(c.clone()));
    }

    let mut layers: Vec<Vec<Formula>> = vec![atoms];
    for d in 1..=depth {
        let prev = &layers[d - 1];
        let mut layer: Vec<Formula> = Vec::new();
        for f in prev {
            if pool.delta {
                layer.push(Formula::delta(f.clone()));
            }
            if f.free_vars().contains(&pool.quant_var) && !binds_var(f, &pool.quant_var) {
                layer.push(Formula::forall(pool.quant_var.clone(), f.clone()));
                layer.push(Formula::exists(pool.quant_var.clone(), f.clone()));
            }
        }
        // binary combinations of the previous layer with itself and atoms,
        // deterministically truncated
        'outer: for a in prev {
            for b in prev {
                layer.push(Formula::to(a.clone(), b.clone()));
                layer.push(Formula::and(a.clone(), b.clone()));
                if layer.len() >= cap * 4 {
                    break 'outer;
                }
            }
        }
        layer.truncate(cap * 4);
        layers.push(layer);
    }
    let mut out: Vec<Formula> = Vec::new();
    for layer in layers {
        for f in layer {
            let fv = f.free_vars();
            if fv.iter().all(|v| free_limit.contains(&v.as_str())) {
                out.push(f);
            }
        }
    }
    out.dedup();
    out.truncate(cap * (depth + 1));
    out
}
