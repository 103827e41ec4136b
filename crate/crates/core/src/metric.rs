//! Ultrametric and Lipschitz structures: validation of the similarity and
//! congruence properties, the formula-level Lipschitz bound, and the
//! canonical quotient by the zero-distance relation.
//!
//! The distance symbol `d` is an ordinary binary predicate; being a
//! pseudo-ultrametric is a validated property of its table, not a syntactic
//! privilege. Tuple distance is the maximum over coordinates.

use crate::enumerate::{enumerate_fo, FoPool};
use crate::semantics::{eval_formula, tuples, Environment, SemanticsError, Structure, ValueTable};
use crate::values::{self, GoedelSet, Value};
use rand::prelude::*;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("structure has no binary predicate `d`")]
    MissingDistance,
    #[error("structure is not a pseudo-ultrametric:\n{}", .0.iter().map(|w| w.to_string()).collect::<Vec<_>>().join("\n"))]
    NotUltrametric(Vec<MetricWitness>),
    #[error("structure is not 1-Lipschitz:\n{}", .0.iter().map(|w| w.to_string()).collect::<Vec<_>>().join("\n"))]
    NotLipschitz(Vec<LipschitzWitness>),
    #[error("quotient table for `{sym}` is ambiguous between classes (certificate bug)")]
    AmbiguousQuotient { sym: String },
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// A violated metric law with the offending elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricWitness {
    pub law: &'static str,
    pub elements: Vec<String>,
}

impl fmt::Display for MetricWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} fails at ({})", self.law, self.elements.join(", "))
    }
}

/// A violated 1-Lipschitz bound: the symbol and the two tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LipschitzWitness {
    pub symbol: String,
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub lhs: Value,
    pub bound: Value,
}

impl fmt::Display for LipschitzWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: d_max at ({}) vs ({}) is {} > {}",
            self.symbol,
            self.left.join(","),
            self.right.join(","),
            self.lhs,
            self.bound
        )
    }
}

/// Per-symbol certificate: OK or the witness pair violating the bound.
#[derive(Debug, Clone)]
pub struct LipschitzCertificate {
    pub witnesses: Vec<LipschitzWitness>,
}

impl LipschitzCertificate {
    pub fn is_ok(&self) -> bool {
        self.witnesses.is_empty()
    }
}

fn distance(m: &Structure, a: usize, b: usize) -> Result<Value, MetricError> {
    if !m.preds.contains_key("d") {
        return Err(MetricError::MissingDistance);
    }
    Ok(m.pred_value("d", &[a, b])?.clone())
}

/// Tuple distance: the maximum coordinate distance.
pub fn tuple_distance(m: &Structure, a: &[usize], b: &[usize]) -> Result<Value, MetricError> {
    let mut best = Value::zero();
    for (x, y) in a.iter().zip(b) {
        let d = distance(m, *x, *y)?;
        if d > best {
            best = d;
        }
    }
    Ok(best)
}

/// Exhaustive check of reflexivity, symmetry and the strong triangle
/// inequality on all triples; the empty list means OK.
pub fn validate_pseudo_ultrametric(m: &Structure) -> Result<Vec<MetricWitness>, MetricError> {
    let n = m.size();
    let name = |i: usize| m.elements[i].clone();
    let mut out = Vec::new();
    for a in 0..n {
        if !distance(m, a, a)?.is_zero() {
            out.push(MetricWitness {
                law: "reflexivity",
                elements: vec![name(a)],
            });
        }
        for b in 0..n {
            if distance(m, a, b)? != distance(m, b, a)? {
                out.push(MetricWitness {
                    law: "symmetry",
                    elements: vec![name(a), name(b)],
                });
            }
            for c in 0..n {
                let bound = std::cmp::max(distance(m, a, c)?, distance(m, c, b)?);
                if distance(m, a, b)? > bound {
                    out.push(MetricWitness {
                        law: "strong triangle",
                        elements: vec![name(a), name(b), name(c)],
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Checks 1-Lipschitz continuity of every function and predicate table
/// against the tuple distance. The distance predicate itself is included;
/// the strong triangle inequality makes it pass automatically.
pub fn validate_lipschitz(m: &Structure) -> Result<LipschitzCertificate, MetricError> {
    let metric = validate_pseudo_ultrametric(m)?;
    if !metric.is_empty() {
        return Err(MetricError::NotUltrametric(metric));
    }
    let n = m.size();
    let mut witnesses = Vec::new();
    let names = |t: &[usize]| -> Vec<String> {
        t.iter().map(|e| m.elements[*e].clone()).collect()
    };
    for (sym, table) in &m.preds {
        for a in tuples(n, table.arity) {
            for b in tuples(n, table.arity) {
                let lhs = values::dmax(m.pred_value(sym, &a)?, m.pred_value(sym, &b)?);
                let bound = tuple_distance(m, &a, &b)?;
                if lhs > bound {
                    witnesses.push(LipschitzWitness {
                        symbol: sym.clone(),
                        left: names(&a),
                        right: names(&b),
                        lhs,
                        bound,
                    });
                }
            }
        }
    }
    for (sym, table) in &m.funcs {
        for a in tuples(n, table.arity) {
            for b in tuples(n, table.arity) {
                let fa = m.func_value(sym, &a)?;
                let fb = m.func_value(sym, &b)?;
                let lhs = distance(m, fa, fb)?;
                let bound = tuple_distance(m, &a, &b)?;
                if lhs > bound {
                    witnesses.push(LipschitzWitness {
                        symbol: sym.clone(),
                        left: names(&a),
                        right: names(&b),
                        lhs,
                        bound,
                    });
                }
            }
        }
    }
    Ok(LipschitzCertificate { witnesses })
}

/// Result of sweeping the formula-level bound
/// `d_max(phi(a), phi(b)) <= d(a, b)` over a formula pool.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub formulas_checked: usize,
    pub pairs_checked: usize,
    /// Largest observed `d(a,b) - d_max(phi(a), phi(b))`.
    pub max_slack: Value,
    /// Violations (a bug if any: the bound is a theorem for Lipschitz
    /// structures).
    pub violations: Vec<String>,
}

/// Enumerates formulas of the structure's signature up to the given depth
/// (with at most two free variables) and asserts the Lipschitz bound for
/// every formula and every pair of argument tuples.
pub fn lipschitz_formula_bound(
    m: &Structure,
    depth: usize,
    cap: usize,
) -> Result<BoundReport, MetricError> {
    let cert = validate_lipschitz(m)?;
    if !cert.is_ok() {
        return Err(MetricError::NotLipschitz(cert.witnesses));
    }
    let pool = FoPool {
        preds: m
            .preds
            .iter()
            .map(|(name, t)| (name.clone(), t.arity))
            .collect(),
        vars: vec!["x".into(), "y".into(), "z".into()],
        quant_var: "z".into(),
        constants: Vec::new(),
        delta: m.delta_enabled,
    };
    let formulas = enumerate_fo(&pool, depth, cap, &["x", "y"]);
    let mut pairs_checked = 0usize;
    let mut max_slack = Value::zero();
    let mut violations = Vec::new();
    for f in &formulas {
        let free: Vec<String> = f.free_vars().into_iter().collect();
        let arity = free.len();
        for a in tuples(m.size(), arity) {
            for b in tuples(m.size(), arity) {
                let mut env_a = Environment::new();
                let mut env_b = Environment::new();
                for (v, e) in free.iter().zip(&a) {
                    env_a.bind(v.clone(), *e);
                }
                for (v, e) in free.iter().zip(&b) {
                    env_b.bind(v.clone(), *e);
                }
                let va = eval_formula(m, f, &env_a)?;
                let vb = eval_formula(m, f, &env_b)?;
                let lhs = values::dmax(&va, &vb);
                let bound = tuple_distance(m, &a, &b)?;
                pairs_checked += 1;
                if lhs > bound {
                    violations.push(format!("{f} at ({a:?}, {b:?}): {lhs} > {bound}"));
                } else {
                    let slack = Value::from_ratio(bound.ratio() - lhs.ratio())
                        .expect("bound >= lhs stays in [0,1]");
                    if slack > max_slack {
                        max_slack = slack;
                    }
                }
            }
        }
    }
    Ok(BoundReport {
        formulas_checked: formulas.len(),
        pairs_checked,
        max_slack,
        violations,
    })
}

/// The canonical quotient by the zero-distance equivalence: classes become
/// elements, tables are induced after an explicit well-definedness check,
/// and the induced distance is a genuine ultrametric (zero only on the
/// diagonal).
pub fn quotient(m: &Structure) -> Result<Structure, MetricError> {
    let cert = validate_lipschitz(m)?;
    if !cert.is_ok() {
        return Err(MetricError::NotLipschitz(cert.witnesses));
    }
    let n = m.size();
    let mut class_of: Vec<usize> = vec![usize::MAX; n];
    let mut reps: Vec<usize> = Vec::new();
    for a in 0..n {
        if class_of[a] != usize::MAX {
            continue;
        }
        let id = reps.len();
        reps.push(a);
        for (b, slot) in class_of.iter_mut().enumerate().skip(a) {
            if distance(m, a, b)?.is_zero() {
                *slot = id;
            }
        }
    }
    let k = reps.len();
    let elements: Vec<String> = reps.iter().map(|r| m.elements[*r].clone()).collect();

    let mut preds = BTreeMap::new();
    for (sym, table) in &m.preds {
        let mut data: Vec<Option<Value>> = vec![None; k.pow(table.arity as u32)];
        for args in tuples(n, table.arity) {
            let classes: Vec<usize> = args.iter().map(|a| class_of[*a]).collect();
            let ix = classes.iter().fold(0usize, |acc, c| acc * k + c);
            let v = m.pred_value(sym, &args)?.clone();
            match &data[ix] {
                None => data[ix] = Some(v),
                Some(prev) if *prev == v => {}
                Some(_) => {
                    return Err(MetricError::AmbiguousQuotient { sym: sym.clone() })
                }
            }
        }
        preds.insert(
            sym.clone(),
            ValueTable {
                arity: table.arity,
                data: data.into_iter().map(Option::unwrap).collect(),
            },
        );
    }
    let mut funcs = BTreeMap::new();
    for (sym, table) in &m.funcs {
        let mut data: Vec<Option<usize>> = vec![None; k.pow(table.arity as u32)];
        for args in tuples(n, table.arity) {
            let classes: Vec<usize> = args.iter().map(|a| class_of[*a]).collect();
            let ix = classes.iter().fold(0usize, |acc, c| acc * k + c);
            let image = class_of[m.func_value(sym, &args)?];
            match &data[ix] {
                None => data[ix] = Some(image),
                Some(prev) if *prev == image => {}
                Some(_) => {
                    return Err(MetricError::AmbiguousQuotient { sym: sym.clone() })
                }
            }
        }
        funcs.insert(
            sym.clone(),
            crate::semantics::ElemTable {
                arity: table.arity,
                data: data.into_iter().map(Option::unwrap).collect(),
            },
        );
    }
    let consts = m
        .consts
        .iter()
        .map(|(name, e)| (name.clone(), class_of[*e]))
        .collect();
    Ok(Structure {
        elements,
        preds,
        funcs,
        consts,
        delta_enabled: m.delta_enabled,
    })
}

/// Random Lipschitz structure generator. The distance comes from a random
/// hierarchical partition (always a pseudo-ultrametric); predicate values
/// are grown by copying from the nearest assigned tuple, which keeps every
/// table 1-Lipschitz; functions are constants or projections.
pub fn random_lipschitz_structure(
    size: usize,
    unary_preds: usize,
    with_function: bool,
    set: &GoedelSet,
    rng: &mut impl Rng,
) -> Structure {
    let levels: Vec<Value> = match set {
        GoedelSet::Downward => vec![
            Value::frac(1, 4),
            Value::frac(1, 3),
            Value::frac(1, 2),
            Value::one(),
        ],
        _ => vec![
            Value::frac(1, 4),
            Value::frac(1, 2),
            Value::frac(3, 4),
            Value::one(),
        ],
    };
    // hierarchical clustering: at each level, refine the partition
    let mut partitions: Vec<Vec<usize>> = Vec::new(); // class id per element, coarse -> fine
    let mut current: Vec<usize> = vec![0; size];
    partitions.push(current.clone());
    for _ in 1..levels.len() {
        let mut next = current.clone();
        let mut fresh = size;
        for class in 0..size {
            let members: Vec<usize> = (0..size).filter(|e| current[*e] == class).collect();
            if members.len() > 1 && rng.gen_bool(0.6) {
                for e in &members {
                    if rng.gen_bool(0.5) {
                        next[*e] = fresh;
                    }
                }
                fresh += 1;
            }
        }
        partitions.push(next.clone());
        current = next;
    }
    // allow zero distances: with small probability merge at the finest level
    let finest_split = rng.gen_bool(0.7);
    let mut d_data = vec![Value::zero(); size * size];
    for a in 0..size {
        for b in 0..size {
            if a == b {
                continue;
            }
            // distance = level of the coarsest partition separating a and b
            let mut level = levels.len(); // same class everywhere
            for (i, part) in partitions.iter().enumerate() {
                if part[a] != part[b] {
                    level = i;
                    break;
                }
            }
            let d = if level >= levels.len() {
                if finest_split {
                    levels[0].clone()
                } else {
                    Value::zero()
                }
            } else {
                // coarser separations get larger distances
                levels[levels.len() - 1 - level].clone()
            };
            d_data[a * size + b] = d;
        }
    }
    let mut preds = BTreeMap::new();
    preds.insert(
        "d".to_string(),
        ValueTable {
            arity: 2,
            data: d_data,
        },
    );
    let m_partial = Structure {
        elements: (0..size).map(|i| format!("e{i}")).collect(),
        preds,
        funcs: BTreeMap::new(),
        consts: BTreeMap::new(),
        delta_enabled: false,
    };
    // predicate values: assign element 0 freely, then for each next element
    // copy the value of the nearest assigned one unless every assigned value
    // also fits under the bound of a fresh choice
    let pool: Vec<Value> = levels
        .iter()
        .cloned()
        .chain([Value::zero()])
        .collect();
    let mut preds = m_partial.preds.clone();
    for p in 0..unary_preds {
        let mut data: Vec<Option<Value>> = vec![None; size];
        data[0] = Some(pool[rng.gen_range(0..pool.len())].clone());
        for b in 1..size {
            let nearest = (0..b)
                .min_by_key(|a| distance(&m_partial, *a, b).unwrap())
                .unwrap();
            let copied = data[nearest].clone().unwrap();
            // a fresh small value is allowed when it stays under every bound
            let candidate = pool[rng.gen_range(0..pool.len())].clone();
            let fresh_ok = (0..b).all(|a| {
                let bound = distance(&m_partial, a, b).unwrap();
                let prev = data[a].clone().unwrap();
                values::dmax(&candidate, &prev) <= bound
            });
            data[b] = Some(if fresh_ok && rng.gen_bool(0.5) {
                candidate
            } else {
                copied
            });
        }
        preds.insert(
            format!("P{p}"),
            ValueTable {
                arity: 1,
                data: data.into_iter().map(Option::unwrap).collect(),
            },
        );
    }
    let mut funcs = BTreeMap::new();
    if with_function {
        // identity or a constant map: both 1-Lipschitz
        let data: Vec<usize> = if rng.gen_bool(0.5) {
            (0..size).collect()
        } else {
            let target = rng.gen_range(0..size);
            vec![target; size]
        };
        funcs.insert("f".to_string(), crate::semantics::ElemTable { arity: 1, data });
    }
    Structure {
        elements: m_partial.elements,
        preds,
        funcs,
        consts: BTreeMap::new(),
        delta_enabled: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_formula;
    use crate::semantics::models;
    use crate::syntax::Formula;
    use crate::values::ConstantFamily;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(p: i64, q: i64) -> Value {
        Value::frac(p, q)
    }

    fn discrete(size: usize) -> Structure {
        let mut d = vec![Value::one(); size * size];
        for a in 0..size {
            d[a * size + a] = Value::zero();
        }
        let mut preds = BTreeMap::new();
        preds.insert("d".to_string(), ValueTable { arity: 2, data: d });
        Structure {
            elements: (0..size).map(|i| format!("e{i}")).collect(),
            preds,
            funcs: BTreeMap::new(),
            consts: BTreeMap::new(),
            delta_enabled: false,
        }
    }

    #[test]
    fn ultrametric_validation() {
        assert!(validate_pseudo_ultrametric(&discrete(3)).unwrap().is_empty());
        assert!(validate_pseudo_ultrametric(&discrete(1)).unwrap().is_empty());

        // d(a,b)=1/2, d(b,c)=1/4, d(a,c)=3/4 breaks the strong triangle
        let m = Structure::parse(
            "universe a b c\n\
             pred d/2: a,a=0 b,b=0 c,c=0 a,b=1/2 b,a=1/2 b,c=1/4 c,b=1/4 a,c=3/4 c,a=3/4\n",
        )
        .unwrap();
        let ws = validate_pseudo_ultrametric(&m).unwrap();
        assert!(ws.iter().any(|w| w.law == "strong triangle"), "{ws:?}");
    }

    #[test]
    fn lipschitz_validation() {
        // identity function on a metric is fine; constant predicate is fine
        let mut m = discrete(3);
        m.funcs.insert(
            "f".to_string(),
            crate::semantics::ElemTable {
                arity: 1,
                data: vec![0, 1, 2],
            },
        );
        m.preds.insert(
            "P".to_string(),
            ValueTable {
                arity: 1,
                data: vec![v(1, 3); 3],
            },
        );
        assert!(validate_lipschitz(&m).unwrap().is_ok());

        // P(a)=0, P(b)=1 with d(a,b)=1/2: witness pair
        let m = Structure::parse(
            "universe a b\n\
             pred d/2: a,a=0 b,b=0 a,b=1/2 b,a=1/2\n\
             pred P/1: a=0 b=1\n",
        )
        .unwrap();
        let cert = validate_lipschitz(&m).unwrap();
        assert!(!cert.is_ok());
        assert_eq!(cert.witnesses[0].symbol, "P");
    }

    #[test]
    fn formula_bound_examples() {
        let m = Structure::parse(
            "universe a b c\n\
             pred d/2: default=1/2 a,a=0 b,b=0 c,c=0 a,b=1/4 b,a=1/4\n\
             pred R/1: a=1/4 b=1/4 c=1/2\n\
             pred S/1: a=1/2 b=1/2 c=1/4\n",
        )
        .unwrap();
        assert!(validate_lipschitz(&m).unwrap().is_ok());
        let report = lipschitz_formula_bound(&m, 3, 120).unwrap();
        assert!(report.violations.is_empty(), "{:?}", report.violations);
        assert!(report.formulas_checked > 10);
        assert!(report.pairs_checked > 100);
    }

    #[test]
    fn quotient_examples() {
        // discrete metric: isomorphic copy
        let m = discrete(3);
        let q = quotient(&m).unwrap();
        assert_eq!(q.size(), 3);
        assert_eq!(q.preds["d"], m.preds["d"]);

        // d(a,b) = 0 with equal P values merges the class, keeping the value
        let m = Structure::parse(
            "universe a b c\n\
             pred d/2: default=1 a,a=0 b,b=0 c,c=0 a,b=0 b,a=0\n\
             pred P/1: a=1/4 b=1/4 c=1/2\n",
        )
        .unwrap();
        let q = quotient(&m).unwrap();
        assert_eq!(q.size(), 2);
        assert_eq!(q.pred_value("P", &[0]).unwrap(), &v(1, 4));
        // the induced distance is a genuine ultrametric: zero only diagonally
        for a in 0..q.size() {
            for b in 0..q.size() {
                assert_eq!(
                    q.pred_value("d", &[a, b]).unwrap().is_zero(),
                    a == b
                );
            }
        }

        // a function whose images collapse with the class is fine
        let m = Structure::parse(
            "universe a b c\n\
             pred d/2: default=1 a,a=0 b,b=0 c,c=0 a,b=0 b,a=0\n\
             fun f/1: a->a b->b c->c\n",
        )
        .unwrap();
        let q = quotient(&m).unwrap();
        assert_eq!(q.size(), 2);
        assert_eq!(q.func_value("f", &[0]).unwrap(), 0);
    }

    #[test]
    fn quotient_idempotent_and_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let sig_consts = ConstantFamily::empty();
        for _ in 0..25 {
            let size = rng.gen_range(2..=4usize);
            let m = random_lipschitz_structure(size, 2, true, &GoedelSet::Full01, &mut rng);
            assert!(validate_lipschitz(&m).unwrap().is_ok());
            let q = quotient(&m).unwrap();
            let qq = quotient(&q).unwrap();
            assert_eq!(q.size(), qq.size());
            assert_eq!(q.preds, qq.preds);
            assert_eq!(q.funcs, qq.funcs);

            // evaluation invariance for closed formulas
            let sig = m.infer_signature(sig_consts.clone());
            for text in [
                "forall x. P0(x)",
                "exists x. P1(x)",
                "forall x. (P0(x) -> P1(x))",
                "forall x. exists y. d(x,y)",
                "(forall x. P0(x)) -> (exists x. P1(x))",
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
    }

    #[test]
    fn generator_soundness() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..40 {
            let size = rng.gen_range(1..=4usize);
            let m = random_lipschitz_structure(size, 2, rng.gen_bool(0.5), &GoedelSet::Full01, &mut rng);
            assert!(validate_pseudo_ultrametric(&m).unwrap().is_empty());
            assert!(validate_lipschitz(&m).unwrap().is_ok());
            assert!(m.check_values(&GoedelSet::Full01).is_ok());
        }
    }

    #[test]
    fn similarity_axioms_hold_on_valid_metrics() {
        // the similarity theory is modelled exactly by pseudo-ultrametrics
        let m = discrete(3);
        let sig = m.infer_signature(ConstantFamily::empty());
        let axioms = [
            "forall x. d(x,x)",
            "forall x. forall y. (d(x,y) -> d(y,x))",
            "forall x. forall y. forall z. ((d(x,y) & d(y,z)) -> d(x,z))",
        ];
        let t: Vec<Formula> = axioms
            .iter()
            .map(|a| parse_formula(a, &sig).unwrap())
            .collect();
        assert!(models(&m, &t).unwrap().is_model());
    }
}
