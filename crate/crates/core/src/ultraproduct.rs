//! D-limits and principal ultraproducts over compact value sets.
//!
//! Nonprincipal ultrafilters have no concrete representation; the Frechet
//! descriptor honestly computes only filter-independent limits, which exist
//! exactly for eventually-constant families and for closed-form families
//! converging to 0 inside a compact value set (one whose limit points are at
//! most `{0}` — there `(V, d_max)` is compact and every ultrafilter limit is
//! unique).

use crate::enumerate::{enumerate_fo, FoPool};
use crate::semantics::{
    eval_formula, tuples, ElemTable, Environment, SemanticsError, Structure, ValueTable,
};
use crate::values::{self, ClosedForm, GoedelSet, Value};
use num::rational::BigRational;
use num::BigInt;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum UltraError {
    #[error("the value set is not compact under d_max (its limit points exceed {{0}})")]
    NotCompact,
    #[error("family kind does not match the ultrafilter descriptor")]
    FamilyKindMismatch,
    #[error("principal index {index} out of range for {size} structures")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("structures do not share a signature: {0}")]
    SignatureMismatch(String),
    #[error("unsupported symbolic family: {0}")]
    UnsupportedFamily(String),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// Ultrafilter descriptor. `Principal` lives on a finite index set;
/// `FrechetExtension` stands for any ultrafilter containing the cofinite
/// filter on the naturals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UltrafilterDesc {
    Principal(usize),
    FrechetExtension,
}

/// A value family over the naturals in a decidable presentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymbolicFamily {
    EventuallyConstant { prefix: Vec<Value>, tail: Value },
    /// `c + s/(n+k)`; convergence inside a compact set forces `c = 0`.
    Form(ClosedForm),
}

impl SymbolicFamily {
    /// Validates membership of every family value in the set. Exact for the
    /// supported combinations; anything else is an explicit failure.
    pub fn check_within(&self, set: &GoedelSet) -> Result<(), UltraError> {
        match self {
            SymbolicFamily::EventuallyConstant { prefix, tail } => {
                for v in prefix.iter().chain([tail]) {
                    if !set.member(v) {
                        return Err(UltraError::UnsupportedFamily(format!(
                            "{v} is not a member of the value set"
                        )));
                    }
                }
                Ok(())
            }
            SymbolicFamily::Form(form) => {
                if form.is_constant() {
                    return if set.member(&form.limit()) {
                        Ok(())
                    } else {
                        Err(UltraError::UnsupportedFamily(
                            "constant value outside the set".into(),
                        ))
                    };
                }
                if !form.limit().is_zero() {
                    // values accumulate at the limit, which would then be a
                    // nonzero limit point of the set
                    return Err(UltraError::UnsupportedFamily(format!(
                        "family {form} converges to {} != 0",
                        form.limit()
                    )));
                }
                match set {
                    GoedelSet::Downward => {
                        // s/(n+k) = 1/m for every n forces s = 1/q, k a
                        // nonnegative integer
                        let ok = form.s.numer() == &BigInt::from(1)
                            && form.k.is_integer()
                            && form.k >= BigRational::from_integer(BigInt::from(0));
                        if ok {
                            Ok(())
                        } else {
                            Err(UltraError::UnsupportedFamily(format!(
                                "{form} leaves the downward set"
                            )))
                        }
                    }
                    GoedelSet::SequenceV { families, .. } => {
                        if families.iter().any(|f| f == form) {
                            Ok(())
                        } else {
                            Err(UltraError::UnsupportedFamily(format!(
                                "{form} is not a declared family of the set"
                            )))
                        }
                    }
                    GoedelSet::FiniteV(_) => Err(UltraError::UnsupportedFamily(
                        "a finite set has no non-constant convergent families".into(),
                    )),
                    GoedelSet::Full01 => Ok(()),
                }
            }
        }
    }

    pub fn value_at(&self, n: u64) -> Value {
        match self {
            SymbolicFamily::EventuallyConstant { prefix, tail } => prefix
                .get((n - 1) as usize)
                .cloned()
                .unwrap_or_else(|| tail.clone()),
            SymbolicFamily::Form(form) => form.eval(n),
        }
    }

    /// The unique D-limit along every Frechet-extending ultrafilter.
    pub fn frechet_limit(&self) -> Value {
        match self {
            SymbolicFamily::EventuallyConstant { tail, .. } => tail.clone(),
            SymbolicFamily::Form(form) => form.limit(),
        }
    }
}

fn require_compact(set: &GoedelSet) -> Result<(), UltraError> {
    if set.limit_points().subset_of_zero() {
        Ok(())
    } else {
        Err(UltraError::NotCompact)
    }
}

/// D-limit of a finite family along a principal ultrafilter.
pub fn dlimit_principal(
    family: &[Value],
    filter: UltrafilterDesc,
    set: &GoedelSet,
) -> Result<Value, UltraError> {
    require_compact(set)?;
    match filter {
        UltrafilterDesc::Principal(j) => {
            family
                .get(j)
                .cloned()
                .ok_or(UltraError::IndexOutOfRange {
                    index: j,
                    size: family.len(),
                })
        }
        UltrafilterDesc::FrechetExtension => Err(UltraError::FamilyKindMismatch),
    }
}

/// D-limit of a symbolic family along any Frechet-extending ultrafilter:
/// the eventually-constant value, or the limit of the convergent form. Both
/// are filter-independent in a compact value set.
pub fn dlimit_frechet(
    family: &SymbolicFamily,
    filter: UltrafilterDesc,
    set: &GoedelSet,
) -> Result<Value, UltraError> {
    require_compact(set)?;
    if filter != UltrafilterDesc::FrechetExtension {
        return Err(UltraError::FamilyKindMismatch);
    }
    family.check_within(set)?;
    Ok(family.frechet_limit())
}

/// The D-limit of the pointwise connective combination of two supported
/// families, derived by case analysis on their eventual behavior.
///
/// For `resid`, `max` and `min` this agrees with applying the connective to
/// the two D-limits (the connectives are continuous along the supported
/// families). The projection is the documented exception: a positive family
/// converging to 0 has `delta` eventually 1, while `delta` of the limit is
/// 0 — compactness genuinely fails for the projection logic.
pub fn dlimit_of_connective(
    op: values::Connective,
    x: &SymbolicFamily,
    y: Option<&SymbolicFamily>,
    set: &GoedelSet,
) -> Result<Value, UltraError> {
    require_compact(set)?;
    x.check_within(set)?;
    if let Some(y) = y {
        y.check_within(set)?;
    }
    let lim_x = x.frechet_limit();
    let conv_x = matches!(x, SymbolicFamily::Form(f) if !f.is_constant());
    Ok(match op {
        values::Connective::Delta => {
            if conv_x {
                // eventually positive, so delta is eventually 1
                Value::one()
            } else {
                values::delta(&lim_x)
            }
        }
        values::Connective::Neg => {
            if conv_x {
                // eventually strictly below 1, so the negation is eventually 1
                Value::one()
            } else {
                values::neg(&lim_x)
            }
        }
        _ => {
            let y = y.ok_or(UltraError::FamilyKindMismatch)?;
            let lim_y = y.frechet_limit();
            let conv_y = matches!(y, SymbolicFamily::Form(f) if !f.is_constant());
            match op {
                values::Connective::And => values::and(&lim_x, &lim_y),
                values::Connective::Or => values::or(&lim_x, &lim_y),
                values::Connective::StrongImp | values::Connective::Equiv => {
                    return Err(UltraError::UnsupportedFamily(
                        "derived connectives reduce to resid/max/min".into(),
                    ))
                }
                values::Connective::Resid => {
                    match (conv_x, conv_y) {
                        (false, false) => values::resid(&lim_x, &lim_y),
                        // x_n -> 0 against a constant: eventually x_n < t
                        (true, false) => {
                            if lim_y.is_zero() {
                                Value::zero() // resid(x_n, 0) = 0 always
                            } else {
                                lim_y.clone()
                            }
                        }
                        // constant against y_n -> 0: eventually t >= y_n
                        (false, true) => {
                            if lim_x.is_zero() {
                                // resid(0, y_n) = y_n -> 0
                                Value::zero()
                            } else {
                                Value::zero()
                            }
                        }
                        // both vanish: resid(x_n, y_n) <= y_n -> 0
                        (true, true) => Value::zero(),
                    }
                }
                values::Connective::Neg | values::Connective::Delta => unreachable!(),
            }
        }
    })
}

fn check_signatures(structures: &[Structure]) -> Result<(), UltraError> {
    let first = &structures[0];
    for (i, m) in structures.iter().enumerate().skip(1) {
        let shape = |s: &Structure| {
            (
                s.preds
                    .iter()
                    .map(|(n, t)| (n.clone(), t.arity))
                    .collect::<Vec<_>>(),
                s.funcs
                    .iter()
                    .map(|(n, t)| (n.clone(), t.arity))
                    .collect::<Vec<_>>(),
                s.consts.keys().cloned().collect::<Vec<_>>(),
                s.delta_enabled,
            )
        };
        if shape(first) != shape(m) {
            return Err(UltraError::SignatureMismatch(format!(
                "structure {i} differs from structure 0"
            )));
        }
    }
    Ok(())
}

/// The ultraproduct of finitely many finite structures along a principal
/// ultrafilter: the universe is the product, predicates take the D-limit of
/// their componentwise values, functions and constants act componentwise.
pub fn ultraproduct(
    structures: &[Structure],
    filter: UltrafilterDesc,
    set: &GoedelSet,
) -> Result<Structure, UltraError> {
    require_compact(set)?;
    let UltrafilterDesc::Principal(j) = filter else {
        return Err(UltraError::FamilyKindMismatch);
    };
    if structures.is_empty() || j >= structures.len() {
        return Err(UltraError::IndexOutOfRange {
            index: j,
            size: structures.len(),
        });
    }
    check_signatures(structures)?;

    let sizes: Vec<usize> = structures.iter().map(Structure::size).collect();
    let total: usize = sizes.iter().product();
    // element i of the product decodes into one index per factor
    let decode = |mut ix: usize| -> Vec<usize> {
        let mut parts = vec![0usize; sizes.len()];
        for (slot, size) in parts.iter_mut().zip(&sizes).rev() {
            *slot = ix % size;
            ix /= size;
        }
        parts
    };
    let elements: Vec<String> = (0..total)
        .map(|ix| {
            decode(ix)
                .iter()
                .zip(structures)
                .map(|(e, m)| m.elements[*e].clone())
                .collect::<Vec<_>>()
                .join(".")
        })
        .collect();

    let template = &structures[0];
    let mut preds = BTreeMap::new();
    for (sym, table) in &template.preds {
        let arity = table.arity;
        let mut data = Vec::with_capacity(total.pow(arity as u32));
        for args in tuples(total, arity) {
            let decoded: Vec<Vec<usize>> = args.iter().map(|a| decode(*a)).collect();
            let componentwise: Result<Vec<Value>, UltraError> = structures
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    let local: Vec<usize> = decoded.iter().map(|d| d[i]).collect();
                    Ok(m.pred_value(sym, &local)?.clone())
                })
                .collect();
            data.push(dlimit_principal(&componentwise?, filter, set)?);
        }
        preds.insert(sym.clone(), ValueTable { arity, data });
    }
    let mut funcs = BTreeMap::new();
    for (sym, table) in &template.funcs {
        let arity = table.arity;
        let mut data = Vec::with_capacity(total.pow(arity as u32));
        for args in tuples(total, arity) {
            let decoded: Vec<Vec<usize>> = args.iter().map(|a| decode(*a)).collect();
            let mut image = 0usize;
            for (i, m) in structures.iter().enumerate() {
                let local: Vec<usize> = decoded.iter().map(|d| d[i]).collect();
                image = image * sizes[i] + m.func_value(sym, &local)?;
            }
            data.push(image);
        }
        funcs.insert(sym.clone(), ElemTable { arity, data });
    }
    let mut consts = BTreeMap::new();
    for name in template.consts.keys() {
        let mut image = 0usize;
        for (i, m) in structures.iter().enumerate() {
            image = image * sizes[i] + m.consts[name];
        }
        consts.insert(name.clone(), image);
    }
    Ok(Structure {
        elements,
        preds,
        funcs,
        consts,
        delta_enabled: template.delta_enabled,
    })
}

/// Outcome of the Los-style equality sweep.
#[derive(Debug, Clone)]
pub struct LosReport {
    pub formulas_checked: usize,
    pub tuples_checked: usize,
    pub mismatches: Vec<String>,
}

impl fmt::Display for LosReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "checked {} formulas over {} tuples",
            self.formulas_checked, self.tuples_checked
        )?;
        if self.mismatches.is_empty() {
            writeln!(f, "no mismatches")?;
        } else {
            for m in &self.mismatches {
                writeln!(f, "mismatch: {m}")?;
            }
        }
        Ok(())
    }
}

/// Checks, for every enumerated formula and every tuple of product elements,
/// that evaluation in the supplied product equals the D-limit of the
/// componentwise evaluations. Mismatches signal a bug in the product.
pub fn los_check_against(
    product: &Structure,
    structures: &[Structure],
    filter: UltrafilterDesc,
    set: &GoedelSet,
    depth: usize,
    cap: usize,
) -> Result<LosReport, UltraError> {
    require_compact(set)?;
    let UltrafilterDesc::Principal(_) = filter else {
        return Err(UltraError::FamilyKindMismatch);
    };
    check_signatures(structures)?;
    let sizes: Vec<usize> = structures.iter().map(Structure::size).collect();
    let decode = |mut ix: usize| -> Vec<usize> {
        let mut parts = vec![0usize; sizes.len()];
        for (slot, size) in parts.iter_mut().zip(&sizes).rev() {
            *slot = ix % size;
            ix /= size;
        }
        parts
    };
    let pool = FoPool {
        preds: product
            .preds
            .iter()
            .map(|(n, t)| (n.clone(), t.arity))
            .collect(),
        vars: vec!["x".into(), "y".into(), "z".into()],
        quant_var: "z".into(),
        constants: Vec::new(),
        delta: product.delta_enabled,
    };
    let formulas = enumerate_fo(&pool, depth, cap, &["x", "y"]);
    let mut tuples_checked = 0usize;
    let mut mismatches = Vec::new();
    for f in &formulas {
        let free: Vec<String> = f.free_vars().into_iter().collect();
        for args in tuples(product.size(), free.len()) {
            let mut env = Environment::new();
            for (v, e) in free.iter().zip(&args) {
                env.bind(v.clone(), *e);
            }
            let in_product = eval_formula(product, f, &env)?;
            let componentwise: Result<Vec<Value>, UltraError> = structures
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    let mut env = Environment::new();
                    for (v, e) in free.iter().zip(&args) {
                        env.bind(v.clone(), decode(*e)[i]);
                    }
                    Ok(eval_formula(m, f, &env)?)
                })
                .collect();
            let limit = dlimit_principal(&componentwise?, filter, set)?;
            tuples_checked += 1;
            if in_product != limit {
                mismatches.push(format!(
                    "{f} at {args:?}: product {in_product} vs limit {limit}"
                ));
            }
        }
    }
    Ok(LosReport {
        formulas_checked: formulas.len(),
        tuples_checked,
        mismatches,
    })
}

/// Builds the principal ultraproduct and runs [`los_check_against`] on it.
pub fn los_check(
    structures: &[Structure],
    filter: UltrafilterDesc,
    set: &GoedelSet,
    depth: usize,
    cap: usize,
) -> Result<LosReport, UltraError> {
    let product = ultraproduct(structures, filter, set)?;
    los_check_against(&product, structures, filter, set, depth, cap)
}
