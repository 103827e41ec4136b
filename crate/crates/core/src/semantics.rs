//! Finite structures and the interpretation of terms and formulas.
//!
//! Universes are finite, so the quantifier clauses `sup`/`inf` are `max`/
//! `min`. Satisfaction of a sentence means value `0` (absolute truth).

use crate::syntax::{Formula, Signature, Term};
use crate::values::{self, ConstantFamily, GoedelSet, Value};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("structure does not interpret `{0}`")]
    MissingSymbol(String),
    #[error("delta is not enabled for this structure")]
    DeltaDisabled,
    #[error("table for `{sym}` expects {expected} entries, got {got}")]
    TableSize {
        sym: String,
        expected: usize,
        got: usize,
    },
    #[error("structure file, line {line}: {msg}")]
    File { line: usize, msg: String },
    #[error("predicate `{sym}` takes value {value} outside the Goedel set at {args:?}")]
    ValueOutsideSet {
        sym: String,
        value: Value,
        args: Vec<String>,
    },
    #[error("cannot ground a formula containing function symbols or object constants")]
    NotGroundable,
}

/// A total table `universe^n -> Value`, stored dense in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueTable {
    pub arity: usize,
    pub data: Vec<Value>,
}

/// A total table `universe^n -> universe`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElemTable {
    pub arity: usize,
    pub data: Vec<usize>,
}

fn table_index(args: &[usize], size: usize) -> usize {
    args.iter().fold(0, |acc, a| acc * size + a)
}

/// Iterates all tuples of the given arity over `0..size`.
pub fn tuples(size: usize, arity: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = size.pow(arity as u32);
    (0..total).map(move |mut ix| {
        let mut t = vec![0usize; arity];
        for slot in t.iter_mut().rev() {
            *slot = ix % size;
            ix /= size;
        }
        t
    })
}

/// Finite-universe interpretation of a signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    pub elements: Vec<String>,
    pub preds: BTreeMap<String, ValueTable>,
    pub funcs: BTreeMap<String, ElemTable>,
    pub consts: BTreeMap<String, usize>,
    pub delta_enabled: bool,
}

/// Variable bindings used during evaluation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Environment(BTreeMap<String, usize>);

impl Environment {
    pub fn new() -> Self {
        Environment::default()
    }

    pub fn bind(&mut self, var: impl Into<String>, elem: usize) {
        self.0.insert(var.into(), elem);
    }

    pub fn get(&self, var: &str) -> Option<usize> {
        self.0.get(var).copied()
    }

    fn remove(&mut self, var: &str) -> Option<usize> {
        self.0.remove(var)
    }
}

impl Structure {
    pub fn size(&self) -> usize {
        self.elements.len()
    }

    /// A single-point structure interpreting nullary predicates; the shape
    /// propositional witnesses take.
    pub fn propositional(atoms: &BTreeMap<String, Value>, delta_enabled: bool) -> Self {
        Structure {
            elements: vec!["u0".to_string()],
            preds: atoms
                .iter()
                .map(|(name, v)| {
                    (
                        name.clone(),
                        ValueTable {
                            arity: 0,
                            data: vec![v.clone()],
                        },
                    )
                })
                .collect(),
            funcs: BTreeMap::new(),
            consts: BTreeMap::new(),
            delta_enabled,
        }
    }

    pub fn pred_value(&self, sym: &str, args: &[usize]) -> Result<&Value, SemanticsError> {
        let table = self
            .preds
            .get(sym)
            .ok_or_else(|| SemanticsError::MissingSymbol(sym.to_string()))?;
        Ok(&table.data[table_index(args, self.size())])
    }

    pub fn func_value(&self, sym: &str, args: &[usize]) -> Result<usize, SemanticsError> {
        let table = self
            .funcs
            .get(sym)
            .ok_or_else(|| SemanticsError::MissingSymbol(sym.to_string()))?;
        Ok(table.data[table_index(args, self.size())])
    }

    /// Checks table totality.
    pub fn check_totality(&self) -> Result<(), SemanticsError> {
        for (sym, t) in &self.preds {
            let expected = self.size().pow(t.arity as u32);
            if t.data.len() != expected {
                return Err(SemanticsError::TableSize {
                    sym: sym.clone(),
                    expected,
                    got: t.data.len(),
                });
            }
        }
        for (sym, t) in &self.funcs {
            let expected = self.size().pow(t.arity as u32);
            if t.data.len() != expected {
                return Err(SemanticsError::TableSize {
                    sym: sym.clone(),
                    expected,
                    got: t.data.len(),
                });
            }
        }
        Ok(())
    }

    /// Checks that every predicate value is a member of the Goedel set.
    pub fn check_values(&self, set: &GoedelSet) -> Result<(), SemanticsError> {
        for (sym, t) in &self.preds {
            for (ix, v) in t.data.iter().enumerate() {
                if !set.member(v) {
                    let args = unrank(ix, self.size(), t.arity)
                        .into_iter()
                        .map(|e| self.elements[e].clone())
                        .collect();
                    return Err(SemanticsError::ValueOutsideSet {
                        sym: sym.clone(),
                        value: v.clone(),
                        args,
                    });
                }
            }
        }
        Ok(())
    }

    /// Signature implied by the interpreted symbols.
    pub fn infer_signature(&self, constants: ConstantFamily) -> Signature {
        let mut sig = Signature::new(constants, self.delta_enabled);
        for (p, t) in &self.preds {
            sig.preds.insert(p.clone(), t.arity);
        }
        for (f, t) in &self.funcs {
            sig.funcs.insert(f.clone(), t.arity);
        }
        for c in self.consts.keys() {
            sig.consts.insert(c.clone());
        }
        sig
    }

    /// Parses the line-based structure file format:
    ///
    /// ```text
    /// universe a b c
    /// pred R/1: a=1/3 b=2/3 default=0
    /// pred rho/0: 1/2
    /// fun f/1: a->b b->a c->c
    /// const c=a
    /// delta on
    /// ```
    pub fn parse(text: &str) -> Result<Structure, SemanticsError> {
        let file_err = |line: usize, msg: String| SemanticsError::File { line, msg };
        let mut elements: Vec<String> = Vec::new();
        let mut preds = BTreeMap::new();
        let mut funcs = BTreeMap::new();
        let mut consts = BTreeMap::new();
        let mut delta_enabled = false;
        let index_of = |elements: &Vec<String>, name: &str, line: usize| {
            elements
                .iter()
                .position(|e| e == name)
                .ok_or_else(|| file_err(line, format!("unknown element `{name}`")))
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let line = match raw.find('#') {
                Some(ix) => &raw[..ix],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("universe") {
                if !elements.is_empty() {
                    return Err(file_err(line_no, "duplicate universe line".into()));
                }
                elements = rest.split_whitespace().map(str::to_string).collect();
                let dedup: BTreeSet<&String> = elements.iter().collect();
                if elements.is_empty() || dedup.len() != elements.len() {
                    return Err(file_err(
                        line_no,
                        "universe must list distinct, at least one element".into(),
                    ));
                }
            } else if let Some(rest) = line.strip_prefix("pred") {
                let (name, arity, body) = parse_symbol_header(rest, line_no)?;
                let size = elements.len();
                let total = size.pow(arity as u32);
                let mut data: Vec<Option<Value>> = vec![None; total];
                let mut default: Option<Value> = None;
                if arity == 0 {
                    // `pred rho/0: 1/2` (bare value), `default=` also accepted
                    let lit = body.trim();
                    let lit = lit.strip_prefix("default=").unwrap_or(lit);
                    let v: Value = lit
                        .parse()
                        .map_err(|e| file_err(line_no, format!("bad value `{lit}`: {e}")))?;
                    data[0] = Some(v);
                } else {
                    for entry in body.split_whitespace() {
                        let (lhs, rhs) = entry
                            .split_once('=')
                            .ok_or_else(|| file_err(line_no, format!("bad entry `{entry}`")))?;
                        if lhs == "default" {
                            default = Some(rhs.parse().map_err(|e| {
                                file_err(line_no, format!("bad value `{rhs}`: {e}"))
                            })?);
                            continue;
                        }
                        let value: Value = rhs
                            .parse()
                            .map_err(|e| file_err(line_no, format!("bad value `{rhs}`: {e}")))?;
                        let args = parse_tuple(lhs, arity, &elements, line_no, &index_of)?;
                        data[table_index(&args, size)] = Some(value);
                    }
                }
                let data: Result<Vec<Value>, _> = data
                    .into_iter()
                    .map(|slot| {
                        slot.or_else(|| default.clone()).ok_or_else(|| {
                            file_err(line_no, format!("table for `{name}` is not total"))
                        })
                    })
                    .collect();
                preds.insert(
                    name,
                    ValueTable {
                        arity,
                        data: data?,
                    },
                );
            } else if let Some(rest) = line.strip_prefix("fun") {
                let (name, arity, body) = parse_symbol_header(rest, line_no)?;
                let size = elements.len();
                let total = size.pow(arity as u32);
                let mut data: Vec<Option<usize>> = vec![None; total];
                for entry in body.split_whitespace() {
                    let (lhs, rhs) = entry
                        .split_once("->")
                        .ok_or_else(|| file_err(line_no, format!("bad entry `{entry}`")))?;
                    let target = index_of(&elements, rhs.trim(), line_no)?;
                    let args = parse_tuple(lhs, arity, &elements, line_no, &index_of)?;
                    data[table_index(&args, size)] = Some(target);
                }
                let data: Result<Vec<usize>, _> = data
                    .into_iter()
                    .map(|slot| {
                        slot.ok_or_else(|| {
                            file_err(line_no, format!("table for `{name}` is not total"))
                        })
                    })
                    .collect();
                funcs.insert(
                    name,
                    ElemTable {
                        arity,
                        data: data?,
                    },
                );
            } else if let Some(rest) = line.strip_prefix("const") {
                let (name, target) = rest
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| file_err(line_no, "expected `const name=element`".into()))?;
                let elem = index_of(&elements, target.trim(), line_no)?;
                consts.insert(name.trim().to_string(), elem);
            } else if line == "delta on" {
                delta_enabled = true;
            } else {
                return Err(file_err(line_no, format!("unrecognized line `{line}`")));
            }
        }
        if elements.is_empty() {
            return Err(file_err(0, "missing universe line".into()));
        }
        let s = Structure {
            elements,
            preds,
            funcs,
            consts,
            delta_enabled,
        };
        s.check_totality()?;
        Ok(s)
    }
}

fn parse_symbol_header(
    rest: &str,
    line: usize,
) -> Result<(String, usize, String), SemanticsError> {
    let file_err = |msg: String| SemanticsError::File { line, msg };
    let (head, body) = rest
        .split_once(':')
        .ok_or_else(|| file_err("expected `name/arity: ...`".into()))?;
    let (name, arity) = head
        .trim()
        .split_once('/')
        .ok_or_else(|| file_err("expected `name/arity`".into()))?;
    let arity: usize = arity
        .trim()
        .parse()
        .map_err(|_| file_err(format!("bad arity `{arity}`")))?;
    Ok((name.trim().to_string(), arity, body.to_string()))
}

fn parse_tuple(
    lhs: &str,
    arity: usize,
    elements: &Vec<String>,
    line: usize,
    index_of: &impl Fn(&Vec<String>, &str, usize) -> Result<usize, SemanticsError>,
) -> Result<Vec<usize>, SemanticsError> {
    let parts: Vec<&str> = if lhs.trim().is_empty() {
        Vec::new()
    } else {
        lhs.split(',').map(str::trim).collect()
    };
    if parts.len() != arity {
        return Err(SemanticsError::File {
            line,
            msg: format!("tuple `{lhs}` does not match arity {arity}"),
        });
    }
    parts
        .into_iter()
        .map(|p| index_of(elements, p, line))
        .collect()
}

fn unrank(mut ix: usize, size: usize, arity: usize) -> Vec<usize> {
    let mut t = vec![0usize; arity];
    for slot in t.iter_mut().rev() {
        *slot = ix % size;
        ix /= size;
    }
    t
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "universe")?;
        for e in &self.elements {
            write!(f, " {e}")?;
        }
        writeln!(f)?;
        if self.delta_enabled {
            writeln!(f, "delta on")?;
        }
        for (name, t) in &self.preds {
            write!(f, "pred {name}/{}:", t.arity)?;
            for (ix, v) in t.data.iter().enumerate() {
                let args = unrank(ix, self.size(), t.arity);
                let tuple: Vec<&str> = args.iter().map(|a| self.elements[*a].as_str()).collect();
                if t.arity == 0 {
                    write!(f, " {v}")?;
                } else {
                    write!(f, " {}={v}", tuple.join(","))?;
                }
            }
            writeln!(f)?;
        }
        for (name, t) in &self.funcs {
            write!(f, "fun {name}/{}:", t.arity)?;
            for (ix, e) in t.data.iter().enumerate() {
                let args = unrank(ix, self.size(), t.arity);
                let tuple: Vec<&str> = args.iter().map(|a| self.elements[*a].as_str()).collect();
                write!(f, " {}->{}", tuple.join(","), self.elements[*e])?;
            }
            writeln!(f)?;
        }
        for (name, e) in &self.consts {
            writeln!(f, "const {name}={}", self.elements[*e])?;
        }
        Ok(())
    }
}

/// Interprets a term in the structure under the environment.
pub fn eval_term(
    m: &Structure,
    t: &Term,
    env: &Environment,
) -> Result<usize, SemanticsError> {
    match t {
        Term::Var(v) => env
            .get(v)
            .ok_or_else(|| SemanticsError::UnboundVariable(v.clone())),
        Term::Const(c) => m
            .consts
            .get(c)
            .copied()
            .ok_or_else(|| SemanticsError::MissingSymbol(c.clone())),
        Term::App(f, args) => {
            let args: Result<Vec<usize>, _> =
                args.iter().map(|t| eval_term(m, t, env)).collect();
            m.func_value(f, &args?)
        }
    }
}

/// Per-call evaluation context; memoizes closed-over subformula values keyed
/// by the bindings of their free variables (a pure cache).
struct EvalCtx<'a> {
    m: &'a Structure,
    free: HashMap<*const Formula, Vec<String>>,
    cache: HashMap<(*const Formula, Vec<usize>), Value>,
}

impl<'a> EvalCtx<'a> {
    fn free_of(&mut self, f: &Formula) -> Vec<String> {
        let key = f as *const Formula;
        if let Some(v) = self.free.get(&key) {
            return v.clone();
        }
        let v: Vec<String> = f.free_vars().into_iter().collect();
        self.free.insert(key, v.clone());
        v
    }

    fn eval(&mut self, f: &Formula, env: &mut Environment) -> Result<Value, SemanticsError> {
        let key_vars = self.free_of(f);
        let mut key_binds = Vec::with_capacity(key_vars.len());
        for v in &key_vars {
            match env.get(v) {
                Some(e) => key_binds.push(e),
                None => return Err(SemanticsError::UnboundVariable(v.clone())),
            }
        }
        let key = (f as *const Formula, key_binds);
        if let Some(v) = self.cache.get(&key) {
            return Ok(v.clone());
        }
        let value = match f {
            Formula::Bot => Value::one(),
            Formula::TruthConst(r) => r.clone(),
            Formula::Atom(p, args) => {
                let args: Result<Vec<usize>, _> =
                    args.iter().map(|t| eval_term(self.m, t, env)).collect();
                self.m.pred_value(p, &args?)?.clone()
            }
            Formula::And(a, b) => values::and(&self.eval(a, env)?, &self.eval(b, env)?),
            Formula::To(a, b) => values::resid(&self.eval(a, env)?, &self.eval(b, env)?),
            Formula::Delta(a) => {
                if !self.m.delta_enabled {
                    return Err(SemanticsError::DeltaDisabled);
                }
                values::delta(&self.eval(a, env)?)
            }
            Formula::Forall(x, a) => {
                let saved = env.remove(x);
                let mut best: Option<Value> = None;
                for e in 0..self.m.size() {
                    env.bind(x.clone(), e);
                    let v = self.eval(a, env)?;
                    best = Some(match best {
                        None => v,
                        Some(b) => values::and(&b, &v), // sup = max
                    });
                }
                env.remove(x);
                if let Some(s) = saved {
                    env.bind(x.clone(), s);
                }
                best.expect("universes are nonempty")
            }
            Formula::Exists(x, a) => {
                let saved = env.remove(x);
                let mut best: Option<Value> = None;
                for e in 0..self.m.size() {
                    env.bind(x.clone(), e);
                    let v = self.eval(a, env)?;
                    best = Some(match best {
                        None => v,
                        Some(b) => values::or(&b, &v), // inf = min
                    });
                }
                env.remove(x);
                if let Some(s) = saved {
                    env.bind(x.clone(), s);
                }
                best.expect("universes are nonempty")
            }
        };
        self.cache.insert(key, value.clone());
        Ok(value)
    }
}

/// Interprets a formula in the structure under the environment.
pub fn eval_formula(
    m: &Structure,
    f: &Formula,
    env: &Environment,
) -> Result<Value, SemanticsError> {
    let mut ctx = EvalCtx {
        m,
        free: HashMap::new(),
        cache: HashMap::new(),
    };
    ctx.eval(f, &mut env.clone())
}

/// Result of checking a structure against a sentence list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelCheck {
    Models,
    Fails { sentence: Formula, value: Value },
}

impl ModelCheck {
    pub fn is_model(&self) -> bool {
        matches!(self, ModelCheck::Models)
    }
}

/// True iff every sentence evaluates to `0`; otherwise reports the first
/// failing sentence and its value.
pub fn models(m: &Structure, sentences: &[Formula]) -> Result<ModelCheck, SemanticsError> {
    let env = Environment::new();
    for s in sentences {
        let v = eval_formula(m, s, &env)?;
        if !v.is_zero() {
            return Ok(ModelCheck::Fails {
                sentence: s.clone(),
                value: v,
            });
        }
    }
    Ok(ModelCheck::Models)
}

/// Display helper for the usual-semantics reading: `1 - v`. Never used in
/// core evaluation.
pub fn dualize_display(v: &Value) -> Value {
    Value::from_ratio(num::rational::BigRational::from_integer(1.into()) - v.ratio())
        .expect("1 - v stays inside [0,1]")
}

/// Expands quantifiers over named universe elements, turning a function-free
/// sentence into a propositional formula over ground atoms `P@e1,e2`.
pub fn ground_over(f: &Formula, elems: &[&str]) -> Result<Formula, SemanticsError> {
    fn ground_term(t: &Term) -> Result<String, SemanticsError> {
        match t {
            // After grounding substitution every variable holds an element tag.
            Term::Var(v) => Ok(v.clone()),
            _ => Err(SemanticsError::NotGroundable),
        }
    }
    fn walk(f: &Formula, elems: &[&str]) -> Result<Formula, SemanticsError> {
        Ok(match f {
            Formula::Bot | Formula::TruthConst(_) => f.clone(),
            Formula::Atom(p, args) => {
                if args.is_empty() {
                    f.clone()
                } else {
                    let tags: Result<Vec<String>, _> = args.iter().map(ground_term).collect();
                    Formula::atom0(format!("{p}@{}", tags?.join(",")))
                }
            }
            Formula::And(a, b) => Formula::and(walk(a, elems)?, walk(b, elems)?),
            Formula::To(a, b) => Formula::to(walk(a, elems)?, walk(b, elems)?),
            Formula::Delta(a) => Formula::delta(walk(a, elems)?),
            Formula::Forall(x, a) => {
                let mut parts = elems.iter().map(|e| {
                    walk(&a.subst_var(x, &Term::Var((*e).to_string())), elems)
                });
                let first = parts.next().expect("nonempty universe")?;
                parts.try_fold(first, |acc, p| Ok(Formula::and(acc, p?)))?
            }
            Formula::Exists(x, a) => {
                let mut parts = elems.iter().map(|e| {
                    walk(&a.subst_var(x, &Term::Var((*e).to_string())), elems)
                });
                let first = parts.next().expect("nonempty universe")?;
                parts.try_fold(first, |acc, p| Ok(Formula::or(acc, p?)))?
            }
        })
    }
    if elems.is_empty() {
        return Err(SemanticsError::NotGroundable);
    }
    walk(f, elems)
}
