//! Finite linear Goedel algebras with constants, the semantic Lindenbaum
//! quotient, dense completion, and the embedding into the unit interval
//! (both the finite-constants case and the norm-partition case for constant
//! sets accumulating only at 0).

use crate::decide::{self, DecideConfig, DecideError};
use crate::syntax::Formula;
use crate::values::{ConstantFamily, GoedelSet, LimitPoints, Value, ValueError};
use num::rational::BigRational;
use num::BigInt;
use rand::prelude::*;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("algebra violates its laws:\n{}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\n"))]
    Violations(Vec<Violation>),
    #[error("theory is not complete over the formula universe: neither direction of ({left}, {right}) is entailed")]
    NotComplete { left: Formula, right: Formula },
    #[error("induced operation mismatch: [{compound}] is not the class the chain operations give")]
    InducedOpMismatch { compound: Formula },
    #[error("constant {0} interpreted by the algebra is not a member of A")]
    ConstantNotInFamily(Value),
    #[error("embedding requires A' ⊆ {{0}}, but the limit points are {0}")]
    LimitPointsUnsupported(LimitPoints),
    #[error("algebra file, line {line}: {msg}")]
    File { line: usize, msg: String },
    #[error(transparent)]
    Decide(#[from] DecideError),
    #[error(transparent)]
    Value(#[from] ValueError),
}

/// A finite linear Goedel algebra: a chain with join = max, meet = min, a
/// residuum (order-derived unless a custom table is supplied), constant
/// elements, and optionally the projection operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GAlgebra {
    /// Chain elements, ascending; index 0 is the bottom (absolute truth),
    /// the last index the top.
    pub elements: Vec<String>,
    /// Custom residuum table, `resid[a][b]`; `None` uses the order-derived
    /// residuum (0 when a >= b, else b).
    pub resid_table: Option<Vec<Vec<usize>>>,
    /// Constant interpretation `r -> element index`.
    pub constants: BTreeMap<Value, usize>,
    /// Whether the algebra carries the projection operation.
    pub delta: bool,
}

impl GAlgebra {
    pub fn chain(names: Vec<String>) -> Self {
        GAlgebra {
            elements: names,
            resid_table: None,
            constants: BTreeMap::new(),
            delta: false,
        }
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn bottom(&self) -> usize {
        0
    }

    pub fn top(&self) -> usize {
        self.elements.len() - 1
    }

    pub fn join(&self, a: usize, b: usize) -> usize {
        a.max(b)
    }

    pub fn meet(&self, a: usize, b: usize) -> usize {
        a.min(b)
    }

    pub fn resid(&self, a: usize, b: usize) -> usize {
        match &self.resid_table {
            Some(t) => t[a][b],
            None => {
                if a >= b {
                    0
                } else {
                    b
                }
            }
        }
    }

    pub fn delta_op(&self, a: usize) -> usize {
        if a == 0 {
            0
        } else {
            self.top()
        }
    }

    /// Parses the algebra text format:
    ///
    /// ```text
    /// chain e0 < e1 < e2 < e3
    /// const 1/3 = e1
    /// resid e1 e2 = e2
    /// delta on
    /// ```
    pub fn parse(text: &str) -> Result<GAlgebra, AlgebraError> {
        let mut alg: Option<GAlgebra> = None;
        let mut custom: Vec<(usize, usize, usize)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let err = |msg: String| AlgebraError::File { line: line_no, msg };
            let line = match raw.find('#') {
                Some(ix) => &raw[..ix],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("chain") {
                let names: Vec<String> = rest.split('<').map(|s| s.trim().to_string()).collect();
                if names.iter().any(String::is_empty) || names.len() < 2 {
                    return Err(err("chain needs at least `bottom < top`".into()));
                }
                alg = Some(GAlgebra::chain(names));
            } else if let Some(rest) = line.strip_prefix("const") {
                let alg = alg.as_mut().ok_or_else(|| err("chain line must come first".into()))?;
                let (val, elem) = rest
                    .split_once('=')
                    .ok_or_else(|| err("expected `const r = element`".into()))?;
                let val: Value = val.trim().parse()?;
                let ix = alg
                    .elements
                    .iter()
                    .position(|e| e == elem.trim())
                    .ok_or_else(|| err(format!("unknown element `{}`", elem.trim())))?;
                alg.constants.insert(val, ix);
            } else if let Some(rest) = line.strip_prefix("resid") {
                let alg = alg.as_ref().ok_or_else(|| err("chain line must come first".into()))?;
                let (args, out) = rest
                    .split_once('=')
                    .ok_or_else(|| err("expected `resid a b = c`".into()))?;
                let parts: Vec<&str> = args.split_whitespace().collect();
                if parts.len() != 2 {
                    return Err(err("expected `resid a b = c`".into()));
                }
                let pos = |name: &str| {
                    alg.elements
                        .iter()
                        .position(|e| e == name)
                        .ok_or_else(|| AlgebraError::File {
                            line: line_no,
                            msg: format!("unknown element `{name}`"),
                        })
                };
                custom.push((pos(parts[0])?, pos(parts[1])?, pos(out.trim())?));
            } else if line == "delta on" {
                let alg = alg.as_mut().ok_or_else(|| err("chain line must come first".into()))?;
                alg.delta = true;
            } else {
                return Err(err(format!("unrecognized line `{line}`")));
            }
        }
        let mut alg = alg.ok_or(AlgebraError::File {
            line: 0,
            msg: "missing chain line".into(),
        })?;
        if !custom.is_empty() {
            let n = alg.size();
            // start from the order-derived residuum, then overlay
            let mut table: Vec<Vec<usize>> = (0..n)
                .map(|a| (0..n).map(|b| if a >= b { 0 } else { b }).collect())
                .collect();
            for (a, b, c) in custom {
                table[a][b] = c;
            }
            alg.resid_table = Some(table);
        }
        Ok(alg)
    }
}

impl fmt::Display for GAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chain {}", self.elements.join(" < "))?;
        writeln!(f)?;
        if self.delta {
            writeln!(f, "delta on")?;
        }
        for (r, ix) in &self.constants {
            writeln!(f, "const {r} = {}", self.elements[*ix])?;
        }
        Ok(())
    }
}

/// A law violation with its witness elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub law: String,
    pub witness: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.law, self.witness)
    }
}

/// Exhaustively checks the algebra laws; the empty list means OK.
pub fn validate_galgebra(alg: &GAlgebra) -> Vec<Violation> {
    let n = alg.size();
    let name = |i: usize| alg.elements[i].as_str();
    let mut out = Vec::new();
    // adjoint pair: a ⊕ b >= c iff a >= b ⊸ c
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let lhs = alg.join(a, b) >= c;
                let rhs = a >= alg.resid(b, c);
                if lhs != rhs {
                    out.push(Violation {
                        law: "adjointness".into(),
                        witness: format!("(a,b,c) = ({}, {}, {})", name(a), name(b), name(c)),
                    });
                }
            }
        }
    }
    // prelinearity: (a ⊸ b) ⊻ (b ⊸ a) = bottom
    for a in 0..n {
        for b in 0..n {
            if alg.meet(alg.resid(a, b), alg.resid(b, a)) != alg.bottom() {
                out.push(Violation {
                    law: "prelinearity".into(),
                    witness: format!("(a,b) = ({}, {})", name(a), name(b)),
                });
            }
        }
    }
    // constant laws
    for (r, &ir) in &alg.constants {
        for (s, &is) in &alg.constants {
            // (4) r ⊕ s = max{r,s}
            let max_ix = alg.constants[std::cmp::max(r, s)];
            if alg.join(ir, is) != max_ix {
                out.push(Violation {
                    law: "constant-join (4)".into(),
                    witness: format!("r = {r}, s = {s}"),
                });
            }
            // (5) r ⊸ s = 0 iff r >= s
            if (alg.resid(ir, is) == alg.bottom()) != (r >= s) {
                out.push(Violation {
                    law: "constant-residuum (5)".into(),
                    witness: format!("r = {r}, s = {s}"),
                });
            }
            // (6) r ⊸ s = s iff r < s
            if (alg.resid(ir, is) == is) != (r < s || is == alg.bottom() && r >= s) {
                // r >= s gives bottom; that coincides with s only when s is bottom
                out.push(Violation {
                    law: "constant-residuum (6)".into(),
                    witness: format!("r = {r}, s = {s}"),
                });
            }
        }
        // (7) bottom < r < top for 0 < r < 1
        if !r.is_zero() && !r.is_one() && (ir == alg.bottom() || ir == alg.top()) {
            out.push(Violation {
                law: "constant-strictness (7)".into(),
                witness: format!("r = {r} sits at {}", name(ir)),
            });
        }
    }
    if alg.delta {
        // (8) delta(bottom) = bottom, (9) delta(a) = top otherwise
        for a in 0..n {
            let d = alg.delta_op(a);
            let want = if a == alg.bottom() { alg.bottom() } else { alg.top() };
            if d != want {
                out.push(Violation {
                    law: "projection (8)-(9)".into(),
                    witness: format!("a = {}", name(a)),
                });
            }
        }
    }
    out
}

/// The semantic Lindenbaum quotient of a finite formula universe modulo a
/// complete theory: classes of mutual entailment, ordered as a chain.
///
/// Provability is replaced by decided semantic entailment throughout, so the
/// relation used is the finite-entailment one; reports label it that way.
/// The truth constants 0 and 1 (bot) are always adjoined so the chain has a
/// genuine bottom and top, along with every truth constant occurring in the
/// universe. Chain operations are order-derived (the adjoint-pair law forces
/// them on a chain) and verified against any compound formulas present.
#[derive(Debug, Clone)]
pub struct Lindenbaum {
    pub algebra: GAlgebra,
    /// Members of each class, ascending chain order.
    pub classes: Vec<Vec<Formula>>,
    pub class_of: BTreeMap<Formula, usize>,
}

pub fn lindenbaum(
    theory: &[Formula],
    universe: &[Formula],
    set: &GoedelSet,
    constants: &ConstantFamily,
    config: &DecideConfig,
) -> Result<Lindenbaum, AlgebraError> {
    let mut formulas: Vec<Formula> = vec![
        Formula::TruthConst(Value::zero()),
        Formula::Bot,
    ];
    for f in universe {
        formulas.push(f.clone());
        for r in f.truth_constants() {
            formulas.push(Formula::TruthConst(r));
        }
    }
    formulas.sort();
    formulas.dedup();

    // Satisfying arrangements of the theory over the full symbol stock;
    // every pairwise entailment below is decided against this one set,
    // which is exactly what per-pair `entails` calls would enumerate.
    let mut atoms: std::collections::BTreeSet<String> = std::collections::BTreeSet::new();
    let mut consts: std::collections::BTreeSet<Value> = std::collections::BTreeSet::new();
    for f in theory.iter().chain(&formulas) {
        atoms.extend(f.preds_used().into_keys());
        consts.extend(f.truth_constants());
    }
    let atoms: Vec<String> = atoms.into_iter().collect();
    let consts: Vec<Value> = consts.into_iter().collect();
    let zero = decide::Sym::Const(0);
    let mut models: Vec<decide::Arrangement> = Vec::new();
    'arrs: for arr in decide::enumerate_arrangements(&atoms, &consts, set, config)? {
        for s in theory {
            if decide::eval_symbolic(s, &arr)? != zero {
                continue 'arrs;
            }
        }
        models.push(arr);
    }
    let _ = constants;

    let n = formulas.len();
    // le[i][j]: value of formulas[i] <= value of formulas[j] in every model,
    // i.e. the theory entails formulas[j] -> formulas[i]
    let mut syms = vec![Vec::with_capacity(models.len()); n];
    for (i, f) in formulas.iter().enumerate() {
        for arr in &models {
            syms[i].push(decide::eval_symbolic(f, arr)?);
        }
    }
    let mut le = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            le[i][j] = syms[i].iter().zip(&syms[j]).all(|(vi, vj)| vj >= vi);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if !le[i][j] && !le[j][i] {
                return Err(AlgebraError::NotComplete {
                    left: formulas[i].clone(),
                    right: formulas[j].clone(),
                });
            }
        }
    }
    // classes of mutual entailment, sorted by the chain order
    let mut class_ids: Vec<Option<usize>> = vec![None; n];
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..n {
        if class_ids[i].is_some() {
            continue;
        }
        let id = reps.len();
        reps.push(i);
        for j in i..n {
            if le[i][j] && le[j][i] {
                class_ids[j] = Some(id);
            }
        }
    }
    let mut order: Vec<usize> = (0..reps.len()).collect();
    order.sort_by(|&a, &b| {
        if reps[a] == reps[b] {
            std::cmp::Ordering::Equal
        } else if le[reps[a]][reps[b]] {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Greater
        }
    });
    let rank_of_id: BTreeMap<usize, usize> =
        order.iter().enumerate().map(|(rank, id)| (*id, rank)).collect();

    let mut classes: Vec<Vec<Formula>> = vec![Vec::new(); reps.len()];
    let mut class_of = BTreeMap::new();
    for (i, f) in formulas.iter().enumerate() {
        let rank = rank_of_id[&class_ids[i].unwrap()];
        classes[rank].push(f.clone());
        class_of.insert(f.clone(), rank);
    }

    let mut algebra = GAlgebra::chain(
        classes
            .iter()
            .map(|members| format!("[{}]", members[0]))
            .collect(),
    );
    algebra.delta = theory.iter().chain(universe).any(Formula::has_delta);
    for f in &formulas {
        if let Formula::TruthConst(r) = f {
            if !r.is_zero() && !r.is_one() {
                algebra.constants.insert(r.clone(), class_of[f]);
            }
        }
    }

    // verify induced operations against compounds present in the universe
    for f in &formulas {
        let (expected, compound) = match f {
            Formula::And(a, b) => {
                match (class_of.get(a.as_ref()), class_of.get(b.as_ref())) {
                    (Some(&ca), Some(&cb)) => (algebra.join(ca, cb), f),
                    _ => continue,
                }
            }
            Formula::To(a, b) => {
                match (class_of.get(a.as_ref()), class_of.get(b.as_ref())) {
                    (Some(&ca), Some(&cb)) => (algebra.resid(ca, cb), f),
                    _ => continue,
                }
            }
            Formula::Delta(a) => match class_of.get(a.as_ref()) {
                Some(&ca) => (algebra.delta_op(ca), f),
                None => continue,
            },
            _ => continue,
        };
        if class_of[compound] != expected {
            return Err(AlgebraError::InducedOpMismatch {
                compound: compound.clone(),
            });
        }
    }
    Ok(Lindenbaum {
        algebra,
        classes,
        class_of,
    })
}

/// Declared order type of a streamed countable chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamKind {
    /// `bottom < a1 < a2 < ... < top`: the top is approached from below and
    /// has no predecessor.
    AscendingToTop,
    /// `bottom < ... < a2 < a1 < top`: the bottom is approached from above
    /// and has no successor.
    DescendingToBottom,
}

/// An element of a streamed chain or its completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompletionElem {
    Bottom,
    /// The n-th stream element, n >= 1.
    Stream(u64),
    /// A rational of the block attached at the accumulation element.
    BlockRational(Value),
    Top,
}

/// Dense completion: original elements plus a rational block `{u} × (0,1)∩Q`
/// attached lazily at each element that is accumulated from one side without
/// an immediate neighbor there. Finite chains have no such element and come
/// back as an isomorphic copy.
#[derive(Debug, Clone)]
pub enum DenseCompletion {
    Copy(GAlgebra),
    Streamed(StreamKind),
}

impl DenseCompletion {
    /// The image of an original element under `u -> (u, 0)`.
    pub fn of_original(&self, e: CompletionElem) -> CompletionElem {
        e
    }

    /// Comparison in the completed order.
    pub fn lt(&self, a: &CompletionElem, b: &CompletionElem) -> bool {
        use CompletionElem::*;
        let kind = match self {
            DenseCompletion::Copy(_) => return false, // copies carry no stream elements
            DenseCompletion::Streamed(k) => *k,
        };
        let rank = |e: &CompletionElem| -> (u8, BigRational) {
            match (kind, e) {
                (_, Bottom) => (0, BigRational::from_integer(BigInt::from(0))),
                (_, Top) => (3, BigRational::from_integer(BigInt::from(0))),
                (StreamKind::AscendingToTop, Stream(n)) => {
                    (1, BigRational::from_integer(BigInt::from(*n)))
                }
                // the block sits between every stream element and the top
                (StreamKind::AscendingToTop, BlockRational(q)) => (2, q.ratio().clone()),
                // descending: larger n means smaller element; block below all
                (StreamKind::DescendingToBottom, BlockRational(q)) => (1, q.ratio().clone()),
                (StreamKind::DescendingToBottom, Stream(n)) => {
                    (2, -BigRational::from_integer(BigInt::from(*n)))
                }
            }
        };
        rank(a) < rank(b)
    }

    /// A completion element strictly between the two, when the completion
    /// provides one. Adjacent original pairs stay adjacent.
    pub fn between(&self, a: &CompletionElem, b: &CompletionElem) -> Option<CompletionElem> {
        use CompletionElem::*;
        if !self.lt(a, b) {
            return None;
        }
        let kind = match self {
            DenseCompletion::Copy(_) => return None,
            DenseCompletion::Streamed(k) => *k,
        };
        match (kind, a, b) {
            // the block densifies the approach to the accumulation element
            (StreamKind::AscendingToTop, Stream(_), Top) => {
                Some(BlockRational(Value::frac(1, 2)))
            }
            (StreamKind::AscendingToTop, BlockRational(q), Top) => {
                let mid = (q.ratio() + BigRational::from_integer(BigInt::from(1)))
                    / BigRational::from_integer(BigInt::from(2));
                Some(BlockRational(Value::from_ratio(mid).ok()?))
            }
            (StreamKind::AscendingToTop, Stream(n), BlockRational(_)) => Some(Stream(n + 1)),
            (StreamKind::AscendingToTop, BlockRational(p), BlockRational(q)) => {
                let mid = (p.ratio() + q.ratio()) / BigRational::from_integer(BigInt::from(2));
                Some(BlockRational(Value::from_ratio(mid).ok()?))
            }
            (StreamKind::AscendingToTop, Stream(n), Stream(m)) if *m > n + 1 => {
                Some(Stream(n + 1))
            }
            (StreamKind::DescendingToBottom, Bottom, Stream(_)) => {
                Some(BlockRational(Value::frac(1, 2)))
            }
            (StreamKind::DescendingToBottom, Bottom, BlockRational(q)) => {
                let mid = q.ratio() / BigRational::from_integer(BigInt::from(2));
                Some(BlockRational(Value::from_ratio(mid).ok()?))
            }
            (StreamKind::DescendingToBottom, BlockRational(_), Stream(n)) => Some(Stream(n + 1)),
            (StreamKind::DescendingToBottom, BlockRational(p), BlockRational(q)) => {
                let mid = (p.ratio() + q.ratio()) / BigRational::from_integer(BigInt::from(2));
                Some(BlockRational(Value::from_ratio(mid).ok()?))
            }
            (StreamKind::DescendingToBottom, Stream(n), Stream(m)) if *n > m + 1 => {
                Some(Stream(m + 1))
            }
            _ => None,
        }
    }
}

/// Dense completion of a validated finite algebra: every element has an
/// immediate neighbor on both sides, so no rational blocks are attached and
/// the completion is an isomorphic copy.
pub fn dense_completion(alg: &GAlgebra) -> DenseCompletion {
    DenseCompletion::Copy(alg.clone())
}

/// Dense completion of a streamed countable chain: one rational block,
/// lazily represented, attached at the declared accumulation element.
pub fn dense_completion_streamed(kind: StreamKind) -> DenseCompletion {
    DenseCompletion::Streamed(kind)
}

/// Which case of the embedding applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbedCase {
    /// A has no limit points: anchor the constants, subdivide the runs
    /// between anchors evenly.
    FiniteConstants,
    /// A accumulates only at 0: partition by the norm
    /// `inf { r : u <= r-bar }` and map each class into the slice of `[0,1]`
    /// between consecutive constants, by right-endpoint-minus-dyadic steps.
    NormPartition,
}

/// An order embedding of the algebra into `[0,1]` fixing the constants,
/// together with its certification.
#[derive(Debug, Clone)]
pub struct EmbeddingMap {
    pub case: EmbedCase,
    /// Image per chain element.
    pub images: Vec<Value>,
    /// Norm per element in the norm-partition case.
    pub norms: Option<Vec<Value>>,
    /// Set when the class mapped to 0 holds more than one element (the map
    /// collapses it, so it is not injective there).
    pub bottom_class_noninjective: bool,
}

impl EmbeddingMap {
    pub fn image(&self, e: usize) -> &Value {
        &self.images[e]
    }
}

impl fmt::Display for EmbeddingMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "case: {}",
            match self.case {
                EmbedCase::FiniteConstants => "finite constants (even subdivision)",
                EmbedCase::NormPartition => "norm partition (dyadic steps below each constant)",
            }
        )?;
        for (e, v) in self.images.iter().enumerate() {
            write!(f, "e{e} -> {v}")?;
            if let Some(norms) = &self.norms {
                write!(f, "  (norm {})", norms[e])?;
            }
            writeln!(f)?;
        }
        if self.bottom_class_noninjective {
            writeln!(f, "warning: bottom norm class has several elements; the map collapses it to 0")?;
        }
        Ok(())
    }
}

fn halve(r: &BigRational) -> BigRational {
    r / BigRational::from_integer(BigInt::from(2))
}

/// Embeds a validated algebra into the unit interval, fixing the constants.
/// Requires the constants of the algebra to be members of `A` and
/// `A' ⊆ {0}`.
pub fn embed(alg: &GAlgebra, family: &ConstantFamily) -> Result<EmbeddingMap, AlgebraError> {
    let violations = validate_galgebra(alg);
    if !violations.is_empty() {
        return Err(AlgebraError::Violations(violations));
    }
    for r in alg.constants.keys() {
        if !family.member(r) {
            return Err(AlgebraError::ConstantNotInFamily(r.clone()));
        }
    }
    let limits = family.limit_points();
    if !limits.subset_of_zero() {
        return Err(AlgebraError::LimitPointsUnsupported(limits));
    }
    let n = alg.size();
    if limits.is_empty() {
        // Case 1: finitely many constants. Anchors at 0, the constants, 1;
        // runs between anchors are subdivided evenly.
        let mut anchors: Vec<(usize, Value)> = vec![(0, Value::zero())];
        let mut by_index: Vec<(usize, Value)> = alg
            .constants
            .iter()
            .map(|(r, ix)| (*ix, r.clone()))
            .collect();
        by_index.sort();
        anchors.extend(by_index);
        anchors.push((n - 1, Value::one()));
        let mut images: Vec<Option<Value>> = vec![None; n];
        for (ix, v) in &anchors {
            images[*ix] = Some(v.clone());
        }
        for w in anchors.windows(2) {
            let (lo_ix, lo_v) = &w[0];
            let (hi_ix, hi_v) = &w[1];
            let k = hi_ix - lo_ix;
            for step in 1..k {
                let frac = BigRational::new(BigInt::from(step), BigInt::from(k));
                let image = lo_v.ratio() + (hi_v.ratio() - lo_v.ratio()) * frac;
                images[lo_ix + step] = Some(Value::from_ratio(image)?);
            }
        }
        Ok(EmbeddingMap {
            case: EmbedCase::FiniteConstants,
            images: images.into_iter().map(Option::unwrap).collect(),
            norms: None,
            bottom_class_noninjective: false,
        })
    } else {
        // Case 2: A accumulates at 0. Norm of u = the least present constant
        // above u (1 when none); the class of norm r maps into
        // (next A-member below r, r], top element first, dyadic steps down.
        let mut norms: Vec<Value> = Vec::with_capacity(n);
        let mut present: Vec<(usize, Value)> = alg
            .constants
            .iter()
            .map(|(r, ix)| (*ix, r.clone()))
            .collect();
        present.sort();
        for u in 0..n {
            if u == 0 {
                norms.push(Value::zero());
            } else {
                let norm = present
                    .iter()
                    .find(|(ix, _)| u <= *ix)
                    .map(|(_, r)| r.clone())
                    .unwrap_or_else(Value::one);
                norms.push(norm);
            }
        }
        let mut images: Vec<Option<Value>> = vec![None; n];
        images[0] = Some(Value::zero());
        let mut class_ids: Vec<Vec<usize>> = Vec::new();
        {
            let mut seen: BTreeMap<Value, usize> = BTreeMap::new();
            for (u, norm) in norms.iter().enumerate().skip(1) {
                let id = *seen.entry(norm.clone()).or_insert_with(|| {
                    class_ids.push(Vec::new());
                    class_ids.len() - 1
                });
                class_ids[id].push(u);
            }
        }
        for class in &class_ids {
            let r = norms[class[0]].clone();
            let hi = r.clone();
            let lo = if r.is_one() {
                // the class above every present constant maps into
                // (largest present constant, 1]
                present
                    .last()
                    .map(|(_, r)| r.clone())
                    .unwrap_or_else(Value::zero)
            } else {
                family
                    .next_below(&r)
                    .expect("A' = {0} provides members below every positive constant")
            };
            // top of the class is the constant element (or the chain top);
            // the rest descend as lo + span/2, lo + span/4, ...
            let mut step = hi.ratio() - lo.ratio();
            for (offset, u) in class.iter().rev().enumerate() {
                if offset == 0 {
                    images[*u] = Some(hi.clone());
                } else {
                    step = halve(&step);
                    images[*u] = Some(Value::from_ratio(lo.ratio() + &step)?);
                }
            }
        }
        Ok(EmbeddingMap {
            case: EmbedCase::NormPartition,
            images: images.into_iter().map(Option::unwrap).collect(),
            norms: Some(norms),
            bottom_class_noninjective: false, // the bottom class is {0^D} in a chain
        })
    }
}

/// Exhaustive certificate for an embedding: strict order preservation,
/// constants fixed, operation transfer.
pub fn certify_embedding(alg: &GAlgebra, map: &EmbeddingMap) -> Vec<Violation> {
    let n = alg.size();
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if (a < b) != (map.images[a] < map.images[b]) && !map.bottom_class_noninjective {
                out.push(Violation {
                    law: "order-preservation".into(),
                    witness: format!("({}, {})", alg.elements[a], alg.elements[b]),
                });
            }
            let join = map.images[alg.join(a, b)].clone();
            if join != crate::values::and(&map.images[a], &map.images[b]) {
                out.push(Violation {
                    law: "join-transfer".into(),
                    witness: format!("({}, {})", alg.elements[a], alg.elements[b]),
                });
            }
            let resid = map.images[alg.resid(a, b)].clone();
            if resid != crate::values::resid(&map.images[a], &map.images[b]) {
                out.push(Violation {
                    law: "residuum-transfer".into(),
                    witness: format!("({}, {})", alg.elements[a], alg.elements[b]),
                });
            }
        }
        if alg.delta {
            let d = map.images[alg.delta_op(a)].clone();
            if d != crate::values::delta(&map.images[a]) {
                out.push(Violation {
                    law: "projection-transfer".into(),
                    witness: alg.elements[a].clone(),
                });
            }
        }
    }
    if !map.images[0].is_zero() {
        out.push(Violation {
            law: "bottom-to-zero".into(),
            witness: alg.elements[0].clone(),
        });
    }
    if !map.images[n - 1].is_one() {
        out.push(Violation {
            law: "top-to-one".into(),
            witness: alg.elements[n - 1].clone(),
        });
    }
    for (r, ix) in &alg.constants {
        if map.images[*ix] != *r {
            out.push(Violation {
                law: "constant-fixed".into(),
                witness: format!("{r}"),
            });
        }
    }
    out
}

/// A random validated algebra: a chain of up to `max_size` elements with
/// order-consistent constants drawn from the family.
pub fn random_galgebra(
    family: &ConstantFamily,
    max_size: usize,
    rng: &mut impl Rng,
) -> GAlgebra {
    let size = rng.gen_range(2..=max_size.max(2));
    let mut alg = GAlgebra::chain((0..size).map(|i| format!("d{i}")).collect());
    alg.delta = rng.gen_bool(0.3);
    if size <= 2 {
        return alg;
    }
    // candidate constants, ascending
    let mut pool: Vec<Value> = match family {
        ConstantFamily::FiniteA(vals) => vals.clone(),
        ConstantFamily::DownwardA => (2..=9u64)
            .map(|m| Value::from_ratio(BigRational::new(BigInt::from(1), BigInt::from(m))).unwrap())
            .rev()
            .collect(),
        ConstantFamily::SeqA { base, families } => {
            let mut v: Vec<Value> = base.clone();
            for fam in families {
                v.extend((1..=5).map(|m| fam.eval(m)));
            }
            v.sort();
            v.dedup();
            v
        }
        ConstantFamily::DenseRationalsA => (1..=7i64).map(|p| Value::frac(p, 8)).collect(),
    };
    pool.sort();
    let interior = size - 2;
    let how_many = rng.gen_range(0..=pool.len().min(interior).min(4));
    // choose constants and distinct interior positions, both ascending
    let mut chosen: Vec<Value> = Vec::new();
    let mut remaining = pool;
    for _ in 0..how_many {
        let i = rng.gen_range(0..remaining.len());
        chosen.push(remaining.remove(i));
    }
    chosen.sort();
    let mut positions: Vec<usize> = (1..size - 1).collect();
    while positions.len() > how_many {
        let i = rng.gen_range(0..positions.len());
        positions.remove(i);
    }
    for (r, ix) in chosen.into_iter().zip(positions) {
        alg.constants.insert(r, ix);
    }
    alg
}
