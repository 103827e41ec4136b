#![allow(clippy::result_large_err)] // error values carry formulas; all error paths are cold

//! Command-line front end for the goedel toolkit.
//!
//! Exit codes: 0 for the expected/positive verdict, 1 for a negative
//! verdict, 2 for usage or input errors (nothing is printed to stdout on
//! code 2). All reports carry exact fractions and are byte-stable across
//! runs for identical inputs.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use goedel_core::algebra::{self, GAlgebra};
use goedel_core::decide::{self, DecideConfig, Verdict};
use goedel_core::henkin;
use goedel_core::lab;
use goedel_core::metric;
use goedel_core::parser::{parse_sentence, parse_theory};
use goedel_core::proofs::{self, ProofError};
use goedel_core::semantics::{self, dualize_display, Environment, Structure};
use goedel_core::syntax::{Formula, Signature, Theory};
use goedel_core::ultraproduct::{self, UltrafilterDesc};
use goedel_core::values::{ConstantFamily, GoedelSet, Value};
use std::fmt::Write as _;
use std::fs;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "goedel", version, about = "Reverse-valued Goedel logics toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct LogicArgs {
    /// Goedel set descriptor: full01, finite{...}, downward, seq{...}
    #[arg(long = "V", default_value = "full01")]
    value_set: String,
    /// Constant family descriptor: empty, finite{...}, downward, seq{...},
    /// dense-rationals
    #[arg(long = "A", default_value = "empty")]
    constants: String,
    /// Enable the projection connective delta
    #[arg(long)]
    delta: bool,
    /// Extra predicate declarations, name/arity (bare identifiers in theory
    /// files are inferred as nullary predicates automatically)
    #[arg(long = "pred")]
    preds: Vec<String>,
    /// Function declarations, name/arity
    #[arg(long = "fun")]
    funs: Vec<String>,
    /// Object constant declarations
    #[arg(long = "const")]
    consts: Vec<String>,
}

#[derive(Args, Clone)]
struct DisplayArgs {
    /// Report values in the usual-semantics reading (1 - v), labeled in the
    /// header; core evaluation is unaffected
    #[arg(long = "display", value_parser = ["reverse", "dual"], default_value = "reverse")]
    display: String,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a sentence in a structure file
    Eval {
        #[arg(long)]
        structure: String,
        #[arg(long)]
        formula: String,
        #[command(flatten)]
        logic: LogicArgs,
        #[command(flatten)]
        display: DisplayArgs,
    },
    /// Decide satisfiability of a propositional theory file
    Sat {
        #[arg(long)]
        theory: String,
        /// Instantiate parametric families for parameters 1..=N
        #[arg(long, default_value_t = 1)]
        n: u64,
        #[arg(long, default_value_t = 6)]
        bound: usize,
        #[command(flatten)]
        logic: LogicArgs,
        #[command(flatten)]
        display: DisplayArgs,
    },
    /// Decide semantic entailment of a goal from a propositional theory
    Entail {
        #[arg(long)]
        theory: String,
        #[arg(long)]
        goal: String,
        #[arg(long, default_value_t = 1)]
        n: u64,
        #[arg(long, default_value_t = 6)]
        bound: usize,
        #[command(flatten)]
        logic: LogicArgs,
        #[command(flatten)]
        display: DisplayArgs,
    },
    /// Approximate entailment ladder: T entails r-bar -> goal for each r
    ApproxEntail {
        #[arg(long)]
        theory: String,
        #[arg(long)]
        goal: String,
        /// Constants r from A plus 1; repeatable
        #[arg(long = "r", required = true)]
        rs: Vec<String>,
        #[arg(long, default_value_t = 1)]
        n: u64,
        #[arg(long, default_value_t = 6)]
        bound: usize,
        #[command(flatten)]
        logic: LogicArgs,
    },
    /// Check a Hilbert-style proof file against a theory file
    CheckProof {
        #[arg(long)]
        theory: Option<String>,
        #[arg(long)]
        proof: String,
        /// Also evaluate the conclusion in N random structures (premise-free
        /// proofs only)
        #[arg(long)]
        spotcheck: Option<usize>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        logic: LogicArgs,
    },
    /// Compactness lab scenarios
    Lab {
        #[command(subcommand)]
        command: LabCommand,
    },
    /// Semantic Lindenbaum quotient of a formula universe modulo a theory
    Lindenbaum {
        #[arg(long)]
        theory: String,
        /// File with one formula per line
        #[arg(long)]
        universe: String,
        #[arg(long, default_value_t = 6)]
        bound: usize,
        #[command(flatten)]
        logic: LogicArgs,
    },
    /// Embed a validated algebra file into the unit interval
    Embed {
        #[arg(long)]
        algebra: String,
        #[command(flatten)]
        logic: LogicArgs,
    },
    /// Completion machinery
    Henkin {
        #[command(subcommand)]
        command: HenkinCommand,
    },
    /// Ultrametric and Lipschitz structure commands
    Metric {
        #[command(subcommand)]
        command: MetricCommand,
    },
    /// Principal ultraproduct of structure files
    Ultraproduct {
        #[arg(long = "structures", num_args = 1.., required = true)]
        structures: Vec<String>,
        /// 1-based index of the principal ultrafilter
        #[arg(long)]
        principal: usize,
        #[command(flatten)]
        logic: LogicArgs,
        #[arg(long)]
        out: Option<String>,
    },
    /// Los-style equality sweep over a principal ultraproduct
    LosCheck {
        #[arg(long = "structures", num_args = 1.., required = true)]
        structures: Vec<String>,
        #[arg(long)]
        principal: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 40)]
        cap: usize,
        #[command(flatten)]
        logic: LogicArgs,
    },
    /// Validate descriptors, structures and algebras
    Validate {
        #[arg(long)]
        structure: Option<String>,
        #[arg(long)]
        algebra: Option<String>,
        #[command(flatten)]
        logic: LogicArgs,
    },
}

#[derive(Subcommand)]
enum LabCommand {
    /// List the built-in scenarios
    List,
    /// Run a scenario: sweep the finite prefixes and analyze the full theory
    Run {
        name: String,
        #[arg(long, default_value_t = 20)]
        k: u64,
    },
}

#[derive(Subcommand)]
enum HenkinCommand {
    /// Extend a satisfiable theory to one complete over a formula universe
    Complete {
        #[arg(long)]
        theory: String,
        #[arg(long)]
        universe: String,
        #[arg(long, default_value_t = 6)]
        bound: usize,
        #[command(flatten)]
        logic: LogicArgs,
    },
    /// Build the canonical structure of the completed theory
    Canonical {
        #[arg(long)]
        theory: String,
        #[arg(long)]
        universe: Option<String>,
        #[arg(long, default_value_t = 6)]
        bound: usize,
        #[arg(long)]
        out: Option<String>,
        #[command(flatten)]
        logic: LogicArgs,
    },
}

#[derive(Subcommand)]
enum MetricCommand {
    /// Check the pseudo-ultrametric laws of the d table
    Validate {
        #[arg(long)]
        structure: String,
    },
    /// Check 1-Lipschitz continuity of every symbol
    Lipschitz {
        #[arg(long)]
        structure: String,
    },
    /// Sweep the formula-level Lipschitz bound
    Bound {
        #[arg(long)]
        structure: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 60)]
        cap: usize,
    },
    /// Quotient by the zero-distance relation
    Quotient {
        #[arg(long)]
        structure: String,
        #[arg(long)]
        out: Option<String>,
    },
}

fn parse_set(text: &str) -> Result<GoedelSet> {
    GoedelSet::parse(text).map_err(|e| anyhow!("bad Goedel set descriptor: {e}"))
}

fn parse_family(text: &str) -> Result<ConstantFamily> {
    ConstantFamily::parse(text).map_err(|e| anyhow!("bad constant family descriptor: {e}"))
}

impl LogicArgs {
    fn set(&self) -> Result<GoedelSet> {
        parse_set(&self.value_set)
    }

    fn family(&self) -> Result<ConstantFamily> {
        parse_family(&self.constants)
    }

    /// Base signature with the declared symbols.
    fn signature(&self) -> Result<Signature> {
        let mut sig = Signature::new(self.family()?, self.delta);
        for decl in &self.preds {
            let (name, arity) = split_decl(decl)?;
            sig = sig.with_pred(&name, arity)?;
        }
        for decl in &self.funs {
            let (name, arity) = split_decl(decl)?;
            sig = sig.with_func(&name, arity)?;
        }
        for name in &self.consts {
            sig = sig.with_const(name)?;
        }
        Ok(sig)
    }
}

fn split_decl(decl: &str) -> Result<(String, usize)> {
    let (name, arity) = decl
        .split_once('/')
        .ok_or_else(|| anyhow!("declarations have the shape name/arity, got `{decl}`"))?;
    Ok((name.to_string(), arity.parse().context("bad arity")?))
}

/// Declares every bare identifier in formula position as a nullary
/// predicate, skipping keywords, bound variables, declared symbols,
/// applied symbols, and anything inside an applied symbol's argument list
/// (those are terms: variables or object constants).
fn infer_nullary_atoms(texts: &[&str], mut sig: Signature) -> Signature {
    const KEYWORDS: [&str; 6] = ["forall", "exists", "bot", "delta", "family", "n"];
    for text in texts {
        let chars: Vec<char> = text.chars().collect();
        let mut bound: Vec<String> = Vec::new();
        let mut i = 0;
        let mut last_was_quantifier = false;
        let mut paren_depth = 0usize;
        // depths at which an argument list opened; nonempty means term context
        let mut arg_regions: Vec<usize> = Vec::new();
        let mut pending_args = false;
        while i < chars.len() {
            let c = chars[i];
            if c == '(' {
                paren_depth += 1;
                if pending_args {
                    arg_regions.push(paren_depth);
                    pending_args = false;
                }
                i += 1;
                continue;
            }
            if c == ')' {
                if arg_regions.last() == Some(&paren_depth) {
                    arg_regions.pop();
                }
                paren_depth = paren_depth.saturating_sub(1);
                i += 1;
                continue;
            }
            pending_args = false;
            if c == '#' {
                // skip the constant literal (digits or a parenthesized form)
                i += 1;
                if chars.get(i) == Some(&'(') {
                    let mut depth = 0;
                    while i < chars.len() {
                        match chars[i] {
                            '(' => depth += 1,
                            ')' => {
                                depth -= 1;
                                if depth == 0 {
                                    i += 1;
                                    break;
                                }
                            }
                            _ => {}
                        }
                        i += 1;
                    }
                } else {
                    while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '/') {
                        i += 1;
                    }
                }
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let applied = chars.get(i) == Some(&'(');
                if applied {
                    pending_args = true;
                }
                if last_was_quantifier {
                    bound.push(word.clone());
                    last_was_quantifier = false;
                    continue;
                }
                if word == "forall" || word == "exists" {
                    last_was_quantifier = true;
                    continue;
                }
                if KEYWORDS.contains(&word.as_str())
                    || applied
                    || !arg_regions.is_empty()
                    || bound.contains(&word)
                    || sig.preds.contains_key(&word)
                    || sig.funcs.contains_key(&word)
                    || sig.consts.contains(&word)
                {
                    continue;
                }
                sig.preds.insert(word, 0);
            } else {
                i += 1;
            }
        }
    }
    sig
}

fn read(path: &str) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read `{path}`"))
}

fn load_theory(path: &str, logic: &LogicArgs) -> Result<(Theory, Signature)> {
    let text = read(path)?;
    let sig = infer_nullary_atoms(&[text.as_str()], logic.signature()?);
    let theory = parse_theory(&text, &sig)?;
    Ok((theory, sig))
}

fn load_formula_lines(text: &str, sig: &Signature) -> Result<Vec<Formula>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("# ") {
            continue;
        }
        out.push(parse_sentence(line, sig)?);
    }
    Ok(out)
}

fn shown(v: &Value, display: &DisplayArgs) -> Value {
    if display.display == "dual" {
        dualize_display(v)
    } else {
        v.clone()
    }
}

fn display_header(out: &mut String, display: &DisplayArgs) {
    if display.display == "dual" {
        out.push_str("display: dual (values shown as 1 - v, usual semantics)\n");
    } else {
        out.push_str("display: reverse (0 is absolute truth)\n");
    }
}

fn verdict_output(verdict: &Verdict, display: &DisplayArgs, out: &mut String) -> i32 {
    match verdict {
        Verdict::Sat(witness) => {
            out.push_str("SAT\n");
            for (name, value) in witness {
                let _ = writeln!(out, "{name} = {}", shown(value, display));
            }
            0
        }
        Verdict::Unsat => {
            out.push_str("UNSAT\n");
            1
        }
        Verdict::Entailed => {
            out.push_str("ENTAILED\n");
            0
        }
        Verdict::NotEntailed(witness) => {
            out.push_str("NOT-ENTAILED\ncountermodel:\n");
            for (name, value) in witness {
                let _ = writeln!(out, "{name} = {}", shown(value, display));
            }
            1
        }
    }
}

fn instantiate(theory: &Theory, n: u64, sig: &Signature) -> Result<Vec<Formula>> {
    Ok(theory.instantiate(n, sig)?)
}

fn run(cli: Cli) -> Result<(String, i32)> {
    let mut out = String::new();
    let code = match cli.command {
        Command::Eval {
            structure,
            formula,
            logic,
            display,
        } => {
            let m = Structure::parse(&read(&structure)?)?;
            let mut sig = m.infer_signature(logic.family()?);
            sig.delta_enabled = sig.delta_enabled || logic.delta;
            let set = logic.set()?;
            m.check_values(&set)?;
            let f = parse_sentence(&formula, &sig)?;
            let value = semantics::eval_formula(&m, &f, &Environment::new())?;
            display_header(&mut out, &display);
            let _ = writeln!(out, "value: {}", shown(&value, &display));
            i32::from(!value.is_zero())
        }
        Command::Sat {
            theory,
            n,
            bound,
            logic,
            display,
        } => {
            let set = logic.set()?;
            let family = logic.family()?;
            family.check_within(&set)?;
            let (theory, sig) = load_theory(&theory, &logic)?;
            let sentences = instantiate(&theory, n, &sig)?;
            let config = DecideConfig { atom_bound: bound };
            let verdict = decide::sat(&sentences, &set, &family, &config)?;
            display_header(&mut out, &display);
            verdict_output(&verdict, &display, &mut out)
        }
        Command::Entail {
            theory,
            goal,
            n,
            bound,
            logic,
            display,
        } => {
            let set = logic.set()?;
            let family = logic.family()?;
            family.check_within(&set)?;
            let text = read(&theory)?;
            let sig = infer_nullary_atoms(&[text.as_str(), goal.as_str()], logic.signature()?);
            let theory = parse_theory(&text, &sig)?;
            let goal = parse_sentence(&goal, &sig)?;
            let sentences = instantiate(&theory, n, &sig)?;
            let config = DecideConfig { atom_bound: bound };
            let verdict = decide::entails(&sentences, &goal, &set, &family, &config)?;
            display_header(&mut out, &display);
            verdict_output(&verdict, &display, &mut out)
        }
        Command::ApproxEntail {
            theory,
            goal,
            rs,
            n,
            bound,
            logic,
        } => {
            let set = logic.set()?;
            let family = logic.family()?;
            family.check_within(&set)?;
            let text = read(&theory)?;
            let sig = infer_nullary_atoms(&[text.as_str(), goal.as_str()], logic.signature()?);
            let theory = parse_theory(&text, &sig)?;
            let goal = parse_sentence(&goal, &sig)?;
            let sentences = instantiate(&theory, n, &sig)?;
            let rs: Result<Vec<Value>, _> = rs.iter().map(|r| r.parse()).collect();
            let rs = rs.map_err(|e| anyhow!("bad r value: {e}"))?;
            let config = DecideConfig { atom_bound: bound };
            let ladder = decide::approx_entails(&sentences, &goal, &set, &family, &rs, &config)?;
            let mut all = true;
            for (r, verdict) in &ladder {
                let word = match verdict {
                    Verdict::Entailed => "ENTAILED",
                    _ => {
                        all = false;
                        "NOT-ENTAILED"
                    }
                };
                let _ = writeln!(out, "r = {r}: {word}");
            }
            i32::from(!all)
        }
        Command::CheckProof {
            theory,
            proof,
            spotcheck,
            seed,
            logic,
        } => {
            let proof_text = read(&proof)?;
            let theory_text = match &theory {
                Some(path) => read(path)?,
                None => String::new(),
            };
            let sig = infer_nullary_atoms(
                &[theory_text.as_str(), proof_text.as_str()],
                logic.signature()?,
            );
            let premises = parse_theory(&theory_text, &sig)?.sentences;
            let pf = proofs::parse_proof(&proof_text, &sig)?;
            match proofs::check_proof(&premises, &pf) {
                Ok(conclusion) => {
                    let _ = writeln!(out, "OK: {conclusion}");
                    let mut code = 0;
                    if let Some(samples) = spotcheck {
                        let report = proofs::soundness_spotcheck(&pf, samples, seed)?;
                        if report.counterexamples.is_empty() {
                            let _ = writeln!(
                                out,
                                "spotcheck: {} samples, all evaluate to 0",
                                report.samples
                            );
                        } else {
                            let _ = writeln!(
                                out,
                                "spotcheck: {} counterexamples (checker bug!)",
                                report.counterexamples.len()
                            );
                            for c in &report.counterexamples {
                                let _ = writeln!(out, "{c}");
                            }
                            code = 1;
                        }
                    }
                    code
                }
                Err(ProofError::Line { line, reason }) => {
                    let _ = writeln!(out, "Error line {line}: {reason}");
                    1
                }
                Err(other) => return Err(other.into()),
            }
        }
        Command::Lab { command } => match command {
            LabCommand::List => {
                for s in lab::scenario_catalog() {
                    let _ = writeln!(out, "{}: {}", s.name, s.description);
                }
                0
            }
            LabCommand::Run { name, k } => {
                let scenario = lab::find_scenario(&name)?;
                let report = lab::run_scenario(&scenario, k)?;
                let _ = write!(out, "{report}");
                i32::from(!report.pass)
            }
        },
        Command::Lindenbaum {
            theory,
            universe,
            bound,
            logic,
        } => {
            let set = logic.set()?;
            let family = logic.family()?;
            let theory_text = read(&theory)?;
            let universe_text = read(&universe)?;
            let sig = infer_nullary_atoms(
                &[theory_text.as_str(), universe_text.as_str()],
                logic.signature()?,
            );
            let premises = parse_theory(&theory_text, &sig)?.sentences;
            let universe_fs = load_formula_lines(&universe_text, &sig)?;
            let config = DecideConfig { atom_bound: bound };
            let lin = algebra::lindenbaum(&premises, &universe_fs, &set, &family, &config)?;
            out.push_str("relation: decided semantic entailment (semantic Lindenbaum)\n");
            for (rank, members) in lin.classes.iter().enumerate() {
                let names: Vec<String> = members.iter().map(|f| f.to_string()).collect();
                let _ = writeln!(out, "class {rank}: {{ {} }}", names.join(", "));
            }
            let _ = write!(out, "{}", lin.algebra);
            0
        }
        Command::Embed { algebra, logic } => {
            let alg = GAlgebra::parse(&read(&algebra)?)?;
            let family = logic.family()?;
            let map = algebra::embed(&alg, &family)?;
            let _ = write!(out, "{map}");
            let violations = algebra::certify_embedding(&alg, &map);
            if violations.is_empty() {
                out.push_str("certificate: ok\n");
                0
            } else {
                for v in &violations {
                    let _ = writeln!(out, "certificate violation: {v}");
                }
                1
            }
        }
        Command::Henkin { command } => match command {
            HenkinCommand::Complete {
                theory,
                universe,
                bound,
                logic,
            } => {
                let set = logic.set()?;
                let family = logic.family()?;
                let theory_text = read(&theory)?;
                let universe_text = read(&universe)?;
                let sig = infer_nullary_atoms(
                    &[theory_text.as_str(), universe_text.as_str()],
                    logic.signature()?,
                );
                let premises = parse_theory(&theory_text, &sig)?.sentences;
                let universe_fs = load_formula_lines(&universe_text, &sig)?;
                let config = DecideConfig { atom_bound: bound };
                let trace =
                    henkin::complete_theory(&premises, &universe_fs, &set, &family, &config)?;
                let _ = write!(out, "{trace}");
                0
            }
            HenkinCommand::Canonical {
                theory,
                universe,
                bound,
                out: out_path,
                logic,
            } => {
                let set = logic.set()?;
                let family = logic.family()?;
                let theory_text = read(&theory)?;
                let universe_text = match &universe {
                    Some(path) => Some(read(path)?),
                    None => None,
                };
                let mut texts = vec![theory_text.as_str()];
                if let Some(u) = &universe_text {
                    texts.push(u.as_str());
                }
                let sig = infer_nullary_atoms(&texts, logic.signature()?);
                let premises = parse_theory(&theory_text, &sig)?.sentences;
                let config = DecideConfig { atom_bound: bound };
                let model = match universe_text {
                    Some(u) => {
                        let universe_fs = load_formula_lines(&u, &sig)?;
                        henkin::canonical_model(&premises, &universe_fs, &set, &family, &config)?
                    }
                    None => {
                        let (_, model) =
                            henkin::complete_and_canonical(&premises, &set, &family, &config)?;
                        model
                    }
                };
                let text = model.structure.to_string();
                match out_path {
                    Some(path) => {
                        fs::write(&path, &text)
                            .with_context(|| format!("cannot write `{path}`"))?;
                        let _ = writeln!(out, "canonical structure written to {path}");
                    }
                    None => out.push_str(&text),
                }
                0
            }
        },
        Command::Metric { command } => match command {
            MetricCommand::Validate { structure } => {
                let m = Structure::parse(&read(&structure)?)?;
                let witnesses = metric::validate_pseudo_ultrametric(&m)?;
                if witnesses.is_empty() {
                    out.push_str("OK: pseudo-ultrametric\n");
                    0
                } else {
                    for w in &witnesses {
                        let _ = writeln!(out, "{w}");
                    }
                    1
                }
            }
            MetricCommand::Lipschitz { structure } => {
                let m = Structure::parse(&read(&structure)?)?;
                let cert = metric::validate_lipschitz(&m)?;
                if cert.is_ok() {
                    out.push_str("OK: all symbols 1-Lipschitz\n");
                    0
                } else {
                    for w in &cert.witnesses {
                        let _ = writeln!(out, "{w}");
                    }
                    1
                }
            }
            MetricCommand::Bound {
                structure,
                depth,
                cap,
            } => {
                let m = Structure::parse(&read(&structure)?)?;
                let report = metric::lipschitz_formula_bound(&m, depth, cap)?;
                let _ = writeln!(
                    out,
                    "checked {} formulas over {} tuple pairs; max slack {}",
                    report.formulas_checked, report.pairs_checked, report.max_slack
                );
                if report.violations.is_empty() {
                    out.push_str("bound holds everywhere\n");
                    0
                } else {
                    for v in &report.violations {
                        let _ = writeln!(out, "violation: {v}");
                    }
                    1
                }
            }
            MetricCommand::Quotient {
                structure,
                out: out_path,
            } => {
                let m = Structure::parse(&read(&structure)?)?;
                let q = metric::quotient(&m)?;
                let text = q.to_string();
                match out_path {
                    Some(path) => {
                        fs::write(&path, &text)
                            .with_context(|| format!("cannot write `{path}`"))?;
                        let _ = writeln!(out, "quotient written to {path}");
                    }
                    None => out.push_str(&text),
                }
                0
            }
        },
        Command::Ultraproduct {
            structures,
            principal,
            logic,
            out: out_path,
        } => {
            if principal == 0 {
                bail!("--principal is 1-based");
            }
            let set = logic.set()?;
            let ms: Result<Vec<Structure>> = structures
                .iter()
                .map(|p| Ok(Structure::parse(&read(p)?)?))
                .collect();
            let ms = ms?;
            let product =
                ultraproduct::ultraproduct(&ms, UltrafilterDesc::Principal(principal - 1), &set)?;
            let text = product.to_string();
            match out_path {
                Some(path) => {
                    fs::write(&path, &text).with_context(|| format!("cannot write `{path}`"))?;
                    let _ = writeln!(out, "ultraproduct written to {path}");
                }
                None => out.push_str(&text),
            }
            0
        }
        Command::LosCheck {
            structures,
            principal,
            depth,
            cap,
            logic,
        } => {
            if principal == 0 {
                bail!("--principal is 1-based");
            }
            let set = logic.set()?;
            let ms: Result<Vec<Structure>> = structures
                .iter()
                .map(|p| Ok(Structure::parse(&read(p)?)?))
                .collect();
            let ms = ms?;
            let report = ultraproduct::los_check(
                &ms,
                UltrafilterDesc::Principal(principal - 1),
                &set,
                depth,
                cap,
            )?;
            let _ = write!(out, "{report}");
            i32::from(!report.mismatches.is_empty())
        }
        Command::Validate {
            structure,
            algebra: algebra_path,
            logic,
        } => {
            let set = logic.set()?;
            let family = logic.family()?;
            let _ = writeln!(out, "Goedel set: {set}");
            let _ = writeln!(out, "constants: {family}");
            let mut code = 0;
            match family.check_within(&set) {
                Ok(()) => out.push_str("constants within the Goedel set: ok\n"),
                Err(e) => {
                    let _ = writeln!(out, "constants within the Goedel set: {e}");
                    code = 1;
                }
            }
            if let Some(path) = structure {
                let m = Structure::parse(&read(&path)?)?;
                match m.check_values(&set) {
                    Ok(()) => out.push_str("structure values within the Goedel set: ok\n"),
                    Err(e) => {
                        let _ = writeln!(out, "structure: {e}");
                        code = 1;
                    }
                }
            }
            if let Some(path) = algebra_path {
                let alg = GAlgebra::parse(&read(&path)?)?;
                let violations = algebra::validate_galgebra(&alg);
                if violations.is_empty() {
                    out.push_str("algebra laws: ok\n");
                } else {
                    for v in &violations {
                        let _ = writeln!(out, "algebra: {v}");
                    }
                    code = 1;
                }
            }
            code
        }
    };
    Ok((out, code))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
