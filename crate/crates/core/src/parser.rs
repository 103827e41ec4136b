//! Formula and theory-file parsing.
//!
//! Grammar (loosest to tightest): `<->`, `=>`, `->` (right-associative),
//! `|`, `&`, `~`, then atoms, `bot`, `#p/q` truth constants, `delta(...)`,
//! `forall x. ...`, `exists x. ...` and parentheses. Quantifier bodies
//! extend maximally to the right. All derived connectives expand to the
//! primitive stock during parsing.

use crate::syntax::{ConstExpr, Formula, FormulaTemplate, Signature, SyntaxError, Term, Theory};
use crate::values::{ClosedForm, Value};
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Const(ConstExpr),
    LParen,
    RParen,
    Dot,
    Comma,
    Amp,
    Pipe,
    Arrow,
    FatArrow,
    Iff,
    Tilde,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

fn err(pos: usize, msg: impl Into<String>) -> SyntaxError {
    SyntaxError::Parse {
        pos,
        msg: msg.into(),
    }
}

fn lex(text: &str, allow_forms: bool) -> Result<Lexer, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                i += 1;
            }
            '(' => {
                toks.push((Tok::LParen, start));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, start));
                i += 1;
            }
            '.' => {
                toks.push((Tok::Dot, start));
                i += 1;
            }
            ',' => {
                toks.push((Tok::Comma, start));
                i += 1;
            }
            '&' => {
                toks.push((Tok::Amp, start));
                i += 1;
            }
            '|' => {
                toks.push((Tok::Pipe, start));
                i += 1;
            }
            '~' => {
                toks.push((Tok::Tilde, start));
                i += 1;
            }
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    toks.push((Tok::Arrow, start));
                    i += 2;
                } else {
                    return Err(err(start, "expected `->`"));
                }
            }
            '=' => {
                if chars.get(i + 1) == Some(&'>') {
                    toks.push((Tok::FatArrow, start));
                    i += 2;
                } else {
                    return Err(err(start, "expected `=>`"));
                }
            }
            '<' => {
                if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') {
                    toks.push((Tok::Iff, start));
                    i += 3;
                } else {
                    return Err(err(start, "expected `<->`"));
                }
            }
            '#' => {
                i += 1;
                match chars.get(i) {
                    Some(d) if d.is_ascii_digit() => {
                        let numstart = i;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                        if chars.get(i) == Some(&'/')
                            && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())
                        {
                            i += 1;
                            while i < chars.len() && chars[i].is_ascii_digit() {
                                i += 1;
                            }
                        }
                        let lit: String = chars[numstart..i].iter().collect();
                        let v = Value::from_str(&lit)
                            .map_err(|e| err(start, format!("bad truth constant: {e}")))?;
                        toks.push((Tok::Const(ConstExpr::Fixed(v)), start));
                    }
                    Some('(') => {
                        if !allow_forms {
                            return Err(err(
                                start,
                                "closed-form constants `#(...)` are only allowed in family lines",
                            ));
                        }
                        let mut depth = 0usize;
                        let open = i;
                        loop {
                            match chars.get(i) {
                                Some('(') => depth += 1,
                                Some(')') => {
                                    depth -= 1;
                                    if depth == 0 {
                                        break;
                                    }
                                }
                                Some(_) => {}
                                None => return Err(err(start, "unterminated `#(`")),
                            }
                            i += 1;
                        }
                        let inner: String = chars[open + 1..i].iter().collect();
                        i += 1; // closing paren
                        let form = ClosedForm::parse(&inner)
                            .map_err(|e| err(start, format!("bad closed form: {e}")))?;
                        toks.push((Tok::Const(ConstExpr::Form(form)), start));
                    }
                    _ => return Err(err(start, "expected digits or `(` after `#`")),
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    i += 1;
                }
                toks.push((Tok::Ident(chars[start..i].iter().collect()), start));
            }
            other => return Err(err(start, format!("unexpected character `{other}`"))),
        }
    }
    Ok(Lexer {
        toks,
        pos: 0,
        end: chars.len(),
    })
}

impl Lexer {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<(), SyntaxError> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(err(self.here(), format!("expected {what}")))
        }
    }
}

struct Parser<'a> {
    lex: Lexer,
    sig: &'a Signature,
    bound: Vec<String>,
}

impl<'a> Parser<'a> {
    fn formula(&mut self) -> Result<FormulaTemplate, SyntaxError> {
        self.iff()
    }

    fn iff(&mut self) -> Result<FormulaTemplate, SyntaxError> {
        let lhs = self.fatarrow()?;
        if self.eat(&Tok::Iff) {
            let rhs = self.iff()?;
            Ok(Formula::iff(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn fatarrow(&mut self) -> Result<FormulaTemplate, SyntaxError> {
        let lhs = self.arrow()?;
        if self.eat(&Tok::FatArrow) {
            let rhs = self.fatarrow()?;
            Ok(Formula::strongimp(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn arrow(&mut self) -> Result<FormulaTemplate, SyntaxError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.arrow()?;
            Ok(Formula::to(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<FormulaTemplate, SyntaxError> {
        let lhs = self.and()?;
        if self.eat(&Tok::Pipe) {
            let rhs = self.or()?;
            Ok(Formula::or(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn and(&mut self) -> Result<FormulaTemplate, SyntaxError> {
        let lhs = self.unary()?;
        if self.eat(&Tok::Amp) {
            let rhs = self.and()?;
            Ok(Formula::and(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn unary(&mut self) -> Result<FormulaTemplate, SyntaxError> {
        if self.eat(&Tok::Tilde) {
            let inner = self.unary()?;
            return Ok(Formula::neg(inner));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<FormulaTemplate, SyntaxError> {
        let pos = self.lex.here();
        match self.lex.next() {
            Some(Tok::LParen) => {
                let inner = self.formula()?;
                self.lex.expect(&Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Const(c)) => {
                if let ConstExpr::Fixed(v) = &c {
                    if !self.sig.allows_truth_constant(v) {
                        return Err(SyntaxError::ConstantNotAllowed(v.clone()));
                    }
                }
                Ok(Formula::TruthConst(c))
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "bot" => Ok(Formula::Bot),
                "delta" => {
                    if !self.sig.delta_enabled {
                        return Err(SyntaxError::DeltaDisabled);
                    }
                    self.lex.expect(&Tok::LParen, "`(` after delta")?;
                    let inner = self.formula()?;
                    self.lex.expect(&Tok::RParen, "`)`")?;
                    Ok(Formula::delta(inner))
                }
                "forall" | "exists" => {
                    let var = match self.lex.next() {
                        Some(Tok::Ident(v)) => v,
                        _ => return Err(err(self.lex.here(), "expected a variable name")),
                    };
                    if self.bound.contains(&var) {
                        return Err(SyntaxError::Shadowing(var));
                    }
                    self.lex.expect(&Tok::Dot, "`.` after the bound variable")?;
                    self.bound.push(var.clone());
                    let body = self.formula()?;
                    self.bound.pop();
                    if name == "forall" {
                        Ok(Formula::forall(var, body))
                    } else {
                        Ok(Formula::exists(var, body))
                    }
                }
                _ => {
                    // predicate atom
                    let arity = *self
                        .sig
                        .preds
                        .get(&name)
                        .ok_or(SyntaxError::UnknownSymbol(name.clone()))?;
                    let args = if self.lex.peek() == Some(&Tok::LParen) {
                        self.lex.next();
                        let mut args = vec![self.term()?];
                        while self.lex.eat(&Tok::Comma) {
                            args.push(self.term()?);
                        }
                        self.lex.expect(&Tok::RParen, "`)`")?;
                        args
                    } else {
                        Vec::new()
                    };
                    if args.len() != arity {
                        return Err(SyntaxError::Arity {
                            name,
                            expected: arity,
                            got: args.len(),
                        });
                    }
                    Ok(Formula::Atom(name, args))
                }
            },
            _ => Err(err(pos, "expected a formula")),
        }
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        let pos = self.lex.here();
        match self.lex.next() {
            Some(Tok::Ident(name)) => {
                if self.lex.peek() == Some(&Tok::LParen) {
                    let arity = *self
                        .sig
                        .funcs
                        .get(&name)
                        .ok_or(SyntaxError::UnknownSymbol(name.clone()))?;
                    self.lex.next();
                    let mut args = vec![self.term()?];
                    while self.lex.eat(&Tok::Comma) {
                        args.push(self.term()?);
                    }
                    self.lex.expect(&Tok::RParen, "`)`")?;
                    if args.len() != arity {
                        return Err(SyntaxError::Arity {
                            name,
                            expected: arity,
                            got: args.len(),
                        });
                    }
                    Ok(Term::App(name, args))
                } else if self.sig.consts.contains(&name) {
                    Ok(Term::Const(name))
                } else if self.sig.preds.contains_key(&name) {
                    Err(err(pos, format!("predicate `{name}` used as a term")))
                } else if self.sig.funcs.contains_key(&name) {
                    Err(err(pos, format!("function `{name}` needs arguments")))
                } else {
                    Ok(Term::Var(name))
                }
            }
            _ => Err(err(pos, "expected a term")),
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        self.lex.eat(t)
    }
}

fn parse_template(text: &str, sig: &Signature, allow_forms: bool) -> Result<FormulaTemplate, SyntaxError> {
    let lex = lex(text, allow_forms)?;
    let mut p = Parser {
        lex,
        sig,
        bound: Vec::new(),
    };
    let f = p.formula()?;
    if p.lex.peek().is_some() {
        return Err(err(p.lex.here(), "trailing input after formula"));
    }
    Ok(f)
}

fn template_to_formula(t: FormulaTemplate) -> Formula<Value> {
    match t {
        Formula::Bot => Formula::Bot,
        Formula::TruthConst(ConstExpr::Fixed(v)) => Formula::TruthConst(v),
        Formula::TruthConst(ConstExpr::Form(_)) => {
            unreachable!("forms are rejected outside family lines")
        }
        Formula::Atom(p, args) => Formula::Atom(p, args),
        Formula::And(a, b) => Formula::and(template_to_formula(*a), template_to_formula(*b)),
        Formula::To(a, b) => Formula::to(template_to_formula(*a), template_to_formula(*b)),
        Formula::Delta(a) => Formula::delta(template_to_formula(*a)),
        Formula::Forall(x, a) => Formula::forall(x, template_to_formula(*a)),
        Formula::Exists(x, a) => Formula::exists(x, template_to_formula(*a)),
    }
}

/// Parses a formula against the signature; sugar is expanded, arities and
/// truth constants checked, binder shadowing rejected. Free variables are
/// allowed.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula<Value>, SyntaxError> {
    parse_template(text, sig, false).map(template_to_formula)
}

/// Like [`parse_formula`], but requires a sentence.
pub fn parse_sentence(text: &str, sig: &Signature) -> Result<Formula<Value>, SyntaxError> {
    let f = parse_formula(text, sig)?;
    let fv = f.free_vars();
    if !fv.is_empty() {
        return Err(SyntaxError::FreeVariables(fv.into_iter().collect()));
    }
    Ok(f)
}

/// Strips a `#`-comment from a line. `#` starts a comment unless it is
/// immediately followed by a digit or `(` (those are truth constants).
fn strip_comment(line: &str) -> &str {
    let chars: Vec<char> = line.chars().collect();
    let mut byte = 0usize;
    for (i, c) in chars.iter().enumerate() {
        if *c == '#' {
            let next = chars.get(i + 1);
            if !matches!(next, Some(d) if d.is_ascii_digit() || *d == '(') {
                return &line[..byte];
            }
        }
        byte += c.len_utf8();
    }
    line
}

/// Parses a theory file: UTF-8, one sentence per line, `#`-comments, and
/// `family n: <sentence with #(closed forms in n)>` lines for parametric
/// families.
pub fn parse_theory(text: &str, sig: &Signature) -> Result<Theory, SyntaxError> {
    let mut theory = Theory {
        sentences: Vec::new(),
        families: Vec::new(),
    };
    for raw in text.lines() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("family") {
            let rest = rest.trim_start();
            let rest = rest.strip_prefix('n').ok_or_else(|| {
                err(0, "family lines have the shape `family n: <sentence>`")
            })?;
            let body = rest.trim_start().strip_prefix(':').ok_or_else(|| {
                err(0, "family lines have the shape `family n: <sentence>`")
            })?;
            let tpl = parse_template(body, sig, true)?;
            let fv = tpl.free_vars();
            if !fv.is_empty() {
                return Err(SyntaxError::FreeVariables(fv.into_iter().collect()));
            }
            theory.families.push(tpl);
        } else {
            theory.sentences.push(parse_sentence(line, sig)?);
        }
    }
    Ok(theory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::values::ConstantFamily;
    use proptest::prelude::*;

    fn sig() -> Signature {
        Signature::propositional(
            &["p", "q", "rho"],
            ConstantFamily::finite(vec![Value::frac(1, 4), Value::frac(1, 2)]).unwrap(),
            true,
        )
    }

    fn fo_sig() -> Signature {
        Signature::propositional(&["rho"], ConstantFamily::empty(), false)
            .with_pred("R", 1)
            .unwrap()
            .with_pred("S", 2)
            .unwrap()
            .with_func("f", 1)
            .unwrap()
            .with_const("c")
            .unwrap()
    }

    #[test]
    fn parses_spec_shapes() {
        let s = sig();
        let f = parse_formula("~~rho -> #1/2", &s).unwrap();
        assert_eq!(
            f,
            Formula::to(
                Formula::neg(Formula::neg(Formula::atom0("rho"))),
                Formula::TruthConst(Value::frac(1, 2))
            )
        );
        let g = parse_formula("p => q", &s).unwrap();
        assert_eq!(g, Formula::to(Formula::to(Formula::atom0("q"), Formula::atom0("p")), Formula::atom0("q")));
        let h = parse_formula("forall x. R(x)", &fo_sig()).unwrap();
        assert_eq!(
            h,
            Formula::forall("x", Formula::Atom("R".into(), vec![Term::Var("x".into())]))
        );
    }

    #[test]
    fn precedence() {
        let s = sig();
        // ~ > & > | > -> with -> right-associative
        assert_eq!(
            parse_formula("~p & q", &s).unwrap(),
            Formula::and(Formula::neg(Formula::atom0("p")), Formula::atom0("q"))
        );
        assert_eq!(
            parse_formula("p -> q -> rho", &s).unwrap(),
            Formula::to(
                Formula::atom0("p"),
                Formula::to(Formula::atom0("q"), Formula::atom0("rho"))
            )
        );
        assert_eq!(
            parse_formula("p | q -> rho", &s).unwrap(),
            Formula::to(
                Formula::or(Formula::atom0("p"), Formula::atom0("q")),
                Formula::atom0("rho")
            )
        );
        // quantifier body is maximal
        let s2 = fo_sig();
        assert_eq!(
            parse_formula("forall x. R(x) -> rho", &s2).unwrap(),
            Formula::forall(
                "x",
                Formula::to(
                    Formula::Atom("R".into(), vec![Term::Var("x".into())]),
                    Formula::atom0("rho")
                )
            )
        );
    }

    #[test]
    fn parse_errors() {
        let s = sig();
        assert!(matches!(
            parse_formula("unknown", &s),
            Err(SyntaxError::UnknownSymbol(_))
        ));
        assert!(matches!(
            parse_formula("#1/3", &s),
            Err(SyntaxError::ConstantNotAllowed(_))
        ));
        assert!(matches!(
            parse_formula("p -> ", &s),
            Err(SyntaxError::Parse { .. })
        ));
        let s2 = fo_sig();
        assert!(matches!(
            parse_formula("R(x,x)", &s2),
            Err(SyntaxError::Arity { .. })
        ));
        assert!(matches!(
            parse_formula("forall x. forall x. R(x)", &s2),
            Err(SyntaxError::Shadowing(_))
        ));
        assert!(matches!(
            parse_sentence("R(x)", &s2),
            Err(SyntaxError::FreeVariables(_))
        ));
        // delta disabled in fo_sig
        assert!(matches!(
            parse_formula("delta(rho)", &s2),
            Err(SyntaxError::DeltaDisabled)
        ));
    }

    #[test]
    fn terms_resolve() {
        let s = fo_sig();
        let f = parse_formula("R(f(c))", &s).unwrap();
        assert_eq!(
            f,
            Formula::Atom(
                "R".into(),
                vec![Term::App("f".into(), vec![Term::Const("c".into())])]
            )
        );
        assert!(parse_formula("R(f)", &s).is_err()); // function needs args
        assert!(parse_formula("S(rho, c)", &s).is_err()); // predicate as term
    }

    #[test]
    fn theory_files() {
        let s = Signature::propositional(&["rho"], ConstantFamily::DownwardA, true);
        let text = "\
# a comment line
family n: #(1/(n)) -> rho
~delta(rho)   # trailing comment
";
        let th = parse_theory(text, &s).unwrap();
        assert_eq!(th.sentences.len(), 1);
        assert_eq!(th.families.len(), 1);
        let insts = th.instantiate(3, &s).unwrap();
        assert_eq!(insts.len(), 4);
        assert_eq!(
            insts[1],
            Formula::to(Formula::TruthConst(Value::one()), Formula::atom0("rho"))
        );
        // constants starting a line are not comments
        let s2 = sig();
        let th2 = parse_theory("#1/2 -> rho\n", &s2).unwrap();
        assert_eq!(th2.sentences.len(), 1);
    }

    #[test]
    fn closed_forms_only_in_families() {
        let s = sig();
        assert!(parse_formula("#(1/(n)) -> p", &s).is_err());
    }

    #[test]
    fn first_order_print_round_trips() {
        let s = fo_sig();
        for text in [
            "(forall x. R(x)) -> R(c)",
            "forall x. R(x) -> rho",
            "exists x. forall y. S(x,y)",
            "(exists x. R(x)) & (forall x. R(f(x)))",
            "forall x. (rho | R(x))",
            "delta(exists x. R(x)) -> bot",
        ] {
            let s2 = Signature::propositional(&["rho"], ConstantFamily::empty(), true)
                .with_pred("R", 1)
                .unwrap()
                .with_pred("S", 2)
                .unwrap()
                .with_func("f", 1)
                .unwrap()
                .with_const("c")
                .unwrap();
            let _ = &s;
            let f = parse_formula(text, &s2).unwrap();
            let printed = f.to_string();
            let reparsed = parse_formula(&printed, &s2).unwrap();
            assert_eq!(reparsed, f, "{text} printed as {printed}");
        }
    }

    // AST generator for the round-trip property.
    fn arb_formula(s: &'static Signature) -> impl Strategy<Value = Formula<Value>> {
        let leaf = prop_oneof![
            Just(Formula::Bot),
            Just(Formula::atom0("p")),
            Just(Formula::atom0("q")),
            Just(Formula::atom0("rho")),
            Just(Formula::TruthConst(Value::frac(1, 4))),
            Just(Formula::TruthConst(Value::frac(1, 2))),
            Just(Formula::TruthConst(Value::zero())),
            Just(Formula::TruthConst(Value::one())),
        ];
        let _ = s;
        leaf.prop_recursive(4, 64, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::to(a, b)),
                inner.clone().prop_map(Formula::neg),
                inner.clone().prop_map(Formula::delta),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::strongimp(a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(f in arb_formula(Box::leak(Box::new(sig())))) {
            let s = sig();
            let printed = f.to_string();
            let reparsed = parse_formula(&printed, &s).unwrap();
            prop_assert_eq!(reparsed, f);
        }
    }
}
