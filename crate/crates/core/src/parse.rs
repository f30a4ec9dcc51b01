//! Line-oriented reaction network DSL.
//!
//! ```text
//! # comment
//! 0 <-> X @ 1, 2        # reversible: forward rate, backward rate
//! 2X1 + X2 -> X3 @ 0.5  # irreversible
//! ```
//!
//! Species are numbered in order of first appearance, complexes are
//! deduplicated, and `<->` expands to the forward reaction followed by the
//! backward one.

use std::collections::HashMap;

use crate::error::{Error, ParseError};
use crate::network::{Complex, Kinetics, Reaction, ReactionNetwork, Species};

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, at: usize, message: impl Into<String>) -> ParseError {
        ParseError { line: self.line, column: self.text[..at].chars().count() + 1, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.text[self.pos..].starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if f(c) {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        &self.text[start..self.pos]
    }
}

type Terms = Vec<(String, u32)>;

fn parse_complex(cur: &mut Cursor) -> Result<Terms, ParseError> {
    cur.skip_ws();
    let start = cur.pos;
    if cur.eat("∅") {
        return Ok(Vec::new());
    }
    let mut terms = Vec::new();
    loop {
        cur.skip_ws();
        let term_start = cur.pos;
        let digits = cur.take_while(|c| c.is_ascii_digit());
        let name = cur.take_while(|c| c.is_alphanumeric() || c == '_');
        if name.is_empty() {
            if digits == "0" && terms.is_empty() {
                return Ok(Vec::new());
            }
            return Err(cur.err(term_start, "expected a species name or `0`"));
        }
        if !name.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_') {
            return Err(cur.err(term_start, "species names must start with a letter"));
        }
        let coeff: u32 = if digits.is_empty() {
            1
        } else {
            digits.parse().map_err(|_| cur.err(term_start, "coefficient out of range"))?
        };
        if coeff == 0 {
            return Err(cur.err(term_start, "zero coefficient"));
        }
        terms.push((name.to_string(), coeff));
        cur.skip_ws();
        if !cur.eat("+") {
            break;
        }
    }
    if terms.is_empty() {
        return Err(cur.err(start, "empty complex"));
    }
    Ok(terms)
}

fn parse_rate(cur: &mut Cursor) -> Result<f64, ParseError> {
    cur.skip_ws();
    let start = cur.pos;
    let tok = cur.take_while(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '+' | '_'));
    if tok.is_empty() {
        return Err(cur.err(start, "expected a rate constant"));
    }
    let v: f64 = tok.parse().map_err(|_| cur.err(start, format!("invalid rate constant `{tok}`")))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(cur.err(start, "rate constants must be positive"));
    }
    Ok(v)
}

struct Statement {
    line: usize,
    lhs: Terms,
    rhs: Terms,
    rates: Vec<f64>,
}

fn parse_line(text: &str, line: usize) -> Result<Option<Statement>, ParseError> {
    let body = text.split('#').next().unwrap_or("");
    if body.trim().is_empty() {
        return Ok(None);
    }
    let mut cur = Cursor { text: body, pos: 0, line };
    let lhs = parse_complex(&mut cur)?;
    cur.skip_ws();
    let arrow_at = cur.pos;
    let reversible = if cur.eat("<->") {
        true
    } else if cur.eat("->") {
        false
    } else {
        return Err(cur.err(arrow_at, "expected `->` or `<->`"));
    };
    let rhs = parse_complex(&mut cur)?;
    cur.skip_ws();
    let at = cur.pos;
    if !cur.eat("@") {
        return Err(cur.err(at, "expected `@` before the rate constant"));
    }
    let mut rates = vec![parse_rate(&mut cur)?];
    cur.skip_ws();
    while cur.eat(",") {
        rates.push(parse_rate(&mut cur)?);
        cur.skip_ws();
    }
    if !cur.at_end() {
        return Err(cur.err(cur.pos, "unexpected trailing input"));
    }
    let expected = if reversible { 2 } else { 1 };
    if rates.len() != expected {
        return Err(cur.err(
            at,
            format!("{} reaction needs {expected} rate constant(s), got {}", if reversible { "reversible" } else { "irreversible" }, rates.len()),
        ));
    }
    Ok(Some(Statement { line, lhs, rhs, rates }))
}

/// Parses DSL text into a mass-action network.
pub fn parse_network(text: &str) -> Result<ReactionNetwork, Error> {
    let mut statements = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(s) = parse_line(line, i + 1)? {
            statements.push(s);
        }
    }
    if statements.is_empty() {
        return Err(ParseError { line: 1, column: 1, message: "no reactions".into() }.into());
    }

    let mut names: Vec<String> = Vec::new();
    let mut name_index: HashMap<String, usize> = HashMap::new();
    for s in &statements {
        for (n, _) in s.lhs.iter().chain(&s.rhs) {
            if !name_index.contains_key(n) {
                name_index.insert(n.clone(), names.len());
                names.push(n.clone());
            }
        }
    }
    let dim = names.len();
    let to_complex = |terms: &Terms| {
        let mut v = vec![0u32; dim];
        for (n, k) in terms {
            v[name_index[n]] += k;
        }
        Complex(v)
    };

    let mut complexes: Vec<Complex> = Vec::new();
    let mut lookup: HashMap<Complex, usize> = HashMap::new();
    let mut intern = |c: Complex| -> usize {
        *lookup.entry(c.clone()).or_insert_with(|| {
            complexes.push(c);
            complexes.len() - 1
        })
    };
    let mut reactions = Vec::new();
    let mut pairs: HashMap<(usize, usize), usize> = HashMap::new();
    for s in &statements {
        let a = intern(to_complex(&s.lhs));
        let b = intern(to_complex(&s.rhs));
        if a == b {
            return Err(ParseError { line: s.line, column: 1, message: "reactant equals product".into() }.into());
        }
        let mut edges = vec![(a, b, s.rates[0])];
        if s.rates.len() == 2 {
            edges.push((b, a, s.rates[1]));
        }
        for (from, to, rate) in edges {
            if let Some(prev) = pairs.insert((from, to), s.line) {
                return Err(ParseError {
                    line: s.line,
                    column: 1,
                    message: format!("duplicate reaction (first defined on line {prev})"),
                }
                .into());
            }
            reactions.push(Reaction { reactant: from, product: to, rate, kinetics: Kinetics::MassAction });
        }
    }
    let species = names.into_iter().enumerate().map(|(index, name)| Species { name, index, slack: false }).collect();
    ReactionNetwork::new(species, complexes, reactions)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_err(text: &str) -> ParseError {
        match parse_network(text) {
            Err(Error::Parse(e)) => e,
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn reversible_birth_death() {
        let net = parse_network("0 <-> X @ 1, 2").unwrap();
        assert_eq!(net.species_names(), vec!["X"]);
        assert_eq!(net.complexes(), &[Complex(vec![0]), Complex(vec![1])]);
        assert_eq!(net.reactions().len(), 2);
        assert_eq!((net.reactions()[0].reactant, net.reactions()[0].product, net.reactions()[0].rate), (0, 1, 1.0));
        assert_eq!((net.reactions()[1].reactant, net.reactions()[1].product, net.reactions()[1].rate), (1, 0, 2.0));
    }

    #[test]
    fn coefficients_and_first_appearance_order() {
        let net = parse_network("2X1 + X2 -> X3 @ 0.5\nX3 -> 0 @ 1e-2 # decay").unwrap();
        assert_eq!(net.species_names(), vec!["X1", "X2", "X3"]);
        assert_eq!(net.complexes()[0], Complex(vec![2, 1, 0]));
        assert_eq!(net.reactions()[1].rate, 0.01);
    }

    #[test]
    fn empty_input_is_rejected() {
        assert_eq!(parse_err("# only a comment\n\n").message, "no reactions");
    }

    #[test]
    fn self_loop_is_rejected() {
        assert_eq!(parse_err("X -> X @ 1").message, "reactant equals product");
    }

    #[test]
    fn non_positive_rates_are_rejected() {
        let e = parse_err("0 -> X @ 0");
        assert!(e.message.contains("positive"));
        assert_eq!(e.column, 10);
        assert!(parse_err("0 -> X @ -1").message.contains("positive"));
    }

    #[test]
    fn duplicate_reaction_is_rejected() {
        let e = parse_err("0 -> X @ 1\nX -> 0 @ 1\n0 -> X @ 3");
        assert_eq!(e.line, 3);
        assert!(e.message.contains("duplicate"));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse_err("0 -> X @ 1\nA => B @ 1");
        assert_eq!((e.line, e.column), (2, 3));
        let e = parse_err("A -> B 1");
        assert_eq!(e.column, 8);
        let e = parse_err("A <-> B @ 1");
        assert!(e.message.contains("2 rate"));
    }
}
