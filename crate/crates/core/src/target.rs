//! Target sets written as boolean expressions over species counts, e.g.
//! `A == 0 || B == 0` or `X > 30 && Z > 30`.
//!
//! The grammar is a disjunction (`||`) of conjunctions (`&&`) of comparisons
//! `species op integer` with `op` one of `== != < <= > >=`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    fn symbol(self) -> &'static str {
        match self {
            Cmp::Eq => "==",
            Cmp::Ne => "!=",
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
        }
    }

    fn holds(self, a: i64, b: i64) -> bool {
        match self {
            Cmp::Eq => a == b,
            Cmp::Ne => a != b,
            Cmp::Lt => a < b,
            Cmp::Le => a <= b,
            Cmp::Gt => a > b,
            Cmp::Ge => a >= b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub species: usize,
    pub name: String,
    pub cmp: Cmp,
    pub value: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Target {
    pub clauses: Vec<Vec<Atom>>,
}

impl Target {
    pub fn parse(text: &str, species: &[String]) -> Result<Self> {
        let bad = |m: String| Error::InvalidArgument(format!("target `{text}`: {m}"));
        let mut clauses = Vec::new();
        for clause in text.split("||") {
            let mut atoms = Vec::new();
            for atom in clause.split("&&") {
                let atom = atom.trim();
                // two-character operators first so `<=` is not read as `<`
                let (pos, cmp, len) = ["==", "!=", "<=", ">=", "<", ">"]
                    .iter()
                    .find_map(|op| atom.find(op).map(|p| (p, *op, op.len())))
                    .ok_or_else(|| bad(format!("no comparison in `{atom}`")))?;
                let cmp = match cmp {
                    "==" => Cmp::Eq,
                    "!=" => Cmp::Ne,
                    "<=" => Cmp::Le,
                    ">=" => Cmp::Ge,
                    "<" => Cmp::Lt,
                    _ => Cmp::Gt,
                };
                let name = atom[..pos].trim();
                let value: i64 =
                    atom[pos + len..].trim().parse().map_err(|_| bad(format!("expected an integer in `{atom}`")))?;
                let idx = species.iter().position(|s| s == name).ok_or_else(|| bad(format!("unknown species `{name}`")))?;
                atoms.push(Atom { species: idx, name: name.to_string(), cmp, value });
            }
            clauses.push(atoms);
        }
        Ok(Target { clauses })
    }

    pub fn matches(&self, x: &[u32]) -> bool {
        self.clauses.iter().any(|c| c.iter().all(|a| a.cmp.holds(i64::from(x[a.species]), a.value)))
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let clauses: Vec<String> = self
            .clauses
            .iter()
            .map(|c| c.iter().map(|a| format!("{} {} {}", a.name, a.cmp.symbol(), a.value)).collect::<Vec<_>>().join(" && "))
            .collect();
        write!(f, "{}", clauses.join(" || "))
    }
}
