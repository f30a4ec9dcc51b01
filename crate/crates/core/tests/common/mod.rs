#![allow(dead_code)]

use std::path::PathBuf;

use slackcrn::{parse_network, ReactionNetwork};

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn model(name: &str) -> ReactionNetwork {
    let path = repo_root().join("models").join(format!("{name}.crn"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_network(&text).unwrap()
}

pub fn config(name: &str) -> serde_json::Value {
    let path = repo_root().join("configs").join(format!("{name}.json"));
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

/// A bundled network with a conservation vector and a small "desk" setup.
pub struct Desk {
    pub name: &'static str,
    pub w: Vec<i64>,
    pub u: Option<i64>,
    pub n: i64,
    pub x0: Vec<u32>,
    pub target: &'static str,
    pub t: f64,
}

pub fn bundled() -> Vec<Desk> {
    vec![
        Desk { name: "birth_death", w: vec![1], u: None, n: 10, x0: vec![0], target: "X >= 3", t: 1.0 },
        Desk { name: "poisson", w: vec![1], u: None, n: 10, x0: vec![0], target: "X >= 5", t: 1.0 },
        Desk { name: "example1", w: vec![2, 1], u: Some(2), n: 12, x0: vec![0, 0], target: "A >= 2 && B >= 2", t: 1.0 },
        Desk { name: "lotka_volterra", w: vec![1, 1], u: None, n: 20, x0: vec![3, 3], target: "A == 0 || B == 0", t: 1.0 },
        Desk {
            name: "toggle_switch",
            w: vec![1, 1, 0, 0, 0, 0],
            u: None,
            n: 20,
            x0: vec![0, 0, 1, 1, 0, 0],
            target: "X >= 5",
            t: 0.005,
        },
        Desk { name: "dimerization", w: vec![1, 2], u: None, n: 16, x0: vec![0, 0], target: "X1 == 1 && X2 >= 1 && X2 <= 2", t: 5.0 },
    ]
}
