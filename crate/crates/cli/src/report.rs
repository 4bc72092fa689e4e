use serde::Serialize;
use serde_json::{json, Map, Value};
use std::fmt::Write as _;

pub const SCHEMA: u32 = 1;

/// A value the run is compared against, with where it comes from.
#[derive(Debug, Clone, Serialize)]
pub struct Reference {
    pub quantity: String,
    pub expected: Value,
    pub observed: Value,
    pub source: String,
}

impl Reference {
    pub fn new(quantity: &str, expected: impl Serialize, observed: impl Serialize, source: &str) -> Self {
        Self {
            quantity: quantity.into(),
            expected: to_value(expected),
            observed: to_value(observed),
            source: source.into(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Csv {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.join(","));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub system: String,
    pub operation: String,
    pub parameters: Value,
    pub result: Value,
    pub residuals: Map<String, Value>,
    pub references: Vec<Reference>,
    pub iterations: Option<usize>,
    pub seed: Option<u64>,
    pub curve: Option<Csv>,
}

pub fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

impl Report {
    pub fn new(system: &str, operation: &str, parameters: Value, result: impl Serialize) -> Self {
        Self {
            system: system.into(),
            operation: operation.into(),
            parameters,
            result: to_value(result),
            residuals: Map::new(),
            references: Vec::new(),
            iterations: None,
            seed: None,
            curve: None,
        }
    }

    pub fn residual(mut self, name: &str, value: f64) -> Self {
        self.residuals.insert(name.into(), to_value(value));
        self
    }

    pub fn reference(mut self, r: Reference) -> Self {
        self.references.push(r);
        self
    }

    pub fn iterations(mut self, n: usize) -> Self {
        self.iterations = Some(n);
        self
    }

    pub fn seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn curve(mut self, csv: Csv) -> Self {
        self.curve = Some(csv);
        self
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "system": self.system,
            "operation": self.operation,
            "parameters": self.parameters,
            "result": self.result,
            "residuals": self.residuals,
            "references": self.references,
            "iterations": self.iterations,
            "seed": self.seed,
        })
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report renders");
        s.push('\n');
        s
    }
}

/// Shortest round-trip decimal form, so CSV output is deterministic.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
