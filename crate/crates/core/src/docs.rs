//! Index of the public operations and the results they implement.
//!
//! The registry `registry.toml` lists every public free function together
//! with the mathematical statement it relies on; the build script refuses
//! to compile when the registry and the code disagree.
#![doc = include_str!("../../../docs/svep_example.md")]

use serde::Deserialize;

const REGISTRY: &str = include_str!("../registry.toml");

#[derive(Debug, Deserialize)]
struct Registry {
    op: Vec<Entry>,
}

#[derive(Debug, Deserialize)]
struct Entry {
    name: String,
    module: String,
    result: String,
    summary: String,
}

/// Markdown table with one row per public operation.
pub fn generate_theorem_index() -> String {
    let registry: Registry = toml::from_str(REGISTRY).expect("registry is checked at build time");
    let mut out = String::from("# Operation index\n\n");
    out.push_str("Generated from `crates/core/registry.toml`; every public operation appears once.\n\n");
    out.push_str("| Operation | Module | Result used | Computes |\n|---|---|---|---|\n");
    for e in &registry.op {
        out.push_str(&format!("| `{}` | {} | {} | {} |\n", e.name, e.module, e.result, e.summary));
    }
    out
}
