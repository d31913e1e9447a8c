// Shared by the build script and the docs module; std only.

/// Names of the top-level `pub fn` items in a source file.
pub fn public_functions(source: &str) -> Vec<String> {
    source
        .lines()
        .filter_map(|line| line.strip_prefix("pub fn "))
        .map(|rest| rest.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect())
        .collect()
}

/// `name = "..."` entries of the registry, in order.
pub fn registry_names(registry: &str) -> Vec<String> {
    registry
        .lines()
        .filter_map(|line| line.trim().strip_prefix("name = \""))
        .filter_map(|rest| rest.strip_suffix('"'))
        .map(str::to_string)
        .collect()
}

/// Every disagreement between the registry and the code, one line each.
pub fn registry_mismatches(registered: &[String], found: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for name in found {
        if !registered.contains(name) {
            out.push(format!("public operation `{name}` is missing from the registry"));
        }
    }
    for (i, name) in registered.iter().enumerate() {
        if !found.contains(name) {
            out.push(format!("registry entry `{name}` has no public operation"));
        }
        if registered[..i].contains(name) {
            out.push(format!("registry entry `{name}` appears more than once"));
        }
    }
    out
}
