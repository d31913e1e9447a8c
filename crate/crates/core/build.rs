use std::fs;
use std::path::Path;

#[path = "src/registry_check.rs"]
mod registry_check;

fn collect(dir: &Path, found: &mut Vec<String>) {
    let mut entries: Vec<_> = fs::read_dir(dir).expect("source directory is readable").flatten().collect();
    entries.sort_by_key(|e| e.path());
    for entry in entries {
        let path = entry.path();
        if path.is_dir() {
            if path.file_name().is_some_and(|n| n != "bin") {
                collect(&path, found);
            }
        } else if path.extension().is_some_and(|e| e == "rs")
            && path.file_name().is_some_and(|n| n != "registry_check.rs")
        {
            println!("cargo:rerun-if-changed={}", path.display());
            found.extend(registry_check::public_functions(&fs::read_to_string(&path).expect("source is readable")));
        }
    }
}

fn main() {
    println!("cargo:rerun-if-changed=registry.toml");
    println!("cargo:rerun-if-changed=src");
    let registry = fs::read_to_string("registry.toml").expect("registry.toml is readable");
    let mut found = Vec::new();
    collect(Path::new("src"), &mut found);
    let problems = registry_check::registry_mismatches(&registry_check::registry_names(&registry), &found);
    if !problems.is_empty() {
        panic!("operation registry is out of date:\n{}", problems.join("\n"));
    }
}
