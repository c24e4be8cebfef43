//! Shared setup for the benchmarks in `benches/`.

use std::path::{Path, PathBuf};

use unitcheck_core::analysis::{analyze, Options};
use unitcheck_core::generator::{generate, module_name, GeneratorParams, TOP_FILE};

/// Writes a generated corpus into `dir` and returns the file paths.
pub fn write_corpus(dir: &Path, p: &GeneratorParams) -> Vec<PathBuf> {
    generate(p)
        .expect("valid parameters")
        .into_iter()
        .map(|f| {
            let path = dir.join(&f.name);
            std::fs::write(&path, f.text).expect("corpus is writable");
            path
        })
        .collect()
}

/// Whole-program inference over every file at once.
pub fn infer_together(paths: &[PathBuf]) {
    let a = analyze(paths, &Options { include: vec![], literal_check: true }).expect("analysis runs");
    assert!(a.is_consistent());
}

/// Summarizes each module on its own, then infers the top-level file.
pub fn infer_separately(dir: &Path, n: usize) {
    for k in 1..=n {
        let name = module_name(k);
        let a = analyze(&[dir.join(format!("{name}.f90"))], &Options::default()).expect("analysis runs");
        a.summary(&name).expect("module summary").write(dir).expect("summary is writable");
    }
    let a = analyze(&[dir.join(TOP_FILE)], &Options::default()).expect("analysis runs");
    assert!(a.is_consistent());
}
