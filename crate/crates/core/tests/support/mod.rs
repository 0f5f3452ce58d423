//! Shared helpers for integration tests: locate (or build) the bundled
//! solver and run the full pipeline.

use std::path::PathBuf;
use std::time::Duration;
use wste::atomize::{atomize_design, AtomMap};
use wste::expr::ExprPool;
use wste::ir::{elaborate, parse, Elaborated};
use wste::solver::SolverConfig;
use wste::ste::{parse_spec, Spec};

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).parent().unwrap().parent().unwrap().to_path_buf()
}

/// Solver command for tests: `WSTE_SOLVER` if set, else the bundled solver
/// (built on demand).
pub fn solver_command() -> String {
    if let Ok(s) = std::env::var("WSTE_SOLVER") {
        if !s.trim().is_empty() {
            return s;
        }
    }
    let root = workspace_root();
    let target = std::env::var("CARGO_TARGET_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|_| root.join("target"));
    // freshen the bundled solver; cargo no-ops (under its own lock) when the
    // binary is current
    let status = std::process::Command::new(env!("CARGO"))
        .args(["build", "-p", "bvsmt", "--release", "--quiet"])
        .current_dir(&root)
        .status()
        .expect("spawn cargo");
    assert!(status.success(), "building the bundled solver failed");
    format!("{} {{}}", target.join("release").join("bvsmt").display())
}

pub fn solver_config() -> SolverConfig {
    SolverConfig::new(solver_command(), Duration::from_secs(120))
}

/// Parse + elaborate + spec-parse + atomize in one step.
pub fn pipeline(design_src: &str, spec_src: &str) -> (ExprPool, Elaborated, AtomMap, Spec) {
    let el = elaborate(&parse(design_src).expect("parse")).expect("elaborate");
    let mut pool = ExprPool::new();
    let spec = parse_spec(spec_src, &el, &mut pool).expect("spec");
    let atoms = atomize_design(&el, &spec.accesses()).expect("atomize");
    (pool, el, atoms, spec)
}
