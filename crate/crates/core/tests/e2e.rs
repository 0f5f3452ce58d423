//! End-to-end verification runs through the external solver.

mod support;

use support::{pipeline, solver_config};
use wste::bench;
use wste::oracle::replay_fail;
use wste::ste::{check, run_bmc, run_ste, VerifResult};
use wste::symsim::SimConfig;

#[test]
fn design1_p1_passes_at_width_8() {
    let (mut pool, el, atoms, spec) = pipeline(&bench::design1(8), &bench::design1_spec(8, 1));
    let (ob, _) = run_ste(&mut pool, &el, &atoms, &spec, None, SimConfig::default()).unwrap();
    let report = check(&mut pool, &ob, &solver_config());
    assert!(
        matches!(report.verdict, VerifResult::Pass { vacuous: false }),
        "want pass, got {:?} ({:?})",
        report.verdict.verdict_str(),
        report.warnings,
    );
}

#[test]
fn design1_mutant1_fails_and_replays() {
    let (mut pool, el, atoms, spec) =
        pipeline(&bench::design1_mutant(8, 1), &bench::design1_spec(8, 1));
    let (ob, _) = run_ste(&mut pool, &el, &atoms, &spec, None, SimConfig::default()).unwrap();
    let report = check(&mut pool, &ob, &solver_config());
    let VerifResult::Fail { assignment, violated } = &report.verdict else {
        panic!("want fail, got {}", report.verdict.verdict_str());
    };
    assert!(!violated.is_empty());
    let replay = replay_fail(&pool, &el, &atoms, &spec, &ob, assignment, violated);
    assert!(replay.all_confirmed(), "unconfirmed: {:?}", replay.unconfirmed);
}

#[test]
fn design2_p1_agrees_between_modes() {
    let (mut pool, el, atoms, spec) = pipeline(&bench::design2(8), &bench::design2_spec(8, 1));
    let cfg = SimConfig::default();
    let (ob1, _) = run_ste(&mut pool, &el, &atoms, &spec, None, cfg).unwrap();
    let (ob2, _) = run_bmc(&mut pool, &el, &atoms, &spec, None, cfg).unwrap();
    let r1 = check(&mut pool, &ob1, &solver_config());
    let r2 = check(&mut pool, &ob2, &solver_config());
    assert!(matches!(r1.verdict, VerifResult::Pass { .. }), "{:?}", r1.verdict.verdict_str());
    assert!(matches!(r2.verdict, VerifResult::Pass { .. }), "{:?}", r2.verdict.verdict_str());
}
