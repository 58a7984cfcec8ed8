use patchfront::eigen::params_for_lambda1;
use patchfront::verify::{
    check_subsolution, check_supersolution, corollary_bounds, oscillation_experiment,
    solve_interface, CorollaryCase, RunConfig, SampleGrid, SubSolutionSpec, SuperSolutionSpec,
    ViolationKind,
};
use patchfront::{GrowthParams, Trajectory};

fn params() -> GrowthParams {
    params_for_lambda1(1.0, 9.0, 1.0, -4.0).unwrap()
}

fn quick(horizon: f64) -> RunConfig {
    RunConfig {
        dx: 0.1,
        dt: 0.02,
        horizon,
        ..RunConfig::default()
    }
}

#[test]
fn constructions_certified_on_dense_grids() {
    let p = params();
    let grid = SampleGrid::new(100.0, 101, 100).unwrap();
    for spec in [
        SuperSolutionSpec::step1(&p, 1.0).unwrap(),
        SuperSolutionSpec::step2_at_critical_speed(&p, 5.0).unwrap(),
    ] {
        let r = check_supersolution(&spec, &grid).unwrap();
        assert!(r.samples >= 10_000);
        assert!(r.passed(), "{:?}: {:?}", spec.case(), r.examples);
    }
    let sub = SubSolutionSpec::default_recipe(&p, 5.0).unwrap();
    let r = check_subsolution(&sub, &grid).unwrap();
    assert!(r.samples >= 10_000);
    assert!(r.passed(), "{:?}", r.examples);
}

#[test]
fn too_slow_super_solution_fails_the_angle_condition() {
    let spec = SuperSolutionSpec::step2(&params(), 5.0, 2.05).unwrap();
    let r = check_supersolution(&spec, &SampleGrid::new(20.0, 5, 10).unwrap()).unwrap();
    assert!(r.examples.iter().any(|v| v.kind == ViolationKind::AngleGap));
}

#[test]
fn interface_lemma_on_zero_to_hundred() {
    let spec = SubSolutionSpec::default_recipe(&params(), 5.0).unwrap();
    let times: Vec<f64> = (0..=200).map(|k| k as f64 * 0.5).collect();
    let trace = solve_interface(&spec, &times).unwrap();
    assert!(trace.all_hold(), "drift error {}", trace.drift_error());
    let (lo, hi) = trace.offset_range();
    assert!(lo > trace.initial_bracket.0 && hi < 0.0);
}

#[test]
fn corollary_examples() {
    let p = GrowthParams::new(1.0, 9.0, 4.0, 1.0).unwrap();
    let cfg = quick(100.0);
    // A(t) = min(2t, 0.5t + 10)
    let slow =
        Trajectory::piecewise_linear(vec![(0.0, 0.0), (20.0 / 3.0, 40.0 / 3.0)], 0.5).unwrap();
    let v = corollary_bounds(&p, &slow, &cfg).unwrap();
    assert_eq!(v.case, CorollaryCase::SlowPatch);
    assert!(v.passed, "{v:?}");
    let fast = Trajectory::linear(2.0 + 2.0 * 8f64.sqrt()).unwrap();
    let v = corollary_bounds(&p, &fast, &cfg).unwrap();
    assert_eq!(v.case, CorollaryCase::FastPatch);
    assert!(v.passed, "{v:?}");
    let neither = Trajectory::linear(5.0).unwrap();
    assert_eq!(
        corollary_bounds(&p, &neither, &cfg).unwrap().case,
        CorollaryCase::NotApplicable
    );
}

#[test]
fn equal_speeds_give_one_target() {
    let r =
        oscillation_experiment(&params(), 5.0, 5.0, &[40.0, 80.0, 120.0], &quick(120.0)).unwrap();
    assert_eq!(r.targets.0, r.targets.1);
    for f in &r.intervals[1..] {
        assert!((f.fitted_speed - f.target).abs() / f.target < 0.10, "{f:?}");
    }
}
