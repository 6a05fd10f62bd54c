use tscale::verify::{
    run_verification, FunctionSpec, InstanceSpec, KernelSpec, ScaleSpec, Theorem, VariantSelection,
    WitnessMode,
};

fn spec(theorem: Theorem, scale: ScaleSpec, count: usize, seed: u64, mode: WitnessMode) -> InstanceSpec {
    InstanceSpec {
        theorem,
        scale1: scale,
        scale2: None,
        functions: Default::default(),
        kernel: None,
        seed,
        count,
        witness_mode: mode,
        exponent_variant: VariantSelection::FirstVariable,
    }
}

fn z(n: i64) -> ScaleSpec {
    ScaleSpec::IntegerSegment { start: 0, end: n - 1 }
}

fn qg(n: usize) -> ScaleSpec {
    ScaleSpec::QGrid { q: 2.0, n: n - 1 }
}

fn constant(v: f64) -> FunctionSpec {
    FunctionSpec::Constant { value: Some(v) }
}

fn assert_clean(s: &InstanceSpec) {
    let v = run_verification(s).unwrap();
    let sum = &v.summary;
    assert_eq!(sum.instances_run, s.count);
    assert_eq!(
        sum.instances_with_violation, 0,
        "{:?} {:?}: worst {}",
        s.theorem, s.witness_mode, sum.worst_relative_violation
    );
    assert_eq!(sum.invalid_witnesses, 0, "{:?}", s.theorem);
    assert_eq!(sum.instances_with_hypothesis_diagnostics, 0, "{:?}", s.theorem);
}

#[test]
fn every_theorem_dominates_on_integer_and_q_grids() {
    for theorem in [Theorem::Corollary, Theorem::System, Theorem::IntegroDynamic, Theorem::Kernel] {
        for mode in [WitnessMode::Equality, WitnessMode::StrictSlack] {
            assert_clean(&spec(theorem, z(12), 8, 3, mode));
            assert_clean(&spec(theorem, qg(8), 8, 4, mode));
        }
    }
    for mode in [WitnessMode::Equality, WitnessMode::StrictSlack] {
        assert_clean(&spec(Theorem::Comparison, z(40), 20, 5, mode));
    }
}

#[test]
fn mixed_scales_and_functions() {
    let mut s = spec(
        Theorem::Corollary,
        ScaleSpec::Union {
            scales: vec![
                ScaleSpec::HGrid { start: 0.0, h: 0.5, n: 4 },
                ScaleSpec::Explicit { points: vec![3.0, 7.0, 7.5] },
            ],
        },
        10,
        11,
        WitnessMode::Equality,
    );
    s.scale2 = Some(qg(6));
    s.functions.insert("k".into(), FunctionSpec::Exponential { scale: None, rates: None });
    s.functions.insert("p".into(), constant(1.5));
    assert_clean(&s);
}

#[test]
fn corollary_suite_example() {
    let s = spec(Theorem::Corollary, z(10), 100, 42, WitnessMode::Equality);
    let v = run_verification(&s).unwrap();
    assert_eq!(v.summary.instances_with_violation, 0);
    assert_eq!(v.points.len(), 81);
}

#[test]
fn constant_instance_matches_closed_form() {
    let mut s = spec(Theorem::Corollary, z(10), 1, 0, WitnessMode::Equality);
    for name in ["p", "q", "k"] {
        s.functions.insert(name.into(), constant(1.0));
    }
    let v = run_verification(&s).unwrap();
    let at = |t1: f64, t2: f64| v.points.iter().find(|r| r.t1 == t1 && r.t2 == Some(t2)).copied().unwrap();
    assert_eq!(at(2.0, 2.0).bound, 37.0);
    assert_eq!(at(2.0, 2.0).witness, 6.0);
    let d = &v.summary.instances[0];
    assert_eq!(d.bound_corner, 1.0 + 64.0 * 9f64.powi(8));
}

#[test]
fn zero_q_gives_bound_equal_to_p() {
    let mut s = spec(Theorem::Corollary, z(8), 5, 9, WitnessMode::StrictSlack);
    s.functions.insert("q".into(), constant(0.0));
    let v = run_verification(&s).unwrap();
    assert_eq!(v.summary.min_slack.min, 0.0);
    assert_eq!(v.summary.min_slack.max, 0.0);
    assert!(v.points.iter().all(|r| r.bound == r.witness));
}

#[test]
fn both_variants_reported_for_kernel() {
    let mut s = spec(Theorem::Kernel, z(8), 6, 21, WitnessMode::Equality);
    s.exponent_variant = VariantSelection::Both;
    let v = run_verification(&s).unwrap();
    let names: Vec<String> =
        v.summary.exponent_variants.iter().map(|x| serde_json::to_string(&x.variant).unwrap()).collect();
    assert_eq!(names, ["\"first_variable\"", "\"second_variable\""]);
    assert!(v.summary.instances.iter().all(|d| d.variants.len() == 2));
    assert_eq!(v.summary.exponent_variants[0].instances_with_violation, 0);
}

#[test]
fn constant_kernel_spec() {
    let mut s = spec(Theorem::Kernel, z(6), 3, 2, WitnessMode::StrictSlack);
    s.kernel = Some(KernelSpec::Constant { value: None });
    assert_clean(&s);
}

#[test]
fn deterministic_across_runs() {
    for theorem in [Theorem::Kernel, Theorem::IntegroDynamic, Theorem::Comparison] {
        let s = spec(theorem, z(9), 12, 77, WitnessMode::StrictSlack);
        let a = run_verification(&s).unwrap();
        let b = run_verification(&s).unwrap();
        assert_eq!(serde_json::to_string(&a.summary).unwrap(), serde_json::to_string(&b.summary).unwrap());
        assert_eq!(a.points, b.points);
    }
}

#[test]
fn different_seeds_differ() {
    let a = run_verification(&spec(Theorem::System, z(6), 2, 1, WitnessMode::Equality)).unwrap();
    let b = run_verification(&spec(Theorem::System, z(6), 2, 2, WitnessMode::Equality)).unwrap();
    assert_ne!(a.summary.instances[0].bound_corner, b.summary.instances[0].bound_corner);
}

#[test]
fn errors_name_the_instance() {
    let mut s = spec(Theorem::IntegroDynamic, z(5), 3, 1, WitnessMode::Equality);
    s.functions.insert("a".into(), constant(0.0));
    let e = run_verification(&s).unwrap_err();
    assert!(e.to_string().starts_with("instance 0:"), "{e}");
    assert!(matches!(e.root(), tscale::Error::Input(_)));
}

#[test]
fn violation_counts_agree_with_worst_relative_violation() {
    let mut s = spec(Theorem::Kernel, z(8), 4, 1, WitnessMode::Equality);
    s.exponent_variant = VariantSelection::SecondVariable;
    let v = run_verification(&s).unwrap().summary;
    assert!(v.instances_with_violation > 0);
    for d in &v.instances {
        assert_eq!(d.holds, d.worst_relative_violation <= v.dominance_tolerance, "instance {}", d.index);
        assert_eq!(d.holds, d.variants[0].holds);
        assert_eq!(d.worst_relative_violation, d.variants[0].worst_relative_violation);
    }
    assert_eq!(v.worst_relative_violation, v.instances[v.points_instance].worst_relative_violation);
    assert!(v.worst_relative_violation > v.dominance_tolerance);
}
