use grmat::experiments::{
    chi_square_uniformity, lifting_fibers, newton_correspondence, run_fulman_consistency, run_onestep_check, run_single_trace,
    run_trace_congruence, run_trace_equidistribution, ExperimentConfig, Mode, TraceShape,
};
use grmat::groups::{Family, GroupSpec, Sign};

fn exact(family: Family, n: usize, p: u32, m: usize, k: u32) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(family, n, p, m, k);
    cfg.mode = Mode::Exact;
    cfg
}

#[test]
fn onestep_gl2_over_z9() {
    let cfg = exact(Family::GL, 2, 3, 1, 2);
    let rep = run_onestep_check(&ExperimentConfig { shape: TraceShape::Positive { d: 1 }, ..cfg }).unwrap();
    assert_eq!(rep.fiber_size, 81);
    assert_eq!(rep.checked, 48);
    assert!(rep.pass);
    for e in &rep.entries {
        if e.deg_min == 2 {
            assert!(e.hypothesis);
            assert_eq!((e.labels, e.per_label_min, e.per_label_max), (9, 9, 9));
        } else {
            // scalar base point: q^1 polynomials, one per class
            assert_eq!(e.distinct_chars, 3);
            assert_eq!(e.labels, 3);
        }
    }
}

#[test]
fn onestep_sp2_over_z9() {
    let cfg = exact(Family::Sp, 1, 3, 1, 2);
    let rep = run_onestep_check(&ExperimentConfig { shape: TraceShape::Positive { d: 1 }, n: 1, ..cfg }).unwrap();
    assert_eq!(rep.fiber_size, 27);
    assert!(rep.pass);
    assert_eq!(rep.checked, 24);
    for e in &rep.entries {
        if e.deg_min == 1 {
            assert_eq!(e.distinct_chars, 1);
        } else {
            assert_eq!((e.labels, e.per_label_min), (3, 9));
        }
    }
}

#[test]
fn congruence_small_groups() {
    for fam in [Family::GL, Family::SL, Family::Sp, Family::SO, Family::U] {
        let mut cfg = ExperimentConfig::new(fam, 2, 3, 1, 3);
        cfg.samples = 300;
        cfg.seed = 1;
        let rep = run_trace_congruence(&cfg, None).unwrap();
        assert_eq!(rep.max_power, 18);
        assert_eq!(rep.violations, 0, "{fam}");
        assert!(rep.checks > 0);
    }
}

#[test]
fn single_trace_recursion_on_gl2_z9() {
    let rep = run_single_trace(&exact(Family::GL, 2, 3, 1, 2), 1).unwrap();
    assert_eq!(rep.recursion, Some(true));
    assert_eq!(rep.tv.samples, 3888);
    assert!(run_single_trace(&exact(Family::GL, 2, 3, 1, 2), 3).is_err());
}

#[test]
fn fulman_consistency_small_groups() {
    for (fam, n, sign) in [
        (Family::GL, 2, None),
        (Family::SL, 2, None),
        (Family::Sp, 1, None),
        (Family::SO, 2, Some(Sign::Plus)),
        (Family::SO, 2, Some(Sign::Minus)),
        (Family::SO, 3, None),
        (Family::U, 1, None),
        (Family::U, 2, None),
        (Family::GL, 3, None),
    ] {
        let mut cfg = exact(fam, n, 3, 1, 1);
        cfg.sign = sign;
        let rep = run_fulman_consistency(&cfg).unwrap();
        assert!(rep.pass, "{fam} {n}: {:?}", rep.buckets.iter().filter(|b| !b.matches).collect::<Vec<_>>());
        if matches!(fam, Family::GL | Family::Sp) && n <= 2 {
            assert_eq!(rep.orbit_check, Some(true));
        }
    }
}

#[test]
fn sampler_uniform_on_small_groups() {
    let mut cfg = ExperimentConfig::new(Family::SL, 2, 3, 1, 1);
    cfg.samples = 4800;
    cfg.seed = 3;
    let rep = chi_square_uniformity(&cfg, 0.001).unwrap();
    assert!(rep.members);
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn fibers_and_newton_on_level_two() {
    let sl = GroupSpec::new(Family::SL, 2, 3, 1, 2, None).unwrap();
    let rep = lifting_fibers(&sl, 1).unwrap();
    assert_eq!((rep.elements, rep.expected_fiber), (648, 27));
    assert!(rep.pass);
    let gl = GroupSpec::new(Family::GL, 2, 3, 1, 2, None).unwrap();
    let rep = newton_correspondence(&gl, 2, 1).unwrap();
    assert_eq!(rep.elements, 3888);
    assert!(rep.pass);
}

#[test]
fn determinism_across_workers() {
    let mut cfg = ExperimentConfig::new(Family::GL, 4, 3, 1, 2);
    cfg.shape = TraceShape::Positive { d: 2 };
    cfg.samples = 5000;
    cfg.seed = 11;
    let a = run_trace_equidistribution(&cfg).unwrap();
    cfg.workers = 4;
    let b = run_trace_equidistribution(&cfg).unwrap();
    assert!(a.same_outcome(&b));
    assert_eq!(a.histogram.values().sum::<u64>(), 5000);
}
