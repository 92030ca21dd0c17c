use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use grmat::char_derivative::dchar_map;
use grmat::conjugacy::{class_of_matrix_gl, enumerate_data, Partition};
use grmat::experiments::{congruence_violations, run_trace_equidistribution, tv_distance, ExperimentConfig, TraceShape};
use grmat::groups::{sample_fq, sample_haar, Family, GroupSpec, Section, Sign};
use grmat::hayes::HayesModulus;
use grmat::poly::Poly;
use grmat::ring::Ring;

fn ring_params() -> impl Strategy<Value = (u32, usize, u32)> {
    (prop_oneof![Just(3u32), Just(5)], 1usize..=3, 1u32..=3)
}

fn family_params() -> impl Strategy<Value = (Family, usize, Option<Sign>)> {
    prop_oneof![
        (2usize..=4).prop_map(|n| (Family::GL, n, None)),
        (2usize..=3).prop_map(|n| (Family::SL, n, None)),
        (1usize..=2).prop_map(|n| (Family::Sp, n, None)),
        (2usize..=4, any::<bool>()).prop_map(|(n, s)| (Family::SO, n, Some(Sign::from_bool(s)))),
        (1usize..=3).prop_map(|n| (Family::U, n, None)),
    ]
}

fn poly_with_unit_ends(ring: &Ring, coeffs: &[u64]) -> Poly {
    let mut c: Vec<_> = coeffs.iter().map(|&i| ring.element_at(i % ring.size())).collect();
    if !ring.is_unit(&c[0]) {
        c[0] = ring.one();
    }
    if !ring.is_unit(c.last().unwrap()) {
        *c.last_mut().unwrap() = ring.one();
    }
    Poly::new(ring, c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frobenius_is_a_ring_map((p, m, k) in ring_params(), a in any::<u64>(), b in any::<u64>()) {
        let r = Ring::new(p, m, k).unwrap();
        let (a, b) = (r.element_at(a % r.size()), r.element_at(b % r.size()));
        prop_assert_eq!(r.sigma(&r.add(&a, &b)), r.add(&r.sigma(&a), &r.sigma(&b)));
        prop_assert_eq!(r.sigma(&r.mul(&a, &b)), r.mul(&r.sigma(&a), &r.sigma(&b)));
        prop_assert_eq!(r.sigma_pow(&a, m as u32), a);
        let field = r.residue_field();
        prop_assert_eq!(field.pow(&r.reduce(&a, &field), p as u64), r.reduce(&r.sigma(&a), &field));
        if k > 1 {
            let lower = r.at_level(k - 1).unwrap();
            prop_assert_eq!(r.reduce(&r.sigma(&a), &lower), lower.sigma(&r.reduce(&a, &lower)));
        }
    }

    #[test]
    fn unit_count_formula((p, m, k) in ring_params()) {
        let r = Ring::new(p, m, k).unwrap();
        let q = (p as u64).pow(m as u32);
        prop_assert_eq!(r.size(), q.pow(k));
        prop_assert_eq!(r.unit_count(), q.pow(k - 1) * (q - 1));
        if r.size() <= 2000 {
            prop_assert_eq!(r.units().count() as u64, r.unit_count());
        }
    }

    #[test]
    fn reciprocal_is_a_multiplicative_involution(
        f in prop::collection::vec(any::<u64>(), 1..6),
        g in prop::collection::vec(any::<u64>(), 1..6),
        k in 1u32..=2,
    ) {
        let r = Ring::new(3, 2, k).unwrap();
        let (f, g) = (poly_with_unit_ends(&r, &f), poly_with_unit_ends(&r, &g));
        let rf = f.reciprocal().unwrap();
        prop_assert_eq!(rf.reciprocal().unwrap(), f.scale(&r.inv(&f.lead()).unwrap()));
        prop_assert_eq!(f.mul(&g).reciprocal().unwrap(), rf.mul(&g.reciprocal().unwrap()));
        let sf = f.skew_reciprocal().unwrap();
        prop_assert_eq!(f.mul(&g).skew_reciprocal().unwrap(), sf.mul(&g.skew_reciprocal().unwrap()));
        prop_assert_eq!(sf.skew_reciprocal().unwrap(), f.scale(&r.inv(&f.lead()).unwrap()));
    }

    #[test]
    fn hayes_label_is_multiplicative(
        f in prop::collection::vec(0u64..3, 0..5),
        g in prop::collection::vec(0u64..3, 0..5),
        l in 0usize..=2,
        e in 0usize..=2,
    ) {
        let r = Ring::field(3, 1).unwrap();
        let monic = |c: &[u64]| {
            let mut v: Vec<_> = c.iter().map(|&i| r.element_at(i)).collect();
            v.push(r.one());
            Poly::new(&r, v)
        };
        let (f, g) = (monic(&f), monic(&g));
        let h = HayesModulus::with_power_of_x(&r, l, e);
        let lhs = h.label(&f.mul(&g)).unwrap();
        let rhs = h.mul(&h.label(&f).unwrap(), &h.label(&g).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn partition_dual_is_an_involution(parts in prop::collection::vec(1usize..6, 0..6)) {
        let lambda = Partition::new(parts);
        let dual = lambda.dual();
        prop_assert_eq!(dual.size(), lambda.size());
        prop_assert_eq!(dual.largest(), lambda.parts().len());
        prop_assert_eq!(dual.dual(), lambda);
    }

    #[test]
    fn gl_representative_has_its_class(n in 1usize..=3, pick in any::<prop::sample::Index>()) {
        let field = Ring::field(3, 1).unwrap();
        let data = enumerate_data(Family::GL, n, &field).unwrap();
        let datum = pick.get(&data);
        let m = datum.representative_gl();
        prop_assert_eq!(m.char_poly(), datum.char_poly(&field));
        prop_assert_eq!(m.min_poly_mod_p(), datum.min_poly(&field));
        prop_assert_eq!(&class_of_matrix_gl(&m).unwrap(), datum);
    }

    #[test]
    fn tv_distance_is_a_metric(
        a in prop::collection::vec(0u64..50, 4),
        b in prop::collection::vec(0u64..50, 4),
        c in prop::collection::vec(0u64..50, 4),
    ) {
        prop_assume!(a.iter().sum::<u64>() > 0 && b.iter().sum::<u64>() > 0 && c.iter().sum::<u64>() > 0);
        let ab = tv_distance(&a, &b).unwrap();
        prop_assert_eq!(&ab, &tv_distance(&b, &a).unwrap());
        prop_assert!(ab >= num_rational::BigRational::from_integer(0.into()));
        prop_assert!(ab <= num_rational::BigRational::from_integer(1.into()));
        prop_assert!(ab <= tv_distance(&a, &c).unwrap() + tv_distance(&c, &b).unwrap());
        let doubled: Vec<u64> = a.iter().map(|x| 2 * x).collect();
        prop_assert_eq!(tv_distance(&a, &doubled).unwrap(), num_rational::BigRational::from_integer(0.into()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn haar_samples_are_members_and_close_under_products(
        (family, n, sign) in family_params(),
        k in 1u32..=3,
        seed in any::<u64>(),
    ) {
        let spec = GroupSpec::new(family, n, 3, 1, k, sign).unwrap();
        let lie = spec.lie_algebra();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = sample_haar(&spec, &lie, Section::Standard, &mut rng);
        let b = sample_haar(&spec, &lie, Section::Perturbed, &mut rng);
        prop_assert!(spec.is_member(&a) && spec.is_member(&b));
        prop_assert!(spec.is_member(&a.mul(&b)));
        let inv = a.inverse().unwrap();
        prop_assert!(spec.is_member(&inv));
        for level in 1..k {
            let lower = spec.at_level(level).unwrap();
            prop_assert!(lower.is_member(&a.reduce(lower.ring())));
        }
        let r = spec.ring();
        match family {
            Family::Sp | Family::SO => prop_assert_eq!(inv.trace(), a.trace()),
            Family::U => prop_assert_eq!(inv.trace(), r.tau(&a.trace()).unwrap()),
            _ => {}
        }
        prop_assert_eq!(congruence_violations(&a, 2 * 9).1, 0);
    }

    #[test]
    fn derivative_image_is_a_class_invariant((family, n, sign) in family_params(), seed in any::<u64>()) {
        let spec = GroupSpec::new(family, n, 3, 1, 1, sign).unwrap();
        let lie = spec.lie_algebra();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a0 = sample_fq(&spec, &mut rng);
        let g = sample_fq(&spec, &mut rng);
        let conj = g.mul(&a0).mul(&g.inverse().unwrap());
        let image = dchar_map(&spec, &lie, &a0).unwrap().image();
        prop_assert_eq!(image, dchar_map(&spec, &lie, &conj).unwrap().image());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn reports_do_not_depend_on_workers(seed in any::<u64>(), workers in 2usize..=4) {
        let mut cfg = ExperimentConfig::new(Family::GL, 3, 3, 1, 2);
        cfg.shape = TraceShape::Positive { d: 1 };
        cfg.samples = 3000;
        cfg.seed = seed;
        let a = run_trace_equidistribution(&cfg).unwrap();
        let b = run_trace_equidistribution(&ExperimentConfig { workers, ..cfg.clone() }).unwrap();
        prop_assert!(a.same_outcome(&b));
        prop_assert_eq!(a.histogram.values().sum::<u64>(), 3000);
    }
}
