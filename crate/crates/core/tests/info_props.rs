use proptest::prelude::*;

use qcomp_core::hilbert::{random_density_on, rng_from_seed, RegisterLayout};
use qcomp_core::info;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn eigen_overlap_mass_bound(seed in 0u64..100_000) {
        let mut rng = rng_from_seed(seed);
        let l = RegisterLayout::single("A", 2);
        let rho = random_density_on(l.clone(), 2, &mut rng).unwrap();
        let sigma = random_density_on(l, 2, &mut rng).unwrap();
        let t = info::trace_distance(&rho, &sigma).unwrap();
        let mass = info::joint_eigen_distributions(&rho, &sigma).unwrap().overlap_mass();
        prop_assert!(mass >= 1.0 - (t - t * t / 4.0).max(0.0).sqrt() - 1e-10);
    }

    #[test]
    fn pairwise_quantities_are_well_behaved(seed in 0u64..100_000, n in 2usize..6) {
        let mut rng = rng_from_seed(seed);
        let l = RegisterLayout::single("A", n);
        let rho = random_density_on(l.clone(), n, &mut rng).unwrap();
        let sigma = random_density_on(l, n, &mut rng).unwrap();
        let f = info::fidelity(&rho, &sigma).unwrap();
        prop_assert!((f - info::fidelity(&sigma, &rho).unwrap()).abs() <= 1e-9);
        prop_assert!((-1e-12..=1.0 + 1e-9).contains(&f));
        let d = info::rel_entropy(&rho, &sigma).unwrap();
        prop_assert!(d >= -1e-9);
        prop_assert!(info::dmax(&rho, &sigma).unwrap() >= d - 1e-9);
        let t = info::trace_distance(&rho, &sigma).unwrap();
        prop_assert!((-1e-12..=2.0 + 1e-9).contains(&t));
    }

    #[test]
    fn mutual_information_two_ways(seed in 0u64..100_000) {
        let l = RegisterLayout::new([("A", 2), ("B", 3)]).unwrap();
        let rho = random_density_on(l, 6, &mut rng_from_seed(seed)).unwrap();
        let i1 = info::mutual_info(&rho, &["A"], &["B"]).unwrap();
        let i2 = info::mutual_info_relent(&rho, &["A"], &["B"]).unwrap();
        prop_assert!((i1 - i2).abs() <= 1e-9);
        prop_assert!(i1 <= 2.0 * info::entropy_of(&rho, &["A"]).unwrap() + 1e-9);
    }
}
