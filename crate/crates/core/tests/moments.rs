mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use wshift::momentclass::{berger_hausdorff_test, reconstruct_atoms, Verdict, DEFAULT_TOLERANCE};

#[test]
fn generated_weights_reproduce_their_moments() {
    let mut rng = StdRng::seed_from_u64(7);
    let measure = common::random_measure(&mut rng);
    let spec = common::spec_from_measure(&measure);
    let cert = berger_hausdorff_test(&spec, 8, DEFAULT_TOLERANCE).unwrap();
    for (k, want) in common::moments(&measure, 18).into_iter().enumerate() {
        assert!((cert.moments[k] - want).abs() <= 1e-12 * want, "m_{k}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn atomic_measures_round_trip(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let measure = common::random_measure(&mut rng);
        let spec = common::spec_from_measure(&measure);
        let cert = berger_hausdorff_test(&spec, 8, DEFAULT_TOLERANCE).unwrap();
        prop_assert_eq!(cert.verdict, Verdict::ConsistentSubnormal);
        let mu = reconstruct_atoms(&cert, measure.len()).unwrap();
        prop_assert_eq!(mu.atoms.len(), measure.len());
        for (atom, (s, w)) in mu.atoms.iter().zip(&measure) {
            prop_assert!((atom.location - s.sqrt()).abs() <= 1e-6, "{} vs {}", atom.location, s.sqrt());
            prop_assert!((atom.weight - w).abs() <= 1e-6);
        }
    }

    #[test]
    fn weight_drop_breaks_subnormality(seed in any::<u64>()) {
        // subnormal shifts are hyponormal, so their weights never drop
        let mut rng = StdRng::seed_from_u64(seed);
        let measure = common::random_measure(&mut rng);
        let mut prefix: Vec<f64> = common::moments(&measure, 20).windows(2).map(|w| (w[1] / w[0]).sqrt()).collect();
        prefix[1] = prefix[0] * 0.5;
        let top = measure.iter().map(|(s, _)| *s).fold(0.0, f64::max).sqrt();
        let spec = wshift::weightspec::WeightSpec::unilateral(prefix, wshift::weightspec::TailRule::Constant(top)).unwrap();
        let cert = berger_hausdorff_test(&spec, 8, DEFAULT_TOLERANCE).unwrap();
        prop_assert_eq!(cert.verdict, Verdict::NotSubnormal);
    }
}
