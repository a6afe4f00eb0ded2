//! Local Church-Rosser on library rules: parallel independent steps close
//! to a common graph, sequential independent steps swap.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{hosts, random_state, steps_at, sweep, units};
use gtukit_core::graph::is_isomorphic;
use gtukit_core::rewrite::{close_diamond, parallel_independent, swap_sequential};

#[test]
fn ten_thousand_parallel_pairs_close() {
    let r = sweep(false, 10_000, 0x5eed);
    assert!(r.failures.is_empty(), "{:?}", &r.failures[..r.failures.len().min(3)]);
    assert!(r.dependent > 0, "the sample never hit a conflict");
}

#[test]
fn ten_thousand_sequential_pairs_swap() {
    let r = sweep(true, 10_000, 0x5eed + 1);
    assert!(r.failures.is_empty(), "{:?}", &r.failures[..r.failures.len().min(3)]);
    assert!(r.dependent > 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn closing_is_symmetric(seed in any::<u64>()) {
        let (us, hs) = (units(), hosts());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (u, g) = random_state(&us, hs, &mut rng);
        let steps = steps_at(&us[u], &g);
        for d1 in steps.iter().take(6) {
            for d2 in steps.iter().take(6) {
                let a = parallel_independent(d1, d2).unwrap();
                prop_assert_eq!(a, parallel_independent(d2, d1).unwrap());
                if a {
                    let (x, _) = close_diamond(d1, d2).unwrap();
                    let (y, _) = close_diamond(d2, d1).unwrap();
                    prop_assert!(is_isomorphic(&x.after, &y.after));
                }
            }
        }
    }

    #[test]
    fn swapping_twice_returns(seed in any::<u64>()) {
        let (us, hs) = (units(), hosts());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (u, g) = random_state(&us, hs, &mut rng);
        for d1 in steps_at(&us[u], &g).iter().take(4) {
            for d2 in steps_at(&us[u], &d1.after).iter().take(4) {
                if let Ok((f, s)) = swap_sequential(d1, d2) {
                    let (f2, s2) = swap_sequential(&f, &s).unwrap();
                    prop_assert!(is_isomorphic(&f2.after, &d1.after));
                    prop_assert_eq!(&s2.after, &s.after);
                }
            }
        }
    }
}
