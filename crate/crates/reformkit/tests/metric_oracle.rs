mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reformkit_core::metrics::{bleu, chrfpp, BleuConfig, ChrfConfig, Smoothing};

fn corpus() -> impl Strategy<Value = (Vec<String>, Vec<String>)> {
    any::<u64>().prop_flat_map(|seed| (1usize..40).prop_map(move |n| common::random_pairs(seed, n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn bleu_matches_oracle((h, r) in corpus(), max_n in 1usize..6, k in prop::option::of(0.1f64..2.0)) {
        let cfg = BleuConfig { max_ngram: max_n, smoothing: k.map_or(Smoothing::None, Smoothing::AddK) };
        let got = bleu(&h, &r, &cfg).unwrap();
        let want = common::bleu(&h, &r, max_n, k);
        prop_assert!((got - want).abs() <= 1e-6, "{} vs {}", got, want);
    }

    #[test]
    fn chrfpp_matches_oracle((h, r) in corpus(), char_n in 1usize..8, word_n in 0usize..3, beta in 0.5f64..3.0) {
        let cfg = ChrfConfig { char_n, word_n, beta };
        let got = chrfpp(&h, &r, &cfg).unwrap();
        let want = common::chrfpp(&h, &r, char_n, word_n, beta);
        prop_assert!((got - want).abs() <= 1e-6, "{} vs {}", got, want);
    }

    #[test]
    fn scores_are_permutation_invariant((h, r) in corpus(), seed in any::<u64>()) {
        let mut idx: Vec<usize> = (0..h.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let hp: Vec<String> = idx.iter().map(|&i| h[i].clone()).collect();
        let rp: Vec<String> = idx.iter().map(|&i| r[i].clone()).collect();
        let b = BleuConfig::default();
        let c = ChrfConfig::default();
        prop_assert!((bleu(&h, &r, &b).unwrap() - bleu(&hp, &rp, &b).unwrap()).abs() <= 1e-9);
        prop_assert!((chrfpp(&h, &r, &c).unwrap() - chrfpp(&hp, &rp, &c).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn bleu_is_100_only_for_exact_match((_, r) in corpus()) {
        let long: Vec<String> = r.iter().map(|s| format!("{s} w x y z")).collect();
        prop_assert_eq!(bleu(&long, &long, &BleuConfig::default()).unwrap(), 100.0);
        let mut changed = long.clone();
        changed[0].push_str(" extra");
        prop_assert!(bleu(&changed, &long, &BleuConfig::default()).unwrap() < 100.0);
    }
}
