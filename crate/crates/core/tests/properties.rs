use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reformkit_core::builder::{assemblers, sample_pairs, BuildConfig, CorpusRef, Reform};
use reformkit_core::corpus::{BilingualCorpus, Language, MultiParallelCorpus, TranslationExample};
use reformkit_core::mask::{mask_tokens, span_mask, SentinelTemplate};
use reformkit_core::presets;
use reformkit_core::reformulate::{baseline, mips_reform, prefix_suffix, ScaffoldFormat};
use reformkit_core::schedule::ScheduleKind;
use reformkit_core::textseg::{count_units, Segmenter};

fn corpus(n_langs: usize, n_records: usize) -> MultiParallelCorpus {
    let langs = (0..n_langs)
        .map(|i| Language::new(format!("l{i}")))
        .collect();
    let cols = (0..n_langs)
        .map(|l| (0..n_records).map(|r| format!("s{r} in l{l}")).collect())
        .collect();
    MultiParallelCorpus::from_columns(langs, cols).unwrap()
}

fn sentence() -> impl Strategy<Value = String> {
    prop::collection::vec("[a-z]{1,6}|ཀ་ཁ|猫狗|[.,!]", 1..25).prop_map(|w| w.join(" "))
}

fn sentinel_numbers(s: &str) -> Vec<usize> {
    s.match_indices("<extra_id_")
        .map(|(i, _)| {
            let rest = &s[i + 10..];
            rest[..rest.find('>').unwrap()].parse().unwrap()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn sampled_pairs_never_self_and_unique_without_replacement(
        n_langs in 2usize..6, n_records in 1usize..30, seed in any::<u64>(), frac in 0.0f64..1.0,
    ) {
        let c = corpus(n_langs, n_records);
        let combos = (n_records * n_langs * (n_langs - 1)) as u64;
        let n = ((combos as f64 * frac) as u64).max(1);
        let drawn: Vec<(u64, String, String)> = sample_pairs(&c, n, seed)
            .unwrap()
            .map(|(i, s, t)| (i, s.to_string(), t.to_string()))
            .collect();
        prop_assert!(drawn.iter().all(|(_, s, t)| s != t));
        let unique: BTreeSet<_> = drawn.iter().collect();
        prop_assert_eq!(unique.len(), drawn.len());
    }

    #[test]
    fn masking_leaves_targets_and_numbers_sentinels(src in sentence(), p in 0.0f64..1.0, seed in any::<u64>(), span in any::<bool>()) {
        let ex = baseline(&TranslationExample::new("a", "b", src, "target").unwrap(), &ScaffoldFormat::default());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sent = SentinelTemplate::default();
        let out = if span {
            span_mask(&ex, p, 3, &mut rng, Segmenter::UnicodeWords, &sent).unwrap()
        } else {
            mask_tokens(&ex, p, &mut rng, Segmenter::UnicodeWords, &sent).unwrap()
        };
        prop_assert_eq!(&out.target_text, &ex.target_text);
        let nums = sentinel_numbers(&out.input_text);
        prop_assert_eq!(nums.clone(), (0..nums.len()).collect::<Vec<_>>());
        let rate = out.meta.mask_rate.unwrap();
        prop_assert!((0.0..=1.0).contains(&rate));
        if span {
            // spans never touch, so sentinels are separated by content
            prop_assert!(!out.input_text.contains("><extra_id_") && !out.input_text.contains("> <extra_id_"));
        }
    }

    #[test]
    fn prefix_suffix_pieces_come_from_target(tgt in sentence(), u in 0.0f64..=1.0, r in 0.0f64..=1.0) {
        let ex = TranslationExample::new("a", "b", "source", tgt.clone()).unwrap();
        let out = prefix_suffix(&ex, u, r, Segmenter::UnicodeWords, &ScaffoldFormat::default()).unwrap();
        let pieces: Vec<&str> = out.input_text.split('\n').collect();
        prop_assert_eq!(pieces[0], "source");
        let n = count_units(&tgt, Segmenter::UnicodeWords);
        let k: usize = pieces[1..].iter().map(|p| count_units(p, Segmenter::UnicodeWords)).sum();
        prop_assert!(k <= n);
        prop_assert!((k as f64 - u * n as f64).abs() <= 0.5 + 1e-9);
        for p in &pieces[1..] {
            prop_assert!(tgt.starts_with(p) || tgt.ends_with(p), "{:?} is neither prefix nor suffix of {:?}", p, tgt);
        }
    }

    #[test]
    fn assembly_is_a_pure_function_of_index(seed in any::<u64>(), i in 0u64..4096) {
        let pairs = (0..300).map(|k| (format!("src {k} a b"), format!("tgt {k} c d e"))).collect();
        let c = BilingualCorpus::new(Language::new("x"), Language::new("y"), pairs).unwrap();
        let cfg = BuildConfig {
            reform: Reform::Pose,
            schedule: ScheduleKind::Mix { p: 0.5 },
            n_train: 4096,
            seed,
            ..BuildConfig::default()
        };
        let [a, _, _] = assemblers(&cfg, CorpusRef::Bilingual(&c)).unwrap();
        let [b, _, _] = assemblers(&cfg, CorpusRef::Bilingual(&c)).unwrap();
        prop_assert_eq!(a.assemble(i).unwrap(), b.assemble(i).unwrap());
    }
}

#[test]
fn mips_rejects_any_collision() {
    let c = corpus(4, 1);
    let rec = &c.records()[0];
    let fmt = ScaffoldFormat::default();
    assert!(mips_reform(rec, "l0", "l1", "l2", "l3", &fmt).is_ok());
    for bad in [
        ["l0", "l1", "l0", "l3"],
        ["l0", "l1", "l2", "l1"],
        ["l0", "l1", "l2", "l2"],
        ["l0", "l0", "l2", "l3"],
    ] {
        assert!(
            mips_reform(rec, bad[0], bad[1], bad[2], bad[3], &fmt).is_err(),
            "{bad:?}"
        );
    }
}

#[test]
fn presets_roundtrip_through_json() {
    for p in presets::all() {
        let json = serde_json::to_string(&p.config).unwrap();
        let back: BuildConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p.config, "{}", p.name);
    }
    let err = serde_json::from_str::<BuildConfig>(r#"{"n_trian": 5}"#);
    assert!(err.is_err(), "unknown fields must be rejected");
}
