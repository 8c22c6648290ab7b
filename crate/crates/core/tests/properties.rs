mod common;

use std::sync::Arc;

use common::*;
use proptest::prelude::*;
use semstab::generators::{generate_corpus, zipf_background, GeneratorConfig, TagModel};
use semstab::measures::{kl_divergence, rbo, RboParams, RboVariant};
use semstab::powerlaw::{ccdf, fit_power_law};
use semstab::stability::{classify_stability, stability_surface};
use semstab::{FrequencySnapshot, TagStream};

const VARIANTS: [RboVariant; 3] = [RboVariant::Plain, RboVariant::TieAware, RboVariant::TieCorrected];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rbo_in_unit_interval_and_symmetric(a in ranked_list(), b in ranked_list(), p in persistence()) {
        for v in VARIANTS {
            let prm = RboParams::new(p, v).unwrap();
            let ab = rbo(&a, &b, &prm).unwrap();
            let ba = rbo(&b, &a, &prm).unwrap();
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert!((ab - ba).abs() < 1e-12);
        }
    }

    #[test]
    fn rbo_matches_set_oracle(a in ranked_list(), b in ranked_list(), p in persistence()) {
        for v in [RboVariant::TieAware, RboVariant::TieCorrected] {
            let got = rbo(&a, &b, &RboParams::new(p, v).unwrap()).unwrap();
            prop_assert!((got - brute_rbo(&a, &b, p, v)).abs() < 1e-12);
        }
    }

    #[test]
    fn variants_agree_without_ties((a, b) in tie_free_pair(), p in persistence()) {
        let vals: Vec<f64> = VARIANTS.iter().map(|&v| rbo(&a, &b, &RboParams::new(p, v).unwrap()).unwrap()).collect();
        prop_assert!((vals[0] - vals[1]).abs() < 1e-12);
        prop_assert!((vals[1] - vals[2]).abs() < 1e-12);
        prop_assert!((vals[0] - brute_rbo(&a, &b, p, RboVariant::Plain)).abs() < 1e-12);
    }

    #[test]
    fn tie_free_self_similarity((a, _) in tie_free_pair(), p in persistence()) {
        let got = rbo(&a, &a, &RboParams::new(p, RboVariant::TieCorrected).unwrap()).unwrap();
        prop_assert!((got - (1.0 - p.powi(a.len() as i32))).abs() < 1e-12);
    }

    #[test]
    fn p_zero_sees_only_the_top((a, b) in tie_free_pair()) {
        let got = rbo(&a, &b, &RboParams::new(0.0, RboVariant::Plain).unwrap()).unwrap();
        let same_top = a.entries()[0].tag == b.entries()[0].tag;
        prop_assert_eq!(got, if same_top { 1.0 } else { 0.0 });
    }

    #[test]
    fn tie_corrected_never_exceeds_tie_aware(a in ranked_list(), b in ranked_list(), p in 0.01f64..0.999) {
        let aware = rbo(&a, &b, &RboParams::new(p, RboVariant::TieAware).unwrap()).unwrap();
        let corrected = rbo(&a, &b, &RboParams::new(p, RboVariant::TieCorrected).unwrap()).unwrap();
        prop_assert!(corrected <= aware + 1e-15);
        let skipped_positive = agreements(&a, &b).iter().any(|&(_, ag, occurs)| !occurs && ag > 0.0);
        if skipped_positive {
            prop_assert!(corrected < aware);
        }
    }

    #[test]
    fn rank_is_competition_ranking(counts in prop::collection::btree_map(0u8..20, 1u64..8, 1..15)) {
        let snap = FrequencySnapshot::from_counts("r", counts.iter().map(|(k, &c)| (format!("t{k}"), c))).unwrap();
        let ranked = snap.rank().unwrap();
        for e in ranked.entries() {
            let c = e.count.unwrap();
            let greater = snap.counts().values().filter(|&&o| o > c).count() as u32;
            prop_assert_eq!(e.rank, greater + 1);
        }
        // Same counts inserted in reverse order rank identically.
        let rev = FrequencySnapshot::from_counts("r", counts.iter().rev().map(|(k, &c)| (format!("t{k}"), c))).unwrap();
        prop_assert_eq!(rev.rank().unwrap(), ranked);
    }

    #[test]
    fn snapshots_and_proportions_are_consistent(tags in prop::collection::vec(0u8..6, 1..80), w in 1usize..9) {
        let s = TagStream::from_tags("r", tags.iter().map(|t| format!("t{t}"))).unwrap();
        for n in 1..=s.len() {
            prop_assert_eq!(s.snapshot(n).unwrap().counts().values().sum::<u64>() as usize, n);
        }
        for pt in s.proportion_trajectory(w).unwrap() {
            let total: f64 = pt.proportions.values().sum();
            prop_assert!(pt.proportions.values().all(|&x| x >= 0.0));
            prop_assert!((total - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn kl_is_non_negative(raw_p in prop::collection::vec(0.0f64..1.0, 1..10), raw_q in prop::collection::vec(0.01f64..1.0, 10)) {
        let n = raw_p.len();
        let sp: f64 = raw_p.iter().sum();
        prop_assume!(sp > 1e-6);
        let p: Vec<f64> = raw_p.iter().map(|x| x / sp).collect();
        let sq: f64 = raw_q[..n].iter().sum();
        let q: Vec<f64> = raw_q[..n].iter().map(|x| x / sq).collect();
        prop_assert!(kl_divergence(&p, &q).unwrap() >= 0.0);
        prop_assert!(kl_divergence(&p, &p).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn surface_non_increasing_in_k(seed in any::<u64>(), rate in 0.0f64..1.0) {
        let background = Arc::new(zipf_background(50, 1.0).unwrap());
        let cfg = GeneratorConfig {
            model: TagModel::Mixture { imitation_rate: rate, background },
            length: 60,
            n_streams: 5,
            seed,
        };
        let corpus = generate_corpus(&cfg).unwrap();
        let ks: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let s = stability_surface(&corpus, &[20, 40, 60], &ks, 10, &RboParams::default()).unwrap();
        for row in &s.values {
            prop_assert!(row.windows(2).all(|w| w[1] <= w[0]));
            prop_assert!(row.iter().all(|f| (f * 5.0 - (f * 5.0).round()).abs() < 1e-12));
        }
    }

    #[test]
    fn generators_are_deterministic(seed in any::<u64>(), rate in 0.0f64..=1.0) {
        let background = Arc::new(zipf_background(100, 1.1).unwrap());
        let cfg = GeneratorConfig {
            model: TagModel::Mixture { imitation_rate: rate, background },
            length: 40,
            n_streams: 3,
            seed,
        };
        prop_assert_eq!(generate_corpus(&cfg).unwrap(), generate_corpus(&cfg).unwrap());
    }

    #[test]
    fn classification_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(classify_stability(lo).unwrap() <= classify_stability(hi).unwrap());
    }

    #[test]
    fn ccdf_is_non_increasing(sample in prop::collection::vec(1u64..50, 1..60)) {
        let c = ccdf(&sample).unwrap();
        prop_assert_eq!(c[0].ccdf, 1.0);
        prop_assert!(c.windows(2).all(|w| w[0].value < w[1].value && w[1].ccdf < w[0].ccdf));
        let distinct: std::collections::BTreeSet<_> = sample.iter().collect();
        prop_assert_eq!(c.len(), distinct.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn power_law_fit_ignores_order(mut sample in prop::collection::vec(1u64..40, 2..80)) {
        prop_assume!(sample.iter().any(|&x| x != sample[0]));
        let a = fit_power_law(&sample).unwrap();
        sample.reverse();
        prop_assert_eq!(a, fit_power_law(&sample).unwrap());
        prop_assert!(a.alpha > 1.0 && (0.0..=1.0).contains(&a.ks_distance) && a.n_tail >= 2);
    }
}
