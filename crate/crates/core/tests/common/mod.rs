//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use std::collections::HashSet;

use proptest::prelude::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use semstab::measures::RboVariant;
use semstab::{FrequencySnapshot, RankedList};

/// RBO straight from the set definitions: prefix(l, d) = { tags with rank <= d }.
pub fn brute_rbo(a: &RankedList, b: &RankedList, p: f64, variant: RboVariant) -> f64 {
    let prefix = |l: &RankedList, d: u32| -> HashSet<String> {
        l.entries()
            .iter()
            .filter(|e| e.rank <= d)
            .map(|e| e.tag.as_str().to_owned())
            .collect()
    };
    let depth = a.max_rank().max(b.max_rank());
    let occurring: HashSet<u32> = a.entries().iter().chain(b.entries()).map(|e| e.rank).collect();
    let mut sum = 0.0;
    for d in 1..=depth {
        if variant == RboVariant::TieCorrected && !occurring.contains(&d) {
            continue;
        }
        let (pa, pb) = (prefix(a, d), prefix(b, d));
        let overlap = pa.intersection(&pb).count() as f64;
        let agreement = match variant {
            RboVariant::Plain => overlap / d as f64,
            _ => 2.0 * overlap / (pa.len() + pb.len()) as f64,
        };
        sum += agreement * p.powi(d as i32 - 1);
    }
    (1.0 - p) * sum
}

/// Agreement at every depth 1..=D*, tie-aware form.
pub fn agreements(a: &RankedList, b: &RankedList) -> Vec<(u32, f64, bool)> {
    let depth = a.max_rank().max(b.max_rank());
    let occurring: HashSet<u32> = a.entries().iter().chain(b.entries()).map(|e| e.rank).collect();
    (1..=depth)
        .map(|d| {
            let pa: HashSet<&str> = a.entries().iter().filter(|e| e.rank <= d).map(|e| e.tag.as_str()).collect();
            let pb: HashSet<&str> = b.entries().iter().filter(|e| e.rank <= d).map(|e| e.tag.as_str()).collect();
            let ag = 2.0 * pa.intersection(&pb).count() as f64 / (pa.len() + pb.len()) as f64;
            (d, ag, occurring.contains(&d))
        })
        .collect()
}

/// Discrete power-law draws by inverting the continuous approximation:
/// x = floor((xmin - 1/2) (1 - u)^(-1/(alpha - 1)) + 1/2).
pub fn power_law_sample(alpha: f64, xmin: u64, n: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            ((xmin as f64 - 0.5) * (1.0 - u).powf(-1.0 / (alpha - 1.0)) + 0.5).floor() as u64
        })
        .collect()
}

/// Exponential(rate) draws by inversion, rounded up to positive integers.
pub fn exponential_counts(rate: f64, n: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            1 + (-(1.0 - u).ln() / rate).floor() as u64
        })
        .collect()
}

/// Ordinary least-squares slope of y on x.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

/// Random ranked list from random counts over a small alphabet (ties likely).
pub fn ranked_list() -> impl Strategy<Value = RankedList> {
    prop::collection::btree_map(0u8..14, 1u64..6, 1..12).prop_map(|m| {
        FrequencySnapshot::from_counts("r", m.into_iter().map(|(k, c)| (format!("t{k}"), c)))
            .unwrap()
            .rank()
            .unwrap()
    })
}

/// Two tie-free lists of the same length over a shared alphabet.
pub fn tie_free_pair() -> impl Strategy<Value = (RankedList, RankedList)> {
    (1usize..10).prop_flat_map(|len| {
        let pick = Just((0u8..16).collect::<Vec<_>>()).prop_shuffle();
        (pick.clone(), pick).prop_map(move |(a, b)| {
            let mk = |v: &[u8]| {
                RankedList::from_ranks(v[..len].iter().enumerate().map(|(i, k)| (format!("t{k}"), i as u32 + 1)))
                    .unwrap()
            };
            (mk(&a), mk(&b))
        })
    })
}

pub fn persistence() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), 0.0f64..0.999]
}
