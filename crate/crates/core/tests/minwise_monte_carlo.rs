//! Statistical checks of the hash family against exact Jaccard similarity.

use mhscreen_core::minwise::b_bit_match_probability;
use mhscreen_core::{estimator_variance, exact_jaccard, make_family, match_count, TokenSet};

const K: usize = 1000;
const SEEDS: u64 = 300;

/// Pair with |A ∩ B| = shared, |A \ B| = |B \ A| = only.
fn pair(shared: u64, only: u64, offset: u64) -> (TokenSet, TokenSet) {
    let a = TokenSet::new(offset..offset + shared + only);
    let b = TokenSet::new(
        (offset..offset + shared).chain(offset + shared + only..offset + shared + 2 * only),
    );
    (a, b)
}

fn estimates(a: &TokenSet, b: &TokenSet, seeds: u64) -> Vec<f64> {
    (0..seeds)
        .map(|seed| {
            let fam =
                make_family(K, seed.wrapping_mul(0x2545_f491_4f6c_dd1d) ^ 0xdead_beef).unwrap();
            let (sa, sb) = (fam.sign(a).unwrap(), fam.sign(b).unwrap());
            match_count(&sa, &sb, K).unwrap().estimate().unwrap()
        })
        .collect()
}

#[test]
fn estimate_within_three_sigma_for_almost_all_seeds() {
    for (shared, only, offset) in [(200, 100, 0), (90, 105, 1 << 40), (30, 135, 7)] {
        let (a, b) = pair(shared, only, offset);
        let j = exact_jaccard(&a, &b).unwrap();
        let sigma = estimator_variance(j, K).unwrap().sqrt();
        let est = estimates(&a, &b, SEEDS);
        let inside = est.iter().filter(|r| (*r - j).abs() <= 3.0 * sigma).count();
        assert!(
            inside as f64 >= 0.99 * SEEDS as f64,
            "J={j}: only {inside}/{SEEDS} seeds within 3 sigma"
        );
    }
}

#[test]
fn estimator_is_unbiased_over_seeds() {
    let (a, b) = pair(200, 100, 123);
    let j = exact_jaccard(&a, &b).unwrap();
    assert_eq!(j, 0.5);
    let est = estimates(&a, &b, SEEDS);
    let mean = est.iter().sum::<f64>() / SEEDS as f64;
    let var = estimator_variance(j, K).unwrap();
    assert!(
        (mean - j).abs() <= 3.0 * (var / SEEDS as f64).sqrt(),
        "mean {mean}"
    );
}

#[test]
fn per_slot_match_rates_are_consistent_with_j() {
    // Across seeds, each slot's match count is Binomial(SEEDS, J); the
    // summed standardized squares should look like chi-square with K dof.
    let (a, b) = pair(100, 150, 5000);
    let j = exact_jaccard(&a, &b).unwrap();
    let mut counts = vec![0u32; K];
    for seed in 0..SEEDS {
        let fam = make_family(K, seed + 1_000_000).unwrap();
        let (sa, sb) = (fam.sign(&a).unwrap(), fam.sign(&b).unwrap());
        for (i, (x, y)) in sa.values().iter().zip(sb.values()).enumerate() {
            counts[i] += (x == y) as u32;
        }
    }
    let n = SEEDS as f64;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - n * j).powi(2) / (n * j * (1.0 - j)))
        .sum();
    let sd = (2.0 * K as f64).sqrt();
    assert!((chi2 - K as f64).abs() < 5.0 * sd, "chi2 = {chi2}");
}

#[test]
fn b_bit_match_frequency_follows_collision_model() {
    let (a, b) = pair(120, 140, 99);
    let j = exact_jaccard(&a, &b).unwrap();
    let seeds = 100u64;
    let sigs: Vec<_> = (0..seeds)
        .map(|seed| {
            let fam = make_family(K, seed ^ 0x5555).unwrap();
            (fam.sign(&a).unwrap(), fam.sign(&b).unwrap())
        })
        .collect();
    for bits in [1u32, 2, 4, 8, 16] {
        let mut matches = 0usize;
        for (sa, sb) in &sigs {
            let (na, nb) = (sa.to_b_bit(bits).unwrap(), sb.to_b_bit(bits).unwrap());
            matches += match_count(&na, &nb, K).unwrap().x;
        }
        let trials = (seeds as usize * K) as f64;
        let p = b_bit_match_probability(j, bits);
        let freq = matches as f64 / trials;
        let sigma = (p * (1.0 - p) / trials).sqrt();
        assert!((freq - p).abs() <= 3.0 * sigma, "b={bits}: {freq} vs {p}");
    }
}
