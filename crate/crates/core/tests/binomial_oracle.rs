//! Tail probabilities against exact big-rational arithmetic.

use mhscreen_core::{binom_cdf, binom_upper_tail, solve_lower, solve_upper};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

fn choose(n: usize, r: usize) -> BigInt {
    (0..r).fold(BigInt::one(), |acc, i| {
        acc * BigInt::from(n - i) / BigInt::from(i + 1)
    })
}

fn exact_pmfs(k: usize, p: f64) -> Vec<BigRational> {
    let p = BigRational::from_float(p).unwrap();
    let q = BigRational::one() - &p;
    (0..=k)
        .map(|i| {
            BigRational::from_integer(choose(k, i))
                * num_traits::pow(p.clone(), i)
                * num_traits::pow(q.clone(), k - i)
        })
        .collect()
}

fn exact_cdf(pmfs: &[BigRational], m: usize) -> BigRational {
    pmfs[..=m]
        .iter()
        .fold(BigRational::zero(), |acc, x| acc + x)
}

fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

#[test]
fn cdf_matches_exact_rationals_up_to_k_30() {
    let probabilities = [0.01, 0.1, 0.25, 0.3, 0.5, 0.62, 0.9, 0.999];
    for k in 1..=30 {
        for &p in &probabilities {
            let pmfs = exact_pmfs(k, p);
            for m in 0..=k {
                let want = exact_cdf(&pmfs, m).to_f64().unwrap();
                let got = binom_cdf(m, k, p).unwrap();
                assert!(
                    rel_err(got, want) <= 1e-9,
                    "cdf({m}; {k}, {p}) = {got}, exact {want}"
                );
                let want_upper = (BigRational::one() - exact_cdf(&pmfs, m)).to_f64().unwrap();
                let got_upper = binom_upper_tail(m, k, p).unwrap();
                // the complemented side is only accurate in absolute terms
                assert!(
                    rel_err(got_upper, want_upper) <= 1e-9
                        || (got_upper - want_upper).abs() <= 1e-15,
                    "upper({m}; {k}, {p}) = {got_upper}, exact {want_upper}"
                );
            }
        }
    }
}

/// Brute-force scan of all m with exact tails, independent of the solvers' search.
#[test]
fn solvers_match_exhaustive_scan() {
    for (k, t) in [(20, 0.5), (30, 0.3), (25, 0.8), (100, 0.5), (100, 0.3)] {
        let pmfs = exact_pmfs(k, t);
        for e in [1e-12, 1e-6, 1e-3, 0.05] {
            let e_exact = BigRational::from_float(e).unwrap();
            let lower = (0..=k).rfind(|&m| exact_cdf(&pmfs, m) <= e_exact);
            let upper = (0..k).find(|&m| BigRational::one() - exact_cdf(&pmfs, m) <= e_exact);
            assert_eq!(
                solve_lower(k, t, e).unwrap(),
                lower,
                "lower k={k} t={t} e={e}"
            );
            assert_eq!(
                solve_upper(k, t, e).unwrap(),
                upper,
                "upper k={k} t={t} e={e}"
            );
        }
    }
}
