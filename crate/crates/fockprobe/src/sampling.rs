//! Counter-based pseudorandom numbers for detection sampling.
//!
//! Trial `i` of a run draws its randomness as a pure function of
//! `(seed, i)`, so trials can be generated in parallel and in any order
//! while remaining bit-identical across runs and thread counts.

use rayon::prelude::*;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw in `[0, 1)` for one trial of one run.
pub fn trial_uniform(seed: u64, index: u64) -> f64 {
    let state = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    // Top 53 bits give a dyadic uniform in [0, 1).
    (mix(state) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Number of trials in `0..trials` whose uniform draw falls below
/// `threshold`. The tally is an integer sum, so the parallel reduction is
/// exactly order-independent.
pub fn count_below(seed: u64, trials: u64, threshold: f64) -> u64 {
    (0..trials)
        .into_par_iter()
        .filter(|&i| trial_uniform(seed, i) < threshold)
        .count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_pure_functions_of_seed_and_index() {
        for i in 0..100 {
            assert_eq!(trial_uniform(42, i), trial_uniform(42, i));
        }
        assert_ne!(trial_uniform(42, 0), trial_uniform(43, 0));
        assert_ne!(trial_uniform(42, 0), trial_uniform(42, 1));
    }

    #[test]
    fn draws_stay_in_unit_interval() {
        for i in 0..10_000 {
            let u = trial_uniform(7, i);
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn counting_matches_sequential_filter() {
        let seed = 1234;
        let p = 0.37;
        let sequential = (0..50_000u64)
            .filter(|&i| trial_uniform(seed, i) < p)
            .count() as u64;
        assert_eq!(count_below(seed, 50_000, p), sequential);
        // Law of large numbers sanity: within 5 sigma of the mean.
        let sigma = (50_000.0 * p * (1.0 - p)).sqrt();
        assert!((sequential as f64 - 50_000.0 * p).abs() < 5.0 * sigma);
    }
}
