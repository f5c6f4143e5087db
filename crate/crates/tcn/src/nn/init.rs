//! Weight initialization.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Glorot-uniform draws: `n` values from U(-a, a) with
/// `a = sqrt(6 / (fan_in + fan_out))`, consumed in order from `rng`.
pub fn glorot_uniform(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize, n: usize) -> Vec<f64> {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..n).map(|_| rng.gen_range(-a..a)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn draws_stay_inside_the_glorot_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let a = (6.0f64 / 30.0).sqrt();
        let w = glorot_uniform(&mut rng, 10, 20, 1000);
        assert_eq!(w.len(), 1000);
        assert!(w.iter().all(|v| v.abs() < a));
        // Both signs show up; the draw is not degenerate.
        assert!(w.iter().any(|&v| v > 0.0) && w.iter().any(|&v| v < 0.0));
    }

    #[test]
    fn same_seed_same_weights() {
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(
            glorot_uniform(&mut a, 3, 5, 64),
            glorot_uniform(&mut b, 3, 5, 64)
        );
    }
}
