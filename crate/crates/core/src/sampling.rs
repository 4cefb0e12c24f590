//! Seeded randomness shared by the sampling estimators and generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for sub-task `index` of a seeded job.
pub fn substream(seed: u64, index: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

/// Uniform weights on the probability simplex, i.e. Dirichlet(1, ..., 1),
/// drawn as normalized unit exponentials.
pub fn dirichlet_weights<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        w.iter_mut().for_each(|x| *x /= total);
    } else {
        w.iter_mut().for_each(|x| *x = 1.0 / n as f64);
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_on_simplex_and_reproducible() {
        let a = dirichlet_weights(&mut seeded_rng(7), 5);
        let b = dirichlet_weights(&mut seeded_rng(7), 5);
        assert_eq!(a, b);
        assert!(a.iter().all(|&w| w >= 0.0));
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn substreams_differ() {
        let x: u64 = substream(1, 0).random();
        let y: u64 = substream(1, 1).random();
        assert_ne!(x, y);
    }
}
