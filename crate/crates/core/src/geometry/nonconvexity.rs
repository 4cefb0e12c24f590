use super::PointCloud;
use crate::error::{Error, Result};
use crate::sampling::{dirichlet_weights, seeded_rng};
use crate::scalar::Scalar;

/// Outcome of the sampled nonconvexity search.
#[derive(Debug, Clone, PartialEq)]
pub struct NonconvexityEstimate<T> {
    pub value: T,
    /// Hull point attaining `value`.
    pub witness: Vec<T>,
    /// Candidates that improved the running best and were refined.
    pub refinements: usize,
}

/// Lower estimate of `d_H(A, conv A) = sup_{y in conv A} min_{a in A} |y - a|`.
pub fn nonconvexity<T: Scalar>(a: &PointCloud<T>, budget: usize, seed: u64) -> Result<T> {
    Ok(nonconvexity_estimate(a, budget, seed)?.value)
}

/// Samples `budget` hull points, refining each candidate that beats the
/// running best by pairwise mass transfer in weight space.
///
/// The candidate stream is pairwise midpoints in index order followed by
/// Dirichlet(1,...,1) combinations drawn from `seed`. The cloud is
/// canonicalized first, so the result depends only on the point set. Since the
/// candidates for budget `b` are a prefix of those for `b + 1`, the estimate is
/// nondecreasing in `budget`.
pub fn nonconvexity_estimate<T: Scalar>(
    a: &PointCloud<T>,
    budget: usize,
    seed: u64,
) -> Result<NonconvexityEstimate<T>> {
    if budget < a.len() {
        return Err(Error::invalid(
            "budget",
            format!("budget {budget} is smaller than the cloud size {}", a.len()),
        ));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let cloud = a.canonical();
    let n = cloud.len();
    if n == 1 {
        return Ok(NonconvexityEstimate {
            value: T::zero(),
            witness: cloud.point(0).to_vec(),
            refinements: 0,
        });
    }

    let objective = Objective { cloud: &cloud };
    let mut rng = seeded_rng(seed);
    let mut pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));

    let mut best_sample = T::neg_infinity();
    let mut best = (T::zero(), cloud.point(0).to_vec());
    let mut refinements = 0;
    for _ in 0..budget {
        let weights: Vec<T> = match pairs.next() {
            Some((i, j)) => {
                let mut w = vec![T::zero(); n];
                w[i] = T::lit(0.5);
                w[j] = T::lit(0.5);
                w
            }
            None => dirichlet_weights(&mut rng, n).into_iter().map(T::lit).collect(),
        };
        let value = objective.eval(&weights);
        if value > best_sample {
            best_sample = value;
            refinements += 1;
            let (refined, w) = objective.refine(weights, value);
            if refined > best.0 {
                best = (refined, objective.point(&w));
            }
        }
    }
    Ok(NonconvexityEstimate {
        value: best.0,
        witness: best.1,
        refinements,
    })
}

struct Objective<'a, T> {
    cloud: &'a PointCloud<T>,
}

impl<T: Scalar> Objective<'_, T> {
    fn point(&self, w: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.cloud.dim()];
        for (p, &wi) in self.cloud.points().zip(w) {
            for (yk, &pk) in y.iter_mut().zip(p) {
                *yk = *yk + wi * pk;
            }
        }
        y
    }

    fn eval(&self, w: &[T]) -> T {
        self.cloud.distance_to(&self.point(w))
    }

    /// Coordinate ascent: move mass `step` from vertex j to vertex i whenever
    /// that increases the objective; halve the step when no move helps.
    fn refine(&self, mut w: Vec<T>, mut value: T) -> (T, Vec<T>) {
        let n = w.len();
        let mut step = T::lit(0.5);
        let floor = T::epsilon() * T::lit(64.0);
        let mut trial = w.clone();
        while step > floor {
            let mut improved = false;
            for i in 0..n {
                for j in 0..n {
                    if i == j || w[j] <= T::zero() {
                        continue;
                    }
                    let t = step.min(w[j]);
                    trial.copy_from_slice(&w);
                    trial[i] = trial[i] + t;
                    trial[j] = trial[j] - t;
                    let v = self.eval(&trial);
                    if v > value {
                        value = v;
                        w.copy_from_slice(&trial);
                        improved = true;
                    }
                }
            }
            if !improved {
                step = step * T::lit(0.5);
            }
        }
        (value, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::hausdorff_distance;
    use crate::sampling::seeded_rng;
    use rand::Rng;

    fn cloud(dim: usize, pts: &[&[f64]]) -> PointCloud<f64> {
        PointCloud::new(dim, pts.iter().copied()).unwrap()
    }

    /// Dense oracle for a 1-d cloud: scan [min, max] on a fine lattice.
    fn dense_1d(xs: &[f64], samples: usize) -> f64 {
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (0..=samples)
            .map(|i| lo + (hi - lo) * i as f64 / samples as f64)
            .map(|y| xs.iter().map(|x| (x - y).abs()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    }

    /// Dense barycentric lattice oracle for a 2-d cloud.
    fn dense_triangle(a: &PointCloud<f64>, m: usize) -> f64 {
        assert_eq!(a.len(), 3);
        let mut best: f64 = 0.0;
        for i in 0..=m {
            for j in 0..=(m - i) {
                let u = i as f64 / m as f64;
                let v = j as f64 / m as f64;
                let w = [1.0 - u - v, u, v];
                let mut y = [0.0; 2];
                for (k, p) in a.points().enumerate() {
                    y[0] += w[k] * p[0];
                    y[1] += w[k] * p[1];
                }
                best = best.max(a.distance_to(&y));
            }
        }
        best
    }

    #[test]
    fn singleton_is_convex() {
        let a = cloud(2, &[&[1.0, 2.0], &[1.0, 2.0]]);
        assert_eq!(nonconvexity(&a, 2, 0).unwrap(), 0.0);
    }

    #[test]
    fn two_points_on_a_line() {
        let xs = [0.0, 1.0];
        let oracle = dense_1d(&xs, 100_000);
        assert!((oracle - 0.5).abs() < 1e-9);
        let a = PointCloud::from_scalars(&xs).unwrap();
        let k = nonconvexity(&a, 10, 0).unwrap();
        assert!((k - 0.5).abs() < 1e-6);
        assert!(k <= 0.5 + 1e-15);
    }

    #[test]
    fn right_triangle() {
        let a = cloud(2, &[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let oracle = dense_triangle(&a, 1000);
        assert!((oracle - 0.5f64.sqrt()).abs() < 1e-3);
        let k = nonconvexity(&a, 10_000, 1).unwrap();
        assert!((k - 0.5f64.sqrt()).abs() < 1e-3, "{k}");
        assert!(k <= 0.5f64.sqrt() + 1e-12);
    }

    #[test]
    fn budget_below_size_rejected() {
        let a = cloud(1, &[&[0.0], &[1.0], &[2.0]]);
        assert!(nonconvexity(&a, 2, 0).is_err());
    }

    #[test]
    fn nondecreasing_in_budget() {
        let mut rng = seeded_rng(5);
        let coords: Vec<f64> = (0..14).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = PointCloud::from_flat(2, coords).unwrap();
        let mut prev = 0.0;
        for budget in [7, 10, 21, 30, 60, 200] {
            let k = nonconvexity(&a, budget, 9).unwrap();
            assert!(k >= prev);
            prev = k;
        }
    }

    #[test]
    fn matches_dense_oracle_on_random_1d_clouds() {
        let mut rng = seeded_rng(17);
        for _ in 0..30 {
            let n = rng.random_range(2..=8);
            let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let a = PointCloud::from_scalars(&xs).unwrap();
            let k = nonconvexity(&a, 200, 2).unwrap();
            // exact value: half the largest gap between sorted neighbours
            let mut s = xs.clone();
            s.sort_by(f64::total_cmp);
            let exact = s.windows(2).map(|w| (w[1] - w[0]) / 2.0).fold(0.0, f64::max);
            assert!((k - exact).abs() < 1e-9, "{k} vs {exact}");
            assert!((dense_1d(&xs, 200_000) - exact).abs() < 1e-5);
        }
    }

    #[test]
    fn two_lipschitz_in_hausdorff_distance() {
        let mut rng = seeded_rng(23);
        for _ in 0..40 {
            let n = rng.random_range(2..=6);
            let coords: Vec<f64> = (0..2 * n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let noise = rng.random_range(0.0..0.2);
            let moved: Vec<f64> = coords.iter().map(|c| c + noise * rng.random_range(-1.0..1.0)).collect();
            let a = PointCloud::from_flat(2, coords).unwrap();
            let b = PointCloud::from_flat(2, moved).unwrap();
            let ka = nonconvexity(&a, 2000, 4).unwrap();
            let kb = nonconvexity(&b, 2000, 4).unwrap();
            let dh = hausdorff_distance(&a, &b).unwrap();
            assert!((ka - kb).abs() <= 2.0 * dh + 1e-6, "{ka} {kb} {dh}");
        }
    }
}
