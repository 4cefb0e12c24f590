use itertools::Itertools;

use super::PointCloud;
use crate::error::{Error, Result};
use crate::scalar::{euclidean, Scalar};

/// Largest cloud the exhaustive search accepts unless a cap is given.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KCenterMode {
    /// Minimum over all center subsets of the cloud; exact for the
    /// center-restricted problem.
    Exhaustive,
    /// Farthest-point traversal seeded at point 0; within a factor 2 of the
    /// exhaustive value.
    Greedy,
}

/// Covering radius of `a` by `k` balls centred at points of `a`.
pub fn kcenter_radius<T: Scalar>(a: &PointCloud<T>, k: usize, mode: KCenterMode) -> Result<T> {
    kcenter_radius_capped(a, k, mode, DEFAULT_EXHAUSTIVE_CAP)
}

pub fn kcenter_radius_capped<T: Scalar>(a: &PointCloud<T>, k: usize, mode: KCenterMode, cap: usize) -> Result<T> {
    if k == 0 {
        return Err(Error::invalid("k", "center budget must be at least 1"));
    }
    let n = a.len();
    if k >= n {
        return Ok(T::zero());
    }
    match mode {
        KCenterMode::Greedy => {
            let centers = greedy_centers(a, k);
            Ok(covering_radius(a, &centers))
        }
        KCenterMode::Exhaustive => {
            if n > cap {
                return Err(Error::ExhaustiveCapExceeded { size: n, cap });
            }
            Ok(exhaustive(a, k))
        }
    }
}

/// Farthest-point traversal: start at point 0, repeatedly add the point
/// farthest from the chosen centers (lowest index on ties), stopping early
/// once every point is covered at radius zero.
pub fn greedy_centers<T: Scalar>(a: &PointCloud<T>, k: usize) -> Vec<usize> {
    let n = a.len();
    let mut centers = vec![0];
    let mut nearest: Vec<T> = a.points().map(|p| euclidean(p, a.point(0))).collect();
    while centers.len() < k.min(n) {
        let mut far = 0;
        for i in 1..n {
            if nearest[i] > nearest[far] {
                far = i;
            }
        }
        if nearest[far] == T::zero() {
            break;
        }
        centers.push(far);
        let c = a.point(far);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(euclidean(a.point(i), c));
        }
    }
    centers
}

fn covering_radius<T: Scalar>(a: &PointCloud<T>, centers: &[usize]) -> T {
    a.points()
        .map(|p| {
            centers
                .iter()
                .map(|&c| euclidean(p, a.point(c)))
                .fold(T::infinity(), T::min)
        })
        .fold(T::zero(), T::max)
}

fn exhaustive<T: Scalar>(a: &PointCloud<T>, k: usize) -> T {
    let n = a.len();
    let dist: Vec<T> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| euclidean(a.point(i), a.point(j)))
        .collect();
    let mut best = T::infinity();
    for centers in (0..n).combinations(k) {
        let mut worst = T::zero();
        for i in 0..n {
            let row = &dist[i * n..(i + 1) * n];
            let d = centers.iter().map(|&c| row[c]).fold(T::infinity(), T::min);
            worst = worst.max(d);
            if worst >= best {
                break;
            }
        }
        best = best.min(worst);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::seeded_rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn line(xs: &[f64]) -> PointCloud<f64> {
        PointCloud::from_scalars(xs).unwrap()
    }

    /// Independent oracle: bitmask enumeration of every center set of size
    /// min(k, n).
    fn oracle(a: &PointCloud<f64>, k: usize) -> f64 {
        let n = a.len();
        let size = k.min(n);
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != size {
                continue;
            }
            let mut worst: f64 = 0.0;
            for i in 0..n {
                let mut near = f64::INFINITY;
                for c in 0..n {
                    if mask & (1 << c) != 0 {
                        near = near.min(euclidean(a.point(i), a.point(c)));
                    }
                }
                worst = worst.max(near);
            }
            best = best.min(worst);
        }
        best
    }

    #[test]
    fn k_equal_to_size_gives_zero() {
        let a = line(&[0.0, 4.0, 9.0]);
        assert_eq!(kcenter_radius(&a, 3, KCenterMode::Exhaustive).unwrap(), 0.0);
        assert_eq!(kcenter_radius(&a, 3, KCenterMode::Greedy).unwrap(), 0.0);
    }

    #[test]
    fn four_points_two_centers() {
        let a = line(&[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(oracle(&a, 2), 1.0);
        assert_eq!(kcenter_radius(&a, 2, KCenterMode::Exhaustive).unwrap(), 1.0);
        let g = kcenter_radius(&a, 2, KCenterMode::Greedy).unwrap();
        assert!((1.0..=2.0).contains(&g));
        assert_eq!(greedy_centers(&a, 2), vec![0, 3]);
    }

    #[test]
    fn duplicates_count_once() {
        let a = line(&[1.0, 1.0, 1.0, 5.0, 5.0]);
        assert_eq!(kcenter_radius(&a, 2, KCenterMode::Exhaustive).unwrap(), 0.0);
        assert_eq!(kcenter_radius(&a, 2, KCenterMode::Greedy).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        let a = line(&[0.0, 1.0]);
        assert!(kcenter_radius(&a, 0, KCenterMode::Greedy).is_err());
        let big = line(&(0..20).map(f64::from).collect::<Vec<_>>());
        assert_eq!(
            kcenter_radius(&big, 3, KCenterMode::Exhaustive),
            Err(Error::ExhaustiveCapExceeded { size: 20, cap: 14 })
        );
        assert!(kcenter_radius(&big, 3, KCenterMode::Greedy).is_ok());
    }

    #[test]
    fn greedy_within_factor_two_of_exhaustive() {
        let mut rng = seeded_rng(11);
        for _ in 0..200 {
            let dim = rng.random_range(1..=3);
            let n = rng.random_range(1..=12);
            let coords: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let a = PointCloud::from_flat(dim, coords).unwrap();
            let k = rng.random_range(1..=n);
            let ex = kcenter_radius(&a, k, KCenterMode::Exhaustive).unwrap();
            let gr = kcenter_radius(&a, k, KCenterMode::Greedy).unwrap();
            assert_eq!(ex, oracle(&a, k));
            assert!(gr >= ex && gr <= 2.0 * ex + 1e-12, "greedy {gr} exhaustive {ex}");
        }
    }

    fn arb_cloud() -> impl Strategy<Value = PointCloud<f64>> {
        (1usize..=3).prop_flat_map(|dim| {
            prop::collection::vec(-3.0..3.0f64, dim..=dim * 9).prop_map(move |mut v| {
                v.truncate(v.len() / dim * dim);
                PointCloud::from_flat(dim, v).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn nonincreasing_in_k(a in arb_cloud()) {
            let mut prev = f64::INFINITY;
            for k in 1..=a.len() {
                let r = kcenter_radius(&a, k, KCenterMode::Exhaustive).unwrap();
                prop_assert!(r <= prev);
                prev = r;
            }
        }

        #[test]
        fn permutation_and_duplication_invariant(a in arb_cloud(), k in 1usize..4, rot in 0usize..9) {
            let n = a.len();
            let dim = a.dim();
            let mut coords = Vec::new();
            for i in 0..n {
                coords.extend_from_slice(a.point((i + rot) % n));
            }
            coords.extend_from_slice(a.point(rot % n));
            let b = PointCloud::from_flat(dim, coords).unwrap();
            prop_assert_eq!(
                kcenter_radius(&a, k, KCenterMode::Exhaustive).unwrap(),
                kcenter_radius(&b, k, KCenterMode::Exhaustive).unwrap()
            );
        }

        #[test]
        fn scales_linearly(a in arb_cloud(), k in 1usize..4, s in 0.01..50.0f64) {
            let r = kcenter_radius(&a, k, KCenterMode::Exhaustive).unwrap();
            let rs = kcenter_radius(&a.scaled(s), k, KCenterMode::Exhaustive).unwrap();
            prop_assert!((rs - s * r).abs() <= 1e-12 * (1.0 + s * r));
        }
    }
}
