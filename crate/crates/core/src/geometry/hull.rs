use super::PointCloud;
use crate::error::{Error, Result};
use crate::scalar::{dot, norm, Scalar};

/// Nearest point of `conv(A)` to a query point.
#[derive(Debug, Clone, PartialEq)]
pub struct HullProjection<T> {
    /// Convex weights over the cloud's points, in cloud order.
    pub weights: Vec<T>,
    pub point: Vec<T>,
    pub distance: T,
    /// Certified upper bound on `distance - true distance`.
    pub error_bound: T,
}

/// Distance from `p` to the convex hull of `a`, certified to the scalar's
/// solver tolerance (1e-9 for `f64`).
pub fn hull_distance<T: Scalar>(p: &[T], a: &PointCloud<T>) -> Result<T> {
    Ok(hull_projection(p, a, T::solver_tolerance())?.distance)
}

/// Wolfe's minimum-norm-point iteration on the translated cloud `a_i - p`.
///
/// Each major step adds the vertex minimizing `<x, a_i - p>`; the minor loop
/// keeps the corral's affine minimizer inside the simplex. The stopping rule
/// is the duality gap `g = |x|^2 - min_i <x, a_i - p>`, which bounds the
/// excess distance by `g / |x|`.
pub fn hull_projection<T: Scalar>(p: &[T], a: &PointCloud<T>, tol: T) -> Result<HullProjection<T>> {
    let dim = a.dim();
    if p.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: p.len(),
        });
    }
    if !a.is_finite() || p.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    if !(tol > T::zero()) {
        return Err(Error::invalid("tol", "must be positive"));
    }

    let n = a.len();
    let shifted: Vec<Vec<T>> = a
        .points()
        .map(|q| q.iter().zip(p).map(|(&qi, &pi)| qi - pi).collect())
        .collect();

    let first = (0..n)
        .min_by(|&i, &j| norm(&shifted[i]).partial_cmp(&norm(&shifted[j])).unwrap())
        .unwrap_or(0);
    let mut corral = vec![first];
    let mut weights = vec![T::one()];
    let mut x = shifted[first].clone();
    let mut bound = T::infinity();

    let max_major = 100 + 20 * n;
    for _ in 0..max_major {
        let xx = dot(&x, &x);
        let xn = xx.sqrt();
        if xn <= tol {
            bound = xn;
            break;
        }
        let (j, xq) = (0..n)
            .map(|i| (i, dot(&x, &shifted[i])))
            .fold((0, T::infinity()), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
        let gap = (xx - xq).max(T::zero());
        bound = gap / xn;
        if bound <= tol || corral.contains(&j) {
            break;
        }
        corral.push(j);
        weights.push(T::zero());

        loop {
            let Some(v) = affine_minimizer(&corral, &shifted) else {
                // affinely dependent corral: drop the newcomer and stop
                corral.pop();
                weights.pop();
                break;
            };
            if v.iter().all(|&vi| vi > T::zero()) {
                weights = v;
                break;
            }
            let mut theta = T::one();
            for (&wi, &vi) in weights.iter().zip(&v) {
                if vi <= T::zero() {
                    let t = wi / (wi - vi);
                    if t < theta {
                        theta = t;
                    }
                }
            }
            for (wi, &vi) in weights.iter_mut().zip(&v) {
                *wi = (T::one() - theta) * *wi + theta * vi;
            }
            let eps = T::epsilon();
            let keep: Vec<bool> = weights.iter().map(|&w| w > eps).collect();
            if keep.iter().all(|&k| k) {
                // force out the limiting vertex to guarantee progress
                let worst = (0..weights.len())
                    .min_by(|&i, &k| weights[i].partial_cmp(&weights[k]).unwrap())
                    .unwrap();
                corral.remove(worst);
                weights.remove(worst);
            } else {
                let mut idx = 0;
                corral.retain(|_| {
                    idx += 1;
                    keep[idx - 1]
                });
                weights.retain(|&w| w > eps);
            }
            let total: T = weights.iter().copied().sum();
            weights.iter_mut().for_each(|w| *w = *w / total);
            if corral.len() == 1 {
                break;
            }
        }
        x = combine(&corral, &weights, &shifted, dim);
    }

    let distance = norm(&x);
    let mut full = vec![T::zero(); n];
    for (&c, &w) in corral.iter().zip(&weights) {
        full[c] = full[c] + w;
    }
    let point = x.iter().zip(p).map(|(&xi, &pi)| xi + pi).collect();
    Ok(HullProjection {
        weights: full,
        point,
        distance,
        error_bound: bound.min(distance),
    })
}

fn combine<T: Scalar>(corral: &[usize], w: &[T], pts: &[Vec<T>], dim: usize) -> Vec<T> {
    let mut x = vec![T::zero(); dim];
    for (&c, &wc) in corral.iter().zip(w) {
        for (xi, &qi) in x.iter_mut().zip(&pts[c]) {
            *xi = *xi + wc * qi;
        }
    }
    x
}

/// Weights `v` with `sum v = 1` minimizing `|sum v_i q_i|` over the corral,
/// or `None` when the corral is affinely dependent.
fn affine_minimizer<T: Scalar>(corral: &[usize], pts: &[Vec<T>]) -> Option<Vec<T>> {
    let m = corral.len();
    if m == 1 {
        return Some(vec![T::one()]);
    }
    // x = q0 + sum_{i>=1} t_i (q_i - q0); normal equations D^T D t = -D^T q0
    let q0 = &pts[corral[0]];
    let diffs: Vec<Vec<T>> = corral[1..]
        .iter()
        .map(|&c| pts[c].iter().zip(q0).map(|(&a, &b)| a - b).collect())
        .collect();
    let k = m - 1;
    let mut mat = vec![T::zero(); k * (k + 1)];
    let mut scale = T::zero();
    for i in 0..k {
        for j in 0..k {
            let g = dot(&diffs[i], &diffs[j]);
            mat[i * (k + 1) + j] = g;
            scale = scale.max(g.abs());
        }
        mat[i * (k + 1) + k] = -dot(&diffs[i], q0);
    }
    let t = solve_augmented(&mut mat, k, scale)?;
    let mut v = Vec::with_capacity(m);
    v.push(T::one() - t.iter().copied().sum::<T>());
    v.extend(t);
    Some(v)
}

/// Gaussian elimination with partial pivoting on a `k x (k+1)` augmented matrix.
fn solve_augmented<T: Scalar>(mat: &mut [T], k: usize, scale: T) -> Option<Vec<T>> {
    let w = k + 1;
    let tiny = scale * T::epsilon() * T::lit(1e3);
    for col in 0..k {
        let piv = (col..k).max_by(|&a, &b| mat[a * w + col].abs().partial_cmp(&mat[b * w + col].abs()).unwrap())?;
        if mat[piv * w + col].abs() <= tiny {
            return None;
        }
        if piv != col {
            for c in 0..w {
                mat.swap(piv * w + c, col * w + c);
            }
        }
        for r in col + 1..k {
            let f = mat[r * w + col] / mat[col * w + col];
            for c in col..w {
                mat[r * w + c] = mat[r * w + c] - f * mat[col * w + c];
            }
        }
    }
    let mut t = vec![T::zero(); k];
    for r in (0..k).rev() {
        let mut s = mat[r * w + k];
        for c in r + 1..k {
            s = s - mat[r * w + c] * t[c];
        }
        t[r] = s / mat[r * w + r];
    }
    Some(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::seeded_rng;
    use rand::Rng;

    fn cloud(dim: usize, pts: &[&[f64]]) -> PointCloud<f64> {
        PointCloud::new(dim, pts.iter().copied()).unwrap()
    }

    #[test]
    fn vertex_and_interior_points_are_at_zero() {
        let a = cloud(1, &[&[0.0], &[1.0]]);
        assert_eq!(hull_distance(&[1.0], &a).unwrap(), 0.0);
        assert!(hull_distance(&[0.5], &a).unwrap() <= 1e-9);
        assert!((hull_distance(&[3.0], &a).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn point_beyond_hypotenuse() {
        let tri = cloud(2, &[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        // dense lambda-grid oracle over the triangle
        let mut best = f64::INFINITY;
        let m = 2000;
        for i in 0..=m {
            for j in 0..=(m - i) {
                let (u, v) = (i as f64 / m as f64, j as f64 / m as f64);
                best = best.min(((1.0 - u) * (1.0 - u) + (1.0 - v) * (1.0 - v)).sqrt());
            }
        }
        let d = hull_distance(&[1.0, 1.0], &tri).unwrap();
        assert!((best - 0.5f64.sqrt()).abs() < 1e-6);
        assert!((d - 0.5f64.sqrt()).abs() < 1e-9, "{d}");
        let proj = hull_projection(&[1.0, 1.0], &tri, 1e-9).unwrap();
        assert!((proj.point[0] - 0.5).abs() < 1e-9 && (proj.point[1] - 0.5).abs() < 1e-9);
        assert!((proj.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        let a = cloud(1, &[&[0.0], &[1.0]]);
        assert_eq!(hull_distance(&[f64::NAN], &a), Err(Error::NonFinite));
        assert!(hull_distance(&[0.0, 0.0], &a).is_err());
    }

    #[test]
    fn interior_of_tetrahedron() {
        let a = cloud(
            3,
            &[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]],
        );
        assert!(hull_distance(&[0.2, 0.2, 0.2], &a).unwrap() <= 1e-9);
        let d = hull_distance(&[1.0, 1.0, 1.0], &a).unwrap();
        // projection onto x+y+z=1 lands at the face centroid
        assert!((d - (2.0 / 3.0f64.sqrt())).abs() < 1e-9);
    }

    #[test]
    fn weights_reconstruct_point() {
        let mut rng = seeded_rng(3);
        for _ in 0..50 {
            let dim = rng.random_range(1..=4);
            let n = rng.random_range(1..=10);
            let coords: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let a = PointCloud::from_flat(dim, coords).unwrap();
            let p: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
            let proj = hull_projection(&p, &a, 1e-10).unwrap();
            let mut y = vec![0.0; dim];
            for (i, w) in proj.weights.iter().enumerate() {
                assert!(*w >= 0.0);
                for (yk, ak) in y.iter_mut().zip(a.point(i)) {
                    *yk += w * ak;
                }
            }
            for (yk, pk) in y.iter().zip(&proj.point) {
                assert!((yk - pk).abs() < 1e-9);
            }
        }
    }
}
