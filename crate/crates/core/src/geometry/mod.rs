//! Functionals on finite point clouds in Euclidean space: Hausdorff distance,
//! the k-center covering radius, distance to the convex hull and the sampled
//! measure of nonconvexity.

mod hull;
mod kcenter;
mod nonconvexity;

pub use hull::{hull_distance, hull_projection, HullProjection};
pub use kcenter::{greedy_centers, kcenter_radius, kcenter_radius_capped, KCenterMode, DEFAULT_EXHAUSTIVE_CAP};
pub use nonconvexity::{nonconvexity, nonconvexity_estimate, NonconvexityEstimate};

use crate::error::{Error, Result};
use crate::scalar::{euclidean, lex_cmp, Scalar};

/// A nonempty finite list of points in `R^dim`, stored flat and row-major.
///
/// Duplicates are allowed; every set-level functional in this module treats
/// the cloud as the set of its points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T> {
    dim: usize,
    coords: Vec<T>,
}

impl<T: Scalar> PointCloud<T> {
    pub fn new<P: AsRef<[T]>>(dim: usize, points: impl IntoIterator<Item = P>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be positive"));
        }
        let mut coords = Vec::new();
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords)
    }

    pub fn from_flat(dim: usize, coords: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be positive"));
        }
        if coords.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        Ok(PointCloud { dim, coords })
    }

    /// One-dimensional cloud from scalar values.
    pub fn from_scalars(values: &[T]) -> Result<Self> {
        Self::from_flat(1, values.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Always false: clouds are nonempty by construction.
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|x| x.is_finite())
    }

    pub fn scaled(&self, s: T) -> Self {
        PointCloud {
            dim: self.dim,
            coords: self.coords.iter().map(|&x| x * s).collect(),
        }
    }

    /// The same set with points sorted lexicographically and exact duplicates
    /// removed. Functionals computed on the canonical form are invariant under
    /// reordering and duplication.
    pub fn canonical(&self) -> Self {
        let mut pts: Vec<&[T]> = self.points().collect();
        pts.sort_by(|a, b| lex_cmp(a, b));
        pts.dedup();
        let mut coords = Vec::with_capacity(pts.len() * self.dim);
        for p in pts {
            coords.extend_from_slice(p);
        }
        PointCloud { dim: self.dim, coords }
    }

    /// Number of distinct points.
    pub fn distinct_len(&self) -> usize {
        self.canonical().len()
    }

    /// Distance from `p` to the nearest point of the cloud.
    pub fn distance_to(&self, p: &[T]) -> T {
        self.points().map(|q| euclidean(p, q)).fold(T::infinity(), T::min)
    }
}

fn check_same_dim<T: Scalar>(a: &PointCloud<T>, b: &PointCloud<T>) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    Ok(())
}

/// `max_{a in A} min_{b in B} |a - b|`.
pub fn directed_hausdorff<T: Scalar>(a: &PointCloud<T>, b: &PointCloud<T>) -> Result<T> {
    check_same_dim(a, b)?;
    Ok(a.points().map(|p| b.distance_to(p)).fold(T::zero(), T::max))
}

/// Symmetric Hausdorff distance between two clouds in the Euclidean norm.
pub fn hausdorff_distance<T: Scalar>(a: &PointCloud<T>, b: &PointCloud<T>) -> Result<T> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}
