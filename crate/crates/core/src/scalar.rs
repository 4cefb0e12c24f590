//! The floating-point abstraction every estimator is written against.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar usable by the estimators: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only if the value is not representable,
    /// which cannot happen for finite literals in `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    /// Absolute tolerance the iterative geometry routines aim for.
    /// `1e-9` in double precision, relaxed to a few ulps in single precision.
    fn solver_tolerance() -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn solver_tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    #[inline]
    fn solver_tolerance() -> Self {
        1e-5
    }
}

/// Euclidean norm of `a - b`.
#[inline]
pub fn euclidean<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt()
}

/// Euclidean norm of `a`.
#[inline]
pub fn norm<T: Scalar>(a: &[T]) -> T {
    a.iter().map(|&x| x * x).sum::<T>().sqrt()
}

#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Lexicographic total order on coordinate slices, used to canonicalize clouds.
pub(crate) fn lex_cmp<T: Scalar>(a: &[T], b: &[T]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    std::cmp::Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_matches_pythagoras() {
        assert_eq!(euclidean(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
        assert_eq!(euclidean(&[1.0f32], &[-2.0]), 3.0);
    }

    #[test]
    fn lit_roundtrips() {
        assert_eq!(f64::lit(0.25), 0.25);
        assert_eq!(f32::lit(0.25), 0.25f32);
    }
}
