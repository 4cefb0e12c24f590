use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Nondecreasing comparison function `phi: [0, inf) -> [0, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ComparisonFunction<T> {
    /// `phi(t) = slope * t` with `0 <= slope < 1`.
    Linear { slope: T },
    /// Piecewise-linear interpolation of `(t_i, v_i)`, constant beyond the
    /// last knot and linear from `(0, 0)` to the first one.
    Tabulated { knots: Vec<T>, values: Vec<T> },
}

impl<T: Scalar> ComparisonFunction<T> {
    pub fn linear(slope: T) -> Result<Self> {
        if !(slope >= T::zero() && slope < T::one()) {
            return Err(Error::invalid("slope", format!("must lie in [0, 1), got {slope}")));
        }
        Ok(ComparisonFunction::Linear { slope })
    }

    pub fn tabulated(knots: Vec<T>, values: Vec<T>) -> Result<Self> {
        if knots.is_empty() || knots.len() != values.len() {
            return Err(Error::invalid(
                "knots",
                "need equally many knots and values, at least one",
            ));
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if !(knots[0] > T::zero()) || knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("knots", "must be positive and strictly increasing"));
        }
        if !(values[0] >= T::zero()) || values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("values", "must be nonnegative and nondecreasing"));
        }
        Ok(ComparisonFunction::Tabulated { knots, values })
    }

    pub fn eval(&self, t: T) -> T {
        match self {
            ComparisonFunction::Linear { slope } => *slope * t,
            ComparisonFunction::Tabulated { knots, values } => {
                if t <= T::zero() {
                    return T::zero();
                }
                let upper = knots.partition_point(|&k| k < t);
                if upper == knots.len() {
                    return *values.last().unwrap();
                }
                let (k0, v0) = if upper == 0 {
                    (T::zero(), T::zero())
                } else {
                    (knots[upper - 1], values[upper - 1])
                };
                let (k1, v1) = (knots[upper], values[upper]);
                v0 + (v1 - v0) * (t - k0) / (k1 - k0)
            }
        }
    }

    /// `phi^(n)(t)`, the n-fold composition.
    pub fn iterate(&self, t: T, n: usize) -> T {
        (0..n).fold(t, |acc, _| self.eval(acc))
    }
}
