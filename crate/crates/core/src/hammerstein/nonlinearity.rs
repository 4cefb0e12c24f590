use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Nonlinearities `N(z) >= 0` for `z >= 0`, each with a growth bound
/// `zeta >= N` that is nondecreasing in `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nonlinearity<T> {
    /// `slope * z + offset`
    Affine { slope: T, offset: T },
    /// `gain * z / (1 + z)`
    Saturating { gain: T },
    /// `gain * sqrt(z)`
    Sqrt { gain: T },
}

impl<T: Scalar> Nonlinearity<T> {
    /// Checks the parameters and spot-checks that `zeta` is nondecreasing on
    /// a geometric `z`-grid spanning `[0, 1e6]`.
    pub fn validate(&self) -> Result<()> {
        let params: &[(&'static str, T)] = match self {
            Nonlinearity::Affine { slope, offset } => &[("slope", *slope), ("offset", *offset)],
            Nonlinearity::Saturating { gain } | Nonlinearity::Sqrt { gain } => &[("gain", *gain)],
        };
        for &(name, v) in params {
            if !(v >= T::zero() && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be finite and nonnegative, got {v}")));
            }
        }
        let mut prev = self.growth(T::zero());
        for i in 0..=120 {
            let z = T::lit(1e-6 * 10f64.powf(i as f64 / 10.0));
            let next = self.growth(z);
            if next < prev {
                return Err(Error::invalid(
                    "nonlinearity",
                    format!("growth bound decreases near z = {z}"),
                ));
            }
            prev = next;
        }
        Ok(())
    }

    pub fn eval(&self, z: T) -> T {
        match *self {
            Nonlinearity::Affine { slope, offset } => slope * z + offset,
            Nonlinearity::Saturating { gain } => gain * z / (T::one() + z),
            Nonlinearity::Sqrt { gain } => gain * z.sqrt(),
        }
    }

    /// The growth bound `zeta(z)`; every built-in family is its own bound.
    pub fn growth(&self, z: T) -> T {
        self.eval(z)
    }

    /// Lipschitz constant in `z` on `[0, inf)`, where one exists.
    pub fn lipschitz(&self) -> Option<T> {
        match *self {
            Nonlinearity::Affine { slope, .. } => Some(slope),
            Nonlinearity::Saturating { gain } => Some(gain),
            Nonlinearity::Sqrt { .. } => None,
        }
    }
}
