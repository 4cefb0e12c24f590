use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Outer factor `a(x)` of a separable kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OuterFactor<T> {
    Constant,
    /// `exp(-rate |x|^2)`
    Gaussian {
        rate: T,
    },
    /// `max(x_1, 0)`, which takes the value 0 on half the domain.
    PositivePart,
}

/// Profile `b(y)` of a separable kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerProfile<T> {
    /// Indicator of the box `[lo, hi]^dim`, taking the value 1/2 at the
    /// faces so that the trapezoidal rule integrates it exactly when the
    /// faces fall on grid nodes.
    Indicator { lo: T, hi: T },
    /// `exp(-rate |y|^2)`
    Gaussian { rate: T },
}

/// Nonnegative continuous kernels `K(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel<T> {
    /// `amplitude * exp(-rate |x - y|^2)`
    Gaussian { amplitude: T, rate: T },
    /// `amplitude * exp(-rate |x - y|_1)`
    Laplace { amplitude: T, rate: T },
    /// `amplitude * a(x) * b(y)`
    Separable {
        amplitude: T,
        outer: OuterFactor<T>,
        inner: InnerProfile<T>,
    },
}

fn nonneg<T: Scalar>(name: &'static str, v: T) -> Result<()> {
    if v >= T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and nonnegative, got {v}")))
    }
}

impl<T: Scalar> Kernel<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Gaussian { amplitude, rate } | Kernel::Laplace { amplitude, rate } => {
                nonneg("amplitude", amplitude)?;
                nonneg("rate", rate)
            }
            Kernel::Separable {
                amplitude,
                outer,
                inner,
            } => {
                nonneg("amplitude", amplitude)?;
                if let OuterFactor::Gaussian { rate } = outer {
                    nonneg("outer.rate", rate)?;
                }
                match inner {
                    InnerProfile::Gaussian { rate } => nonneg("inner.rate", rate),
                    InnerProfile::Indicator { lo, hi } => {
                        if lo.is_finite() && hi.is_finite() && lo < hi {
                            Ok(())
                        } else {
                            Err(Error::invalid("inner", "indicator needs finite lo < hi"))
                        }
                    }
                }
            }
        }
    }

    pub fn eval(&self, x: &[T], y: &[T]) -> T {
        match *self {
            Kernel::Gaussian { amplitude, rate } => {
                let d2: T = x.iter().zip(y).map(|(&a, &b)| (a - b) * (a - b)).sum();
                amplitude * (-rate * d2).exp()
            }
            Kernel::Laplace { amplitude, rate } => {
                let d1: T = x.iter().zip(y).map(|(&a, &b)| (a - b).abs()).sum();
                amplitude * (-rate * d1).exp()
            }
            Kernel::Separable {
                amplitude,
                outer,
                inner,
            } => amplitude * outer.eval(x) * inner.eval(y),
        }
    }

    /// The same kernel multiplied by `s >= 0`.
    pub fn scaled(&self, s: T) -> Self {
        match *self {
            Kernel::Gaussian { amplitude, rate } => Kernel::Gaussian {
                amplitude: amplitude * s,
                rate,
            },
            Kernel::Laplace { amplitude, rate } => Kernel::Laplace {
                amplitude: amplitude * s,
                rate,
            },
            Kernel::Separable {
                amplitude,
                outer,
                inner,
            } => Kernel::Separable {
                amplitude: amplitude * s,
                outer,
                inner,
            },
        }
    }
}

impl<T: Scalar> OuterFactor<T> {
    pub fn eval(&self, x: &[T]) -> T {
        match *self {
            OuterFactor::Constant => T::one(),
            OuterFactor::Gaussian { rate } => {
                let r2: T = x.iter().map(|&v| v * v).sum();
                (-rate * r2).exp()
            }
            OuterFactor::PositivePart => x[0].max(T::zero()),
        }
    }
}

impl<T: Scalar> InnerProfile<T> {
    pub fn eval(&self, y: &[T]) -> T {
        match *self {
            InnerProfile::Gaussian { rate } => {
                let r2: T = y.iter().map(|&v| v * v).sum();
                (-rate * r2).exp()
            }
            InnerProfile::Indicator { lo, hi } => {
                let tol = T::lit(1e-12) * T::one().max(lo.abs()).max(hi.abs());
                y.iter()
                    .map(|&v| {
                        if (v - lo).abs() <= tol || (v - hi).abs() <= tol {
                            T::lit(0.5)
                        } else if v > lo && v < hi {
                            T::one()
                        } else {
                            T::zero()
                        }
                    })
                    .fold(T::one(), |acc, p| acc * p)
            }
        }
    }
}
