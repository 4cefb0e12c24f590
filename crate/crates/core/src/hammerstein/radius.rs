use super::HammersteinProblem;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_SCAN: i32 = 60;
const MAX_BISECTIONS: usize = 400;

/// Root of the (K2) equation with the bracket it was found in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusSolution<T> {
    pub radius: T,
    /// `g(radius)`.
    pub residual: T,
    pub bracket: (T, T),
    /// `g` at the two bracket ends.
    pub g_bracket: (T, T),
    pub bisections: usize,
}

fn tolerance<T: Scalar>(r: T) -> T {
    T::lit(1e-10) * T::one().max(r)
}

/// Sign of `g(r)` with values inside the tolerance counted as zero.
fn sign<T: Scalar>(g: T, r: T) -> i8 {
    if g > tolerance(r) {
        1
    } else if g < -tolerance(r) {
        -1
    } else {
        0
    }
}

/// Solves `max_x int K(x, y) zeta(R) dy = R` for `R > 0`.
///
/// Powers of two `2^k` are visited outward from `R = 1` (`k = 0, 1, -1, 2,
/// -2, ...`, `|k| <= 60`) until one point with `g > tol` and one with
/// `g < -tol` have been seen; bisection inside that bracket then stops at
/// `|g(R)| <= 1e-10 max(1, R)`. A residual that stays within tolerance on the
/// whole scan (e.g. `zeta(R) = R` with unit Car4 constant) has no isolated
/// root and is reported as [`Error::NoRadiusInScanRange`].
pub fn solve_radius<T: Scalar>(problem: &HammersteinProblem<T>) -> Result<RadiusSolution<T>> {
    let g = |r: T| problem.radius_residual(r);
    let mut pos: Option<(T, T)> = None;
    let mut neg: Option<(T, T)> = None;
    'scan: for step in 0..=2 * MAX_SCAN {
        let k = if step % 2 == 1 { (step + 1) / 2 } else { -(step / 2) };
        let r = T::lit(2f64.powi(k));
        let v = g(r);
        if !v.is_finite() {
            continue;
        }
        match sign(v, r) {
            1 if pos.is_none() => pos = Some((r, v)),
            -1 if neg.is_none() => neg = Some((r, v)),
            _ => {}
        }
        if pos.is_some() && neg.is_some() {
            break 'scan;
        }
    }
    let (Some(p), Some(n)) = (pos, neg) else {
        return Err(Error::NoRadiusInScanRange);
    };
    let (lo, hi) = if p.0 < n.0 { (p, n) } else { (n, p) };

    let (mut a, mut b) = (lo, hi);
    let mut bisections = 0;
    let (radius, residual) = loop {
        let mid = (a.0 + b.0) * T::lit(0.5);
        let v = g(mid);
        bisections += 1;
        if sign(v, mid) == 0 || mid <= a.0 || mid >= b.0 || bisections >= MAX_BISECTIONS {
            break (mid, v);
        }
        if (v > T::zero()) == (a.1 > T::zero()) {
            a = (mid, v);
        } else {
            b = (mid, v);
        }
    };
    Ok(RadiusSolution {
        radius,
        residual,
        bracket: (lo.0, hi.0),
        g_bracket: (lo.1, hi.1),
        bisections,
    })
}
