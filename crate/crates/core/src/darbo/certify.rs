use super::{ComparisonFunction, DarboTrace};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions<T> {
    /// Absolute slack added to every right-hand side.
    pub slack: T,
    /// Whether the nonconvexity comparison is reported without affecting the
    /// verdict; appropriate when the start ensemble was drawn from a convex
    /// set such as `B(0, R) ∩ cone`.
    pub kappa_informational: bool,
}

impl<T: Scalar> Default for CertifyOptions<T> {
    fn default() -> Self {
        CertifyOptions {
            slack: T::lit(1e-9),
            kappa_informational: true,
        }
    }
}

/// Comparison inequalities for the step `C_from -> C_{from + 1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCheck<T> {
    pub from: usize,
    /// `Omega(C_{n+1})` against `phi_D(Omega(C_n)) + slack`.
    pub omega_lhs: T,
    pub omega_rhs: T,
    pub omega_pass: bool,
    /// `kappa(C_{n+1})` against `phi_E(kappa(C_n)) + slack`.
    pub kappa_lhs: T,
    pub kappa_rhs: T,
    pub kappa_pass: bool,
}

/// `|kappa(C_n) - kappa(C_final)| <= 2 d_H + slack`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzCheck<T> {
    pub index: usize,
    pub lhs: T,
    pub rhs: T,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate<T> {
    pub steps: Vec<StepCheck<T>>,
    pub lipschitz: Vec<LipschitzCheck<T>>,
    pub slack: T,
    pub kappa_informational: bool,
}

impl<T: Scalar> Certificate<T> {
    pub fn omega_violations(&self) -> usize {
        self.steps.iter().filter(|s| !s.omega_pass).count()
    }

    pub fn kappa_violations(&self) -> usize {
        self.steps.iter().filter(|s| !s.kappa_pass).count()
    }

    pub fn lipschitz_violations(&self) -> usize {
        self.lipschitz.iter().filter(|c| !c.pass).count()
    }

    /// Iteration index of the first step violating the Omega comparison.
    pub fn first_omega_violation(&self) -> Option<usize> {
        self.steps.iter().find(|s| !s.omega_pass).map(|s| s.from)
    }

    pub fn passed(&self) -> bool {
        self.omega_violations() == 0
            && self.lipschitz_violations() == 0
            && (self.kappa_informational || self.kappa_violations() == 0)
    }
}

/// Checks every consecutive pair of the trace against `phi_d` (on Omega) and
/// `phi_e` (on kappa), and every record against the Lipschitz bound of the
/// nonconvexity under Hausdorff perturbation.
pub fn certify<T: Scalar>(
    trace: &DarboTrace<T>,
    phi_d: &ComparisonFunction<T>,
    phi_e: &ComparisonFunction<T>,
    options: &CertifyOptions<T>,
) -> Result<Certificate<T>> {
    if trace.len() < 2 {
        return Err(Error::invalid("trace", "need at least two iterations"));
    }
    let slack = options.slack;
    if !(slack >= T::zero()) {
        return Err(Error::invalid("slack", "must be nonnegative"));
    }
    let steps = trace
        .records
        .windows(2)
        .map(|w| {
            let omega_rhs = phi_d.eval(w[0].omega_total) + slack;
            let kappa_rhs = phi_e.eval(w[0].kappa) + slack;
            StepCheck {
                from: w[0].index,
                omega_lhs: w[1].omega_total,
                omega_rhs,
                omega_pass: w[1].omega_total <= omega_rhs,
                kappa_lhs: w[1].kappa,
                kappa_rhs,
                kappa_pass: w[1].kappa <= kappa_rhs,
            }
        })
        .collect();
    let final_kappa = trace.records.last().unwrap().kappa;
    let lipschitz = trace
        .records
        .iter()
        .map(|r| {
            let lhs = (r.kappa - final_kappa).abs();
            let rhs = T::lit(2.0) * r.hausdorff_to_final + slack;
            LipschitzCheck {
                index: r.index,
                lhs,
                rhs,
                pass: lhs <= rhs,
            }
        })
        .collect();
    Ok(Certificate {
        steps,
        lipschitz,
        slack,
        kappa_informational: options.kappa_informational,
    })
}
