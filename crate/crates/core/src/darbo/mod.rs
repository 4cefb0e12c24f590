//! Fixed-point engine: Picard iteration on single functions and iteration of
//! whole ensembles `C_{n+1} = H(C_n)`, recording the quasimeasure and the
//! nonconvexity of the iterates so that the comparison inequalities can be
//! certified step by step.

mod certify;
mod comparison;

pub use certify::{certify, Certificate, CertifyOptions, LipschitzCheck, StepCheck};
pub use comparison::ComparisonFunction;

use crate::ensemble::{sup_distance, FunctionEnsemble, SampledFunction};
use crate::error::{Error, Result};
use crate::geometry::{hausdorff_distance, nonconvexity};
use crate::hammerstein::HammersteinProblem;
use crate::noncompactness::{quasimeasure, QuasimeasureParams};
use crate::scalar::Scalar;

const DIVERGENCE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct PicardResult<T> {
    pub f_star: SampledFunction<T>,
    /// `residuals[n] = |f_{n+1} - f_n|_sup`.
    pub residuals: Vec<T>,
    pub converged: bool,
    /// `|H f_star - f_star|_sup`, evaluated once more at exit.
    pub final_residual: T,
    /// A-posteriori bound on `final_residual`: `tol (1 + q) / (1 - q)` when
    /// the problem declares a Lipschitz constant `q < 1`, otherwise the last
    /// recorded residual.
    pub bound: T,
    /// `lipschitz(N) * car4` when the nonlinearity has a Lipschitz constant.
    pub declared_q: Option<T>,
}

impl<T> PicardResult<T> {
    pub fn iterations(&self) -> usize {
        self.residuals.len()
    }
}

/// Iterates `f_{n+1} = H f_n` until `|f_{n+1} - f_n| <= tol` or `max_iter`
/// steps.
pub fn picard_solve<T: Scalar>(
    problem: &HammersteinProblem<T>,
    f0: &SampledFunction<T>,
    tol: T,
    max_iter: usize,
) -> Result<PicardResult<T>> {
    picard_solve_with(problem, f0, tol, max_iter, |_, _, _| {})
}

/// [`picard_solve`] calling `observer(n, f_n, residual)` after each step,
/// with `f_n` the new iterate.
pub fn picard_solve_with<T, O>(
    problem: &HammersteinProblem<T>,
    f0: &SampledFunction<T>,
    tol: T,
    max_iter: usize,
    mut observer: O,
) -> Result<PicardResult<T>>
where
    T: Scalar,
    O: FnMut(usize, &SampledFunction<T>, T),
{
    if !(tol > T::zero()) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter", "must be at least 1"));
    }
    let mut f = f0.clone();
    let mut residuals = Vec::new();
    let mut converged = false;
    for n in 1..=max_iter {
        let next = problem.apply(&f)?;
        let r = sup_distance(&next, &f)?;
        if !(r.as_f64() <= DIVERGENCE_LIMIT) {
            return Err(Error::Diverged {
                iteration: n,
                residual: r.as_f64(),
            });
        }
        residuals.push(r);
        observer(n, &next, r);
        f = next;
        if r <= tol {
            converged = true;
            break;
        }
    }
    let final_residual = sup_distance(&problem.apply(&f)?, &f)?;
    let declared_q = problem.nonlinearity().lipschitz().map(|l| l * problem.car4_norm());
    let bound = match declared_q {
        Some(q) if converged && q < T::one() => tol * (T::one() + q) / (T::one() - q),
        _ => *residuals.last().unwrap(),
    };
    Ok(PicardResult {
        f_star: f,
        residuals,
        converged,
        final_residual,
        bound,
        declared_q,
    })
}

/// One iterate `C_n` of the ensemble iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct DarboRecord<T> {
    /// 1-based iteration index.
    pub index: usize,
    pub eta: T,
    pub omega0: T,
    pub chi0: T,
    pub omega_total: T,
    /// Largest sampled nonconvexity over the probe-node value clouds.
    pub kappa: T,
    /// `|H f - f|_sup` for member 0.
    pub residual: T,
    /// Largest Hausdorff distance between this iterate's probe clouds and
    /// the final iterate's.
    pub hausdorff_to_final: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DarboTrace<T> {
    pub records: Vec<DarboRecord<T>>,
    pub probe_nodes: Vec<usize>,
    pub final_ensemble: FunctionEnsemble<T>,
}

impl<T: Scalar> DarboTrace<T> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Largest observed ratio `Omega(C_{n+1}) / Omega(C_n)` over steps with
    /// `Omega(C_n) > 0`.
    pub fn measured_contraction(&self) -> Option<T> {
        self.records
            .windows(2)
            .filter(|w| w[0].omega_total > T::zero())
            .map(|w| w[1].omega_total / w[0].omega_total)
            .reduce(T::max)
    }
}

/// Failure inside [`ensemble_iterate`], carrying the records completed so far.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("ensemble iteration aborted after {} records: {error}", partial.as_ref().map_or(0, |t| t.len()))]
pub struct IterationAborted<T: Scalar> {
    pub error: Error,
    pub partial: Option<DarboTrace<T>>,
}

/// Settings of [`ensemble_iterate`] beyond the operator and the start.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleIteration<T> {
    pub iters: usize,
    pub params: QuasimeasureParams<T>,
    pub probe_nodes: Vec<usize>,
    pub kappa_budget: usize,
    pub seed: u64,
}

/// Runs `C_{n+1} = H(C_n)` member-wise for `iters` iterates starting at
/// `c1`, recording the quasimeasure, the probe-node nonconvexity, the
/// member-0 residual and, once the run ends, the distance of every iterate
/// to the last one.
pub fn ensemble_iterate<T: Scalar>(
    problem: &HammersteinProblem<T>,
    c1: &FunctionEnsemble<T>,
    setup: &EnsembleIteration<T>,
) -> std::result::Result<DarboTrace<T>, IterationAborted<T>> {
    let fail = |error| IterationAborted { error, partial: None };
    if setup.iters == 0 {
        return Err(fail(Error::invalid("iters", "must be at least 1")));
    }
    if setup.probe_nodes.is_empty() {
        return Err(fail(Error::invalid("probe_nodes", "need at least one probe node")));
    }
    if let Some(&p) = setup.probe_nodes.iter().find(|&&p| p >= problem.grid().len()) {
        return Err(fail(Error::invalid("probe_nodes", format!("node {p} out of range"))));
    }
    if setup.kappa_budget == 0 {
        return Err(fail(Error::invalid("kappa_budget", "must be positive")));
    }
    let budget = setup.kappa_budget.max(c1.len());

    let mut records: Vec<DarboRecord<T>> = Vec::new();
    let mut clouds = Vec::new();
    let mut current = c1.clone();
    let mut last = c1.clone();
    let mut error = None;
    for index in 1..=setup.iters {
        let step = || -> Result<(DarboRecord<T>, FunctionEnsemble<T>)> {
            let report = quasimeasure(&current, &setup.params)?;
            let mut kappa = T::zero();
            for &p in &setup.probe_nodes {
                kappa = kappa.max(nonconvexity(&current.values_at(p), budget, setup.seed)?);
            }
            let image = current
                .members()
                .iter()
                .map(|m| problem.apply(m))
                .collect::<Result<Vec<_>>>()?;
            let residual = sup_distance(&image[0], &current.members()[0])?;
            if !(residual.as_f64() <= DIVERGENCE_LIMIT) {
                return Err(Error::Diverged {
                    iteration: index,
                    residual: residual.as_f64(),
                });
            }
            let record = DarboRecord {
                index,
                eta: report.eta_value,
                omega0: report.omega0_value,
                chi0: report.chi0_value,
                omega_total: report.omega_total,
                kappa,
                residual,
                hausdorff_to_final: T::zero(),
            };
            Ok((record, FunctionEnsemble::new(image)?))
        };
        match step() {
            Ok((record, next)) => {
                records.push(record);
                clouds.push(
                    setup
                        .probe_nodes
                        .iter()
                        .map(|&p| current.values_at(p))
                        .collect::<Vec<_>>(),
                );
                last = std::mem::replace(&mut current, next);
            }
            Err(e) => {
                error = Some(e);
                break;
            }
        }
    }

    let finish = |records: &mut Vec<DarboRecord<T>>| -> Result<()> {
        if let Some(final_clouds) = clouds.last() {
            for (record, cl) in records.iter_mut().zip(&clouds) {
                let mut d = T::zero();
                for (a, b) in cl.iter().zip(final_clouds) {
                    d = d.max(hausdorff_distance(a, b)?);
                }
                record.hausdorff_to_final = d;
            }
        }
        Ok(())
    };
    let finished = finish(&mut records);
    let trace = DarboTrace {
        records,
        probe_nodes: setup.probe_nodes.clone(),
        final_ensemble: last,
    };
    match (error, finished) {
        (None, Ok(())) => Ok(trace),
        (Some(e), _) | (None, Err(e)) => Err(IterationAborted {
            error: e,
            partial: Some(trace),
        }),
    }
}
