use rand::Rng;

use super::HammersteinProblem;
use crate::ensemble::{FunctionEnsemble, SampledFunction};
use crate::error::{Error, Result};
use crate::noncompactness::{chi0, QuasimeasureParams};
use crate::sampling::{substream, SeededRng};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QTrial<T> {
    pub trial: usize,
    pub chi0_input: T,
    pub chi0_image: T,
    /// `chi0_image / chi0_input`, absent when the input value is 0.
    pub ratio: Option<T>,
}

/// Sampled lower estimate of the contraction constant of the extension
/// component under the operator.
#[derive(Debug, Clone, PartialEq)]
pub struct QEstimate<T> {
    pub q_hat: T,
    /// `q_hat >= 1`: a certified counterexample to contraction.
    pub flagged: bool,
    pub trials: Vec<QTrial<T>>,
}

impl<T: Scalar> QEstimate<T> {
    pub fn degenerate(&self) -> usize {
        self.trials.iter().filter(|t| t.ratio.is_none()).count()
    }
}

/// [`estimate_q_with`] using [`cone_ball_sampler`] with `members` members per
/// ensemble and pairwise spread `eps_min / 1.5`, so that every pair (and,
/// for Lipschitz constants up to 1.5, every image pair) is admitted by the
/// smallest eps.
pub fn estimate_q<T: Scalar>(
    problem: &HammersteinProblem<T>,
    params: &QuasimeasureParams<T>,
    trials: usize,
    members: usize,
    seed: u64,
) -> Result<QEstimate<T>> {
    let spread = params.smallest_eps() / T::lit(1.5);
    let sampler = cone_ball_sampler(problem, members, spread)?;
    estimate_q_with(problem, params, trials, seed, sampler)
}

/// Ratio `chi0(H(F)) / chi0(F)` over `trials` ensembles drawn by `sampler`
/// from independent substreams of `seed`; `q_hat` is the largest ratio.
pub fn estimate_q_with<T, S>(
    problem: &HammersteinProblem<T>,
    params: &QuasimeasureParams<T>,
    trials: usize,
    seed: u64,
    mut sampler: S,
) -> Result<QEstimate<T>>
where
    T: Scalar,
    S: FnMut(&mut SeededRng) -> Result<FunctionEnsemble<T>>,
{
    if problem.radius().is_none() {
        return Err(Error::invalid("radius", "solve or supply the radius first"));
    }
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    let mut table = Vec::with_capacity(trials);
    for trial in 0..trials {
        let mut rng = substream(seed, trial as u64);
        let f = sampler(&mut rng)?;
        let image = FunctionEnsemble::new(
            f.members()
                .iter()
                .map(|m| problem.apply(m))
                .collect::<Result<Vec<_>>>()?,
        )?;
        let chi0_input = chi0(&f, params)?.0;
        let chi0_image = chi0(&image, params)?.0;
        let ratio = (chi0_input > T::zero()).then(|| chi0_image / chi0_input);
        table.push(QTrial {
            trial,
            chi0_input,
            chi0_image,
            ratio,
        });
    }
    let ratios: Vec<T> = table.iter().filter_map(|t| t.ratio).collect();
    if ratios.is_empty() {
        return Err(Error::AllTrialsDegenerate { trials });
    }
    let q_hat = ratios.into_iter().fold(T::zero(), T::max);
    Ok(QEstimate {
        q_hat,
        flagged: q_hat >= T::one(),
        trials: table,
    })
}

/// Generator of clustered ensembles inside `B(0, R) ∩ cone(r, c)`.
///
/// Each draw picks a level `s` in `[0.1 R, 0.95 R)` and a smooth base profile
/// `g` with values in `[1/4, 3/4]`; members are `s (c + (1 - c) clamp(g +
/// d_i, 0, 1))` where the perturbations `d_i` mix a constant shift with a
/// smooth oscillation and are scaled so that members are at most `spread`
/// apart in the sup metric. Member 0 is the unperturbed base.
pub fn cone_ball_sampler<T: Scalar>(
    problem: &HammersteinProblem<T>,
    members: usize,
    spread: T,
) -> Result<impl FnMut(&mut SeededRng) -> Result<FunctionEnsemble<T>> + '_> {
    let Some(radius) = problem.radius() else {
        return Err(Error::invalid("radius", "solve or supply the radius first"));
    };
    if members < 2 {
        return Err(Error::invalid("members", "need at least two members"));
    }
    if !(spread > T::zero()) {
        return Err(Error::invalid("spread", "must be positive"));
    }
    let r = radius.as_f64();
    let c = problem.cone().c().as_f64();
    let l = problem.grid().half_width().as_f64();
    let spread = spread.as_f64();
    let grid = problem.grid();
    Ok(move |rng: &mut SeededRng| {
        let s = rng.random_range(0.1 * r..0.95 * r);
        let bumps: Vec<(f64, f64, Vec<f64>)> = (0..2)
            .map(|_| {
                (
                    rng.random_range(0.0..1.0),
                    rng.random_range(0.2..2.0),
                    (0..grid.dim()).map(|_| rng.random_range(-l..l)).collect(),
                )
            })
            .collect();
        let total: f64 = bumps.iter().map(|b| b.0).sum::<f64>().max(1.0);
        let base = |x: &[f64]| {
            let u: f64 = bumps
                .iter()
                .map(|(a, rate, mu)| {
                    let d2: f64 = x.iter().zip(mu).map(|(p, q)| (p - q) * (p - q)).sum();
                    a * (-rate * d2).exp()
                })
                .sum();
            0.25 + 0.5 * u / total
        };
        let delta = spread / (2.0 * s * (1.0 - c));
        let mut out = Vec::with_capacity(members);
        for i in 0..members {
            let (amp, shift, freq, phase) = if i == 0 {
                (0.0, 0.0, 0.0, 0.0)
            } else {
                (
                    delta * rng.random_range(0.2..1.0),
                    rng.random_range(-1.0..1.0f64),
                    rng.random_range(0.5..3.0),
                    rng.random_range(0.0..std::f64::consts::TAU),
                )
            };
            out.push(SampledFunction::from_scalar_fn(grid, |x| {
                let x: Vec<f64> = x.iter().map(|v| v.as_f64()).collect();
                let wave = (freq * x[0] + phase).sin();
                let d = amp * (shift + (1.0 - shift.abs()) * wave);
                T::lit(s * (c + (1.0 - c) * (base(&x) + d).clamp(0.0, 1.0)))
            })?);
        }
        FunctionEnsemble::new(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{make_saturating, sup_distance, Grid, GridRef};
    use crate::hammerstein::{cone_check, Cone, InnerProfile, Kernel, Nonlinearity, OuterFactor};

    fn setup(slope: f64, offset: f64, amplitude: f64) -> (HammersteinProblem<f64>, QuasimeasureParams<f64>) {
        let g: GridRef<f64> = Grid::new(1, 2.0, 81).unwrap();
        let kernel = Kernel::Separable {
            amplitude,
            outer: OuterFactor::Gaussian { rate: 1.0 },
            inner: InnerProfile::Indicator { lo: 0.0, hi: 1.0 },
        };
        let p = HammersteinProblem::new(
            &g,
            kernel,
            Nonlinearity::Affine { slope, offset },
            Cone::new(1.0, 0.2).unwrap(),
        )
        .unwrap();
        let h = g.spacing();
        let params =
            QuasimeasureParams::new(1, vec![2.0 * h, h], vec![0.5, 0.1], make_saturating(&g, 4).unwrap()).unwrap();
        (p, params)
    }

    #[test]
    fn sampler_stays_in_cone_ball() {
        let (p, params) = setup(0.5, 1.0, 1.0);
        let p = p.with_radius(2.0).unwrap();
        let mut sampler = cone_ball_sampler(&p, 5, params.smallest_eps() / 1.5).unwrap();
        for t in 0..20 {
            let f = sampler(&mut substream(1, t)).unwrap();
            for m in f.members() {
                assert!(m.sup_norm() < 2.0);
                assert!(cone_check(m, p.cone()).unwrap().member);
            }
            for a in f.members() {
                for b in f.members() {
                    assert!(sup_distance(a, b).unwrap() <= params.smallest_eps() / 1.5 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn constant_nonlinearity_gives_zero() {
        let (p, params) = setup(0.0, 1.0, 1.0);
        let p = p.with_radius(1.0).unwrap();
        let q = estimate_q(&p, &params, 10, 4, 3).unwrap();
        assert_eq!(q.q_hat, 0.0);
        assert!(!q.flagged);
    }

    #[test]
    fn affine_half_contracts() {
        let (p, params) = setup(0.5, 1.0, 1.0);
        let (p, _) = p.with_solved_radius().unwrap();
        let q = estimate_q(&p, &params, 30, 5, 11).unwrap();
        // the differences are mapped by 0.5 times a kernel of unit Car4 norm
        assert!(q.q_hat <= 0.5 * p.car4_norm() + 1e-12, "{}", q.q_hat);
        assert!(q.q_hat > 0.0);
        assert_eq!(q.degenerate(), 0);
    }

    #[test]
    fn expanding_operator_is_flagged() {
        let (p, params) = setup(1.0, 0.0, 1.2);
        let p = p.with_radius(1.0).unwrap();
        let q = estimate_q(&p, &params, 30, 5, 5).unwrap();
        assert!(q.flagged, "q_hat {}", q.q_hat);
    }

    #[test]
    fn degenerate_trials_error() {
        let (p, params) = setup(0.5, 1.0, 1.0);
        let p = p.with_radius(1.0).unwrap();
        let single =
            |_: &mut SeededRng| FunctionEnsemble::new(vec![SampledFunction::constant(p.grid(), &[0.5]).unwrap()]);
        assert_eq!(
            estimate_q_with(&p, &params, 3, 0, single),
            Err(Error::AllTrialsDegenerate { trials: 3 })
        );
        let (unset, _) = setup(0.5, 1.0, 1.0);
        assert!(estimate_q(&unset, &params, 3, 4, 0).is_err());
    }
}
