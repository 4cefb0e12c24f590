use rand::Rng;

use super::{chi0, eta, omega0, QuasimeasureParams};
use crate::ensemble::{restricted_distance, FunctionEnsemble, GridRef, SampledFunction};
use crate::error::Result;
use crate::sampling::{substream, SeededRng};
use crate::scalar::Scalar;

/// Values of the three components for one ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Components<T> {
    pub eta: T,
    pub omega0: T,
    pub chi0: T,
}

impl<T: Scalar> Components<T> {
    pub fn total(&self) -> T {
        self.eta + self.omega0 + self.chi0
    }
}

/// Anything that maps an ensemble to three component values; the suite runs
/// against this so that deliberately broken functionals can be checked too.
pub trait ComponentFunctional<T: Scalar> {
    fn name(&self) -> &str;
    fn components(&self, f: &FunctionEnsemble<T>, params: &QuasimeasureParams<T>) -> Result<Components<T>>;
}

/// The estimators of this module.
#[derive(Debug, Clone, Copy, Default)]
pub struct Quasimeasure;

impl<T: Scalar> ComponentFunctional<T> for Quasimeasure {
    fn name(&self) -> &str {
        "quasimeasure"
    }

    fn components(&self, f: &FunctionEnsemble<T>, params: &QuasimeasureParams<T>) -> Result<Components<T>> {
        Ok(Components {
            eta: eta(f, params.k_budget())?,
            omega0: omega0(f, params)?.0,
            chi0: chi0(f, params)?.0,
        })
    }
}

/// Negative control: every component divided by the member count, which
/// breaks monotonicity and duplication invariance.
#[derive(Debug, Clone, Copy, Default)]
pub struct NonMonotoneStub;

impl<T: Scalar> ComponentFunctional<T> for NonMonotoneStub {
    fn name(&self) -> &str {
        "non-monotone stub"
    }

    fn components(&self, f: &FunctionEnsemble<T>, params: &QuasimeasureParams<T>) -> Result<Components<T>> {
        let c = Quasimeasure.components(f, params)?;
        let n = T::lit(f.len() as f64);
        Ok(Components {
            eta: c.eta / n,
            omega0: c.omega0 / n,
            chi0: c.chi0 / n,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AxiomCheck {
    /// Sub-ensembles: `omega0`, `chi0` do not grow, `eta` at most doubles.
    Monotonicity,
    /// Appending copies of members changes nothing.
    Duplication,
    /// `c(sF) = |s| c(F)` with the eps schedule scaled by `|s|`.
    Homogeneity,
    /// Adding constants leaves `omega0` unchanged.
    UnionModulus,
    /// Adding constants far from `G` leaves `chi0` unchanged.
    UnionExtension,
    /// Adding `|A|` constants is absorbed by `|A|` extra centers.
    UnionPointwise,
    /// Convex mixes of a null ensemble stay (nearly) null.
    Mazur,
}

impl AxiomCheck {
    pub const ALL: [AxiomCheck; 7] = [
        AxiomCheck::Monotonicity,
        AxiomCheck::Duplication,
        AxiomCheck::Homogeneity,
        AxiomCheck::UnionModulus,
        AxiomCheck::UnionExtension,
        AxiomCheck::UnionPointwise,
        AxiomCheck::Mazur,
    ];

    pub fn label(self) -> &'static str {
        match self {
            AxiomCheck::Monotonicity => "monotonicity",
            AxiomCheck::Duplication => "duplication",
            AxiomCheck::Homogeneity => "homogeneity",
            AxiomCheck::UnionModulus => "finite_union_modulus",
            AxiomCheck::UnionExtension => "finite_union_extension",
            AxiomCheck::UnionPointwise => "finite_union_pointwise",
            AxiomCheck::Mazur => "mazur",
        }
    }
}

impl std::fmt::Display for AxiomCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnsembleGenerator {
    /// Smooth bumps, constant offsets, tail ramps outside the innermost
    /// level, near-duplicates and exact duplicates.
    #[default]
    Random,
    /// Constant members only.
    Constants,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomSuiteConfig {
    pub trials: usize,
    pub seed: u64,
    pub generator: EnsembleGenerator,
    /// Upper bound on the size of each generated ensemble.
    pub max_members: usize,
    /// Number of convex combinations added in the Mazur check.
    pub mix_count: usize,
}

impl Default for AxiomSuiteConfig {
    fn default() -> Self {
        AxiomSuiteConfig {
            trials: 50,
            seed: 0,
            generator: EnsembleGenerator::Random,
            max_members: 5,
            mix_count: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckSummary {
    pub check: AxiomCheck,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteFailure {
    pub trial: usize,
    pub check: AxiomCheck,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub functional: String,
    pub trials: usize,
    pub summaries: Vec<CheckSummary>,
    pub failures: Vec<SuiteFailure>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary(&self, check: AxiomCheck) -> CheckSummary {
        self.summaries.iter().copied().find(|s| s.check == check).unwrap()
    }
}

/// Runs the axiom checks on the module's own estimators.
pub fn axiom_suite<T: Scalar>(params: &QuasimeasureParams<T>, config: &AxiomSuiteConfig) -> SuiteReport {
    axiom_suite_with(&Quasimeasure, params, config)
}

/// Runs `config.trials` randomized trials of every [`AxiomCheck`] against
/// `functional`. Failures, including estimator errors, are reported as data
/// with the offending values.
pub fn axiom_suite_with<T: Scalar, F: ComponentFunctional<T> + ?Sized>(
    functional: &F,
    params: &QuasimeasureParams<T>,
    config: &AxiomSuiteConfig,
) -> SuiteReport {
    let mut summaries: Vec<CheckSummary> = AxiomCheck::ALL
        .iter()
        .map(|&check| CheckSummary {
            check,
            passed: 0,
            failed: 0,
        })
        .collect();
    let mut failures = Vec::new();
    for trial in 0..config.trials {
        let mut rng = substream(config.seed, trial as u64);
        let ctx = Trial {
            functional,
            params,
            config,
        };
        for (slot, &check) in AxiomCheck::ALL.iter().enumerate() {
            let outcome = ctx
                .run(check, &mut rng)
                .unwrap_or_else(|e| Err(format!("estimator error: {e}")));
            match outcome {
                Ok(()) => summaries[slot].passed += 1,
                Err(detail) => {
                    summaries[slot].failed += 1;
                    failures.push(SuiteFailure { trial, check, detail });
                }
            }
        }
    }
    SuiteReport {
        functional: functional.name().to_string(),
        trials: config.trials,
        summaries,
        failures,
    }
}

type Verdict = std::result::Result<(), String>;

struct Trial<'a, T: Scalar, F: ?Sized> {
    functional: &'a F,
    params: &'a QuasimeasureParams<T>,
    config: &'a AxiomSuiteConfig,
}

impl<T: Scalar, F: ComponentFunctional<T> + ?Sized> Trial<'_, T, F> {
    fn grid(&self) -> &GridRef<T> {
        self.params.saturating().grid()
    }

    fn eval(&self, f: &FunctionEnsemble<T>, params: &QuasimeasureParams<T>) -> Result<Components<T>> {
        self.functional.components(f, params)
    }

    fn run(&self, check: AxiomCheck, rng: &mut SeededRng) -> Result<Verdict> {
        let m = rng.random_range(1..=2);
        match check {
            AxiomCheck::Monotonicity => self.monotonicity(rng, m),
            AxiomCheck::Duplication => self.duplication(rng, m),
            AxiomCheck::Homogeneity => self.homogeneity(rng, m),
            AxiomCheck::UnionModulus | AxiomCheck::UnionExtension | AxiomCheck::UnionPointwise => {
                self.finite_union(check, rng, m)
            }
            AxiomCheck::Mazur => self.mazur(rng, m),
        }
    }

    fn ensemble(&self, rng: &mut SeededRng, m: usize) -> Result<FunctionEnsemble<T>> {
        let size = rng.random_range(2..=self.config.max_members.max(2));
        random_ensemble(rng, self.params, m, size, self.config.generator)
    }

    fn monotonicity(&self, rng: &mut SeededRng, m: usize) -> Result<Verdict> {
        let f = self.ensemble(rng, m)?;
        let mut idx: Vec<usize> = (0..f.len()).collect();
        shuffle(rng, &mut idx);
        idx.truncate(rng.random_range(1..=f.len()));
        let sub = f.select(&idx)?;
        let a = self.eval(&sub, self.params)?;
        let b = self.eval(&f, self.params)?;
        let slack = T::lit(1e-12) * (T::one() + b.eta);
        if a.omega0 <= b.omega0 && a.chi0 <= b.chi0 && a.eta <= T::lit(2.0) * b.eta + slack {
            Ok(Ok(()))
        } else {
            Ok(Err(format!(
                "sub-ensemble {idx:?}: {} exceeds full ensemble {}",
                show(&a),
                show(&b)
            )))
        }
    }

    fn duplication(&self, rng: &mut SeededRng, m: usize) -> Result<Verdict> {
        let f = self.ensemble(rng, m)?;
        let mut idx: Vec<usize> = (0..f.len()).collect();
        for _ in 0..rng.random_range(1..=3) {
            idx.push(rng.random_range(0..f.len()));
        }
        let a = self.eval(&f, self.params)?;
        let b = self.eval(&f.select(&idx)?, self.params)?;
        if a == b {
            Ok(Ok(()))
        } else {
            Ok(Err(format!("duplicated members {idx:?}: {} vs {}", show(&b), show(&a))))
        }
    }

    fn homogeneity(&self, rng: &mut SeededRng, m: usize) -> Result<Verdict> {
        let f = self.ensemble(rng, m)?;
        let magnitude = 0.25 * 16f64.powf(rng.random::<f64>());
        let s = T::lit(if rng.random_bool(0.5) { -magnitude } else { magnitude });
        let a = self.eval(&f, self.params)?;
        let b = self.eval(&f.scaled(s), &self.params.scaled_eps(s)?)?;
        let close = |x: T, y: T| {
            let want = s.abs() * x;
            (y - want).abs() <= T::lit(1e-9) * want.max(y)
        };
        if close(a.eta, b.eta) && close(a.omega0, b.omega0) && close(a.chi0, b.chi0) {
            Ok(Ok(()))
        } else {
            Ok(Err(format!("s = {s}: scaled {} vs |s| * {}", show(&b), show(&a))))
        }
    }

    fn finite_union(&self, check: AxiomCheck, rng: &mut SeededRng, m: usize) -> Result<Verdict> {
        let g = self.ensemble(rng, m)?;
        let count = rng.random_range(1..=3);
        let a = FunctionEnsemble::new(
            (0..count)
                .map(|_| {
                    let c: Vec<T> = (0..m).map(|_| T::lit(rng.random_range(-2.0..2.0))).collect();
                    SampledFunction::constant(self.grid(), &c)
                })
                .collect::<Result<Vec<_>>>()?,
        )?;
        let union = a.union(&g)?;
        match check {
            AxiomCheck::UnionModulus => {
                let ca = self.eval(&a, self.params)?;
                let cg = self.eval(&g, self.params)?;
                let cu = self.eval(&union, self.params)?;
                if cu.omega0 == ca.omega0.max(cg.omega0) {
                    Ok(Ok(()))
                } else {
                    Ok(Err(format!(
                        "omega0(A u G) = {} but max(omega0(A), omega0(G)) = {}",
                        cu.omega0,
                        ca.omega0.max(cg.omega0)
                    )))
                }
            }
            AxiomCheck::UnionExtension => {
                let deepest = self.params.saturating().level(self.params.saturating().len())?;
                let mut cross = T::infinity();
                for fa in a.members() {
                    for fg in g.members() {
                        cross = cross.min(restricted_distance(fa, fg, deepest)?);
                    }
                }
                if !(cross > T::zero()) {
                    return Ok(Ok(()));
                }
                let eps = cross * T::lit(0.5);
                let p = self.params.with_eps_schedule(vec![eps])?;
                let ca = self.eval(&a, &p)?;
                let cg = self.eval(&g, &p)?;
                let cu = self.eval(&union, &p)?;
                if cu.chi0 == ca.chi0.max(cg.chi0) {
                    Ok(Ok(()))
                } else {
                    Ok(Err(format!(
                        "eps = {eps}: chi0(A u G) = {} but max(chi0(A), chi0(G)) = {}",
                        cu.chi0,
                        ca.chi0.max(cg.chi0)
                    )))
                }
            }
            _ => {
                let k = self.params.k_budget();
                let wide = self.params.with_k_budget(k + a.len())?;
                let cu = self.eval(&union, &wide)?;
                let cg = self.eval(&g, self.params)?;
                if cu.eta <= cg.eta {
                    Ok(Ok(()))
                } else {
                    Ok(Err(format!(
                        "eta(A u G, k + {}) = {} exceeds eta(G, k) = {}",
                        a.len(),
                        cu.eta,
                        cg.eta
                    )))
                }
            }
        }
    }

    fn mazur(&self, rng: &mut SeededRng, m: usize) -> Result<Verdict> {
        let k = self.params.k_budget();
        let distinct = k.min(3);
        let gap = self.params.smallest_eps().as_f64() * 1.5;
        let origin: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut members = Vec::new();
        let mut offset = 0.0;
        for _ in 0..distinct {
            let c: Vec<T> = origin.iter().map(|&o| T::lit(o + offset)).collect();
            for _ in 0..rng.random_range(1..=3) {
                members.push(SampledFunction::constant(self.grid(), &c)?);
            }
            offset += gap + rng.random_range(0.0..1.0);
        }
        let f = FunctionEnsemble::new(members)?;
        let base = self.eval(&f, self.params)?;
        if base.total() != T::zero() {
            return Ok(Err(format!("null ensemble measured {}", show(&base))));
        }
        let count = self.config.mix_count;
        let mixed = f.convex_mix(count, rng.random());
        let c = self.eval(&mixed, &self.params.with_k_budget(k + count)?)?;
        if c.eta == T::zero() && c.omega0 == T::zero() && c.chi0 <= self.params.smallest_eps() {
            Ok(Ok(()))
        } else {
            Ok(Err(format!(
                "{count} convex mixes of a null ensemble measured {} (k = {})",
                show(&c),
                k + count
            )))
        }
    }
}

fn show<T: Scalar>(c: &Components<T>) -> String {
    format!("(eta {}, omega0 {}, chi0 {})", c.eta, c.omega0, c.chi0)
}

fn shuffle(rng: &mut SeededRng, v: &mut [usize]) {
    for i in (1..v.len()).rev() {
        v.swap(i, rng.random_range(0..=i));
    }
}

struct Bump {
    amplitude: f64,
    center: Vec<f64>,
    rate: f64,
}

struct Shape {
    offset: f64,
    bumps: Vec<Bump>,
    tail: f64,
}

impl Shape {
    fn draw(rng: &mut SeededRng, dim: usize, l: f64) -> Self {
        Shape {
            offset: rng.random_range(-1.0..1.0),
            bumps: (0..2)
                .map(|_| Bump {
                    amplitude: rng.random_range(-1.0..1.0),
                    center: (0..dim).map(|_| rng.random_range(-l..l)).collect(),
                    rate: rng.random_range(0.5..4.0),
                })
                .collect(),
            tail: if rng.random_bool(0.5) {
                rng.random_range(-1.0..1.0)
            } else {
                0.0
            },
        }
    }

    fn eval(&self, x: &[f64], ramp: f64) -> f64 {
        let mut v = self.offset + self.tail * ramp;
        for b in &self.bumps {
            let r2: f64 = x.iter().zip(&b.center).map(|(a, c)| (a - c) * (a - c)).sum();
            v += b.amplitude * (-b.rate * r2).exp();
        }
        v
    }
}

/// Random member drawn from a base shape plus an independent one scaled by
/// `mix`.
fn member<T: Scalar>(
    grid: &GridRef<T>,
    shapes: &[(Shape, f64)],
    inner: f64,
    tail_only: Option<(f64, usize)>,
) -> Result<SampledFunction<T>> {
    let l = grid.half_width().as_f64();
    let m = shapes.len();
    SampledFunction::from_fn(grid, m, |x| {
        let x: Vec<f64> = x.iter().map(|v| v.as_f64()).collect();
        let linf = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let ramp = if l > inner {
            ((linf - inner) / (l - inner)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        (0..m)
            .map(|j| {
                let (shape, scale) = &shapes[j];
                let mut v = scale * shape.eval(&x, ramp);
                if let Some((t, comp)) = tail_only {
                    if comp == j {
                        v += t * ramp;
                    }
                }
                T::lit(v)
            })
            .collect()
    })
}

fn random_ensemble<T: Scalar>(
    rng: &mut SeededRng,
    params: &QuasimeasureParams<T>,
    m: usize,
    size: usize,
    generator: EnsembleGenerator,
) -> Result<FunctionEnsemble<T>> {
    let grid = params.saturating().grid();
    if generator == EnsembleGenerator::Constants {
        return FunctionEnsemble::new(
            (0..size)
                .map(|_| {
                    let c: Vec<T> = (0..m).map(|_| T::lit(rng.random_range(-2.0..2.0))).collect();
                    SampledFunction::constant(grid, &c)
                })
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let dim = grid.dim();
    let l = grid.half_width().as_f64();
    let inner = params.saturating().half_widths()[0].as_f64();
    let eps = params.smallest_eps().as_f64();

    let base: Vec<(Shape, f64)> = (0..m).map(|_| (Shape::draw(rng, dim, l), 1.0)).collect();
    let mut members = vec![member(grid, &base, inner, None)?];
    while members.len() < size {
        let next = match rng.random_range(0..4) {
            0 => members[rng.random_range(0..members.len())].clone(),
            1 => {
                let jitter = rng.random_range(0.0..eps / 2.0);
                let noise: Vec<(Shape, f64)> = (0..m).map(|_| (Shape::draw(rng, dim, l), jitter / 4.0)).collect();
                let a = member(grid, &base, inner, None)?;
                let b = member(grid, &noise, inner, None)?;
                let values = a.values().iter().zip(b.values()).map(|(&x, &y)| x + y).collect();
                SampledFunction::new(grid, m, values)?
            }
            2 => {
                let t = rng.random_range(-1.0..1.0);
                let comp = rng.random_range(0..m);
                member(grid, &base, inner, Some((t, comp)))?
            }
            _ => {
                let fresh: Vec<(Shape, f64)> = (0..m).map(|_| (Shape::draw(rng, dim, l), 1.0)).collect();
                member(grid, &fresh, inner, None)?
            }
        };
        members.push(next);
    }
    FunctionEnsemble::new(members)
}
