//! Estimators for the three components of the quasimeasure of noncompactness
//! on bounded continuous functions, evaluated on finite grid-sampled ensembles:
//!
//! * `eta`: largest k-center radius of the pointwise value clouds
//!   (failure of pointwise relative compactness);
//! * `omega0`: modulus of continuity at the smallest scheduled scale
//!   (failure of equicontinuity);
//! * `chi0`: largest global distance between members that are `eps`-close on
//!   a compact piece of the domain (failure of the extension property).
//!
//! The limits in the continuum definitions become "smallest schedule entry"
//! and "deepest saturating level"; the full tables are reported so callers can
//! inspect the monotone trends.

mod axioms;

pub use axioms::{
    axiom_suite, axiom_suite_with, AxiomCheck, AxiomSuiteConfig, CheckSummary, ComponentFunctional, Components,
    EnsembleGenerator, NonMonotoneStub, Quasimeasure, SuiteFailure, SuiteReport,
};

use crate::ensemble::{restricted_distance, sup_distance, FunctionEnsemble, SaturatingSequence};
use crate::error::{Error, Result};
use crate::geometry::{kcenter_radius, KCenterMode, DEFAULT_EXHAUSTIVE_CAP};
use crate::scalar::{euclidean, Scalar};

/// Budgets and schedules shared by the three estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasimeasureParams<T> {
    k_budget: usize,
    delta_schedule: Vec<T>,
    eps_schedule: Vec<T>,
    saturating: SaturatingSequence<T>,
}

fn check_schedule<T: Scalar>(name: &'static str, s: &[T]) -> Result<()> {
    if s.is_empty() {
        return Err(Error::invalid(name, "schedule is empty"));
    }
    if s.iter().any(|&x| !(x > T::zero()) || !x.is_finite()) {
        return Err(Error::invalid(name, "entries must be positive and finite"));
    }
    if s.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::invalid(name, "schedule must be strictly descending"));
    }
    Ok(())
}

impl<T: Scalar> QuasimeasureParams<T> {
    pub fn new(
        k_budget: usize,
        delta_schedule: Vec<T>,
        eps_schedule: Vec<T>,
        saturating: SaturatingSequence<T>,
    ) -> Result<Self> {
        if k_budget == 0 {
            return Err(Error::invalid("k_budget", "must be at least 1"));
        }
        check_schedule("delta_schedule", &delta_schedule)?;
        check_schedule("eps_schedule", &eps_schedule)?;
        let h = saturating.grid().spacing();
        let smallest = *delta_schedule.last().unwrap();
        if smallest < h * (T::one() - T::lit(1e-9)) {
            return Err(Error::DeltaBelowSpacing {
                delta: smallest.as_f64(),
                spacing: h.as_f64(),
            });
        }
        Ok(QuasimeasureParams {
            k_budget,
            delta_schedule,
            eps_schedule,
            saturating,
        })
    }

    pub fn k_budget(&self) -> usize {
        self.k_budget
    }

    pub fn delta_schedule(&self) -> &[T] {
        &self.delta_schedule
    }

    pub fn eps_schedule(&self) -> &[T] {
        &self.eps_schedule
    }

    pub fn saturating(&self) -> &SaturatingSequence<T> {
        &self.saturating
    }

    pub fn smallest_delta(&self) -> T {
        *self.delta_schedule.last().unwrap()
    }

    pub fn smallest_eps(&self) -> T {
        *self.eps_schedule.last().unwrap()
    }

    pub fn with_k_budget(&self, k_budget: usize) -> Result<Self> {
        Self::new(
            k_budget,
            self.delta_schedule.clone(),
            self.eps_schedule.clone(),
            self.saturating.clone(),
        )
    }

    pub fn with_eps_schedule(&self, eps_schedule: Vec<T>) -> Result<Self> {
        Self::new(
            self.k_budget,
            self.delta_schedule.clone(),
            eps_schedule,
            self.saturating.clone(),
        )
    }

    /// The matching parameters for an ensemble scaled by `s != 0`: the eps
    /// schedule is multiplied by `|s|`.
    pub fn scaled_eps(&self, s: T) -> Result<Self> {
        let a = s.abs();
        self.with_eps_schedule(self.eps_schedule.iter().map(|&e| e * a).collect())
    }

    fn check_grid(&self, f: &FunctionEnsemble<T>) -> Result<()> {
        if crate::ensemble::same_grid(f.grid(), self.saturating.grid()) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// `max_x` of the k-center radius of `{f(x) : f in F}`.
///
/// Each value cloud is canonicalized (sorted, duplicates removed) and searched
/// exhaustively when it has at most [`DEFAULT_EXHAUSTIVE_CAP`] distinct points,
/// greedily otherwise.
pub fn eta<T: Scalar>(f: &FunctionEnsemble<T>, k: usize) -> Result<T> {
    if k == 0 {
        return Err(Error::invalid("k", "center budget must be at least 1"));
    }
    let mut worst = T::zero();
    for node in 0..f.grid().len() {
        let cloud = f.values_at(node).canonical();
        let mode = if cloud.len() <= DEFAULT_EXHAUSTIVE_CAP {
            KCenterMode::Exhaustive
        } else {
            KCenterMode::Greedy
        };
        worst = worst.max(kcenter_radius(&cloud, k, mode)?);
    }
    Ok(worst)
}

/// Integer lattice offsets `d != 0` with `|d| h < delta`, one from each
/// `{d, -d}` pair.
fn neighbour_offsets<T: Scalar>(dim: usize, delta: T, h: T) -> Vec<Vec<isize>> {
    let r = (delta / h).as_f64();
    let reach = r.ceil() as isize;
    let mut out = Vec::new();
    let mut d = vec![-reach; dim];
    loop {
        let sq: isize = d.iter().map(|x| x * x).sum();
        let positive = d.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0);
        if positive && ((sq as f64).sqrt() < r + 1e-9) {
            out.push(d.clone());
        }
        let mut axis = dim;
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            d[axis] += 1;
            if d[axis] <= reach {
                break;
            }
            d[axis] = -reach;
        }
    }
}

/// `sup_f sup_{x, y : |y - x| < delta} |f(y) - f(x)|` over grid nodes.
///
/// A `delta` of exactly one spacing admits the nearest axis neighbours.
pub fn omega<T: Scalar>(f: &FunctionEnsemble<T>, delta: T) -> Result<T> {
    let grid = f.grid();
    let h = grid.spacing();
    if !(delta >= h * (T::one() - T::lit(1e-9))) {
        return Err(Error::DeltaBelowSpacing {
            delta: delta.as_f64(),
            spacing: h.as_f64(),
        });
    }
    let offsets = neighbour_offsets(grid.dim(), delta, h);
    let mut worst = T::zero();
    let mut target = vec![0isize; grid.dim()];
    for x in 0..grid.len() {
        let base = grid.multi_index(x);
        for d in &offsets {
            for ((t, &b), &o) in target.iter_mut().zip(&base).zip(d) {
                *t = b as isize + o;
            }
            let Some(y) = grid.flat_index(&target) else {
                continue;
            };
            for member in f.members() {
                worst = worst.max(euclidean(member.value(y), member.value(x)));
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaEntry<T> {
    pub delta: T,
    pub value: T,
}

/// Modulus at every scheduled delta; the value is the one at the smallest.
pub fn omega0<T: Scalar>(f: &FunctionEnsemble<T>, params: &QuasimeasureParams<T>) -> Result<(T, Vec<OmegaEntry<T>>)> {
    params.check_grid(f)?;
    let table = params
        .delta_schedule
        .iter()
        .map(|&delta| {
            Ok(OmegaEntry {
                delta,
                value: omega(f, delta)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((table.last().unwrap().value, table))
}

/// Pairwise distances of an ensemble: global sup distance and the restricted
/// distance on every saturating level, for pairs `i < j`.
struct PairDistances<T> {
    global: Vec<T>,
    per_level: Vec<Vec<T>>,
}

impl<T: Scalar> PairDistances<T> {
    fn new(f: &FunctionEnsemble<T>, sat: &SaturatingSequence<T>, levels: &[usize]) -> Result<Self> {
        let n = f.len();
        let m = f.members();
        let mut global = Vec::with_capacity(n * (n - 1) / 2);
        let mut per_level = vec![Vec::with_capacity(global.capacity()); levels.len()];
        for i in 0..n {
            for j in i + 1..n {
                global.push(sup_distance(&m[i], &m[j])?);
                for (slot, &lvl) in per_level.iter_mut().zip(levels) {
                    slot.push(restricted_distance(&m[i], &m[j], sat.level(lvl)?)?);
                }
            }
        }
        Ok(PairDistances { global, per_level })
    }

    fn chi(&self, level_slot: usize, eps: T) -> T {
        self.global
            .iter()
            .zip(&self.per_level[level_slot])
            .filter(|(_, &r)| r <= eps)
            .map(|(&g, _)| g)
            .fold(T::zero(), T::max)
    }
}

fn check_eps<T: Scalar>(eps: T) -> Result<()> {
    if eps >= T::zero() && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("eps", "must be finite and nonnegative"))
    }
}

/// `sup { d(f, g) : f, g in F, d_{S_level}(f, g) <= eps }`, with `level`
/// counted from 1. Pairs `f = g` contribute 0, so the value is 0 when no
/// distinct pair passes the filter.
pub fn chi<T: Scalar>(f: &FunctionEnsemble<T>, saturating: &SaturatingSequence<T>, level: usize, eps: T) -> Result<T> {
    if !crate::ensemble::same_grid(f.grid(), saturating.grid()) {
        return Err(Error::GridMismatch);
    }
    saturating.level(level)?;
    check_eps(eps)?;
    Ok(PairDistances::new(f, saturating, &[level])?.chi(0, eps))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiEntry<T> {
    pub level: usize,
    pub half_width: T,
    pub eps: T,
    pub value: T,
}

/// `chi` on every (level, eps) pair; the value is the one at the deepest
/// level and smallest eps.
pub fn chi0<T: Scalar>(f: &FunctionEnsemble<T>, params: &QuasimeasureParams<T>) -> Result<(T, Vec<ChiEntry<T>>)> {
    params.check_grid(f)?;
    let sat = &params.saturating;
    let levels: Vec<usize> = (1..=sat.len()).collect();
    let pairs = PairDistances::new(f, sat, &levels)?;
    let mut table = Vec::with_capacity(levels.len() * params.eps_schedule.len());
    for (slot, &level) in levels.iter().enumerate() {
        for &eps in &params.eps_schedule {
            table.push(ChiEntry {
                level,
                half_width: sat.half_widths()[slot],
                eps,
                value: pairs.chi(slot, eps),
            });
        }
    }
    Ok((table.last().unwrap().value, table))
}

/// The three components, their sum and the tables behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasimeasureReport<T> {
    pub eta_value: T,
    pub omega0_value: T,
    pub chi0_value: T,
    pub omega_total: T,
    pub omega_table: Vec<OmegaEntry<T>>,
    pub chi_table: Vec<ChiEntry<T>>,
    pub k_budget: usize,
    pub delta_schedule: Vec<T>,
    pub eps_schedule: Vec<T>,
    pub level_half_widths: Vec<T>,
}

impl<T: Scalar> QuasimeasureReport<T> {
    pub fn components(&self) -> Components<T> {
        Components {
            eta: self.eta_value,
            omega0: self.omega0_value,
            chi0: self.chi0_value,
        }
    }
}

pub fn quasimeasure<T: Scalar>(
    f: &FunctionEnsemble<T>,
    params: &QuasimeasureParams<T>,
) -> Result<QuasimeasureReport<T>> {
    params.check_grid(f)?;
    let eta_value = eta(f, params.k_budget)?;
    let (omega0_value, omega_table) = omega0(f, params)?;
    let (chi0_value, chi_table) = chi0(f, params)?;
    Ok(QuasimeasureReport {
        eta_value,
        omega0_value,
        chi0_value,
        omega_total: eta_value + omega0_value + chi0_value,
        omega_table,
        chi_table,
        k_budget: params.k_budget,
        delta_schedule: params.delta_schedule.clone(),
        eps_schedule: params.eps_schedule.clone(),
        level_half_widths: params.saturating.half_widths().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{make_saturating, Grid, GridRef, SampledFunction};

    fn line(l: f64, n: usize) -> GridRef<f64> {
        Grid::new(1, l, n).unwrap()
    }

    fn constants(g: &GridRef<f64>, cs: &[f64]) -> FunctionEnsemble<f64> {
        FunctionEnsemble::new(
            cs.iter()
                .map(|&c| SampledFunction::constant(g, &[c]).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn ramp_pair(g: &GridRef<f64>) -> FunctionEnsemble<f64> {
        let zero = SampledFunction::constant(g, &[0.0]).unwrap();
        let ramp = SampledFunction::from_scalar_fn(g, |x| (x[0].abs() - 1.0).clamp(0.0, 1.0)).unwrap();
        FunctionEnsemble::new(vec![zero, ramp]).unwrap()
    }

    fn params(g: &GridRef<f64>, k: usize, levels: usize, eps: Vec<f64>) -> QuasimeasureParams<f64> {
        let h = g.spacing();
        QuasimeasureParams::new(k, vec![4.0 * h, 2.0 * h, h], eps, make_saturating(g, levels).unwrap()).unwrap()
    }

    #[test]
    fn eta_examples() {
        let g = line(1.0, 11);
        assert_eq!(eta(&constants(&g, &[0.3]), 1).unwrap(), 0.0);
        assert_eq!(eta(&constants(&g, &[0.0, 1.0]), 2).unwrap(), 0.0);
        // centre 0.5 covers the five constants at radius 0.5
        assert_eq!(eta(&constants(&g, &[0.0, 0.25, 0.5, 0.75, 1.0]), 1).unwrap(), 0.5);
    }

    #[test]
    fn omega_examples() {
        let g = line(2.0, 41);
        let h = g.spacing();
        let c = constants(&g, &[1.0, -3.0]);
        for d in [h, 2.5 * h, 10.0 * h] {
            assert_eq!(omega(&c, d).unwrap(), 0.0);
        }
        let lin = FunctionEnsemble::new(vec![SampledFunction::from_scalar_fn(&g, |x| 2.0 * x[0]).unwrap()]).unwrap();
        let w = omega(&lin, 1.01 * h).unwrap();
        // direct neighbour-pair evaluation
        let direct = (0..g.len() - 1)
            .map(|i| (2.0 * g.node(i + 1)[0] - 2.0 * g.node(i)[0]).abs())
            .fold(0.0, f64::max);
        assert_eq!(w, direct);
        assert!((w - 2.0 * h).abs() < 1e-12);
        assert!(omega(&lin, h).unwrap() == w);
        assert!(matches!(omega(&lin, 0.5 * h), Err(Error::DeltaBelowSpacing { .. })));
        let mut prev = 0.0;
        for k in 1..8 {
            let v = omega(&lin, k as f64 * 0.7 * h + h).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn omega_in_two_dimensions_uses_euclidean_balls() {
        let g: GridRef<f64> = Grid::new(2, 1.0, 11).unwrap();
        let h = g.spacing();
        let f = FunctionEnsemble::new(vec![SampledFunction::from_scalar_fn(&g, |x| x[0] + x[1]).unwrap()]).unwrap();
        // |d| < 1.5h admits the diagonal neighbour (|d| = sqrt 2 h)
        assert!((omega(&f, 1.5 * h).unwrap() - 2.0 * h).abs() < 1e-12);
        assert!((omega(&f, h).unwrap() - h).abs() < 1e-12);
    }

    #[test]
    fn omega0_bounded_by_lipschitz_constant() {
        let g = line(3.0, 61);
        let p = params(&g, 1, 3, vec![0.5, 0.1]);
        let fam = FunctionEnsemble::new(
            (1..=4)
                .map(|k| SampledFunction::from_scalar_fn(&g, move |x| (k as f64 * x[0]).sin() / k as f64).unwrap())
                .collect(),
        )
        .unwrap();
        let (v, table) = omega0(&fam, &p).unwrap();
        // each member is 1-Lipschitz
        assert!(v <= p.smallest_delta() + 1e-12);
        assert!(table.windows(2).all(|w| w[0].value >= w[1].value));
    }

    #[test]
    fn chi_ramp_examples() {
        let g = line(3.0, 61);
        let f = ramp_pair(&g);
        let sat = make_saturating(&g, 3).unwrap();
        assert_eq!(chi(&f, &sat, 1, 0.0).unwrap(), 1.0);
        assert_eq!(chi(&f, &sat, 1, 0.3).unwrap(), 1.0);
        assert_eq!(chi(&f, &sat, 2, 0.1).unwrap(), 0.0);
        assert!(matches!(chi(&f, &sat, 4, 0.1), Err(Error::LevelOutOfRange { .. })));
        let single = constants(&g, &[2.0]);
        for n in 1..=3 {
            assert_eq!(chi(&single, &sat, n, 0.5).unwrap(), 0.0);
        }
    }

    #[test]
    fn chi0_examples() {
        let g = line(3.0, 61);
        let p = params(&g, 1, 3, vec![0.5, 0.2, 0.1]);
        let (v, table) = chi0(&ramp_pair(&g), &p).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(table.len(), 9);
        for eps in p.eps_schedule() {
            let col: Vec<f64> = table.iter().filter(|e| e.eps == *eps).map(|e| e.value).collect();
            assert!(col.windows(2).all(|w| w[0] >= w[1]));
        }
        for lvl in 1..=3 {
            let row: Vec<f64> = table.iter().filter(|e| e.level == lvl).map(|e| e.value).collect();
            assert!(row.windows(2).all(|w| w[0] >= w[1]));
        }

        // compactly supported bumps inside S_1
        let bumps = FunctionEnsemble::new(
            [0.05, 0.08, 0.3]
                .iter()
                .map(|&a| SampledFunction::from_scalar_fn(&g, move |x| a * (1.0 - x[0].abs()).max(0.0)).unwrap())
                .collect(),
        )
        .unwrap();
        let (v, _) = chi0(&bumps, &p).unwrap();
        assert!(v <= p.smallest_eps());
    }

    #[test]
    fn quasimeasure_examples() {
        let g = line(2.0, 41);
        let p = params(&g, 1, 2, vec![0.5, 0.1]);
        let r = quasimeasure(&constants(&g, &[0.7]), &p).unwrap();
        assert_eq!(r.omega_total, 0.0);

        // centers are restricted to the value cloud, so one center at 0 or 1
        let r = quasimeasure(&constants(&g, &[0.0, 1.0]), &p).unwrap();
        assert_eq!((r.eta_value, r.omega0_value, r.chi0_value), (1.0, 0.0, 0.0));
        assert_eq!(r.omega_total, 1.0);

        let p_wide = params(&g, 1, 2, vec![2.0, 1.0]);
        let (c, _) = chi0(&constants(&g, &[0.0, 1.0]), &p_wide).unwrap();
        assert_eq!(c, 1.0);
    }

    #[test]
    fn homogeneity_with_scaled_eps() {
        let g = line(3.0, 61);
        let p = params(&g, 1, 3, vec![0.5, 0.2, 0.1]);
        let f = FunctionEnsemble::new(vec![
            SampledFunction::from_scalar_fn(&g, |x| x[0].sin()).unwrap(),
            SampledFunction::from_scalar_fn(&g, |x| x[0].sin() + 0.05 * x[0].cos()).unwrap(),
            SampledFunction::from_scalar_fn(&g, |x| (x[0].abs() - 1.0).clamp(0.0, 1.0)).unwrap(),
        ])
        .unwrap();
        let base = quasimeasure(&f, &p).unwrap();
        for s in [3.0, -0.5, 7.25] {
            let r = quasimeasure(&f.scaled(s), &p.scaled_eps(s).unwrap()).unwrap();
            for (a, b) in [
                (r.eta_value, base.eta_value),
                (r.omega0_value, base.omega0_value),
                (r.chi0_value, base.chi0_value),
            ] {
                assert!(
                    (a - s.abs() * b).abs() <= 1e-9 * (s.abs() * b).max(1e-300),
                    "{a} vs {}",
                    s.abs() * b
                );
            }
        }
        let two = constants(&g, &[0.0, 1.0]);
        let p1 = params(&g, 1, 3, vec![0.5, 0.1]);
        assert_eq!(eta(&two, 1).unwrap(), 1.0);
        assert_eq!(
            quasimeasure(&two.scaled(3.0), &p1.scaled_eps(3.0).unwrap())
                .unwrap()
                .eta_value,
            3.0
        );
    }

    #[test]
    fn components_invariant_under_permutation_and_duplication() {
        let g = line(2.0, 41);
        let p = params(&g, 2, 2, vec![0.5, 0.1]);
        let f = FunctionEnsemble::new(
            (0..4)
                .map(|k| SampledFunction::from_scalar_fn(&g, move |x| (x[0] * (k as f64 + 1.0)).cos()).unwrap())
                .collect(),
        )
        .unwrap();
        let shuffled = f.select(&[2, 0, 3, 1, 2, 0]).unwrap();
        assert_eq!(
            quasimeasure(&f, &p).unwrap().components(),
            quasimeasure(&shuffled, &p).unwrap().components()
        );
    }

    #[test]
    fn params_validation() {
        let g = line(2.0, 41);
        let sat = make_saturating(&g, 2).unwrap();
        let h = g.spacing();
        assert!(QuasimeasureParams::new(0, vec![h], vec![0.1], sat.clone()).is_err());
        assert!(QuasimeasureParams::new(1, vec![h, 2.0 * h], vec![0.1], sat.clone()).is_err());
        assert!(QuasimeasureParams::new(1, vec![h], vec![0.1, 0.1], sat.clone()).is_err());
        assert!(matches!(
            QuasimeasureParams::new(1, vec![0.5 * h], vec![0.1], sat.clone()),
            Err(Error::DeltaBelowSpacing { .. })
        ));
        let other = line(2.0, 21);
        let p = QuasimeasureParams::new(1, vec![h], vec![0.1], sat).unwrap();
        assert_eq!(quasimeasure(&constants(&other, &[0.0]), &p), Err(Error::GridMismatch));
    }
}
