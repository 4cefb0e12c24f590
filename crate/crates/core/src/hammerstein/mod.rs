//! The Hammerstein operator `(Hf)(x) = int K(x, y) N(f(y)) dy` discretized by
//! the grid's trapezoidal rule, together with numerical checkers for the
//! hypotheses under which it maps a cone ball into itself and contracts the
//! extension component.

mod contraction;
mod kernel;
mod nonlinearity;
mod radius;

pub use contraction::{cone_ball_sampler, estimate_q, estimate_q_with, QEstimate, QTrial};
pub use kernel::{InnerProfile, Kernel, OuterFactor};
pub use nonlinearity::Nonlinearity;
pub use radius::{solve_radius, RadiusSolution};

use crate::ensemble::{same_grid, GridRef, SampledFunction};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `cone(r, c)`: nonnegative functions with `inf_{|x| <= r} f >= c sup f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cone<T> {
    r: T,
    c: T,
}

impl<T: Scalar> Cone<T> {
    pub fn new(r: T, c: T) -> Result<Self> {
        if !(r > T::zero() && r.is_finite()) {
            return Err(Error::invalid("r", "cone radius must be positive"));
        }
        if !(c > T::zero() && c < T::one()) {
            return Err(Error::invalid("c", "cone constant must lie in (0, 1)"));
        }
        Ok(Cone { r, c })
    }

    pub fn r(&self) -> T {
        self.r
    }

    pub fn c(&self) -> T {
        self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeCheck<T> {
    pub member: bool,
    /// `min_{|x| <= r} f(x) - c max_x f(x)`.
    pub margin: T,
}

fn check_scalar_nonneg<T: Scalar>(f: &SampledFunction<T>) -> Result<()> {
    if f.codomain_dim() != 1 {
        return Err(Error::CodomainMismatch {
            left: 1,
            right: f.codomain_dim(),
        });
    }
    if f.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if let Some((node, value)) = f.first_negative() {
        return Err(Error::NegativeValue {
            node,
            value: value.as_f64(),
        });
    }
    Ok(())
}

/// Cone membership with its margin; the zero function is a member.
pub fn cone_check<T: Scalar>(f: &SampledFunction<T>, cone: &Cone<T>) -> Result<ConeCheck<T>> {
    check_scalar_nonneg(f)?;
    let ball = f.grid().nodes_in_ball(cone.r);
    if ball.is_empty() {
        return Err(Error::EmptyBall {
            radius: cone.r.as_f64(),
        });
    }
    let inf = ball.iter().map(|&i| f.scalar(i)).fold(T::infinity(), T::min);
    let sup = f.values().iter().copied().fold(T::zero(), T::max);
    let margin = inf - cone.c * sup;
    Ok(ConeCheck {
        member: margin >= T::zero(),
        margin,
    })
}

/// `max_x sum_j w_j K(x, y_j)`.
pub fn car4_norm<T: Scalar>(kernel: &Kernel<T>, grid: &GridRef<T>) -> T {
    (0..grid.len())
        .map(|i| {
            let x = grid.node(i);
            (0..grid.len())
                .map(|j| grid.weights()[j] * kernel.eval(x, grid.node(j)))
                .sum::<T>()
        })
        .fold(T::zero(), T::max)
}

/// Kernel, nonlinearity and cone on a fixed grid, with the quadrature-weighted
/// kernel matrix `w_j K(x_i, y_j)` precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct HammersteinProblem<T> {
    grid: GridRef<T>,
    kernel: Kernel<T>,
    nonlinearity: Nonlinearity<T>,
    cone: Cone<T>,
    radius: Option<T>,
    matrix: Vec<T>,
    car4: T,
}

impl<T: Scalar> HammersteinProblem<T> {
    pub fn new(grid: &GridRef<T>, kernel: Kernel<T>, nonlinearity: Nonlinearity<T>, cone: Cone<T>) -> Result<Self> {
        kernel.validate()?;
        nonlinearity.validate()?;
        let n = grid.len();
        let mut matrix = Vec::with_capacity(n * n);
        for i in 0..n {
            let x = grid.node(i);
            for j in 0..n {
                let k = kernel.eval(x, grid.node(j));
                if !(k >= T::zero() && k.is_finite()) {
                    return Err(Error::invalid("kernel", format!("value {k} at node pair ({i}, {j})")));
                }
                matrix.push(grid.weights()[j] * k);
            }
        }
        let car4 = matrix
            .chunks_exact(n)
            .map(|r| r.iter().copied().sum::<T>())
            .fold(T::zero(), T::max);
        Ok(HammersteinProblem {
            grid: GridRef::clone(grid),
            kernel,
            nonlinearity,
            cone,
            radius: None,
            matrix,
            car4,
        })
    }

    /// Fixes the radius of the invariant ball.
    pub fn with_radius(mut self, radius: T) -> Result<Self> {
        if !(radius > T::zero() && radius.is_finite()) {
            return Err(Error::invalid("radius", "must be positive and finite"));
        }
        self.radius = Some(radius);
        Ok(self)
    }

    /// Solves for the radius (see [`solve_radius`]) and stores it.
    pub fn with_solved_radius(self) -> Result<(Self, RadiusSolution<T>)> {
        let sol = solve_radius(&self)?;
        Ok((self.with_radius(sol.radius)?, sol))
    }

    pub fn grid(&self) -> &GridRef<T> {
        &self.grid
    }

    pub fn kernel(&self) -> &Kernel<T> {
        &self.kernel
    }

    pub fn nonlinearity(&self) -> &Nonlinearity<T> {
        &self.nonlinearity
    }

    pub fn cone(&self) -> &Cone<T> {
        &self.cone
    }

    pub fn radius(&self) -> Option<T> {
        self.radius
    }

    /// Row sums of the weighted kernel matrix; their maximum is the
    /// (Car4) constant.
    pub fn row_sums(&self) -> Vec<T> {
        self.matrix
            .chunks_exact(self.grid.len())
            .map(|r| r.iter().copied().sum())
            .collect()
    }

    pub fn car4_norm(&self) -> T {
        self.car4
    }

    fn weighted(&self, nv: &[T]) -> Vec<T> {
        self.matrix
            .chunks_exact(self.grid.len())
            .map(|row| row.iter().zip(nv).map(|(&k, &v)| k * v).sum())
            .collect()
    }

    /// `(Hf)(x_i) = sum_j w_j K(x_i, y_j) N(f(y_j))`.
    pub fn apply(&self, f: &SampledFunction<T>) -> Result<SampledFunction<T>> {
        if !same_grid(f.grid(), &self.grid) {
            return Err(Error::GridMismatch);
        }
        check_scalar_nonneg(f)?;
        let nv: Vec<T> = f.values().iter().map(|&z| self.nonlinearity.eval(z)).collect();
        SampledFunction::new(&self.grid, 1, self.weighted(&nv))
    }

    /// `g(R) = max_x sum_j w_j K(x, y_j) zeta(R) - R`.
    pub fn radius_residual(&self, r: T) -> T {
        self.car4 * self.nonlinearity.growth(r) - r
    }

    /// Kernel section `K(., y)` for the node `y`.
    pub fn section(&self, y: usize) -> Result<SampledFunction<T>> {
        let yn = self.grid.node(y);
        SampledFunction::from_scalar_fn(&self.grid, |x| self.kernel.eval(x, yn))
    }

    /// Runs [`cone_check`] on the kernel sections at the sampled nodes.
    pub fn k1_check(&self, sample: &[usize]) -> Result<K1Report<T>> {
        if sample.is_empty() {
            return Err(Error::invalid("sample", "no nodes to check"));
        }
        let mut margins = Vec::with_capacity(sample.len());
        for &y in sample {
            if y >= self.grid.len() {
                return Err(Error::invalid("sample", format!("node {y} out of range")));
            }
            margins.push((y, cone_check(&self.section(y)?, &self.cone)?.margin));
        }
        let worst_margin = margins.iter().map(|m| m.1).fold(T::infinity(), T::min);
        let failing = margins.iter().filter(|m| m.1 < T::zero()).map(|m| m.0).collect();
        Ok(K1Report {
            worst_margin,
            failing,
            margins,
        })
    }

    /// [`Self::k1_check`] on every quadrature node.
    pub fn k1_check_all(&self) -> Result<K1Report<T>> {
        let all: Vec<usize> = (0..self.grid.len()).collect();
        self.k1_check(&all)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct K1Report<T> {
    pub worst_margin: T,
    /// Sampled `y` nodes whose section lies outside the cone.
    pub failing: Vec<usize>,
    pub margins: Vec<(usize, T)>,
}

impl<T> K1Report<T> {
    pub fn passed(&self) -> bool {
        self.failing.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::Grid;
    use crate::sampling::seeded_rng;
    use rand::Rng;

    /// `int_0^1 exp(-y^2) dy`.
    const A: f64 = 0.746_824_132_812_426_9;

    fn separable(outer: OuterFactor<f64>) -> Kernel<f64> {
        Kernel::Separable {
            amplitude: 1.0,
            outer,
            inner: InnerProfile::Indicator { lo: 0.0, hi: 1.0 },
        }
    }

    fn problem(n: usize, kernel: Kernel<f64>, nl: Nonlinearity<f64>) -> HammersteinProblem<f64> {
        let g = Grid::new(1, 2.0, n).unwrap();
        HammersteinProblem::new(&g, kernel, nl, Cone::new(1.0, 0.2).unwrap()).unwrap()
    }

    fn identity() -> Nonlinearity<f64> {
        Nonlinearity::Affine {
            slope: 1.0,
            offset: 0.0,
        }
    }

    #[test]
    fn zero_nonlinearity_gives_zero() {
        let p = problem(
            41,
            separable(OuterFactor::Gaussian { rate: 1.0 }),
            Nonlinearity::Affine {
                slope: 0.0,
                offset: 0.0,
            },
        );
        let f = SampledFunction::from_scalar_fn(p.grid(), |x| x[0] * x[0]).unwrap();
        assert!(p.apply(&f).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_nonlinearity_gives_row_sums() {
        let p = problem(
            41,
            Kernel::Gaussian {
                amplitude: 1.0,
                rate: 2.0,
            },
            Nonlinearity::Affine {
                slope: 0.0,
                offset: 1.0,
            },
        );
        let f = SampledFunction::from_scalar_fn(p.grid(), |x| x[0].abs()).unwrap();
        let g = SampledFunction::constant(p.grid(), &[5.0]).unwrap();
        let hf = p.apply(&f).unwrap();
        assert_eq!(hf, p.apply(&g).unwrap());
        let grid = p.grid();
        for i in 0..grid.len() {
            let direct: f64 = (0..grid.len())
                .map(|j| grid.weights()[j] * (-2.0 * (grid.node(i)[0] - grid.node(j)[0]).powi(2)).exp())
                .sum();
            assert!((hf.scalar(i) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn separable_constant_input_matches_closed_form() {
        // the indicator profile with half weight at 0 and 1 integrates exactly
        let p = problem(201, separable(OuterFactor::Gaussian { rate: 1.0 }), identity());
        let f = SampledFunction::constant(p.grid(), &[2.0]).unwrap();
        let hf = p.apply(&f).unwrap();
        for (i, x) in p.grid().nodes().enumerate() {
            assert!((hf.scalar(i) - 2.0 * (-x[0] * x[0]).exp()).abs() < 1e-12);
        }
    }

    fn smooth_input_error(n: usize) -> f64 {
        let p = problem(n, separable(OuterFactor::Gaussian { rate: 1.0 }), identity());
        let f = SampledFunction::from_scalar_fn(p.grid(), |y| 2.0 * (-y[0] * y[0]).exp()).unwrap();
        let hf = p.apply(&f).unwrap();
        p.grid()
            .nodes()
            .enumerate()
            .map(|(i, x)| (hf.scalar(i) - 2.0 * A * (-x[0] * x[0]).exp()).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn quadrature_is_second_order() {
        let coarse = smooth_input_error(201);
        let fine = smooth_input_error(401);
        assert!(coarse <= 1e-3);
        let ratio = coarse / fine;
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = problem(21, separable(OuterFactor::Constant), identity());
        let neg = SampledFunction::from_scalar_fn(p.grid(), |x| x[0]).unwrap();
        assert!(matches!(p.apply(&neg), Err(Error::NegativeValue { node: 0, .. })));
        let other = Grid::new(1, 2.0, 31).unwrap();
        let f = SampledFunction::constant(&other, &[1.0]).unwrap();
        assert_eq!(p.apply(&f), Err(Error::GridMismatch));
        assert!(Cone::new(1.0, 1.0).is_err());
        assert!(Cone::new(0.0, 0.5).is_err());
        assert!(Nonlinearity::Affine {
            slope: -1.0,
            offset: 0.0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn car4_norm_examples() {
        let g = Grid::new(1, 2.0, 201).unwrap();
        let k = separable(OuterFactor::Gaussian { rate: 1.0 });
        assert!((car4_norm(&k, &g) - 1.0).abs() < 1e-12);
        assert_eq!(car4_norm(&k.scaled(0.0), &g), 0.0);
        let gk = Kernel::Gaussian {
            amplitude: 1.0,
            rate: 1.0,
        };
        assert_eq!(car4_norm(&gk.scaled(4.0), &g), 4.0 * car4_norm(&gk, &g));
        let s = 2.5;
        assert!((car4_norm(&gk.scaled(s), &g) - s * car4_norm(&gk, &g)).abs() <= 1e-14 * s);
        let p = problem(201, k, identity());
        assert_eq!(p.car4_norm(), car4_norm(&k, &g));
    }

    #[test]
    fn cone_check_examples() {
        let g: GridRef<f64> = Grid::new(1, 3.0, 61).unwrap();
        let cone = Cone::new(1.0, 0.2).unwrap();
        let c = SampledFunction::constant(&g, &[4.0]).unwrap();
        assert!(cone_check(&c, &Cone::new(1.0, 0.99).unwrap()).unwrap().member);
        let gauss = SampledFunction::from_scalar_fn(&g, |x| (-x[0] * x[0]).exp()).unwrap();
        let r = cone_check(&gauss, &cone).unwrap();
        assert!(r.member);
        assert!((r.margin - ((-1.0f64).exp() - 0.2)).abs() < 1e-12);
        let ramp = SampledFunction::from_scalar_fn(&g, |x| x[0].max(0.0)).unwrap();
        let r = cone_check(&ramp, &Cone::new(1.0, 0.5).unwrap()).unwrap();
        assert!(!r.member);
        assert_eq!(r.margin, -1.5);
        let zero = SampledFunction::constant(&g, &[0.0]).unwrap();
        assert_eq!(
            cone_check(&zero, &cone).unwrap(),
            ConeCheck {
                member: true,
                margin: 0.0
            }
        );
        let sparse = Grid::new(1, 3.0, 2).unwrap();
        let f = SampledFunction::constant(&sparse, &[1.0]).unwrap();
        assert!(matches!(cone_check(&f, &cone), Err(Error::EmptyBall { .. })));
    }

    #[test]
    fn k1_examples() {
        let p = problem(41, separable(OuterFactor::Gaussian { rate: 1.0 }), identity());
        let inside: Vec<usize> = p.grid().nodes_in_box(1.0);
        // sections vanish where the profile does, so sample where b > 0
        let support: Vec<usize> = inside.into_iter().filter(|&j| p.grid().node(j)[0] >= 0.0).collect();
        assert!(p.k1_check(&support).unwrap().passed());
        let q = problem(41, separable(OuterFactor::PositivePart), identity());
        let r = q.k1_check(&support).unwrap();
        assert!(!r.passed());
        assert_eq!(r.failing.len(), support.len());
        let gk = problem(
            41,
            Kernel::Gaussian {
                amplitude: 1.0,
                rate: 0.05,
            },
            identity(),
        );
        let r = gk.k1_check_all().unwrap();
        assert_eq!(r.margins.len(), 41);
        assert!(gk.k1_check(&[]).is_err());
    }

    #[test]
    fn apply_is_monotone() {
        let p = problem(
            61,
            Kernel::Laplace {
                amplitude: 0.7,
                rate: 1.3,
            },
            Nonlinearity::Saturating { gain: 0.9 },
        );
        let mut rng = seeded_rng(8);
        for _ in 0..20 {
            let f: Vec<f64> = (0..61).map(|_| rng.random_range(0.0..3.0)).collect();
            let g: Vec<f64> = f.iter().map(|v| v + rng.random_range(0.0..1.0)).collect();
            let hf = p.apply(&SampledFunction::new(p.grid(), 1, f).unwrap()).unwrap();
            let hg = p.apply(&SampledFunction::new(p.grid(), 1, g).unwrap()).unwrap();
            assert!(hf.values().iter().zip(hg.values()).all(|(a, b)| a <= b));
        }
    }

    #[test]
    fn cone_invariance_chain() {
        let g = Grid::new(1, 2.0, 81).unwrap();
        let kernel = Kernel::Separable {
            amplitude: 1.0,
            outer: OuterFactor::Gaussian { rate: 0.5 },
            inner: InnerProfile::Gaussian { rate: 1.0 },
        };
        let p = HammersteinProblem::new(
            &g,
            kernel,
            Nonlinearity::Sqrt { gain: 1.0 },
            Cone::new(1.0, 0.5).unwrap(),
        )
        .unwrap();
        assert!(p.k1_check_all().unwrap().passed());
        let mut rng = seeded_rng(2);
        for _ in 0..50 {
            let f: Vec<f64> = (0..g.len()).map(|_| rng.random_range(0.0..5.0)).collect();
            let hf = p.apply(&SampledFunction::new(&g, 1, f).unwrap()).unwrap();
            assert!(cone_check(&hf, p.cone()).unwrap().margin >= -1e-9);
        }
    }

    #[test]
    fn radius_chain() {
        let g = Grid::new(1, 2.0, 81).unwrap();
        let kernel = Kernel::Gaussian {
            amplitude: 0.4,
            rate: 1.0,
        };
        let p = HammersteinProblem::new(
            &g,
            kernel,
            Nonlinearity::Affine {
                slope: 0.5,
                offset: 1.0,
            },
            Cone::new(1.0, 0.3).unwrap(),
        )
        .unwrap();
        let (p, sol) = p.with_solved_radius().unwrap();
        let r = sol.radius;
        let mut rng = seeded_rng(4);
        for _ in 0..50 {
            let f: Vec<f64> = (0..g.len()).map(|_| rng.random_range(0.0..=r)).collect();
            let hf = p.apply(&SampledFunction::new(&g, 1, f).unwrap()).unwrap();
            assert!(hf.values().iter().all(|&v| v <= r + 1e-9));
        }
        let top = p.apply(&SampledFunction::constant(&g, &[r]).unwrap()).unwrap();
        assert!((top.sup_norm() - r).abs() <= 1e-9);
    }
}
