use qmn::{
    chi, eta, hausdorff_distance, kcenter_radius, make_saturating, nonconvexity, omega, picard_solve, Cone,
    FunctionEnsemble32, Grid32, HammersteinProblem32, InnerProfile, KCenterMode, Kernel, Nonlinearity, OuterFactor,
    PointCloud32, SampledFunction32,
};

#[test]
fn geometry_in_f32() {
    let a = PointCloud32::from_scalars(&[0.0, 1.0, 2.0, 3.0]).unwrap();
    assert_eq!(kcenter_radius(&a, 2, KCenterMode::Exhaustive).unwrap(), 1.0f32);
    let b = PointCloud32::new(2, [[0.0f32, 0.0], [1.0, 1.0]]).unwrap();
    let c = PointCloud32::new(2, [[0.0f32, 0.0]]).unwrap();
    assert!((hausdorff_distance(&b, &c).unwrap() - 2f32.sqrt()).abs() < 1e-6);
    let k = nonconvexity(&PointCloud32::from_scalars(&[0.0, 1.0]).unwrap(), 10, 0).unwrap();
    assert!((k - 0.5).abs() < 1e-5);
}

#[test]
fn components_in_f32() {
    let g = Grid32::new(1, 3.0, 61).unwrap();
    let f = FunctionEnsemble32::new(
        [0.0f32, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|&c| SampledFunction32::constant(&g, &[c]).unwrap())
            .collect(),
    )
    .unwrap();
    assert_eq!(eta(&f, 1).unwrap(), 0.5);
    assert_eq!(omega(&f, g.spacing()).unwrap(), 0.0);

    let zero = SampledFunction32::constant(&g, &[0.0]).unwrap();
    let ramp = SampledFunction32::from_scalar_fn(&g, |x| (x[0].abs() - 1.0).clamp(0.0, 1.0)).unwrap();
    let pair = FunctionEnsemble32::new(vec![zero, ramp]).unwrap();
    let sat = make_saturating(&g, 3).unwrap();
    assert_eq!(chi(&pair, &sat, 1, 0.1).unwrap(), 1.0);
    assert_eq!(chi(&pair, &sat, 2, 0.1).unwrap(), 0.0);
}

#[test]
fn fixed_point_in_f32() {
    let g = Grid32::new(1, 2.0, 201).unwrap();
    let k = Kernel::Separable {
        amplitude: 1.0f32,
        outer: OuterFactor::Gaussian { rate: 1.0 },
        inner: InnerProfile::Indicator { lo: 0.0, hi: 1.0 },
    };
    let p = HammersteinProblem32::new(
        &g,
        k,
        Nonlinearity::Affine {
            slope: 0.5,
            offset: 1.0,
        },
        Cone::new(1.0, 0.2).unwrap(),
    )
    .unwrap();
    let f0 = SampledFunction32::constant(&g, &[0.0]).unwrap();
    let r = picard_solve(&p, &f0, 1e-5, 60).unwrap();
    assert!(r.converged);
    let m = 1.0 / (1.0 - 0.5 * 0.746_824_1f32);
    assert!((r.f_star.sup_norm() - m).abs() < 1e-3);
}
