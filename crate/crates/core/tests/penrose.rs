use ilab_core::numerics::roots::{Rect, RootOptions};
use ilab_core::penrose::{
    dispersion, dispersion_3d_check, gamma0_kinetic, growing_mode_kinetic, kinetic_roots, DispersionKernel,
    PenroseOptions,
};
use ilab_core::profiles::{EquilibriumKind, EquilibriumParams, Marginal, RadialEquilibrium};
use ilab_core::{Error, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KERNELS: [DispersionKernel; 2] = [DispersionKernel::Kie, DispersionKernel::Vdb];

fn po() -> PenroseOptions {
    PenroseOptions::default()
}

fn ro() -> RootOptions {
    RootOptions::default()
}

fn maxwellian(dim: usize) -> RadialEquilibrium {
    RadialEquilibrium::maxwellian(EquilibriumParams { dim, ..EquilibriumParams::default() }).unwrap()
}

fn shell() -> RadialEquilibrium {
    RadialEquilibrium::new(EquilibriumKind::Shell { a: 0.8, width: 0.2 }, EquilibriumParams::default()).unwrap()
}

fn search_box() -> Rect {
    Rect::new((0.01, 4.0), (-6.0, 6.0))
}

#[test]
fn dispersion_tends_to_one_at_infinity() {
    let m = maxwellian(1);
    for k in KERNELS {
        for theta in [-1.2, -0.6, 0.0, 0.6, 1.2] {
            let lambda = C64::from_polar(50.0, theta);
            let d = dispersion(&m.marginal, lambda, k, &po()).unwrap();
            assert!((d - 1.0).norm() < 0.01, "{k} {lambda}: {d}");
        }
    }
}

#[test]
fn flat_marginal_gives_unit_dispersion() {
    let m = Marginal::from_fn(4.0, 257, |_| 0.125, |_| 0.0, |_| 0.0).unwrap();
    for k in KERNELS {
        let d = dispersion(&m, C64::new(0.7, -0.3), k, &po()).unwrap();
        assert_eq!(d, C64::new(1.0, 0.0));
    }
}

#[test]
fn maxwellian_dispersion_matches_brute_force_trapezoid() {
    let m = maxwellian(1);
    let lambda = C64::new(0.5, 0.0);
    let pi = std::f64::consts::PI;
    // Closed-form Gaussian F' with a 1e6-node trapezoid on [-8, 8].
    let n = 1_000_000;
    let h = 16.0 / n as f64;
    let mut s = C64::new(0.0, 0.0);
    for j in 0..=n {
        let u = -8.0 + h * j as f64;
        let fp = -2.0 * u * (-u * u).exp() / pi.sqrt();
        let w = if j == 0 || j == n { 0.5 } else { 1.0 };
        s += w * u * u * fp / C64::new(lambda.re, lambda.im + u);
    }
    let oracle = 1.0 + C64::new(0.0, 1.0) * s * h;
    let d = dispersion(&m.marginal, lambda, DispersionKernel::Kie, &po()).unwrap();
    assert!((d - oracle).norm() < 1e-8, "{d} vs {oracle}");
}

#[test]
fn maxwellian_is_stable_for_both_kernels() {
    let m = maxwellian(1);
    for k in KERNELS {
        let r = kinetic_roots(&m.marginal, &Rect::new((0.01, 2.0), (-3.0, 3.0)), k, &ro(), &po()).unwrap();
        assert!(r.roots.is_empty(), "{k}");
        assert_eq!(r.winding, 0);
        let g = gamma0_kinetic(&m.marginal, &Rect::new((0.01, 2.0), (-3.0, 3.0)), k, &ro(), &po());
        assert!(matches!(g, Err(Error::Stable(_))));
    }
}

#[test]
fn double_humped_shell_is_unstable() {
    let eq = shell();
    for k in KERNELS {
        let r = kinetic_roots(&eq.marginal, &search_box(), k, &ro(), &po()).unwrap();
        assert!(!r.roots.is_empty(), "{k}");
        for root in &r.roots {
            assert!(root.z.re > 0.0);
            assert!(root.winding_certified);
            // Real marginal: conjugates are roots too.
            let best = r.roots.iter().map(|q| (q.z - root.z.conj()).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-9, "{k}: missing conjugate of {}", root.z);
        }
    }
}

#[test]
fn gamma0_is_the_polished_root_and_box_independent() {
    let eq = shell();
    for k in KERNELS {
        let g = gamma0_kinetic(&eq.marginal, &search_box(), k, &ro(), &po()).unwrap();
        assert_eq!(g.gamma0, g.lambda0.re);
        assert!(dispersion(&eq.marginal, g.lambda0, k, &po()).unwrap().norm() < 1e-10);
        // The longer contour needs a denser boundary sampling to resolve the phase.
        let dense = RootOptions { min_samples: 2000, ..ro() };
        let big = gamma0_kinetic(&eq.marginal, &Rect::new((0.01, 8.0), (-10.0, 10.0)), k, &dense, &po()).unwrap();
        assert!((big.gamma0 - g.gamma0).abs() < 1e-9);
        assert_eq!(big.search.roots.len(), g.search.roots.len());
    }
}

#[test]
fn floor_is_enforced() {
    let m = maxwellian(1);
    assert!(matches!(dispersion(&m.marginal, C64::new(1e-4, 0.0), DispersionKernel::Kie, &po()), Err(Error::Precondition(_))));
    assert!(kinetic_roots(&m.marginal, &Rect::new((0.0, 1.0), (-1.0, 1.0)), DispersionKernel::Kie, &ro(), &po()).is_err());
}

fn random_direction(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

#[test]
fn three_dimensional_dispersion_reduces_to_one_dimension() {
    let eq = maxwellian(3);
    let r = dispersion_3d_check(&eq, [1.0, 0.0, 0.0], [C64::new(0.0, 0.3), C64::new(0.0, 0.0), C64::new(0.0, 0.0)], 160, &po())
        .unwrap();
    assert!(r.discrepancy < 1e-6, "{}", r.discrepancy);

    // Same n̂·ω along two random directions.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let w1 = C64::new(0.2, 0.4);
    let values: Vec<C64> = (0..2)
        .map(|_| {
            let d = random_direction(&mut rng);
            let omega = [d[0] * w1, d[1] * w1, d[2] * w1];
            dispersion_3d_check(&eq, d, omega, 160, &po()).unwrap().value_3d
        })
        .collect();
    assert!((values[0] - values[1]).norm() < 1e-6, "{values:?}");
}

#[test]
fn three_dimensional_dispersion_tends_to_one() {
    let eq = maxwellian(3);
    let r = dispersion_3d_check(&eq, [0.0, 1.0, 0.0], [C64::new(0.0, 0.0), C64::new(0.0, 40.0), C64::new(0.0, 0.0)], 64, &po());
    let v = match r {
        Ok(r) => r.value_3d,
        Err(e) => panic!("{e}"),
    };
    assert!((v - 1.0).norm() < 0.01, "{v}");
}

#[test]
fn growing_mode_scaling_and_residuals() {
    let eq = shell();
    for k in KERNELS {
        let g = gamma0_kinetic(&eq.marginal, &search_box(), k, &ro(), &po()).unwrap();
        let m1 = growing_mode_kinetic(&eq.marginal, g.lambda0, 1, 512, 8.0, k, &po()).unwrap();
        let m3 = growing_mode_kinetic(&eq.marginal, g.lambda0, 3, 512, 8.0, k, &po()).unwrap();
        assert!((m3.full_eigenvalue - m1.full_eigenvalue * 3.0).norm() < 1e-14 * m3.full_eigenvalue.norm());
        assert!(m1.generator_residual < 1e-6, "{k}: {}", m1.generator_residual);
        assert!(m1.closure_residual < 1e-8, "{k}: {}", m1.closure_residual);
        let mneg = growing_mode_kinetic(&eq.marginal, g.lambda0, -1, 512, 8.0, k, &po()).unwrap();
        assert!((mneg.full_eigenvalue - m1.full_eigenvalue.conj()).norm() < 1e-14);
    }
    let g = gamma0_kinetic(&eq.marginal, &search_box(), DispersionKernel::Kie, &ro(), &po()).unwrap();
    assert!(growing_mode_kinetic(&eq.marginal, g.lambda0 + 0.05, 1, 512, 8.0, DispersionKernel::Kie, &po()).is_err());
}
