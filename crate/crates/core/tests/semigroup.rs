use ilab_core::numerics::roots::{Rect, RootOptions};
use ilab_core::penrose::{gamma0_kinetic, growing_mode_kinetic, DispersionKernel, PenroseOptions};
use ilab_core::profiles::{EquilibriumKind, EquilibriumParams, RadialEquilibrium, ShearProfile};
use ilab_core::rayleigh::{eigenfunction_hydro, gamma0_hydro, RayleighOptions, SearchBox};
use ilab_core::semigroup::norms::field_analytic_norm;
use ilab_core::semigroup::verify::{random_trials, BoundRequest};
use ilab_core::semigroup::{
    analytic_norm, caflisch_norm, evolve, fit_growth_rate, fit_trajectory, verify_hydro_bound, verify_kinetic_bound,
    AnalyticNormSpec, Axis, BoundCheck, CaflischNormSpec, HydroGenerator, Integrator, KineticGenerator,
    LinearGenerator, ModeState, NormTable, SpectralField,
};
use ilab_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tanh() -> ShearProfile {
    ShearProfile::tanh_channel(0.3).unwrap()
}

fn c0() -> C64 {
    gamma0_hydro(&tanh(), &SearchBox::new((-1.0, 1.0), (0.01, 1.0)), &RayleighOptions::default()).unwrap().c0
}

fn shell() -> RadialEquilibrium {
    RadialEquilibrium::new(EquilibriumKind::Shell { a: 0.8, width: 0.2 }, EquilibriumParams::default()).unwrap()
}

fn kinetic_root(eq: &RadialEquilibrium, k: DispersionKernel) -> C64 {
    gamma0_kinetic(&eq.marginal, &Rect::new((0.01, 4.0), (-6.0, 6.0)), k, &RootOptions::default(), &PenroseOptions::default())
        .unwrap()
        .lambda0
}

fn max_abs_re(ev: &[C64]) -> f64 {
    ev.iter().map(|e| e.re.abs()).fold(0.0, f64::max)
}

#[test]
fn couette_generator_is_skew() {
    let g = HydroGenerator::new(&ShearProfile::couette(), 1, 64, true, false).unwrap();
    assert!(max_abs_re(&g.eigenvalues()) < 1e-10);
}

#[test]
fn hydro_generator_reproduces_the_evans_root() {
    let c = c0();
    let expected = C64::new(0.0, -1.0) * c;
    let a = HydroGenerator::new(&tanh(), 1, 96, true, false).unwrap().dominant_eigenvalue();
    let b = HydroGenerator::new(&tanh(), 1, 192, true, false).unwrap().dominant_eigenvalue();
    assert!((a - expected).norm() < 1e-4, "{a} vs {expected}");
    assert!((a - b).norm() < 1e-6, "{a} vs {b}");
}

#[test]
fn kinetic_transport_is_skew() {
    let eq = shell();
    for k in [DispersionKernel::Kie, DispersionKernel::Vdb] {
        let g = KineticGenerator::new(&eq.marginal, 1, 128, 8.0, k, false).unwrap();
        assert!(max_abs_re(&g.eigenvalues()) < 1e-10);
    }
}

#[test]
fn kinetic_generator_reproduces_the_dispersion_root() {
    let eq = shell();
    for k in [DispersionKernel::Kie, DispersionKernel::Vdb] {
        let lambda = kinetic_root(&eq, k);
        let g = KineticGenerator::new(&eq.marginal, 1, 512, 8.0, k, true).unwrap();
        let d = g.dominant_eigenvalue();
        assert!((d - lambda).norm() < 1e-4, "{k}: {d} vs {lambda}");
    }
}

#[test]
fn maxwellian_generator_has_no_growth_beyond_resolution() {
    let eq = RadialEquilibrium::maxwellian(EquilibriumParams::default()).unwrap();
    for k in [DispersionKernel::Kie, DispersionKernel::Vdb] {
        let top = |nv: usize| {
            KineticGenerator::new(&eq.marginal, 1, nv, 8.0, k, true).unwrap().dominant_eigenvalue().re
        };
        let (coarse, fine) = (top(256), top(512));
        // Any positive real part is a discretization artifact and must shrink under refinement.
        assert!(fine < 1e-3 || fine < 0.5 * coarse, "{k}: {coarse} -> {fine}");
    }
}

#[test]
fn transport_preserves_l2() {
    let u = tanh();
    let g = HydroGenerator::new(&u, 3, 96, false, false).unwrap();
    let h = random_trials(g.axis(), 1, 9).remove(0);
    let t = evolve(&g, &ModeState::new(3, 0.0, h), 5.0, 0.01, Integrator::ExactExpm).unwrap();
    let l2 = t.l2();
    let drift = l2.iter().map(|v| (v / l2[0] - 1.0).abs()).fold(0.0f64, f64::max);
    assert!(drift < 1e-10, "{drift}");
    assert!(fit_trajectory(&t).unwrap().rate.abs() < 1e-6);

    let eq = shell();
    let g = KineticGenerator::new(&eq.marginal, 2, 512, 8.0, DispersionKernel::Vdb, false).unwrap();
    let h = random_trials(g.axis(), 1, 10).remove(0);
    let t = evolve(&g, &ModeState::new(2, 0.0, h), 5.0, 0.01, Integrator::ExactExpm).unwrap();
    let l2 = t.l2();
    let drift = l2.iter().map(|v| (v / l2[0] - 1.0).abs()).fold(0.0f64, f64::max);
    assert!(drift < 1e-10, "{drift}");
}

#[test]
fn eigenfunction_grows_at_its_eigenvalue() {
    let u = tanh();
    let c = c0();
    for n in [1, 2, 4] {
        let e = eigenfunction_hydro(&u, c, n, 96, &RayleighOptions::default()).unwrap();
        let g = HydroGenerator::new(&u, n, 96, true, false).unwrap();
        let t = evolve(&g, &ModeState::new(n, 0.0, e.omega), 3.0, 0.01, Integrator::Rk4).unwrap();
        let l2 = t.l2();
        let expected = (e.lambda.re * 3.0).exp() * l2[0];
        assert!((l2.last().unwrap() / expected - 1.0).abs() < 0.02);
        let rate = fit_trajectory(&t).unwrap().rate;
        assert!((rate / (n as f64 * c.im) - 1.0).abs() < 0.02);
    }
}

#[test]
fn kinetic_eigenfunction_grows_at_its_eigenvalue() {
    let eq = shell();
    for k in [DispersionKernel::Kie, DispersionKernel::Vdb] {
        let lambda = kinetic_root(&eq, k);
        for n in [1i64, 2, 4, -2] {
            let m = growing_mode_kinetic(&eq.marginal, lambda, n, 512, 8.0, k, &PenroseOptions::default()).unwrap();
            let g = KineticGenerator::new(&eq.marginal, n, 512, 8.0, k, true).unwrap();
            let t = evolve(&g, &ModeState::new(n, 0.0, m.f), 3.0, 0.01, Integrator::Rk4).unwrap();
            let rate = fit_trajectory(&t).unwrap().rate;
            assert!((rate / (n.unsigned_abs() as f64 * lambda.re) - 1.0).abs() < 0.02, "{k} n={n}: {rate}");
        }
    }
}

#[test]
fn zero_state_stays_zero() {
    let g = HydroGenerator::new(&tanh(), 1, 32, true, false).unwrap();
    let t = evolve(&g, &ModeState::new(1, 0.0, vec![C64::new(0.0, 0.0); 33]), 1.0, 0.1, Integrator::Rk4).unwrap();
    assert!(t.l2().iter().all(|v| *v == 0.0));
}

#[test]
fn synthetic_exponential_growth_is_recovered() {
    let times: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
    let norms: Vec<f64> = times.iter().map(|s| 2.5 * (0.3 * s).exp()).collect();
    let fit = fit_growth_rate(&times, &norms).unwrap();
    assert!((fit.rate - 0.3).abs() < 1e-6);
}

#[test]
fn random_data_locks_onto_the_dominant_eigenvalue() {
    let g = HydroGenerator::new(&tanh(), 1, 96, true, false).unwrap();
    let dominant = g.dominant_eigenvalue().re;
    let h = random_trials(g.axis(), 1, 21).remove(0);
    let t = evolve(&g, &ModeState::new(1, 0.0, h), 40.0, 0.05, Integrator::ExactExpm).unwrap();
    let rate = fit_trajectory(&t).unwrap().rate;
    assert!((rate / dominant - 1.0).abs() < 0.02, "{rate} vs {dominant}");
}

#[test]
fn constant_mode_norm_is_closed_form() {
    let axis = Axis::chebyshev(96);
    let ones = vec![C64::new(1.0, 0.0); axis.len()];
    for delta in [0.0, 0.3, 1.0] {
        let v = analytic_norm(&axis, &[ModeState::new(1, 0.0, ones.clone())], &AnalyticNormSpec::hydro(delta, 0.2, 6)).unwrap();
        let exact = 2f64.sqrt() * delta.exp();
        assert!((v.value - exact).abs() < 1e-12 * exact, "{} vs {exact}", v.value);
    }
}

fn random_field(rng: &mut ChaCha8Rng, axis: &Axis, n_max: usize) -> SpectralField {
    let mut f = SpectralField::zeros(axis.clone(), n_max);
    let nodes = axis.nodes().to_vec();
    for (n, m) in f.modes.iter_mut().enumerate() {
        let a = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * (-(n as f64)).exp();
        let k = rng.gen_range(0.5..2.0);
        for (v, z) in m.iter_mut().zip(&nodes) {
            *v = a * (k * z).cos();
        }
    }
    f
}

#[test]
fn norm_is_monotone_and_controls_y_derivatives() {
    let axis = Axis::chebyshev(96);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let f = random_field(&mut rng, &axis, 6);
        let norm = |d: f64, dp: f64, f: &SpectralField| field_analytic_norm(f, &AnalyticNormSpec::hydro(d, dp, 6)).unwrap().value;
        assert!(norm(0.6, 0.2, &f) >= norm(0.4, 0.1, &f));
        assert!(norm(0.4, 0.2, &f) >= norm(0.4, 0.1, &f));
        let mut dy = f.clone();
        for (n, m) in dy.modes.iter_mut().enumerate() {
            for v in m.iter_mut() {
                *v *= C64::new(0.0, n as f64);
            }
        }
        let (d, d1) = (0.5, 1.0);
        assert!(norm(d, 0.1, &dy) <= d1 / (d1 - d) * norm(d1, 0.1, &f));
    }
}

fn caflisch_spec() -> CaflischNormSpec {
    CaflischNormSpec {
        delta0: 2.0,
        delta0_prime: 0.1,
        gamma1: 0.6,
        gamma: 0.5,
        big_m: 20.0,
        k0: 1.0,
        eps: 0.25,
        kmax: 4,
        n_trunc: 2,
        m: 0,
    }
}

#[test]
fn caflisch_norm_of_zero_is_zero() {
    let axis = Axis::chebyshev(32);
    let z = SpectralField::zeros(axis, 2);
    let tables = vec![NormTable::new(&z, 4, 2, 0); 5];
    let times = [0.0, 0.5, 1.0, 1.5, 2.0];
    let v = caflisch_norm(&times, &tables, &caflisch_spec(), &[0.0, 0.5, 1.0]).unwrap();
    assert_eq!(v.value, 0.0);
}

#[test]
fn caflisch_norm_matches_direct_evaluation_and_grows_with_the_grid() {
    let axis = Axis::chebyshev(32);
    let mut f = SpectralField::zeros(axis.clone(), 2);
    let nodes = axis.nodes().to_vec();
    for (v, z) in f.modes[1].iter_mut().zip(&nodes) {
        *v = C64::new((0.7 * z).cos(), 0.2 * z);
    }
    let spec = caflisch_spec();
    let times: Vec<f64> = (0..9).map(|i| 0.25 * i as f64).collect();
    let tables = vec![NormTable::new(&f, spec.kmax, spec.n_trunc, 0); times.len()];
    let coarse: Vec<f64> = (0..5).map(|i| 0.4 * i as f64).collect();
    let fine: Vec<f64> = (0..17).map(|i| 0.1 * i as f64).collect();
    let a = caflisch_norm(&times, &tables, &spec, &coarse).unwrap();
    let b = caflisch_norm(&times, &tables, &spec, &fine).unwrap();
    assert!(b.value >= a.value);

    // Direct evaluation at the attaining sample: mode ±1 only, so the y-derivative
    // weight is the same series and the z-derivative series is shifted by one.
    let dp = spec.delta_prime(b.delta);
    let norms = axis.derivative_norms(&f.modes[1], spec.kmax + 1, 0);
    let series = |a: &[f64]| {
        let mut w = 1.0;
        let mut s = 0.0;
        for (k, v) in a.iter().enumerate() {
            if k > 0 {
                w *= dp / k as f64;
            }
            s += v * w;
        }
        s
    };
    let e = 2.0 * b.delta.exp();
    let s0 = series(&norms[..=spec.kmax]);
    let s1 = series(&norms[1..=spec.kmax + 1]);
    let gap = spec.delta0 - b.delta - spec.gamma1 * b.s;
    let coef = spec.big_m.powf(-spec.gamma) * spec.eps.ln().abs().powf(-spec.gamma);
    let direct = e * s0 + gap.powf(spec.gamma) * (e * s0 + coef * e * s1);
    assert!((direct - b.value).abs() < 1e-12 * direct, "{direct} vs {}", b.value);
    // The field is stationary, so the supremum sits at s = 0.
    assert_eq!(b.s, 0.0);
}

fn request(gamma: f64, n_list: Vec<i64>, trials: Vec<Vec<C64>>, check: BoundCheck) -> BoundRequest {
    BoundRequest { n_list, delta: 0.8, delta_prime: 0.02, gamma, kmax: 6, s_samples: 40, check, trials }
}

#[test]
fn transport_bound_constant_is_one() {
    let u = tanh();
    let trials = random_trials(&Axis::chebyshev(96), 3, 2);
    let r = verify_hydro_bound(&u, 0.58, 96, false, &request(0.5, vec![1, 2, 4], trials, BoundCheck::SharpnessProbe)).unwrap();
    assert!((r.c_gamma - 1.0).abs() < 1e-8, "{}", r.c_gamma);
    assert!(r.pass);
}

#[test]
fn hydro_bound_is_sharp_at_gamma0() {
    let u = tanh();
    let c = c0();
    let e = eigenfunction_hydro(&u, c, 1, 96, &RayleighOptions::default()).unwrap();
    let mut trials = random_trials(&Axis::chebyshev(96), 4, 42);
    trials.push(e.omega.clone());
    let ns = vec![1, 2, 4, 8];
    let above = verify_hydro_bound(&u, c.im, 96, true, &request(1.1 * c.im, ns.clone(), trials, BoundCheck::Claim)).unwrap();
    assert!(above.pass, "slope {}", above.slope);
    let below =
        verify_hydro_bound(&u, c.im, 96, true, &request(0.9 * c.im, ns.clone(), vec![e.omega.clone()], BoundCheck::SharpnessProbe))
            .unwrap();
    assert!(!below.pass);
    assert!(below.per_n.windows(2).all(|w| w[1].1 > w[0].1));
    // The claim mode refuses γ below γ₀.
    assert!(verify_hydro_bound(&u, c.im, 96, true, &request(0.9 * c.im, ns, vec![e.omega], BoundCheck::Claim)).is_err());
}

#[test]
fn kinetic_bound_is_sharp_at_gamma0() {
    let eq = shell();
    let k = DispersionKernel::Vdb;
    let lambda = kinetic_root(&eq, k);
    let nv = 256;
    let mode = growing_mode_kinetic(&eq.marginal, lambda, 1, nv, 8.0, k, &PenroseOptions::default()).unwrap();
    let ns = vec![1, 2, 4];
    let mut trials = random_trials(&Axis::uniform(8.0, nv), 2, 1);
    trials.push(mode.f.clone());
    let above = verify_kinetic_bound(&eq.marginal, k, nv, 8.0, 4, lambda.re, true, &request(1.1 * lambda.re, ns.clone(), trials, BoundCheck::Claim))
        .unwrap();
    assert!(above.pass, "slope {}", above.slope);
    let below =
        verify_kinetic_bound(&eq.marginal, k, nv, 8.0, 4, lambda.re, true, &request(0.9 * lambda.re, ns, vec![mode.f], BoundCheck::SharpnessProbe))
            .unwrap();
    assert!(!below.pass);
}

#[test]
fn matrix_form_third_row_is_the_z_derivative_of_the_generator() {
    let u = tanh();
    for n in [1i64, 3] {
        let g = HydroGenerator::new(&u, n, 64, true, true).unwrap();
        let grid = g.grid().clone();
        let w: Vec<C64> = grid.x.iter().map(|&z| C64::new((1.3 * z).sin() + 0.2, (0.7 * z).cos())).collect();
        let d1 = |v: &[C64]| -> Vec<C64> {
            (0..v.len()).map(|i| (0..v.len()).map(|j| v[j] * grid.d1[(i, j)]).sum()).collect()
        };
        let lw = g.apply(&w);
        let lhs = d1(&lw);
        let w2: Vec<C64> = w.iter().map(|v| v * C64::new(0.0, n as f64)).collect();
        let rhs = g.matrix_form_third_row(&w2, &d1(&w)).unwrap();
        let scale = lhs.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        let err = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).fold(0.0f64, f64::max);
        assert!(err < 1e-8 * scale, "n={n}: {err} vs {scale}");
    }
    let plain = HydroGenerator::new(&u, 1, 32, true, false).unwrap();
    assert!(plain.matrix_form_third_row(&[], &[]).is_err());
}
