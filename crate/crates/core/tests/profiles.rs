use ilab_core::profiles::{
    EquilibriumKind, EquilibriumParams, ProfileNormParams, RadialEquilibrium, ShearProfile,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn couette_is_exact() {
    let u = ShearProfile::couette();
    let e = u.eval(0.5);
    assert_eq!(e[0], 0.5);
    assert_eq!(e[1], 1.0);
    assert_eq!(e[2], 0.0);
    assert_eq!(e[3], 0.0);
}

#[test]
fn tanh_channel_closed_form_slope() {
    let u = ShearProfile::tanh_channel(0.3).unwrap();
    let e = u.eval(0.0);
    assert_eq!(e[0], 0.0);
    assert!((e[1] - 1.0 / 0.3).abs() < 1e-14);
}

#[test]
fn tanh_third_derivative_matches_finite_differences() {
    let u = ShearProfile::tanh_channel(0.3).unwrap();
    let z = 0.1;
    let h = 5e-3;
    let f = |k: f64| u.u(z + k * h);
    // Fourth-order central stencil for the third derivative.
    let fd = (f(-3.0) - 8.0 * f(-2.0) + 13.0 * f(-1.0) - 13.0 * f(1.0) + 8.0 * f(2.0) - f(3.0)) / (8.0 * h * h * h);
    let exact = u.eval(z)[3];
    assert!(((fd - exact) / exact).abs() < 1e-6, "fd {fd} vs {exact}");
}

#[test]
fn derivatives_are_mutually_consistent() {
    let profiles = [
        ShearProfile::tanh_channel(0.3).unwrap(),
        ShearProfile::tanh_channel(0.7).unwrap(),
        ShearProfile::chebyshev_table(vec![0.1, 0.8, -0.2, 0.05]).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for p in &profiles {
        for _ in 0..10 {
            let z = rng.gen_range(-0.9..0.9);
            let e = p.eval(z);
            for k in 0..3 {
                let err = |h: f64| {
                    let fd = (p.eval(z + h)[k] - p.eval(z - h)[k]) / (2.0 * h);
                    (fd - e[k + 1]).abs()
                };
                // Second-order: halving h cuts the error by about four.
                let (e1, e2) = (err(1e-3), err(5e-4));
                assert!(e2 < 1e-3 * e[k + 1].abs().max(1.0), "k={k} z={z} err={e2}");
                if e1 > 1e-9 {
                    assert!(e1 / e2 > 3.0, "k={k} z={z} ratio {}", e1 / e2);
                }
            }
        }
    }
}

#[test]
fn couette_analytic_norm_is_one() {
    let u = ShearProfile::couette();
    for dp in [0.0, 0.1, 0.7] {
        let v = u.analytic_norm(ProfileNormParams { delta_prime: dp, k: 12 }).unwrap();
        assert_eq!(v.value, 1.0);
    }
}

#[test]
fn zero_weight_gives_sup_of_slope() {
    let u = ShearProfile::tanh_channel(0.3).unwrap();
    let v = u.analytic_norm(ProfileNormParams { delta_prime: 0.0, k: 10 }).unwrap();
    assert!((v.value - 1.0 / 0.3).abs() < 1e-12);
}

/// Coefficients of `d^k/dx^k tanh x` as a polynomial in `T = tanh x`.
fn tanh_derivative_polys(kmax: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0, 1.0]];
    for _ in 0..kmax {
        let p = out.last().unwrap();
        // d/dx P(T) = P'(T)(1 − T²)
        let dp: Vec<f64> = (1..p.len()).map(|j| j as f64 * p[j]).collect();
        let mut q = vec![0.0; dp.len() + 2];
        for (j, c) in dp.iter().enumerate() {
            q[j] += c;
            q[j + 2] -= c;
        }
        out.push(q);
    }
    out
}

fn poly(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |a, &b| a * t + b)
}

fn refined_sup(f: impl Fn(f64) -> f64) -> f64 {
    let n = 20000;
    let xs: Vec<f64> = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
    let (i, _) = xs.iter().enumerate().map(|(i, &x)| (i, f(x))).fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
    let (mut a, mut b) = (xs[i.saturating_sub(1)], xs[(i + 1).min(n)]);
    for _ in 0..200 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1) < f(m2) {
            a = m1;
        } else {
            b = m2;
        }
    }
    f(0.5 * (a + b)).max(f(xs[i]))
}

#[test]
fn tanh_analytic_norm_matches_symbolic_derivatives() {
    let d1 = 0.5;
    let (dp, k) = (0.1, 20);
    let polys = tanh_derivative_polys(k + 1);
    let mut oracle = 0.0;
    let mut w = 1.0;
    for j in 0..=k {
        if j > 0 {
            w *= dp / j as f64;
        }
        let c = &polys[j + 1];
        let sup = refined_sup(|z| (poly(c, (z / d1).tanh()) / d1.powi(j as i32 + 1)).abs());
        oracle += w * sup;
    }
    let u = ShearProfile::tanh_channel(d1).unwrap();
    let v = u.analytic_norm(ProfileNormParams { delta_prime: dp, k }).unwrap();
    assert!(((v.value - oracle) / oracle).abs() < 1e-8, "{} vs {oracle}", v.value);
}

fn params(dim: usize) -> EquilibriumParams {
    EquilibriumParams { dim, ..EquilibriumParams::default() }
}

fn trapezoid_mass(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    h * (f.iter().sum::<f64>() - 0.5 * (f[0] + f[n - 1]))
}

#[test]
fn maxwellian_marginal_is_gaussian() {
    for dim in [1, 2, 3] {
        let eq = RadialEquilibrium::maxwellian(params(dim)).unwrap();
        let m = &eq.marginal;
        let f0 = m.eval_f(0.0);
        assert!((f0 - 0.5641895835477563).abs() < 1e-10, "dim {dim}: F(0) = {f0}");
        for &u in &[0.3, 1.1, 2.5] {
            let exact = (-u * u as f64).exp() / std::f64::consts::PI.sqrt();
            assert!((m.eval_f(u) - exact).abs() < 1e-9, "dim {dim} u {u}");
        }
        assert!((trapezoid_mass(&m.f, m.h) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn marginals_are_even_normalized_and_nonnegative() {
    let kinds = [
        EquilibriumKind::Maxwellian,
        EquilibriumKind::Shell { a: 2.5, width: 1.0 },
        EquilibriumKind::Shell { a: 0.8, width: 0.2 },
    ];
    for dim in [1, 3] {
        for kind in kinds {
            let eq = RadialEquilibrium::new(kind, params(dim)).unwrap();
            let m = &eq.marginal;
            let n = m.f.len();
            for j in 0..n {
                assert_eq!(m.f[j], m.f[n - 1 - j]);
                assert_eq!(m.fp[j], -m.fp[n - 1 - j]);
            }
            assert!((trapezoid_mass(&m.f, m.h) - 1.0).abs() < 1e-10, "{kind:?} dim {dim}");
            for i in 0..400 {
                let t = 0.04 * i as f64;
                assert!(eq.mu(t).0 >= 0.0);
            }
        }
    }
}

fn local_maxima(f: impl Fn(f64) -> f64, v_max: f64) -> Vec<f64> {
    let n = 16001;
    let xs: Vec<f64> = (0..n).map(|i| -v_max + 2.0 * v_max * i as f64 / (n - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    (1..n - 1).filter(|&i| ys[i] > ys[i - 1] && ys[i] >= ys[i + 1] && ys[i] > 1e-12).map(|i| xs[i]).collect()
}

#[test]
fn shell_marginal_is_double_humped() {
    for kind in [EquilibriumKind::Shell { a: 2.5, width: 1.0 }, EquilibriumKind::Shell { a: 0.8, width: 0.2 }] {
        let eq = RadialEquilibrium::new(kind, params(1)).unwrap();
        let maxima = local_maxima(|u| eq.marginal.eval_f(u), 8.0);
        assert_eq!(maxima.len(), 2, "{kind:?}: {maxima:?}");
        assert!(maxima[1] > 0.0);
        assert!((maxima[0] + maxima[1]).abs() < 1e-3);
    }
}

#[test]
fn reduction_is_direction_independent() {
    let eq = RadialEquilibrium::maxwellian(params(3)).unwrap();
    let a = eq.marginal_reduce(&[0.0, 0.0, 1.0]).unwrap();
    let b = eq.marginal_reduce(&[1.0, 0.0, 0.0]).unwrap();
    let sup = a.f.iter().zip(&b.f).map(|(x, y)| (x - y).abs()).fold(0.0f64, f64::max);
    assert!(sup < 1e-12);
    assert_eq!(b.eval_fp(0.0), 0.0);
    assert!(eq.marginal_reduce(&[1.0, 0.0]).is_err());
    assert!(eq.marginal_reduce(&[1.0, 1.0, 0.0]).is_err());
}

#[test]
fn shell_marginal_matches_plane_quadrature() {
    let eq = RadialEquilibrium::new(EquilibriumKind::Shell { a: 2.5, width: 1.0 }, params(3)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let d: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nrm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dir: Vec<f64> = d.iter().map(|x| x / nrm).collect();
    let m = eq.marginal_reduce(&dir).unwrap();
    // Trapezoid over the orthogonal plane; spectrally accurate for this smooth, decaying integrand.
    let (l, n) = (8.0, 1600);
    let h = 2.0 * l / n as f64;
    for j in [2048usize, 2300, 2560, 2900, 3300] {
        let u = m.node(j);
        let mut s = 0.0;
        for a in 0..=n {
            let x = -l + h * a as f64;
            for b in 0..=n {
                let y = -l + h * b as f64;
                s += eq.mu(u * u + x * x + y * y).0;
            }
        }
        let oracle = s * h * h;
        assert!((m.f[j] - oracle).abs() < 1e-8 * oracle.max(1e-3), "u = {u}: {} vs {oracle}", m.f[j]);
    }
}

#[test]
fn rejects_bad_parameters() {
    assert!(ShearProfile::tanh_channel(0.0).is_err());
    assert!(ShearProfile::tanh_channel(-1.0).is_err());
    assert!(RadialEquilibrium::new(EquilibriumKind::Shell { a: 2.5, width: 1.0 }, EquilibriumParams { v_max: 3.0, ..params(1) }).is_err());
    assert!(RadialEquilibrium::new(EquilibriumKind::Maxwellian, EquilibriumParams { m: 2, ..params(1) }).is_err());
    assert!(RadialEquilibrium::new(EquilibriumKind::Shell { a: 1.0, width: 0.0 }, params(1)).is_err());
}
