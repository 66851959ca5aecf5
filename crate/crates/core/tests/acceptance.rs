//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::fs;
use std::path::Path;
use std::time::Instant;

use ilab_core::cli::{run, ExperimentConfig, Subcommand};
use ilab_core::illposed::{select_parameters, sweep, EigenData, EvolutionMode, Model, ParamRequest, SweepOptions};
use ilab_core::illposed::metivier_data;
use ilab_core::numerics::roots::{Rect, RootOptions};
use ilab_core::penrose::{
    dispersion, dispersion_3d_check, gamma0_kinetic, growing_mode_kinetic, kinetic_roots, DispersionKernel,
    PenroseOptions,
};
use ilab_core::profiles::{EquilibriumKind, EquilibriumParams, RadialEquilibrium, ShearProfile};
use ilab_core::rayleigh::{eigenfunction_hydro, evans, evans_roots, gamma0_hydro, rayleigh_solutions, RayleighOptions, SearchBox};
use ilab_core::semigroup::verify::{random_trials, BoundRequest};
use ilab_core::semigroup::{
    evolve, fit_trajectory, verify_hydro_bound, verify_kinetic_bound, Axis, BoundCheck, HydroGenerator, Integrator,
    KineticGenerator, LinearGenerator, ModeState,
};
use ilab_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

const KERNELS: [DispersionKernel; 2] = [DispersionKernel::Kie, DispersionKernel::Vdb];

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn tanh() -> ShearProfile {
    ShearProfile::tanh_channel(0.3).unwrap()
}

fn hydro_box() -> SearchBox {
    SearchBox::new((-1.0, 1.0), (0.01, 1.0))
}

fn kinetic_box() -> Rect {
    Rect::new((0.01, 4.0), (-6.0, 6.0))
}

fn shell() -> RadialEquilibrium {
    RadialEquilibrium::new(EquilibriumKind::Shell { a: 0.8, width: 0.2 }, EquilibriumParams::default()).unwrap()
}

fn kinetic_lambda(eq: &RadialEquilibrium, k: DispersionKernel) -> Result<C64, String> {
    Ok(gamma0_kinetic(&eq.marginal, &kinetic_box(), k, &RootOptions::default(), &PenroseOptions::default())
        .map_err(e2s)?
        .lambda0)
}

fn couette_closed_form() -> Outcome {
    let t = Instant::now();
    let u = ShearProfile::couette();
    let opts = RayleighOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let c = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(0.05..2.0));
        worst = worst.max((evans(&u, c, &opts).map_err(e2s)?.d - 2.0).norm());
    }
    let r = evans_roots(&u, &SearchBox::new((-2.0, 2.0), (0.05, 2.0)), &opts).map_err(e2s)?;
    let secs = t.elapsed().as_secs_f64();
    check(
        worst < 1e-8 && r.roots.is_empty() && r.winding == 0 && secs < 5.0,
        format!("max |D-2| = {worst:.2e}, {} roots, winding {}, {secs:.2}s", r.roots.len(), r.winding),
    )
}

fn wronskian() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = RayleighOptions::default();
    let mut worst: f64 = 0.0;
    let mut checkpoints = usize::MAX;
    for i in 0..20 {
        let u = match i % 4 {
            0 => ShearProfile::couette(),
            1 | 2 => ShearProfile::tanh_channel(rng.gen_range(0.2..1.0)).map_err(e2s)?,
            _ => ShearProfile::chebyshev_table(vec![
                rng.gen_range(-0.2..0.2),
                rng.gen_range(0.5..1.0),
                rng.gen_range(-0.2..0.2),
                rng.gen_range(-0.1..0.1),
            ])
            .map_err(e2s)?,
        };
        let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.05..1.0));
        let sol = rayleigh_solutions(&u, c, 32, &opts).map_err(e2s)?;
        checkpoints = checkpoints.min(sol.wronskian.len());
        worst = worst.max(sol.max_wronskian_error);
    }
    check(worst < 1e-8 && checkpoints == 5, format!("max |W-1| = {worst:.2e} over 20 pairs x {checkpoints} checkpoints"))
}

fn unstable_tanh() -> Outcome {
    let t = Instant::now();
    let u = tanh();
    let opts = RayleighOptions::default();
    let r = evans_roots(&u, &hydro_box(), &opts).map_err(e2s)?;
    let mut worst_d: f64 = 0.0;
    for root in &r.roots {
        worst_d = worst_d.max(evans(&u, root.z, &opts).map_err(e2s)?.d.norm());
    }
    let g = gamma0_hydro(&u, &hydro_box(), &opts).map_err(e2s)?;
    let e = eigenfunction_hydro(&u, g.c0, 1, 128, &opts).map_err(e2s)?;
    let target = C64::new(0.0, -1.0) * g.c0;
    let a = HydroGenerator::new(&u, 1, 96, true, false).map_err(e2s)?.dominant_eigenvalue();
    let b = HydroGenerator::new(&u, 1, 192, true, false).map_err(e2s)?.dominant_eigenvalue();
    let secs = t.elapsed().as_secs_f64();
    check(
        !r.roots.is_empty()
            && r.roots.iter().all(|x| x.z.im > 0.0)
            && worst_d < 1e-10
            && e.rayleigh_residual < 1e-6
            && (a - target).norm() < 1e-4
            && (a - b).norm() < 1e-6
            && secs < 60.0,
        format!(
            "c0 = {}, |D| = {worst_d:.1e}, residual {:.1e}, |dense - λ| = {:.1e}, doubling {:.1e}, {secs:.1}s",
            g.c0,
            e.rayleigh_residual,
            (a - target).norm(),
            (a - b).norm()
        ),
    )
}

fn spectrum_scaling() -> Outcome {
    let u = tanh();
    let opts = RayleighOptions::default();
    let c0 = gamma0_hydro(&u, &hydro_box(), &opts).map_err(e2s)?.c0;
    let mut worst: f64 = 0.0;
    for n in [1i64, 2, 4] {
        let e = eigenfunction_hydro(&u, c0, n, 96, &opts).map_err(e2s)?;
        let g = HydroGenerator::new(&u, n, 96, true, false).map_err(e2s)?;
        let t = evolve(&g, &ModeState::new(n, 0.0, e.omega), 3.0, 0.01, Integrator::Rk4).map_err(e2s)?;
        let rate = fit_trajectory(&t).map_err(e2s)?.rate;
        worst = worst.max((rate / (n as f64 * c0.im) - 1.0).abs());
    }
    let eq = shell();
    for k in KERNELS {
        let lambda = kinetic_lambda(&eq, k)?;
        for n in [1i64, 2, 4] {
            let m = growing_mode_kinetic(&eq.marginal, lambda, n, 512, 8.0, k, &PenroseOptions::default()).map_err(e2s)?;
            let g = KineticGenerator::new(&eq.marginal, n, 512, 8.0, k, true).map_err(e2s)?;
            let t = evolve(&g, &ModeState::new(n, 0.0, m.f), 3.0, 0.01, Integrator::Rk4).map_err(e2s)?;
            let rate = fit_trajectory(&t).map_err(e2s)?.rate;
            worst = worst.max((rate / (n as f64 * lambda.re) - 1.0).abs());
        }
    }
    check(worst < 0.02, format!("max relative growth-rate error {worst:.2e} (hydro, kie, vdb; n = 1, 2, 4)"))
}

fn transport_isometry() -> Outcome {
    let u = tanh();
    let eq = shell();
    let mut worst: f64 = 0.0;
    let drift = |l2: &[f64]| l2.iter().map(|v| (v / l2[0] - 1.0).abs()).fold(0.0f64, f64::max);
    for n in [1i64, 2, 4] {
        let g = HydroGenerator::new(&u, n, 96, false, false).map_err(e2s)?;
        let h = random_trials(g.axis(), 1, n as u64).remove(0);
        let t = evolve(&g, &ModeState::new(n, 0.0, h), 5.0, 0.01, Integrator::ExactExpm).map_err(e2s)?;
        worst = worst.max(drift(&t.l2()));
        for k in KERNELS {
            let g = KineticGenerator::new(&eq.marginal, n, 512, 8.0, k, false).map_err(e2s)?;
            let h = random_trials(g.axis(), 1, n as u64).remove(0);
            let t = evolve(&g, &ModeState::new(n, 0.0, h), 5.0, 0.01, Integrator::ExactExpm).map_err(e2s)?;
            worst = worst.max(drift(&t.l2()));
        }
    }
    check(worst < 1e-10, format!("max relative L2 drift {worst:.2e} over s in [0, 5]"))
}

fn kinetic_dispersion() -> Outcome {
    let t = Instant::now();
    let po = PenroseOptions::default();
    let ro = RootOptions::default();
    let maxw = RadialEquilibrium::maxwellian(EquilibriumParams::default()).map_err(e2s)?;
    let eq = shell();
    let mut notes = Vec::new();
    let mut ok = true;
    for k in KERNELS {
        let r = kinetic_roots(&maxw.marginal, &Rect::new((0.01, 2.0), (-3.0, 3.0)), k, &ro, &po).map_err(e2s)?;
        ok &= r.winding == 0 && r.roots.is_empty();
        let s = kinetic_roots(&eq.marginal, &kinetic_box(), k, &ro, &po).map_err(e2s)?;
        ok &= s.roots.iter().any(|x| x.z.re > 0.0 && x.winding_certified);
        let mut far: f64 = 0.0;
        for theta in [-1.2, -0.6, 0.0, 0.6, 1.2] {
            far = far.max((dispersion(&maxw.marginal, C64::from_polar(50.0, theta), k, &po).map_err(e2s)? - 1.0).norm());
        }
        ok &= far < 0.01;
        notes.push(format!("{k}: maxwellian winding {}, shell roots {}, |D-1| at 50 = {far:.1e}", r.winding, s.roots.len()));
    }
    let m3 = RadialEquilibrium::maxwellian(EquilibriumParams { dim: 3, ..EquilibriumParams::default() }).map_err(e2s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let d = [v[0] / nrm, v[1] / nrm, v[2] / nrm];
        let w = C64::new(rng.gen_range(0.1..0.5), rng.gen_range(-0.5..0.5));
        let r = dispersion_3d_check(&m3, d, [d[0] * w, d[1] * w, d[2] * w], 160, &po).map_err(e2s)?;
        worst = worst.max(r.discrepancy);
    }
    ok &= worst < 1e-6;
    let secs = t.elapsed().as_secs_f64();
    ok &= secs < 120.0;
    notes.push(format!("3-D discrepancy {worst:.1e}, {secs:.1}s"));
    check(ok, notes.join("; "))
}

fn bound_request(gamma: f64, trials: Vec<Vec<C64>>, check: BoundCheck) -> BoundRequest {
    BoundRequest { n_list: vec![1, 2, 4, 8], delta: 0.8, delta_prime: 0.02, gamma, kmax: 6, s_samples: 40, check, trials }
}

fn bound_sharpness() -> Outcome {
    let u = tanh();
    let opts = RayleighOptions::default();
    let c0 = gamma0_hydro(&u, &hydro_box(), &opts).map_err(e2s)?.c0;
    let g0 = c0.im;
    let e = eigenfunction_hydro(&u, c0, 1, 96, &opts).map_err(e2s)?;
    let mut trials = random_trials(&Axis::chebyshev(96), 4, 42);
    trials.push(e.omega.clone());
    let above = verify_hydro_bound(&u, g0, 96, true, &bound_request(1.1 * g0, trials, BoundCheck::Claim)).map_err(e2s)?;
    let below =
        verify_hydro_bound(&u, g0, 96, true, &bound_request(0.9 * g0, vec![e.omega], BoundCheck::SharpnessProbe)).map_err(e2s)?;
    let mut ok = above.pass && above.slope < 0.01 && !below.pass;
    let mut notes = vec![format!("hydro: slope {:.1e} at 1.1γ0, {:.2} at 0.9γ0", above.slope, below.slope)];
    let eq = shell();
    for k in KERNELS {
        let lambda = kinetic_lambda(&eq, k)?;
        let m = growing_mode_kinetic(&eq.marginal, lambda, 1, 512, 8.0, k, &PenroseOptions::default()).map_err(e2s)?;
        let mut trials = random_trials(&Axis::uniform(8.0, 512), 4, 42);
        trials.push(m.f.clone());
        let g0 = lambda.re;
        let above = verify_kinetic_bound(&eq.marginal, k, 512, 8.0, 4, g0, true, &bound_request(1.1 * g0, trials, BoundCheck::Claim))
            .map_err(e2s)?;
        let below =
            verify_kinetic_bound(&eq.marginal, k, 512, 8.0, 4, g0, true, &bound_request(0.9 * g0, vec![m.f], BoundCheck::SharpnessProbe))
                .map_err(e2s)?;
        ok &= above.pass && above.slope < 0.01 && !below.pass;
        notes.push(format!("{k}: slope {:.1e} at 1.1γ0, {:.2} at 0.9γ0", above.slope, below.slope));
    }
    check(ok, notes.join("; "))
}

fn hydro_eigen() -> Result<EigenData, String> {
    let u = tanh();
    let opts = RayleighOptions::default();
    let c0 = gamma0_hydro(&u, &hydro_box(), &opts).map_err(e2s)?.c0;
    EigenData::hydro(&u, c0, 1, 256, &opts).map_err(e2s)
}

fn linear_sweep() -> Outcome {
    let t = Instant::now();
    let e = hydro_eigen()?;
    let p = select_parameters(&ParamRequest { lambda0: e.lambda0, ..ParamRequest::default() }).map_err(e2s)?;
    let rep = sweep(&p, &Model::Hydro(tanh()), &e, EvolutionMode::Linear, &SweepOptions::default()).map_err(e2s)?;
    let secs = t.elapsed().as_secs_f64();
    let ratios: Vec<String> = rep.records.iter().map(|r| format!("{:.3e}", r.ratio)).collect();
    check(
        rep.records.len() == 4
            && rep.monotone
            && (rep.ratio_slope - rep.predicted_exponent).abs() <= 0.15 * rep.predicted_exponent.abs()
            && secs < 600.0,
        format!(
            "R = [{}], slope {:.3} vs predicted {:.4}, {secs:.1}s",
            ratios.join(", "),
            rep.ratio_slope,
            rep.predicted_exponent
        ),
    )
}

fn data_norm_scaling() -> Outcome {
    let e = hydro_eigen()?;
    let pts: Vec<(f64, f64)> = [0.25, 0.125, 0.0625, 0.03125]
        .iter()
        .map(|&eps: &f64| {
            metivier_data(&e.g, &e.axis, eps, 20, 1, 2.0, 4, None).map(|d| (eps.ln(), d.norms.weighted_hs.ln()))
        })
        .collect::<Result<_, _>>()
        .map_err(e2s)?;
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    check((slope - 18.0).abs() <= 0.05 * 18.0, format!("slope {slope:.3} vs M - s = 18"))
}

fn remainder_subdominance() -> Outcome {
    let t = Instant::now();
    let e = hydro_eigen()?;
    let p = select_parameters(&ParamRequest { lambda0: e.lambda0, ..ParamRequest::default() }).map_err(e2s)?;
    let rep = sweep(&p, &Model::Hydro(tanh()), &e, EvolutionMode::Nonlinear, &SweepOptions::default()).map_err(e2s)?;
    let r = rep.remainder.ok_or("no remainder report")?;
    let sub: Vec<String> = r.records.iter().map(|x| format!("{:.2e}", x.subdominance)).collect();
    check(
        r.exponent_fit >= r.kappa - 0.1 && r.subdominance_decreasing,
        format!(
            "exponent {:.3} vs κ - 0.1 = {:.3}, subdominance [{}], {:.1}s",
            r.exponent_fit,
            r.kappa - 0.1,
            sub.join(", "),
            t.elapsed().as_secs_f64()
        ),
    )
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv") || (n.ends_with(".json") && n != "manifest.json"))
        .map(|n| {
            let b = fs::read(dir.join(&n)).unwrap();
            (n, b)
        })
        .collect();
    v.sort();
    v
}

fn determinism() -> Outcome {
    let dirs = [tempfile::tempdir().map_err(e2s)?, tempfile::tempdir().map_err(e2s)?];
    for d in &dirs {
        let mut cfg = ExperimentConfig::default();
        cfg.output.dir = d.path().to_string_lossy().into_owned();
        cfg.validate().map_err(e2s)?;
        run(&cfg, Subcommand::Report).map_err(e2s)?;
    }
    let (a, b) = (artifacts(dirs[0].path()), artifacts(dirs[1].path()));
    let differing: Vec<&str> = a.iter().zip(&b).filter(|(x, y)| x != y).map(|(x, _)| x.0.as_str()).collect();
    check(
        !a.is_empty() && a.len() == b.len() && differing.is_empty(),
        format!("{} CSV/JSON artifacts compared, {} differ {:?}", a.len(), differing.len(), differing),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("Couette closed form", couette_closed_form),
        ("Wronskian identity", wronskian),
        ("unstable tanh channel", unstable_tanh),
        ("unbounded spectrum scaling", spectrum_scaling),
        ("transport isometry", transport_isometry),
        ("kinetic dispersion", kinetic_dispersion),
        ("semigroup bound sharpness", bound_sharpness),
        ("ill-posedness sweep", linear_sweep),
        ("data-norm scaling", data_norm_scaling),
        ("remainder subdominance", remainder_subdominance),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(msg) => println!("PASS {:>2} {name} [{secs:.1}s]: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{secs:.1}s]: {msg}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
