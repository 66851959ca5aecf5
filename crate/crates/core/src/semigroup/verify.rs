//! Empirical check of the semigroup bound
//! `‖e^{L_n s}h‖_{δ'} e^{(δ−γs)|n|} ≤ C_γ ‖h‖_{δ'} e^{δ|n|}` for `δ − γs > 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::Axis;
use super::generator::{HydroGenerator, KineticGenerator, LinearGenerator};
use super::norms::{mode_norm, AnalyticNormSpec};
use crate::error::{invalid, precondition, Result};
use crate::numerics::linalg::{expm, matvec_cc};
use crate::numerics::stats::linear_fit;
use crate::penrose::DispersionKernel;
use crate::profiles::{Marginal, ProfileNormParams, ShearProfile};
use crate::C64;

/// Whether the run tests the bound (γ > γ₀ required) or probes its sharpness (any γ > 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundCheck {
    Claim,
    SharpnessProbe,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundRequest {
    pub n_list: Vec<i64>,
    pub delta: f64,
    pub delta_prime: f64,
    pub gamma: f64,
    pub kmax: usize,
    /// Number of sampled times in `[0, δ/γ)`.
    pub s_samples: usize,
    pub check: BoundCheck,
    /// Trial data on the generator grid.
    #[serde(skip)]
    pub trials: Vec<Vec<C64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub gamma: f64,
    pub gamma0: f64,
    /// `(n, max ratio)`.
    pub per_n: Vec<(i64, f64)>,
    /// Empirical `C_γ`: maximum ratio over all `n`, `s` and trials.
    pub c_gamma: f64,
    /// Least-squares slope of the per-`n` maxima against `n`.
    pub slope: f64,
    pub pass: bool,
    /// Smallness quantities compared against their threshold.
    pub smallness: Vec<(String, f64, f64)>,
}

const SLOPE_LIMIT: f64 = 0.01;

fn check_gamma(req: &BoundRequest, gamma0: f64) -> Result<()> {
    if req.n_list.is_empty() || req.n_list.contains(&0) {
        return invalid("n-list must be nonempty and exclude 0");
    }
    if req.trials.is_empty() {
        return invalid("at least one trial state is required");
    }
    if !(req.gamma > 0.0 && req.delta > 0.0 && req.delta_prime >= 0.0) {
        return invalid("need γ > 0, δ > 0 and δ' >= 0");
    }
    if req.check == BoundCheck::Claim && req.gamma <= gamma0 {
        return precondition(format!(
            "γ = {} is not above γ₀ = {gamma0}; the bound is false near the unstable mode",
            req.gamma
        ));
    }
    Ok(())
}

fn run<G: LinearGenerator>(gens: Vec<G>, req: &BoundRequest, spec: &AnalyticNormSpec, axis: &Axis) -> Result<Vec<(i64, f64)>> {
    let s_max = req.delta / req.gamma;
    let samples = req.s_samples.max(2);
    let ds = s_max / samples as f64;
    let h_norms: Vec<f64> = req
        .trials
        .iter()
        .map(|h| mode_norm(axis, h, spec).map(|v| v.value))
        .collect::<Result<_>>()?;
    gens.par_iter()
        .map(|g| {
            let n = g.mode();
            let e = expm(&(g.matrix() * C64::new(ds, 0.0)));
            let mut best: f64 = 0.0;
            for (h, hn) in req.trials.iter().zip(&h_norms) {
                if *hn == 0.0 {
                    continue;
                }
                let mut x = h.clone();
                for k in 0..samples {
                    if k > 0 {
                        x = matvec_cc(&e, &x);
                    }
                    let s = ds * k as f64;
                    let v = mode_norm(axis, &x, spec)?.value;
                    best = best.max(v * (-req.gamma * n.unsigned_abs() as f64 * s).exp() / hn);
                }
            }
            Ok((n, best))
        })
        .collect()
}

fn finish(per_n: Vec<(i64, f64)>, req: &BoundRequest, gamma0: f64, smallness: Vec<(String, f64, f64)>) -> BoundReport {
    let ns: Vec<f64> = per_n.iter().map(|p| p.0.unsigned_abs() as f64).collect();
    let cs: Vec<f64> = per_n.iter().map(|p| p.1).collect();
    let slope = if per_n.len() > 1 { linear_fit(&ns, &cs).slope } else { 0.0 };
    let c_gamma = cs.iter().cloned().fold(0.0, f64::max);
    let pass = c_gamma.is_finite() && slope < SLOPE_LIMIT;
    BoundReport { gamma: req.gamma, gamma0, per_n, c_gamma, slope, pass, smallness }
}

/// Bound check for the hydrostatic generator built on `nz` Chebyshev intervals.
pub fn verify_hydro_bound(u: &ShearProfile, gamma0: f64, nz: usize, coupling: bool, req: &BoundRequest) -> Result<BoundReport> {
    check_gamma(req, gamma0)?;
    let p = ProfileNormParams { delta_prime: req.delta_prime, k: 24 };
    let nu = u.analytic_norm(p)?.value;
    let nu1 = u.sup_series(2, p);
    let nu2 = u.l2_analytic_norm(2, p);
    let mut smallness = Vec::new();
    if coupling {
        smallness.push(("delta' |||U|||".to_string(), req.delta_prime * nu, gamma0));
        smallness.push(("delta' (|||U'||| + delta' ||U''||)".to_string(), req.delta_prime * (nu1 + req.delta_prime * nu2), gamma0));
    } else {
        smallness.push(("delta' |||U|||".to_string(), req.delta_prime * nu, req.gamma));
    }
    for (name, v, t) in &smallness {
        if v > t {
            return precondition(format!("smallness condition {name} = {v:.4} exceeds {t:.4}; lower delta'"));
        }
    }
    let base = HydroGenerator::new(u, 1, nz, coupling, false)?;
    let gens = req.n_list.iter().map(|&n| base.with_mode(n)).collect::<Result<Vec<_>>>()?;
    let axis = base.axis().clone();
    if req.trials.iter().any(|t| t.len() != axis.len()) {
        return invalid("trial length does not match the grid");
    }
    let spec = AnalyticNormSpec::hydro(0.0, req.delta_prime, req.kmax);
    let per_n = run(gens, req, &spec, &axis)?;
    Ok(finish(per_n, req, gamma0, smallness))
}

/// Bound check for a kinetic generator.
#[allow(clippy::too_many_arguments)]
pub fn verify_kinetic_bound(
    f: &Marginal,
    kernel: DispersionKernel,
    nv: usize,
    v_max: f64,
    m: u32,
    gamma0: f64,
    coupling: bool,
    req: &BoundRequest,
) -> Result<BoundReport> {
    check_gamma(req, gamma0)?;
    let threshold = if coupling { gamma0 } else { req.gamma };
    let smallness = vec![("delta'".to_string(), req.delta_prime, threshold)];
    if req.delta_prime > threshold {
        return precondition(format!("smallness condition delta' = {} exceeds {threshold:.4}", req.delta_prime));
    }
    let base = KineticGenerator::new(f, 1, nv, v_max, kernel, coupling)?;
    let gens = req.n_list.iter().map(|&n| base.with_mode(n)).collect::<Result<Vec<_>>>()?;
    let axis = base.axis().clone();
    if req.trials.iter().any(|t| t.len() != axis.len()) {
        return invalid("trial length does not match the grid");
    }
    let spec = AnalyticNormSpec::kinetic(0.0, req.delta_prime, req.kmax, m);
    let per_n = run(gens, req, &spec, &axis)?;
    Ok(finish(per_n, req, gamma0, smallness))
}

/// Seeded smooth random trial states on a grid.
pub fn random_trials(axis: &Axis, count: usize, seed: u64) -> Vec<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| match axis {
            Axis::Chebyshev(g) => {
                let a: Vec<C64> = (0..=g.n)
                    .map(|k| {
                        if k > 40 {
                            return C64::new(0.0, 0.0);
                        }
                        let d = (-(k as f64) / 4.0).exp();
                        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * d
                    })
                    .collect();
                g.values_from_coefficients(&a)
            }
            Axis::Uniform(g) => {
                let bumps: Vec<(f64, C64)> = (0..4)
                    .map(|_| (rng.gen_range(-3.0..3.0), C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
                    .collect();
                g.nodes
                    .iter()
                    .map(|&v| bumps.iter().map(|(c, a)| a * (-(v - c) * (v - c)).exp()).sum())
                    .collect()
            }
        })
        .collect()
}
