use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Inputs of [`select_parameters`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamRequest {
    pub s: f64,
    pub alpha: f64,
    pub k: f64,
    pub d: f64,
    /// `⟨·⟩^m` weight exponent.
    pub m: u32,
    pub big_m: u32,
    pub beta: f64,
    pub lambda0: C64,
    pub k0: f64,
    pub gamma: f64,
    pub delta0_prime: f64,
    /// L² norm given to the growing mode `g` before it is scaled by `ε^M`.
    pub amplitude: f64,
    pub eps_list: Vec<f64>,
}

impl Default for ParamRequest {
    fn default() -> Self {
        Self {
            s: 2.0,
            alpha: 1.0,
            k: 1.0,
            d: 1.0,
            m: 4,
            big_m: 20,
            beta: 0.02,
            lambda0: C64::new(0.5, 0.0),
            k0: 1.0,
            gamma: 0.5,
            delta0_prime: 0.1,
            amplitude: 1e-3,
            eps_list: vec![0.25, 0.125, 0.0625, 0.03125],
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EpsSchedule {
    pub eps: f64,
    /// `δ₀ = (1 − β)M|log ε|/k₀`.
    pub delta0: f64,
    /// `s_ε = δ₀/γ₁`.
    pub s_eps: f64,
    /// `t_ε = ε s_ε`.
    pub t_eps: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IllposedParams {
    pub s: f64,
    pub alpha: f64,
    pub k: f64,
    pub d: f64,
    pub m: u32,
    pub big_m: u32,
    pub beta: f64,
    /// `α' = (M − s)α/M − (1 + 2dk)/(2M)`.
    pub alpha_prime: f64,
    /// `κ = 2βM/(1 + β)`.
    pub kappa: f64,
    pub k0: f64,
    pub lambda0: C64,
    /// `γ₁ = (1 + β) Re λ₀ / k₀`.
    pub gamma1: f64,
    pub delta0_prime: f64,
    pub gamma: f64,
    pub amplitude: f64,
    /// Approximation parameter of the spectrum; exactly zero for spectra linear in `n`.
    pub eta: f64,
    pub schedule: Vec<EpsSchedule>,
    /// `M(2β/(1 + β) − α')`.
    pub predicted_exponent: f64,
}

fn violated(msg: impl Into<String>) -> Error {
    Error::Admissibility(msg.into())
}

/// Derives the full parameter bundle and checks admissibility.
pub fn select_parameters(r: &ParamRequest) -> Result<IllposedParams> {
    if !(r.lambda0.re > 0.0) {
        return Err(violated(format!("Re λ₀ = {} must be positive", r.lambda0.re)));
    }
    if !(r.alpha > 0.0 && r.alpha <= 1.0) {
        return Err(violated(format!("α = {} must lie in (0, 1]", r.alpha)));
    }
    if !(r.s >= 0.0 && r.k > 0.0 && r.d >= 1.0) {
        return Err(violated("need s >= 0, k > 0 and d >= 1"));
    }
    if r.big_m == 0 {
        return Err(violated("M must be a positive integer"));
    }
    if !(r.beta > 0.0) {
        return Err(violated(format!("β = {} must be positive", r.beta)));
    }
    if !(r.k0 >= 1.0) {
        return Err(violated(format!("k₀ = {} must be >= 1", r.k0)));
    }
    if !(r.gamma > 0.0 && r.gamma < 1.0) {
        return Err(violated(format!("γ = {} must lie in (0, 1)", r.gamma)));
    }
    if !(r.delta0_prime > 0.0) {
        return Err(violated("δ₀' must be positive"));
    }
    if !(r.amplitude > 0.0 && r.amplitude.is_finite()) {
        return Err(violated("data amplitude must be positive"));
    }
    if r.m < 4 {
        return Err(violated(format!("weight exponent m = {} must be >= 4", r.m)));
    }
    if r.eps_list.is_empty() || r.eps_list.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(violated("every ε must lie in (0, 1)"));
    }
    let m = r.big_m as f64;
    let alpha_prime = (m - r.s) * r.alpha / m - (1.0 + 2.0 * r.d * r.k) / (2.0 * m);
    if !(alpha_prime > 0.0) {
        return Err(violated(format!("α' = {alpha_prime} must be positive (increase M)")));
    }
    if !(r.beta * m < 0.5) {
        return Err(violated(format!("βM = {} must be below 1/2", r.beta * m)));
    }
    let ratio = 2.0 * r.beta / (1.0 + r.beta);
    if !(ratio < alpha_prime) {
        return Err(violated(format!("2β/(1+β) = {ratio} must be below α' = {alpha_prime}")));
    }
    let kappa = 2.0 * r.beta * m / (1.0 + r.beta);
    let gamma1 = (1.0 + r.beta) * r.lambda0.re / r.k0;
    let schedule = r
        .eps_list
        .iter()
        .map(|&eps| {
            let delta0 = (1.0 - r.beta) * m * eps.ln().abs() / r.k0;
            let s_eps = delta0 / gamma1;
            EpsSchedule { eps, delta0, s_eps, t_eps: eps * s_eps }
        })
        .collect();
    let predicted_exponent = m * (ratio - alpha_prime);
    Ok(IllposedParams {
        s: r.s,
        alpha: r.alpha,
        k: r.k,
        d: r.d,
        m: r.m,
        big_m: r.big_m,
        beta: r.beta,
        alpha_prime,
        kappa,
        k0: r.k0,
        lambda0: r.lambda0,
        gamma1,
        delta0_prime: r.delta0_prime,
        gamma: r.gamma,
        amplitude: r.amplitude,
        eta: 0.0,
        schedule,
        predicted_exponent,
    })
}
