//! Analytic norms `‖·‖_{δ,δ'}` and the time-weighted Caflisch norm.

use serde::{Deserialize, Serialize};

use super::field::{Axis, ModeState, SpectralField};
use crate::error::{invalid, precondition, Error, Result};
use crate::numerics::quad::neumaier_sum;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticNormSpec {
    /// Fourier weight `e^{δ|n|}`.
    pub delta: f64,
    /// Derivative weight `δ'^k / k!`.
    pub delta_prime: f64,
    pub kmax: usize,
    /// `⟨x⟩^m` weight exponent (0 for the hydrodynamic norm).
    pub m: u32,
}

impl AnalyticNormSpec {
    pub fn hydro(delta: f64, delta_prime: f64, kmax: usize) -> Self {
        Self { delta, delta_prime, kmax, m: 0 }
    }

    pub fn kinetic(delta: f64, delta_prime: f64, kmax: usize, m: u32) -> Self {
        Self { delta, delta_prime, kmax, m }
    }

    fn validate(&self, axis: &Axis) -> Result<()> {
        if !(self.delta >= 0.0 && self.delta_prime >= 0.0) {
            return invalid("analytic norm weights must be nonnegative");
        }
        if self.kmax > axis.validity_order() {
            return precondition(format!(
                "Kmax = {} exceeds the spectral-differentiation validity order {} of this grid",
                self.kmax,
                axis.validity_order()
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub value: f64,
    /// Relative size of the last retained derivative term.
    pub tail: f64,
}

/// `Σ_{k≤K} a_k δ'^k / k!` with the relative last term.
pub fn weighted_series(a: &[f64], delta_prime: f64) -> (f64, f64) {
    let mut w = 1.0;
    let terms: Vec<f64> = a
        .iter()
        .enumerate()
        .map(|(k, v)| {
            if k > 0 {
                w *= delta_prime / k as f64;
            }
            v * w
        })
        .collect();
    let total = neumaier_sum(terms.iter().copied());
    let last = terms.last().copied().unwrap_or(0.0);
    (total, if total > 0.0 { last / total } else { 0.0 })
}

const TAIL_LIMIT: f64 = 0.1;

/// `‖f‖_{δ'} = Σ_k ‖⟨x⟩^m ∂^k f‖ δ'^k/k!` of a single mode.
pub fn mode_norm(axis: &Axis, values: &[C64], spec: &AnalyticNormSpec) -> Result<NormValue> {
    spec.validate(axis)?;
    let a = axis.derivative_norms(values, spec.kmax, spec.m);
    let (value, tail) = weighted_series(&a, spec.delta_prime);
    if tail > TAIL_LIMIT {
        return Err(Error::Resolution(format!(
            "derivative series truncated at Kmax = {} has estimated tail {tail:.3} (> 10%)",
            spec.kmax
        )));
    }
    Ok(NormValue { value, tail })
}

/// `Σ_n e^{δ|n|} ‖f_n‖_{δ'}` over the supplied modes.
pub fn analytic_norm(axis: &Axis, modes: &[ModeState], spec: &AnalyticNormSpec) -> Result<NormValue> {
    let mut total = Vec::with_capacity(modes.len());
    let mut tail: f64 = 0.0;
    for m in modes {
        if m.values.len() != axis.len() {
            return invalid("mode length does not match the grid");
        }
        let v = mode_norm(axis, &m.values, spec)?;
        tail = tail.max(v.tail);
        total.push(v.value * (spec.delta * m.n.unsigned_abs() as f64).exp());
    }
    Ok(NormValue { value: neumaier_sum(total), tail })
}

/// Analytic norm of a real spectral field (modes `±n` both counted).
pub fn field_analytic_norm(field: &SpectralField, spec: &AnalyticNormSpec) -> Result<NormValue> {
    let mut modes = Vec::new();
    for (n, v) in field.modes.iter().enumerate() {
        modes.push(ModeState::new(n as i64, 0.0, v.clone()));
        if n > 0 {
            modes.push(ModeState::new(-(n as i64), 0.0, v.clone()));
        }
    }
    analytic_norm(&field.axis, &modes, spec)
}

/// Parameters of the Caflisch norm
/// `sup ‖w(s)‖_{δ,δ'} + (δ₀ − δ − γ₁s)^γ (‖∂_y w‖_{δ,δ'} + M^{−γ}|log ε|^{−γ}‖∂_z w‖_{δ,δ'})`
/// with `δ' = δ₀' k₀ δ / (M |log ε|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaflischNormSpec {
    pub delta0: f64,
    pub delta0_prime: f64,
    pub gamma1: f64,
    pub gamma: f64,
    pub big_m: f64,
    pub k0: f64,
    pub eps: f64,
    /// Derivative truncation of the inner analytic norms.
    pub kmax: usize,
    /// Fourier truncation `|n| ≤ n_trunc`.
    pub n_trunc: usize,
    /// `⟨x⟩^m` weight exponent.
    pub m: u32,
}

impl CaflischNormSpec {
    pub fn delta_prime(&self, delta: f64) -> f64 {
        self.delta0_prime * self.k0 * delta / (self.big_m * self.eps.ln().abs())
    }
}

/// Per-mode derivative norms `‖⟨x⟩^m ∂^k w_n‖`, `k ≤ kmax + 1`, of one stored state.
#[derive(Debug, Clone)]
pub struct NormTable {
    pub per_mode: Vec<Vec<f64>>,
}

impl NormTable {
    pub fn new(field: &SpectralField, kmax: usize, n_trunc: usize, m: u32) -> Self {
        let per_mode = field
            .modes
            .iter()
            .take(n_trunc + 1)
            .map(|v| field.axis.derivative_norms(v, kmax + 1, m))
            .collect();
        Self { per_mode }
    }

    /// `(‖w‖, ‖∂_y w‖, ‖∂_z w‖)` in `‖·‖_{δ,δ'}`, counting `±n`.
    fn norms(&self, delta: f64, delta_prime: f64, kmax: usize) -> (f64, f64, f64) {
        let mut a = 0.0;
        let mut ay = 0.0;
        let mut az = 0.0;
        for (n, t) in self.per_mode.iter().enumerate() {
            let mult = if n == 0 { 1.0 } else { 2.0 };
            let e = (delta * n as f64).exp() * mult;
            let (s0, _) = weighted_series(&t[..=kmax], delta_prime);
            let (s1, _) = weighted_series(&t[1..=kmax + 1], delta_prime);
            a += e * s0;
            ay += e * n as f64 * s0;
            az += e * s1;
        }
        (a, ay, az)
    }
}

/// Location and value of the discrete Caflisch supremum.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CaflischValue {
    pub value: f64,
    pub delta: f64,
    pub s: f64,
}

/// Discrete Caflisch norm over `delta_grid × times`.
pub fn caflisch_norm(times: &[f64], tables: &[NormTable], spec: &CaflischNormSpec, delta_grid: &[f64]) -> Result<CaflischValue> {
    if times.len() != tables.len() {
        return invalid("times and states differ in length");
    }
    if !(spec.gamma > 0.0 && spec.gamma < 1.0) {
        return invalid("Caflisch exponent γ must lie in (0, 1)");
    }
    let log_eps = spec.eps.ln().abs();
    let coef = spec.big_m.powf(-spec.gamma) * log_eps.powf(-spec.gamma);
    let mut best = CaflischValue { value: f64::NEG_INFINITY, delta: 0.0, s: 0.0 };
    let mut admissible = 0usize;
    for &delta in delta_grid {
        let dp = spec.delta_prime(delta);
        for (s, t) in times.iter().zip(tables) {
            let gap = spec.delta0 - delta - spec.gamma1 * s;
            if gap < 0.0 || delta < 0.0 {
                continue;
            }
            admissible += 1;
            let (a, ay, az) = t.norms(delta, dp, spec.kmax);
            let v = a + gap.powf(spec.gamma) * (ay + coef * az);
            if v > best.value {
                best = CaflischValue { value: v, delta, s: *s };
            }
        }
    }
    if admissible == 0 {
        return invalid("empty admissible (δ, s) set for the Caflisch norm");
    }
    Ok(best)
}
