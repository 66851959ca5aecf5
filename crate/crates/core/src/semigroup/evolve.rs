//! Time stepping of per-mode linear generators and growth-rate fits.

use serde::{Deserialize, Serialize};

use super::field::{Axis, ModeState};
use super::generator::LinearGenerator;
use crate::error::{invalid, precondition, Error, Result};
use crate::numerics::linalg::{expm, matvec_cc};
use crate::numerics::stats::linear_fit;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    Rk4,
    ExactExpm,
}

/// RK4 is stable on the imaginary axis up to `2√2`; the bound leaves a margin.
pub const RK4_STABILITY: f64 = 2.7;

/// States of one mode at increasing times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub n: i64,
    pub axis: Axis,
    pub times: Vec<f64>,
    pub states: Vec<Vec<C64>>,
}

impl Trajectory {
    pub fn l2(&self) -> Vec<f64> {
        self.states.iter().map(|s| self.axis.l2_norm(s)).collect()
    }

    pub fn mode_state(&self, i: usize) -> ModeState {
        ModeState::new(self.n, self.times[i], self.states[i].clone())
    }

    pub fn last(&self) -> &[C64] {
        self.states.last().expect("trajectory is never empty")
    }
}

/// Evolve `h` under `gen` on `[h.s, h.s + s_end]` with steps of at most `dt`.
pub fn evolve<G: LinearGenerator + ?Sized>(
    gen: &G,
    h: &ModeState,
    s_end: f64,
    dt: f64,
    integrator: Integrator,
) -> Result<Trajectory> {
    if h.values.len() != gen.len() {
        return invalid(format!("state has {} values, generator grid has {}", h.values.len(), gen.len()));
    }
    if !h.is_finite() {
        return invalid("initial state has non-finite entries");
    }
    if !(dt > 0.0 && s_end >= 0.0) {
        return invalid("need dt > 0 and s_end >= 0");
    }
    let steps = ((s_end / dt) - 1e-9).ceil().max(0.0) as usize;
    let step = if steps > 0 { s_end / steps as f64 } else { 0.0 };
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut x = h.values.clone();
    times.push(h.s);
    states.push(x.clone());
    match integrator {
        Integrator::Rk4 => {
            let rho = gen.spectral_radius();
            if step * rho > RK4_STABILITY {
                return Err(Error::TimeStep { dt, max_dt: RK4_STABILITY / rho });
            }
            for k in 0..steps {
                x = rk4_step(gen, &x, step);
                times.push(h.s + step * (k + 1) as f64);
                states.push(x.clone());
            }
        }
        Integrator::ExactExpm => {
            if gen.len() > 1024 {
                return precondition("dense exponential is limited to grids with at most 1024 nodes");
            }
            let e = expm(&(gen.matrix() * C64::new(step, 0.0)));
            for k in 0..steps {
                x = matvec_cc(&e, &x);
                times.push(h.s + step * (k + 1) as f64);
                states.push(x.clone());
            }
        }
    }
    Ok(Trajectory { n: gen.mode(), axis: gen.axis().clone(), times, states })
}

fn axpy(x: &[C64], a: f64, k: &[C64]) -> Vec<C64> {
    x.iter().zip(k).map(|(p, q)| p + q * a).collect()
}

fn rk4_step<G: LinearGenerator + ?Sized>(gen: &G, x: &[C64], dt: f64) -> Vec<C64> {
    let k1 = gen.apply(x);
    let k2 = gen.apply(&axpy(x, 0.5 * dt, &k1));
    let k3 = gen.apply(&axpy(x, 0.5 * dt, &k2));
    let k4 = gen.apply(&axpy(x, dt, &k3));
    x.iter()
        .enumerate()
        .map(|(i, v)| v + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0))
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GrowthFit {
    pub rate: f64,
    pub rms: f64,
    /// The log-norm oscillated and the rate comes from an envelope of local maxima.
    pub oscillatory: bool,
}

/// Least-squares slope of `log‖·‖` against time over the final half.
pub fn fit_growth_rate(times: &[f64], norms: &[f64]) -> Result<GrowthFit> {
    if times.len() < 10 || times.len() != norms.len() {
        return invalid("growth fit needs at least 10 samples");
    }
    if norms.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return invalid("growth fit needs positive finite norms");
    }
    let start = times.len() / 2;
    let t = &times[start..];
    let y: Vec<f64> = norms[start..].iter().map(|v| v.ln()).collect();
    let fit = linear_fit(t, &y);
    let monotone = y.windows(2).all(|w| w[1] >= w[0]) || y.windows(2).all(|w| w[1] <= w[0]);
    let span = (y.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - y.iter().cloned().fold(f64::INFINITY, f64::min)).max(1.0);
    if monotone || fit.rms <= 1e-3 * span {
        return Ok(GrowthFit { rate: fit.slope, rms: fit.rms, oscillatory: false });
    }
    let mut tx = Vec::new();
    let mut ty = Vec::new();
    for i in 1..y.len() - 1 {
        if y[i] >= y[i - 1] && y[i] >= y[i + 1] {
            tx.push(t[i]);
            ty.push(y[i]);
        }
    }
    if tx.len() < 2 {
        return Ok(GrowthFit { rate: fit.slope, rms: fit.rms, oscillatory: true });
    }
    let env = linear_fit(&tx, &ty);
    Ok(GrowthFit { rate: env.slope, rms: env.rms, oscillatory: true })
}

/// Convenience: fit the L² norms of a trajectory.
pub fn fit_trajectory(traj: &Trajectory) -> Result<GrowthFit> {
    fit_growth_rate(&traj.times, &traj.l2())
}
