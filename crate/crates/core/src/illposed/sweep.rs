use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{metivier_data, MetivierData};
use super::hydro::{evolve_hydro, HydroEvolveConfig};
use super::kinetic::{evolve_kinetic, KineticEvolveConfig, KineticIntegrator};
use super::params::IllposedParams;
use super::ratio::{hoelder_ratio, SweepRecord, WindowOptions};
use super::{EvolutionMode, FieldTrajectory};
use crate::error::{precondition, Error, Result};
use crate::numerics::stats::linear_fit;
use crate::penrose::{growing_mode_kinetic, DispersionKernel, PenroseOptions};
use crate::profiles::{Marginal, ShearProfile};
use crate::rayleigh::{eigenfunction_hydro, RayleighOptions};
use crate::semigroup::{caflisch_norm, Axis, CaflischNormSpec, NormTable};
use crate::C64;

/// The system being swept.
#[derive(Debug, Clone)]
pub enum Model {
    Hydro(ShearProfile),
    Kinetic { marginal: Marginal, kernel: DispersionKernel },
}

impl Model {
    pub fn name(&self) -> String {
        match self {
            Model::Hydro(_) => "hydro".into(),
            Model::Kinetic { kernel, .. } => kernel.to_string(),
        }
    }
}

/// A growing mode at wavenumber `n₀`: `e^{in₀y + λ₀s} g`.
#[derive(Debug, Clone)]
pub struct EigenData {
    pub axis: Axis,
    pub g: Vec<C64>,
    /// Eigenvalue of the mode-`n₀` generator.
    pub lambda0: C64,
    pub n0: usize,
}

impl EigenData {
    pub fn hydro(u: &ShearProfile, c0: C64, n0: usize, nz: usize, opts: &RayleighOptions) -> Result<Self> {
        let e = eigenfunction_hydro(u, c0, n0 as i64, nz, opts)?;
        Ok(Self { axis: Axis::chebyshev(nz), g: e.omega, lambda0: e.lambda, n0 })
    }

    /// Mode for a dispersion root `λ`, normalized to unit L² norm.
    pub fn kinetic(
        m: &Marginal,
        lambda: C64,
        n0: usize,
        nv: usize,
        v_max: f64,
        kernel: DispersionKernel,
        opts: &PenroseOptions,
    ) -> Result<Self> {
        let e = growing_mode_kinetic(m, lambda, n0 as i64, nv, v_max, kernel, opts)?;
        let axis = Axis::uniform(v_max, nv);
        let nrm = axis.l2_norm(&e.f);
        let g = e.f.iter().map(|v| v / nrm).collect();
        Ok(Self { axis, g, lambda0: e.full_eigenvalue, n0 })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepOptions {
    pub ny: usize,
    /// Time step; `None` picks 0.02 (hydro) or 0.003 (kinetic).
    pub dt: Option<f64>,
    pub samples: usize,
    pub window: WindowOptions,
    pub kinetic_integrator: KineticIntegrator,
    /// States entering the Caflisch supremum.
    pub caflisch_samples: usize,
    pub kmax: usize,
    pub n_trunc: usize,
    pub delta_points: usize,
    pub blowup_factor: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            ny: 16,
            dt: None,
            samples: 1000,
            window: WindowOptions::default(),
            kinetic_integrator: KineticIntegrator::Rk4,
            caflisch_samples: 200,
            kmax: 6,
            n_trunc: 2,
            delta_points: 17,
            blowup_factor: 1e6,
        }
    }
}

/// Builds the data for `ε` and evolves it to `s_ε`.
pub fn run_eps(
    params: &IllposedParams,
    model: &Model,
    eigen: &EigenData,
    mode: EvolutionMode,
    eps: f64,
    opts: &SweepOptions,
) -> Result<(MetivierData, FieldTrajectory)> {
    let sched = params
        .schedule
        .iter()
        .find(|s| (s.eps - eps).abs() <= 1e-12 * eps)
        .ok_or_else(|| Error::Precondition(format!("ε = {eps} is not in the parameter schedule")))?;
    let g: Vec<C64> = eigen.g.iter().map(|v| v * params.amplitude).collect();
    let data = metivier_data(&g, &eigen.axis, eps, params.big_m, eigen.n0, params.s, params.m, None)?;
    let traj = match model {
        Model::Hydro(u) => {
            let cfg = HydroEvolveConfig {
                ny: opts.ny,
                dt: opts.dt.unwrap_or(0.02),
                s_end: sched.s_eps,
                mode,
                samples: opts.samples,
                blowup_factor: opts.blowup_factor,
            };
            evolve_hydro(&data.field, u, &cfg)?
        }
        Model::Kinetic { marginal, kernel } => {
            let cfg = KineticEvolveConfig {
                ny: opts.ny,
                dt: opts.dt.unwrap_or(0.003),
                s_end: sched.s_eps,
                mode,
                integrator: opts.kinetic_integrator,
                coupling: true,
                samples: opts.samples,
                blowup_factor: opts.blowup_factor,
            };
            evolve_kinetic(&data.field, marginal, *kernel, &cfg)?
        }
    };
    Ok((data, traj))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RemainderRecord {
    pub eps: f64,
    /// Truncated Caflisch norm of `w = u − u_lin`.
    pub caflisch: f64,
    pub delta_at: f64,
    pub s_at: f64,
    pub w_final_l2: f64,
    pub linear_final_l2: f64,
    /// `‖w(s_ε)‖ / ‖u_lin(s_ε)‖`.
    pub subdominance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RemainderReport {
    pub records: Vec<RemainderRecord>,
    /// Slope of `log caflisch` against `log ε`.
    pub exponent_fit: f64,
    pub kappa: f64,
    pub exponent_ok: bool,
    pub subdominance_decreasing: bool,
    pub pass: bool,
}

/// One `ε` of a remainder study.
pub struct RemainderInput<'a> {
    pub eps: f64,
    pub nonlinear: &'a FieldTrajectory,
    pub linear: Option<&'a FieldTrajectory>,
}

/// Caflisch-norm and subdominance study of `w = u − u_lin` across `ε`.
pub fn remainder_diagnostic(
    params: &IllposedParams,
    inputs: &[RemainderInput<'_>],
    m: u32,
    opts: &SweepOptions,
) -> Result<RemainderReport> {
    let mut records: Vec<RemainderRecord> = inputs
        .par_iter()
        .map(|inp| remainder_one(params, inp, m, opts))
        .collect::<Result<_>>()?;
    records.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    let kappa = params.kappa;
    let positive: Vec<&RemainderRecord> = records.iter().filter(|r| r.caflisch > 0.0).collect();
    let exponent_fit = if records.iter().all(|r| r.caflisch == 0.0) {
        f64::INFINITY
    } else if positive.len() >= 2 {
        let x: Vec<f64> = positive.iter().map(|r| r.eps.ln()).collect();
        let y: Vec<f64> = positive.iter().map(|r| r.caflisch.ln()).collect();
        linear_fit(&x, &y).slope
    } else {
        f64::NAN
    };
    let exponent_ok = exponent_fit >= kappa - 0.1;
    let subdominance_decreasing =
        records.len() >= 2 && records.windows(2).all(|w| w[1].subdominance < w[0].subdominance);
    Ok(RemainderReport {
        records,
        exponent_fit,
        kappa,
        exponent_ok,
        subdominance_decreasing,
        pass: exponent_ok && subdominance_decreasing,
    })
}

fn remainder_one(params: &IllposedParams, inp: &RemainderInput<'_>, m: u32, opts: &SweepOptions) -> Result<RemainderRecord> {
    let lin = match inp.linear {
        Some(l) => l,
        None => return precondition(format!("missing linear eigen trajectory for ε = {}", inp.eps)),
    };
    let sched = params
        .schedule
        .iter()
        .find(|s| (s.eps - inp.eps).abs() <= 1e-12 * inp.eps)
        .ok_or_else(|| Error::Precondition(format!("ε = {} is not in the parameter schedule", inp.eps)))?;
    let nl = inp.nonlinear;
    let len = nl.times.len().min(lin.times.len());
    if len == 0 {
        return precondition("empty trajectory");
    }
    for i in 0..len {
        if (nl.times[i] - lin.times[i]).abs() > 1e-9 * (1.0 + lin.times[i]) {
            return precondition("nonlinear and linear trajectories are stored at different times");
        }
    }
    let stride = (len / opts.caflisch_samples.max(1)).max(1);
    let mut idx: Vec<usize> = (0..len).step_by(stride).collect();
    if *idx.last().unwrap() != len - 1 {
        idx.push(len - 1);
    }
    let times: Vec<f64> = idx.iter().map(|&i| nl.times[i]).collect();
    let tables: Vec<NormTable> = idx
        .iter()
        .map(|&i| NormTable::new(&nl.fields[i].sub(&lin.fields[i]), opts.kmax, opts.n_trunc, m))
        .collect();
    let spec = CaflischNormSpec {
        delta0: sched.delta0,
        delta0_prime: params.delta0_prime,
        gamma1: params.gamma1,
        gamma: params.gamma,
        big_m: params.big_m as f64,
        k0: params.k0,
        eps: inp.eps,
        kmax: opts.kmax,
        n_trunc: opts.n_trunc,
        m,
    };
    let np = opts.delta_points.max(2);
    let grid: Vec<f64> = (0..np).map(|i| sched.delta0 * i as f64 / (np - 1) as f64).collect();
    let c = caflisch_norm(&times, &tables, &spec, &grid)?;
    let w_final = nl.fields[len - 1].sub(&lin.fields[len - 1]).l2_norm();
    let lin_final = lin.fields[len - 1].l2_norm();
    Ok(RemainderRecord {
        eps: inp.eps,
        caflisch: c.value,
        delta_at: c.delta,
        s_at: c.s,
        w_final_l2: w_final,
        linear_final_l2: lin_final,
        subdominance: if lin_final > 0.0 { w_final / lin_final } else { f64::NAN },
    })
}

/// Sweep report with fits and pass flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub model: String,
    pub mode: EvolutionMode,
    pub params: IllposedParams,
    pub records: Vec<SweepRecord>,
    /// Slope of `log init_norm` against `log ε` and its target `M − s`.
    pub data_norm_slope: f64,
    pub data_norm_target: f64,
    pub data_slope_ok: bool,
    /// Slope of `log R` against `log ε`.
    pub ratio_slope: f64,
    pub predicted_exponent: f64,
    pub monotone: bool,
    pub slope_ok: bool,
    pub remainder: Option<RemainderReport>,
    pub pass: bool,
}

fn slope(records: &[&SweepRecord], f: impl Fn(&SweepRecord) -> f64) -> f64 {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| f(r) > 0.0 && f(r).is_finite())
        .map(|r| (r.eps.ln(), f(r).ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    linear_fit(&x, &y).slope
}

/// Runs every `ε` of the schedule in parallel and fits the divergence exponent.
///
/// Failed members are reported with their error in `status`. In nonlinear mode
/// the matching linear runs are made as well and feed the remainder study.
pub fn sweep(
    params: &IllposedParams,
    model: &Model,
    eigen: &EigenData,
    mode: EvolutionMode,
    opts: &SweepOptions,
) -> Result<SweepReport> {
    let eps_list: Vec<f64> = params.schedule.iter().map(|s| s.eps).collect();
    let runs: Vec<(f64, Result<(SweepRecord, FieldTrajectory)>, Option<FieldTrajectory>)> = eps_list
        .par_iter()
        .map(|&eps| {
            let main = run_eps(params, model, eigen, mode, eps, opts).and_then(|(data, traj)| {
                let rec = hoelder_ratio(&traj, params, &data, &eigen.g, opts.ny, &opts.window)?;
                Ok((rec, traj))
            });
            let lin = if mode == EvolutionMode::Nonlinear && main.is_ok() {
                run_eps(params, model, eigen, EvolutionMode::Linear, eps, opts).ok().map(|(_, t)| t)
            } else {
                None
            };
            (eps, main, lin)
        })
        .collect();

    let mut records = Vec::with_capacity(runs.len());
    let mut inputs = Vec::new();
    for (eps, main, lin) in &runs {
        match main {
            Ok((rec, traj)) => {
                records.push(rec.clone());
                if mode == EvolutionMode::Nonlinear {
                    inputs.push(RemainderInput { eps: *eps, nonlinear: traj, linear: lin.as_ref() });
                }
            }
            Err(e) => records.push(SweepRecord::failed(*eps, e)),
        }
    }
    let m_weight = match model {
        Model::Hydro(_) => 0,
        Model::Kinetic { .. } => params.m,
    };
    let remainder = if mode == EvolutionMode::Nonlinear && !inputs.is_empty() {
        let rep = remainder_diagnostic(params, &inputs, m_weight, opts)?;
        for r in &rep.records {
            if let Some(rec) = records.iter_mut().find(|x| x.eps == r.eps) {
                rec.remainder_norm = Some(r.caflisch);
            }
        }
        Some(rep)
    } else {
        None
    };
    records.sort_by(|a, b| b.eps.total_cmp(&a.eps));

    let ok: Vec<&SweepRecord> = records.iter().filter(|r| r.ok()).collect();
    let all_ok = ok.len() == records.len();
    let data_norm_slope = slope(&ok, |r| r.init_norm);
    let data_norm_target = params.big_m as f64 - params.s;
    let data_slope_ok = (data_norm_slope - data_norm_target).abs() <= 0.05 * data_norm_target.abs();
    let ratio_slope = slope(&ok, |r| r.ratio);
    let predicted = params.predicted_exponent;
    let monotone = all_ok && records.len() >= 2 && records.windows(2).all(|w| w[1].ratio > w[0].ratio);
    let slope_ok = (ratio_slope - predicted).abs() <= 0.15 * predicted.abs();
    let pass = match mode {
        EvolutionMode::Linear => all_ok && monotone && slope_ok,
        EvolutionMode::Nonlinear => all_ok && monotone && remainder.as_ref().is_some_and(|r| r.pass),
    };
    Ok(SweepReport {
        model: model.name(),
        mode,
        params: params.clone(),
        records,
        data_norm_slope,
        data_norm_target,
        data_slope_ok,
        ratio_slope,
        predicted_exponent: predicted,
        monotone,
        slope_ok,
        remainder,
        pass,
    })
}
