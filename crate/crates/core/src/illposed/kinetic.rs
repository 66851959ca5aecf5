use serde::{Deserialize, Serialize};

use super::hydro::{kept_modes, store_stride, truncated_product, YTransform, CFL_LIMIT};
use super::{blowup_threshold, EvolutionMode, FieldTrajectory};
use crate::error::{precondition, Error, Result};
use crate::numerics::fourier::periodic_derivative;
use crate::penrose::DispersionKernel;
use crate::profiles::Marginal;
use crate::semigroup::{Axis, KineticGenerator, SpectralField, UniformGrid};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KineticIntegrator {
    Rk4,
    /// Exact transport half steps around an RK4 field kick.
    Strang,
}

impl std::str::FromStr for KineticIntegrator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rk4" => Ok(Self::Rk4),
            "strang" => Ok(Self::Strang),
            o => Err(Error::InvalidParameter(format!("unknown integrator '{o}' (expected rk4 or strang)"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KineticEvolveConfig {
    pub ny: usize,
    pub dt: f64,
    pub s_end: f64,
    pub mode: EvolutionMode,
    pub integrator: KineticIntegrator,
    pub coupling: bool,
    pub samples: usize,
    pub blowup_factor: f64,
}

impl Default for KineticEvolveConfig {
    fn default() -> Self {
        Self {
            ny: 16,
            dt: 0.0025,
            s_end: 1.0,
            mode: EvolutionMode::Linear,
            integrator: KineticIntegrator::Rk4,
            coupling: true,
            samples: 500,
            blowup_factor: 1e6,
        }
    }
}

struct KineticRhs {
    gen: KineticGenerator,
    grid: std::sync::Arc<UniformGrid>,
    ytr: YTransform,
    n_keep: usize,
    nonlinear: bool,
}

struct RhsOut {
    df: Vec<Vec<C64>>,
    max_dyphi: f64,
}

impl KineticRhs {
    fn potential(&self, f: &[C64]) -> C64 {
        if self.gen.coupling { self.gen.potential(f) } else { C64::new(0.0, 0.0) }
    }

    /// Force part `inF'φ_n + (∂_yφ ∂_v f)_n`; also the transport part when `transport`.
    fn eval(&self, f: &[Vec<C64>], transport: bool) -> RhsOut {
        let nv = self.grid.n;
        let zero = C64::new(0.0, 0.0);
        let phis: Vec<C64> = f.iter().enumerate().map(|(n, v)| if n == 0 { zero } else { self.potential(v) }).collect();
        let mut df: Vec<Vec<C64>> = f
            .iter()
            .enumerate()
            .map(|(n, fnv)| {
                let s = C64::new(0.0, n as f64);
                (0..nv)
                    .map(|j| {
                        let mut r = s * phis[n] * self.gen.fprime[j];
                        if transport {
                            r -= s * self.grid.nodes[j] * fnv[j];
                        }
                        r
                    })
                    .collect()
            })
            .collect();
        let mut max_dyphi = 0.0f64;
        if self.nonlinear && self.gen.coupling {
            let dyphi: Vec<C64> = phis.iter().enumerate().map(|(n, p)| p * C64::new(0.0, n as f64)).collect();
            let ef = self.ytr.to_physical(&dyphi);
            max_dyphi = ef.iter().fold(0.0, |a, v| a.max(v.abs()));
            if max_dyphi > 0.0 {
                let fv: Vec<Vec<C64>> = f
                    .iter()
                    .map(|v| periodic_derivative(self.grid.fft(), v, 2.0 * self.grid.v_max, 1))
                    .collect();
                for j in 0..nv {
                    let col: Vec<C64> = fv.iter().map(|v| v[j]).collect();
                    let prod = truncated_product(&dyphi, &col, self.n_keep);
                    for (n, v) in prod.into_iter().enumerate() {
                        if n < df.len() {
                            df[n][j] += v;
                        }
                    }
                }
            }
        }
        RhsOut { df, max_dyphi }
    }
}

fn add_scaled(x: &[Vec<C64>], a: f64, k: &[Vec<C64>]) -> Vec<Vec<C64>> {
    x.iter().zip(k).map(|(p, q)| p.iter().zip(q).map(|(u, v)| u + v * a).collect()).collect()
}

fn rk4(rhs: &KineticRhs, f: &[Vec<C64>], h: f64, transport: bool) -> (Vec<Vec<C64>>, f64) {
    let k1 = rhs.eval(f, transport);
    let k2 = rhs.eval(&add_scaled(f, 0.5 * h, &k1.df), transport);
    let k3 = rhs.eval(&add_scaled(f, 0.5 * h, &k2.df), transport);
    let k4 = rhs.eval(&add_scaled(f, h, &k3.df), transport);
    let out = f
        .iter()
        .enumerate()
        .map(|(n, v)| {
            v.iter()
                .enumerate()
                .map(|(j, x)| x + (k1.df[n][j] + (k2.df[n][j] + k3.df[n][j]) * 2.0 + k4.df[n][j]) * (h / 6.0))
                .collect()
        })
        .collect();
    (out, k1.max_dyphi)
}

fn transport(grid: &UniformGrid, f: &mut [Vec<C64>], h: f64) {
    for (n, v) in f.iter_mut().enumerate().skip(1) {
        for (x, u) in v.iter_mut().zip(&grid.nodes) {
            *x *= C64::new(0.0, -(n as f64) * u * h).exp();
        }
    }
}

/// Evolves the perturbation `f` of the homogeneous equilibrium with marginal `F` in the fast variables.
pub fn evolve_kinetic(
    f0: &SpectralField,
    marginal: &Marginal,
    kernel: DispersionKernel,
    cfg: &KineticEvolveConfig,
) -> Result<FieldTrajectory> {
    let grid = match &f0.axis {
        Axis::Uniform(g) => g.clone(),
        Axis::Chebyshev(_) => return precondition("kinetic evolution needs a uniform velocity axis"),
    };
    if cfg.ny < 4 {
        return precondition("need ny >= 4");
    }
    if !(cfg.dt > 0.0 && cfg.s_end >= 0.0) {
        return precondition("need dt > 0 and s_end >= 0");
    }
    let n_keep = kept_modes(cfg.ny);
    if f0.n_max() > n_keep {
        return Err(Error::Resolution(format!(
            "data carry mode {} but ny = {} keeps only |n| <= {n_keep}; need ny >= {}",
            f0.n_max(),
            cfg.ny,
            3 * f0.n_max() + 1
        )));
    }
    let nonlinear = cfg.mode == EvolutionMode::Nonlinear;
    let n_modes = if nonlinear { n_keep + 1 } else { f0.modes.len() };
    let nv = grid.n;
    let mut f: Vec<Vec<C64>> = (0..n_modes)
        .map(|n| f0.modes.get(n).cloned().unwrap_or_else(|| vec![C64::new(0.0, 0.0); nv]))
        .collect();
    if f.iter().flatten().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return precondition("initial field has non-finite entries");
    }
    let gen = KineticGenerator::new(marginal, 1, nv, grid.v_max, kernel, cfg.coupling)?;
    let rhs = KineticRhs { gen, grid: grid.clone(), ytr: YTransform::new(cfg.ny), n_keep, nonlinear };
    let axis = f0.axis.clone();
    let norm = |f: &[Vec<C64>]| SpectralField { axis: axis.clone(), modes: f.to_vec() }.l2_norm();

    let steps = ((cfg.s_end / cfg.dt) - 1e-9).ceil().max(0.0) as usize;
    let h = if steps > 0 { cfg.s_end / steps as f64 } else { 0.0 };
    let stride = store_stride(steps, cfg.samples);
    let threshold = blowup_threshold(norm(&f), cfg.blowup_factor);
    let check_cfl = |max_dyphi: f64| -> Result<()> {
        let rate = (grid.v_max + max_dyphi) * cfg.ny as f64;
        if h * rate > CFL_LIMIT {
            return Err(Error::TimeStep { dt: h, max_dt: CFL_LIMIT / rate });
        }
        let vrate = max_dyphi / grid.h;
        if h * vrate > CFL_LIMIT {
            return Err(Error::TimeStep { dt: h, max_dt: CFL_LIMIT / vrate });
        }
        Ok(())
    };
    check_cfl(0.0)?;

    let mut times = vec![0.0];
    let mut fields = vec![SpectralField { axis: axis.clone(), modes: f.clone() }];
    let mut truncated = false;
    for k in 0..steps {
        let max_dyphi = match cfg.integrator {
            KineticIntegrator::Rk4 => {
                let (next, e) = rk4(&rhs, &f, h, true);
                f = next;
                e
            }
            KineticIntegrator::Strang => {
                transport(&grid, &mut f, 0.5 * h);
                let (next, e) = rk4(&rhs, &f, h, false);
                f = next;
                transport(&grid, &mut f, 0.5 * h);
                e
            }
        };
        check_cfl(max_dyphi)?;
        let nrm = norm(&f);
        let s = h * (k + 1) as f64;
        if !nrm.is_finite() || nrm > threshold {
            truncated = true;
            if nrm.is_finite() {
                times.push(s);
                fields.push(SpectralField { axis: axis.clone(), modes: f.clone() });
            }
            break;
        }
        if (k + 1) % stride == 0 || k + 1 == steps {
            times.push(s);
            fields.push(SpectralField { axis: axis.clone(), modes: f.clone() });
        }
    }
    Ok(FieldTrajectory { times, fields, truncated })
}
