use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{blowup_threshold, EvolutionMode, FieldTrajectory};
use crate::error::{precondition, Error, Result};
use crate::numerics::chebyshev::ChebGrid;
use crate::numerics::fourier::FftPair;
use crate::numerics::linalg::matvec_rc;
use crate::profiles::ShearProfile;
use crate::semigroup::{Axis, HydroGenerator, LinearGenerator, SpectralField};
use crate::C64;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HydroEvolveConfig {
    /// Physical points in `y`; modes `|n| ≤ ⌊(ny − 1)/3⌋` are kept.
    pub ny: usize,
    pub dt: f64,
    pub s_end: f64,
    pub mode: EvolutionMode,
    /// Approximate number of stored states (never fewer than 200 unless fewer steps exist).
    pub samples: usize,
    pub blowup_factor: f64,
}

impl Default for HydroEvolveConfig {
    fn default() -> Self {
        Self { ny: 16, dt: 0.025, s_end: 1.0, mode: EvolutionMode::Linear, samples: 1000, blowup_factor: 1e6 }
    }
}

pub const CFL_LIMIT: f64 = 0.5;

pub(crate) fn kept_modes(ny: usize) -> usize {
    (ny.saturating_sub(1)) / 3
}

pub(crate) fn store_stride(steps: usize, samples: usize) -> usize {
    (steps / samples.max(200)).max(1)
}

/// Pseudo-spectral helper for products in `y` on `ny` points.
pub(crate) struct YTransform {
    ny: usize,
    fft: FftPair,
}

impl YTransform {
    pub fn new(ny: usize) -> Self {
        Self { ny, fft: FftPair::new(ny) }
    }

    /// Physical samples of the real field with nonnegative modes `c`.
    pub fn to_physical(&self, c: &[C64]) -> Vec<f64> {
        let mut a = vec![C64::new(0.0, 0.0); self.ny];
        for (n, v) in c.iter().enumerate() {
            a[n] += *v;
            if n > 0 {
                a[self.ny - n] += v.conj();
            }
        }
        self.fft.inverse(&mut a);
        a.iter().map(|v| v.re * self.ny as f64).collect()
    }

    /// Nonnegative modes `0..=n_keep` of real samples.
    #[cfg(test)]
    pub fn to_modes(&self, p: &[f64], n_keep: usize) -> Vec<C64> {
        let mut a: Vec<C64> = p.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.fft.forward(&mut a);
        let s = 1.0 / self.ny as f64;
        a[..=n_keep].iter().map(|v| v * s).collect()
    }
}

/// Modes `0..=n_keep` of the product of two real fields given by their
/// nonnegative modes.
///
/// This is the alias-free truncated product (what the 2/3 rule computes), summed
/// directly: every output mode only sees its own contributions, so rounding in
/// a large mode never seeds a small one. That matters here because seeded modes
/// grow at `|n|` times the base rate.
pub(crate) fn truncated_product(a: &[C64], b: &[C64], n_keep: usize) -> Vec<C64> {
    let get = |v: &[C64], k: i64| -> C64 {
        let i = k.unsigned_abs() as usize;
        match v.get(i) {
            Some(c) if k >= 0 => *c,
            Some(c) => c.conj(),
            None => C64::new(0.0, 0.0),
        }
    };
    let pa = a.len() as i64 - 1;
    (0..=n_keep as i64)
        .map(|n| {
            let mut s = C64::new(0.0, 0.0);
            for p in -pa..=pa {
                let q = n - p;
                if q.unsigned_abs() as usize >= b.len() {
                    continue;
                }
                s += get(a, p) * get(b, q);
            }
            s
        })
        .collect()
}

struct HydroRhs {
    gen: HydroGenerator,
    grid: Arc<ChebGrid>,
    phi: DMatrix<f64>,
    ytr: YTransform,
    n_keep: usize,
    nonlinear: bool,
}

struct RhsOut {
    dw: Vec<Vec<C64>>,
    /// `max|∂_zφ|` and `max_j |∂_yφ(z_j)|/Δz_j` of the evaluated state.
    max_dzphi: f64,
    max_wz_rate: f64,
}

impl HydroRhs {
    fn eval(&self, w: &[Vec<C64>]) -> RhsOut {
        let nz = self.grid.len();
        let zero = C64::new(0.0, 0.0);
        let mut dw: Vec<Vec<C64>> = Vec::with_capacity(w.len());
        for (n, wn) in w.iter().enumerate() {
            if n == 0 || wn.iter().all(|v| *v == zero) {
                dw.push(vec![zero; nz]);
                continue;
            }
            let mut out = self.gen.apply_core(wn);
            let s = C64::new(0.0, -(n as f64));
            out.iter_mut().for_each(|v| *v *= s);
            dw.push(out);
        }
        let mut max_dzphi = 0.0f64;
        let mut max_wz_rate = 0.0f64;
        if self.nonlinear {
            let mut phi = vec![vec![zero; nz]; w.len()];
            let mut phi_z = vec![vec![zero; nz]; w.len()];
            let mut w_z = vec![vec![zero; nz]; w.len()];
            for (n, wn) in w.iter().enumerate() {
                matvec_rc(&self.phi, wn, &mut phi[n]);
                matvec_rc(&self.grid.d1, &phi[n], &mut phi_z[n]);
                matvec_rc(&self.grid.d1, wn, &mut w_z[n]);
            }
            let colv = |f: &[Vec<C64>], j: usize, deriv: bool| -> Vec<C64> {
                f.iter()
                    .enumerate()
                    .map(|(n, v)| if deriv { v[j] * C64::new(0.0, n as f64) } else { v[j] })
                    .collect()
            };
            let x = &self.grid.x;
            for j in 0..nz {
                let pz = colv(&phi_z, j, false);
                let wy = colv(w, j, true);
                let py = colv(&phi, j, true);
                let wz = colv(&w_z, j, false);
                let a = truncated_product(&pz, &wy, self.n_keep);
                let b = truncated_product(&py, &wz, self.n_keep);
                for n in 0..dw.len().min(self.n_keep + 1) {
                    dw[n][j] += b[n] - a[n];
                }
                let pz_phys = self.ytr.to_physical(&pz);
                let py_phys = self.ytr.to_physical(&py);
                max_dzphi = max_dzphi.max(pz_phys.iter().fold(0.0f64, |a, v| a.max(v.abs())));
                let dz = if j == 0 {
                    x[0] - x[1]
                } else if j == nz - 1 {
                    x[nz - 2] - x[nz - 1]
                } else {
                    0.5 * (x[j - 1] - x[j + 1])
                };
                max_wz_rate = max_wz_rate.max(py_phys.iter().fold(0.0f64, |a, v| a.max(v.abs())) / dz);
            }
        }
        RhsOut { dw, max_dzphi, max_wz_rate }
    }
}

fn add_scaled(x: &[Vec<C64>], a: f64, k: &[Vec<C64>]) -> Vec<Vec<C64>> {
    x.iter().zip(k).map(|(p, q)| p.iter().zip(q).map(|(u, v)| u + v * a).collect()).collect()
}

fn field_norm(axis: &Axis, w: &[Vec<C64>]) -> f64 {
    SpectralField { axis: axis.clone(), modes: w.to_vec() }.l2_norm()
}

/// Evolves the vorticity perturbation `ω` of the shear flow `U` in the fast variables.
///
/// The axis of `omega0` fixes the Chebyshev grid. In linear mode only the modes
/// present in `omega0` are carried; in nonlinear mode all dealiased modes are.
pub fn evolve_hydro(omega0: &SpectralField, u: &ShearProfile, cfg: &HydroEvolveConfig) -> Result<FieldTrajectory> {
    let grid = match &omega0.axis {
        Axis::Chebyshev(g) => g.clone(),
        Axis::Uniform(_) => return precondition("hydrostatic evolution needs a Chebyshev axis"),
    };
    if cfg.ny < 4 {
        return precondition("need ny >= 4");
    }
    if !(cfg.dt > 0.0 && cfg.s_end >= 0.0) {
        return precondition("need dt > 0 and s_end >= 0");
    }
    let n_keep = kept_modes(cfg.ny);
    if omega0.n_max() > n_keep {
        return Err(Error::Resolution(format!(
            "data carry mode {} but ny = {} keeps only |n| <= {n_keep}; need ny >= {}",
            omega0.n_max(),
            cfg.ny,
            3 * omega0.n_max() + 1
        )));
    }
    let nonlinear = cfg.mode == EvolutionMode::Nonlinear;
    let n_modes = if nonlinear { n_keep + 1 } else { omega0.modes.len() };
    let nz = grid.len();
    let mut w: Vec<Vec<C64>> = (0..n_modes)
        .map(|n| omega0.modes.get(n).cloned().unwrap_or_else(|| vec![C64::new(0.0, 0.0); nz]))
        .collect();
    if w.iter().flatten().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return precondition("initial field has non-finite entries");
    }
    let gen = HydroGenerator::with_grid(u, 1, grid.clone(), true)?;
    let phi = gen.phi_operator().clone();
    let rhs = HydroRhs { gen, grid: grid.clone(), phi, ytr: YTransform::new(cfg.ny), n_keep, nonlinear };
    let axis = omega0.axis.clone();

    let max_u = u.max_abs_u();
    let steps = ((cfg.s_end / cfg.dt) - 1e-9).ceil().max(0.0) as usize;
    let h = if steps > 0 { cfg.s_end / steps as f64 } else { 0.0 };
    let stride = store_stride(steps, cfg.samples);
    let initial = field_norm(&axis, &w);
    let threshold = blowup_threshold(initial, cfg.blowup_factor);

    let check_cfl = |out: &RhsOut| -> Result<()> {
        let rate = (max_u + out.max_dzphi) * cfg.ny as f64;
        if h * rate > CFL_LIMIT {
            return Err(Error::TimeStep { dt: h, max_dt: CFL_LIMIT / rate });
        }
        if h * out.max_wz_rate > 2.0 * CFL_LIMIT {
            return Err(Error::TimeStep { dt: h, max_dt: 2.0 * CFL_LIMIT / out.max_wz_rate });
        }
        Ok(())
    };

    let mut times = vec![0.0];
    let mut fields = vec![SpectralField { axis: axis.clone(), modes: w.clone() }];
    let mut truncated = false;
    for k in 0..steps {
        let k1 = rhs.eval(&w);
        check_cfl(&k1)?;
        let k2 = rhs.eval(&add_scaled(&w, 0.5 * h, &k1.dw));
        let k3 = rhs.eval(&add_scaled(&w, 0.5 * h, &k2.dw));
        let k4 = rhs.eval(&add_scaled(&w, h, &k3.dw));
        for n in 0..w.len() {
            for j in 0..nz {
                w[n][j] += (k1.dw[n][j] + (k2.dw[n][j] + k3.dw[n][j]) * 2.0 + k4.dw[n][j]) * (h / 6.0);
            }
        }
        let norm = field_norm(&axis, &w);
        let s = h * (k + 1) as f64;
        if !norm.is_finite() || norm > threshold {
            truncated = true;
            if norm.is_finite() {
                times.push(s);
                fields.push(SpectralField { axis: axis.clone(), modes: w.clone() });
            }
            break;
        }
        if (k + 1) % stride == 0 || k + 1 == steps {
            times.push(s);
            fields.push(SpectralField { axis: axis.clone(), modes: w.clone() });
        }
    }
    Ok(FieldTrajectory { times, fields, truncated })
}
