use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::data::MetivierData;
use super::params::IllposedParams;
use super::FieldTrajectory;
use crate::error::{precondition, Error, Result};
use crate::numerics::quad::GaussLegendre;
use crate::numerics::stats::linear_fit;
use crate::semigroup::{Axis, SpectralField};
use crate::C64;

/// One row of an ill-posedness sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRecord {
    pub eps: f64,
    /// `‖⟨z⟩^m data‖_{H^s}`.
    pub init_norm: f64,
    /// `‖u‖_{L²([0,t_ε] × Ω_ε)}`.
    pub loc_norm: f64,
    /// `loc_norm / init_norm^α`.
    pub ratio: f64,
    /// Growth rate of the window envelope over the final unit of fast time.
    pub growth_fit: f64,
    pub remainder_norm: Option<f64>,
    pub truncated: bool,
    pub status: String,
}

impl SweepRecord {
    pub fn failed(eps: f64, err: &Error) -> Self {
        Self {
            eps,
            init_norm: f64::NAN,
            loc_norm: f64::NAN,
            ratio: f64::NAN,
            growth_fit: f64::NAN,
            remainder_norm: None,
            truncated: false,
            status: format!("error: {err}"),
        }
    }

    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WindowOptions {
    /// Gauss–Legendre nodes per window direction.
    pub nodes: usize,
    /// Radius multiplier (1 gives `B(x₀, ε^k) × B(z₀, ε^k)`).
    pub scale: f64,
    /// Integrate over the full period and axis instead.
    pub full_domain: bool,
}

impl Default for WindowOptions {
    fn default() -> Self {
        Self { nodes: 24, scale: 1.0, full_domain: false }
    }
}

/// The space window in fast variables.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Window {
    pub y0: f64,
    pub z0: f64,
    pub y: (f64, f64),
    pub z: (f64, f64),
}

/// Center `(y₀, z₀)`: `z₀` maximizes `|g|` on the grid and `y₀` makes `e^{in₀y₀}g(z₀)` real positive.
pub fn locate(g: &[C64], axis: &Axis, n0: usize) -> (f64, f64) {
    let (j, _) = g
        .iter()
        .enumerate()
        .fold((0, -1.0), |(bj, bv), (j, v)| if v.norm() > bv { (j, v.norm()) } else { (bj, bv) });
    let z0 = axis.nodes()[j];
    let y0 = (-g[j].arg() / n0 as f64).rem_euclid(2.0 * PI / n0 as f64);
    (y0, z0)
}

fn axis_bounds(axis: &Axis) -> (f64, f64) {
    match axis {
        Axis::Chebyshev(_) => (-1.0, 1.0),
        Axis::Uniform(g) => (-g.v_max, g.v_max - g.h),
    }
}

/// Builds and validates the window for `ε` on a run with `ny` points in `y`.
pub fn window(
    g: &[C64],
    axis: &Axis,
    n0: usize,
    eps: f64,
    k: f64,
    ny: usize,
    opts: &WindowOptions,
) -> Result<Window> {
    let (y0, z0) = locate(g, axis, n0);
    let (lo, hi) = axis_bounds(axis);
    if opts.full_domain {
        return Ok(Window { y0, z0, y: (0.0, 2.0 * PI), z: (lo, hi) });
    }
    let ry = opts.scale * eps.powf(k - 1.0);
    let rz = opts.scale * eps.powf(k);
    let (ya, yb) = if 2.0 * ry >= 2.0 * PI { (0.0, 2.0 * PI) } else { (y0 - ry, y0 + ry) };
    let y_count = (0..ny)
        .filter(|&i| {
            let y = 2.0 * PI * i as f64 / ny as f64;
            (0..3).any(|w| {
                let yy = y + 2.0 * PI * (w as f64 - 1.0);
                yy >= ya && yy <= yb
            })
        })
        .count();
    if y_count < 4 {
        let need = (4.0 * 2.0 * PI / (yb - ya)).ceil() as usize + 1;
        return Err(Error::Resolution(format!(
            "window in y contains {y_count} grid points; need ny >= {need}"
        )));
    }
    let za = (z0 - rz).max(lo);
    let zb = (z0 + rz).min(hi);
    let z_count = axis.nodes().iter().filter(|&&z| z >= za && z <= zb).count();
    if z_count < 4 {
        let grow = if z_count == 0 { 8.0 } else { 4.0 / z_count as f64 };
        let need = (axis.len() as f64 * grow).ceil() as usize;
        let name = match axis {
            Axis::Chebyshev(_) => "nz",
            Axis::Uniform(_) => "nv",
        };
        return Err(Error::Resolution(format!(
            "window in the transverse variable contains {z_count} grid points; need roughly {name} >= {need}"
        )));
    }
    Ok(Window { y0, z0, y: (ya, yb), z: (za, zb) })
}

/// Quadrature of `u²` over a window for many states.
pub struct WindowQuadrature {
    wy: Vec<(f64, f64)>,
    wz: Vec<f64>,
    interp: Vec<Vec<C64>>,
}

impl WindowQuadrature {
    pub fn new(axis: &Axis, win: &Window, nodes: usize) -> Self {
        let gl = GaussLegendre::new(nodes);
        // Composite rule: the periodic window may be long relative to the oscillation.
        let panels = (((win.y.1 - win.y.0) / 1.0).ceil() as usize).max(1);
        let mut wy = Vec::new();
        let step = (win.y.1 - win.y.0) / panels as f64;
        for p in 0..panels {
            let a = win.y.0 + step * p as f64;
            wy.extend(gl.mapped(a, a + step));
        }
        let (zx, wz): (Vec<f64>, Vec<f64>) = gl.mapped(win.z.0, win.z.1).unzip();
        let interp = axis.interpolation_matrix(&zx);
        Self { wy, wz, interp }
    }

    /// `∫∫_window u² dy dz`.
    pub fn integrate(&self, field: &SpectralField) -> f64 {
        let cols: Vec<Vec<C64>> = field
            .modes
            .iter()
            .map(|m| self.interp.iter().map(|row| row.iter().zip(m).map(|(a, b)| a * b).sum()).collect())
            .collect();
        let mut total = 0.0;
        for &(y, wy) in &self.wy {
            let ph: Vec<C64> = (0..cols.len()).map(|n| C64::new(0.0, n as f64 * y).exp()).collect();
            for (iz, &wz) in self.wz.iter().enumerate() {
                let mut v = cols[0][iz].re;
                for n in 1..cols.len() {
                    v += 2.0 * (ph[n] * cols[n][iz]).re;
                }
                total += wy * wz * v * v;
            }
        }
        total
    }
}

fn trapezoid(t: &[f64], f: &[f64]) -> f64 {
    t.windows(2).zip(f.windows(2)).map(|(a, b)| 0.5 * (a[1] - a[0]) * (b[0] + b[1])).sum()
}

/// Growth rate of `√Q(s)` over the final unit of fast time (at least 10 samples).
fn envelope_rate(times: &[f64], q: &[f64]) -> f64 {
    let n = times.len();
    if n < 3 {
        return f64::NAN;
    }
    let end = times[n - 1];
    let mut start = n.saturating_sub(10);
    while start > 0 && times[start - 1] >= end - 1.0 {
        start -= 1;
    }
    let idx: Vec<usize> = (start..n).filter(|&i| q[i] > 0.0).collect();
    if idx.len() < 3 {
        return f64::NAN;
    }
    let x: Vec<f64> = idx.iter().map(|&i| times[i]).collect();
    let y: Vec<f64> = idx.iter().map(|&i| 0.5 * q[i].ln()).collect();
    linear_fit(&x, &y).slope
}

/// `R(ε) = ‖u‖_{L²([0,t_ε]×Ω_ε)} / ‖⟨z⟩^m u₀‖_{H^s}^α` for one run.
///
/// The run lives in fast variables `(s, y) = (t, x)/ε`, so the physical measure
/// is `ε² ds dy/(2π) dz`.
pub fn hoelder_ratio(
    traj: &FieldTrajectory,
    params: &IllposedParams,
    data: &MetivierData,
    g: &[C64],
    ny: usize,
    opts: &WindowOptions,
) -> Result<SweepRecord> {
    let eps = data.eps;
    let sched = params
        .schedule
        .iter()
        .find(|s| (s.eps - eps).abs() <= 1e-12 * eps)
        .ok_or_else(|| Error::Precondition(format!("ε = {eps} is not in the parameter schedule")))?;
    if traj.fields.is_empty() {
        return precondition("empty trajectory");
    }
    let axis = &traj.fields[0].axis;
    let win = window(g, axis, data.n0, eps, params.k, ny, opts)?;
    let quad = WindowQuadrature::new(axis, &win, opts.nodes);
    let s_eps = sched.s_eps;
    let mut times = Vec::new();
    let mut q = Vec::new();
    for (t, f) in traj.times.iter().zip(&traj.fields) {
        if *t > s_eps * (1.0 + 1e-12) {
            break;
        }
        times.push(*t);
        q.push(quad.integrate(f));
    }
    let reached = traj.final_time() >= s_eps * (1.0 - 1e-9);
    let integral = trapezoid(&times, &q);
    let loc_norm = (eps * eps / (2.0 * PI) * integral).sqrt();
    let init_norm = data.norms.weighted_hs;
    let denom = init_norm.powf(params.alpha);
    let ratio = if loc_norm == 0.0 { 0.0 } else { loc_norm / denom };
    Ok(SweepRecord {
        eps,
        init_norm,
        loc_norm,
        ratio,
        growth_fit: envelope_rate(&times, &q),
        remainder_norm: None,
        truncated: traj.truncated || !reached,
        status: "ok".into(),
    })
}
