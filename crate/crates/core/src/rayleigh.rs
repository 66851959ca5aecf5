//! The hydrostatic Rayleigh problem `(U − c)φ'' − U''φ = 0`, its Evans function and
//! unstable roots.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::numerics::chebyshev::ChebGrid;
use crate::numerics::quad::{adaptive, graded_breakpoints, GaussLegendre};
use crate::numerics::roots::{find_roots, Analytic, Rect, Root, RootOptions, RootSearch};
use crate::profiles::ShearProfile;
use crate::semigroup::generator::{HydroGenerator, LinearGenerator};
use crate::C64;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RayleighOptions {
    /// Smallest admissible |Im c|.
    pub im_floor: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for RayleighOptions {
    fn default() -> Self {
        Self { im_floor: 1e-3, rel_tol: 1e-13, max_panels: 4000 }
    }
}

fn check_floor(c: C64, opts: &RayleighOptions) -> Result<()> {
    if !(c.im.abs() >= opts.im_floor) {
        return Err(Error::NearCriticalLayer { im: c.im.abs(), floor: opts.im_floor });
    }
    Ok(())
}

/// Break points clustered where `|U(z) − c|` is smallest.
fn critical_breakpoints(u: &ShearProfile, c: C64) -> Vec<f64> {
    let scan = 400;
    let zs: Vec<f64> = (0..=scan).map(|i| -1.0 + 2.0 * i as f64 / scan as f64).collect();
    let dist: Vec<f64> = zs.iter().map(|&z| (C64::new(u.u(z), 0.0) - c).norm()).collect();
    let mut centers = Vec::new();
    for i in 0..=scan {
        let left = if i > 0 { dist[i - 1] } else { f64::INFINITY };
        let right = if i < scan { dist[i + 1] } else { f64::INFINITY };
        if dist[i] <= left && dist[i] <= right {
            let lo = zs[i.saturating_sub(1)];
            let hi = zs[(i + 1).min(scan)];
            let f = |z: f64| -(C64::new(u.u(z), 0.0) - c).norm();
            let zmin = argmax_ternary(&f, lo, hi);
            centers.push(zmin);
        }
    }
    let mut pts = vec![-1.0, 1.0];
    for z0 in centers {
        let up = u.eval(z0)[1].abs().max(1e-3);
        let width = (c.im.abs() / up).clamp(1e-8, 0.5);
        let g = graded_breakpoints(-1.0, 1.0, z0, width, 8);
        pts.extend(g);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    pts
}

fn argmax_ternary<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    // Locate (not just evaluate) the maximizer by ternary narrowing.
    let mut lo = a;
    let mut hi = b;
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `∫_a^b (U − c)^{−p} dz` by adaptive Gauss–Kronrod on the supplied break points.
fn integral_power(u: &ShearProfile, c: C64, a: f64, b: f64, p: i32, pts: &[f64], opts: &RayleighOptions) -> (C64, f64) {
    let mut local: Vec<f64> = vec![a];
    local.extend(pts.iter().copied().filter(|&x| x > a && x < b));
    local.push(b);
    let q = adaptive(
        |z| (C64::new(u.u(z), 0.0) - c).powi(-p),
        &local,
        1e-300,
        opts.rel_tol,
        opts.max_panels,
    );
    (q.value, q.error)
}

/// Samples of the two Rayleigh solutions and Wronskian checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RayleighSolutions {
    pub c: C64,
    /// Sample abscissae, increasing from −1 to 1.
    pub z: Vec<f64>,
    pub phi1: Vec<C64>,
    pub phi2: Vec<C64>,
    /// `(z, W(z))` at the interior checkpoints.
    pub wronskian: Vec<(f64, C64)>,
    pub max_wronskian_error: f64,
}

const CHECKPOINTS: [f64; 5] = [-0.75, -0.35, 0.05, 0.45, 0.85];
const CAUCHY_POINTS: usize = 64;

/// Samples `φ₁ = U − c`, `φ₂ = (U − c)∫_{−1}^z (U − c)^{−2}` at `nq` Chebyshev points.
pub fn rayleigh_solutions(u: &ShearProfile, c: C64, nq: usize, opts: &RayleighOptions) -> Result<RayleighSolutions> {
    check_floor(c, opts)?;
    if nq < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples".into()));
    }
    let pts = critical_breakpoints(u, c);
    let grid = ChebGrid::new(nq);
    let mut z: Vec<f64> = grid.x.clone();
    z.reverse();
    z[0] = -1.0;
    *z.last_mut().unwrap() = 1.0;
    let mut phi1 = Vec::with_capacity(z.len());
    let mut phi2 = Vec::with_capacity(z.len());
    let mut acc = C64::new(0.0, 0.0);
    for (i, &zi) in z.iter().enumerate() {
        if i > 0 {
            acc += integral_power(u, c, z[i - 1], zi, 2, &pts, opts).0;
        }
        let p1 = C64::new(u.u(zi), 0.0) - c;
        phi1.push(p1);
        phi2.push(if i == 0 { C64::new(0.0, 0.0) } else { p1 * acc });
    }
    let mut wronskian = Vec::new();
    let mut max_err: f64 = 0.0;
    for &zc in &CHECKPOINTS {
        let e = u.eval(zc);
        let p1 = C64::new(e[0], 0.0) - c;
        let i0 = integral_power(u, c, -1.0, zc, 2, &pts, opts).0;
        // Local analyticity scale: distance to the nearest zero of U − c, or the profile's own scale.
        let profile_scale = match u.kind() {
            crate::profiles::ProfileKind::TanhChannel { d1 } => d1 * std::f64::consts::FRAC_PI_2,
            _ => 1.0,
        };
        let scale = (p1.norm() / e[1].abs().max(1e-12)).min(profile_scale).min(1.0);
        // φ₂ continues analytically off the axis; its derivative comes from the Cauchy
        // integral on a circle well inside the nearest singularity.
        let r = 0.25 * scale;
        let gl = GaussLegendre::cached(32);
        let zr = C64::new(zc, 0.0);
        let mut d = C64::new(0.0, 0.0);
        for k in 0..CAUCHY_POINTS {
            let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / CAUCHY_POINTS as f64);
            let step = w * r;
            let j = gl.integrate_c(0.0, 1.0, |t| (u.eval_complex(zr + step * t)[0] - c).powi(-2)) * step;
            d += (u.eval_complex(zr + step)[0] - c) * (i0 + j) / w;
        }
        let dphi2 = d / (CAUCHY_POINTS as f64 * r);
        let w = dphi2 * p1 - C64::new(e[1], 0.0) * (p1 * i0);
        max_err = max_err.max((w - 1.0).norm());
        wronskian.push((zc, w));
    }
    Ok(RayleighSolutions { c, z, phi1, phi2, wronskian, max_wronskian_error: max_err })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EvansValue {
    pub c: C64,
    /// `φ₁(−1)φ₂(1) − φ₁(1)φ₂(−1)`.
    pub d: C64,
    /// `(U(−1) − c)(U(1) − c)∫(U − c)^{−2}` by an independent fixed composite rule.
    pub reduced: C64,
    pub error_estimate: f64,
}

/// Evans function `D(c)`.
pub fn evans(u: &ShearProfile, c: C64, opts: &RayleighOptions) -> Result<EvansValue> {
    check_floor(c, opts)?;
    let pts = critical_breakpoints(u, c);
    let (i1, err) = integral_power(u, c, -1.0, 1.0, 2, &pts, opts);
    let a = C64::new(u.u(-1.0), 0.0) - c;
    let b = C64::new(u.u(1.0), 0.0) - c;
    let phi2_1 = b * i1;
    let d = a * phi2_1 - b * C64::new(0.0, 0.0);
    let reduced = a * b * fixed_integral(u, c, &pts);
    Ok(EvansValue { c, d, reduced, error_estimate: (a * b).norm() * err })
}

fn fixed_integral(u: &ShearProfile, c: C64, pts: &[f64]) -> C64 {
    let gl = GaussLegendre::cached(32);
    let mut s = C64::new(0.0, 0.0);
    for w in pts.windows(2) {
        // Split long panels so the rule stays far in its asymptotic regime.
        let pieces = ((w[1] - w[0]) / 0.125).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / pieces as f64;
        for k in 0..pieces {
            let a = w[0] + h * k as f64;
            s += gl.integrate_c(a, a + h, |z| (C64::new(u.u(z), 0.0) - c).powi(-2));
        }
    }
    s
}

/// `D(c)` as an [`Analytic`] function for the root finder.
pub struct EvansFunction<'a> {
    pub profile: &'a ShearProfile,
    pub opts: RayleighOptions,
}

impl Analytic for EvansFunction<'_> {
    fn value(&self, c: C64) -> Result<C64> {
        check_floor(c, &self.opts)?;
        let pts = critical_breakpoints(self.profile, c);
        let (i1, _) = integral_power(self.profile, c, -1.0, 1.0, 2, &pts, &self.opts);
        let a = C64::new(self.profile.u(-1.0), 0.0) - c;
        let b = C64::new(self.profile.u(1.0), 0.0) - c;
        Ok(a * b * i1)
    }

    /// Differentiates the integrand: `d/dc ∫(U − c)^{−2} = 2∫(U − c)^{−3}`.
    fn derivative(&self, c: C64) -> Result<C64> {
        check_floor(c, &self.opts)?;
        let pts = critical_breakpoints(self.profile, c);
        let (i2, _) = integral_power(self.profile, c, -1.0, 1.0, 2, &pts, &self.opts);
        let (i3, _) = integral_power(self.profile, c, -1.0, 1.0, 3, &pts, &self.opts);
        let a = C64::new(self.profile.u(-1.0), 0.0) - c;
        let b = C64::new(self.profile.u(1.0), 0.0) - c;
        Ok(-(a + b) * i2 + a * b * 2.0 * i3)
    }
}

/// Rectangle of the spectral parameter plus search resolution.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SearchBox {
    pub rect: Rect,
    pub samples: usize,
    pub max_depth: u32,
}

impl SearchBox {
    pub fn new(re: (f64, f64), im: (f64, f64)) -> Self {
        Self { rect: Rect::new(re, im), samples: 400, max_depth: 10 }
    }

    fn options(&self) -> RootOptions {
        RootOptions { min_samples: self.samples.max(400), max_depth: self.max_depth, ..RootOptions::default() }
    }
}

fn validate_box(b: &SearchBox, floor: f64) -> Result<()> {
    let (lo, hi) = b.rect.im;
    if !(lo < hi) || !(b.rect.re.0 < b.rect.re.1) {
        return Err(Error::InvalidParameter("search box intervals must be increasing".into()));
    }
    if !(lo >= floor || hi <= -floor) {
        return Err(Error::NearCriticalLayer { im: lo.abs().min(hi.abs()), floor });
    }
    Ok(())
}

/// Winding-certified roots of `D` in the box.
pub fn evans_roots(u: &ShearProfile, b: &SearchBox, opts: &RayleighOptions) -> Result<RootSearch> {
    validate_box(b, opts.im_floor)?;
    let f = EvansFunction { profile: u, opts: *opts };
    find_roots(&f, &b.rect, &b.options())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Gamma0 {
    pub gamma0: f64,
    pub c0: C64,
    pub search: RootSearch,
}

/// `γ₀ = max Im c` over the roots in the box.
pub fn gamma0_hydro(u: &ShearProfile, b: &SearchBox, opts: &RayleighOptions) -> Result<Gamma0> {
    let search = evans_roots(u, b, opts)?;
    let best: Option<&Root> = search
        .roots
        .iter()
        .filter(|r| r.z.im > 0.0)
        .max_by(|x, y| x.z.im.total_cmp(&y.z.im));
    match best {
        Some(r) => Ok(Gamma0 { gamma0: r.z.im, c0: r.z, search: search.clone() }),
        None => Err(Error::Stable(format!(
            "no unstable Rayleigh roots in [{},{}]x[{},{}] (winding {})",
            b.rect.re.0, b.rect.re.1, b.rect.im.0, b.rect.im.1, search.winding
        ))),
    }
}

/// A growing mode `e^{in(y − cs)} ω̂(z)` of the linearized vorticity equation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenResult {
    pub c: C64,
    pub n: i64,
    /// `λ = −inc`.
    pub lambda: C64,
    /// Chebyshev nodes (descending from 1 to −1).
    pub z: Vec<f64>,
    /// `ω̂ = U''φ₂/(U − c)`, normalized to unit L² norm.
    pub omega: Vec<C64>,
    /// `φ₂` with the same normalization.
    pub phi: Vec<C64>,
    pub rayleigh_residual: f64,
    pub generator_residual: f64,
}

pub const EIGEN_TOL: f64 = 1e-6;

/// Eigenfunction for a root `c` at mode `n` on an `nz`-interval Chebyshev grid.
pub fn eigenfunction_hydro(u: &ShearProfile, c: C64, n: i64, nz: usize, opts: &RayleighOptions) -> Result<EigenResult> {
    if n == 0 || (n as f64) * c.im <= 0.0 {
        return precondition(format!("growth requires n·Im c > 0 (n = {n}, Im c = {})", c.im));
    }
    let d = evans(u, c, opts)?;
    if d.d.norm() >= 1e-8 {
        return precondition(format!("|D(c)| = {:e} is not below 1e-8; polish the root first", d.d.norm()));
    }
    if nz < 16 {
        return precondition("eigenfunction grid needs nz >= 16");
    }
    let sol = rayleigh_solutions(u, c, nz, opts)?;
    // `sol.z` ascends; the Chebyshev grid descends.
    let grid = Arc::new(ChebGrid::new(nz));
    let m = nz + 1;
    let mut phi: Vec<C64> = (0..m).map(|j| sol.phi2[m - 1 - j]).collect();
    let z = grid.x.clone();
    let mut omega: Vec<C64> = z
        .iter()
        .zip(&phi)
        .map(|(&zz, p)| {
            let e = u.eval(zz);
            *p * e[2] / (C64::new(e[0], 0.0) - c)
        })
        .collect();
    // Rayleigh residual (U − c)φ'' − U''φ with the spectral second derivative.
    let d2phi: Vec<C64> = (0..m)
        .map(|i| (0..m).map(|j| phi[j] * grid.d2[(i, j)]).sum())
        .collect();
    let mut res = Vec::with_capacity(m);
    let mut scale = Vec::with_capacity(m);
    for i in 0..m {
        let e = u.eval(z[i]);
        let uc = C64::new(e[0], 0.0) - c;
        res.push(uc * d2phi[i] - phi[i] * e[2]);
        scale.push(phi[i] * e[2]);
    }
    let sn = grid.cc_l2(&scale);
    let rayleigh_residual = if sn > 0.0 { grid.cc_l2(&res) / sn } else { grid.cc_l2(&res) };
    let norm = grid.cc_l2(&omega);
    if !(norm > 0.0) {
        return Err(Error::Internal("eigenfunction vanished".into()));
    }
    omega.iter_mut().for_each(|v| *v /= norm);
    phi.iter_mut().for_each(|v| *v /= norm);
    let lambda = C64::new(0.0, -(n as f64)) * c;
    let gen = HydroGenerator::with_grid(u, n, grid.clone(), true)?;
    let applied = gen.apply(&omega);
    let diff: Vec<C64> = applied.iter().zip(&omega).map(|(a, w)| a - lambda * w).collect();
    let generator_residual = grid.cc_l2(&diff) / grid.cc_l2(&omega);
    if rayleigh_residual > EIGEN_TOL || generator_residual > EIGEN_TOL {
        return Err(Error::Resolution(format!(
            "eigenfunction residuals (Rayleigh {rayleigh_residual:e}, generator {generator_residual:e}) exceed {EIGEN_TOL:e} at nz = {nz}; try nz = {}",
            2 * nz
        )));
    }
    Ok(EigenResult { c, n, lambda, z, omega, phi, rayleigh_residual, generator_residual })
}
