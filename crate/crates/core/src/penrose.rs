//! Kinetic dispersion functions, their right half-plane roots and growing modes.
//!
//! With `𝓛_1 f = −i(uf − F'φ(f))` a mode `f̂ = iF'φ̂/(λ + iu)` exists iff
//! `1 − φ(iF'/(λ + iu)) = 0`, which gives
//!
//! * kinetic incompressible Euler, `φ(f) = −∫u²f`: `D(λ) = 1 + i∫u²F'/(λ + iu) du`;
//! * Vlasov–Dirac–Benney, `φ(f) = ∫f`: `D(λ) = 1 − i∫F'/(λ + iu) du`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, precondition, Error, Result};
use crate::numerics::quad::{graded_breakpoints, GaussLegendre};
use crate::numerics::roots::{find_roots, Analytic, Rect, RootOptions, RootSearch};
use crate::profiles::{Marginal, RadialEquilibrium};
use crate::semigroup::generator::{KineticGenerator, LinearGenerator};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DispersionKernel {
    Kie,
    Vdb,
}

impl fmt::Display for DispersionKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DispersionKernel::Kie => "kie",
            DispersionKernel::Vdb => "vdb",
        })
    }
}

impl FromStr for DispersionKernel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "kie" => Ok(DispersionKernel::Kie),
            "vdb" => Ok(DispersionKernel::Vdb),
            other => invalid(format!("unknown kernel '{other}' (expected kie or vdb)")),
        }
    }
}

impl DispersionKernel {
    fn weight(&self, u: f64) -> f64 {
        match self {
            DispersionKernel::Kie => u * u,
            DispersionKernel::Vdb => 1.0,
        }
    }

    /// `D = 1 + sign · i ∫ w F'/(λ + iu)`.
    fn sign(&self) -> f64 {
        match self {
            DispersionKernel::Kie => 1.0,
            DispersionKernel::Vdb => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PenroseOptions {
    pub re_floor: f64,
    pub gl_points: usize,
    /// Widest quadrature panel away from the resonance.
    pub base_panel: f64,
}

impl Default for PenroseOptions {
    fn default() -> Self {
        Self { re_floor: 1e-3, gl_points: 64, base_panel: 0.5 }
    }
}

fn panels(m: &Marginal, lambda: C64, opts: &PenroseOptions) -> Vec<f64> {
    let base = ((2.0 * m.v_max / opts.base_panel).ceil() as usize).max(1);
    let width = lambda.re.min(0.05);
    graded_breakpoints(-m.v_max, m.v_max, -lambda.im, width, base)
}

/// `∫ w(u) F'(u) (λ + iu)^{-p} du`.
fn moment_integral(m: &Marginal, lambda: C64, kernel: DispersionKernel, p: i32, opts: &PenroseOptions) -> C64 {
    let gl = GaussLegendre::cached(opts.gl_points);
    let pts = panels(m, lambda, opts);
    let mut s = C64::new(0.0, 0.0);
    for w in pts.windows(2) {
        s += gl.integrate_c(w[0], w[1], |u| {
            let fp = m.eval_fp(u);
            if fp == 0.0 {
                return C64::new(0.0, 0.0);
            }
            (C64::new(lambda.re, lambda.im + u)).powi(-p) * (kernel.weight(u) * fp)
        });
    }
    s
}

fn check_floor(lambda: C64, opts: &PenroseOptions) -> Result<()> {
    if !(lambda.re >= opts.re_floor) {
        return precondition(format!(
            "Re λ = {:e} is below the floor {:e}; no analytic continuation is implemented",
            lambda.re, opts.re_floor
        ));
    }
    Ok(())
}

/// Dispersion function `D(λ)` for `Re λ ≥` floor.
pub fn dispersion(m: &Marginal, lambda: C64, kernel: DispersionKernel, opts: &PenroseOptions) -> Result<C64> {
    check_floor(lambda, opts)?;
    let i = C64::new(0.0, kernel.sign());
    Ok(1.0 + i * moment_integral(m, lambda, kernel, 1, opts))
}

/// `D'(λ)` by differentiating the integrand.
pub fn dispersion_derivative(m: &Marginal, lambda: C64, kernel: DispersionKernel, opts: &PenroseOptions) -> Result<C64> {
    check_floor(lambda, opts)?;
    let i = C64::new(0.0, kernel.sign());
    Ok(-i * moment_integral(m, lambda, kernel, 2, opts))
}

pub struct DispersionFunction<'a> {
    pub marginal: &'a Marginal,
    pub kernel: DispersionKernel,
    pub opts: PenroseOptions,
}

impl Analytic for DispersionFunction<'_> {
    fn value(&self, z: C64) -> Result<C64> {
        dispersion(self.marginal, z, self.kernel, &self.opts)
    }
    fn derivative(&self, z: C64) -> Result<C64> {
        dispersion_derivative(self.marginal, z, self.kernel, &self.opts)
    }
}

/// Winding-certified roots of `D` in a right half-plane box.
pub fn kinetic_roots(
    m: &Marginal,
    rect: &Rect,
    kernel: DispersionKernel,
    root_opts: &RootOptions,
    opts: &PenroseOptions,
) -> Result<RootSearch> {
    if !(rect.re.0 < rect.re.1 && rect.im.0 < rect.im.1) {
        return invalid("search box intervals must be increasing");
    }
    if rect.re.0 < opts.re_floor {
        return precondition(format!("box starts at Re λ = {} below the floor {}", rect.re.0, opts.re_floor));
    }
    let f = DispersionFunction { marginal: m, kernel, opts: *opts };
    find_roots(&f, rect, root_opts)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KineticGamma0 {
    pub gamma0: f64,
    pub lambda0: C64,
    pub search: RootSearch,
}

/// `γ₀ = max Re λ` over the roots; radial equilibria make this direction independent.
pub fn gamma0_kinetic(
    m: &Marginal,
    rect: &Rect,
    kernel: DispersionKernel,
    root_opts: &RootOptions,
    opts: &PenroseOptions,
) -> Result<KineticGamma0> {
    let search = kinetic_roots(m, rect, kernel, root_opts, opts)?;
    match search.roots.iter().max_by(|a, b| a.z.re.total_cmp(&b.z.re).then(b.z.im.abs().total_cmp(&a.z.im.abs()))) {
        Some(r) => Ok(KineticGamma0 { gamma0: r.z.re, lambda0: r.z, search: search.clone() }),
        None => Err(Error::Stable(format!(
            "no {kernel} dispersion roots in [{},{}]x[{},{}] (winding {})",
            rect.re.0, rect.re.1, rect.im.0, rect.im.1, search.winding
        ))),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dispersion3DCheck {
    pub direction: [f64; 3],
    pub omega: [C64; 3],
    /// `1 + Σ n̂_j n̂_ℓ ∫ v_j v_ℓ (∇μ·n̂)/(n̂·(v − ω)) dv`.
    pub value_3d: C64,
    /// The kie kernel at `λ = −i n̂·ω`.
    pub value_1d: C64,
    pub discrepancy: f64,
}

/// Compares the 3-D dispersion integral with its 1-D reduction.
pub fn dispersion_3d_check(
    eq: &RadialEquilibrium,
    direction: [f64; 3],
    omega: [C64; 3],
    resolution: usize,
    opts: &PenroseOptions,
) -> Result<Dispersion3DCheck> {
    if eq.dim != 3 {
        return precondition("the 3-D dispersion check needs a 3-D equilibrium");
    }
    let marginal = eq.marginal_reduce(&direction)?;
    let w1: C64 = (0..3).map(|j| omega[j] * direction[j]).sum();
    if w1.im == 0.0 {
        return precondition("Im(n̂·ω) must be nonzero");
    }
    if resolution < 16 {
        return invalid("3-D quadrature needs at least 16 points per direction");
    }
    // The equilibria decay like e^{-r²} or faster beyond their core; [-L, L]³ captures them.
    let core = match eq.kind {
        crate::profiles::EquilibriumKind::Maxwellian => 0.0,
        crate::profiles::EquilibriumKind::Shell { a, .. } => a,
    };
    let l = (core + 6.0).min(eq.v_max);
    let n = resolution;
    let h = 2.0 * l / n as f64;
    let xs: Vec<f64> = (0..n).map(|i| -l + h * (i as f64 + 0.5)).collect();
    let slices: Vec<C64> = xs
        .par_iter()
        .map(|&x| {
            let mut s = C64::new(0.0, 0.0);
            for &y in &xs {
                for &z in &xs {
                    let r2 = x * x + y * y + z * z;
                    let (_, mp, _) = eq.mu(r2);
                    if mp == 0.0 {
                        continue;
                    }
                    let nv = direction[0] * x + direction[1] * y + direction[2] * z;
                    s += (nv * nv * 2.0 * mp * nv) / (C64::new(nv, 0.0) - w1);
                }
            }
            s
        })
        .collect();
    let value_3d = 1.0 + slices.iter().sum::<C64>() * (h * h * h);
    let lambda = C64::new(0.0, -1.0) * w1;
    let value_1d = if lambda.re > 0.0 {
        dispersion(marginal, lambda, DispersionKernel::Kie, opts)?
    } else {
        dispersion(marginal, -lambda.conj(), DispersionKernel::Kie, opts)?.conj()
    };
    let discrepancy = (value_3d - value_1d).norm();
    if discrepancy > 1e-4 {
        return Err(Error::Resolution(format!(
            "3-D/1-D discrepancy {discrepancy:e} above 1e-4; raise the resolution above {resolution}"
        )));
    }
    Ok(Dispersion3DCheck { direction, omega, value_3d, value_1d, discrepancy })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KineticEigenResult {
    pub lambda: C64,
    pub n: i64,
    /// Eigenvalue of `𝓛_n`: `|n|λ` for `n > 0`, `|n|λ̄` for `n < 0`.
    pub full_eigenvalue: C64,
    pub u: Vec<f64>,
    /// `f̂ = iF'φ̂/(λ + iu)` with `φ̂ = 1` (conjugated for `n < 0`).
    pub f: Vec<C64>,
    pub phi: C64,
    pub generator_residual: f64,
    /// `|φ(f̂) − φ̂|` with the continuous moment quadrature.
    pub closure_residual: f64,
}

/// Growing mode of `𝓛_n` for a dispersion root `λ`.
#[allow(clippy::too_many_arguments)]
pub fn growing_mode_kinetic(
    m: &Marginal,
    lambda: C64,
    n: i64,
    nv: usize,
    v_max: f64,
    kernel: DispersionKernel,
    opts: &PenroseOptions,
) -> Result<KineticEigenResult> {
    if n == 0 {
        return precondition("mode index n must be nonzero");
    }
    if !(lambda.re > 0.0) {
        return precondition("growing modes need Re λ > 0");
    }
    let d = dispersion(m, lambda, kernel, opts)?;
    if d.norm() >= 1e-8 {
        return precondition(format!("|D(λ)| = {:e} is not below 1e-8", d.norm()));
    }
    let gen = KineticGenerator::new(m, n, nv, v_max, kernel, true)?;
    let u = gen.grid().nodes.clone();
    let mut f: Vec<C64> = u
        .iter()
        .zip(&gen.fprime)
        .map(|(&uu, &fp)| C64::new(0.0, fp) / C64::new(lambda.re, lambda.im + uu))
        .collect();
    let mut full = lambda * n.unsigned_abs() as f64;
    if n < 0 {
        f.iter_mut().for_each(|v| *v = v.conj());
        full = full.conj();
    }
    let applied = gen.apply(&f);
    let axis = gen.axis();
    let diff: Vec<C64> = applied.iter().zip(&f).map(|(a, b)| a - full * b).collect();
    let generator_residual = axis.l2_norm(&diff) / axis.l2_norm(&f);
    // Continuous moment of the mode profile: φ(iF'/(λ + iu)).
    let phi_of_f = C64::new(0.0, -kernel.sign()) * moment_integral(m, lambda, kernel, 1, opts);
    let closure_residual = (phi_of_f - 1.0).norm();
    if generator_residual > 1e-6 {
        return Err(Error::Resolution(format!(
            "growing-mode residual {generator_residual:e} above 1e-6 at nv = {nv}; try nv = {}",
            2 * nv
        )));
    }
    Ok(KineticEigenResult {
        lambda,
        n,
        full_eigenvalue: full,
        u,
        f,
        phi: C64::new(1.0, 0.0),
        generator_residual,
        closure_residual,
    })
}
