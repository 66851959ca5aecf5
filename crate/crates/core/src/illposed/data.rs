use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};
use crate::numerics::fourier::{wavenumber, FftPair};
use crate::semigroup::{Axis, SpectralField};
use crate::C64;

/// Oscillatory initial data `ε^M Re(e^{in₀x/ε} ĝ)` in both representations.
#[derive(Debug, Clone)]
pub struct MetivierData {
    pub eps: f64,
    pub n0: usize,
    pub big_m: u32,
    /// Physical samples on `nx` equispaced points of `x ∈ [0, 2π)`, row-major in `x`.
    pub nx: usize,
    pub physical: Vec<f64>,
    /// Fast-variable representation `y = x/ε` on `[0, 2π)`.
    pub field: SpectralField,
    pub norms: DataNorms,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DataNorms {
    /// `‖data‖_{L²}` (normalized measure in `x`).
    pub l2: f64,
    /// `‖⟨z⟩^m data‖_{H^s}`.
    pub weighted_hs: f64,
}

/// Smallest power of two carrying 8 points per oscillation.
pub fn physical_points(eps: f64, n0: usize) -> usize {
    let need = (8.0 * n0 as f64 / eps).ceil() as usize;
    need.max(8).next_power_of_two()
}

/// Builds the data from eigenfunction samples `g` on `axis`.
///
/// `n0/ε` must be an integer so the data are periodic on `𝕋`. `nx = None` picks
/// [`physical_points`].
pub fn metivier_data(
    g: &[C64],
    axis: &Axis,
    eps: f64,
    big_m: u32,
    n0: usize,
    s: f64,
    m: u32,
    nx: Option<usize>,
) -> Result<MetivierData> {
    if g.len() != axis.len() {
        return precondition(format!("profile has {} samples, grid has {}", g.len(), axis.len()));
    }
    if n0 == 0 {
        return precondition("n₀ must be positive");
    }
    if !(eps > 0.0 && eps < 1.0) {
        return precondition(format!("ε = {eps} must lie in (0, 1)"));
    }
    let freq = n0 as f64 / eps;
    if (freq - freq.round()).abs() > 1e-9 {
        return precondition(format!("n₀/ε = {freq} must be an integer"));
    }
    let nx = nx.unwrap_or_else(|| physical_points(eps, n0));
    if (nx as f64) < 8.0 * freq {
        return Err(crate::Error::Resolution(format!(
            "{nx} points in x under-resolve the oscillation; need nx >= {}",
            (8.0 * freq).ceil()
        )));
    }
    if !(s >= 0.0) {
        return precondition("Sobolev index must be nonnegative");
    }
    let amp = eps.powi(big_m as i32);
    let nodes = axis.nodes();
    let nz = nodes.len();
    let mut physical = vec![0.0; nx * nz];
    for i in 0..nx {
        let x = 2.0 * std::f64::consts::PI * i as f64 / nx as f64;
        let ph = C64::new(0.0, freq * x).exp();
        for j in 0..nz {
            physical[i * nz + j] = amp * (ph * g[j]).re;
        }
    }

    let mut field = SpectralField::zeros(axis.clone(), n0);
    field.modes[n0] = g.iter().map(|v| v * (0.5 * amp)).collect();

    let norms = data_norms(&physical, nx, axis, s, m)?;
    Ok(MetivierData { eps, n0, big_m, nx, physical, field, norms })
}

/// `‖data‖_{L²}` and `‖⟨z⟩^m data‖_{H^s}` of physical samples, spectrally in both variables.
///
/// `‖f‖²_{H^s} = Σ_ξ Σ_{b ≤ s} (1 + ξ²)^{s−b} ‖∂_z^b f̂_ξ‖²`.
pub fn data_norms(physical: &[f64], nx: usize, axis: &Axis, s: f64, m: u32) -> Result<DataNorms> {
    let nz = axis.len();
    let weight: Vec<f64> = axis.nodes().iter().map(|z| (1.0 + z * z).powf(m as f64 / 2.0)).collect();
    let fft = FftPair::new(nx);
    let bmax = s.floor() as usize;
    if bmax > axis.validity_order() {
        return precondition(format!(
            "Sobolev index {s} exceeds the differentiation validity order {}",
            axis.validity_order()
        ));
    }
    let mut cols = vec![vec![C64::new(0.0, 0.0); nx]; nz];
    for i in 0..nx {
        for j in 0..nz {
            cols[j][i] = C64::new(physical[i * nz + j], 0.0);
        }
    }
    let mut l2w = 0.0;
    let mut coeffs = vec![vec![C64::new(0.0, 0.0); nz]; nx];
    for (j, col) in cols.iter_mut().enumerate() {
        fft.forward(col);
        for (k, v) in col.iter().enumerate() {
            coeffs[k][j] = *v / nx as f64;
        }
    }
    let mut hs = 0.0;
    for (k, c) in coeffs.iter().enumerate() {
        if c.iter().all(|v| v.norm() == 0.0) {
            continue;
        }
        let raw = axis.l2_norm(c);
        l2w += raw * raw;
        let xi = wavenumber(k, nx);
        let wc: Vec<C64> = c.iter().zip(&weight).map(|(a, w)| a * *w).collect();
        let d = axis.derivative_norms(&wc, bmax, 0);
        for (b, nb) in d.iter().enumerate() {
            hs += (1.0 + xi * xi).powf(s - b as f64) * nb * nb;
        }
    }
    Ok(DataNorms { l2: l2w.sqrt(), weighted_hs: hs.sqrt() })
}
