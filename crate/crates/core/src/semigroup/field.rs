use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::numerics::chebyshev::{chop, derivative_coefficients, ChebGrid};
use crate::numerics::fourier::{periodic_derivative, FftPair};
use crate::C64;

/// Periodic uniform velocity grid `u_j = −v_max + j h`, `h = 2 v_max / n`.
#[derive(Debug, Clone)]
pub struct UniformGrid {
    pub v_max: f64,
    pub n: usize,
    pub h: f64,
    pub nodes: Vec<f64>,
    fft: FftPair,
}

impl UniformGrid {
    pub fn new(v_max: f64, n: usize) -> Self {
        let h = 2.0 * v_max / n as f64;
        let nodes = (0..n).map(|j| -v_max + h * j as f64).collect();
        Self { v_max, n, h, nodes, fft: FftPair::new(n) }
    }

    pub fn fft(&self) -> &FftPair {
        &self.fft
    }

    /// Periodic cardinal function of the grid: `Σ_j f_j K(u − u_j)` interpolates.
    pub fn kernel(&self, d: f64) -> f64 {
        let n = self.n as f64;
        let t = d / (2.0 * self.v_max) * 2.0 * std::f64::consts::PI;
        let half = (0.5 * t).sin();
        if half.abs() < 1e-14 {
            return 1.0;
        }
        if self.n % 2 == 0 {
            (((n - 1.0) * 0.5 * t).sin() / half + (0.5 * n * t).cos()) / n
        } else {
            (0.5 * n * t).sin() / half / n
        }
    }

    /// Trigonometric interpolation of periodic samples at `u`.
    pub fn interpolate(&self, values: &[C64], u: f64) -> C64 {
        values
            .iter()
            .zip(&self.nodes)
            .map(|(v, x)| v * self.kernel(u - x))
            .sum()
    }
}

/// The non-periodic direction of a field: `z ∈ [−1,1]` or `v ∈ [−v_max, v_max)`.
#[derive(Debug, Clone)]
pub enum Axis {
    Chebyshev(Arc<ChebGrid>),
    Uniform(Arc<UniformGrid>),
}

impl Axis {
    pub fn chebyshev(n: usize) -> Self {
        Axis::Chebyshev(Arc::new(ChebGrid::new(n)))
    }

    pub fn uniform(v_max: f64, n: usize) -> Self {
        Axis::Uniform(Arc::new(UniformGrid::new(v_max, n)))
    }

    pub fn len(&self) -> usize {
        match self {
            Axis::Chebyshev(g) => g.len(),
            Axis::Uniform(g) => g.n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nodes(&self) -> &[f64] {
        match self {
            Axis::Chebyshev(g) => &g.x,
            Axis::Uniform(g) => &g.nodes,
        }
    }

    /// Quadrature weights of the grid (Clenshaw–Curtis or rectangle rule).
    pub fn weights(&self) -> Vec<f64> {
        match self {
            Axis::Chebyshev(g) => g.cc_weights.clone(),
            Axis::Uniform(g) => vec![g.h; g.n],
        }
    }

    pub fn l2_norm(&self, values: &[C64]) -> f64 {
        match self {
            Axis::Chebyshev(g) => g.cc_l2(values),
            Axis::Uniform(g) => (g.h * values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt(),
        }
    }

    /// Largest derivative order whose spectral derivative is trusted on this grid.
    pub fn validity_order(&self) -> usize {
        match self {
            Axis::Chebyshev(g) => g.validity_order(),
            Axis::Uniform(_) => 6,
        }
    }

    /// `‖⟨x⟩^m ∂^k f‖_{L²}` for `k = 0..=kmax` (`m = 0` for no weight).
    pub fn derivative_norms(&self, values: &[C64], kmax: usize, m: u32) -> Vec<f64> {
        let weight: Vec<f64> = self
            .nodes()
            .iter()
            .map(|x| (1.0 + x * x).powf(m as f64 / 2.0))
            .collect();
        let weighted = |v: &[C64]| -> Vec<C64> {
            if m == 0 {
                v.to_vec()
            } else {
                v.iter().zip(&weight).map(|(a, w)| a * *w).collect()
            }
        };
        let mut out = Vec::with_capacity(kmax + 1);
        match self {
            Axis::Chebyshev(g) => {
                let mut a = g.coefficients(values);
                chop(&mut a, 1e-14);
                for k in 0..=kmax {
                    if k > 0 {
                        a = derivative_coefficients(&a);
                    }
                    if m == 0 {
                        out.push(g.series_l2(&a));
                    } else {
                        out.push(g.l2_norm(&weighted(&g.values_from_coefficients(&a))));
                    }
                }
            }
            Axis::Uniform(g) => {
                for k in 0..=kmax {
                    let d = periodic_derivative(&g.fft, values, 2.0 * g.v_max, k);
                    out.push(self.l2_norm(&weighted(&d)));
                }
            }
        }
        out
    }

    /// Value of the grid interpolant at `x`.
    pub fn interpolate(&self, values: &[C64], x: f64) -> C64 {
        match self {
            Axis::Chebyshev(g) => g.interpolate(values, x),
            Axis::Uniform(g) => g.interpolate(values, x),
        }
    }

    /// Dense interpolation operator from grid values to the points `xs` (row per point).
    pub fn interpolation_matrix(&self, xs: &[f64]) -> Vec<Vec<C64>> {
        match self {
            Axis::Chebyshev(g) => xs
                .iter()
                .map(|&x| g.interpolation_row(x).into_iter().map(|r| C64::new(r, 0.0)).collect())
                .collect(),
            Axis::Uniform(g) => xs
                .iter()
                .map(|&x| (0..g.n).map(|j| C64::new(g.kernel(x - g.nodes[j]), 0.0)).collect())
                .collect(),
        }
    }
}

/// One Fourier mode of a field on an [`Axis`], at time `s`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeState {
    pub n: i64,
    pub s: f64,
    pub values: Vec<C64>,
}

impl ModeState {
    pub fn new(n: i64, s: f64, values: Vec<C64>) -> Self {
        Self { n, s, values }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// A real field `Σ_n c_n(x) e^{iny}` on `𝕋 × axis`, stored for `n ≥ 0` (`c_{−n} = conj c_n`).
#[derive(Debug, Clone)]
pub struct SpectralField {
    pub axis: Axis,
    pub modes: Vec<Vec<C64>>,
}

impl SpectralField {
    pub fn zeros(axis: Axis, n_max: usize) -> Self {
        let len = axis.len();
        Self { axis, modes: vec![vec![C64::new(0.0, 0.0); len]; n_max + 1] }
    }

    pub fn n_max(&self) -> usize {
        self.modes.len() - 1
    }

    /// `‖·‖_{L²(𝕋×axis)}` with the normalized measure on 𝕋.
    pub fn l2_norm(&self) -> f64 {
        let mut s = 0.0;
        for (n, m) in self.modes.iter().enumerate() {
            let v = self.axis.l2_norm(m).powi(2);
            s += if n == 0 { v } else { 2.0 * v };
        }
        s.sqrt()
    }

    /// Field value at `(y, x)` by Fourier synthesis and grid interpolation.
    pub fn value_at(&self, y: f64, x: f64) -> f64 {
        let mut s = self.axis.interpolate(&self.modes[0], x).re;
        for (n, m) in self.modes.iter().enumerate().skip(1) {
            let c = self.axis.interpolate(m, x);
            s += 2.0 * (c * C64::new(0.0, n as f64 * y).exp()).re;
        }
        s
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        let n = self.modes.len().max(other.modes.len());
        let len = self.axis.len();
        let zero = vec![C64::new(0.0, 0.0); len];
        let modes = (0..n)
            .map(|k| {
                let a = self.modes.get(k).unwrap_or(&zero);
                let b = other.modes.get(k).unwrap_or(&zero);
                a.iter().zip(b).map(|(p, q)| p - q).collect()
            })
            .collect();
        SpectralField { axis: self.axis.clone(), modes }
    }
}
