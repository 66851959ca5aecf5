//! FFT helpers for periodic spectral differentiation and interpolation.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::C64;

/// Forward/inverse FFT pair of a fixed length.
#[derive(Clone)]
pub struct FftPair {
    pub n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FftPair({})", self.n)
    }
}

impl FftPair {
    pub fn new(n: usize) -> Self {
        let mut p = FftPlanner::new();
        Self { n, fwd: p.plan_fft_forward(n), inv: p.plan_fft_inverse(n) }
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, x: &mut [C64]) {
        self.fwd.process(x);
    }

    /// Normalized inverse transform in place (`inverse(forward(x)) == x`).
    pub fn inverse(&self, x: &mut [C64]) {
        self.inv.process(x);
        let s = 1.0 / self.n as f64;
        x.iter_mut().for_each(|v| *v *= s);
    }
}

/// Signed integer wavenumber of FFT bin `j` for length `n`.
pub fn wavenumber(j: usize, n: usize) -> f64 {
    if j <= n / 2 { j as f64 } else { j as f64 - n as f64 }
}

/// `k`-th derivative of periodic samples on an interval of length `period`.
/// The Nyquist mode is dropped for odd orders.
pub fn periodic_derivative(fft: &FftPair, values: &[C64], period: f64, k: usize) -> Vec<C64> {
    let n = values.len();
    let mut a = values.to_vec();
    if k == 0 {
        return a;
    }
    fft.forward(&mut a);
    let scale = 2.0 * std::f64::consts::PI / period;
    for (j, v) in a.iter_mut().enumerate() {
        if n % 2 == 0 && j == n / 2 && k % 2 == 1 {
            *v = C64::new(0.0, 0.0);
            continue;
        }
        let ik = C64::new(0.0, wavenumber(j, n) * scale);
        *v *= ik.powu(k as u32);
    }
    fft.inverse(&mut a);
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_sine() {
        let n = 32;
        let fft = FftPair::new(n);
        let x: Vec<f64> = (0..n).map(|j| 2.0 * std::f64::consts::PI * j as f64 / n as f64).collect();
        let v: Vec<C64> = x.iter().map(|&t| C64::new((3.0 * t).sin(), 0.0)).collect();
        let d = periodic_derivative(&fft, &v, 2.0 * std::f64::consts::PI, 2);
        for (t, dv) in x.iter().zip(&d) {
            assert!((dv.re + 9.0 * (3.0 * t).sin()).abs() < 1e-11);
        }
    }
}
