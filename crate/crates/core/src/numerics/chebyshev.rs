//! Chebyshev–Lobatto collocation on `[-1, 1]`.
//!
//! Nodes are `x_j = cos(jπ/N)`, `j = 0..=N`, ordered from `+1` down to `-1`.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::quad::GaussLegendre;
use crate::C64;

#[derive(Debug, Clone)]
pub struct ChebGrid {
    pub n: usize,
    pub x: Vec<f64>,
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
    /// Clenshaw–Curtis weights.
    pub cc_weights: Vec<f64>,
    bary: Vec<f64>,
    /// `cos(k j π / N)`, row `k`, column `j`.
    cos_table: Vec<f64>,
    gl: Arc<GaussLegendre>,
    /// `T_k(ξ_q)` on the Gauss–Legendre nodes, row `q`, column `k`.
    gl_table: Vec<f64>,
}

impl ChebGrid {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "Chebyshev grid needs N >= 2");
        let pi = std::f64::consts::PI;
        let x: Vec<f64> = (0..=n).map(|j| (j as f64 * pi / n as f64).cos()).collect();
        let c = |i: usize| {
            let base = if i == 0 || i == n { 2.0 } else { 1.0 };
            if i % 2 == 0 { base } else { -base }
        };
        let mut d1 = DMatrix::zeros(n + 1, n + 1);
        for i in 0..=n {
            let mut row = 0.0;
            for j in 0..=n {
                if i != j {
                    let v = c(i) / c(j) / (x[i] - x[j]);
                    d1[(i, j)] = v;
                    row += v;
                }
            }
            d1[(i, i)] = -row;
        }
        let d2 = &d1 * &d1;
        let cc_weights = clenshaw_curtis(n);
        let bary = (0..=n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n { 0.5 * s } else { s }
            })
            .collect();
        let mut cos_table = vec![0.0; (n + 1) * (n + 1)];
        for k in 0..=n {
            for j in 0..=n {
                // Reduce the angle index exactly before taking the cosine.
                let m = (k * j) % (2 * n);
                cos_table[k * (n + 1) + j] = (m as f64 * pi / n as f64).cos();
            }
        }
        let gl = GaussLegendre::cached(n + 2);
        let mut gl_table = vec![0.0; gl.nodes.len() * (n + 1)];
        for (q, &xi) in gl.nodes.iter().enumerate() {
            let mut t0 = 1.0;
            let mut t1 = xi;
            for k in 0..=n {
                let v = match k {
                    0 => 1.0,
                    1 => xi,
                    _ => {
                        let t2 = 2.0 * xi * t1 - t0;
                        t0 = t1;
                        t1 = t2;
                        t2
                    }
                };
                gl_table[q * (n + 1) + k] = v;
            }
        }
        Self { n, x, d1, d2, cc_weights, bary, cos_table, gl, gl_table }
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Chebyshev coefficients `a_k` of the interpolant of nodal values.
    pub fn coefficients(&self, values: &[C64]) -> Vec<C64> {
        let n = self.n;
        assert_eq!(values.len(), n + 1);
        let mut a = vec![C64::new(0.0, 0.0); n + 1];
        for (k, ak) in a.iter_mut().enumerate() {
            let row = &self.cos_table[k * (n + 1)..(k + 1) * (n + 1)];
            let mut s = C64::new(0.0, 0.0);
            for j in 0..=n {
                let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                s += values[j] * (w * row[j]);
            }
            let scale = if k == 0 || k == n { 1.0 / n as f64 } else { 2.0 / n as f64 };
            *ak = s * scale;
        }
        a
    }

    /// Nodal values of a Chebyshev series of degree at most `N`.
    pub fn values_from_coefficients(&self, a: &[C64]) -> Vec<C64> {
        let n = self.n;
        (0..=n)
            .map(|j| {
                let mut s = C64::new(0.0, 0.0);
                for (k, ak) in a.iter().enumerate().take(n + 1) {
                    s += ak * self.cos_table[k * (n + 1) + j];
                }
                s
            })
            .collect()
    }

    /// Exact L² norm on `[-1,1]` of a Chebyshev series of degree at most `N`.
    pub fn series_l2(&self, a: &[C64]) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for (q, w) in self.gl.weights.iter().enumerate() {
            let row = &self.gl_table[q * (n + 1)..(q + 1) * (n + 1)];
            let mut v = C64::new(0.0, 0.0);
            for (k, ak) in a.iter().enumerate() {
                v += ak * row[k];
            }
            s += w * v.norm_sqr();
        }
        s.sqrt()
    }

    /// L² norm of the polynomial interpolant of nodal values.
    pub fn l2_norm(&self, values: &[C64]) -> f64 {
        self.series_l2(&self.coefficients(values))
    }

    /// Clenshaw–Curtis L² norm of nodal values.
    pub fn cc_l2(&self, values: &[C64]) -> f64 {
        values
            .iter()
            .zip(&self.cc_weights)
            .map(|(v, w)| w * v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Barycentric interpolation of nodal values at an arbitrary point of `[-1,1]`.
    pub fn interpolate(&self, values: &[C64], x: f64) -> C64 {
        let mut num = C64::new(0.0, 0.0);
        let mut den = 0.0;
        for j in 0..=self.n {
            let d = x - self.x[j];
            if d == 0.0 {
                return values[j];
            }
            let t = self.bary[j] / d;
            num += values[j] * t;
            den += t;
        }
        num / den
    }

    /// Row vector `r` with `Σ_j r_j v_j` equal to the interpolant at `x`.
    pub fn interpolation_row(&self, x: f64) -> Vec<f64> {
        let mut r = vec![0.0; self.n + 1];
        for j in 0..=self.n {
            if x == self.x[j] {
                r[j] = 1.0;
                return r;
            }
        }
        let mut den = 0.0;
        for j in 0..=self.n {
            let t = self.bary[j] / (x - self.x[j]);
            r[j] = t;
            den += t;
        }
        r.iter_mut().for_each(|v| *v /= den);
        r
    }

    /// Derivative orders up to which the grid's spectral derivatives are trusted:
    /// `floor(N / 12)`.
    pub fn validity_order(&self) -> usize {
        self.n / 12
    }
}

/// Coefficients of `p'` from those of `p`.
pub fn derivative_coefficients(a: &[C64]) -> Vec<C64> {
    let n = a.len();
    let mut b = vec![C64::new(0.0, 0.0); n];
    if n < 2 {
        return b;
    }
    for k in (1..n).rev() {
        let next = if k + 1 < n { b[k + 1] } else { C64::new(0.0, 0.0) };
        b[k - 1] = next + a[k] * (2.0 * k as f64);
    }
    b[0] *= 0.5;
    b
}

/// Zero out coefficients below the noise plateau `tol·max|a|` beyond the last significant one.
pub fn chop(a: &mut [C64], tol: f64) -> usize {
    let max = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    let mut last = 0;
    for (k, v) in a.iter().enumerate() {
        if v.norm() > tol * max {
            last = k;
        }
    }
    for v in a.iter_mut().skip(last + 1) {
        *v = C64::new(0.0, 0.0);
    }
    last + 1
}

/// Clenshaw evaluation of a real Chebyshev series.
pub fn eval_series(a: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ak in a.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + ak;
        b2 = b1;
        b1 = b0;
    }
    a.first().copied().unwrap_or(0.0) + x * b1 - b2
}

/// Coefficients of the derivative of a real Chebyshev series.
pub fn derivative_coefficients_real(a: &[f64]) -> Vec<f64> {
    let c: Vec<C64> = a.iter().map(|&v| C64::new(v, 0.0)).collect();
    derivative_coefficients(&c).iter().map(|v| v.re).collect()
}

fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    let nf = n as f64;
    let theta: Vec<f64> = (0..=n).map(|j| j as f64 * pi / nf).collect();
    let mut w = vec![0.0; n + 1];
    let mut v = vec![1.0; n.saturating_sub(1)];
    if n % 2 == 0 {
        w[0] = 1.0 / (nf * nf - 1.0);
        w[n] = w[0];
        for k in 1..n / 2 {
            let kf = k as f64;
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * kf * theta[i + 1]).cos() / (4.0 * kf * kf - 1.0);
            }
        }
        for (i, vi) in v.iter_mut().enumerate() {
            *vi -= (nf * theta[i + 1]).cos() / (nf * nf - 1.0);
        }
    } else {
        w[0] = 1.0 / (nf * nf);
        w[n] = w[0];
        for k in 1..=(n - 1) / 2 {
            let kf = k as f64;
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * kf * theta[i + 1]).cos() / (4.0 * kf * kf - 1.0);
            }
        }
    }
    for i in 1..n {
        w[i] = 2.0 * v[i - 1] / nf;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn differentiation_matrix_is_exact_on_polynomials() {
        let g = ChebGrid::new(16);
        let f: Vec<f64> = g.x.iter().map(|x| x.powi(5)).collect();
        for i in 0..=16 {
            let d: f64 = (0..=16).map(|j| g.d1[(i, j)] * f[j]).sum();
            assert!((d - 5.0 * g.x[i].powi(4)).abs() < 1e-11);
        }
    }

    #[test]
    fn clenshaw_curtis_integrates_constants() {
        let g = ChebGrid::new(33);
        let s: f64 = g.cc_weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn coefficients_round_trip() {
        let g = ChebGrid::new(20);
        let v: Vec<C64> = g.x.iter().map(|x| C64::new((3.0 * x).sin(), x * x)).collect();
        let a = g.coefficients(&v);
        let back = g.values_from_coefficients(&a);
        for (p, q) in v.iter().zip(&back) {
            assert!((p - q).norm() < 1e-13);
        }
    }

    #[test]
    fn derivative_coefficients_of_t3() {
        // T3 = 4x³ - 3x, T3' = 12x² - 3 = 6 T2 + 3 T0
        let a = vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let b = derivative_coefficients(&a);
        assert!((b[0].re - 3.0).abs() < 1e-14 && (b[2].re - 6.0).abs() < 1e-14);
    }
}
