//! Dense linear-algebra helpers on top of nalgebra.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

/// `y = A x` for a real matrix and complex vector.
pub fn matvec_rc(a: &DMatrix<f64>, x: &[C64], y: &mut [C64]) {
    let (r, c) = a.shape();
    assert_eq!(c, x.len());
    assert_eq!(r, y.len());
    y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
    let data = a.as_slice();
    for (j, xj) in x.iter().enumerate() {
        if xj.re == 0.0 && xj.im == 0.0 {
            continue;
        }
        let col = &data[j * r..(j + 1) * r];
        for (yi, aij) in y.iter_mut().zip(col) {
            *yi += xj * *aij;
        }
    }
}

pub fn matvec_cc(a: &DMatrix<C64>, x: &[C64]) -> Vec<C64> {
    let (r, c) = a.shape();
    assert_eq!(c, x.len());
    let mut y = vec![C64::new(0.0, 0.0); r];
    let data = a.as_slice();
    for (j, xj) in x.iter().enumerate() {
        let col = &data[j * r..(j + 1) * r];
        for (yi, aij) in y.iter_mut().zip(col) {
            *yi += xj * aij;
        }
    }
    y
}

pub fn to_complex(a: &DMatrix<f64>) -> DMatrix<C64> {
    a.map(|v| C64::new(v, 0.0))
}

/// Eigenvalues of a real square matrix.
pub fn eigenvalues_real(a: &DMatrix<f64>) -> Vec<C64> {
    a.clone().complex_eigenvalues().iter().copied().collect()
}

/// Eigenvector of `a` for an eigenvalue near `lambda` by shifted inverse iteration.
pub fn inverse_iteration(a: &DMatrix<C64>, lambda: C64, start: &[C64], iters: usize) -> Result<Vec<C64>> {
    let n = a.nrows();
    let shift = lambda + C64::new(1e-10, 1e-10) * lambda.norm().max(1.0);
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] -= shift;
    }
    let lu = m.lu();
    let mut v = nalgebra::DVector::from_column_slice(start);
    let nv = v.norm();
    if nv == 0.0 {
        return Err(Error::InvalidParameter("zero start vector".into()));
    }
    v /= C64::new(nv, 0.0);
    for _ in 0..iters {
        let w = lu
            .solve(&v)
            .ok_or_else(|| Error::Internal("singular shifted matrix in inverse iteration".into()))?;
        let nw = w.norm();
        if !nw.is_finite() || nw == 0.0 {
            return Err(Error::Internal("inverse iteration diverged".into()));
        }
        v = w / C64::new(nw, 0.0);
    }
    Ok(v.iter().copied().collect())
}

/// Spectral-radius estimate by power iteration (max of the last Rayleigh-type growth factors).
pub fn spectral_radius(a: &DMatrix<f64>, iters: usize) -> f64 {
    let n = a.nrows();
    let mut v: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0 + 0.37 * ((i * 7919) % 101) as f64 / 101.0, 0.0))
        .collect();
    let mut w = vec![C64::new(0.0, 0.0); n];
    let norm = |x: &[C64]| x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let nv = norm(&v);
    v.iter_mut().for_each(|c| *c /= nv);
    // The per-step growth factor oscillates for complex-conjugate dominant pairs;
    // the maximum over the late iterations bounds the radius from above.
    let mut est: f64 = 0.0;
    for k in 0..iters {
        matvec_rc(a, &v, &mut w);
        let nw = norm(&w);
        if nw == 0.0 {
            return est;
        }
        if 4 * k >= 3 * iters {
            est = est.max(nw);
        }
        w.iter_mut().for_each(|c| *c /= nw);
        std::mem::swap(&mut v, &mut w);
    }
    est
}

/// Dense matrix exponential.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    a.exp()
}

pub fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_iteration_bounds_diagonal_matrix() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, -2.0, 1.0]));
        let r = spectral_radius(&a, 200);
        assert!((r - 2.0).abs() < 1e-3, "{r}");
    }

    #[test]
    fn expm_of_rotation() {
        let mut a = DMatrix::zeros(2, 2);
        a[(0, 1)] = C64::new(-1.0, 0.0);
        a[(1, 0)] = C64::new(1.0, 0.0);
        let e = expm(&a);
        assert!((e[(0, 0)].re - 1f64.cos()).abs() < 1e-14);
        assert!((e[(1, 0)].re - 1f64.sin()).abs() < 1e-14);
    }
}
