//! Certified complex root finding: argument-principle winding numbers on rectangle
//! boundaries, quadtree isolation and Newton polishing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Closed axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl Rect {
    pub fn new(re: (f64, f64), im: (f64, f64)) -> Self {
        Self { re, im }
    }

    pub fn contains(&self, z: C64, slack: f64) -> bool {
        let wr = (self.re.1 - self.re.0) * slack;
        let wi = (self.im.1 - self.im.0) * slack;
        z.re >= self.re.0 - wr && z.re <= self.re.1 + wr && z.im >= self.im.0 - wi && z.im <= self.im.1 + wi
    }

    pub fn center(&self) -> C64 {
        C64::new(0.5 * (self.re.0 + self.re.1), 0.5 * (self.im.0 + self.im.1))
    }

    fn corners(&self) -> [C64; 4] {
        [
            C64::new(self.re.0, self.im.0),
            C64::new(self.re.1, self.im.0),
            C64::new(self.re.1, self.im.1),
            C64::new(self.re.0, self.im.1),
        ]
    }

    /// Four children split at fractions `(fx, fy)` of the width and height.
    pub fn split(&self, fx: f64, fy: f64) -> [Rect; 4] {
        let xm = self.re.0 + fx * (self.re.1 - self.re.0);
        let ym = self.im.0 + fy * (self.im.1 - self.im.0);
        [
            Rect::new((self.re.0, xm), (self.im.0, ym)),
            Rect::new((xm, self.re.1), (self.im.0, ym)),
            Rect::new((self.re.0, xm), (ym, self.im.1)),
            Rect::new((xm, self.re.1), (ym, self.im.1)),
        ]
    }
}

/// An analytic function with an evaluable derivative.
pub trait Analytic: Sync {
    fn value(&self, z: C64) -> Result<C64>;
    fn derivative(&self, z: C64) -> Result<C64>;
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RootOptions {
    /// Minimum number of boundary samples for the top-level box.
    pub min_samples: usize,
    /// Maximum number of bisections of a single boundary segment.
    pub max_bisect: u32,
    /// Quadtree depth limit.
    pub max_depth: u32,
    /// Required |f| at a polished root.
    pub f_tol: f64,
    pub max_newton: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self { min_samples: 400, max_bisect: 14, max_depth: 10, f_tol: 1e-11, max_newton: 60 }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Winding {
    pub count: i64,
    /// Accumulated phase divided by 2π before rounding.
    pub raw: f64,
    pub samples: usize,
    /// Smallest |f| met on the contour.
    pub min_abs: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Root {
    pub z: C64,
    pub abs_f: f64,
    /// The root sits alone in a box of winding number one.
    pub winding_certified: bool,
    /// Winding number of the isolating box (greater than one only at the depth limit).
    pub multiplicity: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootSearch {
    pub rect: Rect,
    pub winding: i64,
    pub roots: Vec<Root>,
    pub boxes_examined: usize,
}

const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;

/// Winding number of `f` around the boundary of `rect`, traversed counter-clockwise.
pub fn winding_number<F: Analytic>(f: &F, rect: &Rect, samples: usize, max_bisect: u32) -> Result<Winding> {
    let per_edge = (samples / 4).max(16);
    let c = rect.corners();
    let mut pts = Vec::with_capacity(4 * per_edge + 1);
    for e in 0..4 {
        let a = c[e];
        let b = c[(e + 1) % 4];
        for k in 0..per_edge {
            pts.push(a + (b - a) * (k as f64 / per_edge as f64));
        }
    }
    pts.push(c[0]);
    let vals: Vec<C64> = pts.par_iter().map(|&z| f.value(z)).collect::<Result<Vec<_>>>()?;
    let scale = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut total = 0.0;
    let mut count = vals.len();
    let mut min_abs = f64::INFINITY;
    for v in &vals {
        min_abs = min_abs.min(v.norm());
    }
    let seg: Vec<(f64, usize, f64)> = (0..pts.len() - 1)
        .into_par_iter()
        .map(|k| phase_increment(f, pts[k], pts[k + 1], vals[k], vals[k + 1], max_bisect, scale))
        .collect::<Result<Vec<_>>>()?;
    for (d, n, m) in seg {
        total += d;
        count += n;
        min_abs = min_abs.min(m);
    }
    if min_abs <= 1e-13 * scale {
        return Err(Error::Precondition(format!(
            "function (nearly) vanishes on the contour of [{:e},{:e}]x[{:e},{:e}]",
            rect.re.0, rect.re.1, rect.im.0, rect.im.1
        )));
    }
    let raw = total / (2.0 * std::f64::consts::PI);
    let rounded = raw.round();
    if (raw - rounded).abs() > 0.05 {
        return Err(Error::Resolution(format!("non-integer winding {raw} on contour")));
    }
    Ok(Winding { count: rounded as i64, raw, samples: count, min_abs })
}

fn phase_increment<F: Analytic>(
    f: &F,
    a: C64,
    b: C64,
    fa: C64,
    fb: C64,
    depth: u32,
    scale: f64,
) -> Result<(f64, usize, f64)> {
    let d = (fb / fa).arg();
    if d.abs() < HALF_PI {
        return Ok((d, 0, fa.norm().min(fb.norm())));
    }
    if depth == 0 {
        return Err(Error::Resolution(format!(
            "boundary phase increment {d:.3} not resolved between {a} and {b}"
        )));
    }
    let m = 0.5 * (a + b);
    let fm = f.value(m)?;
    if fm.norm() <= 1e-13 * scale {
        return Err(Error::Precondition(format!("function vanishes on the contour near {m}")));
    }
    let (d1, n1, m1) = phase_increment(f, a, m, fa, fm, depth - 1, scale)?;
    let (d2, n2, m2) = phase_increment(f, m, b, fm, fb, depth - 1, scale)?;
    Ok((d1 + d2, n1 + n2 + 1, m1.min(m2)))
}

/// Newton iteration from `z0`; `None` if it fails to converge.
pub fn newton<F: Analytic>(f: &F, z0: C64, tol: f64, max_iter: usize) -> Option<C64> {
    let mut z = z0;
    for _ in 0..max_iter {
        let v = f.value(z).ok()?;
        let d = f.derivative(z).ok()?;
        if !d.is_finite() || d.norm() == 0.0 {
            return None;
        }
        let step = v / d;
        z -= step;
        if !z.is_finite() {
            return None;
        }
        if step.norm() <= 4.0 * f64::EPSILON * z.norm().max(1.0) {
            break;
        }
    }
    let v = f.value(z).ok()?;
    (v.norm() <= tol).then_some(z)
}

const SPLITS: [(f64, f64); 4] = [(0.5137, 0.4861), (0.4713, 0.5291), (0.5571, 0.4433), (0.4327, 0.5689)];

/// All roots of `f` in `rect`, isolated by subdivision and polished by Newton.
pub fn find_roots<F: Analytic>(f: &F, rect: &Rect, opts: &RootOptions) -> Result<RootSearch> {
    let w = winding_number(f, rect, opts.min_samples, opts.max_bisect)?;
    let mut boxes = 1;
    let mut unresolved = Vec::new();
    let mut roots = Vec::new();
    search(f, rect, w.count, 0, opts, &mut roots, &mut unresolved, &mut boxes)?;
    if !unresolved.is_empty() {
        return Err(Error::Unresolved(unresolved));
    }
    roots.sort_by(|a: &Root, b: &Root| b.z.im.total_cmp(&a.z.im).then(a.z.re.total_cmp(&b.z.re)));
    Ok(RootSearch { rect: *rect, winding: w.count, roots, boxes_examined: boxes })
}

#[allow(clippy::too_many_arguments)]
fn search<F: Analytic>(
    f: &F,
    rect: &Rect,
    w: i64,
    depth: u32,
    opts: &RootOptions,
    roots: &mut Vec<Root>,
    unresolved: &mut Vec<Rect>,
    boxes: &mut usize,
) -> Result<()> {
    if w == 0 {
        return Ok(());
    }
    if w < 0 {
        return Err(Error::Internal(format!("negative winding {w} for an analytic function")));
    }
    if w == 1 {
        if let Some(z) = newton(f, rect.center(), opts.f_tol, opts.max_newton) {
            if rect.contains(z, 0.0) {
                let abs_f = f.value(z)?.norm();
                roots.push(Root { z, abs_f, winding_certified: true, multiplicity: 1 });
                return Ok(());
            }
        }
    }
    if depth >= opts.max_depth {
        if w > 1 {
            if let Some(z) = newton(f, rect.center(), opts.f_tol, opts.max_newton) {
                let abs_f = f.value(z)?.norm();
                roots.push(Root { z, abs_f, winding_certified: false, multiplicity: w });
                return Ok(());
            }
        }
        unresolved.push(*rect);
        return Ok(());
    }
    let samples = (opts.min_samples / 2).max(64);
    let mut last_err = None;
    for &(fx, fy) in &SPLITS {
        let kids = rect.split(fx, fy);
        let ws: Vec<Result<Winding>> = kids
            .par_iter()
            .map(|k| winding_number(f, k, samples, opts.max_bisect))
            .collect();
        *boxes += 4;
        let mut counts = [0i64; 4];
        let mut ok = true;
        for (i, r) in ws.into_iter().enumerate() {
            match r {
                Ok(wk) => counts[i] = wk.count,
                Err(e) => {
                    ok = false;
                    last_err = Some(e);
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        if counts.iter().sum::<i64>() != w {
            last_err = Some(Error::Resolution(format!(
                "children windings {counts:?} do not add up to {w}"
            )));
            continue;
        }
        for (k, &c) in kids.iter().zip(&counts) {
            search(f, k, c, depth + 1, opts, roots, unresolved, boxes)?;
        }
        return Ok(());
    }
    match last_err {
        Some(Error::Precondition(_)) | Some(Error::Resolution(_)) | None => {
            unresolved.push(*rect);
            Ok(())
        }
        Some(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Poly;
    impl Analytic for Poly {
        fn value(&self, z: C64) -> Result<C64> {
            Ok((z - C64::new(0.3, 0.2)) * (z - C64::new(-0.5, 0.7)) * (z - C64::new(0.0, 0.5)))
        }
        fn derivative(&self, z: C64) -> Result<C64> {
            let a = z - C64::new(0.3, 0.2);
            let b = z - C64::new(-0.5, 0.7);
            let c = z - C64::new(0.0, 0.5);
            Ok(b * c + a * c + a * b)
        }
    }

    #[test]
    fn counts_and_isolates_cubic_roots() {
        let r = Rect::new((-1.0, 1.0), (0.1, 1.0));
        let s = find_roots(&Poly, &r, &RootOptions::default()).unwrap();
        assert_eq!(s.winding, 3);
        assert_eq!(s.roots.len(), 3);
        assert!(s.roots.iter().all(|r| r.abs_f < 1e-12 && r.winding_certified));
        let w = winding_number(&Poly, &Rect::new((0.5, 1.0), (0.1, 1.0)), 400, 10).unwrap();
        assert_eq!(w.count, 0);
    }
}
