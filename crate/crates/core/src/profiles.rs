//! Shear profiles `U(z)` on `[-1, 1]` and radial kinetic equilibria `μ(|v|²)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numerics::chebyshev::{derivative_coefficients_real, eval_series};
use crate::numerics::quad::{adaptive_real, neumaier_sum, GaussLegendre};
use crate::C64;

/// Builtin and tabulated shear-flow families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProfileKind {
    Couette,
    TanhChannel { d1: f64 },
    /// `U(z) = Σ a_k T_k(z)`.
    ChebyshevTable { coefficients: Vec<f64> },
}

/// A real-analytic channel flow with its first three derivatives.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShearProfile {
    kind: ProfileKind,
    /// Coefficients of `U, U', U'', ...` for tables (all orders up to the degree).
    #[serde(skip)]
    table: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileNormParams {
    pub delta_prime: f64,
    pub k: usize,
}

impl Default for ProfileNormParams {
    fn default() -> Self {
        Self { delta_prime: 0.1, k: 24 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileNorm {
    pub value: f64,
    /// Size of the last retained term, a proxy for the truncation tail.
    pub tail: f64,
    /// Set when a table has fewer than `K` nonzero derivatives of `U'`.
    pub truncation_warning: bool,
}

impl ShearProfile {
    pub fn new(kind: ProfileKind) -> Result<Self> {
        let mut table = Vec::new();
        match &kind {
            ProfileKind::Couette => {}
            ProfileKind::TanhChannel { d1 } => {
                if !(d1.is_finite() && *d1 > 0.0) {
                    return invalid(format!("tanh channel width d1 must be positive, got {d1}"));
                }
            }
            ProfileKind::ChebyshevTable { coefficients } => {
                if coefficients.is_empty() {
                    return invalid("Chebyshev table needs at least one coefficient");
                }
                if coefficients.iter().any(|c| !c.is_finite()) {
                    return invalid("Chebyshev table coefficients must be finite");
                }
                let mut c = coefficients.clone();
                table.push(c.clone());
                for _ in 0..coefficients.len().max(4) {
                    c = derivative_coefficients_real(&c);
                    table.push(c.clone());
                }
            }
        }
        Ok(Self { kind, table })
    }

    pub fn couette() -> Self {
        Self::new(ProfileKind::Couette).expect("couette is always valid")
    }

    pub fn tanh_channel(d1: f64) -> Result<Self> {
        Self::new(ProfileKind::TanhChannel { d1 })
    }

    pub fn chebyshev_table(coefficients: Vec<f64>) -> Result<Self> {
        Self::new(ProfileKind::ChebyshevTable { coefficients })
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    /// `[U, U', U'', U''']` at real `z`.
    pub fn eval(&self, z: f64) -> [f64; 4] {
        match &self.kind {
            ProfileKind::Couette => [z, 1.0, 0.0, 0.0],
            ProfileKind::TanhChannel { d1 } => {
                let t = (z / d1).tanh();
                let s = 1.0 - t * t;
                [t, s / d1, -2.0 * t * s / (d1 * d1), s * (6.0 * t * t - 2.0) / (d1 * d1 * d1)]
            }
            ProfileKind::ChebyshevTable { .. } => {
                let mut out = [0.0; 4];
                for (k, o) in out.iter_mut().enumerate() {
                    *o = eval_series(&self.table[k], z);
                }
                out
            }
        }
    }

    /// `[U, U', U'', U''']` at a complex argument (analytic continuation).
    pub fn eval_complex(&self, z: C64) -> [C64; 4] {
        match &self.kind {
            ProfileKind::Couette => [z, C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
            ProfileKind::TanhChannel { d1 } => {
                let t = (z / *d1).tanh();
                let s = 1.0 - t * t;
                [t, s / *d1, -2.0 * t * s / (d1 * d1), s * (6.0 * t * t - 2.0) / (d1 * d1 * d1)]
            }
            ProfileKind::ChebyshevTable { .. } => {
                let mut out = [C64::new(0.0, 0.0); 4];
                for (k, o) in out.iter_mut().enumerate() {
                    *o = eval_series_complex(&self.table[k], z);
                }
                out
            }
        }
    }

    pub fn u(&self, z: f64) -> f64 {
        self.eval(z)[0]
    }

    /// Derivatives `∂^j U(z)` for `j = 0..=order`.
    pub fn derivatives(&self, z: f64, order: usize) -> Vec<f64> {
        match &self.kind {
            ProfileKind::Couette => {
                let mut d = vec![0.0; order + 1];
                d[0] = z;
                if order >= 1 {
                    d[1] = 1.0;
                }
                d
            }
            ProfileKind::TanhChannel { d1 } => {
                // Taylor coefficients of y = tanh(x) from y' = 1 − y².
                let mut y = vec![0.0; order + 1];
                y[0] = (z / d1).tanh();
                for k in 0..order {
                    let conv = neumaier_sum((0..=k).map(|j| y[j] * y[k - j]));
                    let rhs = if k == 0 { 1.0 - conv } else { -conv };
                    y[k + 1] = rhs / (k as f64 + 1.0);
                }
                let mut fact = 1.0;
                let mut scale = 1.0;
                for (k, v) in y.iter_mut().enumerate() {
                    if k > 0 {
                        fact *= k as f64;
                        scale /= d1;
                    }
                    *v *= fact * scale;
                }
                y
            }
            ProfileKind::ChebyshevTable { .. } => (0..=order)
                .map(|k| self.table.get(k).map_or(0.0, |c| eval_series(c, z)))
                .collect(),
        }
    }

    /// Degree of a table profile (`None` for builtin analytic kinds).
    pub fn table_degree(&self) -> Option<usize> {
        match &self.kind {
            ProfileKind::ChebyshevTable { coefficients } => Some(coefficients.len() - 1),
            _ => None,
        }
    }

    pub fn max_abs_u(&self) -> f64 {
        self.sup_abs(0, 2001)
    }

    /// `sup_{[-1,1]} |∂^order U|`, grid scan plus golden-section refinement.
    pub fn sup_abs(&self, order: usize, samples: usize) -> f64 {
        match &self.kind {
            ProfileKind::Couette => match order {
                0 | 1 => 1.0,
                _ => 0.0,
            },
            _ => {
                let f = |z: f64| self.derivatives(z, order)[order].abs();
                sup_on_interval(&f, -1.0, 1.0, samples)
            }
        }
    }

    /// `|||U|||_{δ'} = Σ_{k≤K} ‖∂^k U'‖_∞ δ'^k / k!`.
    pub fn analytic_norm(&self, p: ProfileNormParams) -> Result<ProfileNorm> {
        if !(p.delta_prime >= 0.0 && p.delta_prime.is_finite()) {
            return invalid("delta_prime must be nonnegative");
        }
        if p.k < 1 {
            return invalid("derivative truncation K must be at least 1");
        }
        let terms = self.sup_terms(1, p);
        let tail = *terms.last().unwrap_or(&0.0);
        let truncation_warning = self.table_degree().is_some_and(|deg| deg < p.k + 1);
        Ok(ProfileNorm { value: neumaier_sum(terms), tail, truncation_warning })
    }

    /// `Σ_{k≤K} ‖∂^k ∂^order U‖_∞ δ'^k / k!`.
    pub fn sup_series(&self, order: usize, p: ProfileNormParams) -> f64 {
        neumaier_sum(self.sup_terms(order, p))
    }

    fn sup_terms(&self, order: usize, p: ProfileNormParams) -> Vec<f64> {
        let sups: Vec<f64> = match &self.kind {
            ProfileKind::Couette => (0..=p.k).map(|k| if k + order == 1 { 1.0 } else { 0.0 }).collect(),
            _ => {
                let grid = 2001;
                let top = p.k + order;
                let zs: Vec<f64> = (0..grid).map(|i| -1.0 + 2.0 * i as f64 / (grid - 1) as f64).collect();
                let vals: Vec<Vec<f64>> = zs.iter().map(|&z| self.derivatives(z, top)).collect();
                (0..=p.k)
                    .map(|k| {
                        let j = k + order;
                        let (imax, vmax) = vals
                            .iter()
                            .enumerate()
                            .map(|(i, v)| (i, v[j].abs()))
                            .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
                        let lo = zs[imax.saturating_sub(1)];
                        let hi = zs[(imax + 1).min(grid - 1)];
                        let f = |z: f64| self.derivatives(z, j)[j].abs();
                        golden_max(&f, lo, hi).max(vmax)
                    })
                    .collect()
            }
        };
        let mut w = 1.0;
        sups.iter()
            .enumerate()
            .map(|(k, s)| {
                if k > 0 {
                    w *= p.delta_prime / k as f64;
                }
                s * w
            })
            .collect()
    }

    /// `Σ_{k≤K} ‖∂^k ∂^order U‖_{L²(-1,1)} δ'^k / k!` — the L²-based analytic norm of a derivative.
    pub fn l2_analytic_norm(&self, order: usize, p: ProfileNormParams) -> f64 {
        let gl = GaussLegendre::cached(200);
        let top = order + p.k;
        let mut acc = vec![0.0; p.k + 1];
        for (z, w) in gl.mapped(-1.0, 1.0) {
            let d = self.derivatives(z, top);
            for (k, a) in acc.iter_mut().enumerate() {
                *a += w * d[order + k] * d[order + k];
            }
        }
        let mut wk = 1.0;
        neumaier_sum(acc.iter().enumerate().map(|(k, a)| {
            if k > 0 {
                wk *= p.delta_prime / k as f64;
            }
            a.sqrt() * wk
        }))
    }
}

fn eval_series_complex(a: &[f64], x: C64) -> C64 {
    let mut b1 = C64::new(0.0, 0.0);
    let mut b2 = C64::new(0.0, 0.0);
    for &ak in a.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + ak;
        b2 = b1;
        b1 = b0;
    }
    a.first().copied().unwrap_or(0.0) + x * b1 - b2
}

/// Maximum of a unimodal-near-the-peak function by golden-section search.
pub fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-14 {
            break;
        }
    }
    fc.max(fd).max(f(a)).max(f(b))
}

/// Supremum of `f` over `[a, b]` from a grid scan refined at the best sample.
pub fn sup_on_interval<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, samples: usize) -> f64 {
    let samples = samples.max(3);
    let h = (b - a) / (samples - 1) as f64;
    let (imax, vmax) = (0..samples)
        .map(|i| (i, f(a + h * i as f64)))
        .fold((0, f64::NEG_INFINITY), |x, y| if y.1 > x.1 { y } else { x });
    let lo = a + h * imax.saturating_sub(1) as f64;
    let hi = (a + h * (imax + 1) as f64).min(b);
    golden_max(f, lo, hi).max(vmax)
}

// ---------------------------------------------------------------------------
// Radial equilibria

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EquilibriumKind {
    /// `μ ∝ e^{−r²}`.
    Maxwellian,
    /// `μ ∝ exp(−((r² − a²)/width)²)`.
    Shell { a: f64, width: f64 },
}

/// A 1-D marginal `F(u)` tabulated on a uniform grid with its first two derivatives,
/// interpolated by cubic Hermite pieces.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Marginal {
    pub v_max: f64,
    pub h: f64,
    pub f: Vec<f64>,
    pub fp: Vec<f64>,
    pub fpp: Vec<f64>,
}

impl Marginal {
    /// Tabulate from closures on `nodes` uniform points covering `[-v_max, v_max]`.
    pub fn from_fn<F, G, H>(v_max: f64, nodes: usize, f: F, fp: G, fpp: H) -> Result<Self>
    where
        F: Fn(f64) -> f64,
        G: Fn(f64) -> f64,
        H: Fn(f64) -> f64,
    {
        if nodes < 4 || !(v_max > 0.0) {
            return invalid("marginal table needs >= 4 nodes and v_max > 0");
        }
        let h = 2.0 * v_max / (nodes - 1) as f64;
        let us: Vec<f64> = (0..nodes).map(|j| -v_max + h * j as f64).collect();
        Ok(Self {
            v_max,
            h,
            f: us.iter().map(|&u| f(u)).collect(),
            fp: us.iter().map(|&u| fp(u)).collect(),
            fpp: us.iter().map(|&u| fpp(u)).collect(),
        })
    }

    pub fn nodes(&self) -> usize {
        self.f.len()
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.v_max + self.h * j as f64
    }

    fn hermite(&self, u: f64, v: &[f64], dv: &[f64]) -> f64 {
        if !(u >= -self.v_max && u <= self.v_max) {
            return 0.0;
        }
        let s = (u + self.v_max) / self.h;
        let j = (s.floor() as usize).min(self.nodes() - 2);
        let t = s - j as f64;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * v[j] + h10 * self.h * dv[j] + h01 * v[j + 1] + h11 * self.h * dv[j + 1]
    }

    pub fn eval_f(&self, u: f64) -> f64 {
        self.hermite(u, &self.f, &self.fp)
    }

    pub fn eval_fp(&self, u: f64) -> f64 {
        self.hermite(u, &self.fp, &self.fpp)
    }

    /// `∫ u^k F(u) du` of the interpolant (exact for k ≤ 4).
    pub fn moment(&self, k: i32) -> f64 {
        let gl = GaussLegendre::cached(4);
        let mut parts = Vec::with_capacity(self.nodes());
        for j in 0..self.nodes() - 1 {
            let a = self.node(j);
            parts.push(gl.integrate(a, a + self.h, |u| u.powi(k) * self.eval_f(u)));
        }
        neumaier_sum(parts)
    }

    /// CSV text with header `u,F,Fprime`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("u,F,Fprime\n");
        for j in 0..self.nodes() {
            s.push_str(&format!("{:e},{:e},{:e}\n", self.node(j), self.f[j], self.fp[j]));
        }
        s
    }
}

/// A radial velocity density on ℝ^dim with its tabulated 1-D marginal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialEquilibrium {
    pub kind: EquilibriumKind,
    /// Velocity dimension (1, 2 or 3).
    pub dim: usize,
    pub v_max: f64,
    /// Weight exponent of the ⟨v⟩^m norms.
    pub m: u32,
    /// Normalization `C` with `∫ μ = 1`.
    pub norm_const: f64,
    pub marginal: Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumParams {
    pub dim: usize,
    pub v_max: f64,
    pub m: u32,
    pub nodes: usize,
}

impl Default for EquilibriumParams {
    fn default() -> Self {
        Self { dim: 1, v_max: 8.0, m: 4, nodes: 4096 }
    }
}

fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        _ => 4.0 * std::f64::consts::PI,
    }
}

impl RadialEquilibrium {
    pub fn new(kind: EquilibriumKind, p: EquilibriumParams) -> Result<Self> {
        if !(1..=3).contains(&p.dim) {
            return invalid(format!("velocity dimension must be 1, 2 or 3, got {}", p.dim));
        }
        if p.m < 4 {
            return invalid(format!("weight exponent m must be >= 4, got {}", p.m));
        }
        if !(p.v_max.is_finite() && p.v_max > 0.0) {
            return invalid("v_max must be positive");
        }
        if p.nodes < 16 {
            return invalid("marginal table needs at least 16 nodes");
        }
        if let EquilibriumKind::Shell { a, width } = kind {
            if !(a >= 0.0 && a.is_finite()) {
                return invalid(format!("shell radius a must be >= 0, got {a}"));
            }
            if !(width > 0.0 && width.is_finite()) {
                return invalid(format!("shell width must be positive, got {width}"));
            }
        }
        let mut eq = Self {
            kind,
            dim: p.dim,
            v_max: p.v_max,
            m: p.m,
            norm_const: 1.0,
            marginal: Marginal { v_max: p.v_max, h: 0.0, f: vec![], fp: vec![], fpp: vec![] },
        };
        eq.norm_const = match kind {
            EquilibriumKind::Maxwellian => std::f64::consts::PI.powf(-(p.dim as f64) / 2.0),
            EquilibriumKind::Shell { .. } => {
                let mass = eq.radial_mass(0.0, p.v_max + 10.0);
                1.0 / mass
            }
        };
        let tail = eq.radial_mass(p.v_max, p.v_max + 40.0) * eq.norm_const;
        if tail >= 1e-12 {
            return invalid(format!(
                "v_max = {} leaves mass {tail:e} outside the cutoff (need < 1e-12)",
                p.v_max
            ));
        }
        eq.marginal = eq.tabulate(p.nodes);
        Ok(eq)
    }

    pub fn maxwellian(p: EquilibriumParams) -> Result<Self> {
        Self::new(EquilibriumKind::Maxwellian, p)
    }

    pub fn shell(a: f64, p: EquilibriumParams) -> Result<Self> {
        Self::new(EquilibriumKind::Shell { a, width: 1.0 }, p)
    }

    /// Unnormalized `(μ, μ', μ'')` as functions of `t = r²`.
    fn shape(&self, t: f64) -> (f64, f64, f64) {
        match self.kind {
            EquilibriumKind::Maxwellian => {
                let e = (-t).exp();
                (e, -e, e)
            }
            EquilibriumKind::Shell { a, width } => {
                let q = (t - a * a) / width;
                let e = (-q * q).exp();
                let d = -2.0 * q / width;
                (e, e * d, e * (d * d - 2.0 / (width * width)))
            }
        }
    }

    /// Normalized `μ(t)`, `μ'(t)`, `μ''(t)` with `t = |v|²`.
    pub fn mu(&self, t: f64) -> (f64, f64, f64) {
        let (a, b, c) = self.shape(t);
        (a * self.norm_const, b * self.norm_const, c * self.norm_const)
    }

    /// Unnormalized mass `|S^{d−1}| ∫_{r0}^{r1} r^{d−1} μ(r²) dr`.
    fn radial_mass(&self, r0: f64, r1: f64) -> f64 {
        let d = self.dim as i32;
        let mut pts = vec![r0, r1];
        if let EquilibriumKind::Shell { a, .. } = self.kind {
            if a > r0 && a < r1 {
                pts.insert(1, a);
            }
        }
        let (v, _) = adaptive_real(|r| r.powi(d - 1) * self.shape(r * r).0, &pts, 1e-300, 1e-14);
        sphere_area(self.dim) * v
    }

    /// Marginal triple `(F, F', F'')` at `u ≥ 0` by quadrature over the orthogonal variables.
    fn marginal_at(&self, u: f64) -> (f64, f64, f64) {
        let u2 = u * u;
        let combo = |t: f64| {
            let (m0, m1, m2) = self.mu(t);
            (m0, 2.0 * u * m1, 2.0 * m1 + 4.0 * u2 * m2)
        };
        if self.dim == 1 {
            return combo(u2);
        }
        let w_max = self.v_max;
        let mut pts = vec![0.0, w_max];
        if let EquilibriumKind::Shell { a, .. } = self.kind {
            if a * a > u2 {
                let rho = (a * a - u2).sqrt();
                if rho < w_max {
                    pts.insert(1, rho);
                }
            }
        }
        let (jac, factor): (fn(f64) -> f64, f64) = if self.dim == 2 {
            (|_| 1.0, 2.0)
        } else {
            (|rho| rho, 2.0 * std::f64::consts::PI)
        };
        let q = |sel: usize| {
            let (v, _) = adaptive_real(
                |rho| {
                    let c = combo(u2 + rho * rho);
                    jac(rho) * [c.0, c.1, c.2][sel]
                },
                &pts,
                1e-300,
                1e-14,
            );
            factor * v
        };
        (q(0), q(1), q(2))
    }

    fn tabulate(&self, nodes: usize) -> Marginal {
        let h = 2.0 * self.v_max / (nodes - 1) as f64;
        let mut f = vec![0.0; nodes];
        let mut fp = vec![0.0; nodes];
        let mut fpp = vec![0.0; nodes];
        // Nodes are symmetric about 0: node j mirrors node nodes-1-j, so parity is exact.
        for j in 0..nodes.div_ceil(2) {
            let u = -self.v_max + h * j as f64;
            let (a, b, c) = self.marginal_at(u.abs());
            let m = nodes - 1 - j;
            f[j] = a;
            f[m] = a;
            fp[m] = b;
            fp[j] = -b;
            fpp[j] = c;
            fpp[m] = c;
        }
        if nodes % 2 == 1 {
            fp[nodes / 2] = 0.0;
        }
        Marginal { v_max: self.v_max, h, f, fp, fpp }
    }

    /// The marginal along a unit `direction`; by radial symmetry it is the stored table.
    pub fn marginal_reduce(&self, direction: &[f64]) -> Result<&Marginal> {
        if direction.len() != self.dim {
            return invalid(format!(
                "direction has {} components, equilibrium lives in dimension {}",
                direction.len(),
                self.dim
            ));
        }
        let n = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return invalid(format!("direction must have unit norm, |n| = {n}"));
        }
        Ok(&self.marginal)
    }
}
