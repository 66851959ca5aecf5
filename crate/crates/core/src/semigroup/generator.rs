//! Discretized per-mode generators `𝓛_n = −in B` with a real core matrix `B`.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::field::{Axis, UniformGrid};
use crate::error::{invalid, Error, Result};
use crate::numerics::chebyshev::ChebGrid;
use crate::numerics::linalg::{eigenvalues_real, matvec_rc, spectral_radius};
use crate::penrose::DispersionKernel;
use crate::profiles::{Marginal, ShearProfile};
use crate::C64;

/// A linear per-mode generator of the form `−in B` with `B` real.
pub trait LinearGenerator: Sync + Send {
    fn mode(&self) -> i64;
    fn axis(&self) -> &Axis;
    /// `B x`.
    fn apply_core(&self, x: &[C64]) -> Vec<C64>;
    /// Dense `B`.
    fn core_matrix(&self) -> DMatrix<f64>;

    fn len(&self) -> usize {
        self.axis().len()
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let s = C64::new(0.0, -(self.mode() as f64));
        self.apply_core(x).into_iter().map(|v| v * s).collect()
    }

    /// Dense complex generator matrix.
    fn matrix(&self) -> DMatrix<C64> {
        let s = C64::new(0.0, -(self.mode() as f64));
        self.core_matrix().map(|b| s * b)
    }

    fn eigenvalues(&self) -> Vec<C64> {
        let s = C64::new(0.0, -(self.mode() as f64));
        eigenvalues_real(&self.core_matrix()).into_iter().map(|e| e * s).collect()
    }

    /// Eigenvalue with the largest real part.
    fn dominant_eigenvalue(&self) -> C64 {
        self.eigenvalues()
            .into_iter()
            .max_by(|a, b| a.re.total_cmp(&b.re))
            .unwrap_or(C64::new(0.0, 0.0))
    }

    /// Power-iteration estimate of the spectral radius of the generator.
    fn spectral_radius(&self) -> f64 {
        (self.mode().unsigned_abs() as f64) * spectral_radius(&self.core_matrix(), 300)
    }
}

/// `𝓛_n ω = −in(Uω − U''φ(ω))`, `∂_z²φ = ω`, `φ(±1) = 0`, on Chebyshev–Lobatto nodes.
#[derive(Debug, Clone)]
pub struct HydroGenerator {
    pub n: i64,
    pub coupling: bool,
    grid: Arc<ChebGrid>,
    axis: Axis,
    /// Dirichlet solution operator `ω ↦ φ(ω)`.
    phi: DMatrix<f64>,
    core: DMatrix<f64>,
    pub u: Vec<f64>,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub u3: Vec<f64>,
    /// `∂_z φ(·)`, kept when the matrix form is requested.
    dphi: Option<DMatrix<f64>>,
}

/// Dirichlet inverse of the Chebyshev second-derivative matrix, padded to the full grid.
pub fn dirichlet_solver(grid: &ChebGrid) -> Result<DMatrix<f64>> {
    let n = grid.n;
    let inner = grid.d2.view((1, 1), (n - 1, n - 1)).into_owned();
    let inv = inner
        .try_inverse()
        .ok_or_else(|| Error::Internal("singular Dirichlet Laplacian".into()))?;
    let mut phi = DMatrix::zeros(n + 1, n + 1);
    phi.view_mut((1, 1), (n - 1, n - 1)).copy_from(&inv);
    Ok(phi)
}

impl HydroGenerator {
    pub fn new(u: &ShearProfile, n: i64, nz: usize, coupling: bool, matrix_form: bool) -> Result<Self> {
        if nz < 16 {
            return invalid(format!("Chebyshev grid needs nz >= 16, got {nz}"));
        }
        let mut g = Self::with_grid(u, n, Arc::new(ChebGrid::new(nz)), coupling)?;
        if matrix_form {
            g.dphi = Some(&g.grid.d1 * &g.phi);
        }
        Ok(g)
    }

    pub fn with_grid(u: &ShearProfile, n: i64, grid: Arc<ChebGrid>, coupling: bool) -> Result<Self> {
        if n == 0 {
            return invalid("mode index n must be nonzero");
        }
        let phi = dirichlet_solver(&grid)?;
        let evals: Vec<[f64; 4]> = grid.x.iter().map(|&z| u.eval(z)).collect();
        let uu: Vec<f64> = evals.iter().map(|e| e[0]).collect();
        let u1: Vec<f64> = evals.iter().map(|e| e[1]).collect();
        let u2: Vec<f64> = evals.iter().map(|e| e[2]).collect();
        let u3: Vec<f64> = evals.iter().map(|e| e[3]).collect();
        let m = grid.len();
        let mut core = DMatrix::zeros(m, m);
        for i in 0..m {
            core[(i, i)] = uu[i];
            if coupling {
                for j in 0..m {
                    core[(i, j)] -= u2[i] * phi[(i, j)];
                }
            }
        }
        Ok(Self {
            n,
            coupling,
            axis: Axis::Chebyshev(grid.clone()),
            grid,
            phi,
            core,
            u: uu,
            u1,
            u2,
            u3,
            dphi: None,
        })
    }

    pub fn grid(&self) -> &Arc<ChebGrid> {
        &self.grid
    }

    pub fn phi_operator(&self) -> &DMatrix<f64> {
        &self.phi
    }

    /// Same discretization at another mode index.
    pub fn with_mode(&self, n: i64) -> Result<Self> {
        if n == 0 {
            return invalid("mode index n must be nonzero");
        }
        let mut g = self.clone();
        g.n = n;
        Ok(g)
    }

    /// Third row of the matrix form applied to `(W₂, W₃) = (∂_yω, ∂_zω)` for this mode:
    /// `(−U' + U''∂_zφ(·) + U'''φ(·))W₂ − U∂_y W₃`.
    pub fn matrix_form_third_row(&self, w2: &[C64], w3: &[C64]) -> Result<Vec<C64>> {
        let dphi = self
            .dphi
            .as_ref()
            .ok_or_else(|| Error::Precondition("generator was built without the matrix form".into()))?;
        let m = self.len();
        let mut p = vec![C64::new(0.0, 0.0); m];
        let mut dp = vec![C64::new(0.0, 0.0); m];
        matvec_rc(&self.phi, w2, &mut p);
        matvec_rc(dphi, w2, &mut dp);
        let iny = C64::new(0.0, self.n as f64);
        Ok((0..m)
            .map(|i| {
                w2[i] * -self.u1[i] + dp[i] * self.u2[i] + p[i] * self.u3[i] - iny * w3[i] * self.u[i]
            })
            .collect())
    }
}

impl LinearGenerator for HydroGenerator {
    fn mode(&self) -> i64 {
        self.n
    }

    fn axis(&self) -> &Axis {
        &self.axis
    }

    fn apply_core(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); x.len()];
        matvec_rc(&self.core, x, &mut y);
        y
    }

    fn core_matrix(&self) -> DMatrix<f64> {
        self.core.clone()
    }
}

/// `𝓛_n f = −in(uf − F'(u)φ(f))` on a periodic uniform velocity grid.
#[derive(Debug, Clone)]
pub struct KineticGenerator {
    pub n: i64,
    pub coupling: bool,
    pub kernel: DispersionKernel,
    axis: Axis,
    grid: Arc<UniformGrid>,
    /// `F'` at the grid nodes.
    pub fprime: Vec<f64>,
    /// Moment weights: `φ(f) = Σ_j m_j f_j`.
    pub moment: Vec<f64>,
}

impl KineticGenerator {
    pub fn new(f: &Marginal, n: i64, nv: usize, v_max: f64, kernel: DispersionKernel, coupling: bool) -> Result<Self> {
        if n == 0 {
            return invalid("mode index n must be nonzero");
        }
        if nv < 16 {
            return invalid(format!("velocity grid needs nv >= 16, got {nv}"));
        }
        if v_max > f.v_max * (1.0 + 1e-12) {
            return invalid("velocity grid exceeds the marginal table");
        }
        let grid = Arc::new(UniformGrid::new(v_max, nv));
        let fprime = grid.nodes.iter().map(|&u| f.eval_fp(u)).collect();
        let moment = grid
            .nodes
            .iter()
            .map(|&u| match kernel {
                DispersionKernel::Kie => -grid.h * u * u,
                DispersionKernel::Vdb => grid.h,
            })
            .collect();
        Ok(Self { n, coupling, kernel, axis: Axis::Uniform(grid.clone()), grid, fprime, moment })
    }

    pub fn grid(&self) -> &Arc<UniformGrid> {
        &self.grid
    }

    /// The moment functional `φ(f)`.
    pub fn potential(&self, f: &[C64]) -> C64 {
        f.iter().zip(&self.moment).map(|(a, m)| a * *m).sum()
    }

    pub fn with_mode(&self, n: i64) -> Result<Self> {
        if n == 0 {
            return invalid("mode index n must be nonzero");
        }
        let mut g = self.clone();
        g.n = n;
        Ok(g)
    }
}

impl LinearGenerator for KineticGenerator {
    fn mode(&self) -> i64 {
        self.n
    }

    fn axis(&self) -> &Axis {
        &self.axis
    }

    fn apply_core(&self, x: &[C64]) -> Vec<C64> {
        let phi = if self.coupling { self.potential(x) } else { C64::new(0.0, 0.0) };
        x.iter()
            .zip(&self.grid.nodes)
            .zip(&self.fprime)
            .map(|((f, u), fp)| f * *u - phi * *fp)
            .collect()
    }

    fn core_matrix(&self) -> DMatrix<f64> {
        let m = self.grid.n;
        let mut b = DMatrix::zeros(m, m);
        for i in 0..m {
            b[(i, i)] = self.grid.nodes[i];
            if self.coupling {
                for j in 0..m {
                    b[(i, j)] -= self.fprime[i] * self.moment[j];
                }
            }
        }
        b
    }
}
