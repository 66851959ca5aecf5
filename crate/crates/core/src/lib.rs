//! Unstable spectra, semigroup growth bounds and oscillatory-data ill-posedness
//! experiments for the linearized hydrostatic Euler equations and for singular
//! Vlasov models (kinetic incompressible Euler, Vlasov–Dirac–Benney).
//!
//! The crate is organised bottom-up:
//!
//! * [`profiles`] — shear profiles `U(z)` and radial equilibria `μ(|v|²)`;
//! * [`rayleigh`] — Evans function of the hydrostatic Rayleigh problem and its roots;
//! * [`penrose`] — kinetic dispersion functions and their right half-plane roots;
//! * [`semigroup`] — discretized per-mode generators, time stepping, analytic norms;
//! * [`illposed`] — oscillatory data, nonlinear evolution and Hölder-ratio sweeps;
//! * [`cli`] — configuration, orchestration and reproducible artifacts.

pub mod cli;
pub mod error;
pub mod illposed;
pub mod numerics;
pub mod penrose;
pub mod profiles;
pub mod rayleigh;
pub mod semigroup;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
