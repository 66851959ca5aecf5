//! Per-mode linearized generators, their time evolution, growth-rate fits and the
//! analytic / Caflisch norms of the abstract framework.

pub mod evolve;
pub mod field;
pub mod generator;
pub mod norms;
pub mod verify;

pub use evolve::{evolve, fit_growth_rate, fit_trajectory, GrowthFit, Integrator, Trajectory};
pub use field::{Axis, ModeState, SpectralField, UniformGrid};
pub use generator::{HydroGenerator, KineticGenerator, LinearGenerator};
pub use norms::{analytic_norm, caflisch_norm, AnalyticNormSpec, CaflischNormSpec, NormTable, NormValue};
pub use verify::{verify_hydro_bound, verify_kinetic_bound, BoundCheck, BoundReport};
