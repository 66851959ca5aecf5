//! Oscillatory-data experiments: parameter selection, Métivier data, nonlinear
//! evolution in the fast variables and the Hölder-ratio sweep.

pub mod data;
pub mod hydro;
pub mod kinetic;
pub mod params;
pub mod ratio;
pub mod sweep;

use serde::{Deserialize, Serialize};

use crate::semigroup::SpectralField;

pub use data::{metivier_data, MetivierData};
pub use hydro::{evolve_hydro, HydroEvolveConfig};
pub use kinetic::{evolve_kinetic, KineticEvolveConfig, KineticIntegrator};
pub use params::{select_parameters, EpsSchedule, IllposedParams, ParamRequest};
pub use ratio::{hoelder_ratio, SweepRecord, WindowOptions};
pub use sweep::{remainder_diagnostic, sweep, EigenData, Model, RemainderReport, SweepOptions, SweepReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionMode {
    Linear,
    Nonlinear,
}

impl std::str::FromStr for EvolutionMode {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(EvolutionMode::Linear),
            "nonlinear" => Ok(EvolutionMode::Nonlinear),
            o => Err(crate::Error::InvalidParameter(format!("unknown mode '{o}' (expected linear or nonlinear)"))),
        }
    }
}

/// Stored states of a field evolution.
#[derive(Debug, Clone)]
pub struct FieldTrajectory {
    pub times: Vec<f64>,
    pub fields: Vec<SpectralField>,
    /// Evolution stopped early (blow-up or non-finite state).
    pub truncated: bool,
}

impl FieldTrajectory {
    pub fn l2(&self) -> Vec<f64> {
        self.fields.iter().map(|f| f.l2_norm()).collect()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }
}

/// Blow-up threshold: `factor · max(‖initial‖, 1)`.
pub(crate) fn blowup_threshold(initial: f64, factor: f64) -> f64 {
    factor * initial.max(1.0)
}
