//! Numerical building blocks shared by the physics modules.

pub mod chebyshev;
pub mod fourier;
pub mod linalg;
pub mod quad;
pub mod roots;
pub mod stats;
