//! Programmable linear-optical phase gate with electronic feed forward.
//!
//! * [`linalg`]: small dense complex matrices.
//! * [`gate`]: exact gate physics, program measurement and correction.
//! * [`sim`]: coincidence-count generation under a detector noise model.
//! * [`tomography`]: Choi matrices and maximum-likelihood reconstruction.
//! * [`metrics`]: process/state fidelities, purities and per-phase reports.

pub mod error;
pub mod gate;
pub mod linalg;
pub mod metrics;
pub mod seed;
pub mod sim;
pub mod tomography;

pub use error::{Error, Result};
