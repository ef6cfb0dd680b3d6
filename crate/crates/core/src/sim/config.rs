use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate::{Basis, InputState, ProgramPhase};

/// Detector, source and stabilization parameters of the simulated setup.
///
/// Missing fields in a config file fall back to [`NoiseConfig::calibrated`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub eta_p0: f64,
    pub eta_p1: f64,
    pub eta_d0: f64,
    pub eta_d1: f64,
    /// Dark-count rate of the quad module (D_p0, D_d0, D_d1), counts/s.
    pub dark_quad: f64,
    /// Dark-count rate of the fast single module (D_p1), counts/s.
    pub dark_single: f64,
    pub visibility: f64,
    /// Standard deviation of the phase-setting error, radians.
    pub phase_sigma: f64,
    /// Pair generation rate, pairs/s.
    pub pair_rate: f64,
    pub interval_s: f64,
    pub n_intervals: usize,
    /// Coincidence window for accidental dark coincidences, seconds.
    pub coincidence_window: f64,
}

impl NoiseConfig {
    /// Preset tuned to the reported detector data; visibility is the free
    /// knob that sets the process fidelity.
    pub fn calibrated() -> Self {
        Self {
            eta_p0: 0.55,
            eta_p1: 0.50,
            eta_d0: 0.55,
            eta_d1: 0.55,
            dark_quad: 400.0,
            dark_single: 180.0,
            visibility: 0.952,
            phase_sigma: PI / 200.0,
            pair_rate: 1000.0,
            interval_s: 3.0,
            n_intervals: 12,
            coincidence_window: 10e-9,
        }
    }

    /// Perfect detectors, no darks, full visibility, no jitter.
    pub fn ideal() -> Self {
        Self {
            eta_p0: 1.0,
            eta_p1: 1.0,
            eta_d0: 1.0,
            eta_d1: 1.0,
            dark_quad: 0.0,
            dark_single: 0.0,
            visibility: 1.0,
            phase_sigma: 0.0,
            ..Self::calibrated()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = [
            ("eta_p0", self.eta_p0),
            ("eta_p1", self.eta_p1),
            ("eta_d0", self.eta_d0),
            ("eta_d1", self.eta_d1),
            ("visibility", self.visibility),
        ];
        for (field, v) in unit {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(field, format!("{v} is outside [0, 1]")));
            }
        }
        let nonneg = [
            ("dark_quad", self.dark_quad),
            ("dark_single", self.dark_single),
            ("phase_sigma", self.phase_sigma),
            ("pair_rate", self.pair_rate),
            ("interval_s", self.interval_s),
            ("coincidence_window", self.coincidence_window),
        ];
        for (field, v) in nonneg {
            if !v.is_finite() || v < 0.0 {
                return Err(invalid(field, format!("{v} must be a finite non-negative number")));
            }
        }
        if self.n_intervals < 1 {
            return Err(invalid("n_intervals", "must be at least 1".into()));
        }
        Ok(())
    }

    /// Efficiency of a program detector (0 = D_p0, 1 = D_p1).
    pub fn program_efficiency(&self, detector: usize) -> f64 {
        [self.eta_p0, self.eta_p1][detector]
    }

    /// Efficiency of a data detector (0 = D_d0, 1 = D_d1).
    pub fn data_efficiency(&self, detector: usize) -> f64 {
        [self.eta_d0, self.eta_d1][detector]
    }

    pub fn program_dark(&self, detector: usize) -> f64 {
        [self.dark_quad, self.dark_single][detector]
    }

    pub fn data_dark(&self, _detector: usize) -> f64 {
        self.dark_quad
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self::calibrated()
    }
}

/// Which settings to measure: program phases × data inputs × bases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentPlan {
    pub phases: Vec<ProgramPhase>,
    pub input_states: Vec<InputState>,
    pub bases: Vec<Basis>,
}

impl ExperimentPlan {
    /// Seven phases from 0 to π in steps of π/6, six inputs, three bases.
    pub fn standard() -> Self {
        Self {
            phases: (0..7).map(|k| ProgramPhase::new(k as f64 * PI / 6.0)).collect(),
            input_states: InputState::ALL.to_vec(),
            bases: Basis::ALL.to_vec(),
        }
    }

    /// One phase, all inputs and bases.
    pub fn single_phase(phi: f64) -> Self {
        Self { phases: vec![ProgramPhase::new(phi)], ..Self::standard() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.phases.is_empty() {
            return Err(invalid("phases", "at least one phase required".into()));
        }
        if self.input_states.is_empty() {
            return Err(invalid("input_states", "at least one input state required".into()));
        }
        if self.bases.is_empty() {
            return Err(invalid("bases", "at least one basis required".into()));
        }
        if self.phases.iter().any(|p| !p.radians().is_finite()) {
            return Err(invalid("phases", "phases must be finite".into()));
        }
        Ok(())
    }

    /// Number of (phase, input, basis) settings.
    pub fn len(&self) -> usize {
        self.phases.len() * self.input_states.len() * self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Settings in phase-major order.
    pub fn settings(&self) -> Vec<(ProgramPhase, InputState, Basis)> {
        let mut out = Vec::with_capacity(self.len());
        for &phi in &self.phases {
            for &state in &self.input_states {
                for &basis in &self.bases {
                    out.push((phi, state, basis));
                }
            }
        }
        out
    }
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self::standard()
    }
}

fn invalid(field: &str, reason: String) -> Error {
    Error::InvalidConfig { field: field.into(), reason }
}
