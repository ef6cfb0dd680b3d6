//! Choi-matrix representation of the gate and maximum-likelihood
//! reconstruction of processes and output states from count data.
//!
//! Index order of every Choi matrix is `input ⊗ output`. A setting pairs a
//! pure preparation `ρ_in` with an output projector `π_out`; its effective
//! measurement operator on the joint space is `ρ_inᵀ ⊗ π_out`, the transpose
//! taken in the computational basis.

mod ml;
mod record;

pub use ml::{
    ml_reconstruct_process, ml_reconstruct_process_with, ml_reconstruct_state, ml_reconstruct_state_with, MlOptions,
    ProcessEstimate, StateEstimate,
};
pub use record::{MatrixRecord, RecordKind};

use crate::error::{Error, Result};
use crate::gate::{Basis, InputState, ProgramPhase};
use crate::linalg::{c, CMatrix, Subsystem, HERMITIAN_TOL};
use crate::sim::{CountTable, ProgramDetector};

/// Trace of a Choi matrix in the normalization used throughout.
pub const CHOI_TRACE: f64 = 2.0;

const PSD_TOL: f64 = 1e-10;

/// Positive-semidefinite operator on `H_in ⊗ H_out` describing a CP map.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    m: CMatrix,
}

impl ChoiMatrix {
    /// Validates a 4×4 matrix: Hermitian and PSD within 1e-10, positive trace.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.rows() != 4 || m.cols() != 4 {
            return Err(Error::DimensionMismatch(format!("Choi matrix must be 4x4, got {}x{}", m.rows(), m.cols())));
        }
        let vals = m.eigvals_hermitian()?;
        if vals[0] < -PSD_TOL {
            return Err(Error::InvalidConfig {
                field: "choi".into(),
                reason: format!("negative eigenvalue {:e}", vals[0]),
            });
        }
        if m.trace().re <= 0.0 {
            return Err(Error::InvalidConfig { field: "choi".into(), reason: "trace must be positive".into() });
        }
        Ok(Self { m })
    }

    pub(crate) fn from_trusted(m: CMatrix) -> Self {
        debug_assert!(m.is_hermitian(HERMITIAN_TOL));
        Self { m }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.m.eigvals_hermitian().expect("validated Hermitian")
    }

    /// `max |Tr_out[χ]·(2/Tr χ) − I|`, zero for a trace-preserving map.
    pub fn trace_preservation_defect(&self) -> f64 {
        let reduced = self.m.partial_trace_qubits(Subsystem::B).expect("4x4").scale_real(CHOI_TRACE / self.trace());
        reduced.max_abs_diff(&CMatrix::identity(2))
    }
}

/// Pure preparation, output projector and the (possibly rescaled) count
/// recorded for that combination.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographySetting {
    rho_in: CMatrix,
    pi_out: CMatrix,
    count: f64,
}

impl TomographySetting {
    pub fn new(rho_in: CMatrix, pi_out: CMatrix, count: f64) -> Result<Self> {
        if rho_in.rows() != 2 || !rho_in.is_square() || pi_out.rows() != 2 || !pi_out.is_square() {
            return Err(Error::DimensionMismatch("settings act on a single qubit".into()));
        }
        if (rho_in.trace().re - 1.0).abs() > 1e-10 || rho_in.eigvals_hermitian()?[0] < -PSD_TOL {
            return Err(Error::InvalidConfig {
                field: "rho_in".into(),
                reason: "must be a unit-trace positive operator".into(),
            });
        }
        if !pi_out.is_hermitian(HERMITIAN_TOL) || (&pi_out * &pi_out).max_abs_diff(&pi_out) > 1e-10 {
            return Err(Error::InvalidConfig { field: "pi_out".into(), reason: "must be a projector".into() });
        }
        if !count.is_finite() || count < 0.0 {
            return Err(Error::InvalidConfig {
                field: "count".into(),
                reason: format!("{count} is not a valid count"),
            });
        }
        Ok(Self { rho_in, pi_out, count })
    }

    /// Standard preparation `state` measured with outcome `outcome` of `basis`.
    pub fn standard(state: InputState, basis: Basis, outcome: usize, count: f64) -> Self {
        Self { rho_in: state.ket().density_matrix(), pi_out: basis.projector(outcome), count }
    }

    pub fn rho_in(&self) -> &CMatrix {
        &self.rho_in
    }

    pub fn pi_out(&self) -> &CMatrix {
        &self.pi_out
    }

    pub fn count(&self) -> f64 {
        self.count
    }

    /// `ρ_inᵀ ⊗ π_out`
    pub fn effective_operator(&self) -> CMatrix {
        self.rho_in.transpose().tensor(&self.pi_out)
    }
}

/// `ρ_out = Tr_in[χ(ρ_inᵀ ⊗ I)]`, normalized to unit trace. The trace before
/// normalization is returned as the success weight of the map on `rho_in`.
pub fn apply_map(chi: &ChoiMatrix, rho_in: &CMatrix) -> Result<(CMatrix, f64)> {
    if rho_in.rows() != 2 || !rho_in.is_square() {
        return Err(Error::DimensionMismatch("input state must be 2x2".into()));
    }
    let joint = chi.matrix() * &rho_in.transpose().tensor(&CMatrix::identity(2));
    let out = joint.partial_trace_qubits(Subsystem::A)?;
    let weight = out.trace().re;
    if weight.abs() < 1e-15 {
        return Err(Error::AnnihilatingMap(weight));
    }
    Ok((out.scale_real(1.0 / weight), weight))
}

/// Probability of a setting's outcome, `2·Tr[χ(ρ_inᵀ ⊗ π_out)] / Tr[χ]`.
pub fn setting_probability(chi: &ChoiMatrix, setting: &TomographySetting) -> f64 {
    CHOI_TRACE * chi.matrix().trace_product(&setting.effective_operator()).re / chi.trace()
}

/// Tomography settings of one phase, summing the program detectors.
/// Fails with the list of missing (input, basis) combinations unless all six
/// inputs were measured in all three bases.
pub fn process_settings(counts: &CountTable, phase: ProgramPhase) -> Result<Vec<TomographySetting>> {
    let mut settings = Vec::with_capacity(36);
    let mut missing = Vec::new();
    for state in InputState::ALL {
        for basis in Basis::ALL {
            match counts.setting_counts((phase, state, basis)) {
                Some(c) => {
                    for d in 0..2 {
                        let n: f64 = ProgramDetector::ALL.iter().map(|p| c[p.index()][d]).sum();
                        settings.push(TomographySetting::standard(state, basis, d, n));
                    }
                }
                None => missing.push(format!(
                    "phase={} input_state={} basis={}",
                    crate::sim::format_phase(phase),
                    state,
                    basis
                )),
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingSettings(missing));
    }
    Ok(settings)
}

/// Per-basis outcome counts for one input state, in `Basis::ALL` order.
pub fn state_counts(counts: &CountTable, phase: ProgramPhase, state: InputState) -> Result<[[f64; 2]; 3]> {
    let mut out = [[0.0; 2]; 3];
    let mut missing = Vec::new();
    for (b, basis) in Basis::ALL.into_iter().enumerate() {
        match counts.setting_counts((phase, state, basis)) {
            Some(c) => {
                for d in 0..2 {
                    out[b][d] = c[0][d] + c[1][d];
                }
            }
            None => {
                missing.push(format!("phase={} input_state={} basis={}", crate::sim::format_phase(phase), state, basis))
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingSettings(missing));
    }
    Ok(out)
}

/// Expected counts of every standard setting under `chi`, with `total`
/// events spread evenly over the 18 (input, basis) pairs.
pub fn expected_settings(chi: &ChoiMatrix, total: f64) -> Vec<TomographySetting> {
    let per_pair = total / 18.0;
    let mut out = Vec::with_capacity(36);
    for state in InputState::ALL {
        for basis in Basis::ALL {
            for d in 0..2 {
                let probe = TomographySetting::standard(state, basis, d, 0.0);
                let p = setting_probability(chi, &probe).max(0.0);
                out.push(TomographySetting { count: per_pair * p, ..probe });
            }
        }
    }
    out
}

/// Maximally mixed (fully depolarizing) process with `Tr = 2`.
pub fn depolarizing_choi() -> ChoiMatrix {
    ChoiMatrix::from_trusted(CMatrix::identity(4).scale(c(0.5, 0.0)))
}
