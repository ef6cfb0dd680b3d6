//! Ideal process and figures of merit: process fidelity, output-state
//! fidelity and purity, and their per-phase aggregates.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gate::{gate_unitary, ideal_output, InputState, ProgramPhase, PureQubit};
use crate::linalg::{CMatrix, C64};
use crate::tomography::ChoiMatrix;

/// Second eigenvalue below this fraction of the trace counts as rank one.
const RANK_ONE_TOL: f64 = 1e-8;

/// `χ_id = Σ_ij |i⟩⟨j| ⊗ U|i⟩⟨j|U†`, i.e. `|Ω⟩⟨Ω|` with
/// `|Ω⟩ = Σ_i |i⟩ ⊗ U|i⟩`; rank one with trace 2.
pub fn ideal_choi(phi: ProgramPhase) -> ChoiMatrix {
    let u = gate_unitary(phi);
    let mut omega = vec![C64::new(0.0, 0.0); 4];
    for i in 0..2 {
        for o in 0..2 {
            omega[2 * i + o] = u[(o, i)];
        }
    }
    ChoiMatrix::from_trusted(CMatrix::projector(&omega))
}

/// `F_χ = Tr[χ χ_id] / (Tr[χ] Tr[χ_id])` against a rank-one reference.
pub fn process_fidelity(chi: &ChoiMatrix, chi_id: &ChoiMatrix) -> Result<f64> {
    let vals = chi_id.eigenvalues();
    let tr = chi_id.trace();
    let second = vals[vals.len() - 2];
    if second.abs() > RANK_ONE_TOL * tr {
        return Err(Error::NotRankOne(second / tr));
    }
    Ok(chi.matrix().trace_product(chi_id.matrix()).re / (chi.trace() * tr))
}

/// `⟨ψ|ρ|ψ⟩`
pub fn state_fidelity(rho: &CMatrix, psi: &PureQubit) -> f64 {
    let a = psi.amplitudes();
    rho.sandwich(&a, &a).re
}

/// `Tr[ρ²]`
pub fn purity(rho: &CMatrix) -> f64 {
    rho.trace_product(rho).re
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeritReport {
    pub phi: f64,
    #[serde(rename = "F_chi")]
    pub f_chi: f64,
    #[serde(rename = "F_av")]
    pub f_av: f64,
    #[serde(rename = "F_min")]
    pub f_min: f64,
    #[serde(rename = "P_av")]
    pub p_av: f64,
    #[serde(rename = "P_min")]
    pub p_min: f64,
    pub feed_forward_active: bool,
    pub success_probability: f64,
}

/// Aggregates a reconstructed process and the six output states (in
/// `InputState::ALL` order) into one table row. Output states are scored
/// against `U(φ)|ψ_in⟩` at the commanded phase.
pub fn merit_report(
    chi: &ChoiMatrix,
    output_states: &[CMatrix],
    phi: ProgramPhase,
    feed_forward: bool,
    success_probability: f64,
) -> Result<MeritReport> {
    if output_states.len() != InputState::ALL.len() {
        return Err(Error::WrongStateCount { expected: InputState::ALL.len(), got: output_states.len() });
    }
    let f_chi = process_fidelity(chi, &ideal_choi(phi))?;
    let fids: Vec<f64> = InputState::ALL
        .iter()
        .zip(output_states)
        .map(|(s, rho)| state_fidelity(rho, &ideal_output(&s.ket(), phi)))
        .collect();
    let purities: Vec<f64> = output_states.iter().map(purity).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(MeritReport {
        phi: phi.radians(),
        f_chi,
        f_av: mean(&fids),
        f_min: min(&fids),
        p_av: mean(&purities),
        p_min: min(&purities),
        feed_forward_active: feed_forward,
        success_probability,
    })
}

/// Writes rows with the header
/// `phi,F_chi,F_av,F_min,P_av,P_min,feed_forward_active,success_probability`.
pub fn write_merit_csv<W: Write>(rows: &[MeritReport], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Format(e.to_string()))?;
    }
    if rows.is_empty() {
        w.write_record([
            "phi",
            "F_chi",
            "F_av",
            "F_min",
            "P_av",
            "P_min",
            "feed_forward_active",
            "success_probability",
        ])
        .map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}
