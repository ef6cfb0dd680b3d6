//! In-memory reconstruction and scoring of a count table.

use phasegate::gate::{InputState, ProgramPhase};
use phasegate::metrics::{merit_report, MeritReport};
use phasegate::sim::{rescale_efficiencies, select_without_feedforward, CountTable, NoiseConfig};
use phasegate::tomography::{
    ml_reconstruct_process_with, ml_reconstruct_state_with, process_settings, state_counts, ChoiMatrix, MatrixRecord,
    MlOptions, ProcessEstimate, RecordKind, StateEstimate,
};
use rayon::prelude::*;

use crate::error::{CliError, Result};

/// Process and output-state estimates of one phase.
#[derive(Debug, Clone)]
pub struct PhaseResult {
    pub phase: ProgramPhase,
    pub feed_forward: bool,
    pub success_probability: f64,
    pub process: ProcessEstimate,
    /// In `InputState::ALL` order.
    pub states: Vec<StateEstimate>,
}

impl PhaseResult {
    pub fn converged(&self) -> bool {
        self.process.converged && self.states.iter().all(|s| s.converged)
    }

    pub fn merit(&self) -> Result<MeritReport> {
        let rhos: Vec<_> = self.states.iter().map(|s| s.rho.clone()).collect();
        Ok(merit_report(&self.process.chi, &rhos, self.phase, self.feed_forward, self.success_probability)?)
    }

    pub fn choi_record(&self) -> MatrixRecord {
        MatrixRecord {
            kind: RecordKind::Choi,
            phase: self.phase,
            input_state: None,
            feed_forward: self.feed_forward,
            success_probability: self.success_probability,
            iterations: self.process.iterations,
            log_likelihood: self.process.log_likelihood,
            converged: self.process.converged,
            matrix: self.process.chi.matrix().clone(),
        }
    }

    pub fn state_records(&self) -> Vec<MatrixRecord> {
        InputState::ALL
            .iter()
            .zip(&self.states)
            .map(|(&s, est)| MatrixRecord {
                kind: RecordKind::State,
                phase: self.phase,
                input_state: Some(s),
                feed_forward: self.feed_forward,
                success_probability: self.success_probability,
                iterations: est.iterations,
                log_likelihood: est.log_likelihood,
                converged: est.converged,
                matrix: est.rho.clone(),
            })
            .collect()
    }
}

/// Applies the no-feed-forward selection when requested, then the
/// efficiency rescaling.
pub fn prepare_counts(counts: &CountTable, noise: &NoiseConfig, feed_forward: bool) -> Result<CountTable> {
    let selected = if feed_forward { counts.clone() } else { select_without_feedforward(counts) };
    Ok(rescale_efficiencies(&selected, noise)?)
}

/// Reconstructs one phase of an already prepared table.
pub fn reconstruct_phase(
    prepared: &CountTable,
    phase: ProgramPhase,
    feed_forward: bool,
    opts: &MlOptions,
) -> Result<PhaseResult> {
    let settings = process_settings(prepared, phase)?;
    let process = ml_reconstruct_process_with(&settings, opts)?;
    let states = InputState::ALL
        .iter()
        .map(|&s| Ok(ml_reconstruct_state_with(&state_counts(prepared, phase, s)?, opts)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseResult { phase, feed_forward, success_probability: prepared.success_probability, process, states })
}

/// Full reconstruction of every phase in the table, phases in parallel.
pub fn reconstruct_table(
    counts: &CountTable,
    noise: &NoiseConfig,
    feed_forward: bool,
    opts: &MlOptions,
) -> Result<Vec<PhaseResult>> {
    if counts.is_empty() {
        return Err(CliError::Data("count table is empty".into()));
    }
    let prepared = prepare_counts(counts, noise, feed_forward)?;
    let phases = prepared.phases();

    // report every gap at once rather than the first phase that fails
    let missing: Vec<String> = phases
        .iter()
        .filter_map(|&p| process_settings(&prepared, p).err())
        .flat_map(|e| match e {
            phasegate::Error::MissingSettings(v) => v,
            other => vec![other.to_string()],
        })
        .collect();
    if !missing.is_empty() {
        return Err(phasegate::Error::MissingSettings(missing).into());
    }

    phases.par_iter().map(|&p| reconstruct_phase(&prepared, p, feed_forward, opts)).collect()
}

/// Rebuilds merit rows from Choi and state records of one variant.
pub fn merit_from_records(choi: &MatrixRecord, states: &[MatrixRecord]) -> Result<MeritReport> {
    let chi = ChoiMatrix::new(choi.matrix.clone())?;
    let mut ordered = Vec::with_capacity(6);
    for s in InputState::ALL {
        let rec = states
            .iter()
            .find(|r| r.input_state == Some(s))
            .ok_or_else(|| CliError::Data(format!("missing output state {s} for phase {}", choi.phase.radians())))?;
        ordered.push(rec.matrix.clone());
    }
    Ok(merit_report(&chi, &ordered, choi.phase, choi.feed_forward, choi.success_probability)?)
}
