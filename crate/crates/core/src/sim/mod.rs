//! Synthetic coincidence data for the tomography protocol.
//!
//! Each post-selected event first lands in one of the two program detectors
//! with probability 1/2. The feed-forward correction is applied to the D_p1
//! branch before the data qubit is measured, visibility shrinks the coherence
//! of the data state, and each detector pair is weighted by its efficiency.
//! Dark counts add accidental coincidences at `dark_i · dark_j · window`.

mod config;
mod table;

pub use config::{ExperimentPlan, NoiseConfig};
pub use table::{format_phase, table_phase, CountKey, CountTable, DataDetector, ProgramDetector, Setting, CSV_HEADER};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gate::{
    conditional_joint_state, feed_forward_correct, measure_program, Basis, ProgramPhase, PureQubit,
    POSTSELECTION_PROBABILITY,
};
use crate::seed::derive_seed;

/// Data-detector distribution conditioned on each program detector,
/// indexed `[program][data]`; each row sums to one.
pub fn branch_distributions(psi_in: &PureQubit, phi: ProgramPhase, basis: Basis, visibility: f64) -> [[f64; 2]; 2] {
    let (joint, _) = conditional_joint_state(psi_in, phi);
    let mut out = [[0.0; 2]; 2];
    for det in ProgramDetector::ALL {
        let outcome = det.outcome();
        let (data, _) = measure_program(&joint, outcome).expect("program outcomes are unbiased");
        let data = feed_forward_correct(&data, outcome);
        let mut rho = data.density_matrix();
        rho[(0, 1)] *= visibility;
        rho[(1, 0)] *= visibility;
        for (d, ket) in basis.kets().iter().enumerate() {
            out[det.index()][d] = rho.sandwich(&ket.amplitudes(), &ket.amplitudes()).re.clamp(0.0, 1.0);
        }
    }
    out
}

/// Per-setting detection model: probabilities per post-selected event for
/// each detector pair (efficiencies included) and accidental dark rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairModel {
    /// Probability that a post-selected pair is detected at `[program][data]`.
    pub signal: [[f64; 2]; 2],
    /// Accidental coincidence rate at `[program][data]`, counts/s.
    pub dark_rate: [[f64; 2]; 2],
}

impl PairModel {
    pub fn new(psi_in: &PureQubit, phi: ProgramPhase, basis: Basis, noise: &NoiseConfig) -> Self {
        let cond = branch_distributions(psi_in, phi, basis, noise.visibility);
        let mut signal = [[0.0; 2]; 2];
        let mut dark_rate = [[0.0; 2]; 2];
        for p in 0..2 {
            for d in 0..2 {
                // each program outcome occurs with probability 1/2
                signal[p][d] = 0.5 * cond[p][d] * noise.program_efficiency(p) * noise.data_efficiency(d);
                dark_rate[p][d] = noise.program_dark(p) * noise.data_dark(d) * noise.coincidence_window;
            }
        }
        Self { signal, dark_rate }
    }

    /// Expected coincidence rate per detector pair, counts/s.
    pub fn rates(&self, noise: &NoiseConfig) -> [[f64; 2]; 2] {
        let event_rate = noise.pair_rate * POSTSELECTION_PROBABILITY;
        let mut r = [[0.0; 2]; 2];
        for p in 0..2 {
            for d in 0..2 {
                r[p][d] = event_rate * self.signal[p][d] + self.dark_rate[p][d];
            }
        }
        r
    }
}

/// Normalized outcome distribution over the four detector pairs together
/// with the total expected coincidence rate it was normalized from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeProbabilities {
    /// Indexed `[program][data]`, sums to one.
    pub probabilities: [[f64; 2]; 2],
    /// Total coincidence rate before normalization, counts/s.
    pub total_rate: f64,
}

pub fn outcome_probabilities(
    psi_in: &PureQubit,
    phi: ProgramPhase,
    basis: Basis,
    noise: &NoiseConfig,
) -> OutcomeProbabilities {
    let rates = PairModel::new(psi_in, phi, basis, noise).rates(noise);
    let total_rate: f64 = rates.iter().flatten().sum();
    let mut probabilities = [[0.0; 2]; 2];
    if total_rate > 0.0 {
        for p in 0..2 {
            for d in 0..2 {
                probabilities[p][d] = rates[p][d] / total_rate;
            }
        }
    }
    OutcomeProbabilities { probabilities, total_rate }
}

fn poisson<R: Rng>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
}

fn binomial<R: Rng>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("probability in (0, 1)").sample(rng)
}

/// Splits `n` events over `probs` (sum ≤ 1; the remainder is discarded).
fn multinomial<R: Rng>(rng: &mut R, n: u64, probs: &[f64]) -> Vec<u64> {
    let mut left = n;
    let mut mass = 1.0;
    probs
        .iter()
        .map(|&p| {
            let k = if mass <= 0.0 { 0 } else { binomial(rng, left, (p / mass).min(1.0)) };
            left -= k;
            mass -= p;
            k
        })
        .collect()
}

struct SettingDraw {
    counts: Vec<[[u64; 2]; 2]>,
    generated: u64,
}

fn simulate_setting(setting: Setting, noise: &NoiseConfig, seed: u64, index: u64) -> SettingDraw {
    let (phi, state, basis) = setting;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "simulate", index));
    let jitter = Normal::new(0.0, noise.phase_sigma).expect("sigma validated");
    let psi = state.ket();
    let mut generated = 0;
    let counts = (0..noise.n_intervals)
        .map(|_| {
            // fresh phase error after every stabilization cycle
            let delta = if noise.phase_sigma > 0.0 { jitter.sample(&mut rng) } else { 0.0 };
            let model = PairModel::new(&psi, ProgramPhase::new(phi.radians() + delta), basis, noise);
            let pairs = poisson(&mut rng, noise.pair_rate * noise.interval_s);
            generated += pairs;
            let events = binomial(&mut rng, pairs, POSTSELECTION_PROBABILITY);
            let flat: Vec<f64> = model.signal.iter().flatten().copied().collect();
            let split = multinomial(&mut rng, events, &flat);
            let mut cell = [[0u64; 2]; 2];
            for p in 0..2 {
                for d in 0..2 {
                    cell[p][d] = split[2 * p + d] + poisson(&mut rng, model.dark_rate[p][d] * noise.interval_s);
                }
            }
            cell
        })
        .collect();
    SettingDraw { counts, generated }
}

/// Draws a full count table. Every setting has its own random stream derived
/// from `seed` and its position in the plan, so the result is independent of
/// thread scheduling.
pub fn simulate_counts(plan: &ExperimentPlan, noise: &NoiseConfig, seed: u64) -> Result<CountTable> {
    plan.validate()?;
    noise.validate()?;
    let settings = plan.settings();
    let draws: Vec<SettingDraw> =
        settings.par_iter().enumerate().map(|(i, &s)| simulate_setting(s, noise, seed, i as u64)).collect();

    let mut table = CountTable::new();
    let mut generated = 0;
    for (&(phase, input_state, basis), draw) in settings.iter().zip(&draws) {
        generated += draw.generated;
        for (interval, cell) in draw.counts.iter().enumerate() {
            for program_detector in ProgramDetector::ALL {
                for data_detector in DataDetector::ALL {
                    let key = CountKey { phase, input_state, basis, program_detector, data_detector, interval };
                    table.insert(key, cell[program_detector.index()][data_detector.index()] as f64);
                }
            }
        }
    }
    table.generated_pairs = Some(generated);
    Ok(table)
}

/// Divides every record by the efficiency product of its detector pair.
pub fn rescale_efficiencies(counts: &CountTable, noise: &NoiseConfig) -> Result<CountTable> {
    for (name, eta) in [("D_p0", noise.eta_p0), ("D_p1", noise.eta_p1), ("D_d0", noise.eta_d0), ("D_d1", noise.eta_d1)]
    {
        if eta <= 0.0 {
            return Err(Error::ZeroEfficiency(name.into()));
        }
    }
    let mut out = counts.clone();
    for (k, v) in out.iter_mut() {
        *v /= noise.program_efficiency(k.program_detector.index()) * noise.data_efficiency(k.data_detector.index());
    }
    Ok(out)
}

/// Keeps only D_p0 events, the analysis without feed forward. D_p1 records
/// stay in the table with zero counts.
pub fn select_without_feedforward(counts: &CountTable) -> CountTable {
    let mut out = counts.clone();
    for (k, v) in out.iter_mut() {
        if k.program_detector == ProgramDetector::Dp1 {
            *v = 0.0;
        }
    }
    out.success_probability = counts.success_probability / 2.0;
    out
}

/// Usable coincidences per generated pair, if the pair count is known.
pub fn usable_fraction(counts: &CountTable) -> Option<f64> {
    counts.generated_pairs.filter(|&g| g > 0).map(|g| counts.total() / g as f64)
}
