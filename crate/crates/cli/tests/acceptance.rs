//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::ideal_noise;
use phasegate::gate::{
    conditional_joint_state, feed_forward_correct, gate_unitary, measure_program, Basis, InputState, ProgramOutcome,
    ProgramPhase, PureQubit,
};
use phasegate::linalg::{c, CMatrix, C64};
use phasegate::metrics::{ideal_choi, process_fidelity};
use phasegate::sim::{
    branch_distributions, rescale_efficiencies, select_without_feedforward, simulate_counts, usable_fraction,
    ExperimentPlan, NoiseConfig,
};
use phasegate::tomography::{apply_map, ml_reconstruct_process_with, process_settings, MlOptions};
use phasegate_cli::analysis::reconstruct_table;
use phasegate_cli::commands::cmd_pipeline;
use phasegate_cli::RunConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SEEDS: u64 = 20;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn standard_phases() -> Vec<ProgramPhase> {
    ExperimentPlan::standard().phases
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn noiseless_closed_loop() -> Verdict {
    let dir = tempfile::TempDir::new().unwrap();
    // four times the required minimum keeps the worst phase clear of the
    // shot-noise tail at the threshold
    let events = 4e6;
    let cfg = RunConfig {
        noise: ideal_noise(events),
        seed: Some(1),
        output_dir: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    let start = Instant::now();
    let out = cmd_pipeline(&cfg).unwrap();
    let elapsed = start.elapsed();
    let per_phase = out.counts.total() / 7.0;
    let worst = out.report.with_ff.iter().map(|r| r.f_chi).fold(f64::INFINITY, f64::min);
    let pass =
        out.report.with_ff.len() == 7 && worst >= 0.999 && per_phase >= 1e6 && elapsed < Duration::from_secs(120);
    verdict(pass, format!("min F_chi = {worst:.6} over 7 phases, {per_phase:.3e} events/phase, {elapsed:.2?}"))
}

fn success_doubling() -> Verdict {
    let table = simulate_counts(&ExperimentPlan::standard(), &ideal_noise(1e6), 2).unwrap();
    let with = usable_fraction(&table).unwrap();
    let without = usable_fraction(&select_without_feedforward(&table)).unwrap();
    let pass = (with - 0.50).abs() <= 0.01 && (without - 0.25).abs() <= 0.01;
    verdict(pass, format!("with feed forward {with:.4}, without {without:.4}"))
}

/// F_χ of both variants for every seed, indexed `[seed][phase]`.
fn calibrated_runs() -> Vec<Vec<(f64, f64)>> {
    let noise = NoiseConfig::calibrated();
    (0..SEEDS)
        .into_par_iter()
        .map(|seed| {
            let table = simulate_counts(&ExperimentPlan::standard(), &noise, 1000 + seed).unwrap();
            let with = reconstruct_table(&table, &noise, true, &MlOptions::default()).unwrap();
            let without = reconstruct_table(&table, &noise, false, &MlOptions::default()).unwrap();
            with.iter().zip(&without).map(|(a, b)| (a.merit().unwrap().f_chi, b.merit().unwrap().f_chi)).collect()
        })
        .collect()
}

fn feed_forward_neutrality(runs: &[Vec<(f64, f64)>]) -> Verdict {
    let medians: Vec<f64> = (0..7).map(|p| median(runs.iter().map(|r| (r[p].0 - r[p].1).abs()).collect())).collect();
    let worst = medians.iter().copied().fold(0.0, f64::max);
    verdict(worst < 0.01, format!("largest per-phase median |dF_chi| = {worst:.4} over {SEEDS} seeds"))
}

fn calibrated_band(runs: &[Vec<(f64, f64)>]) -> Verdict {
    let dir = tempfile::TempDir::new().unwrap();
    let cfg = RunConfig { seed: Some(1), output_dir: dir.path().to_path_buf(), ..RunConfig::default() };
    let out = cmd_pipeline(&cfg).unwrap();
    let f: Vec<f64> = out.report.with_ff.iter().map(|r| r.f_chi).collect();
    let lo = f.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = f.iter().copied().fold(0.0, f64::max);
    let all: Vec<f64> = runs.iter().flatten().map(|r| r.0).collect();
    let all_lo = all.iter().copied().fold(f64::INFINITY, f64::min);
    let all_hi = all.iter().copied().fold(0.0, f64::max);
    let inside = |x: f64| (0.96..=0.99).contains(&x);
    let pass = f.len() == 7 && inside(lo) && inside(hi) && inside(all_lo) && inside(all_hi);
    verdict(
        pass,
        format!("default run F_chi in [{lo:.4}, {hi:.4}]; {SEEDS} further seeds in [{all_lo:.4}, {all_hi:.4}]"),
    )
}

fn fidelity_oracle() -> Verdict {
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let phi = 2.0 * PI * i as f64 / 100.0;
        for other in standard_phases() {
            let f = process_fidelity(&ideal_choi(ProgramPhase::new(phi)), &ideal_choi(other)).unwrap();
            let oracle = ((phi - other.radians()) / 2.0).cos().powi(2);
            worst = worst.max((f - oracle).abs());
        }
    }
    verdict(worst < 1e-12, format!("max |F - cos^2(dphi/2)| = {worst:.2e} on 100x7 grid"))
}

fn random_density(rng: &mut ChaCha8Rng) -> CMatrix {
    let entries: Vec<C64> = (0..4).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let a = CMatrix::from_vec(2, 2, entries).unwrap();
    let m = &a * &a.adjoint();
    let t = m.trace().re;
    m.scale_real(1.0 / t)
}

fn map_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let rho = random_density(&mut rng);
        for phi in standard_phases() {
            let u = gate_unitary(phi);
            let direct = &(&u * &rho) * &u.adjoint();
            let (out, _) = apply_map(&ideal_choi(phi), &rho).unwrap();
            worst = worst.max(out.max_abs_diff(&direct));
        }
    }
    verdict(worst < 1e-12, format!("max |apply_map - U rho U^dag| = {worst:.2e} over 100x7"))
}

struct SweepPoint {
    infidelity: f64,
    iterations: usize,
    converged: bool,
    min_step: f64,
    min_eigenvalue: f64,
}

fn ml_properties(calibrated_iterations: usize) -> Verdict {
    let sizes = [1e3, 1e4, 1e5, 1e6];
    let opts = MlOptions { record_trace: true, ..MlOptions::default() };
    let mut medians = Vec::new();
    let mut max_iter = calibrated_iterations;
    let mut all_converged = true;
    let mut min_step = f64::INFINITY;
    let mut min_eig = f64::INFINITY;
    for (k, &n) in sizes.iter().enumerate() {
        let noise = ideal_noise(n);
        let points: Vec<SweepPoint> = (0..SEEDS)
            .into_par_iter()
            .flat_map_iter(|seed| {
                let table = simulate_counts(&ExperimentPlan::standard(), &noise, 100 * k as u64 + seed).unwrap();
                let table = rescale_efficiencies(&table, &noise).unwrap();
                standard_phases()
                    .into_iter()
                    .map(|phi| {
                        let est = ml_reconstruct_process_with(&process_settings(&table, phi).unwrap(), &opts).unwrap();
                        SweepPoint {
                            infidelity: 1.0 - process_fidelity(&est.chi, &ideal_choi(phi)).unwrap(),
                            iterations: est.iterations,
                            converged: est.converged,
                            min_step: est.likelihood_trace.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::min),
                            min_eigenvalue: est.chi.eigenvalues()[0],
                        }
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        medians.push(median(points.iter().map(|p| p.infidelity).collect()));
        for p in &points {
            max_iter = max_iter.max(p.iterations);
            all_converged &= p.converged;
            min_step = min_step.min(p.min_step);
            min_eig = min_eig.min(p.min_eigenvalue);
        }
    }
    let monotone = medians.windows(2).all(|w| w[1] < w[0]);
    let pass = monotone && all_converged && max_iter < 100_000 && min_step >= -1e-12 && min_eig >= -1e-10;
    let shown: Vec<String> = medians.iter().map(|m| format!("{m:.2e}")).collect();
    verdict(
        pass,
        format!(
            "median 1-F_chi at N=1e3..1e6: [{}]; max iterations {max_iter}; min likelihood step {min_step:.1e}; \
             min eigenvalue {min_eig:.1e}",
            shown.join(", ")
        ),
    )
}

fn branch_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_prob: f64 = 0.0;
    for _ in 0..200 {
        let theta: f64 = rng.random_range(0.0..PI);
        let az: f64 = rng.random_range(0.0..2.0 * PI);
        let psi = PureQubit::new(c((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), az)).unwrap();
        let phi = ProgramPhase::new(rng.random_range(0.0..2.0 * PI));
        for basis in Basis::ALL {
            let d = branch_distributions(&psi, phi, basis, 1.0);
            worst_prob = worst_prob.max((d[0][0] - d[1][0]).abs()).max((d[0][1] - d[1][1]).abs());
        }
        // same check straight from the gate primitives
        let (joint, _) = conditional_joint_state(&psi, phi);
        let plus =
            feed_forward_correct(&measure_program(&joint, ProgramOutcome::Plus).unwrap().0, ProgramOutcome::Plus);
        let minus =
            feed_forward_correct(&measure_program(&joint, ProgramOutcome::Minus).unwrap().0, ProgramOutcome::Minus);
        worst_prob = worst_prob.max((plus.overlap(&minus) - 1.0).abs());
    }

    let table = simulate_counts(&ExperimentPlan::standard(), &ideal_noise(1e6), 9).unwrap();
    let mut worst_z: f64 = 0.0;
    for phi in standard_phases() {
        for state in InputState::ALL {
            for basis in Basis::ALL {
                let n = table.setting_counts((phi, state, basis)).unwrap();
                for d in 0..2 {
                    let spread = (n[0][d] + n[1][d]).sqrt().max(1.0);
                    worst_z = worst_z.max((n[0][d] - n[1][d]).abs() / spread);
                }
            }
        }
    }
    let pass = worst_prob < 1e-12 && worst_z < 5.0;
    verdict(pass, format!("max probability gap {worst_prob:.1e}; max sampled gap {worst_z:.2} sigma"))
}

fn main() -> ExitCode {
    let runs = calibrated_runs();
    let calibrated_iterations = {
        // iteration counts of the calibrated datasets, for criterion 7
        let noise = NoiseConfig::calibrated();
        let table = simulate_counts(&ExperimentPlan::standard(), &noise, 1).unwrap();
        reconstruct_table(&table, &noise, true, &MlOptions::default())
            .unwrap()
            .iter()
            .map(|r| r.process.iterations)
            .max()
            .unwrap()
    };

    let results = [
        ("noiseless closed loop", noiseless_closed_loop()),
        ("success-probability doubling", success_doubling()),
        ("feed-forward neutrality", feed_forward_neutrality(&runs)),
        ("calibrated-noise band", calibrated_band(&runs)),
        ("closed-form fidelity oracle", fidelity_oracle()),
        ("map-application oracle", map_oracle()),
        ("maximum-likelihood properties", ml_properties(calibrated_iterations)),
        ("branch equivalence", branch_equivalence()),
    ];

    let mut failed = 0;
    for (i, (name, v)) in results.iter().enumerate() {
        println!("{} criterion {}: {name}: {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
