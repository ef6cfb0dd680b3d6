mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use common::{config_file, ideal_noise, run, stderr, write};
use phasegate::gate::{Basis, InputState, ProgramPhase};
use phasegate::metrics::{ideal_choi, process_fidelity};
use phasegate::sim::{simulate_counts, CountTable, ExperimentPlan, NoiseConfig};
use phasegate::tomography::{ChoiMatrix, MatrixRecord, MlOptions};
use phasegate_cli::analysis::reconstruct_table;
use phasegate_cli::commands::{choi_path, cmd_pipeline, cmd_report, reconstruct_counts_with, COUNTS_FILE, REPORT_CSV};
use phasegate_cli::{Emit, RunConfig};
use tempfile::TempDir;

fn cfg_in(dir: &Path, seed: u64) -> RunConfig {
    RunConfig { seed: Some(seed), output_dir: dir.join("out"), ..RunConfig::default() }
}

fn arg(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

/// Every file under `root`, keyed by relative path.
fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn read_choi(out: &Path, phi: f64, feed_forward: bool) -> MatrixRecord {
    let text = fs::read_to_string(choi_path(out, ProgramPhase::new(phi), feed_forward)).unwrap();
    MatrixRecord::from_text(&text).unwrap()
}

fn fidelity(rec: &MatrixRecord) -> f64 {
    process_fidelity(&ChoiMatrix::new(rec.matrix.clone()).unwrap(), &ideal_choi(rec.phase)).unwrap()
}

#[test]
fn simulate_writes_the_full_index_space() {
    let tmp = TempDir::new().unwrap();
    let cfg = config_file(tmp.path(), &cfg_in(tmp.path(), 1));
    let out = run(&["simulate", "--config", &cfg]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(tmp.path().join("out").join(COUNTS_FILE)).unwrap();
    assert_eq!(text.lines().count() - 1, 6048);
    assert!(text.starts_with("phase,input_state,basis,program_detector,data_detector,interval,count"));
}

#[test]
fn minimal_plan_has_four_rows() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = cfg_in(tmp.path(), 1);
    cfg.plan = ExperimentPlan {
        phases: vec![ProgramPhase::new(0.3)],
        input_states: vec![InputState::Plus],
        bases: vec![Basis::Y],
    };
    cfg.noise.n_intervals = 1;
    let path = config_file(tmp.path(), &cfg);
    assert!(run(&["simulate", "--config", &path]).status.success());
    let text = fs::read_to_string(tmp.path().join("out").join(COUNTS_FILE)).unwrap();
    assert_eq!(text.lines().count() - 1, 4);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = config_file(tmp.path(), &RunConfig { seed: Some(42), ..RunConfig::default() });
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = run(&["pipeline", "--config", &cfg, "--out", &arg(dir)]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let (sa, sb) = (snapshot(&a), snapshot(&b));
    assert!(sa.len() > 100);
    assert_eq!(sa, sb);

    let c = tmp.path().join("c");
    run(&["simulate", "--config", &cfg, "--seed", "43", "--out", &arg(&c)]);
    assert_ne!(fs::read(c.join(COUNTS_FILE)).unwrap(), sa[COUNTS_FILE]);
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    let bad_value = write(tmp.path(), "a.toml", "seed = 1\n[noise]\nvisibility = 1.5\n");
    let out = run(&["simulate", "--config", &bad_value, "--out", &arg(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("visibility"), "{}", stderr(&out));

    let unknown = write(tmp.path(), "b.toml", "seed = 1\n[noise]\npair_rte = 10.0\n");
    let out = run(&["simulate", "--config", &unknown, "--out", &arg(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("pair_rte"));

    let out = run(&["simulate", "--out", &arg(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("seed"));

    let out = run(&["pipeline", "--seed", "1", "--emit", "counts,plots", "--out", &arg(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_counts_exit_with_three() {
    let tmp = TempDir::new().unwrap();
    let garbage = write(tmp.path(), "counts.csv", "phase,input_state\n1,2\n");
    let out = run(&["reconstruct", "--counts", &garbage, "--out", &arg(tmp.path())]);
    assert_eq!(out.status.code(), Some(3));

    let out = run(&["reconstruct", "--counts", &arg(&tmp.path().join("nope.csv")), "--out", &arg(tmp.path())]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_basis_lists_the_gaps() {
    let tmp = TempDir::new().unwrap();
    let full = simulate_counts(&ExperimentPlan::single_phase(PI / 2.0), &NoiseConfig::calibrated(), 7).unwrap();
    let text: String = full
        .to_csv_string()
        .lines()
        .filter(|l| !(l.contains(",+i,") && l.contains(",Y,")))
        .map(|l| format!("{l}\n"))
        .collect();
    let path = write(tmp.path(), "counts.csv", &text);
    let out = run(&["reconstruct", "--counts", &path, "--out", &arg(tmp.path())]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr(&out);
    assert!(err.contains("input_state=+i basis=Y"), "{err}");
}

#[test]
fn non_convergence_is_a_numerical_failure() {
    let tmp = TempDir::new().unwrap();
    let cfg = cfg_in(tmp.path(), 3);
    let table = simulate_counts(&ExperimentPlan::single_phase(PI / 3.0), &cfg.noise, 3).unwrap();
    let starved = MlOptions { max_iterations: 2, ..MlOptions::default() };
    let err = reconstruct_counts_with(&cfg, &table, true, &starved).unwrap_err();
    assert_eq!(err.exit_code(), 4);
    assert!(!tmp.path().join("out").join("choi").exists());
}

#[test]
fn noiseless_closed_loop_at_quarter_turn() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = cfg_in(tmp.path(), 5);
    cfg.plan = ExperimentPlan::single_phase(PI / 2.0);
    cfg.noise = ideal_noise(1e6);
    let path = config_file(tmp.path(), &cfg);
    let out_dir = tmp.path().join("out");

    assert!(run(&["simulate", "--config", &path]).status.success());
    for extra in [None, Some("--no-feed-forward")] {
        let mut args = vec!["reconstruct", "--config", &path];
        args.extend(extra);
        let out = run(&args);
        assert!(out.status.success(), "{}", stderr(&out));
    }

    let with = read_choi(&out_dir, PI / 2.0, true);
    let without = read_choi(&out_dir, PI / 2.0, false);
    assert!(fidelity(&with) >= 0.9999, "{}", fidelity(&with));
    assert!(fidelity(&without) >= 0.9999, "{}", fidelity(&without));
    assert_eq!(with.success_probability, 0.5);
    assert_eq!(without.success_probability, 0.25);
    // log-likelihood is a sum over events, so it tracks the event count
    let ratio = without.log_likelihood / with.log_likelihood;
    assert!((ratio - 0.5).abs() < 0.01, "{ratio}");
}

#[test]
fn ideal_records_report_all_ones() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("out");
    let mut cfg = cfg_in(tmp.path(), 9);
    cfg.noise = ideal_noise(4e8);
    cfg.emit = [Emit::Choi, Emit::States].into_iter().collect();
    let pipe = cmd_pipeline(&cfg).unwrap();
    assert!(!out_dir.join(REPORT_CSV).exists() && !out_dir.join(COUNTS_FILE).exists());

    let report = cmd_report(&out_dir).unwrap();
    assert_eq!(report, pipe.report);
    assert_eq!(report.with_ff.len(), 7);
    assert_eq!(report.without_ff.len(), 7);
    for row in report.rows() {
        for v in [row.f_chi, row.f_av, row.f_min, row.p_av, row.p_min] {
            assert!(v > 0.999, "{row:?}");
        }
    }
    assert!(report.with_ff.iter().all(|r| r.success_probability == 0.5 && r.feed_forward_active));
    assert!(report.without_ff.iter().all(|r| r.success_probability == 0.25 && !r.feed_forward_active));

    let csv = fs::read_to_string(out_dir.join(REPORT_CSV)).unwrap();
    assert_eq!(csv.lines().count(), 15);
    assert!(csv.starts_with("phi,F_chi,F_av,F_min,P_av,P_min,feed_forward_active,success_probability\n"));
}

#[test]
fn exact_ideal_files_report_exactly_one() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg =
        RunConfig { noise: ideal_noise(1e6), plan: ExperimentPlan::single_phase(PI / 6.0), ..cfg_in(tmp.path(), 2) };
    cmd_pipeline(&cfg).unwrap();
    // overwrite every record with the ideal matrix
    for ff in [true, false] {
        let path = choi_path(&out_dir, ProgramPhase::new(PI / 6.0), ff);
        let mut rec = MatrixRecord::from_text(&fs::read_to_string(&path).unwrap()).unwrap();
        rec.matrix = ideal_choi(rec.phase).into_matrix();
        fs::write(&path, rec.to_text()).unwrap();
    }
    for entry in walk(&out_dir.join("states")) {
        let mut rec = MatrixRecord::from_text(&fs::read_to_string(&entry).unwrap()).unwrap();
        let psi = phasegate::gate::ideal_output(&rec.input_state.unwrap().ket(), rec.phase);
        rec.matrix = psi.density_matrix();
        fs::write(&entry, rec.to_text()).unwrap();
    }
    let report = cmd_report(&out_dir).unwrap();
    for row in report.rows() {
        for v in [row.f_chi, row.f_av, row.f_min, row.p_av, row.p_min] {
            assert!((v - 1.0).abs() < 1e-12, "{row:?}");
        }
    }
    assert!(report.max_delta_f_chi.unwrap().0 < 1e-12);
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn mismatched_phase_sets_report_the_intersection() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("out");
    cmd_pipeline(&cfg_in(tmp.path(), 4)).unwrap();
    fs::remove_file(choi_path(&out_dir, ProgramPhase::new(PI), false)).unwrap();
    let out = run(&["report", "--out", &arg(&out_dir)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("intersection"));
    let report = cmd_report(&out_dir).unwrap();
    assert_eq!(report.with_ff.len(), 6);
    assert_eq!(report.without_ff.len(), 6);
    assert!(String::from_utf8_lossy(&out.stdout).contains("max |F_chi(ff) - F_chi(no ff)|"));
}

#[test]
fn csv_ingest_matches_in_memory() {
    let noise = NoiseConfig::calibrated();
    let table = simulate_counts(&ExperimentPlan::standard(), &noise, 12).unwrap();
    let ingested = CountTable::read_csv(table.to_csv_string().as_bytes()).unwrap();
    for ff in [true, false] {
        let a = reconstruct_table(&table, &noise, ff, &MlOptions::default()).unwrap();
        let b = reconstruct_table(&ingested, &noise, ff, &MlOptions::default()).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.phase, y.phase);
            assert_eq!(x.choi_record().to_text(), y.choi_record().to_text());
            assert_eq!(x.merit().unwrap(), y.merit().unwrap());
        }
    }
}

#[test]
fn disabled_feed_forward_runs_one_variant() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = RunConfig { feed_forward: false, ..cfg_in(tmp.path(), 6) };
    let pipe = cmd_pipeline(&cfg).unwrap();
    assert!(pipe.with_ff.is_empty() && pipe.report.with_ff.is_empty());
    assert_eq!(pipe.report.without_ff.len(), 7);
    assert!(!out_dir.join("choi").join("ff").exists());
}
