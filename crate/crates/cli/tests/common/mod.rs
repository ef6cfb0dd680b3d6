#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use phasegate::sim::NoiseConfig;
use phasegate_cli::RunConfig;

pub fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phasegate")).args(args).output().expect("binary runs")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

/// Ideal detectors with `events` expected post-selected events per phase
/// over the full 18-setting design.
pub fn ideal_noise(events_per_phase: f64) -> NoiseConfig {
    let base = NoiseConfig::ideal();
    let per_setting = events_per_phase / 18.0;
    NoiseConfig { pair_rate: 2.0 * per_setting / (base.interval_s * base.n_intervals as f64), ..base }
}

/// Serializes `cfg` next to the run and returns the path.
pub fn config_file(dir: &Path, cfg: &RunConfig) -> String {
    write(dir, "run.toml", &toml::to_string(cfg).expect("config serializes"))
}
