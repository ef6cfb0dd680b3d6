//! Subcommands and the files they hand to each other.
//!
//! Layout under the output directory:
//!
//! ```text
//! counts.csv
//! choi/{ff,noff}/phi_<phase>.txt
//! states/{ff,noff}/phi_<phase>_<input>.txt
//! report.csv
//! report.txt
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use phasegate::gate::ProgramPhase;
use phasegate::metrics::{write_merit_csv, MeritReport};
use phasegate::sim::{format_phase, simulate_counts, CountTable};
use phasegate::tomography::{MatrixRecord, MlOptions, RecordKind};

use crate::analysis::{merit_from_records, reconstruct_table, PhaseResult};
use crate::config::{Emit, RunConfig};
use crate::error::{CliError, Result};

pub const COUNTS_FILE: &str = "counts.csv";
pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_TXT: &str = "report.txt";

fn variant_dir(feed_forward: bool) -> &'static str {
    if feed_forward {
        "ff"
    } else {
        "noff"
    }
}

pub fn choi_path(out: &Path, phase: ProgramPhase, feed_forward: bool) -> PathBuf {
    out.join("choi").join(variant_dir(feed_forward)).join(format!("phi_{}.txt", format_phase(phase)))
}

fn state_path(out: &Path, rec: &MatrixRecord) -> PathBuf {
    let slug = rec.input_state.map(|s| s.slug()).unwrap_or("x");
    out.join("states").join(variant_dir(rec.feed_forward)).join(format!("phi_{}_{slug}.txt", format_phase(rec.phase)))
}

/// Writes through a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub fn read_counts(path: &Path) -> Result<CountTable> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    CountTable::read_csv(file).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Simulates the configured plan and writes `counts.csv`.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let seed = cfg.require_seed()?;
    let table = simulate_counts(&cfg.plan, &cfg.noise, seed)?;
    let path = cfg.output_dir.join(COUNTS_FILE);
    write_atomic(&path, table.to_csv_string().as_bytes())?;
    Ok(path)
}

fn check_converged(results: &[PhaseResult]) -> Result<()> {
    let stuck: Vec<String> =
        results.iter().filter(|r| !r.converged()).map(|r| format!("phase {}", format_phase(r.phase))).collect();
    if stuck.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("maximum-likelihood iteration did not converge for {}", stuck.join(", "))))
    }
}

/// Serialized Choi and state records, keyed by destination path.
fn render_records(out: &Path, results: &[PhaseResult]) -> BTreeMap<PathBuf, String> {
    let mut files = BTreeMap::new();
    for r in results {
        let choi = r.choi_record();
        files.insert(choi_path(out, r.phase, r.feed_forward), choi.to_text());
        for s in r.state_records() {
            files.insert(state_path(out, &s), s.to_text());
        }
    }
    files
}

/// Reconstructs every phase of a count table for one analysis variant and
/// writes the emitted Choi and state files.
pub fn reconstruct_counts(cfg: &RunConfig, counts: &CountTable, feed_forward: bool) -> Result<Vec<PhaseResult>> {
    reconstruct_counts_with(cfg, counts, feed_forward, &MlOptions::default())
}

pub fn reconstruct_counts_with(
    cfg: &RunConfig,
    counts: &CountTable,
    feed_forward: bool,
    opts: &MlOptions,
) -> Result<Vec<PhaseResult>> {
    cfg.noise.validate()?;
    let results = reconstruct_table(counts, &cfg.noise, feed_forward, opts)?;
    check_converged(&results)?;
    for (path, text) in render_records(&cfg.output_dir, &results) {
        let is_choi = path.starts_with(cfg.output_dir.join("choi"));
        if (is_choi && cfg.emits(Emit::Choi)) || (!is_choi && cfg.emits(Emit::States)) {
            write_atomic(&path, text.as_bytes())?;
        }
    }
    Ok(results)
}

pub fn cmd_reconstruct(cfg: &RunConfig, counts_path: &Path) -> Result<Vec<PhaseResult>> {
    let counts = read_counts(counts_path)?;
    reconstruct_counts(cfg, &counts, cfg.feed_forward)
}

/// Merit rows of both analysis variants plus the paired comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub with_ff: Vec<MeritReport>,
    pub without_ff: Vec<MeritReport>,
    /// Largest `|ΔF_χ|` between variants over the shared phases, with its phase.
    pub max_delta_f_chi: Option<(f64, f64)>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn rows(&self) -> Vec<MeritReport> {
        self.with_ff.iter().chain(&self.without_ff).cloned().collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        write_merit_csv(&self.rows(), &mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (title, rows) in [("with feed forward", &self.with_ff), ("without feed forward", &self.without_ff)] {
            if rows.is_empty() {
                continue;
            }
            let p_succ = rows[0].success_probability;
            writeln!(s, "{title} (p_succ = {:.0}%)", 100.0 * p_succ).unwrap();
            writeln!(s, "{:>8}  {:>6}  {:>6}  {:>6}  {:>6}  {:>6}", "phi", "F_chi", "F_av", "F_min", "P_av", "P_min")
                .unwrap();
            for r in rows.iter() {
                writeln!(
                    s,
                    "{:>8}  {:6.3}  {:6.3}  {:6.3}  {:6.3}  {:6.3}",
                    phase_label(r.phi),
                    r.f_chi,
                    r.f_av,
                    r.f_min,
                    r.p_av,
                    r.p_min
                )
                .unwrap();
            }
            writeln!(s).unwrap();
        }
        if let Some((delta, phi)) = self.max_delta_f_chi {
            writeln!(s, "max |F_chi(ff) - F_chi(no ff)| = {delta:.4} at phi = {}", phase_label(phi)).unwrap();
        }
        for w in &self.warnings {
            writeln!(s, "warning: {w}").unwrap();
        }
        s
    }
}

/// Multiples of π/6 print as fractions of π, anything else in radians.
pub fn phase_label(phi: f64) -> String {
    let sixths = phi / (PI / 6.0);
    let k = sixths.round();
    if (sixths - k).abs() > 1e-6 {
        return format!("{phi:.4}");
    }
    let k = k as i64;
    let g = gcd(k, 6);
    let (num, den) = if k == 0 { (0, 1) } else { (k / g, 6 / g) };
    match (num, den) {
        (0, _) => "0".into(),
        (1, 1) => "pi".into(),
        (n, 1) => format!("{n}pi"),
        (1, d) => format!("pi/{d}"),
        (n, d) => format!("{n}pi/{d}"),
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn read_records(dir: &Path) -> Result<Vec<MatrixRecord>> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            MatrixRecord::from_text(&text).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))
        })
        .collect()
}

fn variant_rows(choi: &[MatrixRecord], states: &[MatrixRecord]) -> Result<BTreeMap<ProgramPhase, MeritReport>> {
    let mut rows = BTreeMap::new();
    for c in choi {
        if c.kind != RecordKind::Choi {
            return Err(CliError::Data("state record found among Choi files".into()));
        }
        let mine: Vec<MatrixRecord> = states.iter().filter(|s| s.phase == c.phase).cloned().collect();
        rows.insert(c.phase, merit_from_records(c, &mine)?);
    }
    Ok(rows)
}

/// Builds the report from Choi and state records of both variants.
pub fn build_report(
    ff: (&[MatrixRecord], &[MatrixRecord]),
    noff: (&[MatrixRecord], &[MatrixRecord]),
) -> Result<Report> {
    let mut with_ff = variant_rows(ff.0, ff.1)?;
    let mut without_ff = variant_rows(noff.0, noff.1)?;
    let mut warnings = Vec::new();

    let mut max_delta_f_chi = None;
    if !with_ff.is_empty() && !without_ff.is_empty() {
        let a: Vec<ProgramPhase> = with_ff.keys().copied().collect();
        let b: Vec<ProgramPhase> = without_ff.keys().copied().collect();
        if a != b {
            warnings.push(format!(
                "phase sets differ between variants ({} with, {} without feed forward); reporting the intersection",
                a.len(),
                b.len()
            ));
            with_ff.retain(|p, _| without_ff.contains_key(p));
            without_ff.retain(|p, _| with_ff.contains_key(p));
        }
        for (p, r) in &with_ff {
            let d = (r.f_chi - without_ff[p].f_chi).abs();
            if max_delta_f_chi.is_none_or(|(m, _)| d > m) {
                max_delta_f_chi = Some((d, p.radians()));
            }
        }
    }
    if with_ff.is_empty() && without_ff.is_empty() {
        return Err(CliError::Data("no Choi records found".into()));
    }
    Ok(Report {
        with_ff: with_ff.into_values().collect(),
        without_ff: without_ff.into_values().collect(),
        max_delta_f_chi,
        warnings,
    })
}

/// Reads all Choi and state files under `out` and writes the report files.
pub fn cmd_report(out: &Path) -> Result<Report> {
    let load = |ff: bool| -> Result<(Vec<MatrixRecord>, Vec<MatrixRecord>)> {
        let v = variant_dir(ff);
        Ok((read_records(&out.join("choi").join(v))?, read_records(&out.join("states").join(v))?))
    };
    let (ff_c, ff_s) = load(true)?;
    let (no_c, no_s) = load(false)?;
    let report = build_report((&ff_c, &ff_s), (&no_c, &no_s))?;
    write_report(out, &report)?;
    Ok(report)
}

fn write_report(out: &Path, report: &Report) -> Result<()> {
    write_atomic(&out.join(REPORT_CSV), report.to_csv()?.as_bytes())?;
    write_atomic(&out.join(REPORT_TXT), report.to_text().as_bytes())
}

/// Result of the four-stage pipeline.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub counts: CountTable,
    pub with_ff: Vec<PhaseResult>,
    pub without_ff: Vec<PhaseResult>,
    pub report: Report,
}

/// simulate → reconstruct → report. With feed forward enabled both analysis
/// variants are reconstructed from the same counts; with it disabled only
/// the D_p0-selected variant is.
pub fn cmd_pipeline(cfg: &RunConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    let seed = cfg.require_seed()?;
    let counts = simulate_counts(&cfg.plan, &cfg.noise, seed)?;
    if cfg.emits(Emit::Counts) {
        write_atomic(&cfg.output_dir.join(COUNTS_FILE), counts.to_csv_string().as_bytes())?;
    }

    let with_ff = if cfg.feed_forward { reconstruct_counts(cfg, &counts, true)? } else { Vec::new() };
    let without_ff = reconstruct_counts(cfg, &counts, false)?;

    // score from the serialized records so the report matches `report` run on the files
    let reparse = |results: &[PhaseResult]| -> Result<(Vec<MatrixRecord>, Vec<MatrixRecord>)> {
        let mut choi = Vec::new();
        let mut states = Vec::new();
        for r in results {
            choi.push(MatrixRecord::from_text(&r.choi_record().to_text())?);
            for s in r.state_records() {
                states.push(MatrixRecord::from_text(&s.to_text())?);
            }
        }
        Ok((choi, states))
    };
    let (ff_c, ff_s) = reparse(&with_ff)?;
    let (no_c, no_s) = reparse(&without_ff)?;
    let report = build_report((&ff_c, &ff_s), (&no_c, &no_s))?;
    if cfg.emits(Emit::Report) {
        write_report(&cfg.output_dir, &report)?;
    }
    Ok(PipelineOutput { counts, with_ff, without_ff, report })
}
