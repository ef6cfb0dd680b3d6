//! Coincidence-count tables and their CSV form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gate::{Basis, InputState, ProgramOutcome, ProgramPhase};

pub const CSV_HEADER: [&str; 7] =
    ["phase", "input_state", "basis", "program_detector", "data_detector", "interval", "count"];

/// Phase in radians with 12 significant digits, as written to CSV.
pub fn format_phase(phi: ProgramPhase) -> String {
    format!("{:.11e}", phi.radians())
}

/// Rounds a phase to the precision it has in CSV form so that tables built
/// in memory and tables read back from disk share keys exactly.
pub fn table_phase(phi: ProgramPhase) -> ProgramPhase {
    ProgramPhase::new(format_phase(phi).parse::<f64>().expect("formatted float parses"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProgramDetector {
    Dp0,
    Dp1,
}

impl ProgramDetector {
    pub const ALL: [ProgramDetector; 2] = [ProgramDetector::Dp0, ProgramDetector::Dp1];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn outcome(self) -> ProgramOutcome {
        match self {
            ProgramDetector::Dp0 => ProgramOutcome::Plus,
            ProgramDetector::Dp1 => ProgramOutcome::Minus,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ProgramDetector::Dp0 => "D_p0",
            ProgramDetector::Dp1 => "D_p1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DataDetector {
    Dd0,
    Dd1,
}

impl DataDetector {
    pub const ALL: [DataDetector; 2] = [DataDetector::Dd0, DataDetector::Dd1];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            DataDetector::Dd0 => "D_d0",
            DataDetector::Dd1 => "D_d1",
        }
    }
}

impl fmt::Display for ProgramDetector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl fmt::Display for DataDetector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ProgramDetector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "D_p0" => Ok(ProgramDetector::Dp0),
            "D_p1" => Ok(ProgramDetector::Dp1),
            other => Err(Error::Format(format!("unknown program detector `{other}`"))),
        }
    }
}

impl FromStr for DataDetector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "D_d0" => Ok(DataDetector::Dd0),
            "D_d1" => Ok(DataDetector::Dd1),
            other => Err(Error::Format(format!("unknown data detector `{other}`"))),
        }
    }
}

/// One (phase, input, basis) setting.
pub type Setting = (ProgramPhase, InputState, Basis);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CountKey {
    pub phase: ProgramPhase,
    pub input_state: InputState,
    pub basis: Basis,
    pub program_detector: ProgramDetector,
    pub data_detector: DataDetector,
    pub interval: usize,
}

impl CountKey {
    pub fn setting(&self) -> Setting {
        (self.phase, self.input_state, self.basis)
    }
}

/// Coincidence counts keyed by setting, detector pair and interval.
///
/// Counts are stored as reals so efficiency-rescaled tables share the type;
/// simulated tables hold whole numbers. Phases are kept at CSV precision.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    records: BTreeMap<CountKey, f64>,
    /// Nominal success probability of the analysis this table feeds.
    pub success_probability: f64,
    /// Number of photon pairs generated while the table was recorded, when known.
    pub generated_pairs: Option<u64>,
}

impl Default for CountTable {
    fn default() -> Self {
        Self::new()
    }
}

impl CountTable {
    pub fn new() -> Self {
        Self {
            records: BTreeMap::new(),
            success_probability: crate::gate::POSTSELECTION_PROBABILITY,
            generated_pairs: None,
        }
    }

    pub fn insert(&mut self, mut key: CountKey, count: f64) {
        key.phase = table_phase(key.phase);
        self.records.insert(key, count);
    }

    pub fn get(&self, key: &CountKey) -> Option<f64> {
        let mut key = *key;
        key.phase = table_phase(key.phase);
        self.records.get(&key).copied()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CountKey, &f64)> {
        self.records.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&CountKey, &mut f64)> {
        self.records.iter_mut()
    }

    pub fn total(&self) -> f64 {
        self.records.values().sum()
    }

    /// Distinct phases in ascending order.
    pub fn phases(&self) -> Vec<ProgramPhase> {
        self.records.keys().map(|k| k.phase).collect::<BTreeSet<_>>().into_iter().collect()
    }

    pub fn intervals(&self) -> BTreeSet<usize> {
        self.records.keys().map(|k| k.interval).collect()
    }

    pub fn settings(&self) -> BTreeSet<Setting> {
        self.records.keys().map(|k| k.setting()).collect()
    }

    /// Counts of one setting summed over intervals, indexed `[program][data]`.
    pub fn setting_counts(&self, setting: Setting) -> Option<[[f64; 2]; 2]> {
        let phase = table_phase(setting.0);
        let lo = CountKey {
            phase,
            input_state: setting.1,
            basis: setting.2,
            program_detector: ProgramDetector::Dp0,
            data_detector: DataDetector::Dd0,
            interval: 0,
        };
        let hi = CountKey {
            program_detector: ProgramDetector::Dp1,
            data_detector: DataDetector::Dd1,
            interval: usize::MAX,
            ..lo
        };
        let mut out = [[0.0; 2]; 2];
        let mut any = false;
        for (k, v) in self.records.range(lo..=hi) {
            out[k.program_detector.index()][k.data_detector.index()] += v;
            any = true;
        }
        any.then_some(out)
    }

    /// Sub-table for a single phase.
    pub fn for_phase(&self, phi: ProgramPhase) -> CountTable {
        let phase = table_phase(phi);
        CountTable {
            records: self.records.iter().filter(|(k, _)| k.phase == phase).map(|(k, v)| (*k, *v)).collect(),
            success_probability: self.success_probability,
            generated_pairs: None,
        }
    }

    /// Records absent from the full rectangle spanned by the given axes.
    pub fn missing_keys(
        &self,
        phases: &[ProgramPhase],
        input_states: &[InputState],
        bases: &[Basis],
        intervals: &[usize],
    ) -> Vec<CountKey> {
        let mut missing = Vec::new();
        for &phase in phases {
            for &input_state in input_states {
                for &basis in bases {
                    for program_detector in ProgramDetector::ALL {
                        for data_detector in DataDetector::ALL {
                            for &interval in intervals {
                                let key = CountKey {
                                    phase: table_phase(phase),
                                    input_state,
                                    basis,
                                    program_detector,
                                    data_detector,
                                    interval,
                                };
                                if !self.records.contains_key(&key) {
                                    missing.push(key);
                                }
                            }
                        }
                    }
                }
            }
        }
        missing
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_HEADER).map_err(csv_err)?;
        for (k, v) in &self.records {
            w.write_record([
                format_phase(k.phase),
                k.input_state.label().to_string(),
                k.basis.label().to_string(),
                k.program_detector.label().to_string(),
                k.data_detector.label().to_string(),
                k.interval.to_string(),
                format_count(*v),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Parses the CSV form. Rows may come in any order; duplicate keys and
    /// negative or non-finite counts are rejected.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = r.headers().map_err(csv_err)?.clone();
        if header.iter().ne(CSV_HEADER.iter().copied()) {
            return Err(Error::Format(format!(
                "unexpected header `{}`, expected `{}`",
                header.iter().collect::<Vec<_>>().join(","),
                CSV_HEADER.join(",")
            )));
        }
        let mut table = CountTable::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let row = line + 2;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let phase: f64 =
                field(0).parse().map_err(|_| Error::Format(format!("row {row}: bad phase `{}`", field(0))))?;
            let interval: usize =
                field(5).parse().map_err(|_| Error::Format(format!("row {row}: bad interval `{}`", field(5))))?;
            let count: f64 =
                field(6).parse().map_err(|_| Error::Format(format!("row {row}: bad count `{}`", field(6))))?;
            if !count.is_finite() || count < 0.0 || !phase.is_finite() {
                return Err(Error::Format(format!("row {row}: count must be finite and non-negative")));
            }
            let key = CountKey {
                phase: table_phase(ProgramPhase::new(phase)),
                input_state: field(1).parse()?,
                basis: field(2).parse()?,
                program_detector: field(3).parse()?,
                data_detector: field(4).parse()?,
                interval,
            };
            if table.records.insert(key, count).is_some() {
                return Err(Error::Format(format!("row {row}: duplicate record")));
            }
        }
        Ok(table)
    }
}

fn format_count(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}
