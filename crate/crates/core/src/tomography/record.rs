//! Plain-text files for reconstructed Choi and density matrices.
//!
//! ```text
//! kind choi
//! phase 1.57079632679000e0
//! feed_forward true
//! success_probability 0.5
//! iterations 812
//! log_likelihood -1.23456789012345e5
//! converged true
//! dimension 4
//! 1.00000000000000e0 0.00000000000000e0
//! ...
//! ```
//!
//! State files carry an extra `input_state` line. Matrix entries are
//! row-major `re im` pairs with 15 significant digits.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gate::{InputState, ProgramPhase};
use crate::linalg::{c, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    Choi,
    State,
}

impl RecordKind {
    fn label(self) -> &'static str {
        match self {
            RecordKind::Choi => "choi",
            RecordKind::State => "state",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRecord {
    pub kind: RecordKind,
    pub phase: ProgramPhase,
    pub input_state: Option<InputState>,
    pub feed_forward: bool,
    pub success_probability: f64,
    pub iterations: usize,
    pub log_likelihood: f64,
    pub converged: bool,
    pub matrix: CMatrix,
}

fn sci(x: f64) -> String {
    format!("{x:.14e}")
}

impl MatrixRecord {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "kind {}", self.kind.label()).unwrap();
        writeln!(s, "phase {}", sci(self.phase.radians())).unwrap();
        if let Some(state) = self.input_state {
            writeln!(s, "input_state {state}").unwrap();
        }
        writeln!(s, "feed_forward {}", self.feed_forward).unwrap();
        writeln!(s, "success_probability {}", self.success_probability).unwrap();
        writeln!(s, "iterations {}", self.iterations).unwrap();
        writeln!(s, "log_likelihood {}", sci(self.log_likelihood)).unwrap();
        writeln!(s, "converged {}", self.converged).unwrap();
        writeln!(s, "dimension {}", self.matrix.rows()).unwrap();
        for z in self.matrix.entries() {
            writeln!(s, "{} {}", sci(z.re), sci(z.im)).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let mut header = std::collections::BTreeMap::new();
        let mut dimension = None;
        for line in lines.by_ref() {
            let (key, value) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| Error::Format(format!("malformed header line `{line}`")))?;
            let value = value.trim();
            if key == "dimension" {
                dimension = Some(parse::<usize>("dimension", value)?);
                break;
            }
            if header.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::Format(format!("duplicate header key `{key}`")));
            }
        }
        let dim = dimension.ok_or_else(|| Error::Format("missing `dimension` line".into()))?;
        let field = |k: &str| -> Result<&str> {
            header.get(k).map(String::as_str).ok_or_else(|| Error::Format(format!("missing `{k}` line")))
        };

        let kind = match field("kind")? {
            "choi" => RecordKind::Choi,
            "state" => RecordKind::State,
            other => return Err(Error::Format(format!("unknown record kind `{other}`"))),
        };
        let expected_dim = if kind == RecordKind::Choi { 4 } else { 2 };
        if dim != expected_dim {
            return Err(Error::Format(format!("{} record must have dimension {expected_dim}", kind.label())));
        }
        let input_state = match header.get("input_state") {
            Some(s) => Some(s.parse::<InputState>()?),
            None if kind == RecordKind::State => return Err(Error::Format("missing `input_state` line".into())),
            None => None,
        };

        let mut entries = Vec::with_capacity(dim * dim);
        for line in lines {
            let mut parts = line.split_whitespace();
            let (Some(re), Some(im), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Format(format!("expected `re im` pair, got `{line}`")));
            };
            entries.push(c(parse("entry", re)?, parse("entry", im)?));
        }
        if entries.len() != dim * dim {
            return Err(Error::Format(format!("expected {} entries, found {}", dim * dim, entries.len())));
        }

        Ok(Self {
            kind,
            phase: ProgramPhase::new(parse("phase", field("phase")?)?),
            input_state,
            feed_forward: parse("feed_forward", field("feed_forward")?)?,
            success_probability: parse("success_probability", field("success_probability")?)?,
            iterations: parse("iterations", field("iterations")?)?,
            log_likelihood: parse("log_likelihood", field("log_likelihood")?)?,
            converged: parse("converged", field("converged")?)?,
            matrix: CMatrix::from_vec(dim, dim, entries)?,
        })
    }
}

fn parse<T: FromStr>(what: &str, s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Format(format!("bad {what} `{s}`")))
}
