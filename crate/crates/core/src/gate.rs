//! Noiseless physics of the programmable phase gate.
//!
//! The data qubit `α|0⟩ + β|1⟩` and the program qubit `(|0⟩ + e^{iφ}|1⟩)/√2`
//! meet in the rail-exchange block. Keeping only events with one photon in
//! each output port (probability 1/2) leaves the joint state
//! `α|00⟩ + βe^{iφ}|11⟩` over `|data⟩ ⊗ |program⟩`. Measuring the program
//! qubit in `{|+⟩, |−⟩}` leaves the data qubit in `α|0⟩ ± βe^{iφ}|1⟩`; the
//! `|−⟩` branch is repaired by a π phase shift on the data qubit.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, C64};

/// Probability that one photon leaves through each output port.
pub const POSTSELECTION_PROBABILITY: f64 = 0.5;

/// Below this an outcome is treated as impossible.
const IMPOSSIBLE_BRANCH: f64 = 1e-15;

const NORM_TOL: f64 = 1e-12;

/// Normalized pure state `α|0⟩ + β|1⟩` of a dual-rail qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureQubit {
    alpha: C64,
    beta: C64,
}

impl PureQubit {
    /// Accepts amplitudes that are already normalized to within 1e-12.
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidConfig {
                field: "amplitudes".into(),
                reason: format!("|alpha|^2 + |beta|^2 = {norm}, expected 1"),
            });
        }
        Ok(Self { alpha, beta })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(alpha: C64, beta: C64) -> Result<Self> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm < IMPOSSIBLE_BRANCH {
            return Err(Error::ImpossibleBranch(norm * norm));
        }
        Ok(Self { alpha: alpha / norm, beta: beta / norm })
    }

    pub fn zero() -> Self {
        Self { alpha: c(1.0, 0.0), beta: c(0.0, 0.0) }
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn beta(&self) -> C64 {
        self.beta
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        [self.alpha, self.beta]
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &PureQubit) -> C64 {
        self.alpha.conj() * other.alpha + self.beta.conj() * other.beta
    }

    /// `|⟨self|other⟩|²`
    pub fn overlap(&self, other: &PureQubit) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// True when the two states differ by at most a global phase.
    pub fn same_ray(&self, other: &PureQubit, tol: f64) -> bool {
        (1.0 - self.inner(other).norm()).abs() <= tol
    }

    pub fn density_matrix(&self) -> CMatrix {
        CMatrix::projector(&self.amplitudes())
    }

    /// Applies a 2×2 unitary.
    pub fn evolve(&self, u: &CMatrix) -> PureQubit {
        let out = u.apply(&self.amplitudes());
        PureQubit { alpha: out[0], beta: out[1] }
    }
}

/// Program phase φ, canonicalized to `[0, 2π)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct ProgramPhase(f64);

impl ProgramPhase {
    pub fn new(phi: f64) -> Self {
        let mut r = phi.rem_euclid(TAU);
        // rem_euclid can round up to exactly 2π for tiny negative inputs
        if r >= TAU {
            r = 0.0;
        }
        // fold -0.0 into 0.0 so the total order below matches equality
        Self(r + 0.0)
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// `e^{iφ}`
    pub fn phasor(self) -> C64 {
        C64::from_polar(1.0, self.0)
    }
}

impl PartialEq for ProgramPhase {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0).is_eq()
    }
}

impl Eq for ProgramPhase {}

impl PartialOrd for ProgramPhase {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ProgramPhase {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl From<f64> for ProgramPhase {
    fn from(phi: f64) -> Self {
        Self::new(phi)
    }
}

impl From<ProgramPhase> for f64 {
    fn from(p: ProgramPhase) -> f64 {
        p.0
    }
}

/// Result of the program-qubit measurement. `Plus` fires detector D_p0,
/// `Minus` fires D_p1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProgramOutcome {
    Plus,
    Minus,
}

impl ProgramOutcome {
    pub const ALL: [ProgramOutcome; 2] = [ProgramOutcome::Plus, ProgramOutcome::Minus];

    fn sign(self) -> f64 {
        match self {
            ProgramOutcome::Plus => 1.0,
            ProgramOutcome::Minus => -1.0,
        }
    }
}

/// Two-qubit state over `|data⟩ ⊗ |program⟩`, ordered `|00⟩, |01⟩, |10⟩, |11⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointState {
    amplitudes: [C64; 4],
}

impl JointState {
    pub fn new(amplitudes: [C64; 4]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidConfig {
                field: "amplitudes".into(),
                reason: format!("joint state norm {norm}, expected 1"),
            });
        }
        Ok(Self { amplitudes })
    }

    pub fn amplitudes(&self) -> &[C64; 4] {
        &self.amplitudes
    }
}

/// The six preparations used for tomography.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InputState {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "+i")]
    PlusI,
    #[serde(rename = "-i")]
    MinusI,
}

impl InputState {
    /// Fixed tomography order `|0⟩, |1⟩, |+⟩, |−⟩, |+i⟩, |−i⟩`.
    pub const ALL: [InputState; 6] =
        [InputState::Zero, InputState::One, InputState::Plus, InputState::Minus, InputState::PlusI, InputState::MinusI];

    pub fn label(self) -> &'static str {
        match self {
            InputState::Zero => "0",
            InputState::One => "1",
            InputState::Plus => "+",
            InputState::Minus => "-",
            InputState::PlusI => "+i",
            InputState::MinusI => "-i",
        }
    }

    /// File-name safe label.
    pub fn slug(self) -> &'static str {
        match self {
            InputState::Zero => "0",
            InputState::One => "1",
            InputState::Plus => "p",
            InputState::Minus => "m",
            InputState::PlusI => "pi",
            InputState::MinusI => "mi",
        }
    }

    pub fn ket(self) -> PureQubit {
        let s = FRAC_1_SQRT_2;
        let (alpha, beta) = match self {
            InputState::Zero => (c(1.0, 0.0), c(0.0, 0.0)),
            InputState::One => (c(0.0, 0.0), c(1.0, 0.0)),
            InputState::Plus => (c(s, 0.0), c(s, 0.0)),
            InputState::Minus => (c(s, 0.0), c(-s, 0.0)),
            InputState::PlusI => (c(s, 0.0), c(0.0, s)),
            InputState::MinusI => (c(s, 0.0), c(0.0, -s)),
        };
        PureQubit { alpha, beta }
    }

    pub fn index(self) -> usize {
        InputState::ALL.iter().position(|&s| s == self).unwrap()
    }
}

impl fmt::Display for InputState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for InputState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InputState::ALL
            .into_iter()
            .find(|st| st.label() == s.trim())
            .ok_or_else(|| Error::Format(format!("unknown input state label `{s}`")))
    }
}

/// Data-qubit measurement basis. Outcome 0 (detector D_d0) is the first
/// eigenvector: `|0⟩`, `|+⟩` or `|+i⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
    Y,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::Z, Basis::X, Basis::Y];

    /// The two basis kets, indexed by data-detector outcome.
    pub fn kets(self) -> [PureQubit; 2] {
        match self {
            Basis::Z => [InputState::Zero.ket(), InputState::One.ket()],
            Basis::X => [InputState::Plus.ket(), InputState::Minus.ket()],
            Basis::Y => [InputState::PlusI.ket(), InputState::MinusI.ket()],
        }
    }

    pub fn projector(self, outcome: usize) -> CMatrix {
        self.kets()[outcome].density_matrix()
    }

    pub fn label(self) -> &'static str {
        match self {
            Basis::Z => "Z",
            Basis::X => "X",
            Basis::Y => "Y",
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "Z" => Ok(Basis::Z),
            "X" => Ok(Basis::X),
            "Y" => Ok(Basis::Y),
            other => Err(Error::Format(format!("unknown basis `{other}`"))),
        }
    }
}

/// Program qubit `(|0⟩ + e^{iφ}|1⟩)/√2`.
pub fn prepare_program(phi: ProgramPhase) -> PureQubit {
    PureQubit { alpha: c(FRAC_1_SQRT_2, 0.0), beta: phi.phasor() * FRAC_1_SQRT_2 }
}

/// `U(φ) = |0⟩⟨0| + e^{iφ}|1⟩⟨1|`
pub fn gate_unitary(phi: ProgramPhase) -> CMatrix {
    CMatrix::from_diag(&[c(1.0, 0.0), phi.phasor()])
}

pub fn ideal_output(psi_in: &PureQubit, phi: ProgramPhase) -> PureQubit {
    PureQubit { alpha: psi_in.alpha, beta: phi.phasor() * psi_in.beta }
}

/// Joint data/program state after post-selection, with the post-selection
/// probability returned alongside.
pub fn conditional_joint_state(psi_in: &PureQubit, phi: ProgramPhase) -> (JointState, f64) {
    let zero = c(0.0, 0.0);
    let state = JointState { amplitudes: [psi_in.alpha, zero, zero, psi_in.beta * phi.phasor()] };
    (state, POSTSELECTION_PROBABILITY)
}

/// Projects the program qubit onto `|±⟩` and returns the collapsed data
/// state with the outcome probability.
pub fn measure_program(joint: &JointState, outcome: ProgramOutcome) -> Result<(PureQubit, f64)> {
    let a = &joint.amplitudes;
    let sign = outcome.sign();
    // ⟨±|_P applied to each data component
    let d0 = (a[0] + a[1] * sign) * FRAC_1_SQRT_2;
    let d1 = (a[2] + a[3] * sign) * FRAC_1_SQRT_2;
    let prob = d0.norm_sqr() + d1.norm_sqr();
    if prob < IMPOSSIBLE_BRANCH {
        return Err(Error::ImpossibleBranch(prob));
    }
    let norm = prob.sqrt();
    Ok((PureQubit { alpha: d0 / norm, beta: d1 / norm }, prob))
}

/// Applies the π phase shift on the `Minus` branch; identity otherwise.
pub fn feed_forward_correct(state: &PureQubit, outcome: ProgramOutcome) -> PureQubit {
    match outcome {
        ProgramOutcome::Plus => *state,
        ProgramOutcome::Minus => PureQubit { alpha: state.alpha, beta: -state.beta },
    }
}
