//! Fixed-point maximum-likelihood iteration `ρ ← N[R ρ R]`.
//!
//! `R = Σ_k (n_k / p_k) E_k` with `p_k = Tr[ρ E_k]` for the iterate held at
//! its target trace. When a full step lowers the likelihood the step is
//! diluted to `(I + εR̂) ρ (I + εR̂)` with `R̂` scaled to equal the identity at
//! the fixed point, halving `ε` until the likelihood no longer drops.

use super::{ChoiMatrix, TomographySetting, CHOI_TRACE};
use crate::error::{Error, Result};
use crate::gate::Basis;
use crate::linalg::CMatrix;

/// Floor for model probabilities inside `R`.
const PROB_FLOOR: f64 = 1e-12;
/// Numerical slack when comparing successive likelihoods.
const LIKELIHOOD_SLACK: f64 = 1e-14;
const MAX_DILUTIONS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct MlOptions {
    /// Stop once the max-norm change of the iterate falls below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Keep the per-event log-likelihood after every iteration.
    pub record_trace: bool,
}

impl Default for MlOptions {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: 100_000, record_trace: false }
    }
}

#[derive(Debug, Clone)]
pub struct ProcessEstimate {
    pub chi: ChoiMatrix,
    pub iterations: usize,
    /// `Σ n_k log p_k` at the estimate.
    pub log_likelihood: f64,
    pub converged: bool,
    /// Per-event log-likelihood, starting with the initial point.
    pub likelihood_trace: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct StateEstimate {
    pub rho: CMatrix,
    pub iterations: usize,
    pub log_likelihood: f64,
    pub converged: bool,
    pub likelihood_trace: Vec<f64>,
}

struct Outcome {
    op: CMatrix,
    /// Relative frequency `n_k / Σn`.
    freq: f64,
}

struct FixedPoint {
    rho: CMatrix,
    iterations: usize,
    mean_log_likelihood: f64,
    converged: bool,
    trace: Vec<f64>,
}

/// Rank of a set of Hermitian operators as real vectors.
fn operator_rank(ops: &[CMatrix]) -> usize {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for op in ops {
        let mut v: Vec<f64> = op.entries().iter().flat_map(|z| [z.re, z.im]).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    basis.len()
}

fn mean_log_likelihood(rho: &CMatrix, outcomes: &[Outcome]) -> f64 {
    outcomes.iter().filter(|o| o.freq > 0.0).map(|o| o.freq * rho.trace_product(&o.op).re.max(PROB_FLOOR).ln()).sum()
}

fn normalize(m: &CMatrix, trace: f64) -> CMatrix {
    let mut out = m.scale_real(trace / m.trace().re);
    // R ρ R is Hermitian in exact arithmetic; drop the roundoff
    let n = out.rows();
    for i in 0..n {
        out[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let avg = (out[(i, j)] + out[(j, i)].conj()) * 0.5;
            out[(i, j)] = avg;
            out[(j, i)] = avg.conj();
        }
    }
    out
}

fn fixed_point(outcomes: &[Outcome], dim: usize, trace: f64, opts: &MlOptions) -> FixedPoint {
    let mut rho = CMatrix::identity(dim).scale_real(trace / dim as f64);
    let mut ll = mean_log_likelihood(&rho, outcomes);
    let mut history = if opts.record_trace { vec![ll] } else { Vec::new() };
    let identity = CMatrix::identity(dim);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        iterations += 1;
        // at the fixed point R̂ ρ = ρ
        let mut r_hat = CMatrix::zeros(dim, dim);
        for o in outcomes.iter().filter(|o| o.freq > 0.0) {
            let p = rho.trace_product(&o.op).re.max(PROB_FLOOR);
            r_hat = &r_hat + &o.op.scale_real(o.freq * trace / p);
        }

        let mut next = normalize(&(&(&r_hat * &rho) * &r_hat), trace);
        let mut next_ll = mean_log_likelihood(&next, outcomes);
        if next_ll < ll - LIKELIHOOD_SLACK {
            let mut eps = 1.0;
            let mut accepted = false;
            for _ in 0..MAX_DILUTIONS {
                let step = &identity + &r_hat.scale_real(eps);
                let cand = normalize(&(&(&step * &rho) * &step), trace);
                let cand_ll = mean_log_likelihood(&cand, outcomes);
                if cand_ll >= ll - LIKELIHOOD_SLACK {
                    next = cand;
                    next_ll = cand_ll;
                    accepted = true;
                    break;
                }
                eps *= 0.5;
            }
            if !accepted {
                // no ascent direction left at working precision
                converged = true;
                break;
            }
        }

        let update = next.max_abs_diff(&rho);
        rho = next;
        ll = next_ll;
        if opts.record_trace {
            history.push(ll);
        }
        if update < opts.tolerance {
            converged = true;
            break;
        }
    }

    FixedPoint { rho, iterations, mean_log_likelihood: ll, converged, trace: history }
}

fn total_counts(counts: impl Iterator<Item = f64>) -> Result<f64> {
    let total: f64 = counts.sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::NoCounts);
    }
    Ok(total)
}

pub fn ml_reconstruct_process(settings: &[TomographySetting]) -> Result<ProcessEstimate> {
    ml_reconstruct_process_with(settings, &MlOptions::default())
}

/// Maximum-likelihood Choi matrix with `Tr χ = 2`, starting from `I/2`.
pub fn ml_reconstruct_process_with(settings: &[TomographySetting], opts: &MlOptions) -> Result<ProcessEstimate> {
    let ops: Vec<CMatrix> = settings.iter().map(|s| s.effective_operator()).collect();
    let rank = operator_rank(&ops);
    if rank < 16 {
        return Err(Error::RankDeficient { rank, required: 16 });
    }
    let total = total_counts(settings.iter().map(|s| s.count()))?;
    let outcomes: Vec<Outcome> =
        ops.into_iter().zip(settings).map(|(op, s)| Outcome { op, freq: s.count() / total }).collect();

    let fp = fixed_point(&outcomes, 4, CHOI_TRACE, opts);
    Ok(ProcessEstimate {
        chi: ChoiMatrix::from_trusted(fp.rho),
        iterations: fp.iterations,
        log_likelihood: total * fp.mean_log_likelihood,
        converged: fp.converged,
        likelihood_trace: fp.trace,
    })
}

pub fn ml_reconstruct_state(counts: &[[f64; 2]; 3]) -> Result<StateEstimate> {
    ml_reconstruct_state_with(counts, &MlOptions::default())
}

/// Maximum-likelihood density matrix from outcome counts in the Z, X and Y
/// bases (`Basis::ALL` order).
pub fn ml_reconstruct_state_with(counts: &[[f64; 2]; 3], opts: &MlOptions) -> Result<StateEstimate> {
    if counts.iter().flatten().any(|n| !n.is_finite() || *n < 0.0) {
        return Err(Error::Format("counts must be finite and non-negative".into()));
    }
    let total = total_counts(counts.iter().flatten().copied())?;
    let mut outcomes = Vec::with_capacity(6);
    for (basis, row) in Basis::ALL.into_iter().zip(counts) {
        for (d, &n) in row.iter().enumerate() {
            // three complete bases sum to 3·I; rescale to a unit POVM
            outcomes.push(Outcome { op: basis.projector(d).scale_real(1.0 / 3.0), freq: n / total });
        }
    }
    let fp = fixed_point(&outcomes, 2, 1.0, opts);
    Ok(StateEstimate {
        rho: fp.rho,
        iterations: fp.iterations,
        log_likelihood: total * fp.mean_log_likelihood,
        converged: fp.converged,
        likelihood_trace: fp.trace,
    })
}
