//! Decay-time extraction and the disentanglement-versus-decoherence audit.
//!
//! Every decaying quantity produced by these channels is a single
//! exponential, so a log-linear least-squares fit recovers its e-folding
//! time exactly up to rounding. Quantities whose relative variation over the
//! grid stays below a flatness threshold are reported as constant, with an
//! infinite time.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channels::{evolve, ChannelKind, NoiseScenario};
use crate::entanglement::concurrence;
use crate::error::{Error, Result};
use crate::states::{reduced_all, DensityMatrix, ClosedFormScenario, StateClass, StateSpec};
use crate::tensor::{label, Qubit};

pub const DEFAULT_FLAT_THRESHOLD: f64 = 1e-9;
pub const DEFAULT_SAMPLES: usize = 64;
pub const MIN_SAMPLES: usize = 8;

/// Values at or below this are left out of the log-linear fit.
const USABLE_FLOOR: f64 = 1e-13;
/// Off-diagonal entries smaller than this at t = 0 are not tracked.
const COHERENCE_FLOOR: f64 = 1e-13;
/// Relative slack when comparing two fitted times for the audit.
pub const AUDIT_REL_TOL: f64 = 1e-6;

/// Sampled values of one quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidTrajectory(format!("{} times but {} values", times.len(), values.len())));
        }
        if !times.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidTrajectory("times must be strictly increasing".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidTrajectory(format!("value {v} is not a finite nonnegative number")));
        }
        Ok(Trajectory { times, values })
    }

    /// Samples `f` on `grid`.
    pub fn sample(grid: &TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let times = grid.times();
        let values = times.iter().map(|&t| f(t)).collect();
        Trajectory::new(times, values)
    }
}

/// Uniform sampling of `[0, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_max: f64,
    pub n_samples: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, n_samples: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidTrajectory(format!("t_max must be positive, got {t_max}")));
        }
        if n_samples < 2 {
            return Err(Error::TooFewSamples { usable: n_samples, required: 2 });
        }
        Ok(TimeGrid { t_max, n_samples })
    }

    /// 64 samples on `[0, 3/Γ_min]`, or `[0, 1]` for a noiseless scenario.
    pub fn default_for(scenario: &NoiseScenario) -> Self {
        let t_max = scenario.min_rate().map_or(1.0, |r| 3.0 / r);
        TimeGrid { t_max, n_samples: DEFAULT_SAMPLES }
    }

    pub fn times(&self) -> Vec<f64> {
        let step = self.t_max / (self.n_samples - 1) as f64;
        (0..self.n_samples).map(|k| k as f64 * step).collect()
    }
}

/// Outcome of fitting `value(t) ≈ amplitude · exp(−t / tau)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// e-folding time; infinite when `is_constant`.
    pub tau: f64,
    pub amplitude: f64,
    /// RMS of the log-linear residuals, or the relative variation when
    /// constant.
    pub residual: f64,
    pub is_constant: bool,
    /// Set when the data increases somewhere along the grid.
    pub non_monotone: bool,
}

impl FitResult {
    pub fn decays(&self) -> bool {
        !self.is_constant && self.tau.is_finite()
    }
}

/// Log-linear least-squares fit of an exponential decay.
pub fn fit_exponential(traj: &Trajectory, flat_threshold: f64) -> Result<FitResult> {
    let n = traj.values.len();
    if n < MIN_SAMPLES {
        return Err(Error::TooFewSamples { usable: n, required: MIN_SAMPLES });
    }
    let max = traj.values.iter().copied().fold(0.0, f64::max);
    let min = traj.values.iter().copied().fold(f64::INFINITY, f64::min);
    let non_monotone = traj.values.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-9) + 1e-15);

    let variation = if max > 0.0 { (max - min) / max } else { 0.0 };
    if variation < flat_threshold {
        let mean = traj.values.iter().sum::<f64>() / n as f64;
        return Ok(FitResult { tau: f64::INFINITY, amplitude: mean, residual: variation, is_constant: true, non_monotone });
    }

    let points: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(&traj.values)
        .filter(|(_, &v)| v > USABLE_FLOOR)
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    if points.len() < 2 {
        return Err(Error::TooFewSamples { usable: points.len(), required: 2 });
    }
    let m = points.len() as f64;
    let mean_t = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_t;
    let residual = (points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / m).sqrt();
    let tau = if slope < 0.0 { -1.0 / slope } else { f64::INFINITY };
    Ok(FitResult { tau, amplitude: intercept.exp(), residual, is_constant: false, non_monotone: non_monotone || slope >= 0.0 })
}

/// Decay rate `r` with `|ρ_ij(t)| = |ρ_ij(0)| e^{−r t}` implied by the γ
/// exponents each channel attaches to the coherence between basis states
/// `i` and `j`.
///
/// Local fields contribute `γ` when the two states differ on the qubit.
/// Collective fields contribute `γ⁴` between the two fully aligned states,
/// `γ` between an aligned and a mixed one, and nothing between two mixed
/// ones.
pub fn predicted_decay_rate(scenario: &NoiseScenario, i: usize, j: usize) -> f64 {
    let n = scenario.register_size;
    let collective = |u: usize, v: usize, ends: [usize; 2]| -> f64 {
        let (eu, ev) = (ends.contains(&u), ends.contains(&v));
        match (u == v, eu, ev) {
            (true, _, _) => 0.0,
            (false, true, true) => 4.0,
            (false, false, false) => 0.0,
            _ => 1.0,
        }
    };
    scenario
        .channels
        .iter()
        .map(|ch| {
            let exponent = match ch.kind {
                ChannelKind::Local(q) => {
                    let mask = q.mask(n);
                    if (i & mask) != (j & mask) {
                        1.0
                    } else {
                        0.0
                    }
                }
                ChannelKind::PairCollective(a, b) => {
                    let (hi, lo) = (a.min(b).mask(n), a.max(b).mask(n));
                    let idx = |m: usize| (usize::from(m & hi != 0) << 1) | usize::from(m & lo != 0);
                    collective(idx(i), idx(j), [0, 3])
                }
                ChannelKind::TripleCollective => collective(i, j, [0, 7]),
            };
            exponent * ch.rate / 2.0
        })
        .sum()
}

/// Fit of one off-diagonal entry `(row, col)` (0-based) of the state on
/// `subsystem`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceFit {
    pub subsystem: String,
    pub row: usize,
    pub col: usize,
    pub fit: FitResult,
    /// From [`predicted_decay_rate`]; only for full-register entries.
    pub predicted_tau: Option<f64>,
}

/// Fits of one pair's concurrence in both conventions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceFit {
    pub pair: String,
    pub c: FitResult,
    pub c2: FitResult,
}

/// Which value of a concurrence-based time is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    /// e-folding of an off-diagonal magnitude.
    Element,
    /// e-folding of C.
    C,
    /// e-folding of C².
    C2,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Element => "element",
            Convention::C => "C",
            Convention::C2 => "C^2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Only,
    Slow,
    Fast,
}

/// What a tabulated time refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TauKind {
    /// Decoherence of the `qubits`-qubit (reduced) states.
    Decoherence { qubits: usize, branch: Branch },
    Disentanglement,
}

impl fmt::Display for TauKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauKind::Decoherence { qubits, branch: Branch::Only } => write!(f, "{qubits}-dec"),
            TauKind::Decoherence { qubits, branch: Branch::Slow } => write!(f, "{qubits}-dec (slow)"),
            TauKind::Decoherence { qubits, branch: Branch::Fast } => write!(f, "{qubits}-dec (fast)"),
            TauKind::Disentanglement => write!(f, "dis"),
        }
    }
}

/// A timescale as tabulated in closed form, with its rate symbols bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedTau {
    pub kind: TauKind,
    pub convention: Convention,
    pub expression: String,
    pub value: f64,
}

fn tau(kind: TauKind, convention: Convention, expression: &str, value: f64) -> TabulatedTau {
    TabulatedTau { kind, convention, expression: expression.to_string(), value }
}

/// Closed-form timescales known for a `(class, scenario)` pair, with their
/// expressions. Two entries are known not to equal the e-folding time of the
/// matrices they describe: the single-qubit time `1/Γ` of the two-qubit
/// classes (the entries decay as γ, i.e. `2/Γ`), and the additive form used
/// when a local and a collective field combine (the decay is
/// `exp(−(Γ₁+Γ₂)t/2)`).
pub fn tabulated_tau_table(class: StateClass, scenario: &NoiseScenario) -> Result<Vec<TabulatedTau>> {
    use Branch::*;
    use Convention::*;
    use TauKind::*;
    let unsupported = || Error::UnsupportedPair(format!("{class} state under {}", scenario.id()));
    let closed = ClosedFormScenario::classify(scenario).ok_or_else(unsupported)?;
    let dec = |qubits, branch| Decoherence { qubits, branch };
    let table = match (class, closed) {
        (StateClass::Fragile, ClosedFormScenario::TwoQubitCollective { rate: g }) => vec![
            tau(dec(2, Slow), Element, "2/Γ", 2.0 / g),
            tau(dec(2, Fast), Element, "1/(2Γ)", 0.5 / g),
            tau(dec(1, Only), Element, "1/Γ", 1.0 / g),
            tau(Disentanglement, C, "1/(2Γ)", 0.5 / g),
        ],
        (StateClass::Robust, ClosedFormScenario::TwoQubitCollective { rate: g }) => vec![
            tau(dec(2, Only), Element, "2/Γ", 2.0 / g),
            tau(dec(1, Only), Element, "1/Γ", 1.0 / g),
        ],
        (StateClass::W, ClosedFormScenario::Local { rate: g }) => vec![
            tau(dec(3, Only), Element, "2/Γ₁", 2.0 / g),
            tau(dec(2, Only), Element, "2/Γ₁", 2.0 / g),
            tau(Disentanglement, C2, "1/Γ₁", 1.0 / g),
        ],
        (StateClass::W, ClosedFormScenario::Pair { rate: g }) => vec![
            tau(dec(3, Only), Element, "2/Γ₂", 2.0 / g),
            tau(dec(2, Only), Element, "2/Γ₂", 2.0 / g),
            tau(Disentanglement, C2, "1/Γ₂", 1.0 / g),
        ],
        (StateClass::W, ClosedFormScenario::Triple { .. }) => vec![],
        (StateClass::W, ClosedFormScenario::MultiLocal { rates }) => {
            let g = equal_rates(rates).ok_or_else(unsupported)?;
            vec![
                tau(dec(3, Only), Element, "1/Γ₁", 1.0 / g),
                tau(dec(2, Only), Element, "1/Γ₁", 1.0 / g),
                tau(Disentanglement, C2, "1/(2Γ₁)", 0.5 / g),
            ]
        }
        (StateClass::W, ClosedFormScenario::LocalPair { local: g1, pair: g2 }) => vec![
            tau(dec(3, Only), Element, "2/Γ₁ + 2/Γ₂", 2.0 / g1 + 2.0 / g2),
            tau(dec(2, Only), Element, "2/Γ₁ + 2/Γ₂", 2.0 / g1 + 2.0 / g2),
            tau(Disentanglement, C2, "1/Γ₁ + 1/Γ₂", 1.0 / g1 + 1.0 / g2),
        ],
        (StateClass::Ghz, ClosedFormScenario::Local { rate: g }) => vec![tau(dec(3, Only), Element, "2/Γ₁", 2.0 / g)],
        (StateClass::Ghz, ClosedFormScenario::Pair { rate: g }) => vec![tau(dec(3, Only), Element, "1/(2Γ₂)", 0.5 / g)],
        (StateClass::Ghz, ClosedFormScenario::Triple { rate: g }) => vec![tau(dec(3, Only), Element, "1/(2Γ₃)", 0.5 / g)],
        (StateClass::Ghz, ClosedFormScenario::MultiLocal { rates }) => {
            let g = equal_rates(rates).ok_or_else(unsupported)?;
            vec![tau(dec(3, Only), Element, "(2/3)(1/Γ₁)", 2.0 / (3.0 * g))]
        }
        (StateClass::Ghz, ClosedFormScenario::LocalPair { local: g1, pair: g2 }) => {
            vec![tau(dec(3, Only), Element, "2/Γ₁ + 1/(2Γ₂)", 2.0 / g1 + 0.5 / g2)]
        }
        _ => return Err(unsupported()),
    };
    Ok(table)
}

fn equal_rates(rates: [f64; 3]) -> Option<f64> {
    (rates[0] == rates[1] && rates[1] == rates[2]).then_some(rates[0])
}

/// Per-pair outcome of the audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Vacuous,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Vacuous => "VACUOUS",
            Verdict::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAudit {
    pub pair: String,
    pub tau_dis_c: f64,
    pub tau_dis_c2: f64,
    /// Slowest decaying coherence of the pair state and the full register.
    pub tau_dec_slowest: f64,
    /// `tau_dec_slowest / tau_dis_c`.
    pub margin: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditVerdict {
    pub verdict: Verdict,
    pub pairs: Vec<PairAudit>,
}

/// Everything measured for one state under one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimescaleReport {
    pub scenario_id: String,
    pub class: StateClass,
    pub grid: TimeGrid,
    pub coherence: Vec<CoherenceFit>,
    pub concurrence: Vec<ConcurrenceFit>,
    /// Empty when no closed form is tabulated for this pair.
    pub tabulated_tau: Vec<TabulatedTau>,
    pub audit: AuditVerdict,
}

impl TimescaleReport {
    /// Fitted value matching a tabulated entry, in the entry's own
    /// convention. Returns `None` when nothing of that kind decays.
    pub fn fitted_counterpart(&self, kind: TauKind, convention: Convention) -> Option<f64> {
        let n = self.register_size();
        match kind {
            TauKind::Decoherence { qubits, branch } => {
                let taus: Vec<f64> = self
                    .coherence
                    .iter()
                    .filter(|c| c.subsystem.len() == qubits && c.fit.decays())
                    .map(|c| c.fit.tau)
                    .collect();
                if taus.is_empty() || qubits > n {
                    return None;
                }
                let slow = taus.iter().copied().fold(0.0, f64::max);
                let fast = taus.iter().copied().fold(f64::INFINITY, f64::min);
                Some(if branch == Branch::Fast { fast } else { slow })
            }
            TauKind::Disentanglement => self
                .concurrence
                .iter()
                .map(|c| if convention == Convention::C2 { c.c2 } else { c.c })
                .filter(FitResult::decays)
                .map(|f| f.tau)
                .min_by(f64::total_cmp),
        }
    }

    fn register_size(&self) -> usize {
        self.coherence.iter().map(|c| c.subsystem.len()).max().unwrap_or(2)
    }
}

fn track_entries(rho0: &DensityMatrix) -> Vec<(usize, usize)> {
    let m = rho0.matrix();
    let mut out = Vec::new();
    for i in 0..m.rows() {
        for j in (i + 1)..m.cols() {
            if m[(i, j)].norm() > COHERENCE_FLOOR {
                out.push((i, j));
            }
        }
    }
    out
}

/// Evolves `spec` under `scenario` on `grid`, fits every coherence and
/// concurrence trajectory and runs the audit.
pub fn timescale_report(spec: &StateSpec, scenario: &NoiseScenario, grid: &TimeGrid) -> Result<TimescaleReport> {
    timescale_report_with(spec, scenario, grid, DEFAULT_FLAT_THRESHOLD)
}

pub fn timescale_report_with(
    spec: &StateSpec,
    scenario: &NoiseScenario,
    grid: &TimeGrid,
    flat_threshold: f64,
) -> Result<TimescaleReport> {
    let rho0 = spec.projector()?;
    let times = grid.times();
    let states: Vec<DensityMatrix> = times.iter().map(|&t| evolve(&rho0, scenario, t)).collect::<Result<_>>()?;
    let reduced: Vec<_> = states.iter().map(reduced_all).collect::<Result<_>>()?;
    let full_label = label(rho0.register());

    let mut coherence = Vec::new();
    for (i, j) in track_entries(&rho0) {
        let values = states.iter().map(|s| s.matrix()[(i, j)].norm()).collect();
        let fit = fit_exponential(&Trajectory::new(times.clone(), values)?, flat_threshold)?;
        let rate = predicted_decay_rate(scenario, i, j);
        let predicted_tau = Some(if rate > 0.0 { 1.0 / rate } else { f64::INFINITY });
        coherence.push(CoherenceFit { subsystem: full_label.clone(), row: i, col: j, fit, predicted_tau });
    }
    for (keep, red0) in &reduced[0] {
        for (i, j) in track_entries(red0) {
            let values = reduced.iter().map(|r| r[keep].matrix()[(i, j)].norm()).collect();
            let fit = fit_exponential(&Trajectory::new(times.clone(), values)?, flat_threshold)?;
            coherence.push(CoherenceFit { subsystem: label(keep), row: i, col: j, fit, predicted_tau: None });
        }
    }

    let pairs = pair_states(rho0.register(), &states, &reduced);
    let mut concurrence_fits = Vec::new();
    for (pair, series) in pairs {
        let c: Vec<f64> = series.iter().map(|s| concurrence(s).map(|r| r.value)).collect::<Result<_>>()?;
        let c2: Vec<f64> = c.iter().map(|x| x * x).collect();
        concurrence_fits.push(ConcurrenceFit {
            pair,
            c: fit_exponential(&Trajectory::new(times.clone(), c)?, flat_threshold)?,
            c2: fit_exponential(&Trajectory::new(times.clone(), c2)?, flat_threshold)?,
        });
    }

    let tabulated_tau = if ClosedFormScenario::classify(scenario).is_some() {
        tabulated_tau_table(spec.class(), scenario).unwrap_or_default()
    } else {
        Vec::new()
    };

    let mut report = TimescaleReport {
        scenario_id: scenario.id(),
        class: spec.class(),
        grid: *grid,
        coherence,
        concurrence: concurrence_fits,
        tabulated_tau,
        audit: AuditVerdict { verdict: Verdict::Vacuous, pairs: Vec::new() },
    };
    report.audit = audit_inequality(&report);
    Ok(report)
}

type ReducedSeries = Vec<std::collections::BTreeMap<Vec<Qubit>, DensityMatrix>>;

fn pair_states(register: &[Qubit], states: &[DensityMatrix], reduced: &ReducedSeries) -> Vec<(String, Vec<DensityMatrix>)> {
    if register.len() == 2 {
        return vec![(label(register), states.to_vec())];
    }
    let mut out = Vec::new();
    for keep in reduced[0].keys().filter(|k| k.len() == 2) {
        out.push((label(keep), reduced.iter().map(|r| r[keep].clone()).collect()));
    }
    out
}

/// Checks, pair by pair, that the concurrence e-folding time does not exceed
/// the slowest decaying coherence of the pair state and of the full register.
pub fn audit_inequality(report: &TimescaleReport) -> AuditVerdict {
    let full = report.register_size();
    let any_decaying_element = report.coherence.iter().any(|c| c.fit.decays());
    let mut pairs = Vec::new();
    for cf in report.concurrence.iter().filter(|c| c.c.decays()) {
        let tau_dec_slowest = report
            .coherence
            .iter()
            .filter(|c| c.fit.decays() && (c.subsystem == cf.pair || c.subsystem.len() == full))
            .map(|c| c.fit.tau)
            .fold(0.0, f64::max);
        let tau_dec_slowest = if tau_dec_slowest > 0.0 { tau_dec_slowest } else { f64::INFINITY };
        let ok = cf.c.tau <= tau_dec_slowest * (1.0 + AUDIT_REL_TOL);
        pairs.push(PairAudit {
            pair: cf.pair.clone(),
            tau_dis_c: cf.c.tau,
            tau_dis_c2: cf.c2.tau,
            tau_dec_slowest,
            margin: tau_dec_slowest / cf.c.tau,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        });
    }
    let verdict = if pairs.is_empty() || !any_decaying_element {
        Verdict::Vacuous
    } else if pairs.iter().all(|p| p.verdict == Verdict::Pass) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    AuditVerdict { verdict, pairs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::Channel;

    fn grid() -> TimeGrid {
        TimeGrid::new(3.0, 64).unwrap()
    }

    #[test]
    fn exact_exponential_is_recovered() {
        let traj = Trajectory::sample(&grid(), |t| (-t).exp()).unwrap();
        let fit = fit_exponential(&traj, DEFAULT_FLAT_THRESHOLD).unwrap();
        assert!((fit.tau - 1.0).abs() < 1e-9);
        assert!((fit.amplitude - 1.0).abs() < 1e-9);
        assert!(!fit.is_constant && !fit.non_monotone);
    }

    #[test]
    fn constant_data_is_flagged() {
        let traj = Trajectory::sample(&grid(), |_| 0.5).unwrap();
        let fit = fit_exponential(&traj, DEFAULT_FLAT_THRESHOLD).unwrap();
        assert!(fit.is_constant && fit.tau.is_infinite());
        let zeros = Trajectory::sample(&grid(), |_| 0.0).unwrap();
        assert!(fit_exponential(&zeros, DEFAULT_FLAT_THRESHOLD).unwrap().is_constant);
    }

    #[test]
    fn growing_data_is_flagged() {
        let traj = Trajectory::sample(&grid(), |t| 0.1 + t).unwrap();
        let fit = fit_exponential(&traj, DEFAULT_FLAT_THRESHOLD).unwrap();
        assert!(fit.non_monotone);
    }

    #[test]
    fn short_or_malformed_trajectories_fail() {
        let short = Trajectory::new(vec![0.0, 1.0], vec![1.0, 0.5]).unwrap();
        assert!(matches!(fit_exponential(&short, 1e-9), Err(Error::TooFewSamples { .. })));
        assert!(Trajectory::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(Trajectory::new(vec![0.0, 1.0], vec![1.0, -1.0]).is_err());
        // a value that vanishes right after t = 0 leaves one usable point
        let t: Vec<f64> = (0..8).map(f64::from).collect();
        let mut v = vec![0.0; 8];
        v[0] = 1.0;
        let traj = Trajectory::new(t, v).unwrap();
        assert!(matches!(fit_exponential(&traj, 1e-9), Err(Error::TooFewSamples { usable: 1, .. })));
    }

    #[test]
    fn predicted_rates_follow_gamma_exponents() {
        let s = NoiseScenario::new(2, vec![Channel::pair(Qubit::A, Qubit::B, 1.0)]).unwrap();
        assert_eq!(predicted_decay_rate(&s, 0, 3), 2.0);
        assert_eq!(predicted_decay_rate(&s, 0, 1), 0.5);
        assert_eq!(predicted_decay_rate(&s, 1, 2), 0.0);
        let s = NoiseScenario::new(3, vec![Channel::triple(1.0)]).unwrap();
        assert_eq!(predicted_decay_rate(&s, 0, 7), 2.0);
        assert_eq!(predicted_decay_rate(&s, 1, 4), 0.0);
        let s = NoiseScenario::new(3, vec![Channel::local(Qubit::A, 1.0), Channel::pair(Qubit::B, Qubit::C, 3.0)]).unwrap();
        // |001⟩ vs |100⟩: γ_A · γ_BC
        assert_eq!(predicted_decay_rate(&s, 1, 4), 0.5 + 1.5);
    }

    #[test]
    fn fragile_report_reproduces_tabulated_times() {
        let spec = StateSpec::fragile(0.6.into(), 0.48.into(), 0.64.into());
        let s = NoiseScenario::new(2, vec![Channel::pair(Qubit::A, Qubit::B, 1.0)]).unwrap();
        let r = timescale_report(&spec, &s, &TimeGrid::default_for(&s)).unwrap();
        let slow = r.fitted_counterpart(TauKind::Decoherence { qubits: 2, branch: Branch::Slow }, Convention::Element);
        let fast = r.fitted_counterpart(TauKind::Decoherence { qubits: 2, branch: Branch::Fast }, Convention::Element);
        let dis = r.fitted_counterpart(TauKind::Disentanglement, Convention::C);
        assert!((slow.unwrap() - 2.0).abs() < 1e-9);
        assert!((fast.unwrap() - 0.5).abs() < 1e-9);
        assert!((dis.unwrap() - 0.5).abs() < 1e-9);
        assert_eq!(r.audit.verdict, Verdict::Pass);
        assert!((r.audit.pairs[0].margin - 4.0).abs() < 1e-6);
    }

    #[test]
    fn robust_report_is_vacuous() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let spec = StateSpec::robust(0.0.into(), h.into(), (-h).into());
        let s = NoiseScenario::new(2, vec![Channel::pair(Qubit::A, Qubit::B, 1.0)]).unwrap();
        let r = timescale_report(&spec, &s, &TimeGrid::default_for(&s)).unwrap();
        assert_eq!(r.audit.verdict, Verdict::Vacuous);
        let rho23 = r.coherence.iter().find(|c| c.subsystem == "AB" && (c.row, c.col) == (1, 2)).unwrap();
        assert!(rho23.fit.is_constant);
    }

    #[test]
    fn w_multilocal_passes_with_equality_in_c() {
        let s3 = 1.0 / 3f64.sqrt();
        let spec = StateSpec::w(s3.into(), s3.into(), s3.into());
        let s = NoiseScenario::new(3, Qubit::ALL.iter().map(|&q| Channel::local(q, 1.0)).collect()).unwrap();
        let r = timescale_report(&spec, &s, &TimeGrid::default_for(&s)).unwrap();
        assert_eq!(r.audit.verdict, Verdict::Pass);
        for p in &r.audit.pairs {
            assert!((p.tau_dis_c - 1.0).abs() < 1e-9);
            assert!((p.tau_dis_c2 - 0.5).abs() < 1e-9);
            assert!((p.tau_dec_slowest - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn tau_table_entries() {
        let s = NoiseScenario::new(3, Qubit::ALL.iter().map(|&q| Channel::local(q, 1.5)).collect()).unwrap();
        let t = tabulated_tau_table(StateClass::Ghz, &s).unwrap();
        assert_eq!(t.len(), 1);
        assert!((t[0].value - 2.0 / 4.5).abs() < 1e-15);

        let unequal = NoiseScenario::new(3, vec![
            Channel::local(Qubit::A, 1.0),
            Channel::local(Qubit::B, 2.0),
            Channel::local(Qubit::C, 1.0),
        ])
        .unwrap();
        assert!(tabulated_tau_table(StateClass::W, &unequal).is_err());

        let s = NoiseScenario::new(3, vec![Channel::local(Qubit::A, 2.0)]).unwrap();
        let t = tabulated_tau_table(StateClass::W, &s).unwrap();
        assert_eq!(t[2].kind, TauKind::Disentanglement);
        assert_eq!(t[2].convention, Convention::C2);
        assert_eq!(t[2].value, 0.5);
        assert!(tabulated_tau_table(StateClass::Fragile, &s).is_err());
    }
}
