//! Pure-dephasing channels in operator-sum form.
//!
//! Three noise scales are available: a field acting on one qubit
//! ([`ChannelKind::Local`]), one field shared by two qubits
//! ([`ChannelKind::PairCollective`]) and one field shared by all three
//! ([`ChannelKind::TripleCollective`]). Every decomposition operator is a real
//! diagonal matrix, so all channels commute and leave populations untouched.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::DensityMatrix;
use crate::tensor::{label, CMatrix, Qubit};

/// Completeness deviation accepted by [`apply_kraus`].
pub const COMPLETENESS_REFUSE_TOL: f64 = 1e-9;

/// Rate and elapsed time of one dephasing process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingParams {
    /// Damping rate Γ = 1/T.
    pub rate: f64,
    pub time: f64,
}

impl DephasingParams {
    pub fn new(rate: f64, time: f64) -> Result<Self> {
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::InvalidParams(format!("rate must be finite and >= 0, got {rate}")));
        }
        if !(time.is_finite() && time >= 0.0) {
            return Err(Error::InvalidParams(format!("time must be finite and >= 0, got {time}")));
        }
        Ok(DephasingParams { rate, time })
    }

    /// `γ(t) = exp(-Γ t / 2)`.
    pub fn gamma(&self) -> f64 {
        gamma(self.rate, self.time)
    }
}

/// `γ(t) = exp(-Γ t / 2)`; equals 1 at `t = 0` or when the noise is off.
pub fn gamma(rate: f64, time: f64) -> f64 {
    (-0.5 * rate * time).exp()
}

/// The three ω factors of a collective channel, as functions of γ:
/// `(√(1−γ²), −γ²√(1−γ²), √((1−γ²)(1−γ⁴)))`.
pub fn omega_factors(gamma: f64) -> (f64, f64, f64) {
    let g2 = gamma * gamma;
    let one_minus = (1.0 - g2).max(0.0);
    let w1 = one_minus.sqrt();
    let w2 = -g2 * w1;
    let w3 = (one_minus * (1.0 - g2 * g2).max(0.0)).sqrt();
    (w1, w2, w3)
}

/// Which qubits a dephasing field couples to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChannelKind {
    Local(Qubit),
    PairCollective(Qubit, Qubit),
    TripleCollective,
}

impl ChannelKind {
    /// Pair channel with its qubits put in tensor order.
    pub fn pair(q1: Qubit, q2: Qubit) -> Result<Self> {
        if q1 == q2 {
            return Err(Error::InvalidChannel(format!("pair channel needs two distinct qubits, got {q1}{q2}")));
        }
        Ok(ChannelKind::PairCollective(q1.min(q2), q1.max(q2)))
    }

    /// Qubits the field acts on, in tensor order.
    pub fn support(&self) -> Vec<Qubit> {
        match *self {
            ChannelKind::Local(q) => vec![q],
            ChannelKind::PairCollective(a, b) => {
                let mut v = vec![a, b];
                v.sort();
                v
            }
            ChannelKind::TripleCollective => Qubit::ALL.to_vec(),
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelKind::Local(q) => write!(f, "local({q})"),
            ChannelKind::PairCollective(..) => write!(f, "pair({})", label(&self.support())),
            ChannelKind::TripleCollective => write!(f, "triple(ABC)"),
        }
    }
}

/// One dephasing field with its rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub kind: ChannelKind,
    pub rate: f64,
}

impl Channel {
    pub fn new(kind: ChannelKind, rate: f64) -> Self {
        Channel { kind, rate }
    }

    pub fn local(q: Qubit, rate: f64) -> Self {
        Channel::new(ChannelKind::Local(q), rate)
    }

    /// Panics when `q1 == q2`; use [`ChannelKind::pair`] for fallible input.
    pub fn pair(q1: Qubit, q2: Qubit, rate: f64) -> Self {
        Channel::new(ChannelKind::pair(q1, q2).expect("distinct qubits"), rate)
    }

    pub fn triple(rate: f64) -> Self {
        Channel::new(ChannelKind::TripleCollective, rate)
    }

    /// Decomposition operators of this channel at time `t` on an `n`-qubit
    /// register.
    pub fn kraus(&self, n: usize, t: f64) -> Result<KrausSet> {
        let params = DephasingParams::new(self.rate, t)?;
        match self.kind {
            ChannelKind::Local(q) => build_local_kraus(q, n, params),
            ChannelKind::PairCollective(a, b) => build_pair_collective_kraus(a, b, n, params),
            ChannelKind::TripleCollective => {
                if n != 3 {
                    return Err(Error::InvalidChannel(format!("triple-collective channel needs 3 qubits, register has {n}")));
                }
                build_triple_collective_kraus(params)
            }
        }
    }
}

/// The set of dephasing fields acting on a register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseScenario {
    pub register_size: usize,
    pub channels: Vec<Channel>,
    /// Allows a qubit to sit in the support of more than one channel.
    #[serde(default)]
    pub relaxed: bool,
}

impl NoiseScenario {
    /// Builds and validates a scenario.
    pub fn new(register_size: usize, channels: Vec<Channel>) -> Result<Self> {
        let s = NoiseScenario { register_size, channels, relaxed: false };
        s.validate()?;
        Ok(s)
    }

    /// Like [`NoiseScenario::new`] but lets supports overlap.
    pub fn relaxed(register_size: usize, channels: Vec<Channel>) -> Result<Self> {
        let s = NoiseScenario { register_size, channels, relaxed: true };
        s.validate()?;
        Ok(s)
    }

    pub fn register(&self) -> &'static [Qubit] {
        Qubit::register(self.register_size)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.register_size) {
            return Err(Error::InvalidScenario(format!("register size must be 2 or 3, got {}", self.register_size)));
        }
        let register = self.register();
        let mut seen = BTreeSet::new();
        for ch in &self.channels {
            if !(ch.rate.is_finite() && ch.rate >= 0.0) {
                return Err(Error::InvalidScenario(format!("{} has invalid rate {}", ch.kind, ch.rate)));
            }
            if let ChannelKind::PairCollective(a, b) = ch.kind {
                if a == b {
                    return Err(Error::InvalidChannel(format!("pair channel needs two distinct qubits, got {a}{b}")));
                }
            }
            for q in ch.kind.support() {
                if !register.contains(&q) {
                    return Err(Error::InvalidScenario(format!(
                        "{} acts on qubit {q} outside register {}",
                        ch.kind,
                        label(register)
                    )));
                }
                if !seen.insert(q) && !self.relaxed {
                    return Err(Error::InvalidScenario(format!("qubit {q} is subject to more than one noise field")));
                }
            }
        }
        Ok(())
    }

    /// Smallest positive rate, if any channel is active.
    pub fn min_rate(&self) -> Option<f64> {
        self.channels.iter().map(|c| c.rate).filter(|&r| r > 0.0).min_by(f64::total_cmp)
    }

    /// Short identifier such as `local(A)+pair(BC)`.
    pub fn id(&self) -> String {
        if self.channels.is_empty() {
            return "noiseless".to_string();
        }
        self.channels.iter().map(|c| c.kind.to_string()).collect::<Vec<_>>().join("+")
    }
}

/// Ordered decomposition operators of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    pub operators: Vec<CMatrix>,
}

impl KrausSet {
    pub fn identity(dim: usize) -> Self {
        KrausSet { operators: vec![CMatrix::identity(dim)] }
    }

    pub fn dim(&self) -> usize {
        self.operators.first().map_or(0, |k| k.rows())
    }
}

fn diagonal_op(n: usize, entry: impl Fn(usize) -> f64) -> CMatrix {
    let d: Vec<f64> = (0..1usize << n).map(entry).collect();
    CMatrix::from_real_diag(&d)
}

fn check_qubit(q: Qubit, n: usize) -> Result<()> {
    if !(1..=3).contains(&n) {
        return Err(Error::InvalidChannel(format!("register size must be 1, 2 or 3, got {n}")));
    }
    if q.position() >= n {
        return Err(Error::InvalidChannel(format!("qubit {q} outside a {n}-qubit register")));
    }
    Ok(())
}

/// `diag(1, γ)` and `diag(0, ω)` on qubit `q`, identity elsewhere.
pub fn build_local_kraus(q: Qubit, n: usize, params: DephasingParams) -> Result<KrausSet> {
    check_qubit(q, n)?;
    let g = params.gamma();
    let w = (1.0 - g * g).max(0.0).sqrt();
    let mask = q.mask(n);
    let k1 = diagonal_op(n, |m| if m & mask == 0 { 1.0 } else { g });
    let k2 = diagonal_op(n, |m| if m & mask == 0 { 0.0 } else { w });
    Ok(KrausSet { operators: vec![k1, k2] })
}

/// Collective operators on the pair subspace, patterns `(γ,1,1,γ)`,
/// `(ω₁,0,0,ω₂)` and `(0,0,0,ω₃)`, tensored with identity on the remaining
/// qubit.
pub fn build_pair_collective_kraus(q1: Qubit, q2: Qubit, n: usize, params: DephasingParams) -> Result<KrausSet> {
    check_qubit(q1, n)?;
    check_qubit(q2, n)?;
    if q1 == q2 {
        return Err(Error::InvalidChannel(format!("pair channel needs two distinct qubits, got {q1}{q2}")));
    }
    let (hi, lo) = (q1.min(q2).mask(n), q1.max(q2).mask(n));
    let pair_index = |m: usize| (usize::from(m & hi != 0) << 1) | usize::from(m & lo != 0);
    let g = params.gamma();
    let (w1, w2, w3) = omega_factors(g);
    let patterns = [[g, 1.0, 1.0, g], [w1, 0.0, 0.0, w2], [0.0, 0.0, 0.0, w3]];
    let operators = patterns.iter().map(|p| diagonal_op(n, |m| p[pair_index(m)])).collect();
    Ok(KrausSet { operators })
}

/// Collective operators on all three qubits: `diag(γ,1,…,1,γ)`,
/// `diag(ω₁,0,…,0,ω₂)` and `diag(0,…,0,ω₃)`.
pub fn build_triple_collective_kraus(params: DephasingParams) -> Result<KrausSet> {
    let g = params.gamma();
    let (w1, w2, w3) = omega_factors(g);
    let ends = |first: f64, middle: f64, last: f64| {
        diagonal_op(3, move |m| match m {
            0 => first,
            7 => last,
            _ => middle,
        })
    };
    Ok(KrausSet { operators: vec![ends(g, 1.0, g), ends(w1, 0.0, w2), ends(0.0, 0.0, w3)] })
}

/// Largest entry modulus of `Σ K†K − I`.
pub fn verify_completeness(ks: &KrausSet) -> f64 {
    let dim = ks.dim();
    if dim == 0 {
        return 1.0;
    }
    let mut sum = CMatrix::zeros(dim, dim);
    for k in &ks.operators {
        sum = &sum + &(&k.adjoint() * k);
    }
    (&sum - &CMatrix::identity(dim)).max_abs()
}

/// `Σ K ρ K†`.
pub fn apply_kraus(rho: &DensityMatrix, ks: &KrausSet) -> Result<DensityMatrix> {
    let dim = rho.dim();
    if ks.operators.iter().any(|k| k.rows() != dim || k.cols() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: ks.dim() });
    }
    let deviation = verify_completeness(ks);
    if deviation > COMPLETENESS_REFUSE_TOL {
        return Err(Error::IncompleteKraus { deviation });
    }
    Ok(DensityMatrix::from_evolution(kraus_sum(rho.matrix(), ks), rho.register().to_vec()))
}

fn kraus_sum(rho: &CMatrix, ks: &KrausSet) -> CMatrix {
    let dim = rho.rows();
    let mut out = CMatrix::zeros(dim, dim);
    for k in &ks.operators {
        out = &out + &(&(k * rho) * &k.adjoint());
    }
    out
}

/// `Σ K† ρ K`, the dagger-on-the-left ordering. Identical to
/// [`apply_kraus`] for the real diagonal operators built here.
pub fn apply_kraus_left_adjoint(rho: &DensityMatrix, ks: &KrausSet) -> Result<DensityMatrix> {
    let dim = rho.dim();
    let mut out = CMatrix::zeros(dim, dim);
    for k in &ks.operators {
        if k.rows() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: k.rows() });
        }
        out = &out + &(&(&k.adjoint() * rho.matrix()) * k);
    }
    Ok(DensityMatrix::from_evolution(out, rho.register().to_vec()))
}

/// Applies every channel of `scenario` at time `t`, in list order.
pub fn evolve(rho0: &DensityMatrix, scenario: &NoiseScenario, t: f64) -> Result<DensityMatrix> {
    scenario.validate()?;
    if rho0.register().len() != scenario.register_size {
        return Err(Error::InvalidScenario(format!(
            "scenario is for {} qubits, state has {}",
            scenario.register_size,
            rho0.register().len()
        )));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParams(format!("time must be finite and >= 0, got {t}")));
    }
    let mut rho = rho0.clone();
    for ch in &scenario.channels {
        let ks = ch.kraus(scenario.register_size, t)?;
        rho = apply_kraus(&rho, &ks)?;
    }
    Ok(rho)
}
