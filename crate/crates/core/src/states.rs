//! Initial states and the closed-form evolved matrices used as an oracle.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::channels::{gamma, ChannelKind, NoiseScenario};
use crate::error::{Error, Result};
use crate::tensor::{hermitian_eigenvalues, label, partial_trace, CMatrix, Qubit};

/// Normalization slack accepted by [`StateSpec::projector`].
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Hermiticity and trace slack of [`DensityMatrix::new`].
pub const DENSITY_TOL: f64 = 1e-12;

/// Most negative eigenvalue tolerated in a density matrix.
pub const PSD_TOL: f64 = 1e-10;

/// A density matrix together with the qubit labels of its tensor factors.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    register: Vec<Qubit>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: CMatrix, register: Vec<Qubit>) -> Result<Self> {
        let dim = 1usize << register.len();
        if register.is_empty() || register.len() > 3 || !register.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidScenario(format!("bad register labels {}", label(&register))));
        }
        if !matrix.is_square() || matrix.rows() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.rows() });
        }
        let deviation = matrix.hermitian_deviation();
        if deviation > DENSITY_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = matrix.trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > DENSITY_TOL {
            return Err(Error::BadTrace { trace: trace.re });
        }
        let min = hermitian_eigenvalues(&matrix)?.last().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        Ok(DensityMatrix { matrix, register })
    }

    /// Wraps the output of a channel; the map itself guarantees validity.
    pub(crate) fn from_evolution(matrix: CMatrix, register: Vec<Qubit>) -> Self {
        DensityMatrix { matrix, register }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn register(&self) -> &[Qubit] {
        &self.register
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Reduced state on `keep`.
    pub fn reduced(&self, keep: &[Qubit]) -> Result<DensityMatrix> {
        let m = partial_trace(&self.matrix, keep, &self.register)?;
        Ok(DensityMatrix { matrix: m, register: keep.to_vec() })
    }
}

/// Coefficients of one of the pure-state classes.
///
/// Two-qubit forms index the basis `|++⟩, |+−⟩, |−+⟩, |−−⟩` as 0..3;
/// three-qubit forms use `|000⟩ … |111⟩` as 0..7.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StateSpec {
    /// `a|1⟩ + b|2⟩ + d|4⟩`
    Fragile { a: Complex64, b: Complex64, d: Complex64 },
    /// `a|1⟩ + c|3⟩ + d|4⟩`
    Fragile2 { a: Complex64, c: Complex64, d: Complex64 },
    /// `a|1⟩ + b|2⟩ + c|3⟩`
    Robust { a: Complex64, b: Complex64, c: Complex64 },
    /// `b|2⟩ + c|3⟩ + d|4⟩`
    Robust2 { b: Complex64, c: Complex64, d: Complex64 },
    Generic2 { a: Complex64, b: Complex64, c: Complex64, d: Complex64 },
    /// `ā₁|001⟩ + ā₂|010⟩ + ā₄|100⟩`
    W { a1: Complex64, a2: Complex64, a4: Complex64 },
    /// `ā₀|000⟩ + ā₇|111⟩`
    Ghz { a0: Complex64, a7: Complex64 },
}

/// Family a [`StateSpec`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StateClass {
    Fragile,
    Robust,
    Generic,
    W,
    Ghz,
}

impl fmt::Display for StateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StateClass::Fragile => "fragile",
            StateClass::Robust => "robust",
            StateClass::Generic => "generic",
            StateClass::W => "W",
            StateClass::Ghz => "GHZ",
        };
        f.write_str(s)
    }
}

impl StateSpec {
    pub fn fragile(a: Complex64, b: Complex64, d: Complex64) -> Self {
        StateSpec::Fragile { a, b, d }
    }

    pub fn robust(a: Complex64, b: Complex64, c: Complex64) -> Self {
        StateSpec::Robust { a, b, c }
    }

    pub fn w(a1: Complex64, a2: Complex64, a4: Complex64) -> Self {
        StateSpec::W { a1, a2, a4 }
    }

    pub fn ghz(a0: Complex64, a7: Complex64) -> Self {
        StateSpec::Ghz { a0, a7 }
    }

    pub fn class(&self) -> StateClass {
        match self {
            StateSpec::Fragile { .. } | StateSpec::Fragile2 { .. } => StateClass::Fragile,
            StateSpec::Robust { .. } | StateSpec::Robust2 { .. } => StateClass::Robust,
            StateSpec::Generic2 { .. } => StateClass::Generic,
            StateSpec::W { .. } => StateClass::W,
            StateSpec::Ghz { .. } => StateClass::Ghz,
        }
    }

    pub fn register_size(&self) -> usize {
        match self {
            StateSpec::W { .. } | StateSpec::Ghz { .. } => 3,
            _ => 2,
        }
    }

    /// Nonzero amplitudes as `(basis index, coefficient)`.
    pub fn support(&self) -> Vec<(usize, Complex64)> {
        match *self {
            StateSpec::Fragile { a, b, d } => vec![(0, a), (1, b), (3, d)],
            StateSpec::Fragile2 { a, c, d } => vec![(0, a), (2, c), (3, d)],
            StateSpec::Robust { a, b, c } => vec![(0, a), (1, b), (2, c)],
            StateSpec::Robust2 { b, c, d } => vec![(1, b), (2, c), (3, d)],
            StateSpec::Generic2 { a, b, c, d } => vec![(0, a), (1, b), (2, c), (3, d)],
            StateSpec::W { a1, a2, a4 } => vec![(0b001, a1), (0b010, a2), (0b100, a4)],
            StateSpec::Ghz { a0, a7 } => vec![(0b000, a0), (0b111, a7)],
        }
    }

    /// Full state vector in computational order.
    pub fn amplitudes(&self) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); 1 << self.register_size()];
        for (i, z) in self.support() {
            v[i] = z;
        }
        v
    }

    pub fn norm_sq(&self) -> f64 {
        self.support().iter().map(|(_, z)| z.norm_sqr()).sum()
    }

    /// Normalized draw with independent complex Gaussian coefficients.
    pub fn random<R: rand::Rng + ?Sized>(class: StateClass, rng: &mut R) -> Self {
        let normal = rand_distr::StandardNormal;
        let mut z = [Complex64::new(0.0, 0.0); 4];
        for c in z.iter_mut() {
            *c = Complex64::new(normal.sample(rng), normal.sample(rng));
        }
        let n = match class {
            StateClass::Generic => 4,
            StateClass::Ghz => 2,
            _ => 3,
        };
        let norm = z[..n].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let z = z.map(|c| c / norm);
        match class {
            StateClass::Fragile => StateSpec::Fragile { a: z[0], b: z[1], d: z[2] },
            StateClass::Robust => StateSpec::Robust { a: z[0], b: z[1], c: z[2] },
            StateClass::Generic => StateSpec::Generic2 { a: z[0], b: z[1], c: z[2], d: z[3] },
            StateClass::W => StateSpec::W { a1: z[0], a2: z[1], a4: z[2] },
            StateClass::Ghz => StateSpec::Ghz { a0: z[0], a7: z[1] },
        }
    }

    /// `|υ⟩⟨υ|`. Coefficients must already be normalized.
    pub fn projector(&self) -> Result<DensityMatrix> {
        let norm_sq = self.norm_sq();
        if (norm_sq - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        let v = self.amplitudes();
        Ok(DensityMatrix::from_evolution(CMatrix::outer(&v, &v), Qubit::register(self.register_size()).to_vec()))
    }
}

/// Noise configurations for which closed-form evolved matrices exist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ClosedFormScenario {
    /// Two qubits, one collective field on AB.
    TwoQubitCollective { rate: f64 },
    /// Three qubits, local field on A only.
    Local { rate: f64 },
    /// Three qubits, collective field on AB only.
    Pair { rate: f64 },
    /// Three qubits, one field on all of ABC.
    Triple { rate: f64 },
    /// Three qubits, independent local fields on A, B and C.
    MultiLocal { rates: [f64; 3] },
    /// Three qubits, local field on A plus collective field on BC.
    LocalPair { local: f64, pair: f64 },
}

impl ClosedFormScenario {
    /// Recognizes the scenario, independent of channel order. Relaxed
    /// scenarios are never recognized.
    pub fn classify(scenario: &NoiseScenario) -> Option<ClosedFormScenario> {
        if scenario.relaxed {
            return None;
        }
        let mut kinds: Vec<(ChannelKind, f64)> = scenario.channels.iter().map(|c| (c.kind, c.rate)).collect();
        kinds.sort_by(|x, y| x.0.cmp(&y.0));
        use ChannelKind::*;
        use Qubit::*;
        match (scenario.register_size, kinds.as_slice()) {
            (2, [(PairCollective(A, B), r)]) => Some(ClosedFormScenario::TwoQubitCollective { rate: *r }),
            (3, [(Local(A), r)]) => Some(ClosedFormScenario::Local { rate: *r }),
            (3, [(PairCollective(A, B), r)]) => Some(ClosedFormScenario::Pair { rate: *r }),
            (3, [(TripleCollective, r)]) => Some(ClosedFormScenario::Triple { rate: *r }),
            (3, [(Local(A), ra), (Local(B), rb), (Local(C), rc)]) => Some(ClosedFormScenario::MultiLocal { rates: [*ra, *rb, *rc] }),
            (3, [(Local(A), rl), (PairCollective(B, C), rp)]) => Some(ClosedFormScenario::LocalPair { local: *rl, pair: *rp }),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClosedFormScenario::TwoQubitCollective { .. } => "collective AB",
            ClosedFormScenario::Local { .. } => "local A",
            ClosedFormScenario::Pair { .. } => "collective AB",
            ClosedFormScenario::Triple { .. } => "collective ABC",
            ClosedFormScenario::MultiLocal { .. } => "local A, B, C",
            ClosedFormScenario::LocalPair { .. } => "local A, collective BC",
        }
    }
}

/// Multiplicative factor on each upper-triangle coherence `(i, j)`, in closed
/// form. Entries not listed keep factor 1.
fn closed_form_factors(spec: &StateSpec, scenario: ClosedFormScenario, t: f64) -> Option<Vec<((usize, usize), f64)>> {
    use ClosedFormScenario::*;
    let factors = match (spec, scenario) {
        (StateSpec::Fragile { .. }, TwoQubitCollective { rate }) => {
            let g = gamma(rate, t);
            vec![((0, 1), g), ((1, 3), g), ((0, 3), g.powi(4))]
        }
        (StateSpec::Fragile2 { .. }, TwoQubitCollective { rate }) => {
            let g = gamma(rate, t);
            vec![((0, 2), g), ((2, 3), g), ((0, 3), g.powi(4))]
        }
        (StateSpec::Robust { .. }, TwoQubitCollective { rate }) => {
            let g = gamma(rate, t);
            vec![((0, 1), g), ((0, 2), g), ((1, 2), 1.0)]
        }
        (StateSpec::Robust2 { .. }, TwoQubitCollective { rate }) => {
            let g = gamma(rate, t);
            vec![((1, 3), g), ((2, 3), g), ((1, 2), 1.0)]
        }
        // W support: 1 = |001⟩ (ā₁), 2 = |010⟩ (ā₂), 4 = |100⟩ (ā₄)
        (StateSpec::W { .. }, Local { rate }) => {
            let ga = gamma(rate, t);
            vec![((1, 2), 1.0), ((1, 4), ga), ((2, 4), ga)]
        }
        (StateSpec::W { .. }, Pair { rate }) => {
            let gab = gamma(rate, t);
            vec![((1, 2), gab), ((1, 4), gab), ((2, 4), 1.0)]
        }
        (StateSpec::W { .. }, Triple { .. }) => vec![],
        (StateSpec::W { .. }, MultiLocal { rates: [ra, rb, rc] }) => {
            let (ga, gb, gc) = (gamma(ra, t), gamma(rb, t), gamma(rc, t));
            vec![((1, 2), gb * gc), ((1, 4), ga * gc), ((2, 4), ga * gb)]
        }
        (StateSpec::W { .. }, LocalPair { local, pair }) => {
            let f = gamma(local, t) * gamma(pair, t);
            vec![((1, 2), 1.0), ((1, 4), f), ((2, 4), f)]
        }
        (StateSpec::Ghz { .. }, s) => {
            let corner = match s {
                Local { rate } => gamma(rate, t),
                Pair { rate } | Triple { rate } => gamma(rate, t).powi(4),
                MultiLocal { rates } => rates.iter().map(|&r| gamma(r, t)).product(),
                LocalPair { local, pair } => gamma(local, t) * gamma(pair, t).powi(4),
                TwoQubitCollective { .. } => return None,
            };
            vec![((0, 7), corner)]
        }
        _ => return None,
    };
    Some(factors)
}

/// Closed-form evolved state for the `(spec, scenario)` pairs whose matrices
/// are known in closed form. Other pairs return [`Error::UnsupportedPair`];
/// for those the operator-sum evolution is the only source of truth.
pub fn analytic_evolved(spec: &StateSpec, scenario: &NoiseScenario, t: f64) -> Result<DensityMatrix> {
    let unsupported = || Error::UnsupportedPair(format!("{} state under {}", spec.class(), scenario.id()));
    let closed = ClosedFormScenario::classify(scenario).ok_or_else(unsupported)?;
    let factors = closed_form_factors(spec, closed, t).ok_or_else(unsupported)?;
    let rho0 = spec.projector()?;
    let mut m = rho0.into_matrix();
    for ((i, j), f) in factors {
        m[(i, j)] *= f;
        m[(j, i)] *= f;
    }
    Ok(DensityMatrix::from_evolution(m, Qubit::register(spec.register_size()).to_vec()))
}

/// Every one- and two-qubit reduced state, keyed by the kept qubits.
///
/// For a two-qubit register only the single-qubit reductions are returned.
pub fn reduced_all(rho: &DensityMatrix) -> Result<BTreeMap<Vec<Qubit>, DensityMatrix>> {
    let register = rho.register().to_vec();
    let n = register.len();
    let mut out = BTreeMap::new();
    for mask in 1..(1usize << n) - 1 {
        let keep: Vec<Qubit> = register.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, q)| *q).collect();
        if keep.len() <= 2 {
            let red = rho.reduced(&keep)?;
            out.insert(keep, red);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{evolve, Channel};
    use crate::tensor::frobenius_distance;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fragile_projector_layout() {
        let (a, b, d) = (c(0.6, 0.0), c(0.0, 0.48), c(0.64, 0.0));
        let rho = StateSpec::fragile(a, b, d).projector().unwrap();
        let m = rho.matrix();
        assert_eq!(m[(0, 1)], a * b.conj());
        assert_eq!(m[(0, 3)], a * d.conj());
        assert_eq!(m[(3, 1)], d * b.conj());
        for k in 0..4 {
            assert_eq!(m[(2, k)], c(0.0, 0.0));
            assert_eq!(m[(k, 2)], c(0.0, 0.0));
        }
    }

    #[test]
    fn w_projector_support() {
        let s = 1.0 / 3f64.sqrt();
        let rho = StateSpec::w(s.into(), s.into(), s.into()).projector().unwrap();
        let m = rho.matrix();
        for i in 0..8 {
            for j in 0..8 {
                let inside = [1, 2, 4].contains(&i) && [1, 2, 4].contains(&j);
                assert_eq!(m[(i, j)].norm() > 0.0, inside, "({i},{j})");
            }
        }
    }

    #[test]
    fn ghz_projector_corners() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let rho = StateSpec::ghz(h.into(), h.into()).projector().unwrap();
        let m = rho.matrix();
        for (i, j) in [(0, 0), (7, 7), (0, 7), (7, 0)] {
            assert!((m[(i, j)].re - 0.5).abs() < 1e-15);
        }
        assert!((m.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_normalized_coefficients_are_rejected() {
        let err = StateSpec::ghz(1.0.into(), 1.0.into()).projector().unwrap_err();
        assert!(matches!(err, Error::NotNormalized { .. }));
    }

    #[test]
    fn density_matrix_validation() {
        let reg = vec![Qubit::A];
        assert!(DensityMatrix::new(CMatrix::from_real_diag(&[0.5, 0.5]), reg.clone()).is_ok());
        assert!(matches!(
            DensityMatrix::new(CMatrix::from_real_diag(&[0.5, 0.6]), reg.clone()),
            Err(Error::BadTrace { .. })
        ));
        assert!(matches!(
            DensityMatrix::new(CMatrix::from_real_diag(&[1.5, -0.5]), reg.clone()),
            Err(Error::NotPositive { .. })
        ));
        assert!(matches!(
            DensityMatrix::new(CMatrix::from_real(2, 2, &[0.5, 0.1, 0.0, 0.5]), reg.clone()),
            Err(Error::NotHermitian { .. })
        ));
        assert!(DensityMatrix::new(CMatrix::identity(4), reg).is_err());
    }

    #[test]
    fn fragile_reduced_state_keeps_slow_coherence() {
        let (a, b, d) = (c(0.6, 0.0), c(0.48, 0.0), c(0.0, 0.64));
        let spec = StateSpec::fragile(a, b, d);
        let s = NoiseScenario::new(2, vec![Channel::pair(Qubit::A, Qubit::B, 1.0)]).unwrap();
        let t = 0.8;
        let g = gamma(1.0, t);
        let rho_a = evolve(&spec.projector().unwrap(), &s, t).unwrap().reduced(&[Qubit::A]).unwrap();
        let expected = CMatrix::from_vec(
            2,
            2,
            vec![(a.norm_sqr() + b.norm_sqr()).into(), b * d.conj() * g, d * b.conj() * g, d.norm_sqr().into()],
        );
        assert!(frobenius_distance(rho_a.matrix(), &expected).unwrap() < 1e-15);
    }

    #[test]
    fn ghz_pair_reductions_are_diagonal() {
        let (a0, a7) = (c(0.8, 0.0), c(0.0, 0.6));
        let rho = StateSpec::ghz(a0, a7).projector().unwrap();
        let red = rho.reduced(&[Qubit::A, Qubit::B]).unwrap();
        let expected = CMatrix::from_real_diag(&[0.64, 0.0, 0.0, 0.36]);
        assert!(frobenius_distance(red.matrix(), &expected).unwrap() < 1e-15);
    }

    #[test]
    fn w_under_local_a_keeps_bc_coherence() {
        let (a1, a2, a4) = (c(0.6, 0.0), c(0.0, 0.64), c(0.48, 0.0));
        let spec = StateSpec::w(a1, a2, a4);
        let s = NoiseScenario::new(3, vec![Channel::local(Qubit::A, 1.0)]).unwrap();
        let rho = evolve(&spec.projector().unwrap(), &s, 2.0).unwrap();
        let red = reduced_all(&rho).unwrap();
        assert_eq!(red.len(), 6);
        let bc = red[&vec![Qubit::B, Qubit::C]].matrix().clone();
        // BC basis: |01⟩ carries ā₁, |10⟩ carries ā₂
        assert!((bc[(1, 2)] - a1 * a2.conj()).norm() < 1e-15);
        for q in Qubit::ALL {
            assert!(red[&vec![q]].matrix().max_off_diagonal() < 1e-15);
        }
    }

    #[test]
    fn classification_ignores_channel_order() {
        let s = NoiseScenario::new(3, vec![Channel::pair(Qubit::C, Qubit::B, 2.0), Channel::local(Qubit::A, 1.0)]).unwrap();
        assert_eq!(ClosedFormScenario::classify(&s), Some(ClosedFormScenario::LocalPair { local: 1.0, pair: 2.0 }));
        let s = NoiseScenario::new(3, vec![Channel::local(Qubit::B, 1.0)]).unwrap();
        assert_eq!(ClosedFormScenario::classify(&s), None);
    }

    #[test]
    fn unsupported_pairs_are_reported() {
        let spec = StateSpec::Generic2 { a: 0.5.into(), b: 0.5.into(), c: 0.5.into(), d: 0.5.into() };
        let s = NoiseScenario::new(2, vec![Channel::pair(Qubit::A, Qubit::B, 1.0)]).unwrap();
        assert!(matches!(analytic_evolved(&spec, &s, 1.0), Err(Error::UnsupportedPair(_))));
        let w = StateSpec::w(1.0.into(), 0.0.into(), 0.0.into());
        let s = NoiseScenario::new(3, vec![Channel::local(Qubit::C, 1.0)]).unwrap();
        assert!(matches!(analytic_evolved(&w, &s, 1.0), Err(Error::UnsupportedPair(_))));
    }
}
