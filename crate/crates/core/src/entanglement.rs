//! Two-qubit entanglement: Wootters concurrence and entanglement of
//! formation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::{DensityMatrix, PSD_TOL};
use crate::tensor::{hermitian_eigen, kron, pauli, CMatrix};

/// Concurrence together with the spectrum of `ρρ̃` it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceResult {
    pub value: f64,
    /// Eigenvalues of `ρρ̃`, descending, clamped at zero.
    pub lambdas: [f64; 4],
}

impl ConcurrenceResult {
    pub fn squared(&self) -> f64 {
        self.value * self.value
    }
}

/// The spin-flipped state and the product `ρρ̃`.
#[derive(Debug, Clone)]
pub struct SpinFlip {
    pub tilde: CMatrix,
    pub product: CMatrix,
}

fn check_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: rho.dim() });
    }
    Ok(())
}

/// `ρ̃ = (σ_y ⊗ σ_y) ρ* (σ_y ⊗ σ_y)` and `ρρ̃`.
pub fn spin_flip(rho: &DensityMatrix) -> Result<SpinFlip> {
    check_two_qubit(rho)?;
    let yy = kron(&pauli::sigma_y(), &pauli::sigma_y());
    let tilde = &(&yy * &rho.matrix().conj()) * &yy;
    let product = rho.matrix() * &tilde;
    Ok(SpinFlip { tilde, product })
}

/// `C(ρ) = max(0, √λ₁ − √λ₂ − √λ₃ − √λ₄)`.
///
/// The `√λ` are the singular values of `A = √ρ (σ_y ⊗ σ_y) √ρ*`, since
/// `A A† = √ρ ρ̃ √ρ` is similar to `ρρ̃`. They are read off the spectrum of
/// the Hermitian dilation `[[0, A], [A†, 0]]`, which holds `±σᵢ`. Taking
/// square roots of the λ instead turns roundoff of 1e-18 into errors of
/// 1e-9 near a vanishing λ.
pub fn concurrence(rho: &DensityMatrix) -> Result<ConcurrenceResult> {
    check_two_qubit(rho)?;
    let eig = hermitian_eigen(rho.matrix())?;
    let min = eig.values.last().copied().unwrap_or(0.0);
    if min < -PSD_TOL {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    let sqrt_rho = eig.map_values(|x| x.max(0.0).sqrt());
    let yy = kron(&pauli::sigma_y(), &pauli::sigma_y());
    let a = &(&sqrt_rho * &yy) * &sqrt_rho.conj();
    let a_dag = a.adjoint();
    let mut dilation = CMatrix::zeros(8, 8);
    for i in 0..4 {
        for j in 0..4 {
            dilation[(i, j + 4)] = a[(i, j)];
            dilation[(i + 4, j)] = a_dag[(i, j)];
        }
    }
    let spectrum = hermitian_eigen(&dilation)?.values;

    let mut roots = [0.0; 4];
    for (slot, &x) in roots.iter_mut().zip(&spectrum) {
        *slot = x.max(0.0);
    }
    let lambdas = roots.map(|r| r * r);
    let value = (roots[0] - roots[1] - roots[2] - roots[3]).clamp(0.0, 1.0);
    Ok(ConcurrenceResult { value, lambdas })
}

/// Binary entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    term(x) + term(1.0 - x)
}

/// `E_f = h((1 + √(1 − C²)) / 2)`.
pub fn entanglement_of_formation(c: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::OutOfRange(c));
    }
    Ok(binary_entropy(0.5 * (1.0 + (1.0 - c * c).max(0.0).sqrt())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::StateSpec;
    use crate::tensor::{frobenius_distance, Qubit};
    use num_complex::Complex64;

    fn phi_plus() -> DensityMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateSpec::fragile(h.into(), 0.0.into(), h.into()).projector().unwrap()
    }

    fn diag(p: [f64; 4]) -> DensityMatrix {
        DensityMatrix::new(CMatrix::from_real_diag(&p), vec![Qubit::A, Qubit::B]).unwrap()
    }

    #[test]
    fn bell_state_is_its_own_spin_flip() {
        let rho = phi_plus();
        let f = spin_flip(&rho).unwrap();
        assert!(frobenius_distance(&f.tilde, rho.matrix()).unwrap() < 1e-15);
        assert!(frobenius_distance(&f.product, rho.matrix()).unwrap() < 1e-15);
    }

    #[test]
    fn spin_flip_of_diagonal_state() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let f = spin_flip(&diag(p)).unwrap();
        let expected = CMatrix::from_real_diag(&[p[0] * p[3], p[1] * p[2], p[2] * p[1], p[3] * p[0]]);
        assert!(frobenius_distance(&f.product, &expected).unwrap() < 1e-15);
    }

    #[test]
    fn product_state_has_zero_spin_flip_product() {
        let f = spin_flip(&diag([1.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(f.product.max_abs(), 0.0);
        assert_eq!(concurrence(&diag([1.0, 0.0, 0.0, 0.0])).unwrap().value, 0.0);
    }

    #[test]
    fn bell_state_has_unit_concurrence() {
        let r = concurrence(&phi_plus()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!((r.lambdas[0] - 1.0).abs() < 1e-12);
        assert!(r.lambdas[1..].iter().all(|&x| x < 1e-12));
    }

    #[test]
    fn singlet_has_unit_concurrence() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let rho = StateSpec::robust(0.0.into(), h.into(), (-h).into()).projector().unwrap();
        assert!((concurrence(&rho).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let rho = StateSpec::ghz(1.0.into(), 0.0.into()).projector().unwrap();
        assert!(matches!(concurrence(&rho), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn concurrence_of_complex_pure_state() {
        // for a pure state C = 2|ad − bc|
        let (a, b, c, d) = (
            Complex64::new(0.5, 0.1),
            Complex64::new(0.2, -0.3),
            Complex64::new(0.1, 0.4),
            Complex64::new(-0.3, 0.2),
        );
        let n = (a.norm_sqr() + b.norm_sqr() + c.norm_sqr() + d.norm_sqr()).sqrt();
        let (a, b, c, d) = (a / n, b / n, c / n, d / n);
        let rho = StateSpec::Generic2 { a, b, c, d }.projector().unwrap();
        let expected = 2.0 * (a * d - b * c).norm();
        assert!((concurrence(&rho).unwrap().value - expected).abs() < 1e-12);
    }

    #[test]
    fn entanglement_of_formation_examples() {
        assert_eq!(entanglement_of_formation(0.0).unwrap(), 0.0);
        assert!((entanglement_of_formation(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((entanglement_of_formation(0.5).unwrap() - 0.35457890266527003).abs() < 1e-12);
        assert!(entanglement_of_formation(1.5).is_err());
        assert!(entanglement_of_formation(-0.1).is_err());
    }
}
