//! Dense complex matrices for registers of at most three qubits.
//!
//! Everything here works on tiny square matrices (2, 4 or 8 rows), so the
//! storage is a flat row-major `Vec` and every operation is the textbook
//! triple loop.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used to accept a matrix as Hermitian before eigensolving.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Off-diagonal residue at which the Jacobi sweep stops.
const JACOBI_TOL: f64 = 1e-15;
const JACOBI_MAX_SWEEPS: usize = 64;

/// A qubit of the register. `A` is the leftmost (most significant) tensor
/// factor, then `B`, then `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Qubit {
    A,
    B,
    C,
}

impl Qubit {
    pub const ALL: [Qubit; 3] = [Qubit::A, Qubit::B, Qubit::C];

    /// Position of the factor counted from the left.
    pub fn position(self) -> usize {
        match self {
            Qubit::A => 0,
            Qubit::B => 1,
            Qubit::C => 2,
        }
    }

    /// First `n` qubits of the register, in tensor order.
    pub fn register(n: usize) -> &'static [Qubit] {
        &Self::ALL[..n.min(3)]
    }

    /// Bit mask of this qubit inside a computational index of an `n`-qubit
    /// register.
    pub fn mask(self, n: usize) -> usize {
        1 << (n - 1 - self.position())
    }

    pub fn parse(s: &str) -> Option<Qubit> {
        match s.trim() {
            "A" | "a" => Some(Qubit::A),
            "B" | "b" => Some(Qubit::B),
            "C" | "c" => Some(Qubit::C),
            _ => None,
        }
    }
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Qubit::A => "A",
            Qubit::B => "B",
            Qubit::C => "C",
        };
        f.write_str(s)
    }
}

/// Concatenated labels, e.g. `"AC"`.
pub fn label(qubits: &[Qubit]) -> String {
    qubits.iter().map(|q| q.to_string()).collect()
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    /// Builds a matrix from row-major entries.
    ///
    /// Panics if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(rows * cols, data.len(), "entry count must equal rows * cols");
        CMatrix { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        Self::from_vec(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        let mut m = Self::zeros(u.len(), v.len());
        for (i, ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                m[(i, j)] = ui * vj.conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> Complex64 {
        self.diagonal().into_iter().sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// Element-wise (Hadamard) product.
    pub fn hadamard(&self, other: &CMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect();
        CMatrix { rows: self.rows, cols: self.cols, data }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus of `m - m†`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Largest modulus among the off-diagonal entries.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut best: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    best = best.max(self[(i, j)].norm());
                }
            }
        }
        best
    }

    fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        CMatrix { rows: self.rows, cols: self.cols, data }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        CMatrix { rows: self.rows, cols: self.cols, data }
    }
}

/// Pauli matrices used by the rest of the crate.
pub mod pauli {
    use super::CMatrix;
    use num_complex::Complex64;

    pub fn sigma_y() -> CMatrix {
        let i = Complex64::new(0.0, 1.0);
        CMatrix::from_vec(2, 2, vec![0.0.into(), -i, i, 0.0.into()])
    }

    pub fn sigma_z() -> CMatrix {
        CMatrix::from_real_diag(&[1.0, -1.0])
    }
}

/// Kronecker product `a ⊗ b`, with `a` as the most significant factor.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = CMatrix::zeros(rows, cols);
    for ai in 0..a.rows {
        for aj in 0..a.cols {
            let x = a[(ai, aj)];
            for bi in 0..b.rows {
                for bj in 0..b.cols {
                    out[(ai * b.rows + bi, aj * b.cols + bj)] = x * b[(bi, bj)];
                }
            }
        }
    }
    out
}

fn check_register(qubits: &[Qubit]) -> bool {
    qubits.windows(2).all(|w| w[0] < w[1])
}

/// Traces out every qubit of `total` that is not in `keep`.
///
/// Both label sets must be listed in tensor order (`A < B < C`); the result
/// is ordered the same way.
pub fn partial_trace(rho: &CMatrix, keep: &[Qubit], total: &[Qubit]) -> Result<CMatrix> {
    let n = total.len();
    let dim = 1usize << n;
    if !check_register(total) || !check_register(keep) || keep.is_empty() {
        return Err(Error::NotASubset { keep: label(keep), total: label(total) });
    }
    if keep.iter().any(|q| !total.contains(q)) {
        return Err(Error::NotASubset { keep: label(keep), total: label(total) });
    }
    if !rho.is_square() || rho.rows() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: rho.rows() });
    }

    // bit positions (as masks in the full index) of kept and traced factors,
    // most significant first
    let position = |q: &Qubit| total.iter().position(|t| t == q).unwrap();
    let kept: Vec<usize> = keep.iter().map(|q| 1 << (n - 1 - position(q))).collect();
    let traced: Vec<usize> = total
        .iter()
        .filter(|q| !keep.contains(q))
        .map(|q| 1 << (n - 1 - position(q)))
        .collect();

    let spread = |local: usize, masks: &[usize]| -> usize {
        let k = masks.len();
        masks
            .iter()
            .enumerate()
            .filter(|(i, _)| local & (1 << (k - 1 - i)) != 0)
            .map(|(_, m)| m)
            .sum()
    };

    let kdim = 1usize << kept.len();
    let edim = 1usize << traced.len();
    let mut out = CMatrix::zeros(kdim, kdim);
    for r in 0..kdim {
        for c in 0..kdim {
            let (rf, cf) = (spread(r, &kept), spread(c, &kept));
            let mut acc = Complex64::new(0.0, 0.0);
            for e in 0..edim {
                let ef = spread(e, &traced);
                acc += rho[(rf | ef, cf | ef)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Real eigenvalues, descending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// Rebuilds `V f(Λ) V†`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let mid = CMatrix::from_real_diag(&d);
        &(&self.vectors * &mid) * &self.vectors.adjoint()
    }
}

fn off_diagonal_sq(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)].norm_sqr();
            }
        }
    }
    sum
}

/// Cyclic complex Jacobi diagonalization.
///
/// Each rotation first removes the phase of the pivot element, then applies
/// a real Givens rotation in the `(p, q)` plane.
pub fn hermitian_eigen(m: &CMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.rows(), found: m.cols() });
    }
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let n = m.rows();
    // symmetrize so the sweep starts from an exactly Hermitian matrix
    let mut a = (&m.clone() + &m.adjoint()).scale(Complex64::new(0.5, 0.0));
    let mut v = CMatrix::identity(n);
    let scale = a.max_abs().max(1.0);

    let mut previous_off = f64::INFINITY;
    for _ in 0..JACOBI_MAX_SWEEPS {
        // the off-diagonal Frobenius mass only shrinks under rotations, so
        // a sweep that fails to reduce it has hit roundoff
        let off_sq = off_diagonal_sq(&a);
        if a.max_off_diagonal() <= JACOBI_TOL * scale || off_sq >= previous_off {
            break;
        }
        previous_off = off_sq;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = 0.5 * (2.0 * r).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                // J = D R with D = diag(.., conj(phase) at q, ..); only
                // columns and rows p, q change
                let ph = (apq / r).conj();
                let (jpp, jpq, jqp, jqq) = (Complex64::new(c, 0.0), Complex64::new(s, 0.0), -ph * s, ph * c);
                for k in 0..n {
                    let (x, y) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = x * jpp + y * jqp;
                    a[(k, q)] = x * jpq + y * jqq;
                    let (x, y) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = x * jpp + y * jqp;
                    v[(k, q)] = x * jpq + y * jqq;
                }
                for k in 0..n {
                    let (x, y) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = jpp.conj() * x + jqp.conj() * y;
                    a[(q, k)] = jpq.conj() * x + jqq.conj() * y;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].re.total_cmp(&a[(x, x)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, col)] = v[(row, k)];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Real eigenvalues of a Hermitian matrix, sorted descending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    hermitian_eigen(m).map(|e| e.values)
}

/// `sqrt(Σ |a_ij - b_ij|²)`.
pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if (a.rows, a.cols) != (b.rows, b.cols) {
        return Err(Error::DimensionMismatch { expected: a.rows * a.cols, found: b.rows * b.cols });
    }
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kron_of_identities_is_identity() {
        assert_eq!(kron(&CMatrix::identity(2), &CMatrix::identity(2)), CMatrix::identity(4));
    }

    #[test]
    fn kron_diag_is_a_major() {
        let g = 0.3;
        let k = kron(&CMatrix::from_real_diag(&[1.0, g]), &CMatrix::identity(2));
        assert_eq!(k, CMatrix::from_real_diag(&[1.0, 1.0, g, g]));
    }

    #[test]
    fn sigma_y_squared_tensor_is_antidiagonal() {
        let yy = kron(&pauli::sigma_y(), &pauli::sigma_y());
        let expected = CMatrix::from_real(
            4,
            4,
            &[
                0.0, 0.0, 0.0, -1.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                -1.0, 0.0, 0.0, 0.0,
            ],
        );
        assert_eq!(yy, expected);
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = [c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)];
        let rho = CMatrix::outer(&v, &v);
        let red = partial_trace(&rho, &[Qubit::A], &[Qubit::A, Qubit::B]).unwrap();
        let half = CMatrix::identity(2).scale(c(0.5, 0.0));
        assert!(frobenius_distance(&red, &half).unwrap() < 1e-15);
    }

    #[test]
    fn partial_trace_keeps_non_adjacent_factors() {
        // |0⟩_A |1⟩_B |1⟩_C -> keep AC gives |01⟩⟨01|
        let mut v = vec![c(0.0, 0.0); 8];
        v[0b011] = c(1.0, 0.0);
        let rho = CMatrix::outer(&v, &v);
        let red = partial_trace(&rho, &[Qubit::A, Qubit::C], &Qubit::ALL).unwrap();
        assert_eq!(red[(1, 1)], c(1.0, 0.0));
        assert!((red.trace() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_inputs() {
        let rho = CMatrix::identity(4);
        assert!(matches!(
            partial_trace(&rho, &[Qubit::C], &[Qubit::A, Qubit::B]),
            Err(Error::NotASubset { .. })
        ));
        assert!(matches!(
            partial_trace(&rho, &[Qubit::A], &Qubit::ALL),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(partial_trace(&rho, &[], &[Qubit::A, Qubit::B]).is_err());
    }

    #[test]
    fn eigenvalues_of_diagonal_matrices() {
        let m = CMatrix::from_real_diag(&[0.3, 0.7]);
        assert_eq!(hermitian_eigenvalues(&m).unwrap(), vec![0.7, 0.3]);
        let half = CMatrix::identity(2).scale(c(0.5, 0.0));
        assert_eq!(hermitian_eigenvalues(&half).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn eigen_decomposition_reconstructs_complex_hermitian() {
        // Pauli-y has eigenvalues ±1
        let vals = hermitian_eigenvalues(&pauli::sigma_y()).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] + 1.0).abs() < 1e-14);

        let m = CMatrix::from_vec(
            3,
            3,
            vec![
                c(2.0, 0.0),
                c(1.0, -1.0),
                c(0.0, 0.5),
                c(1.0, 1.0),
                c(-1.0, 0.0),
                c(0.25, 0.0),
                c(0.0, -0.5),
                c(0.25, 0.0),
                c(0.5, 0.0),
            ],
        );
        let e = hermitian_eigen(&m).unwrap();
        let back = e.map_values(|x| x);
        assert!(frobenius_distance(&back, &m).unwrap() < 1e-13);
        let sum: f64 = e.values.iter().sum();
        assert!((sum - m.trace().re).abs() < 1e-13);
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        let m = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(hermitian_eigenvalues(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn frobenius_examples() {
        let m = pauli::sigma_y();
        assert_eq!(frobenius_distance(&m, &m).unwrap(), 0.0);
        let d = frobenius_distance(&CMatrix::identity(2), &CMatrix::zeros(2, 2)).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        let g = (-0.5f64).exp();
        let d = frobenius_distance(&CMatrix::identity(2), &CMatrix::from_real_diag(&[1.0, g])).unwrap();
        assert!((d - 0.393469340287367).abs() < 1e-12);
        assert!(frobenius_distance(&CMatrix::identity(2), &CMatrix::identity(4)).is_err());
    }
}
