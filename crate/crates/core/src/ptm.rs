//! Pauli transfer matrices.
//!
//! The basis is the normalized Pauli basis `σ_k / √d`, ordered as in
//! [`PauliOperator::basis_index`] (qubit 0 most significant, `I, X, Y, Z`).
//! Entry `R[a][b] = Tr(σ_a Λ(σ_b)) / d`.

use nalgebra::DMatrix;

use crate::channel::PauliChannel;
use crate::clifford::CliffordTableau;
use crate::error::{Error, Result};
use crate::pauli::{Pauli1, PauliOperator};

#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    d: usize,
    ptm: DMatrix<f64>,
}

impl Superoperator {
    /// Wraps a `d² × d²` real matrix.
    pub fn new(ptm: DMatrix<f64>) -> Result<Superoperator> {
        if ptm.nrows() != ptm.ncols() {
            return Err(Error::InvalidOperator(format!(
                "transfer matrix is {}x{}, not square",
                ptm.nrows(),
                ptm.ncols()
            )));
        }
        let d = (ptm.nrows() as f64).sqrt().round() as usize;
        if d * d != ptm.nrows() || d == 0 {
            return Err(Error::InvalidOperator(format!(
                "transfer matrix size {} is not a square dimension",
                ptm.nrows()
            )));
        }
        Ok(Superoperator { d, ptm })
    }

    pub fn identity(d: usize) -> Superoperator {
        Superoperator { d, ptm: DMatrix::identity(d * d, d * d) }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Superoperator> {
        Superoperator::new(DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(diag)))
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.ptm
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.ptm[(a, b)]
    }

    /// `self ∘ other` (apply `other`, then `self`).
    pub fn after(&self, other: &Superoperator) -> Result<Superoperator> {
        if self.d != other.d {
            return Err(Error::Dimension { expected: self.d, found: other.d });
        }
        Ok(Superoperator { d: self.d, ptm: &self.ptm * &other.ptm })
    }

    /// Heisenberg-picture dual; the transpose in a real orthonormal basis.
    pub fn dual(&self) -> Superoperator {
        Superoperator { d: self.d, ptm: self.ptm.transpose() }
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        let n = self.ptm.ncols();
        (self.ptm[(0, 0)] - 1.0).abs() <= tol && (1..n).all(|b| self.ptm[(0, b)].abs() <= tol)
    }

    pub fn max_abs_diff(&self, other: &Superoperator) -> f64 {
        if self.ptm.shape() != other.ptm.shape() {
            return f64::INFINITY;
        }
        (&self.ptm - &other.ptm).amax()
    }

    /// Applies the map to a vectorized operator.
    pub fn apply(&self, v: &QubitOperator) -> Result<QubitOperator> {
        if self.d != 2 {
            return Err(Error::Dimension { expected: 2, found: self.d });
        }
        let out = &self.ptm * nalgebra::DVector::from_row_slice(&v.coeffs);
        Ok(QubitOperator { coeffs: [out[0], out[1], out[2], out[3]] })
    }
}

/// Diagonal PTM of a Pauli channel: `R[Q][Q] = Σ_E w_E (−1)^{[E, Q] ≠ 0}`.
pub fn channel_to_ptm(c: &PauliChannel) -> Superoperator {
    let n = c.n_qubits();
    let dim = 4usize.pow(n as u32);
    let diag: Vec<f64> = (0..dim)
        .map(|index| {
            let q = PauliOperator::from_basis_index(n, index);
            c.support()
                .iter()
                .map(|(e, w)| if e.anticommutes_unchecked(&q) { -w } else { *w })
                .sum()
        })
        .collect();
    Superoperator::from_diagonal(&diag).expect("square by construction")
}

/// Average gate fidelity to the identity, via the entanglement fidelity
/// `F_e = Tr(R) / d²` and `F_avg = (d F_e + 1) / (d + 1)`.
pub fn average_gate_fidelity(s: &Superoperator) -> f64 {
    let d = s.d as f64;
    let fe = s.ptm.trace() / (d * d);
    (d * fe + 1.0) / (d + 1.0)
}

/// Depolarizing parameter `(d F − 1) / (d − 1)`.
pub fn depolarizing_parameter(s: &Superoperator) -> f64 {
    let d = s.d as f64;
    (d * average_gate_fidelity(s) - 1.0) / (d - 1.0)
}

/// Signed-permutation PTM of a single-qubit Clifford.
pub fn clifford_ptm(t: &CliffordTableau) -> Result<Superoperator> {
    if t.n_qubits() != 1 {
        return Err(Error::Dimension { expected: 1, found: t.n_qubits() });
    }
    let mut m = DMatrix::zeros(4, 4);
    m[(0, 0)] = 1.0;
    for b in 1..4 {
        let img = t.conjugate_unchecked(&PauliOperator::from_paulis(&[Pauli1::from_index(b)]));
        let sign = if img.phase().exponent() == 0 { 1.0 } else { -1.0 };
        m[(img.get(0).index(), b)] = sign;
    }
    Superoperator::new(m)
}

/// A Hermitian single-qubit operator `O = (c_I I + c_X X + c_Y Y + c_Z Z) / 2`,
/// stored by its coordinates `c_k = Tr(σ_k O)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitOperator {
    coeffs: [f64; 4],
}

impl QubitOperator {
    /// Operator with `Tr(σ_k O) = traces[k]`.
    pub fn from_traces(traces: [f64; 4]) -> QubitOperator {
        // Normalized-basis coordinates are Tr(σ_k O)/√2.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        QubitOperator { coeffs: traces.map(|t| t * s) }
    }

    pub fn traces(&self) -> [f64; 4] {
        self.coeffs.map(|c| c * std::f64::consts::SQRT_2)
    }

    /// `|0⟩⟨0|`
    pub fn zero_state() -> QubitOperator {
        QubitOperator::from_traces([1.0, 0.0, 0.0, 1.0])
    }

    pub fn maximally_mixed() -> QubitOperator {
        QubitOperator::from_traces([1.0, 0.0, 0.0, 0.0])
    }

    /// Eigenvalues of the operator.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let t = self.traces();
        let r = (t[1] * t[1] + t[2] * t[2] + t[3] * t[3]).sqrt();
        ((t[0] - r) / 2.0, (t[0] + r) / 2.0)
    }

    pub fn validate_state(&self) -> Result<()> {
        let (lo, _) = self.eigenvalues();
        if (self.traces()[0] - 1.0).abs() > 1e-12 || lo < -1e-12 {
            return Err(Error::InvalidOperator(format!("{self:?} is not a density operator")));
        }
        Ok(())
    }

    pub fn validate_effect(&self) -> Result<()> {
        let (lo, hi) = self.eigenvalues();
        if lo < -1e-12 || hi > 1.0 + 1e-12 {
            return Err(Error::InvalidOperator(format!("{self:?} is not an effect (0 ≤ Q ≤ 1)")));
        }
        Ok(())
    }

    pub fn sub(&self, other: &QubitOperator) -> QubitOperator {
        let mut c = self.coeffs;
        c.iter_mut().zip(other.coeffs).for_each(|(a, b)| *a -= b);
        QubitOperator { coeffs: c }
    }

    /// Hilbert–Schmidt inner product `Tr(A B)`.
    pub fn trace_product(&self, other: &QubitOperator) -> f64 {
        self.coeffs.iter().zip(other.coeffs).map(|(a, b)| a * b).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{bitflip_independent, depolarizing};
    use crate::clifford::SingleQubitCliffords;

    #[test]
    fn identity_fidelity_is_one() {
        let s = channel_to_ptm(&PauliChannel::identity(3));
        assert!((average_gate_fidelity(&s) - 1.0).abs() < 1e-15);
        assert!(s.is_trace_preserving(0.0));
    }

    #[test]
    fn bitflip_fidelity() {
        for p in [0.0, 0.05, 0.1, 0.5] {
            let s = channel_to_ptm(&bitflip_independent(p, 1).unwrap());
            assert!((average_gate_fidelity(&s) - (1.0 - 2.0 * p / 3.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn depolarizing_fidelity_matches_eigenstate_average() {
        // Oracle: average of ⟨ψ|Λ(ψ)|ψ⟩ over the six Pauli eigenstates, which
        // form a 2-design. For Bloch vector r, Λ maps r → λ r; overlap (1 + λ)/2.
        for lambda in [1.0, 0.9, 0.5, 0.0, -0.2] {
            let s = channel_to_ptm(&depolarizing(lambda).unwrap());
            let mut avg = 0.0;
            for axis in 1..4 {
                for sign in [1.0, -1.0] {
                    let mut t = [1.0, 0.0, 0.0, 0.0];
                    t[axis] = sign;
                    let psi = QubitOperator::from_traces(t);
                    avg += psi.trace_product(&s.apply(&psi).unwrap()) / 6.0;
                }
            }
            assert!((average_gate_fidelity(&s) - avg).abs() < 1e-14);
            assert!((avg - (1.0 + lambda) / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn non_square_rejected() {
        assert!(Superoperator::new(DMatrix::zeros(4, 3)).is_err());
        assert!(Superoperator::new(DMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn clifford_ptms_are_orthogonal() {
        for t in SingleQubitCliffords::get().elements() {
            let r = clifford_ptm(t).unwrap();
            let prod = r.matrix().transpose() * r.matrix();
            assert!((prod - DMatrix::<f64>::identity(4, 4)).amax() < 1e-15);
        }
    }

    #[test]
    fn operator_validation() {
        assert!(QubitOperator::zero_state().validate_state().is_ok());
        assert!(QubitOperator::zero_state().validate_effect().is_ok());
        assert!(QubitOperator::from_traces([1.0, 0.0, 0.0, 1.5]).validate_state().is_err());
        assert!(QubitOperator::from_traces([3.0, 0.0, 0.0, 0.0]).validate_effect().is_err());
        assert!(QubitOperator::from_traces([2.0, 0.0, 0.0, 0.0]).validate_state().is_err());
    }
}
