//! Dense complex-matrix oracles.
//!
//! Everything here works on explicit `2ⁿ × 2ⁿ` matrices built from the 2×2
//! Pauli, Hadamard and phase matrices, independently of the symplectic
//! bookkeeping used elsewhere. Qubit 0 is the most significant tensor factor.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::channel::PauliChannel;
use crate::clifford::{Gate1, SingleQubitCliffords};
use crate::code::{LogicalPauli, StabilizerCode, Syndrome};
use crate::error::{check_dim, Error, Result};
use crate::logical::RecoveryMode;
use crate::pauli::{Pauli1, PauliOperator};
use crate::ptm::Superoperator;
use crate::rb::TrialRealization;

pub type CMatrix = DMatrix<Complex64>;

const DENSE_QUBIT_LIMIT: usize = 10;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli1_matrix(p: Pauli1) -> CMatrix {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    match p {
        Pauli1::I => CMatrix::from_row_slice(2, 2, &[l, o, o, l]),
        Pauli1::X => CMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        Pauli1::Y => CMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        Pauli1::Z => CMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
    }
}

pub fn hadamard_matrix() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
}

pub fn phase_s_matrix() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)])
}

/// Kronecker product of the operands in order.
pub fn kron_all(factors: &[CMatrix]) -> CMatrix {
    factors
        .iter()
        .fold(CMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

/// Dense matrix of a Pauli operator, phase included.
pub fn pauli_matrix(p: &PauliOperator) -> CMatrix {
    let factors: Vec<CMatrix> = (0..p.n_qubits()).map(|q| pauli1_matrix(p.get(q))).collect();
    let phase = c(0.0, 1.0).powu(p.phase().exponent() as u32);
    kron_all(&factors) * phase
}

/// 2×2 unitary of group element `index`, multiplied out from its gate word.
pub fn single_qubit_clifford_unitary(index: usize) -> CMatrix {
    let word = SingleQubitCliffords::get().word(index);
    word.iter().fold(CMatrix::identity(2, 2), |acc, g| {
        let m = match g {
            Gate1::H => hadamard_matrix(),
            Gate1::S => phase_s_matrix(),
        };
        m * acc
    })
}

fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().sum()
}

fn conj(u: &CMatrix, rho: &CMatrix) -> CMatrix {
    u * rho * u.adjoint()
}

/// Projector onto the syndrome-`s` eigenspace, `Π_j (1 + (−1)^{s_j} S_j) / 2`.
pub fn syndrome_projector(code: &StabilizerCode, s: Syndrome) -> CMatrix {
    let dim = 1usize << code.n_physical();
    let id = CMatrix::identity(dim, dim);
    code.generators().iter().enumerate().fold(id.clone(), |acc, (j, g)| {
        let sign = if s.bit(j) { -1.0 } else { 1.0 };
        acc * ((&id + pauli_matrix(g) * c(sign, 0.0)) * c(0.5, 0.0))
    })
}

fn check_size(code: &StabilizerCode) -> Result<()> {
    if code.n_physical() > DENSE_QUBIT_LIMIT {
        return Err(Error::Domain(format!(
            "dense oracle limited to {DENSE_QUBIT_LIMIT} qubits, code has {}",
            code.n_physical()
        )));
    }
    Ok(())
}

/// Dense logical operators `[Π, X̄Π, ȲΠ, Z̄Π]` with `Ȳ = i X̄ Z̄`.
fn encoded_paulis(code: &StabilizerCode) -> [CMatrix; 4] {
    let pi = syndrome_projector(code, Syndrome::zero(code.n_generators()));
    let x = pauli_matrix(code.logical_x());
    let z = pauli_matrix(code.logical_z());
    let y = &x * &z * c(0.0, 1.0);
    [pi.clone(), &x * &pi, &y * &pi, &z * &pi]
}

fn apply_pauli_channel(noise: &PauliChannel, rho: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
    for (e, w) in noise.support() {
        let m = pauli_matrix(e);
        out += conj(&m, rho) * c(*w, 0.0);
    }
    out
}

fn lookup_recovery_map(code: &StabilizerCode, rho: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
    for (s, r) in code.recovery_table() {
        let proj = syndrome_projector(code, s);
        let rm = pauli_matrix(r);
        out += conj(&(rm * &proj), rho);
    }
    out
}

fn logical_ptm_from_outputs(encoded: &[CMatrix; 4], outputs: &[CMatrix; 4]) -> DMatrix<f64> {
    DMatrix::from_fn(4, 4, |a, b| 0.5 * trace(&(&encoded[a] * &outputs[b])).re)
}

/// Logical transfer matrix from full density-matrix algebra: encode the four
/// logical Pauli operators, apply the noise and the recovery, and read out on
/// the code space.
///
/// Without recovery only the zero-syndrome block has a decoded meaning; the
/// weight that leaves the code space is charged as a logical `X̄`, the same
/// scoring rule as the combinatorial path.
pub fn logical_ptm_dense(code: &StabilizerCode, noise: &PauliChannel, mode: RecoveryMode) -> Result<Superoperator> {
    check_dim(code.n_physical(), noise.n_qubits())?;
    check_size(code)?;
    let encoded = encoded_paulis(code);
    let pi = &encoded[0];
    let outputs: [CMatrix; 4] = std::array::from_fn(|b| {
        let out = apply_pauli_channel(noise, &encoded[b]);
        match mode {
            RecoveryMode::Lookup => lookup_recovery_map(code, &out),
            RecoveryMode::Trivial => pi * out * pi,
        }
    });
    let mut ptm = logical_ptm_from_outputs(&encoded, &outputs);
    if mode == RecoveryMode::Trivial {
        let lost = 1.0 - ptm[(0, 0)];
        for (k, sign) in [1.0, 1.0, -1.0, -1.0].into_iter().enumerate() {
            ptm[(k, k)] += lost * sign;
        }
    }
    Superoperator::new(ptm)
}

/// Lookup-recovery logical channel with an explicit ancilla register: one
/// ancilla per generator is prepared in `|0⟩`, coupled by `H · controlled-S_j · H`,
/// measured in the computational basis, used to control the recovery, and
/// traced out.
pub fn ancilla_logical_ptm(code: &StabilizerCode, noise: &PauliChannel) -> Result<Superoperator> {
    check_dim(code.n_physical(), noise.n_qubits())?;
    let n = code.n_physical();
    let r = code.n_generators();
    if n + r > DENSE_QUBIT_LIMIT {
        return Err(Error::Domain(format!("ancilla-coupled oracle needs {} qubits", n + r)));
    }
    let dd = 1usize << n;
    let da = 1usize << r;
    let id_data = CMatrix::identity(dd, dd);
    let id2 = CMatrix::identity(2, 2);
    let ket0 = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let ket1 = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);

    let ancilla_op = |j: usize, m: &CMatrix| -> CMatrix {
        let factors: Vec<CMatrix> = (0..r).map(|k| if k == j { m.clone() } else { id2.clone() }).collect();
        kron_all(&factors)
    };
    let h_layer = id_data.kronecker(&kron_all(&vec![hadamard_matrix(); r]));
    let mut coupling = h_layer.clone();
    for (j, g) in code.generators().iter().enumerate() {
        let controlled = id_data.kronecker(&ancilla_op(j, &ket0)) + pauli_matrix(g).kronecker(&ancilla_op(j, &ket1));
        coupling = controlled * coupling;
    }
    coupling = &h_layer * coupling;

    let mut ancilla_zero = CMatrix::zeros(da, da);
    ancilla_zero[(0, 0)] = c(1.0, 0.0);

    let encoded = encoded_paulis(code);
    let outputs: [CMatrix; 4] = std::array::from_fn(|b| {
        let noisy = apply_pauli_channel(noise, &encoded[b]);
        let joint = conj(&coupling, &noisy.kronecker(&ancilla_zero));
        // Measure ancillas, apply the controlled recovery, trace them out.
        let mut data = CMatrix::zeros(dd, dd);
        for k in 0..da {
            // Ancilla qubit 0 is the most significant bit of k.
            let bits = (0..r).fold(0u64, |acc, j| acc | ((((k >> (r - 1 - j)) & 1) as u64) << j));
            let rec = pauli_matrix(code.recovery(Syndrome::from_bits(bits, r)));
            let block = DMatrix::from_fn(dd, dd, |i, i2| joint[(i * da + k, i2 * da + k)]);
            data += conj(&rec, &block);
        }
        data
    });
    Superoperator::new(logical_ptm_from_outputs(&encoded, &outputs))
}

/// Codeword `|0̄⟩`: the +1 eigenvector of every generator and of `Z̄`.
pub fn logical_zero_state(code: &StabilizerCode) -> Result<DVector<Complex64>> {
    check_size(code)?;
    let dim = 1usize << code.n_physical();
    let pi = syndrome_projector(code, Syndrome::zero(code.n_generators()));
    let pz = (CMatrix::identity(dim, dim) + pauli_matrix(code.logical_z())) * c(0.5, 0.0);
    let proj = pz * pi;
    for k in 0..dim {
        let v = proj.column(k).into_owned();
        let norm = v.norm();
        if norm > 1e-6 {
            return Ok(v / c(norm, 0.0));
        }
    }
    Err(Error::InvalidCode("no logical zero state".into()))
}

/// Encoder unitary `V |a, s⟩ = T^s X̄^a |0̄⟩`, with the logical qubit first and
/// the syndrome register after it.
pub fn encoder_unitary(code: &StabilizerCode) -> Result<CMatrix> {
    let n = code.n_physical();
    let r = code.n_generators();
    let dim = 1usize << n;
    let zero = logical_zero_state(code)?;
    let lx = pauli_matrix(code.logical_x());
    let ds: Vec<CMatrix> = code.destabilizers().iter().map(pauli_matrix).collect();
    let mut v = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let a = col >> r;
        let mut psi = if a == 1 { &lx * &zero } else { zero.clone() };
        // Apply T_r first so the product reads T_1^{s_1} ⋯ T_r^{s_r}.
        for j in (0..r).rev() {
            if (col >> (r - 1 - j)) & 1 == 1 {
                psi = &ds[j] * psi;
            }
        }
        v.set_column(col, &psi);
    }
    Ok(v)
}

/// Dense encoded gate `V (U ⊗ 1) V†` for single-qubit group element `index`.
pub fn encoded_gate_unitary(code: &StabilizerCode, encoder: &CMatrix, index: usize) -> CMatrix {
    let r = code.n_generators();
    let u = single_qubit_clifford_unitary(index);
    let lifted = u.kronecker(&CMatrix::identity(1 << r, 1 << r));
    encoder * lifted * encoder.adjoint()
}

/// Replays a trial with density matrices under lookup recovery and returns the
/// probability of observing `|0̄⟩`. `gates` includes the final inverse.
pub fn replay_trial(code: &StabilizerCode, gates: &[usize], realization: &TrialRealization) -> Result<f64> {
    check_size(code)?;
    if gates.len() != realization.round_errors.len() {
        return Err(Error::Mismatch(format!(
            "{} gates but {} round errors",
            gates.len(),
            realization.round_errors.len()
        )));
    }
    let encoder = encoder_unitary(code)?;
    let zero = logical_zero_state(code)?;
    let target = &zero * zero.adjoint();
    let logical = |l: LogicalPauli| pauli_matrix(&code.embed_logical(l));
    let mut rho = conj(&logical(realization.prep_error), &target);
    for (&g, e) in gates.iter().zip(&realization.round_errors) {
        check_dim(code.n_physical(), e.n_qubits())?;
        rho = conj(&encoded_gate_unitary(code, &encoder, g), &rho);
        rho = conj(&pauli_matrix(e), &rho);
        rho = lookup_recovery_map(code, &rho);
    }
    rho = conj(&logical(realization.meas_error), &rho);
    Ok(trace(&(target * rho)).re)
}
