//! Exact logical channels of a code under Pauli noise.
//!
//! For every physical error `E` of the noise channel the syndrome is computed,
//! the recovery `R(s)` applied, and the residual `R(s)·E` mapped to a logical
//! Pauli. Accumulating the weights gives a single-qubit Pauli channel, whose
//! transfer matrix is the logical channel.
//!
//! Residuals are mapped to logical Paulis as follows:
//!
//! * zero syndrome: commutation with `X̄` and `Z̄` decides `I`, `X`, `Y` or `Z`;
//! * nonzero syndrome (only possible without recovery): the round is scored as
//!   a logical `X̄`. An uncorrected detectable error leaves the code space, so
//!   the prepared codeword is never observed; charging it as a logical flip
//!   makes the no-recovery fidelity `1 − (2/3)·Pr[any error]`.

use serde::{Deserialize, Serialize};

use crate::channel::PauliChannel;
use crate::clifford::SingleQubitCliffords;
use crate::code::{LogicalPauli, ResidualClass, StabilizerCode};
use crate::error::{check_dim, Error, Result};
use crate::pauli::PauliOperator;
use crate::ptm::{average_gate_fidelity, channel_to_ptm, clifford_ptm, depolarizing_parameter, QubitOperator, Superoperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryMode {
    /// Apply the code's lookup-table correction.
    Lookup,
    /// `R(s) = 1` for every syndrome.
    Trivial,
}

/// Averaged code properties: no error, correctable error, uncorrectable error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbTriple {
    pub pr_no: f64,
    pub pr_co: f64,
    pub pr_un: f64,
}

impl ProbTriple {
    /// From the logical fidelities with and without recovery.
    pub fn from_fidelities(f_rec: f64, f_norec: f64) -> ProbTriple {
        ProbTriple { pr_no: f_norec, pr_co: f_rec - f_norec, pr_un: 1.0 - f_rec }
    }

    pub fn sum(&self) -> f64 {
        self.pr_no + self.pr_co + self.pr_un
    }
}

/// Logical action of one round's residual frame under the given recovery.
pub fn residual_logical_action(code: &StabilizerCode, residual: &PauliOperator) -> LogicalPauli {
    match code.classify_unchecked(residual) {
        ResidualClass::Detectable(_) => LogicalPauli::X,
        _ => code.logical_action_unchecked(residual),
    }
}

/// Recovery applied to a physical error, `R(s(E))·E` (or `E` when trivial).
pub fn apply_recovery(code: &StabilizerCode, error: &PauliOperator, mode: RecoveryMode) -> PauliOperator {
    match mode {
        RecoveryMode::Trivial => error.clone(),
        RecoveryMode::Lookup => {
            let mut r = code.recovery(code.syndrome_unchecked(error)).clone();
            r.mul_assign_unchecked(error);
            r
        }
    }
}

/// Logical Pauli weights `[w_I, w_X, w_Y, w_Z]` for one noisy round.
pub fn logical_distribution(
    code: &StabilizerCode,
    noise: &PauliChannel,
    mode: RecoveryMode,
) -> Result<[f64; 4]> {
    check_dim(code.n_physical(), noise.n_qubits())?;
    let mut w = [0.0; 4];
    for (e, p) in noise.support() {
        let residual = apply_recovery(code, e, mode);
        w[residual_logical_action(code, &residual).index()] += p;
    }
    Ok(w)
}

/// The logical channel as a single-qubit Pauli channel.
pub fn logical_channel(code: &StabilizerCode, noise: &PauliChannel, mode: RecoveryMode) -> Result<PauliChannel> {
    let w = logical_distribution(code, noise, mode)?;
    // Renormalize away rounding so the channel validates at 1e-12.
    let total: f64 = w.iter().sum();
    PauliChannel::from_strings(1, ["I", "X", "Y", "Z"].into_iter().zip(w.map(|x| x / total)))
}

/// 4×4 transfer matrix of the logical channel.
pub fn logical_channel_ptm(code: &StabilizerCode, noise: &PauliChannel, mode: RecoveryMode) -> Result<Superoperator> {
    Ok(channel_to_ptm(&logical_channel(code, noise, mode)?))
}

pub fn logical_fidelity(code: &StabilizerCode, noise: &PauliChannel, mode: RecoveryMode) -> Result<f64> {
    Ok(average_gate_fidelity(&logical_channel_ptm(code, noise, mode)?))
}

/// `Pr(No) = F_norec`, `Pr(Co) = F_rec − F_norec`, `Pr(Un) = 1 − F_rec`.
pub fn error_probabilities(code: &StabilizerCode, noise: &PauliChannel) -> Result<ProbTriple> {
    let f_rec = logical_fidelity(code, noise, RecoveryMode::Lookup)?;
    let f_norec = logical_fidelity(code, noise, RecoveryMode::Trivial)?;
    Ok(ProbTriple::from_fidelities(f_rec, f_norec))
}

/// Clifford twirl of a single-qubit channel: the depolarizing channel with the
/// same average fidelity. Returns its parameter `p = (2F − 1)` and PTM.
pub fn twirl_channel(s: &Superoperator) -> Result<(f64, Superoperator)> {
    if s.dimension() != 2 {
        return Err(Error::Dimension { expected: 2, found: s.dimension() });
    }
    let p = depolarizing_parameter(s);
    Ok((p, Superoperator::from_diagonal(&[1.0, p, p, p])?))
}

/// The twirl computed literally: `(1/24) Σ_C R(C)ᵀ · R · R(C)`.
pub fn twirl_by_group_average(s: &Superoperator) -> Result<Superoperator> {
    if s.dimension() != 2 {
        return Err(Error::Dimension { expected: 2, found: s.dimension() });
    }
    let mut acc = nalgebra::DMatrix::<f64>::zeros(4, 4);
    let group = SingleQubitCliffords::get();
    for c in group.elements() {
        let rc = clifford_ptm(c)?;
        acc += rc.matrix().transpose() * s.matrix() * rc.matrix();
    }
    Superoperator::new(acc / group.elements().len() as f64)
}

/// SPAM constants of the decay `A pᵐ + B`:
/// `A = Tr(Q_eff Λ_L[ρ_L − I/2])`, `B = Tr(Q_eff Λ_L[I/2])` with
/// `ρ_L = Λ_P(ρ)` and `Q_eff = Λ_M†(Q)`.
pub fn spam_constants(
    lambda_l: &Superoperator,
    lambda_p: &PauliChannel,
    lambda_m: &PauliChannel,
    rho: &QubitOperator,
    q_effect: &QubitOperator,
) -> Result<(f64, f64)> {
    if lambda_l.dimension() != 2 {
        return Err(Error::Dimension { expected: 2, found: lambda_l.dimension() });
    }
    check_dim(1, lambda_p.n_qubits())?;
    check_dim(1, lambda_m.n_qubits())?;
    rho.validate_state()?;
    q_effect.validate_effect()?;
    let rho_l = channel_to_ptm(lambda_p).apply(rho)?;
    let q_eff = channel_to_ptm(lambda_m).dual().apply(q_effect)?;
    let half_identity = QubitOperator::maximally_mixed();
    let a = q_eff.trace_product(&lambda_l.apply(&rho_l.sub(&half_identity))?);
    let b = q_eff.trace_product(&lambda_l.apply(&half_identity)?);
    Ok((a, b))
}

/// Rebuilds the lookup-recovery logical channel with an explicit ancilla
/// register (coherent syndrome copy, ancilla measurement, controlled
/// recovery, ancilla trace-out) and compares it with
/// [`logical_channel_ptm`] at `1e-12`.
pub fn ancilla_equivalence_check(code: &StabilizerCode, noise: &PauliChannel) -> Result<bool> {
    let direct = logical_channel_ptm(code, noise, RecoveryMode::Lookup)?;
    let coupled = crate::dense::ancilla_logical_ptm(code, noise)?;
    Ok(direct.max_abs_diff(&coupled) <= 1e-12)
}
