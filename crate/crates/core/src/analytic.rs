//! Closed forms for the three-qubit bit-flip code under independent flips `p`
//! plus correlated nearest-neighbour flips `q`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logical::ProbTriple;

/// A polynomial term `coef · pᵃ · qᵇ`.
type Term = (f64, i32, i32);

// Logical fidelity with lookup recovery. Setting q = 0 leaves
// 1 − 2p² + (4/3)p³: recovery fails only on two or more flips.
const F_REC: &[Term] = &[
    (1.0, 0, 0),
    (-2.0, 2, 0),
    (4.0 / 3.0, 3, 0),
    (-4.0 / 3.0, 0, 1),
    (8.0 / 3.0, 1, 1),
    (2.0 / 3.0, 0, 2),
    (-4.0 / 3.0, 1, 2),
];

// Logical fidelity without recovery: every non-identity error counts as a
// failure. At q = 0 this is 1 − 2p + 2p² − (2/3)p³ = 1 − (2/3)(1 − (1 − p)³).
const F_NOREC: &[Term] = &[
    (1.0, 0, 0),
    (-2.0, 1, 0),
    (2.0, 2, 0),
    (-2.0 / 3.0, 3, 0),
    (-4.0 / 3.0, 0, 1),
    (4.0, 1, 1),
    (2.0 / 3.0, 0, 2),
    (-8.0 / 3.0, 2, 1),
    (-2.0, 1, 2),
    (4.0 / 3.0, 2, 2),
];

// Single-qubit fidelity of the marginal channel on one qubit.
const F_PHYS_EST: &[Term] = &[(1.0, 0, 0), (-2.0 / 3.0, 1, 0), (-2.0 / 3.0, 0, 1), (4.0 / 3.0, 1, 1)];

fn eval(terms: &[Term], p: f64, q: f64) -> f64 {
    terms.iter().map(|&(c, a, b)| c * p.powi(a) * q.powi(b)).sum()
}

fn check_unit(name: &str, x: f64, hi: f64) -> Result<()> {
    if !(0.0..=hi).contains(&x) {
        return Err(Error::Domain(format!("{name} = {x} outside [0, {hi}]")));
    }
    Ok(())
}

fn check_pq(p: f64, q: f64, hi: f64) -> Result<()> {
    check_unit("p", p, hi)?;
    check_unit("q", q, hi)
}

pub fn f_rec(p: f64, q: f64) -> Result<f64> {
    check_pq(p, q, 1.0)?;
    Ok(eval(F_REC, p, q))
}

pub fn f_norec(p: f64, q: f64) -> Result<f64> {
    check_pq(p, q, 1.0)?;
    Ok(eval(F_NOREC, p, q))
}

/// Fidelity a single-qubit RB experiment on one of the three qubits reports.
pub fn f_phys_est(p: f64, q: f64) -> Result<f64> {
    check_pq(p, q, 1.0)?;
    Ok(eval(F_PHYS_EST, p, q))
}

/// Independent flip rate inferred from the single-qubit fidelity.
pub fn p_est(p: f64, q: f64) -> Result<f64> {
    if q == 0.0 {
        check_unit("p", p, 1.0)?;
        return Ok(p);
    }
    Ok(1.5 * (1.0 - f_phys_est(p, q)?))
}

/// Error of extrapolating the logical fidelity from physical RB under an
/// independence assumption.
pub fn delta_f(p: f64, q: f64) -> Result<f64> {
    check_pq(p, q, 0.5)?;
    Ok(eval(F_REC, p_est(p, q)?, 0.0) - eval(F_REC, p, q))
}

pub fn misestimation_report(p: f64, q: f64) -> Result<MisestimationReport> {
    check_pq(p, q, 0.5)?;
    let f_phys_est = f_phys_est(p, q)?;
    let p_est = p_est(p, q)?;
    Ok(MisestimationReport::new(f_phys_est, p_est, eval(F_REC, p_est, 0.0), eval(F_REC, p, q)))
}

/// Equal mixture of three channels, each flipping a single qubit with
/// probability `p`. Every error has weight one, so the true logical fidelity
/// is 1, but each qubit flips at rate `p/3`.
pub fn anticorrelated_report(p: f64) -> Result<MisestimationReport> {
    check_unit("p", p, 1.0)?;
    let f_phys_est = 1.0 - 2.0 * p / 9.0;
    let p_est = p / 3.0;
    Ok(MisestimationReport::new(f_phys_est, p_est, eval(F_REC, p_est, 0.0), 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MisestimationReport {
    pub f_phys_est: f64,
    pub p_est: f64,
    pub f_logical_extrapolated: f64,
    pub f_logical_true: f64,
    pub delta_f: f64,
}

impl MisestimationReport {
    fn new(f_phys_est: f64, p_est: f64, extrapolated: f64, truth: f64) -> MisestimationReport {
        MisestimationReport {
            f_phys_est,
            p_est,
            f_logical_extrapolated: extrapolated,
            f_logical_true: truth,
            delta_f: extrapolated - truth,
        }
    }
}

/// No-error, corrected and uncorrectable probabilities for independent flips.
pub fn error_probabilities_ind(p: f64) -> Result<ProbTriple> {
    Ok(ProbTriple::from_fidelities(f_rec(p, 0.0)?, f_norec(p, 0.0)?))
}

/// Flip rate where corrected and uncorrectable probabilities cross.
pub fn co_un_crossing() -> f64 {
    (9.0 - 21f64.sqrt()) / 10.0
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fig2Row {
    pub p: f64,
    pub probs: ProbTriple,
}

/// `p ∈ [0, 0.5]` in steps of 0.005, with `1/3` and the crossing point added.
pub fn fig2_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=100).map(|k| k as f64 * 0.005).collect();
    grid.push(1.0 / 3.0);
    grid.push(co_un_crossing());
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

pub fn fig2_data() -> Vec<Fig2Row> {
    fig2_grid()
        .into_iter()
        .map(|p| Fig2Row { p, probs: error_probabilities_ind(p).expect("grid inside [0, 1]") })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fig3Row {
    pub p: f64,
    pub q: f64,
    pub delta_f: f64,
}

pub const FIG3_POINTS: usize = 60;

/// Logarithmic grid from `1e-4` to `0.5`, endpoints included.
pub fn fig3_grid() -> Vec<f64> {
    let (lo, hi) = (1e-4f64.ln(), 0.5f64.ln());
    (0..FIG3_POINTS)
        .map(|k| match k {
            0 => 1e-4,
            k if k == FIG3_POINTS - 1 => 0.5,
            k => (lo + (hi - lo) * k as f64 / (FIG3_POINTS - 1) as f64).exp(),
        })
        .collect()
}

/// Rows for `q = p/10` then `q = p/100` at every grid point.
pub fn fig3_data() -> Vec<Fig3Row> {
    let mut rows = Vec::with_capacity(2 * FIG3_POINTS);
    for p in fig3_grid() {
        for q in [p / 10.0, p / 100.0] {
            rows.push(Fig3Row { p, q, delta_f: delta_f(p, q).expect("grid inside [0, 0.5]") });
        }
    }
    rows
}
