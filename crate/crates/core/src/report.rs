//! Plot-ready tables and oracle summaries.
//!
//! Floats are written with Rust's shortest round-trip formatting.

use std::io::Write;

use serde::Serialize;

use crate::analytic::{fig2_data, fig3_data};
use crate::error::{Error, Result};
use crate::logical::{error_probabilities, RecoveryMode};
use crate::rb::{exact_decay, RbConfig};

pub const FIG2_HEADER: [&str; 4] = ["p", "pr_no", "pr_co", "pr_un"];
pub const FIG3_HEADER: [&str; 3] = ["p", "q", "delta_f"];

/// Exact quantities for a code and noise model.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub code: String,
    pub recovery: RecoveryMode,
    #[serde(rename = "F_rec")]
    pub f_rec: f64,
    #[serde(rename = "F_norec")]
    pub f_norec: f64,
    pub pr_no: f64,
    pub pr_co: f64,
    pub pr_un: f64,
    /// Decay parameter under the configured recovery.
    #[serde(rename = "p_L")]
    pub p_l: f64,
    #[serde(rename = "A_L")]
    pub a_l: f64,
    #[serde(rename = "B_L")]
    pub b_l: f64,
}

/// Oracle values for one round of the configuration's noise, including its
/// recovery-round noise and SPAM.
pub fn oracle_report(config: &RbConfig) -> Result<OracleReport> {
    let probs = error_probabilities(&config.code, &config.round_noise()?)?;
    let (a, p, b) = exact_decay(config)?;
    Ok(OracleReport {
        code: config.code.name().to_string(),
        recovery: config.recovery,
        f_rec: 1.0 - probs.pr_un,
        f_norec: probs.pr_no,
        pr_no: probs.pr_no,
        pr_co: probs.pr_co,
        pr_un: probs.pr_un,
        p_l: p,
        a_l: a,
        b_l: b,
    })
}

fn write_table<W: Write>(w: W, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let map = |e: csv::Error| Error::Dataset(e.to_string());
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(map)?;
    for row in rows {
        out.write_record(row.iter().map(f64::to_string)).map_err(map)?;
    }
    out.flush()?;
    Ok(())
}

/// No-error, corrected and uncorrectable probabilities against `p`.
pub fn write_fig2<W: Write>(w: W) -> Result<()> {
    write_table(
        w,
        &FIG2_HEADER,
        fig2_data().into_iter().map(|r| vec![r.p, r.probs.pr_no, r.probs.pr_co, r.probs.pr_un]),
    )
}

/// Fidelity misestimate against `p` for `q = p/10` and `q = p/100`.
pub fn write_fig3<W: Write>(w: W) -> Result<()> {
    write_table(w, &FIG3_HEADER, fig3_data().into_iter().map(|r| vec![r.p, r.q, r.delta_f]))
}
