//! Logical randomized benchmarking by Pauli-frame Monte Carlo, plus exact
//! sequence averages for validation.
//!
//! A trial prepares `|0̄⟩`, applies `m` random encoded Cliffords and the
//! inverse of their product, each followed by a noisy round and recovery, and
//! measures `|0̄⟩⟨0̄|`. Since the noise is Pauli and the gates are Clifford, the
//! state is always `F |0̄⟩` for a Pauli frame `F`; the trial survives iff the
//! final frame commutes with `Z̄`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use nalgebra::{Matrix4, Vector4};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{compose_channels, PauliChannel};
use crate::clifford::{CliffordTableau, SingleQubitCliffords};
use crate::code::{trivial_code, LogicalPauli, StabilizerCode, Syndrome};
use crate::error::{check_dim, Error, Result};
use crate::logical::{logical_channel_ptm, residual_logical_action, spam_constants, twirl_channel, RecoveryMode};
use crate::pauli::PauliOperator;
use crate::ptm::{channel_to_ptm, clifford_ptm, QubitOperator, Superoperator};
use crate::rng::{enter_round, sequence_rng, shot_rng};

/// Largest `m` for which [`exact_sequence_average`] enumerates all `24^m` words.
pub const BRUTE_FORCE_LIMIT: usize = 4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryTiming {
    /// Recovery is applied in every round.
    #[default]
    Concurrent,
    /// Syndromes are recorded and the corrections folded in after the last
    /// round, propagated through the intervening gates.
    PostProcessed,
}

/// State-preparation, measurement and recovery-round noise.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpamSpec {
    /// Logical Pauli channel after preparing `|0̄⟩`.
    pub prep: Option<PauliChannel>,
    /// Logical Pauli channel before measuring.
    pub meas: Option<PauliChannel>,
    /// Physical noise of the recovery round, applied after the gate noise and
    /// before the syndrome is read.
    pub recovery_noise: Option<PauliChannel>,
}

#[derive(Clone, Debug)]
pub struct RbConfig {
    pub code: StabilizerCode,
    pub noise: PauliChannel,
    pub recovery: RecoveryMode,
    pub recovery_timing: RecoveryTiming,
    pub spam: SpamSpec,
    pub sequence_lengths: Vec<usize>,
    pub sequences_per_length: usize,
    pub shots_per_sequence: usize,
    pub master_seed: u64,
}

impl RbConfig {
    /// Configuration with no SPAM, concurrent recovery and the given design.
    pub fn new(
        code: StabilizerCode,
        noise: PauliChannel,
        recovery: RecoveryMode,
        sequence_lengths: Vec<usize>,
        sequences_per_length: usize,
        shots_per_sequence: usize,
        master_seed: u64,
    ) -> RbConfig {
        RbConfig {
            code,
            noise,
            recovery,
            recovery_timing: RecoveryTiming::Concurrent,
            spam: SpamSpec::default(),
            sequence_lengths,
            sequences_per_length,
            shots_per_sequence,
            master_seed,
        }
    }

    /// Checks channel dimensions and the experimental design, including the
    /// three distinct lengths a decay fit needs.
    pub fn validate(&self) -> Result<()> {
        self.validate_channels()?;
        if self.sequence_lengths.contains(&0) {
            return Err(Error::InsufficientDesign("sequence lengths must be at least 1".into()));
        }
        let distinct: BTreeSet<_> = self.sequence_lengths.iter().collect();
        if distinct.len() < 3 {
            return Err(Error::InsufficientDesign(format!(
                "{} distinct sequence lengths given, fitting needs at least 3",
                distinct.len()
            )));
        }
        if distinct.len() != self.sequence_lengths.len() {
            return Err(Error::InsufficientDesign("sequence lengths repeat".into()));
        }
        if self.sequences_per_length == 0 || self.shots_per_sequence == 0 {
            return Err(Error::InsufficientDesign("sequences per length and shots must be at least 1".into()));
        }
        Ok(())
    }

    fn validate_channels(&self) -> Result<()> {
        check_dim(self.code.n_physical(), self.noise.n_qubits())?;
        if let Some(c) = &self.spam.recovery_noise {
            check_dim(self.code.n_physical(), c.n_qubits())?;
        }
        for c in [&self.spam.prep, &self.spam.meas].into_iter().flatten() {
            check_dim(1, c.n_qubits())?;
        }
        Ok(())
    }

    /// Physical noise of one full round.
    pub fn round_noise(&self) -> Result<PauliChannel> {
        match &self.spam.recovery_noise {
            Some(r) => compose_channels(r, &self.noise),
            None => Ok(self.noise.clone()),
        }
    }

    pub fn descriptor(&self) -> RunDescriptor {
        let spam = [("prep", &self.spam.prep), ("meas", &self.spam.meas), ("recovery_noise", &self.spam.recovery_noise)]
            .into_iter()
            .filter_map(|(k, c)| c.as_ref().map(|c| (k.to_string(), channel_weights(c))))
            .collect();
        RunDescriptor {
            code: self.code.name().to_string(),
            noise: channel_weights(&self.noise),
            recovery: self.recovery,
            recovery_timing: self.recovery_timing,
            spam,
            seed: self.master_seed,
        }
    }
}

fn channel_weights(c: &PauliChannel) -> BTreeMap<String, f64> {
    c.support().iter().map(|(p, w)| (p.letters(), *w)).collect()
}

/// What a dataset was simulated from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunDescriptor {
    pub code: String,
    pub noise: BTreeMap<String, f64>,
    pub recovery: RecoveryMode,
    pub recovery_timing: RecoveryTiming,
    #[serde(default)]
    pub spam: BTreeMap<String, BTreeMap<String, f64>>,
    pub seed: u64,
}

impl RunDescriptor {
    /// Same code, noise and SPAM; recovery, timing and seed may differ.
    pub fn same_experiment(&self, other: &RunDescriptor) -> bool {
        self.code == other.code && self.noise == other.noise && self.spam == other.spam
    }
}

/// Indices into the single-qubit Clifford group, the inverse last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordSequence {
    gates: Vec<usize>,
}

impl CliffordSequence {
    /// Appends the inverse of `word`.
    pub fn from_word(word: &[usize]) -> Result<CliffordSequence> {
        let group = SingleQubitCliffords::get();
        if let Some(&bad) = word.iter().find(|&&g| g >= SingleQubitCliffords::ORDER) {
            return Err(Error::Domain(format!("gate index {bad} outside the group")));
        }
        let total = word.iter().fold(0, |acc, &g| group.then(acc, g));
        let mut gates = word.to_vec();
        gates.push(group.inverse(total));
        Ok(CliffordSequence { gates })
    }

    /// Sequence length `m` (not counting the inverse).
    pub fn len(&self) -> usize {
        self.gates.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All `m + 1` gate indices.
    pub fn gates(&self) -> &[usize] {
        &self.gates
    }

    pub fn inverse_index(&self) -> usize {
        self.gates[self.gates.len() - 1]
    }

    pub fn tableaux(&self) -> Vec<CliffordTableau> {
        let group = SingleQubitCliffords::get();
        self.gates[..self.len()].iter().map(|&g| group.element(g).clone()).collect()
    }

    pub fn inverse(&self) -> CliffordTableau {
        SingleQubitCliffords::get().element(self.inverse_index()).clone()
    }
}

/// `m` uniform group elements and their inverse.
pub fn generate_sequence<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<CliffordSequence> {
    if m == 0 {
        return Err(Error::Domain("sequence length must be at least 1".into()));
    }
    let word: Vec<usize> = (0..m).map(|_| rng.gen_range(0..SingleQubitCliffords::ORDER)).collect();
    CliffordSequence::from_word(&word)
}

/// The random choices of one trial: the logical preparation error, the
/// physical error of each of the `m + 1` rounds (gate and recovery-round noise
/// multiplied), and the logical measurement error.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRealization {
    pub prep_error: LogicalPauli,
    pub round_errors: Vec<PauliOperator>,
    pub meas_error: LogicalPauli,
}

impl TrialRealization {
    pub fn noiseless(n: usize, rounds: usize) -> TrialRealization {
        TrialRealization {
            prep_error: LogicalPauli::I,
            round_errors: vec![PauliOperator::identity(n); rounds],
            meas_error: LogicalPauli::I,
        }
    }
}

/// Frame simulator bound to one configuration.
#[derive(Clone, Debug)]
pub struct LrbSimulator {
    config: RbConfig,
    encoded: Vec<CliffordTableau>,
}

impl LrbSimulator {
    pub fn new(config: RbConfig) -> Result<LrbSimulator> {
        config.validate_channels()?;
        let encoded = SingleQubitCliffords::get()
            .elements()
            .iter()
            .map(|u| config.code.encoded_gate(u))
            .collect::<Result<Vec<_>>>()?;
        Ok(LrbSimulator { config, encoded })
    }

    pub fn config(&self) -> &RbConfig {
        &self.config
    }

    /// Draws the errors of a trial with `rounds` noisy rounds. Stream 0 of
    /// `rng` feeds the preparation, stream `r` round `r`, and stream
    /// `rounds + 1` the measurement.
    pub fn sample_realization(&self, rounds: usize, rng: &mut ChaCha8Rng) -> TrialRealization {
        let spam = &self.config.spam;
        let draw_logical = |c: &Option<PauliChannel>, rng: &mut ChaCha8Rng| {
            c.as_ref().map_or(LogicalPauli::I, |c| LogicalPauli::from_pauli1(c.sample(rng).get(0)))
        };
        enter_round(rng, 0);
        let prep_error = draw_logical(&spam.prep, rng);
        let round_errors = (1..=rounds)
            .map(|r| {
                enter_round(rng, r as u64);
                let mut e = self.config.noise.sample(rng).clone();
                if let Some(c) = &spam.recovery_noise {
                    e.mul_assign_unchecked(c.sample(rng));
                }
                e
            })
            .collect();
        enter_round(rng, rounds as u64 + 1);
        let meas_error = draw_logical(&spam.meas, rng);
        TrialRealization { prep_error, round_errors, meas_error }
    }

    /// Survival of one realization under the configured recovery and timing.
    pub fn evaluate(&self, seq: &CliffordSequence, r: &TrialRealization) -> Result<bool> {
        if seq.gates().len() != r.round_errors.len() {
            return Err(Error::Mismatch(format!(
                "{} gates but {} round errors",
                seq.gates().len(),
                r.round_errors.len()
            )));
        }
        let n = self.config.code.n_physical();
        if let Some(e) = r.round_errors.iter().find(|e| e.n_qubits() != n) {
            return Err(Error::Dimension { expected: n, found: e.n_qubits() });
        }
        Ok(self.evaluate_unchecked(seq.gates(), r))
    }

    fn evaluate_unchecked(&self, gates: &[usize], r: &TrialRealization) -> bool {
        let code = &self.config.code;
        let mut frame = code.embed_logical(r.prep_error);
        match (self.config.recovery, self.config.recovery_timing) {
            (RecoveryMode::Trivial, _) => {
                // Syndrome information is discarded by the refresh; only the
                // round's logical action survives.
                for (&g, e) in gates.iter().zip(&r.round_errors) {
                    frame = self.encoded[g].conjugate_unchecked(&frame);
                    frame.mul_assign_unchecked(&code.embed_logical(residual_logical_action(code, e)));
                }
            }
            (RecoveryMode::Lookup, RecoveryTiming::Concurrent) => {
                for (&g, e) in gates.iter().zip(&r.round_errors) {
                    frame = self.encoded[g].conjugate_unchecked(&frame);
                    frame.mul_assign_unchecked(e);
                    let s = code.syndrome_unchecked(&frame);
                    frame.mul_assign_unchecked(code.recovery(s));
                }
            }
            (RecoveryMode::Lookup, RecoveryTiming::PostProcessed) => {
                // The register keeps accumulating syndrome; each round's
                // measurement reveals the change since the previous one.
                let mut previous = Syndrome::zero(code.n_generators());
                let mut increments = Vec::with_capacity(gates.len());
                for (&g, e) in gates.iter().zip(&r.round_errors) {
                    frame = self.encoded[g].conjugate_unchecked(&frame);
                    frame.mul_assign_unchecked(e);
                    let s = code.syndrome_unchecked(&frame);
                    increments.push(s.xor(previous));
                    previous = s;
                }
                let mut correction = PauliOperator::identity(code.n_physical());
                for (&g, &inc) in gates.iter().zip(&increments) {
                    correction = self.encoded[g].conjugate_unchecked(&correction);
                    correction.mul_assign_unchecked(code.recovery(inc));
                }
                frame.mul_assign_unchecked(&correction);
            }
        }
        frame.mul_assign_unchecked(&code.embed_logical(r.meas_error));
        !frame.anticommutes_unchecked(code.logical_z())
    }

    pub fn run_trial(&self, seq: &CliffordSequence, rng: &mut ChaCha8Rng) -> bool {
        let r = self.sample_realization(seq.gates().len(), rng);
        self.evaluate_unchecked(seq.gates(), &r)
    }

    /// Survival together with the realization that produced it.
    pub fn run_trial_recorded(&self, seq: &CliffordSequence, rng: &mut ChaCha8Rng) -> (bool, TrialRealization) {
        let r = self.sample_realization(seq.gates().len(), rng);
        (self.evaluate_unchecked(seq.gates(), &r), r)
    }

    /// Survivals of sequence `i` at length `m` over all shots.
    pub fn run_sequence(&self, m: usize, i: usize) -> Result<SurvivalRow> {
        let seed = self.config.master_seed;
        let seq = generate_sequence(m, &mut sequence_rng(seed, m, i))?;
        let shots = self.config.shots_per_sequence;
        let survivals = (0..shots).filter(|&t| self.run_trial(&seq, &mut shot_rng(seed, m, i, t))).count();
        Ok(SurvivalRow { m, sequence_index: i, survivals: survivals as u64, shots: shots as u64 })
    }
}

/// One trial with a freshly built simulator.
pub fn run_lrb_trial(config: &RbConfig, seq: &CliffordSequence, rng: &mut ChaCha8Rng) -> Result<bool> {
    Ok(LrbSimulator::new(config.clone())?.run_trial(seq, rng))
}

/// The full `(m, sequence, shot)` experiment. Work is spread over the current
/// rayon pool; the result does not depend on its size.
pub fn simulate_lrb(config: &RbConfig) -> Result<SurvivalDataset> {
    config.validate()?;
    let sim = LrbSimulator::new(config.clone())?;
    let jobs: Vec<(usize, usize)> = config
        .sequence_lengths
        .iter()
        .flat_map(|&m| (0..config.sequences_per_length).map(move |i| (m, i)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(m, i)| sim.run_sequence(m, i))
        .collect::<Result<Vec<_>>>()?;
    SurvivalDataset::new(rows, Some(config.descriptor()))
}

/// Single-qubit RB of `channel`: the same experiment on the one-qubit code
/// with no stabilizers. The design, seed and logical SPAM of `config` are
/// kept; its code, noise and recovery settings are ignored.
pub fn simulate_physical_rb(channel: &PauliChannel, config: &RbConfig) -> Result<SurvivalDataset> {
    check_dim(1, channel.n_qubits())?;
    let physical = RbConfig {
        code: trivial_code(),
        noise: channel.clone(),
        recovery: RecoveryMode::Trivial,
        recovery_timing: RecoveryTiming::Concurrent,
        spam: SpamSpec { prep: config.spam.prep.clone(), meas: config.spam.meas.clone(), recovery_noise: None },
        ..config.clone()
    };
    simulate_lrb(&physical)
}

/// Logical channel of one round and the SPAM transfer matrices.
struct ExactModel {
    lambda_l: Superoperator,
    prep: PauliChannel,
    meas: PauliChannel,
}

impl ExactModel {
    fn new(config: &RbConfig) -> Result<ExactModel> {
        config.validate_channels()?;
        let lambda_l = logical_channel_ptm(&config.code, &config.round_noise()?, config.recovery)?;
        let prep = config.spam.prep.clone().unwrap_or_else(|| PauliChannel::identity(1));
        let meas = config.spam.meas.clone().unwrap_or_else(|| PauliChannel::identity(1));
        Ok(ExactModel { lambda_l, prep, meas })
    }

    fn matrix4(s: &Superoperator) -> Matrix4<f64> {
        Matrix4::from_fn(|a, b| s.get(a, b))
    }

    fn rho(&self) -> Result<Vector4<f64>> {
        let v = channel_to_ptm(&self.prep).apply(&QubitOperator::zero_state())?;
        Ok(Vector4::from(v.traces()) / std::f64::consts::SQRT_2)
    }

    fn effect(&self) -> Result<Vector4<f64>> {
        let v = channel_to_ptm(&self.meas).dual().apply(&QubitOperator::zero_state())?;
        Ok(Vector4::from(v.traces()) / std::f64::consts::SQRT_2)
    }
}

/// Expected survival at length `m`, averaging the transfer-matrix product over
/// every one of the `24^m` gate words.
pub fn exact_sequence_average(config: &RbConfig, m: usize) -> Result<f64> {
    if m > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { m, limit: BRUTE_FORCE_LIMIT });
    }
    if m == 0 {
        return Err(Error::Domain("sequence length must be at least 1".into()));
    }
    let model = ExactModel::new(config)?;
    let lambda = ExactModel::matrix4(&model.lambda_l);
    let group = SingleQubitCliffords::get();
    let gates = group
        .elements()
        .iter()
        .map(|c| Ok(lambda * ExactModel::matrix4(&clifford_ptm(c)?)))
        .collect::<Result<Vec<Matrix4<f64>>>>()?;
    let effect = model.effect()?;

    // Depth-first over words, carrying the state and the running product.
    fn walk(
        depth: usize,
        state: Vector4<f64>,
        total: usize,
        gates: &[Matrix4<f64>],
        effect: &Vector4<f64>,
        group: &SingleQubitCliffords,
    ) -> f64 {
        if depth == 0 {
            let last = gates[group.inverse(total)] * state;
            return effect.dot(&last);
        }
        (0..SingleQubitCliffords::ORDER)
            .map(|g| walk(depth - 1, gates[g] * state, group.then(total, g), gates, effect, group))
            .sum()
    }
    let sum = walk(m, model.rho()?, 0, &gates, &effect, group);
    Ok(sum / (SingleQubitCliffords::ORDER as f64).powi(m as i32))
}

/// Expected survival from the twirled round channel:
/// `Tr(Q_eff Λ_L W^m ρ_L)` with `W` the Clifford twirl of `Λ_L`.
pub fn exact_sequence_average_twirl(config: &RbConfig, m: usize) -> Result<f64> {
    let model = ExactModel::new(config)?;
    let lambda = ExactModel::matrix4(&model.lambda_l);
    let (_, w) = twirl_channel(&model.lambda_l)?;
    let w = ExactModel::matrix4(&w);
    let state = lambda * w.pow(m as u32) * model.rho()?;
    Ok(model.effect()?.dot(&state))
}

/// Exact decay constants `(A, p, B)` for the configuration.
pub fn exact_decay(config: &RbConfig) -> Result<(f64, f64, f64)> {
    let model = ExactModel::new(config)?;
    let (p, _) = twirl_channel(&model.lambda_l)?;
    let (a, b) = spam_constants(
        &model.lambda_l,
        &model.prep,
        &model.meas,
        &QubitOperator::zero_state(),
        &QubitOperator::zero_state(),
    )?;
    Ok((a, p, b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SurvivalRow {
    pub m: usize,
    pub sequence_index: usize,
    pub survivals: u64,
    pub shots: u64,
}

impl SurvivalRow {
    pub fn fraction(&self) -> f64 {
        self.survivals as f64 / self.shots as f64
    }
}

pub const DATASET_HEADER: [&str; 4] = ["m", "sequence_index", "survivals", "shots"];

/// Survival counts, sorted by `(m, sequence_index)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SurvivalDataset {
    rows: Vec<SurvivalRow>,
    descriptor: Option<RunDescriptor>,
}

impl SurvivalDataset {
    pub fn new(mut rows: Vec<SurvivalRow>, descriptor: Option<RunDescriptor>) -> Result<SurvivalDataset> {
        rows.sort();
        for w in rows.windows(2) {
            if (w[0].m, w[0].sequence_index) == (w[1].m, w[1].sequence_index) {
                return Err(Error::Dataset(format!(
                    "duplicate row for m = {}, sequence {}",
                    w[0].m, w[0].sequence_index
                )));
            }
        }
        for r in &rows {
            if r.shots == 0 || r.survivals > r.shots {
                return Err(Error::Dataset(format!(
                    "m = {}, sequence {}: {} survivals out of {} shots",
                    r.m, r.sequence_index, r.survivals, r.shots
                )));
            }
        }
        Ok(SurvivalDataset { rows, descriptor })
    }

    pub fn rows(&self) -> &[SurvivalRow] {
        &self.rows
    }

    pub fn descriptor(&self) -> Option<&RunDescriptor> {
        self.descriptor.as_ref()
    }

    pub fn with_descriptor(mut self, d: Option<RunDescriptor>) -> SurvivalDataset {
        self.descriptor = d;
        self
    }

    /// Distinct sequence lengths, ascending.
    pub fn lengths(&self) -> Vec<usize> {
        let mut ms: Vec<usize> = self.rows.iter().map(|r| r.m).collect();
        ms.dedup();
        ms
    }

    /// Rows grouped by `m`.
    pub fn by_length(&self) -> BTreeMap<usize, Vec<SurvivalRow>> {
        let mut map: BTreeMap<usize, Vec<SurvivalRow>> = BTreeMap::new();
        for r in &self.rows {
            map.entry(r.m).or_default().push(*r);
        }
        map
    }

    /// `q̄(m)`: the mean over sequences of each sequence's survival fraction.
    pub fn mean_survival(&self) -> BTreeMap<usize, f64> {
        self.by_length()
            .into_iter()
            .map(|(m, rows)| (m, rows.iter().map(SurvivalRow::fraction).sum::<f64>() / rows.len() as f64))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let map = |e: csv::Error| Error::Dataset(e.to_string());
        out.write_record(DATASET_HEADER).map_err(map)?;
        for r in &self.rows {
            out.write_record([
                r.m.to_string(),
                r.sequence_index.to_string(),
                r.survivals.to_string(),
                r.shots.to_string(),
            ])
            .map_err(map)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_csv<R: Read>(r: R) -> Result<SurvivalDataset> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let header = reader.headers().map_err(|e| Error::Dataset(format!("line 1: {e}")))?;
        if header.iter().collect::<Vec<_>>() != DATASET_HEADER {
            return Err(Error::Dataset(format!(
                "line 1: header must be {}, found {}",
                DATASET_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for record in reader.deserialize::<SurvivalRow>() {
            let row = record.map_err(|e| {
                let line = e.position().map(|p| p.line().to_string()).unwrap_or_else(|| "?".into());
                Error::Dataset(format!("line {line}: {e}"))
            })?;
            rows.push(row);
        }
        SurvivalDataset::new(rows, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::bitflip_independent;
    use crate::code::bitflip_code;
    use rand::SeedableRng;

    fn config(p: f64, recovery: RecoveryMode) -> RbConfig {
        RbConfig::new(
            bitflip_code(),
            bitflip_independent(p, 3).unwrap(),
            recovery,
            vec![1, 2, 4],
            3,
            5,
            11,
        )
    }

    fn pauli(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn sequences_compose_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in [1, 2, 7, 30] {
            let seq = generate_sequence(m, &mut rng).unwrap();
            let total = seq
                .tableaux()
                .iter()
                .chain(std::iter::once(&seq.inverse()))
                .fold(CliffordTableau::identity(1), |acc, t| acc.then(t).unwrap());
            assert!(total.is_identity());
        }
        // H is its own inverse.
        let h = SingleQubitCliffords::get().index_of(&CliffordTableau::hadamard(1, 0).unwrap()).unwrap();
        assert_eq!(CliffordSequence::from_word(&[h]).unwrap().inverse_index(), h);
    }

    #[test]
    fn injected_errors() {
        let seq = CliffordSequence::from_word(&[5, 17]).unwrap();
        let mut r = TrialRealization::noiseless(3, 3);
        let trivial = LrbSimulator::new(config(0.0, RecoveryMode::Trivial)).unwrap();
        let lookup = LrbSimulator::new(config(0.0, RecoveryMode::Lookup)).unwrap();
        assert!(trivial.evaluate(&seq, &r).unwrap());
        r.round_errors[2] = pauli("XXX");
        assert!(!trivial.evaluate(&seq, &r).unwrap());
        r.round_errors[2] = pauli("XII");
        assert!(lookup.evaluate(&seq, &r).unwrap());
        r.round_errors[2] = pauli("XXI");
        assert!(!lookup.evaluate(&seq, &r).unwrap());
    }

    #[test]
    fn zero_noise_always_survives() {
        let data = simulate_lrb(&config(0.0, RecoveryMode::Lookup)).unwrap();
        assert!(data.rows().iter().all(|r| r.survivals == r.shots));
        assert_eq!(data.rows().len(), 9);
    }

    #[test]
    fn design_validation() {
        let mut c = config(0.1, RecoveryMode::Lookup);
        c.sequence_lengths = vec![1, 2];
        assert!(matches!(simulate_lrb(&c), Err(Error::InsufficientDesign(_))));
        c.sequence_lengths = vec![0, 1, 2];
        assert!(c.validate().is_err());
    }

    #[test]
    fn exact_paths_agree() {
        let c = config(0.1, RecoveryMode::Lookup);
        let (a, p, b) = exact_decay(&c).unwrap();
        for m in 1..=3 {
            let brute = exact_sequence_average(&c, m).unwrap();
            let twirl = exact_sequence_average_twirl(&c, m).unwrap();
            let model = a * p.powi(m as i32) + b;
            assert!((brute - model).abs() < 1e-12, "m={m}: {brute} vs {model}");
            assert!((twirl - model).abs() < 1e-12);
        }
        assert!(matches!(exact_sequence_average(&c, 5), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn csv_round_trip() {
        let data = simulate_lrb(&config(0.1, RecoveryMode::Lookup)).unwrap();
        let text = data.to_csv_string();
        assert!(text.starts_with("m,sequence_index,survivals,shots\n"));
        let back = SurvivalDataset::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back.rows(), data.rows());
    }

    #[test]
    fn csv_errors_name_the_line() {
        let bad = "m,sequence_index,survivals,shots\n1,0,3,5\n1,1,x,5\n";
        let err = SurvivalDataset::read_csv(bad.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        let bad = "m,seq,survivals,shots\n";
        assert!(SurvivalDataset::read_csv(bad.as_bytes()).is_err());
        let bad = "m,sequence_index,survivals,shots\n1,0,6,5\n";
        assert!(SurvivalDataset::read_csv(bad.as_bytes()).is_err());
        let bad = "m,sequence_index,survivals,shots\n1,0,1,5\n1,0,2,5\n";
        assert!(SurvivalDataset::read_csv(bad.as_bytes()).is_err());
    }
}
