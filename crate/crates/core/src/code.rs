//! Stabilizer codes with one logical qubit: syndromes, lookup recovery,
//! residual classification and the encoder basis used for encoded gates.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::clifford::CliffordTableau;
use crate::error::{check_dim, Error, Result};
use crate::pauli::{Pauli1, PauliOperator, Phase};

/// Syndrome bitstring; bit `j` is the outcome of generator `j`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Syndrome {
    bits: u64,
    len: u8,
}

impl Syndrome {
    pub fn from_bits(bits: u64, len: usize) -> Syndrome {
        Syndrome { bits, len: len as u8 }
    }

    pub fn zero(len: usize) -> Syndrome {
        Syndrome::from_bits(0, len)
    }

    pub fn from_slice(bits: &[u8]) -> Syndrome {
        let v = bits.iter().enumerate().fold(0u64, |acc, (j, &b)| acc | (((b & 1) as u64) << j));
        Syndrome::from_bits(v, bits.len())
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn len(self) -> usize {
        self.len as usize
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    pub fn bit(self, j: usize) -> bool {
        (self.bits >> j) & 1 == 1
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    pub fn xor(self, other: Syndrome) -> Syndrome {
        Syndrome::from_bits(self.bits ^ other.bits, self.len())
    }

    pub fn to_vec(self) -> Vec<u8> {
        (0..self.len()).map(|j| self.bit(j) as u8).collect()
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.len() {
            write!(f, "{}", self.bit(j) as u8)?;
        }
        Ok(())
    }
}

/// Logical Pauli action on the single logical qubit.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum LogicalPauli {
    I,
    X,
    Y,
    Z,
}

impl LogicalPauli {
    pub fn index(self) -> usize {
        match self {
            LogicalPauli::I => 0,
            LogicalPauli::X => 1,
            LogicalPauli::Y => 2,
            LogicalPauli::Z => 3,
        }
    }

    pub fn from_index(i: usize) -> LogicalPauli {
        [LogicalPauli::I, LogicalPauli::X, LogicalPauli::Y, LogicalPauli::Z][i & 3]
    }

    pub fn as_pauli1(self) -> Pauli1 {
        Pauli1::from_index(self.index())
    }

    pub fn from_pauli1(p: Pauli1) -> LogicalPauli {
        LogicalPauli::from_index(p.index())
    }

    /// Product up to phase (Klein four-group).
    pub fn compose(self, other: LogicalPauli) -> LogicalPauli {
        // In the I,X,Y,Z index order the (x, z) bits are (i&1 ^ i>>1 ... ); go via bits.
        let (x1, z1) = self.as_pauli1().bits();
        let (x2, z2) = other.as_pauli1().bits();
        LogicalPauli::from_pauli1(Pauli1::from_bits(x1 ^ x2, z1 ^ z2))
    }
}

/// Outcome of classifying a residual Pauli frame against a code.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ResidualClass {
    /// Element of the stabilizer group (up to phase): no effect on the code space.
    IdentityCoset,
    /// Zero syndrome but a nontrivial logical action.
    LogicalError,
    /// Nonzero syndrome.
    Detectable(Syndrome),
}

/// A stabilizer code encoding one logical qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilizerCode {
    name: String,
    n: usize,
    generators: Vec<PauliOperator>,
    logical_x: PauliOperator,
    logical_z: PauliOperator,
    /// Indexed by `Syndrome::bits()`.
    recovery: Vec<PauliOperator>,
    /// Pure errors: `destabilizers[j]` anticommutes with generator `j` only and
    /// commutes with both logicals and with every other destabilizer.
    destabilizers: Vec<PauliOperator>,
}

/// Serializable form of a code definition.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CodeDefinition {
    pub name: String,
    pub stabilizers: Vec<PauliOperator>,
    pub logical_x: PauliOperator,
    pub logical_z: PauliOperator,
    /// Syndrome bitstring (character `j` = generator `j`) to correction.
    /// Missing entries are filled with minimum-weight corrections.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovery_table: Option<BTreeMap<String, PauliOperator>>,
}

impl StabilizerCode {
    /// Validates the generators and logicals and builds a code whose recovery
    /// table is the minimum-weight decoder (ties broken by textual order).
    pub fn new(
        name: impl Into<String>,
        generators: Vec<PauliOperator>,
        logical_x: PauliOperator,
        logical_z: PauliOperator,
    ) -> Result<StabilizerCode> {
        let n = logical_x.n_qubits();
        validate_structure(n, &generators, &logical_x, &logical_z)?;
        let recovery = min_weight_table(n, &generators)?;
        let destabilizers = destabilizers(n, &generators, &logical_x, &logical_z);
        Ok(StabilizerCode {
            name: name.into(),
            n,
            generators: generators.into_iter().map(|g| g.without_phase()).collect(),
            logical_x: logical_x.without_phase(),
            logical_z: logical_z.without_phase(),
            recovery,
            destabilizers,
        })
    }

    /// Replaces entries of the recovery table; each entry's syndrome must equal its key.
    pub fn with_recovery_entries(mut self, entries: &[(Syndrome, PauliOperator)]) -> Result<Self> {
        for (s, r) in entries {
            check_dim(self.n, r.n_qubits())?;
            if s.len() != self.generators.len() {
                return Err(Error::InvalidCode(format!("syndrome {s} has wrong length")));
            }
            let actual = self.syndrome_unchecked(r);
            if actual != *s {
                return Err(Error::InvalidCode(format!(
                    "recovery {r} for syndrome {s} has syndrome {actual}"
                )));
            }
            self.recovery[s.bits() as usize] = r.without_phase();
        }
        Ok(self)
    }

    pub fn from_definition(def: &CodeDefinition) -> Result<StabilizerCode> {
        let code = StabilizerCode::new(
            def.name.clone(),
            def.stabilizers.clone(),
            def.logical_x.clone(),
            def.logical_z.clone(),
        )?;
        let Some(table) = &def.recovery_table else {
            return Ok(code);
        };
        let r = code.generators.len();
        let mut entries = Vec::with_capacity(table.len());
        for (key, pauli) in table {
            if key.len() != r || !key.chars().all(|c| c == '0' || c == '1') {
                return Err(Error::InvalidCode(format!(
                    "recovery key {key:?} is not a {r}-bit syndrome string"
                )));
            }
            let bits: Vec<u8> = key.bytes().map(|b| b - b'0').collect();
            entries.push((Syndrome::from_slice(&bits), pauli.clone()));
        }
        code.with_recovery_entries(&entries)
    }

    pub fn to_definition(&self) -> CodeDefinition {
        let r = self.generators.len();
        let table = (0..1u64 << r)
            .map(|s| {
                let syn = Syndrome::from_bits(s, r);
                (syn.to_string(), self.recovery[s as usize].clone())
            })
            .collect();
        CodeDefinition {
            name: self.name.clone(),
            stabilizers: self.generators.clone(),
            logical_x: self.logical_x.clone(),
            logical_z: self.logical_z.clone(),
            recovery_table: Some(table),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_physical(&self) -> usize {
        self.n
    }

    pub fn k_logical(&self) -> usize {
        1
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    pub fn n_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn logical_x(&self) -> &PauliOperator {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &PauliOperator {
        &self.logical_z
    }

    pub fn destabilizers(&self) -> &[PauliOperator] {
        &self.destabilizers
    }

    pub fn recovery(&self, s: Syndrome) -> &PauliOperator {
        &self.recovery[s.bits() as usize]
    }

    pub fn recovery_table(&self) -> impl Iterator<Item = (Syndrome, &PauliOperator)> {
        let r = self.generators.len();
        self.recovery
            .iter()
            .enumerate()
            .map(move |(s, p)| (Syndrome::from_bits(s as u64, r), p))
    }

    pub fn syndrome_unchecked(&self, frame: &PauliOperator) -> Syndrome {
        let bits = self
            .generators
            .iter()
            .enumerate()
            .fold(0u64, |acc, (j, g)| acc | ((g.anticommutes_unchecked(frame) as u64) << j));
        Syndrome::from_bits(bits, self.generators.len())
    }

    pub fn extract_syndrome(&self, frame: &PauliOperator) -> Result<Syndrome> {
        check_dim(self.n, frame.n_qubits())?;
        Ok(self.syndrome_unchecked(frame))
    }

    /// Logical action of a zero-syndrome frame, read off from its commutation
    /// with the logical operators. Stabilizer factors and phases are ignored.
    pub fn logical_action_unchecked(&self, frame: &PauliOperator) -> LogicalPauli {
        let flips_z = frame.anticommutes_unchecked(&self.logical_z);
        let flips_x = frame.anticommutes_unchecked(&self.logical_x);
        LogicalPauli::from_pauli1(Pauli1::from_bits(flips_z, flips_x))
    }

    pub fn logical_action(&self, frame: &PauliOperator) -> Result<LogicalPauli> {
        check_dim(self.n, frame.n_qubits())?;
        Ok(self.logical_action_unchecked(frame))
    }

    pub fn classify_residual(&self, frame: &PauliOperator) -> Result<ResidualClass> {
        check_dim(self.n, frame.n_qubits())?;
        Ok(self.classify_unchecked(frame))
    }

    pub(crate) fn classify_unchecked(&self, frame: &PauliOperator) -> ResidualClass {
        let s = self.syndrome_unchecked(frame);
        if !s.is_zero() {
            ResidualClass::Detectable(s)
        } else if self.logical_action_unchecked(frame) == LogicalPauli::I {
            ResidualClass::IdentityCoset
        } else {
            ResidualClass::LogicalError
        }
    }

    /// Stabilizer-group membership up to phase.
    pub fn in_stabilizer_group(&self, p: &PauliOperator) -> Result<bool> {
        Ok(self.classify_residual(p)? == ResidualClass::IdentityCoset)
    }

    /// Physical representative of a logical Pauli (`X̄`, `Z̄`, or `X̄·Z̄` for `Y`),
    /// phase dropped.
    pub fn embed_logical(&self, l: LogicalPauli) -> PauliOperator {
        match l {
            LogicalPauli::I => PauliOperator::identity(self.n),
            LogicalPauli::X => self.logical_x.clone(),
            LogicalPauli::Z => self.logical_z.clone(),
            LogicalPauli::Y => {
                let mut y = self.logical_x.clone();
                y.mul_assign_unchecked(&self.logical_z);
                y.without_phase()
            }
        }
    }

    /// Encoder tableau: logical qubit 0 carries `X̄`/`Z̄`, register qubit `j ≥ 1`
    /// carries destabilizer `j-1` (as X) and generator `j-1` (as Z).
    pub fn encoder(&self) -> CliffordTableau {
        let mut xs = vec![self.logical_x.clone()];
        let mut zs = vec![self.logical_z.clone()];
        xs.extend(self.destabilizers.iter().cloned());
        zs.extend(self.generators.iter().cloned());
        CliffordTableau::from_images(xs, zs).expect("code basis is symplectic")
    }

    /// Physical tableau of the encoded gate `E (U ⊗ I) E†`. It maps `X̄`, `Z̄`
    /// to the images of `U` and fixes every generator and destabilizer, so the
    /// syndrome register keeps its basis.
    pub fn encoded_gate(&self, logical: &CliffordTableau) -> Result<CliffordTableau> {
        let enc = self.encoder();
        let lifted = CliffordTableau::embed_single(logical, self.n, 0)?;
        enc.invert().then(&lifted)?.then(&enc)
    }
}

fn validate_structure(
    n: usize,
    generators: &[PauliOperator],
    lx: &PauliOperator,
    lz: &PauliOperator,
) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidCode("zero physical qubits".into()));
    }
    check_dim(n, lz.n_qubits())?;
    for g in generators {
        check_dim(n, g.n_qubits())?;
        if !g.is_hermitian() {
            return Err(Error::InvalidCode(format!("generator {g} is not Hermitian")));
        }
    }
    if generators.len() + 1 != n {
        return Err(Error::InvalidCode(format!(
            "{} generators on {n} qubits does not encode exactly one logical qubit",
            generators.len()
        )));
    }
    if generators.len() > 32 {
        return Err(Error::InvalidCode("more than 32 generators".into()));
    }
    for (i, a) in generators.iter().enumerate() {
        for b in &generators[i + 1..] {
            if a.anticommutes_unchecked(b) {
                return Err(Error::InvalidCode(format!("generators {a} and {b} anticommute")));
            }
        }
        if a.anticommutes_unchecked(lx) || a.anticommutes_unchecked(lz) {
            return Err(Error::InvalidCode(format!("generator {a} anticommutes with a logical")));
        }
    }
    if !lx.anticommutes_unchecked(lz) {
        return Err(Error::InvalidCode("logical X and Z commute".into()));
    }
    if gf2_rank(generators) != generators.len() {
        return Err(Error::InvalidCode("generators are not independent".into()));
    }
    Ok(())
}

/// Rank over GF(2) of the symplectic vectors of `ops`.
fn gf2_rank(ops: &[PauliOperator]) -> usize {
    let mut rows: Vec<Vec<u64>> = ops
        .iter()
        .map(|p| p.x_words().iter().chain(p.z_words()).copied().collect())
        .collect();
    let width = rows.first().map_or(0, |r| r.len() * 64);
    let mut rank = 0;
    for col in 0..width {
        let (w, b) = (col / 64, col % 64);
        let Some(pivot) = (rank..rows.len()).find(|&r| (rows[r][w] >> b) & 1 == 1) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && (row[w] >> b) & 1 == 1 {
                row.iter_mut().zip(&pivot_row).for_each(|(a, p)| *a ^= p);
            }
        }
        rank += 1;
    }
    rank
}

/// Minimum-weight correction for every syndrome by enumerating Paulis in
/// order of weight; ties go to the textually smallest operator.
fn min_weight_table(n: usize, generators: &[PauliOperator]) -> Result<Vec<PauliOperator>> {
    if n > 12 {
        return Err(Error::InvalidCode(format!(
            "minimum-weight table enumeration limited to 12 qubits, got {n}"
        )));
    }
    let r = generators.len();
    let mut best: Vec<Option<PauliOperator>> = vec![None; 1 << r];
    let mut filled = 0usize;
    for index in 0..4usize.pow(n as u32) {
        let p = PauliOperator::from_basis_index(n, index);
        let bits = generators
            .iter()
            .enumerate()
            .fold(0usize, |acc, (j, g)| acc | ((g.anticommutes_unchecked(&p) as usize) << j));
        let slot = &mut best[bits];
        let better = match slot {
            None => true,
            Some(cur) => (p.weight(), p.letters()) < (cur.weight(), cur.letters()),
        };
        if better {
            if slot.is_none() {
                filled += 1;
            }
            *slot = Some(p);
        }
    }
    if filled != best.len() {
        return Err(Error::InvalidCode("some syndromes have no correction".into()));
    }
    Ok(best.into_iter().map(|p| p.unwrap()).collect())
}

fn destabilizers(
    n: usize,
    generators: &[PauliOperator],
    lx: &PauliOperator,
    lz: &PauliOperator,
) -> Vec<PauliOperator> {
    let r = generators.len();
    // Start from any Pauli with the unit syndrome e_j (the table has one).
    let table = min_weight_table(n, generators).expect("validated code");
    let mut ds: Vec<PauliOperator> = (0..r).map(|j| table[1 << j].clone()).collect();
    for d in ds.iter_mut() {
        if d.anticommutes_unchecked(lx) {
            d.mul_assign_unchecked(lz);
        }
        if d.anticommutes_unchecked(lz) {
            d.mul_assign_unchecked(lx);
        }
    }
    // Multiplying d_j by generator k flips its commutation with d_k only.
    for j in 0..r {
        for k in 0..j {
            if ds[j].anticommutes_unchecked(&ds[k]) {
                let g = generators[k].clone();
                ds[j].mul_assign_unchecked(&g);
            }
        }
    }
    ds.into_iter().map(|d| d.with_phase(Phase::PLUS_ONE)).collect()
}

/// The ⟦3,1,1⟧ bit-flip code: generators `ZZI`, `IZZ`; logicals `XXX`, `ZZZ`.
pub fn bitflip_code() -> StabilizerCode {
    let p = |s: &str| s.parse::<PauliOperator>().unwrap();
    StabilizerCode::new("bitflip", vec![p("ZZI"), p("IZZ")], p("XXX"), p("ZZZ")).unwrap()
}

/// The ⟦5,1,3⟧ perfect code with cyclic generators `XZZXI`.
pub fn five_qubit_code() -> StabilizerCode {
    let p = |s: &str| s.parse::<PauliOperator>().unwrap();
    StabilizerCode::new(
        "five_qubit",
        vec![p("XZZXI"), p("IXZZX"), p("XIXZZ"), p("ZXIXZ")],
        p("XXXXX"),
        p("ZZZZZ"),
    )
    .unwrap()
}

/// Single physical qubit with no stabilizers; used for physical RB.
pub fn trivial_code() -> StabilizerCode {
    let p = |s: &str| s.parse::<PauliOperator>().unwrap();
    StabilizerCode::new("trivial", vec![], p("X"), p("Z")).unwrap()
}
