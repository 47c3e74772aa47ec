//! n-qubit Pauli operators in packed symplectic form.
//!
//! An operator is stored as `i^phase · σ_0 ⊗ σ_1 ⊗ … ⊗ σ_{n-1}` where each
//! `σ_j ∈ {I, X, Y, Z}` is encoded by the bit pair `(x_j, z_j)`:
//! `I = (0,0)`, `X = (1,0)`, `Y = (1,1)`, `Z = (0,1)`. The phase is the
//! displayed phase, so `"+Y"` has phase 0 and `"-iX"` has phase 3.
//!
//! Bits are packed 64 per word, so products cost O(n/64) word operations and
//! commutation checks are a popcount.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_dim, Error, Result};

const WORD: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// Phase `i^k`, `k ∈ {0, 1, 2, 3}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Phase(u8);

impl Phase {
    pub const PLUS_ONE: Phase = Phase(0);
    pub const PLUS_I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: i64) -> Phase {
        Phase(k.rem_euclid(4) as u8)
    }

    /// Exponent `k` of `i^k`.
    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0.is_multiple_of(2)
    }

    fn symbol(self) -> &'static str {
        match self.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// Single-qubit Pauli symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli1 {
    I,
    X,
    Y,
    Z,
}

impl Pauli1 {
    pub fn from_bits(x: bool, z: bool) -> Pauli1 {
        match (x, z) {
            (false, false) => Pauli1::I,
            (true, false) => Pauli1::X,
            (true, true) => Pauli1::Y,
            (false, true) => Pauli1::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli1::I => (false, false),
            Pauli1::X => (true, false),
            Pauli1::Y => (true, true),
            Pauli1::Z => (false, true),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli1::I => 'I',
            Pauli1::X => 'X',
            Pauli1::Y => 'Y',
            Pauli1::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Pauli1> {
        match c {
            'I' => Some(Pauli1::I),
            'X' => Some(Pauli1::X),
            'Y' => Some(Pauli1::Y),
            'Z' => Some(Pauli1::Z),
            _ => None,
        }
    }

    /// Index in the `I, X, Y, Z` ordering used by transfer matrices.
    pub fn index(self) -> usize {
        match self {
            Pauli1::I => 0,
            Pauli1::X => 1,
            Pauli1::Y => 2,
            Pauli1::Z => 3,
        }
    }

    pub fn from_index(i: usize) -> Pauli1 {
        [Pauli1::I, Pauli1::X, Pauli1::Y, Pauli1::Z][i & 3]
    }
}

/// An n-qubit Pauli operator with phase.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliOperator {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: Phase,
}

impl PauliOperator {
    pub fn identity(n: usize) -> PauliOperator {
        let w = words_for(n);
        PauliOperator {
            n,
            x: vec![0; w],
            z: vec![0; w],
            phase: Phase::PLUS_ONE,
        }
    }

    /// `σ` acting on `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, pauli: Pauli1) -> Result<PauliOperator> {
        if qubit >= n {
            return Err(Error::Domain(format!("qubit {qubit} out of range for {n} qubits")));
        }
        let mut p = PauliOperator::identity(n);
        p.set(qubit, pauli);
        Ok(p)
    }

    /// Builds an X-type operator (`X` on every listed qubit).
    pub fn x_on(n: usize, qubits: &[usize]) -> Result<PauliOperator> {
        let mut p = PauliOperator::identity(n);
        for &q in qubits {
            if q >= n {
                return Err(Error::Domain(format!("qubit {q} out of range for {n} qubits")));
            }
            let (x, z) = p.get_bits(q);
            p.set_bits(q, !x, z);
        }
        Ok(p)
    }

    pub fn from_paulis(paulis: &[Pauli1]) -> PauliOperator {
        let mut p = PauliOperator::identity(paulis.len());
        for (q, &s) in paulis.iter().enumerate() {
            p.set(q, s);
        }
        p
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> PauliOperator {
        self.phase = phase;
        self
    }

    /// Same operator with phase reset to `+1`.
    pub fn without_phase(&self) -> PauliOperator {
        self.clone().with_phase(Phase::PLUS_ONE)
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    pub fn get(&self, qubit: usize) -> Pauli1 {
        let (x, z) = self.get_bits(qubit);
        Pauli1::from_bits(x, z)
    }

    pub fn set(&mut self, qubit: usize, pauli: Pauli1) {
        let (x, z) = pauli.bits();
        self.set_bits(qubit, x, z);
    }

    pub fn get_bits(&self, qubit: usize) -> (bool, bool) {
        let (w, b) = (qubit / WORD, qubit % WORD);
        ((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    fn set_bits(&mut self, qubit: usize, x: bool, z: bool) {
        let (w, b) = (qubit / WORD, qubit % WORD);
        let mask = 1u64 << b;
        self.x[w] = (self.x[w] & !mask) | ((x as u64) << b);
        self.z[w] = (self.z[w] & !mask) | ((z as u64) << b);
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    /// Number of non-identity tensor factors.
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    /// True when every tensor factor is the identity (phase ignored).
    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    pub fn eq_up_to_phase(&self, other: &PauliOperator) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    /// Symplectic inner product mod 2 (`true` means the two anticommute).
    pub fn anticommutes_unchecked(&self, other: &PauliOperator) -> bool {
        let mut parity = 0u32;
        for i in 0..self.x.len() {
            parity ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones();
        }
        parity & 1 == 1
    }

    pub fn commutes(&self, other: &PauliOperator) -> Result<bool> {
        check_dim(self.n, other.n)?;
        Ok(!self.anticommutes_unchecked(other))
    }

    /// Product `self · other` with exact phase.
    pub fn multiply(&self, other: &PauliOperator) -> Result<PauliOperator> {
        check_dim(self.n, other.n)?;
        let mut out = self.clone();
        out.mul_assign_unchecked(other);
        Ok(out)
    }

    /// In-place `self ← self · other`; caller guarantees equal sizes.
    pub fn mul_assign_unchecked(&mut self, other: &PauliOperator) {
        debug_assert_eq!(self.n, other.n);
        // Per-qubit product σ(a)·σ(b) = i^g σ(a⊕b); count the +1 and -1 values of g.
        let mut plus = 0u32;
        let mut minus = 0u32;
        for i in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[i], self.z[i], other.x[i], other.z[i]);
            let y1 = x1 & z1;
            let xo = x1 & !z1;
            let zo = !x1 & z1;
            plus += ((y1 & z2 & !x2) | (xo & z2 & x2) | (zo & x2 & !z2)).count_ones();
            minus += ((y1 & x2 & !z2) | (xo & z2 & !x2) | (zo & x2 & z2)).count_ones();
            self.x[i] = x1 ^ x2;
            self.z[i] = z1 ^ z2;
        }
        let k = self.phase.0 as i64 + other.phase.0 as i64 + plus as i64 - minus as i64;
        self.phase = Phase::from_exponent(k);
    }

    /// Inverse element; Paulis square to `±1` so only the phase changes.
    pub fn inverse(&self) -> PauliOperator {
        let mut out = self.clone();
        out.phase = Phase::from_exponent(-(self.phase.0 as i64));
        out
    }

    /// Restriction to the listed qubits, in order, with phase `+1`.
    pub fn restrict(&self, qubits: &[usize]) -> Result<PauliOperator> {
        let mut out = PauliOperator::identity(qubits.len());
        for (j, &q) in qubits.iter().enumerate() {
            if q >= self.n {
                return Err(Error::Domain(format!("qubit {q} out of range for {} qubits", self.n)));
            }
            out.set(j, self.get(q));
        }
        Ok(out)
    }

    /// Tensor product `self ⊗ other`, phases multiplied.
    pub fn tensor(&self, other: &PauliOperator) -> PauliOperator {
        let mut out = PauliOperator::identity(self.n + other.n);
        for q in 0..self.n {
            out.set(q, self.get(q));
        }
        for q in 0..other.n {
            out.set(self.n + q, other.get(q));
        }
        out.phase = self.phase * other.phase;
        out
    }

    /// Index of the phase-free operator in the base-4 ordering with qubit 0
    /// most significant and `I, X, Y, Z` digits.
    pub fn basis_index(&self) -> usize {
        (0..self.n).fold(0, |acc, q| acc * 4 + self.get(q).index())
    }

    pub fn from_basis_index(n: usize, mut index: usize) -> PauliOperator {
        let mut p = PauliOperator::identity(n);
        for q in (0..n).rev() {
            p.set(q, Pauli1::from_index(index % 4));
            index /= 4;
        }
        p
    }

    /// Tensor factors as text, without the phase prefix.
    pub fn letters(&self) -> String {
        (0..self.n).map(|q| self.get(q).symbol()).collect()
    }

    /// Order on the letter strings (`I < X < Y < Z` per position).
    pub fn textual_cmp(&self, other: &PauliOperator) -> Ordering {
        self.letters().cmp(&other.letters())
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.phase.symbol(), self.letters())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({self})")
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    /// Strict parser for `[+|-][i]?[IXYZ]+`. A missing sign means `+`.
    fn from_str(s: &str) -> Result<PauliOperator> {
        let err = |reason: &str| Error::ParsePauli {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let (sign, rest) = match s.as_bytes().first() {
            Some(b'+') => (0, &s[1..]),
            Some(b'-') => (2, &s[1..]),
            _ => (0, s),
        };
        let (imag, body) = match rest.strip_prefix('i') {
            Some(b) => (1, b),
            None => (0, rest),
        };
        if body.is_empty() {
            return Err(err("no Pauli letters"));
        }
        let mut paulis = Vec::with_capacity(body.len());
        for c in body.chars() {
            paulis.push(Pauli1::from_symbol(c).ok_or_else(|| err(&format!("unknown symbol {c:?}")))?);
        }
        Ok(PauliOperator::from_paulis(&paulis).with_phase(Phase::from_exponent(sign + imag)))
    }
}

impl Serialize for PauliOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.phase == Phase::PLUS_ONE {
            serializer.serialize_str(&self.letters())
        } else {
            serializer.serialize_str(&self.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for PauliOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
