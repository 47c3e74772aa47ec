//! Clifford tableaux (images of the generators `X_j`, `Z_j` under conjugation)
//! and the enumerated single-qubit Clifford group.

use std::sync::OnceLock;

use crate::error::{check_dim, Error, Result};
use crate::pauli::{Pauli1, PauliOperator, Phase};

/// A Clifford unitary `U`, stored as the signed images `U X_j U†` and `U Z_j U†`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CliffordTableau {
    n: usize,
    x_images: Vec<PauliOperator>,
    z_images: Vec<PauliOperator>,
}

impl CliffordTableau {
    pub fn identity(n: usize) -> CliffordTableau {
        let x_images = (0..n)
            .map(|j| PauliOperator::single(n, j, Pauli1::X).unwrap())
            .collect();
        let z_images = (0..n)
            .map(|j| PauliOperator::single(n, j, Pauli1::Z).unwrap())
            .collect();
        CliffordTableau { n, x_images, z_images }
    }

    /// Builds a tableau from generator images, checking that they are
    /// Hermitian and satisfy the canonical commutation relations.
    pub fn from_images(x_images: Vec<PauliOperator>, z_images: Vec<PauliOperator>) -> Result<Self> {
        let n = x_images.len();
        check_dim(n, z_images.len())?;
        for img in x_images.iter().chain(&z_images) {
            check_dim(n, img.n_qubits())?;
            if !img.is_hermitian() {
                return Err(Error::InvalidTableau(format!("image {img} is not Hermitian")));
            }
        }
        for i in 0..n {
            for j in 0..n {
                let want = i == j;
                if x_images[i].anticommutes_unchecked(&z_images[j]) != want {
                    return Err(Error::InvalidTableau(format!(
                        "images of X{i} and Z{j} violate the symplectic condition"
                    )));
                }
                if i < j
                    && (x_images[i].anticommutes_unchecked(&x_images[j])
                        || z_images[i].anticommutes_unchecked(&z_images[j]))
                {
                    return Err(Error::InvalidTableau(format!(
                        "images of generators {i} and {j} do not commute"
                    )));
                }
            }
        }
        Ok(CliffordTableau { n, x_images, z_images })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn x_image(&self, j: usize) -> &PauliOperator {
        &self.x_images[j]
    }

    pub fn z_image(&self, j: usize) -> &PauliOperator {
        &self.z_images[j]
    }

    pub fn hadamard(n: usize, q: usize) -> Result<CliffordTableau> {
        let mut t = CliffordTableau::identity(n);
        t.x_images[q] = PauliOperator::single(n, q, Pauli1::Z)?;
        t.z_images[q] = PauliOperator::single(n, q, Pauli1::X)?;
        Ok(t)
    }

    /// Phase gate `S = diag(1, i)`: `X → Y`, `Z → Z`.
    pub fn phase_s(n: usize, q: usize) -> Result<CliffordTableau> {
        let mut t = CliffordTableau::identity(n);
        t.x_images[q] = PauliOperator::single(n, q, Pauli1::Y)?;
        Ok(t)
    }

    pub fn cnot(n: usize, control: usize, target: usize) -> Result<CliffordTableau> {
        if control == target || control >= n || target >= n {
            return Err(Error::Domain(format!("bad CNOT qubits ({control}, {target}) for n={n}")));
        }
        let mut t = CliffordTableau::identity(n);
        t.x_images[control] = PauliOperator::x_on(n, &[control, target])?;
        let mut zz = PauliOperator::single(n, control, Pauli1::Z)?;
        zz.set(target, Pauli1::Z);
        t.z_images[target] = zz;
        Ok(t)
    }

    /// `T P T†` with the phase tracked exactly; no size check.
    pub fn conjugate_unchecked(&self, p: &PauliOperator) -> PauliOperator {
        // p = i^(k + #Y) · Π_j X_j^{x_j} Z_j^{z_j}, since Y = i·X·Z.
        let mut out = PauliOperator::identity(self.n);
        let mut k = p.phase().exponent() as i64;
        for j in 0..self.n {
            let (x, z) = p.get_bits(j);
            if x && z {
                k += 1;
            }
            if x {
                out.mul_assign_unchecked(&self.x_images[j]);
            }
            if z {
                out.mul_assign_unchecked(&self.z_images[j]);
            }
        }
        let phase = out.phase() * Phase::from_exponent(k);
        out.with_phase(phase)
    }

    pub fn conjugate(&self, p: &PauliOperator) -> Result<PauliOperator> {
        check_dim(self.n, p.n_qubits())?;
        Ok(self.conjugate_unchecked(p))
    }

    /// Tableau of "apply `first`, then `second`", i.e. the unitary `second·first`.
    pub fn compose(first: &CliffordTableau, second: &CliffordTableau) -> Result<CliffordTableau> {
        check_dim(first.n, second.n)?;
        Ok(CliffordTableau {
            n: first.n,
            x_images: first.x_images.iter().map(|p| second.conjugate_unchecked(p)).collect(),
            z_images: first.z_images.iter().map(|p| second.conjugate_unchecked(p)).collect(),
        })
    }

    pub fn then(&self, next: &CliffordTableau) -> Result<CliffordTableau> {
        CliffordTableau::compose(self, next)
    }

    pub fn invert(&self) -> CliffordTableau {
        // The pre-image of a generator G is fixed (up to sign) by commutation:
        // P anticommutes with X_i iff T(P) anticommutes with T(X_i).
        let preimage = |target: &PauliOperator| -> PauliOperator {
            let mut p = PauliOperator::identity(self.n);
            for i in 0..self.n {
                let z = target.anticommutes_unchecked(&self.x_images[i]);
                let x = target.anticommutes_unchecked(&self.z_images[i]);
                p.set(i, Pauli1::from_bits(x, z));
            }
            let image = self.conjugate_unchecked(&p);
            debug_assert!(image.eq_up_to_phase(target));
            // image = ±target; flip the pre-image sign to match.
            if image.phase() == target.phase() {
                p
            } else {
                p.with_phase(Phase::MINUS_ONE)
            }
        };
        let x_images = (0..self.n)
            .map(|j| preimage(&PauliOperator::single(self.n, j, Pauli1::X).unwrap()))
            .collect();
        let z_images = (0..self.n)
            .map(|j| preimage(&PauliOperator::single(self.n, j, Pauli1::Z).unwrap()))
            .collect();
        CliffordTableau { n: self.n, x_images, z_images }
    }

    pub fn is_identity(&self) -> bool {
        *self == CliffordTableau::identity(self.n)
    }

    /// `U ⊗ I` on `n` qubits with the single-qubit tableau `u` placed on `qubit`.
    pub fn embed_single(u: &CliffordTableau, n: usize, qubit: usize) -> Result<CliffordTableau> {
        check_dim(1, u.n)?;
        if qubit >= n {
            return Err(Error::Domain(format!("qubit {qubit} out of range for {n} qubits")));
        }
        let lift = |img: &PauliOperator| {
            let mut p = PauliOperator::single(n, qubit, img.get(0)).unwrap();
            p = p.with_phase(img.phase());
            p
        };
        let mut t = CliffordTableau::identity(n);
        t.x_images[qubit] = lift(&u.x_images[0]);
        t.z_images[qubit] = lift(&u.z_images[0]);
        Ok(t)
    }
}

/// Elementary single-qubit gates used to spell the group elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate1 {
    H,
    S,
}

/// The 24-element single-qubit Clifford group (modulo global phase) in a
/// fixed order.
///
/// Element `4a + b` is the gate word `S^b` followed by frame word `a`, where
/// the frame words send `+Z` to a distinct signed axis:
///
/// | a | frame word  | image of Z |
/// |---|-------------|------------|
/// | 0 | (none)      | +Z |
/// | 1 | H           | +X |
/// | 2 | H S         | +Y |
/// | 3 | H S S       | -X |
/// | 4 | H S S S     | -Y |
/// | 5 | H S S H     | -Z |
///
/// Words are read left to right in time order. Index 0 is the identity.
pub struct SingleQubitCliffords {
    elements: Vec<CliffordTableau>,
    words: Vec<Vec<Gate1>>,
    product: [[u8; 24]; 24],
    inverse: [u8; 24],
}

const FRAME_WORDS: [&[Gate1]; 6] = [
    &[],
    &[Gate1::H],
    &[Gate1::H, Gate1::S],
    &[Gate1::H, Gate1::S, Gate1::S],
    &[Gate1::H, Gate1::S, Gate1::S, Gate1::S],
    &[Gate1::H, Gate1::S, Gate1::S, Gate1::H],
];

impl SingleQubitCliffords {
    pub const ORDER: usize = 24;

    fn build() -> SingleQubitCliffords {
        let h = CliffordTableau::hadamard(1, 0).unwrap();
        let s = CliffordTableau::phase_s(1, 0).unwrap();
        let mut words = Vec::with_capacity(24);
        let mut elements = Vec::with_capacity(24);
        for frame in FRAME_WORDS {
            for b in 0..4 {
                let mut word = vec![Gate1::S; b];
                word.extend_from_slice(frame);
                let mut t = CliffordTableau::identity(1);
                for g in &word {
                    let gate = match g {
                        Gate1::H => &h,
                        Gate1::S => &s,
                    };
                    t = t.then(gate).unwrap();
                }
                words.push(word);
                elements.push(t);
            }
        }
        let find = |t: &CliffordTableau| elements.iter().position(|e| e == t).expect("group closure");
        let mut product = [[0u8; 24]; 24];
        let mut inverse = [0u8; 24];
        for i in 0..24 {
            for j in 0..24 {
                product[i][j] = find(&elements[i].then(&elements[j]).unwrap()) as u8;
            }
            inverse[i] = find(&elements[i].invert()) as u8;
        }
        SingleQubitCliffords { elements, words, product, inverse }
    }

    /// Shared instance.
    pub fn get() -> &'static SingleQubitCliffords {
        static GROUP: OnceLock<SingleQubitCliffords> = OnceLock::new();
        GROUP.get_or_init(SingleQubitCliffords::build)
    }

    pub fn elements(&self) -> &[CliffordTableau] {
        &self.elements
    }

    pub fn element(&self, index: usize) -> &CliffordTableau {
        &self.elements[index]
    }

    /// Gate word (time order) spelling element `index`.
    pub fn word(&self, index: usize) -> &[Gate1] {
        &self.words[index]
    }

    /// Index of "apply `first`, then `second`".
    pub fn then(&self, first: usize, second: usize) -> usize {
        self.product[first][second] as usize
    }

    pub fn inverse(&self, index: usize) -> usize {
        self.inverse[index] as usize
    }

    pub fn index_of(&self, t: &CliffordTableau) -> Option<usize> {
        self.elements.iter().position(|e| e == t)
    }
}

/// The 24 single-qubit Cliffords in canonical order.
pub fn enumerate_single_qubit_cliffords() -> Vec<CliffordTableau> {
    SingleQubitCliffords::get().elements().to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn hadamard_swaps_x_and_z() {
        let h = CliffordTableau::hadamard(1, 0).unwrap();
        assert_eq!(h.conjugate(&p("X")).unwrap(), p("Z"));
        assert_eq!(h.conjugate(&p("Y")).unwrap(), p("-Y"));
    }

    #[test]
    fn s_maps_x_to_y() {
        let s = CliffordTableau::phase_s(1, 0).unwrap();
        assert_eq!(s.conjugate(&p("X")).unwrap(), p("Y"));
        assert_eq!(s.conjugate(&p("Y")).unwrap(), p("-X"));
    }

    #[test]
    fn identity_leaves_paulis_alone() {
        let id = CliffordTableau::identity(3);
        for s in ["XYZ", "-iZZI", "IIY"] {
            assert_eq!(id.conjugate(&p(s)).unwrap(), p(s));
        }
    }

    #[test]
    fn compose_and_invert() {
        let h = CliffordTableau::hadamard(1, 0).unwrap();
        assert!(h.then(&h).unwrap().is_identity());
        let s = CliffordTableau::phase_s(1, 0).unwrap();
        assert!(s.invert().then(&s).unwrap().is_identity());
        assert!(s.then(&s.invert()).unwrap().is_identity());
    }

    #[test]
    fn cnot_propagation() {
        let c = CliffordTableau::cnot(2, 0, 1).unwrap();
        assert_eq!(c.conjugate(&p("XI")).unwrap(), p("XX"));
        assert_eq!(c.conjugate(&p("IZ")).unwrap(), p("ZZ"));
        assert_eq!(c.conjugate(&p("YI")).unwrap(), p("YX"));
        assert!(c.then(&c).unwrap().is_identity());
    }

    #[test]
    fn from_images_rejects_non_symplectic() {
        assert!(CliffordTableau::from_images(vec![p("X")], vec![p("X")]).is_err());
        assert!(CliffordTableau::from_images(vec![p("iX")], vec![p("Z")]).is_err());
        assert!(CliffordTableau::from_images(vec![p("Z")], vec![p("-X")]).is_ok());
    }

    #[test]
    fn dimension_errors() {
        let a = CliffordTableau::identity(1);
        let b = CliffordTableau::identity(2);
        assert!(CliffordTableau::compose(&a, &b).is_err());
        assert!(a.conjugate(&p("XX")).is_err());
    }

    #[test]
    fn group_has_24_distinct_elements() {
        let g = SingleQubitCliffords::get();
        assert_eq!(g.elements().len(), 24);
        for i in 0..24 {
            for j in 0..i {
                assert_ne!(g.element(i), g.element(j), "{i} vs {j}");
            }
        }
        assert!(g.element(0).is_identity());
    }

    #[test]
    fn group_closure_all_576_products() {
        let g = SingleQubitCliffords::get();
        for a in g.elements() {
            for b in g.elements() {
                let c = a.then(b).unwrap();
                assert!(g.index_of(&c).is_some());
            }
            assert!(g.index_of(&a.invert()).is_some());
        }
    }

    #[test]
    fn frame_words_hit_every_signed_axis() {
        let g = SingleQubitCliffords::get();
        let images: Vec<String> = (0..6).map(|a| g.element(4 * a).z_image(0).to_string()).collect();
        assert_eq!(images, ["+Z", "+X", "+Y", "-X", "-Y", "-Z"]);
    }
}
