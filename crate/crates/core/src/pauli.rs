//! Pauli words: phase-free tensor products of single-qubit Pauli operators.
//!
//! A word is stored as a pair of bitmasks (X part, Z part) so that
//! commutation checks reduce to popcount parity of the symplectic form.
//! Qubit `i` corresponds to bit `i`; in the text form (`"XIZY"`) the
//! leftmost character is qubit 0.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Index in the conventional (I, X, Y, Z) ordering.
    pub fn code(self) -> usize {
        match self {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Y => 2,
            Pauli::Z => 3,
        }
    }

    fn from_code(code: usize) -> Pauli {
        match code & 0b11 {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn from_char(c: char) -> Option<Pauli> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// An n-qubit Pauli word without phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    x_mask: u64,
    z_mask: u64,
}

impl PauliString {
    /// The identity word on `n` qubits.
    pub fn identity(n: usize) -> PauliString {
        assert!(n <= 32, "Pauli words limited to 32 qubits");
        PauliString {
            n,
            x_mask: 0,
            z_mask: 0,
        }
    }

    /// Build a word from per-qubit operators.
    pub fn from_ops(ops: &[Pauli]) -> PauliString {
        let mut word = PauliString::identity(ops.len());
        for (q, &p) in ops.iter().enumerate() {
            word.set(q, p);
        }
        word
    }

    /// Word with a single non-identity operator at `qubit`.
    pub fn single(n: usize, qubit: usize, p: Pauli) -> PauliString {
        let mut word = PauliString::identity(n);
        word.set(qubit, p);
        word
    }

    /// Parse a text form such as `"XIZY"`; leftmost character is qubit 0.
    pub fn parse(s: &str) -> Result<PauliString> {
        let mut ops = Vec::with_capacity(s.len());
        for c in s.chars() {
            let p = Pauli::from_char(c).ok_or_else(|| {
                Error::InvalidParameter(format!("invalid Pauli character '{c}' in \"{s}\""))
            })?;
            ops.push(p);
        }
        if ops.is_empty() {
            return Err(Error::InvalidParameter("empty Pauli word".into()));
        }
        Ok(PauliString::from_ops(&ops))
    }

    /// Decode the word with PTM index `index` (base-4 digits, qubit 0 least
    /// significant, digit order I=0, X=1, Y=2, Z=3).
    pub fn from_index(n: usize, index: usize) -> PauliString {
        let mut word = PauliString::identity(n);
        let mut rest = index;
        for q in 0..n {
            word.set(q, Pauli::from_code(rest & 0b11));
            rest >>= 2;
        }
        word
    }

    /// PTM index of this word (inverse of [`PauliString::from_index`]).
    pub fn index(&self) -> usize {
        let mut idx = 0usize;
        for q in (0..self.n).rev() {
            idx = (idx << 2) | self.op(q).code();
        }
        idx
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    /// Number of non-identity positions.
    pub fn weight(&self) -> usize {
        (self.x_mask | self.z_mask).count_ones() as usize
    }

    pub fn op(&self, qubit: usize) -> Pauli {
        let x = (self.x_mask >> qubit) & 1;
        let z = (self.z_mask >> qubit) & 1;
        match (x, z) {
            (0, 0) => Pauli::I,
            (1, 0) => Pauli::X,
            (1, 1) => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    pub fn set(&mut self, qubit: usize, p: Pauli) {
        assert!(qubit < self.n, "qubit {qubit} out of range for {}", self.n);
        let bit = 1u64 << qubit;
        self.x_mask &= !bit;
        self.z_mask &= !bit;
        match p {
            Pauli::I => {}
            Pauli::X => self.x_mask |= bit,
            Pauli::Y => {
                self.x_mask |= bit;
                self.z_mask |= bit;
            }
            Pauli::Z => self.z_mask |= bit,
        }
    }

    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    /// `true` if the two words commute as operators.
    ///
    /// Words commute iff the number of positions holding distinct
    /// non-identity operators is even (symplectic-form parity).
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let cross = (self.x_mask & other.z_mask).count_ones()
            + (self.z_mask & other.x_mask).count_ones();
        cross % 2 == 0
    }

    /// PTM conjugation sign: +1 if the words commute, -1 otherwise.
    pub fn ptm_sign(&self, other: &PauliString) -> f64 {
        if self.commutes_with(other) {
            1.0
        } else {
            -1.0
        }
    }

    /// Re-index the word onto a larger register, mapping qubit `j` of the
    /// word to `support[j]`.
    pub fn embed(&self, n: usize, support: &[usize]) -> Result<PauliString> {
        if support.len() != self.n {
            return Err(Error::ArityMismatch {
                expected: self.n,
                got: support.len(),
            });
        }
        let mut word = PauliString::identity(n);
        for (j, &q) in support.iter().enumerate() {
            if q >= n {
                return Err(Error::QubitOutOfRange { index: q, n });
            }
            word.set(q, self.op(j));
        }
        Ok(word)
    }

    /// Iterate all `4^n` words on `n` qubits in PTM index order.
    pub fn all(n: usize) -> impl Iterator<Item = PauliString> {
        (0..4usize.pow(n as u32)).map(move |i| PauliString::from_index(n, i))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            write!(f, "{}", self.op(q).as_char())?;
        }
        Ok(())
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        PauliString::parse(&s).map_err(serde::de::Error::custom)
    }
}
