//! Phase-tracked Pauli strings.
//!
//! Letters are stored in X/Z normal form (`X^x Z^z`) with a global phase
//! exponent counting powers of i mod 4. `Y` enters as i·XZ; the ordered
//! product `XZ` keeps phase 0, so the two stay distinct.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Single-qubit Pauli letter as written by a caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
    /// Ordered product X·Z (i.e. apply Z, then X). Equal to −i·Y.
    XZ,
}

impl PauliLetter {
    /// (x bit, z bit, phase exponent of i contributed by this letter).
    fn normal_form(self) -> (u8, u8, u8) {
        match self {
            PauliLetter::I => (0, 0, 0),
            PauliLetter::X => (1, 0, 0),
            PauliLetter::Y => (1, 1, 1), // Y = i·XZ
            PauliLetter::Z => (0, 1, 0),
            PauliLetter::XZ => (1, 1, 0),
        }
    }

    pub fn parse(token: &str) -> Result<Self> {
        match token {
            "I" => Ok(PauliLetter::I),
            "X" => Ok(PauliLetter::X),
            "Y" => Ok(PauliLetter::Y),
            "Z" => Ok(PauliLetter::Z),
            "XZ" => Ok(PauliLetter::XZ),
            other => Err(Error::Parse(format!("unknown Pauli letter {other:?}"))),
        }
    }
}

/// An n-qubit Pauli operator `i^phase · Π_j X_j^{x_j} Z_j^{z_j}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliString {
    /// Phase exponent: the operator carries a global factor i^phase.
    pub phase: u8,
    x: Vec<u8>,
    z: Vec<u8>,
}

impl PauliString {
    pub fn identity(len: usize) -> Self {
        PauliString {
            phase: 0,
            x: vec![0; len],
            z: vec![0; len],
        }
    }

    pub fn from_letters(letters: &[PauliLetter]) -> Self {
        let mut s = PauliString::identity(letters.len());
        for (j, letter) in letters.iter().enumerate() {
            let (x, z, p) = letter.normal_form();
            s.x[j] = x;
            s.z[j] = z;
            s.phase = (s.phase + p) % 4;
        }
        s
    }

    pub fn single(len: usize, position: usize, letter: PauliLetter) -> Result<Self> {
        if position >= len {
            return Err(Error::QubitOutOfRange {
                index: position,
                n_qubits: len,
            });
        }
        let mut letters = vec![PauliLetter::I; len];
        letters[position] = letter;
        Ok(PauliString::from_letters(&letters))
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// X/Z exponents at site `j`.
    pub fn site(&self, j: usize) -> (u8, u8) {
        (self.x[j], self.z[j])
    }

    /// Letter at site `j` in normal form (never `Y`; Y is phase + XZ).
    pub fn letter(&self, j: usize) -> PauliLetter {
        match (self.x[j], self.z[j]) {
            (0, 0) => PauliLetter::I,
            (1, 0) => PauliLetter::X,
            (0, 1) => PauliLetter::Z,
            (1, 1) => PauliLetter::XZ,
            _ => unreachable!(),
        }
    }

    /// Ordered product `self · rhs` (self applied after rhs).
    pub fn mul(&self, rhs: &PauliString) -> Result<PauliString> {
        if self.len() != rhs.len() {
            return Err(Error::DimensionMismatch {
                left: self.len(),
                right: rhs.len(),
            });
        }
        let mut out = PauliString::identity(self.len());
        let mut phase = (self.phase + rhs.phase) % 4;
        for j in 0..self.len() {
            // X^{x1} Z^{z1} X^{x2} Z^{z2} = (−1)^{z1·x2} X^{x1⊕x2} Z^{z1⊕z2}
            phase = (phase + 2 * (self.z[j] & rhs.x[j])) % 4;
            out.x[j] = self.x[j] ^ rhs.x[j];
            out.z[j] = self.z[j] ^ rhs.z[j];
        }
        out.phase = phase;
        Ok(out)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.phase {
            0 => write!(f, "+")?,
            1 => write!(f, "+i")?,
            2 => write!(f, "-")?,
            3 => write!(f, "-i")?,
            _ => unreachable!(),
        }
        for j in 0..self.len() {
            match self.letter(j) {
                PauliLetter::I => write!(f, ".")?,
                PauliLetter::X => write!(f, "X")?,
                PauliLetter::Z => write!(f, "Z")?,
                PauliLetter::XZ => write!(f, "W")?, // W = ordered XZ
                PauliLetter::Y => unreachable!(),
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(letter: PauliLetter) -> PauliString {
        PauliString::from_letters(&[letter])
    }

    /// i^phase · letter for a single site, as (phase, x, z).
    fn nf(s: &PauliString) -> (u8, u8, u8) {
        (s.phase, s.x[0], s.z[0])
    }

    #[test]
    fn single_qubit_multiplication_table() {
        use PauliLetter::*;
        // (a, b, expected phase exponent, expected letter): a·b = i^p · letter
        let table = [
            (X, X, 0, I),
            (Y, Y, 0, I),
            (Z, Z, 0, I),
            (X, Y, 1, Z), // XY = iZ
            (Y, X, 3, Z), // YX = -iZ
            (Y, Z, 1, X), // YZ = iX
            (Z, Y, 3, X),
            (Z, X, 1, Y), // ZX = iY
            (X, Z, 3, Y), // XZ = -iY
            (I, X, 0, X),
            (Z, I, 0, Z),
        ];
        for (a, b, p, c) in table {
            let prod = one(a).mul(&one(b)).unwrap();
            let expect = one(c);
            // compare up to the explicit phase: prod = i^p · expect
            assert_eq!(
                nf(&prod),
                ((expect.phase + p) % 4, expect.x[0], expect.z[0]),
                "{a:?}·{b:?}"
            );
        }
    }

    #[test]
    fn xz_squared_is_minus_identity() {
        let w = one(PauliLetter::XZ);
        let sq = w.mul(&w).unwrap();
        assert_eq!(nf(&sq), (2, 0, 0)); // i^2 = −1, letter I
    }

    #[test]
    fn xz_distinct_from_y() {
        assert_ne!(one(PauliLetter::XZ), one(PauliLetter::Y));
        // Y = i·XZ
        let y = one(PauliLetter::Y);
        assert_eq!(nf(&y), (1, 1, 1));
    }

    #[test]
    fn associativity_spot_check() {
        use PauliLetter::*;
        for a in [I, X, Y, Z, XZ] {
            for b in [I, X, Y, Z, XZ] {
                for c in [I, X, Y, Z, XZ] {
                    let left = one(a).mul(&one(b)).unwrap().mul(&one(c)).unwrap();
                    let right = one(a).mul(&one(b).mul(&one(c)).unwrap()).unwrap();
                    assert_eq!(left, right);
                }
            }
        }
    }
}
