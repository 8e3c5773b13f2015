//! CSS-code layer: logical Bell pairs, transversal X/Z measurement, purely
//! classical syndrome decoding, and logical Pauli frame bookkeeping.
//!
//! The physical-level simulation of the protocol is confined to this module;
//! everything downstream runs one simulated qubit per logical qubit.

use crate::adversary::{AdversaryStrategy, Stage};
use crate::error::{Error, Result};
use crate::qsim::{Basis, Gate, PureState};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// An X/Z Pauli frame on one logical qubit. `X^x Z^z` (Z applied first).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliFrame {
    pub x_flip: bool,
    pub z_flip: bool,
}

impl PauliFrame {
    pub fn new(x_flip: bool, z_flip: bool) -> Self {
        PauliFrame { x_flip, z_flip }
    }

    /// Frame composition is bitwise XOR.
    pub fn xor(self, other: PauliFrame) -> PauliFrame {
        PauliFrame {
            x_flip: self.x_flip ^ other.x_flip,
            z_flip: self.z_flip ^ other.z_flip,
        }
    }
}

/// A CSS code given by binary parity checks and transversal logicals.
/// Rows are bitmasks with bit `j` = physical qubit `j`. Codes are loaded
/// from the plain-text matrix format (see [`parse_code_text`]) or built in.
#[derive(Debug, Clone)]
pub struct CssCode {
    pub n: usize,
    pub hx: Vec<u32>,
    pub hz: Vec<u32>,
    pub logical_x: u32,
    pub logical_z: u32,
    pub distance: usize,
    decode_z: DecodeTable,
    decode_x: DecodeTable,
}

#[derive(Debug, Clone, Default)]
struct DecodeTable {
    /// Coset leader per syndrome: minimum weight, ties broken by the lowest
    /// bitmask value.
    leaders: Vec<u32>,
    /// Leader weight is within the guaranteed correction radius.
    exact: Vec<bool>,
}

fn parity(word: u32) -> u8 {
    (word.count_ones() & 1) as u8
}

fn syndrome_of(checks: &[u32], word: u32) -> usize {
    checks
        .iter()
        .enumerate()
        .fold(0usize, |s, (i, &row)| s | (usize::from(parity(row & word)) << i))
}

impl DecodeTable {
    fn build(n: usize, checks: &[u32], radius: usize) -> Self {
        let syndromes = 1usize << checks.len();
        let mut leaders = vec![u32::MAX; syndromes];
        let mut weights = vec![u32::MAX; syndromes];
        for e in 0..(1u32 << n) {
            let s = syndrome_of(checks, e);
            let w = e.count_ones();
            if w < weights[s] {
                weights[s] = w;
                leaders[s] = e;
            }
        }
        let exact = weights
            .iter()
            .map(|&w| w != u32::MAX && w as usize <= radius)
            .collect();
        DecodeTable { leaders, exact }
    }
}

impl CssCode {
    pub fn new(
        n: usize,
        hx: Vec<u32>,
        hz: Vec<u32>,
        logical_x: u32,
        logical_z: u32,
        distance: usize,
    ) -> Result<Self> {
        if n == 0 || n > 16 {
            return Err(Error::BadCode(format!("unsupported length {n}")));
        }
        let mask = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        for &row in hx.iter().chain(&hz) {
            if row & !mask != 0 {
                return Err(Error::BadCode("check row exceeds code length".into()));
            }
        }
        // CSS condition: every X check commutes with every Z check.
        for &rx in &hx {
            for &rz in &hz {
                if parity(rx & rz) != 0 {
                    return Err(Error::BadCode("hx·hzᵀ ≠ 0".into()));
                }
            }
        }
        // Logical operators commute with all checks and anticommute with
        // each other.
        for &rz in &hz {
            if parity(logical_x & rz) != 0 {
                return Err(Error::BadCode("logical X anticommutes with a Z check".into()));
            }
        }
        for &rx in &hx {
            if parity(logical_z & rx) != 0 {
                return Err(Error::BadCode("logical Z anticommutes with an X check".into()));
            }
        }
        if parity(logical_x & logical_z) != 1 {
            return Err(Error::BadCode("logical X and Z must anticommute".into()));
        }
        if distance == 0 {
            return Err(Error::BadCode("distance must be ≥ 1".into()));
        }
        let radius = (distance - 1) / 2;
        let decode_z = DecodeTable::build(n, &hz, radius);
        let decode_x = DecodeTable::build(n, &hx, radius);
        Ok(CssCode {
            n,
            hx,
            hz,
            logical_x,
            logical_z,
            distance,
            decode_z,
            decode_x,
        })
    }

    /// The [[7,1,3]] Steane code with transversal X^⊗7 / Z^⊗7 logicals.
    pub fn steane() -> Self {
        let rows = vec![0b1010101, 0b0110011, 0b0001111];
        CssCode::new(7, rows.clone(), rows, 0b1111111, 0b1111111, 3)
            .expect("Steane code is consistent")
    }

    /// Correction radius ⌊(d−1)/2⌋.
    pub fn radius(&self) -> usize {
        (self.distance - 1) / 2
    }

    /// Map a qubit-indexed word (bit j = qubit j) to an amplitude index
    /// (qubit 0 = most significant bit).
    fn word_to_index(&self, word: u32, width: usize) -> usize {
        let mut idx = 0usize;
        for j in 0..width {
            if word >> j & 1 == 1 {
                idx |= 1 << (width - 1 - j);
            }
        }
        idx
    }

    /// Enumerate the span of the X-check rows.
    fn x_span(&self) -> Vec<u32> {
        let mut span = vec![0u32];
        for &row in &self.hx {
            let extended: Vec<u32> = span.iter().map(|&v| v ^ row).collect();
            // rows are independent for the shipped codes; dedupe defensively
            for v in extended {
                if !span.contains(&v) {
                    span.push(v);
                }
            }
        }
        span
    }

    /// |0_L⟩: the uniform superposition over the X-stabilizer span.
    pub fn encode_logical_zero(&self) -> Result<PureState> {
        if self.n > 8 {
            return Err(Error::TooManyQubits {
                requested: self.n,
                cap: 8,
            });
        }
        let span = self.x_span();
        let dim = 1usize << self.n;
        let amp = num_complex::Complex64::new(1.0 / (span.len() as f64).sqrt(), 0.0);
        let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); dim];
        for &v in &span {
            amps[self.word_to_index(v, self.n)] = amp;
        }
        PureState::from_amplitudes(self.n, amps)
    }

    /// |Φ_L⁺⟩ = (|0_L 0_L⟩ + |1_L 1_L⟩)/√2 on 2n physical qubits.
    /// Qubits 0..n−1 are the first (retained) half.
    pub fn logical_bell_pair(&self) -> Result<PureState> {
        if 2 * self.n > crate::qsim::MAX_QUBITS {
            return Err(Error::TooManyQubits {
                requested: 2 * self.n,
                cap: crate::qsim::MAX_QUBITS,
            });
        }
        let span = self.x_span();
        let dim = 1usize << (2 * self.n);
        let amp = num_complex::Complex64::new(
            1.0 / ((span.len() as f64) * 2f64.sqrt()),
            0.0,
        );
        let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); dim];
        for &v in &span {
            for &w in &span {
                let zero_zero =
                    (self.word_to_index(v, self.n) << self.n) | self.word_to_index(w, self.n);
                let one_one = (self.word_to_index(v ^ self.logical_x, self.n) << self.n)
                    | self.word_to_index(w ^ self.logical_x, self.n);
                amps[zero_zero] += amp;
                amps[one_one] += amp;
            }
        }
        PureState::from_amplitudes(2 * self.n, amps)
    }

    /// Measure each qubit of `half` in `basis`; returns raw bits in the
    /// order of `half` and leaves `state` holding only the remainder.
    pub fn transversal_measure(
        &self,
        state: &mut PureState,
        half: &[usize],
        basis: Basis,
        rng: &mut impl Rng,
    ) -> Result<Vec<u8>> {
        if half.len() != self.n {
            return Err(Error::DimensionMismatch {
                left: half.len(),
                right: self.n,
            });
        }
        // remove from the highest index down so earlier positions stay valid
        let mut order: Vec<(usize, usize)> = half.iter().cloned().enumerate().collect();
        order.sort_by(|a, b| b.1.cmp(&a.1));
        let mut bits = vec![0u8; self.n];
        for (slot, qubit) in order {
            bits[slot] = state.measure_remove(qubit, basis, rng)?;
        }
        Ok(bits)
    }

    /// Syndrome-decode a raw transversal readout. Returns the logical bit of
    /// the corrected word and whether the correction was within the
    /// guaranteed radius (`false` = best-effort coset leader).
    pub fn decode_classical(&self, raw_bits: &[u8], basis: Basis) -> Result<(u8, bool)> {
        if raw_bits.len() != self.n {
            return Err(Error::DimensionMismatch {
                left: raw_bits.len(),
                right: self.n,
            });
        }
        let word = raw_bits
            .iter()
            .enumerate()
            .fold(0u32, |w, (j, &b)| w | (u32::from(b & 1) << j));
        let (checks, table, logical) = match basis {
            Basis::Z => (&self.hz, &self.decode_z, self.logical_z),
            Basis::X => (&self.hx, &self.decode_x, self.logical_x),
        };
        let s = syndrome_of(checks, word);
        let leader = table.leaders[s];
        let corrected_word = word ^ leader;
        Ok((parity(corrected_word & logical), table.exact[s]))
    }

    /// Syndrome of a raw readout (diagnostic surface for tests).
    pub fn syndrome(&self, raw_bits: &[u8], basis: Basis) -> Result<usize> {
        if raw_bits.len() != self.n {
            return Err(Error::DimensionMismatch {
                left: raw_bits.len(),
                right: self.n,
            });
        }
        let word = raw_bits
            .iter()
            .enumerate()
            .fold(0u32, |w, (j, &b)| w | (u32::from(b & 1) << j));
        let checks = match basis {
            Basis::Z => &self.hz,
            Basis::X => &self.hx,
        };
        Ok(syndrome_of(checks, word))
    }

    /// Apply a logical Pauli frame transversally to the given qubits.
    pub fn apply_frame(
        &self,
        state: &mut PureState,
        qubits: &[usize],
        frame: PauliFrame,
    ) -> Result<()> {
        if qubits.len() != self.n {
            return Err(Error::DimensionMismatch {
                left: qubits.len(),
                right: self.n,
            });
        }
        if frame.z_flip {
            for &q in qubits {
                state.apply_gate(Gate::Z, &[q])?;
            }
        }
        if frame.x_flip {
            for &q in qubits {
                state.apply_gate(Gate::X, &[q])?;
            }
        }
        Ok(())
    }

    /// ⟨logical Z⟩ or ⟨logical X⟩ of an n-qubit state.
    pub fn logical_expectation(&self, state: &PureState, basis: Basis) -> Result<f64> {
        if state.n_qubits() != self.n {
            return Err(Error::DimensionMismatch {
                left: state.n_qubits(),
                right: self.n,
            });
        }
        match basis {
            Basis::Z => {
                let mask = self.word_to_index(self.logical_z, self.n);
                Ok(state
                    .amplitudes()
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        let sign = if (i & mask).count_ones() % 2 == 0 {
                            1.0
                        } else {
                            -1.0
                        };
                        sign * a.norm_sqr()
                    })
                    .sum())
            }
            Basis::X => {
                let mask = self.word_to_index(self.logical_x, self.n);
                let amps = state.amplitudes();
                let val: num_complex::Complex64 = amps
                    .iter()
                    .enumerate()
                    .map(|(i, a)| a.conj() * amps[i ^ mask])
                    .sum();
                Ok(val.re)
            }
        }
    }
}

/// Result of one remote preparation round at the physical level.
#[derive(Debug, Clone)]
pub struct RemotePrep {
    /// Correction the client requests.
    pub frame_request: PauliFrame,
    /// Decoded logical measurement outcome.
    pub o: u8,
    /// The server's n physical qubits after applying the frame.
    pub bob_state: PureState,
    /// Whether the decode stayed within the guaranteed radius.
    pub decode_exact: bool,
}

/// One full remote-preparation round: the server shares a logical Bell pair,
/// noise acts on the transmitted half, the client measures transversally
/// (Z if `c` = 0, X if `c` = 1), decodes, and requests the correction
/// X_L^{a⊕o} Z_L^{r} (c = 0) or X_L^{r} Z_L^{a⊕o} (c = 1). The server's
/// block then encodes H_L^c X_L^a |0_L⟩ up to correctable physical error.
pub fn remote_prepare(
    code: &CssCode,
    c: u8,
    a: u8,
    r: u8,
    noise: &AdversaryStrategy,
    rng: &mut impl Rng,
) -> Result<RemotePrep> {
    let mut state = code.logical_bell_pair()?;
    let transmitted: Vec<usize> = (code.n..2 * code.n).collect();
    noise.apply(Stage::Transmission, &mut state, &transmitted, rng)?;
    let basis = if c == 0 { Basis::Z } else { Basis::X };
    let raw = code.transversal_measure(&mut state, &transmitted, basis, rng)?;
    let (o, decode_exact) = code.decode_classical(&raw, basis)?;
    let frame_request = if c == 0 {
        PauliFrame::new((a ^ o) == 1, r == 1)
    } else {
        PauliFrame::new(r == 1, (a ^ o) == 1)
    };
    let kept: Vec<usize> = (0..code.n).collect();
    code.apply_frame(&mut state, &kept, frame_request)?;
    Ok(RemotePrep {
        frame_request,
        o,
        bob_state: state,
        decode_exact,
    })
}

/// Classical fast path for the logical flip rate of [`remote_prepare`] under
/// i.i.d. X/Z flips at rate `p` on the transmitted half. For a Z-basis round
/// only X flips matter (and dually): the flip pattern feeds the same decode
/// tables, and the prepared block is logically flipped exactly when the
/// residual `e ⊕ ê` carries odd overlap with the logical support.
pub fn remote_prepare_sampled_flip(
    code: &CssCode,
    c: u8,
    p: f64,
    rng: &mut impl Rng,
) -> Result<bool> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter { name: "p", value: p });
    }
    let mut e = 0u32;
    for j in 0..code.n {
        if rng.gen::<f64>() < p {
            e |= 1 << j;
        }
    }
    let (checks, table, logical) = if c == 0 {
        (&code.hz, &code.decode_z, code.logical_z)
    } else {
        (&code.hx, &code.decode_x, code.logical_x)
    };
    let s = syndrome_of(checks, e);
    let residual = e ^ table.leaders[s];
    Ok(parity(residual & logical) == 1)
}

mod lossy;
mod parse;

pub use lossy::{all_or_nothing_mean, lossy_attempts, spliced_logical_bell_pair, SplicedPair};
pub use parse::{code_to_text, parse_code_text};
