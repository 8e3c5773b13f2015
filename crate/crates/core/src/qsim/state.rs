//! Dense pure states of up to 16 qubits.
//!
//! Index convention: qubit 0 is the most significant bit of the amplitude
//! index, so `|q0 q1 … q_{n−1}⟩` lives at index `q0·2^{n−1} + … + q_{n−1}`.
//! Every cross-module test depends on this ordering.

use super::gate::{Gate, ONE, ZERO};
use super::pauli::{PauliLetter, PauliString};
use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;

/// Hard cap on register width; the largest register the protocol needs is a
/// 14-qubit logical Bell pair plus one ancilla pair.
pub const MAX_QUBITS: usize = 16;

/// Measurement basis for single-qubit measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Basis {
    X,
    Z,
}

/// A normalized dense state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n: usize,
    amps: Vec<Complex64>,
}

impl PureState {
    /// |0…0⟩ on `n` qubits.
    pub fn zero(n: usize) -> Result<Self> {
        Self::check_width(n)?;
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        Ok(PureState { n, amps })
    }

    /// Computational basis state |index⟩.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        Self::check_width(n)?;
        if index >= (1 << n) {
            return Err(Error::QubitOutOfRange {
                index,
                n_qubits: n,
            });
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = ONE;
        Ok(PureState { n, amps })
    }

    /// Single-qubit |+_k⟩ = (|0⟩ + e^{ikπ/4}|1⟩)/√2.
    pub fn plus_k(k: u8) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amps = vec![
            Complex64::new(h, 0.0),
            Complex64::from_polar(h, f64::from(k % 8) * std::f64::consts::FRAC_PI_4),
        ];
        PureState { n: 1, amps }
    }

    /// Build from raw amplitudes; must be normalized within 1e-9.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        Self::check_width(n)?;
        if amps.len() != (1 << n) {
            return Err(Error::BadAmplitudeLength {
                got: amps.len(),
                n_qubits: n,
            });
        }
        let state = PureState { n, amps };
        let ns = state.norm_sqr();
        if (ns - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { norm_sqr: ns });
        }
        Ok(state)
    }

    fn check_width(n: usize) -> Result<()> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                requested: n,
                cap: MAX_QUBITS,
            });
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.amps.len(),
                right: other.amps.len(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Tensor product `self ⊗ other` (self's qubits first).
    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        Self::check_width(self.n + other.n)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(PureState {
            n: self.n + other.n,
            amps,
        })
    }

    fn stride(&self, qubit: usize) -> usize {
        1 << (self.n - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                n_qubits: self.n,
            });
        }
        Ok(())
    }

    /// Apply a gate to the given targets.
    pub fn apply_gate(&mut self, gate: Gate, targets: &[usize]) -> Result<()> {
        kernel_apply_gate(self.n, &mut self.amps, gate, targets)
    }

    /// Apply a phase-tracked Pauli string; `positions[j]` is the qubit acted
    /// on by letter `j`.
    pub fn apply_pauli(&mut self, pauli: &PauliString, positions: &[usize]) -> Result<()> {
        if pauli.len() != positions.len() {
            return Err(Error::DimensionMismatch {
                left: pauli.len(),
                right: positions.len(),
            });
        }
        for (j, &q) in positions.iter().enumerate() {
            let (x, z) = pauli.site(j);
            if z == 1 {
                self.apply_gate(Gate::Z, &[q])?;
            }
            if x == 1 {
                self.apply_gate(Gate::X, &[q])?;
            }
        }
        let phase = Complex64::i().powu(u32::from(pauli.phase % 4));
        if phase != ONE {
            for a in &mut self.amps {
                *a *= phase;
            }
        }
        Ok(())
    }

    /// Apply a single Pauli letter.
    pub fn apply_letter(&mut self, letter: PauliLetter, qubit: usize) -> Result<()> {
        let p = PauliString::single(self.n, qubit, letter)?;
        let positions: Vec<usize> = (0..self.n).collect();
        self.apply_pauli(&p, &positions)
    }

    /// Probabilities of outcomes (0, 1) when measuring `qubit` in `basis`.
    pub fn outcome_probabilities(&self, qubit: usize, basis: Basis) -> Result<(f64, f64)> {
        self.check_qubit(qubit)?;
        let mut work;
        let state = match basis {
            Basis::Z => self,
            Basis::X => {
                work = self.clone();
                work.apply_gate(Gate::H, &[qubit])?;
                &work
            }
        };
        let stride = state.stride(qubit);
        let p1: f64 = state
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & stride != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let p1 = p1.clamp(0.0, 1.0);
        Ok((1.0 - p1, p1))
    }

    /// Measure one qubit. An X-basis measurement is H followed by a Z-basis
    /// measurement, so the collapsed qubit is left in |outcome⟩ either way.
    pub fn measure(&mut self, qubit: usize, basis: Basis, rng: &mut impl Rng) -> Result<u8> {
        self.check_qubit(qubit)?;
        if basis == Basis::X {
            self.apply_gate(Gate::H, &[qubit])?;
        }
        let (p0, _) = self.outcome_probabilities(qubit, Basis::Z)?;
        let outcome = u8::from(rng.gen::<f64>() >= p0);
        self.collapse(qubit, outcome)?;
        Ok(outcome)
    }

    /// Force the given outcome; returns the branch probability and collapses.
    pub fn project(&mut self, qubit: usize, basis: Basis, outcome: u8) -> Result<f64> {
        self.check_qubit(qubit)?;
        if basis == Basis::X {
            self.apply_gate(Gate::H, &[qubit])?;
        }
        let (p0, p1) = self.outcome_probabilities(qubit, Basis::Z)?;
        let prob = if outcome == 0 { p0 } else { p1 };
        self.collapse(qubit, outcome)?;
        Ok(prob)
    }

    fn collapse(&mut self, qubit: usize, outcome: u8) -> Result<()> {
        let stride = self.stride(qubit);
        let keep = if outcome == 0 { 0 } else { stride };
        let mut kept_norm = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            if i & stride == keep {
                kept_norm += a.norm_sqr();
            }
        }
        if kept_norm < 1e-12 {
            return Err(Error::ZeroNormBranch { prob: kept_norm });
        }
        let scale = 1.0 / kept_norm.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & stride == keep {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
        Ok(())
    }

    /// Drop a qubit that is in a definite computational state `outcome`.
    fn remove(&mut self, qubit: usize, outcome: u8) {
        let stride = self.stride(qubit);
        let keep = if outcome == 0 { 0 } else { stride };
        let mut amps = Vec::with_capacity(self.amps.len() / 2);
        for (i, a) in self.amps.iter().enumerate() {
            if i & stride == keep {
                amps.push(*a);
            }
        }
        self.amps = amps;
        self.n -= 1;
    }

    /// Measure and drop the qubit from the register.
    pub fn measure_remove(&mut self, qubit: usize, basis: Basis, rng: &mut impl Rng) -> Result<u8> {
        let outcome = self.measure(qubit, basis, rng)?;
        self.remove(qubit, outcome);
        Ok(outcome)
    }

    /// Project onto `outcome`, drop the qubit, return the branch probability.
    pub fn project_remove(&mut self, qubit: usize, basis: Basis, outcome: u8) -> Result<f64> {
        let prob = self.project(qubit, basis, outcome)?;
        self.remove(qubit, outcome);
        Ok(prob)
    }

    /// Bell measurement on `(q1, q2)`: projects onto a Bell state and removes
    /// both qubits. Returns `(x_parity, z_parity)`: the X⊗X eigenvalue is
    /// (−1)^{x_parity}, the Z⊗Z eigenvalue is (−1)^{z_parity}. Teleporting
    /// |A⟩ through |Φ⁺⟩ leaves the receiver with X^{z_parity} Z^{x_parity}|A⟩.
    pub fn bell_measure(
        &mut self,
        q1: usize,
        q2: usize,
        rng: &mut impl Rng,
    ) -> Result<(u8, u8)> {
        if q1 == q2 {
            return Err(Error::DuplicateTarget { index: q1 });
        }
        self.check_qubit(q1)?;
        self.check_qubit(q2)?;
        // CNOT(q1→q2) = H(q2)·CZ·H(q2), then H(q1); Z-measurements then give
        // (x_parity, z_parity).
        self.apply_gate(Gate::H, &[q2])?;
        self.apply_gate(Gate::Cz, &[q1, q2])?;
        self.apply_gate(Gate::H, &[q2])?;
        self.apply_gate(Gate::H, &[q1])?;
        let x_parity = self.measure(q1, Basis::Z, rng)?;
        let z_parity = self.measure(q2, Basis::Z, rng)?;
        let (hi, lo) = if q1 > q2 { (q1, q2) } else { (q2, q1) };
        let (hi_out, lo_out) = if q1 > q2 {
            (x_parity, z_parity)
        } else {
            (z_parity, x_parity)
        };
        self.remove(hi, hi_out);
        self.remove(lo, lo_out);
        Ok((x_parity, z_parity))
    }

    /// ⟨ψ| P |ψ⟩ for a single-qubit Pauli letter.
    pub fn expectation(&self, letter: PauliLetter, qubit: usize) -> Result<f64> {
        let mut rotated = self.clone();
        match letter {
            PauliLetter::Z => {}
            PauliLetter::X => rotated.apply_gate(Gate::H, &[qubit])?,
            _ => {
                return Err(Error::Parse(
                    "expectation supports X and Z letters only".into(),
                ))
            }
        }
        let (p0, p1) = rotated.outcome_probabilities(qubit, Basis::Z)?;
        Ok(p0 - p1)
    }

    /// Phase-blind equality: |⟨a|b⟩| ≥ 1 − tol.
    pub fn equal_up_to_phase(&self, other: &PureState, tol: f64) -> bool {
        match self.inner(other) {
            Ok(ip) => ip.norm() >= 1.0 - tol,
            Err(_) => false,
        }
    }
}

/// Functional form of [`PureState::apply_gate`]; returns the new state.
pub fn apply_gate(state: &PureState, gate: Gate, targets: &[usize]) -> Result<PureState> {
    let mut out = state.clone();
    out.apply_gate(gate, targets)?;
    Ok(out)
}

/// Gate kernel on a raw amplitude vector. Shared with the density-matrix
/// evolution, which applies it to (unnormalized) rows and columns.
pub(crate) fn kernel_apply_gate(
    n: usize,
    amps: &mut [Complex64],
    gate: Gate,
    targets: &[usize],
) -> Result<()> {
    if targets.len() != gate.arity() {
        return Err(Error::Arity {
            gate: gate.name(),
            expected: gate.arity(),
            got: targets.len(),
        });
    }
    for &t in targets {
        if t >= n {
            return Err(Error::QubitOutOfRange {
                index: t,
                n_qubits: n,
            });
        }
    }
    let stride = |q: usize| 1usize << (n - 1 - q);
    match gate {
        Gate::Cz => {
            let (a, b) = (targets[0], targets[1]);
            if a == b {
                return Err(Error::DuplicateTarget { index: a });
            }
            let (s1, s2) = (stride(a), stride(b));
            for (i, x) in amps.iter_mut().enumerate() {
                if i & s1 != 0 && i & s2 != 0 {
                    *x = -*x;
                }
            }
        }
        Gate::S | Gate::T | Gate::Z | Gate::Rz(_) => {
            let phase = gate.matrix().unwrap()[1][1];
            let s = stride(targets[0]);
            for (i, x) in amps.iter_mut().enumerate() {
                if i & s != 0 {
                    *x *= phase;
                }
            }
        }
        _ => {
            let m = gate.matrix().unwrap();
            let s = stride(targets[0]);
            let mut base = 0;
            while base < amps.len() {
                let (lo, hi) = amps.split_at_mut(base + s);
                for (a0, a1) in lo[base..].iter_mut().zip(hi[..s].iter_mut()) {
                    let x0 = *a0;
                    let x1 = *a1;
                    *a0 = m[0][0] * x0 + m[0][1] * x1;
                    *a1 = m[1][0] * x0 + m[1][1] * x1;
                }
                base += s * 2;
            }
        }
    }
    Ok(())
}
