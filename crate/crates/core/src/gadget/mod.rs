//! The remote-state-preparation gadget: secret sampling, per-position remote
//! preparation over Bell pairs, the server's five-qubit circuit with
//! postselection on s = 0000, and the analytic output table that the circuit
//! must reproduce.
//!
//! Wire layout of the server circuit (qubits 0..4 = positions 1..5): T on
//! wire 0, S on wire 4, CZ chain 0–1–2–3–4, X-basis readout of wires
//! 0, 1, 3, 4; wire 2 is the output.

use crate::adversary::{AdversaryStrategy, Stage};
use crate::css::{
    remote_prepare_sampled_flip, spliced_logical_bell_pair, CssCode, PauliFrame,
};
use crate::error::{Error, Result};
use crate::qsim::{states_equal_up_to_phase, Basis, Gate, PureState};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// The client's per-gadget secret randomness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GadgetSecrets {
    pub c: [u8; 5],
    pub a: [u8; 5],
    pub r: [u8; 5],
    pub p: f64,
    pub p_prime: f64,
}

/// Pr[c_i = 0] for i = 1..5: ((1−2p)/(1−p), p, p′, p, (1−2p)/(1−p)).
pub fn secret_bit_probabilities(p: f64, p_prime: f64) -> Result<[f64; 5]> {
    if !(0.0..0.5).contains(&p) || p == 0.0 {
        return Err(Error::InvalidParameter { name: "p", value: p });
    }
    if !(0.0..1.0).contains(&p_prime) || p_prime == 0.0 {
        return Err(Error::InvalidParameter {
            name: "p_prime",
            value: p_prime,
        });
    }
    let edge = (1.0 - 2.0 * p) / (1.0 - p);
    Ok([edge, p, p_prime, p, edge])
}

/// Sample one gadget's secrets: c per the bit probabilities, a and r uniform.
pub fn sample_secrets(p: f64, p_prime: f64, rng: &mut impl Rng) -> Result<GadgetSecrets> {
    let probs = secret_bit_probabilities(p, p_prime)?;
    let mut c = [0u8; 5];
    let mut a = [0u8; 5];
    let mut r = [0u8; 5];
    for i in 0..5 {
        c[i] = u8::from(rng.gen::<f64>() >= probs[i]);
        a[i] = crate::rng::bit(rng);
        r[i] = crate::rng::bit(rng);
    }
    Ok(GadgetSecrets { c, a, r, p, p_prime })
}

/// Base state of a table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseState {
    Z0,
    Z1,
    Plus(u8),
}

/// The resolvable physical state: one of |0⟩, |1⟩, |+_k⟩ for k = 0..7.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateClass {
    Z(u8),
    Plus(u8),
}

/// The client-side record of what a gadget round prepared: the table row's
/// base state plus the X/Z byproduct powers carried by the listed
/// a-parities. Resolving the byproducts lands on one of ten states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateLabel {
    pub base: BaseState,
    pub x_power: u8,
    pub z_power: u8,
}

impl StateLabel {
    fn z(bit: u8) -> Self {
        StateLabel {
            base: if bit == 0 { BaseState::Z0 } else { BaseState::Z1 },
            x_power: 0,
            z_power: 0,
        }
    }

    fn plus(k: u8, x_power: u8, z_power: u8) -> Self {
        StateLabel {
            base: BaseState::Plus(k),
            x_power,
            z_power,
        }
    }

    /// Resolve byproducts: X^x Z^z |base⟩, with X|+_k⟩ ∝ |+_{(8−k)%8}⟩ and
    /// Z|+_k⟩ = |+_{k+4}⟩.
    pub fn class(&self) -> StateClass {
        match self.base {
            BaseState::Z0 => StateClass::Z(self.x_power),
            BaseState::Z1 => StateClass::Z(1 ^ self.x_power),
            BaseState::Plus(k) => {
                let mut k = (k + 4 * self.z_power) % 8;
                if self.x_power == 1 {
                    k = (8 - k) % 8;
                }
                StateClass::Plus(k)
            }
        }
    }

    pub fn is_z_class(&self) -> bool {
        matches!(self.base, BaseState::Z0 | BaseState::Z1)
    }

    /// The resolved single-qubit state.
    pub fn state(&self) -> PureState {
        match self.class() {
            StateClass::Z(b) => PureState::basis(1, usize::from(b)).expect("1 qubit"),
            StateClass::Plus(k) => PureState::plus_k(k),
        }
    }

    /// Short name of the resolved class ("Z0", "Z1", "P0".."P7").
    pub fn class_name(&self) -> String {
        match self.class() {
            StateClass::Z(b) => format!("Z{b}"),
            StateClass::Plus(k) => format!("P{k}"),
        }
    }
}

/// The analytic output table: given (c, a), the state the server's circuit
/// leaves on the output wire when all four readouts are zero. The eight rows
/// partition the 32 c-patterns; the c₃ = 0 row wins outright.
pub fn table_lookup(c: &[u8; 5], a: &[u8; 5]) -> StateLabel {
    if c[2] == 0 {
        // row 1: (·,·,0,·,·) → X^{a3}|0⟩
        StateLabel::z(a[2])
    } else if c[1] == 0 {
        if c[3] == 0 {
            // row 5: (·,0,1,0,·) → Z^{a2⊕a3⊕a4}|+_0⟩
            StateLabel::plus(0, 0, a[1] ^ a[2] ^ a[3])
        } else if c[4] == 0 {
            // row 3: (·,0,1,1,0) → X^{a4⊕a5}|0⟩
            StateLabel::z(a[3] ^ a[4])
        } else {
            // row 6: (·,0,1,1,1) → Z^{a2⊕a3⊕a4⊕a5}|+_2⟩
            StateLabel::plus(2, 0, a[1] ^ a[2] ^ a[3] ^ a[4])
        }
    } else if c[0] == 0 {
        // row 2: (0,1,1,·,·) → X^{a1⊕a2}|0⟩
        StateLabel::z(a[0] ^ a[1])
    } else if c[3] == 0 {
        // row 7: (1,1,1,0,·) → X^{a2} Z^{a1⊕a3⊕a4}|+_1⟩
        StateLabel::plus(1, a[1], a[0] ^ a[2] ^ a[3])
    } else if c[4] == 0 {
        // row 4: (1,1,1,1,0) → X^{a4⊕a5}|0⟩
        StateLabel::z(a[3] ^ a[4])
    } else {
        // row 8: (1,1,1,1,1) → X^{a2} Z^{a1⊕a2⊕a3⊕a4⊕a5}|+_3⟩
        StateLabel::plus(3, a[1], a[0] ^ a[1] ^ a[2] ^ a[3] ^ a[4])
    }
}

/// The state |A_i⟩ = H^{c} X^{a} |0⟩ a position holds after honest remote
/// preparation.
pub fn input_state(c: u8, a: u8) -> PureState {
    if c == 0 {
        PureState::basis(1, usize::from(a)).expect("1 qubit")
    } else {
        PureState::plus_k(4 * a)
    }
}

/// Tensor five single-qubit inputs and run the fixed circuit up to (not
/// including) the readouts.
fn circuit_state(inputs: &[PureState; 5]) -> Result<PureState> {
    let mut state = inputs[0].clone();
    for q in &inputs[1..] {
        if q.n_qubits() != 1 {
            return Err(Error::Arity {
                gate: "bob_circuit",
                expected: 1,
                got: q.n_qubits(),
            });
        }
        state = state.tensor(q)?;
    }
    apply_circuit_gates(&mut state)?;
    Ok(state)
}

/// T on wire 0, S on wire 4, then the CZ chain.
fn apply_circuit_gates(state: &mut PureState) -> Result<()> {
    if state.n_qubits() != 5 {
        return Err(Error::Arity {
            gate: "bob_circuit",
            expected: 5,
            got: state.n_qubits(),
        });
    }
    state.apply_gate(Gate::T, &[0])?;
    state.apply_gate(Gate::S, &[4])?;
    for edge in [[0, 1], [1, 2], [2, 3], [3, 4]] {
        state.apply_gate(Gate::Cz, &edge)?;
    }
    Ok(())
}

/// Readout wires in removal order (descending), with the slot each feeds in
/// the s-vector (s₁, s₂, s₄, s₅).
const READOUT: [(usize, usize); 4] = [(4, 3), (3, 2), (1, 1), (0, 0)];

/// Run the server circuit with sampled readouts. Returns (s₁,s₂,s₄,s₅) and
/// the post-measurement output qubit.
pub fn bob_circuit(inputs: &[PureState; 5], rng: &mut impl Rng) -> Result<([u8; 4], PureState)> {
    let mut state = circuit_state(inputs)?;
    let mut s = [0u8; 4];
    for (wire, slot) in READOUT {
        s[slot] = state.measure_remove(wire, Basis::X, rng)?;
    }
    Ok((s, state))
}

/// Exact postselection on s = 0000 by amplitude computation: returns the
/// probability of that branch and, when it is non-null, the output qubit.
pub fn bob_circuit_postselected(inputs: &[PureState; 5]) -> Result<(f64, Option<PureState>)> {
    let mut state = circuit_state(inputs)?;
    let mut prob = 1.0;
    for (wire, _) in READOUT {
        let (p0, _) = state.outcome_probabilities(wire, Basis::X)?;
        prob *= p0;
        if p0 < 1e-12 {
            return Ok((0.0, None));
        }
        state.project_remove(wire, Basis::X, 0)?;
    }
    Ok((prob, Some(state)))
}

/// Result of one gadget round.
#[derive(Debug, Clone)]
pub struct GadgetOutcome {
    pub accepted: bool,
    /// (s₁, s₂, s₄, s₅)
    pub s: [u8; 4],
    /// Client-side knowledge of the prepared state.
    pub label: StateLabel,
    /// The output qubit; discarded rounds carry no state.
    pub bob_state: Option<PureState>,
}

/// One round with full bookkeeping for transcripts.
#[derive(Debug, Clone)]
pub struct GadgetRun {
    pub outcome: GadgetOutcome,
    pub secrets: GadgetSecrets,
    /// Corrections the server received, per position.
    pub corrections: [PauliFrame; 5],
}

/// Per-position preparation backend for the Bell-pair legs.
#[derive(Debug, Clone, Copy)]
pub enum PrepBackend<'a> {
    /// One simulated qubit per logical qubit.
    Logical,
    /// Logical-level run with residual preparation flips sampled through the
    /// code's classical decode path (validated against the full physical
    /// pipeline); `p` is the per-physical-qubit X/Z flip rate.
    EncodedSampled { code: &'a CssCode, p: f64 },
}

/// Run the gadget end to end at the logical level.
pub fn run_gadget(
    p: f64,
    p_prime: f64,
    adversary: &AdversaryStrategy,
    rng: &mut impl Rng,
) -> Result<GadgetRun> {
    let secrets = sample_secrets(p, p_prime, rng)?;
    run_gadget_with_secrets(&secrets, adversary, PrepBackend::Logical, rng)
}

/// Run the gadget with an explicit preparation backend.
pub fn run_gadget_backend(
    p: f64,
    p_prime: f64,
    adversary: &AdversaryStrategy,
    backend: PrepBackend,
    rng: &mut impl Rng,
) -> Result<GadgetRun> {
    let secrets = sample_secrets(p, p_prime, rng)?;
    run_gadget_with_secrets(&secrets, adversary, backend, rng)
}

/// Deterministic-secrets entry point (the oracle tests drive this).
pub fn run_gadget_with_secrets(
    secrets: &GadgetSecrets,
    adversary: &AdversaryStrategy,
    backend: PrepBackend,
    rng: &mut impl Rng,
) -> Result<GadgetRun> {
    adversary.validate()?;
    let joint_deviation = matches!(
        adversary,
        AdversaryStrategy::UnitaryDeviation { .. }
    );
    let (mut bob, corrections) = if joint_deviation {
        assemble_joint(secrets, adversary, rng)?
    } else {
        assemble_per_pair(secrets, adversary, backend, rng)?
    };
    adversary.apply(Stage::PreCircuit, &mut bob, &[0, 1, 2, 3, 4], rng)?;
    apply_circuit_gates(&mut bob)?;

    let mut s = [0u8; 4];
    for (wire, slot) in READOUT {
        s[slot] = bob.measure_remove(wire, Basis::X, rng)?;
    }
    let accepted = s == [0, 0, 0, 0];
    let label = table_lookup(&secrets.c, &secrets.a);
    Ok(GadgetRun {
        outcome: GadgetOutcome {
            accepted,
            s,
            label,
            bob_state: accepted.then_some(bob),
        },
        secrets: secrets.clone(),
        corrections,
    })
}

/// Correction the client requests for one position.
fn correction_frame(c: u8, a: u8, r: u8, o: u8) -> PauliFrame {
    if c == 0 {
        PauliFrame::new((a ^ o) == 1, r == 1)
    } else {
        PauliFrame::new(r == 1, (a ^ o) == 1)
    }
}

fn apply_frame_1q(state: &mut PureState, qubit: usize, frame: PauliFrame) -> Result<()> {
    if frame.z_flip {
        state.apply_gate(Gate::Z, &[qubit])?;
    }
    if frame.x_flip {
        state.apply_gate(Gate::X, &[qubit])?;
    }
    Ok(())
}

/// Fast path: each Bell pair is its own 2-qubit register.
fn assemble_per_pair(
    secrets: &GadgetSecrets,
    adversary: &AdversaryStrategy,
    backend: PrepBackend,
    rng: &mut impl Rng,
) -> Result<(PureState, [PauliFrame; 5])> {
    let mut bob: Option<PureState> = None;
    let mut corrections = [PauliFrame::default(); 5];
    for i in 0..5 {
        let (c, a, r) = (secrets.c[i], secrets.a[i], secrets.r[i]);
        // A residual preparation flip from the encoded channel acts exactly
        // like an a-bit flip on the prepared input; inject it as an extra
        // X/Z error on the transmitted half before the measurement.
        let encoded_flip = match backend {
            PrepBackend::Logical => false,
            PrepBackend::EncodedSampled { code, p } => {
                remote_prepare_sampled_flip(code, c, p, rng)?
            }
        };
        let mut pair = adversary.bell_pair_source(rng)?;
        adversary.apply(Stage::Transmission, &mut pair, &[0], rng)?;
        if encoded_flip {
            // flips the transversal readout's decoded logical bit
            let flip_gate = if c == 0 { Gate::X } else { Gate::Z };
            pair.apply_gate(flip_gate, &[0])?;
        }
        let basis = if c == 0 { Basis::Z } else { Basis::X };
        let o = pair.measure_remove(0, basis, rng)?;
        let frame = correction_frame(c, a, r, o);
        let mut half = pair;
        apply_frame_1q(&mut half, 0, frame)?;
        corrections[i] = frame;
        bob = Some(match bob {
            None => half,
            Some(acc) => acc.tensor(&half)?,
        });
    }
    Ok((bob.expect("five positions"), corrections))
}

/// Joint path for deviations that may entangle pairs and ancillas: the five
/// pairs live in one register (qubit i = transmitted half of pair i,
/// qubit 5+i = retained half of pair i).
fn assemble_joint(
    secrets: &GadgetSecrets,
    adversary: &AdversaryStrategy,
    rng: &mut impl Rng,
) -> Result<(PureState, [PauliFrame; 5])> {
    let mut joint: Option<PureState> = None;
    for _ in 0..5 {
        let pair = adversary.bell_pair_source(rng)?;
        joint = Some(match joint {
            None => pair,
            Some(acc) => acc.tensor(&pair)?,
        });
    }
    // reorder: currently [t0 r0 t1 r1 …]; move transmitted halves first
    let mut state = joint.expect("five pairs");
    state = permute(&state, &{
        // new position of old qubit 2i = i; old 2i+1 → 5+i
        let mut perm = vec![0usize; 10];
        for i in 0..5 {
            perm[2 * i] = i;
            perm[2 * i + 1] = 5 + i;
        }
        perm
    })?;
    let transmitted: Vec<usize> = (0..5).collect();
    adversary.apply(Stage::BellPair, &mut state, &transmitted, rng)?;
    adversary.apply(Stage::Transmission, &mut state, &transmitted, rng)?;

    let mut corrections = [PauliFrame::default(); 5];
    // measure transmitted halves from the highest index down
    let mut outcomes = [0u8; 5];
    for i in (0..5).rev() {
        let basis = if secrets.c[i] == 0 { Basis::Z } else { Basis::X };
        outcomes[i] = state.measure_remove(i, basis, rng)?;
    }
    for i in 0..5 {
        let frame = correction_frame(secrets.c[i], secrets.a[i], secrets.r[i], outcomes[i]);
        apply_frame_1q(&mut state, i, frame)?;
        corrections[i] = frame;
    }
    Ok((state, corrections))
}

/// Rebuild a state with qubit `q` moved to `perm[q]`.
fn permute(state: &PureState, perm: &[usize]) -> Result<PureState> {
    let n = state.n_qubits();
    if perm.len() != n {
        return Err(Error::DimensionMismatch {
            left: perm.len(),
            right: n,
        });
    }
    let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); 1 << n];
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        let mut out = 0usize;
        for (q, &target) in perm.iter().enumerate() {
            let bit = (idx >> (n - 1 - q)) & 1;
            out |= bit << (n - 1 - target);
        }
        amps[out] = *amp;
    }
    PureState::from_amplitudes(n, amps)
}

/// Theorem-1 frequencies over all rounds (accepted or not): each Z-basis
/// label lands with probability z/32 and each |+_k⟩ with (1−z)/128, where
/// z = 1 − 4p²(1−p′).
pub fn theorem1_unconditional(p: f64, p_prime: f64) -> Result<(f64, f64)> {
    secret_bit_probabilities(p, p_prime)?;
    let z = 1.0 - 4.0 * p * p * (1.0 - p_prime);
    Ok((z / 32.0, (1.0 - z) / 128.0))
}

/// The modified, loss-tolerant gadget: every position transmits bare Bell
/// halves with per-qubit retries, splices them onto a logical Bell half by
/// teleportation, and proceeds as usual. Returns the total number of bare
/// transmissions used alongside the outcome. Runs at the physical level for
/// the preparation and hands verified logical qubits to the circuit.
pub fn run_gadget_lossy(
    code: &CssCode,
    p: f64,
    p_prime: f64,
    p_loss: f64,
    rng: &mut impl Rng,
) -> Result<(u64, GadgetRun)> {
    let secrets = sample_secrets(p, p_prime, rng)?;
    let mut attempts = 0u64;
    let mut inputs: Vec<PureState> = Vec::with_capacity(5);
    let mut corrections = [PauliFrame::default(); 5];
    for i in 0..5 {
        let (c, a, r) = (secrets.c[i], secrets.a[i], secrets.r[i]);
        let spliced = spliced_logical_bell_pair(code, p_loss, rng)?;
        attempts += spliced.attempts;
        let mut state = spliced.state;
        let basis = if c == 0 { Basis::Z } else { Basis::X };
        let transmitted: Vec<usize> = (code.n..2 * code.n).collect();
        let mut raw = code.transversal_measure(&mut state, &transmitted, basis, rng)?;
        // compensate the teleportation byproducts on the client's readout
        for (j, frame) in spliced.frames.iter().enumerate() {
            let flip = match basis {
                Basis::Z => frame.x_flip,
                Basis::X => frame.z_flip,
            };
            raw[j] ^= u8::from(flip);
        }
        let (o, _) = code.decode_classical(&raw, basis)?;
        let frame = correction_frame(c, a, r, o);
        let kept: Vec<usize> = (0..code.n).collect();
        code.apply_frame(&mut state, &kept, frame)?;
        corrections[i] = frame;
        // verify the block and hand a logical qubit to the circuit
        let expected_block = logical_input_block(code, c, a)?;
        if !states_equal_up_to_phase(&state, &expected_block, 1e-7) {
            return Err(Error::BadCode(
                "spliced preparation does not match the expected logical block".into(),
            ));
        }
        inputs.push(input_state(c, a));
    }
    let inputs: [PureState; 5] = inputs.try_into().expect("five positions");
    let (s, out) = bob_circuit(&inputs, rng)?;
    let accepted = s == [0, 0, 0, 0];
    let label = table_lookup(&secrets.c, &secrets.a);
    Ok((
        attempts,
        GadgetRun {
            outcome: GadgetOutcome {
                accepted,
                s,
                label,
                bob_state: accepted.then_some(out),
            },
            secrets,
            corrections,
        },
    ))
}

/// H_L^c X_L^a |0_L⟩ for a self-dual code (transversal H implements H_L).
fn logical_input_block(code: &CssCode, c: u8, a: u8) -> Result<PureState> {
    if code.hx != code.hz {
        return Err(Error::BadCode(
            "logical input blocks need a self-dual code (transversal H)".into(),
        ));
    }
    let mut block = code.encode_logical_zero()?;
    if a == 1 {
        for q in 0..code.n {
            block.apply_gate(Gate::X, &[q])?;
        }
    }
    if c == 1 {
        for q in 0..code.n {
            block.apply_gate(Gate::H, &[q])?;
        }
    }
    Ok(block)
}
