//! Deviation and noise models plugged into the protocol stages.
//!
//! Strategies are immutable values and receive only server-visible data: a
//! state register, the stage tag, and the register positions the protocol
//! exposes at that stage. Client secrets are not reachable from this module,
//! so secret-independence holds by construction.

use crate::error::{Error, Result};
use crate::qsim::{Basis, Gate, MixedState, PauliLetter, PauliString, PureState};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

mod twirl;

pub use twirl::{standard_probes, twirl_channel, ChannelMap, TwirlReport};

/// Where in the protocol a deviation fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// While the Bell pair is created, before anything is sent.
    BellPair,
    /// On the transmitted half of each pair, in flight.
    Transmission,
    /// On the server's retained qubits before the gadget circuit runs.
    PreCircuit,
    /// On the prepared qubits before graph-state entangling.
    FkPreEntangle,
    /// On the graph state after entangling, before any measurement.
    FkPostEntangle,
    /// On one qubit after its basis rotation, right before its readout.
    FkBeforeMeasurement,
}

/// A deviation or noise model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AdversaryStrategy {
    Honest,
    /// Fixed Pauli applied at `stage` to the listed register positions.
    Pauli {
        stage: Stage,
        positions: Vec<usize>,
        letters: Vec<PauliLetter>,
    },
    /// Replace each Bell pair with an arbitrary two-qubit state ρ_ab
    /// (qubit 0 = transmitted half, qubit 1 = retained half).
    PreBellReplace { rho: MixedState },
    /// Unitary on `targets` plus `ancillas` fresh |0⟩ qubits, applied at
    /// `stage`; ancillas are discarded at the end of the stage.
    UnitaryDeviation {
        stage: Stage,
        targets: Vec<usize>,
        ancillas: usize,
        /// Row-major 2^(targets+ancillas) square matrix.
        matrix: Vec<Complex64>,
    },
    /// Independent X and Z flips, each with probability `p`, per qubit per
    /// transmission.
    #[serde(rename = "iid_xz_noise")]
    IidXZNoise { p: f64 },
    /// Per-qubit depolarizing: X, Y, or Z each with probability `eps`/3,
    /// applied at `stage`.
    IidDepolarizing { stage: Stage, eps: f64 },
    /// Photon loss with the given loss probability per transmission.
    Loss { p_loss: f64 },
}

/// Ancilla budget for unitary deviations.
pub const MAX_ANCILLAS: usize = 3;

impl AdversaryStrategy {
    /// Stage this strategy fires at, if it is stage-tagged.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            AdversaryStrategy::Pauli { stage, .. }
            | AdversaryStrategy::UnitaryDeviation { stage, .. }
            | AdversaryStrategy::IidDepolarizing { stage, .. } => Some(*stage),
            AdversaryStrategy::IidXZNoise { .. } => Some(Stage::Transmission),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AdversaryStrategy::IidXZNoise { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::InvalidParameter {
                        name: "p",
                        value: *p,
                    });
                }
            }
            AdversaryStrategy::IidDepolarizing { eps, .. } => {
                if !(0.0..=1.0).contains(eps) {
                    return Err(Error::InvalidParameter {
                        name: "eps",
                        value: *eps,
                    });
                }
            }
            AdversaryStrategy::Loss { p_loss } => {
                if !(0.0..1.0).contains(p_loss) {
                    return Err(Error::InvalidParameter {
                        name: "p_loss",
                        value: *p_loss,
                    });
                }
            }
            AdversaryStrategy::Pauli {
                positions, letters, ..
            } => {
                if positions.len() != letters.len() {
                    return Err(Error::DimensionMismatch {
                        left: positions.len(),
                        right: letters.len(),
                    });
                }
            }
            AdversaryStrategy::UnitaryDeviation {
                targets,
                ancillas,
                matrix,
                ..
            } => {
                if *ancillas > MAX_ANCILLAS {
                    return Err(Error::InvalidParameter {
                        name: "ancillas",
                        value: *ancillas as f64,
                    });
                }
                let dim = 1usize << (targets.len() + ancillas);
                if matrix.len() != dim * dim {
                    return Err(Error::BadAmplitudeLength {
                        got: matrix.len(),
                        n_qubits: targets.len() + ancillas,
                    });
                }
            }
            AdversaryStrategy::PreBellReplace { rho } => {
                if rho.n_qubits() != 2 {
                    return Err(Error::DimensionMismatch {
                        left: rho.n_qubits(),
                        right: 2,
                    });
                }
                rho.validate()?;
            }
            AdversaryStrategy::Honest => {}
        }
        Ok(())
    }

    /// Apply the strategy to `state` if it is tagged for `stage`.
    ///
    /// `exposed` lists the register positions the protocol hands the server
    /// at this stage (e.g. the transmitted halves); i.i.d. noise acts on
    /// those, while a `Pauli`/`UnitaryDeviation` uses its own positions,
    /// which must index into `exposed`-visible space of the register.
    pub fn apply(
        &self,
        stage: Stage,
        state: &mut PureState,
        exposed: &[usize],
        rng: &mut impl Rng,
    ) -> Result<()> {
        if self.stage() != Some(stage) {
            return Ok(());
        }
        match self {
            AdversaryStrategy::Honest
            | AdversaryStrategy::PreBellReplace { .. }
            | AdversaryStrategy::Loss { .. } => Ok(()),
            AdversaryStrategy::Pauli {
                positions, letters, ..
            } => {
                let string = PauliString::from_letters(letters);
                state.apply_pauli(&string, positions)?;
                Ok(())
            }
            AdversaryStrategy::IidXZNoise { p } => {
                for &q in exposed {
                    if rng.gen::<f64>() < *p {
                        state.apply_gate(Gate::X, &[q])?;
                    }
                    if rng.gen::<f64>() < *p {
                        state.apply_gate(Gate::Z, &[q])?;
                    }
                }
                Ok(())
            }
            AdversaryStrategy::IidDepolarizing { eps, .. } => {
                for &q in exposed {
                    if rng.gen::<f64>() < *eps {
                        let letter = match rng.gen_range(0..3) {
                            0 => PauliLetter::X,
                            1 => PauliLetter::Y,
                            _ => PauliLetter::Z,
                        };
                        state.apply_letter(letter, q)?;
                    }
                }
                Ok(())
            }
            AdversaryStrategy::UnitaryDeviation {
                targets,
                ancillas,
                matrix,
                ..
            } => {
                apply_unitary_with_ancillas(state, targets, *ancillas, matrix, rng)
            }
        }
    }

    /// Source of each transmitted Bell pair: |Φ⁺⟩ for an honest server, or a
    /// pure-state sample of ρ_ab for a replacement adversary (the mixture
    /// over samples reproduces ρ_ab exactly). Qubit 0 is the transmitted
    /// (client-bound) half, qubit 1 the retained half.
    pub fn bell_pair_source(&self, rng: &mut impl Rng) -> Result<PureState> {
        match self {
            AdversaryStrategy::PreBellReplace { rho } => rho.sample_pure(rng),
            _ => Ok(phi_plus()),
        }
    }
}

/// |Φ⁺⟩ = (|00⟩ + |11⟩)/√2.
pub fn phi_plus() -> PureState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    PureState::from_amplitudes(
        2,
        vec![
            Complex64::new(h, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(h, 0.0),
        ],
    )
    .expect("normalized")
}

/// Apply a unitary over (targets ⊕ fresh ancillas); the ancillas are then
/// read out in the Z basis and dropped, which reproduces the statistics of
/// tracing them out.
fn apply_unitary_with_ancillas(
    state: &mut PureState,
    targets: &[usize],
    ancillas: usize,
    matrix: &[Complex64],
    rng: &mut impl Rng,
) -> Result<()> {
    let mut work = state.clone();
    for _ in 0..ancillas {
        work = work.tensor(&PureState::zero(1)?)?;
    }
    let n = work.n_qubits();
    let mut all_targets: Vec<usize> = targets.to_vec();
    all_targets.extend((n - ancillas)..n);
    apply_dense_unitary(&mut work, &all_targets, matrix)?;
    for k in 0..ancillas {
        work.measure_remove(n - 1 - k, Basis::Z, rng)?;
    }
    *state = work;
    Ok(())
}

/// Apply a dense unitary on an ordered list of target qubits.
pub fn apply_dense_unitary(
    state: &mut PureState,
    targets: &[usize],
    matrix: &[Complex64],
) -> Result<()> {
    let k = targets.len();
    let dim = 1usize << k;
    if matrix.len() != dim * dim {
        return Err(Error::BadAmplitudeLength {
            got: matrix.len(),
            n_qubits: k,
        });
    }
    let n = state.n_qubits();
    for &t in targets {
        if t >= n {
            return Err(Error::QubitOutOfRange {
                index: t,
                n_qubits: n,
            });
        }
    }
    let strides: Vec<usize> = targets.iter().map(|&t| 1usize << (n - 1 - t)).collect();
    let full = state.amplitudes().to_vec();
    let mut out = vec![Complex64::new(0.0, 0.0); full.len()];
    // Iterate over all base indices with target bits zero, then mix the 2^k
    // sub-block through the matrix.
    for idx in 0..full.len() {
        if strides.iter().any(|&s| idx & s != 0) {
            continue;
        }
        let sub_index = |bits: usize| -> usize {
            let mut j = idx;
            for (pos, &s) in strides.iter().enumerate() {
                if bits >> (k - 1 - pos) & 1 == 1 {
                    j |= s;
                }
            }
            j
        };
        for row in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for col in 0..dim {
                acc += matrix[row * dim + col] * full[sub_index(col)];
            }
            out[sub_index(row)] = acc;
        }
    }
    *state = PureState::from_amplitudes(n, out)?;
    Ok(())
}

/// A strategy plus the leg of the protocol it is wired into.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelModel {
    pub adversary: AdversaryStrategy,
    pub applies_to: Leg,
}

/// Transmission legs a channel model can attach to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Leg {
    AliceToBob,
    BobInternal,
    BobToAlice,
}

impl ChannelModel {
    pub fn honest() -> Self {
        ChannelModel {
            adversary: AdversaryStrategy::Honest,
            applies_to: Leg::BobToAlice,
        }
    }
}
