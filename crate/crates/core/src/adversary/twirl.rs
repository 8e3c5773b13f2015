//! Single-qubit channel extraction and the Pauli twirl induced by the
//! client's random correction bits.
//!
//! For a replaced pair ρ_ab = (I ⊗ F)(|Φ⁺⟩⟨Φ⁺|), the map F is read off the
//! Choi blocks: F(|i⟩⟨j|) = 2·⟨i|_a ρ_ab |j⟩_a. F is completely positive but
//! not trace-preserving in general; the twirl
//! (1/4)·Σ_{o₁o₂} X^{o₁}Z^{o₂} F(X^{o₁}Z^{o₂} · Z^{o₂}X^{o₁}) Z^{o₂}X^{o₁}
//! is trace-preserving for every density ρ_ab.

use super::AdversaryStrategy;
use crate::error::{Error, Result};
use crate::qsim::{MixedState, PureState};
use num_complex::Complex64;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// A linear map on single-qubit operators, stored as the images of the four
/// basis matrices E_ij = |i⟩⟨j|.
#[derive(Debug, Clone)]
pub struct ChannelMap {
    /// images[2*i + j] = F(|i⟩⟨j|), each a row-major 2×2 matrix.
    images: [[Complex64; 4]; 4],
}

impl ChannelMap {
    pub fn identity() -> Self {
        let mut images = [[ZERO; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                images[2 * i + j][i * 2 + j] = Complex64::new(1.0, 0.0);
            }
        }
        ChannelMap { images }
    }

    /// Read the map off a two-qubit Choi state (qubit 0 = reference,
    /// qubit 1 = output side).
    pub fn from_choi_state(rho_ab: &MixedState) -> Result<Self> {
        if rho_ab.n_qubits() != 2 {
            return Err(Error::DimensionMismatch {
                left: rho_ab.n_qubits(),
                right: 2,
            });
        }
        let mut images = [[ZERO; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        // ⟨i k| ρ |j l⟩ → F(|i⟩⟨j|)_{k,l}, times 2
                        images[2 * i + j][k * 2 + l] =
                            rho_ab.entry(i * 2 + k, j * 2 + l) * 2.0;
                    }
                }
            }
        }
        Ok(ChannelMap { images })
    }

    /// Tomography of a black-box map from its action on density matrices:
    /// E_00, E_11 directly; E_01, E_10 from |+⟩⟨+| and |+_2⟩⟨+_2| probes,
    /// using F(|+⟩⟨+|) = [F(E00)+F(E01)+F(E10)+F(E11)]/2 and
    /// F(|+_2⟩⟨+_2|) = [F(E00)−iF(E01)+iF(E10)+F(E11)]/2.
    pub fn from_probe_action(
        mut act: impl FnMut(&MixedState) -> Result<MixedState>,
    ) -> Result<Self> {
        let probes = standard_probes();
        let outs: Vec<Vec<Complex64>> = probes
            .iter()
            .map(|p| act(p).map(|m| m.matrix().to_vec()))
            .collect::<Result<_>>()?;
        let mut images = [[ZERO; 4]; 4];
        for idx in 0..4 {
            images[0][idx] = outs[0][idx]; // F(E00)
            images[3][idx] = outs[1][idx]; // F(E11)
            let half = (outs[0][idx] + outs[1][idx]) * 0.5;
            let a = outs[2][idx] - half; // (F(E01)+F(E10))/2
            let b = outs[3][idx] - half; // i(F(E10)−F(E01))/2
            images[1][idx] = a + Complex64::i() * b; // F(E01)
            images[2][idx] = a - Complex64::i() * b; // F(E10)
        }
        Ok(ChannelMap { images })
    }

    /// Apply to a 2×2 operator (row-major).
    pub fn apply_raw(&self, op: &[Complex64; 4]) -> [Complex64; 4] {
        let mut out = [ZERO; 4];
        for i in 0..2 {
            for j in 0..2 {
                let coeff = op[i * 2 + j];
                for idx in 0..4 {
                    out[idx] += coeff * self.images[2 * i + j][idx];
                }
            }
        }
        out
    }

    /// Apply to a density matrix; the result is not renormalized.
    pub fn apply(&self, rho: &MixedState) -> Result<Vec<Complex64>> {
        if rho.n_qubits() != 1 {
            return Err(Error::DimensionMismatch {
                left: rho.n_qubits(),
                right: 1,
            });
        }
        let m = rho.matrix();
        Ok(self.apply_raw(&[m[0], m[1], m[2], m[3]]).to_vec())
    }

    /// The Pauli-twirled map (1/4)Σ X^{o₁}Z^{o₂} F( X^{o₁}Z^{o₂} · Z^{o₂}X^{o₁} ) Z^{o₂}X^{o₁}.
    pub fn twirled(&self) -> ChannelMap {
        let x = [ZERO, one(), one(), ZERO];
        let z = [one(), ZERO, ZERO, Complex64::new(-1.0, 0.0)];
        let id = [one(), ZERO, ZERO, one()];
        let mut images = [[ZERO; 4]; 4];
        for o1 in 0..2 {
            for o2 in 0..2 {
                // P = X^{o1} Z^{o2}
                let p = mat_mul(
                    if o1 == 1 { &x } else { &id },
                    if o2 == 1 { &z } else { &id },
                );
                for i in 0..2 {
                    for j in 0..2 {
                        let e = basis_matrix(i, j);
                        let inner = mat_mul(&mat_mul(&p, &e), &dagger(&p));
                        let f_inner = self.apply_raw(&inner);
                        let outer = mat_mul(&mat_mul(&p, &f_inner), &dagger(&p));
                        for idx in 0..4 {
                            images[2 * i + j][idx] += outer[idx] * 0.25;
                        }
                    }
                }
            }
        }
        ChannelMap { images }
    }

    /// Max deviation of tr(F(E_ij)) from δ_ij; zero for a TP map.
    pub fn trace_preservation_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let img = &self.images[2 * i + j];
                let tr = img[0] + img[3];
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((tr - Complex64::new(expect, 0.0)).norm());
            }
        }
        worst
    }

    /// Pauli transfer matrix R[a][b] = tr(σ_a F(σ_b))/2 over (I, X, Y, Z).
    pub fn pauli_transfer_matrix(&self) -> [[f64; 4]; 4] {
        let paulis = pauli_matrices();
        let mut r = [[0.0; 4]; 4];
        for (b, pb) in paulis.iter().enumerate() {
            let img = self.apply_raw(pb);
            for (a, pa) in paulis.iter().enumerate() {
                let prod = mat_mul(pa, &img);
                r[a][b] = ((prod[0] + prod[3]) * 0.5).re;
            }
        }
        r
    }

    /// Max |off-diagonal| of the PTM; zero for a Pauli channel.
    pub fn pauli_offdiagonal_defect(&self) -> f64 {
        let r = self.pauli_transfer_matrix();
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                if a != b {
                    worst = worst.max(r[a][b].abs());
                }
            }
        }
        worst
    }
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn basis_matrix(i: usize, j: usize) -> [Complex64; 4] {
    let mut m = [ZERO; 4];
    m[i * 2 + j] = one();
    m
}

fn mat_mul(a: &[Complex64; 4], b: &[Complex64; 4]) -> [Complex64; 4] {
    let mut out = [ZERO; 4];
    for i in 0..2 {
        for j in 0..2 {
            out[i * 2 + j] = a[i * 2] * b[j] + a[i * 2 + 1] * b[2 + j];
        }
    }
    out
}

fn dagger(a: &[Complex64; 4]) -> [Complex64; 4] {
    [a[0].conj(), a[2].conj(), a[1].conj(), a[3].conj()]
}

fn pauli_matrices() -> [[Complex64; 4]; 4] {
    let i = Complex64::i();
    [
        [one(), ZERO, ZERO, one()],
        [ZERO, one(), one(), ZERO],
        [ZERO, -i, i, ZERO],
        [one(), ZERO, ZERO, -one()],
    ]
}

/// Spanning single-qubit probe states |0⟩⟨0|, |1⟩⟨1|, |+⟩⟨+|, |i⟩⟨i|.
pub fn standard_probes() -> Vec<MixedState> {
    let zero = MixedState::from_pure(&PureState::basis(1, 0).unwrap());
    let one_state = MixedState::from_pure(&PureState::basis(1, 1).unwrap());
    let plus = MixedState::from_pure(&PureState::plus_k(0));
    let plus_i = MixedState::from_pure(&PureState::plus_k(2));
    vec![zero, one_state, plus, plus_i]
}

/// Report from twirling a single-pair deviation.
#[derive(Debug, Clone)]
pub struct TwirlReport {
    pub raw: ChannelMap,
    pub twirled: ChannelMap,
    /// tr-preservation defect of the raw map (may be far from zero).
    pub raw_tp_defect: f64,
    /// tr-preservation defect of the twirled map (should vanish).
    pub twirled_tp_defect: f64,
    /// PTM off-diagonal defect of the twirled map.
    pub twirled_pauli_defect: f64,
}

/// Numerically construct the effective single-qubit map of a deviation and
/// its Pauli twirl, and report trace preservation.
pub fn twirl_channel(strategy: &AdversaryStrategy, probes: &[MixedState]) -> Result<TwirlReport> {
    strategy.validate()?;
    let raw = match strategy {
        AdversaryStrategy::Honest => ChannelMap::identity(),
        AdversaryStrategy::PreBellReplace { rho } => ChannelMap::from_choi_state(rho)?,
        AdversaryStrategy::UnitaryDeviation {
            targets,
            ancillas,
            matrix,
            ..
        } => {
            if targets.len() != 1 {
                return Err(Error::InvalidConfig(
                    "twirl_channel expects a single-qubit deviation".into(),
                ));
            }
            let ancillas = *ancillas;
            let matrix = matrix.clone();
            ChannelMap::from_probe_action(move |rho| {
                let mut joint = rho.clone();
                for _ in 0..ancillas {
                    joint = joint.tensor(&MixedState::from_pure(&PureState::zero(1)?))?;
                }
                apply_dense_unitary_density(&mut joint, &matrix)?;
                joint.partial_trace(&[0])
            })?
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "twirl_channel does not handle {other:?}"
            )))
        }
    };
    if probes.is_empty() {
        return Err(Error::InvalidConfig("empty probe set".into()));
    }
    let twirled = raw.twirled();
    // Report defects over the caller's probe set as well as the basis-level
    // defect; the basis-level value dominates both.
    let probe_defect = |map: &ChannelMap| -> Result<f64> {
        let mut worst = 0.0f64;
        for p in probes {
            let out = map.apply(p)?;
            worst = worst.max(((out[0] + out[3]) - Complex64::new(1.0, 0.0)).norm());
        }
        Ok(worst)
    };
    Ok(TwirlReport {
        raw_tp_defect: raw.trace_preservation_defect().max(probe_defect(&raw)?),
        twirled_tp_defect: twirled
            .trace_preservation_defect()
            .max(probe_defect(&twirled)?),
        twirled_pauli_defect: twirled.pauli_offdiagonal_defect(),
        raw,
        twirled,
    })
}

/// Apply a dense unitary over the whole register of a density matrix.
fn apply_dense_unitary_density(rho: &mut MixedState, matrix: &[Complex64]) -> Result<()> {
    let dim = rho.dim();
    if matrix.len() != dim * dim {
        return Err(Error::BadAmplitudeLength {
            got: matrix.len(),
            n_qubits: rho.n_qubits(),
        });
    }
    // U ρ U†
    let m = rho.matrix();
    let mut tmp = vec![ZERO; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = ZERO;
            for k in 0..dim {
                acc += matrix[i * dim + k] * m[k * dim + j];
            }
            tmp[i * dim + j] = acc;
        }
    }
    let mut out = vec![ZERO; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = ZERO;
            for k in 0..dim {
                acc += tmp[i * dim + k] * matrix[j * dim + k].conj();
            }
            out[i * dim + j] = acc;
        }
    }
    *rho = MixedState::from_matrix(rho.n_qubits(), out)?;
    Ok(())
}
