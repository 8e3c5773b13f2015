//! Loss-tolerant transmission of a logical Bell half.
//!
//! Instead of sending all n physical qubits of the logical half (losing the
//! whole block if any one is lost), the server retries bare Bell halves per
//! physical qubit until one survives, then teleports each qubit of the
//! logical half onto a surviving bare half. The transmission cost drops from
//! exponential to linear in n.

use super::PauliFrame;
use crate::adversary::phi_plus;
use crate::css::CssCode;
use crate::error::Result;
use crate::qsim::PureState;
use rand::Rng;

/// Total bare-pair transmissions needed to land `n` surviving halves at
/// transmittance `1 − p_loss` (independent geometric retries per qubit).
pub fn lossy_attempts(n: usize, p_loss: f64, rng: &mut impl Rng) -> Result<u64> {
    if !(0.0..1.0).contains(&p_loss) {
        return Err(crate::error::Error::InvalidParameter {
            name: "p_loss",
            value: p_loss,
        });
    }
    let transmittance = 1.0 - p_loss;
    let mut total = 0u64;
    for _ in 0..n {
        loop {
            total += 1;
            if rng.gen::<f64>() < transmittance {
                break;
            }
        }
    }
    Ok(total)
}

/// A logical Bell pair whose transmitted half has been spliced onto bare
/// Bell halves by n teleportations.
#[derive(Debug, Clone)]
pub struct SplicedPair {
    /// 2n-qubit state: qubits 0..n−1 retained, n..2n−1 teleported.
    pub state: PureState,
    /// Per-physical-qubit teleportation byproducts on the transmitted half:
    /// qubit j carries X^{x_flip} Z^{z_flip} relative to the direct half.
    pub frames: Vec<PauliFrame>,
    /// Bare-pair transmissions consumed.
    pub attempts: u64,
}

/// Build |Φ_L⁺⟩ and teleport its transmitted half qubit by qubit through
/// bare Bell pairs (peak register width 2n + 2).
pub fn spliced_logical_bell_pair(
    code: &CssCode,
    p_loss: f64,
    rng: &mut impl Rng,
) -> Result<SplicedPair> {
    let attempts = lossy_attempts(code.n, p_loss, rng)?;
    let mut state = code.logical_bell_pair()?;
    let mut frames = Vec::with_capacity(code.n);
    for _ in 0..code.n {
        // Layout: [retained n][untel’d..][already teleported..]; the next
        // qubit to teleport always sits at index n.
        let width = state.n_qubits();
        state = state.tensor(&phi_plus())?;
        // near half = `width`, far half = `width + 1`
        let (x_parity, z_parity) = state.bell_measure(code.n, width, rng)?;
        // Receiver holds X^{z_parity} Z^{x_parity} · (teleported qubit).
        frames.push(PauliFrame::new(z_parity == 1, x_parity == 1));
    }
    Ok(SplicedPair {
        state,
        frames,
        attempts,
    })
}

/// Analytic mean transmissions of the all-or-nothing strategy: a batch of n
/// survives with probability t^n, each batch costs n, so the mean is n·t^{−n}.
pub fn all_or_nothing_mean(n: usize, transmittance: f64) -> f64 {
    n as f64 * transmittance.powi(-(n as i32))
}
