//! Dense pure-state and density-matrix simulation for at most 16 qubits,
//! with the fixed gate set, X/Z/Bell measurements, and the distance metrics
//! the protocol layers consume.

pub mod density;
pub mod gate;
pub mod pauli;
pub mod state;

pub use density::{hermitian_eigen_decomposition, trace_distance, MixedState};
pub use gate::Gate;
pub use pauli::{PauliLetter, PauliString};
pub use state::{apply_gate, Basis, PureState, MAX_QUBITS};

/// Phase-blind state equality: |⟨a|b⟩| ≥ 1 − tol.
pub fn states_equal_up_to_phase(a: &PureState, b: &PureState, tol: f64) -> bool {
    a.equal_up_to_phase(b, tol)
}
