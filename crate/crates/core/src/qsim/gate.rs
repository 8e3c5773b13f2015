//! Gate set: H, S, T, X, Z, CZ and Z-rotations.
//!
//! Conventions fixed once and used everywhere:
//!   S = diag(1, i),  T = diag(1, e^{iπ/4}),  Rz(θ) = diag(1, e^{−iθ}),
//!   |+_k⟩ = (|0⟩ + e^{ikπ/4}|1⟩)/√2.

use num_complex::Complex64;
use std::f64::consts::PI;

pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// A named gate from the simulator's gate set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H,
    S,
    T,
    X,
    Z,
    Cz,
    /// Rz(θ) = diag(1, e^{−iθ}).
    Rz(f64),
}

impl Gate {
    /// Number of target qubits the gate takes.
    pub fn arity(self) -> usize {
        match self {
            Gate::Cz => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gate::H => "H",
            Gate::S => "S",
            Gate::T => "T",
            Gate::X => "X",
            Gate::Z => "Z",
            Gate::Cz => "CZ",
            Gate::Rz(_) => "Rz",
        }
    }

    /// 2×2 matrix of a single-qubit gate; `None` for CZ.
    pub fn matrix(self) -> Option<[[Complex64; 2]; 2]> {
        let d = |a: Complex64, b: Complex64| [[a, ZERO], [ZERO, b]];
        match self {
            Gate::H => {
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                Some([[h, h], [h, -h]])
            }
            Gate::S => Some(d(ONE, Complex64::new(0.0, 1.0))),
            Gate::T => Some(d(ONE, Complex64::from_polar(1.0, PI / 4.0))),
            Gate::X => Some([[ZERO, ONE], [ONE, ZERO]]),
            Gate::Z => Some(d(ONE, -ONE)),
            Gate::Rz(theta) => Some(d(ONE, Complex64::from_polar(1.0, -theta))),
            Gate::Cz => None,
        }
    }
}
