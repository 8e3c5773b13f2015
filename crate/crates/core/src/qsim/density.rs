//! Dense density matrices for the mixed-state side of the protocol audits.

use super::gate::{Gate, ZERO};
use super::state::{Basis, PureState, MAX_QUBITS};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// A density operator on `n` qubits, stored row-major.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "MixedStateRepr", into = "MixedStateRepr")]
pub struct MixedState {
    n: usize,
    dim: usize,
    mat: Vec<Complex64>,
}

/// Serialized form: validated through [`MixedState::from_matrix`] on load.
#[derive(serde::Serialize, serde::Deserialize)]
struct MixedStateRepr {
    n_qubits: usize,
    matrix: Vec<Complex64>,
}

impl TryFrom<MixedStateRepr> for MixedState {
    type Error = crate::error::Error;
    fn try_from(repr: MixedStateRepr) -> Result<Self> {
        MixedState::from_matrix(repr.n_qubits, repr.matrix)
    }
}

impl From<MixedState> for MixedStateRepr {
    fn from(state: MixedState) -> Self {
        MixedStateRepr {
            n_qubits: state.n,
            matrix: state.mat,
        }
    }
}

impl MixedState {
    pub fn from_pure(state: &PureState) -> Self {
        let dim = state.amplitudes().len();
        let mut mat = vec![ZERO; dim * dim];
        for (i, a) in state.amplitudes().iter().enumerate() {
            for (j, b) in state.amplitudes().iter().enumerate() {
                mat[i * dim + j] = a * b.conj();
            }
        }
        MixedState {
            n: state.n_qubits(),
            dim,
            mat,
        }
    }

    /// Build from a raw matrix; validates trace 1, Hermiticity, and
    /// positivity (eigenvalues ≥ −1e-9).
    pub fn from_matrix(n: usize, mat: Vec<Complex64>) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                requested: n,
                cap: MAX_QUBITS,
            });
        }
        let dim = 1usize << n;
        if mat.len() != dim * dim {
            return Err(Error::BadAmplitudeLength {
                got: mat.len(),
                n_qubits: n,
            });
        }
        let rho = MixedState { n, dim, mat };
        rho.validate()?;
        Ok(rho)
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        let dim = 1usize << n;
        let mut mat = vec![ZERO; dim * dim];
        let p = Complex64::new(1.0 / dim as f64, 0.0);
        for i in 0..dim {
            mat[i * dim + i] = p;
        }
        MixedState::from_matrix(n, mat)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.mat
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.mat[i * self.dim + j]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(Error::BadDensity(format!("trace = {tr}")));
        }
        for i in 0..self.dim {
            for j in 0..i {
                let d = self.entry(i, j) - self.entry(j, i).conj();
                if d.norm() > 1e-9 {
                    return Err(Error::BadDensity(format!(
                        "not Hermitian at ({i},{j}): deviation {d}"
                    )));
                }
            }
        }
        let eigs = self.eigenvalues();
        if let Some(min) = eigs.iter().cloned().reduce(f64::min) {
            if min < -1e-9 {
                return Err(Error::BadDensity(format!("negative eigenvalue {min}")));
            }
        }
        Ok(())
    }

    /// Conjugate by a gate unitary: ρ → U ρ U†.
    pub fn apply_gate(&mut self, gate: Gate, targets: &[usize]) -> Result<()> {
        let dim = self.dim;
        // U ρ: apply the kernel to each column.
        let mut col = vec![ZERO; dim];
        for j in 0..dim {
            for i in 0..dim {
                col[i] = self.entry(i, j);
            }
            super::state::kernel_apply_gate(self.n, &mut col, gate, targets)?;
            for i in 0..dim {
                self.mat[i * dim + j] = col[i];
            }
        }
        // (Uρ) U†: apply the kernel to each conjugated row.
        let mut row = vec![ZERO; dim];
        for i in 0..dim {
            for j in 0..dim {
                row[j] = self.mat[i * dim + j].conj();
            }
            super::state::kernel_apply_gate(self.n, &mut row, gate, targets)?;
            for j in 0..dim {
                self.mat[i * dim + j] = row[j].conj();
            }
        }
        Ok(())
    }

    /// ρ_self ⊗ ρ_other.
    pub fn tensor(&self, other: &MixedState) -> Result<MixedState> {
        let n = self.n + other.n;
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                requested: n,
                cap: MAX_QUBITS,
            });
        }
        let dim = self.dim * other.dim;
        let mut mat = vec![ZERO; dim * dim];
        for i1 in 0..self.dim {
            for j1 in 0..self.dim {
                for i2 in 0..other.dim {
                    for j2 in 0..other.dim {
                        mat[(i1 * other.dim + i2) * dim + (j1 * other.dim + j2)] =
                            self.entry(i1, j1) * other.entry(i2, j2);
                    }
                }
            }
        }
        Ok(MixedState { n, dim, mat })
    }

    /// Reduced state on `keep` (ascending order of original qubit indices).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<MixedState> {
        if keep.is_empty() {
            return Err(Error::EmptyKeep);
        }
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        for &q in &keep {
            if q >= self.n {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    n_qubits: self.n,
                });
            }
        }
        let k = keep.len();
        let kdim = 1usize << k;
        let traced: Vec<usize> = (0..self.n).filter(|q| !keep.contains(q)).collect();
        let tdim = 1usize << traced.len();
        // Map a (kept, traced) bit pair to a full index. Qubit 0 is the MSB.
        let full_index = |kept_bits: usize, traced_bits: usize| -> usize {
            let mut idx = 0usize;
            for (pos, &q) in keep.iter().enumerate() {
                let bit = (kept_bits >> (k - 1 - pos)) & 1;
                idx |= bit << (self.n - 1 - q);
            }
            for (pos, &q) in traced.iter().enumerate() {
                let bit = (traced_bits >> (traced.len() - 1 - pos)) & 1;
                idx |= bit << (self.n - 1 - q);
            }
            idx
        };
        let mut mat = vec![ZERO; kdim * kdim];
        for i in 0..kdim {
            for j in 0..kdim {
                let mut acc = ZERO;
                for t in 0..tdim {
                    acc += self.entry(full_index(i, t), full_index(j, t));
                }
                mat[i * kdim + j] = acc;
            }
        }
        Ok(MixedState {
            n: k,
            dim: kdim,
            mat,
        })
    }

    /// Eigenvalues of the (Hermitian) matrix, via the real symmetric
    /// embedding [[Re, −Im], [Im, Re]]; each eigenvalue of the complex matrix
    /// appears twice in the embedding.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(self.dim, &self.mat)
    }

    /// Spectral decomposition (λ_i, |v_i⟩) with λ clamped to ≥ 0.
    pub fn eigen_decomposition(&self) -> Vec<(f64, Vec<Complex64>)> {
        hermitian_eigen_decomposition(self.dim, &self.mat)
    }

    /// Sample a pure state from the spectral decomposition; the mixture over
    /// samples reproduces ρ exactly.
    pub fn sample_pure(&self, rng: &mut impl rand::Rng) -> Result<PureState> {
        let decomp = self.eigen_decomposition();
        let total: f64 = decomp.iter().map(|(l, _)| *l).sum();
        let mut draw = rng.gen::<f64>() * total;
        for (l, v) in &decomp {
            if draw < *l || (l - total).abs() < f64::EPSILON {
                let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                let amps: Vec<Complex64> = v.iter().map(|a| a / norm).collect();
                return PureState::from_amplitudes(self.n, amps);
            }
            draw -= l;
        }
        let (_, v) = decomp.last().expect("nonzero spectrum");
        let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        PureState::from_amplitudes(self.n, v.iter().map(|a| a / norm).collect())
    }

    /// Project qubit onto `outcome` in `basis`; returns branch probability
    /// and the collapsed, renormalized state.
    pub fn project(&self, qubit: usize, basis: Basis, outcome: u8) -> Result<(f64, MixedState)> {
        if qubit >= self.n {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                n_qubits: self.n,
            });
        }
        let mut work = self.clone();
        if basis == Basis::X {
            work.apply_gate(Gate::H, &[qubit])?;
        }
        let stride = 1usize << (self.n - 1 - qubit);
        let keep = if outcome == 0 { 0 } else { stride };
        let mut mat = vec![ZERO; self.dim * self.dim];
        let mut prob = 0.0;
        for i in 0..self.dim {
            if i & stride != keep {
                continue;
            }
            prob += work.entry(i, i).re;
            for j in 0..self.dim {
                if j & stride == keep {
                    mat[i * self.dim + j] = work.entry(i, j);
                }
            }
        }
        if prob < 1e-12 {
            return Err(Error::ZeroNormBranch { prob });
        }
        let scale = Complex64::new(1.0 / prob, 0.0);
        mat.iter_mut().for_each(|x| *x *= scale);
        Ok((
            prob,
            MixedState {
                n: self.n,
                dim: self.dim,
                mat,
            },
        ))
    }

    /// Apply a Pauli frame X^x Z^z to one qubit (conjugation).
    pub fn apply_frame(&mut self, qubit: usize, x: u8, z: u8) -> Result<()> {
        if z == 1 {
            self.apply_gate(Gate::Z, &[qubit])?;
        }
        if x == 1 {
            self.apply_gate(Gate::X, &[qubit])?;
        }
        Ok(())
    }
}

/// Trace distance (1/2)·Σ|λ_i(a − b)|.
pub fn trace_distance(a: &MixedState, b: &MixedState) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    let diff: Vec<Complex64> = a.mat.iter().zip(&b.mat).map(|(x, y)| x - y).collect();
    let eigs = hermitian_eigenvalues(a.dim, &diff);
    Ok(eigs.iter().map(|l| l.abs()).sum::<f64>() / 2.0)
}

/// Eigenvalues of a Hermitian matrix through the real symmetric embedding.
/// The embedding doubles every eigenvalue; this returns each once.
pub fn hermitian_eigenvalues(dim: usize, mat: &[Complex64]) -> Vec<f64> {
    let em = real_embedding(dim, mat);
    let mut eigs: Vec<f64> = em.symmetric_eigen().eigenvalues.iter().cloned().collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // pairs are adjacent after sorting; take every other one
    eigs.into_iter().step_by(2).collect()
}

fn real_embedding(dim: usize, mat: &[Complex64]) -> DMatrix<f64> {
    let mut em = DMatrix::<f64>::zeros(2 * dim, 2 * dim);
    for i in 0..dim {
        for j in 0..dim {
            let v = mat[i * dim + j];
            em[(i, j)] = v.re;
            em[(i, j + dim)] = -v.im;
            em[(i + dim, j)] = v.im;
            em[(i + dim, j + dim)] = v.re;
        }
    }
    // symmetrize against float noise
    let t = em.transpose();
    (em + t) / 2.0
}

/// Spectral decomposition of a Hermitian PSD matrix; eigenvalues clamped at 0
/// and pairs deduplicated by Gram–Schmidt over the complex eigenvectors.
pub fn hermitian_eigen_decomposition(
    dim: usize,
    mat: &[Complex64],
) -> Vec<(f64, Vec<Complex64>)> {
    let em = real_embedding(dim, mat);
    let se = em.symmetric_eigen();
    let mut pairs: Vec<(f64, Vec<Complex64>)> = Vec::new();
    let mut order: Vec<usize> = (0..2 * dim).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].partial_cmp(&se.eigenvalues[a]).unwrap());
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for &idx in &order {
        if basis.len() == dim {
            break;
        }
        let col = se.eigenvectors.column(idx);
        let mut z: Vec<Complex64> = (0..dim)
            .map(|i| Complex64::new(col[i], col[i + dim]))
            .collect();
        // remove components along already-kept eigenvectors
        for kept in &basis {
            let ip: Complex64 = kept.iter().zip(&z).map(|(k, v)| k.conj() * v).sum();
            for (zi, ki) in z.iter_mut().zip(kept) {
                *zi -= ip * ki;
            }
        }
        let norm: f64 = z.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue; // duplicate partner of an already-kept vector
        }
        let z: Vec<Complex64> = z.into_iter().map(|a| a / norm).collect();
        pairs.push((se.eigenvalues[idx].max(0.0), z.clone()));
        basis.push(z);
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::gate::ONE;
    use approx::assert_relative_eq;

    fn bell_pair() -> PureState {
        let mut s = PureState::zero(2).unwrap();
        s.apply_gate(Gate::H, &[0]).unwrap();
        s.apply_gate(Gate::H, &[1]).unwrap();
        s.apply_gate(Gate::Cz, &[0, 1]).unwrap();
        s.apply_gate(Gate::H, &[1]).unwrap();
        s
    }

    #[test]
    fn partial_trace_of_bell_half_is_maximally_mixed() {
        let rho = MixedState::from_pure(&bell_pair());
        let half = rho.partial_trace(&[0]).unwrap();
        let mm = MixedState::maximally_mixed(1).unwrap();
        assert!(trace_distance(&half, &mm).unwrap() < 1e-12);
    }

    #[test]
    fn partial_trace_keep_all_is_identity_map() {
        let rho = MixedState::from_pure(&bell_pair());
        let same = rho.partial_trace(&[0, 1]).unwrap();
        assert!(trace_distance(&same, &rho).unwrap() < 1e-12);
        assert!(rho.partial_trace(&[]).is_err());
    }

    #[test]
    fn partial_trace_of_product_state() {
        let s = PureState::plus_k(0)
            .tensor(&PureState::zero(1).unwrap())
            .unwrap();
        let rho = MixedState::from_pure(&s);
        let left = rho.partial_trace(&[0]).unwrap();
        let plus = MixedState::from_pure(&PureState::plus_k(0));
        assert!(trace_distance(&left, &plus).unwrap() < 1e-12);
    }

    #[test]
    fn trace_distance_examples() {
        let zero = MixedState::from_pure(&PureState::basis(1, 0).unwrap());
        let one = MixedState::from_pure(&PureState::basis(1, 1).unwrap());
        assert_relative_eq!(trace_distance(&zero, &zero).unwrap(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(trace_distance(&zero, &one).unwrap(), 1.0, epsilon = 1e-9);
        let mm = MixedState::maximally_mixed(1).unwrap();
        assert_relative_eq!(trace_distance(&mm, &zero).unwrap(), 0.5, epsilon = 1e-9);
        let two = MixedState::maximally_mixed(2).unwrap();
        assert!(matches!(
            trace_distance(&mm, &two),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eigen_decomposition_reconstructs_matrix() {
        let rho = MixedState::from_pure(&bell_pair())
            .partial_trace(&[0, 1])
            .unwrap();
        let decomp = rho.eigen_decomposition();
        let dim = rho.dim();
        let mut rebuilt = vec![ZERO; dim * dim];
        for (l, v) in &decomp {
            for i in 0..dim {
                for j in 0..dim {
                    rebuilt[i * dim + j] += Complex64::new(*l, 0.0) * v[i] * v[j].conj();
                }
            }
        }
        for (a, b) in rebuilt.iter().zip(rho.matrix()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn validate_rejects_bad_density() {
        // trace 2
        let mat = vec![
            ONE,
            ZERO,
            ZERO,
            ONE,
        ];
        assert!(MixedState::from_matrix(1, mat).is_err());
    }

    #[test]
    fn gate_conjugation_matches_pure_evolution() {
        let mut s = bell_pair();
        let mut rho = MixedState::from_pure(&s);
        s.apply_gate(Gate::T, &[1]).unwrap();
        rho.apply_gate(Gate::T, &[1]).unwrap();
        let expect = MixedState::from_pure(&s);
        assert!(trace_distance(&rho, &expect).unwrap() < 1e-12);
    }
}
