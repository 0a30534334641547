//! Dark states, geometric phases, fidelities and two-qubit process
//! tomography.

mod dark;
mod phases;
mod tomography;

pub use dark::{
    dark_state_single, dark_state_two, dark_state_two_theta_phi, dark_state_two_tilde,
    dark_state_two_tilde_theta_phi, dicke_state, DarkState,
};
pub use phases::{gamma1_closed_form, geometric_phases, wrap, GeometricPhases};
pub use tomography::{
    chi_from_outputs, ideal_cz, pauli_2q, process_tomography_2q, qubit_block, tomography_input,
    unitary_channel_outputs, ChiMatrix, PAULI_LABELS, QUBIT_ONE, QUBIT_ZERO,
};

use crate::algebra::{dagger, trace, DensityMatrix, Matrix, StateVector};
use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

/// `⟨ψ|ρ|ψ⟩`.
pub fn state_fidelity<T: Real>(rho: &DensityMatrix<T>, psi: &StateVector<T>) -> Result<f64> {
    if rho.layout() != psi.layout() {
        return Err(Error::dim("state and density matrix live on different layouts"));
    }
    let v = psi.amplitudes();
    let rv = rho.matrix().dot(v);
    let f = v.iter().zip(rv.iter()).fold(Cx::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * *b);
    Ok(f.re.to_f64_lossy())
}

fn sqrt_psd<T: Real>(m: &Matrix<T>) -> Matrix<T> {
    let h = (m + &dagger(m)).mapv(|v| v * T::lit(0.5));
    let (vals, vecs) = T::hermitian_eigh(&h);
    let n = h.nrows();
    let mut out = Matrix::<T>::zeros((n, n));
    for (k, &l) in vals.iter().enumerate() {
        let w = l.max(T::zero()).sqrt();
        if w == T::zero() {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += vecs[(i, k)] * vecs[(j, k)].conj() * w;
            }
        }
    }
    out
}

/// Uhlmann fidelity `(tr √(√ρ σ √ρ))²` of two square matrices of equal size.
pub fn overlap_fidelity<T: Real>(rho: &Matrix<T>, sigma: &Matrix<T>) -> Result<f64> {
    if rho.dim() != sigma.dim() || rho.nrows() != rho.ncols() {
        return Err(Error::dim("fidelity needs two square matrices of equal size"));
    }
    let sr = sqrt_psd(rho);
    let inner = sqrt_psd(&sr.dot(sigma).dot(&sr));
    Ok(trace(&inner).re.to_f64_lossy().powi(2))
}

/// Worst-case leakage `4η²` out of the two-excitation dark subspace during
/// the phase-accumulating plateau of an adiabatic CZ, `η = (2/7)√(2/13)`.
///
/// Returns `(4η², η)`.
pub fn leakage_upper_bound() -> (f64, f64) {
    let eta = 2.0 / 7.0 * (2.0f64 / 13.0).sqrt();
    (4.0 * eta * eta, eta)
}
