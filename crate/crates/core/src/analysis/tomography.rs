use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{dagger, kron, partial_trace, BasisLabel, DensityMatrix, HilbertLayout, Level, Matrix, Site, StateVector};
use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

/// Defect level encoding qubit state 0.
pub const QUBIT_ZERO: Level = Level::G3;
/// Defect level encoding qubit state 1.
pub const QUBIT_ONE: Level = Level::G2;

/// Pauli labels in χ order: `σ_a ⊗ σ_b` at index `4a + b`, `σ ∈ {I, X, Y, Z}`.
pub const PAULI_LABELS: [&str; 16] =
    ["II", "IX", "IY", "IZ", "XI", "XX", "XY", "XZ", "YI", "YX", "YY", "YZ", "ZI", "ZX", "ZY", "ZZ"];

fn c64<T: Real>(re: f64, im: f64) -> Cx<T> {
    Cx::new(T::lit(re), T::lit(im))
}

fn pauli<T: Real>(k: usize) -> Matrix<T> {
    let z = c64(0.0, 0.0);
    let o = c64(1.0, 0.0);
    let i = c64(0.0, 1.0);
    let m = match k {
        0 => [[o, z], [z, o]],
        1 => [[z, o], [o, z]],
        2 => [[z, -i], [i, z]],
        _ => [[o, z], [z, -o]],
    };
    Array2::from_shape_fn((2, 2), |(r, c)| m[r][c])
}

/// Two-qubit Pauli operator at χ index `m`.
pub fn pauli_2q<T: Real>(m: usize) -> Matrix<T> {
    kron(&pauli(m / 4), &pauli(m % 4))
}

/// Single-qubit preparation states `|0⟩, |1⟩, |+⟩, |+i⟩`.
fn prep_ket<T: Real>(k: usize) -> [Cx<T>; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match k {
        0 => [c64(1.0, 0.0), c64(0.0, 0.0)],
        1 => [c64(0.0, 0.0), c64(1.0, 0.0)],
        2 => [c64(s, 0.0), c64(s, 0.0)],
        _ => [c64(s, 0.0), c64(0.0, s)],
    }
}

/// Expansion of `|a⟩⟨b|` over the four preparation projectors.
fn unit_coefficients<T: Real>(a: usize, b: usize) -> [Cx<T>; 4] {
    match (a, b) {
        (0, 0) => [c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)],
        (1, 1) => [c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)],
        // |0⟩⟨1| = P+ + iP+i − (1+i)/2 (P0 + P1)
        (0, 1) => [c64(-0.5, -0.5), c64(-0.5, -0.5), c64(1.0, 0.0), c64(0.0, 1.0)],
        _ => [c64(-0.5, 0.5), c64(-0.5, 0.5), c64(1.0, 0.0), c64(0.0, -1.0)],
    }
}

/// Product input `|p_a⟩ ⊗ |p_b⟩` on two defects with the phonon in vacuum
/// (defect 0 is the most significant qubit).
pub fn tomography_input<T: Real>(layout: HilbertLayout, prep_a: usize, prep_b: usize) -> Result<DensityMatrix<T>> {
    if layout.defect_count() != 2 {
        return Err(Error::invalid("two-qubit tomography needs exactly two defects"));
    }
    let (ka, kb) = (prep_ket::<T>(prep_a), prep_ket::<T>(prep_b));
    let lv = [QUBIT_ZERO, QUBIT_ONE];
    let mut data = Array1::zeros(layout.total_dim());
    for qa in 0..2 {
        for qb in 0..2 {
            data[layout.encode(&BasisLabel::new(0, &[lv[qa], lv[qb]]))?] += ka[qa] * kb[qb];
        }
    }
    Ok(StateVector::new(layout, data)?.to_density())
}

/// Qubit block of the defect state after tracing out the phonon. Leakage
/// out of `{g3, g2}` shows up as a trace deficit.
pub fn qubit_block<T: Real>(rho: &DensityMatrix<T>) -> Result<Matrix<T>> {
    let red = partial_trace(rho, &[Site::Defect(0), Site::Defect(1)])?;
    let idx = |q: usize| {
        let lv = [QUBIT_ZERO, QUBIT_ONE];
        lv[q / 2].index() * 4 + lv[q % 2].index()
    };
    Ok(Array2::from_shape_fn((4, 4), |(i, j)| red.data[(idx(i), idx(j))]))
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiMatrix<T: Real> {
    /// `χ_mn` in the [`PAULI_LABELS`] order.
    #[serde(skip)]
    pub data: Matrix<T>,
    pub trace: f64,
    /// Smallest eigenvalue of `χ` before any projection.
    pub min_eigenvalue: f64,
    /// Largest deviation of a channel output from a valid density matrix.
    pub output_violation: f64,
    /// Negative eigenvalues were clipped to restore complete positivity.
    pub projected: bool,
}

impl<T: Real> ChiMatrix<T> {
    /// `tr(χ_U χ)` with `χ_U = u u†`, `u_m = tr(P_m U)/4`.
    pub fn process_fidelity(&self, u: &Matrix<T>) -> f64 {
        let coeffs: Vec<Cx<T>> = (0..16)
            .map(|m| {
                let p = pauli_2q::<T>(m);
                crate::algebra::trace(&p.dot(u)) / T::lit(4.0)
            })
            .collect();
        let mut acc = Cx::new(T::zero(), T::zero());
        for m in 0..16 {
            for n in 0..16 {
                acc += coeffs[m].conj() * self.data[(m, n)] * coeffs[n];
            }
        }
        acc.re.to_f64_lossy()
    }

    /// Process fidelity of `χ / tr χ`, i.e. conditioned on staying in the
    /// qubit subspace.
    pub fn normalized_process_fidelity(&self, u: &Matrix<T>) -> f64 {
        self.process_fidelity(u) / self.trace
    }

    /// `(d F_pro + 1)/(d + 1)` with `d = 4`.
    pub fn average_gate_fidelity(&self, u: &Matrix<T>) -> f64 {
        (4.0 * self.process_fidelity(u) + 1.0) / 5.0
    }

    /// Rows `(label_m, label_n, Re χ, Im χ)`.
    pub fn csv_rows(&self) -> Vec<(String, String, f64, f64)> {
        let mut rows = Vec::with_capacity(256);
        for m in 0..16 {
            for n in 0..16 {
                let v = self.data[(m, n)];
                rows.push((PAULI_LABELS[m].to_string(), PAULI_LABELS[n].to_string(), v.re.to_f64_lossy(), v.im.to_f64_lossy()));
            }
        }
        rows
    }
}

/// `diag(1, 1, 1, −1)` in the `|q_A q_B⟩` basis.
pub fn ideal_cz<T: Real>() -> Matrix<T> {
    let mut u = Array2::zeros((4, 4));
    for i in 0..3 {
        u[(i, i)] = c64(1.0, 0.0);
    }
    u[(3, 3)] = c64(-1.0, 0.0);
    u
}

/// Deviation of a 4×4 block from a density matrix with trace ≤ 1.
fn output_violation<T: Real>(m: &Matrix<T>) -> f64 {
    let herm = crate::algebra::hermiticity_error(m).to_f64_lossy();
    let h = (m + &dagger(m)).mapv(|v| v / T::lit(2.0));
    let neg = (-T::hermitian_eigenvalues(&h)[0]).max(T::zero()).to_f64_lossy();
    let over = (crate::algebra::trace(m).re.to_f64_lossy() - 1.0).max(0.0);
    herm.max(neg).max(over)
}

/// Reconstructs χ from the action of a two-qubit channel on the 16
/// product inputs.
///
/// `channel` maps a full-space input to the 4×4 qubit block of its output.
pub fn process_tomography_2q<T, F>(channel: F) -> Result<ChiMatrix<T>>
where
    T: Real,
    F: Fn(usize, usize) -> Result<Matrix<T>> + Sync,
{
    let outs: Vec<Result<Matrix<T>>> = (0..16).into_par_iter().map(|k| channel(k / 4, k % 4)).collect();
    let outs: Vec<Matrix<T>> = outs.into_iter().collect::<Result<_>>()?;
    for o in &outs {
        if o.dim() != (4, 4) {
            return Err(Error::dim("channel must return a 4x4 qubit block"));
        }
    }
    chi_from_outputs(&outs)
}

/// χ from outputs indexed `4·prep_a + prep_b`.
pub fn chi_from_outputs<T: Real>(outs: &[Matrix<T>]) -> Result<ChiMatrix<T>> {
    if outs.len() != 16 {
        return Err(Error::invalid("need 16 tomography outputs"));
    }
    let violation = outs.iter().map(output_violation).fold(0.0, f64::max);
    // E(|a⟩⟨b|) for two-qubit matrix units, then the Choi matrix.
    let mut choi = Array2::<Cx<T>>::zeros((16, 16));
    for a in 0..4 {
        for b in 0..4 {
            let ca = unit_coefficients::<T>(a / 2, b / 2);
            let cb = unit_coefficients::<T>(a % 2, b % 2);
            let mut e = Array2::<Cx<T>>::zeros((4, 4));
            for (i, &x) in ca.iter().enumerate() {
                for (j, &y) in cb.iter().enumerate() {
                    let c = x * y;
                    if c.norm() > T::zero() {
                        e = e + outs[4 * i + j].mapv(|v| v * c);
                    }
                }
            }
            for r in 0..4 {
                for s in 0..4 {
                    choi[(4 * a + r, 4 * b + s)] = e[(r, s)];
                }
            }
        }
    }
    // χ_mn = ⟨v_m|Λ|v_n⟩/16 with v_m = (I ⊗ P_m)|Ω⟩.
    let vs: Vec<Array1<Cx<T>>> = (0..16)
        .map(|m| {
            let p = pauli_2q::<T>(m);
            let mut v = Array1::zeros(16);
            for a in 0..4 {
                for r in 0..4 {
                    v[4 * a + r] = p[(r, a)];
                }
            }
            v
        })
        .collect();
    let mut chi = Array2::<Cx<T>>::zeros((16, 16));
    let lv: Vec<Array1<Cx<T>>> = vs.iter().map(|v| choi.dot(v)).collect();
    for m in 0..16 {
        for n in 0..16 {
            let val = vs[m].iter().zip(lv[n].iter()).fold(Cx::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * *y);
            chi[(m, n)] = val / T::lit(16.0);
        }
    }
    // Enforce exact Hermiticity, then check positivity.
    chi = (&chi + &dagger(&chi)).mapv(|v| v / T::lit(2.0));
    let (vals, vecs) = T::hermitian_eigh(&chi);
    let min_eig = vals[0].to_f64_lossy();
    let mut projected = false;
    if min_eig < -1e-6 {
        projected = true;
        let mut fixed = Array2::<Cx<T>>::zeros((16, 16));
        for (k, &l) in vals.iter().enumerate() {
            if l > T::zero() {
                let col = vecs.column(k);
                for i in 0..16 {
                    for j in 0..16 {
                        fixed[(i, j)] += col[i] * col[j].conj() * l;
                    }
                }
            }
        }
        chi = fixed;
    }
    let trace = crate::algebra::trace(&chi).re.to_f64_lossy();
    Ok(ChiMatrix { data: chi, trace, min_eigenvalue: min_eig, output_violation: violation, projected })
}

/// Channel `ρ ↦ U ρ U†` on the qubit pair, for tests and references.
pub fn unitary_channel_outputs<T: Real>(u: &Matrix<T>) -> Vec<Matrix<T>> {
    (0..16)
        .map(|k| {
            let (ka, kb) = (prep_ket::<T>(k / 4), prep_ket::<T>(k % 4));
            let psi = Array1::from_shape_fn(4, |q| ka[q / 2] * kb[q % 2]);
            let out = u.dot(&psi);
            Array2::from_shape_fn((4, 4), |(i, j)| out[i] * out[j].conj())
        })
        .collect()
}
