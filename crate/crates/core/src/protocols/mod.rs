//! End-to-end experiment drivers: phonon preparation, chevron and swap
//! sweeps, the STIRAP CZ gate, Dicke preparation, spectral-diffusion
//! statistics, dark-subspace leakage and the carrier light shift.
//!
//! Drivers take a [`SystemSpec`] and an [`IntegratorConfig`] and return
//! plain `f64` reports so the CLI can serialize them directly.

mod cz;
mod dicke;
mod fit;
mod leakage;
mod odro;
mod spectral;
mod stark;
mod swap;

pub use cz::{cz_tomography, run_cz_gate, run_cz_phases, run_robustness_scan, CzPhaseReport, CzReport, RobustnessReport};
pub use dicke::{dicke_schedule, run_dicke_prep, symmetric_dicke_transfer, DickeReport};
pub use fit::{fit_sinusoid_frequency, peak};
pub use leakage::{dark_pair_connection, run_leakage_sim, LeakageModel, LeakageReport};
pub use odro::{chevron_expected_frequency, run_chevron, run_odro_optimum, run_odro_prep, OdroOptimum, OdroPoint};
pub use spectral::{odro_fidelity_with_offset, run_spectral_diffusion_benchmark, stirap_fidelity_with_offset, SpectralDiffusionConfig, SpectralDiffusionRun, SchemeStats};
pub use stark::{run_ac_stark_check, StarkPoint, StarkReport};
pub use swap::{run_two_spin_swap, virtual_exchange_rate, DetuningMode, SwapReport};

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{Operator, StateVector};
use crate::dynamics::{RunDiagnostics, TimeDependentHamiltonian};
use crate::error::{Error, Result};
use crate::models::{raman_drive_operators, rotating_frame_undriven, SystemSpec};
use crate::pulses::StirapSchedule;
use crate::scalar::{two_pi, Cx, Real};

/// Sampled scalar curve.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Trace {
    pub name: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Trace {
    pub fn new(name: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Self {
        Self { name: name.into(), times, values }
    }
}

/// Headline number of a run plus the curves it came from.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FidelityReport {
    pub fidelity: f64,
    /// Time at which `fidelity` was reached (ns).
    pub time: f64,
    pub traces: Vec<Trace>,
    pub diagnostics: RunDiagnostics,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

/// Dense row-major result over the product of its axes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepGrid {
    pub axes: Vec<Axis>,
    /// What each grid value measures.
    pub quantity: String,
    pub values: Vec<f64>,
    pub metadata: BTreeMap<String, f64>,
    pub seed: Option<u64>,
}

impl SweepGrid {
    pub fn new(axes: Vec<Axis>, quantity: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let want: usize = axes.iter().map(|a| a.values.len()).product();
        if want != values.len() {
            return Err(Error::dim(format!("grid holds {} values, axes need {want}", values.len())));
        }
        Ok(Self { axes, quantity: quantity.into(), values, metadata: BTreeMap::new(), seed: None })
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.values.len()).collect()
    }

    /// Value at a 2-D index.
    pub fn at2(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axes[1].values.len() + j]
    }

    /// Row `i` of a 2-D grid.
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.axes[1].values.len();
        &self.values[i * n..(i + 1) * n]
    }
}

/// Rotating-frame model at the spec's detunings (with the excited-pair
/// shift) driven by `schedule` on every defect.
pub fn schedule_hamiltonian<T: Real>(spec: &SystemSpec<T>, schedule: &StirapSchedule<T>) -> Result<TimeDependentHamiltonian<T>> {
    let (ar, a2) = raman_drive_operators::<T>(spec.layout)?;
    let mut h = TimeDependentHamiltonian::new(rotating_frame_undriven(spec, true)?)?;
    let s1 = Arc::new(schedule.clone());
    let s2 = s1.clone();
    let tp: T = two_pi();
    h.add_drive(&ar, Arc::new(move |t| s1.evaluate_clamped(t).0 * tp))?;
    h.add_drive(&a2, Arc::new(move |t| s2.evaluate_clamped(t).1 * tp))?;
    Ok(h)
}

/// Exact propagation `e^{-iHt}ψ` under a static Hermitian generator via
/// its eigendecomposition, sampled at `times`.
pub fn propagate_static<T: Real>(h: &Operator<T>, psi: &StateVector<T>, times: &[T]) -> Vec<StateVector<T>> {
    let (vals, vecs) = T::hermitian_eigh(h.matrix());
    let coeffs: Vec<Cx<T>> = (0..vals.len())
        .map(|k| {
            vecs.column(k)
                .iter()
                .zip(psi.amplitudes().iter())
                .fold(Cx::new(T::zero(), T::zero()), |acc, (v, a)| acc + v.conj() * *a)
        })
        .collect();
    times
        .iter()
        .map(|&t| {
            let mut out = ndarray::Array1::zeros(vals.len());
            for (k, &l) in vals.iter().enumerate() {
                let c = coeffs[k] * Cx::from_polar(T::one(), -l * t);
                for i in 0..vals.len() {
                    out[i] += vecs[(i, k)] * c;
                }
            }
            StateVector::from_raw(psi.layout(), out)
        })
        .collect()
}

/// Componentwise worst case over several runs.
pub(crate) fn merge_diagnostics(all: &[RunDiagnostics]) -> RunDiagnostics {
    let mut d = RunDiagnostics::default();
    for r in all {
        d.max_trace_drift = d.max_trace_drift.max(r.max_trace_drift);
        d.max_hermiticity_error = d.max_hermiticity_error.max(r.max_hermiticity_error);
        d.min_eigenvalue = match (d.min_eigenvalue, r.min_eigenvalue) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        d.steps.accepted += r.steps.accepted;
        d.steps.rejected += r.steps.rejected;
        d.steps.rhs_evals += r.steps.rhs_evals;
    }
    d
}

pub(crate) fn to_f64<T: Real>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64_lossy()).collect()
}
