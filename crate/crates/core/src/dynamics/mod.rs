//! Time evolution: Lindblad master equation and Schrödinger propagation
//! with an adaptive embedded Runge–Kutta scheme.

mod dopri;
mod hamiltonian;
mod master;

pub use dopri::{integrate, StepStats};
pub use hamiltonian::{Coefficient, TimeDependentHamiltonian};
pub use master::{
    evolve_master_equation, evolve_unitary, lindblad_rhs, Lindbladian, Probes, RunDiagnostics, Sampler,
    TrajectoryResult,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig<T: Real> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Upper bound on the internal step (ns).
    pub max_step: Option<T>,
    /// First trial step (ns); chosen automatically when absent.
    pub initial_step: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self { rel_tol: T::lit(1e-8), abs_tol: T::lit(1e-10), max_step: None, initial_step: None, max_steps: 5_000_000 }
    }
}

impl<T: Real> IntegratorConfig<T> {
    pub fn with_tolerances(rel_tol: T, abs_tol: T) -> Self {
        Self { rel_tol, abs_tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero()) || !(self.abs_tol > T::zero()) {
            return Err(Error::invalid("integrator tolerances must be positive"));
        }
        if let Some(h) = self.max_step {
            if !(h > T::zero()) {
                return Err(Error::invalid("integrator max_step must be positive"));
            }
        }
        if let Some(h) = self.initial_step {
            if !(h > T::zero()) {
                return Err(Error::invalid("integrator initial_step must be positive"));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("integrator max_steps must be positive"));
        }
        Ok(())
    }
}

/// `n` evenly spaced samples on `[t0, t1]`, both ends included.
pub fn linspace<T: Real>(t0: T, t1: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![t0],
        _ => {
            let step = (t1 - t0) / T::from_usize(n - 1).unwrap();
            (0..n).map(|i| if i == n - 1 { t1 } else { t0 + step * T::from_usize(i).unwrap() }).collect()
        }
    }
}

#[cfg(test)]
mod tests;
