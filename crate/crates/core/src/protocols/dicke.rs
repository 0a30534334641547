use serde::Serialize;

use crate::algebra::{BasisLabel, DensityMatrix, Level, Operator};
use crate::analysis::dicke_state;
use crate::dynamics::{evolve_master_equation, integrate, linspace, IntegratorConfig, Probes, RunDiagnostics};
use crate::error::{Error, Result};
use crate::models::{collapse_operators, DecoherenceSpec, SystemSpec};
use crate::pulses::{design_transfer_schedule, StirapSchedule, TransferDirection};
use crate::scalar::{two_pi, Cx, Real};

use super::{schedule_hamiltonian, Trace};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DickeReport {
    pub n_defects: usize,
    pub duration: f64,
    /// `⟨D|ρ(T)|D⟩` against the one-excitation Dicke state.
    pub fidelity: f64,
    /// Same schedule with all decoherence removed, full space.
    pub closed_fidelity: f64,
    /// Closed-system result from the three-state symmetric model.
    pub symmetric_fidelity: f64,
    /// `max |dθ_N/dt| / (2πΩ_N)` for the collective angle.
    pub collective_adiabaticity: f64,
    pub traces: Vec<Trace>,
    pub diagnostics: RunDiagnostics,
}

/// Transfer schedule used for Dicke preparation: θ from 0 to π/2 over
/// `duration`, two sin² edges through the midpoint.
pub fn dicke_schedule<T: Real>(duration: T, scale: T) -> Result<StirapSchedule<T>> {
    design_transfer_schedule(duration / T::lit(2.0), scale, TransferDirection::PhononToSpins)
}

/// Closed evolution in the symmetric basis `{|1 g1…g1⟩, |0 W_e⟩, |0 W_g2⟩}`
/// with the `√N`-enhanced sideband element; returns `|⟨0 W_g2|ψ(T)⟩|²`.
pub fn symmetric_dicke_transfer<T: Real>(n: usize, schedule: &StirapSchedule<T>, cfg: &IntegratorConfig<T>) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("need at least one defect"));
    }
    let root_n = T::from_usize(n).unwrap().sqrt();
    let half = T::lit(0.5);
    let tp: T = two_pi();
    let z = Cx::new(T::zero(), T::zero());
    let minus_i = Cx::new(T::zero(), -T::one());
    let y0 = vec![Cx::new(T::one(), T::zero()), z, z];
    let mut last = z;
    integrate(
        |t, y: &[Cx<T>], dy: &mut [Cx<T>]| {
            let (omr, om2) = schedule.evaluate_clamped(t);
            // H_10 = −√N Ω_R/2, H_12 = Ω_2/2 (rows: S1, S2 = W_e, S3 = W_g2).
            let a = -omr * root_n * half * tp;
            let b = om2 * half * tp;
            dy[0] = minus_i * (a.conj() * y[1]);
            dy[1] = minus_i * (a * y[0] + b * y[2]);
            dy[2] = minus_i * (b.conj() * y[1]);
        },
        y0,
        &[T::zero(), schedule.total_duration()],
        cfg,
        |_, _, y| last = y[2],
    )?;
    Ok(last.norm_sqr().to_f64_lossy())
}

/// Starts from `|1, g1…g1⟩` and drives the phonon into the symmetric
/// one-excitation spin state.
pub fn run_dicke_prep<T: Real>(
    spec: &SystemSpec<T>,
    schedule: &StirapSchedule<T>,
    samples: usize,
    cfg: &IntegratorConfig<T>,
) -> Result<DickeReport> {
    let n = spec.n_defects();
    if n < 2 {
        return Err(Error::invalid(format!("Dicke preparation needs at least two defects, got {n}")));
    }
    let l = spec.layout;
    let target = dicke_state::<T>(l)?;
    let proj = Operator::new(l, target.to_density().into_matrix())?;
    let rho0 = DensityMatrix::basis(l, &BasisLabel::new(1, &vec![Level::G1; n]))?;
    let total = schedule.total_duration();
    let grid = linspace(T::zero(), total, samples.max(2));
    let probes = Probes::new().observable("fidelity", proj.clone()).with_positivity();

    let h = schedule_hamiltonian(spec, schedule)?;
    let run = evolve_master_equation(&h, &collapse_operators(spec)?, &rho0, &grid, cfg, &probes)?;
    let f = run.observable("fidelity")?.to_vec();

    let closed_spec = spec.clone().with_decoherence(DecoherenceSpec::none())?;
    let hc = schedule_hamiltonian(&closed_spec, schedule)?;
    let closed = evolve_master_equation(&hc, &[], &rho0, &[T::zero(), total], cfg, &Probes::new().observable("fidelity", proj))?;

    Ok(DickeReport {
        n_defects: n,
        duration: total.to_f64_lossy(),
        fidelity: *f.last().expect("grid is non-empty"),
        closed_fidelity: *closed.observable("fidelity")?.last().expect("two samples"),
        symmetric_fidelity: symmetric_dicke_transfer(n, schedule, cfg)?,
        collective_adiabaticity: schedule.collective_adiabaticity_proxy(n, 2000).to_f64_lossy(),
        traces: vec![Trace::new("fidelity", run.times.clone(), f)],
        diagnostics: run.diagnostics,
    })
}
