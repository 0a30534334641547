use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{phonon_number, BasisLabel, HilbertLayout, Level, StateVector};
use crate::analysis::{
    geometric_phases, ideal_cz, process_tomography_2q, qubit_block, tomography_input, ChiMatrix, GeometricPhases,
    QUBIT_ONE, QUBIT_ZERO,
};
use crate::dynamics::{evolve_master_equation, evolve_unitary, linspace, IntegratorConfig, Probes, RunDiagnostics};
use crate::error::{Error, Result};
use crate::models::{collapse_operators, DecoherenceSpec, SystemSpec};
use crate::pulses::{design_cz_schedule, CzDesign};
use crate::scalar::{Cx, Real};

use super::{merge_diagnostics, schedule_hamiltonian, Axis, SweepGrid, Trace};

fn check_gate_spec<T: Real>(spec: &SystemSpec<T>) -> Result<()> {
    if spec.n_defects() != 2 {
        return Err(Error::invalid(format!("CZ gate needs two defects, got {}", spec.n_defects())));
    }
    for i in 0..2 {
        let (d1, d2) = spec.detunings(i);
        if d1.abs() > T::lit(1e-9) || d2.abs() > T::lit(1e-9) {
            return Err(Error::invalid(format!("CZ gate runs on resonance; defect {i} has detunings {d1}, {d2} GHz")));
        }
    }
    Ok(())
}

/// Decoherence-free phase bookkeeping of the CZ schedule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CzPhaseReport {
    /// Final phase of `|1q 0q⟩` (rad).
    pub phase_10: f64,
    /// Final phase of `|1q 1q⟩` (rad).
    pub phase_11: f64,
    /// `arg(a11 / a10²)`, folded into `(−π, π]`.
    pub delta_gamma: f64,
    pub population_10: f64,
    pub population_11: f64,
    /// `⟨n⟩` at mid-schedule, inside the `θ = 0` hold.
    pub mid_phonon_10: f64,
    pub mid_phonon_11: f64,
    pub analytic: GeometricPhases,
    /// Magnitude, phase and `⟨n⟩` curves for both inputs.
    pub traces: Vec<Trace>,
}

fn label(levels: [Level; 2]) -> BasisLabel {
    BasisLabel::new(0, &levels)
}

/// Runs `|1q0q⟩` and `|1q1q⟩` through the schedule without decoherence and
/// reads off their phases.
pub fn run_cz_phases<T: Real>(
    spec: &SystemSpec<T>,
    design: &CzDesign<T>,
    samples: usize,
    cfg: &IntegratorConfig<T>,
) -> Result<CzPhaseReport> {
    check_gate_spec(spec)?;
    let sched = design_cz_schedule(design)?;
    let total = sched.total_duration();
    let h = schedule_hamiltonian(spec, &sched)?;
    let l = spec.layout;
    let n = samples.max(3) | 1;
    let grid = linspace(T::zero(), total, n);
    let mid = n / 2;
    let mut traces = Vec::new();
    let mut finals = Vec::new();
    for (name, levels) in [("10", [QUBIT_ONE, QUBIT_ZERO]), ("11", [QUBIT_ONE, QUBIT_ONE])] {
        let lab = label(levels);
        let idx = l.encode(&lab)?;
        let psi = StateVector::basis(l, &lab)?;
        let probes = Probes::new().amplitude("a", idx).observable("n", phonon_number(l)?);
        let run = evolve_unitary(&h, &psi, &grid, cfg, &probes)?;
        let amps = run.amplitude("a")?;
        let mut phase = Vec::with_capacity(amps.len());
        let mut prev = 0.0f64;
        for a in amps {
            // Unwrap against the previous sample.
            let raw = a.arg();
            let k = ((prev - raw) / std::f64::consts::TAU).round();
            let p = raw + k * std::f64::consts::TAU;
            phase.push(p);
            prev = p;
        }
        let nbar = run.observable("n")?.to_vec();
        traces.push(Trace::new(format!("abs_{name}"), run.times.clone(), amps.iter().map(|a| a.norm()).collect()));
        traces.push(Trace::new(format!("phase_{name}"), run.times.clone(), phase));
        traces.push(Trace::new(format!("phonon_{name}"), run.times.clone(), nbar.clone()));
        finals.push((*amps.last().expect("grid is non-empty"), nbar[mid]));
    }
    let (a10, n10) = finals[0];
    let (a11, n11) = finals[1];
    let dg = (a11 / (a10 * a10)).arg();
    Ok(CzPhaseReport {
        phase_10: a10.arg(),
        phase_11: a11.arg(),
        delta_gamma: dg,
        population_10: a10.norm_sqr(),
        population_11: a11.norm_sqr(),
        mid_phonon_10: n10,
        mid_phonon_11: n11,
        analytic: geometric_phases(&sched, 4001),
        traces,
    })
}

/// Process tomography of the scheduled gate under the spec's decoherence.
pub fn cz_tomography<T: Real>(spec: &SystemSpec<T>, design: &CzDesign<T>, cfg: &IntegratorConfig<T>) -> Result<(ChiMatrix<T>, RunDiagnostics)> {
    check_gate_spec(spec)?;
    let sched = design_cz_schedule(design)?;
    let h = schedule_hamiltonian(spec, &sched)?;
    let collapse = collapse_operators(spec)?;
    let grid = [T::zero(), sched.total_duration()];
    let layout: HilbertLayout = spec.layout;
    let diags = std::sync::Mutex::new(Vec::new());
    let chi = process_tomography_2q(|a, b| {
        let rho0 = tomography_input(layout, a, b)?;
        let run = evolve_master_equation(&h, &collapse, &rho0, &grid, cfg, &Probes::new())?;
        diags.lock().expect("diagnostics lock").push(run.diagnostics.clone());
        qubit_block(&run.final_state())
    })?;
    let d = merge_diagnostics(&diags.into_inner().expect("diagnostics lock"));
    Ok((chi, d))
}

#[derive(Clone, Debug, Serialize)]
pub struct CzReport {
    pub process_fidelity: f64,
    /// Fidelity of `χ/tr χ`, i.e. conditioned on no leakage out of the
    /// qubit levels.
    pub normalized_process_fidelity: f64,
    pub average_gate_fidelity: f64,
    pub chi: ChiMatrix<f64>,
    pub phases: CzPhaseReport,
    pub diagnostics: RunDiagnostics,
    pub total_duration: f64,
    pub hold_durations: (f64, f64),
}

fn chi_to_f64<T: Real>(c: &ChiMatrix<T>) -> ChiMatrix<f64> {
    ChiMatrix {
        data: c.data.mapv(|z| Cx::new(z.re.to_f64_lossy(), z.im.to_f64_lossy())),
        trace: c.trace,
        min_eigenvalue: c.min_eigenvalue,
        output_violation: c.output_violation,
        projected: c.projected,
    }
}

/// Full CZ run: decoherence-free phases plus χ-matrix tomography against
/// `diag(1, 1, 1, −1)`.
pub fn run_cz_gate<T: Real>(spec: &SystemSpec<T>, design: &CzDesign<T>, samples: usize, cfg: &IntegratorConfig<T>) -> Result<CzReport> {
    let closed = spec.clone().with_decoherence(DecoherenceSpec::none())?;
    let phases = run_cz_phases(&closed, design, samples, cfg)?;
    let (chi, diagnostics) = cz_tomography(spec, design, cfg)?;
    let u = ideal_cz::<T>();
    let (t0, t1) = design.hold_durations()?;
    Ok(CzReport {
        process_fidelity: chi.process_fidelity(&u),
        normalized_process_fidelity: chi.normalized_process_fidelity(&u),
        average_gate_fidelity: chi.average_gate_fidelity(&u),
        chi: chi_to_f64(&chi),
        phases,
        diagnostics,
        total_duration: design_cz_schedule(design)?.total_duration().to_f64_lossy(),
        hold_durations: (t0.to_f64_lossy(), t1.to_f64_lossy()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RobustnessReport {
    /// Process fidelity over spin `T2` (ns).
    pub grid: SweepGrid,
    /// Fidelity with all decoherence removed.
    pub closed_fidelity: f64,
}

/// Process fidelity as the spin pure-dephasing rate is set from each `T2`
/// (ns); all other rates stay as in `spec`.
pub fn run_robustness_scan<T: Real>(
    spec: &SystemSpec<T>,
    design: &CzDesign<T>,
    t2_values: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<RobustnessReport> {
    if t2_values.iter().any(|t| !(*t > T::zero())) {
        return Err(Error::invalid("spin T2 values must be positive"));
    }
    let u = ideal_cz::<T>();
    let closed_spec = spec.clone().with_decoherence(DecoherenceSpec::none())?;
    let closed = cz_tomography(&closed_spec, design, cfg)?.0.process_fidelity(&u);
    let fids: Vec<Result<f64>> = t2_values
        .par_iter()
        .map(|&t2| {
            let mut dec = spec.decoherence.clone();
            dec.gamma_s_phi = dec.spin_dephasing_for_t2(t2);
            let s = spec.clone().with_decoherence(dec)?;
            Ok(cz_tomography(&s, design, cfg)?.0.process_fidelity(&u))
        })
        .collect();
    let fids: Vec<f64> = fids.into_iter().collect::<Result<_>>()?;
    let mut grid = SweepGrid::new(
        vec![Axis { name: "spin_t2_ns".into(), values: super::to_f64(t2_values) }],
        "process_fidelity",
        fids,
    )?;
    grid.metadata.insert("closed_fidelity".into(), closed);
    Ok(RobustnessReport { grid, closed_fidelity: closed })
}
