use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{BasisLabel, DensityMatrix, Level, Operator};
use crate::dynamics::{evolve_master_equation, linspace, IntegratorConfig, Probes, TimeDependentHamiltonian};
use crate::error::{Error, Result};
use crate::models::{collapse_operators, rotating_frame_hamiltonian, SystemSpec};
use crate::scalar::Real;

use super::odro::with_raman_offset;
use super::{fit_sinusoid_frequency, peak, Axis, FidelityReport, SweepGrid, Trace};

const TARGET: &str = "p_g1g2";

/// How the two spin frequencies move across a swap sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetuningMode {
    /// Spin A up by `δ`, spin B down by `δ`.
    Opposite,
    /// Both spins up by `δ`, so the pair stays resonant with each other.
    Common,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwapReport {
    /// `P(|0, g1 g2⟩)` over (detuning, time).
    pub grid: SweepGrid,
    /// Resonant run.
    pub resonant: FidelityReport,
}

fn detuned<T: Real>(spec: &SystemSpec<T>, mode: DetuningMode, d: T) -> SystemSpec<T> {
    let s = with_raman_offset(spec, 0, d);
    match mode {
        DetuningMode::Opposite => with_raman_offset(&s, 1, -d),
        DetuningMode::Common => with_raman_offset(&s, 1, d),
    }
}

fn swap_trace<T: Real>(spec: &SystemSpec<T>, grid: &[T], cfg: &IntegratorConfig<T>) -> Result<FidelityReport> {
    let l = spec.layout;
    let h = TimeDependentHamiltonian::constant(rotating_frame_hamiltonian(spec)?)?;
    let collapse = collapse_operators(spec)?;
    let rho0 = DensityMatrix::basis(l, &BasisLabel::new(0, &[Level::G2, Level::G1]))?;
    let target = DensityMatrix::<T>::basis(l, &BasisLabel::new(0, &[Level::G1, Level::G2]))?;
    let probes = Probes::new().observable(TARGET, Operator::new(l, target.into_matrix())?).with_positivity();
    let run = evolve_master_equation(&h, &collapse, &rho0, grid, cfg, &probes)?;
    let p = run.observable(TARGET)?.to_vec();
    let (t, f) = peak(&run.times, &p);
    Ok(FidelityReport { fidelity: f, time: t, traces: vec![Trace::new(TARGET, run.times.clone(), p)], diagnostics: run.diagnostics })
}

/// Phonon-mediated exchange `|0, g2 g1⟩ → |0, g1 g2⟩`.
///
/// `duration` defaults to 1.5× the resonant transfer time `1/(2√2 g')`.
pub fn run_two_spin_swap<T: Real>(
    spec: &SystemSpec<T>,
    mode: DetuningMode,
    detunings: &[T],
    duration: Option<T>,
    samples: usize,
    cfg: &IntegratorConfig<T>,
) -> Result<SwapReport> {
    if spec.n_defects() != 2 {
        return Err(Error::invalid(format!("swap needs two defects, got {}", spec.n_defects())));
    }
    let duration = match duration {
        Some(d) => d,
        None => T::lit(1.5) / (T::lit(2.0 * 2f64.sqrt()) * spec.effective_coupling(0)?),
    };
    let grid = linspace(T::zero(), duration, samples.max(2));
    let resonant = swap_trace(spec, &grid, cfg)?;
    let rows: Vec<Result<Vec<f64>>> = detunings
        .par_iter()
        .map(|&d| Ok(swap_trace(&detuned(spec, mode, d), &grid, cfg)?.traces.remove(0).values))
        .collect();
    let rows: Vec<Vec<f64>> = rows.into_iter().collect::<Result<_>>()?;
    let mut out = SweepGrid::new(
        vec![
            Axis { name: "detuning_ghz".into(), values: super::to_f64(detunings) },
            Axis { name: "time_ns".into(), values: super::to_f64(&grid) },
        ],
        TARGET,
        rows.concat(),
    )?;
    out.metadata.insert("g_eff_ghz".into(), spec.effective_coupling(0)?.to_f64_lossy());
    out.metadata.insert("resonant_fidelity".into(), resonant.fidelity);
    Ok(SwapReport { grid: out, resonant })
}

/// Fitted and predicted oscillation frequency of the spin-spin exchange
/// with both spins detuned by `detuning` from the phonon (GHz).
///
/// Far off resonance the phonon is only virtually excited and the swap
/// runs at `2g'²/δ`.
pub fn virtual_exchange_rate<T: Real>(
    spec: &SystemSpec<T>,
    detuning: T,
    duration: T,
    samples: usize,
    cfg: &IntegratorConfig<T>,
) -> Result<(f64, f64)> {
    if spec.n_defects() != 2 {
        return Err(Error::invalid("virtual exchange needs two defects"));
    }
    let g = spec.effective_coupling(0)?.to_f64_lossy();
    let d = detuning.to_f64_lossy();
    let predicted = 2.0 * g * g / d.abs();
    let grid = linspace(T::zero(), duration, samples.max(8));
    let rep = swap_trace(&detuned(spec, DetuningMode::Common, detuning), &grid, cfg)?;
    let tr = &rep.traces[0];
    let fitted = fit_sinusoid_frequency(&tr.times, &tr.values, predicted / 4.0, predicted * 4.0)?;
    Ok((fitted, predicted))
}
