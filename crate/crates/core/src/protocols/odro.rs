use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{phonon_projector, BasisLabel, DensityMatrix, Level};
use crate::dynamics::{evolve_master_equation, linspace, IntegratorConfig, Probes, TimeDependentHamiltonian};
use crate::error::{Error, Result};
use crate::models::{collapse_operators, raman_resonance_offset, rotating_frame_hamiltonian, table, DecoherenceSpec, SystemSpec};
use crate::scalar::Real;

use super::{peak, Axis, FidelityReport, SweepGrid, Trace};

const PHONON_ONE: &str = "phonon_1";

fn check_single<T: Real>(spec: &SystemSpec<T>) -> Result<()> {
    if spec.n_defects() != 1 {
        return Err(Error::invalid(format!("phonon preparation needs one defect, got {}", spec.n_defects())));
    }
    Ok(())
}

/// `1.4 / (4g')`: a little past the first full swap.
fn default_duration<T: Real>(spec: &SystemSpec<T>) -> Result<T> {
    Ok(T::lit(1.4) / (T::lit(4.0) * spec.effective_coupling(0)?))
}

/// Phonon `n = 1` population after starting in `|0, g2⟩` under the
/// rotating-frame model with the spec's collapse operators.
///
/// `duration` defaults to `1.4/(4g')`; the fidelity is the sampled peak.
pub fn run_odro_prep<T: Real>(
    spec: &SystemSpec<T>,
    duration: Option<T>,
    samples: usize,
    cfg: &IntegratorConfig<T>,
) -> Result<FidelityReport> {
    check_single(spec)?;
    let duration = match duration {
        Some(d) => d,
        None => default_duration(spec)?,
    };
    if !(duration > T::zero()) {
        return Err(Error::invalid("duration must be positive"));
    }
    let l = spec.layout;
    let h = TimeDependentHamiltonian::constant(rotating_frame_hamiltonian(spec)?)?;
    let collapse = collapse_operators(spec)?;
    let rho0 = DensityMatrix::basis(l, &BasisLabel::new(0, &[Level::G2]))?;
    let grid = linspace(T::zero(), duration, samples.max(2));
    let probes = Probes::new().observable(PHONON_ONE, phonon_projector(l, 1)?).with_positivity();
    let run = evolve_master_equation(&h, &collapse, &rho0, &grid, cfg, &probes)?;
    let p1 = run.observable(PHONON_ONE)?.to_vec();
    let (t, f) = peak(&run.times, &p1);
    Ok(FidelityReport {
        fidelity: f,
        time: t,
        traces: vec![Trace::new(PHONON_ONE, run.times.clone(), p1)],
        diagnostics: run.diagnostics,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OdroPoint {
    /// Multipliers of the preparation-set `Δ`, `Ω1`, `Ω2`.
    pub delta_factor: f64,
    pub rabi1_factor: f64,
    pub rabi2_factor: f64,
    pub fidelity: f64,
    pub time: f64,
    pub g_eff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OdroOptimum {
    pub points: Vec<OdroPoint>,
    pub best: OdroPoint,
}

/// Peak preparation fidelity over a product grid of preparation-set scalings.
///
/// Each point sits on its own light-shifted Raman resonance, so the light
/// shift is always compensated and only the `Δ`/`Ω` trade-off is scanned.
pub fn run_odro_optimum<T: Real>(
    delta_factors: &[f64],
    rabi1_factors: &[f64],
    rabi2_factors: &[f64],
    decoherence: &DecoherenceSpec<T>,
    phonon_levels: usize,
    samples: usize,
    cfg: &IntegratorConfig<T>,
) -> Result<OdroOptimum> {
    let mut combos = Vec::new();
    for &fd in delta_factors {
        for &f1 in rabi1_factors {
            for &f2 in rabi2_factors {
                combos.push((fd, f1, f2));
            }
        }
    }
    if combos.is_empty() {
        return Err(Error::invalid("optimum scan needs at least one value per axis"));
    }
    let points: Vec<Result<OdroPoint>> = combos
        .par_iter()
        .map(|&(fd, f1, f2)| {
            let delta = T::lit(table::DELTA * fd);
            let r1 = T::lit(table::RABI1 * f1);
            let r2 = T::lit(table::RABI2 * f2);
            let rabi_r = r1 * T::lit(table::G / table::OMEGA_M);
            let offset = raman_resonance_offset(delta, rabi_r, r2, 1)?;
            let spec = SystemSpec::raman(1, phonon_levels, delta, r1, r2, offset, decoherence.clone())?;
            let rep = run_odro_prep(&spec, None, samples, cfg)?;
            Ok(OdroPoint {
                delta_factor: fd,
                rabi1_factor: f1,
                rabi2_factor: f2,
                fidelity: rep.fidelity,
                time: rep.time,
                g_eff: spec.effective_coupling(0)?.to_f64_lossy(),
            })
        })
        .collect();
    let points: Vec<OdroPoint> = points.into_iter().collect::<Result<_>>()?;
    let best = *points
        .iter()
        .max_by(|a, b| a.fidelity.total_cmp(&b.fidelity))
        .expect("non-empty scan");
    Ok(OdroOptimum { points, best })
}

/// Spec with the two-laser frequency moved by `offset` (GHz) on the `g1`
/// branch, i.e. `Δ1 → Δ1 + offset`.
pub(crate) fn with_raman_offset<T: Real>(spec: &SystemSpec<T>, defect: usize, offset: T) -> SystemSpec<T> {
    let mut s = spec.clone();
    s.drives[defect].omega1 -= offset;
    s
}

/// Detuned exchange frequency `√((2g')² + δ_eff²)` of the phonon
/// population (GHz), where `δ_eff` is the light-shifted mismatch between
/// `|1, g1⟩` and `|0, g2⟩` at chevron offset `offset`.
pub fn chevron_expected_frequency<T: Real>(spec: &SystemSpec<T>, offset: T) -> Result<f64> {
    check_single(spec)?;
    let s = with_raman_offset(spec, 0, offset);
    let (d1, d2) = s.detunings(0);
    let four = T::lit(4.0);
    let e1 = d1 + s.sideband_rabi(0).norm_sqr() / (four * d1);
    let e2 = d2 + s.drives[0].rabi2.norm_sqr() / (four * d2);
    let de = (e1 - e2).to_f64_lossy();
    let g = s.effective_coupling(0)?.to_f64_lossy();
    Ok(((2.0 * g).powi(2) + de * de).sqrt())
}

/// Phonon `n = 1` population over (offset, time). Row `i` is the trace for
/// `offsets[i]`, sampled on `linspace(0, duration, samples)`.
pub fn run_chevron<T: Real>(
    spec: &SystemSpec<T>,
    offsets: &[T],
    duration: T,
    samples: usize,
    cfg: &IntegratorConfig<T>,
) -> Result<SweepGrid> {
    check_single(spec)?;
    if offsets.is_empty() {
        return Err(Error::invalid("chevron needs at least one offset"));
    }
    let rows: Vec<Result<Vec<f64>>> = offsets
        .par_iter()
        .map(|&o| {
            let s = with_raman_offset(spec, 0, o);
            Ok(run_odro_prep(&s, Some(duration), samples, cfg)?.traces.remove(0).values)
        })
        .collect();
    let rows: Vec<Vec<f64>> = rows.into_iter().collect::<Result<_>>()?;
    let times = linspace(T::zero(), duration, samples.max(2));
    let mut grid = SweepGrid::new(
        vec![
            Axis { name: "offset_ghz".into(), values: super::to_f64(offsets) },
            Axis { name: "time_ns".into(), values: super::to_f64(&times) },
        ],
        "phonon_1",
        rows.concat(),
    )?;
    grid.metadata.insert("g_eff_ghz".into(), spec.effective_coupling(0)?.to_f64_lossy());
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> IntegratorConfig<f64> {
        IntegratorConfig::with_tolerances(1e-7, 1e-9)
    }

    #[test]
    fn closed_system_reaches_full_swap() {
        let spec = SystemSpec::<f64>::preparation(1).unwrap().with_decoherence(DecoherenceSpec::none()).unwrap();
        let rep = run_odro_prep(&spec, None, 300, &cfg()).unwrap();
        let g = spec.effective_coupling(0).unwrap();
        assert!(rep.fidelity > 0.999, "{}", rep.fidelity);
        assert!((rep.time - 1.0 / (4.0 * g)).abs() / (1.0 / (4.0 * g)) < 0.05);
        assert!(rep.diagnostics.max_trace_drift < 1e-8);
    }

    #[test]
    fn rejects_two_defects() {
        let spec = SystemSpec::<f64>::preparation(2).unwrap();
        assert!(run_odro_prep(&spec, None, 10, &cfg()).is_err());
    }

    #[test]
    fn expected_frequency_is_resonant_at_zero_offset() {
        let spec = SystemSpec::<f64>::preparation(1).unwrap();
        let g = spec.effective_coupling(0).unwrap();
        let f0 = chevron_expected_frequency(&spec, 0.0).unwrap();
        assert!((f0 - 2.0 * g).abs() / f0 < 1e-6);
        let f = chevron_expected_frequency(&spec, 3e-3).unwrap();
        assert!(f > 3e-3 && f < (9e-6f64 + 4.0 * g * g).sqrt() * 1.01);
    }
}
