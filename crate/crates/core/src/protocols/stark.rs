use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{defect_projector, defect_transition_op, BasisLabel, HilbertLayout, Level, Operator, StateVector};
use crate::dynamics::{evolve_unitary, linspace, IntegratorConfig, Probes, TimeDependentHamiltonian};
use crate::error::{Error, Result};
use crate::models::ac_stark_shift;
use crate::scalar::{two_pi, Cx, Real};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StarkPoint {
    pub rabi1: f64,
    /// Shift of `g1` read from the phase of `⟨g3|ρ|g1⟩` (GHz).
    pub fitted: f64,
    /// `|Ω1|²/(4(ω_m + Δ1))` (GHz).
    pub predicted: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StarkReport {
    pub omega_m: f64,
    pub delta1: f64,
    pub points: Vec<StarkPoint>,
    /// Largest relative spread of `fitted / Ω1²` over the nonzero points.
    pub quadratic_spread: f64,
}

/// Carrier light shift of `g1` from the off-resonant drive
/// `(Ω1/2) e^{j ω_m t}|e⟩⟨g1| + h.c.` on top of the detunings `−Δ1, −Δ2`.
fn fitted_shift<T: Real>(rabi1: T, omega_m: T, delta1: T, duration: T, samples: usize, cfg: &IntegratorConfig<T>) -> Result<f64> {
    let l = HilbertLayout::new(2, 1)?;
    let tp: T = two_pi();
    let h0: Operator<T> = defect_projector(l, 0, Level::G1)?.scaled(Cx::new(-tp * delta1, T::zero()));
    let mut h = TimeDependentHamiltonian::new(h0)?;
    let amp = rabi1 * T::lit(0.5) * tp;
    h.add_drive(
        &defect_transition_op(l, 0, Level::G1, Level::E)?,
        Arc::new(move |t: T| Cx::from_polar(amp, tp * omega_m * t)),
    )?;
    let g1 = BasisLabel::new(0, &[Level::G1]);
    let g3 = BasisLabel::new(0, &[Level::G3]);
    let s = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let psi = StateVector::superposition(l, &[(g1.clone(), Cx::new(s, T::zero())), (g3.clone(), Cx::new(s, T::zero()))])?;
    let probes = Probes::new().amplitude("g1", l.encode(&g1)?).amplitude("g3", l.encode(&g3)?);
    let grid = linspace(T::zero(), duration, samples.max(16));
    let run = evolve_unitary(&h, &psi, &grid, cfg, &probes)?;
    let (a1, a3) = (run.amplitude("g1")?, run.amplitude("g3")?);
    let mut prev = 0.0f64;
    let phase: Vec<f64> = a1
        .iter()
        .zip(a3)
        .map(|(x, y)| {
            let raw = (x * y.conj()).arg();
            let k = ((prev - raw) / std::f64::consts::TAU).round();
            prev = raw + k * std::f64::consts::TAU;
            prev
        })
        .collect();
    // Least-squares slope.
    let n = run.times.len() as f64;
    let mt = run.times.iter().sum::<f64>() / n;
    let mp = phase.iter().sum::<f64>() / n;
    let num: f64 = run.times.iter().zip(&phase).map(|(t, p)| (t - mt) * (p - mp)).sum();
    let den: f64 = run.times.iter().map(|t| (t - mt).powi(2)).sum();
    // Free evolution gives a slope of 2πΔ1; the lowered g1 adds 2π·shift.
    Ok(num / den / std::f64::consts::TAU - delta1.to_f64_lossy())
}

/// Fits the carrier light shift at each drive amplitude and compares it
/// with the closed form.
pub fn run_ac_stark_check<T: Real>(
    rabi1_values: &[T],
    omega_m: T,
    delta1: T,
    duration: T,
    samples: usize,
    cfg: &IntegratorConfig<T>,
) -> Result<StarkReport> {
    if rabi1_values.is_empty() {
        return Err(Error::invalid("need at least one drive amplitude"));
    }
    let mut points = Vec::new();
    for &r in rabi1_values {
        let fitted = fitted_shift(r, omega_m, delta1, duration, samples, cfg)?;
        let predicted = ac_stark_shift(Cx::new(r, T::zero()), omega_m, delta1)?.to_f64_lossy();
        let relative_error = if predicted == 0.0 { fitted.abs() } else { ((fitted - predicted) / predicted).abs() };
        points.push(StarkPoint { rabi1: r.to_f64_lossy(), fitted, predicted, relative_error });
    }
    let ratios: Vec<f64> = points.iter().filter(|p| p.rabi1 != 0.0).map(|p| p.fitted / (p.rabi1 * p.rabi1)).collect();
    let quadratic_spread = match ratios.first() {
        Some(&r0) => ratios.iter().map(|r| ((r - r0) / r0).abs()).fold(0.0, f64::max),
        None => 0.0,
    };
    Ok(StarkReport { omega_m: omega_m.to_f64_lossy(), delta1: delta1.to_f64_lossy(), points, quadratic_spread })
}
