use serde::Serialize;

use crate::pulses::StirapSchedule;
use crate::scalar::Real;

/// Geometric phases accumulated along a schedule (rad).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeometricPhases {
    /// `−∫cos²θ dφ`, picked up by the one-excitation dark state.
    pub gamma1: f64,
    /// `−∫(cos⁴θ − 2sin⁴θ)/(2 − cos⁴θ) dφ`, the two-excitation phase in the
    /// gauge where `|D2⟩` carries `e^{jφ}` on `|2 g1g1⟩`.
    pub gamma2: f64,
    /// `γ2 − Δφ`: phase of the `|11⟩` input, which starts and ends in
    /// `|0 g2g2⟩` whose `|D2⟩` coefficient carries `e^{-jφ}`.
    pub gamma2_physical: f64,
    /// `∫2cos⁴θ sin²θ/(2 − cos⁴θ) dφ = γ2_physical − 2γ1`.
    pub delta_gamma: f64,
    /// Total `Δφ` of the schedule.
    pub phase_winding: f64,
}

impl GeometricPhases {
    /// `γ1` folded into `(−π, π]`.
    pub fn gamma1_mod_2pi(&self) -> f64 {
        wrap(self.gamma1)
    }
}

/// Folds an angle into `(−π, π]`.
pub fn wrap(x: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut y = x.rem_euclid(tau);
    if y > std::f64::consts::PI {
        y -= tau;
    }
    y
}

/// Simpson quadrature of the three phase integrands against `dφ/dt` on
/// `samples` points per stage. Holds have constant integrands, so schedules
/// that ramp φ only in holds are integrated exactly.
pub fn geometric_phases<T: Real>(schedule: &StirapSchedule<T>, samples: usize) -> GeometricPhases {
    let m = (samples.max(2) + 1) / 2 * 2;
    let bounds = schedule.boundaries();
    let (mut g1, mut g2, mut dg, mut wind) = (0.0, 0.0, 0.0, 0.0);
    for w in bounds.windows(2) {
        let (a, b) = (w[0].to_f64_lossy(), w[1].to_f64_lossy());
        let h = (b - a) / m as f64;
        let (mut s1, mut s2, mut sd, mut sw) = (0.0, 0.0, 0.0, 0.0);
        for j in 0..=m {
            // Nudge the endpoints inside so each stage is sampled on itself.
            let t = if j == 0 {
                a + h * 1e-9
            } else if j == m {
                b - h * 1e-9
            } else {
                a + h * j as f64
            };
            let s = schedule.sample_clamped(T::lit(t));
            let (th, rate) = (s.theta.to_f64_lossy(), s.phi_rate.to_f64_lossy());
            let c2 = th.cos().powi(2);
            let c4 = c2 * c2;
            let sn2 = th.sin().powi(2);
            let wgt = if j == 0 || j == m {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            s1 += wgt * c2 * rate;
            s2 += wgt * (c4 - 2.0 * sn2 * sn2) / (2.0 - c4) * rate;
            sd += wgt * 2.0 * c4 * sn2 / (2.0 - c4) * rate;
            sw += wgt * rate;
        }
        g1 -= s1 * h / 3.0;
        g2 -= s2 * h / 3.0;
        dg += sd * h / 3.0;
        wind += sw * h / 3.0;
    }
    GeometricPhases { gamma1: g1, gamma2: g2, gamma2_physical: g2 - wind, delta_gamma: dg, phase_winding: wind }
}

/// Piecewise closed form `−Σ_holds cos²θ·Δφ` for schedules that ramp φ
/// only in holds.
pub fn gamma1_closed_form<T: Real>(schedule: &StirapSchedule<T>) -> f64 {
    use crate::pulses::Segment;
    schedule
        .stages()
        .iter()
        .map(|s| match *s {
            Segment::Hold { theta, duration, phi_rate } => {
                -theta.to_f64_lossy().cos().powi(2) * (duration * phi_rate).to_f64_lossy()
            }
            Segment::Edge { .. } => 0.0,
        })
        .sum()
}
