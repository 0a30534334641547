//! STIRAP pulse programs in the `(θ, φ)` parametrization
//! `Ω_R = sinθ·S`, `Ω_2 = cosθ·S·e^{jφ}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{two_pi, Cx, Real};

/// Default overall Rabi magnitude `S` (GHz).
pub const DEFAULT_SCALE: f64 = 0.023;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaPhiPoint<T: Real> {
    pub theta: T,
    pub phi: T,
    pub scale: T,
}

impl<T: Real> ThetaPhiPoint<T> {
    /// `(Ω_R, Ω_2)`.
    pub fn amplitudes(&self) -> (Cx<T>, Cx<T>) {
        (
            Cx::new(self.theta.sin() * self.scale, T::zero()),
            Cx::from_polar(self.theta.cos() * self.scale, self.phi),
        )
    }

    /// Inverse of [`Self::amplitudes`] for real non-negative `Ω_R`.
    pub fn from_amplitudes(omega_r: T, omega_2: Cx<T>) -> Result<Self> {
        let scale = (omega_r * omega_r + omega_2.norm_sqr()).sqrt();
        if scale == T::zero() {
            return Err(Error::invalid("both amplitudes are zero"));
        }
        if omega_r < T::zero() {
            return Err(Error::invalid("Ω_R must be non-negative in this parametrization"));
        }
        Ok(Self { theta: omega_r.atan2(omega_2.norm()), phi: omega_2.arg(), scale })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Segment<T: Real> {
    /// Constant θ while φ ramps at `phi_rate` (rad/ns).
    Hold { theta: T, duration: T, phi_rate: T },
    /// `θ = a + (b − a)·sin²(πx/2)` with `x` running over the edge.
    Edge { theta_from: T, theta_to: T, duration: T },
}

impl<T: Real> Segment<T> {
    pub fn duration(&self) -> T {
        match *self {
            Segment::Hold { duration, .. } | Segment::Edge { duration, .. } => duration,
        }
    }

    fn theta_start(&self) -> T {
        match *self {
            Segment::Hold { theta, .. } => theta,
            Segment::Edge { theta_from, .. } => theta_from,
        }
    }

    fn theta_end(&self) -> T {
        match *self {
            Segment::Hold { theta, .. } => theta,
            Segment::Edge { theta_to, .. } => theta_to,
        }
    }

    fn phi_gain(&self) -> T {
        match *self {
            Segment::Hold { duration, phi_rate, .. } => duration * phi_rate,
            Segment::Edge { .. } => T::zero(),
        }
    }

    /// `(θ, dθ/dt, φ − φ_start, dφ/dt)` at local time `u`.
    fn local(&self, u: T) -> (T, T, T, T) {
        match *self {
            Segment::Hold { theta, phi_rate, .. } => (theta, T::zero(), phi_rate * u, phi_rate),
            Segment::Edge { theta_from, theta_to, duration } => {
                let half_pi = T::FRAC_PI_2();
                let x = u / duration;
                let s = (half_pi * x).sin();
                let d = theta_to - theta_from;
                (theta_from + d * s * s, d * half_pi * (T::PI() * x).sin() / duration, T::zero(), T::zero())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StirapSchedule<T: Real> {
    stages: Vec<Segment<T>>,
    scale: T,
    starts: Vec<T>,
    phi_starts: Vec<T>,
    total: T,
}

/// `(θ, φ, dθ/dt, dφ/dt)` at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleSample<T> {
    pub theta: T,
    pub phi: T,
    pub theta_rate: T,
    pub phi_rate: T,
}

impl<T: Real> StirapSchedule<T> {
    /// Checks positive durations and continuity of θ across boundaries.
    pub fn new(stages: Vec<Segment<T>>, scale: T) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::invalid("schedule needs at least one stage"));
        }
        if !(scale > T::zero()) {
            return Err(Error::invalid("schedule scale must be positive"));
        }
        for (i, s) in stages.iter().enumerate() {
            if !(s.duration() > T::zero()) || !s.duration().is_finite() {
                return Err(Error::invalid(format!("stage {i} has non-positive duration")));
            }
        }
        for (i, w) in stages.windows(2).enumerate() {
            if (w[0].theta_end() - w[1].theta_start()).abs() > T::tol(1e-12) {
                return Err(Error::invalid(format!("θ jumps between stages {i} and {}", i + 1)));
            }
        }
        let mut starts = Vec::with_capacity(stages.len());
        let mut phi_starts = Vec::with_capacity(stages.len());
        let (mut t, mut phi) = (T::zero(), T::zero());
        for s in &stages {
            starts.push(t);
            phi_starts.push(phi);
            t += s.duration();
            phi += s.phi_gain();
        }
        Ok(Self { stages, scale, starts, phi_starts, total: t })
    }

    pub fn stages(&self) -> &[Segment<T>] {
        &self.stages
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn with_scale(&self, scale: T) -> Result<Self> {
        Self::new(self.stages.clone(), scale)
    }

    pub fn total_duration(&self) -> T {
        self.total
    }

    /// Stage boundaries, including 0 and the end.
    pub fn boundaries(&self) -> Vec<T> {
        let mut b = self.starts.clone();
        b.push(self.total);
        b
    }

    pub fn final_phi(&self) -> T {
        let last = self.stages.len() - 1;
        self.phi_starts[last] + self.stages[last].phi_gain()
    }

    /// Like [`Self::sample`] but clamps `t` into the schedule.
    pub fn sample_clamped(&self, t: T) -> ScheduleSample<T> {
        let t = t.max(T::zero()).min(self.total);
        let idx = self.starts.iter().rposition(|&s| s <= t).unwrap_or(0);
        let u = (t - self.starts[idx]).min(self.stages[idx].duration());
        let (theta, theta_rate, dphi, phi_rate) = self.stages[idx].local(u);
        ScheduleSample { theta, phi: self.phi_starts[idx] + dphi, theta_rate, phi_rate }
    }

    pub fn sample(&self, t: T) -> Result<ScheduleSample<T>> {
        if !(t >= T::zero() && t <= self.total) {
            return Err(Error::invalid(format!("t = {t} outside schedule [0, {}]", self.total)));
        }
        Ok(self.sample_clamped(t))
    }

    pub fn point(&self, t: T) -> Result<ThetaPhiPoint<T>> {
        let s = self.sample(t)?;
        Ok(ThetaPhiPoint { theta: s.theta, phi: s.phi, scale: self.scale })
    }

    /// `(Ω_R(t), Ω_2(t))`.
    pub fn evaluate(&self, t: T) -> Result<(Cx<T>, Cx<T>)> {
        Ok(self.point(t)?.amplitudes())
    }

    /// Amplitudes with `t` clamped into range; for integrator callbacks,
    /// whose stage times never leave the grid span.
    pub fn evaluate_clamped(&self, t: T) -> (Cx<T>, Cx<T>) {
        let s = self.sample_clamped(t);
        ThetaPhiPoint { theta: s.theta, phi: s.phi, scale: self.scale }.amplitudes()
    }

    /// `max |dθ/dt| / (2π S)`.
    pub fn adiabaticity_proxy(&self) -> T {
        let mut worst = T::zero();
        for s in &self.stages {
            if let Segment::Edge { theta_from, theta_to, duration } = *s {
                worst = worst.max((theta_to - theta_from).abs() * T::FRAC_PI_2() / duration);
            }
        }
        worst / (two_pi::<T>() * self.scale)
    }

    /// Proxy for `n` identical defects sharing the phonon: the collective
    /// mixing angle is `atan(√n·tanθ)` and the collective Rabi magnitude is
    /// `S·√(cos²θ + n·sin²θ)`. Evaluated on `samples` points per edge.
    pub fn collective_adiabaticity_proxy(&self, n: usize, samples: usize) -> T {
        let nn = T::from_usize(n.max(1)).unwrap();
        let mut worst = T::zero();
        for s in &self.stages {
            if let Segment::Edge { duration, .. } = *s {
                for j in 0..=samples {
                    let u = duration * T::from_usize(j).unwrap() / T::from_usize(samples.max(1)).unwrap();
                    let (th, rate, _, _) = s.local(u);
                    let w = th.cos().powi(2) + nn * th.sin().powi(2);
                    let eff_rate = nn.sqrt() / w * rate;
                    let eff_scale = self.scale * w.sqrt();
                    worst = worst.max(eff_rate.abs() / (two_pi::<T>() * eff_scale));
                }
            }
        }
        worst
    }

    /// Collective pulse area `∫ 2π S √(cos²θ + n·sin²θ) dt` for `n`
    /// defects sharing the phonon (Simpson rule, `samples` per stage).
    pub fn collective_pulse_area(&self, n: usize, samples: usize) -> T {
        let nn = T::from_usize(n.max(1)).unwrap();
        let m = (samples.max(2) + 1) / 2 * 2;
        let mut area = T::zero();
        for s in &self.stages {
            let d = s.duration();
            let hstep = d / T::from_usize(m).unwrap();
            let mut acc = T::zero();
            for j in 0..=m {
                let (th, _, _, _) = s.local(hstep * T::from_usize(j).unwrap());
                let f = (th.cos().powi(2) + nn * th.sin().powi(2)).sqrt();
                let wgt = if j == 0 || j == m { T::one() } else if j % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
                acc += wgt * f;
            }
            area += acc * hstep / T::lit(3.0);
        }
        area * two_pi::<T>() * self.scale
    }

    /// Rows `(t, Re Ω_R, Im Ω_R, Re Ω_2, Im Ω_2, θ, φ)` on `n` points.
    pub fn csv_rows(&self, n: usize) -> Vec<[f64; 7]> {
        crate::dynamics::linspace(T::zero(), self.total, n.max(2))
            .into_iter()
            .map(|t| {
                let s = self.sample_clamped(t);
                let (a, b) = ThetaPhiPoint { theta: s.theta, phi: s.phi, scale: self.scale }.amplitudes();
                [t, a.re, a.im, b.re, b.im, s.theta, s.phi].map(|v| v.to_f64_lossy())
            })
            .collect()
    }
}

pub const CSV_HEADER: [&str; 7] = ["t_ns", "re_omega_r", "im_omega_r", "re_omega_2", "im_omega_2", "theta", "phi"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CzDesign<T: Real> {
    /// Phase-ramp rate `δ_R2` (GHz); `dφ/dt = 2πδ_R2` in every hold.
    pub delta_r2: T,
    /// Winding of the single-excitation phase, `γ1 = 2kπ`.
    pub k: i32,
    pub t_rise: T,
    pub scale: T,
}

impl<T: Real> Default for CzDesign<T> {
    fn default() -> Self {
        Self { delta_r2: T::lit(0.3e-3), k: -2, t_rise: T::lit(1350.0), scale: T::lit(DEFAULT_SCALE) }
    }
}

impl<T: Real> CzDesign<T> {
    /// `(T0, T1)` from `δγ = 2πδ_R2·2T0/7 = π` and `−2πδ_R2(T0 + T1) = 2kπ`.
    pub fn hold_durations(&self) -> Result<(T, T)> {
        if !(self.delta_r2 > T::zero()) {
            return Err(Error::invalid("delta_r2 must be positive"));
        }
        let t0 = T::lit(7.0) / (T::lit(4.0) * self.delta_r2);
        let t1 = (-T::from_i32(self.k).unwrap() - T::lit(1.75)) / self.delta_r2;
        if !(t1 > T::zero()) {
            return Err(Error::invalid(format!("winding k = {} leaves no room for the θ = 0 hold; need k ≤ -2", self.k)));
        }
        Ok((t0, t1))
    }

    pub fn phi_rate(&self) -> T {
        two_pi::<T>() * self.delta_r2
    }
}

/// θ: π/2 → π/4 (hold T0) → 0 (hold T1) → π/4 (hold T0) → π/2, joined by
/// sin² edges of `t_rise`.
pub fn design_cz_schedule<T: Real>(d: &CzDesign<T>) -> Result<StirapSchedule<T>> {
    if !(d.t_rise > T::zero()) {
        return Err(Error::invalid("t_rise must be positive"));
    }
    let (t0, t1) = d.hold_durations()?;
    let w = d.phi_rate();
    let (p2, p4, z) = (T::FRAC_PI_2(), T::FRAC_PI_4(), T::zero());
    let edge = |a, b| Segment::Edge { theta_from: a, theta_to: b, duration: d.t_rise };
    StirapSchedule::new(
        vec![
            edge(p2, p4),
            Segment::Hold { theta: p4, duration: t0, phi_rate: w },
            edge(p4, z),
            Segment::Hold { theta: z, duration: t1, phi_rate: w },
            edge(z, p4),
            Segment::Hold { theta: p4, duration: t0, phi_rate: w },
            edge(p4, p2),
        ],
        d.scale,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransferDirection {
    /// θ: 0 → π/2, moving a phonon into the spins.
    PhononToSpins,
    /// θ: π/2 → 0, moving a spin excitation into the phonon.
    SpinsToPhonon,
}

/// Monotone θ sweep between the dark-state endpoints through the
/// midpoint, as two sin² edges of `t_rise` each; no φ ramp.
pub fn design_transfer_schedule<T: Real>(t_rise: T, scale: T, direction: TransferDirection) -> Result<StirapSchedule<T>> {
    if !(t_rise > T::zero()) {
        return Err(Error::invalid("t_rise must be positive"));
    }
    let (a, b) = match direction {
        TransferDirection::PhononToSpins => (T::zero(), T::FRAC_PI_2()),
        TransferDirection::SpinsToPhonon => (T::FRAC_PI_2(), T::zero()),
    };
    let mid = (a + b) / T::lit(2.0);
    StirapSchedule::new(
        vec![
            Segment::Edge { theta_from: a, theta_to: mid, duration: t_rise },
            Segment::Edge { theta_from: mid, theta_to: b, duration: t_rise },
        ],
        scale,
    )
}

/// Transfer duration for `n` defects that keeps the collective pulse area
/// of a reference transfer of `reference_total` ns for `n_ref` defects.
///
/// The phonon couples to the symmetric spin state with `√n·Ω_R`, so the
/// collective Rabi magnitude grows with `n` and the same area is reached
/// sooner.
pub fn matched_transfer_duration<T: Real>(n_ref: usize, reference_total: T, n: usize, scale: T) -> Result<T> {
    if n == 0 || n_ref == 0 {
        return Err(Error::invalid("defect counts must be positive"));
    }
    let unit = design_transfer_schedule(T::lit(0.5), scale, TransferDirection::PhononToSpins)?;
    let samples = 2000;
    let a_ref = unit.collective_pulse_area(n_ref, samples);
    let a_n = unit.collective_pulse_area(n, samples);
    Ok(reference_total * a_ref / a_n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn cz_hold_durations_and_phase_ramp() {
        let d = CzDesign::<f64>::default();
        let (t0, t1) = d.hold_durations().unwrap();
        assert_abs_diff_eq!(t0, 5833.333333333333, epsilon = 1e-9);
        assert_abs_diff_eq!(t1, 833.3333333333334, epsilon = 1e-9);
        assert_abs_diff_eq!(-d.phi_rate() * (t0 + t1), -4.0 * PI, epsilon = 1e-9);
        assert_abs_diff_eq!(d.phi_rate() * 2.0 * t0 / 7.0, PI, epsilon = 1e-12);
        let s = design_cz_schedule(&d).unwrap();
        assert_abs_diff_eq!(s.total_duration(), 4.0 * 1350.0 + 2.0 * t0 + t1, epsilon = 1e-9);
        // φ after the first T0 hold.
        let p = s.point(1350.0 + t0).unwrap();
        assert_abs_diff_eq!(p.phi, 3.5 * PI, epsilon = 1e-9);
        assert!(CzDesign { k: -1, ..d.clone() }.hold_durations().is_err());
        assert!(CzDesign { delta_r2: 0.0, ..d }.hold_durations().is_err());
    }

    #[test]
    fn evaluate_endpoints_and_plateau() {
        let s = design_cz_schedule(&CzDesign::<f64>::default()).unwrap();
        let (a, b) = s.evaluate(1350.0 + 10.0).unwrap();
        assert_abs_diff_eq!(a.norm(), 0.023 / 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(b.norm(), 0.023 / 2f64.sqrt(), epsilon = 1e-15);
        let (a0, b0) = s.evaluate(0.0).unwrap();
        assert_abs_diff_eq!(a0.re, 0.023, epsilon = 1e-15);
        assert!(b0.norm() < 1e-15);
        let mid = s.total_duration() / 2.0;
        assert!(s.evaluate(mid).unwrap().0.norm() < 1e-15);
        assert!(s.evaluate(-1.0).is_err());
        assert!(s.evaluate(s.total_duration() + 1e-6).is_err());
    }

    #[test]
    fn cz_theta_is_time_symmetric() {
        let s = design_cz_schedule(&CzDesign::<f64>::default()).unwrap();
        let total = s.total_duration();
        for k in 0..=500 {
            let t = total * k as f64 / 500.0;
            let a = s.sample(t).unwrap().theta;
            let b = s.sample(total - t).unwrap().theta;
            assert!((a - b).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn transfer_endpoints() {
        let s = design_transfer_schedule(1963.5, 0.023, TransferDirection::PhononToSpins).unwrap();
        assert_eq!(s.sample(0.0).unwrap().theta, 0.0);
        assert_abs_diff_eq!(s.sample(s.total_duration()).unwrap().theta, FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.total_duration(), 3927.0, epsilon = 1e-12);
        assert_eq!(s.final_phi(), 0.0);
        let r = design_transfer_schedule(100.0, 0.023, TransferDirection::SpinsToPhonon).unwrap();
        assert_abs_diff_eq!(r.sample(0.0).unwrap().theta, FRAC_PI_2, epsilon = 1e-15);
        assert!(design_transfer_schedule(0.0, 0.023, TransferDirection::SpinsToPhonon).is_err());
    }

    #[test]
    fn stage_validation() {
        let e = |a: f64, b: f64| Segment::Edge { theta_from: a, theta_to: b, duration: 1.0 };
        assert!(StirapSchedule::new(vec![e(0.0, 1.0), e(0.5, 0.0)], 1.0).is_err());
        assert!(StirapSchedule::new(vec![], 1.0).is_err());
        assert!(StirapSchedule::new(vec![e(0.0, 1.0)], 0.0).is_err());
        let h = Segment::Hold { theta: 0.0, duration: -1.0, phi_rate: 0.0 };
        assert!(StirapSchedule::new(vec![h], 1.0).is_err());
    }

    #[test]
    fn default_adiabaticity() {
        let s = design_cz_schedule(&CzDesign::<f64>::default()).unwrap();
        let p = s.adiabaticity_proxy();
        assert!(p < 0.05);
        assert_abs_diff_eq!(p, FRAC_PI_4 * FRAC_PI_2 / 1350.0 / (2.0 * PI * 0.023), epsilon = 1e-15);
        // One defect: the collective proxy reduces to the plain one.
        let t = design_transfer_schedule::<f64>(1000.0, 0.023, TransferDirection::PhononToSpins).unwrap();
        let c1 = t.collective_adiabaticity_proxy(1, 4000);
        assert!((c1 - t.adiabaticity_proxy()).abs() / c1 < 1e-5);
    }

    #[test]
    fn larger_registers_need_shorter_transfers() {
        let t3 = matched_transfer_duration(2, 3927.0, 3, 0.023).unwrap();
        assert!(t3 < 3927.0);
        assert_abs_diff_eq!(matched_transfer_duration(2, 3927.0, 2, 0.023).unwrap(), 3927.0, epsilon = 1e-9);
        let t = design_transfer_schedule::<f64>(100.0, 0.023, TransferDirection::PhononToSpins).unwrap();
        assert_abs_diff_eq!(t.collective_pulse_area(1, 200), 2.0 * PI * 0.023 * 200.0, epsilon = 1e-10);
        assert!(t.collective_pulse_area(3, 200) > t.collective_pulse_area(2, 200));
    }

    #[test]
    fn theta_phi_round_trip() {
        let p = ThetaPhiPoint { theta: 0.3, phi: -1.2, scale: 0.05 };
        let (a, b) = p.amplitudes();
        let q = ThetaPhiPoint::from_amplitudes(a.re, b).unwrap();
        assert_abs_diff_eq!(q.theta, 0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(q.phi, -1.2, epsilon = 1e-14);
        assert_abs_diff_eq!(q.scale, 0.05, epsilon = 1e-15);
        assert!(ThetaPhiPoint::from_amplitudes(0.0, Cx::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn csv_rows_shape() {
        let s = design_transfer_schedule(10.0, 0.023, TransferDirection::PhononToSpins).unwrap();
        let rows = s.csv_rows(11);
        assert_eq!(rows.len(), 11);
        assert_eq!(rows[10][0], 20.0);
        assert_eq!(CSV_HEADER.len(), 7);
    }
}
