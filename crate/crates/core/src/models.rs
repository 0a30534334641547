//! Hamiltonians in the lab, rotating, effective and dark frames, collapse
//! operators, and the closed-form effective quantities.
//!
//! Every frequency is stored as `f = ω/2π` in GHz and enters a generator as
//! `2πf`; times are in ns.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    defect_projector, defect_transition_op, phonon_lowering, phonon_number, re, sideband_op,
    HilbertLayout, Level, Operator,
};
use crate::error::{Error, Result};
use crate::scalar::{two_pi, Cx, Real};

/// How tabulated decay rates map to Lindblad rates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateConvention {
    /// Rates are taken as given, in 1/ns.
    #[default]
    Plain,
    /// Rates are read like the frequency columns and multiplied by 2π.
    Angular,
}

impl RateConvention {
    pub fn factor<T: Real>(self) -> T {
        match self {
            RateConvention::Plain => T::one(),
            RateConvention::Angular => two_pi(),
        }
    }
}

/// Normalization of the pure-dephasing collapse operators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DephasingNormalization {
    /// `L = √Γ |x⟩⟨x|`: coherences with `x` decay at `Γ/2`.
    #[default]
    Projector,
    /// `L = √(2Γ) |x⟩⟨x|`: coherences with `x` decay at `Γ`.
    Coherence,
}

impl DephasingNormalization {
    pub fn factor<T: Real>(self) -> T {
        match self {
            DephasingNormalization::Projector => T::one(),
            DephasingNormalization::Coherence => T::lit(2.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectSpec<T: Real> {
    /// Excited-state zero-point phonon coupling (GHz).
    pub g: T,
    /// Energy of `g1` below `e` (GHz).
    pub nu1: T,
    /// Energy of `g2` below `e` (GHz).
    pub nu2: T,
    /// Static shift of the optical transition (GHz).
    pub spectral_offset: T,
}

impl<T: Real> DefectSpec<T> {
    /// Preparation-set coupling. The optical energies sit in a reduced frame
    /// (common offset removed); only differences enter the dynamics.
    pub fn divacancy() -> Self {
        Self { g: T::lit(0.257), nu1: T::lit(16.3), nu2: T::lit(15.0), spectral_offset: T::zero() }
    }

    /// Spin transition frequency `ν1 - ν2`.
    pub fn spin_frequency(&self) -> T {
        self.nu1 - self.nu2
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec<T: Real> {
    /// Laser frequency on the `g1 ↔ e` branch (GHz).
    pub omega1: T,
    /// Laser frequency on the `g2 ↔ e` branch (GHz).
    pub omega2: T,
    /// Rabi amplitude on `g1 ↔ e` (GHz).
    pub rabi1: Cx<T>,
    /// Rabi amplitude on `g2 ↔ e` (GHz).
    pub rabi2: Cx<T>,
    /// Nominal common detuning from the optical transition (GHz).
    pub delta: T,
}

impl<T: Real> DriveSpec<T> {
    /// Raman configuration: both branches detuned by `delta`, with the
    /// `g1` laser on the red phonon sideband and an extra two-laser
    /// offset `raman_offset` added to the `g1` detuning.
    pub fn raman(defect: &DefectSpec<T>, omega_m: T, delta: T, raman_offset: T, rabi1: Cx<T>, rabi2: Cx<T>) -> Self {
        Self {
            omega1: defect.nu1 - omega_m - delta - raman_offset,
            omega2: defect.nu2 - delta,
            rabi1,
            rabi2,
            delta,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceSpec<T: Real> {
    pub gamma_m1: T,
    pub gamma_e1: T,
    pub gamma_e_phi: T,
    pub gamma_s1: T,
    pub gamma_s_phi: T,
    /// Fraction of excited-state decay that lands in `g1`.
    pub branching_g1: T,
    pub convention: RateConvention,
    pub dephasing: DephasingNormalization,
}

impl<T: Real> DecoherenceSpec<T> {
    pub fn none() -> Self {
        Self {
            gamma_m1: T::zero(),
            gamma_e1: T::zero(),
            gamma_e_phi: T::zero(),
            gamma_s1: T::zero(),
            gamma_s_phi: T::zero(),
            branching_g1: T::lit(0.5),
            convention: RateConvention::default(),
            dephasing: DephasingNormalization::default(),
        }
    }

    /// Preparation-set rates.
    pub fn preparation() -> Self {
        Self {
            gamma_m1: T::lit(1e-6),
            gamma_e1: T::lit(0.01),
            gamma_e_phi: T::lit(0.02),
            gamma_s1: T::lit(1e-9),
            gamma_s_phi: T::lit(1e-6),
            ..Self::none()
        }
    }

    /// Gate parameter set: the preparation set without excited-state pure dephasing.
    pub fn gate() -> Self {
        Self { gamma_e_phi: T::zero(), ..Self::preparation() }
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("gamma_m1", self.gamma_m1),
            ("gamma_e1", self.gamma_e1),
            ("gamma_e_phi", self.gamma_e_phi),
            ("gamma_s1", self.gamma_s1),
            ("gamma_s_phi", self.gamma_s_phi),
        ];
        for (name, v) in named {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::invalid(format!("decoherence.{name} must be a finite non-negative rate, got {v}")));
            }
        }
        if !(self.branching_g1 >= T::zero() && self.branching_g1 <= T::one()) {
            return Err(Error::invalid("decoherence.branching_g1 must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Spin pure-dephasing rate for a coherence time `t2` (ns), read as
    /// `Γ_s^φ = 1/T2` in the units of the rate table. Under the projector
    /// normalization the `g2` coherence then decays in `2·T2`; see
    /// [`Self::spin_dephasing_for_coherence_decay`] for the strict reading.
    pub fn spin_dephasing_for_t2(&self, t2: T) -> T {
        T::one() / (t2 * self.convention.factor::<T>())
    }

    /// Rate that makes the `g2` coherence decay as `e^{-t/t2}` under the
    /// configured normalization.
    pub fn spin_dephasing_for_coherence_decay(&self, t2: T) -> T {
        T::one() / (t2 * self.convention.factor::<T>() * self.dephasing.factor::<T>() / T::lit(2.0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec<T: Real> {
    /// Phonon frequency (GHz).
    pub omega_m: T,
    pub defects: Vec<DefectSpec<T>>,
    pub drives: Vec<DriveSpec<T>>,
    pub decoherence: DecoherenceSpec<T>,
    pub layout: HilbertLayout,
}

/// Preparation-set frequencies.
pub mod table {
    pub const OMEGA_M: f64 = 5.6;
    pub const G: f64 = 0.257;
    pub const DELTA: f64 = 0.23;
    pub const RABI1: f64 = 0.5;
    pub const RABI2: f64 = 0.023;
    /// Gate-set rise time (ns).
    pub const T_RISE: f64 = 1350.0;
}

impl<T: Real> SystemSpec<T> {
    pub fn new(
        omega_m: T,
        defects: Vec<DefectSpec<T>>,
        drives: Vec<DriveSpec<T>>,
        decoherence: DecoherenceSpec<T>,
        phonon_levels: usize,
    ) -> Result<Self> {
        let layout = HilbertLayout::new(phonon_levels, defects.len())?;
        let spec = Self { omega_m, defects, drives, decoherence, layout };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_m > T::zero()) {
            return Err(Error::invalid("omega_m must be positive"));
        }
        if self.drives.len() != self.defects.len() {
            return Err(Error::invalid(format!(
                "{} drives for {} defects; need one per defect",
                self.drives.len(),
                self.defects.len()
            )));
        }
        if self.layout.defect_count() != self.defects.len() {
            return Err(Error::invalid("layout defect count disagrees with defect list"));
        }
        for (i, d) in self.defects.iter().enumerate() {
            if !(d.g >= T::zero()) {
                return Err(Error::invalid(format!("defects[{i}].g must be non-negative")));
            }
        }
        self.decoherence.validate()
    }

    /// Raman-driven defects with preparation-set frequencies.
    ///
    /// `raman_offset` is added to every `g1` detuning; use
    /// [`raman_resonance_offset`] to land on the light-shifted resonance.
    pub fn raman(
        n_defects: usize,
        phonon_levels: usize,
        delta: T,
        rabi1: T,
        rabi2: T,
        raman_offset: T,
        decoherence: DecoherenceSpec<T>,
    ) -> Result<Self> {
        let omega_m = T::lit(table::OMEGA_M);
        let defects: Vec<DefectSpec<T>> = (0..n_defects).map(|_| DefectSpec::divacancy()).collect();
        let drives = defects
            .iter()
            .map(|d| DriveSpec::raman(d, omega_m, delta, raman_offset, re(rabi1), re(rabi2)))
            .collect();
        Self::new(omega_m, defects, drives, decoherence, phonon_levels)
    }

    /// Preparation-set ODRO configuration on the light-shifted Raman resonance.
    pub fn preparation(n_defects: usize) -> Result<Self> {
        let (delta, r1, r2) = (T::lit(table::DELTA), T::lit(table::RABI1), T::lit(table::RABI2));
        let rabi_r = r1 * T::lit(table::G) / T::lit(table::OMEGA_M);
        let offset = raman_resonance_offset(delta, rabi_r, r2, n_defects)?;
        Self::raman(n_defects, HilbertLayout::DEFAULT_PHONON_LEVELS, delta, r1, r2, offset, DecoherenceSpec::preparation())
    }

    /// Gate-set resonant configuration (Δ = 0). Drive amplitudes come from
    /// a pulse schedule, so the stored Rabi values are only nominal.
    pub fn gate(n_defects: usize) -> Result<Self> {
        Self::raman(
            n_defects,
            HilbertLayout::DEFAULT_PHONON_LEVELS,
            T::zero(),
            T::lit(table::RABI1),
            T::lit(table::RABI2),
            T::zero(),
            DecoherenceSpec::gate(),
        )
    }

    pub fn with_phonon_levels(mut self, phonon_levels: usize) -> Result<Self> {
        self.layout = HilbertLayout::new(phonon_levels, self.defects.len())?;
        Ok(self)
    }

    pub fn with_decoherence(mut self, decoherence: DecoherenceSpec<T>) -> Result<Self> {
        decoherence.validate()?;
        self.decoherence = decoherence;
        Ok(self)
    }

    pub fn n_defects(&self) -> usize {
        self.defects.len()
    }

    /// Rotating-frame detunings `(Δ_i1, Δ_i2)` of defect `i` (GHz).
    pub fn detunings(&self, i: usize) -> (T, T) {
        let d = &self.defects[i];
        let dr = &self.drives[i];
        (
            d.nu1 - dr.omega1 - self.omega_m + d.spectral_offset,
            d.nu2 - dr.omega2 + d.spectral_offset,
        )
    }

    /// Phonon-assisted Rabi amplitude `Ω_iR = Ω_i1 g_i / ω_m` (GHz).
    pub fn sideband_rabi(&self, i: usize) -> Cx<T> {
        self.drives[i].rabi1 * (self.defects[i].g / self.omega_m)
    }

    /// Effective spin-phonon exchange of defect `i` from the second-order
    /// flip-flop term, `|Ω_R* Ω_2 (1/Δ1 + 1/Δ2)| / 8` (GHz).
    pub fn effective_coupling(&self, i: usize) -> Result<T> {
        let (d1, d2) = self.detunings(i);
        if d1 == T::zero() || d2 == T::zero() {
            return Err(Error::invalid("effective coupling needs nonzero detunings"));
        }
        let omr = self.sideband_rabi(i);
        let om2 = self.drives[i].rabi2;
        Ok((omr.conj() * om2).norm() * (T::one() / d1 + T::one() / d2).abs() / T::lit(8.0))
    }
}

/// Closed-form effective coupling `g Ω1 Ω2 / (4|Δ| ω_m)` (GHz).
pub fn effective_coupling_closed_form<T: Real>(g: T, rabi1: T, rabi2: T, delta: T, omega_m: T) -> Result<T> {
    if delta == T::zero() || omega_m == T::zero() {
        return Err(Error::invalid("effective coupling needs nonzero Δ and ω_m"));
    }
    Ok(g * rabi1 * rabi2 / (T::lit(4.0) * delta.abs() * omega_m))
}

/// Extra `g1` detuning that puts `|n+1, g1⟩` and `|n, g2⟩` on resonance
/// once the second-order light shifts are included.
///
/// The `g1` shift of each defect scales with the phonon number, so in a
/// register of `active` driven defects the one-phonon state carries
/// `active` copies of `|Ω_R|²/4Δ1`; the condition solved is
/// `Δ1 + active·|Ω_R|²/(4Δ1) = Δ + |Ω_2|²/(4Δ)` on the root nearest `Δ`.
pub fn raman_resonance_offset<T: Real>(delta: T, rabi_r: T, rabi2: T, active: usize) -> Result<T> {
    if delta == T::zero() {
        return Ok(T::zero());
    }
    let four = T::lit(4.0);
    let c = delta + rabi2 * rabi2 / (four * delta);
    let m = T::from_usize(active.max(1)).unwrap();
    let disc = c * c - m * rabi_r * rabi_r;
    if disc < T::zero() {
        return Err(Error::invalid("no real Raman resonance: light shift exceeds detuning"));
    }
    let d1 = (c + c.signum() * disc.sqrt()) / T::lit(2.0);
    Ok(d1 - delta)
}

/// Cooperativity `g'² / (Γ_s Γ_m)` with `g'` as `g'/2π` in GHz and the
/// rates as quoted, `Γ_s = Γ_s¹ + Γ_s^φ`.
pub fn cooperativity<T: Real>(g_eff: T, dec: &DecoherenceSpec<T>) -> Result<T> {
    let gs = dec.gamma_s1 + dec.gamma_s_phi;
    let gm = dec.gamma_m1;
    if gs <= T::zero() || gm <= T::zero() {
        return Err(Error::invalid("cooperativity needs nonzero spin and phonon linewidths"));
    }
    Ok(g_eff * g_eff / (gs * gm))
}

/// Dispersive pull `χ = g'² / δ` for a two-laser detuning `δ` from the
/// Raman resonance (GHz).
pub fn dispersive_shift_chi<T: Real>(spec: &SystemSpec<T>, raman_detuning: T) -> Result<T> {
    if raman_detuning == T::zero() {
        return Err(Error::invalid("dispersive shift diverges at zero Raman detuning"));
    }
    let g = spec.effective_coupling(0)?;
    Ok(g * g / raman_detuning)
}

/// Off-resonant carrier light shift `|Ω1|² / (4(ω_m + Δ1))` (GHz).
pub fn ac_stark_shift<T: Real>(rabi1: Cx<T>, omega_m: T, delta1: T) -> Result<T> {
    let den = T::lit(4.0) * (omega_m + delta1);
    if den == T::zero() {
        return Err(Error::invalid("AC-Stark shift diverges at ω_m + Δ1 = 0"));
    }
    Ok(rabi1.norm_sqr() / den)
}

/// Eq. 1 in the lab frame at time `t` (ns), all terms retained.
pub fn lab_hamiltonian<T: Real>(spec: &SystemSpec<T>, t: T) -> Result<Operator<T>> {
    spec.validate()?;
    let l = spec.layout;
    let tp = two_pi::<T>();
    let b = phonon_lowering::<T>(l)?;
    let mut h = phonon_number::<T>(l)?.scaled(re(tp * spec.omega_m));
    let x = b.plus(&b.dagger());
    for (i, (d, dr)) in spec.defects.iter().zip(&spec.drives).enumerate() {
        let pe = defect_projector::<T>(l, i, Level::E)?;
        h.add_scaled(re(-tp * d.nu1), &defect_projector(l, i, Level::G1)?);
        h.add_scaled(re(-tp * d.nu2), &defect_projector(l, i, Level::G2)?);
        h.add_scaled(re(tp * d.spectral_offset), &pe);
        h.add_scaled(re(tp * d.g), &x.matmul(&pe));
        let half = T::lit(0.5);
        for (rabi, omega, from) in [(dr.rabi1, dr.omega1, Level::G1), (dr.rabi2, dr.omega2, Level::G2)] {
            let phase = -tp * omega * t;
            let c = rabi * half * Cx::from_polar(T::one(), phase) * tp;
            let up = defect_transition_op::<T>(l, i, from, Level::E)?;
            h.add_scaled(c, &up);
            h.add_scaled(c.conj(), &up.dagger());
        }
    }
    Ok(h)
}

/// Static part of the rotating frame: detunings plus the excited-pair shift.
fn rotating_frame_static<T: Real>(spec: &SystemSpec<T>, pair_shift: bool) -> Result<Operator<T>> {
    let l = spec.layout;
    let tp = two_pi::<T>();
    let mut h = Operator::zeros(l);
    for i in 0..spec.n_defects() {
        let (d1, d2) = spec.detunings(i);
        h.add_scaled(re(-tp * d1), &defect_projector(l, i, Level::G1)?);
        h.add_scaled(re(-tp * d2), &defect_projector(l, i, Level::G2)?);
    }
    if pair_shift {
        for i in 0..spec.n_defects() {
            for j in (i + 1)..spec.n_defects() {
                let c = -T::lit(2.0) * spec.defects[i].g * spec.defects[j].g / spec.omega_m;
                let pp = defect_projector::<T>(l, i, Level::E)?.matmul(&defect_projector(l, j, Level::E)?);
                h.add_scaled(re(tp * c), &pp);
            }
        }
    }
    Ok(h)
}

/// The two Raman drive operators shared by all defects:
/// `A_R = -½ Σ_i b|e_i⟩⟨g_i1|` and `A_2 = ½ Σ_i |e_i⟩⟨g_i2|`.
///
/// A drive pair `(Ω_R, Ω_2)` enters as `2π(Ω_R A_R + Ω_2 A_2 + h.c.)`.
pub fn raman_drive_operators<T: Real>(layout: HilbertLayout) -> Result<(Operator<T>, Operator<T>)> {
    let mut ar = Operator::zeros(layout);
    let mut a2 = Operator::zeros(layout);
    let half = T::lit(0.5);
    for i in 0..layout.defect_count() {
        ar.add_scaled(re(-half), &sideband_op(layout, i, Level::G1, Level::E)?);
        a2.add_scaled(re(half), &defect_transition_op(layout, i, Level::G2, Level::E)?);
    }
    Ok((ar, a2))
}

fn add_drive<T: Real>(h: &mut Operator<T>, c: Cx<T>, op: &Operator<T>) {
    let tp = two_pi::<T>();
    h.add_scaled(c * tp, op);
    h.add_scaled(c.conj() * tp, &op.dagger());
}

/// Linearized rotating-frame Hamiltonian: detunings, sideband and carrier
/// couplings, and the `-2 g_i g_j / ω_m` excited-pair shift.
pub fn rotating_frame_hamiltonian<T: Real>(spec: &SystemSpec<T>) -> Result<Operator<T>> {
    spec.validate()?;
    let l = spec.layout;
    let mut h = rotating_frame_static(spec, true)?;
    let half = T::lit(0.5);
    for i in 0..spec.n_defects() {
        let sb = sideband_op::<T>(l, i, Level::G1, Level::E)?;
        let car = defect_transition_op::<T>(l, i, Level::G2, Level::E)?;
        add_drive(&mut h, -spec.sideband_rabi(i) * half, &sb);
        add_drive(&mut h, spec.drives[i].rabi2 * half, &car);
    }
    Ok(h)
}

/// Second-order effective Hamiltonian with the excited state eliminated:
/// light-shifted ground levels plus the `b†|g1⟩⟨g2|` flip-flop.
pub fn effective_jc_hamiltonian<T: Real>(spec: &SystemSpec<T>) -> Result<Operator<T>> {
    spec.validate()?;
    let l = spec.layout;
    let tp = two_pi::<T>();
    let four = T::lit(4.0);
    let n_op = phonon_number::<T>(l)?;
    let mut h = Operator::zeros(l);
    for i in 0..spec.n_defects() {
        let (d1, d2) = spec.detunings(i);
        if d1 == T::zero() || d2 == T::zero() {
            return Err(Error::invalid(format!("defect {i}: effective model needs nonzero detunings")));
        }
        let omr = spec.sideband_rabi(i);
        let om2 = spec.drives[i].rabi2;
        let scale = omr.norm().max(om2.norm());
        if d1.abs().min(d2.abs()) < T::lit(5.0) * scale {
            warn!("defect {i}: detuning {d1}/{d2} GHz is not large against Rabi {scale} GHz; effective model is unreliable");
        }
        let pg1 = defect_projector::<T>(l, i, Level::G1)?;
        let pg2 = defect_projector::<T>(l, i, Level::G2)?;
        h.add_scaled(re(-tp * d1), &pg1);
        h.add_scaled(re(-tp * omr.norm_sqr() / (four * d1)), &n_op.matmul(&pg1));
        h.add_scaled(re(-tp * (d2 + om2.norm_sqr() / (four * d2))), &pg2);
        let c = omr.conj() * om2 * ((T::one() / d1 + T::one() / d2) / T::lit(8.0));
        // b† |g1⟩⟨g2| = (b |g2⟩⟨g1|)†
        let down = sideband_op::<T>(l, i, Level::G1, Level::G2)?;
        add_drive(&mut h, c.conj(), &down);
    }
    Ok(h)
}

/// Resonant dark-frame Hamiltonian (Δ = 0, no pair shift) for per-defect
/// amplitude pairs `(Ω_R, Ω_2)`.
pub fn darkframe_hamiltonian<T: Real>(spec: &SystemSpec<T>, amplitudes: &[(Cx<T>, Cx<T>)]) -> Result<Operator<T>> {
    let l = spec.layout;
    if amplitudes.len() != spec.n_defects() {
        return Err(Error::invalid(format!(
            "{} amplitude pairs for {} defects",
            amplitudes.len(),
            spec.n_defects()
        )));
    }
    let half = T::lit(0.5);
    let mut h = Operator::zeros(l);
    for (i, &(omr, om2)) in amplitudes.iter().enumerate() {
        add_drive(&mut h, -omr * half, &sideband_op(l, i, Level::G1, Level::E)?);
        add_drive(&mut h, om2 * half, &defect_transition_op(l, i, Level::G2, Level::E)?);
    }
    Ok(h)
}

/// Static rotating-frame part with no drive: detunings and, optionally,
/// the excited-pair shift. Schedules add the drives on top of this.
pub fn rotating_frame_undriven<T: Real>(spec: &SystemSpec<T>, pair_shift: bool) -> Result<Operator<T>> {
    spec.validate()?;
    rotating_frame_static(spec, pair_shift)
}

/// Lindblad operators for the configured rates. Zero-rate channels are
/// omitted.
pub fn collapse_operators<T: Real>(spec: &SystemSpec<T>) -> Result<Vec<Operator<T>>> {
    spec.validate()?;
    let dec = &spec.decoherence;
    let l = spec.layout;
    let k: T = dec.convention.factor();
    let f: T = dec.dephasing.factor();
    let mut out = Vec::new();
    let mut push = |rate: T, op: Operator<T>| {
        if rate > T::zero() {
            out.push(op.scaled(re(rate.sqrt())));
        }
    };
    push(k * dec.gamma_m1, phonon_lowering(l)?);
    for i in 0..spec.n_defects() {
        push(k * dec.gamma_e1 * dec.branching_g1, defect_transition_op(l, i, Level::E, Level::G1)?);
        push(k * dec.gamma_e1 * (T::one() - dec.branching_g1), defect_transition_op(l, i, Level::E, Level::G2)?);
        push(k * f * dec.gamma_e_phi, defect_projector(l, i, Level::E)?);
        push(k * dec.gamma_s1, defect_transition_op(l, i, Level::G2, Level::G1)?);
        push(k * f * dec.gamma_s_phi, defect_projector(l, i, Level::G2)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{max_abs, BasisLabel};
    use num_traits::Zero;

    fn tol() -> f64 {
        1e-12
    }

    #[test]
    fn lab_frame_decoupled_limit_is_diagonal() {
        let mut spec = SystemSpec::<f64>::preparation(1).unwrap();
        spec.defects[0].g = 0.0;
        spec.drives[0].rabi1 = Cx::zero();
        spec.drives[0].rabi2 = Cx::zero();
        let h = lab_hamiltonian(&spec, 0.3).unwrap();
        let l = spec.layout;
        for i in 0..l.total_dim() {
            for j in 0..l.total_dim() {
                if i != j {
                    assert!(h.matrix()[(i, j)].norm() < tol());
                }
            }
            let lab = l.decode(i).unwrap();
            let mut want = two_pi::<f64>() * 5.6 * lab.phonon as f64;
            want -= match lab.levels[0] {
                Level::G1 => two_pi::<f64>() * 16.3,
                Level::G2 => two_pi::<f64>() * 15.0,
                _ => 0.0,
            };
            assert!((h.matrix()[(i, i)].re - want).abs() < 1e-9);
        }
    }

    #[test]
    fn lab_frame_is_hermitian_and_has_table_coupling() {
        let spec = SystemSpec::<f64>::preparation(1).unwrap();
        for t in [0.0, 0.37, 1.0] {
            assert!(lab_hamiltonian(&spec, t).unwrap().hermiticity_error() < tol());
        }
        let h = lab_hamiltonian(&spec, 0.0).unwrap();
        let v = h
            .element(&BasisLabel::new(1, &[Level::E]), &BasisLabel::new(0, &[Level::E]))
            .unwrap();
        assert!((v.re - two_pi::<f64>() * 0.257).abs() < 1e-12);
    }

    #[test]
    fn rotating_frame_entries() {
        let spec = SystemSpec::<f64>::preparation(2).unwrap();
        assert!((spec.sideband_rabi(0).re - 0.5 * 0.257 / 5.6).abs() < 1e-15);
        assert!((spec.sideband_rabi(0).re - 0.022946).abs() < 1e-6);
        let h = rotating_frame_hamiltonian(&spec).unwrap();
        assert!(h.hermiticity_error() < tol());
        let ee = BasisLabel::new(0, &[Level::E, Level::E]);
        let want = -two_pi::<f64>() * 2.0 * 0.257f64.powi(2) / 5.6;
        assert!((h.element(&ee, &ee).unwrap().re - want).abs() < 1e-12);
        // Sideband element ⟨0,e g1| H |1,g1 g1⟩ = -2π Ω_R/2.
        let a = BasisLabel::new(0, &[Level::E, Level::G1]);
        let b = BasisLabel::new(1, &[Level::G1, Level::G1]);
        let omr = spec.sideband_rabi(0).re;
        assert!((h.element(&a, &b).unwrap().re + two_pi::<f64>() * omr / 2.0).abs() < 1e-12);
    }

    #[test]
    fn rotating_frame_without_drive_is_diagonal() {
        let mut spec = SystemSpec::<f64>::preparation(1).unwrap();
        spec.drives[0].rabi1 = Cx::zero();
        spec.drives[0].rabi2 = Cx::zero();
        let h = rotating_frame_hamiltonian(&spec).unwrap();
        let off = h.matrix().indexed_iter().filter(|((i, j), _)| i != j).map(|(_, v)| v.norm()).fold(0.0, f64::max);
        assert_eq!(off, 0.0);
    }

    #[test]
    fn effective_coupling_matches_closed_form() {
        let spec = SystemSpec::<f64>::raman(1, 6, 0.23, 0.5, 0.023, 0.0, DecoherenceSpec::none()).unwrap();
        let closed: f64 = effective_coupling_closed_form(0.257, 0.5, 0.023, 0.23, 5.6).unwrap();
        assert!((closed - 5.7366e-4).abs() < 1e-7);
        let from_h = spec.effective_coupling(0).unwrap();
        assert!(((from_h - closed) / closed).abs() < 1e-12);
        // Read it off the matrix element ⟨1 g1| H_eff |0 g2⟩ / 2π.
        let h = effective_jc_hamiltonian(&spec).unwrap();
        assert!(h.hermiticity_error() < tol());
        let v = h
            .element(&BasisLabel::new(1, &[Level::G1]), &BasisLabel::new(0, &[Level::G2]))
            .unwrap();
        assert!(((v.norm() / two_pi::<f64>() - closed) / closed).abs() < 1e-12);
    }

    #[test]
    fn effective_without_carrier_has_no_flip_flop() {
        let spec = SystemSpec::<f64>::raman(1, 6, 0.23, 0.5, 0.0, 0.0, DecoherenceSpec::none()).unwrap();
        let h = effective_jc_hamiltonian(&spec).unwrap();
        let off = h.matrix().indexed_iter().filter(|((i, j), _)| i != j).map(|(_, v)| v.norm()).fold(0.0, f64::max);
        assert_eq!(off, 0.0);
        let zero = SystemSpec::<f64>::raman(1, 6, 0.0, 0.5, 0.023, 0.0, DecoherenceSpec::none()).unwrap();
        assert!(effective_jc_hamiltonian(&zero).is_err());
    }

    #[test]
    fn darkframe_elements() {
        let spec = SystemSpec::<f64>::gate(1).unwrap();
        let zero = darkframe_hamiltonian(&spec, &[(Cx::zero(), Cx::zero())]).unwrap();
        assert_eq!(max_abs(zero.matrix()), 0.0);
        let h = darkframe_hamiltonian(&spec, &[(Cx::new(0.01, 0.0), Cx::new(0.02, 0.0))]).unwrap();
        let v = h
            .element(&BasisLabel::new(0, &[Level::E]), &BasisLabel::new(1, &[Level::G1]))
            .unwrap();
        assert!((v.re + two_pi::<f64>() * 0.01 / 2.0).abs() < 1e-15);
        assert!(darkframe_hamiltonian(&spec, &[]).is_err());
    }

    #[test]
    fn collapse_channel_counts() {
        let none = SystemSpec::<f64>::raman(1, 6, 0.23, 0.5, 0.023, 0.0, DecoherenceSpec::none()).unwrap();
        assert!(collapse_operators(&none).unwrap().is_empty());
        // Five rate columns; the excited decay splits into two branches.
        let t1 = SystemSpec::<f64>::preparation(1).unwrap();
        assert_eq!(collapse_operators(&t1).unwrap().len(), 6);
        let mut bad = t1.clone();
        bad.decoherence.gamma_m1 = -1.0;
        assert!(collapse_operators(&bad).is_err());
    }

    #[test]
    fn closed_form_scalars() {
        let spec = SystemSpec::<f64>::raman(1, 6, 0.23, 0.5, 0.023, 0.0, DecoherenceSpec::preparation()).unwrap();
        let g = spec.effective_coupling(0).unwrap();
        let chi = dispersive_shift_chi(&spec, 10.0 * g).unwrap();
        assert!((chi - g / 10.0).abs() < 1e-18);
        assert!((dispersive_shift_chi(&spec, -10.0 * g).unwrap() + chi).abs() < 1e-18);
        assert!((dispersive_shift_chi(&spec, 0.01).unwrap() - 3.29e-5).abs() < 1e-7);
        assert!(dispersive_shift_chi(&spec, 0.0).is_err());

        let s: f64 = ac_stark_shift(Cx::new(0.5, 0.0), 5.6, 0.0).unwrap();
        assert!((s - 0.25 / 22.4).abs() < 1e-15);
        assert!((s - 0.011161).abs() < 1e-6);
        assert_eq!(ac_stark_shift(Cx::zero(), 5.6, 0.0).unwrap(), 0.0);
        let rotated: f64 = ac_stark_shift(Cx::from_polar(0.5, 1.1), 5.6, 0.0).unwrap();
        assert!((rotated - s).abs() < 1e-15);
        assert!(ac_stark_shift(Cx::new(0.5, 0.0), 5.6, -5.6).is_err());

        let c = cooperativity(g, &spec.decoherence).unwrap();
        assert!((c / 3.2e5) < 1.2 && (3.2e5 / c) < 1.2);
    }

    #[test]
    fn resonance_offset_solves_light_shift_balance() {
        let (d, omr, om2) = (0.23, 0.022946, 0.023);
        for active in 1..=3 {
            let off = raman_resonance_offset(d, omr, om2, active).unwrap();
            let d1 = d + off;
            let lhs = d1 + active as f64 * omr * omr / (4.0 * d1);
            let rhs = d + om2 * om2 / (4.0 * d);
            assert!((lhs - rhs).abs() < 1e-15);
        }
        assert_eq!(raman_resonance_offset(0.0, omr, om2, 1).unwrap(), 0.0);
    }

    #[test]
    fn f32_builds_agree_with_f64() {
        let s64 = SystemSpec::<f64>::preparation(1).unwrap();
        let s32 = SystemSpec::<f32>::preparation(1).unwrap();
        let h64 = rotating_frame_hamiltonian(&s64).unwrap();
        let h32 = rotating_frame_hamiltonian(&s32).unwrap();
        for (a, b) in h64.matrix().iter().zip(h32.matrix().iter()) {
            assert!((a.re - b.re as f64).abs() < 1e-5 && (a.im - b.im as f64).abs() < 1e-5);
        }
    }

    #[test]
    fn t2_readings_differ_by_the_projector_factor() {
        let d = DecoherenceSpec::<f64>::gate();
        assert!((d.spin_dephasing_for_t2(1e5) - 1e-5).abs() < 1e-18);
        assert!((d.spin_dephasing_for_coherence_decay(1e5) - 2e-5).abs() < 1e-18);
        let c = DecoherenceSpec { dephasing: DephasingNormalization::Coherence, ..d };
        assert!((c.spin_dephasing_for_coherence_decay(1e5) - 1e-5).abs() < 1e-18);
    }
}
