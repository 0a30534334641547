//! TOML run configuration. Every section is optional; omitted values are
//! filled from the preparation or gate parameter defaults of the chosen experiment.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spinphonon::dynamics::IntegratorConfig;
use spinphonon::models::{
    raman_resonance_offset, table, DecoherenceSpec, DefectSpec, DephasingNormalization, DriveSpec, RateConvention, SystemSpec,
};
use spinphonon::protocols::{DetuningMode, LeakageModel, SpectralDiffusionConfig};
use spinphonon::pulses::{matched_transfer_duration, CzDesign, DEFAULT_SCALE};
use spinphonon::Cx;

use crate::error::CliError;

/// Two-defect Dicke preparation time (ns) that other sizes are matched to.
pub const DICKE_REFERENCE_NS: f64 = 3927.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Odro,
    Chevron,
    Swap,
    Cz,
    Robustness,
    Dicke,
    SdBenchmark,
    Leakage,
    AcStark,
    PulseDesign,
    Darkstate,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Odro => "odro",
            Kind::Chevron => "chevron",
            Kind::Swap => "swap",
            Kind::Cz => "cz",
            Kind::Robustness => "robustness",
            Kind::Dicke => "dicke",
            Kind::SdBenchmark => "sd-benchmark",
            Kind::Leakage => "leakage",
            Kind::AcStark => "ac-stark",
            Kind::PulseDesign => "pulse-design",
            Kind::Darkstate => "darkstate",
        }
    }

    /// Resonant dark-state experiments run at Δ = 0 with the gate-set rates.
    fn resonant(self) -> bool {
        matches!(self, Kind::Cz | Kind::Robustness | Kind::Dicke)
    }

    fn default_defects(self) -> usize {
        match self {
            Kind::Swap | Kind::Cz | Kind::Robustness | Kind::Dicke => 2,
            _ => 1,
        }
    }

    fn default_phonon_levels(self) -> usize {
        // n + #g2 + #e is conserved by the drives and lowered by decay, so
        // one level above the initial excitation number is exact.
        match self {
            Kind::Swap | Kind::Cz | Kind::Robustness => 3,
            _ => 2,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub n_defects: Option<usize>,
    pub phonon_levels: Option<usize>,
    /// Phonon frequency (GHz).
    pub omega_m: Option<f64>,
    pub g: Option<f64>,
    pub nu1: Option<f64>,
    pub nu2: Option<f64>,
    /// Common optical detuning Δ (GHz).
    pub delta: Option<f64>,
    pub rabi1: Option<f64>,
    pub rabi2: Option<f64>,
    /// Two-laser offset added to the `g1` detuning; defaults to the
    /// light-shifted Raman resonance.
    pub raman_offset: Option<f64>,
    /// Two-laser detuning at which the dispersive pull χ is reported (GHz).
    pub dispersive_detuning: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoherenceConfig {
    pub gamma_m1: Option<f64>,
    pub gamma_e1: Option<f64>,
    pub gamma_e_phi: Option<f64>,
    pub gamma_s1: Option<f64>,
    pub gamma_s_phi: Option<f64>,
    pub branching_g1: Option<f64>,
    pub convention: Option<RateConvention>,
    pub dephasing: Option<DephasingNormalization>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdroConfig {
    /// Evolution window (ns); defaults to `1.4/(4g')`.
    pub duration: Option<f64>,
    pub samples: usize,
    /// Also scan the (Δ, Ω1, Ω2) neighborhood for the saturated optimum.
    pub optimum: bool,
    pub delta_factors: Vec<f64>,
    pub rabi1_factors: Vec<f64>,
    pub rabi2_factors: Vec<f64>,
}

impl Default for OdroConfig {
    fn default() -> Self {
        let f = vec![0.5, 1.0, 1.5, 2.0];
        Self { duration: None, samples: 400, optimum: false, delta_factors: f.clone(), rabi1_factors: f.clone(), rabi2_factors: f }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChevronConfig {
    /// Offsets run over `±span·g'`.
    pub span_geff: f64,
    pub count: usize,
    pub duration: f64,
    pub samples: usize,
    /// Offsets (units of g') whose oscillation frequency is fitted.
    pub fit_offsets_geff: Vec<f64>,
}

impl Default for ChevronConfig {
    fn default() -> Self {
        Self { span_geff: 4.0, count: 41, duration: 3000.0, samples: 200, fit_offsets_geff: vec![-4.0, -2.0, 0.0, 2.0, 4.0] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwapConfig {
    pub mode: DetuningMode,
    pub span_geff: f64,
    pub count: usize,
    /// Defaults to 1.5× the resonant transfer time.
    pub duration: Option<f64>,
    pub samples: usize,
    /// Common detuning (units of g') for the virtual-exchange fit; 0 skips it.
    pub virtual_detuning_geff: f64,
    pub virtual_duration: f64,
    pub virtual_samples: usize,
}

impl Default for SwapConfig {
    fn default() -> Self {
        Self {
            mode: DetuningMode::Opposite,
            span_geff: 4.0,
            count: 21,
            duration: None,
            samples: 300,
            virtual_detuning_geff: 10.0,
            virtual_duration: 20000.0,
            virtual_samples: 800,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CzConfig {
    /// Samples of the decoherence-free phase traces.
    pub samples: usize,
}

impl Default for CzConfig {
    fn default() -> Self {
        Self { samples: 201 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobustnessConfig {
    /// Spin coherence times (ns).
    pub t2_ns: Vec<f64>,
}

impl Default for RobustnessConfig {
    fn default() -> Self {
        Self { t2_ns: vec![1e4, 2e4, 5e4, 1e5, 2e5, 1e6] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DickeConfig {
    /// Schedule length (ns); defaults to 3927 ns for two defects and to the
    /// pulse-area-matched length otherwise.
    pub duration: Option<f64>,
    pub scale: f64,
    pub samples: usize,
}

impl Default for DickeConfig {
    fn default() -> Self {
        Self { duration: None, scale: DEFAULT_SCALE, samples: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeakageConfig {
    pub model: LeakageModel,
    pub samples: usize,
    /// Also project the full two-defect evolution onto the leaked dark state.
    pub full_check: bool,
}

impl Default for LeakageConfig {
    fn default() -> Self {
        Self { model: LeakageModel::Dressed, samples: 400, full_check: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StarkConfig {
    /// Carrier drive amplitudes Ω1 (GHz).
    pub rabi1: Vec<f64>,
    pub omega_m: f64,
    pub delta1: f64,
    pub duration: f64,
    pub samples: usize,
}

impl Default for StarkConfig {
    fn default() -> Self {
        Self { rabi1: vec![0.25, 0.5, 0.75], omega_m: table::OMEGA_M, delta1: 0.0, duration: 200.0, samples: 4000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseDesignConfig {
    /// Rows of the emitted schedule table.
    pub samples: usize,
}

impl Default for PulseDesignConfig {
    fn default() -> Self {
        Self { samples: 2001 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DarkStateConfig {
    /// Sideband amplitude Ω_R (GHz).
    pub omega_r: f64,
    /// Amplitude |Ω2| (GHz) and its phase φ (rad).
    pub omega_2: f64,
    pub phi: f64,
}

impl Default for DarkStateConfig {
    fn default() -> Self {
        Self { omega_r: DEFAULT_SCALE, omega_2: DEFAULT_SCALE, phi: 0.0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub system: SystemConfig,
    pub decoherence: DecoherenceConfig,
    pub integrator: IntegratorConfig<f64>,
    pub design: CzDesign<f64>,
    pub odro: OdroConfig,
    pub chevron: ChevronConfig,
    pub swap: SwapConfig,
    pub cz: CzConfig,
    pub robustness: RobustnessConfig,
    pub dicke: DickeConfig,
    pub sd: SpectralDiffusionConfig,
    pub leakage: LeakageConfig,
    pub stark: StarkConfig,
    pub pulse: PulseDesignConfig,
    pub darkstate: DarkStateConfig,
}

/// Parses TOML text, reporting the offending field path on schema errors.
pub fn parse_config_str(text: &str) -> Result<RunConfig, CliError> {
    let de = toml::Deserializer::new(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError::Config(format!("{path}: {}", inner.message().trim()))
    })
}

pub fn parse_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

pub fn to_toml(cfg: &RunConfig) -> Result<String, CliError> {
    toml::to_string(cfg).map_err(|e| CliError::Config(format!("cannot serialize configuration: {e}")))
}

fn positive(path: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{path}: must be a positive finite number, got {v}")))
    }
}

fn at_least(path: &str, v: usize, min: usize) -> Result<(), CliError> {
    if v >= min {
        Ok(())
    } else {
        Err(CliError::Config(format!("{path}: must be at least {min}, got {v}")))
    }
}

impl RunConfig {
    /// Fills every omitted physical parameter for `kind` and checks bounds.
    /// The result serializes to a file that parses back to itself.
    pub fn resolve(mut self, kind: Kind) -> Result<RunConfig, CliError> {
        if let Some(k) = self.kind {
            if k != kind {
                return Err(CliError::Config(format!("kind: configuration is for '{}' but '{}' was requested", k.name(), kind.name())));
            }
        }
        self.kind = Some(kind);
        self.seed = Some(self.seed.unwrap_or(self.sd.seed));
        self.sd.seed = self.seed.unwrap();

        let s = &mut self.system;
        let n = *s.n_defects.get_or_insert(kind.default_defects());
        at_least("system.n_defects", n, 1)?;
        if n > 3 {
            log::warn!("{n} defects is beyond desk scale; expect long runtimes");
        }
        let nph = *s.phonon_levels.get_or_insert(kind.default_phonon_levels());
        at_least("system.phonon_levels", nph, 2)?;
        let omega_m = *s.omega_m.get_or_insert(table::OMEGA_M);
        positive("system.omega_m", omega_m)?;
        let g = *s.g.get_or_insert(table::G);
        if !(g >= 0.0) {
            return Err(CliError::Config(format!("system.g: must be non-negative, got {g}")));
        }
        let base = DefectSpec::<f64>::divacancy();
        positive("system.nu1", *s.nu1.get_or_insert(base.nu1))?;
        positive("system.nu2", *s.nu2.get_or_insert(base.nu2))?;
        let delta = *s.delta.get_or_insert(if kind.resonant() { 0.0 } else { table::DELTA });
        if !delta.is_finite() {
            return Err(CliError::Config("system.delta: must be finite".into()));
        }
        let r1 = *s.rabi1.get_or_insert(table::RABI1);
        positive("system.rabi1", r1)?;
        let r2 = *s.rabi2.get_or_insert(table::RABI2);
        positive("system.rabi2", r2)?;
        if s.raman_offset.is_none() {
            let off = if delta == 0.0 { 0.0 } else { raman_resonance_offset(delta, r1 * g / omega_m, r2, n).map_err(CliError::Core)? };
            s.raman_offset = Some(off);
        }
        positive("system.dispersive_detuning", *s.dispersive_detuning.get_or_insert(0.01))?;

        let base = if kind.resonant() { DecoherenceSpec::<f64>::gate() } else { DecoherenceSpec::<f64>::preparation() };
        let d = &mut self.decoherence;
        d.gamma_m1.get_or_insert(base.gamma_m1);
        d.gamma_e1.get_or_insert(base.gamma_e1);
        d.gamma_e_phi.get_or_insert(base.gamma_e_phi);
        d.gamma_s1.get_or_insert(base.gamma_s1);
        d.gamma_s_phi.get_or_insert(base.gamma_s_phi);
        d.branching_g1.get_or_insert(base.branching_g1);
        d.convention.get_or_insert(base.convention);
        d.dephasing.get_or_insert(base.dephasing);
        self.decoherence_spec().validate().map_err(|e| CliError::Config(e.to_string().replace("invalid argument: ", "")))?;

        self.integrator.validate().map_err(|e| CliError::Config(format!("integrator: {e}")))?;
        positive("design.delta_r2", self.design.delta_r2)?;
        positive("design.t_rise", self.design.t_rise)?;
        positive("design.scale", self.design.scale)?;
        self.design.hold_durations().map_err(|e| CliError::Config(format!("design.k: {e}")))?;
        self.check_sections(kind)?;
        self.fill_durations(kind)?;
        Ok(self)
    }

    fn fill_durations(&mut self, kind: Kind) -> Result<(), CliError> {
        let spec = self.system_spec()?;
        match kind {
            Kind::Odro if self.odro.duration.is_none() => {
                self.odro.duration = Some(1.4 / (4.0 * spec.effective_coupling(0).map_err(|e| CliError::Config(format!("system: {e}")))?));
            }
            Kind::Swap if self.swap.duration.is_none() => {
                let g = spec.effective_coupling(0).map_err(|e| CliError::Config(format!("system: {e}")))?;
                self.swap.duration = Some(1.5 / (2.0 * 2f64.sqrt() * g));
            }
            Kind::Dicke if self.dicke.duration.is_none() => {
                let n = spec.n_defects();
                self.dicke.duration = Some(if n == 2 {
                    DICKE_REFERENCE_NS
                } else {
                    matched_transfer_duration(2, DICKE_REFERENCE_NS, n, self.dicke.scale)?
                });
            }
            _ => {}
        }
        Ok(())
    }

    fn check_sections(&self, kind: Kind) -> Result<(), CliError> {
        match kind {
            Kind::Odro => {
                if let Some(d) = self.odro.duration {
                    positive("odro.duration", d)?;
                }
                at_least("odro.samples", self.odro.samples, 2)?;
            }
            Kind::Chevron => {
                positive("chevron.duration", self.chevron.duration)?;
                at_least("chevron.count", self.chevron.count, 1)?;
                at_least("chevron.samples", self.chevron.samples, 8)?;
            }
            Kind::Swap => {
                if let Some(d) = self.swap.duration {
                    positive("swap.duration", d)?;
                }
                at_least("swap.samples", self.swap.samples, 2)?;
                if self.system.n_defects != Some(2) {
                    return Err(CliError::Config("system.n_defects: swap needs exactly 2 defects".into()));
                }
            }
            Kind::Cz | Kind::Robustness => {
                if self.system.n_defects != Some(2) {
                    return Err(CliError::Config("system.n_defects: the CZ gate needs exactly 2 defects".into()));
                }
                if self.system.delta != Some(0.0) {
                    return Err(CliError::Config("system.delta: the CZ gate runs on resonance (Δ = 0)".into()));
                }
                for (i, t) in self.robustness.t2_ns.iter().enumerate() {
                    positive(&format!("robustness.t2_ns[{i}]"), *t)?;
                }
            }
            Kind::Dicke => {
                at_least("system.n_defects", self.system.n_defects.unwrap_or(0), 2)?;
                if let Some(d) = self.dicke.duration {
                    positive("dicke.duration", d)?;
                }
                positive("dicke.scale", self.dicke.scale)?;
            }
            Kind::SdBenchmark => self.sd.validate().map_err(|e| CliError::Config(format!("sd: {e}")))?,
            Kind::Leakage => at_least("leakage.samples", self.leakage.samples, 2)?,
            Kind::AcStark => {
                if self.stark.rabi1.is_empty() {
                    return Err(CliError::Config("stark.rabi1: need at least one amplitude".into()));
                }
                positive("stark.duration", self.stark.duration)?;
            }
            Kind::PulseDesign => at_least("pulse.samples", self.pulse.samples, 2)?,
            Kind::Darkstate => {
                if !(self.darkstate.omega_r.hypot(self.darkstate.omega_2) > 0.0) {
                    return Err(CliError::Config("darkstate: omega_r and omega_2 cannot both vanish".into()));
                }
            }
        }
        Ok(())
    }

    /// Decoherence of a resolved configuration.
    pub fn decoherence_spec(&self) -> DecoherenceSpec<f64> {
        let d = &self.decoherence;
        let base = DecoherenceSpec::<f64>::none();
        DecoherenceSpec {
            gamma_m1: d.gamma_m1.unwrap_or(0.0),
            gamma_e1: d.gamma_e1.unwrap_or(0.0),
            gamma_e_phi: d.gamma_e_phi.unwrap_or(0.0),
            gamma_s1: d.gamma_s1.unwrap_or(0.0),
            gamma_s_phi: d.gamma_s_phi.unwrap_or(0.0),
            branching_g1: d.branching_g1.unwrap_or(base.branching_g1),
            convention: d.convention.unwrap_or_default(),
            dephasing: d.dephasing.unwrap_or_default(),
        }
    }

    /// System of a resolved configuration.
    pub fn system_spec(&self) -> Result<SystemSpec<f64>, CliError> {
        let s = &self.system;
        let missing = || CliError::Config("configuration was not resolved".into());
        let omega_m = s.omega_m.ok_or_else(missing)?;
        let defect = DefectSpec { g: s.g.ok_or_else(missing)?, nu1: s.nu1.ok_or_else(missing)?, nu2: s.nu2.ok_or_else(missing)?, spectral_offset: 0.0 };
        let n = s.n_defects.ok_or_else(missing)?;
        let drive = DriveSpec::raman(
            &defect,
            omega_m,
            s.delta.ok_or_else(missing)?,
            s.raman_offset.ok_or_else(missing)?,
            Cx::new(s.rabi1.ok_or_else(missing)?, 0.0),
            Cx::new(s.rabi2.ok_or_else(missing)?, 0.0),
        );
        SystemSpec::new(omega_m, vec![defect; n], vec![drive; n], self.decoherence_spec(), s.phonon_levels.ok_or_else(missing)?)
            .map_err(|e| CliError::Config(format!("system: {e}")))
    }
}
