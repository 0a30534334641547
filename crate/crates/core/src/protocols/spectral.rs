use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{phonon_projector, BasisLabel, Level, StateVector};
use crate::dynamics::{evolve_unitary, IntegratorConfig, Probes};
use crate::error::{Error, Result};
use crate::models::{raman_resonance_offset, rotating_frame_hamiltonian, table, DecoherenceSpec, SystemSpec};
use crate::pulses::{design_transfer_schedule, TransferDirection, DEFAULT_SCALE};
use crate::scalar::Real;

use super::{propagate_static, schedule_hamiltonian};

/// Benchmark settings. Offsets are static per trajectory and shift both
/// optical branches equally.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralDiffusionConfig {
    /// Standard deviation of the optical offset (GHz).
    pub sigma: f64,
    pub n_traj: usize,
    pub seed: u64,
    /// Preparation times (ns).
    pub prep_times: Vec<f64>,
    /// STIRAP Rabi scale (GHz).
    pub scale: f64,
}

impl Default for SpectralDiffusionConfig {
    fn default() -> Self {
        // Six log-spaced points from 439 ns to 4355 ns.
        let (a, b) = (439f64.ln(), 4355f64.ln());
        let prep_times = (0..6).map(|k| (a + (b - a) * k as f64 / 5.0).exp()).collect();
        Self { sigma: 0.020, n_traj: 300, seed: 0, prep_times, scale: DEFAULT_SCALE }
    }
}

impl SpectralDiffusionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::invalid("sigma must be a finite non-negative offset"));
        }
        if self.n_traj == 0 {
            return Err(Error::invalid("n_traj must be at least 1"));
        }
        if self.prep_times.is_empty() || self.prep_times.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::invalid("prep_times must be a non-empty list of positive durations"));
        }
        if !(self.scale > 0.0) {
            return Err(Error::invalid("scale must be positive"));
        }
        Ok(())
    }

    /// Offset of trajectory `i`, from its own stream of the seeded
    /// generator, so it does not depend on scheduling.
    pub fn offset(&self, i: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(i as u64);
        if self.sigma == 0.0 {
            return 0.0;
        }
        Normal::new(0.0, self.sigma).expect("validated sigma").sample(&mut rng)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchemeStats {
    pub mean: f64,
    /// Population standard deviation over trajectories.
    pub std: f64,
    pub fidelities: Vec<f64>,
}

impl SchemeStats {
    fn from_samples(fidelities: Vec<f64>) -> Self {
        let n = fidelities.len() as f64;
        let mean = fidelities.iter().sum::<f64>() / n;
        let var = fidelities.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / n;
        Self { mean, std: var.sqrt(), fidelities }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralDiffusionRun {
    pub sigma: f64,
    pub n_traj: usize,
    pub seed: u64,
    pub prep_times: Vec<f64>,
    pub offsets: Vec<f64>,
    /// One entry per preparation time.
    pub odro: Vec<SchemeStats>,
    pub stirap: Vec<SchemeStats>,
}

impl SpectralDiffusionRun {
    /// Whether STIRAP `mean − σ` beats ODRO `mean + σ` at time index `k`.
    pub fn stirap_certainly_better(&self, k: usize) -> bool {
        self.stirap[k].mean - self.stirap[k].std > self.odro[k].mean + self.odro[k].std
    }
}

fn one_defect<T: Real>(delta: T, offset: T) -> Result<SystemSpec<T>> {
    let (r1, r2) = (T::lit(table::RABI1), T::lit(table::RABI2));
    let rabi_r = r1 * T::lit(table::G / table::OMEGA_M);
    let raman = raman_resonance_offset(delta, rabi_r, r2, 1)?;
    let mut s = SystemSpec::raman(1, 2, delta, r1, r2, raman, DecoherenceSpec::none())?;
    s.defects[0].spectral_offset = offset;
    Ok(s)
}

fn phonon_one<T: Real>(psi: &StateVector<T>) -> Result<f64> {
    let p = phonon_projector::<T>(psi.layout(), 1)?;
    Ok(psi.to_density().expectation(&p).re.to_f64_lossy())
}

/// ODRO phonon preparation in `prep_time` (ns) with optical offset `offset`
/// (GHz). The Raman detuning is scaled from the preparation-set value so that the
/// noiseless swap completes exactly at `prep_time`.
pub fn odro_fidelity_with_offset<T: Real>(prep_time: T, offset: T) -> Result<f64> {
    let base = one_defect(T::lit(table::DELTA), T::zero())?;
    let t_swap = T::one() / (T::lit(4.0) * base.effective_coupling(0)?);
    let spec = one_defect(T::lit(table::DELTA) * prep_time / t_swap, offset)?;
    let h = rotating_frame_hamiltonian(&spec)?;
    let psi0 = StateVector::basis(spec.layout, &BasisLabel::new(0, &[Level::G2]))?;
    let out = propagate_static(&h, &psi0, &[prep_time]);
    phonon_one(&out[0])
}

/// Resonant STIRAP transfer `|0, g2⟩ → |1, g1⟩` in `prep_time` (ns) with
/// optical offset `offset` (GHz).
pub fn stirap_fidelity_with_offset<T: Real>(prep_time: T, offset: T, scale: T, cfg: &IntegratorConfig<T>) -> Result<f64> {
    let spec = one_defect(T::zero(), offset)?;
    let sched = design_transfer_schedule(prep_time / T::lit(2.0), scale, TransferDirection::SpinsToPhonon)?;
    let h = schedule_hamiltonian(&spec, &sched)?;
    let psi0 = StateVector::basis(spec.layout, &BasisLabel::new(0, &[Level::G2]))?;
    let run = evolve_unitary(&h, &psi0, &[T::zero(), sched.total_duration()], cfg, &Probes::new())?;
    phonon_one(run.final_ket.as_ref().expect("final ket recorded"))
}

/// Monte-Carlo comparison of ODRO and STIRAP phonon preparation under
/// static spectral diffusion. No other decoherence is included.
pub fn run_spectral_diffusion_benchmark<T: Real>(sd: &SpectralDiffusionConfig, cfg: &IntegratorConfig<T>) -> Result<SpectralDiffusionRun> {
    sd.validate()?;
    let offsets: Vec<f64> = (0..sd.n_traj).map(|i| sd.offset(i)).collect();
    let jobs: Vec<(usize, usize)> = (0..sd.prep_times.len()).flat_map(|k| (0..sd.n_traj).map(move |i| (k, i))).collect();
    let results: Vec<Result<(f64, f64)>> = jobs
        .par_iter()
        .map(|&(k, i)| {
            let t = T::lit(sd.prep_times[k]);
            let o = T::lit(offsets[i]);
            Ok((odro_fidelity_with_offset(t, o)?, stirap_fidelity_with_offset(t, o, T::lit(sd.scale), cfg)?))
        })
        .collect();
    let results: Vec<(f64, f64)> = results.into_iter().collect::<Result<_>>()?;
    let mut odro = Vec::new();
    let mut stirap = Vec::new();
    for k in 0..sd.prep_times.len() {
        let chunk = &results[k * sd.n_traj..(k + 1) * sd.n_traj];
        odro.push(SchemeStats::from_samples(chunk.iter().map(|r| r.0).collect()));
        stirap.push(SchemeStats::from_samples(chunk.iter().map(|r| r.1).collect()));
    }
    Ok(SpectralDiffusionRun {
        sigma: sd.sigma,
        n_traj: sd.n_traj,
        seed: sd.seed,
        prep_times: sd.prep_times.clone(),
        offsets,
        odro,
        stirap,
    })
}
