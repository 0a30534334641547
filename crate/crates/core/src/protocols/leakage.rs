use serde::{Deserialize, Serialize};

use crate::algebra::{BasisLabel, Level, StateVector};
use crate::analysis::{dark_state_two_theta_phi, dark_state_two_tilde_theta_phi, leakage_upper_bound, DarkState};
use crate::dynamics::{evolve_unitary, integrate, linspace, IntegratorConfig, Probes};
use crate::error::Result;
use crate::models::{table, DecoherenceSpec, SystemSpec};
use crate::pulses::{design_cz_schedule, CzDesign, Segment};
use crate::scalar::Cx;

use super::{schedule_hamiltonian, Trace};

type C = Cx<f64>;

/// Which generator drives the `(C2, C̃2)` amplitudes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeakageModel {
    /// Connection only: `dC/dt = −A C`. Both dark states are degenerate.
    Bare,
    /// Connection plus the first-order energy of `|D̃2⟩` from the
    /// excited-pair shift, `ε = −2π(2g²/ω_m)|⟨0 ee|D̃2⟩|²`.
    #[default]
    Dressed,
}

fn labels() -> [BasisLabel; 5] {
    use Level::{E, G1, G2};
    [
        BasisLabel::new(2, &[G1, G1]),
        BasisLabel::new(0, &[G2, G2]),
        BasisLabel::new(0, &[E, E]),
        BasisLabel::new(1, &[G1, G2]),
        BasisLabel::new(1, &[G2, G1]),
    ]
}

fn comps(d: &DarkState<f64>, labs: &[BasisLabel; 5]) -> [C; 5] {
    std::array::from_fn(|k| d.amplitude(&labs[k]))
}

// Phase winding of each component under φ.
const K_D2: [f64; 5] = [1.0, -1.0, 0.0, 0.0, 0.0];
const K_DT: [f64; 5] = [0.0, -2.0, 0.0, -1.0, -1.0];

fn pair(theta: f64, phi: f64, labs: &[BasisLabel; 5]) -> [[C; 5]; 2] {
    [comps(&dark_state_two_theta_phi(theta, phi), labs), comps(&dark_state_two_tilde_theta_phi(theta, phi), labs)]
}

fn dtheta(theta: f64, phi: f64, labs: &[BasisLabel; 5]) -> [[C; 5]; 2] {
    let cd = |h: f64| {
        let (p, m) = (pair(theta + h, phi, labs), pair(theta - h, phi, labs));
        let mut out = [[C::new(0.0, 0.0); 5]; 2];
        for s in 0..2 {
            for k in 0..5 {
                out[s][k] = (p[s][k] - m[s][k]) / (2.0 * h);
            }
        }
        out
    };
    // Richardson extrapolation of the central difference.
    let (a, b) = (cd(1e-3), cd(5e-4));
    let mut out = [[C::new(0.0, 0.0); 5]; 2];
    for s in 0..2 {
        for k in 0..5 {
            out[s][k] = (b[s][k] * 4.0 - a[s][k]) / 3.0;
        }
    }
    out
}

/// Connection `A_ab = ⟨a|d/dt|b⟩` on `{|D2⟩, |D̃2⟩}` along a path with
/// rates `(dθ/dt, dφ/dt)`.
pub fn dark_pair_connection(theta: f64, phi: f64, theta_rate: f64, phi_rate: f64) -> [[C; 2]; 2] {
    let labs = labels();
    let v = pair(theta, phi, &labs);
    let dt = dtheta(theta, phi, &labs);
    let j = C::new(0.0, 1.0);
    let ks = [K_D2, K_DT];
    let mut a = [[C::new(0.0, 0.0); 2]; 2];
    for (ai, va) in v.iter().enumerate() {
        for bi in 0..2 {
            let mut acc = C::new(0.0, 0.0);
            for k in 0..5 {
                let d = dt[bi][k] * theta_rate + j * ks[bi][k] * v[bi][k] * phi_rate;
                acc += va[k].conj() * d;
            }
            a[ai][bi] = acc;
        }
    }
    a
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeakageReport {
    pub model: LeakageModel,
    /// `|C̃2(t)|²` from the two-state model.
    pub leakage: Trace,
    pub max_leakage: f64,
    /// `4η²`.
    pub bound: f64,
    /// `4η² sin²(Δφ/2)` on the first phase plateau, same time grid
    /// (zero elsewhere).
    pub perturbative: Trace,
    /// `|⟨D̃2(t)|ψ(t)⟩|²` from full closed evolution of `|0 g2 g2⟩`, when run.
    pub full_evolution: Option<Trace>,
    pub max_full_evolution: Option<f64>,
}

/// Dark-subspace leakage along the CZ schedule, starting in `|D2⟩`.
///
/// `full_check` also integrates the two-defect rotating-frame model and
/// projects onto `|D̃2(t)⟩`.
pub fn run_leakage_sim(
    design: &CzDesign<f64>,
    model: LeakageModel,
    samples: usize,
    full_check: bool,
    cfg: &IntegratorConfig<f64>,
) -> Result<LeakageReport> {
    let sched = design_cz_schedule(design)?;
    run_leakage_on(&sched, model, samples, full_check, cfg)
}

pub(crate) fn run_leakage_on(
    sched: &crate::pulses::StirapSchedule<f64>,
    model: LeakageModel,
    samples: usize,
    full_check: bool,
    cfg: &IntegratorConfig<f64>,
) -> Result<LeakageReport> {
    let total = sched.total_duration();
    let grid = linspace(0.0, total, samples.max(2));
    let shift = 2.0 * table::G * table::G / table::OMEGA_M;
    let lab_ee = BasisLabel::new(0, &[Level::E, Level::E]);
    let minus_i = C::new(0.0, -1.0);
    let mut leak = Vec::with_capacity(grid.len());
    integrate(
        |t, c: &[C], dc: &mut [C]| {
            let s = sched.sample_clamped(t);
            let a = dark_pair_connection(s.theta, s.phi, s.theta_rate, s.phi_rate);
            let eps = match model {
                LeakageModel::Bare => 0.0,
                LeakageModel::Dressed => {
                    let d = dark_state_two_tilde_theta_phi(s.theta, s.phi);
                    -std::f64::consts::TAU * shift * d.amplitude(&lab_ee).norm_sqr()
                }
            };
            dc[0] = -(a[0][0] * c[0] + a[0][1] * c[1]);
            dc[1] = -(a[1][0] * c[0] + a[1][1] * c[1]) + minus_i * eps * c[1];
        },
        vec![C::new(1.0, 0.0), C::new(0.0, 0.0)],
        &grid,
        cfg,
        |_, _, c| leak.push(c[1].norm_sqr()),
    )?;
    let max_leakage = leak.iter().copied().fold(0.0, f64::max);
    let (bound, eta) = leakage_upper_bound();

    // Perturbative estimate on the first constant-θ stage with a φ ramp.
    let bounds = sched.boundaries();
    let plateau = sched
        .stages()
        .iter()
        .enumerate()
        .find(|(_, s)| matches!(s, Segment::Hold { phi_rate, .. } if *phi_rate != 0.0))
        .map(|(k, _)| (bounds[k], bounds[k + 1]));
    let pert: Vec<f64> = grid
        .iter()
        .map(|&t| match plateau {
            Some((a, b)) if t >= a && t <= b => {
                let dphi = sched.sample_clamped(t).phi - sched.sample_clamped(a).phi;
                4.0 * eta * eta * (dphi / 2.0).sin().powi(2)
            }
            _ => 0.0,
        })
        .collect();

    let (full, max_full) = if full_check {
        let spec = SystemSpec::<f64>::gate(2)?.with_phonon_levels(3)?.with_decoherence(DecoherenceSpec::none())?;
        let h = schedule_hamiltonian(&spec, sched)?;
        let psi0 = StateVector::basis(spec.layout, &BasisLabel::new(0, &[Level::G2, Level::G2]))?;
        let run = evolve_unitary(&h, &psi0, &grid, cfg, &Probes::new().storing_states())?;
        let vals: Vec<f64> = run
            .kets
            .iter()
            .zip(&grid)
            .map(|(psi, &t)| {
                let s = sched.sample_clamped(t);
                let d = dark_state_two_tilde_theta_phi(s.theta, s.phi).to_state(spec.layout)?;
                Ok(d.inner(psi).norm_sqr())
            })
            .collect::<Result<_>>()?;
        let m = vals.iter().copied().fold(0.0, f64::max);
        (Some(Trace::new("full_evolution", grid.clone(), vals)), Some(m))
    } else {
        (None, None)
    };

    Ok(LeakageReport {
        model,
        leakage: Trace::new("leakage", grid.clone(), leak),
        max_leakage,
        bound,
        perturbative: Trace::new("perturbative", grid, pert),
        full_evolution: full,
        max_full_evolution: max_full,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::StirapSchedule;

    #[test]
    fn connection_is_anti_hermitian() {
        for &(th, ph, a, b) in &[(0.3, 0.2, 1e-3, 2e-3), (1.1, -0.7, -4e-4, 1.9e-3)] {
            let m = dark_pair_connection(th, ph, a, b);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((m[i][j] + m[j][i].conj()).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn static_schedule_has_no_leakage() {
        let s = StirapSchedule::new(vec![Segment::Hold { theta: 0.6, duration: 500.0, phi_rate: 0.0 }], 0.023).unwrap();
        let r = run_leakage_on(&s, LeakageModel::Dressed, 50, false, &IntegratorConfig::default()).unwrap();
        assert!(r.max_leakage < 1e-20);
    }
}
