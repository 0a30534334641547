use proptest::prelude::*;

use spinphonon::algebra::{dagger, max_abs, phonon_projector, BasisLabel, DensityMatrix, Level, Matrix, StateVector};
use spinphonon::analysis::{
    chi_from_outputs, dark_state_single, dark_state_two, dark_state_two_tilde, gamma1_closed_form, geometric_phases,
    unitary_channel_outputs,
};
use spinphonon::dynamics::{evolve_master_equation, IntegratorConfig, Probes, TimeDependentHamiltonian};
use spinphonon::models::{
    collapse_operators, darkframe_hamiltonian, effective_jc_hamiltonian, raman_resonance_offset, rotating_frame_hamiltonian,
    table, DecoherenceSpec, SystemSpec,
};
use spinphonon::protocols::{propagate_static, run_spectral_diffusion_benchmark, schedule_hamiltonian, SpectralDiffusionConfig};
use spinphonon::pulses::{design_cz_schedule, design_transfer_schedule, CzDesign, TransferDirection};
use spinphonon::Cx;

fn cx(re: f64, im: f64) -> Cx<f64> {
    Cx::new(re, im)
}

fn rates(scale: f64, mix: [f64; 5]) -> DecoherenceSpec<f64> {
    DecoherenceSpec {
        gamma_m1: scale * mix[0],
        gamma_e1: scale * mix[1] * 100.0,
        gamma_e_phi: scale * mix[2] * 100.0,
        gamma_s1: scale * mix[3],
        gamma_s_phi: scale * mix[4],
        ..DecoherenceSpec::none()
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn odro_runs_keep_trace_and_positivity(
        scale in 1e-6f64..1e-3,
        mix in prop::array::uniform5(0.0f64..1.0),
        r1 in 0.5f64..1.5,
        r2 in 0.5f64..1.5,
    ) {
        let (a1, a2) = (table::RABI1 * r1, table::RABI2 * r2);
        let off = raman_resonance_offset(table::DELTA, a1 * table::G / table::OMEGA_M, a2, 1).unwrap();
        let spec = SystemSpec::raman(1, 3, table::DELTA, a1, a2, off, rates(scale, mix)).unwrap();
        let h = TimeDependentHamiltonian::constant(rotating_frame_hamiltonian(&spec).unwrap()).unwrap();
        let rho0 = DensityMatrix::basis(spec.layout, &BasisLabel::new(0, &[Level::G2])).unwrap();
        let grid: Vec<f64> = (0..=40).map(|k| 25.0 * k as f64).collect();
        let run = evolve_master_equation(&h, &collapse_operators(&spec).unwrap(), &rho0, &grid, &IntegratorConfig::default(), &Probes::new().with_positivity()).unwrap();
        prop_assert!(run.diagnostics.max_trace_drift <= 1e-8, "drift {}", run.diagnostics.max_trace_drift);
        prop_assert!(run.diagnostics.min_eigenvalue.unwrap() >= -1e-8);
    }

    #[test]
    fn dark_states_are_null_vectors(
        a in 1e-3f64..0.05, b in 1e-3f64..0.05, pa in -3.1f64..3.1, pb in -3.1f64..3.1,
    ) {
        let (omr, om2) = (Cx::from_polar(a, pa), Cx::from_polar(b, pb));
        for (n, d) in [
            (1, dark_state_single(omr, om2).unwrap()),
            (2, dark_state_two(omr, om2).unwrap()),
            (2, dark_state_two_tilde(omr, om2).unwrap()),
        ] {
            let spec = SystemSpec::<f64>::gate(n).unwrap().with_phonon_levels(4).unwrap();
            let h = darkframe_hamiltonian(&spec, &vec![(omr, om2); n]).unwrap();
            let out = h.apply(&d.to_state(spec.layout).unwrap());
            let r = out.iter().map(|z| z.norm()).fold(0.0, f64::max) / max_abs(h.matrix());
            prop_assert!(r <= 1e-10, "residual {r}");
        }
    }

    #[test]
    fn chi_round_trip_of_random_unitaries(entries in prop::array::uniform16(-1.0f64..1.0)) {
        let mut m: Matrix<f64> = Matrix::zeros((4, 4));
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = cx(entries[4 * i + j], entries[4 * j + i]);
            }
        }
        let herm = (&m + &dagger(&m)).mapv(|z| z * 0.5);
        let (vals, vecs) = <f64 as spinphonon::Real>::hermitian_eigh(&herm);
        let mut u: Matrix<f64> = Matrix::zeros((4, 4));
        for (k, l) in vals.iter().enumerate() {
            let ph = Cx::from_polar(1.0, -2.0 * l);
            for i in 0..4 {
                for j in 0..4 {
                    u[(i, j)] += vecs[(i, k)] * ph * vecs[(j, k)].conj();
                }
            }
        }
        let chi = chi_from_outputs(&unitary_channel_outputs(&u)).unwrap();
        prop_assert!((chi.process_fidelity(&u) - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn closed_form_gamma1_matches_quadrature(delta_r2 in 0.1e-3f64..1e-3, k in -5i32..=-2, t_rise in 200.0f64..2000.0) {
        let d = CzDesign { delta_r2, k, t_rise, scale: 0.023 };
        let s = design_cz_schedule(&d).unwrap();
        let g = geometric_phases(&s, 401);
        prop_assert!((g.gamma1 - gamma1_closed_form(&s)).abs() <= 1e-8);
        prop_assert!((g.delta_gamma - std::f64::consts::PI).abs() <= 1e-8);
    }

    #[test]
    fn effective_model_tracks_full_rotating_frame(fd in 0.8f64..2.0, f1 in 0.7f64..1.3, f2 in 0.7f64..1.3) {
        let (delta, a1, a2) = (table::DELTA * fd, table::RABI1 * f1, table::RABI2 * f2);
        let off = raman_resonance_offset(delta, a1 * table::G / table::OMEGA_M, a2, 1).unwrap();
        let spec = SystemSpec::raman(1, 2, delta, a1, a2, off, DecoherenceSpec::none()).unwrap();
        let g = spec.effective_coupling(0).unwrap();
        let times: Vec<f64> = (0..=60).map(|k| k as f64 / 60.0 / (2.0 * g)).collect();
        let psi = StateVector::basis(spec.layout, &BasisLabel::new(0, &[Level::G2])).unwrap();
        let p1 = phonon_projector::<f64>(spec.layout, 1).unwrap();
        let pop = |h| -> Vec<f64> {
            propagate_static(&h, &psi, &times).iter().map(|s| s.to_density().expectation(&p1).re).collect()
        };
        let full = pop(rotating_frame_hamiltonian(&spec).unwrap());
        let eff = pop(effective_jc_hamiltonian(&spec).unwrap());
        let worst = full.iter().zip(&eff).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(worst <= 0.05, "max deviation {worst}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 4, ..ProptestConfig::default() })]

    #[test]
    fn driven_two_defect_runs_keep_trace_and_positivity(
        scale in 1e-5f64..1e-3,
        mix in prop::array::uniform5(0.0f64..1.0),
        t_rise in 100.0f64..300.0,
    ) {
        let spec = SystemSpec::<f64>::gate(2).unwrap().with_phonon_levels(3).unwrap().with_decoherence(rates(scale, mix)).unwrap();
        let sched = design_transfer_schedule(t_rise, 0.023, TransferDirection::PhononToSpins).unwrap();
        let h = schedule_hamiltonian(&spec, &sched).unwrap();
        let rho0 = DensityMatrix::basis(spec.layout, &BasisLabel::new(1, &[Level::G1, Level::G1])).unwrap();
        let grid: Vec<f64> = (0..=10).map(|k| sched.total_duration() * k as f64 / 10.0).collect();
        let run = evolve_master_equation(&h, &collapse_operators(&spec).unwrap(), &rho0, &grid, &IntegratorConfig::default(), &Probes::new().with_positivity()).unwrap();
        prop_assert!(run.diagnostics.max_trace_drift <= 1e-8);
        prop_assert!(run.diagnostics.min_eigenvalue.unwrap() >= -1e-8);
    }

    #[test]
    fn seeded_benchmark_is_reproducible(seed in any::<u64>()) {
        let sd = SpectralDiffusionConfig { n_traj: 5, seed, prep_times: vec![439.0, 1737.0], ..Default::default() };
        let cfg = IntegratorConfig::default();
        let a = run_spectral_diffusion_benchmark::<f64>(&sd, &cfg).unwrap();
        let b = run_spectral_diffusion_benchmark::<f64>(&sd, &cfg).unwrap();
        prop_assert_eq!(&a, &b);
        // Trajectory i draws from its own stream.
        let more = SpectralDiffusionConfig { n_traj: 9, ..sd.clone() };
        prop_assert_eq!(&(0..5).map(|i| more.offset(i)).collect::<Vec<_>>(), &a.offsets);
    }
}
