use std::sync::Arc;

use super::*;
use crate::algebra::{
    defect_projector, defect_transition_op, frobenius_norm, sideband_op, BasisLabel, DensityMatrix, HilbertLayout,
    Level, Operator, StateVector,
};
use crate::models::{collapse_operators, rotating_frame_hamiltonian, DecoherenceSpec, DephasingNormalization, RateConvention, SystemSpec};
use crate::scalar::{two_pi, Cx};

fn one_defect(levels: usize) -> HilbertLayout {
    HilbertLayout::new(levels, 1).unwrap()
}

fn label(n: usize, l: Level) -> BasisLabel {
    BasisLabel::new(n, &[l])
}

#[test]
fn zero_generator_keeps_state() {
    let l = one_defect(2);
    let h = TimeDependentHamiltonian::new(Operator::<f64>::zeros(l)).unwrap();
    let psi = StateVector::superposition(l, &[(label(0, Level::G1), Cx::new(1.0, 0.0)), (label(1, Level::E), Cx::new(0.0, 1.0))]).unwrap();
    let rho0 = psi.to_density();
    let r = evolve_master_equation(&h, &[], &rho0, &linspace(0.0, 10.0, 5), &IntegratorConfig::default(), &Probes::new().storing_states())
        .unwrap();
    for s in &r.states {
        assert!(crate::algebra::max_abs_diff(s.matrix(), rho0.matrix()) == 0.0);
    }
}

#[test]
fn single_channel_decay_is_exponential() {
    let l = one_defect(2);
    let gamma: f64 = 0.3;
    let h = TimeDependentHamiltonian::new(Operator::<f64>::zeros(l)).unwrap();
    let lop = defect_transition_op(l, 0, Level::E, Level::G1).unwrap().scaled(Cx::new(gamma.sqrt(), 0.0));
    let rho0 = DensityMatrix::basis(l, &label(0, Level::E)).unwrap();
    let pe = defect_projector(l, 0, Level::E).unwrap();
    let grid = linspace(0.0, 12.0, 25);
    let r = evolve_master_equation(&h, &[lop], &rho0, &grid, &IntegratorConfig::default(), &Probes::new().observable("pe", pe)).unwrap();
    for (t, p) in r.times.iter().zip(r.observable("pe").unwrap()) {
        let want: f64 = (-gamma * t).exp();
        assert!((p - want).abs() <= 1e-8, "t={t} p={p} want={want}");
    }
    assert!(r.diagnostics.max_trace_drift < 1e-12);
}

#[test]
fn excited_dephasing_rate_follows_convention() {
    // Only Γ_e^φ: coherence between g1 and e decays at k·f·Γ/2.
    let cases = [
        (RateConvention::Plain, DephasingNormalization::Projector, 0.5),
        (RateConvention::Angular, DephasingNormalization::Coherence, two_pi::<f64>()),
    ];
    for (conv, norm, factor) in cases {
        let mut dec = DecoherenceSpec::<f64>::none();
        dec.gamma_e_phi = 0.02;
        dec.convention = conv;
        dec.dephasing = norm;
        let spec = SystemSpec::raman(1, 2, 0.23, 0.0, 0.0, 0.0, dec).unwrap();
        let l = spec.layout;
        let ls = collapse_operators(&spec).unwrap();
        assert_eq!(ls.len(), 1);
        let h = TimeDependentHamiltonian::new(Operator::<f64>::zeros(l)).unwrap();
        let psi = StateVector::superposition(l, &[(label(0, Level::G1), Cx::new(1.0, 0.0)), (label(0, Level::E), Cx::new(1.0, 0.0))]).unwrap();
        let (ig, ie) = (l.encode(&label(0, Level::G1)).unwrap(), l.encode(&label(0, Level::E)).unwrap());
        let grid = linspace(0.0, 50.0, 11);
        let probes = Probes::new().sampler("coh", Arc::new(move |_, y: &[Cx<f64>]| y[ig * 8 + ie].norm()));
        let r = evolve_master_equation(&h, &ls, &psi.to_density(), &grid, &IntegratorConfig::default(), &probes).unwrap();
        for (t, c) in r.times.iter().zip(r.observable("coh").unwrap()) {
            let want = 0.5 * (-factor * 0.02 * t).exp();
            assert!((c - want).abs() < 1e-9, "t={t}");
        }
    }
}

/// `H = 2π g′ (b† |g1⟩⟨g2| + h.c.)` on one defect.
fn jc_swap(g: f64, levels: usize) -> (TimeDependentHamiltonian<f64>, HilbertLayout) {
    let l = one_defect(levels);
    let down = sideband_op::<f64>(l, 0, Level::G1, Level::G2).unwrap();
    let h = down.plus(&down.dagger()).scaled(Cx::new(two_pi::<f64>() * g, 0.0));
    (TimeDependentHamiltonian::constant(h).unwrap(), l)
}

#[test]
fn vacuum_rabi_swap_matches_analytic() {
    let g = 0.574e-3;
    let (h, l) = jc_swap(g, 3);
    let t_swap = 1.0 / (4.0 * g);
    assert!((t_swap - 435.5).abs() < 1.0);
    let rho0 = DensityMatrix::basis(l, &label(0, Level::G2)).unwrap();
    let p1 = defect_projector(l, 0, Level::G1).unwrap();
    let grid = linspace(0.0, t_swap, 41);
    let r = evolve_master_equation(&h, &[], &rho0, &grid, &IntegratorConfig::default(), &Probes::new().observable("p", p1).with_positivity()).unwrap();
    for (t, p) in r.times.iter().zip(r.observable("p").unwrap()) {
        let want = (two_pi::<f64>() * g * t).sin().powi(2);
        assert!((p - want).abs() < 1e-7, "t={t}");
    }
    assert!((r.observable("p").unwrap().last().unwrap() - 1.0).abs() < 1e-7);
    assert!(r.diagnostics.min_eigenvalue.unwrap() > -1e-8);

    let u = evolve_unitary(&h, &StateVector::basis(l, &label(0, Level::G2)).unwrap(), &grid, &IntegratorConfig::default(), &Probes::new())
        .unwrap();
    let k = l.encode(&label(1, Level::G1)).unwrap();
    assert!((u.final_ket.as_ref().unwrap().amplitudes()[k].norm_sqr() - 1.0).abs() < 1e-7);
}

#[test]
fn diagonal_hamiltonian_gives_phases() {
    let l = one_defect(2);
    let e = 0.7;
    let h0 = defect_projector::<f64>(l, 0, Level::E).unwrap().scaled(Cx::new(e, 0.0));
    let h = TimeDependentHamiltonian::constant(h0).unwrap();
    let psi = StateVector::superposition(l, &[(label(0, Level::G1), Cx::new(1.0, 0.0)), (label(0, Level::E), Cx::new(1.0, 0.0))]).unwrap();
    let ie = l.encode(&label(0, Level::E)).unwrap();
    let ig = l.encode(&label(0, Level::G1)).unwrap();
    let grid = linspace(0.0, 20.0, 21);
    let r = evolve_unitary(&h, &psi, &grid, &IntegratorConfig::default(), &Probes::new().amplitude("e", ie).amplitude("g", ig)).unwrap();
    let s = 1.0 / 2f64.sqrt();
    for (t, (ae, ag)) in r.times.iter().zip(r.amplitude("e").unwrap().iter().zip(r.amplitude("g").unwrap())) {
        assert!((ae - Cx::from_polar(s, -e * t)).norm() < 1e-7, "t={t} {ae} {}", Cx::from_polar(s, -e * t));
        assert!((ag - Cx::new(s, 0.0)).norm() < 1e-14);
    }
    assert!(r.diagnostics.max_trace_drift < 1e-9, "{}", r.diagnostics.max_trace_drift);
    assert!(evolve_unitary(&h, &psi, &grid, &IntegratorConfig::default(), &Probes::new().amplitude("x", 99)).is_err());
}

#[test]
fn time_dependent_drive_matches_rotating_solution() {
    // Resonant drive of |g1⟩↔|e⟩ with a detuned carrier phase: in the
    // frame of the drive the problem is static and solvable by hand.
    let l = one_defect(2);
    let (w, om) = (0.05, 0.02);
    let h0 = defect_projector::<f64>(l, 0, Level::E).unwrap().scaled(Cx::new(two_pi::<f64>() * w, 0.0));
    let up = defect_transition_op(l, 0, Level::G1, Level::E).unwrap();
    let h = TimeDependentHamiltonian::new(h0)
        .unwrap()
        .with_drive(&up, Arc::new(move |t: f64| Cx::from_polar(two_pi::<f64>() * om / 2.0, -two_pi::<f64>() * w * t)))
        .unwrap();
    let psi = StateVector::basis(l, &label(0, Level::G1)).unwrap();
    let pe = defect_projector(l, 0, Level::E).unwrap();
    let grid = linspace(0.0, 40.0, 9);
    let r = evolve_unitary(&h, &psi, &grid, &IntegratorConfig::default(), &Probes::new().observable("pe", pe)).unwrap();
    for (t, p) in r.times.iter().zip(r.observable("pe").unwrap()) {
        let want = (std::f64::consts::PI * om * t).sin().powi(2);
        assert!((p - want).abs() < 1e-8);
    }
}

fn odro_run(cfg: &IntegratorConfig<f64>) -> TrajectoryResult<f64> {
    let spec = SystemSpec::<f64>::preparation(1).unwrap().with_phonon_levels(3).unwrap();
    let h = TimeDependentHamiltonian::constant(rotating_frame_hamiltonian(&spec).unwrap()).unwrap();
    let ls = collapse_operators(&spec).unwrap();
    let rho0 = DensityMatrix::basis(spec.layout, &label(0, Level::G2)).unwrap();
    evolve_master_equation(&h, &ls, &rho0, &linspace(0.0, 450.0, 10), cfg, &Probes::new().with_positivity()).unwrap()
}

#[test]
fn open_run_invariants_and_self_convergence() {
    let a = odro_run(&IntegratorConfig::default());
    assert!(a.diagnostics.max_trace_drift < 1e-8);
    assert!(a.diagnostics.max_hermiticity_error < 1e-10);
    assert!(a.diagnostics.min_eigenvalue.unwrap() > -1e-8);
    let rtol = 1e-7;
    let coarse = odro_run(&IntegratorConfig::with_tolerances(rtol, rtol * 1e-2));
    let fine = odro_run(&IntegratorConfig::with_tolerances(rtol / 10.0, rtol * 1e-3));
    let d = frobenius_norm(&(coarse.final_state().matrix() - fine.final_state().matrix()));
    assert!(d <= 10.0 * rtol, "{d}");
}

#[test]
fn layout_mismatch_is_rejected() {
    let h = TimeDependentHamiltonian::new(Operator::<f64>::zeros(one_defect(2))).unwrap();
    let rho = DensityMatrix::basis(one_defect(3), &label(0, Level::G1)).unwrap();
    assert!(evolve_master_equation(&h, &[], &rho, &[0.0, 1.0], &IntegratorConfig::default(), &Probes::new()).is_err());
    let bad = IntegratorConfig { rel_tol: 0.0, ..IntegratorConfig::default() };
    assert!(bad.validate().is_err());
}
