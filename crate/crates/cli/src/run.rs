//! Dispatch from a resolved configuration to the protocol drivers, and
//! emission of data files and the JSON summary.

use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};
use spinphonon::analysis::{dark_state_single, dark_state_two, dark_state_two_tilde, geometric_phases, ideal_cz, DarkState, PAULI_LABELS};
use spinphonon::models::{cooperativity, dispersive_shift_chi, effective_coupling_closed_form, SystemSpec};
use spinphonon::protocols::{
    chevron_expected_frequency, fit_sinusoid_frequency, run_ac_stark_check, run_chevron, run_cz_gate, run_dicke_prep,
    run_leakage_sim, run_odro_optimum, run_odro_prep, run_robustness_scan, run_spectral_diffusion_benchmark, run_two_spin_swap,
    virtual_exchange_rate, dicke_schedule, Trace,
};
use spinphonon::pulses::{design_cz_schedule, CSV_HEADER};
use spinphonon::Cx;

use crate::config::{Kind, RunConfig};
use crate::error::CliError;
use crate::output::Emitter;

/// Samples per stage for the phase quadrature in summaries.
const PHASE_SAMPLES: usize = 2001;

/// Summary schema version; bump when a required key changes.
pub const SUMMARY_VERSION: &str = "1";

fn opt(v: Option<f64>) -> Value {
    v.map_or(Value::Null, Value::from)
}

/// g', C, χ, CZ hold durations and the designed geometric phases.
pub fn derived_quantities(cfg: &RunConfig, spec: &SystemSpec<f64>) -> Result<Value, CliError> {
    let s = &cfg.system;
    let g_eff = spec.effective_coupling(0).ok();
    let delta = s.delta.unwrap_or(0.0);
    let closed = if delta != 0.0 {
        effective_coupling_closed_form(s.g.unwrap_or(0.0), s.rabi1.unwrap_or(0.0), s.rabi2.unwrap_or(0.0), delta, spec.omega_m).ok()
    } else {
        None
    };
    let coop = g_eff.and_then(|g| cooperativity(g, &spec.decoherence).ok());
    let chi = g_eff.and_then(|_| dispersive_shift_chi(spec, s.dispersive_detuning.unwrap_or(0.01)).ok());
    let (t0, t1) = cfg.design.hold_durations()?;
    let sched = design_cz_schedule(&cfg.design)?;
    let ph = geometric_phases(&sched, PHASE_SAMPLES);
    Ok(json!({
        "g_eff_ghz": opt(g_eff),
        "g_eff_mhz": opt(g_eff.map(|g| g * 1e3)),
        "g_eff_closed_form_ghz": opt(closed),
        "cooperativity": opt(coop),
        "chi_ghz": opt(chi),
        "dispersive_detuning_ghz": s.dispersive_detuning,
        "t0_ns": t0,
        "t1_ns": t1,
        "cz_total_ns": sched.total_duration(),
        "gamma1": ph.gamma1,
        "gamma1_mod_2pi": ph.gamma1_mod_2pi(),
        "gamma2": ph.gamma2,
        "gamma2_physical": ph.gamma2_physical,
        "delta_gamma": ph.delta_gamma,
    }))
}

fn dark_rows(name: &str, d: &DarkState<f64>) -> Vec<Vec<String>> {
    d.terms.iter().map(|(l, a)| vec![name.to_string(), l.to_string(), a.re.to_string(), a.im.to_string()]).collect()
}

fn dark_json(d: &DarkState<f64>) -> Value {
    Value::Array(d.terms.iter().map(|(l, a)| json!({"label": l.to_string(), "re": a.re, "im": a.im})).collect())
}

/// Runs the experiment and writes its data files; returns the `results`
/// object of the summary.
fn execute(kind: Kind, cfg: &RunConfig, spec: &SystemSpec<f64>, out: &mut Emitter) -> Result<Value, CliError> {
    let ic = &cfg.integrator;
    Ok(match kind {
        Kind::Odro => {
            let c = &cfg.odro;
            let r = run_odro_prep(spec, c.duration, c.samples, ic)?;
            out.write_traces("odro_trace", "Single-phonon preparation", &r.traces)?;
            let mut res = json!({"fidelity": r.fidelity, "peak_time_ns": r.time, "duration_ns": c.duration, "diagnostics": r.diagnostics});
            if c.optimum {
                let o = run_odro_optimum(&c.delta_factors, &c.rabi1_factors, &c.rabi2_factors, &spec.decoherence, spec.layout.phonon_levels(), c.samples, ic)?;
                out.write_csv(
                    "odro_optimum.csv",
                    &["delta_factor", "rabi1_factor", "rabi2_factor", "fidelity", "peak_time_ns", "g_eff_ghz"],
                    o.points.iter().map(|p| [p.delta_factor, p.rabi1_factor, p.rabi2_factor, p.fidelity, p.time, p.g_eff]),
                )?;
                res["optimum"] = json!(o.best);
            }
            res
        }
        Kind::Chevron => {
            let c = &cfg.chevron;
            let g = spec.effective_coupling(0)?;
            let offsets: Vec<f64> = if c.count == 1 {
                vec![0.0]
            } else {
                (0..c.count).map(|k| g * c.span_geff * (2.0 * k as f64 / (c.count - 1) as f64 - 1.0)).collect()
            };
            let grid = run_chevron(spec, &offsets, c.duration, c.samples, ic)?;
            out.write_grid("chevron", "Phonon population vs offset and time", &grid)?;
            let times = &grid.axes[1].values;
            let mut fits = Vec::new();
            for &f in &c.fit_offsets_geff {
                let target = f * g;
                let (row, &off) = offsets
                    .iter()
                    .enumerate()
                    .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
                    .expect("at least one offset");
                let expected = chevron_expected_frequency(spec, off)?;
                let fitted = fit_sinusoid_frequency(times, grid.row(row), expected / 3.0, expected * 3.0)?;
                fits.push(json!({"offset_ghz": off, "expected_ghz": expected, "fitted_ghz": fitted, "relative_error": (fitted - expected).abs() / expected}));
            }
            json!({"g_eff_ghz": g, "offsets": offsets.len(), "samples": times.len(), "fits": fits})
        }
        Kind::Swap => {
            let c = &cfg.swap;
            let g = spec.effective_coupling(0)?;
            let det: Vec<f64> = match c.count {
                0 => Vec::new(),
                1 => vec![0.0],
                n => (0..n).map(|k| g * c.span_geff * (2.0 * k as f64 / (n - 1) as f64 - 1.0)).collect(),
            };
            let r = run_two_spin_swap(spec, c.mode, &det, c.duration, c.samples, ic)?;
            out.write_traces("swap_resonant", "Two-spin swap on resonance", &r.resonant.traces)?;
            if !det.is_empty() {
                out.write_grid("swap_grid", "Swap population vs detuning and time", &r.grid)?;
            }
            let mut res = json!({
                "fidelity": r.resonant.fidelity,
                "peak_time_ns": r.resonant.time,
                "transfer_time_ns": 1.0 / (2.0 * 2f64.sqrt() * g),
                "mode": c.mode,
                "diagnostics": r.resonant.diagnostics,
            });
            if c.virtual_detuning_geff != 0.0 {
                let (fitted, predicted) = virtual_exchange_rate(spec, c.virtual_detuning_geff * g, c.virtual_duration, c.virtual_samples, ic)?;
                res["virtual_exchange"] = json!({
                    "detuning_ghz": c.virtual_detuning_geff * g,
                    "fitted_oscillation_ghz": fitted,
                    "predicted_oscillation_ghz": predicted,
                    "exchange_coupling_ghz": fitted / 2.0,
                    "relative_error": (fitted - predicted).abs() / predicted,
                });
            }
            res
        }
        Kind::Cz => {
            let r = run_cz_gate(spec, &cfg.design, cfg.cz.samples, ic)?;
            out.write_csv(
                "chi.csv",
                &["row", "col", "re", "im"],
                r.chi.csv_rows().into_iter().map(|(a, b, re, im)| [a, b, re.to_string(), im.to_string()]),
            )?;
            out.write_traces("cz_phases", "Decoherence-free phases and populations", &r.phases.traces)?;
            let ideal = ideal_cz::<f64>();
            json!({
                "process_fidelity": r.process_fidelity,
                "normalized_process_fidelity": r.normalized_process_fidelity,
                "average_gate_fidelity": r.average_gate_fidelity,
                "chi": {"trace": r.chi.trace, "min_eigenvalue": r.chi.min_eigenvalue, "output_violation": r.chi.output_violation, "projected": r.chi.projected},
                "ideal_dimension": ideal.nrows(),
                "pauli_labels": PAULI_LABELS,
                "phases": {
                    "phase_10": r.phases.phase_10,
                    "phase_11": r.phases.phase_11,
                    "delta_gamma": r.phases.delta_gamma,
                    "population_10": r.phases.population_10,
                    "population_11": r.phases.population_11,
                    "mid_phonon_10": r.phases.mid_phonon_10,
                    "mid_phonon_11": r.phases.mid_phonon_11,
                },
                "total_duration_ns": r.total_duration,
                "hold_durations_ns": [r.hold_durations.0, r.hold_durations.1],
                "diagnostics": r.diagnostics,
            })
        }
        Kind::Robustness => {
            let r = run_robustness_scan(spec, &cfg.design, &cfg.robustness.t2_ns, ic)?;
            let dec = &spec.decoherence;
            out.write_csv(
                "robustness.csv",
                &["spin_t2_ns", "gamma_s_phi", "process_fidelity"],
                r.grid.axes[0].values.iter().zip(&r.grid.values).map(|(t, f)| [*t, dec.spin_dephasing_for_t2(*t), *f]),
            )?;
            if out.plotting() {
                let doc = crate::svg::line_plot("CZ fidelity vs spin T2", "spin T2 (ns)", "process fidelity", &[("fidelity", &r.grid.axes[0].values, &r.grid.values)]);
                out.write_text("robustness.svg", &doc)?;
            }
            let mut pairs: Vec<(f64, f64)> = r.grid.axes[0].values.iter().copied().zip(r.grid.values.iter().copied()).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let monotone = pairs.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-9);
            json!({"t2_ns": r.grid.axes[0].values, "process_fidelity": r.grid.values, "closed_fidelity": r.closed_fidelity, "monotone_in_t2": monotone})
        }
        Kind::Dicke => {
            let c = &cfg.dicke;
            let duration = c.duration.expect("resolved");
            let sched = dicke_schedule(duration, c.scale)?;
            let r = run_dicke_prep(spec, &sched, c.samples, ic)?;
            out.write_traces("dicke_trace", "Dicke-state fidelity", &r.traces)?;
            json!({
                "n_defects": r.n_defects,
                "duration_ns": r.duration,
                "fidelity": r.fidelity,
                "closed_fidelity": r.closed_fidelity,
                "symmetric_fidelity": r.symmetric_fidelity,
                "collective_adiabaticity": r.collective_adiabaticity,
                "diagnostics": r.diagnostics,
            })
        }
        Kind::SdBenchmark => {
            let r = run_spectral_diffusion_benchmark(&cfg.sd, ic)?;
            out.write_csv(
                "sd_summary.csv",
                &["prep_time_ns", "odro_mean", "odro_std", "stirap_mean", "stirap_std", "stirap_certainly_better"],
                (0..r.prep_times.len()).map(|k| {
                    [
                        r.prep_times[k].to_string(),
                        r.odro[k].mean.to_string(),
                        r.odro[k].std.to_string(),
                        r.stirap[k].mean.to_string(),
                        r.stirap[k].std.to_string(),
                        r.stirap_certainly_better(k).to_string(),
                    ]
                }),
            )?;
            let rows = (0..r.prep_times.len()).flat_map(|k| {
                let r = &r;
                (0..r.n_traj).map(move |i| [k as f64, i as f64, r.offsets[i], r.prep_times[k], r.odro[k].fidelities[i], r.stirap[k].fidelities[i]])
            });
            out.write_csv("sd_trajectories.csv", &["time_index", "trajectory", "offset_ghz", "prep_time_ns", "odro", "stirap"], rows)?;
            if out.plotting() {
                let om: Vec<f64> = r.odro.iter().map(|s| s.mean).collect();
                let sm: Vec<f64> = r.stirap.iter().map(|s| s.mean).collect();
                let doc = crate::svg::line_plot("Mean fidelity under spectral diffusion", "preparation time (ns)", "fidelity", &[("ODRO", &r.prep_times, &om), ("STIRAP", &r.prep_times, &sm)]);
                out.write_text("sd_summary.svg", &doc)?;
            }
            json!({
                "sigma_ghz": r.sigma,
                "n_traj": r.n_traj,
                "prep_times_ns": r.prep_times,
                "odro_mean": r.odro.iter().map(|s| s.mean).collect::<Vec<_>>(),
                "odro_std": r.odro.iter().map(|s| s.std).collect::<Vec<_>>(),
                "stirap_mean": r.stirap.iter().map(|s| s.mean).collect::<Vec<_>>(),
                "stirap_std": r.stirap.iter().map(|s| s.std).collect::<Vec<_>>(),
                "stirap_certainly_better": (0..r.prep_times.len()).map(|k| r.stirap_certainly_better(k)).collect::<Vec<_>>(),
            })
        }
        Kind::Leakage => {
            let c = &cfg.leakage;
            let r = run_leakage_sim(&cfg.design, c.model, c.samples, c.full_check, ic)?;
            let mut traces: Vec<Trace> = vec![r.leakage.clone(), r.perturbative.clone()];
            if let Some(f) = &r.full_evolution {
                traces.push(f.clone());
            }
            out.write_traces("leakage", "Dark-subspace leakage", &traces)?;
            json!({
                "model": r.model,
                "max_leakage": r.max_leakage,
                "bound": r.bound,
                "below_bound": r.max_leakage < r.bound,
                "max_full_evolution": opt(r.max_full_evolution),
            })
        }
        Kind::AcStark => {
            let c = &cfg.stark;
            let r = run_ac_stark_check(&c.rabi1, c.omega_m, c.delta1, c.duration, c.samples, ic)?;
            out.write_csv(
                "ac_stark.csv",
                &["rabi1_ghz", "fitted_shift_ghz", "predicted_shift_ghz", "relative_error"],
                r.points.iter().map(|p| [p.rabi1, p.fitted, p.predicted, p.relative_error]),
            )?;
            json!(r)
        }
        Kind::PulseDesign => {
            let sched = design_cz_schedule(&cfg.design)?;
            out.write_csv("schedule.csv", &CSV_HEADER, sched.csv_rows(cfg.pulse.samples))?;
            if out.plotting() {
                let rows = sched.csv_rows(cfg.pulse.samples);
                let t: Vec<f64> = rows.iter().map(|r| r[0]).collect();
                let th: Vec<f64> = rows.iter().map(|r| r[5]).collect();
                let ph: Vec<f64> = rows.iter().map(|r| r[6]).collect();
                out.write_text("schedule.svg", &crate::svg::line_plot("CZ schedule", "time (ns)", "rad", &[("theta", &t, &th), ("phi", &t, &ph)]))?;
            }
            let (t0, t1) = cfg.design.hold_durations()?;
            json!({
                "t0_ns": t0,
                "t1_ns": t1,
                "total_duration_ns": sched.total_duration(),
                "phi_rate_rad_per_ns": cfg.design.phi_rate(),
                "final_phi": sched.final_phi(),
                "phases": geometric_phases(&sched, PHASE_SAMPLES),
            })
        }
        Kind::Darkstate => {
            let c = &cfg.darkstate;
            let (omr, om2) = (Cx::new(c.omega_r, 0.0), Cx::from_polar(c.omega_2, c.phi));
            let d1 = dark_state_single(omr, om2)?;
            let mut rows = dark_rows("D1", &d1);
            let mut res = json!({"d1": dark_json(&d1)});
            for (l, a) in &d1.terms {
                println!("D1 {l}: {:.6} {:+.6}j", a.re, a.im);
            }
            if let (Ok(d2), Ok(dt)) = (dark_state_two(omr, om2), dark_state_two_tilde(omr, om2)) {
                rows.extend(dark_rows("D2", &d2));
                rows.extend(dark_rows("D2_tilde", &dt));
                res["d2"] = dark_json(&d2);
                res["d2_tilde"] = dark_json(&dt);
            }
            out.write_csv("darkstate.csv", &["state", "label", "re", "im"], rows)?;
            res
        }
    })
}

/// Effective configuration, data files, `summary.json` and its schema.
pub fn run_and_emit(cfg: &RunConfig, out_dir: &Path, plot: bool) -> Result<Value, CliError> {
    let kind = cfg.kind.ok_or_else(|| CliError::Config("kind: configuration was not resolved".into()))?;
    let start = Instant::now();
    let spec = cfg.system_spec()?;
    let mut out = Emitter::new(out_dir, plot)?;
    out.write_text("config.toml", &crate::config::to_toml(cfg)?)?;
    let results = execute(kind, cfg, &spec, &mut out)?;
    let derived = derived_quantities(cfg, &spec)?;
    out.write_text("summary.schema.json", crate::schema::SUMMARY_SCHEMA)?;
    let summary = json!({
        "version": SUMMARY_VERSION,
        "kind": kind.name(),
        "seed": cfg.seed,
        "derived": derived,
        "results": results,
        "outputs": out.files(),
        "wall_time_s": start.elapsed().as_secs_f64(),
        "config": serde_json::to_value(cfg).map_err(|e| CliError::Output(e.to_string()))?,
    });
    let text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Output(e.to_string()))?;
    out.write_text("summary.json", &(text + "\n"))?;
    Ok(summary)
}
