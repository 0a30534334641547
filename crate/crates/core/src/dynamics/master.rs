use std::collections::BTreeMap;
use std::sync::Arc;

use ndarray::Array2;
use num_traits::Zero;
use serde::Serialize;

use crate::algebra::{CsrMatrix, DensityMatrix, HilbertLayout, Operator, StateVector};
use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

use super::{integrate, IntegratorConfig, StepStats, TimeDependentHamiltonian};

/// Custom scalar read out of the raw state (row-major `ρ` or `ψ`).
pub type Sampler<T> = Arc<dyn Fn(T, &[Cx<T>]) -> f64 + Send + Sync>;

/// What to record on the reporting grid.
#[derive(Clone, Default)]
pub struct Probes<T: Real> {
    /// Expectation values `Re tr(O ρ)`.
    pub observables: Vec<(String, Operator<T>)>,
    /// Complex amplitudes `⟨k|ψ⟩`; pure-state runs only.
    pub amplitudes: Vec<(String, usize)>,
    pub samplers: Vec<(String, Sampler<T>)>,
    pub store_states: bool,
    /// Smallest eigenvalue of every sampled `ρ` (costs one dense
    /// diagonalization per sample).
    pub check_positivity: bool,
}

impl<T: Real> Probes<T> {
    pub fn new() -> Self {
        Self {
            observables: Vec::new(),
            amplitudes: Vec::new(),
            samplers: Vec::new(),
            store_states: false,
            check_positivity: false,
        }
    }

    pub fn observable(mut self, name: impl Into<String>, op: Operator<T>) -> Self {
        self.observables.push((name.into(), op));
        self
    }

    pub fn amplitude(mut self, name: impl Into<String>, index: usize) -> Self {
        self.amplitudes.push((name.into(), index));
        self
    }

    pub fn sampler(mut self, name: impl Into<String>, f: Sampler<T>) -> Self {
        self.samplers.push((name.into(), f));
        self
    }

    pub fn storing_states(mut self) -> Self {
        self.store_states = true;
        self
    }

    pub fn with_positivity(mut self) -> Self {
        self.check_positivity = true;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunDiagnostics {
    /// Largest `|tr ρ(t) − tr ρ(0)|` (or norm drift for kets).
    pub max_trace_drift: f64,
    pub max_hermiticity_error: f64,
    /// Smallest sampled eigenvalue, when positivity was checked.
    pub min_eigenvalue: Option<f64>,
    pub steps: StepStats,
}

#[derive(Clone, Debug)]
pub struct TrajectoryResult<T: Real> {
    pub times: Vec<f64>,
    /// Sampled density matrices, when requested.
    pub states: Vec<DensityMatrix<T>>,
    /// Sampled kets of a pure-state run, when requested.
    pub kets: Vec<StateVector<T>>,
    pub observables: BTreeMap<String, Vec<f64>>,
    pub amplitudes: BTreeMap<String, Vec<Cx<f64>>>,
    pub final_density: Option<DensityMatrix<T>>,
    pub final_ket: Option<StateVector<T>>,
    pub diagnostics: RunDiagnostics,
}

impl<T: Real> TrajectoryResult<T> {
    pub fn observable(&self, name: &str) -> Result<&[f64]> {
        self.observables
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::invalid(format!("no observable named {name:?}")))
    }

    pub fn amplitude(&self, name: &str) -> Result<&[Cx<f64>]> {
        self.amplitudes
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::invalid(format!("no amplitude track named {name:?}")))
    }

    /// Final state as a density matrix for either kind of run.
    pub fn final_state(&self) -> DensityMatrix<T> {
        match (&self.final_density, &self.final_ket) {
            (Some(r), _) => r.clone(),
            (None, Some(k)) => k.to_density(),
            (None, None) => unreachable!("every run records its final state"),
        }
    }
}

/// Lindblad generator split for fast repeated application.
pub struct Lindbladian<'a, T: Real> {
    h: &'a TimeDependentHamiltonian<T>,
    /// `−(i/2) Σ L†L`.
    anti: CsrMatrix<T>,
    jumps: Vec<CsrMatrix<T>>,
    n: usize,
    x: Vec<Cx<T>>,
    y: Vec<Cx<T>>,
    w: Vec<Cx<T>>,
}

/// Builds the right-hand side of the master equation.
pub fn lindblad_rhs<'a, T: Real>(h: &'a TimeDependentHamiltonian<T>, collapse: &[Operator<T>]) -> Result<Lindbladian<'a, T>> {
    let layout = h.layout();
    let n = layout.total_dim();
    let mut sum = Array2::<Cx<T>>::zeros((n, n));
    let mut jumps = Vec::with_capacity(collapse.len());
    for l in collapse {
        if l.layout() != layout {
            return Err(Error::dim("collapse operator layout differs from Hamiltonian"));
        }
        sum = sum + l.dagger().matmul(l).into_matrix();
        jumps.push(CsrMatrix::from_dense(l.matrix(), T::zero()));
    }
    let half_i = Cx::new(T::zero(), -T::lit(0.5));
    let anti = CsrMatrix::from_dense(&sum.mapv(|v| v * half_i), T::zero());
    let z = vec![Cx::zero(); n * n];
    Ok(Lindbladian { h, anti, jumps, n, x: z.clone(), y: z.clone(), w: z })
}

impl<T: Real> Lindbladian<'_, T> {
    /// `out = L(t)[ρ]` for row-major `ρ`.
    pub fn apply(&mut self, t: T, rho: &[Cx<T>], out: &mut [Cx<T>]) {
        let n = self.n;
        let one = Cx::new(T::one(), T::zero());
        let coeffs = self.h.coefficients(t);
        self.x.iter_mut().for_each(|v| *v = Cx::zero());
        self.h.mul_add(&coeffs, one, rho, n, &mut self.x);
        self.anti.mul_add(one, rho, n, &mut self.x);
        // −i X + (−i X)†
        for i in 0..n {
            for j in 0..n {
                let a = self.x[i * n + j];
                let b = self.x[j * n + i].conj();
                out[i * n + j] = Cx::new(a.im - b.im, b.re - a.re);
            }
        }
        for l in &self.jumps {
            l.mul_into(rho, n, &mut self.y);
            for i in 0..n {
                for j in 0..n {
                    self.w[i * n + j] = self.y[j * n + i].conj();
                }
            }
            // y = L (Lρ)† = L ρ† L†, whose adjoint is L ρ L†.
            l.mul_into(&self.w, n, &mut self.y);
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] += self.y[j * n + i].conj();
                }
            }
        }
    }
}

fn check_layout<T: Real>(h: &TimeDependentHamiltonian<T>, layout: HilbertLayout) -> Result<()> {
    if h.layout() != layout {
        return Err(Error::dim(format!(
            "initial state layout {:?} differs from Hamiltonian layout {:?}",
            layout,
            h.layout()
        )));
    }
    Ok(())
}

struct Recorder<'p, T: Real> {
    probes: &'p Probes<T>,
    observables: Vec<(String, Vec<(usize, usize, Cx<T>)>, Vec<f64>)>,
    amplitudes: Vec<Vec<Cx<f64>>>,
    samplers: Vec<Vec<f64>>,
    diag: RunDiagnostics,
    reference: f64,
}

impl<'p, T: Real> Recorder<'p, T> {
    fn new(probes: &'p Probes<T>, len: usize, reference: f64) -> Self {
        let observables = probes
            .observables
            .iter()
            .map(|(name, op)| {
                let csr = CsrMatrix::from_dense(op.matrix(), T::zero());
                (name.clone(), csr.triplets().collect(), Vec::with_capacity(len))
            })
            .collect();
        Self {
            probes,
            observables,
            amplitudes: vec![Vec::with_capacity(len); probes.amplitudes.len()],
            samplers: vec![Vec::with_capacity(len); probes.samplers.len()],
            diag: RunDiagnostics::default(),
            reference,
        }
    }

    fn samplers(&mut self, t: T, y: &[Cx<T>]) {
        for (k, (_, f)) in self.probes.samplers.iter().enumerate() {
            self.samplers[k].push(f(t, y));
        }
    }

    fn density(&mut self, t: T, rho: &[Cx<T>], n: usize) {
        let mut tr = Cx::<T>::zero();
        for i in 0..n {
            tr += rho[i * n + i];
        }
        self.diag.max_trace_drift = self.diag.max_trace_drift.max((tr.re.to_f64_lossy() - self.reference).abs().max(tr.im.to_f64_lossy().abs()));
        let mut herr = T::zero();
        for i in 0..n {
            for j in i..n {
                herr = herr.max((rho[i * n + j] - rho[j * n + i].conj()).norm());
            }
        }
        self.diag.max_hermiticity_error = self.diag.max_hermiticity_error.max(herr.to_f64_lossy());
        for (_, trip, out) in &mut self.observables {
            let mut acc = Cx::<T>::zero();
            for &(i, j, v) in trip.iter() {
                acc += v * rho[j * n + i];
            }
            out.push(acc.re.to_f64_lossy());
        }
        if self.probes.check_positivity {
            let m = Array2::from_shape_vec((n, n), rho.to_vec()).expect("square state");
            let ev = T::hermitian_eigenvalues(&m)[0].to_f64_lossy();
            self.diag.min_eigenvalue = Some(self.diag.min_eigenvalue.map_or(ev, |v: f64| v.min(ev)));
        }
        self.samplers(t, rho);
    }

    fn ket(&mut self, t: T, psi: &[Cx<T>]) {
        let norm: T = psi.iter().map(|v| v.norm_sqr()).sum();
        self.diag.max_trace_drift = self.diag.max_trace_drift.max((norm.to_f64_lossy() - self.reference).abs());
        for (_, trip, out) in &mut self.observables {
            let mut acc = Cx::<T>::zero();
            for &(i, j, v) in trip.iter() {
                acc += psi[i].conj() * v * psi[j];
            }
            out.push(acc.re.to_f64_lossy());
        }
        for (k, &(_, idx)) in self.probes.amplitudes.iter().enumerate() {
            let a = psi[idx];
            self.amplitudes[k].push(Cx::new(a.re.to_f64_lossy(), a.im.to_f64_lossy()));
        }
        self.samplers(t, psi);
    }

    fn finish(self, result: &mut TrajectoryResult<T>) {
        for (name, _, v) in self.observables {
            result.observables.insert(name, v);
        }
        for ((name, _), v) in self.probes.amplitudes.iter().zip(self.amplitudes) {
            result.amplitudes.insert(name.clone(), v);
        }
        for ((name, _), v) in self.probes.samplers.iter().zip(self.samplers) {
            result.observables.insert(name.clone(), v);
        }
        let steps = result.diagnostics.steps;
        result.diagnostics = RunDiagnostics { steps, ..self.diag };
    }
}

fn empty_result<T: Real>(grid: &[T]) -> TrajectoryResult<T> {
    TrajectoryResult {
        times: grid.iter().map(|t| t.to_f64_lossy()).collect(),
        states: Vec::new(),
        kets: Vec::new(),
        observables: BTreeMap::new(),
        amplitudes: BTreeMap::new(),
        final_density: None,
        final_ket: None,
        diagnostics: RunDiagnostics::default(),
    }
}

/// Integrates `dρ/dt = −i[H(t), ρ] + Σ_k (L_k ρ L_k† − ½{L_k†L_k, ρ})` and
/// samples on `grid`. States are never renormalized.
pub fn evolve_master_equation<T: Real>(
    h: &TimeDependentHamiltonian<T>,
    collapse: &[Operator<T>],
    rho0: &DensityMatrix<T>,
    grid: &[T],
    cfg: &IntegratorConfig<T>,
    probes: &Probes<T>,
) -> Result<TrajectoryResult<T>> {
    let layout = rho0.layout();
    check_layout(h, layout)?;
    if !probes.amplitudes.is_empty() {
        return Err(Error::invalid("amplitude probes need a pure-state run"));
    }
    let n = layout.total_dim();
    let mut lind = lindblad_rhs(h, collapse)?;
    let y0: Vec<Cx<T>> = rho0.matrix().iter().copied().collect();
    let reference = rho0.trace().re.to_f64_lossy();
    let mut rec = Recorder::new(probes, grid.len(), reference);
    let mut result = empty_result(grid);
    let last = grid.len().saturating_sub(1);
    let mut final_state = None;
    let stats = integrate(
        |t, y: &[Cx<T>], dy: &mut [Cx<T>]| lind.apply(t, y, dy),
        y0,
        grid,
        cfg,
        |i, t, y| {
            rec.density(t, y, n);
            if probes.store_states || i == last {
                let m = Array2::from_shape_vec((n, n), y.to_vec()).expect("square state");
                let rho = DensityMatrix::from_raw(layout, m).expect("layout checked");
                if probes.store_states {
                    result.states.push(rho.clone());
                }
                if i == last {
                    final_state = Some(rho);
                }
            }
        },
    )?;
    result.diagnostics.steps = stats;
    result.final_density = final_state;
    rec.finish(&mut result);
    Ok(result)
}

/// Schrödinger evolution `dψ/dt = −i H(t) ψ` sampled on `grid`.
pub fn evolve_unitary<T: Real>(
    h: &TimeDependentHamiltonian<T>,
    psi0: &StateVector<T>,
    grid: &[T],
    cfg: &IntegratorConfig<T>,
    probes: &Probes<T>,
) -> Result<TrajectoryResult<T>> {
    let layout = psi0.layout();
    check_layout(h, layout)?;
    let n = layout.total_dim();
    if let Some((name, idx)) = probes.amplitudes.iter().find(|(_, i)| *i >= n) {
        return Err(Error::invalid(format!("amplitude probe {name:?} index {idx} out of range")));
    }
    let y0: Vec<Cx<T>> = psi0.amplitudes().iter().copied().collect();
    let mut rec = Recorder::new(probes, grid.len(), psi0.norm().powi(2).to_f64_lossy());
    let mut result = empty_result(grid);
    let last = grid.len().saturating_sub(1);
    let mut final_state = None;
    let minus_i = Cx::new(T::zero(), -T::one());
    // Kets are cheap; run them 20x tighter so the norm drift stays at the
    // 1e-9 level for default tolerances.
    let tight = IntegratorConfig { rel_tol: cfg.rel_tol / T::lit(20.0), abs_tol: cfg.abs_tol / T::lit(20.0), ..cfg.clone() };
    let stats = integrate(
        |t, y: &[Cx<T>], dy: &mut [Cx<T>]| {
            dy.iter_mut().for_each(|v| *v = Cx::zero());
            let coeffs = h.coefficients(t);
            h.mul_add(&coeffs, minus_i, y, 1, dy);
        },
        y0,
        grid,
        &tight,
        |i, t, y| {
            rec.ket(t, y);
            if probes.store_states || i == last {
                let data = ndarray::Array1::from(y.to_vec());
                let psi = StateVector::from_raw(layout, data);
                if probes.store_states {
                    result.kets.push(psi.clone());
                }
                if i == last {
                    final_state = Some(psi);
                }
            }
        },
    )?;
    result.diagnostics.steps = stats;
    result.final_ket = final_state;
    rec.finish(&mut result);
    Ok(result)
}
