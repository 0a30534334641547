//! Dormand–Prince 5(4) with PI step control and the Hairer dense output.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

use super::IntegratorConfig;

/// Counters from one integration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

/// `out = y + h Σ a_i k_i` over the listed stages.
fn combine<T: Real>(out: &mut [Cx<T>], y: &[Cx<T>], h: T, terms: &[(f64, &[Cx<T>])]) {
    out.copy_from_slice(y);
    for &(a, k) in terms {
        if a == 0.0 {
            continue;
        }
        let s = h * T::lit(a);
        for (o, &kv) in out.iter_mut().zip(k) {
            *o += kv * s;
        }
    }
}

struct Tolerances<T> {
    rtol: T,
    atol: T,
}

impl<T: Real> Tolerances<T> {
    /// RMS of `e_i / (atol + rtol·max(|a_i|, |b_i|))`.
    fn norm(&self, e: &[Cx<T>], a: &[Cx<T>], b: &[Cx<T>]) -> T {
        let mut acc = T::zero();
        for ((ev, av), bv) in e.iter().zip(a).zip(b) {
            let sc = self.atol + self.rtol * av.norm().max(bv.norm());
            acc += ev.norm_sqr() / (sc * sc);
        }
        (acc / T::from_usize(e.len().max(1)).unwrap()).sqrt()
    }
}

/// Integrates `dy/dt = f(t, y)` from `grid[0]` and calls `sample(i, t_i, y)`
/// at every grid point, the first one with the initial value.
///
/// `grid` must be non-decreasing. Reported samples come from the dense
/// output, so grid spacing never limits the internal step.
pub fn integrate<T, F, S>(mut rhs: F, y0: Vec<Cx<T>>, grid: &[T], cfg: &IntegratorConfig<T>, mut sample: S) -> Result<StepStats>
where
    T: Real,
    F: FnMut(T, &[Cx<T>], &mut [Cx<T>]),
    S: FnMut(usize, T, &[Cx<T>]),
{
    cfg.validate()?;
    if grid.is_empty() {
        return Err(Error::invalid("empty time grid"));
    }
    if grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::invalid("time grid must be non-decreasing"));
    }
    let n = y0.len();
    // Local error is held at a quarter of the requested tolerance so the
    // accumulated error over a run stays near it.
    let quarter = T::lit(0.25);
    let tol = Tolerances {
        rtol: (cfg.rel_tol * quarter).max(T::EPS * T::lit(64.0)),
        atol: (cfg.abs_tol * quarter).max(T::EPS * T::EPS),
    };
    let mut stats = StepStats::default();
    let t_end = *grid.last().unwrap();
    let mut t = grid[0];
    let mut y = y0;
    let mut next = 0usize;
    while next < grid.len() && grid[next] <= t {
        sample(next, grid[next], &y);
        next += 1;
    }
    if next == grid.len() {
        return Ok(stats);
    }

    let zero = vec![Cx::<T>::zero(); n];
    let mut k: Vec<Vec<Cx<T>>> = (0..7).map(|_| zero.clone()).collect();
    let mut ytmp = zero.clone();
    let mut ynew = zero.clone();
    let mut err = zero.clone();
    let mut cont: Vec<Vec<Cx<T>>> = (0..5).map(|_| zero.clone()).collect();

    rhs(t, &y, &mut k[0]);
    stats.rhs_evals += 1;

    let span = t_end - t;
    let max_step = cfg.max_step.unwrap_or(span).min(span);
    let mut h = match cfg.initial_step {
        Some(h0) => h0,
        None => {
            let h = initial_step(&mut rhs, t, &y, &k[0], &tol, &mut ytmp, &mut err);
            stats.rhs_evals += 1;
            h
        }
    }
    .min(max_step);
    let mut err_old = T::lit(1e-4);
    let mut last_rejected = false;

    loop {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(Error::MaxSteps { steps: cfg.max_steps, t: t.to_f64_lossy() });
        }
        let remaining = t_end - t;
        if h >= remaining {
            h = remaining;
        }
        if h <= T::EPS * T::lit(16.0) * t.abs().max(T::one()) {
            return Err(Error::StepUnderflow { t: t.to_f64_lossy(), h: h.to_f64_lossy() });
        }

        let (k1, rest) = k.split_first_mut().unwrap();
        let (k2, rest) = rest.split_first_mut().unwrap();
        let (k3, rest) = rest.split_first_mut().unwrap();
        let (k4, rest) = rest.split_first_mut().unwrap();
        let (k5, rest) = rest.split_first_mut().unwrap();
        let (k6, rest) = rest.split_first_mut().unwrap();
        let k7 = &mut rest[0];

        combine(&mut ytmp, &y, h, &[(A21, k1)]);
        rhs(t + h * T::lit(C2), &ytmp, k2);
        combine(&mut ytmp, &y, h, &[(A31, k1), (A32, k2)]);
        rhs(t + h * T::lit(C3), &ytmp, k3);
        combine(&mut ytmp, &y, h, &[(A41, k1), (A42, k2), (A43, k3)]);
        rhs(t + h * T::lit(C4), &ytmp, k4);
        combine(&mut ytmp, &y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]);
        rhs(t + h * T::lit(C5), &ytmp, k5);
        combine(&mut ytmp, &y, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]);
        rhs(t + h, &ytmp, k6);
        combine(&mut ynew, &y, h, &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)]);
        rhs(t + h, &ynew, k7);
        stats.rhs_evals += 6;

        let zero_cx = Cx::zero();
        err.iter_mut().for_each(|e| *e = zero_cx);
        combine(&mut err, &zero, h, &[(E1, k1), (E3, k3), (E4, k4), (E5, k5), (E6, k6), (E7, k7)]);
        let e = tol.norm(&err, &y, &ynew);
        if !e.is_finite() {
            return Err(Error::NonFinite { t: t.to_f64_lossy() });
        }

        if e <= T::one() {
            // Dense output coefficients for this step.
            for i in 0..n {
                let ydiff = ynew[i] - y[i];
                let bspl = k1[i] * h - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - k7[i] * h - bspl;
                cont[4][i] = (k1[i] * T::lit(D1)
                    + k3[i] * T::lit(D3)
                    + k4[i] * T::lit(D4)
                    + k5[i] * T::lit(D5)
                    + k6[i] * T::lit(D6)
                    + k7[i] * T::lit(D7))
                    * h;
            }
            let t_new = if remaining <= h { t_end } else { t + h };
            while next < grid.len() && grid[next] <= t_new {
                let tg = grid[next];
                if tg == t_new {
                    sample(next, tg, &ynew);
                } else {
                    let s = (tg - t) / h;
                    let s1 = T::one() - s;
                    for i in 0..n {
                        ytmp[i] = cont[0][i] + (cont[1][i] + (cont[2][i] + (cont[3][i] + cont[4][i] * s1) * s) * s1) * s;
                    }
                    sample(next, tg, &ytmp);
                }
                next += 1;
            }
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(k1, k7);
            t = t_new;
            stats.accepted += 1;
            if next == grid.len() {
                return Ok(stats);
            }
            let e_c = e.max(T::lit(1e-10));
            let expo = T::lit(0.2 - BETA * 0.75);
            let mut fac = T::lit(SAFETY) * e_c.powf(-expo) * err_old.powf(T::lit(BETA));
            let fac_max = if last_rejected { T::one() } else { T::lit(FAC_MAX) };
            fac = fac.max(T::lit(FAC_MIN)).min(fac_max);
            h = (h * fac).min(max_step);
            err_old = e_c.max(T::lit(1e-4));
            last_rejected = false;
        } else {
            let fac = (T::lit(SAFETY) * e.powf(T::lit(-0.2))).max(T::lit(FAC_MIN));
            h = h * fac;
            stats.rejected += 1;
            last_rejected = true;
        }
    }
}

/// Hairer's starting-step heuristic.
fn initial_step<T: Real, F>(
    rhs: &mut F,
    t: T,
    y: &[Cx<T>],
    f0: &[Cx<T>],
    tol: &Tolerances<T>,
    ytmp: &mut [Cx<T>],
    f1: &mut [Cx<T>],
) -> T
where
    F: FnMut(T, &[Cx<T>], &mut [Cx<T>]),
{
    let d0 = tol.norm(y, y, y);
    let d1 = tol.norm(f0, y, y);
    let h0 = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) { T::lit(1e-6) } else { T::lit(0.01) * d0 / d1 };
    combine(ytmp, y, h0, &[(1.0, f0)]);
    rhs(t + h0, ytmp, f1);
    for (a, &b) in f1.iter_mut().zip(f0) {
        *a -= b;
    }
    let d2 = tol.norm(f1, y, y) / h0;
    let dm = d1.max(d2);
    let h1 = if dm <= T::lit(1e-15) {
        (h0 * T::lit(1e-3)).max(T::lit(1e-6))
    } else {
        (T::lit(0.01) / dm).powf(T::lit(0.2))
    };
    (h0 * T::lit(100.0)).min(h1)
}
