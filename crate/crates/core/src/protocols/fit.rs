use crate::error::{Error, Result};

/// Sampled maximum `(t, value)`.
pub fn peak(times: &[f64], values: &[f64]) -> (f64, f64) {
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for (&t, &v) in times.iter().zip(values) {
        if v > best.1 {
            best = (t, v);
        }
    }
    best
}

/// Residual of the least-squares fit `a + b cos 2πft + c sin 2πft`.
fn residual(times: &[f64], values: &[f64], f: f64) -> f64 {
    // Normal equations for three basis functions.
    let mut g = [[0.0f64; 3]; 3];
    let mut r = [0.0f64; 3];
    let mut yy = 0.0;
    for (&t, &y) in times.iter().zip(values) {
        let w = std::f64::consts::TAU * f * t;
        let phi = [1.0, w.cos(), w.sin()];
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] += phi[i] * phi[j];
            }
            r[i] += phi[i] * y;
        }
        yy += y * y;
    }
    let Some(x) = solve3(g, r) else { return f64::INFINITY };
    yy - (x[0] * r[0] + x[1] * r[1] + x[2] * r[2])
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for c in 0..3 {
        let p = (c..3).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in (c + 1)..3 {
            let m = a[r][c] / a[c][c];
            for k in c..3 {
                a[r][k] -= m * a[c][k];
            }
            b[r] -= m * b[c];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = ((r + 1)..3).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Frequency in `[f_lo, f_hi]` whose single sinusoid plus offset best fits
/// the samples: a coarse scan followed by golden-section refinement.
pub fn fit_sinusoid_frequency(times: &[f64], values: &[f64], f_lo: f64, f_hi: f64) -> Result<f64> {
    if times.len() != values.len() || times.len() < 4 {
        return Err(Error::invalid("need at least four paired samples to fit a sinusoid"));
    }
    if !(f_lo > 0.0 && f_hi > f_lo) {
        return Err(Error::invalid("frequency window must satisfy 0 < f_lo < f_hi"));
    }
    let n = 2000;
    let step = (f_hi - f_lo) / n as f64;
    let mut best = (f_lo, f64::INFINITY);
    for k in 0..=n {
        let f = f_lo + step * k as f64;
        let r = residual(times, values, f);
        if r < best.1 {
            best = (f, r);
        }
    }
    let (mut a, mut b) = ((best.0 - step).max(f_lo), (best.0 + step).min(f_hi));
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let (mut fc, mut fd) = (residual(times, values, c), residual(times, values, d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = residual(times, values, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = residual(times, values, d);
        }
    }
    Ok((a + b) / 2.0)
}
