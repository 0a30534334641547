use ndarray::Array1;
use serde::Serialize;

use crate::algebra::{BasisLabel, HilbertLayout, Level, StateVector};
use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

/// Zero-energy eigenstate of the resonant Raman drive, stored sparsely.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DarkState<T: Real> {
    pub terms: Vec<(BasisLabel, Cx<T>)>,
    /// Conserved `n + #g2 + #e` of every term.
    pub excitation_number: usize,
}

impl<T: Real> DarkState<T> {
    fn new(mut terms: Vec<(BasisLabel, Cx<T>)>, excitation_number: usize) -> Result<Self> {
        let norm = terms.iter().map(|(_, a)| a.norm_sqr()).sum::<T>().sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::invalid("dark state amplitudes vanish"));
        }
        for (_, a) in &mut terms {
            *a = *a / norm;
        }
        Ok(Self { terms, excitation_number })
    }

    pub fn amplitude(&self, label: &BasisLabel) -> Cx<T> {
        self.terms
            .iter()
            .filter(|(l, _)| l == label)
            .fold(Cx::new(T::zero(), T::zero()), |acc, (_, a)| acc + *a)
    }

    /// Embeds into `layout`, which needs the same defect count and enough
    /// phonon levels.
    pub fn to_state(&self, layout: HilbertLayout) -> Result<StateVector<T>> {
        let mut data = Array1::zeros(layout.total_dim());
        for (l, a) in &self.terms {
            data[layout.encode(l)?] += *a;
        }
        StateVector::new(layout, data)
    }
}

fn lab(n: usize, levels: &[Level]) -> BasisLabel {
    BasisLabel::new(n, levels)
}

/// `(Ω_2|1 g1⟩ + Ω_R|0 g2⟩)` normalized.
pub fn dark_state_single<T: Real>(omega_r: Cx<T>, omega_2: Cx<T>) -> Result<DarkState<T>> {
    if omega_r.norm() == T::zero() && omega_2.norm() == T::zero() {
        return Err(Error::invalid("dark state undefined with both amplitudes zero"));
    }
    DarkState::new(vec![(lab(1, &[Level::G1]), omega_2), (lab(0, &[Level::G2]), omega_r)], 1)
}

/// Two-excitation dark state
/// `(Ω_2/2Ω_R)|2 g1g1⟩ + (Ω_R/√2Ω_2)|0 g2g2⟩ + (|1 g1g2⟩ + |1 g2g1⟩)/√2`.
pub fn dark_state_two<T: Real>(omega_r: Cx<T>, omega_2: Cx<T>) -> Result<DarkState<T>> {
    if omega_r.norm() == T::zero() || omega_2.norm() == T::zero() {
        return Err(Error::invalid("two-excitation dark state needs both amplitudes nonzero"));
    }
    let two = T::lit(2.0);
    let r2 = two.sqrt();
    use Level::{G1, G2};
    DarkState::new(
        vec![
            (lab(2, &[G1, G1]), omega_2 / (omega_r * two)),
            (lab(0, &[G2, G2]), omega_r / (omega_2 * r2)),
            (lab(1, &[G1, G2]), Cx::new(T::one() / r2, T::zero())),
            (lab(1, &[G2, G1]), Cx::new(T::one() / r2, T::zero())),
        ],
        2,
    )
}

/// Second zero-energy state of the two-excitation sector, orthogonal to
/// [`dark_state_two`] and carrying the `|0 ee⟩` component.
pub fn dark_state_two_tilde<T: Real>(omega_r: Cx<T>, omega_2: Cx<T>) -> Result<DarkState<T>> {
    if omega_r.norm() == T::zero() && omega_2.norm() == T::zero() {
        return Err(Error::invalid("dark state undefined with both amplitudes zero"));
    }
    let theta = omega_r.norm().atan2(omega_2.norm());
    let alpha = omega_r.arg();
    let mut d = dark_state_two_tilde_theta_phi(theta, omega_2.arg());
    // A complex Ω_R is the real case conjugated by e^{jα b†b}.
    for (l, a) in &mut d.terms {
        *a = *a * Cx::from_polar(T::one(), -alpha * T::from_usize(l.phonon).unwrap());
    }
    Ok(d)
}

/// `|D̃2⟩` in the `(θ, φ)` parametrization with real `Ω_R`.
pub fn dark_state_two_tilde_theta_phi<T: Real>(theta: T, phi: T) -> DarkState<T> {
    let (c, s) = (theta.cos(), theta.sin());
    let r2 = T::lit(2.0).sqrt();
    let c2 = c * c;
    let c4 = c2 * c2;
    let sym = T::one() / r2;
    let norm = ((T::lit(3.0) + T::lit(2.0) * c2 - T::lit(3.0) * c4) * (T::lit(2.0) - c4)).sqrt();
    let mix = Cx::from_polar(r2 * s * c * (T::one() + s * s), -phi) * sym;
    use Level::{E, G1, G2};
    let terms = vec![
        (lab(2, &[G1, G1]), Cx::new(-r2 * s * s, T::zero())),
        (lab(0, &[G2, G2]), Cx::from_polar(T::lit(2.0) * c4 - T::lit(3.0) * c2, -T::lit(2.0) * phi)),
        (lab(0, &[E, E]), Cx::new(T::lit(2.0) - c4, T::zero())),
        (lab(1, &[G1, G2]), mix),
        (lab(1, &[G2, G1]), mix),
    ]
    .into_iter()
    .map(|(l, a)| (l, a / norm))
    .collect();
    DarkState { terms, excitation_number: 2 }
}

/// `|D2⟩` in the `(θ, φ)` parametrization with real `Ω_R`:
/// `[c² e^{jφ}|2g1g1⟩ + √2 s² e^{-jφ}|0g2g2⟩ + 2sc·sym|1g1g2⟩] / √(2 − c⁴)`.
pub fn dark_state_two_theta_phi<T: Real>(theta: T, phi: T) -> DarkState<T> {
    let (c, s) = (theta.cos(), theta.sin());
    let r2 = T::lit(2.0).sqrt();
    let c2 = c * c;
    let norm = (T::lit(2.0) - c2 * c2).sqrt();
    let mix = Cx::new(T::lit(2.0) * s * c / r2, T::zero());
    use Level::{G1, G2};
    let terms = vec![
        (lab(2, &[G1, G1]), Cx::from_polar(c2, phi)),
        (lab(0, &[G2, G2]), Cx::from_polar(r2 * s * s, -phi)),
        (lab(1, &[G1, G2]), mix),
        (lab(1, &[G2, G1]), mix),
    ]
    .into_iter()
    .map(|(l, a)| (l, a / norm))
    .collect();
    DarkState { terms, excitation_number: 2 }
}

/// Symmetric one-excitation Dicke state `|0⟩ ⊗ Σ_k |g1…g2_k…g1⟩/√N`.
pub fn dicke_state<T: Real>(layout: HilbertLayout) -> Result<StateVector<T>> {
    let n = layout.defect_count();
    let amp = Cx::new(T::one() / T::from_usize(n).unwrap().sqrt(), T::zero());
    let terms: Vec<_> = (0..n)
        .map(|k| {
            let levels: Vec<Level> = (0..n).map(|j| if j == k { Level::G2 } else { Level::G1 }).collect();
            (BasisLabel::new(0, &levels), amp)
        })
        .collect();
    StateVector::superposition(layout, &terms)
}
