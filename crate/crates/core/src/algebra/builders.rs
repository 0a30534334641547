use ndarray::Array2;
use num_traits::One;

use super::layout::{HilbertLayout, Level, Site, DEFECT_LEVELS};
use super::matrix::{identity, kron, Matrix, Operator};
use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

/// Truncated bosonic lowering operator, `b[n-1, n] = √n`.
pub fn annihilation_op<T: Real>(phonon_levels: usize) -> Result<Matrix<T>> {
    if phonon_levels < 2 {
        return Err(Error::invalid(format!("phonon_levels must be at least 2, got {phonon_levels}")));
    }
    let mut b = Array2::zeros((phonon_levels, phonon_levels));
    for n in 1..phonon_levels {
        b[(n - 1, n)] = Cx::new(T::from_usize(n).unwrap().sqrt(), T::zero());
    }
    Ok(b)
}

/// Single-defect `|to⟩⟨from|` as a 4×4 matrix.
pub fn level_op<T: Real>(from: Level, to: Level) -> Matrix<T> {
    let mut m = Array2::zeros((DEFECT_LEVELS, DEFECT_LEVELS));
    m[(to.index(), from.index())] = Cx::one();
    m
}

/// Kronecker product with identities on unlisted sites.
pub fn kron_embed<T: Real>(layout: HilbertLayout, site_ops: &[(Site, &Matrix<T>)]) -> Result<Operator<T>> {
    let sites = layout.sites();
    let mut factors: Vec<Option<&Matrix<T>>> = vec![None; sites.len()];
    for &(site, op) in site_ops {
        layout.check_site(site)?;
        let pos = layout.site_position(site);
        if factors[pos].is_some() {
            return Err(Error::invalid(format!("duplicate operator for site {site:?}")));
        }
        let d = layout.site_dim(site);
        if op.dim() != (d, d) {
            return Err(Error::dim(format!("site {site:?} needs a {d}x{d} operator, got {:?}", op.dim())));
        }
        factors[pos] = Some(op);
    }
    // Runs of identity factors collapse into one identity block.
    let mut out: Option<Matrix<T>> = None;
    let mut pending_identity = 1usize;
    for (pos, f) in factors.iter().enumerate() {
        match f {
            None => pending_identity *= layout.site_dim(sites[pos]),
            Some(m) => {
                let block = if pending_identity > 1 {
                    let id = identity::<T>(pending_identity);
                    pending_identity = 1;
                    Some(id)
                } else {
                    None
                };
                let left = match (out.take(), block) {
                    (None, None) => None,
                    (None, Some(id)) => Some(id),
                    (Some(o), None) => Some(o),
                    (Some(o), Some(id)) => Some(kron(&o, &id)),
                };
                out = Some(match left {
                    None => (*m).clone(),
                    Some(l) => kron(&l, m),
                });
            }
        }
    }
    let mat = match out {
        None => identity(layout.total_dim()),
        Some(o) if pending_identity > 1 => kron(&o, &identity(pending_identity)),
        Some(o) => o,
    };
    Operator::new(layout, mat)
}

/// `|to⟩⟨from|` on defect `site`, identity elsewhere.
pub fn defect_transition_op<T: Real>(layout: HilbertLayout, site: usize, from: Level, to: Level) -> Result<Operator<T>> {
    let m = level_op::<T>(from, to);
    kron_embed(layout, &[(Site::Defect(site), &m)])
}

/// `|x⟩⟨x|` on defect `site`.
pub fn defect_projector<T: Real>(layout: HilbertLayout, site: usize, level: Level) -> Result<Operator<T>> {
    defect_transition_op(layout, site, level, level)
}

/// Phonon lowering operator `b` on the full space.
pub fn phonon_lowering<T: Real>(layout: HilbertLayout) -> Result<Operator<T>> {
    let b = annihilation_op::<T>(layout.phonon_levels())?;
    kron_embed(layout, &[(Site::Phonon, &b)])
}

/// Phonon number operator `b†b` on the full space.
pub fn phonon_number<T: Real>(layout: HilbertLayout) -> Result<Operator<T>> {
    let b = phonon_lowering::<T>(layout)?;
    Ok(b.dagger().matmul(&b))
}

/// `b ⊗ |to⟩⟨from|_site`.
pub fn sideband_op<T: Real>(layout: HilbertLayout, site: usize, from: Level, to: Level) -> Result<Operator<T>> {
    let b = annihilation_op::<T>(layout.phonon_levels())?;
    let m = level_op::<T>(from, to);
    kron_embed(layout, &[(Site::Phonon, &b), (Site::Defect(site), &m)])
}

/// Projector onto phonon Fock level `n`.
pub fn phonon_projector<T: Real>(layout: HilbertLayout, n: usize) -> Result<Operator<T>> {
    if n >= layout.phonon_levels() {
        return Err(Error::invalid(format!("phonon level {n} beyond truncation")));
    }
    let mut p = Array2::zeros((layout.phonon_levels(), layout.phonon_levels()));
    p[(n, n)] = Cx::one();
    kron_embed(layout, &[(Site::Phonon, &p)])
}
