use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::algebra::{CsrMatrix, HilbertLayout, Operator};
use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

/// Scalar time profile of a drive term.
pub type Coefficient<T> = Arc<dyn Fn(T) -> Cx<T> + Send + Sync>;

#[derive(Clone)]
struct Term<T: Real> {
    op: CsrMatrix<T>,
    coeff: Coefficient<T>,
    conjugate: bool,
}

/// `H(t) = H_0 + Σ_k (c_k(t) A_k + c_k(t)* A_k†)`.
///
/// Each drive is stored together with its adjoint, so `H(t)` is Hermitian
/// for every `t` provided `H_0` is.
#[derive(Clone)]
pub struct TimeDependentHamiltonian<T: Real> {
    layout: HilbertLayout,
    static_dense: Operator<T>,
    static_part: CsrMatrix<T>,
    terms: Vec<Term<T>>,
}

impl<T: Real> fmt::Debug for TimeDependentHamiltonian<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeDependentHamiltonian")
            .field("dim", &self.layout.total_dim())
            .field("static_nnz", &self.static_part.nnz())
            .field("drive_terms", &(self.terms.len() / 2))
            .finish()
    }
}

impl<T: Real> TimeDependentHamiltonian<T> {
    /// Rejects a static part that is not Hermitian to `1e-12·(1 + ‖H_0‖)`.
    pub fn new(static_part: Operator<T>) -> Result<Self> {
        let scale = T::one() + crate::algebra::max_abs(static_part.matrix());
        let herr = static_part.hermiticity_error();
        if herr > T::tol(1e-12) * scale {
            return Err(Error::NonHermitian(herr.to_f64_lossy()));
        }
        Ok(Self {
            layout: static_part.layout(),
            static_part: CsrMatrix::from_dense(static_part.matrix(), T::zero()),
            static_dense: static_part,
            terms: Vec::new(),
        })
    }

    pub fn constant(h: Operator<T>) -> Result<Self> {
        Self::new(h)
    }

    /// Adds `c(t) A + c(t)* A†`.
    pub fn add_drive(&mut self, op: &Operator<T>, coeff: Coefficient<T>) -> Result<()> {
        if op.layout() != self.layout {
            return Err(Error::dim("drive operator layout differs from static part"));
        }
        let a = CsrMatrix::from_dense(op.matrix(), T::zero());
        let ad = a.adjoint();
        self.terms.push(Term { op: a, coeff: coeff.clone(), conjugate: false });
        self.terms.push(Term { op: ad, coeff, conjugate: true });
        Ok(())
    }

    pub fn with_drive(mut self, op: &Operator<T>, coeff: Coefficient<T>) -> Result<Self> {
        self.add_drive(op, coeff)?;
        Ok(self)
    }

    pub fn layout(&self) -> HilbertLayout {
        self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    pub fn drive_count(&self) -> usize {
        self.terms.len() / 2
    }

    /// Coefficients of all stored terms at `t`, adjoints included.
    pub(crate) fn coefficients(&self, t: T) -> Vec<Cx<T>> {
        self.terms
            .iter()
            .map(|term| {
                let c = (term.coeff)(t);
                if term.conjugate {
                    c.conj()
                } else {
                    c
                }
            })
            .collect()
    }

    /// `out += alpha · H(t) · X` for a row-major `X` with `k` columns,
    /// using coefficients from [`Self::coefficients`].
    pub(crate) fn mul_add(&self, coeffs: &[Cx<T>], alpha: Cx<T>, x: &[Cx<T>], k: usize, out: &mut [Cx<T>]) {
        self.static_part.mul_add(alpha, x, k, out);
        for (term, &c) in self.terms.iter().zip(coeffs) {
            if !c.is_zero() {
                term.op.mul_add(alpha * c, x, k, out);
            }
        }
    }

    /// Dense `H(t)`.
    pub fn at(&self, t: T) -> Operator<T> {
        let mut h = self.static_dense.clone();
        for (term, c) in self.terms.iter().zip(self.coefficients(t)) {
            let dense = term.op.to_dense();
            let m = Operator::new(self.layout, dense).expect("layout checked at insertion");
            h.add_scaled(c, &m);
        }
        h
    }

    /// Hermiticity error of `H(t)`.
    pub fn hermiticity_error(&self, t: T) -> T {
        self.at(t).hermiticity_error()
    }
}
