use ndarray::{Array1, Array2};
use num_traits::{One, Zero};

use super::layout::{BasisLabel, HilbertLayout, Site};
use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

/// Dense complex matrix.
pub type Matrix<T> = Array2<Cx<T>>;

#[inline]
pub(crate) fn re<T: Real>(x: T) -> Cx<T> {
    Cx::new(x, T::zero())
}

pub fn identity<T: Real>(n: usize) -> Matrix<T> {
    Array2::from_shape_fn((n, n), |(i, j)| if i == j { Cx::one() } else { Cx::zero() })
}

pub fn dagger<T: Real>(m: &Matrix<T>) -> Matrix<T> {
    m.t().mapv(|v| v.conj())
}

pub fn kron<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let v = a[(i, j)];
            if v.is_zero() {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = v * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn commutator<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    a.dot(b) - b.dot(a)
}

pub fn max_abs<T: Real>(m: &Matrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, v| acc.max(v.norm()))
}

pub fn max_abs_diff<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (x, y)| acc.max((*x - *y).norm()))
}

pub fn frobenius_norm<T: Real>(m: &Matrix<T>) -> T {
    m.iter().map(|v| v.norm_sqr()).sum::<T>().sqrt()
}

/// Largest entrywise deviation `max |M - M†|`.
pub fn hermiticity_error<T: Real>(m: &Matrix<T>) -> T {
    let n = m.nrows();
    let mut err = T::zero();
    for i in 0..n {
        for j in i..n {
            err = err.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    err
}

pub fn trace<T: Real>(m: &Matrix<T>) -> Cx<T> {
    m.diag().iter().copied().fold(Cx::zero(), |a, b| a + b)
}

/// Operator on the full phonon ⊗ defects space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator<T: Real> {
    layout: HilbertLayout,
    mat: Matrix<T>,
}

impl<T: Real> Operator<T> {
    pub fn new(layout: HilbertLayout, mat: Matrix<T>) -> Result<Self> {
        let d = layout.total_dim();
        if mat.dim() != (d, d) {
            return Err(Error::dim(format!("operator is {:?}, layout needs {d}x{d}", mat.dim())));
        }
        Ok(Self { layout, mat })
    }

    pub fn zeros(layout: HilbertLayout) -> Self {
        let d = layout.total_dim();
        Self { layout, mat: Array2::zeros((d, d)) }
    }

    pub fn identity(layout: HilbertLayout) -> Self {
        Self { layout, mat: identity(layout.total_dim()) }
    }

    #[inline]
    pub fn layout(&self) -> HilbertLayout {
        self.layout
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    #[inline]
    pub fn matrix(&self) -> &Matrix<T> {
        &self.mat
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.mat
    }

    pub fn dagger(&self) -> Self {
        Self { layout: self.layout, mat: dagger(&self.mat) }
    }

    pub fn matmul(&self, other: &Operator<T>) -> Self {
        Self { layout: self.layout, mat: self.mat.dot(&other.mat) }
    }

    pub fn scaled(&self, c: Cx<T>) -> Self {
        Self { layout: self.layout, mat: self.mat.mapv(|v| v * c) }
    }

    pub fn plus(&self, other: &Operator<T>) -> Self {
        Self { layout: self.layout, mat: &self.mat + &other.mat }
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, c: Cx<T>, other: &Operator<T>) {
        self.mat.scaled_add(c, &other.mat);
    }

    pub fn commutator(&self, other: &Operator<T>) -> Self {
        Self { layout: self.layout, mat: commutator(&self.mat, &other.mat) }
    }

    pub fn hermiticity_error(&self) -> T {
        hermiticity_error(&self.mat)
    }

    pub fn check_hermitian(&self, tol: T) -> Result<()> {
        let err = self.hermiticity_error();
        if err > tol {
            Err(Error::NonHermitian(err.to_f64_lossy()))
        } else {
            Ok(())
        }
    }

    /// `⟨row|A|col⟩` by basis label.
    pub fn element(&self, row: &BasisLabel, col: &BasisLabel) -> Result<Cx<T>> {
        Ok(self.mat[(self.layout.encode(row)?, self.layout.encode(col)?)])
    }

    pub fn apply(&self, psi: &StateVector<T>) -> Array1<Cx<T>> {
        self.mat.dot(psi.amplitudes())
    }

    pub fn norm(&self) -> T {
        frobenius_norm(&self.mat)
    }
}

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Real> {
    layout: HilbertLayout,
    data: Array1<Cx<T>>,
}

impl<T: Real> StateVector<T> {
    /// Wraps amplitudes that must already be normalized to 1 ± 1e-10.
    pub fn new(layout: HilbertLayout, data: Array1<Cx<T>>) -> Result<Self> {
        if data.len() != layout.total_dim() {
            return Err(Error::dim(format!("state has {} amplitudes, layout needs {}", data.len(), layout.total_dim())));
        }
        let n = data.iter().map(|v| v.norm_sqr()).sum::<T>().sqrt();
        if (n - T::one()).abs() > T::tol(1e-10) {
            return Err(Error::invalid(format!("state norm {n} differs from 1")));
        }
        Ok(Self { layout, data })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(layout: HilbertLayout, data: Array1<Cx<T>>) -> Result<Self> {
        let n = data.iter().map(|v| v.norm_sqr()).sum::<T>().sqrt();
        if n <= T::zero() || !n.is_finite() {
            return Err(Error::invalid("cannot normalize a zero or non-finite vector"));
        }
        Self::new(layout, data.mapv(|v| v / n))
    }

    /// Shape-checked wrapper for integrator output; the norm is not
    /// enforced.
    pub fn from_raw(layout: HilbertLayout, data: Array1<Cx<T>>) -> Self {
        assert_eq!(data.len(), layout.total_dim(), "state length must match layout");
        Self { layout, data }
    }

    pub fn basis(layout: HilbertLayout, label: &BasisLabel) -> Result<Self> {
        let mut data = Array1::zeros(layout.total_dim());
        data[layout.encode(label)?] = Cx::one();
        Ok(Self { layout, data })
    }

    /// Normalized superposition of labelled basis states.
    pub fn superposition(layout: HilbertLayout, terms: &[(BasisLabel, Cx<T>)]) -> Result<Self> {
        let mut data = Array1::zeros(layout.total_dim());
        for (label, amp) in terms {
            data[layout.encode(label)?] += *amp;
        }
        Self::normalized(layout, data)
    }

    #[inline]
    pub fn layout(&self) -> HilbertLayout {
        self.layout
    }

    #[inline]
    pub fn amplitudes(&self) -> &Array1<Cx<T>> {
        &self.data
    }

    pub fn amplitude(&self, label: &BasisLabel) -> Result<Cx<T>> {
        Ok(self.data[self.layout.encode(label)?])
    }

    pub fn norm(&self) -> T {
        self.data.iter().map(|v| v.norm_sqr()).sum::<T>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector<T>) -> Cx<T> {
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(Cx::zero(), |acc, (a, b)| acc + a.conj() * *b)
    }

    pub fn to_density(&self) -> DensityMatrix<T> {
        let d = self.data.len();
        let mat = Array2::from_shape_fn((d, d), |(i, j)| self.data[i] * self.data[j].conj());
        DensityMatrix { layout: self.layout, data: mat }
    }
}

/// Summary of how far a density matrix is from the physical set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityDiagnostics {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

/// Density matrix on the full space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Real> {
    layout: HilbertLayout,
    data: Matrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validated constructor: Hermitian, unit trace, positive semidefinite.
    pub fn new(layout: HilbertLayout, data: Matrix<T>) -> Result<Self> {
        let rho = Self::from_raw(layout, data)?;
        let diag = rho.diagnostics();
        if diag.hermiticity_error > T::tol(1e-10).to_f64_lossy() {
            return Err(Error::invalid(format!("density matrix not Hermitian ({:e})", diag.hermiticity_error)));
        }
        if diag.trace_error > T::tol(1e-9).to_f64_lossy() {
            return Err(Error::invalid(format!("density matrix trace off by {:e}", diag.trace_error)));
        }
        if diag.min_eigenvalue < -T::tol(1e-8).to_f64_lossy() {
            return Err(Error::invalid(format!("density matrix has eigenvalue {:e}", diag.min_eigenvalue)));
        }
        Ok(rho)
    }

    /// Shape-checked constructor without physical validation; used for
    /// integrator output, which is audited through [`Self::diagnostics`].
    pub fn from_raw(layout: HilbertLayout, data: Matrix<T>) -> Result<Self> {
        let d = layout.total_dim();
        if data.dim() != (d, d) {
            return Err(Error::dim(format!("density matrix is {:?}, layout needs {d}x{d}", data.dim())));
        }
        Ok(Self { layout, data })
    }

    pub fn pure(psi: &StateVector<T>) -> Self {
        psi.to_density()
    }

    pub fn basis(layout: HilbertLayout, label: &BasisLabel) -> Result<Self> {
        Ok(StateVector::basis(layout, label)?.to_density())
    }

    pub fn maximally_mixed(layout: HilbertLayout) -> Self {
        let d = layout.total_dim();
        let w = T::one() / T::from_usize(d).unwrap();
        Self { layout, data: identity::<T>(d).mapv(|v| v * w) }
    }

    #[inline]
    pub fn layout(&self) -> HilbertLayout {
        self.layout
    }

    #[inline]
    pub fn matrix(&self) -> &Matrix<T> {
        &self.data
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.data
    }

    pub fn trace(&self) -> Cx<T> {
        trace(&self.data)
    }

    /// Population of basis index `i`.
    #[inline]
    pub fn population(&self, i: usize) -> T {
        self.data[(i, i)].re
    }

    pub fn expectation(&self, op: &Operator<T>) -> Cx<T> {
        let m = op.matrix();
        let mut acc = Cx::zero();
        for i in 0..self.data.nrows() {
            for j in 0..self.data.ncols() {
                acc += m[(i, j)] * self.data[(j, i)];
            }
        }
        acc
    }

    pub fn min_eigenvalue(&self) -> T {
        let herm = (&self.data + &dagger(&self.data)).mapv(|v| v * T::lit(0.5));
        T::hermitian_eigenvalues(&herm).first().copied().unwrap_or_else(T::zero)
    }

    pub fn diagnostics(&self) -> DensityDiagnostics {
        DensityDiagnostics {
            trace_error: (self.trace() - Cx::one()).norm().to_f64_lossy(),
            hermiticity_error: hermiticity_error(&self.data).to_f64_lossy(),
            min_eigenvalue: self.min_eigenvalue().to_f64_lossy(),
        }
    }

    /// Copy rescaled to unit trace, for reporting only.
    pub fn renormalized(&self) -> Self {
        let t = self.trace().re;
        Self { layout: self.layout, data: self.data.mapv(|v| v / t) }
    }
}

/// Density matrix on a subset of sites, in storage order.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedDensity<T: Real> {
    pub sites: Vec<Site>,
    pub dims: Vec<usize>,
    pub data: Matrix<T>,
}

impl<T: Real> ReducedDensity<T> {
    pub fn trace(&self) -> Cx<T> {
        trace(&self.data)
    }
}

/// Traces out every site not listed in `keep`.
pub fn partial_trace<T: Real>(rho: &DensityMatrix<T>, keep: &[Site]) -> Result<ReducedDensity<T>> {
    let layout = rho.layout();
    if keep.is_empty() {
        return Err(Error::invalid("partial trace needs at least one kept site"));
    }
    let mut kept: Vec<Site> = keep.to_vec();
    for &s in &kept {
        layout.check_site(s)?;
    }
    kept.sort();
    if kept.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("duplicate site in partial trace"));
    }
    let dims = layout.site_dims();
    let strides = layout.strides();
    let keep_pos: Vec<usize> = kept.iter().map(|&s| layout.site_position(s)).collect();
    let trace_pos: Vec<usize> = (0..dims.len()).filter(|p| !keep_pos.contains(p)).collect();

    let offsets = |positions: &[usize]| -> Vec<usize> {
        let mut offs = vec![0usize];
        for &p in positions {
            let mut next = Vec::with_capacity(offs.len() * dims[p]);
            for &o in &offs {
                for k in 0..dims[p] {
                    next.push(o + k * strides[p]);
                }
            }
            offs = next;
        }
        offs
    };
    let keep_offs = offsets(&keep_pos);
    let trace_offs = offsets(&trace_pos);

    let dk = keep_offs.len();
    let full = rho.matrix();
    let mut out = Array2::zeros((dk, dk));
    for (a, &ka) in keep_offs.iter().enumerate() {
        for (b, &kb) in keep_offs.iter().enumerate() {
            let mut acc = Cx::zero();
            for &t in &trace_offs {
                acc += full[(ka + t, kb + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(ReducedDensity { sites: kept, dims: keep_pos.iter().map(|&p| dims[p]).collect(), data: out })
}
