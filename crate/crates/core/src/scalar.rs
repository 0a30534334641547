use std::fmt::{Debug, Display};
use std::iter::Sum;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Complex amplitude over the working real type.
pub type Cx<T> = Complex<T>;

/// Real scalar the simulator is generic over.
///
/// Implemented for `f32` and `f64`. The dense Hermitian eigensolver is the
/// only piece that needs a concrete backend, so it lives here as a trait
/// method rather than as a generic bound on every caller.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Machine epsilon-scale floor used for relative tolerance checks.
    const EPS: Self;

    /// Converts an `f64` literal, panicking only on non-representable input.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Absolute tolerance `nominal`, floored at a few thousand ulps so the
    /// same checks stay meaningful in single precision.
    #[inline]
    fn tol(nominal: f64) -> Self {
        Self::lit(nominal).max(Self::EPS * Self::lit(4096.0))
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    fn hermitian_eigenvalues(m: &Array2<Cx<Self>>) -> Vec<Self>;

    /// Eigenvalues (ascending) and column eigenvectors of a Hermitian matrix.
    fn hermitian_eigh(m: &Array2<Cx<Self>>) -> (Vec<Self>, Array2<Cx<Self>>);
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            const EPS: Self = <$t>::EPSILON;

            fn hermitian_eigenvalues(m: &Array2<Cx<Self>>) -> Vec<Self> {
                let dm = to_nalgebra(m);
                let mut ev: Vec<$t> = SymmetricEigen::new(dm).eigenvalues.iter().copied().collect();
                ev.sort_by(|a, b| a.total_cmp(b));
                ev
            }

            fn hermitian_eigh(m: &Array2<Cx<Self>>) -> (Vec<Self>, Array2<Cx<Self>>) {
                let n = m.nrows();
                let eig = SymmetricEigen::new(to_nalgebra(m));
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
                let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
                let vecs = Array2::from_shape_fn((n, n), |(i, j)| eig.eigenvectors[(i, order[j])]);
                (vals, vecs)
            }
        }
    };
}

fn to_nalgebra<T: Copy + nalgebra::Scalar>(m: &Array2<T>) -> DMatrix<T> {
    let (r, c) = m.dim();
    DMatrix::from_fn(r, c, |i, j| m[(i, j)])
}

impl_real!(f32);
impl_real!(f64);

/// Shorthand for `2π` in the working type.
#[inline]
pub fn two_pi<T: Real>() -> T {
    T::TAU()
}
