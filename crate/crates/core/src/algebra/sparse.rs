use ndarray::Array2;
use num_traits::Zero;

use crate::scalar::{Cx, Real};

/// Compressed-row complex matrix used inside the integrator hot loop.
///
/// The models are built densely; this is only a faster multiply for
/// operators with a handful of entries per row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T: Real> {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Cx<T>>,
}

impl<T: Real> CsrMatrix<T> {
    /// Drops entries with modulus at or below `drop_tol`.
    pub fn from_dense(m: &Array2<Cx<T>>, drop_tol: T) -> Self {
        let (rows, cols) = m.dim();
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for i in 0..rows {
            for j in 0..cols {
                let v = m[(i, j)];
                if v.norm() > drop_tol {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self { rows, cols, indptr, indices, values }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, indptr: vec![0; rows + 1], indices: Vec::new(), values: Vec::new() }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn to_dense(&self) -> Array2<Cx<T>> {
        let mut m = Array2::zeros((self.rows, self.cols));
        for i in 0..self.rows {
            for p in self.indptr[i]..self.indptr[i + 1] {
                m[(i, self.indices[p])] += self.values[p];
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut dense = Array2::<Cx<T>>::zeros((self.cols, self.rows));
        for i in 0..self.rows {
            for p in self.indptr[i]..self.indptr[i + 1] {
                dense[(self.indices[p], i)] = self.values[p].conj();
            }
        }
        Self::from_dense(&dense, T::zero())
    }

    /// `out += alpha · A · X` for a row-major `X` with `k` columns.
    pub fn mul_add(&self, alpha: Cx<T>, x: &[Cx<T>], k: usize, out: &mut [Cx<T>]) {
        debug_assert_eq!(x.len(), self.cols * k);
        debug_assert_eq!(out.len(), self.rows * k);
        if alpha.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let orow = &mut out[i * k..(i + 1) * k];
            for p in self.indptr[i]..self.indptr[i + 1] {
                let a = alpha * self.values[p];
                let j = self.indices[p];
                let xrow = &x[j * k..(j + 1) * k];
                for (o, &xv) in orow.iter_mut().zip(xrow) {
                    *o += a * xv;
                }
            }
        }
    }

    /// `out = A · X` for a row-major `X` with `k` columns.
    pub fn mul_into(&self, x: &[Cx<T>], k: usize, out: &mut [Cx<T>]) {
        out.iter_mut().for_each(|o| *o = Cx::zero());
        self.mul_add(Cx::new(T::one(), T::zero()), x, k, out);
    }

    /// Stored entries as `(row, col, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Cx<T>)> + '_ {
        (0..self.rows).flat_map(move |i| (self.indptr[i]..self.indptr[i + 1]).map(move |p| (i, self.indices[p], self.values[p])))
    }

    /// Sum `Σ c_k A_k` of same-shape matrices, rebuilt as one CSR.
    pub fn linear_combination(terms: &[(Cx<T>, &CsrMatrix<T>)], rows: usize, cols: usize) -> Self {
        let mut dense = Array2::<Cx<T>>::zeros((rows, cols));
        for (c, m) in terms {
            for i in 0..m.rows {
                for p in m.indptr[i]..m.indptr[i + 1] {
                    dense[(i, m.indices[p])] += *c * m.values[p];
                }
            }
        }
        Self::from_dense(&dense, T::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> Cx<f64> {
        Cx::new(re, im)
    }

    #[test]
    fn multiply_matches_dense() {
        let a = array![[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 2.0)], [c(0.0, 0.0), c(3.0, -1.0), c(0.0, 0.0)]];
        let x = array![[c(1.0, 1.0), c(2.0, 0.0)], [c(0.0, 1.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, -1.0)]];
        let s = CsrMatrix::from_dense(&a, 0.0);
        assert_eq!(s.nnz(), 3);
        let mut out = vec![c(0.0, 0.0); 4];
        s.mul_into(x.as_slice().unwrap(), 2, &mut out);
        let want = a.dot(&x);
        for (o, w) in out.iter().zip(want.iter()) {
            assert!((o - w).norm() < 1e-14);
        }
        let adj = s.adjoint().to_dense();
        assert_eq!(adj, a.t().mapv(|v| v.conj()));
    }
}
