//! Tensor-product bookkeeping and dense operator algebra for one truncated
//! phonon mode and N four-level defects.
//!
//! Site order is fixed everywhere: phonon first, then defects 0..N-1.

mod builders;
mod layout;
mod matrix;
mod sparse;

pub use builders::{
    annihilation_op, defect_projector, defect_transition_op, kron_embed, level_op, phonon_lowering,
    phonon_number, phonon_projector, sideband_op,
};
pub use layout::{BasisLabel, HilbertLayout, Level, Site, DEFECT_LEVELS};
pub use matrix::{
    commutator, dagger, frobenius_norm, hermiticity_error, identity, kron, max_abs, max_abs_diff,
    partial_trace, trace, DensityDiagnostics, DensityMatrix, Matrix, Operator, ReducedDensity,
    StateVector,
};
pub(crate) use matrix::re;
pub use sparse::CsrMatrix;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Cx;
    use ndarray::Array1;

    fn layout(n: usize) -> HilbertLayout {
        HilbertLayout::new(6, n).unwrap()
    }

    #[test]
    fn lowering_action_and_number_diagonal() {
        let b = annihilation_op::<f64>(6).unwrap();
        let one = Array1::from_shape_fn(6, |i| if i == 1 { Cx::new(1.0, 0.0) } else { Cx::new(0.0, 0.0) });
        let out = b.dot(&one);
        assert!((out[0] - Cx::new(1.0, 0.0)).norm() < 1e-15);
        let n = dagger(&b).dot(&b);
        for k in 0..6 {
            assert!((n[(k, k)].re - k as f64).abs() < 1e-12);
        }
        assert!(annihilation_op::<f64>(1).is_err());
    }

    #[test]
    fn truncated_commutator_diagonal() {
        let b = annihilation_op::<f64>(6).unwrap();
        let c = b.dot(&dagger(&b)) - dagger(&b).dot(&b);
        let want = [1.0, 1.0, 1.0, 1.0, 1.0, -5.0];
        for k in 0..6 {
            assert!((c[(k, k)].re - want[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn transition_adjoint_and_completeness() {
        let l = layout(2);
        let up = defect_transition_op::<f64>(l, 1, Level::G1, Level::E).unwrap();
        let down = defect_transition_op::<f64>(l, 1, Level::E, Level::G1).unwrap();
        assert!(max_abs_diff(up.dagger().matrix(), down.matrix()) < 1e-15);
        let mut sum = Operator::<f64>::zeros(l);
        for lv in Level::ALL {
            sum = sum.plus(&defect_projector(l, 0, lv).unwrap());
        }
        assert!(max_abs_diff(sum.matrix(), Operator::identity(l).matrix()) < 1e-15);
        assert!(defect_transition_op::<f64>(l, 2, Level::G1, Level::E).is_err());
    }

    #[test]
    fn different_sites_commute() {
        let l = layout(2);
        let a = defect_transition_op::<f64>(l, 0, Level::G1, Level::E).unwrap();
        let b = sideband_op::<f64>(l, 1, Level::G2, Level::E).unwrap();
        let bb = defect_transition_op::<f64>(l, 1, Level::G2, Level::E).unwrap();
        assert!(max_abs(a.commutator(&bb).matrix()) < 1e-15);
        // The sideband operator shares the phonon with nobody else here.
        assert!(max_abs(a.commutator(&b).matrix()) < 1e-15);
    }

    #[test]
    fn embed_shapes_and_homomorphism() {
        let l = layout(1);
        let e = kron_embed::<f64>(l, &[]).unwrap();
        assert!(max_abs_diff(e.matrix(), &identity(24)) < 1e-15);
        let b = annihilation_op::<f64>(6).unwrap();
        let eb = kron_embed(l, &[(Site::Phonon, &b)]).unwrap();
        assert_eq!(eb.dim(), 24);
        let bd = dagger(&b);
        let lhs = eb.matmul(&kron_embed(l, &[(Site::Phonon, &bd)]).unwrap());
        let rhs = kron_embed(l, &[(Site::Phonon, &b.dot(&bd))]).unwrap();
        assert!(max_abs_diff(lhs.matrix(), rhs.matrix()) < 1e-15);
        let g = level_op::<f64>(Level::G1, Level::G2);
        assert!(kron_embed(l, &[(Site::Defect(0), &g), (Site::Defect(0), &g)]).is_err());
        assert!(kron_embed(l, &[(Site::Defect(0), &b)]).is_err());
    }

    #[test]
    fn embed_middle_site_matches_explicit_kron() {
        let l = HilbertLayout::new(3, 3).unwrap();
        let g = level_op::<f64>(Level::G2, Level::E);
        let got = kron_embed(l, &[(Site::Defect(1), &g)]).unwrap();
        let want = kron(&kron(&identity(12), &g), &identity(4));
        assert!(max_abs_diff(got.matrix(), &want) < 1e-15);
    }

    #[test]
    fn partial_trace_examples() {
        let l = layout(1);
        let rho = DensityMatrix::<f64>::basis(l, &BasisLabel::new(1, &[Level::G1])).unwrap();
        let red = partial_trace(&rho, &[Site::Phonon]).unwrap();
        assert_eq!(red.dims, vec![6]);
        assert!((red.data[(1, 1)].re - 1.0).abs() < 1e-15);
        assert!((red.trace() - rho.trace()).norm() < 1e-15);

        let l2 = HilbertLayout::new(2, 2).unwrap();
        let bell = StateVector::superposition(
            l2,
            &[
                (BasisLabel::new(0, &[Level::G1, Level::G1]), Cx::new(1.0, 0.0)),
                (BasisLabel::new(0, &[Level::G2, Level::G2]), Cx::new(1.0, 0.0)),
                (BasisLabel::new(0, &[Level::G3, Level::G3]), Cx::new(1.0, 0.0)),
                (BasisLabel::new(0, &[Level::E, Level::E]), Cx::new(1.0, 0.0)),
            ],
        )
        .unwrap();
        let red = partial_trace(&bell.to_density(), &[Site::Defect(1)]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 0.25 } else { 0.0 };
                assert!((red.data[(i, j)] - Cx::new(want, 0.0)).norm() < 1e-15);
            }
        }
        assert!(partial_trace(&bell.to_density(), &[]).is_err());
        assert!(partial_trace(&bell.to_density(), &[Site::Defect(2)]).is_err());
    }

    #[test]
    fn density_validation() {
        let l = layout(1);
        let mm = DensityMatrix::<f64>::maximally_mixed(l);
        assert!(DensityMatrix::new(l, mm.matrix().clone()).is_ok());
        let bad = mm.matrix().mapv(|v| v * 2.0);
        assert!(DensityMatrix::new(l, bad).is_err());
        assert!((mm.min_eigenvalue() - 1.0 / 24.0).abs() < 1e-12);
    }
}
