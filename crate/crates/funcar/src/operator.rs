//! Vectors and bounded operators on the truncated Hilbert space.
//!
//! Everything is stored in coordinates with respect to the orthonormal
//! basis of [`BasisSpec`], so the space norm is the Euclidean coordinate
//! norm and Schatten norms are singular-value norms of the coordinate
//! matrix.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SVD};

use crate::basis::BasisSpec;
use crate::error::{Error, Result};

/// Symmetry tolerance enforced when constructing self-adjoint operators.
pub const SELF_ADJOINT_TOL: f64 = 1e-12;

/// Default relative singular-value cutoff for [`HilbertOperator::pseudo_inverse`].
pub const DEFAULT_PINV_TOL: f64 = 1e-10;

const SVD_MAX_ITER: usize = 10_000;

pub(crate) fn ensure_same_basis(a: &Arc<BasisSpec>, b: &Arc<BasisSpec>) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::BasisMismatch(format!(
            "{} vs {}",
            a.summary(),
            b.summary()
        )))
    }
}

fn ensure_finite(data: impl Iterator<Item = f64>, what: &str) -> Result<()> {
    for (i, x) in data.enumerate() {
        if !x.is_finite() {
            return Err(Error::InvalidInput(format!(
                "{what} has non-finite entry {x} at position {i}"
            )));
        }
    }
    Ok(())
}

/// Element of the truncated space, in coordinates w.r.t. the orthonormal basis.
#[derive(Clone, Debug)]
pub struct HilbertVector {
    coords: DVector<f64>,
    basis: Arc<BasisSpec>,
}

impl HilbertVector {
    pub fn new(basis: Arc<BasisSpec>, coords: DVector<f64>) -> Result<Self> {
        if coords.len() != basis.dimension() {
            return Err(Error::InvalidInput(format!(
                "coordinate length {} does not match basis dimension {}",
                coords.len(),
                basis.dimension()
            )));
        }
        ensure_finite(coords.iter().copied(), "vector")?;
        Ok(HilbertVector { coords, basis })
    }

    pub fn from_slice(basis: Arc<BasisSpec>, coords: &[f64]) -> Result<Self> {
        Self::new(basis, DVector::from_column_slice(coords))
    }

    pub fn zero(basis: Arc<BasisSpec>) -> Self {
        let n = basis.dimension();
        HilbertVector {
            coords: DVector::zeros(n),
            basis,
        }
    }

    /// k-th coordinate basis vector e_k (1-based).
    pub fn basis_vector(basis: Arc<BasisSpec>, k: usize) -> Result<Self> {
        if k == 0 || k > basis.dimension() {
            return Err(Error::InvalidInput(format!(
                "basis index {k} out of range 1..={}",
                basis.dimension()
            )));
        }
        let mut coords = DVector::zeros(basis.dimension());
        coords[k - 1] = 1.0;
        Ok(HilbertVector { coords, basis })
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn basis(&self) -> &Arc<BasisSpec> {
        &self.basis
    }

    /// Hilbert norm; equals the Euclidean coordinate norm.
    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    pub fn inner(&self, other: &HilbertVector) -> Result<f64> {
        ensure_same_basis(&self.basis, &other.basis)?;
        Ok(self.coords.dot(&other.coords))
    }

    /// Pointwise value Σ_k c_k ψ_k(u).
    pub fn eval(&self, u: f64) -> f64 {
        self.basis
            .eval_all(u)
            .iter()
            .zip(self.coords.iter())
            .map(|(psi, c)| psi * c)
            .sum()
    }
}

/// Bounded operator in basis coordinates.
#[derive(Clone, Debug)]
pub struct HilbertOperator {
    coords: DMatrix<f64>,
    basis: Arc<BasisSpec>,
    self_adjoint: bool,
}

impl HilbertOperator {
    /// General operator from its coordinate matrix.
    pub fn from_matrix(basis: Arc<BasisSpec>, coords: DMatrix<f64>) -> Result<Self> {
        let j = basis.dimension();
        if coords.nrows() != j || coords.ncols() != j {
            return Err(Error::InvalidInput(format!(
                "operator matrix is {}x{}, basis dimension is {j}",
                coords.nrows(),
                coords.ncols()
            )));
        }
        ensure_finite(coords.iter().copied(), "operator")?;
        Ok(HilbertOperator {
            coords,
            basis,
            self_adjoint: false,
        })
    }

    /// Self-adjoint operator; the matrix must equal its transpose to within
    /// [`SELF_ADJOINT_TOL`] and is stored exactly symmetrized.
    pub fn self_adjoint_from_matrix(basis: Arc<BasisSpec>, coords: DMatrix<f64>) -> Result<Self> {
        let mut op = Self::from_matrix(basis, coords)?;
        let asym = (&op.coords - op.coords.transpose()).amax();
        if asym > SELF_ADJOINT_TOL {
            return Err(Error::InvalidInput(format!(
                "matrix is not symmetric: max |A - A^T| = {asym:.3e} > {SELF_ADJOINT_TOL:.0e}"
            )));
        }
        op.coords = (&op.coords + op.coords.transpose()) * 0.5;
        op.self_adjoint = true;
        Ok(op)
    }

    pub fn zero(basis: Arc<BasisSpec>) -> Self {
        let j = basis.dimension();
        HilbertOperator {
            coords: DMatrix::zeros(j, j),
            basis,
            self_adjoint: true,
        }
    }

    pub fn identity(basis: Arc<BasisSpec>) -> Self {
        let j = basis.dimension();
        HilbertOperator {
            coords: DMatrix::identity(j, j),
            basis,
            self_adjoint: true,
        }
    }

    pub fn diagonal(basis: Arc<BasisSpec>, values: &[f64]) -> Result<Self> {
        if values.len() != basis.dimension() {
            return Err(Error::InvalidInput(format!(
                "diagonal length {} does not match basis dimension {}",
                values.len(),
                basis.dimension()
            )));
        }
        ensure_finite(values.iter().copied(), "diagonal")?;
        Ok(HilbertOperator {
            coords: DMatrix::from_diagonal(&DVector::from_column_slice(values)),
            basis: basis.clone(),
            self_adjoint: true,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.coords
    }

    pub fn basis(&self) -> &Arc<BasisSpec> {
        &self.basis
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.self_adjoint
    }

    /// Composition self ∘ other (apply `other` first).
    pub fn compose(&self, other: &HilbertOperator) -> Result<HilbertOperator> {
        ensure_same_basis(&self.basis, &other.basis)?;
        Ok(HilbertOperator {
            coords: &self.coords * &other.coords,
            basis: self.basis.clone(),
            self_adjoint: false,
        })
    }

    pub fn adjoint(&self) -> HilbertOperator {
        HilbertOperator {
            coords: self.coords.transpose(),
            basis: self.basis.clone(),
            self_adjoint: self.self_adjoint,
        }
    }

    pub fn apply(&self, f: &HilbertVector) -> Result<HilbertVector> {
        ensure_same_basis(&self.basis, &f.basis)?;
        Ok(HilbertVector {
            coords: &self.coords * &f.coords,
            basis: self.basis.clone(),
        })
    }

    pub fn add(&self, other: &HilbertOperator) -> Result<HilbertOperator> {
        ensure_same_basis(&self.basis, &other.basis)?;
        Ok(HilbertOperator {
            coords: &self.coords + &other.coords,
            basis: self.basis.clone(),
            self_adjoint: self.self_adjoint && other.self_adjoint,
        })
    }

    pub fn sub(&self, other: &HilbertOperator) -> Result<HilbertOperator> {
        ensure_same_basis(&self.basis, &other.basis)?;
        Ok(HilbertOperator {
            coords: &self.coords - &other.coords,
            basis: self.basis.clone(),
            self_adjoint: self.self_adjoint && other.self_adjoint,
        })
    }

    pub fn scale(&self, factor: f64) -> HilbertOperator {
        HilbertOperator {
            coords: &self.coords * factor,
            basis: self.basis.clone(),
            self_adjoint: self.self_adjoint,
        }
    }

    fn svd(&self, compute_uv: bool) -> Result<SVD<f64, nalgebra::Dyn, nalgebra::Dyn>> {
        SVD::try_new_unordered(
            self.coords.clone(),
            compute_uv,
            compute_uv,
            f64::EPSILON,
            SVD_MAX_ITER,
        )
        .ok_or_else(|| Error::Numerical("singular value decomposition did not converge".into()))
    }

    /// Singular values of the coordinate matrix (unordered).
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        Ok(self.svd(false)?.singular_values.iter().copied().collect())
    }

    /// p-Schatten norm, p ∈ [1, ∞]: (Σ σ_j^p)^{1/p}, or max σ_j for p = ∞.
    ///
    /// p = 2 is evaluated as the Frobenius norm of the coordinate matrix,
    /// which agrees with the singular-value route to machine precision.
    pub fn schatten_norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidInput(format!(
                "Schatten index must satisfy p >= 1, got {p}"
            )));
        }
        if p == 2.0 {
            return Ok(self.coords.norm());
        }
        let sv = self.singular_values()?;
        if p == f64::INFINITY {
            Ok(sv.iter().fold(0.0, |a, &s| a.max(s)))
        } else {
            Ok(sv.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p))
        }
    }

    /// Operator norm, i.e. the ∞-Schatten norm.
    pub fn operator_norm(&self) -> Result<f64> {
        self.schatten_norm(f64::INFINITY)
    }

    /// Hilbert-Schmidt norm, i.e. the 2-Schatten norm.
    pub fn hs_norm(&self) -> f64 {
        self.coords.norm()
    }

    /// Moore-Penrose inverse: singular values above `tol`·σ_max are
    /// inverted, the rest are zeroed.
    pub fn pseudo_inverse(&self, tol: f64) -> Result<HilbertOperator> {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "pseudo-inverse cutoff must be positive, got {tol}"
            )));
        }
        let svd = self.svd(true)?;
        let u = svd.u.as_ref().expect("u requested");
        let v_t = svd.v_t.as_ref().expect("v_t requested");
        let smax = svd.singular_values.iter().fold(0.0f64, |a, &s| a.max(s));
        let cutoff = tol * smax;
        let sinv = DVector::from_iterator(
            svd.singular_values.len(),
            svd.singular_values
                .iter()
                .map(|&s| if s > cutoff { 1.0 / s } else { 0.0 }),
        );
        let mut pinv = v_t.transpose() * DMatrix::from_diagonal(&sinv) * u.transpose();
        let self_adjoint = self.self_adjoint;
        if self_adjoint {
            pinv = (&pinv + pinv.transpose()) * 0.5;
        }
        Ok(HilbertOperator {
            coords: pinv,
            basis: self.basis.clone(),
            self_adjoint,
        })
    }

    /// Largest eigenvalue modulus of the coordinate matrix.
    pub fn spectral_radius(&self) -> f64 {
        self.coords
            .complex_eigenvalues()
            .iter()
            .fold(0.0, |a, z| a.max(z.norm()))
    }
}

/// Tensor product u ⊗ v: the rank-one operator f ↦ u ⟨f, v⟩.
pub fn tensor_product(u: &HilbertVector, v: &HilbertVector) -> Result<HilbertOperator> {
    ensure_same_basis(&u.basis, &v.basis)?;
    Ok(HilbertOperator {
        coords: &u.coords * v.coords.transpose(),
        basis: u.basis.clone(),
        self_adjoint: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn basis(j: usize) -> Arc<BasisSpec> {
        Arc::new(BasisSpec::fourier_circle(j, 0.0).unwrap())
    }

    fn op(j: usize, data: &[f64]) -> HilbertOperator {
        HilbertOperator::from_matrix(basis(j), DMatrix::from_row_slice(j, j, data)).unwrap()
    }

    #[test]
    fn tensor_of_basis_vectors() {
        let b = basis(3);
        let e1 = HilbertVector::basis_vector(b.clone(), 1).unwrap();
        let t = tensor_product(&e1, &e1).unwrap();
        let mut expected = DMatrix::zeros(3, 3);
        expected[(0, 0)] = 1.0;
        assert_eq!(t.matrix(), &expected);
    }

    #[test]
    fn tensor_with_zero_vector_is_zero() {
        let b = basis(3);
        let z = HilbertVector::zero(b.clone());
        let v = HilbertVector::from_slice(b, &[1.0, 2.0, 3.0]).unwrap();
        let t = tensor_product(&z, &v).unwrap();
        assert_eq!(t.hs_norm(), 0.0);
    }

    #[test]
    fn tensor_hand_outer_product() {
        let b = basis(2);
        let u = HilbertVector::from_slice(b.clone(), &[1.0, 2.0]).unwrap();
        let v = HilbertVector::from_slice(b, &[3.0, 4.0]).unwrap();
        let t = tensor_product(&u, &v).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[3.0, 4.0, 6.0, 8.0]);
        assert_eq!(t.matrix(), &expected);
    }

    #[test]
    fn tensor_rejects_basis_mismatch() {
        let u = HilbertVector::zero(basis(2));
        let v = HilbertVector::zero(basis(3));
        assert!(matches!(
            tensor_product(&u, &v),
            Err(Error::BasisMismatch(_))
        ));
    }

    #[test]
    fn schatten_norm_of_diagonal() {
        let t = HilbertOperator::diagonal(basis(3), &[3.0, 4.0, 0.0]).unwrap();
        assert_abs_diff_eq!(t.schatten_norm(2.0).unwrap(), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_norm_of_identity() {
        let t = HilbertOperator::identity(basis(5));
        assert_abs_diff_eq!(t.schatten_norm(1.0).unwrap(), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn schatten_norm_rejects_p_below_one() {
        let t = HilbertOperator::identity(basis(2));
        assert!(t.schatten_norm(0.5).is_err());
    }

    #[test]
    fn schatten_norm_agrees_with_gram_eigenvalue_oracle() {
        // Independent route: singular values as square roots of the
        // eigenvalues of TᵀT.
        let t = op(
            4,
            &[
                0.3, -1.2, 0.7, 0.1, //
                2.0, 0.4, -0.5, 0.9, //
                -0.8, 0.6, 1.1, -0.2, //
                0.05, -0.3, 0.8, 1.4,
            ],
        );
        let gram = t.matrix().transpose() * t.matrix();
        let eig = nalgebra::SymmetricEigen::new(gram);
        let mut sv: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for p in [1.0, 1.7, 2.0, 3.0] {
            let expected = sv.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p);
            assert_abs_diff_eq!(t.schatten_norm(p).unwrap(), expected, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(
            t.schatten_norm(f64::INFINITY).unwrap(),
            sv[0],
            epsilon = 1e-10
        );
    }

    #[test]
    fn frobenius_shortcut_matches_svd_route() {
        let t = op(3, &[1.0, 2.0, 0.5, -0.3, 0.9, 1.7, 0.0, -1.1, 0.4]);
        let via_svd = t
            .singular_values()
            .unwrap()
            .iter()
            .map(|s| s * s)
            .sum::<f64>()
            .sqrt();
        assert_abs_diff_eq!(t.schatten_norm(2.0).unwrap(), via_svd, epsilon = 1e-10);
    }

    #[test]
    fn pseudo_inverse_of_diagonal() {
        let t = HilbertOperator::diagonal(basis(2), &[2.0, 0.0]).unwrap();
        let p = t.pseudo_inverse(DEFAULT_PINV_TOL).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.0]);
        assert_abs_diff_eq!((p.matrix() - expected).amax(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn pseudo_inverse_of_invertible_matches_dense_solve() {
        let t = op(3, &[2.0, 1.0, 0.0, 0.5, 3.0, -1.0, 0.2, 0.1, 1.5]);
        let p = t.pseudo_inverse(DEFAULT_PINV_TOL).unwrap();
        let inv = t
            .matrix()
            .clone()
            .lu()
            .solve(&DMatrix::identity(3, 3))
            .unwrap();
        assert!((p.matrix() - inv).amax() < 1e-10);
    }

    #[test]
    fn pseudo_inverse_of_zero_is_zero() {
        let t = HilbertOperator::zero(basis(4));
        let p = t.pseudo_inverse(DEFAULT_PINV_TOL).unwrap();
        assert_eq!(p.hs_norm(), 0.0);
    }

    #[test]
    fn compose_with_identity() {
        let a = op(2, &[1.0, 2.0, 3.0, 4.0]);
        let i = HilbertOperator::identity(basis(2));
        let c = i.compose(&a).unwrap();
        assert_eq!(c.matrix(), a.matrix());
    }

    #[test]
    fn adjoint_is_involution() {
        let a = op(2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(a.adjoint().adjoint().matrix(), a.matrix());
    }

    #[test]
    fn apply_tensor_product_matches_definition() {
        let b = basis(3);
        let u = HilbertVector::from_slice(b.clone(), &[1.0, -1.0, 2.0]).unwrap();
        let v = HilbertVector::from_slice(b.clone(), &[0.5, 0.0, 1.0]).unwrap();
        let f = HilbertVector::from_slice(b, &[2.0, 3.0, -1.0]).unwrap();
        let t = tensor_product(&u, &v).unwrap();
        let got = t.apply(&f).unwrap();
        let scale = f.inner(&v).unwrap();
        for k in 0..3 {
            assert_abs_diff_eq!(got.coords()[k], u.coords()[k] * scale, epsilon = 1e-14);
        }
    }

    #[test]
    fn self_adjoint_construction_rejects_asymmetry() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(HilbertOperator::self_adjoint_from_matrix(basis(2), m).is_err());
    }

    #[test]
    fn nonfinite_entries_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, f64::NAN, 0.0, 1.0]);
        assert!(HilbertOperator::from_matrix(basis(2), m).is_err());
    }

    #[test]
    fn spectral_radius_of_nilpotent_is_zero() {
        let a = op(2, &[0.0, 2.0, 0.0, 0.0]);
        assert_abs_diff_eq!(a.spectral_radius(), 0.0, epsilon = 1e-12);
    }

    fn arb_matrix(j: usize) -> impl Strategy<Value = DMatrix<f64>> {
        proptest::collection::vec(-3.0f64..3.0, j * j)
            .prop_map(move |v| DMatrix::from_row_slice(j, j, &v))
    }

    proptest! {
        /// ‖T‖_q ≤ ‖T‖_p whenever p ≤ q.
        #[test]
        fn schatten_norms_decrease_in_p(m in arb_matrix(5)) {
            let t = HilbertOperator::from_matrix(basis(5), m).unwrap();
            let ps = [1.0, 1.5, 2.0, 3.0, f64::INFINITY];
            let norms: Vec<f64> = ps.iter().map(|&p| t.schatten_norm(p).unwrap()).collect();
            for w in norms.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9);
            }
        }

        /// ‖AB‖_p ≤ ‖A‖_∞ ‖B‖_p.
        #[test]
        fn schatten_norm_submultiplicative(a in arb_matrix(4), b in arb_matrix(4)) {
            let a = HilbertOperator::from_matrix(basis(4), a).unwrap();
            let b = HilbertOperator::from_matrix(basis(4), b).unwrap();
            let ab = a.compose(&b).unwrap();
            let a_inf = a.operator_norm().unwrap();
            for p in [1.0, 2.0, f64::INFINITY] {
                let lhs = ab.schatten_norm(p).unwrap();
                let rhs = a_inf * b.schatten_norm(p).unwrap();
                prop_assert!(lhs <= rhs * (1.0 + 1e-9) + 1e-12);
            }
        }

        /// Penrose identities T T† T = T and T† T T† = T†.
        #[test]
        fn penrose_identities(m in arb_matrix(4)) {
            let t = HilbertOperator::from_matrix(basis(4), m).unwrap();
            let p = t.pseudo_inverse(DEFAULT_PINV_TOL).unwrap();
            let tpt = t.compose(&p).unwrap().compose(&t).unwrap();
            let ptp = p.compose(&t).unwrap().compose(&p).unwrap();
            prop_assert!((tpt.matrix() - t.matrix()).amax() < 1e-8);
            prop_assert!((ptp.matrix() - p.matrix()).amax() < 1e-8);
        }

        /// ‖u ⊗ v‖_p = ‖u‖ ‖v‖ for every p: rank one means one singular value.
        #[test]
        fn tensor_norm_is_p_independent(
            u in proptest::collection::vec(-2.0f64..2.0, 4),
            v in proptest::collection::vec(-2.0f64..2.0, 4),
        ) {
            let b = basis(4);
            let u = HilbertVector::from_slice(b.clone(), &u).unwrap();
            let v = HilbertVector::from_slice(b, &v).unwrap();
            let t = tensor_product(&u, &v).unwrap();
            let expected = u.norm() * v.norm();
            for p in [1.0, 2.0, 3.0, f64::INFINITY] {
                prop_assert!((t.schatten_norm(p).unwrap() - expected).abs() < 1e-9);
            }
        }

        /// Schatten norms are adjoint-invariant.
        #[test]
        fn schatten_norm_adjoint_invariant(m in arb_matrix(4)) {
            let t = HilbertOperator::from_matrix(basis(4), m).unwrap();
            let ta = t.adjoint();
            for p in [1.0, 2.0, f64::INFINITY] {
                let d = (t.schatten_norm(p).unwrap() - ta.schatten_norm(p).unwrap()).abs();
                prop_assert!(d < 1e-9);
            }
        }
    }
}
