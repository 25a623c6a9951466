use nalgebra::DMatrix;
use num_complex::Complex;

use super::OperatorMatrix;
use crate::util::real;
use crate::{Error, Real, Result};

/// Hilbert–Schmidt orthonormal family of operators on a `d`-dimensional space.
///
/// The vectorised elements are also kept column-wise in a `d² × k` matrix so
/// projections and Gram matrices are single matrix products.
#[derive(Clone, Debug)]
pub struct OperatorBasis<R: Real> {
    dim: usize,
    elements: Vec<OperatorMatrix<R>>,
    stacked: DMatrix<Complex<R>>,
}

impl<R: Real> OperatorBasis<R> {
    pub fn empty(dim: usize) -> Self {
        OperatorBasis {
            dim,
            elements: Vec::new(),
            stacked: DMatrix::zeros(dim * dim, 0),
        }
    }

    /// Validates that `elements` are orthonormal (Gram residual below `tol`).
    pub fn from_orthonormal(dim: usize, elements: Vec<OperatorMatrix<R>>, tol: f64) -> Result<Self> {
        if let Some(bad) = elements.iter().find(|e| e.dim() != dim) {
            return Err(Error::Shape(format!(
                "basis element of dimension {} in a basis of dimension {dim}",
                bad.dim()
            )));
        }
        if elements.len() > dim * dim {
            return Err(Error::Shape(format!(
                "{} elements exceed d² = {}",
                elements.len(),
                dim * dim
            )));
        }
        let basis = Self::from_elements_unchecked(dim, elements);
        let residual = basis.gram_residual();
        if residual > real(tol) {
            return Err(Error::Validation(format!(
                "basis is not orthonormal (Gram residual {residual})"
            )));
        }
        Ok(basis)
    }

    pub(crate) fn from_elements_unchecked(dim: usize, elements: Vec<OperatorMatrix<R>>) -> Self {
        let mut stacked = DMatrix::zeros(dim * dim, elements.len());
        for (k, e) in elements.iter().enumerate() {
            stacked.set_column(k, &e.vectorize());
        }
        OperatorBasis {
            dim,
            elements,
            stacked,
        }
    }

    /// Columns of `stacked` must be orthonormal vectorised operators.
    pub(crate) fn from_stacked(dim: usize, stacked: DMatrix<Complex<R>>) -> Self {
        debug_assert_eq!(stacked.nrows(), dim * dim);
        let elements = stacked
            .column_iter()
            .map(|c| OperatorMatrix::from_square(DMatrix::from_column_slice(dim, dim, c.as_slice())))
            .collect();
        OperatorBasis {
            dim,
            elements,
            stacked,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[OperatorMatrix<R>] {
        &self.elements
    }

    pub fn iter(&self) -> std::slice::Iter<'_, OperatorMatrix<R>> {
        self.elements.iter()
    }

    /// `d² × k` matrix whose columns are the vectorised elements.
    pub fn stacked(&self) -> &DMatrix<Complex<R>> {
        &self.stacked
    }

    /// `‖G − 1‖_F` for the Gram matrix `G`.
    pub fn gram_residual(&self) -> R {
        let gram = self.stacked.adjoint() * &self.stacked;
        let k = gram.nrows();
        (gram - DMatrix::<Complex<R>>::identity(k, k))
            .iter()
            .fold(R::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    /// Coordinates `⟨f_γ, X⟩`.
    pub fn coordinates(&self, x: &OperatorMatrix<R>) -> nalgebra::DVector<Complex<R>> {
        self.stacked.adjoint() * x.vectorize()
    }

    /// Orthogonal projection `Σ_γ f_γ ⟨f_γ, X⟩`.
    pub fn project(&self, x: &OperatorMatrix<R>) -> OperatorMatrix<R> {
        let v = &self.stacked * self.coordinates(x);
        OperatorMatrix::from_square(DMatrix::from_column_slice(self.dim, self.dim, v.as_slice()))
    }

    /// `‖X − P(X)‖₂`, zero iff `X` lies in the span.
    pub fn residual(&self, x: &OperatorMatrix<R>) -> R {
        x.distance(&self.project(x))
    }

    /// Largest `‖f − P_other(f)‖₂` over this basis: zero iff span ⊆ span(other).
    pub fn containment_residual(&self, other: &OperatorBasis<R>) -> R {
        self.elements
            .iter()
            .map(|e| other.residual(e))
            .fold(R::zero(), |a, b| a.max(b))
    }

    /// Symmetric subspace residual: zero iff both spans coincide.
    pub fn span_distance(&self, other: &OperatorBasis<R>) -> R {
        if self.len() != other.len() {
            return R::one();
        }
        self.containment_residual(other)
            .max(other.containment_residual(self))
    }

    /// Superprojector matrix `Σ_γ vec(f_γ) vec(f_γ)†`.
    pub fn superprojector(&self) -> OperatorMatrix<R> {
        OperatorMatrix::from_square(&self.stacked * self.stacked.adjoint())
    }
}

/// Orthonormal basis of `span(vectors)` via an SVD of the stacked vectorised
/// operators. Singular values `≤ tol·σ_max` are discarded; if `σ_max` itself is
/// below `tol` the span is treated as `{0}`.
pub fn orthonormalize<R: Real>(vectors: &[OperatorMatrix<R>], tol: f64) -> Result<OperatorBasis<R>> {
    let Some(first) = vectors.first() else {
        return Ok(OperatorBasis::empty(0));
    };
    let dim = first.dim();
    if let Some(bad) = vectors.iter().find(|v| v.dim() != dim) {
        return Err(Error::Shape(format!(
            "cannot orthonormalize operators of dimensions {dim} and {}",
            bad.dim()
        )));
    }
    let mut stacked = DMatrix::zeros(dim * dim, vectors.len());
    for (k, v) in vectors.iter().enumerate() {
        stacked.set_column(k, &v.vectorize());
    }
    Ok(orthonormalize_columns(dim, stacked, tol))
}

pub(crate) fn orthonormalize_columns<R: Real>(
    dim: usize,
    stacked: DMatrix<Complex<R>>,
    tol: f64,
) -> OperatorBasis<R> {
    if stacked.ncols() == 0 {
        return OperatorBasis::empty(dim);
    }
    let svd = crate::operator::checked_svd(stacked);
    let sigma_max = svd.singular_values.iter().fold(R::zero(), |a, &b| a.max(b));
    let tol_r: R = real(tol);
    if sigma_max <= tol_r {
        return OperatorBasis::empty(dim);
    }
    let threshold = tol_r * sigma_max;
    let u = svd.u.expect("left singular vectors requested");
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > threshold)
        .map(|(i, _)| i)
        .collect();
    let mut cols = DMatrix::zeros(dim * dim, keep.len());
    for (out, &i) in keep.iter().enumerate() {
        cols.set_column(out, &u.column(i));
    }
    OperatorBasis::from_stacked(dim, cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::matrix::pauli;

    type M = OperatorMatrix<f64>;

    #[test]
    fn duplicate_identity_collapses() {
        let b = orthonormalize(&[M::identity(2), M::identity(2)], 1e-10).unwrap();
        assert_eq!(b.len(), 1);
        let expected = M::identity(2).scale_real(0.5f64.sqrt());
        let e = &b.elements()[0];
        // unique up to a phase
        let phase = e.hs_inner(&expected);
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!(b.gram_residual() < 1e-12);
    }

    #[test]
    fn diagonal_span_of_d2() {
        let b = orthonormalize(&[pauli::z(), M::from_real_diagonal(&[1.0, 0.0])], 1e-10).unwrap();
        assert_eq!(b.len(), 2);
        assert!(b.residual(&M::from_real_diagonal(&[0.0, 1.0])) < 1e-12);
        assert!(b.residual(&pauli::x()) > 0.5);
    }

    #[test]
    fn zero_matrix_gives_empty_basis() {
        assert_eq!(orthonormalize(&[M::zeros(3)], 1e-10).unwrap().len(), 0);
        assert_eq!(orthonormalize::<f64>(&[], 1e-10).unwrap().len(), 0);
    }

    #[test]
    fn mismatched_dimensions_error() {
        assert!(matches!(
            orthonormalize(&[M::zeros(2), M::zeros(3)], 1e-10),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn from_orthonormal_validates() {
        let ok = OperatorBasis::from_orthonormal(2, vec![M::matrix_unit(2, 0, 1)], 1e-10);
        assert!(ok.is_ok());
        let bad = OperatorBasis::from_orthonormal(2, vec![M::identity(2)], 1e-10);
        assert!(matches!(bad, Err(Error::Validation(_))));
    }

    #[test]
    fn superprojector_trace_is_cardinality() {
        let b = orthonormalize(&[pauli::z(), M::identity(2)], 1e-10).unwrap();
        let p = b.superprojector();
        assert!((p.trace().re - 2.0).abs() < 1e-12);
        assert!(p.is_projection(1e-10));
    }
}
