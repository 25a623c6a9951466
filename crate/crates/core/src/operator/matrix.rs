use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::util::real;
use crate::{Error, Real, Result};

/// Square complex matrix acting on a `d`-dimensional Hilbert space.
///
/// States, observables, unitaries and superoperators (on the `d²`-dimensional
/// space of vectorised operators) all use this carrier. Vectorisation is
/// column-stacking: entry `(i, j)` lands at index `j * d + i`, which is the
/// storage order of the underlying nalgebra matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix<R: Real> {
    inner: DMatrix<Complex<R>>,
}

impl<R: Real> OperatorMatrix<R> {
    pub fn new(inner: DMatrix<Complex<R>>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(Error::Shape(format!(
                "operator must be square, got {}x{}",
                inner.nrows(),
                inner.ncols()
            )));
        }
        if inner.nrows() == 0 {
            return Err(Error::Shape("operator dimension must be positive".into()));
        }
        Ok(OperatorMatrix { inner })
    }

    /// Wraps a matrix already known to be square.
    pub(crate) fn from_square(inner: DMatrix<Complex<R>>) -> Self {
        debug_assert_eq!(inner.nrows(), inner.ncols());
        OperatorMatrix { inner }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_square(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_square(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex<R>) -> Self {
        Self::from_square(DMatrix::from_fn(dim, dim, f))
    }

    pub fn from_real_diagonal(diag: &[R]) -> Self {
        let mut m = DMatrix::zeros(diag.len(), diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(x, R::zero());
        }
        Self::from_square(m)
    }

    /// `|i⟩⟨j|` in dimension `dim`.
    pub fn matrix_unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(i, j)] = Complex::new(R::one(), R::zero());
        Self::from_square(m)
    }

    /// `|a⟩⟨b|`.
    pub fn outer(a: &DVector<Complex<R>>, b: &DVector<Complex<R>>) -> Self {
        Self::from_square(a * b.adjoint())
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(psi: &DVector<Complex<R>>) -> Self {
        Self::outer(psi, psi)
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex<R>> {
        &self.inner
    }

    pub fn into_matrix(self) -> DMatrix<Complex<R>> {
        self.inner
    }

    pub fn adjoint(&self) -> Self {
        Self::from_square(self.inner.adjoint())
    }

    pub fn trace(&self) -> Complex<R> {
        self.inner.trace()
    }

    /// `Tr(A† B)`. Panics on dimension mismatch; see [`crate::hs_inner`] for
    /// the checked variant.
    pub fn hs_inner(&self, other: &Self) -> Complex<R> {
        assert_eq!(self.dim(), other.dim(), "hs_inner dimension mismatch");
        self.inner.dotc(&other.inner)
    }

    pub fn hs_norm_sqr(&self) -> R {
        self.inner.iter().fold(R::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub fn hs_norm(&self) -> R {
        self.hs_norm_sqr().sqrt()
    }

    /// `‖self − other‖₂`.
    pub fn distance(&self, other: &Self) -> R {
        (&self.inner - &other.inner)
            .iter()
            .fold(R::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::from_square(self.inner.kronecker(&other.inner))
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Self {
        Self::from_square(&self.inner * &other.inner - &other.inner * &self.inner)
    }

    /// `U · self · U†`.
    pub fn conjugated_by(&self, u: &Self) -> Self {
        Self::from_square(&u.inner * &self.inner * u.inner.adjoint())
    }

    pub fn scale(&self, c: Complex<R>) -> Self {
        Self::from_square(self.inner.map(|z| z * c))
    }

    pub fn scale_real(&self, x: R) -> Self {
        self.scale(Complex::new(x, R::zero()))
    }

    /// Hermitian part `(X + X†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let half: R = real(0.5);
        Self::from_square((&self.inner + self.inner.adjoint()).map(|z| z * half))
    }

    /// Column-stacked vectorisation.
    pub fn vectorize(&self) -> DVector<Complex<R>> {
        DVector::from_column_slice(self.inner.as_slice())
    }

    /// Inverse of [`Self::vectorize`].
    pub fn from_vectorized(dim: usize, v: &[Complex<R>]) -> Result<Self> {
        if v.len() != dim * dim {
            return Err(Error::Shape(format!(
                "vector of length {} cannot be reshaped to {dim}x{dim}",
                v.len()
            )));
        }
        Ok(Self::from_square(DMatrix::from_column_slice(dim, dim, v)))
    }

    fn scale_for(&self) -> R {
        R::one().max(self.hs_norm())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.distance(&self.adjoint()) <= real::<R>(tol) * self.scale_for()
    }

    /// `‖U†U − 1‖₂ ≤ tol·√d`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= real::<R>(tol) * real::<R>(self.dim() as f64).sqrt()
    }

    pub fn unitarity_residual(&self) -> R {
        let prod = Self::from_square(self.inner.adjoint() * &self.inner);
        prod.distance(&Self::identity(self.dim()))
    }

    /// Hermitian and idempotent within `tol`.
    pub fn is_projection(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        let sq = Self::from_square(&self.inner * &self.inner);
        sq.distance(self) <= real::<R>(tol) * self.scale_for()
    }
}

impl<'a, R: Real> Add for &'a OperatorMatrix<R> {
    type Output = OperatorMatrix<R>;
    fn add(self, rhs: Self) -> OperatorMatrix<R> {
        OperatorMatrix::from_square(&self.inner + &rhs.inner)
    }
}

impl<'a, R: Real> Sub for &'a OperatorMatrix<R> {
    type Output = OperatorMatrix<R>;
    fn sub(self, rhs: Self) -> OperatorMatrix<R> {
        OperatorMatrix::from_square(&self.inner - &rhs.inner)
    }
}

impl<'a, R: Real> Mul for &'a OperatorMatrix<R> {
    type Output = OperatorMatrix<R>;
    fn mul(self, rhs: Self) -> OperatorMatrix<R> {
        OperatorMatrix::from_square(&self.inner * &rhs.inner)
    }
}

/// Pauli matrices, handy for tests and fixtures.
pub mod pauli {
    use super::*;

    fn c<R: Real>(re: f64, im: f64) -> Complex<R> {
        Complex::new(real(re), real(im))
    }

    pub fn x<R: Real>() -> OperatorMatrix<R> {
        OperatorMatrix::from_fn(2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    pub fn y<R: Real>() -> OperatorMatrix<R> {
        OperatorMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => c(0.0, -1.0),
            (1, 0) => c(0.0, 1.0),
            _ => c(0.0, 0.0),
        })
    }

    pub fn z<R: Real>() -> OperatorMatrix<R> {
        OperatorMatrix::from_real_diagonal(&[R::one(), -R::one()])
    }

    pub fn hadamard<R: Real>() -> OperatorMatrix<R> {
        let s = 0.5f64.sqrt();
        OperatorMatrix::from_fn(2, |i, j| if i == 1 && j == 1 { c(-s, 0.0) } else { c(s, 0.0) })
    }
}

/// Discrete Fourier matrix `F_{jk} = ω^{jk}/√d`.
pub fn fourier_matrix<R: Real>(dim: usize) -> OperatorMatrix<R> {
    let norm = 1.0 / (dim as f64).sqrt();
    OperatorMatrix::from_fn(dim, |j, k| {
        let phase = 2.0 * std::f64::consts::PI * ((j * k) % dim) as f64 / dim as f64;
        Complex::new(real(norm * phase.cos()), real(norm * phase.sin()))
    })
}
