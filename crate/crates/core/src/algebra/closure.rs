use crate::operator::{
    commutator_superoperator, compressed_stack, nullspace_with_floor, orthonormalize, OperatorBasis,
    OperatorMatrix,
};
use crate::{Error, Real, Result, Settings};

/// Smallest unital *-closed algebra containing `generators`.
///
/// The span of `{1} ∪ gens ∪ gens†` is repeatedly multiplied on the right by
/// the seed set and re-orthonormalised until its dimension stops growing.
pub(crate) fn closure<R: Real>(
    dim: usize,
    generators: &[OperatorMatrix<R>],
    settings: &Settings,
) -> Result<OperatorBasis<R>> {
    let tol = settings.tol.rank;
    let mut seeds = vec![OperatorMatrix::identity(dim)];
    for g in generators {
        let n = g.hs_norm();
        if n <= R::zero() {
            continue;
        }
        let g = g.scale_real(R::one() / n);
        seeds.push(g.adjoint());
        seeds.push(g);
    }
    let mut basis = orthonormalize(&seeds, tol)?;
    loop {
        let mut candidates: Vec<OperatorMatrix<R>> = basis.elements().to_vec();
        for b in basis.iter() {
            for s in &seeds {
                candidates.push(b * s);
            }
        }
        let next = orthonormalize(&candidates, tol)?;
        if next.len() > dim * dim {
            return Err(Error::Internal(format!(
                "closure reached dimension {} > d² = {}",
                next.len(),
                dim * dim
            )));
        }
        if next.len() == basis.len() {
            return Ok(next);
        }
        basis = next;
    }
}

/// Orthonormal basis of `{X : [X, b] = 0 ∀ b ∈ ops}`.
pub(crate) fn commutant_of<R: Real>(
    dim: usize,
    ops: &[OperatorMatrix<R>],
    tol: f64,
) -> Result<OperatorBasis<R>> {
    if let Some(bad) = ops.iter().find(|o| o.dim() != dim) {
        return Err(Error::Shape(format!(
            "operator of dimension {} in a commutant of dimension {dim}",
            bad.dim()
        )));
    }
    let n = dim * dim;
    // unit-norm operators so that a scalar generator gives an exactly empty constraint
    let stacked = compressed_stack(
        n,
        ops.iter().filter(|o| o.hs_norm() > R::zero()).map(|o| commutator_superoperator(&o.scale_real(R::one() / o.hs_norm()))),
    );
    let null = nullspace_with_floor(&stacked, tol, R::one());
    let mut cols = nalgebra::DMatrix::zeros(n, null.len());
    for (k, v) in null.iter().enumerate() {
        cols.set_column(k, v);
    }
    Ok(OperatorBasis::from_stacked(dim, cols))
}

/// Orthonormal basis of the commutant of `span(alg_basis)`.
pub fn commutant<R: Real>(alg_basis: &OperatorBasis<R>, tol: f64) -> Result<OperatorBasis<R>> {
    if alg_basis.is_empty() {
        return Err(Error::Shape("commutant of an empty basis".into()));
    }
    commutant_of(alg_basis.dim(), alg_basis.elements(), tol)
}
