use nalgebra::DMatrix;
use num_complex::Complex;

use super::OperatorAlgebra;
use crate::operator::{swap_operator, OperatorBasis, OperatorMatrix};
use crate::{Real, Result, Settings};

/// `Ω̃ = Σ_γ f_γ ⊗ f_γ†` over an orthonormal commutant basis and `Ω = S Ω̃`.
#[derive(Clone, Debug)]
pub struct OmegaPair<R: Real> {
    pub omega: OperatorMatrix<R>,
    pub omega_tilde: OperatorMatrix<R>,
}

impl<R: Real> OmegaPair<R> {
    pub fn from_commutant_basis(basis_aprime: &OperatorBasis<R>, settings: &Settings) -> Result<Self> {
        let d = basis_aprime.dim();
        settings.check_cap(d)?;
        let mut tilde = DMatrix::<Complex<R>>::zeros(d * d, d * d);
        for f in basis_aprime.iter() {
            tilde += f.kron(&f.adjoint()).matrix();
        }
        let omega_tilde = OperatorMatrix::from_square(tilde);
        let omega = &swap_operator(d) * &omega_tilde;
        Ok(OmegaPair { omega, omega_tilde })
    }
}

pub fn omega_operators<R: Real>(alg: &OperatorAlgebra<R>) -> Result<OmegaPair<R>> {
    OmegaPair::from_commutant_basis(&alg.basis_aprime, &alg.settings)
}

/// Matrix of `X ↦ Σ_γ f_γ ⟨f_γ, X⟩` on column-stacked vectors.
pub fn superprojector_matrix<R: Real>(basis: &OperatorBasis<R>, settings: &Settings) -> Result<OperatorMatrix<R>> {
    settings.check_cap(basis.dim())?;
    Ok(basis.superprojector())
}
