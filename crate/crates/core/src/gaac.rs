//! The anti-correlator `G_A(U)`, its independent evaluation routes, the closed
//! forms for the named algebras and the upper-bound diagnostics.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::algebra::{omega_operators, AlgebraDescriptor, OperatorAlgebra, Side};
use crate::operator::{conjugation_superoperator, swap_operator, tensor_permutation, OperatorBasis, OperatorMatrix};
use crate::util::real;
use crate::{Error, Real, Result};

/// How a GAAC value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    TwoPoint,
    OmegaOverlap,
    ProjectorDistance,
    ClosedForm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GaacReport<R: Real> {
    pub value: R,
    pub route: Route,
    pub upper_bound: R,
    /// `‖P U P − T‖_HS`, absent above the superoperator cap.
    pub saturation_residual: Option<R>,
    pub algebra_fingerprint: String,
}

fn check_unitary<R: Real>(alg: &OperatorAlgebra<R>, u: &OperatorMatrix<R>) -> Result<()> {
    if u.dim() != alg.dim {
        return Err(Error::Shape(format!(
            "unitary of dimension {} on an algebra of dimension {}",
            u.dim(),
            alg.dim
        )));
    }
    if !u.is_unitary(alg.settings.tol.assertion) {
        return Err(Error::Validation(format!(
            "matrix is not unitary (‖U†U − 1‖ = {:e})",
            crate::util::to_f64(u.unitarity_residual())
        )));
    }
    Ok(())
}

/// `1 − (1/k) Σ_{γδ} |⟨f_γ, U f_δ U†⟩|²` over an orthonormal basis of size `k`.
pub(crate) fn two_point_value<R: Real>(basis: &OperatorBasis<R>, u: &OperatorMatrix<R>) -> R {
    let k = basis.len();
    let d = basis.dim();
    let mut evolved = DMatrix::zeros(d * d, k);
    for (j, f) in basis.iter().enumerate() {
        evolved.set_column(j, &f.conjugated_by(u).vectorize());
    }
    let overlaps = basis.stacked().adjoint() * evolved;
    R::one() - overlaps.norm_squared() / real::<R>(k as f64)
}

/// Two-point route over the orthonormal commutant basis.
pub fn gaac<R: Real>(alg: &OperatorAlgebra<R>, u: &OperatorMatrix<R>) -> Result<GaacReport<R>> {
    check_unitary(alg, u)?;
    let value = two_point_value(&alg.basis_aprime, u);
    let saturation_residual = if alg.dim <= alg.settings.superop_cap {
        Some(saturation_residual(alg, u)?)
    } else {
        None
    };
    Ok(GaacReport {
        value,
        route: Route::TwoPoint,
        upper_bound: upper_bound(alg),
        saturation_residual,
        algebra_fingerprint: alg.fingerprint(),
    })
}

/// Two-point value without the report; `U` is still validated.
pub fn gaac_value<R: Real>(alg: &OperatorAlgebra<R>, u: &OperatorMatrix<R>) -> Result<R> {
    check_unitary(alg, u)?;
    Ok(two_point_value(&alg.basis_aprime, u))
}

/// `1 − ⟨Ω, U^{⊗2} Ω U^{†⊗2}⟩ / ‖Ω‖²`.
pub fn gaac_omega_oracle<R: Real>(alg: &OperatorAlgebra<R>, u: &OperatorMatrix<R>) -> Result<R> {
    check_unitary(alg, u)?;
    let w = omega_operators(alg)?;
    let uu = u.kron(u);
    let evolved = w.omega.conjugated_by(&uu);
    Ok(R::one() - w.omega.hs_inner(&evolved).re / w.omega.hs_norm_sqr())
}

/// `‖P − 𝒰 P 𝒰†‖²_HS / (2 d(A′))` with superoperator matrices.
pub fn gaac_distance_oracle<R: Real>(alg: &OperatorAlgebra<R>, u: &OperatorMatrix<R>) -> Result<R> {
    check_unitary(alg, u)?;
    alg.settings.check_cap(alg.dim)?;
    let p = alg.basis_aprime.superprojector();
    let us = OperatorMatrix::from_square(conjugation_superoperator(u));
    let pu = p.conjugated_by(&us);
    let k = real::<R>(alg.dim_aprime() as f64);
    Ok(p.distance(&pu).powi(2) / (k + k))
}

/// A-side two-point sum over the structure basis `e_α` of an explicit block
/// rotation; the `e_α` are orthogonal with `‖e_α‖² = n_J/d_J`.
pub fn gaac_structure_basis<R: Real>(alg: &OperatorAlgebra<R>, u: &OperatorMatrix<R>) -> Result<R> {
    check_unitary(alg, u)?;
    let es = alg.block_basis()?.structure_basis_a();
    let mut sum = R::zero();
    let evolved: Vec<OperatorMatrix<R>> = es.iter().map(|e| e.conjugated_by(u)).collect();
    for a in &es {
        for b in &evolved {
            sum += a.hs_inner(b).norm_sqr();
        }
    }
    Ok(R::one() - sum / real::<R>(alg.dim_aprime() as f64))
}

/// `min(1 − 1/d(A), 1 − 1/d(A′))`.
pub fn upper_bound<R: Real>(alg: &OperatorAlgebra<R>) -> R {
    let k = alg.dim_a().min(alg.dim_aprime());
    R::one() - R::one() / real::<R>(k as f64)
}

/// `‖P_{A′} 𝒰 P_{A′} − T‖_HS` with `T(X) = Tr(X) 1/d`.
///
/// Zero certifies saturation of the upper bound when `d(A′) ≤ d(A)`, or in
/// the collinear case; otherwise it is only informative.
pub fn saturation_residual<R: Real>(alg: &OperatorAlgebra<R>, u: &OperatorMatrix<R>) -> Result<R> {
    check_unitary(alg, u)?;
    alg.settings.check_cap(alg.dim)?;
    let d = alg.dim;
    let p = alg.basis_aprime.superprojector().into_matrix();
    let us = conjugation_superoperator(u);
    let one = OperatorMatrix::<R>::identity(d).vectorize();
    let t = &one * one.adjoint() / Complex::new(real::<R>(d as f64), R::zero());
    Ok((&p * us * &p - t).norm())
}

/// Named case with a closed-form GAAC.
#[derive(Clone, Debug, PartialEq)]
pub enum ClosedFormCase<R: Real> {
    /// `A = L(H_A) ⊗ 1` on `H_A ⊗ H_B`; the value is the same for `1 ⊗ L(H_B)`.
    BipartiteOtoc { d_a: usize, d_b: usize },
    /// Diagonal algebra in the computational basis.
    Cgp { d: usize },
    /// Swap-symmetric operators on `C^d ⊗ C^d`.
    Symmetric { d: usize },
    /// `span{1, S}` on `C^d ⊗ C^d`.
    Z2 { d: usize },
    /// `span{1, |ψ⟩⟨ψ|}`.
    Loschmidt { psi: DVector<Complex<R>> },
}

impl<R: Real> ClosedFormCase<R> {
    pub fn dim(&self) -> usize {
        match self {
            ClosedFormCase::BipartiteOtoc { d_a, d_b } => d_a * d_b,
            ClosedFormCase::Cgp { d } => *d,
            ClosedFormCase::Symmetric { d } | ClosedFormCase::Z2 { d } => d * d,
            ClosedFormCase::Loschmidt { psi } => psi.len(),
        }
    }

    /// Closed form matching a named descriptor, if there is one.
    pub fn for_descriptor(desc: &AlgebraDescriptor<R>) -> Option<Self> {
        Some(match desc {
            AlgebraDescriptor::Factor { d_a, d_b, side: Side::A | Side::B } => {
                ClosedFormCase::BipartiteOtoc { d_a: *d_a, d_b: *d_b }
            }
            AlgebraDescriptor::Diagonal { d } => ClosedFormCase::Cgp { d: *d },
            AlgebraDescriptor::SymmetricSwap { d } => ClosedFormCase::Symmetric { d: *d },
            AlgebraDescriptor::GroupZ2 { d } => ClosedFormCase::Z2 { d: *d },
            AlgebraDescriptor::Loschmidt { psi } => ClosedFormCase::Loschmidt { psi: psi.clone() },
            AlgebraDescriptor::Generators(_) => return None,
        })
    }

    pub fn for_algebra(alg: &OperatorAlgebra<R>) -> Option<Self> {
        alg.descriptor.as_ref().and_then(Self::for_descriptor)
    }
}

/// `⟨S, U S U†⟩ = Tr(S U S U†)` on `C^d ⊗ C^d`.
pub fn swap_overlap<R: Real>(d: usize, u: &OperatorMatrix<R>) -> Complex<R> {
    let m = u.matrix();
    let flip = |x: usize| (x % d) * d + x / d;
    let mut acc = Complex::new(R::zero(), R::zero());
    for c in 0..d * d {
        for r in 0..d * d {
            // (S U S)_{rc} = U_{flip(r), flip(c)}
            acc += m[(flip(r), flip(c))] * m[(r, c)].conj();
        }
    }
    acc
}

/// `⟨S_{AA′}, U^{⊗2}(S_{AA′})⟩` via the operator-Schmidt realignment: it equals
/// `Σ σ_i⁴` over the singular values of `Ũ_{(a a′),(b b′)} = U_{(a b),(a′ b′)}`.
pub fn realigned_swap_overlap<R: Real>(d_a: usize, d_b: usize, u: &OperatorMatrix<R>) -> R {
    let m = u.matrix();
    let realigned = DMatrix::from_fn(d_a * d_a, d_b * d_b, |row, col| {
        let (a, ap) = (row / d_a, row % d_a);
        let (b, bp) = (col / d_b, col % d_b);
        m[(a * d_b + b, ap * d_b + bp)]
    });
    let g = &realigned * realigned.adjoint();
    g.norm_squared()
}

/// Closed-form GAAC of a named case.
pub fn closed_form<R: Real>(case: &ClosedFormCase<R>, u: &OperatorMatrix<R>) -> Result<R> {
    let d = case.dim();
    if u.dim() != d {
        return Err(Error::Shape(format!(
            "closed form on dimension {d} given a unitary of dimension {}",
            u.dim()
        )));
    }
    let one = R::one();
    let half: R = real(0.5);
    Ok(match case {
        ClosedFormCase::BipartiteOtoc { d_a, d_b } => {
            let dd = real::<R>(d as f64);
            one - realigned_swap_overlap(*d_a, *d_b, u) / (dd * dd)
        }
        ClosedFormCase::Cgp { d } => {
            let s = u.matrix().iter().fold(R::zero(), |acc, z| acc + z.norm_sqr().powi(2));
            one - s / real::<R>(*d as f64)
        }
        ClosedFormCase::Symmetric { d } => {
            let s = swap_overlap(*d, u);
            let d2 = real::<R>((d * d) as f64);
            let ratio = (Complex::new(one, R::zero()) - s).norm_sqr().sqrt() / (d2 - one);
            half * (one - ratio * ratio)
        }
        ClosedFormCase::Z2 { d } => {
            let s = swap_overlap(*d, u).norm_sqr();
            let d2 = real::<R>((d * d) as f64);
            half * (d2 * d2 - s) / (d2 * (d2 + one))
        }
        ClosedFormCase::Loschmidt { psi } => {
            let echo = (psi.adjoint() * u.matrix() * psi)[(0, 0)].norm_sqr();
            let dd = real::<R>(d as f64);
            let two: R = real(2.0);
            let m = two * (one - echo);
            m * (dd - m) / ((dd - one) * (dd - one) + one)
        }
    })
}

/// `⟨S_{AA′}, U^{⊗2}(S_{AA′})⟩` computed literally on `H^{⊗2}`; used as an
/// oracle for [`realigned_swap_overlap`].
pub fn literal_swap_overlap<R: Real>(d_a: usize, d_b: usize, u: &OperatorMatrix<R>) -> R {
    let s_aa = tensor_permutation::<R>(&[d_a, d_b, d_a, d_b], &[2, 1, 0, 3]);
    let uu = u.kron(u);
    s_aa.hs_inner(&s_aa.conjugated_by(&uu)).re
}

/// `Tr(S U S U†)` computed literally with the swap matrix.
pub fn literal_full_swap_overlap<R: Real>(d: usize, u: &OperatorMatrix<R>) -> Complex<R> {
    let s = swap_operator::<R>(d);
    s.hs_inner(&s.conjugated_by(u))
}

#[cfg(test)]
mod tests;
