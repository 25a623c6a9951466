//! Unital *-closed subalgebras of `L(H)`: closure, commutant, center, block
//! structure, conditional expectations and the Ω operators.

mod blocks;
mod closure;
mod omega;

use nalgebra::DVector;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

pub use blocks::{block_decomposition, BlockBasis, BlockStructure};
pub use closure::commutant;
pub use omega::{omega_operators, superprojector_matrix, OmegaPair};

pub(crate) use closure::{closure, commutant_of};

use crate::operator::{
    hermitian_eigen, orthonormalize, random_combination, swap_operator, OperatorBasis, OperatorMatrix, RandomSeed,
};
use crate::util::{real, to_f64};
use crate::{Error, Real, Result, Settings};

/// Which tensor factor of `H_A ⊗ H_B` carries the full matrix algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
}

/// Recipe for an algebra.
#[derive(Clone, Debug, PartialEq)]
pub enum AlgebraDescriptor<R: Real> {
    /// Smallest unital *-algebra containing the matrices.
    Generators(Vec<OperatorMatrix<R>>),
    /// `L(H_A) ⊗ 1` (side A) or `1 ⊗ L(H_B)` (side B).
    Factor { d_a: usize, d_b: usize, side: Side },
    /// Diagonal matrices in the computational basis.
    Diagonal { d: usize },
    /// Operators on `C^d ⊗ C^d` commuting with the swap.
    SymmetricSwap { d: usize },
    /// `span{1, S}` on `C^d ⊗ C^d`.
    GroupZ2 { d: usize },
    /// `span{|ψ⟩⟨ψ|, 1}`.
    Loschmidt { psi: DVector<Complex<R>> },
}

impl<R: Real> AlgebraDescriptor<R> {
    pub fn kind(&self) -> &'static str {
        match self {
            AlgebraDescriptor::Generators(_) => "generators",
            AlgebraDescriptor::Factor { .. } => "factor",
            AlgebraDescriptor::Diagonal { .. } => "diagonal",
            AlgebraDescriptor::SymmetricSwap { .. } => "symmetric_swap",
            AlgebraDescriptor::GroupZ2 { .. } => "group_z2",
            AlgebraDescriptor::Loschmidt { .. } => "loschmidt",
        }
    }

    /// Hilbert-space dimension of the algebra this builds.
    pub fn dim(&self) -> Result<usize> {
        let d = match self {
            AlgebraDescriptor::Generators(g) => g
                .first()
                .map(|m| m.dim())
                .ok_or_else(|| Error::Shape("generator list is empty".into()))?,
            AlgebraDescriptor::Factor { d_a, d_b, .. } => d_a * d_b,
            AlgebraDescriptor::Diagonal { d } => *d,
            AlgebraDescriptor::SymmetricSwap { d } | AlgebraDescriptor::GroupZ2 { d } => d * d,
            AlgebraDescriptor::Loschmidt { psi } => psi.len(),
        };
        if d == 0 {
            return Err(Error::Shape("algebra dimension must be positive".into()));
        }
        Ok(d)
    }
}

/// Verification residuals recorded at construction.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct Residuals {
    /// Distance of `1/√d` from span(A) and span(A′), whichever is larger.
    pub identity: f64,
    /// `max ‖[a, b]‖₂` over basis pairs.
    pub commutator: f64,
    /// `‖Σ Π_J − 1‖₂ + Σ_{J<K} ‖Π_J Π_K‖₂`; above 16 blocks the pairwise
    /// terms are replaced by idempotence and hermiticity defects.
    pub center_partition: f64,
    /// Gram residuals of both bases, whichever is larger.
    pub gram: f64,
}

/// An algebra together with its commutant, center and block structure.
#[derive(Clone, Debug)]
pub struct OperatorAlgebra<R: Real> {
    pub dim: usize,
    pub basis_a: OperatorBasis<R>,
    pub basis_aprime: OperatorBasis<R>,
    pub center_projections: Vec<OperatorMatrix<R>>,
    pub blocks: BlockStructure,
    pub descriptor: Option<AlgebraDescriptor<R>>,
    pub settings: Settings,
    pub residuals: Residuals,
}

impl<R: Real> OperatorAlgebra<R> {
    /// Decomposes and verifies a given algebra/commutant pair of bases.
    pub fn from_bases(
        basis_a: OperatorBasis<R>,
        basis_aprime: OperatorBasis<R>,
        settings: &Settings,
    ) -> Result<Self> {
        let dim = basis_a.dim();
        let (blocks, center_projections) = block_decomposition(&basis_a, &basis_aprime, settings)?;
        let alg = OperatorAlgebra {
            dim,
            basis_a,
            basis_aprime,
            center_projections,
            blocks,
            descriptor: None,
            settings: *settings,
            residuals: Residuals::default(),
        };
        alg.verified()
    }

    fn verified(mut self) -> Result<Self> {
        let d = self.dim;
        let unit = OperatorMatrix::<R>::identity(d).scale_real(R::one() / real::<R>(d as f64).sqrt());
        let identity = to_f64(self.basis_a.residual(&unit)).max(to_f64(self.basis_aprime.residual(&unit)));
        let mut commutator = 0.0f64;
        let pairs = self.basis_a.len() * self.basis_aprime.len();
        if pairs <= 1024 {
            for a in self.basis_a.iter() {
                for b in self.basis_aprime.iter() {
                    commutator = commutator.max(to_f64(a.commutator(b).hs_norm()));
                }
            }
        } else {
            // random unit-variance combinations of both bases
            for probe in 0..4u64 {
                let seed = RandomSeed::new(self.settings.witness_seed, 7_000 + 2 * probe);
                let a = random_combination(&self.basis_a, seed);
                let b = random_combination(&self.basis_aprime, seed.with_stream(seed.stream + 1));
                let scale = to_f64(a.hs_norm() * b.hs_norm()).max(f64::MIN_POSITIVE);
                commutator = commutator.max(to_f64(a.commutator(&b).hs_norm()) / scale);
            }
        }
        let mut sum = OperatorMatrix::zeros(d);
        let mut partition = 0.0;
        let many = self.center_projections.len() > 16;
        for (j, p) in self.center_projections.iter().enumerate() {
            sum = &sum + p;
            if many {
                // hermitian idempotents summing to 1 are mutually orthogonal
                partition += to_f64((p * p).distance(p) + p.distance(&p.adjoint()));
            } else {
                for q in &self.center_projections[j + 1..] {
                    partition += to_f64((p * q).hs_norm());
                }
            }
        }
        partition += to_f64(sum.distance(&OperatorMatrix::identity(d)));
        let gram = to_f64(self.basis_a.gram_residual()).max(to_f64(self.basis_aprime.gram_residual()));
        self.residuals = Residuals {
            identity,
            commutator,
            center_partition: partition,
            gram,
        };
        let tol = self.settings.tol.assertion;
        let worst = identity.max(commutator).max(partition).max(gram);
        if !(worst < tol) {
            return Err(Error::Validation(format!(
                "algebra verification failed: identity {identity:.3e}, commutator {commutator:.3e}, \
                 center partition {partition:.3e}, gram {gram:.3e} (tolerance {tol:.1e})"
            )));
        }
        Ok(self)
    }

    pub fn dim_a(&self) -> usize {
        self.basis_a.len()
    }

    pub fn dim_aprime(&self) -> usize {
        self.basis_aprime.len()
    }

    pub fn fingerprint(&self) -> String {
        self.blocks.fingerprint()
    }

    /// The same pair with the roles of `A` and `A′` exchanged.
    pub fn commutant_algebra(&self) -> Self {
        let mut pairs: Vec<(usize, usize)> = self.blocks.pairs.iter().map(|&(n, d)| (d, n)).collect();
        let mut projections = self.center_projections.clone();
        blocks::sort_blocks(&mut pairs, &mut projections);
        OperatorAlgebra {
            dim: self.dim,
            basis_a: self.basis_aprime.clone(),
            basis_aprime: self.basis_a.clone(),
            center_projections: projections,
            blocks: BlockStructure::from_pairs(pairs),
            descriptor: None,
            settings: self.settings,
            residuals: self.residuals,
        }
    }

    /// Conditional expectation onto `A`.
    pub fn project_a(&self, x: &OperatorMatrix<R>) -> OperatorMatrix<R> {
        self.basis_a.project(x)
    }

    /// Conditional expectation onto `A′`.
    pub fn project_aprime(&self, x: &OperatorMatrix<R>) -> OperatorMatrix<R> {
        self.basis_aprime.project(x)
    }

    /// Explicit rotation into `⊕_J C^{n_J} ⊗ C^{d_J}`.
    pub fn block_basis(&self) -> Result<BlockBasis<R>> {
        BlockBasis::compute(
            &self.basis_aprime,
            &self.blocks.pairs,
            &self.center_projections,
            &self.settings,
        )
    }
}

/// Orthogonal projection of `x` onto `span(basis)`.
pub fn project_onto<R: Real>(basis: &OperatorBasis<R>, x: &OperatorMatrix<R>) -> Result<OperatorMatrix<R>> {
    if basis.dim() != x.dim() {
        return Err(Error::Shape(format!(
            "projecting a {}-dimensional operator onto a basis of dimension {}",
            x.dim(),
            basis.dim()
        )));
    }
    Ok(basis.project(x))
}

pub fn build_algebra<R: Real>(desc: &AlgebraDescriptor<R>) -> Result<OperatorAlgebra<R>> {
    build_algebra_with(desc, &Settings::default())
}

pub fn build_algebra_with<R: Real>(desc: &AlgebraDescriptor<R>, settings: &Settings) -> Result<OperatorAlgebra<R>> {
    let d = desc.dim()?;
    let tol = settings.tol.rank;
    let (basis_a, basis_aprime) = match desc {
        AlgebraDescriptor::Generators(gens) => {
            if let Some(bad) = gens.iter().find(|g| g.dim() != d) {
                return Err(Error::Shape(format!(
                    "generator of dimension {} among generators of dimension {d}",
                    bad.dim()
                )));
            }
            let mut ops: Vec<OperatorMatrix<R>> = gens.clone();
            ops.extend(gens.iter().map(|g| g.adjoint()));
            (closure(d, gens, settings)?, commutant_of(d, &ops, tol)?)
        }
        AlgebraDescriptor::Factor { d_a, d_b, side } => {
            let full_a = factor_units(*d_a, *d_b, true);
            let full_b = factor_units(*d_a, *d_b, false);
            match side {
                Side::A => (full_a, full_b),
                Side::B => (full_b, full_a),
            }
        }
        AlgebraDescriptor::Diagonal { d } => {
            let diag = OperatorBasis::from_elements_unchecked(
                *d,
                (0..*d).map(|i| OperatorMatrix::matrix_unit(*d, i, i)).collect(),
            );
            (diag.clone(), diag)
        }
        AlgebraDescriptor::SymmetricSwap { d: local } => {
            let s = swap_operator::<R>(*local);
            let group = orthonormalize(&[OperatorMatrix::identity(d), s.clone()], tol)?;
            (commutant_of(d, &[s], tol)?, group)
        }
        AlgebraDescriptor::GroupZ2 { d: local } => {
            let s = swap_operator::<R>(*local);
            let group = orthonormalize(&[OperatorMatrix::identity(d), s.clone()], tol)?;
            (group, commutant_of(d, &[s], tol)?)
        }
        AlgebraDescriptor::Loschmidt { psi } => loschmidt_bases(psi, settings)?,
    };
    let mut alg = OperatorAlgebra::from_bases(basis_a, basis_aprime, settings)?;
    alg.descriptor = Some(desc.clone());
    Ok(alg)
}

/// `E_ij ⊗ 1/√d_b` (`left`) or `1 ⊗ E_ij/√d_a`.
fn factor_units<R: Real>(d_a: usize, d_b: usize, left: bool) -> OperatorBasis<R> {
    let (n, other) = if left { (d_a, d_b) } else { (d_b, d_a) };
    let norm = R::one() / real::<R>(other as f64).sqrt();
    let id = OperatorMatrix::<R>::identity(other);
    let elems = (0..n * n)
        .map(|k| {
            let e = OperatorMatrix::matrix_unit(n, k / n, k % n);
            let m = if left { e.kron(&id) } else { id.kron(&e) };
            m.scale_real(norm)
        })
        .collect();
    OperatorBasis::from_elements_unchecked(d_a * d_b, elems)
}

fn loschmidt_bases<R: Real>(
    psi: &DVector<Complex<R>>,
    settings: &Settings,
) -> Result<(OperatorBasis<R>, OperatorBasis<R>)> {
    let d = psi.len();
    let norm = to_f64(psi.norm());
    if (norm - 1.0).abs() > settings.tol.assertion {
        return Err(Error::Validation(format!("state vector has norm {norm}, expected 1")));
    }
    let pi = OperatorMatrix::projector(psi);
    let rest = &OperatorMatrix::identity(d) - &pi;
    let basis_a = orthonormalize(&[pi.clone(), rest.clone()], settings.tol.rank)?;
    // eigenvalue-1 eigenvectors of 1 − Π span ψ⊥
    let (_, vecs) = hermitian_eigen(rest.matrix());
    let perp: Vec<DVector<Complex<R>>> = (1..d).map(|i| vecs.column(i).into_owned()).collect();
    let mut elems = vec![pi];
    for u in &perp {
        for v in &perp {
            elems.push(OperatorMatrix::outer(u, v));
        }
    }
    Ok((basis_a, OperatorBasis::from_elements_unchecked(d, elems)))
}
