//! Finite-dimensional observable algebras and the geometric algebra
//! anti-correlator (GAAC) of unitary channels.
//!
//! The crate is organised bottom-up:
//!
//! * [`operator`]: dense complex matrices with Hilbert–Schmidt geometry,
//!   tensor utilities, subspace solvers and seeded Haar sampling.
//! * [`algebra`]: unital *-closed subalgebras, commutants, centers, block
//!   structure, conditional-expectation superprojectors and Ω operators.
//! * [`gaac`]: the anti-correlator through three independent routes, the
//!   closed forms for the named algebras, and upper-bound diagnostics.
//! * [`haar`]: Haar-averaged values, Monte-Carlo estimates, concentration scans.
//! * [`dynamics`]: infinite-time averages under Hamiltonian evolution.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`, which is what the default
//! tolerances are tuned for.

pub mod algebra;
pub mod dynamics;
pub mod error;
pub mod gaac;
pub mod haar;
pub mod io;
pub mod operator;
mod settings;
mod util;

use nalgebra::RealField;
use num_traits::ToPrimitive;
use serde::{de::DeserializeOwned, Serialize};

pub use error::{Error, Result};
pub use settings::{Settings, Tolerances};

pub use algebra::{
    block_decomposition, build_algebra, build_algebra_with, commutant, omega_operators,
    project_onto, superprojector_matrix, AlgebraDescriptor, BlockBasis, BlockStructure, OmegaPair,
    OperatorAlgebra, Residuals, Side,
};
pub use dynamics::{
    analyze_hamiltonian, chaoticity, dephased_purity, fluctuation_scan, grid_time_average,
    nrc_upper_bound, r_matrices, scrambling_witness, time_average_exact, time_average_nrc,
    time_average_nrc_collinear, Chaoticity, FluctuationRow, HamiltonianModel, RMatrices,
    ScramblingWitness,
};
pub use gaac::{
    closed_form, gaac, gaac_distance_oracle, gaac_omega_oracle, gaac_structure_basis, gaac_value,
    saturation_residual, swap_overlap, upper_bound, ClosedFormCase, GaacReport, Route,
};
pub use haar::{
    concentration_scan, haar_average_analytic, haar_average_mc, haar_mean_formula, haar_samples,
    haar_twirl_oracle, ConcentrationRow, HaarSummary,
};
pub use operator::{
    fourier_matrix, gue, haar_unitary, hs_inner, nullspace, orthonormalize, partial_trace, pauli,
    swap_operator, tensor_permutation, OperatorBasis, OperatorMatrix, RandomSeed,
};

/// Real scalar the numerics are generic over.
pub trait Real: RealField + Copy + ToPrimitive + Serialize + DeserializeOwned {}

impl Real for f32 {}
impl Real for f64 {}

pub type OperatorMatrix64 = OperatorMatrix<f64>;
pub type OperatorBasis64 = OperatorBasis<f64>;
pub type OperatorAlgebra64 = OperatorAlgebra<f64>;
pub type AlgebraDescriptor64 = AlgebraDescriptor<f64>;
pub type HamiltonianModel64 = HamiltonianModel<f64>;
pub type GaacReport64 = GaacReport<f64>;
pub type HaarSummary64 = HaarSummary<f64>;

pub type OperatorMatrix32 = OperatorMatrix<f32>;
pub type OperatorAlgebra32 = OperatorAlgebra<f32>;
