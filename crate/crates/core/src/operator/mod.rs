//! Dense complex-matrix substrate: Hilbert–Schmidt geometry, tensor
//! operations, subspace solvers and seeded random-matrix sampling.

mod basis;
mod linalg;
mod matrix;
mod random;

pub use basis::{orthonormalize, OperatorBasis};
pub use linalg::{hs_inner, nullspace, partial_trace, swap_operator, tensor_permutation};
pub use matrix::{fourier_matrix, pauli, OperatorMatrix};
pub use random::{ginibre, gue, haar_unitary, random_combination, Gaussian, RandomSeed};

pub(crate) use linalg::{
    commutator_superoperator, compressed_stack, conjugation_superoperator, hermitian_eigen, nullspace_with_floor, checked_svd,
};
