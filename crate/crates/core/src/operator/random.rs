use nalgebra::DMatrix;
use num_complex::Complex;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::OperatorMatrix;
use crate::util::real;
use crate::Real;

/// Seed plus stream index. Draws are a pure function of both.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RandomSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        RandomSeed { seed, stream }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        RandomSeed { stream, ..self }
    }
}

/// Standard normal variates from a ChaCha stream via Box–Muller.
pub struct Gaussian {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Gaussian {
    pub fn new(seed: RandomSeed) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.seed);
        rng.set_stream(seed.stream);
        Gaussian { rng, spare: None }
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform(); // (0, 1]
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Complex normal with `E|z|² = 1`.
    pub fn complex_normal<R: Real>(&mut self) -> Complex<R> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let re = self.normal() * s;
        let im = self.normal() * s;
        Complex::new(real(re), real(im))
    }
}

/// Complex Ginibre matrix with i.i.d. standard complex normal entries.
pub fn ginibre<R: Real>(d: usize, seed: RandomSeed) -> DMatrix<Complex<R>> {
    let mut g = Gaussian::new(seed);
    DMatrix::from_fn(d, d, |_, _| g.complex_normal())
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`, which makes the factorisation unique.
pub fn haar_unitary<R: Real>(d: usize, seed: RandomSeed) -> OperatorMatrix<R> {
    let qr = ginibre::<R>(d, seed).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let n = rjj.norm_sqr().sqrt();
        let phase = if n > R::zero() {
            rjj / Complex::new(n, R::zero())
        } else {
            Complex::new(R::one(), R::zero())
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    OperatorMatrix::from_square(q)
}

/// GUE draw `(G + G†)/2`.
pub fn gue<R: Real>(d: usize, seed: RandomSeed) -> OperatorMatrix<R> {
    OperatorMatrix::from_square(ginibre::<R>(d, seed)).hermitian_part()
}

/// Random element of `span(basis)` with complex normal coefficients.
pub fn random_combination<R: Real>(
    basis: &super::OperatorBasis<R>,
    seed: RandomSeed,
) -> OperatorMatrix<R> {
    let mut g = Gaussian::new(seed);
    let coeffs = nalgebra::DVector::from_fn(basis.len(), |_, _| g.complex_normal::<R>());
    let v = basis.stacked() * coeffs;
    let d = basis.dim();
    OperatorMatrix::from_square(DMatrix::from_column_slice(d, d, v.as_slice()))
}
