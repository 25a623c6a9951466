//! Haar-averaged GAAC: the analytic mean, the Schur–Weyl twirl oracle,
//! seeded Monte-Carlo estimates and concentration scans.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{omega_operators, OperatorAlgebra};
use crate::gaac::{two_point_value, upper_bound};
use crate::operator::{haar_unitary, swap_operator, OperatorMatrix, RandomSeed};
use crate::util::{pairwise_sum, real};
use crate::{Error, Real, Result};

/// `(d² − k′)(k′ − 1) / (k′(d² − 1))` with `k′ = d(A′)`.
pub fn haar_mean_formula<R: Real>(d: usize, dim_aprime: usize) -> R {
    if d <= 1 {
        return R::zero();
    }
    let d2 = real::<R>((d * d) as f64);
    let k = real::<R>(dim_aprime as f64);
    (d2 - k) * (k - R::one()) / (k * (d2 - R::one()))
}

pub fn haar_average_analytic<R: Real>(alg: &OperatorAlgebra<R>) -> R {
    haar_mean_formula(alg.dim, alg.dim_aprime())
}

/// `1 − ‖P_Haar(Ω)‖² / d(A′)` with `P_Haar` the projection onto `span{1, S}`,
/// evaluated from the actual Ω matrix.
pub fn haar_twirl_oracle<R: Real>(alg: &OperatorAlgebra<R>) -> Result<R> {
    let d = alg.dim;
    let omega = omega_operators(alg)?.omega;
    let s = swap_operator::<R>(d);
    let one = OperatorMatrix::<R>::identity(d * d);
    let dd = real::<R>(d as f64);
    let mut kept = R::zero();
    for (sign, weight) in [(R::one(), dd * (dd + R::one())), (-R::one(), dd * (dd - R::one()))] {
        if weight <= R::zero() {
            continue;
        }
        let v = &one + &s.scale_real(sign);
        kept += v.hs_inner(&omega).norm_sqr() / (weight + weight);
    }
    Ok(R::one() - kept / real::<R>(alg.dim_aprime() as f64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct HaarSummary<R: Real> {
    pub dim: usize,
    pub dim_aprime: usize,
    pub analytic_mean: R,
    pub mc_mean: R,
    /// Sample standard deviation.
    pub mc_std: R,
    pub min: R,
    pub max: R,
    pub upper_bound: R,
    pub samples: usize,
    pub seed: RandomSeed,
}

impl<R: Real> HaarSummary<R> {
    pub fn standard_error(&self) -> R {
        self.mc_std / real::<R>(self.samples as f64).sqrt()
    }
}

/// GAAC of `n` Haar unitaries drawn from streams `seed.stream, seed.stream + 1, …`.
pub fn haar_samples<R: Real>(alg: &OperatorAlgebra<R>, n: usize, seed: RandomSeed) -> Vec<R> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let u = haar_unitary::<R>(alg.dim, seed.with_stream(seed.stream.wrapping_add(i)));
            two_point_value(&alg.basis_aprime, &u)
        })
        .collect()
}

fn mean_std<R: Real>(xs: &[R]) -> (R, R) {
    let n = real::<R>(xs.len() as f64);
    let mean = pairwise_sum(xs) / n;
    let dev: Vec<R> = xs.iter().map(|&x| (x - mean) * (x - mean)).collect();
    (mean, (pairwise_sum(&dev) / (n - R::one())).sqrt())
}

pub fn haar_average_mc<R: Real>(alg: &OperatorAlgebra<R>, n: usize, seed: RandomSeed) -> Result<HaarSummary<R>> {
    if n < 2 {
        return Err(Error::Validation(format!("Monte-Carlo needs at least 2 samples, got {n}")));
    }
    let xs = haar_samples(alg, n, seed);
    let (mc_mean, mc_std) = mean_std(&xs);
    Ok(HaarSummary {
        dim: alg.dim,
        dim_aprime: alg.dim_aprime(),
        analytic_mean: haar_average_analytic(alg),
        mc_mean,
        mc_std,
        min: xs.iter().copied().fold(xs[0], |a, b| a.min(b)),
        max: xs.iter().copied().fold(xs[0], |a, b| a.max(b)),
        upper_bound: upper_bound(alg),
        samples: n,
        seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ConcentrationRow<R: Real> {
    pub dim: usize,
    pub dim_aprime: usize,
    pub analytic: R,
    pub mc_mean: R,
    pub mc_std: R,
    /// `G_UB − mc_mean`.
    pub bound_gap: R,
    /// `d^{−1/3}`.
    pub tail_epsilon: R,
    /// Fraction of samples with `G_UB − G ≥ d^{−1/3}`.
    pub tail_frequency: R,
    pub samples: usize,
}

/// Monte-Carlo statistics for one algebra per dimension, ascending.
pub fn concentration_scan<R: Real, F>(
    family: F,
    dims: &[usize],
    n: usize,
    seed: u64,
) -> Result<Vec<ConcentrationRow<R>>>
where
    F: Fn(usize) -> Result<OperatorAlgebra<R>>,
{
    if dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation("dimensions must be strictly ascending".into()));
    }
    if n < 2 {
        return Err(Error::Validation(format!("Monte-Carlo needs at least 2 samples, got {n}")));
    }
    dims.iter()
        .map(|&d| {
            let alg = family(d)?;
            let xs = haar_samples(&alg, n, RandomSeed::new(seed, 0));
            let (mc_mean, mc_std) = mean_std(&xs);
            let ub = upper_bound(&alg);
            let eps = real::<R>((alg.dim as f64).powf(-1.0 / 3.0));
            let hits = xs.iter().filter(|&&g| ub - g >= eps).count();
            Ok(ConcentrationRow {
                dim: alg.dim,
                dim_aprime: alg.dim_aprime(),
                analytic: haar_average_analytic(&alg),
                mc_mean,
                mc_std,
                bound_gap: ub - mc_mean,
                tail_epsilon: eps,
                tail_frequency: real::<R>(hits as f64 / n as f64),
                samples: n,
            })
        })
        .collect()
}
