use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by every construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative threshold `τ` on singular values for rank and subspace decisions.
    pub rank: f64,
    /// Looser tolerance for end-to-end equalities (unitarity, verification residuals).
    pub assertion: f64,
    /// Eigenvalue grouping threshold, relative to the spectral range.
    pub grouping: f64,
    /// Pair-sum grouping threshold for resonance classes, relative to the spectral scale.
    pub resonance: f64,
    /// Pair-sum gaps below this (but above `resonance`) are reported as near-resonances.
    pub near_resonance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: 1e-10,
            assertion: 1e-8,
            grouping: 1e-8,
            resonance: 1e-9,
            near_resonance: 1e-6,
        }
    }
}

impl Tolerances {
    /// Thresholds usable with `f32` arithmetic.
    pub fn single_precision() -> Self {
        Tolerances {
            rank: 1e-4,
            assertion: 1e-3,
            grouping: 1e-3,
            resonance: 1e-4,
            near_resonance: 1e-3,
        }
    }
}

/// Tolerances plus resource caps and the seed used for internal random witnesses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub tol: Tolerances,
    /// Largest Hilbert-space dimension for which `d² × d²` objects are built.
    pub superop_cap: usize,
    /// Seed for center/block witnesses.
    pub witness_seed: u64,
    /// Resampling budget for the center witness.
    pub max_witness_attempts: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            tol: Tolerances::default(),
            superop_cap: 16,
            witness_seed: 0x5eed_ab1e,
            max_witness_attempts: 8,
        }
    }
}

impl Settings {
    pub fn single_precision() -> Self {
        Settings {
            tol: Tolerances::single_precision(),
            ..Settings::default()
        }
    }

    pub fn with_rank_tolerance(mut self, tau: f64) -> Self {
        self.tol.rank = tau;
        self
    }

    pub(crate) fn check_cap(&self, dim: usize) -> crate::Result<()> {
        if dim > self.superop_cap {
            Err(crate::Error::Resource {
                dim,
                cap: self.superop_cap,
            })
        } else {
            Ok(())
        }
    }
}
