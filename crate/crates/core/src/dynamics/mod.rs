//! Infinite-time averages of the GAAC under `U_t = exp(−iHt)`.

use nalgebra::DMatrix;
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{omega_operators, AlgebraDescriptor, OperatorAlgebra};
use crate::gaac::{two_point_value, upper_bound};
use crate::haar::haar_average_analytic;
use crate::operator::{hermitian_eigen, OperatorMatrix};
use crate::util::{group_sorted, pairwise_sum, real, to_f64};
use crate::{Error, Real, Result, Tolerances};

/// A Hamiltonian with its spectral data and resonance structure.
#[derive(Clone, Debug)]
pub struct HamiltonianModel<R: Real> {
    pub h: OperatorMatrix<R>,
    /// Ascending.
    pub eigenvalues: Vec<R>,
    /// Column `l` is `|Ψ_l⟩`.
    pub eigenvectors: OperatorMatrix<R>,
    /// Ordered pairs `(k, h)` grouped by `E_k + E_h`.
    pub resonance_classes: Vec<Vec<(usize, usize)>>,
    /// Representative `E_k + E_h` of each class, ascending.
    pub class_energies: Vec<R>,
    /// Index ranges of degenerate eigenvalue groups.
    pub eigen_groups: Vec<std::ops::Range<usize>>,
    pub degenerate: bool,
    pub nrc: bool,
    /// Distinct pair sums closer than the near-resonance threshold.
    pub near_resonances: usize,
}

/// Eigendecomposition plus resonance analysis; pair sums closer than
/// `tol_rel · max(E_max − E_min, max|E|)` are treated as equal.
pub fn analyze_hamiltonian<R: Real>(h: &OperatorMatrix<R>, tol_rel: f64) -> Result<HamiltonianModel<R>> {
    if !h.is_hermitian(Tolerances::default().assertion.max(tol_rel)) {
        return Err(Error::Validation("Hamiltonian is not hermitian".into()));
    }
    let (vals, vecs) = hermitian_eigen(h.matrix());
    HamiltonianModel::assemble(h.clone(), vals, OperatorMatrix::from_square(vecs), tol_rel)
}

impl<R: Real> HamiltonianModel<R> {
    /// Model from a given spectrum and orthonormal eigenvectors (columns).
    pub fn from_eigen(eigenvalues: &[R], eigenvectors: OperatorMatrix<R>, tol_rel: f64) -> Result<Self> {
        let d = eigenvectors.dim();
        if eigenvalues.len() != d {
            return Err(Error::Shape(format!("{} eigenvalues for dimension {d}", eigenvalues.len())));
        }
        if !eigenvectors.is_unitary(Tolerances::default().assertion) {
            return Err(Error::Validation("eigenvectors are not orthonormal".into()));
        }
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| to_f64(eigenvalues[a]).total_cmp(&to_f64(eigenvalues[b])));
        let vals: Vec<R> = order.iter().map(|&i| eigenvalues[i]).collect();
        let v = DMatrix::from_fn(d, d, |r, c| eigenvectors.matrix()[(r, order[c])]);
        let diag = OperatorMatrix::from_real_diagonal(&vals);
        let vm = OperatorMatrix::from_square(v);
        let h = diag.conjugated_by(&vm);
        Self::assemble(h, vals, vm, tol_rel)
    }

    fn assemble(h: OperatorMatrix<R>, vals: Vec<R>, vecs: OperatorMatrix<R>, tol_rel: f64) -> Result<Self> {
        let d = vals.len();
        let lo = vals[0];
        let hi = vals[d - 1];
        let scale = (hi - lo).max(lo.abs()).max(hi.abs());
        let thr = real::<R>(tol_rel) * scale;
        let eigen_groups = group_sorted(&vals, thr);
        let degenerate = eigen_groups.len() < d;

        let mut pairs: Vec<(R, usize, usize)> = Vec::with_capacity(d * d);
        for k in 0..d {
            for l in 0..d {
                pairs.push((vals[k] + vals[l], k, l));
            }
        }
        pairs.sort_by(|a, b| to_f64(a.0).total_cmp(&to_f64(b.0)));
        let sums: Vec<R> = pairs.iter().map(|p| p.0).collect();
        let groups = group_sorted(&sums, thr);
        let resonance_classes: Vec<Vec<(usize, usize)>> = groups
            .iter()
            .map(|g| pairs[g.clone()].iter().map(|&(_, k, l)| (k, l)).collect())
            .collect();
        let class_energies: Vec<R> = groups.iter().map(|g| sums[g.start]).collect();

        let nrc = resonance_classes.iter().all(|c| match c.as_slice() {
            [(k, l)] => k == l,
            [(k, l), (m, n)] => k != l && k == n && l == m,
            _ => false,
        });
        let near = real::<R>(Tolerances::default().near_resonance) * scale;
        let near_resonances = class_energies
            .windows(2)
            .filter(|w| w[1] - w[0] <= near)
            .count();
        if near_resonances > 0 {
            log::warn!(
                "{near_resonances} pair-sum gap(s) lie between the resonance tolerance and the \
                 near-resonance threshold; the infinite-time average is sensitive to them"
            );
        }
        let residual = to_f64(h.distance(&OperatorMatrix::from_real_diagonal(&vals).conjugated_by(&vecs)));
        if residual > Tolerances::default().assertion * to_f64(h.hs_norm()).max(1.0) {
            return Err(Error::Internal(format!("eigendecomposition residual {residual:e}")));
        }
        Ok(HamiltonianModel {
            h,
            eigenvalues: vals,
            eigenvectors: vecs,
            resonance_classes,
            class_energies,
            eigen_groups,
            degenerate,
            nrc,
            near_resonances,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `exp(−iHt)`.
    pub fn evolution(&self, t: R) -> OperatorMatrix<R> {
        let v = self.eigenvectors.matrix();
        let phases = DMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            if r == c {
                let a = -self.eigenvalues[r] * t;
                Complex::new(a.cos(), a.sin())
            } else {
                Complex::new(R::zero(), R::zero())
            }
        });
        OperatorMatrix::from_square(v * phases * v.adjoint())
    }

    /// Smallest gap between distinct resonance-class energies; `None` if
    /// there is only one class.
    pub fn min_class_gap(&self) -> Option<R> {
        self.class_energies
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(None, |acc: Option<R>, g| Some(acc.map_or(g, |a| a.min(g))))
    }

    /// `c / min_class_gap`, the default horizon for the quadrature oracle.
    pub fn default_horizon(&self, c: R) -> Option<R> {
        self.min_class_gap().map(|g| c / g)
    }

    /// `|Ψ_l⟩⟨Ψ_l|`.
    pub fn eigenprojector(&self, l: usize) -> OperatorMatrix<R> {
        OperatorMatrix::projector(&self.eigenvectors.matrix().column(l).into_owned())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RMatrices<R: Real> {
    /// `R0_{lk} = ‖P_{A′}(|Ψ_l⟩⟨Ψ_k|)‖²`.
    pub r0: DMatrix<R>,
    /// `R1_{lk} = ⟨P_{A′}(Π_l), P_{A′}(Π_k)⟩`.
    pub r1: DMatrix<R>,
}

fn check_dims<R: Real>(alg: &OperatorAlgebra<R>, model: &HamiltonianModel<R>) -> Result<()> {
    if alg.dim != model.dim() {
        return Err(Error::Shape(format!(
            "Hamiltonian of dimension {} on an algebra of dimension {}",
            model.dim(),
            alg.dim
        )));
    }
    Ok(())
}

/// Coordinates `C_{γ, k d + l} = ⟨f_γ, |Ψ_l⟩⟨Ψ_k|⟩` of all eigen-dyads.
fn dyad_coordinates<R: Real>(alg: &OperatorAlgebra<R>, model: &HamiltonianModel<R>) -> DMatrix<Complex<R>> {
    let v = model.eigenvectors.matrix();
    // vec(|a⟩⟨b|) = conj(b) ⊗ a in the column-stacking convention
    let dyads = v.map(|z| z.conj()).kronecker(v);
    alg.basis_aprime.stacked().adjoint() * dyads
}

/// R matrices of the NRC formula; requires a non-degenerate spectrum.
pub fn r_matrices<R: Real>(alg: &OperatorAlgebra<R>, model: &HamiltonianModel<R>) -> Result<RMatrices<R>> {
    check_dims(alg, model)?;
    if model.degenerate {
        return Err(Error::Domain(
            "R matrices depend on the eigenbasis choice for a degenerate spectrum; use the exact average".into(),
        ));
    }
    let d = alg.dim;
    let c = dyad_coordinates(alg, model);
    let r0 = DMatrix::from_fn(d, d, |l, k| c.column(k * d + l).norm_squared());
    let r1 = DMatrix::from_fn(d, d, |l, k| c.column(l * d + l).dotc(&c.column(k * d + k)).re);
    Ok(RMatrices { r0, r1 })
}

fn frob_minus_half_diag<R: Real>(m: &DMatrix<R>) -> R {
    let diag = m.diagonal().norm_squared();
    m.norm_squared() - diag * real::<R>(0.5)
}

/// `1 − (1/d(A′)) Σ_α (‖R^α‖² − ½‖diag R^α‖²)`. Equals the infinite-time
/// average only when the model satisfies the NRC.
pub fn time_average_nrc<R: Real>(alg: &OperatorAlgebra<R>, model: &HamiltonianModel<R>) -> Result<R> {
    let r = r_matrices(alg, model)?;
    let s = frob_minus_half_diag(&r.r0) + frob_minus_half_diag(&r.r1);
    Ok(R::one() - s / real::<R>(alg.dim_aprime() as f64))
}

/// `1 − ‖R1(A)‖²/d(A) − ‖R1(A′)‖²/d(A′) + Σ_l ‖P_{A′}(Π_l)‖⁴/d(A′)`, the
/// collinear rewriting of the NRC formula.
pub fn time_average_nrc_collinear<R: Real>(alg: &OperatorAlgebra<R>, model: &HamiltonianModel<R>) -> Result<R> {
    check_dims(alg, model)?;
    require_collinear(alg)?;
    let d = alg.dim;
    let proj = |side_a: bool| -> Vec<OperatorMatrix<R>> {
        (0..d)
            .map(|l| {
                let p = model.eigenprojector(l);
                if side_a {
                    alg.project_a(&p)
                } else {
                    alg.project_aprime(&p)
                }
            })
            .collect()
    };
    let gram_sq = |ps: &[OperatorMatrix<R>]| -> R {
        let mut s = R::zero();
        for a in ps {
            for b in ps {
                s += a.hs_inner(b).norm_sqr();
            }
        }
        s
    };
    let pa = proj(true);
    let pap = proj(false);
    let k = real::<R>(alg.dim_a() as f64);
    let kp = real::<R>(alg.dim_aprime() as f64);
    let quartic = pap.iter().fold(R::zero(), |acc, p| acc + p.hs_norm_sqr().powi(2));
    Ok(R::one() - gram_sq(&pa) / k - gram_sq(&pap) / kp + quartic / kp)
}

/// `1 − Σ_s ‖P_s Ω P_s‖² / d(A′)` over resonance classes `s`; exact for any
/// spectrum.
pub fn time_average_exact<R: Real>(alg: &OperatorAlgebra<R>, model: &HamiltonianModel<R>) -> Result<R> {
    check_dims(alg, model)?;
    let d = alg.dim;
    let omega = omega_operators(alg)?.omega;
    let v = model.eigenvectors.matrix();
    let vv = v.kronecker(v);
    let w = vv.adjoint() * omega.matrix() * &vv;
    let mut class_of = vec![0usize; d * d];
    for (s, class) in model.resonance_classes.iter().enumerate() {
        for &(k, h) in class {
            class_of[k * d + h] = s;
        }
    }
    let mut kept = R::zero();
    for c in 0..d * d {
        for r in 0..d * d {
            if class_of[r] == class_of[c] {
                kept += w[(r, c)].norm_sqr();
            }
        }
    }
    Ok(R::one() - kept / real::<R>(alg.dim_aprime() as f64))
}

/// Mean of `G(exp(−iHt))` over `t = jT/M`, `j = 1..M`.
pub fn grid_time_average<R: Real>(
    alg: &OperatorAlgebra<R>,
    model: &HamiltonianModel<R>,
    horizon: R,
    points: usize,
) -> Result<R> {
    check_dims(alg, model)?;
    if !(horizon > R::zero()) || points == 0 {
        return Err(Error::Validation("grid needs T > 0 and M ≥ 1".into()));
    }
    let m = real::<R>(points as f64);
    let values: Vec<R> = (1..=points)
        .into_par_iter()
        .map(|j| {
            let t = horizon * real::<R>(j as f64) / m;
            two_point_value(&alg.basis_aprime, &model.evolution(t))
        })
        .collect();
    Ok(pairwise_sum(&values) / m)
}

fn require_collinear<R: Real>(alg: &OperatorAlgebra<R>) -> Result<()> {
    if alg.blocks.collinear {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "the pair is not collinear (blocks {:?})",
            alg.blocks.pairs
        )))
    }
}

/// `1 − 1/d(A′) − 1/d(A) + 1/(d·d(A′))`, collinear pairs only.
pub fn nrc_upper_bound<R: Real>(alg: &OperatorAlgebra<R>) -> Result<R> {
    require_collinear(alg)?;
    let one = R::one();
    let k = real::<R>(alg.dim_a() as f64);
    let kp = real::<R>(alg.dim_aprime() as f64);
    let d = real::<R>(alg.dim as f64);
    Ok(one - one / kp - one / k + one / (d * kp))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ScramblingWitness<R: Real> {
    /// `max_l ‖P_{A′}(Π_l) − 1/d‖₂`.
    pub commutant_side: R,
    /// `max_l ‖P_A(Π_l) − 1/d‖₂`.
    pub algebra_side: R,
}

impl<R: Real> ScramblingWitness<R> {
    pub fn max(&self) -> R {
        self.commutant_side.max(self.algebra_side)
    }
}

/// Distance of the projected eigenprojectors from `1/d`; zero iff the NRC
/// bound is saturated.
pub fn scrambling_witness<R: Real>(
    alg: &OperatorAlgebra<R>,
    model: &HamiltonianModel<R>,
) -> Result<ScramblingWitness<R>> {
    check_dims(alg, model)?;
    require_collinear(alg)?;
    let d = alg.dim;
    let mixed = OperatorMatrix::<R>::identity(d).scale_real(R::one() / real::<R>(d as f64));
    let mut w = ScramblingWitness {
        commutant_side: R::zero(),
        algebra_side: R::zero(),
    };
    for l in 0..d {
        let p = model.eigenprojector(l);
        w.commutant_side = w.commutant_side.max(alg.project_aprime(&p).distance(&mixed));
        w.algebra_side = w.algebra_side.max(alg.project_a(&p).distance(&mixed));
    }
    Ok(w)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Chaoticity<R: Real> {
    /// `1 − time_average / haar_average`.
    pub epsilon: R,
    pub time_average: R,
    pub haar_average: R,
    /// Purity of the dephased state, for Loschmidt algebras.
    pub dephased_purity: Option<R>,
}

pub fn chaoticity<R: Real>(alg: &OperatorAlgebra<R>, model: &HamiltonianModel<R>) -> Result<Chaoticity<R>> {
    let haar = haar_average_analytic(alg);
    if haar <= R::zero() {
        return Err(Error::UndefinedMetric(
            "Haar average vanishes for this algebra, so the relative gap is undefined".into(),
        ));
    }
    let time_average = time_average_exact(alg, model)?;
    let dephased_purity = match &alg.descriptor {
        Some(AlgebraDescriptor::Loschmidt { psi }) => Some(dephased_purity(model, psi)),
        _ => None,
    };
    Ok(Chaoticity {
        epsilon: R::one() - time_average / haar,
        time_average,
        haar_average: haar,
        dephased_purity,
    })
}

/// `‖Σ_g Q_g |ψ⟩⟨ψ| Q_g‖²` over eigenspace projectors `Q_g`.
pub fn dephased_purity<R: Real>(model: &HamiltonianModel<R>, psi: &nalgebra::DVector<Complex<R>>) -> R {
    let c = model.eigenvectors.matrix().adjoint() * psi;
    model
        .eigen_groups
        .iter()
        .map(|g| g.clone().fold(R::zero(), |acc, l| acc + c[l].norm_sqr()))
        .fold(R::zero(), |acc, w| acc + w * w)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FluctuationRow<R: Real> {
    pub epsilon: R,
    /// Fraction of sampled times with `G_UB − G(U_t) ≥ ε`.
    pub frequency: R,
    /// `(G_UB − time average)/ε`.
    pub markov_bound: R,
}

/// Tail frequencies of `G_UB − G(U_t)` at the given times, collinear only.
pub fn fluctuation_scan<R: Real>(
    alg: &OperatorAlgebra<R>,
    model: &HamiltonianModel<R>,
    times: &[R],
    epsilons: &[R],
) -> Result<Vec<FluctuationRow<R>>> {
    check_dims(alg, model)?;
    require_collinear(alg)?;
    if times.is_empty() {
        return Err(Error::Validation("no sample times".into()));
    }
    let ub = upper_bound(alg);
    let mean = time_average_exact(alg, model)?;
    let values: Vec<R> = times
        .par_iter()
        .map(|&t| two_point_value(&alg.basis_aprime, &model.evolution(t)))
        .collect();
    let n = real::<R>(times.len() as f64);
    Ok(epsilons
        .iter()
        .map(|&eps| {
            let hits = values.iter().filter(|&&g| ub - g >= eps).count();
            FluctuationRow {
                epsilon: eps,
                frequency: real::<R>(hits as f64) / n,
                markov_bound: (ub - mean) / eps,
            }
        })
        .collect())
}
