use nalgebra::DMatrix;
use num_complex::Complex;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::operator::{
    hermitian_eigen, orthonormalize, random_combination, OperatorBasis, OperatorMatrix, RandomSeed,
};
use crate::util::{group_sorted, real, to_f64};
use crate::{Error, Real, Result, Settings};

/// Multiset `{(n_J, d_J)}`: block `J` is `C^{n_J} ⊗ C^{d_J}` with the commutant
/// acting on the first factor and the algebra on the second.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockStructure {
    /// `(n_J, d_J)` sorted by descending `d_J`, then descending `n_J`.
    pub pairs: Vec<(usize, usize)>,
    pub dim_a: usize,
    pub dim_aprime: usize,
    pub collinear: bool,
    /// `λ` with `d_J = λ n_J` for every block, when collinear.
    pub lambda: Option<Ratio<u64>>,
}

impl BlockStructure {
    pub fn from_pairs(pairs: Vec<(usize, usize)>) -> Self {
        let dim_a = pairs.iter().map(|&(_, d)| d * d).sum();
        let dim_aprime = pairs.iter().map(|&(n, _)| n * n).sum();
        let lambda = pairs
            .first()
            .map(|&(n, d)| Ratio::new(d as u64, n as u64))
            .filter(|l| {
                pairs
                    .iter()
                    .all(|&(n, d)| Ratio::new(d as u64, n as u64) == *l)
            });
        BlockStructure {
            pairs,
            dim_a,
            dim_aprime,
            collinear: lambda.is_some(),
            lambda,
        }
    }

    /// `Σ_J n_J d_J`.
    pub fn dim(&self) -> usize {
        self.pairs.iter().map(|&(n, d)| n * d).sum()
    }

    /// Block structure of the commutant: every pair flipped.
    pub fn swapped(&self) -> Self {
        Self::from_pairs(self.pairs.iter().map(|&(n, d)| (d, n)).collect())
    }

    /// Short stable hash of the block multiset.
    pub fn fingerprint(&self) -> String {
        let mut sorted = self.pairs.clone();
        sorted.sort_unstable();
        let canon = sorted
            .iter()
            .map(|(n, d)| format!("{n}x{d}"))
            .collect::<Vec<_>>()
            .join(",");
        let digest = Sha256::digest(format!("d={};blocks={canon}", self.dim()).as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Orthonormal basis of `span(A) ∩ span(A′)` via principal angles.
///
/// For an algebra/commutant pair the complements of the center inside `A` and
/// `A′` are mutually orthogonal, so every principal cosine is 0 or 1.
fn center_basis<R: Real>(a: &OperatorBasis<R>, ap: &OperatorBasis<R>) -> OperatorBasis<R> {
    let d = a.dim();
    let m = a.stacked().adjoint() * ap.stacked();
    if m.nrows() == 0 || m.ncols() == 0 {
        return OperatorBasis::empty(d);
    }
    let svd = crate::operator::checked_svd(m);
    let u = svd.u.expect("left singular vectors requested");
    let half: R = real(0.5);
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > half)
        .map(|(i, _)| i)
        .collect();
    let mut coeffs = DMatrix::zeros(a.len(), keep.len());
    for (k, &i) in keep.iter().enumerate() {
        coeffs.set_column(k, &u.column(i));
    }
    OperatorBasis::from_stacked(d, a.stacked() * coeffs)
}

/// Projector onto the span of selected columns.
fn column_projector<R: Real>(vecs: &DMatrix<Complex<R>>, cols: std::ops::Range<usize>) -> DMatrix<Complex<R>> {
    let v = vecs.columns(cols.start, cols.len());
    &v * v.adjoint()
}

fn near_integer(x: f64) -> Option<usize> {
    let r = x.round();
    ((x - r).abs() <= 1e-6 && r >= 0.0).then_some(r as usize)
}

fn exact_sqrt(k: usize) -> Option<usize> {
    let r = (k as f64).sqrt().round() as usize;
    (r * r == k).then_some(r)
}

/// Sort key of a block: descending `d_J`, descending `n_J`, then ascending
/// `Tr(Π_J · diag(1, 2, …, d))`.
pub(crate) fn sort_blocks<R: Real>(pairs: &mut Vec<(usize, usize)>, projections: &mut Vec<OperatorMatrix<R>>) {
    let witness = |p: &OperatorMatrix<R>| -> f64 {
        (0..p.dim())
            .map(|i| (i + 1) as f64 * to_f64(p.matrix()[(i, i)].re))
            .sum()
    };
    let mut idx: Vec<usize> = (0..pairs.len()).collect();
    idx.sort_by(|&x, &y| {
        let (nx, dx) = pairs[x];
        let (ny, dy) = pairs[y];
        dy.cmp(&dx)
            .then(ny.cmp(&nx))
            .then(witness(&projections[x]).total_cmp(&witness(&projections[y])))
    });
    *pairs = idx.iter().map(|&i| pairs[i]).collect();
    *projections = idx.iter().map(|&i| projections[i].clone()).collect();
}

fn rank_of_compression<R: Real>(basis: &OperatorBasis<R>, v: &DMatrix<Complex<R>>, tol: f64) -> Result<usize> {
    // V†xV carries the same Hilbert–Schmidt geometry as ΠxΠ with Π = VV†
    let vh = v.adjoint();
    let compressed: Vec<OperatorMatrix<R>> = basis
        .iter()
        .map(|x| OperatorMatrix::from_square(&vh * x.matrix() * v))
        .collect();
    Ok(orthonormalize(&compressed, tol)?.len())
}

/// Center projections and `(n_J, d_J)` multiplicities of an algebra/commutant pair.
pub fn block_decomposition<R: Real>(
    basis_a: &OperatorBasis<R>,
    basis_aprime: &OperatorBasis<R>,
    settings: &Settings,
) -> Result<(BlockStructure, Vec<OperatorMatrix<R>>)> {
    let d = basis_a.dim();
    if basis_aprime.dim() != d {
        return Err(Error::Shape(format!(
            "algebra of dimension {d} paired with commutant of dimension {}",
            basis_aprime.dim()
        )));
    }
    let center = center_basis(basis_a, basis_aprime);
    if center.is_empty() {
        return Err(Error::Decomposition("empty center: A and A′ share no element".into()));
    }

    let mut projections = None;
    for attempt in 0..settings.max_witness_attempts {
        let seed = RandomSeed::new(settings.witness_seed, attempt as u64);
        let w = random_combination(&center, seed).hermitian_part();
        let (vals, vecs) = hermitian_eigen(w.matrix());
        let range = vals[vals.len() - 1] - vals[0];
        let scale = range.max(vals[0].abs()).max(vals[vals.len() - 1].abs());
        let groups = group_sorted(&vals, real::<R>(settings.tol.grouping) * scale);
        if groups.len() == center.len() {
            projections = Some(
                groups
                    .into_iter()
                    .map(|g| {
                        let iso = vecs.columns(g.start, g.len()).into_owned();
                        (OperatorMatrix::from_square(column_projector(&vecs, g)), iso)
                    })
                    .collect::<Vec<_>>(),
            );
            break;
        }
        log::debug!(
            "center witness attempt {attempt}: {} eigenvalue groups for a {}-dimensional center",
            groups.len(),
            center.len()
        );
    }
    let (mut projections, isometries): (Vec<_>, Vec<_>) =
        projections.ok_or(Error::Degeneracy(settings.max_witness_attempts))?.into_iter().unzip();

    let tol = settings.tol.rank;
    let mut pairs = Vec::with_capacity(projections.len());
    for (p, v) in projections.iter().zip(&isometries) {
        let big_n = near_integer(to_f64(p.trace().re))
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Decomposition(format!("non-integral block trace {}", p.trace().re)))?;
        let rank_a = rank_of_compression(basis_a, v, tol)?;
        let rank_ap = rank_of_compression(basis_aprime, v, tol)?;
        let (dj, nj) = match (exact_sqrt(rank_a), exact_sqrt(rank_ap)) {
            (Some(dj), Some(nj)) if dj > 0 && nj > 0 => (dj, nj),
            _ => {
                return Err(Error::Decomposition(format!(
                    "block ranks {rank_a} (A) and {rank_ap} (A′) are not perfect squares"
                )))
            }
        };
        if nj * dj != big_n {
            return Err(Error::Decomposition(format!(
                "block of dimension {big_n} does not factor as n_J·d_J = {nj}·{dj}"
            )));
        }
        pairs.push((nj, dj));
    }
    sort_blocks(&mut pairs, &mut projections);
    let blocks = BlockStructure::from_pairs(pairs);
    if blocks.dim() != d || blocks.dim_a != basis_a.len() || blocks.dim_aprime != basis_aprime.len() {
        return Err(Error::Decomposition(format!(
            "dimension accounting failed: Σn_Jd_J = {} (d = {d}), Σd_J² = {} (dim A = {}), Σn_J² = {} (dim A′ = {})",
            blocks.dim(),
            blocks.dim_a,
            basis_a.len(),
            blocks.dim_aprime,
            basis_aprime.len()
        )));
    }
    Ok((blocks, projections))
}

/// Explicit rotation `H → ⊕_J C^{n_J} ⊗ C^{d_J}`.
///
/// Column `offset_J + p·d_J + m` of `unitary` is `|J, p, m⟩`, the commutant
/// factor index `p` first.
#[derive(Clone, Debug)]
pub struct BlockBasis<R: Real> {
    pub unitary: OperatorMatrix<R>,
    pub pairs: Vec<(usize, usize)>,
    pub offsets: Vec<usize>,
}

impl<R: Real> BlockBasis<R> {
    pub(crate) fn compute(
        basis_aprime: &OperatorBasis<R>,
        pairs: &[(usize, usize)],
        projections: &[OperatorMatrix<R>],
        settings: &Settings,
    ) -> Result<Self> {
        let d = basis_aprime.dim();
        let mut w = DMatrix::zeros(d, d);
        let mut offsets = Vec::with_capacity(pairs.len());
        let mut offset = 0;
        for (j, (&(nj, dj), proj)) in pairs.iter().zip(projections).enumerate() {
            let cols = Self::block_columns(basis_aprime, nj, dj, proj, j as u64, settings)?;
            w.columns_mut(offset, nj * dj).copy_from(&cols);
            offsets.push(offset);
            offset += nj * dj;
        }
        let unitary = OperatorMatrix::from_square(w);
        if !unitary.is_unitary(settings.tol.assertion) {
            return Err(Error::Decomposition(format!(
                "block basis is not unitary (residual {})",
                unitary.unitarity_residual()
            )));
        }
        Ok(BlockBasis {
            unitary,
            pairs: pairs.to_vec(),
            offsets,
        })
    }

    fn block_columns(
        basis_aprime: &OperatorBasis<R>,
        nj: usize,
        dj: usize,
        proj: &OperatorMatrix<R>,
        block: u64,
        settings: &Settings,
    ) -> Result<DMatrix<Complex<R>>> {
        let big_n = nj * dj;
        let (pvals, pvecs) = hermitian_eigen(proj.matrix());
        let d = pvals.len();
        // eigenvalue-1 eigenvectors sit at the top of the ascending spectrum
        let range_basis = pvecs.columns(d - big_n, big_n).into_owned();
        let grouping: R = real(settings.tol.grouping);
        let stream_base = 1000 * (block + 1);

        for attempt in 0..settings.max_witness_attempts as u64 {
            let seed = RandomSeed::new(settings.witness_seed, stream_base + 2 * attempt);
            let h = random_combination(basis_aprime, seed).hermitian_part();
            let hc = range_basis.adjoint() * h.matrix() * &range_basis;
            let (vals, vecs) = hermitian_eigen(&hc);
            let scale = (vals[big_n - 1] - vals[0])
                .max(vals[0].abs())
                .max(vals[big_n - 1].abs());
            let groups = group_sorted(&vals, grouping * scale);
            if groups.len() != nj || groups.iter().any(|g| g.len() != dj) {
                continue;
            }
            let y1 = vecs.columns(groups[0].start, dj).into_owned();
            let mut out = DMatrix::zeros(d, big_n);
            out.columns_mut(0, dj).copy_from(&(&range_basis * &y1));

            let x = random_combination(basis_aprime, seed.with_stream(stream_base + 2 * attempt + 1));
            let xc = range_basis.adjoint() * x.matrix() * &range_basis;
            let xnorm = xc.norm();
            let mut ok = true;
            for (p, g) in groups.iter().enumerate().skip(1) {
                let qp = column_projector(&vecs, g.clone());
                let t = qp * &xc * &y1;
                let c = t.norm() / real::<R>(dj as f64).sqrt();
                if c <= real::<R>(1e-6) * xnorm {
                    ok = false;
                    break;
                }
                let zp = t.map(|z| z / Complex::new(c, R::zero()));
                out.columns_mut(p * dj, dj).copy_from(&(&range_basis * zp));
            }
            if ok {
                return Ok(out);
            }
        }
        Err(Error::Degeneracy(settings.max_witness_attempts))
    }

    pub fn dim(&self) -> usize {
        self.unitary.dim()
    }

    /// `|J, p, m⟩`.
    fn ket(&self, j: usize, p: usize, m: usize) -> nalgebra::DVector<Complex<R>> {
        let (_, dj) = self.pairs[j];
        self.unitary.matrix().column(self.offsets[j] + p * dj + m).into_owned()
    }

    /// Orthogonal basis `e_(J,l,m) = 1_{n_J} ⊗ |l⟩⟨m| / √d_J` of the algebra.
    pub fn structure_basis_a(&self) -> Vec<OperatorMatrix<R>> {
        let mut out = Vec::new();
        for (j, &(nj, dj)) in self.pairs.iter().enumerate() {
            let norm: R = R::one() / real::<R>(dj as f64).sqrt();
            for l in 0..dj {
                for m in 0..dj {
                    let mut e = DMatrix::zeros(self.dim(), self.dim());
                    for p in 0..nj {
                        e += self.ket(j, p, l) * self.ket(j, p, m).adjoint();
                    }
                    out.push(OperatorMatrix::from_square(e).scale_real(norm));
                }
            }
        }
        out
    }

    /// Orthonormal basis `f_(J,p,q) = |p⟩⟨q| ⊗ 1_{d_J} / √d_J` of the commutant.
    pub fn structure_basis_aprime(&self) -> Vec<OperatorMatrix<R>> {
        let mut out = Vec::new();
        for (j, &(nj, dj)) in self.pairs.iter().enumerate() {
            let norm: R = R::one() / real::<R>(dj as f64).sqrt();
            for p in 0..nj {
                for q in 0..nj {
                    let mut f = DMatrix::zeros(self.dim(), self.dim());
                    for m in 0..dj {
                        f += self.ket(j, p, m) * self.ket(j, q, m).adjoint();
                    }
                    out.push(OperatorMatrix::from_square(f).scale_real(norm));
                }
            }
        }
        out
    }

    /// `Σ_J tr_{d_J}(X_J) ⊗ 1_{d_J}/d_J` assembled in the block basis.
    pub fn project_aprime(&self, x: &OperatorMatrix<R>) -> OperatorMatrix<R> {
        self.blockwise(x, true)
    }

    /// `Σ_J 1_{n_J}/n_J ⊗ tr_{n_J}(X_J)` assembled in the block basis.
    pub fn project_a(&self, x: &OperatorMatrix<R>) -> OperatorMatrix<R> {
        self.blockwise(x, false)
    }

    fn blockwise(&self, x: &OperatorMatrix<R>, commutant_side: bool) -> OperatorMatrix<R> {
        let w = self.unitary.matrix();
        let y = w.adjoint() * x.matrix() * w;
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        let zero = Complex::new(R::zero(), R::zero());
        for (j, &(nj, dj)) in self.pairs.iter().enumerate() {
            let o = self.offsets[j];
            let at = |p: usize, m: usize| o + p * dj + m;
            if commutant_side {
                let inv = Complex::new(R::one() / real::<R>(dj as f64), R::zero());
                for p in 0..nj {
                    for q in 0..nj {
                        let t = (0..dj).fold(zero, |acc, m| acc + y[(at(p, m), at(q, m))]);
                        for m in 0..dj {
                            out[(at(p, m), at(q, m))] = t * inv;
                        }
                    }
                }
            } else {
                let inv = Complex::new(R::one() / real::<R>(nj as f64), R::zero());
                for l in 0..dj {
                    for m in 0..dj {
                        let s = (0..nj).fold(zero, |acc, p| acc + y[(at(p, l), at(p, m))]);
                        for p in 0..nj {
                            out[(at(p, l), at(p, m))] = s * inv;
                        }
                    }
                }
            }
        }
        OperatorMatrix::from_square(w * out * w.adjoint())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_structure_arithmetic() {
        let b = BlockStructure::from_pairs(vec![(3, 1), (1, 1)]);
        assert_eq!((b.dim(), b.dim_a, b.dim_aprime), (4, 2, 10));
        assert!(!b.collinear && b.lambda.is_none());

        let f = BlockStructure::from_pairs(vec![(3, 2)]);
        assert!(f.collinear);
        assert_eq!(f.lambda, Some(Ratio::new(2, 3)));
        assert_eq!(f.dim_a * f.dim_aprime, f.dim() * f.dim());

        let masa = BlockStructure::from_pairs(vec![(1, 1); 4]);
        assert_eq!(masa.lambda, Some(Ratio::from_integer(1)));
        assert_eq!(masa.swapped(), masa);
    }

    #[test]
    fn fingerprint_is_order_independent() {
        let a = BlockStructure::from_pairs(vec![(3, 1), (1, 1)]);
        let b = BlockStructure::from_pairs(vec![(1, 1), (3, 1)]);
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), a.swapped().fingerprint());
        assert_eq!(a.fingerprint().len(), 16);
    }

    #[test]
    fn collinear_identity_holds_when_flagged() {
        for pairs in [vec![(2, 4), (1, 2)], vec![(1, 1), (1, 1)], vec![(2, 3)]] {
            let b = BlockStructure::from_pairs(pairs);
            assert!(b.collinear);
            assert_eq!(b.dim_a * b.dim_aprime, b.dim() * b.dim());
        }
        let nc = BlockStructure::from_pairs(vec![(2, 1), (1, 1)]);
        assert!(!nc.collinear);
        assert_ne!(nc.dim_a * nc.dim_aprime, nc.dim() * nc.dim());
    }
}
