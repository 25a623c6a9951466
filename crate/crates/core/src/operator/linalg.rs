use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex;

use super::OperatorMatrix;
use crate::util::real;
use crate::{Error, Real, Result};

type CSvd<R> = SVD<Complex<R>, nalgebra::Dyn, nalgebra::Dyn>;

fn svd_error<R: Real>(m: &DMatrix<Complex<R>>, svd: &CSvd<R>) -> Option<R> {
    let (u, v_t) = (svd.u.as_ref()?, svd.v_t.as_ref()?);
    let k = svd.singular_values.len();
    let sigma = DMatrix::from_diagonal(&svd.singular_values.map(|s| Complex::new(s, R::zero())));
    let recompose = (u * sigma * v_t - m).norm();
    let id = DMatrix::<Complex<R>>::identity(k, k);
    let ortho = (u.adjoint() * u - &id).norm().max((v_t * v_t.adjoint() - &id).norm());
    Some(recompose.max(ortho * m.norm().max(R::one())))
}

/// SVD through a QR factorisation; only the triangular factor is decomposed.
fn qr_svd<R: Real>(m: &DMatrix<Complex<R>>) -> CSvd<R> {
    if m.nrows() < m.ncols() {
        let t = qr_svd(&m.adjoint());
        return SVD {
            u: t.v_t.map(|v| v.adjoint()),
            v_t: t.u.map(|u| u.adjoint()),
            singular_values: t.singular_values,
        };
    }
    let qr = m.clone().qr();
    let inner = SVD::new(qr.r(), true, true);
    SVD {
        u: inner.u.map(|u| qr.q() * u),
        v_t: inner.v_t,
        singular_values: inner.singular_values,
    }
}

/// SVD with both factors, checked by recomposition and orthonormality.
///
/// nalgebra's complex SVD occasionally returns factors that do not reproduce
/// rank-deficient input, so several factorisations are tried and the first
/// one that checks out at rounding level is kept.
pub(crate) fn checked_svd<R: Real>(m: DMatrix<Complex<R>>) -> CSvd<R> {
    let eps = R::default_epsilon();
    let accept = eps * real::<R>(1e3) * m.norm().max(R::one()) * real::<R>(((m.nrows() + m.ncols()) as f64).sqrt());
    let plain = || Some(SVD::new(m.clone(), true, true));
    let via_qr = || Some(qr_svd(&m));
    // strongly rectangular input is cheaper through the triangular factor
    let lopsided = m.nrows() > 2 * m.ncols() || m.ncols() > 2 * m.nrows();
    let (first, second): (&dyn Fn() -> Option<CSvd<R>>, &dyn Fn() -> Option<CSvd<R>>) =
        if lopsided { (&via_qr, &plain) } else { (&plain, &via_qr) };
    let attempts: [&dyn Fn() -> Option<CSvd<R>>; 4] = [
        first,
        second,
        &|| SVD::try_new(m.clone(), true, true, eps * real::<R>(1e-2), 10_000),
        &|| SVD::try_new(m.clone(), true, true, eps * real::<R>(1e2), 10_000),
    ];
    let mut best: Option<(R, CSvd<R>)> = None;
    for attempt in attempts {
        let Some(svd) = attempt() else { continue };
        let Some(err) = svd_error(&m, &svd) else { continue };
        if err <= accept {
            return svd;
        }
        log::debug!("svd check failed with error {:e}", crate::util::to_f64(err));
        if best.as_ref().is_none_or(|(e, _)| err < *e) {
            best = Some((err, svd));
        }
    }
    log::warn!("no SVD attempt passed the recomposition check");
    best.map(|(_, s)| s).expect("at least one SVD attempt succeeds")
}

/// Hilbert–Schmidt inner product `Tr(A† B)`.
pub fn hs_inner<R: Real>(a: &OperatorMatrix<R>, b: &OperatorMatrix<R>) -> Result<Complex<R>> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!(
            "hs_inner of {}x{} and {}x{} operators",
            a.dim(),
            a.dim(),
            b.dim(),
            b.dim()
        )));
    }
    Ok(a.hs_inner(b))
}

/// Trace over every tensor factor not listed in `keep`.
///
/// Factors are ordered as in `kron`: the first factor is the most significant
/// index. Kept factors appear in ascending order in the result.
pub fn partial_trace<R: Real>(
    x: &OperatorMatrix<R>,
    factor_dims: &[usize],
    keep: &[usize],
) -> Result<OperatorMatrix<R>> {
    let total: usize = factor_dims.iter().product();
    if factor_dims.is_empty() || factor_dims.contains(&0) || total != x.dim() {
        return Err(Error::Shape(format!(
            "factor dimensions {factor_dims:?} do not multiply to {}",
            x.dim()
        )));
    }
    if keep.is_empty() {
        return Err(Error::ScalarReduction);
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&k| k >= factor_dims.len()) {
        return Err(Error::Shape(format!(
            "keep index {bad} out of range for {} factors",
            factor_dims.len()
        )));
    }
    let traced: Vec<usize> = (0..factor_dims.len()).filter(|k| !kept.contains(k)).collect();

    // stride of each factor in the full index
    let mut strides = vec![1usize; factor_dims.len()];
    for k in (0..factor_dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * factor_dims[k + 1];
    }
    let offsets = |factors: &[usize], mut idx: usize| -> usize {
        let mut off = 0;
        for &f in factors.iter().rev() {
            off += (idx % factor_dims[f]) * strides[f];
            idx /= factor_dims[f];
        }
        off
    };
    let dk: usize = kept.iter().map(|&k| factor_dims[k]).product();
    let dt: usize = traced.iter().map(|&k| factor_dims[k]).product();
    let kept_off: Vec<usize> = (0..dk).map(|i| offsets(&kept, i)).collect();
    let traced_off: Vec<usize> = (0..dt).map(|i| offsets(&traced, i)).collect();

    let m = x.matrix();
    let out = DMatrix::from_fn(dk, dk, |r, c| {
        traced_off.iter().fold(Complex::new(R::zero(), R::zero()), |acc, &t| {
            acc + m[(kept_off[r] + t, kept_off[c] + t)]
        })
    });
    Ok(OperatorMatrix::from_square(out))
}

/// Stacks row blocks and compresses them with successive QR steps so the
/// result has at most `ncols` rows and the same row space (hence the same
/// singular values and nullspace) as the full stack.
pub(crate) fn compressed_stack<R: Real>(
    ncols: usize,
    blocks: impl IntoIterator<Item = DMatrix<Complex<R>>>,
) -> DMatrix<Complex<R>> {
    let mut acc: DMatrix<Complex<R>> = DMatrix::zeros(0, ncols);
    for block in blocks {
        debug_assert_eq!(block.ncols(), ncols);
        let rows = acc.nrows() + block.nrows();
        let mut stacked = DMatrix::zeros(rows, ncols);
        stacked.rows_mut(0, acc.nrows()).copy_from(&acc);
        stacked.rows_mut(acc.nrows(), block.nrows()).copy_from(&block);
        acc = if rows > ncols { stacked.qr().r() } else { stacked };
    }
    acc
}

/// Orthonormal basis of `{v : M v = 0}` with singular-value threshold `tol·σ_max`.
pub fn nullspace<R: Real>(m: &DMatrix<Complex<R>>, tol: f64) -> Vec<DVector<Complex<R>>> {
    nullspace_with_floor(m, tol, R::zero())
}

/// Singular values below `tol · max(σ_max, floor)` count as zero.
pub(crate) fn nullspace_with_floor<R: Real>(m: &DMatrix<Complex<R>>, tol: f64, floor: R) -> Vec<DVector<Complex<R>>> {
    let n = m.ncols();
    if n == 0 {
        return Vec::new();
    }
    let reduced = if m.nrows() > 2 * n {
        compressed_stack(n, std::iter::once(m.clone()))
    } else {
        m.clone()
    };
    // pad to square so the SVD returns a full set of right singular vectors
    let square = if reduced.nrows() < n {
        let mut sq = DMatrix::zeros(n, n);
        sq.rows_mut(0, reduced.nrows()).copy_from(&reduced);
        sq
    } else {
        reduced
    };
    let rows = square.nrows();
    let svd = checked_svd(square);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma_max = svd.singular_values.iter().fold(R::zero(), |a, &b| a.max(b)).max(floor);
    if sigma_max == R::zero() {
        return (0..n)
            .map(|i| {
                let mut e = DVector::zeros(n);
                e[i] = Complex::new(R::one(), R::zero());
                e
            })
            .collect();
    }
    let threshold = real::<R>(tol) * sigma_max;
    // when rows > n the SVD is thin with n singular values; otherwise square
    debug_assert!(rows >= n);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= threshold)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect()
}

/// Superoperator of `X ↦ [X, B]` in the column-stacked convention:
/// `Bᵀ ⊗ 1 − 1 ⊗ B`.
pub(crate) fn commutator_superoperator<R: Real>(b: &OperatorMatrix<R>) -> DMatrix<Complex<R>> {
    let d = b.dim();
    let id = DMatrix::<Complex<R>>::identity(d, d);
    b.matrix().transpose().kronecker(&id) - id.kronecker(b.matrix())
}

/// Superoperator of `X ↦ U X U†`: `Ū ⊗ U`.
pub(crate) fn conjugation_superoperator<R: Real>(u: &OperatorMatrix<R>) -> DMatrix<Complex<R>> {
    u.matrix().conjugate().kronecker(u.matrix())
}

/// Swap `S|i,j⟩ = |j,i⟩` on `C^d ⊗ C^d`.
pub fn swap_operator<R: Real>(d: usize) -> OperatorMatrix<R> {
    tensor_permutation(&[d, d], &[1, 0])
}

/// Permutation of tensor factors: output factor `k` carries input factor `perm[k]`,
/// i.e. `|i_0 … i_{n−1}⟩ ↦ |i_{perm[0]} … i_{perm[n−1]}⟩`.
pub fn tensor_permutation<R: Real>(dims: &[usize], perm: &[usize]) -> OperatorMatrix<R> {
    assert_eq!(dims.len(), perm.len());
    let total: usize = dims.iter().product();
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut m = DMatrix::zeros(total, total);
    let mut digits = vec![0usize; dims.len()];
    for idx in 0..total {
        let mut rem = idx;
        for k in (0..dims.len()).rev() {
            digits[k] = rem % dims[k];
            rem /= dims[k];
        }
        let mut out = 0;
        for (k, &p) in perm.iter().enumerate() {
            out = out * out_dims[k] + digits[p];
        }
        m[(out, idx)] = Complex::new(R::one(), R::zero());
    }
    OperatorMatrix::from_square(m)
}

/// Eigendecomposition of the hermitian part of `m`, eigenvalues ascending.
pub(crate) fn hermitian_eigen<R: Real>(m: &DMatrix<Complex<R>>) -> (Vec<R>, DMatrix<Complex<R>>) {
    let half: R = real(0.5);
    let herm = (m + m.adjoint()).map(|z| z * half);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(m.nrows(), order.len());
    for (out, &i) in order.iter().enumerate() {
        vectors.set_column(out, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::matrix::pauli;
    use crate::operator::{haar_unitary, RandomSeed};

    type M = OperatorMatrix<f64>;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn hs_inner_examples() {
        assert_eq!(hs_inner(&M::identity(3), &M::identity(3)).unwrap(), c(3.0));
        let s = swap_operator::<f64>(2);
        assert!((hs_inner(&s, &s).unwrap() - c(4.0)).norm() < 1e-14);
        assert_eq!(hs_inner(&pauli::x(), &pauli::z()).unwrap(), c(0.0));
        assert!(matches!(hs_inner(&M::identity(2), &M::identity(3)), Err(Error::Shape(_))));
    }

    /// Index-contraction oracle for tracing the second of two factors.
    fn trace_second_oracle(x: &M, da: usize, db: usize) -> M {
        M::from_fn(da, |i, j| {
            let mut acc = c(0.0);
            for k in 0..db {
                acc += x.matrix()[(i * db + k, j * db + k)];
            }
            acc
        })
    }

    #[test]
    fn partial_trace_examples() {
        let rho_a = M::from_fn(2, |i, j| match (i, j) {
            (0, 0) => c(0.7),
            (1, 1) => c(0.3),
            (0, 1) => Complex::new(0.1, 0.2),
            _ => Complex::new(0.1, -0.2),
        });
        let rho_b = M::from_real_diagonal(&[0.25, 0.25, 0.5]);
        let x = rho_a.kron(&rho_b);
        let got = partial_trace(&x, &[2, 3], &[0]).unwrap();
        assert!(got.distance(&rho_a) < 1e-14);

        let s = swap_operator::<f64>(2);
        let oracle = trace_second_oracle(&s, 2, 2);
        assert!(oracle.distance(&M::identity(2)) < 1e-14);
        assert!(partial_trace(&s, &[2, 2], &[0]).unwrap().distance(&oracle) < 1e-14);

        let id = partial_trace(&M::identity(4), &[2, 2], &[1]).unwrap();
        assert!(id.distance(&M::identity(2).scale_real(2.0)) < 1e-14);
    }

    #[test]
    fn partial_trace_errors() {
        assert!(matches!(partial_trace(&M::identity(4), &[2, 3], &[0]), Err(Error::Shape(_))));
        assert!(matches!(partial_trace(&M::identity(4), &[2, 2], &[]), Err(Error::ScalarReduction)));
        assert!(matches!(partial_trace(&M::identity(4), &[2, 2], &[2]), Err(Error::Shape(_))));
    }

    #[test]
    fn partial_trace_matches_oracle_on_random_three_factor_operator() {
        let x = haar_unitary::<f64>(12, RandomSeed::new(3, 0));
        let got = partial_trace(&x, &[2, 2, 3], &[0, 1]).unwrap();
        assert!(got.distance(&trace_second_oracle(&x, 4, 3)) < 1e-12);
    }

    #[test]
    fn nullspace_examples() {
        let id = DMatrix::<Complex<f64>>::identity(3, 3);
        assert!(nullspace(&id, 1e-10).is_empty());
        assert_eq!(nullspace(&DMatrix::<Complex<f64>>::zeros(3, 3), 1e-10).len(), 3);
    }

    #[test]
    fn nullspace_of_sigma_z_commutator_is_the_diagonal() {
        // Oracle: [X, σz] = 0 forces X_01 = X_10 = 0 while the diagonal is free.
        let m = commutator_superoperator(&pauli::z::<f64>());
        let null = nullspace(&m, 1e-10);
        assert_eq!(null.len(), 2);
        for v in &null {
            let x = M::from_vectorized(2, v.as_slice()).unwrap();
            assert!(x.matrix()[(0, 1)].norm() < 1e-12 && x.matrix()[(1, 0)].norm() < 1e-12);
        }
    }

    #[test]
    fn nullspace_handles_wide_and_tall() {
        // wide: one row, kernel of dimension 2
        let wide = DMatrix::from_row_slice(1, 3, &[c(1.0), c(1.0), c(0.0)]);
        assert_eq!(nullspace(&wide, 1e-10).len(), 2);
        // tall: many repeated rows
        let tall = DMatrix::from_fn(10, 2, |_, j| if j == 0 { c(1.0) } else { c(0.0) });
        let null = nullspace(&tall, 1e-10);
        assert_eq!(null.len(), 1);
        assert!(null[0][0].norm() < 1e-12);
    }

    #[test]
    fn swap_examples() {
        let s1 = swap_operator::<f64>(1);
        assert_eq!(s1, M::identity(1));
        let s = swap_operator::<f64>(2);
        // |01⟩ = index 1, |10⟩ = index 2
        assert_eq!(s.matrix()[(2, 1)], c(1.0));
        assert_eq!(s.matrix()[(1, 2)], c(1.0));
        assert!(s.is_unitary(1e-14) && s.is_hermitian(1e-14));
        for d in 1..5 {
            assert!((swap_operator::<f64>(d).trace() - c(d as f64)).norm() < 1e-14);
        }
    }

    #[test]
    fn eigen_sorted_ascending() {
        let h = M::from_real_diagonal(&[3.0, -1.0, 2.0]);
        let (vals, vecs) = hermitian_eigen(h.matrix());
        assert_eq!(vals.len(), 3);
        assert!((vals[0] + 1.0).abs() < 1e-12 && (vals[2] - 3.0).abs() < 1e-12);
        assert!(M::from_square(vecs).is_unitary(1e-12));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]

        #[test]
        fn checked_svd_recomposes_rank_deficient_input(
            rows in 1usize..10,
            cols in 1usize..10,
            rank in 0usize..4,
            seed in proptest::prelude::any::<u64>(),
        ) {
            let rank = rank.min(rows).min(cols);
            let a = crate::operator::ginibre::<f64>(rows.max(cols), crate::operator::RandomSeed::new(seed, 0));
            let b = crate::operator::ginibre::<f64>(rows.max(cols), crate::operator::RandomSeed::new(seed, 1));
            let m = a.view((0, 0), (rows, rank)) * b.view((0, 0), (rank, cols));
            let svd = checked_svd(m.clone());
            proptest::prop_assert!(svd_error(&m, &svd).unwrap() < 1e-11);
            let big = svd.singular_values.iter().filter(|&&s| s > 1e-10 * m.norm().max(1.0)).count();
            proptest::prop_assert_eq!(big, rank);
        }
    }

    #[test]
    fn checked_svd_on_real_overlap_matrix() {
        let mut m = DMatrix::zeros(4, 4);
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            m[(i, j)] = c(0.5);
        }
        let svd = checked_svd(m.clone());
        assert!(svd_error(&m, &svd).unwrap() < 1e-13);
        let top = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
        assert!((top - 1.0).abs() < 1e-13);
    }
}
