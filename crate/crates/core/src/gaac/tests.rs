use super::*;
use crate::algebra::build_algebra;
use crate::operator::{fourier_matrix, haar_unitary, pauli, RandomSeed};
use proptest::prelude::*;

type M = OperatorMatrix<f64>;
type Desc = AlgebraDescriptor<f64>;

fn build(desc: Desc) -> OperatorAlgebra<f64> {
    build_algebra(&desc).unwrap()
}

fn bipartite() -> OperatorAlgebra<f64> {
    build(Desc::Factor { d_a: 2, d_b: 2, side: Side::A })
}

fn state(d: usize, seed: u64) -> DVector<Complex<f64>> {
    haar_unitary::<f64>(d, RandomSeed::new(seed, 0)).matrix().column(0).into_owned()
}

#[test]
fn identity_channel_does_not_scramble() {
    for a in [bipartite(), build(Desc::GroupZ2 { d: 2 }), build(Desc::Diagonal { d: 3 })] {
        let r = gaac(&a, &M::identity(a.dim)).unwrap();
        assert!(r.value.abs() < 1e-12);
        assert_eq!(r.route, Route::TwoPoint);
    }
}

#[test]
fn hadamard_on_diagonal_algebra() {
    let a = build(Desc::Diagonal { d: 2 });
    let r = gaac(&a, &pauli::hadamard()).unwrap();
    assert!((r.value - 0.5).abs() < 1e-12);
    assert!((r.upper_bound - 0.5).abs() < 1e-15);
    assert!(r.saturation_residual.unwrap() < 1e-12);
}

#[test]
fn swap_on_bipartite() {
    let a = bipartite();
    let r = gaac(&a, &swap_operator(2)).unwrap();
    assert!((r.value - 0.75).abs() < 1e-12);
    assert!(r.saturation_residual.unwrap() < 1e-12);
}

#[test]
fn non_unitary_is_rejected() {
    let a = bipartite();
    let bad = M::identity(4).scale_real(1.1);
    assert!(matches!(gaac(&a, &bad), Err(Error::Validation(_))));
    assert!(matches!(gaac(&a, &M::identity(3)), Err(Error::Shape(_))));
}

#[test]
fn saturation_residual_identity_on_masa() {
    // ‖P − T‖² = rank P − 1 because T ≤ P
    let a = build(Desc::Diagonal { d: 2 });
    assert!((saturation_residual(&a, &M::identity(2)).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn upper_bound_examples() {
    assert!((upper_bound(&build(Desc::Diagonal { d: 4 })) - 0.75).abs() < 1e-15);
    assert!((upper_bound(&bipartite()) - 0.75).abs() < 1e-15);
    assert!((upper_bound(&build(Desc::GroupZ2 { d: 2 })) - 0.5).abs() < 1e-15);
}

#[test]
fn fourier_saturates_cgp() {
    let u = fourier_matrix::<f64>(3);
    let v = closed_form(&ClosedFormCase::Cgp { d: 3 }, &u).unwrap();
    assert!((v - 2.0 / 3.0).abs() < 1e-12);
}

/// `Tr(S (V⊗1) S (V†⊗1)) = |Tr V|²`, which vanishes for traceless `V`.
fn swap_orthogonal_unitary() -> M {
    pauli::x::<f64>().kron(&M::identity(2))
}

#[test]
fn z2_maximum() {
    let u = swap_orthogonal_unitary();
    assert!(swap_overlap(2, &u).norm() < 1e-12);
    let v = closed_form(&ClosedFormCase::Z2 { d: 2 }, &u).unwrap();
    assert!((v - 0.4).abs() < 1e-12);
    let g = gaac(&build(Desc::GroupZ2 { d: 2 }), &u).unwrap().value;
    assert!((g - 0.4).abs() < 1e-12);
}

#[test]
fn symmetric_identity_is_zero() {
    let v = closed_form(&ClosedFormCase::<f64>::Symmetric { d: 2 }, &M::identity(4)).unwrap();
    assert!(v.abs() < 1e-12);
}

#[test]
fn loschmidt_orthogonal_echo() {
    // U = X on the computational basis: ⟨0|U|0⟩ = 0
    let psi = DVector::from_fn(4, |i, _| Complex::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
    let shift = M::from_fn(4, |i, j| Complex::new(if i == (j + 1) % 4 { 1.0 } else { 0.0 }, 0.0));
    let a = build(Desc::Loschmidt { psi: psi.clone() });
    let v = gaac_omega_oracle(&a, &shift).unwrap();
    assert!((v - 0.4).abs() < 1e-12);
    let c = closed_form(&ClosedFormCase::Loschmidt { psi }, &shift).unwrap();
    assert!((c - 0.4).abs() < 1e-12);
}

#[test]
fn invariance_gives_zero() {
    let a = bipartite();
    let v = haar_unitary::<f64>(2, RandomSeed::new(3, 0));
    for u in [v.kron(&M::identity(2)), M::identity(2).kron(&v)] {
        assert!(gaac_distance_oracle(&a, &u).unwrap().abs() < 1e-12);
        assert!(gaac(&a, &u).unwrap().value.abs() < 1e-12);
    }
}

#[test]
fn swap_overlaps_agree_with_literal_forms() {
    for s in 0..5 {
        let u = haar_unitary::<f64>(6, RandomSeed::new(90, s));
        let lit = literal_swap_overlap(2, 3, &u);
        assert!((realigned_swap_overlap(2, 3, &u) - lit).abs() < 1e-10);
        let u = haar_unitary::<f64>(9, RandomSeed::new(91, s));
        assert!((swap_overlap(3, &u) - literal_full_swap_overlap(3, &u)).norm() < 1e-10);
    }
}

#[test]
fn structure_basis_route_matches() {
    let fixtures = [
        bipartite(),
        build(Desc::GroupZ2 { d: 2 }),
        build(Desc::SymmetricSwap { d: 2 }),
        build(Desc::Loschmidt { psi: state(3, 4) }),
    ];
    for (i, a) in fixtures.iter().enumerate() {
        let u = haar_unitary::<f64>(a.dim, RandomSeed::new(12, i as u64));
        let g = gaac(a, &u).unwrap().value;
        assert!((gaac_structure_basis(a, &u).unwrap() - g).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn routes_agree_and_respect_bounds(which in 0usize..5, seed in any::<u64>()) {
        let a = match which {
            0 => bipartite(),
            1 => build(Desc::Diagonal { d: 4 }),
            2 => build(Desc::GroupZ2 { d: 2 }),
            3 => build(Desc::Loschmidt { psi: state(5, seed) }),
            _ => build(Desc::Factor { d_a: 2, d_b: 3, side: Side::B }),
        };
        let u = haar_unitary::<f64>(a.dim, RandomSeed::new(seed, 1));
        let g = gaac(&a, &u).unwrap();
        prop_assert!((gaac_omega_oracle(&a, &u).unwrap() - g.value).abs() < 1e-9);
        prop_assert!((gaac_distance_oracle(&a, &u).unwrap() - g.value).abs() < 1e-9);
        prop_assert!(g.value >= -1e-10 && g.value <= g.upper_bound + 1e-8);
        let back = gaac(&a, &u.adjoint()).unwrap().value;
        prop_assert!((back - g.value).abs() < 1e-10);
        let case = ClosedFormCase::for_algebra(&a).unwrap();
        prop_assert!((closed_form(&case, &u).unwrap() - g.value).abs() < 1e-9);
    }
}
