#![allow(dead_code)]

use std::io::Write;

use gaac_core::operator::ginibre;
use gaac_core::{
    analyze_hamiltonian, build_algebra, gue, haar_unitary, AlgebraDescriptor64 as Desc, HamiltonianModel64,
    OperatorAlgebra64, OperatorMatrix64 as M, RandomSeed, Side,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

pub fn c(x: f64) -> Complex<f64> {
    Complex::new(x, 0.0)
}

pub fn build(desc: Desc) -> OperatorAlgebra64 {
    build_algebra(&desc).unwrap()
}

/// One line per acceptance criterion, written past the test harness capture.
pub fn report(id: u32, name: &str, ok: bool, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "acceptance {id} [{name}]: {status} ({detail})");
}

pub fn basis_state(d: usize, i: usize) -> DVector<Complex<f64>> {
    DVector::from_fn(d, |r, _| c(if r == i { 1.0 } else { 0.0 }))
}

pub fn random_state(d: usize, seed: u64) -> DVector<Complex<f64>> {
    haar_unitary::<f64>(d, RandomSeed::new(seed, 77)).matrix().column(0).into_owned()
}

/// Generators of `⊕_J 1_{n_J} ⊗ L(C^{d_J})`, rotated by a Haar unitary.
pub fn block_generators(pairs: &[(usize, usize)], count: usize, seed: u64) -> Vec<M> {
    let d: usize = pairs.iter().map(|&(n, dj)| n * dj).sum();
    let w = haar_unitary::<f64>(d, RandomSeed::new(seed, 1_000));
    (0..count)
        .map(|g| {
            let mut m = DMatrix::zeros(d, d);
            let mut off = 0;
            for (j, &(n, dj)) in pairs.iter().enumerate() {
                let x = M::new(ginibre::<f64>(dj, RandomSeed::new(seed, (g * 31 + j) as u64))).unwrap();
                let blk = M::identity(n).kron(&x);
                m.view_mut((off, off), (n * dj, n * dj)).copy_from(blk.matrix());
                off += n * dj;
            }
            M::new(m).unwrap().conjugated_by(&w)
        })
        .collect()
}

/// Random block pattern with total dimension at most `max_d`.
pub fn random_pairs(seed: u64, max_d: usize) -> Vec<(usize, usize)> {
    let mut g = gaac_core::operator::Gaussian::new(RandomSeed::new(seed, 5));
    loop {
        let blocks = 1 + (g.uniform() * 3.0) as usize;
        let pairs: Vec<(usize, usize)> = (0..blocks)
            .map(|_| (1 + (g.uniform() * 3.0) as usize, 1 + (g.uniform() * 3.0) as usize))
            .collect();
        let d: usize = pairs.iter().map(|&(n, dj)| n * dj).sum();
        if d <= max_d && d >= 2 {
            return pairs;
        }
    }
}

/// Named algebras with `d ≤ 8`.
pub fn fixtures() -> Vec<(String, OperatorAlgebra64)> {
    vec![
        ("masa d=2".into(), build(Desc::Diagonal { d: 2 })),
        ("masa d=5".into(), build(Desc::Diagonal { d: 5 })),
        ("bipartite 2x2 A".into(), build(Desc::Factor { d_a: 2, d_b: 2, side: Side::A })),
        ("bipartite 2x3 B".into(), build(Desc::Factor { d_a: 2, d_b: 3, side: Side::B })),
        ("bipartite 4x2 A".into(), build(Desc::Factor { d_a: 4, d_b: 2, side: Side::A })),
        ("symmetric d=2".into(), build(Desc::SymmetricSwap { d: 2 })),
        ("z2 d=2".into(), build(Desc::GroupZ2 { d: 2 })),
        ("loschmidt d=5".into(), build(Desc::Loschmidt { psi: random_state(5, 3) })),
        (
            "sigma_z x 1".into(),
            build(Desc::Generators(vec![gaac_core::pauli::z::<f64>().kron(&M::identity(2))])),
        ),
    ]
}

pub fn random_algebra(seed: u64, max_d: usize) -> OperatorAlgebra64 {
    let pairs = random_pairs(seed, max_d);
    let count = 1 + (seed % 3) as usize;
    build(Desc::Generators(block_generators(&pairs, count, seed)))
}

pub fn gue_model(d: usize, seed: u64) -> HamiltonianModel64 {
    analyze_hamiltonian(&gue::<f64>(d, RandomSeed::new(seed, 9)), 1e-9).unwrap()
}

/// `exp(i H)` for a random hermitian `H` in the span of `basis`.
pub fn unitary_in(basis: &gaac_core::OperatorBasis64, seed: u64) -> M {
    let mut g = gaac_core::operator::Gaussian::new(RandomSeed::new(seed, 11));
    let mut h = M::zeros(basis.dim());
    for e in basis.iter() {
        h = &h + &e.scale(Complex::new(g.normal(), g.normal()));
    }
    let model = analyze_hamiltonian(&h.hermitian_part(), 1e-9).unwrap();
    model.evolution(1.0)
}

/// `(|00⟩ ± |11⟩)/√2, (|01⟩ ± |10⟩)/√2` as columns.
pub fn bell_basis() -> M {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let cols = [[s, 0.0, 0.0, s], [s, 0.0, 0.0, -s], [0.0, s, s, 0.0], [0.0, s, -s, 0.0]];
    M::from_fn(4, |r, col| c(cols[col][r]))
}
