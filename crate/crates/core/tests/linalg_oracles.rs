mod common;

use common::{max_diff, taylor_exp};
use mqwalk::linalg::{
    build_chain_hamiltonian, build_two_site_hamiltonian, chain_hamiltonian_with_potentials,
    eigen_exponential, exact_unitary, pauli_exponential, spectral_data,
};
use mqwalk::ModelParams;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn two_site(gamma: f64, u: f64) -> mqwalk::HermitianMatrix {
    build_two_site_hamiltonian(&ModelParams::two_site(gamma, u, 1.0).unwrap()).unwrap()
}

#[test]
fn biased_spectrum_is_plus_minus_sqrt5() {
    let s = spectral_data(&two_site(-1.0, 2.0), 1.0);
    let r5 = 5f64.sqrt();
    assert!((s.energies[0] + r5).abs() < 1e-12);
    assert!((s.energies[1] - r5).abs() < 1e-12);
}

#[test]
fn exponential_matches_taylor_reference() {
    let h = two_site(-1.0, 1.0);
    let u = exact_unitary(&h, 3.0);
    assert!(max_diff(u.matrix(), &taylor_exp(h.matrix(), 3.0)) < 1e-10);
}

#[test]
fn three_routes_agree_on_grid() {
    for gamma in [-2.0, -1.0, -0.3, 0.0, 0.5, 1.0, 7.85] {
        for u in [-1.5, 0.0, 0.31, 1.0, 2.98] {
            for t in [0.1, 0.4, 1.0, 3.0] {
                let h = two_site(gamma, u);
                let pauli = pauli_exponential(&h, t);
                let eigen = eigen_exponential(&h, t);
                let taylor = taylor_exp(h.matrix(), t);
                assert!(
                    max_diff(pauli.matrix(), eigen.matrix()) < 1e-10,
                    "γ={gamma} U={u} t={t}"
                );
                assert!(
                    max_diff(pauli.matrix(), &taylor) < 1e-10,
                    "γ={gamma} U={u} t={t}"
                );
            }
        }
    }
}

#[test]
fn chain_exponential_matches_taylor() {
    for l in [3, 4, 6] {
        let potentials: Vec<f64> = (0..l).map(|j| 0.3 * j as f64 - 0.5).collect();
        let h = chain_hamiltonian_with_potentials(0.9, &potentials).unwrap();
        let u = exact_unitary(&h, 1.7);
        assert!(max_diff(u.matrix(), &taylor_exp(h.matrix(), 1.7)) < 1e-10);
        assert!(u.unitarity_defect() < 1e-12);
    }
}

#[test]
fn chain_hamiltonians_are_hermitian() {
    for l in 2..10 {
        let h = build_chain_hamiltonian(&ModelParams::new(-1.3, 0.7, 1.0, l).unwrap()).unwrap();
        assert!(max_diff(h.matrix(), &h.matrix().adjoint()) < 1e-12);
    }
}

proptest! {
    #[test]
    fn unitary_and_group_property(gamma in -8.0..8.0f64, u in -4.0..4.0f64, t1 in 0.0..5.0f64, t2 in 0.0..5.0f64) {
        let h = two_site(gamma, u);
        let a = exact_unitary(&h, t1);
        let b = exact_unitary(&h, t2);
        prop_assert!(a.unitarity_defect() < 1e-12);
        let ab = a.compose(&b);
        prop_assert!(max_diff(ab.matrix(), exact_unitary(&h, t1 + t2).matrix()) < 1e-10);
    }

    #[test]
    fn two_site_spectrum_and_c(gamma in -8.0..8.0f64, u in -4.0..4.0f64, tau in 0.05..4.0f64) {
        let s = spectral_data(&two_site(gamma, u), tau);
        let w = u.hypot(gamma);
        prop_assert!((s.energies[0] + w).abs() < 1e-10);
        prop_assert!((s.energies[1] - w).abs() < 1e-10);
        prop_assert!((s.c_parameter.unwrap() - (w * tau).cos()).abs() < 1e-12);
        let v = s.eigenvectors.matrix();
        let h = two_site(gamma, u);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(2, s.energies.iter().map(|&e| mqwalk::C64::new(e, 0.0))));
        prop_assert!(max_diff(&(v * d * v.adjoint()), h.matrix()) < 1e-10);
    }

    #[test]
    fn chain_group_property(l in 3usize..7, gamma in -2.0..2.0f64, u in -1.0..1.0f64, t1 in 0.0..3.0f64, t2 in 0.0..3.0f64) {
        let h = build_chain_hamiltonian(&ModelParams::new(gamma, u, 1.0, l).unwrap()).unwrap();
        let ab = exact_unitary(&h, t1).compose(&exact_unitary(&h, t2));
        prop_assert!(max_diff(ab.matrix(), exact_unitary(&h, t1 + t2).matrix()) < 1e-10);
        prop_assert!(exact_unitary(&h, t1).unitarity_defect() < 1e-12);
    }
}
