use super::*;
use crate::hamiltonians::{assemble_dense, defected_ising_1d, single_site_paulis, Pauli};
use crate::linalg::{c, eigvalsh, hermiticity_residual, max_abs, random_hermitian, trace, trace_norm};
use crate::spectral::{spectral_gap, symmetrize};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ising(n: usize, j: f64) -> CMat {
    assemble_dense(&defected_ising_1d(n, j).unwrap()).unwrap()
}

fn paulis(n: usize) -> Vec<CMat> {
    single_site_paulis(n, &(0..n).collect::<Vec<_>>())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn bohr_frequencies_of_z() {
    let es = Eigensystem::new(&Pauli::Z.matrix(), BOHR_TOL).unwrap();
    assert_eq!(es.eigenvalues.len(), 2);
    assert!(close(es.eigenvalues[0], -1.0, 1e-14) && close(es.eigenvalues[1], 1.0, 1e-14));
    assert_eq!(es.bohr.len(), 3);
    for (b, want) in es.bohr.iter().zip([-2.0, 0.0, 2.0]) {
        assert!(close(*b, want, 1e-14));
    }
}

#[test]
fn zero_hamiltonian_has_single_bohr_frequency() {
    let es = Eigensystem::new(&Mat::zeros(4, 4), BOHR_TOL).unwrap();
    assert_eq!(es.bohr, vec![0.0]);
}

#[test]
fn grouped_bohr_set_matches_pairwise_differences() {
    let es = Eigensystem::new(&ising(3, 2.0), BOHR_TOL).unwrap();
    let mut pairwise: Vec<f64> = Vec::new();
    for a in &es.eigenvalues {
        for b in &es.eigenvalues {
            let v = a - b;
            if !pairwise.iter().any(|p| close(*p, v, 1e-9)) {
                pairwise.push(v);
            }
        }
    }
    pairwise.sort_by(f64::total_cmp);
    assert_eq!(pairwise.len(), es.bohr.len());
    for (p, b) in pairwise.iter().zip(&es.bohr) {
        assert!(close(*p, *b, 1e-9));
    }
    for i in 0..es.dim() {
        for j in 0..es.dim() {
            assert!(close(es.nu(i, j), es.eigenvalues[i] - es.eigenvalues[j], 1e-9));
        }
    }
}

#[test]
fn gibbs_state_at_infinite_temperature() {
    let es = Eigensystem::new(&ising(3, 2.0), BOHR_TOL).unwrap();
    let g = GibbsState::new(&es, 0.0).unwrap();
    assert!(max_abs(&(&g.sigma - identity(8) * Scale(cr(1.0 / 8.0)))) < 1e-14);
}

#[test]
fn gibbs_state_of_z() {
    let es = Eigensystem::new(&Pauli::Z.matrix(), BOHR_TOL).unwrap();
    let g = GibbsState::new(&es, 1.0).unwrap();
    let z = std::f64::consts::E + 1.0 / std::f64::consts::E;
    assert!(close(g.sigma[(0, 0)].re, (-1.0f64).exp() / z, 1e-14));
    assert!(close(g.sigma[(1, 1)].re, 1.0f64.exp() / z, 1e-14));
    assert!(close(trace(&g.sigma).re, 1.0, 1e-12));
    let q2 = &g.quarter * &g.quarter;
    assert!(max_abs(&(&q2 * &q2 - &g.sigma)) < 1e-10);
    assert!(close(g.lambda_min, (-1.0f64).exp() / z, 1e-14));
}

#[test]
fn misaligned_defect_population_is_suppressed() {
    let (j, beta) = (3.0, 1.0);
    let h = ising(3, j);
    let g = GibbsState::new(&Eigensystem::new(&h, BOHR_TOL).unwrap(), beta).unwrap();
    let mut pb = 0.0;
    for s in 0..8usize {
        if (s >> 2) & 1 != (s >> 1) & 1 {
            pb += g.sigma[(s, s)].re;
        }
    }
    assert!(pb <= 10.0 * (-2.0 * beta * j).exp(), "Tr[Π_B σ] = {pb}");
}

#[test]
fn gibbs_rejects_negative_beta() {
    let es = Eigensystem::new(&Pauli::Z.matrix(), BOHR_TOL).unwrap();
    assert!(GibbsState::new(&es, -1.0).is_err());
}

#[test]
fn jump_components_resum_and_pair() {
    let es = Eigensystem::new(&Pauli::Z.matrix(), BOHR_TOL).unwrap();
    let parts = jump_components(&Pauli::X.matrix(), &es);
    assert_eq!(parts.len(), 2);
    let s_plus = &parts.iter().find(|p| close(p.0, 2.0, 1e-12)).unwrap().1;
    let s_minus = &parts.iter().find(|p| close(p.0, -2.0, 1e-12)).unwrap().1;
    assert!(max_abs(&(adjoint(s_plus) - s_minus)) < 1e-14);
    assert!(close(s_plus[(1, 0)].norm(), 0.0, 1e-14) || close(s_plus[(0, 1)].norm(), 0.0, 1e-14));

    let diag = jump_components(&Pauli::Z.matrix(), &es);
    assert_eq!(diag.len(), 1);
    assert_eq!(diag[0].0, 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = random_hermitian(&mut rng, 6);
    let es = Eigensystem::new(&h, BOHR_TOL).unwrap();
    let s = crate::linalg::random_complex(&mut rng, 6, 6);
    let mut sum: CMat = Mat::zeros(6, 6);
    for (_, m) in jump_components(&s, &es) {
        sum += m;
    }
    assert!(max_abs(&(sum - &s)) <= 1e-12 * max_abs(&s).max(1.0) * 10.0);
}

#[test]
fn coherent_term_vanishes_for_trivial_hamiltonian() {
    let es = Eigensystem::new(&identity(4), BOHR_TOL).unwrap();
    let g = coherent_term(&es, &paulis(2), WeightFunction::metropolis(1.0)).unwrap();
    assert!(max_abs(&g) == 0.0);
}

#[test]
fn coherent_term_is_hermitian() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let h = random_hermitian(&mut rng, 4);
    let es = Eigensystem::new(&h, BOHR_TOL).unwrap();
    for w in [WeightFunction::metropolis(1.3), WeightFunction::gaussian(0.7)] {
        let g = coherent_term(&es, &paulis(2), w).unwrap();
        assert!(max_abs(&g) > 0.0);
        assert!(hermiticity_residual(&g) <= 1e-10);
    }
}

#[test]
fn single_qubit_generator_action() {
    let gen = build_ckg_generator(&identity(2), &paulis(1), WeightFunction::metropolis(1.0)).unwrap();
    let z = Pauli::Z.matrix();
    let lz = gen.heisenberg.apply(&z);
    let t0 = theta(0.0);
    assert!(close(t0, 0.617, 1e-3));
    assert!(max_abs(&(lz + &z * Scale(cr(4.0 * t0)))) < 1e-12);
    assert!(max_abs(&gen.heisenberg.apply(&identity(2))) < 1e-14);
}

#[test]
fn generator_annihilates_identity_and_preserves_trace() {
    let h = ising(3, 2.0);
    let gen = build_ckg_generator(&h, &paulis(3), WeightFunction::gaussian(1.0)).unwrap();
    let scale = superop_norm(&gen.heisenberg);
    assert!(max_abs(&gen.heisenberg.apply(&identity(8))) <= 1e-10 * scale);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..5 {
        let x = crate::linalg::random_complex(&mut rng, 8, 8);
        assert!(trace(&gen.schrodinger.apply(&x)).norm() <= 1e-10 * fro_norm(&x) * scale);
    }
}

#[test]
fn ising_generators_are_detailed_balanced() {
    let h = ising(3, 2.0);
    let es = Eigensystem::new(&h, BOHR_TOL).unwrap();
    let sigma = GibbsState::new(&es, 1.0).unwrap();
    for w in [WeightFunction::gaussian(1.0), WeightFunction::metropolis(1.0)] {
        let gen = build_ckg_generator(&h, &paulis(3), w).unwrap();
        let r = detailed_balance_residual(&gen.heisenberg, &sigma).unwrap();
        assert!(r < 1e-10, "{w:?}: {r}");
        assert!(fixed_point_residual(&gen.schrodinger, &sigma).unwrap() <= 1e-10);
    }
}

#[test]
fn random_hamiltonian_generator_is_detailed_balanced() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let h = random_hermitian(&mut rng, 4);
    let es = Eigensystem::new(&h, BOHR_TOL).unwrap();
    let sigma = GibbsState::new(&es, 0.8).unwrap();
    let gen = build_ckg_generator(&h, &paulis(2), WeightFunction::metropolis(0.8)).unwrap();
    assert!(detailed_balance_residual(&gen.heisenberg, &sigma).unwrap() < 1e-10);
    assert!(fixed_point_residual(&gen.schrodinger, &sigma).unwrap() <= 1e-10);
    let lhat = symmetrize(&gen.heisenberg, &sigma).unwrap();
    let eigs = eigvalsh(&lhat).unwrap();
    let norm = eigs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(eigs.iter().all(|&e| e <= 1e-9 * norm));
}

#[test]
fn perturbation_breaks_detailed_balance() {
    let h = ising(3, 2.0);
    let es = Eigensystem::new(&h, BOHR_TOL).unwrap();
    let sigma = GibbsState::new(&es, 1.0).unwrap();
    let gen = build_ckg_generator(&h, &paulis(3), WeightFunction::gaussian(1.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = crate::linalg::random_complex(&mut rng, 64, 64);
    let rel = 1e-3 * fro_norm(&gen.heisenberg.matrix) / fro_norm(&p);
    let pert = Superoperator::from_matrix(&gen.heisenberg.matrix + p * Scale(cr(rel)), 8, Picture::Heisenberg).unwrap();
    assert!(detailed_balance_residual(&pert, &sigma).unwrap() >= 1e-4);
    let zero = Superoperator::zero(8, Picture::Heisenberg);
    assert_eq!(detailed_balance_residual(&zero, &sigma).unwrap(), 0.0);
}

#[test]
fn alpha_coefficients_form_a_gram_matrix() {
    let es = Eigensystem::new(&ising(3, 2.0), BOHR_TOL).unwrap();
    for w in [WeightFunction::metropolis(1.0), WeightFunction::gaussian(1.0)] {
        let nb = es.bohr.len();
        let a = Mat::from_fn(nb, nb, |i, j| cr(alpha_closed(es.bohr[i], es.bohr[j], w)));
        let e = eigvalsh(&a).unwrap();
        assert!(e[0] >= -1e-10, "{w:?}: {}", e[0]);
    }
}

#[test]
fn single_site_paulis_give_unique_fixed_point() {
    let h = ising(3, 2.0);
    let es = Eigensystem::new(&h, BOHR_TOL).unwrap();
    let sigma = GibbsState::new(&es, 1.0).unwrap();
    let gen = build_ckg_generator(&h, &paulis(3), WeightFunction::metropolis(1.0)).unwrap();
    let rep = spectral_gap(&gen.heisenberg, &sigma).unwrap();
    assert_eq!(rep.kernel_dim, 1);
    assert!(rep.gap > 0.0);
}

#[test]
fn quadrature_and_closed_form_generators_agree() {
    let h = ising(3, 1.5);
    let es = Eigensystem::new(&h, BOHR_TOL).unwrap();
    for w in [WeightFunction::metropolis(1.0), WeightFunction::gaussian(1.0)] {
        let pairs: Vec<(CMat, WeightFunction)> = paulis(3).into_iter().map(|s| (s, w)).collect();
        let a = build_ckg_generator_with(&es, &pairs, AlphaMethod::ClosedForm).unwrap();
        let b = build_ckg_generator_with(&es, &pairs, AlphaMethod::Quadrature).unwrap();
        let diff = max_abs(&(&a.heisenberg.matrix - &b.heisenberg.matrix));
        assert!(diff <= 1e-9 * max_abs(&a.heisenberg.matrix), "{w:?}: {diff}");
    }
}

#[test]
fn builder_rejects_mismatched_couplings() {
    let err = build_ckg_generator(&identity(2), &[identity(4)], WeightFunction::metropolis(1.0));
    assert!(matches!(err, Err(Error::DimensionMismatch(_))));
    let err = build_ckg_generator(&identity(2), &paulis(1), WeightFunction::metropolis(0.0));
    assert!(err.is_err());
}

#[test]
fn superoperator_tensor_matches_kron_action() {
    let a = build_ckg_generator(&Pauli::Z.matrix(), &paulis(1), WeightFunction::metropolis(1.0)).unwrap();
    let id = Superoperator::identity(2, Picture::Heisenberg);
    let t = a.heisenberg.tensor(&id);
    let x = Pauli::X.matrix();
    let y = Pauli::Y.matrix();
    let lhs = t.apply(&kron(&x, &y));
    let rhs = kron(&a.heisenberg.apply(&x), &y);
    assert!(max_abs(&(lhs - rhs)) < 1e-13);
    let tn = trace_norm(&(Pauli::Z.matrix() * Scale(c(0.0, 1.0)))).unwrap();
    assert!(close(tn, 2.0, 1e-12));
}
