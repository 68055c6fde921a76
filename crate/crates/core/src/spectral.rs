//! KMS geometry, symmetrized generators, spectral gaps and restricted-generator checks.

use faer::{Mat, Scale};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{
    a_side_eigenbasis, assemble_dense, check_commuting_cut, compress_onto, pauli_string_matrix,
    HamiltonianSpec, Pauli,
};
use crate::lindblad::{
    build_ckg_generator, build_ckg_generator_with, AlphaMethod, Eigensystem, GibbsState, Picture,
    Superoperator, WeightFunction, BOHR_TOL,
};
use crate::linalg::{
    adjoint, cr, eigh, eigvalsh, fro_norm, hermiticity_residual, identity, kron, outer,
    random_complex, trace, transpose, vec_op, CMat, C64,
};

/// Default relative kernel threshold.
pub const KERNEL_TOL: f64 = 1e-9;

/// `⟨X, Y⟩_σ = Tr[σ^{1/2} X† σ^{1/2} Y]`.
pub fn kms_inner(x: &CMat, y: &CMat, sigma: &GibbsState) -> C64 {
    let a = &sigma.half * adjoint(x) * &sigma.half * y;
    trace(&a)
}

pub fn kms_norm(x: &CMat, sigma: &GibbsState) -> f64 {
    kms_inner(x, x, sigma).re.max(0.0).sqrt()
}

/// Vectorized `Φ(X) = σ^{1/4} X σ^{1/4}` and its inverse.
pub fn kms_isometry(sigma: &GibbsState) -> (CMat, CMat) {
    (
        kron(&transpose(&sigma.quarter), &sigma.quarter),
        kron(&transpose(&sigma.inv_quarter), &sigma.inv_quarter),
    )
}

/// `L̂ = Φ ∘ L ∘ Φ⁻¹`, Hermitian exactly when `L` is KMS self-adjoint.
pub fn symmetrize(l: &Superoperator, sigma: &GibbsState) -> Result<CMat> {
    let heis = match l.picture {
        Picture::Heisenberg => l.clone(),
        Picture::Schrodinger => l.adjoint(),
    };
    if heis.dim != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "generator on dimension {}, state on dimension {}",
            heis.dim,
            sigma.dim()
        )));
    }
    let (phi, phi_inv) = kms_isometry(sigma);
    let lhat = &phi * &heis.matrix * &phi_inv;
    let r = hermiticity_residual(&lhat);
    if r > 1e-8 {
        return Err(Error::NotDetailedBalanced(r));
    }
    Ok(crate::linalg::hermitian_part(&lhat))
}

/// Result of a gap computation on `−L̂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub gap: f64,
    pub kernel_dim: usize,
    pub kms_norm: f64,
    #[serde(rename = "eigs")]
    pub eigenvalue_tail: Vec<f64>,
    pub tol: f64,
}

/// Gap of a positive semidefinite matrix with the kernel-ambiguity guard.
pub fn gap_of_psd(neg_lhat: &CMat, tol: f64) -> Result<GapReport> {
    let eigs = eigvalsh(neg_lhat)?;
    gap_from_eigenvalues(&eigs, tol)
}

pub fn gap_from_eigenvalues(eigs: &[f64], tol: f64) -> Result<GapReport> {
    let norm = eigs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let thr = tol * norm;
    let kernel_dim = eigs.iter().take_while(|&&e| e <= thr).count();
    let gap = match eigs.get(kernel_dim) {
        Some(&g) if g < 10.0 * thr => return Err(Error::AmbiguousKernel { value: g, threshold: thr }),
        Some(&g) => g,
        None => 0.0,
    };
    Ok(GapReport {
        gap,
        kernel_dim,
        kms_norm: eigs.last().copied().unwrap_or(0.0).max(0.0),
        eigenvalue_tail: eigs.iter().take(8).copied().collect(),
        tol: thr,
    })
}

/// Spectral gap of a detailed-balanced generator in the KMS geometry.
pub fn spectral_gap(l: &Superoperator, sigma: &GibbsState) -> Result<GapReport> {
    spectral_gap_with_tol(l, sigma, KERNEL_TOL)
}

pub fn spectral_gap_with_tol(l: &Superoperator, sigma: &GibbsState, tol: f64) -> Result<GapReport> {
    let lhat = symmetrize(l, sigma)?;
    gap_of_psd(&(-lhat), tol)
}

/// Largest eigenvalue of `−L̂`.
pub fn kms_operator_norm(l: &Superoperator, sigma: &GibbsState) -> Result<f64> {
    let lhat = symmetrize(l, sigma)?;
    let eigs = eigvalsh(&(-lhat))?;
    Ok(eigs.iter().fold(0.0f64, |m, x| m.max(x.abs())))
}

/// Outcome of one randomized property family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropertyCase {
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    pub worst_slack: f64,
}

impl PropertyCase {
    fn new(name: &str) -> Self {
        Self { name: name.into(), trials: 0, violations: 0, worst_slack: f64::INFINITY }
    }

    fn record(&mut self, slack: f64, tol: f64) {
        self.trials += 1;
        self.worst_slack = self.worst_slack.min(slack);
        if slack < -tol {
            self.violations += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn psd_in(basis: &CMat, eigs: &[f64]) -> CMat {
    let d = basis.nrows();
    let mut m: CMat = Mat::zeros(d, d);
    for (k, &e) in eigs.iter().enumerate() {
        let v = Mat::from_fn(d, 1, |i, _| basis[(i, k)]);
        m += outer(&v) * Scale(cr(e));
    }
    m
}

fn psd_gap(m: &CMat) -> Result<f64> {
    let eigs = eigvalsh(m)?;
    let norm = eigs.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let thr = 1e-9 * norm.max(1e-300);
    Ok(eigs.into_iter().find(|&e| e > thr).unwrap_or(0.0))
}

/// Randomized checks of the gap-composition and ratio bounds.
pub fn gap_composition_suite(seed: u64, trials: usize) -> Result<Vec<PropertyCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = 1e-10;
    let mut kernel_case = PropertyCase::new("kernel_agreement");
    let mut commuting = PropertyCase::new("commuting_pair");
    let mut inner_bound = PropertyCase::new("kernel_inner_bound");
    let mut ratio = PropertyCase::new("ratio_inequality");
    for _ in 0..trials {
        let d = rng.random_range(3..=7);
        let u = crate::linalg::random_unitary(&mut rng, d);
        let kdim = rng.random_range(1..d);

        // ker(A + B) = ker(B): A lives on the range of B.
        let b_eigs: Vec<f64> = (0..d).map(|k| if k < kdim { 0.0 } else { rng.random_range(0.05..3.0) }).collect();
        let b = psd_in(&u, &b_eigs);
        let sub = Mat::from_fn(d, d - kdim, |i, j| u[(i, kdim + j)]);
        let g = random_complex(&mut rng, d - kdim, d - kdim);
        let a = &sub * (&g * adjoint(&g)) * adjoint(&sub);
        let gb = psd_gap(&b)?;
        kernel_case.record(psd_gap(&(&a + &b))? - gb, tol * (1.0 + gb));

        // Commuting pair sharing an eigenbasis with a common kernel vector.
        let ea: Vec<f64> = (0..d).map(|k| if k == 0 || rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.05..3.0) }).collect();
        let eb: Vec<f64> = (0..d).map(|k| if k == 0 || rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.05..3.0) }).collect();
        let ca = psd_in(&u, &ea);
        let cb = psd_in(&u, &eb);
        let sum_gap = psd_gap(&(&ca + &cb))?;
        let min_g = [psd_gap(&ca)?, psd_gap(&cb)?].into_iter().filter(|&g| g > 0.0).fold(f64::INFINITY, f64::min);
        if min_g.is_finite() {
            commuting.record(sum_gap - min_g, tol * (1.0 + min_g));
        }

        // A with a kernel, B positive on that kernel: A + B ⪰ g_A g_B / (g_A + ‖B‖).
        let ea3: Vec<f64> = (0..d).map(|k| if k < kdim { 0.0 } else { rng.random_range(0.05..3.0) }).collect();
        let a3 = psd_in(&u, &ea3);
        let gb3 = random_complex(&mut rng, d, d);
        let b3 = &gb3 * adjoint(&gb3) * Scale(cr(1.0 / d as f64));
        let ker = Mat::from_fn(d, kdim, |i, j| u[(i, j)]);
        let gb_val = eigvalsh(&(adjoint(&ker) * &b3 * &ker))?[0];
        let ga = psd_gap(&a3)?;
        let bnorm = *eigvalsh(&b3)?.last().unwrap();
        let lower = ga * gb_val / (ga + bnorm);
        let lmin = eigvalsh(&(&a3 + &b3))?[0];
        inner_bound.record(lmin - lower, tol * (1.0 + bnorm));

        let t: Vec<f64> = (0..4).map(|_| rng.random_range(1e-3..10.0)).collect();
        let lhs = (t[0] + t[1]) / (t[2] + t[3]);
        let rhs = (t[0] / t[2]).min(t[1] / t[3]);
        ratio.record(lhs - rhs, tol * lhs.abs().max(1.0));
    }
    Ok(vec![kernel_case, commuting, inner_bound, ratio])
}

/// Options for [`partial_lindbladian_check`].
#[derive(Debug, Clone, Copy)]
pub struct PartialOptions {
    pub seed: u64,
    pub samples: usize,
    /// Largest full-system dimension for the superoperator-level factorization test.
    pub max_full_dim: usize,
}

impl Default for PartialOptions {
    fn default() -> Self {
        Self { seed: 42, samples: 10, max_full_dim: 32 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartialBlock {
    pub index: usize,
    pub factorization_residual: Option<f64>,
    pub fixed_point_error: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartialReport {
    pub blocks: Vec<PartialBlock>,
    pub g_b: f64,
    pub max_factorization_residual: Option<f64>,
    pub max_fixed_point_error: f64,
}

/// Single-site Paulis on the B register of an (A, B)-ordered system, as full operators.
fn b_couplings(na: usize, nb: usize) -> Vec<CMat> {
    let ia = identity(1 << na);
    (0..nb)
        .flat_map(|s| Pauli::ALL.into_iter().map(move |p| (s, p)))
        .map(|(s, p)| kron(&ia, &pauli_string_matrix(nb, &[(s, p)])))
        .collect()
}

fn b_local_couplings(nb: usize) -> Vec<CMat> {
    crate::hamiltonians::single_site_paulis(nb, &(0..nb).collect::<Vec<_>>())
}

fn null_vector(m: &CMat) -> Result<CMat> {
    let gram = adjoint(m) * m;
    let (_, vecs) = eigh(&gram)?;
    Ok(Mat::from_fn(m.ncols(), 1, |i, _| vecs[(i, 0)]))
}

/// Partial generators `L_(⟨i_A|H|i_A⟩, β, P_B)` for every A-basis vector, with consistency checks.
pub fn partial_lindbladian_check(
    spec: &HamiltonianSpec,
    w: WeightFunction,
    opts: PartialOptions,
) -> Result<PartialReport> {
    let cut = check_commuting_cut(spec)?;
    let basis = a_side_eigenbasis(&cut, opts.seed)?;
    let (na, nb) = (cut.a_sites.len(), cut.b_sites.len());
    let (da, db) = (cut.d_a(), cut.d_b());
    let h = cut.to_ab_order(&assemble_dense(spec)?);
    let full_es = Eigensystem::new(&h, BOHR_TOL)?;
    let shift = full_es.eigenvalues[0];
    let boltz = crate::linalg::spectral_fn(&full_es.eigenvalues, &full_es.eigenvectors, |x| {
        (-w.beta * (x - shift)).exp()
    });

    let full = if da * db <= opts.max_full_dim {
        Some(build_ckg_generator_with(
            &full_es,
            &b_couplings(na, nb).into_iter().map(|s| (s, w)).collect::<Vec<_>>(),
            AlphaMethod::ClosedForm,
        )?)
    } else {
        None
    };
    let local = b_local_couplings(nb);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut blocks = Vec::with_capacity(da);
    for i in 0..da {
        let v = basis.vector(i);
        let hi = compress_onto(&h, &v, da, db)?;
        let li = build_ckg_generator(&hi, &local, w)?;
        let es_i = Eigensystem::new(&hi, BOHR_TOL)?;
        let sigma_i = GibbsState::new(&es_i, w.beta)?;
        let gap = spectral_gap(&li.heisenberg, &sigma_i)?.gap;

        let mut rho = crate::linalg::unvec_op(&null_vector(&li.schrodinger.matrix)?, db);
        let tr = trace(&rho);
        rho = &rho * Scale(cr(1.0) / tr);
        let mut target = compress_onto(&boltz, &v, da, db)?;
        let tt = trace(&target);
        target = &target * Scale(cr(1.0) / tt);
        let fixed_point_error = fro_norm(&(&rho - &target));

        let factorization_residual = match &full {
            Some(g) => {
                let proj = outer(&v);
                let mut worst = 0.0f64;
                for _ in 0..opts.samples {
                    let ob = random_complex(&mut rng, db, db);
                    let x = kron(&proj, &ob);
                    let lhs = g.heisenberg.apply(&x);
                    let rhs = kron(&proj, &li.heisenberg.apply(&ob));
                    worst = worst.max(fro_norm(&(lhs - rhs)) / fro_norm(&x));
                }
                Some(worst)
            }
            None => None,
        };
        blocks.push(PartialBlock { index: i, factorization_residual, fixed_point_error, gap });
    }
    let g_b = blocks.iter().map(|b| b.gap).fold(f64::INFINITY, f64::min);
    let max_factorization_residual =
        blocks.iter().map(|b| b.factorization_residual).try_fold(0.0f64, |m, r| r.map(|r| m.max(r)));
    let max_fixed_point_error = blocks.iter().map(|b| b.fixed_point_error).fold(0.0, f64::max);
    Ok(PartialReport { blocks, g_b, max_factorization_residual, max_fixed_point_error })
}

/// Gap of `L_(H, β, P_B)` compressed onto the A-diagonal operator sector.
///
/// Each A-basis projector contributes its own fixed point, so the kernel of
/// the restriction has dimension `d_A`; the returned value is the smallest
/// nonzero eigenvalue.
pub fn a_diagonal_restriction_gap(spec: &HamiltonianSpec, w: WeightFunction, seed: u64) -> Result<GapReport> {
    let cut = check_commuting_cut(spec)?;
    let basis = a_side_eigenbasis(&cut, seed)?;
    let (na, nb) = (cut.a_sites.len(), cut.b_sites.len());
    let (da, db) = (cut.d_a(), cut.d_b());
    let h = cut.to_ab_order(&assemble_dense(spec)?);
    let es = Eigensystem::new(&h, BOHR_TOL)?;
    let sigma = GibbsState::new(&es, w.beta)?;
    let pairs: Vec<(CMat, WeightFunction)> = b_couplings(na, nb).into_iter().map(|s| (s, w)).collect();
    let g = build_ckg_generator_with(&es, &pairs, AlphaMethod::ClosedForm)?;
    let lhat = symmetrize(&g.heisenberg, &sigma)?;
    let d = da * db;
    let mut sector: CMat = Mat::zeros(d * d, da * db * db);
    let mut col = 0;
    for i in 0..da {
        let proj = outer(&basis.vector(i));
        for k in 0..db {
            for j in 0..db {
                let mut e: CMat = Mat::zeros(db, db);
                e[(j, k)] = cr(1.0);
                let v = vec_op(&kron(&proj, &e));
                for r in 0..d * d {
                    sector[(r, col)] = v[(r, 0)];
                }
                col += 1;
            }
        }
    }
    let restricted = adjoint(&sector) * (-lhat) * &sector;
    gap_of_psd(&restricted, KERNEL_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{defected_heisenberg_2d, defected_ising_1d, single_site_paulis};
    use crate::lindblad::theta;

    fn one_qubit_identity() -> (Superoperator, GibbsState) {
        let h = identity(2);
        let g = build_ckg_generator(&h, &single_site_paulis(1, &[0]), WeightFunction::metropolis(1.0)).unwrap();
        let es = Eigensystem::new(&h, BOHR_TOL).unwrap();
        (g.heisenberg, GibbsState::new(&es, 1.0).unwrap())
    }

    #[test]
    fn kms_inner_basics() {
        let (_, s) = one_qubit_identity();
        assert!((kms_inner(&identity(2), &identity(2), &s).re - 1.0).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_complex(&mut rng, 2, 2);
        let y = random_complex(&mut rng, 2, 2);
        let hs = crate::linalg::hs_inner(&x, &y) * 0.5;
        assert!((kms_inner(&x, &y, &s) - hs).norm() < 1e-13);
        assert!(kms_inner(&x, &x, &s).re > 0.0);
    }

    #[test]
    fn identity_hamiltonian_gap() {
        let (l, s) = one_qubit_identity();
        let rep = spectral_gap(&l, &s).unwrap();
        assert_eq!(rep.kernel_dim, 1);
        assert!((rep.gap - 4.0 * theta(0.0)).abs() < 1e-10);
        assert!((rep.gap - 2.468).abs() < 1e-3);
        assert!(rep.gap <= rep.kms_norm + 1e-12);
        let lhat = symmetrize(&l, &s).unwrap();
        assert!(fro_norm(&(lhat - &l.matrix)) < 1e-12);
    }

    #[test]
    fn ambiguous_kernel_detected() {
        let eigs = [0.0, 5e-9, 1.0];
        assert!(matches!(gap_from_eigenvalues(&eigs, 1e-9), Err(Error::AmbiguousKernel { .. })));
    }

    #[test]
    fn zero_map_has_zero_norm() {
        let s = one_qubit_identity().1;
        let z = Superoperator::zero(2, Picture::Heisenberg);
        assert_eq!(kms_operator_norm(&z, &s).unwrap(), 0.0);
    }

    #[test]
    fn composition_suite_passes() {
        for case in gap_composition_suite(9, 50).unwrap() {
            assert!(case.passed(), "{case:?}");
            assert!(case.trials > 0);
        }
    }

    #[test]
    fn partial_check_on_ising_ring() {
        let spec = defected_ising_1d(4, 2.0).unwrap();
        let rep = partial_lindbladian_check(&spec, WeightFunction::metropolis(1.0), PartialOptions::default()).unwrap();
        assert_eq!(rep.blocks.len(), 4);
        assert!(rep.max_factorization_residual.unwrap() < 1e-9);
        assert!(rep.max_fixed_point_error < 1e-10);
        let restricted = a_diagonal_restriction_gap(&spec, WeightFunction::metropolis(1.0), 42).unwrap();
        assert_eq!(restricted.kernel_dim, 4);
        assert!((restricted.gap - rep.g_b).abs() < 1e-9);
    }

    #[test]
    fn heisenberg_partial_gap_high_temperature() {
        let spec = defected_heisenberg_2d(2, 3, &[0, 3], (0, 3), 3.0).unwrap();
        let rep = partial_lindbladian_check(&spec, WeightFunction::metropolis(0.05), PartialOptions::default()).unwrap();
        assert!(rep.max_factorization_residual.is_none());
        assert!(rep.g_b >= 0.1, "g_B = {}", rep.g_b);
        assert!(rep.max_fixed_point_error < 1e-10);
    }
}
