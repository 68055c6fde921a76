//! Aggregated invariant checks of the `verify` scenario.

use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, ReplicaModeName};
use super::report::CheckRecord;
use super::scenarios::{build_system, theta_table};
use crate::classical::{
    bottleneck_ratio, classical_defected_ising_energy, glauber_generator, BottleneckMode,
};
use crate::error::Result;
use crate::hamiltonians::{
    a_side_eigenbasis, assemble_dense, check_commuting_cut, compress_onto, single_site_paulis, HamiltonianSpec, Pauli,
    PauliTerm,
};
use crate::lindblad::{
    alpha_closed, build_ckg_generator, coherent_term, detailed_balance_residual, fixed_point_residual, Eigensystem, GibbsState,
    WeightFunction, WeightKind, BOHR_TOL,
};
use crate::linalg::{eigvalsh, haar_state, hermiticity_residual, max_abs, outer, random_density, spectral_norm, trace, trace_norm};
use crate::mixing::{bottleneck_witness, chi_square_decay_rate, Propagator};
use crate::replica::{
    build_replica_exchange_generator, cauchy_schwarz_alpha_check, erfc_lower_bound_grid, local_swap_unitary,
    relative_distance, swap_kms_norm, swap_only_kernel_analysis, theta_bound_slack, ReplicaOptions, SwapRoute,
};
use crate::spectral::{gap_composition_suite, partial_lindbladian_check, spectral_gap, symmetrize, PartialOptions};

/// Random instances per gap-composition property case.
pub const PROPERTY_TRIALS: usize = 200;

fn hamiltonian_checks(spec: &HamiltonianSpec, seed: u64, out: &mut Vec<CheckRecord>) -> Result<()> {
    let h = assemble_dense(spec)?;
    let norm = spectral_norm(&h)?.max(1e-300);
    out.push(CheckRecord::at_most("hamiltonian.hermiticity", hermiticity_residual(&h) / norm, 1e-12));
    if spec.partition.is_some() {
        let cut = check_commuting_cut(spec)?;
        out.push(CheckRecord::equals("hamiltonian.cut_holds", f64::from(u8::from(cut.holds)), 1.0));
        out.push(CheckRecord::at_most("hamiltonian.cut_reassembly", cut.decomposition_residual, 1e-10));
        out.push(CheckRecord::at_most("hamiltonian.h_ab_bound", cut.h_ab_norm - cut.kv_max(), 1e-12));
        let basis = a_side_eigenbasis(&cut, seed)?;
        let hab = cut.to_ab_order(&h);
        let mut worst = f64::NEG_INFINITY;
        for i in 0..basis.dim() {
            let hi = compress_onto(&hab, &basis.vector(i), cut.d_a(), cut.d_b())?;
            worst = worst.max(spectral_norm(&hi)? - norm);
        }
        out.push(CheckRecord::at_most("hamiltonian.compression_contractive", worst, 1e-10));
    }
    Ok(())
}

fn generator_checks(cfg: &ExperimentConfig, spec: &HamiltonianSpec, beta: f64, out: &mut Vec<CheckRecord>) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for kind in [WeightKind::Gaussian, WeightKind::Metropolis] {
        let tag = match kind {
            WeightKind::Gaussian => "gaussian",
            WeightKind::Metropolis => "metropolis",
        };
        let mut local = cfg.clone();
        local.weight = kind;
        local.replica.mode = ReplicaModeName::None;
        let rs = build_system(&local, spec, beta, cfg.seed)?;
        let (l, s) = (&rs.system, &rs.system_sigma);
        out.push(CheckRecord::at_most(&format!("lindblad.{tag}.detailed_balance"), detailed_balance_residual(&l.heisenberg, s)?, 1e-10));
        out.push(CheckRecord::at_most(&format!("lindblad.{tag}.fixed_point"), fixed_point_residual(&l.schrodinger, s)?, 1e-10));
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let rho = random_density(&mut rng, s.dim());
            worst = worst.max(trace(&l.schrodinger.apply(&rho)).norm());
        }
        out.push(CheckRecord::at_most(&format!("lindblad.{tag}.trace_preservation"), worst, 1e-10));
        let lhat = symmetrize(&l.heisenberg, s)?;
        let eigs = eigvalsh(&lhat)?;
        let scale = eigs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        out.push(CheckRecord::at_most(&format!("lindblad.{tag}.negativity"), eigs[eigs.len() - 1] / scale, 1e-9));
        let gap = spectral_gap(&l.heisenberg, s)?;
        if cfg.couplings.sites.is_none() {
            out.push(CheckRecord::equals(&format!("lindblad.{tag}.kernel_dim"), gap.kernel_dim as f64, 1.0));
        }
        let scaled = spectral_gap(&l.heisenberg.scaled(2.5), s)?.gap;
        out.push(CheckRecord::at_most(&format!("spectral.{tag}.gap_rescaling"), (scaled - 2.5 * gap.gap).abs() / gap.gap, 1e-8));

        let es = Eigensystem::new(&rs.h_system, BOHR_TOL)?;
        let w = WeightFunction { kind, beta };
        let m = es.bohr.len();
        let gram = Mat::from_fn(m, m, |a, b| crate::linalg::cr(alpha_closed(es.bohr[a], es.bohr[b], w)));
        out.push(CheckRecord::at_least(&format!("lindblad.{tag}.alpha_gram_min_eig"), eigvalsh(&gram)?[0], -1e-10));
    }
    Ok(())
}

fn theta_checks(beta: f64, seed: u64, out: &mut Vec<CheckRecord>) -> Result<()> {
    let rows = theta_table()?;
    let max_diff = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
    out.push(CheckRecord::at_most("theta.closed_vs_quadrature", max_diff, 1e-8));
    let xs: Vec<f64> = rows.iter().map(|r| r.beta_omega).collect();
    out.push(CheckRecord::at_least("theta.bounds_slack", theta_bound_slack(&xs), -1e-12));
    out.push(CheckRecord::at_least("theta.cauchy_schwarz_slack", cauchy_schwarz_alpha_check(beta, 100, seed)?, -1e-10));
    out.push(CheckRecord::at_least("theta.erfc_lower_bound_slack", erfc_lower_bound_grid(50), 0.0));
    Ok(())
}

fn replica_checks(cfg: &ExperimentConfig, spec: &HamiltonianSpec, beta: f64, out: &mut Vec<CheckRecord>) -> Result<()> {
    let rs = build_system(cfg, spec, beta, cfg.seed)?;
    out.push(CheckRecord::at_most("replica.detailed_balance", detailed_balance_residual(&rs.generator.heisenberg, &rs.sigma)?, 1e-10));
    out.push(CheckRecord::at_most("replica.fixed_point", fixed_point_residual(&rs.generator.schrodinger, &rs.sigma)?, 1e-10));
    out.push(CheckRecord::equals("replica.kernel_dim", spectral_gap(&rs.generator.heisenberg, &rs.sigma)?.kernel_dim as f64, 1.0));
    out.push(CheckRecord::at_most("replica.swap_kms_norm", swap_kms_norm(&rs)?, 3.0 + 1e-6));
    if cfg.replica.mode != ReplicaModeName::LocalA {
        return Ok(());
    }
    let cut = rs.cut.as_ref().expect("local mode carries a cut");
    let hj = rs.swap_hamiltonian.as_ref().expect("local mode carries a swap Hamiltonian");
    let es = Eigensystem::new(hj, BOHR_TOL)?;
    let g = coherent_term(&es, &[local_swap_unitary(cut.d_a(), cut.d_b())], WeightFunction { kind: cfg.replica.swap_weight, beta })?;
    out.push(CheckRecord::at_most("replica.swap_coherent_part", max_abs(&g), 1e-12));

    let w1 = WeightFunction { kind: cfg.weight, beta };
    let w2 = WeightFunction { kind: cfg.replica.aux_weight.unwrap_or(cfg.weight), beta };
    let opts = ReplicaOptions {
        route: SwapRoute::Generic,
        seed: cfg.seed,
        swap_weight: cfg.replica.swap_weight,
        system_sites: cfg.couplings.sites.clone(),
    };
    let generic = build_replica_exchange_generator(spec, beta, w1, w2, rs.mode, opts)?;
    let d = relative_distance(
        &generic.swap.as_ref().expect("swap").heisenberg,
        &rs.swap.as_ref().expect("swap").heisenberg,
    )?;
    out.push(CheckRecord::at_most("replica.closed_form_vs_generic", d, 1e-9));

    let k = swap_only_kernel_analysis(&rs, cfg.seed)?;
    out.push(CheckRecord::equals("replica.swap_sector_kernel_dim", k.kernel_dim as f64, 1.0));
    out.push(CheckRecord::at_most("replica.max_cross_term", k.max_cross_term, 1e-10));
    let sector_min = k.sector_sampled_min.iter().chain(k.sector_min.iter()).copied().fold(f64::INFINITY, f64::min);
    out.push(CheckRecord::at_least("replica.sector_quadratic_form_min", sector_min, k.threshold));

    let w = WeightFunction { kind: cfg.weight, beta };
    let partial = partial_lindbladian_check(spec, w, PartialOptions { seed: cfg.seed, ..PartialOptions::default() })?;
    if let Some(r) = partial.max_factorization_residual {
        out.push(CheckRecord::at_most("spectral.partial_factorization", r, 1e-9));
    }
    out.push(CheckRecord::at_most("spectral.partial_fixed_point", partial.max_fixed_point_error, 1e-10));
    Ok(())
}

fn gap_composition_checks(seed: u64, out: &mut Vec<CheckRecord>) -> Result<()> {
    for case in gap_composition_suite(seed, PROPERTY_TRIALS)? {
        out.push(CheckRecord::equals(&format!("spectral.{}.violations", case.name), case.violations as f64, 0.0));
    }
    Ok(())
}

fn two_qubit_ising() -> HamiltonianSpec {
    HamiltonianSpec::new(
        2,
        vec![PauliTerm::new(-1.0, &[(0, Pauli::Z), (1, Pauli::Z)]), PauliTerm::new(-0.3, &[(0, Pauli::Z)])],
    )
}

fn mixing_checks(cfg: &ExperimentConfig, out: &mut Vec<CheckRecord>) -> Result<()> {
    let mut local = cfg.clone();
    local.replica.mode = ReplicaModeName::None;
    local.couplings.sites = None;
    local.weight = WeightKind::Metropolis;
    let rs = build_system(&local, &two_qubit_ising(), 1.0, cfg.seed)?;
    let prop = Propagator::new(&rs.generator, &rs.sigma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rho = outer(&haar_state(&mut rng, 4));
    let prep = prop.prepare(&rho);
    let (mut last, mut worst) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..40 {
        let t = 1e-3 * 1.3f64.powi(k);
        let dist = trace_norm(&(prop.evolve_prepared(&prep, t) - &rs.sigma.sigma))?;
        worst = worst.max(dist - last);
        last = dist;
    }
    out.push(CheckRecord::at_most("mixing.trace_distance_monotone", worst, 1e-12));
    let gap = spectral_gap(&rs.generator.heisenberg, &rs.sigma)?.gap;
    let times: Vec<f64> = (0..20).map(|k| (6.0 + 0.5 * k as f64) / gap).collect();
    let fitted = chi_square_decay_rate(&prop, &rs.sigma, &rho, &times);
    out.push(CheckRecord::at_most("mixing.chi_square_rate_vs_gap", (fitted - gap).abs() / gap, 0.05));
    Ok(())
}

fn witness_checks(cfg: &ExperimentConfig, spec: &HamiltonianSpec, beta: f64, out: &mut Vec<CheckRecord>) -> Result<()> {
    let Some(defect) = spec.defect.as_ref() else { return Ok(()) };
    let h = assemble_dense(spec)?;
    let sigma = GibbsState::new(&Eigensystem::new(&h, BOHR_TOL)?, beta)?;
    let sites: Vec<usize> = cfg.couplings.sites.clone().unwrap_or_else(|| (0..spec.n).collect());
    let l = build_ckg_generator(&h, &single_site_paulis(spec.n, &sites), WeightFunction { kind: cfg.weight, beta })?;
    let edge = (defect.edge.0.min(defect.edge.1), defect.edge.0.max(defect.edge.1));
    match bottleneck_witness(spec, edge, &l.heisenberg, &sigma) {
        Ok(w) => out.push(CheckRecord::at_most("mixing.bottleneck_containment", w.containment_residual, 1e-10)),
        Err(crate::Error::InvalidArgument(_)) => {}
        Err(e) => return Err(e),
    }
    Ok(())
}

fn classical_checks(cfg: &ExperimentConfig, out: &mut Vec<CheckRecord>) -> Result<()> {
    let n = cfg.classical.n;
    let beta = cfg.beta;
    let mut phis = Vec::new();
    let mut worst = 0.0f64;
    for j in 1..=5 {
        let chain = glauber_generator(|z| classical_defected_ising_energy(z, j as f64), n, beta)?;
        worst = worst.max(chain.row_sum_residual()).max(chain.reversibility_residual()).max(chain.stationarity_residual());
        let mode = if chain.states() <= crate::classical::MAX_EXACT_STATES { BottleneckMode::Exact } else { BottleneckMode::Candidate };
        phis.push(bottleneck_ratio(&chain, mode)?.phi);
    }
    out.push(CheckRecord::at_most("classical.chain_residuals", worst, 1e-12));
    let ratio = phis.windows(2).skip(1).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    out.push(CheckRecord::at_most("classical.bottleneck_ratio_decay", ratio, (-beta).exp()));
    Ok(())
}

/// Every invariant suite on the configured system, plus the fixed classical and gap-composition families.
pub fn run_checks(cfg: &ExperimentConfig, spec: &HamiltonianSpec) -> Result<Vec<CheckRecord>> {
    let beta = cfg.beta;
    let mut out = Vec::new();
    hamiltonian_checks(spec, cfg.seed, &mut out)?;
    generator_checks(cfg, spec, beta, &mut out)?;
    theta_checks(beta, cfg.seed, &mut out)?;
    if cfg.replica.mode != ReplicaModeName::None {
        replica_checks(cfg, spec, beta, &mut out)?;
    }
    gap_composition_checks(cfg.seed, &mut out)?;
    mixing_checks(cfg, &mut out)?;
    witness_checks(cfg, spec, beta, &mut out)?;
    classical_checks(cfg, &mut out)?;
    Ok(out)
}
