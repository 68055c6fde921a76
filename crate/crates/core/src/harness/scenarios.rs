//! Scenario runners.

use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, PlanPoint, ReplicaModeName, Scenario};
use super::report::{ClassicalRecord, Dims, GapRecord, Records, Report, ThetaRecord, Tolerances};
use super::verify::run_checks;
use crate::classical::{
    bottleneck_ratio, classical_defected_ising_energy, classical_gap, classical_re_generator, glauber_generator,
    BottleneckMode, MAX_EXACT_STATES,
};
use crate::error::{Error, Result};
use crate::hamiltonians::HamiltonianSpec;
use crate::lindblad::{alpha_coeff, theta, WeightFunction, BOHR_TOL};
use crate::mixing::{mixing_time_estimate, InitialFamily, MixingReport, BISECTION_RTOL};
use crate::replica::{build_replica_exchange_generator, theorem_bound, ReplicaOptions, ReplicaSystem, SwapMode, SwapRoute};
use crate::spectral::{partial_lindbladian_check, spectral_gap, PartialOptions, KERNEL_TOL};

/// Execution options that do not enter the report.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads for independent sweep points; the global pool when `None`.
    pub parallel: Option<usize>,
}

/// Number of points on the θ validation grid over `βω ∈ [−20, 20]`.
pub const THETA_POINTS: usize = 401;

pub fn tolerances(cfg: &ExperimentConfig) -> Tolerances {
    Tolerances {
        bohr_grouping: BOHR_TOL,
        kernel_relative: KERNEL_TOL,
        detailed_balance: 1e-10,
        bisection_rtol: BISECTION_RTOL,
        epsilon: cfg.epsilon,
    }
}

fn joint_dim(spec: &HamiltonianSpec, mode: ReplicaModeName) -> usize {
    let d = spec.dim();
    match mode {
        ReplicaModeName::None => d,
        ReplicaModeName::LocalA => d << spec.partition.as_ref().map_or(0, |p| p.a.len()),
        ReplicaModeName::Global => d * d,
    }
}

/// Dimensions for a system, failing when the superoperator side exceeds `max_dim`.
pub fn guard(cfg: &ExperimentConfig, spec: &HamiltonianSpec) -> Result<Dims> {
    let joint = joint_dim(spec, cfg.replica.mode);
    let superop = joint.checked_mul(joint).unwrap_or(usize::MAX);
    if superop > cfg.max_dim {
        return Err(Error::ResourceGuard(format!(
            "superoperator dimension {superop} (joint Hilbert dimension {joint}) exceeds max_dim = {}",
            cfg.max_dim
        )));
    }
    Ok(Dims { system_dim: spec.dim(), joint_dim: joint, superoperator_dim: superop, max_dim: cfg.max_dim })
}

fn replica_options(cfg: &ExperimentConfig, seed: u64) -> ReplicaOptions {
    ReplicaOptions {
        route: SwapRoute::ClosedForm,
        seed,
        swap_weight: cfg.replica.swap_weight,
        system_sites: cfg.couplings.sites.clone(),
    }
}

/// Replica-exchange system for a plan point.
pub fn build_system(cfg: &ExperimentConfig, spec: &HamiltonianSpec, beta: f64, seed: u64) -> Result<ReplicaSystem> {
    let w1 = WeightFunction { kind: cfg.weight, beta };
    let w2 = WeightFunction { kind: cfg.replica.aux_weight.unwrap_or(cfg.weight), beta };
    let mode = cfg.replica.swap_mode(beta)?;
    build_replica_exchange_generator(spec, beta, w1, w2, mode, replica_options(cfg, seed))
}

fn gap_point(cfg: &ExperimentConfig, p: &PlanPoint, seed: u64) -> Result<GapRecord> {
    let spec = cfg.system_at(p)?;
    let rs = build_system(cfg, &spec, p.beta, seed)?;
    let gap_single = spectral_gap(&rs.system.heisenberg, &rs.system_sigma)?.gap;
    let gap_re = match rs.mode {
        SwapMode::None => None,
        _ => Some(spectral_gap(&rs.generator.heisenberg, &rs.sigma)?.gap),
    };
    let (g_b, theorem_ratio) = match &rs.cut {
        Some(cut) => {
            let w = WeightFunction { kind: cfg.weight, beta: p.beta };
            let opts = PartialOptions { seed, samples: 0, max_full_dim: 0 };
            let g_b = partial_lindbladian_check(&spec, w, opts)?.g_b;
            let bound = theorem_bound(g_b, cut.a_sites.len(), p.beta, cut.kv_max());
            (Some(g_b), gap_re.map(|g| g / bound))
        }
        None => (None, None),
    };
    Ok(GapRecord { j: p.j, beta: p.beta, gap_single, gap_re, g_b, theorem_ratio })
}

fn in_pool<T: Send>(opts: RunOptions, f: impl FnOnce() -> T + Send) -> Result<T> {
    match opts.parallel {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

fn with_context<T>(r: Result<T>, scenario: Scenario, p: &PlanPoint) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config(_) | Error::ResourceGuard(_) => e,
        other => Error::InvalidArgument(format!(
            "{} scenario at J = {:?}, beta = {}: {other}",
            scenario.name(),
            p.j,
            p.beta
        )),
    })
}

fn run_gap_points(cfg: &ExperimentConfig, opts: RunOptions) -> Result<(Vec<GapRecord>, Dims)> {
    let plan = cfg.plan();
    let mut dims = None;
    for p in &plan {
        dims = Some(guard(cfg, &cfg.system_at(p)?)?);
    }
    let records = in_pool(opts, || {
        plan.par_iter()
            .enumerate()
            .map(|(k, p)| with_context(gap_point(cfg, p, cfg.seed.wrapping_add(k as u64)), cfg.scenario, p))
            .collect::<Result<Vec<_>>>()
    })??;
    Ok((records, dims.expect("plan is never empty")))
}

fn run_mixing(cfg: &ExperimentConfig) -> Result<(MixingReport, Dims)> {
    let p = cfg.plan()[0];
    let spec = cfg.system_at(&p)?;
    let dims = guard(cfg, &spec)?;
    let rs = build_system(cfg, &spec, p.beta, cfg.seed)?;
    let family = InitialFamily { seed: cfg.seed, ..InitialFamily::default() };
    let report = with_context(mixing_time_estimate(&rs.generator, &rs.sigma, cfg.epsilon, &family), cfg.scenario, &p)?;
    Ok((report, dims))
}

/// θ closed form against quadrature of `α(ω, ω)` on the 401-point grid at β = 1.
pub fn theta_table() -> Result<Vec<ThetaRecord>> {
    let w = WeightFunction::metropolis(1.0);
    (0..THETA_POINTS)
        .into_par_iter()
        .map(|k| {
            let x = -20.0 + 0.1 * k as f64;
            let closed = theta(x);
            let quad = alpha_coeff(x, x, w)?;
            Ok(ThetaRecord { beta_omega: x, theta_closed: closed, theta_quadrature: quad, abs_diff: (closed - quad).abs() })
        })
        .collect()
}

fn classical_point(cfg: &ExperimentConfig, j: f64, beta: f64) -> Result<ClassicalRecord> {
    let n = cfg.classical.n;
    let energy = |z: &[i8]| classical_defected_ising_energy(z, j);
    let single = glauber_generator(energy, n, beta)?;
    let re = classical_re_generator(energy, n, beta, cfg.classical.beta2)?;
    let mode = if single.states() <= MAX_EXACT_STATES { BottleneckMode::Exact } else { BottleneckMode::Candidate };
    let phi = bottleneck_ratio(&single, mode)?;
    Ok(ClassicalRecord {
        j,
        beta,
        gap_single: classical_gap(&single)?,
        gap_re: classical_gap(&re)?,
        phi_star: phi.phi,
        phi_mode: if phi.upper_bound { "candidate_upper_bound".into() } else { "exact".into() },
    })
}

fn run_classical(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Vec<ClassicalRecord>> {
    let plan = cfg.plan();
    in_pool(opts, || {
        plan.par_iter()
            .map(|p| with_context(classical_point(cfg, p.j.unwrap_or(1.0), p.beta), cfg.scenario, p))
            .collect::<Result<Vec<_>>>()
    })?
}

/// Run a validated configuration.
///
/// Dense kernels run single-threaded so that records do not depend on the
/// worker count; independent points are distributed over the pool instead.
pub fn run_scenario(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Report> {
    cfg.validate()?;
    faer::set_global_parallelism(faer::Par::Seq);
    let start = Instant::now();
    let classical_dims = || {
        let m = 1usize << cfg.classical.n;
        Dims { system_dim: m, joint_dim: m * m, superoperator_dim: 0, max_dim: cfg.max_dim }
    };
    let theta_dims = Dims { system_dim: 0, joint_dim: 0, superoperator_dim: 0, max_dim: cfg.max_dim };
    let (records, dims, passed) = match cfg.scenario {
        Scenario::Gap | Scenario::Sweep => {
            let (r, d) = run_gap_points(cfg, opts)?;
            (Records::Gap(r), d, true)
        }
        Scenario::Mixing => {
            let (r, d) = run_mixing(cfg)?;
            (Records::Mixing(r), d, true)
        }
        Scenario::Theta => {
            let rows = in_pool(opts, theta_table)??;
            (Records::Theta(rows), theta_dims, true)
        }
        Scenario::Classical => (Records::Classical(run_classical(cfg, opts)?), classical_dims(), true),
        Scenario::Verify => {
            let spec = cfg.system_at(&cfg.plan()[0])?;
            let dims = guard(cfg, &spec)?;
            let checks = in_pool(opts, || run_checks(cfg, &spec))??;
            let ok = checks.iter().all(|c| c.passed);
            (Records::Verify(checks), dims, ok)
        }
    };
    Ok(Report {
        scenario: cfg.scenario,
        version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed,
        config: cfg.clone(),
        tolerances: tolerances(cfg),
        dims,
        passed,
        records,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
