//! Replica-exchange generators: swap unitaries, the swap channel, and the joint Lindbladian.

use crate::lindblad::erfc;
use faer::{Mat, Scale};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{
    a_side_eigenbasis, assemble_dense, b_side_eigenbasis, check_commuting_cut, single_site_paulis,
    CutReport, HamiltonianSpec,
};
use crate::lindblad::WeightKind;
use crate::lindblad::{
    alpha_closed, alpha_coeff, build_ckg_generator, build_ckg_generator_with, AlphaMethod,
    Eigensystem, Generator, GibbsState, Picture, Superoperator, WeightFunction, BOHR_TOL,
};
use crate::linalg::{adjoint, conj, cr, eigvalsh, fro_norm, identity, kron, outer, random_complex, CMat};
use crate::spectral::{kms_inner, symmetrize};

pub use crate::lindblad::theta;

/// Permutation `|i_A j_B m_A⟩ ↦ |m_A j_B i_A⟩` on `C^{d_A} ⊗ C^{d_B} ⊗ C^{d_A}`.
pub fn local_swap_unitary(d_a: usize, d_b: usize) -> CMat {
    let d = d_a * d_b * d_a;
    let mut u = Mat::zeros(d, d);
    for i in 0..d_a {
        for j in 0..d_b {
            for m in 0..d_a {
                u[((m * d_b + j) * d_a + i, (i * d_b + j) * d_a + m)] = cr(1.0);
            }
        }
    }
    u
}

/// Full exchange `|ψ⟩|φ⟩ ↦ |φ⟩|ψ⟩` of two `d`-dimensional replicas.
pub fn global_swap_unitary(d: usize) -> CMat {
    local_swap_unitary(d, 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SwapMode {
    /// Auxiliary register `C^{d_A}` with `H₂ = I_A`, swap on the A registers.
    #[serde(rename = "local_A")]
    LocalOnA,
    /// Second full replica of `H` at inverse temperature `beta2`, full swap.
    Global { beta2: f64 },
    None,
}

/// Route used to build the swap channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SwapRoute {
    #[default]
    ClosedForm,
    Generic,
}

/// `𝓛_swap` for `H ⊗ I_A + I_n ⊗ I_A` from per-element `θ` coefficients.
///
/// In the product eigenbasis `|i_A j_B m_A⟩` the swap has a single Bohr
/// frequency per basis state, `ω = λ_{i,j} − λ_{m,j}`, so every coefficient
/// is an `α_M` value between two such frequencies.
pub fn swap_generator_closed_form(h_ab: &CMat, cut: &CutReport, beta: f64, seed: u64) -> Result<Generator> {
    let (da, db) = (cut.d_a(), cut.d_b());
    let ua = a_side_eigenbasis(cut, seed)?.vectors;
    let ub = b_side_eigenbasis(cut, seed)?.vectors;
    let vsys = kron(&ua, &ub);
    let hd = adjoint(&vsys) * h_ab * &vsys;
    let ds = da * db;
    let scale = fro_norm(h_ab).max(1.0);
    let mut off = 0.0f64;
    for c in 0..ds {
        for r in 0..ds {
            if r != c {
                off = off.max(hd[(r, c)].norm());
            }
        }
    }
    if off > 1e-10 * scale {
        return Err(Error::CutFailure(format!("product basis does not diagonalize H (residual {off:e})")));
    }
    let lam = |i: usize, j: usize| hd[(i * db + j, i * db + j)].re;
    let dj = ds * da;
    let swap_of = |p: usize| {
        let (i, j, m) = (p / (db * da), (p / da) % db, p % da);
        ((m * db + j) * da + i, lam(i, j) - lam(m, j))
    };
    let w = WeightFunction::metropolis(beta);
    let info: Vec<(usize, f64)> = (0..dj).map(swap_of).collect();
    let thetas: Vec<f64> = info.iter().map(|&(p, _)| theta(beta * info[p].1)).collect();
    let mut m: CMat = Mat::zeros(dj * dj, dj * dj);
    for b in 0..dj {
        let (sb, _) = info[b];
        let wb = info[sb].1;
        for a in 0..dj {
            let (sa, _) = info[a];
            let wa = info[sa].1;
            m[(b * dj + a, sb * dj + sa)] += cr(alpha_closed(wa, wb, w));
            m[(b * dj + a, b * dj + a)] -= cr(0.5 * (thetas[a] + thetas[b]));
        }
    }
    let v = kron(&vsys, &ua);
    let wmat = kron(&conj(&v), &v);
    let heis = &wmat * m * adjoint(&wmat);
    let heisenberg = Superoperator::from_matrix(heis, dj, Picture::Heisenberg)?;
    let schrodinger = heisenberg.adjoint();
    Ok(Generator { heisenberg, schrodinger })
}

/// `𝓛_swap` built by the generic CKG assembly on `β₁H₁ ⊗ I + β₂ I ⊗ H₂` at unit inverse temperature.
pub fn swap_generator_general(h1: &CMat, beta1: f64, h2: &CMat, beta2: f64, swap: &CMat) -> Result<Generator> {
    let hj = kron(h1, &identity(h2.nrows())) * Scale(cr(beta1)) + kron(&identity(h1.nrows()), h2) * Scale(cr(beta2));
    build_ckg_generator(&hj, std::slice::from_ref(swap), WeightFunction::metropolis(1.0))
}

/// Joint generator together with the data needed to analyse it.
#[derive(Debug, Clone)]
pub struct ReplicaSystem {
    pub generator: Generator,
    pub sigma: GibbsState,
    pub system: Generator,
    pub system_sigma: GibbsState,
    pub swap: Option<Generator>,
    pub swap_hamiltonian: Option<CMat>,
    pub cut: Option<CutReport>,
    /// System Hamiltonian in the (A, B) tensor order when a cut is present.
    pub h_system: CMat,
    pub d_system: usize,
    pub d_aux: usize,
    pub mode: SwapMode,
}

#[derive(Debug, Clone)]
pub struct ReplicaOptions {
    pub route: SwapRoute,
    pub seed: u64,
    /// Weight of the swap channel; only Metropolis admits the closed form.
    pub swap_weight: WeightKind,
    /// Sites carrying single-site Pauli couplings on the system; all sites when absent.
    pub system_sites: Option<Vec<usize>>,
}

impl Default for ReplicaOptions {
    fn default() -> Self {
        Self { route: SwapRoute::ClosedForm, seed: 42, swap_weight: WeightKind::Metropolis, system_sites: None }
    }
}

fn all_site_paulis(n: usize) -> Vec<CMat> {
    single_site_paulis(n, &(0..n).collect::<Vec<_>>())
}

fn swap_weight(kind: WeightKind, beta: f64) -> WeightFunction {
    WeightFunction { kind, beta }
}

/// `𝓛 = 𝓛_(H,β,P_[n],w₁) ⊗ 𝕀 + 𝕀 ⊗ 𝓛_(H₂,β₂,S₂,w₂) + 𝓛_swap`.
pub fn build_replica_exchange_generator(
    spec: &HamiltonianSpec,
    beta: f64,
    w1: WeightFunction,
    w2: WeightFunction,
    mode: SwapMode,
    opts: ReplicaOptions,
) -> Result<ReplicaSystem> {
    let n = spec.n;
    let raw = assemble_dense(spec)?;
    let cut = match mode {
        SwapMode::LocalOnA => {
            let c = check_commuting_cut(spec)?;
            if !c.holds {
                return Err(Error::CutFailure(c.diagnostic.clone().unwrap_or_default()));
            }
            Some(c)
        }
        _ => None,
    };
    let h = match &cut {
        Some(c) => c.to_ab_order(&raw),
        None => raw,
    };
    let d = h.nrows();
    let es = Eigensystem::new(&h, BOHR_TOL)?;
    let system_sigma = GibbsState::new(&es, beta)?;
    let system_paulis = match &opts.system_sites {
        Some(sites) => single_site_paulis(n, sites),
        None => all_site_paulis(n),
    };
    let system_paulis = match &cut {
        Some(c) => system_paulis.iter().map(|s| c.to_ab_order(s)).collect(),
        None => system_paulis,
    };
    let pairs: Vec<(CMat, WeightFunction)> = system_paulis.iter().map(|s| (s.clone(), w1.with_beta(beta))).collect();
    let system = build_ckg_generator_with(&es, &pairs, AlphaMethod::ClosedForm)?;

    match mode {
        SwapMode::None => Ok(ReplicaSystem {
            generator: system.clone(),
            sigma: system_sigma.clone(),
            system,
            system_sigma,
            swap: None,
            swap_hamiltonian: None,
            cut,
            h_system: h,
            d_system: d,
            d_aux: 1,
            mode,
        }),
        SwapMode::LocalOnA => {
            let cut_ref = cut.as_ref().expect("cut present for local mode");
            let (na, da, db) = (cut_ref.a_sites.len(), cut_ref.d_a(), cut_ref.d_b());
            let ia = identity(da);
            let aux = build_ckg_generator(&ia, &all_site_paulis(na), w2.with_beta(beta))?;
            let aux_sigma = GibbsState::new(&Eigensystem::new(&ia, BOHR_TOL)?, beta)?;
            let hj = kron(&h, &ia) + identity(d * da);
            let swap = match (opts.route, opts.swap_weight) {
                (SwapRoute::ClosedForm, WeightKind::Metropolis) => swap_generator_closed_form(&h, cut_ref, beta, opts.seed)?,
                _ => build_ckg_generator(&hj, &[local_swap_unitary(da, db)], swap_weight(opts.swap_weight, beta))?,
            };
            let joint = combine(&system, &aux, &swap)?;
            Ok(ReplicaSystem {
                generator: joint,
                sigma: system_sigma.tensor(&aux_sigma),
                system,
                system_sigma,
                swap: Some(swap),
                swap_hamiltonian: Some(hj),
                cut,
                h_system: h,
                d_system: d,
                d_aux: da,
                mode,
            })
        }
        SwapMode::Global { beta2 } => {
            let pairs2: Vec<(CMat, WeightFunction)> =
                system_paulis.iter().map(|s| (s.clone(), w2.with_beta(beta2))).collect();
            let second = build_ckg_generator_with(&es, &pairs2, AlphaMethod::ClosedForm)?;
            let sigma2 = GibbsState::new(&es, beta2)?;
            let hj = kron(&h, &identity(d)) * Scale(cr(beta)) + kron(&identity(d), &h) * Scale(cr(beta2));
            let swap = build_ckg_generator(&hj, &[global_swap_unitary(d)], swap_weight(opts.swap_weight, 1.0))?;
            let joint = combine(&system, &second, &swap)?;
            Ok(ReplicaSystem {
                generator: joint,
                sigma: system_sigma.tensor(&sigma2),
                system,
                system_sigma,
                swap: Some(swap),
                swap_hamiltonian: Some(hj),
                cut,
                h_system: h,
                d_system: d,
                d_aux: d,
                mode,
            })
        }
    }
}

fn combine(first: &Generator, second: &Generator, swap: &Generator) -> Result<Generator> {
    let (d1, d2) = (first.heisenberg.dim, second.heisenberg.dim);
    let left = first.heisenberg.tensor(&Superoperator::identity(d2, Picture::Heisenberg));
    let right = Superoperator::identity(d1, Picture::Heisenberg).tensor(&second.heisenberg);
    let heisenberg = left.add(&right)?.add(&swap.heisenberg)?;
    let schrodinger = heisenberg.adjoint();
    Ok(Generator { heisenberg, schrodinger })
}

/// Quadratic-form data of the swap channel on `𝒦 ⊗ I_A`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SwapKernelReport {
    pub sector_dim: usize,
    pub kernel_dim: usize,
    /// Smallest positive eigenvalue of the KMS-whitened form on each sector:
    /// A-diagonal, A-off/B-diagonal, A-off/B-off.
    pub sector_min: [f64; 3],
    /// Smallest sampled Rayleigh quotient on each sector.
    pub sector_sampled_min: [f64; 3],
    pub threshold: f64,
    /// Cross inner products (generator and plain overlaps, both orders) between
    /// A-diagonal and A-off sectors, then between A-off/B-diagonal and A-off/B-off.
    pub cross_terms: Vec<f64>,
    pub max_cross_term: f64,
}

fn whitened_eigs(basis: &[CMat], neg_l: &dyn Fn(&CMat) -> CMat, sigma: &GibbsState) -> Result<Vec<f64>> {
    let n = basis.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let images: Vec<CMat> = basis.iter().map(neg_l).collect();
    let g = Mat::from_fn(n, n, |k, l| kms_inner(&basis[k], &basis[l], sigma));
    let m = Mat::from_fn(n, n, |k, l| kms_inner(&basis[k], &images[l], sigma));
    let (gv, gu) = crate::linalg::eigh(&g)?;
    if gv[0] <= 0.0 {
        return Err(Error::InvalidArgument("sector basis is linearly dependent".into()));
    }
    let ginv = crate::linalg::spectral_fn(&gv, &gu, |x| x.powf(-0.5));
    eigvalsh(&(&ginv * m * &ginv))
}

/// Analyse `𝓛_swap` on `𝒦 ⊗ I_A` for a local-swap replica system.
pub fn swap_only_kernel_analysis(rs: &ReplicaSystem, seed: u64) -> Result<SwapKernelReport> {
    let cut = rs.cut.as_ref().ok_or_else(|| Error::CutFailure("local swap analysis needs a cut".into()))?;
    let swap = rs.swap.as_ref().ok_or_else(|| Error::InvalidArgument("no swap channel".into()))?;
    let (da, db) = (cut.d_a(), cut.d_b());
    let ua = a_side_eigenbasis(cut, seed)?;
    let ub = b_side_eigenbasis(cut, seed)?;
    let ia = identity(da);
    let ib = identity(db);
    let ket = |u: &crate::hamiltonians::ABasis, i: usize| u.vector(i);
    let op_a = |i: usize, k: usize| ket(&ua, i) * adjoint(&ket(&ua, k));
    let op_b = |j: usize, k: usize| ket(&ub, j) * adjoint(&ket(&ub, k));
    let lift = |x: &CMat| kron(x, &ia);
    let sigma = &rs.sigma;
    let neg = |x: &CMat| -swap.heisenberg.apply(x);

    let mut sectors: [Vec<CMat>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for i in 0..da {
        sectors[0].push(lift(&kron(&op_a(i, i), &ib)));
    }
    for i in 0..da {
        for k in 0..da {
            if i == k {
                continue;
            }
            for j in 0..db {
                for l in 0..db {
                    let x = lift(&kron(&op_a(i, k), &op_b(j, l)));
                    sectors[if j == l { 1 } else { 2 }].push(x);
                }
            }
        }
    }
    let all: Vec<CMat> = sectors.iter().flatten().cloned().collect();
    let eigs = whitened_eigs(&all, &neg, sigma)?;
    let norm = eigs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let thr = crate::spectral::KERNEL_TOL * norm;
    let kernel_dim = eigs.iter().filter(|&&e| e.abs() <= thr).count();

    let mut sector_min = [f64::INFINITY; 3];
    for (s, basis) in sectors.iter().enumerate() {
        let e = whitened_eigs(basis, &neg, sigma)?;
        sector_min[s] = e.into_iter().filter(|&x| x > thr).fold(f64::INFINITY, f64::min);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let identity_joint = identity(sigma.dim());
    let mut sampled = [f64::INFINITY; 3];
    let random_in = |basis: &[CMat], rng: &mut ChaCha8Rng| -> CMat {
        let coef = random_complex(rng, basis.len(), 1);
        let mut x: CMat = Mat::zeros(sigma.dim(), sigma.dim());
        for (k, b) in basis.iter().enumerate() {
            x += b * Scale(coef[(k, 0)]);
        }
        x
    };
    for _ in 0..20 {
        for (s, basis) in sectors.iter().enumerate() {
            if basis.is_empty() {
                continue;
            }
            let mut x = random_in(basis, &mut rng);
            if s == 0 {
                let c = kms_inner(&identity_joint, &x, sigma);
                x = &x - &identity_joint * Scale(c);
            }
            let q = kms_inner(&x, &neg(&x), sigma).re / kms_inner(&x, &x, sigma).re;
            sampled[s] = sampled[s].min(q);
        }
    }

    let mut cross_terms = Vec::new();
    let off_a: Vec<CMat> = sectors[1].iter().chain(&sectors[2]).cloned().collect();
    for _ in 0..10 {
        for (left, right) in [(&sectors[0], &off_a), (&sectors[1], &sectors[2])] {
            if left.is_empty() || right.is_empty() {
                continue;
            }
            let x = random_in(left, &mut rng);
            let y = random_in(right, &mut rng);
            cross_terms.extend([
                kms_inner(&x, &neg(&y), sigma).norm(),
                kms_inner(&y, &neg(&x), sigma).norm(),
                kms_inner(&x, &y, sigma).norm(),
                kms_inner(&y, &x, sigma).norm(),
            ]);
        }
    }
    let max_cross_term = cross_terms.iter().copied().fold(0.0, f64::max);
    let beta = rs.system_sigma.beta;
    let threshold = 1.0 / (4.0 * da as f64 * (4.0 * beta * cut.kv_max()).exp());
    Ok(SwapKernelReport {
        sector_dim: all.len(),
        kernel_dim,
        sector_min,
        sector_sampled_min: sampled,
        threshold,
        cross_terms,
        max_cross_term,
    })
}

/// Theorem-style lower bound `min{g_B, 1} / (2^{|A|} e^{4βKV_max})` without its absolute constant.
pub fn theorem_bound(g_b: f64, n_a: usize, beta: f64, kv_max: f64) -> f64 {
    g_b.min(1.0) / ((1u64 << n_a) as f64 * (4.0 * beta * kv_max).exp())
}

/// Worst violation of `θ(x) ≤ e^{−x/2}` and `0 ≤ θ ≤ 2` over a grid (negative means violated).
pub fn theta_bound_slack(xs: &[f64]) -> f64 {
    xs.iter()
        .map(|&x| {
            let t = theta(x);
            t.min(2.0 - t).min((-0.5 * x).exp() - t)
        })
        .fold(f64::INFINITY, f64::min)
}

/// `α(ω₁,ω₂)² ≤ √(e^{−βω₁} e^{−βω₂})` and `α² ≤ θ(βω₁)θ(βω₂)` by quadrature on random pairs.
pub fn cauchy_schwarz_alpha_check(beta: f64, pairs: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = WeightFunction::metropolis(beta);
    let mut worst = f64::INFINITY;
    for _ in 0..pairs {
        let w1: f64 = rng.random_range(-6.0..6.0) / beta;
        let w2: f64 = rng.random_range(-6.0..6.0) / beta;
        let a = alpha_coeff(w1, w2, w)?;
        let bound1 = (-0.5 * beta * (w1 + w2)).exp();
        let bound2 = theta(beta * w1) * theta(beta * w2);
        worst = worst.min(bound1 - a * a).min(bound2 - a * a + 1e-12);
    }
    Ok(worst)
}

/// Lower bound `p_j erfc((1+2ln r)/(2√2)) + p_i erfc((1−2ln r)/(2√2)) ≥ p_i p_j/(p_i+p_j)`, `r = p_j/p_i`,
/// on an `n × n` grid of `p_i + p_j ≤ 1`. Returns the smallest slack.
pub fn erfc_lower_bound_grid(n: usize) -> f64 {
    let s = 2.0 * std::f64::consts::SQRT_2;
    let mut worst = f64::INFINITY;
    for a in 1..=n {
        for b in 1..=n {
            let pi = a as f64 / (n as f64 + 1.0);
            let pj = b as f64 / (n as f64 + 1.0);
            if pi + pj > 1.0 {
                continue;
            }
            let lr = (pj / pi).ln();
            let lhs = pj * erfc((1.0 + 2.0 * lr) / s) + pi * erfc((1.0 - 2.0 * lr) / s);
            worst = worst.min(lhs - pi * pj / (pi + pj));
        }
    }
    worst
}

/// Outer product helper for projector construction in tests and the harness.
pub fn projector(v: &CMat) -> CMat {
    outer(v)
}

/// Relative spectral-norm distance between two superoperators.
pub fn relative_distance(a: &Superoperator, b: &Superoperator) -> Result<f64> {
    let diff = crate::linalg::spectral_norm(&(&a.matrix - &b.matrix))?;
    let base = crate::linalg::spectral_norm(&a.matrix)?.max(1e-300);
    Ok(diff / base)
}

/// KMS operator norm of the swap channel alone.
pub fn swap_kms_norm(rs: &ReplicaSystem) -> Result<f64> {
    let swap = rs.swap.as_ref().ok_or_else(|| Error::InvalidArgument("no swap channel".into()))?;
    let lhat = symmetrize(&swap.heisenberg, &rs.sigma)?;
    let e = eigvalsh(&(-lhat))?;
    Ok(e.iter().fold(0.0f64, |m, x| m.max(x.abs())))
}
