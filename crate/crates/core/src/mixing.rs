//! Semigroup propagation, trace-norm mixing times, gap sandwich bounds and χ² tools.

use faer::{Mat, Scale};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{assemble_dense, pauli_string_matrix, HamiltonianSpec, Pauli};
use crate::lindblad::{Generator, GibbsState, Superoperator};
use crate::linalg::{
    adjoint, commutator, cr, eigh, expm, fro_norm, haar_state, hermitian_part, identity, outer, spectral_norm,
    trace, trace_norm, unvec_op, vec_op, CMat,
};
use crate::spectral::{kms_isometry, symmetrize, KERNEL_TOL};

/// Spectral propagator `e^{t𝓛†} = Φ e^{tL̂} Φ⁻¹` of a detailed-balanced generator.
#[derive(Debug, Clone)]
pub struct Propagator {
    dim: usize,
    /// Eigenvalues of `L̂` (all ≤ 0).
    pub rates: Vec<f64>,
    left: CMat,
    right: CMat,
    dense: Option<CMat>,
    /// Set when the generator failed the detailed-balance check and a dense exponential is used.
    pub dense_fallback: bool,
    pub gap: f64,
    gap_mode: Option<CMat>,
}

impl Propagator {
    pub fn new(gen: &Generator, sigma: &GibbsState) -> Result<Self> {
        let dim = gen.heisenberg.dim;
        match symmetrize(&gen.heisenberg, sigma) {
            Ok(lhat) => {
                let (vals, vecs) = eigh(&lhat)?;
                let (phi, phi_inv) = kms_isometry(sigma);
                let norm = vals.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let thr = KERNEL_TOL * norm;
                let gap_idx = (0..vals.len()).rev().find(|&k| -vals[k] > thr);
                let gap = gap_idx.map_or(0.0, |k| -vals[k]);
                let gap_mode = gap_idx.map(|k| {
                    let v = vecs.col(k).to_owned();
                    let col = Mat::from_fn(v.nrows(), 1, |i, _| v[i]);
                    let xhat = unvec_op(&col, dim);
                    &sigma.inv_quarter * xhat * &sigma.inv_quarter
                });
                Ok(Self {
                    dim,
                    rates: vals,
                    left: phi * &vecs,
                    right: adjoint(&vecs) * phi_inv,
                    dense: None,
                    dense_fallback: false,
                    gap,
                    gap_mode,
                })
            }
            Err(Error::NotDetailedBalanced(_)) => Ok(Self {
                dim,
                rates: Vec::new(),
                left: Mat::zeros(0, 0),
                right: Mat::zeros(0, 0),
                dense: Some(gen.schrodinger.matrix.clone()),
                dense_fallback: true,
                gap: f64::NAN,
                gap_mode: None,
            }),
            Err(e) => Err(e),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Precomputed spectral coefficients of an initial state.
    pub fn prepare(&self, rho0: &CMat) -> Prepared {
        match &self.dense {
            Some(_) => Prepared { coeffs: vec_op(rho0) },
            None => Prepared { coeffs: &self.right * vec_op(rho0) },
        }
    }

    pub fn evolve_prepared(&self, p: &Prepared, t: f64) -> CMat {
        match &self.dense {
            Some(l) => unvec_op(&(expm(&(l * Scale(cr(t)))) * &p.coeffs), self.dim),
            None => {
                let scaled = Mat::from_fn(p.coeffs.nrows(), 1, |k, _| p.coeffs[(k, 0)] * (t * self.rates[k]).exp());
                unvec_op(&(&self.left * scaled), self.dim)
            }
        }
    }

    pub fn evolve(&self, rho0: &CMat, t: f64) -> CMat {
        self.evolve_prepared(&self.prepare(rho0), t)
    }
}

#[derive(Debug, Clone)]
pub struct Prepared {
    coeffs: CMat,
}

/// `ρ(t) = e^{t𝓛†}(ρ₀)`.
pub fn evolve(gen: &Generator, sigma: &GibbsState, rho0: &CMat, t: f64) -> Result<CMat> {
    Ok(Propagator::new(gen, sigma)?.evolve(rho0, t))
}

/// Dense reference `e^{t𝓛†}(ρ₀)` through the full matrix exponential.
pub fn evolve_dense(l_schrodinger: &Superoperator, rho0: &CMat, t: f64) -> CMat {
    unvec_op(&(expm(&(&l_schrodinger.matrix * Scale(cr(t)))) * vec_op(rho0)), l_schrodinger.dim)
}

/// `(t_lower, t_upper)` from the gap and the smallest Gibbs population.
pub fn mixing_bounds_from_gap(gap: f64, lambda_min: f64, eps: f64) -> (f64, f64) {
    let lower = ((lambda_min / (2.0 * eps)).ln() / gap).max(0.0);
    let upper = (1.0 / (lambda_min * eps * eps)).ln() / (2.0 * gap);
    (lower, upper)
}

/// `χ²(ρ, σ) = ‖σ^{-1/4}(ρ − σ)σ^{-1/4}‖²_HS`.
pub fn chi_square(rho: &CMat, sigma: &GibbsState) -> f64 {
    let d = &sigma.inv_quarter * (rho - &sigma.sigma) * &sigma.inv_quarter;
    let f = fro_norm(&d);
    f * f
}

/// Which initial states enter the mixing-time maximum.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct InitialFamily {
    pub computational: bool,
    pub sigma_eigenstates: bool,
    pub haar: usize,
    pub seed: u64,
    /// Include `σ + (λ_min/2)·Y` with `Y = σ^{1/2}Xσ^{1/2}` built from a Hermitian gap eigenoperator `X`.
    pub extremal: bool,
}

impl Default for InitialFamily {
    fn default() -> Self {
        Self { computational: true, sigma_eigenstates: true, haar: 20, seed: 42, extremal: true }
    }
}

impl InitialFamily {
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if self.computational {
            parts.push("computational".to_string());
        }
        if self.sigma_eigenstates {
            parts.push("sigma_eigenbasis".to_string());
        }
        if self.haar > 0 {
            parts.push(format!("haar{}(seed={})", self.haar, self.seed));
        }
        if self.extremal {
            parts.push("gap_mode".to_string());
        }
        parts.join("+")
    }

    /// Labelled initial states for a propagator and Gibbs state.
    pub fn states(&self, prop: &Propagator, sigma: &GibbsState) -> Result<Vec<(String, CMat)>> {
        let d = sigma.dim();
        let mut out = Vec::new();
        if self.computational {
            for k in 0..d {
                let mut r = Mat::zeros(d, d);
                r[(k, k)] = cr(1.0);
                out.push((format!("comp:{k}"), r));
            }
        }
        if self.sigma_eigenstates {
            for k in 0..d {
                let v = Mat::from_fn(d, 1, |i, _| sigma.vectors[(i, k)]);
                out.push((format!("eig:{k}"), outer(&v)));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for k in 0..self.haar {
            out.push((format!("haar:{k}"), outer(&haar_state(&mut rng, d))));
        }
        if self.extremal {
            if let Some(rho) = extremal_state(prop, sigma)? {
                out.push(("gap_mode".to_string(), rho));
            }
        }
        Ok(out)
    }
}

/// `σ + (λ_min/2)·Y` where `Y = σ^{1/2} X σ^{1/2}` has unit operator norm and `𝓛(X) = −g X`.
pub fn extremal_state(prop: &Propagator, sigma: &GibbsState) -> Result<Option<CMat>> {
    let Some(x) = &prop.gap_mode else { return Ok(None) };
    let mut xh = hermitian_part(x);
    if fro_norm(&xh) < 1e-8 * fro_norm(x) {
        xh = hermitian_part(&(x * Scale(crate::linalg::c(0.0, 1.0))));
    }
    let y = &sigma.half * xh * &sigma.half;
    let n = spectral_norm(&y)?;
    if n == 0.0 {
        return Ok(None);
    }
    Ok(Some(&sigma.sigma + y * Scale(cr(0.5 * sigma.lambda_min / n))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateCrossing {
    pub state_id: String,
    pub t_cross: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    pub epsilon: f64,
    /// Largest first-crossing time over the family, a lower estimate of the worst case.
    pub t_measured: f64,
    /// Gap-based bounds, absent when the generator is not detailed balanced.
    pub t_lower: Option<f64>,
    pub t_upper: Option<f64>,
    pub gap: Option<f64>,
    pub lambda_min: f64,
    pub family: String,
    pub dense_fallback: bool,
    pub crossings: Vec<StateCrossing>,
}

/// Relative bisection tolerance on crossing times.
pub const BISECTION_RTOL: f64 = 1e-3;

fn first_crossing(prop: &Propagator, sigma: &GibbsState, rho0: &CMat, eps: f64, t_scale: f64) -> Result<f64> {
    let prep = prop.prepare(rho0);
    let dist = |t: f64| -> Result<f64> { trace_norm(&(prop.evolve_prepared(&prep, t) - &sigma.sigma)) };
    if dist(0.0)? <= eps {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = t_scale;
    let mut steps = 0;
    while dist(hi)? > eps {
        lo = hi;
        hi *= 2.0;
        steps += 1;
        if steps > 200 || !hi.is_finite() {
            return Err(Error::Bisection(format!("distance stays above {eps} up to t = {hi:e}")));
        }
    }
    let mut iters = 0;
    while hi - lo > BISECTION_RTOL * hi {
        let mid = 0.5 * (lo + hi);
        if dist(mid)? > eps {
            lo = mid;
        } else {
            hi = mid;
        }
        iters += 1;
        if iters > 200 {
            return Err(Error::Bisection("bisection did not converge".into()));
        }
    }
    Ok(hi)
}

/// First ε-crossing of `‖e^{t𝓛†}ρ − σ‖_Tr` for every state of the family.
pub fn mixing_time_estimate(
    gen: &Generator,
    sigma: &GibbsState,
    eps: f64,
    family: &InitialFamily,
) -> Result<MixingReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("ε must lie in (0, 1), got {eps}")));
    }
    let prop = Propagator::new(gen, sigma)?;
    mixing_time_with(&prop, sigma, eps, family)
}

/// Same as [`mixing_time_estimate`] with a prebuilt propagator.
pub fn mixing_time_with(prop: &Propagator, sigma: &GibbsState, eps: f64, family: &InitialFamily) -> Result<MixingReport> {
    let states = family.states(prop, sigma)?;
    let t_scale = if prop.gap.is_finite() && prop.gap > 0.0 { 0.1 / prop.gap } else { 0.1 };
    let crossings = states
        .iter()
        .map(|(id, rho)| Ok(StateCrossing { state_id: id.clone(), t_cross: first_crossing(prop, sigma, rho, eps, t_scale)? }))
        .collect::<Result<Vec<_>>>()?;
    let t_measured = crossings.iter().map(|c| c.t_cross).fold(0.0, f64::max);
    let gap = (prop.gap > 0.0).then_some(prop.gap);
    let bounds = gap.map(|g| mixing_bounds_from_gap(g, sigma.lambda_min, eps));
    Ok(MixingReport {
        epsilon: eps,
        t_measured,
        t_lower: bounds.map(|b| b.0),
        t_upper: bounds.map(|b| b.1),
        gap,
        lambda_min: sigma.lambda_min,
        family: family.describe(),
        dense_fallback: prop.dense_fallback,
        crossings,
    })
}

/// Decay rate `g` fitted from `χ²(ρ(t), σ) ≈ C e^{−2gt}` by least squares on `log χ²`.
pub fn chi_square_decay_rate(prop: &Propagator, sigma: &GibbsState, rho0: &CMat, times: &[f64]) -> f64 {
    let prep = prop.prepare(rho0);
    let pts: Vec<(f64, f64)> =
        times.iter().map(|&t| (t, chi_square(&prop.evolve_prepared(&prep, t), sigma).ln())).collect();
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    -0.5 * sxy / sxx
}

/// Populations and containment data for the defect-bond bottleneck.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BottleneckWitness {
    pub sites: (usize, usize),
    /// `Tr[Π_A σ]` with both spins up.
    pub weight_aligned_up: f64,
    /// `Tr[Π_B σ]` with the spins misaligned.
    pub weight_misaligned: f64,
    /// `Tr[Π_C σ]` with both spins down.
    pub weight_aligned_down: f64,
    /// `‖Π_A 𝓛(Π_C)‖ + ‖𝓛(Π_C) Π_A‖`.
    pub containment_residual: f64,
}

/// Projector data for a `−J Z_i Z_j` bond whose remainder commutes with `Z_i` and `Z_j`.
pub fn bottleneck_witness(
    spec: &HamiltonianSpec,
    sites: (usize, usize),
    l_heisenberg: &Superoperator,
    sigma: &GibbsState,
) -> Result<BottleneckWitness> {
    let (i, j) = sites;
    let n = spec.n;
    if i >= n || j >= n || i == j {
        return Err(Error::InvalidArgument(format!("invalid bond ({i}, {j}) for n = {n}")));
    }
    let has_bond = spec.terms.iter().any(|t| {
        let mut s: Vec<usize> = t.sites().collect();
        s.sort_unstable();
        s == [i.min(j), i.max(j)] && t.factors.iter().all(|f| f.1 == Pauli::Z) && t.coeff < 0.0
    });
    if !has_bond {
        return Err(Error::InvalidArgument(format!("no ferromagnetic ZZ bond on ({i}, {j})")));
    }
    let h = assemble_dense(spec)?;
    let zi = pauli_string_matrix(n, &[(i, Pauli::Z)]);
    let zj = pauli_string_matrix(n, &[(j, Pauli::Z)]);
    let scale = spectral_norm(&h)?.max(1.0);
    for z in [&zi, &zj] {
        if spectral_norm(&commutator(&h, z))? > 1e-10 * scale {
            return Err(Error::InvalidArgument("bond spins are not conserved by the remaining Hamiltonian".into()));
        }
    }
    let d = h.nrows();
    let id = identity(d);
    let quarter = Scale(cr(0.25));
    let pa = (&id + &zi) * (&id + &zj) * quarter;
    let pc = (&id - &zi) * (&id - &zj) * quarter;
    let pb = &id - &pa - &pc;
    let lpc = l_heisenberg.apply(&pc);
    let containment_residual = spectral_norm(&(&pa * &lpc))? + spectral_norm(&(&lpc * &pa))?;
    let w = |p: &CMat| trace(&(p * &sigma.sigma)).re;
    Ok(BottleneckWitness {
        sites,
        weight_aligned_up: w(&pa),
        weight_misaligned: w(&pb),
        weight_aligned_down: w(&pc),
        containment_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{defected_ising_1d, single_site_paulis, PauliTerm};
    use crate::lindblad::{build_ckg_generator, theta, Eigensystem, WeightFunction, BOHR_TOL};
    use crate::linalg::{eigvalsh, max_abs};
    use crate::spectral::spectral_gap;

    fn system(spec: &HamiltonianSpec, beta: f64) -> (Generator, GibbsState) {
        let h = assemble_dense(spec).unwrap();
        let es = Eigensystem::new(&h, BOHR_TOL).unwrap();
        let sigma = GibbsState::new(&es, beta).unwrap();
        let s = single_site_paulis(spec.n, &(0..spec.n).collect::<Vec<_>>());
        (build_ckg_generator(&h, &s, WeightFunction::metropolis(beta)).unwrap(), sigma)
    }

    fn two_qubit() -> HamiltonianSpec {
        HamiltonianSpec::new(
            2,
            vec![PauliTerm::new(-1.0, &[(0, Pauli::Z), (1, Pauli::Z)]), PauliTerm::new(-0.3, &[(0, Pauli::Z)])],
        )
    }

    #[test]
    fn zero_time_is_identity_map() {
        let (g, s) = system(&two_qubit(), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = crate::linalg::random_density(&mut rng, 4);
        assert!(max_abs(&(evolve(&g, &s, &rho, 0.0).unwrap() - &rho)) < 1e-12);
    }

    #[test]
    fn spectral_and_dense_propagation_agree() {
        let (g, s) = system(&two_qubit(), 1.0);
        let prop = Propagator::new(&g, &s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = crate::linalg::random_density(&mut rng, 4);
        for t in [0.1, 0.7, 2.5] {
            let a = prop.evolve(&rho, t);
            let b = evolve_dense(&g.schrodinger, &rho, t);
            assert!(max_abs(&(&a - &b)) < 1e-9);
            assert!((trace(&a).re - 1.0).abs() < 1e-10);
            assert!(eigvalsh(&hermitian_part(&a)).unwrap()[0] >= -1e-10);
        }
        let late = prop.evolve(&rho, 1e3 / prop.gap);
        assert!(trace_norm(&(late - &s.sigma)).unwrap() < 1e-8);
    }

    #[test]
    fn trace_distance_is_monotone() {
        let (g, s) = system(&two_qubit(), 1.0);
        let prop = Propagator::new(&g, &s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = outer(&haar_state(&mut rng, 4));
        let mut last = f64::INFINITY;
        for k in 0..40 {
            let t = 1e-3 * 1.3f64.powi(k);
            let r = prop.evolve(&rho, t);
            assert!((trace(&r).re - 1.0).abs() < 1e-10);
            let d = trace_norm(&(r - &s.sigma)).unwrap();
            assert!(d <= last + 1e-12);
            last = d;
        }
    }

    #[test]
    fn single_qubit_crossing_matches_exponential_decay() {
        let g = build_ckg_generator(&identity(2), &single_site_paulis(1, &[0]), WeightFunction::metropolis(1.0)).unwrap();
        let s = GibbsState::new(&Eigensystem::new(&identity(2), BOHR_TOL).unwrap(), 1.0).unwrap();
        let eps = 1e-2;
        let fam = InitialFamily { computational: true, sigma_eigenstates: false, haar: 0, seed: 0, extremal: false };
        let rep = mixing_time_estimate(&g, &s, eps, &fam).unwrap();
        let rate = 4.0 * theta(0.0);
        let exact = (1.0 / eps).ln() / rate;
        assert!((rep.t_measured - exact).abs() / exact < 0.01, "{} vs {exact}", rep.t_measured);
    }

    #[test]
    fn two_qubit_mixing_time_is_sandwiched() {
        let (g, s) = system(&two_qubit(), 1.0);
        let rep = mixing_time_estimate(&g, &s, 1e-2, &InitialFamily::default()).unwrap();
        let (lo, hi) = (rep.t_lower.unwrap(), rep.t_upper.unwrap());
        assert!(lo <= rep.t_measured && rep.t_measured <= hi, "{rep:?}");
        let rep2 = mixing_time_estimate(&g, &s, 5e-3, &InitialFamily::default()).unwrap();
        assert!(rep2.t_measured >= rep.t_measured);
        assert_eq!(rep.crossings.len(), 4 + 4 + 20 + 1);
    }

    #[test]
    fn defected_ising_mixing_time_is_sandwiched() {
        let (g, s) = system(&defected_ising_1d(3, 4.0).unwrap(), 1.0);
        let rep = mixing_time_estimate(&g, &s, 1e-2, &InitialFamily::default()).unwrap();
        let (lo, hi) = (rep.t_lower.unwrap(), rep.t_upper.unwrap());
        assert!(lo <= rep.t_measured && rep.t_measured <= hi, "{rep:?}");
    }

    #[test]
    fn gap_bounds_scaling() {
        let (lo, hi) = mixing_bounds_from_gap(0.5, 0.1, 0.05);
        assert_eq!(lo, 0.0);
        let (lo2, hi2) = mixing_bounds_from_gap(1.0, 0.1, 0.05);
        assert_eq!(lo2, 0.0);
        assert!((hi2 - hi / 2.0).abs() < 1e-12);
        let (a, b) = mixing_bounds_from_gap(0.5, 0.1, 1e-3);
        let (c, d) = mixing_bounds_from_gap(1.0, 0.1, 1e-3);
        assert!((c - a / 2.0).abs() < 1e-12 && (d - b / 2.0).abs() < 1e-12);
    }

    #[test]
    fn chi_square_values_and_contraction() {
        let (g, s) = system(&two_qubit(), 1.0);
        assert!(chi_square(&s.sigma, &s).abs() < 1e-14);
        let k = (0..4).min_by(|&a, &b| s.probs[a].total_cmp(&s.probs[b])).unwrap();
        let v = Mat::from_fn(4, 1, |i, _| s.vectors[(i, k)]);
        let chi = chi_square(&outer(&v), &s);
        assert!((chi - (1.0 / s.lambda_min - 1.0)).abs() < 1e-9 * chi);
        let prop = Propagator::new(&g, &s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rho = outer(&haar_state(&mut rng, 4));
        let c0 = chi_square(&rho, &s);
        assert!(trace_norm(&(&rho - &s.sigma)).unwrap() <= c0.sqrt() + 1e-12);
        for k in 0..20 {
            let t = 0.2 * k as f64;
            let ct = chi_square(&prop.evolve(&rho, t), &s);
            assert!(ct <= (-2.0 * prop.gap * t).exp() * c0 * (1.0 + 1e-9) + 1e-15);
        }
    }

    #[test]
    fn chi_square_rate_matches_gap() {
        let (g, s) = system(&two_qubit(), 1.0);
        let prop = Propagator::new(&g, &s).unwrap();
        let gap = spectral_gap(&g.heisenberg, &s).unwrap().gap;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = outer(&haar_state(&mut rng, 4));
        let times: Vec<f64> = (0..20).map(|k| (6.0 + 0.5 * k as f64) / gap).collect();
        let fitted = chi_square_decay_rate(&prop, &s, &rho, &times);
        assert!((fitted - gap).abs() / gap < 0.05, "{fitted} vs {gap}");
    }

    #[test]
    fn extremal_state_is_a_density_matrix() {
        let (g, s) = system(&defected_ising_1d(3, 2.0).unwrap(), 1.0);
        let prop = Propagator::new(&g, &s).unwrap();
        let rho = extremal_state(&prop, &s).unwrap().unwrap();
        assert!((trace(&rho).re - 1.0).abs() < 1e-12);
        assert!(eigvalsh(&hermitian_part(&rho)).unwrap()[0] > 0.0);
    }

    #[test]
    fn non_detailed_balanced_generator_falls_back() {
        let (g, s) = system(&two_qubit(), 1.0);
        let skew = Superoperator::from_matrix(
            &g.heisenberg.matrix + crate::linalg::random_complex(&mut ChaCha8Rng::seed_from_u64(3), 16, 16) * Scale(cr(0.1)),
            4,
            crate::lindblad::Picture::Heisenberg,
        )
        .unwrap();
        let bad = Generator { schrodinger: skew.adjoint(), heisenberg: skew };
        let prop = Propagator::new(&bad, &s).unwrap();
        assert!(prop.dense_fallback);
        let rho = s.sigma.clone();
        let a = prop.evolve(&rho, 0.3);
        let b = evolve_dense(&bad.schrodinger, &rho, 0.3);
        assert!(max_abs(&(a - b)) < 1e-12);
    }

    #[test]
    fn bottleneck_witness_on_defected_ring() {
        for j in [2.0, 3.0, 4.0, 5.0] {
            let spec = defected_ising_1d(4, j).unwrap();
            let (g, s) = system(&spec, 1.0);
            let w = bottleneck_witness(&spec, (0, 1), &g.heisenberg, &s).unwrap();
            assert!(w.containment_residual < 1e-10, "{w:?}");
            assert!(w.weight_misaligned <= 10.0 * (-2.0 * j).exp());
            if j == 5.0 {
                assert!(w.weight_aligned_up + w.weight_aligned_down >= 0.9);
            }
        }
        let spec = defected_ising_1d(4, 2.0).unwrap();
        let (g, s) = system(&spec, 1.0);
        assert!(bottleneck_witness(&spec, (0, 2), &g.heisenberg, &s).is_err());
    }
}
