//! Detailed-balanced Lindbladians assembled in the energy eigenbasis.
//!
//! For coupling operators `S^a` with Bohr components `S^a_ν`, the Heisenberg
//! generator is
//!
//! ```text
//! L(X) = i[G, X] + Σ_a Σ_{ν₁,ν₂} α_{ν₁,ν₂} ( S_{ν₁}† X S_{ν₂} − ½{S_{ν₁}† S_{ν₂}, X} )
//! ```
//!
//! with `α` the filtered weight overlaps of [`filters`] and the coherent term
//! `G = Σ tanh(−β(ν₁−ν₂)/4)/(2i) · α_{ν₁,ν₂} · S_{ν₂}† S_{ν₁}` that restores
//! KMS detailed balance for non-commuting problems.

pub mod filters;

pub use filters::{alpha_closed, alpha_coeff, erfc, filter_fhat, theta, weight, WeightFunction, WeightKind};

use faer::{Mat, Scale};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    adjoint, c, conj, cr, eigh, fro_norm, identity, kron, random_complex, spectral_fn, unvec_op,
    vec_op, CMat, C64,
};

/// Default relative tolerance for grouping Bohr frequencies.
pub const BOHR_TOL: f64 = 1e-9;

/// Spectrum of a Hamiltonian with grouped Bohr frequencies.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMat,
    /// Ascending, closed under negation, contains 0.
    pub bohr: Vec<f64>,
    /// Group id of `λ_i − λ_j`, stored at `i·D + j`.
    pub bohr_index: Vec<usize>,
    pub group_tol: f64,
}

impl Eigensystem {
    pub fn new(h: &CMat, group_tol: f64) -> Result<Self> {
        let (vals, vecs) = eigh(h)?;
        Ok(Self::from_parts(vals, vecs, group_tol))
    }

    pub fn from_parts(eigenvalues: Vec<f64>, eigenvectors: CMat, group_tol: f64) -> Self {
        let d = eigenvalues.len();
        let hnorm = eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let tol = group_tol * hnorm.max(1.0);
        let mut mags: Vec<(f64, usize)> = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                mags.push(((eigenvalues[i] - eigenvalues[j]).abs(), i * d + j));
            }
        }
        mags.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut cluster_of = vec![0usize; d * d];
        let mut reps: Vec<f64> = Vec::new();
        let mut start = 0;
        for k in 1..=mags.len() {
            if k == mags.len() || mags[k].0 - mags[k - 1].0 > tol {
                let members = &mags[start..k];
                let rep = if members[0].0 <= tol {
                    0.0
                } else {
                    members.iter().map(|m| m.0).sum::<f64>() / members.len() as f64
                };
                for m in members {
                    cluster_of[m.1] = reps.len();
                }
                reps.push(rep);
                start = k;
            }
        }
        let has_zero = reps.first().is_some_and(|&r| r == 0.0);
        let positive: Vec<f64> = reps.iter().copied().filter(|&r| r > 0.0).collect();
        let np = positive.len();
        let mut bohr: Vec<f64> = positive.iter().rev().map(|r| -r).collect();
        let zero_pos = np;
        bohr.push(0.0);
        bohr.extend(positive.iter().copied());
        let mut bohr_index = vec![0usize; d * d];
        for i in 0..d {
            for j in 0..d {
                let cl = cluster_of[i * d + j];
                let pos_rank = if has_zero { cl.checked_sub(1) } else { Some(cl) };
                bohr_index[i * d + j] = match pos_rank {
                    None => zero_pos,
                    Some(r) if eigenvalues[i] >= eigenvalues[j] => zero_pos + 1 + r,
                    Some(r) => zero_pos - 1 - r,
                };
            }
        }
        Self { eigenvalues, eigenvectors, bohr, bohr_index, group_tol }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Grouped frequency of the pair `(i, j)`, i.e. `λ_i − λ_j` up to grouping.
    #[inline]
    pub fn nu(&self, i: usize, j: usize) -> f64 {
        self.bohr[self.bohr_index[i * self.dim() + j]]
    }

    pub fn norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// Thermal state `e^{−βH}/Z` with cached fractional powers.
#[derive(Debug, Clone)]
pub struct GibbsState {
    pub beta: f64,
    pub sigma: CMat,
    /// Populations of the Hamiltonian eigenvectors.
    pub probs: Vec<f64>,
    pub vectors: CMat,
    pub lambda_min: f64,
    pub quarter: CMat,
    pub inv_quarter: CMat,
    pub half: CMat,
    pub inv_half: CMat,
}

impl GibbsState {
    pub fn new(es: &Eigensystem, beta: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidArgument(format!("β must be finite and ≥ 0, got {beta}")));
        }
        let shift = es.eigenvalues.iter().fold(f64::INFINITY, |m, &x| m.min(x));
        let w: Vec<f64> = es.eigenvalues.iter().map(|&l| (-beta * (l - shift)).exp()).collect();
        let z: f64 = w.iter().sum();
        let probs: Vec<f64> = w.iter().map(|x| x / z).collect();
        Ok(Self::from_probs(beta, probs, es.eigenvectors.clone()))
    }

    /// State `Σ_k p_k |u_k⟩⟨u_k|` for normalized positive populations.
    pub fn from_probs(beta: f64, probs: Vec<f64>, vectors: CMat) -> Self {
        let f = |s: f64| {
            let p = &probs;
            let n = p.len();
            Mat::from_fn(n, n, |i, j| {
                let mut acc = cr(0.0);
                for k in 0..n {
                    acc += vectors[(i, k)] * vectors[(j, k)].conj() * p[k].powf(s);
                }
                acc
            })
        };
        let sigma = f(1.0);
        let quarter = f(0.25);
        let inv_quarter = f(-0.25);
        let half = f(0.5);
        let inv_half = f(-0.5);
        let lambda_min = probs.iter().fold(f64::INFINITY, |m, &x| m.min(x));
        Self { beta, sigma, probs, vectors, lambda_min, quarter, inv_quarter, half, inv_half }
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    /// `(σ₁ ⊗ σ₂)` as a Gibbs state on the product space.
    pub fn tensor(&self, other: &GibbsState) -> GibbsState {
        let probs: Vec<f64> =
            self.probs.iter().flat_map(|&a| other.probs.iter().map(move |&b| a * b)).collect();
        GibbsState::from_probs(self.beta, probs, kron(&self.vectors, &other.vectors))
    }
}

/// Convenience: Gibbs state of a dense Hamiltonian.
pub fn gibbs_state(es: &Eigensystem, beta: f64) -> Result<GibbsState> {
    GibbsState::new(es, beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Picture {
    Heisenberg,
    Schrodinger,
}

/// Dense linear map on column-stacked `d × d` operators.
#[derive(Debug, Clone)]
pub struct Superoperator {
    pub matrix: CMat,
    pub picture: Picture,
    pub dim: usize,
}

impl Superoperator {
    pub fn zero(dim: usize, picture: Picture) -> Self {
        Self { matrix: Mat::zeros(dim * dim, dim * dim), picture, dim }
    }

    pub fn from_matrix(matrix: CMat, dim: usize, picture: Picture) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "superoperator of size {}×{} for operator dimension {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix, picture, dim })
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        unvec_op(&(&self.matrix * vec_op(x)), self.dim)
    }

    /// Hilbert–Schmidt adjoint, switching picture.
    pub fn adjoint(&self) -> Self {
        let picture = match self.picture {
            Picture::Heisenberg => Picture::Schrodinger,
            Picture::Schrodinger => Picture::Heisenberg,
        };
        Self { matrix: adjoint(&self.matrix), picture, dim: self.dim }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim || self.picture != other.picture {
            return Err(Error::DimensionMismatch("superoperator sum of incompatible maps".into()));
        }
        Ok(Self { matrix: &self.matrix + &other.matrix, picture: self.picture, dim: self.dim })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { matrix: &self.matrix * Scale(cr(s)), picture: self.picture, dim: self.dim }
    }

    /// `L₁ ⊗ L₂` acting on operators of the product space `d₁·d₂`.
    pub fn tensor(&self, other: &Self) -> Self {
        let (d1, d2) = (self.dim, other.dim);
        let d = d1 * d2;
        let (a, b) = (&self.matrix, &other.matrix);
        let mut m: CMat = Mat::zeros(d * d, d * d);
        for c1p in 0..d1 {
            for r1p in 0..d1 {
                let col1 = c1p * d1 + r1p;
                for c1 in 0..d1 {
                    for r1 in 0..d1 {
                        let x = a[(c1 * d1 + r1, col1)];
                        if x == cr(0.0) {
                            continue;
                        }
                        for c2p in 0..d2 {
                            for r2p in 0..d2 {
                                let col2 = c2p * d2 + r2p;
                                let jcol = (c1p * d2 + c2p) * d + r1p * d2 + r2p;
                                for c2 in 0..d2 {
                                    for r2 in 0..d2 {
                                        let y = b[(c2 * d2 + r2, col2)];
                                        if y != cr(0.0) {
                                            m[((c1 * d2 + c2) * d + r1 * d2 + r2, jcol)] += x * y;
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Self { matrix: m, picture: self.picture, dim: d }
    }

    pub fn identity(dim: usize, picture: Picture) -> Self {
        Self { matrix: identity(dim * dim), picture, dim }
    }
}

/// How the α table is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlphaMethod {
    #[default]
    ClosedForm,
    Quadrature,
}

/// Memoized `α` over pairs of Bohr groups.
struct AlphaTable<'a> {
    es: &'a Eigensystem,
    w: WeightFunction,
    method: AlphaMethod,
    cache: Vec<f64>,
}

impl<'a> AlphaTable<'a> {
    fn new(es: &'a Eigensystem, w: WeightFunction, method: AlphaMethod) -> Self {
        let nb = es.bohr.len();
        Self { es, w, method, cache: vec![f64::NAN; nb * nb] }
    }

    fn get(&mut self, g1: usize, g2: usize) -> Result<f64> {
        let nb = self.es.bohr.len();
        let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
        let slot = lo * nb + hi;
        let v = self.cache[slot];
        if !v.is_nan() {
            return Ok(v);
        }
        let (n1, n2) = (self.es.bohr[lo], self.es.bohr[hi]);
        let v = match self.method {
            AlphaMethod::ClosedForm => alpha_closed(n1, n2, self.w),
            AlphaMethod::Quadrature => alpha_coeff(n1, n2, self.w)?,
        };
        self.cache[slot] = v;
        Ok(v)
    }
}

/// Bohr components `S_ν = Σ_{λ_i−λ_j=ν} |i⟩⟨i|S|j⟩⟨j|` in the computational basis.
pub fn jump_components(s: &CMat, es: &Eigensystem) -> Vec<(f64, CMat)> {
    let d = es.dim();
    let u = &es.eigenvectors;
    let st = adjoint(u) * s * u;
    let mut parts: Vec<Option<CMat>> = vec![None; es.bohr.len()];
    for i in 0..d {
        for j in 0..d {
            if st[(i, j)].norm() == 0.0 {
                continue;
            }
            let g = es.bohr_index[i * d + j];
            let m = parts[g].get_or_insert_with(|| Mat::zeros(d, d));
            m[(i, j)] = st[(i, j)];
        }
    }
    parts
        .into_iter()
        .enumerate()
        .filter_map(|(g, m)| m.map(|m| (es.bohr[g], u * m * adjoint(u))))
        .collect()
}

fn coupling_dims(d: usize, couplings: &[(CMat, WeightFunction)]) -> Result<()> {
    for (k, (s, _)) in couplings.iter().enumerate() {
        if s.nrows() != d || s.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "coupling {k} is {}×{}, Hamiltonian dimension is {d}",
                s.nrows(),
                s.ncols()
            )));
        }
    }
    Ok(())
}

/// Coherent and dissipative pieces of one coupling in the eigenbasis.
struct CouplingBlocks {
    g: CMat,
    k: CMat,
}

fn coupling_blocks(st: &CMat, es: &Eigensystem, table: &mut AlphaTable) -> Result<CouplingBlocks> {
    let d = es.dim();
    let beta = table.w.beta;
    let mut g: CMat = Mat::zeros(d, d);
    let mut k: CMat = Mat::zeros(d, d);
    let half_i = c(0.0, -0.5);
    for cc in 0..d {
        for a in 0..d {
            let sa = st[(cc, a)].conj();
            if sa.norm() == 0.0 {
                continue;
            }
            let ga = es.bohr_index[cc * d + a];
            for b in 0..d {
                let sb = st[(cc, b)];
                if sb.norm() == 0.0 {
                    continue;
                }
                let gb = es.bohr_index[cc * d + b];
                let al = table.get(ga, gb)?;
                let prod = sa * sb;
                k[(a, b)] += prod * al;
                let t = (-beta * (es.bohr[gb] - es.bohr[ga]) / 4.0).tanh();
                if t != 0.0 {
                    g[(a, b)] += prod * (al * t) * half_i;
                }
            }
        }
    }
    Ok(CouplingBlocks { g, k })
}

/// Coherent term `G` in the computational basis for the given couplings.
pub fn coherent_term(es: &Eigensystem, couplings: &[CMat], w: WeightFunction) -> Result<CMat> {
    let d = es.dim();
    let u = &es.eigenvectors;
    let mut table = AlphaTable::new(es, w, AlphaMethod::ClosedForm);
    let mut g: CMat = Mat::zeros(d, d);
    for s in couplings {
        let st = adjoint(u) * s * u;
        g += coupling_blocks(&st, es, &mut table)?.g;
    }
    Ok(u * g * adjoint(u))
}

/// Heisenberg and Schrödinger generators of a CKG Lindbladian.
#[derive(Debug, Clone)]
pub struct Generator {
    pub heisenberg: Superoperator,
    pub schrodinger: Superoperator,
}

/// Assemble the generator with every coupling sharing one weight.
pub fn build_ckg_generator(h: &CMat, couplings: &[CMat], w: WeightFunction) -> Result<Generator> {
    let es = Eigensystem::new(h, BOHR_TOL)?;
    let pairs: Vec<(CMat, WeightFunction)> = couplings.iter().map(|s| (s.clone(), w)).collect();
    build_ckg_generator_with(&es, &pairs, AlphaMethod::ClosedForm)
}

/// Assemble the generator for couplings that may carry different weights.
pub fn build_ckg_generator_with(
    es: &Eigensystem,
    couplings: &[(CMat, WeightFunction)],
    method: AlphaMethod,
) -> Result<Generator> {
    let d = es.dim();
    let u = &es.eigenvectors;
    coupling_dims(d, couplings)?;
    let dd = d * d;
    let mut m: CMat = Mat::zeros(dd, dd);
    let mut q: CMat = Mat::zeros(d, d);
    let mut tables: Vec<(WeightFunction, AlphaTable)> = Vec::new();
    for (s, w) in couplings {
        if !(w.beta > 0.0) {
            return Err(Error::InvalidArgument(format!("generator requires β > 0, got {}", w.beta)));
        }
        let idx = match tables.iter().position(|(tw, _)| tw == w) {
            Some(i) => i,
            None => {
                tables.push((*w, AlphaTable::new(es, *w, method)));
                tables.len() - 1
            }
        };
        let table = &mut tables[idx].1;
        let st = adjoint(u) * s * u;
        let nz: Vec<(usize, usize, C64)> = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .filter_map(|(i, j)| {
                let v = st[(i, j)];
                (v.norm() != 0.0).then_some((i, j, v))
            })
            .collect();
        for &(cc, a, sca) in &nz {
            let g1 = es.bohr_index[cc * d + a];
            let sca = sca.conj();
            for &(e, b, sdb) in &nz {
                let g2 = es.bohr_index[e * d + b];
                let al = table.get(g1, g2)?;
                m[(b * d + a, e * d + cc)] += sca * sdb * al;
            }
        }
        let blocks = coupling_blocks(&st, es, table)?;
        q += blocks.g * Scale(c(0.0, 1.0)) - blocks.k * Scale(cr(0.5));
    }
    m += kron(&identity(d), &q) + kron(&conj(&q), &identity(d));
    let wmat = kron(&conj(u), u);
    let heis = &wmat * m * adjoint(&wmat);
    let heisenberg = Superoperator { matrix: heis, picture: Picture::Heisenberg, dim: d };
    let schrodinger = heisenberg.adjoint();
    Ok(Generator { heisenberg, schrodinger })
}

/// `max |⟨X, L(Y)⟩_σ − ⟨L(X), Y⟩_σ| / (‖X‖_σ ‖Y‖_σ ‖L‖_est)` over 20 seeded random pairs.
pub fn detailed_balance_residual(l: &Superoperator, sigma: &GibbsState) -> Result<f64> {
    if sigma.lambda_min <= 0.0 {
        return Err(Error::InvalidArgument("σ is singular".into()));
    }
    let d = l.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_db);
    let kms = |x: &CMat, y: &CMat| crate::spectral::kms_inner(x, y, sigma);
    let pairs: Vec<(CMat, CMat)> =
        (0..20).map(|_| (random_complex(&mut rng, d, d), random_complex(&mut rng, d, d))).collect();
    let mut est = 0.0f64;
    let mut images = Vec::with_capacity(pairs.len());
    for (x, y) in &pairs {
        let (lx, ly) = (l.apply(x), l.apply(y));
        est = est.max((kms(&lx, &lx).re / kms(x, x).re).sqrt());
        est = est.max((kms(&ly, &ly).re / kms(y, y).re).sqrt());
        images.push((lx, ly));
    }
    if est == 0.0 {
        return Ok(0.0);
    }
    let mut worst = 0.0f64;
    for ((x, y), (lx, ly)) in pairs.iter().zip(&images) {
        let diff = (kms(x, ly) - kms(lx, y)).norm();
        let scale = (kms(x, x).re * kms(y, y).re).sqrt() * est;
        worst = worst.max(diff / scale);
    }
    Ok(worst)
}

/// `‖L†(σ)‖_Tr` for a Schrödinger-picture generator.
pub fn fixed_point_residual(l_schrodinger: &Superoperator, sigma: &GibbsState) -> Result<f64> {
    crate::linalg::trace_norm(&l_schrodinger.apply(&sigma.sigma))
}

/// Matrix function helper re-used by several modules.
pub fn hermitian_function(h: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let (vals, vecs) = eigh(h)?;
    Ok(spectral_fn(&vals, &vecs, f))
}

/// Frobenius norm of the superoperator matrix.
pub fn superop_norm(l: &Superoperator) -> f64 {
    fro_norm(&l.matrix)
}

#[cfg(test)]
mod tests;
