use faer::{Mat, Scale};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{pauli_string_matrix, HamiltonianSpec, Pauli, PauliTerm};
use crate::error::{Error, Result};
use crate::linalg::{
    adjoint, commutator, cr, eigh, fro_norm, identity, kron, spectral_norm, CMat,
};

const COMMUTE_TOL: f64 = 1e-10;

/// Decomposition `H = H_A ⊗ I_B + I_A ⊗ H_B + Σ_k V_A^{(k)} ⊗ V_B^{(k)}`.
#[derive(Debug, Clone)]
pub struct CutReport {
    pub holds: bool,
    pub a_sites: Vec<usize>,
    pub b_sites: Vec<usize>,
    pub h_a: CMat,
    pub h_b: CMat,
    pub factors: Vec<(CMat, CMat)>,
    pub k: usize,
    pub v_max: f64,
    /// Relative commutator norms `‖[X, Y]‖ / (‖X‖‖Y‖)` over all A-side pairs, then all B-side pairs.
    pub commutator_residuals: Vec<f64>,
    /// `‖H − reassembly‖ / ‖H‖` in the (A, B) tensor order.
    pub decomposition_residual: f64,
    pub h_ab_norm: f64,
    pub diagnostic: Option<String>,
    /// Basis permutation from site order to (A, B) order: `new = perm[old]`.
    pub perm: Vec<usize>,
}

impl CutReport {
    pub fn d_a(&self) -> usize {
        1 << self.a_sites.len()
    }

    pub fn d_b(&self) -> usize {
        1 << self.b_sites.len()
    }

    pub fn kv_max(&self) -> f64 {
        self.k as f64 * self.v_max
    }

    pub fn is_identity_order(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// Re-express a site-ordered operator in the (A, B) tensor order.
    pub fn to_ab_order(&self, m: &CMat) -> CMat {
        let d = self.perm.len();
        let mut out = Mat::zeros(d, d);
        for j in 0..d {
            for i in 0..d {
                out[(self.perm[i], self.perm[j])] = m[(i, j)];
            }
        }
        out
    }

    /// Inverse of [`CutReport::to_ab_order`].
    pub fn from_ab_order(&self, m: &CMat) -> CMat {
        let d = self.perm.len();
        Mat::from_fn(d, d, |i, j| m[(self.perm[i], self.perm[j])])
    }

    /// A-side operators `{H_A} ∪ {V_A^{(k)}}`.
    pub fn a_side_operators(&self) -> Vec<CMat> {
        std::iter::once(self.h_a.clone()).chain(self.factors.iter().map(|f| f.0.clone())).collect()
    }

    pub fn b_side_operators(&self) -> Vec<CMat> {
        std::iter::once(self.h_b.clone()).chain(self.factors.iter().map(|f| f.1.clone())).collect()
    }
}

fn local_positions(term: &PauliTerm, subset: &[usize]) -> Vec<(usize, Pauli)> {
    term.factors
        .iter()
        .filter_map(|&(s, p)| subset.iter().position(|&x| x == s).map(|pos| (pos, p)))
        .collect()
}

fn site_permutation(n: usize, order: &[usize]) -> Vec<usize> {
    (0..1usize << n)
        .map(|k| {
            order.iter().enumerate().fold(0usize, |acc, (pos, &site)| {
                acc | (((k >> (n - 1 - site)) & 1) << (n - 1 - pos))
            })
        })
        .collect()
}

fn pairwise_residuals(ops: &[CMat]) -> Result<Vec<f64>> {
    let norms: Vec<f64> = ops.iter().map(spectral_norm).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for i in 0..ops.len() {
        for j in (i + 1)..ops.len() {
            let scale = norms[i] * norms[j];
            let r = if scale == 0.0 { 0.0 } else { spectral_norm(&commutator(&ops[i], &ops[j]))? / scale };
            out.push(r);
        }
    }
    Ok(out)
}

/// Classify terms across the partition and test the mutual-commutation conditions.
pub fn check_commuting_cut(spec: &HamiltonianSpec) -> Result<CutReport> {
    spec.validate()?;
    let part = spec
        .partition
        .as_ref()
        .ok_or_else(|| Error::CutFailure("Hamiltonian has no partition".into()))?;
    let (a_sites, b_sites) = (part.a.clone(), part.b.clone());
    let (na, nb) = (a_sites.len(), b_sites.len());
    let (da, db) = (1usize << na, 1usize << nb);
    let mut h_a: CMat = Mat::zeros(da, da);
    let mut h_b: CMat = Mat::zeros(db, db);
    let mut factors = Vec::new();
    for t in &spec.terms {
        let in_a = t.sites().any(|s| a_sites.contains(&s));
        let in_b = t.sites().any(|s| b_sites.contains(&s));
        let pa = pauli_string_matrix(na, &local_positions(t, &a_sites));
        let pb = pauli_string_matrix(nb, &local_positions(t, &b_sites));
        match (in_a, in_b) {
            (true, true) => factors.push((&pa * Scale(cr(t.coeff)), pb)),
            (false, true) => h_b += &pb * Scale(cr(t.coeff)),
            _ => h_a += &pa * Scale(cr(t.coeff)),
        }
    }
    let k = factors.len();
    let mut v_max = 0.0f64;
    let mut h_ab: CMat = Mat::zeros(da * db, da * db);
    for (va, vb) in &factors {
        let prod = kron(va, vb);
        v_max = v_max.max(spectral_norm(&prod)?);
        h_ab += prod;
    }
    let h_ab_norm = spectral_norm(&h_ab)?;

    let mut order = a_sites.clone();
    order.extend(&b_sites);
    let perm = site_permutation(spec.n, &order);
    let mut report = CutReport {
        holds: false,
        a_sites,
        b_sites,
        h_a,
        h_b,
        factors,
        k,
        v_max,
        commutator_residuals: Vec::new(),
        decomposition_residual: 0.0,
        h_ab_norm,
        diagnostic: None,
        perm,
    };

    let full = report.to_ab_order(&super::assemble_dense(spec)?);
    let rebuilt = kron(&report.h_a, &identity(db)) + kron(&identity(da), &report.h_b) + &h_ab;
    let scale = fro_norm(&full).max(1e-300);
    report.decomposition_residual = fro_norm(&(&full - &rebuilt)) / scale;

    let mut res = pairwise_residuals(&report.a_side_operators())?;
    let nares = res.len();
    res.extend(pairwise_residuals(&report.b_side_operators())?);
    let worst = res.iter().copied().fold(0.0, f64::max);
    report.holds = worst <= COMMUTE_TOL && report.decomposition_residual <= 1e-10;
    if !report.holds {
        let side = match res.iter().position(|&r| r > COMMUTE_TOL) {
            Some(i) if i < nares => "A-side",
            Some(_) => "B-side",
            None => "reassembly",
        };
        report.diagnostic = Some(format!("{side} condition violated (worst relative commutator {worst:e})"));
    }
    report.commutator_residuals = res;
    Ok(report)
}

/// Orthonormal basis of the A factor that simultaneously diagonalizes the A-side operators.
#[derive(Debug, Clone)]
pub struct ABasis {
    /// Columns are the basis vectors `|i_A⟩`.
    pub vectors: CMat,
    pub residual: f64,
}

impl ABasis {
    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn vector(&self, i: usize) -> CMat {
        Mat::from_fn(self.vectors.nrows(), 1, |r, _| self.vectors[(r, i)])
    }
}

fn offdiag_mass(op: &CMat, u: &CMat) -> f64 {
    let t = adjoint(u) * op * u;
    let n = t.nrows();
    let mut off = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                off += t[(i, j)].norm_sqr();
            }
        }
    }
    off.sqrt()
}

fn simultaneous_residual(ops: &[CMat], u: &CMat) -> Result<f64> {
    let mut worst = 0.0f64;
    for op in ops {
        let nrm = fro_norm(op);
        if nrm > 0.0 {
            worst = worst.max(offdiag_mass(op, u) / nrm);
        }
    }
    Ok(worst)
}

fn random_combination(ops: &[CMat], rng: &mut ChaCha8Rng) -> CMat {
    let d = ops[0].nrows();
    let mut m: CMat = Mat::zeros(d, d);
    for op in ops {
        let w: f64 = rng.random_range(0.5..1.5);
        let nrm = fro_norm(op).max(1e-300);
        m += op * Scale(cr(w / nrm));
    }
    m
}

/// Split ascending eigenvalues into near-degenerate blocks.
fn degenerate_blocks(vals: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 1..=vals.len() {
        if i == vals.len() || vals[i] - vals[i - 1] > tol {
            blocks.push(start..i);
            start = i;
        }
    }
    blocks
}

/// Simultaneous eigenbasis of `{H_A} ∪ {V_A^{(k)}}` from seeded random combinations.
pub fn a_side_eigenbasis(report: &CutReport, seed: u64) -> Result<ABasis> {
    if !report.holds {
        return Err(Error::CutFailure(
            report.diagnostic.clone().unwrap_or_else(|| "cut does not hold".into()),
        ));
    }
    simultaneous_eigenbasis(&report.a_side_operators(), seed)
}

/// Same construction for `{H_B} ∪ {V_B^{(k)}}`.
pub fn b_side_eigenbasis(report: &CutReport, seed: u64) -> Result<ABasis> {
    if !report.holds {
        return Err(Error::CutFailure(
            report.diagnostic.clone().unwrap_or_else(|| "cut does not hold".into()),
        ));
    }
    simultaneous_eigenbasis(&report.b_side_operators(), seed)
}

/// Orthonormal basis diagonalizing a commuting family of Hermitian matrices.
///
/// A random positive combination is diagonalized first; degenerate blocks
/// are refined with fresh combinations, at most two rounds.
pub fn simultaneous_eigenbasis(ops: &[CMat], seed: u64) -> Result<ABasis> {
    if ops.is_empty() {
        return Err(Error::InvalidArgument("empty operator family".into()));
    }
    let d = ops[0].nrows();
    let tol = 1e-10;
    let eye = identity(d);
    if simultaneous_residual(ops, &eye)? <= tol {
        return Ok(ABasis { vectors: eye, residual: 0.0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (vals, mut u) = eigh(&random_combination(ops, &mut rng))?;
    let mut blocks = degenerate_blocks(&vals, 1e-8);
    for _round in 0..2 {
        let r = simultaneous_residual(ops, &u)?;
        if r <= tol {
            return Ok(ABasis { vectors: u, residual: r });
        }
        let comb = random_combination(ops, &mut rng);
        let mut next_blocks = Vec::new();
        for b in &blocks {
            if b.len() == 1 {
                next_blocks.push(b.clone());
                continue;
            }
            let sub = Mat::from_fn(d, b.len(), |i, j| u[(i, b.start + j)]);
            let small = adjoint(&sub) * &comb * &sub;
            let (sv, sw) = eigh(&small)?;
            let rotated = &sub * &sw;
            for j in 0..b.len() {
                for i in 0..d {
                    u[(i, b.start + j)] = rotated[(i, j)];
                }
            }
            for inner in degenerate_blocks(&sv, 1e-8) {
                next_blocks.push((b.start + inner.start)..(b.start + inner.end));
            }
        }
        blocks = next_blocks;
    }
    let r = simultaneous_residual(ops, &u)?;
    if r <= tol {
        Ok(ABasis { vectors: u, residual: r })
    } else {
        Err(Error::SimultaneousDiagonalization(r))
    }
}

/// `(⟨i_A| ⊗ I_B) H (|i_A⟩ ⊗ I_B)` for `H` in (A, B) tensor order.
pub fn compress_onto(h: &CMat, v: &CMat, d_a: usize, d_b: usize) -> Result<CMat> {
    if h.nrows() != d_a * d_b || h.ncols() != d_a * d_b || v.nrows() != d_a || v.ncols() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "compress_onto: H is {}×{}, vector is {}×{}, expected factors {d_a}·{d_b}",
            h.nrows(),
            h.ncols(),
            v.nrows(),
            v.ncols()
        )));
    }
    let iso = kron(v, &identity(d_b));
    Ok(adjoint(&iso) * h * &iso)
}

fn label_matrix(l: u8) -> CMat {
    match l {
        1 => Pauli::X.matrix(),
        2 => Pauli::Y.matrix(),
        3 => Pauli::Z.matrix(),
        _ => identity(2),
    }
}

/// Coefficients `c_P = Tr[P M] / 2^n` for every Pauli string `P` (labels 0 = I, 1 = X, 2 = Y, 3 = Z).
pub fn pauli_decompose(m: &CMat, n: usize) -> Vec<(Vec<u8>, crate::C64)> {
    let d = 1usize << n;
    let mut out = Vec::with_capacity(1 << (2 * n));
    for code in 0..(1usize << (2 * n)) {
        let labels: Vec<u8> = (0..n).map(|s| ((code >> (2 * (n - 1 - s))) & 3) as u8).collect();
        let p = labels.iter().fold(identity(1), |acc, &l| kron(&acc, &label_matrix(l)));
        let mut t = cr(0.0);
        for i in 0..d {
            for j in 0..d {
                t += p[(i, j)] * m[(j, i)];
            }
        }
        out.push((labels, t / (d as f64)));
    }
    out
}

/// Sites on which some Pauli string with coefficient above `tol` acts nontrivially.
pub fn pauli_support(m: &CMat, n: usize, tol: f64) -> Vec<usize> {
    let mut sup = vec![false; n];
    for (labels, coef) in pauli_decompose(m, n) {
        if coef.norm() > tol {
            for (s, &l) in labels.iter().enumerate() {
                if l != 0 {
                    sup[s] = true;
                }
            }
        }
    }
    (0..n).filter(|&s| sup[s]).collect()
}
