//! Classical baseline: defected Ising energies, Metropolis single-flip dynamics,
//! bottleneck ratios and the classical replica-exchange chain.

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest spin count accepted by [`glauber_generator`].
pub const MAX_SPINS: usize = 14;
/// Largest state count accepted by exact bottleneck enumeration.
pub const MAX_EXACT_STATES: usize = 20;

/// `H(z) = −J z₀z₁ − Σ_{i=1}^{N−1} z_i z_{(i+1) mod N}`.
pub fn classical_defected_ising_energy(z: &[i8], j: f64) -> f64 {
    let n = z.len();
    if n < 2 {
        return 0.0;
    }
    let mut e = -j * f64::from(z[0] * z[1]);
    for i in 1..n {
        e -= f64::from(z[i] * z[(i + 1) % n]);
    }
    e
}

/// Spins of configuration `x`: bit `N−1−k` of `x` is `1` when spin `k` is down.
pub fn spins(x: usize, n: usize) -> Vec<i8> {
    (0..n).map(|k| if (x >> (n - 1 - k)) & 1 == 1 { -1 } else { 1 }).collect()
}

/// Continuous-time reversible Markov chain.
#[derive(Debug, Clone)]
pub struct ClassicalChain {
    /// Generator with nonnegative off-diagonal rates and zero row sums.
    pub q: Mat<f64>,
    pub pi: Vec<f64>,
    pub beta: f64,
    /// Energy of every state when the chain comes from an energy function.
    pub energies: Vec<f64>,
    /// Spin count for single-replica chains.
    pub spins: Option<usize>,
}

impl ClassicalChain {
    pub fn states(&self) -> usize {
        self.pi.len()
    }

    pub fn row_sum_residual(&self) -> f64 {
        (0..self.states()).map(|x| (0..self.states()).map(|y| self.q[(x, y)]).sum::<f64>().abs()).fold(0.0, f64::max)
    }

    /// `max_{x,y} |π_x Q_{xy} − π_y Q_{yx}|`.
    pub fn reversibility_residual(&self) -> f64 {
        let m = self.states();
        let mut worst = 0.0f64;
        for x in 0..m {
            for y in 0..m {
                worst = worst.max((self.pi[x] * self.q[(x, y)] - self.pi[y] * self.q[(y, x)]).abs());
            }
        }
        worst
    }

    /// `max_y |(πᵀQ)_y|`.
    pub fn stationarity_residual(&self) -> f64 {
        let m = self.states();
        (0..m).map(|y| (0..m).map(|x| self.pi[x] * self.q[(x, y)]).sum::<f64>().abs()).fold(0.0, f64::max)
    }
}

fn boltzmann(energies: &[f64], beta: f64) -> Vec<f64> {
    let emin = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = energies.iter().map(|&e| (-beta * (e - emin)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

fn metropolis(delta: f64) -> f64 {
    (-delta).exp().min(1.0)
}

/// Single-spin-flip chain with rates `min{1, e^{−βΔH}}`.
pub fn glauber_generator(energy: impl Fn(&[i8]) -> f64, n: usize, beta: f64) -> Result<ClassicalChain> {
    if n == 0 || n > MAX_SPINS {
        return Err(Error::ResourceGuard(format!("Glauber chain supports 1..={MAX_SPINS} spins, got {n}")));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("β must be finite and ≥ 0, got {beta}")));
    }
    let m = 1usize << n;
    let energies: Vec<f64> = (0..m).map(|x| energy(&spins(x, n))).collect();
    let mut q = Mat::<f64>::zeros(m, m);
    for x in 0..m {
        let mut out = 0.0;
        for k in 0..n {
            let y = x ^ (1 << (n - 1 - k));
            let r = metropolis(beta * (energies[y] - energies[x]));
            q[(x, y)] = r;
            out += r;
        }
        q[(x, x)] = -out;
    }
    let pi = boltzmann(&energies, beta);
    Ok(ClassicalChain { q, pi, beta, energies, spins: Some(n) })
}

/// `L_{β₁}⊗I + I⊗L_{β₂} + L_swap` on pairs `(x₁, x₂)` indexed as `x₁·M + x₂`.
pub fn classical_re_generator(energy: impl Fn(&[i8]) -> f64, n: usize, beta1: f64, beta2: f64) -> Result<ClassicalChain> {
    let c1 = glauber_generator(&energy, n, beta1)?;
    let c2 = glauber_generator(&energy, n, beta2)?;
    let m = c1.states();
    let mm = m * m;
    let e = &c1.energies;
    let mut q = Mat::<f64>::zeros(mm, mm);
    for x1 in 0..m {
        for x2 in 0..m {
            let s = x1 * m + x2;
            for y in 0..m {
                if y != x1 {
                    q[(s, y * m + x2)] += c1.q[(x1, y)];
                }
                if y != x2 {
                    q[(s, x1 * m + y)] += c2.q[(x2, y)];
                }
            }
            if x1 != x2 {
                q[(s, x2 * m + x1)] += metropolis(-(beta1 - beta2) * (e[x1] - e[x2]));
            }
        }
    }
    for s in 0..mm {
        let out: f64 = (0..mm).filter(|&t| t != s).map(|t| q[(s, t)]).sum();
        q[(s, s)] = -out;
    }
    let pi: Vec<f64> = c1.pi.iter().flat_map(|&a| c2.pi.iter().map(move |&b| a * b)).collect();
    let energies: Vec<f64> = (0..mm).map(|s| e[s / m] + e[s % m]).collect();
    Ok(ClassicalChain { q, pi, beta: beta1, energies, spins: None })
}

fn symmetrized_spectrum(chain: &ClassicalChain) -> Result<Vec<f64>> {
    let m = chain.states();
    let r: Vec<f64> = chain.pi.iter().map(|p| p.sqrt()).collect();
    let s = Mat::<f64>::from_fn(m, m, |x, y| {
        let a = -r[x] * chain.q[(x, y)] / r[y];
        let b = -r[y] * chain.q[(y, x)] / r[x];
        0.5 * (a + b)
    });
    let mut vals = s.self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::Eigensolver)?;
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Second-smallest eigenvalue of the π-symmetrized `−Q`.
pub fn classical_gap(chain: &ClassicalChain) -> Result<f64> {
    let vals = symmetrized_spectrum(chain)?;
    Ok(vals.get(1).copied().unwrap_or(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BottleneckMode {
    Exact,
    Candidate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bottleneck {
    pub phi: f64,
    pub set: Vec<usize>,
    pub mode: BottleneckMode,
    /// True when the value only bounds `Φ*` from above.
    pub upper_bound: bool,
}

fn flow_ratio(chain: &ClassicalChain, member: &[bool]) -> Option<f64> {
    let m = chain.states();
    let ps: f64 = (0..m).filter(|&x| member[x]).map(|x| chain.pi[x]).sum();
    if ps <= 0.0 || ps > 0.5 {
        return None;
    }
    let mut flow = 0.0;
    for x in (0..m).filter(|&x| member[x]) {
        for y in (0..m).filter(|&y| !member[y]) {
            flow += chain.pi[x] * chain.q[(x, y)];
        }
    }
    Some(flow / ps)
}

/// `Φ* = min_{π(S) ≤ 1/2} Q(S, Sᶜ)/π(S)`.
pub fn bottleneck_ratio(chain: &ClassicalChain, mode: BottleneckMode) -> Result<Bottleneck> {
    let m = chain.states();
    let mut best: Option<(f64, Vec<bool>)> = None;
    let mut consider = |member: Vec<bool>| {
        for set in [member.iter().map(|b| !b).collect::<Vec<bool>>(), member] {
            if let Some(phi) = flow_ratio(chain, &set) {
                if best.as_ref().is_none_or(|b| phi < b.0) {
                    best = Some((phi, set));
                }
            }
        }
    };
    match mode {
        BottleneckMode::Exact => {
            if m > MAX_EXACT_STATES {
                return Err(Error::ResourceGuard(format!("exact bottleneck needs ≤ {MAX_EXACT_STATES} states, got {m}")));
            }
            for mask in 1usize..(1 << m) - 1 {
                if mask & 1 == 0 {
                    continue;
                }
                consider((0..m).map(|x| (mask >> x) & 1 == 1).collect());
            }
        }
        BottleneckMode::Candidate => {
            let mut sectors: Vec<Vec<bool>> = vec![vec![true; m]];
            if let Some(n) = chain.spins {
                let z: Vec<Vec<i8>> = (0..m).map(|x| spins(x, n)).collect();
                for k in 0..n {
                    sectors.push(z.iter().map(|s| s[k] == 1).collect());
                }
                for i in 0..n {
                    for j in i + 1..n {
                        sectors.push(z.iter().map(|s| s[i] == 1 && s[j] == 1).collect());
                        sectors.push(z.iter().map(|s| s[i] == s[j]).collect());
                    }
                }
            }
            let mut levels = chain.energies.clone();
            levels.sort_by(f64::total_cmp);
            levels.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
            for sector in &sectors {
                for &lvl in &levels {
                    consider((0..m).map(|x| sector[x] && chain.energies[x] <= lvl + 1e-12).collect());
                }
            }
        }
    }
    let (phi, set) = best.ok_or_else(|| Error::InvalidArgument("no admissible set".into()))?;
    Ok(Bottleneck {
        phi,
        set: (0..m).filter(|&x| set[x]).collect(),
        mode,
        upper_bound: mode == BottleneckMode::Candidate,
    })
}

/// Least-squares slope of `log y` against `x`.
pub fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
