//! Pauli-string Hamiltonians, the defected models, and commuting-cut analysis.
//!
//! Files use 0-based site indices. The defected Ising ring therefore carries
//! its strong bond on sites (0, 1) and uses A = {0, 1}.

mod cut;

pub use cut::{
    a_side_eigenbasis, b_side_eigenbasis, check_commuting_cut, compress_onto, pauli_decompose,
    pauli_support, simultaneous_eigenbasis, ABasis, CutReport,
};

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, cr, fro_norm, hermiticity_residual, CMat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> CMat {
        let z = cr(0.0);
        let o = cr(1.0);
        match self {
            Pauli::X => Mat::from_fn(2, 2, |i, j| if i != j { o } else { z }),
            Pauli::Y => Mat::from_fn(2, 2, |i, j| match (i, j) {
                (0, 1) => c(0.0, -1.0),
                (1, 0) => c(0.0, 1.0),
                _ => z,
            }),
            Pauli::Z => Mat::from_fn(2, 2, |i, j| {
                if i != j {
                    z
                } else if i == 0 {
                    o
                } else {
                    -o
                }
            }),
        }
    }
}

/// A weighted tensor product of single-site Paulis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coeff: f64,
    pub factors: Vec<(usize, Pauli)>,
}

impl PauliTerm {
    pub fn new(coeff: f64, factors: &[(usize, Pauli)]) -> Self {
        Self { coeff, factors: factors.to_vec() }
    }

    pub fn sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.factors.iter().map(|f| f.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl Partition {
    /// Partition with `a` as given and `b` its complement in `0..n`.
    pub fn from_a(n: usize, a: &[usize]) -> Self {
        let mut a = a.to_vec();
        a.sort_unstable();
        a.dedup();
        let b = (0..n).filter(|s| !a.contains(s)).collect();
        Self { a, b }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Defect {
    pub edge: (usize, usize),
    pub j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub n: usize,
    pub terms: Vec<PauliTerm>,
    pub partition: Option<Partition>,
    pub defect: Option<Defect>,
}

impl HamiltonianSpec {
    pub fn new(n: usize, terms: Vec<PauliTerm>) -> Self {
        Self { n, terms, partition: None, defect: None }
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn validate(&self) -> Result<()> {
        for (t, term) in self.terms.iter().enumerate() {
            if !term.coeff.is_finite() {
                return Err(Error::InvalidHamiltonian(format!("term {t}: non-finite coefficient")));
            }
            let mut seen = Vec::new();
            for s in term.sites() {
                if s >= self.n {
                    return Err(Error::InvalidHamiltonian(format!(
                        "term {t}: site {s} out of range for n = {}",
                        self.n
                    )));
                }
                if seen.contains(&s) {
                    return Err(Error::InvalidHamiltonian(format!("term {t}: duplicate site {s}")));
                }
                seen.push(s);
            }
        }
        if let Some(p) = &self.partition {
            let mut all: Vec<usize> = p.a.iter().chain(p.b.iter()).copied().collect();
            all.sort_unstable();
            if all != (0..self.n).collect::<Vec<_>>() {
                return Err(Error::InvalidHamiltonian(
                    "partition must split the sites into disjoint A and B covering all sites".into(),
                ));
            }
        }
        Ok(())
    }

    /// Copy with the defect bond `−J Z_i Z_j` set to strength `j`.
    pub fn with_defect_strength(&self, j: f64) -> Result<Self> {
        let d = self.defect.as_ref().ok_or_else(|| Error::InvalidHamiltonian("no defect declared".into()))?;
        let (a, b) = (d.edge.0.min(d.edge.1), d.edge.0.max(d.edge.1));
        let mut out = self.clone();
        let term = out
            .terms
            .iter_mut()
            .find(|t| {
                let mut s: Vec<usize> = t.sites().collect();
                s.sort_unstable();
                s == [a, b] && t.factors.iter().all(|f| f.1 == Pauli::Z)
            })
            .ok_or_else(|| Error::InvalidHamiltonian(format!("no ZZ term on defect edge ({a}, {b})")))?;
        term.coeff = -j;
        out.defect = Some(Defect { edge: d.edge, j });
        Ok(out)
    }
}

/// Matrix of a Pauli string on `n` qubits (site 0 most significant).
pub fn pauli_string_matrix(n: usize, factors: &[(usize, Pauli)]) -> CMat {
    let d = 1usize << n;
    let mut m = Mat::zeros(d, d);
    add_pauli_string(&mut m, n, factors, 1.0);
    m
}

fn add_pauli_string(m: &mut CMat, n: usize, factors: &[(usize, Pauli)], coeff: f64) {
    let d = 1usize << n;
    let mut flip = 0usize;
    for &(s, p) in factors {
        if p != Pauli::Z {
            flip |= 1 << (n - 1 - s);
        }
    }
    for col in 0..d {
        let mut phase = cr(coeff);
        for &(s, p) in factors {
            let bit = (col >> (n - 1 - s)) & 1;
            phase *= match (p, bit) {
                (Pauli::X, _) => cr(1.0),
                (Pauli::Y, 0) => c(0.0, 1.0),
                (Pauli::Y, _) => c(0.0, -1.0),
                (Pauli::Z, 0) => cr(1.0),
                (Pauli::Z, _) => cr(-1.0),
            };
        }
        m[(col ^ flip, col)] += phase;
    }
}

/// Dense matrix of the Hamiltonian in the computational basis.
pub fn assemble_dense(spec: &HamiltonianSpec) -> Result<CMat> {
    spec.validate()?;
    let d = spec.dim();
    let mut m = Mat::zeros(d, d);
    for t in &spec.terms {
        add_pauli_string(&mut m, spec.n, &t.factors, t.coeff);
    }
    let scale = fro_norm(&m);
    if scale > 0.0 && hermiticity_residual(&m) > 1e-12 {
        return Err(Error::InvalidHamiltonian("assembled matrix is not Hermitian".into()));
    }
    Ok(m)
}

/// Single-site Paulis on the listed sites, in site-major order X, Y, Z.
pub fn single_site_paulis(n: usize, sites: &[usize]) -> Vec<CMat> {
    sites
        .iter()
        .flat_map(|&s| Pauli::ALL.into_iter().map(move |p| pauli_string_matrix(n, &[(s, p)])))
        .collect()
}

/// Ring `−J Z₀Z₁ − Σ_{i≥1} Z_i Z_{i+1}` with periodic wraparound and A = {0, 1}.
pub fn defected_ising_1d(n: usize, j: f64) -> Result<HamiltonianSpec> {
    if n < 3 {
        return Err(Error::InvalidHamiltonian(format!("ring needs n >= 3, got {n}")));
    }
    if !j.is_finite() {
        return Err(Error::InvalidHamiltonian("defect strength must be finite".into()));
    }
    let mut terms = vec![PauliTerm::new(-j, &[(0, Pauli::Z), (1, Pauli::Z)])];
    for i in 1..n {
        terms.push(PauliTerm::new(-1.0, &[(i, Pauli::Z), ((i + 1) % n, Pauli::Z)]));
    }
    Ok(HamiltonianSpec {
        n,
        terms,
        partition: Some(Partition::from_a(n, &[0, 1])),
        defect: Some(Defect { edge: (0, 1), j }),
    })
}

/// Edges of a `rows × cols` grid: horizontal edges first, then vertical, sites `r·cols + c`.
pub fn grid_edges(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for r in 0..rows {
        for col in 0..cols.saturating_sub(1) {
            e.push((r * cols + col, r * cols + col + 1));
        }
    }
    for r in 0..rows.saturating_sub(1) {
        for col in 0..cols {
            e.push((r * cols + col, (r + 1) * cols + col));
        }
    }
    e
}

/// Vertices incident to an edge that crosses the partition.
pub fn boundary_vertices(edges: &[(usize, usize)], a: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = edges
        .iter()
        .filter(|(u, w)| a.contains(u) != a.contains(w))
        .flat_map(|&(u, w)| [u, w])
        .collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Ferromagnetic grid model with ZZ-only bonds at the cut and a strong bond inside A.
///
/// Edges touching a boundary vertex carry `−ZZ`; interior edges carry
/// `−(XX + YY + ZZ)`. The defect edge carries total coefficient `−J`.
pub fn defected_heisenberg_2d(
    rows: usize,
    cols: usize,
    a: &[usize],
    defect_edge: (usize, usize),
    j: f64,
) -> Result<HamiltonianSpec> {
    let n = rows * cols;
    if n == 0 {
        return Err(Error::InvalidHamiltonian("empty grid".into()));
    }
    if a.iter().any(|&s| s >= n) {
        return Err(Error::InvalidHamiltonian("A is not a subset of the grid".into()));
    }
    let edges = grid_edges(rows, cols);
    let vab = boundary_vertices(&edges, a);
    let (p, q) = defect_edge;
    let norm_edge = |e: &(usize, usize)| (e.0.min(e.1), e.0.max(e.1));
    if !edges.iter().any(|e| norm_edge(e) == (p.min(q), p.max(q))) {
        return Err(Error::InvalidHamiltonian(format!("defect edge ({p}, {q}) is not a grid edge")));
    }
    for s in [p, q] {
        if !a.contains(&s) || !vab.contains(&s) {
            return Err(Error::InvalidHamiltonian(format!(
                "defect endpoint {s} must lie in A and on the boundary-vertex set"
            )));
        }
    }
    let mut terms = Vec::new();
    for e in &edges {
        let (u, w) = *e;
        let strength = if norm_edge(e) == (p.min(q), p.max(q)) { j } else { 1.0 };
        if vab.contains(&u) || vab.contains(&w) {
            terms.push(PauliTerm::new(-strength, &[(u, Pauli::Z), (w, Pauli::Z)]));
        } else {
            for pl in Pauli::ALL {
                terms.push(PauliTerm::new(-strength, &[(u, pl), (w, pl)]));
            }
        }
    }
    Ok(HamiltonianSpec {
        n,
        terms,
        partition: Some(Partition::from_a(n, a)),
        defect: Some(Defect { edge: defect_edge, j }),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TermJson {
    coeff: f64,
    paulis: Vec<(usize, Pauli)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PartitionJson {
    #[serde(rename = "A")]
    a: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DefectJson {
    edge: (usize, usize),
    #[serde(rename = "J")]
    j: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HamiltonianJson {
    n: usize,
    #[serde(default)]
    terms: Vec<TermJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    partition: Option<PartitionJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    defect: Option<DefectJson>,
}

impl HamiltonianSpec {
    /// Parse the JSON fragment `{"n", "terms": [{"coeff", "paulis": [[site, "X"], ...]}], "partition": {"A"}, "defect": {"edge", "J"}}`.
    pub fn from_json_value(v: &serde_json::Value) -> Result<Self> {
        let raw: HamiltonianJson = serde_json::from_value(v.clone())
            .map_err(|e| Error::Config(format!("system: {e}")))?;
        let spec = HamiltonianSpec {
            n: raw.n,
            terms: raw.terms.into_iter().map(|t| PauliTerm { coeff: t.coeff, factors: t.paulis }).collect(),
            partition: raw.partition.map(|p| Partition::from_a(raw.n, &p.a)),
            defect: raw.defect.map(|d| Defect { edge: d.edge, j: d.j }),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: serde_json::Value =
            serde_json::from_str(s).map_err(|e| Error::Config(format!("system: {e}")))?;
        Self::from_json_value(&v)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let raw = HamiltonianJson {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|t| TermJson { coeff: t.coeff, paulis: t.factors.clone() })
                .collect(),
            partition: self.partition.as_ref().map(|p| PartitionJson { a: p.a.clone() }),
            defect: self.defect.as_ref().map(|d| DefectJson { edge: d.edge, j: d.j }),
        };
        serde_json::to_value(raw).expect("Hamiltonian JSON serialization")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    #[test]
    fn single_z() {
        let h = assemble_dense(&HamiltonianSpec::new(1, vec![PauliTerm::new(1.0, &[(0, Pauli::Z)])])).unwrap();
        assert_eq!(h[(0, 0)], cr(1.0));
        assert_eq!(h[(1, 1)], cr(-1.0));
        assert_eq!(h[(0, 1)], cr(0.0));
    }

    #[test]
    fn empty_sum_is_zero() {
        let h = assemble_dense(&HamiltonianSpec::new(2, vec![])).unwrap();
        assert_eq!(h.nrows(), 4);
        assert_eq!(max_abs(&h), 0.0);
    }

    #[test]
    fn pauli_y_matches_kron() {
        let m = pauli_string_matrix(2, &[(0, Pauli::Y), (1, Pauli::X)]);
        let k = crate::linalg::kron(&Pauli::Y.matrix(), &Pauli::X.matrix());
        assert!(fro_norm(&(m - k)) < 1e-15);
    }

    #[test]
    fn defected_ising_diagonal_energies() {
        let h = assemble_dense(&defected_ising_1d(3, 2.0).unwrap()).unwrap();
        for k in 0..8usize {
            let z: Vec<f64> = (0..3).map(|s| if (k >> (2 - s)) & 1 == 0 { 1.0 } else { -1.0 }).collect();
            let e = -2.0 * z[0] * z[1] - z[1] * z[2] - z[2] * z[0];
            assert!((h[(k, k)].re - e).abs() < 1e-14);
        }
    }

    #[test]
    fn ising_ground_energy() {
        let h = assemble_dense(&defected_ising_1d(3, 5.0).unwrap()).unwrap();
        assert!((h[(0, 0)].re + 7.0).abs() < 1e-14);
        let h1 = assemble_dense(&defected_ising_1d(3, 1.0).unwrap()).unwrap();
        assert!((h1[(0, 0)].re + 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_sites() {
        let bad = HamiltonianSpec::new(2, vec![PauliTerm::new(1.0, &[(2, Pauli::Z)])]);
        assert!(assemble_dense(&bad).is_err());
        let dup = HamiltonianSpec::new(2, vec![PauliTerm::new(1.0, &[(0, Pauli::Z), (0, Pauli::X)])]);
        assert!(assemble_dense(&dup).is_err());
        assert!(defected_ising_1d(2, 1.0).is_err());
    }

    #[test]
    fn heisenberg_grid_edge_classification() {
        let spec = defected_heisenberg_2d(2, 3, &[0, 3], (0, 3), 4.0).unwrap();
        assert_eq!(grid_edges(2, 3).len(), 7);
        assert_eq!(spec.terms.len(), 9);
        assert!(defected_heisenberg_2d(2, 3, &[0, 3], (1, 2), 4.0).is_err());
        assert!(defected_heisenberg_2d(2, 3, &[0, 3], (0, 4), 4.0).is_err());
    }

    #[test]
    fn defect_strength_update() {
        let spec = defected_ising_1d(4, 2.0).unwrap();
        let updated = spec.with_defect_strength(5.0).unwrap();
        assert_eq!(updated, defected_ising_1d(4, 5.0).unwrap());
        assert!(HamiltonianSpec::new(2, vec![]).with_defect_strength(1.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let spec = defected_ising_1d(4, 2.5).unwrap();
        let back = HamiltonianSpec::from_json_value(&spec.to_json_value()).unwrap();
        assert_eq!(back, spec);
        let parsed = HamiltonianSpec::from_json_str(
            r#"{"n":2,"terms":[{"coeff":0.5,"paulis":[[0,"X"],[1,"Y"]]}],"partition":{"A":[1]}}"#,
        )
        .unwrap();
        assert_eq!(parsed.partition.unwrap().b, vec![0]);
    }
}
