//! Dense complex linear-algebra helpers on top of `faer`.

use faer::{Mat, Side};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = faer::c64;
pub type CMat = Mat<C64>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn zeros(r: usize, cols: usize) -> CMat {
    Mat::zeros(r, cols)
}

pub fn identity(n: usize) -> CMat {
    Mat::identity(n, n)
}

pub fn adjoint(a: &CMat) -> CMat {
    a.adjoint().to_owned()
}

pub fn transpose(a: &CMat) -> CMat {
    a.transpose().to_owned()
}

pub fn conj(a: &CMat) -> CMat {
    a.conjugate().to_owned()
}

pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    a * b
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn kron_all(factors: &[CMat]) -> CMat {
    let mut out = identity(1);
    for f in factors {
        out = kron(&out, f);
    }
    out
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn scale(a: &CMat, s: C64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

pub fn trace(a: &CMat) -> C64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// Hilbert–Schmidt inner product `Tr[A† B]`.
pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    let mut s = cr(0.0);
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].conj() * b[(i, j)];
        }
    }
    s
}

pub fn fro_norm(a: &CMat) -> f64 {
    a.norm_l2()
}

pub fn max_abs(a: &CMat) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

fn singular_values(a: &CMat) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    a.singular_values().map_err(|_| Error::Eigensolver)
}

/// Largest singular value.
pub fn spectral_norm(a: &CMat) -> Result<f64> {
    Ok(singular_values(a)?.into_iter().fold(0.0, f64::max))
}

/// Sum of singular values.
pub fn trace_norm(a: &CMat) -> Result<f64> {
    Ok(singular_values(a)?.into_iter().sum())
}

pub fn hermitian_part(a: &CMat) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// `‖A − A†‖_F / max(‖A‖_F, tiny)`.
pub fn hermiticity_residual(a: &CMat) -> f64 {
    let n = fro_norm(a);
    if n == 0.0 {
        return 0.0;
    }
    fro_norm(&(a - a.adjoint())) / n
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), zeros(0, 0)));
    }
    let h = hermitian_part(a);
    let evd = h.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigensolver)?;
    let vals: Vec<f64> = (0..n).map(|i| evd.S()[i].re).collect();
    Ok((vals, evd.U().to_owned()))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(a: &CMat) -> Result<Vec<f64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let h = hermitian_part(a);
    let mut v = h
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::Eigensolver)?;
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `U diag(f(λ)) U†` for a Hermitian matrix given its eigen-decomposition.
pub fn spectral_fn(vals: &[f64], vecs: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let n = vals.len();
    let fv: Vec<f64> = vals.iter().map(|&x| f(x)).collect();
    Mat::from_fn(n, n, |i, j| {
        let mut s = cr(0.0);
        for k in 0..n {
            s += vecs[(i, k)] * vecs[(j, k)].conj() * fv[k];
        }
        s
    })
}

pub fn diag(v: &[f64]) -> CMat {
    let n = v.len();
    Mat::from_fn(n, n, |i, j| if i == j { cr(v[i]) } else { cr(0.0) })
}

/// Product `U† A U`.
pub fn to_basis(a: &CMat, u: &CMat) -> CMat {
    u.adjoint() * a * u
}

/// Column-stacking vectorization.
pub fn vec_op(x: &CMat) -> CMat {
    let (r, cols) = (x.nrows(), x.ncols());
    Mat::from_fn(r * cols, 1, |k, _| x[(k % r, k / r)])
}

/// Inverse of [`vec_op`] for a square `d × d` operator.
pub fn unvec_op(v: &CMat, d: usize) -> CMat {
    Mat::from_fn(d, d, |i, j| v[(j * d + i, 0)])
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R, r: usize, cols: usize) -> CMat {
    Mat::from_fn(r, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    hermitian_part(&random_complex(rng, n, n))
}

/// Unitary from the eigenvectors of a random Hermitian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let h = random_hermitian(rng, n);
    let g = random_complex(rng, n, n);
    let q = g.qr().compute_Q();
    let (_, u) = eigh(&h).expect("random Hermitian eigen-decomposition");
    &q * &u
}

/// Haar-distributed pure state as a normalized column vector.
pub fn haar_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let v = random_complex(rng, n, 1);
    let nrm = fro_norm(&v);
    scale(&v, cr(1.0 / nrm))
}

pub fn outer(v: &CMat) -> CMat {
    let n = v.nrows();
    Mat::from_fn(n, n, |i, j| v[(i, 0)] * v[(j, 0)].conj())
}

/// Random full-rank density matrix `G G† / Tr`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = random_complex(rng, n, n);
    let p = &g * g.adjoint();
    let t = trace(&p).re;
    scale(&p, cr(1.0 / t))
}

/// Dense matrix exponential by scaling and squaring of a Taylor series.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    let norm1 = (0..n).map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max);
    let mut squarings = 0u32;
    while norm1 / 2f64.powi(squarings as i32) > 0.5 {
        squarings += 1;
    }
    let scaled = a * faer::Scale(cr(1.0 / 2f64.powi(squarings as i32)));
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..=20 {
        term = &term * &scaled * faer::Scale(cr(1.0 / k as f64));
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kron_matches_vectorization_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_complex(&mut rng, 3, 3);
        let b = random_complex(&mut rng, 3, 3);
        let x = random_complex(&mut rng, 3, 3);
        let lhs = vec_op(&(&a * &x * &b));
        let rhs = kron(&transpose(&b), &a) * vec_op(&x);
        assert!(fro_norm(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn eigh_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random_hermitian(&mut rng, 6);
        let (vals, vecs) = eigh(&h).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let back = spectral_fn(&vals, &vecs, |x| x);
        assert!(fro_norm(&(back - &h)) < 1e-12 * fro_norm(&h).max(1.0));
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unitary(&mut rng, 5);
        let r = fro_norm(&(u.adjoint() * &u - identity(5)));
        assert!(r < 1e-12);
    }

    #[test]
    fn trace_norm_of_pauli_z() {
        let z = diag(&[1.0, -1.0]);
        assert!((trace_norm(&z).unwrap() - 2.0).abs() < 1e-14);
        assert!((spectral_norm(&z).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unvec_inverts_vec() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random_complex(&mut rng, 4, 4);
        assert_eq!(unvec_op(&vec_op(&x), 4), x);
    }

    #[test]
    fn expm_of_rotation_generator() {
        let t = 0.7;
        let a = Mat::from_fn(2, 2, |i, j| if i == j { cr(0.0) } else { c(0.0, -t) });
        let e = expm(&a);
        assert!((e[(0, 0)].re - t.cos()).abs() < 1e-14);
        assert!((e[(0, 1)].im + t.sin()).abs() < 1e-14);
    }
}
