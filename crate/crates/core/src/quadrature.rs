//! Adaptive Gauss–Kronrod (7/15) quadrature with forced breakpoints.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Integration controls.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-12, max_depth: 40 }
    }
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (k, &x) in XGK.iter().enumerate().take(7) {
        let s = f(c - h * x) + f(c + h * x);
        kron += WGK[k] * s;
        if k % 2 == 1 {
            gauss += WG[k / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

fn adapt(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
    opts: &QuadOptions,
    worst: &mut f64,
) -> f64 {
    let (val, err) = gk15(f, a, b);
    if err <= tol || depth >= opts.max_depth {
        if err > tol {
            *worst = worst.max(err);
        }
        return val;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth + 1, opts, worst)
        + adapt(f, m, b, 0.5 * tol, depth + 1, opts, worst)
}

/// Integrate `f` over `[a, b]`, splitting panels at every breakpoint inside the interval.
pub fn integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: QuadOptions,
) -> Result<f64> {
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    pts.extend(inner);
    pts.push(b);
    let panels = (pts.len() - 1) as f64;
    let mut worst = 0.0;
    let mut total = 0.0;
    for w in pts.windows(2) {
        total += adapt(&f, w[0], w[1], opts.abs_tol / panels, 0, &opts, &mut worst);
    }
    if worst > 0.0 {
        return Err(Error::Quadrature { tol: opts.abs_tol, err: worst });
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x * x * x - x, 0.0, 2.0, &[], QuadOptions::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_integral() {
        let v = integrate(|x| (-x * x).exp(), -12.0, 12.0, &[], QuadOptions::default()).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn kink_with_breakpoint() {
        let v = integrate(|x: f64| x.abs(), -1.0, 3.0, &[0.0], QuadOptions::default()).unwrap();
        assert!((v - 5.0).abs() < 1e-13);
    }
}
