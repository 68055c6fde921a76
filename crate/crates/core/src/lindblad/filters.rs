//! Filter, transition weights, and the α coefficient table.

use errorfunctions::RealErrorFunctions;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    Gaussian,
    Metropolis,
}

/// Transition weight `γ(ω)` at inverse temperature `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightFunction {
    pub kind: WeightKind,
    pub beta: f64,
}

impl WeightFunction {
    pub fn gaussian(beta: f64) -> Self {
        Self { kind: WeightKind::Gaussian, beta }
    }

    pub fn metropolis(beta: f64) -> Self {
        Self { kind: WeightKind::Metropolis, beta }
    }

    pub fn with_beta(self, beta: f64) -> Self {
        Self { beta, ..self }
    }

    /// Location of the Metropolis kink, `−1/(2β)`.
    pub fn kink(&self) -> f64 {
        -0.5 / self.beta
    }
}

/// `γ_G(ω) = exp(−(βω+1)²/2)`, `γ_M(ω) = exp(−β·max{ω + 1/(2β), 0})`.
pub fn weight(omega: f64, w: WeightFunction) -> f64 {
    let b = w.beta;
    match w.kind {
        WeightKind::Gaussian => (-0.5 * (b * omega + 1.0).powi(2)).exp(),
        WeightKind::Metropolis => (-(b * omega + 0.5).max(0.0)).exp(),
    }
}

/// `f̂(ω) = sqrt(β/√(2π)) · exp(−β²ω²/4)`, normalized so that `∫ f̂² = 1`.
pub fn filter_fhat(omega: f64, beta: f64) -> f64 {
    (beta / SQRT_2PI).sqrt() * (-0.25 * beta * beta * omega * omega).exp()
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    RealErrorFunctions::erfc(x)
}

/// `θ(x) = ½[erfc((1+2x)/(2√2)) + e^{−x} erfc((1−2x)/(2√2))]`.
///
/// The second term is evaluated through the scaled complementary error
/// function whenever its argument is positive, so it never multiplies an
/// overflowing exponential by an underflowing `erfc`.
pub fn theta(x: f64) -> f64 {
    let s = 2.0 * std::f64::consts::SQRT_2;
    let a = (1.0 + 2.0 * x) / s;
    let b = (1.0 - 2.0 * x) / s;
    let second = if b > 0.0 { (-x - b * b).exp() * b.erfcx() } else { (-x).exp() * erfc(b) };
    0.5 * (erfc(a) + second)
}

/// Closed form of `∫ γ(ω) f̂(ω−ν₁) f̂(ω−ν₂) dω`.
///
/// The filter product is a Gaussian of variance `1/β²` centred at the mean
/// frequency times `exp(−β²(ν₁−ν₂)²/8)`, so the integral reduces to a
/// Gaussian average of `γ`.
pub fn alpha_closed(nu1: f64, nu2: f64, w: WeightFunction) -> f64 {
    let b = w.beta;
    let d = nu1 - nu2;
    let m = 0.5 * (nu1 + nu2);
    let envelope = (-b * b * d * d / 8.0).exp();
    match w.kind {
        WeightKind::Gaussian => envelope * (-0.25 * (b * m + 1.0).powi(2)).exp() / std::f64::consts::SQRT_2,
        WeightKind::Metropolis => envelope * theta(b * m),
    }
}

/// `α_{ν₁,ν₂}` by adaptive quadrature over `[min ν − 12/β, max ν + 12/β]`.
pub fn alpha_coeff(nu1: f64, nu2: f64, w: WeightFunction) -> Result<f64> {
    if !(w.beta > 0.0) || !w.beta.is_finite() {
        return Err(Error::InvalidArgument(format!("α requires β > 0, got {}", w.beta)));
    }
    let lo = nu1.min(nu2) - 12.0 / w.beta;
    let hi = nu1.max(nu2) + 12.0 / w.beta;
    let kinks = match w.kind {
        WeightKind::Metropolis => vec![w.kink()],
        WeightKind::Gaussian => vec![],
    };
    integrate(
        |om| weight(om, w) * filter_fhat(om - nu1, w.beta) * filter_fhat(om - nu2, w.beta),
        lo,
        hi,
        &kinks,
        QuadOptions::default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_examples() {
        let w = WeightFunction::metropolis(2.0);
        assert!((weight(-0.25, w) - 1.0).abs() < 1e-15);
        assert!((weight(0.0, w) - (-0.5f64).exp()).abs() < 1e-15);
        assert!((weight(0.0, WeightFunction::gaussian(2.0)) - (-0.5f64).exp()).abs() < 1e-15);
        assert!(weight(-10.0, w) == 1.0);
    }

    #[test]
    fn filter_normalized_and_even() {
        let b = 1.3;
        assert!((filter_fhat(0.0, b) - (b / SQRT_2PI).sqrt()).abs() < 1e-15);
        for k in 0..20 {
            let om = 0.37 * k as f64;
            assert_eq!(filter_fhat(om, b), filter_fhat(-om, b));
        }
        let norm = integrate(|om| filter_fhat(om, b).powi(2), -30.0, 30.0, &[], QuadOptions::default()).unwrap();
        assert!((norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn theta_at_zero() {
        let t0 = theta(0.0);
        assert!((t0 - erfc(1.0 / (2.0 * std::f64::consts::SQRT_2))).abs() < 1e-15);
        assert!((t0 - 0.617).abs() < 1e-3);
    }

    #[test]
    fn alpha_metropolis_diagonal_at_zero() {
        let a = alpha_coeff(0.0, 0.0, WeightFunction::metropolis(1.0)).unwrap();
        assert!((a - theta(0.0)).abs() < 1e-10);
    }

    #[test]
    fn alpha_gaussian_diagonal_closed_form() {
        for &(nu, b) in &[(0.0, 1.0), (0.7, 2.0), (-1.5, 0.5), (3.0, 1.0)] {
            let w = WeightFunction::gaussian(b);
            let q = alpha_coeff(nu, nu, w).unwrap();
            let exact = (-0.25 * (b * nu + 1.0f64).powi(2)).exp() / std::f64::consts::SQRT_2;
            assert!((q - exact).abs() < 1e-10, "{nu} {b}: {q} vs {exact}");
        }
    }

    #[test]
    fn alpha_closed_matches_quadrature_off_diagonal() {
        for kind in [WeightKind::Gaussian, WeightKind::Metropolis] {
            for &(n1, n2, b) in &[(0.0, 2.0, 1.0), (-4.0, 2.0, 1.0), (1.3, -0.2, 0.7), (6.0, 4.0, 2.0)] {
                let w = WeightFunction { kind, beta: b };
                let q = alpha_coeff(n1, n2, w).unwrap();
                assert!((q - alpha_closed(n1, n2, w)).abs() < 1e-11);
            }
        }
    }
}
