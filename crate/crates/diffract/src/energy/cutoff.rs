//! Smooth cutoffs built as antiderivatives of squares:
//! `χ' = φ₁² - φ₂²` (χ = 1 on [-1, 1], supported in [-2, 2]) and
//! `χ̃' = φ₃²` (χ̃ = 0 below 0, 1 above 1).

use std::sync::OnceLock;

use crate::quadrature::integrate_adaptive;

const TOL: f64 = 1e-15;

/// `ψ(x) = exp(-1/(2(1-x²)))` on (-1, 1), 0 outside; `ψ²` is the
/// standard bump.
pub fn psi(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-0.5 / (1.0 - x * x)).exp()
    }
}

/// `c` with `c² ∫ψ(2x + b)² dx = 1`, i.e. `c² = 2 / ∫_{-1}^{1} e^{-1/(1-y²)} dy`.
pub fn scale() -> f64 {
    static SCALE: OnceLock<f64> = OnceLock::new();
    *SCALE.get_or_init(|| {
        let mass =
            integrate_adaptive(|y: f64| psi(y).powi(2), -1.0, 1.0, TOL).expect("the bump integral converges").value;
        (2.0 / mass).sqrt()
    })
}

/// Supported in (-2, -1).
pub fn phi1(x: f64) -> f64 {
    scale() * psi(2.0 * x + 3.0)
}

/// Supported in (1, 2).
pub fn phi2(x: f64) -> f64 {
    scale() * psi(2.0 * x - 3.0)
}

/// Supported in (0, 1).
pub fn phi3(x: f64) -> f64 {
    scale() * psi(2.0 * x - 1.0)
}

fn integral_of_square(g: fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    integrate_adaptive(|y: f64| g(y).powi(2), lo, hi, TOL).expect("smooth bump integrals converge").value
}

/// `χ(x) = ∫_{-∞}^x φ₁² - φ₂²`.
pub fn chi(x: f64) -> f64 {
    if x <= -2.0 || x >= 2.0 {
        return 0.0;
    }
    if (-1.0..=1.0).contains(&x) {
        return 1.0;
    }
    if x < 0.0 {
        integral_of_square(phi1, -2.0, x).min(1.0)
    } else {
        (1.0 - integral_of_square(phi2, 1.0, x)).max(0.0)
    }
}

pub fn chi_prime(x: f64) -> f64 {
    phi1(x).powi(2) - phi2(x).powi(2)
}

/// `χ̃(x) = ∫_{-∞}^x φ₃²`.
pub fn chi_tilde(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    integral_of_square(phi3, 0.0, x).min(1.0)
}

pub fn chi_tilde_prime(x: f64) -> f64 {
    phi3(x).powi(2)
}
