//! The commutant symbol
//! `a = e^{Cξ̂} χ(ξ̂/δ) χ̃(-r² + αξ̂ + 2δ) χ̃(-(t-t₀)² + αξ̂ + 2δ) χ̃(τ-τ₀) χ((r² - ξ̂² - |ζ̂|²)/δ)`
//! and its derivative along the Hamilton vector field of
//! `p = τ² - (ξ² + |ζ|²)/r²`, which is twice the full flow of
//! [`crate::geodesic`].
//!
//! Along `H_p`: `H ξ̂ = -2τ(ξ̂² + |ζ̂|²)/r²`, `H r² = -4ξ`, `H t = 2τ`,
//! `H τ = 0`, `H |ζ̂|² = 0`, hence `H(r² - ξ̂² - |ζ̂|²) = -4ξσ/τ²`.

use super::cutoff::{chi, chi_prime, chi_tilde, chi_tilde_prime, phi1, phi2};
use super::EnergyError;
use crate::geodesic::{flow_step, FlowState, FlowSystem, SphereMetric};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutantParams {
    pub c: f64,
    pub delta: f64,
    pub alpha: f64,
    pub t0: f64,
    pub tau0: f64,
}

impl CommutantParams {
    pub fn new(c: f64, delta: f64, alpha: f64, t0: f64, tau0: f64) -> Result<Self, EnergyError> {
        let ok = c > 0.0 && delta > 0.0 && alpha > 0.0 && tau0 > 0.0 && t0.is_finite();
        if !ok || ![c, delta, alpha, tau0].iter().all(|v| v.is_finite()) {
            return Err(EnergyError::InvalidInput("C, delta, alpha and tau0 must be positive"));
        }
        Ok(CommutantParams { c, delta, alpha, t0, tau0 })
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        CommutantParams { alpha, ..self }
    }

    /// `4δ + √(16δ² + 8δ)`: on Σ every positive part of the χ̃ terms is
    /// dominated once α exceeds this.
    pub fn alpha_bound(&self) -> f64 {
        let d = self.delta;
        4.0 * d + (16.0 * d * d + 8.0 * d).sqrt()
    }
}

struct Arguments {
    xi_hat: f64,
    zeta_hat2: f64,
    r2: f64,
    x_xi: f64,
    x_r: f64,
    x_t: f64,
    x_tau: f64,
    x_sigma: f64,
}

fn arguments(p: &CommutantParams, y: &FlowState, g: SphereMetric) -> Arguments {
    let xi_hat = y.xi / y.tau;
    let zeta_hat2 = g.norm2(y.theta, y.zeta) / (y.tau * y.tau);
    let r2 = y.r * y.r;
    let dt = y.t - p.t0;
    Arguments {
        xi_hat,
        zeta_hat2,
        r2,
        x_xi: xi_hat / p.delta,
        x_r: -r2 + p.alpha * xi_hat + 2.0 * p.delta,
        x_t: -dt * dt + p.alpha * xi_hat + 2.0 * p.delta,
        x_tau: y.tau - p.tau0,
        x_sigma: (r2 - xi_hat * xi_hat - zeta_hat2) / p.delta,
    }
}

pub fn commutant_symbol(p: &CommutantParams, y: &FlowState, g: SphereMetric) -> f64 {
    let a = arguments(p, y, g);
    (p.c * a.xi_hat).exp() * chi(a.x_xi) * chi_tilde(a.x_r) * chi_tilde(a.x_t) * chi_tilde(a.x_tau) * chi(a.x_sigma)
}

/// Which cutoff derivatives contribute at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolClass {
    /// only the `e^{Cξ̂}` factor is differentiated (the `-b²` term)
    Main,
    /// also `φ₁²` in `χ(ξ̂/δ)` or the χ̃ factors in r and t, whose sign is
    /// fixed by the choice of α
    GoodSign,
    /// `φ₂²` in `χ(ξ̂/δ)`: controlled by the a-priori hypothesis
    E1,
    /// `χ'` of the Σ cutoff: supported off the characteristic set
    E2,
    /// both E1 and E2
    Mixed,
    /// the symbol and its derivative vanish
    Outside,
}

impl SymbolClass {
    pub fn label(self) -> &'static str {
        match self {
            SymbolClass::Main => "main",
            SymbolClass::GoodSign => "good-sign",
            SymbolClass::E1 => "e1",
            SymbolClass::E2 => "e2",
            SymbolClass::Mixed => "mixed",
            SymbolClass::Outside => "outside",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolDerivative {
    pub symbol: f64,
    /// `H_p a`
    pub value: f64,
    pub main: f64,
    pub good: f64,
    pub e1: f64,
    pub e2: f64,
    pub class: SymbolClass,
}

/// `H_p a` term by term, grouped by the cutoff being differentiated.
pub fn hamilton_derivative_symbol(
    p: &CommutantParams,
    y: &FlowState,
    g: SphereMetric,
) -> Result<SymbolDerivative, EnergyError> {
    if !(y.r > 0.0) || y.tau == 0.0 {
        return Err(EnergyError::InvalidInput("need r > 0 and tau != 0"));
    }
    let a = arguments(p, y, g);
    let tau = y.tau;
    let h_xi_hat = -2.0 * tau * (a.xi_hat * a.xi_hat + a.zeta_hat2) / a.r2;
    let sigma_over_tau2 = 1.0 - (a.xi_hat * a.xi_hat + a.zeta_hat2) / a.r2;
    let h_r = 4.0 * y.xi + p.alpha * h_xi_hat;
    let h_t = -4.0 * tau * (y.t - p.t0) + p.alpha * h_xi_hat;
    let h_sigma = -4.0 * y.xi * sigma_over_tau2 / p.delta;

    let e = (p.c * a.xi_hat).exp();
    let f_xi = chi(a.x_xi);
    let f_r = chi_tilde(a.x_r);
    let f_t = chi_tilde(a.x_t);
    let f_tau = chi_tilde(a.x_tau);
    let f_sigma = chi(a.x_sigma);
    let symbol = e * f_xi * f_r * f_t * f_tau * f_sigma;

    let main = p.c * h_xi_hat * symbol;
    let rest_xi = e * f_r * f_t * f_tau * f_sigma;
    let d_xi = h_xi_hat / p.delta;
    let good_xi = rest_xi * phi1(a.x_xi).powi(2) * d_xi;
    let e1 = -rest_xi * phi2(a.x_xi).powi(2) * d_xi;
    let good_r = e * f_xi * chi_tilde_prime(a.x_r) * h_r * f_t * f_tau * f_sigma;
    let good_t = e * f_xi * f_r * chi_tilde_prime(a.x_t) * h_t * f_tau * f_sigma;
    let e2 = e * f_xi * f_r * f_t * f_tau * chi_prime(a.x_sigma) * h_sigma;
    let good = good_xi + good_r + good_t;

    let active = |v: f64| v != 0.0;
    let class = match (active(e1), active(e2)) {
        (true, true) => SymbolClass::Mixed,
        (true, false) => SymbolClass::E1,
        (false, true) => SymbolClass::E2,
        _ if active(good_xi) || active(good_r) || active(good_t) => SymbolClass::GoodSign,
        _ if symbol != 0.0 => SymbolClass::Main,
        _ => SymbolClass::Outside,
    };
    Ok(SymbolDerivative { symbol, value: main + good + e1 + e2, main, good, e1, e2, class })
}

/// `H_p a` by a fourth-order central difference of `a` along the full
/// flow, `H_p = 2 X`.
pub fn flow_difference(p: &CommutantParams, y: &FlowState, g: SphereMetric, h: f64) -> Result<f64, EnergyError> {
    let at = |s: f64| -> Result<f64, EnergyError> {
        // two half steps keep the RK4 error far below the difference error
        let mid = flow_step(y, g, 0.5 * s, FlowSystem::Full)?;
        let end = flow_step(&mid, g, 0.5 * s, FlowSystem::Full)?;
        Ok(commutant_symbol(p, &end, g))
    };
    let d1 = at(h)? - at(-h)?;
    let d2 = at(2.0 * h)? - at(-2.0 * h)?;
    Ok(2.0 * (8.0 * d1 - d2) / (12.0 * h))
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut out = 0.0;
    while i > 0 {
        f /= base as f64;
        out += f * (i % base) as f64;
        i /= base;
    }
    out
}

/// Point of the Halton sequence in bases 2, 3, 5, 7, 11.
pub fn halton(i: u64) -> [f64; 5] {
    [2, 3, 5, 7, 11].map(|b| radical_inverse(i, b))
}

/// Maps `u ∈ [0,1)⁵` to a point on `Σ = {r² = ξ̂² + |ζ̂|²}` on the circle
/// with `|ξ̂| < 2δ`, `τ ∈ (τ₀, τ₀ + 2)`, and `r`, `t` spread over the
/// supports of the χ̃ factors.
pub fn sample_on_sigma(p: &CommutantParams, u: [f64; 5]) -> FlowState {
    let d = p.delta;
    let xi_hat = -2.0 * d + 4.0 * d * u[0];
    let reach = p.alpha * xi_hat + 2.0 * d;
    let floor = xi_hat * xi_hat;
    let r2 = if reach > floor { floor + u[1] * (reach - floor) } else { floor + u[1] * d };
    let r2 = r2.max(1e-12);
    let zeta_hat = (r2 - floor).max(0.0).sqrt();
    let dt = (2.0 * u[2] - 1.0) * 1.05 * reach.max(d).sqrt();
    let tau = p.tau0 + 2.0 * u[3];
    FlowState::circle(p.t0 + dt, r2.sqrt(), std::f64::consts::TAU * u[4], tau, xi_hat * tau, zeta_hat * tau)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub alpha: f64,
    pub samples: usize,
    /// points in the main or good-sign classes
    pub audited: usize,
    pub class_counts: Vec<(SymbolClass, usize)>,
    /// largest `H_p a` over the audited points
    pub max_value: f64,
    /// audited points with `H_p a > 1e-12`
    pub violations: usize,
    /// largest `|analytic - flow difference|` (when requested)
    pub max_fd_gap: Option<f64>,
}

/// Sign tolerance of the audit.
pub const SIGN_TOL: f64 = 1e-12;

/// Samples Σ along the Halton sequence from index `start` until `target`
/// points fall in the main or good-sign classes, and records the largest
/// `H_p a` there. With `fd_step`, every audited point is also checked
/// against [`flow_difference`].
pub fn sign_audit(
    p: &CommutantParams,
    start: u64,
    target: usize,
    fd_step: Option<f64>,
) -> Result<AuditReport, EnergyError> {
    let g = SphereMetric::Circle;
    let mut counts = std::collections::BTreeMap::new();
    let mut audited = 0;
    let mut samples = 0;
    let mut max_value = f64::NEG_INFINITY;
    let mut violations = 0;
    let mut max_gap: f64 = 0.0;
    let mut i = start;
    let limit = start + 200 * target as u64 + 1000;
    while audited < target {
        if i >= limit {
            return Err(EnergyError::InvalidInput("sampling finds too few points in the symbol support"));
        }
        let y = sample_on_sigma(p, halton(i));
        i += 1;
        samples += 1;
        let d = hamilton_derivative_symbol(p, &y, g)?;
        *counts.entry(d.class).or_insert(0usize) += 1;
        if !matches!(d.class, SymbolClass::Main | SymbolClass::GoodSign) {
            continue;
        }
        audited += 1;
        max_value = max_value.max(d.value);
        if d.value > SIGN_TOL {
            violations += 1;
        }
        if let Some(h) = fd_step {
            max_gap = max_gap.max((flow_difference(p, &y, g, h)? - d.value).abs());
        }
    }
    Ok(AuditReport {
        alpha: p.alpha,
        samples,
        audited,
        class_counts: counts.into_iter().collect(),
        max_value,
        violations,
        max_fd_gap: fd_step.map(|_| max_gap),
    })
}

/// Smallest α (to relative precision `1e-6`) for which a calibration
/// audit of `calibration` points has no violations, by bisection between
/// 0 and a passing upper value.
pub fn alpha_threshold(p: &CommutantParams, calibration: usize) -> Result<f64, EnergyError> {
    let passes = |alpha: f64| -> Result<bool, EnergyError> {
        Ok(sign_audit(&p.with_alpha(alpha), 0, calibration, None)?.violations == 0)
    };
    let mut hi = 2.0 * p.alpha_bound();
    let mut tries = 0;
    while !passes(hi)? {
        hi *= 2.0;
        tries += 1;
        if tries > 20 {
            return Err(EnergyError::InvalidInput("no alpha up to 2^20 times the bound passes"));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= 0.0 {
            break;
        }
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
