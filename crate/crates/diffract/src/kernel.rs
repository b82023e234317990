//! Per-mode kernel of `sin(t√L)/√L` for `L = -Δ + a/r²` in the plane,
//! in the closed forms valid on each side of the two light cones.
//!
//! For angular mode `n` the radial order is `ν_n = √(n² + a)` and the kernel
//! (with respect to `r dr`) is `K(r₁, r₂, t) = ∫₀^∞ sin(tλ) J_ν(λr₁) J_ν(λr₂) dλ`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::quadrature::{integrate_adaptive_panels, integrate_endpoint_singular_split, QuadError};
use crate::specfun::{acosh_near_one, bessel_j, legendre_q_shifted, BesselOrder, SpecError};

/// Absolute tolerance for the kernel quadratures.
const KERNEL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("point lies within {eps:e} of the {region:?}")]
    ConeProximity { region: Region, eps: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Special(#[from] SpecError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    pub n: i64,
    pub a: f64,
    pub nu: f64,
}

impl ModeParams {
    pub fn new(n: i64, a: f64) -> Result<Self, KernelError> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(KernelError::InvalidInput("coupling a must be finite and >= 0"));
        }
        let nn = (n as f64) * (n as f64);
        Ok(ModeParams { n, a, nu: (nn + a).sqrt() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub r1: f64,
    pub r2: f64,
    pub t: f64,
}

impl KernelPoint {
    pub fn new(r1: f64, r2: f64, t: f64) -> Result<Self, KernelError> {
        let ok = [r1, r2, t].iter().all(|v| v.is_finite() && *v > 0.0);
        if !ok {
            return Err(KernelError::InvalidInput("r1, r2 and t must be positive"));
        }
        Ok(KernelPoint { r1, r2, t })
    }

    pub fn swapped(self) -> Self {
        KernelPoint { r1: self.r2, r2: self.r1, t: self.t }
    }

    /// Default cone band `1e-6 (r₁ + r₂ + t)`.
    pub fn default_eps(self) -> f64 {
        1e-6 * (self.r1 + self.r2 + self.t)
    }
}

/// I: outside the main cone. II: between the cones. III: inside the
/// diffractive cone `t = r₁ + r₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    I,
    II,
    III,
    MainCone,
    DiffractiveCone,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::I => "I",
            Region::II => "II",
            Region::III => "III",
            Region::MainCone => "main-cone",
            Region::DiffractiveCone => "diffractive-cone",
        }
    }
}

pub fn classify_region(p: KernelPoint, eps_cone: f64) -> Region {
    let inner = (p.r1 - p.r2).abs();
    let outer = p.r1 + p.r2;
    if (p.t - inner).abs() <= eps_cone {
        Region::MainCone
    } else if (p.t - outer).abs() <= eps_cone {
        Region::DiffractiveCone
    } else if p.t < inner {
        Region::I
    } else if p.t < outer {
        Region::II
    } else {
        Region::III
    }
}

/// `sin(πx)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let y = x - 2.0 * (0.5 * x).round();
    if y == 0.0 || y.abs() == 1.0 {
        0.0
    } else {
        (PI * y).sin()
    }
}

/// Kernel of mode `m` at `p`, refusing points within the default cone band.
pub fn mode_kernel(m: ModeParams, p: KernelPoint) -> Result<f64, KernelError> {
    mode_kernel_eps(m, p, p.default_eps())
}

/// As [`mode_kernel`] with an explicit cone band.
pub fn mode_kernel_eps(m: ModeParams, p: KernelPoint, eps_cone: f64) -> Result<f64, KernelError> {
    match classify_region(p, eps_cone) {
        region @ (Region::MainCone | Region::DiffractiveCone) => {
            Err(KernelError::ConeProximity { region, eps: eps_cone })
        }
        Region::I => Ok(0.0),
        Region::II => region_two(m.nu, p),
        Region::III => region_three(m.nu, p),
    }
}

fn region_two(nu: f64, p: KernelPoint) -> Result<f64, KernelError> {
    let KernelPoint { r1, r2, t } = p;
    let rr = r1 * r2;
    // cos s* = (r₁²+r₂²-t²)/(2r₁r₂), with 1 ∓ cos s* formed from factored differences
    let d = (r1 - r2).abs();
    let one_minus = (t - d) * (t + d) / (2.0 * rr);
    let one_plus = (r1 + r2 - t) * (r1 + r2 + t) / (2.0 * rr);
    let s_star = 2.0 * one_minus.sqrt().atan2(one_plus.sqrt());
    // t² - r₁² - r₂² + 2r₁r₂ cos s = 4 r₁r₂ sin((s*+s)/2) sin((s*-s)/2)
    let f = |s: f64, _: f64, to_end: f64| {
        // square roots taken factor by factor: the product underflows at the
        // outermost tanh-sinh nodes
        let far = (4.0 * rr * (0.5 * (s_star + s)).sin()).sqrt();
        (nu * s).cos() / (far * (0.5 * to_end).sin().sqrt())
    };
    let q = integrate_endpoint_singular_split(f, 0.0, s_star, KERNEL_TOL)?;
    Ok(q.value / PI)
}

fn region_three(nu: f64, p: KernelPoint) -> Result<f64, KernelError> {
    let KernelPoint { r1, r2, t } = p;
    let rr = r1 * r2;
    let s = r1 + r2;
    // Z - 1 with Z = (t²-r₁²-r₂²)/(2r₁r₂) = cosh β
    let z_minus_one = (t - s) * (t + s) / (2.0 * rr);
    // t² - r₁² - r₂² + 2r₁r₂ cos s = 2r₁r₂ ((Z-1) + 2 sin²((π-s)/2))
    let f = |x: f64, _: f64, to_pi: f64| {
        let h = (0.5 * to_pi).sin();
        let denom = 2.0 * rr * (z_minus_one + 2.0 * h * h);
        (nu * x).cos() / denom.sqrt()
    };
    let main = integrate_endpoint_singular_split(f, 0.0, PI, KERNEL_TOL)?.value / PI;
    let sn = sin_pi(nu);
    if sn == 0.0 {
        return Ok(main);
    }
    let beta = acosh_near_one(1.0 + z_minus_one);
    let extra = sn * diffractive_integral(nu, beta)? / (PI * rr.sqrt());
    Ok(main - extra)
}

/// `∫₀^β e^{-sν} (2cosh β - 2cosh s)^{-1/2} ds`, which tends to π/2 as β → 0.
pub fn diffractive_integral(nu: f64, beta: f64) -> Result<f64, KernelError> {
    if !(beta > 0.0 && beta.is_finite()) || !(nu >= 0.0) {
        return Err(KernelError::InvalidInput("need beta > 0 and nu >= 0"));
    }
    // 2cosh β - 2cosh s = 4 sinh((β+s)/2) sinh((β-s)/2)
    let f = |s: f64, _: f64, to_beta: f64| {
        let far = (4.0 * (0.5 * (beta + s)).sinh()).sqrt();
        (-s * nu).exp() / (far * (0.5 * to_beta).sinh().sqrt())
    };
    Ok(integrate_endpoint_singular_split(f, 0.0, beta, KERNEL_TOL)?.value)
}

/// Limit of (region III) - (region II) across the diffractive cone:
/// `-½ (r₁r₂)^{-1/2} sin(πν_n)`.
pub fn diffractive_jump(m: ModeParams, r1: f64, r2: f64) -> f64 {
    -0.5 * sin_pi(m.nu) / (r1 * r2).sqrt()
}

/// Whether `√(n² + a)` is not an integer, i.e. the mode carries a jump.
pub fn is_mode_jump_nonzero(n: i64, a: f64) -> bool {
    let q = (n as f64) * (n as f64) + a;
    let m = q.sqrt().round();
    (m * m - q).abs() > 1e-12 * q.max(1.0)
}

/// One row of a cone scan at offset δ from the diffractive cone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeSample {
    pub delta: f64,
    pub region_two: f64,
    pub region_three: f64,
    /// region III side minus region II side
    pub difference: f64,
    /// extrapolation to δ = 0 from the rows so far
    pub extrapolated: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeScan {
    pub samples: Vec<ConeSample>,
    pub jump_estimate: f64,
}

/// `δ, δ/2, δ/4` with `δ = 1e-4 (t - r₂)`.
pub fn default_deltas(r2: f64, t: f64) -> [f64; 3] {
    let d = 1e-4 * (t - r2);
    [d, 0.5 * d, 0.25 * d]
}

/// Kernel on both sides of the diffractive cone at `r₁ = t - r₂ ± δ`,
/// with the III - II difference extrapolated to δ = 0 by
/// [`extrapolate_to_zero`].
pub fn cone_limits(m: ModeParams, r2: f64, t: f64, deltas: &[f64]) -> Result<ConeScan, KernelError> {
    let cone = t - r2;
    if !(r2 > 0.0 && cone > 0.0) {
        return Err(KernelError::InvalidInput("need t > r2 > 0"));
    }
    let decreasing = deltas.windows(2).all(|w| w[1] < w[0]);
    if deltas.is_empty() || !decreasing || deltas.iter().any(|d| !(*d > 0.0) || *d >= cone) {
        return Err(KernelError::InvalidInput("deltas must be positive, decreasing and below t - r2"));
    }
    let mut samples = Vec::with_capacity(deltas.len());
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &delta in deltas {
        let eps = 0.25 * delta;
        let two = mode_kernel_eps(m, KernelPoint::new(cone + delta, r2, t)?, eps)?;
        let three = mode_kernel_eps(m, KernelPoint::new(cone - delta, r2, t)?, eps)?;
        let difference = three - two;
        xs.push(delta);
        ys.push(difference);
        samples.push(ConeSample {
            delta,
            region_two: two,
            region_three: three,
            difference,
            extrapolated: extrapolate_to_zero(&xs, &ys),
        });
    }
    let jump_estimate = samples.last().map(|s| s.extrapolated).unwrap_or(f64::NAN);
    Ok(ConeScan { samples, jump_estimate })
}

/// Value at δ = 0 of the interpolant of `(xs, ys)` in the basis
/// `1, δ ln δ, δ, δ² ln δ, δ², …` (as many functions as points).
///
/// Near the cone each side carries `A(r₁) ln(1/δ)`, and `A` differs across
/// the cone by O(δ), so the difference has a `δ ln δ` term that plain
/// polynomial Richardson extrapolation would leave behind.
pub fn extrapolate_to_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    if n == 0 {
        return f64::NAN;
    }
    // scale δ so the basis columns stay comparable in size
    let scale = xs[..n].iter().cloned().fold(0.0, f64::max);
    let basis = |k: usize, x: f64| -> f64 {
        if k == 0 {
            return 1.0;
        }
        let power = ((k + 1) / 2) as i32;
        let u = x / scale;
        if k % 2 == 1 {
            u.powi(power) * u.ln()
        } else {
            u.powi(power)
        }
    };
    let m = nalgebra::DMatrix::from_fn(n, n, |i, k| basis(k, xs[i]));
    let rhs = nalgebra::DVector::from_column_slice(&ys[..n]);
    match m.lu().solve(&rhs) {
        Some(c) => c[0],
        None => f64::NAN,
    }
}

/// Partial sum `(2π)⁻¹ Σ_{|n|≤n_max} e^{in·dθ} K_{ν_n}`. The `1/(2π)` makes
/// `a = 0` reproduce the free propagator `(2π)⁻¹ (t² - |x₁-x₂|²)_+^{-1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub value: Complex64,
    /// Fejér mean of the partial sums, weights `1 - |n|/(n_max+1)`; it
    /// converges much faster where the kernel is singular in angle
    pub fejer: Complex64,
    /// `K_{ν_n}` for n = 0..=n_max (the kernel is even in n)
    pub modes: Vec<f64>,
    /// `|K|` of the last mode, a crude size for the truncated tail
    pub last_mode: f64,
}

pub fn synthesize_kernel(a: f64, p: KernelPoint, dtheta: f64, n_max: u32) -> Result<Synthesis, KernelError> {
    let mut modes = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max as i64 {
        modes.push(mode_kernel(ModeParams::new(n, a)?, p)?);
    }
    // pair n with -n in a fixed order so the imaginary parts cancel exactly
    let mut value = Complex64::new(modes[0], 0.0);
    let mut fejer = value;
    let denom = n_max as f64 + 1.0;
    for (n, k) in modes.iter().enumerate().skip(1) {
        let phase = n as f64 * dtheta;
        let pair = Complex64::from_polar(*k, phase) + Complex64::from_polar(*k, -phase);
        value += pair;
        fejer += pair * (1.0 - n as f64 / denom);
    }
    value /= 2.0 * PI;
    fejer /= 2.0 * PI;
    let last_mode = modes.last().map(|k| k.abs()).unwrap_or(0.0);
    Ok(Synthesis { value, fejer, modes, last_mode })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzHankel {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Both sides of
/// `∫₀^∞ e^{-tλ} J_ν(r₁λ) J_ν(r₂λ) dλ = π⁻¹ (r₁r₂)^{-1/2} Q_{ν-1/2}((r₁²+r₂²+t²)/(2r₁r₂))`,
/// the left by direct quadrature of Bessel products, the right through Q.
/// Only the damped regime `t > 0` (where `Z > 1`) is covered.
pub fn verify_lipschitz_hankel(nu: f64, r1: f64, r2: f64, t: f64) -> Result<LipschitzHankel, KernelError> {
    let p = KernelPoint::new(r1, r2, t)?;
    let order = BesselOrder::new(nu)?;
    let integrand = |lam: f64| {
        let j1 = bessel_j(order, p.r1 * lam).unwrap_or(f64::NAN);
        let j2 = bessel_j(order, p.r2 * lam).unwrap_or(f64::NAN);
        (-p.t * lam).exp() * j1 * j2
    };
    // |J_ν| <= 1, so the part beyond L is below e^{-tL}/t = tol
    let tol = 1e-12;
    let end = (1.0 / (p.t * tol)).ln().max(1.0) / p.t;
    let panels = ((end * p.r1.max(p.r2) / PI).ceil() as usize).clamp(1, 4096) + 4;
    let lhs = integrate_adaptive_panels(&integrand, 0.0, end, tol, panels)?.value;
    let rr = p.r1 * p.r2;
    let d = p.r1 - p.r2;
    let z = 1.0 + (d * d + p.t * p.t) / (2.0 * rr);
    let rhs = legendre_q_shifted(order, z)? / (PI * rr.sqrt());
    Ok(LipschitzHankel { lhs, rhs, residual: (lhs - rhs).abs() })
}

/// The β → 0 limit of [`diffractive_integral`].
pub const DIFFRACTIVE_LIMIT: f64 = FRAC_PI_2;
