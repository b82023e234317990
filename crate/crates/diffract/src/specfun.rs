//! Gamma, Bessel J of real order, and the Legendre function Q_{ν-1/2} on (1, ∞).

use std::f64::consts::PI;

use crate::quadrature::{integrate_adaptive, integrate_adaptive_panels, integrate_decaying, QuadError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error("{function}: argument {value} outside the domain")]
    Domain { function: &'static str, value: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// Bessel order ν, finite and non-negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self, SpecError> {
        if nu.is_finite() && nu >= 0.0 {
            Ok(BesselOrder(nu))
        } else {
            Err(SpecError::Domain { function: "BesselOrder", value: nu })
        }
    }

    pub fn nu(self) -> f64 {
        self.0
    }
}

// Lanczos, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

pub fn gamma(x: f64) -> Result<f64, SpecError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecError::Domain { function: "gamma", value: x });
    }
    Ok(gamma_pos(x))
}

fn gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        // reflection keeps the Lanczos sum in its accurate range
        return PI / ((PI * x).sin() * gamma_pos(1.0 - x));
    }
    if x == x.floor() && x <= 30.0 {
        return (1..x as u64).fold(1.0, |acc, k| acc * k as f64);
    }
    let z = x - 1.0;
    let mut sum = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * sum
}

/// J_ν(z) for real ν >= 0 and z >= 0.
///
/// Power series where it does not cancel badly, the Hankel asymptotic
/// expansion once its smallest term is below double precision, and
/// Schläfli's integral in the band between.
pub fn bessel_j(order: BesselOrder, z: f64) -> Result<f64, SpecError> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(SpecError::Domain { function: "bessel_j", value: z });
    }
    let nu = order.nu();
    if z == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    if z <= 12.0 || 0.25 * z * z <= nu + 1.0 {
        return Ok(bessel_series(nu, z));
    }
    if let Some(v) = bessel_asymptotic(nu, z) {
        return Ok(v);
    }
    bessel_schlafli(nu, z)
}

fn bessel_series(nu: f64, z: f64) -> f64 {
    let q = -0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * (nu + k));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && k > 0.5 * z {
            break;
        }
        k += 1.0;
        if k > 500.0 {
            break;
        }
    }
    let pre = if nu == 0.0 { 1.0 } else { (nu * (0.5 * z).ln() - ln_gamma(nu + 1.0)).exp() };
    pre * sum
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut sum = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + sum.ln()
}

fn bessel_asymptotic(nu: f64, z: f64) -> Option<f64> {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    let mut k = 1;
    loop {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) / (8.0 * k as f64 * z);
        if next.abs() > term.abs() && k > 1 {
            return None;
        }
        term = next;
        // a_k / z^k enters P for even k and Q for odd k, alternating in sign
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
        k += 1;
        if k > 200 {
            return None;
        }
    }
    let w = z - (0.5 * nu + 0.25) * PI;
    Some((2.0 / (PI * z)).sqrt() * (p * w.cos() - q * w.sin()))
}

fn bessel_schlafli(nu: f64, z: f64) -> Result<f64, SpecError> {
    let panels = (z / PI).ceil() as usize;
    let osc = integrate_adaptive_panels(&|th: f64| (z * th.sin() - nu * th).cos(), 0.0, PI, 1e-14, panels)?;
    let mut value = osc.value / PI;
    let s = (nu * PI).sin();
    if s != 0.0 {
        let top = (40.0 / z).asinh();
        let tail = integrate_adaptive(|t: f64| (-z * t.sinh() - nu * t).exp(), 0.0, top, 1e-15)?;
        value -= s / PI * tail.value;
    }
    Ok(value)
}

/// ln sinh(x) for x > 0 without overflow.
fn ln_sinh(x: f64) -> f64 {
    if x < 1.0 {
        x.sinh().ln()
    } else {
        x + (-(-2.0 * x).exp()).ln_1p() - std::f64::consts::LN_2
    }
}

/// cosh⁻¹(z) for z >= 1, accurate as z → 1⁺.
pub fn acosh_near_one(z: f64) -> f64 {
    let e = z - 1.0;
    (e + (e * (z + 1.0)).sqrt()).ln_1p()
}

/// Q_{ν-1/2}(Z) for Z > 1 from
/// `∫_{cosh⁻¹Z}^∞ e^{-sν} (2 cosh s - 2Z)^{-1/2} ds`, after `s = cosh⁻¹Z + w²`.
pub fn legendre_q_shifted(order: BesselOrder, z: f64) -> Result<f64, SpecError> {
    if !(z > 1.0) || !z.is_finite() {
        return Err(SpecError::Domain { function: "legendre_q_shifted", value: z });
    }
    let nu = order.nu();
    let eta = acosh_near_one(z);
    // 2cosh(η+w²) - 2cosh η = 4 sinh(η + w²/2) sinh(w²/2), and ds = 2w dw
    let integrand = |w: f64| {
        let w2 = w * w;
        if w2 == 0.0 {
            return (-nu * eta).exp() * (2.0 / eta.sinh()).sqrt();
        }
        let log = -nu * (eta + w2) - 0.5 * (ln_sinh(eta + 0.5 * w2) + ln_sinh(0.5 * w2));
        w * log.exp()
    };
    let res = integrate_decaying(integrand, 0.0, 1e-13, nu + 0.5)?;
    Ok(res.value)
}
