//! Hardy's inequality, the quadratic form `Q(u) = ∫|∇u|² + f/r² |u|²` on
//! `ℝⁿ`, and the equivalence `c₁‖∇u‖² ≤ Q(u) ≤ c₂‖∇u‖²`.
//!
//! Test functions and potentials are zonal: they depend on `r` and on the
//! polar angle `φ ∈ [0, π]` of `S^{n-1}`, where the surface measure is
//! `|S^{n-2}| sin^{n-2}φ dφ`.

pub mod cutoff;
pub mod symbol;

use std::f64::consts::PI;

use rand::Rng;

use crate::quadrature::gauss_legendre;
use crate::specfun::gamma;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnergyError {
    #[error("{quantity}: quadrature estimate {estimate:e} exceeds 1% of {value:e}")]
    GridTolerance { quantity: &'static str, estimate: f64, value: f64 },
    #[error("sphere operator has minimum eigenvalue {min_eigenvalue}; need f > -λ(n)²")]
    PositivityFailure { min_eigenvalue: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error(transparent)]
    Flow(#[from] crate::geodesic::FlowError),
}

/// `λ(n) = (n-2)/2`.
pub fn lambda(n: u32) -> f64 {
    (n as f64 - 2.0) / 2.0
}

/// Sharp Hardy constant `(2/(n-2))²`.
pub fn hardy_constant(n: u32) -> f64 {
    let l = lambda(n);
    1.0 / (l * l)
}

/// `a r^p (1 - r²/R²)³ cos(kφ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZonalTerm {
    pub coef: f64,
    pub power: i32,
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    /// sum of [`ZonalTerm`]s supported in `r < radius`
    Zonal { terms: Vec<ZonalTerm>, radius: f64 },
    /// `r e^{-r²}`, integrated out to r = 8
    GaussianRadial,
    /// radial, `r` on [0, 1], `r^{-β}` on [1, R], linear to 0 on [R, 2R]
    PowerProbe { beta: f64, outer: f64 },
    /// radial, `(r-a)²(b-r)²` on [a, b]
    Annulus { inner: f64, outer: f64 },
}

impl TestFunction {
    /// 1 to 3 terms with `coef ∈ [-1, 1]`, `p ∈ {1, 2, 3}`, `k ∈ {0..3}`,
    /// radius in [1, 3].
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let count = rng.gen_range(1..=3);
        let terms = (0..count)
            .map(|_| ZonalTerm { coef: rng.gen_range(-1.0..1.0), power: rng.gen_range(1..=3), k: rng.gen_range(0..=3) })
            .collect();
        TestFunction::Zonal { terms, radius: rng.gen_range(1.0..3.0) }
    }

    /// `(u, ∂_r u, ∂_φ u)`.
    pub fn eval(&self, r: f64, phi: f64) -> (f64, f64, f64) {
        match self {
            TestFunction::Zonal { terms, radius } => {
                if r >= *radius {
                    return (0.0, 0.0, 0.0);
                }
                let q = 1.0 - (r / radius).powi(2);
                let g = q * q * q;
                let dg = -6.0 * r / (radius * radius) * q * q;
                let mut out = (0.0, 0.0, 0.0);
                for t in terms {
                    let rp = r.powi(t.power);
                    let drp = t.power as f64 * r.powi(t.power - 1);
                    let (s, c) = (t.k as f64 * phi).sin_cos();
                    out.0 += t.coef * rp * g * c;
                    out.1 += t.coef * (drp * g + rp * dg) * c;
                    out.2 -= t.coef * rp * g * t.k as f64 * s;
                }
                out
            }
            TestFunction::GaussianRadial => {
                let e = (-r * r).exp();
                (r * e, (1.0 - 2.0 * r * r) * e, 0.0)
            }
            TestFunction::PowerProbe { beta, outer } => {
                if r <= 1.0 {
                    (r, 1.0, 0.0)
                } else if r <= *outer {
                    (r.powf(-beta), -beta * r.powf(-beta - 1.0), 0.0)
                } else if r <= 2.0 * outer {
                    let top = outer.powf(-beta);
                    (top * (2.0 - r / outer), -top / outer, 0.0)
                } else {
                    (0.0, 0.0, 0.0)
                }
            }
            TestFunction::Annulus { inner, outer } => {
                if r <= *inner || r >= *outer {
                    return (0.0, 0.0, 0.0);
                }
                let (a, b) = (r - inner, outer - r);
                (a * a * b * b, 2.0 * a * b * (b - a), 0.0)
            }
        }
    }

    /// Radial breakpoints: integration panels never straddle a kink.
    fn breakpoints(&self) -> Vec<f64> {
        match self {
            TestFunction::Zonal { radius, .. } => vec![0.0, *radius],
            TestFunction::GaussianRadial => vec![0.0, 8.0],
            TestFunction::PowerProbe { outer, .. } => vec![0.0, 1.0, *outer, 2.0 * outer],
            TestFunction::Annulus { inner, outer } => vec![*inner, *outer],
        }
    }

    fn is_radial(&self) -> bool {
        !matches!(self, TestFunction::Zonal { .. })
    }
}

/// `f(r, φ) = c + a cos φ + b e^{-r²} cos 2φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialProfile {
    pub constant: f64,
    pub cos1: f64,
    pub gaussian_cos2: f64,
}

impl PotentialProfile {
    pub fn constant(c: f64) -> Self {
        PotentialProfile { constant: c, cos1: 0.0, gaussian_cos2: 0.0 }
    }

    pub fn eval(&self, r: f64, phi: f64) -> f64 {
        self.constant + self.cos1 * phi.cos() + self.gaussian_cos2 * (-r * r).exp() * (2.0 * phi).cos()
    }

    /// The angular profile with `w = e^{-r²}` in [0, 1].
    fn angular(&self, w: f64, phi: f64) -> f64 {
        self.constant + self.cos1 * phi.cos() + self.gaussian_cos2 * w * (2.0 * phi).cos()
    }

    /// `‖f‖_∞`. `f` is affine in `w = e^{-r²} ∈ (0, 1]`, so the supremum
    /// sits at `w = 0` or `w = 1`; `φ` is sampled densely.
    pub fn sup_norm(&self) -> f64 {
        let samples = 20_000;
        let mut sup: f64 = 0.0;
        for i in 0..=samples {
            let phi = PI * i as f64 / samples as f64;
            sup = sup.max(self.angular(0.0, phi).abs()).max(self.angular(1.0, phi).abs());
        }
        sup
    }
}

/// Lowest eigenvalue of `-Δ_S + f(r, ·) + λ(n)²` on `S^{n-1}` for zonal
/// `f(r, ·)`, from a flux-form discretization in `φ` with `m` cells.
///
/// The operator commutes with rotations about the axis and its ground
/// state is simple, so the ground state is zonal and the zonal problem
/// `-(sin^{n-2}Φ')'/sin^{n-2} + (f + λ²)Φ` gives the true minimum.
pub fn sphere_min_eigenvalue(f: &PotentialProfile, r: f64, n: u32, m: usize) -> f64 {
    let h = PI / m as f64;
    let weight = |phi: f64| phi.sin().powi(n as i32 - 2);
    let w: Vec<f64> = (0..m).map(|i| weight((i as f64 + 0.5) * h) * h).collect();
    let face: Vec<f64> = (0..=m).map(|i| weight(i as f64 * h) / h).collect();
    let l2 = lambda(n).powi(2);
    // W^{-1/2} (S + W V) W^{-1/2} is tridiagonal
    let diag: Vec<f64> = (0..m)
        .map(|i| {
            let phi = (i as f64 + 0.5) * h;
            (face[i] + face[i + 1] + w[i] * (f.eval(r, phi) + l2)) / w[i]
        })
        .collect();
    let off: Vec<f64> = (0..m - 1).map(|i| -face[i + 1] / (w[i] * w[i + 1]).sqrt()).collect();
    lowest_tridiagonal_eigenvalue(&diag, &off)
}

/// Bisection on the Sturm count (negative pivots of `T - x`).
fn lowest_tridiagonal_eigenvalue(diag: &[f64], off: &[f64]) -> f64 {
    let below = |x: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..diag.len() {
            let b2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
            d = diag[i] - x - b2 / d;
            if d == 0.0 {
                d = -f64::EPSILON * (diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    // Gershgorin bounds
    let radius = |i: usize| {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i < off.len() { off[i].abs() } else { 0.0 };
        left + right
    };
    let mut lo = (0..diag.len()).map(|i| diag[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..diag.len()).map(|i| diag[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    let scale = lo.abs().max(hi.abs());
    while hi - lo > 4.0 * f64::EPSILON * scale {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `|S^{n-2}|`, the factor from the azimuthal directions.
fn azimuthal_measure(n: u32) -> f64 {
    let k = (n - 1) as f64;
    2.0 * PI.powf(0.5 * k) / gamma(0.5 * k).expect("n >= 3")
}

/// Integrals of a test function over `ℝⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Integrals {
    /// `∫ |∂_r u|²`
    pub radial: f64,
    /// `∫ |∇_S u|² / r²`
    pub angular: f64,
    /// `∫ |u|² / r²`
    pub weighted: f64,
    /// `∫ f |u|² / r²`
    pub potential: f64,
    /// `∫ |u|²`
    pub mass: f64,
}

impl Integrals {
    /// `‖∇u‖²`.
    pub fn gradient(&self) -> f64 {
        self.radial + self.angular
    }

    fn max_diff(&self, other: &Integrals) -> Integrals {
        Integrals {
            radial: (self.radial - other.radial).abs(),
            angular: (self.angular - other.angular).abs(),
            weighted: (self.weighted - other.weighted).abs(),
            potential: (self.potential - other.potential).abs(),
            mass: (self.mass - other.mass).abs(),
        }
    }
}

const GL_ORDER: usize = 10;

fn panels(a: f64, b: f64, count: usize) -> Vec<f64> {
    // geometric panels resolve power laws over wide ranges
    if a > 0.0 && b / a > 4.0 {
        let ratio = (b / a).powf(1.0 / count as f64);
        (0..=count).map(|i| if i == count { b } else { a * ratio.powi(i as i32) }).collect()
    } else {
        (0..=count).map(|i| a + (b - a) * i as f64 / count as f64).collect()
    }
}

fn integrate_once(u: &TestFunction, f: Option<&PotentialProfile>, n: u32, refine: usize) -> Integrals {
    let (x, wx) = gauss_legendre(GL_ORDER);
    let mut r_nodes = Vec::new();
    let bp = u.breakpoints();
    for pair in bp.windows(2) {
        let edges = panels(pair[0], pair[1], 8 * refine);
        for e in edges.windows(2) {
            let (c, h) = (0.5 * (e[0] + e[1]), 0.5 * (e[1] - e[0]));
            for k in 0..GL_ORDER {
                r_nodes.push((c + h * x[k], h * wx[k]));
            }
        }
    }
    let phi_nodes: Vec<(f64, f64)> = if u.is_radial() && f.map_or(true, |f| f.cos1 == 0.0 && f.gaussian_cos2 == 0.0) {
        // radial integrand: the angular integral is ∫ sin^{n-2} = √π Γ((n-1)/2)/Γ(n/2)
        let k = n as f64;
        let exact = PI.sqrt() * gamma(0.5 * (k - 1.0)).expect("n >= 3") / gamma(0.5 * k).expect("n >= 3");
        vec![(0.5 * PI, exact)]
    } else {
        let edges = panels(0.0, PI, 4 * refine);
        let mut out = Vec::new();
        for e in edges.windows(2) {
            let (c, h) = (0.5 * (e[0] + e[1]), 0.5 * (e[1] - e[0]));
            for k in 0..GL_ORDER {
                let phi = c + h * x[k];
                out.push((phi, h * wx[k] * phi.sin().powi(n as i32 - 2)));
            }
        }
        out
    };
    let omega = azimuthal_measure(n);
    let mut acc = Integrals::default();
    for &(r, wr) in &r_nodes {
        let radial_w = wr * r.powi(n as i32 - 1) * omega;
        for &(phi, wp) in &phi_nodes {
            let w = radial_w * wp;
            let (v, vr, vphi) = u.eval(r, phi);
            let inv_r2 = 1.0 / (r * r);
            acc.radial += w * vr * vr;
            acc.angular += w * vphi * vphi * inv_r2;
            acc.weighted += w * v * v * inv_r2;
            acc.mass += w * v * v;
            if let Some(f) = f {
                acc.potential += w * f.eval(r, phi) * v * v * inv_r2;
            }
        }
    }
    acc
}

/// Integrals at two resolutions; returns the fine values and the
/// componentwise differences as error estimates.
pub fn integrals(
    u: &TestFunction,
    f: Option<&PotentialProfile>,
    n: u32,
) -> Result<(Integrals, Integrals), EnergyError> {
    if n < 3 {
        return Err(EnergyError::InvalidInput("dimension n must be at least 3"));
    }
    let coarse = integrate_once(u, f, n, 1);
    let fine = integrate_once(u, f, n, 2);
    Ok((fine, fine.max_diff(&coarse)))
}

fn within_tolerance(quantity: &'static str, value: f64, estimate: f64) -> Result<(), EnergyError> {
    if estimate > 0.01 * value.abs() && estimate > 1e-300 {
        return Err(EnergyError::GridTolerance { quantity, estimate, value });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyReport {
    /// `∫ |u/r|²`
    pub lhs: f64,
    /// `∫ |∂_r u|²`
    pub rhs: f64,
    pub ratio: f64,
    /// `(2/(n-2))²`
    pub bound: f64,
    /// relative quadrature error estimate of the ratio
    pub error: f64,
}

impl HardyReport {
    /// `ratio ≤ bound (1 + 2·error)`.
    pub fn holds(&self) -> bool {
        self.ratio <= self.bound * (1.0 + 2.0 * self.error)
    }
}

pub fn hardy_check(u: &TestFunction, n: u32) -> Result<HardyReport, EnergyError> {
    let (v, e) = integrals(u, None, n)?;
    within_tolerance("hardy lhs", v.weighted, e.weighted)?;
    within_tolerance("hardy rhs", v.radial, e.radial)?;
    if v.radial <= 0.0 {
        return Err(EnergyError::InvalidInput("test function has no radial gradient"));
    }
    Ok(HardyReport {
        lhs: v.weighted,
        rhs: v.radial,
        ratio: v.weighted / v.radial,
        bound: hardy_constant(n),
        error: e.weighted / v.weighted.abs().max(f64::MIN_POSITIVE) + e.radial / v.radial,
    })
}

/// `Q(u) = ∫ |∇u|² + f/r² |u|²`.
pub fn quadratic_form(u: &TestFunction, f: &PotentialProfile, n: u32) -> Result<f64, EnergyError> {
    let (v, e) = integrals(u, Some(f), n)?;
    let q = v.gradient() + v.potential;
    within_tolerance("Q(u)", q, e.radial + e.angular + e.potential)?;
    Ok(q)
}

/// The two constants of the norm equivalence, for a given potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceConstants {
    /// min over the support of the lowest eigenvalue of `-Δ_S + f + λ²`
    pub delta2: f64,
    pub sup_f: f64,
    /// `δ² / (δ² + ‖f‖_∞)`
    pub c1: f64,
    /// `1 + ‖f‖_∞ / λ²`
    pub c2: f64,
}

/// The eigenvalue is the minimum of functions affine in `e^{-r²}`, hence
/// concave in it, and is minimized at an end of `[e^{-R²}, 1]`.
pub fn equivalence_constants(f: &PotentialProfile, n: u32, support: f64) -> Result<EquivalenceConstants, EnergyError> {
    if n < 3 {
        return Err(EnergyError::InvalidInput("dimension n must be at least 3"));
    }
    const CELLS: usize = 400;
    let delta2 = sphere_min_eigenvalue(f, 0.0, n, CELLS).min(sphere_min_eigenvalue(f, support, n, CELLS));
    if delta2 <= 0.0 {
        return Err(EnergyError::PositivityFailure { min_eigenvalue: delta2 });
    }
    let sup_f = f.sup_norm();
    let l2 = lambda(n).powi(2);
    Ok(EquivalenceConstants { delta2, sup_f, c1: delta2 / (delta2 + sup_f), c2: 1.0 + sup_f / l2 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEquivalence {
    pub q: f64,
    /// `‖∇u‖²`
    pub gradient: f64,
    pub constants: EquivalenceConstants,
    /// absolute quadrature error estimate carried into both comparisons
    pub error: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

/// Checks `c₁‖∇u‖² ≤ Q(u) ≤ c₂‖∇u‖²`, with `c₁ = δ²/(δ² + ‖f‖_∞)` and
/// `c₂ = 1 + ‖f‖_∞/λ²`.
pub fn norm_equivalence_check(u: &TestFunction, f: &PotentialProfile, n: u32) -> Result<NormEquivalence, EnergyError> {
    let support = *u.breakpoints().last().expect("breakpoints are non-empty");
    let constants = equivalence_constants(f, n, support)?;
    let (v, e) = integrals(u, Some(f), n)?;
    let gradient = v.gradient();
    let q = gradient + v.potential;
    let error = 2.0 * (e.radial + e.angular + e.potential);
    within_tolerance("Q(u)", q, error / 2.0)?;
    Ok(NormEquivalence {
        q,
        gradient,
        constants,
        error,
        lower_ok: constants.c1 * gradient <= q + error,
        upper_ok: q <= constants.c2 * gradient + error,
    })
}
