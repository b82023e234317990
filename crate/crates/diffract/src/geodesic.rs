//! Bicharacteristics of `τ² - (ξ² + |ζ|²_k)/r²` in b-coordinates
//! `ξ dr/r + ζ dθ + τ dt`, in the original parametrization and rescaled
//! by `r²` (regular at `r = 0`).

use std::f64::consts::PI;

/// `hamilton_rhs` refuses `r` at or below this.
pub const R_FLOOR: f64 = 1e-12;
/// A full-system trajectory stops once `r` drops below this.
pub const ORIGIN_THRESHOLD: f64 = 1e-6;
/// Largest number of halvings of the nominal step.
const MAX_HALVINGS: u32 = 50;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlowError {
    #[error("r = {r:e} is at or below the floor {R_FLOOR:e}")]
    OriginSingularity { r: f64 },
    #[error("step fell below {step:e} at s = {s}")]
    StepUnderflow { s: f64, step: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
}

/// Point of the b-cotangent bundle. On the circle only `theta[0]` and
/// `zeta[0]` are used; on the round 2-sphere `theta = (polar, azimuth)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub r: f64,
    pub theta: [f64; 2],
    pub tau: f64,
    pub xi: f64,
    pub zeta: [f64; 2],
}

impl FlowState {
    pub fn circle(t: f64, r: f64, theta: f64, tau: f64, xi: f64, zeta: f64) -> Self {
        FlowState { t, r, theta: [theta, 0.0], tau, xi, zeta: [zeta, 0.0] }
    }

    fn to_array(self) -> [f64; 8] {
        [self.t, self.r, self.theta[0], self.theta[1], self.tau, self.xi, self.zeta[0], self.zeta[1]]
    }

    fn from_array(a: [f64; 8]) -> Self {
        FlowState { t: a[0], r: a[1], theta: [a[2], a[3]], tau: a[4], xi: a[5], zeta: [a[6], a[7]] }
    }

    fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// `ξ̂ = ξ/τ`.
    pub fn xi_hat(&self) -> f64 {
        self.xi / self.tau
    }

    /// `τ² - (ξ² + |ζ|²_k)/r²`.
    pub fn sigma(&self, g: SphereMetric) -> f64 {
        self.tau * self.tau - (self.xi * self.xi + g.norm2(self.theta, self.zeta)) / (self.r * self.r)
    }
}

/// Base sphere with its dual metric `k^{ij}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereMetric {
    /// `S¹`, `k ≡ 1`
    Circle,
    /// `S²` in the chart `(φ, ψ)` with `k = diag(1, 1/sin²φ)`, away from the poles
    RoundS2,
}

impl SphereMetric {
    pub fn dim(self) -> usize {
        match self {
            SphereMetric::Circle => 1,
            SphereMetric::RoundS2 => 2,
        }
    }

    pub fn inverse(self, theta: [f64; 2]) -> [[f64; 2]; 2] {
        match self {
            SphereMetric::Circle => [[1.0, 0.0], [0.0, 0.0]],
            SphereMetric::RoundS2 => {
                let s = theta[0].sin();
                [[1.0, 0.0], [0.0, 1.0 / (s * s)]]
            }
        }
    }

    /// `∂_{θ_l} k^{ij}`, indexed `[l][i][j]`.
    pub fn d_inverse(self, theta: [f64; 2]) -> [[[f64; 2]; 2]; 2] {
        let mut d = [[[0.0; 2]; 2]; 2];
        if self == SphereMetric::RoundS2 {
            let (s, c) = theta[0].sin_cos();
            d[0][1][1] = -2.0 * c / (s * s * s);
        }
        d
    }

    /// `|ζ|²_k`.
    pub fn norm2(self, theta: [f64; 2], zeta: [f64; 2]) -> f64 {
        let k = self.inverse(theta);
        let mut acc = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                acc += k[i][j] * zeta[i] * zeta[j];
            }
        }
        acc
    }
}

/// The angular parts shared by both systems, before the `1/r²` factor:
/// `θ' = k ζ / 2` and `ζ'_l = -∂_l(k^{ij}) ζ_i ζ_j / 4`.
fn angular(s: &FlowState, g: SphereMetric) -> ([f64; 2], [f64; 2]) {
    let k = g.inverse(s.theta);
    let dk = g.d_inverse(s.theta);
    let mut dtheta = [0.0; 2];
    let mut dzeta = [0.0; 2];
    for i in 0..2 {
        for j in 0..2 {
            dtheta[i] += 0.5 * k[i][j] * s.zeta[j];
            for l in 0..2 {
                dzeta[l] -= 0.25 * dk[l][i][j] * s.zeta[i] * s.zeta[j];
            }
        }
    }
    (dtheta, dzeta)
}

/// `t' = τ, r' = -ξ/r, θ' = kζ/(2r²), τ' = 0, ξ' = -(ξ² + |ζ|²)/r²`,
/// `ζ'_l = -∂_l(k^{ij})ζ_iζ_j/(4r²)`.
pub fn hamilton_rhs(s: &FlowState, g: SphereMetric) -> Result<FlowState, FlowError> {
    if !(s.r > R_FLOOR) {
        return Err(FlowError::OriginSingularity { r: s.r });
    }
    let r2 = s.r * s.r;
    let (dtheta, dzeta) = angular(s, g);
    Ok(FlowState {
        t: s.tau,
        r: -s.xi / s.r,
        theta: [dtheta[0] / r2, dtheta[1] / r2],
        tau: 0.0,
        xi: -(s.xi * s.xi + g.norm2(s.theta, s.zeta)) / r2,
        zeta: [dzeta[0] / r2, dzeta[1] / r2],
    })
}

/// `r²` times [`hamilton_rhs`]: `t' = r²τ, r' = -rξ, θ' = kζ/2`,
/// `ξ' = -(ξ² + |ζ|²)`, `ζ'_l = -∂_l(k^{ij})ζ_iζ_j/4`. Defined at `r = 0`.
pub fn rescaled_rhs(s: &FlowState, g: SphereMetric) -> FlowState {
    let (dtheta, dzeta) = angular(s, g);
    FlowState {
        t: s.r * s.r * s.tau,
        r: -s.r * s.xi,
        theta: dtheta,
        tau: 0.0,
        xi: -(s.xi * s.xi + g.norm2(s.theta, s.zeta)),
        zeta: dzeta,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowSystem {
    Full,
    Rescaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Completed,
    /// full system only: `r` dropped below [`ORIGIN_THRESHOLD`]
    OriginReached,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub system: FlowSystem,
    pub metric: SphereMetric,
    pub s: Vec<f64>,
    pub states: Vec<FlowState>,
    /// σ at every state
    pub sigma: Vec<f64>,
    pub termination: Termination,
    /// indices where the flow was carried through the origin
    pub crossings: Vec<usize>,
}

impl Trajectory {
    pub fn min_r(&self) -> f64 {
        self.states.iter().map(|s| s.r).fold(f64::INFINITY, f64::min)
    }

    /// Largest `|σ(s) - σ(0)|` over states with `r > r_min`.
    pub fn sigma_drift(&self, r_min: f64) -> f64 {
        let s0 = self.sigma[0];
        self.states
            .iter()
            .zip(&self.sigma)
            .filter(|(st, _)| st.r > r_min)
            .map(|(_, s)| (s - s0).abs())
            .fold(0.0, f64::max)
    }

    pub fn tau_drift(&self) -> f64 {
        let t0 = self.states[0].tau;
        self.states.iter().map(|s| (s.tau - t0).abs()).fold(0.0, f64::max)
    }

    pub fn last(&self) -> &FlowState {
        self.states.last().expect("trajectories hold their initial state")
    }
}

fn rhs(system: FlowSystem, s: &FlowState, g: SphereMetric) -> Result<FlowState, FlowError> {
    match system {
        FlowSystem::Full => hamilton_rhs(s, g),
        FlowSystem::Rescaled => Ok(rescaled_rhs(s, g)),
    }
}

fn rk4(system: FlowSystem, y: &FlowState, g: SphereMetric, h: f64) -> Result<FlowState, FlowError> {
    let y0 = y.to_array();
    let shifted = |k: &[f64; 8], c: f64| {
        let mut out = y0;
        for i in 0..8 {
            out[i] += c * k[i];
        }
        FlowState::from_array(out)
    };
    let k1 = rhs(system, y, g)?.to_array();
    let k2 = rhs(system, &shifted(&k1, 0.5 * h), g)?.to_array();
    let k3 = rhs(system, &shifted(&k2, 0.5 * h), g)?.to_array();
    let k4 = rhs(system, &shifted(&k3, h), g)?.to_array();
    let mut out = y0;
    for i in 0..8 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(FlowState::from_array(out))
}

/// One classical RK4 step of size `h` (which may be negative).
pub fn flow_step(y: &FlowState, g: SphereMetric, h: f64, system: FlowSystem) -> Result<FlowState, FlowError> {
    rk4(system, y, g, h)
}

/// Whether a trial step is accepted: finite, `r` stays positive, and `ξ`
/// moves by at most a tenth of its scale.
fn acceptable(system: FlowSystem, from: &FlowState, to: &FlowState) -> bool {
    if !to.is_finite() {
        return false;
    }
    if system == FlowSystem::Full && !(to.r > R_FLOOR) {
        return false;
    }
    if to.r < 0.0 {
        return false;
    }
    (to.xi - from.xi).abs() <= 0.1 * (1.0 + from.xi.abs())
}

/// Classical RK4 with nominal step `step` over `[0, s_span]`, halving
/// the step where it would be rejected by the acceptance test.
pub fn integrate_flow(
    s0: FlowState,
    g: SphereMetric,
    s_span: f64,
    step: f64,
    system: FlowSystem,
) -> Result<Trajectory, FlowError> {
    if !(step > 0.0 && s_span > 0.0 && step.is_finite() && s_span.is_finite()) {
        return Err(FlowError::InvalidInput("step and span must be positive"));
    }
    if !s0.is_finite() || s0.r < 0.0 {
        return Err(FlowError::InvalidInput("initial state must be finite with r >= 0"));
    }
    if system == FlowSystem::Full && !(s0.r > ORIGIN_THRESHOLD) {
        return Err(FlowError::OriginSingularity { r: s0.r });
    }
    let mut traj = Trajectory {
        system,
        metric: g,
        s: vec![0.0],
        states: vec![s0],
        sigma: vec![s0.sigma(g)],
        termination: Termination::Completed,
        crossings: Vec::new(),
    };
    advance(&mut traj, s_span, step)?;
    Ok(traj)
}

fn advance(traj: &mut Trajectory, s_end: f64, step: f64) -> Result<(), FlowError> {
    let (system, g) = (traj.system, traj.metric);
    let mut s = *traj.s.last().expect("non-empty");
    let mut y = *traj.last();
    // stepping by index keeps the nominal grid free of accumulated rounding
    let start = s;
    let mut k = 0u64;
    while s < s_end {
        let target = (start + (k + 1) as f64 * step).min(s_end);
        let mut h = target - s;
        let mut halvings = 0;
        let next = loop {
            match rk4(system, &y, g, h) {
                Ok(cand) if acceptable(system, &y, &cand) => break cand,
                _ => {
                    halvings += 1;
                    h *= 0.5;
                    if halvings > MAX_HALVINGS {
                        return Err(FlowError::StepUnderflow { s, step: h });
                    }
                }
            }
        };
        s += h;
        if halvings == 0 {
            k += 1;
            s = target;
        } else {
            // resynchronize with the nominal grid once past the hard part
            k = ((s - start) / step).floor() as u64;
        }
        y = next;
        traj.s.push(s);
        traj.states.push(y);
        traj.sigma.push(y.sigma(g));
        if system == FlowSystem::Full && y.r < ORIGIN_THRESHOLD {
            traj.termination = Termination::OriginReached;
            return Ok(());
        }
    }
    traj.termination = Termination::Completed;
    Ok(())
}

/// Full-system flow on the circle, carried through the origin each time it
/// is reached. With `ζ = 0` the motion near `r = 0` is the straight line
/// `r' = -ξ/r = const`, so the last stretch of length `r` to the origin and
/// the first stretch out of it on the opposite ray (`θ + π`, `ξ → -ξ`)
/// are bridged exactly.
pub fn trace_through_origin(s0: FlowState, s_span: f64, step: f64) -> Result<Trajectory, FlowError> {
    let mut traj = integrate_flow(s0, SphereMetric::Circle, s_span, step, FlowSystem::Full)?;
    while traj.termination == Termination::OriginReached {
        let y = *traj.last();
        if y.zeta[0] != 0.0 {
            // only radial flows reach the origin; anything else is reported as is
            return Ok(traj);
        }
        let speed = y.xi / y.r;
        let s_cross = traj.s.last().expect("non-empty") + 2.0 * y.r / speed;
        if s_cross >= s_span {
            return Ok(traj);
        }
        let mut out = y;
        out.xi = -y.xi;
        out.theta[0] = y.theta[0] + PI;
        out.t = y.t + y.tau * 2.0 * y.r / speed;
        traj.crossings.push(traj.states.len());
        traj.s.push(s_cross);
        traj.states.push(out);
        traj.sigma.push(out.sigma(SphereMetric::Circle));
        advance(&mut traj, s_span, step)?;
    }
    Ok(traj)
}

/// `(s, ξ/τ)` along a trajectory.
pub fn xi_hat_profile(traj: &Trajectory) -> Vec<(f64, f64)> {
    traj.s.iter().zip(&traj.states).map(|(s, y)| (*s, y.xi_hat())).collect()
}

fn coords(y: &FlowState) -> [f64; 7] {
    [y.t, y.r, y.theta[0], y.theta[1], y.xi, y.zeta[0], y.zeta[1]]
}

fn point_segment(p: &[f64; 7], a: &[f64; 7], b: &[f64; 7]) -> f64 {
    let mut ab2 = 0.0;
    let mut ap_ab = 0.0;
    for i in 0..7 {
        ab2 += (b[i] - a[i]) * (b[i] - a[i]);
        ap_ab += (p[i] - a[i]) * (b[i] - a[i]);
    }
    let u = if ab2 > 0.0 { (ap_ab / ab2).clamp(0.0, 1.0) } else { 0.0 };
    (0..7).map(|i| (p[i] - a[i] - u * (b[i] - a[i])).powi(2)).sum::<f64>().sqrt()
}

/// Largest distance from a point of `a` (with `r > r_min` and `t` inside
/// the span of `b`) to the polyline through `b`. Both must run forward in `t`.
fn directed(a: &Trajectory, b: &Trajectory, r_min: f64) -> f64 {
    let bt: Vec<f64> = b.states.iter().map(|y| y.t).collect();
    let bc: Vec<[f64; 7]> = b.states.iter().map(coords).collect();
    let (lo, hi) = (bt[0], *bt.last().expect("non-empty"));
    let mut worst: f64 = 0.0;
    for y in a.states.iter().filter(|y| y.r > r_min && y.t >= lo && y.t <= hi) {
        let p = coords(y);
        let k = bt.partition_point(|&t| t <= y.t).saturating_sub(1);
        let from = k.saturating_sub(3);
        let to = (k + 4).min(bc.len() - 1);
        let d = (from..to).map(|i| point_segment(&p, &bc[i], &bc[i + 1])).fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
    }
    worst
}

/// Symmetric Hausdorff distance between two trajectories as point sets in
/// `(t, r, θ, ξ, ζ)`, restricted to `r > r_min` and their common `t` range.
/// `τ` must be positive along both so that `t` orders the points.
pub fn hausdorff_distance(a: &Trajectory, b: &Trajectory, r_min: f64) -> f64 {
    directed(a, b, r_min).max(directed(b, a, r_min))
}

/// Smallest `r` on the flow through `(r₀, ξ₀, ζ)`: `r₀|ζ|_k / √(ξ₀² + |ζ|²_k)`,
/// from the conservation of `(ξ² + |ζ|²)/r²` and `ξ = 0` at the turning point.
pub fn sec_envelope(s0: &FlowState, g: SphereMetric) -> f64 {
    let z2 = g.norm2(s0.theta, s0.zeta);
    s0.r * z2.sqrt() / (s0.xi * s0.xi + z2).sqrt()
}
