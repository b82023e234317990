//! Finite-difference solve of `u_tt = u_rr + u_r/r - ν²u/r²` with
//! `u(·,0) = 0` and `u_t(·,0)` a mollified delta at `r₀`, as an independent
//! check on the closed-form mode kernels.
//!
//! Space is a flux-form (finite-volume) discretization on the staggered
//! grid `r_j = (j + ½) dr`, time is leapfrog. The flux through `r = 0` is
//! zero, which is the discrete form of the `u ~ r^ν` regularity closure.

use crate::kernel::{classify_region, mode_kernel, KernelError, KernelPoint, ModeParams, Region};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("time step {dt} exceeds the stability limit {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("wave reaches r = {reach} but the wall is at r_max = {r_max}")]
    BoundaryContamination { reach: f64, r_max: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("sample (r1 = {r1}, t = {t}) is within {distance} of a light cone, need > {needed}")]
    SampleNearCone { r1: f64, t: f64, distance: f64, needed: f64 },
    #[error("sample (r1 = {r1}, t = {t}) lies outside the computed field")]
    OutsideField { r1: f64, t: f64 },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Steps between stored time slices.
pub const SLICE_EVERY: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FDConfig {
    pub r_max: f64,
    pub dr: f64,
    pub dt: f64,
    pub t_end: f64,
    pub mollifier_width: f64,
    pub nu: f64,
}

impl FDConfig {
    /// Width `6 dr` and `dt = 0.8 dr / √(1+ν²)`.
    pub fn new(r_max: f64, dr: f64, t_end: f64, nu: f64) -> Result<Self, OracleError> {
        let cfg = FDConfig { r_max, dr, dt: 0.8 * dr / (1.0 + nu * nu).sqrt(), t_end, mollifier_width: 6.0 * dr, nu };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_width(mut self, width: f64) -> Result<Self, OracleError> {
        self.mollifier_width = width;
        self.validate()?;
        Ok(self)
    }

    /// Largest stable leapfrog step. The Gershgorin bound on the spatial
    /// operator is `4(1+ν²)/dr²`, reached in the first cell where the
    /// potential is `4ν²/dr²`.
    pub fn stability_limit(&self) -> f64 {
        (0.9 * self.dr).min(self.dr / (1.0 + self.nu * self.nu).sqrt())
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        let finite =
            [self.r_max, self.dr, self.dt, self.t_end, self.mollifier_width, self.nu].iter().all(|v| v.is_finite());
        if !finite || self.dr <= 0.0 || self.dt <= 0.0 || self.t_end <= 0.0 || self.nu < 0.0 {
            return Err(OracleError::InvalidConfig("parameters must be finite and positive"));
        }
        if self.r_max < 16.0 * self.dr {
            return Err(OracleError::InvalidConfig("r_max must span at least 16 cells"));
        }
        if self.mollifier_width < 4.0 * self.dr {
            return Err(OracleError::InvalidConfig("mollifier width must be at least 4 dr"));
        }
        let limit = self.stability_limit();
        if self.dt > limit {
            return Err(OracleError::CflViolation { dt: self.dt, limit });
        }
        Ok(())
    }

    fn cells(&self) -> usize {
        (self.r_max / self.dr).round() as usize
    }

    /// Half-width of the mollifier support.
    pub fn support(&self) -> f64 {
        3.0 * self.mollifier_width
    }
}

/// Gaussian with standard deviation `width / 2`, cut at `±3 width` and
/// scaled so that `Σ g_j r_j dr = 1` on the grid.
pub fn mollifier(cfg: &FDConfig, r0: f64) -> Vec<f64> {
    let sigma = 0.5 * cfg.mollifier_width;
    let support = cfg.support();
    let mut g: Vec<f64> = (0..cfg.cells())
        .map(|j| {
            let r = (j as f64 + 0.5) * cfg.dr;
            let x = r - r0;
            if x.abs() <= support {
                (-0.5 * (x / sigma).powi(2)).exp()
            } else {
                0.0
            }
        })
        .collect();
    let mass: f64 = g.iter().enumerate().map(|(j, v)| v * (j as f64 + 0.5) * cfg.dr * cfg.dr).sum();
    if mass > 0.0 {
        g.iter_mut().for_each(|v| *v /= mass);
    }
    g
}

/// Stored solution: slices every [`SLICE_EVERY`] steps (and at the end).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeField {
    pub cfg: FDConfig,
    pub r: Vec<f64>,
    pub times: Vec<f64>,
    pub slices: Vec<Vec<f64>>,
    /// conserved discrete energy at each stored slice
    pub energy: Vec<f64>,
}

impl ModeField {
    /// Largest relative deviation of the discrete energy from its first value.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy.first().copied().unwrap_or(0.0);
        if e0 == 0.0 {
            return 0.0;
        }
        self.energy.iter().map(|e| (e - e0).abs() / e0).fold(0.0, f64::max)
    }

    /// Largest `|u|` in the slice nearest to `t`.
    pub fn slice_peak(&self, t: f64) -> f64 {
        let k = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(k, _)| k)
            .unwrap_or(0);
        self.slices[k].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn peak(&self) -> f64 {
        self.slices.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `u(r, t)`: cubic in r on the four nearest cells, linear in t
    /// between stored slices.
    pub fn value(&self, r: f64, t: f64) -> Option<f64> {
        let n = self.r.len();
        let (&t0, &t1) = (self.times.first()?, self.times.last()?);
        if !(t >= t0 && t <= t1) || !(r >= self.r[0] && r <= self.r[n - 1]) {
            return None;
        }
        let k = self.times.partition_point(|&s| s <= t).clamp(1, self.times.len() - 1) - 1;
        let span = self.times[k + 1] - self.times[k];
        let w = if span > 0.0 { (t - self.times[k]) / span } else { 0.0 };
        let a = self.spatial(&self.slices[k], r);
        let b = self.spatial(&self.slices[k + 1], r);
        Some((1.0 - w) * a + w * b)
    }

    fn spatial(&self, u: &[f64], r: f64) -> f64 {
        let n = self.r.len();
        let dr = self.cfg.dr;
        let j = ((r / dr - 0.5).floor().max(0.0) as usize).min(n - 2);
        let lo = j.saturating_sub(1).min(n - 4);
        let mut acc = 0.0;
        for a in lo..lo + 4 {
            let mut l = 1.0;
            for b in lo..lo + 4 {
                if a != b {
                    l *= (r - self.r[b]) / (self.r[a] - self.r[b]);
                }
            }
            acc += l * u[a];
        }
        acc
    }
}

struct Operator {
    /// `r_j dr`
    mass: Vec<f64>,
    /// `r_{j+½} / dr` for faces j+½, j = 0..n-1; the outer face is a wall
    face: Vec<f64>,
    /// `ν² dr / r_j`
    potential: Vec<f64>,
}

impl Operator {
    fn new(cfg: &FDConfig) -> Self {
        let n = cfg.cells();
        let dr = cfg.dr;
        let r = |j: usize| (j as f64 + 0.5) * dr;
        Operator {
            mass: (0..n).map(|j| r(j) * dr).collect(),
            face: (1..=n).map(|j| j as f64).collect(),
            potential: (0..n).map(|j| cfg.nu * cfg.nu * dr / r(j)).collect(),
        }
    }

    /// `(S u)_j`: symmetric positive stiffness, so that `u_tt = -M⁻¹ S u`.
    fn stiffness(&self, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        for j in 0..n {
            let inner = if j > 0 { self.face[j - 1] * (u[j] - u[j - 1]) } else { 0.0 };
            let outer = if j + 1 < n { self.face[j] * (u[j + 1] - u[j]) } else { -self.face[j] * u[j] };
            out[j] = inner - outer + self.potential[j] * u[j];
        }
    }

    /// `½ vᵀ M v + ½ aᵀ S b`, the leapfrog invariant with `v = (b - a)/dt`.
    fn energy(&self, a: &[f64], b: &[f64], dt: f64, scratch: &mut [f64]) -> f64 {
        self.stiffness(b, scratch);
        let mut kinetic = 0.0;
        let mut potential = 0.0;
        for j in 0..a.len() {
            let v = (b[j] - a[j]) / dt;
            kinetic += self.mass[j] * v * v;
            potential += a[j] * scratch[j];
        }
        0.5 * (kinetic + potential)
    }
}

/// Leapfrog solve from `u = 0`, `u_t = velocity` (one value per cell).
pub fn solve_initial_velocity(cfg: &FDConfig, velocity: &[f64]) -> Result<ModeField, OracleError> {
    cfg.validate()?;
    let n = cfg.cells();
    if velocity.len() != n {
        return Err(OracleError::InvalidConfig("velocity must have one value per cell"));
    }
    let op = Operator::new(cfg);
    let dt = cfg.dt;
    let steps = (cfg.t_end / dt).ceil() as usize;
    let mut scratch = vec![0.0; n];

    // u¹ = dt g + dt³/6 A g with A = -M⁻¹S
    let mut prev = vec![0.0; n];
    op.stiffness(velocity, &mut scratch);
    let mut cur: Vec<f64> = (0..n).map(|j| dt * velocity[j] - dt.powi(3) / 6.0 * scratch[j] / op.mass[j]).collect();

    let r: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * cfg.dr).collect();
    let mut times = vec![0.0];
    let mut slices = vec![prev.clone()];
    let mut energy = vec![op.energy(&prev, &cur, dt, &mut scratch)];
    let mut next = vec![0.0; n];
    for step in 1..=steps {
        if step % SLICE_EVERY == 0 || step == steps {
            times.push(step as f64 * dt);
            slices.push(cur.clone());
        }
        if step == steps {
            break;
        }
        op.stiffness(&cur, &mut scratch);
        for j in 0..n {
            next[j] = 2.0 * cur[j] - prev[j] - dt * dt * scratch[j] / op.mass[j];
        }
        if step % SLICE_EVERY == 0 {
            energy.push(op.energy(&cur, &next, dt, &mut scratch));
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(ModeField { cfg: *cfg, r, times, slices, energy })
}

/// Field of the mollified point source at `r0`.
pub fn solve_mode(cfg: &FDConfig, r0: f64) -> Result<ModeField, OracleError> {
    cfg.validate()?;
    let support = cfg.support();
    if !(r0 > 4.0 * cfg.mollifier_width) {
        return Err(OracleError::InvalidConfig("source must sit more than 4 widths from the origin"));
    }
    let reach = r0 + support + cfg.t_end;
    if reach >= cfg.r_max {
        return Err(OracleError::BoundaryContamination { reach, r_max: cfg.r_max });
    }
    solve_initial_velocity(cfg, &mollifier(cfg, r0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub point: KernelPoint,
    pub region: Region,
    /// kernel averaged against the same discrete mollifier
    pub analytic: f64,
    pub numeric: f64,
    /// `|numeric - analytic| / max(|analytic|, ½(r₁r₂)^{-1/2})`; for region I
    /// rows, `|numeric|` relative to the peak of the field at that time
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    /// over rows in regions II and III
    pub max_rel_err: f64,
    pub mean_rel_err: f64,
    /// worst region-I leakage relative to the field peak
    pub max_leakage: f64,
    pub energy_drift: f64,
}

/// Solves with the source at `r₂` (which must be common to all samples)
/// and compares against the mollified closed-form kernel.
///
/// The scale `½(r₁r₂)^{-1/2}` in the relative error is the size of the
/// kernel and of its jump; it keeps points where the kernel vanishes
/// identically from dividing by zero.
pub fn compare_kernel(m: ModeParams, cfg: &FDConfig, samples: &[KernelPoint]) -> Result<ComparisonReport, OracleError> {
    if (m.nu - cfg.nu).abs() > 1e-14 * m.nu.max(1.0) {
        return Err(OracleError::InvalidConfig("mode order differs from the solver's nu"));
    }
    let Some(first) = samples.first() else {
        return Err(OracleError::InvalidConfig("no sample points"));
    };
    let r2 = first.r2;
    if samples.iter().any(|p| p.r2 != r2) {
        return Err(OracleError::InvalidConfig("all samples must share the source radius r2"));
    }
    let needed = cfg.support();
    for p in samples {
        let distance = (p.t - (p.r1 + p.r2)).abs().min((p.t - (p.r1 - p.r2).abs()).abs());
        if distance <= needed {
            return Err(OracleError::SampleNearCone { r1: p.r1, t: p.t, distance, needed });
        }
    }
    let field = solve_mode(cfg, r2)?;
    let g = mollifier(cfg, r2);
    let dr = cfg.dr;

    let mut rows = Vec::with_capacity(samples.len());
    for p in samples {
        let region = classify_region(*p, 0.0);
        let numeric = field.value(p.r1, p.t).ok_or(OracleError::OutsideField { r1: p.r1, t: p.t })?;
        let analytic = if region == Region::I {
            0.0
        } else {
            // midpoint rule on the solver's cells over the mollifier support
            let mut acc = 0.0;
            for (j, w) in g.iter().enumerate().filter(|(_, w)| **w != 0.0) {
                let rj = (j as f64 + 0.5) * dr;
                acc += w * rj * dr * mode_kernel(m, KernelPoint::new(p.r1, rj, p.t)?)?;
            }
            acc
        };
        let rel_err = if region == Region::I {
            numeric.abs() / field.slice_peak(p.t)
        } else {
            let scale = analytic.abs().max(0.5 / (p.r1 * p.r2).sqrt());
            (numeric - analytic).abs() / scale
        };
        rows.push(ComparisonRow { point: *p, region, analytic, numeric, rel_err });
    }
    let interior: Vec<f64> = rows.iter().filter(|r| r.region != Region::I).map(|r| r.rel_err).collect();
    let max_rel_err = interior.iter().copied().fold(0.0, f64::max);
    let mean_rel_err = if interior.is_empty() { 0.0 } else { interior.iter().sum::<f64>() / interior.len() as f64 };
    let max_leakage = rows.iter().filter(|r| r.region == Region::I).map(|r| r.rel_err).fold(0.0, f64::max);
    Ok(ComparisonReport { rows, max_rel_err, mean_rel_err, max_leakage, energy_drift: field.energy_drift() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub dr: Vec<f64>,
    /// largest absolute error over the samples, per resolution
    pub errors: Vec<f64>,
    /// `log₂(e_k / e_{k+1})` for successive halvings
    pub orders: Vec<f64>,
}

/// Repeats [`compare_kernel`] at each `dr` with the mollifier width held
/// fixed, so every resolution approximates the same smooth problem.
pub fn convergence_study(
    m: ModeParams,
    base: &FDConfig,
    drs: &[f64],
    samples: &[KernelPoint],
) -> Result<ConvergenceStudy, OracleError> {
    let mut errors = Vec::with_capacity(drs.len());
    for &dr in drs {
        let cfg = FDConfig { dr, dt: base.dt / base.dr * dr, ..*base };
        let report = compare_kernel(m, &cfg, samples)?;
        let worst = report
            .rows
            .iter()
            .filter(|r| r.region != Region::I)
            .map(|r| (r.numeric - r.analytic).abs())
            .fold(0.0, f64::max);
        errors.push(worst);
    }
    let orders = errors.windows(2).map(|e| (e[0] / e[1]).log2()).collect();
    Ok(ConvergenceStudy { dr: drs.to_vec(), errors, orders })
}
