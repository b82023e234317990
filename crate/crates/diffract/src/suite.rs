//! The ten end-to-end checks behind `diffract verify`.
//!
//! Each check measures one number against a limit and carries the other
//! quantities it looked at in `detail`. The quick tier uses coarser grids
//! and smaller samples, and a looser limit for the diffractive constant.

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::energy::symbol::{alpha_threshold, sign_audit, CommutantParams};
use crate::energy::{hardy_check, lambda, norm_equivalence_check, EnergyError, PotentialProfile, TestFunction};
use crate::geodesic::{
    hausdorff_distance, integrate_flow, sec_envelope, FlowError, FlowState, FlowSystem, SphereMetric, Termination,
    ORIGIN_THRESHOLD,
};
use crate::hankel::{eigen_relation_defect, verify_involution, HankelError, RadialField, RadialGrid};
use crate::kernel::{
    cone_limits, default_deltas, diffractive_integral, is_mode_jump_nonzero, verify_lipschitz_hankel, KernelError,
    KernelPoint, ModeParams, Region,
};
use crate::oracle::{compare_kernel, convergence_study, FDConfig, OracleError};
use crate::specfun::{BesselOrder, SpecError};

/// Default seed of every randomized check.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// Region-I FD values relative to the slice peak must stay below this.
pub const LEAKAGE_BOUND: f64 = 1e-3;

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Hankel(#[from] HankelError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Special(#[from] SpecError),
    #[error("no check with id {0}")]
    UnknownCheck(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub id: u8,
    pub name: &'static str,
    pub measured: f64,
    pub limit: f64,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

pub const CHECK_IDS: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

pub fn check_name(id: u8) -> &'static str {
    match id {
        1 => "diffractive-limit",
        2 => "jump-reproduction",
        3 => "free-null-jump",
        4 => "exclusion-condition",
        5 => "lipschitz-hankel",
        6 => "hankel-involution",
        7 => "oracle-cross-validation",
        8 => "flow-lemma",
        9 => "hardy-norm-equivalence",
        10 => "commutant-sign-audit",
        _ => "unknown",
    }
}

struct Outcome {
    measured: f64,
    limit: f64,
    pass: bool,
    detail: String,
}

impl Outcome {
    fn below(measured: f64, limit: f64, detail: String) -> Self {
        Outcome { measured, limit, pass: measured < limit, detail }
    }
}

pub fn run_check(id: u8, tier: Tier) -> Result<CheckLine, SuiteError> {
    let start = Instant::now();
    let out = match id {
        1 => diffractive_limit(tier)?,
        2 => jump_reproduction()?,
        3 => free_null_jump(tier)?,
        4 => exclusion_condition()?,
        5 => lipschitz_hankel_grid()?,
        6 => hankel_checks(tier)?,
        7 => oracle_cross_validation(tier)?,
        8 => flow_lemma()?,
        9 => hardy_and_equivalence(tier)?,
        10 => commutant_audit(tier)?,
        other => return Err(SuiteError::UnknownCheck(other)),
    };
    Ok(CheckLine {
        id,
        name: check_name(id),
        measured: out.measured,
        limit: out.limit,
        pass: out.pass,
        detail: out.detail,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs every check in order; a check that errors is reported as failed
/// with the error text as detail.
pub fn run_all(tier: Tier) -> Vec<CheckLine> {
    CHECK_IDS
        .iter()
        .map(|&id| {
            let start = Instant::now();
            run_check(id, tier).unwrap_or_else(|e| CheckLine {
                id,
                name: check_name(id),
                measured: f64::NAN,
                limit: f64::NAN,
                pass: false,
                detail: e.to_string(),
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

fn diffractive_limit(tier: Tier) -> Result<Outcome, SuiteError> {
    let beta = 1e-4;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for nu in [0.5, 1.2, 3.7] {
        let gap = (diffractive_integral(nu, beta)? - FRAC_PI_2).abs();
        parts.push(format!("nu={nu}:{gap:.3e}"));
        worst = worst.max(gap);
    }
    let limit = match tier {
        Tier::Full => 1e-5,
        Tier::Quick => 1e-3,
    };
    Ok(Outcome::below(worst, limit, parts.join(" ")))
}

fn jump_reproduction() -> Result<Outcome, SuiteError> {
    let m = ModeParams::new(0, 0.25)?;
    let scan = cone_limits(m, 1.0, 2.0, &default_deltas(1.0, 2.0))?;
    let gap = (scan.jump_estimate + 0.5).abs();
    Ok(Outcome::below(gap, 1e-3, format!("jump={:.9}", scan.jump_estimate)))
}

fn free_null_jump(tier: Tier) -> Result<Outcome, SuiteError> {
    let n_max = match tier {
        Tier::Full => 10,
        Tier::Quick => 3,
    };
    let mut worst: f64 = 0.0;
    for n in -n_max..=n_max {
        let scan = cone_limits(ModeParams::new(n, 0.0)?, 1.0, 2.0, &default_deltas(1.0, 2.0))?;
        worst = worst.max(scan.jump_estimate.abs());
    }
    Ok(Outcome::below(worst, 1e-6, format!("|n|<={n_max}")))
}

fn exclusion_condition() -> Result<Outcome, SuiteError> {
    let flagged = is_mode_jump_nonzero(1, 3.0);
    let scan = cone_limits(ModeParams::new(1, 3.0)?, 1.0, 2.0, &default_deltas(1.0, 2.0))?;
    let jump = scan.jump_estimate.abs();
    Ok(Outcome {
        measured: jump,
        limit: 1e-6,
        pass: !flagged && jump < 1e-6,
        detail: format!("jump_nonzero_flag={flagged}"),
    })
}

fn lipschitz_hankel_grid() -> Result<Outcome, SuiteError> {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for nu in [0.5, 1.7, 3.2] {
        for ratio in [0.5, 1.0, 2.0] {
            for t in [0.5, 1.5, 3.0] {
                let lh = verify_lipschitz_hankel(nu, ratio, 1.0, t)?;
                worst = worst.max(lh.residual);
                count += 1;
            }
        }
    }
    Ok(Outcome::below(worst, 1e-6, format!("points={count}")))
}

fn gaussian_field(h: f64) -> Result<RadialField, HankelError> {
    let grid = RadialGrid::graded(h, 12.0)?;
    RadialField::sample(&grid, |r| (-0.5 * r * r).exp())
}

fn bump(r: f64) -> f64 {
    if r <= 1.0 || r >= 4.0 {
        0.0
    } else {
        let x = (2.0 * r - 5.0) / 3.0;
        (-1.0 / (1.0 - x * x)).exp()
    }
}

fn hankel_checks(tier: Tier) -> Result<Outcome, SuiteError> {
    let (reference, refined) = match tier {
        Tier::Full => (0.05, 0.025),
        Tier::Quick => (0.1, 0.05),
    };
    let order = BesselOrder::new(0.0)?;
    let coarse = verify_involution(&gaussian_field(reference)?, order)?;
    let fine = verify_involution(&gaussian_field(refined)?, order)?;
    let grid = RadialGrid::uniform(1e-2, 6.0)?;
    let g = RadialField::sample(&grid, bump)?;
    let lambdas = RadialGrid::uniform(0.25, 4.0)?;
    let mut eigen: f64 = 0.0;
    for nu in [0.0, 0.5, 2.2] {
        eigen = eigen.max(eigen_relation_defect(&g, BesselOrder::new(nu)?, &lambdas)?);
    }
    let limit = match tier {
        Tier::Full => 1e-3,
        Tier::Quick => 1e-2,
    };
    Ok(Outcome {
        measured: coarse,
        limit,
        pass: coarse < limit && fine < coarse && eigen < 1e-2,
        detail: format!("h={reference}:{coarse:.3e} h={refined}:{fine:.3e} eigen={eigen:.3e}"),
    })
}

/// Interior sample points for the oracle comparison with `r₂ = 1`: 25 in
/// regions II and III and 3 in region I, all at least 0.15 from a cone.
pub fn oracle_samples() -> Vec<KernelPoint> {
    let table: [(f64, &[f64]); 5] = [
        (0.5, &[0.2, 0.3, 1.8, 0.7, 1.0, 1.3]),
        (1.0, &[0.3, 0.7, 1.0, 1.5, 1.8]),
        (1.5, &[0.2, 0.35, 0.7, 1.0, 1.5, 2.0, 2.3]),
        (2.0, &[0.4, 0.7, 1.5, 2.5]),
        (2.5, &[0.3, 0.8, 1.2, 1.8, 2.5, 3.2]),
    ];
    table.iter().flat_map(|(t, r1s)| r1s.iter().map(move |&r1| KernelPoint { r1, r2: 1.0, t: *t })).collect()
}

fn oracle_cross_validation(tier: Tier) -> Result<Outcome, SuiteError> {
    let m = ModeParams::new(0, 0.25)?;
    let dr = match tier {
        Tier::Full => 1e-3,
        Tier::Quick => 2e-3,
    };
    let cfg = FDConfig::new(4.0, dr, 2.6, m.nu)?.with_width(0.02)?;
    let report = compare_kernel(m, &cfg, &oracle_samples())?;
    let interior = report.rows.iter().filter(|r| r.region != Region::I).count();
    let drs: &[f64] = match tier {
        Tier::Full => &[4e-3, 2e-3, 1e-3],
        Tier::Quick => &[8e-3, 4e-3, 2e-3],
    };
    let base = FDConfig::new(4.0, drs[0], 2.0, m.nu)?.with_width(0.04)?;
    let points = [(0.7, 1.0), (1.5, 1.0), (2.0, 1.5), (1.0, 1.8)].map(|(r1, t)| KernelPoint { r1, r2: 1.0, t });
    let study = convergence_study(m, &base, drs, &points)?;
    let orders_ok = study.orders.iter().all(|o| (o - 2.0).abs() <= 0.3);
    let orders: Vec<String> = study.orders.iter().map(|o| format!("{o:.3}")).collect();
    Ok(Outcome {
        measured: report.max_rel_err,
        limit: 0.02,
        pass: interior >= 20 && report.max_rel_err < 0.02 && report.max_leakage < LEAKAGE_BOUND && orders_ok,
        detail: format!(
            "interior={interior} leakage={:.3e} drift={:.3e} orders={}",
            report.max_leakage,
            report.energy_drift,
            orders.join("/")
        ),
    })
}

fn flow_lemma() -> Result<Outcome, SuiteError> {
    let g = SphereMetric::Circle;
    let radial = integrate_flow(FlowState::circle(0.0, 1.0, 0.0, 1.0, 0.8, 0.0), g, 3.0, 1e-4, FlowSystem::Full)?;
    let strikes = radial.termination == Termination::OriginReached && radial.last().r < ORIGIN_THRESHOLD;

    let y0 = FlowState::circle(0.0, 2.0, 0.0, 1.0, 3f64.sqrt(), 1.0);
    let envelope = sec_envelope(&y0, g);
    let full = integrate_flow(y0, g, 4.0, 1e-4, FlowSystem::Full)?;
    let rescaled = integrate_flow(y0, g, 2.0, 1e-4, FlowSystem::Rescaled)?;
    let envelope_gap = (full.min_r() - envelope).abs();
    let sigma = full.sigma_drift(0.0).max(rescaled.sigma_drift(0.0));
    let tau = full.tau_drift().max(rescaled.tau_drift());
    let hausdorff = hausdorff_distance(&full, &rescaled, 0.1);
    Ok(Outcome {
        measured: hausdorff,
        limit: 1e-6,
        pass: strikes && envelope_gap < 1e-6 && sigma < 1e-8 && tau < 1e-8 && hausdorff < 1e-6,
        detail: format!("origin={strikes} envelope_gap={envelope_gap:.3e} sigma_drift={sigma:.3e} tau_drift={tau:.3e}"),
    })
}

/// Potentials used by the norm-equivalence suite in dimension `n`.
pub fn suite_potentials(n: u32) -> [PotentialProfile; 3] {
    [
        PotentialProfile::constant(1.0),
        PotentialProfile::constant(-lambda(n).powi(2) / 2.0),
        PotentialProfile { constant: 0.2, cos1: 0.3, gaussian_cos2: -0.2 },
    ]
}

/// `count` random zonal test functions from `seed`.
pub fn random_functions(seed: u64, count: usize) -> Vec<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| TestFunction::random(&mut rng)).collect()
}

fn hardy_and_equivalence(tier: Tier) -> Result<Outcome, SuiteError> {
    let count = match tier {
        Tier::Full => 20,
        Tier::Quick => 5,
    };
    let mut violations = 0;
    let mut checks = 0;
    for n in 3..=5 {
        for u in random_functions(DEFAULT_SEED, count) {
            checks += 1;
            if !hardy_check(&u, n)?.holds() {
                violations += 1;
            }
            for f in suite_potentials(n) {
                let e = norm_equivalence_check(&u, &f, n)?;
                checks += 2;
                violations += usize::from(!e.lower_ok) + usize::from(!e.upper_ok);
            }
        }
    }
    Ok(Outcome { measured: violations as f64, limit: 0.0, pass: violations == 0, detail: format!("checks={checks}") })
}

/// `C = 1, δ = 0.1, t₀ = 0, τ₀ = 1`; α is set by the audit.
pub fn audit_params() -> CommutantParams {
    CommutantParams { c: 1.0, delta: 0.1, alpha: 1.0, t0: 0.0, tau0: 1.0 }
}

/// Halton index where the audit starts, past every calibration point.
pub const AUDIT_START: u64 = 100_000;

fn commutant_audit(tier: Tier) -> Result<Outcome, SuiteError> {
    let (calibration, target) = match tier {
        Tier::Full => (2000, 10_000),
        Tier::Quick => (500, 2000),
    };
    let p = audit_params();
    let star = alpha_threshold(&p, calibration)?;
    let report = sign_audit(&p.with_alpha(1.25 * star), AUDIT_START, target, Some(1e-5))?;
    let gap = report.max_fd_gap.unwrap_or(f64::INFINITY);
    Ok(Outcome {
        measured: report.max_value,
        limit: 1e-12,
        pass: report.violations == 0 && report.audited >= target && gap < 1e-6,
        detail: format!(
            "alpha_star={star:.6} alpha={:.6} audited={} samples={} fd_gap={gap:.3e}",
            report.alpha, report.audited, report.samples
        ),
    })
}
