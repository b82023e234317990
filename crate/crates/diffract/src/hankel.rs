//! Direct-quadrature Hankel transform on radial grids, the radial operator
//! L_μ = ∂²_r + r⁻¹∂_r - μ²/r², and the involution / eigen-relation checks.

use crate::quadrature::gauss_legendre;
use crate::specfun::{bessel_j, BesselOrder, SpecError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HankelError {
    #[error("grid must be strictly increasing with a positive first point")]
    BadGrid,
    #[error("field has {values} values for {points} grid points")]
    LengthMismatch { values: usize, points: usize },
    #[error("non-finite field value at r = {0}")]
    NonFinite(f64),
    #[error("tail too fat: |g| r over the last decade is {ratio:e} of its peak")]
    TailTooFat { ratio: f64 },
    #[error("grid too coarse: {0} points, need at least 16")]
    GridTooCoarse(usize),
    #[error(transparent)]
    Special(#[from] SpecError),
}

/// Measure attached to a radial grid. Only `r dr` is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    RDr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    points: Vec<f64>,
    pub measure: Measure,
}

impl RadialGrid {
    pub fn new(points: Vec<f64>) -> Result<Self, HankelError> {
        let ok = !points.is_empty()
            && points[0] > 0.0
            && points.iter().all(|r| r.is_finite())
            && points.windows(2).all(|w| w[1] > w[0]);
        if !ok {
            return Err(HankelError::BadGrid);
        }
        Ok(RadialGrid { points, measure: Measure::RDr })
    }

    /// `dr, 2dr, ..., r_max`.
    pub fn uniform(dr: f64, r_max: f64) -> Result<Self, HankelError> {
        if !(dr > 0.0 && r_max >= dr) {
            return Err(HankelError::BadGrid);
        }
        let n = (r_max / dr).round() as usize;
        Self::new((1..=n).map(|k| k as f64 * dr).collect())
    }

    /// Geometric spacing from `h / 16` growing by 1.05 per step until it
    /// reaches `h`, then uniform spacing `h` out to `r_max`.
    pub fn graded(h: f64, r_max: f64) -> Result<Self, HankelError> {
        if !(h > 0.0 && r_max > 2.0 * h) {
            return Err(HankelError::BadGrid);
        }
        let mut step = h / 16.0;
        let mut r = step;
        let mut pts = vec![r];
        while step < h {
            step = (step * 1.05).min(h);
            r += step;
            pts.push(r);
        }
        let steps = ((r_max - r) / h).ceil().max(1.0);
        let uniform = (r_max - r) / steps;
        for k in 1..steps as usize {
            pts.push(r + k as f64 * uniform);
        }
        pts.push(r_max);
        Self::new(pts)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.points.last().expect("grid is non-empty")
    }

    /// Trapezoid weights for `∫ · r dr` over [points[0], r_max].
    fn trapezoid_weights(&self) -> Vec<f64> {
        let p = &self.points;
        let n = p.len();
        let mut w = vec![0.0; n];
        for i in 0..n.saturating_sub(1) {
            let h = p[i + 1] - p[i];
            w[i] += 0.5 * h * p[i];
            w[i + 1] += 0.5 * h * p[i + 1];
        }
        w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self, HankelError> {
        if values.len() != grid.len() {
            return Err(HankelError::LengthMismatch { values: values.len(), points: grid.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(HankelError::NonFinite(grid.points[i]));
        }
        Ok(RadialField { grid, values })
    }

    pub fn sample(grid: &RadialGrid, g: impl Fn(f64) -> f64) -> Result<Self, HankelError> {
        let values = grid.points.iter().map(|&r| g(r)).collect();
        Self::new(grid.clone(), values)
    }

    /// L²(r dr) norm by the trapezoid rule on the grid.
    pub fn norm(&self) -> f64 {
        let w = self.grid.trapezoid_weights();
        w.iter().zip(&self.values).map(|(w, v)| w * v * v).sum::<f64>().sqrt()
    }

    /// Cubic through the four samples around the interval containing `r`.
    fn interpolate(&self, i: usize, r: f64) -> f64 {
        let p = &self.grid.points;
        let n = p.len();
        if n < 4 {
            return self.values[i.min(n - 1)];
        }
        let lo = i.saturating_sub(1).min(n - 4);
        let mut acc = 0.0;
        for a in lo..lo + 4 {
            let mut l = 1.0;
            for b in lo..lo + 4 {
                if a != b {
                    l *= (r - p[b]) / (p[a] - p[b]);
                }
            }
            acc += l * self.values[a];
        }
        acc
    }
}

const NODES_PER_INTERVAL: usize = 6;

/// Quadrature nodes `r_k` and weights `w_k g(r_k) r_k` for
/// `∫_0^{r_max} g(r) (·) r dr` over the piecewise cubic interpolant.
fn weighted_nodes(field: &RadialField) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(NODES_PER_INTERVAL);
    let p = &field.grid.points;
    let mut rs = Vec::with_capacity(p.len() * NODES_PER_INTERVAL);
    let mut ws = Vec::with_capacity(rs.capacity());
    let mut lo = 0.0;
    for (i, &hi) in p.iter().enumerate() {
        let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        // the first interval [0, r_0] extrapolates the first cubic
        let cell = i.saturating_sub(1);
        for k in 0..NODES_PER_INTERVAL {
            let r = c + h * x[k];
            rs.push(r);
            ws.push(w[k] * h * field.interpolate(cell, r) * r);
        }
        lo = hi;
    }
    (rs, ws)
}

fn check_tail(field: &RadialField) -> Result<(), HankelError> {
    let p = &field.grid.points;
    let peak = p.iter().zip(&field.values).map(|(r, v)| (v * r).abs()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(());
    }
    let start = 0.9 * field.grid.r_max();
    let tail =
        p.iter().zip(&field.values).filter(|(r, _)| **r >= start).map(|(r, v)| (v * r).abs()).fold(0.0, f64::max);
    let ratio = tail / peak;
    if ratio > 1e-6 {
        return Err(HankelError::TailTooFat { ratio });
    }
    Ok(())
}

/// `H_ν g(λ) = ∫_0^{r_max} g(r) J_ν(λr) r dr` at every λ of `out_grid`.
pub fn hankel_transform(
    field: &RadialField,
    order: BesselOrder,
    out_grid: &RadialGrid,
) -> Result<RadialField, HankelError> {
    check_tail(field)?;
    let (rs, ws) = weighted_nodes(field);
    let mut out = Vec::with_capacity(out_grid.len());
    for &lam in &out_grid.points {
        let mut acc = 0.0;
        for (r, w) in rs.iter().zip(&ws) {
            if *w != 0.0 {
                acc += w * bessel_j(order, lam * r)?;
            }
        }
        out.push(acc);
    }
    RadialField::new(out_grid.clone(), out)
}

/// Result of [`apply_radial_operator`]: the first and last points use
/// one-sided stencils and are listed in `one_sided`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorOutput {
    pub field: RadialField,
    pub one_sided: Vec<usize>,
}

/// Second-order finite-difference `L_μ g` on the field's grid.
///
/// The stencil acts on `v = r^{-μ} g`, using `L_μ g = r^μ (v'' + (2μ+1) v'/r)`,
/// so fields behaving like `r^μ` at the origin are differentiated without
/// the boundary layer a direct stencil leaves there.
pub fn apply_radial_operator(field: &RadialField, mu: f64) -> Result<OperatorOutput, HankelError> {
    let p = &field.grid.points;
    let n = p.len();
    if n < 16 {
        return Err(HankelError::GridTooCoarse(n));
    }
    let v: Vec<f64> = p.iter().zip(&field.values).map(|(r, g)| g * r.powf(-mu)).collect();
    // derivatives of the quadratic through points (i-1, i, i+1), taken at r
    let quad = |i: usize, r: f64| {
        let (x0, x1, x2) = (p[i - 1], p[i], p[i + 1]);
        let (y0, y1, y2) = (v[i - 1], v[i], v[i + 1]);
        let d0 = (x0 - x1) * (x0 - x2);
        let d1 = (x1 - x0) * (x1 - x2);
        let d2 = (x2 - x0) * (x2 - x1);
        let second = 2.0 * (y0 / d0 + y1 / d1 + y2 / d2);
        let first = y0 * (2.0 * r - x1 - x2) / d0 + y1 * (2.0 * r - x0 - x2) / d1 + y2 * (2.0 * r - x0 - x1) / d2;
        (first, second)
    };
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let r = p[i];
        let (d1, d2) = quad(i.clamp(1, n - 2), r);
        out.push(r.powf(mu) * (d2 + (2.0 * mu + 1.0) * d1 / r));
    }
    Ok(OperatorOutput { field: RadialField::new(field.grid.clone(), out)?, one_sided: vec![0, n - 1] })
}

/// Relative L²(r dr) defect of `H_ν(H_ν g) - g`, with the λ grid taken
/// equal to the field's grid.
pub fn verify_involution(field: &RadialField, order: BesselOrder) -> Result<f64, HankelError> {
    let once = hankel_transform(field, order, &field.grid)?;
    let twice = hankel_transform(&once, order, &field.grid)?;
    let norm = field.norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let diff: Vec<f64> = twice.values.iter().zip(&field.values).map(|(a, b)| a - b).collect();
    Ok(RadialField::new(field.grid.clone(), diff)?.norm() / norm)
}

/// Relative defect `‖H(L_ν g) + λ² H g‖ / ‖λ² H g‖` over `lambdas`.
pub fn eigen_relation_defect(
    field: &RadialField,
    order: BesselOrder,
    lambdas: &RadialGrid,
) -> Result<f64, HankelError> {
    let lg = apply_radial_operator(field, order.nu())?.field;
    let h_lg = hankel_transform(&lg, order, lambdas)?;
    let h_g = hankel_transform(field, order, lambdas)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for ((lam, a), b) in lambdas.points.iter().zip(&h_lg.values).zip(&h_g.values) {
        let target = lam * lam * b;
        num += (a + target).powi(2);
        den += target * target;
    }
    Ok((num / den).sqrt())
}
