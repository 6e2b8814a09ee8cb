//! Time integration of the Gauss curvature flow on support functions.
//!
//! * un-normalized: `u_t = −K = −1/det A`, bodies shrink to a point;
//! * normalized: `u_t = u − K`, volume is conserved.
//!
//! Steps are explicit RK4 with the parabolic restriction
//! `dt = s · h_min² / max(K · tr A⁻¹)`. On S² each right-hand side is
//! projected onto the resolved harmonics so iterates stay band-limited.
//!
//! The normalized flow is neutral only about its contracting point: a
//! solution described from another origin drifts off as `u − eᵗ⟨c, x⟩`.
//! Runs therefore re-center at the entropy point whenever its distance from
//! the origin exceeds [`FlowConfig::recenter_tol`]; each re-centering starts
//! a new epoch. Origin-dependent diagnostics (Firey entropy, dissipation
//! identity) are only compared within an epoch.

mod monitors;

use serde::{Deserialize, Serialize};

use crate::body::{translate, volume, ConvexBody};
use crate::entropy::{chow_entropy, entropy_point, firey_entropy};
use crate::error::{GcfError, Result};
use crate::sphere::unit_ball_volume;

pub use monitors::{harnack_monitor, monitor_bounds, HarnackReport, MonitorEntry, MonitorReport};

/// Smallest step before a run is declared stiff.
pub const DT_UNDERFLOW: f64 = 1e-12;
/// Default distance of the entropy point that triggers re-centering.
pub const DEFAULT_RECENTER_TOL: f64 = 1e-8;
/// Relative volume mismatch tolerated at the start of a normalized run.
pub const START_VOLUME_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowMode {
    Normalized,
    Unnormalized,
}

/// Per-row runtime checks whose failures are counted in [`TraceRow::violations`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonitorSet {
    /// `max |∇̄u| ≤ max u`.
    pub gradient: bool,
    /// `10⁻³ ≤ u ≤ 10³`.
    pub support_band: bool,
    /// Lower bound on `u/K` (normalized mode, `n ≥ 2`, `t ≥ 0.1`).
    pub u_over_k: bool,
    /// Newton's inequality for `σ_k(A)` (`n ≥ 2`).
    pub newton: bool,
}

impl MonitorSet {
    pub fn all() -> Self {
        MonitorSet { gradient: true, support_band: true, u_over_k: true, newton: true }
    }

    pub fn none() -> Self {
        MonitorSet { gradient: false, support_band: false, u_over_k: false, newton: false }
    }
}

impl Default for MonitorSet {
    fn default() -> Self {
        MonitorSet::all()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub mode: FlowMode,
    pub t_end: f64,
    pub dt_safety: f64,
    /// Rescale after every accepted step so that `V = V(B(1))` (normalized mode only).
    pub volume_projection: bool,
    pub monitors: MonitorSet,
    /// Record a trace row every this many accepted steps.
    pub output_stride: usize,
    /// Stop once `‖u det A − 1‖∞` drops below this value (normalized mode only).
    pub soliton_tol: Option<f64>,
    /// Use this step instead of the adaptive one (still halved on rejection).
    pub fixed_dt: Option<f64>,
    /// Re-center at the entropy point when it is farther than this from the origin.
    pub recenter_tol: Option<f64>,
    /// Keep per-node `K` and `u` for every recorded row.
    pub record_fields: bool,
}

impl FlowConfig {
    pub fn normalized(t_end: f64) -> Self {
        FlowConfig {
            mode: FlowMode::Normalized,
            t_end,
            dt_safety: 0.25,
            volume_projection: true,
            monitors: MonitorSet::all(),
            output_stride: 20,
            soliton_tol: Some(1e-6),
            fixed_dt: None,
            recenter_tol: Some(DEFAULT_RECENTER_TOL),
            record_fields: false,
        }
    }

    pub fn unnormalized(t_end: f64) -> Self {
        FlowConfig {
            mode: FlowMode::Unnormalized,
            volume_projection: false,
            soliton_tol: None,
            recenter_tol: None,
            ..FlowConfig::normalized(t_end)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(GcfError::param(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return Err(GcfError::param(format!("dt_safety must lie in (0, 1], got {}", self.dt_safety)));
        }
        if self.output_stride == 0 {
            return Err(GcfError::param("output_stride must be at least 1"));
        }
        if let Some(dt) = self.fixed_dt {
            if !(dt > 0.0) {
                return Err(GcfError::param(format!("fixed_dt must be positive, got {dt}")));
            }
        }
        if let Some(tol) = self.soliton_tol {
            if !(tol > 0.0) {
                return Err(GcfError::param(format!("soliton_tol must be positive, got {tol}")));
            }
        }
        if let Some(tol) = self.recenter_tol {
            if !(tol > 0.0) {
                return Err(GcfError::param(format!("recenter_tol must be positive, got {tol}")));
            }
        }
        Ok(())
    }
}

/// One recorded time. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    /// Last accepted step (the first row holds the first planned step).
    pub dt: f64,
    pub volume: f64,
    pub entropy: f64,
    pub firey_entropy: f64,
    pub chow_entropy: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub min_k: f64,
    pub max_k: f64,
    pub max_trace_a: f64,
    pub soliton_residual: f64,
    pub entropy_point_norm: f64,
    /// `⨏(√(K/u) − √(u/K))²`.
    pub dissipation: f64,
    pub violations: usize,
    pub epoch: usize,
    pub max_grad: f64,
    pub min_u_over_k: f64,
    /// `min_x` of `σ_{n−1}/n − (σ₁/n)^{1/(n−1)} σ_n^{(n−2)/(n−1)}` for `σ_k(A)`; 0 when `n = 1`.
    pub newton_slack: f64,
}

/// Per-node data kept when [`FlowConfig::record_fields`] is set.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeFields {
    pub t: f64,
    pub k: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct FlowTrace {
    pub dim: usize,
    pub mode: FlowMode,
    pub rows: Vec<TraceRow>,
    pub fields: Vec<NodeFields>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    /// Reached `t_end`.
    TimeLimit,
    /// Soliton residual fell below the tolerance.
    Soliton,
    /// Step size underflow; the returned body is the last accepted one.
    Stiff(GcfError),
}

#[derive(Debug, Clone)]
pub struct FlowRun {
    pub trace: FlowTrace,
    pub body: ConvexBody,
    pub termination: Termination,
    pub steps: usize,
    pub rejected_steps: usize,
    /// Origin, in the frame of the initial body, about which the run would
    /// have needed no re-centering (exact for a converged run up to the
    /// accuracy of the last re-centering).
    pub contracting_point: Vec<f64>,
}

impl FlowRun {
    pub fn final_time(&self) -> f64 {
        self.trace.rows.last().map_or(0.0, |r| r.t)
    }

    /// Stiffness becomes an error; the other terminations succeed.
    pub fn into_result(self) -> Result<FlowRun> {
        match &self.termination {
            Termination::Stiff(e) => Err(e.clone()),
            _ => Ok(self),
        }
    }
}

/// `‖u det A − 1‖∞`.
pub fn soliton_residual_of(body: &ConvexBody) -> f64 {
    let det = body.curvature().det_a.values();
    body.support().iter().zip(det).map(|(u, d)| (u * d - 1.0).abs()).fold(0.0, f64::max)
}

/// Parabolic step limit `s · h_min² / max(K · tr A⁻¹)`.
pub fn stable_dt(body: &ConvexBody, safety: f64) -> f64 {
    let c = body.curvature();
    let h = body.grid().h_min();
    let stiff = c.k.values().iter().zip(c.h.values()).map(|(k, tr)| k * tr).fold(0.0, f64::max);
    safety * h * h / stiff
}

fn rhs_from_det(body_grid: &crate::sphere::SphereGrid, u: &[f64], det: &[f64], mode: FlowMode) -> Vec<f64> {
    let r: Vec<f64> = u
        .iter()
        .zip(det)
        .map(|(u, d)| match mode {
            FlowMode::Normalized => u - 1.0 / d,
            FlowMode::Unnormalized => -1.0 / d,
        })
        .collect();
    if body_grid.dim() == 2 {
        body_grid.project(&r)
    } else {
        r
    }
}

fn stage_rhs(grid: &crate::sphere::SphereGrid, u: &[f64], mode: FlowMode) -> Result<Vec<f64>> {
    let n = grid.dim();
    let d = grid.derivatives(u);
    let mut det = Vec::with_capacity(u.len());
    for (i, h) in d.hess.iter().enumerate() {
        let a = h.add_identity(d.value[i]);
        let dt = a.det(n);
        if !(dt > 0.0 && a.eigenvalues(n)[0] > 0.0) {
            return Err(GcfError::Convexity { node: i, eigenvalue: a.eigenvalues(n)[0] });
        }
        det.push(dt);
    }
    Ok(rhs_from_det(grid, u, &det, mode))
}

/// One classical RK4 step. Any loss of positivity or convexity, in an
/// intermediate stage or in the result, rejects the step.
pub fn step(body: &ConvexBody, dt: f64, mode: FlowMode) -> Result<ConvexBody> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(GcfError::param(format!("dt must be positive, got {dt}")));
    }
    let reject = |e: GcfError| GcfError::StepRejected(Box::new(e));
    let grid = body.grid();
    let u = body.support();
    let axpy = |a: f64, k: &[f64]| -> Vec<f64> { u.iter().zip(k).map(|(u, k)| u + a * k).collect() };
    let k1 = rhs_from_det(grid, u, body.curvature().det_a.values(), mode);
    let k2 = stage_rhs(grid, &axpy(0.5 * dt, &k1), mode).map_err(reject)?;
    let k3 = stage_rhs(grid, &axpy(0.5 * dt, &k2), mode).map_err(reject)?;
    let k4 = stage_rhs(grid, &axpy(dt, &k3), mode).map_err(reject)?;
    let next: Vec<f64> = (0..u.len())
        .map(|i| u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    ConvexBody::new(grid.clone(), next).map_err(reject)
}

fn measure(
    body: &ConvexBody,
    t: f64,
    dt: f64,
    epoch: usize,
    config: &FlowConfig,
) -> Result<(TraceRow, Vec<f64>)> {
    let n = body.dim();
    let grid = body.grid();
    let c = body.curvature();
    let u = body.support();
    let k = c.k.values();
    let ep = entropy_point(body)?;
    let dissipation = grid.mean_by(|i| {
        let r = (k[i] / u[i]).sqrt();
        (r - 1.0 / r).powi(2)
    });
    let tr_a = c.sigma_a[0].values();
    let newton_slack = if n == 1 {
        0.0
    } else {
        let nf = n as f64;
        let s1 = c.sigma_a[0].values();
        let sn = c.sigma_a[n - 1].values();
        let snm1 = c.sigma_a[n - 2].values();
        (0..u.len())
            .map(|i| snm1[i] / nf - (s1[i] / nf).powf(1.0 / (nf - 1.0)) * sn[i].powf((nf - 2.0) / (nf - 1.0)))
            .fold(f64::INFINITY, f64::min)
    };
    let fmax = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let fmin = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let mut row = TraceRow {
        t,
        dt,
        volume: volume(body),
        entropy: ep.value,
        firey_entropy: firey_entropy(body),
        chow_entropy: chow_entropy(body),
        min_u: body.min_support(),
        max_u: body.max_support(),
        min_k: fmin(k),
        max_k: fmax(k),
        max_trace_a: fmax(tr_a),
        soliton_residual: soliton_residual_of(body),
        entropy_point_norm: ep.z.iter().map(|v| v * v).sum::<f64>().sqrt(),
        dissipation,
        violations: 0,
        epoch,
        max_grad: c.grad_norm.max(),
        min_u_over_k: (0..u.len()).map(|i| u[i] / k[i]).fold(f64::INFINITY, f64::min),
        newton_slack,
    };
    row.violations = monitors::row_violations(&row, n, config);
    Ok((row, ep.z))
}

/// Integrate from `body` according to `config`.
pub fn run(body: &ConvexBody, config: &FlowConfig) -> Result<FlowRun> {
    config.validate()?;
    let n = body.dim();
    let normalized = config.mode == FlowMode::Normalized;
    let target = unit_ball_volume(n);
    if normalized && ((volume(body) - target) / target).abs() > START_VOLUME_TOL {
        return Err(GcfError::param(format!(
            "normalized runs need V = V(B(1)) = {target}, got {}",
            volume(body)
        )));
    }
    let soliton_tol = if normalized { config.soliton_tol } else { None };
    let recenter_tol = if normalized { config.recenter_tol } else { None };
    let plan_dt = |b: &ConvexBody| config.fixed_dt.unwrap_or_else(|| stable_dt(b, config.dt_safety));

    let mut body = body.clone();
    let mut t = 0.0;
    let mut epoch = 0;
    let mut steps = 0;
    let mut rejected = 0;
    let mut shift = vec![0.0; n + 1];
    let mut trace = FlowTrace { dim: n, mode: config.mode, rows: Vec::new(), fields: Vec::new() };

    let mut record = |body: &mut ConvexBody, t: f64, dt: f64, epoch: &mut usize, trace: &mut FlowTrace| -> Result<()> {
        let (row, z) = measure(body, t, dt, *epoch, config)?;
        let z_norm = row.entropy_point_norm;
        if config.record_fields {
            trace.fields.push(NodeFields { t, k: body.curvature().k.values().to_vec(), u: body.support().to_vec() });
        }
        trace.rows.push(row);
        if let Some(tol) = recenter_tol {
            if z_norm > tol {
                *body = translate(body, &z)?;
                let decay = (-t).exp();
                for (s, zi) in shift.iter_mut().zip(&z) {
                    *s += decay * zi;
                }
                *epoch += 1;
            }
        }
        Ok(())
    };

    let dt0 = plan_dt(&body);
    record(&mut body, t, dt0, &mut epoch, &mut trace)?;
    let termination = loop {
        if let Some(tol) = soliton_tol {
            if soliton_residual_of(&body) < tol {
                break Termination::Soliton;
            }
        }
        let remaining = config.t_end - t;
        if remaining <= 1e-12 * config.t_end.max(1.0) {
            break Termination::TimeLimit;
        }
        let mut dt = plan_dt(&body).min(remaining);
        let next = loop {
            match step(&body, dt, config.mode) {
                Ok(b) => break Some(b),
                Err(_) => {
                    rejected += 1;
                    dt *= 0.5;
                    if dt < DT_UNDERFLOW {
                        break None;
                    }
                }
            }
        };
        let Some(mut next) = next else {
            let row_t = trace.rows.last().map_or(-1.0, |r| r.t);
            if row_t < t {
                record(&mut body, t, dt, &mut epoch, &mut trace)?;
            }
            break Termination::Stiff(GcfError::Stiffness {
                t,
                dt,
                reason: format!(
                    "step rejected down to dt < {DT_UNDERFLOW:e}; min eigenvalue of A {:.3e}",
                    body.curvature().min_eig_a
                ),
            });
        };
        if normalized && config.volume_projection {
            let lambda = (target / volume(&next)).powf(1.0 / (n as f64 + 1.0));
            next = next.scale(lambda)?;
        }
        body = next;
        t = if dt == remaining { config.t_end } else { t + dt };
        steps += 1;
        let finished = config.t_end - t <= 1e-12 * config.t_end.max(1.0)
            || soliton_tol.is_some_and(|tol| soliton_residual_of(&body) < tol);
        if steps % config.output_stride == 0 || finished {
            record(&mut body, t, dt, &mut epoch, &mut trace)?;
        }
    };
    Ok(FlowRun { trace, body, termination, steps, rejected_steps: rejected, contracting_point: shift })
}

/// `(t, |dE_F/dt + D|)` at every interior row, with `dE_F/dt` from the
/// three-point (non-uniform) centered difference. Only triples of rows from
/// one epoch are used.
pub fn dissipation_identity_residuals(trace: &FlowTrace) -> Result<Vec<(f64, f64)>> {
    if trace.mode != FlowMode::Normalized {
        return Err(GcfError::param("the dissipation identity holds for the normalized flow"));
    }
    let mut out = Vec::new();
    for w in trace.rows.windows(3) {
        let (a, b, c) = (&w[0], &w[1], &w[2]);
        if a.epoch != b.epoch || b.epoch != c.epoch {
            continue;
        }
        let h1 = b.t - a.t;
        let h2 = c.t - b.t;
        if !(h1 > 0.0 && h2 > 0.0) {
            continue;
        }
        let deriv = -h2 / (h1 * (h1 + h2)) * a.firey_entropy
            + (h2 - h1) / (h1 * h2) * b.firey_entropy
            + h1 / (h2 * (h1 + h2)) * c.firey_entropy;
        out.push((b.t, (deriv + b.dissipation).abs()));
    }
    if out.is_empty() {
        return Err(GcfError::InsufficientData { needed: 3, have: trace.rows.len() });
    }
    Ok(out)
}

/// Largest entry of [`dissipation_identity_residuals`].
pub fn dissipation_identity_residual(trace: &FlowTrace) -> Result<f64> {
    Ok(dissipation_identity_residuals(trace)?.iter().map(|r| r.1).fold(0.0, f64::max))
}
