//! Runtime checks of a priori bounds along recorded flow traces.
//!
//! Violations are data: every monitor reports its worst margin and whether
//! it applies, and nothing here returns an error for a failed bound.

use serde::Serialize;

use super::{FlowConfig, FlowMode, FlowTrace, TraceRow};

/// Slack for the pointwise gradient estimate `|∇̄u| ≤ max u`.
pub const GRADIENT_SLACK: f64 = 1e-8;
/// Band asserted for the support function along corpus runs.
pub const SUPPORT_BAND: (f64, f64) = (1e-3, 1e3);
/// The `u/K` lower bound is checked from this normalized time on.
pub const U_OVER_K_START: f64 = 0.1;
/// The curvature lower bound is checked from this normalized time on.
pub const K_LOWER_START: f64 = 1.0;
pub const NEWTON_SLACK: f64 = 1e-9;
pub const ENTROPY_MONOTONE_SLACK: f64 = 1e-9;
pub const DISSIPATION_SLACK: f64 = 1e-6;
/// Relative slack for the Harnack monotonicity of `K t^{n/(n+1)}`.
pub const HARNACK_SLACK: f64 = 1e-6;
/// Below this `E − E_F` the drift ratio is dominated by rounding.
const DRIFT_FLOOR: f64 = 1e-12;

/// Lower bound on `u/K` along the normalized flow about its contracting point.
pub fn u_over_k_bound(dim: usize, t: f64) -> f64 {
    let n = dim as f64;
    (1.0 - (-(n - 1.0) * t).exp()).powf(n / (n + 1.0)) / (n + 1.0)
}

pub(super) fn row_violations(row: &TraceRow, dim: usize, config: &FlowConfig) -> usize {
    let m = &config.monitors;
    let mut count = 0;
    if m.gradient && row.max_grad > row.max_u + GRADIENT_SLACK {
        count += 1;
    }
    if m.support_band && !(row.min_u >= SUPPORT_BAND.0 && row.max_u <= SUPPORT_BAND.1) {
        count += 1;
    }
    if m.u_over_k
        && config.mode == FlowMode::Normalized
        && dim >= 2
        && row.t >= U_OVER_K_START
        && row.min_u_over_k < u_over_k_bound(dim, row.t)
    {
        count += 1;
    }
    if m.newton && dim >= 2 && row.newton_slack < -NEWTON_SLACK {
        count += 1;
    }
    count
}

#[derive(Debug, Clone, Serialize)]
pub struct MonitorEntry {
    pub name: &'static str,
    pub applicable: bool,
    pub pass: bool,
    /// Smallest margin `bound side − measured side`; negative means violated.
    pub worst_margin: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonitorReport {
    pub entries: Vec<MonitorEntry>,
    /// Fitted `C` in `|e(t)|² ≤ C (E(t) − E_F(t))`.
    pub drift_constant: f64,
}

impl MonitorReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| !e.applicable || e.pass)
    }

    pub fn entry(&self, name: &str) -> Option<&MonitorEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

fn entry(name: &'static str, worst_margin: f64, detail: String) -> MonitorEntry {
    MonitorEntry { name, applicable: true, pass: worst_margin >= 0.0, worst_margin, detail }
}

fn skipped(name: &'static str, detail: &str) -> MonitorEntry {
    MonitorEntry { name, applicable: false, pass: true, worst_margin: f64::INFINITY, detail: detail.into() }
}

fn min_by(rows: &[TraceRow], f: impl Fn(&TraceRow) -> f64) -> f64 {
    rows.iter().map(f).fold(f64::INFINITY, f64::min)
}

fn max_by(rows: &[TraceRow], f: impl Fn(&TraceRow) -> f64) -> f64 {
    rows.iter().map(f).fold(f64::NEG_INFINITY, f64::max)
}

/// All trace monitors for a normalized run.
///
/// Bounded-quantity monitors (`K` above, `tr A` above, `K` below after
/// `t = 1`) only assert finiteness and positivity; the sup and inf they
/// report are the run constants.
pub fn monitor_bounds(trace: &FlowTrace) -> MonitorReport {
    let rows = &trace.rows;
    let n = trace.dim;
    let mut entries = Vec::new();

    let lo = min_by(rows, |r| r.min_u);
    let hi = max_by(rows, |r| r.max_u);
    entries.push(entry(
        "support_band",
        (lo - SUPPORT_BAND.0).min(SUPPORT_BAND.1 - hi),
        format!("u ranges over [{lo:.6e}, {hi:.6e}]"),
    ));

    let g = min_by(rows, |r| r.max_u + GRADIENT_SLACK - r.max_grad);
    entries.push(entry("gradient_estimate", g, "max |∇u| ≤ max u".into()));

    let k_max = max_by(rows, |r| r.max_k);
    entries.push(entry(
        "curvature_upper",
        if k_max.is_finite() { 0.0 } else { -1.0 },
        format!("sup K = {k_max:.6e}"),
    ));

    let late: Vec<TraceRow> = rows.iter().filter(|r| r.t >= K_LOWER_START).cloned().collect();
    if late.is_empty() {
        entries.push(skipped("curvature_lower", "no rows with t ≥ 1"));
    } else {
        let k_min = min_by(&late, |r| r.min_k);
        entries.push(entry("curvature_lower", k_min, format!("inf K over t ≥ 1 is {k_min:.6e}")));
    }

    if n < 2 {
        entries.push(skipped("u_over_k", "bound degenerates for n = 1"));
    } else if trace.mode != FlowMode::Normalized {
        entries.push(skipped("u_over_k", "normalized flow only"));
    } else {
        let eligible: Vec<&TraceRow> = rows.iter().filter(|r| r.t >= U_OVER_K_START).collect();
        if eligible.is_empty() {
            entries.push(skipped("u_over_k", "no rows with t ≥ 0.1"));
        } else {
            let m = eligible.iter().map(|r| r.min_u_over_k - u_over_k_bound(n, r.t)).fold(f64::INFINITY, f64::min);
            entries.push(entry("u_over_k", m, format!("smallest margin {m:.6e} for t ≥ 0.1")));
        }
    }

    let tr = max_by(rows, |r| r.max_trace_a);
    entries.push(entry("trace_a_upper", if tr.is_finite() { 0.0 } else { -1.0 }, format!("sup tr A = {tr:.6e}")));

    if n < 2 {
        entries.push(skipped("newton_inequality", "vacuous for n = 1"));
    } else {
        let m = min_by(rows, |r| r.newton_slack + NEWTON_SLACK);
        entries.push(entry("newton_inequality", m, format!("smallest pointwise slack {:.3e}", m - NEWTON_SLACK)));
    }

    // |e|² ≤ C (E − E_F): C is the largest ratio over rows where E − E_F is
    // resolved; the remaining rows must then satisfy the bound with it.
    let mut drift_constant: f64 = 0.0;
    for r in rows {
        let gap = r.entropy - r.firey_entropy;
        if gap > DRIFT_FLOOR {
            drift_constant = drift_constant.max(r.entropy_point_norm.powi(2) / gap);
        }
    }
    let drift_margin = min_by(rows, |r| {
        let gap = (r.entropy - r.firey_entropy).max(0.0);
        drift_constant * gap + DRIFT_FLOOR * (1.0 + drift_constant) - r.entropy_point_norm.powi(2)
    });
    entries.push(entry("entropy_point_drift", drift_margin, format!("fitted C = {drift_constant:.6e}")));

    let mono = rows
        .windows(2)
        .map(|w| w[0].entropy + ENTROPY_MONOTONE_SLACK - w[1].entropy)
        .fold(f64::INFINITY, f64::min);
    entries.push(entry("entropy_monotone", mono, "E(t_{k+1}) ≤ E(t_k)".into()));

    let firey = rows
        .windows(2)
        .filter(|w| w[0].epoch == w[1].epoch)
        .map(|w| w[0].firey_entropy + ENTROPY_MONOTONE_SLACK - w[1].firey_entropy)
        .fold(f64::INFINITY, f64::min);
    entries.push(entry("firey_monotone", firey, "E_F non-increasing within each epoch".into()));

    let (margin, detail) = integrated_dissipation(rows);
    entries.push(entry("dissipation_inequality", margin, detail));

    MonitorReport { entries, drift_constant }
}

/// `E(t_b) − E(t_a) ≤ ∫_{t_a}^{t_b} (E − E_C) dt ≤ 0` for consecutive rows and
/// for every row against the first, with trapezoid sums.
fn integrated_dissipation(rows: &[TraceRow]) -> (f64, String) {
    let mut margin = f64::INFINITY;
    let mut cumulative = 0.0;
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let piece = 0.5 * (b.t - a.t) * ((a.entropy - a.chow_entropy) + (b.entropy - b.chow_entropy));
        cumulative += piece;
        let start = &rows[0];
        margin = margin
            .min(piece - (b.entropy - a.entropy) + DISSIPATION_SLACK)
            .min(DISSIPATION_SLACK - piece)
            .min(cumulative - (b.entropy - start.entropy) + DISSIPATION_SLACK)
            .min(DISSIPATION_SLACK - cumulative);
    }
    (margin, format!("∫(E − E_C) dt over the run = {cumulative:.6e}"))
}

#[derive(Debug, Clone, Serialize)]
pub struct HarnackReport {
    /// `t_last + V_last / rate`, with the rate from the last two rows.
    pub extinction_estimate: f64,
    /// Smallest relative increment of `K t^{n/(n+1)}` between recorded rows.
    pub monotone_margin: f64,
    pub monotone_pass: bool,
    /// `min K (T − t)^{n/(n+1)}` over recorded rows and nodes.
    pub lower_constant: f64,
    pub lower_pass: bool,
}

impl HarnackReport {
    pub fn pass(&self) -> bool {
        self.monotone_pass && self.lower_pass
    }
}

/// Harnack-type monitors for an un-normalized run with recorded fields.
pub fn harnack_monitor(trace: &FlowTrace) -> crate::Result<HarnackReport> {
    use crate::GcfError;
    if trace.mode != FlowMode::Unnormalized {
        return Err(GcfError::param("Harnack monitors need an un-normalized trace"));
    }
    let fields = &trace.fields;
    if fields.len() < 2 || trace.rows.len() < 2 {
        return Err(GcfError::InsufficientData { needed: 2, have: fields.len().min(trace.rows.len()) });
    }
    let p = trace.dim as f64 / (trace.dim as f64 + 1.0);
    let mut margin = f64::INFINITY;
    for w in fields.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.t <= 0.0 {
            continue;
        }
        for (ka, kb) in a.k.iter().zip(&b.k) {
            let va = ka * a.t.powf(p);
            let vb = kb * b.t.powf(p);
            margin = margin.min((vb - va) / va.max(1.0) + HARNACK_SLACK);
        }
    }
    let rows = &trace.rows;
    let (r1, r2) = (&rows[rows.len() - 2], &rows[rows.len() - 1]);
    let rate = (r1.volume - r2.volume) / (r2.t - r1.t);
    let extinction = r2.t + r2.volume / rate;
    let lower = fields
        .iter()
        .flat_map(|f| f.k.iter().map(move |k| k * (extinction - f.t).max(0.0).powf(p)))
        .fold(f64::INFINITY, f64::min);
    Ok(HarnackReport {
        extinction_estimate: extinction,
        monotone_margin: margin,
        monotone_pass: margin >= 0.0,
        lower_constant: lower,
        lower_pass: lower > 0.0 && lower.is_finite(),
    })
}
