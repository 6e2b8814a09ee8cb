//! The verification suite run by `gcf verify`.
//!
//! Each check evaluates one property over the reference corpus of a
//! dimension and reports a margin that is non-negative exactly when the
//! property holds.

use std::sync::Arc;

use anyhow::Result;
use clap::ValueEnum;
use gcf_core::body::{translate, volume};
use gcf_core::corpus::corpus_entry;
use gcf_core::entropy::{entropy_point, entropy_point_from, entropy_report, firey_entropy};
use gcf_core::flow::{monitor_bounds, run, FlowConfig};
use gcf_core::montecarlo::mc_log_integral;
use gcf_core::shapes::{harmonic, make_shape, ShapeSpec};
use gcf_core::soliton::{j1_first_variation, j1_value, project_admissible, stability_form};
use gcf_core::sphere::{sphere_area, unit_ball_volume};
use gcf_core::{build_grid, ConvexBody, Resolution, ScalarField, SphereGrid};
use serde::Serialize;

/// Deliberate defects for negative-control runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bug {
    /// Read every curvature value as `K/2`.
    MisScaledK,
}

pub const CHECKS: &[&str] = &[
    "quadrature",
    "curvature-identities",
    "gradient-estimate",
    "closedness",
    "sigma-k",
    "entropy-chain",
    "entropy-report",
    "translation-invariance",
    "entropy-uniqueness",
    "mc-oracle",
    "fixed-point",
    "shrinking-ball",
    "flow-monitors",
    "stability-form",
    "first-variation",
];

#[derive(Debug, Clone, Serialize)]
pub struct SuiteConfig {
    pub dims: Vec<usize>,
    pub corpus_size: usize,
    pub seed: u64,
    pub samples: usize,
    pub bug: Option<Bug>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub dim: usize,
    pub pass: bool,
    pub cases: usize,
    /// Smallest margin over all cases; negative on failure.
    pub margin: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }
}

struct Ctx {
    dim: usize,
    grid: Arc<SphereGrid>,
    corpus: Vec<ConvexBody>,
    config: SuiteConfig,
}

impl Ctx {
    fn k_scale(&self) -> f64 {
        match self.config.bug {
            Some(Bug::MisScaledK) => 0.5,
            None => 1.0,
        }
    }

    fn k(&self, body: &ConvexBody) -> Vec<f64> {
        let s = self.k_scale();
        body.curvature().k.values().iter().map(|k| s * k).collect()
    }

    /// Seeded band-limited field of degree `1..=degree` with unit-scale amplitudes.
    fn random_field(&self, seed: u64, degree: usize) -> Result<Vec<f64>> {
        let magnitude = 0.02;
        let spec = ShapeSpec::RandomValid { seed, magnitude, max_degree: degree };
        let body = make_shape(self.grid.clone(), &spec)?;
        Ok(body.support().iter().map(|u| (u - 1.0) / magnitude).collect())
    }
}

/// Accumulates the smallest margin and the case that produced it.
struct Worst {
    margin: f64,
    cases: usize,
    detail: String,
}

impl Worst {
    fn new() -> Self {
        Worst { margin: f64::INFINITY, cases: 0, detail: String::new() }
    }

    fn add(&mut self, margin: f64, detail: impl FnOnce() -> String) {
        self.cases += 1;
        if margin < self.margin || self.cases == 1 {
            self.margin = margin;
            self.detail = detail();
        }
    }

    fn finish(self, name: &str, dim: usize) -> CheckResult {
        let pass = self.margin >= 0.0;
        CheckResult { name: name.to_string(), dim, pass, cases: self.cases, margin: self.margin, detail: self.detail }
    }
}

fn quadrature(ctx: &Ctx) -> Result<Worst> {
    let g = &ctx.grid;
    let mut w = Worst::new();
    let total: f64 = g.weights().iter().sum();
    let area = sphere_area(ctx.dim);
    w.add(1e-12 - ((total - area) / area).abs(), || format!("Σ w = {total}"));
    let worst_norm = g.nodes().iter().map(|x| ((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt() - 1.0).abs()).fold(0.0, f64::max);
    w.add(1e-14 - worst_norm, || format!("max ||x| − 1| = {worst_norm:.2e}"));
    for l in 1..=g.degree() {
        let orders: Vec<i64> = if ctx.dim == 1 { vec![0, -1] } else { (-(l as i64)..=l as i64).collect() };
        for m in orders {
            let v = g.integrate_by(|i| harmonic(ctx.dim, l, m, g.nodes()[i]));
            w.add(1e-10 - v.abs(), || format!("∫ Y_({l},{m}) = {v:.2e}"));
        }
    }
    Ok(w)
}

fn curvature_identities(ctx: &Ctx) -> Result<Worst> {
    let mut w = Worst::new();
    let n = ctx.dim as f64;
    for (i, b) in ctx.corpus.iter().enumerate() {
        let k = ctx.k(b);
        let c = b.curvature();
        for (j, kj) in k.iter().enumerate() {
            let prod = kj * c.det_a.values()[j];
            w.add(1e-10 - (prod - 1.0).abs(), || format!("body {i}: K det A = {prod}"));
            let amgm = c.h.values()[j] - n * kj.powf(1.0 / n);
            w.add(amgm + 1e-10, || format!("body {i}: H − n K^(1/n) = {amgm:.3e}"));
        }
    }
    Ok(w)
}

fn gradient_estimate(ctx: &Ctx) -> Result<Worst> {
    let mut w = Worst::new();
    for (i, b) in ctx.corpus.iter().enumerate() {
        let g = b.curvature().grad_norm.max();
        let u = b.max_support();
        w.add(u + 1e-8 - g, || format!("body {i}: max|∇u| = {g:.6}, max u = {u:.6}"));
    }
    Ok(w)
}

fn closedness(ctx: &Ctx) -> Result<Worst> {
    let g = &ctx.grid;
    let mut w = Worst::new();
    for (i, b) in ctx.corpus.iter().enumerate() {
        let det = b.curvature().det_a.values();
        for j in 0..g.ambient() {
            let c = g.integrate_by(|k| g.nodes()[k][j] * det[k]);
            w.add(1e-8 - c.abs(), || format!("body {i}: ∫ x_{j} det A = {c:.2e}"));
        }
    }
    Ok(w)
}

fn binomial(n: usize, k: usize) -> f64 {
    (1..=k).map(|i| (n + 1 - i) as f64 / i as f64).product()
}

fn sigma_k(ctx: &Ctx) -> Result<Worst> {
    let g = &ctx.grid;
    let mut w = Worst::new();
    for (i, b) in ctx.corpus.iter().enumerate() {
        let k = ctx.k(b);
        for order in 1..=ctx.dim {
            let s = b.curvature().sigma[order - 1].values();
            let plain = g.mean_by(|j| s[j]) / binomial(ctx.dim, order);
            let weighted = g.mean_by(|j| k[j] * s[j]) / binomial(ctx.dim, order);
            w.add(plain - 1.0 + 1e-8, || format!("body {i}: ⨏σ_{order}(W)/C = {plain}"));
            w.add(weighted - 1.0 + 1e-8, || format!("body {i}: ⨏Kσ_{order}(W)/C = {weighted}"));
        }
    }
    Ok(w)
}

fn entropy_chain(ctx: &Ctx) -> Result<Worst> {
    let mut w = Worst::new();
    for (i, b) in ctx.corpus.iter().enumerate() {
        let k = ctx.k(b);
        let ec = ctx.grid.mean_by(|j| k[j].ln());
        let e = entropy_point(b)?.value;
        let ef = firey_entropy(b);
        let m = (ec - e).min(e - ef).min(ef) + 1e-8;
        w.add(m, || format!("body {i}: E_C = {ec:.3e}, E = {e:.3e}, E_F = {ef:.3e}"));
        if i > 0 {
            w.add(e - 1e-9, || format!("body {i} is not a ball but E = {e:.3e}"));
        }
    }
    Ok(w)
}

fn entropy_reports(ctx: &Ctx) -> Result<Worst> {
    let mut w = Worst::new();
    for (i, b) in ctx.corpus.iter().enumerate() {
        let r = entropy_report(b)?;
        for c in &r.checks {
            let m = if c.pass { (c.lhs - c.rhs + c.tolerance).max(0.0) } else { c.lhs - c.rhs + c.tolerance };
            w.add(m, || format!("body {i}: {} ({} vs {})", c.name, c.lhs, c.rhs));
        }
        let res = r.first_order_residual;
        w.add(1e-7 - res, || format!("body {i}: first-order residual {res:.2e}"));
    }
    Ok(w)
}

fn translation_invariance(ctx: &Ctx) -> Result<Worst> {
    let mut w = Worst::new();
    let z: Vec<f64> = [0.05, -0.04, 0.03][..=ctx.dim].to_vec();
    for (i, b) in ctx.corpus.iter().enumerate() {
        let moved = translate(b, &z)?;
        let (p, q) = (entropy_point(b)?, entropy_point(&moved)?);
        let de = (p.value - q.value).abs();
        w.add(1e-9 - de, || format!("body {i}: |ΔE| = {de:.2e}"));
        let dz = (0..=ctx.dim).map(|j| (q.z[j] - (p.z[j] - z[j])).abs()).fold(0.0, f64::max);
        w.add(1e-8 - dz, || format!("body {i}: entropy point shift error {dz:.2e}"));
        let dv = (volume(b) - volume(&moved)).abs();
        w.add(1e-10 - dv, || format!("body {i}: |ΔV| = {dv:.2e}"));
    }
    Ok(w)
}

fn entropy_uniqueness(ctx: &Ctx) -> Result<Worst> {
    let mut w = Worst::new();
    let starts: [[f64; 3]; 5] =
        [[0.1, 0.0, 0.0], [-0.1, 0.1, 0.0], [0.0, -0.15, 0.1], [0.12, 0.12, -0.12], [-0.05, -0.05, -0.15]];
    for (i, b) in ctx.corpus.iter().enumerate().take(5) {
        let reference = entropy_point(b)?;
        w.add(-reference.max_concave_eigenvalue, || format!("body {i}: Hessian eigenvalue {}", reference.max_concave_eigenvalue));
        for s in &starts {
            let p = entropy_point_from(b, &s[..=ctx.dim])?;
            let d = (0..=ctx.dim).map(|j| (p.z[j] - reference.z[j]).abs()).fold(0.0, f64::max);
            w.add(1e-7 - d, || format!("body {i}: start {s:?} ends {d:.2e} away"));
        }
    }
    Ok(w)
}

fn mc_oracle(ctx: &Ctx) -> Result<Worst> {
    let mut w = Worst::new();
    let z0 = vec![0.0; ctx.dim + 1];
    for (i, b) in ctx.corpus.iter().enumerate().take(5) {
        let quad = ctx.grid.integrate_by(|j| b.support()[j].ln());
        let mc = mc_log_integral(b, &z0, ctx.config.samples, ctx.config.seed + i as u64)?;
        let d = (mc.estimate - quad).abs();
        let m = if d <= 1e-10 * (1.0 + quad.abs()) { 0.0 } else { 3.0 - mc.z_score(quad) };
        w.add(m, || format!("body {i}: MC {:.6e} ± {:.1e} vs {quad:.6e}", mc.estimate, mc.stderr));
    }
    Ok(w)
}

fn fixed_point(ctx: &Ctx) -> Result<Worst> {
    let mut w = Worst::new();
    let config = FlowConfig { soliton_tol: None, ..FlowConfig::normalized(1.0) };
    let r = run(&ConvexBody::unit_ball(ctx.grid.clone()), &config)?.into_result()?;
    let dev = r.body.support().iter().map(|u| (u - 1.0).abs()).fold(0.0, f64::max);
    w.add(1e-10 - dev, || format!("‖u − 1‖∞ = {dev:.2e} at t = {}", r.final_time()));
    Ok(w)
}

fn shrinking_ball(ctx: &Ctx) -> Result<Worst> {
    let mut w = Worst::new();
    let n1 = ctx.dim as f64 + 1.0;
    let config = FlowConfig { output_stride: 1, ..FlowConfig::unnormalized(0.8 / n1) };
    let r = run(&ConvexBody::unit_ball(ctx.grid.clone()), &config)?.into_result()?;
    for row in &r.trace.rows {
        let exact = (1.0 - n1 * row.t).powf(1.0 / n1);
        let err = (row.max_u - exact).abs().max((row.min_u - exact).abs());
        w.add(1e-7 - err, || format!("t = {:.4}: |u − R(t)| = {err:.2e}", row.t));
    }
    Ok(w)
}

fn flow_monitors(ctx: &Ctx) -> Result<Worst> {
    let mut w = Worst::new();
    let t_end = if ctx.dim == 1 { 1.0 } else { 0.5 };
    for (i, b) in ctx.corpus.iter().enumerate().skip(1).take(2) {
        let config = FlowConfig { soliton_tol: None, ..FlowConfig::normalized(t_end) };
        let r = run(b, &config)?.into_result()?;
        for e in monitor_bounds(&r.trace).entries {
            w.add(if e.pass { 0.0 } else { -1.0 }, || format!("body {i}: {} {}", e.name, e.detail));
        }
        let target = unit_ball_volume(ctx.dim);
        let dv = r.trace.rows.iter().map(|row| ((row.volume - target) / target).abs()).fold(0.0, f64::max);
        w.add(1e-10 - dv, || format!("body {i}: relative volume drift {dv:.2e}"));
    }
    Ok(w)
}

fn stability(ctx: &Ctx) -> Result<Worst> {
    let mut w = Worst::new();
    let n1 = ctx.dim as f64 + 1.0;
    let gap = 2.0 * n1 - n1;
    for k in 0..20 {
        let raw = ctx.random_field(ctx.config.seed.wrapping_add(500 + k), 8)?;
        let (eta, _) = project_admissible(&ctx.grid, &raw);
        let sq = ctx.grid.mean_by(|i| eta[i] * eta[i]);
        let q = stability_form(&ScalarField::new(ctx.grid.clone(), eta)?);
        w.add(q - (gap - 1e-6) * sq, || format!("direction {k}: Q = {q:.4e}, ⨏η² = {sq:.4e}"));
    }
    let x1 = ScalarField::from_fn(ctx.grid.clone(), |x| x[0]);
    let q = stability_form(&x1);
    w.add(-q, || format!("Q(x₁) = {q:.4e}"));
    let c = 0.7;
    let qc = stability_form(&ScalarField::from_fn(ctx.grid.clone(), |_| c));
    w.add(1e-9 - (qc - n1 * n1 * c * c).abs(), || format!("Q(c) = {qc}"));
    Ok(w)
}

fn first_variation(ctx: &Ctx) -> Result<Worst> {
    let mut w = Worst::new();
    let h = 1e-5;
    for (i, b) in ctx.corpus.iter().enumerate().skip(1).take(4) {
        let rho = ctx.random_field(ctx.config.seed.wrapping_add(700 + i as u64), 4)?;
        let exact = j1_first_variation(b, &ScalarField::new(ctx.grid.clone(), rho.clone())?)?;
        let shifted = |s: f64| -> Result<f64> {
            let v = b.support().iter().zip(&rho).map(|(u, r)| u + s * r).collect();
            Ok(j1_value(&ConvexBody::new(ctx.grid.clone(), v)?))
        };
        let fd = (shifted(h)? - shifted(-h)?) / (2.0 * h);
        w.add(1e-7 - (exact - fd).abs(), || format!("body {i}: δJ₁ = {exact:.8e}, FD = {fd:.8e}"));
    }
    let ball = ConvexBody::unit_ball(ctx.grid.clone());
    let rho = ScalarField::new(ctx.grid.clone(), ctx.random_field(ctx.config.seed.wrapping_add(799), 4)?)?;
    let v = j1_first_variation(&ball, &rho)?;
    w.add(1e-9 - v.abs(), || format!("unit ball: δJ₁ = {v:.2e}"));
    Ok(w)
}

fn run_check(name: &str, ctx: &Ctx) -> CheckResult {
    let f = match name {
        "quadrature" => quadrature,
        "curvature-identities" => curvature_identities,
        "gradient-estimate" => gradient_estimate,
        "closedness" => closedness,
        "sigma-k" => sigma_k,
        "entropy-chain" => entropy_chain,
        "entropy-report" => entropy_reports,
        "translation-invariance" => translation_invariance,
        "entropy-uniqueness" => entropy_uniqueness,
        "mc-oracle" => mc_oracle,
        "fixed-point" => fixed_point,
        "shrinking-ball" => shrinking_ball,
        "flow-monitors" => flow_monitors,
        "stability-form" => stability,
        "first-variation" => first_variation,
        _ => unreachable!("names are validated before the run"),
    };
    match f(ctx) {
        Ok(w) => w.finish(name, ctx.dim),
        Err(e) => CheckResult {
            name: name.to_string(),
            dim: ctx.dim,
            pass: false,
            cases: 0,
            margin: f64::NEG_INFINITY,
            detail: format!("error: {e:#}"),
        },
    }
}

/// Run `names` (all checks when empty) for every configured dimension.
pub fn run_suite(config: &SuiteConfig, names: &[&str], mut progress: impl FnMut(&CheckResult)) -> Result<SuiteReport> {
    let names: Vec<&str> = if names.is_empty() { CHECKS.to_vec() } else { names.to_vec() };
    let mut checks = Vec::new();
    for &dim in &config.dims {
        let grid = build_grid(dim, Resolution::standard(dim)?)?;
        let corpus = (0..config.corpus_size)
            .map(|i| corpus_entry(grid.clone(), i).map(|e| e.body))
            .collect::<gcf_core::Result<Vec<_>>>()?;
        let ctx = Ctx { dim, grid, corpus, config: config.clone() };
        for name in &names {
            let r = run_check(name, &ctx);
            progress(&r);
            checks.push(r);
        }
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    Ok(SuiteReport { config: config.clone(), passed: checks.len() - failed, failed, checks })
}
