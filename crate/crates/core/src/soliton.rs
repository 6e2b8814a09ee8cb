//! Shrinking solitons `u det A = 1`, the functional
//! `J₁(u) = ⨏ log u − (1/(n+1)) log(⨏ u det A) + ½(⨏ u det A − 1)²`,
//! its first variation and the stability form at the unit sphere.

use serde::Serialize;

use crate::body::{dual_volume, ConvexBody};
use crate::entropy::entropy_point;
use crate::error::{GcfError, Result};
use crate::flow::{run, soliton_residual_of, FlowConfig, Termination};
use crate::sphere::{unit_ball_volume, ScalarField, SphereGrid};

/// Default time limit for [`solve_soliton`].
pub const SOLITON_T_END: f64 = 40.0;
/// Tolerance for the dual-volume bound `V(Ω*₀) ≥ V(B(1))`.
pub const DUAL_BOUND_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct SolitonReport {
    pub residual: f64,
    pub entropy_point_norm: f64,
    pub dual_volume_at_origin: f64,
    pub dual_bound_pass: bool,
    pub j1: f64,
    /// `max_x` of the Euler–Lagrange density of `J₁`.
    pub first_variation_residual: f64,
    /// `max_j |⨏ x_j / u|`.
    pub mass_center: f64,
    /// `‖u − 1‖∞`; recorded, roundness is not asserted.
    pub round_deviation: f64,
    pub converged: bool,
    pub final_time: f64,
    pub steps: usize,
}

/// `‖u det A − 1‖∞`.
pub fn soliton_residual(body: &ConvexBody) -> f64 {
    soliton_residual_of(body)
}

/// `max_j |⨏ x_j / u|` about the origin.
pub fn mass_center_residual(body: &ConvexBody) -> f64 {
    let grid = body.grid();
    let (u, nodes) = (body.support(), grid.nodes());
    (0..grid.ambient()).map(|d| grid.mean_by(|i| nodes[i][d] / u[i]).abs()).fold(0.0, f64::max)
}

pub fn soliton_report(body: &ConvexBody, converged: bool, final_time: f64, steps: usize) -> Result<SolitonReport> {
    let dual = dual_volume(body, &vec![0.0; body.grid().ambient()])?;
    let ep = entropy_point(body)?;
    let el = euler_lagrange_density(body);
    Ok(SolitonReport {
        residual: soliton_residual(body),
        entropy_point_norm: ep.z.iter().map(|v| v * v).sum::<f64>().sqrt(),
        dual_volume_at_origin: dual,
        dual_bound_pass: dual >= unit_ball_volume(body.dim()) - DUAL_BOUND_TOL,
        j1: j1_value(body),
        first_variation_residual: el.iter().fold(0.0, |m: f64, v| m.max(v.abs())),
        mass_center: mass_center_residual(body),
        round_deviation: body.support().iter().map(|u| (u - 1.0).abs()).fold(0.0, f64::max),
        converged,
        final_time,
        steps,
    })
}

/// Run the normalized flow until `‖u det A − 1‖∞ < tol` or `t = SOLITON_T_END`.
/// Non-convergence is reported through `converged = false`.
pub fn solve_soliton(initial: &ConvexBody, tol: f64) -> Result<(ConvexBody, SolitonReport)> {
    let config = FlowConfig { soliton_tol: Some(tol), ..FlowConfig::normalized(SOLITON_T_END) };
    solve_soliton_with(initial, &config)
}

pub fn solve_soliton_with(initial: &ConvexBody, config: &FlowConfig) -> Result<(ConvexBody, SolitonReport)> {
    if config.soliton_tol.is_none() {
        return Err(GcfError::param("solving for a soliton needs a soliton tolerance"));
    }
    let r = run(initial, config)?;
    let converged = r.termination == Termination::Soliton;
    let report = soliton_report(&r.body, converged, r.final_time(), r.steps)?;
    Ok((r.body, report))
}

/// `J₁(u)`.
pub fn j1_value(body: &ConvexBody) -> f64 {
    let grid = body.grid();
    let u = body.support();
    let m = body.mean_u_det_a();
    let n1 = body.dim() as f64 + 1.0;
    grid.mean_by(|i| u[i].ln()) - m.ln() / n1 + 0.5 * (m - 1.0).powi(2)
}

/// `1/u − det A / ⨏u det A + (n+1)(⨏u det A − 1) det A` at every node.
pub fn euler_lagrange_density(body: &ConvexBody) -> Vec<f64> {
    let u = body.support();
    let det = body.curvature().det_a.values();
    let m = body.mean_u_det_a();
    let n1 = body.dim() as f64 + 1.0;
    u.iter().zip(det).map(|(u, d)| 1.0 / u - d / m + n1 * (m - 1.0) * d).collect()
}

/// `d/dη J₁(u + ηρ)` at `η = 0`, as `⨏ ρ · (Euler–Lagrange density)`.
///
/// The derivative of `⨏ u det A` is `(n+1) ⨏ ρ det A` because
/// `∫ u σ_n^{ij}(A) (A_ρ)_{ij} = ∫ ρ σ_n^{ij}(A) (A_u)_{ij} = n ∫ ρ det A`.
pub fn j1_first_variation(body: &ConvexBody, direction: &ScalarField) -> Result<f64> {
    if !std::sync::Arc::ptr_eq(body.grid(), direction.grid()) {
        return Err(GcfError::GridMismatch);
    }
    let el = euler_lagrange_density(body);
    let rho = direction.values();
    Ok(body.grid().mean_by(|i| rho[i] * el[i]))
}

/// `Q(η) = ⨏|∇̄η|² − (n+1)⨏η² + (n+1)(n+2)(⨏η)²`.
pub fn stability_form(eta: &ScalarField) -> f64 {
    let grid = eta.grid();
    let n = grid.dim() as f64;
    let d = grid.derivatives(eta.values());
    let v = eta.values();
    let grad2 = grid.mean_by(|i| d.grad[i][0].powi(2) + d.grad[i][1].powi(2));
    let sq = grid.mean_by(|i| v[i] * v[i]);
    let mean = grid.mean_values(v);
    grad2 - (n + 1.0) * sq + (n + 1.0) * (n + 2.0) * mean * mean
}

/// Remove the components along `{1, x_1, …, x_{n+1}}` in the quadrature
/// inner product (Gram–Schmidt, repeated once if the residual overlap
/// exceeds `1e-12`). Returns the projected values and the final overlap.
pub fn project_admissible(grid: &SphereGrid, values: &[f64]) -> (Vec<f64>, f64) {
    let nodes = grid.nodes();
    let mut basis: Vec<Vec<f64>> = vec![vec![1.0; grid.len()]];
    for d in 0..grid.ambient() {
        basis.push(nodes.iter().map(|x| x[d]).collect());
    }
    let inner = |a: &[f64], b: &[f64]| grid.integrate_by(|i| a[i] * b[i]);
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for b in basis {
        let mut v = b;
        for q in &ortho {
            let c = inner(&v, q);
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
        let norm = inner(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        ortho.push(v);
    }
    let mut out = values.to_vec();
    let scale = inner(values, values).sqrt().max(f64::MIN_POSITIVE);
    let mut overlap = f64::INFINITY;
    for _ in 0..2 {
        for q in &ortho {
            let c = inner(&out, q);
            out.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
        overlap = ortho.iter().map(|q| inner(&out, q).abs()).fold(0.0, f64::max) / scale;
        if overlap <= 1e-12 {
            break;
        }
    }
    (out, overlap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{harmonic, make_shape, ShapeSpec};
    use crate::sphere::{build_grid, Resolution};

    #[test]
    fn unit_ball_is_a_soliton_and_critical_point() {
        for (dim, res) in [(1, Resolution::Circle { n: 64 }), (2, Resolution::Sphere { n_theta: 12, n_phi: 24 })] {
            let g = build_grid(dim, res).unwrap();
            let b = ConvexBody::unit_ball(g.clone());
            assert!(soliton_residual(&b) < 1e-12);
            assert!(j1_value(&b).abs() < 1e-14);
            let rho = ScalarField::from_fn(g, |x| 0.3 + x[0] - 0.5 * x[1] * x[1]);
            assert!(j1_first_variation(&b, &rho).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn ball_of_radius_r() {
        let g = build_grid(2, Resolution::Sphere { n_theta: 12, n_phi: 24 }).unwrap();
        let r: f64 = 1.3;
        let b = make_shape(g, &ShapeSpec::Ball { radius: r, center: vec![] }).unwrap();
        assert!((soliton_residual(&b) - (r.powi(3) - 1.0)).abs() < 1e-12);
        assert!((j1_value(&b) - 0.5 * (r.powi(3) - 1.0).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn stability_form_on_harmonics() {
        let g = build_grid(2, Resolution::Sphere { n_theta: 16, n_phi: 32 }).unwrap();
        let eta = ScalarField::from_fn(g.clone(), |x| harmonic(2, 2, 1, x));
        let sq = g.mean_by(|i| eta.values()[i].powi(2));
        assert!((stability_form(&eta) - 3.0 * sq).abs() < 1e-12);
        let x1 = ScalarField::from_fn(g.clone(), |x| x[0]);
        assert!((stability_form(&x1) + g.mean_by(|i| x1.values()[i].powi(2))).abs() < 1e-12);
        let c = ScalarField::from_fn(g, |_| 0.7);
        assert!((stability_form(&c) - 9.0 * 0.49).abs() < 1e-12);
    }

    #[test]
    fn projection_removes_constants_and_linear_terms() {
        let g = build_grid(2, Resolution::Sphere { n_theta: 12, n_phi: 24 }).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|x| 2.0 + x[0] - 3.0 * x[2] + x[0] * x[1]).collect();
        let (p, overlap) = project_admissible(&g, &v);
        assert!(overlap <= 1e-12);
        for (a, x) in p.iter().zip(g.nodes()) {
            assert!((a - x[0] * x[1]).abs() < 1e-12);
        }
    }
}
