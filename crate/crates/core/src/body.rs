//! Convex bodies given by support functions on a [`SphereGrid`].
//!
//! For a support function `u` the tensor `A = ∇̄²u + u ḡ` is the inverse of the
//! Weingarten map, so `K = 1/det A` and the principal radii are the
//! eigenvalues of `A`. The boundary point with outer normal `x` is
//! `X(x) = u(x) x + ∇̄u(x)`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{GcfError, Result};
use crate::minimax::Minimax;
use crate::sphere::{sphere_area, unit_ball_volume, FrameTensorField, ScalarField, SphereGrid, Sym2};

/// Support values below this fraction of `max u` are treated as degenerate.
pub const POSITIVITY_FLOOR: f64 = 1e-8;
/// Eigenvalues of `A` below this fraction of `max u` are treated as degenerate.
pub const CONVEXITY_FLOOR: f64 = 1e-8;

/// Per-node curvature quantities derived from `A`.
#[derive(Debug, Clone)]
pub struct CurvatureData {
    pub a: FrameTensorField,
    pub det_a: ScalarField,
    pub k: ScalarField,
    /// Mean curvature `tr A⁻¹`.
    pub h: ScalarField,
    /// `σ_k(W)` for `k = 1..=n`, where `W = A⁻¹`.
    pub sigma: Vec<ScalarField>,
    /// `σ_k(A)` for `k = 1..=n`.
    pub sigma_a: Vec<ScalarField>,
    pub min_eig_a: f64,
    pub min_eig_node: usize,
    /// Frame components of `∇̄u`.
    pub grad: Vec<[f64; 2]>,
    pub grad_norm: ScalarField,
}

impl CurvatureData {
    fn compute(grid: &Arc<SphereGrid>, u: &[f64]) -> CurvatureData {
        let n = grid.dim();
        let d = grid.derivatives(u);
        let m = grid.len();
        let mut a = Vec::with_capacity(m);
        let mut det_a = Vec::with_capacity(m);
        let mut k = Vec::with_capacity(m);
        let mut h = Vec::with_capacity(m);
        let mut tr_a = Vec::with_capacity(m);
        let mut min_eig = f64::INFINITY;
        let mut min_node = 0;
        for i in 0..m {
            let ai = d.hess[i].add_identity(d.value[i]);
            let det = ai.det(n);
            let tr = ai.trace(n);
            let eig = ai.eigenvalues(n)[0];
            if eig < min_eig || eig.is_nan() {
                min_eig = eig;
                min_node = i;
            }
            a.push(ai);
            det_a.push(det);
            k.push(1.0 / det);
            h.push(if n == 1 { 1.0 / det } else { tr / det });
            tr_a.push(tr);
        }
        let f = |v: Vec<f64>| ScalarField::new(grid.clone(), v).expect("length matches grid");
        let (sigma, sigma_a) = if n == 1 {
            (vec![f(k.clone())], vec![f(det_a.clone())])
        } else {
            (vec![f(h.clone()), f(k.clone())], vec![f(tr_a), f(det_a.clone())])
        };
        let grad_norm = d.grad.iter().map(|g| g[0].hypot(g[1])).collect();
        CurvatureData {
            a: FrameTensorField::new(grid.clone(), a).expect("length matches grid"),
            det_a: f(det_a),
            k: f(k),
            h: f(h),
            sigma,
            sigma_a,
            min_eig_a: min_eig,
            min_eig_node: min_node,
            grad: d.grad,
            grad_norm: f(grad_norm),
        }
    }
}

impl CurvatureData {
    /// Curvature of `λu`: `A` is linear in `u`, so every quantity scales by a power of `λ`.
    fn scaled(&self, dim: usize, lambda: f64) -> CurvatureData {
        let n = dim as i32;
        let grid = self.k.grid().clone();
        let a = self
            .a
            .data()
            .iter()
            .map(|m| Sym2 { xx: m.xx * lambda, xy: m.xy * lambda, yy: m.yy * lambda })
            .collect();
        let pow = |f: &ScalarField, p: i32| {
            let c = lambda.powi(p);
            f.map(|v| v * c)
        };
        CurvatureData {
            a: FrameTensorField::new(grid, a).expect("length matches grid"),
            det_a: pow(&self.det_a, n),
            k: pow(&self.k, -n),
            h: pow(&self.h, -1),
            sigma: self.sigma.iter().enumerate().map(|(j, f)| pow(f, -(j as i32 + 1))).collect(),
            sigma_a: self.sigma_a.iter().enumerate().map(|(j, f)| pow(f, j as i32 + 1)).collect(),
            min_eig_a: self.min_eig_a * lambda,
            min_eig_node: self.min_eig_node,
            grad: self.grad.iter().map(|g| [g[0] * lambda, g[1] * lambda]).collect(),
            grad_norm: pow(&self.grad_norm, 1),
        }
    }
}

/// Extremal radii and widths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometrySummary {
    pub volume: f64,
    /// Surface area `∫ σ_n(A) dθ`.
    pub area: f64,
    pub rho_plus: f64,
    pub rho_minus: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    pub diameter: f64,
}

/// A smooth strictly convex body with the origin in its interior.
#[derive(Debug, Clone)]
pub struct ConvexBody {
    grid: Arc<SphereGrid>,
    support: Vec<f64>,
    curvature: Arc<CurvatureData>,
}

impl ConvexBody {
    /// Validate support values as given (no projection).
    ///
    /// Checking strict convexity needs `A`, so the curvature data is
    /// computed here once and cached for the lifetime of the body.
    pub fn new(grid: Arc<SphereGrid>, support: Vec<f64>) -> Result<Self> {
        if support.len() != grid.len() {
            return Err(GcfError::param(format!(
                "support has {} values but the grid has {} nodes",
                support.len(),
                grid.len()
            )));
        }
        check_positive(&support)?;
        let scale = support.iter().copied().fold(0.0, f64::max);
        let curvature = CurvatureData::compute(&grid, &support);
        if !(curvature.min_eig_a > CONVEXITY_FLOOR * scale) {
            return Err(GcfError::Convexity {
                node: curvature.min_eig_node,
                eigenvalue: curvature.min_eig_a,
            });
        }
        Ok(ConvexBody { grid, support, curvature: Arc::new(curvature) })
    }

    /// Build from raw samples; on S² the samples are first projected onto
    /// the harmonics the grid resolves.
    pub fn from_samples(grid: Arc<SphereGrid>, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(GcfError::param("sample count does not match grid"));
        }
        let values = if grid.dim() == 2 { grid.project(&samples) } else { samples };
        ConvexBody::new(grid, values)
    }

    pub fn from_fn(grid: Arc<SphereGrid>, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        let samples = grid.nodes().iter().map(|&x| f(x)).collect();
        ConvexBody::from_samples(grid, samples)
    }

    pub fn unit_ball(grid: Arc<SphereGrid>) -> Self {
        let n = grid.len();
        ConvexBody::new(grid, vec![1.0; n]).expect("the unit ball is valid on every grid")
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn support_field(&self) -> ScalarField {
        ScalarField::new(self.grid.clone(), self.support.clone()).expect("length matches grid")
    }

    pub fn into_support(self) -> Vec<f64> {
        self.support
    }

    pub fn curvature(&self) -> &CurvatureData {
        &self.curvature
    }

    pub fn min_support(&self) -> f64 {
        self.support.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_support(&self) -> f64 {
        self.support.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `u → λu` (dilation about the origin).
    pub fn scale(&self, lambda: f64) -> Result<ConvexBody> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(GcfError::param(format!("scale factor must be positive, got {lambda}")));
        }
        let support = self.support.iter().map(|v| v * lambda).collect();
        let curvature = Arc::new(self.curvature.scaled(self.dim(), lambda));
        Ok(ConvexBody { grid: self.grid.clone(), support, curvature })
    }

    /// Boundary points `X_i = u_i x_i + ∇̄u_i`.
    pub fn boundary_points(&self) -> Vec<[f64; 3]> {
        let c = &self.curvature;
        self.grid
            .nodes()
            .iter()
            .zip(self.grid.frames())
            .enumerate()
            .map(|(i, (x, f))| {
                let (u, g) = (self.support[i], c.grad[i]);
                std::array::from_fn(|d| u * x[d] + g[0] * f[0][d] + g[1] * f[1][d])
            })
            .collect()
    }

    /// `⨏ u det A` (equals 1 iff the volume is `V(B(1))`).
    pub fn mean_u_det_a(&self) -> f64 {
        let det = self.curvature.det_a.values();
        self.grid.mean_by(|i| self.support[i] * det[i])
    }
}

fn check_positive(u: &[f64]) -> Result<()> {
    let scale = u.iter().copied().fold(0.0, f64::max);
    let (node, value) = u
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 || v.is_nan() { (i, v) } else { acc });
    if !(scale > 0.0) || !(value > POSITIVITY_FLOOR * scale) {
        return Err(GcfError::Positivity { node, value });
    }
    Ok(())
}

pub fn curvature_data(body: &ConvexBody) -> &CurvatureData {
    body.curvature()
}

/// `V = (1/(n+1)) ∫ u det A`.
pub fn volume(body: &ConvexBody) -> f64 {
    let det = body.curvature.det_a.values();
    body.grid.integrate_by(|i| body.support[i] * det[i]) / (body.dim() as f64 + 1.0)
}

/// Support values `u − ⟨z, x⟩` relative to `z`, checked for positivity at nodes.
pub fn translated_support(body: &ConvexBody, z: &[f64]) -> Result<Vec<f64>> {
    let lin = body.grid.linear_values(z)?;
    let v: Vec<f64> = body.support.iter().zip(&lin).map(|(u, l)| u - l).collect();
    check_positive(&v)?;
    Ok(v)
}

/// The same body described from reference point `z`.
///
/// Besides node positivity, `z` must be interior in the continuous sense:
/// the interpolated `u − ⟨z, ·⟩` is minimized locally around its smallest
/// node value.
pub fn translate(body: &ConvexBody, z: &[f64]) -> Result<ConvexBody> {
    let v = translated_support(body, z)?;
    let (node, value) = continuous_min(&body.grid, &v);
    let scale = v.iter().copied().fold(0.0, f64::max);
    if !(value > POSITIVITY_FLOOR * scale) {
        return Err(GcfError::Positivity { node, value });
    }
    ConvexBody::new(body.grid.clone(), v)
}

/// Whether `z` lies strictly inside the body.
pub fn is_interior(body: &ConvexBody, z: &[f64]) -> bool {
    match translated_support(body, z) {
        Ok(v) => {
            let scale = v.iter().copied().fold(0.0, f64::max);
            continuous_min(&body.grid, &v).1 > POSITIVITY_FLOOR * scale
        }
        Err(_) => false,
    }
}

/// Local refinement of `min_x f(x)` starting from the smallest node value,
/// using the grid interpolant and a few damped Newton steps in the tangent
/// plane of that node. Returns the node and the refined minimum.
fn continuous_min(grid: &SphereGrid, values: &[f64]) -> (usize, f64) {
    let (node, mut best) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let interp = grid.interpolant(values);
    let x0 = grid.nodes()[node];
    let frame = grid.frames()[node];
    let dims = grid.dim();
    let point = |c: &[f64; 2]| {
        let mut p: [f64; 3] = std::array::from_fn(|d| x0[d] + c[0] * frame[0][d] + c[1] * frame[1][d]);
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        for v in &mut p {
            *v /= r;
        }
        p
    };
    let f = |c: &[f64; 2]| interp.eval(point(c));
    let mut c = [0.0; 2];
    let h = 0.25 * grid.h_min();
    for _ in 0..20 {
        let f0 = f(&c);
        let mut g = [0.0; 2];
        let mut hs = [[0.0; 2]; 2];
        for a in 0..dims {
            let mut cp = c;
            cp[a] += h;
            let mut cm = c;
            cm[a] -= h;
            let (fp, fm) = (f(&cp), f(&cm));
            g[a] = (fp - fm) / (2.0 * h);
            hs[a][a] = (fp - 2.0 * f0 + fm) / (h * h);
        }
        if dims == 2 {
            let e = |s0: f64, s1: f64| f(&[c[0] + s0 * h, c[1] + s1 * h]);
            hs[0][1] = (e(1.0, 1.0) - e(1.0, -1.0) - e(-1.0, 1.0) + e(-1.0, -1.0)) / (4.0 * h * h);
            hs[1][0] = hs[0][1];
        }
        let step = if dims == 1 {
            [if hs[0][0] > 0.0 { g[0] / hs[0][0] } else { g[0].signum() * h }, 0.0]
        } else {
            let det = hs[0][0] * hs[1][1] - hs[0][1] * hs[1][0];
            if hs[0][0] > 0.0 && det > 0.0 {
                [(hs[1][1] * g[0] - hs[0][1] * g[1]) / det, (hs[0][0] * g[1] - hs[1][0] * g[0]) / det]
            } else {
                [g[0].signum() * h, g[1].signum() * h]
            }
        };
        let len = step[0].hypot(step[1]);
        let limit = 4.0 * grid.h_min();
        let s = if len > limit { limit / len } else { 1.0 };
        let trial = [c[0] - s * step[0], c[1] - s * step[1]];
        let ft = f(&trial);
        if ft < f0 {
            c = trial;
            best = best.min(ft);
            if len * s < 1e-12 {
                break;
            }
        } else {
            break;
        }
    }
    (node, best.min(f(&c)))
}

/// `V(Ω*_z) = (1/(n+1)) ∫ (u − ⟨z,x⟩)^{−(n+1)}`.
pub fn dual_volume(body: &ConvexBody, z: &[f64]) -> Result<f64> {
    let v = translated_support(body, z)?;
    let p = body.dim() as i32 + 1;
    Ok(body.grid.integrate_by(|i| v[i].powi(-p)) / p as f64)
}

/// Width `w(x_i) = u(x_i) + u(−x_i)` at every node.
pub fn widths(body: &ConvexBody) -> Vec<f64> {
    let interp = body.grid.interpolant(&body.support);
    body.grid
        .nodes()
        .iter()
        .zip(&body.support)
        .map(|(x, u)| u + interp.eval([-x[0], -x[1], -x[2]]))
        .collect()
}

/// Outer radius: radius of the smallest ball containing the boundary points.
pub fn outer_radius(body: &ConvexBody) -> (Vec<f64>, f64) {
    let amb = body.grid.ambient();
    let pts = body.boundary_points();
    let a: Vec<[f64; 3]> = pts.iter().map(|p| [-2.0 * p[0], -2.0 * p[1], -2.0 * p[2]]).collect();
    let b: Vec<f64> = pts.iter().map(|p| p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).collect();
    let scale = body.max_support().powi(2);
    let sol = Minimax { amb, q: 1.0, a: &a, b: &b }.solve(&vec![0.0; amb], scale, 1e-12 * scale);
    (sol.z, sol.value.max(0.0).sqrt())
}

/// Inner radius: `max_z min_i (u_i − ⟨z, x_i⟩)` with its maximizer.
pub fn inner_radius(body: &ConvexBody) -> (Vec<f64>, f64) {
    let amb = body.grid.ambient();
    let b: Vec<f64> = body.support.iter().map(|u| -u).collect();
    let scale = body.max_support();
    let sol = Minimax { amb, q: 0.0, a: body.grid.nodes(), b: &b }.solve(&vec![0.0; amb], scale, 1e-10 * scale);
    (sol.z, -sol.value)
}

pub fn geometry_summary(body: &ConvexBody) -> GeometrySummary {
    let w = widths(body);
    let w_plus = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w_minus = w.iter().copied().fold(f64::INFINITY, f64::min);
    let area = body.grid.integrate_values(body.curvature.det_a.values());
    GeometrySummary {
        volume: volume(body),
        area,
        rho_plus: outer_radius(body).1,
        rho_minus: inner_radius(body).1,
        w_plus,
        w_minus,
        diameter: w_plus,
    }
}

/// Rescale so that the volume equals that of the unit ball.
pub fn normalize_volume(body: &ConvexBody) -> Result<ConvexBody> {
    let n = body.dim() as f64;
    let lambda = (unit_ball_volume(body.dim()) / volume(body)).powf(1.0 / (n + 1.0));
    body.scale(lambda)
}

/// `ω_n` for the body's dimension.
pub fn omega(body: &ConvexBody) -> f64 {
    sphere_area(body.dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{build_grid, Resolution};
    use std::f64::consts::PI;

    fn circle(n: usize) -> Arc<SphereGrid> {
        build_grid(1, Resolution::Circle { n }).unwrap()
    }

    fn s2() -> Arc<SphereGrid> {
        build_grid(2, Resolution::Sphere { n_theta: 16, n_phi: 32 }).unwrap()
    }

    #[test]
    fn unit_ball_curvature() {
        for g in [circle(64), s2()] {
            let n = g.dim() as f64;
            let b = ConvexBody::unit_ball(g.clone());
            let c = b.curvature();
            assert!(c.k.values().iter().all(|k| (k - 1.0).abs() < 1e-12));
            assert!(c.h.values().iter().all(|h| (h - n).abs() < 1e-12));
            if g.dim() == 2 {
                assert!(c.sigma[0].values().iter().all(|s| (s - 2.0).abs() < 1e-12));
                assert!(c.sigma[1].values().iter().all(|s| (s - 1.0).abs() < 1e-12));
            }
            assert!((volume(&b) - g.area() / (n + 1.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn ball_radius_scales_curvature_and_volume() {
        let g = circle(64);
        let b = ConvexBody::unit_ball(g.clone()).scale(1.7).unwrap();
        assert!(b.curvature().k.values().iter().all(|k| (k - 1.0 / 1.7).abs() < 1e-12));
        assert!((volume(&b) - PI * 1.7 * 1.7).abs() < 1e-10);
        let g2 = s2();
        let b2 = ConvexBody::unit_ball(g2).scale(0.8).unwrap();
        assert!(b2.curvature().k.values().iter().all(|k| (k - 0.8f64.powi(-2)).abs() < 1e-11));
    }

    #[test]
    fn translate_keeps_a_and_volume() {
        let g = s2();
        let b = ConvexBody::from_fn(g.clone(), |x| (1.2f64 * 1.2 * x[0] * x[0] + x[1] * x[1] + 0.7 * 0.7 * x[2] * x[2]).sqrt()).unwrap();
        let z = [0.1, -0.2, 0.05];
        let t = translate(&b, &z).unwrap();
        for (p, q) in b.curvature().a.data().iter().zip(t.curvature().a.data()) {
            assert!((p.xx - q.xx).abs() < 1e-10 && (p.xy - q.xy).abs() < 1e-10 && (p.yy - q.yy).abs() < 1e-10);
        }
        assert!((volume(&b) - volume(&t)).abs() < 1e-10);
        let same = translate(&b, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(same.support(), b.support());
    }

    #[test]
    fn translate_rejects_boundary_points() {
        let g = circle(64);
        let b = ConvexBody::unit_ball(g.clone());
        assert!(matches!(translate(&b, &[1.0, 0.0]), Err(GcfError::Positivity { .. })));
        let t = translate(&b, &[0.5, 0.0]).unwrap();
        assert!((t.min_support() - 0.5).abs() < 1e-15);
        let b2 = ConvexBody::unit_ball(s2());
        assert!(translate(&b2, &[1.0, 0.0, 0.0]).is_err());
        assert!(translate(&b2, &[0.0, 0.6, -0.3]).is_ok());
    }

    #[test]
    fn dual_volume_of_balls() {
        let g = s2();
        let b = ConvexBody::unit_ball(g.clone());
        assert!((dual_volume(&b, &[0.0, 0.0, 0.0]).unwrap() - 4.0 * PI / 3.0).abs() < 1e-12);
        let r = 1.3;
        let br = b.scale(r).unwrap();
        let exact = 4.0 * PI / 3.0 * r.powi(-3);
        assert!((dual_volume(&br, &[0.0, 0.0, 0.0]).unwrap() - exact).abs() < 1e-12);
    }

    #[test]
    fn normalize_volume_rescales_balls() {
        let g = circle(64);
        let b = ConvexBody::unit_ball(g.clone()).scale(2.0).unwrap();
        let nb = normalize_volume(&b).unwrap();
        assert!(nb.support().iter().all(|u| (u - 1.0).abs() < 1e-12));
    }

    #[test]
    fn convexity_violation_names_worst_node() {
        let g = circle(64);
        let err = ConvexBody::from_fn(g, |x| {
            let t = x[1].atan2(x[0]);
            1.0 + 0.2 * (3.0 * t).cos()
        })
        .unwrap_err();
        match err {
            GcfError::Convexity { eigenvalue, .. } => assert!((eigenvalue - (1.0 - 0.2 * 8.0)).abs() < 1e-10),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn radii_of_translated_ball_are_translation_invariant() {
        let g = s2();
        let b = ConvexBody::from_fn(g, |x| 1.0 + 0.3 * x[0] - 0.2 * x[2]).unwrap();
        let s = geometry_summary(&b);
        assert!((s.rho_plus - 1.0).abs() < 1e-8, "{s:?}");
        assert!((s.rho_minus - 1.0).abs() < 1e-8, "{s:?}");
        assert!((s.w_plus - 2.0).abs() < 1e-10 && (s.w_minus - 2.0).abs() < 1e-10);
    }
}
