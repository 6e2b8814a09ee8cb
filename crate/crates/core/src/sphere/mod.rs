//! Spectral discretization of S¹ and S².
//!
//! * `n = 1`: `N` equispaced angles, Fourier collocation. Frame vector
//!   `e = (−sin θ, cos θ)`.
//! * `n = 2`: Gauss–Legendre colatitudes × uniform longitudes, spherical-harmonic
//!   transform with triangular truncation. Frame `(e_θ, e_φ)`.
//!
//! Tensor fields are stored in the orthonormal frame. For the round metric the
//! frame Hessian reads
//!
//! ```text
//! H₁₁ = u_θθ,  H₁₂ = (u_θφ − cot θ u_φ) / sin θ,  H₂₂ = u_φφ / sin²θ + cot θ u_θ
//! ```
//!
//! which follows from `Γ^θ_φφ = −sin θ cos θ` and `Γ^φ_θφ = cot θ`.

mod circle;
pub mod legendre;
mod s2;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GcfError, Result};
use crate::numeric::pairwise_sum_by;

pub use legendre::real_harmonic;

/// Grid parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Resolution {
    Circle { n: usize },
    Sphere { n_theta: usize, n_phi: usize },
}

impl Resolution {
    pub fn dim(&self) -> usize {
        match self {
            Resolution::Circle { .. } => 1,
            Resolution::Sphere { .. } => 2,
        }
    }

    pub fn node_count(&self) -> usize {
        match *self {
            Resolution::Circle { n } => n,
            Resolution::Sphere { n_theta, n_phi } => n_theta * n_phi,
        }
    }

    /// Default desk-scale resolution for a dimension.
    pub fn standard(dim: usize) -> Result<Self> {
        match dim {
            1 => Ok(Resolution::Circle { n: 256 }),
            2 => Ok(Resolution::Sphere { n_theta: 32, n_phi: 64 }),
            _ => Err(GcfError::param(format!("unsupported sphere dimension {dim}"))),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Resolution::Circle { n } => {
                if n < 16 || n % 2 != 0 {
                    return Err(GcfError::param(format!("circle grid needs an even N >= 16, got {n}")));
                }
            }
            Resolution::Sphere { n_theta, n_phi } => {
                if n_theta < 8 || n_phi < 16 || n_phi % 2 != 0 {
                    return Err(GcfError::param(format!(
                        "sphere grid needs N_theta >= 8 and an even N_phi >= 16, got {n_theta}x{n_phi}"
                    )));
                }
                if n_theta > 512 || n_phi > 1024 {
                    return Err(GcfError::param(format!("sphere grid {n_theta}x{n_phi} exceeds 512x1024")));
                }
            }
        }
        Ok(())
    }
}

/// Symmetric 2×2 matrix in the orthonormal frame; for `n = 1` only `xx` is used.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub fn trace(&self, dim: usize) -> f64 {
        if dim == 1 {
            self.xx
        } else {
            self.xx + self.yy
        }
    }

    pub fn det(&self, dim: usize) -> f64 {
        if dim == 1 {
            self.xx
        } else {
            self.xx * self.yy - self.xy * self.xy
        }
    }

    /// Eigenvalues in ascending order (one for `n = 1`, repeated).
    pub fn eigenvalues(&self, dim: usize) -> [f64; 2] {
        if dim == 1 {
            return [self.xx, self.xx];
        }
        let mean = 0.5 * (self.xx + self.yy);
        let half_diff = 0.5 * (self.xx - self.yy);
        let r = half_diff.hypot(self.xy);
        [mean - r, mean + r]
    }

    pub fn add_identity(&self, s: f64) -> Sym2 {
        Sym2 { xx: self.xx + s, xy: self.xy, yy: self.yy + s }
    }
}

#[derive(Debug)]
enum Backend {
    Circle(circle::CircleOps),
    Sphere(s2::SphereOps),
}

/// Quadrature and differentiation data for S^n.
#[derive(Debug)]
pub struct SphereGrid {
    resolution: Resolution,
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
    frames: Vec<[[f64; 3]; 2]>,
    backend: Backend,
}

/// Frame components of the first and second covariant derivatives.
#[derive(Debug, Clone)]
pub struct Derivatives {
    /// Values of the (bandlimited) field the derivatives belong to.
    pub value: Vec<f64>,
    pub grad: Vec<[f64; 2]>,
    pub hess: Vec<Sym2>,
}

impl SphereGrid {
    pub fn new(resolution: Resolution) -> Result<Arc<SphereGrid>> {
        resolution.validate()?;
        let grid = match resolution {
            Resolution::Circle { n } => {
                let mut nodes = Vec::with_capacity(n);
                let mut frames = Vec::with_capacity(n);
                for k in 0..n {
                    let t = 2.0 * PI * k as f64 / n as f64;
                    let (s, c) = t.sin_cos();
                    nodes.push([c, s, 0.0]);
                    frames.push([[-s, c, 0.0], [0.0; 3]]);
                }
                SphereGrid {
                    resolution,
                    nodes,
                    weights: vec![2.0 * PI / n as f64; n],
                    frames,
                    backend: Backend::Circle(circle::CircleOps::new(n)),
                }
            }
            Resolution::Sphere { n_theta, n_phi } => {
                let ops = s2::SphereOps::new(n_theta, n_phi);
                let mut nodes = Vec::with_capacity(n_theta * n_phi);
                let mut weights = Vec::with_capacity(n_theta * n_phi);
                let mut frames = Vec::with_capacity(n_theta * n_phi);
                let dphi = 2.0 * PI / n_phi as f64;
                for j in 0..n_theta {
                    let (ct, st) = (ops.x[j], ops.s[j]);
                    for k in 0..n_phi {
                        let (sp, cp) = (dphi * k as f64).sin_cos();
                        nodes.push([st * cp, st * sp, ct]);
                        weights.push(ops.gl_w[j] * dphi);
                        frames.push([[ct * cp, ct * sp, -st], [-sp, cp, 0.0]]);
                    }
                }
                SphereGrid { resolution, nodes, weights, frames, backend: Backend::Sphere(ops) }
            }
        };
        Ok(Arc::new(grid))
    }

    pub fn dim(&self) -> usize {
        self.resolution.dim()
    }

    /// Ambient dimension `n + 1`.
    pub fn ambient(&self) -> usize {
        self.dim() + 1
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Unit node vectors; the third component is 0 on the circle.
    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn frames(&self) -> &[[[f64; 3]; 2]] {
        &self.frames
    }

    /// Area ω_n of the unit sphere.
    pub fn area(&self) -> f64 {
        sphere_area(self.dim())
    }

    /// Highest harmonic degree represented without loss.
    pub fn degree(&self) -> usize {
        match &self.backend {
            Backend::Circle(_) => self.len() / 2 - 1,
            Backend::Sphere(ops) => ops.lmax,
        }
    }

    /// Largest eigenvalue of −Δ representable on the grid.
    pub fn max_laplace_eigenvalue(&self) -> f64 {
        match &self.backend {
            Backend::Circle(_) => {
                let k = (self.len() / 2) as f64;
                k * k
            }
            Backend::Sphere(ops) => {
                let l = ops.lmax as f64;
                l * (l + 1.0)
            }
        }
    }

    /// Collocation spacing used in the parabolic time-step restriction,
    /// `π / sqrt(λ_max)`. On the circle this equals `2π/N`.
    pub fn h_min(&self) -> f64 {
        PI / self.max_laplace_eigenvalue().sqrt()
    }

    /// Quadrature `Σ w_i f_i` with pairwise summation in node order.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.len(), "field length does not match grid");
        pairwise_sum_by(values.len(), &|i| self.weights[i] * values[i])
    }

    /// `Σ w_i f(i)` with pairwise summation.
    pub fn integrate_by(&self, f: impl Fn(usize) -> f64) -> f64 {
        pairwise_sum_by(self.len(), &|i| self.weights[i] * f(i))
    }

    /// Spherical average `(1/ω_n) ∫ f`.
    pub fn mean_values(&self, values: &[f64]) -> f64 {
        self.integrate_values(values) / self.area()
    }

    pub fn mean_by(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.integrate_by(f) / self.area()
    }

    /// Frame gradient and Hessian of a nodal field.
    ///
    /// On S² the field is first projected onto harmonics of degree `≤ L`; the
    /// returned `value` is that projection.
    pub fn derivatives(&self, values: &[f64]) -> Derivatives {
        assert_eq!(values.len(), self.len(), "field length does not match grid");
        match &self.backend {
            Backend::Circle(ops) => {
                let (d1, d2) = ops.derivatives(values);
                Derivatives {
                    value: values.to_vec(),
                    grad: d1.into_iter().map(|g| [g, 0.0]).collect(),
                    hess: d2.into_iter().map(|h| Sym2 { xx: h, xy: 0.0, yy: 0.0 }).collect(),
                }
            }
            Backend::Sphere(ops) => {
                let (value, grad, hess) = ops.derivatives(values);
                Derivatives { value, grad, hess }
            }
        }
    }

    /// Orthogonal projection onto the harmonics the grid resolves.
    pub fn project(&self, values: &[f64]) -> Vec<f64> {
        match &self.backend {
            Backend::Circle(ops) => ops.filter(values, self.len() / 2),
            Backend::Sphere(ops) => ops.filter(values, ops.lmax),
        }
    }

    /// Keep harmonics of degree `≤ degree` only.
    pub fn filter(&self, values: &[f64], degree: usize) -> Vec<f64> {
        match &self.backend {
            Backend::Circle(ops) => ops.filter(values, degree),
            Backend::Sphere(ops) => ops.filter(values, degree),
        }
    }

    /// Relative L² size of the upper quarter of the resolved spectrum (plus,
    /// on S², anything outside it). Values above ~1e-3 indicate the field is
    /// close to the grid's resolution limit.
    pub fn spectral_tail(&self, values: &[f64]) -> f64 {
        match &self.backend {
            Backend::Circle(ops) => ops.spectral_tail(values),
            Backend::Sphere(ops) => ops.spectral_tail(values, &self.weights),
        }
    }

    pub fn interpolant(&self, values: &[f64]) -> Interpolant {
        assert_eq!(values.len(), self.len(), "field length does not match grid");
        match &self.backend {
            Backend::Circle(ops) => Interpolant(InterpKind::Circle(ops.interpolant(values))),
            Backend::Sphere(ops) => Interpolant(InterpKind::Sphere(ops.interpolant(values))),
        }
    }

    /// Convert an ambient point of length `n + 1` into the internal 3-vector.
    pub fn embed(&self, z: &[f64]) -> Result<[f64; 3]> {
        if z.len() != self.ambient() {
            return Err(GcfError::param(format!(
                "point has {} components, expected {}",
                z.len(),
                self.ambient()
            )));
        }
        let mut out = [0.0; 3];
        out[..z.len()].copy_from_slice(z);
        Ok(out)
    }

    /// `⟨z, x_i⟩` for every node.
    pub fn linear_values(&self, z: &[f64]) -> Result<Vec<f64>> {
        let z = self.embed(z)?;
        Ok(self.nodes.iter().map(|x| x[0] * z[0] + x[1] * z[1] + x[2] * z[2]).collect())
    }
}

/// Area of the unit sphere S^n for n ∈ {0, 1, 2}.
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        0 => 2.0,
        1 => 2.0 * PI,
        2 => 4.0 * PI,
        _ => panic!("sphere_area only covers n <= 2"),
    }
}

/// Volume of the unit ball in R^{n+1}, `ω_n / (n+1)`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    sphere_area(dim) / (dim as f64 + 1.0)
}

pub fn build_grid(dim: usize, resolution: Resolution) -> Result<Arc<SphereGrid>> {
    if resolution.dim() != dim {
        return Err(GcfError::param(format!(
            "resolution {resolution:?} does not describe S^{dim}"
        )));
    }
    SphereGrid::new(resolution)
}

#[derive(Debug, Clone)]
enum InterpKind {
    Circle(circle::CircleInterpolant),
    Sphere(s2::SphereInterpolant),
}

/// Evaluator for a nodal field at arbitrary unit directions; exact at nodes.
#[derive(Debug, Clone)]
pub struct Interpolant(InterpKind);

impl Interpolant {
    /// Evaluate at a unit direction (3-vector; third component ignored on S¹).
    pub fn eval(&self, x: [f64; 3]) -> f64 {
        match &self.0 {
            InterpKind::Circle(c) => c.eval_angle(x[1].atan2(x[0])),
            InterpKind::Sphere(s) => s.eval(x),
        }
    }
}

/// One real value per grid node.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<SphereGrid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GcfError::param(format!(
                "field has {} values but the grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn from_fn(grid: Arc<SphereGrid>, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn integral(&self) -> f64 {
        self.grid.integrate_values(&self.values)
    }

    pub fn mean(&self) -> f64 {
        self.grid.mean_values(&self.values)
    }
}

/// Symmetric tensor per node in the orthonormal frame.
#[derive(Debug, Clone)]
pub struct FrameTensorField {
    grid: Arc<SphereGrid>,
    data: Vec<Sym2>,
}

impl FrameTensorField {
    pub fn new(grid: Arc<SphereGrid>, data: Vec<Sym2>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(GcfError::param("tensor field length does not match grid"));
        }
        Ok(FrameTensorField { grid, data })
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn data(&self) -> &[Sym2] {
        &self.data
    }
}

fn same_grid(grid: &SphereGrid, field: &ScalarField) -> Result<()> {
    if std::ptr::eq(grid, field.grid.as_ref()) || grid.resolution == field.grid.resolution {
        Ok(())
    } else {
        Err(GcfError::GridMismatch)
    }
}

pub fn integrate(grid: &SphereGrid, field: &ScalarField) -> Result<f64> {
    same_grid(grid, field)?;
    Ok(grid.integrate_values(&field.values))
}

pub fn covariant_hessian(grid: &SphereGrid, field: &ScalarField) -> Result<FrameTensorField> {
    same_grid(grid, field)?;
    let d = grid.derivatives(&field.values);
    FrameTensorField::new(field.grid.clone(), d.hess)
}

pub fn gradient_norm(grid: &SphereGrid, field: &ScalarField) -> Result<ScalarField> {
    same_grid(grid, field)?;
    let d = grid.derivatives(&field.values);
    let values = d.grad.iter().map(|g| g[0].hypot(g[1])).collect();
    ScalarField::new(field.grid.clone(), values)
}

pub fn eval_direction(grid: &SphereGrid, field: &ScalarField, x: &[f64]) -> Result<f64> {
    same_grid(grid, field)?;
    let p = grid.embed(x)?;
    let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(GcfError::param(format!("direction has norm {norm}, expected 1")));
    }
    Ok(grid.interpolant(&field.values).eval(p))
}
