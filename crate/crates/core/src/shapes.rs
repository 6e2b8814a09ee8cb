//! Generators for test and corpus bodies.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::body::ConvexBody;
use crate::error::{GcfError, Result};
use crate::sphere::{real_harmonic, SphereGrid};

/// Relative spectral tail above which a shape is rejected as under-resolved.
pub const UNDER_RESOLVED_TAIL: f64 = 1e-3;
/// Relative spectral tail above which a shape is flagged as close to the grid limit.
pub const ALIASING_WARN_TAIL: f64 = 1e-8;

/// One term `amplitude · Y(degree, order)` of a harmonic perturbation.
///
/// On S¹, `order ≥ 0` selects `cos(kθ)` and `order < 0` selects `sin(kθ)`.
/// On S², `Y` is the Schmidt semi-normalized real harmonic (zonal terms are
/// the Legendre polynomials `P_l(x₃)`), cosine branch for `order ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicTerm {
    pub degree: usize,
    pub order: i64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeSpec {
    /// `u = r + ⟨c, x⟩`; an empty center means the origin.
    Ball { radius: f64, center: Vec<f64> },
    /// Axis-aligned ellipsoid, `u = sqrt(Σ a_i² x_i²)`.
    Ellipsoid { semiaxes: Vec<f64> },
    HarmonicPerturbation { base: f64, terms: Vec<HarmonicTerm> },
    /// Unit ball plus seeded random harmonics of degree `1..=max_degree`,
    /// with amplitudes `magnitude · N(0,1) / l²`. If the result is not
    /// strictly convex the perturbation is halved until it is.
    RandomValid { seed: u64, magnitude: f64, max_degree: usize },
}

/// Harmonic used by [`HarmonicTerm`].
pub fn harmonic(dim: usize, degree: usize, order: i64, x: [f64; 3]) -> f64 {
    if dim == 1 {
        let t = x[1].atan2(x[0]) * degree as f64;
        if order >= 0 {
            t.cos()
        } else {
            t.sin()
        }
    } else {
        let m = order.clamp(-(degree as i64), degree as i64);
        real_harmonic(degree, m, x) * (4.0 * std::f64::consts::PI / (2.0 * degree as f64 + 1.0)).sqrt()
    }
}

fn samples_for(grid: &SphereGrid, spec: &ShapeSpec) -> Result<Vec<f64>> {
    let amb = grid.ambient();
    let dim = grid.dim();
    match spec {
        ShapeSpec::Ball { radius, center } => {
            if !(*radius > 0.0) {
                return Err(GcfError::param(format!("ball radius must be positive, got {radius}")));
            }
            let c = if center.is_empty() { vec![0.0; amb] } else { center.clone() };
            let lin = grid.linear_values(&c)?;
            Ok(lin.iter().map(|l| radius + l).collect())
        }
        ShapeSpec::Ellipsoid { semiaxes } => {
            if semiaxes.len() != amb || semiaxes.iter().any(|a| !(*a > 0.0)) {
                return Err(GcfError::param(format!(
                    "ellipsoid needs {amb} positive semiaxes, got {semiaxes:?}"
                )));
            }
            Ok(grid
                .nodes()
                .iter()
                .map(|x| (0..amb).map(|d| (semiaxes[d] * x[d]).powi(2)).sum::<f64>().sqrt())
                .collect())
        }
        ShapeSpec::HarmonicPerturbation { base, terms } => {
            for t in terms {
                if dim == 2 && t.order.unsigned_abs() as usize > t.degree {
                    return Err(GcfError::param(format!("harmonic order {} exceeds degree {}", t.order, t.degree)));
                }
            }
            Ok(grid
                .nodes()
                .iter()
                .map(|&x| base + terms.iter().map(|t| t.amplitude * harmonic(dim, t.degree, t.order, x)).sum::<f64>())
                .collect())
        }
        ShapeSpec::RandomValid { seed, magnitude, max_degree } => {
            let terms = random_terms(dim, *seed, *magnitude, *max_degree);
            samples_for(grid, &ShapeSpec::HarmonicPerturbation { base: 1.0, terms })
        }
    }
}

fn random_terms(dim: usize, seed: u64, magnitude: f64, max_degree: usize) -> Vec<HarmonicTerm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::new();
    for l in 1..=max_degree {
        let orders: Vec<i64> = if dim == 1 { vec![0, -1] } else { (-(l as i64)..=l as i64).collect() };
        for order in orders {
            let g: f64 = StandardNormal.sample(&mut rng);
            terms.push(HarmonicTerm { degree: l, order, amplitude: magnitude * g / (l * l) as f64 });
        }
    }
    terms
}

/// Build a validated body. Shapes whose samples carry more than
/// [`UNDER_RESOLVED_TAIL`] of their energy in the upper quarter of the
/// grid's spectrum are rejected.
pub fn make_shape(grid: Arc<SphereGrid>, spec: &ShapeSpec) -> Result<ConvexBody> {
    if let ShapeSpec::RandomValid { seed, magnitude, max_degree } = spec {
        let mut m = *magnitude;
        let mut last = None;
        for _ in 0..40 {
            let attempt = ShapeSpec::RandomValid { seed: *seed, magnitude: m, max_degree: *max_degree };
            match build(&grid, &attempt) {
                Ok(b) => return Ok(b),
                Err(e) => last = Some(e),
            }
            m *= 0.5;
        }
        return Err(last.expect("at least one attempt"));
    }
    build(&grid, spec)
}

fn build(grid: &Arc<SphereGrid>, spec: &ShapeSpec) -> Result<ConvexBody> {
    let samples = samples_for(grid, spec)?;
    let tail = grid.spectral_tail(&samples);
    if tail > UNDER_RESOLVED_TAIL {
        return Err(GcfError::UnderResolved { tail, limit: UNDER_RESOLVED_TAIL });
    }
    ConvexBody::from_samples(grid.clone(), samples)
}

/// Warning text when a body is valid but close to the grid's resolution limit.
pub fn aliasing_warning(body: &ConvexBody) -> Option<String> {
    let tail = body.grid().spectral_tail(body.support());
    (tail > ALIASING_WARN_TAIL).then(|| {
        format!("spectral tail {tail:.2e} exceeds {ALIASING_WARN_TAIL:.0e}; refine the grid for accurate curvature")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::volume;
    use crate::sphere::{build_grid, Resolution};

    #[test]
    fn schmidt_zonal_harmonics_are_legendre_polynomials() {
        let x = [0.6, 0.0, 0.8];
        assert!((harmonic(2, 2, 0, x) - (3.0 * 0.64 - 1.0) / 2.0).abs() < 1e-14);
        assert!((harmonic(2, 1, 1, x) - 0.6).abs() < 1e-14);
        assert!((harmonic(2, 1, -1, [0.0, 0.6, 0.8]) - 0.6).abs() < 1e-14);
        let t: f64 = 0.4;
        assert!((harmonic(1, 3, 0, [t.cos(), t.sin(), 0.0]) - (3.0 * t).cos()).abs() < 1e-14);
    }

    #[test]
    fn unit_semiaxes_give_the_unit_ball() {
        let g = build_grid(2, Resolution::Sphere { n_theta: 16, n_phi: 32 }).unwrap();
        let b = make_shape(g, &ShapeSpec::Ellipsoid { semiaxes: vec![1.0, 1.0, 1.0] }).unwrap();
        assert!(b.support().iter().all(|u| (u - 1.0).abs() < 1e-13));
    }

    #[test]
    fn random_shapes_are_reproducible_and_valid() {
        let g = build_grid(2, Resolution::Sphere { n_theta: 16, n_phi: 32 }).unwrap();
        let spec = ShapeSpec::RandomValid { seed: 7, magnitude: 0.3, max_degree: 4 };
        let a = make_shape(g.clone(), &spec).unwrap();
        let b = make_shape(g, &spec).unwrap();
        assert_eq!(a.support(), b.support());
        assert!(volume(&a) > 0.0);
    }

    #[test]
    fn thin_ellipse_is_flagged_or_rejected() {
        let g = build_grid(1, Resolution::Circle { n: 64 }).unwrap();
        match make_shape(g, &ShapeSpec::Ellipsoid { semiaxes: vec![2.0, 0.1] }) {
            Ok(b) => assert!(aliasing_warning(&b).is_some()),
            Err(e) => assert!(matches!(e, GcfError::UnderResolved { .. } | GcfError::Convexity { .. })),
        }
    }
}
