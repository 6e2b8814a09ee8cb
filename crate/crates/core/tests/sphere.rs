use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_abs_diff_eq;
use gcf_core::shapes::harmonic;
use gcf_core::sphere::{eval_direction, gradient_norm, integrate};
use gcf_core::{build_grid, Resolution, ScalarField, SphereGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn s2(nt: usize, np: usize) -> Arc<SphereGrid> {
    build_grid(2, Resolution::Sphere { n_theta: nt, n_phi: np }).unwrap()
}

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / r, v[1] / r, v[2] / r]
}

#[test]
fn log_integral_matches_closed_form_and_monte_carlo() {
    let g = s2(24, 48);
    let a: f64 = 0.3;
    let f = ScalarField::from_fn(g.clone(), |x| (1.0 + a * x[2]).ln());
    let q = integrate(&g, &f).unwrap();

    // ∫ log(1 + a t) dθ = 2π ∫_{-1}^{1} log(1 + a t) dt
    let exact = 2.0 * PI * (((1.0 + a) * (1.0 + a).ln() - (1.0 - a) * (1.0 - a).ln()) / a - 2.0);
    assert_abs_diff_eq!(q, exact, epsilon = 1e-10);

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let n = 200_000;
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let v = (1.0 + a * random_unit(&mut rng)[2]).ln();
        s += v;
        s2 += v * v;
    }
    let mean = s / n as f64;
    let se = ((s2 / n as f64 - mean * mean) / (n as f64 - 1.0)).sqrt();
    assert!((q / (4.0 * PI) - mean).abs() <= 3.0 * se, "{q} {mean} {se}");
}

#[test]
fn interpolation_matches_direct_harmonic_synthesis() {
    let g = s2(16, 32);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut terms = Vec::new();
    for l in 0..=g.degree() {
        for m in -(l as i64)..=(l as i64) {
            terms.push((l, m, rng.sample::<f64, _>(StandardNormal) / (1.0 + l as f64)));
        }
    }
    let synth = |x: [f64; 3]| terms.iter().map(|&(l, m, c)| c * harmonic(2, l, m, x)).sum::<f64>();
    let f = ScalarField::from_fn(g.clone(), synth);
    for _ in 0..50 {
        let x = random_unit(&mut rng);
        assert_abs_diff_eq!(eval_direction(&g, &f, &x).unwrap(), synth(x), epsilon = 1e-8);
    }
}

#[test]
fn circle_interpolation_matches_trigonometric_synthesis() {
    let g = build_grid(1, Resolution::Circle { n: 64 }).unwrap();
    let synth = |t: f64| 1.0 + 0.3 * (3.0 * t).cos() - 0.1 * (7.0 * t).sin() + 0.05 * (20.0 * t).cos();
    let f = ScalarField::from_fn(g.clone(), |x| synth(x[1].atan2(x[0])));
    for k in 0..40 {
        let t = 0.157 * k as f64 + 0.01;
        assert_abs_diff_eq!(eval_direction(&g, &f, &[t.cos(), t.sin()]).unwrap(), synth(t), epsilon = 1e-12);
    }
}

#[test]
fn gradient_norm_of_linear_function_on_the_circle() {
    let g = build_grid(1, Resolution::Circle { n: 32 }).unwrap();
    let f = ScalarField::from_fn(g.clone(), |x| 0.4 * x[0] - 0.3 * x[1]);
    let gn = gradient_norm(&g, &f).unwrap();
    for (x, v) in g.nodes().iter().zip(gn.values()) {
        // |d/dθ (0.4 cos θ − 0.3 sin θ)| = |0.4 sin θ + 0.3 cos θ|
        assert_abs_diff_eq!(*v, (0.4 * x[1] + 0.3 * x[0]).abs(), epsilon = 1e-12);
    }
}

#[test]
fn operators_are_deterministic() {
    let g = s2(20, 40);
    let f = ScalarField::from_fn(g.clone(), |x| (x[0] + 0.5 * x[1] * x[2]).exp());
    let a = g.derivatives(f.values());
    let b = g.derivatives(f.values());
    let bits = |d: &gcf_core::sphere::Derivatives| {
        d.hess.iter().flat_map(|h| [h.xx.to_bits(), h.xy.to_bits(), h.yy.to_bits()]).collect::<Vec<_>>()
    };
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(integrate(&g, &f).unwrap().to_bits(), integrate(&g, &f).unwrap().to_bits());
}
