use std::f64::consts::PI;
use std::sync::Arc;

use gcf_core::entropy::entropy_point;
use gcf_core::montecarlo::{entropy_mass_center_residual, mass_center_quadrature, mc_log_integral, mc_mass_center};
use gcf_core::shapes::{make_shape, ShapeSpec};
use gcf_core::{build_grid, ConvexBody, Resolution, SphereGrid};

fn grid(dim: usize) -> Arc<SphereGrid> {
    build_grid(dim, Resolution::standard(dim).unwrap()).unwrap()
}

#[test]
fn ellipse_log_integral_matches_closed_form_and_quadrature() {
    let a: f64 = 1.3;
    let body = make_shape(grid(1), &ShapeSpec::Ellipsoid { semiaxes: vec![a, 1.0 / a] }).unwrap();
    let quad = body.grid().integrate_by(|i| body.support()[i].ln());
    let exact = 2.0 * PI * ((a + 1.0 / a) / 2.0).ln();
    assert!((quad - exact).abs() < 1e-12);
    let mc = mc_log_integral(&body, &[0.0, 0.0], 200_000, 17).unwrap();
    assert!(mc.z_score(quad) < 3.0, "{mc:?} vs {quad}");
}

#[test]
fn ball_of_radius_two_on_the_sphere() {
    let body = make_shape(grid(2), &ShapeSpec::Ball { radius: 2.0, center: vec![] }).unwrap();
    let mc = mc_log_integral(&body, &[0.0; 3], 100_000, 5).unwrap();
    assert!(mc.z_score(4.0 * PI * 2f64.ln()) < 3.0, "{mc:?}");
}

#[test]
fn mass_center_vanishes_only_at_the_entropy_point() {
    let c = [0.3, 0.0, 0.0];
    let body = make_shape(grid(2), &ShapeSpec::Ball { radius: 1.0, center: c.to_vec() }).unwrap();
    let at_ze = entropy_mass_center_residual(&body, 200_000, 8).unwrap();
    // About the center the polar body is a ball, so the estimate is exact up to roundoff.
    for comp in &at_ze.components {
        assert!(comp.z_score(0.0) < 3.0 || comp.estimate.abs() < 1e-10, "{at_ze:?}");
    }
    let at_origin = mc_mass_center(&body, &[0.0; 3], 200_000, 8).unwrap();
    assert!(at_origin.norm > 10.0 * at_origin.stderr, "{at_origin:?}");
    let quad = mass_center_quadrature(&body, &[0.0; 3]).unwrap();
    for (m, q) in at_origin.components.iter().zip(&quad) {
        assert!(m.z_score(*q) < 3.0, "{m:?} vs {q}");
    }
}

#[test]
fn symmetric_ellipse_mass_center_is_zero() {
    let body = make_shape(grid(1), &ShapeSpec::Ellipsoid { semiaxes: vec![1.4, 1.0 / 1.4] }).unwrap();
    assert!(entropy_point(&body).unwrap().z.iter().all(|v| v.abs() < 1e-10));
    let m = entropy_mass_center_residual(&body, 100_000, 2).unwrap();
    assert!(m.components.iter().all(|c| c.z_score(0.0) < 3.0), "{m:?}");
}

#[test]
fn estimates_do_not_depend_on_the_thread_count() {
    let body = make_shape(grid(2), &ShapeSpec::RandomValid { seed: 4, magnitude: 0.2, max_degree: 3 }).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| mc_log_integral(&body, &[0.0; 3], 50_000, 21).unwrap())
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
    assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
}

#[test]
fn non_interior_points_are_rejected() {
    let body = ConvexBody::unit_ball(grid(2));
    assert!(mc_log_integral(&body, &[1.2, 0.0, 0.0], 20_000, 1).is_err());
    assert!(mc_mass_center(&body, &[0.0, 0.0, 1.0], 20_000, 1).is_err());
}
