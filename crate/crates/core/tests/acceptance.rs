//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test --release -p gcf-core --test acceptance`.

use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use gcf_core::body::{normalize_volume, translated_support};
use gcf_core::corpus::{corpus, corpus_entry};
use gcf_core::entropy::{entropy_point, entropy_report};
use gcf_core::flow::{
    dissipation_identity_residuals, harnack_monitor, monitor_bounds, run, stable_dt, FlowConfig, FlowRun, Termination,
};
use gcf_core::montecarlo::{mc_log_integral, mc_mass_center};
use gcf_core::shapes::{harmonic, make_shape, HarmonicTerm, ShapeSpec};
use gcf_core::soliton::{j1_first_variation, j1_value, project_admissible, soliton_report, stability_form};
use gcf_core::sphere::{build_grid, unit_ball_volume};
use gcf_core::{ConvexBody, Resolution, ScalarField, SphereGrid};

type Outcome = Result<String, String>;

fn grid(dim: usize) -> Arc<SphereGrid> {
    build_grid(dim, Resolution::standard(dim).unwrap()).unwrap()
}

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

/// Band-limited random field: standard normal amplitudes on every harmonic
/// of degree `≤ degree`.
fn random_field(grid: &Arc<SphereGrid>, degree: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let dim = grid.dim();
    let mut terms = Vec::new();
    for l in 0..=degree {
        let orders: Vec<i64> = if dim == 1 {
            if l == 0 { vec![0] } else { vec![0, -1] }
        } else {
            (-(l as i64)..=l as i64).collect()
        };
        for m in orders {
            let a: f64 = StandardNormal.sample(rng);
            terms.push((l, m, a));
        }
    }
    grid.nodes().iter().map(|&x| terms.iter().map(|&(l, m, a)| a * harmonic(dim, l, m, x)).sum()).collect()
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    for dim in [1, 2] {
        let cfg = FlowConfig { soliton_tol: None, output_stride: 1, ..FlowConfig::normalized(5.0) };
        let r = run(&ConvexBody::unit_ball(grid(dim)), &cfg).map_err(err)?;
        ensure(r.termination == Termination::TimeLimit, format!("n={dim}: {:?}", r.termination))?;
        for row in &r.trace.rows {
            worst = worst.max((row.max_u - 1.0).abs()).max((row.min_u - 1.0).abs());
        }
    }
    ensure(worst <= 1e-10, format!("max |u − 1| = {worst:.3e}"))?;
    Ok(format!("max |u − 1| over t ∈ [0, 5] = {worst:.2e}"))
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_t_rel: f64 = 0.0;
    for dim in [1, 2] {
        let n = dim as f64;
        let t_end = 0.8 / (n + 1.0);
        let cfg = FlowConfig { output_stride: 1, record_fields: true, ..FlowConfig::unnormalized(t_end) };
        let r = run(&ConvexBody::unit_ball(grid(dim)), &cfg).map_err(err)?;
        ensure(r.termination == Termination::TimeLimit, format!("n={dim}: {:?}", r.termination))?;
        for row in &r.trace.rows {
            let exact = (1.0 - (n + 1.0) * row.t).powf(1.0 / (n + 1.0));
            worst = worst.max((row.max_u - exact).abs()).max((row.min_u - exact).abs());
        }
        let h = harnack_monitor(&r.trace).map_err(err)?;
        let rel = (h.extinction_estimate * (n + 1.0) - 1.0).abs();
        worst_t_rel = worst_t_rel.max(rel);
    }
    ensure(worst <= 1e-7, format!("max |u − R(t)| = {worst:.3e}"))?;
    ensure(worst_t_rel <= 0.01, format!("extinction estimate off by {:.3}%", 100.0 * worst_t_rel))?;
    Ok(format!("max |u − R(t)| = {worst:.2e}; extinction time within {:.2e} relative", worst_t_rel))
}

fn criterion_3() -> Outcome {
    let mut min_slack = f64::INFINITY;
    let mut min_nonball_e = f64::INFINITY;
    for dim in [1, 2] {
        for e in corpus(dim).map_err(err)? {
            let rep = entropy_report(&e.body).map_err(err)?;
            let (ec, en, ef) = (rep.chow_entropy, rep.entropy, rep.firey_entropy);
            min_slack = min_slack.min(ec - en).min(en - ef).min(ef);
            if e.index == 0 {
                ensure(en.abs() <= 1e-12, format!("ball fixture has E = {en:e}"))?;
            } else {
                min_nonball_e = min_nonball_e.min(en);
            }
        }
    }
    ensure(min_slack >= -1e-8, format!("chain slack {min_slack:.3e}"))?;
    ensure(min_nonball_e > 1e-8, format!("a non-ball body has E = {min_nonball_e:.3e}"))?;
    Ok(format!("40 bodies: chain slack ≥ {min_slack:.2e}; smallest non-ball E = {min_nonball_e:.2e}"))
}

/// Five normalized runs of n = 2 corpus bodies, shared by criteria 4, 7 and 9.
fn corpus_runs() -> Result<Vec<FlowRun>, String> {
    let g = grid(2);
    (1..=5)
        .map(|i| {
            let e = corpus_entry(g.clone(), i).map_err(err)?;
            run(&e.body, &FlowConfig::normalized(20.0)).map_err(err)
        })
        .collect()
}

fn criterion_4(runs: &[FlowRun]) -> Outcome {
    let mut mono = f64::INFINITY;
    let mut integrated = f64::INFINITY;
    for r in runs {
        for w in r.trace.rows.windows(2) {
            mono = mono.min(w[0].entropy + 1e-9 - w[1].entropy);
        }
        let rep = monitor_bounds(&r.trace);
        integrated = integrated.min(rep.entry("dissipation_inequality").unwrap().worst_margin);
    }
    ensure(mono >= 0.0, format!("entropy increased by {:.3e}", 1e-9 - mono))?;
    ensure(integrated >= 0.0, format!("integrated inequality margin {integrated:.3e}"))?;
    Ok(format!("5 runs: monotone margin ≥ {mono:.2e}; integrated margin (incl. 1e-6 slack) ≥ {integrated:.2e}"))
}

fn criterion_5() -> Outcome {
    let g = grid(1);
    let spec = ShapeSpec::HarmonicPerturbation {
        base: 1.0,
        terms: vec![HarmonicTerm { degree: 3, order: 0, amplitude: 0.1 }],
    };
    let body = normalize_volume(&make_shape(g, &spec).map_err(err)?).map_err(err)?;
    let dt = stable_dt(&body, 0.25);
    let trace_for = |dt: f64| {
        let cfg = FlowConfig { fixed_dt: Some(dt), output_stride: 5, soliton_tol: None, ..FlowConfig::normalized(1.0) };
        run(&body, &cfg).map_err(err).and_then(|r| dissipation_identity_residuals(&r.trace).map_err(err))
    };
    let coarse = trace_for(dt)?;
    let fine = trace_for(0.5 * dt)?;
    let max_coarse = coarse.iter().map(|r| r.1).fold(0.0, f64::max);
    // Compare at the coarse row times, which are also fine row times.
    let mut max_fine: f64 = 0.0;
    let mut matched = 0;
    for &(t, _) in &coarse {
        if let Some(&(_, r)) = fine.iter().find(|(tf, _)| (tf - t).abs() <= 1e-9) {
            max_fine = max_fine.max(r);
            matched += 1;
        }
    }
    ensure(matched == coarse.len(), format!("only {matched}/{} coarse times found in the fine run", coarse.len()))?;
    let ratio = max_coarse / max_fine;
    ensure(max_coarse <= 1e-4, format!("residual {max_coarse:.3e}"))?;
    ensure(ratio >= 4.0, format!("halving dt reduced the residual by {ratio:.3}×"))?;
    Ok(format!("residual {max_coarse:.2e}; halving dt reduces it {ratio:.2}×"))
}

fn criterion_6() -> Outcome {
    let g = grid(2);
    let b = make_shape(g, &ShapeSpec::Ellipsoid { semiaxes: vec![1.2, 1.0, 1.0 / 1.2] }).map_err(err)?;
    let b = normalize_volume(&b).map_err(err)?;
    let cfg = FlowConfig { soliton_tol: Some(1e-5), ..FlowConfig::normalized(20.0) };
    let r = run(&b, &cfg).map_err(err)?;
    let res = r.trace.rows.last().unwrap().soliton_residual;
    let dev = r.body.support().iter().map(|u| (u - 1.0).abs()).fold(0.0, f64::max);
    ensure(r.termination == Termination::Soliton && res <= 1e-5, format!("{:?}, residual {res:.3e}", r.termination))?;
    ensure(dev <= 1e-3, format!("‖u − 1‖∞ = {dev:.3e}"))?;
    Ok(format!("residual {res:.2e} at t = {:.3}; ‖u − 1‖∞ = {dev:.2e}", r.final_time()))
}

fn criterion_7(runs: &[FlowRun]) -> Outcome {
    let mut margins = [f64::INFINITY; 3];
    for r in runs {
        let rep = monitor_bounds(&r.trace);
        for (k, name) in ["gradient_estimate", "u_over_k", "newton_inequality"].iter().enumerate() {
            let e = rep.entry(name).unwrap();
            ensure(e.applicable, format!("{name} not applicable"))?;
            margins[k] = margins[k].min(e.worst_margin);
        }
    }
    let mut harnack = f64::INFINITY;
    let ellipse = make_shape(grid(1), &ShapeSpec::Ellipsoid { semiaxes: vec![1.2, 1.0 / 1.2] }).map_err(err)?;
    let starts = [
        (ConvexBody::unit_ball(grid(1)), 0.9 * 0.5),
        (ConvexBody::unit_ball(grid(2)), 0.9 / 3.0),
        (normalize_volume(&ellipse).map_err(err)?, 0.9 * 0.5),
    ];
    for (b, t_end) in &starts {
        let cfg = FlowConfig { record_fields: true, ..FlowConfig::unnormalized(*t_end) };
        let r = run(b, &cfg).map_err(err)?;
        let h = harnack_monitor(&r.trace).map_err(err)?;
        ensure(h.lower_pass, format!("Harnack lower constant {:.3e}", h.lower_constant))?;
        harnack = harnack.min(h.monotone_margin);
    }
    ensure(margins.iter().all(|m| *m >= 0.0), format!("monitor margins {margins:?}"))?;
    ensure(harnack >= 0.0, format!("Harnack margin {harnack:.3e}"))?;
    Ok(format!(
        "gradient {:.2e}, u/K {:.2e}, Newton {:.2e}, Harnack {:.2e} (margins incl. slack)",
        margins[0], margins[1], margins[2], harnack
    ))
}

fn criterion_8() -> Outcome {
    let bodies = corpus(2).map_err(err)?;
    let mut worst_z: f64 = 0.0;
    let mut worst_mass: f64 = 0.0;
    for e in bodies.iter().take(10) {
        let zero = vec![0.0; 3];
        let uz = translated_support(&e.body, &zero).map_err(err)?;
        let quad = e.body.grid().integrate_by(|i| uz[i].ln());
        let mc = mc_log_integral(&e.body, &zero, 100_000, 1_000 + e.index as u64).map_err(err)?;
        worst_z = worst_z.max(mc.z_score(quad));
        let ep = entropy_point(&e.body).map_err(err)?;
        let mass = mc_mass_center(&e.body, &ep.z, 100_000, 2_000 + e.index as u64).map_err(err)?;
        if mass.norm > 0.0 {
            worst_mass = worst_mass.max(mass.norm / mass.stderr);
        }
    }
    ensure(worst_z <= 3.0, format!("weighted-volume z-score {worst_z:.3}"))?;
    ensure(worst_mass <= 3.0, format!("mass-center residual {worst_mass:.3}σ"))?;
    Ok(format!("10 bodies: max z-score {worst_z:.2}; mass-center residual ≤ {worst_mass:.2}σ"))
}

fn criterion_9(runs: &[FlowRun]) -> Outcome {
    let mut dual_margin = f64::INFINITY;
    let mut mass: f64 = 0.0;
    for r in runs {
        ensure(r.termination == Termination::Soliton, format!("run ended with {:?}", r.termination))?;
        let rep = soliton_report(&r.body, true, r.final_time(), r.steps).map_err(err)?;
        dual_margin = dual_margin.min(rep.dual_volume_at_origin - unit_ball_volume(2));
        mass = mass.max(rep.mass_center);
    }
    ensure(dual_margin >= -1e-6, format!("V(Ω*₀) − V(B(1)) = {dual_margin:.3e}"))?;
    ensure(mass <= 1e-6, format!("max_j |⨏ x_j/u| = {mass:.3e}"))?;
    Ok(format!("V(Ω*₀) − V(B(1)) ≥ {dual_margin:.2e}; max_j |⨏ x_j/u| ≤ {mass:.2e}"))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = f64::INFINITY;
    for dim in [1, 2] {
        let g = grid(dim);
        let n = dim as f64;
        for _ in 0..50 {
            let (v, overlap) = project_admissible(&g, &random_field(&g, 8, &mut rng));
            ensure(overlap <= 1e-12, format!("projection overlap {overlap:.3e}"))?;
            let sq = g.mean_values(&v.iter().map(|x| x * x).collect::<Vec<_>>());
            let eta = ScalarField::new(g.clone(), v).map_err(err)?;
            // λ₂ − (n+1) = 2(n+1) − (n+1) = n + 1.
            worst = worst.min(stability_form(&eta) - (n + 1.0 - 1e-6) * sq);
        }
        let x1 = ScalarField::from_fn(g.clone(), |x| x[0]);
        let q1 = stability_form(&x1);
        ensure(q1 < 0.0, format!("Q(x₁) = {q1:e}"))?;
        let c = 0.8;
        let qc = stability_form(&ScalarField::from_fn(g.clone(), |_| c));
        ensure((qc - (n + 1.0).powi(2) * c * c).abs() <= 1e-9, format!("Q(c) = {qc}"))?;
    }
    ensure(worst >= 0.0, format!("stability margin {worst:.3e}"))?;
    Ok(format!("100 admissible η: Q(η) − (n+1 − 1e-6)⨏η² ≥ {worst:.2e}; Q(x₁) < 0; Q(c) exact"))
}

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let dim = 1 + k % 2;
        let g = grid(dim);
        let body = make_shape(g.clone(), &ShapeSpec::RandomValid { seed: 300 + k as u64, magnitude: 0.2, max_degree: 4 })
            .map_err(err)?;
        let rho = random_field(&g, 4, &mut rng);
        let field = ScalarField::new(g.clone(), rho.clone()).map_err(err)?;
        let exact = j1_first_variation(&body, &field).map_err(err)?;
        let eta = 1e-5;
        let j = |s: f64| -> Result<f64, String> {
            let v = body.support().iter().zip(&rho).map(|(u, r)| u + s * r).collect();
            Ok(j1_value(&ConvexBody::new(g.clone(), v).map_err(err)?))
        };
        let fd = (j(eta)? - j(-eta)?) / (2.0 * eta);
        worst = worst.max((exact - fd).abs());
    }
    let mut at_ball: f64 = 0.0;
    for dim in [1, 2] {
        let g = grid(dim);
        let rho = ScalarField::new(g.clone(), random_field(&g, 6, &mut rng)).map_err(err)?;
        at_ball = at_ball.max(j1_first_variation(&ConvexBody::unit_ball(g), &rho).map_err(err)?.abs());
    }
    ensure(worst <= 1e-7, format!("finite-difference mismatch {worst:.3e}"))?;
    ensure(at_ball <= 1e-9, format!("first variation at u ≡ 1 is {at_ball:.3e}"))?;
    Ok(format!("max |δJ₁ − FD| = {worst:.2e}; |δJ₁| at u ≡ 1 = {at_ball:.2e}"))
}

fn main() {
    let start = Instant::now();
    let runs = corpus_runs();
    let shared = |f: fn(&[FlowRun]) -> Outcome| -> Outcome {
        match &runs {
            Ok(r) => f(r),
            Err(e) => Err(format!("corpus runs failed: {e}")),
        }
    };
    let results: Vec<(&str, Outcome)> = vec![
        ("fixed point", criterion_1()),
        ("shrinking ball", criterion_2()),
        ("entropy chain", criterion_3()),
        ("entropy monotonicity", shared(criterion_4)),
        ("dissipation identity", criterion_5()),
        ("convergence to round", criterion_6()),
        ("monitors", shared(criterion_7)),
        ("oracle equivalence", criterion_8()),
        ("soliton reports", shared(criterion_9)),
        ("stability", criterion_10()),
        ("variational consistency", criterion_11()),
    ];
    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("criterion {:>2} {:<24} PASS  {detail}", i + 1, name),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} {:<24} FAIL  {detail}", i + 1, name);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed ({:.1?})", results.len() - failed, start.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
