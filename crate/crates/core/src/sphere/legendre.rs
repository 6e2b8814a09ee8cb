//! Gauss–Legendre nodes and fully normalized associated Legendre functions.
//!
//! Normalization: `∫_{-1}^{1} P̄_l^m(x)² dx = 1`, no Condon–Shortley phase.

use std::f64::consts::PI;

/// Gauss–Legendre nodes on [-1, 1] in *descending* order (so that the
/// colatitudes `acos(x)` ascend), with matching weights.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `P̄_l^m(x)` for `l = m..=lmax` at one abscissa; `s = sqrt(1 - x²)`.
pub fn assoc_legendre_column(lmax: usize, m: usize, x: f64, s: f64, out: &mut Vec<f64>) {
    out.clear();
    if m > lmax {
        return;
    }
    let mut pmm = (0.5f64).sqrt();
    for k in 1..=m {
        let kf = k as f64;
        pmm *= ((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * s;
    }
    out.push(pmm);
    if m == lmax {
        return;
    }
    let mf = m as f64;
    out.push((2.0 * mf + 3.0).sqrt() * x * pmm);
    for l in m + 2..=lmax {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let lm1 = lf - 1.0;
        let b = ((lm1 * lm1 - mf * mf) / (4.0 * lm1 * lm1 - 1.0)).sqrt();
        let next = a * (x * out[l - m - 1] - b * out[l - m - 2]);
        out.push(next);
    }
}

/// `dP̄_l^m(cos θ)/dθ` from a column produced by [`assoc_legendre_column`].
pub fn theta_derivative_column(lmax: usize, m: usize, x: f64, s: f64, p: &[f64], out: &mut Vec<f64>) {
    out.clear();
    let mf = m as f64;
    for l in m..=lmax {
        let lf = l as f64;
        let prev = if l > m { p[l - m - 1] } else { 0.0 };
        let c = ((2.0 * lf + 1.0) * (lf * lf - mf * mf) / (2.0 * lf - 1.0)).sqrt();
        out.push((lf * x * p[l - m] - c * prev) / s);
    }
}

/// Real orthonormal spherical harmonic on S² (w.r.t. the area measure).
///
/// `m ≥ 0` gives the cosine branch, `m < 0` the sine branch of order `|m|`.
pub fn real_harmonic(l: usize, m: i64, point: [f64; 3]) -> f64 {
    let ma = m.unsigned_abs() as usize;
    assert!(ma <= l, "harmonic order exceeds degree");
    let x = point[2].clamp(-1.0, 1.0);
    let s = (point[0] * point[0] + point[1] * point[1]).sqrt();
    let phi = point[1].atan2(point[0]);
    let mut col = Vec::with_capacity(l + 1);
    assoc_legendre_column(l, ma, x, s, &mut col);
    let p = col[l - ma];
    if m == 0 {
        p / (2.0 * PI).sqrt()
    } else if m > 0 {
        p * (ma as f64 * phi).cos() / PI.sqrt()
    } else {
        p * (ma as f64 * phi).sin() / PI.sqrt()
    }
}
