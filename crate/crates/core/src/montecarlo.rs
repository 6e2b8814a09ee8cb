//! Monte Carlo estimates over the polar body `Ω⁰_z = {r x : r u_z(x) ≤ 1}`.
//!
//! Samples are drawn uniformly in a spherical shell by inverse-CDF on the
//! radial density `∝ rⁿ`. The sample range is split into fixed-size chunks,
//! each with its own ChaCha stream, and chunk statistics are merged in chunk
//! order, so results depend only on the seed and sample count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::body::{translate, translated_support, ConvexBody};
use crate::entropy::entropy_point;
use crate::error::{GcfError, Result};
use crate::sphere::{Interpolant, SphereGrid};

/// Smallest sample count accepted by the estimators.
pub const MIN_SAMPLES: usize = 10_000;
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl McEstimate {
    /// `|estimate − reference| / stderr` (0 when both coincide exactly).
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = (self.estimate - reference).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.stderr
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct McVectorEstimate {
    pub components: Vec<McEstimate>,
    pub norm: f64,
    /// `sqrt(Σ stderr_j²)`.
    pub stderr: f64,
}

/// Running moments with a deterministic pairwise merge.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0.0 {
            return other;
        }
        if other.n == 0.0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * other.n / n,
            m2: self.m2 + other.m2 + d * d * self.n * other.n / n,
        }
    }

    fn estimate(&self, region_volume: f64) -> McEstimate {
        let var = if self.n > 1.0 { self.m2 / (self.n - 1.0) } else { 0.0 };
        McEstimate {
            estimate: region_volume * self.mean,
            stderr: region_volume * (var / self.n).sqrt(),
            samples: self.n as usize,
        }
    }
}

struct Shell {
    dim: usize,
    r_in: f64,
    r_out: f64,
}

impl Shell {
    fn volume(&self) -> f64 {
        let p = self.dim as i32 + 1;
        crate::sphere::sphere_area(self.dim) * (self.r_out.powi(p) - self.r_in.powi(p)) / p as f64
    }

    /// Uniform point: unit direction and radius.
    fn sample(&self, rng: &mut ChaCha8Rng) -> ([f64; 3], f64) {
        let dir = if self.dim == 1 {
            let t = rng.random::<f64>() * std::f64::consts::TAU;
            [t.cos(), t.sin(), 0.0]
        } else {
            // Archimedes: x₃ uniform on [−1, 1] gives the area measure.
            let z = 2.0 * rng.random::<f64>() - 1.0;
            let t = rng.random::<f64>() * std::f64::consts::TAU;
            let s = (1.0 - z * z).max(0.0).sqrt();
            [s * t.cos(), s * t.sin(), z]
        };
        let p = self.dim as f64 + 1.0;
        let a = self.r_in.powf(p);
        let b = self.r_out.powf(p);
        let r = (a + rng.random::<f64>() * (b - a)).powf(1.0 / p);
        (dir, r)
    }
}

fn run_chunks<const K: usize>(
    samples: usize,
    seed: u64,
    shell: &Shell,
    f: impl Fn([f64; 3], f64) -> [f64; K] + Sync,
) -> [Moments; K] {
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<[Moments; K]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut m = [Moments::default(); K];
            for _ in 0..count {
                let (x, r) = shell.sample(&mut rng);
                let v = f(x, r);
                for k in 0..K {
                    m[k].push(v[k]);
                }
            }
            m
        })
        .collect();
    // Pairwise merge in chunk order.
    fn reduce<const K: usize>(parts: &[[Moments; K]]) -> [Moments; K] {
        match parts.len() {
            0 => [Moments::default(); K],
            1 => parts[0],
            n => {
                let (a, b) = (reduce(&parts[..n / 2]), reduce(&parts[n / 2..]));
                std::array::from_fn(|k| a[k].merge(b[k]))
            }
        }
    }
    reduce(&partial)
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(GcfError::param(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    Ok(())
}

fn support_about(body: &ConvexBody, z: &[f64]) -> Result<(Vec<f64>, Interpolant)> {
    let uz = translate(body, z)?.into_support();
    let interp = body.grid().interpolant(&uz);
    Ok((uz, interp))
}

fn extremes(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Signed weighted volume `(∫_{B(1)∖Ω⁰_z} − ∫_{Ω⁰_z∖B(1)}) |w|^{−(n+1)} dw`,
/// which equals `∫ log u_z dθ`.
///
/// Samples are drawn in the shell `min(1, 1/max u_z) ≤ |w| ≤ max(1, 1/min u_z)`;
/// both sets lie inside it.
pub fn mc_log_integral(body: &ConvexBody, z: &[f64], samples: usize, seed: u64) -> Result<McEstimate> {
    check_samples(samples)?;
    let (uz, interp) = support_about(body, z)?;
    let (lo, hi) = extremes(&uz);
    let dim = body.dim();
    let shell = Shell { dim, r_in: (1.0 / hi).min(1.0), r_out: (1.0 / lo).max(1.0) };
    let p = dim as i32 + 1;
    let m = run_chunks::<1>(samples, seed, &shell, |x, r| {
        let in_ball = r <= 1.0;
        let in_polar = r * interp.eval(x) <= 1.0;
        let sign = match (in_ball, in_polar) {
            (true, false) => 1.0,
            (false, true) => -1.0,
            _ => 0.0,
        };
        [sign * r.powi(-p)]
    });
    if m[0].n == 0.0 {
        return Err(GcfError::Statistical("no samples landed in the sampling region".into()));
    }
    Ok(m[0].estimate(shell.volume()))
}

/// `∫_{Ω⁰_z} w / |w|^{n+1} dw` by Monte Carlo. The ball of radius
/// `1/max u_z` inside `Ω⁰_z` contributes zero by symmetry and is skipped.
pub fn mc_mass_center(body: &ConvexBody, z: &[f64], samples: usize, seed: u64) -> Result<McVectorEstimate> {
    check_samples(samples)?;
    let (uz, interp) = support_about(body, z)?;
    let (lo, hi) = extremes(&uz);
    let dim = body.dim();
    let shell = Shell { dim, r_in: 1.0 / hi, r_out: 1.0 / lo };
    let n = dim as i32;
    let m = run_chunks::<3>(samples, seed, &shell, |x, r| {
        if r * interp.eval(x) <= 1.0 {
            let w = r.powi(-n);
            [x[0] * w, x[1] * w, x[2] * w]
        } else {
            [0.0; 3]
        }
    });
    let vol = shell.volume();
    let components: Vec<McEstimate> = m[..dim + 1].iter().map(|mk| mk.estimate(vol)).collect();
    let norm = components.iter().map(|c| c.estimate * c.estimate).sum::<f64>().sqrt();
    let stderr = components.iter().map(|c| c.stderr * c.stderr).sum::<f64>().sqrt();
    Ok(McVectorEstimate { components, norm, stderr })
}

/// Quadrature counterpart of [`mc_mass_center`]: `∫ x / u_z dθ`.
pub fn mass_center_quadrature(body: &ConvexBody, z: &[f64]) -> Result<Vec<f64>> {
    let uz = translated_support(body, z)?;
    let grid: &SphereGrid = body.grid();
    let nodes = grid.nodes();
    Ok((0..grid.ambient()).map(|d| grid.integrate_by(|i| nodes[i][d] / uz[i])).collect())
}

/// Mass-center residual of `Ω⁰` about the entropy point.
pub fn entropy_mass_center_residual(body: &ConvexBody, samples: usize, seed: u64) -> Result<McVectorEstimate> {
    let ep = entropy_point(body)?;
    mc_mass_center(body, &ep.z, samples, seed)
}
