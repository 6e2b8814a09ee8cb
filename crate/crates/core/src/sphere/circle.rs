//! Fourier collocation on S¹ with `N` equispaced angles `θ_k = 2πk/N`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct CircleOps {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CircleOps {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CircleOps").field("n", &self.n).finish()
    }
}

impl CircleOps {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        CircleOps {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    /// Signed wavenumber of FFT bin `k`; the Nyquist bin reports `+N/2`.
    fn wavenumber(&self, k: usize) -> f64 {
        if k <= self.n / 2 {
            k as f64
        } else {
            k as f64 - self.n as f64
        }
    }

    /// Fourier coefficients `c_k` with `u(θ) = Σ c_k e^{ikθ}`.
    pub fn coefficients(&self, u: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        for c in &mut buf {
            *c *= scale;
        }
        buf
    }

    fn synthesize_pair(&self, spec: &mut [Complex64]) -> (Vec<f64>, Vec<f64>) {
        self.inv.process(spec);
        (spec.iter().map(|c| c.re).collect(), spec.iter().map(|c| c.im).collect())
    }

    /// First and second θ-derivatives.
    pub fn derivatives(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let c = self.coefficients(u);
        let nyq = self.n / 2;
        let mut spec = vec![Complex64::new(0.0, 0.0); self.n];
        for (k, ck) in c.iter().enumerate() {
            let w = self.wavenumber(k);
            let d1 = if k == nyq { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, w) * ck };
            let d2 = -w * w * ck;
            // Both spectra are Hermitian, so one complex transform yields both real signals.
            spec[k] = d1 + Complex64::new(0.0, 1.0) * d2;
        }
        self.synthesize_pair(&mut spec)
    }

    /// Keep wavenumbers `|k| ≤ degree` (the Nyquist bin is dropped unless `degree ≥ N/2`).
    pub fn filter(&self, u: &[f64], degree: usize) -> Vec<f64> {
        let c = self.coefficients(u);
        let mut spec: Vec<Complex64> = c
            .iter()
            .enumerate()
            .map(|(k, ck)| if self.wavenumber(k).abs() as usize <= degree { *ck } else { Complex64::new(0.0, 0.0) })
            .collect();
        self.synthesize_pair(&mut spec).0
    }

    /// Relative amplitude of the upper quarter of the spectrum.
    pub fn spectral_tail(&self, u: &[f64]) -> f64 {
        let c = self.coefficients(u);
        let cut = (3 * self.n) / 8;
        let mut total = 0.0;
        let mut tail = 0.0;
        for (k, ck) in c.iter().enumerate() {
            let e = ck.norm_sqr();
            total += e;
            if self.wavenumber(k).abs() as usize > cut {
                tail += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            (tail / total).sqrt()
        }
    }

    pub fn interpolant(&self, u: &[f64]) -> CircleInterpolant {
        let c = self.coefficients(u);
        CircleInterpolant {
            coeffs: c[..=self.n / 2].to_vec(),
            n: self.n,
            values: u.to_vec(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct CircleInterpolant {
    coeffs: Vec<Complex64>,
    n: usize,
    values: Vec<f64>,
}

impl CircleInterpolant {
    pub fn eval_angle(&self, theta: f64) -> f64 {
        let t = theta.rem_euclid(2.0 * PI);
        let pos = t * self.n as f64 / (2.0 * PI);
        let k = pos.round();
        if (pos - k).abs() < 1e-12 {
            return self.values[(k as usize) % self.n];
        }
        let nyq = self.n / 2;
        let step = Complex64::from_polar(1.0, t);
        let mut rot = step;
        let mut acc = self.coeffs[0].re;
        for k in 1..nyq {
            acc += 2.0 * (self.coeffs[k] * rot).re;
            rot *= step;
        }
        acc + self.coeffs[nyq].re * (nyq as f64 * t).cos()
    }
}
