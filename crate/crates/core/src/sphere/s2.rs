//! Spherical-harmonic transform on a Gauss–Legendre × uniform-longitude grid.
//!
//! Node `(j, k)` sits at colatitude `θ_j = acos(x_j)` (Gauss–Legendre `x_j`,
//! descending) and longitude `φ_k = 2πk/N_φ`; flat index `j·N_φ + k`.
//! Fields are represented by triangular truncation at degree
//! `L = min(N_θ − 1, N_φ/2 − 1)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::legendre::{assoc_legendre_column, gauss_legendre, theta_derivative_column};
use super::Sym2;

pub(crate) struct SphereOps {
    pub nt: usize,
    pub np: usize,
    pub lmax: usize,
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    pub gl_w: Vec<f64>,
    /// Per order `m`: `P̄_l^m(x_j)` at `[j * (lmax - m + 1) + (l - m)]`.
    plm: Vec<Vec<f64>>,
    /// Same layout, `dP̄_l^m/dθ`.
    dplm: Vec<Vec<f64>>,
    /// Barycentric weights for polynomial interpolation in `x`.
    bary: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SphereOps {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SphereOps")
            .field("nt", &self.nt)
            .field("np", &self.np)
            .field("lmax", &self.lmax)
            .finish()
    }
}

/// Spherical-harmonic coefficients, `coeffs[m][l - m]` for `0 ≤ m ≤ l ≤ lmax`.
pub(crate) type Coeffs = Vec<Vec<Complex64>>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

impl SphereOps {
    pub fn new(nt: usize, np: usize) -> Self {
        let (x, gl_w) = gauss_legendre(nt);
        let s: Vec<f64> = x.iter().map(|xi| (1.0 - xi * xi).sqrt()).collect();
        let lmax = (nt - 1).min(np / 2 - 1);
        let mut plm = Vec::with_capacity(lmax + 1);
        let mut dplm = Vec::with_capacity(lmax + 1);
        let mut col = Vec::new();
        let mut dcol = Vec::new();
        for m in 0..=lmax {
            let width = lmax - m + 1;
            let mut p = vec![0.0; nt * width];
            let mut dp = vec![0.0; nt * width];
            for j in 0..nt {
                assoc_legendre_column(lmax, m, x[j], s[j], &mut col);
                theta_derivative_column(lmax, m, x[j], s[j], &col, &mut dcol);
                p[j * width..(j + 1) * width].copy_from_slice(&col);
                dp[j * width..(j + 1) * width].copy_from_slice(&dcol);
            }
            plm.push(p);
            dplm.push(dp);
        }
        // Closed-form barycentric weights for Gauss–Legendre points.
        let bary = (0..nt)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * ((1.0 - x[j] * x[j]) * gl_w[j]).sqrt()
            })
            .collect();
        let mut planner = FftPlanner::new();
        SphereOps {
            nt,
            np,
            lmax,
            x,
            s,
            gl_w,
            plm,
            dplm,
            bary,
            fwd: planner.plan_fft_forward(np),
            inv: planner.plan_fft_inverse(np),
        }
    }

    /// Longitudinal Fourier coefficients of every ring, `F[j][m]`, `m = 0..=N_φ/2`,
    /// normalized so that `u(θ_j, φ) = Σ_m F_m e^{imφ}` over signed `m`.
    pub fn ring_spectra(&self, u: &[f64]) -> Vec<Vec<Complex64>> {
        let np = self.np;
        let half = np / 2;
        let scale = 1.0 / np as f64;
        let mut out = vec![Vec::new(); self.nt];
        let mut buf = vec![ZERO; np];
        let mut j = 0;
        while j < self.nt {
            let second = j + 1 < self.nt;
            for k in 0..np {
                let b = if second { u[(j + 1) * np + k] } else { 0.0 };
                buf[k] = Complex64::new(u[j * np + k], b);
            }
            self.fwd.process(&mut buf);
            let mut a = Vec::with_capacity(half + 1);
            let mut bspec = Vec::with_capacity(half + 1);
            for m in 0..=half {
                let zm = buf[m];
                let zc = buf[(np - m) % np].conj();
                a.push((zm + zc) * 0.5 * scale);
                bspec.push((zm - zc) * Complex64::new(0.0, -0.5) * scale);
            }
            out[j] = a;
            if second {
                out[j + 1] = bspec;
            }
            j += 2;
        }
        out
    }

    pub fn analysis(&self, u: &[f64]) -> Coeffs {
        let spectra = self.ring_spectra(u);
        let mut coeffs: Coeffs = (0..=self.lmax).map(|m| vec![ZERO; self.lmax - m + 1]).collect();
        for (m, cm) in coeffs.iter_mut().enumerate() {
            let width = self.lmax - m + 1;
            let p = &self.plm[m];
            for j in 0..self.nt {
                let f = spectra[j][m] * self.gl_w[j];
                let row = &p[j * width..(j + 1) * width];
                for (c, &pv) in cm.iter_mut().zip(row) {
                    *c += f * pv;
                }
            }
        }
        coeffs
    }

    /// Write a real signal's positive-frequency spectrum `x` plus `i·y` into `buf`.
    fn pack(&self, buf: &mut [Complex64], xs: &[Complex64], ys: &[Complex64]) {
        let np = self.np;
        buf.fill(ZERO);
        buf[0] = Complex64::new(xs[0].re, ys[0].re);
        for m in 1..xs.len() {
            buf[m] = xs[m] + I * ys[m];
            buf[np - m] = xs[m].conj() + I * ys[m].conj();
        }
    }

    pub fn synthesis(&self, coeffs: &Coeffs) -> Vec<f64> {
        let np = self.np;
        let mut out = vec![0.0; self.nt * np];
        let mut fa = vec![ZERO; self.lmax + 1];
        let mut fb = vec![ZERO; self.lmax + 1];
        let mut buf = vec![ZERO; np];
        let mut j = 0;
        while j < self.nt {
            let second = j + 1 < self.nt;
            for m in 0..=self.lmax {
                fa[m] = self.ring_sum(coeffs, m, j);
                fb[m] = if second { self.ring_sum(coeffs, m, j + 1) } else { ZERO };
            }
            self.pack(&mut buf, &fa, &fb);
            self.inv.process(&mut buf);
            for k in 0..np {
                out[j * np + k] = buf[k].re;
                if second {
                    out[(j + 1) * np + k] = buf[k].im;
                }
            }
            j += 2;
        }
        out
    }

    fn ring_sum(&self, coeffs: &Coeffs, m: usize, j: usize) -> Complex64 {
        let width = self.lmax - m + 1;
        let row = &self.plm[m][j * width..(j + 1) * width];
        let mut acc = ZERO;
        for (c, &p) in coeffs[m].iter().zip(row) {
            acc += c * p;
        }
        acc
    }

    /// Value, frame gradient `(∂_θ, ∂_φ / sin θ)` and frame Hessian of the
    /// bandlimited projection of `u`.
    pub fn derivatives(&self, u: &[f64]) -> (Vec<f64>, Vec<[f64; 2]>, Vec<Sym2>) {
        let coeffs = self.analysis(u);
        self.derivatives_from(&coeffs)
    }

    pub fn derivatives_from(&self, coeffs: &Coeffs) -> (Vec<f64>, Vec<[f64; 2]>, Vec<Sym2>) {
        let np = self.np;
        let n = self.nt * np;
        let mut value = vec![0.0; n];
        let mut grad = vec![[0.0; 2]; n];
        let mut hess = vec![Sym2::default(); n];
        let nm = self.lmax + 1;
        let mut sv = vec![ZERO; nm];
        let mut st = vec![ZERO; nm];
        let mut sp = vec![ZERO; nm];
        let mut h11 = vec![ZERO; nm];
        let mut h12 = vec![ZERO; nm];
        let mut h22 = vec![ZERO; nm];
        let mut buf = vec![ZERO; np];
        for j in 0..self.nt {
            let s = self.s[j];
            let cot = self.x[j] / s;
            for m in 0..=self.lmax {
                let width = self.lmax - m + 1;
                let p = &self.plm[m][j * width..(j + 1) * width];
                let dp = &self.dplm[m][j * width..(j + 1) * width];
                let mut f = ZERO;
                let mut fd = ZERO;
                let mut g = ZERO;
                for (i, c) in coeffs[m].iter().enumerate() {
                    let l = (m + i) as f64;
                    f += c * p[i];
                    fd += c * dp[i];
                    g += c * (p[i] * l * (l + 1.0));
                }
                let mf = m as f64;
                let m2s2 = mf * mf / (s * s);
                sv[m] = f;
                st[m] = fd;
                sp[m] = I * mf * f / s;
                h11[m] = -cot * fd - g + m2s2 * f;
                h12[m] = I * mf * (fd - cot * f) / s;
                h22[m] = -m2s2 * f + cot * fd;
            }
            let row = j * np;
            self.pack(&mut buf, &sv, &st);
            self.inv.process(&mut buf);
            for k in 0..np {
                value[row + k] = buf[k].re;
                grad[row + k][0] = buf[k].im;
            }
            self.pack(&mut buf, &sp, &h11);
            self.inv.process(&mut buf);
            for k in 0..np {
                grad[row + k][1] = buf[k].re;
                hess[row + k].xx = buf[k].im;
            }
            self.pack(&mut buf, &h12, &h22);
            self.inv.process(&mut buf);
            for k in 0..np {
                hess[row + k].xy = buf[k].re;
                hess[row + k].yy = buf[k].im;
            }
        }
        (value, grad, hess)
    }

    pub fn filter(&self, u: &[f64], degree: usize) -> Vec<f64> {
        let mut c = self.analysis(u);
        for (m, cm) in c.iter_mut().enumerate() {
            for (i, v) in cm.iter_mut().enumerate() {
                if m + i > degree {
                    *v = ZERO;
                }
            }
        }
        self.synthesis(&c)
    }

    /// Relative size of the part of `u` outside degrees `≤ 3L/4`, including
    /// whatever the truncated transform cannot represent at all.
    pub fn spectral_tail(&self, u: &[f64], weights: &[f64]) -> f64 {
        let cut = (3 * self.lmax) / 4;
        let smooth = self.filter(u, cut);
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..u.len() {
            let d = u[i] - smooth[i];
            num += weights[i] * d * d;
            den += weights[i] * u[i] * u[i];
        }
        if den == 0.0 {
            0.0
        } else {
            (num / den).sqrt()
        }
    }

    pub fn interpolant(&self, u: &[f64]) -> SphereInterpolant {
        let half = self.np / 2;
        let spectra = self.ring_spectra(u);
        let reduced = spectra
            .into_iter()
            .enumerate()
            .map(|(j, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(m, f)| if m % 2 == 1 { f / self.s[j] } else { f })
                    .collect::<Vec<_>>()
            })
            .collect();
        SphereInterpolant {
            x: self.x.clone(),
            bary: self.bary.clone(),
            spectra: reduced,
            half,
            np: self.np,
            values: u.to_vec(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct SphereInterpolant {
    x: Vec<f64>,
    bary: Vec<f64>,
    /// `F_m(θ_j) / sin^{m mod 2} θ_j`, which is a polynomial in `cos θ` for
    /// bandlimited fields.
    spectra: Vec<Vec<Complex64>>,
    half: usize,
    np: usize,
    values: Vec<f64>,
}

impl SphereInterpolant {
    pub fn eval(&self, p: [f64; 3]) -> f64 {
        let ct = p[2];
        let st = (p[0] * p[0] + p[1] * p[1]).sqrt();
        let phi = p[1].atan2(p[0]).rem_euclid(2.0 * PI);
        let ring = self.x.iter().position(|&xj| xj == ct);
        if let Some(j) = ring {
            let pos = phi * self.np as f64 / (2.0 * PI);
            let k = pos.round();
            if (pos - k).abs() < 1e-12 {
                return self.values[j * self.np + (k as usize) % self.np];
            }
        }
        // Interpolate each longitudinal mode in cos θ, then sum the Fourier series.
        let mut modes = vec![ZERO; self.half + 1];
        match ring {
            Some(j) => modes.copy_from_slice(&self.spectra[j]),
            None => {
                let mut den = 0.0;
                for (j, &xj) in self.x.iter().enumerate() {
                    let c = self.bary[j] / (ct - xj);
                    den += c;
                    for (mm, f) in modes.iter_mut().zip(&self.spectra[j]) {
                        *mm += f * c;
                    }
                }
                for mm in &mut modes {
                    *mm /= den;
                }
            }
        }
        let step = Complex64::from_polar(1.0, phi);
        let mut rot = step;
        let mut acc = modes[0].re;
        for (m, f) in modes.iter().enumerate().take(self.half).skip(1) {
            let amp = if m % 2 == 1 { st } else { 1.0 };
            acc += 2.0 * amp * (f * rot).re;
            rot *= step;
        }
        let amp = if self.half % 2 == 1 { st } else { 1.0 };
        acc + amp * modes[self.half].re * (self.half as f64 * phi).cos()
    }
}
