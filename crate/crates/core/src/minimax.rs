//! Small convex minimax problems over points in R^{n+1}.
//!
//! Both radii reduce to `min_z q|z|² + max_i (⟨a_i, z⟩ + b_i)`:
//!
//! * inner radius: `q = 0`, `a_i = x_i`, `b_i = −u_i`, optimum `−ρ₋`;
//! * outer radius (smallest enclosing ball of boundary points `X_i`):
//!   `q = 1`, `a_i = −2X_i`, `b_i = |X_i|²`, optimum `ρ₊²`.
//!
//! The max is replaced by `(1/β) log Σ exp(β ·)` and minimized by damped
//! Newton while `β` is increased geometrically; the returned value is the
//! exact (non-smoothed) objective at the final point.

use nalgebra::{DMatrix, DVector};

const MAX_NEWTON: usize = 500;

pub(crate) struct Minimax<'a> {
    pub amb: usize,
    pub q: f64,
    pub a: &'a [[f64; 3]],
    pub b: &'a [f64],
}

#[derive(Debug, Clone)]
pub(crate) struct MinimaxSolution {
    pub z: Vec<f64>,
    pub value: f64,
}

impl Minimax<'_> {
    fn affine(&self, i: usize, z: &[f64]) -> f64 {
        self.b[i] + self.a[i][..self.amb].iter().zip(z).map(|(a, z)| a * z).sum::<f64>()
    }

    fn quad(&self, z: &[f64]) -> f64 {
        self.q * z.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn exact(&self, z: &[f64]) -> f64 {
        let m = (0..self.b.len()).map(|i| self.affine(i, z)).fold(f64::NEG_INFINITY, f64::max);
        self.quad(z) + m
    }

    fn smoothed(&self, z: &[f64], beta: f64) -> f64 {
        let vals: Vec<f64> = (0..self.b.len()).map(|i| self.affine(i, z)).collect();
        let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = vals.iter().map(|v| (beta * (v - m)).exp()).sum();
        self.quad(z) + m + s.ln() / beta
    }

    fn derivatives(&self, z: &[f64], beta: f64) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.amb;
        let vals: Vec<f64> = (0..self.b.len()).map(|i| self.affine(i, z)).collect();
        let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = vals.iter().map(|v| (beta * (v - m)).exp()).collect();
        let total: f64 = w.iter().sum();
        let mut mean = DVector::zeros(n);
        let mut second = DMatrix::zeros(n, n);
        for (i, wi) in w.iter().enumerate() {
            let p = wi / total;
            if p < 1e-300 {
                continue;
            }
            for r in 0..n {
                mean[r] += p * self.a[i][r];
                for c in 0..n {
                    second[(r, c)] += p * self.a[i][r] * self.a[i][c];
                }
            }
        }
        let cov = &second - &mean * mean.transpose();
        let mut grad = mean;
        let mut hess: DMatrix<f64> = cov * beta;
        for d in 0..n {
            grad[d] += 2.0 * self.q * z[d];
            hess[(d, d)] += 2.0 * self.q;
        }
        (grad, hess)
    }

    /// `scale` sets the first smoothing width; `tol` the final one.
    pub fn solve(&self, z0: &[f64], scale: f64, tol: f64) -> MinimaxSolution {
        let n = self.amb;
        let count = self.b.len() as f64;
        let mut z: Vec<f64> = z0.to_vec();
        let mut beta = 1.0 / scale;
        let beta_final = count.ln().max(1.0) / tol;
        let mut iterations = 0;
        loop {
            for _ in 0..60 {
                if iterations >= MAX_NEWTON {
                    break;
                }
                iterations += 1;
                let (g, mut h) = self.derivatives(&z, beta);
                let reg = 1e-12 * (h.trace() / n as f64).abs().max(1e-300);
                for d in 0..n {
                    h[(d, d)] += reg;
                }
                let step = match h.clone().cholesky() {
                    Some(ch) => ch.solve(&g),
                    None => h.lu().solve(&g).unwrap_or_else(|| g.clone()),
                };
                let decrement = g.dot(&step);
                if !(decrement > 1e-30 * scale) {
                    break;
                }
                let f0 = self.smoothed(&z, beta);
                let mut t = 1.0;
                let mut moved = false;
                for _ in 0..60 {
                    let trial: Vec<f64> = (0..n).map(|d| z[d] - t * step[d]).collect();
                    if self.smoothed(&trial, beta) <= f0 - 0.25 * t * decrement {
                        z = trial;
                        moved = true;
                        break;
                    }
                    t *= 0.5;
                }
                if !moved || decrement < 1e-24 * scale * scale {
                    break;
                }
            }
            if beta >= beta_final || iterations >= MAX_NEWTON {
                break;
            }
            beta = (beta * 10.0).min(beta_final);
        }
        MinimaxSolution { value: self.exact(&z), z }
    }
}
