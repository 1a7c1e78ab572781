//! Multichannel FIR least squares.
//!
//! Finds FIR sequences `x_0..x_{n-1}`, each with `horizon + 1` taps, that
//! minimize `Σ_ch ‖Σ_j a[ch][j] * x_j + b[ch]‖²`, where `*` is convolution of
//! causal sequences and the norm is the sum of squared coefficients.
//!
//! The residual coefficient at time `s` only involves taps of `x` at times
//! `s-d..=s`, with `d` the largest kernel degree, so the design matrix is
//! block banded. Rows are absorbed one time step at a time into a banded
//! triangular factor with a small dense Householder QR per step.

use nalgebra::DMatrix;

use crate::error::SynthError;
use crate::series::{CausalSeries, Series};

/// Relative pivot size below which the design matrix is treated as singular.
pub const RANK_TOL: f64 = 1e-12;

/// One output channel: `Σ_j kernel[j] * x_j + offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct FirChannel {
    pub kernel: Vec<CausalSeries>,
    pub offset: CausalSeries,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FirProblem {
    pub n_inputs: usize,
    pub channels: Vec<FirChannel>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FirSolution {
    /// Optimal taps, one series per input.
    pub x: Vec<CausalSeries>,
    /// Residual series, one per channel.
    pub residual: Vec<CausalSeries>,
    /// Sum of squared residual coefficients.
    pub cost_sq: f64,
    /// `max_c |a_c · r| / (‖a_c‖ ‖r‖)` over design-matrix columns `a_c`.
    pub gradient_norm: f64,
}

impl FirProblem {
    pub fn new(n_inputs: usize) -> Self {
        Self {
            n_inputs,
            channels: Vec::new(),
        }
    }

    pub fn push(&mut self, kernel: Vec<CausalSeries>, offset: CausalSeries) {
        assert_eq!(kernel.len(), self.n_inputs, "kernel width must match the input count");
        self.channels.push(FirChannel { kernel, offset });
    }

    /// Largest kernel degree over all channels and inputs.
    fn kernel_degree(&self) -> usize {
        self.channels
            .iter()
            .flat_map(|c| c.kernel.iter().map(CausalSeries::len))
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    fn offset_degree(&self) -> usize {
        self.channels
            .iter()
            .map(|c| c.offset.len())
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    /// Residual series for the given taps.
    pub fn residual(&self, x: &[CausalSeries]) -> Vec<CausalSeries> {
        self.channels
            .iter()
            .map(|c| {
                c.kernel
                    .iter()
                    .zip(x)
                    .fold(c.offset.clone(), |acc, (a, xj)| acc.plus(&a.times(xj)))
            })
            .collect()
    }

    /// Sum of squared residual coefficients for the given taps.
    pub fn cost_sq(&self, x: &[CausalSeries]) -> f64 {
        self.residual(x).iter().map(CausalSeries::energy).sum()
    }

    /// Largest normalized inner product between the residual and any design column
    /// for taps `0..=horizon`.
    pub fn gradient_norm(&self, residual: &[CausalSeries], horizon: usize) -> f64 {
        let r_norm = residual.iter().map(CausalSeries::energy).sum::<f64>().sqrt();
        if r_norm == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for j in 0..self.n_inputs {
            let col_norm = self
                .channels
                .iter()
                .map(|c| c.kernel[j].energy())
                .sum::<f64>()
                .sqrt();
            if col_norm == 0.0 {
                continue;
            }
            for t in 0..=horizon {
                let mut dot = 0.0;
                for (c, r) in self.channels.iter().zip(residual) {
                    for (d, a) in c.kernel[j].coeffs().iter().enumerate() {
                        dot += a * r.coeff(t + d);
                    }
                }
                worst = worst.max(dot.abs() / (col_norm * r_norm));
            }
        }
        worst
    }

    /// Minimizes the cost over taps `0..=horizon` of every input.
    pub fn solve(&self, horizon: usize) -> Result<FirSolution, SynthError> {
        let n_in = self.n_inputs;
        let n = (horizon + 1) * n_in;
        let d = self.kernel_degree();
        let bw = (d + 1) * n_in;
        let n_ch = self.channels.len();
        let steps = (horizon + d).max(self.offset_degree()) + 1;

        let mut band = vec![0.0; n * bw];
        let mut y = vec![0.0; n];

        for s in 0..steps {
            let t_lo = s.saturating_sub(d);
            let t_hi = s.min(horizon);
            if t_lo > t_hi {
                continue;
            }
            let lo = t_lo * n_in;
            let hi = (t_hi + 1) * n_in;
            let w = hi - lo;
            let mut m = DMatrix::<f64>::zeros(w + n_ch, w + 1);
            for a in 0..w {
                let i = lo + a;
                for c in i..hi {
                    m[(a, c - lo)] = band[i * bw + (c - i)];
                }
                m[(a, w)] = y[i];
            }
            for (ci, ch) in self.channels.iter().enumerate() {
                let row = w + ci;
                for t in t_lo..=t_hi {
                    for (j, a) in ch.kernel.iter().enumerate() {
                        m[(row, (t - t_lo) * n_in + j)] = a.coeff(s - t);
                    }
                }
                m[(row, w)] = -ch.offset.coeff(s);
            }
            let r = m.qr().r();
            for a in 0..w {
                let i = lo + a;
                for c in i..hi {
                    band[i * bw + (c - i)] = r[(a, c - lo)];
                }
                y[i] = r[(a, w)];
            }
        }

        let max_pivot = (0..n).map(|i| band[i * bw].abs()).fold(0.0, f64::max);
        for i in 0..n {
            let pivot = band[i * bw].abs();
            if pivot.is_nan() || pivot <= RANK_TOL * max_pivot {
                return Err(SynthError::RankDeficient { column: i, pivot });
            }
        }

        let mut sol = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = y[i];
            for c in (i + 1)..n.min(i + bw) {
                acc -= band[i * bw + (c - i)] * sol[c];
            }
            sol[i] = acc / band[i * bw];
        }

        let x: Vec<CausalSeries> = (0..n_in)
            .map(|j| CausalSeries::new((0..=horizon).map(|t| sol[t * n_in + j]).collect()))
            .collect();
        let residual = self.residual(&x);
        let cost_sq = residual.iter().map(CausalSeries::energy).sum();
        let gradient_norm = self.gradient_norm(&residual, horizon);
        Ok(FirSolution {
            x,
            residual,
            cost_sq,
            gradient_norm,
        })
    }
}
