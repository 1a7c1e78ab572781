//! The chain of coupled second-order subsystems.
//!
//! At site `k`:
//!
//! ```text
//! x1[k,t+1] = β x1[k,t] + x2[k,t]
//! x2[k,t+1] = α (x2[k,t] + κ (x2[k-1,t] + x2[k+1,t])) + wu[k,t] + u[k,t]
//! ζ[k,t]    = (x1, x2, u)
//! y[k,t]    = x1[k,t] + wy[k,t]
//! ```
//!
//! The spatial transform diagonalizes the coupling into the scalar symbol
//! `σ(θ) = α(1 + 2κ cos θ)`.

use num_complex::Complex64;

use crate::error::SynthError;
use crate::series::{LaurentSeries, Series};
use crate::spatial::{LaurentVector, SpatialVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlantParams {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
}

impl Default for PlantParams {
    /// α = 1.5, β = 1, κ = 0.8: an unstable, strongly coupled chain.
    fn default() -> Self {
        Self {
            alpha: 1.5,
            beta: 1.0,
            kappa: 0.8,
        }
    }
}

impl PlantParams {
    pub fn new(alpha: f64, beta: f64, kappa: f64) -> Result<Self, SynthError> {
        if !(alpha.is_finite() && beta.is_finite() && kappa.is_finite()) {
            return Err(SynthError::InvalidConfig(format!(
                "plant parameters must be finite (alpha={alpha}, beta={beta}, kappa={kappa})"
            )));
        }
        Ok(Self { alpha, beta, kappa })
    }

    /// `ακ`, the nearest-neighbour coupling gain.
    pub fn coupling(&self) -> f64 {
        self.alpha * self.kappa
    }

    pub fn sigma_at(&self, theta: f64) -> f64 {
        self.alpha * (1.0 + 2.0 * self.kappa * theta.cos())
    }

    /// Largest `|σ(θ)|` over all spatial frequencies.
    pub fn max_abs_sigma(&self) -> f64 {
        let a = self.alpha * (1.0 + 2.0 * self.kappa);
        let b = self.alpha * (1.0 - 2.0 * self.kappa);
        a.abs().max(b.abs())
    }

    /// Non-fatal notes about open-loop instability.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.beta.abs() >= 1.0 {
            out.push(format!("|beta| = {} >= 1: first state is not open-loop stable", self.beta.abs()));
        }
        if self.max_abs_sigma() >= 1.0 {
            out.push(format!(
                "max |sigma| = {} >= 1: coupled state is open-loop unstable for some theta",
                self.max_abs_sigma()
            ));
        }
        out
    }

    /// Three-tap spatial kernel of the `σ` operator: `{-1: ακ, 0: α, +1: ακ}`.
    pub fn sigma_kernel<S: Series>(&self) -> SpatialVector<S> {
        let ak = S::constant(self.coupling());
        SpatialVector::from_entries(1, vec![ak.clone(), S::constant(self.alpha), ak])
    }

    /// Kernel of `z - σ`: `{-1: -ακ, 0: z - α, +1: -ακ}`.
    pub fn z_minus_sigma_kernel(&self) -> LaurentVector {
        let ak = LaurentSeries::constant(-self.coupling());
        SpatialVector::from_entries(
            1,
            vec![ak.clone(), LaurentSeries::z_minus(self.alpha), ak],
        )
    }

    /// The factor `z - β`.
    pub fn z_minus_beta(&self) -> LaurentSeries {
        LaurentSeries::z_minus(self.beta)
    }
}

pub fn sigma_at(p: &PlantParams, theta: f64) -> f64 {
    p.sigma_at(theta)
}

/// Applies the banded `σ` operator; the output extent is one more than the input's.
pub fn apply_sigma<S: Series>(p: &PlantParams, v: &SpatialVector<S>) -> SpatialVector<S> {
    v.convolve(&p.sigma_kernel())
}

/// The per-`θ` state-space partition of the plant.
///
/// State `(x1, x2)`, disturbance `(wy, wu)`, scalar input `u`, regulated
/// output `(x1, x2, u)` and scalar measurement `y = x1 + wy`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyPlant {
    pub theta: f64,
    pub a: [[f64; 2]; 2],
    pub b1: [[f64; 2]; 2],
    pub b2: [f64; 2],
    pub c1: [[f64; 2]; 3],
    pub d12: [f64; 3],
    pub c2: [f64; 2],
    pub d21: [f64; 2],
}

impl FrequencyPlant {
    /// Transfer function from `u` to `y`: `C2 (zI - A)^-1 B2`.
    pub fn p_yu(&self, z: Complex64) -> Complex64 {
        let [[a11, a12], [a21, a22]] = self.a;
        let m11 = z - a11;
        let m22 = z - a22;
        let det = m11 * m22 - a12 * a21;
        // adj(zI - A) B2
        let x1 = (m22 * self.b2[0] + a12 * self.b2[1]) / det;
        let x2 = (m11 * self.b2[1] + a21 * self.b2[0]) / det;
        x1 * self.c2[0] + x2 * self.c2[1]
    }
}

pub fn build_freq_plant(p: &PlantParams, theta: f64) -> FrequencyPlant {
    FrequencyPlant {
        theta,
        a: [[p.beta, 1.0], [0.0, p.sigma_at(theta)]],
        b1: [[0.0, 0.0], [0.0, 1.0]],
        b2: [0.0, 1.0],
        c1: [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]],
        d12: [0.0, 0.0, 1.0],
        c2: [1.0, 0.0],
        d21: [1.0, 0.0],
    }
}
