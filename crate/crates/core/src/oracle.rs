//! The unconstrained optimal cost `J∞`, computed by solving a scalar model-matching
//! problem at every spatial frequency on a uniform grid and integrating.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::affine::CAUSAL_TOL;
use crate::error::SynthError;
use crate::fir_lstsq::FirProblem;
use crate::io_maps::io_freq_maps;
use crate::model_match::SolverConfig;
use crate::plant::PlantParams;
use crate::series::{CausalSeries, LaurentSeries, Series};
use crate::sl_maps::sl_freq_maps;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleConfig {
    /// Points of the uniform grid on `[0, 2π)`.
    pub theta_points: usize,
    /// FIR order of the scalar free parameter at each grid point.
    pub horizon: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            theta_points: 512,
            horizon: 240,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.theta_points < 128 {
            return Err(SynthError::InvalidConfig(format!(
                "oracle grid of {} points is below the minimum of 128",
                self.theta_points
            )));
        }
        if self.horizon < 1 {
            return Err(SynthError::InvalidConfig("oracle horizon must be at least 1".into()));
        }
        Ok(())
    }

    /// Also requires the oracle horizon to be at least four times the sweep horizon.
    pub fn validate_against(&self, solver: &SolverConfig) -> Result<(), SynthError> {
        self.validate()?;
        if self.horizon < 4 * solver.horizon {
            return Err(SynthError::InvalidConfig(format!(
                "oracle horizon {} is below four times the sweep horizon {}",
                self.horizon, solver.horizon
            )));
        }
        Ok(())
    }
}

/// `z^-2 + (σ+β) z^-3`, the fixed part of `r12` at one spatial frequency.
fn offset_at(p: &PlantParams, theta: f64) -> CausalSeries {
    CausalSeries::new(vec![0.0, 0.0, 1.0, p.sigma_at(theta) + p.beta])
}

fn to_causal(name: &str, s: &LaurentSeries) -> Result<CausalSeries, SynthError> {
    s.to_causal(CAUSAL_TOL).map_err(|r| SynthError::CausalityViolation {
        block: name.to_string(),
        offset: 0,
        offenders: r.offenders,
    })
}

/// Builds the one-input problem from a cost stack that is affine in the decomposed map.
fn scalar_problem(stack: impl Fn(&CausalSeries) -> Vec<(&'static str, LaurentSeries)>, g: &CausalSeries) -> Result<FirProblem, SynthError> {
    let at_zero = stack(&CausalSeries::zero());
    let at_shift = stack(&CausalSeries::monomial(4, 1.0));
    let at_g = stack(g);
    let mut prob = FirProblem::new(1);
    for (((name, z0), (_, s)), (_, h)) in at_zero.iter().zip(&at_shift).zip(&at_g) {
        let kernel = to_causal(name, &(s - z0))?;
        let offset = to_causal(name, h)?;
        prob.push(vec![kernel], offset);
    }
    Ok(prob)
}

fn sl_stack(p: &PlantParams, theta: f64, r: &CausalSeries) -> Vec<(&'static str, LaurentSeries)> {
    let m = sl_freq_maps(p, theta, r);
    vec![("n1", m.n1), ("r12", m.r12), ("n2", m.n2), ("r22", m.r22), ("l", m.l), ("m2", m.m2)]
}

fn io_stack(p: &PlantParams, theta: f64, lambda: &CausalSeries) -> Vec<(&'static str, LaurentSeries)> {
    let m = io_freq_maps(p, theta, lambda);
    let one = LaurentSeries::constant(1.0);
    vec![
        ("gamma-1", &m.gamma - &one),
        ("lambda", m.lambda),
        ("x2_wy", m.x2_wy),
        ("x2_wu", m.x2_wu),
        ("psi", m.psi),
        ("omega-1", &m.omega - &one),
    ]
}

/// Squared optimal cost of the system-level problem at one spatial frequency.
pub fn per_theta_cost(p: &PlantParams, theta: f64, horizon: usize) -> Result<f64, SynthError> {
    let prob = scalar_problem(|r| sl_stack(p, theta, r), &offset_at(p, theta))?;
    Ok(prob.solve(horizon)?.cost_sq)
}

/// Squared optimal cost of the input-output problem at one spatial frequency.
pub fn per_theta_cost_io(p: &PlantParams, theta: f64, horizon: usize) -> Result<f64, SynthError> {
    let prob = scalar_problem(|l| io_stack(p, theta, l), &offset_at(p, theta))?;
    Ok(prob.solve(horizon)?.cost_sq)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub j_inf: f64,
    /// `(θ, squared per-θ cost)` over the full grid.
    pub integrand: Vec<(f64, f64)>,
}

/// `J∞` and the integrand it was computed from.
///
/// The integrand is even in `θ` about `π`, so only grid points in `[0, π]` are solved.
pub fn j_inf_report(p: &PlantParams, cfg: &OracleConfig) -> Result<OracleReport, SynthError> {
    cfg.validate()?;
    let n = cfg.theta_points;
    let theta = |m: usize| 2.0 * PI * m as f64 / n as f64;
    let half: Vec<f64> = (0..=n / 2)
        .into_par_iter()
        .map(|m| per_theta_cost(p, theta(m), cfg.horizon))
        .collect::<Result<_, _>>()?;
    let integrand: Vec<(f64, f64)> = (0..n).map(|m| (theta(m), half[m.min(n - m)])).collect();
    let mean = integrand.iter().map(|(_, c)| c).sum::<f64>() / n as f64;
    Ok(OracleReport {
        j_inf: mean.sqrt(),
        integrand,
    })
}

/// The unconstrained optimal cost.
pub fn j_inf(p: &PlantParams, cfg: &OracleConfig) -> Result<f64, SynthError> {
    Ok(j_inf_report(p, cfg)?.j_inf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> OracleConfig {
        OracleConfig {
            theta_points: 128,
            horizon: 120,
        }
    }

    #[test]
    fn decoupled_integrand_is_flat() {
        let p = PlantParams::new(0.9, 0.5, 0.0).unwrap();
        let rep = j_inf_report(&p, &small()).unwrap();
        let c0 = rep.integrand[0].1;
        assert!(rep.integrand.iter().all(|(_, c)| (c - c0).abs() < 1e-12 * c0));
        assert!((rep.j_inf - c0.sqrt()).abs() < 1e-12 * c0);
    }

    #[test]
    fn integrand_is_symmetric_and_nonnegative() {
        let p = PlantParams::default();
        for theta in [0.3, 1.2, 2.9] {
            let a = per_theta_cost(&p, theta, 80).unwrap();
            let b = per_theta_cost(&p, 2.0 * PI - theta, 80).unwrap();
            assert!(a >= 0.0);
            assert!((a - b).abs() < 1e-10 * a);
        }
    }

    #[test]
    fn sl_and_io_agree_per_theta() {
        let p = PlantParams::new(1.2, -0.7, 0.45).unwrap();
        for theta in [0.0, 0.8, 2.0, PI] {
            let a = per_theta_cost(&p, theta, 100).unwrap();
            let b = per_theta_cost_io(&p, theta, 100).unwrap();
            assert!((a - b).abs() <= 1e-9 * a);
        }
    }

    #[test]
    fn integrand_is_continuous() {
        let p = PlantParams::default();
        let h = 2.0 * PI / 512.0;
        let a = per_theta_cost(&p, 1.0, 120).unwrap();
        let b = per_theta_cost(&p, 1.0 + h, 120).unwrap();
        let c = per_theta_cost(&p, 1.0 + h / 2.0, 120).unwrap();
        assert!((a - b).abs() < 10.0 * h * a);
        assert!((a - c).abs() < (a - b).abs());
    }

    #[test]
    fn config_validation() {
        assert!(OracleConfig { theta_points: 64, ..Default::default() }.validate().is_err());
        let solver = SolverConfig::default();
        assert!(OracleConfig::default().validate_against(&solver).is_ok());
        assert!(OracleConfig { horizon: 200, ..Default::default() }.validate_against(&solver).is_err());
    }
}
