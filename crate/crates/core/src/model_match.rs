//! Finite-extent model matching: minimize `‖V f + h‖₂` over FIR `f`, and sweep the extent.

use std::fmt;

use log::{debug, warn};
use rayon::prelude::*;

use crate::affine::AssembledMapPair;
use crate::error::SynthError;
use crate::fir_lstsq::FirProblem;
use crate::io_maps::assemble_io;
use crate::plant::PlantParams;
use crate::sl_maps::assemble_sl;
use crate::spatial::ExtentVector;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// FIR order of every entry of `f`.
    pub horizon: usize,
    /// Grid used for the frequency-domain cost cross-check.
    pub theta_grid: usize,
    /// Bound on the normalized residual gradient at the optimum.
    pub normal_eq_tol: f64,
    /// Relative tolerance for comparing costs that should coincide.
    pub convergence_rtol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            horizon: 60,
            theta_grid: 512,
            normal_eq_tol: 1e-9,
            convergence_rtol: 1e-8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.horizon < 1 {
            return Err(SynthError::InvalidConfig("solver horizon must be at least 1".into()));
        }
        if self.theta_grid < 64 {
            return Err(SynthError::InvalidConfig(format!(
                "theta grid of {} points is below the minimum of 64",
                self.theta_grid
            )));
        }
        if !(self.normal_eq_tol > 0.0 && self.convergence_rtol > 0.0) {
            return Err(SynthError::InvalidConfig("solver tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn with_horizon(self, horizon: usize) -> Self {
        Self { horizon, ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parameterization {
    SystemLevel,
    InputOutput,
}

impl Parameterization {
    pub fn assemble(self, p: &PlantParams, e: usize) -> Result<AssembledMapPair, SynthError> {
        match self {
            Self::SystemLevel => assemble_sl(p, e),
            Self::InputOutput => assemble_io(p, e),
        }
    }
}

impl fmt::Display for Parameterization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SystemLevel => "sl",
            Self::InputOutput => "io",
        })
    }
}

/// Which parameterizations a sweep solves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    Sl,
    Io,
    Both,
}

impl Which {
    pub fn includes(self, param: Parameterization) -> bool {
        matches!(
            (self, param),
            (Which::Both, _) | (Which::Sl, Parameterization::SystemLevel) | (Which::Io, Parameterization::InputOutput)
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisResult {
    pub extent: usize,
    pub horizon: usize,
    /// Optimal free parameter.
    pub f: ExtentVector,
    /// Achieved cost `‖V f + h‖₂`.
    pub j: f64,
    /// The same cost computed by quadrature over the spatial frequency.
    pub j_freq_check: f64,
    /// Every block of `V f + h`, by block name.
    pub maps: Vec<(String, ExtentVector)>,
    pub residual_gradient_norm: f64,
}

/// The least-squares problem whose unknowns are the entries of `f`, offset by `-E`.
pub fn fir_problem(pair: &AssembledMapPair) -> FirProblem {
    let e = pair.input_extent as i64;
    let mut prob = FirProblem::new(2 * pair.input_extent + 1);
    for b in &pair.blocks {
        for k in b.v.rows() {
            let kernel = (-e..=e).map(|j| b.v.get(k, j).clone()).collect();
            prob.push(kernel, b.h.at(k));
        }
    }
    prob
}

/// `‖V f + h‖₂` by explicit convolution.
pub fn cost_of(pair: &AssembledMapPair, f: &ExtentVector) -> f64 {
    pair.evaluate(f).iter().map(ExtentVector::energy).sum::<f64>().sqrt()
}

fn freq_cost(maps: &[(String, ExtentVector)], grid: usize) -> Result<f64, SynthError> {
    let mut total = 0.0;
    for (_, v) in maps {
        total += v.energy_freq(grid)?;
    }
    Ok(total.sqrt())
}

/// Minimizes `‖V f + h‖₂` over `f` whose entries are FIR of order `cfg.horizon`.
pub fn solve_finite_extent(pair: &AssembledMapPair, cfg: &SolverConfig) -> Result<SynthesisResult, SynthError> {
    cfg.validate()?;
    let e = pair.input_extent;
    let sol = fir_problem(pair).solve(cfg.horizon)?;
    let f = ExtentVector::from_entries(e, sol.x);
    let maps: Vec<_> = pair
        .blocks
        .iter()
        .map(|b| (b.name.clone(), b.evaluate(&f)))
        .collect();
    let j = maps.iter().map(|(_, v)| v.energy()).sum::<f64>().sqrt();
    let j_freq_check = freq_cost(&maps, cfg.theta_grid)?;
    if sol.gradient_norm > cfg.normal_eq_tol {
        warn!(
            "extent {e}: residual gradient {:e} exceeds tolerance {:e}",
            sol.gradient_norm, cfg.normal_eq_tol
        );
    }
    debug!("extent {e}, horizon {}: J = {j}", cfg.horizon);
    Ok(SynthesisResult {
        extent: e,
        horizon: cfg.horizon,
        f,
        j,
        j_freq_check,
        maps,
        residual_gradient_norm: sol.gradient_norm,
    })
}

/// One extent's results in a sweep.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub extent: usize,
    pub sl: Option<Result<SynthesisResult, SynthError>>,
    pub io: Option<Result<SynthesisResult, SynthError>>,
    pub j_inf: Option<f64>,
}

impl SweepRow {
    pub fn j_sl(&self) -> Option<f64> {
        self.sl.as_ref().and_then(|r| r.as_ref().ok()).map(|r| r.j)
    }

    pub fn j_io(&self) -> Option<f64> {
        self.io.as_ref().and_then(|r| r.as_ref().ok()).map(|r| r.j)
    }

    /// Relative gap `(J_E - J∞) / J∞` for the given column.
    pub fn gap(&self, param: Parameterization) -> Option<f64> {
        let j = match param {
            Parameterization::SystemLevel => self.j_sl(),
            Parameterization::InputOutput => self.j_io(),
        }?;
        self.j_inf.map(|ji| (j - ji) / ji)
    }

    /// Every solver error in this row.
    pub fn errors(&self) -> Vec<(Parameterization, &SynthError)> {
        let mut out = Vec::new();
        if let Some(Err(e)) = &self.sl {
            out.push((Parameterization::SystemLevel, e));
        }
        if let Some(Err(e)) = &self.io {
            out.push((Parameterization::InputOutput, e));
        }
        out
    }

    /// Largest residual gradient among the solved columns.
    pub fn residual_grad(&self) -> Option<f64> {
        [&self.sl, &self.io]
            .into_iter()
            .filter_map(|r| r.as_ref().and_then(|r| r.as_ref().ok()))
            .map(|r| r.residual_gradient_norm)
            .reduce(f64::max)
    }
}

fn solve_one(p: &PlantParams, e: usize, param: Parameterization, cfg: &SolverConfig) -> Result<SynthesisResult, SynthError> {
    solve_finite_extent(&param.assemble(p, e)?, cfg)
}

/// Solves every requested parameterization for each extent; rows are sorted by extent.
///
/// Solves run in parallel on the current rayon pool.
pub fn sweep(p: &PlantParams, extents: &[usize], cfg: &SolverConfig, which: Which, j_inf: Option<f64>) -> Vec<SweepRow> {
    let mut extents = extents.to_vec();
    extents.sort_unstable();
    extents.dedup();
    let jobs: Vec<(usize, Parameterization)> = extents
        .iter()
        .flat_map(|&e| {
            [Parameterization::SystemLevel, Parameterization::InputOutput]
                .into_iter()
                .filter(move |&q| which.includes(q))
                .map(move |q| (e, q))
        })
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(e, q)| solve_one(p, e, q, cfg))
        .collect();
    let mut rows: Vec<SweepRow> = extents
        .iter()
        .map(|&extent| SweepRow {
            extent,
            sl: None,
            io: None,
            j_inf,
        })
        .collect();
    for ((e, q), r) in jobs.into_iter().zip(results) {
        let row = rows.iter_mut().find(|row| row.extent == e).expect("row for every extent");
        match q {
            Parameterization::SystemLevel => row.sl = Some(r),
            Parameterization::InputOutput => row.io = Some(r),
        }
    }
    rows
}

#[derive(Clone, Debug, PartialEq)]
pub struct HorizonReport {
    /// `(horizon, J)` in increasing horizon order.
    pub costs: Vec<(usize, f64)>,
    /// `|J_last - J_prev| / J_prev`, or `None` with fewer than two horizons.
    pub last_relative_change: Option<f64>,
}

impl HorizonReport {
    pub fn is_nonincreasing(&self, slack: f64) -> bool {
        self.costs.windows(2).all(|w| w[1].1 <= w[0].1 + slack)
    }
}

/// Optimal cost for each horizon in an increasing list.
pub fn horizon_convergence(pair: &AssembledMapPair, horizons: &[usize], cfg: &SolverConfig) -> Result<HorizonReport, SynthError> {
    if horizons.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SynthError::InvalidConfig("horizon list must be strictly increasing".into()));
    }
    let costs = horizons
        .iter()
        .map(|&t| solve_finite_extent(pair, &cfg.with_horizon(t)).map(|r| (t, r.j)))
        .collect::<Result<Vec<_>, _>>()?;
    let last_relative_change = match costs.as_slice() {
        [.., (_, a), (_, b)] => Some((b - a).abs() / a),
        _ => None,
    };
    Ok(HorizonReport {
        costs,
        last_relative_change,
    })
}
