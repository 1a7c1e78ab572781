//! Executable checks of the structural properties of the two parameterizations:
//! coefficientwise equality of the stacks, agreement of the recovered
//! controllers, causality of the maps, and the affine/Toeplitz/extent laws.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::affine::{AssembledMapPair, CAUSAL_TOL};
use crate::error::SynthError;
use crate::io_maps::{assemble_io, controller_from_io_maps, io_extents, io_freq_maps, io_index_maps, io_maps_from_f, IOMapSet};
use crate::plant::PlantParams;
use crate::series::{CausalSeries, LaurentSeries, Series};
use crate::sl_maps::{
    assemble_sl, build_r12, controller_from_sl_maps, recover_controller_sl, sl_extents, sl_freq_maps, sl_index_maps, sl_maps_from_f,
    SLMapSet,
};
use crate::spatial::{random_fir, ExtentVector, LaurentVector};

/// Relative tolerance for controller values computed along different paths.
pub const CONTROLLER_RTOL: f64 = 1e-10;
/// Number of random `(θ, z)` samples per controller comparison.
pub const CONTROLLER_SAMPLES: usize = 100;
/// Radii of the sample points in the `z` plane.
pub const SAMPLE_RADII: [f64; 3] = [0.5, 1.0, 2.0];

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
        self.notes.extend(other.notes);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Prefixes every check name with `scope`.
    pub fn scoped(mut self, scope: &str) -> Self {
        for c in &mut self.checks {
            c.name = format!("{scope}: {}", c.name);
        }
        self
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in &self.notes {
            writeln!(f, "NOTE {n}")?;
        }
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            if c.detail.is_empty() {
                writeln!(f, "[{tag}] {}", c.name)?;
            } else {
                writeln!(f, "[{tag}] {}: {}", c.name, c.detail)?;
            }
        }
        let failed = self.failures().count();
        writeln!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

fn rel_diff(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

/// Coefficientwise comparison of two assembled stacks.
pub fn compare_stacks(sl: &AssembledMapPair, io: &AssembledMapPair, tol: f64) -> Check {
    let m = sl.compare(io);
    Check {
        name: "stacks equal coefficientwise".into(),
        passed: m.diff <= tol,
        detail: if m.diff == 0.0 {
            "identical".into()
        } else {
            format!("largest difference at {m}")
        },
    }
}

/// Recovered controllers from the SL maps, the IO maps and the closed-form
/// expression at random sample points, for a random free parameter of extent `e`.
pub fn compare_controllers(p: &PlantParams, e: usize, rng: &mut ChaCha8Rng) -> Result<Check, SynthError> {
    let f = random_fir(rng, e, 4);
    let sl = sl_maps_from_f(p, &f)?;
    let io = io_maps_from_f(p, &f)?;
    let mut worst = 0.0f64;
    let mut skipped = 0;
    for i in 0..CONTROLLER_SAMPLES {
        let theta = rng.gen_range(0.0..2.0 * PI);
        let z = Complex64::from_polar(SAMPLE_RADII[i % SAMPLE_RADII.len()], rng.gen_range(0.0..2.0 * PI));
        let f_eval = f.spatial_eval(theta).eval(z);
        let values = (
            controller_from_sl_maps(&sl.eval_at(theta, z)),
            controller_from_io_maps(&io.eval_at(theta, z)),
            recover_controller_sl(p, f_eval, theta, z),
        );
        match values {
            (Ok(a), Ok(b), Ok(c)) => worst = worst.max(rel_diff(a, c)).max(rel_diff(b, c)),
            _ => skipped += 1,
        }
    }
    Ok(Check {
        name: format!("controllers agree (E={e})"),
        passed: worst <= CONTROLLER_RTOL && skipped < CONTROLLER_SAMPLES,
        detail: format!("max relative difference {worst:.3e} over {} samples", CONTROLLER_SAMPLES - skipped),
    })
}

/// Equality of the SL and IO stacks and of the controllers they define.
pub fn check_equivalence_stacks(p: &PlantParams, e: usize, tol: f64, seed: u64) -> Report {
    let mut report = Report::default();
    let stacks = assemble_sl(p, e).and_then(|sl| Ok((sl, assemble_io(p, e)?)));
    match stacks {
        Ok((sl, io)) => {
            let c = compare_stacks(&sl, &io, tol);
            if e == 0 {
                report.note(format!(
                    "E=0: the SL and IO stacks {} at this extent",
                    if c.passed { "coincide" } else { "DIFFER" }
                ));
            }
            report.checks.push(c);
        }
        Err(err) => report.push("stacks assemble", false, err.to_string()),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match compare_controllers(p, e, &mut rng) {
        Ok(c) => report.checks.push(c),
        Err(err) => report.push("controllers agree", false, err.to_string()),
    }
    report
}

/// Maps whose causality can be checked, split by the strength of the requirement.
pub trait ClosedLoopMaps {
    /// Maps that must have a zero constant term.
    fn strictly_causal(&self) -> Vec<(&'static str, &LaurentVector)>;
    /// Maps that need only be causal.
    fn causal(&self) -> Vec<(&'static str, &LaurentVector)>;
}

impl ClosedLoopMaps for SLMapSet<LaurentVector> {
    fn strictly_causal(&self) -> Vec<(&'static str, &LaurentVector)> {
        SLMapSet::strictly_causal(self).to_vec()
    }

    fn causal(&self) -> Vec<(&'static str, &LaurentVector)> {
        vec![("l", &self.l)]
    }
}

impl ClosedLoopMaps for IOMapSet<LaurentVector> {
    fn strictly_causal(&self) -> Vec<(&'static str, &LaurentVector)> {
        Vec::new()
    }

    fn causal(&self) -> Vec<(&'static str, &LaurentVector)> {
        self.named().to_vec()
    }
}

fn membership_violation(v: &LaurentVector, strict: bool) -> Option<String> {
    for (k, s) in v.iter() {
        if s.coeffs().iter().any(|c| !c.is_finite()) {
            return Some(format!("non-finite coefficient at offset {k}"));
        }
        let report = s.causal_check(CAUSAL_TOL);
        if !report.causal {
            return Some(format!("acausal at offset {k}: {:?}", report.offenders));
        }
        if strict && s.coeff_at_power(0).abs() > CAUSAL_TOL {
            return Some(format!("nonzero constant term {:e} at offset {k}", s.coeff_at_power(0)));
        }
    }
    None
}

/// Strict causality where required, causality everywhere, and finite coefficients.
pub fn check_membership<M: ClosedLoopMaps>(maps: &M) -> Report {
    let mut report = Report::default();
    let all = maps
        .strictly_causal()
        .into_iter()
        .map(|(n, v)| (n, v, true))
        .chain(maps.causal().into_iter().map(|(n, v)| (n, v, false)));
    for (name, v, strict) in all {
        match membership_violation(v, strict) {
            None => report.push(format!("{name} membership"), true, ""),
            Some(why) => report.push(format!("{name} membership"), false, why),
        }
    }
    report
}

/// `r12` built from `g` and `f`, with one coefficient of the fixed part altered.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BrokenDecomposition {
    /// A `z^-1` term is present.
    LeadingTerm,
    /// The `z^-2` coefficient differs from one.
    SecondTerm,
    /// The `z^-3` coefficient differs from `σ + β`.
    ThirdTerm,
}

pub fn broken_r12(p: &PlantParams, f: &ExtentVector, which: BrokenDecomposition) -> ExtentVector {
    let mut r = build_r12(p, f);
    let delay = match which {
        BrokenDecomposition::LeadingTerm => 1,
        BrokenDecomposition::SecondTerm => 2,
        BrokenDecomposition::ThirdTerm => 3,
    };
    let bumped = r.at(0).plus(&CausalSeries::monomial(delay, 0.5));
    r.set(0, bumped);
    r
}

/// Membership for maps built from valid decompositions, and rejection of
/// each kind of broken decomposition.
pub fn check_decomposition_membership(p: &PlantParams, e: usize, trials: usize, rng: &mut ChaCha8Rng) -> Report {
    let mut report = Report::default();
    let mut false_fail = 0;
    let mut false_pass = 0;
    for _ in 0..trials {
        let f = random_fir(rng, e, 5);
        let r12 = build_r12(p, &f);
        if !check_membership(&sl_index_maps(p, &r12)).passed() || !check_membership(&io_index_maps(p, &r12)).passed() {
            false_fail += 1;
        }
        for which in [
            BrokenDecomposition::LeadingTerm,
            BrokenDecomposition::SecondTerm,
            BrokenDecomposition::ThirdTerm,
        ] {
            let bad = broken_r12(p, &f, which);
            if check_membership(&sl_index_maps(p, &bad)).passed() || check_membership(&io_index_maps(p, &bad)).passed() {
                false_pass += 1;
            }
        }
    }
    report.push(
        format!("decomposed maps are members (E={e})"),
        false_fail == 0,
        format!("{false_fail} of {trials} rejected"),
    );
    report.push(
        format!("broken decompositions are rejected (E={e})"),
        false_pass == 0,
        format!("{false_pass} of {} accepted", 3 * trials),
    );
    report
}

fn affinity_gap(pair: &AssembledMapPair, f1: &ExtentVector, f2: &ExtentVector) -> f64 {
    let e = pair.input_extent;
    let sum = pair.evaluate(&f1.plus(f2));
    let zero = pair.evaluate(&ExtentVector::zeros(e));
    let a = pair.evaluate(f1);
    let b = pair.evaluate(f2);
    sum.iter()
        .zip(&zero)
        .zip(a.iter().zip(&b))
        .map(|((s, z), (x, y))| s.plus(z).max_abs_diff(&x.plus(y)))
        .fold(0.0, f64::max)
}

/// Largest difference between the spatial transforms of index-domain maps and the
/// fixed-frequency formulas, over a uniform grid of `points` frequencies.
pub fn freq_index_gap(p: &PlantParams, f: &ExtentVector, points: usize) -> Result<f64, SynthError> {
    let sl = sl_maps_from_f(p, f)?;
    let io = io_maps_from_f(p, f)?;
    let r12 = build_r12(p, f);
    let mut worst = 0.0f64;
    for i in 0..points {
        let theta = 2.0 * PI * i as f64 / points as f64;
        let r = r12.spatial_eval(theta);
        let (re, im) = (r.real_part(), r.imag_part());
        // the maps are affine in r12 with real coefficients
        let pairs_sl = (sl_freq_maps(p, theta, &re), sl_freq_maps(p, theta, &im), sl_freq_maps(p, theta, &CausalSeries::zero()));
        let pairs_io = (io_freq_maps(p, theta, &re), io_freq_maps(p, theta, &im), io_freq_maps(p, theta, &CausalSeries::zero()));
        let mut compare = |idx: &ExtentVector, a: &LaurentSeries, b: &LaurentSeries, z: &LaurentSeries| {
            let got = idx.spatial_eval(theta);
            worst = worst
                .max(got.real_part().max_abs_diff(&a.causal_part()))
                .max(got.imag_part().max_abs_diff(&(b - z).causal_part()));
        };
        for (k, (_, idx)) in sl.named().iter().enumerate() {
            compare(idx, pairs_sl.0.named()[k].1, pairs_sl.1.named()[k].1, pairs_sl.2.named()[k].1);
        }
        for (k, (_, idx)) in io.named().iter().enumerate() {
            compare(idx, pairs_io.0.named()[k].1, pairs_io.1.named()[k].1, pairs_io.2.named()[k].1);
        }
    }
    Ok(worst)
}

/// Affinity, Toeplitz structure, extent bounds and frequency/index agreement.
pub fn check_affine_laws(p: &PlantParams, e: usize, seed: u64) -> Report {
    let mut report = Report::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (sl, io) = match assemble_sl(p, e).and_then(|sl| Ok((sl, assemble_io(p, e)?))) {
        Ok(x) => x,
        Err(err) => {
            report.push("stacks assemble", false, err.to_string());
            return report;
        }
    };

    let f1 = random_fir(&mut rng, e, 4);
    let f2 = random_fir(&mut rng, e, 4);
    for (name, pair) in [("sl", &sl), ("io", &io)] {
        let gap = affinity_gap(pair, &f1, &f2);
        report.push(format!("{name} stack is affine"), gap < 1e-10, format!("max deviation {gap:.3e}"));
        let bad: Vec<_> = pair
            .blocks
            .iter()
            .filter(|b| !b.v.is_toeplitz(1e-12))
            .map(|b| b.name.clone())
            .collect();
        report.push(format!("{name} blocks are Toeplitz"), bad.is_empty(), bad.join(", "));
    }

    if p.coupling() != 0.0 {
        let f = random_fir(&mut rng, e, 4);
        match (sl_maps_from_f(p, &f), io_maps_from_f(p, &f)) {
            (Ok(s), Ok(i)) => {
                let (ms, mi) = (s.measured_extents(), i.measured_extents());
                report.push("SL extents attain bounds", ms == sl_extents(e), format!("measured {ms:?}, bound {:?}", sl_extents(e)));
                report.push("IO extents attain bounds", mi == io_extents(e), format!("measured {mi:?}, bound {:?}", io_extents(e)));
            }
            (Err(err), _) | (_, Err(err)) => report.push("extent maps", false, err.to_string()),
        }
        let zero = ExtentVector::zeros(e);
        match (sl_maps_from_f(p, &zero), io_maps_from_f(p, &zero)) {
            (Ok(s), Ok(i)) => {
                let (ms, mi) = (s.measured_extents(), i.measured_extents());
                report.push("SL extents at f=0 hit the floor", ms == sl_extents(0), format!("measured {ms:?}"));
                report.push("IO extents at f=0 hit the floor", mi == io_extents(0), format!("measured {mi:?}"));
            }
            (Err(err), _) | (_, Err(err)) => report.push("floor maps", false, err.to_string()),
        }
    } else {
        report.note("zero coupling: extent attainment checks skipped");
    }

    let f = random_fir(&mut rng, e, 4);
    match freq_index_gap(p, &f, 16) {
        Ok(gap) => report.push("index maps match frequency formulas", gap < 1e-10, format!("max deviation {gap:.3e}")),
        Err(err) => report.push("index maps match frequency formulas", false, err.to_string()),
    }

    let decoupled = PlantParams { kappa: 0.0, ..*p };
    match assemble_sl(&decoupled, e).and_then(|sl| Ok((sl, assemble_io(&decoupled, e)?))) {
        Ok((s, i)) => {
            let diag = s.blocks.iter().chain(&i.blocks).all(|b| b.v.is_diagonal());
            report.push("zero coupling gives diagonal blocks", diag, "");
        }
        Err(err) => report.push("zero coupling gives diagonal blocks", false, err.to_string()),
    }
    report
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditConfig {
    pub params: Vec<PlantParams>,
    pub extents: Vec<usize>,
    pub seed: u64,
    /// Coefficient tolerance for the stack comparison.
    pub tol: f64,
    /// Perturbs one coefficient of the IO stack before comparing; the audit must then fail.
    pub inject_fault: bool,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            params: vec![PlantParams::default()],
            extents: vec![0, 1, 2, 3],
            seed: 0,
            tol: 1e-11,
            inject_fault: false,
        }
    }
}

/// Draws plant parameters uniformly from `[-2, 2]³`.
pub fn random_params(rng: &mut ChaCha8Rng, count: usize) -> Vec<PlantParams> {
    (0..count)
        .map(|_| PlantParams {
            alpha: rng.gen_range(-2.0..2.0),
            beta: rng.gen_range(-2.0..2.0),
            kappa: rng.gen_range(-2.0..2.0),
        })
        .collect()
}

/// The full battery for every parameter triple and extent.
pub fn run_audit(cfg: &AuditConfig) -> Report {
    let mut report = Report::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for p in &cfg.params {
        let label = format!("alpha={} beta={} kappa={}", p.alpha, p.beta, p.kappa);
        for &e in &cfg.extents {
            let scope = format!("{label} E={e}");
            let mut eq = check_equivalence_stacks(p, e, cfg.tol, rng.gen());
            if cfg.inject_fault {
                match (assemble_sl(p, e), assemble_io(p, e)) {
                    (Ok(sl), Ok(mut io)) => {
                        io.perturb_v(0, 0, 0, 4, 1e-6);
                        let mut c = compare_stacks(&sl, &io, cfg.tol);
                        c.name = format!("{} (injected fault)", c.name);
                        eq.checks.push(c);
                    }
                    _ => eq.push("injected fault", false, "stacks failed to assemble"),
                }
            }
            report.extend(eq.scoped(&scope));
            report.extend(check_affine_laws(p, e, rng.gen()).scoped(&scope));
            report.extend(check_decomposition_membership(p, e, 10, &mut rng).scoped(&scope));
        }
    }
    report
}
