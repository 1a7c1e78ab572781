//! System-level parameterization: the nine closed-loop maps written in terms of
//! `r12`, the causal decomposition `r12 = S f + g`, and the stacked affine map
//! from `f` to the cost vector `(n1, r12, n2, r22, ℓ, m2)`.

use num_complex::Complex64;

use crate::affine::{substitute_decomposition, AffineBlock, AffineMapPair, AssembledMapPair, RawMapPair, SeriesMatrix, CAUSAL_TOL};
use crate::error::SynthError;
use crate::plant::PlantParams;
use crate::series::{CausalSeries, LaurentSeries, Series};
use crate::spatial::{ExtentVector, LaurentVector, SpatialVector};

/// Magnitude below which a controller denominator counts as a pole.
pub const POLE_TOL: f64 = 1e-12;

/// Names of the cost-stack blocks, in stacking order.
pub const SL_BLOCKS: [&str; 6] = ["n1", "r12", "n2", "r22", "l", "m2"];

/// The nine system responses. `T` is a fixed-`θ` series, a spatial vector or a
/// complex frequency-response value.
#[derive(Clone, Debug, PartialEq)]
pub struct SLMapSet<T> {
    pub r11: T,
    pub r12: T,
    pub r21: T,
    pub r22: T,
    pub m1: T,
    pub m2: T,
    pub n1: T,
    pub n2: T,
    pub l: T,
}

impl<T> SLMapSet<T> {
    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> SLMapSet<U> {
        SLMapSet {
            r11: f(&self.r11),
            r12: f(&self.r12),
            r21: f(&self.r21),
            r22: f(&self.r22),
            m1: f(&self.m1),
            m2: f(&self.m2),
            n1: f(&self.n1),
            n2: f(&self.n2),
            l: f(&self.l),
        }
    }

    /// `(name, map)` for all nine maps.
    pub fn named(&self) -> [(&'static str, &T); 9] {
        [
            ("r11", &self.r11),
            ("r12", &self.r12),
            ("r21", &self.r21),
            ("r22", &self.r22),
            ("m1", &self.m1),
            ("m2", &self.m2),
            ("n1", &self.n1),
            ("n2", &self.n2),
            ("l", &self.l),
        ]
    }

    /// The maps entering the cost, in stacking order.
    pub fn cost_stack(&self) -> [&T; 6] {
        [&self.n1, &self.r12, &self.n2, &self.r22, &self.l, &self.m2]
    }

    /// Maps that must be strictly causal (all but `ℓ`).
    pub fn strictly_causal(&self) -> [(&'static str, &T); 8] {
        [
            ("r11", &self.r11),
            ("r12", &self.r12),
            ("r21", &self.r21),
            ("r22", &self.r22),
            ("m1", &self.m1),
            ("m2", &self.m2),
            ("n1", &self.n1),
            ("n2", &self.n2),
        ]
    }
}

/// Bounds on the extents of the four block maps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SLExtents {
    pub r: usize,
    pub n: usize,
    pub m: usize,
    pub l: usize,
}

pub fn sl_extents(e: usize) -> SLExtents {
    SLExtents {
        r: (e + 1).max(2),
        n: (e + 1).max(2),
        m: (e + 2).max(3),
        l: (e + 2).max(3),
    }
}

impl SLMapSet<ExtentVector> {
    /// Largest measured extent in each of the `R`, `N`, `M`, `L` blocks.
    pub fn measured_extents(&self) -> SLExtents {
        SLExtents {
            r: [&self.r11, &self.r12, &self.r21, &self.r22].iter().map(|v| v.ext()).max().unwrap_or(0),
            n: self.n1.ext().max(self.n2.ext()),
            m: self.m1.ext().max(self.m2.ext()),
            l: self.l.ext(),
        }
    }

    /// Every map's spatial transform at `θ`, evaluated at `z`.
    pub fn eval_at(&self, theta: f64, z: Complex64) -> SLMapSet<Complex64> {
        self.map(|v| v.spatial_eval(theta).eval(z))
    }
}

/// The maps as functions of `r12` at a fixed spatial frequency.
pub fn sl_freq_maps(p: &PlantParams, theta: f64, r12: &CausalSeries) -> SLMapSet<LaurentSeries> {
    let r = r12.to_laurent();
    let zs = LaurentSeries::z_minus(p.sigma_at(theta));
    let zb = p.z_minus_beta();
    let one = LaurentSeries::constant(1.0);
    let zszb = &zs * &zb;
    let cross = &(&zszb * &r) - &one;
    SLMapSet {
        r11: &zs * &r,
        r12: r.clone(),
        r21: cross.clone(),
        r22: &zb * &r,
        m1: &(&(&zs * &zszb) * &r) - &zs,
        m2: cross.clone(),
        n1: cross,
        n2: &(&(&zb * &zszb) * &r) - &zb,
        l: &(&(&zszb * &zszb) * &r) - &zszb,
    }
}

/// The same maps evaluated at a point `z` of the complex plane, given the value of `r12` there.
pub fn sl_point_values(p: &PlantParams, theta: f64, z: Complex64, r12: Complex64) -> SLMapSet<Complex64> {
    let zs = z - p.sigma_at(theta);
    let zb = z - p.beta;
    let cross = zs * zb * r12 - 1.0;
    SLMapSet {
        r11: zs * r12,
        r12,
        r21: cross,
        r22: zb * r12,
        m1: zs * zs * zb * r12 - zs,
        m2: cross,
        n1: cross,
        n2: zs * zb * zb * r12 - zb,
        l: zs * zs * zb * zb * r12 - zb * zs,
    }
}

/// The fixed part `g` of the decomposition: `z^-3 ακ` at `k = ±1` and
/// `z^-2 + (α+β) z^-3` at `k = 0`.
pub fn decomposition_offset(p: &PlantParams) -> LaurentVector {
    let side = LaurentSeries::monomial(-3, p.coupling());
    let mid = LaurentSeries::new(2, vec![1.0, p.alpha + p.beta]);
    SpatialVector::from_entries(1, vec![side.clone(), mid, side])
}

/// `r12 = S f + g`, of extent `E + 1`.
pub fn build_r12(p: &PlantParams, f: &ExtentVector) -> ExtentVector {
    let e = f.extent() as i64;
    let g = decomposition_offset(p).map(|s| s.causal_part());
    let mut out = ExtentVector::zeros(f.extent() + 1);
    for k in -(e + 1)..=(e + 1) {
        out.set(k, f.at(k).delayed(4).plus(&g.at(k)));
    }
    out
}

fn taps(side: LaurentSeries, mid: LaurentSeries) -> LaurentVector {
    SpatialVector::from_entries(1, vec![side.clone(), mid, side])
}

/// The six raw blocks acting on `r12` of extent `E + 1`.
pub fn build_sl_blocks(p: &PlantParams, e: usize) -> RawMapPair {
    let ak = p.coupling();
    let zb = p.z_minus_beta();
    let zb2 = &zb * &zb;
    let za = LaurentSeries::z_minus(p.alpha);
    let input = e + 1;

    let n1_taps = taps(&zb * &LaurentSeries::constant(-ak), &zb * &za);
    let v_n1 = SeriesMatrix::from_kernel(&n1_taps, input + 1, input);
    let h_n1 = LaurentVector::impulse(0, LaurentSeries::constant(-1.0));

    let v_r12 = SeriesMatrix::identity(input);

    let v_n2 = v_n1.times_series(&zb);
    let h_n2 = h_n1.times_series(&zb);

    let v_r22 = SeriesMatrix::identity(input).times_series(&zb);

    let outer = LaurentSeries::constant(ak * ak);
    let inner = za.scaled(-2.0 * ak);
    let centre = &(&za * &za) + &LaurentSeries::constant(2.0 * ak * ak);
    let l_taps = LaurentVector::from_entries(2, vec![outer.clone(), inner.clone(), centre, inner, outer]).times_series(&zb2);
    let v_l = SeriesMatrix::from_kernel(&l_taps, input + 2, input);
    let h_l = taps(LaurentSeries::constant(ak), LaurentSeries::new(-1, vec![-1.0, p.alpha])).times_series(&zb);

    AffineMapPair {
        input_extent: input,
        blocks: vec![
            AffineBlock::new("n1", v_n1.clone(), h_n1.clone()),
            AffineBlock::new("r12", v_r12, LaurentVector::zeros(input)),
            AffineBlock::new("n2", v_n2, h_n2),
            AffineBlock::new("r22", v_r22, LaurentVector::zeros(input)),
            AffineBlock::new("l", v_l, h_l),
            AffineBlock::new("m2", v_n1, h_n1),
        ],
    }
}

/// The stacked map `f ↦ V f + h` from the free parameter of extent `E` to the cost vector.
pub fn assemble_sl(p: &PlantParams, e: usize) -> Result<AssembledMapPair, SynthError> {
    substitute_decomposition(&build_sl_blocks(p, e), &decomposition_offset(p))
}

/// Index-domain maps from a given `r12`, before any causality check.
pub fn sl_index_maps(p: &PlantParams, r12: &ExtentVector) -> SLMapSet<LaurentVector> {
    let zs = p.z_minus_sigma_kernel();
    let zb = p.z_minus_beta();
    let delta = LaurentVector::impulse(0, LaurentSeries::constant(1.0));
    let r = r12.to_laurent();
    let zs_r = r.convolve(&zs);
    let cross = zs_r.times_series(&zb).minus(&delta);
    let zs_zb = zs.times_series(&zb);
    SLMapSet {
        r11: zs_r.clone(),
        r12: r.clone(),
        r21: cross.clone(),
        r22: r.times_series(&zb),
        m1: cross.convolve(&zs),
        m2: cross.clone(),
        n1: cross.clone(),
        n2: cross.times_series(&zb),
        l: cross.convolve(&zs_zb),
    }
}

/// Checks every map for causality and converts it to an [`ExtentVector`].
pub fn causal_maps(named: &[(&'static str, &LaurentVector)]) -> Result<Vec<ExtentVector>, SynthError> {
    named
        .iter()
        .map(|(name, v)| {
            v.to_causal(CAUSAL_TOL).map_err(|(offset, offenders)| SynthError::CausalityViolation {
                block: (*name).to_string(),
                offset,
                offenders,
            })
        })
        .collect()
}

impl SLMapSet<LaurentVector> {
    pub fn to_causal(&self) -> Result<SLMapSet<ExtentVector>, SynthError> {
        let v = causal_maps(&self.named())?;
        let mut it = v.into_iter();
        let mut next = || it.next().expect("nine maps");
        Ok(SLMapSet {
            r11: next(),
            r12: next(),
            r21: next(),
            r22: next(),
            m1: next(),
            m2: next(),
            n1: next(),
            n2: next(),
            l: next(),
        })
    }
}

/// All nine index-domain maps for the free parameter `f`.
pub fn sl_maps_from_f(p: &PlantParams, f: &ExtentVector) -> Result<SLMapSet<ExtentVector>, SynthError> {
    sl_index_maps(p, &build_r12(p, f)).to_causal()
}

/// The closed-form controller `K(θ, z)` for a given value `f(θ, z)` of the free parameter.
pub fn recover_controller_sl(p: &PlantParams, f_eval: Complex64, theta: f64, z: Complex64) -> Result<Complex64, SynthError> {
    let s = p.sigma_at(theta);
    let b = p.beta;
    let den = z * z + (s + b) * z + f_eval;
    if den.norm() < POLE_TOL {
        return Err(SynthError::PoleProximity { magnitude: den.norm() });
    }
    let num = (z - b) * (f_eval * (z - s) - z * s * (s + b)) - z * z * b * b;
    Ok(num / den)
}

/// `L - M R^-1 N` with `R = [r11 r12; r21 r22]`, `M = [m1 m2]`, `N = [n1; n2]`.
///
/// `R^-1 N` is found by Gaussian elimination with partial pivoting.
pub fn controller_from_sl_maps(v: &SLMapSet<Complex64>) -> Result<Complex64, SynthError> {
    let (mut a, mut b, mut c, mut d) = (v.r11, v.r12, v.r21, v.r22);
    let (mut n1, mut n2) = (v.n1, v.n2);
    let swapped = c.norm() > a.norm();
    if swapped {
        std::mem::swap(&mut a, &mut c);
        std::mem::swap(&mut b, &mut d);
        std::mem::swap(&mut n1, &mut n2);
    }
    if a.norm() < POLE_TOL {
        return Err(SynthError::PoleProximity { magnitude: a.norm() });
    }
    let l21 = c / a;
    let u22 = d - l21 * b;
    if u22.norm() < POLE_TOL {
        return Err(SynthError::PoleProximity { magnitude: u22.norm() });
    }
    let x2 = (n2 - l21 * n1) / u22;
    let x1 = (n1 - b * x2) / a;
    Ok(v.l - (v.m1 * x1 + v.m2 * x2))
}
