//! Spatially indexed columns of transfer functions and their norms.
//!
//! A [`SpatialVector`] stores the response at sites `-E..=E` to an impulse
//! injected at site 0. Sites outside the window are implicitly zero.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::SynthError;
use crate::series::{CausalSeries, ComplexSeries, LaurentSeries, Series};

#[derive(Clone, Debug, PartialEq)]
pub struct SpatialVector<S> {
    extent: usize,
    entries: Vec<S>,
}

/// Spatial column of causal series; the index-domain form of a closed-loop map.
pub type ExtentVector = SpatialVector<CausalSeries>;
/// Spatial column of two-sided series, used before causality is established.
pub type LaurentVector = SpatialVector<LaurentSeries>;

impl<S: Series> SpatialVector<S> {
    pub fn zeros(extent: usize) -> Self {
        Self {
            extent,
            entries: vec![S::zero(); 2 * extent + 1],
        }
    }

    /// Builds a vector from entries ordered by offset `-extent..=extent`.
    ///
    /// Panics if `entries.len() != 2 * extent + 1`.
    pub fn from_entries(extent: usize, entries: Vec<S>) -> Self {
        assert_eq!(
            entries.len(),
            2 * extent + 1,
            "spatial vector of extent {extent} needs {} entries",
            2 * extent + 1
        );
        Self { extent, entries }
    }

    /// `s` at offset 0, zero elsewhere.
    pub fn impulse(extent: usize, s: S) -> Self {
        let mut v = Self::zeros(extent);
        v.entries[extent] = s;
        v
    }

    /// Declared extent (half-width of the stored window).
    pub fn extent(&self) -> usize {
        self.extent
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    pub fn get(&self, k: i64) -> Option<&S> {
        let idx = k + self.extent as i64;
        (0..self.entries.len() as i64)
            .contains(&idx)
            .then(|| &self.entries[idx as usize])
    }

    /// Entry at offset `k`, or zero outside the window.
    pub fn at(&self, k: i64) -> S {
        self.get(k).cloned().unwrap_or_else(S::zero)
    }

    pub fn set(&mut self, k: i64, s: S) {
        let idx = k + self.extent as i64;
        assert!(
            (0..self.entries.len() as i64).contains(&idx),
            "offset {k} outside extent {}",
            self.extent
        );
        self.entries[idx as usize] = s;
    }

    /// `(offset, entry)` pairs in increasing offset order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, &S)> {
        let e = self.extent as i64;
        self.entries.iter().enumerate().map(move |(i, s)| (i as i64 - e, s))
    }

    /// Measured extent: largest `|k|` with a nonzero entry (0 for the zero vector).
    pub fn ext(&self) -> usize {
        self.iter()
            .filter(|(_, s)| !s.is_zero())
            .map(|(k, _)| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Series::is_zero)
    }

    /// Same entries stored in a window of `extent` (which may shrink onto zeros only).
    pub fn with_extent(&self, extent: usize) -> Self {
        assert!(
            extent >= self.ext(),
            "cannot shrink to extent {extent}: nonzero entry at {}",
            self.ext()
        );
        let e = extent as i64;
        Self::from_entries(extent, (-e..=e).map(|k| self.at(k)).collect())
    }

    pub fn map<T: Series>(&self, f: impl Fn(&S) -> T) -> SpatialVector<T> {
        SpatialVector {
            extent: self.extent,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let e = self.extent.max(other.extent) as i64;
        SpatialVector::from_entries(
            e as usize,
            (-e..=e).map(|k| self.at(k).plus(&other.at(k))).collect(),
        )
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scaled(-1.0))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.map(|s| s.scaled(factor))
    }

    /// Multiplies every entry by the same series (a spatially static factor).
    pub fn times_series(&self, s: &S) -> Self {
        self.map(|x| x.times(s))
    }

    /// Spatial convolution; the result has extent `self.extent + other.extent`.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.extent + other.extent);
        for (k, a) in self.iter().filter(|(_, a)| !a.is_zero()) {
            for (j, b) in other.iter().filter(|(_, b)| !b.is_zero()) {
                let idx = (k + j + out.extent as i64) as usize;
                out.entries[idx] = out.entries[idx].plus(&a.times(b));
            }
        }
        out
    }

    /// Largest coefficientwise difference over the union of both windows.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let e = self.extent.max(other.extent) as i64;
        (-e..=e)
            .map(|k| self.at(k).max_abs_diff(&other.at(k)))
            .fold(0.0, f64::max)
    }
}

impl LaurentVector {
    /// Converts every entry to a causal series, reporting the first offender.
    pub fn to_causal(&self, tol: f64) -> Result<ExtentVector, (i64, Vec<(i32, f64)>)> {
        let mut out = Vec::with_capacity(self.entries.len());
        for (k, s) in self.iter() {
            match s.to_causal(tol) {
                Ok(c) => out.push(c),
                Err(report) => return Err((k, report.offenders)),
            }
        }
        Ok(SpatialVector::from_entries(self.extent, out))
    }
}

impl ExtentVector {
    pub fn to_laurent(&self) -> LaurentVector {
        self.map(CausalSeries::to_laurent)
    }

    /// Sum over offsets and delays of squared coefficients.
    pub fn energy(&self) -> f64 {
        self.entries.iter().map(CausalSeries::energy).sum()
    }

    /// Index-domain 2-norm: square root of the summed squared coefficients.
    pub fn h2_norm(&self) -> H2Value {
        H2Value(self.energy().sqrt())
    }

    /// 2-norm computed from the spatial transform on a uniform `θ` grid.
    ///
    /// The integrand is a trigonometric polynomial of degree `2·extent`, so
    /// the periodic trapezoid rule is exact once `grid_size >= 2·extent + 2`.
    pub fn h2_norm_freq(&self, grid_size: usize) -> Result<H2Value, SynthError> {
        Ok(H2Value(self.energy_freq(grid_size)?.sqrt()))
    }

    /// Squared norm by periodic trapezoid quadrature in `θ`.
    pub fn energy_freq(&self, grid_size: usize) -> Result<f64, SynthError> {
        let needed = 2 * self.extent + 2;
        if grid_size < needed {
            return Err(SynthError::GridTooSmall {
                grid: grid_size,
                needed,
            });
        }
        let total: f64 = (0..grid_size)
            .map(|m| {
                let theta = 2.0 * PI * m as f64 / grid_size as f64;
                self.spatial_eval(theta).energy()
            })
            .sum();
        Ok(total / grid_size as f64)
    }

    /// Spatial transform `Σ_k v_k e^{-ikθ}`, a causal series with complex coefficients.
    pub fn spatial_eval(&self, theta: f64) -> ComplexSeries {
        let len = self.entries.iter().map(CausalSeries::len).max().unwrap_or(0);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
        for (k, s) in self.iter() {
            let phase = Complex64::from_polar(1.0, -(k as f64) * theta);
            for (c, &x) in coeffs.iter_mut().zip(s.coeffs()) {
                *c += phase * x;
            }
        }
        ComplexSeries { coeffs }
    }

    /// Largest delay stored in any entry.
    pub fn max_len(&self) -> usize {
        self.entries.iter().map(CausalSeries::len).max().unwrap_or(0)
    }
}

pub fn h2_norm(v: &ExtentVector) -> H2Value {
    v.h2_norm()
}

pub fn h2_norm_freq(v: &ExtentVector, grid_size: usize) -> Result<H2Value, SynthError> {
    v.h2_norm_freq(grid_size)
}

pub fn spatial_eval(v: &ExtentVector, theta: f64) -> ComplexSeries {
    v.spatial_eval(theta)
}

/// A vector of the given extent whose entries have `len` coefficients drawn
/// uniformly from `[-1, 1)`.
pub fn random_fir<R: rand::Rng + ?Sized>(rng: &mut R, extent: usize, len: usize) -> ExtentVector {
    let entries = (0..2 * extent + 1)
        .map(|_| CausalSeries::new((0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()))
        .collect();
    ExtentVector::from_entries(extent, entries)
}

/// A nonnegative 2-norm value.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct H2Value(f64);

impl H2Value {
    pub fn value(self) -> f64 {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cs(c: &[f64]) -> CausalSeries {
        CausalSeries::new(c.to_vec())
    }

    #[test]
    fn norms_of_simple_vectors() {
        let v = ExtentVector::impulse(0, cs(&[1.0, 2.0, 3.0]));
        assert!((v.h2_norm().value() - 14f64.sqrt()).abs() < 1e-15);
        assert_eq!(ExtentVector::zeros(3).h2_norm().value(), 0.0);
        let two = ExtentVector::from_entries(1, vec![cs(&[1.0]), CausalSeries::zero(), cs(&[1.0])]);
        assert!((two.h2_norm().value() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn freq_norm_edge_cases() {
        assert_eq!(ExtentVector::zeros(2).h2_norm_freq(8).unwrap().value(), 0.0);
        let delta = ExtentVector::impulse(0, cs(&[1.0]));
        assert!((delta.h2_norm_freq(4).unwrap().value() - 1.0).abs() < 1e-15);
        let v = ExtentVector::zeros(3);
        assert!(matches!(
            v.h2_norm_freq(7),
            Err(SynthError::GridTooSmall { grid: 7, needed: 8 })
        ));
    }

    #[test]
    fn spatial_eval_identities() {
        let a = cs(&[0.5, 1.0]);
        let b = cs(&[2.0]);
        let v = ExtentVector::from_entries(1, vec![a.clone(), b.clone(), a.clone()]);
        let at0 = v.spatial_eval(0.0).real_part();
        assert!(at0.max_abs_diff(&cs(&[3.0, 2.0])) < 1e-15);
        // symmetric vector: b + 2a cos θ
        let theta = 0.7;
        let s = v.spatial_eval(theta);
        let expect = b.plus(&a.scaled(2.0 * theta.cos()));
        assert!(s.real_part().max_abs_diff(&expect) < 1e-14);
        assert!(s.max_imag() < 1e-14);
    }

    #[test]
    fn ext_and_reshape() {
        let mut v = ExtentVector::zeros(4);
        v.set(-2, cs(&[1.0]));
        assert_eq!(v.ext(), 2);
        let w = v.with_extent(2);
        assert_eq!(w.extent(), 2);
        assert_eq!(w.at(-2), cs(&[1.0]));
        assert_eq!(ExtentVector::zeros(3).ext(), 0);
    }

    #[test]
    fn convolution_of_impulses() {
        let k = ExtentVector::from_entries(1, vec![cs(&[1.0]), cs(&[2.0]), cs(&[3.0])]);
        let d = ExtentVector::impulse(2, cs(&[0.0, 1.0]));
        let c = k.convolve(&d);
        assert_eq!(c.extent(), 3);
        assert_eq!(c.at(-1), cs(&[0.0, 1.0]));
        assert_eq!(c.at(1), cs(&[0.0, 3.0]));
    }

    fn arb_vector() -> impl Strategy<Value = ExtentVector> {
        (0usize..5).prop_flat_map(|e| {
            prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 0..6), 2 * e + 1).prop_map(
                move |entries| {
                    ExtentVector::from_entries(e, entries.into_iter().map(CausalSeries::new).collect())
                },
            )
        })
    }

    proptest! {
        #[test]
        fn parseval(v in arb_vector()) {
            let idx = v.h2_norm().value();
            let freq = v.h2_norm_freq(64).unwrap().value();
            prop_assert!((idx - freq).abs() <= 1e-10 * (1.0 + idx));
        }

        #[test]
        fn symmetric_vectors_transform_to_real(v in arb_vector(), theta in 0.0f64..(2.0 * PI)) {
            let e = v.extent() as i64;
            let sym = ExtentVector::from_entries(
                v.extent(),
                (-e..=e).map(|k| v.at(k.abs())).collect(),
            );
            prop_assert!(sym.spatial_eval(theta).max_imag() < 1e-12);
        }
    }
}
