//! Scalar transfer functions stored as coefficient sequences in `z^-1`.
//!
//! [`CausalSeries`] holds `Σ_t c_t z^-t` for `t >= 0`. [`LaurentSeries`] lets the
//! exponent window extend into positive powers of `z`, which is what products
//! such as `(z-β)²(z-σ)² r` produce before the acausal terms cancel.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

/// Coefficients below this magnitude are trimmed from the ends of a series.
pub const TRIM_EPS: f64 = 1e-14;

fn trim_end(coeffs: &mut Vec<f64>) {
    while coeffs.last().is_some_and(|c| c.abs() < TRIM_EPS) {
        coeffs.pop();
    }
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn add_aligned(a: &[f64], b: &[f64], sign: f64) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    out[..a.len()].copy_from_slice(a);
    for (o, &y) in out.iter_mut().zip(b) {
        *o += sign * y;
    }
    out
}

/// Operations shared by the series types so spatial containers can be generic.
pub trait Series: Clone + fmt::Debug + PartialEq + Send + Sync {
    fn zero() -> Self;
    fn constant(c: f64) -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn scaled(&self, factor: f64) -> Self;
    /// Largest coefficientwise difference, aligning equal powers of `z`.
    fn max_abs_diff(&self, other: &Self) -> f64;
    /// Every `(power of z, coefficient)` pair with a nonzero coefficient.
    fn terms(&self) -> Vec<(i32, f64)>;
}

/// A causal transfer function `Σ_{t>=0} c_t z^-t`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CausalSeries {
    coeffs: Vec<f64>,
}

impl CausalSeries {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        trim_end(&mut coeffs);
        Self { coeffs }
    }

    /// `c · z^-delay`.
    pub fn monomial(delay: usize, c: f64) -> Self {
        let mut coeffs = vec![0.0; delay + 1];
        coeffs[delay] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `z^-t` (zero beyond the stored window).
    pub fn coeff(&self, t: usize) -> f64 {
        self.coeffs.get(t).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest delay with a stored coefficient.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Lowest delay with a nonzero coefficient.
    pub fn leading_delay(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| *c != 0.0)
    }

    /// Multiply by `z^-n`.
    pub fn delayed(&self, n: usize) -> Self {
        if self.coeffs.is_empty() {
            return Self::default();
        }
        let mut coeffs = vec![0.0; n];
        coeffs.extend_from_slice(&self.coeffs);
        Self { coeffs }
    }

    /// Sum of squared coefficients (the squared 2-norm of the impulse response).
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Frequency response at a point `z` of the complex plane.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let w = z.inv();
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * w + c)
    }

    pub fn to_laurent(&self) -> LaurentSeries {
        LaurentSeries::new(0, self.coeffs.clone())
    }
}

impl Series for CausalSeries {
    fn zero() -> Self {
        Self::default()
    }

    fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn plus(&self, other: &Self) -> Self {
        Self::new(add_aligned(&self.coeffs, &other.coeffs, 1.0))
    }

    fn times(&self, other: &Self) -> Self {
        Self::new(convolve(&self.coeffs, &other.coeffs))
    }

    fn scaled(&self, factor: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    fn max_abs_diff(&self, other: &Self) -> f64 {
        add_aligned(&self.coeffs, &other.coeffs, -1.0)
            .iter()
            .fold(0.0, |m, c| m.max(c.abs()))
    }

    fn terms(&self) -> Vec<(i32, f64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(t, &c)| (-(t as i32), c))
            .collect()
    }
}

/// A two-sided series `Σ_i c_i z^-(start+i)`; `start < 0` reaches positive powers of `z`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LaurentSeries {
    start: i32,
    coeffs: Vec<f64>,
}

impl LaurentSeries {
    /// Builds `Σ_i coeffs[i] z^-(start+i)` and trims small coefficients at both ends.
    pub fn new(start: i32, mut coeffs: Vec<f64>) -> Self {
        trim_end(&mut coeffs);
        let lead = coeffs
            .iter()
            .position(|c| c.abs() >= TRIM_EPS)
            .unwrap_or(coeffs.len());
        if lead == coeffs.len() {
            return Self::default();
        }
        coeffs.drain(..lead);
        Self {
            start: start + lead as i32,
            coeffs,
        }
    }

    /// `c · z^power`.
    pub fn monomial(power: i32, c: f64) -> Self {
        Self::new(-power, vec![c])
    }

    /// The first-order factor `z - c`.
    pub fn z_minus(c: f64) -> Self {
        Self::new(-1, vec![1.0, -c])
    }

    /// Exponent of `z^-1` attached to the first stored coefficient.
    pub fn start_delay(&self) -> i32 {
        self.start
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `z^power`.
    pub fn coeff_at_power(&self, power: i32) -> f64 {
        let idx = -power - self.start;
        if idx < 0 {
            return 0.0;
        }
        self.coeffs.get(idx as usize).copied().unwrap_or(0.0)
    }

    /// Highest power of `z` with a nonzero coefficient.
    pub fn max_power(&self) -> Option<i32> {
        (!self.coeffs.is_empty()).then_some(-self.start)
    }

    /// Coefficients of the strictly positive powers of `z`, as `(power, coefficient)`.
    pub fn acausal_part(&self) -> Vec<(i32, f64)> {
        self.terms().into_iter().filter(|(p, _)| *p > 0).collect()
    }

    /// Checks causality against `tol`; see [`causal_check`].
    pub fn causal_check(&self, tol: f64) -> CausalityReport {
        causal_check(self, tol)
    }

    /// Drops positive powers of `z` without inspecting them.
    pub fn causal_part(&self) -> CausalSeries {
        let mut coeffs = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate() {
            let delay = self.start + i as i32;
            if delay >= 0 {
                let d = delay as usize;
                if coeffs.len() <= d {
                    coeffs.resize(d + 1, 0.0);
                }
                coeffs[d] = c;
            }
        }
        CausalSeries::new(coeffs)
    }

    /// Converts to a [`CausalSeries`] if every acausal coefficient is within `tol`.
    pub fn to_causal(&self, tol: f64) -> Result<CausalSeries, CausalityReport> {
        let report = self.causal_check(tol);
        if report.causal {
            Ok(self.causal_part())
        } else {
            Err(report)
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let w = z.inv();
        let body = self
            .coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * w + c);
        body * w.powi(self.start)
    }

    fn dense_over(&self, lo: i32, hi: i32) -> Vec<f64> {
        let mut out = vec![0.0; (hi - lo) as usize];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[(self.start + i as i32 - lo) as usize] = c;
        }
        out
    }

    fn window(&self) -> Option<(i32, i32)> {
        (!self.coeffs.is_empty()).then(|| (self.start, self.start + self.coeffs.len() as i32))
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        match (self.window(), other.window()) {
            (None, None) => Self::default(),
            (Some(_), None) => self.clone(),
            (None, Some(_)) => other.scaled(sign),
            (Some((a0, a1)), Some((b0, b1))) => {
                let (lo, hi) = (a0.min(b0), a1.max(b1));
                let a = self.dense_over(lo, hi);
                let b = other.dense_over(lo, hi);
                Self::new(lo, add_aligned(&a, &b, sign))
            }
        }
    }
}

impl From<&CausalSeries> for LaurentSeries {
    fn from(s: &CausalSeries) -> Self {
        s.to_laurent()
    }
}

impl From<CausalSeries> for LaurentSeries {
    fn from(s: CausalSeries) -> Self {
        LaurentSeries::new(0, s.coeffs)
    }
}

impl Series for LaurentSeries {
    fn zero() -> Self {
        Self::default()
    }

    fn constant(c: f64) -> Self {
        Self::new(0, vec![c])
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn plus(&self, other: &Self) -> Self {
        self.combine(other, 1.0)
    }

    fn times(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::default();
        }
        Self::new(self.start + other.start, convolve(&self.coeffs, &other.coeffs))
    }

    fn scaled(&self, factor: f64) -> Self {
        Self::new(self.start, self.coeffs.iter().map(|c| c * factor).collect())
    }

    fn max_abs_diff(&self, other: &Self) -> f64 {
        self.combine(other, -1.0)
            .coeffs
            .iter()
            .fold(0.0, |m, c| m.max(c.abs()))
    }

    fn terms(&self) -> Vec<(i32, f64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, &c)| (-(self.start + i as i32), c))
            .collect()
    }
}

/// Outcome of a causality test on a [`LaurentSeries`].
#[derive(Clone, Debug, PartialEq)]
pub struct CausalityReport {
    pub causal: bool,
    /// `(power of z, coefficient)` for every positive power above tolerance.
    pub offenders: Vec<(i32, f64)>,
}

/// True iff every coefficient of a strictly positive power of `z` has magnitude `<= tol`.
pub fn causal_check(series: &LaurentSeries, tol: f64) -> CausalityReport {
    let offenders: Vec<_> = series
        .acausal_part()
        .into_iter()
        .filter(|(_, c)| c.abs() > tol)
        .collect();
    CausalityReport {
        causal: offenders.is_empty(),
        offenders,
    }
}

pub fn series_add(a: &CausalSeries, b: &CausalSeries) -> CausalSeries {
    a.plus(b)
}

pub fn series_mul(a: &LaurentSeries, b: &LaurentSeries) -> LaurentSeries {
    a.times(b)
}

macro_rules! impl_ops {
    ($ty:ty) => {
        impl Add for &$ty {
            type Output = $ty;
            fn add(self, rhs: Self) -> $ty {
                self.plus(rhs)
            }
        }
        impl Sub for &$ty {
            type Output = $ty;
            fn sub(self, rhs: Self) -> $ty {
                self.plus(&rhs.scaled(-1.0))
            }
        }
        impl Mul for &$ty {
            type Output = $ty;
            fn mul(self, rhs: Self) -> $ty {
                self.times(rhs)
            }
        }
        impl Mul<f64> for &$ty {
            type Output = $ty;
            fn mul(self, rhs: f64) -> $ty {
                self.scaled(rhs)
            }
        }
        impl Neg for &$ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                self.scaled(-1.0)
            }
        }
        impl Add for $ty {
            type Output = $ty;
            fn add(self, rhs: Self) -> $ty {
                self.plus(&rhs)
            }
        }
        impl Sub for $ty {
            type Output = $ty;
            fn sub(self, rhs: Self) -> $ty {
                &self - &rhs
            }
        }
        impl Mul for $ty {
            type Output = $ty;
            fn mul(self, rhs: Self) -> $ty {
                self.times(&rhs)
            }
        }
        impl Neg for $ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                self.scaled(-1.0)
            }
        }
    };
}

impl_ops!(CausalSeries);
impl_ops!(LaurentSeries);

fn fmt_terms(terms: &[(i32, f64)], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if terms.is_empty() {
        return write!(f, "0");
    }
    for (i, (p, c)) in terms.iter().enumerate() {
        if i > 0 {
            write!(f, " + ")?;
        }
        match p {
            0 => write!(f, "{c}")?,
            1 => write!(f, "{c}·z")?,
            _ => write!(f, "{c}·z^{p}")?,
        }
    }
    Ok(())
}

impl fmt::Display for CausalSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_terms(&self.terms(), f)
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_terms(&self.terms(), f)
    }
}

/// A causal series with complex coefficients, the result of a spatial transform.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComplexSeries {
    pub coeffs: Vec<Complex64>,
}

impl ComplexSeries {
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest imaginary part over all coefficients.
    pub fn max_imag(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.im.abs()))
    }

    pub fn real_part(&self) -> CausalSeries {
        CausalSeries::new(self.coeffs.iter().map(|c| c.re).collect())
    }

    pub fn imag_part(&self) -> CausalSeries {
        CausalSeries::new(self.coeffs.iter().map(|c| c.im).collect())
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let w = z.inv();
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * w + c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ls(start: i32, c: &[f64]) -> LaurentSeries {
        LaurentSeries::new(start, c.to_vec())
    }

    #[test]
    fn add_pads_and_trims() {
        let a = CausalSeries::new(vec![1.0, 2.0]);
        let b = CausalSeries::new(vec![0.0, 0.0, 3.0]);
        assert_eq!(series_add(&a, &b).coeffs(), &[1.0, 2.0, 3.0]);
        assert_eq!(series_add(&a, &CausalSeries::zero()), a);
        let cancel = series_add(&CausalSeries::new(vec![1.0]), &CausalSeries::new(vec![-1.0]));
        assert!(cancel.is_empty());
    }

    #[test]
    fn mul_tracks_exponents() {
        // (z - 1) z^-3 = z^-2 - z^-3
        let p = series_mul(&LaurentSeries::z_minus(1.0), &LaurentSeries::monomial(-3, 1.0));
        assert_eq!(p.start_delay(), 2);
        assert_eq!(p.coeffs(), &[1.0, -1.0]);

        let a = ls(1, &[0.5, -2.0]);
        assert_eq!(series_mul(&a, &LaurentSeries::constant(1.0)), a);

        // hand convolution: (z-2)(z-3) = z^2 - 5z + 6
        let q = series_mul(&LaurentSeries::z_minus(2.0), &LaurentSeries::z_minus(3.0));
        assert_eq!(q.terms(), vec![(2, 1.0), (1, -5.0), (0, 6.0)]);
    }

    #[test]
    fn causal_check_reports_offenders() {
        assert!(causal_check(&ls(1, &[1.0, 3.0]), 1e-12).causal);
        let r = causal_check(&ls(-1, &[2.0, 0.0, 1.0]), 1e-12);
        assert!(!r.causal);
        assert_eq!(r.offenders, vec![(1, 2.0)]);
        // offender below tolerance is accepted
        assert!(causal_check(&ls(-1, &[1e-13, 1.0]), 1e-12).causal);
    }

    #[test]
    fn laurent_trims_both_ends() {
        let s = ls(-2, &[0.0, 1e-16, 4.0, 0.0, 1e-15]);
        assert_eq!(s.start_delay(), 0);
        assert_eq!(s.coeffs(), &[4.0]);
        assert!(ls(3, &[0.0, 0.0]).is_zero());
    }

    #[test]
    fn eval_matches_direct_sum() {
        let z = Complex64::from_polar(1.3, 0.4);
        let s = ls(-1, &[2.0, -1.0, 0.5]);
        let direct = z * 2.0 - 1.0 + z.inv() * 0.5;
        assert!((s.eval(z) - direct).norm() < 1e-14);
        let c = CausalSeries::new(vec![1.0, 0.0, -2.0]);
        let direct = Complex64::new(1.0, 0.0) - z.inv().powi(2) * 2.0;
        assert!((c.eval(z) - direct).norm() < 1e-14);
    }

    fn arb_laurent() -> impl Strategy<Value = LaurentSeries> {
        (-3i32..4, prop::collection::vec(-5.0f64..5.0, 0..6)).prop_map(|(s, c)| ls(s, &c))
    }

    fn arb_causal() -> impl Strategy<Value = CausalSeries> {
        prop::collection::vec(-5.0f64..5.0, 0..7).prop_map(CausalSeries::new)
    }

    proptest! {
        #[test]
        fn mul_commutative_associative(a in arb_laurent(), b in arb_laurent(), c in arb_laurent()) {
            prop_assert!((&a * &b).max_abs_diff(&(&b * &a)) <= 1e-12);
            let left = &(&a * &b) * &c;
            let right = &a * &(&b * &c);
            prop_assert!(left.max_abs_diff(&right) <= 1e-12 * (1.0 + left.coeffs().iter().fold(0.0f64, |m, x| m.max(x.abs()))));
        }

        #[test]
        fn product_of_causal_is_causal(a in arb_causal(), b in arb_causal()) {
            let p = series_mul(&a.to_laurent(), &b.to_laurent());
            prop_assert!(causal_check(&p, 0.0).causal);
        }
    }
}
