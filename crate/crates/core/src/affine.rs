//! Banded Toeplitz matrices of transfer functions and affine maps `f ↦ V f + h`.

use std::fmt;

use crate::error::SynthError;
use crate::series::{CausalSeries, LaurentSeries, Series};
use crate::spatial::{LaurentVector, SpatialVector};

/// Tolerance for deciding that an assembled entry is causal.
pub const CAUSAL_TOL: f64 = 1e-12;

/// A dense matrix of series mapping a vector of extent `in_extent` to one of
/// extent `out_extent`. Rows and columns are addressed by spatial offset.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesMatrix<S> {
    out_extent: usize,
    in_extent: usize,
    entries: Vec<S>,
}

impl<S: Series> SeriesMatrix<S> {
    pub fn zeros(out_extent: usize, in_extent: usize) -> Self {
        Self {
            out_extent,
            in_extent,
            entries: vec![S::zero(); (2 * out_extent + 1) * (2 * in_extent + 1)],
        }
    }

    /// The Toeplitz matrix with `entry(k, j) = kernel[k - j]`, truncated to the given window.
    pub fn from_kernel(kernel: &SpatialVector<S>, out_extent: usize, in_extent: usize) -> Self {
        let mut m = Self::zeros(out_extent, in_extent);
        for k in m.rows() {
            for j in m.cols() {
                m.set(k, j, kernel.at(k - j));
            }
        }
        m
    }

    pub fn identity(extent: usize) -> Self {
        Self::from_kernel(&SpatialVector::impulse(0, S::constant(1.0)), extent, extent)
    }

    pub fn out_extent(&self) -> usize {
        self.out_extent
    }

    pub fn in_extent(&self) -> usize {
        self.in_extent
    }

    /// Output offsets `-out..=out`.
    pub fn rows(&self) -> std::ops::RangeInclusive<i64> {
        -(self.out_extent as i64)..=self.out_extent as i64
    }

    /// Input offsets `-in..=in`.
    pub fn cols(&self) -> std::ops::RangeInclusive<i64> {
        -(self.in_extent as i64)..=self.in_extent as i64
    }

    fn index(&self, k: i64, j: i64) -> usize {
        let ko = k + self.out_extent as i64;
        let jo = j + self.in_extent as i64;
        assert!(
            (0..=2 * self.out_extent as i64).contains(&ko) && (0..=2 * self.in_extent as i64).contains(&jo),
            "entry ({k}, {j}) outside a {}x{} matrix window",
            self.out_extent,
            self.in_extent
        );
        ko as usize * (2 * self.in_extent + 1) + jo as usize
    }

    pub fn get(&self, k: i64, j: i64) -> &S {
        &self.entries[self.index(k, j)]
    }

    pub fn set(&mut self, k: i64, j: i64, s: S) {
        let i = self.index(k, j);
        self.entries[i] = s;
    }

    pub fn map<T: Series>(&self, f: impl Fn(&S) -> T) -> SeriesMatrix<T> {
        SeriesMatrix {
            out_extent: self.out_extent,
            in_extent: self.in_extent,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn times_series(&self, s: &S) -> Self {
        self.map(|x| x.times(s))
    }

    /// Matrix-vector product; offsets of `v` outside the column window are ignored.
    pub fn apply(&self, v: &SpatialVector<S>) -> SpatialVector<S> {
        let mut out = SpatialVector::zeros(self.out_extent);
        for k in self.rows() {
            let mut acc = S::zero();
            for j in self.cols() {
                let a = self.get(k, j);
                if a.is_zero() {
                    continue;
                }
                let x = v.at(j);
                if !x.is_zero() {
                    acc = acc.plus(&a.times(&x));
                }
            }
            out.set(k, acc);
        }
        out
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &SeriesMatrix<S>) -> Self {
        assert_eq!(self.in_extent, other.out_extent, "inner extents differ");
        let mut out = Self::zeros(self.out_extent, other.in_extent);
        for k in self.rows() {
            for j in other.cols() {
                let mut acc = S::zero();
                for i in self.cols() {
                    let (a, b) = (self.get(k, i), other.get(i, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.plus(&a.times(b));
                    }
                }
                out.set(k, j, acc);
            }
        }
        out
    }

    /// First pair of entries on a common diagonal that differ by more than `tol`,
    /// as `((k1, j1), (k2, j2))`.
    pub fn toeplitz_violation(&self, tol: f64) -> Option<((i64, i64), (i64, i64))> {
        for k in self.rows() {
            for j in self.cols() {
                let (k2, j2) = (k + 1, j + 1);
                if k2 > self.out_extent as i64 || j2 > self.in_extent as i64 {
                    continue;
                }
                if self.get(k, j).max_abs_diff(self.get(k2, j2)) > tol {
                    return Some(((k, j), (k2, j2)));
                }
            }
        }
        None
    }

    pub fn is_toeplitz(&self, tol: f64) -> bool {
        self.toeplitz_violation(tol).is_none()
    }

    /// True if every off-diagonal entry is zero.
    pub fn is_diagonal(&self) -> bool {
        self.rows()
            .all(|k| self.cols().all(|j| k == j || self.get(k, j).is_zero()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let oe = self.out_extent.max(other.out_extent) as i64;
        let ie = self.in_extent.max(other.in_extent) as i64;
        let mut worst = 0.0f64;
        for k in -oe..=oe {
            for j in -ie..=ie {
                worst = worst.max(self.at(k, j).max_abs_diff(&other.at(k, j)));
            }
        }
        worst
    }

    /// Entry at `(k, j)`, zero outside the window.
    pub fn at(&self, k: i64, j: i64) -> S {
        if k.unsigned_abs() as usize > self.out_extent || j.unsigned_abs() as usize > self.in_extent {
            S::zero()
        } else {
            self.get(k, j).clone()
        }
    }

    /// Every `(k, j, entry)` triple in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, &S)> {
        let (oe, ie) = (self.out_extent as i64, self.in_extent as i64);
        let w = 2 * self.in_extent + 1;
        self.entries
            .iter()
            .enumerate()
            .map(move |(i, s)| ((i / w) as i64 - oe, (i % w) as i64 - ie, s))
    }
}

impl SeriesMatrix<LaurentSeries> {
    /// Converts every entry to a causal series, reporting the first offender.
    pub fn to_causal(&self, block: &str) -> Result<SeriesMatrix<CausalSeries>, SynthError> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for (k, _, s) in self.iter() {
            match s.to_causal(CAUSAL_TOL) {
                Ok(c) => entries.push(c),
                Err(report) => {
                    return Err(SynthError::CausalityViolation {
                        block: block.to_string(),
                        offset: k,
                        offenders: report.offenders,
                    })
                }
            }
        }
        Ok(SeriesMatrix {
            out_extent: self.out_extent,
            in_extent: self.in_extent,
            entries,
        })
    }
}

impl SeriesMatrix<CausalSeries> {
    pub fn to_laurent(&self) -> SeriesMatrix<LaurentSeries> {
        self.map(CausalSeries::to_laurent)
    }

    /// Largest delay stored in any entry, plus one.
    pub fn max_len(&self) -> usize {
        self.entries.iter().map(CausalSeries::len).max().unwrap_or(0)
    }
}

/// One block row `V f + h` of an affine map, with its declared output extent.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineBlock<S> {
    pub name: String,
    pub v: SeriesMatrix<S>,
    pub h: SpatialVector<S>,
}

impl<S: Series> AffineBlock<S> {
    pub fn new(name: impl Into<String>, v: SeriesMatrix<S>, h: SpatialVector<S>) -> Self {
        let h = h.with_extent(v.out_extent());
        Self {
            name: name.into(),
            v,
            h,
        }
    }

    pub fn out_extent(&self) -> usize {
        self.v.out_extent()
    }

    pub fn evaluate(&self, f: &SpatialVector<S>) -> SpatialVector<S> {
        self.v.apply(f).plus(&self.h)
    }
}

/// A stack of affine blocks sharing one input vector.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMapPair<S> {
    pub input_extent: usize,
    pub blocks: Vec<AffineBlock<S>>,
}

/// Raw blocks acting on `r12` or `λ`, before the causal decomposition is substituted.
pub type RawMapPair = AffineMapPair<LaurentSeries>;
/// Blocks acting on the free parameter `f`; every entry is causal.
pub type AssembledMapPair = AffineMapPair<CausalSeries>;

impl<S: Series> AffineMapPair<S> {
    pub fn block(&self, name: &str) -> Option<&AffineBlock<S>> {
        self.blocks.iter().find(|b| b.name == name)
    }

    /// Total number of stacked spatial rows.
    pub fn total_rows(&self) -> usize {
        self.blocks.iter().map(|b| 2 * b.out_extent() + 1).sum()
    }

    /// Every block evaluated at `f`.
    pub fn evaluate(&self, f: &SpatialVector<S>) -> Vec<SpatialVector<S>> {
        self.blocks.iter().map(|b| b.evaluate(f)).collect()
    }

    /// Largest coefficient difference against another stack, with its location.
    ///
    /// Blocks are compared pairwise in stack order; differing names or counts
    /// are reported as an infinite mismatch.
    pub fn compare(&self, other: &Self) -> Mismatch {
        let mut worst = Mismatch {
            block: String::new(),
            part: Part::H,
            row: 0,
            col: None,
            diff: 0.0,
        };
        if self.blocks.len() != other.blocks.len() || self.input_extent != other.input_extent {
            worst.diff = f64::INFINITY;
            worst.block = "<stack shape>".into();
            return worst;
        }
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            let oe = a.out_extent().max(b.out_extent()) as i64;
            let ie = self.input_extent as i64;
            for k in -oe..=oe {
                for j in -ie..=ie {
                    let d = a.v.at(k, j).max_abs_diff(&b.v.at(k, j));
                    if d > worst.diff {
                        worst = Mismatch {
                            block: a.name.clone(),
                            part: Part::V,
                            row: k,
                            col: Some(j),
                            diff: d,
                        };
                    }
                }
                let d = a.h.at(k).max_abs_diff(&b.h.at(k));
                if d > worst.diff {
                    worst = Mismatch {
                        block: a.name.clone(),
                        part: Part::H,
                        row: k,
                        col: None,
                        diff: d,
                    };
                }
            }
        }
        worst
    }
}

impl AssembledMapPair {
    /// Adds `delta` to the coefficient of `z^-delay` in entry `(k, j)` of `V` in block `block`.
    pub fn perturb_v(&mut self, block: usize, k: i64, j: i64, delay: usize, delta: f64) {
        let v = &mut self.blocks[block].v;
        let s = v.get(k, j).plus(&CausalSeries::monomial(delay, delta));
        v.set(k, j, s);
    }

    /// Largest delay of any entry of `V` or `h`.
    pub fn max_degree(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| b.v.max_len().max(b.h.max_len()))
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }
}

/// Which half of an affine block a mismatch was found in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    V,
    H,
}

/// Location and size of the largest coefficient difference between two stacks.
#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    pub block: String,
    pub part: Part,
    pub row: i64,
    pub col: Option<i64>,
    pub diff: f64,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.part, self.col) {
            (Part::V, Some(j)) => write!(f, "V[{}]({}, {}) differs by {:e}", self.block, self.row, j, self.diff),
            _ => write!(f, "h[{}]({}) differs by {:e}", self.block, self.row, self.diff),
        }
    }
}

/// The zero-padded shifted identity taking extent `e` to extent `e + 1`, scaled by `z^-4`.
pub fn shift_operator(e: usize) -> SeriesMatrix<LaurentSeries> {
    let mut s = SeriesMatrix::zeros(e + 1, e);
    for j in s.cols() {
        s.set(j, j, LaurentSeries::monomial(-4, 1.0));
    }
    s
}

/// Substitutes `x = S f + g` into a raw stack `x ↦ V x + h`, giving `f ↦ (V S) f + (V g + h)`.
///
/// The raw stack acts on vectors of extent `E + 1`; the result acts on extent `E`.
/// Every entry of the result must be causal.
pub fn substitute_decomposition(
    raw: &RawMapPair,
    g: &LaurentVector,
) -> Result<AssembledMapPair, SynthError> {
    let e = raw
        .input_extent
        .checked_sub(1)
        .expect("raw stack must act on extent >= 1");
    let s = shift_operator(e);
    let g = g.with_extent(raw.input_extent);
    let mut blocks = Vec::with_capacity(raw.blocks.len());
    for b in &raw.blocks {
        let v = b.v.compose(&s).to_causal(&b.name)?;
        let h = b.v.apply(&g).plus(&b.h);
        let h = h.to_causal(CAUSAL_TOL).map_err(|(offset, offenders)| {
            SynthError::CausalityViolation {
                block: b.name.clone(),
                offset,
                offenders,
            }
        })?;
        blocks.push(AffineBlock::new(b.name.clone(), v, h));
    }
    Ok(AffineMapPair {
        input_extent: e,
        blocks,
    })
}
